use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::branch::{Branch, BranchForm};
use super::PiecewiseMap;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numeric::rational_from_f64;

/// Circle Blaschke product `f(z) = C prod (z - a_j)/(1 - conj(a_j) z)` in the angle coordinate.
#[derive(Clone, Debug)]
pub struct BlaschkeData {
    pub c: Complex64,
    pub zeros: Vec<Complex64>,
}

impl BlaschkeData {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(self.c, |acc, a| acc * (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z))
    }

    /// Continuous lift of `arg f(e^{2 pi i t}) / 2 pi`, strictly increasing with total winding M.
    pub fn lifted_argument(&self, t: f64) -> f64 {
        let m = self.zeros.len() as f64;
        let e = Complex64::from_polar(1.0, -2.0 * PI * t);
        let mut s = self.c.arg() / (2.0 * PI) + m * t;
        for a in &self.zeros {
            let w = Complex64::new(1.0, 0.0) - a * e;
            s += w.im.atan2(w.re) / PI;
        }
        s
    }

    /// `|f'|` on the circle, which is also the derivative of the lift.
    pub fn derivative(&self, t: f64) -> f64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * t);
        self.zeros
            .iter()
            .map(|a| (1.0 - a.norm_sqr()) / (z - a).norm_sqr())
            .sum()
    }

    /// Solves `lifted_argument(t) = target` on `[lo, hi]`.
    pub fn solve_lift(&self, target: f64, lo: f64, hi: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        let mut t = 0.5 * (a + b);
        for _ in 0..200 {
            let g = self.lifted_argument(t) - target;
            if g.abs() < 1e-15 {
                break;
            }
            if g > 0.0 {
                b = t;
            } else {
                a = t;
            }
            let newton = t - g / self.derivative(t);
            t = if newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a < 1e-17 {
                break;
            }
        }
        t.clamp(lo, hi)
    }

    /// Interior fixed point `z0` of `f` on the disk.
    pub fn fixed_point(&self) -> Result<Complex64> {
        let mut z = Complex64::new(0.0, 0.0);
        for _ in 0..200 {
            z = self.eval(z);
        }
        for _ in 0..50 {
            let fz = self.eval(z);
            let mut dlog = Complex64::new(0.0, 0.0);
            for a in &self.zeros {
                dlog += 1.0 / (z - a) + a.conj() / (1.0 - a.conj() * z);
            }
            let g = fz - z;
            let dg = fz * dlog - 1.0;
            if !dg.is_finite() || dg.norm() < 1e-300 {
                break;
            }
            let step = g / dg;
            z -= step;
            if step.norm() < 1e-16 {
                break;
            }
        }
        if !z.is_finite() || z.norm() >= 1.0 || (self.eval(z) - z).norm() > 1e-12 {
            return Err(Error::NumericalFailure("no interior fixed point found".into()));
        }
        Ok(z)
    }

    /// Density of the absolutely continuous invariant measure in the angle coordinate.
    pub fn poisson_density(&self, z0: Complex64, t: f64) -> f64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * t);
        (1.0 - z0.norm_sqr()) / (z - z0).norm_sqr()
    }
}

/// Builds the circle map of a finite Blaschke product with `M >= 2` zeros.
pub fn make_blaschke_circle(c: Complex64, zeros: Vec<Complex64>) -> Result<PiecewiseMap> {
    if zeros.len() < 2 {
        return Err(Error::Parameter("need at least two zeros".into()));
    }
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("|C| = {} is not 1", c.norm())));
    }
    if zeros.iter().any(|a| a.norm() >= 1.0) {
        return Err(Error::Parameter("zeros must lie in the open disk".into()));
    }
    let expansion: f64 = zeros.iter().map(|a| (1.0 - a.norm()) / (1.0 + a.norm())).sum();
    if expansion <= 1.0 {
        return Err(Error::Parameter(format!(
            "sum (1-|a|)/(1+|a|) = {expansion} does not exceed 1"
        )));
    }
    let data = Arc::new(BlaschkeData { c, zeros });
    let m = data.zeros.len() as i64;
    let theta0 = data.lifted_argument(0.0);
    let mut first = theta0.floor() as i64 + 1;
    if (theta0 - theta0.round()).abs() < 1e-14 {
        first = theta0.round() as i64 + 1;
    }
    let mut cuts = Vec::new();
    let mut k = first;
    while (k as f64) < theta0 + m as f64 - 1e-14 {
        cuts.push(data.solve_lift(k as f64, 0.0, 1.0));
        k += 1;
    }
    let mut bounds = vec![0.0];
    bounds.extend(cuts.iter().copied());
    bounds.push(1.0);
    let mut branches = Vec::new();
    for (i, w) in bounds.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let level = if i == 0 { first - 1 } else { first + i as i64 - 1 };
        let img_lo = (data.lifted_argument(lo) - level as f64).clamp(0.0, 1.0);
        let img_hi = (data.lifted_argument(hi) - level as f64).clamp(0.0, 1.0);
        let img = |v: f64| if v.abs() < 1e-13 { 0.0 } else if (v - 1.0).abs() < 1e-13 { 1.0 } else { v };
        let domain = Interval { lo: rational_from_f64(lo), hi: rational_from_f64(hi) };
        let image = Interval { lo: rational_from_f64(img(img_lo)), hi: rational_from_f64(img(img_hi)) };
        branches.push(Branch::new(
            i as u64,
            domain,
            image,
            true,
            BranchForm::Blaschke { data: Arc::clone(&data), level },
        ));
    }
    let mut map = PiecewiseMap::new("blaschke", branches)?;
    map.blaschke = Some(data);
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squaring_is_doubling() {
        let m = make_blaschke_circle(Complex64::new(1.0, 0.0), vec![Complex64::new(0.0, 0.0); 2]).unwrap();
        assert_eq!(m.branches().len(), 2);
        assert!((m.eval_f64(0.3) - 0.6).abs() < 1e-12);
        assert!((m.eval_f64(0.7) - 0.4).abs() < 1e-12);
        let z0 = m.blaschke.as_ref().unwrap().fixed_point().unwrap();
        assert!(z0.norm() < 1e-12);
    }

    #[test]
    fn rejects_weak_expansion() {
        let a = vec![Complex64::new(0.9, 0.0), Complex64::new(-0.9, 0.0)];
        assert!(matches!(
            make_blaschke_circle(Complex64::new(1.0, 0.0), a),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn off_center_zeros_split_one_branch() {
        let a = vec![Complex64::new(0.3, 0.0), Complex64::new(-0.3, 0.1)];
        let m = make_blaschke_circle(Complex64::new(0.6, 0.8), a).unwrap();
        let data = m.blaschke.clone().unwrap();
        for i in 1..400 {
            let t = i as f64 / 400.0;
            let z = Complex64::from_polar(1.0, 2.0 * PI * t);
            let w = data.eval(z);
            let mut expect = w.arg() / (2.0 * PI);
            if expect < 0.0 {
                expect += 1.0;
            }
            let got = m.eval_f64(t);
            let d = (got - expect).abs();
            assert!(d.min(1.0 - d) < 1e-10, "t={t} got={got} expect={expect}");
        }
        let total: f64 = m.branches().iter().map(|b| {
            let (lo, hi) = b.domain_f64();
            data.lifted_argument(hi) - data.lifted_argument(lo)
        }).sum();
        assert!((total - 2.0).abs() < 1e-12);
    }
}
