//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 20_000;

/// Result of a quadrature: value and estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Quad {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Quad {
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by global
/// bisection of the worst cell.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quad> {
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    let mut cells = vec![(a, b, kronrod(&f, a, b))];
    loop {
        let (value, error) = cells
            .iter()
            .fold((0.0, 0.0), |(v, e), c| (v + c.2.value, e + c.2.error));
        if !value.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if error <= tol {
            return Ok(Quad { value, error });
        }
        if cells.len() >= MAX_INTERVALS {
            return Err(Error::NumericalFailure(format!(
                "quadrature on [{a}, {b}] stalled at error {error:e} > {tol:e}"
            )));
        }
        let worst = cells
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _) = cells.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NumericalFailure(format!(
                "quadrature cell collapsed near {lo}"
            )));
        }
        cells.push((lo, mid, kronrod(&f, lo, mid)));
        cells.push((mid, hi, kronrod(&f, mid, hi)));
    }
}

/// Three-point Gauss–Legendre rule, used for masses of very short intervals.
pub fn gauss_legendre3<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let d = h * (3.0f64 / 5.0).sqrt();
    h * (5.0 * f(c - d) + 8.0 * f(c) + 5.0 * f(c + d)) / 9.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| 3.0 * x * x, 0.0, 1.0, 1e-14).unwrap();
        assert!((q.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_singularity() {
        // int_0^1 -ln x dx = 1
        let q = integrate(|x: f64| -x.ln(), 0.0, 1.0, 1e-11).unwrap();
        assert!((q.value - 1.0).abs() < 1e-10, "{q:?}");
    }

    #[test]
    fn gauss_density_normalizes() {
        let q = integrate(|x| 1.0 / ((1.0 + x) * std::f64::consts::LN_2), 0.0, 1.0, 1e-13).unwrap();
        assert!((q.value - 1.0).abs() < 1e-13);
    }
}
