use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::branch::{Branch, BranchForm};
use super::{CountableFamily, PiecewiseMap};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::numeric::{floor_int, format_rational, int, rat};

fn cell(lo: BigRational, hi: BigRational) -> Interval<BigRational> {
    Interval { lo, hi }
}

/// `x -> beta x + gamma mod 1`.
pub fn make_linear_mod1(beta: BigRational, gamma: BigRational) -> Result<PiecewiseMap> {
    let one = BigRational::one();
    let two = int(2);
    let admissible = gamma >= BigRational::zero()
        && gamma < one
        && ((beta >= two) || (beta > one && gamma.is_zero()));
    if !admissible {
        return Err(Error::Parameter(format!(
            "(beta, gamma) = ({}, {}) is not admissible",
            format_rational(&beta),
            format_rational(&gamma)
        )));
    }
    let top = floor_int(&(&beta + &gamma)).to_i64().ok_or_else(|| Error::Parameter("beta too large".into()))?;
    let mut branches = Vec::new();
    for k in 0..=top {
        let kr = int(k);
        let lo = ((&kr - &gamma) / &beta).max(BigRational::zero());
        let hi = ((&kr + &one - &gamma) / &beta).min(one.clone());
        if lo >= hi {
            continue;
        }
        branches.push(Branch::affine(k as u64, cell(lo, hi), beta.clone(), &gamma - &kr));
    }
    let mut map = PiecewiseMap::new("linear", branches)?;
    if beta.is_integer() && gamma.is_zero() {
        map.lebesgue_preserving = true;
        map.integer_base = beta.to_integer().to_u32();
    }
    Ok(map)
}

/// Continued-fraction map `1/x mod 1` with branches `1..=k` enumerated.
pub fn make_gauss(k: u64) -> Result<PiecewiseMap> {
    if k < 2 {
        return Err(Error::Parameter("Gauss cutoff K must be at least 2".into()));
    }
    let branches = (1..=k).map(|n| CountableFamily::Gauss.branch(n)).collect();
    let map = PiecewiseMap::new("gauss", branches)?;
    Ok(map.with_tail(CountableFamily::Gauss, cell(BigRational::zero(), rat(1, k as i64 + 1))))
}

/// Interval exchange: the `i`-th interval (1-based) moves to position `pi[i-1]`.
pub fn make_iet(a: &[BigRational], pi: &[usize]) -> Result<PiecewiseMap> {
    let n = a.len();
    if n == 0 || pi.len() != n {
        return Err(Error::Parameter("lengths and permutation must have equal non-zero size".into()));
    }
    if a.iter().any(|x| !x.is_positive()) || a.iter().sum::<BigRational>() != BigRational::one() {
        return Err(Error::Parameter("IET lengths must be positive and sum to 1".into()));
    }
    let mut seen = vec![false; n];
    for &p in pi {
        if p == 0 || p > n || seen[p - 1] {
            return Err(Error::Parameter("pi is not a permutation of 1..n".into()));
        }
        seen[p - 1] = true;
    }
    let mut branches = Vec::new();
    let mut start = BigRational::zero();
    for i in 0..n {
        let target: BigRational = (0..n).filter(|&j| pi[j] < pi[i]).map(|j| a[j].clone()).sum();
        let end = &start + &a[i];
        branches.push(Branch::affine(i as u64 + 1, cell(start.clone(), end.clone()), BigRational::one(), &target - &start));
        start = end;
    }
    let mut map = PiecewiseMap::new("iet", branches)?;
    map.lebesgue_preserving = true;
    Ok(map)
}

/// Translation amounts `beta_{pi(i)-1}(a^pi) - beta_{i-1}(a)` computed from the permuted vector.
pub fn iet_translations_from_permuted_vector(a: &[BigRational], pi: &[usize]) -> Vec<BigRational> {
    let n = a.len();
    let mut inv = vec![0; n];
    for (i, &p) in pi.iter().enumerate() {
        inv[p - 1] = i;
    }
    let a_pi: Vec<BigRational> = (0..n).map(|k| a[inv[k]].clone()).collect();
    let prefix = |v: &[BigRational], k: usize| v[..k].iter().cloned().sum::<BigRational>();
    (0..n).map(|i| prefix(&a_pi, pi[i] - 1) - prefix(a, i)).collect()
}

/// Rotation by `alpha` realized as a two-interval exchange.
pub fn make_rotation(alpha: BigRational) -> Result<PiecewiseMap> {
    if !alpha.is_positive() || alpha >= BigRational::one() {
        return Err(Error::Parameter("rotation angle must lie in (0, 1)".into()));
    }
    let mut map = make_iet(&[BigRational::one() - &alpha, alpha], &[2, 1])?;
    map.name = "rotation".into();
    Ok(map)
}

/// Skew tent `x/a` on `[0, a)`, `(1 - x)/(1 - a)` on `[a, 1)`.
pub fn make_skew_tent(a: BigRational) -> Result<PiecewiseMap> {
    if !a.is_positive() || a >= BigRational::one() {
        return Err(Error::Parameter("tent parameter must lie in (0, 1)".into()));
    }
    let one = BigRational::one();
    let b = &one - &a;
    let branches = vec![
        Branch::affine(0, cell(BigRational::zero(), a.clone()), a.recip(), BigRational::zero()),
        Branch::affine(1, cell(a.clone(), one.clone()), -b.recip(), b.recip()),
    ];
    let mut map = PiecewiseMap::new("tent", branches)?;
    map.lebesgue_preserving = true;
    Ok(map)
}

/// Generalised Lüroth series map: intervals of the given lengths stacked from the right,
/// `eps = true` selects the decreasing branch `(r_n - x)/L_n`.
pub fn make_gls(lengths: &[BigRational], eps: &[bool], tail_mass: BigRational) -> Result<PiecewiseMap> {
    if lengths.is_empty() || eps.len() != lengths.len() {
        return Err(Error::Parameter("need one orientation flag per length".into()));
    }
    if lengths.iter().any(|l| !l.is_positive()) || lengths.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Parameter("GLS lengths must be positive and non-increasing".into()));
    }
    if tail_mass.is_negative() || lengths.iter().sum::<BigRational>() + &tail_mass != BigRational::one() {
        return Err(Error::Parameter("GLS lengths plus tail must sum to 1".into()));
    }
    let mut branches = Vec::new();
    let mut right = BigRational::one();
    for (i, (l, &e)) in lengths.iter().zip(eps).enumerate() {
        let left = &right - l;
        let b = if e {
            Branch::affine(i as u64 + 1, cell(left.clone(), right.clone()), -l.recip(), &right / l)
        } else {
            Branch::affine(i as u64 + 1, cell(left.clone(), right.clone()), l.recip(), -(&left / l))
        };
        branches.push(b);
        right = left;
    }
    let mut map = PiecewiseMap::new("gls", branches)?;
    map.lebesgue_preserving = tail_mass.is_zero();
    Ok(map)
}

/// Lüroth map `n(n+1)x - n` on `[1/(n+1), 1/n)` with branches `1..=k` enumerated.
pub fn make_luroth(k: u64) -> Result<PiecewiseMap> {
    if k < 2 {
        return Err(Error::Parameter("Lüroth cutoff K must be at least 2".into()));
    }
    let branches = (1..=k).map(|n| CountableFamily::Luroth.branch(n)).collect();
    let mut map = PiecewiseMap::new("luroth", branches)?
        .with_tail(CountableFamily::Luroth, cell(BigRational::zero(), rat(1, k as i64 + 1)));
    map.lebesgue_preserving = true;
    Ok(map)
}

/// Logistic map `4x(1 - x)`.
pub fn make_ulam() -> Result<PiecewiseMap> {
    let half = rat(1, 2);
    let branches = vec![
        Branch::new(0, cell(BigRational::zero(), half.clone()), Interval::unit(), true, BranchForm::Logistic),
        Branch::new(1, cell(half, BigRational::one()), Interval::unit(), false, BranchForm::Logistic),
    ];
    PiecewiseMap::new("ulam", branches)
}

/// Cubic Chebyshev-type map `16x^3 - 24x^2 + 9x`, critical points 1/4 and 3/4.
pub fn make_uvn_cubic() -> Result<PiecewiseMap> {
    let cuts = [BigRational::zero(), rat(1, 4), rat(3, 4), BigRational::one()];
    let branches = (0..3)
        .map(|i| {
            Branch::new(
                i as u64,
                cell(cuts[i].clone(), cuts[i + 1].clone()),
                Interval::unit(),
                i != 1,
                BranchForm::Chebyshev3 { piece: i as u8 },
            )
        })
        .collect();
    PiecewiseMap::new("cubic", branches)
}

/// Agrees with `2x mod 1` modulo 1/2: adds 1/2 on `[0, 1/4)` and subtracts it on `[3/4, 1)`.
pub fn make_offset_doubling() -> Result<PiecewiseMap> {
    let two = int(2);
    let q = |k: i64| rat(k, 4);
    let branches = vec![
        Branch::affine(0, cell(q(0), q(1)), two.clone(), rat(1, 2)),
        Branch::affine(1, cell(q(1), q(2)), two.clone(), int(0)),
        Branch::affine(2, cell(q(2), q(3)), two.clone(), int(-1)),
        Branch::affine(3, cell(q(3), q(4)), two, rat(-3, 2)),
    ];
    let mut map = PiecewiseMap::new("offset-doubling", branches)?;
    map.lebesgue_preserving = true;
    Ok(map)
}

/// Full tent `1 - |2x - 1|` on `[0, 1)`; conjugate of the logistic map under [`psi`](super::psi).
pub fn make_full_tent() -> Result<PiecewiseMap> {
    make_skew_tent(rat(1, 2))
}

/// Three-fold zigzag `3x`, `2 - 3x`, `3x - 2`; conjugate of the cubic map under [`psi`](super::psi).
pub fn make_zigzag3() -> Result<PiecewiseMap> {
    let t = |k: i64| rat(k, 3);
    let three = int(3);
    let branches = vec![
        Branch::affine(0, cell(t(0), t(1)), three.clone(), BigRational::zero()),
        Branch::affine(1, cell(t(1), t(2)), -three.clone(), int(2)),
        Branch::affine(2, cell(t(2), t(3)), three, int(-2)),
    ];
    let mut map = PiecewiseMap::new("zigzag3", branches)?;
    map.lebesgue_preserving = true;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::super::{psi, BranchForm};
    use super::*;
    use crate::interval::IntervalSet;
    use crate::numeric;

    fn f(x: f64) -> BigRational {
        numeric::rational_from_f64(x)
    }

    #[test]
    fn linear_mod1_partitions() {
        let t = make_linear_mod1(int(2), BigRational::zero()).unwrap();
        assert_eq!(t.branches().len(), 2);
        assert_eq!(t.branches()[1].domain.lo, rat(1, 2));
        let t = make_linear_mod1(rat(5, 2), BigRational::zero()).unwrap();
        assert_eq!(t.branches().len(), 3);
        assert!((t.eval_f64(0.9) - 0.25).abs() < 1e-12);
        assert!(matches!(make_linear_mod1(rat(13, 10), rat(1, 2)), Err(Error::Parameter(_))));
        let t = make_linear_mod1(rat(5, 2), rat(1, 4)).unwrap();
        let total: BigRational = t.branches().iter().map(|b| b.domain.length()).sum();
        assert_eq!(total, BigRational::one());
        assert_eq!(t.branches()[0].image.lo, rat(1, 4));
    }

    #[test]
    fn gauss_basics() {
        let g = make_gauss(50).unwrap();
        assert!((g.eval_f64(0.4) - 0.5).abs() < 1e-12);
        let b = g.branch_at(0.5).unwrap();
        assert!((b.log_abs_derivative(0.5) - 4f64.ln()).abs() < 1e-12);
        assert_eq!(g.tail.as_ref().unwrap().region.length(), rat(1, 51));
        assert!(matches!(make_gauss(1), Err(Error::Parameter(_))));
    }

    #[test]
    fn iet_examples() {
        let r = make_iet(&[rat(1, 2), rat(1, 2)], &[2, 1]).unwrap();
        assert!((r.eval_f64(0.25) - 0.75).abs() < 1e-15);
        let t = make_iet(&[rat(1, 3), rat(2, 3)], &[2, 1]).unwrap();
        assert_eq!(t.eval_exact(&rat(1, 2)).unwrap(), rat(1, 6));
        assert_eq!(t.eval_exact(&rat(1, 6)).unwrap(), rat(5, 6));
        let p = t.preimage(&IntervalSet::<BigRational>::unit()).unwrap();
        assert_eq!(p.set, IntervalSet::unit());
        assert!(make_iet(&[rat(1, 3), rat(1, 3)], &[2, 1]).is_err());
    }

    #[test]
    fn iet_readings_agree() {
        for (a, pi) in [
            (vec![rat(1, 3), rat(2, 3)], vec![2, 1]),
            (vec![rat(1, 5), rat(3, 10), rat(1, 2)], vec![3, 1, 2]),
            (vec![rat(1, 4), rat(1, 4), rat(1, 8), rat(3, 8)], vec![4, 3, 2, 1]),
        ] {
            let m = make_iet(&a, &pi).unwrap();
            let shifts = iet_translations_from_permuted_vector(&a, &pi);
            for (b, s) in m.branches().iter().zip(&shifts) {
                match &b.form {
                    BranchForm::Affine { offset, .. } => assert_eq!(offset, s),
                    _ => unreachable!(),
                }
            }
        }
        let r = make_rotation(rat(1, 3)).unwrap();
        assert_eq!(r.eval_exact(&rat(1, 2)).unwrap(), rat(5, 6));
        assert_eq!(r.eval_exact(&rat(5, 6)).unwrap(), rat(1, 6));
    }

    #[test]
    fn tent_examples() {
        let t = make_skew_tent(f(0.3)).unwrap();
        assert!((t.eval_f64(0.3) - 1.0).abs() < 1e-12);
        let t = make_skew_tent(rat(1, 2)).unwrap();
        assert!((t.eval_f64(0.75) - 0.5).abs() < 1e-15);
        let p = t.preimage(&IntervalSet::interval(BigRational::zero(), rat(1, 2)).unwrap()).unwrap();
        let expect = IntervalSet::normalize(vec![(rat(0, 1), rat(1, 4)), (rat(3, 4), rat(1, 1))]).unwrap();
        assert_eq!(p.set, expect);
        assert!(make_skew_tent(int(1)).is_err());
    }

    #[test]
    fn gls_examples() {
        let l = make_luroth(40).unwrap();
        assert!((l.eval_f64(0.4) - 0.4).abs() < 1e-12);
        assert!((l.eval_f64(0.75) - 0.5).abs() < 1e-12);
        assert_eq!(l.branch_at(0.4).unwrap().label, 2);
        let d = make_gls(&[rat(1, 2), rat(1, 2)], &[false, false], BigRational::zero()).unwrap();
        assert!((d.eval_f64(0.75) - 0.5).abs() < 1e-15);
        assert!((d.eval_f64(0.2) - 0.4).abs() < 1e-15);
        let e = make_gls(&[rat(1, 2), rat(1, 2)], &[true, false], BigRational::zero()).unwrap();
        assert!((e.eval_f64(0.75) - 0.5).abs() < 1e-15);
        assert!((e.eval_f64(0.9) - 0.2).abs() < 1e-12);
        assert!(make_gls(&[rat(1, 2), rat(1, 3)], &[false, false], BigRational::zero()).is_err());
    }

    #[test]
    fn polynomial_maps() {
        let u = make_ulam().unwrap();
        assert_eq!(u.eval_f64(0.5), 1.0);
        let c = make_uvn_cubic().unwrap();
        assert_eq!(c.eval_f64(0.0), 0.0);
        assert_eq!(c.branches()[2].forward_f64(1.0), 1.0);
        let x: f64 = 0.3;
        assert!((psi((2.0 * x) % 1.0) - u.eval_f64(psi(x))).abs() < 1e-12);
    }

    #[test]
    fn conjugacies_on_grid() {
        let u = make_ulam().unwrap();
        let c = make_uvn_cubic().unwrap();
        let tent = make_full_tent().unwrap();
        let zig = make_zigzag3().unwrap();
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0;
            assert!((psi(tent.eval_f64(x)) - u.eval_f64(psi(x))).abs() < 1e-10);
            assert!((psi(zig.eval_f64(x)) - c.eval_f64(psi(x))).abs() < 1e-10);
            if x < 0.5 {
                assert!((psi(2.0 * x) - u.eval_f64(psi(x))).abs() < 1e-10);
            }
            if x < 1.0 / 3.0 {
                assert!((psi(3.0 * x) - c.eval_f64(psi(x))).abs() < 1e-10);
            }
        }
        // the doubling identity fails off [0, 1/2): psi(2x - 1) differs from psi(2x)
        let x = 0.7;
        assert!((psi((2.0 * x) % 1.0) - u.eval_f64(psi(x))).abs() > 0.1);
    }

    #[test]
    fn branch_round_trip() {
        let maps = vec![
            make_linear_mod1(rat(5, 2), rat(1, 4)).unwrap(),
            make_gauss(20).unwrap(),
            make_skew_tent(f(0.3)).unwrap(),
            make_ulam().unwrap(),
            make_uvn_cubic().unwrap(),
            make_luroth(10).unwrap(),
        ];
        for m in &maps {
            for b in m.branches() {
                let (lo, hi) = b.domain_f64();
                for k in 1..20 {
                    let x = lo + (hi - lo) * k as f64 / 20.0;
                    let y = b.forward_f64(x);
                    assert!((b.inverse_f64(y) - x).abs() < 1e-13, "{} {x}", m.name);
                }
                let xr = (&b.domain.lo * int(2) + &b.domain.hi) / int(3);
                if let Ok(y) = b.forward::<BigRational>(&xr) {
                    if let Ok(back) = b.inverse::<BigRational>(&y) {
                        assert_eq!(back, xr);
                    }
                }
            }
        }
    }

    #[test]
    fn offset_doubling_agrees_mod_half() {
        let s = make_offset_doubling().unwrap();
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0;
            let d = (s.eval_f64(x) - (2.0 * x) % 1.0).rem_euclid(0.5);
            assert!(d.min(0.5 - d) < 1e-12);
        }
    }

    #[test]
    fn lebesgue_preservation_is_exact() {
        let set = IntervalSet::normalize(vec![(rat(1, 7), rat(2, 5)), (rat(5, 9), rat(8, 9))]).unwrap();
        for m in [
            make_linear_mod1(int(3), BigRational::zero()).unwrap(),
            make_skew_tent(rat(3, 10)).unwrap(),
            make_offset_doubling().unwrap(),
            make_iet(&[rat(1, 5), rat(3, 10), rat(1, 2)], &[3, 1, 2]).unwrap(),
            make_gls(&[rat(1, 2), rat(1, 4), rat(1, 4)], &[true, false, true], BigRational::zero()).unwrap(),
        ] {
            assert_eq!(m.preimage(&set).unwrap().set.length(), set.length(), "{}", m.name);
        }
    }

    #[test]
    fn preimage_distributes_over_disjoint_union() {
        let t = make_linear_mod1(rat(5, 2), rat(1, 4)).unwrap();
        let a = IntervalSet::interval(rat(1, 10), rat(3, 10)).unwrap();
        let b = IntervalSet::interval(rat(3, 10), rat(9, 10)).unwrap();
        let lhs = t.preimage(&a.union(&b)).unwrap().set;
        let rhs = t.preimage(&a).unwrap().set.union(&t.preimage(&b).unwrap().set);
        assert_eq!(lhs, rhs);
    }
}
