//! Frozen reference values computed independently of the library.

use std::f64::consts::{LN_2, PI};

use ergolab::catalog::{parse_map, parse_measure};
use ergolab::entropy::{gls_entropy, rokhlin_entropy};
use ergolab::jointlab::{correlation, gauss_entropy_beta, CorrelationMode};
use ergolab::numeric::{rat, to_f64};
use ergolab::orbit::iterate_exact;
use ergolab::rankone::{base_length, RPolicy, TowerSpec};
use ergolab::IntervalSet;
use proptest::prelude::*;

fn half() -> IntervalSet {
    IntervalSet::interval(rat(0, 1), rat(1, 2)).unwrap()
}

#[test]
fn entropy_closed_forms() {
    let lam = parse_measure("lebesgue").unwrap();
    let g = rokhlin_entropy(&parse_map("gauss:K=50").unwrap(), &parse_measure("gauss").unwrap(), 1e-10).unwrap();
    assert!((g.value - PI * PI / (6.0 * LN_2)).abs() < 1e-9);
    let t = rokhlin_entropy(&parse_map("tent:a=0.7").unwrap(), &lam, 1e-12).unwrap();
    assert!((t.value - 0.6108643020548935).abs() < 1e-9);
    // golden mean shift: Parry measure entropy is log φ
    let p = rokhlin_entropy(&parse_map("linear:beta=phi").unwrap(), &parse_measure("parry:beta=phi,N=64").unwrap(), 1e-12).unwrap();
    assert!((p.value - 0.48121182505960347).abs() < 1e-9, "{}", p.value);
    let e = gls_entropy(&[rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
    assert!((e.value - 1.5 * LN_2).abs() < 1e-15);
}

#[test]
fn exact_correlation_at_lag_eight() {
    let lam = parse_measure("lebesgue").unwrap();
    let t2 = parse_map("linear:beta=2").unwrap();
    let t3 = parse_map("linear:beta=3").unwrap();
    let c = correlation(&[&t2, &t3], &half(), &[half(), half()], 8, CorrelationMode::Exact, &lam).unwrap();
    assert!((c.value - 0.1250190519737845).abs() < 1e-15, "{}", c.value);
    assert_eq!(c.tail_bound, 0.0);
}

#[test]
fn constants() {
    assert!((to_f64(&gauss_entropy_beta()) - 10.731016).abs() < 1e-5);
    let chacon = base_length(&TowerSpec::chacon(), &RPolicy::Limit { stage: 30 }).unwrap();
    assert!((to_f64(&chacon.r) - 2.0 / 3.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn offset_doubling_tracks_doubling_mod_half(k in 0i64..4096, n in 0usize..12) {
        let x = rat(k, 4096);
        let a = iterate_exact(&parse_map("linear:beta=2").unwrap(), &x, n).unwrap();
        let b = iterate_exact(&parse_map("offset-doubling").unwrap(), &x, n).unwrap();
        let d = to_f64(&(a - b)) * 2.0;
        prop_assert_eq!(d, d.round());
    }
}
