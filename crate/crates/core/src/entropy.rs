//! Entropy by Rokhlin's integral formula and by the Shannon–McMillan–Breiman estimator.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::cylinders::{itinerary_strategy, sample_point, smb_statistic};
use crate::error::{Error, Result};
use crate::maps::{BlaschkeData, Branch, BranchForm, CountableFamily, PiecewiseMap};
use crate::measures::DensityMeasure;
use crate::numeric::to_f64;
use crate::quadrature::integrate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rokhlin,
    Smb,
    Blaschke,
    Series,
}

/// An entropy value in nats with its error bound.
#[derive(Clone, Debug, Serialize)]
pub struct EntropyResult {
    pub value: f64,
    pub method: Method,
    pub error_bound: f64,
    /// Quadrature cells, or samples for SMB.
    pub evaluations: usize,
    pub stderr: Option<f64>,
    pub warnings: Vec<String>,
}

fn ratio_integrand<'a>(b: &'a Branch, mu: &'a DensityMeasure) -> impl Fn(f64) -> f64 + 'a {
    move |x: f64| {
        let rho = mu.density(x);
        if rho == 0.0 || !rho.is_finite() {
            return 0.0;
        }
        let y = b.forward_f64(x);
        let v = (b.log_abs_derivative(x) + mu.density(y).ln() - rho.ln()) * rho;
        if v.is_finite() { v } else { 0.0 }
    }
}

/// Mesh of a branch domain refined at density breakpoints and their pullbacks.
fn branch_mesh(b: &Branch, mu: &DensityMeasure) -> Vec<f64> {
    let (lo, hi) = b.domain_f64();
    let mut pts = vec![lo, hi];
    if let Some(bp) = mu.breakpoints() {
        let (ilo, ihi) = (to_f64(&b.image.lo), to_f64(&b.image.hi));
        for p in bp {
            let pf = to_f64(p);
            if pf > lo && pf < hi {
                pts.push(pf);
            }
            if pf > ilo && pf < ihi {
                pts.push(b.inverse_f64(pf));
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

struct Partial {
    value: f64,
    error: f64,
    cells: usize,
}

fn branch_integral(b: &Branch, mu: &DensityMeasure, tol: f64) -> Result<Partial> {
    let mesh = branch_mesh(b, mu);
    let f = ratio_integrand(b, mu);
    let mut out = Partial { value: 0.0, error: 0.0, cells: 0 };
    if mu.breakpoints().is_some() && b.constant_slope().is_some() {
        // integrand is constant on every mesh cell
        for w in mesh.windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            out.value += f(m) * (w[1] - w[0]);
            out.cells += 1;
        }
        return Ok(out);
    }
    let cell_tol = tol / (mesh.len().max(2) - 1) as f64;
    for w in mesh.windows(2) {
        let q = integrate(&f, w[0], w[1], cell_tol)?;
        out.value += q.value;
        out.error += q.error;
        out.cells += 1;
    }
    Ok(out)
}

/// `Σ_{n > k} f(n)` for `f(n) = ln(n(n+1)) / (n(n+1))`: direct sum then a midpoint-integral remainder.
pub fn luroth_tail(k: u64) -> (f64, f64) {
    let f = |x: f64| (x * (x + 1.0)).ln() / (x * (x + 1.0));
    let stop = k + 200_000;
    let mut s = 0.0;
    for n in (k + 1..=stop).rev() {
        s += f(n as f64);
    }
    let a = stop as f64 + 0.5;
    // x = a / u maps [a, ∞) onto (0, 1]
    let g = |u: f64| if u <= 0.0 { 0.0 } else { f(a / u) * a / (u * u) };
    let q = integrate(g, 0.0, 1.0, 1e-15).map(|q| q.value).unwrap_or(0.0);
    let bound = 2.0 * (a.ln() + 2.0) / (a * a * a);
    (s + q, bound)
}

fn gauss_tail(map: &PiecewiseMap, mu: &DensityMeasure, eps: f64, k: u64, tol: f64) -> Result<Partial> {
    let rho = |x: f64| mu.density(x);
    // ∫_0^eps -2 ln x ρ(x) dx on a geometric mesh toward the singularity
    let mut deriv = 0.0;
    let mut err = 0.0;
    let mut cells = 0;
    let mut hi = eps;
    while hi > 1e-300 {
        let lo = hi * 1e-3;
        let q = integrate(|x| -2.0 * x.ln() * rho(x), lo, hi, tol * 1e-3)?;
        deriv += q.value;
        err += q.error;
        cells += 1;
        hi = lo;
        if q.value.abs() < 1e-18 {
            break;
        }
    }
    // ∫_tail ln ρ(Tx) ρ(x) dx = ∫_0^1 ln ρ(y) (P_tail ρ)(y) dy
    let kept: Vec<Branch> = map.branches().to_vec();
    let p_tail = move |y: f64| {
        let mut s = rho(y);
        for b in &kept {
            let x = b.inverse_f64(y);
            s -= rho(x) / (b.log_abs_derivative(x).exp());
        }
        s
    };
    let push = integrate(|y| rho(y).ln() * p_tail(y), 0.0, 1.0, tol)?;
    let own = integrate(|x| rho(x).ln() * rho(x), 0.0, eps, tol)?;
    let _ = k;
    Ok(Partial {
        value: deriv + push.value - own.value,
        error: err + push.error + own.error,
        cells: cells + 2,
    })
}

/// `h = Σ_branches ∫ (log|T'| + log ρ∘T − log ρ) ρ dλ`.
pub fn rokhlin_entropy(map: &PiecewiseMap, mu: &DensityMeasure, tol: f64) -> Result<EntropyResult> {
    if !map.undefined.is_empty() {
        return Err(Error::Precondition("entropy needs an everywhere defined map".into()));
    }
    let branches = map.branches();
    let symbolic = mu.is_lebesgue() && branches.iter().all(|b| b.constant_slope().is_some());
    let mut value = 0.0;
    let mut error = 0.0;
    let mut cells = 0;
    let mut warnings = Vec::new();
    if symbolic {
        let mut by_slope: BTreeMap<BigRational, BigRational> = BTreeMap::new();
        for b in branches {
            let s = b.constant_slope().unwrap().clone();
            let s = if s < BigRational::zero() { -s } else { s };
            *by_slope.entry(s).or_insert_with(BigRational::zero) += b.domain.length();
        }
        for (s, mass) in &by_slope {
            value += to_f64(s).ln() * to_f64(mass);
        }
        cells = by_slope.len();
    } else {
        let tol_b = tol / (branches.len() + 2) as f64;
        let parts: Result<Vec<Partial>> = branches.par_iter().map(|b| branch_integral(b, mu, tol_b)).collect();
        for p in parts? {
            value += p.value;
            error += p.error;
            cells += p.cells;
        }
    }
    if let Some(t) = &map.tail {
        let eps = to_f64(&t.region.hi);
        let k = branches.iter().map(|b| b.label).max().unwrap_or(1);
        match t.family {
            CountableFamily::Gauss => {
                let p = gauss_tail(map, mu, eps, k, tol / 4.0)?;
                value += p.value;
                error += p.error;
                cells += p.cells;
            }
            CountableFamily::Luroth if mu.is_lebesgue() => {
                let (s, bound) = luroth_tail(k);
                value += s;
                error += bound;
                cells += 1;
            }
            CountableFamily::Odometer if mu.is_lebesgue() => {}
            _ => return Err(Error::Precondition("tail handled only for its natural measure".into())),
        }
        if !mu.is_lebesgue() && !matches!(t.family, CountableFamily::Gauss) {
            warnings.push("tail integrated with the natural measure".into());
        }
    }
    if !value.is_finite() {
        return Err(Error::NumericalFailure("entropy integral diverged".into()));
    }
    Ok(EntropyResult { value, method: Method::Rokhlin, error_bound: error, evaluations: cells, stderr: None, warnings })
}

/// Sample mean of `-(1/n) log µ(A^n(x))` over µ-distributed points.
pub fn smb_entropy(map: &PiecewiseMap, mu: &DensityMeasure, n: usize, samples: usize, seed: u64) -> Result<EntropyResult> {
    if samples == 0 || n == 0 {
        return Err(Error::Parameter("need n >= 1 and at least one sample".into()));
    }
    let stats = smb_samples(map, mu, n, samples, seed)?;
    let resampled: usize = stats.iter().map(|s| s.1).sum();
    let values: Vec<f64> = stats.iter().map(|s| s.0).collect();
    // shifted sum keeps identical samples exact
    let mean = values[0] + values.iter().map(|v| v - values[0]).sum::<f64>() / samples as f64;
    let var = if samples > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (samples - 1) as f64
    } else {
        0.0
    };
    let stderr = (var / samples as f64).sqrt();
    let mut warnings = Vec::new();
    if resampled * 100 > samples {
        warnings.push(format!("{resampled} boundary resamples out of {samples} draws"));
    }
    Ok(EntropyResult { value: mean, method: Method::Smb, error_bound: 3.0 * stderr, evaluations: samples, stderr: Some(stderr), warnings })
}

/// Individual SMB statistics with the number of boundary resamples for each.
pub fn smb_samples(map: &PiecewiseMap, mu: &DensityMeasure, n: usize, samples: usize, seed: u64) -> Result<Vec<(f64, usize)>> {
    let strategy = itinerary_strategy(map, n);
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut k = i;
            let mut tries = 0;
            loop {
                let p = sample_point(map, mu, seed, k)?;
                match smb_statistic(map, mu, strategy, &p, n) {
                    Ok(v) => return Ok((v, tries)),
                    Err(Error::Boundary { .. }) if tries < 100 => {
                        tries += 1;
                        k += samples as u64;
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect()
}

/// `∫ P_{z0}(u) log Σ_j (1-|a_j|^2)/|u-a_j|^2 dσ(u)` by the periodic trapezoidal rule.
pub fn blaschke_entropy(data: &BlaschkeData, tol: f64) -> Result<EntropyResult> {
    let z0 = data.fixed_point()?;
    let rule = |n: usize| -> f64 {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                data.poisson_density(z0, t) * data.derivative(t).ln()
            })
            .sum::<f64>()
            / n as f64
    };
    let mut n = 64;
    let mut prev = rule(n);
    loop {
        n *= 2;
        let cur = rule(n);
        let diff = (cur - prev).abs();
        if diff <= tol / 10.0 || n >= 1 << 22 {
            if diff > tol {
                return Err(Error::NumericalFailure("trapezoidal rule did not settle".into()));
            }
            return Ok(EntropyResult { value: cur, method: Method::Blaschke, error_bound: diff, evaluations: n, stderr: None, warnings: vec![] });
        }
        prev = cur;
    }
}

/// `-Σ L_n log L_n` of a finite partition.
pub fn gls_entropy(lengths: &[BigRational]) -> Result<EntropyResult> {
    if lengths.iter().any(|l| l <= &BigRational::zero()) {
        return Err(Error::Parameter("lengths must be positive".into()));
    }
    let total: BigRational = lengths.iter().cloned().sum();
    let missing = 1.0 - to_f64(&total);
    let value = lengths.iter().map(|l| {
        let x = to_f64(l);
        -x * x.ln()
    }).sum();
    let mut warnings = vec![];
    if missing.abs() > 0.0 {
        warnings.push(format!("lengths leave {missing:e} of the interval undescribed"));
    }
    Ok(EntropyResult {
        value,
        method: Method::Series,
        error_bound: if missing > 0.0 { f64::INFINITY } else { 0.0 },
        evaluations: lengths.len(),
        stderr: None,
        warnings,
    })
}

/// Lüroth entropy `Σ ln(n(n+1))/(n(n+1))`, first `k` terms exactly and the rest by [`luroth_tail`].
pub fn luroth_entropy(k: u64) -> EntropyResult {
    let head: f64 = (1..=k).rev().map(|n| {
        let m = (n * (n + 1)) as f64;
        m.ln() / m
    }).sum();
    let (tail, bound) = luroth_tail(k);
    EntropyResult { value: head + tail, method: Method::Series, error_bound: bound, evaluations: k as usize, stderr: None, warnings: vec![] }
}

/// Whether all branches of the map carry the given form kind.
pub fn all_affine(map: &PiecewiseMap) -> bool {
    map.branches().iter().all(|b| matches!(b.form, BranchForm::Affine { .. }))
}
