//! Family-restricted α-mixing and property-B estimates.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::chebyshev::{antiderivative, apply, clenshaw, gauss_transfer_matrix, ChebGrid};
use crate::cylinders::{has_exact_inverses, refine};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::maps::{CountableFamily, PiecewiseMap};
use crate::measures::DensityMeasure;
use crate::numeric::to_f64;

/// Mass below which rank-`l` cylinders of countable maps are lumped into one remainder atom.
pub const ATOM_MASS_FLOOR: f64 = 1e-4;
const CHEB_NODES: usize = 40;
const TRANSFER_TERMS: usize = 2000;
const MAX_DEPTH: u32 = 12;

pub const FAMILY_NOTE: &str = "estimated (family-restricted)";

#[derive(Clone, Debug, Serialize)]
pub struct MixingPoint {
    pub l: usize,
    pub n: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingEstimate {
    pub kind: String,
    pub family: String,
    pub curve: Vec<MixingPoint>,
    /// Fitted multiplicative constant (property B only).
    pub c: Option<f64>,
    pub atoms: usize,
    /// µ-mass of rank-`l` cylinders not enumerated individually.
    pub unenumerated_mass: f64,
    pub method: String,
    pub note: String,
}

impl MixingEstimate {
    /// Values at rank `l` in increasing `n`.
    pub fn values(&self, l: usize) -> Vec<f64> {
        self.curve.iter().filter(|p| p.l == l).map(|p| p.value).collect()
    }
}

/// Joint masses `µ(C ∩ T^{-(n+l)}J)` for atoms `C` and depth-`d` dyadic cells `J`.
struct JointTable {
    /// Per requested `n`: `joint[i][j]`.
    joint: Vec<Vec<Vec<f64>>>,
    /// Per requested `n`: `joint − µ(C)µ(J)`, computed exactly when possible.
    disc: Vec<Vec<Vec<f64>>>,
    prod: Vec<Vec<f64>>,
    atoms: usize,
    unenumerated: f64,
    method: &'static str,
}

fn cells(depth: u32) -> Vec<Interval<BigRational>> {
    let k = 1i64 << depth;
    (0..k)
        .map(|i| Interval {
            lo: BigRational::new(i.into(), k.into()),
            hi: BigRational::new((i + 1).into(), k.into()),
        })
        .collect()
}

fn joint_table(map: &PiecewiseMap, mu: &DensityMeasure, l: usize, ns: &[usize], depth: u32) -> Result<JointTable> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::Parameter(format!("dyadic depth must lie in 1..={MAX_DEPTH}")));
    }
    let finite = !map.is_countable() && map.undefined.is_empty() && has_exact_inverses(map);
    let gauss = matches!(&map.tail, Some(t) if t.family == CountableFamily::Gauss);
    if finite {
        exact_table(map, mu, l, ns, depth)
    } else if gauss {
        transfer_table(map, mu, l, ns, depth)
    } else {
        Err(Error::Precondition(format!(
            "{}: rank-{l} cylinders are not enumerable with exact preimages or a transfer operator",
            map.name
        )))
    }
}

fn exact_table(map: &PiecewiseMap, mu: &DensityMeasure, l: usize, ns: &[usize], depth: u32) -> Result<JointTable> {
    let atoms = refine::<BigRational>(map, mu, l, 0.0)?;
    let atom_sets: Vec<IntervalSet> = atoms
        .cylinders
        .iter()
        .filter_map(|c| c.interval.clone())
        .map(|iv| IntervalSet::interval(iv.lo, iv.hi))
        .collect::<Result<_>>()?;
    let cell_list = cells(depth);
    let exact_mass = |s: &IntervalSet| mu.measure_exact(s);
    let atom_mass: Vec<(f64, Option<BigRational>)> = atom_sets.iter().map(|s| (mu.measure_of(s), exact_mass(s))).collect();
    let cell_mass: Vec<(f64, Option<BigRational>)> = cell_list
        .iter()
        .map(|c| {
            let s = IntervalSet::interval(c.lo.clone(), c.hi.clone())?;
            Ok((mu.measure_of(&s), exact_mass(&s)))
        })
        .collect::<Result<_>>()?;
    let prod: Vec<Vec<f64>> = atom_mass.iter().map(|a| cell_mass.iter().map(|c| a.0 * c.0).collect()).collect();
    let mut joint = Vec::new();
    let mut disc = Vec::new();
    for &n in ns {
        let rows: Vec<Vec<(f64, f64)>> = cell_list
            .par_iter()
            .zip(cell_mass.par_iter())
            .map(|(cell, cm)| {
                let target = IntervalSet::interval(cell.lo.clone(), cell.hi.clone())?;
                let pre = map.preimage_iter(&target, n + l)?.set;
                Ok(atom_sets
                    .iter()
                    .zip(&atom_mass)
                    .map(|(a, am)| {
                        let inter = a.intersect(&pre);
                        match (mu.measure_exact(&inter), &am.1, &cm.1) {
                            (Some(e), Some(x), Some(y)) => (to_f64(&e), to_f64(&(&e - x * y))),
                            _ => {
                                let e = mu.measure_of(&inter);
                                (e, e - am.0 * cm.0)
                            }
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        // rows are per cell; transpose to per atom
        let na = atom_sets.len();
        joint.push((0..na).map(|i| rows.iter().map(|r| r[i].0).collect()).collect());
        disc.push((0..na).map(|i| rows.iter().map(|r| r[i].1).collect()).collect());
    }
    Ok(JointTable { joint, disc, prod, atoms: atom_sets.len(), unenumerated: 0.0, method: "exact preimages" })
}

/// `x = v_C(y)` and `|v_C'(y)|` for a Gauss cylinder word.
fn gauss_inverse(word: &[u64], y: f64) -> (f64, f64) {
    let mut z = y;
    let mut d = 1.0;
    for &k in word.iter().rev() {
        z = 1.0 / (k as f64 + z);
        d *= z * z;
    }
    (z, d)
}

fn transfer_table(map: &PiecewiseMap, mu: &DensityMeasure, l: usize, ns: &[usize], depth: u32) -> Result<JointTable> {
    let atoms = refine::<BigRational>(map, mu, l, ATOM_MASS_FLOOR)?;
    let grid = ChebGrid::new(CHEB_NODES);
    let matrix = gauss_transfer_matrix(&grid, TRANSFER_TERMS);
    let k = 1usize << depth;
    let edges: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    let cell_mass: Vec<f64> = (0..k).map(|i| mu.mass(edges[i], edges[i + 1] - edges[i])).collect();
    let atom_mass: Vec<f64> = atoms.cylinders.iter().map(|c| c.mass).collect();
    let max_n = ns.iter().copied().max().unwrap_or(0);
    // per atom and per iterate count, µ(C ∩ T^{-(n+l)}J) over all cells J
    let per_atom: Vec<Vec<Vec<f64>>> = atoms
        .cylinders
        .par_iter()
        .map(|c| {
            let mut g: Vec<f64> = grid
                .nodes
                .iter()
                .map(|&y| {
                    let (x, d) = gauss_inverse(&c.word, y);
                    mu.density(x) * d
                })
                .collect();
            let mut out = Vec::new();
            for n in 0..=max_n {
                if ns.contains(&n) {
                    let a = antiderivative(&grid.coefficients(&g));
                    let f: Vec<f64> = edges.iter().map(|&x| clenshaw(&a, x)).collect();
                    out.push((0..k).map(|j| f[j + 1] - f[j]).collect());
                }
                if n < max_n {
                    g = apply(&matrix, &g);
                }
            }
            out
        })
        .collect();
    let mut order: Vec<usize> = (0..=max_n).filter(|n| ns.contains(n)).collect();
    order.dedup();
    let enumerated: f64 = atom_mass.iter().sum();
    let rest = 1.0 - enumerated;
    let lump = rest > 1e-15;
    let mut prod: Vec<Vec<f64>> = atom_mass.iter().map(|a| cell_mass.iter().map(|c| a * c).collect()).collect();
    if lump {
        prod.push(cell_mass.iter().map(|c| rest * c).collect());
    }
    let mut joint = Vec::new();
    let mut disc = Vec::new();
    for &n in ns {
        let idx = order.iter().position(|&m| m == n).expect("requested n is tabulated");
        let mut rows: Vec<Vec<f64>> = per_atom.iter().map(|a| a[idx].clone()).collect();
        if lump {
            let r: Vec<f64> = (0..k).map(|j| cell_mass[j] - rows.iter().map(|row| row[j]).sum::<f64>()).collect();
            rows.push(r);
        }
        let d: Vec<Vec<f64>> = rows
            .iter()
            .zip(&prod)
            .map(|(r, p)| r.iter().zip(p).map(|(a, b)| a - b).collect())
            .collect();
        joint.push(rows);
        disc.push(d);
    }
    Ok(JointTable {
        joint,
        disc,
        prod,
        atoms: atom_mass.len() + lump as usize,
        unenumerated: rest.max(0.0),
        method: "Chebyshev transfer operator",
    })
}

/// Lower bound for `sup_{A,B} Σ_{i∈A, j∈B} m[i][j]` over row and column subsets.
///
/// Seeds with every dyadic column block and then alternates best responses.
fn cut_sup(m: &[Vec<f64>], depth: u32) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let cols = m[0].len();
    let prefix: Vec<Vec<f64>> = m
        .iter()
        .map(|row| {
            let mut p = vec![0.0; cols + 1];
            for j in 0..cols {
                p[j + 1] = p[j] + row[j];
            }
            p
        })
        .collect();
    let mut best = 0.0;
    let mut best_cols: Option<(usize, usize)> = None;
    for level in 0..=depth {
        let w = cols >> level;
        for b in 0..(1usize << level) {
            let (lo, hi) = (b * w, (b + 1) * w);
            let v: f64 = prefix.iter().map(|p| (p[hi] - p[lo]).max(0.0)).sum();
            if v > best {
                best = v;
                best_cols = Some((lo, hi));
            }
        }
    }
    let Some((lo, hi)) = best_cols else { return 0.0 };
    let mut in_b: Vec<bool> = (0..cols).map(|j| j >= lo && j < hi).collect();
    for _ in 0..64 {
        let in_a: Vec<bool> = m
            .iter()
            .map(|row| row.iter().zip(&in_b).filter(|(_, &s)| s).map(|(v, _)| v).sum::<f64>() > 0.0)
            .collect();
        let colsum: Vec<f64> = (0..cols)
            .map(|j| m.iter().zip(&in_a).filter(|(_, &s)| s).map(|(r, _)| r[j]).sum())
            .collect();
        let v: f64 = colsum.iter().map(|c| c.max(0.0)).sum();
        if v <= best {
            break;
        }
        best = v;
        in_b = colsum.iter().map(|&c| c > 0.0).collect();
    }
    best
}

fn family_label(l: usize, depth: u32) -> String {
    format!("A in sigma(rank-{l} cylinders), B in sigma(dyadic cells of depth {depth})")
}

/// `α(n) ≥ sup |µ(A ∩ T^{-(n+l)}B) − µ(A)µ(B)|` over the enumerated family.
pub fn alpha_mixing_estimate(
    map: &PiecewiseMap,
    mu: &DensityMeasure,
    l: usize,
    n_list: &[usize],
    depth: u32,
) -> Result<MixingEstimate> {
    let table = joint_table(map, mu, l, n_list, depth)?;
    let curve = n_list
        .iter()
        .zip(&table.disc)
        .map(|(&n, d)| {
            let neg: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
            MixingPoint { l, n, value: cut_sup(d, depth).max(cut_sup(&neg, depth)) }
        })
        .collect();
    Ok(MixingEstimate {
        kind: "alpha".into(),
        family: family_label(l, depth),
        curve,
        c: None,
        atoms: table.atoms,
        unenumerated_mass: table.unenumerated,
        method: table.method.into(),
        note: FAMILY_NOTE.into(),
    })
}

/// Smallest `c ≥ 1` bounding every enumerated ratio at the largest lag, then
/// `b_n = sup (µ(A ∩ T^{-(n+l)}B) − cµ(A)µ(B))` over the family.
pub fn property_b_fit(
    map: &PiecewiseMap,
    mu: &DensityMeasure,
    l_list: &[usize],
    n_list: &[usize],
    depth: u32,
) -> Result<MixingEstimate> {
    if l_list.is_empty() || n_list.is_empty() {
        return Err(Error::Parameter("need at least one rank and one lag".into()));
    }
    let tables: Vec<JointTable> = l_list.iter().map(|&l| joint_table(map, mu, l, n_list, depth)).collect::<Result<_>>()?;
    let last = n_list.iter().enumerate().max_by_key(|(_, &n)| n).map(|(i, _)| i).unwrap_or(0);
    let mut c: f64 = 1.0;
    for t in &tables {
        for (row, prow) in t.joint[last].iter().zip(&t.prod) {
            for (e, p) in row.iter().zip(prow) {
                if *p > 0.0 {
                    c = c.max(e / p);
                }
            }
        }
    }
    let mut curve = Vec::new();
    for (&l, t) in l_list.iter().zip(&tables) {
        for (k, &n) in n_list.iter().enumerate() {
            let m: Vec<Vec<f64>> = t.joint[k]
                .iter()
                .zip(&t.prod)
                .map(|(r, p)| r.iter().zip(p).map(|(e, q)| e - c * q).collect())
                .collect();
            curve.push(MixingPoint { l, n, value: cut_sup(&m, depth) });
        }
    }
    let unenumerated = tables.iter().map(|t| t.unenumerated).fold(0.0, f64::max);
    Ok(MixingEstimate {
        kind: "property-b".into(),
        family: family_label(*l_list.iter().max().unwrap(), depth),
        curve,
        c: Some(c),
        atoms: tables.iter().map(|t| t.atoms).max().unwrap_or(0),
        unenumerated_mass: unenumerated,
        method: tables[0].method.into(),
        note: FAMILY_NOTE.into(),
    })
}

/// Least-squares slope of `log v` against `n`.
pub fn log_linear_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, v)| *v > 0.0).map(|(n, v)| (*n as f64, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
