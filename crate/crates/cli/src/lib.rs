//! Front end for the `ergolab` binary: configs, reports, the repro catalog and one
//! function per subcommand.

pub mod config;
pub mod report;
pub mod repro;

use num_rational::BigRational;
use serde_json::json;

use ergolab::catalog::{catalog, map_kinds, measure_kinds, natural_measure, parse_map, parse_measure};
use ergolab::cylinders::refine;
use ergolab::entropy::{rokhlin_entropy, smb_entropy};
use ergolab::jointlab::{
    alpha_mixing_estimate, joint_mixing_curve, l2_joint_test_with_engines, log_linear_slope, AverageReport, CorrelationMode,
    Observable, VERDICT_INCONCLUSIVE,
};
use ergolab::maps::BranchForm;
use ergolab::numeric::format_rational;
use ergolab::rankone::{base_length, build_tower, partition_entropy, tower_to_map, PartitionConvention, RPolicy, TowerSpec};
use ergolab::{Error, IntervalSet, Result};

use config::ExperimentConfig;
use report::{Check, CurveRow, Report};

/// Exit status for a failed invocation.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Parameter(_) | Error::Domain(_) | Error::Precondition(_) | Error::Blowup { .. } => 2,
        _ => 1,
    }
}

/// Exit status for a finished report.
pub fn report_code(report: &Report) -> i32 {
    if report.all_pass() { 0 } else { 3 }
}

fn window_rows(r: &AverageReport) -> Vec<CurveRow> {
    r.rows
        .iter()
        .map(|w| CurveRow {
            n_or_window: format!("{}-{}", w.m, w.n),
            value_re: w.mean_re,
            value_im: w.mean_im,
            stderr: w.stderr,
            target: r.target_re,
        })
        .collect()
}

/// Joint Cesàro averages for an INI config.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let maps = config.maps.iter().map(|m| parse_map(m)).collect::<Result<Vec<_>>>()?;
    let measures = config.measures.iter().map(|m| parse_measure(m)).collect::<Result<Vec<_>>>()?;
    let observables = config
        .observables
        .iter()
        .enumerate()
        .map(|(i, o)| Observable::parse(o).map_err(|e| Error::parse(format!("[observables] map{i}"), e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let nu = parse_measure(&config.nu).map_err(|e| Error::parse("[sampling] nu", e.to_string()))?;
    let horizon = config.schedule.windows.iter().map(|w| w.1).max().unwrap_or(0);
    let engines = config.strategies(horizon)?;
    let map_refs: Vec<_> = maps.iter().collect();
    let measure_refs: Vec<_> = measures.iter().collect();
    let rep = l2_joint_test_with_engines(
        &map_refs,
        &measure_refs,
        &observables,
        &config.schedule,
        config.samples,
        config.seed,
        &nu,
        config.tolerance,
        Some(&engines),
    )?;
    let mut checks = Vec::new();
    if rep.verdict != VERDICT_INCONCLUSIVE {
        let last = rep.rows.last().expect("schedule is non-empty");
        checks.push(Check::at_most("deviation at last window", last.deviation, config.tolerance, last.stderr));
    }
    let echo = json!({
        "maps": config.maps,
        "measures": config.measures,
        "observables": config.observables,
        "engines": engines.iter().map(|s| s.render()).collect::<Vec<_>>(),
        "windows": config.schedule.render(),
        "samples": config.samples,
        "seed": config.seed,
        "nu": config.nu,
        "tolerance": config.tolerance,
    });
    let curve = window_rows(&rep);
    let verdict = rep.verdict.clone();
    Ok(Report::new("joint-avg", echo, serde_json::to_value(&rep).unwrap(), checks, &verdict).with_curve(curve))
}

fn measure_for(map: &str, measure: Option<&str>) -> Result<String> {
    match measure {
        Some(m) => Ok(m.to_string()),
        None => natural_measure(map),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyMethod {
    Rokhlin,
    Smb,
    Both,
}

pub struct SmbOptions {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
}

pub fn entropy(map: &str, measure: Option<&str>, method: EntropyMethod, tol: f64, smb: &SmbOptions) -> Result<Report> {
    let measure = measure_for(map, measure)?;
    let t = parse_map(map)?;
    let mu = parse_measure(&measure)?;
    let mut results = serde_json::Map::new();
    if method != EntropyMethod::Smb {
        results.insert("rokhlin".into(), serde_json::to_value(rokhlin_entropy(&t, &mu, tol)?).unwrap());
    }
    if method != EntropyMethod::Rokhlin {
        results.insert("smb".into(), serde_json::to_value(smb_entropy(&t, &mu, smb.n, smb.samples, smb.seed)?).unwrap());
    }
    let config = json!({ "map": map, "measure": measure, "tol": tol, "smb_n": smb.n, "smb_samples": smb.samples, "seed": smb.seed });
    Ok(Report::new("entropy", config, results.into(), Vec::new(), "computed"))
}

/// `--sets B A_1 ... A_k` against `--maps T_1 ... T_k`.
pub fn mixing(maps: &[String], measures: &[String], sets: &[String], n_max: usize, mode: CorrelationMode) -> Result<Report> {
    if sets.len() != maps.len() + 1 {
        return Err(Error::parse("--sets", "expected the base set followed by one set per map"));
    }
    let measures: Vec<String> = if measures.is_empty() {
        maps.iter().map(|m| natural_measure(m)).collect::<Result<_>>()?
    } else if measures.len() == maps.len() {
        measures.to_vec()
    } else {
        return Err(Error::parse("--measures", "one measure per map"));
    };
    let parsed = maps.iter().map(|m| parse_map(m)).collect::<Result<Vec<_>>>()?;
    let mus = measures.iter().map(|m| parse_measure(m)).collect::<Result<Vec<_>>>()?;
    let sets_parsed = sets
        .iter()
        .enumerate()
        .map(|(i, s)| IntervalSet::parse(s).map_err(|e| Error::parse(format!("--sets[{i}]"), e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let lam = parse_measure("lebesgue")?;
    let map_refs: Vec<_> = parsed.iter().collect();
    let mu_refs: Vec<_> = mus.iter().collect();
    let curve = joint_mixing_curve(&map_refs, &mu_refs, &sets_parsed[0], &sets_parsed[1..], n_max, mode, &lam)?;
    let mode_json = match mode {
        CorrelationMode::Exact => json!("exact"),
        CorrelationMode::MonteCarlo { samples, seed } => json!({ "mc": { "samples": samples, "seed": seed } }),
    };
    let config = json!({ "maps": maps, "measures": measures, "sets": sets, "n_max": n_max, "mode": mode_json });
    let rows = curve
        .iter()
        .map(|p| CurveRow { n_or_window: p.n.to_string(), value_re: p.value, value_im: 0.0, stderr: p.stderr, target: p.target })
        .collect();
    Ok(Report::new("mixing", config, json!({ "curve": curve }), Vec::new(), "computed").with_curve(rows))
}

pub fn alpha(map: &str, measure: Option<&str>, l: usize, n_list: &[usize], depth: u32) -> Result<Report> {
    let measure = measure_for(map, measure)?;
    let t = parse_map(map)?;
    let mu = parse_measure(&measure)?;
    let est = alpha_mixing_estimate(&t, &mu, l, n_list, depth)?;
    let points: Vec<(usize, f64)> = est.curve.iter().map(|p| (p.n, p.value)).collect();
    let slope = if points.len() >= 2 { log_linear_slope(&points) } else { None };
    let rows = est
        .curve
        .iter()
        .map(|p| CurveRow { n_or_window: p.n.to_string(), value_re: p.value, value_im: 0.0, stderr: 0.0, target: 0.0 })
        .collect();
    let config = json!({ "map": map, "measure": measure, "l": l, "n": n_list, "depth": depth });
    let verdict = est.note.clone();
    Ok(Report::new("alpha", config, json!({ "estimate": est, "log_linear_slope": slope }), Vec::new(), &verdict).with_curve(rows))
}

/// `word,lo,hi,mass` rows of the rank-`n` refinement.
pub fn cylinders_csv(map: &str, measure: Option<&str>, n: usize, floor: f64) -> Result<String> {
    let measure = measure_for(map, measure)?;
    let t = parse_map(map)?;
    let mu = parse_measure(&measure)?;
    let r = refine::<BigRational>(&t, &mu, n, floor)?;
    let mut out = String::from("word,lo,hi,mass\n");
    for c in &r.cylinders {
        let word = c.word.iter().map(u64::to_string).collect::<Vec<_>>().join("-");
        let (lo, hi) = match &c.interval {
            Some(iv) => (format_rational(&iv.lo), format_rational(&iv.hi)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("{word},{lo},{hi},{:?}\n", c.mass));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankOneEmit {
    Map,
    Heights,
    Entropy,
}

/// `q` as `3,3,3` and `s` as one comma list per stage separated by `;`.
pub fn parse_custom_tower(q: &str, s: &str) -> Result<TowerSpec> {
    let q: Vec<u64> = q
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| Error::parse("--q", format!("cannot parse '{v}'"))))
        .collect::<Result<_>>()?;
    let s: Vec<Vec<u64>> = s
        .split(';')
        .map(|stage| {
            stage
                .split(',')
                .map(|v| v.trim().parse().map_err(|_| Error::parse("--s", format!("cannot parse '{v}'"))))
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<_>>()?;
    TowerSpec::custom(q, s)
}

pub fn rankone(spec: &TowerSpec, stage: usize, emit: RankOneEmit) -> Result<Report> {
    let config = json!({ "spec": spec.name, "stage": stage, "emit": format!("{emit:?}").to_lowercase() });
    let results = match emit {
        RankOneEmit::Heights => json!({ "heights": spec.heights(stage)?.iter().map(|h| h.to_string()).collect::<Vec<_>>() }),
        RankOneEmit::Map => {
            let tower = build_tower(spec, stage, &RPolicy::Limit { stage })?;
            let map = tower_to_map(&tower)?;
            let branches: Vec<_> = map
                .branches()
                .iter()
                .map(|b| {
                    let offset = match &b.form {
                        BranchForm::Affine { offset, .. } => format_rational(offset),
                        _ => String::new(),
                    };
                    json!({ "lo": format_rational(&b.domain.lo), "hi": format_rational(&b.domain.hi), "translation": offset })
                })
                .collect();
            json!({ "r": format_rational(&tower.r), "height": tower.height(), "branches": branches, "undefined": map.undefined.to_string() })
        }
        RankOneEmit::Entropy => {
            let base = base_length(spec, &RPolicy::Limit { stage })?;
            let pe = partition_entropy(spec, stage, &base.r, PartitionConvention::FromStageZero)?;
            json!({ "r": base, "partition_entropy": pe })
        }
    };
    Ok(Report::new("rankone", config, results, Vec::new(), "computed"))
}

/// The `catalog` listing.
pub fn catalog_listing() -> serde_json::Value {
    let pairs: Vec<_> = catalog()
        .iter()
        .map(|e| json!({ "map": e.map, "measure": e.measure, "lebesgue_preserving": e.lebesgue_preserving }))
        .collect();
    let maps: Vec<_> = map_kinds().iter().map(|(k, ex)| json!({ "kind": k, "example": ex })).collect();
    let repro: Vec<_> = repro::IDS.iter().map(|id| json!({ "id": id, "description": repro::describe(id) })).collect();
    json!({ "maps": maps, "measures": measure_kinds().iter().map(|(k, ex)| json!({ "kind": k, "example": ex })).collect::<Vec<_>>(), "pairs": pairs, "repro": repro })
}
