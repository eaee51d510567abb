//! Text specifications of maps and measures, and the catalog of standard pairs.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::maps::{self, PiecewiseMap};
use crate::measures::{self, DensityMeasure};
use crate::numeric::{format_rational, parse_real, to_f64};
use crate::rankone::{self, RPolicy, TowerSpec};

/// Branch count for countable maps given without an explicit `K`.
pub const DEFAULT_BRANCHES: u64 = 50;
/// Series length for Parry-type densities given without `N`.
pub const DEFAULT_TERMS: usize = 64;

/// `key=value` parameters separated by `,` or `;`; a token without `=` continues the previous list value.
fn params(spec: &str, body: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    if body.trim().is_empty() {
        return Ok(out);
    }
    for tok in body.split([',', ';']) {
        let tok = tok.trim();
        match tok.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), v.trim().to_string())),
            None => match out.last_mut() {
                Some((_, v)) => {
                    v.push(',');
                    v.push_str(tok);
                }
                None => return Err(Error::parse(spec, format!("expected key=value, found '{tok}'"))),
            },
        }
    }
    Ok(out)
}

struct Params<'a> {
    spec: &'a str,
    kv: Vec<(String, String)>,
}

impl<'a> Params<'a> {
    fn new(spec: &'a str, body: &str, allowed: &[&str]) -> Result<Self> {
        let kv = params(spec, body)?;
        for (k, _) in &kv {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::parse(spec, format!("unknown parameter '{k}' (expected one of {})", allowed.join(", "))));
            }
        }
        Ok(Params { spec, kv })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn real(&self, key: &str) -> Result<Option<BigRational>> {
        self.raw(key)
            .map(|v| parse_real(v).map_err(|_| Error::parse(self.spec, format!("parameter {key}: cannot parse '{v}'"))))
            .transpose()
    }

    fn required_real(&self, key: &str) -> Result<BigRational> {
        self.real(key)?.ok_or_else(|| Error::parse(self.spec, format!("missing parameter {key}")))
    }

    fn int(&self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::parse(self.spec, format!("parameter {key} must be a non-negative integer"))),
        }
    }

    fn list<T>(&self, key: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
        let v = self.raw(key).ok_or_else(|| Error::parse(self.spec, format!("missing parameter {key}")))?;
        v.split(',').map(|s| f(s.trim()).map_err(|_| Error::parse(self.spec, format!("parameter {key}: cannot parse '{s}'")))).collect()
    }
}

/// Parses `a+bi`, `a-bi`, `a`, or `bi`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim().replace(' ', "");
    let err = || Error::parse(s, "expected a complex number like 0.3+0.1i");
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not a leading sign or an exponent sign
        let bytes = body.as_bytes();
        let mut cut = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                cut = Some(i);
                break;
            }
        }
        let (re, im) = match cut {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            v => v.strip_prefix('+').unwrap_or(v),
        };
        let re = to_f64(&parse_real(re).map_err(|_| err())?);
        let im = to_f64(&parse_real(im).map_err(|_| err())?);
        return Ok(Complex64::new(re, im));
    }
    Ok(Complex64::new(to_f64(&parse_real(&t).map_err(|_| err())?), 0.0))
}

pub fn format_complex(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn split_kind(spec: &str) -> (&str, &str) {
    let t = spec.trim();
    t.split_once(':').unwrap_or((t, ""))
}

/// Builds a map from its specification, such as `linear:beta=5/2,gamma=0` or `rankone:chacon:stage=8`.
pub fn parse_map(spec: &str) -> Result<PiecewiseMap> {
    let (kind, body) = split_kind(spec);
    let mut map = match kind {
        "linear" => {
            let p = Params::new(spec, body, &["beta", "gamma"])?;
            maps::make_linear_mod1(p.required_real("beta")?, p.real("gamma")?.unwrap_or_else(BigRational::zero))?
        }
        "gauss" => maps::make_gauss(Params::new(spec, body, &["K"])?.int("K", DEFAULT_BRANCHES)?)?,
        "luroth" => maps::make_luroth(Params::new(spec, body, &["K"])?.int("K", DEFAULT_BRANCHES)?)?,
        "iet" => {
            let p = Params::new(spec, body, &["a", "pi"])?;
            // lengths are taken up to scale
            let a = p.list("a", parse_real)?;
            let total: BigRational = a.iter().sum();
            if !total.is_positive() {
                return Err(Error::parse(spec, "IET lengths must be positive"));
            }
            let a: Vec<BigRational> = a.iter().map(|x| x / &total).collect();
            let pi = p.list("pi", |s| s.parse::<usize>().map_err(|_| Error::parse(s, "permutation entry")))?;
            maps::make_iet(&a, &pi)?
        }
        "rotation" => maps::make_rotation(Params::new(spec, body, &["alpha"])?.required_real("alpha")?)?,
        "tent" => maps::make_skew_tent(Params::new(spec, body, &["a"])?.required_real("a")?)?,
        "gls" => match body.split_once(':') {
            Some(("luroth", rest)) => maps::make_luroth(Params::new(spec, rest, &["K"])?.int("K", DEFAULT_BRANCHES)?)?,
            _ => {
                let p = Params::new(spec, body, &["l", "eps", "tail"])?;
                let l = p.list("l", parse_real)?;
                let eps = match p.raw("eps") {
                    Some(_) => p.list("eps", |s| match s {
                        "0" => Ok(false),
                        "1" => Ok(true),
                        _ => Err(Error::parse(s, "orientation flag must be 0 or 1")),
                    })?,
                    None => vec![false; l.len()],
                };
                maps::make_gls(&l, &eps, p.real("tail")?.unwrap_or_else(BigRational::zero))?
            }
        },
        "blaschke" => {
            let p = Params::new(spec, body, &["C", "a"])?;
            let c = p.raw("C").map(parse_complex).transpose()?.unwrap_or(Complex64::new(1.0, 0.0));
            maps::make_blaschke_circle(c, p.list("a", parse_complex)?)?
        }
        "rankone" => {
            let (preset, rest) = body.split_once(':').unwrap_or((body, ""));
            let p = Params::new(spec, rest, &["stage", "K"])?;
            match (preset, p.raw("stage")) {
                ("vnk", None) => rankone::make_vnk(p.int("K", DEFAULT_BRANCHES)?)?,
                (_, Some(_)) => {
                    let stage = p.int("stage", 0)? as usize;
                    let t = TowerSpec::preset(preset)?;
                    rankone::tower_to_map(&rankone::build_tower(&t, stage, &RPolicy::Limit { stage })?)?
                }
                _ => return Err(Error::parse(spec, "rank-one maps need stage=N (vnk may omit it)")),
            }
        }
        "ulam" => maps::make_ulam()?,
        "cubic" => maps::make_uvn_cubic()?,
        "offset-doubling" => maps::make_offset_doubling()?,
        "full-tent" => maps::make_full_tent()?,
        "zigzag3" => maps::make_zigzag3()?,
        _ => return Err(Error::parse(spec, format!("unknown map kind '{kind}'"))),
    };
    map.name = spec.trim().to_string();
    Ok(map)
}

/// Builds a measure from `lebesgue`, `gauss`, `arcsine`, `parry:beta=..,N=64`, `linear-invariant:beta=..,gamma=..,N=64` or `blaschke:z0=..`.
pub fn parse_measure(spec: &str) -> Result<DensityMeasure> {
    let (kind, body) = split_kind(spec);
    match kind {
        "lebesgue" => Ok(measures::lebesgue()),
        "gauss" => Ok(measures::gauss_measure()),
        "arcsine" => Ok(measures::arcsine_measure()),
        "parry" => {
            let p = Params::new(spec, body, &["beta", "N"])?;
            measures::parry_beta(&p.required_real("beta")?, p.int("N", DEFAULT_TERMS as u64)? as usize)
        }
        "linear-invariant" => {
            let p = Params::new(spec, body, &["beta", "gamma", "N"])?;
            measures::linear_invariant_measure(
                &p.required_real("beta")?,
                &p.real("gamma")?.unwrap_or_else(BigRational::zero),
                p.int("N", DEFAULT_TERMS as u64)? as usize,
            )
        }
        "blaschke" => {
            let p = Params::new(spec, body, &["z0"])?;
            let z = p.raw("z0").ok_or_else(|| Error::parse(spec, "missing parameter z0"))?;
            measures::blaschke_measure(parse_complex(z)?)
        }
        _ => Err(Error::parse(spec, format!("unknown measure kind '{kind}'"))),
    }
}

/// Specification of the standard invariant measure of a map.
pub fn natural_measure(map_spec: &str) -> Result<String> {
    let (kind, body) = split_kind(map_spec);
    Ok(match kind {
        "linear" => {
            let p = Params::new(map_spec, body, &["beta", "gamma"])?;
            let beta = p.required_real("beta")?;
            let gamma = p.real("gamma")?.unwrap_or_else(BigRational::zero);
            match (beta.is_integer(), gamma.is_zero()) {
                (true, true) => "lebesgue".into(),
                (false, true) => format!("parry:beta={},N={DEFAULT_TERMS}", p.raw("beta").unwrap()),
                _ => format!("linear-invariant:beta={},gamma={},N={DEFAULT_TERMS}", p.raw("beta").unwrap(), format_rational(&gamma)),
            }
        }
        "gauss" => "gauss".into(),
        "ulam" | "cubic" => "arcsine".into(),
        "blaschke" => {
            let m = parse_map(map_spec)?;
            let data = m.blaschke.as_ref().ok_or_else(|| Error::parse(map_spec, "not a Blaschke product"))?;
            format!("blaschke:z0={}", format_complex(data.fixed_point()?))
        }
        _ => "lebesgue".into(),
    })
}

/// A standard (map, invariant measure) pair.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub map: &'static str,
    pub measure: String,
    /// Whether every branch is a translation or the map is otherwise Lebesgue-preserving.
    pub lebesgue_preserving: bool,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let e = |map: &'static str, measure: &str, lp| CatalogEntry { map, measure: measure.into(), lebesgue_preserving: lp };
    let natural = |map: &'static str| CatalogEntry {
        map,
        measure: natural_measure(map).expect("catalog maps have natural measures"),
        lebesgue_preserving: false,
    };
    vec![
        e("linear:beta=2", "lebesgue", true),
        e("linear:beta=3", "lebesgue", true),
        e("linear:beta=11", "lebesgue", true),
        e("linear:beta=phi", "parry:beta=phi,N=64", false),
        e("linear:beta=5/2", "parry:beta=5/2,N=64", false),
        e("linear:beta=5/2,gamma=1/3", "linear-invariant:beta=5/2,gamma=1/3,N=64", false),
        e("linear:beta=exp_hgauss", "parry:beta=exp_hgauss,N=64", false),
        e("gauss:K=50", "gauss", false),
        e("iet:a=1/3,1/6,1/2;pi=3,1,2", "lebesgue", true),
        e("rotation:alpha=sqrt2-1", "lebesgue", true),
        e("tent:a=0.3", "lebesgue", true),
        e("tent:a=0.7", "lebesgue", true),
        e("full-tent", "lebesgue", true),
        e("zigzag3", "lebesgue", true),
        e("offset-doubling", "lebesgue", true),
        e("gls:l=1/2,1/4,1/4;eps=0,1,0", "lebesgue", true),
        e("gls:luroth:K=40", "lebesgue", true),
        e("ulam", "arcsine", false),
        e("cubic", "arcsine", false),
        e("blaschke:C=1;a=0+0i,0+0i", "blaschke:z0=0+0i", false),
        natural("blaschke:C=1;a=0.3+0i,-0.3+0i"),
        e("rankone:vnk", "lebesgue", true),
        e("rankone:chacon:stage=6", "lebesgue", true),
        e("rankone:sa:stage=4", "lebesgue", true),
    ]
}

/// Map kinds accepted by [`parse_map`], with an example each.
pub fn map_kinds() -> Vec<(&'static str, &'static str)> {
    vec![
        ("linear", "linear:beta=5/2,gamma=0"),
        ("gauss", "gauss:K=50"),
        ("luroth", "luroth:K=40"),
        ("iet", "iet:a=1/3,2/3;pi=2,1"),
        ("rotation", "rotation:alpha=sqrt2-1"),
        ("tent", "tent:a=0.3"),
        ("gls", "gls:luroth:K=40 | gls:l=1/2,1/2;eps=0,1"),
        ("blaschke", "blaschke:C=1;a=0.3+0i,-0.3+0i"),
        ("rankone", "rankone:chacon:stage=8 | rankone:vnk"),
        ("ulam", "ulam"),
        ("cubic", "cubic"),
        ("offset-doubling", "offset-doubling"),
        ("full-tent", "full-tent"),
        ("zigzag3", "zigzag3"),
    ]
}

pub fn measure_kinds() -> Vec<(&'static str, &'static str)> {
    vec![
        ("lebesgue", "lebesgue"),
        ("gauss", "gauss"),
        ("arcsine", "arcsine"),
        ("parry", "parry:beta=phi,N=64"),
        ("linear-invariant", "linear-invariant:beta=5/2,gamma=1/3,N=64"),
        ("blaschke", "blaschke:z0=0.2+0.1i"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn spec_strings_from_the_docs() {
        for s in [
            "linear:beta=2.5,gamma=0",
            "gauss:K=50",
            "iet:a=1/3,2/3;pi=2,1",
            "tent:a=0.3",
            "gls:luroth:K=40",
            "blaschke:C=1;a=0.3+0i,-0.3+0i",
            "rankone:chacon:stage=8",
        ] {
            let m = parse_map(s).unwrap();
            assert_eq!(m.name, s);
        }
        let m = parse_map("iet:a=1/3,2/3;pi=2,1").unwrap();
        assert_eq!(m.eval_exact(&rat(1, 6)).unwrap(), rat(5, 6));
        for s in ["lebesgue", "gauss", "parry:beta=1.618,N=64", "blaschke:z0=0.1-0.2i", "arcsine"] {
            parse_measure(s).unwrap();
        }
    }

    #[test]
    fn malformed_specs_name_the_problem() {
        let e = parse_map("linear:beta=abc").unwrap_err().to_string();
        assert!(e.contains("beta"), "{e}");
        assert!(parse_map("warp:speed=9").is_err());
        assert!(parse_map("linear:gamma=0").is_err());
        assert!(parse_map("gauss:K=50,Q=1").is_err());
        assert!(parse_measure("parry:N=3").is_err());
        assert!(parse_map("rankone:chacon").is_err());
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("0.3+0i").unwrap(), Complex64::new(0.3, 0.0));
        assert_eq!(parse_complex("-0.3-0.25i").unwrap(), Complex64::new(-0.3, -0.25));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("1e-3+2i").unwrap(), Complex64::new(1e-3, 2.0));
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        let z = Complex64::new(0.25, -0.5);
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn catalog_is_parseable() {
        for e in catalog() {
            let m = parse_map(e.map).unwrap();
            parse_measure(&e.measure).unwrap();
            assert!(!e.lebesgue_preserving || m.lebesgue_preserving || m.integer_base.is_some(), "{}", e.map);
        }
        assert_eq!(natural_measure("linear:beta=3").unwrap(), "lebesgue");
        assert_eq!(natural_measure("linear:beta=phi").unwrap(), "parry:beta=phi,N=64");
        assert_eq!(natural_measure("ulam").unwrap(), "arcsine");
        assert!(natural_measure("blaschke:C=1;a=0.3+0i,-0.3+0i").unwrap().starts_with("blaschke:z0="));
    }
}
