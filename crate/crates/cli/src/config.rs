//! INI experiment configurations.

use ini::Ini;

use ergolab::catalog::{natural_measure, parse_map, parse_measure};
use ergolab::jointlab::{Observable, WindowSchedule};
use ergolab::orbit::Strategy;
use ergolab::{Error, Result};

/// A joint-average experiment.
///
/// ```ini
/// [maps]
/// map0 = rotation:alpha=sqrt2-1
/// [measures]
/// map0 = lebesgue
/// [observables]
/// map0 = ind:0,1/2
/// [schedule]
/// windows = 100,1000;1000,10000
/// [sampling]
/// samples = 500
/// seed = 7
/// nu = lebesgue
/// [tolerances]
/// deviation = 0.02
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub maps: Vec<String>,
    pub measures: Vec<String>,
    pub observables: Vec<String>,
    /// `auto` or an engine name per map.
    pub engines: Vec<String>,
    pub schedule: WindowSchedule,
    pub samples: usize,
    pub seed: u64,
    pub nu: String,
    pub tolerance: f64,
    pub json: Option<String>,
    pub csv: Option<String>,
}

fn indexed(ini: &Ini, section: &str) -> Result<Vec<String>> {
    let Some(sec) = ini.section(Some(section)) else {
        return Ok(Vec::new());
    };
    let mut items: Vec<(usize, String)> = Vec::new();
    for (k, v) in sec.iter() {
        let idx = k
            .strip_prefix("map")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::parse(format!("[{section}] {k}"), "keys must be map0, map1, ..."))?;
        items.push((idx, v.trim().to_string()));
    }
    items.sort_by_key(|p| p.0);
    for (i, (idx, _)) in items.iter().enumerate() {
        if *idx != i {
            return Err(Error::parse(format!("[{section}]"), "keys must run map0, map1, ... without gaps"));
        }
    }
    Ok(items.into_iter().map(|p| p.1).collect())
}

fn get<'a>(ini: &'a Ini, section: &str, key: &str) -> Option<&'a str> {
    ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
}

fn number<T: std::str::FromStr>(ini: &Ini, section: &str, key: &str) -> Result<Option<T>> {
    get(ini, section, key)
        .map(|v| v.parse().map_err(|_| Error::parse(format!("[{section}] {key}"), format!("cannot parse '{v}'"))))
        .transpose()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::parse("config", e.to_string()))?;
        let maps = indexed(&ini, "maps")?;
        if maps.is_empty() {
            return Err(Error::parse("[maps]", "at least one map is required"));
        }
        let mut measures = indexed(&ini, "measures")?;
        if measures.is_empty() {
            measures = maps
                .iter()
                .enumerate()
                .map(|(i, m)| natural_measure(m).map_err(|e| Error::parse(format!("[maps] map{i}"), e.to_string())))
                .collect::<Result<_>>()?;
        }
        let observables = indexed(&ini, "observables")?;
        let mut engines = indexed(&ini, "engines")?;
        if engines.is_empty() {
            engines = vec!["auto".into(); maps.len()];
        }
        let loc = |s: &str| format!("[{s}]");
        if measures.len() != maps.len() {
            return Err(Error::parse(loc("measures"), "every map needs a paired measure"));
        }
        if observables.len() != maps.len() {
            return Err(Error::parse(loc("observables"), "every map needs an observable"));
        }
        if engines.len() != maps.len() {
            return Err(Error::parse(loc("engines"), "every map needs an engine"));
        }
        let schedule = match get(&ini, "schedule", "windows") {
            Some(w) => WindowSchedule::parse(w)?,
            None => WindowSchedule::default_uniform(),
        };
        let seed = number(&ini, "sampling", "seed")?.ok_or_else(|| Error::parse("[sampling] seed", "an explicit seed is required"))?;
        let cfg = ExperimentConfig {
            maps,
            measures,
            observables,
            engines,
            schedule,
            samples: number(&ini, "sampling", "samples")?.unwrap_or(200),
            seed,
            nu: get(&ini, "sampling", "nu").unwrap_or("lebesgue").to_string(),
            tolerance: number(&ini, "tolerances", "deviation")?.unwrap_or(0.02),
            json: get(&ini, "output", "json").map(String::from),
            csv: get(&ini, "output", "csv").map(String::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that every spec string parses.
    pub fn validate(&self) -> Result<()> {
        for (i, m) in self.maps.iter().enumerate() {
            parse_map(m).map_err(|e| Error::parse(format!("[maps] map{i}"), e.to_string()))?;
        }
        for (i, m) in self.measures.iter().enumerate() {
            parse_measure(m).map_err(|e| Error::parse(format!("[measures] map{i}"), e.to_string()))?;
        }
        for (i, o) in self.observables.iter().enumerate() {
            Observable::parse(o).map_err(|e| Error::parse(format!("[observables] map{i}"), e.to_string()))?;
        }
        for (i, e) in self.engines.iter().enumerate() {
            if e != "auto" {
                Strategy::parse(e).map_err(|err| Error::parse(format!("[engines] map{i}"), err.to_string()))?;
            }
        }
        parse_measure(&self.nu).map_err(|e| Error::parse("[sampling] nu", e.to_string()))?;
        if self.samples < 2 {
            return Err(Error::parse("[sampling] samples", "need at least two samples"));
        }
        Ok(())
    }

    pub fn emit(&self) -> String {
        let mut ini = Ini::new();
        for (section, list) in [("maps", &self.maps), ("measures", &self.measures), ("observables", &self.observables), ("engines", &self.engines)] {
            for (i, v) in list.iter().enumerate() {
                ini.with_section(Some(section)).set(format!("map{i}"), v.clone());
            }
        }
        ini.with_section(Some("schedule")).set("windows", self.schedule.render());
        ini.with_section(Some("sampling"))
            .set("samples", self.samples.to_string())
            .set("seed", self.seed.to_string())
            .set("nu", self.nu.clone());
        ini.with_section(Some("tolerances")).set("deviation", format!("{:?}", self.tolerance));
        if self.json.is_some() || self.csv.is_some() {
            let mut out = ini.with_section(Some("output"));
            if let Some(j) = &self.json {
                out.set("json", j.clone());
            }
            if let Some(c) = &self.csv {
                out.set("csv", c.clone());
            }
        }
        let mut buf = Vec::new();
        ini.write_to(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("ini output is utf-8")
    }

    pub fn strategies(&self, horizon: usize) -> Result<Vec<Strategy>> {
        self.maps
            .iter()
            .zip(&self.engines)
            .map(|(m, e)| {
                if e == "auto" {
                    Ok(Strategy::auto(&parse_map(m)?, horizon))
                } else {
                    Strategy::parse(e)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "[maps]\nmap0 = rotation:alpha=sqrt2-1\nmap1 = linear:beta=3\n[observables]\nmap0 = ind:0,1/2\nmap1 = trig:1\n[schedule]\nwindows = 10,100;100,1000\n[sampling]\nsamples = 20\nseed = 3\n";

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.measures, ["lebesgue", "lebesgue"]);
        let text = c.emit();
        let again = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.emit(), text);
    }

    #[test]
    fn errors_carry_locations() {
        let bad = SAMPLE.replace("linear:beta=3", "linear:beta=x");
        let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("[maps] map1"), "{e}");
        let no_seed = SAMPLE.replace("seed = 3\n", "");
        assert!(ExperimentConfig::parse(&no_seed).unwrap_err().to_string().contains("seed"));
        let missing = SAMPLE.replace("map1 = trig:1\n", "");
        assert!(ExperimentConfig::parse(&missing).is_err());
    }
}
