use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn catalog_lists_everything() {
    let o = ergolab(&["catalog"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let ids: Vec<&str> = v["repro"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"ex5.6") && ids.contains(&"appendix-chacon"));
    assert!(v["pairs"].as_array().unwrap().len() >= 20);
}

#[test]
fn malformed_map_is_a_config_error() {
    let o = ergolab(&["entropy", "--map", "linear:beta=abc"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error at") && err.contains("beta"), "{err}");
    assert_eq!(code(&ergolab(&["repro", "ex99.9"])), 2);
    assert_eq!(code(&ergolab(&["frobnicate"])), 2);
}

#[test]
fn entropy_summary_and_json() {
    let o = ergolab(&["entropy", "--map", "linear:beta=3"]);
    assert_eq!(code(&o), 0);
    let line = String::from_utf8_lossy(&o.stdout);
    assert!(line.starts_with("rokhlin: 1.0986122886681"), "{line}");
    let o = ergolab(&["--threads", "1", "entropy", "--map", "tent:a=0.3", "--json"]);
    let v = json(&o);
    assert!((v["results"]["rokhlin"]["value"].as_f64().unwrap() - 0.6108643020548935).abs() < 1e-9);
    assert_eq!(v["schema"], "ergolab-report/1");
}

const CONFIG: &str = "\
[maps]
map0 = iet:a=sqrt2-1,phi-1,1;pi=3,2,1
map1 = linear:beta=3
[observables]
map0 = ind:0,1/2
map1 = ind:0,1/2
[schedule]
windows = 10,100;100,1000
[sampling]
samples = 40
seed = 9
";

#[test]
fn joint_avg_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.ini", CONFIG);
    let csv = dir.path().join("curve.csv");
    let o = ergolab(&["joint-avg", "--config", &cfg, "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["config"]["windows"], "10,100;100,1000");
    assert_eq!(v["config"]["maps"][0], "iet:a=sqrt2-1,phi-1,1;pi=3,2,1");
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_or_window,value_re,value_im,stderr,target"));
    assert!(lines.next().unwrap().starts_with("10-100,"));
}

#[test]
fn config_errors_and_unmet_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let no_seed = write(dir.path(), "a.ini", &CONFIG.replace("seed = 9\n", ""));
    let o = ergolab(&["joint-avg", "--config", &no_seed]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[sampling] seed"));
    let bad_map = write(dir.path(), "b.ini", &CONFIG.replace("linear:beta=3", "linear:beta=-"));
    let o = ergolab(&["joint-avg", "--config", &bad_map]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("[maps] map1"));
    // the averages stay at 1, far from the product of integrals
    let stuck = "[maps]\nmap0 = linear:beta=2\nmap1 = offset-doubling\n[observables]\nmap0 = trig:2\nmap1 = trig:-2\n\
                 [schedule]\nwindows = 10,100\n[sampling]\nsamples = 20\nseed = 1\n[tolerances]\ndeviation = 0.05\n";
    let path = write(dir.path(), "c.ini", stuck);
    let o = ergolab(&["joint-avg", "--config", &path]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["verdict"], "not jointly ergodic");
}

#[test]
fn repro_is_byte_identical_without_timestamp() {
    let run = || {
        let mut v = json(&ergolab(&["repro", "ex7.4"]));
        assert!(v["timestamp"]["wall_clock_seconds"].is_number());
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn rankone_and_cylinders() {
    let v = json(&ergolab(&["rankone", "--preset", "chacon", "--stage", "4"]));
    assert_eq!(v["results"]["heights"], serde_json::json!(["1", "4", "13", "40", "121"]));
    let v = json(&ergolab(&["rankone", "--q", "2,2,2", "--s", "0,0;0,0;0,0", "--stage", "3", "--emit", "map"]));
    assert_eq!(v["results"]["height"], 8);
    let v = json(&ergolab(&["rankone", "--preset", "vnk", "--stage", "20", "--emit", "entropy"]));
    assert!((v["results"]["partition_entropy"]["value"].as_f64().unwrap() - 2.0 * std::f64::consts::LN_2).abs() < 1e-4);
    let o = ergolab(&["cyl", "refine", "--map", "linear:beta=2", "--n", "3"]);
    let text = String::from_utf8_lossy(&o.stdout);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "word,lo,hi,mass");
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[1], "0-0-0,0,1/8,0.125");
}

#[test]
fn mixing_and_alpha_commands() {
    let v = json(&ergolab(&["mixing", "--maps", "linear:beta=2", "linear:beta=3", "--sets", "0,1/2", "0,1/2", "0,1/2", "--nmax", "4"]));
    let curve = v["results"]["curve"].as_array().unwrap();
    assert_eq!(curve.len(), 5);
    assert_eq!(curve[0]["value"], 0.5);
    let v = json(&ergolab(&["alpha", "--map", "linear:beta=2", "--l", "2", "--n", "1..3"]));
    assert_eq!(v["verdict"], "estimated (family-restricted)");
    assert!(v["results"]["estimate"]["curve"].as_array().unwrap().iter().all(|p| p["value"].as_f64().unwrap().abs() < 1e-12));
}
