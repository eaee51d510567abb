use std::path::PathBuf;
use std::process::ExitCode;
use std::time::SystemTime;

use clap::{Parser, Subcommand, ValueEnum};

use ergolab::jointlab::CorrelationMode;
use ergolab::rankone::TowerSpec;
use ergolab::{Error, Result};
use ergolab_cli::config::ExperimentConfig;
use ergolab_cli::report::Report;
use ergolab_cli::{exit_code, report_code, EntropyMethod, RankOneEmit, SmbOptions};

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Entropy, invariance and joint ergodicity experiments for interval maps")]
struct Cli {
    /// Worker threads for internal parallelism.
    #[arg(long, global = true, env = "ERGOLAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rokhlin,
    Smb,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Map,
    Heights,
    Entropy,
}

#[derive(clap::Args)]
struct Output {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the curve as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of a map with respect to an invariant measure.
    Entropy {
        #[arg(long)]
        map: String,
        /// Defaults to the natural invariant measure of the map.
        #[arg(long)]
        measure: Option<String>,
        #[arg(long, value_enum, default_value = "rokhlin")]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Cylinder rank for SMB.
        #[arg(long, default_value_t = 25)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print the full JSON report rather than a summary line.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        output: Output,
    },
    /// L2 joint Cesàro averages described by an INI file.
    JointAvg {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Multi-map correlation curve `ν(B ∩ T_1^{-n}A_1 ∩ ...)`.
    Mixing {
        #[arg(long, num_args = 1.., required = true)]
        maps: Vec<String>,
        #[arg(long, num_args = 1..)]
        measures: Vec<String>,
        /// Base set followed by one target set per map.
        #[arg(long, num_args = 2.., required = true)]
        sets: Vec<String>,
        #[arg(long, default_value_t = 20)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ModeArg,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Family-restricted α-mixing coefficients.
    Alpha {
        #[arg(long)]
        map: String,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long, default_value_t = 2)]
        l: usize,
        /// Lags as `a..b` or a comma list.
        #[arg(long, default_value = "1..8")]
        n: String,
        #[arg(long, default_value_t = 8)]
        depth: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Cylinder partitions.
    Cyl {
        #[command(subcommand)]
        action: CylAction,
    },
    /// Rank-one cutting-and-stacking towers.
    Rankone {
        /// vnk, chacon, sa or flood:q=N.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 10)]
        stage: usize,
        #[arg(long, value_enum, default_value = "heights")]
        emit: EmitArg,
        /// Custom cut counts, `3,3,3`.
        #[arg(long, requires = "s")]
        q: Option<String>,
        /// Custom spacers, one comma list per stage separated by `;`.
        #[arg(long, requires = "q")]
        s: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Run a canned experiment by id.
    Repro {
        id: String,
        #[command(flatten)]
        output: Output,
    },
    /// List map kinds, measures, invariant pairs and repro ids.
    Catalog,
}

#[derive(Subcommand)]
enum CylAction {
    /// Rank-n cylinders heavier than the floor, as `word,lo,hi,mass`.
    Refine {
        #[arg(long)]
        map: String,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        floor: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_lags(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::parse("--n", format!("expected a..b or a comma list, got '{text}'"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
}

fn write_text(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::parse(p.display().to_string(), e.to_string())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(mut report: Report, output: &Output, started: SystemTime) -> Result<i32> {
    report.stamp(started);
    write_text(&output.out, &(report.to_json() + "\n"))?;
    if let Some(csv) = &output.csv {
        write_text(&Some(csv.clone()), &report.to_csv())?;
    }
    Ok(report_code(&report))
}

fn dispatch(cli: Cli) -> Result<i32> {
    let started = SystemTime::now();
    match cli.command {
        Command::Entropy { map, measure, method, tol, n, samples, seed, json, output } => {
            let method = match method {
                MethodArg::Rokhlin => EntropyMethod::Rokhlin,
                MethodArg::Smb => EntropyMethod::Smb,
                MethodArg::Both => EntropyMethod::Both,
            };
            let report = ergolab_cli::entropy(&map, measure.as_deref(), method, tol, &SmbOptions { n, samples, seed })?;
            if json || output.out.is_some() {
                return emit(report, &output, started);
            }
            for (name, r) in report.results.as_object().into_iter().flatten() {
                println!("{name}: {} (error bound {})", r["value"], r["error_bound"]);
            }
            Ok(0)
        }
        Command::JointAvg { config, output } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::parse(config.display().to_string(), e.to_string()))?;
            let cfg = ExperimentConfig::parse(&text)?;
            let output = Output {
                out: output.out.or_else(|| cfg.json.clone().map(PathBuf::from)),
                csv: output.csv.or_else(|| cfg.csv.clone().map(PathBuf::from)),
            };
            emit(ergolab_cli::run(&cfg)?, &output, started)
        }
        Command::Mixing { maps, measures, sets, nmax, mode, samples, seed, output } => {
            let mode = match mode {
                ModeArg::Exact => CorrelationMode::Exact,
                ModeArg::Mc => CorrelationMode::MonteCarlo { samples, seed },
            };
            emit(ergolab_cli::mixing(&maps, &measures, &sets, nmax, mode)?, &output, started)
        }
        Command::Alpha { map, measure, l, n, depth, output } => {
            emit(ergolab_cli::alpha(&map, measure.as_deref(), l, &parse_lags(&n)?, depth)?, &output, started)
        }
        Command::Cyl { action: CylAction::Refine { map, measure, n, floor, out } } => {
            write_text(&out, &ergolab_cli::cylinders_csv(&map, measure.as_deref(), n, floor)?)?;
            Ok(0)
        }
        Command::Rankone { preset, stage, emit: what, q, s, output } => {
            let spec = match (preset, q, s) {
                (Some(p), None, None) => TowerSpec::preset(&p)?,
                (None, Some(q), Some(s)) => ergolab_cli::parse_custom_tower(&q, &s)?,
                _ => return Err(Error::parse("rankone", "give either --preset or both --q and --s")),
            };
            let what = match what {
                EmitArg::Map => RankOneEmit::Map,
                EmitArg::Heights => RankOneEmit::Heights,
                EmitArg::Entropy => RankOneEmit::Entropy,
            };
            emit(ergolab_cli::rankone(&spec, stage, what)?, &output, started)
        }
        Command::Repro { id, output } => emit(ergolab_cli::repro::repro(&id)?, &output, started),
        Command::Catalog => {
            println!("{}", serde_json::to_string_pretty(&ergolab_cli::catalog_listing()).unwrap());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ergolab: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
