use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use entangle_core::harness::{
    emit_plots, export_results, histogram_u, ipr_figure, ipr_ratio_experiment, parse_lambda_grid, read_json, run_sweep,
    u_distribution, u_figure, write_ipr_ratio_csv, write_udist_csv, OutputFormat, SweepConfig,
};
use entangle_core::models::{ModelKind, ModelSpec, SeedInfo};
use entangle_core::{Error, Result};

use crate::args::{Cli, Command, ModelArg, RunArgs};

const DEFAULT_N: usize = 50;
const DEFAULT_OUT: &str = "out";
/// Grid points at or below this `Λ` feed the default `u` histogram.
const SMALL_LAMBDA: f64 = 1e-3;

/// 2 for anything the user can fix in the configuration, 3 when the numerics
/// gave up, 1 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::InvalidCoupling { .. }
        | Error::InvalidDimension { .. }
        | Error::OutOfRange { .. }
        | Error::UnknownBasis(_)
        | Error::InvalidOrder { .. }
        | Error::Json(_) => 2,
        Error::NumericalFailure(_) => 3,
        _ => 1,
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(a) => {
            let (cfg, out) = prepare(&a.run)?;
            let result = run_sweep(&cfg)?;
            report_files(export_results(&result, &out, a.run.format.into())?);
            Ok(())
        }
        Command::Udist(a) => {
            let (cfg, out) = prepare(&a.run)?;
            let lambdas = match a.u_lambdas {
                Some(l) => l,
                None => small_lambdas(&cfg.lambda_grid),
            };
            if lambdas.is_empty() {
                return Err(Error::Config(format!(
                    "no grid point in (0, {SMALL_LAMBDA}]; pass --u-lambdas"
                )));
            }
            let (result, dist) = histogram_u(&cfg, &lambdas)?;
            let mut files = export_results(&result, &out, a.run.format.into())?;
            let data = match OutputFormat::from(a.run.format) {
                OutputFormat::Csv => {
                    let path = out.join("u_distribution.csv");
                    write_udist_csv(&dist, create(&path)?)?;
                    path
                }
                OutputFormat::Json => {
                    let path = out.join("u_distribution.json");
                    write_json_file(&path, &dist)?;
                    path
                }
            };
            let svg = out.join("u_distribution.svg");
            std::fs::write(&svg, u_figure(&dist)).map_err(|e| io(&svg, e))?;
            files.extend([data, svg]);
            println!(
                "u samples: {}, total variation to theory: {:.4}",
                dist.samples(),
                dist.total_variation
            );
            report_files(files);
            Ok(())
        }
        Command::IprRatio(a) => {
            let (cfg, out) = prepare(&a.run)?;
            let result = run_sweep(&cfg)?;
            let reference = match cfg.model.kind {
                ModelKind::Rmt => None,
                ModelKind::KickedRotor => {
                    let rmt = SweepConfig {
                        model: ModelSpec::rmt(cfg.model.n, 0.0, SeedInfo::default()),
                        realizations: a.reference_realizations,
                        ..cfg.clone()
                    };
                    log::info!("running the RMT reference with {} realizations", rmt.realizations);
                    Some(run_sweep(&rmt)?)
                }
            };
            let report = ipr_ratio_experiment(&result, reference.as_ref())?;
            let mut files = export_results(&result, &out, a.run.format.into())?;
            let data = match OutputFormat::from(a.run.format) {
                OutputFormat::Csv => {
                    let path = out.join("ipr_ratio.csv");
                    write_ipr_ratio_csv(&report, create(&path)?)?;
                    path
                }
                OutputFormat::Json => {
                    let path = out.join("ipr_ratio.json");
                    write_json_file(&path, &report)?;
                    path
                }
            };
            let svg = out.join("ipr.svg");
            std::fs::write(&svg, ipr_figure(&result)).map_err(|e| io(&svg, e))?;
            files.extend([data, svg]);
            for &basis in &cfg.bases {
                println!("{basis}: non-ergodic at Λ = {:?}", report.flagged(basis));
            }
            report_files(files);
            Ok(())
        }
        Command::Plot(a) => {
            let (result, out) = match &a.input {
                Some(input) => {
                    let path = if input.is_dir() {
                        input.join("sweep.json")
                    } else {
                        input.clone()
                    };
                    let file =
                        File::open(&path).map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
                    let result = read_json(std::io::BufReader::new(file))?;
                    let out = a
                        .run
                        .out
                        .clone()
                        .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
                    (result, out)
                }
                None => {
                    let (cfg, out) = prepare(&a.run)?;
                    (run_sweep(&cfg)?, out)
                }
            };
            let small = small_lambdas(&result.config().lambda_grid);
            let dist = if small.is_empty() {
                None
            } else {
                Some(u_distribution(&result, &small)?)
            };
            report_files(emit_plots(&result, dist.as_ref(), &out)?);
            Ok(())
        }
    }
}

/// Resolves the sweep configuration and output directory, and sizes the
/// thread pool.
fn prepare(args: &RunArgs) -> Result<(SweepConfig, PathBuf)> {
    let cfg = build_config(args)?;
    cfg.validate()?;
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok((cfg, out))
}

fn build_config(args: &RunArgs) -> Result<SweepConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<SweepConfig>(&text)?
        }
        None => SweepConfig::new(model_for(
            args.model.unwrap_or(ModelArg::Rmt),
            args.n.unwrap_or(DEFAULT_N),
        )),
    };
    if let Some(m) = args.model {
        let kind = model_for(m, cfg.model.n).kind;
        if kind != cfg.model.kind {
            cfg.model = model_for(m, cfg.model.n);
        }
    }
    if let Some(n) = args.n {
        cfg.model.n = n;
    }
    if let Some(grid) = &args.lambda_grid {
        cfg.lambda_grid = parse_lambda_grid(grid)?;
    }
    if let Some(r) = args.realizations {
        cfg.realizations = r;
    }
    if let Some(k) = &args.k_set {
        cfg.k_set = k.clone();
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    Ok(cfg)
}

fn model_for(m: ModelArg, n: usize) -> ModelSpec {
    match m {
        ModelArg::Rmt => ModelSpec::rmt(n, 0.0, SeedInfo::default()),
        ModelArg::Kr => ModelSpec::kicked_rotor(n, 0.0),
    }
}

fn small_lambdas(grid: &[f64]) -> Vec<f64> {
    grid.iter().copied().filter(|&l| l > 0.0 && l <= SMALL_LAMBDA).collect()
}

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io(path, e))
}

fn write_json_file<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.flush().map_err(|e| io(path, e))
}

fn report_files(files: Vec<PathBuf>) {
    for f in files {
        println!("wrote {}", f.display());
    }
}
