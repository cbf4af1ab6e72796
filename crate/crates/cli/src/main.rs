//! Command-line driver for the vqa-lab experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vqa_lab::harness::export::{read_threshold_reports, write_thresholds};
use vqa_lab::harness::scans::{
    exact_diag_scan, frame_potential_scan, grad_variance_scan, loss_diff_variance_scan, qfim_rank_scan, write_rows_csv,
};
use vqa_lab::harness::{
    compute_thresholds, export, load_dataset, resume, run_grid, with_workers, ExperimentConfig, ExportFormat,
    OptimizerKind, Profile,
};
use vqa_lab::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "vqa-lab", version, about = "Barren-plateau and overparametrization experiments on the HEA/TLFIM VQE")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file overlaid on the selected profile.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in settings the config file and flags start from.
    #[arg(long, global = true, default_value = "desk")]
    profile: Profile,
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "vqa-lab-out")]
    out: PathBuf,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "VQA_LAB_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true)]
    optimizer: Option<OptimizerKind>,
    /// GD learning rate.
    #[arg(long, global = true)]
    lr: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the optimization sweep and export its CSVs.
    Grid,
    /// Continue an interrupted sweep in --out with its recorded config.
    Resume,
    /// BP and OP layer thresholds per qubit count.
    Thresholds,
    /// Maximal QFIM rank over the (N, L) grid.
    QfimRank,
    /// Variance of dE/d theta_k over the (N, L) grid.
    GradVariance,
    /// Variance of |E(theta) - E(theta')| over the (N, L) grid.
    LossDiffVariance,
    /// Second frame potential of the ansatz over the (N, L) grid.
    FramePotential,
    /// Extremal eigenvalues of the Hamiltonian for each N.
    ExactDiag,
    /// Re-export the sweep stored in --out.
    Export {
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
    },
}

fn build_config(c: &Common) -> Result<ExperimentConfig> {
    let optimizer = c.optimizer.unwrap_or_default();
    let base = ExperimentConfig::profile(c.profile, optimizer);
    let mut config = match &c.config {
        Some(path) => ExperimentConfig::from_file(path, &base)?,
        None => base,
    };
    if let Some(o) = c.optimizer {
        config.optimizer = o;
    }
    if let Some(seed) = c.seed {
        config.base_seed = seed;
    }
    if let Some(lr) = c.lr {
        config.learning_rate = lr;
    }
    config.validate()?;
    Ok(config)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = &cli.common.out;
    match cli.command {
        Command::Resume => {
            let dataset = resume(out)?;
            report_files(&export(&dataset, &read_threshold_reports(out)?, out, ExportFormat::Csv)?);
        }
        Command::Export { format } => {
            let dataset = load_dataset(out)?;
            let missing = dataset.missing().len();
            if missing > 0 {
                eprintln!("warning: {missing} cells missing; their (N, L) pairs are left out of heatmap");
            }
            report_files(&export(&dataset, &read_threshold_reports(out)?, out, format)?);
        }
        command => {
            let config = build_config(&cli.common)?;
            create_dir(out)?;
            match command {
                Command::Grid => {
                    let dataset = run_grid(&config, Some(out))?;
                    report_files(&export(&dataset, &read_threshold_reports(out)?, out, ExportFormat::Csv)?);
                }
                Command::Thresholds => {
                    let reports = compute_thresholds(&config)?;
                    for r in &reports {
                        println!(
                            "N={} L_bp={} L_op={} r_max={} ceiling={}",
                            r.n_qubits,
                            show(r.l_bp.layer()),
                            show(r.l_op.layer()),
                            r.r_max,
                            r.rank_ceiling
                        );
                    }
                    report_files(&write_thresholds(out, &reports)?);
                }
                Command::QfimRank => scan(out, "qfim_rank.csv", qfim_rank_scan(&config)?)?,
                Command::GradVariance => scan(out, "grad_variance.csv", grad_variance_scan(&config)?)?,
                Command::LossDiffVariance => scan(out, "loss_diff_variance.csv", loss_diff_variance_scan(&config)?)?,
                Command::FramePotential => scan(out, "frame_potential.csv", frame_potential_scan(&config)?)?,
                Command::ExactDiag => {
                    let rows = exact_diag_scan(&config)?;
                    for r in &rows {
                        println!("N={} lambda_min={} lambda_max={}", r.n_qubits, r.lambda_min, r.lambda_max);
                    }
                    scan(out, "exact_diag.csv", rows)?;
                }
                Command::Resume | Command::Export { .. } => unreachable!(),
            }
        }
    }
    Ok(())
}

fn show(x: Option<usize>) -> String {
    x.map_or_else(|| "not reached".into(), |l| l.to_string())
}

fn scan<R: serde::Serialize>(out: &Path, name: &str, rows: Vec<R>) -> Result<()> {
    let path = out.join(name);
    write_rows_csv(&path, &rows)?;
    report_files(&[path]);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.common.workers;
    match with_workers(workers, || run(cli)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string();
            eprintln!("error: {message}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let cause = s.to_string();
                if !message.contains(&cause) {
                    eprintln!("  caused by: {cause}");
                }
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
