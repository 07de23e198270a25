use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spiked::detect::Calibration;
use spiked::experiment::{
    detect_from_config, figure_hyp, figure_spectrum, json_rows, power_study, sample_from_config,
    second_moment_from_config, table_toh, threshold_from_config, write_power, HypFigure,
};
use spiked::models::SampleBundle;
use spiked::output::{csv_writer, write_csv, write_csv_with, ExperimentConfig};
use spiked::{Error, Result};

#[derive(Parser)]
#[command(name = "spiked", version, about = "Spiked random-matrix models, detectors and thresholds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Parameters shared by every subcommand. Flags override values read
/// from `--config`.
#[derive(Args, Clone, Default)]
struct Common {
    /// A `key = value` experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    detector: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambdas: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    p_tilde: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long, value_delimiter = ',')]
    freqs: Vec<usize>,
    /// Fixed decision threshold instead of the asymptotic rule.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Group orders for the synchronization thresholds and table.
    #[arg(short = 'L', long = "L", value_delimiter = ',')]
    l: Vec<usize>,
    #[arg(long)]
    alpha_points: Option<usize>,
    #[arg(long)]
    lambda_star: Option<f64>,
    #[arg(long)]
    log_c: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also render SVG plots.
    #[arg(long)]
    svg: bool,
}

impl Common {
    fn resolve(&self, experiment: &str) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        c.experiment = Some(experiment.to_string());
        macro_rules! take {
            ($($f:ident),*) => {$(if self.$f.is_some() { c.$f = self.$f.clone(); })*};
        }
        take!(model, detector, lambda, beta, gamma, p_tilde, eps, prior, noise, group, threshold, trials, alpha_points, lambda_star, log_c);
        macro_rules! take_vec {
            ($($f:ident),*) => {$(if !self.$f.is_empty() { c.$f = self.$f.clone(); })*};
        }
        take_vec!(n, lambdas, freqs, l);
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.out_dir.is_some() {
            c.output_dir = self.out_dir.clone();
        }
        c.svg |= self.svg;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample; write the observation as CSV and the bundle as JSON.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Bundle JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Observation CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a detector on a bundle (or on a fresh sample) and print one JSON line.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bundle: Option<PathBuf>,
        /// Calibration file to take the threshold from.
        #[arg(long, requires = "key")]
        calibration: Option<PathBuf>,
        #[arg(long)]
        key: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate a threshold: toh, toh_upper, synch_allfreq, synch,
    /// synch_general, synch_upper, conditioning, subgaussian, nongaussian,
    /// wishart_region, wishart_noise, wishart_simple, mle_gamma, matrix_opt.
    Threshold {
        kind: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Second moment E_Q (dP/dQ)^2: gwig, spherical or wishart.
    SecondMoment {
        kind: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Regenerate a figure's CSV (and SVG with --svg).
    Figure {
        which: FigureKind,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate a table's CSV.
    Table {
        which: TableKind,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical type-I/II errors over a range of signal strengths.
    Power {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureKind {
    Hyp1,
    Hyp2,
    Spectrum,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Toh,
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string(v)?)?;
    Ok(())
}

fn key_value_csv(path: &PathBuf, cfg: &ExperimentConfig, v: &serde_json::Value) -> Result<()> {
    write_csv(path, &cfg.header(), &["key", "value"], &json_rows(v))?;
    Ok(())
}

/// Takes unset model parameters from a loaded bundle.
fn fill_from_bundle(cfg: &mut ExperimentConfig, b: &SampleBundle) -> Result<()> {
    let p = &b.params;
    if cfg.model.is_none() {
        cfg.model = serde_json::to_value(b.model)?.as_str().map(str::to_string);
    }
    if cfg.n.is_empty() {
        cfg.n = vec![p.n];
    }
    cfg.lambda = cfg.lambda.or(p.lambda);
    cfg.beta = cfg.beta.or(p.beta);
    cfg.gamma = cfg.gamma.or(p.gamma);
    cfg.p_tilde = cfg.p_tilde.or(p.p_tilde);
    if cfg.lambdas.is_empty() {
        cfg.lambdas = p.lambdas.clone();
    }
    for (dst, src) in [(&mut cfg.prior, &p.prior), (&mut cfg.noise, &p.noise), (&mut cfg.group, &p.group)] {
        if dst.is_none() {
            *dst = src.clone();
        }
    }
    Ok(())
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { common, out, csv } => {
            let cfg = common.resolve("sample")?;
            let bundle = sample_from_config(&cfg)?;
            if let Some(path) = &out {
                std::fs::write(path, serde_json::to_string(&bundle)? + "\n")?;
            }
            if let Some(path) = &csv {
                write_csv_with(path, &cfg.header(), |w| bundle.write_observation_csv(w))?;
            }
            if out.is_none() && csv.is_none() {
                let mut w = csv_writer(std::io::stdout().lock());
                bundle.write_observation_csv(&mut w)?;
                w.flush()?;
            } else {
                print_json(&json!({ "model": bundle.model, "params": bundle.params, "seed": bundle.seed, "config_hash": cfg.hash() }))?;
            }
        }
        Command::Detect { common, bundle, calibration, key, csv } => {
            let mut cfg = common.resolve("detect")?;
            if let (Some(path), Some(key)) = (&calibration, &key) {
                let cal = Calibration::load(path)?;
                cfg.threshold = Some(cal.get(key).ok_or_else(|| Error::Config(format!("no calibration entry `{key}`")))?);
            }
            let b: SampleBundle = match &bundle {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => sample_from_config(&cfg)?,
            };
            if bundle.is_some() {
                fill_from_bundle(&mut cfg, &b)?;
            }
            let o = detect_from_config(&cfg, &b)?;
            let line = json!({
                "model": b.model,
                "params": b.params,
                "statistic": o.statistic,
                "threshold": o.threshold,
                "decision": o.decision,
                "correlation": o.correlation,
            });
            print_json(&line)?;
            if let Some(path) = &csv {
                key_value_csv(path, &cfg, &line)?;
            }
        }
        Command::Threshold { kind, common, csv } => {
            let cfg = common.resolve(&format!("threshold:{kind}"))?;
            let v = threshold_from_config(&kind, &cfg)?;
            print_json(&v)?;
            if let Some(path) = &csv {
                key_value_csv(path, &cfg, &v)?;
            }
        }
        Command::SecondMoment { kind, common, csv } => {
            let cfg = common.resolve(&format!("second_moment:{kind}"))?;
            let v = serde_json::to_value(second_moment_from_config(&kind, &cfg)?)?;
            print_json(&v)?;
            if let Some(path) = &csv {
                key_value_csv(path, &cfg, &v)?;
            }
        }
        Command::Figure { which, common } => {
            let paths = match which {
                FigureKind::Hyp1 => figure_hyp(&common.resolve("figure:hyp1")?, HypFigure::ByLambda)?,
                FigureKind::Hyp2 => figure_hyp(&common.resolve("figure:hyp2")?, HypFigure::BySize)?,
                FigureKind::Spectrum => figure_spectrum(&common.resolve("figure:spectrum")?)?,
            };
            print_paths(&paths);
        }
        Command::Table { which: TableKind::Toh, common } => {
            print_paths(&table_toh(&common.resolve("table:toh")?)?);
        }
        Command::Power { common } => {
            let cfg = common.resolve("power")?;
            let points = power_study(&cfg)?;
            print_paths(&write_power(&cfg, &points)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
