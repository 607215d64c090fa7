use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};

use poisson_wiretap::capacity::{region_boundary, secrecy_capacity_with_tol};
use poisson_wiretap::experiment::{run_sweep, write_sweep_csv, ExperimentConfig};
use poisson_wiretap::gaussian::{
    gaussian_cs_bounds_finite, gaussian_cs_infinite, n_tilde, GaussianParams,
};
use poisson_wiretap::pointprocess::{sample_conditional_poisson, Waveform};
use poisson_wiretap::rng::stream;
use poisson_wiretap::wyner::WynerCode;
use poisson_wiretap::ChannelParams;

/// Secrecy capacity, rate-equivocation region and Wyner-code experiments
/// for the degraded Poisson wiretap channel.
#[derive(Debug, Parser)]
#[command(name = "pwiretap", version)]
struct Cli {
    /// Report information quantities in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,

    /// Master seed for every random stream.
    #[arg(long, global = true, env = "PWIRETAP_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Secrecy capacity and optimal duty cycle (JSON).
    Capacity {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Solver tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Rate-equivocation region boundary (CSV: alpha,r_max,rd_max).
    Region {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Number of duty-cycle samples, endpoints included.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gaussian wiretap secrecy capacity for comparison (JSON).
    Gaussian {
        #[arg(long)]
        power: f64,
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
        /// Also report finite-bandwidth bounds.
        #[arg(long)]
        bandwidth: Option<f64>,
    },
    /// Build a Wyner code and print its summary (JSON).
    Code {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: f64,
        /// Write the code matrix, one 0/1 row per line.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Sample arrival traces for a waveform (one CSV per realization).
    Simulate {
        /// Waveform JSON: {"horizon", "breakpoints", "values"}.
        #[arg(long)]
        waveform: PathBuf,
        /// Peak signal rate.
        #[arg(long)]
        a: f64,
        /// Dark-current rate.
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        realizations: u64,
        /// Directory receiving trace_<i>.csv.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run an experiment sweep (CSV).
    Experiment {
        /// JSON file holding one configuration or a list of them.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// JSON file with a_y, lambda_y, a_z, lambda_z.
    #[arg(long, conflicts_with_all = ["a_y", "lambda_y", "a_z", "lambda_z"])]
    params: Option<PathBuf>,
    #[arg(long, required_unless_present = "params")]
    a_y: Option<f64>,
    #[arg(long, required_unless_present = "params")]
    lambda_y: Option<f64>,
    #[arg(long, required_unless_present = "params")]
    a_z: Option<f64>,
    #[arg(long, required_unless_present = "params")]
    lambda_z: Option<f64>,
}

impl ChannelArgs {
    fn resolve(&self) -> Result<ChannelParams> {
        let p = match &self.params {
            Some(path) => read_json::<ChannelParams>(path)?,
            None => ChannelParams::new(
                self.a_y.unwrap_or_default(),
                self.lambda_y.unwrap_or_default(),
                self.a_z.unwrap_or_default(),
                self.lambda_z.unwrap_or_default(),
            )?,
        };
        Ok(ChannelParams::degraded(p.a_y(), p.lambda_y(), p.a_z(), p.lambda_z())?)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    let unit = if cli.bits { std::f64::consts::LN_2 } else { 1.0 };
    match cli.command {
        Command::Capacity { channel, tol } => {
            let p = channel.resolve()?;
            let r = secrecy_capacity_with_tol(&p, tol)?;
            print_json(&json!({
                "alpha_star": r.alpha_star,
                "c_s": r.c_s / unit,
                "c_main": r.c_main / unit,
                "c_eaves": r.c_eaves / unit,
            }))
        }
        Command::Region { channel, grid, out } => {
            let p = channel.resolve()?;
            let points = region_boundary(&p, grid)?;
            let mut w = csv::Writer::from_writer(output(out.as_deref())?);
            w.write_record(["alpha", "r_max", "rd_max"])?;
            for pt in points {
                w.write_record([
                    pt.alpha.to_string(),
                    (pt.r_max / unit).to_string(),
                    (pt.rd_max / unit).to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Gaussian {
            power,
            n1,
            n2,
            bandwidth,
        } => {
            let g = GaussianParams::new(power, n1, n2)?;
            let mut v = json!({
                "n_tilde": n_tilde(&g),
                "c_s_infinite": gaussian_cs_infinite(&g) / unit,
            });
            if let Some(b) = bandwidth {
                let (lo, hi) = gaussian_cs_bounds_finite(&g, b)?;
                v["bandwidth"] = json!(b);
                v["lower"] = json!(lo / unit);
                v["upper"] = json!(hi / unit);
            }
            print_json(&v)
        }
        Command::Code { m, k, t, dump } => {
            let code = WynerCode::build(m, k, t)?;
            if let Some(path) = dump {
                let mut w = output(Some(&path))?;
                for row in code.dump_rows() {
                    writeln!(w, "{row}")?;
                }
                w.flush()?;
            }
            print_json(&serde_json::to_value(code.summary())?)
        }
        Command::Simulate {
            waveform,
            a,
            lambda,
            realizations,
            out_dir,
        } => {
            let w: Waveform = read_json(&waveform)?;
            fs::create_dir_all(&out_dir)
                .with_context(|| format!("creating {}", out_dir.display()))?;
            for i in 0..realizations {
                let arrivals = sample_conditional_poisson(&w, a, lambda, &mut stream(cli.seed, i))?;
                let path = out_dir.join(format!("trace_{i}.csv"));
                arrivals.write_csv(output(Some(&path))?)?;
            }
            Ok(())
        }
        Command::Experiment { config, out } => {
            let parse = || format!("parsing {}", config.display());
            let grid: Vec<ExperimentConfig> = match read_json::<Value>(&config)? {
                v @ Value::Array(_) => serde_json::from_value(v).with_context(parse)?,
                v => vec![serde_json::from_value(v).with_context(parse)?],
            };
            if grid.is_empty() {
                bail!("{} holds no configurations", config.display());
            }
            let rows = run_sweep(&grid, cli.seed)?;
            write_sweep_csv(&rows, output(Some(&out))?, unit)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("pwiretap: error: {msg}");
            ExitCode::FAILURE
        }
    }
}
