use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otajam::gaussian::{CovMatrix, GaussianDist, RealVector};
use otajam::harness::{self, ExperimentConfig, Needs, WindowRow};
use otajam::info::{kl_gaussian, renyi_gaussian, RenyiOrder};
use otajam::Error;

#[derive(Parser)]
#[command(name = "otajam", version, about = "Secure over-the-air computation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the approximation net of a compound family
    Net(RunArgs),
    /// Error curves of the compound joint-typicality decoder
    DecodeSim(RunArgs),
    /// Distance of the codebook-induced output from the i.i.d. output
    ResolvabilitySim(RunArgs),
    /// Full pipeline: jamming, decoding, computation and security checks
    E2eSim(RunArgs),
    /// Eavesdropper and receiver information bounds for a rate
    RateWindow(RunArgs),
    /// Error exponent of the decoding analysis per state
    Exponent(RunArgs),
    /// KL and Rényi divergences between two Gaussians
    Divergence(DivergenceArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV logs; nothing is written without it
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct DivergenceArgs {
    /// Comma-separated mean of the first distribution
    #[arg(long, allow_hyphen_values = true)]
    mean0: String,
    /// Row-major covariance of the first distribution
    #[arg(long)]
    cov0: String,
    #[arg(long, allow_hyphen_values = true)]
    mean1: String,
    #[arg(long)]
    cov1: String,
    /// Rényi orders to report besides KL
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.5, 2.0])]
    alpha: Vec<f64>,
}

fn parse_list(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("not a number: {t:?}")))).collect()
}

fn gaussian(mean: &str, cov: &str) -> Result<GaussianDist, Error> {
    let m = parse_list(mean)?;
    let c = parse_list(cov)?;
    let cfg = |e: Error| Error::Config(e.to_string());
    let cov = CovMatrix::from_rows(m.len(), &c).map_err(cfg)?;
    GaussianDist::new(RealVector::new(m).map_err(cfg)?, cov).map_err(cfg)
}

fn fmt_nats(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.10}")
    }
}

fn divergence(a: &DivergenceArgs) -> Result<(), Error> {
    let g0 = gaussian(&a.mean0, &a.cov0)?;
    let g1 = gaussian(&a.mean1, &a.cov1)?;
    if g0.dim() != g1.dim() {
        return Err(Error::Config(format!("dimensions differ: {} vs {}", g0.dim(), g1.dim())));
    }
    let orders = a.alpha.iter().map(|&x| RenyiOrder::new(x).map_err(|e| Error::Config(e.to_string()))).collect::<Result<Vec<_>, _>>()?;
    println!("measure\tnats");
    println!("kl\t{}", fmt_nats(kl_gaussian(&g0, &g1)?));
    for o in orders {
        println!("renyi_{}\t{}", o.alpha(), fmt_nats(renyi_gaussian(o, &g0, &g1)?));
    }
    Ok(())
}

fn load(args: &RunArgs, needs: &[Needs], optional: &[Needs]) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load_with(&args.config, needs, optional)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        // the pool can only be set once per process; later calls are no-ops
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, write: impl FnOnce(&Path) -> Result<Vec<PathBuf>, Error>) -> Result<(), Error> {
    if let Some(dir) = out {
        for p in write(dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Divergence(a) => divergence(&a),
        Command::Net(a) => {
            let cfg = load(&a, &[Needs::Compound], &[])?;
            let r = harness::run_net(&cfg)?;
            println!("{}", r.summary());
            emit(a.out.as_deref(), |d| r.write(&cfg, d))
        }
        Command::DecodeSim(a) => {
            let cfg = load(&a, &[Needs::Compound, Needs::Decode], &[])?;
            let r = harness::run_decode(&cfg)?;
            println!("{}", r.summary());
            emit(a.out.as_deref(), |d| r.write(&cfg, d))
        }
        Command::Exponent(a) => {
            let cfg = load(&a, &[Needs::Compound, Needs::Decode], &[])?;
            let r = harness::run_exponent(&cfg)?;
            println!("{}", r.summary());
            emit(a.out.as_deref(), |d| r.write(&cfg, d))
        }
        Command::ResolvabilitySim(a) => {
            let cfg = load(&a, &[Needs::Resolvability], &[])?;
            let r = harness::run_resolvability(&cfg)?;
            println!("{}", r.summary());
            emit(a.out.as_deref(), |d| r.write(&cfg, d))
        }
        Command::RateWindow(a) => {
            let cfg = load(&a, &[Needs::Ota], &[])?;
            let w = harness::run_rate_window(&cfg)?;
            println!("{}", harness::window_summary(&w));
            emit(a.out.as_deref(), |d| Ok(vec![harness::write_csv(d, "rate_window.csv", &cfg, &[WindowRow::from(&w)])?]))
        }
        Command::E2eSim(a) => {
            let cfg = load(&a, &[Needs::Ota], &[Needs::Security])?;
            let r = harness::run_e2e(&cfg)?;
            println!("{}", r.summary_line());
            emit(a.out.as_deref(), |d| r.write(&cfg, d))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
