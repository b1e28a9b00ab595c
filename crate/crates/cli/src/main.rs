use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use kcut_core::cutsim::{simulate_batch, CompleteTree, Simulator, Variant};
use kcut_core::exactmean::{asymptotic_mean, expected_records, MeanQuery};
use kcut_core::harness::{env_threads, fmt_real, run_experiment, with_threads, write_outputs, ExperimentConfig};
use kcut_core::limitdist::{levy_density, levy_tail, LimitCdf, LimitLaw, LimitParams};
use kcut_core::series::constants;
use kcut_core::{KcutError, Result};

#[derive(Parser)]
#[command(name = "kcut", version, about = "Random k-cut process on complete binary trees")]
struct Cli {
    /// Worker threads (default: KCUT_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate cut counts and write them as CSV.
    Simulate(SimulateArgs),
    /// Expected number of r-records by quadrature.
    ExactMean(ExactMeanArgs),
    /// Expansion constants for (k, r) as JSON.
    Constants {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
    },
    /// Evaluate the limit law on a grid.
    Limit(LimitArgs),
    /// Run an experiment described by a JSON file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "node")]
    variant: Variant,
    /// Use the direct cutting process instead of record counting (totals only).
    #[arg(long)]
    process: bool,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactMeanArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    r: usize,
    /// Condition on the root's removal time.
    #[arg(long)]
    y: Option<f64>,
    #[arg(long)]
    edge: bool,
    /// Also print the leading-order expansion and the gap to it.
    #[arg(long)]
    compare_asymptotic: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["density", "tail", "cf", "cdf"])))]
struct LimitArgs {
    #[arg(long)]
    r: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    /// Lévy density.
    #[arg(long)]
    density: bool,
    /// Lévy tail ν((x, ∞)).
    #[arg(long)]
    tail: bool,
    /// Characteristic function of W.
    #[arg(long)]
    cf: bool,
    /// CDF of 1 − C3 W.
    #[arg(long)]
    cdf: bool,
    /// Grid as a:b:steps (steps + 1 points).
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

type MeasureFn = fn(f64, &LimitParams) -> Result<f64>;

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || KcutError::Config(format!("grid must look like a:b:steps, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !a.is_finite() || !b.is_finite() || steps == 0 || steps > 10_000_000 {
        return Err(bad());
    }
    Ok((0..=steps).map(|i| a + (b - a) * i as f64 / steps as f64).collect())
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| KcutError::from(e).context(&p.display().to_string()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_out(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink(out)?))
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let tree = CompleteTree::new(a.n)?;
    let sim = if a.process { Simulator::Process } else { Simulator::Records };
    let batch = simulate_batch(&tree, a.k, a.variant, sim, a.samples, a.seed)?;
    let mut w = csv_out(&a.out)?;
    w.write_record(["sample_index", "r", "count"])?;
    for s in &batch {
        for (r, c) in s.per_r.iter().enumerate() {
            w.write_record([s.index.to_string(), (r + 1).to_string(), c.to_string()])?;
        }
        w.write_record([s.index.to_string(), "total".into(), s.total.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn exact_mean(a: &ExactMeanArgs) -> Result<()> {
    let variant = if a.edge { Variant::Edge } else { Variant::Node };
    let q = MeanQuery { n: a.n, k: a.k, r: a.r, y: a.y, variant };
    let v = expected_records(&q)?;
    println!("{v:.14e}");
    if a.compare_asymptotic {
        let asym = asymptotic_mean(a.n, &constants(a.k, a.r)?)?;
        println!("asymptotic {asym:.14e}");
        println!("relative_gap {:.14e}", (asym - v) / v);
    }
    Ok(())
}

fn limit(a: &LimitArgs) -> Result<()> {
    let p = LimitParams::new(a.r, a.k, a.gamma)?;
    let grid = parse_grid(&a.grid)?;
    let mut w = csv_out(&a.out)?;
    if a.cf {
        let law = LimitLaw::new(&p)?;
        w.write_record(["t", "re", "im"])?;
        for t in grid {
            let z = law.char_fn(t);
            w.write_record([fmt_real(t), fmt_real(z.re), fmt_real(z.im)])?;
        }
    } else if a.cdf {
        let c = LimitCdf::new(&p, &constants(a.k, a.r)?)?;
        w.write_record(["y", "cdf"])?;
        for y in grid {
            w.write_record([fmt_real(y), fmt_real(c.cdf(y))])?;
        }
    } else {
        let (name, f): (&str, MeasureFn) = if a.density { ("density", levy_density) } else { ("tail", levy_tail) };
        w.write_record(["x", name])?;
        for x in grid {
            w.write_record([fmt_real(x), fmt_real(f(x, &p)?)])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn experiment(path: &PathBuf) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| KcutError::from(e).context(&path.display().to_string()))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_outputs(&report)?;
    if cfg.output.csv.is_none() {
        let mut out = io::stdout().lock();
        kcut_core::harness::write_report_csv(&report, &mut out)?;
    }
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::ExactMean(a) => exact_mean(a),
        Command::Constants { k, r } => {
            let t = constants(*k, *r)?;
            println!("{}", serde_json::to_string_pretty(&t)?);
            Ok(())
        }
        Command::Limit(a) => limit(a),
        Command::Experiment { config } => experiment(config),
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(0) => return Err(KcutError::Config("--threads must be positive".into())),
        Some(t) => Some(t),
        None => env_threads()?,
    };
    match threads {
        Some(t) => with_threads(t, || dispatch(&cli.command))?,
        None => dispatch(&cli.command),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kcut: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
