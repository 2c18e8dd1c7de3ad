use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use jointpf::energy::EnergyError;
use jointpf::oracle::{self, OracleError};
use jointpf::outside::{hybrid_probabilities, outside, target_sites};
use jointpf::report::{self, Header, PfReport, ReportError};
use jointpf::sampler::{sample_batch, SampleError};
use jointpf::{inside, memory_estimate, EnergyModel, EngineConfig, InsideError, InsideResult, Strand};

#[derive(Parser)]
#[command(name = "jointpf", version, about = "Partition function and sampling of RNA-RNA joint structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// One FASTA file with two records, or two files with one record each (query first)
    #[arg(required = true, num_args = 1..=2)]
    inputs: Vec<PathBuf>,
    /// Energy parameter file
    #[arg(long, env = "JOINTPF_PARAMS")]
    params: Option<PathBuf>,
    /// Output directory; standard output when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Table memory budget, e.g. 2GiB, 512MiB or a byte count
    #[arg(long, default_value = "2GiB", value_parser = parse_bytes)]
    mem_budget: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Joint and single-strand partition functions
    Pf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: bool,
    },
    /// Intra- and intermolecular base-pair probabilities (TSV)
    Bpp {
        #[command(flatten)]
        common: Common,
        /// Include zero entries
        #[arg(long)]
        full: bool,
    },
    /// Hybrid footprint probabilities (TSV)
    Hybrids {
        #[command(flatten)]
        common: Common,
    },
    /// Ranked target sites
    Targets {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1, value_parser = parse_threshold)]
        threshold: f64,
        /// List every region with nonzero probability
        #[arg(long)]
        full: bool,
    },
    /// Boltzmann sample of joint structures
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        num: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Intermolecular pair probabilities as SVG
    Dotplot {
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive enumeration (small inputs only)
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Also list every structure with its probability
        #[arg(long)]
        full: bool,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Report(#[from] ReportError),
    #[error("{0}")]
    Energy(#[from] EnergyError),
    #[error("{0}")]
    Inside(#[from] InsideError),
    #[error("{0}")]
    Sample(#[from] SampleError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Threads(String),
}

impl CliError {
    fn class(&self) -> &'static str {
        match self {
            CliError::Report(e) => e.class(),
            CliError::Energy(EnergyError::MissingFile(_)) => "MissingFile",
            CliError::Energy(EnergyError::ParseError { .. }) => "ParseError",
            CliError::Energy(EnergyError::InvalidGap { .. }) => "InvalidGap",
            CliError::Inside(InsideError::CapacityExceeded { .. }) => "CapacityExceeded",
            CliError::Inside(InsideError::TooLong { .. }) => "TooLong",
            CliError::Sample(_) => "NumericalUnderflow",
            CliError::Oracle(_) => "LimitExceeded",
            CliError::Threads(_) => "Threads",
        }
    }
}

fn parse_bytes(s: &str) -> Result<usize, String> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (digits, unit) = s.split_at(split);
    let base: usize = digits.parse().map_err(|_| format!("invalid size '{s}'"))?;
    let mult = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 1,
        "k" | "kib" => 1 << 10,
        "m" | "mib" => 1 << 20,
        "g" | "gib" => 1 << 30,
        _ => return Err(format!("unknown unit in '{s}'")),
    };
    base.checked_mul(mult).ok_or_else(|| format!("size '{s}' overflows"))
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if (0.0..=1.0).contains(&t) => Ok(t),
        _ => Err(format!("threshold must lie in [0, 1], got '{s}'")),
    }
}

struct Loaded {
    r: Strand,
    s: Strand,
    model: EnergyModel,
}

fn load(c: &Common) -> Result<Loaded, CliError> {
    if let Some(t) = c.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let (r, s) = report::ingest_fasta(&c.inputs)?;
    let model = match &c.params {
        Some(p) => EnergyModel::load_params(p)?,
        None => EnergyModel::default(),
    };
    Ok(Loaded { r, s, model })
}

fn run_inside(c: &Common, l: &Loaded, with_outside: bool) -> Result<InsideResult, CliError> {
    let required = memory_estimate(l.r.len(), l.s.len(), with_outside);
    eprintln!("memory estimate: {required} bytes (budget {})", c.mem_budget);
    let cfg = EngineConfig { memory_budget: c.mem_budget, with_outside };
    Ok(inside(&l.r, &l.s, &l.model, &cfg)?)
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Pf { common, json } => {
            let l = load(&common)?;
            let ins = run_inside(&common, &l, false)?;
            let pf = PfReport {
                header: Header::new(&l.r, &l.s, &l.model.fingerprint(), None),
                q_joint: ins.q_total,
                q_r: ins.q_r(),
                q_s: ins.q_s(),
            };
            let (name, text) = if json { ("pf.json", report::write_pf_json(&pf)) } else { ("pf.txt", report::write_pf(&pf)) };
            report::emit(common.out.as_deref(), name, &text)?;
        }
        Command::Bpp { common, full } => {
            let l = load(&common)?;
            let ins = run_inside(&common, &l, true)?;
            let p = outside(&ins);
            let h = Header::new(&l.r, &l.s, &l.model.fingerprint(), None);
            report::emit(common.out.as_deref(), "bpp.tsv", &report::write_bpp(&h, &p, full))?;
        }
        Command::Hybrids { common } => {
            let l = load(&common)?;
            let ins = run_inside(&common, &l, true)?;
            let p = outside(&ins);
            let hy = hybrid_probabilities(&ins, &p);
            let h = Header::new(&l.r, &l.s, &l.model.fingerprint(), None);
            report::emit(common.out.as_deref(), "hybrids.tsv", &report::write_hybrids(&h, &hy))?;
        }
        Command::Targets { common, threshold, full } => {
            let l = load(&common)?;
            let ins = run_inside(&common, &l, true)?;
            let p = outside(&ins);
            let hy = hybrid_probabilities(&ins, &p);
            let threshold = if full { 0.0 } else { threshold };
            let t = target_sites(&hy, threshold);
            let h = Header::new(&l.r, &l.s, &l.model.fingerprint(), None);
            report::emit(common.out.as_deref(), "targets.txt", &report::write_targets(&h, &t, threshold))?;
        }
        Command::Sample { common, num, seed } => {
            let l = load(&common)?;
            let ins = run_inside(&common, &l, false)?;
            let batch = sample_batch(&ins, num as usize, seed)?;
            let h = Header::new(&l.r, &l.s, &batch.fingerprint, Some(seed));
            report::emit(common.out.as_deref(), "samples.txt", &report::write_samples(&h, &batch.structures))?;
        }
        Command::Dotplot { common } => {
            let l = load(&common)?;
            let ins = run_inside(&common, &l, true)?;
            let p = outside(&ins);
            let h = Header::new(&l.r, &l.s, &l.model.fingerprint(), None);
            report::emit(common.out.as_deref(), "dotplot.svg", &report::write_dotplot(&h, &l.r, &l.s, &p))?;
        }
        Command::Oracle { common, full } => {
            let l = load(&common)?;
            let limits = oracle::Limits { keep_structures: full, ..oracle::Limits::default() };
            let rep = oracle::enumerate(&l.r, &l.s, &l.model, &limits)?;
            let h = Header::new(&l.r, &l.s, &l.model.fingerprint(), None);
            report::emit(common.out.as_deref(), "oracle.txt", &report::write_oracle(&h, &rep))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
