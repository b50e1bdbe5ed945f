use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iwasawa_coinv::report::{cmd_decompose, cmd_delta, cmd_sweep, cmd_verify, Format, SuiteConfig};
use iwasawa_coinv::{Error, Result};

const WORKERS_ENV: &str = "IWACOINV_WORKERS";

#[derive(Parser)]
#[command(
    name = "iwacoinv",
    version,
    about = "Finite-level coinvariant and congruence subgroup checks"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Primes, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Vec<u64>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    /// Numbers of SL2 copies, comma separated (1 and/or 2).
    #[arg(long, global = true, value_delimiter = ',')]
    t: Vec<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    enum_cap: Option<usize>,
    #[arg(long, global = true)]
    dim_cap: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[arg(long, global = true)]
    relaxed_decompose: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every check suite; JSON lines by default.
    Verify,
    /// Coinvariant dimension tables; CSV by default.
    Sweep,
    /// Filtration of F(d) in the coset module at level k.
    Decompose { d: u64, k: u32 },
    /// Table of delta(p) for primes up to pmax.
    Delta {
        #[arg(default_value_t = 100)]
        pmax: u64,
    },
}

fn load_config(opts: &Opts) -> Result<SuiteConfig> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parameter(format!("reading {}: {e}", path.display())))?;
            SuiteConfig::from_toml(&text)?
        }
        None => SuiteConfig::default(),
    };
    if !opts.p.is_empty() {
        cfg.primes = opts.p.clone();
    }
    if !opts.t.is_empty() {
        cfg.copies = opts.t.clone();
    }
    if let Some(v) = opts.n_max {
        cfg.n_max = v;
    }
    if let Some(v) = opts.seed {
        cfg.seed = v;
    }
    if let Some(v) = opts.enum_cap {
        cfg.enum_cap = v;
    }
    if let Some(v) = opts.dim_cap {
        cfg.dim_cap = v;
    }
    if opts.out.is_some() {
        cfg.out = opts.out.clone();
    }
    cfg.relaxed_decompose |= opts.relaxed_decompose;
    cfg.validate()?;
    Ok(cfg)
}

fn init_workers() -> Result<()> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Parameter(format!(
            "{WORKERS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))
}

fn run(cli: Cli) -> Result<bool> {
    init_workers()?;
    let cfg = load_config(&cli.opts)?;
    let mut out: Box<dyn Write> = match &cfg.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                Error::Parameter(format!("creating {}: {e}", path.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let format = cli.opts.format.map(Format::from);
    let ok = match cli.cmd {
        Cmd::Verify => cmd_verify(&cfg, format.unwrap_or(Format::Json), &mut out)?,
        Cmd::Sweep => {
            cmd_sweep(&cfg, format.unwrap_or(Format::Csv), &mut out)?;
            true
        }
        Cmd::Decompose { d, k } => {
            let p = match cfg.primes.as_slice() {
                [p] => *p,
                _ => {
                    return Err(Error::Parameter(
                        "decompose needs exactly one prime via --p".into(),
                    ))
                }
            };
            cmd_decompose(d, p, k, &cfg, &mut out)?
        }
        Cmd::Delta { pmax } => {
            cmd_delta(pmax, format, &mut out)?;
            true
        }
    };
    out.flush()
        .map_err(|e| Error::Parameter(format!("flushing output: {e}")))?;
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (Error::Containment(_) | Error::Structural(_))) => {
            eprintln!("iwacoinv: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("iwacoinv: {e}");
            ExitCode::from(2)
        }
    }
}
