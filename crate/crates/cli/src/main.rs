use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vnwb_core::backend::{parse_backend, BackendFile};
use vnwb_core::gallery::{builtin_backend, BUILTIN};
use vnwb_core::job::{self, MAX_PRECISION};
use vnwb_core::{Certificate, Command, JobConfig, Method, Outcome};

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Exact computations on presented inclusions of finite-dimensional
/// tracial algebras, with re-checkable certificates.
#[derive(Parser, Debug)]
#[command(name = "vnwb", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    /// Backend file (`vnwb-backend v1`).
    #[arg(long, global = true, conflicts_with = "gallery")]
    input: Option<PathBuf>,
    /// Built-in gallery entry, used when no input file is given.
    #[arg(long, global = true, default_value = "amplification")]
    gallery: String,
    /// Precision exponent k: approximations are within 2^-k.
    #[arg(long, global = true, default_value_t = 20)]
    precision: u32,
    /// Enumeration budget (default depends on the command).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads; never changes results.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Certificate output path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Source for expectations and indices.
    #[arg(long, global = true, value_parser = ["backend", "basis", "declared", "jump"])]
    method: Option<String>,
    /// Tower depth.
    #[arg(long, global = true, default_value_t = 2)]
    depth: usize,
    /// Jump expectation: test against only the first n words of N.
    #[arg(long, global = true)]
    z_words: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build the inclusion and print its data.
    Build,
    /// 2-norm and operator norm bound of a term.
    Norm { term: String },
    /// Exact trace of a term (of M, or of M1 when it uses `e`).
    Trace { term: String },
    /// Conditional expectation onto N.
    Expect { term: String },
    /// Index by the chosen method.
    Index,
    /// Construct and verify a Pimsner-Popa basis.
    Ppbasis,
    /// Normal form of a term of M1.
    Normalform { term: String },
    /// The element m of M with m*e = v*e.
    Stripe { term: String },
    /// Jones tower to the given depth.
    Tower,
    /// Markov property of a TLJ gallery entry.
    Markov {
        /// Generator index (default: the last).
        #[arg(long)]
        i: Option<usize>,
        /// Maximal word length.
        #[arg(long, default_value_t = 6)]
        len: usize,
    },
    /// Re-check a certificate file.
    Verify { certificate: PathBuf },
}

fn backend(o: &Opts) -> Result<BackendFile, String> {
    match &o.input {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_backend(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
        None => builtin_backend(&o.gallery).map_err(|_| format!("unknown gallery entry (known: {})", BUILTIN.join(", "))),
    }
}

fn config(o: &Opts) -> Result<JobConfig, String> {
    if o.precision == 0 || o.precision > MAX_PRECISION {
        return Err(format!("--precision must be in 1..={MAX_PRECISION}"));
    }
    if o.workers == 0 {
        return Err("--workers must be positive".into());
    }
    let mut c = JobConfig::new(backend(o)?);
    c.precision = o.precision;
    c.budget = o.budget;
    c.workers = o.workers;
    c.method = o.method.as_deref().map(str::parse::<Method>).transpose().map_err(|e| e.to_string())?;
    c.depth = o.depth;
    c.z_words = o.z_words;
    Ok(c)
}

fn exit_code(o: Outcome) -> ExitCode {
    match o {
        Outcome::Passed => ExitCode::SUCCESS,
        Outcome::Failed => ExitCode::from(EXIT_FAILED),
        Outcome::Exhausted => ExitCode::from(EXIT_BUDGET),
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("vnwb: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = &cli.opts;
    if let Cmd::Verify { certificate } = &cli.cmd {
        let text = match std::fs::read_to_string(certificate) {
            Ok(t) => t,
            Err(e) => return config_error(format!("{}: {e}", certificate.display())),
        };
        let out = match Certificate::parse(&text).and_then(|c| job::verify(&c, o.workers.max(1))) {
            Ok(out) => out,
            Err(e) => return config_error(e),
        };
        print!("{}", out.report);
        return exit_code(out.outcome);
    }
    let mut cfg = match config(o) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let cmd = match cli.cmd {
        Cmd::Build => Command::Build,
        Cmd::Norm { term } => Command::Norm(term),
        Cmd::Trace { term } => Command::Trace(term),
        Cmd::Expect { term } => Command::Expect(term),
        Cmd::Index => Command::Index,
        Cmd::Ppbasis => Command::PpBasis,
        Cmd::Normalform { term } => Command::NormalForm(term),
        Cmd::Stripe { term } => Command::Stripe(term),
        Cmd::Tower => Command::Tower,
        Cmd::Markov { i, len } => {
            cfg.markov_i = i;
            cfg.markov_len = len;
            Command::Markov
        }
        Cmd::Verify { .. } => unreachable!("handled above"),
    };
    let out = match job::run(&cmd, &cfg) {
        Ok(out) => out,
        Err(e) => return config_error(e),
    };
    print!("{}", out.report);
    if let Some(p) = &o.out {
        if let Err(e) = std::fs::write(p, out.certificate.to_text()) {
            return config_error(format!("{}: {e}", p.display()));
        }
    }
    exit_code(out.outcome)
}
