use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use colligation::charfn::{charfn_eval, det_identity_residual};
use colligation::divisor::divisor_summary;
use colligation::invariants::{conjugacy_oracle, fingerprint};
use colligation::io::{
    colligation_to_json, divisor_summary_to_json, fingerprint_to_json, matrix_from_json, matrix_to_json,
    parse_colligation, to_canonical_string, verdict_to_json, AnyColligation, JsonScalar,
};
use colligation::poly::DEFAULT_DET_CAP;
use colligation::semigroup::circ;
use colligation::verify::{self, random_point, RunConfig, Suite};
use colligation::{Colligation, Complex64, Error, Flavor, GaussRat, Mat, Mode, Shape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "collig", version, about = "Colligations, characteristic functions, divisors and invariants")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scalar mode. Commands reading documents take the mode from the
    /// document and reject a conflicting flag.
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true, env = "COLLIG_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    /// Word-length cap for invariants; defaults to N².
    #[arg(long, global = true)]
    max_word_len: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_DET_CAP)]
    det_cap: usize,
    /// Work with the j-fold amplification.
    #[arg(long, global = true)]
    amplify: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a random colligation.
    Random {
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value = "general")]
        flavor: Flavor,
    },
    /// Emit g∘h.
    Product { g: PathBuf, h: PathBuf },
    /// Evaluate the characteristic function at S.
    Charfn {
        input: PathBuf,
        /// S as inline JSON or a file path; a seeded random point if omitted.
        #[arg(long = "S", alias = "s")]
        s: Option<String>,
        #[arg(long)]
        check_det_identity: bool,
    },
    /// Summarize the divisor polynomial.
    Divisor {
        input: PathBuf,
        /// Include the terms of p.
        #[arg(long)]
        terms: bool,
    },
    /// Emit the invariant fingerprint.
    Invariants { input: PathBuf },
    /// Decide conjugacy of two colligations.
    Conjtest { g: PathBuf, h: PathBuf },
    /// Run a named property suite.
    Verify { suite: String },
}

enum Failure {
    Input(String),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<Value, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path, g: &Global) -> Result<AnyColligation, Failure> {
    let c = parse_colligation(&read_text(path)?)?;
    if let Some(mode) = g.mode {
        if mode != c.mode() {
            return Err(Failure::Input(format!("--mode {mode} was given a {} document", c.mode())));
        }
    }
    Ok(match g.amplify {
        None | Some(1) => c,
        Some(j) => match c {
            AnyColligation::Exact(c) => c.amplify(j)?.into(),
            AnyColligation::Float(c) => c.amplify(j)?.into(),
        },
    })
}

fn random(g: &Global, shape: Shape, flavor: Flavor) -> Outcome {
    Ok(match g.mode.unwrap_or(Mode::Exact) {
        Mode::Exact => colligation_to_json(&Colligation::<GaussRat>::random(shape, flavor, g.seed)?),
        Mode::Float => colligation_to_json(&Colligation::<Complex64>::random(shape, flavor, g.seed)?),
    })
}

fn product(a: AnyColligation, b: AnyColligation) -> Outcome {
    match (a, b) {
        (AnyColligation::Exact(a), AnyColligation::Exact(b)) => Ok(colligation_to_json(&circ(&a, &b)?)),
        (AnyColligation::Float(a), AnyColligation::Float(b)) => Ok(colligation_to_json(&circ(&a, &b)?)),
        _ => Err(Error::ModeMismatch.into()),
    }
}

fn parse_point<F: JsonScalar>(arg: &str) -> Result<Mat<F>, Failure> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('[') {
        arg.to_string()
    } else {
        read_text(Path::new(arg))?
    };
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("S: {e}")))?;
    let v = v.get("S").cloned().unwrap_or(v);
    Ok(matrix_from_json(&v)?)
}

fn charfn<F: JsonScalar>(c: &Colligation<F>, s: Option<&str>, check: bool, g: &Global) -> Outcome {
    let m = c.shape().m;
    let s: Mat<F> = match s {
        Some(arg) => parse_point(arg)?,
        None => random_point(m, &mut ChaCha8Rng::seed_from_u64(g.seed)),
    };
    let value = charfn_eval(c, &s)?;
    let mut out = json!({"S": matrix_to_json(&s), "value": matrix_to_json(&value)});
    if check {
        let d = det_identity_residual(c, &s)?;
        let rel = d.residual.modulus() / d.scale;
        let ok = if c.mode() == Mode::Exact { d.residual.is_zero() } else { rel <= g.tol };
        out["detIdentityResidual"] = json!(rel);
        if !ok {
            return Err(Failure::Verification(out));
        }
    }
    Ok(out)
}

fn divisor<F: JsonScalar>(c: &Colligation<F>, terms: bool, g: &Global) -> Outcome {
    Ok(divisor_summary_to_json(&divisor_summary(c, g.det_cap)?, terms))
}

fn invariants<F: JsonScalar>(c: &Colligation<F>, g: &Global) -> Outcome {
    let n = c.shape().n;
    let len = g.max_word_len.unwrap_or((n * n).max(1));
    Ok(fingerprint_to_json(&fingerprint(c, len)?))
}

fn conjtest(a: AnyColligation, b: AnyColligation, g: &Global) -> Outcome {
    match (a, b) {
        (AnyColligation::Exact(a), AnyColligation::Exact(b)) => Ok(verdict_to_json(&conjugacy_oracle(&a, &b, g.seed)?)),
        (AnyColligation::Float(a), AnyColligation::Float(b)) => Ok(verdict_to_json(&conjugacy_oracle(&a, &b, g.seed)?)),
        _ => Err(Error::ModeMismatch.into()),
    }
}

fn run_verify(suite: &str, g: &Global) -> Outcome {
    let suite: Suite = suite.parse()?;
    let cfg = RunConfig {
        mode: g.mode.unwrap_or(Mode::Exact),
        seed: g.seed,
        tol: g.tol,
        trials: g.trials,
        max_word_len: g.max_word_len,
        det_cap: g.det_cap,
    };
    let reports = verify::run(suite, &cfg)?;
    let ok = reports.iter().all(|r| r.ok());
    let out = if suite == Suite::All {
        json!({"suite": "all", "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()})
    } else {
        reports[0].to_json()
    };
    if ok {
        Ok(out)
    } else {
        Err(Failure::Verification(out))
    }
}

macro_rules! each_mode {
    ($c:expr, $x:ident => $body:expr) => {
        match $c {
            AnyColligation::Exact($x) => $body,
            AnyColligation::Float($x) => $body,
        }
    };
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Random { alpha, m, n, flavor } => random(g, Shape::new(*alpha, *m, *n)?, *flavor),
        Command::Product { g: a, h: b } => product(load(a, g)?, load(b, g)?),
        Command::Charfn { input, s, check_det_identity } => {
            each_mode!(load(input, g)?, c => charfn(&c, s.as_deref(), *check_det_identity, g))
        }
        Command::Divisor { input, terms } => each_mode!(load(input, g)?, c => divisor(&c, *terms, g)),
        Command::Invariants { input } => each_mode!(load(input, g)?, c => invariants(&c, g)),
        Command::Conjtest { g: a, h: b } => conjtest(load(a, g)?, load(b, g)?, g),
        Command::Verify { suite } => run_verify(suite, g),
    }
}

/// Writes a document, ignoring a closed pipe.
fn emit(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", to_canonical_string(v));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(v)) => {
            emit(&v);
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
