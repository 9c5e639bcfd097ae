use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use adelic::approx::find_near_one;
use adelic::density::{accumulation_profile, certificate, coverage, enumerate_orbit, OrbitOptions, SemigroupSpec};
use adelic::ifs::{
    box_counting, dimension_report, four_map_system, generate_attractor, two_column, verify_correspondence,
    AffineContraction, AttractorMode, IfsSystem,
};
use adelic::interval::fmt_rational;
use adelic::number::{parse_rational, Rational};
use adelic::padic::{expand, xi};
use adelic::verify::{all_passed, run_suite, Status, SuiteOptions};
use adelic::{BasePoint, Error, RealSource};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};

mod output;

use output::{document, write_atomic};

#[derive(Parser)]
#[command(name = "adelic", version, about = "Exact experiments on the adelic solenoid A/Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay every worked example; nonzero exit on any failure
    Verify(VerifyArgs),
    /// Enumerate a semigroup orbit and measure its coverage
    Orbit(OrbitArgs),
    /// Find gamma^a / delta^b in (1, 1 + eps)
    Approx(ApproxArgs),
    /// Density certificate k_p(eps) and N(eps)
    Cert(CertArgs),
    /// p-adic expansion, optionally with the periodic representative xi
    Expand(ExpandArgs),
    /// Iterated function system experiments
    Ifs(IfsArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Group name or substring of check names
    #[arg(long)]
    filter: Option<String>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the offset of T3 (negative control)
    #[arg(long, hide = true)]
    t3_offset: Option<String>,
}

#[derive(Args)]
struct OrbitArgs {
    #[arg(long)]
    gamma: String,
    #[arg(long)]
    delta: String,
    /// Fraction, or symbolic: sqrt(n), sqrt(n)-r, phi
    #[arg(long, allow_hyphen_values = true)]
    alpha_real: String,
    /// Coordinate at a prime, as p=a/b (repeatable)
    #[arg(long, allow_hyphen_values = true)]
    alpha_p: Vec<String>,
    /// Coordinate at every other prime
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    tail: String,
    #[arg(long, default_value = "1/10")]
    eps: String,
    #[arg(long, default_value_t = 12)]
    amax: u32,
    #[arg(long, default_value_t = 12)]
    bmax: u32,
    /// Real buckets M (even)
    #[arg(long, default_value_t = 16)]
    buckets: u64,
    #[arg(long, default_value_t = adelic::solenoid::DEFAULT_PRECISION_BITS)]
    precision_bits: u32,
    /// Rows still straddling a floor at this precision fail with exit code 3
    #[arg(long, default_value_t = 1 << 14)]
    max_precision_bits: u32,
    /// Required when probes > 0
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    probes: usize,
    /// Orbit records, one JSON object per line
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coverage report; stdout when absent
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Comma-separated shells a+b for the accumulation profile
    #[arg(long, value_delimiter = ',')]
    shells: Vec<u32>,
    /// Require an integer delta
    #[arg(long)]
    theorem_mode: bool,
    /// Keep reduction witnesses in the records
    #[arg(long)]
    witnesses: bool,
}

#[derive(Args)]
struct ApproxArgs {
    /// GAMMA DELTA EPS, as an alternative to the flags
    #[arg(num_args = 0..=3, allow_hyphen_values = true)]
    positional: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertArgs {
    /// EPS, as an alternative to --eps
    positional: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExpandArgs {
    #[arg(allow_hyphen_values = true)]
    x: String,
    #[arg(long)]
    p: Option<u64>,
    /// Base P of the representative (x - A_i) / P^i
    #[arg(long)]
    xi_base: Option<u64>,
    #[arg(long)]
    xi_i: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IfsArgs {
    #[command(subcommand)]
    command: IfsCommand,
}

#[derive(Subcommand)]
enum IfsCommand {
    /// Hutchinson dimension (reduced and raw) with a box-count estimate
    Dim {
        #[arg(long, default_value_t = 8)]
        depth: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Attractor sample as two-column text
    Attractor {
        #[arg(long, default_value_t = 8)]
        depth: u32,
        /// Chaos game with this many points instead of the full tree
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use only the maps left after removing contained images
        #[arg(long)]
        reduced: bool,
        #[arg(long, default_value_t = 1 << 22)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Action versus T1..T4 at a point x in [0,1)
    Correspond {
        #[arg(long, default_value = "0")]
        x: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Check(String),
    Precision(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PrecisionExhausted { .. } => Failure::Precision(e.to_string()),
            Error::ResourceLimit(_) => Failure::Other(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn rational(name: &str, s: &str) -> std::result::Result<Rational, Failure> {
    parse_rational(s).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Outcome {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            // A closed pipe (`| head`) is not an error.
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn emit_json(out: Option<&PathBuf>, v: &Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    emit(out, &text)
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let mut opts = SuiteOptions { filter: a.filter.clone(), seed: a.seed, ..SuiteOptions::default() };
    if let Some(off) = &a.t3_offset {
        let mut maps = four_map_system().maps().to_vec();
        maps[2] = AffineContraction::new(Rational::new(5.into(), 64.into()), rational("t3-offset", off)?)?;
        opts.system = IfsSystem::new(maps)?;
    }
    let results = run_suite(&opts);
    if let (Some(f), true) = (&a.filter, results.is_empty()) {
        return Err(Failure::Usage(format!("filter {f:?} selects no checks")));
    }
    let mut text = String::new();
    for r in &results {
        text.push_str(&format!("{r}\n"));
    }
    let failed = results.iter().filter(|r| r.status == Status::Fail).count();
    let passed = results.iter().filter(|r| r.status == Status::Pass).count();
    text.push_str(&format!("{passed} passed, {failed} failed\n"));
    emit(a.out.as_ref(), &text)?;
    if all_passed(&results) {
        Ok(())
    } else {
        Err(Failure::Check(format!("{failed} check(s) failed")))
    }
}

fn parse_alpha_p(entries: &[String]) -> std::result::Result<BTreeMap<u64, Rational>, Failure> {
    let mut map = BTreeMap::new();
    for e in entries {
        let (p, c) = e.split_once('=').ok_or_else(|| Failure::Usage(format!("--alpha-p {e:?}: expected p=a/b")))?;
        let p: u64 = p.trim().parse().map_err(|_| Failure::Usage(format!("--alpha-p {e:?}: bad prime")))?;
        if !adelic::number::is_prime(p) {
            return Err(Failure::Usage(format!("--alpha-p {e:?}: {p} is not prime")));
        }
        if map.insert(p, rational("alpha-p", c)?).is_some() {
            return Err(Failure::Usage(format!("--alpha-p: prime {p} given twice")));
        }
    }
    Ok(map)
}

fn cmd_orbit(a: OrbitArgs) -> Outcome {
    let gamma = rational("gamma", &a.gamma)?;
    let delta = rational("delta", &a.delta)?;
    let eps = rational("eps", &a.eps)?;
    let real: RealSource = a.alpha_real.parse().map_err(|e: Error| Failure::Usage(format!("--alpha-real: {e}")))?;
    let tracked = parse_alpha_p(&a.alpha_p)?;
    let tail = rational("tail", &a.tail)?;
    if a.probes > 0 && a.seed.is_none() {
        return Err(Failure::Usage("--seed is required when --probes is positive".into()));
    }
    if a.threads == 0 {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    let spec = SemigroupSpec::new(gamma, delta)?;
    if a.theorem_mode && !spec.delta_is_integer() {
        return Err(Failure::Usage(format!("--theorem-mode needs an integer delta, got {}", spec.delta())));
    }
    let cert = certificate(&eps)?;
    let base = BasePoint::new(real, tracked, tail);
    // validates the base point before any work
    base.realize(a.precision_bits)?;
    if a.max_precision_bits < a.precision_bits {
        return Err(Failure::Usage("--max-precision-bits is below --precision-bits".into()));
    }
    let opts = OrbitOptions {
        precision_bits: a.precision_bits,
        max_precision_bits: a.max_precision_bits,
        keep_witnesses: a.witnesses,
        threads: a.threads,
        ..OrbitOptions::default()
    };
    let points = enumerate_orbit(&base, &spec, a.amax, a.bmax, &opts)?;
    let seed = a.seed.unwrap_or(0);
    let report = coverage(&points, &cert, a.buckets, a.probes, seed)?;

    let config = json!({
        "gamma": fmt_rational(spec.gamma()),
        "delta": fmt_rational(spec.delta()),
        "alpha_real": base.real.to_string(),
        "alpha_p": base.tracked.iter().map(|(p, c)| (p.to_string(), json!(fmt_rational(c)))).collect::<serde_json::Map<_, _>>(),
        "tail": fmt_rational(&base.tail),
        "eps": fmt_rational(&eps),
        "amax": a.amax,
        "bmax": a.bmax,
        "buckets": a.buckets,
        "precision_bits": a.precision_bits,
        "max_precision_bits": a.max_precision_bits,
        "seed": a.seed,
        "probes": a.probes,
        "theorem_mode": a.theorem_mode,
    });
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string(&document("orbit-stream", &config, json!({}))).expect("serializable");
        text.push('\n');
        for p in &points {
            text.push_str(&serde_json::to_string(&p.to_json()).expect("serializable"));
            text.push('\n');
        }
        write_atomic(path, text.as_bytes())?;
    }
    let mut body = json!({
        "semigroup": spec.to_json(),
        "certificate": cert.to_json(),
        "coverage": report.to_json(),
    });
    if !a.shells.is_empty() {
        body["accumulation"] = accumulation_profile(&points, &spec, &a.shells).to_json();
    }
    emit_json(a.report.as_ref(), &document("orbit", &config, body))
}

fn pick(flag: Option<String>, positional: Option<&String>, name: &str) -> std::result::Result<String, Failure> {
    match (flag, positional) {
        (Some(f), None) => Ok(f),
        (None, Some(p)) => Ok(p.clone()),
        (Some(_), Some(_)) => Err(Failure::Usage(format!("{name} given both positionally and as --{name}"))),
        (None, None) => Err(Failure::Usage(format!("missing {name}"))),
    }
}

fn cmd_approx(a: ApproxArgs) -> Outcome {
    let gamma = rational("gamma", &pick(a.gamma, a.positional.first(), "gamma")?)?;
    let delta = rational("delta", &pick(a.delta, a.positional.get(1), "delta")?)?;
    let eps = rational("eps", &pick(a.eps, a.positional.get(2), "eps")?)?;
    let e = find_near_one(&gamma, &delta, &eps)?;
    let config = json!({ "gamma": fmt_rational(&gamma), "delta": fmt_rational(&delta), "eps": fmt_rational(&eps) });
    let body = json!({
        "a": e.a.to_string(),
        "b": e.b.to_string(),
        "sigma": fmt_rational(&e.sigma),
        "convergent_index": e.convergent_index,
        "normalization": {
            "gamma_squared": e.normalization.gamma_squared,
            "delta_squared": e.normalization.delta_squared,
            "delta_inverted": e.normalization.delta_inverted,
        },
    });
    emit_json(a.out.as_ref(), &document("approx", &config, body))
}

fn cmd_cert(a: CertArgs) -> Outcome {
    let eps = rational("eps", &pick(a.eps, a.positional.as_ref(), "eps")?)?;
    let c = certificate(&eps)?;
    emit_json(a.out.as_ref(), &document("cert", &json!({ "eps": fmt_rational(&eps) }), c.to_json()))
}

fn cmd_expand(a: ExpandArgs) -> Outcome {
    let x = rational("x", &a.x)?;
    let mut body = json!({});
    if let Some(p) = a.p {
        let e = expand(&x, p)?;
        body["expansion"] = json!({
            "p": e.p,
            "valuation": e.valuation,
            "preperiod": e.preperiod,
            "period": e.period,
            "purely_periodic": e.is_purely_periodic(),
        });
    }
    match (a.xi_base, a.xi_i) {
        (Some(base), Some(i)) => {
            let e = xi(&x, &BigUint::from(base), i)?;
            body["xi"] = json!({
                "base": base,
                "i": i,
                "residue": e.residue.to_string(),
                "xi": fmt_rational(&e.xi),
                "stable": e.is_stable()?,
            });
        }
        (None, None) => {}
        _ => return Err(Failure::Usage("--xi-base and --xi-i go together".into())),
    }
    if a.p.is_none() && a.xi_base.is_none() {
        return Err(Failure::Usage("give --p and/or --xi-base with --xi-i".into()));
    }
    let config = json!({ "x": fmt_rational(&x), "p": a.p, "xi_base": a.xi_base, "xi_i": a.xi_i });
    emit_json(a.out.as_ref(), &document("expand", &config, body))
}

fn box_scales() -> Vec<u64> {
    (2..=10).map(|e| 1u64 << e).collect()
}

fn cmd_ifs(a: IfsArgs) -> Outcome {
    let system = four_map_system();
    match a.command {
        IfsCommand::Dim { depth, out } => {
            let report = dimension_report(&system)?;
            let pts = generate_attractor(&system, AttractorMode::FullTree { depth }, 1 << 22)?;
            let boxes = box_counting(&pts, &box_scales())?;
            let body = json!({ "dimension": report.to_json(), "box_count": boxes.to_json() });
            emit_json(out.as_ref(), &document("ifs-dim", &json!({ "depth": depth }), body))
        }
        IfsCommand::Attractor { depth, count, seed, reduced, budget, out } => {
            let sys = if reduced { system.reduced() } else { system };
            let mode = match (count, seed) {
                (Some(count), Some(seed)) => AttractorMode::ChaosGame { seed, count },
                (Some(_), None) => return Err(Failure::Usage("--seed is required for the chaos game".into())),
                (None, _) => AttractorMode::FullTree { depth },
            };
            let pts = generate_attractor(&sys, mode, budget)?;
            emit(out.as_ref(), &two_column(&pts))
        }
        IfsCommand::Correspond { x, out } => {
            let x = rational("x", &x)?;
            let checks = verify_correspondence(&x)?;
            let ok = checks.iter().all(|c| c.passed);
            let body = json!({ "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(), "passed": ok });
            emit_json(out.as_ref(), &document("ifs-correspond", &json!({ "x": fmt_rational(&x) }), body))?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Check("correspondence failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Orbit(a) => cmd_orbit(a),
        Command::Approx(a) => cmd_approx(a),
        Command::Cert(a) => cmd_cert(a),
        Command::Expand(a) => cmd_expand(a),
        Command::Ifs(a) => cmd_ifs(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("adelic: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("adelic: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Precision(m)) => {
            eprintln!("adelic: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("adelic: {m}");
            ExitCode::from(1)
        }
    }
}
