//! Command-line front end: reproduces the built-in constructions, prints
//! reports, and emits/re-checks machine-readable certificates.
//!
//! Exit codes are fixed for scripting:
//!   0  success
//!   1  parse failure (arguments, input files, certificates)
//!   2  verification failure
//!   3  epsilon at or above the verified objective
//!   4  enumeration cap exceeded
//!   5  precondition violated (coprimality, variable limits, ...)

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cbnorm::certificate::float17;
use cbnorm::{
    ap_form, check_von_neumann, counterexample_ratio, delta, gowers_u3, mobius,
    quartic_lower_bound, random_cubic, squarefree_count, verify_membership, Certificate, Error,
    RawPoly, SdpWitness, ZnFunction, DEFAULT_ENUM_CAP,
};

const EXIT_PARSE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_EPSILON: u8 = 3;
const EXIT_CAP: u8 = 4;
const EXIT_PRECONDITION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "cbnorm",
    version,
    about = "Cubic-form counterexamples and query lower-bound certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the built-in bilinear witness and certify its 1-query bound
    Chsh {
        /// Additive error the certificate rules out; must stay below 1 - 1/sqrt(2)
        #[arg(long, default_value_t = 0.29)]
        epsilon: f64,
        /// Certificate output path
        #[arg(long, default_value = "chsh_certificate.json")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Random sign cubic form: invariants, quartic witness, certificate when positive
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Certify only if the quartic objective exceeds this
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Certificate output path (default random_n<n>_seed<seed>.cert.json)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Exact-enumeration cap (log2 of the point budget)
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: usize,
        /// Permit raised caps and the sampled lower-bound fallback
        #[arg(long)]
        unsound_ok: bool,
    },
    /// Explicit arithmetic-progression form with Mobius coefficients
    Explicit {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Re-check a certificate file
    Verify {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Gowers U^3 norm of the Mobius function (or of a JSON Z_n function)
    Gowers {
        /// Modulus for the built-in Mobius input
        #[arg(long, conflicts_with = "input")]
        n: Option<usize>,
        /// JSON file {"n": ..., "values": [...]}
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Reduce a raw polynomial to its multilinear form (x_i^2 = 1)
    Reduce {
        /// JSON file {"n": ..., "terms": [{"alpha": [...], "c": ...}]}
        #[arg(long)]
        input: PathBuf,
        /// Also write the reduced polynomial JSON to this path
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_PARSE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Chsh { epsilon, out, format } => cmd_chsh(epsilon, &out, format),
        Command::Random { n, seed, epsilon, out, format, cap, unsound_ok } => {
            cmd_random(n, seed, epsilon, out, format, cap, unsound_ok)
        }
        Command::Explicit { n, format } => cmd_explicit(n, format),
        Command::Verify { path, format } => cmd_verify(&path, format),
        Command::Gowers { n, input, format } => cmd_gowers(n, input, format),
        Command::Reduce { input, out, format } => cmd_reduce(&input, out, format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::CapExceeded { .. } | Error::SequenceSpaceTooLarge { .. } => EXIT_CAP,
        Error::MembershipFailed { .. } => EXIT_VERIFY,
        Error::ObjectiveNotAboveEpsilon { .. } => EXIT_EPSILON,
        Error::Json(_) | Error::BadCertificate(_) => EXIT_PARSE,
        _ => EXIT_PRECONDITION,
    }
}

fn emit(report: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(report).unwrap()),
        Format::Text => print!("{}", render::render(report)),
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::BadCertificate(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents)
        .map_err(|e| Error::BadCertificate(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// chsh
// ---------------------------------------------------------------------------

fn moment_table(wit: &SdpWitness) -> Value {
    let m = wit.alphabet_len();
    let mut rows = Vec::new();
    for i in 1..=m {
        for j in 1..=m {
            let expected = wit.phi.coeff_mask(wit.phi.seq_parity_set(&[i, j]).unwrap()) / wit.w;
            let actual = wit.moment(&[i, j]).unwrap();
            rows.push(json!({
                "sequence": [i, j],
                "expected": expected,
                "actual": actual,
                "abs_diff": (expected - actual).abs(),
            }));
        }
    }
    Value::Array(rows)
}

fn cmd_chsh(epsilon: f64, out: &Path, format: Format) -> Result<u8, Error> {
    let wit = cbnorm::build_chsh_witness();
    let membership = verify_membership(&wit)?;
    if !membership.pass() {
        let report = json!({ "command": "chsh", "membership": membership });
        emit(&report, format);
        return Ok(EXIT_VERIFY);
    }
    let cert = cbnorm::certify(&wit, epsilon, None)?;
    write_file(out, &cert.to_json())?;
    let report = json!({
        "command": "chsh",
        "objective": cert.value,
        "objective_17": float17(cert.value),
        "epsilon": epsilon,
        "queries_ruled_out": cert.queries,
        "certificate": out.display().to_string(),
        "membership": membership,
        "moment_equations": moment_table(&wit),
    });
    emit(&report, format);
    Ok(0)
}

// ---------------------------------------------------------------------------
// random
// ---------------------------------------------------------------------------

fn cmd_random(
    n: usize,
    seed: u64,
    epsilon: f64,
    out: Option<PathBuf>,
    format: Format,
    cap: usize,
    unsound_ok: bool,
) -> Result<u8, Error> {
    if cap > DEFAULT_ENUM_CAP && !unsound_ok {
        return Err(Error::CapExceeded { needed: cap, cap: DEFAULT_ENUM_CAP });
    }
    let f = random_cubic(n, seed)?;
    let dlt = delta(&f)?;
    let two_sq = f.two_norm_squared_parseval();
    let ratio = counterexample_ratio(&f)?;

    // The quartic witness pads one variable, so exactness needs n+1 within
    // both the session cap and the library's own enumeration cap.
    let exact = n < cap.min(DEFAULT_ENUM_CAP);
    if !exact && !unsound_ok {
        return Err(Error::CapExceeded { needed: n + 1, cap });
    }

    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("random"));
    report.insert("n".into(), json!(n));
    report.insert("seed".into(), json!(seed));
    report.insert("two_norm_squared".into(), json!(two_sq));
    report.insert("delta".into(), json!(dlt));
    report.insert("counterexample_ratio".into(), json!(ratio));

    if exact {
        let qb = quartic_lower_bound(&f)?;
        report.insert("inf_norm".into(), json!({ "value": qb.inf_norm, "exact": true }));
        report.insert("one_norm".into(), json!(qb.one_norm));
        report.insert("quartic_objective".into(), json!(qb.objective));
        if qb.objective > epsilon {
            let cert = cbnorm::certify(&qb.witness, epsilon, Some(seed))?;
            let path =
                out.unwrap_or_else(|| PathBuf::from(format!("random_n{n}_seed{seed}.cert.json")));
            write_file(&path, &cert.to_json())?;
            report.insert("certificate".into(), json!(path.display().to_string()));
        } else {
            report.insert("certificate".into(), Value::Null);
            report.insert(
                "note".into(),
                json!(format!(
                    "bound not positive at this scale: objective {} <= epsilon {epsilon}",
                    qb.objective
                )),
            );
        }
    } else {
        let lower = f.inf_norm_lower_bound(seed);
        report.insert(
            "inf_norm".into(),
            json!({ "value": lower, "exact": false, "label": "lower bound only" }),
        );
        report.insert("quartic_objective".into(), Value::Null);
        report.insert(
            "note".into(),
            json!("instance above the exact-enumeration cap; sampled norms are lower bounds and no witness is built"),
        );
    }
    emit(&Value::Object(report), format);
    Ok(0)
}

// ---------------------------------------------------------------------------
// explicit
// ---------------------------------------------------------------------------

fn cmd_explicit(n: usize, format: Format) -> Result<u8, Error> {
    if !cbnorm::constructions::coprime_to_six(n) {
        return Err(Error::NotCoprime { n });
    }
    let f0 = mobius(n);
    let form = ap_form(n, &f0)?;
    let u3 = gowers_u3(&f0)?;
    let dlt = delta(&form.poly)?;
    let two_sq = form.poly.two_norm_squared_parseval();
    let nonzero: f64 = f0.values().iter().map(|v| v * v).sum();
    let count = squarefree_count(n);
    let density = count as f64 / n as f64;
    let asymptotic = 6.0 / std::f64::consts::PI.powi(2);

    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("explicit"));
    report.insert("n".into(), json!(n));
    report.insert("variables".into(), json!(3 * n));
    report.insert("gowers_u3".into(), json!(u3));
    report.insert(
        "squarefree".into(),
        json!({
            "count": count,
            "density": density,
            "asymptotic_density": asymptotic,
            "gap": density - asymptotic,
        }),
    );
    report.insert("delta".into(), json!(dlt));
    report.insert("two_norm_squared".into(), json!(two_sq));
    report.insert("mobius_square_sum".into(), json!(nonzero));
    report.insert("counterexample_ratio".into(), json!(counterexample_ratio(&form.poly)?));
    let vn = check_von_neumann(n, &f0)?;
    report.insert("von_neumann".into(), serde_json::to_value(&vn)?);
    emit(&Value::Object(report), format);
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(path: &Path, format: Format) -> Result<u8, Error> {
    let text = read_file(path)?;
    let cert = Certificate::from_json(&text)?;
    let rv = cert.reverify()?;
    let mut report = serde_json::to_value(&rv)?;
    if let Value::Object(map) = &mut report {
        map.insert("command".into(), json!("verify"));
        map.insert("path".into(), json!(path.display().to_string()));
        map.insert("stored_value".into(), json!(cert.value));
        map.insert("stored_value_17".into(), json!(float17(cert.value)));
        map.insert("recomputed_value_17".into(), json!(float17(rv.recomputed_value)));
        map.insert("epsilon".into(), json!(cert.epsilon));
        map.insert("queries_ruled_out".into(), json!(cert.queries));
    }
    emit(&report, format);
    Ok(if rv.pass { 0 } else { EXIT_VERIFY })
}

// ---------------------------------------------------------------------------
// gowers
// ---------------------------------------------------------------------------

fn cmd_gowers(n: Option<usize>, input: Option<PathBuf>, format: Format) -> Result<u8, Error> {
    let (g, source) = match (&input, n) {
        (Some(path), _) => (ZnFunction::from_json(&read_file(path)?)?, path.display().to_string()),
        (None, Some(n)) => (mobius(n), format!("mobius({n})")),
        (None, None) => {
            return Err(Error::BadCertificate("pass --n or --input".into()));
        }
    };
    let u3 = gowers_u3(&g)?;
    let report = json!({
        "command": "gowers",
        "n": g.modulus(),
        "source": source,
        "bounded": g.is_bounded(),
        "gowers_u3": u3,
    });
    emit(&report, format);
    Ok(0)
}

// ---------------------------------------------------------------------------
// reduce
// ---------------------------------------------------------------------------

fn cmd_reduce(input: &Path, out: Option<PathBuf>, format: Format) -> Result<u8, Error> {
    let raw = RawPoly::from_json(&read_file(input)?)?;
    let reduced = raw.multilinear_reduce();
    if let Some(path) = &out {
        write_file(path, &reduced.to_json())?;
    }
    let report = json!({
        "command": "reduce",
        "n": reduced.n(),
        "input_terms": raw.terms().len(),
        "reduced_monomials": reduced.support_len(),
        "is_zero": reduced.is_zero(),
        "reduced": serde_json::from_str::<Value>(&reduced.to_json())?,
        "written": out.map(|p| p.display().to_string()),
    });
    emit(&report, format);
    Ok(0)
}
