//! `epicompat` command-line tool.

mod docs;
mod json;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use epicompat::{
    check_multiview, generate_cameras, perturb_set, reconstruct_multiview, set_from_cameras, verify_solution,
    AuxStrategy, Case2Options, CaseLabel, CaseSpec, CheckOptions, Classification, Error, QuadCase, TripleLabel,
    Uniqueness, Verdict,
};

use docs::InputError;
use json::Json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "epicompat", version, about = "Compatibility of fundamental matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the camera-center geometry of a set.
    Classify {
        /// Set document, or `-` for stdin.
        set: PathBuf,
    },
    /// Decide whether a set is compatible.
    Check {
        set: PathBuf,
        /// Compatibility tolerance; overrides the document's value.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value = "random")]
        aux_strategy: AuxArg,
        #[arg(long, default_value_t = 3)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build witness cameras for a compatible set.
    Reconstruct {
        set: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a compatible set from seeded synthetic cameras.
    Generate {
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the generating cameras here.
        #[arg(long)]
        cameras: Option<PathBuf>,
    },
    /// Add a seeded rank-2 perturbation to one entry.
    Perturb {
        set: PathBuf,
        /// Pair as `i,j`.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certify cameras against a set.
    Verify { cameras: PathBuf, set: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum AuxArg {
    Random,
    /// Epipolar lines of the fourth view's epipoles.
    #[value(alias = "epipolar-lines")]
    Remark49,
}

/// Exit status and the document printed on stdout.
struct Outcome {
    code: u8,
    doc: Json,
}

fn read_input(path: &Path) -> Result<String, InputError> {
    let mut text = String::new();
    let res = if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| InputError::new("IoError", format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn write_output(path: &Path, doc: &Json) -> Result<(), InputError> {
    fs::write(path, doc.render()).map_err(|e| InputError::new("IoError", format!("{}: {e}", path.display())))
}

/// Writes `doc` to `output` and returns a short receipt, or returns `doc`
/// itself for stdout.
fn emit(output: Option<&Path>, doc: Json) -> Result<Json, InputError> {
    match output {
        Some(path) => {
            write_output(path, &doc)?;
            Ok(Json::obj([("written", Json::from(path.display().to_string()))]))
        }
        None => Ok(doc),
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Compatible => 0,
        Verdict::Incompatible => 1,
        Verdict::Degenerate => 2,
    }
}

fn is_ambiguous(class: &Classification) -> bool {
    match class {
        Classification::Triple(t) => t.label == TripleLabel::Ambiguous,
        Classification::Quadruple(q) => q.case == QuadCase::Ambiguous,
        _ => false,
    }
}

fn classification(set: &epicompat::FundamentalSet, tol: &epicompat::Tolerances) -> Classification {
    match set.n() {
        2 => Classification::Pair,
        3 => Classification::Triple(epicompat::classify_triple(set, tol)),
        4 => Classification::Quadruple(epicompat::classify_quadruple(set, tol)),
        n => {
            let report = check_multiview(set, &CheckOptions::with_tolerances(*tol));
            let collinear = matches!(report.classification, Classification::Multiview { collinear: true, .. });
            Classification::Multiview { n, collinear }
        }
    }
}

/// Exit code for an error raised after the input parsed.
fn failure(e: Error) -> Outcome {
    let code = match e {
        Error::NotCompatible => 1,
        Error::MissingPair(..) | Error::NotRankTwo(..) | Error::InvalidArgument(_) => 3,
        _ => 2,
    };
    Outcome { code, doc: InputError::from(e).to_json() }
}

fn run(command: Command) -> Result<Outcome, InputError> {
    match command {
        Command::Classify { set } => {
            let (set, tol) = docs::read_set(&read_input(&set)?)?;
            let class = classification(&set, &tol);
            let code = if is_ambiguous(&class) { 2 } else { 0 };
            let doc = Json::obj([
                ("classification", docs::classification_json(&class)),
                ("n", Json::from(set.n())),
                ("version", Json::from(VERSION)),
            ]);
            Ok(Outcome { code, doc })
        }
        Command::Check { set, tol, aux_strategy, draws, seed } => {
            let (set, mut tolerances) = docs::read_set(&read_input(&set)?)?;
            if let Some(t) = tol {
                tolerances.compat = t;
                tolerances.validate()?;
            }
            if draws == 0 {
                return Err(InputError::new("InvalidArgument", "--draws must be at least 1"));
            }
            let strategy = match aux_strategy {
                AuxArg::Random => AuxStrategy::Random,
                AuxArg::Remark49 => AuxStrategy::EpipolarLines,
            };
            let opts = CheckOptions { tolerances, case2: Case2Options { strategy, draws, seed } };
            let report = check_multiview(&set, &opts);
            Ok(Outcome { code: verdict_code(report.verdict), doc: docs::report_json(&report) })
        }
        Command::Reconstruct { set, output } => {
            let (set, tol) = docs::read_set(&read_input(&set)?)?;
            let sol = match reconstruct_multiview(&set, &tol) {
                Ok(sol) => sol,
                Err(e) => return Ok(failure(e)),
            };
            let Json::Obj(mut doc) = docs::cameras_json(&sol.cameras) else { unreachable!("cameras_json is an object") };
            let uniqueness = match sol.uniqueness {
                Uniqueness::Unique => "Unique",
                Uniqueness::Family => "Family",
            };
            doc.insert("certificate".into(), docs::certificate_json(&sol.certificate));
            doc.insert("diagnostics".into(), Json::Obj(sol.diagnostics.into_iter().map(|(k, v)| (k, Json::Num(v))).collect()));
            doc.insert("uniqueness".into(), Json::from(uniqueness));
            doc.insert("version".into(), Json::from(VERSION));
            let receipt = Json::obj([
                ("certificate", docs::certificate_json(&sol.certificate)),
                ("uniqueness", Json::from(uniqueness)),
            ]);
            let doc = Json::Obj(doc);
            match output {
                Some(path) => {
                    write_output(&path, &doc)?;
                    Ok(Outcome { code: 0, doc: receipt })
                }
                None => Ok(Outcome { code: 0, doc }),
            }
        }
        Command::Generate { case, n, seed, output, cameras } => {
            let spec = CaseSpec::new(case.parse::<CaseLabel>()?, n, seed);
            spec.validate()?;
            let cams = generate_cameras(&spec)?;
            let set = set_from_cameras(&cams)?;
            if let Some(path) = cameras {
                write_output(&path, &docs::cameras_json(&cams))?;
            }
            Ok(Outcome { code: 0, doc: emit(output.as_deref(), docs::set_json(&set))? })
        }
        Command::Perturb { set, pair, eps, seed, output } => {
            let (set, _) = docs::read_set(&read_input(&set)?)?;
            let pair = parse_pair(&pair, set.n())?;
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(InputError::new("InvalidArgument", "--eps must be a finite non-negative number"));
            }
            let out = perturb_set(&set, pair, eps, seed)?;
            Ok(Outcome { code: 0, doc: emit(output.as_deref(), docs::set_json(&out))? })
        }
        Command::Verify { cameras, set } => {
            let cams = docs::read_cameras(&read_input(&cameras)?)?;
            let (set, tol) = docs::read_set(&read_input(&set)?)?;
            if cams.len() != set.n() {
                return Err(InputError::new(
                    "InvalidArgument",
                    format!("{} cameras for {} views", cams.len(), set.n()),
                ));
            }
            match verify_solution(&cams, &set, &tol) {
                Ok(cert) => Ok(Outcome { code: if cert.passed { 0 } else { 1 }, doc: docs::certificate_json(&cert) }),
                Err(e) => Ok(failure(e)),
            }
        }
    }
}

fn parse_pair(text: &str, n: usize) -> Result<(usize, usize), InputError> {
    let bad = || InputError::new("InvalidArgument", format!("--pair must be i,j with 1 <= i < j <= {n}"));
    let (i, j) = text.split_once(',').ok_or_else(bad)?;
    let (i, j): (usize, usize) = (i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?);
    if 1 <= i && i < j && j <= n {
        Ok((i, j))
    } else {
        Err(bad())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            let doc = InputError::new("UsageError", e.kind().to_string()).to_json();
            let _ = io::stdout().lock().write_all(doc.render().as_bytes());
            return ExitCode::from(3);
        }
    };
    let outcome = run(cli.command).unwrap_or_else(|e| Outcome { code: 3, doc: e.to_json() });
    let mut stdout = io::stdout().lock();
    // a closed pipe is not worth a panic
    let _ = stdout.write_all(outcome.doc.render().as_bytes());
    ExitCode::from(outcome.code)
}
