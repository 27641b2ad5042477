use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cyclic_order::conics::{classify_point, Case, ProjPoint, Stratum};
use cyclic_order::fibers::{self, fiber, marked_fiber_geometric, FiberPoint, MarkedFiber, PointKind, SurveyReport};
use cyclic_order::verify::{run_verification, Fixture, FixtureError};

const EXIT_PASS: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "cyclic-order", version, about = "Classify dual-plane points, count fibers, and verify the fixture")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and emit a report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Include wall-clock time in the report (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Stratum of a dual-plane point.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point)]
        point: ProjPoint,
    },
    /// List the fiber over a point or a stratum.
    Fiber {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point, conflicts_with = "stratum", required_unless_present = "stratum")]
        point: Option<ProjPoint>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        stratum: Option<u8>,
    },
    /// Classify seeded random points and histogram the fiber sizes.
    Survey {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Defaults to the fixture's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Survey the special points (6 + 4 + 4 + 4) instead of random ones.
        #[arg(long)]
        include_strata: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Fixture JSON; the bundled fixture when omitted.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Write output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Md,
}

fn parse_point(s: &str) -> Result<ProjPoint, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected a,b,c, got `{s}`"));
    }
    let v: Vec<i64> = parts.iter().map(|p| p.parse::<i64>().map_err(|e| format!("`{p}`: {e}"))).collect::<Result<_, _>>()?;
    ProjPoint::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Degenerate(String),
}

impl From<FixtureError> for Failure {
    fn from(e: FixtureError) -> Self {
        if e.is_degenerate() {
            Failure::Degenerate(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn load(common: &Common) -> Result<Fixture, Failure> {
    Ok(match &common.fixture {
        Some(p) => Fixture::load(p)?,
        None => Fixture::bundled(),
    })
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    point: &'a ProjPoint,
    #[serde(flatten)]
    stratum: &'a Stratum,
    fiber_size: usize,
}

#[derive(Serialize)]
struct FiberRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<&'a ProjPoint>,
    case: Case,
    marked_fiber: &'a MarkedFiber,
    points: &'a [FiberPoint],
    total_ram_index: u32,
}

fn kind_label(k: &PointKind) -> String {
    match k {
        PointKind::StructurePlus(c) => format!("+ {c}"),
        PointKind::StructureMinus(c) => format!("- {c}"),
        PointKind::ExtraF => "A⊗O_F".to_string(),
        PointKind::ExtraFPrime => "A⊗O_F'".to_string(),
    }
}

fn survey_markdown(r: &SurveyReport) -> String {
    let mut s = String::from("# Survey\n\n");
    let _ = writeln!(s, "- samples: {}\n- seed: {} ({})\n", r.samples, r.seed, r.generator);
    s.push_str("| case | points | fiber sizes |\n|---|---|---|\n");
    for (case, n) in &r.histogram {
        let _ = writeln!(s, "| {case} | {n} | {:?} |", r.fiber_sizes.get(case).cloned().unwrap_or_default());
    }
    let _ = writeln!(s, "\nmismatches: {}, unclassified: {}", r.mismatches.len(), r.unclassified.len());
    s
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Verify { common, timing } => {
            let fx = load(&common)?;
            let report = run_verification(&fx, timing);
            let text = match common.format {
                Format::Json => report.to_json(),
                Format::Md => report.to_markdown(),
            };
            emit(&common, &text)?;
            for f in report.failures() {
                eprintln!("FAIL {}: expected {}, got {}", f.name, f.expected, f.actual);
            }
            Ok(if report.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Classify { common, point } => {
            let fx = load(&common)?;
            let s = classify_point(&point, &fx.pair).map_err(|e| Failure::Input(e.to_string()))?;
            let f = marked_fiber_geometric(&point, &fx.pair).map_err(|e| Failure::Input(e.to_string()))?;
            let size = fiber(&f, &s).len();
            let text = match common.format {
                Format::Json => json(&ClassifyRecord { point: &point, stratum: &s, fiber_size: size }),
                Format::Md => format!(
                    "point {point}: {}\n  tangent to E: {}\n  tangent to E': {}\n  base points on line: {:?}\n  fiber size: {size}\n",
                    s.case, s.tangent_e, s.tangent_e_prime, s.base_points_on_line
                ),
            };
            emit(&common, &text)?;
            Ok(EXIT_PASS)
        }
        Command::Fiber { common, point, stratum } => {
            let fx = load(&common)?;
            let (s, f) = match (&point, stratum) {
                (Some(p), _) => {
                    let s = classify_point(p, &fx.pair).map_err(|e| Failure::Input(e.to_string()))?;
                    let f = marked_fiber_geometric(p, &fx.pair).map_err(|e| Failure::Input(e.to_string()))?;
                    (s, f)
                }
                (None, Some(n)) => {
                    let case = Case::from_number(n).ok_or_else(|| Failure::Input(format!("no stratum {n}")))?;
                    let s = Stratum::canonical(case);
                    let f = fibers::marked_fiber_of_stratum(&s);
                    (s, f)
                }
                (None, None) => return Err(Failure::Input("need --point or --stratum".into())),
            };
            let pts = fiber(&f, &s);
            let total: u32 = pts.iter().map(|p| p.ram_index).sum();
            let text = match common.format {
                Format::Json => json(&FiberRecord {
                    point: point.as_ref(),
                    case: s.case,
                    marked_fiber: &f,
                    points: &pts,
                    total_ram_index: total,
                }),
                Format::Md => {
                    let mut t = format!("{}: {} points\n\n| branch | kind | e |\n|---|---|---|\n", s.case, pts.len());
                    for p in &pts {
                        let _ = writeln!(t, "| {} | {} | {} |", p.branch_label, kind_label(&p.kind), p.ram_index);
                    }
                    let _ = writeln!(t, "\nΣe = {total}");
                    t
                }
            };
            emit(&common, &text)?;
            Ok(if total == fibers::DEGREE { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Survey { common, samples, seed, include_strata } => {
            let fx = load(&common)?;
            let report = if include_strata {
                fibers::survey_special(&fx.pair)
            } else {
                fibers::survey(&fx.pair, samples, seed.unwrap_or_else(|| fx.seed()))
            };
            let text = match common.format {
                Format::Json => json(&report),
                Format::Md => survey_markdown(&report),
            };
            emit(&common, &text)?;
            Ok(if report.is_clean() { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Degenerate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DEGENERATE)
        }
    }
}
