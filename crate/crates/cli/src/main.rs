//! `fano-e7`: evaluate hyperdeterminants and the quartic invariant of
//! seven-qubit states, classify charge configurations and run the checks.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 failed check.

mod state_file;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fano_e7::fano::{incidence_report, octonion_report, qutrit_embedding_counts};
use fano_e7::group::run_invariance_checks;
use fano_e7::invariant::{classify_with, rebit_class, DEFAULT_ZERO_TOL};
use fano_e7::{
    cayley_det, entropy, i4_eigen, i4_fano, i4_n4, rng, tangle3, Complex64, Hypermatrix, Line,
    N4State, NormalForm, Qubit, SevenQubitState, TermCatalog,
};

use state_file::StateFile;

#[derive(Debug, Parser)]
#[command(
    name = "fano-e7",
    version,
    about = "Seven-qubit Fano-plane entanglement and the E7 quartic invariant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hyperdeterminant, 3-tangle and rebit class of one line.
    Det {
        file: String,
        #[arg(long, default_value = "ABD")]
        line: String,
    },
    /// Quartic invariant and 7-tangle of a state file.
    I4 { file: String },
    /// Large BPS, large non-BPS or small, with the BPS fraction when small.
    Classify {
        #[command(flatten)]
        input: Input,
        /// Zero threshold relative to scale⁴.
        #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
        zero_tol: f64,
    },
    /// Entropy π√|I₄|.
    Entropy {
        #[command(flatten)]
        input: Input,
    },
    /// Run a verification suite.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Deterministic random state file on standard output.
    Random {
        /// Comma-separated line names.
        #[arg(long, default_value = "ABD,BCE,CDF,DEG,EFA,FGB,GAC")]
        lines: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        normalize: bool,
    },
}

#[derive(Debug, Args)]
struct Input {
    /// State file.
    #[arg(required_unless_present = "rho", conflicts_with = "rho")]
    file: Option<String>,
    /// Normal-form moduli ρ₁,ρ₂,ρ₃,ρ₄.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    rho: Option<Vec<f64>>,
    /// Normal-form phase.
    #[arg(long, requires = "rho", allow_negative_numbers = true)]
    phi: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Fano,
    Octonion,
    Invariance,
    Oracles,
    Counts,
}

enum Failure {
    Input(String),
    Check(String),
}

type Outcome = Result<(), Failure>;

fn input_err<E: ToString>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

/// Shortest representation that parses back to the same double; `-0` prints
/// as `0`, very small or large magnitudes in exponent form.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.abs() < 1e-4 || x.abs() >= 1e16 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn cnum(z: Complex64) -> String {
    format!("{},{}", num(z.re), num(z.im))
}

fn load(path: &str) -> Result<SevenQubitState, Failure> {
    StateFile::read(path)
        .and_then(|f| f.to_state())
        .map_err(Failure::Input)
}

/// What a classify or entropy command evaluates.
enum Evaluated {
    State { i4: Complex64, scale: f64 },
    Normal { i4: f64, nf: NormalForm },
}

fn evaluate(input: &Input) -> Result<Evaluated, Failure> {
    if let Some(path) = &input.file {
        let psi = load(path)?;
        return Ok(Evaluated::State {
            i4: i4_fano(&psi),
            scale: psi.scale(),
        });
    }
    let rho = input.rho.as_deref().expect("clap enforces one input");
    let rho: [f64; 4] = rho
        .try_into()
        .map_err(|_| input_err("--rho takes four values"))?;
    let nf = NormalForm::new(rho, input.phi.unwrap_or(0.0)).map_err(input_err)?;
    let i4 = i4_eigen(&nf).map_err(|e| Failure::Check(e.to_string()))?;
    Ok(Evaluated::Normal { i4, nf })
}

fn cmd_det(file: &str, line: &str) -> Outcome {
    let line: Line = line.parse().map_err(input_err)?;
    let psi = load(file)?;
    let a = psi.line(line);
    let mut out = format!("det={} tangle3={}", cnum(cayley_det(a)), num(tangle3(a)));
    if let Ok(class) = rebit_class(a) {
        out.push_str(&format!(" class={}", class.label()));
    }
    println!("{out}");
    Ok(())
}

fn cmd_i4(file: &str) -> Outcome {
    let psi = load(file)?;
    let i4 = i4_fano(&psi);
    println!("i4={} tangle7={}", cnum(i4), num(4.0 * i4.norm()));
    Ok(())
}

/// Largest tolerated imaginary part of I₄ for classification, relative to scale⁴.
const IMAG_TOL: f64 = 1e-12;

fn cmd_classify(input: &Input, zero_tol: f64) -> Outcome {
    if !(zero_tol.is_finite() && zero_tol >= 0.0) {
        return Err(input_err("--zero-tol must be finite and non-negative"));
    }
    let (head, i4, scale, nf) = match evaluate(input)? {
        Evaluated::State { i4, scale } => {
            if i4.im.abs() > IMAG_TOL * scale.powi(4) {
                return Err(Failure::Input(format!(
                    "ImagTooLarge: Im I4 = {}",
                    num(i4.im)
                )));
            }
            (format!("i4={}", cnum(i4)), i4.re, scale, None)
        }
        Evaluated::Normal { i4, nf } => (format!("i4={}", num(i4)), i4, nf.scale(), Some(nf)),
    };
    let c = classify_with(i4, scale, nf.as_ref(), zero_tol);
    let mut out = format!(
        "zero_tol={} {head} tangle7={} kind={}",
        num(zero_tol),
        num(4.0 * i4.abs()),
        c.kind.label()
    );
    if let Some(bps) = c.bps {
        out.push_str(&format!(" bps={}", bps.label()));
    }
    println!("{out}");
    Ok(())
}

fn cmd_entropy(input: &Input) -> Outcome {
    let magnitude = match evaluate(input)? {
        Evaluated::State { i4, .. } => i4.norm(),
        Evaluated::Normal { i4, .. } => i4,
    };
    println!("S={}", num(entropy(magnitude)));
    Ok(())
}

fn verdict(ok: bool, what: &str) -> Outcome {
    println!("status={}", if ok { "pass" } else { "fail" });
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(what.into()))
    }
}

fn suite_fano() -> Outcome {
    let r = incidence_report().map_err(|e| Failure::Check(e.to_string()))?;
    let checks = [
        ("line_pairs_meeting_once", r.line_pairs_meeting_once == 21),
        ("lines_per_point", r.lines_per_point == [3; 7]),
        ("exclusions_per_point", r.exclusions_per_point == [4; 7]),
        ("pair_exclusions", r.pair_exclusions == (2, 2)),
        (
            "collinear_triple_exclusions",
            r.collinear_triple_exclusions == 0,
        ),
    ];
    println!("line_pairs_meeting_once={}", r.line_pairs_meeting_once);
    println!("lines_per_point={:?}", r.lines_per_point);
    println!("exclusions_per_point={:?}", r.exclusions_per_point);
    println!(
        "pair_exclusions={},{}",
        r.pair_exclusions.0, r.pair_exclusions.1
    );
    println!(
        "collinear_triple_exclusions={}",
        r.collinear_triple_exclusions
    );
    println!(
        "noncollinear_triple_exclusions={} over {} triples (property4_discrepancy={})",
        r.noncollinear_triple_exclusions,
        r.noncollinear_triples,
        r.property_four_discrepancy()
    );
    let failed = checks.iter().find(|c| !c.1).map(|c| c.0);
    verdict(failed.is_none(), failed.unwrap_or(""))
}

fn suite_octonion() -> Outcome {
    match octonion_report() {
        Ok(r) => {
            println!("line_relations={}", r.line_relations);
            println!("antisymmetric_entries={}", r.antisymmetric_entries);
            println!("signed_permutation_lines={}", r.signed_permutation_lines);
            verdict(true, "")
        }
        Err(e) => {
            println!("error={e}");
            verdict(false, &e.to_string())
        }
    }
}

fn suite_invariance(seed: u64, samples: usize, tol: f64) -> Outcome {
    let report =
        run_invariance_checks(TermCatalog::canonical(), seed, samples, tol).map_err(input_err)?;
    println!("{report}");
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::Check(format!(
            "sample={} check={} residual={:e}",
            c.sample, c.kind, c.residual
        ))),
    }
}

fn suite_oracles(seed: u64, samples: usize, tol: f64) -> Outcome {
    let mut first_failure = None;
    let mut report = |name: String, residual: f64| {
        let ok = residual <= tol;
        println!(
            "check={name} max_residual={residual:e} status={}",
            if ok { "pass" } else { "fail" }
        );
        if !ok && first_failure.is_none() {
            first_failure = Some(name);
        }
    };
    for line in Line::ALL {
        let worst = (0..samples)
            .map(|n| {
                let a = Hypermatrix::random(
                    &mut rng::stream(seed, (line.index() * samples + n) as u64),
                    1.0,
                );
                let psi = SevenQubitState::single(line, a);
                (i4_fano(&psi) + cayley_det(&a)).norm() / a.scale().powi(4)
            })
            .fold(0.0, f64::max);
        report(format!("single-line:{line}"), worst);
    }
    for apex in Qubit::ALL {
        let base = ((7 + apex.index()) * samples) as u64;
        let worst = (0..samples)
            .map(|n| {
                let mut r = rng::stream(seed, base + n as u64);
                let psi = SevenQubitState::random(&mut r, &Line::through(apex), 1.0);
                let s = N4State::from_state(&psi, apex).expect("supported on the apex lines");
                (i4_fano(&psi) - i4_n4(&s)).norm() / psi.scale().powi(4)
            })
            .fold(0.0, f64::max);
        report(format!("three-line:{apex}"), worst);
    }
    match first_failure {
        None => verdict(true, ""),
        Some(name) => verdict(false, &name),
    }
}

fn suite_counts() -> Outcome {
    let c = qutrit_embedding_counts();
    let mult: Vec<String> = c
        .strata
        .iter()
        .map(|s| s.multiplicity.to_string())
        .collect();
    println!(
        "multiplicities={} total={}",
        mult.join(","),
        c.total_dimension
    );
    println!(
        "lines_in_three_doublet_stratum={}",
        c.lines_in_three_doublet_stratum
    );
    println!(
        "listed_patterns_match_lines={}",
        c.listed_patterns_match_lines
    );
    let ok = mult.join(",") == "1,7,21,35,35,21,7,1"
        && c.total_dimension == 2187
        && c.lines_in_three_doublet_stratum
        && c.listed_patterns_match_lines;
    verdict(ok, "counts")
}

fn cmd_check(suite: Suite, seed: u64, samples: usize, tol: f64) -> Outcome {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(input_err("--tol must be finite and non-negative"));
    }
    match suite {
        Suite::Fano => suite_fano(),
        Suite::Octonion => suite_octonion(),
        Suite::Invariance => suite_invariance(seed, samples, tol),
        Suite::Oracles => suite_oracles(seed, samples, tol),
        Suite::Counts => suite_counts(),
    }
}

fn cmd_random(lines: &str, seed: u64, normalize: bool) -> Outcome {
    let lines: Vec<Line> = lines
        .split(',')
        .map(|s| s.trim().parse::<Line>().map_err(input_err))
        .collect::<Result<_, _>>()?;
    let mut psi = SevenQubitState::random(&mut rng::stream(seed, 0), &lines, 1.0);
    if normalize {
        psi = psi.normalize().map_err(input_err)?;
    }
    println!("{}", StateFile::from_state(&psi).to_json());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Det { file, line } => cmd_det(file, line),
        Command::I4 { file } => cmd_i4(file),
        Command::Classify { input, zero_tol } => cmd_classify(input, *zero_tol),
        Command::Entropy { input } => cmd_entropy(input),
        Command::Check {
            suite,
            seed,
            samples,
            tol,
        } => cmd_check(*suite, *seed, *samples, *tol),
        Command::Random {
            lines,
            seed,
            normalize,
        } => cmd_random(lines, *seed, *normalize),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
