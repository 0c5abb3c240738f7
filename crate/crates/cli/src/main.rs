//! `oblivq`: build, execute and cost oblivious multiparty protocols.
//!
//! Exit status is 0 when every assertion of the command holds, 1 when an
//! assertion fails, 2 on invalid configuration and 3 when execution is
//! refused because the program needs more qubits than the cap allows.

mod table;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oblivq::functions::{Family, SymmetricSpec};
use oblivq::instances::random_instance;
use oblivq::netmodel::{derive_schedule, execute, peak_qubits, ExecOptions, ProtocolProgram, Schedule};
use oblivq::protocols::{build_for_family, AaCostModel};
use oblivq::reduction::run_reduction;
use oblivq::statevec::DEFAULT_QUBIT_CAP;
use oblivq::BitString;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use table::{Format, Table};

const QUBIT_CAP_VAR: &str = "OQCC_QUBIT_CAP";

#[derive(Parser)]
#[command(name = "oblivq", version, about = "Oblivious quantum multiparty protocol runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a protocol on seeded random instances and report error and cost.
    Run(RunArgs),
    /// Tabulate cost over a grid of sizes, from schedules or by execution.
    Scale(ScaleArgs),
    /// Merge a k-party protocol into a two-party one and check the guarantees.
    Reduce(ReduceArgs),
    /// Print the derived communication schedule as JSON.
    Schedule(ScheduleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyName {
    Disj,
    Ip,
    Equality,
    /// Predicate table read from `--spec`.
    Symmetric,
    /// Amplitude-amplification cost model; schedules only.
    Aa,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Symmetric predicate file: `n k` on the first line, the table bits on the second.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    epsilon: f64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Block side for the bounded-round DISJ split.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// One row per trial instead of the summary row.
    #[arg(long)]
    per_trial: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Schedule,
    Execute,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    ns: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    ks: Vec<usize>,
    /// Block sides for the bounded-round DISJ split; full search when absent.
    #[arg(long, value_delimiter = ',')]
    ms: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Mode::Schedule)]
    mode: Mode,
    /// Trials per cell in execute mode.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ReduceArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Refused(String),
    Io(io::Error),
}

impl From<oblivq::Error> for Failure {
    fn from(e: oblivq::Error) -> Failure {
        Failure::Config(e.to_string())
    }
}

type CmdResult = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Scale(a) => scale(a),
        Command::Reduce(a) => reduce(a),
        Command::Schedule(a) => schedule(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Refused(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(3)
        }
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn qubit_cap() -> Result<usize, Failure> {
    match std::env::var(QUBIT_CAP_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| config(format!("{QUBIT_CAP_VAR}=`{v}` is not a qubit count"))),
        Err(_) => Ok(DEFAULT_QUBIT_CAP),
    }
}

fn family(problem: &ProblemArgs) -> Result<Family, Failure> {
    let spec = match (&problem.spec, problem.family) {
        (Some(path), FamilyName::Symmetric) => {
            let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            Some(text.parse::<SymmetricSpec>()?)
        }
        (Some(_), _) => return Err(config("--spec only applies to --family symmetric")),
        (None, _) => None,
    };
    let name = match problem.family {
        FamilyName::Disj => "disj",
        FamilyName::Ip => "ip",
        FamilyName::Equality => "equality",
        FamilyName::Symmetric => "symmetric",
        FamilyName::Aa => return Err(config("aa is a cost model with no executable protocol")),
    };
    Ok(Family::from_name(name, spec)?)
}

fn check_epsilon(eps: f64) -> Result<(), Failure> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(config(format!("epsilon {eps} must lie in (0, 1/2)")))
    }
}

/// Refuses before simulating if the program's peak register footprint exceeds the cap.
fn admit(program: &ProtocolProgram, cap: usize) -> Result<(), Failure> {
    let need = peak_qubits(program)?;
    if need > cap {
        return Err(Failure::Refused(format!(
            "{} at n = {} needs {need} qubits, cap is {cap}; set {QUBIT_CAP_VAR} to raise it",
            program.name(),
            program.n()
        )));
    }
    Ok(())
}

fn emit(table: &Table, output: &OutputArgs) -> Result<(), Failure> {
    match &output.out {
        Some(path) => {
            let mut file = fs::File::create(path).map_err(Failure::Io)?;
            table.write(output.format, &mut file).map_err(Failure::Io)
        }
        None => table.write(output.format, &mut io::stdout().lock()).map_err(Failure::Io),
    }
}

struct TrialRecord {
    trial: usize,
    seed: u64,
    inputs: Vec<BitString>,
    truth: bool,
    output: Option<bool>,
    ledger_hash: String,
    matches_schedule: bool,
}

/// Seeded trials on `random_instance` inputs. Instance and execution seeds
/// come from one generator, so the whole batch is a function of `seed`.
fn trials(
    program: &ProtocolProgram,
    schedule: &Schedule,
    fam: &Family,
    k: usize,
    count: usize,
    seed: u64,
    cap: usize,
) -> Result<Vec<TrialRecord>, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(count);
    for trial in 0..count {
        let inputs = random_instance(fam, program.n(), k, &mut rng)?;
        let run_seed: u64 = rng.random();
        let truth = fam.eval(&inputs)?;
        let opts = ExecOptions { qubit_cap: cap, ..ExecOptions::seeded(run_seed) };
        let run = execute(program, &inputs, &opts)?;
        let matches_schedule = run.ledger.aggregate(schedule.topology(), schedule.n())? == *schedule;
        records.push(TrialRecord {
            trial,
            seed: run_seed,
            inputs,
            truth,
            output: run.unanimous(),
            ledger_hash: run.ledger.digest(),
            matches_schedule,
        });
    }
    Ok(records)
}

struct Tally {
    errors: usize,
    false_positives: usize,
    false_negatives: usize,
    disagreements: usize,
    oblivious: bool,
}

impl Tally {
    fn of(records: &[TrialRecord]) -> Tally {
        let mut t = Tally { errors: 0, false_positives: 0, false_negatives: 0, disagreements: 0, oblivious: true };
        for r in records {
            match r.output {
                None => t.disagreements += 1,
                Some(true) if !r.truth => t.false_positives += 1,
                Some(false) if r.truth => t.false_negatives += 1,
                _ => {}
            }
            t.oblivious &= r.matches_schedule && r.ledger_hash == records[0].ledger_hash;
        }
        t.errors = t.false_positives + t.false_negatives + t.disagreements;
        t
    }

    fn rate(&self, trials: usize) -> f64 {
        self.errors as f64 / trials as f64
    }
}

const RUN_COLUMNS: &[&str] = &[
    "protocol",
    "family",
    "n",
    "k",
    "m",
    "epsilon",
    "trials",
    "seed",
    "qcc",
    "rounds",
    "peak_qubits",
    "errors",
    "empirical_error",
    "false_positives",
    "false_negatives",
    "disagreements",
    "ledger_hash",
    "oblivious",
    "status",
];

const TRIAL_COLUMNS: &[&str] = &["trial", "seed", "inputs", "truth", "output", "correct", "ledger_hash"];

fn run(a: RunArgs) -> CmdResult {
    check_epsilon(a.problem.epsilon)?;
    if a.trials == 0 {
        return Err(config("--trials must be at least 1"));
    }
    let fam = family(&a.problem)?;
    let program = build_for_family(&fam, a.n, a.k, a.problem.epsilon, a.m)?;
    let schedule = derive_schedule(&program)?;
    let cap = qubit_cap()?;
    admit(&program, cap)?;
    let records = trials(&program, &schedule, &fam, a.k, a.trials, a.seed, cap)?;
    let tally = Tally::of(&records);
    let rate = tally.rate(a.trials);
    // DISJ errs only on intersecting inputs; Equality only on unequal ones.
    let one_sided = match fam {
        Family::Disj => tally.false_positives == 0,
        Family::Equality => tally.false_negatives == 0,
        _ => true,
    };
    let pass = rate <= a.problem.epsilon && tally.oblivious && one_sided;

    let mut table;
    if a.per_trial {
        table = Table::new(TRIAL_COLUMNS);
        for r in &records {
            let inputs: Vec<String> = r.inputs.iter().map(|x| x.to_string()).collect();
            table.push(vec![
                json!(r.trial),
                json!(r.seed.to_string()),
                json!(inputs.join("/")),
                json!(r.truth),
                r.output.map_or(Value::Null, |o| json!(o)),
                json!(r.output == Some(r.truth)),
                json!(r.ledger_hash),
            ]);
        }
    } else {
        table = Table::new(RUN_COLUMNS);
        table.push(vec![
            json!(program.name()),
            json!(fam.name()),
            json!(a.n),
            json!(a.k),
            a.m.map_or(Value::Null, |m| json!(m)),
            json!(a.problem.epsilon),
            json!(a.trials),
            json!(a.seed),
            json!(schedule.qcc()),
            json!(schedule.rounds()),
            json!(peak_qubits(&program)?),
            json!(tally.errors),
            json!(rate),
            json!(tally.false_positives),
            json!(tally.false_negatives),
            json!(tally.disagreements),
            json!(records[0].ledger_hash),
            json!(tally.oblivious),
            json!(if pass { "pass" } else { "fail" }),
        ]);
    }
    emit(&table, &a.output)?;
    Ok(pass)
}

const SCALE_COLUMNS: &[&str] = &[
    "family",
    "n",
    "k",
    "m",
    "qcc",
    "rounds",
    "qcc_over_k",
    "ratio_to_first",
    "trials",
    "empirical_error",
    "status",
];

fn scale(a: ScaleArgs) -> CmdResult {
    check_epsilon(a.problem.epsilon)?;
    let is_aa = a.problem.family == FamilyName::Aa;
    let fam = if is_aa { None } else { Some(family(&a.problem)?) };
    if is_aa && a.mode == Mode::Execute {
        return Err(config("the aa cost model has no executable protocol; use --mode schedule"));
    }
    if a.mode == Mode::Execute && a.trials == 0 {
        return Err(config("--trials must be at least 1"));
    }
    let blocks: Vec<Option<usize>> = if a.ms.is_empty() { vec![None] } else { a.ms.iter().copied().map(Some).collect() };
    let cap = qubit_cap()?;
    let mut table = Table::new(SCALE_COLUMNS);
    let mut pass = true;
    for &k in &a.ks {
        let mut first: Option<u64> = None;
        for &m in &blocks {
            for &n in &a.ns {
                let (name, schedule, program) = match &fam {
                    None => ("aa".to_string(), AaCostModel::new(n, k, 1.0)?.schedule()?, None),
                    Some(f) => {
                        let spec_fam = match f {
                            Family::Symmetric { spec } if spec.n != n || spec.k != k => {
                                return Err(config(format!("spec is for n = {}, k = {}", spec.n, spec.k)))
                            }
                            other => other.clone(),
                        };
                        let p = build_for_family(&spec_fam, n, k, a.problem.epsilon, m)?;
                        (f.name().to_string(), derive_schedule(&p)?, Some(p))
                    }
                };
                let qcc = schedule.qcc();
                let base = *first.get_or_insert(qcc);
                let (trials, error, status) = match (a.mode, &program, &fam) {
                    (Mode::Execute, Some(p), Some(f)) => {
                        admit(p, cap)?;
                        let records = trials(p, &schedule, f, k, a.trials, a.seed, cap)?;
                        let tally = Tally::of(&records);
                        let rate = tally.rate(a.trials);
                        let ok = rate <= a.problem.epsilon && tally.oblivious;
                        pass &= ok;
                        (json!(a.trials), json!(rate), if ok { "pass" } else { "fail" })
                    }
                    _ => (Value::Null, Value::Null, "schedule"),
                };
                table.push(vec![
                    json!(name),
                    json!(n),
                    json!(k),
                    m.map_or(Value::Null, |m| json!(m)),
                    json!(qcc),
                    json!(schedule.rounds()),
                    json!(qcc as f64 / k as f64),
                    json!(qcc as f64 / base as f64),
                    trials,
                    error,
                    json!(status),
                ]);
            }
        }
    }
    emit(&table, &a.output)?;
    Ok(pass)
}

const REDUCE_COLUMNS: &[&str] = &[
    "protocol",
    "family",
    "n",
    "k",
    "pivot",
    "qcc_original",
    "qcc_reduced",
    "bound_2qcc_over_k",
    "within_bound",
    "stated_qcc_over_k",
    "within_stated",
    "rounds_original",
    "rounds_reduced",
    "empirical_error",
    "trials",
    "complete",
    "status",
];

fn reduce(a: ReduceArgs) -> CmdResult {
    check_epsilon(a.problem.epsilon)?;
    let fam = family(&a.problem)?;
    let program = build_for_family(&fam, a.n, a.k, a.problem.epsilon, None)?;
    let cap = qubit_cap()?;
    if a.trials > 0 {
        admit(&program, cap)?;
    }
    let (report, reduced) = run_reduction(&fam, a.n, a.k, a.problem.epsilon, a.trials, a.seed)?;
    // Equal pairs lift to all-equal inputs, which the fingerprint test always accepts.
    let complete = match fam {
        Family::Equality if a.n <= 10 => {
            let mut all = true;
            for v in 0..1u64 << a.n {
                let x = BitString::from_u64(v, a.n);
                let run = execute(&reduced, &[x.clone(), x], &ExecOptions::seeded(a.seed.wrapping_add(v)))?;
                all &= run.unanimous() == Some(true);
            }
            Some(all)
        }
        _ => None,
    };
    let pass = report.within_bound
        && report.rounds_reduced <= report.rounds_original
        && report.empirical_error.is_none_or(|e| e <= a.problem.epsilon)
        && complete != Some(false);
    let mut table = Table::new(REDUCE_COLUMNS);
    table.push(vec![
        json!(report.protocol),
        json!(report.family),
        json!(report.n),
        json!(report.k),
        json!(report.pivot.to_string()),
        json!(report.qcc_original),
        json!(report.qcc_reduced),
        json!(report.bound_2qcc_over_k),
        json!(report.within_bound),
        json!(report.stated_qcc_over_k),
        json!(report.within_stated),
        json!(report.rounds_original),
        json!(report.rounds_reduced),
        report.empirical_error.map_or(Value::Null, |e| json!(e)),
        json!(report.trials),
        complete.map_or(Value::Null, |c| json!(c)),
        json!(if pass { "pass" } else { "fail" }),
    ]);
    emit(&table, &a.output)?;
    Ok(pass)
}

fn schedule(a: ScheduleArgs) -> CmdResult {
    let schedule = if a.problem.family == FamilyName::Aa {
        if a.m.is_some() {
            return Err(config("--m does not apply to the aa cost model"));
        }
        AaCostModel::new(a.n, a.k, 1.0)?.schedule()?
    } else {
        check_epsilon(a.problem.epsilon)?;
        let fam = family(&a.problem)?;
        derive_schedule(&build_for_family(&fam, a.n, a.k, a.problem.epsilon, a.m)?)?
    };
    let text = schedule.to_json();
    match a.out {
        Some(path) => fs::write(path, format!("{text}\n")).map_err(Failure::Io)?,
        None => writeln!(io::stdout().lock(), "{text}").map_err(Failure::Io)?,
    }
    Ok(true)
}
