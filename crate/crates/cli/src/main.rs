//! projsem - project, extract, compare, and fuzz instruction-sequence
//! programs across the supported notations.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use projsem_core::difftest::{run_difftest, DiffConfig, DiffReport, Sabotage};
use projsem_core::text::{parse_pga, parse_program, parse_spec, ParseError, SpecFormat};
use projsem_core::{
    extract_behavior, normalize, pglc_to_pga, pglcij_to_pglc, pgld_to_pglc, pglddij_to_pgldij,
    pgldij_to_pgld, pgldrj_to_pgld, solve_spec, unfold_trace, AnyProgram, EnvParams, Notation,
    ThreadGraph,
};

#[derive(Parser)]
#[command(name = "projsem", version, about = "Projection semantics toolchain for instruction sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the one-step projection of a program (with --all, the whole
    /// chain down to the PGA canonical form)
    Project {
        #[command(flatten)]
        env: EnvOpts,
        /// Input notation
        #[arg(long, value_enum)]
        notation: InputKind,
        /// Print every stage of the projection chain
        #[arg(long)]
        all: bool,
        /// Program file, or `-` for standard input
        #[arg(value_name = "INPUT")]
        input: String,
    },
    /// Print the behaviour of a program as a recursive specification
    Behave {
        #[command(flatten)]
        env: EnvOpts,
        #[arg(long, value_enum)]
        notation: InputKind,
        /// Output format
        #[arg(long, value_enum, default_value_t = FormatOpt::Text)]
        format: FormatOpt,
        #[arg(value_name = "INPUT")]
        input: String,
    },
    /// Decide whether two programs have bisimilar behaviours
    Equiv {
        #[command(flatten)]
        env: EnvOpts,
        /// Input notation; pass twice to compare across notations
        #[arg(long = "notation", value_enum, num_args = 1, action = clap::ArgAction::Append)]
        notations: Vec<InputKind>,
        #[arg(value_name = "INPUT1")]
        input1: String,
        #[arg(value_name = "INPUT2")]
        input2: String,
    },
    /// Generate programs and check the projection chain against the direct
    /// interpreter
    Difftest {
        #[command(flatten)]
        env: EnvOpts,
        #[arg(long, value_enum)]
        notation: InputKind,
        /// Number of programs to generate
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// Largest program length to generate
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Seed for reproducible generation
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Walk a behaviour along a reply sequence and print the visible actions
    Trace {
        #[command(flatten)]
        env: EnvOpts,
        #[arg(long, value_enum)]
        notation: InputKind,
        /// Replies as a string over `t` and `f`
        #[arg(long, default_value = "")]
        replies: String,
        #[arg(value_name = "INPUT")]
        input: String,
    },
}

#[derive(Args)]
struct EnvOpts {
    /// Number of registers
    #[arg(long, default_value_t = 3)]
    maxr: u64,
    /// Greatest storable natural number
    #[arg(long, default_value_t = 8)]
    maxn: u64,
    /// Greatest stack length
    #[arg(long, default_value_t = 4)]
    maxs: u64,
}

impl EnvOpts {
    fn params(&self) -> Result<EnvParams, CliError> {
        EnvParams::new(self.maxr, self.maxn, self.maxs)
            .map_err(|e| CliError::usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputKind {
    Pga,
    Pglc,
    Pgld,
    Pgldij,
    Pglcij,
    Pglddij,
    Pgldrj,
    /// A recursive specification in the equation format
    Spec,
}

impl InputKind {
    fn notation(self) -> Option<Notation> {
        match self {
            InputKind::Pglc => Some(Notation::Pglc),
            InputKind::Pgld => Some(Notation::Pgld),
            InputKind::Pgldij => Some(Notation::Pgldij),
            InputKind::Pglcij => Some(Notation::Pglcij),
            InputKind::Pglddij => Some(Notation::Pglddij),
            InputKind::Pgldrj => Some(Notation::Pgldrj),
            InputKind::Pga | InputKind::Spec => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatOpt {
    Text,
    Eqns,
}

impl FormatOpt {
    fn spec_format(self) -> SpecFormat {
        match self {
            FormatOpt::Text => SpecFormat::Text,
            FormatOpt::Eqns => SpecFormat::Eqns,
        }
    }
}

/// Exit discipline: 0 success, 1 negative semantic verdict, 2 usage or parse
/// problems.
struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), code: 2 }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

/// The behaviour graph of any accepted input kind.
fn behaviour_of(kind: InputKind, src: &str, env: &EnvParams) -> Result<ThreadGraph, CliError> {
    match kind {
        InputKind::Pga => {
            let term = parse_pga(src)?;
            Ok(extract_behavior(&normalize(&term)))
        }
        InputKind::Spec => {
            let (spec, start) = parse_spec(src)?;
            solve_spec(&spec, &start).map_err(|e| CliError::usage(e.to_string()))
        }
        _ => {
            let notation = kind.notation().expect("handled above");
            let program = parse_program(notation, src, env)?;
            Ok(program.behavior(env))
        }
    }
}

fn cmd_project(env: &EnvOpts, kind: InputKind, all: bool, input: &str) -> Result<u8, CliError> {
    let env = env.params()?;
    let src = read_input(input)?;

    let mut stages: Vec<String> = Vec::new();
    match kind {
        InputKind::Spec => {
            return Err(CliError::usage("a specification cannot be projected"));
        }
        InputKind::Pga => {
            let term = parse_pga(&src)?;
            stages.push(normalize(&term).to_string());
        }
        _ => {
            let notation = kind.notation().expect("handled above");
            match parse_program(notation, &src, &env)? {
                AnyProgram::Pglc(p) => {
                    stages.push(normalize(&pglc_to_pga(&p)).to_string());
                }
                AnyProgram::Pgld(p) => {
                    let pglc = pgld_to_pglc(&p);
                    stages.push(pglc.to_string());
                    if all {
                        stages.push(normalize(&pglc_to_pga(&pglc)).to_string());
                    }
                }
                AnyProgram::Pgldij(p) => {
                    let pgld = pgldij_to_pgld(&p, &env);
                    stages.push(pgld.to_string());
                    if all {
                        let pglc = pgld_to_pglc(&pgld);
                        stages.push(pglc.to_string());
                        stages.push(normalize(&pglc_to_pga(&pglc)).to_string());
                    }
                }
                AnyProgram::Pglcij(p) => {
                    let pglc = pglcij_to_pglc(&p, &env);
                    stages.push(pglc.to_string());
                    if all {
                        stages.push(normalize(&pglc_to_pga(&pglc)).to_string());
                    }
                }
                AnyProgram::Pglddij(p) => {
                    let pgldij = pglddij_to_pgldij(&p, &env);
                    stages.push(pgldij.to_string());
                    if all {
                        let pgld = pgldij_to_pgld(&pgldij, &env);
                        stages.push(pgld.to_string());
                        let pglc = pgld_to_pglc(&pgld);
                        stages.push(pglc.to_string());
                        stages.push(normalize(&pglc_to_pga(&pglc)).to_string());
                    }
                }
                AnyProgram::Pgldrj(p) => {
                    let pgld = pgldrj_to_pgld(&p, &env);
                    stages.push(pgld.to_string());
                    if all {
                        let pglc = pgld_to_pglc(&pgld);
                        stages.push(pglc.to_string());
                        stages.push(normalize(&pglc_to_pga(&pglc)).to_string());
                    }
                }
            }
        }
    }
    for stage in stages {
        println!("{stage}");
    }
    Ok(0)
}

fn cmd_behave(
    env: &EnvOpts,
    kind: InputKind,
    format: FormatOpt,
    input: &str,
) -> Result<u8, CliError> {
    let env_params = env.params()?;
    let src = read_input(input)?;
    let graph = behaviour_of(kind, &src, &env_params)?;
    print!("{}", format.spec_format().render(&graph.to_spec()));
    Ok(0)
}

fn cmd_equiv(
    env: &EnvOpts,
    kinds: &[InputKind],
    input1: &str,
    input2: &str,
) -> Result<u8, CliError> {
    let env_params = env.params()?;
    let (kind1, kind2) = match kinds {
        [one] => (*one, *one),
        [one, two] => (*one, *two),
        _ => return Err(CliError::usage("pass --notation once or twice")),
    };
    let left = behaviour_of(kind1, &read_input(input1)?, &env_params)?;
    let right = behaviour_of(kind2, &read_input(input2)?, &env_params)?;
    match projsem_core::distinguish(&left, &right) {
        None => {
            println!("equivalent");
            Ok(0)
        }
        Some(witness) => {
            println!("inequivalent");
            let replies: String = if witness.replies.is_empty() {
                "(empty)".to_string()
            } else {
                witness.replies.iter().map(|&r| if r { 't' } else { 'f' }).collect()
            };
            println!("witness replies: {replies}");
            println!("after replies: {} vs {}", witness.left, witness.right);
            Ok(1)
        }
    }
}

fn cmd_difftest(
    env: &EnvOpts,
    kind: InputKind,
    count: u64,
    max_len: usize,
    seed: u64,
) -> Result<u8, CliError> {
    let env_params = env.params()?;
    let notation = kind
        .notation()
        .ok_or_else(|| CliError::usage("difftest needs one of the six program notations"))?;
    if max_len < 1 {
        return Err(CliError::usage("--max-len must be at least 1"));
    }
    let mut cfg = DiffConfig::new(notation, count, max_len, env_params, seed);
    // harness self-test hook: deliberately misplace the pgldij search blocks
    if std::env::var_os("PROJSEM_SABOTAGE").is_some_and(|v| !v.is_empty()) {
        cfg.sabotage = Some(Sabotage::PgldijBlockStart);
    }
    let report = run_difftest(&cfg);
    print_report(&report);
    Ok(if report.all_passed() { 0 } else { 1 })
}

fn print_report(report: &DiffReport) {
    if report.all_passed() {
        println!("{}/{} ok", report.passed, report.total);
        return;
    }
    println!("{}/{} failed", report.total - report.passed, report.total);
    if let Some(failure) = &report.first_failure {
        println!(
            "case {} (seed {}, maxr={} maxn={} maxs={})",
            failure.index, failure.case_seed, failure.env.maxr, failure.env.maxn, failure.env.maxs
        );
        println!("program: {}", failure.program);
        println!("oracle:");
        print!("{}", failure.oracle_spec);
        println!("chain:");
        print!("{}", failure.chain_spec);
    }
}

fn cmd_trace(env: &EnvOpts, kind: InputKind, replies: &str, input: &str) -> Result<u8, CliError> {
    let env_params = env.params()?;
    let parsed_replies: Vec<bool> = replies
        .chars()
        .map(|c| match c {
            't' => Ok(true),
            'f' => Ok(false),
            other => Err(CliError::usage(format!(
                "replies must be a string over `t` and `f`, found `{other}`"
            ))),
        })
        .collect::<Result<_, _>>()?;
    let graph = behaviour_of(kind, &read_input(input)?, &env_params)?;
    let (actions, end) = unfold_trace(&graph, &parsed_replies);
    for action in actions {
        println!("{action}");
    }
    println!("{end}");
    Ok(0)
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Project { env, notation, all, input } => cmd_project(env, *notation, *all, input),
        Command::Behave { env, notation, format, input } => {
            cmd_behave(env, *notation, *format, input)
        }
        Command::Equiv { env, notations, input1, input2 } => {
            cmd_equiv(env, notations, input1, input2)
        }
        Command::Difftest { env, notation, count, max_len, seed } => {
            cmd_difftest(env, *notation, *count, *max_len, *seed)
        }
        Command::Trace { env, notation, replies, input } => {
            cmd_trace(env, *notation, replies, input)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
