//! The `learnreal` command-line driver.
//!
//! Exit codes: 0 success, 1 semantic failure (a failed proof check, a failed
//! realizability check, a wrong witness, an ill-typed input), 2 parse, usage
//! or I/O error, 3 internal error (step budget or iteration cap exhausted,
//! broken state invariant).

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use super::{parse, prelude_env, Ast, Diagnostic, ParsedProof, SourceKind};
use crate::eval::{approximate, normalize_with, EvalError, EvalOptions, Strategy, DEFAULT_STEP_CAP};
use crate::kernel::{contains_ideal_constants, subst, DefEnv, Name, Term};
use crate::learning::{
    check_converges, pi02_witness_from, realizes_at, LearnError, Verdict, WiChain, DEFAULT_DEPTH, DEFAULT_ITER_CAP,
};
use crate::logic::{Formula, Judgement};
use crate::proofs::{check_and_extract, ProofError};
use crate::states::StateId;

#[derive(Parser, Debug)]
#[command(name = "learnreal", version, about = "Learning-based realizability for HA + EM1")]
struct Cli {
    /// Do not load the built-in prelude of definitions.
    #[arg(long, global = true)]
    no_prelude: bool,
    /// Extra definition files, loaded after the prelude.
    #[arg(long = "defs", global = true, value_name = "FILE")]
    defs: Vec<PathBuf>,
    /// Kind of the main input (term, form, proof, state, defs); defaults to its extension.
    #[arg(long, global = true)]
    kind: Option<SourceKind>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a proof and print its judgement.
    Check { proof: PathBuf },
    /// Check a proof and print its extracted realizer.
    Extract {
        proof: PathBuf,
        /// Also write the realizer to this file.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Normalize a closed term. With `--state`, the variable `s` is bound to
    /// the state and ideal constants are approximated at it.
    Normalize {
        term: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value = "outermost")]
        strategy: Strategy,
        #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
        step_cap: u64,
    },
    /// Bounded check that a term realizes a closed formula at a state.
    Realizes {
        term: PathBuf,
        formula: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DEPTH)]
        depth: u64,
    },
    /// Run the learning loop on a realizer of `forall x. exists y. P(x, y)`
    /// and print the witness for the given input.
    Witness {
        input_file: PathBuf,
        #[arg(long)]
        pred: String,
        #[arg(long)]
        input: u64,
        /// Write the JSON-lines trace of the loop here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ITER_CAP)]
        iter_cap: usize,
        /// Start the loop from this state instead of the empty one.
        #[arg(long)]
        start: Option<PathBuf>,
    },
    /// Evaluate `t[s_i]` along a weakly increasing chain of states.
    Converge {
        term: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        chain: Vec<PathBuf>,
    },
}

/// A failed command: exit code plus the message for stderr.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn semantic(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }

    fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }

    fn eval(path: &Path, e: EvalError) -> Failure {
        let msg = format!("{}: error: {e}", path.display());
        match e {
            EvalError::StepBudgetExceeded(_) | EvalError::Internal(_) => Failure::internal(msg),
            EvalError::NotClosed(_) | EvalError::WrongFragment(_) | EvalError::Type(_) => Failure::semantic(msg),
        }
    }

    fn learn(path: &Path, e: LearnError) -> Failure {
        match e {
            LearnError::Eval(e) => Failure::eval(path, e),
            LearnError::IterCapExceeded(_) | LearnError::Invariant(_) => {
                Failure::internal(format!("{}: error: {e}", path.display()))
            }
            LearnError::Precondition(_) | LearnError::TypeMismatch { .. } | LearnError::CheckFailed { .. } => {
                Failure::semantic(format!("{}: error: {e}", path.display()))
            }
        }
    }
}

type CmdResult = Result<String, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = load_env(&cli).and_then(|env| dispatch(&cli, &env));
    match result {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write output: {e}");
                2
            }
        },
        Err(f) => {
            let _ = writeln!(err, "{}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: error: cannot read file: {e}", path.display())))
}

fn diag(path: &Path, d: Diagnostic) -> Failure {
    Failure::input(d.render(&path.display().to_string()))
}

fn load_env(cli: &Cli) -> Result<DefEnv, Failure> {
    let mut env = if cli.no_prelude { DefEnv::new() } else { prelude_env() };
    for p in &cli.defs {
        let text = read(p)?;
        super::parse_defs(&mut env, &text).map_err(|d| diag(p, d))?;
    }
    Ok(env)
}

/// Parses a file whose kind comes from `--kind` (main input only) or its extension.
fn load(env: &DefEnv, path: &Path, forced: Option<SourceKind>) -> Result<Ast, Failure> {
    let kind = forced.or_else(|| SourceKind::from_path(path)).ok_or_else(|| {
        Failure::input(format!(
            "{}: error: cannot tell the input kind from the extension; use --kind",
            path.display()
        ))
    })?;
    let text = read(path)?;
    parse(kind, env, &text).map_err(|d| diag(path, d))
}

fn wrong_kind(path: &Path, wanted: &str) -> Failure {
    Failure::input(format!("{}: error: expected {wanted}", path.display()))
}

fn load_proof(env: &DefEnv, path: &Path, forced: Option<SourceKind>) -> Result<ParsedProof, Failure> {
    match load(env, path, forced)? {
        Ast::Proof(p) => Ok(p),
        _ => Err(wrong_kind(path, "a proof")),
    }
}

fn load_term(env: &DefEnv, path: &Path, forced: Option<SourceKind>) -> Result<Term, Failure> {
    match load(env, path, forced)? {
        Ast::Term(t) => Ok(t),
        _ => Err(wrong_kind(path, "a term")),
    }
}

fn load_state(env: &DefEnv, path: &Path) -> Result<StateId, Failure> {
    match load(env, path, None)? {
        Ast::State(s) => Ok(s),
        _ => Err(wrong_kind(path, "a state")),
    }
}

fn load_formula(env: &DefEnv, path: &Path) -> Result<Formula, Failure> {
    match load(env, path, None)? {
        Ast::Formula(f) => Ok(f),
        _ => Err(wrong_kind(path, "a formula")),
    }
}

fn proof_failure(path: &Path, proof: &ParsedProof, e: ProofError) -> Failure {
    let span = proof.spans.lookup(&e.path);
    Failure::semantic(Diagnostic::error(span, e.to_string()).render(&path.display().to_string()))
}

fn checked(env: &DefEnv, path: &Path, forced: Option<SourceKind>) -> Result<(Judgement, Term), Failure> {
    let proof = load_proof(env, path, forced)?;
    check_and_extract(env, &proof.root).map_err(|e| proof_failure(path, &proof, e))
}

fn dispatch(cli: &Cli, env: &DefEnv) -> CmdResult {
    match &cli.command {
        Command::Check { proof } => {
            let (j, _) = checked(env, proof, cli.kind)?;
            Ok(format!("{j}\n"))
        }
        Command::Extract { proof, output } => {
            let (_, t) = checked(env, proof, cli.kind)?;
            let text = format!("{t}\n");
            if let Some(o) = output {
                std::fs::write(o, &text)
                    .map_err(|e| Failure::input(format!("{}: error: cannot write file: {e}", o.display())))?;
            }
            Ok(text)
        }
        Command::Normalize { term, state, strategy, step_cap } => {
            let mut t = load_term(env, term, cli.kind)?;
            if let Some(sp) = state {
                let s = load_state(env, sp)?;
                t = Arc::unwrap_or_clone(subst(&Arc::new(t), &Name::new("s"), &Arc::new(Term::StateConst(s))));
                if contains_ideal_constants(&t) {
                    t = approximate(&t, s).map_err(|e| Failure::eval(term, e))?;
                }
            }
            let opts = EvalOptions { strategy: *strategy, step_cap: *step_cap, ..EvalOptions::default() };
            let nf = normalize_with(env, &t, &opts).map_err(|e| Failure::eval(term, e))?;
            Ok(match nf.value {
                Some(v) => format!("{v}\n"),
                None => format!("{}\n", nf.term),
            })
        }
        Command::Realizes { term, formula, state, depth } => {
            let t = load_term(env, term, cli.kind)?;
            let a = load_formula(env, formula)?;
            let s = match state {
                Some(p) => load_state(env, p)?,
                None => StateId::EMPTY,
            };
            let v = realizes_at(env, &t, &a, s, *depth, &HashMap::new()).map_err(|e| Failure::learn(term, e))?;
            match v {
                Verdict::Fail { .. } => Err(Failure::semantic(format!("{}: {v}", term.display()))),
                _ => Ok(format!("{v}\n")),
            }
        }
        Command::Witness { input_file, pred, input, trace, iter_cap, start } => {
            let kind = cli.kind.or_else(|| SourceKind::from_path(input_file));
            let t = match kind {
                Some(SourceKind::Proof) => checked(env, input_file, kind)?.1,
                Some(SourceKind::Term) => load_term(env, input_file, kind)?,
                _ => return Err(wrong_kind(input_file, "a proof or a term")),
            };
            let start = match start {
                Some(p) => load_state(env, p)?,
                None => StateId::EMPTY,
            };
            let pred = Name::new(pred);
            let (w, tr) =
                pi02_witness_from(env, &t, &pred, *input, *iter_cap, start).map_err(|e| Failure::learn(input_file, e))?;
            if let Some(tp) = trace {
                std::fs::write(tp, tr.to_jsonl())
                    .map_err(|e| Failure::input(format!("{}: error: cannot write file: {e}", tp.display())))?;
            }
            Ok(format!("{w}\n"))
        }
        Command::Converge { term, chain } => {
            let t = load_term(env, term, cli.kind)?;
            let states = chain.iter().map(|p| load_state(env, p)).collect::<Result<Vec<_>, _>>()?;
            let chain = WiChain::new(states).map_err(|e| Failure::learn(term, e))?;
            let report = check_converges(env, &t, &chain).map_err(|e| Failure::learn(term, e))?;
            let mut text = String::new();
            for (i, v) in report.values.iter().enumerate() {
                text.push_str(&format!("{i}: {v}\n"));
            }
            text.push_str(&format!("final: {} (stable from index {})\n", report.final_value, report.last_change_index));
            Ok(text)
        }
    }
}
