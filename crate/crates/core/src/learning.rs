//! Bounded realizability checking, convergence along chains of states, the
//! fixed-point learning loop and witness read-off for `forall x. exists y. P(x, y)`.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::eval::{approximate, eval_atomic, normalize_with, EvalError, EvalOptions, Query, Value};
use crate::kernel::{
    contains_approximations, has_state_empty, typecheck, Context, DefEnv, Name, Term, TypeExpr,
};
use crate::logic::{approx_formula, eval_closed_atomic, realizer_type, subst_formula, Formula};
use crate::states::{State, StateId};

pub const DEFAULT_ITER_CAP: usize = 10_000;
pub const DEFAULT_DEPTH: u64 = 10;

/// Position of a subformula: child indices from the root (`0`/`1` for the
/// two sides of a binary connective, `0` under a quantifier).
pub type FormulaPos = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Passed, but this many implication nodes had no candidate arguments.
    PassUnverifiedImp(usize),
    Fail { path: FormulaPos, state: StateId, detail: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        !matches!(self, Verdict::Fail { .. })
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (f @ Verdict::Fail { .. }, _) | (_, f @ Verdict::Fail { .. }) => f,
            (Verdict::Pass, v) | (v, Verdict::Pass) => v,
            (Verdict::PassUnverifiedImp(a), Verdict::PassUnverifiedImp(b)) => Verdict::PassUnverifiedImp(a + b),
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::PassUnverifiedImp(n) => write!(f, "pass ({n} implication node(s) unverified)"),
            Verdict::Fail { path, state, detail } => {
                let p: Vec<String> = path.iter().map(usize::to_string).collect();
                write!(f, "fail at [{}] in state {state}: {detail}", p.join("."))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LearnError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("realizer type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: TypeExpr, found: TypeExpr },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("iteration cap {0} exceeded")]
    IterCapExceeded(usize),
    #[error("witness {witness} for {pred}({input}, _) is wrong (final state {state})")]
    CheckFailed { pred: Name, input: u64, witness: u64, state: StateId },
    #[error("state invariant broken: {0}")]
    Invariant(String),
}

fn closed_state_empty(t: &Term, what: &str) -> Result<(), LearnError> {
    if !t.is_closed() {
        return Err(LearnError::Precondition(format!("{what} `{t}` is not closed")));
    }
    if !has_state_empty(t) {
        return Err(LearnError::Precondition(format!("{what} `{t}` contains a non-empty state constant")));
    }
    if contains_approximations(t) {
        return Err(LearnError::Precondition(format!("{what} `{t}` already contains approximation constants")));
    }
    Ok(())
}

/// Bounded check of `t |-_s A`: universal quantifiers are tested on
/// `0..=depth`, implications only against the supplied candidates.
pub fn realizes_at(
    env: &DefEnv,
    t: &Term,
    a: &Formula,
    s: StateId,
    depth: u64,
    candidates: &HashMap<FormulaPos, Vec<Arc<Term>>>,
) -> Result<Verdict, LearnError> {
    closed_state_empty(t, "realizer")?;
    if !a.is_closed() {
        return Err(LearnError::Precondition(format!("formula `{a}` is not closed")));
    }
    let expected = realizer_type(a);
    let found = typecheck(env, &Context::new(), t).map_err(EvalError::from)?;
    if found != expected {
        return Err(LearnError::TypeMismatch { expected, found });
    }
    let checker = Checker { env, s, depth, candidates };
    let ts = Arc::new(approximate(t, s)?);
    let as_ = approx_formula(a, s)?;
    checker.check(&ts, &as_, &mut Vec::new())
}

struct Checker<'a> {
    env: &'a DefEnv,
    s: StateId,
    depth: u64,
    candidates: &'a HashMap<FormulaPos, Vec<Arc<Term>>>,
}

impl Checker<'_> {
    fn fail(&self, path: &[usize], detail: String) -> Verdict {
        Verdict::Fail { path: path.to_vec(), state: self.s, detail }
    }

    fn nf(&self, t: &Arc<Term>) -> Result<Arc<Term>, LearnError> {
        Ok(normalize_with(self.env, t, &EvalOptions::default())?.term)
    }

    fn pair(&self, t: &Arc<Term>) -> Result<(Arc<Term>, Arc<Term>), LearnError> {
        match &*self.nf(t)? {
            Term::Pair(l, r) => Ok((l.clone(), r.clone())),
            other => Err(LearnError::Invariant(format!("product realizer normalized to `{other}`"))),
        }
    }

    fn with<T>(path: &mut Vec<usize>, i: usize, f: impl FnOnce(&mut Vec<usize>) -> T) -> T {
        path.push(i);
        let r = f(path);
        path.pop();
        r
    }

    fn check(&self, t: &Arc<Term>, a: &Formula, path: &mut Vec<usize>) -> Result<Verdict, LearnError> {
        match a {
            Formula::Atomic { .. } => {
                let v = eval_atomic(self.env, t)?;
                let Value::StateVal(out) = v else {
                    return Err(LearnError::Invariant(format!("atomic realizer evaluated to {v}")));
                };
                if !out.is_empty() {
                    return Ok(Verdict::Pass);
                }
                if eval_closed_atomic(self.env, a)? {
                    Ok(Verdict::Pass)
                } else {
                    Ok(self.fail(path, format!("realizer returned empty but `{a}` is false")))
                }
            }
            Formula::And(l, r) => {
                let (u, v) = self.pair(t)?;
                let vl = Self::with(path, 0, |p| self.check(&u, l, p))?;
                if !vl.is_pass() {
                    return Ok(vl);
                }
                Ok(vl.and(Self::with(path, 1, |p| self.check(&v, r, p))?))
            }
            Formula::Or(l, r) => {
                let (b, rest) = self.pair(t)?;
                let (u, v) = match &*rest {
                    Term::Pair(u, v) => (u.clone(), v.clone()),
                    other => return Err(LearnError::Invariant(format!("disjunction payload `{other}`"))),
                };
                match &*b {
                    Term::True => Self::with(path, 0, |p| self.check(&u, l, p)),
                    Term::False => Self::with(path, 1, |p| self.check(&v, r, p)),
                    other => Err(LearnError::Invariant(format!("disjunction tag `{other}`"))),
                }
            }
            Formula::Imp(l, r) => {
                let Some(cands) = self.candidates.get(path.as_slice()) else {
                    return Ok(Verdict::PassUnverifiedImp(1));
                };
                let mut verdict = Verdict::Pass;
                for u in cands {
                    closed_state_empty(u, "candidate").or_else(|e| {
                        if contains_approximations(u) && u.is_closed() { Ok(()) } else { Err(e) }
                    })?;
                    let us = if contains_approximations(u) { u.clone() } else { Arc::new(approximate(u, self.s)?) };
                    let vu = Self::with(path, 0, |p| self.check(&us, l, p))?;
                    if !vu.is_pass() {
                        // not a realizer of the antecedent: nothing to check
                        continue;
                    }
                    let app = Arc::new(Term::App(t.clone(), us));
                    let vb = Self::with(path, 1, |p| self.check(&app, r, p))?;
                    verdict = verdict.and(vb);
                    if !verdict.is_pass() {
                        return Ok(verdict);
                    }
                }
                Ok(verdict)
            }
            Formula::Forall(x, b) => {
                let mut verdict = Verdict::Pass;
                for n in 0..=self.depth {
                    let num = Arc::new(Term::numeral(n));
                    let inst = subst_formula(b, x, &num);
                    let app = Arc::new(Term::App(t.clone(), num));
                    let v = Self::with(path, 0, |p| self.check(&app, &inst, p))?;
                    verdict = verdict.and(match v {
                        Verdict::Fail { path, state, detail } => {
                            Verdict::Fail { path, state, detail: format!("{x} := {n}: {detail}") }
                        }
                        v => v,
                    });
                    if !verdict.is_pass() {
                        return Ok(verdict);
                    }
                }
                Ok(verdict)
            }
            Formula::Exists(x, b) => {
                let (w, r) = self.pair(t)?;
                let Some(n) = w.as_numeral() else {
                    return Err(LearnError::Invariant(format!("existential witness `{w}` is not a numeral")));
                };
                let inst = subst_formula(b, x, &w);
                Ok(match Self::with(path, 0, |p| self.check(&r, &inst, p))? {
                    Verdict::Fail { path, state, detail } => {
                        Verdict::Fail { path, state, detail: format!("witness {x} = {n}: {detail}") }
                    }
                    v => v,
                })
            }
        }
    }
}

/// A weakly increasing sequence of states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WiChain(Vec<StateId>);

impl WiChain {
    pub fn new(states: Vec<StateId>) -> Result<WiChain, LearnError> {
        if states.is_empty() {
            return Err(LearnError::Precondition("a chain needs at least one state".into()));
        }
        for (i, w) in states.windows(2).enumerate() {
            if !w[0].get().is_subset(&w[1].get()) {
                return Err(LearnError::Precondition(format!(
                    "chain is not weakly increasing at index {}: {} is not contained in {}",
                    i + 1,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(WiChain(states))
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub values: Vec<Value>,
    /// Last index whose value differs from its predecessor (0 if none).
    pub last_change_index: usize,
    pub final_value: Value,
    /// Lookups performed while evaluating `t[s_i]`, per chain index.
    pub queries: Vec<BTreeSet<Query>>,
}

/// Evaluates `t[s_i]` along the chain.
pub fn check_converges(env: &DefEnv, t: &Term, chain: &WiChain) -> Result<ConvergenceReport, LearnError> {
    closed_state_empty(t, "term")?;
    let ty = typecheck(env, &Context::new(), t).map_err(EvalError::from)?;
    if !ty.is_atomic() {
        return Err(LearnError::Precondition(format!("term has type {ty}, expected an atomic type")));
    }
    let mut values = Vec::new();
    let mut queries = Vec::new();
    for s in chain.states() {
        let nf = normalize_with(env, &approximate(t, *s)?, &EvalOptions::default())?;
        values.push(nf.value.expect("atomic type has a value"));
        queries.push(nf.queries.into_iter().collect());
    }
    let last_change_index = (1..values.len()).rev().find(|&i| values[i] != values[i - 1]).unwrap_or(0);
    let final_value = *values.last().expect("chain is non-empty");
    Ok(ConvergenceReport { values, last_change_index, final_value, queries })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iteration {
    pub index: usize,
    pub before: StateId,
    pub tau: StateId,
    pub after: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnTrace {
    pub iterations: Vec<Iteration>,
    pub stable: bool,
    pub warm_start: bool,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    iter: usize,
    state: &'a State,
    tau: &'a State,
    stable: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    warm_start: bool,
}

impl LearnTrace {
    /// Iterations that added at least one atom.
    pub fn growing_iterations(&self) -> usize {
        self.iterations.iter().filter(|i| !i.tau.is_empty()).count()
    }

    pub fn final_state(&self) -> Option<StateId> {
        self.iterations.last().map(|i| i.after)
    }

    /// One JSON object per iteration, newline-terminated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for it in &self.iterations {
            let line = TraceLine {
                iter: it.index,
                state: &it.before.get(),
                tau: &it.tau.get(),
                stable: it.tau.is_empty(),
                warm_start: self.warm_start,
            };
            out.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
            out.push('\n');
        }
        out
    }
}

/// Iterates `S <- S ∪ τ(S)` with `τ(S)` the value of `t[S]`, until `τ(S)`
/// is empty.
pub fn fixed_point(env: &DefEnv, t: &Term, start: StateId, iter_cap: usize) -> Result<(StateId, LearnTrace), LearnError> {
    closed_state_empty(t, "term")?;
    let ty = typecheck(env, &Context::new(), t).map_err(EvalError::from)?;
    if ty != TypeExpr::State {
        return Err(LearnError::TypeMismatch { expected: TypeExpr::State, found: ty });
    }
    let mut s = start;
    let mut iterations = Vec::new();
    for index in 0..iter_cap {
        let v = eval_atomic(env, &approximate(t, s)?)?;
        let tau = v.as_state().ok_or_else(|| LearnError::Invariant(format!("state term evaluated to {v}")))?;
        let (cur, new) = (s.get(), tau.get());
        if !cur.consistent_with(&new) || !cur.disjoint(&new) {
            return Err(LearnError::Invariant(format!(
                "{new} is not consistent and disjoint with {cur}"
            )));
        }
        let after = StateId::intern(cur.union(&new).map_err(|e| LearnError::Invariant(e.to_string()))?);
        iterations.push(Iteration { index, before: s, tau, after });
        if tau.is_empty() {
            let warm_start = !start.is_empty();
            return Ok((s, LearnTrace { iterations, stable: true, warm_start }));
        }
        s = after;
    }
    Err(LearnError::IterCapExceeded(iter_cap))
}

/// `psi(n) = fst(t n)[phi(n)]` where `phi(n)` is the fixed point of
/// `snd(t n)` reached from the empty state.
pub fn pi02_witness(env: &DefEnv, t: &Term, pred: &Name, n: u64, iter_cap: usize) -> Result<(u64, LearnTrace), LearnError> {
    pi02_witness_from(env, t, pred, n, iter_cap, StateId::EMPTY)
}

/// As [`pi02_witness`], but the loop starts from `start`. A non-empty start
/// is flagged in the trace.
pub fn pi02_witness_from(
    env: &DefEnv,
    t: &Term,
    pred: &Name,
    n: u64,
    iter_cap: usize,
    start: StateId,
) -> Result<(u64, LearnTrace), LearnError> {
    closed_state_empty(t, "realizer")?;
    let expected = TypeExpr::arrow(TypeExpr::Nat, TypeExpr::prod(TypeExpr::Nat, TypeExpr::State));
    let found = typecheck(env, &Context::new(), t).map_err(EvalError::from)?;
    if found != expected {
        return Err(LearnError::TypeMismatch { expected, found });
    }
    if env.predicate_arity(pred) != Some(2) {
        return Err(LearnError::Precondition(format!("`{pred}` is not a binary predicate")));
    }
    let tn = Arc::new(Term::app(t.clone(), Term::numeral(n)));
    let (fixed, trace) = fixed_point(env, &Term::Proj1(tn.clone()), start, iter_cap)?;
    let w = eval_atomic(env, &approximate(&Term::Proj0(tn), fixed)?)?;
    let witness = w
        .as_numeral()
        .ok_or_else(|| LearnError::Invariant(format!("witness evaluated to {w}")))?;
    let check = Term::apps(Term::DefRef(pred.clone()), [Term::numeral(n), Term::numeral(witness)]);
    if eval_atomic(env, &check)? != Value::Boolean(true) {
        return Err(LearnError::CheckFailed { pred: pred.clone(), input: n, witness, state: fixed });
    }
    Ok((witness, trace))
}
