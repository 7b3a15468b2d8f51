//! Weak normalization of closed learning terms.
//!
//! Reduction never goes under a lambda. Besides beta, projection, `if` and
//! the recursor, the approximation constants and the union constant reduce
//! once their state argument is a state constant and their numeric arguments
//! are numerals.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{
    contains_approximations, contains_ideal_constants, map_children, subst, typecheck, Context,
    DefEnv, Name, Term, TypeError, TypeExpr,
};
use crate::states::{add_step, chi_phi_lookup, StateId};

pub const DEFAULT_STEP_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Leftmost-outermost.
    #[default]
    Outermost,
    /// Arguments before the enclosing redex.
    Innermost,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Strategy, String> {
        match s {
            "outermost" => Ok(Strategy::Outermost),
            "innermost" => Ok(Strategy::Innermost),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// The observable result of a closed term of atomic type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Numeral(u64),
    Boolean(bool),
    StateVal(StateId),
}

impl Value {
    pub fn as_state(self) -> Option<StateId> {
        match self {
            Value::StateVal(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_numeral(self) -> Option<u64> {
        match self {
            Value::Numeral(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Boolean(b) => Some(b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Numeral(n) => write!(f, "{n}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::StateVal(s) => write!(f, "{s}"),
        }
    }
}

/// A lookup performed by an approximation constant during evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Query {
    pub pred: Name,
    pub args: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub term: Arc<Term>,
    pub ty: TypeExpr,
    /// Present iff `ty` is atomic.
    pub value: Option<Value>,
    pub steps: u64,
    pub queries: Vec<Query>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("step budget of {0} exceeded")]
    StepBudgetExceeded(u64),
    #[error("term is not closed (free: {0})")]
    NotClosed(String),
    #[error("wrong fragment: {0}")]
    WrongFragment(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub strategy: Strategy,
    pub step_cap: u64,
    /// Re-typecheck every redex against its contractum.
    pub check_subject_reduction: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            strategy: Strategy::Outermost,
            step_cap: DEFAULT_STEP_CAP,
            check_subject_reduction: cfg!(debug_assertions),
        }
    }
}

pub fn normalize(env: &DefEnv, t: &Term, strategy: Strategy, step_cap: u64) -> Result<NormalForm, EvalError> {
    normalize_with(env, t, &EvalOptions { strategy, step_cap, ..EvalOptions::default() })
}

pub fn normalize_with(env: &DefEnv, t: &Term, opts: &EvalOptions) -> Result<NormalForm, EvalError> {
    let fv = t.free_vars();
    if !fv.is_empty() {
        let names: Vec<String> = fv.iter().map(|n| n.to_string()).collect();
        return Err(EvalError::NotClosed(names.join(", ")));
    }
    if contains_ideal_constants(t) {
        return Err(EvalError::WrongFragment(
            "oracles, Skolem maps and classical learners have no reduction rules; approximate the term first".into(),
        ));
    }
    let ty = typecheck(env, &Context::new(), t)?;
    let mut m = Machine { env, opts, steps: 0, queries: Vec::new() };
    let mut cur = Arc::new(t.clone());
    while let Some(next) = m.step(&cur)? {
        cur = next;
    }
    let value = normal_form_shape(&cur, &ty)?;
    Ok(NormalForm { term: cur, ty, value, steps: m.steps, queries: m.queries })
}

/// Checks the closed normal form shape for atomic and product types and
/// returns the value view at atomic type.
fn normal_form_shape(t: &Term, ty: &TypeExpr) -> Result<Option<Value>, EvalError> {
    let bad = || EvalError::Internal(format!("closed normal form `{t}` of type {ty} has an illegal shape"));
    match ty {
        TypeExpr::Nat => t.as_numeral().map(|n| Some(Value::Numeral(n))).ok_or_else(bad),
        TypeExpr::Bool => match t {
            Term::True => Ok(Some(Value::Boolean(true))),
            Term::False => Ok(Some(Value::Boolean(false))),
            _ => Err(bad()),
        },
        TypeExpr::State => match t {
            Term::StateConst(s) => Ok(Some(Value::StateVal(*s))),
            _ => Err(bad()),
        },
        TypeExpr::Prod(..) => match t {
            Term::Pair(..) => Ok(None),
            _ => Err(bad()),
        },
        TypeExpr::Arrow(..) => Ok(None),
    }
}

struct Machine<'a> {
    env: &'a DefEnv,
    opts: &'a EvalOptions,
    steps: u64,
    queries: Vec<Query>,
}

impl Machine<'_> {
    /// One reduction step according to the strategy, or `None` if `t` is
    /// weakly normal.
    fn step(&mut self, t: &Arc<Term>) -> Result<Option<Arc<Term>>, EvalError> {
        match self.opts.strategy {
            Strategy::Outermost => {
                if let Some(r) = self.contract_counted(t)? {
                    return Ok(Some(r));
                }
                self.step_children(t)
            }
            Strategy::Innermost => {
                if let Some(r) = self.step_children(t)? {
                    return Ok(Some(r));
                }
                self.contract_counted(t)
            }
        }
    }

    fn step_children(&mut self, t: &Arc<Term>) -> Result<Option<Arc<Term>>, EvalError> {
        if matches!(**t, Term::Lam(..)) {
            return Ok(None);
        }
        let kids = t.children();
        for (i, c) in kids.iter().enumerate() {
            if let Some(nc) = self.step(c)? {
                let mut new: Vec<Arc<Term>> = kids.iter().map(|k| Arc::clone(k)).collect();
                new[i] = nc;
                return Ok(Some(Arc::new(t.with_children(new))));
            }
        }
        Ok(None)
    }

    fn contract_counted(&mut self, t: &Arc<Term>) -> Result<Option<Arc<Term>>, EvalError> {
        let Some(r) = self.contract(t)? else { return Ok(None) };
        self.steps += 1;
        if self.steps > self.opts.step_cap {
            return Err(EvalError::StepBudgetExceeded(self.opts.step_cap));
        }
        if self.opts.check_subject_reduction {
            let before = typecheck(self.env, &Context::new(), t)?;
            let after = typecheck(self.env, &Context::new(), &r)
                .map_err(|e| EvalError::Internal(format!("contractum of `{t}` is ill-typed: {e}")))?;
            if before != after {
                return Err(EvalError::Internal(format!(
                    "subject reduction violated: `{t}` : {before} reduced to `{r}` : {after}"
                )));
            }
        }
        Ok(Some(r))
    }

    /// Contracts `t` if it is itself a redex.
    fn contract(&mut self, t: &Arc<Term>) -> Result<Option<Arc<Term>>, EvalError> {
        Ok(match &**t {
            Term::App(f, a) => match &**f {
                Term::Lam(x, _, body) => Some(subst(body, x, a)),
                Term::DefRef(n) => Some(Arc::new(Term::App(self.def_body(n)?, a.clone()))),
                _ => self.delta(t)?,
            },
            Term::Proj0(p) => match &**p {
                Term::Pair(l, _) => Some(l.clone()),
                _ => None,
            },
            Term::Proj1(p) => match &**p {
                Term::Pair(_, r) => Some(r.clone()),
                _ => None,
            },
            Term::If(_, c, a, b) => match &**c {
                Term::True => Some(a.clone()),
                Term::False => Some(b.clone()),
                _ => None,
            },
            Term::Rec(ty, base, step, n) => match &**n {
                Term::Zero => Some(base.clone()),
                Term::Succ(m) => {
                    let inner = Arc::new(Term::Rec(ty.clone(), base.clone(), step.clone(), m.clone()));
                    Some(Arc::new(Term::App(Arc::new(Term::App(step.clone(), m.clone())), inner)))
                }
                _ => None,
            },
            Term::Join(l, r) => match (&**l, &**r) {
                (Term::StateConst(a), Term::StateConst(b)) => {
                    Some(Arc::new(Term::StateConst(StateId::intern(a.get().cunion(&b.get())))))
                }
                _ => None,
            },
            Term::DefRef(n) => {
                let def = self
                    .env
                    .get(n)
                    .ok_or_else(|| TypeError::UnknownDefinition(n.clone()))?;
                if def.ty.is_arrow() {
                    None
                } else {
                    Some(def.body.clone())
                }
            }
            _ => None,
        })
    }

    fn def_body(&self, n: &Name) -> Result<Arc<Term>, EvalError> {
        self.env
            .get(n)
            .map(|d| d.body.clone())
            .ok_or_else(|| TypeError::UnknownDefinition(n.clone()).into())
    }

    /// The functional rules for `chi`, `phi` and `add`.
    fn delta(&mut self, t: &Arc<Term>) -> Result<Option<Arc<Term>>, EvalError> {
        let (head, args) = t.spine();
        let (pred, extra) = match head {
            Term::ChiApprox(p) | Term::PhiApprox(p) => (p, 0),
            Term::AddApprox(p) => (p, 1),
            _ => return Ok(None),
        };
        let Some(arity) = self.env.predicate_arity(pred) else {
            return Err(TypeError::NotAPredicate(pred.clone()).into());
        };
        // state argument + k = arity - 1 numerals (+ the candidate witness)
        if args.len() != arity + extra {
            return Ok(None);
        }
        let Term::StateConst(sid) = &**args[0] else { return Ok(None) };
        let mut nums = Vec::with_capacity(args.len() - 1);
        for a in &args[1..] {
            match a.as_numeral() {
                Some(n) => nums.push(n),
                None => return Ok(None),
            }
        }
        let state = sid.get();
        let k = arity - 1;
        self.queries.push(Query { pred: pred.clone(), args: nums[..k].to_vec() });
        let (found, m) = chi_phi_lookup(&state, pred, &nums[..k]);
        let out = match head {
            Term::ChiApprox(_) => if found { Term::True } else { Term::False },
            Term::PhiApprox(_) => Term::numeral(m),
            _ => {
                let s = add_step(self.env, &state, pred, &nums[..k], nums[k])
                    .map_err(|e| EvalError::Internal(e.to_string()))?;
                Term::StateConst(StateId::intern(s))
            }
        };
        Ok(Some(Arc::new(out)))
    }
}

/// `t[s]`: every ideal constant is replaced by its approximation at `s`.
pub fn approximate(t: &Term, s: StateId) -> Result<Term, EvalError> {
    if contains_approximations(t) {
        return Err(EvalError::WrongFragment("term already contains approximation constants".into()));
    }
    Ok(Arc::unwrap_or_clone(approx_in(&Arc::new(t.clone()), s)))
}

fn approx_in(t: &Arc<Term>, s: StateId) -> Arc<Term> {
    let at = |c: Term| Arc::new(Term::App(Arc::new(c), Arc::new(Term::StateConst(s))));
    match &**t {
        Term::OracleX(p) => at(Term::ChiApprox(p.clone())),
        Term::SkolemPhi(p) => at(Term::PhiApprox(p.clone())),
        Term::AddClass(p) => at(Term::AddApprox(p.clone())),
        _ => map_children(t, |c| approx_in(c, s)),
    }
}

/// Normalizes a closed term of atomic type and returns its value.
pub fn eval_atomic(env: &DefEnv, t: &Term) -> Result<Value, EvalError> {
    let nf = normalize_with(env, t, &EvalOptions::default())?;
    nf.value.ok_or_else(|| {
        EvalError::Type(TypeError::Mismatch {
            term: t.to_string(),
            expected: TypeExpr::Nat,
            found: nf.ty.clone(),
        })
    })
}

/// Provable equality of two closed terms of the same atomic type.
pub fn equal_learn(env: &DefEnv, t1: &Term, t2: &Term) -> Result<bool, EvalError> {
    let ty1 = typecheck(env, &Context::new(), t1)?;
    let ty2 = typecheck(env, &Context::new(), t2)?;
    if ty1 != ty2 {
        return Err(EvalError::Type(TypeError::Mismatch { term: t2.to_string(), expected: ty1, found: ty2 }));
    }
    Ok(eval_atomic(env, t1)? == eval_atomic(env, t2)?)
}
