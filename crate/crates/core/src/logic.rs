//! Arithmetical formulas over Boolean-valued predicate terms.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::eval::{approximate, eval_atomic, EvalError, Value};
use crate::kernel::{
    alpha_eq_in, fresh_name, has_state_empty, subst, typecheck, Context, DefEnv, Name, Term,
    TypeError, TypeExpr,
};
use crate::states::StateId;

/// A formula. Every variable ranges over `N`; atomic heads are closed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atomic { head: Arc<Term>, args: Vec<Arc<Term>> },
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(Name, Box<Formula>),
    Exists(Name, Box<Formula>),
}

impl Formula {
    pub fn atomic(head: impl Into<Arc<Term>>, args: Vec<Term>) -> Formula {
        Formula::Atomic { head: head.into(), args: args.into_iter().map(Arc::new).collect() }
    }

    /// `P(args)` for a named predicate.
    pub fn pred(p: &str, args: Vec<Term>) -> Formula {
        Formula::atomic(Term::def(p), args)
    }

    /// The atomic formula `False`.
    pub fn bot() -> Formula {
        Formula::atomic(Term::False, vec![])
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, a: Formula) -> Formula {
        Formula::Forall(Name::new(x), Box::new(a))
    }

    pub fn exists(x: &str, a: Formula) -> Formula {
        Formula::Exists(Name::new(x), Box::new(a))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atomic { .. })
    }

    /// For an atomic formula, the Boolean term `head arg1 ... argn`.
    pub fn atomic_term(&self) -> Option<Term> {
        match self {
            Formula::Atomic { head, args } => Some(Term::apps(head.clone(), args.iter().cloned())),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Atomic { head, args } => {
                for t in std::iter::once(head).chain(args.iter()) {
                    out.extend(t.free_vars().into_iter().filter(|x| !bound.contains(x)));
                }
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                bound.push(x.clone());
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn alpha_eq(&self, other: &Formula) -> bool {
        formula_alpha_eq(self, other, &mut Vec::new(), &mut Vec::new())
    }

    /// Applies `f` to every term in the formula (heads and arguments).
    pub fn try_map_terms<E>(&self, f: &mut impl FnMut(&Arc<Term>) -> Result<Arc<Term>, E>) -> Result<Formula, E> {
        Ok(match self {
            Formula::Atomic { head, args } => Formula::Atomic {
                head: f(head)?,
                args: args.iter().map(|a| f(a)).collect::<Result<_, E>>()?,
            },
            Formula::And(a, b) => Formula::and(a.try_map_terms(f)?, b.try_map_terms(f)?),
            Formula::Or(a, b) => Formula::or(a.try_map_terms(f)?, b.try_map_terms(f)?),
            Formula::Imp(a, b) => Formula::imp(a.try_map_terms(f)?, b.try_map_terms(f)?),
            Formula::Forall(x, a) => Formula::Forall(x.clone(), Box::new(a.try_map_terms(f)?)),
            Formula::Exists(x, a) => Formula::Exists(x.clone(), Box::new(a.try_map_terms(f)?)),
        })
    }

    /// Every term occurring in the formula.
    pub fn terms(&self) -> Vec<&Arc<Term>> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a Arc<Term>>) {
        match self {
            Formula::Atomic { head, args } => {
                out.push(head);
                out.extend(args.iter());
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_terms(out);
                b.collect_terms(out);
            }
            Formula::Forall(_, a) | Formula::Exists(_, a) => a.collect_terms(out),
        }
    }
}

fn formula_alpha_eq(a: &Formula, b: &Formula, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    match (a, b) {
        (Formula::Atomic { head: h1, args: a1 }, Formula::Atomic { head: h2, args: a2 }) => {
            a1.len() == a2.len()
                && alpha_eq_in(h1, h2, ea, eb)
                && a1.iter().zip(a2).all(|(x, y)| alpha_eq_in(x, y, ea, eb))
        }
        (Formula::And(a1, b1), Formula::And(a2, b2))
        | (Formula::Or(a1, b1), Formula::Or(a2, b2))
        | (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => {
            formula_alpha_eq(a1, a2, ea, eb) && formula_alpha_eq(b1, b2, ea, eb)
        }
        (Formula::Forall(x, a1), Formula::Forall(y, a2)) | (Formula::Exists(x, a1), Formula::Exists(y, a2)) => {
            ea.push(x.clone());
            eb.push(y.clone());
            let r = formula_alpha_eq(a1, a2, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        _ => false,
    }
}

/// `|A|`, the type of realizers of `A`.
pub fn realizer_type(a: &Formula) -> TypeExpr {
    match a {
        Formula::Atomic { .. } => TypeExpr::State,
        Formula::And(l, r) => TypeExpr::prod(realizer_type(l), realizer_type(r)),
        Formula::Or(l, r) => TypeExpr::prod(
            TypeExpr::Bool,
            TypeExpr::prod(realizer_type(l), realizer_type(r)),
        ),
        Formula::Imp(l, r) => TypeExpr::arrow(realizer_type(l), realizer_type(r)),
        Formula::Forall(_, b) => TypeExpr::arrow(TypeExpr::Nat, realizer_type(b)),
        Formula::Exists(_, b) => TypeExpr::prod(TypeExpr::Nat, realizer_type(b)),
    }
}

/// `A[s]`: every term of `A` approximated at `s`.
pub fn approx_formula(a: &Formula, s: StateId) -> Result<Formula, EvalError> {
    a.try_map_terms(&mut |t| approximate(t, s).map(Arc::new))
}

/// Truth value of a closed atomic formula of the learning fragment.
pub fn eval_closed_atomic(env: &DefEnv, a: &Formula) -> Result<bool, EvalError> {
    let t = a
        .atomic_term()
        .ok_or_else(|| EvalError::Internal(format!("`{a}` is not atomic")))?;
    match eval_atomic(env, &t)? {
        Value::Boolean(b) => Ok(b),
        other => Err(EvalError::Internal(format!("atomic formula evaluated to {other}"))),
    }
}

/// Capture-avoiding `A[t/x]`.
pub fn subst_formula(a: &Formula, x: &Name, t: &Arc<Term>) -> Formula {
    let fv_t = t.free_vars();
    subst_in(a, x, t, &fv_t)
}

fn subst_in(a: &Formula, x: &Name, t: &Arc<Term>, fv_t: &BTreeSet<Name>) -> Formula {
    match a {
        Formula::Atomic { head, args } => Formula::Atomic {
            head: subst(head, x, t),
            args: args.iter().map(|u| subst(u, x, t)).collect(),
        },
        Formula::And(l, r) => Formula::and(subst_in(l, x, t, fv_t), subst_in(r, x, t, fv_t)),
        Formula::Or(l, r) => Formula::or(subst_in(l, x, t, fv_t), subst_in(r, x, t, fv_t)),
        Formula::Imp(l, r) => Formula::imp(subst_in(l, x, t, fv_t), subst_in(r, x, t, fv_t)),
        Formula::Forall(y, body) | Formula::Exists(y, body) => {
            let rebuild = |y: Name, b: Formula| match a {
                Formula::Forall(..) => Formula::Forall(y, Box::new(b)),
                _ => Formula::Exists(y, Box::new(b)),
            };
            if y == x {
                return a.clone();
            }
            let fv_body = body.free_vars();
            if !fv_body.contains(x) {
                return a.clone();
            }
            if fv_t.contains(y) {
                let mut avoid = fv_t.clone();
                avoid.extend(fv_body);
                avoid.insert(x.clone());
                let y2 = fresh_name(y, &avoid);
                let renamed = subst_formula(body, y, &Arc::new(Term::Var(y2.clone())));
                rebuild(y2, subst_in(&renamed, x, t, fv_t))
            } else {
                rebuild(y.clone(), subst_in(body, x, t, fv_t))
            }
        }
    }
}

/// Checks that heads are closed predicates of state empty and that all
/// arguments are terms of type `N` over the numeric variables in scope.
pub fn check_formula(env: &DefEnv, vars: &BTreeSet<Name>, a: &Formula) -> Result<(), TypeError> {
    let mut ctx = Context::new();
    for v in vars {
        ctx.push(v.clone(), TypeExpr::Nat);
    }
    check_in(env, &mut ctx, a)
}

fn check_in(env: &DefEnv, ctx: &mut Context, a: &Formula) -> Result<(), TypeError> {
    match a {
        Formula::Atomic { head, args } => {
            if let Some(x) = head.free_vars().into_iter().next() {
                return Err(TypeError::UnboundVariable(x));
            }
            let expected = TypeExpr::nat_to(args.len(), TypeExpr::Bool);
            let found = typecheck(env, &Context::new(), head)?;
            if found != expected {
                return Err(TypeError::Mismatch { term: head.to_string(), expected, found });
            }
            if !has_state_empty(head) {
                return Err(TypeError::Mismatch {
                    term: head.to_string(),
                    expected: TypeExpr::Bool,
                    found: TypeExpr::State,
                });
            }
            for t in args {
                let found = typecheck(env, ctx, t)?;
                if found != TypeExpr::Nat {
                    return Err(TypeError::Mismatch { term: t.to_string(), expected: TypeExpr::Nat, found });
                }
            }
            Ok(())
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Imp(l, r) => {
            check_in(env, ctx, l)?;
            check_in(env, ctx, r)
        }
        Formula::Forall(x, b) | Formula::Exists(x, b) => {
            ctx.push(x.clone(), TypeExpr::Nat);
            let r = check_in(env, ctx, b);
            ctx.pop();
            r
        }
    }
}

/// `h1: A1, ..., hn: An |- C` together with the free numeric variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgement {
    pub assumptions: Vec<(Name, Formula)>,
    pub conclusion: Formula,
    pub free_vars: Vec<Name>,
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (h, a)) in self.assumptions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{h}: {a}")?;
        }
        if !self.assumptions.is_empty() {
            f.write_str(" ")?;
        }
        write!(f, "|- {}", self.conclusion)?;
        if !self.free_vars.is_empty() {
            let vs: Vec<&str> = self.free_vars.iter().map(Name::as_str).collect();
            write!(f, "  (free: {})", vs.join(", "))?;
        }
        Ok(())
    }
}
