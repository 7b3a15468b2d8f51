//! Natural-deduction proofs of HA + EM1: checking and realizer extraction.
//!
//! Checking and extraction are one pass: every node is decorated with its
//! judgement and its realizer term at the same time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::eval::{normalize, EvalError, Strategy, DEFAULT_STEP_CAP};
use crate::kernel::{
    alpha_eq_in, classify, fresh_name, subst, typecheck, Context, DefEnv, Fragment, Name, Term,
    TypeExpr,
};
use crate::logic::{check_formula, realizer_type, subst_formula, Formula, Judgement};

/// Rules whose premises and conclusion are atomic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PostRule {
    Taut,
    EqRefl,
    EqSym,
    EqTrans,
    EqCong,
    LeqRefl,
    LeqTrans,
    LeqSucc,
    LeqZero,
    LeqAntisym,
}

impl PostRule {
    pub const ALL: [PostRule; 10] = [
        PostRule::Taut,
        PostRule::EqRefl,
        PostRule::EqSym,
        PostRule::EqTrans,
        PostRule::EqCong,
        PostRule::LeqRefl,
        PostRule::LeqTrans,
        PostRule::LeqSucc,
        PostRule::LeqZero,
        PostRule::LeqAntisym,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PostRule::Taut => "taut",
            PostRule::EqRefl => "eq_refl",
            PostRule::EqSym => "eq_sym",
            PostRule::EqTrans => "eq_trans",
            PostRule::EqCong => "eq_cong",
            PostRule::LeqRefl => "leq_refl",
            PostRule::LeqTrans => "leq_trans",
            PostRule::LeqSucc => "leq_succ",
            PostRule::LeqZero => "leq_zero",
            PostRule::LeqAntisym => "leq_antisym",
        }
    }
}

impl fmt::Display for PostRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PostRule {
    type Err = String;
    fn from_str(s: &str) -> Result<PostRule, String> {
        PostRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown post rule `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofNode {
    Assume(Name, Formula),
    AndI(Box<ProofNode>, Box<ProofNode>),
    AndE0(Box<ProofNode>),
    AndE1(Box<ProofNode>),
    /// Discharges the label, whose formula is given.
    ImpI(Name, Formula, Box<ProofNode>),
    ImpE(Box<ProofNode>, Box<ProofNode>),
    /// Left injection; the formula is the right disjunct.
    OrI0(Box<ProofNode>, Formula),
    /// Right injection; the formula is the left disjunct.
    OrI1(Formula, Box<ProofNode>),
    OrE(Box<ProofNode>, Name, Box<ProofNode>, Name, Box<ProofNode>),
    ForallI(Name, Box<ProofNode>),
    ForallE(Box<ProofNode>, Arc<Term>),
    /// Witness, the existential formula proved, and a proof of its instance.
    ExistsI(Arc<Term>, Formula, Box<ProofNode>),
    /// Major premise, eigenvariable, label of the opened instance, minor premise.
    ExistsE(Box<ProofNode>, Name, Name, Box<ProofNode>),
    Induction(Box<ProofNode>, Box<ProofNode>),
    Post(PostRule, Vec<ProofNode>, Formula),
    AtomicAxiom(Formula),
    EM1(Name),
    ChiAxiom(Name, Vec<Arc<Term>>, Arc<Term>),
    PhiAxiom(Name, Vec<Arc<Term>>),
}

impl ProofNode {
    /// Direct subproofs in path order.
    pub fn children(&self) -> Vec<&ProofNode> {
        use ProofNode::*;
        match self {
            AndI(p, q) | ImpE(p, q) | Induction(p, q) => vec![p, q],
            AndE0(p) | AndE1(p) | ImpI(_, _, p) | OrI0(p, _) | OrI1(_, p) | ForallI(_, p) | ForallE(p, _)
            | ExistsI(_, _, p) => vec![p],
            OrE(p, _, q, _, r) => vec![p, q, r],
            ExistsE(p, _, _, q) => vec![p, q],
            Post(_, ps, _) => ps.iter().collect(),
            Assume(..) | AtomicAxiom(_) | EM1(_) | ChiAxiom(..) | PhiAxiom(..) => vec![],
        }
    }

    /// The subproof at `path`, if any.
    pub fn at_path(&self, path: &[usize]) -> Option<&ProofNode> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i)?.at_path(rest),
        }
    }

    pub fn rule_name(&self) -> &'static str {
        use ProofNode::*;
        match self {
            Assume(..) => "assume",
            AndI(..) => "and_i",
            AndE0(_) => "and_e0",
            AndE1(_) => "and_e1",
            ImpI(..) => "imp_i",
            ImpE(..) => "imp_e",
            OrI0(..) => "or_i0",
            OrI1(..) => "or_i1",
            OrE(..) => "or_e",
            ForallI(..) => "forall_i",
            ForallE(..) => "forall_e",
            ExistsI(..) => "exists_i",
            ExistsE(..) => "exists_e",
            Induction(..) => "induction",
            Post(..) => "post",
            AtomicAxiom(_) => "axiom",
            EM1(_) => "em1",
            ChiAxiom(..) => "chi_ax",
            PhiAxiom(..) => "phi_ax",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofErrorKind {
    #[error("rule mismatch: {0}")]
    RuleMismatch(String),
    #[error("eigenvariable violation: {0}")]
    EigenvariableViolation(String),
    #[error("invalid post rule: {0}")]
    InvalidPostRule(String),
    #[error("post rule formula is not atomic: {0}")]
    NonAtomicPostFormula(String),
    #[error("label clash: {0}")]
    LabelClash(String),
    #[error("ill-formed: {0}")]
    IllFormed(String),
    #[error("tautology check needs {0} propositional atoms (limit 20)")]
    VariableBudgetExceeded(usize),
    #[error("evaluation failed: {0}")]
    Eval(String),
}

/// A checking failure at the subproof reached by `path` from the root.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ProofError {
    pub path: Vec<usize>,
    pub kind: ProofErrorKind,
}

impl fmt::Display for ProofError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "at root: {}", self.kind)
        } else {
            let p: Vec<String> = self.path.iter().map(usize::to_string).collect();
            write!(f, "at node {}: {}", p.join("."), self.kind)
        }
    }
}

impl ProofErrorKind {
    fn at(self, path: &[usize]) -> ProofError {
        ProofError { path: path.to_vec(), kind: self }
    }
}

/// The conclusion-and-realizer decoration of a subproof.
struct Deco {
    assumptions: BTreeMap<Name, Formula>,
    conclusion: Formula,
    free: BTreeSet<Name>,
    term: Arc<Term>,
}

/// Checks `p` and returns its judgement.
pub fn check(env: &DefEnv, p: &ProofNode) -> Result<Judgement, ProofError> {
    check_and_extract(env, p).map(|(j, _)| j)
}

/// The realizer `p*` of a checked proof.
pub fn extract(env: &DefEnv, p: &ProofNode) -> Result<Term, ProofError> {
    check_and_extract(env, p).map(|(_, t)| t)
}

pub fn check_and_extract(env: &DefEnv, p: &ProofNode) -> Result<(Judgement, Term), ProofError> {
    let mut path = Vec::new();
    let d = decorate(env, p, &mut path)?;
    if let Some(l) = d.assumptions.keys().find(|l| d.free.contains(*l)) {
        return Err(ProofErrorKind::LabelClash(format!(
            "`{l}` is used both as an assumption label and as a numeric variable"
        ))
        .at(&[]));
    }
    let j = Judgement {
        assumptions: d.assumptions.into_iter().collect(),
        conclusion: d.conclusion,
        free_vars: d.free.into_iter().collect(),
    };
    Ok((j, Arc::unwrap_or_clone(d.term)))
}

/// The typing context of a judgement's realizer: labels at `|A_i|`, free
/// variables at `N`.
pub fn realizer_context(j: &Judgement) -> Context {
    let mut ctx = Context::new();
    for v in &j.free_vars {
        ctx.push(v.clone(), TypeExpr::Nat);
    }
    for (l, a) in &j.assumptions {
        ctx.push(l.clone(), realizer_type(a));
    }
    ctx
}

fn mismatch(msg: String) -> ProofErrorKind {
    ProofErrorKind::RuleMismatch(msg)
}

fn rc(t: Term) -> Arc<Term> {
    Arc::new(t)
}

fn wf_formula(env: &DefEnv, a: &Formula, path: &[usize]) -> Result<(), ProofError> {
    check_formula(env, &a.free_vars(), a)
        .map_err(|e| ProofErrorKind::IllFormed(format!("formula `{a}`: {e}")).at(path))
}

fn wf_nat_term(env: &DefEnv, t: &Term, path: &[usize]) -> Result<(), ProofError> {
    let mut ctx = Context::new();
    for v in t.free_vars() {
        ctx.push(v, TypeExpr::Nat);
    }
    match typecheck(env, &ctx, t) {
        Ok(TypeExpr::Nat) => Ok(()),
        Ok(ty) => Err(ProofErrorKind::IllFormed(format!("term `{t}` has type {ty}, expected N")).at(path)),
        Err(e) => Err(ProofErrorKind::IllFormed(format!("term `{t}`: {e}")).at(path)),
    }
}

fn expect_equiv(env: &DefEnv, found: &Formula, expected: &Formula, what: &str, path: &[usize]) -> Result<(), ProofError> {
    if formula_equiv(env, found, expected) {
        Ok(())
    } else {
        Err(mismatch(format!("{what}: expected `{expected}`, found `{found}`")).at(path))
    }
}

fn merge(
    env: &DefEnv,
    into: &mut BTreeMap<Name, Formula>,
    from: BTreeMap<Name, Formula>,
    path: &[usize],
) -> Result<(), ProofError> {
    for (l, a) in from {
        match into.get(&l) {
            Some(b) if !formula_equiv(env, &a, b) => {
                return Err(ProofErrorKind::LabelClash(format!(
                    "assumption `{l}` is used for both `{b}` and `{a}`"
                ))
                .at(path));
            }
            Some(_) => {}
            None => {
                into.insert(l, a);
            }
        }
    }
    Ok(())
}

fn discharge(
    env: &DefEnv,
    d: &mut Deco,
    label: &Name,
    expected: &Formula,
    path: &[usize],
) -> Result<(), ProofError> {
    if let Some(a) = d.assumptions.remove(label) {
        if !formula_equiv(env, &a, expected) {
            return Err(mismatch(format!(
                "assumption `{label}` stands for `{a}` but the rule discharges `{expected}`"
            ))
            .at(path));
        }
    }
    Ok(())
}

fn decorate(env: &DefEnv, p: &ProofNode, path: &mut Vec<usize>) -> Result<Deco, ProofError> {
    let sub = |i: usize, q: &ProofNode, path: &mut Vec<usize>| {
        path.push(i);
        let r = decorate(env, q, path);
        path.pop();
        r
    };
    use ProofNode::*;
    match p {
        Assume(label, a) => {
            wf_formula(env, a, path)?;
            Ok(Deco {
                assumptions: BTreeMap::from([(label.clone(), a.clone())]),
                conclusion: a.clone(),
                free: a.free_vars(),
                term: rc(Term::Var(label.clone())),
            })
        }
        AndI(l, r) => {
            let dl = sub(0, l, path)?;
            let dr = sub(1, r, path)?;
            let mut assumptions = dl.assumptions;
            merge(env, &mut assumptions, dr.assumptions, path)?;
            Ok(Deco {
                assumptions,
                conclusion: Formula::and(dl.conclusion, dr.conclusion),
                free: &dl.free | &dr.free,
                term: rc(Term::Pair(dl.term, dr.term)),
            })
        }
        AndE0(q) | AndE1(q) => {
            let d = sub(0, q, path)?;
            let Formula::And(a, b) = &d.conclusion else {
                return Err(mismatch(format!("expected a conjunction, found `{}`", d.conclusion)).at(path));
            };
            let (conclusion, term) = if matches!(p, AndE0(_)) {
                ((**a).clone(), Term::Proj0(d.term))
            } else {
                ((**b).clone(), Term::Proj1(d.term))
            };
            Ok(Deco { assumptions: d.assumptions, conclusion, free: d.free, term: rc(term) })
        }
        ImpI(label, a, q) => {
            wf_formula(env, a, path)?;
            let mut d = sub(0, q, path)?;
            discharge(env, &mut d, label, a, path)?;
            let mut free = d.free;
            free.extend(a.free_vars());
            Ok(Deco {
                assumptions: d.assumptions,
                conclusion: Formula::imp(a.clone(), d.conclusion),
                free,
                term: rc(Term::Lam(label.clone(), realizer_type(a), d.term)),
            })
        }
        ImpE(f, x) => {
            let df = sub(0, f, path)?;
            let dx = sub(1, x, path)?;
            let Formula::Imp(a, b) = &df.conclusion else {
                return Err(mismatch(format!("expected an implication, found `{}`", df.conclusion)).at(path));
            };
            expect_equiv(env, &dx.conclusion, a, "minor premise", path)?;
            let mut assumptions = df.assumptions.clone();
            merge(env, &mut assumptions, dx.assumptions, path)?;
            Ok(Deco {
                assumptions,
                conclusion: (**b).clone(),
                free: &df.free | &dx.free,
                term: rc(Term::App(df.term, dx.term)),
            })
        }
        OrI0(q, b) => {
            wf_formula(env, b, path)?;
            let d = sub(0, q, path)?;
            let mut free = d.free;
            free.extend(b.free_vars());
            Ok(Deco {
                conclusion: Formula::or(d.conclusion, b.clone()),
                term: rc(Term::pair(Term::True, Term::Pair(d.term, rc(dummy(&realizer_type(b)))))),
                assumptions: d.assumptions,
                free,
            })
        }
        OrI1(a, q) => {
            wf_formula(env, a, path)?;
            let d = sub(0, q, path)?;
            let mut free = d.free;
            free.extend(a.free_vars());
            Ok(Deco {
                conclusion: Formula::or(a.clone(), d.conclusion),
                term: rc(Term::pair(Term::False, Term::Pair(rc(dummy(&realizer_type(a))), d.term))),
                assumptions: d.assumptions,
                free,
            })
        }
        OrE(major, h1, q1, h2, q2) => {
            let dm = sub(0, major, path)?;
            let Formula::Or(a, b) = &dm.conclusion else {
                return Err(mismatch(format!("expected a disjunction, found `{}`", dm.conclusion)).at(path));
            };
            let mut d1 = sub(1, q1, path)?;
            let mut d2 = sub(2, q2, path)?;
            discharge(env, &mut d1, h1, a, path)?;
            discharge(env, &mut d2, h2, b, path)?;
            expect_equiv(env, &d2.conclusion, &d1.conclusion, "second branch conclusion", path)?;
            let mut assumptions = dm.assumptions.clone();
            merge(env, &mut assumptions, d1.assumptions, path)?;
            merge(env, &mut assumptions, d2.assumptions, path)?;
            let u = dm.term.clone();
            let ty_c = realizer_type(&d1.conclusion);
            let term = Term::if_(
                ty_c,
                Term::p0(u.clone()),
                Term::app(Term::Lam(h1.clone(), realizer_type(a), d1.term), Term::p1(u.clone())),
                Term::app(Term::Lam(h2.clone(), realizer_type(b), d2.term), Term::p2(u)),
            );
            let free = &(&dm.free | &d1.free) | &d2.free;
            Ok(Deco { assumptions, conclusion: d1.conclusion, free, term: rc(term) })
        }
        ForallI(x, q) => {
            let d = sub(0, q, path)?;
            if let Some((l, a)) = d.assumptions.iter().find(|(_, a)| a.free_vars().contains(x)) {
                return Err(ProofErrorKind::EigenvariableViolation(format!(
                    "`{x}` is free in the open assumption `{l}: {a}`"
                ))
                .at(path));
            }
            if d.assumptions.contains_key(x) {
                return Err(ProofErrorKind::LabelClash(format!("`{x}` is also an assumption label")).at(path));
            }
            let mut free = d.free;
            free.remove(x);
            Ok(Deco {
                assumptions: d.assumptions,
                conclusion: Formula::Forall(x.clone(), Box::new(d.conclusion)),
                free,
                term: rc(Term::Lam(x.clone(), TypeExpr::Nat, d.term)),
            })
        }
        ForallE(q, t) => {
            wf_nat_term(env, t, path)?;
            let d = sub(0, q, path)?;
            let Formula::Forall(x, a) = &d.conclusion else {
                return Err(mismatch(format!("expected a universal formula, found `{}`", d.conclusion)).at(path));
            };
            let conclusion = subst_formula(a, x, t);
            let mut free = d.free.clone();
            free.extend(t.free_vars());
            Ok(Deco { assumptions: d.assumptions, conclusion, free, term: rc(Term::App(d.term, t.clone())) })
        }
        ExistsI(t, target, q) => {
            wf_nat_term(env, t, path)?;
            wf_formula(env, target, path)?;
            let Formula::Exists(x, a) = target else {
                return Err(mismatch(format!("exists_i needs an existential formula, found `{target}`")).at(path));
            };
            let d = sub(0, q, path)?;
            expect_equiv(env, &d.conclusion, &subst_formula(a, x, t), "instance", path)?;
            let mut free = d.free;
            free.extend(t.free_vars());
            free.extend(target.free_vars());
            Ok(Deco {
                assumptions: d.assumptions,
                conclusion: target.clone(),
                free,
                term: rc(Term::Pair(t.clone(), d.term)),
            })
        }
        ExistsE(major, alpha, label, q) => {
            let dm = sub(0, major, path)?;
            let Formula::Exists(x, a) = &dm.conclusion else {
                return Err(mismatch(format!("expected an existential formula, found `{}`", dm.conclusion)).at(path));
            };
            let instance = subst_formula(a, x, &rc(Term::Var(alpha.clone())));
            let mut dq = sub(1, q, path)?;
            discharge(env, &mut dq, label, &instance, path)?;
            let viol = |what: String| Err(ProofErrorKind::EigenvariableViolation(what).at(path));
            if dq.conclusion.free_vars().contains(alpha) {
                return viol(format!("`{alpha}` is free in the conclusion `{}`", dq.conclusion));
            }
            if dm.conclusion.free_vars().contains(alpha) {
                return viol(format!("`{alpha}` is free in `{}`", dm.conclusion));
            }
            if let Some((l, b)) = dq.assumptions.iter().find(|(_, b)| b.free_vars().contains(alpha)) {
                return viol(format!("`{alpha}` is free in the open assumption `{l}: {b}`"));
            }
            if alpha == label || dq.assumptions.contains_key(alpha) || dm.assumptions.contains_key(alpha) {
                return Err(ProofErrorKind::LabelClash(format!("`{alpha}` is also an assumption label")).at(path));
            }
            let mut assumptions = dm.assumptions.clone();
            merge(env, &mut assumptions, dq.assumptions, path)?;
            let mut free_q = dq.free;
            free_q.remove(alpha);
            let u = dm.term.clone();
            let body = Term::lam(
                alpha.as_str(),
                TypeExpr::Nat,
                Term::Lam(label.clone(), realizer_type(&instance), dq.term),
            );
            let term = Term::apps(body, [Term::proj0(u.clone()), Term::proj1(u)]);
            Ok(Deco { assumptions, conclusion: dq.conclusion, free: &dm.free | &free_q, term: rc(term) })
        }
        Induction(base, step) => {
            let db = sub(0, base, path)?;
            let ds = sub(1, step, path)?;
            let Formula::Forall(x, body) = &ds.conclusion else {
                return Err(mismatch(format!("induction step must be `forall x. A(x) -> A(S x)`, found `{}`", ds.conclusion)).at(path));
            };
            let Formula::Imp(a, a_succ) = &**body else {
                return Err(mismatch(format!("induction step must be `forall x. A(x) -> A(S x)`, found `{}`", ds.conclusion)).at(path));
            };
            let xv = rc(Term::Var(x.clone()));
            expect_equiv(env, a_succ, &subst_formula(a, x, &rc(Term::Succ(xv))), "induction step conclusion", path)?;
            expect_equiv(env, &db.conclusion, &subst_formula(a, x, &rc(Term::Zero)), "induction base", path)?;
            let mut assumptions = db.assumptions;
            merge(env, &mut assumptions, ds.assumptions, path)?;
            let mut avoid = db.term.free_vars();
            avoid.extend(ds.term.free_vars());
            let alpha = fresh_name(x, &avoid);
            let term = Term::Lam(
                alpha.clone(),
                TypeExpr::Nat,
                rc(Term::Rec(realizer_type(a), db.term, ds.term, rc(Term::Var(alpha)))),
            );
            Ok(Deco {
                assumptions,
                conclusion: Formula::Forall(x.clone(), a.clone()),
                free: &db.free | &ds.free,
                term: rc(term),
            })
        }
        Post(rule, premises, conclusion) => {
            wf_formula(env, conclusion, path)?;
            if !conclusion.is_atomic() {
                return Err(ProofErrorKind::NonAtomicPostFormula(conclusion.to_string()).at(path));
            }
            let mut assumptions = BTreeMap::new();
            let mut free = conclusion.free_vars();
            let mut terms = Vec::new();
            let mut concls = Vec::new();
            for (i, q) in premises.iter().enumerate() {
                let d = sub(i, q, path)?;
                if !d.conclusion.is_atomic() {
                    path.push(i);
                    let e = ProofErrorKind::NonAtomicPostFormula(d.conclusion.to_string()).at(path);
                    path.pop();
                    return Err(e);
                }
                merge(env, &mut assumptions, d.assumptions, path)?;
                free.extend(d.free);
                terms.push(d.term);
                concls.push(d.conclusion);
            }
            check_post(env, *rule, &concls, conclusion).map_err(|k| k.at(path))?;
            let term = terms
                .into_iter()
                .reduce(|l, r| rc(Term::Join(l, r)))
                .unwrap_or_else(|| rc(Term::empty_state()));
            Ok(Deco { assumptions, conclusion: conclusion.clone(), free, term })
        }
        AtomicAxiom(a) => {
            wf_formula(env, a, path)?;
            if !a.is_atomic() {
                return Err(ProofErrorKind::NonAtomicPostFormula(a.to_string()).at(path));
            }
            let ok = [PostRule::Taut, PostRule::EqRefl, PostRule::LeqRefl, PostRule::LeqSucc, PostRule::LeqZero]
                .into_iter()
                .any(|r| check_post(env, r, &[], a).is_ok());
            if !ok {
                return Err(ProofErrorKind::InvalidPostRule(format!("`{a}` is not an atomic axiom")).at(path));
            }
            Ok(Deco {
                assumptions: BTreeMap::new(),
                conclusion: a.clone(),
                free: a.free_vars(),
                term: rc(Term::empty_state()),
            })
        }
        EM1(pred) => {
            let conclusion = em1_statement(env, pred).map_err(|k| k.at(path))?;
            let term = em1_term(env, pred).map_err(|k| k.at(path))?;
            Ok(Deco { assumptions: BTreeMap::new(), conclusion, free: BTreeSet::new(), term: rc(term) })
        }
        ChiAxiom(pred, args, t) => {
            let k = witness_arity(env, pred).map_err(|e| e.at(path))?;
            if args.len() != k {
                return Err(mismatch(format!("`{pred}` needs {k} arguments, got {}", args.len())).at(path));
            }
            let mut free = BTreeSet::new();
            for a in args.iter().chain(std::iter::once(t)) {
                wf_nat_term(env, a, path)?;
                free.extend(a.free_vars());
            }
            let mut all: Vec<Term> = args.iter().map(|a| (**a).clone()).collect();
            all.push((**t).clone());
            let conclusion = Formula::atomic(chi_axiom_head(pred, k), all.clone());
            let term = Term::apps(Term::AddClass(pred.clone()), all);
            Ok(Deco { assumptions: BTreeMap::new(), conclusion, free, term: rc(term) })
        }
        PhiAxiom(pred, args) => {
            let k = witness_arity(env, pred).map_err(|e| e.at(path))?;
            if args.len() != k {
                return Err(mismatch(format!("`{pred}` needs {k} arguments, got {}", args.len())).at(path));
            }
            let mut free = BTreeSet::new();
            for a in args {
                wf_nat_term(env, a, path)?;
                free.extend(a.free_vars());
            }
            let conclusion = Formula::atomic(phi_axiom_head(pred, k), args.iter().map(|a| (**a).clone()).collect());
            Ok(Deco { assumptions: BTreeMap::new(), conclusion, free, term: rc(Term::empty_state()) })
        }
    }
}

/// Number of non-witness arguments `k` of a predicate of arity `k + 1`.
fn witness_arity(env: &DefEnv, pred: &Name) -> Result<usize, ProofErrorKind> {
    match env.predicate_arity(pred) {
        Some(a) if a >= 2 => Ok(a - 1),
        Some(a) => Err(ProofErrorKind::IllFormed(format!("`{pred}` has arity {a}; at least 2 is required"))),
        None => Err(ProofErrorKind::IllFormed(format!("`{pred}` is not a predicate N^k -> Bool"))),
    }
}

fn param_names(k: usize, stem: &str) -> Vec<Name> {
    if k == 1 {
        vec![Name::new(stem)]
    } else {
        (1..=k).map(|i| Name::new(&format!("{stem}{i}"))).collect()
    }
}

fn lams(names: &[Name], body: Term) -> Term {
    names
        .iter()
        .rev()
        .fold(body, |acc, n| Term::Lam(n.clone(), TypeExpr::Nat, rc(acc)))
}

fn vars(names: &[Name]) -> Vec<Term> {
    names.iter().map(|n| Term::Var(n.clone())).collect()
}

/// `\x.. \y. imp (P x.. y) (X[P] x..)`
fn chi_axiom_head(pred: &Name, k: usize) -> Term {
    let xs = param_names(k, "x");
    let y = Name::new("y");
    let mut all = vars(&xs);
    all.push(Term::Var(y.clone()));
    let body = Term::apps(
        Term::def("imp"),
        [Term::apps(Term::DefRef(pred.clone()), all), Term::apps(Term::OracleX(pred.clone()), vars(&xs))],
    );
    let mut params = xs;
    params.push(y);
    lams(&params, body)
}

/// `\x.. imp (X[P] x..) (P x.. (Phi[P] x..))`
fn phi_axiom_head(pred: &Name, k: usize) -> Term {
    let xs = param_names(k, "x");
    let mut all = vars(&xs);
    all.push(Term::apps(Term::SkolemPhi(pred.clone()), vars(&xs)));
    let body = Term::apps(
        Term::def("imp"),
        [Term::apps(Term::OracleX(pred.clone()), vars(&xs)), Term::apps(Term::DefRef(pred.clone()), all)],
    );
    lams(&xs, body)
}

/// `forall x... (exists y. P(x..., y)) \/ (forall y. not P(x..., y))`.
pub fn em1_statement(env: &DefEnv, pred: &Name) -> Result<Formula, ProofErrorKind> {
    let k = witness_arity(env, pred)?;
    let xs = param_names(k, "x");
    let y = Name::new("y");
    let mut all = vars(&xs);
    all.push(Term::Var(y.clone()));
    let pos = Formula::atomic(Term::DefRef(pred.clone()), all.clone());
    let mut params = xs.clone();
    params.push(y.clone());
    let neg_head = lams(
        &params,
        Term::app(Term::def("not"), Term::apps(Term::DefRef(pred.clone()), all.clone())),
    );
    let neg = Formula::atomic(neg_head, all);
    let body = Formula::or(
        Formula::Exists(y.clone(), Box::new(pos)),
        Formula::Forall(y, Box::new(neg)),
    );
    Ok(xs.into_iter().rev().fold(body, |acc, x| Formula::Forall(x, Box::new(acc))))
}

/// `\a... <X[P] a..., <<Phi[P] a..., empty>, \n. Add[P] a... n>>`.
pub fn em1_term(env: &DefEnv, pred: &Name) -> Result<Term, ProofErrorKind> {
    let k = witness_arity(env, pred)?;
    let alphas = param_names(k, "a");
    let av = vars(&alphas);
    let mut add_args = av.clone();
    add_args.push(Term::var("n"));
    let body = Term::pair(
        Term::apps(Term::OracleX(pred.clone()), av.clone()),
        Term::pair(
            Term::pair(Term::apps(Term::SkolemPhi(pred.clone()), av), Term::empty_state()),
            Term::lam("n", TypeExpr::Nat, Term::apps(Term::AddClass(pred.clone()), add_args)),
        ),
    );
    Ok(lams(&alphas, body))
}

/// The canonical closed inhabitant of a type.
pub fn dummy(ty: &TypeExpr) -> Term {
    match ty {
        TypeExpr::Nat => Term::Zero,
        TypeExpr::Bool => Term::False,
        TypeExpr::State => Term::empty_state(),
        TypeExpr::Prod(a, b) => Term::pair(dummy(a), dummy(b)),
        TypeExpr::Arrow(a, b) => Term::lam("d", (**a).clone(), dummy(b)),
    }
}

/// Predicates kept opaque when canonicalizing atoms, so that the equality
/// and ordering rules can see them.
const OPAQUE: [&str; 2] = ["eq", "leq"];

const CANON_FUEL: u32 = 100_000;

/// Unfolds definitions, beta-reduces at the head, evaluates closed pure
/// subterms and simplifies `if`/recursion on constructors.
pub fn canonicalize(env: &DefEnv, t: &Term) -> Result<Term, ProofErrorKind> {
    let mut fuel = CANON_FUEL;
    canon(env, &rc(t.clone()), &mut fuel).map(Arc::unwrap_or_clone)
}

fn canon(env: &DefEnv, t: &Arc<Term>, fuel: &mut u32) -> Result<Arc<Term>, ProofErrorKind> {
    if *fuel == 0 {
        return Err(ProofErrorKind::Eval("canonicalization budget exhausted".into()));
    }
    *fuel -= 1;
    if t.is_closed() && classify(t) == Fragment::T {
        if let Ok(ty) = typecheck(env, &Context::new(), t) {
            if ty.is_atomic() {
                let nf = normalize(env, t, Strategy::Outermost, DEFAULT_STEP_CAP)
                    .map_err(|e: EvalError| ProofErrorKind::Eval(e.to_string()))?;
                return Ok(nf.term);
            }
        }
    }
    let (head, args) = t.spine();
    let args: Vec<Arc<Term>> = args.into_iter().cloned().collect();
    let reapply = |h: Arc<Term>, rest: &[Arc<Term>]| rc(Term::apps(h, rest.iter().cloned()));
    match head {
        Term::Lam(x, _, body) if !args.is_empty() => {
            let b = subst(body, x, &args[0]);
            canon(env, &reapply(b, &args[1..]), fuel)
        }
        Term::DefRef(n) if !OPAQUE.contains(&n.as_str()) => {
            let def = env
                .get(n)
                .ok_or_else(|| ProofErrorKind::IllFormed(format!("unknown definition `{n}`")))?;
            if !args.is_empty() || !def.ty.is_arrow() {
                canon(env, &reapply(def.body.clone(), &args), fuel)
            } else {
                Ok(t.clone())
            }
        }
        Term::If(ty, c, a, b) => {
            let c2 = canon(env, c, fuel)?;
            match &*c2 {
                Term::True => canon(env, &reapply(a.clone(), &args), fuel),
                Term::False => canon(env, &reapply(b.clone(), &args), fuel),
                _ => {
                    let h = rc(Term::If(ty.clone(), c2, canon(env, a, fuel)?, canon(env, b, fuel)?));
                    let args = canon_all(env, &args, fuel)?;
                    Ok(reapply(h, &args))
                }
            }
        }
        Term::Rec(ty, base, step, n) => {
            let n2 = canon(env, n, fuel)?;
            match &*n2 {
                Term::Zero => canon(env, &reapply(base.clone(), &args), fuel),
                Term::Succ(m) => {
                    let inner = rc(Term::Rec(ty.clone(), base.clone(), step.clone(), m.clone()));
                    let unfolded = rc(Term::app(Term::App(step.clone(), m.clone()), inner));
                    canon(env, &reapply(unfolded, &args), fuel)
                }
                _ => {
                    let h = rc(Term::Rec(ty.clone(), canon(env, base, fuel)?, step.clone(), n2));
                    let args = canon_all(env, &args, fuel)?;
                    Ok(reapply(h, &args))
                }
            }
        }
        _ if args.is_empty() => match head {
            Term::Lam(..) => Ok(t.clone()),
            _ => {
                let kids: Vec<Arc<Term>> = t.children().into_iter().cloned().collect();
                if kids.is_empty() {
                    return Ok(t.clone());
                }
                let kids = canon_all(env, &kids, fuel)?;
                Ok(rc(t.with_children(kids)))
            }
        },
        _ => {
            let h = canon(env, &rc(head.clone()), fuel)?;
            let args = canon_all(env, &args, fuel)?;
            Ok(reapply(h, &args))
        }
    }
}

fn canon_all(env: &DefEnv, ts: &[Arc<Term>], fuel: &mut u32) -> Result<Vec<Arc<Term>>, ProofErrorKind> {
    ts.iter().map(|t| canon(env, t, fuel)).collect()
}

/// Formula equality up to bound-variable renaming and canonicalization of
/// atoms.
pub fn formula_equiv(env: &DefEnv, a: &Formula, b: &Formula) -> bool {
    a.alpha_eq(b) || equiv_in(env, a, b, &mut Vec::new(), &mut Vec::new())
}

fn equiv_in(env: &DefEnv, a: &Formula, b: &Formula, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    match (a, b) {
        (Formula::Atomic { .. }, Formula::Atomic { .. }) => {
            let ca = a.atomic_term().map(|t| canonicalize(env, &t));
            let cb = b.atomic_term().map(|t| canonicalize(env, &t));
            match (ca, cb) {
                (Some(Ok(x)), Some(Ok(y))) => alpha_eq_in(&x, &y, ea, eb),
                _ => false,
            }
        }
        (Formula::And(a1, b1), Formula::And(a2, b2))
        | (Formula::Or(a1, b1), Formula::Or(a2, b2))
        | (Formula::Imp(a1, b1), Formula::Imp(a2, b2)) => {
            equiv_in(env, a1, a2, ea, eb) && equiv_in(env, b1, b2, ea, eb)
        }
        (Formula::Forall(x, a1), Formula::Forall(y, a2)) | (Formula::Exists(x, a1), Formula::Exists(y, a2)) => {
            ea.push(x.clone());
            eb.push(y.clone());
            let r = equiv_in(env, a1, a2, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        _ => false,
    }
}

/// Splits a canonical atom `P a b` with `P` one of the opaque predicates.
fn binary(t: &Term, pred: &str) -> Option<(Arc<Term>, Arc<Term>)> {
    let (head, args) = t.spine();
    match (head, args.as_slice()) {
        (Term::DefRef(n), [a, b]) if n.as_str() == pred => Some(((*a).clone(), (*b).clone())),
        _ => None,
    }
}

fn same(a: &Term, b: &Term) -> bool {
    a.alpha_eq(b)
}

/// `r` arises from `q` by replacing some occurrences of `a` with `b`.
fn congruent(q: &Term, r: &Term, a: &Term, b: &Term) -> bool {
    if same(q, r) || (same(q, a) && same(r, b)) {
        return true;
    }
    match (q, r) {
        (Term::Lam(x, tx, bq), Term::Lam(y, ty, br)) => x == y && tx == ty && congruent(bq, br, a, b),
        (Term::If(t1, ..), Term::If(t2, ..)) | (Term::Rec(t1, ..), Term::Rec(t2, ..)) if t1 != t2 => false,
        _ => {
            if std::mem::discriminant(q) != std::mem::discriminant(r) {
                return false;
            }
            let (cq, cr) = (q.children(), r.children());
            !cq.is_empty()
                && cq.len() == cr.len()
                && cq.iter().zip(cr.iter()).all(|(x, y)| congruent(x, y, a, b))
        }
    }
}

fn check_post(env: &DefEnv, rule: PostRule, premises: &[Formula], concl: &Formula) -> Result<(), ProofErrorKind> {
    let canon_of = |f: &Formula| -> Result<Term, ProofErrorKind> {
        let t = f
            .atomic_term()
            .ok_or_else(|| ProofErrorKind::NonAtomicPostFormula(f.to_string()))?;
        canonicalize(env, &t)
    };
    let ps: Vec<Term> = premises.iter().map(canon_of).collect::<Result<_, _>>()?;
    let c = canon_of(concl)?;
    // A closed conclusion that computes to true is an equation of the calculus.
    if c == Term::True {
        return Ok(());
    }
    let fail = |why: &str| {
        Err(ProofErrorKind::InvalidPostRule(format!("{rule} does not derive `{concl}`: {why}")))
    };
    let arity = |n: usize| -> Result<(), ProofErrorKind> {
        if ps.len() == n {
            Ok(())
        } else {
            Err(ProofErrorKind::InvalidPostRule(format!("{rule} takes {n} premises, got {}", ps.len())))
        }
    };
    let eq = |t: &Term| binary(t, "eq");
    let leq = |t: &Term| binary(t, "leq");
    match rule {
        PostRule::Taut => {
            if taut_consequence(env, &ps, &c)? {
                Ok(())
            } else {
                fail("not a tautological consequence")
            }
        }
        PostRule::EqRefl | PostRule::LeqRefl => {
            arity(0)?;
            let pick = if rule == PostRule::EqRefl { eq(&c) } else { leq(&c) };
            match pick {
                Some((a, b)) if same(&a, &b) => Ok(()),
                _ => fail("sides differ"),
            }
        }
        PostRule::EqSym => {
            arity(1)?;
            match (eq(&ps[0]), eq(&c)) {
                (Some((a, b)), Some((b2, a2))) if same(&a, &a2) && same(&b, &b2) => Ok(()),
                _ => fail("not the symmetric equation"),
            }
        }
        PostRule::EqTrans | PostRule::LeqTrans => {
            arity(2)?;
            let get = if rule == PostRule::EqTrans { eq } else { leq };
            match (get(&ps[0]), get(&ps[1]), get(&c)) {
                (Some((a, b)), Some((b2, c2)), Some((a3, c3)))
                    if same(&b, &b2) && same(&a, &a3) && same(&c2, &c3) =>
                {
                    Ok(())
                }
                _ => fail("premises do not chain"),
            }
        }
        PostRule::EqCong => {
            arity(2)?;
            match eq(&ps[0]) {
                Some((a, b)) if congruent(&ps[1], &c, &a, &b) => Ok(()),
                Some(_) => fail("conclusion is not obtained by rewriting the second premise"),
                None => fail("first premise is not an equation"),
            }
        }
        PostRule::LeqSucc => {
            arity(0)?;
            match leq(&c) {
                Some((a, b)) if matches!(&*b, Term::Succ(inner) if same(inner, &a)) => Ok(()),
                _ => fail("expected leq t (S t)"),
            }
        }
        PostRule::LeqZero => {
            arity(0)?;
            match leq(&c) {
                Some((a, _)) if matches!(*a, Term::Zero) => Ok(()),
                _ => fail("expected leq 0 t"),
            }
        }
        PostRule::LeqAntisym => {
            arity(2)?;
            match (leq(&ps[0]), leq(&ps[1]), eq(&c)) {
                (Some((a, b)), Some((b2, a2)), Some((a3, b3)))
                    if same(&a, &a2) && same(&b, &b2) && same(&a, &a3) && same(&b, &b3) =>
                {
                    Ok(())
                }
                _ => fail("expected leq a b, leq b a |- eq a b"),
            }
        }
    }
}

/// Propositional entailment over the maximal non-connective Boolean
/// subterms of the (canonicalized) premises and conclusion.
pub fn taut_consequence(env: &DefEnv, premises: &[Term], conclusion: &Term) -> Result<bool, ProofErrorKind> {
    let ps: Vec<Term> = premises.iter().map(|p| canonicalize(env, p)).collect::<Result<_, _>>()?;
    let c = canonicalize(env, conclusion)?;
    let mut atoms: Vec<Term> = Vec::new();
    for t in ps.iter().chain(std::iter::once(&c)) {
        collect_atoms(t, &mut atoms);
    }
    if atoms.len() > 20 {
        return Err(ProofErrorKind::VariableBudgetExceeded(atoms.len()));
    }
    for bits in 0u32..(1u32 << atoms.len()) {
        let val = |i: usize| bits & (1 << i) != 0;
        if ps.iter().all(|p| eval_prop(p, &atoms, &val)) && !eval_prop(&c, &atoms, &val) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn collect_atoms(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::True | Term::False => {}
        Term::If(TypeExpr::Bool, c, a, b) => {
            collect_atoms(c, out);
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        _ => {
            if !out.iter().any(|x| x.alpha_eq(t)) {
                out.push(t.clone());
            }
        }
    }
}

fn eval_prop(t: &Term, atoms: &[Term], val: &impl Fn(usize) -> bool) -> bool {
    match t {
        Term::True => true,
        Term::False => false,
        Term::If(TypeExpr::Bool, c, a, b) => {
            if eval_prop(c, atoms, val) {
                eval_prop(a, atoms, val)
            } else {
                eval_prop(b, atoms, val)
            }
        }
        _ => {
            let i = atoms
                .iter()
                .position(|x| x.alpha_eq(t))
                .expect("every atom was collected");
            val(i)
        }
    }
}
