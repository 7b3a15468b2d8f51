//! Types, terms and type checking for the calculus.
//!
//! One term language covers pure system T, its extension with state
//! constants, the classical extension with oracles and Skolem maps, and the
//! learning extension with their state-indexed approximations. Which of these
//! a term lives in is reported by [`classify`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::states::StateId;

/// An interned-by-value identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Name {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Name {
        Name::new(s)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl serde::Serialize for Name {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// Simple types: `N`, `Bool`, the state type `S`, products and arrows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Nat,
    Bool,
    State,
    Prod(Box<TypeExpr>, Box<TypeExpr>),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
}

impl TypeExpr {
    pub fn arrow(dom: TypeExpr, cod: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn prod(left: TypeExpr, right: TypeExpr) -> TypeExpr {
        TypeExpr::Prod(Box::new(left), Box::new(right))
    }

    /// `N -> ... -> N -> cod` with `k` arguments.
    pub fn nat_to(k: usize, cod: TypeExpr) -> TypeExpr {
        (0..k).fold(cod, |acc, _| TypeExpr::arrow(TypeExpr::Nat, acc))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, TypeExpr::Nat | TypeExpr::Bool | TypeExpr::State)
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, TypeExpr::Arrow(..))
    }
}

/// Terms of the calculus.
///
/// `If` and `Rec` carry their result type. The six constant families are
/// indexed by the name of a predicate bound in the [`DefEnv`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Lam(Name, TypeExpr, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    Pair(Arc<Term>, Arc<Term>),
    Proj0(Arc<Term>),
    Proj1(Arc<Term>),
    Zero,
    Succ(Arc<Term>),
    True,
    False,
    If(TypeExpr, Arc<Term>, Arc<Term>, Arc<Term>),
    /// `Rec(ty, base, step, n)`: `step : N -> ty -> ty`.
    Rec(TypeExpr, Arc<Term>, Arc<Term>, Arc<Term>),
    StateConst(StateId),
    Join(Arc<Term>, Arc<Term>),
    /// Ideal oracle: `N^k -> Bool`.
    OracleX(Name),
    /// Ideal Skolem map: `N^k -> N`.
    SkolemPhi(Name),
    /// Classical learner: `N^(k+1) -> S`.
    AddClass(Name),
    /// `S -> N^k -> Bool`.
    ChiApprox(Name),
    /// `S -> N^k -> N`.
    PhiApprox(Name),
    /// `S -> N^(k+1) -> S`.
    AddApprox(Name),
    DefRef(Name),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Name::new(name))
    }

    pub fn def(name: &str) -> Term {
        Term::DefRef(Name::new(name))
    }

    pub fn lam(x: &str, ty: TypeExpr, body: impl Into<Arc<Term>>) -> Term {
        Term::Lam(Name::new(x), ty, body.into())
    }

    pub fn app(f: impl Into<Arc<Term>>, a: impl Into<Arc<Term>>) -> Term {
        Term::App(f.into(), a.into())
    }

    pub fn apps<I>(head: impl Into<Arc<Term>>, args: I) -> Term
    where
        I: IntoIterator,
        I::Item: Into<Arc<Term>>,
    {
        let mut acc: Arc<Term> = head.into();
        for a in args {
            acc = Arc::new(Term::App(acc, a.into()));
        }
        Arc::unwrap_or_clone(acc)
    }

    pub fn pair(l: impl Into<Arc<Term>>, r: impl Into<Arc<Term>>) -> Term {
        Term::Pair(l.into(), r.into())
    }

    pub fn proj0(t: impl Into<Arc<Term>>) -> Term {
        Term::Proj0(t.into())
    }

    pub fn proj1(t: impl Into<Arc<Term>>) -> Term {
        Term::Proj1(t.into())
    }

    pub fn succ(t: impl Into<Arc<Term>>) -> Term {
        Term::Succ(t.into())
    }

    pub fn numeral(k: u64) -> Term {
        let mut t = Arc::new(Term::Zero);
        for _ in 0..k {
            t = Arc::new(Term::Succ(t));
        }
        Arc::unwrap_or_clone(t)
    }

    pub fn if_(
        ty: TypeExpr,
        c: impl Into<Arc<Term>>,
        a: impl Into<Arc<Term>>,
        b: impl Into<Arc<Term>>,
    ) -> Term {
        Term::If(ty, c.into(), a.into(), b.into())
    }

    pub fn rec(
        ty: TypeExpr,
        base: impl Into<Arc<Term>>,
        step: impl Into<Arc<Term>>,
        n: impl Into<Arc<Term>>,
    ) -> Term {
        Term::Rec(ty, base.into(), step.into(), n.into())
    }

    pub fn join(l: impl Into<Arc<Term>>, r: impl Into<Arc<Term>>) -> Term {
        Term::Join(l.into(), r.into())
    }

    pub fn empty_state() -> Term {
        Term::StateConst(StateId::EMPTY)
    }

    /// Ternary projections on `A * (B * C)`.
    pub fn p0(t: impl Into<Arc<Term>>) -> Term {
        Term::Proj0(t.into())
    }

    pub fn p1(t: impl Into<Arc<Term>>) -> Term {
        Term::Proj0(Arc::new(Term::Proj1(t.into())))
    }

    pub fn p2(t: impl Into<Arc<Term>>) -> Term {
        Term::Proj1(Arc::new(Term::Proj1(t.into())))
    }

    pub fn as_numeral(&self) -> Option<u64> {
        let mut k = 0u64;
        let mut t = self;
        loop {
            match t {
                Term::Zero => return Some(k),
                Term::Succ(inner) => {
                    k += 1;
                    t = inner;
                }
                _ => return None,
            }
        }
    }

    /// Splits an application spine into its head and arguments.
    pub fn spine(&self) -> (&Term, Vec<&Arc<Term>>) {
        let mut args = Vec::new();
        let mut t = self;
        while let Term::App(f, a) = t {
            args.push(a);
            t = f;
        }
        args.reverse();
        (t, args)
    }

    /// Direct subterms, in left-to-right order. Lambda bodies are included.
    pub fn children(&self) -> Vec<&Arc<Term>> {
        match self {
            Term::Lam(_, _, b) => vec![b],
            Term::App(a, b) | Term::Pair(a, b) | Term::Join(a, b) => vec![a, b],
            Term::Proj0(a) | Term::Proj1(a) | Term::Succ(a) => vec![a],
            Term::If(_, a, b, c) | Term::Rec(_, a, b, c) => vec![a, b, c],
            _ => vec![],
        }
    }

    /// Rebuilds this node with new children (same arity and order as
    /// [`Term::children`]).
    pub(crate) fn with_children(&self, mut kids: Vec<Arc<Term>>) -> Term {
        let mut next = || kids.remove(0);
        match self {
            Term::Lam(x, ty, _) => Term::Lam(x.clone(), ty.clone(), next()),
            Term::App(..) => Term::App(next(), next()),
            Term::Pair(..) => Term::Pair(next(), next()),
            Term::Join(..) => Term::Join(next(), next()),
            Term::Proj0(_) => Term::Proj0(next()),
            Term::Proj1(_) => Term::Proj1(next()),
            Term::Succ(_) => Term::Succ(next()),
            Term::If(ty, ..) => Term::If(ty.clone(), next(), next(), next()),
            Term::Rec(ty, ..) => Term::Rec(ty.clone(), next(), next(), next()),
            leaf => leaf.clone(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Pre-order traversal over every subterm, including `self`.
    pub fn any(&self, pred: &mut impl FnMut(&Term) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_eq_in(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, _, b) => {
            bound.push(x.clone());
            collect_free(b, bound, out);
            bound.pop();
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

/// Alpha-equivalence relative to binder stacks; used by formulas as well.
pub(crate) fn alpha_eq_in(a: &Term, b: &Term, ea: &mut Vec<Name>, eb: &mut Vec<Name>) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) => {
            let ix = ea.iter().rposition(|n| n == x);
            let iy = eb.iter().rposition(|n| n == y);
            match (ix, iy) {
                (None, None) => x == y,
                (Some(i), Some(j)) => i == j,
                _ => false,
            }
        }
        (Term::Lam(x, tx, bx), Term::Lam(y, ty, by)) => {
            if tx != ty {
                return false;
            }
            ea.push(x.clone());
            eb.push(y.clone());
            let r = alpha_eq_in(bx, by, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        (Term::If(t1, ..), Term::If(t2, ..)) | (Term::Rec(t1, ..), Term::Rec(t2, ..))
            if t1 != t2 =>
        {
            false
        }
        _ => {
            if std::mem::discriminant(a) != std::mem::discriminant(b) {
                return false;
            }
            let (ca, cb) = (a.children(), b.children());
            if ca.is_empty() {
                return a == b;
            }
            ca.len() == cb.len()
                && ca.iter().zip(cb.iter()).all(|(x, y)| alpha_eq_in(x, y, ea, eb))
        }
    }
}

/// A name based on `base` that is not in `avoid`.
pub fn fresh_name(base: &Name, avoid: &BTreeSet<Name>) -> Name {
    if !avoid.contains(base) {
        return base.clone();
    }
    let stem = base.as_str().trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    (1u64..)
        .map(|i| Name::new(&format!("{stem}{i}")))
        .find(|n| !avoid.contains(n))
        .expect("unbounded supply of names")
}

/// Capture-avoiding substitution `t[u/x]`.
pub fn subst(t: &Arc<Term>, x: &Name, u: &Arc<Term>) -> Arc<Term> {
    let fv_u = u.free_vars();
    subst_in(t, x, u, &fv_u)
}

fn subst_in(t: &Arc<Term>, x: &Name, u: &Arc<Term>, fv_u: &BTreeSet<Name>) -> Arc<Term> {
    match &**t {
        Term::Var(y) => {
            if y == x {
                u.clone()
            } else {
                t.clone()
            }
        }
        Term::Lam(y, ty, body) => {
            if y == x {
                return t.clone();
            }
            if fv_u.contains(y) {
                let fv_body = body.free_vars();
                if !fv_body.contains(x) {
                    return t.clone();
                }
                let mut avoid = fv_u.clone();
                avoid.extend(fv_body);
                avoid.insert(x.clone());
                let y2 = fresh_name(y, &avoid);
                let renamed = subst_in(body, y, &Arc::new(Term::Var(y2.clone())), &BTreeSet::new());
                Arc::new(Term::Lam(y2, ty.clone(), subst_in(&renamed, x, u, fv_u)))
            } else {
                let nb = subst_in(body, x, u, fv_u);
                if Arc::ptr_eq(&nb, body) {
                    t.clone()
                } else {
                    Arc::new(Term::Lam(y.clone(), ty.clone(), nb))
                }
            }
        }
        _ => map_children(t, |c| subst_in(c, x, u, fv_u)),
    }
}

/// Applies `f` to every direct child; returns `t` itself if nothing changed.
pub(crate) fn map_children(t: &Arc<Term>, mut f: impl FnMut(&Arc<Term>) -> Arc<Term>) -> Arc<Term> {
    let kids = t.children();
    if kids.is_empty() {
        return t.clone();
    }
    let new: Vec<Arc<Term>> = kids.iter().map(|c| f(c)).collect();
    if new.iter().zip(kids.iter()).all(|(a, b)| Arc::ptr_eq(a, b)) {
        t.clone()
    } else {
        Arc::new(t.with_children(new))
    }
}

/// Which extension of system T a term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fragment {
    /// Pure system T.
    T,
    /// T with state constants.
    TS,
    /// Adds oracles, Skolem maps and classical learners.
    TClass,
    /// Adds the state-indexed approximations.
    TLearn,
    /// Both ideal and approximated constants occur.
    Mixed,
}

impl Fragment {
    /// Least upper bound: `T < TS < {TClass, TLearn} < Mixed`.
    pub fn join(self, other: Fragment) -> Fragment {
        use Fragment::*;
        match (self, other) {
            (a, b) if a == b => a,
            (T, x) | (x, T) => x,
            (TS, x) | (x, TS) => x,
            _ => Mixed,
        }
    }
}

fn node_fragment(t: &Term) -> Fragment {
    match t {
        // The union constant belongs to both constant families.
        Term::StateConst(_) | Term::Join(..) => Fragment::TS,
        Term::OracleX(_) | Term::SkolemPhi(_) | Term::AddClass(_) => Fragment::TClass,
        Term::ChiApprox(_) | Term::PhiApprox(_) | Term::AddApprox(_) => Fragment::TLearn,
        _ => Fragment::T,
    }
}

pub fn classify(t: &Term) -> Fragment {
    t.children()
        .into_iter()
        .fold(node_fragment(t), |acc, c| acc.join(classify(c)))
}

/// True iff every state constant occurring in `t` denotes the empty state.
pub fn has_state_empty(t: &Term) -> bool {
    !t.any(&mut |s| matches!(s, Term::StateConst(id) if !id.is_empty()))
}

pub fn contains_ideal_constants(t: &Term) -> bool {
    t.any(&mut |s| matches!(s, Term::OracleX(_) | Term::SkolemPhi(_) | Term::AddClass(_)))
}

pub fn contains_approximations(t: &Term) -> bool {
    t.any(&mut |s| matches!(s, Term::ChiApprox(_) | Term::PhiApprox(_) | Term::AddApprox(_)))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("unknown definition `{0}`")]
    UnknownDefinition(Name),
    #[error("`{0}` is not a predicate N^k -> Bool with k >= 1")]
    NotAPredicate(Name),
    #[error("type mismatch in `{term}`: expected {expected}, found {found}")]
    Mismatch {
        term: String,
        expected: TypeExpr,
        found: TypeExpr,
    },
    #[error("`{term}` has type {ty}, which is not a function type")]
    NotAFunction { term: String, ty: TypeExpr },
    #[error("`{term}` has type {ty}, which is not a product type")]
    NotAPair { term: String, ty: TypeExpr },
}

/// A closed, well-typed definition of pure system T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub ty: TypeExpr,
    pub body: Arc<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefError {
    #[error("`{0}` is already defined")]
    Redefined(Name),
    #[error("body of `{0}` is not closed")]
    NotClosed(Name),
    #[error("body of `{0}` must be a term of pure system T")]
    Impure(Name),
    #[error("ill-typed definition `{name}`: {source}")]
    Type { name: Name, source: TypeError },
}

/// Named definitions, including the primitive recursive predicates.
#[derive(Clone, Debug, Default)]
pub struct DefEnv {
    defs: BTreeMap<Name, Definition>,
}

impl DefEnv {
    pub fn new() -> DefEnv {
        DefEnv::default()
    }

    pub fn define(&mut self, name: Name, ty: TypeExpr, body: Arc<Term>) -> Result<(), DefError> {
        if self.defs.contains_key(&name) {
            return Err(DefError::Redefined(name));
        }
        if !body.is_closed() {
            return Err(DefError::NotClosed(name));
        }
        if classify(&body) != Fragment::T {
            return Err(DefError::Impure(name));
        }
        let found = typecheck(self, &Context::new(), &body)
            .map_err(|source| DefError::Type { name: name.clone(), source })?;
        if found != ty {
            return Err(DefError::Type {
                name: name.clone(),
                source: TypeError::Mismatch { term: body.to_string(), expected: ty, found },
            });
        }
        self.defs.insert(name, Definition { ty, body });
        Ok(())
    }

    pub fn get(&self, name: &Name) -> Option<&Definition> {
        self.defs.get(name)
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.defs.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Definition)> {
        self.defs.iter()
    }

    /// Number of arguments of a predicate `N^k -> Bool`, `k >= 1`.
    pub fn predicate_arity(&self, name: &Name) -> Option<usize> {
        let mut ty = &self.defs.get(name)?.ty;
        let mut k = 0;
        while let TypeExpr::Arrow(dom, cod) = ty {
            if **dom != TypeExpr::Nat {
                return None;
            }
            k += 1;
            ty = cod;
        }
        (k >= 1 && *ty == TypeExpr::Bool).then_some(k)
    }
}

/// Typing context: a stack of variable bindings, innermost last.
#[derive(Clone, Debug, Default)]
pub struct Context {
    vars: Vec<(Name, TypeExpr)>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn with(mut self, name: Name, ty: TypeExpr) -> Context {
        self.vars.push((name, ty));
        self
    }

    pub fn push(&mut self, name: Name, ty: TypeExpr) {
        self.vars.push((name, ty));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    pub fn lookup(&self, name: &Name) -> Option<&TypeExpr> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

/// Type of one of the six predicate-indexed constants.
pub fn constant_type(env: &DefEnv, c: &Term) -> Result<TypeExpr, TypeError> {
    let pred = match c {
        Term::OracleX(p)
        | Term::SkolemPhi(p)
        | Term::AddClass(p)
        | Term::ChiApprox(p)
        | Term::PhiApprox(p)
        | Term::AddApprox(p) => p,
        _ => unreachable!("constant_type called on a non-constant"),
    };
    let arity = env
        .predicate_arity(pred)
        .ok_or_else(|| TypeError::NotAPredicate(pred.clone()))?;
    let k = arity - 1;
    use TypeExpr::*;
    Ok(match c {
        Term::OracleX(_) => TypeExpr::nat_to(k, Bool),
        Term::SkolemPhi(_) => TypeExpr::nat_to(k, Nat),
        Term::AddClass(_) => TypeExpr::nat_to(arity, State),
        Term::ChiApprox(_) => TypeExpr::arrow(State, TypeExpr::nat_to(k, Bool)),
        Term::PhiApprox(_) => TypeExpr::arrow(State, TypeExpr::nat_to(k, Nat)),
        Term::AddApprox(_) => TypeExpr::arrow(State, TypeExpr::nat_to(arity, State)),
        _ => unreachable!(),
    })
}

/// Returns the unique type of `t` in `ctx`.
pub fn typecheck(env: &DefEnv, ctx: &Context, t: &Term) -> Result<TypeExpr, TypeError> {
    let mut ctx = ctx.clone();
    infer(env, &mut ctx, t)
}

fn expect(t: &Term, expected: &TypeExpr, found: TypeExpr) -> Result<(), TypeError> {
    if *expected == found {
        Ok(())
    } else {
        Err(TypeError::Mismatch { term: t.to_string(), expected: expected.clone(), found })
    }
}

fn infer(env: &DefEnv, ctx: &mut Context, t: &Term) -> Result<TypeExpr, TypeError> {
    use TypeExpr::*;
    match t {
        Term::Var(x) => ctx.lookup(x).cloned().ok_or_else(|| TypeError::UnboundVariable(x.clone())),
        Term::Lam(x, ty, body) => {
            ctx.push(x.clone(), ty.clone());
            let cod = infer(env, ctx, body);
            ctx.pop();
            Ok(TypeExpr::arrow(ty.clone(), cod?))
        }
        Term::App(f, a) => match infer(env, ctx, f)? {
            Arrow(dom, cod) => {
                let ta = infer(env, ctx, a)?;
                expect(a, &dom, ta)?;
                Ok(*cod)
            }
            ty => Err(TypeError::NotAFunction { term: f.to_string(), ty }),
        },
        Term::Pair(l, r) => Ok(TypeExpr::prod(infer(env, ctx, l)?, infer(env, ctx, r)?)),
        Term::Proj0(p) | Term::Proj1(p) => match infer(env, ctx, p)? {
            Prod(l, r) => Ok(if matches!(t, Term::Proj0(_)) { *l } else { *r }),
            ty => Err(TypeError::NotAPair { term: p.to_string(), ty }),
        },
        Term::Zero => Ok(Nat),
        Term::Succ(n) => {
            let tn = infer(env, ctx, n)?;
            expect(n, &Nat, tn)?;
            Ok(Nat)
        }
        Term::True | Term::False => Ok(Bool),
        Term::If(ty, c, a, b) => {
            let tc = infer(env, ctx, c)?;
            expect(c, &Bool, tc)?;
            let ta = infer(env, ctx, a)?;
            expect(a, ty, ta)?;
            let tb = infer(env, ctx, b)?;
            expect(b, ty, tb)?;
            Ok(ty.clone())
        }
        Term::Rec(ty, base, step, n) => {
            let tb = infer(env, ctx, base)?;
            expect(base, ty, tb)?;
            let ts = infer(env, ctx, step)?;
            expect(step, &TypeExpr::arrow(Nat, TypeExpr::arrow(ty.clone(), ty.clone())), ts)?;
            let tn = infer(env, ctx, n)?;
            expect(n, &Nat, tn)?;
            Ok(ty.clone())
        }
        Term::StateConst(_) => Ok(State),
        Term::Join(l, r) => {
            let tl = infer(env, ctx, l)?;
            expect(l, &State, tl)?;
            let tr = infer(env, ctx, r)?;
            expect(r, &State, tr)?;
            Ok(State)
        }
        Term::OracleX(_)
        | Term::SkolemPhi(_)
        | Term::AddClass(_)
        | Term::ChiApprox(_)
        | Term::PhiApprox(_)
        | Term::AddApprox(_) => constant_type(env, t),
        Term::DefRef(n) => env
            .get(n)
            .map(|d| d.ty.clone())
            .ok_or_else(|| TypeError::UnknownDefinition(n.clone())),
    }
}
