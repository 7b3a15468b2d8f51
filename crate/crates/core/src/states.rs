//! Atoms, states of knowledge and the consistent union.
//!
//! A [`State`] is kept as a sorted vector of atoms, so structural equality is
//! set equality. States are interned into [`StateId`] handles so that terms
//! can carry them as constants.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use serde::Serialize;
use thiserror::Error;

use crate::eval::{eval_atomic, Value};
use crate::kernel::{DefEnv, Name, Term};

/// `<P, args, witness>`: a recorded witness for `exists y. P(args, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Atom {
    pub pred: Name,
    pub args: Vec<u64>,
    pub witness: u64,
}

impl Atom {
    /// Builds an atom without evaluating the predicate. Use [`mk_atom`] when
    /// the truth of `P args witness` has not been established otherwise.
    pub fn unchecked(pred: Name, args: Vec<u64>, witness: u64) -> Atom {
        Atom { pred, args, witness }
    }

    fn key(&self) -> (&Name, &[u64]) {
        (&self.pred, &self.args)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")={}", self.witness)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtomError {
    #[error("{pred}({args:?}, {witness}) is false")]
    PredicateFalse { pred: Name, args: Vec<u64>, witness: u64 },
    #[error("predicate `{pred}` takes {expected} witness arguments, got {found}")]
    ArityMismatch { pred: Name, expected: usize, found: usize },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(Name),
    #[error("evaluating predicate failed: {0}")]
    Eval(String),
}

/// Two atoms conflict iff they share predicate and arguments but disagree on
/// the witness.
pub fn atoms_consistent(a: &Atom, b: &Atom) -> bool {
    a.key() != b.key() || a.witness == b.witness
}

fn check_arity(env: &DefEnv, p: &Name, nargs: usize) -> Result<(), AtomError> {
    let arity = env
        .predicate_arity(p)
        .ok_or_else(|| AtomError::UnknownPredicate(p.clone()))?;
    if arity < 2 || nargs != arity - 1 {
        return Err(AtomError::ArityMismatch {
            pred: p.clone(),
            expected: arity.saturating_sub(1),
            found: nargs,
        });
    }
    Ok(())
}

fn holds(env: &DefEnv, p: &Name, args: &[u64], m: u64) -> Result<bool, AtomError> {
    let t = Term::apps(
        Term::DefRef(p.clone()),
        args.iter().chain(std::iter::once(&m)).map(|&k| Term::numeral(k)),
    );
    match eval_atomic(env, &t) {
        Ok(Value::Boolean(b)) => Ok(b),
        Ok(other) => Err(AtomError::Eval(format!("predicate returned {other}"))),
        Err(e) => Err(AtomError::Eval(e.to_string())),
    }
}

/// Returns the atom iff `P args m` evaluates to `true`.
pub fn mk_atom(env: &DefEnv, p: &Name, args: &[u64], m: u64) -> Result<Atom, AtomError> {
    check_arity(env, p, args.len())?;
    if holds(env, p, args, m)? {
        Ok(Atom::unchecked(p.clone(), args.to_vec(), m))
    } else {
        Err(AtomError::PredicateFalse { pred: p.clone(), args: args.to_vec(), witness: m })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("atoms {0} and {1} are inconsistent")]
pub struct InconsistentState(pub Atom, pub Atom);

/// A finite set of pairwise consistent atoms, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct State {
    atoms: Vec<Atom>,
}

impl State {
    pub fn empty() -> State {
        State::default()
    }

    /// Sorts, removes duplicates and validates consistency.
    pub fn new(mut atoms: Vec<Atom>) -> Result<State, InconsistentState> {
        atoms.sort();
        atoms.dedup();
        for w in atoms.windows(2) {
            if !atoms_consistent(&w[0], &w[1]) {
                return Err(InconsistentState(w[0].clone(), w[1].clone()));
            }
        }
        Ok(State { atoms })
    }

    pub fn singleton(a: Atom) -> State {
        State { atoms: vec![a] }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.binary_search(a).is_ok()
    }

    /// The witness recorded for `(pred, args)`, if any.
    pub fn lookup(&self, pred: &Name, args: &[u64]) -> Option<u64> {
        // Atoms are ordered by (pred, args, witness) and keys are unique.
        let i = self.atoms.partition_point(|a| a.key() < (pred, args));
        self.atoms
            .get(i)
            .filter(|a| a.key() == (pred, args))
            .map(|a| a.witness)
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.atoms.iter().all(|a| other.contains(a))
    }

    /// `self ∪ other` is a state.
    pub fn consistent_with(&self, other: &State) -> bool {
        other
            .atoms
            .iter()
            .all(|b| self.lookup(&b.pred, &b.args).is_none_or(|m| m == b.witness))
    }

    /// No `(pred, args)` pair is recorded in both states.
    pub fn disjoint(&self, other: &State) -> bool {
        other.atoms.iter().all(|b| self.lookup(&b.pred, &b.args).is_none())
    }

    /// Plain set union; fails if the result is inconsistent.
    pub fn union(&self, other: &State) -> Result<State, InconsistentState> {
        State::new(self.atoms.iter().chain(other.atoms.iter()).cloned().collect())
    }

    /// Left-biased consistent union: atoms of `other` that conflict with
    /// `self` are dropped.
    pub fn cunion(&self, other: &State) -> State {
        let mut atoms = self.atoms.clone();
        atoms.extend(
            other
                .atoms
                .iter()
                .filter(|b| self.lookup(&b.pred, &b.args).is_none())
                .cloned(),
        );
        atoms.sort();
        State { atoms }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("empty");
        }
        f.write_str("state{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

pub fn cunion(s1: &State, s2: &State) -> State {
    s1.cunion(s2)
}

/// `(true, m)` if `<p, args, m>` is in `s`, else `(false, 0)`.
pub fn chi_phi_lookup(s: &State, p: &Name, args: &[u64]) -> (bool, u64) {
    match s.lookup(p, args) {
        Some(m) => (true, m),
        None => (false, 0),
    }
}

/// The state denoted by `add_P s args m`.
pub fn add_step(env: &DefEnv, s: &State, p: &Name, args: &[u64], m: u64) -> Result<State, AtomError> {
    check_arity(env, p, args.len())?;
    if s.lookup(p, args).is_some() || !holds(env, p, args, m)? {
        return Ok(State::empty());
    }
    Ok(State::singleton(Atom::unchecked(p.clone(), args.to_vec(), m)))
}

/// Interned handle of a [`State`]. Equal states always share one id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u32);

struct Interner {
    states: Vec<Arc<State>>,
    ids: HashMap<Arc<State>, StateId>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    let empty = Arc::new(State::empty());
    RwLock::new(Interner {
        states: vec![empty.clone()],
        ids: HashMap::from([(empty, StateId::EMPTY)]),
    })
});

impl StateId {
    pub const EMPTY: StateId = StateId(0);

    pub fn intern(s: State) -> StateId {
        if let Some(id) = INTERNER.read().expect("interner poisoned").ids.get(&s) {
            return *id;
        }
        let mut w = INTERNER.write().expect("interner poisoned");
        // Another writer may have won the race between the two locks.
        if let Some(id) = w.ids.get(&s) {
            return *id;
        }
        let id = StateId(u32::try_from(w.states.len()).expect("state interner overflow"));
        let s = Arc::new(s);
        w.states.push(s.clone());
        w.ids.insert(s, id);
        id
    }

    pub fn get(self) -> Arc<State> {
        INTERNER.read().expect("interner poisoned").states[self.0 as usize].clone()
    }

    pub fn is_empty(self) -> bool {
        self == StateId::EMPTY
    }
}

impl From<State> for StateId {
    fn from(s: State) -> StateId {
        StateId::intern(s)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.get())
    }
}
