//! Fixtures shared by the integration tests and the acceptance runner:
//! fixed atom and state pools, a seeded generator of closed terms, the
//! corpus loader and the checks behind each acceptance criterion.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::Arc;

use learnreal::eval::{approximate, normalize, EvalError, Query, Strategy, Value, DEFAULT_STEP_CAP};
use learnreal::frontend::{parse_formula, parse_proof, prelude_env};
use learnreal::kernel::{classify, typecheck, Context, DefEnv, Fragment, Name, Term, TypeExpr};
use learnreal::learning::{check_converges, fixed_point, pi02_witness, realizes_at, Verdict, WiChain};
use learnreal::logic::{realizer_type, Formula};
use learnreal::proofs::{check_and_extract, em1_statement, em1_term};
use learnreal::states::{Atom, State, StateId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed_2024;

pub fn env() -> DefEnv {
    prelude_env()
}

pub fn atom(p: &str, args: &[u64], m: u64) -> Atom {
    Atom::unchecked(Name::new(p), args.to_vec(), m)
}

pub fn state(atoms: &[Atom]) -> State {
    State::new(atoms.to_vec()).expect("fixture states are consistent")
}

/// Six true atoms with two conflicting pairs (same key, different witness).
pub fn atom_pool() -> Vec<Atom> {
    vec![
        atom("GEQ", &[0], 0),
        atom("GEQ", &[1], 1),
        atom("GEQ", &[1], 4),
        atom("GEQ", &[2], 3),
        atom("GEQ", &[2], 5),
        atom("NEXT", &[2], 3),
    ]
}

/// Every consistent state of at most three atoms from [`atom_pool`].
pub fn small_states() -> Vec<State> {
    let pool = atom_pool();
    let n = pool.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() > 3 {
            continue;
        }
        let atoms: Vec<Atom> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| pool[i].clone()).collect();
        if let Ok(s) = State::new(atoms) {
            out.push(s);
        }
    }
    out
}

/// The eight states used by the realizability and safety checks.
pub fn state_pool() -> Vec<StateId> {
    let states = vec![
        State::empty(),
        state(&[atom("GEQ", &[2], 3)]),
        state(&[atom("NEXT", &[2], 3)]),
        state(&[atom("GEQ", &[2], 3), atom("NEXT", &[2], 3)]),
        state(&[atom("GEQ", &[0], 0), atom("GEQ", &[1], 1)]),
        state(&[atom("GEQ", &[2], 5), atom("NEXT", &[0], 1)]),
        state(&[atom("NEXT", &[0], 1), atom("NEXT", &[1], 2), atom("NEXT", &[3], 4)]),
        state(&[atom("GEQ", &[1], 4), atom("NEXT", &[5], 6), atom("GEQ", &[4], 9)]),
    ];
    states.into_iter().map(StateId::intern).collect()
}

const PREDS: [&str; 2] = ["GEQ", "NEXT"];

/// Seeded generator of closed, well-typed terms of state empty over the
/// prelude, mixing pure System T with the ideal constants.
pub struct TermGen {
    rng: ChaCha8Rng,
    scope: Vec<(Name, TypeExpr)>,
    fresh: usize,
}

impl TermGen {
    pub fn new(seed: u64) -> TermGen {
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed), scope: Vec::new(), fresh: 0 }
    }

    fn pred(&mut self) -> Name {
        Name::new(PREDS[self.rng.gen_range(0..PREDS.len())])
    }

    fn var_of(&mut self, ty: &TypeExpr) -> Option<Term> {
        let vs: Vec<Name> = self.scope.iter().filter(|(_, t)| t == ty).map(|(n, _)| n.clone()).collect();
        if vs.is_empty() {
            None
        } else {
            Some(Term::Var(vs[self.rng.gen_range(0..vs.len())].clone()))
        }
    }

    fn fresh(&mut self) -> Name {
        self.fresh += 1;
        Name::new(&format!("v{}", self.fresh))
    }

    /// A small numeral-valued term used for recursion counters.
    fn small(&mut self) -> Term {
        Term::numeral(self.rng.gen_range(0..4))
    }

    /// `(\x:dom. body) arg` with `body : ty`.
    fn redex(&mut self, ty: &TypeExpr, depth: u32) -> Term {
        let dom = if self.rng.gen_bool(0.7) { TypeExpr::Nat } else { TypeExpr::Bool };
        let x = self.fresh();
        let arg = self.term(&dom, depth - 1);
        self.scope.push((x.clone(), dom.clone()));
        let body = self.term(ty, depth - 1);
        self.scope.pop();
        Term::app(Term::Lam(x, dom, Arc::new(body)), arg)
    }

    pub fn term(&mut self, ty: &TypeExpr, depth: u32) -> Term {
        if depth == 0 || self.rng.gen_bool(0.15) {
            if let Some(v) = self.var_of(ty) {
                if self.rng.gen_bool(0.5) {
                    return v;
                }
            }
            return self.leaf(ty);
        }
        let choice = self.rng.gen_range(0..8);
        match (ty, choice) {
            (_, 0) => self.redex(ty, depth),
            (_, 1) => {
                let c = self.term(&TypeExpr::Bool, depth - 1);
                Term::if_(ty.clone(), c, self.term(ty, depth - 1), self.term(ty, depth - 1))
            }
            (_, 2) => {
                let other = self.term(&TypeExpr::Nat, depth - 1);
                if self.rng.gen_bool(0.5) {
                    Term::proj0(Term::pair(self.term(ty, depth - 1), other))
                } else {
                    Term::proj1(Term::pair(other, self.term(ty, depth - 1)))
                }
            }
            (TypeExpr::Nat, 3) => Term::succ(self.term(ty, depth - 1)),
            (TypeExpr::Nat, 4) => {
                let a = self.term(ty, depth - 1);
                Term::apps(Term::def("plus"), [a, self.small()])
            }
            (TypeExpr::Nat, 5) => {
                let k = self.fresh();
                let r = self.fresh();
                let base = self.term(ty, depth - 1);
                let step = Term::Lam(
                    k.clone(),
                    TypeExpr::Nat,
                    Arc::new(Term::lam(r.as_str(), TypeExpr::Nat, Term::succ(Term::Var(r.clone())))),
                );
                Term::rec(TypeExpr::Nat, base, step, self.small())
            }
            (TypeExpr::Nat, _) => Term::app(Term::SkolemPhi(self.pred()), self.term(ty, depth - 1)),
            (TypeExpr::Bool, 3) => Term::app(Term::def("not"), self.term(ty, depth - 1)),
            (TypeExpr::Bool, 4 | 5) => {
                let p = self.pred();
                Term::apps(Term::DefRef(p), [self.term(&TypeExpr::Nat, depth - 1), self.term(&TypeExpr::Nat, depth - 1)])
            }
            (TypeExpr::Bool, _) => Term::app(Term::OracleX(self.pred()), self.term(&TypeExpr::Nat, depth - 1)),
            (TypeExpr::State, 3 | 4) => Term::join(self.term(ty, depth - 1), self.term(ty, depth - 1)),
            (TypeExpr::State, 5) => {
                let p = self.pred();
                let k = self.fresh();
                let r = self.fresh();
                let learn = Term::apps(Term::AddClass(p), [Term::Var(k.clone()), Term::succ(Term::Var(k.clone()))]);
                let step = Term::Lam(
                    k,
                    TypeExpr::Nat,
                    Arc::new(Term::lam(r.as_str(), TypeExpr::State, Term::join(Term::Var(r.clone()), learn))),
                );
                let base = self.term(ty, depth - 1);
                Term::rec(TypeExpr::State, base, step, self.small())
            }
            (TypeExpr::State, _) => self.add(depth),
            _ => self.leaf(ty),
        }
    }

    fn add(&mut self, depth: u32) -> Term {
        let p = self.pred();
        let n = self.term(&TypeExpr::Nat, depth.saturating_sub(1));
        let m = if self.rng.gen_bool(0.5) {
            Term::succ(n.clone())
        } else {
            self.term(&TypeExpr::Nat, depth.saturating_sub(1))
        };
        Term::apps(Term::AddClass(p), [n, m])
    }

    fn leaf(&mut self, ty: &TypeExpr) -> Term {
        match ty {
            TypeExpr::Nat => Term::numeral(self.rng.gen_range(0..6)),
            TypeExpr::Bool => {
                if self.rng.gen_bool(0.5) {
                    Term::True
                } else {
                    Term::False
                }
            }
            TypeExpr::State => {
                if self.rng.gen_bool(0.5) {
                    Term::empty_state()
                } else {
                    let p = self.pred();
                    let n = self.rng.gen_range(0..6);
                    let m = n + self.rng.gen_range(0..3);
                    Term::apps(Term::AddClass(p), [Term::numeral(n), Term::numeral(m)])
                }
            }
            _ => unreachable!("generator only produces atomic types"),
        }
    }

    /// A closed term of a random atomic type, as a T_Class term of state empty.
    pub fn atomic(&mut self, depth: u32) -> (Term, TypeExpr) {
        let ty = match self.rng.gen_range(0..3) {
            0 => TypeExpr::Nat,
            1 => TypeExpr::Bool,
            _ => TypeExpr::State,
        };
        (self.term(&ty, depth), ty)
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.gen_range(0..xs.len())]
    }
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn read_corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

/// Checks a corpus proof and returns its conclusion and realizer.
pub fn corpus_proof(env: &DefEnv, name: &str) -> (Formula, Term) {
    let parsed = parse_proof(env, &read_corpus(name)).unwrap_or_else(|d| panic!("{name}: {d}"));
    let (j, t) = check_and_extract(env, &parsed.root).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert!(j.assumptions.is_empty() && j.free_vars.is_empty(), "{name} is not closed: {j}");
    (j.conclusion, t)
}

/// Outcome of one acceptance criterion: number of cases and failure notes.
#[derive(Default, Debug)]
pub struct Tally {
    pub cases: usize,
    pub failures: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }

    pub fn assert_ok(&self) {
        assert!(self.cases > 0, "no cases were run");
        assert!(self.failures.is_empty(), "{} of {} cases failed:\n{}", self.failures.len(), self.cases, self.failures.join("\n"));
    }
}

// ---- criterion 1: state algebra ----

pub fn criterion_state_laws() -> Tally {
    let mut t = Tally::default();
    let states = small_states();
    let empty = State::empty();
    for a in &states {
        t.check(a.cunion(&empty) == *a && empty.cunion(a) == *a, || format!("empty is not neutral for {a}"));
        for b in &states {
            let ab = a.cunion(b);
            t.check(
                ab.atoms().iter().all(|x| a.contains(x) || b.contains(x)),
                || format!("{a} cunion {b} = {ab} is not inside the union"),
            );
            t.check(!ab.is_empty() || (a.is_empty() && b.is_empty()), || format!("{a} cunion {b} is empty"));
            t.check(a.is_subset(&ab), || format!("{a} cunion {b} lost a left atom"));
            for c in &states {
                let l = ab.cunion(c);
                let r = a.cunion(&b.cunion(c));
                t.check(l == r, || format!("cunion not associative on {a}, {b}, {c}: {l} vs {r}"));
                if c.consistent_with(a) && c.consistent_with(b) {
                    t.check(c.consistent_with(&ab), || format!("{c} consistent with {a} and {b} but not {ab}"));
                }
                if c.disjoint(a) && c.disjoint(b) {
                    t.check(c.disjoint(&ab), || format!("{c} disjoint from {a} and {b} but not {ab}"));
                }
            }
        }
    }
    t
}

// ---- criterion 2: normal forms and strategy independence ----

/// Whether a value has the closed normal form shape for its type.
pub fn legal_value(v: &Value, ty: &TypeExpr) -> bool {
    matches!(
        (v, ty),
        (Value::Numeral(_), TypeExpr::Nat) | (Value::Boolean(_), TypeExpr::Bool) | (Value::StateVal(_), TypeExpr::State)
    )
}

pub fn criterion_weak_cr(n: usize) -> Tally {
    let env = env();
    let pool = state_pool();
    let mut gen = TermGen::new(SEED);
    let mut t = Tally::default();
    for i in 0..n {
        let (term, ty) = gen.atomic(4);
        let s = *gen.pick(&pool);
        let learn = approximate(&term, s).expect("generated terms are T_Class");
        let out = normalize(&env, &learn, Strategy::Outermost, DEFAULT_STEP_CAP);
        let inn = normalize(&env, &learn, Strategy::Innermost, DEFAULT_STEP_CAP);
        match (out, inn) {
            (Ok(a), Ok(b)) => {
                let (va, vb) = (a.value.expect("atomic"), b.value.expect("atomic"));
                t.check(legal_value(&va, &ty) && legal_value(&vb, &ty), || format!("#{i}: illegal shape for {learn}"));
                t.check(va == vb, || format!("#{i}: {learn} gives {va} outermost but {vb} innermost"));
            }
            (a, b) => t.check(false, || format!("#{i}: {learn} failed: {:?} / {:?}", a.err(), b.err())),
        }
    }
    t
}

// ---- criterion 3: state safety ----

pub fn state_terms(n: usize) -> Vec<Term> {
    let mut gen = TermGen::new(SEED ^ 0x5afe);
    (0..n).map(|_| gen.term(&TypeExpr::State, 4)).collect()
}

pub fn criterion_state_safety(n: usize) -> Tally {
    let env = env();
    let mut t = Tally::default();
    for (i, term) in state_terms(n).iter().enumerate() {
        for s in state_pool() {
            let r: Result<Value, EvalError> = approximate(term, s)
                .and_then(|u| normalize(&env, &u, Strategy::Outermost, DEFAULT_STEP_CAP))
                .map(|nf| nf.value.expect("state type is atomic"));
            match r {
                Ok(Value::StateVal(out)) => {
                    let (a, b) = (s.get(), out.get());
                    t.check(a.consistent_with(&b) && a.disjoint(&b), || format!("#{i}: {term} at {s} gives {out}"));
                }
                other => t.check(false, || format!("#{i}: {term} at {s}: {other:?}")),
            }
        }
    }
    t
}

// ---- criterion 4: fixed point ----

pub fn criterion_fixed_point(n: usize) -> Tally {
    let env = env();
    let mut t = Tally::default();
    let mut learned = 0;
    for (i, term) in state_terms(n).iter().enumerate() {
        for start in [StateId::EMPTY, state_pool()[3]] {
            match fixed_point(&env, term, start, 1000) {
                Ok((fixed, trace)) => {
                    if start.is_empty() && trace.growing_iterations() > 0 {
                        learned += 1;
                    }
                    let tau = approximate(term, fixed)
                        .and_then(|u| normalize(&env, &u, Strategy::Outermost, DEFAULT_STEP_CAP))
                        .map(|nf| nf.value);
                    t.check(tau == Ok(Some(Value::StateVal(StateId::EMPTY))), || format!("#{i}: tau at {fixed} is {tau:?}"));
                    t.check(start.get().is_subset(&fixed.get()), || format!("#{i}: start {start} not inside {fixed}"));
                    t.check(trace.stable, || format!("#{i}: trace not stable"));
                }
                Err(e) => t.check(false, || format!("#{i}: {term}: {e}")),
            }
        }
    }
    t.check(learned * 4 >= n, || format!("only {learned} of {n} generated terms learn anything"));
    let add = Term::apps(Term::AddClass(Name::new("NEXT")), [Term::numeral(2), Term::numeral(3)]);
    match fixed_point(&env, &add, StateId::EMPTY, 100) {
        Ok((fixed, trace)) => {
            t.check(trace.growing_iterations() == 1, || format!("Add[NEXT] 2 3 grew {} times", trace.growing_iterations()));
            t.check(fixed.get().to_string() == "state{NEXT(2)=3}", || format!("Add[NEXT] 2 3 reached {fixed}"));
        }
        Err(e) => t.check(false, || format!("Add[NEXT] 2 3: {e}")),
    }
    t
}

// ---- criterion 5: EM1 realizer ----

pub fn criterion_em1() -> Tally {
    let env = env();
    let mut t = Tally::default();
    for p in PREDS {
        let p = Name::new(p);
        let stmt = em1_statement(&env, &p).expect("binary predicate");
        let term = em1_term(&env, &p).expect("binary predicate");
        for s in state_pool() {
            let v = realizes_at(&env, &term, &stmt, s, 5, &HashMap::new());
            t.check(matches!(v, Ok(Verdict::Pass)), || format!("E_{p} at {s}: {v:?}"));
        }
    }
    t
}

// ---- criterion 6: witnesses from P1 and P2 ----

pub fn criterion_witnesses() -> Tally {
    let env = env();
    let next = Name::new("NEXT");
    let mut t = Tally::default();
    let (_, p1) = corpus_proof(&env, "P1.proof");
    let (_, p2) = corpus_proof(&env, "P2.proof");
    for n in 0..=20u64 {
        let learned = atom("NEXT", &[n], n + 1);
        match pi02_witness(&env, &p2, &next, n, 100) {
            Ok((w, trace)) => {
                t.check(w == n + 1, || format!("P2 witness for {n} is {w}"));
                let seen = trace.iterations.iter().any(|it| it.tau.get().contains(&learned));
                t.check(seen, || format!("P2 trace for {n} never learns {learned}: {}", trace.to_jsonl()));
                t.check(trace.growing_iterations() == 1, || format!("P2 trace for {n} grew {} times", trace.growing_iterations()));
            }
            Err(e) => t.check(false, || format!("P2 at {n}: {e}")),
        }
        match pi02_witness(&env, &p1, &next, n, 100) {
            Ok((w, trace)) => {
                t.check(w == n + 1, || format!("P1 witness for {n} is {w}"));
                let at_empty = trace.iterations.len() == 1 && trace.iterations[0].after.is_empty() && trace.stable;
                t.check(at_empty, || format!("P1 trace for {n} is not stable at empty: {}", trace.to_jsonl()));
            }
            Err(e) => t.check(false, || format!("P1 at {n}: {e}")),
        }
    }
    t
}

// ---- criterion 7: adequacy of the corpus realizers ----

pub fn criterion_adequacy() -> Tally {
    let env = env();
    let mut t = Tally::default();
    for name in ["P1.proof", "P2.proof", "P3.proof"] {
        let (concl, term) = corpus_proof(&env, name);
        let ty = typecheck(&env, &Context::new(), &term);
        t.check(ty.as_ref() == Ok(&realizer_type(&concl)), || format!("{name}: realizer type {ty:?}"));
        for s in state_pool() {
            let v = realizes_at(&env, &term, &concl, s, 10, &HashMap::new());
            t.check(matches!(v, Ok(Verdict::Pass)), || format!("{name} at {s}: {v:?}"));
        }
    }
    // P3 must take both sides of the disjunction over 0..=10.
    let (_, p3) = corpus_proof(&env, "P3.proof");
    let mut sides = BTreeSet::new();
    for n in 0..=10u64 {
        let tag = learnreal::eval::eval_atomic(&env, &Term::proj0(Term::app(p3.clone(), Term::numeral(n))));
        match tag {
            Ok(Value::Boolean(b)) => {
                t.check(b == (n == 0), || format!("P3 picks the wrong side at {n}"));
                sides.insert(b);
            }
            other => t.check(false, || format!("P3 tag at {n}: {other:?}")),
        }
    }
    t.check(sides.len() == 2, || "P3 does not exercise both sides".to_string());
    t
}

// ---- criterion 8: convergence along chains ----

/// Least witness for a query, searched up to a bound; `None` if false throughout.
fn least_witness(env: &DefEnv, q: &Query) -> Option<u64> {
    (0..64u64).find(|m| {
        let mut args: Vec<Term> = q.args.iter().map(|a| Term::numeral(*a)).collect();
        args.push(Term::numeral(*m));
        learnreal::eval::eval_atomic(env, &Term::apps(Term::DefRef(q.pred.clone()), args)) == Ok(Value::Boolean(true))
    })
}

/// A chain of five states; each one adds true atoms for every unanswered
/// lookup the term performed at its predecessor.
pub fn learning_chain(env: &DefEnv, t: &Term) -> Vec<StateId> {
    let mut chain = vec![StateId::EMPTY];
    for _ in 1..5 {
        let cur = *chain.last().unwrap();
        let nf = approximate(t, cur).and_then(|u| normalize(env, &u, Strategy::Outermost, DEFAULT_STEP_CAP));
        let mut s = (*cur.get()).clone();
        if let Ok(nf) = nf {
            for q in nf.queries {
                if s.lookup(&q.pred, &q.args).is_none() {
                    if let Some(m) = least_witness(env, &q) {
                        s = s.union(&State::singleton(Atom::unchecked(q.pred.clone(), q.args.clone(), m))).unwrap();
                    }
                }
            }
        }
        chain.push(StateId::intern(s));
    }
    chain
}

pub fn criterion_convergence(n: usize) -> Tally {
    let env = env();
    let mut gen = TermGen::new(SEED ^ 0xc0de);
    let mut t = Tally::default();
    let mut sampled = 0;
    let mut changed = 0;
    while sampled < n {
        let (term, _) = gen.atomic(4);
        if classify(&term) == Fragment::T {
            continue;
        }
        sampled += 1;
        let chain = learning_chain(&env, &term);
        let report = match WiChain::new(chain.clone()).and_then(|c| check_converges(&env, &term, &c)) {
            Ok(r) => r,
            Err(e) => {
                t.check(false, || format!("{term}: {e}"));
                continue;
            }
        };
        // First index from which every lookup made there answers the same in all later states.
        let agree_from = (0..chain.len())
            .find(|&i| {
                report.queries[i].iter().all(|q| {
                    let first = chain[i].get().lookup(&q.pred, &q.args);
                    chain[i..].iter().all(|s| s.get().lookup(&q.pred, &q.args) == first)
                })
            })
            .unwrap_or(chain.len());
        if report.last_change_index > 0 {
            changed += 1;
        }
        t.check(report.last_change_index <= agree_from, || {
            format!("{term}: last change {} after agreement at {agree_from}", report.last_change_index)
        });
        if agree_from <= chain.len() - 2 {
            let (a, b) = (report.values[chain.len() - 2], report.values[chain.len() - 1]);
            t.check(a == b, || format!("{term}: last two values differ ({a} / {b})"));
        }
    }
    t.check(changed * 5 >= n, || format!("only {changed} of {n} chains ever change value"));
    t
}

/// The closed formula `forall x. exists y. NEXT(x, y)`.
pub fn next_formula(env: &DefEnv) -> Formula {
    parse_formula(env, "forall x. exists y. NEXT(x, y)").unwrap()
}

// ---- criterion 9: CLI golden cases ----

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// One CLI invocation with its expected exit code and, when a golden file
/// `tests/golden/<name>.stdout` exists, its exact standard output.
#[derive(Debug)]
pub struct GoldenCase {
    pub name: &'static str,
    pub args: Vec<String>,
    pub code: i32,
    pub stdout: Option<String>,
}

impl GoldenCase {
    fn new(name: &'static str, args: &[&str], code: i32) -> GoldenCase {
        let corpus = corpus_dir();
        let args = args
            .iter()
            .map(|a| {
                if a.contains('.') && !a.starts_with('-') {
                    corpus.join(a).display().to_string()
                } else {
                    a.to_string()
                }
            })
            .collect();
        let stdout = std::fs::read_to_string(golden_dir().join(format!("{name}.stdout"))).ok();
        GoldenCase { name, args, code, stdout }
    }

    /// Runs in-process and returns the exit code and standard output.
    pub fn run(&self) -> (i32, String) {
        let (code, out, _) = run_cli(&self.args);
        (code, out)
    }
}

pub fn run_cli(args: &[String]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("learnreal".to_string()).chain(args.iter().cloned());
    let code = learnreal::frontend::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn golden_cases() -> Vec<GoldenCase> {
    vec![
        GoldenCase::new("check_p1", &["check", "P1.proof"], 0),
        GoldenCase::new("check_p2", &["check", "P2.proof"], 0),
        GoldenCase::new("check_p3", &["check", "P3.proof"], 0),
        GoldenCase::new("check_bad", &["check", "bad.proof"], 1),
        GoldenCase::new("check_broken", &["check", "broken.proof"], 2),
        GoldenCase::new("check_missing", &["check", "no_such_file.proof"], 2),
        GoldenCase::new("extract_p1", &["extract", "P1.proof"], 0),
        GoldenCase::new("extract_p2", &["extract", "P2.proof"], 0),
        GoldenCase::new("extract_p3", &["extract", "P3.proof"], 0),
        GoldenCase::new("extract_bad", &["extract", "bad.proof"], 1),
        GoldenCase::new("normalize_chi", &["normalize", "t.term", "--state", "s1.state"], 0),
        GoldenCase::new("normalize_chi_empty", &["normalize", "t.term", "--state", "empty.state"], 0),
        GoldenCase::new("normalize_plus", &["normalize", "plus.term"], 0),
        GoldenCase::new("normalize_rec_innermost", &["normalize", "rec.term", "--strategy", "innermost"], 0),
        GoldenCase::new("normalize_learn", &["normalize", "learn.term", "--state", "empty.state"], 0),
        GoldenCase::new("normalize_learn_known", &["normalize", "learn.term", "--state", "s2.state"], 0),
        GoldenCase::new("normalize_succ", &["normalize", "succ.term"], 0),
        GoldenCase::new("normalize_broken", &["normalize", "broken.term"], 2),
        GoldenCase::new("normalize_budget", &["normalize", "plus.term", "--step-cap", "3"], 3),
        GoldenCase::new("normalize_ideal", &["normalize", "oracle.term"], 1),
        GoldenCase::new("realizes_succ", &["realizes", "succ.term", "next.form", "--state", "s1.state"], 0),
        GoldenCase::new("realizes_zero", &["realizes", "zero.term", "next.form", "--depth", "3"], 1),
        GoldenCase::new("witness_p2", &["witness", "P2.proof", "--pred", "NEXT", "--input", "5"], 0),
        GoldenCase::new("witness_p1", &["witness", "P1.proof", "--pred", "NEXT", "--input", "5"], 0),
        GoldenCase::new("witness_p2_zero", &["witness", "P2.proof", "--pred", "NEXT", "--input", "0"], 0),
        GoldenCase::new("witness_term", &["witness", "succ.term", "--pred", "NEXT", "--input", "41"], 0),
        GoldenCase::new("witness_wrong", &["witness", "zero.term", "--pred", "NEXT", "--input", "5"], 1),
        GoldenCase::new("witness_cap", &["witness", "P2.proof", "--pred", "NEXT", "--input", "5", "--iter-cap", "1"], 3),
        GoldenCase::new("converge_oracle", &["converge", "oracle.term", "--chain", "empty.state", "s1.state", "s2.state"], 0),
        GoldenCase::new("converge_not_increasing", &["converge", "oracle.term", "--chain", "s2.state", "s1.state"], 1),
        GoldenCase::new("usage_unknown_command", &["frobnicate"], 2),
        GoldenCase::new("usage_bad_strategy", &["normalize", "plus.term", "--strategy", "sideways"], 2),
    ]
}
