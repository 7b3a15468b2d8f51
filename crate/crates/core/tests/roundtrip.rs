mod common;

use std::sync::Arc;

use common::*;
use learnreal::eval::approximate;
use learnreal::frontend::{parse_formula, parse_proof, parse_state, parse_term, parse_type, print_proof};
use learnreal::kernel::{Name, Term, TypeExpr};
use learnreal::logic::Formula;
use learnreal::proofs::{PostRule, ProofNode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random formulas, proofs and higher-type terms built on top of [`TermGen`].
struct AstGen {
    rng: ChaCha8Rng,
    terms: TermGen,
}

impl AstGen {
    fn new(seed: u64) -> AstGen {
        AstGen { rng: ChaCha8Rng::seed_from_u64(seed), terms: TermGen::new(seed.rotate_left(17)) }
    }

    fn ty(&mut self, depth: u32) -> TypeExpr {
        match if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..5) } {
            0 => TypeExpr::Nat,
            1 => TypeExpr::Bool,
            2 => TypeExpr::State,
            3 => TypeExpr::arrow(self.ty(depth - 1), self.ty(depth - 1)),
            _ => TypeExpr::prod(self.ty(depth - 1), self.ty(depth - 1)),
        }
    }

    fn nat(&mut self, bound: &[Name]) -> Term {
        if !bound.is_empty() && self.rng.gen_bool(0.4) {
            let x = Term::Var(bound[self.rng.gen_range(0..bound.len())].clone());
            return if self.rng.gen_bool(0.5) { x } else { Term::succ(x) };
        }
        self.terms.term(&TypeExpr::Nat, 2)
    }

    /// Any printable term: an atomic-type term, its approximation, or one
    /// wrapped in lambdas and pairs.
    fn term(&mut self) -> Term {
        let (t, _) = self.terms.atomic(3);
        let t = match self.rng.gen_range(0..3) {
            0 => approximate(&t, state_pool()[self.rng.gen_range(0..8)]).unwrap(),
            _ => t,
        };
        match self.rng.gen_range(0..4) {
            0 => Term::lam("z", self.ty(2), t),
            1 => Term::pair(t, Term::lam("q", TypeExpr::Nat, Term::proj0(Term::var("q")))),
            _ => t,
        }
    }

    fn formula(&mut self, depth: u32, bound: &mut Vec<Name>) -> Formula {
        let pick = if depth == 0 { 0 } else { self.rng.gen_range(0..7) };
        match pick {
            0 | 1 => match self.rng.gen_range(0..4) {
                0 => Formula::atomic(Term::True, vec![]),
                1 => Formula::bot(),
                2 => {
                    let head = Term::lam("u", TypeExpr::Nat, Term::app(Term::def("not"), Term::app(Term::OracleX(Name::new("GEQ")), Term::var("u"))));
                    Formula::atomic(head, vec![self.nat(bound)])
                }
                _ => {
                    let p = ["GEQ", "NEXT", "eq", "leq"][self.rng.gen_range(0..4)];
                    Formula::pred(p, vec![self.nat(bound), self.nat(bound)])
                }
            },
            2 => Formula::and(self.formula(depth - 1, bound), self.formula(depth - 1, bound)),
            3 => Formula::or(self.formula(depth - 1, bound), self.formula(depth - 1, bound)),
            4 => Formula::imp(self.formula(depth - 1, bound), self.formula(depth - 1, bound)),
            _ => {
                let x = ["x", "y", "w"][self.rng.gen_range(0..3)];
                bound.push(Name::new(x));
                let body = self.formula(depth - 1, bound);
                bound.pop();
                if pick == 5 {
                    Formula::forall(x, body)
                } else {
                    Formula::exists(x, body)
                }
            }
        }
    }

    fn label(&mut self) -> Name {
        Name::new(["h", "k", "h1", "h2"][self.rng.gen_range(0..4)])
    }

    fn proof(&mut self, depth: u32) -> ProofNode {
        use ProofNode::*;
        let f = |g: &mut AstGen| g.formula(2, &mut vec![Name::new("a")]);
        let pick = if depth == 0 { self.rng.gen_range(0..5) } else { self.rng.gen_range(0..19) };
        let sub = |g: &mut AstGen| Box::new(g.proof(depth.saturating_sub(1)));
        match pick {
            0 => Assume(self.label(), f(self)),
            1 => AtomicAxiom(f(self)),
            2 => EM1(Name::new("NEXT")),
            3 => ChiAxiom(Name::new("GEQ"), vec![Arc::new(self.nat(&[]))], Arc::new(self.nat(&[]))),
            4 => PhiAxiom(Name::new("NEXT"), vec![Arc::new(self.nat(&[]))]),
            5 => AndI(sub(self), sub(self)),
            6 => AndE0(sub(self)),
            7 => AndE1(sub(self)),
            8 => ImpI(self.label(), f(self), sub(self)),
            9 => ImpE(sub(self), sub(self)),
            10 => OrI0(sub(self), f(self)),
            11 => OrI1(f(self), sub(self)),
            12 => OrE(sub(self), self.label(), sub(self), self.label(), sub(self)),
            13 => ForallI(Name::new("a"), sub(self)),
            14 => ForallE(sub(self), Arc::new(self.nat(&[]))),
            15 => ExistsI(Arc::new(self.nat(&[])), Formula::exists("y", f(self)), sub(self)),
            16 => ExistsE(sub(self), Name::new("z"), self.label(), sub(self)),
            17 => Induction(sub(self), sub(self)),
            _ => {
                let rule = PostRule::ALL[self.rng.gen_range(0..PostRule::ALL.len())];
                let n = self.rng.gen_range(0..3);
                Post(rule, (0..n).map(|_| *sub(self)).collect(), f(self))
            }
        }
    }
}

#[test]
fn corpus_round_trips() {
    let env = env();
    let mut seen = 0;
    for entry in std::fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("broken") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        match path.extension().and_then(|e| e.to_str()) {
            Some("proof") => {
                let p = parse_proof(&env, &text).unwrap().root;
                assert_eq!(parse_proof(&env, &print_proof(&p)).unwrap().root, p, "{name}");
            }
            Some("term") => {
                let t = parse_term(&env, &text).unwrap();
                assert_eq!(parse_term(&env, &t.to_string()).unwrap(), t, "{name}");
            }
            Some("form") => {
                let f = parse_formula(&env, &text).unwrap();
                assert_eq!(parse_formula(&env, &f.to_string()).unwrap(), f, "{name}");
            }
            Some("state") => {
                let s = parse_state(&env, &text).unwrap();
                assert_eq!(parse_state(&env, &s.get().to_string()).unwrap(), s, "{name}");
            }
            _ => continue,
        }
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn printing_is_canonical() {
    let env = env();
    let t = parse_term(&env, "( \\x : N .  (x) )").unwrap();
    assert_eq!(t.to_string(), "\\x:N. x");
    let f = parse_formula(&env, "((forall x. (exists y. (NEXT(x,y)))))").unwrap();
    assert_eq!(f.to_string(), "forall x. exists y. NEXT(x, y)");
    assert_eq!(parse_state(&env, "state{ NEXT(2)=3,GEQ(2)=3 }").unwrap().get().to_string(), "state{GEQ(2)=3, NEXT(2)=3}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn terms_round_trip(seed in any::<u64>()) {
        let env = env();
        let t = AstGen::new(seed).term();
        let printed = t.to_string();
        let back = parse_term(&env, &printed);
        prop_assert_eq!(back.as_ref(), Ok(&t), "{}", printed);
        prop_assert_eq!(back.unwrap().to_string(), printed);
    }

    #[test]
    fn types_round_trip(seed in any::<u64>()) {
        let ty = AstGen::new(seed).ty(4);
        prop_assert_eq!(parse_type(&ty.to_string()), Ok(ty));
    }

    #[test]
    fn formulas_round_trip(seed in any::<u64>()) {
        let env = env();
        let f = AstGen::new(seed).formula(4, &mut Vec::new());
        let printed = f.to_string();
        prop_assert_eq!(parse_formula(&env, &printed), Ok(f), "{}", printed);
    }

    #[test]
    fn proofs_round_trip(seed in any::<u64>()) {
        let env = env();
        let p = AstGen::new(seed).proof(3);
        let printed = print_proof(&p);
        let back = parse_proof(&env, &printed).map(|pp| pp.root);
        prop_assert_eq!(back, Ok(p), "{}", printed);
    }
}
