use std::fmt::{self, Write};

use crate::kernel::{Term, TypeExpr};
use crate::logic::Formula;
use crate::proofs::ProofNode;

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, 0)
    }
}

// 0: arrow position, 1: product operand, 2: atom
fn write_type(f: &mut impl Write, ty: &TypeExpr, lvl: u8) -> fmt::Result {
    match ty {
        TypeExpr::Nat => f.write_str("N"),
        TypeExpr::Bool => f.write_str("Bool"),
        TypeExpr::State => f.write_str("S"),
        TypeExpr::Arrow(a, b) => {
            if lvl > 0 {
                f.write_char('(')?;
            }
            write_type(f, a, 1)?;
            f.write_str(" -> ")?;
            write_type(f, b, 0)?;
            if lvl > 0 {
                f.write_char(')')?;
            }
            Ok(())
        }
        TypeExpr::Prod(a, b) => {
            if lvl > 1 {
                f.write_char('(')?;
            }
            write_type(f, a, 2)?;
            f.write_str(" * ")?;
            write_type(f, b, 1)?;
            if lvl > 1 {
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Lvl {
    Top,
    App,
    Prefix,
    Arg,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, Lvl::Top)
    }
}

fn open(f: &mut impl Write, paren: bool) -> fmt::Result {
    if paren {
        f.write_char('(')?;
    }
    Ok(())
}

fn close(f: &mut impl Write, paren: bool) -> fmt::Result {
    if paren {
        f.write_char(')')?;
    }
    Ok(())
}

fn write_term(f: &mut impl Write, t: &Term, lvl: Lvl) -> fmt::Result {
    if let Some(n) = t.as_numeral() {
        return write!(f, "{n}");
    }
    match t {
        Term::Var(x) | Term::DefRef(x) => write!(f, "{x}"),
        Term::Lam(x, ty, body) => {
            let p = lvl > Lvl::Top;
            open(f, p)?;
            write!(f, "\\{x}:")?;
            write_type(f, ty, 0)?;
            f.write_str(". ")?;
            write_term(f, body, Lvl::Top)?;
            close(f, p)
        }
        Term::If(ty, c, a, b) => {
            let p = lvl > Lvl::Top;
            open(f, p)?;
            write!(f, "if[{ty}] ")?;
            write_term(f, c, Lvl::Top)?;
            f.write_str(" then ")?;
            write_term(f, a, Lvl::Top)?;
            f.write_str(" else ")?;
            write_term(f, b, Lvl::Top)?;
            close(f, p)
        }
        Term::App(g, a) => {
            let p = lvl >= Lvl::Prefix;
            open(f, p)?;
            write_term(f, g, Lvl::App)?;
            f.write_char(' ')?;
            write_term(f, a, Lvl::Arg)?;
            close(f, p)
        }
        Term::Succ(u) | Term::Proj0(u) | Term::Proj1(u) => {
            let kw = match t {
                Term::Succ(_) => "S ",
                Term::Proj0(_) => "fst ",
                _ => "snd ",
            };
            let p = lvl == Lvl::Arg;
            open(f, p)?;
            f.write_str(kw)?;
            write_term(f, u, Lvl::Prefix)?;
            close(f, p)
        }
        Term::Pair(a, b) => {
            f.write_char('(')?;
            write_term(f, a, Lvl::Top)?;
            f.write_str(", ")?;
            write_term(f, b, Lvl::Top)?;
            f.write_char(')')
        }
        Term::Zero => f.write_char('0'),
        Term::True => f.write_str("true"),
        Term::False => f.write_str("false"),
        Term::StateConst(s) => write!(f, "{}", s.get()),
        Term::Rec(ty, b, s, n) => {
            write!(f, "rec[{ty}](")?;
            write_term(f, b, Lvl::Top)?;
            f.write_str(", ")?;
            write_term(f, s, Lvl::Top)?;
            f.write_str(", ")?;
            write_term(f, n, Lvl::Top)?;
            f.write_char(')')
        }
        Term::Join(a, b) => {
            f.write_str("join(")?;
            write_term(f, a, Lvl::Top)?;
            f.write_str(", ")?;
            write_term(f, b, Lvl::Top)?;
            f.write_char(')')
        }
        Term::OracleX(p) => write!(f, "X[{p}]"),
        Term::SkolemPhi(p) => write!(f, "Phi[{p}]"),
        Term::AddClass(p) => write!(f, "Add[{p}]"),
        Term::ChiApprox(p) => write!(f, "chi[{p}]"),
        Term::PhiApprox(p) => write!(f, "phi[{p}]"),
        Term::AddApprox(p) => write!(f, "add[{p}]"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}

// Precedences: quantifier 0, implication 1, disjunction 2, conjunction 3, atom 4.
fn write_formula(f: &mut impl Write, a: &Formula, prec: u8) -> fmt::Result {
    match a {
        Formula::Forall(x, body) | Formula::Exists(x, body) => {
            let p = prec > 0;
            open(f, p)?;
            let q = if matches!(a, Formula::Forall(..)) { "forall" } else { "exists" };
            write!(f, "{q} {x}. ")?;
            write_formula(f, body, 0)?;
            close(f, p)
        }
        Formula::Imp(l, r) => {
            let p = prec > 1;
            open(f, p)?;
            write_formula(f, l, 2)?;
            f.write_str(" -> ")?;
            write_formula(f, r, 0)?;
            close(f, p)
        }
        Formula::Or(l, r) => {
            let p = prec > 2;
            open(f, p)?;
            write_formula(f, l, 2)?;
            f.write_str(" \\/ ")?;
            write_formula(f, r, 3)?;
            close(f, p)
        }
        Formula::And(l, r) => {
            let p = prec > 3;
            open(f, p)?;
            write_formula(f, l, 3)?;
            f.write_str(" /\\ ")?;
            write_formula(f, r, 4)?;
            close(f, p)
        }
        Formula::Atomic { head, args } => {
            match &**head {
                Term::DefRef(p) => write!(f, "{p}")?,
                Term::True => f.write_str("true")?,
                Term::False => f.write_str("false")?,
                h => {
                    f.write_char('[')?;
                    write_term(f, h, Lvl::Top)?;
                    f.write_char(']')?;
                }
            }
            if !args.is_empty() {
                f.write_char('(')?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_term(f, t, Lvl::Top)?;
                }
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

/// Renders a proof in the nested rule-form syntax accepted by the parser.
pub fn print_proof(p: &ProofNode) -> String {
    let mut out = String::new();
    write_proof(&mut out, p).expect("writing to a String cannot fail");
    out
}

fn write_sub(f: &mut String, p: &ProofNode) -> fmt::Result {
    f.write_str(" (")?;
    write_proof(f, p)?;
    f.write_char(')')
}

fn write_proof(f: &mut String, p: &ProofNode) -> fmt::Result {
    use ProofNode::*;
    match p {
        Assume(h, a) => write!(f, "assume {h} {{{a}}}"),
        AndI(l, r) => {
            f.write_str("and_i")?;
            write_sub(f, l)?;
            write_sub(f, r)
        }
        AndE0(q) => {
            f.write_str("and_e0")?;
            write_sub(f, q)
        }
        AndE1(q) => {
            f.write_str("and_e1")?;
            write_sub(f, q)
        }
        ImpI(h, a, q) => {
            write!(f, "imp_i {h} {{{a}}}")?;
            write_sub(f, q)
        }
        ImpE(l, r) => {
            f.write_str("imp_e")?;
            write_sub(f, l)?;
            write_sub(f, r)
        }
        OrI0(q, b) => {
            f.write_str("or_i0")?;
            write_sub(f, q)?;
            write!(f, " {{{b}}}")
        }
        OrI1(a, q) => {
            write!(f, "or_i1 {{{a}}}")?;
            write_sub(f, q)
        }
        OrE(m, h1, q1, h2, q2) => {
            f.write_str("or_e")?;
            write_sub(f, m)?;
            write!(f, " {h1}")?;
            write_sub(f, q1)?;
            write!(f, " {h2}")?;
            write_sub(f, q2)
        }
        ForallI(x, q) => {
            write!(f, "forall_i {x}")?;
            write_sub(f, q)
        }
        ForallE(q, t) => {
            f.write_str("forall_e")?;
            write_sub(f, q)?;
            write!(f, " [{t}]")
        }
        ExistsI(t, a, q) => {
            write!(f, "exists_i [{t}] {{{a}}}")?;
            write_sub(f, q)
        }
        ExistsE(m, x, h, q) => {
            f.write_str("exists_e")?;
            write_sub(f, m)?;
            write!(f, " {x} {h}")?;
            write_sub(f, q)
        }
        Induction(b, s) => {
            f.write_str("induction")?;
            write_sub(f, b)?;
            write_sub(f, s)
        }
        Post(rule, ps, c) => {
            write!(f, "post {rule} {{{c}}}")?;
            for q in ps {
                write_sub(f, q)?;
            }
            Ok(())
        }
        AtomicAxiom(a) => write!(f, "axiom {{{a}}}"),
        EM1(p) => write!(f, "em1 {p}"),
        ChiAxiom(p, ts, t) => {
            write!(f, "chi_ax {p}")?;
            for u in ts {
                write!(f, " [{u}]")?;
            }
            write!(f, " [{t}]")
        }
        PhiAxiom(p, ts) => {
            write!(f, "phi_ax {p}")?;
            for u in ts {
                write!(f, " [{u}]")?;
            }
            Ok(())
        }
    }
}
