use std::collections::HashMap;
use std::sync::Arc;

use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, ParsedProof, Span, SpanTree};
use crate::kernel::{typecheck, Context, DefEnv, Name, Term, TypeExpr};
use crate::logic::Formula;
use crate::proofs::{PostRule, ProofNode};
use crate::states::{mk_atom, State, StateId};

type PResult<T> = Result<T, Diagnostic>;

/// Words that cannot be used as variable names.
const RESERVED: &[&str] = &[
    "if", "then", "else", "rec", "join", "true", "false", "empty", "state", "fst", "snd", "S", "X",
    "Phi", "Add", "chi", "phi", "add", "forall", "exists", "def", "let",
];

/// Keywords that may start an argument in an application.
const ATOM_KEYWORDS: &[&str] = &["true", "false", "empty", "state", "rec", "join", "X", "Phi", "Add", "chi", "phi", "add"];

pub(crate) struct Parser<'a> {
    toks: &'a [Token],
    pub(crate) pos: usize,
    env: &'a DefEnv,
    /// Lambda- and quantifier-bound names, innermost last.
    bound: Vec<(Name, TypeExpr)>,
    lets: HashMap<String, (ProofNode, SpanTree)>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: &'a [Token], pos: usize, env: &'a DefEnv) -> Parser<'a> {
        Parser { toks, pos, env, bound: Vec::new(), lets: HashMap::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(self.span(), msg.into()))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    /// An identifier usable as a variable or label.
    fn binder(&mut self) -> PResult<Name> {
        let span = self.span();
        let s = self.ident()?;
        if RESERVED.contains(&s.as_str()) {
            return Err(Diagnostic::error(span, format!("`{s}` is a reserved word")));
        }
        Ok(Name::new(&s))
    }

    fn number(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Num(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("a numeral"),
        }
    }

    pub(crate) fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    // ---- types ----

    pub(crate) fn ty(&mut self) -> PResult<TypeExpr> {
        let a = self.prod_ty()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            Ok(TypeExpr::arrow(a, self.ty()?))
        } else {
            Ok(a)
        }
    }

    fn prod_ty(&mut self) -> PResult<TypeExpr> {
        let a = self.atom_ty()?;
        if *self.peek() == Tok::Star {
            self.bump();
            Ok(TypeExpr::prod(a, self.prod_ty()?))
        } else {
            Ok(a)
        }
    }

    fn atom_ty(&mut self) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "N" => {
                self.bump();
                Ok(TypeExpr::Nat)
            }
            Tok::Ident(s) if s == "Bool" => {
                self.bump();
                Ok(TypeExpr::Bool)
            }
            Tok::Ident(s) if s == "S" => {
                self.bump();
                Ok(TypeExpr::State)
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.unexpected("a type (`N`, `Bool`, `S` or a parenthesized type)"),
        }
    }

    // ---- terms ----

    pub(crate) fn term(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let x = self.binder()?;
            self.expect(Tok::Colon)?;
            let ty = self.ty()?;
            self.expect(Tok::Dot)?;
            self.bound.push((x.clone(), ty.clone()));
            let body = self.term();
            self.bound.pop();
            return Ok(Term::Lam(x, ty, Arc::new(body?)));
        }
        if self.is_kw("if") {
            self.bump();
            let ann = self.annotation()?;
            let c = self.term()?;
            self.expect_kw("then")?;
            let span = self.span();
            let a = self.term()?;
            self.expect_kw("else")?;
            let b = self.term()?;
            let ty = match ann {
                Some(ty) => ty,
                None => self.infer(&a, span, "if[T]")?,
            };
            return Ok(Term::if_(ty, c, a, b));
        }
        let mut t = self.prefix()?;
        while self.starts_atom() {
            let a = self.atom()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    /// Optional `[T]` type annotation after `if` or `rec`.
    fn annotation(&mut self) -> PResult<Option<TypeExpr>> {
        if *self.peek() != Tok::LBrack {
            return Ok(None);
        }
        self.bump();
        let ty = self.ty()?;
        self.expect(Tok::RBrack)?;
        Ok(Some(ty))
    }

    /// Types `t` in the enclosing binders; unbound variables count as numbers.
    fn infer(&self, t: &Term, span: Span, form: &str) -> PResult<TypeExpr> {
        let mut ctx = Context::new();
        for x in t.free_vars() {
            if !self.bound.iter().any(|(b, _)| *b == x) {
                ctx.push(x, TypeExpr::Nat);
            }
        }
        for (x, ty) in &self.bound {
            ctx.push(x.clone(), ty.clone());
        }
        typecheck(self.env, &ctx, t)
            .map_err(|e| Diagnostic::error(span, format!("cannot infer the type here ({e}); write `{form}`")))
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Num(_) | Tok::LParen => true,
            Tok::Ident(s) => !RESERVED.contains(&s.as_str()) || ATOM_KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn prefix(&mut self) -> PResult<Term> {
        if self.is_kw("S") {
            self.bump();
            return Ok(Term::succ(self.prefix()?));
        }
        if self.is_kw("fst") {
            self.bump();
            return Ok(Term::proj0(self.prefix()?));
        }
        if self.is_kw("snd") {
            self.bump();
            return Ok(Term::proj1(self.prefix()?));
        }
        self.atom()
    }

    fn pred_index(&mut self) -> PResult<Name> {
        self.expect(Tok::LBrack)?;
        let span = self.span();
        let p = Name::new(&self.ident()?);
        if self.env.predicate_arity(&p).is_none() {
            return Err(Diagnostic::error(span, format!("`{p}` is not a predicate N^k -> Bool")));
        }
        self.expect(Tok::RBrack)?;
        Ok(p)
    }

    fn atom(&mut self) -> PResult<Term> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::numeral(n))
            }
            Tok::LParen => {
                self.bump();
                let a = self.term()?;
                if *self.peek() == Tok::Comma {
                    self.bump();
                    let b = self.term()?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::pair(a, b))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(a)
                }
            }
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "true" => Ok(Term::True),
                    "false" => Ok(Term::False),
                    "empty" => Ok(Term::empty_state()),
                    "state" => Ok(Term::StateConst(self.state_body()?)),
                    "rec" => {
                        let ann = self.annotation()?;
                        self.expect(Tok::LParen)?;
                        let bspan = self.span();
                        let b = self.term()?;
                        let ty = match ann {
                            Some(ty) => ty,
                            None => self.infer(&b, bspan, "rec[T]")?,
                        };
                        self.expect(Tok::Comma)?;
                        let st = self.term()?;
                        self.expect(Tok::Comma)?;
                        let n = self.term()?;
                        self.expect(Tok::RParen)?;
                        Ok(Term::rec(ty, b, st, n))
                    }
                    "join" => {
                        self.expect(Tok::LParen)?;
                        let a = self.term()?;
                        self.expect(Tok::Comma)?;
                        let b = self.term()?;
                        self.expect(Tok::RParen)?;
                        Ok(Term::join(a, b))
                    }
                    "X" => Ok(Term::OracleX(self.pred_index()?)),
                    "Phi" => Ok(Term::SkolemPhi(self.pred_index()?)),
                    "Add" => Ok(Term::AddClass(self.pred_index()?)),
                    "chi" => Ok(Term::ChiApprox(self.pred_index()?)),
                    "phi" => Ok(Term::PhiApprox(self.pred_index()?)),
                    "add" => Ok(Term::AddApprox(self.pred_index()?)),
                    _ if RESERVED.contains(&s.as_str()) => {
                        Err(Diagnostic::error(span, format!("unexpected keyword `{s}`")))
                    }
                    _ => Ok(self.resolve(&s)),
                }
            }
            _ => self.unexpected("a term"),
        }
    }

    fn resolve(&self, s: &str) -> Term {
        let n = Name::new(s);
        if self.bound.iter().any(|(b, _)| *b == n) || !self.env.contains(&n) {
            Term::Var(n)
        } else {
            Term::DefRef(n)
        }
    }

    /// `{ P(n, ...)=m, ... }` after the `state` keyword.
    fn state_body(&mut self) -> PResult<StateId> {
        self.expect(Tok::LBrace)?;
        let mut atoms = Vec::new();
        while *self.peek() != Tok::RBrace {
            if !atoms.is_empty() {
                self.expect(Tok::Comma)?;
            }
            let span = self.span();
            let p = Name::new(&self.ident()?);
            self.expect(Tok::LParen)?;
            let mut args = Vec::new();
            while *self.peek() != Tok::RParen {
                if !args.is_empty() {
                    self.expect(Tok::Comma)?;
                }
                args.push(self.number()?);
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Eq)?;
            let m = self.number()?;
            let a = mk_atom(self.env, &p, &args, m).map_err(|e| Diagnostic::error(span, e.to_string()))?;
            atoms.push((span, a));
        }
        self.expect(Tok::RBrace)?;
        let span = atoms.first().map(|(s, _)| *s).unwrap_or(self.span());
        let state = State::new(atoms.into_iter().map(|(_, a)| a).collect())
            .map_err(|e| Diagnostic::error(span, e.to_string()))?;
        Ok(StateId::intern(state))
    }

    pub(crate) fn state_literal(&mut self) -> PResult<StateId> {
        if self.is_kw("empty") {
            self.bump();
            return Ok(StateId::EMPTY);
        }
        self.expect_kw("state")?;
        self.state_body()
    }

    // ---- formulas ----

    pub(crate) fn formula(&mut self) -> PResult<Formula> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantified();
        }
        let a = self.or_formula()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            Ok(Formula::imp(a, self.formula()?))
        } else {
            Ok(a)
        }
    }

    fn quantified(&mut self) -> PResult<Formula> {
        let universal = self.is_kw("forall");
        self.bump();
        let x = self.binder()?;
        self.expect(Tok::Dot)?;
        self.bound.push((x.clone(), TypeExpr::Nat));
        let body = self.formula();
        self.bound.pop();
        let body = Box::new(body?);
        Ok(if universal { Formula::Forall(x, body) } else { Formula::Exists(x, body) })
    }

    fn or_formula(&mut self) -> PResult<Formula> {
        let mut a = self.and_formula()?;
        while *self.peek() == Tok::OrSym {
            self.bump();
            a = Formula::or(a, self.and_formula()?);
        }
        Ok(a)
    }

    fn and_formula(&mut self) -> PResult<Formula> {
        let mut a = self.unary_formula()?;
        while *self.peek() == Tok::AndSym {
            self.bump();
            a = Formula::and(a, self.unary_formula()?);
        }
        Ok(a)
    }

    fn unary_formula(&mut self) -> PResult<Formula> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantified();
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        self.atomic_formula()
    }

    fn atomic_formula(&mut self) -> PResult<Formula> {
        let span = self.span();
        let head = match self.peek().clone() {
            Tok::LBrack => {
                self.bump();
                let h = self.term()?;
                self.expect(Tok::RBrack)?;
                h
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Term::True
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Term::False
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                let n = Name::new(&s);
                if !self.env.contains(&n) {
                    return Err(Diagnostic::error(span, format!("unknown predicate `{s}`")));
                }
                Term::DefRef(n)
            }
            _ => return self.unexpected("a formula"),
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            while *self.peek() != Tok::RParen {
                if !args.is_empty() {
                    self.expect(Tok::Comma)?;
                }
                args.push(self.term()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Formula::atomic(head, args))
    }

    // ---- proofs ----

    pub(crate) fn proof_file(&mut self) -> PResult<ParsedProof> {
        while self.is_kw("let") {
            self.bump();
            let span = self.span();
            let name = self.ident()?;
            if self.lets.contains_key(&name) {
                return Err(Diagnostic::error(span, format!("subproof `{name}` is defined twice")));
            }
            self.expect(Tok::Eq)?;
            let p = self.proof()?;
            self.expect(Tok::Semi)?;
            self.lets.insert(name, p);
        }
        let (root, spans) = self.proof()?;
        self.expect_eof()?;
        Ok(ParsedProof { root, spans })
    }

    fn bracket_term(&mut self) -> PResult<Arc<Term>> {
        self.expect(Tok::LBrack)?;
        let t = self.term()?;
        self.expect(Tok::RBrack)?;
        Ok(Arc::new(t))
    }

    fn brace_formula(&mut self) -> PResult<Formula> {
        self.expect(Tok::LBrace)?;
        let f = self.formula()?;
        self.expect(Tok::RBrace)?;
        Ok(f)
    }

    fn starts_sub(&self) -> bool {
        match self.peek() {
            Tok::LParen => true,
            Tok::Ident(s) => self.lets.contains_key(s),
            _ => false,
        }
    }

    fn sub(&mut self) -> PResult<(ProofNode, SpanTree)> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let p = self.proof()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(s) if self.lets.contains_key(&s) => {
                self.bump();
                Ok(self.lets[&s].clone())
            }
            _ => self.unexpected("a parenthesized subproof or a `let` name"),
        }
    }

    fn proof(&mut self) -> PResult<(ProofNode, SpanTree)> {
        let span = self.span();
        if self.starts_sub() {
            return self.sub();
        }
        let rule = self.ident()?;
        let mut kids: Vec<SpanTree> = Vec::new();
        let mut sub = |p: &mut Self| -> PResult<Box<ProofNode>> {
            let (n, s) = p.sub()?;
            kids.push(s);
            Ok(Box::new(n))
        };
        use ProofNode::*;
        let node = match rule.as_str() {
            "assume" => {
                let l = self.binder()?;
                Assume(l, self.brace_formula()?)
            }
            "and_i" => AndI(sub(self)?, sub(self)?),
            "and_e0" => AndE0(sub(self)?),
            "and_e1" => AndE1(sub(self)?),
            "imp_i" => {
                let l = self.binder()?;
                let a = self.brace_formula()?;
                ImpI(l, a, sub(self)?)
            }
            "imp_e" => ImpE(sub(self)?, sub(self)?),
            "or_i0" => {
                let p = sub(self)?;
                OrI0(p, self.brace_formula()?)
            }
            "or_i1" => {
                let a = self.brace_formula()?;
                OrI1(a, sub(self)?)
            }
            "or_e" => {
                let m = sub(self)?;
                let h1 = self.binder()?;
                let q1 = sub(self)?;
                let h2 = self.binder()?;
                let q2 = sub(self)?;
                OrE(m, h1, q1, h2, q2)
            }
            "forall_i" => {
                let x = self.binder()?;
                ForallI(x, sub(self)?)
            }
            "forall_e" => {
                let p = sub(self)?;
                ForallE(p, self.bracket_term()?)
            }
            "exists_i" => {
                let t = self.bracket_term()?;
                let f = self.brace_formula()?;
                ExistsI(t, f, sub(self)?)
            }
            "exists_e" => {
                let m = sub(self)?;
                let x = self.binder()?;
                let h = self.binder()?;
                ExistsE(m, x, h, sub(self)?)
            }
            "induction" => Induction(sub(self)?, sub(self)?),
            "post" => {
                let rspan = self.span();
                let r: PostRule = self.ident()?.parse().map_err(|e: String| Diagnostic::error(rspan, e))?;
                let f = self.brace_formula()?;
                let mut ps = Vec::new();
                while self.starts_sub() {
                    ps.push(*sub(self)?);
                }
                Post(r, ps, f)
            }
            "axiom" => AtomicAxiom(self.brace_formula()?),
            "em1" => EM1(self.predicate()?),
            "chi_ax" | "phi_ax" => {
                let pspan = self.span();
                let p = self.predicate()?;
                let arity = self.env.predicate_arity(&p).unwrap_or(0);
                if arity < 2 {
                    return Err(Diagnostic::error(pspan, format!("`{p}` needs arity at least 2")));
                }
                let k = arity - 1;
                let mut args = Vec::new();
                for _ in 0..k {
                    args.push(self.bracket_term()?);
                }
                if rule == "chi_ax" {
                    let t = self.bracket_term()?;
                    ChiAxiom(p, args, t)
                } else {
                    PhiAxiom(p, args)
                }
            }
            other => return Err(Diagnostic::error(span, format!("unknown proof rule `{other}`"))),
        };
        Ok((node, SpanTree { span, children: kids }))
    }

    fn predicate(&mut self) -> PResult<Name> {
        let span = self.span();
        let p = Name::new(&self.ident()?);
        if self.env.predicate_arity(&p).is_none() {
            return Err(Diagnostic::error(span, format!("`{p}` is not a predicate N^k -> Bool")));
        }
        Ok(p)
    }

    // ---- definitions ----

    /// `def name : type = term;`
    pub(crate) fn definition(&mut self) -> PResult<(Span, Name, TypeExpr, Term)> {
        let span = self.span();
        self.expect_kw("def")?;
        let name = self.binder()?;
        self.expect(Tok::Colon)?;
        let ty = self.ty()?;
        self.expect(Tok::Eq)?;
        let body = self.term()?;
        self.expect(Tok::Semi)?;
        Ok((span, name, ty, body))
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }
}

pub(crate) fn with_parser<T>(
    env: &DefEnv,
    text: &str,
    f: impl FnOnce(&mut Parser<'_>) -> PResult<T>,
) -> PResult<T> {
    let toks = lex(text)?;
    let mut p = Parser::new(&toks, 0, env);
    let r = f(&mut p)?;
    p.expect_eof()?;
    Ok(r)
}
