//! Surface syntax: lexer, recursive-descent parser, pretty-printer, the
//! default prelude of primitive recursive predicates and the command-line
//! driver.
//!
//! Every parse error is reported as a [`Diagnostic`] carrying the line and
//! column of the offending token.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use crate::kernel::{DefEnv, Term, TypeExpr};
use crate::logic::Formula;
use crate::proofs::ProofNode;
use crate::states::StateId;

pub mod cli;
pub mod lexer;
mod parser;
pub mod print;

pub use print::print_proof;

/// Source of the default definitions loaded unless `--no-prelude` is given.
pub const PRELUDE: &str = include_str!("prelude.defs");

static PRELUDE_ENV: LazyLock<DefEnv> = LazyLock::new(|| {
    let mut env = DefEnv::new();
    if let Err(d) = parse_defs(&mut env, PRELUDE) {
        panic!("built-in prelude is malformed: {d}");
    }
    env
});

/// A fresh copy of the definition environment built from [`PRELUDE`].
pub fn prelude_env() -> DefEnv {
    PRELUDE_ENV.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Error, span, message: message.into() }
    }

    /// `path:line:col: error: message`
    pub fn render(&self, path: &str) -> String {
        format!("{path}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.span.line, self.span.col, sev, self.message)
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    Term,
    Formula,
    Proof,
    State,
    Defs,
}

impl SourceKind {
    /// Kind implied by the file extension (`.term`, `.form`, `.proof`, `.state`, `.defs`).
    pub fn from_path(path: &Path) -> Option<SourceKind> {
        path.extension()?.to_str()?.parse().ok()
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<SourceKind, String> {
        match s {
            "term" => Ok(SourceKind::Term),
            "form" | "formula" => Ok(SourceKind::Formula),
            "proof" => Ok(SourceKind::Proof),
            "state" => Ok(SourceKind::State),
            "defs" => Ok(SourceKind::Defs),
            other => Err(format!("unknown source kind `{other}`")),
        }
    }
}

/// Source positions of a parsed proof, shaped like the proof tree itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    /// Span of the node at `path`, or of its deepest recorded ancestor.
    pub fn lookup(&self, path: &[usize]) -> Span {
        let mut node = self;
        for &i in path {
            match node.children.get(i) {
                Some(c) => node = c,
                None => break,
            }
        }
        node.span
    }
}

#[derive(Clone, Debug)]
pub struct ParsedProof {
    pub root: ProofNode,
    pub spans: SpanTree,
}

/// Any parsed source file.
#[derive(Clone, Debug)]
pub enum Ast {
    Term(Term),
    Formula(Formula),
    Proof(ParsedProof),
    State(StateId),
    Defs(DefEnv),
}

/// Parses `text` as the given kind. Definitions extend a copy of `env`.
pub fn parse(kind: SourceKind, env: &DefEnv, text: &str) -> Result<Ast, Diagnostic> {
    Ok(match kind {
        SourceKind::Term => Ast::Term(parse_term(env, text)?),
        SourceKind::Formula => Ast::Formula(parse_formula(env, text)?),
        SourceKind::Proof => Ast::Proof(parse_proof(env, text)?),
        SourceKind::State => Ast::State(parse_state(env, text)?),
        SourceKind::Defs => {
            let mut env = env.clone();
            parse_defs(&mut env, text)?;
            Ast::Defs(env)
        }
    })
}

pub fn parse_term(env: &DefEnv, text: &str) -> Result<Term, Diagnostic> {
    parser::with_parser(env, text, |p| p.term())
}

pub fn parse_type(text: &str) -> Result<TypeExpr, Diagnostic> {
    parser::with_parser(&DefEnv::new(), text, |p| p.ty())
}

pub fn parse_formula(env: &DefEnv, text: &str) -> Result<Formula, Diagnostic> {
    parser::with_parser(env, text, |p| p.formula())
}

/// Parses a proof file: zero or more `let name = proof;` lines followed by
/// the main proof.
pub fn parse_proof(env: &DefEnv, text: &str) -> Result<ParsedProof, Diagnostic> {
    parser::with_parser(env, text, |p| p.proof_file())
}

/// Parses `empty` or `state{P(n, ...)=m, ...}`, validating every atom.
pub fn parse_state(env: &DefEnv, text: &str) -> Result<StateId, Diagnostic> {
    parser::with_parser(env, text, |p| p.state_literal())
}

/// Adds the `def name : type = term;` entries of `text` to `env`, in order.
pub fn parse_defs(env: &mut DefEnv, text: &str) -> Result<(), Diagnostic> {
    let toks = lexer::lex(text)?;
    let mut pos = 0;
    loop {
        let (span, name, ty, body) = {
            let mut p = parser::Parser::new(&toks, pos, env);
            if p.at_eof() {
                return Ok(());
            }
            let d = p.definition()?;
            pos = p.pos;
            d
        };
        env.define(name, ty, body.into()).map_err(|e| Diagnostic::error(span, e.to_string()))?;
    }
}
