//! Learning-based realizability for Heyting Arithmetic with EM1.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`]: types and terms of the calculus, the definition environment
//!   and the type checker.
//! * [`states`]: atoms, states of knowledge and the consistent union.
//! * [`eval`]: weak normalization of closed learning terms and the
//!   approximation map `t[s]`.
//! * [`logic`]: arithmetical formulas and the realizer-type translation.
//! * [`proofs`]: natural-deduction proofs, the proof checker and realizer
//!   extraction.
//! * [`learning`]: bounded realizability checking, convergence on chains,
//!   the fixed-point learning loop and witness extraction.
//! * [`frontend`]: parsers, printers and the command-line driver.

pub mod eval;
pub mod frontend;
pub mod kernel;
pub mod learning;
pub mod logic;
pub mod proofs;
pub mod states;

pub use eval::{normalize, NormalForm, Strategy, Value};
pub use kernel::{typecheck, Context, DefEnv, Name, Term, TypeExpr};
pub use learning::{fixed_point, pi02_witness, realizes_at, LearnTrace, Verdict};
pub use logic::Formula;
pub use proofs::ProofNode;
pub use states::{Atom, State, StateId};
