//! Finitely presented algebraic 2-theories: operadic terms, rewrite paths,
//! truncated hom-categories and a model-structure classifier for
//! theory-morphisms.

pub mod category;
pub mod classify;
pub mod cells;
pub mod colimit;
pub mod equivalence;
pub mod error;
pub mod factor;
pub mod homcat;
pub mod kronecker;
pub mod levels;
pub mod lifting;
pub mod morphism;
pub mod normalize;
pub mod parallel;
pub mod parse;
pub mod presentation;
pub mod rewrite;
pub mod stdlib;
pub mod term;
pub mod verdict;

pub use error::{Error, Result};
pub use presentation::TheoryPresentation;
pub use rewrite::{RewriteStep, TwoCellPath};
pub use term::{Position, Term};
pub use verdict::Verdict;
