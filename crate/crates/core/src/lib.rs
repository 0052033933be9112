//! Surface realization from unordered, lemmatized Universal Dependencies
//! structures.
//!
//! The pipeline has two halves:
//!
//! 1. **Reinflection.** Each lemma is turned into its surface form by a
//!    character-level encoder-decoder ([`reinflect`]) conditioned on a
//!    UniMorph-style tag produced by [`morphmap`].
//! 2. **Ordering.** The bag of surface forms is linearized by searching for
//!    the arrangement with the highest score under a backoff n-gram model
//!    ([`lm`], [`order`]).
//!
//! [`conllu`] reads and writes treebanks, [`eval`] scores the output with
//! BLEU, NIST and a normalized edit distance, and [`pipeline`] glues the
//! pieces together for batch use.
//!
//! ```
//! use ud_realize::lm::{build_vocab, train_lm};
//! use ud_realize::order::{realize_order, OrderConfig};
//!
//! let corpus = vec![
//!     "the cat sleeps".to_string(),
//!     "the dog sleeps".to_string(),
//!     "the cat eats".to_string(),
//! ];
//! let vocab = build_vocab(&corpus);
//! let model = train_lm(&corpus, 3, &vocab).unwrap();
//!
//! let out = realize_order(&["sleeps", "cat", "the"], &model, &OrderConfig::default()).unwrap();
//! assert_eq!(out.text, "The cat sleeps .");
//! ```

pub mod conllu;
pub mod diag;
pub mod eval;
pub mod lm;
pub mod morphmap;
pub mod order;
pub mod pipeline;
pub mod reinflect;
pub mod text;

pub use diag::Diagnostic;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/treebanks.md")]
    mod treebanks {}
    #[doc = include_str!("../../../book/src/morphology.md")]
    mod morphology {}
    #[doc = include_str!("../../../book/src/reinflection.md")]
    mod reinflection {}
    #[doc = include_str!("../../../book/src/language-model.md")]
    mod language_model {}
    #[doc = include_str!("../../../book/src/ordering.md")]
    mod ordering {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
