//! Corpus tooling for terminology-constrained machine translation.
//!
//! The pipeline is: load a parallel corpus and a bilingual term dictionary
//! ([`corpus`]), annotate sentence pairs with the terms they contain
//! ([`matcher`]), split the annotated corpus with balanced term lengths
//! ([`splitter`]), produce span-corrupted targets for the auxiliary span
//! prediction objective ([`corrupter`]), combine externally computed
//! log-probabilities into the joint loss ([`objective`]) and score
//! hypotheses with term-level metrics ([`metrics`]). [`analytics`] reports
//! corpus statistics and [`cli`] wires everything into the `termspan`
//! binary.

pub mod analytics;
pub mod cli;
pub mod consume;
pub mod corpus;
pub mod corrupter;
pub mod error;
pub mod jsonl;
pub mod matcher;
pub mod metrics;
pub mod objective;
pub mod seed;
pub mod splitter;

pub use error::{Error, Result};
