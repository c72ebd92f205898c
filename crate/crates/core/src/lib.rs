//! Finite-precision probability tables for arithmetic and range coding.
//!
//! Given a source distribution `p` over `m` symbols, this crate finds
//! integer frequency tables `f/t` that approximate `p` as closely as
//! possible in the max-norm, measures the coding redundancy `D(p‖f/t)` they
//! cost exactly, bounds it from above, plans register widths for a target
//! redundancy, and drives a range coder with the resulting tables.

pub mod approx;
pub mod bounds;
pub mod coder;
pub mod error;
pub mod precision;
pub mod prob_model;

pub use approx::{
    approximation_quality, beats_fact_constant, best_table_under_width, cf_convergents, continued_fraction,
    exhaustive_best, record_scan, round_min_max, Convergent, Objective, RecordScan, ScanEntry,
};
pub use bounds::{
    bound_report, corollary1_width, corollary2_width, kappa_select, kl_divergence, lemma1_bound, lemma1_bound_real,
    plan_precision, theorem1_bound, theorem2_bound_binary, theorem2_bound_mary, BoundReport, Divergence, Kappa,
    PlanMode, PrecisionPlan, WidthBound,
};
pub use coder::{decode, decode_framed, encode, encode_framed, measure_rate, sample_symbols, RateReport};
pub use error::{Error, Result};
pub use precision::Precision;
pub use prob_model::{
    cumulative, error_profile, memory_cost, register_width, Cumulative, ErrorProfile, FrequencyTable, ProbabilityVector,
};

/// Book chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/rounding.md")]
    mod rounding {}
    #[doc = include_str!("../../../book/src/records.md")]
    mod records {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/coder.md")]
    mod coder {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
