//! Holds the `acceptance` test target, which checks the exact formulas,
//! the reconstruction and the samplers against their reference values in
//! one run. Nothing is exported.
//!
//! ```text
//! cargo test -p sepprob-validation --test acceptance
//! ```
