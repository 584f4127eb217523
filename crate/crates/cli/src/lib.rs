//! Library surface of the experiment driver: configuration parsing and
//! report assembly, shared by the binary and its tests.

// Precondition guards use negated comparisons so NaN values fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
