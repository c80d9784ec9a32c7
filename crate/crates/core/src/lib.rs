//! Exact computational model of composition operators on discrete
//! measure spaces, realized as weighted shifts on functional graphs.
//!
//! A self-map `T` of a finite vertex set (possibly extended by
//! polynomial-measure rays) induces a functional graph in which every
//! vertex has in-degree one. The crate classifies that graph, builds
//! the associated weighted shift from a positive measure, and decides
//! operator-theoretic properties with rational arithmetic only:
//!
//! * `m`-isometry, both by sweeping defect sums and by a finite rank
//!   certificate over the cycle;
//! * complete hyperexpansivity;
//! * subnormality of the Cauchy dual, via a two-atom moment criterion.
//!
//! All scalars are arbitrary-precision rationals; weights enter every
//! formula squared, so no square root is ever taken and every verdict
//! is exact.

#![forbid(unsafe_code)]

pub mod cauchydual;
pub mod exactmath;
pub mod graph;
pub mod misometry;
pub mod shift;
