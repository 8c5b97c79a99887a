//! Exact arithmetic engine for curvature invariants of connections in
//! positive characteristic and of q-difference connections at roots of
//! unity, together with the supporting symplectic and cluster calculus.
//!
//! Everything here is exact: coefficients live in `Z/m`, in prime fields,
//! or in monic univariate quotients of `Z/m`; polynomials are sparse
//! Laurent polynomials; no floating point anywhere.
//!
//! Module map:
//! - [`rings`]: coefficient rings, locality checks, residue maps.
//! - [`multipoly`]: sparse Laurent polynomials, rational functions,
//!   polynomial matrices with division-free characteristic polynomials.
//! - [`dmod`]: Weyl algebra normal ordering, flat connections, curvature
//!   by Frobenius-power iteration, eigenvalue one-forms, closedness tests.
//! - [`qmod`]: q-Weyl algebras on symmetrized torus bases, q-connections,
//!   curvature at roots of unity, symplectic twists, coordinate search.
//! - [`psupport`]: Groebner bases, Krull dimension, Poisson brackets,
//!   coisotropy certificates.
//! - [`cluster`]: seed and compatible-pair mutation, exchange charts over
//!   Q, torus isogeny decomposition of an integer skew form.

pub mod cluster;
pub mod dmod;
pub mod multipoly;
pub mod psupport;
pub mod qmod;
pub mod rings;
