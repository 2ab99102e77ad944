//! Numerical laboratory for one-dimensional discrete Hardy–Rellich inequalities.
//!
//! The crate provides:
//!
//! * exact discrete calculus on finitely supported sequences ([`seq`]),
//! * weighted Hardy/Rellich identities on locally finite graphs ([`graph`]),
//! * the weight families behind the sharp inequalities, each with two
//!   independent evaluation routes ([`weights`]),
//! * sharpness probes: banded generalized eigenvalue sweeps, a continuum-limit
//!   sampler, an explicit counterexample family, and the order-raising
//!   iteration chain ([`sharpness`]),
//! * the lattice `Z^d` analogues on box truncations ([`lattice`]),
//! * the `l^p` Picone/Landau machinery ([`lp`]).
//!
//! All floating point accumulation goes through compensated summation
//! ([`sum::KahanSum`]); cancellation-prone cross-checks use double-double
//! arithmetic ([`sum::Dd`]).

pub mod graph;
pub mod lattice;
pub mod lp;
pub mod seq;
pub mod sharpness;
pub mod sum;
pub mod weights;
