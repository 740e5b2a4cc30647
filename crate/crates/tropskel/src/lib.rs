//! Exact polyhedral and tropical geometry for skeleta of open complete
//! intersections in toric varieties.
//!
//! The crate is organised in two layers. The exact layer (`rat`, `feas`,
//! `geom`, `nefpart`, `subdiv`, `tropical`) works over arbitrary-precision
//! rationals: polytopes, polar duality, nef partitions and their duals,
//! regular subdivisions, tropical cell complexes of complete intersections,
//! and the transversal-cone fan machinery (`skeleton`). The analytic layer
//! (`numeric`, `polydist`, `potential`, `tailor`, `smooth`) works in `f64`:
//! piecewise-distance constants, adapted potentials, tailoring cut-offs and
//! the smoothing stack, each shipping its own verification routines.
//!
//! Conventions used throughout:
//! * normal vectors point **outward**: the normal cone of a face consists of
//!   the functionals maximised on it;
//! * vertex lists, facet lists and cell labels are sorted lexicographically,
//!   so equal objects serialize identically;
//! * every randomised certificate takes an explicit seed.

pub mod rat;
pub mod feas;
pub mod geom;
pub mod nefpart;
pub mod subdiv;
pub mod tropical;
pub mod skeleton;
pub mod polydist;
pub mod numeric;
pub mod potential;
pub mod tailor;
pub mod smooth;
pub mod par;
pub mod io;
pub mod examples;

pub use rat::{QMat, QVec, Rat};
