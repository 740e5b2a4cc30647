//! Exact polyhedral geometry: convex hulls, face lattices, cones and fans.
//!
//! Normal vectors point outward everywhere: the normal cone of a face is the
//! set of functionals maximised on that face.

pub mod polytope;
pub mod faces;
pub mod cone;
pub mod fan;

pub use cone::Cone;
pub use faces::{Face, FaceLattice};
pub use fan::Fan;
pub use polytope::{
    convex_hull, hrep_is_bounded, minkowski_sum, strict_witness, vertices_from_hrep, volume,
    volume_in_chart_of, AffineChart, Facet, GeomError, Polytope,
};
