//! The cube example used throughout the test suite and the CLI demos:
//! the 3-cube split into two prism summands, with its dual pair of
//! triangles in the octahedron, the fan over the induced boundary
//! triangulation, and a few auxiliary fans for edge cases.

use crate::geom::Polytope;
use crate::nefpart::{validate_nef_partition, NefPartition};
use crate::rat::{rat, Rat, ZVec, zvec};
use crate::skeleton::{fan_from_triangulation, summand_assignment, TriangulationFan};
use crate::subdiv::{regular_subdivision, HeightFunction};
use crate::tropical::TropicalModel;
use num_bigint::BigInt;
use num_traits::Zero;

/// conv(±e1 ±e2 ±e3)
pub fn cube() -> Polytope {
    Polytope::from_lattice_vertices(&[
        &[-1, -1, -1],
        &[-1, -1, 1],
        &[-1, 1, -1],
        &[-1, 1, 1],
        &[1, -1, -1],
        &[1, -1, 1],
        &[1, 1, -1],
        &[1, 1, 1],
    ])
}

/// conv(e1, e1+e3, -e1+e3, -e1) = [-1,1]e1 + [0,1]e3
pub fn delta1() -> Polytope {
    Polytope::from_lattice_vertices(&[&[1, 0, 0], &[1, 0, 1], &[-1, 0, 1], &[-1, 0, 0]])
}

/// conv(e2, e2-e3, -e2-e3, -e2) = [-1,1]e2 + [0,-1]e3
pub fn delta2() -> Polytope {
    Polytope::from_lattice_vertices(&[&[0, 1, 0], &[0, 1, -1], &[0, -1, -1], &[0, -1, 0]])
}

/// conv(η1, η3, -η1)
pub fn nabla1() -> Polytope {
    Polytope::from_lattice_vertices(&[&[1, 0, 0], &[0, 0, 1], &[-1, 0, 0]])
}

/// conv(η2, -η3, -η2)
pub fn nabla2() -> Polytope {
    Polytope::from_lattice_vertices(&[&[0, 1, 0], &[0, 0, -1], &[0, -1, 0]])
}

/// The validated two-summand decomposition of the cube.
pub fn cube_nef_pair() -> NefPartition {
    validate_nef_partition(&[delta1(), delta2()]).expect("cube pair is a valid decomposition")
}

/// The validated dual decomposition (parent is the sum of the triangles).
pub fn dual_pair() -> NefPartition {
    validate_nef_partition(&[nabla1(), nabla2()]).expect("dual pair is a valid decomposition")
}

/// Height 0 at the origin and 1 on the six unit vectors: the standard
/// heights on the lattice points of the octahedron.
pub fn octahedron_heights() -> Vec<(ZVec, Rat)> {
    let mut out = vec![(zvec(&[0, 0, 0]), rat(0))];
    for i in 0..3 {
        for s in [1i64, -1] {
            let mut v = [0i64; 3];
            v[i] = s;
            out.push((zvec(&v), rat(1)));
        }
    }
    out
}

/// The running pair of tropical polynomials in three variables: supports
/// {0, ±e1, e3} and {0, ±e2, -e3}, heights 0 at the origin and 1 elsewhere.
pub fn running_model() -> TropicalModel {
    let a1 = vec![
        zvec(&[0, 0, 0]),
        zvec(&[1, 0, 0]),
        zvec(&[-1, 0, 0]),
        zvec(&[0, 0, 1]),
    ];
    let a2 = vec![
        zvec(&[0, 0, 0]),
        zvec(&[0, 1, 0]),
        zvec(&[0, -1, 0]),
        zvec(&[0, 0, -1]),
    ];
    let h = |pts: Vec<ZVec>| {
        let vals = vec![rat(0), rat(1), rat(1), rat(1)];
        HeightFunction::new(pts, vals).unwrap()
    };
    TropicalModel::new(vec![h(a1), h(a2)]).unwrap()
}

/// Fan over the induced boundary triangulation of the octahedron: the
/// octant fan with rays ±e_i, labelled by the dual pair of triangles.
pub fn octant_fan() -> TriangulationFan {
    let h = HeightFunction::from_pairs(&octahedron_heights()).unwrap();
    let sub = regular_subdivision(&h).unwrap();
    let boundary = sub.restrict_to_boundary().unwrap();
    let assign = summand_assignment(&boundary.points, &dual_pair());
    fan_from_triangulation(&boundary, &assign).unwrap()
}

/// Fan of the ruled surface with rays (0,1), (1,1), (0,-1), (-1,0), built
/// from the boundary of the quadrilateral they span. One summand.
pub fn hirzebruch_fan() -> TriangulationFan {
    let pts = [
        zvec(&[0, 1]),
        zvec(&[1, 1]),
        zvec(&[0, -1]),
        zvec(&[-1, 0]),
        zvec(&[0, 0]),
    ];
    let vals = vec![rat(1), rat(1), rat(1), rat(1), rat(0)];
    let h = HeightFunction::new(pts.to_vec(), vals).unwrap();
    single_summand_fan(&h)
}

/// Boundary fan of the cross polytope in the given rank, one summand.
pub fn cross_fan(rank: usize) -> TriangulationFan {
    let mut pairs = vec![(vec![BigInt::from(0); rank], rat(0))];
    for i in 0..rank {
        for s in [1i64, -1] {
            let mut v = vec![BigInt::from(0); rank];
            v[i] = BigInt::from(s);
            pairs.push((v, rat(1)));
        }
    }
    let h = HeightFunction::from_pairs(&pairs).unwrap();
    single_summand_fan(&h)
}

/// The rank-1 fan with rays ±1, one summand.
pub fn segment_fan() -> TriangulationFan {
    cross_fan(1)
}

fn single_summand_fan(h: &HeightFunction) -> TriangulationFan {
    let sub = regular_subdivision(h).unwrap();
    let boundary = sub.restrict_to_boundary().unwrap();
    let assign: Vec<Option<usize>> = boundary
        .points
        .iter()
        .map(|p| {
            if p.iter().all(Zero::is_zero) {
                None
            } else {
                Some(0)
            }
        })
        .collect();
    fan_from_triangulation(&boundary, &assign).unwrap()
}
