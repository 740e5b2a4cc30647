//! Nef partitions of reflexive polytopes: validation, the dual partition,
//! the duality theorem checks, irreducibility, and grouping/cogrouping.
//!
//! A nef partition is an ordered Minkowski decomposition of a reflexive
//! polytope into lattice polytopes containing the origin. Summand order is
//! significant everywhere: coefficient data downstream is per index.

use crate::geom::{convex_hull, minkowski_sum, Cone, GeomError, Polytope};
use crate::rat::{qvec_from_z, QVec, Rat};
use itertools::Itertools;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NefError {
    #[error("Minkowski sum of the summands is not reflexive")]
    SumNotReflexive,
    #[error("summand {0} does not contain the origin")]
    SummandMissingOrigin(usize),
    #[error("summand {0} is not a lattice polytope")]
    SummandNotLattice(usize),
    #[error("bad index partition: {0}")]
    BadPartition(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NefPartition {
    /// The reflexive Minkowski sum of the summands.
    pub parent: Polytope,
    pub summands: Vec<Polytope>,
}

/// Disjoint nonempty blocks covering `0..r` (stored 0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl IndexPartition {
    pub fn new(blocks: Vec<Vec<usize>>, r: usize) -> Result<Self, NefError> {
        let mut seen = vec![false; r];
        for b in &blocks {
            if b.is_empty() {
                return Err(NefError::BadPartition("empty block".into()));
            }
            for &i in b {
                if i >= r {
                    return Err(NefError::BadPartition(format!("index {} out of range", i)));
                }
                if seen[i] {
                    return Err(NefError::BadPartition(format!("index {} repeated", i)));
                }
                seen[i] = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(NefError::BadPartition("blocks do not cover all indices".into()));
        }
        Ok(IndexPartition { blocks })
    }

    pub fn identity(r: usize) -> Self {
        IndexPartition {
            blocks: (0..r).map(|i| vec![i]).collect(),
        }
    }
}

impl NefPartition {
    pub fn r(&self) -> usize {
        self.summands.len()
    }

    /// Support value of summand `j` in direction `y`.
    pub fn psi(&self, j: usize, y: &[Rat]) -> Rat {
        self.summands[j].support_value(y)
    }
}

pub fn validate_nef_partition(summands: &[Polytope]) -> Result<NefPartition, NefError> {
    assert!(!summands.is_empty(), "need at least one summand");
    let rank = summands[0].rank;
    let zero = vec![Rat::zero(); rank];
    for (j, s) in summands.iter().enumerate() {
        if !s.is_lattice() {
            return Err(NefError::SummandNotLattice(j));
        }
        if !s.contains(&zero) {
            return Err(NefError::SummandMissingOrigin(j));
        }
    }
    let mut parent = summands[0].clone();
    for s in &summands[1..] {
        parent = minkowski_sum(&parent, s)?;
    }
    if !parent.is_reflexive() {
        return Err(NefError::SumNotReflexive);
    }
    Ok(NefPartition {
        parent,
        summands: summands.to_vec(),
    })
}

/// The dual partition: summand `j` is the hull of 0 and the lattice points
/// of the polar dual on which the support of summand `j` equals 1.
pub fn dual_nef_partition(nef: &NefPartition) -> Result<NefPartition, NefError> {
    let dual_parent = nef.parent.polar_dual()?;
    let lattice = dual_parent.lattice_points();
    let rank = nef.parent.rank;
    let mut summands = Vec::with_capacity(nef.r());
    for j in 0..nef.r() {
        let mut pts: Vec<QVec> = vec![vec![Rat::zero(); rank]];
        for y in &lattice {
            let qy = qvec_from_z(y);
            if nef.psi(j, &qy).is_one() {
                pts.push(qy);
            }
        }
        let hull = convex_hull(&pts)?;
        if !hull.is_lattice() {
            return Err(NefError::SummandNotLattice(j));
        }
        summands.push(hull);
    }
    let mut parent = summands[0].clone();
    for s in &summands[1..] {
        parent = minkowski_sum(&parent, s)?;
    }
    if !parent.is_reflexive() {
        return Err(NefError::SumNotReflexive);
    }
    Ok(NefPartition { parent, summands })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityReport {
    /// The dual parent is reflexive.
    pub dual_parent_reflexive: bool,
    /// polar(dual parent) equals the hull of the primal summands.
    pub dual_polar_is_hull_of_summands: bool,
    /// polar(parent) equals the hull of the dual summands.
    pub polar_is_hull_of_dual_summands: bool,
}

impl DualityReport {
    pub fn all_hold(&self) -> bool {
        self.dual_parent_reflexive
            && self.dual_polar_is_hull_of_summands
            && self.polar_is_hull_of_dual_summands
    }
}

pub fn verify_duality_theorem(
    nef: &NefPartition,
    dual: &NefPartition,
) -> Result<DualityReport, NefError> {
    let dual_parent_reflexive = dual.parent.is_reflexive();
    let hull_of_summands = convex_hull(
        &nef.summands
            .iter()
            .flat_map(|s| s.vertices.clone())
            .collect::<Vec<_>>(),
    )?;
    let hull_of_duals = convex_hull(
        &dual
            .summands
            .iter()
            .flat_map(|s| s.vertices.clone())
            .collect::<Vec<_>>(),
    )?;
    let dual_polar_is_hull_of_summands = if dual_parent_reflexive {
        dual.parent.polar_dual()? == hull_of_summands
    } else {
        false
    };
    let polar_is_hull_of_dual_summands = nef.parent.polar_dual()? == hull_of_duals;
    Ok(DualityReport {
        dual_parent_reflexive,
        dual_polar_is_hull_of_summands,
        polar_is_hull_of_dual_summands,
    })
}

/// No proper block of summands Minkowski-sums to a polytope with 0 in its
/// relative interior.
pub fn is_irreducible(nef: &NefPartition) -> bool {
    let r = nef.r();
    let zero = vec![Rat::zero(); nef.parent.rank];
    for subset in (0..r).powerset() {
        if subset.is_empty() || subset.len() == r {
            continue;
        }
        let mut sum = nef.summands[subset[0]].clone();
        for &j in &subset[1..] {
            sum = minkowski_sum(&sum, &nef.summands[j]).expect("same rank");
        }
        if sum.contains_in_relint(&zero) {
            return false;
        }
    }
    true
}

/// The cones spanned by distinct summands intersect only at the origin.
pub fn summand_cones_disjoint(nef: &NefPartition) -> bool {
    let cones: Vec<Cone> = nef
        .summands
        .iter()
        .map(|s| Cone::from_qvec_rays(s.rank, &s.vertices))
        .collect();
    for i in 0..cones.len() {
        for j in (i + 1)..cones.len() {
            if cones[i].intersects_nontrivially(&cones[j]) {
                return false;
            }
        }
    }
    true
}

/// Grouped partition (Minkowski block sums on the primal side) and cogrouped
/// partition (hulls of blocks on the dual side). Checks that cogrouping is
/// exactly the dual of grouping.
pub fn regroup(
    nef: &NefPartition,
    dual: &NefPartition,
    part: &IndexPartition,
) -> Result<(NefPartition, NefPartition), NefError> {
    let grouped_summands: Vec<Polytope> = part
        .blocks
        .iter()
        .map(|block| {
            let mut sum = nef.summands[block[0]].clone();
            for &j in &block[1..] {
                sum = minkowski_sum(&sum, &nef.summands[j])?;
            }
            Ok(sum)
        })
        .collect::<Result<_, GeomError>>()?;
    let grouped = validate_nef_partition(&grouped_summands)?;
    let cogrouped_summands: Vec<Polytope> = part
        .blocks
        .iter()
        .map(|block| {
            let pts: Vec<QVec> = block
                .iter()
                .flat_map(|&j| dual.summands[j].vertices.clone())
                .collect();
            convex_hull(&pts)
        })
        .collect::<Result<_, GeomError>>()?;
    let mut parent = cogrouped_summands[0].clone();
    for s in &cogrouped_summands[1..] {
        parent = minkowski_sum(&parent, s)?;
    }
    let cogrouped = NefPartition {
        parent,
        summands: cogrouped_summands,
    };
    let dual_of_grouped = dual_nef_partition(&grouped)?;
    if dual_of_grouped.summands != cogrouped.summands {
        return Err(NefError::BadPartition(
            "cogrouping disagrees with the dual of the grouping".into(),
        ));
    }
    Ok((grouped, cogrouped))
}

/// Support-function identities at a single direction:
/// grouping sums supports, cogrouping takes the maximum.
pub fn support_identities_at(
    nef: &NefPartition,
    dual: &NefPartition,
    part: &IndexPartition,
    grouped: &NefPartition,
    cogrouped: &NefPartition,
    y: &[Rat],
) -> bool {
    for (i, block) in part.blocks.iter().enumerate() {
        let sum: Rat = block.iter().map(|&j| nef.psi(j, y)).sum();
        if grouped.psi(i, y) != sum {
            return false;
        }
        let max = block
            .iter()
            .map(|&j| dual.psi(j, y))
            .max()
            .expect("nonempty block");
        if cogrouped.psi(i, y) != max {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::rat::qvec;

    #[test]
    fn cube_pair_validates_with_cube_parent() {
        let nef = examples::cube_nef_pair();
        assert_eq!(nef.r(), 2);
        assert!(nef.parent.is_reflexive());
        assert_eq!(nef.parent, examples::cube());
    }

    #[test]
    fn single_summand_partition_is_valid() {
        let nef = validate_nef_partition(&[examples::cube()]).unwrap();
        assert_eq!(nef.r(), 1);
        assert_eq!(nef.parent, examples::cube());
    }

    #[test]
    fn translated_summand_is_rejected() {
        // a shift off the origin in a new direction loses the origin
        let shifted = examples::delta1().translate(&qvec(&[0, 1, 0]));
        let err = validate_nef_partition(&[shifted, examples::delta2()]).unwrap_err();
        assert!(matches!(err, NefError::SummandMissingOrigin(0)));
        // a shift along the summand keeps 0 on the boundary but breaks the sum
        let along = examples::delta1().translate(&qvec(&[1, 0, 0]));
        let err2 = validate_nef_partition(&[along, examples::delta2()]).unwrap_err();
        assert!(matches!(err2, NefError::SumNotReflexive));
    }

    #[test]
    fn dual_of_cube_pair_matches_expected_vertex_sets() {
        let nef = examples::cube_nef_pair();
        let dual = dual_nef_partition(&nef).unwrap();
        assert_eq!(dual.summands[0], examples::nabla1());
        assert_eq!(dual.summands[1], examples::nabla2());
    }

    #[test]
    fn dual_of_dual_returns_the_original_summands() {
        let nef = examples::cube_nef_pair();
        let dual = dual_nef_partition(&nef).unwrap();
        let back = dual_nef_partition(&dual).unwrap();
        assert_eq!(back.summands, nef.summands);
    }

    #[test]
    fn dual_of_single_cube_is_the_octahedron() {
        let nef = validate_nef_partition(&[examples::cube()]).unwrap();
        let dual = dual_nef_partition(&nef).unwrap();
        assert_eq!(dual.summands.len(), 1);
        assert_eq!(dual.summands[0], examples::cube().polar_dual().unwrap());
    }

    #[test]
    fn duality_theorem_holds_on_cube_pair() {
        let nef = examples::cube_nef_pair();
        let dual = dual_nef_partition(&nef).unwrap();
        let report = verify_duality_theorem(&nef, &dual).unwrap();
        assert!(report.all_hold());
    }

    #[test]
    fn corrupted_dual_fails_the_duality_check() {
        let nef = examples::cube_nef_pair();
        let mut dual = dual_nef_partition(&nef).unwrap();
        // drop a vertex of the second dual summand
        let kept: Vec<QVec> = dual.summands[1].vertices[1..].to_vec();
        dual.summands[1] = convex_hull(&kept).unwrap();
        let report = verify_duality_theorem(&nef, &dual).unwrap();
        assert!(!report.polar_is_hull_of_dual_summands);
    }

    #[test]
    fn cube_pair_is_irreducible_but_direct_sum_is_not() {
        assert!(is_irreducible(&examples::cube_nef_pair()));
        // [-1,1]e1 (+) [-1,1]e2 in the plane: each block has 0 in its relint
        let s1 = convex_hull(&[qvec(&[-1, 0]), qvec(&[1, 0])]).unwrap();
        let s2 = convex_hull(&[qvec(&[0, -1]), qvec(&[0, 1])]).unwrap();
        let nef = validate_nef_partition(&[s1, s2]).unwrap();
        assert!(!is_irreducible(&nef));
        let single = validate_nef_partition(&[examples::cube()]).unwrap();
        assert!(is_irreducible(&single));
    }

    #[test]
    fn summand_cones_meet_only_at_origin_for_dual_pair() {
        let nef = examples::cube_nef_pair();
        let dual = dual_nef_partition(&nef).unwrap();
        assert!(summand_cones_disjoint(&dual));
        // negative control: two summands sharing the ray e1
        let s1 = convex_hull(&[qvec(&[0, 0]), qvec(&[1, 0])]).unwrap();
        let s2 = convex_hull(&[qvec(&[0, 0]), qvec(&[2, 0]), qvec(&[0, 1])]).unwrap();
        let fake = NefPartition {
            parent: s2.clone(),
            summands: vec![s1, s2],
        };
        assert!(!summand_cones_disjoint(&fake));
    }

    #[test]
    fn regroup_identity_and_total_block() {
        let nef = examples::cube_nef_pair();
        let dual = dual_nef_partition(&nef).unwrap();
        let id = IndexPartition::identity(2);
        let (g, c) = regroup(&nef, &dual, &id).unwrap();
        assert_eq!(g.summands, nef.summands);
        assert_eq!(c.summands, dual.summands);
        let total = IndexPartition::new(vec![vec![0, 1]], 2).unwrap();
        let (g2, c2) = regroup(&nef, &dual, &total).unwrap();
        assert_eq!(g2.summands, vec![examples::cube()]);
        assert_eq!(c2.summands, vec![examples::cube().polar_dual().unwrap()]);
        // refinement containment: each dual summand sits inside the hull
        for s in &dual.summands {
            for v in &s.vertices {
                assert!(c2.summands[0].contains(v));
            }
        }
    }

    #[test]
    fn bad_partitions_are_rejected() {
        assert!(IndexPartition::new(vec![vec![0], vec![0]], 2).is_err());
        assert!(IndexPartition::new(vec![vec![0]], 2).is_err());
        assert!(IndexPartition::new(vec![vec![0], vec![2]], 2).is_err());
        assert!(IndexPartition::new(vec![vec![0], vec![]], 1).is_err());
    }
}
