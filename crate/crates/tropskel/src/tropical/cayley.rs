//! The Cayley construction: factor supports embedded at unit markers in
//! `r` extra coordinates, and the induced mixed subdivisions of the
//! Minkowski sum.
//!
//! A face of the regular subdivision of the lifted Cayley points projects to
//! a tuple of per-factor tie sets; faces touching every factor correspond to
//! the cells of the mixed subdivision, and the tuples with every factor
//! positive-dimensional are the duals of the intersection cells.

use crate::geom::{convex_hull, minkowski_sum, Polytope};
use crate::rat::{qvec_from_z, QVec, Rat, ZVec};
use crate::subdiv::{regular_subdivision, HeightFunction};
use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{tci_complex, CellLabel, TropError, TropicalModel};

/// The joint polytope of the factors in `rank + r` coordinates: each vertex
/// `v` of the j-th factor embeds as `(v, e_j)`.
pub fn cayley_polytope(factors: &[Polytope]) -> Result<Polytope, TropError> {
    if factors.is_empty() {
        return Err(TropError::NoFactors);
    }
    let rank = factors[0].rank;
    if factors.iter().any(|p| p.rank != rank) {
        return Err(TropError::MixedRank);
    }
    let r = factors.len();
    let mut pts: Vec<QVec> = Vec::new();
    for (j, p) in factors.iter().enumerate() {
        for v in &p.vertices {
            pts.push(cayley_point_q(v, j, r));
        }
    }
    convex_hull(&pts).map_err(TropError::from)
}

fn cayley_point_q(v: &[Rat], j: usize, r: usize) -> QVec {
    let mut out = v.to_vec();
    out.extend((0..r).map(|k| if k == j { Rat::one() } else { Rat::zero() }));
    out
}

fn cayley_point_z(v: &[BigInt], j: usize, r: usize) -> ZVec {
    let mut out = v.to_vec();
    out.extend((0..r).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
    out
}

/// One cell of the mixed subdivision of the Minkowski sum of the factor
/// polytopes, recorded by its per-factor tie sets.
#[derive(Clone, Debug)]
pub struct MixedCell {
    pub label: CellLabel,
    /// Dimensions of the per-factor pieces.
    pub summand_dims: Vec<usize>,
    /// The Minkowski sum of the pieces.
    pub polytope: Polytope,
    pub dim: usize,
    /// Every factor's piece has positive dimension.
    pub mixed: bool,
}

/// The mixed subdivision induced by the heights, through the lower hull of
/// the lifted Cayley points. Cells of every dimension are returned, one per
/// Cayley face whose tie set meets all factors.
pub fn mixed_subdivision(model: &TropicalModel) -> Result<Vec<MixedCell>, TropError> {
    let r = model.r();
    let mut points: Vec<ZVec> = Vec::new();
    let mut values: Vec<Rat> = Vec::new();
    // (factor, index-in-factor) for each Cayley point, in push order
    let mut origin: Vec<(usize, usize)> = Vec::new();
    for (j, h) in model.heights.iter().enumerate() {
        for (i, p) in h.points.iter().enumerate() {
            points.push(cayley_point_z(p, j, r));
            values.push(h.values[i].clone());
            origin.push((j, i));
        }
    }
    let cayley_heights = HeightFunction::new(points, values)?;
    let sub = regular_subdivision(&cayley_heights)?;
    let mut out: Vec<MixedCell> = Vec::new();
    for (face, _) in sub.all_faces() {
        let mut per_factor: Vec<Vec<usize>> = vec![Vec::new(); r];
        for &i in &face {
            let (j, k) = origin[i];
            per_factor[j].push(k);
        }
        if per_factor.iter().any(|s| s.is_empty()) {
            continue;
        }
        let label = CellLabel::new(per_factor);
        let mut summand_dims = Vec::with_capacity(r);
        let mut sum: Option<Polytope> = None;
        for (j, s) in label.per_factor.iter().enumerate() {
            let pts: Vec<QVec> = s
                .iter()
                .map(|&i| qvec_from_z(&model.heights[j].points[i]))
                .collect();
            let piece = convex_hull(&pts)?;
            summand_dims.push(piece.dim);
            sum = Some(match sum {
                None => piece,
                Some(acc) => minkowski_sum(&acc, &piece)?,
            });
        }
        let polytope = sum.expect("at least one factor");
        let mixed = summand_dims.iter().all(|&d| d >= 1);
        out.push(MixedCell {
            dim: polytope.dim,
            label,
            summand_dims,
            polytope,
            mixed,
        });
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

/// Report comparing the Cayley route with the direct stratification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CayleyAgreement {
    /// Mixed cells and intersection cells carry identical label sets.
    pub labels_match: bool,
    /// Corresponding cells have complementary dimensions.
    pub dims_complementary: bool,
    /// All-factor Cayley faces are exactly the realised strata.
    pub strata_match: bool,
}

impl CayleyAgreement {
    pub fn all_hold(&self) -> bool {
        self.labels_match && self.dims_complementary && self.strata_match
    }
}

/// Cross-checks the lifted Cayley subdivision against the direct tie-set
/// enumeration; both routes are computed independently.
pub fn cayley_direct_agreement(model: &TropicalModel) -> Result<CayleyAgreement, TropError> {
    let complex = tci_complex(model)?;
    let mixed = mixed_subdivision(model)?;
    let mut cell_labels: Vec<&CellLabel> = complex.cells.iter().map(|c| &c.label).collect();
    cell_labels.sort();
    let mut mixed_labels: Vec<&CellLabel> = mixed
        .iter()
        .filter(|m| m.mixed)
        .map(|m| &m.label)
        .collect();
    mixed_labels.sort();
    let labels_match = cell_labels == mixed_labels;
    let dims_complementary = labels_match
        && complex.cells.iter().all(|c| {
            let m = mixed
                .iter()
                .find(|m| m.label == c.label)
                .expect("matching mixed cell");
            c.dim + m.dim == model.rank
        });
    let mut strata: Vec<&CellLabel> = complex
        .cells
        .iter()
        .chain(complex.regions.iter())
        .map(|c| &c.label)
        .collect();
    strata.sort();
    let mut all_faces: Vec<&CellLabel> = mixed.iter().map(|m| &m.label).collect();
    all_faces.sort();
    let strata_match = strata == all_faces;
    Ok(CayleyAgreement {
        labels_match,
        dims_complementary,
        strata_match,
    })
}

/// Deterministic pseudo-random instances for the cross-check: supports drawn
/// from a small box with distinct rational heights.
pub fn random_model(
    rng: &mut impl rand::Rng,
    rank: usize,
    r: usize,
    max_points: usize,
) -> TropicalModel {
    let mut heights: Vec<HeightFunction> = Vec::with_capacity(r);
    for _ in 0..r {
        let count = rng.gen_range(2..=max_points.max(2));
        let mut pts: Vec<ZVec> = Vec::new();
        while pts.len() < count {
            let p: ZVec = (0..rank)
                .map(|_| BigInt::from(rng.gen_range(-2i64..=2)))
                .collect();
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let vals: Vec<Rat> = (0..count)
            .map(|_| Rat::new(BigInt::from(rng.gen_range(-8i64..=8)), BigInt::from(4)))
            .collect();
        heights.push(HeightFunction::new(pts, vals).expect("distinct points"));
    }
    TropicalModel::new(heights).expect("consistent rank")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::rat::{rat, zvec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cayley_of_the_dual_summands() {
        let (n1, n2) = (examples::nabla1(), examples::nabla2());
        let c = cayley_polytope(&[n1, n2]).unwrap();
        assert_eq!(c.rank, 5);
        assert_eq!(c.dim, 4);
        assert_eq!(c.vertices.len(), 6);
        // markers split the vertex list three and three
        let with_first_marker = c
            .vertices
            .iter()
            .filter(|v| v[3] == rat(1) && v[4] == rat(0))
            .count();
        assert_eq!(with_first_marker, 3);
        assert_eq!(c.lattice_points().len(), 8);
    }

    #[test]
    fn mixed_cells_match_the_direct_route_on_the_running_pair() {
        let model = crate::tropical::tests::running_model();
        let agreement = cayley_direct_agreement(&model).unwrap();
        assert!(agreement.all_hold(), "{agreement:?}");
        let mixed = mixed_subdivision(&model).unwrap();
        let n_mixed = mixed.iter().filter(|m| m.mixed).count();
        assert_eq!(n_mixed, 24);
    }

    #[test]
    fn distinct_roots_on_the_line_have_no_mixed_cells() {
        let h1 = HeightFunction::new(vec![zvec(&[0]), zvec(&[1])], vec![rat(0), rat(0)]).unwrap();
        let h2 = HeightFunction::new(vec![zvec(&[0]), zvec(&[1])], vec![rat(0), rat(1)]).unwrap();
        let model = TropicalModel::new(vec![h1, h2]).unwrap();
        let mixed = mixed_subdivision(&model).unwrap();
        assert!(mixed.iter().all(|m| !m.mixed));
        assert!(cayley_direct_agreement(&model).unwrap().all_hold());
    }

    #[test]
    fn randomised_instances_agree_between_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut checked = 0;
        while checked < 8 {
            let rank = rng.gen_range(1..=2);
            let r = rng.gen_range(1..=2);
            let model = random_model(&mut rng, rank, r, 5);
            match cayley_direct_agreement(&model) {
                Ok(agreement) => {
                    assert!(agreement.all_hold(), "{agreement:?}");
                    checked += 1;
                }
                // non-transverse draws are legitimate; skip them
                Err(TropError::NotTransverse(_)) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }
}
