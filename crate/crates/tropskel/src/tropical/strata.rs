//! Boundary strata of a compactifying fan: per cone, the truncations of the
//! factor polytopes in that direction, the restricted heights, and whether
//! the intersection meets the corresponding torus orbit.
//!
//! A stratum at a cone σ is cut out by the faces of the factor polytopes
//! maximised on relint σ. The fan must refine every factor's normal fan so
//! those faces are constant on the cone; the truncated family meets the
//! orbit exactly when every truncation has positive dimension.

use crate::geom::{Cone, Fan, Polytope};
use crate::rat::{dot, qvec_from_z, vadd, QVec, Rat, ZVec};
use crate::subdiv::HeightFunction;
use num_traits::Zero;

use super::{TropError, TropicalModel};

/// The data of one boundary stratum.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub cone_index: usize,
    /// Per factor, the face maximised on the cone's relative interior.
    pub truncated: Vec<Polytope>,
    /// Heights restricted to the support points on the truncations.
    pub heights: Vec<HeightFunction>,
    /// The intersection meets the orbit: every truncation has positive
    /// dimension.
    pub nonempty: bool,
}

/// A relative-interior point of the cone: the sum of its ray generators.
fn relint_point(cone: &Cone) -> QVec {
    let mut w = vec![Rat::zero(); cone.rank];
    for r in &cone.rays {
        w = vadd(&w, &qvec_from_z(r));
    }
    w
}

/// Truncates the factors along every cone.
///
/// Errors with [`TropError::NotARefinement`] when some cone straddles a wall
/// of a factor's normal fan, detected exactly: each ray generator must keep
/// the whole truncation maximal.
pub fn compactification_strata(
    model: &TropicalModel,
    cones: &[Cone],
) -> Result<Vec<Stratum>, TropError> {
    let factors: Vec<Polytope> = model
        .heights
        .iter()
        .map(|h| h.conv())
        .collect::<Result<_, _>>()?;
    let mut out = Vec::with_capacity(cones.len());
    for (ci, cone) in cones.iter().enumerate() {
        let w = relint_point(cone);
        let mut truncated = Vec::with_capacity(factors.len());
        let mut heights = Vec::with_capacity(factors.len());
        for (j, p) in factors.iter().enumerate() {
            let m = p.support_value(&w);
            let verts: Vec<QVec> = p
                .vertices
                .iter()
                .filter(|v| dot(&w, v) == m)
                .cloned()
                .collect();
            let face = crate::geom::convex_hull(&verts)?;
            // the cone must sit inside the normal cone of this face
            for ray in &cone.rays {
                let rq = qvec_from_z(ray);
                let rm = p.support_value(&rq);
                if face.vertices.iter().any(|v| dot(&rq, v) != rm) {
                    return Err(TropError::NotARefinement(ci));
                }
            }
            heights.push(model.heights[j].restrict_to(&face)?);
            truncated.push(face);
        }
        let nonempty = truncated.iter().all(|f| f.dim >= 1);
        out.push(Stratum {
            cone_index: ci,
            truncated,
            heights,
            nonempty,
        });
    }
    Ok(out)
}

/// Report of the projective-crepant-style unimodularity sweep: every cone of
/// dimension at most `rank - r` must be unimodular.
#[derive(Clone, Debug)]
pub struct MpcsReport {
    pub ok: bool,
    /// Ray sets of the failing cones, sorted.
    pub failing: Vec<Vec<ZVec>>,
}

/// Checks all faces of a simplicial fan up to dimension `rank - r`.
pub fn mpcs_check(fan: &Fan, r: usize) -> Result<MpcsReport, TropError> {
    let cutoff = fan.rank.saturating_sub(r);
    let mut seen: Vec<Vec<ZVec>> = Vec::new();
    let mut failing: Vec<Vec<ZVec>> = Vec::new();
    for cone in &fan.maximal {
        if !cone.is_simplicial() {
            return Err(TropError::NotSimplicial);
        }
        let k = cone.rays.len();
        for mask in 0u32..(1 << k) {
            let rays: Vec<ZVec> = (0..k)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| cone.rays[i].clone())
                .collect();
            if rays.len() > cutoff || rays.is_empty() || seen.contains(&rays) {
                continue;
            }
            seen.push(rays.clone());
            let sub = Cone::from_rays(fan.rank, &rays);
            if !sub.is_unimodular() {
                failing.push(rays);
            }
        }
    }
    failing.sort();
    Ok(MpcsReport {
        ok: failing.is_empty(),
        failing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::rat::zvec;
    use crate::subdiv::HeightFunction;

    fn dual_side_model() -> TropicalModel {
        let h = HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap();
        let dual = examples::dual_pair();
        let heights: Vec<HeightFunction> = dual
            .summands
            .iter()
            .map(|s| h.restrict_to(s).unwrap())
            .collect();
        TropicalModel::new(heights).unwrap()
    }

    #[test]
    fn strata_of_the_summand_sum_normal_fan() {
        let model = dual_side_model();
        let nabla = examples::dual_pair().parent.clone();
        let fan = Fan::normal_fan(&nabla);
        // maximal cones sit over vertices: both truncations are points
        let strata = compactification_strata(&model, &fan.maximal).unwrap();
        assert!(strata.iter().all(|s| !s.nonempty));
        assert!(strata
            .iter()
            .all(|s| s.truncated.iter().all(|f| f.dim == 0)));
    }

    #[test]
    fn facet_ray_with_two_positive_pieces_is_nonempty() {
        let model = dual_side_model();
        let ray = Cone::from_rays(3, &[zvec(&[0, 1, -1])]);
        let strata = compactification_strata(&model, &[ray]).unwrap();
        let s = &strata[0];
        assert!(s.nonempty);
        assert_eq!(s.truncated[0].dim, 1);
        assert_eq!(s.truncated[1].dim, 1);
        // restricted heights keep exactly the tied support points: the
        // origin still ties on the first segment but not on the second
        assert_eq!(s.heights[0].points.len(), 3);
        assert_eq!(s.heights[1].points.len(), 2);
    }

    #[test]
    fn vertex_normal_ray_gives_a_point_truncation() {
        let model = dual_side_model();
        // direction maximised at a single vertex of the first summand
        let ray = Cone::from_rays(3, &[zvec(&[2, 0, 1])]);
        let strata = compactification_strata(&model, &[ray]).unwrap();
        assert!(!strata[0].nonempty);
        assert_eq!(strata[0].truncated[0].dim, 0);
    }

    #[test]
    fn zero_cone_keeps_the_whole_factors() {
        let model = dual_side_model();
        let strata = compactification_strata(&model, &[Cone::origin(3)]).unwrap();
        assert!(strata[0].nonempty);
        assert_eq!(strata[0].truncated[0].vertices, model.heights[0].conv().unwrap().vertices);
    }

    #[test]
    fn straddling_cone_is_rejected() {
        let model = dual_side_model();
        // the positive orthant straddles the wall between the faces at
        // (1,0,0) and (0,0,1) of the first summand
        let orthant = Cone::from_rays(
            3,
            &[zvec(&[1, 0, 0]), zvec(&[0, 1, 0]), zvec(&[0, 0, 1])],
        );
        match compactification_strata(&model, &[orthant]) {
            Err(TropError::NotARefinement(0)) => {}
            other => panic!("expected refinement failure, got {other:?}"),
        }
    }

    #[test]
    fn recession_directions_match_nonempty_ray_strata() {
        // coherence between the unbounded cells and the boundary strata
        let model = dual_side_model();
        let h = HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap();
        let idx = crate::tropical::bbci::bbci_unbounded_cells(&examples::dual_pair(), &h).unwrap();
        for u in &idx {
            let ray = Cone::from_qvec_rays(3, &[u.recession.clone()]);
            let strata = compactification_strata(&model, &[ray]).unwrap();
            assert!(strata[0].nonempty, "direction of {} must hit the boundary", u.label);
        }
    }

    #[test]
    fn unimodular_sweep_accepts_the_octahedral_fan_rays() {
        let h = HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap();
        let sub = crate::subdiv::regular_subdivision(&h).unwrap();
        let maximal: Vec<Cone> = sub
            .cells
            .iter()
            .map(|c| {
                let rays: Vec<QVec> = c
                    .polytope
                    .vertices
                    .iter()
                    .filter(|v| v.iter().any(|x| !x.is_zero()))
                    .cloned()
                    .collect();
                Cone::from_qvec_rays(3, &rays)
            })
            .collect();
        let fan = Fan {
            rank: 3,
            maximal,
        };
        // complete intersection of two factors in rank three: only rays count
        let report = mpcs_check(&fan, 2).unwrap();
        assert!(report.ok);
        // as a hypersurface threshold the triangles must also be unimodular
        let report1 = mpcs_check(&fan, 1).unwrap();
        assert!(report1.ok);
    }

    #[test]
    fn non_unimodular_wall_is_reported() {
        let fan = Fan {
            rank: 2,
            maximal: vec![Cone::from_rays(2, &[zvec(&[1, 0]), zvec(&[1, 2])])],
        };
        let full = mpcs_check(&fan, 0).unwrap();
        assert!(!full.ok);
        assert_eq!(full.failing.len(), 1);
        assert_eq!(full.failing[0], vec![zvec(&[1, 0]), zvec(&[1, 2])]);
        // restricting the sweep to rays passes
        let rays_only = mpcs_check(&fan, 1).unwrap();
        assert!(rays_only.ok);
    }
}
