//! Fans over centred boundary triangulations and the combinatorial model of
//! the skeleton living over them: transversal cones, barycentric cubes,
//! quotient-fan charts anti-indexed by the transversal poset, scaling-orbit
//! representatives and a certificate-style numeric membership test.

use crate::geom::polytope::vertices_from_hrep;
use crate::geom::{convex_hull, Cone, Fan, Polytope};
use crate::nefpart::NefPartition;
use crate::par::{map_items, ExecMode};
use crate::rat::{
    cmp_zvec, integer_kernel, qvec_from_z, rat_to_f64, saturation_with_completion, QMat, QVec,
    Rat, ZVec,
};
use crate::subdiv::RegularSubdivision;
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SkelError {
    /// The subdivision is not a triangulation of a boundary complex: some
    /// cell is not a simplex, uses the origin, or cones to a non-simplicial
    /// cone.
    #[error("subdivision is not a usable boundary triangulation")]
    NotTriangulation,
    /// A point generating a ray carries no summand index.
    #[error("point {0} has no summand assignment")]
    SummandUnassigned(usize),
    #[error("cone is not a face of the fan")]
    ConeNotInFan,
    #[error("point is not in the relative interior of the cone")]
    NotInRelativeInterior,
    #[error("membership context is missing {0}")]
    ContextMissing(&'static str),
}

/// Default residual threshold for [`skeleton_membership`].
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

/// Borrowed numeric map from points to vectors, for membership contexts.
pub type VectorMap<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

type HalfSpaces = Vec<(QVec, Rat)>;

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    // both sorted ascending
    let mut it = b.iter();
    a.iter().all(|x| it.by_ref().any(|y| y == x))
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

fn zdot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn zvec_to_f64(v: &[BigInt]) -> Vec<f64> {
    v.iter()
        .map(|x| rat_to_f64(&Rat::from_integer(x.clone())))
        .collect()
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The fan whose cones are the nonnegative spans of the simplices of a
/// boundary triangulation, with the origin cone implicit. Rays remember the
/// generating point and the summand it belongs to.
#[derive(Clone, Debug)]
pub struct TriangulationFan {
    pub rank: usize,
    pub base: Fan,
    /// Primitive ray generators, lex sorted.
    pub rays: Vec<ZVec>,
    /// For each ray, the index of its generating point in the triangulation.
    pub generator_point: Vec<usize>,
    /// For each ray, the summand whose ray set it belongs to.
    pub summand_of_ray: Vec<usize>,
    /// Sorted ray ids of each maximal cone, aligned with `base.maximal`.
    pub max_cones: Vec<Vec<usize>>,
}

impl TriangulationFan {
    /// Number of summands.
    pub fn r(&self) -> usize {
        self.summand_of_ray.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn ray_index(&self, v: &ZVec) -> Option<usize> {
        self.rays.binary_search_by(|r| cmp_zvec(r, v)).ok()
    }

    /// Every face as a sorted ray-id set, the origin included, ordered by
    /// cardinality then ids.
    pub fn all_cones(&self) -> Vec<Vec<usize>> {
        let mut seen: std::collections::BTreeSet<Vec<usize>> = std::collections::BTreeSet::new();
        for m in &self.max_cones {
            for sub in m.iter().copied().powerset() {
                seen.insert(sub);
            }
        }
        let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    pub fn cone_from_ray_ids(&self, ids: &[usize]) -> Cone {
        let gens: Vec<ZVec> = ids.iter().map(|&i| self.rays[i].clone()).collect();
        Cone::from_rays(self.rank, &gens)
    }

    /// Whether the sorted id set spans a face of the fan.
    pub fn is_cone(&self, ids: &[usize]) -> bool {
        self.max_cones.iter().any(|m| is_subset(ids, m))
    }

    /// Indices of the maximal cones whose ray set contains `ids`.
    pub fn maximal_containing(&self, ids: &[usize]) -> Vec<usize> {
        (0..self.max_cones.len())
            .filter(|&k| is_subset(ids, &self.max_cones[k]))
            .collect()
    }
}

/// Builds the fan over a boundary triangulation. Cells must be simplices not
/// using the origin; each used point needs a summand index.
pub fn fan_from_triangulation(
    tri: &RegularSubdivision,
    summand_of_point: &[Option<usize>],
) -> Result<TriangulationFan, SkelError> {
    assert_eq!(summand_of_point.len(), tri.points.len());
    if !tri.is_triangulation {
        return Err(SkelError::NotTriangulation);
    }
    let mut used: Vec<usize> = tri.cells.iter().flat_map(|c| c.label.iter().copied()).collect();
    used.sort_unstable();
    used.dedup();

    let mut triples: Vec<(ZVec, usize, usize)> = Vec::with_capacity(used.len());
    for &p in &used {
        if tri.points[p].iter().all(|x| x.is_zero()) {
            return Err(SkelError::NotTriangulation);
        }
        let gen = crate::rat::primitivize(&qvec_from_z(&tri.points[p]));
        let j = summand_of_point[p].ok_or(SkelError::SummandUnassigned(p))?;
        triples.push((gen, p, j));
    }
    triples.sort_by(|a, b| cmp_zvec(&a.0, &b.0));
    if triples.windows(2).any(|w| w[0].0 == w[1].0) {
        // two domain points on the same ray: the cones would not be a fan
        return Err(SkelError::NotTriangulation);
    }
    let rays: Vec<ZVec> = triples.iter().map(|t| t.0.clone()).collect();
    let generator_point: Vec<usize> = triples.iter().map(|t| t.1).collect();
    let summand_of_ray: Vec<usize> = triples.iter().map(|t| t.2).collect();
    let ray_of_point: std::collections::BTreeMap<usize, usize> = triples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.1, i))
        .collect();

    let mut max_cones: Vec<Vec<usize>> = tri
        .cells
        .iter()
        .map(|c| {
            let mut ids: Vec<usize> = c.label.iter().map(|p| ray_of_point[p]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();
    max_cones.sort();
    let maximal: Vec<Cone> = max_cones
        .iter()
        .map(|ids| {
            let gens: Vec<ZVec> = ids.iter().map(|&i| rays[i].clone()).collect();
            Cone::from_rays(tri.rank, &gens)
        })
        .collect();
    for (ids, cone) in max_cones.iter().zip(&maximal) {
        if cone.rays.len() != ids.len() || !cone.is_simplicial() {
            return Err(SkelError::NotTriangulation);
        }
    }
    Ok(TriangulationFan {
        rank: tri.rank,
        base: Fan {
            rank: tri.rank,
            maximal,
        },
        rays,
        generator_point,
        summand_of_ray,
        max_cones,
    })
}

/// Summand index of each point: the unique summand polytope containing it.
/// The origin and ambiguous or unassigned points get `None`.
pub fn summand_assignment(points: &[ZVec], nef: &NefPartition) -> Vec<Option<usize>> {
    points
        .iter()
        .map(|p| {
            if p.iter().all(|x| x.is_zero()) {
                return None;
            }
            let q = qvec_from_z(p);
            let js: Vec<usize> = (0..nef.summands.len())
                .filter(|&j| nef.summands[j].contains(&q))
                .collect();
            if js.len() == 1 {
                Some(js[0])
            } else {
                None
            }
        })
        .collect()
}

/// A cone meeting every summand's ray set, with its summand decomposition:
/// the cone is the Minkowski sum of the `part_cones`.
#[derive(Clone, Debug)]
pub struct TransversalCone {
    /// Sorted ray ids, aligned positionally with `cone.rays`.
    pub ray_ids: Vec<usize>,
    pub cone: Cone,
    /// Ray ids per summand, each part nonempty.
    pub parts: Vec<Vec<usize>>,
    pub part_cones: Vec<Cone>,
}

/// The transversal cones ordered by the face relation, sorted by dimension.
/// Transversality passes to every coface, so the set is an upper ideal in
/// the face poset of the fan.
#[derive(Clone, Debug)]
pub struct TransversalPoset {
    pub r: usize,
    pub cones: Vec<TransversalCone>,
}

impl TransversalPoset {
    pub fn find(&self, ray_ids: &[usize]) -> Option<usize> {
        self.cones.iter().position(|c| c.ray_ids == ray_ids)
    }

    /// Whether cone `i` is a face of cone `k`.
    pub fn leq(&self, i: usize, k: usize) -> bool {
        is_subset(&self.cones[i].ray_ids, &self.cones[k].ray_ids)
    }

    /// Cones with no transversal proper face.
    pub fn minimal(&self) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&i| (0..self.cones.len()).all(|j| j == i || !self.leq(j, i)))
            .collect()
    }

    /// Cones that are not a proper face of another transversal cone.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&i| (0..self.cones.len()).all(|j| j == i || !self.leq(i, j)))
            .collect()
    }
}

/// Collects the cones whose ray set meets every summand.
pub fn transversal_cones(fan: &TriangulationFan) -> TransversalPoset {
    let r = fan.r();
    let cones: Vec<TransversalCone> = fan
        .all_cones()
        .into_iter()
        .filter(|ids| !ids.is_empty())
        .filter_map(|ids| {
            let mut parts: Vec<Vec<usize>> = vec![Vec::new(); r];
            for &i in &ids {
                parts[fan.summand_of_ray[i]].push(i);
            }
            if parts.iter().any(|p| p.is_empty()) {
                return None;
            }
            let part_cones: Vec<Cone> = parts.iter().map(|p| fan.cone_from_ray_ids(p)).collect();
            Some(TransversalCone {
                cone: fan.cone_from_ray_ids(&ids),
                ray_ids: ids,
                parts,
                part_cones,
            })
        })
        .collect();
    TransversalPoset { r, cones }
}

/// The parallelepiped spanned by the segments from the origin to the ray
/// generators, with its vertices labelled by ray subsets.
#[derive(Clone, Debug)]
pub struct BaryCube {
    pub ray_ids: Vec<usize>,
    pub cube: Polytope,
    /// Subset of `ray_ids` summed, with the resulting lattice point. The
    /// labelling is the combinatorial isomorphism with the standard cube.
    pub vertex_subsets: Vec<(Vec<usize>, ZVec)>,
}

/// A maximal closed piece of the transversal part: inside the cube of
/// `ambient`, the coefficients of the rays in `pinned` are held at one.
#[derive(Clone, Debug)]
pub struct TransversalFace {
    pub pinned: Vec<usize>,
    pub ambient: Vec<usize>,
    pub face: Polytope,
}

/// One cube per cone of the fan plus the faces covering the transversal
/// part: the points whose top coefficient in every summand equals one.
#[derive(Clone, Debug)]
pub struct BarycentricComplex {
    pub rank: usize,
    /// Ordered as [`TriangulationFan::all_cones`].
    pub cubes: Vec<BaryCube>,
    pub transversal_faces: Vec<TransversalFace>,
}

fn subset_sum(rank: usize, rays: &[ZVec], ids: &[usize]) -> ZVec {
    let mut s = vec![BigInt::zero(); rank];
    for &i in ids {
        for (a, b) in s.iter_mut().zip(&rays[i]) {
            *a += b;
        }
    }
    s
}

pub fn barycentric_complex(fan: &TriangulationFan) -> BarycentricComplex {
    let trans = transversal_cones(fan);
    let cubes: Vec<BaryCube> = fan
        .all_cones()
        .into_iter()
        .map(|ids| {
            let vertex_subsets: Vec<(Vec<usize>, ZVec)> = ids
                .iter()
                .copied()
                .powerset()
                .map(|sub| {
                    let pt = subset_sum(fan.rank, &fan.rays, &sub);
                    (sub, pt)
                })
                .collect();
            let pts: Vec<QVec> = vertex_subsets.iter().map(|(_, p)| qvec_from_z(p)).collect();
            let cube = convex_hull(&pts).expect("cube has vertices");
            BaryCube {
                ray_ids: ids,
                cube,
                vertex_subsets,
            }
        })
        .collect();

    let mut transversal_faces = Vec::new();
    for &ti in &trans.minimal() {
        let tau = &trans.cones[ti].ray_ids;
        for mi in fan.maximal_containing(tau) {
            let ambient = &fan.max_cones[mi];
            let free: Vec<usize> = ambient.iter().copied().filter(|i| !tau.contains(i)).collect();
            let base = subset_sum(fan.rank, &fan.rays, tau);
            let pts: Vec<QVec> = free
                .iter()
                .copied()
                .powerset()
                .map(|sub| {
                    let mut p = subset_sum(fan.rank, &fan.rays, &sub);
                    for (a, b) in p.iter_mut().zip(&base) {
                        *a += b;
                    }
                    qvec_from_z(&p)
                })
                .collect();
            let face = convex_hull(&pts).expect("face has vertices");
            transversal_faces.push(TransversalFace {
                pinned: tau.clone(),
                ambient: ambient.clone(),
                face,
            });
        }
    }
    BarycentricComplex {
        rank: fan.rank,
        cubes,
        transversal_faces,
    }
}

fn polytope_hrep(p: &Polytope) -> (HalfSpaces, HalfSpaces) {
    let eqs: HalfSpaces = p
        .affine_hull
        .iter()
        .map(|(n, b)| (qvec_from_z(n), b.clone()))
        .collect();
    let ineqs: HalfSpaces = p
        .facets
        .iter()
        .map(|f| (qvec_from_z(&f.normal), f.offset.clone()))
        .collect();
    (eqs, ineqs)
}

impl BarycentricComplex {
    pub fn cube_of(&self, ray_ids: &[usize]) -> Option<&BaryCube> {
        self.cubes.iter().find(|c| c.ray_ids == ray_ids)
    }

    /// Exact check that any two cubes intersect in the cube of the common
    /// face, by comparing vertex sets of the intersection polytope.
    pub fn cube_intersections_match(&self) -> bool {
        for i in 0..self.cubes.len() {
            for k in (i + 1)..self.cubes.len() {
                let (a, b) = (&self.cubes[i], &self.cubes[k]);
                let common = intersect_sorted(&a.ray_ids, &b.ray_ids);
                let expected = &self
                    .cube_of(&common)
                    .expect("faces are closed under intersection")
                    .cube;
                let (mut eqs, mut ineqs) = polytope_hrep(&a.cube);
                let (eb, ib) = polytope_hrep(&b.cube);
                eqs.extend(eb);
                ineqs.extend(ib);
                let inter = vertices_from_hrep(self.rank, &eqs, &ineqs);
                if !inter.iter().all(|v| expected.contains(v)) {
                    return false;
                }
                if !expected
                    .vertices
                    .iter()
                    .all(|v| a.cube.contains(v) && b.cube.contains(v))
                {
                    return false;
                }
            }
        }
        true
    }

    /// Exact membership of `u` in the transversal part: in some transversal
    /// maximal cone the coefficients stay in [0,1] and each summand's top
    /// coefficient is one.
    pub fn transversal_part_contains(
        &self,
        trans: &TransversalPoset,
        u: &[Rat],
    ) -> bool {
        for &mi in &trans.maximal() {
            let tc = &trans.cones[mi];
            let Some(coords) = tc.cone.simplicial_coords(u) else {
                continue;
            };
            if coords.iter().any(|c| c.is_negative() || *c > Rat::one()) {
                continue;
            }
            let level_one = tc.parts.iter().all(|part| {
                part.iter()
                    .map(|id| {
                        let pos = tc.ray_ids.iter().position(|r| r == id).expect("part ray");
                        &coords[pos]
                    })
                    .max()
                    .expect("parts are nonempty")
                    .is_one()
            });
            if level_one {
                return true;
            }
        }
        false
    }
}

/// Coefficients of `u` on the rays of a maximal cone containing it, as
/// (ray id, level) pairs with zeros kept. `None` off the fan's support. On
/// overlaps the levels agree, so the choice of cone does not matter.
pub fn dual_coordinates(fan: &TriangulationFan, u: &[Rat]) -> Option<Vec<(usize, Rat)>> {
    for (mi, ids) in fan.max_cones.iter().enumerate() {
        let Some(coords) = fan.base.maximal[mi].simplicial_coords(u) else {
            continue;
        };
        if coords.iter().any(|c| c.is_negative()) {
            continue;
        }
        return Some(ids.iter().copied().zip(coords).collect());
    }
    None
}

/// Top coefficient of `u` over the fan: one exactly on the boundary of the
/// union of the barycentric cubes, below one inside, above one outside.
pub fn bary_boundary_level(fan: &TriangulationFan, u: &[Rat]) -> Option<Rat> {
    dual_coordinates(fan, u).map(|levels| {
        levels
            .into_iter()
            .map(|(_, l)| l)
            .max()
            .unwrap_or_else(Rat::zero)
    })
}

/// An integral coordinate system for the quotient of the ambient lattice by
/// a cone's span, with the images of the cones containing it.
#[derive(Clone, Debug)]
pub struct QuotientFan {
    /// Rows of the projection onto the quotient lattice.
    pub projection: Vec<ZVec>,
    /// Integral sections: `projection * lift[j] = e_j`.
    pub lift: Vec<ZVec>,
    pub fan: Fan,
}

/// Quotient of the fan by a face `sigma`: the images of the maximal cones
/// containing it under a Hermite-normal-form quotient basis, so the output
/// is deterministic for a given fan.
pub fn quotient_fan(fan: &TriangulationFan, sigma: &Cone) -> Result<QuotientFan, SkelError> {
    let n = fan.rank;
    let ids: Vec<usize> = sigma
        .rays
        .iter()
        .map(|r| fan.ray_index(r).ok_or(SkelError::ConeNotInFan))
        .collect::<Result<_, _>>()?;
    if !fan.is_cone(&ids) {
        return Err(SkelError::ConeNotInFan);
    }
    if ids.is_empty() {
        let id_rows: Vec<ZVec> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        return Ok(QuotientFan {
            projection: id_rows.clone(),
            lift: id_rows,
            fan: fan.base.clone(),
        });
    }

    let (basis, completion) = saturation_with_completion(&sigma.rays);
    let d = basis.len();
    let mut rows: Vec<QVec> = basis.iter().map(|r| qvec_from_z(r)).collect();
    rows.extend(completion.iter().map(|r| qvec_from_z(r)));
    let m = QMat::from_rows(rows).transpose();
    let minv = m.inverse().expect("lattice basis is invertible");
    let projection: Vec<ZVec> = (d..n)
        .map(|i| {
            minv.rows[i]
                .iter()
                .map(|x| {
                    debug_assert!(x.denom().is_one());
                    x.numer().clone()
                })
                .collect()
        })
        .collect();
    for (j, w) in completion.iter().enumerate() {
        debug_assert!(projection
            .iter()
            .enumerate()
            .all(|(a, row)| zdot(row, w) == if a == j { BigInt::one() } else { BigInt::zero() }));
    }

    let mut maximal: Vec<Cone> = Vec::new();
    for mi in fan.maximal_containing(&ids) {
        let img = fan.base.maximal[mi].project(&projection);
        debug_assert!(img.is_simplicial());
        if !maximal.contains(&img) {
            maximal.push(img);
        }
    }
    if maximal.is_empty() {
        maximal.push(Cone::origin(n - d));
    }
    Ok(QuotientFan {
        projection,
        lift: completion,
        fan: Fan {
            rank: n - d,
            maximal,
        },
    })
}

/// Chart data attached to one transversal cone: the annihilator of its span,
/// the quotient fan seen transversally to it, one simplex of directions per
/// summand, and the closed pieces of the transversal part inside its cube.
#[derive(Clone, Debug)]
pub struct SkeletonChart {
    /// Index into the transversal poset.
    pub cone_index: usize,
    /// Integer basis of the annihilator of the cone's span.
    pub perp_basis: Vec<ZVec>,
    pub quotient: QuotientFan,
    /// Ray ids per summand.
    pub factor_rays: Vec<Vec<usize>>,
    /// Unit simplex on each factor's rays, in barycentric coordinates.
    pub factor_simplices: Vec<Polytope>,
    /// Pieces of the cube where every summand's top coefficient is one.
    pub transversal_cell: Vec<Polytope>,
}

/// The chart of the bigger cone includes into the chart of its face; the
/// `map` rows project the face's quotient lattice onto the bigger cone's:
/// `map * projection(coarser) = projection(finer)`.
#[derive(Clone, Debug)]
pub struct ChartInclusion {
    pub finer: usize,
    pub coarser: usize,
    pub map: Vec<ZVec>,
    /// Position of each coarser factor ray inside the finer factor.
    pub factor_maps: Vec<Vec<usize>>,
}

/// Charts anti-indexed by the transversal poset together with all their
/// pairwise inclusions.
#[derive(Clone, Debug)]
pub struct SkeletonModel {
    pub rank: usize,
    /// Aligned with the poset's cones.
    pub charts: Vec<SkeletonChart>,
    /// One entry per strict face pair of transversal cones.
    pub inclusions: Vec<ChartInclusion>,
}

impl SkeletonModel {
    pub fn inclusion_between(&self, finer: usize, coarser: usize) -> Option<&ChartInclusion> {
        self.inclusions
            .iter()
            .find(|inc| inc.finer == finer && inc.coarser == coarser)
    }
}

fn unit_simplex(k: usize) -> Polytope {
    let rows: Vec<Vec<i64>> = (0..k)
        .map(|i| (0..k).map(|j| i64::from(j == i)).collect())
        .collect();
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    Polytope::from_lattice_vertices(&refs)
}

pub fn skeleton_model(
    fan: &TriangulationFan,
    trans: &TransversalPoset,
    bary: &BarycentricComplex,
    mode: ExecMode,
) -> SkeletonModel {
    let n = fan.rank;
    let minimal = trans.minimal();
    let charts = map_items(mode, (0..trans.cones.len()).collect(), |i| {
        let tc = &trans.cones[i];
        let gens: Vec<ZVec> = tc.ray_ids.iter().map(|&r| fan.rays[r].clone()).collect();
        let perp_basis = integer_kernel(&gens);
        debug_assert_eq!(perp_basis.len() + tc.cone.dim(), n);
        debug_assert!(perp_basis
            .iter()
            .all(|b| gens.iter().all(|g| zdot(g, b).is_zero())));
        let quotient = quotient_fan(fan, &tc.cone).expect("transversal cones are in the fan");
        let factor_simplices: Vec<Polytope> =
            tc.parts.iter().map(|p| unit_simplex(p.len())).collect();
        let cube = bary
            .cube_of(&tc.ray_ids)
            .expect("every cone has a cube")
            .clone();
        let transversal_cell: Vec<Polytope> = minimal
            .iter()
            .filter(|&&ti| trans.leq(ti, i))
            .map(|&ti| {
                let tau = &trans.cones[ti].ray_ids;
                let pts: Vec<QVec> = cube
                    .vertex_subsets
                    .iter()
                    .filter(|(sub, _)| is_subset(tau, sub))
                    .map(|(_, p)| qvec_from_z(p))
                    .collect();
                convex_hull(&pts).expect("pinned face has vertices")
            })
            .collect();
        SkeletonChart {
            cone_index: i,
            perp_basis,
            quotient,
            factor_rays: tc.parts.clone(),
            factor_simplices,
            transversal_cell,
        }
    });

    let mut inclusions = Vec::new();
    for fi in 0..trans.cones.len() {
        for ci in 0..trans.cones.len() {
            if fi == ci || !trans.leq(ci, fi) {
                continue;
            }
            let qf = &charts[fi].quotient;
            let qc = &charts[ci].quotient;
            let map: Vec<ZVec> = qf
                .projection
                .iter()
                .map(|row| qc.lift.iter().map(|w| zdot(row, w)).collect())
                .collect();
            // the defining relation pins the map uniquely
            debug_assert!(qf.projection.iter().enumerate().all(|(a, row)| {
                (0..n).all(|i| {
                    let composed: BigInt =
                        map[a].iter().zip(&qc.projection).map(|(m, p)| m * &p[i]).sum();
                    composed == row[i]
                })
            }));
            let factor_maps: Vec<Vec<usize>> = trans.cones[ci]
                .parts
                .iter()
                .zip(&trans.cones[fi].parts)
                .map(|(cpart, fpart)| {
                    cpart
                        .iter()
                        .map(|id| fpart.iter().position(|x| x == id).expect("nested parts"))
                        .collect()
                })
                .collect();
            inclusions.push(ChartInclusion {
                finer: fi,
                coarser: ci,
                map,
                factor_maps,
            });
        }
    }
    SkeletonModel {
        rank: n,
        charts,
        inclusions,
    }
}

/// Image of a relative-interior point under the scaling action that
/// stretches each summand component independently.
#[derive(Clone, Debug)]
pub struct OrbitRepresentative {
    /// The unique orbit point with every summand level equal to one.
    pub rep: QVec,
    /// Exact summand levels of the input.
    pub eta: Vec<Rat>,
    /// Logarithms of the levels: applying the action at `t` to `rep`
    /// recovers the input.
    pub t: Vec<f64>,
}

/// Splits `v` into summand components and scales each to level one. The
/// level of a summand is the top coefficient over its rays.
pub fn nef_orbit_representative(
    sigma: &TransversalCone,
    v: &[Rat],
) -> Result<OrbitRepresentative, SkelError> {
    if !sigma.cone.contains_in_relint(v) {
        return Err(SkelError::NotInRelativeInterior);
    }
    let coords = sigma
        .cone
        .simplicial_coords(v)
        .expect("relative interior point is in the span");
    let mut rep = vec![Rat::zero(); v.len()];
    let mut eta = Vec::with_capacity(sigma.parts.len());
    for part in &sigma.parts {
        let level = part
            .iter()
            .map(|id| {
                let pos = sigma.ray_ids.iter().position(|r| r == id).expect("part ray");
                coords[pos].clone()
            })
            .max()
            .expect("parts are nonempty");
        debug_assert!(level.is_positive());
        for id in part {
            let pos = sigma.ray_ids.iter().position(|r| r == id).expect("part ray");
            let c = &coords[pos] / &level;
            for (x, g) in rep.iter_mut().zip(qvec_from_z(&sigma.cone.rays[pos])) {
                *x += &c * g;
            }
        }
        eta.push(level);
    }
    let t: Vec<f64> = eta.iter().map(|l| rat_to_f64(l).ln()).collect();
    Ok(OrbitRepresentative { rep, eta, t })
}

/// Applies the scaling action at `t` to a point of the cone, in floats.
/// `None` when `v` is not in the cone.
pub fn nef_scaling_action(sigma: &TransversalCone, t: &[f64], v: &[Rat]) -> Option<Vec<f64>> {
    let coords = sigma.cone.simplicial_coords(v)?;
    if coords.iter().any(|c| c.is_negative()) {
        return None;
    }
    let mut out = vec![0.0; v.len()];
    for (j, part) in sigma.parts.iter().enumerate() {
        let scale = t[j].exp();
        for id in part {
            let pos = sigma.ray_ids.iter().position(|r| r == id).expect("part ray");
            let c = rat_to_f64(&coords[pos]) * scale;
            for (x, g) in out.iter_mut().zip(zvec_to_f64(&sigma.cone.rays[pos])) {
                *x += c * g;
            }
        }
    }
    Some(out)
}

/// Numeric inputs for the membership certificate. The gradient map and the
/// boundary residuals come from the potential and tailoring data; charts and
/// cones come from the fan.
pub struct MembershipContext<'a> {
    pub fan: &'a TriangulationFan,
    pub trans: &'a TransversalPoset,
    /// Gradient map of the potential.
    pub phi: Option<VectorMap<'a>>,
    /// Per-summand boundary residuals; all must vanish on the fibre.
    pub residuals: Option<VectorMap<'a>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Membership {
    pub in_skeleton: bool,
    /// Transversal cone witnessing the conic and angular conditions.
    pub witness: Option<usize>,
    pub residual_ok: bool,
    pub cone_ok: bool,
    pub angle_ok: bool,
}

fn cone_contains_float(cone: &Cone, x: &[f64], tol: f64) -> bool {
    let h = cone.hrep();
    let scaled = |row: &ZVec| -> f64 {
        let r = zvec_to_f64(row);
        let norm = dot_f64(&r, &r).sqrt();
        dot_f64(&r, x) / norm
    };
    h.span_eqs.iter().all(|e| scaled(e).abs() <= tol)
        && h.ineqs.iter().all(|a| scaled(a) <= tol)
}

fn angle_defect(x: f64) -> f64 {
    let turns = x / std::f64::consts::TAU;
    (turns - turns.round()).abs() * std::f64::consts::TAU
}

/// Certificate-style membership test: all boundary residuals within `tol`,
/// the gradient image inside some transversal cone (each normalised defining
/// condition violated by at most `tol`), and the angles of that cone's rays
/// vanishing modulo a full turn. Returns the first witness in dimension
/// order. This is a numeric certificate, not a proof.
pub fn skeleton_membership(
    u: &[f64],
    theta: &[f64],
    ctx: &MembershipContext,
    tol: f64,
) -> Result<Membership, SkelError> {
    let phi = ctx.phi.ok_or(SkelError::ContextMissing("potential gradient"))?;
    let residuals = ctx
        .residuals
        .ok_or(SkelError::ContextMissing("boundary residuals"))?;
    let res = residuals(u);
    let residual_ok = res.iter().all(|r| r.abs() <= tol);
    let x = phi(u);
    let mut cone_ok = false;
    let mut witness = None;
    for (i, tc) in ctx.trans.cones.iter().enumerate() {
        if !cone_contains_float(&tc.cone, &x, tol) {
            continue;
        }
        cone_ok = true;
        let angles_ok = tc.ray_ids.iter().all(|&r| {
            let a = zvec_to_f64(&ctx.fan.rays[r]);
            angle_defect(dot_f64(&a, theta)) <= tol
        });
        if angles_ok {
            witness = Some(i);
            break;
        }
    }
    let angle_ok = witness.is_some();
    Ok(Membership {
        in_skeleton: residual_ok && cone_ok && angle_ok,
        witness,
        residual_ok,
        cone_ok,
        angle_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::rat::{qvec, rat, zvec};
    use crate::subdiv::{regular_subdivision, HeightFunction};

    fn running_fan() -> TriangulationFan {
        examples::octant_fan()
    }

    fn hirzebruch_fan() -> TriangulationFan {
        examples::hirzebruch_fan()
    }

    fn cross_fan(rank: usize) -> TriangulationFan {
        examples::cross_fan(rank)
    }

    #[test]
    fn running_fan_is_the_octant_fan_with_summand_labels() {
        let fan = running_fan();
        assert_eq!(fan.rays.len(), 6);
        let counts: Vec<usize> = (0..=3)
            .map(|d| fan.all_cones().iter().filter(|c| c.len() == d).count())
            .collect();
        assert_eq!(counts, vec![1, 6, 12, 8]);
        assert!(fan.base.covers_samples(11, 200));
        assert!(fan.base.interiors_disjoint());
        assert!(fan.base.maximal.iter().all(|c| c.is_unimodular()));
        // first summand holds ±η1 and η3, second holds ±η2 and -η3
        let expected: Vec<(ZVec, usize)> = vec![
            (zvec(&[-1, 0, 0]), 0),
            (zvec(&[0, -1, 0]), 1),
            (zvec(&[0, 0, -1]), 1),
            (zvec(&[0, 0, 1]), 0),
            (zvec(&[0, 1, 0]), 1),
            (zvec(&[1, 0, 0]), 0),
        ];
        for (i, (ray, j)) in expected.iter().enumerate() {
            assert_eq!(&fan.rays[i], ray);
            assert_eq!(fan.summand_of_ray[i], *j);
        }
    }

    #[test]
    fn line_boundary_gives_the_complete_rank_one_fan() {
        let h = HeightFunction::new(
            vec![zvec(&[0]), zvec(&[1]), zvec(&[-1])],
            vec![rat(0), rat(1), rat(1)],
        )
        .unwrap();
        let sub = regular_subdivision(&h).unwrap();
        let boundary = sub.restrict_to_boundary().unwrap();
        let assign = vec![None, Some(0), Some(0)];
        let fan = fan_from_triangulation(&boundary, &assign).unwrap();
        assert_eq!(fan.rays, vec![zvec(&[-1]), zvec(&[1])]);
        assert_eq!(fan.max_cones.len(), 2);
        assert!(fan.base.covers_samples(5, 50));
        // with one summand every nonzero cone is transversal
        let trans = transversal_cones(&fan);
        assert_eq!(trans.cones.len(), 2);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        // a single square cell is not a triangulation
        let h = HeightFunction::new(
            vec![zvec(&[0, 0]), zvec(&[1, 0]), zvec(&[0, 1]), zvec(&[1, 1])],
            vec![rat(0), rat(0), rat(0), rat(0)],
        )
        .unwrap();
        let sub = regular_subdivision(&h).unwrap();
        assert!(!sub.is_triangulation);
        let assign = vec![None, Some(0), Some(0), Some(0)];
        assert_eq!(
            fan_from_triangulation(&sub, &assign).unwrap_err(),
            SkelError::NotTriangulation
        );

        // cells through the origin are not a boundary complex
        let oct = HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap();
        let star = regular_subdivision(&oct).unwrap();
        let assign: Vec<Option<usize>> = star.points.iter().map(|_| Some(0)).collect();
        assert_eq!(
            fan_from_triangulation(&star, &assign).unwrap_err(),
            SkelError::NotTriangulation
        );

        // a used point without a summand index is reported
        let boundary = star.restrict_to_boundary().unwrap();
        let mut assign = summand_assignment(&boundary.points, &examples::dual_pair());
        let used = boundary.cells[0].label[0];
        assign[used] = None;
        assert_eq!(
            fan_from_triangulation(&boundary, &assign).unwrap_err(),
            SkelError::SummandUnassigned(used)
        );
    }

    #[test]
    fn summand_assignment_matches_the_dual_pair() {
        let h = HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap();
        let nef = examples::dual_pair();
        let assign = summand_assignment(&h.points, &nef);
        for (p, a) in h.points.iter().zip(&assign) {
            let expected = if p.iter().all(num_traits::Zero::is_zero) {
                None
            } else if p[1] == num_bigint::BigInt::from(0) && p[2] >= num_bigint::BigInt::from(0) {
                Some(0)
            } else {
                Some(1)
            };
            assert_eq!(*a, expected, "point {:?}", p);
        }
    }

    #[test]
    fn transversal_cones_count_eight_and_eight_and_form_an_upper_ideal() {
        let fan = running_fan();
        let trans = transversal_cones(&fan);
        assert_eq!(trans.r, 2);
        assert_eq!(trans.cones.len(), 16);
        let two: Vec<&TransversalCone> =
            trans.cones.iter().filter(|c| c.ray_ids.len() == 2).collect();
        let three: Vec<&TransversalCone> =
            trans.cones.iter().filter(|c| c.ray_ids.len() == 3).collect();
        assert_eq!(two.len(), 8);
        assert_eq!(three.len(), 8);
        assert_eq!(trans.minimal().len(), 8);
        assert_eq!(trans.maximal().len(), 8);
        assert!(trans.minimal().iter().all(|&i| trans.cones[i].ray_ids.len() == 2));

        // both rays of cone(η1, η3) sit in the first summand
        let i1 = fan.ray_index(&zvec(&[1, 0, 0])).unwrap();
        let i3 = fan.ray_index(&zvec(&[0, 0, 1])).unwrap();
        let mut ids = vec![i1, i3];
        ids.sort_unstable();
        assert!(fan.is_cone(&ids));
        assert!(trans.find(&ids).is_none());

        // upper ideal: every face of the fan containing a transversal cone
        // is transversal
        for ids in fan.all_cones() {
            if trans
                .cones
                .iter()
                .any(|c| is_subset(&c.ray_ids, &ids) && c.ray_ids != ids)
            {
                assert!(trans.find(&ids).is_some(), "coface {:?} not transversal", ids);
            }
        }
        for tc in &trans.cones {
            assert!(tc.parts.iter().all(|p| !p.is_empty()));
            let total: usize = tc.parts.iter().map(|p| p.len()).sum();
            assert_eq!(total, tc.ray_ids.len());
            for (part, pc) in tc.parts.iter().zip(&tc.part_cones) {
                assert_eq!(pc.rays.len(), part.len());
            }
        }
    }

    #[test]
    fn transversal_counts_match_the_bounded_tropical_cells() {
        use crate::tropical::{tci_complex, TropicalModel};
        let fan = running_fan();
        let trans = transversal_cones(&fan);

        let a1 = vec![zvec(&[0, 0, 0]), zvec(&[1, 0, 0]), zvec(&[-1, 0, 0]), zvec(&[0, 0, 1])];
        let a2 = vec![zvec(&[0, 0, 0]), zvec(&[0, 1, 0]), zvec(&[0, -1, 0]), zvec(&[0, 0, -1])];
        let mk = |pts: Vec<ZVec>| {
            HeightFunction::new(pts, vec![rat(0), rat(1), rat(1), rat(1)]).unwrap()
        };
        let model = TropicalModel::new(vec![mk(a1), mk(a2)]).unwrap();
        let complex = tci_complex(&model).unwrap();
        let bounded_edges = complex
            .cells_of_dim(1)
            .into_iter()
            .filter(|&i| complex.cells[i].bounded)
            .count();
        assert_eq!(trans.maximal().len(), complex.cells_of_dim(0).len());
        assert_eq!(trans.minimal().len(), bounded_edges);
    }

    #[test]
    fn quotient_by_a_transversal_two_cone_is_the_projective_line_fan() {
        let fan = running_fan();
        let sigma = Cone::from_rays(3, &[zvec(&[1, 0, 0]), zvec(&[0, 1, 0])]);
        let q = quotient_fan(&fan, &sigma).unwrap();
        assert_eq!(q.fan.rank, 1);
        assert_eq!(q.fan.maximal.len(), 2);
        let mut rays = q.fan.rays();
        rays.sort_by(|a, b| cmp_zvec(a, b));
        assert_eq!(rays, vec![zvec(&[-1]), zvec(&[1])]);
        // the projection kills σ and is unital on its section
        for g in &sigma.rays {
            assert!(q.projection.iter().all(|row| zdot(row, g).is_zero()));
        }
        assert_eq!(q.projection.len(), 1);
        assert_eq!(q.lift.len(), 1);
        assert!(zdot(&q.projection[0], &q.lift[0]).is_one());
    }

    #[test]
    fn quotient_edge_cases_and_determinism() {
        let fan = running_fan();
        // by the origin: the fan itself
        let q0 = quotient_fan(&fan, &Cone::origin(3)).unwrap();
        assert_eq!(q0.fan.rank, 3);
        assert_eq!(q0.fan.maximal, fan.base.maximal);
        // by a maximal cone: the trivial fan in rank zero
        let top = fan.base.maximal[0].clone();
        let qt = quotient_fan(&fan, &top).unwrap();
        assert_eq!(qt.fan.rank, 0);
        assert_eq!(qt.fan.maximal, vec![Cone::origin(0)]);
        // a ray outside the fan is rejected
        let bogus = Cone::from_rays(3, &[zvec(&[1, 1, 0])]);
        assert_eq!(quotient_fan(&fan, &bogus).unwrap_err(), SkelError::ConeNotInFan);
        // byte determinism of the quotient basis
        let sigma = Cone::from_rays(3, &[zvec(&[0, 1, 0]), zvec(&[0, 0, -1])]);
        let a = quotient_fan(&fan, &sigma).unwrap();
        let b = quotient_fan(&fan, &sigma).unwrap();
        assert_eq!(a.projection, b.projection);
        assert_eq!(a.lift, b.lift);
    }

    #[test]
    fn barycentric_cubes_intersect_along_common_faces() {
        let fan = running_fan();
        let bary = barycentric_complex(&fan);
        assert_eq!(bary.cubes.len(), 27);
        // the cube over a maximal cone is a unit cube with the full sum as
        // its top vertex
        let i1 = fan.ray_index(&zvec(&[1, 0, 0])).unwrap();
        let i2 = fan.ray_index(&zvec(&[0, 1, 0])).unwrap();
        let i3 = fan.ray_index(&zvec(&[0, 0, 1])).unwrap();
        let mut ids = vec![i1, i2, i3];
        ids.sort_unstable();
        let cube = bary.cube_of(&ids).unwrap();
        assert_eq!(cube.cube.vertices.len(), 8);
        assert!(cube.cube.vertices.contains(&qvec(&[0, 0, 0])));
        assert!(cube.cube.vertices.contains(&qvec(&[1, 1, 1])));
        // a one dimensional cone gives the segment to its generator
        let seg = bary.cube_of(&[i1]).unwrap();
        assert_eq!(seg.cube.vertices.len(), 2);
        assert!(bary.cube_intersections_match());
    }

    #[test]
    fn hirzebruch_cubes_are_four_unit_squares_glued_along_edges() {
        let fan = hirzebruch_fan();
        assert_eq!(fan.max_cones.len(), 4);
        let bary = barycentric_complex(&fan);
        for ids in &fan.max_cones {
            let c = bary.cube_of(ids).unwrap();
            assert_eq!(c.cube.vertices.len(), 4);
            assert_eq!(crate::geom::volume(&c.cube), rat(1));
        }
        assert!(bary.cube_intersections_match());
        // boundary levels: mid points of cubes are inside, generators on the
        // boundary, scaled generators outside
        assert_eq!(
            bary_boundary_level(&fan, &[rat(1) / rat(2), rat(1)]),
            Some(rat(1) / rat(2))
        );
        assert_eq!(bary_boundary_level(&fan, &qvec(&[0, 1])), Some(rat(1)));
        assert_eq!(bary_boundary_level(&fan, &qvec(&[-1, 0])), Some(rat(1)));
        assert_eq!(bary_boundary_level(&fan, &qvec(&[0, 2])), Some(rat(2)));
    }

    #[test]
    fn transversal_part_of_the_running_fan_is_a_sixteen_segment_circle() {
        let fan = running_fan();
        let trans = transversal_cones(&fan);
        let bary = barycentric_complex(&fan);
        assert_eq!(bary.transversal_faces.len(), 16);
        let mut endpoints: Vec<QVec> = Vec::new();
        for f in &bary.transversal_faces {
            assert_eq!(f.face.vertices.len(), 2);
            for v in &f.face.vertices {
                if !endpoints.contains(v) {
                    endpoints.push(v.clone());
                }
            }
        }
        assert_eq!(endpoints.len(), 16);
        // each endpoint lies on exactly two segments: a closed curve
        for p in &endpoints {
            let deg = bary
                .transversal_faces
                .iter()
                .filter(|f| f.face.vertices.contains(p))
                .count();
            assert_eq!(deg, 2);
        }

        assert!(bary.transversal_part_contains(&trans, &qvec(&[1, 1, 0])));
        assert!(bary.transversal_part_contains(&trans, &qvec(&[1, 1, 1])));
        let half_up = vec![rat(1), rat(1), rat(1) / rat(2)];
        assert!(bary.transversal_part_contains(&trans, &half_up));
        let low = vec![rat(1), rat(1) / rat(2), rat(0)];
        assert!(!bary.transversal_part_contains(&trans, &low));
        assert!(!bary.transversal_part_contains(&trans, &qvec(&[0, 0, 0])));
        assert!(!bary.transversal_part_contains(&trans, &qvec(&[2, 2, 0])));
    }

    #[test]
    fn boundary_level_on_the_octant_fan_is_the_sup_norm() {
        let fan = running_fan();
        assert_eq!(bary_boundary_level(&fan, &qvec(&[1, 1, 1])), Some(rat(1)));
        assert_eq!(bary_boundary_level(&fan, &qvec(&[1, 1, 0])), Some(rat(1)));
        assert_eq!(
            bary_boundary_level(&fan, &[rat(1) / rat(2), rat(0), rat(0)]),
            Some(rat(1) / rat(2))
        );
        assert_eq!(bary_boundary_level(&fan, &qvec(&[0, 0, 0])), Some(rat(0)));
        assert_eq!(bary_boundary_level(&fan, &qvec(&[-3, 2, 0])), Some(rat(3)));
    }

    #[test]
    fn skeleton_model_charts_follow_the_transversal_poset() {
        let fan = running_fan();
        let trans = transversal_cones(&fan);
        let bary = barycentric_complex(&fan);
        let model = skeleton_model(&fan, &trans, &bary, ExecMode::Sequential);
        assert_eq!(model.charts.len(), 16);

        // chart of cone(η1, η2): annihilator is the η3 axis, quotient is the
        // projective line fan, both factors are points
        let i1 = fan.ray_index(&zvec(&[1, 0, 0])).unwrap();
        let i2 = fan.ray_index(&zvec(&[0, 1, 0])).unwrap();
        let mut ids = vec![i1, i2];
        ids.sort_unstable();
        let ci = trans.find(&ids).unwrap();
        let chart = &model.charts[ci];
        assert_eq!(chart.perp_basis, vec![zvec(&[0, 0, 1])]);
        assert_eq!(chart.quotient.fan.rank, 1);
        assert_eq!(chart.quotient.fan.maximal.len(), 2);
        assert!(chart.factor_simplices.iter().all(|s| s.vertices.len() == 1));
        assert_eq!(chart.transversal_cell.len(), 1);
        assert_eq!(chart.transversal_cell[0].vertices, vec![qvec(&[1, 1, 0])]);

        // a maximal chart: trivial quotient, zero annihilator, a segment and
        // a point of directions, and two transversal edges in its cube
        let mi = trans.maximal()[0];
        let top = &model.charts[mi];
        assert!(top.perp_basis.is_empty());
        assert_eq!(top.quotient.fan.rank, 0);
        let dims: Vec<usize> = top.factor_simplices.iter().map(|s| s.vertices.len()).collect();
        assert_eq!(dims.iter().sum::<usize>(), 3);
        assert_eq!(top.transversal_cell.len(), 2);

        // anti-isomorphism: inclusions match strict face pairs one to one
        let mut strict = 0;
        for i in 0..trans.cones.len() {
            for k in 0..trans.cones.len() {
                if i != k && trans.leq(i, k) {
                    strict += 1;
                    assert!(model.inclusion_between(k, i).is_some());
                }
            }
        }
        assert_eq!(model.inclusions.len(), strict);
        assert_eq!(strict, 16);

        // annihilator bases pair to zero with their cone generators
        for (chart, tc) in model.charts.iter().zip(&trans.cones) {
            assert_eq!(chart.perp_basis.len() + tc.ray_ids.len(), 3);
            for b in &chart.perp_basis {
                for &rid in &tc.ray_ids {
                    assert!(zdot(&fan.rays[rid], b).is_zero());
                }
            }
        }
    }

    #[test]
    fn chart_inclusions_compose_along_chains() {
        let fan = cross_fan(4);
        let trans = transversal_cones(&fan);
        assert_eq!(trans.cones.len(), 80);
        let bary = barycentric_complex(&fan);
        let model = skeleton_model(&fan, &trans, &bary, ExecMode::Parallel);

        let key: std::collections::BTreeMap<(usize, usize), &ChartInclusion> = model
            .inclusions
            .iter()
            .map(|inc| ((inc.finer, inc.coarser), inc))
            .collect();
        let mut chains = 0;
        for ab in &model.inclusions {
            for bc in &model.inclusions {
                if ab.coarser != bc.finer {
                    continue;
                }
                chains += 1;
                let ac = key[&(ab.finer, bc.coarser)];
                // matrix composition
                let composed: Vec<ZVec> = ab
                    .map
                    .iter()
                    .map(|row| {
                        (0..bc.map.first().map_or(0, |r| r.len()))
                            .map(|j| row.iter().zip(&bc.map).map(|(x, b)| x * &b[j]).sum())
                            .collect()
                    })
                    .collect();
                assert_eq!(composed, ac.map);
                // factor index maps compose as functions
                for (j, cm) in ac.factor_maps.iter().enumerate() {
                    let via: Vec<usize> =
                        bc.factor_maps[j].iter().map(|&p| ab.factor_maps[j][p]).collect();
                    assert_eq!(&via, cm);
                }
            }
        }
        assert!(chains > 0);
    }

    #[test]
    fn orbit_representative_scales_each_summand_to_level_one() {
        let fan = running_fan();
        let trans = transversal_cones(&fan);
        let i1 = fan.ray_index(&zvec(&[1, 0, 0])).unwrap();
        let i2 = fan.ray_index(&zvec(&[0, 1, 0])).unwrap();
        let mut ids = vec![i1, i2];
        ids.sort_unstable();
        let sigma = &trans.cones[trans.find(&ids).unwrap()];

        let v = qvec(&[2, 3, 0]);
        let orb = nef_orbit_representative(sigma, &v).unwrap();
        assert_eq!(orb.rep, qvec(&[1, 1, 0]));
        assert_eq!(orb.eta, vec![rat(2), rat(3)]);
        assert!((orb.t[0] - 2.0f64.ln()).abs() < 1e-15);
        assert!((orb.t[1] - 3.0f64.ln()).abs() < 1e-15);
        let back = nef_scaling_action(sigma, &orb.t, &orb.rep).unwrap();
        for (b, x) in back.iter().zip(&v) {
            assert!((b - rat_to_f64(x)).abs() < 1e-12);
        }

        // a point already at level one is its own representative
        let fixed = nef_orbit_representative(sigma, &qvec(&[1, 1, 0])).unwrap();
        assert_eq!(fixed.rep, qvec(&[1, 1, 0]));
        assert_eq!(fixed.t, vec![0.0, 0.0]);

        assert_eq!(
            nef_orbit_representative(sigma, &qvec(&[1, 0, 0])).unwrap_err(),
            SkelError::NotInRelativeInterior
        );
        assert_eq!(
            nef_orbit_representative(sigma, &qvec(&[1, 1, 1])).unwrap_err(),
            SkelError::NotInRelativeInterior
        );
    }

    #[test]
    fn one_summand_representative_is_the_radial_projection() {
        let fan = hirzebruch_fan();
        let trans = transversal_cones(&fan);
        let i0 = fan.ray_index(&zvec(&[0, 1])).unwrap();
        let i1 = fan.ray_index(&zvec(&[1, 1])).unwrap();
        let mut ids = vec![i0, i1];
        ids.sort_unstable();
        let sigma = &trans.cones[trans.find(&ids).unwrap()];
        let orb = nef_orbit_representative(sigma, &qvec(&[2, 4])).unwrap();
        assert_eq!(orb.rep, qvec(&[1, 2]));
        assert_eq!(orb.eta, vec![rat(2)]);
        assert_eq!(bary_boundary_level(&fan, &orb.rep), Some(rat(1)));
    }

    #[test]
    fn membership_certifies_the_expected_chart() {
        let fan = running_fan();
        let trans = transversal_cones(&fan);
        let beta = 40.0;
        // supports of the running pair, heights one away from the origin
        let supports: [Vec<[f64; 3]>; 2] = [
            vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            vec![[0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]],
        ];
        let residuals = move |u: &[f64]| -> Vec<f64> {
            supports
                .iter()
                .map(|sup| {
                    let g: f64 = sup
                        .iter()
                        .map(|a| (beta * (dot_f64(a, u) - 1.0)).exp())
                        .sum();
                    g - 1.0
                })
                .collect()
        };
        let phi = |u: &[f64]| -> Vec<f64> { u.iter().map(|x| 2.0 * x).collect() };
        let ctx = MembershipContext {
            fan: &fan,
            trans: &trans,
            phi: Some(&phi),
            residuals: Some(&residuals),
        };
        let tol = DEFAULT_MEMBERSHIP_TOL;

        let m = skeleton_membership(&[1.0, 1.0, 0.0], &[0.0, 0.0, 0.7], &ctx, tol).unwrap();
        assert!(m.in_skeleton);
        let i1 = fan.ray_index(&zvec(&[1, 0, 0])).unwrap();
        let i2 = fan.ray_index(&zvec(&[0, 1, 0])).unwrap();
        let mut ids = vec![i1, i2];
        ids.sort_unstable();
        assert_eq!(m.witness, trans.find(&ids));

        // angles are read modulo full turns
        let turn = std::f64::consts::TAU;
        let m2 = skeleton_membership(&[1.0, 1.0, 0.0], &[turn, 0.0, 0.3], &ctx, tol).unwrap();
        assert!(m2.in_skeleton);

        let bad_angle = skeleton_membership(&[1.0, 1.0, 0.0], &[0.5, 0.0, 0.0], &ctx, tol).unwrap();
        assert!(!bad_angle.in_skeleton);
        assert!(bad_angle.residual_ok && bad_angle.cone_ok && !bad_angle.angle_ok);

        let off = skeleton_membership(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &ctx, tol).unwrap();
        assert!(!off.in_skeleton);
        assert!(!off.residual_ok);

        let no_phi = MembershipContext {
            fan: &fan,
            trans: &trans,
            phi: None,
            residuals: Some(&residuals),
        };
        assert_eq!(
            skeleton_membership(&[1.0, 1.0, 0.0], &[0.0; 3], &no_phi, tol).unwrap_err(),
            SkelError::ContextMissing("potential gradient")
        );
    }

    #[test]
    fn sequential_and_parallel_models_agree() {
        let fan = running_fan();
        let trans = transversal_cones(&fan);
        let bary = barycentric_complex(&fan);
        let seq = skeleton_model(&fan, &trans, &bary, ExecMode::Sequential);
        let par = skeleton_model(&fan, &trans, &bary, ExecMode::Parallel);
        assert_eq!(seq.charts.len(), par.charts.len());
        for (a, b) in seq.charts.iter().zip(&par.charts) {
            assert_eq!(a.perp_basis, b.perp_basis);
            assert_eq!(a.quotient.projection, b.quotient.projection);
            assert_eq!(a.factor_rays, b.factor_rays);
        }
        assert_eq!(seq.inclusions.len(), par.inclusions.len());
    }
}
