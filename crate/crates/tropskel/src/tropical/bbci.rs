//! The bounded and unbounded cells of the intersection complex attached to a
//! dual decomposition, read off from a centred refined triangulation.
//!
//! With heights `h` triangulating the hull of the summands around the
//! origin, the restriction of `h` to each summand defines one tropical
//! factor. Bounded cells of the intersection correspond to boundary
//! simplices meeting every summand; their geometric companions are the
//! Minkowski sums of the per-summand pieces, and the union of those sums is
//! verified against the boundary of the dilated hull intersected with the
//! summand sum.

use crate::feas::LinSystem;
use crate::geom::{
    convex_hull, minkowski_sum, strict_witness, vertices_from_hrep, volume_in_chart_of, Polytope,
};
use crate::nefpart::NefPartition;
use crate::rat::{dot, is_zero_vec, qvec_from_z, rat, QVec, Rat, ZVec};
use crate::subdiv::{classify_triangulation, regular_subdivision, HeightFunction};
use itertools::Itertools;

use super::{tci_complex, CellLabel, TropError, TropicalCellComplex, TropicalModel};

/// Boundary simplices meeting every summand, with their Minkowski-sum
/// companions.
#[derive(Clone, Debug)]
pub struct TransversalComplex {
    /// Domain points of the triangulating heights.
    pub points: Vec<ZVec>,
    /// Transversal boundary simplices as sorted index sets, sorted.
    pub simplices: Vec<Vec<usize>>,
    /// Whether the simplex is inclusion-maximal among the transversal ones.
    pub maximal: Vec<bool>,
    /// Per simplex, the Minkowski sum of the per-summand vertex hulls.
    pub pieces: Vec<Polytope>,
}

impl TransversalComplex {
    /// Strict-inclusion pairs of transversal simplices.
    pub fn inclusions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.simplices.iter().enumerate() {
            for (j, b) in self.simplices.iter().enumerate() {
                if i != j && a.iter().all(|x| b.contains(x)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Betti numbers of the geometric union of the pieces, through the
    /// inclusion poset.
    pub fn betti(&self) -> Vec<usize> {
        let rel = self.inclusions();
        super::homology::poset_betti(self.simplices.len(), &|i, j| rel.contains(&(i, j)))
    }
}

/// Output of the bounded-cell construction: the intersection complex of the
/// restricted heights together with the indexing data and the results of the
/// two structural cross-checks.
#[derive(Clone, Debug)]
pub struct BbciOutput {
    pub model: TropicalModel,
    pub complex: TropicalCellComplex,
    /// Indices of the bounded cells in `complex.cells`.
    pub bounded: Vec<usize>,
    pub transversal: TransversalComplex,
    /// Hull of the summands equals the hull of the height domain.
    pub hulls_agree: bool,
    /// Bounded cell labels coincide with starred transversal simplices.
    pub labels_match: bool,
    /// The pieces tile the boundary of the dilated hull inside the summand
    /// sum, checked by exact relative volumes facet by facet.
    pub realization_ok: bool,
}

/// Runs the triangulation-indexed construction of the bounded part.
///
/// `h` must be a centred refined triangulation of the hull of the summands
/// of `dual`; its restrictions to the summands become the tropical factors.
pub fn bbci_bounded_complex(
    dual: &NefPartition,
    h: &HeightFunction,
) -> Result<BbciOutput, TropError> {
    let sub = regular_subdivision(h)?;
    let flags = classify_triangulation(&sub, h);
    if !(flags.refined && flags.centred_star) {
        return Err(TropError::NotCentred);
    }
    let hull = h.conv()?;
    let summand_hull = {
        let pts: Vec<QVec> = dual
            .summands
            .iter()
            .flat_map(|s| s.vertices.iter().cloned())
            .collect();
        convex_hull(&pts)?
    };
    let hulls_agree = hull.vertices == summand_hull.vertices;

    let boundary = sub.restrict_to_boundary()?;
    let membership: Vec<Vec<usize>> = sub
        .points
        .iter()
        .map(|p| {
            let q = qvec_from_z(p);
            (0..dual.r())
                .filter(|&j| dual.summands[j].contains(&q))
                .collect()
        })
        .collect();

    let mut simplices: Vec<Vec<usize>> = Vec::new();
    let mut pieces: Vec<Polytope> = Vec::new();
    for (label, _) in boundary.all_faces() {
        let groups = split_by_summand(&label, &membership, dual.r());
        if groups.iter().any(|g| g.is_empty()) {
            continue;
        }
        let mut sum: Option<Polytope> = None;
        for g in &groups {
            let pts: Vec<QVec> = g.iter().map(|&i| qvec_from_z(&sub.points[i])).collect();
            let piece = convex_hull(&pts)?;
            sum = Some(match sum {
                None => piece,
                Some(acc) => minkowski_sum(&acc, &piece)?,
            });
        }
        simplices.push(label);
        pieces.push(sum.expect("at least one summand"));
    }
    let maximal: Vec<bool> = simplices
        .iter()
        .map(|a| {
            !simplices
                .iter()
                .any(|b| b.len() > a.len() && a.iter().all(|x| b.contains(x)))
        })
        .collect();
    let transversal = TransversalComplex {
        points: sub.points.clone(),
        simplices,
        maximal,
        pieces,
    };

    let heights: Vec<HeightFunction> = dual
        .summands
        .iter()
        .map(|s| h.restrict_to(s))
        .collect::<Result<_, _>>()?;
    let model = TropicalModel::new(heights)?;
    let complex = tci_complex(&model)?;
    let bounded = complex.bounded_cells();

    let mut expected_labels: Vec<CellLabel> = transversal
        .simplices
        .iter()
        .map(|t| starred_label(t, &sub.points, &membership, &model))
        .collect();
    expected_labels.sort();
    let mut bounded_labels: Vec<CellLabel> = bounded
        .iter()
        .map(|&i| complex.cells[i].label.clone())
        .collect();
    bounded_labels.sort();
    let labels_match = expected_labels == bounded_labels;

    let realization_ok = realization_holds(dual, &hull, &transversal);

    Ok(BbciOutput {
        model,
        complex,
        bounded,
        transversal,
        hulls_agree,
        labels_match,
        realization_ok,
    })
}

fn split_by_summand(label: &[usize], membership: &[Vec<usize>], r: usize) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); r];
    for &i in label {
        for &j in &membership[i] {
            groups[j].push(i);
        }
    }
    groups
}

/// The cell label of the starred simplex: each summand's piece plus the
/// origin, written in the index space of the restricted heights.
fn starred_label(
    simplex: &[usize],
    points: &[ZVec],
    membership: &[Vec<usize>],
    model: &TropicalModel,
) -> CellLabel {
    let r = model.r();
    let groups = split_by_summand(simplex, membership, r);
    let per_factor = groups
        .iter()
        .enumerate()
        .map(|(j, g)| {
            let h = &model.heights[j];
            let mut ids: Vec<usize> = g
                .iter()
                .map(|&i| {
                    h.points
                        .iter()
                        .position(|p| *p == points[i])
                        .expect("summand point in restricted domain")
                })
                .collect();
            let origin = h.origin_index().expect("summands contain the origin");
            ids.push(origin);
            ids
        })
        .collect();
    CellLabel::new(per_factor)
}

/// Whether the union of the maximal pieces equals the boundary of the
/// `r`-fold dilated hull intersected with the summand sum, facet by facet.
fn realization_holds(dual: &NefPartition, hull: &Polytope, tc: &TransversalComplex) -> bool {
    let r = dual.r();
    let dilated = hull.dilate(&rat(r as i64));
    // assign each maximal piece to the facet of the hull carrying its simplex
    let mut assigned: Vec<Option<usize>> = vec![None; tc.simplices.len()];
    for (i, t) in tc.simplices.iter().enumerate() {
        if !tc.maximal[i] {
            continue;
        }
        let fi = hull.facets.iter().position(|f| {
            t.iter().all(|&p| {
                dot(&qvec_from_z(&f.normal), &qvec_from_z(&tc.points[p])) == f.offset
            })
        });
        match fi {
            Some(k) => assigned[i] = Some(k),
            None => return false,
        }
    }
    for (fi, facet) in dilated.facets.iter().enumerate() {
        // the slice of the dilated boundary inside the summand sum
        let eqs = vec![(qvec_from_z(&facet.normal), facet.offset.clone())];
        let mut ineqs: Vec<(QVec, Rat)> = dilated
            .facets
            .iter()
            .map(|f| (qvec_from_z(&f.normal), f.offset.clone()))
            .collect();
        for f in &dual.parent.facets {
            ineqs.push((qvec_from_z(&f.normal), f.offset.clone()));
        }
        for (n, b) in &dual.parent.affine_hull {
            ineqs.push((qvec_from_z(n), b.clone()));
            ineqs.push((crate::rat::vneg(&qvec_from_z(n)), -b.clone()));
        }
        let verts = vertices_from_hrep(hull.rank, &eqs, &ineqs);
        let here: Vec<usize> = (0..tc.simplices.len())
            .filter(|&i| assigned[i] == Some(fi))
            .collect();
        if verts.is_empty() {
            if !here.is_empty() {
                return false;
            }
            continue;
        }
        let region = match convex_hull(&verts) {
            Ok(p) => p,
            Err(_) => return false,
        };
        // containment of every assigned piece
        for &i in &here {
            if !tc.pieces[i].vertices.iter().all(|v| region.contains(v)) {
                return false;
            }
        }
        if region.dim == 0 {
            if here.is_empty() || here.iter().any(|&i| tc.pieces[i].vertices != region.vertices) {
                return false;
            }
            continue;
        }
        let full: Vec<usize> = here
            .iter()
            .copied()
            .filter(|&i| tc.pieces[i].dim == region.dim)
            .collect();
        // distinct full-dimensional pieces may only share boundary
        for (a, b) in full.iter().tuple_combinations() {
            if relints_meet(&tc.pieces[*a], &tc.pieces[*b]) {
                return false;
            }
        }
        let total: Rat = full
            .iter()
            .map(|&i| volume_in_chart_of(&region, &tc.pieces[i]))
            .sum();
        if total != volume_in_chart_of(&region, &region) {
            return false;
        }
    }
    // every maximal piece found its facet
    (0..tc.simplices.len()).all(|i| !tc.maximal[i] || assigned[i].is_some())
}

fn relints_meet(a: &Polytope, b: &Polytope) -> bool {
    let mut sys = LinSystem::new(a.rank);
    for p in [a, b] {
        for (n, c) in &p.affine_hull {
            sys.eq(qvec_from_z(n), c.clone());
        }
        for f in &p.facets {
            sys.lt(qvec_from_z(&f.normal), f.offset.clone());
        }
    }
    sys.is_feasible()
}

/// One unbounded cell produced by the enlargement rule: per-summand pieces
/// of a starred simplex, at least one avoiding the origin, with an exact
/// recession direction strictly interior to the cell's recession cone.
#[derive(Clone, Debug)]
pub struct UnboundedCellIndex {
    pub label: CellLabel,
    /// The starred simplex in the triangulation's index space.
    pub star_simplex: Vec<usize>,
    pub recession: QVec,
}

/// Enumerates the unbounded cells of the intersection complex from the star
/// triangulation: tuples `(T̄_j)` of per-summand vertex sets whose union
/// spans a starred simplex, each of size at least two, some avoiding the
/// origin. Every returned tuple carries a certified recession vector.
pub fn bbci_unbounded_cells(
    dual: &NefPartition,
    h: &HeightFunction,
) -> Result<Vec<UnboundedCellIndex>, TropError> {
    let sub = regular_subdivision(h)?;
    let flags = classify_triangulation(&sub, h);
    if !(flags.refined && flags.centred_star) {
        return Err(TropError::NotCentred);
    }
    let origin = h.origin_index().ok_or(TropError::NotCentred)?;
    let membership: Vec<Vec<usize>> = sub
        .points
        .iter()
        .map(|p| {
            let q = qvec_from_z(p);
            (0..dual.r())
                .filter(|&j| dual.summands[j].contains(&q))
                .collect()
        })
        .collect();
    let heights: Vec<HeightFunction> = dual
        .summands
        .iter()
        .map(|s| h.restrict_to(s))
        .collect::<Result<_, _>>()?;
    let model = TropicalModel::new(heights)?;
    let r = model.r();

    let mut out: Vec<UnboundedCellIndex> = Vec::new();
    for (simplex, dim) in sub.all_faces() {
        if dim < 1 {
            continue;
        }
        let nonzero: Vec<usize> = simplex.iter().copied().filter(|&i| i != origin).collect();
        let has_origin = simplex.contains(&origin);
        // each nonzero point picks the summand containing it
        let choices: Vec<&Vec<usize>> = nonzero.iter().map(|&i| &membership[i]).collect();
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        for pick in choices
            .iter()
            .map(|c| c.iter().copied())
            .multi_cartesian_product()
        {
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); r];
            for (&i, &j) in nonzero.iter().zip(&pick) {
                groups[j].push(i);
            }
            let origin_subsets: Vec<Vec<bool>> = if has_origin {
                (1..(1u32 << r))
                    .map(|mask| (0..r).map(|j| mask >> j & 1 == 1).collect())
                    .collect()
            } else {
                vec![vec![false; r]]
            };
            for takes in origin_subsets {
                // at least one piece must avoid the origin
                if !takes.contains(&false) {
                    continue;
                }
                let sizes_ok = (0..r).all(|j| {
                    groups[j].len() + usize::from(takes[j]) >= 2
                });
                if !sizes_ok {
                    continue;
                }
                if let Some(idx) =
                    certify_tuple(&model, &sub.points, &groups, &takes, &simplex)
                {
                    out.push(idx);
                }
            }
        }
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    out.dedup_by(|a, b| a.label == b.label);
    Ok(out)
}

/// Decides whether the tuple indexes a nonempty unbounded cell: the strict
/// point system must be feasible and the homogenised weak system must admit
/// a nonzero direction. Ties stay ties along such a direction and dominated
/// points stay dominated, so the cell contains a full ray.
fn certify_tuple(
    model: &TropicalModel,
    points: &[ZVec],
    groups: &[Vec<usize>],
    takes: &[bool],
    simplex: &[usize],
) -> Option<UnboundedCellIndex> {
    let n = model.rank;
    let r = model.r();
    let mut per_factor: Vec<Vec<usize>> = Vec::with_capacity(r);
    for j in 0..r {
        let h = &model.heights[j];
        let mut ids: Vec<usize> = groups[j]
            .iter()
            .map(|&i| {
                h.points
                    .iter()
                    .position(|p| *p == points[i])
                    .expect("group point in restricted domain")
            })
            .collect();
        if takes[j] {
            ids.push(h.origin_index().expect("summand contains the origin"));
        }
        ids.sort_unstable();
        per_factor.push(ids);
    }
    let label = CellLabel::new(per_factor);
    let (eqs, ineqs) = super::tuple_system(model, &label);
    strict_witness(n, &eqs, &ineqs)?;
    let v = recession_direction(n, &eqs, &ineqs)?;
    Some(UnboundedCellIndex {
        label,
        star_simplex: simplex.to_vec(),
        recession: v,
    })
}

/// A nonzero vector of the recession cone `{v : eq rows v = 0, ineq rows
/// v <= 0}`, or `None` when the cone is the origin. Clipping with the unit
/// box keeps the search exact; any nonzero vertex of the clipped cone lies
/// on an extreme ray.
fn recession_direction(
    rank: usize,
    eqs: &[(QVec, Rat)],
    ineqs: &[(QVec, Rat)],
) -> Option<QVec> {
    let eqs0: Vec<(QVec, Rat)> = eqs.iter().map(|(a, _)| (a.clone(), rat(0))).collect();
    let mut ineqs0: Vec<(QVec, Rat)> = ineqs.iter().map(|(a, _)| (a.clone(), rat(0))).collect();
    for i in 0..rank {
        let mut row = vec![rat(0); rank];
        row[i] = rat(1);
        ineqs0.push((row.clone(), rat(1)));
        row[i] = rat(-1);
        ineqs0.push((row, rat(1)));
    }
    let mut verts: Vec<QVec> = vertices_from_hrep(rank, &eqs0, &ineqs0)
        .into_iter()
        .filter(|v| !is_zero_vec(v))
        .collect();
    verts.sort();
    let first = verts.first()?.clone();
    let mut sum = vec![rat(0); rank];
    for v in &verts {
        for (s, c) in sum.iter_mut().zip(v) {
            *s += c.clone();
        }
    }
    Some(if is_zero_vec(&sum) { first } else { sum })
}
