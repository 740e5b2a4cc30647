//! Tropical hypersurfaces and complete intersections as exact cell
//! complexes.
//!
//! Each height function `h_j` on a support set `A_j` defines the piecewise
//! linear function `L_j(u) = max_α (⟨α,u⟩ - h_j(α))` and its corner locus.
//! The intersection of the corner loci is stratified by tuples of tie sets,
//! one per factor; a tuple is a cell of the intersection when every tie set
//! has positive dimension, and a complementary region otherwise. Cells carry
//! closed H-representations, exact dimensions, boundedness flags and a
//! rational relative-interior witness.
//!
//! Cell labels are per-factor sorted index sets into the corresponding
//! support; label containment (factorwise) is closure reversal.

pub mod bbci;
pub mod cayley;
pub mod homology;
pub mod strata;

use crate::feas::LinSystem;
use crate::geom::{hrep_is_bounded, strict_witness, GeomError};
use crate::rat::{dot, qvec_from_z, vsub, QMat, QVec, Rat};
use crate::subdiv::{regular_subdivision, HeightFunction, RegularSubdivision, SubdivError};
use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TropError {
    #[error("height functions must share one ambient rank")]
    MixedRank,
    #[error("at least one height function is required")]
    NoFactors,
    #[error("intersection is not transverse at tuple {0}")]
    NotTransverse(String),
    #[error("heights are not a centred refined triangulation")]
    NotCentred,
    #[error("fan does not refine the total normal fan (cone {0})")]
    NotARefinement(usize),
    #[error("fan has a non-simplicial cone")]
    NotSimplicial,
    #[error("coefficient modulus must be positive on every support point")]
    ZeroCoefficient,
    #[error(transparent)]
    Subdiv(#[from] SubdivError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Per-factor tie sets, each a sorted list of indices into the factor's
/// support points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellLabel {
    pub per_factor: Vec<Vec<usize>>,
}

impl CellLabel {
    pub fn new(mut per_factor: Vec<Vec<usize>>) -> CellLabel {
        for s in &mut per_factor {
            s.sort_unstable();
            s.dedup();
        }
        CellLabel { per_factor }
    }

    /// Factorwise containment of `other`'s tie sets in this label's; labels
    /// that contain more ties index smaller cells.
    pub fn refines(&self, other: &CellLabel) -> bool {
        self.per_factor.len() == other.per_factor.len()
            && self
                .per_factor
                .iter()
                .zip(&other.per_factor)
                .all(|(s, o)| o.iter().all(|i| s.contains(i)))
    }
}

impl std::fmt::Display for CellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .per_factor
            .iter()
            .map(|s| format!("{{{}}}", s.iter().map(|i| i.to_string()).join(",")))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// One stratum of the arrangement: tie sets `S_j` hold with equality, all
/// other support points are dominated. The H-representation is closed; the
/// witness lies in the relative interior.
#[derive(Clone, Debug)]
pub struct TropicalCell {
    pub label: CellLabel,
    pub dim: usize,
    pub bounded: bool,
    pub eqs: Vec<(QVec, Rat)>,
    pub ineqs: Vec<(QVec, Rat)>,
    pub witness: QVec,
}

impl TropicalCell {
    /// Membership in the closed cell, or in the relative interior when
    /// `closed` is false.
    pub fn contains(&self, u: &[Rat], closed: bool) -> bool {
        self.eqs.iter().all(|(a, b)| dot(a, u) == *b)
            && self.ineqs.iter().all(|(a, b)| {
                let v = dot(a, u);
                if closed {
                    v <= *b
                } else {
                    v < *b
                }
            })
    }
}

/// The corner-locus intersection complex of `r` height functions, plus the
/// complementary strata of the ambient space.
#[derive(Clone, Debug)]
pub struct TropicalCellComplex {
    pub rank: usize,
    /// Cells of the intersection: every factor's tie set has positive
    /// dimension. Sorted by label.
    pub cells: Vec<TropicalCell>,
    /// Strata where some factor attains its maximum at a single vertex.
    pub regions: Vec<TropicalCell>,
    /// Pairs `(i, j)` with `cells[i]` contained in the closure of `cells[j]`.
    pub poset: Vec<(usize, usize)>,
}

impl TropicalCellComplex {
    pub fn bounded_cells(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].bounded)
            .collect()
    }

    pub fn unbounded_cells(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| !self.cells[i].bounded)
            .collect()
    }

    pub fn cells_of_dim(&self, d: usize) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&i| self.cells[i].dim == d)
            .collect()
    }
}

/// Height functions for the factors of a complete intersection, sharing one
/// ambient rank.
#[derive(Clone, Debug)]
pub struct TropicalModel {
    pub rank: usize,
    pub heights: Vec<HeightFunction>,
}

impl TropicalModel {
    pub fn new(heights: Vec<HeightFunction>) -> Result<TropicalModel, TropError> {
        let Some(first) = heights.first() else {
            return Err(TropError::NoFactors);
        };
        let rank = first.rank;
        if heights.iter().any(|h| h.rank != rank) {
            return Err(TropError::MixedRank);
        }
        Ok(TropicalModel { rank, heights })
    }

    pub fn r(&self) -> usize {
        self.heights.len()
    }

    pub fn subdivisions(&self) -> Result<Vec<RegularSubdivision>, TropError> {
        self.heights
            .iter()
            .map(|h| regular_subdivision(h).map_err(TropError::from))
            .collect()
    }
}

/// H-representation of the tuple stratum: ties within each `S_j` become
/// equations against the first tied point, all off-tie points give weak
/// domination inequalities.
fn tuple_system(
    model: &TropicalModel,
    label: &CellLabel,
) -> (Vec<(QVec, Rat)>, Vec<(QVec, Rat)>) {
    let mut eqs: Vec<(QVec, Rat)> = Vec::new();
    let mut ineqs: Vec<(QVec, Rat)> = Vec::new();
    for (j, s) in label.per_factor.iter().enumerate() {
        let h = &model.heights[j];
        let a0 = qvec_from_z(&h.points[s[0]]);
        let h0 = h.values[s[0]].clone();
        for &i in &s[1..] {
            let ai = qvec_from_z(&h.points[i]);
            eqs.push((vsub(&ai, &a0), h.values[i].clone() - h0.clone()));
        }
        for i in 0..h.points.len() {
            if s.contains(&i) {
                continue;
            }
            let ai = qvec_from_z(&h.points[i]);
            ineqs.push((vsub(&ai, &a0), h.values[i].clone() - h0.clone()));
        }
    }
    (eqs, ineqs)
}

/// Rank of the stacked tie-difference vectors of a label.
fn tie_rank(model: &TropicalModel, label: &CellLabel) -> usize {
    let mut rows: Vec<QVec> = Vec::new();
    for (j, s) in label.per_factor.iter().enumerate() {
        let h = &model.heights[j];
        let a0 = qvec_from_z(&h.points[s[0]]);
        for &i in &s[1..] {
            rows.push(vsub(&qvec_from_z(&h.points[i]), &a0));
        }
    }
    if rows.is_empty() {
        return 0;
    }
    QMat {
        nrows: rows.len(),
        ncols: model.rank,
        rows,
    }
    .rank()
}

fn build_cell(model: &TropicalModel, label: CellLabel) -> Result<Option<TropicalCell>, TropError> {
    let (eqs, ineqs) = tuple_system(model, &label);
    let Some(witness) = strict_witness(model.rank, &eqs, &ineqs) else {
        return Ok(None);
    };
    let eq_rank = QMat {
        nrows: eqs.len(),
        ncols: model.rank,
        rows: eqs.iter().map(|(a, _)| a.clone()).collect(),
    }
    .rank();
    let expected: usize = label
        .per_factor
        .iter()
        .enumerate()
        .map(|(j, s)| {
            face_dim(&model.heights[j], s)
        })
        .sum();
    if tie_rank(model, &label) != expected {
        return Err(TropError::NotTransverse(label.to_string()));
    }
    let dim = model.rank - eq_rank;
    let bounded = hrep_is_bounded(model.rank, &eqs, &ineqs);
    Ok(Some(TropicalCell {
        label,
        dim,
        bounded,
        eqs,
        ineqs,
        witness,
    }))
}

/// Dimension of the subdivision face spanned by the index set.
fn face_dim(h: &HeightFunction, s: &[usize]) -> usize {
    let mut rows: Vec<QVec> = Vec::new();
    let a0 = qvec_from_z(&h.points[s[0]]);
    for &i in &s[1..] {
        rows.push(vsub(&qvec_from_z(&h.points[i]), &a0));
    }
    if rows.is_empty() {
        return 0;
    }
    QMat {
        nrows: rows.len(),
        ncols: h.rank,
        rows,
    }
    .rank()
}

/// The stratification of the ambient space by joint tie-set tuples.
///
/// Enumerates one tuple per choice of subdivision face in each factor,
/// keeps the strictly realisable ones, and splits them into intersection
/// cells (all factors positive-dimensional) and complementary regions.
/// Errors with [`TropError::NotTransverse`] when some realised tuple's tie
/// rank differs from the sum of its face dimensions.
pub fn tci_complex(model: &TropicalModel) -> Result<TropicalCellComplex, TropError> {
    let subs = model.subdivisions()?;
    let factor_faces: Vec<Vec<Vec<usize>>> = subs
        .iter()
        .map(|s| s.all_faces().into_iter().map(|(l, _)| l).collect())
        .collect();
    let mut cells: Vec<TropicalCell> = Vec::new();
    let mut regions: Vec<TropicalCell> = Vec::new();
    for combo in factor_faces
        .iter()
        .map(|fs| fs.iter())
        .multi_cartesian_product()
    {
        let label = CellLabel::new(combo.into_iter().cloned().collect());
        let Some(cell) = build_cell(model, label)? else {
            continue;
        };
        let all_positive = cell
            .label
            .per_factor
            .iter()
            .enumerate()
            .all(|(j, s)| face_dim(&model.heights[j], s) >= 1);
        if all_positive {
            cells.push(cell);
        } else {
            regions.push(cell);
        }
    }
    cells.sort_by(|a, b| a.label.cmp(&b.label));
    regions.sort_by(|a, b| a.label.cmp(&b.label));
    let mut poset: Vec<(usize, usize)> = Vec::new();
    for i in 0..cells.len() {
        for j in 0..cells.len() {
            if i != j && cells[i].label.refines(&cells[j].label) {
                poset.push((i, j));
            }
        }
    }
    Ok(TropicalCellComplex {
        rank: model.rank,
        cells,
        regions,
        poset,
    })
}

/// The corner locus of a single height function, with the complementary
/// linearity regions attached as `regions`.
pub fn tropical_hypersurface(h: &HeightFunction) -> Result<TropicalCellComplex, TropError> {
    tci_complex(&TropicalModel::new(vec![h.clone()])?)
}

/// The values `L_j(u)` of the factor envelopes at a point.
pub fn factor_values(model: &TropicalModel, u: &[Rat]) -> Vec<Rat> {
    model.heights.iter().map(|h| h.legendre_eval(u).0).collect()
}

/// The argmax tuple at a point: for each factor, the sorted set of indices
/// attaining `L_j(u)`.
pub fn argmax_label(model: &TropicalModel, u: &[Rat]) -> CellLabel {
    CellLabel::new(
        model
            .heights
            .iter()
            .map(|h| h.legendre_eval(u).1)
            .collect(),
    )
}

/// Verifies that a point of the ambient space lies in exactly one stratum of
/// the complex (cells and regions together) by argmax labels.
pub fn stratum_of(complex: &TropicalCellComplex, model: &TropicalModel, u: &[Rat]) -> Option<CellLabel> {
    let label = argmax_label(model, u);
    let found = complex
        .cells
        .iter()
        .chain(complex.regions.iter())
        .find(|c| c.label == label)?;
    debug_assert!(found.contains(u, true));
    Some(found.label.clone())
}

/// Scaled smoothness threshold for the family cut out by the heights with
/// given coefficient moduli.
#[derive(Clone, Debug)]
pub struct BetaThreshold {
    pub beta0: f64,
    /// Per intersection cell, the worst-case perturbation row sum `K`.
    pub per_cell: Vec<(CellLabel, f64)>,
}

/// Worst-case row-sum constant and threshold `β₀ = max (log max(K,1))²`.
///
/// For each intersection cell with tuple `(S_j)` the near-argmax terms are
/// recentred at a tuple vertex; the remaining support points perturb the
/// Jacobian of the tie system with rows controlled by `Σ |c_β|/|c_{α_j}| ·
/// |⟨β - α'_j, v_k⟩|` where `v_k` is the minimum-norm dual basis of the
/// recentred tie differences. The constant takes the worst argmax choice and
/// the best recentring.
pub fn smoothness_beta_threshold(
    model: &TropicalModel,
    complex: &TropicalCellComplex,
    moduli: &[Vec<f64>],
) -> Result<BetaThreshold, TropError> {
    assert_eq!(moduli.len(), model.r(), "one modulus list per factor");
    for (j, h) in model.heights.iter().enumerate() {
        assert_eq!(moduli[j].len(), h.points.len(), "modulus per support point");
        if moduli[j].iter().any(|&c| c <= 0.0) {
            return Err(TropError::ZeroCoefficient);
        }
    }
    let mut per_cell: Vec<(CellLabel, f64)> = Vec::new();
    let mut beta0: f64 = 0.0;
    for cell in &complex.cells {
        let k_cell = cell_row_sum_constant(model, &cell.label, moduli)
            .ok_or_else(|| TropError::NotTransverse(cell.label.to_string()))?;
        let b = k_cell.max(1.0).ln().powi(2);
        beta0 = beta0.max(b);
        per_cell.push((cell.label.clone(), k_cell));
    }
    Ok(BetaThreshold { beta0, per_cell })
}

/// `max` over argmax assignments of `min` over recentrings of the row-sum
/// bound; `None` when some recentred tie system is rank-deficient.
fn cell_row_sum_constant(
    model: &TropicalModel,
    label: &CellLabel,
    moduli: &[Vec<f64>],
) -> Option<f64> {
    let argmax_choices: Vec<Vec<usize>> = label.per_factor.clone();
    let mut k_cell: f64 = 0.0;
    for argmax in argmax_choices
        .iter()
        .map(|s| s.iter().copied())
        .multi_cartesian_product()
    {
        let mut best: Option<f64> = None;
        let recentre_choices: Vec<Vec<usize>> = label
            .per_factor
            .iter()
            .zip(&argmax)
            .map(|(s, &a)| s.iter().copied().filter(|&i| i != a).collect())
            .collect();
        for recentre in recentre_choices
            .iter()
            .map(|s| s.iter().copied())
            .multi_cartesian_product()
        {
            let Some(k) = assignment_row_sum(model, label, moduli, &argmax, &recentre) else {
                return None;
            };
            best = Some(match best {
                None => k,
                Some(b) => b.min(k),
            });
        }
        // a tie set of size one admits no recentring; such labels are not
        // intersection cells, so every factor offers at least one choice
        let best = best?;
        k_cell = k_cell.max(best);
    }
    Some(k_cell)
}

fn assignment_row_sum(
    model: &TropicalModel,
    label: &CellLabel,
    moduli: &[Vec<f64>],
    argmax: &[usize],
    recentre: &[usize],
) -> Option<f64> {
    let r = model.r();
    // constraint rows: for factor m, each tied point except the recentring
    // vertex contributes the recentred difference vector
    let mut rows: Vec<QVec> = Vec::new();
    let mut row_of_argmax: Vec<usize> = vec![0; r];
    for (m, s) in label.per_factor.iter().enumerate() {
        let h = &model.heights[m];
        let base = qvec_from_z(&h.points[recentre[m]]);
        for &i in s {
            if i == recentre[m] {
                continue;
            }
            if i == argmax[m] {
                row_of_argmax[m] = rows.len();
            }
            rows.push(vsub(&qvec_from_z(&h.points[i]), &base));
        }
    }
    let mat = QMat {
        nrows: rows.len(),
        ncols: model.rank,
        rows,
    };
    let mut duals: Vec<QVec> = Vec::with_capacity(r);
    for k in 0..r {
        let mut rhs = vec![Rat::zero(); mat.nrows];
        rhs[row_of_argmax[k]] = crate::rat::rat(1);
        duals.push(mat.least_norm_solve(&rhs)?);
    }
    let mut worst: f64 = 0.0;
    for (j, s) in label.per_factor.iter().enumerate() {
        let h = &model.heights[j];
        let base = qvec_from_z(&h.points[recentre[j]]);
        let c_arg = moduli[j][argmax[j]];
        let mut sum = 0.0;
        for beta in 0..h.points.len() {
            if s.contains(&beta) {
                continue;
            }
            let diff = vsub(&qvec_from_z(&h.points[beta]), &base);
            for v in &duals {
                let pairing = crate::rat::rat_to_f64(&dot(&diff, v)).abs();
                sum += moduli[j][beta] / c_arg * pairing;
            }
        }
        worst = worst.max(sum);
    }
    Some(worst)
}

/// Checks that the feasibility route (elimination) and the witness route
/// agree on strict realisability of a label.
pub fn cross_check_label(model: &TropicalModel, label: &CellLabel) -> bool {
    let (eqs, ineqs) = tuple_system(model, label);
    let mut sys = LinSystem::new(model.rank);
    for (a, b) in &eqs {
        sys.eq(a.clone(), b.clone());
    }
    for (a, b) in &ineqs {
        sys.lt(a.clone(), b.clone());
    }
    let fm = sys.is_feasible();
    let wit = strict_witness(model.rank, &eqs, &ineqs).is_some();
    fm == wit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{qvec, rat, zvec};
    use crate::subdiv::HeightFunction;

    /// Supports and heights of the running pair of tropical polynomials in
    /// three variables.
    pub(crate) fn running_model() -> TropicalModel {
        crate::examples::running_model()
    }

    #[test]
    fn running_intersection_has_eight_vertices_and_sixteen_edges() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        let verts = complex.cells_of_dim(0);
        let edges = complex.cells_of_dim(1);
        assert_eq!(verts.len(), 8);
        assert_eq!(edges.len(), 16);
        assert_eq!(complex.cells.len(), 24);
        let bounded_edges: Vec<usize> = edges
            .iter()
            .copied()
            .filter(|&i| complex.cells[i].bounded)
            .collect();
        assert_eq!(bounded_edges.len(), 8);
        // vertices sit at the eight sign patterns
        let mut pts: Vec<Vec<i64>> = Vec::new();
        for &i in &verts {
            let c = &complex.cells[i];
            assert!(c.bounded);
            let p: Vec<i64> = c
                .witness
                .iter()
                .map(|x| {
                    assert!(x.is_integer());
                    x.to_integer().try_into().unwrap()
                })
                .collect();
            pts.push(p);
        }
        pts.sort();
        let mut expect: Vec<Vec<i64>> = (0..8u32)
            .map(|k| (0..3).map(|j| if (k >> j) & 1 == 1 { 1 } else { -1 }).collect())
            .collect();
        expect.sort();
        assert_eq!(pts, expect);
    }

    #[test]
    fn running_bounded_edges_form_one_cycle() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        // each vertex lies in the closure of exactly two bounded edges
        let verts = complex.cells_of_dim(0);
        for &v in &verts {
            let incident: Vec<usize> = complex
                .poset
                .iter()
                .filter(|&&(a, b)| a == v && complex.cells[b].dim == 1 && complex.cells[b].bounded)
                .map(|&(_, b)| b)
                .collect();
            assert_eq!(incident.len(), 2, "vertex {v} incident edges");
        }
    }

    #[test]
    fn running_unbounded_rays_and_directions() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        let rays = complex.unbounded_cells();
        assert_eq!(rays.len(), 8);
        for &i in &rays {
            assert_eq!(complex.cells[i].dim, 1);
        }
    }

    #[test]
    fn region_of_the_origin_is_the_bounded_cube() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        let origin_label = CellLabel::new(vec![vec![0], vec![0]]);
        let region = complex
            .regions
            .iter()
            .find(|c| c.label == origin_label)
            .expect("origin region exists");
        assert!(region.bounded);
        assert_eq!(region.dim, 3);
        assert!(region.contains(&qvec(&[0, 0, 0]), false));
        // closed region is the unit-radius sup-norm ball
        assert!(region.contains(&qvec(&[1, 1, 1]), true));
        assert!(!region.contains(&qvec(&[2, 0, 0]), true));
    }

    #[test]
    fn argmax_stratification_matches_cells() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        let label = stratum_of(&complex, &model, &qvec(&[0, 0, 0])).unwrap();
        assert_eq!(label, CellLabel::new(vec![vec![0], vec![0]]));
        let on_vertex = stratum_of(&complex, &model, &qvec(&[1, 1, 1])).unwrap();
        assert_eq!(on_vertex.per_factor[0].len(), 3);
        assert_eq!(on_vertex.per_factor[1].len(), 2);
    }

    #[test]
    fn one_term_factor_gives_empty_locus() {
        let h = HeightFunction::new(vec![zvec(&[0, 0])], vec![rat(0)]).unwrap();
        let complex = tropical_hypersurface(&h).unwrap();
        assert!(complex.cells.is_empty());
        assert_eq!(complex.regions.len(), 1);
        assert_eq!(complex.regions[0].dim, 2);
    }

    #[test]
    fn disjoint_tropical_roots_give_empty_intersection() {
        let h1 = HeightFunction::new(vec![zvec(&[0]), zvec(&[1])], vec![rat(0), rat(0)]).unwrap();
        let h2 = HeightFunction::new(vec![zvec(&[0]), zvec(&[1])], vec![rat(0), rat(1)]).unwrap();
        let model = TropicalModel::new(vec![h1, h2]).unwrap();
        let complex = tci_complex(&model).unwrap();
        assert!(complex.cells.is_empty());
        // regions: left of 0, between, right of 1, and the two mixed strata
        assert_eq!(complex.regions.len(), 5);
    }

    #[test]
    fn coincident_loci_are_rejected_as_non_transverse() {
        let h = HeightFunction::new(
            vec![zvec(&[0, 0, 0]), zvec(&[1, 0, 0])],
            vec![rat(0), rat(0)],
        )
        .unwrap();
        let model = TropicalModel::new(vec![h.clone(), h]).unwrap();
        match tci_complex(&model) {
            Err(TropError::NotTransverse(_)) => {}
            other => panic!("expected non-transverse error, got {other:?}"),
        }
    }

    #[test]
    fn threshold_vanishes_when_tuples_exhaust_support() {
        // two crossing lines in the plane, each with a two-point support
        let h1 = HeightFunction::new(vec![zvec(&[0, 0]), zvec(&[1, 0])], vec![rat(0), rat(0)])
            .unwrap();
        let h2 = HeightFunction::new(vec![zvec(&[0, 0]), zvec(&[0, 1])], vec![rat(0), rat(0)])
            .unwrap();
        let model = TropicalModel::new(vec![h1, h2]).unwrap();
        let complex = tci_complex(&model).unwrap();
        assert_eq!(complex.cells.len(), 1);
        let thr = smoothness_beta_threshold(&model, &complex, &[vec![1.0, 1.0], vec![1.0, 1.0]])
            .unwrap();
        assert_eq!(thr.beta0, 0.0);
        assert_eq!(thr.per_cell[0].1, 0.0);
    }

    #[test]
    fn threshold_grows_with_off_tuple_moduli() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        let ones = vec![vec![1.0; 4], vec![1.0; 4]];
        let thr1 = smoothness_beta_threshold(&model, &complex, &ones).unwrap();
        let mut doubled = ones.clone();
        for c in &mut doubled {
            for v in c.iter_mut() {
                *v *= 2.0;
            }
        }
        // uniform scaling leaves the ratios unchanged
        let thr2 = smoothness_beta_threshold(&model, &complex, &doubled).unwrap();
        assert!((thr1.beta0 - thr2.beta0).abs() < 1e-12);
        // scaling a single coefficient up increases the worst row sum
        let mut skew = ones.clone();
        skew[0][3] *= 8.0;
        let thr3 = smoothness_beta_threshold(&model, &complex, &skew).unwrap();
        assert!(thr3.beta0 > thr1.beta0);
        assert!(thr1.beta0 > 0.0);
    }

    #[test]
    fn running_threshold_regression() {
        let model = running_model();
        let complex = tci_complex(&model).unwrap();
        let ones = vec![vec![1.0; 4], vec![1.0; 4]];
        let thr = smoothness_beta_threshold(&model, &complex, &ones).unwrap();
        let k_max = thr
            .per_cell
            .iter()
            .map(|(_, k)| *k)
            .fold(0.0f64, f64::max);
        assert!((thr.beta0 - k_max.max(1.0).ln().powi(2)).abs() < 1e-12);
        assert!(thr.beta0 > 0.0 && thr.beta0 < 25.0, "beta0 = {}", thr.beta0);
    }

    #[test]
    fn witness_and_elimination_agree_on_labels() {
        let model = running_model();
        let subs = model.subdivisions().unwrap();
        for f1 in subs[0].all_faces() {
            for f2 in subs[1].all_faces() {
                let label = CellLabel::new(vec![f1.0.clone(), f2.0.clone()]);
                assert!(cross_check_label(&model, &label), "label {label}");
            }
        }
    }
}
