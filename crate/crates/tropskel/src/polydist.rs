//! Distances to parameterised polyhedra and the cell decomposition of
//! affine neighbourhoods.
//!
//! A parameterised polyhedron is the set `{x : phi(x) <= 0 for all phi in S}`
//! together with its defining collection `S`. The affine distance
//! `max_{phi in S} phi(x)` is comparable with the Euclidean distance on both
//! sides; [`lipschitz_constant`] certifies the comparison constant from the
//! face normals. Tightening every boundary functional by `delta` and
//! projecting yields the retraction that pushes a point of the affine
//! `delta`-neighbourhood of a complex into the cell it is closest to.

use crate::feas::LinSystem;
use crate::geom::Polytope;
use crate::rat::{
    cmp_qvec, dot, is_zero_vec, primitivize, qvec_from_z, rat, rat_to_f64, vneg, vsub, QMat, QVec,
    Rat, ZVec,
};
use crate::tropical::{TropicalCellComplex, TropicalModel};
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyDistError {
    /// The requested width exceeds the certified separation of the complex
    /// or leaves some tightened cell empty.
    #[error("delta is too large for this complex")]
    DeltaTooLarge,
    #[error("point lies outside the affine neighbourhood")]
    OutsideNeighbourhood,
    #[error("the polyhedra do not intersect")]
    EmptyIntersection,
}

/// The affine map `x -> <e, x> + c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFunctional {
    pub e: QVec,
    pub c: Rat,
}

impl AffineFunctional {
    pub fn new(e: QVec, c: Rat) -> AffineFunctional {
        AffineFunctional { e, c }
    }

    pub fn eval(&self, x: &[Rat]) -> Rat {
        dot(&self.e, x) + &self.c
    }

    pub fn norm_sq(&self) -> Rat {
        dot(&self.e, &self.e)
    }
}

/// `{x : phi(x) <= 0}` with its defining collection. Two parameterisations
/// of the same set are distinct objects: the collection, not the set, fixes
/// the affine distance. The set must be nonempty.
#[derive(Clone, Debug)]
pub struct ParameterisedPolyhedron {
    pub rank: usize,
    pub functionals: Vec<AffineFunctional>,
    /// Whether dropping any single functional strictly enlarges the set.
    pub minimal: bool,
    /// Functionals that vanish identically on the set, deduplicated up to
    /// positive scaling, as equations `<a, x> = b`.
    eqs: Vec<(QVec, Rat)>,
    /// An irredundant selection of the remaining rows, as `<a, x> <= b`.
    ineqs: Vec<(QVec, Rat)>,
}

impl ParameterisedPolyhedron {
    pub fn new(rank: usize, functionals: Vec<AffineFunctional>) -> ParameterisedPolyhedron {
        assert!(
            !functionals.is_empty(),
            "a parameterisation needs at least one functional"
        );
        let weak = |sys: &mut LinSystem| {
            for f in &functionals {
                sys.le(f.e.clone(), -f.c.clone());
            }
        };
        let mut sys = LinSystem::new(rank);
        weak(&mut sys);
        assert!(sys.is_feasible(), "the defining system must be satisfiable");

        let minimal = (0..functionals.len()).all(|i| {
            let mut sys = LinSystem::new(rank);
            for (j, f) in functionals.iter().enumerate() {
                if j == i {
                    // phi_i > 0
                    sys.lt(vneg(&f.e), f.c.clone());
                } else {
                    sys.le(f.e.clone(), -f.c.clone());
                }
            }
            sys.is_feasible()
        });

        // rows forced to equality on the whole set
        let mut eqs: Vec<(QVec, Rat)> = Vec::new();
        let mut eq_keys: Vec<(ZVec, Rat)> = Vec::new();
        let mut loose: Vec<usize> = Vec::new();
        for (i, f) in functionals.iter().enumerate() {
            let mut sys = LinSystem::new(rank);
            weak(&mut sys);
            // phi_i < 0
            sys.lt(f.e.clone(), -f.c.clone());
            if sys.is_feasible() {
                loose.push(i);
            } else if let Some(key) = canonical_eq(&f.e, &-f.c.clone()) {
                if !eq_keys.contains(&key) {
                    eq_keys.push(key);
                    eqs.push((f.e.clone(), -f.c.clone()));
                }
            }
        }

        // greedy irredundant selection of the loose rows modulo the equations
        let mut kept = loose;
        let mut k = 0;
        while k < kept.len() {
            let i = kept[k];
            let mut sys = LinSystem::new(rank);
            for (a, b) in &eqs {
                sys.eq(a.clone(), b.clone());
            }
            for &j in &kept {
                if j != i {
                    sys.le(functionals[j].e.clone(), -functionals[j].c.clone());
                }
            }
            sys.lt(vneg(&functionals[i].e), functionals[i].c.clone());
            if sys.is_feasible() {
                k += 1;
            } else {
                kept.remove(k);
            }
        }
        let ineqs = kept
            .into_iter()
            .map(|i| (functionals[i].e.clone(), -functionals[i].c.clone()))
            .collect();

        ParameterisedPolyhedron {
            rank,
            functionals,
            minimal,
            eqs,
            ineqs,
        }
    }

    /// The facet description of a polytope, with both signs of every
    /// affine-hull equation.
    pub fn from_polytope(p: &Polytope) -> ParameterisedPolyhedron {
        let mut fs = Vec::new();
        for f in &p.facets {
            fs.push(AffineFunctional::new(
                qvec_from_z(&f.normal),
                -f.offset.clone(),
            ));
        }
        for (a, b) in &p.affine_hull {
            let e = qvec_from_z(a);
            fs.push(AffineFunctional::new(e.clone(), -b.clone()));
            fs.push(AffineFunctional::new(vneg(&e), b.clone()));
        }
        ParameterisedPolyhedron::new(p.rank, fs)
    }

    /// Drops redundant functionals one at a time; the survivors are a
    /// minimal parameterisation of the same set.
    pub fn minimalise(&self) -> ParameterisedPolyhedron {
        let mut kept = self.functionals.clone();
        let mut i = 0;
        while i < kept.len() {
            let mut sys = LinSystem::new(self.rank);
            for (j, f) in kept.iter().enumerate() {
                if j != i {
                    sys.le(f.e.clone(), -f.c.clone());
                }
            }
            sys.lt(vneg(&kept[i].e), kept[i].c.clone());
            if sys.is_feasible() {
                i += 1;
            } else {
                kept.remove(i);
            }
        }
        ParameterisedPolyhedron::new(self.rank, kept)
    }

    /// The cached irredundant description: equations first, then weak rows.
    pub fn compact_hrep(&self) -> (&[(QVec, Rat)], &[(QVec, Rat)]) {
        (&self.eqs, &self.ineqs)
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        !affine_distance(x, self).is_positive()
    }
}

/// The equation `<e, x> = b` scaled to a primitive integer normal with
/// positive leading entry; `None` for the trivial equation.
fn canonical_eq(e: &[Rat], b: &Rat) -> Option<(ZVec, Rat)> {
    if is_zero_vec(e) {
        return None;
    }
    let p = primitivize(e);
    let k = e.iter().position(|x| !x.is_zero()).unwrap();
    let lam = Rat::from_integer(p[k].clone()) / e[k].clone();
    let mut pb = lam * b;
    let mut pz = p;
    if pz[k].is_negative() {
        pz = pz.iter().map(|x| -x).collect();
        pb = -pb;
    }
    Some((pz, pb))
}

/// `max_{phi in S} phi(x)`: nonpositive exactly on the polyhedron, and
/// comparable with the Euclidean distance outside it.
pub fn affine_distance(x: &[Rat], p: &ParameterisedPolyhedron) -> Rat {
    p.functionals
        .iter()
        .map(|f| f.eval(x))
        .max()
        .expect("nonempty collection")
}

/// Exact squared Euclidean distance from `x` to the polyhedron.
pub fn euclid_distance_sq(x: &[Rat], p: &ParameterisedPolyhedron) -> Rat {
    project_onto_hrep(x, p.rank, &p.eqs, &p.ineqs)
        .expect("the polyhedron is nonempty")
        .1
}

fn norm_sq(v: &[Rat]) -> Rat {
    dot(v, v)
}

/// Orthogonal projection of `x` onto the affine set `{y : a_i y = b_i}`,
/// or `None` when the equations are inconsistent.
fn affine_project(x: &[Rat], rows: &[(QVec, Rat)]) -> Option<QVec> {
    if rows.is_empty() {
        return Some(x.to_vec());
    }
    let m = QMat::from_rows(rows.iter().map(|(a, _)| a.clone()).collect());
    let b: QVec = rows.iter().map(|(_, b)| b.clone()).collect();
    let y0 = m.solve(&b)?;
    let ker = m.kernel();
    if ker.is_empty() {
        return Some(y0);
    }
    // y = y0 + sum t_i k_i with t solving the normal equations of
    // min |y - x|; the kernel basis is independent, so the Gram matrix
    // is invertible
    let kmat = QMat::from_rows(ker.clone());
    let gram = kmat.mul(&kmat.transpose());
    let rhs = kmat.mul_vec(&vsub(x, &y0));
    let t = gram.solve(&rhs).expect("Gram system of a basis is solvable");
    let mut y = y0;
    for (ti, kv) in t.iter().zip(&ker) {
        for (yc, kc) in y.iter_mut().zip(kv) {
            *yc += ti * kc;
        }
    }
    Some(y)
}

/// Nearest point of `{eqs, ineqs}` to `x` with its squared distance, by
/// enumerating candidate active sets. The nearest point lies in the
/// relative interior of a face, so some subset of the weak rows recovers
/// it. `None` when the region is empty.
fn project_onto_hrep(
    x: &[Rat],
    rank: usize,
    eqs: &[(QVec, Rat)],
    ineqs: &[(QVec, Rat)],
) -> Option<(QVec, Rat)> {
    let n = ineqs.len();
    assert!(n < 20, "face enumeration needs a small description");
    let mut best: Option<(QVec, Rat)> = None;
    for mask in 0usize..(1 << n) {
        if mask.count_ones() as usize > rank {
            continue;
        }
        let mut rows: Vec<(QVec, Rat)> = eqs.to_vec();
        for (i, row) in ineqs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rows.push(row.clone());
            }
        }
        let Some(y) = affine_project(x, &rows) else {
            continue;
        };
        if ineqs.iter().any(|(a, b)| dot(a, &y) > *b) {
            continue;
        }
        let d2 = norm_sq(&vsub(x, &y));
        if best.as_ref().is_none_or(|(_, bd)| d2 < *bd) {
            best = Some((y, d2));
        }
    }
    best
}

/// The certified constant `K >= 1` with
/// `K^-1 d(x, P) <= max(d_aff(x, P), 0) <= K d(x, P)` for all `x`.
/// The upper direction needs the largest functional norm; the lower
/// direction needs, on every nonempty face, the distance from the origin to
/// each simplex spanned by independent active normals. Requires that the
/// negation of every functional vanishing identically on `P` is itself in
/// the collection, which holds for all parameterisations built here.
pub fn lipschitz_constant(p: &ParameterisedPolyhedron) -> Rat {
    let mut ksq = p
        .functionals
        .iter()
        .map(AffineFunctional::norm_sq)
        .max()
        .expect("nonempty collection");
    if ksq < rat(1) {
        ksq = rat(1);
    }
    for active in realizable_active_sets(p) {
        if active.is_empty() {
            continue;
        }
        let mut gens: Vec<QVec> = active
            .iter()
            .map(|&i| p.functionals[i].e.clone())
            .filter(|e| !is_zero_vec(e))
            .collect();
        gens.sort_by(|a, b| cmp_qvec(a, b));
        gens.dedup();
        for subset in independent_subsets(&gens, p.rank) {
            let picked: Vec<&QVec> = subset.iter().map(|&i| &gens[i]).collect();
            let c2 = simplex_min_norm_sq(&picked);
            let inv = c2.recip();
            if inv > ksq {
                ksq = inv;
            }
        }
    }
    rational_sqrt_upper(&ksq)
}

/// Active index sets of the nonempty faces. Faces are enumerated on the
/// compact description by closing row seeds under implication; a functional
/// is active on a face exactly when it is an affine combination of the rows
/// that cut the face out.
fn realizable_active_sets(p: &ParameterisedPolyhedron) -> Vec<Vec<usize>> {
    let m = p.ineqs.len();
    assert!(m < 20, "face enumeration needs a small description");
    let close = |seed: usize| -> Option<usize> {
        let build = |forced: usize, strict: Option<usize>| {
            let mut sys = LinSystem::new(p.rank);
            for (a, b) in &p.eqs {
                sys.eq(a.clone(), b.clone());
            }
            for (i, (a, b)) in p.ineqs.iter().enumerate() {
                if forced >> i & 1 == 1 {
                    sys.eq(a.clone(), b.clone());
                } else if strict == Some(i) {
                    sys.lt(a.clone(), b.clone());
                } else {
                    sys.le(a.clone(), b.clone());
                }
            }
            sys
        };
        if !build(seed, None).is_feasible() {
            return None;
        }
        let mut out = seed;
        for i in 0..m {
            if out >> i & 1 == 0 && !build(seed, Some(i)).is_feasible() {
                out |= 1 << i;
            }
        }
        Some(out)
    };

    let top = close(0).expect("the polyhedron is nonempty");
    let mut masks = vec![top];
    let mut queue = vec![top];
    while let Some(cur) = queue.pop() {
        for j in 0..m {
            if cur >> j & 1 == 1 {
                continue;
            }
            if let Some(face) = close(cur | 1 << j) {
                if !masks.contains(&face) {
                    masks.push(face);
                    queue.push(face);
                }
            }
        }
    }

    let mut out = Vec::with_capacity(masks.len());
    for mask in masks {
        let mut aug: Vec<QVec> = p
            .eqs
            .iter()
            .map(|(a, b)| {
                let mut row = a.clone();
                row.push(b.clone());
                row
            })
            .collect();
        for (i, (a, b)) in p.ineqs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let mut row = a.clone();
                row.push(b.clone());
                aug.push(row);
            }
        }
        let base_rank = if aug.is_empty() {
            0
        } else {
            QMat::from_rows(aug.clone()).rank()
        };
        let active = p
            .functionals
            .iter()
            .enumerate()
            .filter(|(_, f)| {
                let mut rows = aug.clone();
                let mut row = f.e.clone();
                row.push(-f.c.clone());
                rows.push(row);
                QMat::from_rows(rows).rank() == base_rank
            })
            .map(|(i, _)| i)
            .collect();
        out.push(active);
    }
    out
}

/// Nonempty linearly independent index subsets of `gens`, up to size `cap`.
fn independent_subsets(gens: &[QVec], cap: usize) -> Vec<Vec<usize>> {
    assert!(gens.len() <= 24, "too many active normals");
    let mut out = Vec::new();
    for s in 1..=cap.min(gens.len()) {
        for combo in (0..gens.len()).combinations(s) {
            let m = QMat::from_rows(combo.iter().map(|&i| gens[i].clone()).collect());
            if m.rank() == s {
                out.push(combo);
            }
        }
    }
    out
}

/// Squared distance from the origin to the convex hull of a linearly
/// independent family, via the stationary point of `|sum l_i p_i|^2` with
/// `sum l_i = 1` on every subfamily.
fn simplex_min_norm_sq(points: &[&QVec]) -> Rat {
    let m = points.len();
    let mut best: Option<Rat> = None;
    for mask in 1usize..(1 << m) {
        let sub: Vec<&QVec> = (0..m)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| points[i])
            .collect();
        let k = sub.len();
        let mut rows: Vec<QVec> = Vec::with_capacity(k);
        for a in 0..k {
            rows.push((0..k).map(|b| dot(sub[a], sub[b])).collect());
        }
        let gram = QMat::from_rows(rows);
        let Some(ginv) = gram.inverse() else {
            continue;
        };
        let ones = vec![rat(1); k];
        let gi1 = ginv.mul_vec(&ones);
        let denom: Rat = gi1.iter().sum();
        if !denom.is_positive() {
            continue;
        }
        if gi1.iter().any(|l| l.is_negative()) {
            continue;
        }
        let val = denom.recip();
        if best.as_ref().is_none_or(|b| val < *b) {
            best = Some(val);
        }
    }
    best.expect("a vertex of the simplex is always stationary")
}

const SQRT_PRECISION_BITS: u32 = 20;

/// A rational `s >= sqrt(x)`, exact when `sqrt(x)` is rational with
/// denominator dividing `denom(x) << 20`, otherwise within `2^-20`.
pub fn rational_sqrt_upper(x: &Rat) -> Rat {
    assert!(!x.is_negative());
    let p = BigInt::from(1u64) << SQRT_PRECISION_BITS;
    let scaled = x.numer() * x.denom() * &p * &p;
    let s = scaled.sqrt();
    let den = x.denom() * &p;
    if &s * &s == scaled {
        Rat::new(s, den)
    } else {
        Rat::new(s + 1, den)
    }
}

/// A rational `s <= sqrt(x)` within `2^-20`, exact on perfect squares.
pub fn rational_sqrt_lower(x: &Rat) -> Rat {
    assert!(!x.is_negative());
    let p = BigInt::from(1u64) << SQRT_PRECISION_BITS;
    let scaled = x.numer() * x.denom() * &p * &p;
    Rat::new(scaled.sqrt(), x.denom() * &p)
}

/// A finite family of parameterised cells, closed under faces, whose
/// defining collections include literally along face relations.
#[derive(Clone, Debug)]
pub struct ParameterisedComplex {
    pub rank: usize,
    pub cells: Vec<ParameterisedPolyhedron>,
    /// `(i, j, map)`: cell `i` is a proper face of cell `j` and `map[k]`
    /// locates the `k`-th functional of cell `j` inside cell `i`.
    pub inclusions: Vec<(usize, usize, Vec<usize>)>,
    /// Largest width certified safe for [`affine_cell_decomposition`];
    /// `None` when no two cells are disjoint.
    pub separation: Option<Rat>,
}

/// Parameterises every cell of the intersection complex by the functionals
/// `l_beta - l_alpha` over tied `alpha` and `beta != alpha` in the same
/// factor. Collections of faces then contain the collections of their
/// cofaces, and the complex carries a certified separation width.
pub fn parameterise_tropical(
    model: &TropicalModel,
    complex: &TropicalCellComplex,
) -> ParameterisedComplex {
    let rank = complex.rank;
    let mut cells = Vec::with_capacity(complex.cells.len());
    let mut tags: Vec<Vec<(usize, usize, usize)>> = Vec::with_capacity(complex.cells.len());
    for cell in &complex.cells {
        let mut fs = Vec::new();
        let mut tg = Vec::new();
        for (j, ties) in cell.label.per_factor.iter().enumerate() {
            let h = &model.heights[j];
            for &a in ties {
                let pa = qvec_from_z(&h.points[a]);
                for b in 0..h.len() {
                    if b == a {
                        continue;
                    }
                    let e = vsub(&qvec_from_z(&h.points[b]), &pa);
                    let c = &h.values[a] - &h.values[b];
                    fs.push(AffineFunctional::new(e, c));
                    tg.push((j, a, b));
                }
            }
        }
        cells.push(ParameterisedPolyhedron::new(rank, fs));
        tags.push(tg);
    }

    let inclusions = complex
        .poset
        .iter()
        .map(|&(i, j)| {
            let map = tags[j]
                .iter()
                .map(|t| {
                    tags[i]
                        .iter()
                        .position(|s| s == t)
                        .expect("face collection contains the coface collection")
                })
                .collect();
            (i, j, map)
        })
        .collect();

    let separation = separation_threshold(rank, &cells);
    ParameterisedComplex {
        rank,
        cells,
        inclusions,
        separation,
    }
}

/// Half the smallest pairwise distance between disjoint cells, divided by
/// the largest cell constant: below this width a point of the affine
/// neighbourhood cannot sit within width of two disjoint cells at once.
fn separation_threshold(rank: usize, cells: &[ParameterisedPolyhedron]) -> Option<Rat> {
    let mut min_sq: Option<Rat> = None;
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let (ea, ia) = cells[i].compact_hrep();
            let (eb, ib) = cells[j].compact_hrep();
            if hreps_intersect(rank, (ea, ia), (eb, ib)) {
                continue;
            }
            let d2 = hrep_distance_sq(rank, (ea, ia), (eb, ib), min_sq.as_ref());
            if let Some(d2) = d2 {
                if min_sq.as_ref().is_none_or(|m| d2 < *m) {
                    min_sq = Some(d2);
                }
            }
        }
    }
    let d2 = min_sq?;
    let kmax = cells
        .iter()
        .map(lipschitz_constant)
        .max()
        .expect("complex has cells");
    Some(rational_sqrt_lower(&d2) / (rat(2) * kmax))
}

fn hreps_intersect(
    rank: usize,
    a: (&[(QVec, Rat)], &[(QVec, Rat)]),
    b: (&[(QVec, Rat)], &[(QVec, Rat)]),
) -> bool {
    let mut sys = LinSystem::new(rank);
    for (r, v) in a.0.iter().chain(b.0) {
        sys.eq(r.clone(), v.clone());
    }
    for (r, v) in a.1.iter().chain(b.1) {
        sys.le(r.clone(), v.clone());
    }
    sys.is_feasible()
}

/// Exact squared distance between two disjoint polyhedra, as the best
/// distance over pairs of candidate active sets whose critical difference
/// vector is realized by actual points. Candidates not improving on
/// `cutoff` are skipped; returns `None` when nothing beats the cutoff.
fn hrep_distance_sq(
    rank: usize,
    a: (&[(QVec, Rat)], &[(QVec, Rat)]),
    b: (&[(QVec, Rat)], &[(QVec, Rat)]),
    cutoff: Option<&Rat>,
) -> Option<Rat> {
    let (na, nb) = (a.1.len(), b.1.len());
    assert!(na < 16 && nb < 16, "face enumeration needs small descriptions");
    let select = |eqs: &[(QVec, Rat)], ineqs: &[(QVec, Rat)], mask: usize| {
        let mut rows: Vec<(QVec, Rat)> = eqs.to_vec();
        for (i, row) in ineqs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                rows.push(row.clone());
            }
        }
        rows
    };
    let mut best: Option<Rat> = cutoff.cloned();
    let mut improved = false;
    let mut masks_a: Vec<usize> = (0..1usize << na)
        .filter(|m| m.count_ones() as usize <= rank)
        .collect();
    masks_a.sort_by_key(|m| m.count_ones());
    let masks_b: Vec<usize> = {
        let mut v: Vec<usize> = (0..1usize << nb)
            .filter(|m| m.count_ones() as usize <= rank)
            .collect();
        v.sort_by_key(|m| m.count_ones());
        v
    };
    for &ma in &masks_a {
        let rows_a = select(a.0, a.1, ma);
        let (ya, kera) = match affine_solution(rank, &rows_a) {
            Some(s) => s,
            None => continue,
        };
        for &mb in &masks_b {
            let rows_b = select(b.0, b.1, mb);
            let Some((yb, kerb)) = affine_solution(rank, &rows_b) else {
                continue;
            };
            // critical difference between the two affine spans
            let d0 = vsub(&ya, &yb);
            let span: Vec<QVec> = kera.iter().chain(&kerb).cloned().collect();
            let v = if span.is_empty() {
                d0
            } else {
                let w = QMat::from_rows(span.clone());
                let gram = w.mul(&w.transpose());
                let rhs = w.mul_vec(&d0);
                let t = gram.solve(&rhs).expect("normal equations are consistent");
                let mut v = d0;
                for (ti, wv) in t.iter().zip(&span) {
                    for (vc, wc) in v.iter_mut().zip(wv) {
                        *vc -= ti * wc;
                    }
                }
                v
            };
            if is_zero_vec(&v) {
                continue;
            }
            let d2 = norm_sq(&v);
            if best.as_ref().is_some_and(|m| d2 >= *m) {
                continue;
            }
            // realizability: points y in A, z in B with y - z = v and the
            // selected rows tight
            let mut sys = LinSystem::new(2 * rank);
            let pad = |r: &[Rat], side: usize| -> QVec {
                let mut row = vec![rat(0); 2 * rank];
                for (k, c) in r.iter().enumerate() {
                    row[side * rank + k] = c.clone();
                }
                row
            };
            for (r, val) in a.0 {
                sys.eq(pad(r, 0), val.clone());
            }
            for (i, (r, val)) in a.1.iter().enumerate() {
                if ma >> i & 1 == 1 {
                    sys.eq(pad(r, 0), val.clone());
                } else {
                    sys.le(pad(r, 0), val.clone());
                }
            }
            for (r, val) in b.0 {
                sys.eq(pad(r, 1), val.clone());
            }
            for (i, (r, val)) in b.1.iter().enumerate() {
                if mb >> i & 1 == 1 {
                    sys.eq(pad(r, 1), val.clone());
                } else {
                    sys.le(pad(r, 1), val.clone());
                }
            }
            for k in 0..rank {
                let mut row = vec![rat(0); 2 * rank];
                row[k] = rat(1);
                row[rank + k] = rat(-1);
                sys.eq(row, v[k].clone());
            }
            if sys.is_feasible() {
                best = Some(d2);
                improved = true;
            }
        }
    }
    if improved {
        best
    } else {
        None
    }
}

/// A particular solution and kernel basis of the row system, or `None`
/// when inconsistent. Empty rows give the origin and the standard basis.
fn affine_solution(rank: usize, rows: &[(QVec, Rat)]) -> Option<(QVec, Vec<QVec>)> {
    if rows.is_empty() {
        let mut ker = Vec::with_capacity(rank);
        for i in 0..rank {
            let mut v = vec![rat(0); rank];
            v[i] = rat(1);
            ker.push(v);
        }
        return Some((vec![rat(0); rank], ker));
    }
    let m = QMat::from_rows(rows.iter().map(|(a, _)| a.clone()).collect());
    let b: QVec = rows.iter().map(|(_, v)| v.clone()).collect();
    let y = m.solve(&b)?;
    Some((y, m.kernel()))
}

/// `min_C d_aff(x, C)` over the cells of the complex.
pub fn complex_affine_distance(x: &[Rat], sigma: &ParameterisedComplex) -> Rat {
    sigma
        .cells
        .iter()
        .map(|c| affine_distance(x, c))
        .min()
        .expect("complex has cells")
}

/// Locates `x` in the cell decomposition of the affine `delta`-neighbourhood
/// and retracts it onto the complex: returns the index of the unique minimal
/// cell `C` with `d_aff(x, C) <= delta` and the nearest point of the
/// tightened cell `C_delta`, which keeps affine distance at least `delta`
/// from every proper face of `C`.
pub fn affine_cell_decomposition(
    sigma: &ParameterisedComplex,
    delta: &Rat,
    x: &[Rat],
) -> Result<(usize, QVec), PolyDistError> {
    assert!(delta.is_positive());
    if let Some(limit) = &sigma.separation {
        if delta > limit {
            return Err(PolyDistError::DeltaTooLarge);
        }
    }
    let within: Vec<usize> = (0..sigma.cells.len())
        .filter(|&i| affine_distance(x, &sigma.cells[i]) <= *delta)
        .collect();
    if within.is_empty() {
        return Err(PolyDistError::OutsideNeighbourhood);
    }
    let is_face = |i: usize, j: usize| sigma.inclusions.iter().any(|&(a, b, _)| a == i && b == j);
    let cell = *within
        .iter()
        .find(|&&c| within.iter().all(|&o| o == c || !is_face(o, c)))
        .expect("a minimal candidate exists");

    // tighten away from every proper face by one fresh functional per face
    let (eqs, ineqs) = sigma.cells[cell].compact_hrep();
    let mut rows: Vec<(QVec, Rat)> = ineqs.to_vec();
    for (f_idx, c_idx, map) in &sigma.inclusions {
        if *c_idx != cell {
            continue;
        }
        let face = &sigma.cells[*f_idx];
        let fresh = (0..face.functionals.len())
            .filter(|k| !map.contains(k))
            .find(|&k| {
                // phi >= 0 on the cell: {cell rows, phi < 0} infeasible
                let phi = &face.functionals[k];
                let mut sys = LinSystem::new(sigma.rank);
                for (a, b) in eqs {
                    sys.eq(a.clone(), b.clone());
                }
                for (a, b) in ineqs {
                    sys.le(a.clone(), b.clone());
                }
                sys.lt(phi.e.clone(), -phi.c.clone());
                !sys.is_feasible()
            });
        if let Some(k) = fresh {
            let phi = &face.functionals[k];
            // phi(y) >= delta
            rows.push((vneg(&phi.e), &phi.c - delta));
        }
    }
    match project_onto_hrep(x, sigma.rank, eqs, &rows) {
        Some((y, _)) => Ok((cell, y)),
        None => Err(PolyDistError::DeltaTooLarge),
    }
}

/// Whether every factor of the model attains its envelope within `width`
/// on at least two support points at `u`: the exact test for the closed
/// affine tube around the intersection complex.
pub fn affine_tube_membership(model: &TropicalModel, u: &[Rat], width: &Rat) -> bool {
    model.heights.iter().all(|h| {
        let (top, _) = h.legendre_eval(u);
        let near = (0..h.len())
            .filter(|&i| &top - h.l(i, u) <= *width)
            .count();
        near >= 2
    })
}

/// Float variant of [`affine_tube_membership`] with an absolute slack.
pub fn affine_tube_membership_f64(model: &TropicalModel, u: &[f64], width: f64, tol: f64) -> bool {
    model.heights.iter().all(|h| {
        let vals: Vec<f64> = (0..h.len())
            .map(|i| {
                let lin: f64 = h.points[i]
                    .iter()
                    .zip(u)
                    .map(|(a, x)| a.to_f64().expect("small integer") * x)
                    .sum();
                lin - rat_to_f64(&h.values[i])
            })
            .collect();
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        vals.iter().filter(|&&v| v >= top - width - tol).count() >= 2
    })
}

/// Comparison constants for the intersection of two affine neighbourhoods:
/// `U(P1, d) ∩ U(P2, d) ⊆ U(P1 ∩ P2, K d)`.
#[derive(Clone, Debug)]
pub struct IntersectionConstant {
    /// Certified: the constant of the joint collection times the largest
    /// functional norm.
    pub assembled: Rat,
    /// Largest sampled ratio `d(x, P1 ∩ P2) / max(d(x, P1), d(x, P2))`.
    pub empirical: f64,
    /// Number of samples with a positive denominator.
    pub samples: usize,
}

/// Certifies and samples the constant relating the distance to an
/// intersection with the distances to its two pieces. Sampling is seeded
/// and draws rational points from a box around the intersection.
pub fn neighbourhood_intersection_constant(
    p1: &ParameterisedPolyhedron,
    p2: &ParameterisedPolyhedron,
    seed: u64,
    samples: usize,
) -> Result<IntersectionConstant, PolyDistError> {
    use rand::{Rng, SeedableRng};
    assert_eq!(p1.rank, p2.rank);
    if same_collection(p1, p2) {
        return Ok(IntersectionConstant {
            assembled: rat(1),
            empirical: 1.0,
            samples: 0,
        });
    }
    let joint: Vec<AffineFunctional> = p1
        .functionals
        .iter()
        .chain(&p2.functionals)
        .cloned()
        .collect();
    let mut sys = LinSystem::new(p1.rank);
    for f in &joint {
        sys.le(f.e.clone(), -f.c.clone());
    }
    if !sys.is_feasible() {
        return Err(PolyDistError::EmptyIntersection);
    }
    let inter = ParameterisedPolyhedron::new(p1.rank, joint).minimalise();

    let max_norm = p1
        .functionals
        .iter()
        .chain(&p2.functionals)
        .map(AffineFunctional::norm_sq)
        .max()
        .expect("nonempty collections");
    let assembled = lipschitz_constant(&inter) * rational_sqrt_upper(&max_norm);

    let (base, _) = project_onto_hrep(&vec![rat(0); inter.rank], inter.rank, &inter.eqs, &inter.ineqs)
        .expect("intersection is nonempty");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut empirical: f64 = 0.0;
    let mut used = 0;
    for _ in 0..samples {
        let x: QVec = base
            .iter()
            .map(|c| c + Rat::new(BigInt::from(rng.gen_range(-24i64..=24)), BigInt::from(8)))
            .collect();
        let d1 = rat_to_f64(&euclid_distance_sq(&x, p1)).sqrt();
        let d2 = rat_to_f64(&euclid_distance_sq(&x, p2)).sqrt();
        let di = rat_to_f64(&euclid_distance_sq(&x, &inter)).sqrt();
        let denom = d1.max(d2);
        if denom > 1e-12 {
            empirical = empirical.max(di / denom);
            used += 1;
        }
    }
    Ok(IntersectionConstant {
        assembled,
        empirical,
        samples: used,
    })
}

/// Whether the two collections coincide as sets of functionals.
fn same_collection(p1: &ParameterisedPolyhedron, p2: &ParameterisedPolyhedron) -> bool {
    let key = |p: &ParameterisedPolyhedron| {
        let mut v: Vec<(QVec, Rat)> = p.functionals.iter().map(|f| (f.e.clone(), f.c.clone())).collect();
        v.sort_by(|a, b| cmp_qvec(&a.0, &b.0).then_with(|| a.1.cmp(&b.1)));
        v.dedup();
        v
    };
    p1.rank == p2.rank && key(p1) == key(p2)
}
