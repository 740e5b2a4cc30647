//! Height functions on finite lattice point sets, their Legendre transforms,
//! regular subdivisions via lower hulls, convex envelopes, triangulation
//! classification, and star extensions.
//!
//! Lower-hull convention: a facet of the lifted hull belongs to the lower
//! hull when its outward normal has negative last coordinate; vertical
//! facets are excluded. When the heights are affine the subdivision is the
//! single trivial cell.

use crate::geom::{convex_hull, GeomError, Polytope};
use crate::rat::{cmp_zvec, dot, qvec_from_z, rat, QVec, Rat, ZVec};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubdivError {
    #[error("empty point set")]
    Empty,
    #[error("duplicate point in height function domain")]
    DuplicatePoint,
    #[error("point/value length mismatch")]
    LengthMismatch,
    #[error("origin must be interior to the parent polytope")]
    OriginNotInterior,
    #[error("star extension needs every maximal cell to contain the origin")]
    NotCentred,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Exact heights `h(α)` on a finite set of lattice points `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightFunction {
    pub rank: usize,
    pub points: Vec<ZVec>,
    pub values: Vec<Rat>,
}

impl HeightFunction {
    pub fn new(points: Vec<ZVec>, values: Vec<Rat>) -> Result<Self, SubdivError> {
        if points.is_empty() {
            return Err(SubdivError::Empty);
        }
        if points.len() != values.len() {
            return Err(SubdivError::LengthMismatch);
        }
        let rank = points[0].len();
        let mut sorted = points.clone();
        sorted.sort_by(|a, b| cmp_zvec(a, b));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(SubdivError::DuplicatePoint);
        }
        Ok(HeightFunction {
            rank,
            points,
            values,
        })
    }

    pub fn from_pairs(pairs: &[(ZVec, Rat)]) -> Result<Self, SubdivError> {
        Self::new(
            pairs.iter().map(|(p, _)| p.clone()).collect(),
            pairs.iter().map(|(_, v)| v.clone()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the origin in the domain, if present.
    pub fn origin_index(&self) -> Option<usize> {
        self.points.iter().position(|p| p.iter().all(|c| c.is_zero()))
    }

    /// The affine form `l_α(x) = <α, x> - h(α)` for domain index `i`.
    pub fn l(&self, i: usize, x: &[Rat]) -> Rat {
        dot(&qvec_from_z(&self.points[i]), x) - &self.values[i]
    }

    /// `L_h(x) = max_α l_α(x)` with the full tie set, sorted by index.
    pub fn legendre_eval(&self, x: &[Rat]) -> (Rat, Vec<usize>) {
        let mut best = self.l(0, x);
        let mut ties = vec![0usize];
        for i in 1..self.len() {
            let v = self.l(i, x);
            match v.cmp(&best) {
                std::cmp::Ordering::Greater => {
                    best = v;
                    ties = vec![i];
                }
                std::cmp::Ordering::Equal => ties.push(i),
                std::cmp::Ordering::Less => {}
            }
        }
        (best, ties)
    }

    /// Restriction to the domain points lying in `p`.
    pub fn restrict_to(&self, p: &Polytope) -> Result<HeightFunction, SubdivError> {
        let pairs: Vec<(ZVec, Rat)> = self
            .points
            .iter()
            .zip(&self.values)
            .filter(|(pt, _)| p.contains(&qvec_from_z(pt)))
            .map(|(pt, v)| (pt.clone(), v.clone()))
            .collect();
        HeightFunction::from_pairs(&pairs)
    }

    pub fn conv(&self) -> Result<Polytope, SubdivError> {
        let pts: Vec<QVec> = self.points.iter().map(|p| qvec_from_z(p)).collect();
        Ok(convex_hull(&pts)?)
    }
}

/// One maximal cell: the domain indices on a lower facet and their hull.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub label: Vec<usize>,
    pub polytope: Polytope,
    /// The affine function (w, t, c) of the supporting lower facet:
    /// points of the lower hull over the cell satisfy h = (c - <w,α>)/t.
    functional: (QVec, Rat, Rat),
}

impl Cell {
    /// Height of the lower hull over `x` in this cell's affine span.
    pub fn hull_height(&self, x: &[Rat]) -> Rat {
        let (w, t, c) = &self.functional;
        (c - dot(w, x)) / t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularSubdivision {
    pub rank: usize,
    pub points: Vec<ZVec>,
    /// Maximal cells, sorted by label.
    pub cells: Vec<Cell>,
    pub is_triangulation: bool,
    /// Whether normalising the heights to their convex envelope changed any
    /// value (some lifted point was strictly above the lower hull).
    pub envelope_changed: bool,
}

pub fn regular_subdivision(h: &HeightFunction) -> Result<RegularSubdivision, SubdivError> {
    let n = h.rank;
    let lifted: Vec<QVec> = h
        .points
        .iter()
        .zip(&h.values)
        .map(|(p, v)| {
            let mut q = qvec_from_z(p);
            q.push(v.clone());
            q
        })
        .collect();
    let hull = convex_hull(&lifted)?;
    let base = h.conv()?;

    let mut cells: Vec<Cell> = Vec::new();
    if hull.dim == base.dim {
        // heights are affine on A: the trivial subdivision
        let label: Vec<usize> = (0..h.len()).collect();
        // affine interpolant: any functional (w,-1,c) with h = <w,α> - c...
        // solve <w,α> + t h = c with t = -1 normalisation
        let (w, c) = affine_interpolant(h);
        cells.push(Cell {
            label,
            polytope: base.clone(),
            functional: (w, rat(-1), c),
        });
    } else {
        for f in &hull.facets {
            let t = Rat::from_integer(f.normal[n].clone());
            if !t.is_negative() {
                continue;
            }
            let w: QVec = qvec_from_z(&f.normal[..n]);
            let label: Vec<usize> = lifted
                .iter()
                .enumerate()
                .filter(|(_, q)| dot(&qvec_from_z(&f.normal), q) == f.offset)
                .map(|(i, _)| i)
                .collect();
            let pts: Vec<QVec> = label.iter().map(|&i| qvec_from_z(&h.points[i])).collect();
            let polytope = convex_hull(&pts)?;
            cells.push(Cell {
                label,
                polytope,
                functional: (w, t, f.offset.clone()),
            });
        }
        cells.sort_by(|a, b| a.label.cmp(&b.label));
    }

    // envelope flag: any domain point strictly above the lower hull?
    let mut envelope_changed = false;
    for (p, v) in h.points.iter().zip(&h.values) {
        let q = qvec_from_z(p);
        let cell = cells
            .iter()
            .find(|c| c.polytope.contains(&q))
            .expect("cells cover conv(A)");
        if *v > cell.hull_height(&q) {
            envelope_changed = true;
            break;
        }
    }

    let is_triangulation = cells.iter().all(|c| {
        c.polytope.vertices.len() == c.polytope.dim + 1 && c.label.len() == c.polytope.vertices.len()
    });

    Ok(RegularSubdivision {
        rank: h.rank,
        points: h.points.clone(),
        cells,
        is_triangulation,
        envelope_changed,
    })
}

/// For heights affine on A, the pair (w, c) with h(α) = <w, α> - c, so that
/// the trivial cell's functional (w, -1, c) reproduces h as its hull height.
fn affine_interpolant(h: &HeightFunction) -> (QVec, Rat) {
    // solve <w, α> + c0 = h(α) exactly, free variables zero
    let rows: Vec<QVec> = h
        .points
        .iter()
        .map(|p| {
            let mut r = qvec_from_z(p);
            r.push(rat(1));
            r
        })
        .collect();
    let m = crate::rat::QMat {
        nrows: rows.len(),
        ncols: h.rank + 1,
        rows,
    };
    let sol = m.solve(&h.values).expect("heights are affine on A");
    let w: QVec = sol[..h.rank].to_vec();
    let c0 = sol[h.rank].clone();
    (w, -c0)
}

impl RegularSubdivision {
    /// Domain indices adjacent to `i` through some cell (for triangulations
    /// this is exactly the set of edge neighbours).
    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for c in &self.cells {
            if c.label.contains(&i) {
                for &j in &c.label {
                    if j != i && !out.contains(&j) {
                        out.push(j);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All faces of the subdivision as (label, dim) pairs, deduplicated and
    /// sorted. A face's label is the set of domain indices lying on it.
    pub fn all_faces(&self) -> Vec<(Vec<usize>, usize)> {
        use crate::geom::FaceLattice;
        let mut out: Vec<(Vec<usize>, usize)> = Vec::new();
        for c in &self.cells {
            let fl = FaceLattice::compute(&c.polytope);
            for face in &fl.faces {
                let pts: Vec<QVec> = face
                    .vertex_ids
                    .iter()
                    .map(|&i| c.polytope.vertices[i].clone())
                    .collect();
                let hull = convex_hull(&pts).expect("face has vertices");
                let label: Vec<usize> = c
                    .label
                    .iter()
                    .copied()
                    .filter(|&i| hull.contains(&qvec_from_z(&self.points[i])))
                    .collect();
                if !out.iter().any(|(l, _)| *l == label) {
                    out.push((label, face.dim));
                }
            }
        }
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Exact total volume of the maximal cells (full-dimensional case).
    pub fn total_volume(&self) -> Rat {
        self.cells
            .iter()
            .map(|c| crate::geom::polytope::volume(&c.polytope))
            .sum()
    }

    /// Drops the origin from every maximal cell, leaving the complex of
    /// cells on the faces not containing the origin.
    pub fn restrict_to_boundary(&self) -> Result<RegularSubdivision, SubdivError> {
        let origin = self
            .points
            .iter()
            .position(|p| p.iter().all(|c| c.is_zero()))
            .ok_or(SubdivError::NotCentred)?;
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            if !c.label.contains(&origin) {
                return Err(SubdivError::NotCentred);
            }
            let label: Vec<usize> = c.label.iter().copied().filter(|&i| i != origin).collect();
            let pts: Vec<QVec> = label.iter().map(|&i| qvec_from_z(&self.points[i])).collect();
            let polytope = convex_hull(&pts)?;
            cells.push(Cell {
                label,
                polytope,
                functional: c.functional.clone(),
            });
        }
        cells.sort_by(|a, b| a.label.cmp(&b.label));
        let is_triangulation = cells.iter().all(|c| {
            c.polytope.vertices.len() == c.polytope.dim + 1
                && c.label.len() == c.polytope.vertices.len()
        });
        Ok(RegularSubdivision {
            rank: self.rank,
            points: self.points.clone(),
            cells,
            is_triangulation,
            envelope_changed: self.envelope_changed,
        })
    }
}

/// Largest convex minorant of `h` on its domain; returns the normalised
/// heights and whether any value changed.
pub fn convex_envelope(h: &HeightFunction) -> Result<(HeightFunction, bool), SubdivError> {
    let sub = regular_subdivision(h)?;
    let mut values = Vec::with_capacity(h.len());
    let mut changed = false;
    for (p, v) in h.points.iter().zip(&h.values) {
        let q = qvec_from_z(p);
        let cell = sub
            .cells
            .iter()
            .find(|c| c.polytope.contains(&q))
            .expect("cells cover conv(A)");
        let env = cell.hull_height(&q);
        if env != *v {
            changed = true;
        }
        values.push(env);
    }
    Ok((
        HeightFunction {
            rank: h.rank,
            points: h.points.clone(),
            values,
        },
        changed,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriFlags {
    pub triangulation: bool,
    /// Every cell is a simplex whose lattice points are exactly its vertices.
    pub refined: bool,
    /// h(0)=0, h>0 elsewhere, and every maximal cell contains the origin.
    pub centred_star: bool,
}

pub fn classify_triangulation(sub: &RegularSubdivision, h: &HeightFunction) -> TriFlags {
    let triangulation = sub.is_triangulation;
    let refined = triangulation
        && sub
            .cells
            .iter()
            .all(|c| c.polytope.lattice_points().len() == c.polytope.dim + 1);
    let centred_star = match h.origin_index() {
        None => false,
        Some(o) => {
            h.values[o].is_zero()
                && h.values
                    .iter()
                    .enumerate()
                    .all(|(i, v)| i == o || v.is_positive())
                && sub.cells.iter().all(|c| c.label.contains(&o))
        }
    };
    TriFlags {
        triangulation,
        refined,
        centred_star,
    }
}

/// Cones a boundary triangulation of `parent` over the origin:
/// each cell `T` becomes `conv(0, T)`.
pub fn star_extension(
    boundary: &RegularSubdivision,
    parent: &Polytope,
) -> Result<RegularSubdivision, SubdivError> {
    if !parent.contains_zero_in_interior() {
        return Err(SubdivError::OriginNotInterior);
    }
    let mut points = boundary.points.clone();
    let origin_index = match points.iter().position(|p| p.iter().all(|c| c.is_zero())) {
        Some(i) => i,
        None => {
            points.push(vec![num_bigint::BigInt::zero(); boundary.rank]);
            points.len() - 1
        }
    };
    let mut cells = Vec::with_capacity(boundary.cells.len());
    for c in &boundary.cells {
        let mut label = c.label.clone();
        label.push(origin_index);
        label.sort_unstable();
        let pts: Vec<QVec> = label.iter().map(|&i| qvec_from_z(&points[i])).collect();
        let polytope = convex_hull(&pts)?;
        cells.push(Cell {
            label,
            polytope,
            functional: c.functional.clone(),
        });
    }
    cells.sort_by(|a, b| a.label.cmp(&b.label));
    let is_triangulation = cells.iter().all(|c| {
        c.polytope.vertices.len() == c.polytope.dim + 1 && c.label.len() == c.polytope.vertices.len()
    });
    Ok(RegularSubdivision {
        rank: boundary.rank,
        points,
        cells,
        is_triangulation,
        envelope_changed: boundary.envelope_changed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::rat::{qvec, zvec};

    fn octa_heights() -> HeightFunction {
        HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap()
    }

    /// Heights for the first coordinate family of the cube example:
    /// support {0, e1, -e1, e3}, heights (0,1,1,1).
    fn tri_heights_1() -> HeightFunction {
        HeightFunction::from_pairs(&[
            (zvec(&[0, 0, 0]), rat(0)),
            (zvec(&[1, 0, 0]), rat(1)),
            (zvec(&[-1, 0, 0]), rat(1)),
            (zvec(&[0, 0, 1]), rat(1)),
        ])
        .unwrap()
    }

    #[test]
    fn legendre_values_and_tie_sets() {
        let h = tri_heights_1();
        let (v, ties) = h.legendre_eval(&qvec(&[0, 0, 0]));
        assert_eq!(v, rat(0));
        assert_eq!(ties, vec![0]);
        let (v1, ties1) = h.legendre_eval(&qvec(&[1, 0, 0]));
        assert_eq!(v1, rat(0));
        assert_eq!(ties1, vec![0, 1]);
        // h ≡ 0 gives the support function of the hull
        let zero_h = HeightFunction::new(h.points.clone(), vec![rat(0); 4]).unwrap();
        let hull = zero_h.conv().unwrap();
        for dir in [qvec(&[2, 1, 3]), qvec(&[-1, 0, 5]), qvec(&[0, 0, -1])] {
            assert_eq!(zero_h.legendre_eval(&dir).0, hull.support_value(&dir));
        }
    }

    #[test]
    fn octahedron_heights_give_eight_refined_centred_tetrahedra() {
        let h = octa_heights();
        let sub = regular_subdivision(&h).unwrap();
        assert_eq!(sub.cells.len(), 8);
        assert!(sub.is_triangulation);
        assert!(!sub.envelope_changed);
        let flags = classify_triangulation(&sub, &h);
        assert!(flags.triangulation && flags.refined && flags.centred_star);
        // volumes sum to vol(octahedron)
        assert_eq!(sub.total_volume(), crate::rat::ratio(4, 3));
    }

    #[test]
    fn equal_heights_on_square_give_single_cell() {
        let h = HeightFunction::from_pairs(&[
            (zvec(&[0, 0]), rat(0)),
            (zvec(&[1, 0]), rat(0)),
            (zvec(&[0, 1]), rat(0)),
            (zvec(&[1, 1]), rat(0)),
        ])
        .unwrap();
        let sub = regular_subdivision(&h).unwrap();
        assert_eq!(sub.cells.len(), 1);
        assert_eq!(sub.cells[0].label, vec![0, 1, 2, 3]);
        assert!(!sub.is_triangulation);
        let flags = classify_triangulation(&sub, &h);
        assert!(!flags.triangulation && !flags.refined && !flags.centred_star);
    }

    #[test]
    fn segment_lower_hull_by_hand() {
        let h = HeightFunction::from_pairs(&[
            (zvec(&[0]), rat(0)),
            (zvec(&[1]), rat(0)),
            (zvec(&[2]), rat(1)),
        ])
        .unwrap();
        let sub = regular_subdivision(&h).unwrap();
        let labels: Vec<Vec<usize>> = sub.cells.iter().map(|c| c.label.clone()).collect();
        assert_eq!(labels, vec![vec![0, 1], vec![1, 2]]);
        assert!(sub.is_triangulation);
    }

    #[test]
    fn envelope_flattens_the_middle_point() {
        let h = HeightFunction::from_pairs(&[
            (zvec(&[0]), rat(0)),
            (zvec(&[1]), rat(5)),
            (zvec(&[2]), rat(0)),
        ])
        .unwrap();
        let (env, changed) = convex_envelope(&h).unwrap();
        assert!(changed);
        assert_eq!(env.values, vec![rat(0), rat(0), rat(0)]);
        let (env2, changed2) = convex_envelope(&env).unwrap();
        assert!(!changed2);
        assert_eq!(env2, env);
        // the original subdivision also records that the envelope moved
        let sub = regular_subdivision(&h).unwrap();
        assert!(sub.envelope_changed);
    }

    #[test]
    fn running_heights_are_their_own_envelope() {
        for h in [octa_heights(), tri_heights_1()] {
            let (env, changed) = convex_envelope(&h).unwrap();
            assert!(!changed);
            assert_eq!(env.values, h.values);
        }
    }

    #[test]
    fn refined_but_not_unimodular_simplex() {
        let h = HeightFunction::from_pairs(&[
            (zvec(&[1, 0, 0]), rat(0)),
            (zvec(&[0, 1, 0]), rat(0)),
            (zvec(&[1, 1, 0]), rat(0)),
            (zvec(&[0, 0, 2]), rat(0)),
        ])
        .unwrap();
        let sub = regular_subdivision(&h).unwrap();
        assert_eq!(sub.cells.len(), 1);
        let flags = classify_triangulation(&sub, &h);
        assert!(flags.triangulation);
        assert!(flags.refined);
        // normalized volume 2: a refined simplex need not be unimodular
        let vol = crate::geom::polytope::volume(&sub.cells[0].polytope);
        assert_eq!(vol * rat(6), rat(2));
    }

    #[test]
    fn star_extension_round_trips_the_octahedron() {
        let h = octa_heights();
        let sub = regular_subdivision(&h).unwrap();
        let boundary = sub.restrict_to_boundary().unwrap();
        assert_eq!(boundary.cells.len(), 8);
        assert!(boundary.is_triangulation);
        let oct = examples::cube().polar_dual().unwrap();
        let star = star_extension(&boundary, &oct).unwrap();
        assert_eq!(star.cells.len(), 8);
        let star_labels: Vec<Vec<usize>> = star.cells.iter().map(|c| c.label.clone()).collect();
        let orig_labels: Vec<Vec<usize>> = sub.cells.iter().map(|c| c.label.clone()).collect();
        assert_eq!(star_labels, orig_labels);
    }

    #[test]
    fn one_dimensional_star_extension() {
        let boundary = RegularSubdivision {
            rank: 1,
            points: vec![zvec(&[-1]), zvec(&[1])],
            cells: vec![
                Cell {
                    label: vec![0],
                    polytope: convex_hull(&[qvec(&[-1])]).unwrap(),
                    functional: (qvec(&[0]), rat(-1), rat(0)),
                },
                Cell {
                    label: vec![1],
                    polytope: convex_hull(&[qvec(&[1])]).unwrap(),
                    functional: (qvec(&[0]), rat(-1), rat(0)),
                },
            ],
            is_triangulation: true,
            envelope_changed: false,
        };
        let seg = convex_hull(&[qvec(&[-1]), qvec(&[1])]).unwrap();
        let star = star_extension(&boundary, &seg).unwrap();
        assert_eq!(star.cells.len(), 2);
        assert!(star.is_triangulation);
        assert!(star.cells[0].polytope.contains(&qvec(&[0])));
        assert!(star.cells[1].polytope.contains(&qvec(&[0])));
    }

    #[test]
    fn restricted_heights_triangulate_the_first_dual_summand() {
        let h = HeightFunction::from_pairs(&examples::octahedron_heights()).unwrap();
        let h1 = h.restrict_to(&examples::nabla1()).unwrap();
        assert_eq!(h1.len(), 4);
        let sub = regular_subdivision(&h1).unwrap();
        assert_eq!(sub.cells.len(), 2);
        assert!(sub.is_triangulation);
        // cells {0, η1, η3} and {0, -η1, η3}
        let vertex_sets: Vec<Vec<ZVec>> = sub
            .cells
            .iter()
            .map(|c| {
                let mut v: Vec<ZVec> = c.label.iter().map(|&i| h1.points[i].clone()).collect();
                v.sort_by(|a, b| crate::rat::cmp_zvec(a, b));
                v
            })
            .collect();
        assert!(vertex_sets.contains(&vec![zvec(&[0, 0, 0]), zvec(&[0, 0, 1]), zvec(&[1, 0, 0])]));
        assert!(vertex_sets.contains(&vec![zvec(&[-1, 0, 0]), zvec(&[0, 0, 0]), zvec(&[0, 0, 1])]));
        // neighbour structure: η3 is adjacent to 0 and ±η1
        let eta3 = h1.points.iter().position(|p| *p == zvec(&[0, 0, 1])).unwrap();
        assert_eq!(sub.neighbours(eta3).len(), 3);
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let err = HeightFunction::from_pairs(&[
            (zvec(&[0, 0]), rat(0)),
            (zvec(&[0, 0]), rat(1)),
        ])
        .unwrap_err();
        assert!(matches!(err, SubdivError::DuplicatePoint));
    }
}
