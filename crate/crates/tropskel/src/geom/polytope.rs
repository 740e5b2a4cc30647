//! Rational polytopes with exact convex hulls.
//!
//! Hulls are computed by brute-force facet enumeration inside a chart of the
//! affine hull: every `d`-subset of points spanning a hyperplane proposes a
//! facet, kept when all points lie on one side. Quadratic-ish in the input
//! but exact and deterministic, which is what the desk-scale examples need.

use crate::rat::{
    cmp_qvec, cmp_zvec, dot, fmt_rat, primitivize, qvec_from_z, rat, vadd, vsub, QMat, QVec, Rat,
    ZVec,
};
use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("empty point set")]
    EmptyInput,
    #[error("operation requires a full-dimensional polytope (dim {dim} < rank {rank})")]
    NotFullDimensional { dim: usize, rank: usize },
    #[error("operation requires the origin in the interior")]
    OriginNotInterior,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("rank mismatch: expected {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
}

/// Facet `normal · x <= offset` with a primitive integer outward normal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: ZVec,
    pub offset: Rat,
    /// Indices into `Polytope::vertices`, sorted.
    pub vertex_ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    /// Ambient dimension.
    pub rank: usize,
    /// Sorted lexicographically; the canonical form of the polytope.
    pub vertices: Vec<QVec>,
    /// Sorted by (normal, offset). Empty when `dim == 0`.
    pub facets: Vec<Facet>,
    /// Equations `normal · x = offset` cutting out the affine hull.
    pub affine_hull: Vec<(ZVec, Rat)>,
    pub dim: usize,
}

/// A point base and difference basis for the affine hull of a point set.
pub struct AffineChart {
    pub base: QVec,
    /// Rows span the direction space; dim many.
    pub basis: QMat,
}

impl AffineChart {
    pub fn build(points: &[QVec]) -> AffineChart {
        let base = points[0].clone();
        let mut rows: Vec<QVec> = Vec::new();
        for p in &points[1..] {
            let d = vsub(p, &base);
            if crate::rat::is_zero_vec(&d) {
                continue;
            }
            rows.push(d);
            let m = QMat::from_rows(rows.clone());
            if m.rank() < rows.len() {
                rows.pop();
            }
        }
        AffineChart {
            basis: QMat {
                nrows: rows.len(),
                ncols: base.len(),
                rows,
            },
            base,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows
    }

    /// Coordinates of `p` in the chart; `p` must lie in the affine hull.
    pub fn coords(&self, p: &[Rat]) -> QVec {
        if self.dim() == 0 {
            return Vec::new();
        }
        self.basis
            .transpose()
            .solve(&vsub(p, &self.base))
            .expect("point outside the affine hull")
    }

    /// An ambient functional restricting to `a` on the chart.
    fn lift_functional(&self, a: &[Rat]) -> QVec {
        self.basis.solve(a).expect("basis has full row rank")
    }
}

pub fn convex_hull(points: &[QVec]) -> Result<Polytope, GeomError> {
    if points.is_empty() {
        return Err(GeomError::EmptyInput);
    }
    let rank = points[0].len();
    let mut pts: Vec<QVec> = points.to_vec();
    for p in &pts {
        assert_eq!(p.len(), rank, "points of mixed dimension");
    }
    pts.sort_by(|a, b| cmp_qvec(a, b));
    pts.dedup();

    let chart = AffineChart::build(&pts);
    let d = chart.dim();

    // affine hull equations: functionals vanishing on the direction space
    let mut affine_hull: Vec<(ZVec, Rat)> = chart
        .basis
        .kernel()
        .iter()
        .map(|w| {
            let prim = primitivize(w);
            let off = dot(&qvec_from_z(&prim), &chart.base);
            (prim, off)
        })
        .collect();
    affine_hull.sort_by(|a, b| cmp_zvec(&a.0, &b.0));

    if d == 0 {
        return Ok(Polytope {
            rank,
            vertices: pts,
            facets: Vec::new(),
            affine_hull,
            dim: 0,
        });
    }

    let coords: Vec<QVec> = pts.iter().map(|p| chart.coords(p)).collect();

    // candidate facet hyperplanes from d-subsets spanning a hyperplane
    let mut chart_facets: Vec<(QVec, Rat)> = Vec::new();
    for subset in (0..pts.len()).combinations(d) {
        let diffs: Vec<QVec> = subset[1..]
            .iter()
            .map(|&i| vsub(&coords[i], &coords[subset[0]]))
            .collect();
        let m = QMat {
            nrows: diffs.len(),
            ncols: d,
            rows: diffs,
        };
        let ker = m.kernel();
        if ker.len() != 1 {
            continue;
        }
        let a = &ker[0];
        let b = dot(a, &coords[subset[0]]);
        let mut has_above = false;
        let mut has_below = false;
        for c in &coords {
            match dot(a, c).cmp(&b) {
                Ordering::Greater => has_above = true,
                Ordering::Less => has_below = true,
                Ordering::Equal => {}
            }
            if has_above && has_below {
                break;
            }
        }
        if has_above && has_below {
            continue;
        }
        let (a, b) = if has_above {
            (crate::rat::vneg(a), -b)
        } else {
            (a.clone(), b)
        };
        // canonical primitive form of (a, b) for dedup
        let mut joint = a.clone();
        joint.push(b.clone());
        let prim = qvec_from_z(&primitivize(&joint));
        let key_a = prim[..d].to_vec();
        let key_b = prim[d].clone();
        if !chart_facets
            .iter()
            .any(|(ca, cb)| cmp_qvec(ca, &key_a) == Ordering::Equal && *cb == key_b)
        {
            chart_facets.push((key_a, key_b));
        }
    }

    // vertices: points whose active facet normals span the chart
    let mut vertex_pts: Vec<QVec> = Vec::new();
    let mut vertex_chart: Vec<QVec> = Vec::new();
    for (p, c) in pts.iter().zip(&coords) {
        let active: Vec<QVec> = chart_facets
            .iter()
            .filter(|(a, b)| dot(a, c) == *b)
            .map(|(a, _)| a.clone())
            .collect();
        if active.len() >= d {
            let m = QMat {
                nrows: active.len(),
                ncols: d,
                rows: active,
            };
            if m.rank() == d {
                vertex_pts.push(p.clone());
                vertex_chart.push(c.clone());
            }
        }
    }
    // pts were sorted, so vertices are already sorted

    // lift facets to ambient coordinates
    let mut facets: Vec<Facet> = chart_facets
        .iter()
        .map(|(a, b)| {
            let w = chart.lift_functional(a);
            let off_w = dot(&w, &chart.base) + b;
            let normal = primitivize(&w);
            // scale factor from w to its primitive form
            let i = w.iter().position(|x| !x.is_zero()).unwrap();
            let mu = Rat::from_integer(normal[i].clone()) / &w[i];
            let offset = &mu * &off_w;
            let vertex_ids: Vec<usize> = vertex_chart
                .iter()
                .enumerate()
                .filter(|(_, c)| dot(a, c) == *b)
                .map(|(i, _)| i)
                .collect();
            Facet {
                normal,
                offset,
                vertex_ids,
            }
        })
        .collect();
    facets.sort_by(|f, g| cmp_zvec(&f.normal, &g.normal).then_with(|| f.offset.cmp(&g.offset)));

    Ok(Polytope {
        rank,
        vertices: vertex_pts,
        facets,
        affine_hull,
        dim: d,
    })
}

impl Polytope {
    pub fn from_lattice_vertices(vertices: &[&[i64]]) -> Polytope {
        let pts: Vec<QVec> = vertices.iter().map(|v| crate::rat::qvec(v)).collect();
        convex_hull(&pts).expect("nonempty vertex list")
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.affine_hull
            .iter()
            .all(|(n, b)| dot(&qvec_from_z(n), x) == *b)
            && self
                .facets
                .iter()
                .all(|f| dot(&qvec_from_z(&f.normal), x) <= f.offset)
    }

    /// Membership in the relative interior (interior when full-dimensional).
    pub fn contains_in_relint(&self, x: &[Rat]) -> bool {
        if self.dim == 0 {
            return cmp_qvec(x, &self.vertices[0]) == Ordering::Equal;
        }
        self.affine_hull
            .iter()
            .all(|(n, b)| dot(&qvec_from_z(n), x) == *b)
            && self
                .facets
                .iter()
                .all(|f| dot(&qvec_from_z(&f.normal), x) < f.offset)
    }

    pub fn support_value(&self, w: &[Rat]) -> Rat {
        self.vertices
            .iter()
            .map(|v| dot(w, v))
            .max()
            .expect("polytope has vertices")
    }

    /// Vertex indices attaining `max <w, v>`.
    pub fn argmax_vertices(&self, w: &[Rat]) -> Vec<usize> {
        let m = self.support_value(w);
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| dot(w, v) == m)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_lattice(&self) -> bool {
        self.vertices
            .iter()
            .all(|v| v.iter().all(|x| x.denom().is_one()))
    }

    pub fn contains_zero_in_interior(&self) -> bool {
        self.dim == self.rank && self.facets.iter().all(|f| f.offset.is_positive())
    }

    /// Lattice polytope with 0 interior whose polar dual is again a lattice
    /// polytope, i.e. every facet is `normal · x <= 1` with primitive normal.
    pub fn is_reflexive(&self) -> bool {
        self.dim == self.rank
            && self.is_lattice()
            && self.contains_zero_in_interior()
            && self.facets.iter().all(|f| f.offset == rat(1))
    }

    /// Polar dual `{y : <y, x> <= 1 for all x}`; requires 0 in the interior.
    pub fn polar_dual(&self) -> Result<Polytope, GeomError> {
        if self.dim != self.rank {
            return Err(GeomError::NotFullDimensional {
                dim: self.dim,
                rank: self.rank,
            });
        }
        if !self.contains_zero_in_interior() {
            return Err(GeomError::OriginNotInterior);
        }
        let dual_vertices: Vec<QVec> = self
            .facets
            .iter()
            .map(|f| {
                let inv = f.offset.recip();
                f.normal
                    .iter()
                    .map(|n| Rat::from_integer(n.clone()) * &inv)
                    .collect()
            })
            .collect();
        convex_hull(&dual_vertices)
    }

    /// All lattice points, by bounding-box scan; sorted.
    pub fn lattice_points(&self) -> Vec<ZVec> {
        let mut lo = Vec::with_capacity(self.rank);
        let mut hi = Vec::with_capacity(self.rank);
        for j in 0..self.rank {
            let mut min = self.vertices[0][j].clone();
            let mut max = min.clone();
            for v in &self.vertices {
                if v[j] < min {
                    min = v[j].clone();
                }
                if v[j] > max {
                    max = v[j].clone();
                }
            }
            lo.push(min.floor().to_integer());
            hi.push(max.ceil().to_integer());
        }
        let mut out = Vec::new();
        let mut current: ZVec = lo.clone();
        'scan: loop {
            let q: QVec = qvec_from_z(&current);
            if self.contains(&q) {
                out.push(current.clone());
            }
            for j in (0..self.rank).rev() {
                if current[j] < hi[j] {
                    current[j] += BigInt::one();
                    for (k, c) in current.iter_mut().enumerate() {
                        if k > j {
                            *c = lo[k].clone();
                        }
                    }
                    continue 'scan;
                }
            }
            break;
        }
        out.sort_by(|a, b| cmp_zvec(a, b));
        out
    }

    pub fn dilate(&self, r: &Rat) -> Polytope {
        assert!(r.is_positive(), "dilation factor must be positive");
        Polytope {
            rank: self.rank,
            vertices: self
                .vertices
                .iter()
                .map(|v| crate::rat::vscale(r, v))
                .collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    normal: f.normal.clone(),
                    offset: &f.offset * r,
                    vertex_ids: f.vertex_ids.clone(),
                })
                .collect(),
            affine_hull: self
                .affine_hull
                .iter()
                .map(|(n, b)| (n.clone(), b * r))
                .collect(),
            dim: self.dim,
        }
    }

    pub fn translate(&self, t: &[Rat]) -> Polytope {
        Polytope {
            rank: self.rank,
            vertices: self.vertices.iter().map(|v| vadd(v, t)).collect(),
            facets: self
                .facets
                .iter()
                .map(|f| Facet {
                    normal: f.normal.clone(),
                    offset: &f.offset + dot(&qvec_from_z(&f.normal), t),
                    vertex_ids: f.vertex_ids.clone(),
                })
                .collect(),
            affine_hull: self
                .affine_hull
                .iter()
                .map(|(n, b)| (n.clone(), b + dot(&qvec_from_z(n), t)))
                .collect(),
            dim: self.dim,
        }
    }

    /// Human-readable vertex list, for diagnostics.
    pub fn vertex_string(&self) -> String {
        self.vertices
            .iter()
            .map(|v| format!("({})", v.iter().map(fmt_rat).join(",")))
            .join(" ")
    }
}

pub fn minkowski_sum(a: &Polytope, b: &Polytope) -> Result<Polytope, GeomError> {
    if a.rank != b.rank {
        return Err(GeomError::RankMismatch {
            expected: a.rank,
            got: b.rank,
        });
    }
    let sums: Vec<QVec> = a
        .vertices
        .iter()
        .cartesian_product(&b.vertices)
        .map(|(u, v)| vadd(u, v))
        .collect();
    convex_hull(&sums)
}

/// All basic feasible points of `{x : eqs hold, ineqs hold}`, i.e. the
/// vertices of the (possibly unbounded) polyhedron.
pub fn vertices_from_hrep(
    rank: usize,
    eqs: &[(QVec, Rat)],
    ineqs: &[(QVec, Rat)],
) -> Vec<QVec> {
    let eq_mat = QMat {
        nrows: eqs.len(),
        ncols: rank,
        rows: eqs.iter().map(|(a, _)| a.clone()).collect(),
    };
    let base_rank = eq_mat.rank();
    let need = rank.saturating_sub(base_rank);
    let mut found: Vec<QVec> = Vec::new();
    for subset in (0..ineqs.len()).combinations(need) {
        let mut rows: Vec<QVec> = eqs.iter().map(|(a, _)| a.clone()).collect();
        let mut rhs: QVec = eqs.iter().map(|(_, b)| b.clone()).collect();
        for &i in &subset {
            rows.push(ineqs[i].0.clone());
            rhs.push(ineqs[i].1.clone());
        }
        let m = QMat {
            nrows: rows.len(),
            ncols: rank,
            rows,
        };
        if m.rank() != rank {
            continue;
        }
        let Some(x) = m.solve(&rhs) else { continue };
        let feasible = eqs.iter().all(|(a, b)| dot(a, &x) == *b)
            && ineqs.iter().all(|(a, b)| dot(a, &x) <= *b);
        if feasible && !found.iter().any(|y| cmp_qvec(y, &x) == Ordering::Equal) {
            found.push(x);
        }
    }
    found.sort_by(|a, b| cmp_qvec(a, b));
    found
}

/// Whether `{x : eqs hold, ineqs hold}` has empty recession cone.
pub fn hrep_is_bounded(rank: usize, eqs: &[(QVec, Rat)], ineqs: &[(QVec, Rat)]) -> bool {
    use crate::feas::LinSystem;
    for i in 0..rank {
        for sign in [1i64, -1] {
            let mut sys = LinSystem::new(rank);
            for (a, _) in eqs {
                sys.eq(a.clone(), rat(0));
            }
            for (a, _) in ineqs {
                sys.le(a.clone(), rat(0));
            }
            let mut probe = vec![rat(0); rank];
            probe[i] = rat(-sign);
            sys.le(probe, rat(-1));
            if sys.is_feasible() {
                return false;
            }
        }
    }
    true
}

/// A rational point satisfying `eqs` exactly and every inequality strictly,
/// or `None` when no such point exists.
///
/// Decides feasibility by elimination first, then intersects the weak region
/// with a growing box and takes the vertex average: once the box captures a
/// strict point, the average of all vertices lies in the relative interior of
/// the weak region, which equals the strict region when the latter is
/// nonempty.
pub fn strict_witness(
    rank: usize,
    eqs: &[(QVec, Rat)],
    ineqs: &[(QVec, Rat)],
) -> Option<QVec> {
    use crate::feas::LinSystem;
    let mut sys = LinSystem::new(rank);
    for (a, b) in eqs {
        sys.eq(a.clone(), b.clone());
    }
    for (a, b) in ineqs {
        sys.lt(a.clone(), b.clone());
    }
    if !sys.is_feasible() {
        return None;
    }
    let mut half: i64 = 1;
    loop {
        let mut boxed: Vec<(QVec, Rat)> = ineqs.to_vec();
        for i in 0..rank {
            for sign in [1i64, -1] {
                let mut a = vec![Rat::zero(); rank];
                a[i] = rat(sign);
                boxed.push((a, rat(half)));
            }
        }
        let verts = vertices_from_hrep(rank, eqs, &boxed);
        if !verts.is_empty() {
            let mut avg = vec![Rat::zero(); rank];
            for v in &verts {
                avg = vadd(&avg, v);
            }
            avg = crate::rat::vscale(
                &Rat::new(BigInt::one(), BigInt::from(verts.len())),
                &avg,
            );
            let strict_ok = eqs.iter().all(|(a, b)| dot(a, &avg) == *b)
                && ineqs.iter().all(|(a, b)| dot(a, &avg) < *b);
            if strict_ok {
                return Some(avg);
            }
        }
        half = half.checked_mul(4).expect("witness box overflow");
        assert!(half < 1 << 40, "strict system feasible but witness not found");
    }
}

/// Exact volume of `inner` measured in the chart coordinates of `container`'s
/// affine hull. Zero when `inner` has lower dimension; comparable across
/// polytopes sharing the container's hull.
pub fn volume_in_chart_of(container: &Polytope, inner: &Polytope) -> Rat {
    let chart = AffineChart::build(&container.vertices);
    let mapped: Vec<QVec> = inner.vertices.iter().map(|v| chart.coords(v)).collect();
    if chart.dim() == 0 {
        return rat(1);
    }
    let hull = convex_hull(&mapped).expect("chart image has vertices");
    if hull.dim < chart.dim() {
        return Rat::zero();
    }
    volume(&hull)
}

/// Exact Euclidean-lattice volume of a full-dimensional polytope, computed by
/// triangulating the boundary over the centroid. Normalised so the unit cube
/// has volume 1.
pub fn volume(p: &Polytope) -> Rat {
    assert_eq!(p.dim, p.rank, "volume: polytope must be full-dimensional");
    if p.dim == 0 {
        return rat(1);
    }
    let n = p.rank;
    let centroid = {
        let mut c = vec![Rat::zero(); n];
        for v in &p.vertices {
            c = vadd(&c, v);
        }
        crate::rat::vscale(&Rat::new(BigInt::one(), BigInt::from(p.vertices.len())), &c)
    };
    let mut total = Rat::zero();
    for f in &p.facets {
        let verts: Vec<&QVec> = f.vertex_ids.iter().map(|&i| &p.vertices[i]).collect();
        total += cone_volume_over_face(&centroid, &verts, n);
    }
    total
}

/// Volume of the cone from `apex` over an (n-1)-dimensional face.
fn cone_volume_over_face(apex: &QVec, verts: &[&QVec], n: usize) -> Rat {
    let mut vol = Rat::zero();
    let factorial = (1..=n as i64).product::<i64>();
    let face_pts: Vec<QVec> = verts.iter().map(|v| (*v).clone()).collect();
    let face = convex_hull(&face_pts).expect("face has vertices");
    if face.dim != n - 1 {
        return Rat::zero();
    }
    for simplex in face_simplices(&face) {
        let mut rows: Vec<QVec> = Vec::with_capacity(n);
        rows.push(vsub(&simplex[0], apex));
        for v in &simplex[1..] {
            rows.push(vsub(v, &simplex[0]));
        }
        let m = QMat {
            nrows: n,
            ncols: n,
            rows,
        };
        vol += m.det().abs() / rat(factorial);
    }
    vol
}

/// Triangulates a polytope of any dimension into simplices (each a list of
/// dim+1 vertices), by recursive boundary fanning from the first vertex.
pub fn face_simplices(p: &Polytope) -> Vec<Vec<QVec>> {
    if p.dim == 0 {
        return vec![vec![p.vertices[0].clone()]];
    }
    let apex = &p.vertices[0];
    let mut out = Vec::new();
    for f in &p.facets {
        // skip facets containing the apex: they contribute flat simplices
        if f.vertex_ids.contains(&0) {
            continue;
        }
        let verts: Vec<QVec> = f.vertex_ids.iter().map(|&i| p.vertices[i].clone()).collect();
        let facet_poly = convex_hull(&verts).expect("facet has vertices");
        for mut s in face_simplices(&facet_poly) {
            s.insert(0, apex.clone());
            out.push(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::qvec;

    fn cube3() -> Polytope {
        let mut vs: Vec<&[i64]> = Vec::new();
        let pts: Vec<Vec<i64>> = (0..8)
            .map(|k| {
                (0..3)
                    .map(|j| if (k >> j) & 1 == 1 { 1 } else { -1 })
                    .collect()
            })
            .collect();
        for p in &pts {
            vs.push(p);
        }
        Polytope::from_lattice_vertices(&vs)
    }

    #[test]
    fn cube_hull_has_expected_facets_and_vertices() {
        let c = cube3();
        assert_eq!(c.dim, 3);
        assert_eq!(c.vertices.len(), 8);
        assert_eq!(c.facets.len(), 6);
        assert!(c.is_reflexive());
        for f in &c.facets {
            assert_eq!(f.vertex_ids.len(), 4);
            assert_eq!(f.offset, rat(1));
        }
    }

    #[test]
    fn interior_points_are_dropped_from_hull() {
        let mut pts = vec![qvec(&[0, 0, 0]), qvec(&[1, 1, 1])];
        let c = cube3();
        pts.extend(c.vertices.clone());
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.vertices, c.vertices);
        assert_eq!(h.facets.len(), 6);
    }

    #[test]
    fn polar_dual_of_cube_is_octahedron_and_involution_holds() {
        let c = cube3();
        let oct = c.polar_dual().unwrap();
        assert_eq!(oct.vertices.len(), 6);
        assert_eq!(oct.facets.len(), 8);
        assert!(oct.is_reflexive());
        let back = oct.polar_dual().unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn lower_dimensional_hull_records_affine_equations() {
        // triangle in the z=1 plane of 3-space
        let t = convex_hull(&[qvec(&[0, 0, 1]), qvec(&[1, 0, 1]), qvec(&[0, 1, 1])]).unwrap();
        assert_eq!(t.dim, 2);
        assert_eq!(t.vertices.len(), 3);
        assert_eq!(t.facets.len(), 3);
        assert_eq!(t.affine_hull.len(), 1);
        let (n, b) = &t.affine_hull[0];
        assert_eq!(dot(&qvec_from_z(n), &qvec(&[0, 0, 1])), *b);
        assert!(t.contains(&[rat(0), rat(0), rat(1)]));
        assert!(!t.contains(&[rat(0), rat(0), rat(0)]));
        assert!(t.contains_in_relint(&[crate::rat::ratio(1, 4), crate::rat::ratio(1, 4), rat(1)]));
        assert!(!t.contains_in_relint(&[rat(0), rat(0), rat(1)]));
    }

    #[test]
    fn segment_and_point_hulls() {
        let s = convex_hull(&[qvec(&[2]), qvec(&[-1]), qvec(&[1])]).unwrap();
        assert_eq!(s.dim, 1);
        assert_eq!(s.vertices, vec![qvec(&[-1]), qvec(&[2])]);
        assert_eq!(s.facets.len(), 2);
        let p = convex_hull(&[qvec(&[3, 4])]).unwrap();
        assert_eq!(p.dim, 0);
        assert!(p.contains(&qvec(&[3, 4])));
        assert!(!p.contains(&qvec(&[3, 5])));
    }

    #[test]
    fn cube_lattice_points_count() {
        let c = cube3();
        assert_eq!(c.lattice_points().len(), 27);
        let oct = c.polar_dual().unwrap();
        assert_eq!(oct.lattice_points().len(), 7);
    }

    #[test]
    fn minkowski_sum_of_segments_is_square() {
        let a = convex_hull(&[qvec(&[0, 0]), qvec(&[1, 0])]).unwrap();
        let b = convex_hull(&[qvec(&[0, 0]), qvec(&[0, 1])]).unwrap();
        let s = minkowski_sum(&a, &b).unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.vertices.len(), 4);
    }

    #[test]
    fn hrep_round_trip_for_cube() {
        let ineqs: Vec<(QVec, Rat)> = vec![
            (qvec(&[1, 0, 0]), rat(1)),
            (qvec(&[-1, 0, 0]), rat(1)),
            (qvec(&[0, 1, 0]), rat(1)),
            (qvec(&[0, -1, 0]), rat(1)),
            (qvec(&[0, 0, 1]), rat(1)),
            (qvec(&[0, 0, -1]), rat(1)),
        ];
        let vs = vertices_from_hrep(3, &[], &ineqs);
        assert_eq!(vs.len(), 8);
        assert!(hrep_is_bounded(3, &[], &ineqs));
        let half: Vec<(QVec, Rat)> = ineqs[..5].to_vec();
        assert!(!hrep_is_bounded(3, &[], &half));
    }

    #[test]
    fn volume_of_cube_and_simplex() {
        assert_eq!(volume(&cube3()), rat(8));
        let simplex = Polytope::from_lattice_vertices(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
        ]);
        assert_eq!(volume(&simplex), crate::rat::ratio(1, 6));
        let oct = cube3().polar_dual().unwrap();
        assert_eq!(volume(&oct), crate::rat::ratio(4, 3));
    }

    #[test]
    fn translate_and_dilate_keep_membership() {
        let c = cube3();
        let t = c.translate(&qvec(&[5, 0, 0]));
        assert!(t.contains(&qvec(&[5, 0, 0])));
        assert!(!t.contains(&qvec(&[0, 0, 0])));
        let d = c.dilate(&rat(2));
        assert!(d.contains(&qvec(&[2, 2, 2])));
        assert_eq!(volume(&d), rat(64));
    }
}
