//! Smooth models of the piecewise linear boundary data: star functions of
//! rays, their mollifications and degree-1 homogenisations, smooth defining
//! functions for the boundary and the transversal locus, coherent
//! projections onto cones, and scaling flows in both piecewise linear and
//! smoothed form.
//!
//! Every smooth function here is a convolution of a piecewise linear
//! function with one fixed bump kernel, the tensor-product polynomial
//! bump `prod_k (1 - y_k^2)^4` on the unit box. The quadrature splits the
//! box along the kink hyperplanes of the integrand, so each cell sees a
//! polynomial integrand of per-variable degree at most 27 and the 16- and
//! 24-point tensor rules are both exact there; their agreement is a real
//! certificate, not a convergence heuristic. When no kink plane meets the
//! kernel box the convolution equals the centre value exactly and no
//! quadrature runs at all.

use crate::numeric::{self, NumError};
use crate::par::{self, ExecMode};
use crate::rat::ZVec;
use crate::skeleton::TriangulationFan;
use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SmoothError {
    #[error("quadrature failed to reach the requested tolerance")]
    QuadratureNotConverged,
    #[error("no level-set crossing along the ray")]
    NoBracket,
    #[error("newton iteration failed to converge")]
    NewtonDiverged,
    #[error("step limit exceeded during flow integration")]
    StepLimitExceeded,
    #[error("point is not in the open star of the cone")]
    OutsideStar,
    #[error("diagnostic failed: {0}")]
    DiagnosticFailed(String),
}

impl From<NumError> for SmoothError {
    fn from(e: NumError) -> SmoothError {
        match e {
            NumError::QuadratureNotConverged => SmoothError::QuadratureNotConverged,
            NumError::NoBracket => SmoothError::NoBracket,
            NumError::NewtonDiverged => SmoothError::NewtonDiverged,
            NumError::StepLimitExceeded => SmoothError::StepLimitExceeded,
        }
    }
}

fn zvec_f64(v: &ZVec) -> Vec<f64> {
    v.iter().map(|z| z.to_f64().unwrap()).collect()
}

/// Containment slack for floating-point cone location.
const CONE_TOL: f64 = 1e-9;

/// One maximal cone with its generator matrix inverted: row `i` of `dual`
/// is the functional picking out the coefficient of generator `i`.
#[derive(Clone, Debug)]
pub struct ConeChart {
    pub ray_ids: Vec<usize>,
    pub gens: Vec<Vec<f64>>,
    pub dual: Vec<Vec<f64>>,
}

/// Floating-point view of a complete simplicial fan: all piecewise linear
/// and smoothed evaluations go through the chart list.
pub struct FanEvaluator<'a> {
    pub fan: &'a TriangulationFan,
    pub charts: Vec<ConeChart>,
}

impl<'a> FanEvaluator<'a> {
    pub fn new(fan: &'a TriangulationFan) -> FanEvaluator<'a> {
        let n = fan.rank;
        let charts = fan
            .max_cones
            .iter()
            .map(|ids| {
                let gens: Vec<Vec<f64>> = ids.iter().map(|&i| zvec_f64(&fan.rays[i])).collect();
                let m = DMatrix::from_fn(n, n, |r, c| gens[c][r]);
                let inv = m.try_inverse().expect("maximal cones are simplicial");
                let dual: Vec<Vec<f64>> = (0..n)
                    .map(|r| (0..n).map(|c| inv[(r, c)]).collect())
                    .collect();
                ConeChart {
                    ray_ids: ids.clone(),
                    gens,
                    dual,
                }
            })
            .collect();
        FanEvaluator { fan, charts }
    }

    pub fn rank(&self) -> usize {
        self.fan.rank
    }

    /// Generator coordinates of `u` in chart `k`.
    pub fn chart_coords(&self, k: usize, u: &[f64]) -> Vec<f64> {
        self.charts[k]
            .dual
            .iter()
            .map(|row| numeric::dotf(row, u))
            .collect()
    }

    /// First chart containing `u` (within `CONE_TOL`, scaled by `|u|`).
    pub fn chart_of(&self, u: &[f64]) -> Option<(usize, Vec<f64>)> {
        let scale = 1.0 + numeric::normf(u);
        for k in 0..self.charts.len() {
            let coords = self.chart_coords(k, u);
            if coords.iter().all(|&c| c >= -CONE_TOL * scale) {
                return Some((k, coords));
            }
        }
        None
    }

    /// Value of the star function of `ray` at `u`: the dual coordinate in
    /// the containing chart, zero off the star.
    pub fn pl_ray(&self, ray: usize, u: &[f64]) -> f64 {
        match self.chart_of(u) {
            Some((k, coords)) => self.charts[k]
                .ray_ids
                .iter()
                .position(|&i| i == ray)
                .map_or(0.0, |p| coords[p].max(0.0)),
            None => 0.0,
        }
    }

    /// Max of the star functions of `rays` at `u`.
    pub fn pl_max(&self, rays: &[usize], u: &[f64]) -> f64 {
        match self.chart_of(u) {
            Some((k, coords)) => self.charts[k]
                .ray_ids
                .iter()
                .zip(&coords)
                .filter(|(i, _)| rays.contains(i))
                .fold(0.0, |m, (_, &c)| m.max(c)),
            None => 0.0,
        }
    }

    /// Largest dual-row norm over charts containing any of `rays`: a
    /// Lipschitz constant for the associated piecewise linear functions.
    pub fn pl_lipschitz(&self, rays: &[usize]) -> f64 {
        let mut l: f64 = 0.0;
        for chart in &self.charts {
            for (pos, id) in chart.ray_ids.iter().enumerate() {
                if rays.contains(id) {
                    l = l.max(numeric::normf(&chart.dual[pos]));
                }
            }
        }
        l
    }
}

/// The continuous piecewise linear function of a ray: zero off the star,
/// the dual coordinate on each maximal cone containing the ray.
pub struct PLStarFunction<'a, 'b> {
    pub fe: &'b FanEvaluator<'a>,
    pub ray: usize,
}

impl PLStarFunction<'_, '_> {
    pub fn value(&self, u: &[f64]) -> f64 {
        self.fe.pl_ray(self.ray, u)
    }

    /// Gradient away from the walls: the dual row of the containing chart,
    /// or zero off the star.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        match self.fe.chart_of(u) {
            Some((k, _)) => {
                let chart = &self.fe.charts[k];
                chart
                    .ray_ids
                    .iter()
                    .position(|&i| i == self.ray)
                    .map_or(vec![0.0; self.fe.rank()], |p| chart.dual[p].clone())
            }
            None => vec![0.0; self.fe.rank()],
        }
    }

    pub fn lipschitz(&self) -> f64 {
        self.fe.pl_lipschitz(&[self.ray])
    }
}

/// Value and almost-everywhere gradient of a star function.
pub fn pl_star_eval(f: &PLStarFunction, u: &[f64]) -> (f64, Vec<f64>) {
    (f.value(u), f.gradient(u))
}

// ---------------------------------------------------------------------------
// bump kernel and its mass

/// `prod_k (1 - y_k^2)^4` on the unit box, zero outside. Polynomial on its
/// support and `C^3` across the boundary, which keeps every decomposed
/// quadrature cell polynomial.
fn kernel(y: &[f64]) -> f64 {
    let mut p = 1.0;
    for &t in y {
        let s = 1.0 - t * t;
        if s <= 0.0 {
            return 0.0;
        }
        p *= s * s * s * s;
    }
    p
}

/// `int_{-1}^{1} (1-t^2)^4 dt = 256/315` per coordinate.
fn kernel_mass(n: usize) -> f64 {
    (256.0 / 315.0_f64).powi(n as i32)
}

// ---------------------------------------------------------------------------
// cell decompositions for the convolution quadrature

type Poly2 = Vec<Vec<f64>>;
type Tet = [Vec<f64>; 4];

fn polygon_area(p: &Poly2) -> f64 {
    let mut a = 0.0;
    for i in 0..p.len() {
        let q = &p[i];
        let r = &p[(i + 1) % p.len()];
        a += q[0] * r[1] - r[0] * q[1];
    }
    a.abs() * 0.5
}

/// Sutherland-Hodgman clip of a convex polygon against one side of the
/// line `<w,y> = c`.
fn clip_polygon(poly: &Poly2, w: &[f64], c: f64, keep_le: bool) -> Poly2 {
    let side = |p: &[f64]| {
        let d = numeric::dotf(w, p) - c;
        if keep_le {
            -d
        } else {
            d
        }
    };
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a.clone());
        }
        if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
            let t = sa / (sa - sb);
            out.push(vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

fn tet_volume(t: &Tet) -> f64 {
    let e: Vec<Vec<f64>> = (1..4)
        .map(|i| (0..3).map(|k| t[i][k] - t[0][k]).collect())
        .collect();
    let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
    det.abs() / 6.0
}

fn edge_point(a: &[f64], ga: f64, b: &[f64], gb: f64) -> Vec<f64> {
    let t = ga / (ga - gb);
    (0..a.len()).map(|k| a[k] + t * (b[k] - a[k])).collect()
}

/// The part of a tetrahedron on one side of a plane, as tetrahedra. The
/// splits follow the standard one-in / two-in / three-in tables; slivers
/// from vertices sitting on the plane are filtered by volume downstream.
fn clip_tet(tet: &Tet, w: &[f64], c: f64, keep_le: bool) -> Vec<Tet> {
    let g: Vec<f64> = tet
        .iter()
        .map(|v| {
            let d = numeric::dotf(w, v) - c;
            if keep_le {
                -d
            } else {
                d
            }
        })
        .collect();
    let inside: Vec<usize> = (0..4).filter(|&i| g[i] >= 0.0).collect();
    let outside: Vec<usize> = (0..4).filter(|&i| g[i] < 0.0).collect();
    let e = |i: usize, o: usize| edge_point(&tet[i], g[i], &tet[o], g[o]);
    match inside.len() {
        0 => vec![],
        4 => vec![tet.clone()],
        1 => {
            let a = inside[0];
            let p: Vec<Vec<f64>> = outside.iter().map(|&o| e(a, o)).collect();
            vec![[tet[a].clone(), p[0].clone(), p[1].clone(), p[2].clone()]]
        }
        3 => {
            // prism between the inside triangle and its shadow on the plane
            let (a, b, c) = (inside[0], inside[1], inside[2]);
            let d = outside[0];
            let (ea, eb, ec) = (e(a, d), e(b, d), e(c, d));
            vec![
                [tet[a].clone(), tet[b].clone(), tet[c].clone(), ec.clone()],
                [tet[a].clone(), tet[b].clone(), ec.clone(), eb.clone()],
                [tet[a].clone(), eb, ec, ea],
            ]
        }
        2 => {
            // wedge over the planar quadrilateral of edge crossings
            let (a, b) = (inside[0], inside[1]);
            let (c, d) = (outside[0], outside[1]);
            let (eac, ead, ebc, ebd) = (e(a, c), e(a, d), e(b, c), e(b, d));
            vec![
                [tet[a].clone(), eac.clone(), ead, ebd.clone()],
                [tet[a].clone(), eac, ebd.clone(), ebc.clone()],
                [tet[a].clone(), ebc, ebd, tet[b].clone()],
            ]
        }
        _ => unreachable!(),
    }
}

/// Kuhn triangulation of `[-1,1]^3` into six tetrahedra.
fn kuhn_tets() -> Vec<Tet> {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    perms
        .iter()
        .map(|p| {
            let mut v = vec![-1.0; 3];
            let mut tet = vec![v.clone()];
            for &axis in p {
                v[axis] = 1.0;
                tet.push(v.clone());
            }
            [
                tet[0].clone(),
                tet[1].clone(),
                tet[2].clone(),
                tet[3].clone(),
            ]
        })
        .collect()
}

enum MeshCells {
    /// No kink plane meets the kernel box: the integrand is affine.
    Affine,
    /// Products of per-axis segments.
    Boxes(Vec<(Vec<f64>, Vec<f64>)>),
    Polys(Vec<Poly2>),
    Tets(Vec<Tet>),
    /// No decomposition available; single full box.
    Whole,
}

// ---------------------------------------------------------------------------
// mollified functions

/// A max of star functions convolved with the bump kernel of radius `eps`.
pub struct MollifiedFunction<'a, 'b> {
    pub fe: &'b FanEvaluator<'a>,
    pub rays: Vec<usize>,
    pub eps: f64,
    /// Kink hyperplane normals of the base function (through the origin),
    /// normalised with the first nonzero entry positive.
    walls: Vec<Vec<f64>>,
}

impl<'a, 'b> MollifiedFunction<'a, 'b> {
    /// Builds the kink-plane list and certifies the quadrature on a probe
    /// set: 16- and 24-point values must agree to `1e-8`.
    pub fn new(
        fe: &'b FanEvaluator<'a>,
        rays: Vec<usize>,
        eps: f64,
    ) -> Result<MollifiedFunction<'a, 'b>, SmoothError> {
        assert!(eps > 0.0, "mollification radius must be positive");
        let mut walls: Vec<Vec<f64>> = Vec::new();
        let mut push = |w: &[f64]| {
            let norm = numeric::normf(w);
            if norm < 1e-12 {
                return;
            }
            let mut dir: Vec<f64> = w.iter().map(|x| x / norm).collect();
            if let Some(first) = dir.iter().find(|x| x.abs() > 1e-9) {
                if *first < 0.0 {
                    dir.iter_mut().for_each(|x| *x = -*x);
                }
            }
            let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9);
            if !walls.iter().any(|v| close(v, &dir)) {
                walls.push(dir);
            }
        };
        for chart in &fe.charts {
            for row in &chart.dual {
                push(row);
            }
            let members: Vec<usize> = (0..chart.ray_ids.len())
                .filter(|&p| rays.contains(&chart.ray_ids[p]))
                .collect();
            for (ai, &a) in members.iter().enumerate() {
                for &b in &members[ai + 1..] {
                    let diff: Vec<f64> = chart.dual[a]
                        .iter()
                        .zip(&chart.dual[b])
                        .map(|(x, y)| x - y)
                        .collect();
                    push(&diff);
                }
            }
        }
        let m = MollifiedFunction {
            fe,
            rays,
            eps,
            walls,
        };
        for probe in m.certification_probes() {
            m.eval_checked(&probe)?;
        }
        Ok(m)
    }

    fn certification_probes(&self) -> Vec<Vec<f64>> {
        let n = self.fe.rank();
        let mut probes = vec![vec![0.0; n]];
        for ray in &self.fe.fan.rays {
            let g = zvec_f64(ray);
            let norm = numeric::normf(&g);
            probes.push(g.iter().map(|x| x / norm).collect());
            probes.push(
                g.iter()
                    .map(|x| x / norm * (1.0 + 0.5 * self.eps))
                    .collect(),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..6 {
            let v: Vec<f64> = (0..n).map(|_| numeric::gaussian(&mut rng)).collect();
            let norm = numeric::normf(&v).max(1e-9);
            probes.push(v.iter().map(|x| x / norm * 1.1).collect());
        }
        probes
    }

    /// The underlying piecewise linear value.
    pub fn pl(&self, u: &[f64]) -> f64 {
        self.fe.pl_max(&self.rays, u)
    }

    pub fn lipschitz(&self) -> f64 {
        self.fe.pl_lipschitz(&self.rays)
    }

    /// Splits the `y`-box along the kink planes of `y -> pl(u - eps*y)`.
    fn mesh(&self, u: &[f64]) -> MeshCells {
        let n = self.fe.rank();
        // the wall <w, x> = 0 becomes <w, y> = <w, u>/eps in the box
        let mut crossing: Vec<(Vec<f64>, f64)> = Vec::new();
        for w in &self.walls {
            let c = numeric::dotf(w, u) / self.eps;
            let reach: f64 = w.iter().map(|x| x.abs()).sum();
            if c.abs() < reach {
                crossing.push((w.clone(), c));
            }
        }
        if crossing.is_empty() {
            return MeshCells::Affine;
        }
        let crossing_axis = crossing
            .iter()
            .all(|(w, _)| w.iter().filter(|x| x.abs() > 1e-9).count() == 1);
        if crossing_axis {
            let mut breaks: Vec<Vec<f64>> = vec![vec![-1.0, 1.0]; n];
            for (w, c) in &crossing {
                let axis = w.iter().position(|x| x.abs() > 1e-9).unwrap();
                let t = c / w[axis];
                if t > -1.0 + 1e-12 && t < 1.0 - 1e-12 {
                    breaks[axis].push(t);
                }
            }
            for b in &mut breaks {
                b.sort_by(|a, c| a.partial_cmp(c).unwrap());
            }
            let mut boxes = vec![(vec![], vec![])];
            for b in &breaks {
                let mut next = Vec::new();
                for (lo, hi) in &boxes {
                    for s in b.windows(2) {
                        let mut nlo = lo.clone();
                        let mut nhi = hi.clone();
                        nlo.push(s[0]);
                        nhi.push(s[1]);
                        next.push((nlo, nhi));
                    }
                }
                boxes = next;
            }
            return MeshCells::Boxes(boxes);
        }
        match n {
            2 => {
                let square: Poly2 = vec![
                    vec![-1.0, -1.0],
                    vec![1.0, -1.0],
                    vec![1.0, 1.0],
                    vec![-1.0, 1.0],
                ];
                let mut polys = vec![square];
                for (w, c) in &crossing {
                    let mut next = Vec::new();
                    for p in &polys {
                        for keep in [true, false] {
                            let piece = clip_polygon(p, w, *c, keep);
                            if piece.len() >= 3 && polygon_area(&piece) > 1e-14 {
                                next.push(piece);
                            }
                        }
                    }
                    polys = next;
                }
                MeshCells::Polys(polys)
            }
            3 => {
                let mut tets = kuhn_tets();
                for (w, c) in &crossing {
                    let mut next = Vec::new();
                    for t in &tets {
                        for keep in [true, false] {
                            for piece in clip_tet(t, w, *c, keep) {
                                if tet_volume(&piece) > 1e-15 {
                                    next.push(piece);
                                }
                            }
                        }
                    }
                    tets = next;
                }
                MeshCells::Tets(tets)
            }
            _ => MeshCells::Whole,
        }
    }

    fn integrate(&self, u: &[f64], mesh: &MeshCells, order24: bool) -> f64 {
        let rule = if order24 {
            numeric::gl24()
        } else {
            numeric::gl16()
        };
        let n = self.fe.rank();
        let f = |y: &[f64]| {
            let x: Vec<f64> = (0..n).map(|k| u[k] - self.eps * y[k]).collect();
            self.pl(&x) * kernel(y)
        };
        let total = match mesh {
            MeshCells::Affine => return self.pl(u),
            MeshCells::Boxes(boxes) => {
                let mut acc = 0.0;
                for (lo, hi) in boxes {
                    acc += tensor_box(&f, lo, hi, rule);
                }
                acc
            }
            MeshCells::Polys(polys) => {
                let mut acc = 0.0;
                for p in polys {
                    for i in 1..p.len() - 1 {
                        acc += duffy_triangle(&f, &p[0], &p[i], &p[i + 1], rule);
                    }
                }
                acc
            }
            MeshCells::Tets(tets) => {
                let mut acc = 0.0;
                for t in tets {
                    acc += duffy_tet(&f, t, rule);
                }
                acc
            }
            MeshCells::Whole => {
                let lo = vec![-1.0; n];
                let hi = vec![1.0; n];
                tensor_box(&f, &lo, &hi, rule)
            }
        };
        total / kernel_mass(n)
    }

    /// Convolution value at `u` (16-point tensor rule on the decomposition).
    pub fn eval(&self, u: &[f64]) -> f64 {
        let mesh = self.mesh(u);
        self.integrate(u, &mesh, false)
    }

    /// Convolution value with the 24-point reference check.
    pub fn eval_checked(&self, u: &[f64]) -> Result<f64, SmoothError> {
        let mesh = self.mesh(u);
        let coarse = self.integrate(u, &mesh, false);
        let fine = self.integrate(u, &mesh, true);
        if (coarse - fine).abs() <= 1e-8 * fine.abs().max(1.0) {
            Ok(fine)
        } else {
            Err(SmoothError::QuadratureNotConverged)
        }
    }
}

/// Convolution of the base function with the radius-`eps` bump kernel,
/// evaluated at `u`, with the reference check.
pub fn mollify(m: &MollifiedFunction, u: &[f64]) -> Result<f64, SmoothError> {
    m.eval_checked(u)
}

fn tensor_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let n = lo.len();
    let order = rule.0.len();
    let mids: Vec<f64> = (0..n).map(|k| 0.5 * (lo[k] + hi[k])).collect();
    let halves: Vec<f64> = (0..n).map(|k| 0.5 * (hi[k] - lo[k])).collect();
    let scale: f64 = halves.iter().product();
    if scale == 0.0 {
        return 0.0;
    }
    let mut idx = vec![0usize; n];
    let mut acc = 0.0;
    let mut y = vec![0.0; n];
    loop {
        let mut w = scale;
        for k in 0..n {
            y[k] = mids[k] + halves[k] * rule.0[idx[k]];
            w *= rule.1[idx[k]];
        }
        acc += w * f(&y);
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] < order {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == n {
                return acc;
            }
        }
    }
}

fn duffy_triangle(
    f: &dyn Fn(&[f64]) -> f64,
    v0: &[f64],
    v1: &[f64],
    v2: &[f64],
    rule: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
    let e2 = [v2[0] - v1[0], v2[1] - v1[1]];
    let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    if det < 1e-16 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (xs, ws) in rule.0.iter().zip(&rule.1) {
        let s = 0.5 * (xs + 1.0);
        for (xt, wt) in rule.0.iter().zip(&rule.1) {
            let t = 0.5 * (xt + 1.0);
            let y = [
                v0[0] + s * (e1[0] + t * e2[0]),
                v0[1] + s * (e1[1] + t * e2[1]),
            ];
            acc += 0.25 * ws * wt * s * det * f(&y);
        }
    }
    acc
}

fn duffy_tet(f: &dyn Fn(&[f64]) -> f64, tet: &Tet, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let e1: Vec<f64> = (0..3).map(|k| tet[1][k] - tet[0][k]).collect();
    let e2: Vec<f64> = (0..3).map(|k| tet[2][k] - tet[1][k]).collect();
    let e3: Vec<f64> = (0..3).map(|k| tet[3][k] - tet[2][k]).collect();
    let det = (e1[0] * (e2[1] * e3[2] - e2[2] * e3[1])
        - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0])
        + e1[2] * (e2[0] * e3[1] - e2[1] * e3[0]))
        .abs();
    if det < 1e-16 {
        return 0.0;
    }
    let pts = &rule.0;
    let wts = &rule.1;
    let mut acc = 0.0;
    let mut y = [0.0; 3];
    for (xs, ws) in pts.iter().zip(wts) {
        let s = 0.5 * (xs + 1.0);
        for (xt, wt) in pts.iter().zip(wts) {
            let t = 0.5 * (xt + 1.0);
            for (xu, wu) in pts.iter().zip(wts) {
                let q = 0.5 * (xu + 1.0);
                for k in 0..3 {
                    y[k] = tet[0][k] + s * (e1[k] + t * (e2[k] + q * e3[k]));
                }
                acc += 0.125 * ws * wt * wu * s * s * t * det * f(&y);
            }
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// homogenisation

/// Degree-1 homogenisation of a mollified function: the value at `u` is
/// the scale `r` with `m(u/r) = 1`, so `u/r` sits on the smoothed level
/// set.
pub struct Homogenized<'a, 'b> {
    pub m: MollifiedFunction<'a, 'b>,
}

impl Homogenized<'_, '_> {
    /// Value at `u`; zero off the closed star, `NoBracket` when the level
    /// set is not crossed cleanly (mollification radius too large).
    pub fn value(&self, u: &[f64]) -> Result<f64, SmoothError> {
        let r0 = self.m.pl(u);
        if r0 <= 1e-12 {
            // off the star the smeared values must stay clearly below 1
            let norm = numeric::normf(u);
            if norm < 1e-12 {
                return Ok(0.0);
            }
            let peak = [0.5, 1.0, 2.0, 4.0]
                .iter()
                .map(|s| {
                    let z: Vec<f64> = u.iter().map(|x| x / norm * s * self.m.eps).collect();
                    self.m.eval(&z)
                })
                .fold(0.0, f64::max);
            return if peak < 0.25 {
                Ok(0.0)
            } else {
                Err(SmoothError::NoBracket)
            };
        }
        let g = |r: f64| {
            let z: Vec<f64> = u.iter().map(|x| x / r).collect();
            self.m.eval(&z) - 1.0
        };
        // secant from the piecewise linear value, which is exact far from
        // the walls and eps-close otherwise
        let mut a = r0;
        let mut fa = g(a);
        if fa.abs() <= 1e-12 {
            return Ok(a);
        }
        let mut b = r0 * (1.0 + 1e-4);
        let mut fb = g(b);
        for _ in 0..60 {
            if (fb - fa).abs() < 1e-300 {
                break;
            }
            let c = b - fb * (b - a) / (fb - fa);
            if !(c.is_finite() && c > 0.2 * r0 && c < 5.0 * r0) {
                break;
            }
            a = b;
            fa = fb;
            b = c;
            fb = g(b);
            if fb.abs() <= 1e-12 || (b - a).abs() <= 1e-12 * b {
                return Ok(b);
            }
        }
        // safeguarded fallback around the piecewise linear value
        let span = (self.m.lipschitz() * self.m.eps * 4.0 + 1e-6).min(0.75);
        let root = numeric::bisect(
            &mut |r| g(r),
            r0 * (1.0 - span),
            r0 * (1.0 + span),
            1e-12 * r0,
        )?;
        Ok(root)
    }

    /// The point `u/r` on the smoothed level set.
    pub fn level_point(&self, u: &[f64]) -> Result<Vec<f64>, SmoothError> {
        let r = self.value(u)?;
        if r <= 0.0 {
            return Err(SmoothError::NoBracket);
        }
        Ok(u.iter().map(|x| x / r).collect())
    }
}

/// Homogenised value of a mollified function at `u`.
pub fn homogenize(m: MollifiedFunction<'_, '_>, u: &[f64]) -> Result<f64, SmoothError> {
    Homogenized { m }.value(u)
}

// ---------------------------------------------------------------------------
// smooth defining functions

/// All smoothed defining functions of a labelled fan at one mollification
/// radius: one homogenised star max per ray, per summand block, and global.
pub struct SmoothedSystem<'a, 'b> {
    pub fe: &'b FanEvaluator<'a>,
    pub eps: f64,
    ray_fns: Vec<Homogenized<'a, 'b>>,
    block_fns: Vec<Homogenized<'a, 'b>>,
    all_fn: Homogenized<'a, 'b>,
}

impl<'a, 'b> SmoothedSystem<'a, 'b> {
    pub fn new(fe: &'b FanEvaluator<'a>, eps: f64) -> Result<SmoothedSystem<'a, 'b>, SmoothError> {
        let fan = fe.fan;
        let ray_fns = (0..fan.rays.len())
            .map(|rho| {
                Ok(Homogenized {
                    m: MollifiedFunction::new(fe, vec![rho], eps)?,
                })
            })
            .collect::<Result<Vec<_>, SmoothError>>()?;
        let block_fns = (0..fan.r())
            .map(|j| {
                let rays: Vec<usize> = (0..fan.rays.len())
                    .filter(|&i| fan.summand_of_ray[i] == j)
                    .collect();
                Ok(Homogenized {
                    m: MollifiedFunction::new(fe, rays, eps)?,
                })
            })
            .collect::<Result<Vec<_>, SmoothError>>()?;
        let all_fn = Homogenized {
            m: MollifiedFunction::new(fe, (0..fan.rays.len()).collect(), eps)?,
        };
        Ok(SmoothedSystem {
            fe,
            eps,
            ray_fns,
            block_fns,
            all_fn,
        })
    }

    pub fn ray_value(&self, rho: usize, u: &[f64]) -> Result<f64, SmoothError> {
        self.ray_fns[rho].value(u)
    }

    pub fn block_value(&self, j: usize, u: &[f64]) -> Result<f64, SmoothError> {
        self.block_fns[j].value(u)
    }

    /// The smoothed global gauge (homogenised mollified max over all rays).
    pub fn boundary_value(&self, u: &[f64]) -> Result<f64, SmoothError> {
        self.all_fn.value(u)
    }

    pub fn n_blocks(&self) -> usize {
        self.block_fns.len()
    }
}

/// Values, membership flags, and the block Jacobian at one point.
#[derive(Clone, Debug)]
pub struct SmoothedDefining {
    pub boundary_value: f64,
    pub block_values: Vec<f64>,
    /// `|boundary_value - 1| <= tol`; the global gauge differs from the
    /// block gauges by order `eps` where block maxima tie
    pub on_boundary: bool,
    /// every block value within `tol` of 1
    pub on_transversal: bool,
    /// directional derivatives of the block values along the per-block
    /// components of `u`
    pub jacobian: Vec<Vec<f64>>,
    pub jacobian_identity_gap: f64,
}

/// Evaluates the smoothed defining functions at `u`, with the block
/// Jacobian taken along the piecewise linear block decomposition of `u`.
pub fn smoothed_defining(
    sys: &SmoothedSystem,
    u: &[f64],
    tol: f64,
) -> Result<SmoothedDefining, SmoothError> {
    let r = sys.n_blocks();
    let n = sys.fe.rank();
    let boundary_value = sys.boundary_value(u)?;
    let mut block_values = Vec::with_capacity(r);
    for j in 0..r {
        block_values.push(sys.block_value(j, u)?);
    }
    // block components of u from the containing chart
    let mut parts = vec![vec![0.0; n]; r];
    if let Some((k, coords)) = sys.fe.chart_of(u) {
        let chart = &sys.fe.charts[k];
        for (pos, &id) in chart.ray_ids.iter().enumerate() {
            let j = sys.fe.fan.summand_of_ray[id];
            for t in 0..n {
                parts[j][t] += coords[pos].max(0.0) * chart.gens[pos][t];
            }
        }
    }
    let step = 1e-5;
    let mut jacobian = vec![vec![0.0; r]; r];
    let mut gap: f64 = 0.0;
    for k in 0..r {
        let dir = &parts[k];
        let moved = numeric::normf(dir) > 1e-9;
        for j in 0..r {
            let d = if moved {
                let up: Vec<f64> = (0..n).map(|t| u[t] + step * dir[t]).collect();
                let dn: Vec<f64> = (0..n).map(|t| u[t] - step * dir[t]).collect();
                (sys.block_value(j, &up)? - sys.block_value(j, &dn)?) / (2.0 * step)
            } else {
                0.0
            };
            jacobian[j][k] = d;
            let target = if j == k { 1.0 } else { 0.0 };
            gap = gap.max((d - target).abs());
        }
    }
    Ok(SmoothedDefining {
        on_boundary: (boundary_value - 1.0).abs() <= tol,
        on_transversal: block_values.iter().all(|v| (v - 1.0).abs() <= tol),
        boundary_value,
        block_values,
        jacobian,
        jacobian_identity_gap: gap,
    })
}

// ---------------------------------------------------------------------------
// coherent projections

/// Projection onto the relative interior of the cone spanned by `sigma`,
/// matching all homogenised ray values: the result `p = sum c_rho v_rho`
/// satisfies `h~^rho(p) = h~^rho(u)` for every ray of `sigma`.
pub fn coherent_projection(
    sys: &SmoothedSystem,
    sigma: &[usize],
    u: &[f64],
) -> Result<Vec<f64>, SmoothError> {
    assert!(!sigma.is_empty(), "projection needs at least one ray");
    let n = sys.fe.rank();
    let gens: Vec<Vec<f64>> = sigma
        .iter()
        .map(|&rho| zvec_f64(&sys.fe.fan.rays[rho]))
        .collect();
    // open-star precondition via the piecewise linear coordinates
    let scale = 1.0 + numeric::normf(u);
    let mut init = Vec::with_capacity(sigma.len());
    for &rho in sigma {
        let c = sys.fe.pl_ray(rho, u);
        if c <= CONE_TOL * scale {
            return Err(SmoothError::OutsideStar);
        }
        init.push(c);
    }
    let mut targets = Vec::with_capacity(sigma.len());
    for &rho in sigma {
        targets.push(sys.ray_value(rho, u)?);
    }
    let point = |c: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (ci, g) in c.iter().zip(&gens) {
            for t in 0..n {
                x[t] += ci * g[t];
            }
        }
        x
    };
    let residual = |c: &[f64]| -> Vec<f64> {
        let x = point(c);
        sigma
            .iter()
            .enumerate()
            .map(|(i, &rho)| match sys.ray_value(rho, &x) {
                Ok(v) => v - targets[i],
                Err(_) => f64::NAN,
            })
            .collect()
    };
    let sol = numeric::damped_newton_system(&residual, &init, 1e-10, 60)
        .map_err(|_| SmoothError::NewtonDiverged)?;
    if sol.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return Err(SmoothError::NewtonDiverged);
    }
    Ok(point(&sol))
}

// ---------------------------------------------------------------------------
// scaling fields and flows

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldMode {
    /// Piecewise linear per-ray fields, closed-form flow.
    PlTotal,
    /// Piecewise linear per-summand fields, closed-form flow.
    PlNef,
    /// Ramped smoothed per-ray fields, numerically integrated.
    SmoothedTotal,
    /// Ramped smoothed per-summand fields, numerically integrated.
    SmoothedNef,
}

/// The scaling action: per-ray (total) or per-summand (nef) flows, either
/// in piecewise linear closed form or with the ramp `r_eps` applied to the
/// homogenised star functions mollified at radius `delta`.
pub struct ScalingField<'a, 'b> {
    pub fe: &'b FanEvaluator<'a>,
    pub mode: FieldMode,
    pub ramp_eps: f64,
    pub delta: f64,
    pub max_steps: usize,
    pub ode_tol: f64,
    ray_fns: Vec<Homogenized<'a, 'b>>,
    ray_lip: Vec<f64>,
}

impl<'a, 'b> ScalingField<'a, 'b> {
    pub fn pl_total(fe: &'b FanEvaluator<'a>) -> ScalingField<'a, 'b> {
        ScalingField {
            fe,
            mode: FieldMode::PlTotal,
            ramp_eps: 0.0,
            delta: 0.0,
            max_steps: 200_000,
            ode_tol: 1e-9,
            ray_fns: Vec::new(),
            ray_lip: Vec::new(),
        }
    }

    pub fn pl_nef(fe: &'b FanEvaluator<'a>) -> ScalingField<'a, 'b> {
        ScalingField {
            mode: FieldMode::PlNef,
            ..ScalingField::pl_total(fe)
        }
    }

    pub fn smoothed(
        fe: &'b FanEvaluator<'a>,
        nef: bool,
        ramp_eps: f64,
        delta: f64,
    ) -> Result<ScalingField<'a, 'b>, SmoothError> {
        let ray_fns = (0..fe.fan.rays.len())
            .map(|rho| {
                Ok(Homogenized {
                    m: MollifiedFunction::new(fe, vec![rho], delta)?,
                })
            })
            .collect::<Result<Vec<_>, SmoothError>>()?;
        let ray_lip = (0..fe.fan.rays.len())
            .map(|rho| fe.pl_lipschitz(&[rho]))
            .collect();
        Ok(ScalingField {
            fe,
            mode: if nef {
                FieldMode::SmoothedNef
            } else {
                FieldMode::SmoothedTotal
            },
            ramp_eps,
            delta,
            max_steps: 200_000,
            ode_tol: 1e-9,
            ray_fns,
            ray_lip,
        })
    }

    /// Whether all rays of `sigma` are clear of the ramp's dead zone at `u`.
    pub fn in_frontier_star(&self, sigma: &[usize], u: &[f64]) -> bool {
        sigma.iter().all(|&rho| match self.mode {
            FieldMode::PlTotal | FieldMode::PlNef => self.fe.pl_ray(rho, u) > self.ramp_eps,
            _ => matches!(self.ray_fns[rho].value(u), Ok(v) if v > self.ramp_eps),
        })
    }

    fn smoothed_ray_field(&self, rho: usize, x: &[f64]) -> Vec<f64> {
        // off the closed star the smoothed value is at most lip * delta;
        // when that is inside the ramp's dead zone the field vanishes
        if self.fe.pl_ray(rho, x) <= 0.0 && self.ray_lip[rho] * self.delta <= self.ramp_eps {
            return vec![0.0; self.fe.rank()];
        }
        let h = self.ray_fns[rho].value(x).unwrap_or(0.0);
        let speed = numeric::smooth_ramp(self.ramp_eps, h);
        zvec_f64(&self.fe.fan.rays[rho])
            .into_iter()
            .map(|g| speed * g)
            .collect()
    }

    /// Closed-form piecewise linear flow: dual coordinates scale by
    /// `exp(t)` inside the containing chart.
    fn pl_flow(&self, u: &[f64], times: &[f64], per_block: bool) -> Vec<f64> {
        let n = self.fe.rank();
        match self.fe.chart_of(u) {
            Some((k, coords)) => {
                let chart = &self.fe.charts[k];
                let mut out = vec![0.0; n];
                for (pos, &id) in chart.ray_ids.iter().enumerate() {
                    let t = if per_block {
                        times[self.fe.fan.summand_of_ray[id]]
                    } else {
                        times[id]
                    };
                    let c = coords[pos].max(0.0) * t.exp();
                    for s in 0..n {
                        out[s] += c * chart.gens[pos][s];
                    }
                }
                out
            }
            None => u.to_vec(),
        }
    }

    /// Applies the action with the given times: one per ray in total mode,
    /// one per summand in nef mode. Smoothed modes compose the per-ray
    /// flows in ray order.
    pub fn flow(&self, u: &[f64], times: &[f64]) -> Result<Vec<f64>, SmoothError> {
        let n_rays = self.fe.fan.rays.len();
        match self.mode {
            FieldMode::PlTotal => {
                assert_eq!(times.len(), n_rays);
                Ok(self.pl_flow(u, times, false))
            }
            FieldMode::PlNef => {
                assert_eq!(times.len(), self.fe.fan.r());
                Ok(self.pl_flow(u, times, true))
            }
            FieldMode::SmoothedTotal => {
                assert_eq!(times.len(), n_rays);
                let mut x = u.to_vec();
                for (rho, &t) in times.iter().enumerate() {
                    if t != 0.0 {
                        x = self.flow_single(rho, &x, t)?;
                    }
                }
                Ok(x)
            }
            FieldMode::SmoothedNef => {
                assert_eq!(times.len(), self.fe.fan.r());
                let mut x = u.to_vec();
                for (j, &t) in times.iter().enumerate() {
                    if t != 0.0 {
                        let field = |y: &[f64]| {
                            let mut v = vec![0.0; self.fe.rank()];
                            for rho in 0..n_rays {
                                if self.fe.fan.summand_of_ray[rho] == j {
                                    let w = self.smoothed_ray_field(rho, y);
                                    for s in 0..v.len() {
                                        v[s] += w[s];
                                    }
                                }
                            }
                            v
                        };
                        x = numeric::rk4_flow(&field, &x, t, self.ode_tol, self.max_steps)?;
                    }
                }
                Ok(x)
            }
        }
    }

    /// Flow along the single smoothed ray field for time `t`.
    pub fn flow_single(&self, rho: usize, u: &[f64], t: f64) -> Result<Vec<f64>, SmoothError> {
        let field = |y: &[f64]| self.smoothed_ray_field(rho, y);
        Ok(numeric::rk4_flow(&field, u, t, self.ode_tol, self.max_steps)?)
    }
}

// ---------------------------------------------------------------------------
// diagnostics

/// Fitted constants and worst deviations from one diagnostics run.
#[derive(Clone, Debug)]
pub struct SmoothingReport {
    /// Per mollification radius: the fitted constant `max |D - 1| / eps`
    /// over the level-set samples, `D` the radial derivative.
    pub radial_constants: Vec<(f64, f64)>,
    /// Largest ratio between fitted constants across the grid.
    pub radial_ratio: f64,
    pub commutator_max: f64,
    pub slice_max: f64,
}

/// Level-set sample directions for one ray: crease offsets proportional to
/// `eps`, so the kernel box sees the same local picture at every radius
/// and the fitted constants are comparable across the grid.
fn radial_samples(fe: &FanEvaluator, rho: usize, eps: f64) -> Vec<Vec<f64>> {
    let n = fe.rank();
    let mut out = Vec::new();
    for chart in &fe.charts {
        let Some(pos) = chart.ray_ids.iter().position(|&i| i == rho) else {
            continue;
        };
        let others: Vec<usize> = (0..chart.ray_ids.len()).filter(|&p| p != pos).collect();
        for bits in 1..(1u32 << others.len()) {
            for kappa in [0.3, 1.0] {
                let mut z: Vec<f64> = chart.gens[pos].clone();
                for (bi, &p) in others.iter().enumerate() {
                    let c = if bits & (1 << bi) != 0 {
                        kappa * eps
                    } else {
                        0.5
                    };
                    for t in 0..n {
                        z[t] += c * chart.gens[p][t];
                    }
                }
                out.push(z);
            }
        }
        if others.is_empty() {
            out.push(chart.gens[pos].clone());
        }
    }
    out
}

/// Runs the three smoothing diagnostics on a fan:
/// (a) radial derivatives on the smoothed level sets stay `C*eps`-close to
///     1 with `C` stable across the `eps` grid (ratio at most 2);
/// (b) composed per-ray smoothed flows commute to `1e-6`;
/// (c) flowing to a fixed level lands at the same point from anywhere on
///     an orbit, to `1e-7`.
pub fn smoothing_diagnostics(
    fe: &FanEvaluator,
    eps_grid: &[f64],
    ramp_eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<SmoothingReport, SmoothError> {
    // (a) stability of the radial-derivative constant
    let mut radial_constants = Vec::new();
    for &eps in eps_grid {
        let mut worst: f64 = 0.0;
        for rho in 0..fe.fan.rays.len() {
            let h = Homogenized {
                m: MollifiedFunction::new(fe, vec![rho], eps)?,
            };
            for z in radial_samples(fe, rho, eps) {
                let p = h.level_point(&z)?;
                let step = 1e-5;
                let up: Vec<f64> = p.iter().map(|x| x * (1.0 + step)).collect();
                let dn: Vec<f64> = p.iter().map(|x| x * (1.0 - step)).collect();
                let d = (h.m.eval(&up) - h.m.eval(&dn)) / (2.0 * step);
                worst = worst.max((d - 1.0).abs());
            }
        }
        radial_constants.push((eps, worst / eps));
    }
    // a globally affine star function has no radial defect at all; only a
    // genuine signal is held to the stability requirement
    let negligible = radial_constants.iter().all(|(e, c)| c * e <= 1e-7);
    let cs: Vec<f64> = radial_constants.iter().map(|(_, c)| *c).collect();
    let cmax = cs.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = cs.iter().cloned().fold(f64::MAX, f64::min);
    let radial_ratio = if negligible {
        1.0
    } else if cmin > 1e-12 {
        cmax / cmin
    } else {
        f64::INFINITY
    };
    if radial_ratio > 2.0 {
        return Err(SmoothError::DiagnosticFailed(format!(
            "radial-derivative constant unstable across the eps grid: {radial_constants:?}"
        )));
    }

    // (b) commutators of composed per-ray flows
    let field = ScalingField::smoothed(fe, false, ramp_eps, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for _ in 0..samples {
        let k = rng.gen_range(0..fe.charts.len());
        let chart = &fe.charts[k];
        let m = chart.ray_ids.len();
        if m < 2 {
            continue;
        }
        let a = rng.gen_range(0..m);
        let mut b = rng.gen_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        let coords: Vec<f64> = (0..m).map(|_| rng.gen_range(0.3..1.6)).collect();
        let mut u = vec![0.0; fe.rank()];
        for (pos, c) in coords.iter().enumerate() {
            for t in 0..fe.rank() {
                u[t] += c * chart.gens[pos][t];
            }
        }
        let t = rng.gen_range(-1.0..1.0);
        let s = rng.gen_range(-1.0..1.0);
        cases.push((chart.ray_ids[a], chart.ray_ids[b], u, t, s));
    }
    let devs = par::map_items(mode, cases, |(ra, rb, u, t, s)| {
        let ab = field
            .flow_single(ra, &u, t)
            .and_then(|x| field.flow_single(rb, &x, s));
        let ba = field
            .flow_single(rb, &u, s)
            .and_then(|x| field.flow_single(ra, &x, t));
        match (ab, ba) {
            (Ok(p), Ok(q)) => {
                let d: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x - y).collect();
                Ok(numeric::normf(&d))
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    });
    let mut commutator_max: f64 = 0.0;
    for d in devs {
        commutator_max = commutator_max.max(d?);
    }
    if commutator_max > 1e-6 {
        return Err(SmoothError::DiagnosticFailed(format!(
            "flow commutator {commutator_max:.2e} exceeds 1e-6"
        )));
    }

    // (c) slices: flowing to a level is independent of the starting point
    // on the orbit
    let mut slice_max: f64 = 0.0;
    for rho in 0..fe.fan.rays.len().min(4) {
        let Some(chart_k) = (0..fe.charts.len()).find(|&k| fe.charts[k].ray_ids.contains(&rho))
        else {
            continue;
        };
        let chart = &fe.charts[chart_k];
        let mut u = vec![0.0; fe.rank()];
        for g in &chart.gens {
            for t in 0..fe.rank() {
                u[t] += 0.8 * g[t];
            }
        }
        let shifted = field.flow_single(rho, &u, 0.4)?;
        let land = |start: &[f64]| -> Result<Vec<f64>, SmoothError> {
            let mut gfun = |tau: f64| {
                let x = field
                    .flow_single(rho, start, tau)
                    .unwrap_or_else(|_| start.to_vec());
                field.ray_fns[rho].value(&x).unwrap_or(f64::NAN) - 1.0
            };
            let tau = numeric::bisect(&mut gfun, -3.0, 3.0, 1e-11)?;
            field.flow_single(rho, start, tau)
        };
        let p = land(&u)?;
        let q = land(&shifted)?;
        let d: Vec<f64> = p.iter().zip(&q).map(|(x, y)| x - y).collect();
        slice_max = slice_max.max(numeric::normf(&d));
    }
    if slice_max > 1e-7 {
        return Err(SmoothError::DiagnosticFailed(format!(
            "level-set landing differs along an orbit by {slice_max:.2e}"
        )));
    }

    Ok(SmoothingReport {
        radial_constants,
        radial_ratio,
        commutator_max,
        slice_max,
    })
}
