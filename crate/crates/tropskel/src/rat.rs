//! Exact rational scalars, vectors and matrices, plus the integer-lattice
//! routines (Hermite form, saturated kernels, unimodular completions) the
//! polyhedral layer is built on.
//!
//! Everything here is deterministic: no pivoting heuristics depend on hash
//! order, and all bases come out of a fixed elimination order.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::str::FromStr;
use thiserror::Error;

pub type Rat = BigRational;
pub type QVec = Vec<Rat>;
pub type ZVec = Vec<BigInt>;

#[derive(Debug, Error)]
pub enum RatError {
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `p/q` or `-p/q` with arbitrary-precision integers.
pub fn parse_rat(s: &str) -> Result<Rat, RatError> {
    let t = s.trim();
    if t.is_empty() {
        return Err(RatError::Parse(s.to_string()));
    }
    match t.split_once('/') {
        None => BigInt::from_str(t)
            .map(Rat::from_integer)
            .map_err(|_| RatError::Parse(s.to_string())),
        Some((p, q)) => {
            let num = BigInt::from_str(p.trim()).map_err(|_| RatError::Parse(s.to_string()))?;
            let den = BigInt::from_str(q.trim()).map_err(|_| RatError::Parse(s.to_string()))?;
            if den.is_zero() {
                return Err(RatError::ZeroDenominator(s.to_string()));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Formats as `p` when the denominator is 1 and `p/q` otherwise.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let digits = 18u32;
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (r * Rat::from_integer(scale.clone())).round();
    let mut approx = 0.0f64;
    let mut rest = scaled.numer().clone();
    // peel off 15 decimal digits at a time so the conversion never saturates
    let chunk = BigInt::from(10u64.pow(15));
    let mut place = 1.0f64;
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(&chunk);
        let part: f64 = r.to_string().parse().unwrap_or(0.0);
        approx += part * place;
        place *= 1e15;
        rest = q;
    }
    approx / 1e18
}

pub fn qvec(entries: &[i64]) -> QVec {
    entries.iter().map(|&x| rat(x)).collect()
}

pub fn zvec(entries: &[i64]) -> ZVec {
    entries.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn qvec_from_z(v: &[BigInt]) -> QVec {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    let mut acc = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn vadd(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Rat], b: &[Rat]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(c: &Rat, a: &[Rat]) -> QVec {
    a.iter().map(|x| c * x).collect()
}

pub fn vneg(a: &[Rat]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Total lexicographic order on rational vectors.
pub fn cmp_qvec(a: &[Rat], b: &[Rat]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

pub fn cmp_zvec(a: &[BigInt], b: &[BigInt]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

/// Clears denominators and divides by the content, preserving direction.
/// Returns the zero vector unchanged.
pub fn primitivize(v: &[Rat]) -> ZVec {
    if is_zero_vec(v) {
        return v.iter().map(|_| BigInt::zero()).collect();
    }
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    ints.into_iter().map(|x| x / &g).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<QVec>,
}

impl QMat {
    pub fn from_rows(rows: Vec<QVec>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            assert_eq!(r.len(), ncols, "ragged matrix");
        }
        QMat { nrows, ncols, rows }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| qvec(r)).collect())
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        QMat {
            nrows,
            ncols,
            rows: vec![vec![Rat::zero(); ncols]; nrows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i][i] = Rat::one();
        }
        m
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t.rows[j][i] = self.rows[i][j].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.ncols, other.nrows, "mul: shape mismatch");
        let mut out = QMat::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                if self.rows[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.ncols {
                    let term = &self.rows[i][k] * &other.rows[k][j];
                    out.rows[i][j] += term;
                }
            }
        }
        out
    }

    /// A x for a column vector x.
    pub fn mul_vec(&self, x: &[Rat]) -> QVec {
        assert_eq!(self.ncols, x.len(), "mul_vec: shape mismatch");
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.ncols {
            let Some(p) = (row..m.nrows).find(|&i| !m.rows[i][col].is_zero()) else {
                continue;
            };
            m.rows.swap(row, p);
            let inv = m.rows[row][col].recip();
            for j in col..m.ncols {
                m.rows[row][j] = &m.rows[row][j] * &inv;
            }
            for i in 0..m.nrows {
                if i != row && !m.rows[i][col].is_zero() {
                    let factor = m.rows[i][col].clone();
                    for j in col..m.ncols {
                        let sub = &factor * &m.rows[row][j];
                        m.rows[i][j] -= sub;
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == m.nrows {
                break;
            }
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// One solution of `A x = b`, with free variables set to zero.
    pub fn solve(&self, b: &[Rat]) -> Option<QVec> {
        assert_eq!(self.nrows, b.len(), "solve: shape mismatch");
        let mut aug = self.clone();
        aug.ncols += 1;
        for (r, bi) in aug.rows.iter_mut().zip(b) {
            r.push(bi.clone());
        }
        let (red, pivots) = aug.rref();
        if pivots.contains(&self.ncols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.ncols];
        for (i, &col) in pivots.iter().enumerate() {
            x[col] = red.rows[i][self.ncols].clone();
        }
        Some(x)
    }

    /// Basis of `{x : A x = 0}`, one vector per free column, in column order.
    pub fn kernel(&self) -> Vec<QVec> {
        let (red, pivots) = self.rref();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Rat::zero(); self.ncols];
            v[f] = Rat::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -red.rows[i][f].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.nrows, self.ncols, "det: not square");
        let mut m = self.clone();
        let mut det = Rat::one();
        for col in 0..m.ncols {
            let Some(p) = (col..m.nrows).find(|&i| !m.rows[i][col].is_zero()) else {
                return Rat::zero();
            };
            if p != col {
                m.rows.swap(col, p);
                det = -det;
            }
            det *= m.rows[col][col].clone();
            let inv = m.rows[col][col].recip();
            for i in (col + 1)..m.nrows {
                if m.rows[i][col].is_zero() {
                    continue;
                }
                let factor = &m.rows[i][col] * &inv;
                for j in col..m.ncols {
                    let sub = &factor * &m.rows[col][j];
                    m.rows[i][j] -= sub;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.nrows, self.ncols, "inverse: not square");
        let n = self.nrows;
        let mut aug = self.clone();
        aug.ncols = 2 * n;
        for (i, r) in aug.rows.iter_mut().enumerate() {
            for j in 0..n {
                r.push(if i == j { Rat::one() } else { Rat::zero() });
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
            return None;
        }
        Some(QMat::from_rows(
            red.rows.iter().map(|r| r[n..].to_vec()).collect(),
        ))
    }

    /// Minimum-norm solution of `A x = b` for a matrix with independent rows:
    /// x = Aᵀ (A Aᵀ)⁻¹ b. Returns None when the rows are dependent.
    pub fn least_norm_solve(&self, b: &[Rat]) -> Option<QVec> {
        let at = self.transpose();
        let gram = self.mul(&at);
        let y = gram.inverse()?.mul_vec(b);
        Some(at.mul_vec(&y))
    }
}

/// Row-style Hermite normal form `U A = H` with `U` unimodular.
/// Pivots are positive, entries above a pivot are reduced into `[0, pivot)`,
/// zero rows sink to the bottom.
pub fn hnf_with_transform(a: &[ZVec]) -> (Vec<ZVec>, Vec<ZVec>) {
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut h: Vec<ZVec> = a.to_vec();
    let mut u: Vec<ZVec> = (0..nrows)
        .map(|i| {
            (0..nrows)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut row = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..ncols {
        loop {
            // smallest nonzero magnitude in this column at or below `row`
            let mut best: Option<usize> = None;
            for i in row..nrows {
                if h[i][col].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(i),
                    Some(b) => {
                        if h[i][col].abs() < h[b][col].abs() {
                            best = Some(i);
                        }
                    }
                }
            }
            let Some(b) = best else { break };
            h.swap(row, b);
            u.swap(row, b);
            let mut done = true;
            for i in (row + 1)..nrows {
                if h[i][col].is_zero() {
                    continue;
                }
                let q = div_round(&h[i][col], &h[row][col]);
                if !q.is_zero() {
                    for j in 0..ncols {
                        let sub = &q * &h[row][j];
                        h[i][j] -= sub;
                    }
                    for j in 0..nrows {
                        let sub = &q * &u[row][j];
                        u[i][j] -= sub;
                    }
                }
                if !h[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if row < nrows && !h[row][col].is_zero() {
            if h[row][col].is_negative() {
                for j in 0..ncols {
                    h[row][j] = -h[row][j].clone();
                }
                for j in 0..nrows {
                    u[row][j] = -u[row][j].clone();
                }
            }
            pivot_cols.push((row, col));
            row += 1;
            if row == nrows {
                break;
            }
        }
    }
    // reduce entries above each pivot
    for &(prow, pcol) in &pivot_cols {
        for i in 0..prow {
            let q = h[i][pcol].div_floor(&h[prow][pcol]);
            if !q.is_zero() {
                for j in 0..ncols {
                    let sub = &q * &h[prow][j];
                    h[i][j] -= sub;
                }
                for j in 0..nrows {
                    let sub = &q * &u[prow][j];
                    u[i][j] -= sub;
                }
            }
        }
    }
    (h, u)
}

fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    // quotient rounding toward the nearest integer keeps entries small
    let (q, r) = a.div_rem(b);
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.is_negative()) != (b.is_negative()) {
            q - 1
        } else {
            q + 1
        }
    } else {
        q
    }
}

/// Basis of the integer right kernel `{x in Z^n : A x = 0}`.
/// The result is a saturated sublattice basis by construction.
pub fn integer_kernel(a: &[ZVec]) -> Vec<ZVec> {
    let ncols = a.first().map_or(0, |r| r.len());
    if a.is_empty() {
        return (0..ncols)
            .map(|i| {
                (0..ncols)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
    }
    let at: Vec<ZVec> = (0..ncols)
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect();
    let (h, u) = hnf_with_transform(&at);
    h.iter()
        .zip(&u)
        .filter(|(hr, _)| hr.iter().all(|x| x.is_zero()))
        .map(|(_, ur)| ur.clone())
        .collect()
}

/// For integer rows `m` spanning a subspace `V`, returns
/// `(basis, completion)`: an integer basis of the saturated lattice
/// `V ∩ Z^n` and additional rows completing it to a basis of `Z^n`.
pub fn saturation_with_completion(m: &[ZVec]) -> (Vec<ZVec>, Vec<ZVec>) {
    let ncols = m.first().map_or(0, |r| r.len());
    let qm = QMat::from_rows(m.iter().map(|r| qvec_from_z(r)).collect());
    let ker = qm.kernel();
    let k: Vec<ZVec> = ker.iter().map(|v| primitivize(v)).collect();
    if k.is_empty() {
        // full-dimensional span: the saturation is all of Z^n
        let id: Vec<ZVec> = (0..ncols)
            .map(|i| {
                (0..ncols)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        return (id, Vec::new());
    }
    let kt: Vec<ZVec> = (0..ncols)
        .map(|j| k.iter().map(|r| r[j].clone()).collect())
        .collect();
    let (h, u) = hnf_with_transform(&kt);
    let mut basis = Vec::new();
    let mut completion = Vec::new();
    for (hr, ur) in h.iter().zip(&u) {
        if hr.iter().all(|x| x.is_zero()) {
            basis.push(ur.clone());
        } else {
            completion.push(ur.clone());
        }
    }
    (basis, completion)
}

/// gcd of all maximal minors of an integer matrix with `nrows <= ncols`.
/// Equals 1 exactly when the rows extend to a lattice basis.
pub fn maximal_minor_gcd(m: &[ZVec]) -> BigInt {
    use itertools::Itertools;
    let d = m.len();
    let n = m.first().map_or(0, |r| r.len());
    assert!(d <= n, "maximal_minor_gcd: more rows than columns");
    let mut g = BigInt::zero();
    for cols in (0..n).combinations(d) {
        let sub = QMat::from_rows(
            m.iter()
                .map(|r| cols.iter().map(|&c| Rat::from_integer(r[c].clone())).collect())
                .collect(),
        );
        let det = sub.det();
        debug_assert!(det.denom().is_one());
        g = g.gcd(det.numer());
        if g.is_one() {
            return g;
        }
    }
    g
}
