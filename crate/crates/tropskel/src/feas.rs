//! Exact feasibility of mixed strict/weak linear systems over the rationals,
//! by Gaussian elimination of the equations followed by Fourier–Motzkin
//! elimination of the inequalities.
//!
//! Sized for desk-scale polyhedral checks (a few dozen constraints in
//! dimension at most six or so); rows are normalised and deduplicated after
//! every elimination round to keep the blow-up down.

use crate::rat::{cmp_qvec, dot, primitivize, qvec_from_z, QVec, Rat};
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// A single constraint `coeffs · x  (<= | <)  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinIneq {
    pub coeffs: QVec,
    pub rhs: Rat,
    pub strict: bool,
}

#[derive(Clone, Debug, Default)]
pub struct LinSystem {
    pub dim: usize,
    pub ineqs: Vec<LinIneq>,
    pub eqs: Vec<(QVec, Rat)>,
}

impl LinSystem {
    pub fn new(dim: usize) -> Self {
        LinSystem {
            dim,
            ineqs: Vec::new(),
            eqs: Vec::new(),
        }
    }

    /// coeffs · x <= rhs
    pub fn le(&mut self, coeffs: QVec, rhs: Rat) -> &mut Self {
        assert_eq!(coeffs.len(), self.dim);
        self.ineqs.push(LinIneq {
            coeffs,
            rhs,
            strict: false,
        });
        self
    }

    /// coeffs · x < rhs
    pub fn lt(&mut self, coeffs: QVec, rhs: Rat) -> &mut Self {
        assert_eq!(coeffs.len(), self.dim);
        self.ineqs.push(LinIneq {
            coeffs,
            rhs,
            strict: true,
        });
        self
    }

    /// coeffs · x = rhs
    pub fn eq(&mut self, coeffs: QVec, rhs: Rat) -> &mut Self {
        assert_eq!(coeffs.len(), self.dim);
        self.eqs.push((coeffs, rhs));
        self
    }

    pub fn is_feasible(&self) -> bool {
        // substitute equations away first
        let Some((rows, dim)) = self.eliminate_equations() else {
            return false;
        };
        fm_feasible(rows, dim)
    }

    /// Gauss-eliminates the equations, rewriting the inequalities over the
    /// free variables. Returns None when the equations are inconsistent.
    fn eliminate_equations(&self) -> Option<(Vec<LinIneq>, usize)> {
        if self.eqs.is_empty() {
            return Some((self.ineqs.clone(), self.dim));
        }
        let aug = crate::rat::QMat::from_rows(
            self.eqs
                .iter()
                .map(|(c, r)| {
                    let mut row = c.clone();
                    row.push(r.clone());
                    row
                })
                .collect(),
        );
        let (red, pivots) = aug.rref();
        if pivots.contains(&self.dim) {
            return None;
        }
        let free: Vec<usize> = (0..self.dim).filter(|c| !pivots.contains(c)).collect();
        // x_pivot = rhs_row - sum_{f free} coef * x_f
        let mut out = Vec::with_capacity(self.ineqs.len());
        for iq in &self.ineqs {
            let mut coeffs: QVec = free.iter().map(|&f| iq.coeffs[f].clone()).collect();
            let mut rhs = iq.rhs.clone();
            for (i, &p) in pivots.iter().enumerate() {
                if iq.coeffs[p].is_zero() {
                    continue;
                }
                let c = &iq.coeffs[p];
                rhs -= c * &red.rows[i][self.dim];
                for (k, &f) in free.iter().enumerate() {
                    let term = c * &red.rows[i][f];
                    coeffs[k] -= term;
                }
            }
            out.push(LinIneq {
                coeffs,
                rhs,
                strict: iq.strict,
            });
        }
        Some((out, free.len()))
    }
}

fn fm_feasible(mut rows: Vec<LinIneq>, mut dim: usize) -> bool {
    loop {
        match normalize(&mut rows) {
            RowStatus::Contradiction => return false,
            RowStatus::Ok => {}
        }
        if dim == 0 || rows.is_empty() {
            return true;
        }
        // eliminate the variable minimising the pair count
        let var = (0..dim)
            .min_by_key(|&v| {
                let pos = rows.iter().filter(|r| r.coeffs[v].is_positive()).count();
                let neg = rows.iter().filter(|r| r.coeffs[v].is_negative()).count();
                (pos * neg, v)
            })
            .unwrap();
        let mut upper = Vec::new(); // coeff > 0: bounds x_var above
        let mut lower = Vec::new();
        let mut rest = Vec::new();
        for r in rows {
            match r.coeffs[var].cmp(&Rat::zero()) {
                Ordering::Greater => upper.push(r),
                Ordering::Less => lower.push(r),
                Ordering::Equal => rest.push(drop_var(r, var)),
            }
        }
        for up in &upper {
            for lo in &lower {
                // cu > 0, cl < 0: combine (-cl)*up + cu*lo to cancel x_var
                let cu = up.coeffs[var].clone();
                let cl = lo.coeffs[var].clone();
                let mut coeffs = Vec::with_capacity(dim - 1);
                for j in 0..dim {
                    if j == var {
                        continue;
                    }
                    coeffs.push(&(-&cl) * &up.coeffs[j] + &cu * &lo.coeffs[j]);
                }
                let rhs = &(-&cl) * &up.rhs + &cu * &lo.rhs;
                rest.push(LinIneq {
                    coeffs,
                    rhs,
                    strict: up.strict || lo.strict,
                });
            }
        }
        rows = rest;
        dim -= 1;
    }
}

fn drop_var(r: LinIneq, var: usize) -> LinIneq {
    let mut coeffs = r.coeffs;
    coeffs.remove(var);
    LinIneq {
        coeffs,
        rhs: r.rhs,
        strict: r.strict,
    }
}

enum RowStatus {
    Ok,
    Contradiction,
}

/// Scales each row to primitive integer form, removes tautologies and
/// duplicates, detects `0 <(=) negative` contradictions.
fn normalize(rows: &mut Vec<LinIneq>) -> RowStatus {
    let mut seen: Vec<(QVec, Rat, bool)> = Vec::new();
    for r in rows.drain(..) {
        if r.coeffs.iter().all(|c| c.is_zero()) {
            let bad = if r.strict {
                !r.rhs.is_positive()
            } else {
                r.rhs.is_negative()
            };
            if bad {
                return RowStatus::Contradiction;
            }
            continue;
        }
        let mut full = r.coeffs.clone();
        full.push(r.rhs.clone());
        let prim = qvec_from_z(&primitivize(&full));
        let (coeffs, rhs) = (prim[..prim.len() - 1].to_vec(), prim[prim.len() - 1].clone());
        if let Some(existing) = seen
            .iter_mut()
            .find(|(c, b, _)| cmp_qvec(c, &coeffs) == Ordering::Equal && *b == rhs)
        {
            existing.2 |= r.strict; // strict subsumes weak on the same hyperplane
        } else {
            seen.push((coeffs, rhs, r.strict));
        }
    }
    *rows = seen
        .into_iter()
        .map(|(coeffs, rhs, strict)| LinIneq {
            coeffs,
            rhs,
            strict,
        })
        .collect();
    RowStatus::Ok
}

/// Convenience: whether `point` satisfies the system exactly.
pub fn satisfies(sys: &LinSystem, point: &[Rat]) -> bool {
    sys.eqs.iter().all(|(c, r)| dot(c, point) == *r)
        && sys.ineqs.iter().all(|iq| {
            let v = dot(&iq.coeffs, point);
            if iq.strict {
                v < iq.rhs
            } else {
                v <= iq.rhs
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{qvec, rat};

    #[test]
    fn square_is_feasible_point_outside_is_not() {
        let mut sys = LinSystem::new(2);
        sys.le(qvec(&[1, 0]), rat(1))
            .le(qvec(&[-1, 0]), rat(1))
            .le(qvec(&[0, 1]), rat(1))
            .le(qvec(&[0, -1]), rat(1));
        assert!(sys.is_feasible());
        sys.le(qvec(&[1, 0]), rat(-2));
        assert!(!sys.is_feasible());
    }

    #[test]
    fn strict_inequalities_shrink_to_empty() {
        // x >= 0 and x < 0
        let mut sys = LinSystem::new(1);
        sys.le(qvec(&[-1]), rat(0)).lt(qvec(&[1]), rat(0));
        assert!(!sys.is_feasible());
        // x > 0 and x < 1 is fine
        let mut sys2 = LinSystem::new(1);
        sys2.lt(qvec(&[-1]), rat(0)).lt(qvec(&[1]), rat(1));
        assert!(sys2.is_feasible());
    }

    #[test]
    fn open_interval_between_touching_halfplanes_is_empty() {
        // x + y < 1 and x + y > 1
        let mut sys = LinSystem::new(2);
        sys.lt(qvec(&[1, 1]), rat(1)).lt(qvec(&[-1, -1]), rat(-1));
        assert!(!sys.is_feasible());
        // weak versions meet in a line
        let mut sys2 = LinSystem::new(2);
        sys2.le(qvec(&[1, 1]), rat(1)).le(qvec(&[-1, -1]), rat(-1));
        assert!(sys2.is_feasible());
    }

    #[test]
    fn equations_substitute_into_inequalities() {
        // x = 3 on the segment x <= 2 is infeasible
        let mut sys = LinSystem::new(2);
        sys.eq(qvec(&[1, 0]), rat(3)).le(qvec(&[1, 0]), rat(2));
        assert!(!sys.is_feasible());
        // consistent equation plus box
        let mut sys2 = LinSystem::new(2);
        sys2.eq(qvec(&[1, 1]), rat(1))
            .le(qvec(&[1, 0]), rat(1))
            .le(qvec(&[-1, 0]), rat(0))
            .le(qvec(&[0, 1]), rat(1))
            .le(qvec(&[0, -1]), rat(0));
        assert!(sys2.is_feasible());
        // inconsistent equations
        let mut sys3 = LinSystem::new(2);
        sys3.eq(qvec(&[1, 1]), rat(1)).eq(qvec(&[2, 2]), rat(3));
        assert!(!sys3.is_feasible());
    }

    #[test]
    fn zero_dimensional_systems() {
        let sys = LinSystem::new(0);
        assert!(sys.is_feasible());
        let mut bad = LinSystem::new(0);
        bad.ineqs.push(LinIneq {
            coeffs: vec![],
            rhs: rat(-1),
            strict: false,
        });
        assert!(!bad.is_feasible());
    }

    #[test]
    fn satisfies_checks_strictness() {
        let mut sys = LinSystem::new(1);
        sys.lt(qvec(&[1]), rat(1));
        assert!(satisfies(&sys, &qvec(&[0])));
        assert!(!satisfies(&sys, &qvec(&[1])));
    }
}
