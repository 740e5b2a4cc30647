//! Rational polyhedral cones given by generators, with halfspace
//! descriptions derived from the convex hull of {0} ∪ generators.

use crate::feas::LinSystem;
use crate::geom::polytope::convex_hull;
use crate::rat::{
    cmp_zvec, dot, maximal_minor_gcd, primitivize, qvec_from_z, rat, QMat, QVec, Rat, ZVec,
};
use num_traits::{One, Signed, Zero};
use std::sync::OnceLock;

/// Halfspace description: `span_eqs · x = 0` and `ineqs · x <= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeHrep {
    pub span_eqs: Vec<ZVec>,
    pub ineqs: Vec<ZVec>,
}

#[derive(Clone, Debug)]
pub struct Cone {
    pub rank: usize,
    /// Primitive generators, sorted and deduplicated. May be empty (the
    /// origin cone).
    pub rays: Vec<ZVec>,
    hrep: OnceLock<ConeHrep>,
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.rays == other.rays
    }
}
impl Eq for Cone {}

impl Cone {
    pub fn from_rays(rank: usize, rays: &[ZVec]) -> Cone {
        let mut rs: Vec<ZVec> = rays
            .iter()
            .filter(|r| !r.iter().all(|x| x.is_zero()))
            .map(|r| primitivize(&qvec_from_z(r)))
            .collect();
        rs.sort_by(|a, b| cmp_zvec(a, b));
        rs.dedup();
        Cone {
            rank,
            rays: rs,
            hrep: OnceLock::new(),
        }
    }

    pub fn from_qvec_rays(rank: usize, rays: &[QVec]) -> Cone {
        let zr: Vec<ZVec> = rays.iter().map(|r| primitivize(r)).collect();
        Cone::from_rays(rank, &zr)
    }

    pub fn origin(rank: usize) -> Cone {
        Cone::from_rays(rank, &[])
    }

    pub fn dim(&self) -> usize {
        if self.rays.is_empty() {
            return 0;
        }
        QMat::from_rows(self.rays.iter().map(|r| qvec_from_z(r)).collect()).rank()
    }

    pub fn hrep(&self) -> &ConeHrep {
        self.hrep.get_or_init(|| {
            if self.rays.is_empty() {
                // the origin: x = 0
                let eye: Vec<ZVec> = (0..self.rank)
                    .map(|i| {
                        (0..self.rank)
                            .map(|j| {
                                if i == j {
                                    num_bigint::BigInt::one()
                                } else {
                                    num_bigint::BigInt::zero()
                                }
                            })
                            .collect()
                    })
                    .collect();
                return ConeHrep {
                    span_eqs: eye,
                    ineqs: Vec::new(),
                };
            }
            let mut pts: Vec<QVec> = vec![vec![Rat::zero(); self.rank]];
            pts.extend(self.rays.iter().map(|r| qvec_from_z(r)));
            let hull = convex_hull(&pts).expect("nonempty");
            let span_eqs: Vec<ZVec> = hull
                .affine_hull
                .iter()
                .map(|(n, b)| {
                    debug_assert!(b.is_zero());
                    n.clone()
                })
                .collect();
            let ineqs: Vec<ZVec> = hull
                .facets
                .iter()
                .filter(|f| f.offset.is_zero())
                .map(|f| f.normal.clone())
                .collect();
            ConeHrep { span_eqs, ineqs }
        })
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        let h = self.hrep();
        h.span_eqs.iter().all(|e| dot(&qvec_from_z(e), x).is_zero())
            && h.ineqs
                .iter()
                .all(|a| !dot(&qvec_from_z(a), x).is_positive())
    }

    pub fn contains_in_relint(&self, x: &[Rat]) -> bool {
        if self.rays.is_empty() {
            return x.iter().all(|c| c.is_zero());
        }
        let h = self.hrep();
        h.span_eqs.iter().all(|e| dot(&qvec_from_z(e), x).is_zero())
            && h.ineqs
                .iter()
                .all(|a| dot(&qvec_from_z(a), x).is_negative())
    }

    /// The lineality space is zero.
    pub fn is_pointed(&self) -> bool {
        let h = self.hrep();
        let mut rows: Vec<QVec> = h.span_eqs.iter().map(|e| qvec_from_z(e)).collect();
        rows.extend(h.ineqs.iter().map(|a| qvec_from_z(a)));
        QMat {
            nrows: rows.len(),
            ncols: self.rank,
            rows,
        }
        .rank()
            == self.rank
    }

    /// Simplicial cone with linearly independent generators.
    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.rays.len()
    }

    /// Simplicial and the generators extend to a lattice basis.
    pub fn is_unimodular(&self) -> bool {
        self.is_simplicial() && (self.rays.is_empty() || maximal_minor_gcd(&self.rays).is_one())
    }

    /// For a simplicial cone, the coefficients of `x` in the ray generators;
    /// None when `x` is outside their linear span.
    pub fn simplicial_coords(&self, x: &[Rat]) -> Option<QVec> {
        debug_assert!(self.is_simplicial());
        let m = QMat::from_rows(self.rays.iter().map(|r| qvec_from_z(r)).collect());
        m.transpose().solve(x)
    }

    /// Whether the intersection with `other` contains a nonzero vector.
    pub fn intersects_nontrivially(&self, other: &Cone) -> bool {
        let (h1, h2) = (self.hrep(), other.hrep());
        for i in 0..self.rank {
            for sign in [1i64, -1] {
                let mut sys = LinSystem::new(self.rank);
                for e in h1.span_eqs.iter().chain(&h2.span_eqs) {
                    sys.eq(qvec_from_z(e), rat(0));
                }
                for a in h1.ineqs.iter().chain(&h2.ineqs) {
                    sys.le(qvec_from_z(a), rat(0));
                }
                let mut probe = vec![rat(0); self.rank];
                probe[i] = rat(-sign);
                sys.le(probe, rat(-1));
                if sys.is_feasible() {
                    return true;
                }
            }
        }
        false
    }

    /// Face of `self` spanned by a subset of rays (valid for cones coming
    /// from triangulations, where every ray subset of a cone spans a face).
    pub fn subcone(&self, ray_ids: &[usize]) -> Cone {
        let rays: Vec<ZVec> = ray_ids.iter().map(|&i| self.rays[i].clone()).collect();
        Cone::from_rays(self.rank, &rays)
    }

    /// Image under an integer linear map given by rows acting on the left:
    /// `x -> M x` with `M` of shape (new_rank, rank).
    pub fn project(&self, m: &[ZVec]) -> Cone {
        let new_rank = m.len();
        let rays: Vec<ZVec> = self
            .rays
            .iter()
            .map(|r| {
                m.iter()
                    .map(|row| {
                        row.iter()
                            .zip(r)
                            .map(|(a, b)| a * b)
                            .sum::<num_bigint::BigInt>()
                    })
                    .collect()
            })
            .collect();
        Cone::from_rays(new_rank, &rays)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{qvec, zvec};

    #[test]
    fn quadrant_hrep_and_membership() {
        let c = Cone::from_rays(2, &[zvec(&[1, 0]), zvec(&[0, 1])]);
        assert_eq!(c.dim(), 2);
        assert!(c.contains(&qvec(&[3, 5])));
        assert!(c.contains(&qvec(&[0, 0])));
        assert!(!c.contains(&qvec(&[-1, 2])));
        assert!(c.contains_in_relint(&qvec(&[1, 1])));
        assert!(!c.contains_in_relint(&qvec(&[1, 0])));
        assert!(c.is_pointed());
        assert!(c.is_unimodular());
    }

    #[test]
    fn halfplane_cone_is_not_pointed() {
        let c = Cone::from_rays(2, &[zvec(&[1, 0]), zvec(&[-1, 0]), zvec(&[0, 1])]);
        assert!(!c.is_pointed());
        assert!(c.contains(&qvec(&[-7, 2])));
        assert!(!c.contains(&qvec(&[0, -1])));
    }

    #[test]
    fn lower_dimensional_cone_has_span_equations() {
        let c = Cone::from_rays(3, &[zvec(&[1, 1, 0])]);
        assert_eq!(c.dim(), 1);
        assert_eq!(c.hrep().span_eqs.len(), 2);
        assert!(c.contains(&qvec(&[2, 2, 0])));
        assert!(!c.contains(&qvec(&[-1, -1, 0])));
        assert!(!c.contains(&qvec(&[1, 0, 0])));
    }

    #[test]
    fn non_unimodular_cone_detected() {
        let c = Cone::from_rays(2, &[zvec(&[1, 0]), zvec(&[1, 2])]);
        assert!(c.is_simplicial());
        assert!(!c.is_unimodular());
    }

    #[test]
    fn origin_cone_only_contains_zero() {
        let c = Cone::origin(2);
        assert!(c.contains(&qvec(&[0, 0])));
        assert!(!c.contains(&qvec(&[1, 0])));
        assert!(c.contains_in_relint(&qvec(&[0, 0])));
        assert_eq!(c.dim(), 0);
    }

    #[test]
    fn disjoint_quadrants_meet_only_at_zero() {
        let a = Cone::from_rays(2, &[zvec(&[1, 0]), zvec(&[0, 1])]);
        let b = Cone::from_rays(2, &[zvec(&[-1, 0]), zvec(&[0, -1])]);
        assert!(!a.intersects_nontrivially(&b));
        let c = Cone::from_rays(2, &[zvec(&[1, 1]), zvec(&[-1, 1])]);
        assert!(a.intersects_nontrivially(&c));
    }

    #[test]
    fn projection_drops_a_coordinate() {
        let c = Cone::from_rays(3, &[zvec(&[1, 0, 5]), zvec(&[0, 1, -2])]);
        let p = c.project(&[zvec(&[1, 0, 0]), zvec(&[0, 1, 0])]);
        assert_eq!(p.rank, 2);
        assert_eq!(p.rays, vec![zvec(&[0, 1]), zvec(&[1, 0])]);
    }
}
