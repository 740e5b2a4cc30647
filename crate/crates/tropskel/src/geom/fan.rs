//! Fans: finite collections of cones closed under the face relations we use.
//! Stored by their maximal cones; face cones are derived on demand.

use crate::geom::cone::Cone;
use crate::geom::polytope::Polytope;
use crate::rat::{qvec_from_z, QVec, Rat, ZVec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Fan {
    pub rank: usize,
    pub maximal: Vec<Cone>,
}

impl Fan {
    /// Normal fan of a full-dimensional polytope, outward convention: the
    /// maximal cone at a vertex is spanned by the normals of its facets.
    pub fn normal_fan(p: &Polytope) -> Fan {
        assert_eq!(p.dim, p.rank, "normal fan needs a full-dimensional polytope");
        let maximal = (0..p.vertices.len())
            .map(|v| {
                let rays: Vec<ZVec> = p
                    .facets
                    .iter()
                    .filter(|f| f.vertex_ids.contains(&v))
                    .map(|f| f.normal.clone())
                    .collect();
                Cone::from_rays(p.rank, &rays)
            })
            .collect();
        Fan {
            rank: p.rank,
            maximal,
        }
    }

    pub fn cone_containing(&self, x: &[Rat]) -> Option<usize> {
        self.maximal.iter().position(|c| c.contains(x))
    }

    /// Samples random integer directions and checks each lies in some
    /// maximal cone. A complete fan passes for every sample.
    pub fn covers_samples(&self, seed: u64, count: usize) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let x: QVec = (0..self.rank)
                .map(|_| crate::rat::rat(rng.gen_range(-20i64..=20)))
                .collect();
            if x.iter().all(|c| num_traits::Zero::is_zero(c)) {
                continue;
            }
            if self.cone_containing(&x).is_none() {
                return false;
            }
        }
        true
    }

    /// Pairwise disjointness of the relative interiors of the maximal cones.
    pub fn interiors_disjoint(&self) -> bool {
        use crate::feas::LinSystem;
        use crate::rat::rat;
        for i in 0..self.maximal.len() {
            for j in (i + 1)..self.maximal.len() {
                let (a, b) = (&self.maximal[i], &self.maximal[j]);
                if a == b {
                    return false;
                }
                let (ha, hb) = (a.hrep(), b.hrep());
                // a point in both relative interiors, bounded away from 0
                for k in 0..self.rank {
                    for sign in [1i64, -1] {
                        let mut sys = LinSystem::new(self.rank);
                        for e in ha.span_eqs.iter().chain(&hb.span_eqs) {
                            sys.eq(qvec_from_z(e), rat(0));
                        }
                        for q in ha.ineqs.iter().chain(&hb.ineqs) {
                            sys.lt(qvec_from_z(q), rat(0));
                        }
                        let mut probe = vec![rat(0); self.rank];
                        probe[k] = rat(-sign);
                        sys.le(probe, rat(-1));
                        if sys.is_feasible() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// All distinct ray generators across maximal cones, sorted.
    pub fn rays(&self) -> Vec<ZVec> {
        let mut out: Vec<ZVec> = Vec::new();
        for c in &self.maximal {
            for r in &c.rays {
                if !out.contains(r) {
                    out.push(r.clone());
                }
            }
        }
        out.sort_by(|a, b| crate::rat::cmp_zvec(a, b));
        out
    }
}
