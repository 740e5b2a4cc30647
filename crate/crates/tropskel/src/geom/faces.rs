//! Face lattices of polytopes, computed as the intersection closure of the
//! facet vertex sets. A face is identified with its sorted vertex index set.

use crate::geom::polytope::Polytope;
use crate::rat::{vsub, QMat, QVec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Indices into the polytope's vertex list, sorted.
    pub vertex_ids: Vec<usize>,
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct FaceLattice {
    /// All nonempty faces including the polytope itself, sorted by
    /// (dim, vertex_ids).
    pub faces: Vec<Face>,
}

impl FaceLattice {
    pub fn compute(p: &Polytope) -> FaceLattice {
        let top: Vec<usize> = (0..p.vertices.len()).collect();
        let facet_sets: Vec<Vec<usize>> = p.facets.iter().map(|f| f.vertex_ids.clone()).collect();
        let mut sets: Vec<Vec<usize>> = vec![top];
        let mut frontier = sets.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for s in &frontier {
                for fs in &facet_sets {
                    let t: Vec<usize> = s.iter().copied().filter(|i| fs.contains(i)).collect();
                    if !t.is_empty() && !sets.contains(&t) && !next.contains(&t) {
                        next.push(t);
                    }
                }
            }
            sets.extend(next.clone());
            frontier = next;
        }
        let mut faces: Vec<Face> = sets
            .into_iter()
            .map(|vertex_ids| {
                let dim = affine_rank(p, &vertex_ids);
                Face { vertex_ids, dim }
            })
            .collect();
        faces.sort_by(|a, b| a.dim.cmp(&b.dim).then_with(|| a.vertex_ids.cmp(&b.vertex_ids)));
        FaceLattice { faces }
    }

    /// Number of faces per dimension 0..=dim, excluding the empty face but
    /// including the polytope itself in the last slot.
    pub fn f_vector(&self) -> Vec<usize> {
        let top = self.faces.iter().map(|f| f.dim).max().unwrap_or(0);
        let mut f = vec![0usize; top + 1];
        for face in &self.faces {
            f[face.dim] += 1;
        }
        f
    }

    pub fn faces_of_dim(&self, d: usize) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(move |f| f.dim == d)
    }

    /// Strict inclusions, as index pairs (smaller face, larger face).
    pub fn inclusions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.faces.iter().enumerate() {
            for (j, b) in self.faces.iter().enumerate() {
                if i != j && is_subset(&a.vertex_ids, &b.vertex_ids) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

fn affine_rank(p: &Polytope, vertex_ids: &[usize]) -> usize {
    if vertex_ids.len() <= 1 {
        return 0;
    }
    let base = &p.vertices[vertex_ids[0]];
    let rows: Vec<QVec> = vertex_ids[1..]
        .iter()
        .map(|&i| vsub(&p.vertices[i], base))
        .collect();
    QMat {
        nrows: rows.len(),
        ncols: p.rank,
        rows,
    }
    .rank()
}
