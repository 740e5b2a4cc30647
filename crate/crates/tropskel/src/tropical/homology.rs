//! Rational homology of regular cell complexes through the order complex of
//! their closure poset.
//!
//! The order complex (simplices = strict chains) of the face poset of a
//! regular complex triangulates the complex, so exact boundary ranks over the
//! rationals give its Betti numbers. All ranks are computed exactly.

use crate::rat::{QMat, Rat};
use num_traits::{One, Zero};

use super::TropicalCellComplex;

/// Betti numbers `b_0, …, b_top` of the order complex of a poset on
/// `n` elements with strict order relation `less`.
pub fn poset_betti(n: usize, less: &dyn Fn(usize, usize) -> bool) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    // chains by length, each a strictly increasing index sequence
    let mut chains: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|i| vec![i]).collect()];
    loop {
        let last = chains.last().unwrap();
        let mut next: Vec<Vec<usize>> = Vec::new();
        for c in last {
            let top = *c.last().unwrap();
            for j in 0..n {
                if less(top, j) {
                    let mut ext = c.clone();
                    ext.push(j);
                    next.push(ext);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        chains.push(next);
    }
    let ranks: Vec<usize> = (1..chains.len())
        .map(|k| boundary_rank(&chains[k - 1], &chains[k]))
        .collect();
    let mut betti = Vec::with_capacity(chains.len());
    for k in 0..chains.len() {
        let rank_in = if k == 0 { 0 } else { ranks[k - 1] };
        let rank_out = if k < ranks.len() { ranks[k] } else { 0 };
        betti.push(chains[k].len() - rank_in - rank_out);
    }
    betti
}

/// Rank of the simplicial boundary map from k-chains to (k-1)-chains.
fn boundary_rank(lower: &[Vec<usize>], upper: &[Vec<usize>]) -> usize {
    let index_of = |c: &[usize]| -> usize {
        lower
            .iter()
            .position(|x| x.as_slice() == c)
            .expect("boundary face is a chain")
    };
    let mut rows: Vec<Vec<Rat>> = vec![vec![Rat::zero(); upper.len()]; lower.len()];
    for (col, c) in upper.iter().enumerate() {
        for drop in 0..c.len() {
            let mut face: Vec<usize> = c.clone();
            face.remove(drop);
            let row = index_of(&face);
            let sign = if drop % 2 == 0 { Rat::one() } else { -Rat::one() };
            rows[row][col] += sign;
        }
    }
    QMat {
        nrows: lower.len(),
        ncols: upper.len(),
        rows,
    }
    .rank()
}

/// Betti numbers of the bounded part of an intersection complex, using the
/// closure poset restricted to bounded cells.
pub fn bounded_complex_betti(complex: &TropicalCellComplex) -> Vec<usize> {
    let bounded = complex.bounded_cells();
    let pos_of = |i: usize| bounded.iter().position(|&b| b == i);
    let mut rel: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in &complex.poset {
        if let (Some(x), Some(y)) = (pos_of(a), pos_of(b)) {
            rel.push((x, y));
        }
    }
    poset_betti(bounded.len(), &|i, j| rel.contains(&(i, j)))
}

/// Betti numbers of the full intersection complex (bounded and unbounded
/// cells), using the closure poset.
pub fn complex_betti(complex: &TropicalCellComplex) -> Vec<usize> {
    let rel = &complex.poset;
    poset_betti(complex.cells.len(), &|i, j| rel.contains(&(i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{FaceLattice, Polytope};

    #[test]
    fn betti_of_a_point_and_a_segment() {
        assert_eq!(poset_betti(1, &|_, _| false), vec![1]);
        // segment: two vertices under one edge
        let b = poset_betti(3, &|i, j| (i == 0 || i == 1) && j == 2);
        assert_eq!(b, vec![1, 0]);
    }

    #[test]
    fn betti_of_a_circle_poset() {
        // square as a cycle: 4 vertices, 4 edges
        let less = |i: usize, j: usize| {
            let edges = [(0usize, 1usize), (1, 2), (2, 3), (3, 0)];
            if i < 4 && (4..8).contains(&j) {
                let (a, b) = edges[j - 4];
                i == a || i == b
            } else {
                false
            }
        };
        assert_eq!(poset_betti(8, &less), vec![1, 1]);
    }

    #[test]
    fn betti_of_octahedron_boundary_is_a_two_sphere() {
        let oct = Polytope::from_lattice_vertices(&[
            &[1, 0, 0],
            &[-1, 0, 0],
            &[0, 1, 0],
            &[0, -1, 0],
            &[0, 0, 1],
            &[0, 0, -1],
        ]);
        let fl = FaceLattice::compute(&oct);
        // boundary complex: all proper faces ordered by strict inclusion
        let proper: Vec<usize> = (0..fl.faces.len())
            .filter(|&i| fl.faces[i].dim < oct.dim)
            .collect();
        let less = |i: usize, j: usize| {
            let a = &fl.faces[proper[i]].vertex_ids;
            let b = &fl.faces[proper[j]].vertex_ids;
            a.len() < b.len() && a.iter().all(|v| b.contains(v))
        };
        assert_eq!(poset_betti(proper.len(), &less), vec![1, 0, 1]);
    }

    #[test]
    fn bounded_part_of_the_running_intersection_is_a_circle() {
        let model = crate::tropical::tests::running_model();
        let complex = crate::tropical::tci_complex(&model).unwrap();
        assert_eq!(bounded_complex_betti(&complex), vec![1, 1]);
    }

    #[test]
    fn full_running_intersection_retracts_to_the_circle() {
        let model = crate::tropical::tests::running_model();
        let complex = crate::tropical::tci_complex(&model).unwrap();
        assert_eq!(complex_betti(&complex), vec![1, 1]);
    }
}
