//! Linear independence of radius sets.
//!
//! A set `S` of disks is independent when the unit rows fixing their radii
//! are independent modulo the row space of `R(p)`, that is when
//! `rank [R; E_S] = rank R + |S|`. For a triangulated disk `R` has full row
//! rank, so this is `m + |S|`. Independent sets form a matroid, and when the
//! bar framework is rigid every maximal one has `3n - m - 3` elements.

use crate::error::{Error, Result};
use crate::graph::PlanarEmbeddedGraph;
use crate::linalg::{self, dot, DenseMatrix};
use crate::packing::{AnalysisTolerances, Packing};
use crate::rigidity::{
    build_fixing_rows, column, ensure_valid, rigidity_matrix_unchecked, Coord,
};

/// A set of vertices with the rank of `[R; E_S]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadiusSet {
    /// Sorted, without repeats.
    pub members: Vec<usize>,
    pub rank: usize,
}

impl RadiusSet {
    pub fn new(
        graph: &PlanarEmbeddedGraph,
        packing: &Packing,
        members: &[usize],
        tol: &AnalysisTolerances,
    ) -> Result<Self> {
        ensure_valid(graph, packing, tol)?;
        let members = canonical(graph, members)?;
        let rank = linalg::numerical_rank(&stacked(graph, packing, &members)?, tol.rank)?;
        Ok(Self { members, rank })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

fn canonical(graph: &PlanarEmbeddedGraph, set: &[usize]) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    for &v in &s {
        graph.check_vertex(v)?;
    }
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

fn stacked(graph: &PlanarEmbeddedGraph, packing: &Packing, set: &[usize]) -> Result<DenseMatrix> {
    let r = rigidity_matrix_unchecked(graph, packing);
    let e = build_fixing_rows(set, graph.vertex_count())?;
    DenseMatrix::stack(&[&r.matrix, &e])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Independence {
    Independent,
    Dependent,
    /// Some singular value sits within a decade of the rank cutoff.
    Indeterminate,
}

/// Independence with a flag for rank decisions too close to call.
pub fn independence(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    set: &[usize],
    tol: &AnalysisTolerances,
) -> Result<Independence> {
    ensure_valid(graph, packing, tol)?;
    let set = canonical(graph, set)?;
    let r = rigidity_matrix_unchecked(graph, packing);
    let base = linalg::spectrum(&r.matrix, tol.rank)?;
    let full = linalg::spectrum(&stacked(graph, packing, &set)?, tol.rank)?;
    if base.near_degenerate || full.near_degenerate {
        return Ok(Independence::Indeterminate);
    }
    Ok(if full.rank == base.rank + set.len() {
        Independence::Independent
    } else {
        Independence::Dependent
    })
}

/// `rank [R; E_S] = rank R + |S|`.
pub fn is_independent(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    set: &[usize],
    tol: &AnalysisTolerances,
) -> Result<bool> {
    ensure_valid(graph, packing, tol)?;
    let set = canonical(graph, set)?;
    let r = rigidity_matrix_unchecked(graph, packing);
    let base = linalg::numerical_rank(&r.matrix, tol.rank)?;
    let full = linalg::numerical_rank(&stacked(graph, packing, &set)?, tol.rank)?;
    Ok(full == base + set.len())
}

/// Fixing `S` determines every radius to first order:
/// `rank [R; E_S] = rank [R; E_V]`.
pub fn is_maximal(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    set: &[usize],
    tol: &AnalysisTolerances,
) -> Result<bool> {
    ensure_valid(graph, packing, tol)?;
    let set = canonical(graph, set)?;
    let all: Vec<usize> = graph.vertices().collect();
    let with_set = linalg::numerical_rank(&stacked(graph, packing, &set)?, tol.rank)?;
    let with_all = linalg::numerical_rank(&stacked(graph, packing, &all)?, tol.rank)?;
    Ok(with_set == with_all)
}

/// Orthonormal rows spanning the row space of `R`, extended one radius row
/// at a time.
#[derive(Debug, Clone)]
pub struct RowSpace {
    basis: Vec<Vec<f64>>,
    n: usize,
}

impl RowSpace {
    pub fn of_rigidity_matrix(
        graph: &PlanarEmbeddedGraph,
        packing: &Packing,
        tol_rank: f64,
    ) -> Result<Self> {
        let r = rigidity_matrix_unchecked(graph, packing);
        // the row space is the orthogonal complement of the kernel
        let kernel = linalg::kernel_basis(&r.matrix, tol_rank)?;
        let cols = r.matrix.cols();
        let mut basis = Vec::new();
        let mut all = kernel.clone();
        for k in 0..cols {
            let mut e = vec![0.0; cols];
            e[k] = 1.0;
            all.push(e);
        }
        for q in linalg::orthonormalize(&all, 1e-10).into_iter().skip(kernel.len()) {
            basis.push(q);
        }
        Ok(Self { basis, n: graph.vertex_count() })
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Norm of the part of `e_{r_v}` outside the current span.
    pub fn residual(&self, v: usize) -> f64 {
        let w = self.reduce(v);
        dot(&w, &w).sqrt()
    }

    fn reduce(&self, v: usize) -> Vec<f64> {
        let mut w = vec![0.0; 3 * self.n];
        w[column(v, Coord::R)] = 1.0;
        for _ in 0..2 {
            for q in &self.basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        w
    }

    /// Adds the radius row of `v` if its residual exceeds `threshold`.
    pub fn try_add(&mut self, v: usize, threshold: f64) -> bool {
        let mut w = self.reduce(v);
        let r = dot(&w, &w).sqrt();
        if r > threshold {
            w.iter_mut().for_each(|x| *x /= r);
            self.basis.push(w);
            true
        } else {
            false
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCostSet {
    pub set: RadiusSet,
    pub cost: f64,
    /// Vertices whose residual was within a decade of the rank tolerance;
    /// they were left out.
    pub skipped: Vec<usize>,
}

/// Greedy minimum-cost maximal independent set. Vertices are scanned by
/// cost, ties broken by lowest id. Requires the bar framework to be
/// infinitesimally rigid.
pub fn greedy_min_cost_set(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    cost: &[f64],
    tol: &AnalysisTolerances,
) -> Result<MinCostSet> {
    ensure_valid(graph, packing, tol)?;
    let n = graph.vertex_count();
    if cost.len() != n {
        return Err(Error::SizeMismatch(format!("{} costs for {n} vertices", cost.len())));
    }
    if let Some(k) = cost.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Precondition(format!("cost of vertex {} is not a nonnegative number", k + 1)));
    }
    let all: Vec<usize> = graph.vertices().collect();
    let full = linalg::numerical_rank(&stacked(graph, packing, &all)?, tol.rank)?;
    if full + 3 != 3 * n {
        return Err(Error::Precondition(format!(
            "bar framework is not infinitesimally rigid: fixing every radius leaves {} flex dimensions",
            3 * n - full
        )));
    }
    let mut order = all;
    order.sort_by(|&a, &b| cost[a - 1].total_cmp(&cost[b - 1]).then(a.cmp(&b)));
    let mut space = RowSpace::of_rigidity_matrix(graph, packing, tol.rank)?;
    let mut chosen = Vec::new();
    let mut skipped = Vec::new();
    for v in order {
        let r = space.residual(v);
        if r > tol.rank / 10.0 && r <= tol.rank * 10.0 {
            skipped.push(v);
            continue;
        }
        if space.try_add(v, tol.rank) {
            chosen.push(v);
        }
    }
    let total = chosen.iter().map(|&v| cost[v - 1]).sum();
    let set = RadiusSet::new(graph, packing, &chosen, tol)?;
    Ok(MinCostSet { set, cost: total, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casebook;

    #[test]
    fn empty_set_is_independent() {
        let c = casebook::flower4().unwrap();
        let tol = AnalysisTolerances::default();
        assert!(is_independent(&c.graph, &c.packing, &[], &tol).unwrap());
        assert!(is_maximal(&c.graph, &c.packing, &[1, 2, 3, 4, 5], &tol).unwrap());
    }

    #[test]
    fn flower_greedy_takes_four() {
        let c = casebook::flower4().unwrap();
        let tol = AnalysisTolerances::default();
        let g = greedy_min_cost_set(&c.graph, &c.packing, &[1.0; 5], &tol).unwrap();
        assert_eq!(g.set.members, vec![1, 2, 3, 4]);
        assert_eq!(g.set.rank, 8 + 4);
        assert!(g.skipped.is_empty());
    }

    #[test]
    fn interior_disk_is_determined_by_its_neighbors() {
        let c = casebook::general10().unwrap();
        let tol = AnalysisTolerances::default();
        let green = [2, 4, 5, 6, 8, 9, 10];
        assert!(is_independent(&c.graph, &c.packing, &green, &tol).unwrap());
        assert!(!is_maximal(&c.graph, &c.packing, &green, &tol).unwrap());
        let mut with7 = green.to_vec();
        with7.push(7);
        assert!(!is_independent(&c.graph, &c.packing, &with7, &tol).unwrap());
        let mut with1 = green.to_vec();
        with1.push(1);
        assert!(is_independent(&c.graph, &c.packing, &with1, &tol).unwrap());
        assert!(is_maximal(&c.graph, &c.packing, &with1, &tol).unwrap());
    }

    #[test]
    fn incremental_rank_matches_svd() {
        let c = casebook::general10().unwrap();
        let tol = AnalysisTolerances::default();
        let mut space = RowSpace::of_rigidity_matrix(&c.graph, &c.packing, tol.rank).unwrap();
        assert_eq!(space.rank(), 19);
        let mut added = Vec::new();
        for v in [7, 2, 4, 5, 6, 8, 9, 10, 1, 3] {
            if space.try_add(v, tol.rank) {
                added.push(v);
            }
            let full = RadiusSet::new(&c.graph, &c.packing, &added, &tol).unwrap();
            assert_eq!(space.rank(), full.rank);
        }
        assert_eq!(added.len(), 3 * 10 - 19 - 3);
    }

    #[test]
    fn flexible_bar_framework_is_reported() {
        let tol = AnalysisTolerances::default();
        let g = PlanarEmbeddedGraph::new(vec![vec![2], vec![1]], vec![true, true]).unwrap();
        let p = Packing::new(vec![[0.0, 0.0], [2.0, 0.0]], vec![1.0, 1.0]).unwrap();
        assert!(greedy_min_cost_set(&g, &p, &[1.0, 1.0], &tol).is_ok());
        // a chain of three disks bends at the middle one
        let g3 = PlanarEmbeddedGraph::new(vec![vec![2], vec![3, 1], vec![2]], vec![true; 3]).unwrap();
        let p3 = Packing::new(vec![[0.0, 0.0], [2.0, 0.0], [4.0, 0.0]], vec![1.0; 3]).unwrap();
        assert!(matches!(
            greedy_min_cost_set(&g3, &p3, &[1.0; 3], &tol),
            Err(Error::Precondition(_))
        ));
    }
}
