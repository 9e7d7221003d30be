//! Rigidity matrices of packings and the dimension counts derived from them.
//!
//! Columns are ordered `(x1, y1, r1, ..., xn, yn, rn)`; rows follow the
//! canonical edge order of the graph, then the radius-fixing rows.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{Edge, PlanarEmbeddedGraph};
use crate::linalg::{self, dot, norm, DenseMatrix};
use crate::packing::{validate_packing, AnalysisTolerances, ConstraintPartition, Packing, Tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    X,
    Y,
    R,
}

/// Column of coordinate `c` of vertex `v`.
pub fn column(v: usize, c: Coord) -> usize {
    3 * (v - 1)
        + match c {
            Coord::X => 0,
            Coord::Y => 1,
            Coord::R => 2,
        }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityMatrix {
    pub matrix: DenseMatrix,
    pub row_index: Vec<Edge>,
}

impl RigidityMatrix {
    pub fn col_index(&self, col: usize) -> (usize, Coord) {
        let c = [Coord::X, Coord::Y, Coord::R][col % 3];
        (col / 3 + 1, c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedRigidityMatrix {
    pub matrix: DenseMatrix,
    /// Number of leading edge rows.
    pub edge_rows: usize,
    pub row_edges: Vec<Edge>,
    /// Vertex whose radius each fixing row pins, in row order.
    pub fixed: Vec<usize>,
}

/// An infinitesimal motion `p' = (x'1, y'1, r'1, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexVector(pub Vec<f64>);

impl FlexVector {
    pub fn zeros(n: usize) -> Self {
        FlexVector(vec![0.0; 3 * n])
    }

    pub fn len(&self) -> usize {
        self.0.len() / 3
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn x(&self, v: usize) -> f64 {
        self.0[column(v, Coord::X)]
    }

    pub fn y(&self, v: usize) -> f64 {
        self.0[column(v, Coord::Y)]
    }

    pub fn r(&self, v: usize) -> f64 {
        self.0[column(v, Coord::R)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn normalized(&self) -> Self {
        let s = self.norm();
        if s == 0.0 {
            self.clone()
        } else {
            FlexVector(self.0.iter().map(|v| v / s).collect())
        }
    }

    pub fn negated(&self) -> Self {
        FlexVector(self.0.iter().map(|v| -v).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn ensure_valid(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    tol: &AnalysisTolerances,
) -> Result<()> {
    let violations = validate_packing(graph, packing, tol)?;
    if let Some(v) = violations.first() {
        return Err(Error::InvalidPacking(format!(
            "{v} ({} violation(s) in total)",
            violations.len()
        )));
    }
    Ok(())
}

/// The rigidity matrix without validating the packing first.
pub fn rigidity_matrix_unchecked(graph: &PlanarEmbeddedGraph, packing: &Packing) -> RigidityMatrix {
    let n = graph.vertex_count();
    let edges = graph.edges();
    let mut m = DenseMatrix::zeros(edges.len(), 3 * n);
    for (k, &(i, j)) in edges.iter().enumerate() {
        let (pi, pj) = (packing.center(i), packing.center(j));
        let s = -(packing.radius(i) + packing.radius(j));
        m.set(k, column(i, Coord::X), pi[0] - pj[0]);
        m.set(k, column(i, Coord::Y), pi[1] - pj[1]);
        m.set(k, column(i, Coord::R), s);
        m.set(k, column(j, Coord::X), pj[0] - pi[0]);
        m.set(k, column(j, Coord::Y), pj[1] - pi[1]);
        m.set(k, column(j, Coord::R), s);
    }
    RigidityMatrix { matrix: m, row_index: edges.to_vec() }
}

/// `R(p)`: one row per edge, whose kernel is the space of infinitesimal
/// flexes of the tangency constraints.
pub fn build_rigidity_matrix(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
) -> Result<RigidityMatrix> {
    ensure_valid(graph, packing, &AnalysisTolerances::default())?;
    Ok(rigidity_matrix_unchecked(graph, packing))
}

/// Unit rows `e_k` at the radius columns of `set`.
pub fn build_fixing_rows(set: &[usize], n: usize) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(set.len(), 3 * n);
    for (row, &v) in set.iter().enumerate() {
        if v == 0 || v > n {
            return Err(Error::UnknownVertex(v));
        }
        m.set(row, column(v, Coord::R), 1.0);
    }
    Ok(m)
}

pub(crate) fn extended_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
) -> Result<ExtendedRigidityMatrix> {
    let n = graph.vertex_count();
    partition.check_len(n)?;
    let r = rigidity_matrix_unchecked(graph, packing);
    let mut fixed = partition.members(Tag::Decrease);
    fixed.extend(partition.members(Tag::Increase));
    fixed.extend(partition.members(Tag::Fixed));
    let e = build_fixing_rows(&fixed, n)?;
    Ok(ExtendedRigidityMatrix {
        matrix: DenseMatrix::stack(&[&r.matrix, &e])?,
        edge_rows: r.row_index.len(),
        row_edges: r.row_index,
        fixed,
    })
}

/// `[R; E_{V-}; E_{V+}; E_{V=}]`.
pub fn build_extended_matrix(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
) -> Result<ExtendedRigidityMatrix> {
    partition.check_len(graph.vertex_count())?;
    ensure_valid(graph, packing, &AnalysisTolerances::default())?;
    extended_unchecked(graph, packing, partition)
}

/// Translations in x and y and the rotation about the origin, all with
/// `r' = 0`. A single disk only gets the two translations.
pub fn trivial_flex_basis(packing: &Packing) -> Vec<FlexVector> {
    let n = packing.len();
    let mut tx = FlexVector::zeros(n);
    let mut ty = FlexVector::zeros(n);
    let mut rot = FlexVector::zeros(n);
    for v in 1..=n {
        let p = packing.center(v);
        tx.0[column(v, Coord::X)] = 1.0;
        ty.0[column(v, Coord::Y)] = 1.0;
        rot.0[column(v, Coord::X)] = -p[1];
        rot.0[column(v, Coord::Y)] = p[0];
    }
    if n == 1 {
        vec![tx, ty]
    } else {
        vec![tx, ty, rot]
    }
}

/// Component of `flex` orthogonal to the trivial motions.
pub fn remove_trivial(packing: &Packing, flex: &FlexVector) -> FlexVector {
    let basis: Vec<Vec<f64>> = trivial_flex_basis(packing).into_iter().map(|f| f.0).collect();
    FlexVector(linalg::project_out(&flex.0, &basis))
}

/// Whether `flex` is a rigid motion up to `tol` relative to its norm.
pub fn is_trivial(packing: &Packing, flex: &FlexVector, tol: f64) -> bool {
    let total = flex.norm();
    total == 0.0 || remove_trivial(packing, flex).norm() <= tol * total
}

/// Kernel dimensions of `R`, `R_e` and `R' = [R; E_V]` with the flex-type
/// counts they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexSpaceReport {
    pub dim_kernel_r: usize,
    pub dim_kernel_re: usize,
    pub dim_kernel_rprime: usize,
    /// Nontrivial flexes of the bar framework (all radii fixed).
    pub nontrivial_fixed_radii_flexes: usize,
    /// Flexes that only need the unconstrained radii to change.
    pub free_disk_flexes: usize,
    pub dim_cokernel_re: usize,
    /// Number of trivial motions (2 or 3).
    pub trivial_dim: usize,
    /// Trivial motions are not all inside the computed kernel of `R_e`.
    pub trivial_deficient: bool,
    /// Some rank decision had a singular value within a decade of the cutoff.
    pub near_degenerate: bool,
}

impl fmt::Display for FlexSpaceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kernel_R: {}", self.dim_kernel_r)?;
        writeln!(f, "kernel_Re: {}", self.dim_kernel_re)?;
        writeln!(f, "kernel_Rprime: {}", self.dim_kernel_rprime)?;
        writeln!(f, "cokernel_Re: {}", self.dim_cokernel_re)?;
        writeln!(f, "bar_flexes: {}", self.nontrivial_fixed_radii_flexes)?;
        writeln!(f, "free_disk_flexes: {}", self.free_disk_flexes)?;
        write!(f, "near_degenerate: {}", self.near_degenerate)
    }
}

pub fn flex_space_report(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<FlexSpaceReport> {
    tol.validate()?;
    partition.check_len(graph.vertex_count())?;
    ensure_valid(graph, packing, tol)?;
    flex_space_report_unchecked(graph, packing, partition, tol)
}

pub(crate) fn flex_space_report_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<FlexSpaceReport> {
    let n = graph.vertex_count();
    let cols = 3 * n;
    let r = rigidity_matrix_unchecked(graph, packing);
    let re = extended_unchecked(graph, packing, partition)?;
    let all: Vec<usize> = graph.vertices().collect();
    let rprime = DenseMatrix::stack(&[&r.matrix, &build_fixing_rows(&all, n)?])?;

    let s_r = linalg::spectrum(&r.matrix, tol.rank)?;
    let s_re = linalg::spectrum(&re.matrix, tol.rank)?;
    let s_rp = linalg::spectrum(&rprime, tol.rank)?;
    let dim_kernel_r = cols - s_r.rank;
    let dim_kernel_re = cols - s_re.rank;
    let dim_kernel_rprime = cols - s_rp.rank;
    let trivial = trivial_flex_basis(packing);
    let trivial_dim = trivial.len();

    let kernel = linalg::kernel_basis(&re.matrix, tol.rank)?;
    let trivial_deficient = trivial.iter().any(|t| {
        let residual = linalg::project_out(&t.0, &kernel);
        norm(&residual) > tol.strict * t.norm().max(1.0)
    });

    Ok(FlexSpaceReport {
        dim_kernel_r,
        dim_kernel_re,
        dim_kernel_rprime,
        nontrivial_fixed_radii_flexes: dim_kernel_rprime.saturating_sub(trivial_dim),
        free_disk_flexes: dim_kernel_re.saturating_sub(dim_kernel_rprime),
        dim_cokernel_re: re.matrix.rows() - s_re.rank,
        trivial_dim,
        trivial_deficient,
        near_degenerate: s_r.near_degenerate || s_re.near_degenerate || s_rp.near_degenerate,
    })
}

/// `max_e |R(p) p'|_e / (|p'| * max_e |row_e|)`.
pub fn flex_residual(graph: &PlanarEmbeddedGraph, packing: &Packing, flex: &FlexVector) -> f64 {
    let r = rigidity_matrix_unchecked(graph, packing);
    let scale = r.matrix.max_abs().max(f64::MIN_POSITIVE) * flex.norm().max(f64::MIN_POSITIVE);
    r.matrix
        .mul_vec(&flex.0)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        / scale
}

/// Whether `flex` respects the radius signs of `partition`, with entries
/// below `tol * |flex|` treated as zero.
pub fn is_proper(partition: &ConstraintPartition, flex: &FlexVector, tol: f64) -> bool {
    let eps = tol * flex.norm();
    (1..=partition.len()).all(|v| {
        let r = flex.r(v);
        match partition.tag(v) {
            Tag::Increase => r >= -eps,
            Tag::Decrease => r <= eps,
            Tag::Fixed => r.abs() <= eps,
            Tag::Free => true,
        }
    })
}

/// Dot product of two flexes, exposed for gauge checks.
pub fn flex_dot(a: &FlexVector, b: &FlexVector) -> f64 {
    dot(&a.0, &b.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn flower() -> (PlanarEmbeddedGraph, Packing) {
        let g = PlanarEmbeddedGraph::new(
            vec![vec![5, 2, 4], vec![5, 3, 1], vec![5, 4, 2], vec![5, 1, 3], vec![1, 4, 3, 2]],
            vec![true, true, true, true, false],
        )
        .unwrap();
        let p = Packing::new(
            vec![[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0], [0.0, 0.0]],
            vec![1.0, 1.0, 1.0, 1.0, SQRT_2 - 1.0],
        )
        .unwrap();
        (g, p)
    }

    #[test]
    fn single_edge_row() {
        let g = PlanarEmbeddedGraph::new(vec![vec![2], vec![1]], vec![true, true]).unwrap();
        let p = Packing::new(vec![[0.0, 0.0], [2.0, 0.0]], vec![1.0, 1.0]).unwrap();
        let r = build_rigidity_matrix(&g, &p).unwrap();
        assert_eq!(r.matrix.row(0), &[-2.0, 0.0, -2.0, 2.0, 0.0, -2.0]);
    }

    #[test]
    fn flower_spoke_row() {
        let (g, p) = flower();
        let r = build_rigidity_matrix(&g, &p).unwrap();
        let k = g.edge_index(1, 5).unwrap();
        let row = r.matrix.row(k);
        let expect = [1.0, 1.0, -SQRT_2, 0., 0., 0., 0., 0., 0., 0., 0., 0., -1.0, -1.0, -SQRT_2];
        for (a, b) in row.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(r.col_index(14), (5, Coord::R));
    }

    #[test]
    fn fixing_rows() {
        assert_eq!(build_fixing_rows(&[], 5).unwrap().rows(), 0);
        let e = build_fixing_rows(&[5], 5).unwrap();
        assert_eq!(e.get(0, 14), 1.0);
        assert_eq!(e.data().iter().filter(|&&x| x != 0.0).count(), 1);
        assert!(matches!(build_fixing_rows(&[6], 5), Err(Error::UnknownVertex(6))));
    }

    #[test]
    fn flower_report() {
        let (g, p) = flower();
        let part = ConstraintPartition::from_sets(5, &[5], &[1, 2, 3, 4], Tag::Free).unwrap();
        let rep = flex_space_report(&g, &p, &part, &AnalysisTolerances::default()).unwrap();
        assert_eq!(
            (
                rep.dim_kernel_r,
                rep.dim_kernel_re,
                rep.dim_kernel_rprime,
                rep.nontrivial_fixed_radii_flexes,
                rep.free_disk_flexes
            ),
            (7, 3, 3, 0, 0)
        );
        assert_eq!(rep.dim_cokernel_re, 1);
        assert!(!rep.trivial_deficient);
    }

    #[test]
    fn all_free_partition_is_plain_matrix() {
        let (g, p) = flower();
        let e = build_extended_matrix(&g, &p, &ConstraintPartition::uniform(5, Tag::Free)).unwrap();
        let r = build_rigidity_matrix(&g, &p).unwrap();
        assert_eq!(e.matrix, r.matrix);
    }

    #[test]
    fn trivial_motions_in_kernel() {
        let (g, p) = flower();
        let basis = trivial_flex_basis(&p);
        assert_eq!(basis.len(), 3);
        assert_eq!(
            basis[2].0,
            vec![-1., 1., 0., 1., 1., 0., 1., -1., 0., -1., -1., 0., 0., 0., 0.]
        );
        for t in &basis {
            assert!(flex_residual(&g, &p, t) < 1e-12);
        }
        let single = Packing::new(vec![[0.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(trivial_flex_basis(&single).len(), 2);
    }

    #[test]
    fn invalid_packing_rejected() {
        let (g, _) = flower();
        let p = Packing::new(
            vec![[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0], [0.0, 0.0]],
            vec![1.0, 1.0, 1.0, 1.0, 0.5],
        )
        .unwrap();
        assert!(matches!(build_rigidity_matrix(&g, &p), Err(Error::InvalidPacking(_))));
    }
}
