//! Packings of simple triangulated disks from their boundary radii.
//!
//! Interior radii are found by Gauss-Seidel sweeps: each interior radius is
//! set to the root of its own angle-sum equation with the neighbors held
//! fixed. The angle sum is decreasing in the center radius, so every local
//! solve is a bisection in log scale. Centers are then placed face by face.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::PlanarEmbeddedGraph;
use crate::packing::{angle_unchecked, validate_packing, AnalysisTolerances, Packing};

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutProblem {
    pub graph: PlanarEmbeddedGraph,
    /// `(vertex, radius)` for every boundary vertex.
    pub boundary_radii: Vec<(usize, f64)>,
    pub max_iter: usize,
    pub tol_angle: f64,
}

impl LayoutProblem {
    pub fn new(graph: PlanarEmbeddedGraph, boundary_radii: Vec<(usize, f64)>) -> Result<Self> {
        if let Some(reason) = graph.triangulated_disk_defect() {
            return Err(Error::InvalidGraph(format!("not a simple triangulated disk: {reason}")));
        }
        let mut seen = vec![false; graph.vertex_count()];
        for &(v, r) in &boundary_radii {
            graph.check_vertex(v)?;
            if !graph.is_boundary(v) {
                return Err(Error::InvalidGraph(format!("vertex {v} is not on the boundary")));
            }
            if seen[v - 1] {
                return Err(Error::InvalidGraph(format!("boundary radius of {v} given twice")));
            }
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::NonPositiveRadius { vertex: v, value: r });
            }
            seen[v - 1] = true;
        }
        if let Some(v) = graph.vertices().find(|&v| graph.is_boundary(v) && !seen[v - 1]) {
            return Err(Error::InvalidGraph(format!("boundary vertex {v} has no radius")));
        }
        Ok(Self { graph, boundary_radii, max_iter: 20_000, tol_angle: 1e-12 })
    }

    /// Boundary radii keyed by vertex, with `NaN` at interior vertices.
    fn radius_template(&self) -> Vec<f64> {
        let mut r = vec![f64::NAN; self.graph.vertex_count()];
        for &(v, x) in &self.boundary_radii {
            r[v - 1] = x;
        }
        r
    }
}

/// Whether the graph is a simple triangulated disk, with its boundary count.
pub fn is_simple_triangulated(graph: &PlanarEmbeddedGraph) -> (bool, usize) {
    (graph.triangulated_disk_defect().is_none(), graph.boundary_count())
}

fn angle_sum_at(graph: &PlanarEmbeddedGraph, radii: &[f64], v: usize, rv: f64) -> f64 {
    let rot = graph.rotation(v);
    let mut total = 0.0;
    for k in 0..rot.len() {
        let (u, w) = (rot[k], rot[(k + 1) % rot.len()]);
        total += angle_unchecked(rv, radii[u - 1], radii[w - 1]);
    }
    total
}

/// Root of `angle_sum(v) = 2 pi` in the radius of `v` by bisection on
/// `log r` over `[1e-9 rbar, 1e9 rbar]`.
fn local_solve(graph: &PlanarEmbeddedGraph, radii: &[f64], v: usize, rbar: f64) -> f64 {
    let target = 2.0 * PI;
    let (mut lo, mut hi) = ((1e-9 * rbar).ln(), (1e9 * rbar).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if angle_sum_at(graph, radii, v, mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn worst_residual(graph: &PlanarEmbeddedGraph, radii: &[f64]) -> f64 {
    graph
        .interior_vertices()
        .map(|v| (angle_sum_at(graph, radii, v, radii[v - 1]) - 2.0 * PI).abs())
        .fold(0.0, f64::max)
}

/// Radii of every vertex, boundary radii copied from the problem.
pub fn solve_interior_radii(problem: &LayoutProblem) -> Result<Vec<f64>> {
    let start = problem.radius_template();
    let rbar = problem.boundary_radii.iter().map(|b| b.1).sum::<f64>()
        / problem.boundary_radii.len() as f64;
    solve_from(problem, start, rbar)
}

/// As [`solve_interior_radii`] but starting every interior radius at `init`.
pub fn solve_interior_radii_from(problem: &LayoutProblem, init: f64) -> Result<Vec<f64>> {
    if !(init > 0.0 && init.is_finite()) {
        return Err(Error::NonPositiveRadius { vertex: 0, value: init });
    }
    let rbar = problem.boundary_radii.iter().map(|b| b.1).sum::<f64>()
        / problem.boundary_radii.len() as f64;
    let mut start = problem.radius_template();
    for v in problem.graph.interior_vertices() {
        start[v - 1] = init;
    }
    solve_from(problem, start, rbar)
}

fn solve_from(problem: &LayoutProblem, mut radii: Vec<f64>, rbar: f64) -> Result<Vec<f64>> {
    let graph = &problem.graph;
    let interior: Vec<usize> = graph.interior_vertices().collect();
    for &v in &interior {
        if radii[v - 1].is_nan() {
            radii[v - 1] = rbar;
        }
    }
    let mut residual = worst_residual(graph, &radii);
    for _ in 0..problem.max_iter {
        if residual < problem.tol_angle {
            return Ok(radii);
        }
        for &v in &interior {
            radii[v - 1] = local_solve(graph, &radii, v, rbar);
        }
        residual = worst_residual(graph, &radii);
    }
    if residual < problem.tol_angle {
        Ok(radii)
    } else {
        Err(Error::NoConvergence { iterations: problem.max_iter, residual })
    }
}

/// Centers for radii that close up at every interior vertex. Vertex 1 sits
/// at the origin and its first rotation neighbor on the positive x-axis.
pub fn place_centers(graph: &PlanarEmbeddedGraph, radii: &[f64]) -> Result<Vec<[f64; 2]>> {
    let n = graph.vertex_count();
    if radii.len() != n {
        return Err(Error::SizeMismatch(format!("{} radii for {n} vertices", radii.len())));
    }
    if let Some((k, &r)) = radii.iter().enumerate().find(|(_, r)| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::NonPositiveRadius { vertex: k + 1, value: r });
    }
    let mut centers: Vec<Option<[f64; 2]>> = vec![None; n];
    centers[0] = Some([0.0, 0.0]);
    if let Some(&u) = graph.rotation(1).first() {
        centers[u - 1] = Some([radii[0] + radii[u - 1], 0.0]);
    }
    let faces: Vec<&[usize]> = graph.bounded_faces().into_iter().filter(|f| f.len() == 3).collect();
    let mut progress = true;
    while progress {
        progress = false;
        for face in &faces {
            for s in 0..3 {
                let (a, b, c) = (face[s], face[(s + 1) % 3], face[(s + 2) % 3]);
                if centers[c - 1].is_some() {
                    continue;
                }
                let (Some(pa), Some(pb)) = (centers[a - 1], centers[b - 1]) else {
                    continue;
                };
                let alpha = angle_unchecked(radii[a - 1], radii[b - 1], radii[c - 1]);
                let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                let len = dx.hypot(dy);
                let (cs, sn) = (alpha.cos(), alpha.sin());
                let d = radii[a - 1] + radii[c - 1];
                centers[c - 1] = Some([
                    pa[0] + d * (cs * dx - sn * dy) / len,
                    pa[1] + d * (sn * dx + cs * dy) / len,
                ]);
                progress = true;
            }
        }
    }
    let centers: Vec<[f64; 2]> = centers
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| Error::InvalidGraph(format!("vertex {} was never placed", k + 1))))
        .collect::<Result<_>>()?;
    let packing = Packing::new(centers.clone(), radii.to_vec())?;
    let violations = validate_packing(graph, &packing, &AnalysisTolerances::default())?;
    if let Some(v) = violations.first() {
        return Err(Error::InvalidPacking(format!("placement inconsistent: {v}")));
    }
    Ok(centers)
}

/// Solves the radii and places the centers.
pub fn layout(problem: &LayoutProblem) -> Result<Packing> {
    let radii = solve_interior_radii(problem)?;
    let centers = place_centers(&problem.graph, &radii)?;
    Packing::new(centers, radii)
}

/// Change of each interior radius when the radius of `boundary_vertex` grows
/// by `delta`.
pub fn monotonicity_probe(
    problem: &LayoutProblem,
    boundary_vertex: usize,
    delta: f64,
) -> Result<Vec<(usize, f64)>> {
    let k = problem
        .boundary_radii
        .iter()
        .position(|b| b.0 == boundary_vertex)
        .ok_or_else(|| Error::InvalidGraph(format!("{boundary_vertex} is not a boundary vertex")))?;
    let before = solve_interior_radii(problem)?;
    let mut grown = problem.clone();
    grown.boundary_radii[k].1 += delta;
    let after = solve_interior_radii(&grown)?;
    Ok(problem
        .graph
        .interior_vertices()
        .map(|v| (v, after[v - 1] - before[v - 1]))
        .collect())
}
