//! Triangulated disks cut from the triangular lattice, and random packings
//! built from them.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::PlanarEmbeddedGraph;
use crate::layout::{layout, LayoutProblem};
use crate::packing::{ConstraintPartition, Packing, Tag};

/// Axial lattice coordinates; `(i, j)` sits at `i (1, 0) + j (1/2, sqrt 3 / 2)`.
pub type LatticePoint = (i32, i32);

/// Lattice directions in counterclockwise order.
const DIRS: [(i32, i32); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

fn up(i: i32, j: i32) -> [LatticePoint; 3] {
    [(i, j), (i + 1, j), (i, j + 1)]
}

fn down(i: i32, j: i32) -> [LatticePoint; 3] {
    [(i + 1, j), (i + 1, j + 1), (i, j + 1)]
}

fn triangles_at(p: LatticePoint) -> [[LatticePoint; 3]; 6] {
    let (i, j) = p;
    [up(i, j), up(i - 1, j), up(i, j - 1), down(i - 1, j), down(i - 1, j - 1), down(i, j - 1)]
}

/// The full lattice subcomplex on `points`: every lattice triangle with all
/// three corners present. Vertices on no triangle are dropped. A vertex is
/// interior when all six of its triangles are present. Vertex ids follow
/// the order of the returned coordinate list (sorted by row, then column).
pub fn lattice_disk(points: &[LatticePoint]) -> Result<(PlanarEmbeddedGraph, Vec<LatticePoint>)> {
    let set: BTreeSet<LatticePoint> = points.iter().copied().collect();
    let has = |t: &[LatticePoint; 3]| t.iter().all(|p| set.contains(p));
    let mut used = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for &p in &set {
        for t in triangles_at(p) {
            if has(&t) {
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    used.insert(a);
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    if used.is_empty() {
        return Err(Error::InvalidGraph("point set contains no lattice triangle".into()));
    }
    let mut coords: Vec<LatticePoint> = used.into_iter().collect();
    coords.sort_by_key(|&(i, j)| (j, i));
    let id: BTreeMap<LatticePoint, usize> =
        coords.iter().enumerate().map(|(k, &p)| (p, k + 1)).collect();
    let mut rotation = Vec::with_capacity(coords.len());
    let mut boundary = Vec::with_capacity(coords.len());
    for &p in &coords {
        let rot: Vec<usize> = DIRS
            .iter()
            .map(|d| (p.0 + d.0, p.1 + d.1))
            .filter(|q| edges.contains(&(p.min(*q), p.max(*q))))
            .map(|q| id[&q])
            .collect();
        rotation.push(rot);
        boundary.push(!triangles_at(p).iter().all(|t| has(t)));
    }
    let graph = PlanarEmbeddedGraph::new(rotation, boundary)?;
    Ok((graph, coords))
}

/// Grows a connected interior of `interior` lattice points, adds its
/// neighbors, drops each of those with probability `drop`, and keeps the
/// result if it is a simple triangulated disk with at most `max_vertices`
/// vertices.
pub fn try_random_disk<R: Rng>(
    rng: &mut R,
    interior: usize,
    drop: f64,
    max_vertices: usize,
) -> Option<PlanarEmbeddedGraph> {
    let mut inner: Vec<LatticePoint> = vec![(0, 0)];
    let mut inner_set: BTreeSet<LatticePoint> = inner.iter().copied().collect();
    while inner.len() < interior {
        let &(i, j) = inner.choose(rng)?;
        let d = DIRS.choose(rng)?;
        let q = (i + d.0, j + d.1);
        if inner_set.insert(q) {
            inner.push(q);
        }
    }
    let mut points = inner_set.clone();
    for &(i, j) in &inner {
        for d in DIRS {
            let q = (i + d.0, j + d.1);
            if !inner_set.contains(&q) && !rng.gen_bool(drop) {
                points.insert(q);
            }
        }
    }
    let pts: Vec<LatticePoint> = points.into_iter().collect();
    let (graph, _) = lattice_disk(&pts).ok()?;
    if graph.vertex_count() > max_vertices || graph.triangulated_disk_defect().is_some() {
        return None;
    }
    Some(graph)
}

/// A random simple triangulated disk with at most `max_vertices` vertices.
pub fn random_disk<R: Rng>(rng: &mut R, max_vertices: usize) -> Result<PlanarEmbeddedGraph> {
    if max_vertices < 4 {
        return Err(Error::Precondition("a triangulated disk needs at least 4 vertices".into()));
    }
    let cap = (max_vertices / 2).max(1);
    for _ in 0..10_000 {
        let k = rng.gen_range(1..=cap);
        if let Some(g) = try_random_disk(rng, k, 0.3, max_vertices) {
            return Ok(g);
        }
    }
    Err(Error::Precondition(format!("no disk with at most {max_vertices} vertices found")))
}

/// A random disk laid out with boundary radii drawn from `[0.6, 1.4]`.
pub fn random_packing<R: Rng>(
    rng: &mut R,
    max_vertices: usize,
) -> Result<(PlanarEmbeddedGraph, Packing)> {
    for _ in 0..100 {
        let graph = random_disk(rng, max_vertices)?;
        let radii = graph
            .vertices()
            .filter(|&v| graph.is_boundary(v))
            .map(|v| (v, rng.gen_range(0.6..1.4)))
            .collect();
        let problem = LayoutProblem::new(graph.clone(), radii)?;
        if let Ok(p) = layout(&problem) {
            return Ok((graph, p));
        }
    }
    Err(Error::Precondition("random layouts kept failing".into()))
}

/// Independent uniform tags.
pub fn random_partition<R: Rng>(rng: &mut R, n: usize) -> ConstraintPartition {
    const TAGS: [Tag; 4] = [Tag::Increase, Tag::Decrease, Tag::Fixed, Tag::Free];
    ConstraintPartition::new((0..n).map(|_| TAGS[rng.gen_range(0..4)]).collect())
}
