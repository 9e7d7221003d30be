//! Planar graphs given by a rotation system.
//!
//! Vertex ids are dense integers `1..=n`. The rotation of a vertex lists its
//! neighbors in counterclockwise order. Faces are traced with the rule
//! `u -> v` is followed by `v -> w` where `w` precedes `u` in the rotation of
//! `v`, so bounded faces come out counterclockwise and the outer face
//! clockwise.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// An undirected edge stored with `lo < hi`.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarEmbeddedGraph {
    rotation: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<Edge, usize>,
    faces: Vec<Vec<usize>>,
    outer_face: Option<usize>,
}

impl PlanarEmbeddedGraph {
    /// Builds a graph from per-vertex counterclockwise neighbor lists
    /// (`rotation[v - 1]` is the rotation of vertex `v`) and boundary flags.
    ///
    /// Edges are implied by the rotations and must appear at both endpoints.
    /// The embedding must be planar and connected (`n - m + f = 2`).
    pub fn new(rotation: Vec<Vec<usize>>, boundary: Vec<bool>) -> Result<Self> {
        let n = rotation.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if boundary.len() != n {
            return Err(Error::SizeMismatch(format!(
                "{} rotations but {} boundary flags",
                n,
                boundary.len()
            )));
        }
        let mut edges = Vec::new();
        for (idx, rot) in rotation.iter().enumerate() {
            let v = idx + 1;
            for (k, &u) in rot.iter().enumerate() {
                if u == 0 || u > n {
                    return Err(Error::UnknownVertex(u));
                }
                if u == v {
                    return Err(Error::InvalidGraph(format!("self-loop at vertex {v}")));
                }
                if rot[..k].contains(&u) {
                    return Err(Error::InvalidGraph(format!(
                        "vertex {u} listed twice in the rotation of {v}"
                    )));
                }
                if !rotation[u - 1].contains(&v) {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({v},{u}) appears in the rotation of {v} but not of {u}"
                    )));
                }
                if v < u {
                    edges.push((v, u));
                }
            }
        }
        edges.sort_unstable();
        let edge_lookup = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        let mut graph = Self {
            rotation,
            boundary,
            edges,
            edge_lookup,
            faces: Vec::new(),
            outer_face: None,
        };
        graph.faces = graph.trace_faces();
        let f = if graph.edges.is_empty() { 1 } else { graph.faces.len() };
        let euler = n as i64 - graph.edges.len() as i64 + f as i64;
        if euler != 2 {
            return Err(Error::InvalidGraph(format!(
                "rotation system is not a connected planar embedding (n - m + f = {euler})"
            )));
        }
        graph.outer_face = graph.find_outer_face();
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.rotation.len()
    }

    /// Edges in canonical (lexicographic) order; row `k` of every
    /// edge-indexed matrix refers to `edges()[k]`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edge_lookup.get(&key).copied()
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.vertex_count() {
            Err(Error::UnknownVertex(v))
        } else {
            Ok(())
        }
    }

    /// Counterclockwise neighbors of `v`.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v - 1]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v - 1].len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v - 1]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.vertices().filter(|&v| !self.is_boundary(v))
    }

    /// All faces of the embedding on the sphere, each as its cyclic vertex
    /// sequence.
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// The face bounded by exactly the boundary-flagged vertices, when it can
    /// be identified unambiguously.
    pub fn outer_face(&self) -> Option<&[usize]> {
        self.outer_face.map(|k| self.faces[k].as_slice())
    }

    /// Faces other than the outer face. Empty when no outer face is known.
    pub fn bounded_faces(&self) -> Vec<&[usize]> {
        match self.outer_face {
            Some(outer) => self
                .faces
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != outer)
                .map(|(_, f)| f.as_slice())
                .collect(),
            None => Vec::new(),
        }
    }

    fn trace_faces(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        // position of each neighbor inside a rotation
        let pos: Vec<HashMap<usize, usize>> = self
            .rotation
            .iter()
            .map(|rot| rot.iter().enumerate().map(|(k, &u)| (u, k)).collect())
            .collect();
        let mut visited: Vec<Vec<bool>> =
            self.rotation.iter().map(|r| vec![false; r.len()]).collect();
        let mut faces = Vec::new();
        for v in 1..=n {
            for k in 0..self.rotation[v - 1].len() {
                if visited[v - 1][k] {
                    continue;
                }
                let mut face = Vec::new();
                let (mut a, mut ka) = (v, k);
                while !visited[a - 1][ka] {
                    visited[a - 1][ka] = true;
                    face.push(a);
                    let b = self.rotation[a - 1][ka];
                    let rot_b = &self.rotation[b - 1];
                    let at = pos[b - 1][&a];
                    let kb = (at + rot_b.len() - 1) % rot_b.len();
                    a = b;
                    ka = kb;
                }
                faces.push(face);
            }
        }
        faces
    }

    fn find_outer_face(&self) -> Option<usize> {
        let b = self.boundary_count();
        if b == 0 {
            return None;
        }
        let mut candidates = self.faces.iter().enumerate().filter(|(_, face)| {
            face.len() == b && face.iter().all(|&v| self.is_boundary(v)) && {
                let mut sorted = (*face).clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.len() == b
            }
        });
        let first = candidates.next()?.0;
        if candidates.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    /// Checks that the graph is a simple triangulated disk: every bounded
    /// face is a triangle, the interior vertices are edge connected and every
    /// boundary vertex touches the interior. Returns a reason on failure.
    pub fn triangulated_disk_defect(&self) -> Option<String> {
        let outer = match self.outer_face {
            Some(k) => k,
            None => return Some("no outer face matches the boundary flags".into()),
        };
        if let Some(face) = self
            .faces
            .iter()
            .enumerate()
            .find(|&(k, f)| k != outer && f.len() != 3)
        {
            return Some(format!("face {:?} is not a triangle", face.1));
        }
        let interior: Vec<usize> = self.interior_vertices().collect();
        if interior.is_empty() {
            return Some("no interior vertices".into());
        }
        // edge-connectivity of the interior
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![interior[0]];
        seen[interior[0] - 1] = true;
        while let Some(v) = stack.pop() {
            for &u in self.rotation(v) {
                if !self.is_boundary(u) && !seen[u - 1] {
                    seen[u - 1] = true;
                    stack.push(u);
                }
            }
        }
        if let Some(&v) = interior.iter().find(|&&v| !seen[v - 1]) {
            return Some(format!("interior vertex {v} is not connected to vertex {}", interior[0]));
        }
        for v in self.vertices().filter(|&v| self.is_boundary(v)) {
            if self.rotation(v).iter().all(|&u| self.is_boundary(u)) {
                return Some(format!("boundary vertex {v} has no interior neighbor"));
            }
        }
        None
    }

    /// Returns a copy with the rotation of `v` reversed (mirror image at `v`).
    /// The result is generally not planar, so no validation is performed.
    #[doc(hidden)]
    pub fn with_reversed_rotation(&self, v: usize) -> Self {
        let mut g = self.clone();
        g.rotation[v - 1].reverse();
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flower4() -> PlanarEmbeddedGraph {
        PlanarEmbeddedGraph::new(
            vec![vec![5, 2, 4], vec![5, 3, 1], vec![5, 4, 2], vec![5, 1, 3], vec![1, 4, 3, 2]],
            vec![true, true, true, true, false],
        )
        .unwrap()
    }

    #[test]
    fn flower_faces_and_euler() {
        let g = flower4();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.faces().len(), 5);
        assert_eq!(g.outer_face().unwrap().len(), 4);
        assert_eq!(g.bounded_faces().len(), 4);
        assert!(g.bounded_faces().iter().all(|f| f.len() == 3));
        assert!(g.triangulated_disk_defect().is_none());
        assert_eq!(g.edge_index(5, 1), g.edge_index(1, 5));
    }

    #[test]
    fn asymmetric_rotation_rejected() {
        let err = PlanarEmbeddedGraph::new(vec![vec![2], vec![]], vec![true, true]).unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn non_planar_rotation_rejected() {
        // K4 with one rotation reversed no longer traces a sphere
        let g = PlanarEmbeddedGraph::new(
            vec![vec![2, 3, 4], vec![1, 4, 3], vec![1, 2, 4], vec![1, 3, 2]],
            vec![false; 4],
        );
        assert!(g.is_ok());
        let err = PlanarEmbeddedGraph::new(
            vec![vec![2, 3, 4], vec![1, 3, 4], vec![1, 2, 4], vec![1, 3, 2]],
            vec![false; 4],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn chordless_square_is_not_triangulated() {
        let g = PlanarEmbeddedGraph::new(
            vec![vec![2, 4], vec![3, 1], vec![4, 2], vec![1, 3]],
            vec![true; 4],
        )
        .unwrap();
        assert!(g.triangulated_disk_defect().is_some());
    }

    #[test]
    fn single_vertex() {
        let g = PlanarEmbeddedGraph::new(vec![vec![]], vec![true]).unwrap();
        assert_eq!(g.edge_count(), 0);
    }
}
