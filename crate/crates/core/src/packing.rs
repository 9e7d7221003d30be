//! Packings, radius constraints, tolerances and geometric validation.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::PlanarEmbeddedGraph;

/// Radius constraint on a single disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    /// May stay the same or grow (`V+`, drawn red).
    Increase,
    /// May stay the same or shrink (`V-`, drawn blue).
    Decrease,
    /// Radius is fixed (`V=`, drawn green).
    Fixed,
    /// Unconstrained (`V0`, drawn gray).
    Free,
}

impl Tag {
    pub fn symbol(self) -> char {
        match self {
            Tag::Increase => '+',
            Tag::Decrease => '-',
            Tag::Fixed => '=',
            Tag::Free => '0',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Tag::Increase),
            '-' => Some(Tag::Decrease),
            '=' => Some(Tag::Fixed),
            '0' => Some(Tag::Free),
            _ => None,
        }
    }

    /// Increase and Decrease swap, the others stay.
    pub fn swapped(self) -> Self {
        match self {
            Tag::Increase => Tag::Decrease,
            Tag::Decrease => Tag::Increase,
            t => t,
        }
    }

    /// Whether a fixing row for this radius belongs in the extended matrix.
    pub fn is_constrained(self) -> bool {
        !matches!(self, Tag::Free)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A total assignment of tags to vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintPartition {
    tags: Vec<Tag>,
}

impl ConstraintPartition {
    pub fn new(tags: Vec<Tag>) -> Self {
        Self { tags }
    }

    pub fn uniform(n: usize, tag: Tag) -> Self {
        Self { tags: vec![tag; n] }
    }

    /// Builds a partition from explicit `V+` and `V-` sets (1-based ids);
    /// every other vertex gets `rest`.
    pub fn from_sets(n: usize, increase: &[usize], decrease: &[usize], rest: Tag) -> Result<Self> {
        let mut tags = vec![rest; n];
        for (set, tag) in [(increase, Tag::Increase), (decrease, Tag::Decrease)] {
            for &v in set {
                if v == 0 || v > n {
                    return Err(Error::UnknownVertex(v));
                }
                tags[v - 1] = tag;
            }
        }
        Ok(Self { tags })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tag(&self, v: usize) -> Tag {
        self.tags[v - 1]
    }

    pub fn set(&mut self, v: usize, tag: Tag) {
        self.tags[v - 1] = tag;
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    /// Vertices with the given tag, in increasing order.
    pub fn members(&self, tag: Tag) -> Vec<usize> {
        (1..=self.tags.len()).filter(|&v| self.tags[v - 1] == tag).collect()
    }

    /// Exchanges `V+` and `V-`.
    pub fn swapped(&self) -> Self {
        Self { tags: self.tags.iter().map(|t| t.swapped()).collect() }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.tags.len() != n {
            return Err(Error::SizeMismatch(format!(
                "partition has {} tags for {} vertices",
                self.tags.len(),
                n
            )));
        }
        Ok(())
    }
}

/// Centers and radii of `n` disks; jointly the vector
/// `(x1, y1, r1, ..., xn, yn, rn)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Packing {
    centers: Vec<[f64; 2]>,
    radii: Vec<f64>,
}

impl Packing {
    pub fn new(centers: Vec<[f64; 2]>, radii: Vec<f64>) -> Result<Self> {
        if centers.len() != radii.len() {
            return Err(Error::SizeMismatch(format!(
                "{} centers but {} radii",
                centers.len(),
                radii.len()
            )));
        }
        if centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("packing centers"));
        }
        for (k, &r) in radii.iter().enumerate() {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::NonPositiveRadius { vertex: k + 1, value: r });
            }
        }
        Ok(Self { centers, radii })
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn center(&self, v: usize) -> [f64; 2] {
        self.centers[v - 1]
    }

    pub fn radius(&self, v: usize) -> f64 {
        self.radii[v - 1]
    }

    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// The packing as a single vector in `R^{3n}`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.centers
            .iter()
            .zip(&self.radii)
            .flat_map(|(c, &r)| [c[0], c[1], r])
            .collect()
    }

    /// Applies `x -> s x` to every coordinate and radius.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            centers: self.centers.iter().map(|c| [s * c[0], s * c[1]]).collect(),
            radii: self.radii.iter().map(|r| s * r).collect(),
        }
    }

    pub fn mean_radius(&self) -> f64 {
        self.radii.iter().sum::<f64>() / self.radii.len() as f64
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::SizeMismatch(format!(
                "packing has {} disks for {} vertices",
                self.len(),
                n
            )));
        }
        Ok(())
    }
}

/// Numerical thresholds shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisTolerances {
    /// Relative tangency residual bound, measured against `(ri + rj)^2`.
    pub tangency: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// Threshold below which a component of a unit flex counts as zero.
    pub strict: f64,
    /// Threshold above which an LP optimum counts as strictly positive.
    pub lp: f64,
}

impl Default for AnalysisTolerances {
    fn default() -> Self {
        Self { tangency: 1e-8, rank: 1e-9, strict: 1e-6, lp: 1e-7 }
    }
}

impl AnalysisTolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.tangency, self.rank, self.strict, self.lp];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Precondition("tolerances must be finite and positive".into()));
        }
        if self.strict <= self.rank {
            return Err(Error::Precondition("strict tolerance must exceed rank tolerance".into()));
        }
        Ok(())
    }
}

/// `(xi - xj)^2 + (yi - yj)^2 - (ri + rj)^2` for the pair `(i, j)`.
pub fn tangency_residual(packing: &Packing, i: usize, j: usize) -> Result<f64> {
    let n = packing.len();
    for v in [i, j] {
        if v == 0 || v > n {
            return Err(Error::UnknownVertex(v));
        }
    }
    let (pi, pj) = (packing.center(i), packing.center(j));
    let (dx, dy) = (pi[0] - pj[0], pi[1] - pj[1]);
    let s = packing.radius(i) + packing.radius(j);
    Ok(dx * dx + dy * dy - s * s)
}

/// One failed packing condition.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Tangency { edge: (usize, usize), relative_residual: f64 },
    Orientation { vertex: usize, expected: Vec<usize>, found: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Tangency { edge, relative_residual } => write!(
                f,
                "edge ({},{}) not tangent: relative residual {:e}",
                edge.0, edge.1, relative_residual
            ),
            Violation::Orientation { vertex, expected, found } => write!(
                f,
                "vertex {vertex}: neighbors appear as {found:?}, rotation is {expected:?}"
            ),
        }
    }
}

/// Checks tangency along every edge and the counterclockwise order of
/// neighbors around every vertex of degree at least three.
pub fn validate_packing(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    tol: &AnalysisTolerances,
) -> Result<Vec<Violation>> {
    packing.check_len(graph.vertex_count())?;
    let mut violations = Vec::new();
    for &(i, j) in graph.edges() {
        let s = packing.radius(i) + packing.radius(j);
        let rel = tangency_residual(packing, i, j)? / (s * s);
        if rel.abs() > tol.tangency || !rel.is_finite() {
            violations.push(Violation::Tangency { edge: (i, j), relative_residual: rel });
        }
    }
    for v in graph.vertices() {
        let rot = graph.rotation(v);
        if rot.len() < 3 {
            continue;
        }
        let c = packing.center(v);
        let mut by_angle: Vec<(f64, usize)> = rot
            .iter()
            .map(|&u| {
                let p = packing.center(u);
                ((p[1] - c[1]).atan2(p[0] - c[0]), u)
            })
            .collect();
        by_angle.sort_by(|a, b| a.0.total_cmp(&b.0));
        let found: Vec<usize> = by_angle.into_iter().map(|(_, u)| u).collect();
        if !same_cycle(rot, &found) {
            violations.push(Violation::Orientation {
                vertex: v,
                expected: rot.to_vec(),
                found,
            });
        }
    }
    Ok(violations)
}

/// Equality of cyclic sequences up to rotation (not reflection).
fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    match b.iter().position(|&x| x == a[0]) {
        Some(shift) => (0..a.len()).all(|k| a[k] == b[(k + shift) % b.len()]),
        None => false,
    }
}

/// Angle at the center of the disk of radius `x` in the triangle formed by
/// three mutually tangent disks of radii `x`, `y`, `z`.
///
/// Evaluated as `2 atan(sqrt(y z / (x (x + y + z))))`, which equals the law
/// of cosines form but keeps full precision near `0` and `pi`.
pub fn triangle_angle(x: f64, y: f64, z: f64) -> Result<f64> {
    for (k, r) in [x, y, z].into_iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveRadius { vertex: k + 1, value: r });
        }
    }
    Ok(angle_unchecked(x, y, z))
}

#[inline]
pub(crate) fn angle_unchecked(x: f64, y: f64, z: f64) -> f64 {
    2.0 * (y * z / (x * (x + y + z))).sqrt().atan()
}

/// Sum of triangle angles at `v` over consecutive neighbor pairs of its
/// rotation, with the radii taken from `radii[v - 1]`.
pub fn angle_sum(graph: &PlanarEmbeddedGraph, radii: &[f64], v: usize) -> Result<f64> {
    graph.check_vertex(v)?;
    if radii.len() != graph.vertex_count() {
        return Err(Error::SizeMismatch(format!(
            "{} radii for {} vertices",
            radii.len(),
            graph.vertex_count()
        )));
    }
    if graph.is_boundary(v) {
        return Err(Error::BoundaryVertex(v));
    }
    let rot = graph.rotation(v);
    let mut total = 0.0;
    for k in 0..rot.len() {
        let (u, w) = (rot[k], rot[(k + 1) % rot.len()]);
        total += triangle_angle(radii[v - 1], radii[u - 1], radii[w - 1])?;
    }
    Ok(total)
}

/// `angle_sum(v) - 2 pi`.
pub fn angle_defect(graph: &PlanarEmbeddedGraph, radii: &[f64], v: usize) -> Result<f64> {
    Ok(angle_sum(graph, radii, v)? - 2.0 * PI)
}
