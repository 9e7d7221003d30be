//! Named instances and the closed-form analysis of the ten-disk example.
//!
//! Colors: `V-` blue, `V+` red, `V=` green, `V0` gray.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::generate::lattice_disk;
use crate::graph::PlanarEmbeddedGraph;
use crate::layout::{layout, LayoutProblem};
use crate::packing::{angle_unchecked, ConstraintPartition, Packing, Tag};

pub const CASE_NAMES: [&str; 6] =
    ["flower4", "prestress10", "general10", "prestress15", "sumr27", "fernique_ratio"];

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub name: &'static str,
    pub graph: PlanarEmbeddedGraph,
    pub packing: Packing,
    pub partition: ConstraintPartition,
    pub description: &'static str,
}

/// Builds a packing case. `fernique_ratio` is scalar-only; see
/// [`conjecture_ratio_root`].
pub fn build_case(name: &str) -> Result<CaseRecord> {
    match name {
        "flower4" => flower4(),
        "prestress10" => prestress10(),
        "general10" => general10(),
        "prestress15" => prestress15(),
        "sumr27" => sumr27(),
        "fernique_ratio" => Err(Error::Precondition(
            "fernique_ratio is a scalar case without a packing".into(),
        )),
        other => Err(Error::UnknownCase(other.to_string())),
    }
}

fn alpha(x: f64, y: f64, z: f64) -> f64 {
    angle_unchecked(x, y, z)
}

/// Root of an increasing function by bisection on `log x` over
/// `[1e-9, 1e9]`.
fn increasing_root(f: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let (mut lo, mut hi) = ((1e-9f64).ln(), (1e9f64).ln());
    if !(f(lo.exp()) < 0.0 && f(hi.exp()) > 0.0) {
        return Err(Error::NoRoot(what.to_string()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid.exp()) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

pub fn flower4() -> Result<CaseRecord> {
    let graph = PlanarEmbeddedGraph::new(
        vec![vec![5, 2, 4], vec![5, 3, 1], vec![5, 4, 2], vec![5, 1, 3], vec![1, 4, 3, 2]],
        vec![true, true, true, true, false],
    )?;
    let packing = Packing::new(
        vec![[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0], [-1.0, 1.0], [0.0, 0.0]],
        vec![1.0, 1.0, 1.0, 1.0, SQRT_2 - 1.0],
    )?;
    let partition = ConstraintPartition::from_sets(5, &[5], &[1, 2, 3, 4], Tag::Free)?;
    Ok(CaseRecord {
        name: "flower4",
        graph,
        packing,
        partition,
        description: "four unit disks around a small center disk; outer disks may shrink, center may grow",
    })
}

/// The ten-disk graph: interior disks 4 and 7, boundary cycle
/// 2, 1, 3, 5, 6, 8, 9, 10 counterclockwise. Mirror symmetric through 4 and 7.
pub fn ten_disk_graph() -> Result<PlanarEmbeddedGraph> {
    let rotation = vec![
        vec![3, 4, 2],
        vec![1, 4, 7, 10],
        vec![5, 4, 1],
        vec![2, 1, 3, 5, 7],
        vec![6, 7, 4, 3],
        vec![8, 7, 5],
        vec![5, 6, 8, 9, 10, 2, 4],
        vec![9, 7, 6],
        vec![10, 7, 8],
        vec![2, 7, 9],
    ];
    let mut boundary = vec![true; 10];
    boundary[3] = false;
    boundary[6] = false;
    PlanarEmbeddedGraph::new(rotation, boundary)
}

/// Radius `s` of disks 2 and 5 for which disk 4 of radius `q`, surrounded by
/// unit disks 1, 3, 7 and disks 2, 5, closes up.
fn symmetric_s(q: f64) -> Result<f64> {
    increasing_root(|s| alpha(q, 1.0, 1.0) + 4.0 * alpha(q, s, 1.0) - 2.0 * PI, "symmetric s")
}

/// `(q, s)`: the symmetric radii where both contours meet.
pub fn prestress10_radii() -> Result<(f64, f64)> {
    let g = |q: f64| -> Result<f64> {
        let s = symmetric_s(q)?;
        Ok(3.0 * alpha(1.0, q, q) + 4.0 * alpha(1.0, q, s) - 2.0 * PI)
    };
    let (mut lo, mut hi) = (0.3f64, 0.95f64);
    let (glo, ghi) = (g(lo)?, g(hi)?);
    if glo.signum() == ghi.signum() {
        return Err(Error::NoRoot("symmetric ten-disk radii".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid)?.signum() == glo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    Ok((q, symmetric_s(q)?))
}

fn ten_disk_case(
    name: &'static str,
    boundary: [(usize, f64); 8],
    partition: ConstraintPartition,
    description: &'static str,
) -> Result<CaseRecord> {
    let graph = ten_disk_graph()?;
    let problem = LayoutProblem::new(graph.clone(), boundary.to_vec())?;
    let packing = layout(&problem)?;
    Ok(CaseRecord { name, graph, packing, partition, description })
}

pub fn prestress10() -> Result<CaseRecord> {
    let (q, s) = prestress10_radii()?;
    let boundary = [(1, 1.0), (2, s), (3, 1.0), (5, s), (6, q), (8, q), (9, q), (10, q)];
    let partition = ConstraintPartition::from_sets(10, &[4, 6, 8, 9, 10], &[1, 3, 7], Tag::Free)?;
    ten_disk_case(
        "prestress10",
        boundary,
        partition,
        "mirror-symmetric ten-disk packing; infinitesimally flexible by trading disk 2 against disk 5, blocked at second order",
    )
}

pub fn general10() -> Result<CaseRecord> {
    let boundary =
        [(1, 0.9), (2, 0.75), (3, 1.0), (5, 0.8), (6, 0.7), (8, 0.65), (9, 0.72), (10, 0.68)];
    let partition = ConstraintPartition::from_sets(10, &[], &[], Tag::Free)?;
    let mut partition = partition;
    for v in [2, 4, 5, 6, 8, 9, 10] {
        partition.set(v, Tag::Fixed);
    }
    ten_disk_case(
        "general10",
        boundary,
        partition,
        "ten-disk graph with generic radii; green disks 2, 4, 5, 6, 8, 9, 10 fixed",
    )
}

/// Lattice points of a 27-vertex triangulated disk with 17 boundary vertices.
pub const SUMR27_POINTS: [(i32, i32); 27] = [
    (-4, 0), (-4, 1), (-4, 2), (-3, -1), (-3, 0), (-3, 1), (-3, 2), (-2, -1), (-2, 0),
    (-2, 1), (-2, 2), (-2, 3), (-1, -1), (-1, 0), (-1, 1), (-1, 2), (-1, 3), (0, -2),
    (0, -1), (0, 0), (0, 1), (0, 2), (1, -2), (1, -1), (1, 0), (2, -2), (2, -1),
];

pub fn sumr27() -> Result<CaseRecord> {
    let (graph, _) = lattice_disk(&SUMR27_POINTS)?;
    let boundary: Vec<(usize, f64)> = graph
        .vertices()
        .filter(|&v| graph.is_boundary(v))
        .map(|v| (v, 1.0))
        .collect();
    let packing = layout(&LayoutProblem::new(graph.clone(), boundary)?)?;
    let n = graph.vertex_count();
    Ok(CaseRecord {
        name: "sumr27",
        graph,
        packing,
        partition: ConstraintPartition::uniform(n, Tag::Free),
        description: "27 disks, 61 tangencies, 17 on the boundary; unit boundary radii",
    })
}

/// The fifteen-disk graph with threefold rotational and mirror symmetry.
/// Interior: a subdivided triangle with corners 4, 5, 6 and side midpoints
/// 1, 2, 3. Boundary, counterclockwise: 8, 7, 9, 11, 10, 12, 14, 15, 13,
/// where 8, 11, 14 cap the corners and the other six line the sides.
pub fn fifteen_disk_graph() -> Result<PlanarEmbeddedGraph> {
    let polar = |deg: f64, r: f64| [r * deg.to_radians().cos(), r * deg.to_radians().sin()];
    let mut sketch = vec![[0.0; 2]; 15];
    for (v, deg, r) in [
        (1, 270.0, 1.0), (2, 30.0, 1.0), (3, 150.0, 1.0),
        (4, 90.0, 2.0), (5, 210.0, 2.0), (6, 330.0, 2.0),
        (8, 90.0, 3.2), (11, 210.0, 3.2), (14, 330.0, 3.2),
        (7, 130.0, 2.6), (9, 170.0, 2.6), (10, 250.0, 2.6),
        (12, 290.0, 2.6), (15, 10.0, 2.6), (13, 50.0, 2.6),
    ] {
        sketch[v - 1] = polar(deg, r);
    }
    let edges = [
        (1, 2), (2, 3), (1, 3),
        (1, 5), (1, 6), (2, 6), (2, 4), (3, 4), (3, 5),
        (4, 7), (3, 7), (3, 9), (5, 9), (7, 9),
        (5, 10), (1, 10), (1, 12), (6, 12), (10, 12),
        (6, 15), (2, 15), (2, 13), (4, 13), (15, 13),
        (4, 8), (8, 7), (8, 13), (5, 11), (11, 9), (11, 10), (6, 14), (14, 12), (14, 15),
    ];
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); 15];
    for (a, b) in edges {
        nbrs[a - 1].push(b);
        nbrs[b - 1].push(a);
    }
    let rotation = nbrs
        .into_iter()
        .enumerate()
        .map(|(k, mut list)| {
            let c = sketch[k];
            let angle = |u: &usize| {
                let p = sketch[*u - 1];
                (p[1] - c[1]).atan2(p[0] - c[0])
            };
            list.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
            list
        })
        .collect();
    let boundary = (1..=15).map(|v| v > 6).collect();
    PlanarEmbeddedGraph::new(rotation, boundary)
}

/// Symmetric fifteen-disk packing: radius `c` on the mirror boundary disks
/// and `d` on the other six boundary disks.
pub fn fifteen_disk_packing(c: f64, d: f64) -> Result<(PlanarEmbeddedGraph, Packing)> {
    let graph = fifteen_disk_graph()?;
    let boundary = (7..=15).map(|v| (v, if matches!(v, 8 | 11 | 14) { c } else { d })).collect();
    let packing = layout(&LayoutProblem::new(graph.clone(), boundary)?)?;
    Ok((graph, packing))
}

/// Fifteen disks with a one-parameter first-order motion: 7, 10, 15 grow
/// while 9, 12, 13 shrink at the same rate. A stress blocks it.
pub fn prestress15() -> Result<CaseRecord> {
    let (graph, packing) = fifteen_disk_packing(1.0, 0.8)?;
    let partition = ConstraintPartition::from_sets(
        15,
        &[1, 2, 3, 8, 11, 14],
        &[4, 5, 6],
        Tag::Free,
    )?;
    Ok(CaseRecord {
        name: "prestress15",
        graph,
        packing,
        partition,
        description: "fifteen disks with threefold symmetry; six gray boundary disks trade radius in pairs",
    })
}

/// Radius of disk 5 on the first contour: disk 4 of radius `q` closes up
/// around unit disks 1, 3, 7 and disks 2 and 5.
pub fn min_r5(q: f64, r2: f64) -> Result<f64> {
    increasing_root(
        |r5| alpha(q, 1.0, 1.0) + 2.0 * alpha(q, r5, 1.0) + 2.0 * alpha(q, r2, 1.0) - 2.0 * PI,
        "first contour",
    )
}

/// Radius of disk 5 on the second contour: unit disk 7 closes up around four
/// disks of radius `q` and disks 2 and 5.
pub fn max_r5(q: f64, r2: f64) -> Result<f64> {
    increasing_root(
        |r5| 3.0 * alpha(1.0, q, q) + 2.0 * alpha(1.0, q, r2) + 2.0 * alpha(1.0, q, r5) - 2.0 * PI,
        "second contour",
    )
}

/// Closed form of [`min_r5`].
pub fn min_r5_closed(q: f64, r2: f64) -> f64 {
    let a = ((q * q + 2.0 * q - 1.0) / (q + 1.0).powi(2)).acos();
    let b = (((q - 1.0) * r2 + q * (q + 1.0)) / ((q + 1.0) * (q + r2))).acos();
    -2.0 * q * (q + 1.0) * ((a + 2.0 * b) / 4.0).cos().powi(2)
        / ((q + 1.0) * (a / 2.0 + b).cos() + q - 1.0)
}

/// Closed form of [`max_r5`].
pub fn max_r5_closed(q: f64, r2: f64) -> f64 {
    let a = ((-q * q + 2.0 * q + 1.0) / (q + 1.0).powi(2)).acos();
    let b = ((-q * r2 + q + r2 + 1.0) / (q * r2 + q + r2 + 1.0)).acos();
    -2.0 * (q + 1.0) * ((3.0 * a + 2.0 * b) / 4.0).cos().powi(2)
        / ((q + 1.0) * (1.5 * a + b).cos() - q + 1.0)
}

pub fn gap(q: f64, r2: f64) -> Result<f64> {
    Ok(min_r5(q, r2)? - max_r5(q, r2)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapAnalysis {
    pub r2: f64,
    pub gap: f64,
    pub first_derivative: f64,
    pub second_derivative: f64,
}

/// Minimizes `gap(q, .)` over `range` by golden-section search and takes
/// central differences with step `1e-4 r2*` at the minimizer.
pub fn gap_analysis(q: f64, range: (f64, f64), tol: f64) -> Result<GapAnalysis> {
    let (mut a, mut b) = range;
    if !(a > 0.0 && b > a) {
        return Err(Error::Precondition(format!("bad range {range:?}")));
    }
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (gap(q, c)?, gap(q, d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = gap(q, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = gap(q, d)?;
        }
    }
    let r2 = 0.5 * (a + b);
    let width = range.1 - range.0;
    if r2 - range.0 < 1e-3 * width || range.1 - r2 < 1e-3 * width {
        return Err(Error::NoRoot("gap has no interior minimum in range".into()));
    }
    let h = 1e-4 * r2;
    let (g0, gp, gm) = (gap(q, r2)?, gap(q, r2 + h)?, gap(q, r2 - h)?);
    Ok(GapAnalysis {
        r2,
        gap: g0,
        first_derivative: (gp - gm) / (2.0 * h),
        second_derivative: (gp - 2.0 * g0 + gm) / (h * h),
    })
}

pub const CONJECTURE_COEFFS: [f64; 9] =
    [89.0, 1344.0, 4008.0, -464.0, -2410.0, 176.0, 296.0, -96.0, 1.0];

/// Horner evaluation of the degree-8 polynomial, highest power first.
pub fn conjecture_poly(x: f64) -> f64 {
    CONJECTURE_COEFFS.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Root of the conjecture polynomial in `(0.6, 0.7)` by bisection down to
/// `tol` (or machine resolution).
pub fn conjecture_ratio_root(tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.6f64, 0.7f64);
    let plo = conjecture_poly(lo);
    debug_assert!(plo * conjecture_poly(hi) < 0.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if conjecture_poly(mid).signum() == plo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if conjecture_poly(lo).abs() <= conjecture_poly(hi).abs() {
        lo
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flower_case_shape() {
        let c = flower4().unwrap();
        assert_eq!((c.graph.vertex_count(), c.graph.edge_count()), (5, 8));
    }

    #[test]
    fn ten_disk_counts() {
        let g = ten_disk_graph().unwrap();
        assert_eq!((g.vertex_count(), g.edge_count(), g.boundary_count()), (10, 19, 8));
        assert!(g.triangulated_disk_defect().is_none());
    }

    #[test]
    fn symmetric_radii() {
        let (q, s) = prestress10_radii().unwrap();
        assert!((q - 0.6965782549057405).abs() < 1e-10);
        assert!((s - 0.9832875489946682).abs() < 1e-10);
        // both contours pass through the symmetric point
        assert!((min_r5(q, s).unwrap() - s).abs() < 1e-9);
        assert!((max_r5(q, s).unwrap() - s).abs() < 1e-9);
    }

    #[test]
    fn closed_forms_agree_at_center() {
        let (q, s) = prestress10_radii().unwrap();
        assert!((min_r5_closed(q, s) - min_r5(q, s).unwrap()).abs() < 1e-9);
        assert!((max_r5_closed(q, s) - max_r5(q, s).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sumr27_counts() {
        let c = sumr27().unwrap();
        let g = &c.graph;
        assert_eq!((g.vertex_count(), g.edge_count(), g.boundary_count()), (27, 61, 17));
    }

    #[test]
    fn fifteen_disk_counts() {
        let c = prestress15().unwrap();
        let g = &c.graph;
        assert_eq!((g.vertex_count(), g.edge_count(), g.boundary_count()), (15, 33, 9));
        let r = c.packing.radii();
        for orbit in [[1, 2, 3], [4, 5, 6]] {
            assert!((r[orbit[0] - 1] - r[orbit[1] - 1]).abs() < 1e-9);
            assert!((r[orbit[0] - 1] - r[orbit[2] - 1]).abs() < 1e-9);
        }
    }

    #[test]
    fn conjecture_root() {
        let x = conjecture_ratio_root(1e-15);
        assert!(x > 0.650 && x < 0.652);
        assert!(conjecture_poly(x).abs() < 1e-12);
    }

    #[test]
    fn unknown_case() {
        assert!(matches!(build_case("nope"), Err(Error::UnknownCase(_))));
    }
}
