//! Second-order analysis of proper flexes.
//!
//! Along a proper flex `p'` the disks whose radii strictly change are free
//! to move either way at second order, so the partition is refined first.
//! Then exactly one of two things holds: some `p''` satisfies
//! `R(p) p'' = (r'_i + r'_j)^2 - |p'_i - p'_j|^2` with the refined radius
//! signs, or an equilibrium stress with the refined (non-strict) radial
//! signs makes `sum w_ij (|p'_i - p'_j|^2 - (r'_i + r'_j)^2)` positive and
//! blocks the flex. A packing whose every proper flex is blocked is
//! prestress stable and therefore rigid.

use std::fmt;

use crate::error::{Error, Result};
use crate::first_order::{
    check_inputs, flex_program, normalized, proper_flex_unchecked, stress_program, RadialRule,
    Stress,
};
use crate::graph::PlanarEmbeddedGraph;
use crate::linalg::{self, dot};
use crate::lp::{self, Bound, LinearProgram, LpStatus};
use crate::packing::{AnalysisTolerances, ConstraintPartition, Packing, Tag};
use crate::rigidity::{
    column, is_proper, rigidity_matrix_unchecked, trivial_flex_basis, Coord, FlexVector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RefinedPartition {
    pub partition: ConstraintPartition,
    /// Vertices moved from `V+` or `V-` to `V0`.
    pub moved: Vec<usize>,
    /// Some constrained `|r'|` lies within a decade of the threshold.
    pub sensitive: bool,
}

/// Moves every `Increase`/`Decrease` vertex whose radius changes by more
/// than `tol_strict` (relative to `|flex|`) to `Free`.
pub fn refine_partition(
    partition: &ConstraintPartition,
    flex: &FlexVector,
    tol_strict: f64,
) -> Result<RefinedPartition> {
    let n = partition.len();
    if flex.len() != n || flex.0.len() != 3 * n {
        return Err(Error::SizeMismatch(format!(
            "flex has {} entries for {n} vertices",
            flex.0.len()
        )));
    }
    let scale = flex.norm();
    let mut refined = partition.clone();
    let mut moved = Vec::new();
    let mut sensitive = false;
    for v in 1..=n {
        if !matches!(partition.tag(v), Tag::Increase | Tag::Decrease) || scale == 0.0 {
            continue;
        }
        let r = flex.r(v).abs() / scale;
        if r > tol_strict / 10.0 && r <= tol_strict * 10.0 {
            sensitive = true;
        }
        if r > tol_strict {
            refined.set(v, Tag::Free);
            moved.push(v);
        }
    }
    Ok(RefinedPartition { partition: refined, moved, sensitive })
}

/// `(r'_i + r'_j)^2 - |p'_i - p'_j|^2` per edge, the target of `R(p) p''`.
pub fn extension_rhs(graph: &PlanarEmbeddedGraph, flex: &FlexVector) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            let (dx, dy) = (flex.x(i) - flex.x(j), flex.y(i) - flex.y(j));
            let s = flex.r(i) + flex.r(j);
            s * s - dx * dx - dy * dy
        })
        .collect()
}

fn check_flex(graph: &PlanarEmbeddedGraph, flex: &FlexVector) -> Result<()> {
    if flex.0.len() != 3 * graph.vertex_count() {
        return Err(Error::SizeMismatch(format!(
            "flex has {} entries for {} vertices",
            flex.0.len(),
            graph.vertex_count()
        )));
    }
    if !flex.is_finite() {
        return Err(Error::NonFinite("flex"));
    }
    Ok(())
}

/// A second-order vector `p''` extending `flex` under the refined signs, for
/// the flex scaled to unit norm.
pub fn is_extendable(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    flex: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<Option<FlexVector>> {
    check_inputs(graph, packing, partition, tol)?;
    check_flex(graph, flex)?;
    let unit = flex.normalized();
    let refined = refine_partition(partition, &unit, tol.strict)?;
    extension_unchecked(graph, packing, &refined.partition, &unit, tol)
}

fn extension_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    refined: &ConstraintPartition,
    unit: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<Option<FlexVector>> {
    let n = graph.vertex_count();
    let (np, rbar) = normalized(packing);
    let r = rigidity_matrix_unchecked(graph, &np).matrix;
    let rhs = extension_rhs(graph, unit);
    let mut program = LinearProgram::new(3 * n);
    for (k, &b) in rhs.iter().enumerate() {
        program.add_eq(r.row(k).to_vec(), b);
    }
    for v in 1..=n {
        let bound = match refined.tag(v) {
            Tag::Increase => Bound::NONNEGATIVE,
            Tag::Decrease => Bound { lower: None, upper: Some(0.0) },
            Tag::Fixed => Bound::between(0.0, 0.0),
            Tag::Free => Bound::FREE,
        };
        program.set_bound(column(v, Coord::R), bound);
    }
    let out = lp::solve(&program, tol.lp)?;
    match out.status {
        LpStatus::Infeasible => Ok(None),
        LpStatus::Optimal => {
            let x = out.point.expect("optimal point");
            let residual = r
                .mul_vec(&x)
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let scale = 1.0 + rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if residual > tol.lp.sqrt() * scale {
                return Err(Error::LpBreakdown(format!(
                    "extension residual {residual:e} after a feasible phase one"
                )));
            }
            Ok(Some(FlexVector(x.into_iter().map(|v| v / rbar).collect())))
        }
        LpStatus::Unbounded => Err(Error::LpBreakdown("extension program is unbounded".into())),
    }
}

/// `sum_ij w_ij (|p'_i - p'_j|^2 - (r'_i + r'_j)^2)`.
pub fn blocking_value(stress: &Stress, flex: &FlexVector) -> f64 {
    let c: Vec<f64> = stress
        .edges
        .iter()
        .map(|&(i, j)| {
            let (dx, dy) = (flex.x(i) - flex.x(j), flex.y(i) - flex.y(j));
            let s = flex.r(i) + flex.r(j);
            dx * dx + dy * dy - s * s
        })
        .collect();
    dot(&stress.values, &c)
}

/// An equilibrium stress with radial sums `>= 0` on the refined `V-`,
/// `<= 0` on the refined `V+` and `= 0` on the refined `V0` whose blocking
/// value on the unit flex exceeds `tol.lp`.
pub fn find_blocking_stress(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    flex: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<Option<Stress>> {
    check_inputs(graph, packing, partition, tol)?;
    check_flex(graph, flex)?;
    let unit = flex.normalized();
    let refined = refine_partition(partition, &unit, tol.strict)?;
    Ok(blocking_unchecked(graph, packing, &refined.partition, &unit, tol)?.0)
}

fn blocking_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    refined: &ConstraintPartition,
    unit: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<(Option<Stress>, f64)> {
    let (np, _) = normalized(packing);
    let m = graph.edge_count();
    let rules: Vec<RadialRule> = refined
        .tags()
        .iter()
        .map(|t| match t {
            Tag::Decrease => RadialRule::Positive { margin: false },
            Tag::Increase => RadialRule::Negative { margin: false },
            Tag::Fixed => RadialRule::Any,
            Tag::Free => RadialRule::Zero,
        })
        .collect();
    let probe = Stress { edges: graph.edges().to_vec(), values: vec![0.0; m] };
    let c: Vec<f64> = (0..m)
        .map(|k| {
            let mut s = probe.clone();
            s.values[k] = 1.0;
            blocking_value(&s, unit)
        })
        .collect();
    let program = stress_program(graph, &np, &rules, Some(&c));
    let out = lp::solve(&program, tol.lp)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::LpBreakdown(format!("blocking program ended {:?}", out.status)));
    }
    let stress = Stress { edges: graph.edges().to_vec(), values: out.point.expect("point")[..m].to_vec() };
    let value = blocking_value(&stress, unit);
    if value <= tol.lp {
        return Ok((None, value));
    }
    // re-verify on the geometry directly
    let eq = stress.equilibrium_residual(&np);
    let sums = stress.radial_sums(&np);
    let sign_ok = (1..=refined.len()).all(|v| {
        let s = sums[v - 1];
        match refined.tag(v) {
            Tag::Decrease => s >= -tol.lp,
            Tag::Increase => s <= tol.lp,
            Tag::Free => s.abs() <= tol.lp,
            Tag::Fixed => true,
        }
    });
    if eq > tol.lp || !sign_ok {
        return Err(Error::LpBreakdown("blocking stress failed re-verification".into()));
    }
    Ok((Some(stress), value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderVerdict {
    /// Unit flex, orthogonal to rigid motions.
    pub flex: FlexVector,
    pub refined: RefinedPartition,
    pub extension: Option<FlexVector>,
    pub blocking_stress: Option<Stress>,
    /// Optimal blocking value (whether or not it clears the threshold).
    pub blocking_value: f64,
}

impl SecondOrderVerdict {
    pub fn extendable(&self) -> bool {
        self.extension.is_some()
    }

    pub fn blocked(&self) -> bool {
        self.blocking_stress.is_some()
    }

    /// Exactly one of extension and blocking stress was found.
    pub fn exclusive(&self) -> bool {
        self.extendable() != self.blocked()
    }
}

/// Analyzes a single flex direction.
pub fn analyze_flex(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    flex: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<SecondOrderVerdict> {
    check_inputs(graph, packing, partition, tol)?;
    check_flex(graph, flex)?;
    analyze_unchecked(graph, packing, partition, flex, tol)
}

fn analyze_unchecked(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    flex: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<SecondOrderVerdict> {
    let unit = flex.normalized();
    let refined = refine_partition(partition, &unit, tol.strict)?;
    let extension = extension_unchecked(graph, packing, &refined.partition, &unit, tol)?;
    let (blocking_stress, blocking_value) =
        blocking_unchecked(graph, packing, &refined.partition, &unit, tol)?;
    Ok(SecondOrderVerdict { flex: unit, refined, extension, blocking_stress, blocking_value })
}

/// Shape of the cone of proper flexes modulo rigid motions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlexCone {
    /// Only rigid motions.
    Trivial,
    /// A single direction.
    Ray,
    /// A direction and its negative.
    Line,
    /// Spans more than one dimension; not analyzed in full.
    HigherDimensional,
}

impl fmt::Display for FlexCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlexCone::Trivial => "trivial",
            FlexCone::Ray => "ray",
            FlexCone::Line => "line",
            FlexCone::HigherDimensional => "higher-dimensional",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderReport {
    pub cone: FlexCone,
    pub verdicts: Vec<SecondOrderVerdict>,
    /// Every analyzed direction is blocked; `None` when the cone is too large
    /// to decide.
    pub prestress_stable: Option<bool>,
}

impl SecondOrderReport {
    pub fn flex_dim(&self) -> usize {
        match self.cone {
            FlexCone::Trivial => 0,
            FlexCone::Ray | FlexCone::Line => 1,
            FlexCone::HigherDimensional => 2,
        }
    }
}

/// Finds the proper flex cone and analyzes each of its directions when it
/// is contained in a line.
pub fn second_order_analysis(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    tol: &AnalysisTolerances,
) -> Result<SecondOrderReport> {
    check_inputs(graph, packing, partition, tol)?;
    let Some(f) = proper_flex_unchecked(graph, packing, partition, tol)? else {
        return Ok(SecondOrderReport {
            cone: FlexCone::Trivial,
            verdicts: Vec::new(),
            prestress_stable: Some(true),
        });
    };
    if spans_beyond(graph, packing, partition, &f, tol)? {
        let v = analyze_unchecked(graph, packing, partition, &f, tol)?;
        return Ok(SecondOrderReport {
            cone: FlexCone::HigherDimensional,
            verdicts: vec![v],
            prestress_stable: None,
        });
    }
    let neg = f.negated();
    let (cone, directions) = if is_proper(partition, &neg, tol.lp) {
        (FlexCone::Line, vec![f, neg])
    } else {
        (FlexCone::Ray, vec![f])
    };
    let verdicts = directions
        .iter()
        .map(|d| analyze_unchecked(graph, packing, partition, d, tol))
        .collect::<Result<Vec<_>>>()?;
    let prestress_stable = Some(verdicts.iter().all(|v| v.blocked()));
    Ok(SecondOrderReport { cone, verdicts, prestress_stable })
}

/// Whether some proper flex has a component outside `span(f)` after
/// removing rigid motions.
fn spans_beyond(
    graph: &PlanarEmbeddedGraph,
    packing: &Packing,
    partition: &ConstraintPartition,
    f: &FlexVector,
    tol: &AnalysisTolerances,
) -> Result<bool> {
    let (np, _) = normalized(packing);
    let r = rigidity_matrix_unchecked(graph, &np).matrix;
    let kernel = linalg::kernel_basis(&r, tol.rank)?;
    let mut known: Vec<Vec<f64>> = trivial_flex_basis(&np).into_iter().map(|t| t.0).collect();
    known.push(f.0.clone());
    let known = linalg::orthonormalize(&known, 1e-12);
    let k = known.len();
    let mut all = known;
    all.extend(kernel);
    let directions: Vec<Vec<f64>> = linalg::orthonormalize(&all, tol.strict).into_iter().skip(k).collect();
    for q in directions {
        for sign in [1.0, -1.0] {
            let objective: Vec<f64> = q.iter().map(|v| sign * v).collect();
            let program = flex_program(graph, &np, partition, objective);
            let out = lp::solve(&program, tol.lp)?;
            if out.status != LpStatus::Optimal {
                return Err(Error::LpBreakdown(format!("cone probe ended {:?}", out.status)));
            }
            if out.objective.unwrap_or(0.0) > tol.strict {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigidity::trivial_flex_basis;
    use std::f64::consts::SQRT_2;

    fn flower() -> (PlanarEmbeddedGraph, Packing, ConstraintPartition) {
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
        let part = ConstraintPartition::from_sets(5, &[5], &[1, 2, 3, 4], Tag::Free).unwrap();
        (g, p, part)
    }

    #[test]
    fn refine_zero_flex_is_identity() {
        let (_, _, part) = flower();
        let r = refine_partition(&part, &FlexVector::zeros(5), 1e-6).unwrap();
        assert_eq!(r.partition, part);
        assert!(r.moved.is_empty());
    }

    #[test]
    fn refine_moves_changing_radii() {
        let (_, _, part) = flower();
        let mut f = FlexVector::zeros(5);
        f.0[column(1, Coord::R)] = -0.5;
        f.0[column(2, Coord::X)] = 1.0;
        let r = refine_partition(&part, &f, 1e-6).unwrap();
        assert_eq!(r.moved, vec![1]);
        assert_eq!(r.partition.tag(1), Tag::Free);
        let again = refine_partition(&r.partition, &f, 1e-6).unwrap();
        assert_eq!(again.partition, r.partition);
    }

    #[test]
    fn rhs_of_rigid_motions() {
        let (g, p, _) = flower();
        let t = trivial_flex_basis(&p);
        assert!(extension_rhs(&g, &t[0]).iter().all(|&v| v == 0.0));
        let rot = extension_rhs(&g, &t[2]);
        let k = g.edge_index(1, 5).unwrap();
        assert!((rot[k] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn rigid_motion_extends_and_is_not_blocked() {
        let (g, p, part) = flower();
        let tol = AnalysisTolerances::default();
        for t in trivial_flex_basis(&p) {
            let v = analyze_flex(&g, &p, &part, &t, &tol).unwrap();
            assert!(v.extendable() && !v.blocked());
            assert!(v.blocking_value.abs() < 1e-9);
        }
    }

    #[test]
    fn rigid_flower_has_no_directions() {
        let (g, p, part) = flower();
        let rep = second_order_analysis(&g, &p, &part, &AnalysisTolerances::default()).unwrap();
        assert_eq!(rep.cone, FlexCone::Trivial);
        assert!(rep.verdicts.is_empty());
        assert_eq!(rep.prestress_stable, Some(true));
    }
}
