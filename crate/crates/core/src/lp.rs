//! Small dense linear programs.
//!
//! A [`LinearProgram`] maximizes `c . x` subject to equalities, `<=`
//! inequalities and optional per-variable bounds. [`solve`] runs a two-phase
//! tableau simplex with Bland's rule, rebuilt from the basis every few dozen
//! pivots, and returns either an optimal point, a
//! Farkas certificate of infeasibility, or an improving ray.
//!
//! A certificate `(y_eq, y_le)` with `y_le >= 0` proves infeasibility when,
//! writing `g = A_eq^T y_eq + A_le^T y_le`, every `g_j > 0` has a finite lower
//! bound, every `g_j < 0` has a finite upper bound, and
//! `b . y < sum_{g_j > 0} g_j l_j + sum_{g_j < 0} g_j u_j`. For any feasible
//! `x` the left side would bound `g . x` from above and the right side from
//! below.

use crate::error::{Error, Result};
use crate::linalg::dot;
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bound {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Bound {
    pub const FREE: Bound = Bound { lower: None, upper: None };
    pub const NONNEGATIVE: Bound = Bound { lower: Some(0.0), upper: None };

    pub fn between(lower: f64, upper: f64) -> Self {
        Bound { lower: Some(lower), upper: Some(upper) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    equalities: Vec<Constraint>,
    inequalities: Vec<Constraint>,
    bounds: Vec<Bound>,
}

impl LinearProgram {
    /// A program over `n` free variables with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            equalities: Vec::new(),
            inequalities: Vec::new(),
            bounds: vec![Bound::FREE; n],
        }
    }

    pub fn variable_count(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(&mut self, objective: Vec<f64>) -> &mut Self {
        self.objective = objective;
        self
    }

    pub fn add_eq(&mut self, coefficients: Vec<f64>, rhs: f64) -> &mut Self {
        self.equalities.push(Constraint { coefficients, rhs });
        self
    }

    /// `coefficients . x <= rhs`
    pub fn add_le(&mut self, coefficients: Vec<f64>, rhs: f64) -> &mut Self {
        self.inequalities.push(Constraint { coefficients, rhs });
        self
    }

    /// `coefficients . x >= rhs`, stored as a negated `<=` row.
    pub fn add_ge(&mut self, coefficients: Vec<f64>, rhs: f64) -> &mut Self {
        let neg = coefficients.into_iter().map(|a| -a).collect();
        self.add_le(neg, -rhs)
    }

    pub fn set_bound(&mut self, j: usize, bound: Bound) -> &mut Self {
        self.bounds[j] = bound;
        self
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn equalities(&self) -> &[Constraint] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Constraint] {
        &self.inequalities
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// The same program with equality and inequality rows reordered.
    pub fn with_rows_permuted(&self, eq_perm: &[usize], le_perm: &[usize]) -> Self {
        let mut out = self.clone();
        out.equalities = eq_perm.iter().map(|&k| self.equalities[k].clone()).collect();
        out.inequalities = le_perm.iter().map(|&k| self.inequalities[k].clone()).collect();
        out
    }

    fn check(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(Error::MalformedProgram("bounds length".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::MalformedProgram("objective is not finite".into()));
        }
        for c in self.equalities.iter().chain(&self.inequalities) {
            if c.coefficients.len() != n {
                return Err(Error::MalformedProgram(format!(
                    "row has {} coefficients for {n} variables",
                    c.coefficients.len()
                )));
            }
            if !c.rhs.is_finite() || c.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedProgram("row is not finite".into()));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (b.lower, b.upper) {
                if l > u {
                    return Err(Error::MalformedProgram(format!(
                        "variable {j} has lower bound {l} above upper bound {u}"
                    )));
                }
            }
            if b.lower.is_some_and(|l| !l.is_finite()) || b.upper.is_some_and(|u| !u.is_finite())
            {
                return Err(Error::MalformedProgram(format!("variable {j} has a non-finite bound")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Multipliers for the equality and inequality rows, in program order.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub equalities: Vec<f64>,
    pub inequalities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal point, or a feasible point when unbounded.
    pub point: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Present exactly when infeasible.
    pub certificate: Option<FarkasCertificate>,
    /// Improving direction, present exactly when unbounded.
    pub ray: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + s`
    Shift { col: usize, lower: f64 },
    /// `x = upper - s`
    Reflect { col: usize, upper: f64 },
    /// `x = s+ - s-`
    Split { pos: usize, neg: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Origin {
    Eq(usize),
    Le(usize),
    Bound,
}

struct Tableau {
    /// Rows of length `cols + 1`, the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    /// Reduced costs with `-objective` in the last entry.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
    banned: Vec<bool>,
    pivots: usize,
    max_pivots: usize,
    /// Initial rows, used to rebuild the tableau from the basis.
    orig: Vec<Vec<f64>>,
    /// Objective of the current phase, with a zero last entry.
    base_cost: Vec<f64>,
    stale: usize,
}

const REFACTOR_EVERY: usize = 50;

const PIVOT_EPS: f64 = 1e-9;
const COST_EPS: f64 = 1e-10;
const PIVOT_REL: f64 = 1e-7;

enum Step {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * pr;
                    }
                    row[c] = 0.0;
                }
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (x, &pr) in self.cost.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
        self.stale += 1;
    }

    /// Recomputes rows and reduced costs as `B^-1` times the initial data,
    /// discarding the roundoff accumulated by pivoting.
    fn refactor(&mut self) -> Result<()> {
        let m = self.rows.len();
        let w = self.cols + 1;
        if m == 0 {
            self.cost = self.base_cost.clone();
            self.stale = 0;
            return Ok(());
        }
        let b = DMatrix::from_fn(m, m, |i, k| self.orig[i][self.basis[k]]);
        let data = DMatrix::from_fn(m, w, |i, j| self.orig[i][j]);
        let x = b
            .lu()
            .solve(&data)
            .filter(|x| x.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::LpBreakdown("singular basis".into()))?;
        for (k, row) in self.rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = x[(k, j)];
            }
        }
        for k in 0..m {
            let bk = self.basis[k];
            for (i, row) in self.rows.iter_mut().enumerate() {
                row[bk] = if i == k { 1.0 } else { 0.0 };
            }
        }
        let mut cost = self.base_cost.clone();
        for (row, &bk) in self.rows.iter().zip(&self.basis) {
            let cb = self.base_cost[bk];
            if cb != 0.0 {
                for (c, v) in cost.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
        for &bk in &self.basis {
            cost[bk] = 0.0;
        }
        self.cost = cost;
        self.stale = 0;
        Ok(())
    }

    /// Minimizes the current cost row with Bland's rule.
    fn run(&mut self) -> Result<Step> {
        loop {
            if self.pivots > self.max_pivots {
                return Err(Error::LpBreakdown(format!(
                    "no convergence after {} pivots",
                    self.pivots
                )));
            }
            if self.stale >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let entering = (0..self.cols).find(|&j| !self.banned[j] && self.cost[j] < -COST_EPS);
            let Some(c) = entering else {
                if self.stale > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(Step::Optimal);
            };
            let cols = self.cols;
            let scale = self.rows.iter().fold(0.0f64, |acc, row| acc.max(row[c].abs()));
            let threshold = PIVOT_EPS.max(PIVOT_REL * scale);
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > threshold {
                    let ratio = row[cols].max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None if self.stale > 0 => self.refactor()?,
                None => return Ok(Step::Unbounded(c)),
            }
        }
    }

    fn value(&self, col: usize) -> f64 {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map_or(0.0, |r| self.rows[r][self.cols])
    }
}

/// Solves the program. `tol` is the phase-one threshold above which the
/// constraints are declared infeasible (relative to the scaled data).
pub fn solve(lp: &LinearProgram, tol: f64) -> Result<LpOutcome> {
    lp.check()?;
    let n = lp.variable_count();

    let mut maps = Vec::with_capacity(n);
    let mut std_cols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for b in &lp.bounds {
        let map = match (b.lower, b.upper) {
            (Some(l), upper) => {
                let col = std_cols;
                std_cols += 1;
                if let Some(u) = upper {
                    bound_rows.push((col, u - l));
                }
                VarMap::Shift { col, lower: l }
            }
            (None, Some(u)) => {
                std_cols += 1;
                VarMap::Reflect { col: std_cols - 1, upper: u }
            }
            (None, None) => {
                std_cols += 2;
                VarMap::Split { pos: std_cols - 2, neg: std_cols - 1 }
            }
        };
        maps.push(map);
    }

    // standard-form rows: coefficients over std columns, rhs, slack?, origin
    let mut rows: Vec<(Vec<f64>, f64, bool, Origin)> = Vec::new();
    let translate = |c: &Constraint| -> (Vec<f64>, f64) {
        let mut coeffs = vec![0.0; std_cols];
        let mut rhs = c.rhs;
        for (j, &a) in c.coefficients.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lower } => {
                    coeffs[col] += a;
                    rhs -= a * lower;
                }
                VarMap::Reflect { col, upper } => {
                    coeffs[col] -= a;
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        (coeffs, rhs)
    };
    for (k, c) in lp.equalities.iter().enumerate() {
        let (a, b) = translate(c);
        rows.push((a, b, false, Origin::Eq(k)));
    }
    for (k, c) in lp.inequalities.iter().enumerate() {
        let (a, b) = translate(c);
        rows.push((a, b, true, Origin::Le(k)));
    }
    for &(col, width) in &bound_rows {
        let mut a = vec![0.0; std_cols];
        a[col] = 1.0;
        rows.push((a, width, true, Origin::Bound));
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.2).count();
    // scale rows to unit max-norm and flip to nonnegative rhs
    let mut scale = vec![1.0; m];
    let mut flip = vec![1.0; m];
    for (i, (a, b, _, _)) in rows.iter_mut().enumerate() {
        let s = a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if s > 0.0 {
            scale[i] = s;
            a.iter_mut().for_each(|x| *x /= s);
            *b /= s;
        }
        if *b < 0.0 {
            flip[i] = -1.0;
        }
    }
    let mut needs_artificial = vec![false; m];
    for i in 0..m {
        needs_artificial[i] = !(rows[i].2 && flip[i] > 0.0);
    }
    let art_count = needs_artificial.iter().filter(|&&x| x).count();
    let cols = std_cols + slack_count + art_count;

    let mut tab_rows = Vec::with_capacity(m);
    let mut basis = vec![0; m];
    let mut init_col = vec![0; m];
    let mut slack_next = std_cols;
    let mut art_next = std_cols + slack_count;
    for (i, (a, b, has_slack, _)) in rows.iter().enumerate() {
        let mut row = vec![0.0; cols + 1];
        for (j, &x) in a.iter().enumerate() {
            row[j] = flip[i] * x;
        }
        if *has_slack {
            row[slack_next] = flip[i];
            if !needs_artificial[i] {
                basis[i] = slack_next;
                init_col[i] = slack_next;
            }
            slack_next += 1;
        }
        if needs_artificial[i] {
            row[art_next] = 1.0;
            basis[i] = art_next;
            init_col[i] = art_next;
            art_next += 1;
        }
        row[cols] = flip[i] * b;
        tab_rows.push(row);
    }
    let art_start = std_cols + slack_count;

    // phase one: minimize the sum of artificials
    let mut phase1_cost = vec![0.0; cols + 1];
    for j in art_start..cols {
        phase1_cost[j] = 1.0;
    }
    let mut cost = phase1_cost.clone();
    for (i, row) in tab_rows.iter().enumerate() {
        if basis[i] >= art_start {
            for (c, x) in cost.iter_mut().zip(row) {
                *c -= x;
            }
        }
    }
    let mut tab = Tableau {
        orig: tab_rows.clone(),
        rows: tab_rows,
        cost,
        basis,
        cols,
        banned: vec![false; cols],
        pivots: 0,
        max_pivots: 200 * (m + cols) + 1000,
        base_cost: phase1_cost.clone(),
        stale: 0,
    };
    // the phase-one objective is bounded below, so a column that looks
    // unbounded only has roundoff in its reduced cost
    while let Step::Unbounded(c) = tab.run()? {
        tab.banned[c] = true;
    }
    tab.banned.iter_mut().for_each(|b| *b = false);
    let infeasibility = -tab.cost[cols];
    if infeasibility > tol {
        // duals of the phase-one problem: y_i = c_init - rc_init
        let mut eq = vec![0.0; lp.equalities.len()];
        let mut le = vec![0.0; lp.inequalities.len()];
        for i in 0..m {
            let col = init_col[i];
            let y = phase1_cost[col] - tab.cost[col];
            let farkas = -y * flip[i] / scale[i];
            match rows[i].3 {
                Origin::Eq(k) => eq[k] = farkas,
                Origin::Le(k) => le[k] = farkas.max(0.0),
                Origin::Bound => {}
            }
        }
        let big = eq.iter().chain(&le).fold(0.0f64, |acc, x| acc.max(x.abs()));
        if big > 0.0 {
            eq.iter_mut().chain(le.iter_mut()).for_each(|x| *x /= big);
        }
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            point: None,
            objective: None,
            certificate: Some(FarkasCertificate { equalities: eq, inequalities: le }),
            ray: None,
        });
    }

    // drive remaining artificials out of the basis
    // a row without a usable pivot is redundant; its artificial stays basic at zero
    for r in 0..tab.rows.len() {
        if tab.basis[r] >= art_start {
            let candidate = (0..art_start)
                .filter(|&j| tab.rows[r][j].abs() > PIVOT_REL)
                .max_by(|&a, &b| tab.rows[r][a].abs().total_cmp(&tab.rows[r][b].abs()));
            if let Some(c) = candidate {
                tab.pivot(r, c);
            }
        }
    }
    for j in art_start..cols {
        tab.banned[j] = true;
    }

    // phase two: minimize -c . x in standard columns
    let mut std_cost = vec![0.0; cols + 1];
    for (j, map) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *map {
            VarMap::Shift { col, .. } => std_cost[col] -= c,
            VarMap::Reflect { col, .. } => std_cost[col] += c,
            VarMap::Split { pos, neg } => {
                std_cost[pos] -= c;
                std_cost[neg] += c;
            }
        }
    }
    tab.base_cost = std_cost;
    tab.refactor()?;
    let step = tab.run()?;

    let recover = |tab: &Tableau| -> Vec<f64> {
        maps.iter()
            .map(|map| match *map {
                VarMap::Shift { col, lower } => lower + tab.value(col),
                VarMap::Reflect { col, upper } => upper - tab.value(col),
                VarMap::Split { pos, neg } => tab.value(pos) - tab.value(neg),
            })
            .collect()
    };
    let point = recover(&tab);
    let objective = dot(&lp.objective, &point);
    match step {
        Step::Optimal => Ok(LpOutcome {
            status: LpStatus::Optimal,
            point: Some(point),
            objective: Some(objective),
            certificate: None,
            ray: None,
        }),
        Step::Unbounded(c) => {
            let mut dir = vec![0.0; cols];
            dir[c] = 1.0;
            for (i, row) in tab.rows.iter().enumerate() {
                dir[tab.basis[i]] = -row[c];
            }
            let ray = maps
                .iter()
                .map(|map| match *map {
                    VarMap::Shift { col, .. } => dir[col],
                    VarMap::Reflect { col, .. } => -dir[col],
                    VarMap::Split { pos, neg } => dir[pos] - dir[neg],
                })
                .collect();
            Ok(LpOutcome {
                status: LpStatus::Unbounded,
                point: Some(point),
                objective: None,
                certificate: None,
                ray: Some(ray),
            })
        }
    }
}

/// Largest violation of the program's constraints at `x`, each measured
/// relative to the magnitude of the terms involved.
pub fn max_violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let rel = |c: &Constraint| {
        let lhs = dot(&c.coefficients, x);
        let scale = 1.0
            + c.rhs.abs()
            + c.coefficients.iter().zip(x).map(|(a, v)| (a * v).abs()).sum::<f64>();
        (lhs - c.rhs) / scale
    };
    for c in &lp.equalities {
        worst = worst.max(rel(c).abs());
    }
    for c in &lp.inequalities {
        worst = worst.max(rel(c));
    }
    for (b, &v) in lp.bounds.iter().zip(x) {
        if let Some(l) = b.lower {
            worst = worst.max((l - v) / (1.0 + l.abs()));
        }
        if let Some(u) = b.upper {
            worst = worst.max((v - u) / (1.0 + u.abs()));
        }
    }
    worst
}

/// Re-verifies whichever side of the alternative `outcome` claims, directly
/// against `lp`.
pub fn farkas_check(outcome: &LpOutcome, lp: &LinearProgram, tol: f64) -> bool {
    if lp.check().is_err() {
        return false;
    }
    let n = lp.variable_count();
    match outcome.status {
        LpStatus::Optimal => match &outcome.point {
            Some(x) if x.len() == n => max_violation(lp, x) <= tol,
            _ => false,
        },
        LpStatus::Infeasible => match &outcome.certificate {
            Some(cert) => certificate_holds(lp, cert, tol),
            None => false,
        },
        LpStatus::Unbounded => {
            let (Some(x), Some(d)) = (&outcome.point, &outcome.ray) else {
                return false;
            };
            if x.len() != n || d.len() != n || max_violation(lp, x) > tol {
                return false;
            }
            let dn = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if dn == 0.0 {
                return false;
            }
            let d: Vec<f64> = d.iter().map(|v| v / dn).collect();
            let eq_ok = lp.equalities.iter().all(|c| dot(&c.coefficients, &d).abs() <= tol);
            let le_ok = lp.inequalities.iter().all(|c| dot(&c.coefficients, &d) <= tol);
            let bounds_ok = lp.bounds.iter().zip(&d).all(|(b, &v)| {
                (b.lower.is_none() || v >= -tol) && (b.upper.is_none() || v <= tol)
            });
            eq_ok && le_ok && bounds_ok && dot(&lp.objective, &d) > tol
        }
    }
}

fn certificate_holds(lp: &LinearProgram, cert: &FarkasCertificate, tol: f64) -> bool {
    if cert.equalities.len() != lp.equalities.len()
        || cert.inequalities.len() != lp.inequalities.len()
    {
        return false;
    }
    if cert.inequalities.iter().any(|&y| y < -tol) {
        return false;
    }
    let n = lp.variable_count();
    let mut g = vec![0.0; n];
    let mut g_scale = vec![0.0; n];
    let mut by = 0.0;
    let mut by_scale = 0.0;
    let rows = lp
        .equalities
        .iter()
        .zip(&cert.equalities)
        .chain(lp.inequalities.iter().zip(&cert.inequalities));
    for (c, &y) in rows {
        for j in 0..n {
            g[j] += y * c.coefficients[j];
            g_scale[j] += (y * c.coefficients[j]).abs();
        }
        by += y * c.rhs;
        by_scale += (y * c.rhs).abs();
    }
    let mut lower = 0.0;
    let mut lower_scale = 0.0;
    for j in 0..n {
        if g[j].abs() <= tol * (1.0 + g_scale[j]) {
            continue;
        }
        let bound = if g[j] > 0.0 { lp.bounds[j].lower } else { lp.bounds[j].upper };
        match bound {
            Some(v) => {
                lower += g[j] * v;
                lower_scale += (g[j] * v).abs();
            }
            None => return false,
        }
    }
    lower - by > tol * (1.0 + by_scale + lower_scale)
}
