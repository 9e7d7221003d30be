use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use packrig::casebook;
use packrig::first_order::{self, Stress};
use packrig::format::{self, PackingDocument};
use packrig::layout::{self, LayoutProblem};
use packrig::matroid;
use packrig::packing::validate_packing;
use packrig::second_order;
use packrig::svg;
use packrig::{AnalysisTolerances, ConstraintPartition, Error, Tag};

use crate::StressChoice;

pub struct Outcome {
    pub report: String,
    pub code: u8,
}

pub struct Failure {
    pub message: String,
    pub code: u8,
}

const INVALID_INPUT: u8 = 1;
const INTERNAL: u8 = 2;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::LpBreakdown(_)
            | Error::NoConvergence { .. }
            | Error::NoRoot(_)
            | Error::MalformedProgram(_) => INTERNAL,
            _ => INVALID_INPUT,
        };
        Failure { message: e.to_string(), code }
    }
}

type Run = std::result::Result<Outcome, Failure>;

fn ok(report: String) -> Run {
    Ok(Outcome { report, code: 0 })
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        message: format!("{}: {e}", path.display()),
        code: INVALID_INPUT,
    })
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure {
        message: format!("{}: {e}", path.display()),
        code: INTERNAL,
    })
}

fn load(path: &Path) -> std::result::Result<PackingDocument, Failure> {
    let text = read(path)?;
    format::parse(&text).map_err(|e| Failure {
        message: format!("{}: {e}", path.display()),
        code: INVALID_INPUT,
    })
}

fn tolerances(tol: &AnalysisTolerances) -> std::result::Result<(), Failure> {
    tol.validate().map_err(Failure::from)
}

fn push(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}: {value}");
}

fn push_stress(out: &mut String, prefix: &str, stress: &Stress) {
    for k in svg::labeled_edges(stress) {
        let (i, j) = stress.edges[k];
        push(out, &format!("{prefix}_{i}_{j}"), stress.values[k]);
    }
}

pub fn validate(path: &Path, tol: &AnalysisTolerances) -> Run {
    tolerances(tol)?;
    let doc = load(path)?;
    let g = &doc.graph;
    let violations = validate_packing(g, &doc.packing, tol)?;
    let mut out = String::new();
    push(&mut out, "vertices", g.vertex_count());
    push(&mut out, "edges", g.edge_count());
    push(&mut out, "boundary", g.boundary_count());
    let (simple, _) = layout::is_simple_triangulated(g);
    push(&mut out, "simple_triangulated", simple);
    push(&mut out, "violations", violations.len());
    for v in &violations {
        push(&mut out, "violation", v);
    }
    push(&mut out, "valid", violations.is_empty());
    let code = if violations.is_empty() { 0 } else { INVALID_INPUT };
    Ok(Outcome { report: out, code })
}

pub fn analyze(path: &Path, tol: &AnalysisTolerances) -> Run {
    tolerances(tol)?;
    let doc = load(path)?;
    let v = first_order::is_infinitesimally_rigid(&doc.graph, &doc.packing, &doc.partition, tol)?;
    let mut out = String::new();
    push(&mut out, "rigid", v.rigid());
    push(&mut out, "status", v.status);
    push(&mut out, "fixed_radius_condition", v.fixed_radius_ok);
    push(&mut out, "stress_margin", v.stress_margin);
    push(&mut out, "primal_dual_agree", v.primal_dual_agree);
    let _ = writeln!(out, "{}", v.diagnostics);
    push(&mut out, "stress_found", v.stress.is_some());
    if let Some(s) = &v.stress {
        push_stress(&mut out, "stress", s);
    }
    push(&mut out, "flex_found", v.counterexample_flex.is_some());
    if let Some(f) = &v.counterexample_flex {
        for u in doc.graph.vertices() {
            push(&mut out, &format!("flex_r_{u}"), f.r(u));
        }
    }
    ok(out)
}

pub fn second_order(path: &Path, tol: &AnalysisTolerances) -> Run {
    tolerances(tol)?;
    let doc = load(path)?;
    let rep = second_order::second_order_analysis(&doc.graph, &doc.packing, &doc.partition, tol)?;
    let mut out = String::new();
    push(&mut out, "cone", rep.cone);
    push(&mut out, "flex_dim", rep.flex_dim());
    push(&mut out, "directions", rep.verdicts.len());
    let analyzed = !rep.verdicts.is_empty();
    push(&mut out, "blocked", analyzed && rep.verdicts.iter().all(|d| d.blocked()));
    push(&mut out, "extendable", rep.verdicts.iter().any(|d| d.extendable()));
    let stable = match rep.prestress_stable {
        Some(b) => b.to_string(),
        None => "undetermined".into(),
    };
    push(&mut out, "prestress_stable", stable);
    for (k, d) in rep.verdicts.iter().enumerate() {
        let k = k + 1;
        push(&mut out, &format!("direction_{k}_extendable"), d.extendable());
        push(&mut out, &format!("direction_{k}_blocked"), d.blocked());
        push(&mut out, &format!("direction_{k}_blocking_value"), d.blocking_value);
        let moved: Vec<String> = d.refined.moved.iter().map(|v| v.to_string()).collect();
        push(&mut out, &format!("direction_{k}_moved"), moved.join(","));
        for u in doc.graph.vertices() {
            push(&mut out, &format!("direction_{k}_flex_r_{u}"), d.flex.r(u));
        }
        if let Some(s) = &d.blocking_stress {
            push_stress(&mut out, &format!("direction_{k}_stress"), s);
        }
    }
    ok(out)
}

fn parse_costs(text: &str, n: usize) -> std::result::Result<Vec<f64>, Failure> {
    let mut cost = vec![1.0; n];
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Failure {
            message: format!("cost file line {}: {what}", k + 1),
            code: INVALID_INPUT,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(bad("expected `<id> <cost>`"));
        }
        let v: usize = fields[0].parse().map_err(|_| bad("bad vertex id"))?;
        if v == 0 || v > n {
            return Err(bad("unknown vertex"));
        }
        cost[v - 1] = fields[1].parse().map_err(|_| bad("bad cost"))?;
    }
    Ok(cost)
}

pub fn matroid(path: &Path, cost: Option<&Path>, tol: &AnalysisTolerances) -> Run {
    tolerances(tol)?;
    let doc = load(path)?;
    let g = &doc.graph;
    let n = g.vertex_count();
    let cost = match cost {
        Some(p) => parse_costs(&read(p)?, n)?,
        None => vec![1.0; n],
    };
    let best = matroid::greedy_min_cost_set(g, &doc.packing, &cost, tol)?;
    let members: Vec<String> = best.set.members.iter().map(|v| v.to_string()).collect();
    let skipped: Vec<String> = best.skipped.iter().map(|v| v.to_string()).collect();
    let mut out = String::new();
    push(&mut out, "set", members.join(","));
    push(&mut out, "size", best.set.len());
    push(&mut out, "expected_size", (3 * n).saturating_sub(g.edge_count() + 3));
    push(&mut out, "cost", best.cost);
    push(&mut out, "rank", best.set.rank);
    push(&mut out, "independent", matroid::is_independent(g, &doc.packing, &best.set.members, tol)?);
    push(&mut out, "maximal", matroid::is_maximal(g, &doc.packing, &best.set.members, tol)?);
    push(&mut out, "skipped", skipped.join(","));
    ok(out)
}

fn parse_boundary(spec: &str, boundary: &[usize]) -> std::result::Result<Vec<(usize, f64)>, Failure> {
    let bad = |what: String| Failure { message: format!("--boundary: {what}"), code: INVALID_INPUT };
    if let Ok(r) = spec.trim().parse::<f64>() {
        return Ok(boundary.iter().map(|&v| (v, r)).collect());
    }
    spec.split(',')
        .map(|item| {
            let (v, r) = item.split_once(':').ok_or_else(|| bad(format!("`{item}` is not id:radius")))?;
            let v = v.trim().parse().map_err(|_| bad(format!("bad vertex id `{v}`")))?;
            let r = r.trim().parse().map_err(|_| bad(format!("bad radius `{r}`")))?;
            Ok((v, r))
        })
        .collect()
}

fn emit(doc: &PackingDocument, output: Option<&Path>) -> Run {
    let text = format::serialize(doc);
    match output {
        Some(p) => {
            write(p, &text)?;
            ok(format!("written: {}\n", p.display()))
        }
        None => ok(text),
    }
}

pub fn layout(graph_path: &Path, boundary: &str, output: Option<&Path>) -> Run {
    let graph = format::parse_graph(&read(graph_path)?).map_err(|e| Failure {
        message: format!("{}: {e}", graph_path.display()),
        code: INVALID_INPUT,
    })?;
    let b: Vec<usize> = graph.vertices().filter(|&v| graph.is_boundary(v)).collect();
    let radii = parse_boundary(boundary, &b)?;
    let packing = layout::layout(&LayoutProblem::new(graph.clone(), radii)?)?;
    let partition = ConstraintPartition::uniform(graph.vertex_count(), Tag::Free);
    emit(&PackingDocument::new(graph, packing, partition), output)
}

pub fn case(name: &str, output: Option<&Path>) -> Run {
    if name == "fernique_ratio" {
        let x = casebook::conjecture_ratio_root(1e-15);
        let mut out = String::new();
        push(&mut out, "case", name);
        push(&mut out, "root", x);
        push(&mut out, "residual", casebook::conjecture_poly(x));
        return ok(out);
    }
    let c = casebook::build_case(name)?;
    let mut doc = PackingDocument::new(c.graph, c.packing, c.partition);
    doc.comments = vec![format!("case: {}", c.name), c.description.to_string()];
    emit(&doc, output)
}

pub fn export_svg(path: &Path, output: &Path, choice: StressChoice, tol: &AnalysisTolerances) -> Run {
    tolerances(tol)?;
    let doc = load(path)?;
    let (g, p, part) = (&doc.graph, &doc.packing, &doc.partition);
    let stress = match choice {
        StressChoice::None => None,
        StressChoice::FirstOrder => first_order::is_infinitesimally_rigid(g, p, part, tol)?.stress,
        StressChoice::Blocking => second_order::second_order_analysis(g, p, part, tol)?
            .verdicts
            .into_iter()
            .find_map(|d| d.blocking_stress),
    };
    let text = svg::export_svg(g, p, part, stress.as_ref());
    write(output, &text)?;
    let mut out = String::new();
    push(&mut out, "written", output.display());
    push(&mut out, "circles", g.vertex_count());
    push(&mut out, "stress_labels", stress.as_ref().map_or(0, |s| svg::labeled_edges(s).len()));
    ok(out)
}
