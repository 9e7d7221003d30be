//! Line-oriented text format for packings and bare graphs.
//!
//! ```text
//! circle-packing 1
//! # free text
//! vertex <id> <x> <y> <r> <tag> <b|i>
//! rotation <id> <neighbor> <neighbor> ...
//! ```
//!
//! `tag` is one of `+` (may grow), `-` (may shrink), `=` (fixed) and `0`
//! (free). Ids run from 1 to n and every vertex needs exactly one `vertex`
//! and one `rotation` line; neighbors are listed counterclockwise. Blank
//! lines are ignored, `#` lines are kept as comments. Numbers are written
//! in the shortest form that reads back to the same double.
//!
//! A bare graph uses the header `circle-graph 1` and `vertex <id> <b|i>`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::PlanarEmbeddedGraph;
use crate::packing::{ConstraintPartition, Packing, Tag};

pub const PACKING_HEADER: &str = "circle-packing";
pub const GRAPH_HEADER: &str = "circle-graph";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct PackingDocument {
    pub format_version: u32,
    /// Comment lines without the leading `#` and one following space.
    pub comments: Vec<String>,
    pub graph: PlanarEmbeddedGraph,
    pub packing: Packing,
    pub partition: ConstraintPartition,
}

impl PackingDocument {
    pub fn new(graph: PlanarEmbeddedGraph, packing: Packing, partition: ConstraintPartition) -> Self {
        Self { format_version: FORMAT_VERSION, comments: Vec::new(), graph, packing, partition }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct Line<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

/// Splits into the header version, comments and the remaining lines.
fn split<'a>(text: &'a str, header: &str) -> Result<(u32, Vec<String>, Vec<Line<'a>>)> {
    let mut version = None;
    let mut comments = Vec::new();
    let mut lines = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let number = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            comments.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if version.is_none() {
            if fields.len() != 2 || fields[0] != header {
                return Err(parse_err(number, format!("expected header `{header} {FORMAT_VERSION}`")));
            }
            let v: u32 = fields[1]
                .parse()
                .map_err(|_| parse_err(number, format!("bad format version `{}`", fields[1])))?;
            if v != FORMAT_VERSION {
                return Err(parse_err(number, format!("unsupported format version {v}")));
            }
            version = Some(v);
            continue;
        }
        lines.push(Line { number, fields });
    }
    let version = version.ok_or_else(|| parse_err(1, "empty document"))?;
    Ok((version, comments, lines))
}

fn field<'a>(line: &Line<'a>, k: usize, what: &str) -> Result<&'a str> {
    line.fields
        .get(k)
        .copied()
        .ok_or_else(|| parse_err(line.number, format!("field {}: missing {what}", k + 1)))
}

fn parse_id(line: &Line, k: usize) -> Result<usize> {
    let s = field(line, k, "vertex id")?;
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(parse_err(line.number, format!("field {}: bad vertex id `{s}`", k + 1))),
    }
}

fn parse_real(line: &Line, k: usize, what: &str) -> Result<f64> {
    let s = field(line, k, what)?;
    let x: f64 = s
        .parse()
        .map_err(|_| parse_err(line.number, format!("field {}: bad {what} `{s}`", k + 1)))?;
    if !x.is_finite() {
        return Err(parse_err(line.number, format!("field {}: {what} is not finite", k + 1)));
    }
    Ok(x)
}

fn parse_flag(line: &Line, k: usize) -> Result<bool> {
    match field(line, k, "boundary flag")? {
        "b" => Ok(true),
        "i" => Ok(false),
        s => Err(parse_err(line.number, format!("field {}: boundary flag `{s}` is not b or i", k + 1))),
    }
}

fn expect_len(line: &Line, n: usize) -> Result<()> {
    if line.fields.len() != n {
        return Err(parse_err(
            line.number,
            format!("expected {n} fields, found {}", line.fields.len()),
        ));
    }
    Ok(())
}

/// Collects per-vertex records and rotations, checking ids and symmetry.
fn assemble<T>(
    records: Vec<(usize, usize, T)>,
    rotations: Vec<(usize, usize, Vec<usize>)>,
) -> Result<(Vec<T>, Vec<Vec<usize>>)> {
    let n = records.len();
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let mut declared = vec![0; n];
    for (number, id, rec) in records {
        if id > n {
            return Err(parse_err(number, format!("vertex id {id} exceeds the vertex count {n}")));
        }
        if slots[id - 1].is_some() {
            return Err(parse_err(number, format!("vertex {id} declared twice")));
        }
        slots[id - 1] = Some(rec);
        declared[id - 1] = number;
    }
    let mut rot: Vec<Option<(usize, Vec<usize>)>> = vec![None; n];
    for (number, id, nbrs) in rotations {
        if id > n {
            return Err(parse_err(number, format!("rotation for unknown vertex {id}")));
        }
        if rot[id - 1].is_some() {
            return Err(parse_err(number, format!("second rotation for vertex {id}")));
        }
        if let Some(&u) = nbrs.iter().find(|&&u| u > n) {
            return Err(parse_err(number, format!("unknown neighbor {u}")));
        }
        rot[id - 1] = Some((number, nbrs));
    }
    let mut rotation = Vec::with_capacity(n);
    for (k, r) in rot.iter().enumerate() {
        let Some((_, nbrs)) = r else {
            return Err(parse_err(declared[k], format!("vertex {} has no rotation line", k + 1)));
        };
        rotation.push(nbrs.clone());
    }
    for (k, r) in rot.iter().enumerate() {
        let (number, nbrs) = r.as_ref().expect("checked above");
        let v = k + 1;
        if let Some(&u) = nbrs.iter().find(|&&u| u != v && !rotation[u - 1].contains(&v)) {
            return Err(parse_err(
                *number,
                format!("edge ({v},{u}) is listed at {v} but not at {u}"),
            ));
        }
    }
    Ok((slots.into_iter().map(|s| s.expect("ids are 1..n")).collect(), rotation))
}

fn parse_rotation(line: &Line) -> Result<(usize, usize, Vec<usize>)> {
    let id = parse_id(line, 1)?;
    let nbrs = (2..line.fields.len()).map(|k| parse_id(line, k)).collect::<Result<_>>()?;
    Ok((line.number, id, nbrs))
}

pub fn parse(text: &str) -> Result<PackingDocument> {
    let (format_version, comments, lines) = split(text, PACKING_HEADER)?;
    let mut records = Vec::new();
    let mut rotations = Vec::new();
    for line in &lines {
        match line.fields[0] {
            "vertex" => {
                expect_len(line, 7)?;
                let id = parse_id(line, 1)?;
                let x = parse_real(line, 2, "x")?;
                let y = parse_real(line, 3, "y")?;
                let r = parse_real(line, 4, "radius")?;
                if r <= 0.0 {
                    return Err(Error::NonPositiveRadius { vertex: id, value: r });
                }
                let t = field(line, 5, "tag")?;
                let mut chars = t.chars();
                let tag = match (chars.next().and_then(Tag::from_symbol), chars.next()) {
                    (Some(tag), None) => tag,
                    _ => return Err(parse_err(line.number, format!("field 6: bad tag `{t}`"))),
                };
                let b = parse_flag(line, 6)?;
                records.push((line.number, id, ([x, y], r, tag, b)));
            }
            "rotation" => rotations.push(parse_rotation(line)?),
            other => return Err(parse_err(line.number, format!("unknown record `{other}`"))),
        }
    }
    if records.is_empty() {
        return Err(parse_err(0, "document has no vertices"));
    }
    let (recs, rotation) = assemble(records, rotations)?;
    let boundary = recs.iter().map(|r| r.3).collect();
    let graph = PlanarEmbeddedGraph::new(rotation, boundary)?;
    let packing = Packing::new(recs.iter().map(|r| r.0).collect(), recs.iter().map(|r| r.1).collect())?;
    let partition = ConstraintPartition::new(recs.iter().map(|r| r.2).collect());
    Ok(PackingDocument { format_version, comments, graph, packing, partition })
}

fn write_header(out: &mut String, header: &str, comments: &[String]) {
    let _ = writeln!(out, "{header} {FORMAT_VERSION}");
    for c in comments {
        if c.is_empty() {
            out.push_str("#\n");
        } else {
            let _ = writeln!(out, "# {c}");
        }
    }
}

fn write_rotations(out: &mut String, graph: &PlanarEmbeddedGraph) {
    for v in graph.vertices() {
        let _ = write!(out, "rotation {v}");
        for u in graph.rotation(v) {
            let _ = write!(out, " {u}");
        }
        out.push('\n');
    }
}

pub fn serialize(doc: &PackingDocument) -> String {
    let mut out = String::new();
    write_header(&mut out, PACKING_HEADER, &doc.comments);
    for v in doc.graph.vertices() {
        let c = doc.packing.center(v);
        let _ = writeln!(
            out,
            "vertex {v} {} {} {} {} {}",
            c[0],
            c[1],
            doc.packing.radius(v),
            doc.partition.tag(v).symbol(),
            if doc.graph.is_boundary(v) { 'b' } else { 'i' }
        );
    }
    write_rotations(&mut out, &doc.graph);
    out
}

pub fn parse_graph(text: &str) -> Result<PlanarEmbeddedGraph> {
    let (_, _, lines) = split(text, GRAPH_HEADER)?;
    let mut records = Vec::new();
    let mut rotations = Vec::new();
    for line in &lines {
        match line.fields[0] {
            "vertex" => {
                expect_len(line, 3)?;
                records.push((line.number, parse_id(line, 1)?, parse_flag(line, 2)?));
            }
            "rotation" => rotations.push(parse_rotation(line)?),
            other => return Err(parse_err(line.number, format!("unknown record `{other}`"))),
        }
    }
    if records.is_empty() {
        return Err(parse_err(0, "document has no vertices"));
    }
    let (boundary, rotation) = assemble(records, rotations)?;
    PlanarEmbeddedGraph::new(rotation, boundary)
}

pub fn serialize_graph(graph: &PlanarEmbeddedGraph) -> String {
    let mut out = String::new();
    write_header(&mut out, GRAPH_HEADER, &[]);
    for v in graph.vertices() {
        let _ = writeln!(out, "vertex {v} {}", if graph.is_boundary(v) { 'b' } else { 'i' });
    }
    write_rotations(&mut out, graph);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casebook;

    #[test]
    fn flower_round_trip() {
        let c = casebook::flower4().unwrap();
        let doc = PackingDocument::new(c.graph.clone(), c.packing.clone(), c.partition.clone());
        let text = serialize(&doc);
        assert!(text.starts_with("circle-packing 1\nvertex 1 1 1 1 - b\n"));
        let back = parse(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(serialize(&back), text);
    }

    #[test]
    fn comments_survive() {
        let text = "circle-packing 1\n# hello\n#\nvertex 1 0 0 1 0 b\nvertex 2 2 0 1 = b\nrotation 1 2\nrotation 2 1\n";
        let doc = parse(text).unwrap();
        assert_eq!(doc.comments, vec!["hello".to_string(), String::new()]);
        assert_eq!(serialize(&doc), text);
    }

    #[test]
    fn one_sided_edge_is_located() {
        let text = "circle-packing 1\nvertex 1 0 0 1 0 b\nvertex 2 2 0 1 0 b\nrotation 1 2\nrotation 2\n";
        match parse(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("(1,2)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_radius_is_a_domain_error() {
        let text = "circle-packing 1\nvertex 1 0 0 0 0 b\nrotation 1\n";
        assert!(matches!(parse(text), Err(Error::NonPositiveRadius { vertex: 1, .. })));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let bad = [
            ("circle-packing 2\n", 1),
            ("circle-packing 1\nvertex 1 0 0 1 0\n", 2),
            ("circle-packing 1\n\nvertex 1 0 zero 1 0 b\n", 3),
            ("circle-packing 1\nvertex 1 0 0 1 ? b\n", 2),
            ("circle-packing 1\nvertex 1 0 0 1 0 b\nedge 1 2\n", 3),
            ("circle-packing 1\nvertex 1 0 0 1 0 b\nvertex 1 0 0 1 0 b\n", 3),
            ("circle-packing 1\n# x\nvertex 1 0 0 1 0 b\n", 3),
        ];
        for (text, want) in bad {
            match parse(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn graph_round_trip() {
        let g = casebook::ten_disk_graph().unwrap();
        let text = serialize_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(serialize_graph(&back), text);
    }
}
