//! Edge-list text files and JSON-lines update traces.
//!
//! Edge list: a header line `n m`, then one `u v [w]` line per edge (missing
//! weight means 1). Blank lines and lines starting with `#` are skipped.
//!
//! Trace: one JSON object per line with fields `t`, `op` and, depending on
//! the op, `u`, `v`, `w` (insert) or `eid` (delete, batch delete).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, EdgeId, UpdateEvent, UpdateKind, VertexId};

pub fn parse_edge_list(text: &str) -> Result<DynamicGraph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
    let mut parts = header.split_whitespace();
    let n = parse_field::<usize>(parts.next(), 1, "n")?;
    let m = parse_field::<usize>(parts.next(), 1, "m")?;
    let mut edges = Vec::with_capacity(m);
    for (lineno, line) in lines {
        let mut f = line.split_whitespace();
        let u = parse_field::<usize>(f.next(), lineno + 1, "u")?;
        let v = parse_field::<usize>(f.next(), lineno + 1, "v")?;
        let w = match f.next() {
            Some(tok) => parse_field::<f64>(Some(tok), lineno + 1, "w")?,
            None => 1.0,
        };
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(Error::Parse(format!("header announces {m} edges, found {}", edges.len())));
    }
    DynamicGraph::from_edges(n, edges)
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, line: usize, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing {name}")))?;
    tok.parse().map_err(|_| Error::Parse(format!("line {line}: bad {name} `{tok}`")))
}

/// Writes edges in ascending id order. Unit weights are omitted.
pub fn write_edge_list(g: &DynamicGraph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (_, e) in g.edges() {
        if e.w == 1.0 {
            writeln!(out, "{} {}", e.u.0, e.v.0).unwrap();
        } else {
            writeln!(out, "{} {} {}", e.u.0, e.v.0, e.w).unwrap();
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EidField {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eid: Option<EidField>,
}

impl TraceRecord {
    pub fn from_event(ev: &UpdateEvent) -> Self {
        let mut r = TraceRecord { t: ev.stage, op: String::new(), u: None, v: None, w: None, eid: None };
        match &ev.kind {
            UpdateKind::InsertEdge { u, v, w } => {
                r.op = "insert".into();
                r.u = Some(u.0);
                r.v = Some(v.0);
                r.w = Some(*w);
            }
            UpdateKind::DeleteEdge(id) => {
                r.op = "delete".into();
                r.eid = Some(EidField::One(id.0));
            }
            UpdateKind::BatchDelete(ids) => {
                r.op = "batch_delete".into();
                r.eid = Some(EidField::Many(ids.iter().map(|e| e.0).collect()));
            }
        }
        r
    }

    pub fn to_event(&self) -> Result<UpdateEvent> {
        let bad = |what: &str| Error::Parse(format!("stage {}: {what}", self.t));
        let kind = match self.op.as_str() {
            "insert" => UpdateKind::InsertEdge {
                u: VertexId(self.u.ok_or_else(|| bad("insert without u"))?),
                v: VertexId(self.v.ok_or_else(|| bad("insert without v"))?),
                w: self.w.unwrap_or(1.0),
            },
            "delete" => match &self.eid {
                Some(EidField::One(e)) => UpdateKind::DeleteEdge(EdgeId(*e)),
                _ => return Err(bad("delete needs a single eid")),
            },
            "batch_delete" => match &self.eid {
                Some(EidField::Many(es)) => UpdateKind::BatchDelete(es.iter().map(|&e| EdgeId(e)).collect()),
                Some(EidField::One(e)) => UpdateKind::BatchDelete(vec![EdgeId(*e)]),
                None => return Err(bad("batch_delete without eid")),
            },
            other => return Err(bad(&format!("unknown op `{other}`"))),
        };
        Ok(UpdateEvent { kind, stage: self.t })
    }
}

pub fn parse_trace(text: &str) -> Result<Vec<UpdateEvent>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let rec: TraceRecord = serde_json::from_str(l).map_err(|e| Error::Parse(e.to_string()))?;
            rec.to_event()
        })
        .collect()
}

pub fn write_trace(events: &[UpdateEvent]) -> String {
    let mut out = String::new();
    for ev in events {
        out.push_str(&serde_json::to_string(&TraceRecord::from_event(ev)).expect("serializable"));
        out.push('\n');
    }
    out
}
