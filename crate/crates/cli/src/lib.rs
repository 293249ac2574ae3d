//! Command-line front end: loads a graph document, runs queries and renders
//! result tables.
//!
//! Rendering is deterministic. Columns appear in lexicographic order and rows
//! in lexicographic order of their JSON encoding; the order carries no meaning.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use cypher_ref::oracle::{gen_case, serialize_case, GenConfig, OracleEngine};
use cypher_ref::values::{PathValue, ValueMap};
use cypher_ref::{parse_query, Engine, EngineError, ExecMode, PropertyGraph, Record, Table, Value};
use serde_json::{json, Map as JsonMap, Value as Json};

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_EVAL: i32 = 2;
pub const EXIT_GRAPH: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "cypher-ref",
    version,
    about = "Reference interpreter for core Cypher"
)]
pub struct Cli {
    /// Graph document (JSON); the empty graph when omitted.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Query text.
    #[arg(long, conflicts_with = "query_file")]
    pub query: Option<String>,
    /// File with one or more queries, each terminated by `;`.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
    /// Also run the brute-force oracle and compare result bags.
    #[arg(long)]
    pub oracle: bool,
    /// Evaluate without the thread pool.
    #[arg(long)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a generated (graph, query) case.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Json,
    CountedJson,
}

/// Runs the command line, writing results to `out` and diagnostics to `err`.
/// Returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Some(Command::Gen { seed }) = cli.command {
        let (g, q) = gen_case(&GenConfig::with_seed(seed));
        let _ = write!(out, "{}", serialize_case(&g, &q));
        return 0;
    }
    let graph = match &cli.graph {
        None => PropertyGraph::empty(),
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|text| PropertyGraph::from_json_str(&text).map_err(|e| e.to_string()))
        {
            Ok(g) => g,
            Err(e) => {
                let _ = writeln!(err, "cannot load graph {}: {e}", path.display());
                return EXIT_GRAPH;
            }
        },
    };
    let queries = match (&cli.query, &cli.query_file) {
        (Some(q), _) => vec![q.clone()],
        (None, Some(path)) => match std::fs::read_to_string(path) {
            Ok(text) => split_statements(&text),
            Err(e) => {
                let _ = writeln!(err, "cannot read {}: {e}", path.display());
                return EXIT_PARSE;
            }
        },
        (None, None) => {
            let _ = writeln!(err, "one of --query or --query-file is required");
            return EXIT_PARSE;
        }
    };
    let mode = if cli.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    };
    for (i, src) in queries.iter().enumerate() {
        if i > 0 {
            let _ = writeln!(out);
        }
        let status = run_one(&graph, src, cli, mode, out, err);
        if status != 0 {
            return status;
        }
    }
    0
}

fn run_one(
    g: &PropertyGraph,
    src: &str,
    cli: &Cli,
    mode: ExecMode,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let q = match parse_query(src) {
        Ok(q) => q,
        Err(e) => {
            let _ = writeln!(err, "{}", e.render(src));
            return EXIT_PARSE;
        }
    };
    let result = Engine::with_mode(g, mode).output(&q);
    if cli.oracle {
        let reference = OracleEngine::new(g).output(&q);
        let agree = match (&result, &reference) {
            (Ok(a), Ok(b)) => a == b,
            (Err(_), Err(_)) => true,
            _ => false,
        };
        if !agree {
            let show = |r: &Result<Table, EngineError>| match r {
                Ok(t) => render_counted_json(g, t),
                Err(e) => format!("error: {e}"),
            };
            let _ = writeln!(
                err,
                "oracle mismatch\nengine: {}\noracle: {}",
                show(&result),
                show(&reference)
            );
            return EXIT_ORACLE;
        }
        let _ = writeln!(err, "oracle: agree");
    }
    match result {
        Ok(t) => {
            let text = match cli.format {
                Format::Tsv => render_tsv(g, &t),
                Format::Json => render_json(g, &t),
                Format::CountedJson => render_counted_json(g, &t),
            };
            let _ = writeln!(out, "{text}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", render_engine_error(&e, src));
            EXIT_EVAL
        }
    }
}

fn render_engine_error(e: &EngineError, src: &str) -> String {
    if let EngineError::Eval(ev) = e {
        if ev.span.end > ev.span.start && ev.span.end <= src.len() {
            let before = &src[..ev.span.start];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
            return format!(
                "evaluation error at {line}:{col}: {ev}\n  near `{}`",
                &src[ev.span.start..ev.span.end]
            );
        }
    }
    format!("evaluation error: {e}")
}

/// Splits a batch file into statements at `;` outside quotes and backticks.
pub fn split_statements(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in text.chars() {
        match quote {
            Some(q) => {
                if escaped {
                    escaped = false;
                } else if c == '\\' && q != '`' {
                    escaped = true;
                } else if c == q {
                    quote = None;
                }
                cur.push(c);
            }
            None if c == ';' => out.push(std::mem::take(&mut cur)),
            None => {
                if matches!(c, '\'' | '"' | '`') {
                    quote = Some(c);
                }
                cur.push(c);
            }
        }
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// External JSON encoding of a value. Nodes, relationships, paths and maps
/// are wrapped in a single-key object so that every value decodes unambiguously.
pub fn encode_value(g: &PropertyGraph, v: &Value) -> Json {
    match v {
        Value::Null => Json::Null,
        Value::Bool(b) => json!(b),
        Value::Int(i) => json!(i),
        Value::Str(s) => json!(s),
        Value::Node(n) => json!({ "node": g.node_name(*n) }),
        Value::Rel(r) => json!({ "rel": g.rel_name(*r) }),
        Value::List(items) => Json::Array(items.iter().map(|w| encode_value(g, w)).collect()),
        Value::Map(m) => {
            let mut entries: Vec<(&str, &Value)> = m.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            let inner: JsonMap<String, Json> = entries
                .into_iter()
                .map(|(k, w)| (k.to_string(), encode_value(g, w)))
                .collect();
            json!({ "map": inner })
        }
        Value::Path(p) => json!({ "path": path_ids(g, p) }),
    }
}

fn path_ids(g: &PropertyGraph, p: &PathValue) -> Vec<String> {
    let mut ids = vec![g.node_name(p.start()).to_string()];
    for (r, n) in p.rels().iter().zip(&p.nodes()[1..]) {
        ids.push(g.rel_name(*r).to_string());
        ids.push(g.node_name(*n).to_string());
    }
    ids
}

pub fn decode_value(g: &PropertyGraph, j: &Json) -> Result<Value, String> {
    Ok(match j {
        Json::Null => Value::Null,
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) => Value::Int(n.as_i64().ok_or_else(|| format!("not an integer: {n}"))?),
        Json::String(s) => Value::Str(s.clone()),
        Json::Array(items) => Value::List(
            items
                .iter()
                .map(|w| decode_value(g, w))
                .collect::<Result<_, _>>()?,
        ),
        Json::Object(o) if o.len() == 1 => {
            let (tag, body) = o.iter().next().expect("one entry");
            match (tag.as_str(), body) {
                ("node", Json::String(id)) => Value::Node(
                    g.node_by_name(id)
                        .ok_or_else(|| format!("unknown node {id}"))?,
                ),
                ("rel", Json::String(id)) => Value::Rel(
                    g.rel_by_name(id)
                        .ok_or_else(|| format!("unknown rel {id}"))?,
                ),
                ("map", Json::Object(m)) => {
                    let mut map = ValueMap::new();
                    for (k, w) in m {
                        map.insert(k.clone(), decode_value(g, w)?);
                    }
                    Value::Map(map)
                }
                ("path", Json::Array(ids)) => decode_path(g, ids)?,
                _ => return Err(format!("bad tagged value: {j}")),
            }
        }
        Json::Object(_) => return Err(format!("bad value: {j}")),
    })
}

fn decode_path(g: &PropertyGraph, ids: &[Json]) -> Result<Value, String> {
    let id = |j: &Json| {
        j.as_str()
            .map(str::to_string)
            .ok_or_else(|| format!("bad path id {j}"))
    };
    let mut nodes = Vec::new();
    let mut rels = Vec::new();
    for (i, j) in ids.iter().enumerate() {
        let s = id(j)?;
        if i % 2 == 0 {
            nodes.push(
                g.node_by_name(&s)
                    .ok_or_else(|| format!("unknown node {s}"))?,
            );
        } else {
            rels.push(
                g.rel_by_name(&s)
                    .ok_or_else(|| format!("unknown rel {s}"))?,
            );
        }
    }
    PathValue::new(nodes, rels)
        .map(Value::Path)
        .map_err(|e| e.to_string())
}

fn encode_record(g: &PropertyGraph, r: &Record) -> Json {
    // Record iterates in name order, so the object is already canonical
    Json::Object(
        r.iter()
            .map(|(k, v)| (k.to_string(), encode_value(g, v)))
            .collect(),
    )
}

/// Distinct records with their counts, in canonical display order.
fn sorted_rows(g: &PropertyGraph, t: &Table) -> Vec<(Json, String, usize)> {
    let mut rows: Vec<(Json, String, usize)> = t
        .iter()
        .map(|(r, c)| {
            let j = encode_record(g, r);
            let key = j.to_string();
            (j, key, c)
        })
        .collect();
    rows.sort_by(|a, b| a.1.cmp(&b.1));
    rows
}

/// Compact text form used in TSV cells.
pub fn display_value(g: &PropertyGraph, v: &Value) -> String {
    let mut s = String::new();
    write_display(g, v, &mut s);
    s
}

fn write_display(g: &PropertyGraph, v: &Value, s: &mut String) {
    match v {
        Value::Null => s.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(s, "{b}");
        }
        Value::Int(i) => {
            let _ = write!(s, "{i}");
        }
        Value::Str(x) => s.push_str(&Json::String(x.clone()).to_string()),
        Value::Node(n) => s.push_str(g.node_name(*n)),
        Value::Rel(r) => s.push_str(g.rel_name(*r)),
        Value::List(items) => {
            s.push('[');
            for (i, w) in items.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_display(g, w, s);
            }
            s.push(']');
        }
        Value::Map(m) => {
            let mut entries: Vec<(&str, &Value)> = m.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            s.push('{');
            for (i, (k, w)) in entries.into_iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{k}: ");
                write_display(g, w, s);
            }
            s.push('}');
        }
        Value::Path(p) => {
            let _ = write!(s, "<{}>", path_ids(g, p).join(", "));
        }
    }
}

pub fn render_tsv(g: &PropertyGraph, t: &Table) -> String {
    let fields: Vec<&str> = t.fields().iter().map(String::as_str).collect();
    let mut out = fields.join("\t");
    let mut rows: Vec<(String, Vec<String>, usize)> = t
        .iter()
        .map(|(r, c)| {
            let cells = fields
                .iter()
                .map(|f| display_value(g, r.get(f).unwrap_or(&Value::Null)))
                .collect();
            (encode_record(g, r).to_string(), cells, c)
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, cells, count) in rows {
        for _ in 0..count {
            out.push('\n');
            out.push_str(&cells.join("\t"));
        }
    }
    out
}

pub fn render_json(g: &PropertyGraph, t: &Table) -> String {
    let mut rows = Vec::new();
    for (j, _, count) in sorted_rows(g, t) {
        for _ in 0..count {
            rows.push(j.clone());
        }
    }
    json!({ "fields": t.fields(), "rows": rows }).to_string()
}

pub fn render_counted_json(g: &PropertyGraph, t: &Table) -> String {
    let rows: Vec<Json> = sorted_rows(g, t)
        .into_iter()
        .map(|(j, _, count)| json!({ "record": j, "count": count }))
        .collect();
    json!({ "fields": t.fields(), "rows": rows }).to_string()
}

/// Inverse of [`render_counted_json`].
pub fn parse_counted_json(g: &PropertyGraph, text: &str) -> Result<Table, String> {
    let doc: Json = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let fields: BTreeSet<String> = doc["fields"]
        .as_array()
        .ok_or("missing fields")?
        .iter()
        .map(|f| {
            f.as_str()
                .map(str::to_string)
                .ok_or("field is not a string")
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::empty(fields.iter().cloned());
    for row in doc["rows"].as_array().ok_or("missing rows")? {
        let count = row["count"].as_u64().ok_or("missing count")? as usize;
        let mut r = Record::new();
        for (k, v) in row["record"].as_object().ok_or("missing record")? {
            r = r
                .with(k.clone(), decode_value(g, v)?)
                .map_err(|e| e.to_string())?;
        }
        t.push(r, count).map_err(|e| e.to_string())?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cypher_ref::fixtures;

    #[test]
    fn statements_split_outside_quotes() {
        assert_eq!(
            split_statements("RETURN ';' AS a;\nRETURN `x;y` AS b ;  ;"),
            vec!["RETURN ';' AS a", "RETURN `x;y` AS b"]
        );
    }

    #[test]
    fn values_round_trip() {
        let g = fixtures::teachers();
        let n = |s: &str| g.node_by_name(s).unwrap();
        let r1 = g.rel_by_name("r1").unwrap();
        let mut m = ValueMap::new();
        m.insert("node", Value::Node(n("n2")));
        m.insert("a", Value::list([Value::Null, Value::Bool(true)]));
        for v in [
            Value::Null,
            Value::Int(-3),
            Value::str("node"),
            Value::Node(n("n1")),
            Value::Rel(r1),
            Value::Path(PathValue::new(vec![n("n1"), n("n2")], vec![r1]).unwrap()),
            Value::Path(PathValue::single(n("n4"))),
            Value::Map(m),
            Value::Map(ValueMap::new()),
            Value::list([]),
        ] {
            assert_eq!(decode_value(&g, &encode_value(&g, &v)).unwrap(), v);
        }
    }

    #[test]
    fn display_forms() {
        let g = fixtures::teachers();
        let n1 = g.node_by_name("n1").unwrap();
        let r1 = g.rel_by_name("r1").unwrap();
        let n2 = g.node_by_name("n2").unwrap();
        let p = Value::Path(PathValue::new(vec![n1, n2], vec![r1]).unwrap());
        assert_eq!(display_value(&g, &p), "<n1, r1, n2>");
        assert_eq!(display_value(&g, &Value::str("a\tb")), "\"a\\tb\"");
        assert_eq!(display_value(&g, &Value::Null), "null");
    }
}
