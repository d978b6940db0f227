//! Plain-text graph, feature and cascade files.
//!
//! * edge list: one `src dst` per line (whitespace or tab separated), `#` comments
//! * features: CSV without header, row `i` belongs to node `i`
//! * cascades: `cascade_id u v` per line

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::debug;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, DiffusionDataset};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Default)]
pub struct EdgeListOptions {
    /// Expand every line into both directions.
    pub undirected: bool,
    /// Assign dense ids by first appearance instead of using the integers as ids.
    pub relabel: bool,
    /// Declared node count; endpoints at or above it are an error.
    pub node_count: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: AttributedGraph,
    /// Original label of each dense id, present when relabeling.
    pub labels: Option<Vec<String>>,
}

pub(crate) fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Node count, edges, and original labels when relabeling.
pub type ParsedEdges = (usize, Vec<(usize, usize)>, Option<Vec<String>>);

/// Edge list and edge-derived node count, before features are attached.
pub fn parse_edge_list(text: &str, path: &Path, opts: &EdgeListOptions) -> Result<ParsedEdges> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut raw = Vec::new();
    let mut max_id = None::<usize>;
    for (line, l) in content_lines(text) {
        let mut it = l.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(
                path,
                line,
                format!("expected `src dst`, got `{l}`"),
            ));
        };
        let (u, v) = if opts.relabel {
            let mut id = |s: &str| {
                *ids.entry(s.to_owned()).or_insert_with(|| {
                    labels.push(s.to_owned());
                    labels.len() - 1
                })
            };
            (id(a), id(b))
        } else {
            let p = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(path, line, format!("`{s}` is not a node id")))
            };
            (p(a)?, p(b)?)
        };
        if let Some(n) = opts.node_count {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "{}:{line}: endpoint outside [0, {n})",
                    path.display()
                )));
            }
        }
        max_id = max_id.max(Some(u.max(v)));
        raw.push((u, v));
    }
    let n = opts
        .node_count
        .unwrap_or_else(|| max_id.map_or(0, |m| m + 1));

    let mut seen = HashSet::with_capacity(raw.len() * 2);
    let mut edges = Vec::with_capacity(raw.len() * if opts.undirected { 2 } else { 1 });
    let mut dropped = 0usize;
    for (u, v) in raw {
        if u == v {
            dropped += 1;
            continue;
        }
        let dirs: &[(usize, usize)] = if opts.undirected {
            &[(u, v), (v, u)]
        } else {
            &[(u, v)]
        };
        for &e in dirs {
            if seen.insert(e) {
                edges.push(e);
            } else if !opts.undirected {
                dropped += 1;
            }
        }
    }
    if dropped > 0 {
        debug!(
            "{}: dropped {dropped} self-loops/duplicates",
            path.display()
        );
    }
    Ok((n, edges, opts.relabel.then_some(labels)))
}

pub fn parse_features(text: &str, path: &Path) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(text) {
        let row = l
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("`{s}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Dimension(format!(
                    "{}:{line}: {} columns, expected {}",
                    path.display(),
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(Matrix::from_rows(&rows))
}

/// Loads a directed graph with integer node ids. Without a feature file the
/// graph gets a single normalized-degree feature.
pub fn load_attributed_graph(
    edge_path: &Path,
    feature_path: Option<&Path>,
) -> Result<AttributedGraph> {
    load_attributed_graph_with(edge_path, feature_path, &EdgeListOptions::default())
        .map(|l| l.graph)
}

pub fn load_attributed_graph_with(
    edge_path: &Path,
    feature_path: Option<&Path>,
    opts: &EdgeListOptions,
) -> Result<LoadedGraph> {
    let (n, edges, labels) = parse_edge_list(&read(edge_path)?, edge_path, opts)?;
    let graph = match feature_path {
        None => AttributedGraph::with_degree_features(n, edges)?,
        Some(fp) => {
            let x = parse_features(&read(fp)?, fp)?;
            if x.rows() != n {
                return Err(Error::Dimension(format!(
                    "{}: {} feature rows for {n} nodes",
                    fp.display(),
                    x.rows()
                )));
            }
            AttributedGraph::new(n, edges, x)?
        }
    };
    Ok(LoadedGraph { graph, labels })
}

pub fn parse_dataset(text: &str, path: &Path, graph: &AttributedGraph) -> Result<DiffusionDataset> {
    let mut records = Vec::new();
    for (line, l) in content_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(
                path,
                line,
                format!("expected `cascade u v`, got `{l}`"),
            ));
        }
        let p = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| parse_err(path, line, format!("`{s}` is not a node id")))
        };
        records.push((f[0].to_owned(), p(f[1])?, p(f[2])?));
    }
    if records.is_empty() {
        return Err(Error::Empty("diffusion dataset"));
    }
    DiffusionDataset::from_records(graph, records)
}

pub fn load_diffusion_dataset(path: &Path, graph: &AttributedGraph) -> Result<DiffusionDataset> {
    parse_dataset(&read(path)?, path, graph)
}

pub fn format_edge_list(graph: &AttributedGraph) -> String {
    let mut s = String::with_capacity(graph.edge_count() * 8);
    for &(u, v) in graph.edges() {
        let _ = writeln!(s, "{u}\t{v}");
    }
    s
}

/// Shortest round-trip decimal representation; reloads bit-exactly.
pub fn format_features(x: &Matrix) -> String {
    let mut s = String::new();
    for row in x.iter_rows() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}

pub fn format_dataset(ds: &DiffusionDataset) -> String {
    let mut s = String::new();
    for (c, u, v) in ds.records() {
        let _ = writeln!(s, "{c} {u} {v}");
    }
    s
}

/// Writes `<stem>.edges` and `<stem>.features.csv` next to each other.
pub fn write_graph(graph: &AttributedGraph, edge_path: &Path, feature_path: &Path) -> Result<()> {
    write(edge_path, &format_edge_list(graph))?;
    write(feature_path, &format_features(graph.features()))
}

pub fn write_dataset(ds: &DiffusionDataset, path: &Path) -> Result<()> {
    write(path, &format_dataset(ds))
}

/// Sidecar file for relabeled inputs: `dense_id original_label` per line.
pub fn write_label_map(labels: &[String], path: &Path) -> Result<()> {
    let mut s = String::new();
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(s, "{i} {l}");
    }
    write(path, &s)
}

pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
