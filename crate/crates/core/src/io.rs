//! TUDataset text-format ingestion and export, plus JSON graph/dataset files.
//!
//! A TUDataset directory holds `<name>_A.txt` (one `u, v` line per directed
//! edge listing, 1-based global node ids) and `<name>_graph_indicator.txt`
//! (graph id of each node, 1-based, non-decreasing). Graph labels, discrete
//! node labels and continuous node attributes are optional.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GraphDataset};

#[derive(Debug, Clone, Copy, Default)]
pub struct TuOptions {
    /// Standardize every feature coordinate across the dataset after loading.
    pub standardize: bool,
}

fn tu_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

/// Reads a file into `(line_number, trimmed_line)` pairs, skipping blank lines.
fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let t = l.trim();
            (!t.is_empty()).then(|| (i + 1, t.to_string()))
        })
        .collect())
}

fn read_optional(path: &Path) -> Result<Option<Vec<(usize, String)>>> {
    if path.exists() {
        read_lines(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_field<T: std::str::FromStr>(file: &Path, line: usize, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(file.display().to_string(), line, format!("cannot parse '{}'", raw.trim())))
}

pub fn parse_tudataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphDataset> {
    parse_tudataset_with(dir, name, TuOptions::default())
}

pub fn parse_tudataset_with(dir: impl AsRef<Path>, name: &str, options: TuOptions) -> Result<GraphDataset> {
    let dir = dir.as_ref();
    let indicator_path = tu_path(dir, name, "graph_indicator");
    let edges_path = tu_path(dir, name, "A");
    let file = |p: &Path| p.display().to_string();

    // Graph membership per node.
    let indicator = read_lines(&indicator_path)?;
    let mut graph_of = Vec::with_capacity(indicator.len());
    let mut expected = 1usize;
    for (line, raw) in &indicator {
        let gid: usize = parse_field(&indicator_path, *line, raw)?;
        if gid == expected {
            expected += 1;
        } else if gid + 1 != expected {
            return Err(Error::parse(
                file(&indicator_path),
                *line,
                format!("graph ids must be non-decreasing and contiguous from 1, found {gid} after {}", expected - 1),
            ));
        }
        graph_of.push(gid - 1);
    }
    let graph_count = expected - 1;
    let node_count = graph_of.len();
    let mut first_node = vec![0usize; graph_count + 1];
    for (v, &g) in graph_of.iter().enumerate().rev() {
        first_node[g] = v;
    }
    first_node[graph_count] = node_count;
    let local = |v: usize| v - first_node[graph_of[v]];

    // Edges, grouped per graph with local indices.
    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); graph_count];
    for (line, raw) in read_lines(&edges_path)? {
        let mut parts = raw.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(file(&edges_path), line, "expected 'u, v'"));
        };
        let u: usize = parse_field(&edges_path, line, a)?;
        let v: usize = parse_field(&edges_path, line, b)?;
        for w in [u, v] {
            if w == 0 || w > node_count {
                return Err(Error::parse(
                    file(&edges_path),
                    line,
                    format!("node index {w} out of range 1..={node_count}"),
                ));
            }
        }
        let (u, v) = (u - 1, v - 1);
        if u == v {
            return Err(Error::parse(file(&edges_path), line, format!("self-loop at node {}", u + 1)));
        }
        if graph_of[u] != graph_of[v] {
            return Err(Error::parse(
                file(&edges_path),
                line,
                format!("edge joins graphs {} and {}", graph_of[u] + 1, graph_of[v] + 1),
            ));
        }
        let (a, b) = (local(u), local(v));
        edges[graph_of[u]].insert((a.min(b), a.max(b)));
    }

    // Continuous attributes.
    let attr_path = tu_path(dir, name, "node_attributes");
    let attributes = match read_optional(&attr_path)? {
        Some(lines) => {
            if lines.len() != node_count {
                return Err(Error::parse(
                    file(&attr_path),
                    lines.last().map_or(0, |l| l.0),
                    format!("{} attribute rows for {node_count} nodes", lines.len()),
                ));
            }
            let mut rows: Vec<Vec<f64>> = Vec::with_capacity(node_count);
            for (line, raw) in &lines {
                let row = raw
                    .split(',')
                    .map(|x| parse_field::<f64>(&attr_path, *line, x))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(first) = rows.first() {
                    if first.len() != row.len() {
                        return Err(Error::parse(
                            file(&attr_path),
                            *line,
                            format!("ragged attribute row: {} values, expected {}", row.len(), first.len()),
                        ));
                    }
                }
                rows.push(row);
            }
            Some(rows)
        }
        None => None,
    };

    // Discrete labels, one-hot over the sorted label alphabet.
    let label_path = tu_path(dir, name, "node_labels");
    let node_labels = match read_optional(&label_path)? {
        Some(lines) => {
            if lines.len() != node_count {
                return Err(Error::parse(
                    file(&label_path),
                    lines.last().map_or(0, |l| l.0),
                    format!("{} node labels for {node_count} nodes", lines.len()),
                ));
            }
            let labels = lines
                .iter()
                .map(|(line, raw)| parse_field::<i64>(&label_path, *line, raw))
                .collect::<Result<Vec<_>>>()?;
            Some(labels)
        }
        None => None,
    };
    let alphabet: BTreeMap<i64, usize> = node_labels
        .iter()
        .flatten()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();

    let attr_dim = attributes.as_ref().map_or(0, |a| a.first().map_or(0, Vec::len));
    let dim = match attr_dim + alphabet.len() {
        0 => 1,
        d => d,
    };
    let feature = |v: usize| -> Vec<f64> {
        if attr_dim + alphabet.len() == 0 {
            return vec![1.0];
        }
        let mut x = Vec::with_capacity(dim);
        if let Some(a) = &attributes {
            x.extend_from_slice(&a[v]);
        }
        if let Some(labels) = &node_labels {
            let mut onehot = vec![0.0; alphabet.len()];
            onehot[alphabet[&labels[v]]] = 1.0;
            x.extend(onehot);
        }
        x
    };

    let mut graphs = Vec::with_capacity(graph_count);
    for (g, edge_set) in edges.into_iter().enumerate() {
        let features = (first_node[g]..first_node[g + 1]).flat_map(&feature).collect();
        graphs.push(AttributedGraph::from_flat(dim, features, edge_set)?);
    }

    let labels_path = tu_path(dir, name, "graph_labels");
    let labels = match read_optional(&labels_path)? {
        Some(lines) => {
            if lines.len() != graph_count {
                return Err(Error::parse(
                    file(&labels_path),
                    lines.last().map_or(0, |l| l.0),
                    format!("{} graph labels for {graph_count} graphs", lines.len()),
                ));
            }
            Some(
                lines
                    .iter()
                    .map(|(line, raw)| parse_field::<i64>(&labels_path, *line, raw))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        None => None,
    };

    let ds = GraphDataset::new(name, graphs, labels)?;
    if options.standardize {
        ds.standardized()
    } else {
        Ok(ds)
    }
}

/// Writes `ds` in TUDataset layout. Features are always written as
/// continuous node attributes, so reading the directory back reproduces the
/// dataset exactly.
pub fn write_tudataset(ds: &GraphDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut a = String::new();
    let mut indicator = String::new();
    let mut attributes = String::new();
    let mut offset = 0usize;
    for (gi, g) in ds.graphs.iter().enumerate() {
        for v in 0..g.node_count() {
            let _ = writeln!(indicator, "{}", gi + 1);
            let row: Vec<String> = g.feature(v).iter().map(f64::to_string).collect();
            let _ = writeln!(attributes, "{}", row.join(", "));
        }
        for &(u, v) in g.edges() {
            let _ = writeln!(a, "{}, {}", offset + u + 1, offset + v + 1);
            let _ = writeln!(a, "{}, {}", offset + v + 1, offset + u + 1);
        }
        offset += g.node_count();
    }
    let write = |suffix: &str, body: &str| {
        let path = tu_path(dir, &ds.name, suffix);
        fs::write(&path, body).map_err(|e| Error::io(path, e))
    };
    write("A", &a)?;
    write("graph_indicator", &indicator)?;
    write("node_attributes", &attributes)?;
    if let Some(labels) = &ds.labels {
        let body: String = labels.iter().map(|l| format!("{l}\n")).collect();
        write("graph_labels", &body)?;
    }
    Ok(())
}

pub fn read_graph_json(path: impl AsRef<Path>) -> Result<AttributedGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_graph_json(g: &AttributedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serde_json::to_string(g)?).map_err(|e| Error::io(path, e))
}

/// Dataset JSON: `{"name": ..., "graphs": [<graph>...], "labels": [...]}`.
pub fn read_dataset_json(path: impl AsRef<Path>) -> Result<GraphDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ds: GraphDataset = serde_json::from_str(&text)?;
    ds.validate()?;
    Ok(ds)
}

pub fn write_dataset_json(ds: &GraphDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, serde_json::to_string(ds)?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_graph;

    fn write_files(dir: &Path, name: &str, files: &[(&str, &str)]) {
        for (suffix, body) in files {
            fs::write(tu_path(dir, name, suffix), body).unwrap();
        }
    }

    #[test]
    fn one_hot_labels() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            "T",
            &[("A", "1, 2\n2, 1\n"), ("graph_indicator", "1\n1\n"), ("node_labels", "0\n1\n")],
        );
        let ds = parse_tudataset(dir.path(), "T").unwrap();
        assert_eq!(ds.len(), 1);
        let g = &ds.graphs[0];
        assert_eq!(g.dim(), 2);
        assert_eq!(g.features(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(ds.labels, None);
    }

    #[test]
    fn unlabeled_nodes_get_unit_scalar() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            "U",
            &[
                ("A", "1, 2\n3, 4\n4, 5\n"),
                ("graph_indicator", "1\n1\n2\n2\n2\n"),
                ("graph_labels", "1\n-1\n"),
            ],
        );
        let ds = parse_tudataset(dir.path(), "U").unwrap();
        assert_eq!(ds.len(), 2);
        assert!(ds.graphs.iter().all(|g| g.dim() == 1 && g.features().iter().all(|&x| x == 1.0)));
        assert_eq!(ds.graphs[1].edges(), &[(0, 1), (1, 2)]);
        assert_eq!(ds.labels, Some(vec![1, -1]));
    }

    #[test]
    fn attributes_precede_one_hot() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            "M",
            &[
                ("A", "1, 2\n"),
                ("graph_indicator", "1\n1\n"),
                ("node_attributes", "0.5, 2\n-1.5, 3\n"),
                ("node_labels", "7\n3\n"),
            ],
        );
        let g = &parse_tudataset(dir.path(), "M").unwrap().graphs[0];
        assert_eq!(g.feature(0), &[0.5, 2.0, 0.0, 1.0]);
        assert_eq!(g.feature(1), &[-1.5, 3.0, 1.0, 0.0]);
    }

    #[test]
    fn malformed_inputs() {
        let cases: &[(&[(&str, &str)], &str)] = &[
            (&[("graph_indicator", "1\n")], "missing A"),
            (&[("A", "1, 2\n")], "missing indicator"),
            (&[("A", "1, 3\n"), ("graph_indicator", "1\n1\n")], "index out of range"),
            (&[("A", "1, 1\n"), ("graph_indicator", "1\n1\n")], "self-loop"),
            (&[("A", "1, 2\n"), ("graph_indicator", "1\n3\n")], "gap in ids"),
            (&[("A", "1, 2\n"), ("graph_indicator", "2\n1\n")], "decreasing ids"),
            (
                &[("A", "1, 2\n"), ("graph_indicator", "1\n1\n"), ("node_attributes", "1, 2\n3\n")],
                "ragged attributes",
            ),
            (&[("A", "1, 2\n"), ("graph_indicator", "1\n2\n")], "edge across graphs"),
        ];
        for (files, what) in cases {
            let dir = tempfile::tempdir().unwrap();
            write_files(dir.path(), "B", files);
            assert!(parse_tudataset(dir.path(), "B").is_err(), "{what} should fail");
        }
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(parse_tudataset(dir.path(), "B"), Err(Error::Io { .. })));
    }

    #[test]
    fn tudataset_round_trip() {
        let graphs = (0..5).map(|s| random_graph(s as usize + 1, 0.5, 3, s)).collect::<Result<Vec<_>>>().unwrap();
        let ds = GraphDataset::new("R", graphs, Some(vec![0, 1, 0, 1, 1])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tudataset(&ds, dir.path()).unwrap();
        let back = parse_tudataset(dir.path(), "R").unwrap();
        assert_eq!(back, ds);
        // a second pass is byte-stable
        let dir2 = tempfile::tempdir().unwrap();
        write_tudataset(&back, dir2.path()).unwrap();
        for suffix in ["A", "graph_indicator", "node_attributes", "graph_labels"] {
            assert_eq!(
                fs::read(tu_path(dir.path(), "R", suffix)).unwrap(),
                fs::read(tu_path(dir2.path(), "R", suffix)).unwrap()
            );
        }
    }

    #[test]
    fn dataset_json_round_trip() {
        let graphs = (0..3).map(|s| random_graph(4, 0.5, 2, s)).collect::<Result<Vec<_>>>().unwrap();
        let ds = GraphDataset::new("J", graphs, None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.json");
        write_dataset_json(&ds, &path).unwrap();
        assert_eq!(read_dataset_json(&path).unwrap(), ds);
    }
}
