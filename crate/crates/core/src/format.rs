//! Line-oriented text formats.
//!
//! Problem files ("LMP1"):
//!
//! ```text
//! lmp 1
//! n <node_count>
//! c <node> <z> <y> <x>     # optional, either none or all nodes
//! e <u> <v> <weight>       # local edges
//! l <u> <v> <weight>       # lifted edges
//! ```
//!
//! Labeling files are `<node> <label>` lines covering every node;
//! attribution files are sparse `<node> <class>` lines; path files are
//! `<merge_probability> <node> <node> ...` lines.
//!
//! Serialization is canonical: sorted lines, fixed 9-decimal number
//! formatting and a trailing newline, so serializing a parsed canonical file
//! reproduces it byte for byte. Parsers accept `#` comments and blank lines.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, NodeLabeling};
use crate::lifting::{Attribution, PathEvidence};
use crate::objective::LiftedProblem;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown header {header:?}, expected \"lmp 1\"")]
    UnknownVersion { line: usize, header: String },
    #[error("missing \"lmp 1\" header")]
    MissingHeader,
    #[error("missing \"n <node_count>\" line")]
    MissingNodeCount,
    #[error("line {second}: duplicate local edge ({u}, {v}), first seen on line {first}")]
    DuplicateLocalEdge {
        u: usize,
        v: usize,
        first: usize,
        second: usize,
    },
    #[error("line {second}: duplicate lifted edge ({u}, {v}), first seen on line {first}")]
    DuplicateLiftedEdge {
        u: usize,
        v: usize,
        first: usize,
        second: usize,
    },
    #[error(
        "line {lifted_line}: lifted edge ({u}, {v}) duplicates the local edge on line {local_line}"
    )]
    LiftedDuplicatesLocal {
        u: usize,
        v: usize,
        local_line: usize,
        lifted_line: usize,
    },
    #[error("coordinates given for {got} of {expected} nodes")]
    PartialCoordinates { expected: usize, got: usize },
    #[error("labeling misses node {0}")]
    MissingNode(usize),
    #[error("line {line}: duplicate entry for node {node}")]
    DuplicateNode { node: usize, line: usize },
}

/// Canonical fixed-point formatting used for every number we write.
pub fn fmt_f64(value: f64) -> String {
    // normalize negative zero so canonical output is unique
    let value = if value == 0.0 { 0.0 } else { value };
    format!("{value:.9}")
}

fn malformed(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize, FormatError> {
    token
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} {token:?}")))
}

fn parse_i64(token: &str, line: usize, what: &str) -> Result<i64, FormatError> {
    token
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} {token:?}")))
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64, FormatError> {
    let value: f64 = token
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} {token:?}")))?;
    if !value.is_finite() {
        return Err(malformed(line, format!("non-finite {what} {token:?}")));
    }
    Ok(value)
}

/// Lines with content: `(1-based line number, trimmed text)`.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_problem(text: &str) -> Result<LiftedProblem, FormatError> {
    let mut lines = significant_lines(text);
    match lines.next() {
        Some((_, "lmp 1")) => {}
        Some((line, other)) => {
            return Err(FormatError::UnknownVersion {
                line,
                header: other.to_string(),
            })
        }
        None => return Err(FormatError::MissingHeader),
    }

    let mut node_count: Option<usize> = None;
    let mut coords: Vec<Option<[i64; 3]>> = Vec::new();
    let mut coord_lines = 0usize;
    let mut local: Vec<((usize, usize), f64)> = Vec::new();
    let mut local_line_of: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();
    let mut lifted: Vec<((usize, usize), f64)> = Vec::new();
    let mut lifted_line_of: std::collections::HashMap<(usize, usize), usize> =
        std::collections::HashMap::new();

    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let n = match (tokens[0], node_count) {
            ("n", Some(_)) => return Err(malformed(line, "duplicate \"n\" line")),
            ("n", None) => {
                if tokens.len() != 2 {
                    return Err(malformed(line, "expected \"n <node_count>\""));
                }
                let count = parse_usize(tokens[1], line, "node count")?;
                if count == 0 {
                    return Err(malformed(line, "node count must be at least 1"));
                }
                node_count = Some(count);
                coords = vec![None; count];
                continue;
            }
            (_, None) => return Err(malformed(line, "data before the \"n\" line")),
            (_, Some(n)) => n,
        };
        let check_node = |token: &str, what: &str| -> Result<usize, FormatError> {
            let node = parse_usize(token, line, what)?;
            if node >= n {
                return Err(malformed(line, format!("node {node} outside [0, {n})")));
            }
            Ok(node)
        };
        match tokens[0] {
            "c" => {
                if tokens.len() != 5 {
                    return Err(malformed(line, "expected \"c <node> <z> <y> <x>\""));
                }
                let node = check_node(tokens[1], "node")?;
                if coords[node].is_some() {
                    return Err(FormatError::DuplicateNode { node, line });
                }
                coords[node] = Some([
                    parse_i64(tokens[2], line, "coordinate")?,
                    parse_i64(tokens[3], line, "coordinate")?,
                    parse_i64(tokens[4], line, "coordinate")?,
                ]);
                coord_lines += 1;
            }
            "e" | "l" => {
                if tokens.len() != 4 {
                    return Err(malformed(
                        line,
                        format!("expected \"{} <u> <v> <weight>\"", tokens[0]),
                    ));
                }
                let u = check_node(tokens[1], "endpoint")?;
                let v = check_node(tokens[2], "endpoint")?;
                if u == v {
                    return Err(malformed(line, format!("self-loop ({u}, {v})")));
                }
                let w = parse_f64(tokens[3], line, "weight")?;
                let pair = (u.min(v), u.max(v));
                if tokens[0] == "e" {
                    if let Some(&first) = local_line_of.get(&pair) {
                        return Err(FormatError::DuplicateLocalEdge {
                            u: pair.0,
                            v: pair.1,
                            first,
                            second: line,
                        });
                    }
                    local_line_of.insert(pair, line);
                    local.push((pair, w));
                } else {
                    if let Some(&local_line) = local_line_of.get(&pair) {
                        return Err(FormatError::LiftedDuplicatesLocal {
                            u: pair.0,
                            v: pair.1,
                            local_line,
                            lifted_line: line,
                        });
                    }
                    if let Some(&first) = lifted_line_of.get(&pair) {
                        return Err(FormatError::DuplicateLiftedEdge {
                            u: pair.0,
                            v: pair.1,
                            first,
                            second: line,
                        });
                    }
                    lifted_line_of.insert(pair, line);
                    lifted.push((pair, w));
                }
            }
            other => {
                return Err(malformed(line, format!("unknown record {other:?}")));
            }
        }
    }

    let n = node_count.ok_or(FormatError::MissingNodeCount)?;
    let coordinates = if coord_lines == 0 {
        None
    } else if coord_lines == n {
        Some(coords.into_iter().map(|c| c.unwrap()).collect())
    } else {
        return Err(FormatError::PartialCoordinates {
            expected: n,
            got: coord_lines,
        });
    };

    // a lifted "e" line may appear after the "l" line duplicating it; the
    // incremental maps above catch the common direction, this catches the rest
    for (pair, _) in &lifted {
        if let Some(&local_line) = local_line_of.get(pair) {
            return Err(FormatError::LiftedDuplicatesLocal {
                u: pair.0,
                v: pair.1,
                local_line,
                lifted_line: lifted_line_of[pair],
            });
        }
    }

    local.sort_by_key(|&(pair, _)| pair);
    lifted.sort_by_key(|&(pair, _)| pair);
    let (local_pairs, local_weights): (Vec<_>, Vec<_>) = local.into_iter().unzip();
    let (lifted_pairs, lifted_weights): (Vec<_>, Vec<_>) = lifted.into_iter().unzip();
    let graph = Graph::new(n, &local_pairs)
        .map_err(|e| malformed(0, e.to_string()))?;
    LiftedProblem::new(graph, local_weights, lifted_pairs, lifted_weights, coordinates)
        .map_err(|e| malformed(0, e.to_string()))
}

pub fn serialize_problem(problem: &LiftedProblem) -> String {
    let mut out = String::new();
    out.push_str("lmp 1\n");
    let _ = writeln!(out, "n {}", problem.node_count());
    if let Some(coords) = problem.coordinates() {
        for (node, c) in coords.iter().enumerate() {
            let _ = writeln!(out, "c {} {} {} {}", node, c[0], c[1], c[2]);
        }
    }
    for (i, &(u, v)) in problem.graph().edges().iter().enumerate() {
        let _ = writeln!(out, "e {} {} {}", u, v, fmt_f64(problem.local_weights()[i]));
    }
    for (i, &(u, v)) in problem.lifted_edges().iter().enumerate() {
        let _ = writeln!(out, "l {} {} {}", u, v, fmt_f64(problem.lifted_weights()[i]));
    }
    out
}

pub fn parse_labeling(text: &str) -> Result<NodeLabeling, FormatError> {
    let mut by_node: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for (line, content) in significant_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(malformed(line, "expected \"<node> <label>\""));
        }
        let node = parse_usize(tokens[0], line, "node")?;
        let label = parse_usize(tokens[1], line, "label")?;
        if by_node.insert(node, label).is_some() {
            return Err(FormatError::DuplicateNode { node, line });
        }
    }
    let n = by_node.len();
    let mut labels = Vec::with_capacity(n);
    for node in 0..n {
        match by_node.get(&node) {
            Some(&label) => labels.push(label),
            None => return Err(FormatError::MissingNode(node)),
        }
    }
    Ok(NodeLabeling::from_labels(&labels))
}

pub fn serialize_labeling(labeling: &NodeLabeling) -> String {
    let mut out = String::new();
    for (node, &label) in labeling.labels().iter().enumerate() {
        let _ = writeln!(out, "{node} {label}");
    }
    out
}

pub fn parse_attribution(text: &str) -> Result<Attribution, FormatError> {
    let mut attribution = Attribution::new();
    for (line, content) in significant_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(malformed(line, "expected \"<node> <class>\""));
        }
        let node = parse_usize(tokens[0], line, "node")?;
        let class = parse_usize(tokens[1], line, "class")?;
        if attribution.get(node).is_some() {
            return Err(FormatError::DuplicateNode { node, line });
        }
        attribution.insert(node, class);
    }
    Ok(attribution)
}

pub fn serialize_attribution(attribution: &Attribution) -> String {
    let mut out = String::new();
    for (node, class) in attribution.iter() {
        let _ = writeln!(out, "{node} {class}");
    }
    out
}

pub fn parse_paths(text: &str) -> Result<Vec<PathEvidence>, FormatError> {
    let mut paths = Vec::new();
    for (line, content) in significant_lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(malformed(
                line,
                "expected \"<merge_probability> <node> <node> ...\"",
            ));
        }
        let p = parse_f64(tokens[0], line, "merge probability")?;
        let nodes = tokens[1..]
            .iter()
            .map(|t| parse_usize(t, line, "node"))
            .collect::<Result<Vec<_>, _>>()?;
        let evidence =
            PathEvidence::new(nodes, p).map_err(|e| malformed(line, e.to_string()))?;
        paths.push(evidence);
    }
    Ok(paths)
}

pub fn serialize_paths(paths: &[PathEvidence]) -> String {
    let mut out = String::new();
    for p in paths {
        out.push_str(&fmt_f64(p.merge_probability()));
        for node in p.path() {
            let _ = write!(out, " {node}");
        }
        out.push('\n');
    }
    out
}
