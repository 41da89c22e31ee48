//! Weighted, locally finite graphs `G = (V, E, μ, w)`.
//!
//! Vertices carry opaque string ids and a positive measure `μ(x)`; edges are
//! undirected with positive symmetric weights `w_xy`. The insertion order of
//! vertices fixes the integer index that every matrix-valued routine in the
//! crate uses, so results are reproducible bit for bit.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Immutable weighted graph with a stable vertex index.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    // neighbors[x] is sorted by neighbor index
    neighbors: Vec<Vec<(usize, f64)>>,
    // (u, v, w) with u < v, in insertion order
    edges: Vec<(usize, usize, f64)>,
}

/// Builds a graph from `(id, μ)` pairs and `(x, y, w)` triples.
///
/// Vertex order in `vertices` becomes the matrix index. Fails on non-positive
/// measures or weights, unknown endpoints, duplicate edges and self loops.
pub fn build_graph<V, E>(
    vertices: impl IntoIterator<Item = (V, f64)>,
    edges: impl IntoIterator<Item = (E, E, f64)>,
) -> Result<WeightedGraph>
where
    V: Into<String>,
    E: AsRef<str>,
{
    let mut ids = Vec::new();
    let mut index = HashMap::new();
    let mut measure = Vec::new();
    for (id, mu) in vertices {
        let id: String = id.into();
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::NonPositiveMeasure {
                vertex: id,
                value: mu,
            });
        }
        if index.contains_key(&id) {
            return Err(Error::DuplicateVertex(id));
        }
        index.insert(id.clone(), ids.len());
        ids.push(id);
        measure.push(mu);
    }
    if ids.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut neighbors = vec![Vec::new(); ids.len()];
    let mut edge_list = Vec::new();
    let mut seen = HashSet::new();
    for (u, v, w) in edges {
        let (u, v) = (u.as_ref(), v.as_ref());
        let iu = *index
            .get(u)
            .ok_or_else(|| Error::UnknownEndpoint(u.to_string()))?;
        let iv = *index
            .get(v)
            .ok_or_else(|| Error::UnknownEndpoint(v.to_string()))?;
        if iu == iv {
            return Err(Error::SelfLoop(u.to_string()));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::NonPositiveWeight {
                u: u.to_string(),
                v: v.to_string(),
                value: w,
            });
        }
        let key = (iu.min(iv), iu.max(iv));
        if !seen.insert(key) {
            return Err(Error::DuplicateEdge {
                u: u.to_string(),
                v: v.to_string(),
            });
        }
        neighbors[iu].push((iv, w));
        neighbors[iv].push((iu, w));
        edge_list.push((key.0, key.1, w));
    }
    for list in &mut neighbors {
        list.sort_by_key(|&(j, _)| j);
    }

    Ok(WeightedGraph {
        ids,
        index,
        measure,
        neighbors,
        edges: edge_list,
    })
}

impl WeightedGraph {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    /// Index of a vertex id.
    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.measure[x]
    }

    /// `inf_x μ(x)`.
    pub fn min_measure(&self) -> f64 {
        self.measure.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    /// Neighbors of `x` with edge weights, sorted by index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.neighbors[x]
    }

    /// Edge weight `w_xy`, zero when `x ≁ y`.
    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.neighbors[x]
            .binary_search_by_key(&y, |&(j, _)| j)
            .map(|pos| self.neighbors[x][pos].1)
            .unwrap_or(0.0)
    }

    /// Edges `(u, v, w)` with `u < v`, in insertion order.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(1/μ(x)) Σ_{y∼x} w_xy`.
    pub fn normalized_degree(&self, x: usize) -> f64 {
        self.neighbors[x].iter().map(|&(_, w)| w).sum::<f64>() / self.measure[x]
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap_or(0);
            for &(y, _) in &self.neighbors[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        !self.is_empty() && self.bfs_distances(0).iter().all(Option::is_some)
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::Disconnected)
        }
    }

    /// Materializes a function given as `id → value` in index order.
    pub fn function_from_map(&self, values: &HashMap<String, f64>) -> Result<Vec<f64>> {
        for key in values.keys() {
            self.index_of(key)?;
        }
        self.ids
            .iter()
            .map(|id| {
                values
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::UnknownVertex(id.clone()))
            })
            .collect()
    }
}

impl PartialEq for WeightedGraph {
    /// Equality of the data model, independent of vertex and edge order.
    fn eq(&self, other: &Self) -> bool {
        if self.len() != other.len() || self.edge_count() != other.edge_count() {
            return false;
        }
        let remap: Option<Vec<usize>> = self
            .ids
            .iter()
            .map(|id| other.index.get(id).copied())
            .collect();
        let Some(remap) = remap else {
            return false;
        };
        (0..self.len()).all(|x| self.measure[x] == other.measure[remap[x]])
            && self
                .edges
                .iter()
                .all(|&(u, v, w)| other.weight(remap[u], remap[v]) == w)
    }
}

/// Findings of [`validate_graph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub connected: bool,
    pub min_measure: f64,
    pub max_normalized_degree: f64,
    pub stochastically_complete_sufficient: bool,
    pub issues: Vec<String>,
}

/// Checks connectivity and the bounded-degree criterion
/// `sup_x (1/μ(x)) Σ_{y∼x} w_xy < ∞` for stochastic completeness.
pub fn validate_graph(g: &WeightedGraph) -> ValidationReport {
    let mut issues = Vec::new();
    let connected = g.is_connected();
    if !connected {
        let reached = g.bfs_distances(0).iter().filter(|d| d.is_some()).count();
        issues.push(format!(
            "graph is not connected: {reached} of {} vertices reachable from `{}`",
            g.len(),
            g.id(0)
        ));
    }
    let max_normalized_degree = (0..g.len())
        .map(|x| g.normalized_degree(x))
        .fold(0.0, f64::max);
    let sufficient = max_normalized_degree.is_finite();
    if !sufficient {
        issues.push("normalized degree is unbounded".to_string());
    }
    for x in 0..g.len() {
        if g.neighbors(x).is_empty() && g.len() > 1 {
            issues.push(format!("vertex `{}` is isolated", g.id(x)));
        }
    }
    ValidationReport {
        connected,
        min_measure: g.min_measure(),
        max_normalized_degree,
        stochastically_complete_sufficient: sufficient,
        issues,
    }
}

/// Hop-count distance `d(x, x0)`.
pub fn graph_distance(g: &WeightedGraph, x: &str, x0: &str) -> Result<usize> {
    let (ix, i0) = (g.index_of(x)?, g.index_of(x0)?);
    g.bfs_distances(i0)[ix].ok_or(Error::Disconnected)
}

/// Induced subgraph on `{x : d(x, x0) ≤ r}`, keeping the parent's vertex order.
pub fn ball(g: &WeightedGraph, x0: &str, r: usize) -> Result<WeightedGraph> {
    let center = g.index_of(x0)?;
    let dist = g.bfs_distances(center);
    let inside: Vec<bool> = dist.iter().map(|d| d.is_some_and(|d| d <= r)).collect();
    let vertices = (0..g.len())
        .filter(|&x| inside[x])
        .map(|x| (g.id(x).to_string(), g.mu(x)));
    let edges = g
        .edges()
        .iter()
        .filter(|&&(u, v, _)| inside[u] && inside[v])
        .map(|&(u, v, w)| (g.id(u), g.id(v), w));
    build_graph(vertices, edges)
}

/// Families produced by [`generate_standard`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphKind {
    /// `n` vertices `"0"…"n-1"` joined consecutively.
    #[serde(rename = "path")]
    Path,
    /// Path plus the closing edge `n-1 ~ 0`; requires `n ≥ 3`.
    #[serde(rename = "cycle")]
    Cycle,
    /// `{-R, …, R} ⊂ ℤ` in ascending order, ids are the integers.
    #[serde(rename = "lattice_ball_Z")]
    LatticeBallZ,
    /// `{(i, j) : |i| + |j| ≤ R} ⊂ ℤ²`, lexicographic order, ids `"i,j"`.
    #[serde(rename = "lattice_ball_Z2")]
    LatticeBallZ2,
    /// Center `"0"` and leaves `"1"…"n-1"`; `n` counts all vertices.
    #[serde(rename = "star")]
    Star,
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(GraphKind::Path),
            "cycle" => Ok(GraphKind::Cycle),
            "lattice_ball_Z" => Ok(GraphKind::LatticeBallZ),
            "lattice_ball_Z2" => Ok(GraphKind::LatticeBallZ2),
            "star" => Ok(GraphKind::Star),
            other => Err(Error::InvalidParams(format!("unknown graph kind `{other}`"))),
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Path => "path",
            GraphKind::Cycle => "cycle",
            GraphKind::LatticeBallZ => "lattice_ball_Z",
            GraphKind::LatticeBallZ2 => "lattice_ball_Z2",
            GraphKind::Star => "star",
        })
    }
}

/// Size and uniform overrides for [`generate_standard`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Vertex count for path, cycle and star.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Radius for the lattice balls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    /// Uniform measure, default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Uniform edge weight, default 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl GeneratorParams {
    pub fn with_n(n: usize) -> Self {
        GeneratorParams {
            n: Some(n),
            ..Default::default()
        }
    }

    pub fn with_radius(radius: usize) -> Self {
        GeneratorParams {
            radius: Some(radius),
            ..Default::default()
        }
    }
}

/// Deterministic test-fixture graphs.
pub fn generate_standard(kind: GraphKind, params: &GeneratorParams) -> Result<WeightedGraph> {
    let mu = params.mu.unwrap_or(1.0);
    let w = params.w.unwrap_or(1.0);
    let size = |name: &str, value: Option<usize>, min: usize| -> Result<usize> {
        match value {
            Some(v) if v >= min => Ok(v),
            Some(v) => Err(Error::InvalidParams(format!(
                "{kind} needs {name} >= {min}, got {v}"
            ))),
            None => Err(Error::InvalidParams(format!("{kind} needs `{name}`"))),
        }
    };
    let numbered = |n: usize| (0..n).map(move |i| (i.to_string(), mu));

    match kind {
        GraphKind::Path => {
            let n = size("n", params.n, 1)?;
            let edges: Vec<_> = (1..n).map(|i| ((i - 1).to_string(), i.to_string(), w)).collect();
            build_graph(numbered(n), edges)
        }
        GraphKind::Cycle => {
            let n = size("n", params.n, 3)?;
            let edges: Vec<_> = (0..n)
                .map(|i| (i.to_string(), ((i + 1) % n).to_string(), w))
                .collect();
            build_graph(numbered(n), edges)
        }
        GraphKind::Star => {
            let n = size("n", params.n, 1)?;
            let edges: Vec<_> = (1..n).map(|i| ("0".to_string(), i.to_string(), w)).collect();
            build_graph(numbered(n), edges)
        }
        GraphKind::LatticeBallZ => {
            let r = size("radius", params.radius, 0)? as i64;
            let vertices = (-r..=r).map(|i| (i.to_string(), mu));
            let edges: Vec<_> = (-r..r)
                .map(|i| (i.to_string(), (i + 1).to_string(), w))
                .collect();
            build_graph(vertices, edges)
        }
        GraphKind::LatticeBallZ2 => {
            let r = size("radius", params.radius, 0)? as i64;
            let inside = |i: i64, j: i64| i.abs() + j.abs() <= r;
            let label = |i: i64, j: i64| format!("{i},{j}");
            let mut vertices = Vec::new();
            let mut edges = Vec::new();
            for i in -r..=r {
                for j in -r..=r {
                    if !inside(i, j) {
                        continue;
                    }
                    vertices.push((label(i, j), mu));
                    if inside(i + 1, j) {
                        edges.push((label(i, j), label(i + 1, j), w));
                    }
                    if inside(i, j + 1) {
                        edges.push((label(i, j), label(i, j + 1), w));
                    }
                }
            }
            build_graph(vertices, edges)
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    id: String,
    mu: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    u: String,
    v: String,
    w: f64,
}

/// Serializes to the JSON graph format.
pub fn graph_to_json(g: &WeightedGraph) -> String {
    let file = GraphFile {
        vertices: (0..g.len())
            .map(|x| VertexRecord {
                id: g.id(x).to_string(),
                mu: g.mu(x),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .map(|&(u, v, w)| EdgeRecord {
                u: g.id(u).to_string(),
                v: g.id(v).to_string(),
                w,
            })
            .collect(),
    };
    // Plain structs of strings and finite floats always serialize.
    serde_json::to_string_pretty(&file).expect("graph serialization") + "\n"
}

/// Parses the JSON graph format.
pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| Error::from_json(&e))?;
    build_graph(
        file.vertices.into_iter().map(|v| (v.id, v.mu)),
        file.edges.into_iter().map(|e| (e.u, e.v, e.w)),
    )
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    graph_from_json(&text)
}

pub fn save_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, graph_to_json(g)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> WeightedGraph {
        build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0)]).unwrap()
    }

    fn p3() -> WeightedGraph {
        build_graph(
            [("a", 1.0), ("b", 1.0), ("c", 1.0)],
            [("a", "b", 1.0), ("b", "c", 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn k2_indices_follow_insertion_order() {
        let g = k2();
        assert_eq!(g.index_of("a").unwrap(), 0);
        assert_eq!(g.index_of("b").unwrap(), 1);
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 0), 1.0);
    }

    #[test]
    fn path_generator_matches_hand_built() {
        let gen = generate_standard(GraphKind::Path, &GeneratorParams::with_n(3)).unwrap();
        let hand = build_graph(
            [("0", 1.0), ("1", 1.0), ("2", 1.0)],
            [("0", "1", 1.0), ("1", "2", 1.0)],
        )
        .unwrap();
        assert_eq!(gen, hand);
        assert_eq!(p3().edge_count(), 2);
    }

    #[test]
    fn constructor_errors() {
        assert!(matches!(
            build_graph([("a", 1.0)], [("a", "a", 1.0)]),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            build_graph([("a", 0.0)], Vec::<(&str, &str, f64)>::new()),
            Err(Error::NonPositiveMeasure { .. })
        ));
        assert!(matches!(
            build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", -1.0)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            build_graph([("a", 1.0)], [("a", "z", 1.0)]),
            Err(Error::UnknownEndpoint(_))
        ));
        assert!(matches!(
            build_graph([("a", 1.0), ("b", 1.0)], [("a", "b", 1.0), ("b", "a", 2.0)]),
            Err(Error::DuplicateEdge { .. })
        ));
    }

    #[test]
    fn validation_reports() {
        let r = validate_graph(&k2());
        assert!(r.connected);
        assert_eq!(r.max_normalized_degree, 1.0);
        assert!(r.stochastically_complete_sufficient);
        assert!(r.issues.is_empty());

        let isolated = build_graph([("a", 1.0), ("b", 1.0)], Vec::<(&str, &str, f64)>::new())
            .unwrap();
        let r = validate_graph(&isolated);
        assert!(!r.connected);
        assert!(r.issues.iter().any(|s| s.contains("not connected")));

        let weighted = build_graph([("a", 0.5), ("b", 1.0)], [("a", "b", 2.0)]).unwrap();
        assert_eq!(validate_graph(&weighted).max_normalized_degree, 4.0);
    }

    #[test]
    fn distances() {
        let g = p3();
        assert_eq!(graph_distance(&g, "a", "c").unwrap(), 2);
        assert_eq!(graph_distance(&g, "b", "b").unwrap(), 0);
        let c6 = generate_standard(GraphKind::Cycle, &GeneratorParams::with_n(6)).unwrap();
        assert_eq!(graph_distance(&c6, "0", "3").unwrap(), 3);
        assert!(matches!(
            graph_distance(&g, "a", "q"),
            Err(Error::UnknownVertex(_))
        ));
        let split = build_graph([("a", 1.0), ("b", 1.0)], Vec::<(&str, &str, f64)>::new())
            .unwrap();
        assert!(matches!(
            graph_distance(&split, "a", "b"),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn balls() {
        let g = p3();
        assert_eq!(ball(&g, "b", 1).unwrap(), g);
        let single = ball(&g, "a", 0).unwrap();
        assert_eq!(single.ids(), ["a"]);
        assert_eq!(single.edge_count(), 0);

        let z = generate_standard(GraphKind::LatticeBallZ, &GeneratorParams::with_radius(5))
            .unwrap();
        let b = ball(&z, "0", 2).unwrap();
        assert_eq!(b.ids(), ["-2", "-1", "0", "1", "2"]);
        assert_eq!(b.edge_count(), 4);
    }

    #[test]
    fn generator_counts() {
        let k2 = generate_standard(GraphKind::Path, &GeneratorParams::with_n(2)).unwrap();
        assert_eq!((k2.len(), k2.edge_count()), (2, 1));
        let c4 = generate_standard(GraphKind::Cycle, &GeneratorParams::with_n(4)).unwrap();
        assert_eq!((c4.len(), c4.edge_count()), (4, 4));
        let z = generate_standard(GraphKind::LatticeBallZ, &GeneratorParams::with_radius(10))
            .unwrap();
        assert_eq!((z.len(), z.edge_count()), (21, 20));
        let z2 = generate_standard(GraphKind::LatticeBallZ2, &GeneratorParams::with_radius(2))
            .unwrap();
        // 1 + 4 + 8 vertices; 16 lattice edges inside the L1 ball of radius 2
        assert_eq!((z2.len(), z2.edge_count()), (13, 16));
        let star = generate_standard(GraphKind::Star, &GeneratorParams::with_n(5)).unwrap();
        assert_eq!((star.len(), star.edge_count()), (5, 4));
        assert!(generate_standard(GraphKind::Cycle, &GeneratorParams::with_n(2)).is_err());
        assert!(generate_standard(GraphKind::Path, &GeneratorParams::default()).is_err());
    }

    #[test]
    fn json_errors() {
        let bad = "{\n  \"vertices\": [\n    {\"id\": \"a\", \"mu\": 1.0},\n    oops\n  ],\n  \"edges\": []\n}";
        match graph_from_json(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        let negative = r#"{"vertices": [{"id": "a", "mu": -1.0}], "edges": []}"#;
        assert!(matches!(
            graph_from_json(negative),
            Err(Error::NonPositiveMeasure { .. })
        ));
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k2.json");
        let g = build_graph([("a", 0.1), ("b", 1.0 / 3.0)], [("a", "b", 0.7)]).unwrap();
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
        assert!(matches!(
            load_graph(dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
