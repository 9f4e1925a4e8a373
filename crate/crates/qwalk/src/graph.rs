//! Weighted graphs with vertex potentials and the q-Laplacian matrix family.
//!
//! Graphs are simple (no loops, no multi-edges) with strictly positive edge
//! weights. Self-interaction is modeled exclusively through the potential
//! vector, which enters the walk Hamiltonian as a diagonal term `q^2 V`; the
//! weighted degree matrix never includes potentials.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::RealMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("vertex {0} out of range for graph on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("loop edge ({0},{0}) rejected; model self-interaction via potentials")]
    LoopEdge(usize),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0},{1}) has non-positive weight {2}")]
    NonPositiveWeight(usize, usize, f64),
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("q parameter must be nonzero")]
    ZeroQ,
}

/// Deformation parameter of the q-Laplacian; any nonzero real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParameter(f64);

impl QParameter {
    pub fn new(q: f64) -> Result<Self, GraphError> {
        if q == 0.0 || !q.is_finite() {
            return Err(GraphError::ZeroQ);
        }
        Ok(QParameter(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for QParameter {
    type Error = GraphError;
    fn try_from(q: f64) -> Result<Self, GraphError> {
        QParameter::new(q)
    }
}

/// Which member of the matrix family drives the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    /// General q-Laplacian; requires a q parameter.
    #[serde(rename = "qlap")]
    QLaplacian,
    /// Ordinary Laplacian, the q = 1 member.
    #[serde(rename = "lap")]
    Laplacian,
    /// Signless Laplacian, the q = -1 member.
    Signless,
}

impl MatrixKind {
    /// The q value this kind pins down, if any.
    pub fn fixed_q(self) -> Option<f64> {
        match self {
            MatrixKind::QLaplacian => None,
            MatrixKind::Laplacian => Some(1.0),
            MatrixKind::Signless => Some(-1.0),
        }
    }

    /// Effective q: the pinned value for lap/signless, `q` otherwise.
    pub fn effective_q(self, q: f64) -> f64 {
        self.fixed_q().unwrap_or(q)
    }
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixKind::QLaplacian => write!(f, "qlap"),
            MatrixKind::Laplacian => write!(f, "lap"),
            MatrixKind::Signless => write!(f, "signless"),
        }
    }
}

/// Simple weighted graph on vertices `0..n` with per-vertex potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    /// Canonical key (u, v) with u < v.
    edges: BTreeMap<(usize, usize), f64>,
    potentials: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        Ok(WeightedGraph {
            n,
            edges: BTreeMap::new(),
            potentials: vec![0.0; n],
        })
    }

    /// Unweighted convenience constructor; every edge gets weight 1.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = WeightedGraph::new(n)?;
        for &(u, v) in edges {
            g.add_edge(u, v, 1.0)?;
        }
        Ok(g)
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange(v, self.n));
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight(u, v, w));
        }
        let key = (u.min(v), u.max(v));
        if self.edges.contains_key(&key) {
            return Err(GraphError::DuplicateEdge(key.0, key.1));
        }
        self.edges.insert(key, w);
        Ok(())
    }

    /// Adds `w` to the weight of (u, v), creating the edge if absent.
    /// Used by families that strengthen an existing edge.
    pub fn add_edge_weight(&mut self, u: usize, v: usize, w: f64) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(GraphError::NonPositiveWeight(u, v, w));
        }
        let key = (u.min(v), u.max(v));
        *self.edges.entry(key).or_insert(0.0) += w;
        Ok(())
    }

    pub fn set_potential(&mut self, v: usize, eta: f64) -> Result<(), GraphError> {
        self.check_vertex(v)?;
        self.potentials[v] = eta;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as (u, v, w) with u < v, sorted lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        if u == v {
            return None;
        }
        self.edges.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    pub fn potential(&self, v: usize) -> f64 {
        self.potentials[v]
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    /// Weighted degree: sum of incident edge weights. Potentials do not count.
    pub fn degree(&self, v: usize) -> f64 {
        self.edges
            .iter()
            .filter(|(&(a, b), _)| a == v || b == v)
            .map(|(_, &w)| w)
            .sum()
    }

    pub fn adjacency_matrix(&self) -> RealMatrix {
        let mut a = RealMatrix::zeros(self.n, self.n);
        for (&(u, v), &w) in &self.edges {
            a[(u, v)] = w;
            a[(v, u)] = w;
        }
        a
    }

    pub fn degree_matrix(&self) -> RealMatrix {
        let mut d = RealMatrix::zeros(self.n, self.n);
        for (&(u, v), &w) in &self.edges {
            d[(u, u)] += w;
            d[(v, v)] += w;
        }
        d
    }

    pub fn potential_matrix(&self) -> RealMatrix {
        RealMatrix::from_diagonal(&crate::RealVector::from_row_slice(&self.potentials))
    }

    /// q-Laplacian: (1 - q^2) I + q^2 (D + V) - q A.
    pub fn q_laplacian(&self, q: QParameter) -> RealMatrix {
        let q = q.value();
        let mut m = RealMatrix::identity(self.n, self.n) * (1.0 - q * q);
        for v in 0..self.n {
            m[(v, v)] += q * q * self.potentials[v];
        }
        for (&(u, v), &w) in &self.edges {
            m[(u, u)] += q * q * w;
            m[(v, v)] += q * q * w;
            m[(u, v)] -= q * w;
            m[(v, u)] -= q * w;
        }
        m
    }

    /// Laplacian D + V - A; coincides with the q-Laplacian at q = 1.
    pub fn laplacian(&self) -> RealMatrix {
        self.q_laplacian(QParameter(1.0))
    }

    /// Signless Laplacian D + V + A; coincides with the q-Laplacian at q = -1.
    pub fn signless_laplacian(&self) -> RealMatrix {
        self.q_laplacian(QParameter(-1.0))
    }

    /// Walk matrix of the requested kind (lap/signless ignore `q`).
    pub fn matrix(&self, kind: MatrixKind, q: QParameter) -> RealMatrix {
        match kind.fixed_q() {
            Some(fq) => self.q_laplacian(QParameter(fq)),
            None => self.q_laplacian(q),
        }
    }

    /// Twins: same neighbors outside {u, v} with equal weights, and equal
    /// potentials. For twins, e_u - e_v is an eigenvector of every member of
    /// the q-Laplacian family.
    pub fn are_twins(&self, u: usize, v: usize) -> Result<bool, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Ok(false);
        }
        if self.potentials[u] != self.potentials[v] {
            return Ok(false);
        }
        for x in 0..self.n {
            if x == u || x == v {
                continue;
            }
            if self.weight(u, x) != self.weight(v, x) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Wire format: `{"n": int, "edges": [[u,v,w], ...], "potentials": {"v": eta}}`.
/// Two-element edge entries get weight 1. Unknown keys are ignored so richer
/// documents (family instances) parse as plain graphs.
#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    #[serde(default)]
    edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    potentials: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeJson {
    Weighted(usize, usize, f64),
    Plain(usize, usize),
}

impl Serialize for WeightedGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let json = GraphJson {
            n: self.n,
            edges: self
                .edges()
                .map(|(u, v, w)| EdgeJson::Weighted(u, v, w))
                .collect(),
            potentials: self
                .potentials
                .iter()
                .enumerate()
                .filter(|(_, &eta)| eta != 0.0)
                .map(|(v, &eta)| (v.to_string(), eta))
                .collect(),
        };
        json.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightedGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = GraphJson::deserialize(deserializer)?;
        let mut g = WeightedGraph::new(json.n).map_err(D::Error::custom)?;
        for e in json.edges {
            let (u, v, w) = match e {
                EdgeJson::Weighted(u, v, w) => (u, v, w),
                EdgeJson::Plain(u, v) => (u, v, 1.0),
            };
            g.add_edge(u, v, w).map_err(D::Error::custom)?;
        }
        for (k, eta) in json.potentials {
            let v: usize = k
                .parse()
                .map_err(|_| D::Error::custom(format!("bad potential key {k:?}")))?;
            g.set_potential(v, eta).map_err(D::Error::custom)?;
        }
        Ok(g)
    }
}
