//! Parameterized graph constructors with their canonical involutions,
//! labeled marker vertices, and the transfer claims each construction
//! carries.
//!
//! Labels are 0-based throughout. Constructions that are usually described
//! with 1-based labels keep their shape under the shift; marker names (a, b,
//! c, d, hub, left, right, mid) expose the special vertices without
//! renumbering.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, WeightedGraph};
use crate::involution::{Involution, InvolutionError, InvolutionJson};
use crate::timeexpr::{TimeExpr, TimeExprError};
use crate::transfer::StateSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FamilyError {
    #[error("bad family parameter: {0}")]
    BadParameter(String),
    #[error("no marker named {0:?}")]
    MarkerMissing(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
    #[error(transparent)]
    Time(#[from] TimeExprError),
}

/// Which walk Hamiltonian a claim is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimMatrix {
    /// Holds for every nonzero q.
    AnyQ,
    /// Laplacian only (q = 1).
    LaplacianOnly,
    /// Signless Laplacian only (q = -1).
    SignlessOnly,
    /// A single specific q.
    FixedQ(f64),
}

impl ClaimMatrix {
    /// Whether the claim applies at this q sample.
    pub fn admits(&self, q: f64) -> bool {
        match self {
            ClaimMatrix::AnyQ => true,
            ClaimMatrix::LaplacianOnly => q == 1.0,
            ClaimMatrix::SignlessOnly => q == -1.0,
            ClaimMatrix::FixedQ(f) => (q - f).abs() <= 1e-12 * f.abs().max(1.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ClaimMatrix::AnyQ => "any-q".into(),
            ClaimMatrix::LaplacianOnly => "lap".into(),
            ClaimMatrix::SignlessOnly => "signless".into(),
            ClaimMatrix::FixedQ(f) => format!("q={f:.6}"),
        }
    }
}

/// A PST claim carried by a construction: states, transfer time as a
/// function of q, and the matrix kind it is stated for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PstClaim {
    pub id: String,
    pub x: StateSpec,
    pub y: StateSpec,
    pub time: TimeExpr,
    pub matrix: ClaimMatrix,
}

impl PstClaim {
    fn pair_any_q(id: &str, x: (usize, usize), y: (usize, usize), time: &str) -> Self {
        PstClaim {
            id: id.into(),
            x: StateSpec::Pair(x.0, x.1),
            y: StateSpec::Pair(y.0, y.1),
            time: time.parse().expect("claim time expression"),
            matrix: ClaimMatrix::AnyQ,
        }
    }

    fn pair_at_const(
        id: &str,
        x: (usize, usize),
        y: (usize, usize),
        t: f64,
        matrix: ClaimMatrix,
    ) -> Self {
        PstClaim {
            id: id.into(),
            x: StateSpec::Pair(x.0, x.1),
            y: StateSpec::Pair(y.0, y.1),
            time: TimeExpr::constant(t),
            matrix,
        }
    }
}

/// A constructed graph bundled with its canonical involution, marker
/// vertices, and carried claims.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    pub name: String,
    pub graph: WeightedGraph,
    pub involution: Option<Involution>,
    pub markers: BTreeMap<String, usize>,
    pub claims: Vec<PstClaim>,
    pub notes: Vec<String>,
}

impl FamilyInstance {
    fn new(name: impl Into<String>, graph: WeightedGraph) -> Self {
        FamilyInstance {
            name: name.into(),
            graph,
            involution: None,
            markers: BTreeMap::new(),
            claims: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn marker(&self, name: &str) -> Result<usize, FamilyError> {
        self.markers
            .get(name)
            .copied()
            .ok_or_else(|| FamilyError::MarkerMissing(name.into()))
    }
}

/// Wire form of a FamilyInstance; the involution is stored as orbits and
/// re-verified against the graph on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyInstanceJson {
    pub name: String,
    pub graph: WeightedGraph,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub involution: Option<InvolutionJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub markers: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<PstClaim>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl From<&FamilyInstance> for FamilyInstanceJson {
    fn from(fi: &FamilyInstance) -> Self {
        FamilyInstanceJson {
            name: fi.name.clone(),
            graph: fi.graph.clone(),
            involution: fi.involution.as_ref().map(InvolutionJson::from),
            markers: fi.markers.clone(),
            claims: fi.claims.clone(),
            notes: fi.notes.clone(),
        }
    }
}

impl FamilyInstanceJson {
    pub fn realize(self) -> Result<FamilyInstance, FamilyError> {
        let involution = match &self.involution {
            Some(js) => Some(js.realize(&self.graph)?),
            None => None,
        };
        Ok(FamilyInstance {
            name: self.name,
            graph: self.graph,
            involution,
            markers: self.markers,
            claims: self.claims,
            notes: self.notes,
        })
    }
}

fn path_graph(n: usize) -> Result<WeightedGraph, FamilyError> {
    let mut g = WeightedGraph::new(n)?;
    for v in 0..n.saturating_sub(1) {
        g.add_edge(v, v + 1, 1.0)?;
    }
    Ok(g)
}

fn cycle_graph(n: usize) -> Result<WeightedGraph, FamilyError> {
    if n < 3 {
        return Err(FamilyError::BadParameter(format!(
            "cycle needs at least 3 vertices, got {n}"
        )));
    }
    let mut g = WeightedGraph::new(n)?;
    for v in 0..n {
        g.add_edge(v, (v + 1) % n, 1.0)?;
    }
    Ok(g)
}

pub fn path(n: usize) -> Result<FamilyInstance, FamilyError> {
    let mut fi = FamilyInstance::new("path", path_graph(n)?);
    fi.markers.insert("left".into(), 0);
    fi.markers.insert("right".into(), n - 1);
    if n % 2 == 1 {
        fi.markers.insert("mid".into(), n / 2);
    }
    if n >= 2 {
        let perm: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
        fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    }
    if n == 2 {
        fi.claims.push(PstClaim {
            id: "p2-vertex".into(),
            x: StateSpec::Vertex(0),
            y: StateSpec::Vertex(1),
            time: TimeExpr::pi_over_2q(),
            matrix: ClaimMatrix::AnyQ,
        });
    }
    Ok(fi)
}

pub fn cycle(n: usize) -> Result<FamilyInstance, FamilyError> {
    let mut fi = FamilyInstance::new("cycle", cycle_graph(n)?);
    // Reflection through vertex 0.
    let perm: Vec<usize> = (0..n).map(|v| (n - v) % n).collect();
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    Ok(fi)
}

pub fn complete_bipartite(m: usize, n: usize) -> Result<FamilyInstance, FamilyError> {
    if m == 0 || n == 0 {
        return Err(FamilyError::BadParameter(
            "complete bipartite parts must be nonempty".into(),
        ));
    }
    let mut g = WeightedGraph::new(m + n)?;
    for x in 0..m {
        for y in 0..n {
            g.add_edge(x, m + y, 1.0)?;
        }
    }
    let mut fi = FamilyInstance::new("complete-bipartite", g);
    let mut perm: Vec<usize> = (0..m + n).collect();
    if m >= 2 {
        perm.swap(0, 1);
    } else if n >= 2 {
        perm.swap(m, m + 1);
    } else {
        // K_{1,1}: swapping the two sides is the only symmetry.
        perm.swap(0, 1);
    }
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    Ok(fi)
}

/// Wheel: a rim cycle plus a hub adjacent to every rim vertex. The 5-vertex
/// wheel uses the reference labeling (rim 4-cycle 0-1-3-2, hub 4) so its
/// q-Laplacian matches the standard displayed block matrix entry for entry;
/// larger wheels use the natural rim order.
pub fn wheel(n: usize) -> Result<FamilyInstance, FamilyError> {
    if n < 4 {
        return Err(FamilyError::BadParameter(format!(
            "wheel needs at least 4 vertices, got {n}"
        )));
    }
    let hub = n - 1;
    let mut g = WeightedGraph::new(n)?;
    if n == 5 {
        for (u, v) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            g.add_edge(u, v, 1.0)?;
        }
    } else {
        let r = n - 1;
        for v in 0..r {
            g.add_edge(v, (v + 1) % r, 1.0)?;
        }
    }
    for v in 0..hub {
        g.add_edge(v, hub, 1.0)?;
    }
    let mut fi = FamilyInstance::new("wheel", g);
    fi.markers.insert("hub".into(), hub);
    let perm: Vec<usize> = if n == 5 {
        vec![2, 3, 0, 1, 4]
    } else {
        let r = n - 1;
        (0..n).map(|v| if v == hub { v } else { (r - v) % r }).collect()
    };
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    Ok(fi)
}

/// Path with potentials w1, w2 at the two end vertices only.
pub fn path_with_end_potentials(
    n: usize,
    w1: f64,
    w2: f64,
) -> Result<FamilyInstance, FamilyError> {
    if n < 2 {
        return Err(FamilyError::BadParameter(format!(
            "potential path needs at least 2 vertices, got {n}"
        )));
    }
    let mut g = path_graph(n)?;
    g.set_potential(0, w1)?;
    g.set_potential(n - 1, w2)?;
    let mut fi = FamilyInstance::new("path-potentials", g);
    fi.markers.insert("left".into(), 0);
    fi.markers.insert("right".into(), n - 1);
    if n % 2 == 1 {
        fi.markers.insert("mid".into(), n / 2);
    }
    if w1 == w2 {
        let perm: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
        fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    }
    // Unit end potentials put the walk in the plain-adjacency regime, where
    // the short-path transfers survive for every q.
    if w1 == 1.0 && w2 == 1.0 {
        match n {
            3 => fi.claims.push(PstClaim::pair_any_q(
                "p3-potential-pair",
                (0, 1),
                (1, 2),
                "pi/(q*sqrt(2))",
            )),
            5 => fi.claims.push(PstClaim::pair_any_q(
                "p5-potential-pair",
                (0, 4),
                (1, 3),
                "pi/(2q)",
            )),
            7 => fi.claims.push(PstClaim::pair_any_q(
                "p7-potential-pair",
                (0, 6),
                (2, 4),
                "pi/(q*sqrt(2))",
            )),
            _ => {}
        }
    }
    Ok(fi)
}

/// Even cycle with a pendant path attached at vertex 0. The reflection
/// through the attachment point is an involution whose minus sector is an
/// interior path, so the 6- and 8-cycles inherit pair PST from the 2- and
/// 3-vertex path transfers.
pub fn cycle_with_tail(cycle_len: usize, tail_len: usize) -> Result<FamilyInstance, FamilyError> {
    if !(cycle_len == 6 || cycle_len == 8) {
        return Err(FamilyError::BadParameter(format!(
            "tail construction is stated for cycles of length 6 or 8, got {cycle_len}"
        )));
    }
    if tail_len == 0 {
        return Err(FamilyError::BadParameter("tail must be nonempty".into()));
    }
    let n = cycle_len + tail_len;
    let mut g = WeightedGraph::new(n)?;
    for v in 0..cycle_len {
        g.add_edge(v, (v + 1) % cycle_len, 1.0)?;
    }
    g.add_edge(0, cycle_len, 1.0)?;
    for v in cycle_len..n - 1 {
        g.add_edge(v, v + 1, 1.0)?;
    }
    let mut fi = FamilyInstance::new("cycle-with-tail", g);
    let perm: Vec<usize> = (0..n)
        .map(|v| if v < cycle_len { (cycle_len - v) % cycle_len } else { v })
        .collect();
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    if cycle_len == 6 {
        fi.markers.extend([
            ("a".to_string(), 1),
            ("b".to_string(), 2),
            ("c".to_string(), 5),
            ("d".to_string(), 4),
        ]);
        fi.claims.push(PstClaim::pair_any_q(
            "c6-tail-pair",
            (1, 5),
            (2, 4),
            "pi/(2q)",
        ));
    } else {
        fi.markers.extend([
            ("a".to_string(), 1),
            ("b".to_string(), 3),
            ("c".to_string(), 7),
            ("d".to_string(), 5),
        ]);
        fi.claims.push(PstClaim::pair_any_q(
            "c8-tail-pair",
            (1, 7),
            (3, 5),
            "pi/(q*sqrt(2))",
        ));
    }
    Ok(fi)
}

/// Complete bipartite graph minus a matching of size k, optionally
/// augmented (when m > n) with edges joining the two swap vertices to the
/// surplus vertices of the larger side.
///
/// Labeling interleaves the parts: X_i = 2i and Y_i = 2i+1 for i < n, then
/// the m-n surplus X vertices follow. The removed matching joins X_i to Y_i
/// for i < k. Markers: a = X_0, b = X_1 (swap pair in X), c = Y_0, d = Y_1.
pub fn kmn_minus_matching(
    m: usize,
    n: usize,
    k: usize,
    add_e: bool,
) -> Result<FamilyInstance, FamilyError> {
    if k < 2 {
        return Err(FamilyError::BadParameter(format!(
            "matching size must be at least 2, got {k}"
        )));
    }
    if k > m.min(n) {
        return Err(FamilyError::BadParameter(format!(
            "matching size {k} exceeds min({m},{n})"
        )));
    }
    if add_e && m <= n {
        return Err(FamilyError::BadParameter(
            "edge augmentation applies only when m > n".into(),
        ));
    }
    let total = m + n;
    let xs: Vec<usize> = (0..n).map(|i| 2 * i).chain(2 * n..total).collect();
    let ys: Vec<usize> = (0..n).map(|i| 2 * i + 1).collect();
    let mut g = WeightedGraph::new(total)?;
    for &x in &xs {
        for &y in &ys {
            // Matched pairs (X_i, Y_i), i < k, are the removed edges.
            if x < 2 * n && x + 1 == y && x / 2 < k {
                continue;
            }
            g.add_edge(x, y, 1.0)?;
        }
    }
    if add_e {
        for extra in 2 * n..total {
            g.add_edge(0, extra, 1.0)?;
            g.add_edge(2, extra, 1.0)?;
        }
    }
    let mut fi = FamilyInstance::new("kmn-minus-matching", g);
    fi.markers.extend([
        ("a".to_string(), 0),
        ("b".to_string(), 2),
        ("c".to_string(), 1),
        ("d".to_string(), 3),
    ]);
    let mut perm: Vec<usize> = (0..total).collect();
    perm.swap(0, 2);
    perm.swap(1, 3);
    // Representatives (a, d): with this choice the cross-orbit couplings
    // cancel and the minus sector is (1 + (m-2)q^2) I - q A(P_2).
    fi.involution = Some(Involution::with_half(&fi.graph, &perm, &[0, 3])?);
    if m == n || add_e {
        let id = format!(
            "k{m}{n}-minus-m{k}{}",
            if add_e { "-plus-e" } else { "" }
        );
        fi.claims
            .push(PstClaim::pair_any_q(&id, (0, 2), (1, 3), "pi/(2q)"));
    } else {
        fi.notes
            .push("m > n without augmentation: no transfer claim carried".into());
    }
    Ok(fi)
}

/// Cycle with one added chord {0, b} of weight rho; an existing cycle edge
/// gains the extra weight instead. The reflection a -> b - a (mod n) is the
/// canonical involution.
pub fn cycle_plus_chord(n: usize, b: usize, rho: f64) -> Result<FamilyInstance, FamilyError> {
    if b == 0 || b >= n {
        return Err(FamilyError::BadParameter(format!(
            "chord endpoint must lie in 1..{}, got {b}",
            n - 1
        )));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(FamilyError::BadParameter(format!(
            "chord weight must be positive, got {rho}"
        )));
    }
    let mut g = cycle_graph(n)?;
    g.add_edge_weight(0, b, rho)?;
    let mut fi = FamilyInstance::new("cycle-plus-chord", g);
    let perm: Vec<usize> = (0..n).map(|a| (b + n - a) % n).collect();
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);

    let is_integer_rho = rho.fract() == 0.0;
    match (n, b) {
        (3, 1) if is_integer_rho => {
            fi.claims.push(PstClaim::pair_at_const(
                &format!("c3-chord-rho{rho:.0}"),
                (0, 2),
                (1, 2),
                PI / (2.0 * rho),
                ClaimMatrix::LaplacianOnly,
            ));
        }
        (4, 1) if rho == 1.0 => {
            fi.claims.push(PstClaim::pair_at_const(
                "c4-chord-b1",
                (0, 1),
                (2, 3),
                PI / 2.0,
                ClaimMatrix::SignlessOnly,
            ));
        }
        (4, 2) if rho == 1.0 => {
            fi.claims.push(PstClaim::pair_at_const(
                "c4-chord-b2-rho1",
                (0, 1),
                (0, 3),
                PI / 2.0,
                ClaimMatrix::LaplacianOnly,
            ));
        }
        (4, 2) if rho == 2.0 => {
            fi.claims.push(PstClaim::pair_at_const(
                "c4-chord-b2-rho2",
                (0, 1),
                (2, 3),
                PI / 2.0,
                ClaimMatrix::LaplacianOnly,
            ));
        }
        _ => {}
    }
    Ok(fi)
}

/// Path with edges {1, n-3} and {2, n-2} added and potential 2 at both
/// ends. The reflection survives the added edges and its minus sector has a
/// swap block, giving pair PST between the outer and next-to-outer pairs.
pub fn path_plus_two_edges(n: usize) -> Result<FamilyInstance, FamilyError> {
    if n < 6 {
        return Err(FamilyError::BadParameter(format!(
            "construction needs at least 6 vertices, got {n}"
        )));
    }
    let mut g = path_graph(n)?;
    g.add_edge_weight(1, n - 3, 1.0)?;
    g.add_edge_weight(2, n - 2, 1.0)?;
    g.set_potential(0, 2.0)?;
    g.set_potential(n - 1, 2.0)?;
    let mut fi = FamilyInstance::new("path-plus-two-edges", g);
    fi.markers.insert("left".into(), 0);
    fi.markers.insert("right".into(), n - 1);
    let perm: Vec<usize> = (0..n).map(|v| n - 1 - v).collect();
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    fi.claims.push(PstClaim::pair_any_q(
        &format!("p{n}-two-edges-pair"),
        (0, n - 1),
        (1, n - 2),
        "pi/(2q)",
    ));
    Ok(fi)
}

/// 5-cycle with potential 1 at vertices 1 and 4; the reflection fixing
/// vertex 0 respects the potentials and yields Laplacian pair PST.
pub fn c5_with_potential() -> Result<FamilyInstance, FamilyError> {
    let mut g = cycle_graph(5)?;
    g.set_potential(1, 1.0)?;
    g.set_potential(4, 1.0)?;
    let mut fi = FamilyInstance::new("c5-potential", g);
    let perm: Vec<usize> = (0..5).map(|v| (5 - v) % 5).collect();
    fi.involution = Some(Involution::new(&fi.graph, &perm)?);
    fi.claims.push(PstClaim::pair_at_const(
        "c5-potential-pair",
        (1, 4),
        (2, 3),
        PI / 2.0,
        ClaimMatrix::LaplacianOnly,
    ));
    Ok(fi)
}

/// Glues `attachment` onto the base at a marker vertex: attachment vertex 0
/// is identified with the marker, the rest are appended. Claims survive only
/// when the marker is fixed by the base involution; otherwise the symmetry
/// is broken and claims are dropped with a note.
pub fn attach_graph(
    base: &FamilyInstance,
    attachment: &WeightedGraph,
    marker: &str,
) -> Result<FamilyInstance, FamilyError> {
    let at = base.marker(marker)?;
    let nb = base.graph.n();
    let na = attachment.n();
    let mut g = WeightedGraph::new(nb + na - 1)?;
    for (u, v, w) in base.graph.edges() {
        g.add_edge(u, v, w)?;
    }
    for v in 0..nb {
        g.set_potential(v, base.graph.potential(v))?;
    }
    // Attachment vertex 0 lands on the marker; vertex j > 0 lands on nb+j-1.
    let map = |v: usize| if v == 0 { at } else { nb + v - 1 };
    for (u, v, w) in attachment.edges() {
        g.add_edge_weight(map(u), map(v), w)?;
    }
    g.set_potential(at, base.graph.potential(at) + attachment.potential(0))?;
    for v in 1..na {
        g.set_potential(map(v), attachment.potential(v))?;
    }

    let mut fi = FamilyInstance::new(format!("{}+attachment", base.name), g);
    fi.markers = base.markers.clone();
    match &base.involution {
        Some(inv) if inv.phi(at) == at => {
            let mut perm: Vec<usize> = inv.perm().to_vec();
            perm.extend(nb..nb + na - 1);
            fi.involution = Some(Involution::new(&fi.graph, &perm)?);
            fi.claims = base.claims.clone();
        }
        Some(_) => {
            fi.notes.push(format!(
                "attachment at {marker:?} is not fixed by the involution; claims dropped"
            ));
        }
        None => {
            fi.notes
                .push("base carries no involution; claims dropped".into());
        }
    }
    Ok(fi)
}
