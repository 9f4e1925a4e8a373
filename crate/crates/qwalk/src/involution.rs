//! Involutive graph symmetries and the block structure they induce.
//!
//! A non-trivial involution phi (an order-2 automorphism respecting weights
//! and potentials) splits the vertices into 2-orbits {u, phi(u)} and fixed
//! vertices S. Ordering vertices as (half, phi(half), S), the q-Laplacian
//! takes the form
//!
//! ```text
//!       [ L'      A_phi   A_S ]
//! L  =  [ A_phi   L'      A_S ]
//!       [ A_S^T   A_S^T   L_S ]
//! ```
//!
//! and the orthogonal basis of pair differences (e_u - e_phi(u))/sqrt(2), pair
//! sums (e_u + e_phi(u))/sqrt(2) and fixed vertices block-diagonalizes it into
//! L_minus = L' - A_phi and L_plus_sym = [[L' + A_phi, sqrt(2) A_S],
//! [sqrt(2) A_S^T, L_S]]. Consequently U(t) factors the same way, and vertex
//! PST inside a sector lifts to pair/plus PST in the full graph. That lifting
//! is `reduce_pair_pst`.
//!
//! Diagonal entries of L' keep their degrees from the full graph; extracting
//! submatrices of L realizes this (it equals adding a degree-deficit diagonal
//! to the induced subgraph's own q-Laplacian).

use serde::{Deserialize, Serialize};

use crate::graph::{QParameter, WeightedGraph};
use crate::par;
use crate::spectral::{eigendecompose_default, SpectralError};
use crate::transfer::{self, PureState, TransferError};
use crate::{ComplexMatrix, RealMatrix, RealVector, PST_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InvolutionError {
    #[error("permutation has length {0}, graph has {1} vertices")]
    LengthMismatch(usize, usize),
    #[error("map is not a permutation: value {0} repeated or out of range")]
    NotPermutation(usize),
    #[error("map is not an involution: applying it twice moves vertex {0}")]
    NotInvolutive(usize),
    #[error("identity map is not a usable involution")]
    Trivial,
    #[error("not an automorphism: edge weights at ({0},{1}) and ({2},{3}) differ")]
    NotAutomorphism(usize, usize, usize, usize),
    #[error("potentials at {0} and its image {1} differ")]
    PotentialMismatch(usize, usize),
    #[error("half choice must list exactly one vertex from each 2-orbit")]
    BadHalfChoice,
    #[error("exhaustive involution search is limited to 16 vertices, got {0}")]
    SizeLimit(usize),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
}

/// A verified non-trivial involution together with a choice of orbit
/// representatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution {
    perm: Vec<usize>,
    /// One representative per 2-orbit; order fixes the block layout.
    half: Vec<usize>,
    /// Fixed vertices, ascending.
    fixed: Vec<usize>,
}

/// Checks that `perm` is a weight- and potential-preserving involution of `g`
/// and derives the canonical half choice (smallest label of each orbit,
/// ascending).
pub fn verify_involution(g: &WeightedGraph, perm: &[usize]) -> Result<Involution, InvolutionError> {
    Involution::new(g, perm)
}

impl Involution {
    pub fn new(g: &WeightedGraph, perm: &[usize]) -> Result<Self, InvolutionError> {
        let n = g.n();
        if perm.len() != n {
            return Err(InvolutionError::LengthMismatch(perm.len(), n));
        }
        let mut seen = vec![false; n];
        for &img in perm {
            if img >= n || seen[img] {
                return Err(InvolutionError::NotPermutation(img));
            }
            seen[img] = true;
        }
        for v in 0..n {
            if perm[perm[v]] != v {
                return Err(InvolutionError::NotInvolutive(v));
            }
        }
        if (0..n).all(|v| perm[v] == v) {
            return Err(InvolutionError::Trivial);
        }
        for v in 0..n {
            if g.potential(v) != g.potential(perm[v]) {
                return Err(InvolutionError::PotentialMismatch(v, perm[v]));
            }
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if g.weight(u, v) != g.weight(perm[u], perm[v]) {
                    return Err(InvolutionError::NotAutomorphism(u, v, perm[u], perm[v]));
                }
            }
        }
        let mut half = Vec::new();
        let mut fixed = Vec::new();
        for v in 0..n {
            if perm[v] == v {
                fixed.push(v);
            } else if v < perm[v] {
                half.push(v);
            }
        }
        Ok(Involution {
            perm: perm.to_vec(),
            half,
            fixed,
        })
    }

    /// Same verification, but with an explicit orbit-representative order.
    /// Families use this when a non-canonical half choice matches a reference
    /// block layout.
    pub fn with_half(
        g: &WeightedGraph,
        perm: &[usize],
        half: &[usize],
    ) -> Result<Self, InvolutionError> {
        let mut inv = Involution::new(g, perm)?;
        if half.len() != inv.half.len() {
            return Err(InvolutionError::BadHalfChoice);
        }
        let mut covered = vec![false; g.n()];
        for &h in half {
            if h >= g.n() || inv.perm[h] == h || covered[h] || covered[inv.perm[h]] {
                return Err(InvolutionError::BadHalfChoice);
            }
            covered[h] = true;
            covered[inv.perm[h]] = true;
        }
        inv.half = half.to_vec();
        Ok(inv)
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn phi(&self, v: usize) -> usize {
        self.perm[v]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn half(&self) -> &[usize] {
        &self.half
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    /// Orbits as (representative, image) pairs in half order.
    pub fn orbits(&self) -> Vec<(usize, usize)> {
        self.half.iter().map(|&h| (h, self.perm[h])).collect()
    }

    /// Permutation matrix P with P x = x composed with phi.
    pub fn permutation_matrix(&self) -> RealMatrix {
        let n = self.n();
        let mut p = RealMatrix::zeros(n, n);
        for v in 0..n {
            p[(self.perm[v], v)] = 1.0;
        }
        p
    }
}

/// Wire format: orbits as [representative, image] pairs plus fixed vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvolutionJson {
    pub orbits: Vec<(usize, usize)>,
    pub fixed: Vec<usize>,
}

impl From<&Involution> for InvolutionJson {
    fn from(inv: &Involution) -> Self {
        InvolutionJson {
            orbits: inv.orbits(),
            fixed: inv.fixed.clone(),
        }
    }
}

impl InvolutionJson {
    /// Rebuilds and re-verifies the involution against a graph.
    pub fn realize(&self, g: &WeightedGraph) -> Result<Involution, InvolutionError> {
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        for &(u, v) in &self.orbits {
            if u >= n || v >= n {
                return Err(InvolutionError::NotPermutation(u.max(v)));
            }
            perm[u] = v;
            perm[v] = u;
        }
        let half: Vec<usize> = self.orbits.iter().map(|&(u, _)| u).collect();
        Involution::with_half(g, &perm, &half)
    }
}

/// All non-trivial involutions of `g`, found by backtracking over orbit
/// assignments with degree/potential pruning. Exhaustive up to 16 vertices.
pub fn find_involutions(g: &WeightedGraph) -> Result<Vec<Involution>, InvolutionError> {
    let n = g.n();
    if n > 16 {
        return Err(InvolutionError::SizeLimit(n));
    }
    // Per-vertex invariant preserved by any automorphism: potential plus the
    // sorted multiset of incident weights.
    let mut signature: Vec<(u64, Vec<u64>)> = Vec::with_capacity(n);
    for v in 0..n {
        let mut ws: Vec<u64> = (0..n)
            .filter_map(|u| g.weight(v, u))
            .map(f64::to_bits)
            .collect();
        ws.sort_unstable();
        signature.push((g.potential(v).to_bits(), ws));
    }

    let mut perm: Vec<Option<usize>> = vec![None; n];
    let mut found = Vec::new();
    search(g, &signature, &mut perm, 0, &mut found);
    found.sort();
    found
        .into_iter()
        .map(|p| Involution::new(g, &p))
        .collect()
}

fn consistent(g: &WeightedGraph, perm: &[Option<usize>], v: usize, img: usize) -> bool {
    for (w, &fw) in perm.iter().enumerate() {
        if let Some(fw) = fw {
            if g.weight(v, w) != g.weight(img, fw) {
                return false;
            }
        }
    }
    true
}

fn search(
    g: &WeightedGraph,
    signature: &[(u64, Vec<u64>)],
    perm: &mut Vec<Option<usize>>,
    from: usize,
    found: &mut Vec<Vec<usize>>,
) {
    let n = g.n();
    let v = match (from..n).find(|&v| perm[v].is_none()) {
        Some(v) => v,
        None => {
            let p: Vec<usize> = perm.iter().map(|x| x.unwrap()).collect();
            if p.iter().enumerate().any(|(i, &x)| x != i) {
                found.push(p);
            }
            return;
        }
    };
    // Option 1: fix v.
    if consistent(g, perm, v, v) {
        perm[v] = Some(v);
        search(g, signature, perm, v + 1, found);
        perm[v] = None;
    }
    // Option 2: pair v with a later unassigned vertex of equal signature.
    for u in (v + 1)..n {
        if perm[u].is_some() || signature[u] != signature[v] {
            continue;
        }
        if consistent(g, perm, v, u) && consistent(g, perm, u, v) {
            perm[v] = Some(u);
            perm[u] = Some(v);
            search(g, signature, perm, v + 1, found);
            perm[v] = None;
            perm[u] = None;
        }
    }
}

/// The submatrices of the block form, all carrying full-graph degrees.
#[derive(Debug, Clone)]
pub struct HalfBlocks {
    /// L' = L[half, half].
    pub lp: RealMatrix,
    /// A_phi = L[half, phi(half)].
    pub aphi: RealMatrix,
    /// A_S = L[half, S].
    pub a_s: RealMatrix,
    /// L_S = L[S, S].
    pub ls: RealMatrix,
    /// Minus sector: L' - A_phi.
    pub lminus: RealMatrix,
    /// Plus sector before symmetrization: [[L' + A_phi, A_S], [2 A_S^T, L_S]].
    pub lplus: RealMatrix,
    /// Symmetrized plus sector: [[L' + A_phi, sqrt(2) A_S], [sqrt(2) A_S^T, L_S]].
    pub lplus_sym: RealMatrix,
}

/// Extracts the block form of the q-Laplacian under an involution.
pub fn half_blocks(g: &WeightedGraph, inv: &Involution, q: QParameter) -> HalfBlocks {
    let l = g.q_laplacian(q);
    blocks_of_matrix(&l, inv)
}

/// Block extraction for an arbitrary symmetric matrix respecting `inv`.
pub fn blocks_of_matrix(l: &RealMatrix, inv: &Involution) -> HalfBlocks {
    let h = inv.half().len();
    let s = inv.fixed().len();
    let half = inv.half();
    let fixed = inv.fixed();

    let lp = RealMatrix::from_fn(h, h, |i, j| l[(half[i], half[j])]);
    let aphi = RealMatrix::from_fn(h, h, |i, j| l[(half[i], inv.phi(half[j]))]);
    let a_s = RealMatrix::from_fn(h, s, |i, j| l[(half[i], fixed[j])]);
    let ls = RealMatrix::from_fn(s, s, |i, j| l[(fixed[i], fixed[j])]);

    let lminus = &lp - &aphi;
    let lpa = &lp + &aphi;

    let mut lplus = RealMatrix::zeros(h + s, h + s);
    let mut lplus_sym = RealMatrix::zeros(h + s, h + s);
    let sqrt2 = 2f64.sqrt();
    for i in 0..h {
        for j in 0..h {
            lplus[(i, j)] = lpa[(i, j)];
            lplus_sym[(i, j)] = lpa[(i, j)];
        }
        for j in 0..s {
            lplus[(i, h + j)] = a_s[(i, j)];
            lplus[(h + j, i)] = 2.0 * a_s[(i, j)];
            lplus_sym[(i, h + j)] = sqrt2 * a_s[(i, j)];
            lplus_sym[(h + j, i)] = sqrt2 * a_s[(i, j)];
        }
    }
    for i in 0..s {
        for j in 0..s {
            lplus[(h + i, h + j)] = ls[(i, j)];
            lplus_sym[(h + i, h + j)] = ls[(i, j)];
        }
    }

    HalfBlocks {
        lp,
        aphi,
        a_s,
        ls,
        lminus,
        lplus,
        lplus_sym,
    }
}

/// Orthogonal change of basis: pair differences, pair sums, fixed vertices.
pub fn basis_matrix(inv: &Involution) -> RealMatrix {
    let n = inv.n();
    let h = inv.half().len();
    let s = inv.fixed().len();
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut m = RealMatrix::zeros(n, n);
    for (k, &u) in inv.half().iter().enumerate() {
        m[(u, k)] = inv_sqrt2;
        m[(inv.phi(u), k)] = -inv_sqrt2;
        m[(u, h + k)] = inv_sqrt2;
        m[(inv.phi(u), h + k)] = inv_sqrt2;
    }
    for (j, &sv) in inv.fixed().iter().enumerate() {
        m[(sv, 2 * h + j)] = 1.0;
    }
    debug_assert_eq!(2 * h + s, n);
    m
}

/// Max entrywise residual of M^T U(t) M against blockdiag(U_minus, U_plus_sym)
/// over the supplied times.
pub fn verify_block_diagonalization(
    g: &WeightedGraph,
    inv: &Involution,
    q: QParameter,
    times: &[f64],
) -> Result<f64, InvolutionError> {
    let blocks = half_blocks(g, inv, q);
    let d_full = eigendecompose_default(&g.q_laplacian(q))?;
    let d_minus = eigendecompose_default(&blocks.lminus)?;
    let d_plus = eigendecompose_default(&blocks.lplus_sym)?;
    let m = basis_matrix(inv);
    let mc = m.map(|x| crate::Complex64::new(x, 0.0));
    let h = inv.half().len();
    let n = inv.n();

    let residuals = par::map_vec(times.to_vec(), |t| {
        let u = d_full.transition_matrix(t);
        let conj = mc.transpose() * &u * &mc;
        let um = d_minus.transition_matrix(t);
        let up = d_plus.transition_matrix(t);
        let mut block = ComplexMatrix::zeros(n, n);
        block.view_mut((0, 0), (h, h)).copy_from(&um);
        block.view_mut((h, h), (n - h, n - h)).copy_from(&up);
        (conj - block).map(|c| c.norm()).max()
    });
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Spectrum of L equals the union (with multiplicity) of the sector spectra.
/// Returns the max absolute pairing deviation.
pub fn spectrum_factorization_residual(
    g: &WeightedGraph,
    inv: &Involution,
    q: QParameter,
) -> Result<f64, InvolutionError> {
    let blocks = half_blocks(g, inv, q);
    let full = symmetric_eigenvalues(&g.q_laplacian(q));
    let mut sectors = symmetric_eigenvalues(&blocks.lminus);
    sectors.extend(symmetric_eigenvalues(&blocks.lplus_sym));
    sectors.sort_by(f64::total_cmp);
    let max_dev = full
        .iter()
        .zip(&sectors)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(max_dev)
}

fn symmetric_eigenvalues(m: &RealMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new((m + m.transpose()) * 0.5);
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Which sector a half-space state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    /// Pair differences; coordinates over `half`.
    Minus,
    /// Pair sums followed by fixed vertices; coordinates over `half ++ fixed`.
    Plus,
}

/// Embeds a sector-coordinate state into the full vertex space:
/// minus coordinates c give sum_i c_i (e_h - e_phi(h))/sqrt(2), plus
/// coordinates give pair sums and fixed vertex states. Unit basis vectors
/// lift to pair, plus or vertex states and are tagged as such.
pub fn lift_state(
    inv: &Involution,
    coords: &RealVector,
    sector: Sector,
) -> Result<PureState, InvolutionError> {
    let h = inv.half().len();
    let s = inv.fixed().len();
    let want = match sector {
        Sector::Minus => h,
        Sector::Plus => h + s,
    };
    if coords.len() != want {
        return Err(TransferError::DimensionMismatch(coords.len(), want).into());
    }
    let n = inv.n();

    // A unit coordinate vector lifts to a structured state.
    let unit_slot = (0..coords.len()).find(|&i| {
        (coords[i].abs() - 1.0).abs() < 1e-12
            && coords.iter().enumerate().all(|(j, &c)| j == i || c.abs() < 1e-12)
    });
    if let Some(slot) = unit_slot {
        let sign = coords[slot];
        let st = match sector {
            Sector::Minus => {
                let u = inv.half()[slot];
                if sign > 0.0 {
                    PureState::pair(n, u, inv.phi(u))?
                } else {
                    PureState::pair(n, inv.phi(u), u)?
                }
            }
            Sector::Plus => {
                if slot < h {
                    let u = inv.half()[slot];
                    PureState::plus(n, u, inv.phi(u))?
                } else {
                    PureState::vertex(n, inv.fixed()[slot - h])?
                }
            }
        };
        return Ok(st);
    }

    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    let mut vec = RealVector::zeros(n);
    match sector {
        Sector::Minus => {
            for (i, &u) in inv.half().iter().enumerate() {
                vec[u] += coords[i] * inv_sqrt2;
                vec[inv.phi(u)] -= coords[i] * inv_sqrt2;
            }
        }
        Sector::Plus => {
            for (i, &u) in inv.half().iter().enumerate() {
                vec[u] += coords[i] * inv_sqrt2;
                vec[inv.phi(u)] += coords[i] * inv_sqrt2;
            }
            for (j, &sv) in inv.fixed().iter().enumerate() {
                vec[sv] += coords[h + j];
            }
        }
    }
    Ok(PureState::raw(vec)?)
}

/// A sector-level vertex PST witness lifted back to the full graph and
/// re-verified there.
#[derive(Debug, Clone)]
pub struct LiftedWitness {
    pub sector: Sector,
    pub x: PureState,
    pub y: PureState,
    pub time: f64,
    pub fidelity: f64,
}

/// Searches both sectors for vertex PST on the horizon, lifts each hit and
/// re-verifies it against the full walk.
pub fn reduce_pair_pst(
    g: &WeightedGraph,
    inv: &Involution,
    q: QParameter,
    t_max: f64,
    pst_tol: f64,
) -> Result<Vec<LiftedWitness>, InvolutionError> {
    let blocks = half_blocks(g, inv, q);
    let d_full = eigendecompose_default(&g.q_laplacian(q))?;
    let mut out = Vec::new();

    for (sector, m) in [
        (Sector::Minus, &blocks.lminus),
        (Sector::Plus, &blocks.lplus_sym),
    ] {
        let dim = m.nrows();
        if dim < 2 {
            continue;
        }
        let d = eigendecompose_default(m)?;
        let mut pairs = Vec::new();
        for i in 0..dim {
            for j in (i + 1)..dim {
                pairs.push((i, j));
            }
        }
        let hits: Vec<Vec<LiftedWitness>> = par::map_vec(pairs, |(i, j)| {
            let xi = PureState::vertex(dim, i).unwrap();
            let xj = PureState::vertex(dim, j).unwrap();
            let found = transfer::search_pst(&d, &xi, &xj, t_max, pst_tol).unwrap_or_default();
            found
                .into_iter()
                .filter_map(|hit| {
                    let x = lift_state(inv, xi.vector(), sector).ok()?;
                    let y = lift_state(inv, xj.vector(), sector).ok()?;
                    let fid = transfer::fidelity(&d_full, &x, &y, hit.time).ok()?;
                    (fid >= 1.0 - pst_tol).then_some(LiftedWitness {
                        sector,
                        x,
                        y,
                        time: hit.time,
                        fidelity: fid,
                    })
                })
                .collect()
        });
        out.extend(hits.into_iter().flatten());
    }
    out.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then_with(|| format!("{:?}", a.x.spec()).cmp(&format!("{:?}", b.x.spec())))
    });
    Ok(out)
}

/// Default PST tolerance re-exported for reduction callers.
pub fn default_pst_tol() -> f64 {
    PST_TOL
}
