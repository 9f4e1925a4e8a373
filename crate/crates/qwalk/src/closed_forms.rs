//! Closed-form spectral machinery for cycles with one strengthened or added
//! chord, end-potential path identities, and a brute-force perturbation
//! search over added edges and potentials.
//!
//! The cycle results all flow from one fact: adding a chord {0, b} of weight
//! rho changes the Laplacian by rho w w^T with w = e_0 - e_b, and the
//! signless Laplacian by the same with w = e_0 + e_b. Every eigenvector of
//! the unperturbed cycle orthogonal to w survives for every rho, and on the
//! two-dimensional circulant eigenspaces that surviving vector has explicit
//! trigonometric entries. Candidate filters, support certificates, and
//! eigenvalue-gap nonexistence checks are all read off from those entries.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::families::{self, FamilyError};
use crate::graph::{GraphError, QParameter, WeightedGraph};
use crate::involution::{self, InvolutionError, InvolutionJson, Sector};
use crate::par;
use crate::spectral::{eigendecompose_default, SpectralDecomposition, SpectralError};
use crate::transfer::{StateSpec, TransferError};
use crate::{RealMatrix, RealVector, PST_TOL, SUPPORT_TOL};

/// Closed-form trigonometric quantities are treated as exactly zero below
/// this threshold; candidate and branch decisions never round, they test
/// against it.
pub const ZERO_TOL: f64 = 1e-10;

/// Hard ceiling on the number of (edge subset, potential assignment)
/// combinations `perturbation_search` will enumerate.
pub const SEARCH_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClosedFormError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("search space of {0} candidates exceeds the cap of {1}")]
    SearchSpaceTooLarge(usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Sign in M = 2I + zeta A for the cycle: zeta = -1 is the Laplacian
/// (q = 1), zeta = +1 the signless Laplacian (q = -1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zeta {
    Minus,
    Plus,
}

impl Zeta {
    pub fn sign(self) -> f64 {
        match self {
            Zeta::Minus => -1.0,
            Zeta::Plus => 1.0,
        }
    }

    /// The q value realizing this matrix on a potential-free graph.
    pub fn q(self) -> QParameter {
        let q = match self {
            Zeta::Minus => 1.0,
            Zeta::Plus => -1.0,
        };
        QParameter::new(q).expect("unit q")
    }

    pub fn label(self) -> &'static str {
        match self {
            Zeta::Minus => "lap",
            Zeta::Plus => "signless",
        }
    }
}

impl std::fmt::Display for Zeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Zeta {
    type Err = ClosedFormError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lap" | "laplacian" | "-1" => Ok(Zeta::Minus),
            "signless" | "+1" | "1" => Ok(Zeta::Plus),
            other => Err(ClosedFormError::BadParameter(format!(
                "unknown zeta {other:?}; use lap or signless"
            ))),
        }
    }
}

fn check_cycle(n: usize) -> Result<(), ClosedFormError> {
    if n < 3 {
        return Err(ClosedFormError::BadParameter(format!(
            "cycle formulas need n >= 3, got {n}"
        )));
    }
    Ok(())
}

fn check_chord(n: usize, b: usize) -> Result<(), ClosedFormError> {
    if b == 0 || b >= n {
        return Err(ClosedFormError::BadParameter(format!(
            "chord endpoint must lie in 1..{}, got {b}",
            n - 1
        )));
    }
    Ok(())
}

/// theta_j = 2 + 2 zeta cos(2 pi j / n), the cycle eigenvalue of frequency j.
pub fn cycle_eigenvalue(n: usize, j: usize, zeta: Zeta) -> f64 {
    2.0 + 2.0 * zeta.sign() * (2.0 * PI * j as f64 / n as f64).cos()
}

/// Unit eigenvector of the cycle Laplacian or signless Laplacian for index
/// 0 <= j < n: the flat vector for j = 0, the alternating vector for
/// j = n/2, cosine profiles for 0 < j < n/2 and sine profiles (of frequency
/// n - j) above. Indices j and n - j share the eigenvalue; together they
/// span the two-dimensional circulant eigenspace.
pub fn cycle_eigenpair(
    n: usize,
    j: usize,
    zeta: Zeta,
) -> Result<(f64, RealVector), ClosedFormError> {
    check_cycle(n)?;
    if j >= n {
        return Err(ClosedFormError::BadParameter(format!(
            "eigenvector index {j} out of range for n = {n}"
        )));
    }
    let nf = n as f64;
    let theta = cycle_eigenvalue(n, j, zeta);
    let v = if j == 0 {
        RealVector::from_element(n, 1.0 / nf.sqrt())
    } else if 2 * j == n {
        RealVector::from_fn(n, |k, _| {
            (if k % 2 == 0 { 1.0 } else { -1.0 }) / nf.sqrt()
        })
    } else if 2 * j < n {
        let scale = (2.0 / nf).sqrt();
        RealVector::from_fn(n, |k, _| scale * (2.0 * PI * (j * k) as f64 / nf).cos())
    } else {
        let jp = n - j;
        let scale = (2.0 / nf).sqrt();
        RealVector::from_fn(n, |k, _| scale * (2.0 * PI * (jp * k) as f64 / nf).sin())
    };
    Ok((theta, v))
}

/// M_rho = M + rho w w^T realized as a concrete matrix: the Laplacian or
/// signless Laplacian of the cycle with chord {0, b} of weight rho.
pub fn perturbed_cycle_matrix(
    n: usize,
    b: usize,
    rho: f64,
    zeta: Zeta,
) -> Result<RealMatrix, ClosedFormError> {
    let fi = families::cycle_plus_chord(n, b, rho)?;
    Ok(fi.graph.q_laplacian(zeta.q()))
}

/// Overlaps of the chord vector w = e_0 + zeta e_b with the frequency-j
/// cosine and sine eigenvectors: (w.v_j, w.v_{n-j}).
fn chord_overlaps(n: usize, b: usize, j: usize, zeta: Zeta) -> (f64, f64) {
    let nf = n as f64;
    let s = (2.0 / nf).sqrt();
    let x = 2.0 * PI * (b * j) as f64 / nf;
    let alpha = s * (1.0 + zeta.sign() * x.cos());
    let beta = s * zeta.sign() * x.sin();
    (alpha, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Both circulant vectors miss the chord; z_j = v_j + v_{n-j}.
    Orthogonal,
    /// One combination survives; z_j = (w.v_{n-j}) v_j - (w.v_j) v_{n-j}.
    Generic,
}

/// An eigenvector of M_rho that does not depend on rho.
#[derive(Debug, Clone)]
pub struct PerturbedEigvec {
    pub value: f64,
    /// Closed-form entries; not normalized.
    pub vector: RealVector,
    pub branch: Branch,
}

/// The rho-independent eigenvector in the frequency-j eigenspace of the
/// chord-perturbed cycle, with explicit trigonometric entries. Valid for
/// the two-dimensional eigenspaces, 1 <= j < n/2.
pub fn perturbed_eigvec(
    n: usize,
    b: usize,
    j: usize,
    zeta: Zeta,
) -> Result<PerturbedEigvec, ClosedFormError> {
    check_cycle(n)?;
    check_chord(n, b)?;
    if j == 0 || 2 * j >= n {
        return Err(ClosedFormError::BadParameter(format!(
            "frequency {j} is not a two-dimensional eigenspace of the {n}-cycle"
        )));
    }
    let nf = n as f64;
    let (alpha, beta) = chord_overlaps(n, b, j, zeta);
    let value = cycle_eigenvalue(n, j, zeta);
    if alpha.abs() <= ZERO_TOL && beta.abs() <= ZERO_TOL {
        let vector = RealVector::from_fn(n, |k, _| {
            (2.0 / nf.sqrt()) * (2.0 * PI * (j * k) as f64 / nf - FRAC_PI_4).cos()
        });
        return Ok(PerturbedEigvec {
            value,
            vector,
            branch: Branch::Orthogonal,
        });
    }
    let bf = b as f64;
    let jf = j as f64;
    let vector = RealVector::from_fn(n, |k, _| {
        let half = PI * jf * (2.0 * k as f64 - bf) / nf;
        match zeta {
            Zeta::Plus => -(4.0 / nf) * (PI * bf * jf / nf).cos() * half.sin(),
            Zeta::Minus => -(4.0 / nf) * (PI * bf * jf / nf).sin() * half.cos(),
        }
    });
    Ok(PerturbedEigvec {
        value,
        vector,
        branch: Branch::Generic,
    })
}

/// The only vertex pair on the chord-perturbed cycle not annihilated by the
/// frequency-1 surviving eigenvector's zero set: candidates for vertex PST.
/// None when the closed-form zeros land between vertices; no rounding.
/// Stated for n >= 7.
pub fn vertex_pst_candidates(
    n: usize,
    b: usize,
    zeta: Zeta,
) -> Result<Option<(usize, usize)>, ClosedFormError> {
    if n < 7 {
        return Err(ClosedFormError::BadParameter(format!(
            "vertex candidate filter is stated for n >= 7, got {n}"
        )));
    }
    check_chord(n, b)?;
    let pair = match zeta {
        Zeta::Minus => {
            // Zeros of cos(pi (2k - b)/n): 2k = b + n/2 or b + 3n/2 (mod 2n).
            if (2 * b + n) % 4 == 0 && (2 * b + 3 * n) % 4 == 0 {
                Some(((2 * b + n) / 4 % n, (2 * b + 3 * n) / 4 % n))
            } else {
                None
            }
        }
        Zeta::Plus if 2 * b == n => {
            // Orthogonal branch: zeros of cos(2 pi k/n - pi/4).
            if n % 8 == 0 {
                Some((3 * n / 8, 7 * n / 8))
            } else {
                None
            }
        }
        Zeta::Plus => {
            // Zeros of sin(pi (2k - b)/n): 2k = b or b + n (mod 2n).
            if b % 2 == 0 && (n + b) % 2 == 0 {
                Some((b / 2, (n + b) / 2 % n))
            } else {
                None
            }
        }
    };
    Ok(pair.map(|(a, b)| (a.min(b), a.max(b))))
}

/// Pair states (e_k - e_l) surviving the frequency-1 filter, described as a
/// residue class: accepted exactly when (k + l) mod n equals the returned
/// residue. Stated for n >= 13; computed for any n >= 5.
pub fn pair_pst_candidates(
    n: usize,
    b: usize,
    zeta: Zeta,
) -> Result<Option<usize>, ClosedFormError> {
    if n < 5 {
        return Err(ClosedFormError::BadParameter(format!(
            "pair candidate filter needs n >= 5, got {n}"
        )));
    }
    check_chord(n, b)?;
    Ok(match zeta {
        Zeta::Minus => Some(b % n),
        Zeta::Plus if 2 * b == n => {
            if n % 4 == 0 {
                Some(n / 4)
            } else {
                None
            }
        }
        Zeta::Plus => {
            if n % 2 == 0 {
                Some((b + n / 2) % n)
            } else {
                None
            }
        }
    })
}

fn symmetric_eigenvalues(m: &RealMatrix) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut eigs: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

#[derive(Debug, Clone, Serialize)]
pub struct InterlacingReport {
    pub base: Vec<f64>,
    pub perturbed: Vec<f64>,
    pub max_violation: f64,
    pub ok: bool,
}

/// Checks that C - B is a positive semidefinite rank-one update and that
/// the spectra interlace: base_i <= pert_i <= base_{i+1} in ascending
/// order.
pub fn interlacing_check(
    b: &RealMatrix,
    c: &RealMatrix,
) -> Result<InterlacingReport, ClosedFormError> {
    if b.nrows() != b.ncols() || b.shape() != c.shape() {
        return Err(ClosedFormError::BadParameter(format!(
            "interlacing needs equal square matrices, got {:?} and {:?}",
            b.shape(),
            c.shape()
        )));
    }
    let diff = c - b;
    let diff_eigs = symmetric_eigenvalues(&diff);
    let scale = diff_eigs.iter().fold(1.0_f64, |acc, &e| acc.max(e.abs()));
    let tol = 1e-9 * scale;
    if diff_eigs.iter().any(|&e| e < -tol) {
        return Err(ClosedFormError::BadParameter(
            "perturbation is not positive semidefinite".into(),
        ));
    }
    let positives = diff_eigs.iter().filter(|&&e| e > tol).count();
    if positives > 1 {
        return Err(ClosedFormError::BadParameter(format!(
            "perturbation has rank {positives}, expected at most one"
        )));
    }

    let base = symmetric_eigenvalues(b);
    let perturbed = symmetric_eigenvalues(c);
    let n = base.len();
    let span = base[n - 1] - base[0];
    let mut max_violation = 0.0_f64;
    for i in 0..n {
        max_violation = max_violation.max(base[i] - perturbed[i]);
        if i + 1 < n {
            max_violation = max_violation.max(perturbed[i] - base[i + 1]);
        }
    }
    let ok = max_violation <= 1e-9 * span.max(1.0);
    Ok(InterlacingReport {
        base,
        perturbed,
        max_violation,
        ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    Vertex,
    Pair,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSet {
    /// No candidate survives the closed-form constraints.
    Empty,
    /// The two candidate vertices.
    Vertices(usize, usize),
    /// Pairs (k, l) are accepted exactly when (k + l) mod n hits this
    /// residue.
    PairSumResidue(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessVerdict {
    /// Every desk-checkable precondition of the cited argument holds.
    PreconditionsVerified,
    /// At least one precondition failed or could not be certified here.
    Inconclusive,
}

/// Support membership of one cycle eigenvalue at the candidate states,
/// evaluated two ways: from the closed-form eigenvector entries (valid for
/// every rho) and from the numeric eigendecomposition at the concrete rho.
#[derive(Debug, Clone, Serialize)]
pub struct SupportCheck {
    pub frequency: usize,
    /// Smallest closed-form magnitude (entry or pair difference) over the
    /// candidates; zero means the closed form cannot certify membership.
    pub min_entry: f64,
    pub certified: bool,
    /// theta_j appears in the numeric eigenvalue support of every candidate
    /// state at this rho.
    pub numeric_member: bool,
}

/// Structure check of the minus sector for the antipodal chord: the block
/// must be, up to entry signs, 2I - A(path).
#[derive(Debug, Clone, Serialize)]
pub struct PathReduction {
    pub block_dim: usize,
    pub deviation: f64,
    pub ok: bool,
}

/// Precondition report for one transfer kind.
#[derive(Debug, Clone, Serialize)]
pub struct TargetReport {
    pub target: TransferKind,
    pub stated_range_start: usize,
    pub in_stated_range: bool,
    pub candidates: CandidateSet,
    /// Largest frequency-1 magnitude over the candidates; candidates are
    /// defined by this vanishing.
    pub candidate_kernel_residual: f64,
    pub support: Vec<SupportCheck>,
    pub gap_indices: Option<(usize, usize)>,
    pub gap: Option<f64>,
    pub gap_below_one: bool,
    pub path_reduction: Option<PathReduction>,
    pub verdict: WitnessVerdict,
    pub notes: Vec<String>,
}

/// Everything the no-PST arguments for the chord-perturbed cycle need,
/// checked numerically at one concrete (n, b, rho, zeta). This verifies
/// preconditions; it is a report, not a proof object.
///
/// zeta = -1 carries one target (vertex transfer, stated for n >= 15);
/// zeta = +1 carries two (vertex for n >= 9, pair for n >= 16 antipodal /
/// n >= 22 otherwise). Each target lists its candidate filter, eigenvalue
/// gap, and per-frequency support checks; the overall verdict is verified
/// only when every target is.
#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceReport {
    pub zeta: Zeta,
    pub n: usize,
    pub b: usize,
    pub rho: f64,
    /// Max relative eigen-residual of the closed-form vectors against the
    /// concrete perturbed matrix at this rho.
    pub machinery_residual: f64,
    pub targets: Vec<TargetReport>,
    pub verdict: WitnessVerdict,
    pub notes: Vec<String>,
}

fn eigen_residual(m: &RealMatrix, value: f64, vector: &RealVector) -> f64 {
    let norm = vector.norm();
    if norm == 0.0 {
        return f64::INFINITY;
    }
    (m * vector - vector * value).norm() / norm
}

/// Shared state for one witness run: the concrete matrix, a cache of
/// closed-form vectors, and the worst eigen-residual seen.
struct Machinery<'a> {
    n: usize,
    b: usize,
    zeta: Zeta,
    matrix: &'a RealMatrix,
    cache: BTreeMap<usize, (f64, RealVector)>,
    residual: f64,
}

impl Machinery<'_> {
    fn vec(&mut self, j: usize) -> Result<(f64, RealVector), ClosedFormError> {
        if !self.cache.contains_key(&j) {
            let pe = perturbed_eigvec(self.n, self.b, j, self.zeta)?;
            self.residual = self
                .residual
                .max(eigen_residual(self.matrix, pe.value, &pe.vector));
            self.cache.insert(j, (pe.value, pe.vector));
        }
        Ok(self.cache[&j].clone())
    }
}

fn basis_vector(n: usize, k: usize) -> RealVector {
    let mut v = RealVector::zeros(n);
    v[k] = 1.0;
    v
}

fn pair_state_vector(n: usize, k: usize, l: usize) -> RealVector {
    let mut v = RealVector::zeros(n);
    let s = 0.5_f64.sqrt();
    v[k] = s;
    v[l] = -s;
    v
}

fn accepted_pairs(n: usize, residue: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..n {
        for l in (k + 1)..n {
            if (k + l) % n == residue {
                out.push((k, l));
            }
        }
    }
    out
}

fn numeric_member(decomp: &SpectralDecomposition, state: &RealVector, theta: f64) -> bool {
    decomp
        .eigenvalue_support(state, SUPPORT_TOL)
        .iter()
        .any(|&lam| (lam - theta).abs() < 1e-7)
}

fn vertex_support_check(
    mach: &mut Machinery<'_>,
    decomp: &SpectralDecomposition,
    frequency: usize,
    n: usize,
    ks: (usize, usize),
) -> Result<SupportCheck, ClosedFormError> {
    let (theta, z) = mach.vec(frequency)?;
    let min_entry = z[ks.0].abs().min(z[ks.1].abs());
    let numeric = [ks.0, ks.1]
        .iter()
        .all(|&k| numeric_member(decomp, &basis_vector(n, k), theta));
    Ok(SupportCheck {
        frequency,
        min_entry,
        certified: min_entry > ZERO_TOL,
        numeric_member: numeric,
    })
}

fn pair_support_check(
    mach: &mut Machinery<'_>,
    decomp: &SpectralDecomposition,
    frequency: usize,
    n: usize,
    residue: usize,
) -> Result<SupportCheck, ClosedFormError> {
    let (theta, z) = mach.vec(frequency)?;
    let mut min_entry = f64::INFINITY;
    let mut numeric = true;
    for (k, l) in accepted_pairs(n, residue) {
        min_entry = min_entry.min((z[k] - z[l]).abs());
        numeric = numeric && numeric_member(decomp, &pair_state_vector(n, k, l), theta);
    }
    Ok(SupportCheck {
        frequency,
        min_entry,
        certified: min_entry > ZERO_TOL,
        numeric_member: numeric,
    })
}

/// Minus sector of the antipodal-chord cycle under the swap involution at
/// q = -1: must be 2I - A(path) up to entry signs. The chord weight
/// cancels out of the block entirely, so the reduction holds for every
/// rho.
fn antipodal_path_reduction(n: usize, rho: f64) -> Result<PathReduction, ClosedFormError> {
    let fi = families::cycle_plus_chord(n, n / 2, rho)?;
    let inv = fi
        .involution
        .as_ref()
        .expect("chord family carries the swap involution");
    let block = involution::half_blocks(&fi.graph, inv, Zeta::Plus.q()).lminus;
    let dim = block.nrows();

    let mut deviation = 0.0_f64;
    let mut degrees = vec![0usize; dim];
    let mut edges = Vec::new();
    for i in 0..dim {
        deviation = deviation.max((block[(i, i)] - 2.0).abs());
        for j in (i + 1)..dim {
            let w = block[(i, j)].abs();
            if w > 1e-9 {
                deviation = deviation.max((w - 1.0).abs());
                degrees[i] += 1;
                degrees[j] += 1;
                edges.push((i, j));
            }
        }
    }
    // A connected graph with dim - 1 edges and max degree 2 is a path.
    let mut reach = vec![false; dim.max(1)];
    let mut stack = vec![0usize];
    reach[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in &edges {
            let other = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !reach[other] {
                reach[other] = true;
                stack.push(other);
            }
        }
    }
    let is_path = dim <= 1
        || (edges.len() == dim - 1
            && degrees.iter().all(|&d| d <= 2)
            && reach.iter().all(|&r| r));
    Ok(PathReduction {
        block_dim: dim,
        deviation,
        ok: is_path && deviation <= 1e-9,
    })
}

fn vertex_target(
    mach: &mut Machinery<'_>,
    decomp: &SpectralDecomposition,
    n: usize,
    b: usize,
    zeta: Zeta,
) -> Result<TargetReport, ClosedFormError> {
    let range_start = match zeta {
        Zeta::Minus => 15,
        Zeta::Plus => 9,
    };
    let gap = (cycle_eigenvalue(n, 3, zeta) - cycle_eigenvalue(n, 2, zeta)).abs();
    let gap_below_one = gap < 1.0;
    let in_stated_range = n >= range_start;
    let mut notes = Vec::new();
    let mut support = Vec::new();
    let mut kernel = 0.0_f64;

    let (candidates, verdict) = match vertex_pst_candidates(n, b, zeta)? {
        None => {
            notes.push(
                "no integral candidates survive the frequency-1 zero constraints; \
                 the candidate lemma alone rules out vertex transfer"
                    .into(),
            );
            (CandidateSet::Empty, WitnessVerdict::PreconditionsVerified)
        }
        Some((k1, k2)) => {
            let (_, z1) = mach.vec(1)?;
            kernel = z1[k1].abs().max(z1[k2].abs());
            for j in [2usize, 3] {
                support.push(vertex_support_check(mach, decomp, j, n, (k1, k2))?);
            }
            // Under the Laplacian the frequency-3 surviving vector vanishes
            // identically at the candidates; the companion eigenvalue in
            // that eigenspace is rho-dependent and only interlacing locates
            // it. Certify what the closed form can and say so in the notes.
            let required: &[usize] = match zeta {
                Zeta::Minus => &[2],
                Zeta::Plus => &[2, 3],
            };
            let all_required = support
                .iter()
                .filter(|s| required.contains(&s.frequency))
                .all(|s| s.certified);
            for s in &support {
                if !s.certified && !required.contains(&s.frequency) {
                    notes.push(format!(
                        "frequency {} membership is not closed-form certifiable at \
                         the candidates; it is not counted against the verdict",
                        s.frequency
                    ));
                }
            }
            if zeta == Zeta::Plus && !all_required {
                notes.push(
                    "cited argument for this chord uses the plus-sector tridiagonal \
                     asymmetry, which is not mechanized here"
                        .into(),
                );
            }
            let verdict = if gap_below_one && in_stated_range && all_required {
                WitnessVerdict::PreconditionsVerified
            } else {
                WitnessVerdict::Inconclusive
            };
            (CandidateSet::Vertices(k1, k2), verdict)
        }
    };
    if !gap_below_one && candidates != CandidateSet::Empty {
        notes.push(format!("gap {gap} is not strictly below one"));
    }

    Ok(TargetReport {
        target: TransferKind::Vertex,
        stated_range_start: range_start,
        in_stated_range,
        candidates,
        candidate_kernel_residual: kernel,
        support,
        gap_indices: Some((2, 3)),
        gap: Some(gap),
        gap_below_one,
        path_reduction: None,
        verdict,
        notes,
    })
}

fn pair_target(
    mach: &mut Machinery<'_>,
    decomp: &SpectralDecomposition,
    n: usize,
    b: usize,
    rho: f64,
) -> Result<TargetReport, ClosedFormError> {
    let zeta = Zeta::Plus;
    let antipodal_chord = 2 * b == n;
    let range_start = if antipodal_chord { 16 } else { 22 };
    let in_stated_range = n >= range_start;
    let lemma_start = 13;
    let mut notes = Vec::new();
    let mut support = Vec::new();
    let mut kernel = 0.0_f64;
    let mut path_reduction = None;

    let gap_indices = if antipodal_chord { None } else { Some((2, 4)) };
    let gap = gap_indices
        .map(|(a, c)| (cycle_eigenvalue(n, c, zeta) - cycle_eigenvalue(n, a, zeta)).abs());
    let gap_below_one = gap.map(|g| g < 1.0).unwrap_or(false);

    let (candidates, verdict) = match pair_pst_candidates(n, b, zeta)? {
        None => {
            notes.push("no pair sums survive the frequency-1 constraints".into());
            if n >= lemma_start {
                (CandidateSet::Empty, WitnessVerdict::PreconditionsVerified)
            } else {
                notes.push(format!(
                    "the constraint lemma is stated for n >= {lemma_start}; below \
                     that an empty candidate set is not conclusive"
                ));
                (CandidateSet::Empty, WitnessVerdict::Inconclusive)
            }
        }
        Some(residue) => {
            let (_, z1) = mach.vec(1)?;
            for (k, l) in accepted_pairs(n, residue) {
                kernel = kernel.max((z1[k] - z1[l]).abs());
            }
            for j in [2usize, 4] {
                support.push(pair_support_check(mach, decomp, j, n, residue)?);
            }
            let verdict = if antipodal_chord {
                // The cited argument reduces the antipodal chord to a plain
                // path walk in the minus sector; frequency-2 exclusion at
                // the accepted pairs is the constraint lemma itself.
                notes.push(
                    "antipodal chord: verdict rests on the minus-sector path \
                     reduction; support rows are informational"
                        .into(),
                );
                let reduction = antipodal_path_reduction(n, rho)?;
                let ok = reduction.ok && in_stated_range;
                path_reduction = Some(reduction);
                if ok {
                    WitnessVerdict::PreconditionsVerified
                } else {
                    WitnessVerdict::Inconclusive
                }
            } else {
                let all_certified = support.iter().all(|s| s.certified);
                if !all_certified {
                    notes.push(
                        "some accepted pairs lack a certified support entry \
                         (antipodal vertex pairs need a separate argument)"
                            .into(),
                    );
                }
                if gap_below_one && in_stated_range && all_certified {
                    WitnessVerdict::PreconditionsVerified
                } else {
                    WitnessVerdict::Inconclusive
                }
            };
            (CandidateSet::PairSumResidue(residue), verdict)
        }
    };
    if let Some(g) = gap {
        if !gap_below_one && candidates != CandidateSet::Empty {
            notes.push(format!("gap {g} is not strictly below one"));
        }
    }
    if !in_stated_range && candidates != CandidateSet::Empty {
        notes.push(format!("stated range starts at n = {range_start}"));
    }

    Ok(TargetReport {
        target: TransferKind::Pair,
        stated_range_start: range_start,
        in_stated_range,
        candidates,
        candidate_kernel_residual: kernel,
        support,
        gap_indices,
        gap,
        gap_below_one,
        path_reduction,
        verdict,
        notes,
    })
}

/// Checks the desk-verifiable preconditions of the no-PST arguments for
/// the chord-perturbed cycle at one concrete parameter point: candidate
/// filters, eigenvalue gaps strictly below one, closed-form and numeric
/// support membership, sector reductions, and the stated n-ranges.
pub fn nonexistence_witness(
    n: usize,
    b: usize,
    rho: f64,
    zeta: Zeta,
) -> Result<NonexistenceReport, ClosedFormError> {
    let min_n = match zeta {
        Zeta::Minus => 7,
        Zeta::Plus => 9,
    };
    if n < min_n {
        return Err(ClosedFormError::BadParameter(format!(
            "nonexistence checks need n >= {min_n} for zeta = {zeta}, got {n}"
        )));
    }
    check_chord(n, b)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(ClosedFormError::BadParameter(format!(
            "chord weight must be positive, got {rho}"
        )));
    }

    let m_rho = perturbed_cycle_matrix(n, b, rho, zeta)?;
    let decomp = eigendecompose_default(&m_rho)?;
    let mut mach = Machinery {
        n,
        b,
        zeta,
        matrix: &m_rho,
        cache: BTreeMap::new(),
        residual: 0.0,
    };

    let mut notes = Vec::new();
    let mut targets = Vec::new();
    targets.push(vertex_target(&mut mach, &decomp, n, b, zeta)?);
    match zeta {
        Zeta::Minus => notes.push(
            "pair transfer under the Laplacian reduces to end-potential path \
             vertex transfer; no nonexistence claim is checked for it"
                .into(),
        ),
        Zeta::Plus => targets.push(pair_target(&mut mach, &decomp, n, b, rho)?),
    }

    let verdict = if targets
        .iter()
        .all(|t| t.verdict == WitnessVerdict::PreconditionsVerified)
    {
        WitnessVerdict::PreconditionsVerified
    } else {
        WitnessVerdict::Inconclusive
    };
    Ok(NonexistenceReport {
        zeta,
        n,
        b,
        rho,
        machinery_residual: mach.residual,
        targets,
        verdict,
        notes,
    })
}

/// The (q, time) pairs at which the bare 3-path admits end-to-end vertex
/// PST under its q-Laplacian: q = sqrt(8 l^2 / (k^2 - l^2)) at time
/// pi (k^2 - l^2) / (4 l), for integers k > l >= 1 of opposite parity.
pub fn p3_pst_parameters(k: u64, l: u64) -> Result<(f64, f64), ClosedFormError> {
    if l < 1 || k <= l {
        return Err(ClosedFormError::BadParameter(format!(
            "need k > l >= 1, got k = {k}, l = {l}"
        )));
    }
    if (k - l) % 2 == 0 {
        return Err(ClosedFormError::BadParameter(format!(
            "k = {k} and l = {l} must have opposite parity"
        )));
    }
    let num = (k * k - l * l) as f64;
    let q = (8.0 * (l * l) as f64 / num).sqrt();
    let tau = PI * num / (4.0 * l as f64);
    Ok((q, tau))
}

/// Max entrywise deviation over `times` between the walk on the path with
/// potential omega at both ends and the phase-adjusted walk generated by
/// -q A', where A' is the plain path adjacency with loops of weight
/// (1 - omega) q at the ends. The two generators differ by (1 + q^2) I, so
/// the deviation is numerical noise only.
pub fn path_potential_equivalence(
    n: usize,
    omega: f64,
    q: QParameter,
    times: &[f64],
) -> Result<f64, ClosedFormError> {
    let fi = families::path_with_end_potentials(n, omega, omega)?;
    let d_pot = eigendecompose_default(&fi.graph.q_laplacian(q))?;
    let qv = q.value();

    let mut looped = families::path(n)?.graph.adjacency_matrix();
    looped[(0, 0)] += (1.0 - omega) * qv;
    looped[(n - 1, n - 1)] += (1.0 - omega) * qv;
    let d_adj = eigendecompose_default(&(-qv * looped))?;

    let phase_rate = 1.0 + qv * qv;
    let devs = par::map_vec(times.to_vec(), |t| {
        let u_pot = d_pot.transition_matrix(t);
        let u_adj =
            d_adj.transition_matrix(t) * crate::Complex64::from_polar(1.0, t * phase_rate);
        (u_pot - u_adj)
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()))
    });
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// The minus sector of the end-potential path under its reflection, in
/// closed form next to the extracted block.
#[derive(Debug, Clone)]
pub struct PnMinusBlock {
    pub closed_form: RealMatrix,
    pub extracted: RealMatrix,
    pub deviation: f64,
}

/// Closed form of the reflection minus sector of the path on n vertices
/// with potential omega at both ends: the q-Laplacian of the half path
/// plus q^2 omega at the outer slot and q^2 + q (n even) or q^2 (n odd)
/// at the cut slot. Compared entrywise against the block extraction.
pub fn pn_omega_half_blocks(
    n: usize,
    omega: f64,
    q: QParameter,
) -> Result<PnMinusBlock, ClosedFormError> {
    if n < 2 {
        return Err(ClosedFormError::BadParameter(format!(
            "reflection sector needs n >= 2, got {n}"
        )));
    }
    let fi = families::path_with_end_potentials(n, omega, omega)?;
    let inv = fi
        .involution
        .as_ref()
        .expect("symmetric end potentials carry the reflection");
    let extracted = involution::half_blocks(&fi.graph, inv, q).lminus;

    let k = n / 2;
    let qv = q.value();
    let mut closed_form = families::path(k)?.graph.q_laplacian(q);
    closed_form[(0, 0)] += qv * qv * omega;
    let cut = k - 1;
    closed_form[(cut, cut)] += if n % 2 == 0 { qv * qv + qv } else { qv * qv };

    let deviation = (&closed_form - &extracted).abs().max();
    Ok(PnMinusBlock {
        closed_form,
        extracted,
        deviation,
    })
}

/// A pair transfer found by perturbing a base graph, frozen as plain data.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbationWitness {
    /// Added edges (unit weight), canonical under the base symmetry group.
    pub edges: Vec<(usize, usize)>,
    /// Vertices given a potential, with the value.
    pub potentials: Vec<(usize, f64)>,
    pub q: f64,
    pub sector: Sector,
    pub x: StateSpec,
    pub y: StateSpec,
    pub time: f64,
    pub fidelity: f64,
    pub involution: InvolutionJson,
}

fn binomial_capped(m: usize, k: usize, cap: usize) -> Option<usize> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (m - i) as u128 / (i + 1) as u128;
        if acc > 2 * cap as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

fn k_subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that can still move.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All weight- and potential-preserving vertex permutations of g, found by
/// signature-pruned backtracking. Capped: bases with huge symmetry groups
/// (near-empty or near-complete graphs) are rejected rather than
/// enumerated.
fn base_automorphisms(
    g: &WeightedGraph,
    cap: usize,
) -> Result<Vec<Vec<usize>>, ClosedFormError> {
    let n = g.n();
    let sig: Vec<(u64, Vec<u64>)> = (0..n)
        .map(|v| {
            let mut w: Vec<u64> = (0..n)
                .filter_map(|u| g.weight(v, u).map(f64::to_bits))
                .collect();
            w.sort_unstable();
            (g.potential(v).to_bits(), w)
        })
        .collect();

    fn extend(
        g: &WeightedGraph,
        sig: &[(u64, Vec<u64>)],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> bool {
        let v = perm.len();
        if v == g.n() {
            out.push(perm.clone());
            return out.len() <= cap;
        }
        for u in 0..g.n() {
            if used[u] || sig[u] != sig[v] {
                continue;
            }
            if (0..v).any(|w| g.weight(v, w) != g.weight(u, perm[w])) {
                continue;
            }
            perm.push(u);
            used[u] = true;
            let ok = extend(g, sig, perm, used, out, cap);
            perm.pop();
            used[u] = false;
            if !ok {
                return false;
            }
        }
        true
    }

    let mut out = Vec::new();
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if !extend(g, &sig, &mut perm, &mut used, &mut out, cap) {
        return Err(ClosedFormError::BadParameter(format!(
            "base symmetry group exceeds {cap} elements; canonicalization refused"
        )));
    }
    Ok(out)
}

type CandidateKey = (Vec<(usize, usize)>, Vec<(usize, u64)>);

fn canonical_candidate(
    edges: &[(usize, usize)],
    pots: &[(usize, f64)],
    autos: &[Vec<usize>],
) -> CandidateKey {
    autos
        .iter()
        .map(|sigma| {
            let mut e: Vec<(usize, usize)> = edges
                .iter()
                .map(|&(u, v)| {
                    let (a, b) = (sigma[u], sigma[v]);
                    (a.min(b), a.max(b))
                })
                .collect();
            e.sort_unstable();
            let mut p: Vec<(usize, u64)> = pots
                .iter()
                .map(|&(v, val)| (sigma[v], val.to_bits()))
                .collect();
            p.sort_unstable();
            (e, p)
        })
        .min()
        .expect("identity is always present")
}

/// Adds `num_edges` unit edges (and optionally one potential value on a
/// vertex pair) to the base graph in every way, deduplicates candidates
/// under the base symmetry group, and reports every involution-reducible
/// pair transfer found on the horizon. Results are deterministic and
/// sorted; the search refuses to run past SEARCH_CAP candidates.
pub fn perturbation_search(
    base: &WeightedGraph,
    num_edges: usize,
    potential_menu: &[f64],
    q: QParameter,
    t_max: f64,
) -> Result<Vec<PerturbationWitness>, ClosedFormError> {
    let n = base.n();
    if n < 2 || n > 16 {
        return Err(ClosedFormError::BadParameter(format!(
            "perturbation search handles 2..=16 vertices, got {n}"
        )));
    }
    let complement: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| base.weight(u, v).is_none())
        .collect();
    if num_edges > complement.len() {
        return Err(ClosedFormError::BadParameter(format!(
            "{num_edges} edges requested but the complement has only {}",
            complement.len()
        )));
    }

    // Potential assignments: none, or one menu value on one vertex pair.
    let mut pot_options: Vec<Vec<(usize, f64)>> = vec![vec![]];
    for &val in potential_menu {
        for u in 0..n {
            for v in (u + 1)..n {
                pot_options.push(vec![(u, val), (v, val)]);
            }
        }
    }

    let subsets = binomial_capped(complement.len(), num_edges, SEARCH_CAP)
        .ok_or(ClosedFormError::SearchSpaceTooLarge(usize::MAX, SEARCH_CAP))?;
    let total = subsets.saturating_mul(pot_options.len());
    if total > SEARCH_CAP {
        return Err(ClosedFormError::SearchSpaceTooLarge(total, SEARCH_CAP));
    }

    let autos = base_automorphisms(base, 10_000)?;
    let mut seen = BTreeSet::new();
    let mut candidates: Vec<CandidateKey> = Vec::new();
    for subset in k_subsets(complement.len(), num_edges) {
        let edges: Vec<(usize, usize)> = subset.iter().map(|&i| complement[i]).collect();
        for pots in &pot_options {
            let key = canonical_candidate(&edges, pots, &autos);
            if seen.insert(key.clone()) {
                candidates.push(key);
            }
        }
    }

    let results = par::map_vec(candidates, |(edges, pots)| {
        run_candidate(base, &edges, &pots, q, t_max)
    });

    let mut witnesses = Vec::new();
    for r in results {
        witnesses.extend(r?);
    }
    witnesses.sort_by(|a, b| {
        (&a.edges, a.potentials_key(), a.time)
            .partial_cmp(&(&b.edges, b.potentials_key(), b.time))
            .unwrap()
            .then_with(|| a.x.to_string().cmp(&b.x.to_string()))
            .then_with(|| a.y.to_string().cmp(&b.y.to_string()))
    });
    Ok(witnesses)
}

impl PerturbationWitness {
    fn potentials_key(&self) -> Vec<(usize, u64)> {
        self.potentials
            .iter()
            .map(|&(v, val)| (v, val.to_bits()))
            .collect()
    }
}

fn run_candidate(
    base: &WeightedGraph,
    edges: &[(usize, usize)],
    pots: &[(usize, u64)],
    q: QParameter,
    t_max: f64,
) -> Result<Vec<PerturbationWitness>, ClosedFormError> {
    let mut g = base.clone();
    for &(u, v) in edges {
        g.add_edge(u, v, 1.0)?;
    }
    for &(v, bits) in pots {
        g.set_potential(v, f64::from_bits(bits))?;
    }
    let potentials: Vec<(usize, f64)> = pots
        .iter()
        .map(|&(v, bits)| (v, f64::from_bits(bits)))
        .collect();

    let mut out = Vec::new();
    let mut dedup = BTreeSet::new();
    for inv in involution::find_involutions(&g)? {
        for w in involution::reduce_pair_pst(&g, &inv, q, t_max, PST_TOL)? {
            let (Some(x), Some(y)) = (w.x.spec(), w.y.spec()) else {
                continue;
            };
            let key = (x.to_string(), y.to_string(), (w.time * 1e9).round() as i64);
            if !dedup.insert(key) {
                continue;
            }
            out.push(PerturbationWitness {
                edges: edges.to_vec(),
                potentials: potentials.clone(),
                q: q.value(),
                sector: w.sector,
                x,
                y,
                time: w.time,
                fidelity: w.fidelity,
                involution: InvolutionJson::from(&inv),
            });
        }
    }
    Ok(out)
}
