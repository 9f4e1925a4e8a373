//! States and transfer detection.
//!
//! A real pure state x transfers perfectly to y at time t when
//! U(t) x = gamma y for some unimodular gamma, equivalently when the fidelity
//! |y^T U(t) x| reaches 1. Everything here works through the per-eigenvalue
//! amplitude sum_j c_j e^{i t theta_j} with c_j = y^T F_j x, so a single
//! decomposition supports cheap scans over dense time grids.
//!
//! Strong cospectrality (F_j x = +/- F_j y for every j) is a necessary
//! condition for PST between linearly independent states and is reported as a
//! precheck. States supported on a single eigenvalue are fixed: they never
//! leave themselves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::par;
use crate::spectral::SpectralDecomposition;
use crate::{Complex64, RealVector, SUPPORT_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransferError {
    #[error("vertex {0} out of range for state on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("state vertices must be distinct")]
    RepeatedVertex,
    #[error("s-pair weight must be nonzero")]
    ZeroWeight,
    #[error("zero vector cannot be normalized into a state")]
    ZeroVector,
    #[error("state dimension {0} does not match decomposition dimension {1}")]
    DimensionMismatch(usize, usize),
    #[error("strong cospectrality is undefined for linearly dependent states")]
    ParallelStates,
    #[error("cannot parse state spec {0:?}; expected v:a, pair:a,b, plus:a,b or spair:a,b:s")]
    BadSpec(String),
}

/// Symbolic description of a structured state, independent of graph order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Vertex(usize),
    /// (e_a - e_b)/sqrt(2)
    Pair(usize, usize),
    /// (e_a + e_b)/sqrt(2)
    Plus(usize, usize),
    /// (e_a + s e_b)/sqrt(1 + s^2), s != 0
    SPair(usize, usize, f64),
}

impl StateSpec {
    pub fn to_state(self, n: usize) -> Result<PureState, TransferError> {
        match self {
            StateSpec::Vertex(a) => PureState::vertex(n, a),
            StateSpec::Pair(a, b) => PureState::pair(n, a, b),
            StateSpec::Plus(a, b) => PureState::plus(n, a, b),
            StateSpec::SPair(a, b, s) => PureState::s_pair(n, a, b, s),
        }
    }

    pub fn vertices(self) -> Vec<usize> {
        match self {
            StateSpec::Vertex(a) => vec![a],
            StateSpec::Pair(a, b) | StateSpec::Plus(a, b) | StateSpec::SPair(a, b, _) => {
                vec![a, b]
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Vertex(a) => write!(f, "v:{a}"),
            StateSpec::Pair(a, b) => write!(f, "pair:{a},{b}"),
            StateSpec::Plus(a, b) => write!(f, "plus:{a},{b}"),
            StateSpec::SPair(a, b, s) => write!(f, "spair:{a},{b}:{s:?}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = TransferError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TransferError::BadSpec(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "v" => Ok(StateSpec::Vertex(rest.parse().map_err(|_| bad())?)),
            "pair" | "plus" => {
                let (a, b) = rest.split_once(',').ok_or_else(bad)?;
                let a = a.parse().map_err(|_| bad())?;
                let b = b.parse().map_err(|_| bad())?;
                Ok(if kind == "pair" {
                    StateSpec::Pair(a, b)
                } else {
                    StateSpec::Plus(a, b)
                })
            }
            "spair" => {
                let (ab, sval) = rest.rsplit_once(':').ok_or_else(bad)?;
                let (a, b) = ab.split_once(',').ok_or_else(bad)?;
                let s_weight: f64 = sval.parse().map_err(|_| bad())?;
                if s_weight == 0.0 || !s_weight.is_finite() {
                    return Err(bad());
                }
                Ok(StateSpec::SPair(
                    a.parse().map_err(|_| bad())?,
                    b.parse().map_err(|_| bad())?,
                    s_weight,
                ))
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for StateSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A unit real vector, optionally remembering its structured origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: RealVector,
    spec: Option<StateSpec>,
}

impl PureState {
    fn check(n: usize, v: usize) -> Result<(), TransferError> {
        if v >= n {
            return Err(TransferError::VertexOutOfRange(v, n));
        }
        Ok(())
    }

    pub fn vertex(n: usize, a: usize) -> Result<Self, TransferError> {
        Self::check(n, a)?;
        let mut vec = RealVector::zeros(n);
        vec[a] = 1.0;
        Ok(PureState {
            vector: vec,
            spec: Some(StateSpec::Vertex(a)),
        })
    }

    pub fn pair(n: usize, a: usize, b: usize) -> Result<Self, TransferError> {
        let mut st = Self::s_pair(n, a, b, -1.0)?;
        st.spec = Some(StateSpec::Pair(a, b));
        Ok(st)
    }

    pub fn plus(n: usize, a: usize, b: usize) -> Result<Self, TransferError> {
        let mut st = Self::s_pair(n, a, b, 1.0)?;
        st.spec = Some(StateSpec::Plus(a, b));
        Ok(st)
    }

    pub fn s_pair(n: usize, a: usize, b: usize, s: f64) -> Result<Self, TransferError> {
        Self::check(n, a)?;
        Self::check(n, b)?;
        if a == b {
            return Err(TransferError::RepeatedVertex);
        }
        if s == 0.0 || !s.is_finite() {
            return Err(TransferError::ZeroWeight);
        }
        let norm = (1.0 + s * s).sqrt();
        let mut vec = RealVector::zeros(n);
        vec[a] = 1.0 / norm;
        vec[b] = s / norm;
        Ok(PureState {
            vector: vec,
            spec: Some(StateSpec::SPair(a, b, s)),
        })
    }

    /// Any nonzero vector, normalized.
    pub fn raw(vector: RealVector) -> Result<Self, TransferError> {
        let norm = vector.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(TransferError::ZeroVector);
        }
        Ok(PureState {
            vector: vector / norm,
            spec: None,
        })
    }

    pub fn vector(&self) -> &RealVector {
        &self.vector
    }

    pub fn n(&self) -> usize {
        self.vector.len()
    }

    pub fn spec(&self) -> Option<StateSpec> {
        self.spec
    }

    /// |<x, y>| up to sign; 1 for linearly dependent unit states.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.vector.dot(&other.vector).abs()
    }
}

/// Outcome classes for a transfer query at a fixed time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PST")]
    Pst,
    #[serde(rename = "NO_PST_AT_TIME")]
    NoPstAtTime,
    #[serde(rename = "PERIODIC")]
    Periodic,
    #[serde(rename = "NOT_STRONGLY_COSPECTRAL")]
    NotStronglyCospectral,
    #[serde(rename = "FIXED_STATE")]
    FixedState,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Pst => "PST",
            Verdict::NoPstAtTime => "NO_PST_AT_TIME",
            Verdict::Periodic => "PERIODIC",
            Verdict::NotStronglyCospectral => "NOT_STRONGLY_COSPECTRAL",
            Verdict::FixedState => "FIXED_STATE",
        };
        f.write_str(s)
    }
}

/// Unimodular transfer phase, serialized as {re, im}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Phase {
    fn from(c: Complex64) -> Self {
        Phase { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub verdict: Verdict,
    pub time: f64,
    pub phase: Phase,
    pub fidelity: f64,
    pub residual: f64,
}

/// y^T U(t) x as a complex amplitude.
pub fn amplitude(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    t: f64,
) -> Result<Complex64, TransferError> {
    check_dims(d, x)?;
    check_dims(d, y)?;
    let coeffs = d.transfer_coefficients(x.vector(), y.vector());
    Ok(amp_from_coeffs(&coeffs, d.eigenvalues(), t))
}

fn amp_from_coeffs(coeffs: &[f64], thetas: &[f64], t: f64) -> Complex64 {
    let mut amp = Complex64::new(0.0, 0.0);
    for (c, theta) in coeffs.iter().zip(thetas) {
        amp += Complex64::from_polar(*c, t * theta);
    }
    amp
}

/// |y^T U(t) x|.
pub fn fidelity(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    t: f64,
) -> Result<f64, TransferError> {
    Ok(amplitude(d, x, y, t)?.norm())
}

fn check_dims(d: &SpectralDecomposition, x: &PureState) -> Result<(), TransferError> {
    if x.n() != d.n() {
        return Err(TransferError::DimensionMismatch(x.n(), d.n()));
    }
    Ok(())
}

/// Strong cospectrality: F_j x = +/- F_j y for every spectral projector, with
/// matching supports. Necessary for PST between linearly independent states.
pub fn is_strongly_cospectral(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    tol: f64,
) -> Result<bool, TransferError> {
    check_dims(d, x)?;
    check_dims(d, y)?;
    if x.overlap(y) > 1.0 - 1e-10 {
        return Err(TransferError::ParallelStates);
    }
    for f in d.projectors() {
        let a = f * x.vector();
        let b = f * y.vector();
        let (na, nb) = (a.norm(), b.norm());
        if na <= tol && nb <= tol {
            continue;
        }
        if na <= tol || nb <= tol {
            return Ok(false);
        }
        let diff = (&a - &b).norm().min((&a + &b).norm());
        if diff > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Is x mapped onto itself (up to phase) at time t?
pub fn is_periodic_at(
    d: &SpectralDecomposition,
    x: &PureState,
    t: f64,
    pst_tol: f64,
) -> Result<bool, TransferError> {
    Ok(fidelity(d, x, x, t)? >= 1.0 - pst_tol)
}

/// Classifies the transfer x -> y at one fixed time.
pub fn detect_pst(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    t: f64,
    pst_tol: f64,
) -> Result<TransferReport, TransferError> {
    let amp = amplitude(d, x, y, t)?;
    let fid = amp.norm();
    let phase = if fid > 1e-12 {
        Phase::from(amp / fid)
    } else {
        Phase { re: 0.0, im: 0.0 }
    };
    let parallel = x.overlap(y) > 1.0 - 1e-10;
    let verdict = if parallel {
        if fid >= 1.0 - pst_tol {
            Verdict::Periodic
        } else {
            Verdict::NoPstAtTime
        }
    } else if d.is_fixed_state(x.vector()) {
        // A single-eigenvalue state only ever picks up a global phase.
        Verdict::FixedState
    } else if fid >= 1.0 - pst_tol {
        Verdict::Pst
    } else if !is_strongly_cospectral(d, x, y, SUPPORT_TOL)? {
        Verdict::NotStronglyCospectral
    } else {
        Verdict::NoPstAtTime
    };
    Ok(TransferReport {
        verdict,
        time: t,
        phase,
        fidelity: fid,
        residual: 1.0 - fid,
    })
}

/// A certified transfer time found by scanning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PstHit {
    pub time: f64,
    pub fidelity: f64,
    pub phase: Phase,
}

/// Grid scan followed by golden-section refinement of every local fidelity
/// maximum. The grid step is pi / (64 * spectral diameter), fine enough that
/// no fidelity peak fits between adjacent grid points.
pub fn search_pst(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    t_max: f64,
    pst_tol: f64,
) -> Result<Vec<PstHit>, TransferError> {
    check_dims(d, x)?;
    check_dims(d, y)?;
    let coeffs = d.transfer_coefficients(x.vector(), y.vector());
    let thetas = d.eigenvalues().to_vec();
    let maxima = scan_extrema(&coeffs, &thetas, t_max, false);
    let mut hits: Vec<PstHit> = maxima
        .into_iter()
        .filter(|&(_, fid)| fid >= 1.0 - pst_tol)
        .map(|(t, fid)| {
            let amp = amp_from_coeffs(&coeffs, &thetas, t);
            PstHit {
                time: t,
                fidelity: fid,
                phase: Phase::from(amp / amp.norm()),
            }
        })
        .collect();
    hits.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(hits)
}

/// Best transfer achieved on the horizon; a lower bound for PGST exploration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PgstEstimate {
    pub best_time: f64,
    pub best_fidelity: f64,
}

pub fn pgst_heuristic(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    t_max: f64,
) -> Result<PgstEstimate, TransferError> {
    check_dims(d, x)?;
    check_dims(d, y)?;
    let coeffs = d.transfer_coefficients(x.vector(), y.vector());
    let thetas = d.eigenvalues().to_vec();
    let maxima = scan_extrema(&coeffs, &thetas, t_max, false);
    let (best_time, best_fidelity) = maxima
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, 0.0));
    Ok(PgstEstimate {
        best_time,
        best_fidelity,
    })
}

/// Minimum of |x^T U(t) x| over (0, t_max], found by scanning. A finite scan
/// only bounds the true infimum from above: the state is at most this
/// sedentary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SedentaryEstimate {
    pub min_fidelity: f64,
    pub at_time: f64,
}

pub fn sedentariness_estimate(
    d: &SpectralDecomposition,
    x: &PureState,
    t_max: f64,
) -> Result<SedentaryEstimate, TransferError> {
    check_dims(d, x)?;
    let coeffs = d.transfer_coefficients(x.vector(), x.vector());
    let thetas = d.eigenvalues().to_vec();
    let minima = scan_extrema(&coeffs, &thetas, t_max, true);
    let (at_time, min_fidelity) = minima
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, 1.0));
    Ok(SedentaryEstimate {
        min_fidelity,
        at_time,
    })
}

/// Dense fidelity samples for plotting: (t_i, |y^T U(t_i) x|).
pub fn fidelity_curve(
    d: &SpectralDecomposition,
    x: &PureState,
    y: &PureState,
    t_max: f64,
    samples: usize,
) -> Result<Vec<(f64, f64)>, TransferError> {
    check_dims(d, x)?;
    check_dims(d, y)?;
    let coeffs = d.transfer_coefficients(x.vector(), y.vector());
    let thetas = d.eigenvalues().to_vec();
    let pts: Vec<usize> = (0..samples.max(2)).collect();
    let denom = (samples.max(2) - 1) as f64;
    Ok(par::map_vec(pts, move |i| {
        let t = t_max * i as f64 / denom;
        (t, amp_from_coeffs(&coeffs, &thetas, t).norm())
    }))
}

/// Locates local extrema of |amp(t)| on (0, t_max] via a dense grid, then
/// polishes each with 60 golden-section iterations.
fn scan_extrema(coeffs: &[f64], thetas: &[f64], t_max: f64, minimize: bool) -> Vec<(f64, f64)> {
    if t_max <= 0.0 {
        return Vec::new();
    }
    let diameter = match (
        thetas.iter().cloned().reduce(f64::min),
        thetas.iter().cloned().reduce(f64::max),
    ) {
        (Some(lo), Some(hi)) if hi > lo => hi - lo,
        // Single eigenvalue: |amp| is constant in t.
        _ => {
            let fid = coeffs.iter().sum::<f64>().abs();
            return vec![(t_max / 2.0, fid)];
        }
    };
    let step = std::f64::consts::PI / (64.0 * diameter);
    let count = (t_max / step).ceil() as usize + 1;
    let sign = if minimize { -1.0 } else { 1.0 };

    let grid: Vec<f64> = par::map_vec((0..=count).collect(), |i| {
        let t = (i as f64 * step).min(t_max);
        sign * amp_from_coeffs(coeffs, thetas, t).norm()
    });

    let mut extrema = Vec::new();
    for i in 1..count {
        if grid[i] >= grid[i - 1] && grid[i] >= grid[i + 1] {
            let lo = (i as f64 - 1.0) * step;
            let hi = ((i as f64 + 1.0) * step).min(t_max);
            let (t, v) = golden_section(lo.max(step * 1e-6), hi, |t| {
                sign * amp_from_coeffs(coeffs, thetas, t).norm()
            });
            extrema.push((t, sign * v));
        }
    }
    // Dedup refinements that converged to the same extremum.
    extrema.sort_by(|a, b| a.0.total_cmp(&b.0));
    extrema.dedup_by(|a, b| (a.0 - b.0).abs() < step * 0.5);
    extrema
}

/// Maximizes f on [lo, hi]; 60 iterations shrink the bracket by ~1e-12.
fn golden_section(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::spectral::eigendecompose_default;
    use crate::PST_TOL;
    use std::f64::consts::PI;

    fn decomp(g: &WeightedGraph) -> SpectralDecomposition {
        eigendecompose_default(&g.laplacian()).unwrap()
    }

    fn path(n: usize) -> WeightedGraph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        WeightedGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn state_constructors_and_specs() {
        let v = PureState::vertex(3, 1).unwrap();
        assert_eq!(v.vector().as_slice(), &[0.0, 1.0, 0.0]);

        let p = PureState::pair(3, 0, 2).unwrap();
        assert!((p.vector()[0] - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((p.vector()[2] + 1.0 / 2f64.sqrt()).abs() < 1e-15);

        let sp = PureState::s_pair(4, 1, 3, 0.5).unwrap();
        assert!((sp.vector().norm() - 1.0).abs() < 1e-15);

        assert_eq!(PureState::pair(3, 1, 1), Err(TransferError::RepeatedVertex));
        assert_eq!(
            PureState::vertex(2, 5),
            Err(TransferError::VertexOutOfRange(5, 2))
        );
        assert_eq!(
            PureState::s_pair(3, 0, 1, 0.0),
            Err(TransferError::ZeroWeight)
        );
    }

    #[test]
    fn spec_parse_round_trip() {
        for s in ["v:3", "pair:1,4", "plus:2,5", "spair:1,4:0.5"] {
            let spec: StateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("pair:1".parse::<StateSpec>().is_err());
        assert!("w:1".parse::<StateSpec>().is_err());
        assert!("spair:1,2:0".parse::<StateSpec>().is_err());
    }

    #[test]
    fn p2_vertex_pst_at_half_pi() {
        let d = decomp(&path(2));
        let x = PureState::vertex(2, 0).unwrap();
        let y = PureState::vertex(2, 1).unwrap();
        let report = detect_pst(&d, &x, &y, PI / 2.0, PST_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::Pst);
        assert!(report.fidelity >= 1.0 - 1e-12);
        assert!(report.residual <= 1e-12);

        let early = detect_pst(&d, &x, &y, PI / 4.0, PST_TOL).unwrap();
        assert_eq!(early.verdict, Verdict::NoPstAtTime);
        assert!((early.fidelity - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn strong_cospectrality_on_p3() {
        let d = decomp(&path(3));
        let e0 = PureState::vertex(3, 0).unwrap();
        let e1 = PureState::vertex(3, 1).unwrap();
        let e2 = PureState::vertex(3, 2).unwrap();
        assert!(is_strongly_cospectral(&d, &e0, &e2, SUPPORT_TOL).unwrap());
        assert!(!is_strongly_cospectral(&d, &e0, &e1, SUPPORT_TOL).unwrap());
        assert_eq!(
            is_strongly_cospectral(&d, &e0, &e0, SUPPORT_TOL),
            Err(TransferError::ParallelStates)
        );

        let report = detect_pst(&d, &e0, &e1, 1.0, PST_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::NotStronglyCospectral);
    }

    #[test]
    fn twin_pair_is_fixed_and_sharply_sedentary() {
        let d = decomp(&path(3));
        let pair = PureState::pair(3, 0, 2).unwrap();
        let other = PureState::vertex(3, 1).unwrap();
        let report = detect_pst(&d, &pair, &other, 2.0, PST_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::FixedState);

        let sed = sedentariness_estimate(&d, &pair, 20.0).unwrap();
        assert!((sed.min_fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn c4_vertex_is_periodic_at_pi() {
        let c4 = WeightedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let d = decomp(&c4);
        let e0 = PureState::vertex(4, 0).unwrap();
        let report = detect_pst(&d, &e0, &e0, PI, PST_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::Periodic);
        assert!(is_periodic_at(&d, &e0, PI, PST_TOL).unwrap());
        assert!(!is_periodic_at(&d, &e0, PI / 2.0, PST_TOL).unwrap());
    }

    #[test]
    fn search_finds_odd_multiples_on_p2() {
        let d = decomp(&path(2));
        let x = PureState::vertex(2, 0).unwrap();
        let y = PureState::vertex(2, 1).unwrap();
        let hits = search_pst(&d, &x, &y, 5.0, PST_TOL).unwrap();
        assert_eq!(hits.len(), 2);
        assert!((hits[0].time - PI / 2.0).abs() < 1e-6);
        assert!((hits[1].time - 3.0 * PI / 2.0).abs() < 1e-6);
        for h in &hits {
            assert!(h.fidelity >= 1.0 - PST_TOL);
        }
    }

    #[test]
    fn p2_origin_empties_at_half_pi() {
        let d = decomp(&path(2));
        let x = PureState::vertex(2, 0).unwrap();
        let sed = sedentariness_estimate(&d, &x, 10.0).unwrap();
        assert!(sed.min_fidelity < 1e-9);
        assert!((sed.at_time % PI - PI / 2.0).abs() < 1e-6 || sed.min_fidelity < 1e-9);

        let best = pgst_heuristic(&d, &x, &PureState::vertex(2, 1).unwrap(), 10.0).unwrap();
        assert!(best.best_fidelity >= 1.0 - 1e-9);
    }

    #[test]
    fn fidelity_is_symmetric_in_states() {
        let g = WeightedGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)])
            .unwrap();
        let d = decomp(&g);
        let x = PureState::pair(5, 0, 2).unwrap();
        let y = PureState::plus(5, 1, 4).unwrap();
        for &t in &[0.3, 1.7, 4.4] {
            let a = fidelity(&d, &x, &y, t).unwrap();
            let b = fidelity(&d, &y, &x, t).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn curve_endpoints_and_shape() {
        let d = decomp(&path(2));
        let x = PureState::vertex(2, 0).unwrap();
        let y = PureState::vertex(2, 1).unwrap();
        let curve = fidelity_curve(&d, &x, &y, PI, 5).unwrap();
        assert_eq!(curve.len(), 5);
        assert!((curve[0].1 - 0.0).abs() < 1e-14);
        assert!((curve[2].1 - 1.0).abs() < 1e-12); // t = pi/2
        assert!((curve[4].1 - 0.0).abs() < 1e-12); // t = pi
    }
}
