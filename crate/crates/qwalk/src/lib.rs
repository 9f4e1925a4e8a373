//! Continuous-time quantum walks under the q-deformed Laplacian family.
//!
//! For a weighted graph with adjacency matrix A, weighted degree matrix D and
//! diagonal potential matrix V, the walk Hamiltonian studied here is
//!
//! ```text
//! L_q = (1 - q^2) I + q^2 (D + V) - q A,        q != 0,
//! ```
//!
//! which interpolates between the ordinary Laplacian (q = 1) and the signless
//! Laplacian (q = -1). The library computes transition matrices U(t) = exp(i t L_q),
//! decides perfect state transfer (PST) between vertex, pair and plus states,
//! exploits involutive graph symmetries to block-diagonalize the walk, and
//! carries a corpus of reference transfer claims with closed-form eigenvector
//! machinery for cycles with a perturbed edge.
//!
//! Everything is dense and double precision, sized for graphs up to a few dozen
//! vertices. Grid scans and corpus verification run data-parallel when the
//! `parallel` feature (default) is enabled; disabling it yields an identical
//! sequential implementation.

pub mod closed_forms;
pub mod corpus;
pub mod families;
pub mod graph;
pub mod involution;
mod par;
pub mod spectral;
pub mod timeexpr;
pub mod transfer;

pub use graph::{MatrixKind, QParameter, WeightedGraph};
pub use spectral::SpectralDecomposition;
pub use transfer::{PureState, TransferReport, Verdict};

/// Dense real symmetric matrices; the only matrix representation used here.
pub type RealMatrix = nalgebra::DMatrix<f64>;
/// Dense complex matrices (transition matrices).
pub type ComplexMatrix = nalgebra::DMatrix<nalgebra::Complex<f64>>;
pub type RealVector = nalgebra::DVector<f64>;
pub type Complex64 = nalgebra::Complex<f64>;

/// Relative eigenvalue clustering tolerance (scaled by spectral diameter).
pub const CLUSTER_TOL: f64 = 1e-8;
/// Threshold on ||F_j x|| below which an eigenvalue is outside a state's support.
pub const SUPPORT_TOL: f64 = 1e-8;
/// PST is certified when fidelity >= 1 - PST_TOL.
pub const PST_TOL: f64 = 1e-9;
