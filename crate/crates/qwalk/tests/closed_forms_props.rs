// Closed-form eigenvector machinery for the chord-perturbed cycles, checked
// over the parameter ranges the constraint lemmas are stated for, plus
// randomized interlacing instances.

mod common;

use qwalk::closed_forms::{
    interlacing_check, p3_pst_parameters, pair_pst_candidates, perturbed_cycle_matrix,
    perturbed_eigvec, vertex_pst_candidates, Zeta,
};
use qwalk::spectral::eigendecompose_default;
use qwalk::transfer;
use qwalk::{families, PureState, QParameter, RealMatrix, Verdict, PST_TOL};
use rand::Rng;

const ZETAS: [Zeta; 2] = [Zeta::Minus, Zeta::Plus];

// The membership predicate accepts exactly the pairs annihilated by the
// surviving frequency-1 eigenvector, over the full range the pair lemma is
// stated for.
#[test]
fn pair_predicate_equals_frequency_one_kernel_on_lemma_range() {
    for n in 13..=20 {
        for b in 1..n {
            for zeta in ZETAS {
                let residue = pair_pst_candidates(n, b, zeta).unwrap();
                let z1 = perturbed_eigvec(n, b, 1, zeta).unwrap().vector;
                for k in 0..n {
                    for l in (k + 1)..n {
                        let zero = (z1[k] - z1[l]).abs() <= 1e-10;
                        let accepted = residue == Some((k + l) % n);
                        assert_eq!(
                            zero, accepted,
                            "n={n} b={b} k={k} l={l} zeta={zeta}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn vertex_candidates_and_eigvecs_hold_across_sizes() {
    for n in 7..=16 {
        for b in 1..n {
            for zeta in ZETAS {
                // Frequency-1 zero entries at any candidate pair.
                if let Some((k1, k2)) = vertex_pst_candidates(n, b, zeta).unwrap() {
                    let z1 = perturbed_eigvec(n, b, 1, zeta).unwrap().vector;
                    assert!(z1[k1].abs() <= 1e-10 && z1[k2].abs() <= 1e-10);
                }
                // Closed-form vectors are rho-independent eigenvectors.
                for j in 1..((n + 1) / 2) {
                    let pe = perturbed_eigvec(n, b, j, zeta).unwrap();
                    for rho in [1.0, 2.0, 5.0] {
                        let m = perturbed_cycle_matrix(n, b, rho, zeta).unwrap();
                        let res = (&m * &pe.vector - &pe.vector * pe.value).norm()
                            / pe.vector.norm();
                        assert!(
                            res <= 1e-9,
                            "n={n} b={b} j={j} rho={rho} zeta={zeta}: residual {res}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn interlacing_holds_on_randomized_rank_one_updates() {
    let mut rng = common::seeded_rng(97);
    for case in 0..50 {
        let n = rng.gen_range(3..=12);
        let b = common::random_symmetric(&mut rng, n, 3.0);
        let mut w = RealMatrix::zeros(n, 1);
        for i in 0..n {
            w[(i, 0)] = rng.gen_range(-1.0..1.0);
        }
        let rho = rng.gen_range(0.1..5.0);
        let c = &b + (&w * w.transpose()) * rho;
        let report = interlacing_check(&b, &c).unwrap();
        assert!(
            report.ok,
            "case {case} (n={n}, rho={rho}): violation {}",
            report.max_violation
        );
    }
}

// Every admissible (k, l) pair really does produce end-to-end transfer on
// the bare 3-path at the stated q and time.
#[test]
fn three_path_grid_parameters_all_verify() {
    let mut checked = 0;
    for k in 2..=8u64 {
        for l in 1..k {
            if (k + l) % 2 == 0 {
                continue;
            }
            let (q, tau) = p3_pst_parameters(k, l).unwrap();
            let g = families::path(3).unwrap().graph;
            let d = eigendecompose_default(&g.q_laplacian(QParameter::new(q).unwrap())).unwrap();
            let x = PureState::vertex(3, 0).unwrap();
            let y = PureState::vertex(3, 2).unwrap();
            let rep = transfer::detect_pst(&d, &x, &y, tau, PST_TOL).unwrap();
            assert_eq!(
                rep.verdict,
                Verdict::Pst,
                "k={k} l={l}: q={q} tau={tau} fidelity={}",
                rep.fidelity
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 16);
}
