// Block machinery under involutions, checked across the whole structural
// corpus: exact reassembly, orthogonal change of basis, block-diagonal
// evolution, sector eigenvector embedding, and the minus-walk projector
// identity. Corrupting the symmetry must be loud.

mod common;

use qwalk::corpus::structural_instances;
use qwalk::families::{self, FamilyInstance};
use qwalk::involution::{self, Involution};
use qwalk::spectral::eigendecompose_default;
use qwalk::transfer::{self, StateSpec};
use qwalk::{Complex64, QParameter, RealMatrix, RealVector, PST_TOL};
use rand::Rng;

const QS: [f64; 3] = [1.0, -1.0, 0.5];

fn qp(q: f64) -> QParameter {
    QParameter::new(q).unwrap()
}

fn with_involutions() -> Vec<(FamilyInstance, Involution)> {
    structural_instances()
        .unwrap()
        .into_iter()
        .filter_map(|fi| {
            let inv = fi.involution.clone()?;
            Some((fi, inv))
        })
        .collect()
}

// Entries of the full matrix in the (half, phi(half), fixed) order must be
// the extracted blocks laid out as [[L', A_phi, A_S], [A_phi, L', A_S],
// [A_S^T, A_S^T, L_S]]. Since corpus weights are dyadic this is exact: the
// mirrored positions hold bitwise-equal floats.
#[test]
fn block_layout_reassembles_the_walk_matrix() {
    let instances = with_involutions();
    assert!(instances.len() >= 15, "corpus lost its involutions");
    for (fi, inv) in &instances {
        let n = fi.graph.n();
        let h = inv.half().len();
        let order: Vec<usize> = inv
            .half()
            .iter()
            .copied()
            .chain(inv.half().iter().map(|&u| inv.phi(u)))
            .chain(inv.fixed().iter().copied())
            .collect();
        for q in QS {
            let l = fi.graph.q_laplacian(qp(q));
            let b = involution::half_blocks(&fi.graph, inv, qp(q));
            let mut rebuilt = RealMatrix::zeros(n, n);
            for i in 0..h {
                for j in 0..h {
                    rebuilt[(order[i], order[j])] = b.lp[(i, j)];
                    rebuilt[(order[i], order[h + j])] = b.aphi[(i, j)];
                    rebuilt[(order[h + i], order[j])] = b.aphi[(i, j)];
                    rebuilt[(order[h + i], order[h + j])] = b.lp[(i, j)];
                }
                for j in 0..inv.fixed().len() {
                    rebuilt[(order[i], order[2 * h + j])] = b.a_s[(i, j)];
                    rebuilt[(order[h + i], order[2 * h + j])] = b.a_s[(i, j)];
                    rebuilt[(order[2 * h + j], order[i])] = b.a_s[(i, j)];
                    rebuilt[(order[2 * h + j], order[h + i])] = b.a_s[(i, j)];
                }
            }
            for i in 0..inv.fixed().len() {
                for j in 0..inv.fixed().len() {
                    rebuilt[(order[2 * h + i], order[2 * h + j])] = b.ls[(i, j)];
                }
            }
            assert_eq!(rebuilt, l, "{} at q={q}", fi.name);
        }
    }
}

#[test]
fn change_of_basis_is_orthogonal() {
    for (fi, inv) in with_involutions() {
        let m = involution::basis_matrix(&inv);
        let dev = (m.transpose() * &m - RealMatrix::identity(inv.n(), inv.n()))
            .abs()
            .max();
        assert!(dev <= 1e-12, "{}: M^T M off by {dev}", fi.name);
    }
}

#[test]
fn evolution_splits_into_sector_blocks() {
    let mut rng = common::seeded_rng(7);
    let times: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..10.0)).collect();
    for (fi, inv) in with_involutions() {
        for q in QS {
            let res = involution::verify_block_diagonalization(&fi.graph, &inv, qp(q), &times)
                .unwrap();
            assert!(res <= 1e-10, "{} at q={q}: residual {res}", fi.name);
        }
    }
}

#[test]
fn sector_spectra_recompose_across_corpus() {
    for (fi, inv) in with_involutions() {
        for q in QS {
            let dev = involution::spectrum_factorization_residual(&fi.graph, &inv, qp(q)).unwrap();
            assert!(dev <= 1e-8, "{} at q={q}: pairing deviation {dev}", fi.name);
        }
    }
}

// Each eigenvector c of the minus sector embeds as (c, -c, 0)/sqrt(2) and
// stays an eigenvector of the full matrix for the same eigenvalue.
#[test]
fn minus_eigenvectors_embed_with_flipped_sign() {
    for (fi, inv) in with_involutions() {
        let n = fi.graph.n();
        for q in [1.0, 0.5] {
            let l = fi.graph.q_laplacian(qp(q));
            let minus = involution::half_blocks(&fi.graph, &inv, qp(q)).lminus;
            let eig = nalgebra::SymmetricEigen::new(minus);
            for (col, &mu) in eig.eigenvalues.iter().enumerate() {
                let c = eig.eigenvectors.column(col);
                let mut v = RealVector::zeros(n);
                for (i, &u) in inv.half().iter().enumerate() {
                    v[u] = c[i] * std::f64::consts::FRAC_1_SQRT_2;
                    v[inv.phi(u)] = -c[i] * std::f64::consts::FRAC_1_SQRT_2;
                }
                let res = (&l * &v - &v * mu).norm();
                assert!(res <= 1e-9, "{} at q={q}: embedded residual {res}", fi.name);
            }
        }
    }
}

// U(t)(e_u - e_phi(u)) = (I - P) sum_r e^{i t mu_r} F_r e_u, where F_r
// embeds the minus-sector projector F'_r as (1/2)[[F', -F'], [-F', F']]
// over the orbit coordinates and P permutes by the involution.
#[test]
fn minus_walk_factors_through_embedded_projectors() {
    let mut rng = common::seeded_rng(41);
    for (fi, inv) in with_involutions() {
        let n = fi.graph.n();
        for q in [1.0, 0.5] {
            let d_full = eigendecompose_default(&fi.graph.q_laplacian(qp(q))).unwrap();
            let minus = involution::half_blocks(&fi.graph, &inv, qp(q)).lminus;
            let d_minus = eigendecompose_default(&minus).unwrap();
            for _ in 0..3 {
                let t = rng.gen_range(0.0..8.0);
                let u_full = d_full.transition_matrix(t);
                for (i0, &u0) in inv.half().iter().enumerate() {
                    let mut x = RealVector::zeros(n);
                    x[u0] = 1.0;
                    x[inv.phi(u0)] = -1.0;
                    let lhs = &u_full * x.map(|r| Complex64::new(r, 0.0));

                    let mut embedded =
                        nalgebra::DVector::<Complex64>::from_element(n, Complex64::new(0.0, 0.0));
                    for (r, &mu) in d_minus.eigenvalues().iter().enumerate() {
                        let fr = d_minus.projector(r);
                        let phase = Complex64::from_polar(1.0, t * mu);
                        for (j, &hj) in inv.half().iter().enumerate() {
                            let val = phase * (0.5 * fr[(j, i0)]);
                            embedded[hj] += val;
                            embedded[inv.phi(hj)] -= val;
                        }
                    }
                    // (I - P) doubles the antisymmetric part.
                    let mut rhs = embedded.clone();
                    for v in 0..n {
                        rhs[v] = embedded[v] - embedded[inv.phi(v)];
                    }
                    let dev = (lhs - rhs).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
                    assert!(dev <= 1e-9, "{} at q={q}, t={t}, u={u0}: {dev}", fi.name);
                }
            }
        }
    }
}

#[test]
fn sector_reductions_lift_to_verified_pair_transfers() {
    // The marked 5-cycle sends pair(1,4) to pair(2,3) at pi/2 under the
    // Laplacian; the reduction must find it and every reported witness must
    // re-verify on the full graph.
    let fi = families::c5_with_potential().unwrap();
    let inv = fi.involution.as_ref().unwrap();
    let wits = involution::reduce_pair_pst(&fi.graph, inv, qp(1.0), 10.0, PST_TOL).unwrap();
    let d = eigendecompose_default(&fi.graph.laplacian()).unwrap();
    let mut found_claimed = false;
    for w in &wits {
        let fid = transfer::fidelity(&d, &w.x, &w.y, w.time).unwrap();
        assert!(fid >= 1.0 - PST_TOL, "witness at t={} re-verified to {fid}", w.time);
        if w.x.spec() == Some(StateSpec::Pair(1, 4))
            && w.y.spec() == Some(StateSpec::Pair(2, 3))
            && (w.time - std::f64::consts::FRAC_PI_2).abs() < 1e-6
        {
            found_claimed = true;
        }
    }
    assert!(found_claimed, "pi/2 witness missing from {:?}", wits.len());

    // Same round trip on the tailed cycle, which carries a fixed set.
    let fi = families::cycle_with_tail(6, 3).unwrap();
    let inv = fi.involution.as_ref().unwrap();
    for q in QS {
        let wits = involution::reduce_pair_pst(&fi.graph, inv, qp(q), 8.0, PST_TOL).unwrap();
        assert!(!wits.is_empty(), "no lifted witnesses at q={q}");
        let d = eigendecompose_default(&fi.graph.q_laplacian(qp(q))).unwrap();
        for w in &wits {
            let fid = transfer::fidelity(&d, &w.x, &w.y, w.time).unwrap();
            assert!(fid >= 1.0 - PST_TOL);
        }
    }
}

// Breaking the symmetry after the involution was certified must show up as
// a large residual, and re-verification must reject the permutation.
#[test]
fn corrupted_symmetry_is_loud() {
    let fi = families::wheel(5).unwrap();
    let inv = fi.involution.clone().unwrap();
    let mut g = fi.graph.clone();
    // Bump w(0,1); its mirror (2,3) stays at 1, so phi is no automorphism.
    g.add_edge_weight(0, 1, 0.35).unwrap();
    assert!(involution::verify_involution(&g, inv.perm()).is_err());

    let res = involution::verify_block_diagonalization(&g, &inv, qp(1.0), &[0.9, 2.7]).unwrap();
    assert!(res > 1e-3, "corrupted block residual only {res}");
    let dev = involution::spectrum_factorization_residual(&g, &inv, qp(1.0)).unwrap();
    assert!(dev > 1e-3, "corrupted factorization deviation only {dev}");
}
