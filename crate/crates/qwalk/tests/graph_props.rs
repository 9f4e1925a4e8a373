// Algebraic identities of the walk-matrix family on randomized graphs.

mod common;

use proptest::prelude::*;
use qwalk::{QParameter, RealMatrix, RealVector, WeightedGraph};

const WEIGHT_MENU: [f64; 3] = [1.0, 0.5, 2.0];

fn graph_from_codes(n: usize, codes: &[u8], weighted: bool) -> WeightedGraph {
    let mut g = WeightedGraph::new(n).unwrap();
    let mut idx = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            let c = codes[idx];
            idx += 1;
            if c > 0 {
                let w = if weighted {
                    WEIGHT_MENU[(c as usize - 1) % WEIGHT_MENU.len()]
                } else {
                    1.0
                };
                g.add_edge(u, v, w).unwrap();
            }
        }
    }
    g
}

/// Zero-potential graphs with dyadic weights, so order-of-summation effects
/// cannot blur exactness claims.
fn graphs(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(0..4u8, n * (n - 1) / 2)
            .prop_map(move |codes| graph_from_codes(n, &codes, true))
    })
}

fn nonzero_q() -> impl Strategy<Value = f64> {
    (-2.0..2.0f64).prop_filter("q must stay away from zero", |q| q.abs() > 1e-3)
}

fn min_eigenvalue(m: &RealMatrix) -> f64 {
    nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    // q L - (q-1) I + q(q-1)(D - I) is the same matrix as
    // (1-q^2) I + q^2 D - q A on potential-free graphs.
    #[test]
    fn factored_form_matches_defining_form(
        g in graphs(9),
        qs in proptest::collection::vec(nonzero_q(), 10),
    ) {
        let n = g.n();
        let id = RealMatrix::identity(n, n);
        let lap = g.laplacian();
        let deg = g.degree_matrix();
        for q in qs {
            let alt = &lap * q - &id * (q - 1.0) + (&deg - &id) * (q * (q - 1.0));
            let direct = g.q_laplacian(QParameter::new(q).unwrap());
            let dev = (&alt - &direct).abs().max();
            prop_assert!(dev <= 1e-12, "q = {q}, deviation {dev}");
        }
    }

    #[test]
    fn classical_endpoints_are_exact(g in graphs(9)) {
        let deg = g.degree_matrix();
        let adj = g.adjacency_matrix();
        prop_assert_eq!(g.laplacian(), &deg - &adj);
        prop_assert_eq!(g.signless_laplacian(), &deg + &adj);
        prop_assert_eq!(g.q_laplacian(QParameter::new(1.0).unwrap()), g.laplacian());
        prop_assert_eq!(g.q_laplacian(QParameter::new(-1.0).unwrap()), g.signless_laplacian());
    }

    // Grafting two fresh vertices with a shared neighborhood (and optionally
    // an edge between them, plus a common potential) always yields twins, and
    // their difference is an eigenvector at every q.
    #[test]
    fn twin_difference_is_an_eigenvector(
        g0 in graphs(7),
        nbr in proptest::collection::vec(any::<bool>(), 7),
        link in any::<bool>(),
        eta in 0..3u8,
        q in nonzero_q(),
    ) {
        let base = g0.n();
        let mut g = WeightedGraph::new(base + 2).unwrap();
        for (u, v, w) in g0.edges() {
            g.add_edge(u, v, w).unwrap();
        }
        let (u, v) = (base, base + 1);
        for z in 0..base {
            if nbr[z] {
                let w = WEIGHT_MENU[z % WEIGHT_MENU.len()];
                g.add_edge(u, z, w).unwrap();
                g.add_edge(v, z, w).unwrap();
            }
        }
        if link {
            g.add_edge(u, v, 1.0).unwrap();
        }
        g.set_potential(u, eta as f64).unwrap();
        g.set_potential(v, eta as f64).unwrap();
        prop_assert!(g.are_twins(u, v).unwrap());

        let l = g.q_laplacian(QParameter::new(q).unwrap());
        let mut x = RealVector::zeros(base + 2);
        x[u] = std::f64::consts::FRAC_1_SQRT_2;
        x[v] = -std::f64::consts::FRAC_1_SQRT_2;
        let lx = &l * &x;
        let lambda = lx.dot(&x);
        let residual = (&lx - &x * lambda).norm();
        prop_assert!(residual <= 1e-10, "residual {residual} at q = {q}");
    }

    #[test]
    fn laplacian_endpoints_are_psd(g in graphs(9)) {
        prop_assert!(min_eigenvalue(&g.laplacian()) >= -1e-10);
        prop_assert!(min_eigenvalue(&g.signless_laplacian()) >= -1e-10);
    }

    // Trees keep the whole family PSD throughout -1 <= q <= 1.
    #[test]
    fn tree_walk_matrices_are_psd_inside_unit_q(
        seed in any::<u64>(),
        n in 2..12usize,
        q in (-1.0..=1.0f64).prop_filter("q must stay away from zero", |q| q.abs() > 1e-3),
    ) {
        let mut rng = common::seeded_rng(seed);
        let tree = common::random_tree(&mut rng, n);
        let m = tree.q_laplacian(QParameter::new(q).unwrap());
        prop_assert!(min_eigenvalue(&m) >= -1e-10);
    }
}
