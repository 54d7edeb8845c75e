//! Killed-walk escape probabilities against closed forms on regular trees.

use fri_core::process::{expected_walks_through, killed_escape_estimate};
use fri_core::{build_cayley_graph, derive_stream, FriParams, GraphFamily, KilledWalkLaw, Window};

/// Generating function of the first return time on the `d`-regular tree.
fn first_return_gf(d: f64, z: f64) -> f64 {
    (d - (d * d - 4.0 * (d - 1.0) * z * z).sqrt()) / (2.0 * (d - 1.0))
}

/// `P^(T)_x(tH_x = ∞) = 1 - F(T/(T+1))`: surviving `n` steps has probability `(T/(T+1))^n`.
fn killed_escape(d: usize, t: f64) -> f64 {
    1.0 - first_return_gf(d as f64, t / (t + 1.0))
}

#[test]
fn killed_escape_matches_generating_function() {
    for d in [3usize, 4] {
        let g = build_cayley_graph(&GraphFamily::RegularTree { degree: d }).unwrap();
        let x = g.origin();
        for t in [1.0, 5.0, 40.0] {
            let law = KilledWalkLaw::new(x.clone(), t).unwrap();
            let mut rng = derive_stream(31, "tests/escape_gf", (d * 100) as u64 + t as u64);
            let e = killed_escape_estimate(&g, &law, &Window::singleton(x.clone()), 40_000, &mut rng);
            let exact = killed_escape(d, t);
            assert!((e.mean - exact).abs() < 4.0 * e.stderr, "d={d} T={t}: {e:?} vs {exact}");
        }
    }
}

#[test]
fn expected_walks_through_vertex() {
    let g = build_cayley_graph(&GraphFamily::RegularTree { degree: 3 }).unwrap();
    let p = FriParams::new(0.7, 4.0).unwrap();
    let mut rng = derive_stream(32, "tests/walks_through", 0);
    let e = expected_walks_through(&g, &p, &g.origin(), 40_000, &mut rng).unwrap();
    let exact = 0.7 * 3.0 * killed_escape(3, 4.0);
    assert!((e.mean - exact).abs() < 4.0 * e.stderr, "{e:?} vs {exact}");
}
