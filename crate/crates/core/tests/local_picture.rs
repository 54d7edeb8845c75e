//! The grown cluster, the big-ball reference and the coupled `ω̃` share one law.

use fri_core::branching::couple_cluster_with_mbrw;
use fri_core::clusters::{grow_cluster_at_origin, reference_cluster_at_origin, GrowthLimits, SummaryBinning};
use fri_core::stats::two_sample_chi_square;
use fri_core::{build_cayley_graph, derive_stream, FriParams, GraphFamily};

#[test]
fn growth_reference_and_coupling_agree() {
    let g = build_cayley_graph(&GraphFamily::RegularTree { degree: 3 }).unwrap();
    let x = g.origin();
    let p = FriParams::new(0.3, 5.0).unwrap();
    let (radius, budget, runs) = (8, 40, 2_000u64);
    let limits = GrowthLimits::new(usize::MAX, budget).unwrap().confined(x.clone(), radius);
    let binning = SummaryBinning::default();

    let mut rng = derive_stream(41, "tests/local/grown", 0);
    let grown: Vec<_> =
        (0..runs).map(|_| grow_cluster_at_origin(&g, &p, &x, &limits, &mut rng).unwrap().summary()).collect();
    let mut rng = derive_stream(41, "tests/local/reference", 0);
    let reference: Vec<_> = (0..runs)
        .map(|_| reference_cluster_at_origin(&g, &p, &x, radius, budget, &mut rng).unwrap().summary())
        .collect();
    let mut rng = derive_stream(41, "tests/local/coupled", 0);
    let mut coupled = Vec::new();
    for _ in 0..runs {
        let c = couple_cluster_with_mbrw(&g, &p, &x, &limits, 1_000_000, &mut rng).unwrap();
        assert!(c.containment_holds);
        coupled.push(c.state.summary());
    }

    let h_grown = binning.histogram(&grown);
    let vs_reference = two_sample_chi_square(&h_grown, &binning.histogram(&reference));
    let vs_coupled = two_sample_chi_square(&h_grown, &binning.histogram(&coupled));
    assert!(vs_reference.p_value > 1e-3, "{vs_reference:?}");
    assert!(vs_coupled.p_value > 1e-3, "{vs_coupled:?}");
}
