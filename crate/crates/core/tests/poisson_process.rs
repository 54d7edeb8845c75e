//! Distributional checks of the window sampler.

use fri_core::graphs::ball;
use fri_core::process::{nu_t, sample_fri_window};
use fri_core::stats::{goodness_of_fit, poisson_pmf, two_sample_chi_square, RunningStats};
use fri_core::{
    build_cayley_graph, derive_stream, FriParams, GraphFamily, GraphOracle, Walk, WalkConfiguration, Window,
};
use rand::Rng;

const P_MIN: f64 = 1e-3;

fn tree(d: usize) -> GraphOracle {
    build_cayley_graph(&GraphFamily::RegularTree { degree: d }).unwrap()
}

fn walk(g: &GraphOracle, letters: &[usize]) -> Walk {
    let mut v = vec![g.origin()];
    for &i in letters {
        let next = g.neighbor(v.last().unwrap(), i);
        v.push(next);
    }
    Walk::new_in(g, v).unwrap()
}

/// Histogram with the last cell collecting `>= cells - 1`.
fn histogram(values: impl IntoIterator<Item = u64>, cells: usize) -> Vec<u64> {
    let mut h = vec![0u64; cells];
    for v in values {
        h[(v as usize).min(cells - 1)] += 1;
    }
    h
}

fn poisson_cells(mean: f64, cells: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..cells as u64 - 1).map(|k| poisson_pmf(k, mean)).collect();
    p.push(1.0 - p.iter().sum::<f64>());
    p
}

fn count_total(config: &WalkConfiguration, pred: impl Fn(&Walk) -> bool) -> u64 {
    config.iter().filter(|(w, _)| pred(w)).map(|(_, m)| m as u64).sum()
}

#[test]
fn single_walk_multiplicities_are_poisson() {
    let g = tree(3);
    let p = FriParams::new(0.5, 2.0).unwrap();
    let walks = [walk(&g, &[]), walk(&g, &[0]), walk(&g, &[0, 0])];
    for (i, w) in walks.iter().enumerate() {
        let l: Window = w.vertices().iter().cloned().collect();
        let mut rng = derive_stream(21, "tests/single_walk", i as u64);
        let counts: Vec<u64> = (0..20_000)
            .map(|_| sample_fri_window(&g, &p, &l, &Window::new(), &mut rng).unwrap().multiplicity(w) as u64)
            .collect();
        let mean = p.u * nu_t(&g, &p, w);
        let test = goodness_of_fit(&histogram(counts, 4), &poisson_cells(mean, 4), 0);
        assert!(test.p_value > P_MIN, "{w:?}: {test:?}");
    }
}

#[test]
fn larger_window_restricts_to_smaller_window_law() {
    // ω ↾ W_{x} drawn directly and taken from ω ↾ W_B for B ⊃ {x}
    let g = tree(4);
    let p = FriParams::new(0.4, 3.0).unwrap();
    let x = g.origin();
    let k = Window::singleton(x.clone());
    let b = ball(&g, &x, 2);
    let mut rng = derive_stream(22, "tests/restriction", 0);
    let n = 10_000;
    let direct: Vec<u64> =
        (0..n).map(|_| sample_fri_window(&g, &p, &k, &Window::new(), &mut rng).unwrap().total()).collect();
    let through: Vec<u64> = (0..n)
        .map(|_| {
            count_total(&sample_fri_window(&g, &p, &b, &Window::new(), &mut rng).unwrap(), |w| {
                w.vertices().contains(&x)
            })
        })
        .collect();
    let test = two_sample_chi_square(&histogram(direct, 8), &histogram(through, 8));
    assert!(test.p_value > P_MIN, "{test:?}");
    // the trivial walk at x appears only through x itself
    let trivial = Walk::trivial(x.clone());
    let m: Vec<u64> = (0..n)
        .map(|_| sample_fri_window(&g, &p, &b, &Window::new(), &mut rng).unwrap().multiplicity(&trivial) as u64)
        .collect();
    let mean = p.u * nu_t(&g, &p, &trivial);
    let test = goodness_of_fit(&histogram(m, 4), &poisson_cells(mean, 4), 0);
    assert!(test.p_value > P_MIN, "{test:?}");
}

#[test]
fn superposition_matches_summed_intensity() {
    let g = tree(3);
    let l = ball(&g, &g.origin(), 1);
    let (p1, p2, p12) =
        (FriParams::new(0.2, 2.0).unwrap(), FriParams::new(0.3, 2.0).unwrap(), FriParams::new(0.5, 2.0).unwrap());
    let mut rng = derive_stream(23, "tests/superposition", 0);
    let n = 10_000;
    let summed: Vec<u64> = (0..n)
        .map(|_| {
            let mut c = sample_fri_window(&g, &p1, &l, &Window::new(), &mut rng).unwrap();
            c.merge(&sample_fri_window(&g, &p2, &l, &Window::new(), &mut rng).unwrap());
            c.total()
        })
        .collect();
    let direct: Vec<u64> =
        (0..n).map(|_| sample_fri_window(&g, &p12, &l, &Window::new(), &mut rng).unwrap().total()).collect();
    let test = two_sample_chi_square(&histogram(summed, 10), &histogram(direct, 10));
    assert!(test.p_value > P_MIN, "{test:?}");
}

#[test]
fn thinning_gives_monotone_coupling_in_u() {
    // keeping each walk of ω_{u2} with probability u1/u2 yields ω_{u1} ⊆ ω_{u2}
    let g = tree(3);
    let l = ball(&g, &g.origin(), 1);
    let (u1, u2) = (0.15, 0.45);
    let (p1, p2) = (FriParams::new(u1, 3.0).unwrap(), FriParams::new(u2, 3.0).unwrap());
    let mut rng = derive_stream(24, "tests/thinning", 0);
    let n = 10_000;
    let mut thinned_counts = Vec::with_capacity(n);
    for _ in 0..n {
        let big = sample_fri_window(&g, &p2, &l, &Window::new(), &mut rng).unwrap();
        let mut small = WalkConfiguration::new();
        for (w, m) in big.iter() {
            let kept = (0..m).filter(|_| rng.random::<f64>() < u1 / u2).count() as u32;
            if kept > 0 {
                small.add(w.clone(), kept);
            }
        }
        for (w, m) in small.iter() {
            assert!(big.multiplicity(w) >= m);
        }
        thinned_counts.push(small.total());
    }
    let direct: Vec<u64> =
        (0..n).map(|_| sample_fri_window(&g, &p1, &l, &Window::new(), &mut rng).unwrap().total()).collect();
    let test = two_sample_chi_square(&histogram(thinned_counts, 6), &histogram(direct, 6));
    assert!(test.p_value > P_MIN, "{test:?}");
}

#[test]
fn disjoint_walk_sets_are_uncorrelated() {
    // counts of walks through a and through b but not a, where a, b are far apart
    let g = tree(3);
    let p = FriParams::new(0.5, 2.0).unwrap();
    let a = g.origin();
    let b = walk(&g, &[0, 1, 0, 1]).end().clone();
    let l: Window = [a.clone(), b.clone()].into_iter().collect();
    let mut rng = derive_stream(25, "tests/correlation", 0);
    let n = 40_000;
    let (mut sx, mut sy, mut sxy) = (RunningStats::default(), RunningStats::default(), RunningStats::default());
    for _ in 0..n {
        let c = sample_fri_window(&g, &p, &l, &Window::new(), &mut rng).unwrap();
        let x = count_total(&c, |w| w.vertices().contains(&a)) as f64;
        let y = count_total(&c, |w| !w.vertices().contains(&a)) as f64;
        sx.push(x);
        sy.push(y);
        sxy.push(x * y);
    }
    let cov = sxy.mean() - sx.mean() * sy.mean();
    let se = (sx.variance() * sy.variance() / n as f64).sqrt();
    assert!(cov.abs() < 4.0 * se, "cov {cov}, se {se}");
}
