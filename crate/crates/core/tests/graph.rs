use std::io::Cursor;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use threshold_contact::graph::{invert, is_tree_neighborhood};
use threshold_contact::seed::derive;
use threshold_contact::{Error, GraphConfig, InGraph, InNeighbors, LazyGraph, Vertex};

fn cfg(n: usize, r: usize, seed: u64) -> GraphConfig {
    GraphConfig::new(n, r, seed).unwrap()
}

#[test]
fn same_seed_same_graph() {
    let a = InGraph::generate(cfg(500, 3, 9)).unwrap();
    let b = InGraph::generate(cfg(500, 3, 9)).unwrap();
    let c = InGraph::generate(cfg(500, 3, 10)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn inputs_are_distinct_and_never_self() {
    for (n, r) in [(4, 3), (7, 3), (100, 2), (1000, 5)] {
        let g = InGraph::generate(cfg(n, r, 3)).unwrap();
        for x in 0..n as Vertex {
            let ys = g.in_nbrs(x);
            assert_eq!(ys.len(), r);
            assert!(!ys.contains(&x));
            let mut s = ys.to_vec();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), r, "repeated input at {x}");
        }
    }
}

#[test]
fn n_not_above_r_is_rejected() {
    assert!(matches!(GraphConfig::new(3, 3, 0), Err(Error::Precondition(_))));
    assert!(matches!(GraphConfig::new(5, 0, 0), Err(Error::Precondition(_))));
}

#[test]
fn inputs_are_uniform_chi_square() {
    // pool relative offsets (y - x) mod n over all slots; uniform on 1..n
    let n = 10_000;
    let g = InGraph::generate(cfg(n, 3, 77)).unwrap();
    let bins = 100;
    let mut counts = vec![0u64; bins];
    for x in 0..n as Vertex {
        for &y in g.in_nbrs(x) {
            let off = (y as usize + n - x as usize) % n - 1;
            counts[off * bins / (n - 1)] += 1;
        }
    }
    let total = (3 * n) as f64;
    let expected: Vec<f64> = (0..bins)
        .map(|b| {
            let lo = (b * (n - 1)).div_ceil(bins);
            let hi = ((b + 1) * (n - 1)).div_ceil(bins);
            total * (hi - lo) as f64 / (n - 1) as f64
        })
        .collect();
    let stat: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat:.1}, p = {p:.2e}");
}

#[test]
fn out_degrees_match_binomial_mean_and_variance() {
    let (n, r) = (20_000, 3);
    let g = InGraph::generate(cfg(n, r, 5)).unwrap();
    let outs = invert(&g);
    let degs: Vec<f64> = (0..n as Vertex).map(|x| outs.out_adj(x).len() as f64).collect();
    let mean = degs.iter().sum::<f64>() / n as f64;
    let var = degs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let p = r as f64 / (n - 1) as f64;
    let bin_var = (n - 1) as f64 * p * (1.0 - p);
    assert!((mean - r as f64).abs() <= 3.0 * (bin_var / n as f64).sqrt());
    assert!((var / bin_var - 1.0).abs() < 0.05, "variance {var} vs {bin_var}");
}

#[test]
fn inversion_preserves_edges_and_round_trips() {
    let g = InGraph::generate(cfg(300, 4, 2)).unwrap();
    let outs = invert(&g);
    assert_eq!(outs.edge_count(), 4 * 300);
    let lists = outs.to_in_lists();
    for x in 0..300 {
        assert_eq!(lists[x], g.in_nbrs(x as Vertex));
    }
    for x in 0..300 as Vertex {
        for &(target, slot) in outs.out_adj(x) {
            assert_eq!(g.in_nbrs(target)[slot as usize], x);
        }
    }
}

#[test]
fn lazy_graph_matches_materialized() {
    let c = cfg(5000, 3, 123);
    let g = InGraph::generate(c).unwrap();
    let lazy = LazyGraph::new(c).unwrap();
    for x in (0..5000).step_by(7) {
        lazy.with_in_nbrs(x, |ys| assert_eq!(ys, g.in_nbrs(x)));
    }
}

#[test]
fn text_format_round_trips() {
    let g = InGraph::generate(cfg(40, 2, 6)).unwrap();
    let mut buf = Vec::new();
    g.write_text(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next(), Some("40 2 6"));
    assert_eq!(text.lines().count(), 41);
    let back = InGraph::read_text(Cursor::new(buf)).unwrap();
    assert_eq!(back, g);
}

#[test]
fn malformed_text_is_rejected() {
    for bad in ["3 2 0\n1 2\n0 2\n", "3 2 0\n1 2\n0 0\n0 1\n", "3 2 0\n1 2\n0 2\n0 9\n", "x y z\n"] {
        assert!(InGraph::read_text(Cursor::new(bad)).is_err(), "{bad:?}");
    }
}

#[test]
fn large_sparse_graph_is_locally_tree_like() {
    let g = LazyGraph::new(cfg(100_000, 2, 31)).unwrap();
    let roots = 1000;
    let trees = (0..roots)
        .filter(|&k| is_tree_neighborhood(&g, (derive(4, "root", k) % 100_000) as Vertex, 4))
        .count();
    assert!(trees as f64 / roots as f64 >= 0.99, "{trees}/{roots}");
}

#[test]
fn depth_zero_is_always_a_tree() {
    let g = InGraph::generate(cfg(3, 2, 0)).unwrap();
    assert!((0..3).all(|x| is_tree_neighborhood(&g, x, 0)));
    assert!((0..3).all(|x| !is_tree_neighborhood(&g, x, 2)));
}
