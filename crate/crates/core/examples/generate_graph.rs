//! Sample a random in-regular digraph, invert it, and check how tree-like
//! the in-neighborhoods are.
//!
//! cargo run --release --example generate_graph -- 100000 2

use threshold_contact::graph::{invert, is_tree_neighborhood};
use threshold_contact::{GraphConfig, InGraph, Vertex};

fn main() -> threshold_contact::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(100_000, |s| s.parse().expect("n"));
    let r: usize = args.next().map_or(2, |s| s.parse().expect("r"));

    let g = InGraph::generate(GraphConfig::new(n, r, 1)?)?;
    let outs = invert(&g);
    let max_out = (0..n as Vertex).map(|x| outs.out_adj(x).len()).max().unwrap_or(0);
    println!("n={n} r={r} edges={} max out-degree={max_out}", outs.edge_count());
    println!("inputs of vertex 0: {:?}", g.in_nbrs(0));

    for depth in 1..=6 {
        let sample = 2000.min(n);
        let trees = (0..sample as Vertex)
            .filter(|&x| is_tree_neighborhood(&g, x, depth))
            .count();
        println!("depth {depth}: {:.4} of {sample} roots see a tree", trees as f64 / sample as f64);
    }

    let mut small = Vec::new();
    InGraph::generate(GraphConfig::new(6, r.min(5), 1)?)?.write_text(&mut small)?;
    print!("text form of a 6-vertex graph:\n{}", String::from_utf8_lossy(&small));
    Ok(())
}
