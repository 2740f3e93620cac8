//! Enumerate the vertices of a transport polytope.
use bregman_ot::polytope::enumerate_vertices;
use bregman_ot::{Histogram, Result};

fn main() -> Result<()> {
    let x = Histogram::new(vec![0.1, 0.2, 0.7])?;
    let y = Histogram::new(vec![0.3, 0.4, 0.3])?;
    let vs = enumerate_vertices(&x, &y)?;
    println!("{} vertices of Π(x, y)", vs.len());
    for (v, tree) in vs.vertices.iter().zip(&vs.tree_supports).take(3) {
        println!("support {tree:?}");
        for row in v.entries().to_rows() {
            println!("  {row:?}");
        }
    }

    for n in 2..=6 {
        let u = Histogram::uniform(n)?;
        println!("uniform {n}x{n}: {} vertices", enumerate_vertices(&u, &u)?.len());
    }
    Ok(())
}
