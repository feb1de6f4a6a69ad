//! Recall and speed of the randomized kd-forest against exhaustive search.

use std::time::Instant;

use ddbounds::datagen::Stream;
use ddbounds::nn::{brute_force, KdForest};

fn main() {
    let (n, dim) = (100_000, 12);
    let mut rng = Stream::new(1);
    let points: Vec<f64> = (0..n * dim).map(|_| rng.uniform()).collect();
    let t = Instant::now();
    let forest = KdForest::build(dim, &points, 20, 7);
    println!("built 20 trees over {n} points in {:.2} s", t.elapsed().as_secs_f64());
    let queries: Vec<Vec<f64>> = (0..500).map(|_| (0..dim).map(|_| rng.uniform()).collect()).collect();
    let t = Instant::now();
    let exact: Vec<usize> = queries.iter().map(|q| brute_force(dim, &points, q)).collect();
    let brute_s = t.elapsed().as_secs_f64();
    for checks in [32, 128, 256, 1024] {
        let t = Instant::now();
        let hits = queries.iter().zip(&exact).filter(|(q, &e)| forest.nearest(&points, q, checks) == e).count();
        println!(
            "max_checks {checks:>5}: recall {:.3}, {:.1}x faster than brute force",
            hits as f64 / queries.len() as f64,
            brute_s / t.elapsed().as_secs_f64()
        );
    }
}
