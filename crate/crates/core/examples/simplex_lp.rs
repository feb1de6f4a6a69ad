//! Solves a small bounded-variable LP with the revised simplex solver.

use ddbounds::lp::{self, LpBuilder};

fn main() {
    // min -x0 - 2 x1  s.t.  x0 + x1 + s = 4,  0 <= x0 <= 3,  0 <= x1 <= 2,  s >= 0
    let mut b = LpBuilder::new(3);
    b.cost(0, -1.0).cost(1, -2.0);
    b.bounds(0, 0.0, 3.0).bounds(1, 0.0, 2.0).bounds(2, 0.0, f64::INFINITY);
    b.row([(0, 1.0), (1, 1.0), (2, 1.0)], 4.0);
    let p = b.build().expect("well-formed problem");
    let s = lp::solve(&p).expect("solver succeeds");
    println!("status {:?} after {} pivots", s.status, s.iterations);
    println!("x = {:?}, objective {:?}", s.x, s.objective);
    println!("{}", lp::write_dump(&p));
}
