#![allow(dead_code)]

use unifield::bundles::LagrangianProblem;
use unifield::sample::Sampler;
use unifield::symbolic::{parse, Chart, Expr};

pub const SCHERK: &str = "ln(cos(x1)) - ln(cos(x2))";

pub fn minimal_surface() -> LagrangianProblem {
    let c = Chart::new(2, 1).unwrap();
    let l = parse("sqrt(1 + v1_1^2 + v1_2^2)", &c).unwrap();
    let h = parse("-sqrt(1 - p1_1^2 - p1_2^2)", &c).unwrap();
    LagrangianProblem::new(c, l).unwrap().with_hamiltonian(h).unwrap()
}

/// A kinetic term plus small random couplings of every kind: base, field and
/// velocity dependence, mixed velocity products and a convex quartic.
/// Stays strongly convex in `v` on the default sampling boxes.
pub fn random_polynomial_lagrangian(chart: &Chart, seed: u64) -> Expr {
    let mut s = Sampler::new(seed);
    let (m, n) = (chart.m(), chart.n());
    let x = |al| Expr::var(chart.x(al));
    let y = |a| Expr::var(chart.y(a));
    let v = |a, al| Expr::var(chart.v(a, al));
    let mut speed2 = Expr::zero();
    let mut l = Expr::zero();
    for a in 0..n {
        for al in 0..m {
            speed2 = speed2 + Expr::pow(&v(a, al), 2);
            l = l + (v(a, al) * x(al) * y(a)).scale(s.uniform(-0.1, 0.1));
            l = l + (v(a, al) * y((a + 1) % n)).scale(s.uniform(-0.2, 0.2));
        }
        l = l + Expr::pow(&y(a), 2).scale(s.uniform(-0.5, 0.5)) + (y(a) * x(0)).scale(s.uniform(-1.0, 1.0));
    }
    let first = v(0, 0);
    let last = v(n - 1, m - 1);
    l = l + (first.clone() * last).scale(s.uniform(-0.1, 0.1));
    l = l + (Expr::pow(&first, 2) * x(m - 1)).scale(s.uniform(-0.05, 0.05));
    l + speed2.scale(0.5) + Expr::pow(&speed2, 2).scale(s.uniform(0.01, 0.05))
}

pub fn polynomial_problem(m: usize, n: usize, seed: u64) -> LagrangianProblem {
    let c = Chart::new(m, n).unwrap();
    let l = random_polynomial_lagrangian(&c, seed);
    LagrangianProblem::new(c, l).unwrap()
}
