//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every criterion is computed in full and printed before the exit status is
//! decided, so a single failure does not hide the others. Runs without the
//! libtest harness so the verdict lines are never captured. Oracles are written out by
//! hand here (closed forms, hand-derived partials, coefficient tables) rather
//! than taken from the library under test.

use std::process::Command;
use std::time::Instant;

use unifield::bundles::{JetPoint, LagrangianProblem, UnifiedPoint};
use unifield::checks::{hdw_relation_defect, random_section_and_field};
use unifield::exterior::{
    liouville_omega_expanded, liouville_theta, unified_omega, unified_omega_expanded, unified_theta, Form, NumForm,
    VectorField,
};
use unifield::field_eqs::{
    fl_relate, unified_residual_closed_form, unified_residual_with, FieldCoeffs, GSystem,
};
use unifield::sample::Sampler;
use unifield::solver::{solve_dirichlet, Grid, SolveOptions};
use unifield::symbolic::{parse, Chart, Coord, Expr};

struct Verdict {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
}

fn minimal_surface() -> LagrangianProblem {
    let c = Chart::new(2, 1).unwrap();
    let l = parse("sqrt(1 + v1_1^2 + v1_2^2)", &c).unwrap();
    let h = parse("-sqrt(1 - p1_1^2 - p1_2^2)", &c).unwrap();
    LagrangianProblem::new(c, l).unwrap().with_hamiltonian(h).unwrap()
}

fn speed(v: &[f64]) -> f64 {
    (1.0 + v[0] * v[0] + v[1] * v[1]).sqrt()
}

/// Largest deviation of `got` from a table of `(key in chart order, value)`,
/// counting keys missing from the table as expected zeros.
fn table_diff(got: &NumForm, want: &[(Vec<Coord>, f64)]) -> f64 {
    let mut worst = 0.0f64;
    for (k, w) in want {
        worst = worst.max((got.coefficient(k) - w).abs());
    }
    for (k, v) in got.terms() {
        if !want.iter().any(|(wk, _)| wk.as_slice() == k) {
            worst = worst.max(v.abs());
        }
    }
    worst
}

fn criterion_1() -> (f64, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let mut s = Sampler::new(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = s.in_ball(2, 2.0);
        let l = speed(&v);
        let up = prob.legendre_extended(&JetPoint::at_velocity(c, v.clone()).unwrap()).unwrap();
        worst = worst
            .max((up.momenta[0] - v[0] / l).abs())
            .max((up.momenta[1] - v[1] / l).abs())
            .max((up.p.unwrap() - (l - (v[0] * v[0] + v[1] * v[1]) / l)).abs());
    }
    (worst, worst <= 1e-12)
}

fn criterion_2() -> (f64, bool) {
    let prob = minimal_surface();
    let mut s = Sampler::new(102);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = s.in_ball(2, 0.7);
        let seed = JetPoint::at_velocity(prob.chart(), p.clone()).unwrap();
        let h = match prob.hamiltonian_function(&p, &seed) {
            Ok(h) => h,
            Err(_) => return (f64::INFINITY, false),
        };
        worst = worst.max((h + (1.0 - p[0] * p[0] - p[1] * p[1]).sqrt()).abs());
    }
    (worst, worst <= 1e-10)
}

fn criterion_3() -> (f64, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let (x1, x2, y1, p) = (c.x(0), c.x(1), c.y(0), c.p());
    let (v1, v2, p1, p2) = (c.v(0, 0), c.v(0, 1), c.momentum(0, 0), c.momentum(0, 1));
    let derived = unified_theta(c, prob.lagrangian()).unwrap().ext_d().neg();
    let expanded = unified_omega_expanded(c, prob.lagrangian()).unwrap();
    let liouville_derived = liouville_theta(c).unwrap().ext_d().neg();
    let liouville_expanded = liouville_omega_expanded(c).unwrap();
    let mut s = Sampler::new(103);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let up = s.full_point(c, 1.0);
        let (v, m) = (&up.jet.v, &up.momenta);
        let l = speed(v);
        let omega_0 = [
            (vec![x1, x2, v1], m[0] - v[0] / l),
            (vec![x1, x2, v2], m[1] - v[1] / l),
            (vec![x1, x2, p1], v[0]),
            (vec![x1, x2, p2], v[1]),
            (vec![x1, y1, p2], -1.0),
            (vec![x2, y1, p1], 1.0),
        ];
        let liouville = [(vec![x1, x2, p], -1.0), (vec![x1, y1, p2], -1.0), (vec![x2, y1, p1], 1.0)];
        let d = derived.eval(&up).unwrap();
        let e = expanded.eval(&up).unwrap();
        let ld = liouville_derived.eval(&up).unwrap();
        let le = liouville_expanded.eval(&up).unwrap();
        worst = worst
            .max(d.max_abs_diff(&e))
            .max(table_diff(&d, &omega_0))
            .max(ld.max_abs_diff(&le))
            .max(table_diff(&ld, &liouville));
    }
    (worst, worst <= 1e-12)
}

/// `L = |v|^2/2 + a v1_1 v1_2 y1 + b x1 v1_2 + k v1_1^3 + d y1^2 + e |v|^4`
/// with its velocity gradient written out by hand.
struct Polynomial {
    coef: [f64; 5],
}

impl Polynomial {
    fn text(&self) -> String {
        let [a, b, k, d, e] = self.coef;
        format!(
            "0.5 * (v1_1^2 + v1_2^2) + {a} * v1_1 * v1_2 * y1 + {b} * x1 * v1_2 + {k} * v1_1^3 + {d} * y1^2 + {e} * (v1_1^2 + v1_2^2)^2"
        )
    }

    fn dl_dv(&self, up: &UnifiedPoint) -> [f64; 2] {
        let [a, b, k, _, e] = self.coef;
        let (x1, y1, v) = (up.jet.x[0], up.jet.y[0], &up.jet.v);
        let sq = v[0] * v[0] + v[1] * v[1];
        [
            v[0] + a * v[1] * y1 + 3.0 * k * v[0] * v[0] + 4.0 * e * sq * v[0],
            v[1] + a * v[0] * y1 + b * x1 + 4.0 * e * sq * v[1],
        ]
    }
}

fn criterion_4() -> (f64, bool) {
    let mut s = Sampler::new(104);
    let poly = Polynomial { coef: [s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0), s.uniform(0.0, 0.5)] };
    let c = Chart::new(2, 1).unwrap();
    let problems: Vec<(LagrangianProblem, Box<dyn Fn(&UnifiedPoint) -> [f64; 2]>)> = vec![
        (minimal_surface(), Box::new(|up: &UnifiedPoint| {
            let l = speed(&up.jet.v);
            [up.jet.v[0] / l, up.jet.v[1] / l]
        })),
        (
            LagrangianProblem::new(c.clone(), parse(&poly.text(), &c).unwrap()).unwrap(),
            Box::new(move |up: &UnifiedPoint| poly.dl_dv(up)),
        ),
    ];
    let mut worst = 0.0f64;
    for (prob, gradient) in &problems {
        let c = prob.chart();
        let (x1, x2, y1) = (c.x(0), c.x(1), c.y(0));
        let omega = unified_omega(c, prob.lagrangian()).unwrap();
        let by_velocity: Vec<Form> =
            (0..2).map(|al| omega.contract(&VectorField::basis(c.v(0, al))).unwrap()).collect();
        let by_momentum: Vec<Form> =
            (0..2).map(|al| omega.contract(&VectorField::basis(c.momentum(0, al))).unwrap()).collect();
        for _ in 0..100 {
            let up = s.full_point(c, 1.0);
            let g = gradient(&up);
            for al in 0..2 {
                let want = [(vec![x1, x2], up.momenta[al] - g[al])];
                worst = worst.max(table_diff(&by_velocity[al].eval(&up).unwrap(), &want));
            }
            // v dx1^dx2 - dy^d^{m-1}x_alpha, with d^{m-1}x_1 = dx2 and d^{m-1}x_2 = -dx1
            let want = [(vec![x1, x2], up.jet.v[0]), (vec![x2, y1], 1.0)];
            worst = worst.max(table_diff(&by_momentum[0].eval(&up).unwrap(), &want));
            let want = [(vec![x1, x2], up.jet.v[1]), (vec![x1, y1], -1.0)];
            worst = worst.max(table_diff(&by_momentum[1].eval(&up).unwrap(), &want));
        }
    }
    (worst, worst <= 1e-12)
}

fn criterion_5() -> (f64, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let mut s = Sampler::new(105);
    let mut worst = 0.0f64;
    let mut separated = true;
    for _ in 0..200 {
        let jp = s.jet_point(c);
        let l = speed(&jp.v);
        // the graph point built by hand
        let up = UnifiedPoint {
            jet: jp.clone(),
            momenta: vec![jp.v[0] / l, jp.v[1] / l],
            p: Some(1.0 / l),
        };
        let res = prob.w0_residual(&up).unwrap().abs();
        let res = prob.w1_residual(&up).unwrap().iter().fold(res, |m, r| m.max(r.abs()));
        worst = worst.max(res).max(up.max_abs_diff(&prob.legendre_extended(&jp).unwrap()));

        let off = s.full_point(c, 1.0);
        let res = prob.w0_residual(&off).unwrap().abs();
        let res = prob.w1_residual(&off).unwrap().iter().fold(res, |m, r| m.max(r.abs()));
        let dist = off.max_abs_diff(&prob.legendre_extended(off.jet()).unwrap());
        separated &= res > 1e-12 && dist > 1e-12;
    }
    (worst, worst <= 1e-12 && separated)
}

/// Scherk jet data `(y, y_x, y_xx)` by hand.
fn scherk_jet(x: &[f64]) -> (f64, [f64; 2], [f64; 4]) {
    let (a, b) = (x[0], x[1]);
    let y = a.cos().ln() - b.cos().ln();
    let sec2 = |t: f64| 1.0 / (t.cos() * t.cos());
    (y, [-a.tan(), b.tan()], [-sec2(a), 0.0, 0.0, sec2(b)])
}

fn criterion_6() -> (f64, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let mut s = Sampler::new(106);
    let (mut worst, mut smallest_perturbed) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let x = s.in_cube(2, 0.5);
        let (y, dy, d2y) = scherk_jet(&x);
        let jp = JetPoint::new(c, x.clone(), vec![y], dy.to_vec()).unwrap();
        worst = worst.max(GSystem::new(&prob, &jp).unwrap().residual(&d2y)[0].abs());
        // y + x1^2 + x2^2
        let (x1, x2) = (x[0], x[1]);
        let bumped = JetPoint::new(c, x.clone(), vec![y + x1 * x1 + x2 * x2], vec![dy[0] + 2.0 * x1, dy[1] + 2.0 * x2]).unwrap();
        let g = [d2y[0] + 2.0, 0.0, 0.0, d2y[3] + 2.0];
        smallest_perturbed = smallest_perturbed.min(GSystem::new(&prob, &bumped).unwrap().residual(&g)[0].abs());
    }
    (worst, worst <= 1e-10 && smallest_perturbed >= 1e-2)
}

fn criterion_7() -> (f64, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let mut s = Sampler::new(107);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x = s.in_cube(2, 1.2);
        let (y, dy, d2y) = scherk_jet(&x);
        let jp = JetPoint::new(c, x.clone(), vec![y], dy.to_vec()).unwrap();
        let mut lag = FieldCoeffs::zeros(c);
        lag.f = dy.to_vec();
        lag.g = d2y.to_vec();
        let pushed = match fl_relate(&prob, &lag, &jp) {
            Ok(k) => k,
            Err(_) => return (f64::INFINITY, false),
        };
        // dH/dp = p / sqrt(1 - |p|^2) and dH/dy = 0, by hand
        let l = speed(&dy);
        let p = [dy[0] / l, dy[1] / l];
        let root = (1.0 - p[0] * p[0] - p[1] * p[1]).sqrt();
        let h = pushed.h.as_ref().unwrap();
        let trace = h[pushed.triple(0, 0, 0)] + h[pushed.triple(0, 1, 1)];
        worst = worst
            .max((pushed.f_at(0, 0) - p[0] / root).abs())
            .max((pushed.f_at(0, 1) - p[1] / root).abs())
            .max(trace.abs())
            .max(hdw_relation_defect(&prob, &pushed, &jp).unwrap());
    }
    (worst, worst <= 1e-9)
}

fn criterion_8() -> (String, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let boundary = parse("ln(cos(x1)) - ln(cos(x2))", c).unwrap();
    let start = Instant::now();
    let mut errors = Vec::new();
    for n in [17, 33, 65] {
        let grid = Grid::square(-0.5, 0.5, n).unwrap();
        let Ok((ds, _)) = solve_dirichlet(&prob, grid, &boundary, SolveOptions::default()) else {
            return ("solver failed".into(), false);
        };
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            let (i, j) = grid.ij(k);
            let (y, _, _) = scherk_jet(&grid.coord(i, j));
            worst = worst.max((ds.y_at(k, 0) - y).abs());
        }
        errors.push(worst);
    }
    let secs = start.elapsed().as_secs_f64();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = orders.iter().all(|q| (q - 2.0).abs() <= 0.2) && errors[1] <= 5e-4 && secs <= 10.0;
    (
        format!("errors {:.2e} {:.2e} {:.2e}, orders {:.3} {:.3}, {secs:.2}s", errors[0], errors[1], errors[2], orders[0], orders[1]),
        ok,
    )
}

fn criterion_9() -> (f64, bool) {
    let prob = minimal_surface();
    let c = prob.chart();
    let omega = unified_omega(c, prob.lagrangian()).unwrap();
    let mut s = Sampler::new(109);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (section, field) = random_section_and_field(c, &mut s).unwrap();
        let x = s.in_cube(2, 0.5);
        let a = unified_residual_with(&prob, &omega, &section, &field, &x).unwrap();
        let b = unified_residual_closed_form(&prob, &section, &field, &x).unwrap();
        worst = worst.max((a - b).abs());
    }
    (worst, worst <= 1e-10)
}

fn criterion_10() -> (String, bool) {
    let c = Chart::new(2, 1).unwrap();
    let prob = LagrangianProblem::new(c.clone(), Expr::var(c.v(0, 0))).unwrap();
    let det = prob.regularity(&JetPoint::at_velocity(&c, vec![0.3, -0.2]).unwrap()).unwrap().det;
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("affine.toml");
    std::fs::write(&cfg, "[problem]\nm = 2\nn = 1\nlagrangian = \"v1_1\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_unifield")).arg("check").arg(&cfg).output().unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    let refused = out.status.code() == Some(2) && stderr.contains("singular Lagrangian") && !stderr.contains("panicked");
    (format!("det {det:e}, exit {:?}, stderr `{}`", out.status.code(), stderr.trim()), det == 0.0 && refused)
}

fn numeric(id: usize, title: &'static str, tol: f64, (worst, passed): (f64, bool)) -> Verdict {
    Verdict { id, title, passed, detail: format!("worst {worst:.3e}, tol {tol:.0e}") }
}

fn main() -> std::process::ExitCode {
    let verdicts = vec![
        numeric(1, "minimal-surface Legendre maps", 1e-12, criterion_1()),
        numeric(2, "Hamiltonian by Legendre inversion", 1e-10, criterion_2()),
        numeric(3, "canonical 2-forms from their potentials", 1e-12, criterion_3()),
        numeric(4, "velocity and momentum contractions of Omega_0", 1e-12, criterion_4()),
        numeric(5, "W0 and W1 cut out the Legendre graph", 1e-12, criterion_5()),
        numeric(6, "second-order system along Scherk and a perturbation", 1e-10, criterion_6()),
        numeric(7, "Scherk pushed to a Hamiltonian solution", 1e-9, criterion_7()),
        {
            let (detail, passed) = criterion_8();
            Verdict { id: 8, title: "Scherk Dirichlet solve converges at order 2", passed, detail }
        },
        numeric(9, "unified residual: forms vs closed form", 1e-10, criterion_9()),
        {
            let (detail, passed) = criterion_10();
            Verdict { id: 10, title: "affine Lagrangian is refused", passed, detail }
        },
    ];
    for v in &verdicts {
        println!("{} criterion {:>2}: {} ({})", if v.passed { "PASS" } else { "FAIL" }, v.id, v.title, v.detail);
    }
    let failed: Vec<usize> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", verdicts.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
