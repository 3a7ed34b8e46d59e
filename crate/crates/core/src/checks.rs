//! Identity suites evaluated at seeded random points.
//!
//! Each check reports the worst deviation it saw against a fixed tolerance.
//! A numerical error inside a check fails that check and is kept as a note
//! instead of aborting the whole run.

use crate::bundles::{JetPoint, LagrangianProblem, UnifiedPoint};
use crate::error::Result;
use crate::exterior::{
    contract_multi, liouville_omega_expanded, liouville_theta, poincare_cartan_omega, unified_omega,
    unified_omega_expanded, unified_theta, Form, VectorField,
};
use crate::field_eqs::{
    fl_relate, solve_symmetric_g_system, unified_residual_closed_form, unified_residual_with, Domain, FieldCoeffs,
    SectionExprs, FL_RELATE_TOL,
};
use crate::sample::{SampleBoxes, Sampler};
use crate::symbolic::{Chart, Expr};

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub seed: u64,
    pub points: usize,
    pub boxes: SampleBoxes,
    /// Flips the sign of the expected Lemma-1 coefficient. Exists only to
    /// prove the harness can fail.
    pub inject_sign_error: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 42, points: 100, boxes: SampleBoxes::default(), inject_sign_error: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub points: usize,
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl CheckOutcome {
    pub fn summary(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {:<28} points={:<4} worst={:.3e} tol={:.0e}",
            self.name, self.points, self.worst, self.tol
        );
        if let Some(n) = &self.note {
            s.push_str(&format!(" ({n})"));
        }
        s
    }
}

/// Runs `points` trials of `trial`, each returning a deviation.
fn measure(
    name: &'static str,
    tol: f64,
    points: usize,
    sampler: &mut Sampler,
    mut trial: impl FnMut(&mut Sampler) -> Result<f64>,
) -> CheckOutcome {
    let mut worst = 0.0f64;
    for done in 0..points {
        match trial(sampler) {
            Ok(dev) if dev.is_nan() => {
                return CheckOutcome {
                    name,
                    points: done + 1,
                    worst: f64::INFINITY,
                    tol,
                    passed: false,
                    note: Some("NaN deviation".into()),
                }
            }
            Ok(dev) => worst = worst.max(dev),
            Err(e) => {
                return CheckOutcome {
                    name,
                    points: done + 1,
                    worst: f64::INFINITY,
                    tol,
                    passed: false,
                    note: Some(e.to_string()),
                }
            }
        }
    }
    CheckOutcome { name, points, worst, tol, passed: worst <= tol, note: None }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn full_point(prob: &LagrangianProblem, s: &mut Sampler) -> UnifiedPoint {
    let p_half = s.boxes.p;
    s.full_point(prob.chart(), p_half)
}

/// Largest violation of `F = dH/dp` and `trace H = -dH/dy` at `FL(jp)`.
pub fn hdw_relation_defect(prob: &LagrangianProblem, coeffs: &FieldCoeffs, jp: &JetPoint) -> Result<f64> {
    let (m, n) = (coeffs.m, coeffs.n);
    let momenta = prob.legendre_restricted(jp)?;
    let (dh_dy, dh_dp) = prob.hamiltonian_partials(&jp.x, &jp.y, &momenta)?;
    let h = coeffs.h.as_ref().ok_or_else(|| {
        crate::error::Error::MissingSectionComponent("momentum-direction coefficients".into())
    })?;
    let mut worst = 0.0f64;
    for a in 0..n {
        for al in 0..m {
            worst = worst.max((coeffs.f_at(a, al) - dh_dp[a * m + al]).abs());
        }
        let trace: f64 = (0..m).map(|al| h[coeffs.triple(a, al, al)]).sum();
        worst = worst.max((trace + dh_dy[a]).abs());
    }
    Ok(worst)
}

/// Semi-holonomic Lagrangian coefficients at `jp` solving the second-order
/// system with symmetric `G`, the kernel part drawn at random.
pub fn random_lagrangian_coeffs(prob: &LagrangianProblem, jp: &JetPoint, s: &mut Sampler) -> Result<FieldCoeffs> {
    let sol = solve_symmetric_g_system(prob, jp)?;
    let weights = s.in_cube(sol.nullspace.len(), 1.0);
    let mut k = FieldCoeffs::zeros(prob.chart());
    k.f = jp.v.clone();
    k.g = sol.combine(&weights);
    Ok(k)
}

/// A random section with independent `y`, `v` and momenta, and a random
/// constant vertical field.
pub fn random_section_and_field(chart: &Chart, s: &mut Sampler) -> Result<(SectionExprs, VectorField)> {
    let (m, n) = (chart.m(), chart.n());
    let x = |al: usize| Expr::var(chart.x(al));
    let mut c = |scale: f64| s.uniform(-scale, scale);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut e = Expr::constant(c(1.0));
        for al in 0..m {
            e = e + x(al).scale(c(1.0)) + Expr::pow(&x(al), 2).scale(c(0.5));
        }
        y.push(e);
    }
    let mut v = Vec::with_capacity(n * m);
    let mut momenta = Vec::with_capacity(n * m);
    for _ in 0..n {
        for al in 0..m {
            v.push(Expr::constant(c(1.0)) + x(al).scale(c(1.0)));
            momenta.push(Expr::constant(c(0.5)) + x(al).scale(c(0.3)) + Expr::sin(&x(0)).scale(c(0.2)));
        }
    }
    let section = SectionExprs::new(chart, y)?.with_velocities(chart, v)?.with_momenta(chart, momenta)?;
    let mut field = VectorField::zero();
    for a in 0..n {
        field.add_component(chart.y(a), Expr::constant(c(1.0)));
        for al in 0..m {
            field.add_component(chart.v(a, al), Expr::constant(c(1.0)));
            field.add_component(chart.momentum(a, al), Expr::constant(c(1.0)));
        }
    }
    Ok((section, field))
}

/// Runs every suite on `prob`. Refuses singular problems up front.
pub fn run_checks(prob: &LagrangianProblem, opts: &CheckOptions) -> Result<Vec<CheckOutcome>> {
    let chart = prob.chart();
    let (m, n) = (chart.m(), chart.n());
    let rest = JetPoint::at_velocity(chart, vec![0.0; n * m])?;
    prob.ensure_regular(&rest)?;

    let vol = Form::volume(chart);
    let vol_key: Vec<_> = chart.base_coords().collect();
    let omega_0 = unified_omega(chart, prob.lagrangian())?;
    let pts = opts.points;
    let mut suite_index = 0u64;
    let mut sampler = || {
        suite_index += 1;
        Sampler::with_boxes(opts.seed.wrapping_mul(1_000_003).wrapping_add(suite_index), opts.boxes)
    };
    let mut out = Vec::new();

    // the differential of the Liouville and unified forms
    let pairs = [
        (liouville_theta(chart)?.ext_d().neg(), liouville_omega_expanded(chart)?),
        (unified_theta(chart, prob.lagrangian())?.ext_d().neg(), unified_omega_expanded(chart, prob.lagrangian())?),
    ];
    for ((derived, expanded), name) in pairs.iter().zip(["liouville-omega", "unified-omega"]) {
        out.push(measure(name, 1e-12, 2 * pts, &mut sampler(), |s| {
            let up = full_point(prob, s);
            Ok(derived.eval(&up)?.max_abs_diff(&expanded.eval(&up)?))
        }));
    }

    let sign = if opts.inject_sign_error { -1.0 } else { 1.0 };
    let velocity_cases: Vec<(Form, Form)> = (0..n)
        .flat_map(|a| (0..m).map(move |al| (a, al)))
        .map(|(a, al)| {
            let got = omega_0.contract(&VectorField::basis(chart.v(a, al)))?;
            let coef = (Expr::var(chart.momentum(a, al)) - prob.dl_dv(a, al)).scale(sign);
            Ok((got, vol.scale(&coef)))
        })
        .collect::<Result<_>>()?;
    out.push(measure("lemma1-velocity-contraction", 1e-12, pts, &mut sampler(), |s| {
        let up = full_point(prob, s);
        let mut worst = 0.0f64;
        for (got, want) in &velocity_cases {
            let got = got.eval(&up)?;
            worst = worst.max(got.max_abs_diff(&want.eval(&up)?));
            // nothing outside d^m x
            for (key, c) in got.terms() {
                if key != vol_key.as_slice() {
                    worst = worst.max(c.abs());
                }
            }
        }
        Ok(worst)
    }));

    let momentum_cases: Vec<(Form, Form)> = (0..n)
        .flat_map(|a| (0..m).map(move |al| (a, al)))
        .map(|(a, al)| {
            let got = omega_0.contract(&VectorField::basis(chart.momentum(a, al)))?;
            let want = vol
                .scale(&Expr::var(chart.v(a, al)))
                .sub(&Form::d(chart.y(a)).wedge(&Form::volume_minus(chart, al), chart)?);
            Ok((got, want))
        })
        .collect::<Result<_>>()?;
    out.push(measure("momentum-contraction", 1e-12, pts, &mut sampler(), |s| {
        let up = full_point(prob, s);
        let mut worst = 0.0f64;
        for (got, want) in &momentum_cases {
            worst = worst.max(got.eval(&up)?.max_abs_diff(&want.eval(&up)?));
        }
        Ok(worst)
    }));

    out.push(measure("w0-section-round-trip", 1e-12, 2 * pts, &mut sampler(), |s| {
        let r = s.restricted_point(chart);
        let up = prob.hamiltonian_section_hat(&r)?;
        let mut worst = prob.w0_residual(&up)?.abs().max(up.restricted().max_abs_diff(&r));
        // any other p misses W0 by exactly the shift
        let shift = s.uniform(0.1, 1.0);
        let mut other = up.clone();
        other.p = Some(up.scalar_momentum()? + shift);
        worst = worst.max((prob.w0_residual(&other)?.abs() - shift).abs());
        Ok(worst)
    }));

    out.push(measure("w1-graph-of-legendre", 1e-12, 2 * pts, &mut sampler(), |s| {
        // on the graph: both residuals vanish
        let jp = s.jet_point(chart);
        let up = prob.legendre_extended(&jp)?;
        let on = prob.w0_residual(&up)?.abs().max(max_abs(&prob.w1_residual(&up)?));
        // off the graph: residuals and distance to the graph vanish together
        let off = full_point(prob, s);
        let res = prob.w0_residual(&off)?.abs().max(max_abs(&prob.w1_residual(&off)?));
        let dist = off.max_abs_diff(&prob.legendre_extended(off.jet())?);
        let consistent = (res <= 1e-12) == (dist <= 1e-12);
        Ok(if consistent { on } else { f64::INFINITY })
    }));

    let h_hat = prob.hamiltonian_hat_expr();
    let projectability: Vec<Expr> = (0..n)
        .flat_map(|a| (0..m).map(move |al| (a, al)))
        .map(|(a, al)| h_hat.diff(chart.v(a, al)) - (Expr::var(chart.momentum(a, al)) - prob.dl_dv(a, al)))
        .collect();
    out.push(measure("h-hat-projectability", 1e-12, pts, &mut sampler(), |s| {
        let up = s.restricted_point(chart);
        let mut worst = 0.0f64;
        for e in &projectability {
            worst = worst.max(e.eval(&up)?.abs());
        }
        Ok(worst)
    }));

    out.push(measure("legendre-round-trip", 1e-10, pts, &mut sampler(), |s| {
        let jp = s.jet_point(chart);
        let momenta = prob.legendre_restricted(&jp)?;
        let back = prob.legendre_invert(&momenta, &jp.with_velocities(momenta.clone()))?;
        Ok(back.v.iter().zip(&jp.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }));

    out.push(measure("hamiltonian-on-graph", 1e-10, pts, &mut sampler(), |s| {
        let jp = s.jet_point(chart);
        let up = prob.legendre_extended(&jp)?;
        let seed = jp.with_velocities(up.momenta.clone());
        let h = prob.hamiltonian_function(&up.momenta, &seed)?;
        Ok((h + up.scalar_momentum()?).abs())
    }));

    if let Some(h) = prob.hamiltonian() {
        out.push(measure("closed-form-hamiltonian", 1e-10, pts, &mut sampler(), |s| {
            let mut up = s.restricted_point(chart);
            let seed = up.jet.with_velocities(up.momenta.clone());
            let numeric = prob.hamiltonian_function(&up.momenta, &seed)?;
            up.jet.v = vec![0.0; n * m];
            Ok((h.eval(&up)? - numeric).abs())
        }));
    }

    let omega_l = poincare_cartan_omega(chart, prob.lagrangian())?;
    out.push(measure("lagrangian-field-equation", 1e-9, pts, &mut sampler(), |s| {
        let jp = s.jet_point(chart);
        let k = random_lagrangian_coeffs(prob, &jp, s)?;
        let x = k.build_multivector(chart, Domain::Jet)?;
        Ok(contract_multi(&x, &omega_l)?.eval(&jp)?.max_abs())
    }));

    out.push(measure("unified-field-equation", 1e-9, pts, &mut sampler(), |s| {
        let jp = s.jet_point(chart);
        let up = prob.legendre_extended(&jp)?;
        let k = fl_relate(prob, &random_lagrangian_coeffs(prob, &jp, s)?, &jp)?;
        let x = k.build_multivector(chart, Domain::Unified)?;
        Ok(contract_multi(&x, &omega_0)?.eval(&up)?.max_abs())
    }));

    out.push(measure("fl-relatedness", FL_RELATE_TOL, pts, &mut sampler(), |s| {
        let jp = s.jet_point(chart);
        let lag = random_lagrangian_coeffs(prob, &jp, s)?;
        match fl_relate(prob, &lag, &jp) {
            Ok(pushed) => hdw_relation_defect(prob, &pushed, &jp),
            Err(crate::error::Error::HdwRelationViolated { deviation, .. }) => Ok(deviation),
            Err(e) => Err(e),
        }
    }));

    out.push(measure("unified-residual-agreement", 1e-10, pts, &mut sampler(), |s| {
        let (section, field) = random_section_and_field(chart, s)?;
        let x = s.in_cube(m, s.boxes.x);
        let by_forms = unified_residual_with(prob, &omega_0, &section, &field, &x)?;
        let by_hand = unified_residual_closed_form(prob, &section, &field, &x)?;
        Ok((by_forms - by_hand).abs())
    }));

    Ok(out)
}
