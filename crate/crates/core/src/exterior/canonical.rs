//! The canonical forms of the jet, multimomentum and unified bundles in
//! natural coordinates.
//!
//! Functions suffixed `_expanded` build a form directly from its coordinate
//! expression; the others derive it (exterior derivative, vertical
//! endomorphism). Tests compare the two routes.

use crate::error::Result;
use crate::symbolic::{Chart, Coord, Expr};

use super::form::{Form, MultiVector};

fn var(c: Coord) -> Expr {
    Expr::var(c)
}

/// `sum_{A,alpha} p_A^alpha v^A_alpha`.
pub fn momentum_velocity_pairing(chart: &Chart) -> Expr {
    let mut acc = Expr::zero();
    for a in 0..chart.n() {
        for al in 0..chart.m() {
            acc = acc + var(chart.momentum(a, al)) * var(chart.v(a, al));
        }
    }
    acc
}

/// `sum_{A,alpha} coef(A, alpha) dy^A ^ d^{m-1}x_alpha`.
fn dy_wedge_volume_minus(chart: &Chart, coef: impl Fn(usize, usize) -> Expr) -> Result<Form> {
    let mut out = Form::zero(chart.m());
    for a in 0..chart.n() {
        for al in 0..chart.m() {
            let term = Form::d(chart.y(a)).wedge(&Form::volume_minus(chart, al), chart)?;
            out = out.add(&term.scale(&coef(a, al)));
        }
    }
    Ok(out)
}

/// `sum dp_A^alpha ^ dy^A ^ d^{m-1}x_alpha`.
fn dp_dy_volume_minus(chart: &Chart) -> Result<Form> {
    let mut out = Form::zero(chart.m() + 1);
    for a in 0..chart.n() {
        for al in 0..chart.m() {
            let term = Form::d(chart.momentum(a, al))
                .wedge(&Form::d(chart.y(a)), chart)?
                .wedge(&Form::volume_minus(chart, al), chart)?;
            out = out.add(&term);
        }
    }
    Ok(out)
}

/// Multimomentum Liouville m-form `p_A^alpha dy^A ^ d^{m-1}x_alpha + p d^m x`.
pub fn liouville_theta(chart: &Chart) -> Result<Form> {
    let vol = Form::volume(chart).scale(&var(chart.p()));
    Ok(dy_wedge_volume_minus(chart, |a, al| var(chart.momentum(a, al)))?.add(&vol))
}

/// `-dp_A^alpha ^ dy^A ^ d^{m-1}x_alpha - dp ^ d^m x`.
pub fn liouville_omega_expanded(chart: &Chart) -> Result<Form> {
    let dp_vol = Form::d(chart.p()).wedge(&Form::volume(chart), chart)?;
    Ok(dp_dy_volume_minus(chart)?.neg().sub(&dp_vol))
}

/// `Theta_0 = (L - p_A^alpha v^A_alpha) d^m x + p_A^alpha dy^A ^ d^{m-1}x_alpha` on `W0`.
pub fn unified_theta(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    let vol = Form::volume(chart).scale(&(lagrangian - momentum_velocity_pairing(chart)));
    Ok(vol.add(&dy_wedge_volume_minus(chart, |a, al| var(chart.momentum(a, al)))?))
}

/// `Omega_0 = -d Theta_0`.
pub fn unified_omega(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    Ok(unified_theta(chart, lagrangian)?.ext_d().neg())
}

/// `d(p_A^alpha v^A_alpha - L) ^ d^m x - dp_A^alpha ^ dy^A ^ d^{m-1}x_alpha`.
pub fn unified_omega_expanded(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    let h_hat = momentum_velocity_pairing(chart) - lagrangian;
    let first = Form::differential(&h_hat, chart).wedge(&Form::volume(chart), chart)?;
    Ok(first.sub(&dp_dy_volume_minus(chart)?))
}

/// The vertical endomorphism `V = (dy^A - v^A_alpha dx^alpha) (x) d/dv^A_nu (x) d/dx^nu`.
#[derive(Debug, Clone)]
pub struct VerticalEndomorphism {
    /// `(contact form theta^A, velocity direction v^A_nu, base direction x^nu)`
    pub components: Vec<(Form, Coord, Coord)>,
}

/// Contact 1-form `dy^A - v^A_alpha dx^alpha`.
pub fn contact_form(chart: &Chart, a: usize) -> Form {
    let mut theta = Form::d(chart.y(a));
    for al in 0..chart.m() {
        theta = theta.sub(&Form::d(chart.x(al)).scale(&var(chart.v(a, al))));
    }
    theta
}

impl VerticalEndomorphism {
    pub fn new(chart: &Chart) -> VerticalEndomorphism {
        let mut components = Vec::new();
        for a in 0..chart.n() {
            for nu in 0..chart.m() {
                components.push((contact_form(chart, a), chart.v(a, nu), chart.x(nu)));
            }
        }
        VerticalEndomorphism { components }
    }

    /// `i(V)(L d^m x) = sum (dL/dv^A_nu) theta^A ^ i(d/dx^nu) d^m x`.
    pub fn apply_to_density(&self, chart: &Chart, lagrangian: &Expr) -> Result<Form> {
        let mut out = Form::zero(chart.m());
        let vol = Form::volume(chart);
        for (theta, v_dir, x_dir) in &self.components {
            let inner = vol.contract(&super::VectorField::basis(*x_dir))?;
            let term = theta.wedge(&inner, chart)?.scale(&lagrangian.diff(*v_dir));
            out = out.add(&term);
        }
        Ok(out)
    }
}

/// Poincare-Cartan m-form `i(V) L + L` built from the vertical endomorphism.
pub fn poincare_cartan_theta(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    let density = Form::volume(chart).scale(lagrangian);
    Ok(VerticalEndomorphism::new(chart).apply_to_density(chart, lagrangian)?.add(&density))
}

/// `dL/dv^A_mu dy^A ^ d^{m-1}x_mu - (dL/dv^A_mu v^A_mu - L) d^m x`.
pub fn poincare_cartan_theta_expanded(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    let mut energy = -lagrangian.clone();
    for a in 0..chart.n() {
        for mu in 0..chart.m() {
            let v = chart.v(a, mu);
            energy = energy + lagrangian.diff(v) * var(v);
        }
    }
    let vol = Form::volume(chart).scale(&energy);
    Ok(dy_wedge_volume_minus(chart, |a, mu| lagrangian.diff(chart.v(a, mu)))?.sub(&vol))
}

/// `Omega_L = -d Theta_L`.
pub fn poincare_cartan_omega(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    Ok(poincare_cartan_theta(chart, lagrangian)?.ext_d().neg())
}

/// The four-term coordinate expression of `Omega_L`.
pub fn poincare_cartan_omega_expanded(chart: &Chart, lagrangian: &Expr) -> Result<Form> {
    let (m, n) = (chart.m(), chart.n());
    let vol = Form::volume(chart);
    let mut out = Form::zero(m + 1);
    for a in 0..n {
        for al in 0..m {
            let dl_dv = lagrangian.diff(chart.v(a, al));
            let vmx = Form::volume_minus(chart, al);
            for b in 0..n {
                for nu in 0..m {
                    let hess = dl_dv.diff(chart.v(b, nu));
                    let t = Form::d(chart.v(b, nu))
                        .wedge(&Form::d(chart.y(a)), chart)?
                        .wedge(&vmx, chart)?;
                    out = out.sub(&t.scale(&hess));
                    let t = Form::d(chart.v(b, nu)).wedge(&vol, chart)?;
                    out = out.add(&t.scale(&(&hess * var(chart.v(a, al)))));
                }
                let mixed = dl_dv.diff(chart.y(b));
                let t = Form::d(chart.y(b))
                    .wedge(&Form::d(chart.y(a)), chart)?
                    .wedge(&vmx, chart)?;
                out = out.sub(&t.scale(&mixed));
            }
        }
    }
    for b in 0..n {
        let mut coef = -lagrangian.diff(chart.y(b));
        for a in 0..n {
            for al in 0..m {
                let dl_dv = lagrangian.diff(chart.v(a, al));
                coef = coef + dl_dv.diff(chart.y(b)) * var(chart.v(a, al));
            }
        }
        for al in 0..m {
            coef = coef + lagrangian.diff(chart.v(b, al)).diff(chart.x(al));
        }
        let t = Form::d(chart.y(b)).wedge(&vol, chart)?;
        out = out.add(&t.scale(&coef));
    }
    Ok(out)
}

/// Hamilton-Cartan m-form `p_A^alpha dy^A ^ d^{m-1}x_alpha - H d^m x` on the
/// restricted multimomentum bundle.
pub fn hamilton_cartan_theta(chart: &Chart, hamiltonian: &Expr) -> Result<Form> {
    let vol = Form::volume(chart).scale(hamiltonian);
    Ok(dy_wedge_volume_minus(chart, |a, al| var(chart.momentum(a, al)))?.sub(&vol))
}

/// `-dp_A^alpha ^ dy^A ^ d^{m-1}x_alpha + dH ^ d^m x`.
pub fn hamilton_cartan_omega_expanded(chart: &Chart, hamiltonian: &Expr) -> Result<Form> {
    let dh = Form::differential(hamiltonian, chart).wedge(&Form::volume(chart), chart)?;
    Ok(dp_dy_volume_minus(chart)?.neg().add(&dh))
}

/// Components of the `(1, m)` tensor `J = i(V)(pi^* omega)`:
/// `(dy^A - v^A_alpha dx^alpha) ^ d^{m-1}x_nu (x) d/dv^A_nu`.
pub fn jet_tensor(chart: &Chart) -> Result<Vec<(Form, Coord)>> {
    let mut out = Vec::with_capacity(chart.n() * chart.m());
    for a in 0..chart.n() {
        for nu in 0..chart.m() {
            let comp = contact_form(chart, a).wedge(&Form::volume_minus(chart, nu), chart)?;
            out.push((comp, chart.v(a, nu)));
        }
    }
    Ok(out)
}

/// `J(X)`: one function per direction `d/dv^A_nu`, in `(A, nu)` order.
pub fn jet_tensor_apply(chart: &Chart, x: &MultiVector) -> Result<Vec<Expr>> {
    jet_tensor(chart)?
        .into_iter()
        .map(|(comp, _)| {
            let scalar = x.contract(&comp)?;
            Ok(scalar.coefficient(&[]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::VectorField;
    use crate::symbolic::{parse, Point};

    fn minimal_surface(chart: &Chart) -> Expr {
        parse("sqrt(1 + v1_1^2 + v1_2^2)", chart).unwrap()
    }

    fn sample_point(chart: &Chart, seed: u64) -> Vec<f64> {
        // deterministic spread of values in [-0.9, 0.9]
        (0..chart.dim())
            .map(|i| (((i as u64 + 1) * 2654435761 + seed * 40503) % 1000) as f64 / 555.0 - 0.9)
            .collect()
    }

    #[test]
    fn theta_0_term_built_by_wedge() {
        let c = Chart::new(2, 1).unwrap();
        let term = Form::d(c.y(0))
            .wedge(&Form::volume_minus(&c, 0), &c)
            .unwrap()
            .scale(&Expr::var(c.momentum(0, 0)));
        let theta0 = unified_theta(&c, &minimal_surface(&c)).unwrap();
        assert_eq!(theta0.coefficient(&[c.y(0), c.x(1)]), term.coefficient(&[c.y(0), c.x(1)]));
    }

    #[test]
    fn minimal_surface_theta_0_matches_worked_example() {
        // Theta_0 = (L - p1 v1 - p2 v2) dx1^dx2 - p2 dy^dx1 + p1 dy^dx2
        let c = Chart::new(2, 1).unwrap();
        let theta0 = unified_theta(&c, &minimal_surface(&c)).unwrap();
        let pt = sample_point(&c, 3);
        let num = theta0.eval(&pt).unwrap();
        let l = minimal_surface(&c).eval(&pt).unwrap();
        let (p1, p2) = (pt[c.momentum(0, 0).index()], pt[c.momentum(0, 1).index()]);
        let (v1, v2) = (pt[c.v(0, 0).index()], pt[c.v(0, 1).index()]);
        assert!((num.coefficient(&[c.x(0), c.x(1)]) - (l - p1 * v1 - p2 * v2)).abs() < 1e-15);
        assert_eq!(num.coefficient(&[c.y(0), c.x(0)]), -p2);
        assert_eq!(num.coefficient(&[c.y(0), c.x(1)]), p1);
    }

    #[test]
    fn y_contraction_of_omega_0_for_minimal_surface() {
        // i(d/dy) Omega_0 = -dp2 ^ dx1 + dp1 ^ dx2
        let c = Chart::new(2, 1).unwrap();
        let omega0 = unified_omega(&c, &minimal_surface(&c)).unwrap();
        let r = omega0.contract(&VectorField::basis(c.y(0))).unwrap();
        let expected = Form::d(c.momentum(0, 1))
            .wedge(&Form::d(c.x(0)), &c)
            .unwrap()
            .neg()
            .add(&Form::d(c.momentum(0, 0)).wedge(&Form::d(c.x(1)), &c).unwrap());
        let pt = sample_point(&c, 11);
        assert!(r.eval(&pt).unwrap().max_abs_diff(&expected.eval(&pt).unwrap()) < 1e-15);
    }

    #[test]
    fn derived_and_expanded_routes_agree() {
        for (m, n, src) in [
            (2, 1, "sqrt(1 + v1_1^2 + v1_2^2)"),
            (2, 2, "v1_1^2 * y2 + sin(x1) * v2_2 * v1_2 + y1^2 * v2_1 + x2 * y1 * v1_1^3"),
            (3, 1, "cos(v1_1) + v1_2 * v1_3 * y1 + x3^2 * v1_1"),
        ] {
            let c = Chart::new(m, n).unwrap();
            let l = parse(src, &c).unwrap();
            for seed in 0..5 {
                let pt = sample_point(&c, seed);
                let pairs = [
                    (unified_omega(&c, &l).unwrap(), unified_omega_expanded(&c, &l).unwrap()),
                    (liouville_theta(&c).unwrap().ext_d().neg(), liouville_omega_expanded(&c).unwrap()),
                    (poincare_cartan_theta(&c, &l).unwrap(), poincare_cartan_theta_expanded(&c, &l).unwrap()),
                    (poincare_cartan_omega(&c, &l).unwrap(), poincare_cartan_omega_expanded(&c, &l).unwrap()),
                ];
                for (i, (a, b)) in pairs.iter().enumerate() {
                    let d = a.eval(&pt).unwrap().max_abs_diff(&b.eval(&pt).unwrap());
                    assert!(d < 1e-12, "pair {i} for `{src}` differs by {d}");
                }
            }
        }
    }

    #[test]
    fn hamilton_cartan_omega_is_minus_d_theta() {
        let c = Chart::new(2, 1).unwrap();
        let h = parse("-sqrt(1 - p1_1^2 - p1_2^2)", &c).unwrap();
        let a = hamilton_cartan_theta(&c, &h).unwrap().ext_d().neg();
        let b = hamilton_cartan_omega_expanded(&c, &h).unwrap();
        let pt = Point::empty(&c)
            .with(c.momentum(0, 0), 0.3)
            .with(c.momentum(0, 1), -0.2)
            .with(c.x(0), 0.0)
            .with(c.x(1), 0.0)
            .with(c.y(0), 0.0);
        assert!(a.eval(&pt).unwrap().max_abs_diff(&b.eval(&pt).unwrap()) < 1e-15);
    }

    #[test]
    fn jet_tensor_measures_failure_of_semi_holonomy() {
        let c = Chart::new(2, 2).unwrap();
        let f = |a: usize, al: usize| 0.5 + a as f64 - 0.25 * al as f64;
        let legs = (0..2)
            .map(|al| {
                let mut leg = VectorField::basis(c.x(al));
                for a in 0..2 {
                    leg.add_component(c.y(a), Expr::constant(f(a, al)));
                    leg.add_component(c.v(a, 1 - al), Expr::constant(7.0));
                }
                leg
            })
            .collect();
        let x = MultiVector::new(Expr::one(), legs);
        let j = jet_tensor_apply(&c, &x).unwrap();
        let pt = sample_point(&c, 2);
        for a in 0..2 {
            for nu in 0..2 {
                let got = j[a * 2 + nu].eval(&pt).unwrap();
                assert!((got - (f(a, nu) - pt[c.v(a, nu).index()])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn momentum_contraction_of_omega_0_and_its_pullback() {
        let c = Chart::new(2, 2).unwrap();
        let l = parse("v1_1^2 * y2 + sin(x1) * v2_2 * v1_2 + y1^2 * v2_1", &c).unwrap();
        let omega = unified_omega(&c, &l).unwrap();
        let pt = sample_point(&c, 5);
        for a in 0..2 {
            for al in 0..2 {
                let r = omega.contract(&VectorField::basis(c.momentum(a, al))).unwrap();
                let want = Form::volume(&c)
                    .scale(&Expr::var(c.v(a, al)))
                    .sub(&Form::d(c.y(a)).wedge(&Form::volume_minus(&c, al), &c).unwrap());
                assert!(r.eval(&pt).unwrap().max_abs_diff(&want.eval(&pt).unwrap()) < 1e-12);

                // along a section the contraction becomes (v - dy/dx) d^m x
                let mut s = std::collections::BTreeMap::new();
                for b in 0..2 {
                    let yb = parse(&format!("x1^2 * x2 + {b} * sin(x2)"), &c).unwrap();
                    s.insert(c.y(b), yb);
                    for be in 0..2 {
                        s.insert(c.v(b, be), parse(&format!("cos(x{}) + {b}", be + 1), &c).unwrap());
                    }
                }
                let pulled = crate::exterior::pullback_section(&r, &s, &c).unwrap();
                let want = (&s[&c.v(a, al)] - s[&c.y(a)].diff(c.x(al))).eval(&pt).unwrap();
                let got = pulled.eval(&pt).unwrap();
                assert!((got.coefficient(&[c.x(0), c.x(1)]) - want).abs() < 1e-12);
                assert_eq!(got.terms().count(), usize::from(want != 0.0));
            }
        }
    }

    #[test]
    fn pullback_of_generic_vertical_contraction_gives_euler_lagrange_combination() {
        let c = Chart::new(2, 1).unwrap();
        let l = parse("sqrt(1 + v1_1^2 + v1_2^2) + y1^2 * x2", &c).unwrap();
        let omega = unified_omega(&c, &l).unwrap();
        let (f, g1, g2, h1, h2) = (0.7, -0.3, 1.1, 0.4, -2.0);
        let y0 = VectorField::zero()
            .with(c.y(0), Expr::constant(f))
            .with(c.v(0, 0), Expr::constant(g1))
            .with(c.v(0, 1), Expr::constant(g2))
            .with(c.momentum(0, 0), Expr::constant(h1))
            .with(c.momentum(0, 1), Expr::constant(h2));
        let mut s = std::collections::BTreeMap::new();
        s.insert(c.y(0), parse("x1 * x2 + sin(x1)", &c).unwrap());
        s.insert(c.v(0, 0), parse("x2^2", &c).unwrap());
        s.insert(c.v(0, 1), parse("cos(x1) * x2", &c).unwrap());
        s.insert(c.momentum(0, 0), parse("x1 - x2", &c).unwrap());
        s.insert(c.momentum(0, 1), parse("x1 * x2^2", &c).unwrap());
        let pulled =
            crate::exterior::pullback_section(&omega.contract(&y0).unwrap(), &s, &c).unwrap();
        let on_s = |e: &Expr| e.substitute(&|k: Coord| s.get(&k).cloned());
        let div_p = s[&c.momentum(0, 0)].diff(c.x(0)) + s[&c.momentum(0, 1)].diff(c.x(1));
        let expected = (div_p - on_s(&l.diff(c.y(0)))) * f
            + (&s[&c.momentum(0, 0)] - on_s(&l.diff(c.v(0, 0)))) * g1
            + (&s[&c.momentum(0, 1)] - on_s(&l.diff(c.v(0, 1)))) * g2
            + (&s[&c.v(0, 0)] - s[&c.y(0)].diff(c.x(0))) * h1
            + (&s[&c.v(0, 1)] - s[&c.y(0)].diff(c.x(1))) * h2;
        let pt = Point::empty(&c).with(c.x(0), 0.3).with(c.x(1), -0.8);
        let got = pulled.eval(&pt).unwrap().coefficient(&[c.x(0), c.x(1)]);
        assert!((got - expected.eval(&pt).unwrap()).abs() < 1e-12);
    }
}
