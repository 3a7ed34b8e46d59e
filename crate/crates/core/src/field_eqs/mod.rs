//! Field-equation residuals: Euler-Lagrange, the second-order coefficient
//! system, Hamilton-De Donder-Weyl, holonomy and the unified equation, plus
//! the push-forward of Lagrangian multivector coefficients to the
//! Hamiltonian side.

mod coeffs;
mod section;

pub use coeffs::{Domain, FieldCoeffs, SEMI_HOLONOMY_TOL};
pub use section::{base_point, SectionExprs};

use nalgebra::{DMatrix, DVector};

use crate::bundles::{JetPoint, LagrangianProblem};
use crate::error::{Error, Result};
use crate::exterior::{pullback_section, unified_omega, Form, MultiVector, VectorField};
use crate::symbolic::{Chart, CoordKind, Expr, Valuation};

/// Tolerance on the HDW relations checked by [`fl_relate`].
pub const FL_RELATE_TOL: f64 = 1e-8;

/// Euler-Lagrange residual `dL/dy^A - d/dx^alpha (dL/dv^A_alpha)` along the
/// prolongation of `s.y`, evaluated at the base point `x`.
///
/// Supplied velocities are ignored: the residual is always taken along
/// `j1 phi`.
pub fn el_residual(prob: &LagrangianProblem, s: &SectionExprs, x: &[f64]) -> Result<Vec<f64>> {
    let chart = prob.chart();
    let holo = SectionExprs::new(chart, s.y.clone())?;
    let pt = base_point(chart, x)?;
    (0..chart.n())
        .map(|a| {
            let mut r = holo.restrict(chart, prob.dl_dy(a)).eval(&pt)?;
            for al in 0..chart.m() {
                r -= holo.restrict(chart, prob.dl_dv(a, al)).diff(chart.x(al)).eval(&pt)?;
            }
            Ok(r)
        })
        .collect()
}

/// The Euler-Lagrange operator of one field split into its part without
/// second derivatives and the coefficients of `d2y^B/dx^alpha dx^nu`:
///
/// `R^A = lower^A(x, y, v) - sum_{B, alpha, nu} principal^A[(B, alpha, nu)] y^B_{alpha nu}`.
#[derive(Debug, Clone)]
pub struct ElOperator {
    pub lower: Expr,
    pub principal: Vec<Expr>,
}

pub fn el_operator(prob: &LagrangianProblem) -> Vec<ElOperator> {
    let c = prob.chart();
    let (m, n) = (c.m(), c.n());
    (0..n)
        .map(|a| {
            let mut lower = prob.dl_dy(a).clone();
            for al in 0..m {
                let p = prob.dl_dv(a, al);
                lower = lower - p.diff(c.x(al));
                for b in 0..n {
                    lower = lower - p.diff(c.y(b)) * Expr::var(c.v(b, al));
                }
            }
            let mut principal = vec![Expr::zero(); n * m * m];
            for b in 0..n {
                for al in 0..m {
                    for nu in 0..m {
                        let row = c.pair_index(a, al);
                        let col = c.pair_index(b, nu);
                        principal[(b * m + al) * m + nu] = prob.hessian_entry(row, col).clone();
                    }
                }
            }
            ElOperator { lower, principal }
        })
        .collect()
}

/// The linear system `sum_{A, alpha, nu} d2L/dv^A_alpha dv^B_nu G^A_{alpha nu} = rhs_B`
/// at one jet point; unknowns are ordered `(A, alpha, nu)`.
#[derive(Debug, Clone)]
pub struct GSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl GSystem {
    pub fn new(prob: &LagrangianProblem, jp: &JetPoint) -> Result<GSystem> {
        let c = prob.chart();
        let (m, n) = (c.m(), c.n());
        let hess = prob.hessian_at(jp)?;
        let mut matrix = DMatrix::zeros(n, n * m * m);
        let mut rhs = DVector::zeros(n);
        for b in 0..n {
            for a in 0..n {
                for al in 0..m {
                    for nu in 0..m {
                        matrix[(b, (a * m + al) * m + nu)] = hess[(c.pair_index(a, al), c.pair_index(b, nu))];
                    }
                }
            }
            let mut r = prob.dl_dy(b).eval(jp)?;
            for nu in 0..m {
                let p = prob.dl_dv(b, nu);
                r -= p.diff(c.x(nu)).eval(jp)?;
                for a in 0..n {
                    r -= p.diff(c.y(a)).eval(jp)? * jp.velocity(a, nu);
                }
            }
            rhs[b] = r;
        }
        Ok(GSystem { matrix, rhs })
    }

    /// `matrix * g - rhs`.
    pub fn residual(&self, g: &[f64]) -> Vec<f64> {
        let g = DVector::from_column_slice(g);
        (&self.matrix * g - &self.rhs).iter().copied().collect()
    }
}

/// The affine solution set of the coefficient system.
#[derive(Debug, Clone)]
pub struct GSolution {
    /// Least-norm solution, ordered `(A, alpha, nu)`.
    pub particular: Vec<f64>,
    /// Orthonormal basis of the kernel.
    pub nullspace: Vec<Vec<f64>>,
    pub rank: usize,
}

impl GSolution {
    /// `particular + sum_k weights[k] nullspace[k]`.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = self.particular.clone();
        for (w, basis) in weights.iter().zip(&self.nullspace) {
            for (o, b) in out.iter_mut().zip(basis) {
                *o += w * b;
            }
        }
        out
    }
}

pub fn solve_g_system(prob: &LagrangianProblem, jp: &JetPoint) -> Result<GSolution> {
    let sys = GSystem::new(prob, jp)?;
    affine_solution(&sys.matrix, &sys.rhs)
}

/// Solutions of the coefficient system with `G^A_{alpha nu} = G^A_{nu alpha}`.
///
/// For one field the Hessian pairing is symmetric and this is just a
/// subset of [`solve_g_system`]. With several fields only symmetric
/// coefficients make the two index pairings `G^A_{alpha nu}` and
/// `G^A_{nu alpha}` agree, which is what integrable solutions satisfy.
pub fn solve_symmetric_g_system(prob: &LagrangianProblem, jp: &JetPoint) -> Result<GSolution> {
    let c = prob.chart();
    let (m, n) = (c.m(), c.n());
    let sys = GSystem::new(prob, jp)?;
    // isometric embedding of the symmetric parameters into the full table
    let pairs: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|a| (0..m).flat_map(move |al| (al..m).map(move |nu| (a, al, nu)))).collect();
    let mut embed = DMatrix::zeros(n * m * m, pairs.len());
    for (col, &(a, al, nu)) in pairs.iter().enumerate() {
        if al == nu {
            embed[((a * m + al) * m + nu, col)] = 1.0;
        } else {
            let w = std::f64::consts::FRAC_1_SQRT_2;
            embed[((a * m + al) * m + nu, col)] = w;
            embed[((a * m + nu) * m + al, col)] = w;
        }
    }
    let reduced = affine_solution(&(&sys.matrix * &embed), &sys.rhs)?;
    let lift = |v: &[f64]| (&embed * DVector::from_column_slice(v)).iter().copied().collect::<Vec<f64>>();
    Ok(GSolution {
        particular: lift(&reduced.particular),
        nullspace: reduced.nullspace.iter().map(|b| lift(b)).collect(),
        rank: reduced.rank,
    })
}

/// Least-norm solution and orthonormal kernel of `matrix x = rhs`.
fn affine_solution(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<GSolution> {
    let cols = matrix.ncols();
    let svd = matrix.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-12 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|s| **s > eps).count();
    let pinv = svd.pseudo_inverse(eps).map_err(|e| Error::Dimension(e.to_string()))?;
    let x = pinv * rhs;
    let residual = (matrix * &x - rhs).amax();
    if residual > 1e-10 * (1.0 + rhs.amax()) {
        return Err(Error::InconsistentSystem { residual });
    }

    let gram = matrix.transpose() * matrix;
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|i, j| eig.eigenvalues[*i].total_cmp(&eig.eigenvalues[*j]));
    let nullspace = order
        .into_iter()
        .take(cols - rank)
        .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok(GSolution { particular: x.iter().copied().collect(), nullspace, rank })
}

/// Residual of the coefficient system at `j1 phi(x)` with `G` set to the
/// second derivatives of `s.y`.
pub fn g_system_residual_along(prob: &LagrangianProblem, s: &SectionExprs, x: &[f64]) -> Result<Vec<f64>> {
    let chart = prob.chart();
    let holo = SectionExprs::new(chart, s.y.clone())?;
    let coeffs = FieldCoeffs::from_section(chart, &holo, x)?;
    let jp = JetPoint::new(chart, x.to_vec(), section_y(chart, &holo, x)?, coeffs.f.clone())?;
    Ok(GSystem::new(prob, &jp)?.residual(&coeffs.g))
}

fn section_y(chart: &Chart, s: &SectionExprs, x: &[f64]) -> Result<Vec<f64>> {
    let pt = base_point(chart, x)?;
    s.y.iter().map(|e| Ok(e.eval(&pt)?)).collect()
}

/// HDW residuals at `x`: first `dH/dp_A^alpha - dy^A/dx^alpha` in
/// `(A, alpha)` order, then `-dH/dy^A - dp_A^alpha/dx^alpha` per field.
pub fn hdw_residual(prob: &LagrangianProblem, s: &SectionExprs, x: &[f64]) -> Result<Vec<f64>> {
    let chart = prob.chart();
    let (m, n) = (chart.m(), chart.n());
    let mom = s.momenta_or_err(chart)?;
    let pt = base_point(chart, x)?;
    let y = section_y(chart, s, x)?;
    let p: Vec<f64> = mom.iter().map(|e| e.eval(&pt)).collect::<Result<_, _>>()?;
    let (dh_dy, dh_dp) = prob.hamiltonian_partials(x, &y, &p)?;
    let mut out = Vec::with_capacity(n * m + n);
    for a in 0..n {
        for al in 0..m {
            out.push(dh_dp[a * m + al] - s.y[a].diff(chart.x(al)).eval(&pt)?);
        }
    }
    for a in 0..n {
        let mut div = 0.0;
        for al in 0..m {
            div += mom[a * m + al].diff(chart.x(al)).eval(&pt)?;
        }
        out.push(-dh_dy[a] - div);
    }
    Ok(out)
}

/// `v^A_alpha(x) - dy^A/dx^alpha(x)` for a section with explicit velocities.
pub fn holonomy_residual(chart: &Chart, s: &SectionExprs, x: &[f64]) -> Result<Vec<f64>> {
    let v = s
        .v
        .as_ref()
        .ok_or_else(|| Error::MissingSectionComponent(chart.name(chart.v(0, 0)).to_string()))?;
    let pt = base_point(chart, x)?;
    let dy = s.derived_velocities(chart);
    v.iter().zip(&dy).map(|(v, d)| Ok(v.eval(&pt)? - d.eval(&pt)?)).collect()
}

fn check_vertical(chart: &Chart, y0: &VectorField) -> Result<()> {
    for (c, _) in y0.components() {
        if matches!(chart.kind(c), CoordKind::Base(_) | CoordKind::Scalar) {
            return Err(Error::Dimension(format!(
                "the test field must be vertical over the base and W0, found a `{}` component",
                chart.name(c)
            )));
        }
    }
    Ok(())
}

/// The `d^m x` coefficient of `psi_0^* i(Y0) Omega_0` at `x`, through the
/// exterior algebra. `omega_0` is [`unified_omega`] of the problem.
pub fn unified_residual_with(
    prob: &LagrangianProblem,
    omega_0: &Form,
    s: &SectionExprs,
    y0: &VectorField,
    x: &[f64],
) -> Result<f64> {
    let chart = prob.chart();
    check_vertical(chart, y0)?;
    s.momenta_or_err(chart)?;
    let contracted = omega_0.contract(y0)?;
    let pulled = pullback_section(&contracted, &s.substitution(chart), chart)?;
    let vol: Vec<_> = chart.base_coords().collect();
    Ok(pulled.coefficient(&vol).eval(&base_point(chart, x)?)?)
}

pub fn unified_residual(prob: &LagrangianProblem, s: &SectionExprs, y0: &VectorField, x: &[f64]) -> Result<f64> {
    let omega = unified_omega(prob.chart(), prob.lagrangian())?;
    unified_residual_with(prob, &omega, s, y0, x)
}

/// The same quantity written out by hand:
/// `f^A (dp_A^alpha/dx^alpha - dL/dy^A) + g^A_alpha (p_A^alpha - dL/dv^A_alpha)
/// + h_A^alpha (v^A_alpha - dy^A/dx^alpha)`.
pub fn unified_residual_closed_form(
    prob: &LagrangianProblem,
    s: &SectionExprs,
    y0: &VectorField,
    x: &[f64],
) -> Result<f64> {
    let chart = prob.chart();
    check_vertical(chart, y0)?;
    let (m, n) = (chart.m(), chart.n());
    let mom = s.momenta_or_err(chart)?;
    let vel = s.velocities(chart);
    let pt = base_point(chart, x)?;
    let on = |e: &Expr| -> Result<f64> { Ok(s.restrict(chart, e).eval(&pt)?) };
    let mut total = 0.0;
    for a in 0..n {
        let mut div = 0.0;
        for al in 0..m {
            div += mom[a * m + al].diff(chart.x(al)).eval(&pt)?;
        }
        total += on(&y0.component(chart.y(a)))? * (div - on(prob.dl_dy(a))?);
        for al in 0..m {
            let k = a * m + al;
            let g = on(&y0.component(chart.v(a, al)))?;
            total += g * (mom[k].eval(&pt)? - on(prob.dl_dv(a, al))?);
            let h = on(&y0.component(chart.momentum(a, al)))?;
            total += h * (vel[k].eval(&pt)? - s.y[a].diff(chart.x(al)).eval(&pt)?);
        }
    }
    Ok(total)
}

/// Pushes a semi-holonomic Lagrangian multivector through the Legendre map:
/// the momentum-direction coefficients become
/// `H^nu_{alpha A} = d2L/dx^alpha dv^A_nu + d2L/dy^B dv^A_nu F^B_alpha
/// + d2L/dv^B_mu dv^A_nu G^B_{alpha mu}`.
///
/// The HDW relations `F^A_alpha = dH/dp_A^alpha` and
/// `sum_alpha H^alpha_{alpha A} = -dH/dy^A` are then checked at `FL(jp)`.
pub fn fl_relate(prob: &LagrangianProblem, lag: &FieldCoeffs, jp: &JetPoint) -> Result<FieldCoeffs> {
    let c = prob.chart();
    let (m, n) = (c.m(), c.n());
    let hess = prob.hessian_at(jp)?;
    let mut h = vec![0.0; n * m * m];
    for a in 0..n {
        for nu in 0..m {
            let p = prob.dl_dv(a, nu);
            let row = c.pair_index(a, nu);
            for al in 0..m {
                let mut val = p.diff(c.x(al)).eval(jp)?;
                for b in 0..n {
                    val += p.diff(c.y(b)).eval(jp)? * lag.f_at(b, al);
                    for mu in 0..m {
                        val += hess[(c.pair_index(b, mu), row)] * lag.g_at(b, al, mu);
                    }
                }
                h[lag.triple(a, al, nu)] = val;
            }
        }
    }
    let mut out = lag.clone();
    out.h = Some(h);

    let momenta = prob.legendre_restricted(jp)?;
    let (dh_dy, dh_dp) = prob.hamiltonian_partials(&jp.x, &jp.y, &momenta)?;
    let h = out.h.as_ref().unwrap();
    for a in 0..n {
        for al in 0..m {
            let dev = (lag.f_at(a, al) - dh_dp[a * m + al]).abs();
            if dev > FL_RELATE_TOL {
                return Err(Error::HdwRelationViolated {
                    relation: format!("F[{},{}] = dH/d{}", a + 1, al + 1, c.name(c.momentum(a, al))),
                    deviation: dev,
                });
            }
        }
        let trace: f64 = (0..m).map(|al| h[lag.triple(a, al, al)]).sum();
        let dev = (trace + dh_dy[a]).abs();
        if dev > FL_RELATE_TOL {
            return Err(Error::HdwRelationViolated {
                relation: format!("divergence of momenta = -dH/dy{}", a + 1),
                deviation: dev,
            });
        }
    }
    Ok(out)
}

/// Largest coefficient of `i(X) form` at `env`.
pub fn contraction_defect<V: Valuation + ?Sized>(x: &MultiVector, form: &Form, env: &V) -> Result<f64> {
    Ok(x.contract(form)?.eval(env)?.max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse;
    use approx::assert_abs_diff_eq;

    fn minimal_surface() -> LagrangianProblem {
        let c = Chart::new(2, 1).unwrap();
        let l = parse("sqrt(1 + v1_1^2 + v1_2^2)", &c).unwrap();
        LagrangianProblem::new(c, l).unwrap()
    }

    fn section(prob: &LagrangianProblem, y: &str) -> SectionExprs {
        SectionExprs::new(prob.chart(), vec![parse(y, prob.chart()).unwrap()]).unwrap()
    }

    const SCHERK: &str = "ln(cos(x1)) - ln(cos(x2))";

    #[test]
    fn el_residual_examples() {
        let prob = minimal_surface();
        for x in [[0.0, 0.0], [0.3, -1.1], [2.0, 5.0]] {
            assert_abs_diff_eq!(el_residual(&prob, &section(&prob, "2 - 0.5 * x1 + 3 * x2"), &x).unwrap()[0], 0.0);
        }
        for x in [[0.1, 0.2], [-0.7, 0.4], [1.2, -1.3]] {
            let r = el_residual(&prob, &section(&prob, SCHERK), &x).unwrap()[0];
            assert!(r.abs() < 1e-12, "{r}");
        }
        let r = el_residual(&prob, &section(&prob, "x1^2"), &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(r[0], -2.0, epsilon = 1e-14);
    }

    #[test]
    fn el_operator_matches_direct_total_derivative() {
        let c = Chart::new(2, 2).unwrap();
        let l = parse("v1_1^2 * y2 + sin(x1) * v2_2 * v1_2 + y1^2 * v2_1 + x2 * y1 * v1_1^3 + v2_2^2", &c).unwrap();
        let prob = LagrangianProblem::new(c.clone(), l).unwrap();
        let s = SectionExprs::new(&c, vec![parse("x1 * x2^2", &c).unwrap(), parse("sin(x1) + x2", &c).unwrap()]).unwrap();
        let x = [0.4, -0.3];
        let direct = el_residual(&prob, &s, &x).unwrap();
        let k = FieldCoeffs::from_section(&c, &s, &x).unwrap();
        let jp = JetPoint::new(&c, x.to_vec(), section_y(&c, &s, &x).unwrap(), k.f.clone()).unwrap();
        for (a, op) in el_operator(&prob).iter().enumerate() {
            let mut r = op.lower.eval(&jp).unwrap();
            for (i, e) in op.principal.iter().enumerate() {
                r -= e.eval(&jp).unwrap() * k.g[i];
            }
            assert_abs_diff_eq!(r, direct[a], epsilon = 1e-12);
        }
    }

    #[test]
    fn g_system_of_minimal_surface_at_rest() {
        let prob = minimal_surface();
        let jp = JetPoint::at_velocity(prob.chart(), vec![0.0, 0.0]).unwrap();
        let sol = solve_g_system(&prob, &jp).unwrap();
        assert_eq!(sol.rank, 1);
        assert_eq!(sol.particular, vec![0.0; 4]);
        assert_eq!(sol.nullspace.len(), 3);
        let sys = GSystem::new(&prob, &jp).unwrap();
        assert_eq!(sys.matrix.row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.0, 1.0]);
        for b in &sol.nullspace {
            assert!(sys.residual(b)[0].abs() < 1e-14);
        }
    }

    #[test]
    fn g_system_of_minimal_surface_at_unit_slope() {
        let prob = minimal_surface();
        let jp = JetPoint::at_velocity(prob.chart(), vec![1.0, 0.0]).unwrap();
        let sys = GSystem::new(&prob, &jp).unwrap();
        let row: Vec<f64> = sys.matrix.row(0).iter().copied().collect();
        let s8 = 8f64.sqrt();
        assert_abs_diff_eq!(row[0], 1.0 / s8, epsilon = 1e-15);
        assert_abs_diff_eq!(row[3], 2.0 / s8, epsilon = 1e-15);
        assert_eq!((row[1], row[2]), (0.0, 0.0));
    }

    #[test]
    fn g_system_inconsistent_for_singular_lagrangian() {
        let c = Chart::new(2, 1).unwrap();
        let prob = LagrangianProblem::new(c.clone(), parse("v1_1 + y1^2", &c).unwrap()).unwrap();
        let jp = JetPoint::new(&c, vec![0.0, 0.0], vec![1.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(solve_g_system(&prob, &jp), Err(Error::InconsistentSystem { .. })));
    }

    #[test]
    fn hdw_residual_examples() {
        let prob = minimal_surface();
        let c = prob.chart().clone();
        let prob = prob.with_hamiltonian(parse("-sqrt(1 - p1_1^2 - p1_2^2)", &c).unwrap()).unwrap();
        let s = section(&prob, "0.3").with_momenta(&c, vec![Expr::zero(), Expr::zero()]).unwrap();
        for r in hdw_residual(&prob, &s, &[0.2, -0.4]).unwrap() {
            assert_eq!(r, 0.0);
        }
        let b = 1.7f64;
        let s = section(&prob, "1.7 * x1")
            .with_momenta(&c, vec![Expr::constant(b / (1.0 + b * b).sqrt()), Expr::zero()])
            .unwrap();
        for r in hdw_residual(&prob, &s, &[0.2, -0.4]).unwrap() {
            assert!(r.abs() < 1e-14, "{r}");
        }
        let scherk = SectionExprs::legendre_prolongation(&prob, vec![parse(SCHERK, &c).unwrap()]).unwrap();
        for r in hdw_residual(&prob, &scherk, &[0.1, 0.2]).unwrap() {
            assert!(r.abs() < 1e-10, "{r}");
        }
    }

    #[test]
    fn holonomy_residual_examples() {
        let prob = minimal_surface();
        let c = prob.chart();
        let s = section(&prob, "x1").with_velocities(c, vec![Expr::constant(2.0), Expr::zero()]).unwrap();
        assert_eq!(holonomy_residual(c, &s, &[0.5, 0.5]).unwrap(), vec![1.0, 0.0]);
        let s = section(&prob, "x1^2 * x2");
        let v = s.derived_velocities(c);
        let s = s.with_velocities(c, v).unwrap();
        assert_eq!(holonomy_residual(c, &s, &[0.5, -0.25]).unwrap(), vec![0.0, 0.0]);
        assert!(holonomy_residual(c, &section(&prob, "x1"), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn unified_residual_reproduces_the_three_families() {
        let prob = minimal_surface();
        let c = prob.chart().clone();
        let scherk = SectionExprs::legendre_prolongation(&prob, vec![parse(SCHERK, &c).unwrap()]).unwrap();
        let x = [0.1, 0.2];
        for dir in [c.v(0, 0), c.v(0, 1), c.momentum(0, 0), c.momentum(0, 1), c.y(0)] {
            let r = unified_residual(&prob, &scherk, &VectorField::basis(dir), &x).unwrap();
            assert!(r.abs() < 1e-12, "{} -> {r}", c.name(dir));
        }
        let parabola = SectionExprs::legendre_prolongation(&prob, vec![parse("x1^2", &c).unwrap()]).unwrap();
        let r = unified_residual(&prob, &parabola, &VectorField::basis(c.y(0)), &[0.0, 0.0]).unwrap();
        let el = el_residual(&prob, &parabola, &[0.0, 0.0]).unwrap()[0];
        assert_abs_diff_eq!(r, -el, epsilon = 1e-14);
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn fl_relate_at_rest_copies_g() {
        let prob = minimal_surface();
        let c = prob.chart().clone();
        let prob = prob.with_hamiltonian(parse("-sqrt(1 - p1_1^2 - p1_2^2)", &c).unwrap()).unwrap();
        let jp = JetPoint::at_velocity(&c, vec![0.0, 0.0]).unwrap();
        let mut lag = FieldCoeffs::zeros(&c);
        lag.g = vec![1.0, 0.0, 0.0, -1.0];
        let ham = fl_relate(&prob, &lag, &jp).unwrap();
        assert_eq!(ham.h.unwrap(), lag.g);

        lag.g = vec![1.0, 0.0, 0.0, 1.0];
        let err = fl_relate(&prob, &lag, &jp).unwrap_err();
        assert!(matches!(err, Error::HdwRelationViolated { .. }));
        lag.g = vec![0.0; 4];
        lag.f = vec![0.5, 0.0];
        assert!(matches!(fl_relate(&prob, &lag, &jp), Err(Error::HdwRelationViolated { .. })));
    }

    #[test]
    fn fl_relate_pushes_scherk_jet_to_momentum_derivatives() {
        let prob = minimal_surface();
        let c = prob.chart().clone();
        let prob = prob.with_hamiltonian(parse("-sqrt(1 - p1_1^2 - p1_2^2)", &c).unwrap()).unwrap();
        let y = parse(SCHERK, &c).unwrap();
        let x = [0.1, 0.2];
        let s = SectionExprs::new(&c, vec![y.clone()]).unwrap();
        let lag = FieldCoeffs::from_section(&c, &s, &x).unwrap();
        let jp = JetPoint::new(&c, x.to_vec(), section_y(&c, &s, &x).unwrap(), lag.f.clone()).unwrap();
        let ham = fl_relate(&prob, &lag, &jp).unwrap();
        // closed-form momenta along the Scherk graph
        let t1 = parse("sin(x1) / cos(x1)", &c).unwrap();
        let t2 = parse("sin(x2) / cos(x2)", &c).unwrap();
        let l = Expr::sqrt(&(Expr::pow(&t1, 2) + Expr::pow(&t2, 2) + 1.0));
        let p1 = -(t1 / &l);
        let p2 = t2 / &l;
        let pt = base_point(&c, &x).unwrap();
        let h = ham.h.unwrap();
        for (nu, p) in [p1, p2].iter().enumerate() {
            for al in 0..2 {
                let want = p.diff(c.x(al)).eval(&pt).unwrap();
                assert_abs_diff_eq!(h[lag.triple(0, al, nu)], want, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn semi_holonomy_and_jet_tensor_agree() {
        let prob = minimal_surface();
        let c = prob.chart().clone();
        let jp = JetPoint::new(&c, vec![0.3, 0.1], vec![0.2], vec![0.4, -1.2]).unwrap();
        let sol = solve_g_system(&prob, &jp).unwrap();
        let mut k = FieldCoeffs::zeros(&c);
        k.f = jp.v.clone();
        k.g = sol.combine(&[0.3, -2.0, 1.0]);
        assert!(k.is_semi_holonomic(&jp));
        assert_eq!(k.jet_tensor_defect(&c, &jp).unwrap(), 0.0);
        k.f[0] += 1.0;
        assert!(!k.is_semi_holonomic(&jp));
        assert_abs_diff_eq!(k.jet_tensor_defect(&c, &jp).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn normalized_multivector_contracts_volume_to_one() {
        let c = Chart::new(2, 1).unwrap();
        let mut k = FieldCoeffs::zeros(&c);
        k.f = vec![0.3, -0.2];
        k.g = vec![1.0, 2.0, 3.0, 4.0];
        k.h = Some(vec![-1.0, 0.5, 0.25, 2.0]);
        for d in [Domain::Jet, Domain::Unified, Domain::Multimomentum] {
            let x = k.build_multivector(&c, d).unwrap();
            assert!(x.is_normalized_transverse(&c, &vec![0.0; c.dim()], 0.0).unwrap());
            let one = x.contract(&Form::volume(&c)).unwrap();
            assert_eq!(one.coefficient(&[]).as_const(), Some(1.0));
        }
        let c1 = Chart::new(1, 1).unwrap();
        let x = FieldCoeffs::zeros(&c1).build_multivector(&c1, Domain::Jet).unwrap();
        assert_eq!(x.order(), 1);
    }
}
