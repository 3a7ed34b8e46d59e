use crate::bundles::JetPoint;
use crate::error::{Error, Result};
use crate::exterior::{jet_tensor_apply, MultiVector, VectorField};
use crate::symbolic::{Chart, Expr};

use super::section::{base_point, SectionExprs};

/// Tolerance of [`FieldCoeffs::is_semi_holonomic`].
pub const SEMI_HOLONOMY_TOL: f64 = 1e-12;

/// Pointwise coefficients of a normalized decomposable m-vector field
/// `f /\_alpha (d/dx^alpha + F^A_alpha d/dy^A + G^A_{alpha nu} d/dv^A_nu
/// + H^nu_{alpha A} d/dp^nu_A)`.
///
/// `F` is indexed `(A, alpha)`; `G` and `H` are indexed `(A, alpha, nu)`
/// with `alpha` the leg, so `H[(A, alpha, nu)]` is the `d/dp_A^nu`
/// component of leg `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCoeffs {
    pub m: usize,
    pub n: usize,
    pub factor: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Option<Vec<f64>>,
}

/// The space a multivector field lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `J1E`: legs along `x`, `y`, `v`.
    Jet,
    /// `W0`: legs along `x`, `y`, `v` and the momenta.
    Unified,
    /// The restricted multimomentum bundle: legs along `x`, `y` and the momenta.
    Multimomentum,
}

impl FieldCoeffs {
    pub fn zeros(chart: &Chart) -> FieldCoeffs {
        let (m, n) = (chart.m(), chart.n());
        FieldCoeffs { m, n, factor: 1.0, f: vec![0.0; n * m], g: vec![0.0; n * m * m], h: None }
    }

    pub fn triple(&self, a: usize, alpha: usize, nu: usize) -> usize {
        (a * self.m + alpha) * self.m + nu
    }

    pub fn f_at(&self, a: usize, alpha: usize) -> f64 {
        self.f[a * self.m + alpha]
    }

    pub fn g_at(&self, a: usize, alpha: usize, nu: usize) -> f64 {
        self.g[self.triple(a, alpha, nu)]
    }

    /// Jet-side coefficients of the prolongation of `s` at `x`:
    /// `F = dy/dx`, `G = d2y/dxdx`, and `H = dp/dx` when `s` has momenta.
    pub fn from_section(chart: &Chart, s: &SectionExprs, x: &[f64]) -> Result<FieldCoeffs> {
        let pt = base_point(chart, x)?;
        let mut out = FieldCoeffs::zeros(chart);
        let (m, n) = (chart.m(), chart.n());
        for a in 0..n {
            for al in 0..m {
                let dy = s.y[a].diff(chart.x(al));
                out.f[a * m + al] = dy.eval(&pt)?;
                for nu in 0..m {
                    let i = out.triple(a, al, nu);
                    out.g[i] = dy.diff(chart.x(nu)).eval(&pt)?;
                }
            }
        }
        if let Some(mom) = &s.momenta {
            let mut h = vec![0.0; n * m * m];
            for a in 0..n {
                for al in 0..m {
                    for nu in 0..m {
                        h[out.triple(a, al, nu)] = mom[a * m + nu].diff(chart.x(al)).eval(&pt)?;
                    }
                }
            }
            out.h = Some(h);
        }
        Ok(out)
    }

    /// `F^A_alpha = v^A_alpha` entrywise within [`SEMI_HOLONOMY_TOL`].
    pub fn is_semi_holonomic(&self, jp: &JetPoint) -> bool {
        self.f.len() == jp.v.len()
            && self.f.iter().zip(&jp.v).all(|(f, v)| (f - v).abs() <= SEMI_HOLONOMY_TOL)
    }

    /// Largest component of `J(X)` at `jp`, computed through the exterior
    /// module; zero exactly when `X` is semi-holonomic.
    pub fn jet_tensor_defect(&self, chart: &Chart, jp: &JetPoint) -> Result<f64> {
        let x = self.build_multivector(chart, Domain::Jet)?;
        let comps = jet_tensor_apply(chart, &x)?;
        let mut worst: f64 = 0.0;
        for e in comps {
            worst = worst.max(e.eval(jp)?.abs());
        }
        Ok(worst)
    }

    /// The decomposable m-vector field with these coefficients.
    pub fn build_multivector(&self, chart: &Chart, domain: Domain) -> Result<MultiVector> {
        let (m, n) = (chart.m(), chart.n());
        if (self.m, self.n) != (m, n) {
            return Err(Error::Dimension(format!(
                "coefficients for (m, N) = ({}, {}) on a chart with ({m}, {n})",
                self.m, self.n
            )));
        }
        let needs_h = matches!(domain, Domain::Unified | Domain::Multimomentum);
        let h = match (&self.h, needs_h) {
            (Some(h), true) => Some(h),
            (None, true) => {
                return Err(Error::MissingSectionComponent("momentum-direction coefficients".into()))
            }
            _ => None,
        };
        let legs = (0..m)
            .map(|al| {
                let mut leg = VectorField::basis(chart.x(al));
                for a in 0..n {
                    leg.add_component(chart.y(a), Expr::constant(self.f_at(a, al)));
                    for nu in 0..m {
                        if domain != Domain::Multimomentum {
                            leg.add_component(chart.v(a, nu), Expr::constant(self.g_at(a, al, nu)));
                        }
                        if let Some(h) = h {
                            leg.add_component(chart.momentum(a, nu), Expr::constant(h[self.triple(a, al, nu)]));
                        }
                    }
                }
                leg
            })
            .collect();
        Ok(MultiVector::new(Expr::constant(self.factor), legs))
    }
}
