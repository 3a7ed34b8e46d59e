//! Legendre maps, the coupling function, the constraint submanifolds `W0`
//! and `W1`, Hamiltonian sections and the regularity test.

mod points;

pub use points::{JetPoint, UnifiedPoint};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symbolic::{Chart, CoordKind, Expr, Valuation};

/// `|det| <= SINGULAR_DET` classifies a Hessian as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Residual tolerance and iteration cap for [`LagrangianProblem::legendre_invert`].
pub const INVERT_TOL: f64 = 1e-12;
pub const INVERT_MAX_ITER: usize = 100;

/// Step for the central-difference partials of a Hamiltonian obtained by
/// Legendre inversion.
pub const HAMILTONIAN_FD_STEP: f64 = 1e-6;

/// A first-order Lagrangian density `L d^m x` on a trivial bundle, with its
/// first and second derivatives precomputed.
#[derive(Debug, Clone)]
pub struct LagrangianProblem {
    chart: Chart,
    lagrangian: Expr,
    hamiltonian: Option<Expr>,
    dl_dy: Vec<Expr>,
    dl_dv: Vec<Expr>,
    hessian: Vec<Vec<Expr>>,
}

impl LagrangianProblem {
    pub fn new(chart: Chart, lagrangian: Expr) -> Result<LagrangianProblem> {
        for c in lagrangian.coords() {
            if matches!(chart.kind(c), CoordKind::Momentum(..) | CoordKind::Scalar) {
                return Err(Error::LagrangianUsesMomenta(chart.name(c).to_string()));
            }
        }
        let dl_dy = chart.field_coords().map(|c| lagrangian.diff(c)).collect();
        let dl_dv: Vec<Expr> = chart.velocity_coords().map(|c| lagrangian.diff(c)).collect();
        let hessian = dl_dv
            .iter()
            .map(|row| chart.velocity_coords().map(|c| row.diff(c)).collect())
            .collect();
        Ok(LagrangianProblem { chart, lagrangian, hamiltonian: None, dl_dy, dl_dv, hessian })
    }

    /// Attaches a closed-form Hamiltonian in `(x, y, p_A^alpha)`.
    pub fn with_hamiltonian(mut self, h: Expr) -> Result<LagrangianProblem> {
        for c in h.coords() {
            if matches!(self.chart.kind(c), CoordKind::Velocity(..) | CoordKind::Scalar) {
                return Err(Error::HamiltonianUsesVelocity(self.chart.name(c).to_string()));
            }
        }
        self.hamiltonian = Some(h);
        Ok(self)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    pub fn hamiltonian(&self) -> Option<&Expr> {
        self.hamiltonian.as_ref()
    }

    /// `dL/dy^A`.
    pub fn dl_dy(&self, a: usize) -> &Expr {
        &self.dl_dy[a]
    }

    /// `dL/dv^A_alpha`.
    pub fn dl_dv(&self, a: usize, alpha: usize) -> &Expr {
        &self.dl_dv[self.chart.pair_index(a, alpha)]
    }

    /// `d2L/dv^A_alpha dv^B_nu`, indices flattened `(A, alpha)` A-major.
    pub fn hessian_entry(&self, row: usize, col: usize) -> &Expr {
        &self.hessian[row][col]
    }

    pub fn hessian_at<V: Valuation + ?Sized>(&self, env: &V) -> Result<DMatrix<f64>> {
        let k = self.dl_dv.len();
        let mut h = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                h[(i, j)] = self.hessian[i][j].eval(env)?;
            }
        }
        Ok(h)
    }

    /// Symbolic `H^ = p_A^alpha v^A_alpha - L` on `W_r`.
    pub fn hamiltonian_hat_expr(&self) -> Expr {
        crate::exterior::momentum_velocity_pairing(&self.chart) - &self.lagrangian
    }

    /// `p_A^alpha = dL/dv^A_alpha` at `jp`.
    pub fn legendre_restricted(&self, jp: &JetPoint) -> Result<Vec<f64>> {
        self.dl_dv.iter().map(|e| Ok(e.eval(jp)?)).collect()
    }

    /// Restricted Legendre momenta together with `p = L - v^A_alpha p_A^alpha`.
    pub fn legendre_extended(&self, jp: &JetPoint) -> Result<UnifiedPoint> {
        let momenta = self.legendre_restricted(jp)?;
        let l = self.lagrangian.eval(jp)?;
        let p = l - dot(&jp.v, &momenta);
        UnifiedPoint::new(&self.chart, jp.clone(), momenta, Some(p))
    }

    /// Solves `dL/dv(x, y, v) = momenta` for `v` by damped Newton starting at
    /// `seed.v`; `x`, `y` are taken from `seed`.
    pub fn legendre_invert(&self, momenta: &[f64], seed: &JetPoint) -> Result<JetPoint> {
        if momenta.len() != seed.v.len() {
            return Err(Error::Dimension(format!(
                "{} momenta for {} velocities",
                momenta.len(),
                seed.v.len()
            )));
        }
        let target = DVector::from_column_slice(momenta);
        let residual = |jp: &JetPoint| -> Result<DVector<f64>> {
            Ok(&target - DVector::from_vec(self.legendre_restricted(jp)?))
        };
        let mut jp = seed.clone();
        let mut r = residual(&jp)?;
        for iteration in 0..INVERT_MAX_ITER {
            let norm = r.amax();
            let hess = self.hessian_at(&jp)?;
            let det = hess.determinant();
            if det.abs() <= SINGULAR_DET {
                return Err(Error::SingularHessian { det, iteration });
            }
            let step = hess
                .lu()
                .solve(&r)
                .ok_or(Error::SingularHessian { det, iteration })?;
            // backtrack until the residual does not grow
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let v: Vec<f64> = jp.v.iter().zip(step.iter()).map(|(v, s)| v + scale * s).collect();
                let trial = jp.with_velocities(v);
                if let Ok(tr) = residual(&trial) {
                    if tr.amax() <= norm {
                        accepted = Some((trial, tr));
                        break;
                    }
                }
                scale *= 0.5;
            }
            let Some((next, next_r)) = accepted else {
                if norm <= INVERT_TOL {
                    return Ok(jp);
                }
                return Err(Error::NoConvergence { iterations: iteration, residual: norm });
            };
            // the step that brought the residual under tolerance is kept,
            // which usually lands at rounding level
            let done = norm <= INVERT_TOL;
            jp = next;
            r = next_r;
            if done {
                return Ok(jp);
            }
        }
        let norm = r.amax();
        if norm <= INVERT_TOL {
            Ok(jp)
        } else {
            Err(Error::NoConvergence { iterations: INVERT_MAX_ITER, residual: norm })
        }
    }

    /// `H = p_A^alpha v*^A_alpha - L(v*)` with `v*` the Legendre preimage of
    /// `momenta` at `(seed.x, seed.y)`.
    pub fn hamiltonian_function(&self, momenta: &[f64], seed: &JetPoint) -> Result<f64> {
        let jp = self.legendre_invert(momenta, seed)?;
        Ok(dot(momenta, &jp.v) - self.lagrangian.eval(&jp)?)
    }

    /// `(dH/dy^A, dH/dp_A^alpha)` at `(x, y, momenta)`.
    ///
    /// Uses the closed-form Hamiltonian when one is attached, otherwise
    /// central differences of [`Self::hamiltonian_function`].
    pub fn hamiltonian_partials(&self, x: &[f64], y: &[f64], momenta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let c = &self.chart;
        if let Some(h) = &self.hamiltonian {
            let jet = JetPoint::new(c, x.to_vec(), y.to_vec(), vec![0.0; momenta.len()])?;
            let up = UnifiedPoint::new(c, jet, momenta.to_vec(), None)?;
            let dy = c.field_coords().map(|k| h.diff(k).eval(&up)).collect::<Result<_, _>>()?;
            let dp = c.momentum_coords().map(|k| h.diff(k).eval(&up)).collect::<Result<_, _>>()?;
            return Ok((dy, dp));
        }
        let step = HAMILTONIAN_FD_STEP;
        let seed = JetPoint::new(c, x.to_vec(), y.to_vec(), momenta.to_vec())?;
        // a converged preimage at the centre seeds every shifted inversion
        let center = self.legendre_invert(momenta, &seed)?;
        let h_at = |y: &[f64], p: &[f64]| {
            let s = JetPoint { x: x.to_vec(), y: y.to_vec(), v: center.v.clone() };
            self.hamiltonian_function(p, &s)
        };
        let mut dy = Vec::with_capacity(y.len());
        for a in 0..y.len() {
            let (mut up, mut dn) = (y.to_vec(), y.to_vec());
            up[a] += step;
            dn[a] -= step;
            dy.push((h_at(&up, momenta)? - h_at(&dn, momenta)?) / (2.0 * step));
        }
        let mut dp = Vec::with_capacity(momenta.len());
        for k in 0..momenta.len() {
            let (mut up, mut dn) = (momenta.to_vec(), momenta.to_vec());
            up[k] += step;
            dn[k] -= step;
            dp.push((h_at(y, &up)? - h_at(y, &dn)?) / (2.0 * step));
        }
        Ok((dy, dp))
    }

    /// `C^ = p + p_A^alpha v^A_alpha`.
    pub fn coupling(up: &UnifiedPoint) -> Result<f64> {
        Ok(up.scalar_momentum()? + dot(&up.momenta, &up.jet.v))
    }

    /// `C^ - L` at `up`; zero exactly on `W0`.
    pub fn w0_residual(&self, up: &UnifiedPoint) -> Result<f64> {
        Ok(Self::coupling(up)? - self.lagrangian.eval(up)?)
    }

    /// `p_A^alpha - dL/dv^A_alpha` at `up`; zero exactly on `W1` (inside `W0`).
    pub fn w1_residual(&self, up: &UnifiedPoint) -> Result<Vec<f64>> {
        up.momenta
            .iter()
            .zip(&self.dl_dv)
            .map(|(p, e)| Ok(p - e.eval(up)?))
            .collect()
    }

    /// The Hamiltonian section `W_r -> W0`: attaches `p = -H^ = L - p v`.
    pub fn hamiltonian_section_hat(&self, up: &UnifiedPoint) -> Result<UnifiedPoint> {
        if up.p.is_some() {
            return Err(Error::ScalarMomentumPresent);
        }
        let l = self.lagrangian.eval(up)?;
        let mut out = up.clone();
        out.p = Some(l - dot(&up.momenta, &up.jet.v));
        Ok(out)
    }

    pub fn regularity(&self, jp: &JetPoint) -> Result<Regularity> {
        let hessian = self.hessian_at(jp)?;
        let det = hessian.determinant();
        Ok(Regularity { det, regular: det.abs() > SINGULAR_DET, hessian })
    }

    /// Refuses problems whose Hessian is singular at `jp`.
    pub fn ensure_regular(&self, jp: &JetPoint) -> Result<Regularity> {
        let r = self.regularity(jp)?;
        if r.regular {
            Ok(r)
        } else {
            Err(Error::SingularLagrangian)
        }
    }
}

/// Outcome of the Hessian determinant test at one jet point.
#[derive(Debug, Clone)]
pub struct Regularity {
    pub det: f64,
    pub regular: bool,
    pub hessian: DMatrix<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, w)| u * w).sum()
}
