use rayon::prelude::*;

use crate::bundles::{JetPoint, LagrangianProblem, UnifiedPoint};
use crate::error::Result;
use crate::field_eqs::el_operator;

use super::grid::DiscreteSection;
use super::SolveStats;

/// Residuals at one interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeResidual {
    pub i: usize,
    pub j: usize,
    pub x: [f64; 2],
    /// Discrete Euler-Lagrange residual per field.
    pub el: Vec<f64>,
    /// `max_alpha |dH/dp_A^alpha - dy^A/dx^alpha|` per field.
    pub hdw_y: Vec<f64>,
    /// `-dH/dy^A - dp_A^alpha/dx^alpha` per field.
    pub hdw_p: Vec<f64>,
    pub w0: f64,
    pub w1_max: f64,
    pub hol_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FamilySummary {
    pub max: f64,
    pub rms: f64,
}

impl FamilySummary {
    fn of(values: impl Iterator<Item = f64>) -> FamilySummary {
        let (mut max, mut sq, mut count) = (0.0f64, 0.0, 0usize);
        for v in values {
            max = max.max(v.abs());
            sq += v * v;
            count += 1;
        }
        let rms = if count == 0 { 0.0 } else { (sq / count as f64).sqrt() };
        FamilySummary { max, rms }
    }
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub nodes: Vec<NodeResidual>,
    pub el: FamilySummary,
    pub hdw_y: FamilySummary,
    pub hdw_p: FamilySummary,
    pub w0: FamilySummary,
    pub w1: FamilySummary,
    pub holonomy: FamilySummary,
    pub stats: Option<SolveStats>,
}

/// Momenta at the half nodes `(i -+ 1/2, j)` and `(i, j -+ 1/2)`, indexed
/// `[side][alpha][A]`, keeping only the `p_A^alpha` component that crosses
/// each face.
///
/// The normal velocity is the compact difference across the face, so the
/// divergence built from these stays second order next to the boundary,
/// where nodal velocities are one-sided.
fn half_node_momenta(prob: &LagrangianProblem, ds: &DiscreteSection, i: usize, j: usize) -> Result<[[Vec<f64>; 2]; 2]> {
    let grid = ds.grid();
    let (m, n) = (2, ds.fields());
    let at = |side: usize, al: usize| -> Result<Vec<f64>> {
        let step = |t: usize| if side == 0 { t - 1 } else { t + 1 };
        let other = if al == 0 { grid.index(step(i), j) } else { grid.index(i, step(j)) };
        let (lo, hi) = if side == 0 { (other, grid.index(i, j)) } else { (grid.index(i, j), other) };
        let (xl, xh) = (grid.coord(grid.ij(lo).0, grid.ij(lo).1), grid.coord(grid.ij(hi).0, grid.ij(hi).1));
        let x = vec![0.5 * (xl[0] + xh[0]), 0.5 * (xl[1] + xh[1])];
        let y = (0..n).map(|a| 0.5 * (ds.y_at(lo, a) + ds.y_at(hi, a))).collect();
        let mut v = vec![0.0; n * m];
        for a in 0..n {
            for nu in 0..m {
                v[a * m + nu] = if nu == al {
                    (ds.y_at(hi, a) - ds.y_at(lo, a)) / grid.spacing(al)
                } else {
                    0.5 * (ds.v_at(lo)[a * m + nu] + ds.v_at(hi)[a * m + nu])
                };
            }
        }
        let momenta = prob.legendre_restricted(&JetPoint { x, y, v })?;
        Ok((0..n).map(|a| momenta[a * m + al]).collect())
    };
    Ok([[at(0, 0)?, at(0, 1)?], [at(1, 0)?, at(1, 1)?]])
}

/// Evaluates every residual family at the interior nodes of `ds` with
/// second-order central differences.
pub fn residual_report(prob: &LagrangianProblem, ds: &DiscreteSection, stats: Option<SolveStats>) -> Result<ResidualReport> {
    let grid = *ds.grid();
    let (m, n) = (2, ds.fields());
    let ops = el_operator(prob);
    let interior: Vec<(usize, usize)> = grid.interior().collect();

    let nodes: Vec<NodeResidual> = interior
        .par_iter()
        .map(|&(i, j)| -> Result<NodeResidual> {
            let k = grid.index(i, j);
            let jp = ds.jet_point(k);
            let momenta = ds.momenta_at(k);

            let mut el = Vec::with_capacity(n);
            for op in &ops {
                let mut r = op.lower.eval(&jp)?;
                for b in 0..n {
                    for al in 0..m {
                        for nu in 0..m {
                            let coef = op.principal[(b * m + al) * m + nu].eval(&jp)?;
                            r -= coef * ds.second_derivative(i, j, b, al, nu);
                        }
                    }
                }
                el.push(r);
            }

            let (dh_dy, dh_dp) = prob.hamiltonian_partials(&jp.x, &jp.y, momenta)?;
            let flux = half_node_momenta(prob, ds, i, j)?;
            let mut hdw_y = vec![0.0; n];
            let mut hdw_p = vec![0.0; n];
            for a in 0..n {
                for al in 0..m {
                    let dy = ds.first_derivative(i, j, a, al);
                    hdw_y[a] = f64::max(hdw_y[a], (dh_dp[a * m + al] - dy).abs());
                }
                let div = (0..m).map(|al| (flux[1][al][a] - flux[0][al][a]) / grid.spacing(al)).sum::<f64>();
                hdw_p[a] = -dh_dy[a] - div;
            }

            let up = UnifiedPoint { jet: jp.clone(), momenta: momenta.to_vec(), p: Some(ds.p_at(k)) };
            let w0 = prob.w0_residual(&up)?;
            let w1_max = prob.w1_residual(&up)?.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let mut hol_max = 0.0f64;
            for a in 0..n {
                for al in 0..m {
                    hol_max = hol_max.max((jp.v[a * m + al] - ds.first_derivative(i, j, a, al)).abs());
                }
            }
            Ok(NodeResidual { i, j, x: grid.coord(i, j), el, hdw_y, hdw_p, w0, w1_max, hol_max })
        })
        .collect::<Result<_>>()?;

    Ok(ResidualReport {
        el: FamilySummary::of(nodes.iter().flat_map(|r| r.el.iter().copied())),
        hdw_y: FamilySummary::of(nodes.iter().flat_map(|r| r.hdw_y.iter().copied())),
        hdw_p: FamilySummary::of(nodes.iter().flat_map(|r| r.hdw_p.iter().copied())),
        w0: FamilySummary::of(nodes.iter().map(|r| r.w0)),
        w1: FamilySummary::of(nodes.iter().map(|r| r.w1_max)),
        holonomy: FamilySummary::of(nodes.iter().map(|r| r.hol_max)),
        nodes,
        stats,
    })
}
