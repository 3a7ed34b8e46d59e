//! Finite-difference Dirichlet solver for the Euler-Lagrange equation of a
//! single field over a rectangle, and the residual report that checks a
//! discrete section against every family of field equations.

mod banded;
mod grid;
mod io;
mod report;

pub use banded::BandMatrix;
pub use grid::{DiscreteSection, Grid};
pub use io::{read_section_csv, write_report_csv, write_section_csv, REPORT_HEADER};
pub use report::{residual_report, FamilySummary, NodeResidual, ResidualReport};

use rayon::prelude::*;

use crate::bundles::{JetPoint, LagrangianProblem};
use crate::error::{Error, Result};
use crate::field_eqs::el_operator;
use crate::symbolic::{Expr, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Max-norm tolerance on the discrete Euler-Lagrange residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed per Newton iteration.
    pub max_halvings: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iter: 50, max_halvings: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// The discrete operator `R = lower(x, y, dy) - c_{alpha nu} d2y/dx^alpha dx^nu`
/// and the partial derivatives its Newton Jacobian needs.
struct Stencil {
    lower: Expr,
    lower_y: Expr,
    lower_v: [Expr; 2],
    c: [[Expr; 2]; 2],
    c_y: [[Expr; 2]; 2],
    c_v: [[[Expr; 2]; 2]; 2],
}

impl Stencil {
    fn new(prob: &LagrangianProblem) -> Stencil {
        let ch = prob.chart();
        let op = el_operator(prob).swap_remove(0);
        let (y, v) = (ch.y(0), [ch.v(0, 0), ch.v(0, 1)]);
        let c = |a: usize, b: usize| op.principal[a * 2 + b].clone();
        let c = [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]];
        let c_y = [[c[0][0].diff(y), c[0][1].diff(y)], [c[1][0].diff(y), c[1][1].diff(y)]];
        let c_v = [0, 1].map(|a| [0, 1].map(|b| [0, 1].map(|g| c[a][b].diff(v[g]))));
        Stencil {
            lower_y: op.lower.diff(y),
            lower_v: [op.lower.diff(v[0]), op.lower.diff(v[1])],
            lower: op.lower,
            c,
            c_y,
            c_v,
        }
    }
}

/// Local data at one interior node.
struct NodeEval {
    residual: f64,
    /// `(grid index, dR/dy)` for the nine-point stencil.
    entries: Vec<(usize, f64)>,
}

fn node_eval(st: &Stencil, grid: &Grid, y: &[f64], i: usize, j: usize, with_jacobian: bool) -> Result<NodeEval> {
    let at = |i: usize, j: usize| y[grid.index(i, j)];
    let (h1, h2) = (grid.spacing(0), grid.spacing(1));
    let g = [(at(i + 1, j) - at(i - 1, j)) / (2.0 * h1), (at(i, j + 1) - at(i, j - 1)) / (2.0 * h2)];
    let s11 = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h1 * h1);
    let s22 = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h2 * h2);
    let s12 = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4.0 * h1 * h2);
    let s = [[s11, s12], [s12, s22]];
    let jp = JetPoint { x: grid.coord(i, j).to_vec(), y: vec![at(i, j)], v: g.to_vec() };

    let mut c = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            c[a][b] = st.c[a][b].eval(&jp)?;
        }
    }
    let contract = |m: &[[f64; 2]; 2]| m[0][0] * s[0][0] + m[0][1] * s[0][1] + m[1][0] * s[1][0] + m[1][1] * s[1][1];
    let residual = st.lower.eval(&jp)? - contract(&c);
    if !with_jacobian {
        return Ok(NodeEval { residual, entries: Vec::new() });
    }

    let mut c_y = [[0.0; 2]; 2];
    let mut c_v = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            c_y[a][b] = st.c_y[a][b].eval(&jp)?;
            for gm in 0..2 {
                c_v[gm][a][b] = st.c_v[a][b][gm].eval(&jp)?;
            }
        }
    }
    let d_y = st.lower_y.eval(&jp)? - contract(&c_y);
    let d_g = [st.lower_v[0].eval(&jp)? - contract(&c_v[0]), st.lower_v[1].eval(&jp)? - contract(&c_v[1])];
    let mixed = c[0][1] + c[1][0];

    let center = d_y + 2.0 * c[0][0] / (h1 * h1) + 2.0 * c[1][1] / (h2 * h2);
    let e1 = d_g[0] / (2.0 * h1);
    let e2 = d_g[1] / (2.0 * h2);
    let k = mixed / (4.0 * h1 * h2);
    let entries = vec![
        (grid.index(i, j), center),
        (grid.index(i + 1, j), e1 - c[0][0] / (h1 * h1)),
        (grid.index(i - 1, j), -e1 - c[0][0] / (h1 * h1)),
        (grid.index(i, j + 1), e2 - c[1][1] / (h2 * h2)),
        (grid.index(i, j - 1), -e2 - c[1][1] / (h2 * h2)),
        (grid.index(i + 1, j + 1), -k),
        (grid.index(i - 1, j - 1), -k),
        (grid.index(i + 1, j - 1), k),
        (grid.index(i - 1, j + 1), k),
    ];
    Ok(NodeEval { residual, entries })
}

/// Discrete Euler-Lagrange residual at interior nodes, row-major.
fn interior_residual(st: &Stencil, grid: &Grid, y: &[f64]) -> Result<Vec<f64>> {
    let nodes: Vec<(usize, usize)> = grid.interior().collect();
    nodes
        .par_iter()
        .map(|&(i, j)| Ok(node_eval(st, grid, y, i, j, false)?.residual))
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Transfinite interpolation of the boundary ring into the interior.
fn coons_patch(grid: &Grid, y: &mut [f64]) {
    let (n1, n2) = (grid.nodes[0], grid.nodes[1]);
    let b = |i: usize, j: usize| y[grid.index(i, j)];
    let mut out = y.to_vec();
    for (i, j) in grid.interior() {
        let s = i as f64 / (n1 - 1) as f64;
        let t = j as f64 / (n2 - 1) as f64;
        out[grid.index(i, j)] = (1.0 - s) * b(0, j) + s * b(n1 - 1, j) + (1.0 - t) * b(i, 0) + t * b(i, n2 - 1)
            - ((1.0 - s) * (1.0 - t) * b(0, 0)
                + s * (1.0 - t) * b(n1 - 1, 0)
                + (1.0 - s) * t * b(0, n2 - 1)
                + s * t * b(n1 - 1, n2 - 1));
    }
    y.copy_from_slice(&out);
}

/// Nodal values of `boundary` (an expression in the base coordinates) on
/// the edge nodes; interior entries are zero.
pub fn boundary_values(prob: &LagrangianProblem, grid: &Grid, boundary: &Expr) -> Result<Vec<f64>> {
    let c = prob.chart();
    if let Some(k) = boundary.coords().into_iter().find(|k| !c.is_base(*k)) {
        return Err(Error::Dimension(format!("boundary data depends on `{}`", c.name(k))));
    }
    let mut y = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let (i, j) = grid.ij(k);
        if grid.is_boundary(i, j) {
            let [a, b] = grid.coord(i, j);
            let pt = Point::empty(c).with(c.x(0), a).with(c.x(1), b);
            y[k] = boundary.eval(&pt)?;
            if !y[k].is_finite() {
                return Err(Error::Dimension(format!("boundary value at node ({i}, {j}) is not finite")));
            }
        }
    }
    Ok(y)
}

/// Solves the Dirichlet problem `EL = 0` inside `grid`, `y = boundary` on
/// its edges, by damped Newton on the second-order central-difference
/// discretization.
pub fn solve_dirichlet(
    prob: &LagrangianProblem,
    grid: Grid,
    boundary: &Expr,
    opts: SolveOptions,
) -> Result<(DiscreteSection, SolveStats)> {
    let ch = prob.chart();
    if ch.m() != 2 || ch.n() != 1 {
        return Err(Error::Dimension(format!(
            "the Dirichlet solver handles m = 2, N = 1; chart has m = {}, N = {}",
            ch.m(),
            ch.n()
        )));
    }
    let st = Stencil::new(prob);
    let mut y = boundary_values(prob, &grid, boundary)?;
    coons_patch(&grid, &mut y);

    let (n1, n2) = (grid.nodes[0], grid.nodes[1]);
    let inner_cols = n2 - 2;
    let unknown = |i: usize, j: usize| (i - 1) * inner_cols + (j - 1);
    let interior: Vec<(usize, usize)> = grid.interior().collect();
    let count = interior.len();

    let mut norm = max_abs(&interior_residual(&st, &grid, &y)?);
    log::debug!("newton start: {}x{} grid, residual {norm:e}", n1, n2);
    for iteration in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok((DiscreteSection::new(prob, grid, y)?, SolveStats { iterations: iteration, residual: norm }));
        }
        let evals: Vec<NodeEval> = interior
            .par_iter()
            .map(|&(i, j)| node_eval(&st, &grid, &y, i, j, true))
            .collect::<Result<_>>()?;
        let mut jac = BandMatrix::zeros(count, inner_cols + 1, inner_cols + 1);
        let mut rhs = vec![0.0; count];
        for (row, ev) in evals.iter().enumerate() {
            rhs[row] = -ev.residual;
            for &(k, val) in &ev.entries {
                let (i, j) = grid.ij(k);
                if !grid.is_boundary(i, j) {
                    jac.add(row, unknown(i, j), val);
                }
            }
        }
        let delta = jac.solve(rhs)?;

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = y.clone();
            for (u, &(i, j)) in interior.iter().enumerate() {
                trial[grid.index(i, j)] += step * delta[u];
            }
            if let Ok(r) = interior_residual(&st, &grid, &trial) {
                let n = max_abs(&r);
                if n < norm {
                    y = trial;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        log::debug!("newton iteration {}: step {step}, residual {norm:e}", iteration + 1);
        if !accepted {
            return Err(Error::NoConvergence { iterations: iteration + 1, residual: norm });
        }
    }
    if norm <= opts.tol {
        Ok((DiscreteSection::new(prob, grid, y)?, SolveStats { iterations: opts.max_iter, residual: norm }))
    } else {
        Err(Error::NoConvergence { iterations: opts.max_iter, residual: norm })
    }
}
