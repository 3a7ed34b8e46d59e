use crate::bundles::{JetPoint, LagrangianProblem};
use crate::error::{Error, Result};

/// A uniform tensor grid on the rectangle `[a1, b1] x [a2, b2]`.
///
/// Node `(i, j)` sits at `(a1 + i h1, a2 + j h2)` and has flat index
/// `i * n2 + j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub nodes: [usize; 2],
}

impl Grid {
    pub fn new(lo: [f64; 2], hi: [f64; 2], nodes: [usize; 2]) -> Result<Grid> {
        for d in 0..2 {
            if nodes[d] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "need at least 3 nodes along x{}, got {}",
                    d + 1,
                    nodes[d]
                )));
            }
            if !(hi[d] > lo[d]) || !lo[d].is_finite() || !hi[d].is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "empty or non-finite range [{}, {}] along x{}",
                    lo[d],
                    hi[d],
                    d + 1
                )));
            }
        }
        Ok(Grid { lo, hi, nodes })
    }

    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Grid> {
        Grid::new([lo, lo], [hi, hi], [n, n])
    }

    pub fn spacing(&self, d: usize) -> f64 {
        (self.hi[d] - self.lo[d]) / (self.nodes[d] - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes[0] * self.nodes[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nodes[1] + j
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k / self.nodes[1], k % self.nodes[1])
    }

    pub fn coord(&self, i: usize, j: usize) -> [f64; 2] {
        // exact endpoints, no accumulated rounding at the far edge
        let along = |d: usize, t: usize| {
            if t == self.nodes[d] - 1 {
                self.hi[d]
            } else {
                self.lo[d] + t as f64 * self.spacing(d)
            }
        };
        [along(0, i), along(1, j)]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nodes[0] - 1 || j == self.nodes[1] - 1
    }

    /// Interior nodes in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.nodes[0] - 1).flat_map(move |i| (1..self.nodes[1] - 1).map(move |j| (i, j)))
    }
}

/// Nodal field values on a grid with the jet and momentum data derived from
/// them.
///
/// Velocities use central differences inside and one-sided second-order
/// differences on the boundary; momenta and `p` come from the extended
/// Legendre map. The derived arrays are rebuilt whenever `y` changes.
#[derive(Debug, Clone)]
pub struct DiscreteSection {
    grid: Grid,
    n: usize,
    y: Vec<f64>,
    v: Vec<f64>,
    momenta: Vec<f64>,
    p: Vec<f64>,
}

impl DiscreteSection {
    /// `y` is node-major: `y[k * N + A]`.
    pub fn new(prob: &LagrangianProblem, grid: Grid, y: Vec<f64>) -> Result<DiscreteSection> {
        let c = prob.chart();
        if c.m() != 2 {
            return Err(Error::Dimension(format!("grids need a 2-dimensional base, chart has m = {}", c.m())));
        }
        let n = c.n();
        if y.len() != grid.len() * n {
            return Err(Error::Dimension(format!(
                "{} nodal values for {} nodes and {n} fields",
                y.len(),
                grid.len()
            )));
        }
        let mut ds = DiscreteSection { grid, n, y, v: Vec::new(), momenta: Vec::new(), p: Vec::new() };
        ds.derive(prob)?;
        Ok(ds)
    }

    fn derive(&mut self, prob: &LagrangianProblem) -> Result<()> {
        let g = self.grid;
        let (n, m) = (self.n, 2);
        self.v = vec![0.0; g.len() * n * m];
        self.momenta = vec![0.0; g.len() * n * m];
        self.p = vec![0.0; g.len()];
        for k in 0..g.len() {
            let (i, j) = g.ij(k);
            for a in 0..n {
                for al in 0..m {
                    self.v[(k * n + a) * m + al] = self.first_derivative(i, j, a, al);
                }
            }
            let jp = self.jet_point(k);
            let up = prob.legendre_extended(&jp)?;
            self.momenta[k * n * m..(k + 1) * n * m].copy_from_slice(&up.momenta);
            self.p[k] = up.p.expect("extended Legendre map sets p");
        }
        Ok(())
    }

    /// `dy^A/dx^alpha` at node `(i, j)` from nodal values alone.
    pub fn first_derivative(&self, i: usize, j: usize, a: usize, alpha: usize) -> f64 {
        let g = &self.grid;
        let h = g.spacing(alpha);
        let (t, len) = if alpha == 0 { (i, g.nodes[0]) } else { (j, g.nodes[1]) };
        let at = |s: usize| {
            let k = if alpha == 0 { g.index(s, j) } else { g.index(i, s) };
            self.y[k * self.n + a]
        };
        if t == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if t == len - 1 {
            (3.0 * at(t) - 4.0 * at(t - 1) + at(t - 2)) / (2.0 * h)
        } else {
            (at(t + 1) - at(t - 1)) / (2.0 * h)
        }
    }

    /// `d2y^A/dx^alpha dx^nu` at an interior node by central differences.
    pub fn second_derivative(&self, i: usize, j: usize, a: usize, alpha: usize, nu: usize) -> f64 {
        let g = &self.grid;
        let y = |i: usize, j: usize| self.y[g.index(i, j) * self.n + a];
        let (h1, h2) = (g.spacing(0), g.spacing(1));
        match (alpha, nu) {
            (0, 0) => (y(i + 1, j) - 2.0 * y(i, j) + y(i - 1, j)) / (h1 * h1),
            (1, 1) => (y(i, j + 1) - 2.0 * y(i, j) + y(i, j - 1)) / (h2 * h2),
            _ => (y(i + 1, j + 1) - y(i + 1, j - 1) - y(i - 1, j + 1) + y(i - 1, j - 1)) / (4.0 * h1 * h2),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn fields(&self) -> usize {
        self.n
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn y_at(&self, k: usize, a: usize) -> f64 {
        self.y[k * self.n + a]
    }

    /// Velocities at node `k` in `(A, alpha)` order.
    pub fn v_at(&self, k: usize) -> &[f64] {
        let w = self.n * 2;
        &self.v[k * w..(k + 1) * w]
    }

    pub fn momenta_at(&self, k: usize) -> &[f64] {
        let w = self.n * 2;
        &self.momenta[k * w..(k + 1) * w]
    }

    pub fn p_at(&self, k: usize) -> f64 {
        self.p[k]
    }

    pub fn jet_point(&self, k: usize) -> JetPoint {
        let (i, j) = self.grid.ij(k);
        JetPoint {
            x: self.grid.coord(i, j).to_vec(),
            y: self.y[k * self.n..(k + 1) * self.n].to_vec(),
            v: self.v_at(k).to_vec(),
        }
    }

    pub fn max_abs_diff_y(&self, other: &[f64]) -> f64 {
        self.y.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}
