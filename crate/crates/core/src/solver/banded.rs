use crate::error::{Error, Result};

/// A square band matrix with `lower` sub- and `upper` super-diagonals.
///
/// Each row keeps `2 * lower + upper + 1` slots so that partial pivoting can
/// fill in up to `lower + upper` super-diagonals during elimination.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> BandMatrix {
        let width = 2 * lower + upper + 1;
        BandMatrix { n, lower, upper, width, data: vec![0.0; n * width] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.lower + self.upper);
        i * self.width + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.lower < i || j > i + self.upper {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.lower >= i && j <= i + self.upper,
            "entry ({i}, {j}) outside band ({}, {})",
            self.lower,
            self.upper
        );
        let s = self.slot(i, j);
        self.data[s] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let v = self.get(i, j);
        self.set(i, j, v + value);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting,
    /// consuming the matrix.
    pub fn solve(mut self, mut b: Vec<f64>) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let reach = self.lower + self.upper;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = 1e-14 * scale.max(f64::MIN_POSITIVE);

        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut piv = k;
            let mut best = self.data[self.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.data[self.slot(r, k)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= tiny {
                return Err(Error::SingularJacobian { row: k, pivot: best });
            }
            if piv != k {
                for c in k..=last_col {
                    let (a, bb) = (self.slot(k, c), self.slot(piv, c));
                    self.data.swap(a, bb);
                }
                b.swap(k, piv);
            }
            let pivot = self.data[self.slot(k, k)];
            for r in k + 1..=last_row {
                let sr = self.slot(r, k);
                let f = self.data[sr] / pivot;
                if f == 0.0 {
                    continue;
                }
                self.data[sr] = 0.0;
                for c in k + 1..=last_col {
                    let src = self.data[self.slot(k, c)];
                    let dst = self.slot(r, c);
                    self.data[dst] -= f * src;
                }
                b[r] -= f * b[k];
            }
        }

        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut acc = b[k];
            for c in k + 1..=last_col {
                acc -= self.data[self.slot(k, c)] * x[c];
            }
            x[k] = acc / self.data[self.slot(k, k)];
        }
        Ok(x)
    }
}
