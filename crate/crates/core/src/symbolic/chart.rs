use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Index of a coordinate inside a [`Chart`].
///
/// The ordering of `Coord` values is the chart ordering, which in turn fixes
/// the ordering of basis covectors inside a form key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord(pub(crate) usize);

impl Coord {
    pub fn index(self) -> usize {
        self.0
    }
}

/// What a chart coordinate stands for. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordKind {
    /// `x^alpha`
    Base(usize),
    /// `y^A`
    Field(usize),
    /// `v^A_alpha`, stored as `(A, alpha)`
    Velocity(usize, usize),
    /// `p_A^alpha`, stored as `(A, alpha)`
    Momentum(usize, usize),
    /// the scalar momentum `p`
    Scalar,
}

/// Natural coordinates `(x, y, v, p_A^alpha, p)` on `W = J1E x_E M(pi)` for a
/// trivial bundle `R^m x R^N -> R^m`.
///
/// Layout: `x1..xm`, `y1..yN`, then `vA_alpha` with `A` major, then
/// `pA_alpha` with `A` major, then `p`. Every other space used by the crate
/// (the jet bundle, the multimomentum bundles, `W0`) is a coordinate subset of
/// this one.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    m: usize,
    n: usize,
    names: Vec<String>,
    lookup: HashMap<String, Coord>,
}

impl Chart {
    pub fn new(m: usize, n: usize) -> Result<Chart> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidChart(format!(
                "base and fiber dimensions must be at least 1 (got m = {m}, N = {n})"
            )));
        }
        let mut names = Vec::with_capacity(m + n + 2 * n * m + 1);
        names.extend((1..=m).map(|a| format!("x{a}")));
        names.extend((1..=n).map(|a| format!("y{a}")));
        for a in 1..=n {
            names.extend((1..=m).map(|al| format!("v{a}_{al}")));
        }
        for a in 1..=n {
            names.extend((1..=m).map(|al| format!("p{a}_{al}")));
        }
        names.push("p".to_string());

        let mut lookup = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if lookup.insert(name.clone(), Coord(i)).is_some() {
                return Err(Error::InvalidChart(format!("duplicate coordinate name `{name}`")));
            }
        }
        Ok(Chart { m, n, names, lookup })
    }

    /// Base dimension `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Fiber dimension `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of coordinates.
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn x(&self, alpha: usize) -> Coord {
        assert!(alpha < self.m, "base index {alpha} out of range");
        Coord(alpha)
    }

    pub fn y(&self, a: usize) -> Coord {
        assert!(a < self.n, "field index {a} out of range");
        Coord(self.m + a)
    }

    pub fn v(&self, a: usize, alpha: usize) -> Coord {
        assert!(a < self.n && alpha < self.m, "velocity index ({a}, {alpha}) out of range");
        Coord(self.m + self.n + a * self.m + alpha)
    }

    pub fn momentum(&self, a: usize, alpha: usize) -> Coord {
        assert!(a < self.n && alpha < self.m, "momentum index ({a}, {alpha}) out of range");
        Coord(self.m + self.n + self.n * self.m + a * self.m + alpha)
    }

    pub fn p(&self) -> Coord {
        Coord(self.dim() - 1)
    }

    /// Flat `(A, alpha)` index used for velocity and momentum tables.
    pub fn pair_index(&self, a: usize, alpha: usize) -> usize {
        a * self.m + alpha
    }

    pub fn kind(&self, c: Coord) -> CoordKind {
        let (m, n) = (self.m, self.n);
        let i = c.0;
        if i < m {
            CoordKind::Base(i)
        } else if i < m + n {
            CoordKind::Field(i - m)
        } else if i < m + n + n * m {
            let k = i - m - n;
            CoordKind::Velocity(k / m, k % m)
        } else if i < m + n + 2 * n * m {
            let k = i - m - n - n * m;
            CoordKind::Momentum(k / m, k % m)
        } else {
            assert!(i < self.dim(), "coordinate {i} out of range");
            CoordKind::Scalar
        }
    }

    pub fn is_base(&self, c: Coord) -> bool {
        c.0 < self.m
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.0 < self.dim()
    }

    pub fn name(&self, c: Coord) -> &str {
        &self.names[c.0]
    }

    pub fn coord(&self, name: &str) -> Result<Coord> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.dim()).map(Coord)
    }

    pub fn base_coords(&self) -> impl Iterator<Item = Coord> {
        (0..self.m).map(Coord)
    }

    pub fn field_coords(&self) -> impl Iterator<Item = Coord> {
        let m = self.m;
        (m..m + self.n).map(Coord)
    }

    pub fn velocity_coords(&self) -> impl Iterator<Item = Coord> {
        let start = self.m + self.n;
        (start..start + self.n * self.m).map(Coord)
    }

    pub fn momentum_coords(&self) -> impl Iterator<Item = Coord> {
        let start = self.m + self.n + self.n * self.m;
        (start..start + self.n * self.m).map(Coord)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.names.join(", "))
    }
}
