use std::collections::BTreeMap;

use crate::bundles::LagrangianProblem;
use crate::error::{Error, Result};
use crate::symbolic::{Chart, Coord, Expr, Point};

/// A local section given by expressions in the base coordinates.
///
/// Only `y` is mandatory. When velocities are absent they are derived as
/// `dy/dx`; momenta and `p` are whatever the caller supplied.
#[derive(Debug, Clone)]
pub struct SectionExprs {
    pub y: Vec<Expr>,
    pub v: Option<Vec<Expr>>,
    pub momenta: Option<Vec<Expr>>,
    pub p: Option<Expr>,
}

impl SectionExprs {
    pub fn new(chart: &Chart, y: Vec<Expr>) -> Result<SectionExprs> {
        if y.len() != chart.n() {
            return Err(Error::Dimension(format!("section has {} fields, chart expects {}", y.len(), chart.n())));
        }
        check_base_only(chart, &y)?;
        Ok(SectionExprs { y, v: None, momenta: None, p: None })
    }

    pub fn with_velocities(mut self, chart: &Chart, v: Vec<Expr>) -> Result<SectionExprs> {
        check_pairs(chart, "velocity", &v)?;
        self.v = Some(v);
        Ok(self)
    }

    pub fn with_momenta(mut self, chart: &Chart, momenta: Vec<Expr>) -> Result<SectionExprs> {
        check_pairs(chart, "momentum", &momenta)?;
        self.momenta = Some(momenta);
        Ok(self)
    }

    pub fn with_scalar_momentum(mut self, chart: &Chart, p: Expr) -> Result<SectionExprs> {
        check_base_only(chart, std::slice::from_ref(&p))?;
        self.p = Some(p);
        Ok(self)
    }

    /// `psi_0 = (j1 phi, FL~ o j1 phi)`: velocities from `dy/dx`, momenta
    /// from the restricted Legendre map and `p` from the extended one.
    pub fn legendre_prolongation(prob: &LagrangianProblem, y: Vec<Expr>) -> Result<SectionExprs> {
        let chart = prob.chart();
        let holo = SectionExprs::new(chart, y)?;
        let v = holo.derived_velocities(chart);
        let holo = holo.with_velocities(chart, v)?;
        let map = holo.substitution(chart);
        let on = |e: &Expr| e.substitute(&|c: Coord| map.get(&c).cloned());
        let momenta: Vec<Expr> = (0..chart.n())
            .flat_map(|a| (0..chart.m()).map(move |al| (a, al)))
            .map(|(a, al)| on(prob.dl_dv(a, al)))
            .collect();
        let vel = holo.velocities(chart);
        let p = momenta.iter().zip(&vel).fold(on(prob.lagrangian()), |acc, (p, v)| acc - p * v);
        holo.with_momenta(chart, momenta)?.with_scalar_momentum(chart, p)
    }

    /// `dy^A/dx^alpha` in `(A, alpha)` order.
    pub fn derived_velocities(&self, chart: &Chart) -> Vec<Expr> {
        self.y.iter().flat_map(|y| chart.base_coords().map(move |x| y.diff(x))).collect()
    }

    /// Supplied velocities, or `dy/dx` when none were given.
    pub fn velocities(&self, chart: &Chart) -> Vec<Expr> {
        self.v.clone().unwrap_or_else(|| self.derived_velocities(chart))
    }

    /// The map from fiber coordinates to their section expressions.
    pub fn substitution(&self, chart: &Chart) -> BTreeMap<Coord, Expr> {
        let mut map = BTreeMap::new();
        for (a, y) in self.y.iter().enumerate() {
            map.insert(chart.y(a), y.clone());
        }
        for (k, v) in self.velocities(chart).into_iter().enumerate() {
            map.insert(chart.v(k / chart.m(), k % chart.m()), v);
        }
        if let Some(mom) = &self.momenta {
            for (k, p) in mom.iter().enumerate() {
                map.insert(chart.momentum(k / chart.m(), k % chart.m()), p.clone());
            }
        }
        if let Some(p) = &self.p {
            map.insert(chart.p(), p.clone());
        }
        map
    }

    /// `e` restricted to the section (fiber coordinates replaced).
    pub fn restrict(&self, chart: &Chart, e: &Expr) -> Expr {
        let map = self.substitution(chart);
        e.substitute(&|c: Coord| map.get(&c).cloned())
    }

    pub fn momenta_or_err(&self, chart: &Chart) -> Result<&[Expr]> {
        self.momenta
            .as_deref()
            .ok_or_else(|| Error::MissingSectionComponent(chart.name(chart.momentum(0, 0)).to_string()))
    }
}

/// A valuation holding only the base coordinates.
pub fn base_point(chart: &Chart, x: &[f64]) -> Result<Point> {
    if x.len() != chart.m() {
        return Err(Error::Dimension(format!("base point has {} entries, chart expects {}", x.len(), chart.m())));
    }
    Ok(x.iter().enumerate().fold(Point::empty(chart), |pt, (al, v)| pt.with(chart.x(al), *v)))
}

fn check_base_only(chart: &Chart, exprs: &[Expr]) -> Result<()> {
    for e in exprs {
        if let Some(c) = e.coords().into_iter().find(|c| !chart.is_base(*c)) {
            return Err(Error::Dimension(format!(
                "section component depends on non-base coordinate `{}`",
                chart.name(c)
            )));
        }
    }
    Ok(())
}

fn check_pairs(chart: &Chart, what: &str, exprs: &[Expr]) -> Result<()> {
    if exprs.len() != chart.n() * chart.m() {
        return Err(Error::Dimension(format!(
            "{} {what} components, chart expects {}",
            exprs.len(),
            chart.n() * chart.m()
        )));
    }
    check_base_only(chart, exprs)
}
