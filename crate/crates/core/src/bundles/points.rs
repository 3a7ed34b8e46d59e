use crate::error::{Error, Result};
use crate::symbolic::{Chart, Coord, Valuation};

/// A point of the first jet bundle: `(x, y, v)` with `v` flattened in
/// `(A, alpha)` order, `A` major.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
}

impl JetPoint {
    pub fn new(chart: &Chart, x: Vec<f64>, y: Vec<f64>, v: Vec<f64>) -> Result<JetPoint> {
        check_len("x", x.len(), chart.m())?;
        check_len("y", y.len(), chart.n())?;
        check_len("v", v.len(), chart.n() * chart.m())?;
        Ok(JetPoint { x, y, v })
    }

    /// The jet point with `x`, `y` zero and the given velocities.
    pub fn at_velocity(chart: &Chart, v: Vec<f64>) -> Result<JetPoint> {
        JetPoint::new(chart, vec![0.0; chart.m()], vec![0.0; chart.n()], v)
    }

    pub fn m(&self) -> usize {
        self.x.len()
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn velocity(&self, a: usize, alpha: usize) -> f64 {
        self.v[a * self.m() + alpha]
    }

    pub fn with_velocities(&self, v: Vec<f64>) -> JetPoint {
        debug_assert_eq!(v.len(), self.v.len());
        JetPoint { x: self.x.clone(), y: self.y.clone(), v }
    }
}

impl Valuation for JetPoint {
    fn value(&self, c: Coord) -> Option<f64> {
        let (m, n) = (self.x.len(), self.y.len());
        let i = c.index();
        if i < m {
            Some(self.x[i])
        } else if i < m + n {
            Some(self.y[i - m])
        } else if i < m + n + self.v.len() {
            Some(self.v[i - m - n])
        } else {
            None
        }
    }
}

/// A point of `W = J1E x_E M` (with `p`) or of the restricted space `W_r`
/// (without it). Momenta are flattened like velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedPoint {
    pub jet: JetPoint,
    pub momenta: Vec<f64>,
    pub p: Option<f64>,
}

impl UnifiedPoint {
    pub fn new(chart: &Chart, jet: JetPoint, momenta: Vec<f64>, p: Option<f64>) -> Result<UnifiedPoint> {
        check_len("x", jet.x.len(), chart.m())?;
        check_len("y", jet.y.len(), chart.n())?;
        check_len("v", jet.v.len(), chart.n() * chart.m())?;
        check_len("momenta", momenta.len(), chart.n() * chart.m())?;
        Ok(UnifiedPoint { jet, momenta, p })
    }

    pub fn momentum(&self, a: usize, alpha: usize) -> f64 {
        self.momenta[a * self.jet.m() + alpha]
    }

    /// Projection onto the jet factor.
    pub fn jet(&self) -> &JetPoint {
        &self.jet
    }

    /// Projection `W -> W_r` forgetting `p`.
    pub fn restricted(&self) -> UnifiedPoint {
        UnifiedPoint { jet: self.jet.clone(), momenta: self.momenta.clone(), p: None }
    }

    pub fn scalar_momentum(&self) -> Result<f64> {
        self.p.ok_or(Error::MissingScalarMomentum)
    }

    pub fn max_abs_diff(&self, other: &UnifiedPoint) -> f64 {
        let pairs = [
            (&self.jet.x, &other.jet.x),
            (&self.jet.y, &other.jet.y),
            (&self.jet.v, &other.jet.v),
            (&self.momenta, &other.momenta),
        ];
        let mut worst = pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(u, w)| (u - w).abs()))
            .fold(0.0, f64::max);
        match (self.p, other.p) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            _ => return f64::INFINITY,
        }
        worst
    }
}

impl Valuation for UnifiedPoint {
    fn value(&self, c: Coord) -> Option<f64> {
        let i = c.index();
        let jet_dim = self.jet.x.len() + self.jet.y.len() + self.jet.v.len();
        if i < jet_dim {
            self.jet.value(c)
        } else if i < jet_dim + self.momenta.len() {
            Some(self.momenta[i - jet_dim])
        } else if i == jet_dim + self.momenta.len() {
            self.p
        } else {
            None
        }
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what} has {got} entries, chart expects {want}")))
    }
}
