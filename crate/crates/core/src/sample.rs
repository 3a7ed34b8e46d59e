//! Seeded random points for the identity checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bundles::{JetPoint, UnifiedPoint};
use crate::symbolic::Chart;

/// Half-widths of the sampling boxes. Velocities and momenta are drawn from
/// Euclidean balls of the given radii, `x` and `y` from cubes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBoxes {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub p: f64,
}

impl Default for SampleBoxes {
    fn default() -> Self {
        SampleBoxes { x: 1.0, y: 1.0, v: 2.0, p: 0.7 }
    }
}

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    pub boxes: SampleBoxes,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), boxes: SampleBoxes::default() }
    }

    pub fn with_boxes(seed: u64, boxes: SampleBoxes) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), boxes }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn in_cube(&mut self, n: usize, half: f64) -> Vec<f64> {
        (0..n).map(|_| self.rng.gen_range(-half..half)).collect()
    }

    /// Uniform in the closed ball of `radius` in `R^n`.
    pub fn in_ball(&mut self, n: usize, radius: f64) -> Vec<f64> {
        let dir: Vec<f64> = (0..n).map(|_| self.rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; n];
        }
        let r = radius * self.rng.gen::<f64>().powf(1.0 / n as f64);
        dir.into_iter().map(|d| d * r / norm).collect()
    }

    pub fn jet_point(&mut self, chart: &Chart) -> JetPoint {
        let b = self.boxes;
        let x = self.in_cube(chart.m(), b.x);
        let y = self.in_cube(chart.n(), b.y);
        let v = self.in_ball(chart.n() * chart.m(), b.v);
        JetPoint { x, y, v }
    }

    pub fn momenta(&mut self, chart: &Chart) -> Vec<f64> {
        self.in_ball(chart.n() * chart.m(), self.boxes.p)
    }

    /// A point of the restricted space `W_r` (no `p`).
    pub fn restricted_point(&mut self, chart: &Chart) -> UnifiedPoint {
        let jet = self.jet_point(chart);
        let momenta = self.momenta(chart);
        UnifiedPoint { jet, momenta, p: None }
    }

    /// A point of `W` with `p` drawn from `[-p_half, p_half]`.
    pub fn full_point(&mut self, chart: &Chart, p_half: f64) -> UnifiedPoint {
        let mut up = self.restricted_point(chart);
        up.p = Some(self.uniform(-p_half, p_half));
        up
    }

    /// A dense valuation of every chart coordinate.
    pub fn chart_values(&mut self, chart: &Chart) -> Vec<f64> {
        let up = self.full_point(chart, 1.0);
        let mut out = up.jet.x;
        out.extend(up.jet.y);
        out.extend(up.jet.v);
        out.extend(up.momenta);
        out.push(up.p.unwrap());
        out
    }
}
