//! The TOML problem description.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use unifield::bundles::LagrangianProblem;
use unifield::checks::CheckOptions;
use unifield::sample::SampleBoxes;
use unifield::solver::{Grid, SolveOptions};
use unifield::symbolic::{parse, Chart, Expr};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub problem: ProblemSection,
    pub domain: Option<DomainSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory relative paths in `output` are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub m: usize,
    pub n: usize,
    pub lagrangian: String,
    pub hamiltonian: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    pub nodes: [usize; 2],
    pub boundary: String,
    /// Known exact solution, compared against in the solve summary.
    pub exact: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverSection { tol: d.tol, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    pub seed: u64,
    pub points: usize,
    pub x_box: f64,
    pub y_box: f64,
    pub v_box: f64,
    pub p_box: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        let b = SampleBoxes::default();
        let d = CheckOptions::default();
        CheckSection { seed: d.seed, points: d.points, x_box: b.x, y_box: b.y, v_box: b.v, p_box: b.p }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub section: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<ProblemConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ProblemConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn chart(&self) -> Result<Chart, CliError> {
        Chart::new(self.problem.m, self.problem.n).map_err(|e| CliError::Config(format!("problem: {e}")))
    }

    pub fn expr(&self, chart: &Chart, key: &str, text: &str) -> Result<Expr, CliError> {
        parse(text, chart).map_err(|e| CliError::Config(format!("{key}: {e} in `{text}`")))
    }

    pub fn build_problem(&self) -> Result<LagrangianProblem, CliError> {
        let chart = self.chart()?;
        let l = self.expr(&chart, "problem.lagrangian", &self.problem.lagrangian)?;
        let mut prob = LagrangianProblem::new(chart.clone(), l)?;
        if let Some(h) = &self.problem.hamiltonian {
            prob = prob.with_hamiltonian(self.expr(&chart, "problem.hamiltonian", h)?)?;
        }
        Ok(prob)
    }

    pub fn domain(&self) -> Result<&DomainSection, CliError> {
        self.domain.as_ref().ok_or_else(|| CliError::Config("missing [domain] section".into()))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let d = self.domain()?;
        Grid::new([d.x1[0], d.x2[0]], [d.x1[1], d.x2[1]], d.nodes)
            .map_err(|e| CliError::Config(format!("domain: {e}")))
    }

    pub fn solve_options(&self) -> Result<SolveOptions, CliError> {
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_iter == 0 {
            return Err(CliError::Config("solver: tol must be positive and max_iter at least 1".into()));
        }
        Ok(SolveOptions { tol: s.tol, max_iter: s.max_iter, ..SolveOptions::default() })
    }

    pub fn check_options(&self) -> CheckOptions {
        let c = &self.check;
        CheckOptions {
            seed: c.seed,
            points: c.points,
            boxes: SampleBoxes { x: c.x_box, y: c.y_box, v: c.v_box, p: c.p_box },
            inject_sign_error: false,
        }
    }

    pub fn output_path(&self, p: &Option<PathBuf>) -> Option<PathBuf> {
        p.as_ref().map(|p| if p.is_absolute() { p.clone() } else { self.base_dir.join(p) })
    }
}
