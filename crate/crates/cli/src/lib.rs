//! Command implementations behind the `unifield` binary.
//!
//! Every command writes its report to a caller-supplied writer and returns
//! whether all of its checks passed; errors map to exit code 2.

pub mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use unifield::bundles::{JetPoint, LagrangianProblem};
use unifield::checks::{run_checks, CheckOptions};
use unifield::exterior::{unified_omega_expanded, unified_theta, Form};
use unifield::field_eqs::el_operator;
use unifield::solver::{
    read_section_csv, residual_report, solve_dirichlet, write_report_csv, write_section_csv, DiscreteSection,
    FamilySummary, ResidualReport,
};
use unifield::symbolic::{Chart, Expr, Point};

pub use config::ProblemConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] unifield::Error),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl CliError {
    fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

/// Exit status for a finished command.
pub fn exit_code(outcome: &Result<bool, CliError>) -> i32 {
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(_) => 2,
    }
}

fn form_table(out: &mut String, chart: &Chart, form: &Form) {
    for (key, coef) in form.terms() {
        let basis: Vec<String> = key.iter().map(|k| format!("d{}", chart.name(*k))).collect();
        let _ = writeln!(out, "  {:<20} {}", basis.join("^"), coef.display(chart));
    }
}

fn is_const(e: &Expr, c: f64) -> bool {
    e.as_const() == Some(c)
}

/// `sum principal * y_{alpha nu} = lower`, merging the two orderings of
/// each mixed derivative.
fn el_equation(chart: &Chart, a: usize, principal: &[Expr], lower: &Expr) -> String {
    let (m, n) = (chart.m(), chart.n());
    let mut terms = Vec::new();
    for b in 0..n {
        for al in 0..m {
            for nu in al..m {
                let mut coef = principal[(b * m + al) * m + nu].clone();
                if nu != al {
                    coef = coef + &principal[(b * m + nu) * m + al];
                }
                if is_const(&coef, 0.0) {
                    continue;
                }
                let d2 = format!("{}_{}{}", chart.name(chart.y(b)), al + 1, nu + 1);
                terms.push(if is_const(&coef, 1.0) { d2 } else { format!("({}) * {d2}", coef.display(chart)) });
            }
        }
    }
    let lhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
    format!("  field {}: {lhs} = {}", chart.name(chart.y(a)), lower.display(chart))
}

/// Symbolic report of everything derived from the Lagrangian.
pub fn cmd_derive(cfg: &ProblemConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let prob = cfg.build_problem()?;
    let c = prob.chart();
    let (m, n) = (c.m(), c.n());
    let mut s = String::new();
    let _ = writeln!(s, "Lagrangian (m = {m}, N = {n})\n  L = {}", prob.lagrangian().display(c));

    let _ = writeln!(s, "\nLegendre map");
    for a in 0..n {
        for al in 0..m {
            let _ = writeln!(s, "  {} = {}", c.name(c.momentum(a, al)), prob.dl_dv(a, al).display(c));
        }
    }
    let mut p = prob.lagrangian().clone();
    for a in 0..n {
        for al in 0..m {
            p = p - Expr::var(c.v(a, al)) * prob.dl_dv(a, al);
        }
    }
    let _ = writeln!(s, "  {} = {}", c.name(c.p()), p.display(c));

    let origin = JetPoint::at_velocity(c, vec![0.0; n * m])?;
    let reg = prob.regularity(&origin)?;
    let _ = writeln!(s, "\nHessian d2L/dv dv at x = 0, y = 0, v = 0");
    for i in 0..reg.hessian.nrows() {
        let row: Vec<String> = reg.hessian.row(i).iter().map(|v| format!("{v:>12.6}")).collect();
        let _ = writeln!(s, "  [{}]", row.join(" "));
    }
    let _ = writeln!(s, "  det = {:.6e} ({})", reg.det, if reg.regular { "regular" } else { "singular" });

    let _ = writeln!(s, "\nHamiltonian on the restricted space\n  H^ = {}", prob.hamiltonian_hat_expr().display(c));

    let _ = writeln!(s, "\nTheta_0 coefficients");
    form_table(&mut s, c, &unified_theta(c, prob.lagrangian())?);
    let _ = writeln!(s, "\nOmega_0 coefficients");
    form_table(&mut s, c, &unified_omega_expanded(c, prob.lagrangian())?);

    let _ = writeln!(s, "\nEuler-Lagrange equations (yA_ij = d2yA/dxi dxj)");
    for (a, op) in el_operator(&prob).iter().enumerate() {
        let _ = writeln!(s, "{}", el_equation(c, a, &op.principal, &op.lower));
    }

    if let Some(h) = prob.hamiltonian() {
        let _ = writeln!(s, "\nHamilton-De Donder-Weyl equations\n  H = {}", h.display(c));
        for a in 0..n {
            for al in 0..m {
                let dp = h.diff(c.momentum(a, al));
                let _ = writeln!(s, "  d{}/dx{} = {}", c.name(c.y(a)), al + 1, dp.display(c));
            }
            let div: Vec<String> =
                (0..m).map(|al| format!("d{}/dx{}", c.name(c.momentum(a, al)), al + 1)).collect();
            let _ = writeln!(s, "  {} = {}", div.join(" + "), (-h.diff(c.y(a))).display(c));
        }
    }
    out.write_all(s.as_bytes()).map_err(CliError::io("writing report"))?;
    Ok(true)
}

/// Runs the identity suites; `Ok(false)` when any check fails.
pub fn cmd_check(cfg: &ProblemConfig, opts: &CheckOptions, out: &mut dyn Write) -> Result<bool, CliError> {
    let prob = cfg.build_problem()?;
    let results = run_checks(&prob, opts)?;
    let mut s = format!("checks for L = {} (seed {})\n", prob.lagrangian().display(prob.chart()), opts.seed);
    for r in &results {
        let _ = writeln!(s, "{}", r.summary());
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    let _ = writeln!(s, "{} passed, {} failed", results.len() - failed.len(), failed.len());
    if !failed.is_empty() {
        let _ = writeln!(s, "failing: {}", failed.join(", "));
    }
    out.write_all(s.as_bytes()).map_err(CliError::io("writing report"))?;
    Ok(failed.is_empty())
}

fn write_summary(s: &mut String, report: &ResidualReport) {
    if let Some(st) = report.stats {
        let _ = writeln!(s, "newton iterations: {}, final residual {:.3e}", st.iterations, st.residual);
    }
    let _ = writeln!(s, "{:<10} {:>12} {:>12}", "family", "max", "rms");
    let rows: [(&str, FamilySummary); 6] = [
        ("el", report.el),
        ("hdw_y", report.hdw_y),
        ("hdw_p", report.hdw_p),
        ("w0", report.w0),
        ("w1", report.w1),
        ("holonomy", report.holonomy),
    ];
    for (name, f) in rows {
        let _ = writeln!(s, "{name:<10} {:>12.3e} {:>12.3e}", f.max, f.rms);
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(format!("creating {}", path.display())))
}

fn max_error(cfg: &ProblemConfig, prob: &LagrangianProblem, ds: &DiscreteSection, exact: &str) -> Result<f64, CliError> {
    let c = prob.chart();
    let e = cfg.expr(c, "domain.exact", exact)?;
    let g = ds.grid();
    let mut worst = 0.0f64;
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        let [a, b] = g.coord(i, j);
        let want = e.eval(&Point::empty(c).with(c.x(0), a).with(c.x(1), b)).map_err(unifield::Error::from)?;
        worst = worst.max((ds.y_at(k, 0) - want).abs());
    }
    Ok(worst)
}

fn emit_report(cfg: &ProblemConfig, report: &ResidualReport, fields: usize, s: &mut String) -> Result<(), CliError> {
    if let Some(path) = cfg.output_path(&cfg.output.report) {
        write_report_csv(create(&path)?, report, fields)?;
        let _ = writeln!(s, "wrote {}", path.display());
    }
    Ok(())
}

/// Dirichlet solve, residual report and CSV output.
pub fn cmd_solve(cfg: &ProblemConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let prob = cfg.build_problem()?;
    let grid = cfg.grid()?;
    let opts = cfg.solve_options()?;
    let d = cfg.domain()?;
    let boundary = cfg.expr(prob.chart(), "domain.boundary", &d.boundary)?;
    let (ds, stats) = solve_dirichlet(&prob, grid, &boundary, opts)?;
    let report = residual_report(&prob, &ds, Some(stats))?;

    let mut s = format!(
        "grid {}x{} on [{}, {}] x [{}, {}]\n",
        grid.nodes[0], grid.nodes[1], grid.lo[0], grid.hi[0], grid.lo[1], grid.hi[1]
    );
    write_summary(&mut s, &report);
    if let Some(exact) = &d.exact {
        let _ = writeln!(s, "max |y - exact| = {:.3e}", max_error(cfg, &prob, &ds, exact)?);
    }
    if let Some(path) = cfg.output_path(&cfg.output.section) {
        write_section_csv(create(&path)?, &prob, &ds)?;
        let _ = writeln!(s, "wrote {}", path.display());
    }
    emit_report(cfg, &report, ds.fields(), &mut s)?;
    out.write_all(s.as_bytes()).map_err(CliError::io("writing summary"))?;
    Ok(true)
}

/// Residual report for a previously written section file.
pub fn cmd_report(section: &Path, cfg: &ProblemConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let prob = cfg.build_problem()?;
    let file = File::open(section).map_err(CliError::io(format!("opening {}", section.display())))?;
    let ds = read_section_csv(file, &prob)?;
    let report = residual_report(&prob, &ds, None)?;
    let g = ds.grid();
    let mut s = format!("section {} ({}x{} nodes)\n", section.display(), g.nodes[0], g.nodes[1]);
    write_summary(&mut s, &report);
    emit_report(cfg, &report, ds.fields(), &mut s)?;
    out.write_all(s.as_bytes()).map_err(CliError::io("writing summary"))?;
    Ok(true)
}
