use std::io::{Read, Write};

use crate::bundles::LagrangianProblem;
use crate::error::{Error, Result};

use super::grid::{DiscreteSection, Grid};
use super::report::ResidualReport;

/// Report columns for a single field.
pub const REPORT_HEADER: &str = "x1,x2,res_el_1,res_hdw_y_1,res_hdw_p_1,res_w0,res_w1_max,res_hol_max";

fn num(x: f64) -> String {
    // 17 significant digits round-trip every f64
    format!("{x:.16e}")
}

/// Writes every node of `ds`, row-major, with columns
/// `x1,x2,y..,v..,p_A^alpha..,p`.
pub fn write_section_csv<W: Write>(out: W, prob: &LagrangianProblem, ds: &DiscreteSection) -> Result<()> {
    let c = prob.chart();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = c.base_coords().map(|k| c.name(k)).collect();
    header.extend(c.field_coords().map(|k| c.name(k)));
    header.extend(c.velocity_coords().map(|k| c.name(k)));
    header.extend(c.momentum_coords().map(|k| c.name(k)));
    header.push(c.name(c.p()));
    w.write_record(&header)?;
    let g = ds.grid();
    for k in 0..g.len() {
        let (i, j) = g.ij(k);
        let mut row: Vec<String> = g.coord(i, j).iter().map(|x| num(*x)).collect();
        row.extend((0..ds.fields()).map(|a| num(ds.y_at(k, a))));
        row.extend(ds.v_at(k).iter().map(|x| num(*x)));
        row.extend(ds.momenta_at(k).iter().map(|x| num(*x)));
        row.push(num(ds.p_at(k)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a section file back. Only the coordinate and `y` columns are used;
/// derived columns are recomputed.
pub fn read_section_csv<R: Read>(input: R, prob: &LagrangianProblem) -> Result<DiscreteSection> {
    let c = prob.chart();
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Csv(format!("missing column `{name}`")))
    };
    let xs = [col("x1")?, col("x2")?];
    let ys: Vec<usize> = c.field_coords().map(|k| col(c.name(k))).collect::<Result<_>>()?;

    let mut coords = Vec::new();
    let mut y = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            let s = rec.get(i).ok_or_else(|| Error::Csv(format!("row {} is short", line + 2)))?;
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Csv(format!("row {}: `{s}` is not a number", line + 2)))
        };
        coords.push([field(xs[0])?, field(xs[1])?]);
        for &i in &ys {
            y.push(field(i)?);
        }
    }
    if coords.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    let n2 = coords.iter().take_while(|p| p[0] == coords[0][0]).count();
    if n2 == 0 || coords.len() % n2 != 0 {
        return Err(Error::Csv(format!("{} rows do not form a row-major rectangular grid", coords.len())));
    }
    let n1 = coords.len() / n2;
    let last = coords[coords.len() - 1];
    let grid = Grid::new(coords[0], last, [n1, n2])?;
    let scale = 1e-12 * (1.0 + grid.lo.iter().chain(&grid.hi).fold(0.0f64, |m, v| m.max(v.abs())));
    for (k, p) in coords.iter().enumerate() {
        let (i, j) = grid.ij(k);
        let q = grid.coord(i, j);
        if (p[0] - q[0]).abs() > scale || (p[1] - q[1]).abs() > scale {
            return Err(Error::Csv(format!(
                "row {} at ({}, {}) is off the uniform grid node ({}, {})",
                k + 2,
                p[0],
                p[1],
                q[0],
                q[1]
            )));
        }
    }
    DiscreteSection::new(prob, grid, y)
}

/// Writes one row per interior node.
pub fn write_report_csv<W: Write>(out: W, report: &ResidualReport, fields: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x1".to_string(), "x2".to_string()];
    for family in ["res_el", "res_hdw_y", "res_hdw_p"] {
        header.extend((1..=fields).map(|a| format!("{family}_{a}")));
    }
    header.extend(["res_w0", "res_w1_max", "res_hol_max"].map(String::from));
    w.write_record(&header)?;
    for r in &report.nodes {
        let mut row = vec![num(r.x[0]), num(r.x[1])];
        row.extend(r.el.iter().chain(&r.hdw_y).chain(&r.hdw_p).map(|v| num(*v)));
        row.extend([num(r.w0), num(r.w1_max), num(r.hol_max)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
