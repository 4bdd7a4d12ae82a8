//! CSV export. Floats are written with 17 significant digits.

use num_complex::Complex64;

use crate::deform::{FoldedProfile, JumpMatch, UField};
use crate::error::{Error, Result};
use crate::model::{BranchSet, ChargeReport, ShockEvent};
use crate::shock::ComplexShockRoot;

/// Format a float so that it round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A header row and string cells, ready to write.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| fmt_f64(*v)).collect());
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

pub fn branch_set_table(bs: &BranchSet) -> Table {
    let mut t = Table::new(&["x", "branch_id", "re_w", "im_w"]);
    for (j, node) in bs.samples.iter().enumerate() {
        let x = bs.grid.node(j);
        for s in node {
            t.rows.push(vec![
                fmt_f64(x),
                s.branch_id.to_string(),
                fmt_f64(s.w.re),
                fmt_f64(s.w.im),
            ]);
        }
    }
    t
}

pub fn events_table(events: &[ShockEvent]) -> Table {
    let mut t = Table::new(&["t_s", "x_s", "re_x0", "im_x0", "kind", "system"]);
    for e in events {
        t.rows.push(vec![
            fmt_f64(e.t_s),
            fmt_f64(e.x_s),
            fmt_f64(e.x0_seed.re),
            fmt_f64(e.x0_seed.im),
            label(&e.kind),
            label(&e.system),
        ]);
    }
    t
}

fn label<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn field_table(f: &UField) -> Table {
    let mut t = Table::new(&["x", "re_u", "im_u", "re_ux", "im_ux"]);
    for j in 0..f.x.len() {
        t.push_floats(&[f.x[j], f.u[j].re, f.u[j].im, f.u_x[j].re, f.u_x[j].im]);
    }
    t
}

pub fn complex_series_table(x: &[f64], name: &str, v: &[Complex64]) -> Table {
    let (re, im) = (format!("re_{name}"), format!("im_{name}"));
    let mut t = Table::new(&["x", &re, &im]);
    for (x, v) in x.iter().zip(v) {
        t.push_floats(&[*x, v.re, v.im]);
    }
    t
}

pub fn folded_table(f: &FoldedProfile) -> Table {
    let mut t = Table::new(&["s", "label", "x", "re_u", "im_u"]);
    for s in &f.samples {
        t.push_floats(&[s.s, s.label, s.x, s.u.re, s.u.im]);
    }
    t
}

pub fn jump_table(j: &JumpMatch) -> Table {
    let mut t = Table::new(&["x", "re_u_hat", "im_u_hat", "re_u_tilde", "im_u_tilde"]);
    for k in 0..j.x.len() {
        t.push_floats(&[j.x[k], j.u_hat[k].re, j.u_hat[k].im, j.u_tilde[k].re, j.u_tilde[k].im]);
    }
    t
}

pub fn charge_table(r: &ChargeReport) -> Table {
    let mut t = Table::new(&["t", "kappa", "re_I", "im_I", "drift", "post_shock"]);
    for s in &r.samples {
        let mut row: Vec<String> = [s.t, s.kappa, s.value.re, s.value.im, s.drift]
            .iter()
            .map(|v| fmt_f64(*v))
            .collect();
        row.push(s.post_shock.to_string());
        t.rows.push(row);
    }
    t
}

pub fn roots_table(roots: &[ComplexShockRoot]) -> Table {
    let mut t = Table::new(&["re_x0", "im_x0", "t_s", "x_s", "residual"]);
    for r in roots {
        t.push_floats(&[r.x0.re, r.x0.im, r.t_s, r.x_s, r.residual]);
    }
    t
}
