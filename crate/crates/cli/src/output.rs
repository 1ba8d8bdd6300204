//! JSON and CSV renderings of command results.

use num_complex::Complex64;
use qzeros::numlin::{CMatrix, ZeroSet};
use qzeros::report::Check;
use qzeros::zeroflow::Trajectory;
use qzeros::Params;
use serde_json::{json, Value};

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn complex_list(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex(z)).collect())
}

pub fn family_name(params: &Params) -> &'static str {
    match params {
        Params::AskeyWilson(_) => "aw",
        Params::QRacah(_) => "racah",
    }
}

pub fn params_json(params: &Params) -> Value {
    match params {
        Params::AskeyWilson(p) => json!({
            "a": complex(p.a), "b": complex(p.b), "c": complex(p.c), "d": complex(p.d), "q": complex(p.q),
        }),
        Params::QRacah(p) => json!({
            "alpha": complex(p.alpha), "beta": complex(p.beta), "gamma": complex(p.gamma),
            "delta": complex(p.delta), "q": complex(p.q),
        }),
    }
}

pub fn checks_json(checks: &[Check]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "pass": c.pass,
                    "refs": c.refs,
                })
            })
            .collect(),
    )
}

pub fn matrix_json(m: &CMatrix) -> Value {
    Value::Array((0..m.dim()).map(|i| complex_list(m.row(i))).collect())
}

/// A rendered result: either a JSON document or a table of CSV rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn render(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn checks_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["name", "residual", "tolerance", "pass", "refs"]);
    for c in checks {
        t.rows.push(vec![c.name.clone(), num(c.residual), num(c.tolerance), c.pass.to_string(), c.refs.join(";")]);
    }
    t
}

pub fn zeros_table(zs: &ZeroSet) -> Table {
    let mut t = Table::new(&["index", "z_re", "z_im", "x_re", "x_im", "residual"]);
    for (i, z) in zs.zbar.iter().enumerate() {
        let (xr, xi) = zs.xbar.get(i).map_or((String::new(), String::new()), |x| (num(x.re), num(x.im)));
        t.rows.push(vec![(i + 1).to_string(), num(z.re), num(z.im), xr, xi, num(zs.residuals[i])]);
    }
    t
}

pub fn matrix_table(m: &CMatrix) -> Table {
    let mut t = Table::new(&["row", "col", "re", "im"]);
    for i in 0..m.dim() {
        for (j, v) in m.row(i).iter().enumerate() {
            t.rows.push(vec![(i + 1).to_string(), (j + 1).to_string(), num(v.re), num(v.im)]);
        }
    }
    t
}

pub fn spectrum_table(predicted: &[Complex64], computed: Option<&[Complex64]>) -> Table {
    let mut t = Table::new(&["index", "predicted_re", "predicted_im", "computed_re", "computed_im", "gap"]);
    for (i, p) in predicted.iter().enumerate() {
        let (cr, ci, gap) = match computed {
            Some(c) => (num(c[i].re), num(c[i].im), num((c[i] - p).norm())),
            None => (String::new(), String::new(), String::new()),
        };
        t.rows.push(vec![(i + 1).to_string(), num(p.re), num(p.im), cr, ci, gap]);
    }
    t
}

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let n = traj.states.first().map_or(0, |s| s.positions.len());
    let mut header = vec!["step".to_string(), "t".to_string()];
    for k in 1..=n {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    let mut t = Table { header, rows: Vec::new() };
    for (step, s) in traj.states.iter().enumerate() {
        let mut row = vec![step.to_string(), num(s.time)];
        for p in &s.positions {
            row.push(num(p.re));
            row.push(num(p.im));
        }
        t.rows.push(row);
    }
    t
}

pub fn trajectory_json(traj: &Trajectory) -> Value {
    Value::Array(
        traj.states
            .iter()
            .enumerate()
            .map(|(step, s)| json!({ "step": step, "t": s.time, "positions": complex_list(&s.positions) }))
            .collect(),
    )
}
