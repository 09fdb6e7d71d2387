//! CSV and JSON writers for fields, residuals, empirical CDFs and reports.
//!
//! CSV schemas:
//! * fields: `t,a,n,F`
//! * residuals: `t,a,n,residual,normalized_residual`
//! * cdf: `a,F_hat,stderr`

use crate::error::Result;
use crate::grid::GridField;
use crate::hirota::ResidualField;
use serde::Serialize;
use serde_json::json;
use std::io::Write;

pub fn write_field_csv<W: Write>(mut w: W, f: &GridField) -> Result<()> {
    writeln!(w, "t,a,n,F")?;
    let s = f.shape();
    for i in 0..s[0] {
        for j in 0..s[1] {
            for k in 0..s[2] {
                let c = f.coords([i, j, k]);
                writeln!(w, "{},{},{},{:.17e}", c[0], c[1], c[2], f.get([i, j, k]))?;
            }
        }
    }
    Ok(())
}

pub fn field_json(f: &GridField) -> serde_json::Value {
    let s = f.shape();
    let mut points = Vec::new();
    for i in 0..s[0] {
        for j in 0..s[1] {
            for k in 0..s[2] {
                let c = f.coords([i, j, k]);
                points.push(json!({"t": c[0], "a": c[1], "n": c[2], "F": f.get([i,j,k])}));
            }
        }
    }
    json!({"schema": 1, "axes": f.axes, "points": points})
}

pub fn write_residual_csv<W: Write>(mut w: W, r: &ResidualField) -> Result<()> {
    writeln!(w, "t,a,n,residual,normalized_residual")?;
    let s = r.raw.shape();
    for i in 0..s[0] {
        for j in 0..s[1] {
            for k in 0..s[2] {
                let c = r.raw.coords([i, j, k]);
                writeln!(
                    w,
                    "{},{},{},{:.17e},{:.17e}",
                    c[0],
                    c[1],
                    c[2],
                    r.raw.get([i, j, k]),
                    r.normalized.get([i, j, k])
                )?;
            }
        }
    }
    Ok(())
}

pub fn residual_json(r: &ResidualField) -> serde_json::Value {
    let s = r.raw.shape();
    let mut points = Vec::new();
    for i in 0..s[0] {
        for j in 0..s[1] {
            for k in 0..s[2] {
                let c = r.raw.coords([i, j, k]);
                points.push(json!({
                    "t": c[0], "a": c[1], "n": c[2],
                    "residual": r.raw.get([i,j,k]),
                    "normalized_residual": r.normalized.get([i,j,k])
                }));
            }
        }
    }
    json!({
        "schema": 1,
        "max_abs_residual": r.max_abs_raw,
        "max_abs_normalized": r.max_abs_normalized,
        "points": points
    })
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    Ok(())
}
