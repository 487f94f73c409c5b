//! Plain-text output: CSV for curves and scans, JSON for everything else.
//! Floats are written with 17 significant digits.

use std::io::Write;

use ratdyn_core::cocycle::{CocycleTrace, DensityProfile};
use ratdyn_core::conformal::{CellMeasure, CellPartition, PressureCurve, SphereGrid};
use ratdyn_core::dimension::{DimensionReport, LocalDimensionScan};
use ratdyn_core::induced::{AcipResult, InducedMarkovMap};
use ratdyn_core::models::{Angle, Dynamics, Interval};
use ratdyn_core::orbits::BackwardWalk;
use ratdyn_core::partitions::{CylinderTree, FinitePartition};
use serde_json::{json, Map, Value};

/// `x` with 17 significant digits; `nan`, `inf`, `-inf` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A JSON number printed with 17 significant digits (`null` if not finite).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt_f64(x)).expect("formatted float is valid JSON")
    } else {
        Value::Null
    }
}

pub fn num_array(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| num(*x)).collect())
}

fn complex<D: Dynamics>(f: &D, p: &D::Point) -> [f64; 2] {
    match f.to_sphere(p).to_complex() {
        Some(z) => [z.re, z.im],
        None => [f64::INFINITY, f64::INFINITY],
    }
}

pub fn angle(a: &Angle) -> String {
    format!("{}/{}", a.numer(), a.denom())
}

pub fn interval(iv: &Interval) -> Value {
    json!([angle(&iv.lo), angle(&iv.hi)])
}

/// Parses `p/q` or a plain integer.
pub fn parse_angle(s: &str) -> Option<Angle> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i128, i128) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
            (q != 0).then(|| Angle::new(p, q))
        }
        None => s.parse::<i128>().ok().map(Angle::from_integer),
    }
}

/// Parses `lo:hi` with rational endpoints.
pub fn parse_interval(s: &str) -> Option<Interval> {
    let (a, b) = s.split_once(':')?;
    let (lo, hi) = (parse_angle(a)?, parse_angle(b)?);
    (lo < hi).then(|| Interval::new(lo, hi))
}

pub fn cell_measure_json(m: &CellMeasure) -> Value {
    let mut obj = Map::new();
    obj.insert("region".into(), json!(m.partition.region()));
    obj.insert("resolution".into(), json!(m.partition.resolution()));
    if let CellPartition::Sphere { active, .. } = &m.partition {
        obj.insert("active".into(), json!(active));
    }
    obj.insert("weights".into(), num_array(&m.weights));
    Value::Object(obj)
}

pub fn read_cell_measure(v: &Value) -> anyhow::Result<CellMeasure> {
    let region = v["region"].as_str().ok_or_else(|| anyhow::anyhow!("missing region"))?;
    let resolution = v["resolution"].as_u64().ok_or_else(|| anyhow::anyhow!("missing resolution"))? as usize;
    let weights: Vec<f64> = serde_json::from_value(v["weights"].clone())?;
    let partition = match region {
        "circle" | "segment" => CellPartition::Symbolic { resolution, circle: region == "circle" },
        "sphere" => CellPartition::Sphere { grid: SphereGrid::new(resolution)?, active: serde_json::from_value(v["active"].clone())? },
        other => anyhow::bail!("unknown region {other}"),
    };
    Ok(CellMeasure::new(partition, weights)?)
}

fn csv_writer<W: Write>(out: W, header: &[&str]) -> anyhow::Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// Columns `t, P, residual, flag`; the flag is `formal` for `t < 0`.
pub fn write_pressure_csv<W: Write>(out: W, curve: &PressureCurve) -> anyhow::Result<()> {
    let mut w = csv_writer(out, &["t", "P", "residual", "flag"])?;
    for i in 0..curve.ts.len() {
        let flag = if curve.formal[i] { "formal" } else { "ok" };
        w.write_record([fmt_f64(curve.ts[i]), fmt_f64(curve.values[i]), fmt_f64(curve.residuals[i]), flag.into()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn induced_json(imap: &InducedMarkovMap) -> Value {
    let branches: Vec<Value> = imap
        .branches
        .iter()
        .map(|b| {
            json!({
                "domain": interval(&b.domain),
                "n_i": b.return_time,
                "expansion": num(b.expansion),
                "mass": num(b.mass),
                "address": b.address,
                "certified_order": b.certified_order,
            })
        })
        .collect();
    json!({
        "base": interval(&imap.base),
        "extension": interval(&imap.extension),
        "c": num(imap.c),
        "delta": num(imap.delta),
        "unassigned": num(imap.unassigned),
        "depth_reached": imap.depth_reached,
        "branches": branches,
    })
}

/// Columns `cell, density, lower, upper`.
pub fn write_acip_csv<W: Write>(out: W, acip: &AcipResult) -> anyhow::Result<()> {
    let mut w = csv_writer(out, &["cell", "density", "lower", "upper"])?;
    for (i, d) in acip.density.iter().enumerate() {
        w.write_record([i.to_string(), fmt_f64(*d), fmt_f64(acip.lower), fmt_f64(acip.upper)])?;
    }
    w.flush()?;
    Ok(())
}

/// Class index → addresses of its cylinders.
pub fn partition_json(p: &FinitePartition, tree: &CylinderTree) -> Value {
    let mut obj = Map::new();
    for (i, class) in p.classes.iter().enumerate() {
        let addresses: Vec<&Vec<usize>> = class.iter().map(|&q| &tree.nodes[q].address).collect();
        obj.insert(i.to_string(), json!(addresses));
    }
    Value::Object(obj)
}

/// Symbols as a digit string.
pub fn code_text(code: &[u8]) -> String {
    code.iter().map(|c| char::from_digit(*c as u32, 36).unwrap_or('?')).collect()
}

/// Columns `center_re, center_im, slope, ci`.
pub fn write_scan_csv<W: Write, D: Dynamics>(out: W, f: &D, scan: &LocalDimensionScan<D::Point>) -> anyhow::Result<()> {
    let mut w = csv_writer(out, &["center_re", "center_im", "slope", "ci"])?;
    for (i, c) in scan.centers.iter().enumerate() {
        let [re, im] = complex(f, c);
        w.write_record([fmt_f64(re), fmt_f64(im), fmt_f64(scan.slopes[i]), fmt_f64(scan.slope_ci[i])])?;
    }
    w.flush()?;
    Ok(())
}

pub fn dimension_report_json(r: &DimensionReport) -> Value {
    json!({ "target": num(r.target), "median": num(r.median), "spread": num(r.spread), "pass": r.pass })
}

/// Columns `step, partial_sum, abs_sum`.
pub fn write_trace_csv<W: Write, P>(out: W, trace: &CocycleTrace<P>) -> anyhow::Result<()> {
    let mut w = csv_writer(out, &["step", "partial_sum", "abs_sum"])?;
    for (k, (s, a)) in trace.partial_sums.iter().zip(&trace.abs_sums).enumerate() {
        w.write_record([(k + 1).to_string(), fmt_f64(*s), fmt_f64(*a)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `probe, density`; the probe is its symbolic coordinate.
pub fn write_density_csv<W: Write>(out: W, profile: &DensityProfile) -> anyhow::Result<()> {
    let mut w = csv_writer(out, &["probe", "density"])?;
    for (t, d) in profile.thetas.iter().zip(&profile.densities) {
        w.write_record([fmt_f64(*t), fmt_f64(*d)])?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON line per walk: anchor, branch points, log-derivatives, seed.
pub fn write_walks_jsonl<W: Write, D: Dynamics>(mut out: W, f: &D, walks: &[BackwardWalk<D::Point>]) -> anyhow::Result<()> {
    for walk in walks {
        let line = json!({
            "anchor": num_array(&complex(f, &walk.anchor)),
            "branch": walk.branch.iter().map(|p| num_array(&complex(f, p))).collect::<Vec<_>>(),
            "log_derivs": num_array(&walk.log_derivs),
            "seed": walk.seed,
        });
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(serde_json::to_string(&num(2.0)).unwrap(), "2.0000000000000000e+0");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = serde_json::from_value(num(std::f64::consts::PI)).unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_interval("1/4:1/2"), Some(Interval::from_ratios((1, 4), (1, 2))));
        assert_eq!(parse_interval("0:1"), Some(Interval::unit()));
        assert_eq!(parse_interval("1/2:1/4"), None);
        assert_eq!(parse_angle("3/0"), None);
    }

    #[test]
    fn cell_measure_round_trip() {
        let m = CellMeasure::new(CellPartition::Symbolic { resolution: 4, circle: true }, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let back = read_cell_measure(&cell_measure_json(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn pressure_csv_layout() {
        let curve = PressureCurve { ts: vec![-1.0, 0.0], values: vec![1.0, 0.5], residuals: vec![1e-9, 1e-9], formal: vec![true, false] };
        let mut buf = Vec::new();
        write_pressure_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,P,residual,flag");
        assert!(lines[1].ends_with(",formal") && lines[2].ends_with(",ok"));
    }
}
