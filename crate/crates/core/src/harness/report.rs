//! Writing reports as JSON, CSV rows of verdicts, or plain `x y` tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Check, DimensionRecord, Format, TheoremReport};
use crate::error::Result;

/// Write `report` into `dir` (created if missing) and return the files written.
///
/// * `json`: `report.json`
/// * `csv`: `report.csv`, one row per check
/// * `plotdata`: `.dat` tables of the log-log fits, radius trends, exponent
///   ratios and Frostman energies
pub fn emit_report(report: &TheoremReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match format {
        Format::Json => {
            let file = dir.join("report.json");
            fs::write(&file, report.to_json()? + "\n")?;
            Ok(vec![file])
        }
        Format::Csv => {
            let file = dir.join("report.csv");
            fs::write(&file, write_csv(report))?;
            Ok(vec![file])
        }
        Format::Plotdata => {
            let mut files = Vec::new();
            for (name, body) in write_plotdata(report) {
                let file = dir.join(name);
                fs::write(&file, body)?;
                files.push(file);
            }
            Ok(files)
        }
    }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn t0_text(coords: &[f64]) -> String {
    coords.iter().map(|c| num(*c)).collect::<Vec<_>>().join(";")
}

fn check_row(out: &mut String, scope: &str, t0: &[f64], seed: &str, c: &Check) {
    let _ = writeln!(
        out,
        "{scope},{},{seed},{},{},{},{},{},{}",
        t0_text(t0),
        c.name,
        num(c.value),
        num(c.lo),
        num(c.hi),
        num(c.tol),
        c.pass
    );
}

/// Verdict table: per-seed rows (`scope = entry`) then median rows (`scope = aggregate`).
pub fn write_csv(report: &TheoremReport) -> String {
    let mut out = String::from("scope,t0,seed,check,value,lo,hi,tol,pass\n");
    for e in &report.entries {
        for c in &e.checks {
            check_row(&mut out, "entry", e.t0.coords(), &e.seed.to_string(), c);
        }
    }
    for a in &report.aggregates {
        for c in &a.checks {
            check_row(&mut out, "aggregate", a.t0.coords(), "median", c);
        }
    }
    out
}

fn fit_table(rec: &DimensionRecord) -> String {
    let mut out = String::from("# radius ln(1/delta) ln(count) in_window\n");
    for re in &rec.estimates {
        let e = &re.estimate;
        for (k, (delta, count)) in e.scales.iter().zip(&e.counts).enumerate() {
            let inside = (e.window[0]..e.window[1]).contains(&k) as u8;
            let radius = re.radius.map_or("all".to_string(), num);
            let _ = writeln!(out, "{radius} {} {} {inside}", num(-delta.ln()), num((*count as f64).ln()));
        }
    }
    out
}

/// File names and contents of the plot tables.
pub fn write_plotdata(report: &TheoremReport) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for e in &report.entries {
        let tag = format!("t{}_s{}", e.t0_index, e.seed);
        for (what, rec) in [("graph", &e.graph), ("range", &e.range)] {
            if let Some(rec) = rec {
                files.push((format!("fit_{what}_{tag}.dat"), fit_table(rec)));
            }
        }
        let x = &e.exponents;
        let mut out = String::from("# rho inf_ratio sup_ratio\n");
        for ((r, lo), hi) in x.rho_ladder.iter().zip(&x.inf_ratio).zip(&x.sup_ratio) {
            let _ = writeln!(out, "{} {} {}", num(*r), num(*lo), num(*hi));
        }
        files.push((format!("ratios_{tag}.dat"), out));
    }
    for a in &report.aggregates {
        for (what, trend) in [("graph", &a.graph_trend), ("range", &a.range_trend)] {
            if trend.is_empty() {
                continue;
            }
            let mut out = String::from("# rho median_dimension\n");
            for [r, v] in trend {
                let _ = writeln!(out, "{} {}", num(*r), num(*v));
            }
            files.push((format!("trend_{what}_t{}.dat", a.t0_index), out));
        }
    }
    if let Some(f) = &report.frostman {
        let mut out = String::from("# beta");
        for n in &f.level_points {
            let _ = write!(out, " energy_{n}");
        }
        out.push('\n');
        for (b, beta) in f.betas.iter().enumerate() {
            out.push_str(&num(*beta));
            for level in &f.energies_by_level {
                let _ = write!(out, " {}", num(level[b]));
            }
            out.push('\n');
        }
        files.push(("frostman.dat".into(), out));
    }
    files
}
