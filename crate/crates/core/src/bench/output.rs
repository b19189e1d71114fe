//! Result rows, CSV tables and log-log plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One line of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub example: String,
    pub variant: String,
    pub alpha1: f64,
    pub alpha2: f64,
    pub level: usize,
    pub depth: usize,
    pub solver: String,
    pub ncoarse: usize,
    pub interfaces: usize,
    pub tol: f64,
    pub dofs: usize,
    pub elements: usize,
    pub l2_error: Option<f64>,
    pub energy_error: Option<f64>,
    pub kappa: Option<f64>,
    pub iterations: usize,
    pub rho_star: Option<f64>,
    pub wall_time: f64,
}

/// Column names, in field order.
pub const CSV_HEADER: [&str; 18] = [
    "example",
    "variant",
    "alpha1",
    "alpha2",
    "level",
    "depth",
    "solver",
    "ncoarse",
    "interfaces",
    "tol",
    "dofs",
    "elements",
    "l2_error",
    "energy_error",
    "kappa",
    "iterations",
    "rho_star",
    "wall_time",
];

pub fn write_csv<W: Write>(rows: &[BenchmarkRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchmarkRow>> {
    let mut rd = csv::Reader::from_reader(r);
    Ok(rd.deserialize().collect::<std::result::Result<_, _>>()?)
}

const PALETTE: [&str; 6] = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6a4c93", "#444444"];

/// Log-log plot of error against condition number, one polyline per
/// (variant, coefficients, solver) series. Rows without both values are skipped.
pub fn svg_error_vs_kappa(rows: &[BenchmarkRow], energy: bool) -> Option<String> {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        let err = if energy { r.energy_error } else { r.l2_error };
        if let (Some(k), Some(e)) = (r.kappa, err) {
            if k > 0.0 && e > 0.0 {
                let key = format!("{} a=({:e},{:e})", r.variant, r.alpha1, r.alpha2);
                series.entry(key).or_default().push((k.log10(), e.log10()));
            }
        }
    }
    if series.is_empty() {
        return None;
    }
    let pts = series.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in pts {
        x0 = x0.min(x.floor());
        x1 = x1.max(x.ceil());
        y0 = y0.min(y.floor());
        y1 = y1.max(y.ceil());
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let (w, h, m) = (640.0, 480.0, 60.0);
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * m,
        h - 2.0 * m
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = sx(d as f64);
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#, h - m + 16.0);
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(d as f64);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, m - 6.0, y + 4.0);
    }
    let ylabel = if energy { "energy error" } else { "L2 error" };
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">condition number</text>"#, w / 2.0, h - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{ylabel}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = m + 14.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}">{name}</text>"#, m + 8.0);
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// Writes `<stem>.csv` and, when rows carry both errors and condition numbers,
/// `<stem>_l2.svg` and `<stem>_energy.svg`. Returns the written paths.
pub fn emit_outputs(rows: &[BenchmarkRow], dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_csv(rows, std::fs::File::create(&csv_path)?)?;
    let mut out = vec![csv_path];
    for (energy, suffix) in [(false, "l2"), (true, "energy")] {
        if let Some(svg) = svg_error_vs_kappa(rows, energy) {
            let p = dir.join(format!("{stem}_{suffix}.svg"));
            std::fs::write(&p, svg)?;
            out.push(p);
        }
    }
    Ok(out)
}
