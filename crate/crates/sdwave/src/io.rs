//! Trajectory CSV, line-oriented summaries, and SVG plots. Plots are a
//! convenience layer over the same series that go to the CSV, never a
//! separate computation path.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::solver::Trajectory;

/// Columns: t, c_1..c_N, cdot_1..cdot_N, g, r.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, r: &[(f64, f64)]) -> Result<()> {
    let n = traj.states.first().map(|s| s.c.len()).unwrap_or(0);
    let mut out = String::new();
    out.push('t');
    for k in 1..=n {
        let _ = write!(out, ",c_{k}");
    }
    for k in 1..=n {
        let _ = write!(out, ",cdot_{k}");
    }
    out.push_str(",g,r\n");
    for (i, st) in traj.states.iter().enumerate() {
        let _ = write!(out, "{}", st.t);
        for v in &st.c.coeffs {
            let _ = write!(out, ",{v}");
        }
        for v in &st.c_dot.coeffs {
            let _ = write!(out, ",{v}");
        }
        let g = traj.g_samples.get(i).map(|p| p.1).unwrap_or(f64::NAN);
        let rv = r.get(i).map(|p| p.1).unwrap_or(f64::NAN);
        let _ = writeln!(out, ",{g},{rv}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// `key = value` lines in insertion order.
pub fn write_summary(path: &Path, entries: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
    fs::write(path, out)?;
    Ok(())
}

/// Minimal line plot; enough to eyeball g(t), r(t), and energy decay.
pub fn plot_svg(path: &Path, title: &str, series: &[(&str, &[(f64, f64)])]) -> Result<()> {
    const W: f64 = 860.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0;
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 45.0;
    let colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, pts) in series {
        for (x, y) in pts.iter() {
            if x.is_finite() && y.is_finite() {
                x_min = x_min.min(*x);
                x_max = x_max.max(*x);
                y_min = y_min.min(*y);
                y_max = y_max.max(*y);
            }
        }
    }
    if !x_min.is_finite() || x_max <= x_min {
        x_min = 0.0;
        x_max = 1.0;
    }
    if !y_min.is_finite() || y_max <= y_min {
        let mid = if y_min.is_finite() { y_min } else { 0.0 };
        y_min = mid - 1.0;
        y_max = mid + 1.0;
    }
    let sx = (W - ML - MR) / (x_max - x_min);
    let sy = (H - MT - MB) / (y_max - y_min);
    let px = |x: f64| ML + (x - x_min) * sx;
    let py = |y: f64| H - MB - (y - y_min) * sy;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>",
        ML
    );
    // axes
    let _ = writeln!(
        out,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>",
        H - MB,
        W - MR,
        H - MB
    );
    let _ = writeln!(out, "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"#333\"/>", H - MB);
    for (label, x) in [(x_min, ML), (x_max, W - MR)] {
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{label:.4}</text>",
            H - MB + 16.0
        );
    }
    for (label, y) in [(y_min, H - MB), (y_max, MT)] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{label:.4e}</text>",
            ML - 6.0
        );
    }
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        let mut d = String::new();
        let stride = (pts.len() / 4000).max(1);
        for (j, (x, y)) in pts.iter().step_by(stride).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(*x), py(*y));
        }
        let _ = writeln!(out, "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>");
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>",
            W - MR - 120.0,
            MT + 16.0 * (i as f64 + 1.0)
        );
    }
    let _ = writeln!(out, "</svg>");
    fs::write(path, out)?;
    Ok(())
}
