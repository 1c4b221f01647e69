//! Static SVG figures.
//!
//! Each figure is written as `<name>.svg` plus `<name>.csv` holding exactly the
//! plotted points, so the images can be diffed and re-plotted elsewhere.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cldbs_core::control::SimulationTrace;
use cldbs_core::dsp::TimeSeries;
use cldbs_core::experiment::ComparisonRow;
use cldbs_core::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 360.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

/// Series longer than this are reduced to per-bucket min/max pairs.
pub const MAX_POINTS: usize = 4000;

const PALETTE: [&str; 4] = ["#4d4d4d", "#1f77b4", "#d62728", "#2ca02c"];

type Metric = fn(&ComparisonRow) -> Option<f64>;

/// A horizontal reference line.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub label: String,
    pub value: f64,
}

/// Renders one line plot per trace column. ARV gets the `targets` lines.
pub fn render_trace_plots(trace: &SimulationTrace, targets: &[Reference], out: &Path) -> Result<Vec<PathBuf>> {
    trace.check_aligned()?;
    if trace.is_empty() {
        return Err(Error::Argument("cannot plot an empty trace".into()));
    }
    let figures: [(&str, &str, &TimeSeries, &[Reference]); 5] = [
        ("raw_lfp", "Raw LFP (µV)", &trace.raw_lfp, &[]),
        ("beta_lfp", "Beta-band LFP (µV)", &trace.beta_lfp, &[]),
        ("beta_arv", "Beta ARV (µV)", &trace.beta_arv, targets),
        ("amplitude", "DBS amplitude (mA)", &trace.amplitude, &[]),
        ("dbs_current", "DBS current, interval RMS (mA)", &trace.dbs_current, &[]),
    ];
    let mut written = Vec::new();
    for (name, title, series, refs) in figures {
        let (t, y) = downsample(series, MAX_POINTS);
        let svg = line_svg(title, &t, &y, refs);
        written.push(write_file(out, &format!("{name}.svg"), svg.as_bytes())?);
        let mut csv = String::from("time_s,value\n");
        for (a, b) in t.iter().zip(&y) {
            let _ = writeln!(csv, "{a},{b}");
        }
        written.push(write_file(out, &format!("{name}.csv"), csv.as_bytes())?);
    }
    Ok(written)
}

/// Renders one bar chart per comparison metric.
///
/// Per-seed rows are ignored when summary rows (no seed) are present.
pub fn render_comparison_plots(rows: &[ComparisonRow], out: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Argument("cannot plot an empty comparison table".into()));
    }
    let summary: Vec<&ComparisonRow> = rows.iter().filter(|r| r.seed.is_none()).collect();
    let rows: Vec<&ComparisonRow> = if summary.is_empty() {
        rows.iter().collect()
    } else {
        summary
    };
    let label = |r: &ComparisonRow| match r.seed {
        Some(s) => format!("{} s{s}", r.controller),
        None => r.controller.clone(),
    };
    let charts: [(&str, &str, Metric); 3] = [
        ("mse_pct", "Mean squared error (% of DBS-off)", |r| Some(r.mse_pct)),
        ("power_pct", "Power (% of open-loop 2.5 mA)", |r| Some(r.power_pct)),
        ("efficiency_std", "Suppression efficiency (%/µW)", |r| r.efficiency_std),
    ];
    let mut written = Vec::new();
    for (name, title, get) in charts {
        let bars: Vec<(String, Option<f64>)> = rows.iter().map(|r| (label(r), get(r))).collect();
        written.push(write_file(
            out,
            &format!("{name}.svg"),
            bar_svg(title, &bars).as_bytes(),
        )?);
        let mut csv = format!("controller,{name}\n");
        for (l, v) in &bars {
            let _ = writeln!(csv, "{l},{}", v.map(|v| v.to_string()).unwrap_or_default());
        }
        written.push(write_file(out, &format!("{name}.csv"), csv.as_bytes())?);
    }
    Ok(written)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    Ok(path)
}

/// Min/max per bucket keeps peaks and staircase edges visible.
fn downsample(s: &TimeSeries, max_points: usize) -> (Vec<f64>, Vec<f64>) {
    let x = s.samples();
    let n = x.len();
    if n <= max_points {
        return ((0..n).map(|i| s.time_at(i)).collect(), x.to_vec());
    }
    let buckets = max_points / 2;
    let mut t = Vec::with_capacity(max_points);
    let mut y = Vec::with_capacity(max_points);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = ((b + 1) * n / buckets).max(lo + 1);
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if x[i] < x[imin] {
                imin = i;
            }
            if x[i] > x[imax] {
                imax = i;
            }
        }
        let (first, second) = if imin <= imax { (imin, imax) } else { (imax, imin) };
        t.push(s.time_at(first));
        y.push(x[first]);
        if second != first {
            t.push(s.time_at(second));
            y.push(x[second]);
        }
    }
    (t, y)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, y_lo: f64, y_hi: f64, x_label: Option<(f64, f64)>) {
    let (x0, x1) = (MARGIN_L, WIDTH - MARGIN_R);
    let (y0, y1) = (HEIGHT - MARGIN_B, MARGIN_T);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#
    );
    for k in 0..=4 {
        let v = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
        let y = y0 - (y0 - y1) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            tick(v)
        );
    }
    if let Some((t_lo, t_hi)) = x_label {
        for k in 0..=4 {
            let v = t_lo + (t_hi - t_lo) * k as f64 / 4.0;
            let x = x0 + (x1 - x0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
                y0 + 16.0,
                tick(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">Time (s)</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 10.0
        );
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e4) {
        format!("{:.3}", v)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn line_svg(title: &str, t: &[f64], y: &[f64], refs: &[Reference]) -> String {
    let (t_lo, t_hi) = match (t.first(), t.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a, a + 1.0),
        _ => (0.0, 1.0),
    };
    let (y_lo, y_hi) = bounds(y.iter().copied().chain(refs.iter().map(|r| r.value)));
    let sx = |v: f64| MARGIN_L + (v - t_lo) / (t_hi - t_lo) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |v: f64| HEIGHT - MARGIN_B - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut s = header(title);
    axes(&mut s, y_lo, y_hi, Some((t_lo, t_hi)));
    let mut d = String::new();
    for (i, (a, b)) in t.iter().zip(y).enumerate() {
        let _ = write!(d, "{}{:.2} {:.2}", if i == 0 { "M" } else { " L" }, sx(*a), sy(*b));
    }
    let _ = writeln!(
        s,
        r#"<path d="{d}" stroke="{}" stroke-width="1" fill="none"/>"#,
        PALETTE[1]
    );
    for (k, r) in refs.iter().enumerate() {
        let y = sy(r.value);
        let color = PALETTE[2 + k % 2];
        let _ = writeln!(
            s,
            r#"<line class="target" data-value="{}" x1="{MARGIN_L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            r.value,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" fill="{color}">{} = {}</text>"#,
            WIDTH - MARGIN_R - 4.0,
            y - 4.0,
            escape(&r.label),
            r.value
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bar_svg(title: &str, bars: &[(String, Option<f64>)]) -> String {
    let (_, hi) = bounds(bars.iter().filter_map(|b| b.1).chain([0.0]));
    let lo = 0.0_f64.min(bars.iter().filter_map(|b| b.1).fold(0.0, f64::min));
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sy = |v: f64| HEIGHT - MARGIN_B - (v - lo) / (hi - lo) * plot_h;
    let slot = (WIDTH - MARGIN_L - MARGIN_R) / bars.len() as f64;

    let mut s = header(title);
    axes(&mut s, lo, hi, None);
    for (k, (label, value)) in bars.iter().enumerate() {
        let cx = MARGIN_L + slot * (k as f64 + 0.5);
        let w = slot * 0.6;
        match value {
            Some(v) => {
                let (top, base) = (sy(v.max(0.0)), sy(v.min(0.0)));
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{top:.2}" width="{w:.2}" height="{:.2}" fill="{}"><title>{}</title></rect>"#,
                    cx - w / 2.0,
                    base - top,
                    PALETTE[k % PALETTE.len()],
                    v
                );
                let _ = writeln!(
                    s,
                    r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    top - 4.0,
                    tick(*v)
                );
            }
            None => {
                let _ = writeln!(
                    s,
                    r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">n/a</text>"#,
                    sy(0.0) - 4.0
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{cx:.2}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN_B + 16.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use cldbs_core::dsp::Unit;

    #[test]
    fn downsample_keeps_extremes() {
        let x: Vec<f64> = (0..10_000).map(|i| ((i as f64) * 0.01).sin()).collect();
        let s = TimeSeries::from_samples(x.clone(), 1000.0, Unit::Microvolt).unwrap();
        let (t, y) = downsample(&s, 400);
        assert!(y.len() <= 400);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        let max = x.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(y.iter().cloned().fold(f64::MIN, f64::max), max);
    }

    #[test]
    fn short_series_are_untouched() {
        let s = TimeSeries::from_samples(vec![1.0, 2.0, 3.0], 10.0, Unit::Milliampere).unwrap();
        let (t, y) = downsample(&s, 400);
        assert_eq!(y, vec![1.0, 2.0, 3.0]);
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn empty_comparison_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(render_comparison_plots(&[], dir.path()).is_err());
    }

    #[test]
    fn ticks_are_compact() {
        assert_eq!(tick(0.0), "0");
        assert_eq!(tick(0.104), "0.104");
        assert_eq!(tick(2.5), "2.5");
        assert_eq!(tick(1e-5), "1.00e-5");
    }
}
