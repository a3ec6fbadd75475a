//! Figure output: four panels per comparison, written as SVG and as a tidy
//! CSV of the plotted series.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::driver::Trace;
use crate::error::Result;
use crate::harness::rolling::RollingMinSeries;

/// Ratios beyond this magnitude are drawn at the limit.
pub const RHO_PLOT_CLIP: f64 = 5.0;

/// Plot-only clipping of `ρ` to `[−5, 5]`; NaN passes through.
pub fn clip_rho(rho: f64) -> f64 {
    if rho.is_nan() {
        rho
    } else {
        rho.clamp(-RHO_PLOT_CLIP, RHO_PLOT_CLIP)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
    /// Drawn as a dashed reference line.
    pub reference: bool,
    /// Present in the CSV only.
    pub csv_only: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub key: &'static str,
    pub title: &'static str,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn series(label: String, values: Vec<f64>) -> Series {
    Series {
        label,
        values,
        reference: false,
        csv_only: false,
    }
}

/// Builds the panels for one or more labelled traces of the same problem.
/// The distance panel is left out unless every trace knows its distance to
/// the solution.
pub fn build_panels(traces: &[(&str, &Trace)], eps_g: f64) -> Vec<Panel> {
    let len = traces.iter().map(|(_, t)| t.records.len()).max().unwrap_or(0);
    let mut grad = Panel {
        key: "gradient",
        title: "gradient norm",
        log_y: true,
        series: Vec::new(),
    };
    let mut radius = Panel {
        key: "delta",
        title: "trust-region radius",
        log_y: true,
        series: Vec::new(),
    };
    let mut dist = Panel {
        key: "distance",
        title: "distance to solution",
        log_y: true,
        series: Vec::new(),
    };
    let mut rho = Panel {
        key: "rho",
        title: "ratio (clipped to ±5)",
        log_y: false,
        series: Vec::new(),
    };
    let mut have_dist = !traces.is_empty();

    for (label, t) in traces {
        let g_true: Vec<f64> = t.records.iter().map(|r| r.grad_norm_true).collect();
        let g_noisy: Vec<f64> = t.records.iter().map(|r| r.grad_norm_noisy).collect();
        grad.series.push(series(format!("{label} gnorm_true"), g_true.clone()));
        grad.series.push(series(
            format!("{label} rolling25_true"),
            RollingMinSeries::with_default_window(&g_true).values,
        ));
        grad.series.push(Series {
            csv_only: true,
            ..series(format!("{label} gnorm_noisy"), g_noisy.clone())
        });
        grad.series.push(Series {
            csv_only: true,
            ..series(
                format!("{label} rolling25_noisy"),
                RollingMinSeries::with_default_window(&g_noisy).values,
            )
        });
        radius
            .series
            .push(series(label.to_string(), t.records.iter().map(|r| r.delta).collect()));
        rho.series.push(series(
            label.to_string(),
            t.records.iter().map(|r| clip_rho(r.rho)).collect(),
        ));
        let d: Option<Vec<f64>> = t.records.iter().map(|r| r.dist_to_solution).collect();
        match d {
            Some(d) if !t.records.is_empty() => dist.series.push(series(label.to_string(), d)),
            _ => have_dist = false,
        }
    }
    if eps_g > 0.0 {
        grad.series.push(Series {
            reference: true,
            ..series("eps_g".to_string(), vec![eps_g; len])
        });
    }

    let mut panels = vec![grad, radius];
    if have_dist {
        panels.push(dist);
    }
    panels.push(rho);
    panels
}

/// Writes `<stem>.svg` and `<stem>_series.csv` into `dir`.
pub fn emit_plot_series(traces: &[(&str, &Trace)], eps_g: f64, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let panels = build_panels(traces, eps_g);
    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&svg_path, render_svg(&panels))?;
    let csv_path = dir.join(format!("{stem}_series.csv"));
    write_series_csv(&csv_path, &panels)?;
    Ok(vec![svg_path, csv_path])
}

fn write_series_csv(path: &Path, panels: &[Panel]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["panel", "series", "iter", "value"])?;
    for p in panels {
        for s in &p.series {
            for (k, v) in s.values.iter().enumerate() {
                w.write_record([p.key, s.label.as_str(), &k.to_string(), &v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;
const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Hand-written SVG, two panels per row. Output depends only on the data.
pub fn render_svg(panels: &[Panel]) -> String {
    let cols = 2;
    let rows = panels.len().div_ceil(cols).max(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="11">"#,
        PANEL_W * cols as f64,
        PANEL_H * rows as f64
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, p) in panels.iter().enumerate() {
        let ox = (i % cols) as f64 * PANEL_W;
        let oy = (i / cols) as f64 * PANEL_H;
        render_panel(&mut out, p, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}

fn render_panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let x0 = ox + MARGIN_L;
    let y0 = oy + MARGIN_T;
    let w = PANEL_W - MARGIN_L - MARGIN_R;
    let h = PANEL_H - MARGIN_T - MARGIN_B;
    let tf = |v: f64| if p.log_y { v.log10() } else { v };
    let usable = |v: f64| v.is_finite() && (!p.log_y || v > 0.0);

    let drawn: Vec<&Series> = p.series.iter().filter(|s| !s.csv_only).collect();
    let n = drawn.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &drawn {
        for &v in s.values.iter().filter(|v| usable(**v)) {
            lo = lo.min(tf(v));
            hi = hi.max(tf(v));
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let xmax = (n.max(2) - 1) as f64;
    let sx = |k: usize| x0 + w * k as f64 / xmax;
    let sy = |v: f64| y0 + h * (1.0 - (tf(v) - lo) / (hi - lo));

    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"##,
        x0 + w / 2.0,
        oy + 18.0,
        p.title
    );
    let _ = writeln!(
        out,
        r##"<rect x="{x0:.1}" y="{y0:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#444"/>"##
    );
    for t in 0..=4 {
        let frac = t as f64 / 4.0;
        let yv = lo + (hi - lo) * (1.0 - frac);
        let label = if p.log_y { format!("1e{yv:.1}") } else { format!("{yv:.2}") };
        let y = y0 + h * frac;
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
            x0 - 4.0,
            y + 4.0
        );
        let xk = (xmax * frac).round() as usize;
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xk}</text>"##,
            sx(xk),
            y0 + h + 14.0
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle">iteration</text>"##,
        x0 + w / 2.0,
        y0 + h + 28.0
    );

    for (i, s) in drawn.iter().enumerate() {
        let color = if s.reference { "#000000" } else { PALETTE[i % PALETTE.len()] };
        let dash = if s.reference { r#" stroke-dasharray="6,4""# } else { "" };
        // Break the line at values a log axis cannot show.
        let mut segment = String::new();
        let flush = |segment: &mut String, out: &mut String| {
            if !segment.is_empty() {
                let _ = writeln!(
                    out,
                    r##"<polyline fill="none" stroke="{color}" stroke-width="1.2"{dash} points="{}"/>"##,
                    segment.trim_end()
                );
                segment.clear();
            }
        };
        for (k, &v) in s.values.iter().enumerate() {
            if usable(v) {
                let _ = write!(segment, "{:.2},{:.2} ", sx(k), sy(v));
            } else {
                flush(&mut segment, out);
            }
        }
        flush(&mut segment, out);
        // Legend stacked in the upper-right corner of the plot area.
        let ly = y0 + 12.0 + 13.0 * i as f64;
        let lx = x0 + w - 170.0;
        let _ = writeln!(
            out,
            r##"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"##,
            lx + 14.0,
            lx + 17.0,
            ly + 4.0,
            s.label
        );
    }
}
