use std::fmt::Write as _;
use std::path::Path;

use super::{HarnessError, TraceRecord, Traces};

/// Smallest gap drawn on the log axis.
pub const GAP_FLOOR: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    OptimalityGap,
    TestAccuracy,
}

impl Metric {
    fn value(self, r: &TraceRecord) -> Option<f64> {
        let v = match self {
            Metric::OptimalityGap => Some(r.optimality_gap.max(GAP_FLOOR)),
            Metric::TestAccuracy => r.test_accuracy,
        }?;
        v.is_finite().then_some(v)
    }

    fn title(self) -> &'static str {
        match self {
            Metric::OptimalityGap => "optimality gap",
            Metric::TestAccuracy => "test accuracy",
        }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Renders `metric` against training time, one polyline per solver drawn
/// from its first repetition.
pub fn render_convergence_svg(
    traces: &Traces,
    metric: Metric,
    path: &Path,
) -> Result<(), HarnessError> {
    let svg = convergence_svg(traces, metric)?;
    std::fs::write(path, svg).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The document written by [`render_convergence_svg`].
pub fn convergence_svg(traces: &Traces, metric: Metric) -> Result<String, HarnessError> {
    if traces.is_empty() {
        return Err(HarnessError::Plot("no traces to plot".into()));
    }
    let series: Vec<(&str, Vec<(f64, f64)>)> = traces
        .iter()
        .map(|(name, reps)| {
            let pts = reps
                .first()
                .into_iter()
                .flatten()
                .filter_map(|r| Some((r.wall_time_s, metric.value(r)?)))
                .filter(|(t, _)| t.is_finite())
                .collect();
            (name.as_str(), pts)
        })
        .collect();
    let all = || series.iter().flat_map(|(_, p)| p.iter().copied());
    if all().next().is_none() {
        return Err(HarnessError::Plot(format!(
            "no {} values to plot",
            metric.title()
        )));
    }
    let (x_lo, x_hi) = bounds(all().map(|p| p.0));
    if x_lo == x_hi {
        return Err(HarnessError::Plot(format!(
            "degenerate time range: every sample is at {x_lo} s"
        )));
    }
    let y_axis = match metric {
        Metric::OptimalityGap => {
            let (lo, hi) = bounds(all().map(|p| p.1.log10()));
            YAxis::log(lo.floor(), hi.ceil())
        }
        Metric::TestAccuracy => {
            let (lo, hi) = bounds(all().map(|p| p.1));
            YAxis::linear(lo, hi)
        }
    };

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |t: f64| LEFT + (t - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + (1.0 - y_axis.unit(v)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for (t, label) in linear_ticks(x_lo, x_hi) {
        let x = sx(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#888"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 19.0
        );
    }
    for (v, label) in y_axis.ticks() {
        let y = sy(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#888"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">training time (s)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        metric.title()
    );

    for (k, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        if !pts.is_empty() {
            let coords: Vec<String> = pts
                .iter()
                .map(|&(t, v)| format!("{:.2},{:.2}", sx(t), sy(v)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                coords.join(" ")
            );
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

enum YAxis {
    /// Decade exponents.
    Log {
        lo: f64,
        hi: f64,
    },
    Linear {
        lo: f64,
        hi: f64,
    },
}

impl YAxis {
    fn log(lo: f64, hi: f64) -> Self {
        if lo == hi {
            YAxis::Log { lo, hi: hi + 1.0 }
        } else {
            YAxis::Log { lo, hi }
        }
    }

    fn linear(lo: f64, hi: f64) -> Self {
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.05 };
        YAxis::Linear {
            lo: (lo - pad).max(0.0),
            hi: (hi + pad).min(1.0).max(lo + pad),
        }
    }

    /// Position in `[0, 1]`, bottom to top.
    fn unit(&self, v: f64) -> f64 {
        match *self {
            YAxis::Log { lo, hi } => (v.log10() - lo) / (hi - lo),
            YAxis::Linear { lo, hi } => (v - lo) / (hi - lo),
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match *self {
            YAxis::Log { lo, hi } => {
                let decades = (hi - lo) as i32;
                let every = (decades + 11) / 12;
                (lo as i32..=hi as i32)
                    .filter(|e| (e - lo as i32) % every == 0)
                    .map(|e| (10f64.powi(e), format!("1e{e}")))
                    .collect()
            }
            YAxis::Linear { lo, hi } => linear_ticks(lo, hi),
        }
    }
}

/// Roughly five ticks at 1/2/5 multiples of a power of ten.
fn linear_ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|k| {
            let v = k as f64 * step;
            (v, format!("{:.*}", decimals, v))
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, gap: f64) -> TraceRecord {
        TraceRecord {
            iter: 0,
            wall_time_s: t,
            objective: gap,
            optimality_gap: gap,
            test_accuracy: Some(0.5 + gap / 4.0),
            grad_norm: 0.0,
            rows_touched: 0,
        }
    }

    fn two_solvers() -> Traces {
        let mut t = Traces::new();
        t.insert("tron".into(), vec![vec![rec(0.0, 1.0), rec(0.5, 1e-8)]]);
        t.insert("stron".into(), vec![vec![rec(0.0, 1.0), rec(0.2, 1e-3)]]);
        t
    }

    #[test]
    fn one_polyline_per_solver() {
        for metric in [Metric::OptimalityGap, Metric::TestAccuracy] {
            let svg = convergence_svg(&two_solvers(), metric).unwrap();
            assert_eq!(svg.matches("<polyline").count(), 2);
            assert!(svg.contains(">tron</text>") && svg.contains(">stron</text>"));
        }
    }

    #[test]
    fn decade_ticks() {
        let svg = convergence_svg(&two_solvers(), Metric::OptimalityGap).unwrap();
        for e in -8..=0 {
            assert!(svg.contains(&format!(">1e{e}</text>")), "1e{e}");
        }
        assert!(!svg.contains(">1e-9<"));
    }

    #[test]
    fn gap_is_clamped() {
        let mut t = Traces::new();
        t.insert(
            "x".into(),
            vec![vec![rec(0.0, 1.0), rec(1.0, 0.0), rec(2.0, -1e-12)]],
        );
        let svg = convergence_svg(&t, Metric::OptimalityGap).unwrap();
        assert!(svg.contains(">1e-16</text>"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn identical_times_are_rejected() {
        let mut t = Traces::new();
        t.insert("x".into(), vec![vec![rec(1.0, 1.0), rec(1.0, 0.5)]]);
        assert!(matches!(
            convergence_svg(&t, Metric::OptimalityGap),
            Err(HarnessError::Plot(_))
        ));
        assert!(convergence_svg(&Traces::new(), Metric::OptimalityGap).is_err());
    }

    #[test]
    fn names_are_escaped() {
        let mut t = two_solvers();
        t.insert("a<b&c".into(), vec![vec![rec(0.0, 0.1), rec(0.3, 0.01)]]);
        let svg = convergence_svg(&t, Metric::OptimalityGap).unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
    }
}
