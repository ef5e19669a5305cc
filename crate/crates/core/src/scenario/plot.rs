//! Minimal SVG line plots of scenario CSV output.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_Y: f64 = 40.0;
const COLOURS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Render the `columns` of a scenario CSV against `time_us` as SVG text.
pub fn render_svg(csv_text: &str, columns: &[String]) -> Result<String> {
    if columns.is_empty() {
        return Err(Error::invalid("no columns selected for plotting"));
    }
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers()?.clone();
    let position =
        |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let time_col = position("time_us")?;
    let cols: Vec<usize> = columns.iter().map(|c| position(c)).collect::<Result<_>>()?;

    let mut times = Vec::new();
    let mut series = vec![Vec::new(); cols.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |c: usize| -> Result<f64> {
            let v: f64 =
                record.get(c).unwrap_or("").parse().map_err(|_| {
                    Error::invalid(format!("row {}: non-numeric value in column {}", row + 1, &headers[c]))
                })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::invalid(format!("row {}: non-finite value", row + 1)))
            }
        };
        times.push(parse(time_col)?);
        for (s, &c) in series.iter_mut().zip(&cols) {
            s.push(parse(c)?);
        }
    }
    if times.is_empty() {
        return Err(Error::invalid("empty trace: the CSV has no data rows"));
    }

    let (t_min, t_max) = bounds(times.iter().copied());
    let (y_min, y_max) = bounds(series.iter().flatten().copied());
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let x = |t: f64| MARGIN_LEFT + (t - t_min) / (t_max - t_min) * plot_w;
    let y = |v: f64| MARGIN_Y + (y_max - v) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN_LEFT, MARGIN_LEFT + plot_w, MARGIN_Y, MARGIN_Y + plot_h);
    let _ = writeln!(svg, r#"<path d="M{x0} {y0} V{y1} H{x1}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (tv, yv) = (t_min + f * (t_max - t_min), y_min + f * (y_max - y_min));
        let (px, py) = (x(tv), y(yv));
        let _ = writeln!(svg, r#"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
        let _ = writeln!(svg, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 20.0, tick(tv));
        let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (µs)</text>"#,
        x0 + plot_w / 2.0,
        HEIGHT - 5.0
    );

    for (i, (name, values)) in columns.iter().zip(&series).enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let points: Vec<String> = times.iter().zip(values).map(|(&t, &v)| format!("{:.2},{:.2}", x(t), y(v))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_Y + 10.0 + 20.0 * i as f64;
        let _ =
            writeln!(svg, r#"<rect x="{:.2}" y="{:.2}" width="14" height="3" fill="{colour}"/>"#, x1 + 15.0, ly - 4.0);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, x1 + 35.0, escape(name));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Read `csv_path`, render, and write `output_path`. Nothing is written on
/// error.
pub fn emit_plot(csv_path: &Path, columns: &[String], output_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv_path)?;
    let svg = render_svg(&text, columns)?;
    std::fs::write(output_path, svg)?;
    Ok(())
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "time_us,sigma_z,n\n0,-1,0\n2,-0.5,0.25\n4,0,0.5\n";

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_polyline_per_column() {
        let svg = render_svg(CSV, &cols(&["sigma_z", "n"])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        let svg = render_svg(CSV, &cols(&["n"])).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(render_svg(CSV, &cols(&["p0"])), Err(Error::MissingColumn(c)) if c == "p0"));
        assert!(render_svg("time_us,n\n", &cols(&["n"])).is_err());
        assert!(render_svg("time_us,n\n0,NaN\n", &cols(&["n"])).is_err());
    }

    #[test]
    fn empty_trace_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("empty.csv");
        std::fs::write(&csv, "time_us,n\n").unwrap();
        let out = dir.path().join("out.svg");
        assert!(emit_plot(&csv, &cols(&["n"]), &out).is_err());
        assert!(!out.exists());
    }

    #[test]
    fn constant_trace_renders() {
        let svg = render_svg("time_us,n\n0,0\n1,0\n", &cols(&["n"])).unwrap();
        assert!(!svg.contains("NaN"));
    }
}
