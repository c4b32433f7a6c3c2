//! Hand-written SVG line and scatter plots.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PADDING: f64 = 0.05;
const TICKS: usize = 5;
const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Scatter,
}

impl FromStr for PlotKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "line" => Ok(PlotKind::Line),
            "scatter" => Ok(PlotKind::Scatter),
            other => Err(CliError::Usage(format!("unknown plot kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub series: Vec<Series>,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl PlotSpec {
    pub fn validate(&self) -> CliResult<()> {
        if self.series.is_empty() {
            return Err(CliError::Usage("plot needs at least one series".into()));
        }
        for s in &self.series {
            if s.x.len() != s.y.len() {
                return Err(CliError::Usage(format!(
                    "series '{}' has {} x values and {} y values",
                    s.label,
                    s.x.len(),
                    s.y.len()
                )));
            }
            if let Some(i) = s.x.iter().zip(&s.y).position(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(CliError::Usage(format!(
                    "series '{}' has a non-finite value in row {}",
                    s.label,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Data range widened by 5% on each side; degenerate ranges get a unit
/// (or 5% of magnitude) half-width.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        let pad = PADDING * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { PADDING * lo.abs() };
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.3e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.to_string() }
    }
}

pub fn render_svg(spec: &PlotSpec) -> CliResult<String> {
    spec.validate()?;
    let (x0, x1) = padded_range(spec.series.iter().flat_map(|s| s.x.iter().copied()));
    let (y0, y1) = padded_range(spec.series.iter().flat_map(|s| s.y.iter().copied()));
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="17">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    // Frame and ticks.
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let bottom = MARGIN_TOP + ph;
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{bottom}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 20.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(&spec.y_label)
    );

    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, (&x, &y)) in s.x.iter().zip(&s.y).enumerate() {
            let (px, py) = (sx(x), sy(y));
            match spec.kind {
                PlotKind::Line => {
                    let _ = write!(d, "{}{px:.2} {py:.2}", if j == 0 { "M" } else { " L" });
                }
                PlotKind::Scatter => {
                    let _ = write!(d, "M{:.2} {py:.2} h6 M{px:.2} {:.2} v6 ", px - 3.0, py - 3.0);
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="{}"><title>{}</title></path>"#,
            d.trim_end(),
            if spec.kind == PlotKind::Line { 1.5 } else { 1.2 },
            escape(&s.label)
        );
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT - 160.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Builds a plot from named CSV columns: one series per `y` column.
pub fn spec_from_csv(
    text: &str,
    x: &str,
    ys: &[String],
    kind: PlotKind,
    title: Option<&str>,
) -> CliResult<PlotSpec> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("column '{name}' not found")))
    };
    let xi = index(x)?;
    let yis = ys.iter().map(|y| index(y)).collect::<CliResult<Vec<_>>>()?;
    let mut xs = Vec::new();
    let mut cols = vec![Vec::new(); ys.len()];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> CliResult<f64> {
            let v: f64 = rec
                .get(i)
                .unwrap_or("")
                .parse()
                .map_err(|_| CliError::Usage(format!("row {}: column {} is not a number", row + 1, headers.get(i).unwrap_or("?"))))?;
            if !v.is_finite() {
                return Err(CliError::Usage(format!(
                    "row {}: non-finite value in column {}",
                    row + 1,
                    headers.get(i).unwrap_or("?")
                )));
            }
            Ok(v)
        };
        xs.push(num(xi)?);
        for (c, &yi) in cols.iter_mut().zip(&yis) {
            c.push(num(yi)?);
        }
    }
    let series = ys
        .iter()
        .zip(cols)
        .map(|(label, y)| Series { label: label.clone(), x: xs.clone(), y })
        .collect();
    Ok(PlotSpec {
        kind,
        series,
        title: title.map(str::to_string).unwrap_or_else(|| format!("{} vs {x}", ys.join(", "))),
        x_label: x.to_string(),
        y_label: ys.join(", "),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_path_per_series() {
        let csv = "T,a,b\n1,2,3\n2,3,5\n3,4,4\n";
        let spec = spec_from_csv(csv, "T", &["a".into(), "b".into()], PlotKind::Line, None).unwrap();
        let svg = render_svg(&spec).unwrap();
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 600\""));
        assert_eq!(svg.matches("<path").count(), 2);
        let scatter = PlotSpec { kind: PlotKind::Scatter, ..spec };
        assert_eq!(render_svg(&scatter).unwrap().matches("<path").count(), 2);
    }

    #[test]
    fn nan_rows_are_rejected() {
        let csv = "T,a\n1,2\n2,NaN\n";
        let err = spec_from_csv(csv, "T", &["a".into()], PlotKind::Line, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn range_padding() {
        assert_eq!(padded_range([0.0, 10.0].into_iter()), (-0.5, 10.5));
        assert_eq!(padded_range([2.0].into_iter()), (1.9, 2.1));
    }
}
