//! Minimal static SVG line plots for diagnostics CSVs. Write-only artifacts:
//! axes, ticks, polylines, a legend, and an optional log-log slope fit.

use std::path::Path;

use lochs::error::{Error, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

const COLORS: &[&str] = &[
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Table {
    headers: Vec<String>,
    columns: Vec<Vec<f64>>,
    comments: Vec<String>,
}

fn read_csv(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    let mut headers = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut comments = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        if headers.is_empty() {
            headers = line.split(',').map(|h| h.trim().to_string()).collect();
            columns = vec![Vec::new(); headers.len()];
            continue;
        }
        for (i, cell) in line.split(',').enumerate() {
            if i < columns.len() {
                let v = cell
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("non-numeric cell '{cell}': {e}")))?;
                columns[i].push(v);
            }
        }
    }
    if headers.is_empty() || columns.iter().any(|c| c.is_empty()) {
        return Err(Error::InvalidConfig("empty or header-only CSV".into()));
    }
    Ok(Table {
        headers,
        columns,
        comments,
    })
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

pub fn render(
    input: &Path,
    output: &Path,
    x_col: &str,
    y_cols: Option<&str>,
    loglog: bool,
) -> Result<()> {
    let table = read_csv(input)?;
    let xi = table
        .headers
        .iter()
        .position(|h| h == x_col)
        .ok_or_else(|| Error::InvalidConfig(format!("no column '{x_col}'")))?;
    let y_names: Vec<String> = match y_cols {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => table
            .headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != xi)
            .map(|(_, h)| h.clone())
            .collect(),
    };
    let mut series = Vec::new();
    for name in &y_names {
        let yi = table
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidConfig(format!("no column '{name}'")))?;
        series.push((name.clone(), &table.columns[yi]));
    }

    let transform = |v: f64| -> Option<f64> {
        if loglog {
            if v > 0.0 {
                Some(v.ln())
            } else {
                None
            }
        } else {
            Some(v)
        }
    };

    // collect transformed points per series
    let xs_raw = &table.columns[xi];
    let mut all_pts: Vec<Vec<(f64, f64)>> = Vec::new();
    for (_, ys) in &series {
        let pts: Vec<(f64, f64)> = xs_raw
            .iter()
            .zip(ys.iter())
            .filter_map(|(&x, &y)| Some((transform(x)?, transform(y)?)))
            .collect();
        all_pts.push(pts);
    }
    let flat: Vec<(f64, f64)> = all_pts.iter().flatten().copied().collect();
    if flat.is_empty() {
        return Err(Error::InvalidConfig(
            "nothing to plot (log of nonpositive data?)".into(),
        ));
    }
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &flat {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
    let py =
        |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    for c in &table.comments {
        svg.push_str(&format!("<!-- {} -->\n", c.replace("--", "- -")));
    }
    svg.push_str(&format!("<!-- source={} -->\n", input.display()));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        HEIGHT - MARGIN_B
    ));
    let fmt_tick = |v: f64| -> String {
        let shown = if loglog { v.exp() } else { v };
        if shown != 0.0 && (shown.abs() >= 1e4 || shown.abs() < 1e-3) {
            format!("{shown:.2e}")
        } else {
            format!("{shown:.4}")
        }
    };
    for t in nice_ticks(x_lo, x_hi, 6) {
        let x = px(t);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 20.0,
            fmt_tick(t)
        ));
    }
    for t in nice_ticks(y_lo, y_hi, 6) {
        let y = py(t);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{MARGIN_L}\" y2=\"{y}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 9.0,
            y + 4.0,
            fmt_tick(t)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        x_col,
        if loglog { " (log)" } else { "" }
    ));

    for (si, ((name, _), pts)) in series.iter().zip(&all_pts).enumerate() {
        if pts.is_empty() {
            continue;
        }
        let color = COLORS[si % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        let ly = MARGIN_T + 18.0 * si as f64 + 10.0;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            WIDTH - MARGIN_R + 10.0,
            WIDTH - MARGIN_R + 34.0
        ));
        let mut label = name.clone();
        if loglog && pts.len() >= 2 {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            if sxx > 0.0 {
                label.push_str(&format!(" (slope {:.3})", sxy / sxx));
            }
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{label}</text>\n",
            WIDTH - MARGIN_R + 40.0,
            ly + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(output, svg)?;
    Ok(())
}
