//! Deterministic SVG rendering of pressure-curve CSV files: one estimate
//! polyline with a bracket band where both bounds are present.

use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 60.0;

struct Row {
    q: f64,
    estimate: f64,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn parse_csv(text: &str) -> Result<Vec<Row>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let idx = |name: &str| cols.iter().position(|c| *c == name);
    let (qi, ei) = match (idx("q"), idx("estimate")) {
        (Some(q), Some(e)) => (q, e),
        _ => {
            return Err(Error::Input(
                "CSV header must contain q and estimate columns".into(),
            ))
        }
    };
    let li = idx("lower");
    let ui = idx("upper");

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() || line.starts_with("sum,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64> {
            fields
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Input(format!("bad CSV field on data line {}", lineno + 1)))
        };
        let opt = |i: Option<usize>| -> Option<f64> {
            i.and_then(|i| fields.get(i))
                .and_then(|s| s.parse::<f64>().ok())
        };
        rows.push(Row {
            q: get(qi)?,
            estimate: get(ei)?,
            lower: opt(li),
            upper: opt(ui),
        });
    }
    if rows.is_empty() {
        return Err(Error::Input("CSV has no data rows".into()));
    }
    Ok(rows)
}

fn coord(x: f64) -> String {
    format!("{x:.2}")
}

/// Render a pressure-curve CSV to a standalone SVG document. Fixed input
/// bytes produce fixed output bytes.
pub fn render_plot(csv_text: &str) -> Result<String> {
    let rows = parse_csv(csv_text)?;

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for r in &rows {
        x_min = x_min.min(r.q);
        x_max = x_max.max(r.q);
        for y in [Some(r.estimate), r.lower, r.upper].into_iter().flatten() {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    if y_max == y_min {
        y_max = y_min + 1.0;
    }
    let y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    let sx = |q: f64| MARGIN + (q - x_min) / (x_max - x_min) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - y_min) / (y_max - y_min) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // bracket band over maximal runs where both bounds exist
    let mut run: Vec<&Row> = Vec::new();
    let mut bands = Vec::new();
    for r in rows.iter() {
        if r.lower.is_some() && r.upper.is_some() {
            run.push(r);
        } else if run.len() >= 2 {
            bands.push(std::mem::take(&mut run));
        } else {
            run.clear();
        }
    }
    if run.len() >= 2 {
        bands.push(run);
    }
    for band in &bands {
        let mut pts = String::new();
        for r in band.iter() {
            pts.push_str(&format!(
                "{},{} ",
                coord(sx(r.q)),
                coord(sy(r.upper.expect("in band")))
            ));
        }
        for r in band.iter().rev() {
            pts.push_str(&format!(
                "{},{} ",
                coord(sx(r.q)),
                coord(sy(r.lower.expect("in band")))
            ));
        }
        svg.push_str(&format!(
            "<polygon points=\"{}\" fill=\"#c6dbef\" stroke=\"none\"/>\n",
            pts.trim_end()
        ));
    }

    // axes
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        m = coord(MARGIN),
        b = coord(HEIGHT - MARGIN),
        r = coord(WIDTH - MARGIN)
    ));
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        m = coord(MARGIN),
        t = coord(MARGIN),
        b = coord(HEIGHT - MARGIN)
    ));
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">{:.3}</text>\n",
            coord(sx(fx)),
            coord(HEIGHT - MARGIN + 20.0),
            fx
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\" fill=\"#333333\">{:.3}</text>\n",
            coord(MARGIN - 8.0),
            coord(sy(fy) + 4.0),
            fy
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333333\">q</text>\n",
        coord(WIDTH / 2.0),
        coord(HEIGHT - 15.0)
    ));

    // estimate polyline
    let mut pts = String::new();
    for r in &rows {
        pts.push_str(&format!("{},{} ", coord(sx(r.q)), coord(sy(r.estimate))));
    }
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\"/>\n",
        pts.trim_end()
    ));

    svg.push_str("</svg>\n");
    Ok(svg)
}
