//! Output emission: CSV tables, JSON summaries, and small decorative SVG
//! line plots. Every document embeds the config hash so artifacts can be
//! traced back to the exact run configuration.

use serde_json::Value;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal form; the same bits always print the same
/// text, which keeps reruns byte-identical.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// RFC-4180 quoting, applied only when a cell needs it.
fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

pub struct CsvDoc {
    out: String,
    columns: usize,
}

impl CsvDoc {
    pub fn new(config_hash: &str, columns: &[&str]) -> Self {
        let mut out = String::new();
        out.push_str(&format!("# config_hash={config_hash}\n"));
        out.push_str(&format!("# tool=morph {TOOL_VERSION}\n"));
        out.push_str(&columns.join(","));
        out.push('\n');
        Self {
            out,
            columns: columns.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        assert_eq!(cells.len(), self.columns, "csv row width mismatch");
        let line: Vec<String> = cells.iter().map(|c| csv_escape(c.as_ref())).collect();
        self.out.push_str(&line.join(","));
        self.out.push('\n');
    }

    pub fn into_string(self) -> String {
        self.out
    }
}

/// Pretty JSON with provenance fields injected at the top level. Keys are
/// emitted in sorted order, so output is deterministic.
pub fn json_document(config_hash: &str, mut body: Value) -> String {
    if let Value::Object(map) = &mut body {
        map.insert("config_hash".into(), Value::String(config_hash.into()));
        map.insert(
            "tool_version".into(),
            Value::String(TOOL_VERSION.to_string()),
        );
    }
    let mut text = serde_json::to_string_pretty(&body).expect("json serializes");
    text.push('\n');
    text
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct SvgSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct SvgPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<SvgSeries>,
}

impl SvgPlot {
    /// Fixed 800x500 canvas with a 60 px margin; purely decorative.
    pub fn render(&self, config_hash: &str) -> String {
        const W: f64 = 800.0;
        const H: f64 = 500.0;
        const M: f64 = 60.0;

        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for (x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(*x);
                    ys.push(*y);
                }
            }
        }
        let (x_min, x_max) = bounds(&xs);
        let (y_min, y_max) = bounds(&ys);
        let map_x = |x: f64| M + (x - x_min) / span(x_min, x_max) * (W - 2.0 * M);
        let map_y = |y: f64| H - M - (y - y_min) / span(y_min, y_max) * (H - 2.0 * M);

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">\n"
        ));
        svg.push_str(&format!("<!-- config_hash={config_hash} -->\n"));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"30\" text-anchor=\"middle\" font-size=\"18\">{}</text>\n",
            W / 2.0,
            xml_escape(&self.title)
        ));
        // axes
        svg.push_str(&format!(
            "<line x1=\"{M}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
            H - M,
            W - M
        ));
        svg.push_str(&format!(
            "<line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{}\" stroke=\"black\"/>\n",
            H - M
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            W / 2.0,
            H - 18.0,
            xml_escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
            H / 2.0,
            H / 2.0,
            xml_escape(&self.y_label)
        ));
        // range labels
        svg.push_str(&format!(
            "<text x=\"{M}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            H - M + 16.0,
            num(x_min)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            W - M,
            H - M + 16.0,
            num(x_max)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            M - 6.0,
            H - M,
            num(y_min)
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{M}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            M - 6.0,
            num(y_max)
        ));

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let path: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", map_x(*x), map_y(*y)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                path.join(" ")
            ));
            let ly = M + 18.0 * i as f64;
            svg.push_str(&format!(
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"12\" height=\"3\" fill=\"{color}\"/>\n",
                W - M - 150.0,
                ly - 4.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{ly:.1}\" font-size=\"12\">{}</text>\n",
                W - M - 132.0,
                xml_escape(&s.label)
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

fn span(min: f64, max: f64) -> f64 {
    if max > min {
        max - min
    } else {
        1.0
    }
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
