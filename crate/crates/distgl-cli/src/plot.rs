//! Static SVG plots rendered from `results.csv`. Pure post-processing: the
//! CSV schema is the only contract with the experiment runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 560.0;
const MARGIN_L: f64 = 90.0;
const MARGIN_R: f64 = 40.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 70.0;

const METHODS: [(&str, &str); 3] = [
    ("distributed", "#1f77b4"),
    ("centralized", "#d62728"),
    ("baseline", "#2ca02c"),
];

/// The row fields the plots consume.
#[derive(Debug, Clone)]
pub struct PlotRow {
    pub kind: String,
    pub method: String,
    pub n_nodes: usize,
    pub radius: f64,
    pub mean_degree: Option<f64>,
    pub n_signals: usize,
    pub normalized_frobenius: Option<f64>,
    pub frobenius: Option<f64>,
    pub wasserstein: Option<f64>,
    pub total_messages: Option<u64>,
    pub error: String,
}

fn parse_opt<T: std::str::FromStr>(field: &str) -> Result<Option<T>, T::Err> {
    if field.is_empty() {
        Ok(None)
    } else {
        field.parse().map(Some)
    }
}

/// Reads the experiment CSV, rejecting malformed rows with their position.
pub fn read_results(path: &Path) -> Result<Vec<PlotRow>> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("missing column {name} in {}", path.display()))
    };
    let c_kind = col("kind")?;
    let c_method = col("method")?;
    let c_n = col("n_nodes")?;
    let c_radius = col("radius")?;
    let c_deg = col("mean_degree")?;
    let c_m = col("n_signals")?;
    let c_nf = col("normalized_frobenius")?;
    let c_f = col("frobenius")?;
    let c_w = col("wasserstein")?;
    let c_total = col("total_messages")?;
    let c_err = col("error")?;

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = idx + 2; // header is line 1
        let fail = |what: &str| format!("{} row {row_no}: bad {what}", path.display());
        rows.push(PlotRow {
            kind: record[c_kind].to_string(),
            method: record[c_method].to_string(),
            n_nodes: record[c_n].parse().with_context(|| fail("n_nodes"))?,
            radius: record[c_radius].parse().with_context(|| fail("radius"))?,
            mean_degree: parse_opt(&record[c_deg]).ok().flatten(),
            n_signals: record[c_m].parse().with_context(|| fail("n_signals"))?,
            normalized_frobenius: parse_opt(&record[c_nf])
                .map_err(|e| anyhow::anyhow!("{}: {e}", fail("normalized_frobenius")))?,
            frobenius: parse_opt(&record[c_f])
                .map_err(|e| anyhow::anyhow!("{}: {e}", fail("frobenius")))?,
            wasserstein: parse_opt(&record[c_w])
                .map_err(|e| anyhow::anyhow!("{}: {e}", fail("wasserstein")))?,
            total_messages: parse_opt(&record[c_total])
                .map_err(|e| anyhow::anyhow!("{}: {e}", fail("total_messages")))?,
            error: record[c_err].to_string(),
        });
    }
    Ok(rows)
}

struct Axes {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Axes {
    fn from_points(points: impl Iterator<Item = (f64, f64)>) -> Axes {
        let mut a = Axes {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for (x, y) in points {
            a.x_min = a.x_min.min(x);
            a.x_max = a.x_max.max(x);
            a.y_min = a.y_min.min(y);
            a.y_max = a.y_max.max(y);
        }
        if !a.x_min.is_finite() {
            // no data: draw empty axes over a unit box
            a = Axes {
                x_min: 0.0,
                x_max: 1.0,
                y_min: 0.0,
                y_max: 1.0,
            };
        }
        if a.x_min == a.x_max {
            a.x_max = a.x_min + 1.0;
        }
        if a.y_min == a.y_max {
            a.y_max = a.y_min + 1.0;
        }
        // breathing room
        let dx = 0.05 * (a.x_max - a.x_min);
        let dy = 0.05 * (a.y_max - a.y_min);
        a.x_min -= dx;
        a.x_max += dx;
        a.y_min -= dy;
        a.y_max += dy;
        a
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e6).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Svg {
        let mut body = String::new();
        let _ = write!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = write!(
            body,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="28" font-size="17" font-family="sans-serif" text-anchor="middle">{title}</text>"#,
            WIDTH / 2.0
        );
        Svg { body }
    }

    fn axes(&mut self, a: &Axes, x_label: &str, y_label: &str) {
        let x0 = MARGIN_L;
        let x1 = WIDTH - MARGIN_R;
        let y0 = HEIGHT - MARGIN_B;
        let y1 = MARGIN_T;
        let _ = write!(
            self.body,
            r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
        );
        for k in 0..=5 {
            let t = k as f64 / 5.0;
            let xv = a.x_min + t * (a.x_max - a.x_min);
            let yv = a.y_min + t * (a.y_max - a.y_min);
            let sx = a.sx(xv);
            let sy = a.sy(yv);
            let _ = write!(
                self.body,
                r#"<line x1="{sx}" y1="{y0}" x2="{sx}" y2="{}" stroke="black"/><text x="{sx}" y="{}" font-size="12" font-family="sans-serif" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 20.0,
                fmt_tick(xv)
            );
            let _ = write!(
                self.body,
                r#"<line x1="{}" y1="{sy}" x2="{x0}" y2="{sy}" stroke="black"/><text x="{}" y="{}" font-size="12" font-family="sans-serif" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                sy + 4.0,
                fmt_tick(yv)
            );
        }
        let _ = write!(
            self.body,
            r#"<text x="{}" y="{}" font-size="14" font-family="sans-serif" text-anchor="middle">{x_label}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 18.0
        );
        let _ = write!(
            self.body,
            r#"<text x="22" y="{}" font-size="14" font-family="sans-serif" text-anchor="middle" transform="rotate(-90 22 {})">{y_label}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );
    }

    fn scatter(&mut self, a: &Axes, points: &[(f64, f64)], color: &str) {
        for &(x, y) in points {
            let _ = write!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}" fill-opacity="0.75"/>"#,
                a.sx(x),
                a.sy(y)
            );
        }
    }

    fn polyline(&mut self, a: &Axes, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", a.sx(x), a.sy(y)))
            .collect();
        let _ = write!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
    }

    fn hline(&mut self, a: &Axes, y: f64, color: &str) {
        if y < a.y_min || y > a.y_max {
            return;
        }
        let _ = write!(
            self.body,
            r#"<line x1="{}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
            MARGIN_L,
            a.sy(y),
            WIDTH - MARGIN_R,
            a.sy(y)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        let mut y = MARGIN_T + 8.0;
        for (label, color) in entries {
            let x = WIDTH - MARGIN_R - 150.0;
            let _ = write!(
                self.body,
                r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/><text x="{}" y="{}" font-size="13" font-family="sans-serif">{label}</text>"#,
                y - 10.0,
                x + 18.0,
                y
            );
            y += 20.0;
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>");
        self.body
    }
}

/// Accuracy (normalized Frobenius, falling back to Frobenius) against total
/// message cost, one series per method.
fn accuracy_vs_cost_svg(rows: &[PlotRow]) -> String {
    let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows {
        if !row.error.is_empty() {
            continue;
        }
        let (Some(cost), Some(acc)) = (
            row.total_messages,
            row.normalized_frobenius.or(row.frobenius),
        ) else {
            continue;
        };
        series
            .entry(leak_method(&row.method))
            .or_default()
            .push((cost as f64, acc));
    }
    let axes = Axes::from_points(series.values().flatten().copied());
    let mut svg = Svg::new("accuracy vs total communication cost");
    svg.axes(&axes, "total messages", "normalized Frobenius error");
    let mut legend = Vec::new();
    for (name, color) in METHODS {
        if let Some(points) = series.get(name) {
            svg.scatter(&axes, points, color);
            legend.push((name, color));
        }
    }
    svg.legend(&legend);
    svg.finish()
}

fn leak_method(m: &str) -> &'static str {
    match m {
        "distributed" => "distributed",
        "centralized" => "centralized",
        "baseline" => "baseline",
        _ => "other",
    }
}

/// Centralized-minus-distributed cost against the mean communication
/// degree, averaged per radius grid point.
type GridCell = (Vec<f64>, Vec<f64>, Vec<f64>);

fn crossover_svg(rows: &[PlotRow]) -> String {
    // group runs by radius bits, collect per-method mean cost and mean degree
    let mut grid: BTreeMap<u64, GridCell> = BTreeMap::new();
    for row in rows {
        if !row.error.is_empty() {
            continue;
        }
        let Some(cost) = row.total_messages else {
            continue;
        };
        let entry = grid.entry(row.radius.to_bits()).or_default();
        if let Some(deg) = row.mean_degree {
            entry.0.push(deg);
        }
        match row.method.as_str() {
            "distributed" => entry.1.push(cost as f64),
            "centralized" => entry.2.push(cost as f64),
            _ => {}
        }
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (_radius, (degs, dist, cent)) in grid {
        if degs.is_empty() || dist.is_empty() || cent.is_empty() {
            continue;
        }
        let deg = degs.iter().sum::<f64>() / degs.len() as f64;
        let d = dist.iter().sum::<f64>() / dist.len() as f64;
        let c = cent.iter().sum::<f64>() / cent.len() as f64;
        points.push((deg, c - d));
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let axes = Axes::from_points(points.iter().copied());
    let mut svg = Svg::new("centralized minus distributed cost vs mean degree");
    svg.axes(
        &axes,
        "mean communication degree",
        "cost difference (messages)",
    );
    svg.hline(&axes, 0.0, "#888888");
    svg.polyline(&axes, &points, "#1f77b4");
    svg.scatter(&axes, &points, "#1f77b4");
    svg.finish()
}

/// Total cost against the signal count, one line per method.
fn cost_vs_signals_svg(rows: &[PlotRow]) -> String {
    let mut series: BTreeMap<&str, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        if !row.error.is_empty() {
            continue;
        }
        let Some(cost) = row.total_messages else {
            continue;
        };
        series
            .entry(leak_method(&row.method))
            .or_default()
            .entry(row.n_signals)
            .or_default()
            .push(cost as f64);
    }
    let mut lines: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for (method, by_m) in &series {
        let pts = by_m
            .iter()
            .map(|(m, costs)| (*m as f64, costs.iter().sum::<f64>() / costs.len() as f64))
            .collect();
        lines.insert(method, pts);
    }
    let axes = Axes::from_points(lines.values().flatten().copied());
    let mut svg = Svg::new("total communication cost vs signal count");
    svg.axes(&axes, "signals per node", "total messages");
    let mut legend = Vec::new();
    for (name, color) in METHODS {
        if let Some(points) = lines.get(name) {
            svg.polyline(&axes, points, color);
            svg.scatter(&axes, points, color);
            legend.push((name, color));
        }
    }
    svg.legend(&legend);
    svg.finish()
}

/// Renders every plot applicable to the CSV contents and returns the files
/// written. An empty CSV still yields the accuracy plot with bare axes.
pub fn emit_plots(results_csv: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = read_results(results_csv)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let mut written = Vec::new();

    let accuracy = out_dir.join("accuracy_vs_cost.svg");
    std::fs::write(&accuracy, accuracy_vs_cost_svg(&rows))?;
    written.push(accuracy);

    let kinds: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.kind.as_str()).collect();
    if kinds.contains("sparsity_crossover") {
        let path = out_dir.join("crossover.svg");
        std::fs::write(&path, crossover_svg(&rows))?;
        written.push(path);
    }
    if kinds.contains("signal_sweep") {
        let path = out_dir.join("cost_vs_signals.svg");
        std::fs::write(&path, cost_vs_signals_svg(&rows))?;
        written.push(path);
    }
    if written.is_empty() {
        bail!("no plots produced");
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const HEADER: &str = "experiment,kind,method,n_nodes,radius,mean_degree,removal_rate,n_signals,seed,frobenius,normalized_frobenius,wasserstein,wasserstein_truth_support,total_messages,init_signals,init_results,weight_exchange,central_up,central_down,init_rounds,rounds_used,converged,error\n";

    fn write_csv(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("results.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(HEADER.as_bytes()).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn empty_csv_yields_axes_only_plot() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_csv(dir.path(), "");
        let written = emit_plots(&csv, dir.path()).unwrap();
        assert_eq!(written.len(), 1);
        let svg = std::fs::read_to_string(&written[0]).unwrap();
        assert!(svg.contains("<svg"));
        assert!(svg.contains("total messages"));
        assert!(!svg.contains("circle"));
    }

    #[test]
    fn sparse_rows_produce_three_series() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::new();
        for (method, cost, err) in [
            ("distributed", 1000, 0.9),
            ("centralized", 2000, 0.8),
            ("baseline", 2100, 1.1),
        ] {
            body.push_str(&format!(
                "e,sparse_sweep,{method},50,0.28,11.0,0.5,100,1,1.0,{err},0.5,0.4,{cost},10,5,100,0,0,2,100,false,\n"
            ));
        }
        let csv = write_csv(dir.path(), &body);
        let written = emit_plots(&csv, dir.path()).unwrap();
        let svg = std::fs::read_to_string(&written[0]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("distributed"));
        assert!(svg.contains("baseline"));
    }

    #[test]
    fn crossover_rows_produce_delta_curve() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::new();
        for (radius, deg, dist_cost, cent_cost) in [
            (0.14, 10.0, 1000, 3000),
            (0.18, 16.0, 2000, 1800),
            (0.22, 24.0, 3000, 1500),
        ] {
            body.push_str(&format!(
                "e,sparsity_crossover,distributed,200,{radius},{deg},0.7,100,1,,,,,{dist_cost},10,5,100,0,0,2,100,false,\n"
            ));
            body.push_str(&format!(
                "e,sparsity_crossover,centralized,200,{radius},{deg},0.7,100,1,,,,,{cent_cost},0,0,0,90,10,,500,true,\n"
            ));
        }
        let csv = write_csv(dir.path(), &body);
        let written = emit_plots(&csv, dir.path()).unwrap();
        assert!(written.iter().any(|p| p.ends_with("crossover.svg")));
        let svg = std::fs::read_to_string(dir.path().join("crossover.svg")).unwrap();
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("stroke-dasharray")); // the zero line
    }

    #[test]
    fn malformed_rows_are_rejected_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_csv(
            dir.path(),
            "e,single,distributed,not_a_number,0.3,5.0,0.5,10,1,,,,,,,,,,,,,,\n",
        );
        let err = emit_plots(&csv, dir.path()).unwrap_err().to_string();
        assert!(err.contains("row 2"), "unexpected error: {err}");
    }
}
