//! Dependency-free SVG charts over sweep results: paired user-weight /
//! producer-fraction bars, iterations-vs-producers lines, and
//! utility-vs-temperature lines. Every chart gets a CSV sidecar with the
//! plotted values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sweep::mean_and_stderr;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

const SERIES_COLORS: &[&str] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    .as_slice();

#[derive(Debug, Clone)]
struct ResultRow {
    dataset: String,
    rule: String,
    tau: Option<f64>,
    n: usize,
    d: usize,
    converged: bool,
    iterations: usize,
    avg_prod_utility: f64,
}

#[derive(Debug, Clone)]
struct FeatureRow {
    dataset: String,
    rule: String,
    tau: Option<f64>,
    n: usize,
    d: usize,
    embed_seed: u64,
    run_seed: u64,
    feature: usize,
    user_weight: f64,
    producer_fraction: f64,
}

fn parse_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(Error::BadRecord {
                line: idx as u64 + 1,
                reason: format!("expected 14 fields, found {}", fields.len()),
            });
        }
        let bad = |reason: &str| Error::BadRecord { line: idx as u64 + 1, reason: reason.into() };
        rows.push(ResultRow {
            dataset: fields[0].to_string(),
            rule: fields[1].to_string(),
            tau: if fields[2].is_empty() {
                None
            } else {
                Some(fields[2].parse().map_err(|_| bad("bad tau"))?)
            },
            n: fields[3].parse().map_err(|_| bad("bad n"))?,
            d: fields[4].parse().map_err(|_| bad("bad d"))?,
            converged: fields[7].parse().map_err(|_| bad("bad converged"))?,
            iterations: fields[8].parse().map_err(|_| bad("bad iterations"))?,
            avg_prod_utility: fields[11].parse().map_err(|_| bad("bad utility"))?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyResults);
    }
    Ok(rows)
}

fn parse_features(path: &Path) -> Result<Vec<FeatureRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::BadRecord {
                line: idx as u64 + 1,
                reason: format!("expected 10 fields, found {}", fields.len()),
            });
        }
        let bad = |reason: &str| Error::BadRecord { line: idx as u64 + 1, reason: reason.into() };
        rows.push(FeatureRow {
            dataset: fields[0].to_string(),
            rule: fields[1].to_string(),
            tau: if fields[2].is_empty() {
                None
            } else {
                Some(fields[2].parse().map_err(|_| bad("bad tau"))?)
            },
            n: fields[3].parse().map_err(|_| bad("bad n"))?,
            d: fields[4].parse().map_err(|_| bad("bad d"))?,
            embed_seed: fields[5].parse().map_err(|_| bad("bad embed_seed"))?,
            run_seed: fields[6].parse().map_err(|_| bad("bad run_seed"))?,
            feature: fields[7].parse().map_err(|_| bad("bad feature"))?,
            user_weight: fields[8].parse().map_err(|_| bad("bad user_weight"))?,
            producer_fraction: fields[9].parse().map_err(|_| bad("bad fraction"))?,
        });
    }
    Ok(rows)
}

fn rule_tag(rule: &str, tau: Option<f64>) -> String {
    match tau {
        Some(t) => format!("{rule}_tau{t}"),
        None => rule.to_string(),
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        let _ = write!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = write!(
            body,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/><text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, color: &str, width: f64, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = write!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width}"{dash}/>"#
        );
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, color: &str) {
        let _ = write!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="{color}"/>"#
        );
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let _ = write!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"/>"#);
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
        let _ = write!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="{size}">{}</text>"#,
            escape(content)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn plot_x(frac: f64) -> f64 {
    MARGIN_LEFT + frac * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
}

fn plot_y(frac: f64) -> f64 {
    HEIGHT - MARGIN_BOTTOM - frac * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
}

fn axes(svg: &mut Svg, x_label: &str, y_label: &str, y_max: f64) {
    svg.line(plot_x(0.0), plot_y(0.0), plot_x(1.0), plot_y(0.0), "#333", 1.0, false);
    svg.line(plot_x(0.0), plot_y(0.0), plot_x(0.0), plot_y(1.0), "#333", 1.0, false);
    svg.text((plot_x(0.0) + plot_x(1.0)) / 2.0, HEIGHT - 14.0, "middle", 12.0, x_label);
    svg.text(16.0, MARGIN_TOP - 10.0, "start", 12.0, y_label);
    for tick in 0..=4 {
        let frac = tick as f64 / 4.0;
        let y = plot_y(frac);
        svg.line(plot_x(0.0) - 4.0, y, plot_x(0.0), y, "#333", 1.0, false);
        svg.text(plot_x(0.0) - 8.0, y + 4.0, "end", 10.0, &format!("{:.3}", frac * y_max));
    }
}

/// Paired bars: average user weight (blue, left) and producer fraction
/// (red, right) per feature, for a single instance.
fn bar_chart(title: &str, user_weights: &[f64], fractions: &[f64]) -> String {
    let mut svg = Svg::new(title);
    let y_max = user_weights
        .iter()
        .chain(fractions)
        .copied()
        .fold(0.0f64, f64::max)
        .max(1e-12);
    axes(&mut svg, "feature", "weight / fraction", y_max);
    let d = user_weights.len();
    let slot = 1.0 / d as f64;
    for f in 0..d {
        let x0 = plot_x(f as f64 * slot + 0.15 * slot);
        let bar_w = (plot_x(slot * 0.35) - plot_x(0.0)).max(1.0);
        let uw_h = plot_y(0.0) - plot_y(user_weights[f] / y_max);
        svg.rect(x0, plot_y(user_weights[f] / y_max), bar_w, uw_h, SERIES_COLORS[0]);
        let pf_h = plot_y(0.0) - plot_y(fractions[f] / y_max);
        svg.rect(x0 + bar_w, plot_y(fractions[f] / y_max), bar_w, pf_h, SERIES_COLORS[1]);
        svg.text(
            plot_x((f as f64 + 0.5) * slot),
            plot_y(0.0) + 16.0,
            "middle",
            10.0,
            &format!("{f}"),
        );
    }
    svg.text(plot_x(0.0), MARGIN_TOP + 4.0, "start", 11.0, "blue: avg user weight");
    svg.text(plot_x(0.45), MARGIN_TOP + 4.0, "start", 11.0, "red: producer fraction");
    svg.finish()
}

struct Series {
    label: String,
    /// (x, mean, stderr)
    points: Vec<(f64, f64, f64)>,
}

fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool) -> String {
    let mut svg = Svg::new(title);
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| if log_x { p.0.log10() } else { p.0 }))
        .collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (x_max - x_min).max(1e-12);
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1 + p.2))
        .fold(0.0f64, f64::max)
        .max(1e-12);
    axes(&mut svg, x_label, y_label, y_max);

    for (si, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[si % SERIES_COLORS.len()];
        let mut prev: Option<(f64, f64)> = None;
        for &(x, mean, stderr) in &s.points {
            let xv = if log_x { x.log10() } else { x };
            let px = plot_x((xv - x_min) / span);
            let py = plot_y(mean / y_max);
            if let Some((lx, ly)) = prev {
                svg.line(lx, ly, px, py, color, 1.5, false);
            }
            svg.circle(px, py, 2.5, color);
            if stderr > 0.0 {
                let hi = plot_y(((mean + stderr) / y_max).min(1.0));
                let lo = plot_y(((mean - stderr).max(0.0)) / y_max);
                svg.line(px, hi, px, lo, color, 1.0, false);
            }
            prev = Some((px, py));
        }
        svg.text(
            plot_x(1.0) - 4.0,
            MARGIN_TOP + 14.0 * si as f64 + 4.0,
            "end",
            11.0,
            &s.label,
        );
        svg.circle(plot_x(1.0) - 90.0, MARGIN_TOP + 14.0 * si as f64, 3.0, color);
    }

    // X tick labels at each distinct x.
    let mut ticks: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for t in ticks {
        let xv = if log_x { t.log10() } else { t };
        let px = plot_x((xv - x_min) / span);
        svg.line(px, plot_y(0.0), px, plot_y(0.0) + 4.0, "#333", 1.0, false);
        svg.text(px, plot_y(0.0) + 16.0, "middle", 10.0, &format!("{t}"));
    }
    svg.finish()
}

fn write_chart(out_dir: &Path, stem: &str, svg: String, sidecar: String) -> Result<Vec<PathBuf>> {
    let svg_path = out_dir.join(format!("{stem}.svg"));
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let mut f = fs::File::create(&svg_path)?;
    f.write_all(svg.as_bytes())?;
    fs::write(&csv_path, sidecar)?;
    Ok(vec![svg_path, csv_path])
}

/// Renders every chart the results support and returns the written paths.
/// Fails without writing anything when the results file has no data rows.
pub fn emit_charts(results_path: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let rows = parse_results(results_path)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    // (a) Paired bar charts per (dataset, rule, tau, d): one fixed instance
    // (the first in file order), from the features sidecar.
    let features_path = results_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("features.csv");
    if features_path.exists() {
        let features = parse_features(&features_path)?;
        let mut groups: BTreeMap<(String, String, String, usize), Vec<&FeatureRow>> =
            BTreeMap::new();
        for row in &features {
            let key = (
                row.dataset.clone(),
                row.rule.clone(),
                rule_tag(&row.rule, row.tau),
                row.d,
            );
            groups.entry(key).or_default().push(row);
        }
        for ((dataset, _, tag, d), rows) in groups {
            // Pin the instance: first (n, embed seed, run seed) in file order.
            let pin = (rows[0].n, rows[0].embed_seed, rows[0].run_seed);
            let mut user_weights = vec![0.0; d];
            let mut fractions = vec![0.0; d];
            for row in rows
                .iter()
                .filter(|r| (r.n, r.embed_seed, r.run_seed) == pin)
            {
                user_weights[row.feature] = row.user_weight;
                fractions[row.feature] = row.producer_fraction;
            }
            let title = format!("{dataset} {tag} d={d} n={} seed={}", pin.0, pin.1);
            let mut sidecar = String::from("feature,user_weight,producer_fraction\n");
            for f in 0..d {
                let _ = writeln!(sidecar, "{f},{},{}", user_weights[f], fractions[f]);
            }
            written.extend(write_chart(
                out_dir,
                &format!("bars_{dataset}_{tag}_d{d}"),
                bar_chart(&title, &user_weights, &fractions),
                sidecar,
            )?);
        }
    }

    // (b) Iterations vs producers per (dataset, rule, tau), one line per d,
    // converged runs only.
    {
        let mut groups: BTreeMap<(String, String), BTreeMap<(usize, usize), Vec<f64>>> =
            BTreeMap::new();
        for row in rows.iter().filter(|r| r.converged) {
            groups
                .entry((row.dataset.clone(), rule_tag(&row.rule, row.tau)))
                .or_default()
                .entry((row.d, row.n))
                .or_default()
                .push(row.iterations as f64);
        }
        for ((dataset, tag), cells) in groups {
            let mut by_d: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
            for ((d, n), samples) in cells {
                let (mean, stderr) = mean_and_stderr(&samples);
                by_d.entry(d).or_default().push((n as f64, mean, stderr));
            }
            let series: Vec<Series> = by_d
                .into_iter()
                .map(|(d, points)| Series { label: format!("d={d}"), points })
                .collect();
            let mut sidecar = String::from("d,n,mean_iterations,stderr\n");
            for s in &series {
                for &(n, mean, stderr) in &s.points {
                    let _ = writeln!(sidecar, "{},{n},{mean},{stderr}", &s.label[2..]);
                }
            }
            written.extend(write_chart(
                out_dir,
                &format!("iterations_{dataset}_{tag}"),
                line_chart(
                    &format!("{dataset} {tag}: iterations to convergence"),
                    "producers n",
                    "iterations",
                    &series,
                    false,
                ),
                sidecar,
            )?);
        }
    }

    // (c) Average producer utility vs temperature per (dataset, d), one
    // line per n; linear-rule mean drawn as a dashed reference.
    {
        let mut groups: BTreeMap<(String, usize), BTreeMap<(usize, u64), Vec<f64>>> =
            BTreeMap::new();
        let mut linear: BTreeMap<(String, usize, usize), Vec<f64>> = BTreeMap::new();
        for row in rows.iter().filter(|r| r.converged) {
            match row.tau {
                Some(tau) => {
                    groups
                        .entry((row.dataset.clone(), row.d))
                        .or_default()
                        .entry((row.n, tau.to_bits()))
                        .or_default()
                        .push(row.avg_prod_utility);
                }
                None => {
                    linear
                        .entry((row.dataset.clone(), row.d, row.n))
                        .or_default()
                        .push(row.avg_prod_utility);
                }
            }
        }
        for ((dataset, d), cells) in groups {
            let mut by_n: BTreeMap<usize, Vec<(f64, f64, f64)>> = BTreeMap::new();
            for ((n, tau_bits), samples) in cells {
                let (mean, stderr) = mean_and_stderr(&samples);
                by_n.entry(n).or_default().push((f64::from_bits(tau_bits), mean, stderr));
            }
            let mut series = Vec::new();
            let mut sidecar = String::from("n,tau,mean_avg_prod_utility,stderr\n");
            for (n, mut points) in by_n {
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                for &(tau, mean, stderr) in &points {
                    let _ = writeln!(sidecar, "{n},{tau},{mean},{stderr}");
                }
                series.push(Series { label: format!("n={n}"), points });
            }
            let mut svg_text = line_chart(
                &format!("{dataset} d={d}: avg producer utility vs temperature"),
                "softmax temperature (log scale)",
                "avg producer utility",
                &series,
                true,
            );
            // Dashed reference per n for the linear rule, when present.
            let refs: Vec<(usize, f64)> = linear
                .iter()
                .filter(|((ds, dd, _), _)| ds == &dataset && *dd == d)
                .map(|((_, _, n), samples)| (*n, mean_and_stderr(samples).0))
                .collect();
            if !refs.is_empty() {
                let y_max = series
                    .iter()
                    .flat_map(|s| s.points.iter().map(|p| p.1 + p.2))
                    .fold(0.0f64, f64::max)
                    .max(1e-12);
                let mut extra = String::new();
                for (n, mean) in refs {
                    if mean <= y_max {
                        let y = plot_y(mean / y_max);
                        let _ = write!(
                            extra,
                            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555" stroke-width="1" stroke-dasharray="6 4"/><text x="{:.2}" y="{:.2}" text-anchor="start" font-family="sans-serif" font-size="9">linear n={n}</text>"##,
                            plot_x(0.0),
                            plot_x(1.0),
                            plot_x(0.0) + 2.0,
                            y - 3.0,
                        );
                        let _ = writeln!(sidecar, "{n},linear,{mean},0");
                    }
                }
                svg_text = svg_text.replace("</svg>", &format!("{extra}</svg>"));
            }
            written.extend(write_chart(
                out_dir,
                &format!("utility_{dataset}_d{d}"),
                svg_text,
                sidecar,
            )?);
        }
    }

    Ok(written)
}
