use std::fmt::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::svg::{Panel, Scale, Svg, PALETTE};
use super::{Fig1Table, Fig3Result, Method};
use crate::error::{Error, Result};
use crate::hafnian::{pm_upper_bound, PmBoundInput};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(Error::input(format!("unknown output format {s:?}"))),
        }
    }
}

/// Experiment results that can be written in every output format.
pub trait Report: Serialize {
    /// File stem, e.g. `fig3` for `fig3.csv`.
    fn stem(&self) -> &'static str;
    fn to_csv(&self) -> String;
    fn to_svg(&self) -> String;

    fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
            Format::Svg => Ok(self.to_svg()),
        }
    }
}

/// Writes `dir/<stem>.<ext>`, creating `dir` if needed, and returns the path.
pub fn emit_outputs<T: Report + ?Sized>(report: &T, format: Format, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{}", report.stem(), format.extension()));
    std::fs::write(&path, report.render(format)?)?;
    Ok(path)
}

impl Report for Fig3Result {
    fn stem(&self) -> &'static str {
        "fig3"
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("method,checkpoint,mean,stddev,runs\n");
        for c in &self.curves {
            for i in 0..c.checkpoints.len() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.method, c.checkpoints[i], c.mean[i], c.stddev[i], c.runs
                )
                .unwrap();
            }
        }
        out
    }

    fn to_svg(&self) -> String {
        let (pw, ph) = (380.0, 300.0);
        let mut svg = Svg::new(2.0 * pw + 200.0, ph + 120.0);
        let meta = serde_json::json!({
            "id": self.config.id,
            "graph_fingerprint": self.provenance.graph_fingerprint,
            "master_seed": self.provenance.master_seed,
            "repetitions": self.config.repetitions,
        });
        svg.metadata(&meta.to_string());

        let refs: Vec<f64> = self.reference_lines.iter().map(|r| r.edges as f64).collect();
        let mut lo = refs.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = refs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut x_hi: f64 = 1.0;
        for c in &self.curves {
            for i in 0..c.mean.len() {
                lo = lo.min(c.mean[i] - c.stddev[i]);
                hi = hi.max(c.mean[i] + c.stddev[i]);
            }
            x_hi = x_hi.max(*c.checkpoints.last().unwrap_or(&1) as f64);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        let y = Scale::linear(lo.floor().max(0.0), hi.ceil());
        let x = Scale::log(1.0, x_hi);

        let panels = [
            ("Random search", [Method::UniformRs, Method::GbsRs]),
            ("Simulated annealing", [Method::UniformSa, Method::GbsSa]),
        ];
        for (pi, (title, methods)) in panels.iter().enumerate() {
            let panel = Panel {
                left: 70.0 + pi as f64 * (pw + 90.0),
                top: 40.0,
                width: pw,
                height: ph,
                x,
                y,
            };
            svg.axes(&panel, title, "samples", "best edge count");
            for (ri, r) in self.reference_lines.iter().enumerate() {
                let py = panel.py(r.edges as f64);
                let colour = PALETTE[3 + ri % 3];
                svg.line(panel.left, py, panel.left + pw, py, colour, true);
                svg.text(
                    panel.left + pw - 4.0,
                    py - 4.0,
                    "end",
                    &format!("{} {}", r.name, r.edges),
                );
            }
            let mut legend_y = panel.top + ph + 56.0;
            for (mi, m) in methods.iter().enumerate() {
                let Some(c) = self.curve(*m) else { continue };
                let colour = PALETTE[mi];
                let pts: Vec<(f64, f64)> = c
                    .checkpoints
                    .iter()
                    .zip(&c.mean)
                    .map(|(&cp, &mean)| (panel.px(cp as f64), panel.py(mean)))
                    .collect();
                svg.polyline(&pts, colour, false);
                for (i, &(px, py)) in pts.iter().enumerate() {
                    let (m, s) = (c.mean[i], c.stddev[i]);
                    svg.line(px, panel.py(m - s), px, panel.py(m + s), colour, false);
                    svg.circle(px, py, 3.0, colour, 1.0);
                }
                svg.circle(panel.left + 6.0, legend_y - 4.0, 4.0, colour, 1.0);
                svg.text(panel.left + 16.0, legend_y, "start", m.name());
                legend_y += 16.0;
            }
        }
        svg.finish()
    }
}

/// Summary written into the fig1 SVG so the omitted rows stay on record.
#[derive(Serialize)]
struct Fig1SvgMeta<'a> {
    k: usize,
    seed: u64,
    version: &'a str,
    rows: usize,
    plotted: usize,
    omitted_zero_hafnian: usize,
}

impl Report for Fig1Table {
    fn stem(&self) -> &'static str {
        "fig1"
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("p,index,edges,hafnian,pm_bound,bound_edges,zero\n");
        for r in &self.rows {
            let bound_edges = r.bound_edges.map(|b| b.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.p, r.index, r.edges, r.hafnian, r.pm_bound, bound_edges, r.zero
            )
            .unwrap();
        }
        out
    }

    fn to_svg(&self) -> String {
        let k = self.k;
        let max_edges = k * k.saturating_sub(1) / 2;
        let plotted: Vec<_> = self.rows.iter().filter(|r| !r.zero).collect();
        let bound: Vec<(usize, f64)> = (0..=max_edges)
            .filter_map(|l| PmBoundInput::new(k, l).ok().map(|b| (l, pm_upper_bound(b))))
            .filter(|&(_, b)| b >= 1.0)
            .collect();
        let y_hi = plotted
            .iter()
            .map(|r| r.hafnian as f64)
            .chain(bound.iter().map(|b| b.1))
            .fold(1.0, f64::max);

        let mut svg = Svg::new(620.0, 440.0);
        let meta = Fig1SvgMeta {
            k,
            seed: self.seed,
            version: &self.version,
            rows: self.rows.len(),
            plotted: plotted.len(),
            omitted_zero_hafnian: self.rows.len() - plotted.len(),
        };
        svg.metadata(&serde_json::to_string(&meta).expect("plain struct serializes"));
        let panel = Panel {
            left: 80.0,
            top: 40.0,
            width: 500.0,
            height: 320.0,
            x: Scale::linear(0.0, max_edges as f64),
            y: Scale::log(1.0, y_hi),
        };
        svg.axes(
            &panel,
            &format!("Perfect matchings of G(n = {k}, p)"),
            "edges",
            "Hafnian",
        );
        for (i, p) in self.probs.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            for r in plotted.iter().filter(|r| r.p == *p) {
                svg.circle(panel.px(r.edges as f64), panel.py(r.hafnian as f64), 2.0, colour, 0.35);
            }
        }
        let pts: Vec<(f64, f64)> = bound.iter().map(|&(l, b)| (panel.px(l as f64), panel.py(b))).collect();
        svg.polyline(&pts, "black", true);
        svg.text(
            panel.left,
            panel.top + panel.height + 60.0,
            "start",
            &format!(
                "{} of {} graphs plotted; {} with no perfect matching omitted from the log axis",
                meta.plotted, meta.rows, meta.omitted_zero_hafnian
            ),
        );
        svg.finish()
    }
}
