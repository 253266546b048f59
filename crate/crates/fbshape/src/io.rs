//! File formats and report emission: domain/convex-body JSON, CSV dumps,
//! static SVG artifacts, and the per-run manifest. All writers are
//! deterministic: identical inputs produce byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cheeger::CheegerResult;
use crate::error::{Error, Result};
use crate::fem::SourceSpec;
use crate::geometry::{ConvexBody, StarDomain};

pub const SCHEMA: &str = "fbshape/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainFile {
    pub center: [f64; 2],
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl DomainFile {
    pub fn from_domain(d: &StarDomain<f64>) -> Self {
        Self {
            center: d.center(),
            a0: d.mean_radius(),
            cos: d.cos_coeffs().to_vec(),
            sin: d.sin_coeffs().to_vec(),
        }
    }

    pub fn to_domain(&self) -> Result<StarDomain<f64>> {
        StarDomain::new(self.center, self.a0, self.cos.clone(), self.sin.clone())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexFile {
    pub vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin_eps: Option<f64>,
}

impl ConvexFile {
    pub fn from_body(b: &ConvexBody<f64>) -> Self {
        Self { vertices: b.vertices().to_vec(), thin_eps: b.thin_eps }
    }

    pub fn to_body(&self) -> Result<ConvexBody<f64>> {
        let mut b = ConvexBody::new(self.vertices.clone())?;
        b.thin_eps = self.thin_eps;
        Ok(b)
    }
}

pub fn read_domain(path: &Path) -> Result<StarDomain<f64>> {
    let text = fs::read_to_string(path)?;
    let file: DomainFile = serde_json::from_str(&text)?;
    file.to_domain()
}

pub fn write_domain(path: &Path, domain: &StarDomain<f64>) -> Result<()> {
    let text = serde_json::to_string_pretty(&DomainFile::from_domain(domain))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_convex(path: &Path) -> Result<ConvexBody<f64>> {
    let text = fs::read_to_string(path)?;
    let file: ConvexFile = serde_json::from_str(&text)?;
    file.to_body()
}

pub fn write_convex(path: &Path, body: &ConvexBody<f64>) -> Result<()> {
    let text = serde_json::to_string_pretty(&ConvexFile::from_body(body))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Source specification grammar:
///   const:C                    f ≡ C
///   disk:R[,SCALE]             SCALE·χ_{disk of radius R at the origin}
///   rect:HW,HH[,SCALE]         SCALE·χ_{rectangle [−HW,HW]×[−HH,HH]}
///   line:LENGTH,EPS,A          thin rectangle of width EPS carrying line
///                              density A (mass A per unit length)
///   poly:c0,c1,...             radial polynomial c0 + c1·r + ... at the origin
pub fn parse_source(s: &str) -> Result<SourceSpec<f64>> {
    let bad = |m: &str| Error::InvalidArgument(format!("source `{s}`: {m}"));
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad("expected KIND:ARGS"))?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("non-numeric argument"))?;
    match kind {
        "const" => {
            if nums.len() != 1 {
                return Err(bad("const takes one value"));
            }
            Ok(SourceSpec::Constant(nums[0]))
        }
        "disk" => {
            if nums.is_empty() || nums.len() > 2 {
                return Err(bad("disk takes R[,SCALE]"));
            }
            let body = ConvexBody::regular_ngon([0.0, 0.0], nums[0], 128)?;
            Ok(SourceSpec::Indicator { body, scale: *nums.get(1).unwrap_or(&1.0) })
        }
        "rect" => {
            if nums.len() < 2 || nums.len() > 3 {
                return Err(bad("rect takes HW,HH[,SCALE]"));
            }
            let body = ConvexBody::rectangle([0.0, 0.0], nums[0], nums[1])?;
            Ok(SourceSpec::Indicator { body, scale: *nums.get(2).unwrap_or(&1.0) })
        }
        "line" => {
            if nums.len() != 3 {
                return Err(bad("line takes LENGTH,EPS,A"));
            }
            let body = ConvexBody::thin_rectangle([0.0, 0.0], nums[0] / 2.0, nums[1])?;
            Ok(SourceSpec::ThinLine { body, mass_per_length: nums[2] })
        }
        "poly" => {
            if nums.is_empty() {
                return Err(bad("poly takes at least one coefficient"));
            }
            Ok(SourceSpec::RadialPoly { center: [0.0, 0.0], coeffs: nums })
        }
        _ => Err(bad("unknown kind")),
    }
}

/// Shortest round-trip decimal; deterministic across runs.
pub fn fmt(x: f64) -> String {
    if x == 0.0 {
        "0".into() // avoid the "-0" artifact
    } else {
        format!("{x}")
    }
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Config echo plus tool version, written alongside every command's outputs.
pub fn write_manifest(dir: &Path, command: &str, config: Value) -> Result<()> {
    let manifest = json!({
        "schema": SCHEMA,
        "tool": "fbshape",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    write_json(&dir.join("manifest.json"), &manifest)
}

fn svg_open(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> String {
    let pad = 0.05 * (xmax - xmin).max(ymax - ymin).max(1e-9);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        fmt(xmin - pad),
        fmt(ymin - pad),
        fmt(xmax - xmin + 2.0 * pad),
        fmt(ymax - ymin + 2.0 * pad),
    )
}

fn polyline(points: &[[f64; 2]], stroke: &str, width: f64, close: bool) -> String {
    let mut d = String::from("M");
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            d.push('L');
        }
        // SVG y grows downward; flip so the plot is right-side up
        d.push_str(&format!("{},{}", fmt(p[0]), fmt(-p[1])));
    }
    if close {
        d.push('Z');
    }
    format!(
        "<path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>\n",
        fmt(width)
    )
}

/// Boundary curves of one or more domains, 512 samples each.
pub fn domains_svg(domains: &[(&StarDomain<f64>, &str)]) -> String {
    let mut all: Vec<Vec<[f64; 2]>> = Vec::new();
    for (d, _) in domains {
        let n = 512usize;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| d.point(2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        all.push(pts);
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for pts in &all {
        for p in pts {
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(-p[1]);
            ymax = ymax.max(-p[1]);
        }
    }
    let mut svg = svg_open(xmin, ymin, xmax, ymax);
    let w = 0.004 * (xmax - xmin).max(ymax - ymin).max(1e-9);
    for (pts, (_, color)) in all.iter().zip(domains) {
        svg.push_str(&polyline(pts, color, w, true));
    }
    svg.push_str("</svg>\n");
    svg
}

/// The polygon and its rounded Cheeger set (edges plus corner arcs).
pub fn cheeger_svg(body: &ConvexBody<f64>, res: &CheegerResult<f64>) -> String {
    let verts = body.vertices();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in verts {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(-p[1]);
        ymax = ymax.max(-p[1]);
    }
    let mut svg = svg_open(xmin, ymin, xmax, ymax);
    let w = 0.004 * (xmax - xmin).max(ymax - ymin).max(1e-9);
    svg.push_str(&polyline(verts, "black", w, true));
    // edges and arcs alternate around the rounded boundary; arcs sweep
    // counterclockwise in plot coordinates, hence sweep flag 1 after y-flip
    let mut d = String::new();
    for (i, (a, b)) in res.edges.iter().enumerate() {
        if i == 0 {
            d.push_str(&format!("M{},{}", fmt(a[0]), fmt(-a[1])));
        } else {
            d.push_str(&format!("L{},{}", fmt(a[0]), fmt(-a[1])));
        }
        d.push_str(&format!("L{},{}", fmt(b[0]), fmt(-b[1])));
        let arc = &res.arcs[(i + 1) % res.arcs.len()];
        d.push_str(&format!(
            "A{r},{r} 0 0 1 {},{}",
            fmt(arc.end[0]),
            fmt(-arc.end[1]),
            r = fmt(arc.radius),
        ));
    }
    d.push('Z');
    svg.push_str(&format!(
        "<path d=\"{d}\" fill=\"none\" stroke=\"crimson\" stroke-width=\"{}\"/>\n",
        fmt(w)
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Fixed-size sparkline of a positive series on a log10 scale.
pub fn sparkline_svg(values: &[f64]) -> String {
    let n = values.len().max(2);
    let logs: Vec<f64> = values.iter().map(|&v| v.max(1e-16).log10()).collect();
    let lo = logs.iter().cloned().fold(f64::MAX, f64::min);
    let hi = logs.iter().cloned().fold(f64::MIN, f64::max);
    let span = (hi - lo).max(1e-9);
    let pts: Vec<[f64; 2]> = logs
        .iter()
        .enumerate()
        .map(|(i, &l)| [100.0 * i as f64 / (n - 1) as f64, -30.0 * (1.0 - (hi - l) / span)])
        .collect();
    let mut svg = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-2 -2 104 34\">\n",
    );
    svg.push_str(&polyline(&pts, "steelblue", 0.8, false));
    svg.push_str("</svg>\n");
    svg
}
