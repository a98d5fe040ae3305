//! Raster (PNG) and vector (SVG) output for point clouds and circle
//! configurations, plus the deformation animation driver.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{CircleKind, GenCircle};
use crate::deform::{sample_path, validate, DegeneracyFlag};
use crate::error::{Error, Result};
use crate::json::SCHEMA_VERSION;
use crate::limitset::{limit_set, ExplorationPolicy, LimitSetCloud};
use crate::moebius::{Complex, RiemannPoint};

/// Environment variable capping the worker threads used by `render_frames`.
pub const THREADS_ENV: &str = "CONE_DEFORM_THREADS";

/// Smallest accepted image side in pixels.
pub const MIN_SIDE: u32 = 16;

/// Viewport and styling of a rendered image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewSpec {
    /// `[xmin, xmax, ymin, ymax]`.
    pub bbox: [f64; 4],
    pub width: u32,
    pub height: u32,
    /// Radius of a plotted point in pixels; 0 marks a single pixel.
    pub point_size: u32,
    pub background: [u8; 3],
    pub point_color: [u8; 3],
    pub circle_color: [u8; 3],
}

impl Default for ViewSpec {
    fn default() -> Self {
        ViewSpec {
            bbox: [-3.0, 3.0, -3.0, 3.0],
            width: 800,
            height: 800,
            point_size: 0,
            background: [255, 255, 255],
            point_color: [0, 0, 0],
            circle_color: [200, 30, 30],
        }
    }
}

impl ViewSpec {
    pub fn validate(&self) -> Result<()> {
        let [x0, x1, y0, y1] = self.bbox;
        if !(self.bbox.iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1) {
            return Err(Error::InvalidParameter(format!(
                "bounding box must satisfy xmin < xmax and ymin < ymax, got {:?}",
                self.bbox
            )));
        }
        if self.width < MIN_SIDE || self.height < MIN_SIDE {
            return Err(Error::InvalidParameter(format!(
                "image must be at least {MIN_SIDE}x{MIN_SIDE}, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// Pixel containing `z`, or `None` when `z` lies outside the box.
    pub fn pixel(&self, z: Complex) -> Option<(u32, u32)> {
        let [x0, x1, y0, y1] = self.bbox;
        if !(z.re >= x0 && z.re <= x1 && z.im >= y0 && z.im <= y1) {
            return None;
        }
        let col = ((z.re - x0) / (x1 - x0) * f64::from(self.width)).floor() as u32;
        let row = ((y1 - z.im) / (y1 - y0) * f64::from(self.height)).floor() as u32;
        Some((col.min(self.width - 1), row.min(self.height - 1)))
    }

    /// Continuous pixel coordinates, unclipped.
    fn to_screen(&self, z: Complex) -> (f64, f64) {
        let [x0, x1, y0, y1] = self.bbox;
        (
            (z.re - x0) / (x1 - x0) * f64::from(self.width),
            (y1 - z.im) / (y1 - y0) * f64::from(self.height),
        )
    }

    fn pixel_size(&self) -> f64 {
        let [x0, x1, y0, y1] = self.bbox;
        ((x1 - x0) / f64::from(self.width)).min((y1 - y0) / f64::from(self.height))
    }
}

/// Something drawn on top of the point cloud.
#[derive(Debug, Clone, PartialEq)]
pub enum Overlay {
    Circle(GenCircle),
    Polyline(Vec<Complex>),
}

/// Point samples of an overlay spaced at most one pixel apart inside the view.
fn overlay_samples(o: &Overlay, view: &ViewSpec) -> Vec<Complex> {
    let step = view.pixel_size() * 0.5;
    match o {
        Overlay::Polyline(pts) => pts.windows(2).flat_map(|w| segment(w[0], w[1], step)).collect(),
        Overlay::Circle(c) => match c.kind() {
            CircleKind::Circle => match c.center_radius() {
                Ok((center, r)) => {
                    let n = ((std::f64::consts::TAU * r / step).ceil() as usize).clamp(16, 2_000_000);
                    (0..n)
                        .map(|k| center + Complex::from_polar(r, std::f64::consts::TAU * k as f64 / n as f64))
                        .collect()
                }
                Err(_) => Vec::new(),
            },
            CircleKind::Line => {
                let (p, q) = line_in_box(c, view.bbox);
                match (p, q) {
                    (Some(p), Some(q)) => segment(p, q, step),
                    _ => Vec::new(),
                }
            }
            CircleKind::Point | CircleKind::Imaginary => Vec::new(),
        },
    }
}

fn segment(p: Complex, q: Complex, step: f64) -> Vec<Complex> {
    let n = (((q - p).norm() / step).ceil() as usize).clamp(1, 2_000_000);
    (0..=n).map(|k| p + (q - p) * (k as f64 / n as f64)).collect()
}

/// Endpoints of the chord of the line `a x + b y + h = 0` through the box.
fn line_in_box(c: &GenCircle, bbox: [f64; 4]) -> (Option<Complex>, Option<Complex>) {
    let [x0, x1, y0, y1] = bbox;
    let mut hits: Vec<Complex> = Vec::new();
    if c.b.abs() > 1e-300 {
        for x in [x0, x1] {
            let y = -(c.a * x + c.h) / c.b;
            if (y0..=y1).contains(&y) {
                hits.push(Complex::new(x, y));
            }
        }
    }
    if c.a.abs() > 1e-300 {
        for y in [y0, y1] {
            let x = -(c.b * y + c.h) / c.a;
            if (x0..=x1).contains(&x) {
                hits.push(Complex::new(x, y));
            }
        }
    }
    let p = hits.first().copied();
    let q = hits
        .iter()
        .copied()
        .max_by(|u, v| (u - hits[0]).norm().total_cmp(&(v - hits[0]).norm()));
    (p, q)
}

fn stamp(img: &mut RgbImage, col: u32, row: u32, radius: u32, color: Rgb<u8>) {
    let r = radius as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r * r {
                continue;
            }
            let (x, y) = (col as i64 + dx, row as i64 + dy);
            if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
    }
}

/// Rasterizes the finite points inside the view, then the overlays.
pub fn render_image(points: &[RiemannPoint], overlays: &[Overlay], view: &ViewSpec) -> Result<RgbImage> {
    view.validate()?;
    let mut img = RgbImage::from_pixel(view.width, view.height, Rgb(view.background));
    for p in points {
        if let Some((col, row)) = p.finite().and_then(|z| view.pixel(z)) {
            stamp(&mut img, col, row, view.point_size, Rgb(view.point_color));
        }
    }
    for o in overlays {
        for z in overlay_samples(o, view) {
            if let Some((col, row)) = view.pixel(z) {
                img.put_pixel(col, row, Rgb(view.circle_color));
            }
        }
    }
    Ok(img)
}

/// Renders a cloud with optional overlays to PNG.
pub fn render_cloud_png(cloud: &LimitSetCloud, overlays: &[Overlay], view: &ViewSpec, path: &Path) -> Result<()> {
    let img = render_image(&cloud.points, overlays, view)?;
    write_png(&img, path)
}

pub fn write_png(img: &RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Image {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// SVG document with the points as dots and the overlays as circles, lines
/// and polylines, clipped to the view.
pub fn render_svg(points: &[RiemannPoint], overlays: &[Overlay], view: &ViewSpec) -> Result<String> {
    view.validate()?;
    let (w, h) = (view.width, view.height);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="view"><rect x="0" y="0" width="{w}" height="{h}"/></clipPath></defs>"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="{}"/>"#, hex(view.background));
    let _ = writeln!(s, r#"<g clip-path="url(#view)">"#);
    let dot = f64::from(view.point_size.max(1)) * 0.5;
    let _ = writeln!(s, r#"<g fill="{}">"#, hex(view.point_color));
    for p in points {
        if let Some(z) = p.finite().filter(|z| view.pixel(*z).is_some()) {
            let (x, y) = view.to_screen(z);
            let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{dot}"/>"#);
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<g fill="none" stroke="{}" stroke-width="1">"#,
        hex(view.circle_color)
    );
    let scale = f64::from(w) / (view.bbox[1] - view.bbox[0]);
    for o in overlays {
        match o {
            Overlay::Circle(c) => match c.kind() {
                CircleKind::Circle => {
                    if let Ok((center, r)) = c.center_radius() {
                        let (x, y) = view.to_screen(center);
                        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#, r * scale);
                    }
                }
                CircleKind::Line => {
                    if let (Some(p), Some(q)) = line_in_box(c, view.bbox) {
                        let (x1, y1) = view.to_screen(p);
                        let (x2, y2) = view.to_screen(q);
                        let _ = writeln!(s, r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
                    }
                }
                CircleKind::Point | CircleKind::Imaginary => {}
            },
            Overlay::Polyline(pts) => {
                let coords: Vec<String> = pts
                    .iter()
                    .map(|&z| {
                        let (x, y) = view.to_screen(z);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(s, r#"<polyline points="{}"/>"#, coords.join(" "));
            }
        }
    }
    let _ = writeln!(s, "</g>\n</g>\n</svg>");
    Ok(s)
}

pub fn write_svg(svg: &str, path: &Path) -> Result<()> {
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Exploration settings used for animation frames. Deformation groups are
/// generally not discrete, so the depth and point caps bound the work.
pub fn frame_policy() -> ExplorationPolicy {
    ExplorationPolicy {
        max_word_length: 14,
        prune_radius: 3e-3,
        seed_points: Vec::new(),
        max_points: 60_000,
    }
}

/// Validity summary of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameValidity {
    pub passed: bool,
    pub failures: Vec<String>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub index: usize,
    pub file: String,
    pub theta: f64,
    pub cone_angle: f64,
    /// `ok` or `error`.
    pub status: String,
    pub error: Option<String>,
    pub points: usize,
    pub validity: Option<FrameValidity>,
    pub flags: Vec<DegeneracyFlag>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameManifest {
    pub schema: u32,
    pub view: ViewSpec,
    pub policy: ExplorationPolicy,
    pub frames: Vec<FrameRecord>,
}

impl FrameManifest {
    pub fn failed(&self) -> impl Iterator<Item = &FrameRecord> {
        self.frames.iter().filter(|f| f.status != "ok")
    }
}

/// Worker count from the environment, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Renders one PNG per grid angle into `dir` (`frame_000.png`, ...) and
/// writes `manifest.json`. A failing frame is recorded and skipped.
pub fn render_frames(grid: &[f64], policy: &ExplorationPolicy, view: &ViewSpec, dir: &Path) -> Result<FrameManifest> {
    policy.validate()?;
    view.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build thread pool: {e}")))?;
    let path = sample_path(grid);
    let frames: Vec<FrameRecord> = pool.install(|| {
        path.entries
            .par_iter()
            .enumerate()
            .map(|(index, entry)| {
                let file = format!("frame_{index:03}.png");
                let mut rec = FrameRecord {
                    index,
                    file: file.clone(),
                    theta: entry.theta,
                    cone_angle: 4.0 * entry.theta,
                    status: "ok".into(),
                    error: None,
                    points: 0,
                    validity: None,
                    flags: Vec::new(),
                };
                let Some(s) = &entry.state else {
                    rec.status = "error".into();
                    rec.error = entry.error.clone();
                    return rec;
                };
                rec.flags = s.flags.clone();
                let report = validate(s);
                rec.validity = Some(FrameValidity {
                    passed: report.passed,
                    failures: report.failures().map(|c| c.name.clone()).collect(),
                    max_residual: report.max_residual(),
                });
                let out: PathBuf = dir.join(&file);
                let result = s.group().and_then(|g| {
                    let cloud = limit_set(&g, policy)?;
                    let overlays: Vec<Overlay> = s.circles().into_iter().map(|(_, c)| Overlay::Circle(c)).collect();
                    render_cloud_png(&cloud, &overlays, view, &out)?;
                    Ok(cloud.len())
                });
                match result {
                    Ok(n) => rec.points = n,
                    Err(e) => {
                        rec.status = "error".into();
                        rec.error = Some(e.to_string());
                    }
                }
                rec
            })
            .collect()
    });
    let manifest = FrameManifest {
        schema: SCHEMA_VERSION,
        view: view.clone(),
        policy: policy.clone(),
        frames,
    };
    let json_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    Ok(manifest)
}
