//! The `(0, 0, 2ζ)` conic triangle family.
//!
//! `C_t` is the circle `(x + 1 − t)² + y² = t²`, tangent to `Re z = −1`, and
//! `C_t†` is its mirror image across the imaginary axis. The region of the strip
//! `|Re z| < 1` outside both discs is a quadrilateral with ideal vertices
//! `−1, 1, ∞` and a fourth vertex `i√(2t − 1)` of angle `2ζ`. Its sides are
//! paired by `T(z) = z + 2` and by a rotation `R` of angle `2ζ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circle::{inversive_product, GenCircle};
use crate::error::{Error, Result};
use crate::group::MarkedGroup;
use crate::moebius::{c, re, Complex, Mobius, RiemannPoint};

/// `C_t = [1 : 2(1 − t) : 0 : 1 − 2t]`.
pub fn c_t(t: f64) -> GenCircle {
    GenCircle::new(1.0, 2.0 * (1.0 - t), 0.0, 1.0 - 2.0 * t)
}

/// `C_t†`, the mirror of `C_t` across the imaginary axis.
pub fn c_t_dagger(t: f64) -> GenCircle {
    c_t(t).mirror_imaginary()
}

/// The fourth interior angle of the quadrilateral, `2ζ ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorAngle {
    pub t: f64,
    pub two_zeta: f64,
    /// `cos 2ζ` from the geometry.
    pub cos_geometric: f64,
    /// `1 − 10/t + 5/t²`, the closed form as printed; not a valid cosine in
    /// general and never used for construction.
    pub cos_printed: f64,
}

impl InteriorAngle {
    pub fn zeta(&self) -> f64 {
        self.two_zeta / 2.0
    }

    /// The printed value is not a cosine, or it disagrees with the geometry.
    pub fn printed_is_wrong(&self) -> bool {
        self.cos_printed.abs() > 1.0 || (self.cos_printed - self.cos_geometric).abs() > 1e-6
    }
}

pub fn printed_cosine(t: f64) -> f64 {
    1.0 - 10.0 / t + 5.0 / (t * t)
}

/// `2ζ(t)`, read off at the vertex `v = i√(2t − 1)`: the radius of `C_t` to `v`
/// makes angle `ζ` with the real axis. Agrees with `arccos(−⟨C_t, C_t†⟩)` for
/// `t ≤ 1` and `2π` minus that for `t > 1`, without the loss of precision of
/// `arccos` near `±1`.
pub fn interior_angle(t: f64) -> Result<InteriorAngle> {
    if !(t >= 0.5) {
        return Err(Error::NoIntersection(t));
    }
    let prod = inversive_product(&c_t(t), &c_t_dagger(t))?;
    let v = c(0.0, (2.0 * t - 1.0).sqrt());
    let two_zeta = 2.0 * (v - c_t(t).center().expect("C_t is a circle")).arg();
    Ok(InteriorAngle {
        t,
        two_zeta,
        cos_geometric: -prod,
        cos_printed: printed_cosine(t),
    })
}

/// The `t` with `interior_angle(t) = 2ζ`, by bisection on `s = 1/t ∈ (0, 2]`.
/// Returns `∞` for `ζ = π`.
pub fn t_for_zeta(zeta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&zeta) {
        return Err(Error::InvalidParameter(format!("zeta = {zeta} is outside [0, π]")));
    }
    if zeta == 0.0 {
        return Ok(0.5);
    }
    if zeta == PI {
        return Ok(f64::INFINITY);
    }
    let target = 2.0 * zeta;
    // angle decreases in s
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 || mid == lo || mid == hi {
            break;
        }
        if interior_angle(1.0 / mid)?.two_zeta > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 / (0.5 * (lo + hi)))
}

/// Configuration of the family at parameter `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleConfig {
    pub t: f64,
    pub ct: GenCircle,
    pub ct_dagger: GenCircle,
    pub left: GenCircle,
    pub right: GenCircle,
    /// `C_t ∩ C_t†` (upper point first); empty for `t < 1/2`.
    #[serde(with = "crate::json::complex_vec")]
    pub intersections: Vec<Complex>,
    pub angle: Option<InteriorAngle>,
    pub translation: Mobius,
    pub rotation: Option<Mobius>,
    /// `t = 1`: the two circles coincide.
    pub coincident: bool,
}

/// The rotation about `±iy` by `±2ζ` that carries `C_t` onto `C_t†`.
fn rotation_for(t: f64, y: f64, two_zeta: f64) -> Result<Mobius> {
    if y == 0.0 {
        return Ok(Mobius::raw(re(1.0), re(0.0), re(2.0), re(1.0)));
    }
    let ct = c_t(t);
    let target = c_t_dagger(t);
    let (u, v) = (RiemannPoint::Finite(c(0.0, y)), RiemannPoint::Finite(c(0.0, -y)));
    let mut best: Option<(f64, Mobius)> = None;
    for angle in [two_zeta, -two_zeta] {
        let r = Mobius::elliptic_from_fixed_points(u, v, angle)?;
        let miss = ct.mobius_image(&r).projective_distance(&target);
        if best.map_or(true, |(m, _)| miss < m) {
            best = Some((miss, r));
        }
    }
    Ok(best.expect("two candidates").1)
}

pub fn triangle_config(t: f64) -> Result<TriangleConfig> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t = {t} must be positive and finite")));
    }
    let ct = c_t(t);
    let ct_dagger = c_t_dagger(t);
    let (intersections, angle, rotation) = if t >= 0.5 {
        let angle = interior_angle(t)?;
        let y = (2.0 * t - 1.0).sqrt();
        let pts = if y == 0.0 {
            vec![re(0.0)]
        } else {
            vec![c(0.0, y), c(0.0, -y)]
        };
        (pts, Some(angle), Some(rotation_for(t, y, angle.two_zeta)?))
    } else {
        (Vec::new(), None, None)
    };
    Ok(TriangleConfig {
        t,
        ct,
        ct_dagger,
        left: GenCircle::vertical_line(-1.0),
        right: GenCircle::vertical_line(1.0),
        intersections,
        angle,
        translation: Mobius::translation(re(2.0)),
        rotation,
        coincident: (t - 1.0).abs() < 1e-12,
    })
}

/// A boundary piece of the quadrilateral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Side {
    /// The vertical ray `Re z = x` from height `y0` up to ∞.
    Ray { x: f64, y0: f64 },
    /// Counterclockwise arc of a circle between two angles.
    Arc {
        #[serde(with = "crate::json::complex")]
        center: Complex,
        radius: f64,
        start: f64,
        end: f64,
    },
}

impl Side {
    /// Polyline through the side; rays are cut at height `y_max`.
    pub fn sample(&self, n: usize, y_max: f64) -> Vec<Complex> {
        let n = n.max(2);
        match *self {
            Side::Ray { x, y0 } => vec![c(x, y0), c(x, y_max.max(y0))],
            Side::Arc {
                center,
                radius,
                start,
                end,
            } => (0..n)
                .map(|k| {
                    let a = start + (end - start) * k as f64 / (n - 1) as f64;
                    center + Complex::from_polar(radius, a)
                })
                .collect(),
        }
    }
}

/// Boundary of the quadrilateral at angle parameter `ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quadrilateral {
    pub zeta: f64,
    /// `∞` at `ζ = π`.
    pub t: f64,
    /// Left ray, arc of `C_t`, arc of `C_t†`, right ray.
    pub sides: Vec<Side>,
    /// `ζ = π`: both arcs have become the vertical lines.
    pub bigon: bool,
}

pub fn quadrilateral(zeta: f64) -> Result<Quadrilateral> {
    let t = t_for_zeta(zeta)?;
    let left = Side::Ray { x: -1.0, y0: 0.0 };
    let right = Side::Ray { x: 1.0, y0: 0.0 };
    if t.is_infinite() {
        return Ok(Quadrilateral {
            zeta,
            t,
            sides: vec![left, right],
            bigon: true,
        });
    }
    // the vertex i√(2t−1) sits at angle ζ on C_t (center t − 1, radius t)
    let sides = vec![
        left,
        Side::Arc {
            center: re(t - 1.0),
            radius: t,
            start: zeta,
            end: PI,
        },
        Side::Arc {
            center: re(1.0 - t),
            radius: t,
            start: 0.0,
            end: PI - zeta,
        },
        right,
    ];
    Ok(Quadrilateral {
        zeta,
        t,
        sides,
        bigon: false,
    })
}

/// `⟨T, R⟩` with `T(z) = z + 2` and `R` the rotation of angle `2ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Holonomy {
    pub zeta: f64,
    pub group: MarkedGroup,
    /// `ζ = 0`: `R` is the parabolic limit of the rotations.
    pub parabolic_limit: bool,
}

///
/// The fixed points `±i tan(ζ/2)` are computed from `ζ` directly: near the
/// tangency `t − 1/2 = O(ζ²)` and `√(2t − 1)` would lose all precision.
pub fn holonomy_pair(zeta: f64) -> Result<Holonomy> {
    let t = t_for_zeta(zeta)?;
    let r = if t.is_infinite() {
        Mobius::IDENTITY
    } else {
        rotation_for(1.0 / (1.0 + zeta.cos()), (zeta / 2.0).tan(), 2.0 * zeta)?
    };
    Ok(Holonomy {
        zeta,
        group: MarkedGroup::new([("T", Mobius::translation(re(2.0))), ("R", r)])?,
        parabolic_limit: zeta == 0.0,
    })
}

/// One row of the comparison between the printed angle formula and the geometry.
pub fn angle_discrepancies(ts: &[f64]) -> Result<Vec<InteriorAngle>> {
    ts.iter().map(|&t| interior_angle(t)).collect()
}
