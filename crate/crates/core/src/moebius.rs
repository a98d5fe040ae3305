//! Möbius transformations as unimodular 2×2 complex matrices.
//!
//! Maps are kept det-normalized (`ad - bc = 1`) and compared projectively,
//! i.e. up to the global sign that distinguishes the two SL(2,ℂ) lifts of a
//! PSL(2,ℂ) element.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circle::GenCircle;
use crate::error::{Error, Result};

/// Default tolerance for classification and fixed-point degeneracy tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Bound on `|det - 1|` for every map handed out by this module.
pub const DET_TOL: f64 = 1e-10;

pub type Complex = Complex64;

pub const I: Complex = Complex::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// A point of the Riemann sphere ℂ ∪ {∞}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiemannPoint {
    Finite(Complex),
    Infinity,
}

impl RiemannPoint {
    pub fn is_infinite(&self) -> bool {
        matches!(self, RiemannPoint::Infinity)
    }

    pub fn finite(&self) -> Option<Complex> {
        match *self {
            RiemannPoint::Finite(z) => Some(z),
            RiemannPoint::Infinity => None,
        }
    }

    /// Chordal distance on the unit sphere, `d(0, ∞) = 2`. Treats ∞ as an
    /// ordinary point.
    pub fn chordal_distance(&self, other: &RiemannPoint) -> f64 {
        match (self, other) {
            (RiemannPoint::Infinity, RiemannPoint::Infinity) => 0.0,
            (RiemannPoint::Finite(z), RiemannPoint::Infinity) | (RiemannPoint::Infinity, RiemannPoint::Finite(z)) => {
                2.0 / (1.0 + z.norm_sqr()).sqrt()
            }
            (RiemannPoint::Finite(z), RiemannPoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
        }
    }

    /// Unit-sphere coordinates under inverse stereographic projection.
    pub fn to_sphere(&self) -> [f64; 3] {
        match *self {
            RiemannPoint::Infinity => [0.0, 0.0, 1.0],
            RiemannPoint::Finite(z) => {
                let n = z.norm_sqr();
                let s = 1.0 + n;
                [2.0 * z.re / s, 2.0 * z.im / s, (n - 1.0) / s]
            }
        }
    }

    pub fn conj(&self) -> RiemannPoint {
        match *self {
            RiemannPoint::Finite(z) => RiemannPoint::Finite(z.conj()),
            RiemannPoint::Infinity => RiemannPoint::Infinity,
        }
    }
}

impl From<Complex> for RiemannPoint {
    fn from(z: Complex) -> Self {
        RiemannPoint::Finite(z)
    }
}

impl fmt::Display for RiemannPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiemannPoint::Finite(z) => write!(f, "{z}"),
            RiemannPoint::Infinity => f.write_str("∞"),
        }
    }
}

impl Serialize for RiemannPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RiemannPoint::Finite(z) => [z.re, z.im].serialize(s),
            RiemannPoint::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for RiemannPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Pair([f64; 2]),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Pair([re, im]) => Ok(RiemannPoint::Finite(Complex::new(re, im))),
            Repr::Tag(t) if t == "inf" => Ok(RiemannPoint::Infinity),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!(
                "expected [re, im] or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Conjugacy class of a Möbius map, decided from `tr²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapClass {
    Identity,
    Parabolic,
    Elliptic,
    Loxodromic,
}

/// A classification together with the tolerance that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: MapClass,
    pub tol: f64,
}

/// The one or two fixed points of a non-identity map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixedPoints {
    Single(RiemannPoint),
    Pair(RiemannPoint, RiemannPoint),
}

impl FixedPoints {
    pub fn to_vec(&self) -> Vec<RiemannPoint> {
        match *self {
            FixedPoints::Single(p) => vec![p],
            FixedPoints::Pair(p, q) => vec![p, q],
        }
    }
}

/// `z ↦ (az + b) / (cz + d)` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    #[serde(with = "crate::json::complex")]
    pub a: Complex,
    #[serde(with = "crate::json::complex")]
    pub b: Complex,
    #[serde(with = "crate::json::complex")]
    pub c: Complex,
    #[serde(with = "crate::json::complex")]
    pub d: Complex,
}

impl Mobius {
    pub const IDENTITY: Mobius = Mobius {
        a: Complex::new(1.0, 0.0),
        b: Complex::new(0.0, 0.0),
        c: Complex::new(0.0, 0.0),
        d: Complex::new(1.0, 0.0),
    };

    /// Builds a map from arbitrary entries, scaling them to unit determinant.
    pub fn new(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let det = m.det();
        if det.norm() < 1e-300 || !det.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "singular matrix ({a}, {b} | {c}, {d})"
            )));
        }
        Ok(m.normalize())
    }

    /// Wraps entries whose determinant is known to be 1 in exact arithmetic;
    /// rounding drift is still removed.
    pub fn unimodular(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Mobius { a, b, c, d }.normalize()
    }

    /// Wraps entries verbatim, without touching the determinant.
    pub const fn raw(a: Complex, b: Complex, c: Complex, d: Complex) -> Self {
        Mobius { a, b, c, d }
    }

    pub fn translation(t: Complex) -> Self {
        Mobius::raw(re(1.0), t, re(0.0), re(1.0))
    }

    pub fn det(&self) -> Complex {
        self.a * self.d - self.b * self.c
    }

    /// Scales by `1/√det`. Idempotent on unimodular input.
    #[must_use]
    pub fn normalize(self) -> Self {
        let det = self.det();
        if (det - 1.0).norm() == 0.0 {
            return self;
        }
        let k = det.sqrt().inv();
        Mobius {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
            d: self.d * k,
        }
    }

    pub fn trace(&self) -> Complex {
        self.a + self.d
    }

    pub fn trace_squared(&self) -> Complex {
        let t = self.trace();
        t * t
    }

    /// Product `self · other`, i.e. `z ↦ self(other(z))`.
    pub fn compose(&self, other: &Mobius) -> Mobius {
        self.mul_raw(other).normalize()
    }

    /// Product without renormalization, for hot loops.
    #[inline]
    pub fn mul_raw(&self, o: &Mobius) -> Mobius {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Adjugate; the inverse for unimodular maps.
    pub fn inverse(&self) -> Mobius {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn neg(&self) -> Mobius {
        Mobius {
            a: -self.a,
            b: -self.b,
            c: -self.c,
            d: -self.d,
        }
    }

    /// `g · self · g⁻¹`.
    pub fn conjugated_by(&self, g: &Mobius) -> Mobius {
        g.compose(self).compose(&g.inverse())
    }

    /// Entrywise complex conjugate, i.e. `z ↦ conj(m(conj z))`.
    pub fn conj_entries(&self) -> Mobius {
        Mobius {
            a: self.a.conj(),
            b: self.b.conj(),
            c: self.c.conj(),
            d: self.d.conj(),
        }
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.is_finite())
    }

    /// Max-entry distance between the two matrices.
    pub fn entry_distance(&self, other: &Mobius) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry distance minimized over the sign ambiguity `m ≡ -m`.
    pub fn projective_distance(&self, other: &Mobius) -> f64 {
        let a = self.normalize();
        let b = other.normalize();
        a.entry_distance(&b).min(a.entry_distance(&b.neg()))
    }

    pub fn approx_eq(&self, other: &Mobius, tol: f64) -> bool {
        self.projective_distance(other) <= tol
    }

    /// Distance to `±I`.
    pub fn identity_defect(&self) -> f64 {
        self.projective_distance(&Mobius::IDENTITY)
    }

    pub fn apply(&self, p: RiemannPoint) -> RiemannPoint {
        match p {
            RiemannPoint::Infinity => {
                if self.c.norm() <= f64::EPSILON * self.a.norm() || self.c == re(0.0) {
                    RiemannPoint::Infinity
                } else {
                    RiemannPoint::Finite(self.a / self.c)
                }
            }
            RiemannPoint::Finite(z) => {
                let num = self.a * z + self.b;
                let den = self.c * z + self.d;
                if den.norm() <= 1e-15 * num.norm() || den == re(0.0) {
                    RiemannPoint::Infinity
                } else {
                    RiemannPoint::Finite(num / den)
                }
            }
        }
    }

    /// Applies the map to a finite point, returning `None` at the pole.
    pub fn apply_finite(&self, z: Complex) -> Option<Complex> {
        self.apply(RiemannPoint::Finite(z)).finite()
    }

    pub fn classify(&self, tol: f64) -> Classification {
        let m = self.normalize();
        let class = if m.identity_defect() <= tol {
            MapClass::Identity
        } else {
            let t2 = m.trace_squared();
            if (t2 - 4.0).norm() <= tol {
                MapClass::Parabolic
            } else if t2.im.abs() <= tol && t2.re >= -tol && t2.re < 4.0 {
                MapClass::Elliptic
            } else {
                MapClass::Loxodromic
            }
        };
        Classification { class, tol }
    }

    pub fn class(&self) -> MapClass {
        self.classify(DEFAULT_TOL).class
    }

    /// The larger-modulus multiplier `k` with `tr² = k + 1/k + 2`.
    pub fn multiplier(&self) -> Complex {
        let t = self.normalize().trace();
        let s = (t * t - 4.0).sqrt();
        let k1 = (t + s) / 2.0;
        let k2 = (t - s) / 2.0;
        let k = if k1.norm() >= k2.norm() { k1 } else { k2 };
        k * k
    }

    pub fn fixed_points(&self) -> Result<FixedPoints> {
        self.fixed_points_tol(DEFAULT_TOL)
    }

    /// Roots of `cz² + (d - a)z - b = 0`; a single root when `|tr² - 4| ≤ tol`.
    pub fn fixed_points_tol(&self, tol: f64) -> Result<FixedPoints> {
        let m = self.normalize();
        if m.identity_defect() <= tol {
            return Err(Error::EveryPointFixed);
        }
        let parabolic = (m.trace_squared() - 4.0).norm() <= tol;
        let scale = m.a.norm().max(m.d.norm()).max(1.0);
        if m.c.norm() <= f64::EPSILON * scale {
            let diff = m.d - m.a;
            return Ok(if parabolic || diff.norm() <= tol {
                FixedPoints::Single(RiemannPoint::Infinity)
            } else {
                FixedPoints::Pair(RiemannPoint::Infinity, RiemannPoint::Finite(m.b / diff))
            });
        }
        let amd = m.a - m.d;
        if parabolic {
            return Ok(FixedPoints::Single(RiemannPoint::Finite(amd / (m.c * 2.0))));
        }
        let s = (m.trace_squared() - 4.0).sqrt();
        // pick the non-cancelling sign; the second root comes from z₁z₂ = -b/c
        let q = if (amd + s).norm() >= (amd - s).norm() {
            amd + s
        } else {
            amd - s
        };
        let z1 = q / (m.c * 2.0);
        let z2 = if q.norm() > 0.0 {
            -(m.b * 2.0) / q
        } else {
            (amd - s) / (m.c * 2.0)
        };
        Ok(FixedPoints::Pair(RiemannPoint::Finite(z1), RiemannPoint::Finite(z2)))
    }

    /// `(I(m), I(m⁻¹))`: circles of radius `1/|c|` centered at `-d/c` and `a/c`.
    pub fn isometric_circles(&self) -> Result<(GenCircle, GenCircle)> {
        let m = self.normalize();
        if m.c.norm() <= f64::EPSILON * m.a.norm().max(m.d.norm()).max(1.0) {
            return Err(Error::NoIsometricCircle);
        }
        let r = m.c.norm().recip();
        Ok((
            GenCircle::from_center_radius(-m.d / m.c, r)?,
            GenCircle::from_center_radius(m.a / m.c, r)?,
        ))
    }

    /// The loxodromic map whose isometric circle `I(m)` is centered at `w̄` and
    /// `I(m⁻¹)` at `w`, both of radius `r`; it carries the exterior of the
    /// circle about `w̄` onto the interior of the circle about `w`.
    pub fn from_isometric_pair(w: Complex, r: f64) -> Result<Mobius> {
        if r.is_nan() || r <= 0.0 {
            return Err(Error::NonPositiveRadius(r));
        }
        let wbar = w.conj();
        Ok(Mobius::unimodular(
            I * w / r,
            I * (r - (w * wbar).re / r),
            I / r,
            -I * wbar / r,
        ))
    }

    /// Elliptic map fixing `u` and `v` whose derivative at `u` is `e^{i·angle}`.
    pub fn elliptic_from_fixed_points(u: RiemannPoint, v: RiemannPoint, angle: f64) -> Result<Mobius> {
        if u.chordal_distance(&v) <= 1e-14 {
            return Err(Error::CoincidentFixedPoints);
        }
        // S sends 0 ↦ u and ∞ ↦ v
        let s = match (u, v) {
            (RiemannPoint::Finite(u), RiemannPoint::Finite(v)) => Mobius::new(v, u, re(1.0), re(1.0))?,
            (RiemannPoint::Finite(u), RiemannPoint::Infinity) => Mobius::translation(u),
            (RiemannPoint::Infinity, RiemannPoint::Finite(v)) => Mobius::new(v, re(1.0), re(1.0), re(0.0))?,
            (RiemannPoint::Infinity, RiemannPoint::Infinity) => unreachable!(),
        };
        let half = Complex::from_polar(1.0, angle / 2.0);
        let rot = Mobius::raw(half, re(0.0), re(0.0), half.inv());
        Ok(rot.conjugated_by(&s))
    }

    /// The map sending `z1 ↦ 0`, `z2 ↦ 1`, `z3 ↦ ∞`.
    pub fn to_zero_one_infinity(z1: RiemannPoint, z2: RiemannPoint, z3: RiemannPoint) -> Result<Mobius> {
        use RiemannPoint::{Finite, Infinity};
        let one = re(1.0);
        let zero = re(0.0);
        let m = match (z1, z2, z3) {
            (Infinity, Finite(z2), Finite(z3)) => (zero, -(z2 - z3), -one, z3),
            (Finite(z1), Infinity, Finite(z3)) => (one, -z1, one, -z3),
            (Finite(z1), Finite(z2), Infinity) => (-one, z1, zero, -(z2 - z1)),
            (Finite(z1), Finite(z2), Finite(z3)) => (z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1)),
            _ => return Err(Error::NoSolution("three distinct points required".into())),
        };
        Mobius::new(m.0, m.1, m.2, m.3).map_err(|_| Error::NoSolution("three distinct points required".into()))
    }

    /// The unique map sending each `src[k]` to `dst[k]`.
    pub fn from_three_points(src: [RiemannPoint; 3], dst: [RiemannPoint; 3]) -> Result<Mobius> {
        let s = Mobius::to_zero_one_infinity(src[0], src[1], src[2])?;
        let t = Mobius::to_zero_one_infinity(dst[0], dst[1], dst[2])?;
        Ok(t.inverse().compose(&s))
    }

    /// Rotation angle in `[0, π]` of an elliptic map, from `tr = 2cos(angle/2)`
    /// with the sign ambiguity folded.
    pub fn rotation_angle(&self) -> f64 {
        let t = self.normalize().trace().re.abs() / 2.0;
        2.0 * t.clamp(-1.0, 1.0).acos()
    }
}

impl Mul for Mobius {
    type Output = Mobius;

    fn mul(self, rhs: Mobius) -> Mobius {
        self.compose(&rhs)
    }
}

impl Mul for &Mobius {
    type Output = Mobius;

    fn mul(self, rhs: &Mobius) -> Mobius {
        self.compose(rhs)
    }
}

impl fmt::Display for Mobius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {} | {}, {})", self.a, self.b, self.c, self.d)
    }
}

/// `M(λ) = (λ, λ² - 1 | 1, λ)`, the loxodromic with isometric circles of
/// radius 1 centered at `±λ`.
pub fn symmetric_loxodromic(lambda: Complex) -> Mobius {
    Mobius::raw(lambda, lambda * lambda - 1.0, re(1.0), lambda)
}
