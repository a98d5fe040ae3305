//! Generalized circles in projective coordinates.
//!
//! `[k : a : b : h]` is the locus `k(x² + y²) + ax + by + h = 0`. With
//! `B = (a + ib)/2` this is the Hermitian form `k|z|² + B̄z + Bz̄ + h`, which
//! is what makes Möbius images a congruence `H ↦ (m⁻¹)* H m⁻¹`.
//!
//! Coordinates are oriented: `[k:a:b:h]` and `[-k:-a:-b:-h]` describe the same
//! locus with opposite sides, and the inversive product changes sign between
//! them. Constructors in this crate always produce `k ≥ 0` for circles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{Complex, Mobius};

/// What kind of locus a coordinate vector describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleKind {
    Circle,
    Line,
    /// `Δ = 0`: a single point (the limit points of a hyperbolic pencil).
    Point,
    /// `Δ < 0`: no real points.
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenCircle {
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub h: f64,
}

/// Relative tolerance used when deciding `Δ = 0` and `k = 0`.
const KIND_TOL: f64 = 1e-12;

impl GenCircle {
    pub const fn new(k: f64, a: f64, b: f64, h: f64) -> Self {
        GenCircle { k, a, b, h }
    }

    pub fn from_center_radius(center: Complex, radius: f64) -> Result<Self> {
        if radius.is_nan() || radius <= 0.0 {
            return Err(Error::NonPositiveRadius(radius));
        }
        Ok(GenCircle {
            k: 1.0,
            a: -2.0 * center.re,
            b: -2.0 * center.im,
            h: center.norm_sqr() - radius * radius,
        })
    }

    /// The point circle at `z`.
    pub fn point(z: Complex) -> Self {
        GenCircle {
            k: 1.0,
            a: -2.0 * z.re,
            b: -2.0 * z.im,
            h: z.norm_sqr(),
        }
    }

    /// `Re z = x0`.
    pub fn vertical_line(x0: f64) -> Self {
        GenCircle::new(0.0, 1.0, 0.0, -x0)
    }

    /// `Im z = y0`.
    pub fn horizontal_line(y0: f64) -> Self {
        GenCircle::new(0.0, 0.0, 1.0, -y0)
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.k, self.a, self.b, self.h]
    }

    fn scale(&self) -> f64 {
        self.coords().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `Δ = a² + b² - 4kh`.
    pub fn discriminant(&self) -> f64 {
        self.a * self.a + self.b * self.b - 4.0 * self.k * self.h
    }

    pub fn kind(&self) -> CircleKind {
        let s = self.scale();
        let delta = self.discriminant();
        if delta.abs() <= KIND_TOL * s * s {
            CircleKind::Point
        } else if delta < 0.0 {
            CircleKind::Imaginary
        } else if self.k.abs() <= KIND_TOL * s {
            CircleKind::Line
        } else {
            CircleKind::Circle
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind(), CircleKind::Point | CircleKind::Imaginary)
    }

    pub fn is_line(&self) -> bool {
        self.kind() == CircleKind::Line
    }

    pub fn center_radius(&self) -> Result<(Complex, f64)> {
        match self.kind() {
            CircleKind::Line => Err(Error::LineHasNoCenter),
            CircleKind::Point | CircleKind::Imaginary => Err(Error::DegenerateCircle(self.discriminant())),
            CircleKind::Circle => {
                let center = Complex::new(-self.a / (2.0 * self.k), -self.b / (2.0 * self.k));
                let radius = self.discriminant().sqrt() / (2.0 * self.k.abs());
                Ok((center, radius))
            }
        }
    }

    /// Center of a point circle, or of a genuine circle.
    pub fn center(&self) -> Option<Complex> {
        if self.k.abs() <= KIND_TOL * self.scale() {
            None
        } else {
            Some(Complex::new(-self.a / (2.0 * self.k), -self.b / (2.0 * self.k)))
        }
    }

    /// Same locus and orientation, scaled to unit max-coordinate.
    #[must_use]
    pub fn renormalized(&self) -> Self {
        let s = self.scale();
        if s == 0.0 || !s.is_finite() {
            return *self;
        }
        GenCircle::new(self.k / s, self.a / s, self.b / s, self.h / s)
    }

    /// Distance between unit-normalized coordinate vectors, minimized over the
    /// overall sign.
    pub fn projective_distance(&self, other: &GenCircle) -> f64 {
        let unit = |g: &GenCircle| {
            let n = g.coords().iter().map(|x| x * x).sum::<f64>().sqrt();
            g.coords().map(|x| x / n)
        };
        let (u, v) = (unit(self), unit(other));
        let plus = u.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let minus = u.iter().zip(&v).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
        plus.min(minus)
    }

    pub fn approx_eq(&self, other: &GenCircle, tol: f64) -> bool {
        self.projective_distance(other) <= tol
    }

    /// Value of the defining form at `z`, scaled so that for a circle it is
    /// roughly a signed distance.
    pub fn residual(&self, z: Complex) -> f64 {
        let v = self.k * z.norm_sqr() + self.a * z.re + self.b * z.im + self.h;
        let delta = self.discriminant();
        if delta > 0.0 {
            v / delta.sqrt()
        } else {
            v / self.scale().max(f64::MIN_POSITIVE)
        }
    }

    pub fn contains_point(&self, z: Complex, tol: f64) -> bool {
        self.residual(z).abs() <= tol
    }

    /// Image under a Möbius map, via the Hermitian congruence.
    pub fn mobius_image(&self, m: &Mobius) -> GenCircle {
        let inv = m.normalize().inverse();
        let bb = Complex::new(self.a, self.b) * 0.5;
        // H = [[k, B], [B̄, h]], H' = N* H N with N = m⁻¹ = [[p, q], [r, s]]
        let (p, q, r, s) = (inv.a, inv.b, inv.c, inv.d);
        let k2 = self.k * p.norm_sqr() + 2.0 * (bb * p.conj() * r).re + self.h * r.norm_sqr();
        let h2 = self.k * q.norm_sqr() + 2.0 * (bb * q.conj() * s).re + self.h * s.norm_sqr();
        let b2 = self.k * p.conj() * q + bb * p.conj() * s + bb.conj() * r.conj() * q + self.h * r.conj() * s;
        GenCircle::new(k2, 2.0 * b2.re, 2.0 * b2.im, h2)
    }

    /// Reflection in the real axis.
    pub fn mirror(&self) -> GenCircle {
        GenCircle::new(self.k, self.a, -self.b, self.h)
    }

    /// Reflection in the imaginary axis.
    pub fn mirror_imaginary(&self) -> GenCircle {
        GenCircle::new(self.k, -self.a, self.b, self.h)
    }

    /// Real intersection points with another circle or line (0, 1 or 2).
    pub fn intersections(&self, other: &GenCircle) -> Vec<Complex> {
        let (s, o) = if self.is_line() && !other.is_line() {
            (other, self)
        } else {
            (self, other)
        };
        if s.is_line() {
            // two lines: a finite intersection unless parallel
            let det = s.a * o.b - s.b * o.a;
            if det.abs() <= 1e-15 {
                return Vec::new();
            }
            let x = (s.b * o.h - o.b * s.h) / det;
            let y = (o.a * s.h - s.a * o.h) / det;
            return vec![Complex::new(x, y)];
        }
        // subtract multiples to get the radical line, then intersect it with s
        let radical = if o.is_line() {
            *o
        } else {
            let (sk, ok) = (s.k, o.k);
            GenCircle::new(0.0, s.a * ok - o.a * sk, s.b * ok - o.b * sk, s.h * ok - o.h * sk)
        };
        let (la, lb, lh) = (radical.a, radical.b, radical.h);
        let n2 = la * la + lb * lb;
        if n2 <= 1e-30 {
            return Vec::new();
        }
        let Ok((center, radius)) = s.center_radius() else {
            return Vec::new();
        };
        let dist = (la * center.re + lb * center.im + lh) / n2.sqrt();
        let foot = center - Complex::new(la, lb) * (dist / n2.sqrt());
        let disc = radius * radius - dist * dist;
        let tangent_tol = 1e-12 * radius.max(1.0);
        if disc < -tangent_tol {
            Vec::new()
        } else if disc <= tangent_tol {
            vec![foot]
        } else {
            let dir = Complex::new(-lb, la) / n2.sqrt();
            let off = disc.sqrt();
            vec![foot + dir * off, foot - dir * off]
        }
    }
}

impl fmt::Display for GenCircle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} : {} : {} : {}]", self.k, self.a, self.b, self.h)
    }
}

/// `(a₁a₂ + b₁b₂ - 2k₁h₂ - 2k₂h₁) / (√Δ₁ √Δ₂)`; for two circles with center
/// distance `d` this is `(r₁² + r₂² - d²) / (2r₁r₂)`.
pub fn inversive_product(c1: &GenCircle, c2: &GenCircle) -> Result<f64> {
    for g in [c1, c2] {
        if g.is_degenerate() {
            return Err(Error::DegenerateCircle(g.discriminant()));
        }
    }
    let num = c1.a * c2.a + c1.b * c2.b - 2.0 * c1.k * c2.h - 2.0 * c2.k * c1.h;
    Ok(num / (c1.discriminant().sqrt() * c2.discriminant().sqrt()))
}

/// Unsigned intersection angle `arccos(-⟨c₁, c₂⟩)` in `[0, π]`: zero for
/// externally tangent circles, π/2 for orthogonal, π for coincident.
pub fn exterior_angle(c1: &GenCircle, c2: &GenCircle) -> Result<f64> {
    Ok((-inversive_product(c1, c2)?).clamp(-1.0, 1.0).acos())
}

pub fn are_orthogonal(c1: &GenCircle, c2: &GenCircle, tol: f64) -> Result<bool> {
    Ok(inversive_product(c1, c2)?.abs() <= tol)
}

pub fn are_tangent(c1: &GenCircle, c2: &GenCircle, tol: f64) -> Result<bool> {
    Ok((inversive_product(c1, c2)?.abs() - 1.0).abs() <= tol)
}

/// A point `ν·base1 + (1 - ν)·base2` of the pencil spanned by two circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PencilSpec {
    pub base1: GenCircle,
    pub base2: GenCircle,
    pub nu: f64,
}

impl PencilSpec {
    pub fn new(base1: GenCircle, base2: GenCircle, nu: f64) -> Result<Self> {
        if base1.approx_eq(&base2, 1e-14) {
            return Err(Error::InvalidParameter(
                "pencil bases must be projectively distinct".into(),
            ));
        }
        Ok(PencilSpec { base1, base2, nu })
    }

    /// Coordinatewise affine combination. May be a point or imaginary circle;
    /// check [`GenCircle::kind`].
    pub fn point(&self) -> GenCircle {
        let (p, q, nu) = (self.base1, self.base2, self.nu);
        let mix = |x: f64, y: f64| nu * x + (1.0 - nu) * y;
        GenCircle::new(mix(p.k, q.k), mix(p.a, q.a), mix(p.b, q.b), mix(p.h, q.h)).renormalized()
    }
}

pub fn pencil_point(p: &PencilSpec) -> GenCircle {
    p.point()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{c, re, I};
    use proptest::prelude::*;

    fn circle(center: Complex, r: f64) -> GenCircle {
        GenCircle::from_center_radius(center, r).unwrap()
    }

    #[test]
    fn center_radius_construction() {
        assert_eq!(circle(re(0.0), 1.0), GenCircle::new(1.0, 0.0, 0.0, -1.0));
        for t in [0.5, 1.0, 2.0, 3.7] {
            let ct = circle(re(t - 1.0), t);
            let want = GenCircle::new(1.0, 2.0 * (1.0 - t), 0.0, 1.0 - 2.0 * t);
            assert!(ct.projective_distance(&want) < 1e-15, "{t}");
        }
        assert_eq!(circle(c(0.0, 0.75), 0.25), GenCircle::new(1.0, 0.0, -1.5, 0.5));
        assert!(matches!(
            GenCircle::from_center_radius(I, 0.0),
            Err(Error::NonPositiveRadius(_))
        ));
    }

    #[test]
    fn center_radius_recovery() {
        let point_at_i = GenCircle::new(1.0, 0.0, -2.0, 1.0);
        assert_eq!(point_at_i.kind(), CircleKind::Point);
        assert!(matches!(point_at_i.center_radius(), Err(Error::DegenerateCircle(_))));
        assert_eq!(
            GenCircle::new(1.0, 0.0, 0.0, -1.0).center_radius().unwrap(),
            (re(0.0), 1.0)
        );
        assert_eq!(
            GenCircle::new(2.0, 0.0, 0.0, -2.0).center_radius().unwrap(),
            (re(0.0), 1.0)
        );
        assert!(matches!(
            GenCircle::vertical_line(1.0).center_radius(),
            Err(Error::LineHasNoCenter)
        ));
    }

    #[test]
    fn mobius_image_examples() {
        let shift = Mobius::translation(re(2.0));
        let unit = circle(re(0.0), 1.0);
        let (cen, r) = unit.mobius_image(&shift).center_radius().unwrap();
        assert!((cen - re(2.0)).norm() < 1e-14 && (r - 1.0).abs() < 1e-14);

        let j = Mobius::new(re(3.0), c(0.0, -2.0), c(0.0, 4.0), re(3.0)).unwrap();
        let img = circle(c(0.0, 0.75), 0.25).mobius_image(&j);
        assert!(img.approx_eq(&circle(c(0.0, -0.75), 0.25), 1e-14));

        let line = GenCircle::vertical_line(-1.0).mobius_image(&shift);
        assert!(line.is_line());
        assert!(line.approx_eq(&GenCircle::vertical_line(1.0), 1e-15));

        // a line through the pole becomes a line, a circle through the pole a line
        let inv = Mobius::new(re(0.0), re(1.0), re(-1.0), re(0.0)).unwrap(); // z ↦ -1/z
        let through_zero = circle(re(1.0), 1.0).mobius_image(&inv);
        assert!(through_zero.is_line());
        assert!(through_zero.contains_point(re(-0.5), 1e-12));
    }

    #[test]
    fn inversive_product_examples() {
        let unit = circle(re(0.0), 1.0);
        let axis = GenCircle::vertical_line(0.0);
        assert!(inversive_product(&unit, &axis).unwrap().abs() < 1e-15);

        let iy1 = circle(c(0.5, 1.0), 0.5);
        let ijp = circle(c(1.0, 0.75), 0.25);
        assert!(inversive_product(&iy1, &ijp).unwrap().abs() < 1e-14);

        let a = circle(re(-1.0), 1.0);
        let b = circle(re(1.5), 1.5);
        assert!((inversive_product(&a, &b).unwrap() + 1.0).abs() < 1e-14);
        assert!((inversive_product(&a, &a).unwrap() - 1.0).abs() < 1e-14);

        let pt = GenCircle::point(I);
        assert!(matches!(inversive_product(&pt, &a), Err(Error::DegenerateCircle(_))));

        // the closed form for two circles
        let (c1, r1, c2, r2) = (c(0.3, -0.2), 0.7, c(1.1, 0.4), 1.3);
        let d2 = (c1 - c2).norm_sqr();
        let want = (r1 * r1 + r2 * r2 - d2) / (2.0 * r1 * r2);
        let got = inversive_product(&circle(c1, r1), &circle(c2, r2)).unwrap();
        assert!((got - want).abs() < 1e-14);
        assert!(are_orthogonal(&unit, &axis, 1e-12).unwrap());
        assert!(are_tangent(&a, &b, 1e-12).unwrap());
        assert!((exterior_angle(&a, &b).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn pencil_examples() {
        let p1 = GenCircle::new(1.0, 0.0, -2.0, 1.0);
        let p2 = GenCircle::new(1.0, 0.0, -6.0, 9.0);
        let at1 = PencilSpec::new(p1, p2, 1.0).unwrap().point();
        assert!(at1.approx_eq(&p1, 1e-15));
        assert_eq!(at1.kind(), CircleKind::Point);
        let at0 = PencilSpec::new(p1, p2, 0.0).unwrap().point();
        assert!(at0.approx_eq(&p2, 1e-15));
        let mid = pencil_point(&PencilSpec::new(p1, p2, 0.5).unwrap());
        assert!(mid.approx_eq(&GenCircle::new(1.0, 0.0, -4.0, 5.0), 1e-15));
        assert_eq!(mid.kind(), CircleKind::Imaginary);
        assert!(PencilSpec::new(p1, p1, 0.3).is_err());
    }

    #[test]
    fn mirror_examples() {
        let up = circle(c(0.0, 0.75), 0.25);
        assert!(up.mirror().approx_eq(&circle(c(0.0, -0.75), 0.25), 1e-15));
        let real = circle(re(2.0), 3.0);
        assert_eq!(real.mirror(), real);
        let line = GenCircle::horizontal_line(1.0);
        assert!(line.mirror().approx_eq(&GenCircle::horizontal_line(-1.0), 1e-15));
    }

    #[test]
    fn intersections_of_circles_and_lines() {
        let a = circle(re(-0.5), 1.0);
        let b = circle(re(0.5), 1.0);
        let pts = a.intersections(&b);
        assert_eq!(pts.len(), 2);
        for p in pts {
            assert!(a.contains_point(p, 1e-12) && b.contains_point(p, 1e-12));
            assert!(p.re.abs() < 1e-12);
        }
        let tangent = GenCircle::vertical_line(-1.0).intersections(&circle(re(0.0), 1.0));
        assert_eq!(tangent.len(), 1);
        assert!((tangent[0] - re(-1.0)).norm() < 1e-9);
        assert!(circle(re(0.0), 1.0).intersections(&circle(re(5.0), 1.0)).is_empty());
    }

    fn arb_circle() -> impl Strategy<Value = GenCircle> {
        prop_oneof![
            4 => (-2.0f64..2.0, -2.0f64..2.0, 0.1f64..2.0)
                .prop_map(|(x, y, r)| circle(c(x, y), r)),
            1 => (0.0f64..std::f64::consts::TAU, -2.0f64..2.0)
                .prop_map(|(t, h)| GenCircle::new(0.0, t.cos(), t.sin(), h)),
        ]
    }

    fn arb_map() -> impl Strategy<Value = Mobius> {
        proptest::array::uniform8(-2.0f64..2.0)
            .prop_filter("non-singular", |v| {
                let (a, b, cc, d) = (c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]));
                (a * d - b * cc).norm() > 0.2
            })
            .prop_map(|v| Mobius::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7])).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn image_preserves_inversive_product(m in arb_map(), c1 in arb_circle(), c2 in arb_circle()) {
            let before = inversive_product(&c1, &c2).unwrap();
            let after = inversive_product(&c1.mobius_image(&m), &c2.mobius_image(&m)).unwrap();
            prop_assert!((before - after).abs() <= 1e-9 * before.abs().max(1.0), "{} vs {}", before, after);
        }

        #[test]
        fn image_carries_points(m in arb_map(), g in arb_circle(), t in 0.0f64..std::f64::consts::TAU) {
            let pts = g.intersections(&GenCircle::new(0.0, t.cos(), t.sin(), 0.0));
            let img = g.mobius_image(&m);
            for p in pts {
                if let Some(q) = m.apply_finite(p) {
                    if q.norm() < 1e6 {
                        prop_assert!(img.residual(q).abs() <= 1e-7 * (1.0 + q.norm_sqr()));
                    }
                }
            }
        }

        #[test]
        fn center_radius_round_trip(x in -5.0f64..5.0, y in -5.0f64..5.0, r in 0.01f64..5.0, s in 0.1f64..10.0) {
            let g = circle(c(x, y), r);
            let scaled = GenCircle::new(g.k * s, g.a * s, g.b * s, g.h * s);
            let (cen, rad) = scaled.center_radius().unwrap();
            prop_assert!(circle(cen, rad).approx_eq(&g, 1e-10));
        }

        #[test]
        fn pencil_members_share_base_points(x1 in -1.0f64..1.0, x2 in 1.5f64..3.0, r in 1.2f64..2.0, nu in -3.0f64..3.0) {
            let b1 = circle(re(x1), r);
            let b2 = circle(re(x2), r);
            let common = b1.intersections(&b2);
            prop_assume!(common.len() == 2);
            let member = PencilSpec::new(b1, b2, nu).unwrap().point();
            prop_assume!(!member.is_degenerate());
            for p in common {
                prop_assert!(member.residual(p).abs() <= 1e-9);
            }
        }

        #[test]
        fn orthogonality_and_tangency_are_invariant(m in arb_map(), x in 0.2f64..3.0, r in 0.2f64..2.0) {
            // orthogonal pair: d² = r₁² + r₂²
            let a = circle(re(0.0), 1.0);
            let d = (1.0 + r * r).sqrt();
            let b = circle(Complex::from_polar(d, x), r);
            let t = circle(re(1.0 + r), r);
            prop_assert!(are_orthogonal(&a.mobius_image(&m), &b.mobius_image(&m), 1e-9).unwrap());
            prop_assert!(are_tangent(&a.mobius_image(&m), &t.mobius_image(&m), 1e-9).unwrap());
        }
    }
}
