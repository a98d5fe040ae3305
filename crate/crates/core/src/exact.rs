//! Exact 2×2 matrix arithmetic over Gaussian integers and Gaussian rationals.
//!
//! The Koebe group and the parameter tables have small Gaussian-rational
//! entries, so identities among them can be checked with no rounding at all.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::moebius::Mobius;

pub type GaussInt = Complex<i64>;
pub type GaussRational = Complex<BigRational>;

/// `n + 0i` in any ring with unit.
pub fn lit<T: Num + Clone>(n: i64) -> T {
    let mut acc = T::zero();
    let one = T::one();
    for _ in 0..n.unsigned_abs() {
        acc = acc + one.clone();
    }
    if n < 0 {
        T::zero() - acc
    } else {
        acc
    }
}

pub fn gauss(re: i64, im: i64) -> GaussInt {
    Complex::new(re, im)
}

pub fn gq(re: i64, im: i64, den: i64) -> GaussRational {
    Complex::new(
        BigRational::new(BigInt::from(re), BigInt::from(den)),
        BigRational::new(BigInt::from(im), BigInt::from(den)),
    )
}

pub fn gauss_to_rational(z: &GaussInt) -> GaussRational {
    gq(z.re, z.im, 1)
}

pub fn rational_to_f64(z: &GaussRational) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
}

/// Snaps a float to the nearest Gaussian integer when it is within `tol`.
pub fn snap_gauss(z: num_complex::Complex64, tol: f64) -> Option<GaussInt> {
    let (re, im) = (z.re.round(), z.im.round());
    if (z.re - re).abs() <= tol && (z.im - im).abs() <= tol {
        Some(Complex::new(re as i64, im as i64))
    } else {
        None
    }
}

/// A 2×2 matrix `(a, b | c, d)` over a commutative ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Clone + Num> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Mat2::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn trace(&self) -> T {
        self.a.clone() + self.d.clone()
    }

    pub fn mul(&self, o: &Mat2<T>) -> Mat2<T> {
        Mat2::new(
            self.a.clone() * o.a.clone() + self.b.clone() * o.c.clone(),
            self.a.clone() * o.b.clone() + self.b.clone() * o.d.clone(),
            self.c.clone() * o.a.clone() + self.d.clone() * o.c.clone(),
            self.c.clone() * o.b.clone() + self.d.clone() * o.d.clone(),
        )
    }

    /// The adjugate, which is the inverse when `det = 1`.
    pub fn adjugate(&self) -> Mat2<T> {
        Mat2::new(
            self.d.clone(),
            T::zero() - self.b.clone(),
            T::zero() - self.c.clone(),
            self.a.clone(),
        )
    }

    pub fn neg(&self) -> Mat2<T> {
        let z = T::zero;
        Mat2::new(
            z() - self.a.clone(),
            z() - self.b.clone(),
            z() - self.c.clone(),
            z() - self.d.clone(),
        )
    }

    /// `g · self · g⁻¹` for unimodular `g`.
    pub fn conjugated_by(&self, g: &Mat2<T>) -> Mat2<T> {
        g.mul(self).mul(&g.adjugate())
    }

    pub fn map_entries<U>(&self, f: impl Fn(&T) -> U) -> Mat2<U> {
        Mat2 {
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
            d: f(&self.d),
        }
    }

    /// Equal, or equal after negation.
    pub fn eq_projective(&self, other: &Mat2<T>) -> bool
    where
        T: PartialEq,
    {
        self == other || *self == other.neg()
    }

    /// Commutator `x y x⁻¹ y⁻¹` of unimodular matrices.
    pub fn commutator(x: &Mat2<T>, y: &Mat2<T>) -> Mat2<T> {
        x.mul(y).mul(&x.adjugate()).mul(&y.adjugate())
    }
}

impl<T: Clone + Num> Mat2<Complex<T>> {
    /// Entrywise complex conjugate.
    pub fn conj_entries(&self) -> Self {
        self.map_entries(|z| Complex::new(z.re.clone(), T::zero() - z.im.clone()))
    }
}

impl Mat2<GaussInt> {
    pub fn to_mobius(&self) -> Mobius {
        let f = |z: &GaussInt| num_complex::Complex64::new(z.re as f64, z.im as f64);
        Mobius::raw(f(&self.a), f(&self.b), f(&self.c), f(&self.d)).normalize()
    }

    pub fn to_rational(&self) -> Mat2<GaussRational> {
        self.map_entries(gauss_to_rational)
    }

    /// Snaps a float map to Gaussian-integer entries, if every entry is within
    /// `tol` of one and the snapped determinant is exactly 1.
    pub fn snap(m: &Mobius, tol: f64) -> Option<Self> {
        let snapped = Mat2::new(
            snap_gauss(m.a, tol)?,
            snap_gauss(m.b, tol)?,
            snap_gauss(m.c, tol)?,
            snap_gauss(m.d, tol)?,
        );
        snapped.det().is_one().then_some(snapped)
    }
}

impl Mat2<GaussRational> {
    pub fn to_mobius(&self) -> Mobius {
        Mobius::raw(
            rational_to_f64(&self.a),
            rational_to_f64(&self.b),
            rational_to_f64(&self.c),
            rational_to_f64(&self.d),
        )
        .normalize()
    }
}

/// Gaussian-rational literal formatting, e.g. `(31+12i)/17`.
pub fn fmt_gauss_rational(z: &GaussRational) -> String {
    let den = z.re.denom().clone() * z.im.denom().clone() / num_integer_gcd(z.re.denom(), z.im.denom());
    let re = (z.re.clone() * BigRational::from_integer(den.clone())).to_integer();
    let im = (z.im.clone() * BigRational::from_integer(den.clone())).to_integer();
    let body = if im.is_zero() {
        format!("{re}")
    } else if re.is_zero() {
        format!("{im}i")
    } else if im.is_negative() {
        format!("{re}{im}i")
    } else {
        format!("{re}+{im}i")
    };
    if den.is_one() {
        body
    } else if im.is_zero() || re.is_zero() {
        format!("{body}/{den}")
    } else {
        format!("({body})/{den}")
    }
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut x, mut y) = (a.abs(), b.abs());
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    x
}

impl fmt::Display for Mat2<GaussInt> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = |z: &GaussInt| fmt_gauss_rational(&gauss_to_rational(z));
        write!(f, "({}, {} | {}, {})", g(&self.a), g(&self.b), g(&self.c), g(&self.d))
    }
}

impl fmt::Display for Mat2<GaussRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = fmt_gauss_rational;
        write!(f, "({}, {} | {}, {})", g(&self.a), g(&self.b), g(&self.c), g(&self.d))
    }
}
