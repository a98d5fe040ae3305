//! The θ-family of circle configurations joining the maximally cusped Koebe
//! group (θ → 0) to the compression-body group (θ = π/2) and beyond (θ → π).
//!
//! `X = (1, 2 | 0, 1)` pairs the lines `Re z = ±1`. `Y₁(θ)` pairs two circles
//! tangent to those lines meeting at angle `4θ`, `Y₂` is its complex
//! conjugate, `J` pairs two circles of radius 1/4 orthogonal to the `Y₁`
//! circles, and `J'` pairs two circles centered on `Re z = -1`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{exterior_angle, inversive_product, GenCircle};
use crate::error::{Error, Result};
use crate::group::MarkedGroup;
use crate::json::SCHEMA_VERSION;
use crate::moebius::{c, re, symmetric_loxodromic, Complex, FixedPoints, Mobius, RiemannPoint, I};
use crate::varieties::GeneratorTuple;

/// Distance from π/2 within which the closed-form endpoint state is used.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// `|ϱ|` below which the `J'` circle is treated as degenerate.
pub const RHO_TOL: f64 = 1e-12;
/// `|tan θ|` above which `J'` is treated as divergent.
pub const TAN_CAP: f64 = 1e12;

pub const DET_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const FIXED_POINT_TOL: f64 = 1e-9;
pub const ANGLE_TOL: f64 = 1e-9;
pub const RADIUS_TOL: f64 = 1e-10;
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
pub const TANGENCY_TOL: f64 = 1e-9;

/// The lines paired by `X`.
pub const LINE_CONVENTION: &str = "Y1 circles are tangent to the lines Re z = -1 and Re z = +1 paired by X";

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::InvalidParameter(format!("θ = {theta} outside (0, π]")));
    }
    Ok(())
}

fn at_half_pi(theta: f64) -> bool {
    (theta - FRAC_PI_2).abs() <= ENDPOINT_TOL
}

/// The translation `X = (1, 2 | 0, 1)`.
pub fn x_map() -> Mobius {
    Mobius::raw(re(1.0), re(2.0), re(0.0), re(1.0))
}

/// `L₋`, `L₊`: the lines `Re z = -1`, `Re z = +1`.
pub fn lines() -> [GenCircle; 2] {
    [GenCircle::vertical_line(-1.0), GenCircle::vertical_line(1.0)]
}

/// The `Y₁` side pairing and its isometric circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Y1Data {
    pub map: Mobius,
    pub left: GenCircle,
    pub right: GenCircle,
    pub fixed_points: [RiemannPoint; 2],
}

/// `Y₁(θ)` with `c = 2cos²θ = 1 + cos 2θ`; the identity at θ = π/2.
pub fn y1_data(theta: f64) -> Result<Y1Data> {
    check_theta(theta)?;
    let (s2, c2) = (2.0 * theta).sin_cos();
    let k = 1.0 + c2 + s2;
    let map = if at_half_pi(theta) {
        Mobius::IDENTITY
    } else {
        Mobius::unimodular(c(-c2, k), re(1.0 + c2 + 2.0 * s2), re(1.0 + c2), c(-c2, -k))
    };
    // left circle scaled by 2cos²θ so that θ = π/2 gives the line Re z = 0
    let left = if at_half_pi(theta) {
        GenCircle::vertical_line(0.0).mirror_imaginary()
    } else {
        GenCircle::new(1.0 + c2, 2.0 * c2, -2.0 * k, 1.0 + c2 + 2.0 * s2)
    };
    let top = if at_half_pi(theta) {
        RiemannPoint::Infinity
    } else {
        RiemannPoint::Finite(c(0.0, 1.0 + 2.0 * theta.tan()))
    };
    Ok(Y1Data {
        map,
        left,
        right: left.mirror_imaginary(),
        fixed_points: [RiemannPoint::Finite(I), top],
    })
}

/// `u = (1 - ν) tan θ` solving `u(u - tan θ) = 1/64`, on the root continuous
/// from `u(0⁺) = -1/8`.
pub fn j_parameter(theta: f64) -> f64 {
    let cot = theta.cos() / theta.sin();
    -cot / (32.0 * (1.0 + (1.0 + cot * cot / 16.0).sqrt()))
}

/// The `J` pairing: parameter `u`, upper circle and map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JData {
    pub u: f64,
    pub upper: GenCircle,
    pub map: Mobius,
}

pub fn solve_j(theta: f64) -> Result<JData> {
    check_theta(theta)?;
    let u = j_parameter(theta);
    let center = c(0.0, 1.0 + 2.0 * u);
    Ok(JData {
        u,
        upper: GenCircle::from_center_radius(center, 0.25)?,
        map: Mobius::from_isometric_pair(center.conj(), 0.25)?,
    })
}

/// `ϱ = ½(tan θ + 1 - ¼(5 - 3cos 2θ))`.
pub fn rho(theta: f64) -> f64 {
    0.5 * (theta.tan() + 1.0 - 0.25 * (5.0 - 3.0 * (2.0 * theta).cos()))
}

/// The `J'` pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JPrimeData {
    pub rho: f64,
    pub upper: GenCircle,
    pub map: Mobius,
}

/// Upper circle `[1 : 2 : -2(1+T+ϱ) : 1 - ϱ² + (1+T+ϱ)²]` with `T = tan θ`:
/// center `-1 + i(1+T+ϱ)`, radius `|ϱ|`, through the tripoint `-1 + i(1+T)`.
pub fn solve_jprime(theta: f64) -> Result<JPrimeData> {
    check_theta(theta)?;
    let t = theta.tan();
    if at_half_pi(theta) || t.abs() > TAN_CAP {
        return Err(Error::SingularParameter("J' diverges at θ = π/2"));
    }
    let r = rho(theta);
    if r.abs() <= RHO_TOL {
        return Err(Error::DegenerateCircle(0.0));
    }
    let center = c(-1.0, 1.0 + t + r);
    Ok(JPrimeData {
        rho: r,
        upper: GenCircle::from_center_radius(center, r.abs())?,
        map: Mobius::from_isometric_pair(center.conj(), r.abs())?,
    })
}

/// The printed reading `[1 : 2 : -2(1+T+ϱ) : 1 - ϱ² + (1+T-ϱ)²]`.
pub fn printed_jprime_circle(theta: f64) -> GenCircle {
    let t = theta.tan();
    let r = rho(theta);
    let m = 1.0 + t + r;
    let p = 1.0 + t - r;
    GenCircle::new(1.0, 2.0, -2.0 * m, 1.0 - r * r + p * p)
}

/// Conditions reported instead of raised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneracyFlag {
    /// θ = π/4: the two `Y₁` circles coincide.
    CoincidentY1Circles,
    /// θ = π/2: `Y₁` is the identity.
    CompressionBodyEndpoint,
    /// θ = π/2: the `J'` circles have escaped to infinity.
    JPrimeDivergent,
    /// `ϱ = 0`: the `J'` circles shrink to the tripoint.
    JPrimeDegenerate,
    /// `ϱ` changed sign since the previous state of a path.
    RhoCrossing,
    /// θ > π/2.
    ExtendedRange,
}

/// One point of the deformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationState {
    pub theta: f64,
    pub cone_angle: f64,
    pub line_minus: GenCircle,
    pub line_plus: GenCircle,
    pub y1_left: GenCircle,
    pub y1_right: GenCircle,
    pub y2_left: GenCircle,
    pub y2_right: GenCircle,
    pub j_upper: GenCircle,
    pub j_lower: GenCircle,
    pub jp_upper: Option<GenCircle>,
    pub jp_lower: Option<GenCircle>,
    pub u: f64,
    /// Pencil parameter `ν = 1 - u / tan θ`; absent where it is not finite.
    pub nu: Option<f64>,
    pub rho: f64,
    pub x: Mobius,
    pub y1: Mobius,
    pub y2: Mobius,
    pub j: Mobius,
    pub jp: Option<Mobius>,
    pub y1_fixed_points: [RiemannPoint; 2],
    pub flags: Vec<DegeneracyFlag>,
}

/// The full configuration at `θ ∈ (0, π]`.
pub fn state(theta: f64) -> Result<DeformationState> {
    check_theta(theta)?;
    let y1 = y1_data(theta)?;
    let jd = solve_j(theta)?;
    let [line_minus, line_plus] = lines();
    let mut flags = Vec::new();
    if (theta - FRAC_PI_4).abs() <= ENDPOINT_TOL {
        flags.push(DegeneracyFlag::CoincidentY1Circles);
    }
    if at_half_pi(theta) {
        flags.push(DegeneracyFlag::CompressionBodyEndpoint);
    }
    let jp = match solve_jprime(theta) {
        Ok(d) => Some(d),
        Err(Error::SingularParameter(_)) => {
            flags.push(DegeneracyFlag::JPrimeDivergent);
            None
        }
        Err(Error::DegenerateCircle(_)) => {
            flags.push(DegeneracyFlag::JPrimeDegenerate);
            None
        }
        Err(e) => return Err(e),
    };
    if theta > FRAC_PI_2 + ENDPOINT_TOL {
        flags.push(DegeneracyFlag::ExtendedRange);
    }
    let t = theta.tan();
    let nu = Some(1.0 - jd.u / t).filter(|v| v.is_finite() && !at_half_pi(theta));
    Ok(DeformationState {
        theta,
        cone_angle: 4.0 * theta,
        line_minus,
        line_plus,
        y1_left: y1.left,
        y1_right: y1.right,
        y2_left: y1.left.mirror(),
        y2_right: y1.right.mirror(),
        j_upper: jd.upper,
        j_lower: jd.upper.mirror(),
        jp_upper: jp.map(|d| d.upper),
        jp_lower: jp.map(|d| d.upper.mirror()),
        u: jd.u,
        nu,
        rho: rho(theta),
        x: x_map(),
        y1: y1.map,
        y2: y1.map.conj_entries(),
        j: jd.map,
        jp: jp.map(|d| d.map),
        y1_fixed_points: y1.fixed_points,
        flags,
    })
}

impl DeformationState {
    pub fn has_flag(&self, f: DegeneracyFlag) -> bool {
        self.flags.contains(&f)
    }

    /// `⟨X, Y1, Y2, J, J'⟩`, omitting `J'` where it is undefined.
    pub fn group(&self) -> Result<MarkedGroup> {
        let mut gens = vec![("X", self.x), ("Y1", self.y1), ("Y2", self.y2), ("J", self.j)];
        if let Some(jp) = self.jp {
            gens.push(("J'", jp));
        }
        MarkedGroup::new(gens)
    }

    /// Every isometric circle of the configuration, lines included.
    pub fn circles(&self) -> Vec<(&'static str, GenCircle)> {
        let mut v = vec![
            ("L-", self.line_minus),
            ("L+", self.line_plus),
            ("Y1 left", self.y1_left),
            ("Y1 right", self.y1_right),
            ("Y2 left", self.y2_left),
            ("Y2 right", self.y2_right),
            ("J upper", self.j_upper),
            ("J lower", self.j_lower),
        ];
        if let (Some(u), Some(l)) = (self.jp_upper, self.jp_lower) {
            v.push(("J' upper", u));
            v.push(("J' lower", l));
        }
        v
    }
}

/// Unsigned angle `min(4θ, 2π - 4θ)` folded into `[0, π]`.
pub fn expected_y1_angle(theta: f64) -> f64 {
    let a = (4.0 * theta).rem_euclid(2.0 * PI);
    a.min(2.0 * PI - a)
}

/// `arccos(-⟨c₁, c₂⟩)` computed from half-angle terms, which stays accurate
/// for nearly tangent and nearly coincident circles.
pub fn stable_exterior_angle(c1: &GenCircle, c2: &GenCircle) -> Result<f64> {
    match (c1.center_radius(), c2.center_radius()) {
        (Ok((z1, r1)), Ok((z2, r2))) => {
            let d2 = (z1 - z2).norm_sqr();
            let plus = ((r1 + r2).powi(2) - d2).max(0.0).sqrt();
            let minus = (d2 - (r1 - r2).powi(2)).max(0.0).sqrt();
            Ok(2.0 * plus.atan2(minus))
        }
        _ => exterior_angle(c1, c2),
    }
}

/// Center distance minus the sum of radii.
pub fn disjointness_margin(c1: &GenCircle, c2: &GenCircle) -> Result<f64> {
    let (z1, r1) = c1.center_radius()?;
    let (z2, r2) = c2.center_radius()?;
    Ok((z1 - z2).norm() - r1 - r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One named, quantified check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn measure(name: &str, residual: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            status: if residual <= tolerance {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            residual,
            tolerance,
            note: None,
        }
    }

    fn skipped(name: &str, note: &str) -> Check {
        Check {
            name: name.into(),
            status: CheckStatus::Skipped,
            residual: 0.0,
            tolerance: 0.0,
            note: Some(note.into()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    fn from_result(name: &str, r: Result<f64>, tolerance: f64) -> Check {
        match r {
            Ok(v) => Check::measure(name, v, tolerance),
            Err(e) => Check {
                name: name.into(),
                status: CheckStatus::Fail,
                residual: f64::INFINITY,
                tolerance,
                note: Some(e.to_string()),
            },
        }
    }
}

/// `J`/`J'` disjointness margins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub upper: f64,
    pub lower: f64,
    pub cross: f64,
    pub min: f64,
}

/// The printed `J'` reading, evaluated for the record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedJPrime {
    pub circle: GenCircle,
    /// Signed distance of the tripoint from the circle.
    pub tripoint_residual: f64,
    /// Inversive product with the left `Y₁` circle.
    pub y1_product: Option<f64>,
    /// Margin against the upper `J` circle (negative: overlap).
    pub j_margin: Option<f64>,
}

/// Result of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub schema: u32,
    pub theta: f64,
    pub cone_angle: f64,
    pub checks: Vec<Check>,
    pub margins: Option<Margins>,
    pub flags: Vec<DegeneracyFlag>,
    pub conventions: Vec<String>,
    pub printed_jprime: Option<PrintedJPrime>,
    pub passed: bool,
}

impl ValidityReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.status != CheckStatus::Skipped)
            .map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

fn tangency(c1: &GenCircle, c2: &GenCircle) -> Result<f64> {
    Ok((inversive_product(c1, c2)?.abs() - 1.0).abs())
}

fn orthogonality(c1: &GenCircle, c2: &GenCircle) -> Result<f64> {
    Ok(inversive_product(c1, c2)?.abs())
}

fn match_pair(got: [RiemannPoint; 2], want: [RiemannPoint; 2]) -> f64 {
    let d = |a: &RiemannPoint, b: &RiemannPoint| a.chordal_distance(b);
    let straight = d(&got[0], &want[0]).max(d(&got[1], &want[1]));
    let swapped = d(&got[0], &want[1]).max(d(&got[1], &want[0]));
    straight.min(swapped)
}

/// Runs every check on `s`. Failures are recorded, never raised.
pub fn validate(s: &DeformationState) -> ValidityReport {
    let theta = s.theta;
    let mut checks = Vec::new();

    for (name, m) in [("det X", s.x), ("det Y1", s.y1), ("det Y2", s.y2), ("det J", s.j)] {
        checks.push(Check::measure(name, (m.det() - 1.0).norm(), DET_TOL));
    }
    match s.jp {
        Some(m) => checks.push(Check::measure("det J'", (m.det() - 1.0).norm(), DET_TOL)),
        None => checks.push(Check::skipped("det J'", "J' undefined at this θ")),
    }
    checks.push(Check::measure("X fixed", s.x.entry_distance(&x_map()), 0.0));
    checks.push(Check::measure(
        "trace Y1",
        (s.y1.trace() + 2.0 * (2.0 * theta).cos()).norm(),
        TRACE_TOL,
    ));
    checks.push(match s.y1.fixed_points() {
        Ok(FixedPoints::Pair(a, b)) => Check::measure(
            "Y1 fixed points",
            match_pair([a, b], s.y1_fixed_points),
            FIXED_POINT_TOL,
        ),
        Ok(FixedPoints::Single(p)) => Check::measure(
            "Y1 fixed points",
            match_pair([p, p], s.y1_fixed_points),
            FIXED_POINT_TOL,
        ),
        Err(_) => Check::skipped("Y1 fixed points", "Y1 is the identity"),
    });

    checks.push(Check::from_result(
        "Y1 left tangent to L-",
        tangency(&s.y1_left, &s.line_minus),
        TANGENCY_TOL,
    ));
    checks.push(Check::from_result(
        "Y1 right tangent to L+",
        tangency(&s.y1_right, &s.line_plus),
        TANGENCY_TOL,
    ));
    let expected = expected_y1_angle(theta);
    let mut angle = Check::from_result(
        "Y1 circle angle",
        stable_exterior_angle(&s.y1_left, &s.y1_right).map(|a| (a - expected).abs()),
        ANGLE_TOL,
    );
    if s.has_flag(DegeneracyFlag::CoincidentY1Circles) {
        angle = angle.with_note("coincident circles, angle π by convention");
    }
    checks.push(angle);
    checks.push(match s.y1.isometric_circles() {
        Ok((iy, iy_inv)) => Check::measure(
            "Y1 isometric circles",
            iy.projective_distance(&s.y1_right)
                .max(iy_inv.projective_distance(&s.y1_left)),
            1e-9,
        ),
        Err(_) => Check::skipped("Y1 isometric circles", "Y1 fixes ∞"),
    });

    checks.push(Check::from_result(
        "J radius",
        s.j_upper.center_radius().map(|(_, r)| (r - 0.25).abs()),
        RADIUS_TOL,
    ));
    checks.push(Check::from_result(
        "J orthogonal to Y1 left",
        orthogonality(&s.j_upper, &s.y1_left),
        ORTHOGONALITY_TOL,
    ));
    checks.push(Check::from_result(
        "J orthogonal to Y1 right",
        orthogonality(&s.j_upper, &s.y1_right),
        ORTHOGONALITY_TOL,
    ));
    checks.push(match s.nu {
        Some(nu) if nu.abs() < 1e6 => {
            let top = 1.0 + 2.0 * theta.tan();
            let pencil = crate::circle::PencilSpec {
                base1: GenCircle::point(I),
                base2: GenCircle::point(c(0.0, top)),
                nu,
            };
            Check::measure("J in pencil", pencil.point().projective_distance(&s.j_upper), 1e-9)
        }
        _ => Check::skipped("J in pencil", "ν not finite at this θ"),
    });
    checks.push(match s.j.isometric_circles() {
        Ok((ij, ij_inv)) => Check::measure(
            "J isometric circles",
            ij.projective_distance(&s.j_upper)
                .max(ij_inv.projective_distance(&s.j_lower)),
            1e-9,
        ),
        Err(e) => Check::from_result("J isometric circles", Err(e), 1e-9),
    });

    let mut margins = None;
    match (s.jp_upper, s.jp_lower) {
        (Some(up), Some(lo)) => {
            let tripoint = c(-1.0, 1.0 + theta.tan());
            checks.push(Check::measure(
                "J' through tripoint",
                up.residual(tripoint).abs(),
                1e-9 * (1.0 + tripoint.norm()),
            ));
            checks.push(Check::from_result(
                "J' orthogonal to L-",
                orthogonality(&up, &s.line_minus).and_then(|a| Ok(a.max(orthogonality(&lo, &s.line_minus)?))),
                ORTHOGONALITY_TOL,
            ));
            checks.push(Check::from_result(
                "J' orthogonal to Y1/Y2 left",
                orthogonality(&up, &s.y1_left).and_then(|a| Ok(a.max(orthogonality(&lo, &s.y2_left)?))),
                ORTHOGONALITY_TOL,
            ));
            let m = (|| -> Result<Margins> {
                let upper = disjointness_margin(&s.j_upper, &up)?;
                let lower = disjointness_margin(&s.j_lower, &lo)?;
                let cross = disjointness_margin(&s.j_upper, &lo)?.min(disjointness_margin(&s.j_lower, &up)?);
                Ok(Margins {
                    upper,
                    lower,
                    cross,
                    min: upper.min(lower).min(cross),
                })
            })();
            checks.push(Check::from_result(
                "J/J' disjoint",
                m.as_ref()
                    .map(|m| (-m.min).max(0.0))
                    .map_err(|e| Error::InvalidParameter(e.to_string())),
                0.0,
            ));
            margins = m.ok();
        }
        _ => {
            for name in [
                "J' through tripoint",
                "J' orthogonal to L-",
                "J' orthogonal to Y1/Y2 left",
                "J/J' disjoint",
            ] {
                checks.push(Check::skipped(name, "J' undefined at this θ"));
            }
        }
    }

    let mirrored = s.y2_left == s.y1_left.mirror()
        && s.y2_right == s.y1_right.mirror()
        && s.y1_right == s.y1_left.mirror_imaginary()
        && s.j_lower == s.j_upper.mirror()
        && s.jp_lower == s.jp_upper.map(|g| g.mirror())
        && s.y2 == s.y1.conj_entries();
    checks.push(Check::measure("mirror symmetry", if mirrored { 0.0 } else { 1.0 }, 0.0));

    let printed_jprime = (!at_half_pi(theta) && theta.tan().abs() <= TAN_CAP).then(|| {
        let circle = printed_jprime_circle(theta);
        let tripoint = c(-1.0, 1.0 + theta.tan());
        PrintedJPrime {
            circle,
            tripoint_residual: circle.residual(tripoint),
            y1_product: inversive_product(&circle, &s.y1_left).ok(),
            j_margin: disjointness_margin(&s.j_upper, &circle).ok(),
        }
    });

    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    ValidityReport {
        schema: SCHEMA_VERSION,
        theta,
        cone_angle: s.cone_angle,
        checks,
        margins,
        flags: s.flags.clone(),
        conventions: vec![
            LINE_CONVENTION.into(),
            "J' circle uses the pencil vector [1 : 2 : -2(1+T+ϱ) : 1 - ϱ² + (1+T+ϱ)²]".into(),
            "a third pairing J'' is not part of the family; X·J'·X⁻¹ is a candidate, not asserted".into(),
        ],
        printed_jprime,
        passed,
    }
}

/// `|tr J'|` near θ = π/2 under both pencil readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceLimits {
    /// Probe angle below π/2.
    pub theta: f64,
    /// Trace of the negative-trace lift, corrected pencil vector.
    pub corrected: f64,
    /// Trace of the negative-trace lift, printed pencil vector.
    pub printed: f64,
    pub corrected_limit: f64,
    pub printed_limit: f64,
}

/// `tr J' = 2 Im(center)/radius` for the pairing centered at `-1 ± i·y` with
/// radius `r`, on the negative-trace lift.
fn pairing_trace(y: f64, r: f64) -> f64 {
    -2.0 * y / r
}

/// Traces of `J'` as θ → π/2⁻: `-6` with the corrected circle, `-2` with the
/// printed one.
pub fn jprime_trace_limits(probe: f64) -> Result<TraceLimits> {
    if !(probe > 0.0 && probe < 1.0) {
        return Err(Error::InvalidParameter("probe offset must lie in (0, 1)".into()));
    }
    let theta = FRAC_PI_2 - probe;
    let (t, r) = (theta.tan(), rho(theta));
    let y = 1.0 + t + r;
    // printed circle: r² = m² - p² + ϱ² = 4ϱ(1 + T) + ϱ², free of cancellation
    let printed_radius = (r * r + 4.0 * r * (1.0 + t)).sqrt();
    Ok(TraceLimits {
        theta,
        corrected: pairing_trace(y, r.abs()),
        printed: pairing_trace(y, printed_radius),
        corrected_limit: -6.0,
        printed_limit: -2.0,
    })
}

/// The tuple `(Y₁ᵏX⁻¹, J', J, Y₁ᵏ)` conjugated into normal form, where
/// `Y₁ᵏ = Y₁(θ)⁻¹` is oriented like the Koebe group's `Y₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormalizedTuple {
    pub theta: f64,
    pub phi: Mobius,
    #[serde(with = "crate::json::complex")]
    pub lambda: Complex,
    pub cusp: RiemannPoint,
    pub p: Mobius,
    pub q: Option<Mobius>,
    pub m: Mobius,
    pub n: Mobius,
    /// `tr P, tr Q, tr M, tr N, tr P⁻¹N`.
    #[serde(with = "crate::json::complex_vec")]
    pub traces: Vec<Complex>,
    /// `‖ΦJΦ⁻¹ - M(λ)‖` up to sign.
    pub residual: f64,
}

impl RenormalizedTuple {
    /// The tuple as `(P, Q, M, N)` when `Q` is defined.
    pub fn tuple(&self) -> Option<GeneratorTuple> {
        self.q.map(|q| GeneratorTuple::from_array([self.p, q, self.m, self.n]))
    }
}

/// `Fix(Y₁ᵏX⁻¹) = 1 + i(1 + tan θ)`, passing through ∞ at θ = π/2.
pub fn cusp_point(theta: f64) -> RiemannPoint {
    if at_half_pi(theta) {
        RiemannPoint::Infinity
    } else {
        RiemannPoint::Finite(c(1.0, 1.0 + theta.tan()))
    }
}

/// Conjugates the Koebe-oriented tuple so that the cusp goes to ∞ and `J`
/// becomes `M(tr J / 2)`. No membership in the parameter space is asserted.
pub fn renormalize_marked(s: &DeformationState) -> Result<RenormalizedTuple> {
    let yk = s.y1.inverse();
    let p0 = yk.compose(&s.x.inverse());
    let cusp = match p0.fixed_points() {
        Ok(FixedPoints::Single(p)) => p,
        Ok(FixedPoints::Pair(a, b)) => {
            let want = cusp_point(s.theta);
            if a.chordal_distance(&want) <= b.chordal_distance(&want) {
                a
            } else {
                b
            }
        }
        Err(e) => return Err(e),
    };
    let lambda = s.j.trace() / 2.0;
    let (f0, f1) = match s.j.fixed_points() {
        Ok(FixedPoints::Pair(f0, f1)) if (lambda * lambda - 1.0).norm() > 1e-9 => (f0, f1),
        _ => return Err(Error::InvalidParameter("J is not loxodromic".into())),
    };
    let t = (lambda * lambda - 1.0).sqrt();
    let target = symmetric_loxodromic(lambda);
    let (phi, residual) = [(t, -t), (-t, t)]
        .into_iter()
        .map(|(a, b)| -> Result<(Mobius, f64)> {
            let phi = Mobius::from_three_points([f0, f1, cusp], [a.into(), b.into(), RiemannPoint::Infinity])?;
            Ok((phi, s.j.conjugated_by(&phi).projective_distance(&target)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two candidates");
    let conj = |m: &Mobius| m.conjugated_by(&phi).normalize();
    let (p, m, n) = (conj(&p0), conj(&s.j), conj(&yk));
    let q = s.jp.map(|jp| conj(&jp));
    let traces = vec![
        p.trace(),
        q.map_or(Complex::new(f64::NAN, f64::NAN), |q| q.trace()),
        m.trace(),
        n.trace(),
        p.inverse().compose(&n).trace(),
    ];
    Ok(RenormalizedTuple {
        theta: s.theta,
        phi,
        lambda,
        cusp,
        p,
        q,
        m,
        n,
        traces,
        residual,
    })
}

/// One grid point of a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub theta: f64,
    pub state: Option<DeformationState>,
    pub error: Option<String>,
}

/// Largest projective jump between consecutive states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub max_jump_y1: f64,
    pub max_jump_j: f64,
    pub max_jump_jp: f64,
    /// Indices of states where `ϱ` changed sign through zero.
    pub rho_crossings: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub entries: Vec<PathEntry>,
    pub continuity: ContinuityReport,
}

/// `θ = kπ/n` for each `k`.
pub fn fraction_grid(ks: impl IntoIterator<Item = u32>, n: u32) -> Vec<f64> {
    ks.into_iter().map(|k| f64::from(k) * PI / f64::from(n)).collect()
}

/// Evaluates `state` on every grid point in parallel. A sign change of `ϱ`
/// between consecutive points not separated by π/2 flags the later state.
pub fn sample_path(grid: &[f64]) -> PathSample {
    let mut entries: Vec<PathEntry> = grid
        .par_iter()
        .map(|&theta| match state(theta) {
            Ok(s) => PathEntry {
                theta,
                state: Some(s),
                error: None,
            },
            Err(e) => PathEntry {
                theta,
                state: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let mut cont = ContinuityReport {
        max_jump_y1: 0.0,
        max_jump_j: 0.0,
        max_jump_jp: 0.0,
        rho_crossings: Vec::new(),
    };
    for i in 1..entries.len() {
        let (Some(a), Some(b)) = (&entries[i - 1].state, &entries[i].state) else {
            continue;
        };
        cont.max_jump_y1 = cont.max_jump_y1.max(a.y1.projective_distance(&b.y1));
        cont.max_jump_j = cont.max_jump_j.max(a.j.projective_distance(&b.j));
        if let (Some(x), Some(y)) = (a.jp, b.jp) {
            cont.max_jump_jp = cont.max_jump_jp.max(x.projective_distance(&y));
        }
        let (lo, hi) = (a.theta.min(b.theta), a.theta.max(b.theta));
        let through_pole = lo <= FRAC_PI_2 + ENDPOINT_TOL && hi >= FRAC_PI_2 - ENDPOINT_TOL;
        if !through_pole && a.rho * b.rho < 0.0 {
            cont.rho_crossings.push(i);
        }
    }
    for &i in &cont.rho_crossings {
        if let Some(s) = entries[i].state.as_mut() {
            s.flags.push(DegeneracyFlag::RhoCrossing);
        }
    }
    PathSample {
        entries,
        continuity: cont,
    }
}

/// The zero of `ϱ` in `(π/2, π)`, by bisection.
pub fn rho_zero() -> f64 {
    let (mut lo, mut hi) = (FRAC_PI_2 + 1e-6, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rho(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid96() -> Vec<f64> {
        fraction_grid(1..=47, 96)
    }

    #[test]
    fn y1_at_quarter_pi() {
        let d = y1_data(FRAC_PI_4).unwrap();
        let want = Mobius::raw(c(0.0, 2.0), re(3.0), re(1.0), c(0.0, -2.0));
        assert!(d.map.projective_distance(&want) < 1e-15);
        assert!(d.map.trace().norm() < 1e-15);
        let fp = match d.map.fixed_points().unwrap() {
            FixedPoints::Pair(a, b) => [a, b],
            FixedPoints::Single(_) => panic!(),
        };
        assert!(match_pair(fp, [I.into(), c(0.0, 3.0).into()]) < 1e-12);
        let (z, r) = d.left.center_radius().unwrap();
        assert!((z - c(0.0, 2.0)).norm() < 1e-15 && (r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn y1_near_zero_is_parabolic() {
        let d = y1_data(1e-9).unwrap();
        assert!((d.map.trace() + 2.0).norm() < 1e-12);
        let (z, r) = d.left.center_radius().unwrap();
        assert!((z - c(-0.5, 1.0)).norm() < 1e-8 && (r - 0.5).abs() < 1e-12);
        let (z, _) = d.right.center_radius().unwrap();
        assert!((z - c(0.5, 1.0)).norm() < 1e-8);
    }

    #[test]
    fn y1_center_formula() {
        // oracle: center -tanθ/tan2θ + i(1 + tanθ), radius tanθ/sin2θ
        for theta in [0.1, 0.5, 1.0, 1.3, 2.0, 2.9] {
            let d = y1_data(theta).unwrap();
            let (z, r) = d.left.center_radius().unwrap();
            let t = theta.tan();
            let want = c(-t / (2.0 * theta).tan(), 1.0 + t);
            assert!((z - want).norm() < 1e-9 * (1.0 + want.norm()), "{theta}");
            assert!((r - t / (2.0 * theta).sin()).abs() < 1e-9 * (1.0 + r));
        }
    }

    #[test]
    fn y1_is_elliptic_with_cone_rotation() {
        // orientation fixed once, then required along the whole path
        let angle_for = |theta: f64| {
            let s = state(theta).unwrap();
            let [u, v] = s.y1_fixed_points;
            let a = Mobius::elliptic_from_fixed_points(u, v, 4.0 * theta).unwrap();
            let b = Mobius::elliptic_from_fixed_points(u, v, 2.0 * PI - 4.0 * theta).unwrap();
            (s.y1.projective_distance(&a), s.y1.projective_distance(&b))
        };
        let (a0, b0) = angle_for(PI / 96.0);
        let use_first = a0 < b0;
        for theta in grid96() {
            if (theta - FRAC_PI_4).abs() < 1e-12 {
                continue;
            }
            let (a, b) = angle_for(theta);
            let d = if use_first { a } else { b };
            assert!(d < 1e-9, "θ = {theta}: {a} {b}");
        }
    }

    #[test]
    fn j_endpoint_anchor() {
        let s = state(1e-4).unwrap();
        let koebe_j = Mobius::raw(re(3.0), c(0.0, -2.0), c(0.0, 4.0), re(3.0));
        assert!(s.j.projective_distance(&koebe_j) < 1e-3);
        let s = state(1e-10).unwrap();
        assert!(s.j.projective_distance(&koebe_j) < 1e-8);
        let (z, r) = s.j_upper.center_radius().unwrap();
        assert!((z - c(0.0, 0.75)).norm() < 1e-9 && (r - 0.25).abs() < 1e-15);
        assert!((s.u + 0.125).abs() < 1e-9);
    }

    #[test]
    fn j_parameter_solves_radius_equation() {
        for theta in [0.01, 0.3, 0.7, 1.2, 1.5] {
            let u = j_parameter(theta);
            let t = theta.tan();
            assert!((u * (u - t) - 1.0 / 64.0).abs() < 1e-12 * (1.0 + t.abs()), "{theta}");
            let root = (t - (t * t + 1.0 / 16.0).sqrt()) / 2.0;
            assert!((u - root).abs() < 1e-9 * (1.0 + t.abs()));
        }
        assert!((j_parameter(PI - 1e-9) - 0.125).abs() < 1e-8);
        assert_eq!(j_parameter(FRAC_PI_2).abs() < 1e-16, true);
    }

    #[test]
    fn jprime_endpoint_and_orientation() {
        let d = solve_jprime(1e-10).unwrap();
        assert!((d.rho - 0.25).abs() < 1e-9);
        let (z, r) = d.upper.center_radius().unwrap();
        assert!((z - c(-1.0, 1.25)).norm() < 1e-9 && (r - 0.25).abs() < 1e-9);
        // the pairing sends the exterior of the upper circle into the lower one
        let want = Mobius::raw(c(5.0, -4.0), c(0.0, -10.0), c(0.0, 4.0), c(5.0, 4.0));
        assert!(d.map.projective_distance(&want) < 1e-8);
        let (iu, il) = d.map.isometric_circles().unwrap();
        assert!(iu.projective_distance(&d.upper) < 1e-9);
        assert!(il.projective_distance(&d.upper.mirror()) < 1e-9);
    }

    #[test]
    fn jprime_orthogonal_at_sixth_pi() {
        let s = state(PI / 6.0).unwrap();
        let p = inversive_product(&s.jp_upper.unwrap(), &s.y1_left).unwrap();
        assert!(p.abs() < 1e-9);
        // the printed reading misses the tripoint
        let printed = printed_jprime_circle(PI / 6.0);
        let tripoint = c(-1.0, 1.0 + (PI / 6.0).tan());
        assert!(printed.residual(tripoint).abs() > 0.1);
    }

    #[test]
    fn cone_angles() {
        assert!((state(PI / 6.0).unwrap().cone_angle - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn half_pi_endpoint() {
        let s = state(FRAC_PI_2).unwrap();
        assert_eq!(s.y1, Mobius::IDENTITY);
        assert_eq!(s.x, x_map());
        assert!(s.jp.is_none());
        assert!(s.has_flag(DegeneracyFlag::CompressionBodyEndpoint));
        assert!(s.has_flag(DegeneracyFlag::JPrimeDivergent));
        assert!((s.j.trace().norm() - 8.0).abs() < 1e-12);
        let r = validate(&s);
        assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn quarter_pi_is_flagged() {
        let s = state(FRAC_PI_4).unwrap();
        assert!(s.has_flag(DegeneracyFlag::CoincidentY1Circles));
        let r = validate(&s);
        assert!(r.passed);
        let angle = r.check("Y1 circle angle").unwrap();
        assert!(angle.note.is_some());
        let a = stable_exterior_angle(&s.y1_left, &s.y1_right).unwrap();
        assert!((a - PI).abs() < 1e-9);
    }

    #[test]
    fn eighth_pi_passes_tightly() {
        let r = validate(&state(PI / 8.0).unwrap());
        assert!(r.passed);
        assert!(r.max_residual() <= 1e-9, "{}", r.max_residual());
        assert!(r.margins.unwrap().min > 0.0);
    }

    #[test]
    fn tampered_radius_fails() {
        let mut s = state(PI / 8.0).unwrap();
        let (z, _) = s.j_upper.center_radius().unwrap();
        s.j_upper = GenCircle::from_center_radius(z, 0.3).unwrap();
        s.j_lower = s.j_upper.mirror();
        let r = validate(&s);
        assert!(!r.passed);
        let c = r.check("J radius").unwrap();
        assert_eq!(c.status, CheckStatus::Fail);
        assert!((c.residual - 0.05).abs() < 1e-12);
    }

    #[test]
    fn broken_mirror_fails() {
        let mut s = state(0.3).unwrap();
        s.y2_left.h += 1e-15;
        assert_eq!(validate(&s).check("mirror symmetry").unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn grid_invariants() {
        let mut min_margin = f64::INFINITY;
        for theta in grid96() {
            let s = state(theta).unwrap();
            let r = validate(&s);
            assert!(r.passed, "θ = {theta}: {:?}", r.failures().collect::<Vec<_>>());
            min_margin = min_margin.min(r.margins.unwrap().min);
        }
        assert!(min_margin > 0.5, "{min_margin}");
    }

    #[test]
    fn trace_limits() {
        let t = jprime_trace_limits(1e-7).unwrap();
        assert!((t.corrected + 6.0).abs() < 1e-5, "{}", t.corrected);
        assert!((t.printed + 2.0).abs() < 1e-5, "{}", t.printed);
        // cross-check against the matrix and the printed circle at a moderate probe
        let t = jprime_trace_limits(1e-2).unwrap();
        let jp = state(t.theta).unwrap().jp.unwrap();
        assert!((jp.trace().re.abs() - t.corrected.abs()).abs() < 1e-9 * t.corrected.abs());
        let (z, r) = printed_jprime_circle(t.theta).center_radius().unwrap();
        assert!((2.0 * z.im / r - t.printed.abs()).abs() < 1e-9);
    }

    #[test]
    fn rho_zero_location() {
        let z = rho_zero();
        assert!((z - 2.811607722).abs() < 1e-8, "{z}");
        assert!(22.0 * PI / 24.0 > z && 21.0 * PI / 24.0 < z);
        assert!(matches!(solve_jprime(z), Err(Error::DegenerateCircle(_))));
        let s = state(z).unwrap();
        assert!(s.has_flag(DegeneracyFlag::JPrimeDegenerate));
    }

    #[test]
    fn extended_frames_flag_one_crossing() {
        let p = sample_path(&fraction_grid(13..=24, 24));
        assert_eq!(p.entries.len(), 12);
        assert_eq!(p.continuity.rho_crossings, vec![9]);
        for (i, e) in p.entries.iter().enumerate() {
            let s = e.state.as_ref().unwrap();
            assert_eq!(s.has_flag(DegeneracyFlag::RhoCrossing), i == 9, "frame {i}");
            assert!(s.has_flag(DegeneracyFlag::ExtendedRange) || i == 11 && s.theta <= PI);
        }
        let p = sample_path(&fraction_grid(1..=12, 24));
        assert!(p.continuity.rho_crossings.is_empty());
        assert_eq!(sample_path(&[0.4]).entries.len(), 1);
    }

    #[test]
    fn path_is_deterministic() {
        let grid: Vec<f64> = (1..100).map(|k| f64::from(k) * PI / 100.0).collect();
        let par = sample_path(&grid);
        let seq: Vec<_> = grid.iter().map(|&t| state(t).ok()).collect();
        for (e, s) in par.entries.iter().zip(&seq) {
            let mut a = e.state.clone();
            if let Some(a) = a.as_mut() {
                a.flags.retain(|f| *f != DegeneracyFlag::RhoCrossing);
            }
            assert_eq!(&a, s);
        }
    }

    #[test]
    fn errors_continue_the_path() {
        let p = sample_path(&[0.3, -1.0, 0.5]);
        assert!(p.entries[1].error.is_some());
        assert!(p.entries[0].state.is_some() && p.entries[2].state.is_some());
        assert!(state(0.0).is_err() && state(3.2).is_err() && state(f64::NAN).is_err());
    }

    #[test]
    fn renormalized_near_zero_matches_koebe_pattern() {
        let r = renormalize_marked(&state(1e-8).unwrap()).unwrap();
        assert!((r.lambda - 3.0).norm() < 1e-6);
        assert!(r.m.projective_distance(&symmetric_loxodromic(r.lambda)) < 1e-9);
        assert!(r.p.c.norm() < 1e-9, "P fixes ∞");
        assert!((r.traces[0].norm() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn renormalized_mid_path() {
        let s = state(PI / 3.0).unwrap();
        let r = renormalize_marked(&s).unwrap();
        assert!((r.lambda - s.j.trace() / 2.0).norm() < 1e-15);
        assert!(r.m.projective_distance(&symmetric_loxodromic(r.lambda)) < 1e-9);
        assert!(r.p.c.norm() < 1e-9);
        let r = renormalize_marked(&state(FRAC_PI_2).unwrap()).unwrap();
        assert!(r.q.is_none() && r.tuple().is_none());
        assert!(r.n.identity_defect() < 1e-12);
    }

    #[test]
    fn renormalized_path_is_smooth() {
        // Q diverges at θ = π/2 and at ϱ = 0, so the probe stays clear of both
        let grid = (1..=24)
            .map(|k| 0.05 * f64::from(k))
            .chain((0..11).map(|k| 2.1 + 0.05 * f64::from(k)));
        for theta in grid {
            let a = renormalize_marked(&state(theta).unwrap()).unwrap();
            let b = renormalize_marked(&state(theta + 1e-4).unwrap()).unwrap();
            for (x, y) in [(a.p, b.p), (a.m, b.m), (a.n, b.n), (a.q.unwrap(), b.q.unwrap())] {
                assert!(x.entry_distance(&y) <= 1e-2, "θ = {theta}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn report_serializes() {
        let r = validate(&state(0.3).unwrap());
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], 1);
        assert!(v["checks"].as_array().unwrap().len() > 15);
        assert!(v["printed_jprime"]["tripoint_residual"].is_number());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn invariants_hold(theta in 0.005f64..1.56) {
            let s = state(theta).unwrap();
            prop_assert!((s.y1.trace() + 2.0 * (2.0 * theta).cos()).norm() <= TRACE_TOL);
            let r = validate(&s);
            prop_assert!(r.passed, "{:?}", r.failures().collect::<Vec<_>>());
            prop_assert!(r.margins.unwrap().min > 0.0);
        }

        #[test]
        fn y1_angle_product(theta in 0.001f64..3.14) {
            let s = state(theta).unwrap();
            if let Ok(p) = inversive_product(&s.y1_left, &s.y1_right) {
                prop_assert!((p + (4.0 * theta).cos()).abs() < 1e-9);
            }
        }
    }
}
