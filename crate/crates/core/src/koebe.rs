//! The Koebe group `B = ⟨X, Y₁, Y₂, J, J'⟩` and its normalization into `𝒢`.
//!
//! Two copies of the `(∞,∞,∞)` triangle group are amalgamated along `⟨X⟩`, and
//! two HNN extensions by `J` and `J'` hide the remaining cusps. Every matrix of
//! `B` has Gaussian-integer entries, so the assembly is exact.

use serde::{Deserialize, Serialize};

use crate::circle::GenCircle;
use crate::error::{Error, Result};
use crate::exact::{gauss, GaussInt, Mat2};
use crate::group::MarkedGroup;
use crate::moebius::{c, Complex, FixedPoints, Mobius, RiemannPoint};
use crate::varieties::{derive_g_params, Branch, GPoint, GeneratorTuple};

/// Tolerance for snapping float solutions to Gaussian integers.
pub const SNAP_TOL: f64 = 1e-9;

/// One step of the construction, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceStep {
    pub step: String,
    pub detail: String,
}

/// The exact generators of `B` with the intermediate maps that produce them.
#[derive(Debug, Clone, PartialEq)]
pub struct KoebeAssembly {
    pub x: Mat2<GaussInt>,
    pub y: Mat2<GaussInt>,
    pub phi1: Mat2<GaussInt>,
    pub phi2: Mat2<GaussInt>,
    pub y1: Mat2<GaussInt>,
    pub y2: Mat2<GaussInt>,
    pub j: Option<Mat2<GaussInt>>,
    pub jp: Option<Mat2<GaussInt>>,
    pub log: Vec<ProvenanceStep>,
}

/// Labels of `B`'s generators, in order.
pub const B_LABELS: [&str; 5] = ["X", "Y1", "Y2", "J", "J'"];

fn step(log: &mut Vec<ProvenanceStep>, s: &str, detail: String) {
    log.push(ProvenanceStep {
        step: s.to_string(),
        detail,
    });
}

/// `X`, `Y` and the two conjugates `Y₁ = Φ₁YΦ₁⁻¹`, `Y₂ = Φ₂YΦ₂⁻¹`.
pub fn build_triangle_pair() -> KoebeAssembly {
    let x = Mat2::new(gauss(1, 0), gauss(2, 0), gauss(0, 0), gauss(1, 0));
    let y = Mat2::new(gauss(1, 0), gauss(0, 0), gauss(2, 0), gauss(1, 0));
    let phi1 = Mat2::new(gauss(1, 0), gauss(0, 1), gauss(0, 0), gauss(1, 0));
    let phi2 = Mat2::new(gauss(1, 0), gauss(0, -1), gauss(0, 0), gauss(1, 0));
    let y1 = y.conjugated_by(&phi1);
    let y2 = y.conjugated_by(&phi2);
    let mut log = Vec::new();
    step(&mut log, "triangle group", format!("⟨X, Y⟩ with X = {x}, Y = {y}"));
    step(
        &mut log,
        "conjugate",
        format!("Φ₁ = {phi1}, Y₁ = Φ₁YΦ₁⁻¹ = {y1}; cusp neighbourhood Im z > 0"),
    );
    step(
        &mut log,
        "conjugate",
        format!("Φ₂ = {phi2}, Y₂ = Φ₂YΦ₂⁻¹ = {y2}; cusp neighbourhood Im z < 0"),
    );
    KoebeAssembly {
        x,
        y,
        phi1,
        phi2,
        y1,
        y2,
        j: None,
        jp: None,
        log,
    }
}

/// The Möbius map with `I(g) = src`, `I(g⁻¹) = dst` and `g(p) = q`.
///
/// Writing `g(z) = c_d − 1/(c²(z − c_s))` for the centers `c_s`, `c_d` gives
/// `c² = 1/((c_d − q)(p − c_s))`, then `a = c·c_d`, `d = −c·c_s`.
pub fn solve_tangent_pairing(src: &GenCircle, dst: &GenCircle, p: RiemannPoint, q: RiemannPoint) -> Result<Mobius> {
    let (cs, rs) = src.center_radius()?;
    let (cd, rd) = dst.center_radius()?;
    let tol = 1e-9 * rs.max(rd).max(1.0);
    if (rs - rd).abs() > tol {
        return Err(Error::NoSolution(format!(
            "isometric circles of a Möbius map have equal radii, got {rs} and {rd}"
        )));
    }
    let (p, q) = match (p.finite(), q.finite()) {
        (Some(p), Some(q)) => (p, q),
        _ => return Err(Error::NoSolution("pairing points must be finite".into())),
    };
    if !src.contains_point(p, tol) || !dst.contains_point(q, tol) {
        return Err(Error::NoSolution("pairing points must lie on their circles".into()));
    }
    let c2 = ((cd - q) * (p - cs)).inv();
    let cc = c2.sqrt();
    if !cc.is_finite() || (cc.norm() * rs - 1.0).abs() > 1e-9 {
        return Err(Error::NoSolution(
            "no map pairs these circles through the given points".into(),
        ));
    }
    let a = cc * cd;
    let d = -cc * cs;
    let b = (a * d - 1.0) / cc;
    Mobius::new(a, b, cc, d)
}

/// The full Koebe group: amalgamation over `⟨X⟩`, then HNN extensions by `J`
/// and `J'(z) = J(z − 1) + 1`.
pub fn assemble_b() -> Result<KoebeAssembly> {
    let mut asm = build_triangle_pair();
    step(
        &mut asm.log,
        "amalgamate",
        "G' = ⟨X, Y₁⟩ *_⟨X⟩ ⟨X, Y₂⟩ = ⟨X, Y₁, Y₂⟩; X is an accidental parabolic of the four-punctured sphere".into(),
    );

    let b1 = GenCircle::from_center_radius(c(0.0, 0.75), 0.25)?;
    let b2 = GenCircle::from_center_radius(c(0.0, -0.75), 0.25)?;
    let j_float = solve_tangent_pairing(&b1, &b2, c(0.0, 1.0).into(), c(0.0, -1.0).into())?;
    let j = Mat2::snap(&j_float, SNAP_TOL)
        .or_else(|| Mat2::snap(&j_float.neg(), SNAP_TOL))
        .ok_or_else(|| Error::NoSolution(format!("J = {j_float} is not a Gaussian-integer matrix")))?;
    // keep the lift with positive real trace
    let j = if j.trace().re < 0 { j.neg() } else { j };
    step(
        &mut asm.log,
        "HNN extension",
        format!("J pairs the horoballs |z − 3i/4| = 1/4 and |z + 3i/4| = 1/4 with J(i) = −i: J = {j}"),
    );

    let t = Mat2::new(gauss(1, 0), gauss(1, 0), gauss(0, 0), gauss(1, 0));
    let jp = j.conjugated_by(&t);
    step(
        &mut asm.log,
        "HNN extension",
        format!("J'(z) = J(z − 1) + 1: J' = {jp}"),
    );
    asm.j = Some(j);
    asm.jp = Some(jp);
    Ok(asm)
}

impl KoebeAssembly {
    /// The exact generators `X, Y₁, Y₂, J, J'` (if assembled).
    pub fn exact_generators(&self) -> Option<[Mat2<GaussInt>; 5]> {
        Some([
            self.x.clone(),
            self.y1.clone(),
            self.y2.clone(),
            self.j.clone()?,
            self.jp.clone()?,
        ])
    }

    pub fn group(&self) -> Result<MarkedGroup> {
        let gens = self
            .exact_generators()
            .ok_or_else(|| Error::InvalidParameter("assembly has no HNN generators yet".into()))?;
        MarkedGroup::new(B_LABELS.into_iter().zip(gens.iter().map(|m| m.to_mobius())))
    }
}

/// The conjugator normalizing `B` into `𝒢`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub phi: Mobius,
    /// `λ = tr J / 2`.
    #[serde(with = "crate::json::complex")]
    pub lambda: Complex,
    /// The parabolic fixed point sent to ∞.
    pub cusp: RiemannPoint,
    /// `‖ΦJΦ⁻¹ − M(λ)‖` up to sign.
    pub residual: f64,
}

/// Sends `Fix(Y₁X⁻¹)` to ∞ and conjugates `J` to `M(λ) = (λ, λ²−1 | 1, λ)`.
pub fn solve_normalizer(g: &MarkedGroup) -> Result<Normalizer> {
    let get = |l: &str| {
        g.get(l)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("group has no generator {l}")))
    };
    let (x, y1, j) = (get("X")?, get("Y1")?, get("J")?);
    let cusp = match y1.compose(&x.inverse()).fixed_points()? {
        FixedPoints::Single(p) => p,
        FixedPoints::Pair(..) => return Err(Error::InvalidParameter("Y1 X^-1 is not parabolic".into())),
    };
    let lambda = j.trace() / 2.0;
    let (f0, f1) = match j.fixed_points()? {
        FixedPoints::Pair(f0, f1) if (lambda * lambda - 1.0).norm() > 1e-9 => (f0, f1),
        _ => return Err(Error::InvalidParameter("J is parabolic".into())),
    };
    let t = (lambda * lambda - 1.0).sqrt();
    let target = crate::moebius::symmetric_loxodromic(lambda);
    let mut best: Option<Normalizer> = None;
    for (u, v) in [(t, -t), (-t, t)] {
        let phi = Mobius::from_three_points([f0, f1, cusp], [u.into(), v.into(), RiemannPoint::Infinity])?;
        let residual = j.conjugated_by(&phi).projective_distance(&target);
        if best.map_or(true, |b| residual < b.residual) {
            best = Some(Normalizer {
                phi,
                lambda,
                cusp,
                residual,
            });
        }
    }
    let best = best.expect("two candidates tried");
    if best.residual > 1e-8 {
        return Err(Error::NoSolution(format!(
            "no fixed-point assignment conjugates J to M(λ); residual {:.3e}",
            best.residual
        )));
    }
    Ok(best)
}

/// `(P, Q, M, N) = (Y₁X⁻¹, J', J, Y₁)` conjugated by `Φ`.
pub fn conjugated_tuple(g: &MarkedGroup, phi: &Mobius) -> Result<GeneratorTuple> {
    let get = |l: &str| {
        g.get(l)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("group has no generator {l}")))
    };
    let (x, y1, j, jp) = (get("X")?, get("Y1")?, get("J")?, get("J'")?);
    Ok(GeneratorTuple::from_array(
        [y1.compose(&x.inverse()), jp, j, y1].map(|m| m.conjugated_by(phi).normalize()),
    ))
}

/// Parameters read off a normalized tuple, with residuals against the
/// elimination formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GParamsRecord {
    pub point: GPoint,
    #[serde(with = "crate::json::complex")]
    pub rho: Complex,
    #[serde(with = "crate::json::complex")]
    pub r: Complex,
    #[serde(with = "crate::json::complex")]
    pub b: Complex,
    #[serde(with = "crate::json::complex")]
    pub s: Complex,
    /// Max deviation of the read `ρ, r, b, s` from the derived values.
    pub residual: f64,
}

/// Reads `α` from `P`, `ρ, β, σ` from `Q`, `λ` from `M`, `r, b, s` from `N`,
/// choosing SL(2,ℂ) signs and the `√κ` branch that best fit the formulas.
pub fn g_parameters_of(t: &GeneratorTuple) -> Result<GParamsRecord> {
    const TOL: f64 = 1e-8;
    let not_normalized = |what: &str| Error::InvalidParameter(format!("tuple is not normalized: {what}"));
    let p = t.p.normalize();
    if p.c.norm() > TOL || (p.a - p.d).norm() > TOL || (p.a.norm() - 1.0).abs() > TOL {
        return Err(not_normalized("P must be ±(−1, α | 0, −1)"));
    }
    let alpha = p.b * (-1.0 / p.a);
    let m = t.m.normalize();
    if (m.c.norm() - 1.0).abs() > TOL {
        return Err(not_normalized("M must have lower-left entry ±1"));
    }
    let m = if m.c.re < 0.0 { m.neg() } else { m };
    let lambda = m.a;
    if (m.c - 1.0).norm() > TOL
        || (m.d - lambda).norm() > TOL
        || (m.b - (lambda * lambda - 1.0)).norm() > 1e-7 * lambda.norm_sqr().max(1.0)
    {
        return Err(not_normalized("M must be (λ, λ²−1 | 1, λ)"));
    }
    let mut best: Option<GParamsRecord> = None;
    for q in [t.q.normalize(), t.q.normalize().neg()] {
        for n in [t.n.normalize(), t.n.normalize().neg()] {
            for br in Branch::both() {
                let point = GPoint::new(alpha, q.b, q.c, lambda).with_branch(br);
                let Ok(d) = derive_g_params(&point) else { continue };
                let residual = [(d.rho, q.a), (d.r, n.a), (d.b, n.b), (d.s, n.c)]
                    .iter()
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                if best.map_or(true, |b| residual < b.residual) {
                    best = Some(GParamsRecord {
                        point,
                        rho: q.a,
                        r: n.a,
                        b: n.b,
                        s: n.c,
                        residual,
                    });
                }
            }
        }
    }
    best.ok_or_else(|| Error::NoSolution("every sign and branch choice is singular".into()))
}

/// One sign choice for the radicals in the closed-form conjugator
/// `(1/√17)(4√(−1+4i), √(8+2i) | −√(−2−i), −√(1−4i))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrintedCandidate {
    /// Sign applied to each principal square root, in entry order.
    pub signs: [i8; 4],
    pub phi: Mobius,
    /// `|det|`; 1 for a valid normalizer.
    pub det_modulus: f64,
    /// `|c·z₀ + d|` at the cusp `z₀ = 1+i`; 0 exactly when `z₀ ↦ ∞`.
    pub cusp_denominator: f64,
    /// Projective distance to the solved normalizer.
    pub distance_to_solved: f64,
}

/// All 16 sign choices of the closed-form conjugator, checked against the
/// defining conditions.
pub fn printed_conjugator_candidates(solved: &Mobius) -> Vec<PrintedCandidate> {
    let roots = [
        c(-1.0, 4.0).sqrt() * 4.0,
        c(8.0, 2.0).sqrt(),
        -c(-2.0, -1.0).sqrt(),
        -c(1.0, -4.0).sqrt(),
    ];
    let scale = 17f64.sqrt().recip();
    let cusp = c(1.0, 1.0);
    let mut out = Vec::with_capacity(16);
    for mask in 0u8..16 {
        let signs: [i8; 4] = std::array::from_fn(|k| if mask >> (3 - k) & 1 == 1 { -1 } else { 1 });
        let e: [Complex; 4] = std::array::from_fn(|k| roots[k] * scale * f64::from(signs[k]));
        let phi = Mobius::raw(e[0], e[1], e[2], e[3]);
        let det_modulus = phi.det().norm();
        out.push(PrintedCandidate {
            signs,
            phi,
            det_modulus,
            cusp_denominator: (phi.c * cusp + phi.d).norm(),
            distance_to_solved: phi.normalize().projective_distance(solved),
        });
    }
    out
}

/// Everything the construction produces, in a serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoebeReport {
    pub schema_version: u32,
    pub generators: Vec<(String, Mobius)>,
    pub exact: Vec<(String, String)>,
    pub provenance: Vec<ProvenanceStep>,
    pub normalizer: Normalizer,
    pub conjugated: GeneratorTuple,
    pub parameters: GParamsRecord,
    pub printed_conjugator: Vec<PrintedCandidate>,
}

pub fn koebe_report() -> Result<KoebeReport> {
    let asm = assemble_b()?;
    let group = asm.group()?;
    let normalizer = solve_normalizer(&group)?;
    let conjugated = conjugated_tuple(&group, &normalizer.phi)?;
    let parameters = g_parameters_of(&conjugated)?;
    let exact = asm.exact_generators().expect("assembled");
    Ok(KoebeReport {
        schema_version: crate::json::SCHEMA_VERSION,
        generators: group.generators().iter().map(|g| (g.label.clone(), g.map)).collect(),
        exact: B_LABELS
            .iter()
            .zip(exact.iter())
            .map(|(l, m)| (l.to_string(), m.to_string()))
            .collect(),
        provenance: asm.log,
        normalizer,
        conjugated,
        parameters,
        printed_conjugator: printed_conjugator_candidates(&normalizer.phi),
    })
}

/// The normalized Koebe group as a `𝒢` tuple.
pub fn koebe_tuple() -> Result<GeneratorTuple> {
    let group = assemble_b()?.group()?;
    let n = solve_normalizer(&group)?;
    conjugated_tuple(&group, &n.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::inversive_product;
    use crate::moebius::re;
    use crate::varieties::build_g_generators;
    use num_traits::One;

    fn g(re: i64, im: i64) -> GaussInt {
        gauss(re, im)
    }

    #[test]
    fn triangle_pair() {
        let a = build_triangle_pair();
        assert_eq!(a.y1, Mat2::new(g(1, 2), g(2, 0), g(2, 0), g(1, -2)));
        assert_eq!(a.y2, Mat2::new(g(1, -2), g(2, 0), g(2, 0), g(1, 2)));
        assert_eq!(a.y2, a.y1.conj_entries());
        assert_eq!(a.y1.trace(), g(2, 0));
        assert_eq!(a.y1, a.y.conjugated_by(&a.phi1));
    }

    #[test]
    fn tangent_pairing_examples() {
        let b1 = GenCircle::from_center_radius(c(0.0, 0.75), 0.25).unwrap();
        let b2 = GenCircle::from_center_radius(c(0.0, -0.75), 0.25).unwrap();
        let j = solve_tangent_pairing(&b1, &b2, c(0.0, 1.0).into(), c(0.0, -1.0).into()).unwrap();
        let want = Mobius::new(re(3.0), c(0.0, -2.0), c(0.0, 4.0), re(3.0)).unwrap();
        assert!(j.projective_distance(&want) < 1e-12, "{j}");

        let sh = Mobius::translation(re(1.0));
        let jp = solve_tangent_pairing(
            &b1.mobius_image(&sh),
            &b2.mobius_image(&sh),
            c(1.0, 1.0).into(),
            c(1.0, -1.0).into(),
        )
        .unwrap();
        let want = Mobius::new(c(3.0, 4.0), c(0.0, -6.0), c(0.0, 4.0), c(3.0, -4.0)).unwrap();
        assert!(jp.projective_distance(&want) < 1e-12, "{jp}");

        let (i1, i2) = j.isometric_circles().unwrap();
        assert!(i1.approx_eq(&b1, 1e-12) && i2.approx_eq(&b2, 1e-12));
    }

    #[test]
    fn tangent_pairing_rejects_bad_data() {
        let b1 = GenCircle::from_center_radius(c(0.0, 0.75), 0.25).unwrap();
        let big = GenCircle::from_center_radius(c(0.0, -0.75), 0.5).unwrap();
        assert!(solve_tangent_pairing(&b1, &big, c(0.0, 1.0).into(), c(0.0, -1.25).into()).is_err());
        let b2 = GenCircle::from_center_radius(c(0.0, -0.75), 0.25).unwrap();
        assert!(solve_tangent_pairing(&b1, &b2, c(0.0, 2.0).into(), c(0.0, -1.0).into()).is_err());
    }

    #[test]
    fn assembly_is_exact() {
        let a = assemble_b().unwrap();
        let gens = a.exact_generators().unwrap();
        let want = [
            Mat2::new(g(1, 0), g(2, 0), g(0, 0), g(1, 0)),
            Mat2::new(g(1, 2), g(2, 0), g(2, 0), g(1, -2)),
            Mat2::new(g(1, -2), g(2, 0), g(2, 0), g(1, 2)),
            Mat2::new(g(3, 0), g(0, -2), g(0, 4), g(3, 0)),
            Mat2::new(g(3, 4), g(0, -6), g(0, 4), g(3, -4)),
        ];
        assert_eq!(gens, want);
        for m in &gens {
            assert!(m.det().is_one());
        }
        assert!(a.log.len() >= 5);
        assert!(a.log.iter().any(|s| s.step == "amalgamate"));
        assert_eq!(a.log.iter().filter(|s| s.step == "HNN extension").count(), 2);
    }

    #[test]
    fn j_prime_is_shifted_j() {
        let grp = assemble_b().unwrap().group().unwrap();
        let (j, jp) = (grp.get("J").unwrap(), grp.get("J'").unwrap());
        for z in [c(0.3, -0.2), c(2.0, 5.0), c(-1.5, 0.25)] {
            let lhs = jp.apply_finite(z).unwrap();
            let rhs = j.apply_finite(z - 1.0).unwrap() + 1.0;
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    fn normalized_koebe_matrices() -> GeneratorTuple {
        GeneratorTuple::from_array([
            Mobius::new(re(1.0), c(-16.0, 4.0), re(0.0), re(1.0)).unwrap(),
            Mobius::new(c(-5.0, 20.0), c(552.0, -32.0), c(-1.0, 4.0), c(107.0, -20.0)).unwrap(),
            Mobius::new(re(3.0), re(8.0), re(1.0), re(3.0)).unwrap(),
            Mobius::new(c(31.0, 12.0), c(32.0, 76.0), c(-4.0, -1.0), c(3.0, -12.0)).unwrap(),
        ])
    }

    #[test]
    fn normalizer_conditions() {
        let grp = assemble_b().unwrap().group().unwrap();
        let n = solve_normalizer(&grp).unwrap();
        assert!(n.cusp.chordal_distance(&c(1.0, 1.0).into()) < 1e-12);
        assert!(
            n.phi.apply(c(1.0, 1.0).into()).is_infinite()
                || n.phi
                    .apply(c(1.0, 1.0).into())
                    .chordal_distance(&RiemannPoint::Infinity)
                    < 1e-9
        );
        let m = grp.get("J").unwrap().conjugated_by(&n.phi);
        assert!(m.projective_distance(&Mobius::new(re(3.0), re(8.0), re(1.0), re(3.0)).unwrap()) < 1e-10);
        let t = conjugated_tuple(&grp, &n.phi).unwrap();
        assert!(t.projective_distance(&normalized_koebe_matrices()) < 1e-10);
    }

    #[test]
    fn pairing_is_conjugation_covariant() {
        let grp = assemble_b().unwrap().group().unwrap();
        let phi = solve_normalizer(&grp).unwrap().phi;
        let j = *grp.get("J").unwrap();
        let m = j.conjugated_by(&phi);
        let (ij, ij_inv) = j.isometric_circles().unwrap();
        let (src, dst) = (ij.mobius_image(&phi), ij_inv.mobius_image(&phi));
        assert!(src.mobius_image(&m).approx_eq(&dst, 1e-9));
        let before = inversive_product(&ij, &ij_inv).unwrap();
        let after = inversive_product(&src, &dst).unwrap();
        assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn parameters_of_koebe_tuple() {
        let t = koebe_tuple().unwrap();
        let rec = g_parameters_of(&t).unwrap();
        let close = |a: Complex, b: Complex| (a - b).norm() < 1e-10;
        assert!(close(rec.point.alpha, c(16.0, -4.0)));
        assert!(close(rec.point.beta, c(552.0 / 17.0, -32.0 / 17.0)));
        assert!(close(rec.point.sigma, c(-1.0 / 17.0, 4.0 / 17.0)));
        assert!(close(rec.point.lambda, re(3.0)));
        assert!(close(rec.rho, c(-5.0 / 17.0, 20.0 / 17.0)));
        assert!(close(rec.s, c(-4.0 / 17.0, -1.0 / 17.0)));
        assert!(rec.residual < 1e-10);
        let back = build_g_generators(&rec.point).unwrap();
        assert!(back.projective_distance(&t) < 1e-10);
    }

    #[test]
    fn non_normalized_tuples_are_rejected() {
        let mut t = normalized_koebe_matrices();
        t.p = t.m;
        assert!(g_parameters_of(&t).is_err());
    }

    #[test]
    fn printed_conjugator_never_normalizes() {
        let grp = assemble_b().unwrap().group().unwrap();
        let phi = solve_normalizer(&grp).unwrap().phi;
        let cands = printed_conjugator_candidates(&phi);
        assert_eq!(cands.len(), 16);
        for cand in &cands {
            assert!((cand.det_modulus - 1.0).abs() > 0.02, "{cand:?}");
            assert!(cand.cusp_denominator > 0.05, "{cand:?}");
        }
    }

    #[test]
    fn report_serializes() {
        let r = koebe_report().unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: KoebeReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.exact, r.exact);
        assert_eq!(r.exact[3].1, "(3, -2i | 4i, 3)");
    }
}
