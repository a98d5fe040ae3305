//! Explicit parameter spaces for genus-2 representations.
//!
//! * `𝒢`: four-parameter family `(α, β, σ, λ)` of genus-2 surface groups
//!   `⟨P, Q, M, N⟩` with `[P,Q][M,N] = ±I`, `P` parabolic and `P⁻¹N` parabolic.
//! * `𝒞ℬ`: the compression-body normalization `P, Q` parabolic at ∞ and
//!   `M = (λ, λ²−1 | 1, λ)`.
//! * `𝔽`: the three-parameter subfamily where also `N` is parabolic.
//!
//! Every formula is written once over a generic field so that the same code
//! runs in `f64` and in exact Gaussian-rational arithmetic.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{lit, GaussRational, Mat2};
use crate::group::MarkedGroup;
use crate::json;
use crate::moebius::{Complex, Mobius};

/// Denominators smaller than this in modulus are treated as zero.
pub const SINGULAR_TOL: f64 = 1e-6;

/// Which square root of `κ` to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// The principal square root.
    #[default]
    Principal,
    /// Minus the principal square root.
    Negated,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Principal => 1.0,
            Branch::Negated => -1.0,
        }
    }

    pub fn both() -> [Branch; 2] {
        [Branch::Principal, Branch::Negated]
    }
}

/// A point of `𝒢`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPoint {
    #[serde(with = "json::complex")]
    pub alpha: Complex,
    #[serde(with = "json::complex")]
    pub beta: Complex,
    #[serde(with = "json::complex")]
    pub sigma: Complex,
    #[serde(with = "json::complex")]
    pub lambda: Complex,
    #[serde(default)]
    pub branch: Branch,
}

impl GPoint {
    pub fn new(alpha: Complex, beta: Complex, sigma: Complex, lambda: Complex) -> Self {
        GPoint {
            alpha,
            beta,
            sigma,
            lambda,
            branch: Branch::Principal,
        }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }
}

/// The quantities eliminated from `𝒢`, plus the auxiliaries used to write them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GDerived<T = Complex> {
    pub kappa: T,
    pub xi: T,
    pub zeta: T,
    pub sqrt_kappa: T,
    pub b: T,
    pub s: T,
    pub r: T,
    pub rho: T,
}

/// `κ = 4 − 4σ² + α²σ² − 4αλσ² + 4λ²σ²`.
pub fn kappa<T: Clone + Num>(alpha: &T, sigma: &T, lambda: &T) -> T {
    let n = lit::<T>;
    let (a, s, l) = (alpha.clone(), sigma.clone(), lambda.clone());
    let s2 = s.clone() * s;
    n(4) - n(4) * s2.clone() + a.clone() * a.clone() * s2.clone() - n(4) * a * l.clone() * s2.clone()
        + n(4) * l.clone() * l * s2
}

/// The elimination formulas for `b, s, r, ρ` given a chosen root `√κ`.
///
/// `is_zero` decides when a denominator counts as vanishing.
pub fn derive_g_with_root<T: Clone + Num>(
    alpha: &T,
    sigma: &T,
    lambda: &T,
    sqrt_kappa: T,
    is_zero: impl Fn(&T) -> bool,
) -> Result<GDerived<T>> {
    let n = lit::<T>;
    let (a, s, l) = (alpha.clone(), sigma.clone(), lambda.clone());
    let sk = sqrt_kappa;
    let a2 = a.clone() * a.clone();
    let a3 = a2.clone() * a.clone();
    let s2 = s.clone() * s.clone();
    let s3 = s2.clone() * s.clone();
    let l2 = l.clone() * l.clone();
    let l3 = l2.clone() * l.clone();
    let l4 = l2.clone() * l2.clone();

    let kappa = kappa(&a, &s, &l);
    let xi = n(4) + a2.clone() - n(4) * l2.clone()
        + n(4) * a.clone() * s.clone()
        + n(2) * a2.clone() * l.clone() * s.clone()
        - n(4) * a.clone() * l2.clone() * s.clone()
        + a2.clone() * s2.clone();
    let zeta = n(2) - n(2) * l2.clone() + n(2) * a.clone() * s.clone() + a2.clone() * l.clone() * s.clone()
        - n(2) * a.clone() * l2.clone() * s.clone();
    if is_zero(&xi) {
        return Err(Error::SingularParameter("xi = 0"));
    }

    let b_num = sk.clone()
        * (n(1) - l2.clone() + a.clone() * s.clone() - l.clone() * s.clone() - a.clone() * l2.clone() * s.clone()
            + l3.clone() * s.clone())
        + zeta.clone()
        + n(2) * s.clone() * l.clone() * (n(1) - l2.clone())
        + s2.clone()
            * (n(2) + a2.clone() + n(3) * a.clone() * l.clone() + (a2.clone() - n(4)) * l2.clone()
                - n(3) * a.clone() * l3.clone()
                + n(2) * l4)
        + a.clone() * s3.clone() * (n(1) + a.clone() * l.clone() - l2.clone());
    let b = a.clone() * b_num / xi.clone();

    let s_num = a.clone() * sk.clone() * (n(0) - n(1) - l.clone() * s.clone())
        + a.clone()
            * (n(0) - n(2) - n(2) * l.clone() * s.clone() + n(2) * s2.clone() + a.clone() * l.clone() * s2.clone()
                - n(2) * l2.clone() * s2.clone()
                + a.clone() * s3.clone());
    let s_out = s_num / xi.clone();

    let r_num = sk.clone()
        * (n(0) - a2.clone() + n(2) * a.clone() * s.clone() - n(2) * a.clone() * l2.clone() * s.clone()
            + a2.clone() * s2.clone())
        + n(4) * zeta.clone()
        - a3.clone() * s.clone()
        + n(2) * a.clone() * s2 * (a.clone() + n(2) * l.clone() + a.clone() * l2 - n(2) * l3)
        + a3 * s3;
    let r = n(0) - r_num / (n(2) * xi.clone());

    let rho = (a * s - sk.clone()) / n(2);
    if is_zero(&rho) {
        return Err(Error::SingularParameter("rho = 0"));
    }
    if is_zero(&r) {
        return Err(Error::SingularParameter("r = 0"));
    }
    Ok(GDerived {
        kappa,
        xi,
        zeta,
        sqrt_kappa: sk,
        b,
        s: s_out,
        r,
        rho,
    })
}

fn small(z: &Complex) -> bool {
    z.norm() < SINGULAR_TOL
}

/// Derived parameters of a `𝒢` point in floating point.
pub fn derive_g_params(p: &GPoint) -> Result<GDerived> {
    let k = kappa(&p.alpha, &p.sigma, &p.lambda);
    let root = k.sqrt() * p.branch.sign();
    derive_g_with_root(&p.alpha, &p.sigma, &p.lambda, root, small)
}

/// `P, Q, M, N` as matrices over any field.
pub fn g_matrices<T: Clone + Num>(alpha: &T, beta: &T, sigma: &T, lambda: &T, d: &GDerived<T>) -> [Mat2<T>; 4] {
    let n = lit::<T>;
    let p = Mat2::new(n(-1), alpha.clone(), n(0), n(-1));
    let q = Mat2::new(
        d.rho.clone(),
        beta.clone(),
        sigma.clone(),
        (n(1) + beta.clone() * sigma.clone()) / d.rho.clone(),
    );
    let m = m_matrix(lambda);
    let nn = Mat2::new(
        d.r.clone(),
        d.b.clone(),
        d.s.clone(),
        (n(1) + d.b.clone() * d.s.clone()) / d.r.clone(),
    );
    [p, q, m, nn]
}

/// `M = (λ, λ²−1 | 1, λ)`.
pub fn m_matrix<T: Clone + Num>(lambda: &T) -> Mat2<T> {
    let l = lambda.clone();
    Mat2::new(l.clone(), l.clone() * l.clone() - T::one(), T::one(), l)
}

/// Marked generators `(P, Q, M, N)` of a genus-2 surface group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTuple {
    pub p: Mobius,
    pub q: Mobius,
    pub m: Mobius,
    pub n: Mobius,
}

pub const TUPLE_LABELS: [&str; 4] = ["P", "Q", "M", "N"];

/// How far a tuple is from satisfying the defining conditions of `𝒢`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TupleDefects {
    pub relator: f64,
    /// `||tr P| − 2|`
    pub trace_p: f64,
    /// `||tr P⁻¹N| − 2|`
    pub trace_p_inv_n: f64,
    /// `||tr N| − 2|`, only a condition on `𝔽`.
    pub trace_n: f64,
}

impl TupleDefects {
    /// Largest of the `𝒢` conditions.
    pub fn max_g(&self) -> f64 {
        self.relator.max(self.trace_p).max(self.trace_p_inv_n)
    }
}

impl GeneratorTuple {
    pub fn from_array([p, q, m, n]: [Mobius; 4]) -> Self {
        GeneratorTuple { p, q, m, n }
    }

    pub fn to_array(&self) -> [Mobius; 4] {
        [self.p, self.q, self.m, self.n]
    }

    pub fn to_group(&self) -> MarkedGroup {
        MarkedGroup::new(TUPLE_LABELS.into_iter().zip(self.to_array())).expect("labels are distinct")
    }

    pub fn from_group(g: &MarkedGroup) -> Result<Self> {
        let get = |l: &str| {
            g.get(l)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("group has no generator {l}")))
        };
        Ok(GeneratorTuple {
            p: get("P")?,
            q: get("Q")?,
            m: get("M")?,
            n: get("N")?,
        })
    }

    pub fn defects(&self) -> TupleDefects {
        let tr2 = |m: &Mobius| (m.normalize().trace().norm() - 2.0).abs();
        TupleDefects {
            relator: relator_defect(self),
            trace_p: tr2(&self.p),
            trace_p_inv_n: tr2(&self.p.inverse().compose(&self.n)),
            trace_n: tr2(&self.n),
        }
    }

    /// Projective max-entry distance, generator by generator.
    pub fn projective_distance(&self, other: &GeneratorTuple) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array().iter())
            .map(|(a, b)| a.projective_distance(b))
            .fold(0.0, f64::max)
    }
}

/// `min(‖[P,Q][M,N] − I‖, ‖[P,Q][M,N] + I‖)` in the max-entry norm.
pub fn relator_defect(t: &GeneratorTuple) -> f64 {
    let comm = |x: &Mobius, y: &Mobius| x.compose(y).compose(&x.inverse()).compose(&y.inverse());
    let w = comm(&t.p, &t.q).compose(&comm(&t.m, &t.n));
    w.identity_defect()
}

fn to_tuple(ms: [Mat2<Complex>; 4]) -> GeneratorTuple {
    GeneratorTuple::from_array(ms.map(|m| Mobius::raw(m.a, m.b, m.c, m.d).normalize()))
}

/// The generators at a point of `𝒢`.
pub fn build_g_generators(p: &GPoint) -> Result<GeneratorTuple> {
    let d = derive_g_params(p)?;
    Ok(to_tuple(g_matrices(&p.alpha, &p.beta, &p.sigma, &p.lambda, &d)))
}

/// Exact `𝒢` tuple over Gaussian rationals, given an exact square root of `κ`.
pub fn build_g_exact(
    alpha: &GaussRational,
    beta: &GaussRational,
    sigma: &GaussRational,
    lambda: &GaussRational,
    sqrt_kappa: GaussRational,
) -> Result<(GDerived<GaussRational>, [Mat2<GaussRational>; 4])> {
    let k = kappa(alpha, sigma, lambda);
    if sqrt_kappa.clone() * sqrt_kappa.clone() != k {
        return Err(Error::InvalidParameter("supplied root does not square to kappa".into()));
    }
    let d = derive_g_with_root(alpha, sigma, lambda, sqrt_kappa, |z| z.re == lit(0) && z.im == lit(0))?;
    let ms = g_matrices(alpha, beta, sigma, lambda, &d);
    Ok((d, ms))
}

/// `[P,Q][M,N]` computed exactly.
pub fn exact_relator<T: Clone + Num>(ms: &[Mat2<T>; 4]) -> Mat2<T> {
    Mat2::commutator(&ms[0], &ms[1]).mul(&Mat2::commutator(&ms[2], &ms[3]))
}

/// The compression-body normalization `P = (1,α|0,1)`, `Q = (1,β|0,1)`,
/// `M = (λ, λ²−1 | 1, λ)`.
pub fn build_cb_generators(alpha: Complex, beta: Complex, lambda: Complex) -> Result<[Mobius; 3]> {
    if (lambda * lambda - 1.0).norm() < SINGULAR_TOL {
        return Err(Error::SingularParameter("lambda^2 = 1 makes M parabolic"));
    }
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let m = m_matrix(&lambda);
    Ok([
        Mobius::raw(one, alpha, zero, one),
        Mobius::raw(one, beta, zero, one),
        Mobius::raw(m.a, m.b, m.c, m.d),
    ])
}

/// The compression-body group as a marked group with labels `P, Q, M`.
pub fn cb_group(alpha: Complex, beta: Complex, lambda: Complex) -> Result<MarkedGroup> {
    let [p, q, m] = build_cb_generators(alpha, beta, lambda)?;
    MarkedGroup::new([("P", p), ("Q", q), ("M", m)])
}

/// `ρ, λ, r, b, s` on `𝔽` as functions of `(α, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FDerived<T = Complex> {
    pub rho: T,
    pub lambda: T,
    pub r: T,
    pub b: T,
    pub s: T,
}

/// The `𝔽` formulas over any field.
pub fn derive_f_with<T: Clone + Num>(alpha: &T, sigma: &T, is_zero: impl Fn(&T) -> bool) -> Result<FDerived<T>> {
    let n = lit::<T>;
    let (a, s) = (alpha.clone(), sigma.clone());
    if is_zero(&a) {
        return Err(Error::SingularParameter("alpha = 0"));
    }
    let as_ = a.clone() * s.clone();
    let two_as = n(2) + as_.clone();
    let den = n(8) + n(4) * as_.clone();
    if is_zero(&two_as) || is_zero(&den) {
        return Err(Error::SingularParameter("2 + alpha sigma = 0"));
    }
    let inner = n(0) - n(4) + a.clone() - a.clone() * s.clone();
    let rho = (n(0) - n(8) + a.clone() * s.clone() * s.clone() * inner.clone()) / den.clone();
    let lambda = (n(0) - n(8) + as_.clone() * inner) / den;
    let r = (n(2) + n(4) * s.clone() + as_.clone() * (n(2) + s.clone())) / two_as.clone();
    let sq = n(4) + a.clone() + as_.clone();
    let b = a.clone() * s.clone() * s * sq.clone() * sq / (n(4) * two_as.clone() * two_as);
    let s_out = n(0) - n(4) / a;
    if is_zero(&rho) {
        return Err(Error::SingularParameter("rho = 0"));
    }
    if is_zero(&r) {
        return Err(Error::SingularParameter("r = 0"));
    }
    Ok(FDerived {
        rho,
        lambda,
        r,
        b,
        s: s_out,
    })
}

pub fn derive_f_params(alpha: Complex, sigma: Complex) -> Result<FDerived> {
    derive_f_with(&alpha, &sigma, small)
}

/// `P, Q, M, N` on `𝔽` over any field.
pub fn f_matrices<T: Clone + Num>(alpha: &T, beta: &T, sigma: &T, f: &FDerived<T>) -> [Mat2<T>; 4] {
    let n = lit::<T>;
    [
        Mat2::new(n(-1), alpha.clone(), n(0), n(-1)),
        Mat2::new(
            f.rho.clone(),
            beta.clone(),
            sigma.clone(),
            (n(1) + beta.clone() * sigma.clone()) / f.rho.clone(),
        ),
        m_matrix(&f.lambda),
        Mat2::new(
            f.r.clone(),
            f.b.clone(),
            f.s.clone(),
            (n(1) + f.b.clone() * f.s.clone()) / f.r.clone(),
        ),
    ]
}

pub fn build_f_generators(alpha: Complex, beta: Complex, sigma: Complex) -> Result<GeneratorTuple> {
    let f = derive_f_params(alpha, sigma)?;
    Ok(to_tuple(f_matrices(&alpha, &beta, &sigma, &f)))
}

pub fn build_f_exact(
    alpha: &GaussRational,
    beta: &GaussRational,
    sigma: &GaussRational,
) -> Result<(FDerived<GaussRational>, [Mat2<GaussRational>; 4])> {
    let f = derive_f_with(alpha, sigma, |z| z.re == lit(0) && z.im == lit(0))?;
    let ms = f_matrices(alpha, beta, sigma, &f);
    Ok((f, ms))
}
