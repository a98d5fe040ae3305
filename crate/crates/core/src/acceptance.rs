//! The acceptance suite: each criterion runs its checks, times itself and
//! reports every measured quantity next to its tolerance.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::deform::{self, fraction_grid, jprime_trace_limits, state, validate, x_map, DegeneracyFlag};
use crate::error::Result;
use crate::exact::{gauss, gq, Mat2};
use crate::json::SCHEMA_VERSION;
use crate::koebe::{assemble_b, conjugated_tuple, g_parameters_of, solve_normalizer, solve_tangent_pairing};
use crate::limitset::{invariance_defect, limit_set, ExplorationPolicy};
use crate::moebius::{Complex, Mobius};
use crate::render::{frame_policy, render_cloud_png, render_frames, Overlay, ViewSpec};
use crate::triangle::interior_angle;
use crate::varieties::{build_g_generators, cb_group, derive_f_with, derive_g_params, Branch, GPoint, GeneratorTuple};

/// Seed of the random `𝒢` sample.
pub const SAMPLE_SEED: u64 = 0xa2;

/// Parameters of the cusped compression-body example.
pub const CB_EXAMPLE_ALPHA: Complex = Complex::new(2.5, 0.2);
pub const CB_EXAMPLE_BETA: Complex = Complex::new(0.5, 4.2);
pub const CB_EXAMPLE_LAMBDA: Complex = Complex::new(0.09, 0.85);

/// One measured quantity. `bound` is an upper bound unless `lower` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    #[serde(default)]
    pub lower: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl Criterion {
    /// One-line summary, `PASS A1 ...` or `FAIL A1 ...`.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        let failing: Vec<&str> = self
            .measurements
            .iter()
            .filter(|m| !m.passed)
            .map(|m| m.name.as_str())
            .collect();
        let mut s = format!(
            "{tag} {} {} ({:.2}s / {}s)",
            self.id, self.title, self.elapsed_s, self.budget_s
        );
        if !failing.is_empty() {
            s += &format!(" failing: {}", failing.join(", "));
        }
        if let Some(e) = &self.error {
            s += &format!(" error: {e}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub schema: u32,
    pub passed: bool,
    pub criteria: Vec<Criterion>,
}

impl AcceptanceReport {
    pub fn criterion(&self, id: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.id == id)
    }
}

/// Where the figure criterion writes its images.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceOptions {
    pub out_dir: PathBuf,
}

#[derive(Default)]
struct Sheet {
    measurements: Vec<Measurement>,
    notes: Vec<String>,
}

impl Sheet {
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            bound,
            lower: false,
            passed: value <= bound,
        });
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.measurements.push(Measurement {
            name: name.into(),
            value,
            bound,
            lower: true,
            passed: value >= bound,
        });
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.at_least(name, f64::from(u8::from(ok)), 1.0);
    }

    fn note(&mut self, s: String) {
        self.notes.push(s);
    }
}

fn run(id: &str, title: &str, budget_s: f64, body: impl FnOnce(&mut Sheet) -> Result<()>) -> Criterion {
    let start = Instant::now();
    let mut sheet = Sheet::default();
    let error = body(&mut sheet).err().map(|e| e.to_string());
    let elapsed_s = start.elapsed().as_secs_f64();
    let passed = error.is_none()
        && !sheet.measurements.is_empty()
        && sheet.measurements.iter().all(|m| m.passed)
        && elapsed_s < budget_s;
    Criterion {
        id: id.into(),
        title: title.into(),
        passed,
        elapsed_s,
        budget_s,
        measurements: sheet.measurements,
        notes: sheet.notes,
        error,
    }
}

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// `𝔽` parameters at the normalized Koebe point, exactly and in floating point.
pub fn a1_f_derivation() -> Criterion {
    run("A1", "F-slice parameter derivation", 1.0, |s| {
        let f = crate::varieties::derive_f_params(c(16.0, -4.0), c(-1.0, 4.0) / 17.0)?;
        let want = [
            ("rho", f.rho, c(-5.0, 20.0) / 17.0),
            ("lambda", f.lambda, c(3.0, 0.0)),
            ("r", f.r, c(31.0, 12.0) / 17.0),
            ("b", f.b, c(32.0, 76.0) / 17.0),
            ("s", f.s, c(-4.0, -1.0) / 17.0),
        ];
        for (name, got, want) in want {
            s.at_most(name, (got - want).norm(), 1e-12);
        }
        let e = derive_f_with(&gq(16, -4, 1), &gq(-1, 4, 17), num_traits::Zero::is_zero)?;
        s.holds(
            "exact rational values",
            e.rho == gq(-5, 20, 17)
                && e.lambda == gq(3, 0, 1)
                && e.r == gq(31, 12, 17)
                && e.b == gq(32, 76, 17)
                && e.s == gq(-4, -1, 17),
        );
        Ok(())
    })
}

/// Uniform sample of the disc `|z| ≤ r`.
fn disc(rng: &mut ChaCha8Rng, r: f64) -> Complex {
    loop {
        let z = c(rng.gen_range(-r..=r), rng.gen_range(-r..=r));
        if z.norm() <= r {
            return z;
        }
    }
}

/// Relator and trace conditions at random admissible points of `𝒢`.
pub fn a2_relator_property() -> Criterion {
    run("A2", "relator property on random G points", 10.0, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        let (mut relator, mut trace_p, mut trace_pn) = (0.0f64, 0.0f64, 0.0f64);
        let (mut accepted, mut drawn) = (0usize, 0usize);
        while accepted < 200 && drawn < 100_000 {
            drawn += 1;
            let branch = if accepted % 2 == 0 {
                Branch::Principal
            } else {
                Branch::Negated
            };
            let p = GPoint::new(
                disc(&mut rng, 2.0),
                disc(&mut rng, 2.0),
                disc(&mut rng, 2.0),
                disc(&mut rng, 2.0),
            )
            .with_branch(branch);
            let Ok(d) = derive_g_params(&p) else { continue };
            if d.xi.norm() <= 1e-3 || d.rho.norm() <= 1e-3 || d.r.norm() <= 1e-3 {
                continue;
            }
            let def = build_g_generators(&p)?.defects();
            relator = relator.max(def.relator);
            trace_p = trace_p.max(def.trace_p);
            trace_pn = trace_pn.max(def.trace_p_inv_n);
            accepted += 1;
        }
        s.at_least("admissible points", accepted as f64, 200.0);
        s.at_most("max relator defect", relator, 1e-8);
        s.at_most("max ||tr P| - 2|", trace_p, 1e-8);
        s.at_most("max ||tr P^-1 N| - 2|", trace_pn, 1e-8);
        s.note(format!("{drawn} draws for {accepted} admissible points"));
        Ok(())
    })
}

/// The Koebe group in exact arithmetic, and `J` from its circle data.
pub fn a3_koebe_exactness() -> Criterion {
    run("A3", "Koebe assembly exactness", 1.0, |s| {
        let g = |re, im| gauss(re, im);
        let want = [
            Mat2::new(g(1, 0), g(2, 0), g(0, 0), g(1, 0)),
            Mat2::new(g(1, 2), g(2, 0), g(2, 0), g(1, -2)),
            Mat2::new(g(1, -2), g(2, 0), g(2, 0), g(1, 2)),
            Mat2::new(g(3, 0), g(0, -2), g(0, 4), g(3, 0)),
            Mat2::new(g(3, 4), g(0, -6), g(0, 4), g(3, -4)),
        ];
        let asm = assemble_b()?;
        let gens = asm.exact_generators();
        s.holds("X, Y1, Y2, J, J' exact", gens.as_ref() == Some(&want));
        let b1 = crate::circle::GenCircle::from_center_radius(c(0.0, 0.75), 0.25)?;
        let b2 = crate::circle::GenCircle::from_center_radius(c(0.0, -0.75), 0.25)?;
        let j = solve_tangent_pairing(&b1, &b2, c(0.0, 1.0).into(), c(0.0, -1.0).into())?;
        s.at_most(
            "tangent pairing vs J",
            j.projective_distance(&want[3].to_mobius()),
            1e-12,
        );
        Ok(())
    })
}

/// The normalizer of the Koebe group and the parameters it produces.
pub fn a4_normalizer() -> Criterion {
    run("A4", "normalizer and parameter table", 1.0, |s| {
        let group = assemble_b()?.group()?;
        let n = solve_normalizer(&group)?;
        let t = conjugated_tuple(&group, &n.phi)?;
        let want = GeneratorTuple::from_array([
            Mobius::new(c(1.0, 0.0), c(-16.0, 4.0), c(0.0, 0.0), c(1.0, 0.0))?,
            Mobius::new(c(-5.0, 20.0), c(552.0, -32.0), c(-1.0, 4.0), c(107.0, -20.0))?,
            Mobius::new(c(3.0, 0.0), c(8.0, 0.0), c(1.0, 0.0), c(3.0, 0.0))?,
            Mobius::new(c(31.0, 12.0), c(32.0, 76.0), c(-4.0, -1.0), c(3.0, -12.0))?,
        ]);
        for (label, (got, want)) in ["P", "Q", "M", "N"]
            .iter()
            .zip(t.to_array().iter().zip(want.to_array().iter()))
        {
            s.at_most(
                &format!("{label} projective distance"),
                got.projective_distance(want),
                1e-10,
            );
        }
        let r = g_parameters_of(&t)?;
        let table = [
            ("alpha", r.point.alpha, c(16.0, -4.0)),
            ("rho", r.rho, c(-5.0, 20.0) / 17.0),
            ("beta", r.point.beta, c(552.0, -32.0) / 17.0),
            ("sigma", r.point.sigma, c(-1.0, 4.0) / 17.0),
            ("lambda", r.point.lambda, c(3.0, 0.0)),
            ("r", r.r, c(31.0, 12.0) / 17.0),
            ("b", r.b, c(32.0, 76.0) / 17.0),
            ("s", r.s, c(-4.0, -1.0) / 17.0),
        ];
        for (name, got, want) in table {
            s.at_most(name, (got - want).norm(), 1e-12);
        }
        Ok(())
    })
}

/// Configuration invariants on `θ = kπ/96`, `k = 1..47`.
pub fn a5_deformation_invariants() -> Criterion {
    run("A5", "deformation invariants on the k pi/96 grid", 5.0, |s| {
        let grid = fraction_grid(1..=47, 96);
        let mut worst = std::collections::BTreeMap::<String, f64>::new();
        let mut min_margin = f64::INFINITY;
        let mut all_passed = true;
        for &theta in &grid {
            let st = state(theta)?;
            let r = validate(&st);
            all_passed &= r.passed;
            for ch in &r.checks {
                let w = worst.entry(ch.name.clone()).or_insert(0.0);
                *w = w.max(ch.residual);
            }
            min_margin = min_margin.min(r.margins.map_or(f64::NEG_INFINITY, |m| m.min));
        }
        let pinned = [
            ("det X", deform::DET_TOL),
            ("det Y1", deform::DET_TOL),
            ("det Y2", deform::DET_TOL),
            ("det J", deform::DET_TOL),
            ("det J'", deform::DET_TOL),
            ("trace Y1", deform::TRACE_TOL),
            ("Y1 fixed points", deform::FIXED_POINT_TOL),
            ("Y1 circle angle", deform::ANGLE_TOL),
            ("J radius", deform::RADIUS_TOL),
            ("J orthogonal to Y1 left", deform::ORTHOGONALITY_TOL),
            ("J orthogonal to Y1 right", deform::ORTHOGONALITY_TOL),
            ("mirror symmetry", 0.0),
        ];
        for (name, tol) in pinned {
            match worst.get(name) {
                Some(&v) => s.at_most(name, v, tol),
                None => s.holds(&format!("{name} present"), false),
            }
        }
        s.holds("every validity check passes", all_passed);
        s.at_least("J/J' disjointness margin", min_margin, f64::MIN_POSITIVE);
        Ok(())
    })
}

/// `2f(θ) − f(2θ)`: removes the linear term of the approach to `θ = 0`.
fn richardson(f: impl Fn(f64) -> Result<Complex>, h: f64) -> Result<Complex> {
    Ok(f(h)? * 2.0 - f(2.0 * h)?)
}

/// The `θ → 0⁺` and `θ = π/2` anchors of the deformation.
pub fn a6_endpoint_anchors() -> Criterion {
    run("A6", "deformation endpoint anchors", 1.0, |s| {
        const H: f64 = 1e-4;
        let koebe_j = Mobius::raw(c(3.0, 0.0), c(0.0, -2.0), c(0.0, 4.0), c(3.0, 0.0));
        // sign-aligned normalized entries of J(θ)
        let entry = |k: usize| {
            move |theta: f64| -> Result<Complex> {
                let j = state(theta)?.j.normalize();
                let j = if (j.a + j.d).re < 0.0 { j.neg() } else { j };
                Ok([j.a, j.b, j.c, j.d][k])
            }
        };
        let limit = Mobius::raw(
            richardson(entry(0), H)?,
            richardson(entry(1), H)?,
            richardson(entry(2), H)?,
            richardson(entry(3), H)?,
        );
        s.at_most("J limit from theta = 1e-4", limit.projective_distance(&koebe_j), 1e-6);
        let raw = state(H)?.j.projective_distance(&koebe_j);
        s.note(format!(
            "J at theta = 1e-4 itself is {raw:.3e} from the limit (linear approach)"
        ));
        let center = |theta: f64| -> Result<Complex> { Ok(state(theta)?.j_upper.center_radius()?.0) };
        s.at_most(
            "J circle center limit - 3i/4",
            (richardson(center, H)? - c(0.0, 0.75)).norm(),
            1e-6,
        );
        let r = state(H)?.j_upper.center_radius()?.1;
        s.at_most("J circle radius - 1/4", (r - 0.25).abs(), deform::RADIUS_TOL);
        let mid = state(FRAC_PI_2)?;
        s.holds("Y1 = identity at pi/2", mid.y1 == Mobius::IDENTITY);
        s.holds("X unchanged at pi/2", mid.x == x_map());
        Ok(())
    })
}

/// The limit-set figure and the two animation frame sets.
pub fn a7_figures(opts: &AcceptanceOptions) -> Criterion {
    run("A7", "figure reproduction properties", 120.0, |s| {
        let view = ViewSpec::default();
        let group = cb_group(CB_EXAMPLE_ALPHA, CB_EXAMPLE_BETA, CB_EXAMPLE_LAMBDA)?;
        let policy = ExplorationPolicy::new(60, 1e-3);
        let cloud = limit_set(&group, &policy)?;
        let in_box = cloud.count_in_box(view.bbox);
        s.at_least("points in the [-3,3]^2 view", in_box as f64, 1e4);
        let defect = invariance_defect(&cloud, &group, 2000)?;
        s.at_most("invariance defect", defect, 2.0 * policy.prune_radius);
        std::fs::create_dir_all(&opts.out_dir).map_err(|e| crate::Error::io(&opts.out_dir, e))?;
        let overlay = crate::limitset::isometric_circle_overlay(&group, 1)?;
        let overlays: Vec<Overlay> = overlay.into_iter().map(Overlay::Circle).collect();
        render_cloud_png(&cloud, &overlays, &view, &opts.out_dir.join("limit_set.png"))?;
        s.note(format!("{} points, {in_box} in view", cloud.len()));

        let frames_view = ViewSpec {
            width: 400,
            height: 400,
            ..view
        };
        let first = render_frames(
            &fraction_grid(1..=12, 24),
            &frame_policy(),
            &frames_view,
            &opts.out_dir.join("frames_1_12"),
        )?;
        let second = render_frames(
            &fraction_grid(13..=24, 24),
            &frame_policy(),
            &frames_view,
            &opts.out_dir.join("frames_13_24"),
        )?;
        for (name, m) in [("k = 1..12", &first), ("k = 13..24", &second)] {
            s.at_least(&format!("{name} frames"), m.frames.len() as f64, 12.0);
            s.at_most(&format!("{name} frames over 12"), m.frames.len() as f64, 12.0);
            s.at_most(&format!("{name} failed frames"), m.failed().count() as f64, 0.0);
        }
        let crossing = |m: &crate::render::FrameManifest| -> Vec<usize> {
            m.frames
                .iter()
                .filter(|f| f.flags.contains(&DegeneracyFlag::RhoCrossing))
                .map(|f| f.index)
                .collect()
        };
        s.holds("no rho flag in k = 1..12", crossing(&first).is_empty());
        // ϱ changes sign between 21π/24 and 22π/24: frame index 9 is k = 22
        let rho_zero = deform::rho_zero();
        let expected: Vec<usize> = second
            .frames
            .iter()
            .enumerate()
            .filter(|(i, f)| *i > 0 && second.frames[i - 1].theta < rho_zero && f.theta >= rho_zero)
            .map(|(i, _)| i)
            .collect();
        s.holds(
            "rho flag exactly at the sign change in k = 13..24",
            crossing(&second) == expected && expected == vec![9],
        );
        s.holds(
            "extended range flagged in k = 13..24",
            second
                .frames
                .iter()
                .all(|f| f.theta <= FRAC_PI_2 || f.flags.contains(&DegeneracyFlag::ExtendedRange)),
        );
        Ok(())
    })
}

/// Printed formulas that are recorded rather than used.
pub fn a8_formula_discrepancies() -> Criterion {
    run("A8", "recorded formula discrepancies", 1.0, |s| {
        let a = interior_angle(1.0)?;
        s.at_most("printed cosine at t = 1 vs -4", (a.cos_printed + 4.0).abs(), 1e-12);
        s.holds("printed angle formula flagged at t = 1", a.printed_is_wrong());
        let t = jprime_trace_limits(1e-7)?;
        s.at_most(
            "corrected J' trace limit vs -6",
            (t.corrected - t.corrected_limit)
                .abs()
                .max((t.corrected_limit + 6.0).abs()),
            1e-5,
        );
        s.at_most(
            "printed J' trace limit vs -2",
            (t.printed - t.printed_limit).abs().max((t.printed_limit + 2.0).abs()),
            1e-5,
        );
        let r = validate(&state(PI / 8.0)?);
        s.holds(
            "validity report carries the printed J' reading",
            r.printed_jprime.is_some(),
        );
        Ok(())
    })
}

/// Runs A1 to A8 in order.
pub fn run_acceptance(opts: &AcceptanceOptions) -> AcceptanceReport {
    let criteria = vec![
        a1_f_derivation(),
        a2_relator_property(),
        a3_koebe_exactness(),
        a4_normalizer(),
        a5_deformation_invariants(),
        a6_endpoint_anchors(),
        a7_figures(opts),
        a8_formula_discrepancies(),
    ];
    AcceptanceReport {
        schema: SCHEMA_VERSION,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

/// Writes the report as pretty JSON.
pub fn write_report(report: &AcceptanceReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    std::fs::write(path, text).map_err(|e| crate::Error::io(path, e))
}
