//! Toral eigenfunctions `F(x) = Σ a_μ e^{i⟨μ, x⟩}` with `μ` on one lattice
//! circle, their restrictions to curves, the cutoff split `f = f0 + f1`, the
//! bilinear sum `H` and the median expansion of `f^2`.
//!
//! Coefficients are Hermitian (`a_{-μ} = conj(a_μ)`) and normalized by
//! `Σ |a_μ|^2 = 1`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::curve::{ArcLengthCurve, PhaseEval};
use crate::error::{Error, Result};
use crate::lattice::{angular_distance, LatticeCircle, LatticePoint};
use crate::medians::{median_map, Median};
use crate::quad::GaussRule;
use crate::rng::rng_from_seed;

/// Tolerance on `Σ |a_μ|^2 = 1`.
pub const NORM_TOL: f64 = 1e-12;

/// Default angular fraction of the circle covered by one localized arc.
pub const DEFAULT_ARC_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientModel {
    /// `a_μ = e^{iφ}/√2`, `a_{-μ} = e^{-iφ}/√2`.
    SinglePair { mu: LatticePoint, phase: f64 },
    /// Equal moduli with independent uniform phases.
    UniformRandom { seed: u64 },
    /// Independent standard complex Gaussians, then normalized.
    GaussianRandom { seed: u64 },
    /// Gaussian coefficients on the points within angular distance
    /// `π · fraction` of `center_angle`, mirrored to the antipodal arc.
    ArcLocalized { center_angle: f64, fraction: f64, seed: u64 },
}

/// The arc `A` carrying one half of an arc-localized eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub center_angle: f64,
    pub half_width: f64,
    /// Indices into the circle's points.
    pub arc: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenfunction {
    circle: LatticeCircle,
    coeffs: Vec<Complex64>,
    /// Indices of the points with `y > 0`, or `y = 0, x > 0`.
    upper: Vec<usize>,
    localization: Option<Localization>,
}

fn is_upper(p: LatticePoint) -> bool {
    p.y > 0 || (p.y == 0 && p.x > 0)
}

impl Eigenfunction {
    /// Wraps explicit coefficients aligned with `circle.points()`. Hermitian
    /// symmetry is required; normalization is not.
    pub fn from_coefficients(circle: &LatticeCircle, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != circle.count() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                circle.count(),
                coeffs.len()
            )));
        }
        for i in 0..coeffs.len() {
            let j = circle.antipode_index(i);
            let gap = (coeffs[i] - coeffs[j].conj()).norm();
            if gap > 1e-14 * (1.0 + coeffs[i].norm()) {
                return Err(Error::InvalidArgument("coefficients are not Hermitian".into()));
            }
        }
        let upper = (0..circle.count()).filter(|&i| is_upper(circle.points()[i])).collect();
        Ok(Self {
            circle: circle.clone(),
            coeffs,
            upper,
            localization: None,
        })
    }

    pub fn circle(&self) -> &LatticeCircle {
        &self.circle
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn localization(&self) -> Option<&Localization> {
        self.localization.as_ref()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORM_TOL
    }

    /// `Σ |a_μ|`, which bounds `sup |F|`.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).sum()
    }

    /// Largest `|a_μ - conj(a_{-μ})|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.circle.antipode_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `F(x)` as the paired real sum `Σ_{μ upper} 2 Re(a_μ e^{i⟨μ, x⟩})`.
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        self.upper
            .iter()
            .map(|&i| {
                let p = self.circle.points()[i];
                let (s, c) = (p.x as f64 * x[0] + p.y as f64 * x[1]).sin_cos();
                2.0 * (self.coeffs[i].re * c - self.coeffs[i].im * s)
            })
            .sum()
    }

    /// The raw term-by-term sum, whose imaginary part vanishes up to rounding.
    pub fn evaluate_complex(&self, x: [f64; 2]) -> Complex64 {
        self.circle
            .points()
            .iter()
            .zip(&self.coeffs)
            .map(|(p, a)| a * Complex64::from_polar(1.0, p.x as f64 * x[0] + p.y as f64 * x[1]))
            .sum()
    }

    fn normalize(&mut self) {
        let scale = self.norm_sq().sqrt();
        for a in &mut self.coeffs {
            *a /= scale;
        }
    }
}

/// Builds a normalized Hermitian eigenfunction from a model.
pub fn make_eigenfunction(circle: &LatticeCircle, model: CoefficientModel) -> Result<Eigenfunction> {
    if circle.is_empty() {
        return Err(Error::EmptySet);
    }
    let m = circle.count();
    let pts = circle.points();
    let mut coeffs = alloc::vec![Complex64::new(0.0, 0.0); m];
    let mut localization = None;
    let mirror_from = |coeffs: &mut Vec<Complex64>, i: usize, a: Complex64| {
        coeffs[i] = a;
        coeffs[circle.antipode_index(i)] = a.conj();
    };
    match model {
        CoefficientModel::SinglePair { mu, phase } => {
            let i = circle.index_of(mu).ok_or(Error::NotOnCircle {
                x: mu.x,
                y: mu.y,
                n: circle.n(),
            })?;
            mirror_from(&mut coeffs, i, Complex64::from_polar(core::f64::consts::FRAC_1_SQRT_2, phase));
        }
        CoefficientModel::UniformRandom { seed } => {
            let mut rng = rng_from_seed(seed);
            for i in (0..m).filter(|&i| is_upper(pts[i])) {
                let theta: f64 = rng.random::<f64>() * 2.0 * PI;
                mirror_from(&mut coeffs, i, Complex64::from_polar(1.0, theta));
            }
        }
        CoefficientModel::GaussianRandom { seed } => {
            let mut rng = rng_from_seed(seed);
            for i in (0..m).filter(|&i| is_upper(pts[i])) {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                mirror_from(&mut coeffs, i, Complex64::new(re, im));
            }
        }
        CoefficientModel::ArcLocalized {
            center_angle,
            fraction,
            seed,
        } => {
            if !(fraction > 0.0 && fraction < 0.5) {
                return Err(Error::InvalidArgument("arc fraction must lie in (0, 1/2)".into()));
            }
            let half_width = PI * fraction;
            let arc: Vec<usize> = (0..m)
                .filter(|&i| angular_distance(circle.angles()[i], center_angle) <= half_width)
                .collect();
            if arc.is_empty() {
                return Err(Error::EmptySet);
            }
            let mut rng = rng_from_seed(seed);
            for &i in &arc {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                mirror_from(&mut coeffs, i, Complex64::new(re, im));
            }
            localization = Some(Localization {
                center_angle,
                half_width,
                arc,
            });
        }
    }
    let mut f = Eigenfunction::from_coefficients(circle, coeffs)?;
    f.localization = localization;
    f.normalize();
    Ok(f)
}

/// Number of arcs of angular width `2π · fraction` needed to cover the circle.
pub fn arc_split_cardinality(fraction: f64) -> usize {
    (1.0 / fraction).ceil() as usize
}

/// The smooth cutoff: 1 on `[-1, 1]`, 0 outside `(-2, 2)` and
/// `exp(1 - 1/(1 - (|x| - 1)^2))` in between.
pub fn cutoff(x: f64) -> f64 {
    let y = x.abs() - 1.0;
    if y <= 0.0 {
        1.0
    } else if y >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - y * y)).exp()
    }
}

pub fn cutoff_derivative(x: f64) -> f64 {
    let y = x.abs() - 1.0;
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        let q = 1.0 - y * y;
        -(1.0 - 1.0 / q).exp() * 2.0 * y / (q * q) * x.signum()
    }
}

/// `θ_σ(x) = θ(x/σ)` and its derivative.
pub fn cutoff_sigma(x: f64, sigma: f64) -> (f64, f64) {
    (cutoff(x / sigma), cutoff_derivative(x / sigma) / sigma)
}

/// `f(t) = F(γ(t))` on an arc-length curve.
#[derive(Debug, Clone, Copy)]
pub struct RestrictedWave<'a> {
    eigen: &'a Eigenfunction,
    curve: &'a ArcLengthCurve,
    lambda: f64,
}

pub fn restrict<'a>(eigen: &'a Eigenfunction, curve: &'a ArcLengthCurve) -> RestrictedWave<'a> {
    RestrictedWave {
        eigen,
        curve,
        lambda: eigen.circle.lambda(),
    }
}

impl<'a> RestrictedWave<'a> {
    pub fn eigenfunction(&self) -> &'a Eigenfunction {
        self.eigen
    }

    pub fn curve(&self) -> &'a ArcLengthCurve {
        self.curve
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Calls `visit(index, a_μ e^{i⟨μ, γ(s)⟩}, phase data of μ/λ)` for every
    /// upper-half frequency.
    fn for_each_upper(&self, s: f64, mut visit: impl FnMut(usize, Complex64, &PhaseEval)) {
        let frame = self.curve.frame(s);
        let pts = self.eigen.circle.points();
        for &i in &self.eigen.upper {
            let p = pts[i];
            let u = [p.x as f64 / self.lambda, p.y as f64 / self.lambda];
            let ph = PhaseEval::from_frame(&frame, u);
            let e = self.eigen.coeffs[i] * Complex64::from_polar(1.0, self.lambda * ph.phi);
            visit(i, e, &ph);
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_upper(s, |_, e, _| acc += 2.0 * e.re);
        acc
    }

    /// `f'(t) = Re Σ a_μ iλφ'_μ e^{iλφ_μ}`.
    pub fn derivative(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        let lambda = self.lambda;
        self.for_each_upper(s, |_, e, ph| acc -= 2.0 * lambda * ph.dphi * e.im);
        acc
    }

    /// The cutoff split at scale `σ`.
    pub fn split(&self, sigma: f64) -> Result<CutoffSplit<'a>> {
        if !(sigma > 0.0 && sigma <= 0.25) {
            return Err(Error::InvalidArgument("sigma must lie in (0, 1/4]".into()));
        }
        Ok(CutoffSplit { wave: *self, sigma })
    }
}

/// `f0 = Σ a_μ θ_σ(φ'_μ) e^{iλφ_μ}`, `f1 = f - f0`, and the integration by
/// parts pieces
/// `f2 = Σ a_μ g_μ' e^{iλφ_μ}`, `f3 = Σ a_μ g_μ e^{iλφ_μ}` with
/// `g_μ = (1 - θ_σ(φ'_μ))/φ'_μ`.
///
/// For `τ` vanishing at both ends,
/// `∫ f1 τ = -(1/(iλ)) (∫ f2 τ + ∫ f3 τ')`.
/// `f2` and `f3` are purely imaginary.
#[derive(Debug, Clone, Copy)]
pub struct CutoffSplit<'a> {
    wave: RestrictedWave<'a>,
    sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitValues {
    pub f: f64,
    pub f0: f64,
    pub f1: f64,
    pub f2: Complex64,
    pub f3: Complex64,
}

pub fn split_f0_f1<'a>(wave: &RestrictedWave<'a>, sigma: f64) -> Result<CutoffSplit<'a>> {
    wave.split(sigma)
}

impl<'a> CutoffSplit<'a> {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn wave(&self) -> &RestrictedWave<'a> {
        &self.wave
    }

    pub fn values(&self, s: f64) -> SplitValues {
        let sigma = self.sigma;
        let mut out = SplitValues {
            f: 0.0,
            f0: 0.0,
            f1: 0.0,
            f2: Complex64::new(0.0, 0.0),
            f3: Complex64::new(0.0, 0.0),
        };
        self.wave.for_each_upper(s, |_, e, ph| {
            let (th, dth) = cutoff_sigma(ph.dphi, sigma);
            out.f += 2.0 * e.re;
            out.f0 += 2.0 * e.re * th;
            out.f1 += 2.0 * e.re * (1.0 - th);
            if th < 1.0 {
                let g = (1.0 - th) / ph.dphi;
                let dg = -dth * ph.d2phi / ph.dphi - (1.0 - th) * ph.d2phi / (ph.dphi * ph.dphi);
                out.f3 += Complex64::new(0.0, 2.0 * g * e.im);
                out.f2 += Complex64::new(0.0, 2.0 * dg * e.im);
            }
        });
        out
    }

    pub fn f0(&self, s: f64) -> f64 {
        self.values(s).f0
    }

    pub fn f1(&self, s: f64) -> f64 {
        self.values(s).f1
    }

    /// Smallest `|φ'_μ(s)|` over the terms that `f1` keeps at `s`.
    pub fn min_kept_slope(&self, s: f64) -> f64 {
        let mut m = f64::INFINITY;
        self.wave.for_each_upper(s, |_, _, ph| {
            if cutoff_sigma(ph.dphi, self.sigma).0 < 1.0 {
                m = m.min(ph.dphi.abs());
            }
        });
        m
    }
}

/// Panel count resolving oscillation at frequency `freq` over length `len`.
pub(crate) fn panels_for(freq: f64, len: f64) -> usize {
    ((freq * len / PI).ceil() as usize).max(8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartNorms {
    pub f0_l2: f64,
    pub f2_l2: f64,
    pub f3_l2: f64,
}

/// `L^2` norms of `f0`, `f2` and `f3` on `[0, L]`.
pub fn f1_parts(split: &CutoffSplit<'_>, tol: f64) -> Result<PartNorms> {
    let curve = split.wave.curve;
    let rule = GaussRule::new(16);
    let panels = panels_for(2.0 * split.wave.lambda, curve.length());
    // Real part carries |f0|^2, imaginary part |f2|^2.
    let est = rule.adaptive(
        |s| {
            let v = split.values(s);
            Complex64::new(v.f0 * v.f0, v.f2.norm_sqr())
        },
        0.0,
        curve.length(),
        tol,
        panels,
    )?;
    let f3 = rule.adaptive(|s| split.values(s).f3.norm_sqr(), 0.0, curve.length(), tol, panels)?;
    Ok(PartNorms {
        f0_l2: est.value.re.max(0.0).sqrt(),
        f2_l2: est.value.im.max(0.0).sqrt(),
        f3_l2: f3.value.max(0.0).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartsIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_error: f64,
}

/// Both sides of `∫ f1 τ = -(1/(iλ)) (∫ f2 τ + ∫ f3 τ')` for a window
/// `τ(s) -> (τ, τ')` vanishing at the ends of the curve.
pub fn parts_identity(
    split: &CutoffSplit<'_>,
    window: impl Fn(f64) -> (f64, f64),
    tol: f64,
) -> Result<PartsIdentity> {
    let curve = split.wave.curve;
    let rule = GaussRule::new(16);
    let panels = panels_for(2.0 * split.wave.lambda, curve.length());
    let lhs = rule
        .adaptive(|s| split.f1(s) * window(s).0, 0.0, curve.length(), tol, panels)?
        .value;
    let inner = rule
        .adaptive(
            |s| {
                let v = split.values(s);
                let (t, dt) = window(s);
                v.f2 * t + v.f3 * dt
            },
            0.0,
            curve.length(),
            tol,
            panels,
        )?
        .value;
    let rhs = -(inner / Complex64::new(0.0, split.wave.lambda)).re;
    Ok(PartsIdentity {
        lhs,
        rhs,
        rel_error: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearReport {
    /// `∫ |H|^2`.
    pub norm_h_sq: f64,
    /// `2 max ||h_μ||_2^2`.
    pub close_term: f64,
    /// `(#E/λ^{1/6}) (max ||h_μ||_∞^2 + max ||h_μ||_∞ max ||h_μ'||_1)`.
    pub distant_term: f64,
    /// Sum of the double sum over pairs with `|μ - ν| < λ^{1/3}`.
    pub close_sum: f64,
    /// `norm_h_sq - close_sum`.
    pub distant_sum: f64,
    /// Largest number of other points within `λ^{1/3}` of a point.
    pub max_close_neighbours: usize,
    /// `max(0, norm_h_sq - close_term) / distant_term`.
    pub distant_constant: f64,
}

/// `H(t) = Σ a_μ h_μ(t) e^{i⟨μ, γ(t)⟩}` with real envelopes given by
/// `envelope(index, s, phase) -> (h_μ(s), h_μ'(s))`.
///
/// When every point has at most one other point within `λ^{1/3}`, the close
/// part must not exceed `2 max ||h_μ||_2^2`; a failure is an invariant
/// violation.
pub fn bilinear_h<E>(eigen: &Eigenfunction, curve: &ArcLengthCurve, envelope: E, tol: f64) -> Result<BilinearReport>
where
    E: Fn(usize, f64, &PhaseEval) -> (f64, f64),
{
    if !eigen.is_normalized() {
        return Err(Error::InvalidArgument("coefficients must satisfy sum |a|^2 = 1".into()));
    }
    let circle = eigen.circle();
    let pts = circle.points();
    let lambda = circle.lambda();
    let len = curve.length();
    let m = pts.len();
    let units: Vec<[f64; 2]> = pts.iter().map(|p| [p.x as f64 / lambda, p.y as f64 / lambda]).collect();
    let rule = GaussRule::new(16);

    // Per-envelope norms on a fixed fine grid.
    let grid_panels = 2048;
    let mut h_l2_sq_max: f64 = 0.0;
    let mut h_inf_max: f64 = 0.0;
    let mut dh_l1_max: f64 = 0.0;
    for (i, &u) in units.iter().enumerate() {
        let (mut l2, mut inf, mut l1) = (0.0, 0.0f64, 0.0);
        let h = len / grid_panels as f64;
        for j in 0..grid_panels {
            let mid = (j as f64 + 0.5) * h;
            for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                let s = mid + 0.5 * h * x;
                let ph = PhaseEval::from_frame(&curve.frame(s), u);
                let (v, dv) = envelope(i, s, &ph);
                l2 += 0.5 * h * w * v * v;
                l1 += 0.5 * h * w * dv.abs();
                inf = inf.max(v.abs());
            }
        }
        h_l2_sq_max = h_l2_sq_max.max(l2);
        h_inf_max = h_inf_max.max(inf);
        dh_l1_max = dh_l1_max.max(l1);
    }

    let panels = panels_for(2.0 * lambda, len);
    let norm_h_sq = rule
        .adaptive(
            |s| {
                let frame = curve.frame(s);
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, &u) in units.iter().enumerate() {
                    let ph = PhaseEval::from_frame(&frame, u);
                    let (v, _) = envelope(i, s, &ph);
                    if v != 0.0 {
                        acc += eigen.coeffs()[i] * Complex64::from_polar(v, lambda * ph.phi);
                    }
                }
                acc.norm_sqr()
            },
            0.0,
            len,
            tol,
            panels,
        )?
        .value;

    let close_sq = lambda.powf(2.0 / 3.0);
    let mut close_sum = 0.0;
    let mut max_close_neighbours = 0;
    for i in 0..m {
        let mut neighbours = 0;
        for j in 0..m {
            if (pts[i].dist_sq(pts[j]) as f64) >= close_sq {
                continue;
            }
            if i != j {
                neighbours += 1;
            }
            let d = pts[i] - pts[j];
            let integral = rule
                .adaptive(
                    |s| {
                        let frame = curve.frame(s);
                        let hi = envelope(i, s, &PhaseEval::from_frame(&frame, units[i])).0;
                        let hj = envelope(j, s, &PhaseEval::from_frame(&frame, units[j])).0;
                        let arg = d.x as f64 * frame.gamma[0] + d.y as f64 * frame.gamma[1];
                        Complex64::from_polar(hi * hj, arg)
                    },
                    0.0,
                    len,
                    tol,
                    panels_for(close_sq.sqrt(), len),
                )?
                .value;
            close_sum += (eigen.coeffs()[i] * eigen.coeffs()[j].conj() * integral).re;
        }
        max_close_neighbours = max_close_neighbours.max(neighbours);
    }

    let close_term = 2.0 * h_l2_sq_max;
    if max_close_neighbours <= 1 && close_sum > close_term * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::InvariantViolation(format!(
            "close pairs contribute {close_sum} > 2 max ||h||^2 = {close_term}"
        )));
    }
    let distant_term = m as f64 / lambda.powf(1.0 / 6.0) * (h_inf_max * h_inf_max + h_inf_max * dh_l1_max);
    Ok(BilinearReport {
        norm_h_sq,
        close_term,
        distant_term,
        close_sum,
        distant_sum: norm_h_sq - close_sum,
        max_close_neighbours,
        distant_constant: if distant_term > 0.0 {
            (norm_h_sq - close_term).max(0.0) / distant_term
        } else {
            0.0
        },
    })
}

/// The expansion `f_A(t)^2 = Σ a_μ a_{-μ} + Σ_z b_z e^{2i⟨z, γ(t)⟩}` of the
/// arc piece `f_A = Σ_{μ ∈ A} a_μ e^{i⟨μ, γ⟩}`.
///
/// For `μ ≠ ν` the coefficient is `b_z = 2 a_μ a_ν`; a diagonal median `z = μ`
/// carries `a_μ^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MedianExpansion {
    pub constant_term: Complex64,
    pub bz: Vec<(Median, Complex64)>,
    /// Doubled coordinates of medians with `0 < Δ(z) <= √λ`.
    pub g0_support: Vec<LatticePoint>,
    /// Doubled coordinates of medians with `|z| >= λ/2`, `Δ(z) > √λ`.
    pub g_support: Vec<LatticePoint>,
    /// `Σ_{μ ∈ A} |a_μ|^2`.
    pub arc_mass: f64,
    pub sum_b_sq: f64,
    /// Largest pointwise error of the identity over the audit samples.
    pub identity_error: f64,
}

impl MedianExpansion {
    /// `Σ_z b_z e^{i⟨2z, γ⟩}` at a point.
    pub fn evaluate(&self, gamma: [f64; 2]) -> Complex64 {
        self.constant_term
            + self
                .bz
                .iter()
                .map(|(m, b)| b * Complex64::from_polar(1.0, m.z2.x as f64 * gamma[0] + m.z2.y as f64 * gamma[1]))
                .sum::<Complex64>()
    }
}

/// Expands the square of the arc piece of an arc-localized eigenfunction and
/// audits the identity at 200 points of the curve.
pub fn square_expand(wave: &RestrictedWave<'_>) -> Result<MedianExpansion> {
    let eigen = wave.eigen;
    let loc = eigen
        .localization()
        .filter(|l| l.half_width < PI / 3.0)
        .ok_or_else(|| Error::InvalidArgument("the median expansion needs arc-localized coefficients".into()))?;
    let circle = eigen.circle();
    let n = circle.n();
    let pts = circle.points();
    let arc = &loc.arc;
    let in_arc = |i: usize| arc.binary_search(&i).is_ok();

    let constant_term: Complex64 = arc
        .iter()
        .map(|&i| {
            let j = circle.antipode_index(i);
            if in_arc(j) {
                eigen.coeffs()[i] * eigen.coeffs()[j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .sum();

    let mut by_median: BTreeMap<LatticePoint, (Median, Complex64)> = BTreeMap::new();
    for (k, &i) in arc.iter().enumerate() {
        for &j in &arc[k..] {
            let med = median_map(pts[i], pts[j], n)?;
            let (ai, aj) = (eigen.coeffs()[i], eigen.coeffs()[j]);
            let b = if i == j { ai * ai } else { ai * aj * 2.0 };
            let slot = by_median.entry(med.z2).or_insert((med, Complex64::new(0.0, 0.0)));
            if slot.1 != Complex64::new(0.0, 0.0) {
                return Err(Error::InvariantViolation("median with two parent pairs".into()));
            }
            slot.1 = b;
        }
    }
    let bz: Vec<(Median, Complex64)> = by_median.into_values().collect();
    let g0_support = bz.iter().filter(|(m, _)| m.in_near_circle_band()).map(|(m, _)| m.z2).collect();
    let g_support = bz.iter().filter(|(m, _)| m.is_starred()).map(|(m, _)| m.z2).collect();
    let arc_mass: f64 = arc.iter().map(|&i| eigen.coeffs()[i].norm_sqr()).sum();
    let sum_b_sq: f64 = bz.iter().map(|(_, b)| b.norm_sqr()).sum();
    if sum_b_sq > 2.0 * arc_mass * arc_mass * (1.0 + 1e-12) {
        return Err(Error::InvariantViolation(format!(
            "sum |b_z|^2 = {sum_b_sq} exceeds 2 (sum |a|^2)^2"
        )));
    }

    let mut out = MedianExpansion {
        constant_term,
        bz,
        g0_support,
        g_support,
        arc_mass,
        sum_b_sq,
        identity_error: 0.0,
    };
    let len = wave.curve.length();
    for k in 0..200 {
        let s = len * (k as f64 + 0.5) / 200.0;
        let gamma = wave.curve.gamma(s);
        let piece: Complex64 = arc
            .iter()
            .map(|&i| eigen.coeffs()[i] * Complex64::from_polar(1.0, pts[i].x as f64 * gamma[0] + pts[i].y as f64 * gamma[1]))
            .sum();
        let err = (piece * piece - out.evaluate(gamma)).norm();
        out.identity_error = out.identity_error.max(err);
    }
    if out.identity_error > 1e-8 {
        return Err(Error::InvariantViolation(format!(
            "median expansion misses f^2 by {}",
            out.identity_error
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_arclength, CurveSpec};
    use crate::lattice::enumerate_circle;
    use proptest::prelude::*;

    fn circle(n: u64) -> LatticeCircle {
        enumerate_circle(n).unwrap()
    }

    fn arc() -> ArcLengthCurve {
        make_arclength(CurveSpec::circle_arc(1.0, 0.3, 1.2)).unwrap()
    }

    /// C^∞ bump supported on `(c - r, c + r)`.
    fn bump(c: f64, r: f64) -> impl Fn(f64) -> (f64, f64) {
        move |s| {
            let y = (s - c) / r;
            if y.abs() >= 1.0 {
                return (0.0, 0.0);
            }
            let q = 1.0 - y * y;
            let v = (-1.0 / q).exp();
            (v, v * (-2.0 * y / (q * q)) / r)
        }
    }

    #[test]
    fn single_pair_model() {
        let c = circle(25);
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu: LatticePoint::new(5, 0), phase: 0.0 }).unwrap();
        let i = c.index_of(LatticePoint::new(5, 0)).unwrap();
        let j = c.index_of(LatticePoint::new(-5, 0)).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((f.coeffs()[i].re - h).abs() < 1e-15 && (f.coeffs()[j].re - h).abs() < 1e-15);
        assert!(f.is_normalized());
        let x = [0.37, 1.9];
        assert!((f.evaluate(x) - 2f64.sqrt() * (5.0 * x[0]).cos()).abs() < 1e-14);
        assert!(make_eigenfunction(&c, CoefficientModel::SinglePair { mu: LatticePoint::new(1, 1), phase: 0.0 }).is_err());
    }

    #[test]
    fn explicit_cosine() {
        let c = circle(25);
        let mut a = alloc::vec![Complex64::new(0.0, 0.0); c.count()];
        a[c.index_of(LatticePoint::new(5, 0)).unwrap()] = Complex64::new(0.5, 0.0);
        a[c.index_of(LatticePoint::new(-5, 0)).unwrap()] = Complex64::new(0.5, 0.0);
        let f = Eigenfunction::from_coefficients(&c, a.clone()).unwrap();
        assert_eq!(f.evaluate([0.0, 0.0]), 1.0);
        assert!((f.evaluate([0.4, 2.0]) - 2f64.cos()).abs() < 1e-15);
        a[0] = Complex64::new(0.1, 0.2);
        assert!(Eigenfunction::from_coefficients(&c, a).is_err());
    }

    #[test]
    fn models_are_normalized_and_deterministic() {
        let c = circle(25);
        for model in [
            CoefficientModel::UniformRandom { seed: 7 },
            CoefficientModel::GaussianRandom { seed: 7 },
            CoefficientModel::ArcLocalized { center_angle: 0.9, fraction: 0.1, seed: 7 },
        ] {
            let f = make_eigenfunction(&c, model).unwrap();
            assert!((f.norm_sq() - 1.0).abs() < 1e-12);
            assert_eq!(f.hermitian_defect(), 0.0);
            assert_eq!(f, make_eigenfunction(&c, model).unwrap());
        }
        assert_eq!(make_eigenfunction(&circle(3), CoefficientModel::UniformRandom { seed: 1 }), Err(Error::EmptySet));
    }

    #[test]
    fn arc_localized_support() {
        let c = circle(1105);
        let f = make_eigenfunction(
            &c,
            CoefficientModel::ArcLocalized { center_angle: 0.5, fraction: 0.01, seed: 3 },
        );
        // The 1/100 arc around 0.5 may be empty for this circle; pick a point.
        let f = match f {
            Ok(f) => f,
            Err(Error::EmptySet) => make_eigenfunction(
                &c,
                CoefficientModel::ArcLocalized { center_angle: c.angles()[3], fraction: 0.01, seed: 3 },
            )
            .unwrap(),
            Err(e) => panic!("{e}"),
        };
        let loc = f.localization().unwrap();
        for (i, a) in f.coeffs().iter().enumerate() {
            if a.norm() == 0.0 {
                continue;
            }
            let ang = c.angles()[i];
            let d = angular_distance(ang, loc.center_angle).min(angular_distance(ang, loc.center_angle + PI));
            assert!(d <= PI * 0.01 + 1e-12);
        }
    }

    #[test]
    fn evaluation_matches_reference_sum() {
        let c = circle(5525);
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 11 }).unwrap();
        let bound = f.sup_bound();
        for i in 0..40 {
            for j in 0..40 {
                let x = [2.0 * PI * i as f64 / 40.0, 2.0 * PI * j as f64 / 40.0];
                // Independent summation: explicit cos/sin in reverse order.
                let mut re = 0.0;
                let mut im = 0.0;
                for (p, a) in c.points().iter().zip(f.coeffs()).rev() {
                    let t = p.x as f64 * x[0] + p.y as f64 * x[1];
                    re += a.re * t.cos() - a.im * t.sin();
                    im += a.re * t.sin() + a.im * t.cos();
                }
                let v = f.evaluate(x);
                assert!((v - re).abs() < 1e-12);
                assert!(im.abs() < 1e-10 && f.evaluate_complex(x).im.abs() < 1e-10);
                assert!(v.abs() <= bound);
            }
        }
        let at_zero: Complex64 = f.coeffs().iter().sum();
        assert!((f.evaluate([0.0, 0.0]) - at_zero.re).abs() < 1e-13 && at_zero.im.abs() < 1e-13);
    }

    #[test]
    fn parseval_on_grid() {
        let c = circle(65);
        let f = make_eigenfunction(&c, CoefficientModel::UniformRandom { seed: 5 }).unwrap();
        let m = (4.0 * c.lambda()).ceil() as usize + 1;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = [2.0 * PI * i as f64 / m as f64, 2.0 * PI * j as f64 / m as f64];
                acc += f.evaluate(x).powi(2);
            }
        }
        assert!((acc / (m * m) as f64 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn restriction_and_derivative() {
        let c = circle(1105);
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 2 }).unwrap();
        let curve = make_arclength(CurveSpec::EllipseArc { center: [0.1, 0.2], a: 2.0, b: 1.0, start: 0.2, end: 0.9 }).unwrap();
        let w = restrict(&f, &curve);
        for k in 0..1000 {
            let s = curve.length() * k as f64 / 999.0;
            assert!((w.value(s) - f.evaluate(curve.gamma(s))).abs() < 1e-12);
        }
        let h = 1e-6;
        for k in 1..50 {
            let s = curve.length() * k as f64 / 50.0;
            let fd = (w.value(s + h) - w.value(s - h)) / (2.0 * h);
            assert!((fd - w.derivative(s)).abs() < 1e-6 * (1.0 + w.derivative(s).abs()));
        }
    }

    #[test]
    fn single_pair_on_circle_arc_closed_form() {
        let c = circle(25);
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu: LatticePoint::new(3, 4), phase: 0.4 }).unwrap();
        let curve = arc();
        let w = restrict(&f, &curve);
        for k in 0..20 {
            let s = curve.length() * k as f64 / 19.0;
            let t = 0.3 + s;
            let expect = 2f64.sqrt() * (3.0 * t.cos() + 4.0 * t.sin() + 0.4).cos();
            assert!((w.value(s) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(-1.0), 1.0);
        assert_eq!(cutoff(2.0), 0.0);
        assert!(cutoff(1.5) > 0.0 && cutoff(1.5) < 1.0);
        for k in 0..400 {
            let x = -2.5 + 5.0 * k as f64 / 399.0;
            assert_eq!(cutoff(x), cutoff(-x));
            let h = 1e-6;
            let fd = (cutoff(x + h) - cutoff(x - h)) / (2.0 * h);
            assert!((fd - cutoff_derivative(x)).abs() < 1e-5);
        }
    }

    #[test]
    fn split_sums_to_f() {
        let c = circle(5525);
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 9 }).unwrap();
        let curve = arc();
        let w = restrict(&f, &curve);
        let sp = w.split(0.1).unwrap();
        for k in 0..300 {
            let s = curve.length() * k as f64 / 299.0;
            let v = sp.values(s);
            assert!((v.f0 + v.f1 - v.f).abs() < 1e-10);
            assert!((v.f - w.value(s)).abs() < 1e-12);
            assert!(sp.min_kept_slope(s) >= 0.1);
            assert!(v.f2.re == 0.0 && v.f3.re == 0.0);
        }
        assert!(w.split(0.3).is_err());
    }

    #[test]
    fn split_extremes() {
        // Frequencies (±5, 0) against a short arc near angle π/2 where the
        // tangent is nearly horizontal: |φ'| is close to 1, so f0 vanishes.
        let c = circle(25);
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu: LatticePoint::new(5, 0), phase: 0.0 }).unwrap();
        let curve = make_arclength(CurveSpec::circle_arc(1.0, 1.4, 1.7)).unwrap();
        let sp = restrict(&f, &curve).split(0.1).unwrap();
        for k in 0..50 {
            assert_eq!(sp.f0(curve.length() * k as f64 / 49.0), 0.0);
        }
        // Near angle 0 the frequency is normal to the curve; with σ = 1/4 the
        // cutoff saturates on a very short arc, so f1 = 0.
        let tiny = make_arclength(CurveSpec::circle_arc(1.0, -0.1, 0.1)).unwrap();
        let w = restrict(&f, &tiny);
        let sp = w.split(0.25).unwrap();
        for k in 0..50 {
            let s = tiny.length() * k as f64 / 49.0;
            let v = sp.values(s);
            assert_eq!(v.f1, 0.0);
            assert_eq!((v.f2, v.f3), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
            assert!((v.f0 - w.value(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn integration_by_parts_identity() {
        let c = circle(1105);
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 4 }).unwrap();
        let curve = arc();
        let w = restrict(&f, &curve);
        let l = curve.length();
        for sigma in [0.05, 0.1, 0.2] {
            let sp = w.split(sigma).unwrap();
            for (c0, r) in [(0.5 * l, 0.3 * l), (0.3 * l, 0.1 * l)] {
                let id = parts_identity(&sp, bump(c0, r), 1e-10).unwrap();
                assert!(id.rel_error < 1e-6, "sigma {sigma}: {id:?}");
            }
        }
    }

    #[test]
    fn part_norms_scale() {
        let c = circle(1105);
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 4 }).unwrap();
        let curve = arc();
        let w = restrict(&f, &curve);
        for sigma in [0.05, 0.1, 0.2] {
            let n = f1_parts(&w.split(sigma).unwrap(), 1e-8).unwrap();
            assert!(n.f2_l2 * sigma * sigma < 50.0);
            assert!(n.f3_l2 * sigma < 50.0);
            assert!(n.f0_l2.is_finite());
        }
    }

    #[test]
    fn bilinear_single_and_zero() {
        let c = circle(25);
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu: LatticePoint::new(3, 4), phase: 0.0 }).unwrap();
        let curve = arc();
        let l = curve.length();
        let target = c.index_of(LatticePoint::new(3, 4)).unwrap();
        let b = bump(0.5 * l, 0.4 * l);
        let r = bilinear_h(&f, &curve, |i, s, _| if i == target { b(s) } else { (0.0, 0.0) }, 1e-12).unwrap();
        // One term: ||H||^2 = |a|^2 ||h||^2 = ||h||^2 / 2.
        let h2 = GaussRule::new(16).adaptive(|s| b(s).0.powi(2), 0.0, l, 1e-14, 64).unwrap().value;
        assert!((r.norm_h_sq - 0.5 * h2).abs() < 1e-10);
        assert!(r.norm_h_sq <= r.close_term);
        let z = bilinear_h(&f, &curve, |_, _, _| (0.0, 0.0), 1e-12).unwrap();
        assert_eq!((z.norm_h_sq, z.close_sum), (0.0, 0.0));
        let mut bad = f.clone();
        bad.coeffs[target] *= 2.0;
        assert!(bilinear_h(&bad, &curve, |_, _, _| (0.0, 0.0), 1e-12).is_err());
    }

    #[test]
    fn bilinear_with_cutoff_envelopes() {
        let c = circle(5525);
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 1 }).unwrap();
        let curve = arc();
        let sigma = 0.1;
        let r = bilinear_h(
            &f,
            &curve,
            |_, _, ph| {
                let (t, dt) = cutoff_sigma(ph.dphi, sigma);
                (t, dt * ph.d2phi)
            },
            1e-10,
        )
        .unwrap();
        // H is f0 here.
        let sp = restrict(&f, &curve).split(sigma).unwrap();
        let f0 = f1_parts(&sp, 1e-10).unwrap().f0_l2;
        assert!((r.norm_h_sq - f0 * f0).abs() < 1e-7 * (1.0 + r.norm_h_sq));
        assert!(r.close_term <= 2.0 * 8.0 * sigma / curve.k_min() + 1e-12);
        assert!(r.distant_term > 0.0);
    }

    #[test]
    fn square_expansion() {
        let c = circle(1105);
        let center = c.angles()[1];
        let f = make_eigenfunction(&c, CoefficientModel::ArcLocalized { center_angle: center, fraction: 0.05, seed: 8 }).unwrap();
        let curve = arc();
        let e = square_expand(&restrict(&f, &curve)).unwrap();
        assert_eq!(e.constant_term, Complex64::new(0.0, 0.0));
        assert!(e.identity_error <= 1e-8);
        assert!(e.sum_b_sq <= 2.0 * e.arc_mass * e.arc_mass);
        let lambda = c.lambda();
        for (m, _) in &e.bz {
            assert!(m.norm() > lambda / 2.0);
        }
        let loc = f.localization().unwrap();
        let pts = c.points();
        for (k, &i) in loc.arc.iter().enumerate() {
            for &j in &loc.arc[k + 1..] {
                let z2 = pts[i] + pts[j];
                let (_, b) = e.bz.iter().find(|(m, _)| m.z2 == z2).unwrap();
                assert!((b - f.coeffs()[i] * f.coeffs()[j] * 2.0).norm() < 1e-15);
            }
        }
        let g = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 8 }).unwrap();
        assert!(square_expand(&restrict(&g, &curve)).is_err());
    }

    #[test]
    fn square_expansion_single_frequency() {
        let c = circle(1105);
        let center = c.angles()[2];
        let f = make_eigenfunction(&c, CoefficientModel::ArcLocalized { center_angle: center, fraction: 0.001, seed: 1 }).unwrap();
        assert_eq!(f.localization().unwrap().arc.len(), 1);
        let e = square_expand(&restrict(&f, &arc())).unwrap();
        assert_eq!(e.bz.len(), 1);
        let (m, _) = e.bz[0];
        assert_eq!(m.four_delta_sq, 0);
        assert!(e.g0_support.is_empty() && e.g_support.is_empty());
    }

    proptest! {
        #[test]
        fn sup_bound_holds(seed in 0u64..1000, x in 0.0..2.0 * PI, y in 0.0..2.0 * PI) {
            let c = circle(325);
            let f = make_eigenfunction(&c, CoefficientModel::UniformRandom { seed }).unwrap();
            prop_assert!(f.evaluate([x, y]).abs() <= f.sup_bound());
            prop_assert!(f.evaluate_complex([x, y]).im.abs() <= 1e-10);
        }

        #[test]
        fn median_coefficients_bounded(seed in 0u64..200, idx in 0usize..1000) {
            let c = circle(5525);
            let center = c.angles()[idx % c.count()];
            let f = make_eigenfunction(&c, CoefficientModel::ArcLocalized { center_angle: center, fraction: 0.08, seed }).unwrap();
            let e = square_expand(&restrict(&f, &arc())).unwrap();
            prop_assert!(e.sum_b_sq <= 2.0 * e.arc_mass * e.arc_mass);
        }
    }
}
