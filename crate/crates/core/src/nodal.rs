//! Certified sign-change counting along a curve, partitions of unity adapted
//! to the wavelength, and the records that compare nodal counts with the
//! restriction norms.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::b_lambda;
use crate::oscillatory::function_norms;
use crate::quad::GaussRule;
use crate::wavefield::{cutoff, cutoff_derivative, f1_parts, RestrictedWave};

/// Largest grid used by the sign-change counter.
pub const NODE_CAP: usize = 1 << 24;

/// Default bracket width relative to the interval length.
pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// An interval with `f(lo) f(hi) < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignChangeReport {
    pub count: usize,
    pub brackets: Vec<Bracket>,
    pub grid_levels: usize,
    pub nodes: usize,
    /// The count was unchanged over the last two grid doublings.
    pub stable: bool,
}

fn sign_cells(vals: &[f64]) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &v) in vals.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if let Some(j) = last {
            if (vals[j] < 0.0) != (v < 0.0) {
                cells.push((j, i));
            }
        }
        last = Some(i);
    }
    cells
}

/// Counts sign changes of `f` on `[a, b]` for a function oscillating at rate
/// at most `freq`.
///
/// The grid starts at spacing `min((b - a)/64, 1/(8 freq))` and is doubled
/// until the count is the same on three consecutive levels or the grid
/// would exceed [`NODE_CAP`]. Each sign change is then bisected to width at
/// most `tol`. Tangential zeros are not sign changes and are not counted.
pub fn count_sign_changes_in(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    freq: f64,
    tol: f64,
) -> Result<SignChangeReport> {
    if !(tol > 0.0) || !(b > a) {
        return Err(Error::InvalidArgument("need tol > 0 and a < b".into()));
    }
    let len = b - a;
    let h0 = (len / 64.0).min(1.0 / (8.0 * freq.max(1e-300)));
    let mut n = ((len / h0).ceil() as usize).max(1);
    let x = |i: usize, n: usize| if i == n { b } else { a + len * i as f64 / n as f64 };
    let mut vals: Vec<f64> = (0..=n).map(|i| f(x(i, n))).collect();
    let mut counts = alloc::vec![sign_cells(&vals).len()];
    let stable = loop {
        let k = counts.len();
        if k >= 3 && counts[k - 1] == counts[k - 2] && counts[k - 2] == counts[k - 3] {
            break true;
        }
        if 2 * n > NODE_CAP {
            break false;
        }
        let mut next = Vec::with_capacity(2 * n + 1);
        for (i, &v) in vals.iter().enumerate().take(n) {
            next.push(v);
            next.push(f(x(2 * i + 1, 2 * n)));
        }
        next.push(vals[n]);
        vals = next;
        n *= 2;
        counts.push(sign_cells(&vals).len());
    };
    let mut brackets = Vec::new();
    for (i, j) in sign_cells(&vals) {
        let (mut lo, mut hi) = (x(i, n), x(j, n));
        let neg_lo = vals[i] < 0.0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = f(mid);
            if v == 0.0 {
                break;
            }
            if (v < 0.0) == neg_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if f(lo) * f(hi) >= 0.0 {
            return Err(Error::InvariantViolation(format!("bracket [{lo}, {hi}] lost its sign change")));
        }
        brackets.push(Bracket { lo, hi });
    }
    Ok(SignChangeReport {
        count: brackets.len(),
        brackets,
        grid_levels: counts.len(),
        nodes: n + 1,
        stable,
    })
}

/// Certified sign changes of `f = F∘γ` on `[0, L]`.
pub fn count_sign_changes(wave: &RestrictedWave<'_>, tol: f64) -> Result<SignChangeReport> {
    count_sign_changes_in(|s| wave.value(s), 0.0, wave.curve().length(), wave.lambda(), tol)
}

/// `τ_j = ψ_j / Σ_k ψ_k` with `ψ_j(t) = θ(2(t - c_j)/h)`, centers `c_j = jh`
/// and `h = L/M ≈ C_1/λ`. Each `ψ_j` is 1 within `h/2` of its center and
/// vanishes beyond `h`, so every point lies in at most two supports.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    pub length: f64,
    pub lambda: f64,
    pub c1: f64,
    pub h: f64,
    pub centers: Vec<f64>,
}

pub fn build_partition(length: f64, lambda: f64, c1: f64) -> Result<PartitionOfUnity> {
    if !(length > 0.0) {
        return Err(Error::InvalidArgument("length must be positive".into()));
    }
    if !(c1 >= 1.0 && c1 <= lambda / 4.0) {
        return Err(Error::InvalidArgument(format!("C1 = {c1} must lie in [1, λ/4] for λ = {lambda}")));
    }
    let m = ((length * lambda / c1).round() as usize).max(1);
    let h = length / m as f64;
    Ok(PartitionOfUnity {
        length,
        lambda,
        c1,
        h,
        centers: (0..=m).map(|j| if j == m { length } else { j as f64 * h }).collect(),
    })
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    fn psi(&self, j: usize, t: f64) -> (f64, f64) {
        let x = 2.0 * (t - self.centers[j]) / self.h;
        (cutoff(x), cutoff_derivative(x) * 2.0 / self.h)
    }

    /// Indices whose support contains `t`.
    pub fn active(&self, t: f64) -> impl Iterator<Item = usize> + '_ {
        let base = (t / self.h).floor().max(0.0) as usize;
        (base.saturating_sub(1)..=(base + 2).min(self.len() - 1)).filter(move |&j| (t - self.centers[j]).abs() < self.h)
    }

    /// `(τ_j(t), τ_j'(t))`.
    pub fn value(&self, j: usize, t: f64) -> (f64, f64) {
        let (p, dp) = self.psi(j, t);
        if p == 0.0 && dp == 0.0 {
            return (0.0, 0.0);
        }
        let (mut s, mut ds) = (0.0, 0.0);
        for k in self.active(t) {
            let (q, dq) = self.psi(k, t);
            s += q;
            ds += dq;
        }
        (p / s, dp / s - p * ds / (s * s))
    }

    /// `supp τ_j ∩ [0, L]`.
    pub fn support(&self, j: usize) -> (f64, f64) {
        let c = self.centers[j];
        ((c - self.h).max(0.0), (c + self.h).min(self.length))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionAudit {
    /// Largest `|Σ τ_j - 1|`.
    pub sum_error: f64,
    pub max_overlap: usize,
    /// `max |∂^r τ_j| (C_1/λ)^r` for `r = 0, 1, 2`.
    pub derivative_constants: [f64; 3],
}

/// Checks the partition on `samples` equally spaced points.
pub fn audit_partition(p: &PartitionOfUnity, samples: usize) -> PartitionAudit {
    let scale = p.c1 / p.lambda;
    let mut out = PartitionAudit {
        sum_error: 0.0,
        max_overlap: 0,
        derivative_constants: [0.0; 3],
    };
    let eps = 1e-4 * p.h;
    for i in 0..=samples {
        let t = p.length * i as f64 / samples as f64;
        let mut sum = 0.0;
        let mut overlap = 0;
        for j in p.active(t) {
            let (v, dv) = p.value(j, t);
            if v > 0.0 {
                overlap += 1;
            }
            sum += v;
            let d2 = (p.value(j, t + eps).1 - p.value(j, t - eps).1) / (2.0 * eps);
            let c = &mut out.derivative_constants;
            c[0] = c[0].max(v.abs());
            c[1] = c[1].max(dv.abs() * scale);
            c[2] = c[2].max(d2.abs() * scale * scale);
        }
        out.sum_error = out.sum_error.max((sum - 1.0).abs());
        out.max_overlap = out.max_overlap.max(overlap);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRecord {
    pub c1: f64,
    pub sigma: f64,
    /// `C_1 = σ^{-3/2}` was used.
    pub coupled: bool,
    pub bumps: usize,
    /// Bumps on whose support `f` changes sign.
    pub j0: Vec<usize>,
    pub sign_changes: usize,
    pub l1: f64,
    /// `∫ |f| Σ_{j ∈ J_0} τ_j`.
    pub j0_mass: f64,
    /// `(#J_0 C_1/λ)^{1/2}`.
    pub j0_rhs: f64,
    pub j0_ratio: f64,
    /// `Σ_{j ∉ J_0} |∫ f τ_j|`.
    pub rest_sum: f64,
    /// `C_1^{-1/3}`.
    pub rest_rhs: f64,
    pub rest_ratio: f64,
    /// `Σ_{j ∉ J_0} |∫ f0 τ_j|` against `σ^{1/2}`.
    pub f0_sum: f64,
    pub f0_ratio: f64,
    /// `Σ_{j ∉ J_0} |∫ f1 τ_j|` against `1/(C_1 σ)`.
    pub f1_sum: f64,
    pub f1_ratio: f64,
    pub f2_l2: f64,
    pub f3_l2: f64,
    /// `|∫|f| - rest_sum - j0_mass|`.
    pub identity_error: f64,
    /// `#J_0 / (λ (∫|f| / ||F||_2)^5)`.
    pub conclusion_ratio: f64,
}

/// `||F||_{L^2(T^2)}` for coefficients with `Σ|a|^2 = s`.
pub fn torus_l2_norm(coeff_norm_sq: f64) -> f64 {
    coeff_norm_sq.sqrt() / (2.0 * PI)
}

/// Runs the sign-detection argument on one restricted eigenfunction. `c1`
/// defaults to `σ^{-3/2}`.
pub fn partition_experiment(
    wave: &RestrictedWave<'_>,
    c1: Option<f64>,
    sigma: f64,
    tol: f64,
) -> Result<PartitionRecord> {
    let curve = wave.curve();
    let len = curve.length();
    let lambda = wave.lambda();
    let split = wave.split(sigma)?;
    let coupled = c1.is_none();
    let c1 = c1.unwrap_or(sigma.powf(-1.5));
    let part = build_partition(len, lambda, c1)?;
    let norms = function_norms(|s| wave.value(s), len, lambda, tol)?;
    if norms.l2 == 0.0 {
        return Err(Error::InvalidArgument("f vanishes identically".into()));
    }
    let bracket_tol = DEFAULT_REL_TOL * len;
    let total = count_sign_changes(wave, bracket_tol)?;
    let rule = GaussRule::new(16);
    let panels = |lo: f64, hi: f64| (((hi - lo) * lambda).ceil() as usize).max(2);

    let mut j0 = Vec::new();
    let (mut j0_mass, mut rest_sum, mut f0_sum, mut f1_sum) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..part.len() {
        let (lo, hi) = part.support(j);
        if hi <= lo {
            continue;
        }
        let local = count_sign_changes_in(|s| wave.value(s), lo, hi, lambda, bracket_tol)?;
        if local.count > 0 {
            j0.push(j);
            let mut cuts = alloc::vec![lo];
            cuts.extend(local.brackets.iter().map(|b| 0.5 * (b.lo + b.hi)));
            cuts.push(hi);
            for w in cuts.windows(2) {
                j0_mass += rule
                    .adaptive(|s| wave.value(s).abs() * part.value(j, s).0, w[0], w[1], tol, 1)?
                    .value;
            }
        } else {
            let integral = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
                Ok(rule.adaptive(|s| g(s) * part.value(j, s).0, lo, hi, tol, panels(lo, hi))?.value)
            };
            rest_sum += integral(&|s| wave.value(s))?.abs();
            f0_sum += integral(&|s| split.f0(s))?.abs();
            f1_sum += integral(&|s| split.f1(s))?.abs();
        }
    }
    if j0.len() > 2 * total.count {
        return Err(Error::InvariantViolation(format!(
            "#J0 = {} exceeds twice the sign-change count {}",
            j0.len(),
            total.count
        )));
    }
    let parts = f1_parts(&split, tol)?;
    let j0_rhs = (j0.len() as f64 * c1 / lambda).sqrt();
    let rest_rhs = c1.powf(-1.0 / 3.0);
    let f_norm = torus_l2_norm(wave.eigenfunction().norm_sq());
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(PartitionRecord {
        c1,
        sigma,
        coupled,
        bumps: part.len(),
        sign_changes: total.count,
        l1: norms.l1,
        j0_mass,
        j0_rhs,
        j0_ratio: ratio(j0_mass, j0_rhs),
        rest_sum,
        rest_rhs,
        rest_ratio: ratio(rest_sum, rest_rhs),
        f0_sum,
        f0_ratio: ratio(f0_sum, sigma.sqrt()),
        f1_sum,
        f1_ratio: ratio(f1_sum, 1.0 / (c1 * sigma)),
        f2_l2: parts.f2_l2,
        f3_l2: parts.f3_l2,
        identity_error: (norms.l1 - rest_sum - j0_mass).abs(),
        conclusion_ratio: ratio(j0.len() as f64, lambda * (norms.l1 / f_norm).powi(5)),
        j0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremRecord {
    pub n: u64,
    pub lambda: f64,
    pub e_count: usize,
    pub b: usize,
    /// Certified sign changes.
    pub sign_changes: usize,
    pub stable: bool,
    pub l1: f64,
    /// `||F||_{L^2(T^2)} = (Σ|a|^2)^{1/2} / (2π)`.
    pub l2norm: f64,
    /// `N B^{5/2} / λ`.
    pub ratio_thm11: f64,
    /// `N / (λ (l1/||F||_2)^5)`.
    pub ratio_thm12: f64,
    pub n_over_lambda: f64,
    /// `N = 0`: the ratios carry no information.
    pub degenerate: bool,
    pub seed: Option<u64>,
}

pub fn theorem_harness(wave: &RestrictedWave<'_>, tol: f64) -> Result<TheoremRecord> {
    let eigen = wave.eigenfunction();
    let circle = eigen.circle();
    let lambda = wave.lambda();
    let len = wave.curve().length();
    let count = count_sign_changes(wave, DEFAULT_REL_TOL * len)?;
    let norms = function_norms(|s| wave.value(s), len, lambda, tol)?;
    let b = b_lambda(circle)?;
    let l2norm = torus_l2_norm(eigen.norm_sq());
    let n = count.count as f64;
    let m = norms.l1 / l2norm;
    Ok(TheoremRecord {
        n: circle.n(),
        lambda,
        e_count: circle.count(),
        b,
        sign_changes: count.count,
        stable: count.stable,
        l1: norms.l1,
        l2norm,
        ratio_thm11: n * (b as f64).powf(2.5) / lambda,
        ratio_thm12: if m > 0.0 { n / (lambda * m.powi(5)) } else { 0.0 },
        n_over_lambda: n / lambda,
        degenerate: count.count == 0,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{make_arclength, ArcLengthCurve, CurveSpec};
    use crate::lattice::{enumerate_circle, LatticePoint};
    use crate::wavefield::{make_eigenfunction, restrict, CoefficientModel};
    use proptest::prelude::*;

    /// Zeros of `√2 cos(⟨μ, γ(s)⟩ + φ)` by monotone segmentation of the phase:
    /// the phase derivative `⟨μ, γ'⟩` changes sign at most once.
    fn analytic_crossings(curve: &ArcLengthCurve, mu: LatticePoint, phase: f64) -> usize {
        let g = |s: f64| {
            let p = curve.gamma(s);
            mu.x as f64 * p[0] + mu.y as f64 * p[1] + phase
        };
        let dg = |s: f64| {
            let t = curve.frame(s).tangent;
            mu.x as f64 * t[0] + mu.y as f64 * t[1]
        };
        let l = curve.length();
        let mut cuts = std::vec![0.0];
        if dg(0.0) * dg(l) < 0.0 {
            let (mut lo, mut hi) = (0.0, l);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (dg(mid) < 0.0) == (dg(lo) < 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        cuts.push(l);
        cuts.windows(2)
            .map(|w| {
                let (a, b) = (g(w[0]), g(w[1]));
                let (lo, hi) = (a.min(b), a.max(b));
                // Odd multiples of π/2 strictly inside (lo, hi).
                let first = ((lo - PI / 2.0) / PI).floor() as i64 + 1;
                let last = ((hi - PI / 2.0) / PI).ceil() as i64 - 1;
                (last - first + 1).max(0) as usize
            })
            .sum()
    }

    fn fixture_arc() -> ArcLengthCurve {
        make_arclength(CurveSpec::circle_arc(1.0, 0.2, 1.3)).unwrap()
    }

    #[test]
    fn single_pair_matches_oracle() {
        let c = enumerate_circle(1105).unwrap();
        let curve = fixture_arc();
        for (k, &mu) in c.points().iter().enumerate().step_by(3) {
            let phase = 0.1 + 0.37 * k as f64;
            let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu, phase }).unwrap();
            let w = restrict(&f, &curve);
            let r = count_sign_changes(&w, 1e-12 * curve.length()).unwrap();
            assert!(r.stable);
            assert_eq!(r.count, analytic_crossings(&curve, mu, phase), "mu = {mu:?}");
            for b in &r.brackets {
                assert!(w.value(b.lo) * w.value(b.hi) < 0.0);
                assert!(b.hi - b.lo <= 1e-12 * curve.length());
            }
            for pair in r.brackets.windows(2) {
                assert!(pair[0].hi <= pair[1].lo);
            }
        }
    }

    #[test]
    fn tangential_zero_is_not_counted() {
        let r = count_sign_changes_in(|t| (t - 0.5).powi(2), 0.0, 1.0, 10.0, 1e-12).unwrap();
        assert_eq!(r.count, 0);
        let r = count_sign_changes_in(|t| (t - 0.5).powi(3), 0.0, 1.0, 10.0, 1e-12).unwrap();
        assert_eq!(r.count, 1);
        // A zero that falls on a grid node is still one sign change.
        let r = count_sign_changes_in(|t| t - 0.5, 0.0, 1.0, 1.0, 1e-12).unwrap();
        assert_eq!(r.count, 1);
        assert!(count_sign_changes_in(|t| t, 0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn refinement_never_decreases_count() {
        let c = enumerate_circle(5525).unwrap();
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 21 }).unwrap();
        let curve = fixture_arc();
        let w = restrict(&f, &curve);
        let coarse = count_sign_changes_in(|s| w.value(s), 0.0, curve.length(), 0.25 * w.lambda(), 1e-6).unwrap();
        let fine = count_sign_changes(&w, 1e-13).unwrap();
        assert!(fine.count >= coarse.count);
        assert!(fine.stable);
    }

    #[test]
    fn partition_properties() {
        let p = build_partition(1.0, 100.0, 10.0).unwrap();
        assert_eq!(p.len(), 11);
        let a = audit_partition(&p, 10_000);
        assert!(a.sum_error < 1e-10);
        assert!(a.max_overlap <= 2);
        assert!(a.derivative_constants[0] <= 1.0);
        assert!(a.derivative_constants[1] < 20.0 && a.derivative_constants[2] < 400.0);
        for j in 0..p.len() {
            let (lo, hi) = p.support(j);
            assert!(hi - lo <= 2.0 * p.h + 1e-15);
        }
        assert!(build_partition(1.0, 100.0, 0.5).is_err());
        assert!(build_partition(1.0, 100.0, 30.0).is_err());
    }

    #[test]
    fn partition_without_sign_changes() {
        // ⟨μ, γ⟩ stays inside (-π/2, π/2) on a tiny arc, so f > 0.
        let c = enumerate_circle(25).unwrap();
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu: LatticePoint::new(0, 5), phase: 0.0 }).unwrap();
        let curve = make_arclength(CurveSpec::CircularArc { center: [0.0, 0.0], radius: 0.2, start: -0.3, end: 0.3 }).unwrap();
        let w = restrict(&f, &curve);
        assert_eq!(count_sign_changes(&w, 1e-14).unwrap().count, 0);
        let r = partition_experiment(&w, Some(1.0), 0.25, 1e-10).unwrap();
        assert!(r.j0.is_empty());
        assert_eq!(r.j0_mass, 0.0);
        assert!(r.identity_error < 1e-9);
        let t = theorem_harness(&w, 1e-10).unwrap();
        assert!(t.degenerate && t.sign_changes == 0);
        // f = √2 cos(5 y) with |y| <= 0.2 sin 0.3 is close to its maximum √2.
        assert!(t.l1 / t.l2norm > 0.9 * 2f64.sqrt() * 2.0 * PI * curve.length());
    }

    #[test]
    fn partition_experiment_random() {
        let c = enumerate_circle(5525).unwrap();
        let f = make_eigenfunction(&c, CoefficientModel::GaussianRandom { seed: 3 }).unwrap();
        let curve = fixture_arc();
        let w = restrict(&f, &curve);
        let r = partition_experiment(&w, None, 0.25, 1e-9).unwrap();
        assert!(r.coupled && (r.c1 - 8.0).abs() < 1e-12);
        assert!(r.identity_error < 1e-7, "{}", r.identity_error);
        assert!(r.j0.len() <= 2 * r.sign_changes);
        assert!(r.j0_ratio.is_finite() && r.rest_ratio.is_finite());
        assert!(r.j0_rhs > 0.0);
    }

    #[test]
    fn partition_single_pair_j0() {
        let c = enumerate_circle(1105).unwrap();
        let mu = c.points()[5];
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu, phase: 0.3 }).unwrap();
        let curve = fixture_arc();
        let w = restrict(&f, &curve);
        let r = partition_experiment(&w, Some(4.0), 0.2, 1e-9).unwrap();
        // Oracle: a bump is in J0 iff a crossing lies in the interior of its support.
        let p = build_partition(curve.length(), w.lambda(), 4.0).unwrap();
        let zeros = count_sign_changes(&w, 1e-13).unwrap();
        let expect: Vec<usize> = (0..p.len())
            .filter(|&j| {
                let (lo, hi) = p.support(j);
                zeros.brackets.iter().any(|b| b.lo > lo && b.hi < hi)
            })
            .collect();
        assert_eq!(r.j0, expect);
        assert_eq!(r.sign_changes, analytic_crossings(&curve, mu, 0.3));
        assert!(r.sign_changes * 2 >= r.j0.len());
    }

    #[test]
    fn theorem_record_single_pair() {
        let c = enumerate_circle(25).unwrap();
        let mu = LatticePoint::new(3, 4);
        let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu, phase: 0.0 }).unwrap();
        let curve = fixture_arc();
        let t = theorem_harness(&restrict(&f, &curve), 1e-10).unwrap();
        let n = analytic_crossings(&curve, mu, 0.0);
        assert_eq!(t.sign_changes, n);
        assert!((t.l2norm - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((t.ratio_thm11 - n as f64 * (t.b as f64).powf(2.5) / 5.0).abs() < 1e-12);
        assert!((t.n_over_lambda - n as f64 / 5.0).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn single_pair_oracle_random(
            idx in 0usize..64,
            phase in 0.0..2.0 * PI,
            radius in 0.3..3.0f64,
            start in 0.0..2.0 * PI,
            span in 0.05..1.5f64,
        ) {
            let c = enumerate_circle(5525).unwrap();
            let mu = c.points()[idx % c.count()];
            let curve = make_arclength(CurveSpec::CircularArc { center: [0.4, -0.2], radius, start, end: start + span }).unwrap();
            let f = make_eigenfunction(&c, CoefficientModel::SinglePair { mu, phase }).unwrap();
            let r = count_sign_changes(&restrict(&f, &curve), 1e-12 * curve.length()).unwrap();
            prop_assert_eq!(r.count, analytic_crossings(&curve, mu, phase));
        }
    }
}
