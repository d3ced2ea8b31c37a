//! Oscillatory integrals along curves, restriction norms of eigenfunctions and
//! the Schur-test matrices over dyadic median shells.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{unit_vector, ArcLengthCurve};
use crate::error::{Error, Result};
use crate::lattice::b_lambda;
use crate::medians::{DyadicShellDecomposition, MedianSet};
use crate::quad::{Estimate, GaussRule};
use crate::wavefield::{MedianExpansion, RestrictedWave};

/// Default quadrature tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Slack for the Hölder and interpolation inequalities.
pub const HOLDER_SLACK: f64 = 1e-9;

/// Largest `#E` and `λ` for which the Fourier-side `L^2` check runs.
pub const FOURIER_CHECK_MAX_POINTS: usize = 40;
pub const FOURIER_CHECK_MAX_LAMBDA: f64 = 1e3;

const RULE_ORDER: usize = 16;

pub type QuadratureResult<T> = Estimate<T>;

/// `∫_a^b A(t) e^{ikφ(t)} dt` for a phase with `|φ'| <= 1`, starting from a
/// node spacing of at most `min((b - a)/64, 1/(4|k|))`.
pub fn integrate_oscillatory(
    phase: impl Fn(f64) -> f64,
    amplitude: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    k: f64,
    tol: f64,
) -> Result<QuadratureResult<Complex64>> {
    let rule = GaussRule::new(RULE_ORDER);
    let nodes = (64.0f64).max(4.0 * k.abs() * (b - a)).ceil() as usize;
    let panels = nodes.div_ceil(RULE_ORDER);
    rule.adaptive(
        |t| Complex64::from_polar(amplitude(t), k * phase(t)),
        a,
        b,
        tol,
        panels,
    )
}

/// `I(k) = ∫_0^L A(t) e^{ikφ_ξ(t)} dt`.
pub fn osc_integral(
    curve: &ArcLengthCurve,
    amplitude: impl Fn(f64) -> f64,
    xi: [f64; 2],
    k: f64,
    tol: f64,
) -> Result<QuadratureResult<Complex64>> {
    let u = unit_vector(xi)?;
    integrate_oscillatory(
        |s| {
            let g = curve.gamma(s);
            u[0] * g[0] + u[1] * g[1]
        },
        amplitude,
        0.0,
        curve.length(),
        k,
        tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdcRow {
    pub k: f64,
    /// `√k |I(k)|`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VdcAudit {
    pub rows: Vec<VdcRow>,
    /// Least-squares slope of `log(√k |I(k)|)` against `log k`.
    pub slope: f64,
    pub ok: bool,
}

/// Largest slope accepted by [`vdc_audit`].
pub const VDC_SLOPE_MAX: f64 = 0.05;

/// `√k |I(k)|` with unit amplitude over a grid of `k >= 1`.
pub fn vdc_audit(curve: &ArcLengthCurve, xi: [f64; 2], k_grid: &[f64], tol: f64) -> Result<VdcAudit> {
    if k_grid.is_empty() || k_grid.iter().any(|&k| !(k >= 1.0)) {
        return Err(Error::InvalidArgument("k grid must be nonempty with k >= 1".into()));
    }
    let mut rows = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let i = osc_integral(curve, |_| 1.0, xi, k, tol)?;
        rows.push(VdcRow {
            k,
            scaled: k.sqrt() * i.value.norm(),
        });
    }
    let slope = fit_slope(rows.iter().map(|r| (r.k.ln(), r.scaled.max(1e-300).ln())));
    Ok(VdcAudit {
        rows,
        slope,
        ok: slope <= VDC_SLOPE_MAX,
    })
}

/// Least-squares slope; 0 for fewer than two distinct abscissae.
pub fn fit_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Restriction norms `∫|f|`, `(∫f^2)^{1/2}`, `(∫f^4)^{1/4}` and `sup |f|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub lsup: f64,
    pub length: f64,
    pub lambda: f64,
    /// `B_λ`, or 0 when there is no circle.
    pub b: usize,
    /// `Σ a_μ conj(a_ν) ∫ e^{i⟨μ - ν, γ⟩}` when it was computed.
    pub fourier_l2_sq: Option<f64>,
}

impl NormReport {
    /// `l1/L <= (l2^2/L)^{1/2} <= (l4^4/L)^{1/4} <= lsup` and
    /// `l2 <= l1^{1/3} l4^{2/3}`, with relative slack.
    pub fn holder_defects(&self) -> [f64; 4] {
        let l = self.length;
        let chain = [
            self.l1 / l,
            (self.l2 * self.l2 / l).sqrt(),
            (self.l4.powi(4) / l).powf(0.25),
            self.lsup,
        ];
        let interp = self.l1.powf(1.0 / 3.0) * self.l4.powf(2.0 / 3.0);
        [
            chain[0] - chain[1],
            chain[1] - chain[2],
            chain[2] - chain[3],
            self.l2 - interp,
        ]
        .map(|d| d / (1.0 + chain[3]))
    }

    pub fn holder_ok(&self) -> bool {
        self.holder_defects().iter().all(|&d| d <= HOLDER_SLACK)
    }
}

/// Norms of a real function on `[0, len]` oscillating at rate at most `freq`.
pub fn function_norms(f: impl Fn(f64) -> f64, len: f64, freq: f64, tol: f64) -> Result<NormReport> {
    let rule = GaussRule::new(RULE_ORDER);
    let freq = freq.max(1.0);
    let nodes = (8.0 * freq * len).ceil().max(64.0) as usize;
    let panels = nodes.div_ceil(RULE_ORDER);
    let l2_sq = rule.adaptive(|s| f(s).powi(2), 0.0, len, tol, panels)?.value;
    let l4_4 = rule.adaptive(|s| f(s).powi(4), 0.0, len, tol, panels)?.value;

    // Grid for roots and maxima.
    let h = len / nodes as f64;
    let grid: Vec<f64> = (0..=nodes).map(|j| f(if j == nodes { len } else { j as f64 * h })).collect();
    let at = |j: usize| if j == nodes { len } else { j as f64 * h };

    let mut cuts = alloc::vec![0.0];
    for j in 0..nodes {
        let (a, b) = (grid[j], grid[j + 1]);
        if a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
            let (mut lo, mut hi) = (at(j), at(j + 1));
            let neg_lo = a < 0.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let v = f(mid);
                if v == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (v < 0.0) == neg_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
    }
    cuts.push(len);
    let mut l1 = 0.0;
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            l1 += rule.adaptive(|s| f(s).abs(), w[0], w[1], tol, 1)?.value;
        }
    }

    let grid_max = grid.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lsup = grid_max;
    for j in 0..=nodes {
        let v = grid[j].abs();
        let left = if j > 0 { grid[j - 1].abs() } else { 0.0 };
        let right = if j < nodes { grid[j + 1].abs() } else { 0.0 };
        if v >= left && v >= right && v >= 0.5 * grid_max {
            lsup = lsup.max(golden_max(|s| f(s).abs(), (at(j) - h).max(0.0), (at(j) + h).min(len)));
        }
    }
    let report = NormReport {
        l1,
        l2: l2_sq.max(0.0).sqrt(),
        l4: l4_4.max(0.0).powf(0.25),
        lsup,
        length: len,
        lambda: freq,
        b: 0,
        fourier_l2_sq: None,
    };
    if !report.holder_ok() {
        return Err(Error::InvariantViolation(format!(
            "Hölder chain fails: defects {:?}",
            report.holder_defects()
        )));
    }
    Ok(report)
}

fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    let mut best = g(a).max(g(b)).max(gc).max(gd);
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
        best = best.max(gc).max(gd);
    }
    best
}

/// `Σ_{μ,ν} a_μ conj(a_ν) ∫ e^{i⟨μ - ν, γ⟩}` by oscillatory quadrature.
pub fn fourier_l2_sq(wave: &RestrictedWave<'_>, tol: f64) -> Result<f64> {
    let eigen = wave.eigenfunction();
    let curve = wave.curve();
    let pts = eigen.circle().points();
    let a = eigen.coeffs();
    let mut acc = curve.length() * eigen.norm_sq();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i] - pts[j];
            let k = (d.norm_sq() as f64).sqrt();
            let integral = osc_integral(curve, |_| 1.0, [d.x as f64, d.y as f64], k, tol)?.value;
            acc += 2.0 * (a[i] * a[j].conj() * integral).re;
        }
    }
    Ok(acc)
}

/// Norms of `f = F∘γ`, with the Fourier-side cross-check of `∫ f^2` on small
/// circles.
pub fn restriction_norms(wave: &RestrictedWave<'_>, tol: f64) -> Result<NormReport> {
    let lambda = wave.lambda();
    let mut report = function_norms(|s| wave.value(s), wave.curve().length(), lambda, tol)?;
    report.lambda = lambda;
    report.b = b_lambda(wave.eigenfunction().circle())?;
    let e = wave.eigenfunction().circle().count();
    if e <= FOURIER_CHECK_MAX_POINTS && lambda <= FOURIER_CHECK_MAX_LAMBDA {
        let fourier = fourier_l2_sq(wave, tol * 1e-2)?;
        let direct = report.l2 * report.l2;
        if (fourier - direct).abs() > 1e-6 * direct.abs().max(1e-12) {
            return Err(Error::InvariantViolation(format!(
                "Fourier-side l2^2 {fourier} disagrees with quadrature {direct}"
            )));
        }
        report.fourier_l2_sq = Some(fourier);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Ratio {
    /// `∫ f^2 / (L Σ|a_μ|^2)`.
    pub rho: f64,
    /// `#E`, which `ρ` cannot exceed.
    pub cap: f64,
}

pub fn l2_ratio(wave: &RestrictedWave<'_>, tol: f64) -> Result<L2Ratio> {
    let curve = wave.curve();
    let rule = GaussRule::new(RULE_ORDER);
    let nodes = (8.0 * wave.lambda().max(1.0) * curve.length()).ceil().max(64.0) as usize;
    let l2_sq = rule
        .adaptive(|s| wave.value(s).powi(2), 0.0, curve.length(), tol, nodes.div_ceil(RULE_ORDER))?
        .value;
    let eigen = wave.eigenfunction();
    let rho = l2_sq / (curve.length() * eigen.norm_sq());
    let cap = eigen.circle().count() as f64;
    if rho > cap * (1.0 + 1e-9) {
        return Err(Error::InvariantViolation(format!("l2 ratio {rho} exceeds #E = {cap}")));
    }
    Ok(L2Ratio { rho, cap })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L4VsB {
    pub l4_4: f64,
    pub b: usize,
    pub ratio: f64,
}

pub fn l4_vs_b(wave: &RestrictedWave<'_>, tol: f64) -> Result<L4VsB> {
    let curve = wave.curve();
    let rule = GaussRule::new(RULE_ORDER);
    let nodes = (8.0 * wave.lambda().max(1.0) * curve.length()).ceil().max(64.0) as usize;
    let l4_4 = rule
        .adaptive(|s| wave.value(s).powi(4), 0.0, curve.length(), tol, nodes.div_ceil(RULE_ORDER))?
        .value;
    let b = b_lambda(wave.eigenfunction().circle())?;
    let ratio = l4_4 / b as f64;
    if !ratio.is_finite() {
        return Err(Error::InvariantViolation("l4^4 / B is not finite".into()));
    }
    Ok(L4VsB { l4_4, b, ratio })
}

/// `A_{K,L}` as a sparse matrix from `C^{S_K}` to `C^{S_L}`: the column of
/// `z ∈ S_K` holds `1/|z - w|_+^{1/2}` at the rows `w ∈ S_L` with
/// `|z - w| < λ^ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurBlock {
    pub k: u32,
    pub l: u32,
    /// Median indices of `S_K`, one per column.
    pub columns: Vec<usize>,
    /// Median indices of `S_L`, one per row.
    pub rows: Vec<usize>,
    /// `(column position, row position, entry)`.
    pub entries: Vec<(usize, usize, f64)>,
}

impl SchurBlock {
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = alloc::vec![alloc::vec![0.0; self.columns.len()]; self.rows.len()];
        for &(c, r, v) in &self.entries {
            m[r][c] = v;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurFamily {
    pub lambda: f64,
    pub epsilon: f64,
    pub b_lambda: usize,
    /// Keyed by the shell exponents `(k, l)` of `K = 2^k`, `L = 2^l`.
    pub blocks: BTreeMap<(u32, u32), SchurBlock>,
}

/// `|z - w|_+^{-1/2}` from the doubled squared distance `d4 = 4|z - w|^2`.
pub fn schur_entry(d4: i64) -> f64 {
    let d = (d4 as f64).sqrt() / 2.0;
    1.0 / d.max(1.0).sqrt()
}

/// Materializes every `A_{K,L}` over the occupied shells.
pub fn schur_family(set: &MedianSet, decomp: &DyadicShellDecomposition) -> Result<SchurFamily> {
    let medians = set.medians();
    let mut blocks = BTreeMap::new();
    for (&k, zs) in decomp.shells() {
        for (&l, ws) in decomp.shells() {
            let mut entries = Vec::new();
            for (c, &z) in zs.iter().enumerate() {
                for (r, &w) in ws.iter().enumerate() {
                    let d4 = medians[z].dist_sq4(&medians[w]);
                    if decomp.is_local(d4) {
                        entries.push((c, r, schur_entry(d4)));
                    }
                }
            }
            blocks.insert(
                (k, l),
                SchurBlock {
                    k,
                    l,
                    columns: zs.clone(),
                    rows: ws.clone(),
                    entries,
                },
            );
        }
    }
    Ok(SchurFamily {
        lambda: decomp.lambda(),
        epsilon: decomp.epsilon(),
        b_lambda: b_lambda(set.circle())?,
        blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurNorms {
    pub k: u32,
    pub l: u32,
    /// Largest column sum, `||A_{K,L}||_{1→1}`.
    pub norm1to1: f64,
    /// Largest row sum, `||A_{K,L}^*||_{1→1}`.
    pub norm_adj1to1: f64,
    /// `norm1to1 · norm_adj1to1`.
    pub bound_sq: f64,
    /// `bound_sq^{1/2}`, Schur's bound on `||A_{K,L}||_{2→2}`.
    pub bound2to2: f64,
    /// `norm1to1 / B_λ`.
    pub ratio_column: f64,
    /// `norm_adj1to1 · L / (K B_λ)`.
    pub ratio_row: f64,
}

pub fn block_norms(block: &SchurBlock, b: usize) -> SchurNorms {
    let mut cols = alloc::vec![0.0; block.columns.len()];
    let mut rows = alloc::vec![0.0; block.rows.len()];
    for &(c, r, v) in &block.entries {
        cols[c] += v;
        rows[r] += v;
    }
    let norm1to1 = cols.iter().fold(0.0f64, |m, &v| m.max(v));
    let norm_adj1to1 = rows.iter().fold(0.0f64, |m, &v| m.max(v));
    let bound_sq = norm1to1 * norm_adj1to1;
    let (big_k, big_l) = ((1u64 << block.k) as f64, (1u64 << block.l) as f64);
    let b = b.max(1) as f64;
    SchurNorms {
        k: block.k,
        l: block.l,
        norm1to1,
        norm_adj1to1,
        bound_sq,
        bound2to2: bound_sq.sqrt(),
        ratio_column: norm1to1 / b,
        ratio_row: norm_adj1to1 * big_l / (big_k * b),
    }
}

/// Norms of the blocks with `K <= L`.
pub fn schur_norms(fam: &SchurFamily) -> Vec<SchurNorms> {
    fam.blocks
        .values()
        .filter(|b| b.k <= b.l)
        .map(|b| block_norms(b, fam.b_lambda))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearFormBound {
    /// Starred double sum, computed block by block.
    pub lhs_blocked: f64,
    /// Starred double sum, computed by a flat scan.
    pub lhs_flat: f64,
    /// `B_λ ||b||^2`.
    pub rhs: f64,
    pub ratio: f64,
    /// The same double sum over `0 < Δ(z), Δ(w) <= √λ`.
    pub g0_lhs: f64,
    pub g0_ratio: f64,
    /// `λ^{-ε/2} ||b||^2 #Z`, the cost of the locality cutoff.
    pub truncation: f64,
}

/// `Σ |b_z b_w| / |z - w|_+^{1/2}` over local pairs, with `b` aligned with
/// `set.medians()`.
pub fn bilinear_form_bound(
    b: &[f64],
    set: &MedianSet,
    decomp: &DyadicShellDecomposition,
    fam: &SchurFamily,
) -> Result<BilinearFormBound> {
    if b.len() != set.len() {
        return Err(Error::InvalidArgument("coefficient vector must match the median set".into()));
    }
    let medians = set.medians();
    let mut lhs_blocked = 0.0;
    for block in fam.blocks.values() {
        for &(c, r, v) in &block.entries {
            lhs_blocked += b[block.columns[c]].abs() * b[block.rows[r]].abs() * v;
        }
    }
    let local_sum = |idx: &[usize]| {
        let mut acc = 0.0;
        for &z in idx {
            for &w in idx {
                let d4 = medians[z].dist_sq4(&medians[w]);
                if decomp.is_local(d4) {
                    acc += b[z].abs() * b[w].abs() * schur_entry(d4);
                }
            }
        }
        acc
    };
    let starred: Vec<usize> = (0..set.len()).filter(|&i| medians[i].is_starred()).collect();
    let lhs_flat = local_sum(&starred);
    let g0_lhs = local_sum(decomp.near_band());
    let norm_sq: f64 = b.iter().map(|v| v * v).sum();
    let rhs = fam.b_lambda as f64 * norm_sq;
    if (lhs_blocked - lhs_flat).abs() > 1e-12 * lhs_flat.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "blocked sum {lhs_blocked} differs from flat sum {lhs_flat}"
        )));
    }
    let ratio = |x: f64| if rhs > 0.0 { x / rhs } else { 0.0 };
    Ok(BilinearFormBound {
        lhs_blocked,
        lhs_flat,
        rhs,
        ratio: ratio(lhs_flat),
        g0_lhs,
        g0_ratio: ratio(g0_lhs),
        truncation: fam.lambda.powf(-fam.epsilon / 2.0) * norm_sq * set.len() as f64,
    })
}

/// `|b_z|` aligned with `set.medians()` from a median expansion.
pub fn coefficients_from_expansion(set: &MedianSet, expansion: &MedianExpansion) -> Result<Vec<f64>> {
    let mut b = alloc::vec![0.0; set.len()];
    for (m, v) in &expansion.bz {
        let i = set
            .find(m.z2)
            .ok_or_else(|| Error::InvalidArgument("expansion median is not in the set".into()))?;
        b[i] = v.norm();
    }
    Ok(b)
}
