//! Medians `z = (μ + ν)/2` of pairs of lattice points on a circle.
//!
//! A median is stored through its doubled coordinates `2z = μ + ν`, which are
//! integers, together with `4Δ(z)^2 = 4n - |2z|^2`. Every membership and
//! distance test between medians is therefore exact integer arithmetic, and
//! square roots are only taken when a value is reported.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::{b_lambda, LatticeCircle, LatticePoint};

/// Default exponent for the `λ^ε` locality cutoff.
pub const DEFAULT_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Median {
    /// `2z = μ + ν`.
    pub z2: LatticePoint,
    /// `(μ₊, μ₋)` when `z ≠ 0`; for `z = 0` the pair in increasing order.
    pub parents: (LatticePoint, LatticePoint),
    /// `4Δ(z)^2 = 4n - |2z|^2`.
    pub four_delta_sq: i64,
    pub n: u64,
}

impl Median {
    pub fn z(&self) -> [f64; 2] {
        [self.z2.x as f64 / 2.0, self.z2.y as f64 / 2.0]
    }

    pub fn norm(&self) -> f64 {
        (self.z2.norm_sq() as f64).sqrt() / 2.0
    }

    /// `Δ(z) = √(λ² - |z|²)`.
    pub fn delta(&self) -> f64 {
        (self.four_delta_sq as f64).sqrt() / 2.0
    }

    pub fn is_zero(&self) -> bool {
        self.z2 == LatticePoint::default()
    }

    /// `μ₊(z)`: the parent on the `z^⊥` side. `None` for the origin.
    pub fn mu_plus(&self) -> Option<LatticePoint> {
        (!self.is_zero()).then_some(self.parents.0)
    }

    pub fn mu_minus(&self) -> Option<LatticePoint> {
        (!self.is_zero()).then_some(self.parents.1)
    }

    /// `|z| >= λ/2` and `Δ(z) > √λ`, decided exactly.
    pub fn is_starred(&self) -> bool {
        let n = self.n as i128;
        let d = self.four_delta_sq as i128;
        self.z2.norm_sq() as i128 >= n && d * d > 16 * n
    }

    /// `0 < Δ(z) <= √λ`, decided exactly.
    pub fn in_near_circle_band(&self) -> bool {
        let d = self.four_delta_sq as i128;
        d > 0 && d * d <= 16 * self.n as i128
    }

    /// `|z - w|^2` in doubled coordinates, i.e. `4|z - w|^2`.
    pub fn dist_sq4(&self, other: &Median) -> i64 {
        self.z2.dist_sq(other.z2)
    }

    pub fn dist(&self, other: &Median) -> f64 {
        (self.dist_sq4(other) as f64).sqrt() / 2.0
    }
}

/// `Δ(z) >= m √λ`, i.e. `D >= 4 m^2 λ`, i.e. `D^2 >= 16 m^4 n` for `D = 4Δ^2`.
fn delta_at_least(four_delta_sq: i64, m: u64, n: u64) -> bool {
    let d = four_delta_sq as i128;
    let m = m as i128;
    d >= 0 && d * d >= 16 * m * m * m * m * n as i128
}

fn check_on_circle(p: LatticePoint, n: u64) -> Result<()> {
    if p.norm_sq() as u64 == n {
        Ok(())
    } else {
        Err(Error::NotOnCircle { x: p.x, y: p.y, n })
    }
}

/// The median of `μ` and `ν`, both on `x^2 + y^2 = n`.
pub fn median_map(mu: LatticePoint, nu: LatticePoint, n: u64) -> Result<Median> {
    check_on_circle(mu, n)?;
    check_on_circle(nu, n)?;
    let z2 = mu + nu;
    let four_delta_sq = 4 * n as i64 - z2.norm_sq();
    let parents = if z2 == LatticePoint::default() {
        (mu.min(nu), mu.max(nu))
    } else if (mu - nu).dot(z2.perp()) >= 0 {
        (mu, nu)
    } else {
        (nu, mu)
    };
    Ok(Median {
        z2,
        parents,
        four_delta_sq,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MedianPreimage {
    Lattice {
        plus: LatticePoint,
        minus: LatticePoint,
    },
    /// `z` is a point of the disk but not the median of two lattice points.
    NotLattice,
}

/// `μ±(z) = z ± Δ(z) z^⊥/|z^⊥|`, from doubled coordinates.
///
/// The closed form is evaluated in floating point, snapped to the nearest
/// integers and then verified exactly.
pub fn invert_median(z2: LatticePoint, n: u64) -> Result<MedianPreimage> {
    let norm_sq = z2.norm_sq();
    if norm_sq == 0 {
        return Err(Error::AmbiguousMedian);
    }
    if norm_sq > 4 * n as i64 {
        return Err(Error::OutsideDisk { norm_sq, n });
    }
    let d = 4 * n as i64 - norm_sq;
    let scale = (d as f64).sqrt() / (norm_sq as f64).sqrt();
    let perp = z2.perp();
    let snap = |sign: f64| {
        LatticePoint::new(
            ((z2.x as f64 + sign * scale * perp.x as f64) / 2.0).round() as i64,
            ((z2.y as f64 + sign * scale * perp.y as f64) / 2.0).round() as i64,
        )
    };
    let (plus, minus) = (snap(1.0), snap(-1.0));
    let side = (plus - minus).dot(perp);
    let verified = plus + minus == z2
        && plus.norm_sq() as u64 == n
        && minus.norm_sq() as u64 == n
        && (side > 0 || (d == 0 && plus == minus));
    Ok(if verified {
        MedianPreimage::Lattice { plus, minus }
    } else {
        MedianPreimage::NotLattice
    })
}

/// All medians of unordered pairs of points of one circle, `μ = ν` included.
#[derive(Debug, Clone)]
pub struct MedianSet {
    circle: LatticeCircle,
    medians: Vec<Median>,
    index: BTreeMap<LatticePoint, usize>,
}

impl MedianSet {
    pub fn circle(&self) -> &LatticeCircle {
        &self.circle
    }

    pub fn medians(&self) -> &[Median] {
        &self.medians
    }

    pub fn len(&self) -> usize {
        self.medians.len()
    }

    pub fn is_empty(&self) -> bool {
        self.medians.is_empty()
    }

    /// Index of the nonzero median with doubled coordinates `z2`.
    pub fn find(&self, z2: LatticePoint) -> Option<usize> {
        self.index.get(&z2).copied()
    }
}

/// Materializes the median set. Nonzero medians must have a unique parent
/// pair; a repeat is reported as an invariant violation.
pub fn build_median_set(circle: &LatticeCircle) -> Result<MedianSet> {
    let pts = circle.points();
    let n = circle.n();
    let mut medians = Vec::with_capacity(pts.len() * (pts.len() + 1) / 2);
    let mut index = BTreeMap::new();
    for (i, &mu) in pts.iter().enumerate() {
        for &nu in &pts[i..] {
            let m = median_map(mu, nu, n)?;
            if !m.is_zero() && index.insert(m.z2, medians.len()).is_some() {
                return Err(Error::InvariantViolation(format!(
                    "median 2z = ({}, {}) has two parent pairs",
                    m.z2.x, m.z2.y
                )));
            }
            medians.push(m);
        }
    }
    Ok(MedianSet {
        circle: circle.clone(),
        medians,
        index,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCount {
    pub count: usize,
    pub b_lambda: usize,
    pub ratio_to_b: f64,
}

/// `#{w : |μ₊(w) - v| < √λ, |w - z| < λ^{1/3}}` by direct scan.
pub fn stability_count(set: &MedianSet, z: [f64; 2], v: [f64; 2]) -> StabilityCount {
    if set.is_empty() {
        return StabilityCount {
            count: 0,
            b_lambda: 0,
            ratio_to_b: 0.0,
        };
    }
    let lambda = set.circle.lambda();
    let near_v = lambda;
    let near_z = lambda.powf(2.0 / 3.0);
    let count = set
        .medians
        .iter()
        .filter(|w| {
            let Some(mu) = w.mu_plus() else { return false };
            let dv = (mu.x as f64 - v[0]).powi(2) + (mu.y as f64 - v[1]).powi(2);
            let wz = w.z();
            let dz = (wz[0] - z[0]).powi(2) + (wz[1] - z[1]).powi(2);
            dv < near_v && dz < near_z
        })
        .count();
    let b = b_lambda(&set.circle).unwrap_or(0);
    StabilityCount {
        count,
        b_lambda: b,
        ratio_to_b: if b == 0 { 0.0 } else { count as f64 / b as f64 },
    }
}

/// Position of a starred median in the dyadic decomposition: `K = 2^k` with
/// `K√λ <= Δ < 2K√λ`, and `l` with `(K + l)√λ <= Δ < (K + l + 1)√λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ShellIndex {
    pub k: u32,
    pub l: u64,
}

impl ShellIndex {
    pub fn big_k(&self) -> u64 {
        1 << self.k
    }
}

/// Starred medians split into dyadic shells `S_K` and unit slices `S_{K,l}`.
#[derive(Debug, Clone)]
pub struct DyadicShellDecomposition {
    lambda: f64,
    epsilon: f64,
    /// Shell exponent `k` to median indices.
    shells: BTreeMap<u32, Vec<usize>>,
    sub_shells: BTreeMap<ShellIndex, Vec<usize>>,
    membership: Vec<Option<ShellIndex>>,
    near_band: Vec<usize>,
}

impl DyadicShellDecomposition {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `λ^ε`.
    pub fn locality_radius(&self) -> f64 {
        self.lambda.powf(self.epsilon)
    }

    /// `|z - w| < λ^ε` for doubled squared distance `d4 = 4|z - w|^2`.
    pub fn is_local(&self, d4: i64) -> bool {
        (d4 as f64) < 4.0 * self.lambda.powf(2.0 * self.epsilon)
    }

    pub fn shells(&self) -> &BTreeMap<u32, Vec<usize>> {
        &self.shells
    }

    pub fn shell(&self, k: u32) -> &[usize] {
        self.shells.get(&k).map_or(&[], |v| v.as_slice())
    }

    pub fn sub_shells(&self) -> &BTreeMap<ShellIndex, Vec<usize>> {
        &self.sub_shells
    }

    pub fn membership(&self, median: usize) -> Option<ShellIndex> {
        self.membership.get(median).copied().flatten()
    }

    /// All starred medians, in shell order.
    pub fn starred(&self) -> impl Iterator<Item = usize> + '_ {
        self.shells.values().flatten().copied()
    }

    /// Medians with `0 < Δ <= √λ`.
    pub fn near_band(&self) -> &[usize] {
        &self.near_band
    }
}

fn largest_m_with_delta_at_least(four_delta_sq: i64, n: u64) -> u64 {
    let guess = ((four_delta_sq as f64).sqrt() / (2.0 * (n as f64).powf(0.25))).floor() as u64;
    let mut m = guess.saturating_sub(1);
    while delta_at_least(four_delta_sq, m + 1, n) {
        m += 1;
    }
    while m > 0 && !delta_at_least(four_delta_sq, m, n) {
        m -= 1;
    }
    m
}

/// Places every starred median in exactly one `S_K` and one `S_{K,l}`.
pub fn dyadic_decompose(set: &MedianSet, epsilon: f64) -> Result<DyadicShellDecomposition> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1/2)".into()));
    }
    let n = set.circle.n();
    let mut shells: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut sub_shells: BTreeMap<ShellIndex, Vec<usize>> = BTreeMap::new();
    let mut membership = alloc::vec![None; set.len()];
    let mut near_band = Vec::new();
    for (i, m) in set.medians.iter().enumerate() {
        if m.in_near_circle_band() {
            near_band.push(i);
        }
        if !m.is_starred() {
            continue;
        }
        let r = largest_m_with_delta_at_least(m.four_delta_sq, n);
        debug_assert!(r >= 1);
        let k = 63 - r.leading_zeros();
        let idx = ShellIndex {
            k,
            l: r - (1u64 << k),
        };
        shells.entry(k).or_default().push(i);
        sub_shells.entry(idx).or_default().push(i);
        membership[i] = Some(idx);
    }
    Ok(DyadicShellDecomposition {
        lambda: set.circle.lambda(),
        epsilon,
        shells,
        sub_shells,
        membership,
        near_band,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowCount {
    pub count: usize,
    /// `count / (L B_λ)`.
    pub ratio: f64,
}

/// `#{w ∈ S_L : |w - z| < λ^ε}` by scan.
pub fn shell_window_count(
    set: &MedianSet,
    decomp: &DyadicShellDecomposition,
    z: usize,
    big_l: u64,
) -> Result<WindowCount> {
    if !big_l.is_power_of_two() {
        return Err(Error::InvalidArgument("L must be a power of two".into()));
    }
    let zm = set.medians.get(z).ok_or_else(|| Error::InvalidArgument("median index out of range".into()))?;
    let count = decomp
        .shell(big_l.trailing_zeros())
        .iter()
        .filter(|&&w| decomp.is_local(zm.dist_sq4(&set.medians[w])))
        .count();
    let b = b_lambda(&set.circle).unwrap_or(0);
    Ok(WindowCount {
        count,
        ratio: if b == 0 {
            0.0
        } else {
            count as f64 / (big_l as f64 * b as f64)
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationCase {
    /// `2K < L`: `|z - w| ≫ L^2`.
    FarShells,
    /// `K = L/2`, `l ≠ 0`: `|z - w| ≫ L l`.
    AdjacentShells,
    /// `K = L`, `|l - k| >= 2`: `|z - w| ≫ L |l - k|`.
    SameShell,
    /// `K = L/2, l = 0` or `K = L, l ∈ {k, k ± 1}`: no lower bound.
    Exceptional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationAudit {
    /// Indices after normalizing to `K <= L`: `z ∈ S_{K,k}`, `w ∈ S_{L,l}`.
    pub z: usize,
    pub w: usize,
    pub z_shell: ShellIndex,
    pub w_shell: ShellIndex,
    pub dist: f64,
    pub case: SeparationCase,
    /// The quantity the distance is compared with (`L^2`, `L l`, `L |l - k|`).
    pub lower_bound: Option<f64>,
    /// `dist / lower_bound`.
    pub ratio: Option<f64>,
    pub within_locality: bool,
}

/// Classifies a pair of starred medians and measures their separation.
pub fn median_separation_audit(
    set: &MedianSet,
    decomp: &DyadicShellDecomposition,
    z: usize,
    w: usize,
) -> Result<SeparationAudit> {
    let not_starred = || Error::InvalidArgument("both medians must be starred".into());
    let mut zs = decomp.membership(z).ok_or_else(not_starred)?;
    let mut ws = decomp.membership(w).ok_or_else(not_starred)?;
    let (mut z, mut w) = (z, w);
    if zs.k > ws.k {
        core::mem::swap(&mut zs, &mut ws);
        core::mem::swap(&mut z, &mut w);
    }
    let (zm, wm) = (&set.medians[z], &set.medians[w]);
    let d4 = zm.dist_sq4(wm);
    if d4 == 0 {
        return Err(Error::InvalidArgument("z and w coincide".into()));
    }
    let (big_k, big_l) = (zs.big_k(), ws.big_k());
    let (case, bound) = if 2 * big_k < big_l {
        (SeparationCase::FarShells, Some((big_l * big_l) as f64))
    } else if 2 * big_k == big_l && ws.l != 0 {
        (SeparationCase::AdjacentShells, Some((big_l * ws.l) as f64))
    } else if big_k == big_l && ws.l.abs_diff(zs.l) >= 2 {
        (SeparationCase::SameShell, Some((big_l * ws.l.abs_diff(zs.l)) as f64))
    } else {
        (SeparationCase::Exceptional, None)
    };
    let dist = (d4 as f64).sqrt() / 2.0;
    Ok(SeparationAudit {
        z,
        w,
        z_shell: zs,
        w_shell: ws,
        dist,
        case,
        lower_bound: bound,
        ratio: bound.map(|b| dist / b),
        within_locality: decomp.is_local(d4),
    })
}

/// Audits every pair of distinct starred medians with `|z - w| < radius`.
pub fn separation_scan(
    set: &MedianSet,
    decomp: &DyadicShellDecomposition,
    radius: f64,
) -> Vec<SeparationAudit> {
    let starred: Vec<usize> = decomp.starred().collect();
    let lim = 4.0 * radius * radius;
    let mut out = Vec::new();
    for (a, &z) in starred.iter().enumerate() {
        for &w in &starred[a + 1..] {
            let d4 = set.medians[z].dist_sq4(&set.medians[w]);
            if (d4 as f64) < lim {
                if let Ok(audit) = median_separation_audit(set, decomp, z, w) {
                    out.push(audit);
                }
            }
        }
    }
    out
}
