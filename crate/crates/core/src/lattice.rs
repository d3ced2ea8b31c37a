//! Lattice points on the circle `x^2 + y^2 = n` and statistics of how they
//! cluster in short arcs.
//!
//! Every set-membership decision that can be made in integers is made in
//! integers. Angles are computed in `f64` from exact coordinates and only used
//! for window sweeps, with [`ANGLE_TOL`] resolving boundary ties toward
//! inclusion.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::TAU;
use core::ops::{Add, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Angular slack used when deciding whether a point sits on a window edge.
pub const ANGLE_TOL: f64 = 1e-12;

/// Slack on the log scale for the Cilleruelo–Córdoba product inequality.
pub const CC_LOG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub const fn norm_sq(self) -> i64 {
        self.x * self.x + self.y * self.y
    }

    pub const fn dist_sq(self, other: Self) -> i64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// `(-y, x)`.
    pub const fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub const fn dot(self, other: Self) -> i64 {
        self.x * other.x + self.y * other.y
    }

    pub const fn cross(self, other: Self) -> i64 {
        self.x * other.y - self.y * other.x
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        let a = (self.y as f64).atan2(self.x as f64);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn to_f64(self) -> [f64; 2] {
        [self.x as f64, self.y as f64]
    }

    // 0 for angles in [0, π), 1 for [π, 2π).
    fn half(self) -> u8 {
        if self.y > 0 || (self.y == 0 && self.x > 0) {
            0
        } else {
            1
        }
    }

    /// Exact comparison of polar angles in `[0, 2π)`. The origin sorts first.
    pub fn cmp_angle(self, other: Self) -> Ordering {
        self.half()
            .cmp(&other.half())
            .then_with(|| 0.cmp(&self.cross(other)))
    }
}

impl Add for LatticePoint {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for LatticePoint {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for LatticePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// The set `E_λ` of integer points on `x^2 + y^2 = n`, `λ = √n`, sorted by
/// polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCircle {
    n: u64,
    lambda: f64,
    points: Vec<LatticePoint>,
    angles: Vec<f64>,
}

impl LatticeCircle {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of `-points[i]`. Points are angle-sorted and the set is symmetric,
    /// so the antipode sits half a turn later.
    pub fn antipode_index(&self, i: usize) -> usize {
        (i + self.points.len() / 2) % self.points.len()
    }

    pub fn index_of(&self, p: LatticePoint) -> Option<usize> {
        self.points
            .binary_search_by(|q| q.cmp_angle(p))
            .ok()
            .filter(|&i| self.points[i] == p)
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        p.norm_sq() >= 0 && p.norm_sq() as u64 == self.n
    }
}

/// Integer square root if `m` is a perfect square.
pub fn exact_sqrt(m: u64) -> Option<u64> {
    let r = m.isqrt();
    (r * r == m).then_some(r)
}

/// All integer points on `x^2 + y^2 = n`, by a direct scan `0 <= x <= √n`.
pub fn enumerate_circle(n: u64) -> Result<LatticeCircle> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if n > (i64::MAX as u64) / 4 {
        return Err(Error::InvalidArgument("n too large for exact median arithmetic".into()));
    }
    let mut points = Vec::new();
    let top = n.isqrt();
    for x in 0..=top {
        if let Some(y) = exact_sqrt(n - x * x) {
            let (x, y) = (x as i64, y as i64);
            for (sx, sy) in [(x, y), (-x, y), (x, -y), (-x, -y)] {
                points.push(LatticePoint::new(sx, sy));
            }
        }
    }
    points.sort_by(|a, b| a.cmp_angle(*b).then_with(|| a.cmp(b)));
    points.dedup();
    debug_assert!(points.iter().all(|p| p.norm_sq() as u64 == n));
    let angles = points.iter().map(|p| p.angle()).collect();
    Ok(LatticeCircle {
        n,
        lambda: (n as f64).sqrt(),
        points,
        angles,
    })
}

/// `true` iff `n` is a sum of two squares (`n >= 1`).
pub fn is_sum_of_two_squares(n: u64) -> bool {
    (0..=n.isqrt()).any(|x| exact_sqrt(n - x * x).is_some())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    /// All circle points within chord distance `√λ` of the center point.
    Chord,
    /// An arc of length `c √λ`.
    Length { c: f64 },
}

/// A closed arc of the circle `|x| = λ`, described by its center angle and
/// angular half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcWindow {
    pub center_angle: f64,
    pub kind: WindowKind,
    pub half_width: f64,
}

impl ArcWindow {
    pub fn new(center_angle: f64, kind: WindowKind, lambda: f64) -> Self {
        Self {
            center_angle: wrap_angle(center_angle),
            kind,
            half_width: half_width(kind, lambda),
        }
    }

    pub fn contains_angle(&self, angle: f64) -> bool {
        angular_distance(self.center_angle, angle) <= self.half_width + ANGLE_TOL
    }

    pub fn points_in<'a>(&'a self, circle: &'a LatticeCircle) -> impl Iterator<Item = LatticePoint> + 'a {
        circle
            .points
            .iter()
            .zip(&circle.angles)
            .filter(|(_, a)| self.contains_angle(**a))
            .map(|(p, _)| *p)
    }
}

/// Angular half-width of a window on the circle of radius `lambda`.
pub fn half_width(kind: WindowKind, lambda: f64) -> f64 {
    match kind {
        WindowKind::Chord => 2.0 * (1.0 / (2.0 * lambda.sqrt())).min(1.0).asin(),
        WindowKind::Length { c } => c / (2.0 * lambda.sqrt()),
    }
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Distance between two angles on the unit circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Largest number of consecutive (angle-sorted, cyclic) points `i..i+len`
/// such that `fits(i, j)` holds for the first and last index. `fits` must be
/// monotone: shrinking a window that fits keeps it fitting.
fn sweep_consecutive(m: usize, mut fits: impl FnMut(usize, usize) -> bool) -> (usize, usize) {
    let mut best = (0, 0);
    let mut len = 1;
    for i in 0..m {
        len = len.max(1);
        while len < m && fits(i, (i + len) % m) {
            len += 1;
        }
        if len > best.0 {
            best = (len, i);
        }
        len -= 1;
    }
    best
}

/// Maximum number of points of the circle in a window of the given kind.
///
/// The maximum over continuous centers is attained by a window whose leading
/// edge touches a lattice point, so only those candidates are swept. The
/// witness is centered half a window past its leading point.
pub fn max_arc_count(circle: &LatticeCircle, kind: WindowKind) -> Result<(usize, ArcWindow)> {
    if circle.is_empty() {
        return Err(Error::EmptySet);
    }
    let lambda = circle.lambda;
    let h = half_width(kind, lambda);
    let m = circle.count();
    if 2.0 * h >= TAU - ANGLE_TOL {
        return Ok((m, ArcWindow::new(0.0, kind, lambda)));
    }
    let angles = &circle.angles;
    let (best, start) = sweep_consecutive(m, |i, j| {
        wrap_angle(angles[j] - angles[i]) <= 2.0 * h + ANGLE_TOL
    });
    Ok((best, ArcWindow::new(angles[start] + h, kind, lambda)))
}

/// `B_λ`: the chord-window maximum.
pub fn b_lambda(circle: &LatticeCircle) -> Result<usize> {
    max_arc_count(circle, WindowKind::Chord).map(|(b, _)| b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarnikAudit {
    pub max_count: usize,
    pub worst_window: ArcWindow,
    /// `max_count <= 2`.
    pub ok: bool,
}

/// Maximum number of points on an arc of length `λ^{1/3}`.
pub fn jarnik_audit(circle: &LatticeCircle) -> Result<JarnikAudit> {
    let c = circle.lambda.powf(-1.0 / 6.0);
    let (max_count, worst_window) = max_arc_count(circle, WindowKind::Length { c })?;
    Ok(JarnikAudit {
        max_count,
        worst_window,
        ok: max_count <= 2,
    })
}

/// The exponent `e(m)` of the Cilleruelo–Córdoba product bound. It is always
/// an integer: `(m/2)(m/2 - 1)` for even `m`, `(m - 1)^2 / 4` for odd `m`.
pub fn cc_exponent(m: usize) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidArgument("cc_exponent needs m >= 2".into()));
    }
    let m = m as u64;
    Ok(if m.is_multiple_of(2) {
        (m / 2) * (m / 2 - 1)
    } else {
        (m - 1) * (m - 1) / 4
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcCheck {
    pub log_lhs: f64,
    pub log_rhs: f64,
    /// Product of pairwise distances; may be `inf` when `log_lhs` is large.
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Checks `∏_{i<j} |P_i - P_j| >= λ^{e(m)}` for distinct points on circle `n`.
pub fn cc_product_check(points: &[LatticePoint], n: u64) -> Result<CcCheck> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    for p in points {
        if p.norm_sq() as u64 != n {
            return Err(Error::NotOnCircle { x: p.x, y: p.y, n });
        }
    }
    let mut log_lhs = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            let d2 = p.dist_sq(*q);
            if d2 == 0 {
                return Err(Error::DuplicatePoint(p.x, p.y));
            }
            log_lhs += 0.5 * (d2 as f64).ln();
        }
    }
    let e = cc_exponent(points.len())?;
    let log_rhs = e as f64 * 0.5 * (n as f64).ln();
    Ok(CcCheck {
        log_lhs,
        log_rhs,
        lhs: log_lhs.exp(),
        rhs: log_rhs.exp(),
        ok: log_lhs >= log_rhs - CC_LOG_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcSubsetAudit {
    pub subsets_checked: u64,
    pub violations: u64,
    /// Smallest `log_lhs - log_rhs` seen.
    pub min_log_margin: f64,
}

/// Runs the product check on every subset of size `2..=max_size`.
///
/// Pairwise log-distances are tabulated once and the subsets are walked
/// depth-first with running sums, so each subset costs `O(size)`.
pub fn cc_subset_audit(circle: &LatticeCircle, max_size: usize) -> CcSubsetAudit {
    let pts = circle.points();
    let m = pts.len();
    let mut logd = alloc::vec![0.0f64; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                logd[i * m + j] = 0.5 * (pts[i].dist_sq(pts[j]) as f64).ln();
            }
        }
    }
    let log_lambda = 0.5 * (circle.n() as f64).ln();
    let rhs: Vec<f64> = (0..=max_size.max(2))
        .map(|k| cc_exponent(k).map_or(0.0, |e| e as f64 * log_lambda))
        .collect();
    let mut audit = CcSubsetAudit {
        subsets_checked: 0,
        violations: 0,
        min_log_margin: f64::INFINITY,
    };
    let mut chosen = Vec::with_capacity(max_size);
    #[allow(clippy::too_many_arguments)]
    fn walk(
        start: usize,
        sum: f64,
        chosen: &mut Vec<usize>,
        m: usize,
        max_size: usize,
        logd: &[f64],
        rhs: &[f64],
        audit: &mut CcSubsetAudit,
    ) {
        for next in start..m {
            let add: f64 = chosen.iter().map(|&c| logd[c * m + next]).sum();
            let total = sum + add;
            chosen.push(next);
            if chosen.len() >= 2 {
                let margin = total - rhs[chosen.len()];
                audit.subsets_checked += 1;
                audit.min_log_margin = audit.min_log_margin.min(margin);
                if margin < -CC_LOG_TOL {
                    audit.violations += 1;
                }
            }
            if chosen.len() < max_size {
                walk(next + 1, total, chosen, m, max_size, logd, rhs, audit);
            }
            chosen.pop();
        }
    }
    walk(0, 0.0, &mut chosen, m, max_size, &logd, &rhs, &mut audit);
    audit
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcLogAudit {
    /// Most points in a set of diameter `< √λ / 2`.
    pub m: usize,
    /// `log λ / (2 log 2) + 1`.
    pub bound: f64,
    pub ok: bool,
}

/// Most points in any arc of diameter `< √λ/2`, against `log λ/(2 log 2) + 1`.
///
/// The diameter of consecutive points in an arc shorter than a half turn is
/// the chord between the extreme points, and `d^2 < λ/4` is decided exactly as
/// `16 d^4 < n`.
pub fn arclog_bound_audit(circle: &LatticeCircle) -> Result<ArcLogAudit> {
    if circle.n() < 4 {
        return Err(Error::InvalidArgument("arc-log audit needs λ >= 2".into()));
    }
    let bound = circle.lambda.ln() / (2.0 * core::f64::consts::LN_2) + 1.0;
    if circle.is_empty() {
        return Ok(ArcLogAudit { m: 0, bound, ok: true });
    }
    let pts = circle.points();
    let n = circle.n() as i128;
    let (m, _) = sweep_consecutive(pts.len(), |i, j| {
        let d2 = pts[i].dist_sq(pts[j]) as i128;
        // Stay short of a half turn so the extreme chord is the diameter.
        pts[i].cross(pts[j]) > 0 && 16 * d2 * d2 < n
    });
    Ok(ArcLogAudit {
        m,
        bound,
        ok: (m as f64) <= bound,
    })
}

/// Empirical `B / (c log λ)` for length windows of arc length `c √λ`.
pub fn length_window_ratio(circle: &LatticeCircle, c: f64) -> Result<f64> {
    let (b, _) = max_arc_count(circle, WindowKind::Length { c })?;
    Ok(b as f64 / (c * circle.lambda.ln()))
}
