//! Unit-speed curves with positive curvature and total curvature below `π/2`,
//! and the phase functions `φ_ξ(t) = ⟨ξ/|ξ|, γ(t)⟩`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quad::GaussRule;

/// Maximum allowed deviation of `|γ'|` from 1 in the arc-length table.
pub const SPEED_TOL: f64 = 1e-9;

const INITIAL_TABLE: usize = 256;
const MAX_TABLE: usize = 1 << 18;
const SCAN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSpec {
    /// `center + radius (cos θ, sin θ)` for θ from `start` to `end`; the arc is
    /// traversed clockwise when `end < start`.
    CircularArc {
        center: [f64; 2],
        radius: f64,
        start: f64,
        end: f64,
    },
    /// `center + (a cos t, b sin t)` for `start <= t <= end`.
    EllipseArc {
        center: [f64; 2],
        a: f64,
        b: f64,
        start: f64,
        end: f64,
    },
    /// `(Σ x_k t^k, Σ y_k t^k)` for `t0 <= t <= t1`.
    Cubic {
        x: [f64; 4],
        y: [f64; 4],
        t0: f64,
        t1: f64,
    },
}

impl CurveSpec {
    pub fn circle_arc(radius: f64, start: f64, end: f64) -> Self {
        CurveSpec::CircularArc {
            center: [0.0, 0.0],
            radius,
            start,
            end,
        }
    }

    fn param_range(&self) -> (f64, f64) {
        match *self {
            CurveSpec::CircularArc { start, end, .. } | CurveSpec::EllipseArc { start, end, .. } => {
                (start, end)
            }
            CurveSpec::Cubic { t0, t1, .. } => (t0, t1),
        }
    }

    /// `p, p', p'', p'''` at parameter `t`.
    fn derivatives(&self, t: f64) -> [[f64; 2]; 4] {
        match *self {
            CurveSpec::CircularArc {
                center,
                radius: r,
                ..
            } => {
                let (s, c) = t.sin_cos();
                [
                    [center[0] + r * c, center[1] + r * s],
                    [-r * s, r * c],
                    [-r * c, -r * s],
                    [r * s, -r * c],
                ]
            }
            CurveSpec::EllipseArc { center, a, b, .. } => {
                let (s, c) = t.sin_cos();
                [
                    [center[0] + a * c, center[1] + b * s],
                    [-a * s, b * c],
                    [-a * c, -b * s],
                    [a * s, -b * c],
                ]
            }
            CurveSpec::Cubic { x, y, .. } => {
                let poly = |c: &[f64; 4]| {
                    [
                        c[0] + t * (c[1] + t * (c[2] + t * c[3])),
                        c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]),
                        2.0 * c[2] + 6.0 * t * c[3],
                        6.0 * c[3],
                    ]
                };
                let (px, py) = (poly(&x), poly(&y));
                [[px[0], py[0]], [px[1], py[1]], [px[2], py[2]], [px[3], py[3]]]
            }
        }
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Signed curvature and its parameter derivative.
fn signed_curvature(d: &[[f64; 2]; 4]) -> (f64, f64) {
    let (p1, p2, p3) = (d[1], d[2], d[3]);
    let sp2 = dot(p1, p1);
    let sp = sp2.sqrt();
    let c = cross(p1, p2);
    let k = c / (sp2 * sp);
    let dk = (cross(p1, p3) * sp2 - 3.0 * c * dot(p1, p2)) / (sp2 * sp2 * sp);
    (k, dk)
}

/// Position, unit tangent, unit normal (`γ'' = κ n`), `κ` and `dκ/ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub gamma: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
    pub dkappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct ArcTable {
    h: f64,
    t: Vec<f64>,
    dt: Vec<f64>,
}

impl ArcTable {
    /// Hermite interpolant `t(s)` and its derivative.
    fn eval(&self, s: f64) -> (f64, f64) {
        let n = self.t.len() - 1;
        let j = ((s / self.h).floor().max(0.0) as usize).min(n - 1);
        let u = (s - j as f64 * self.h) / self.h;
        let (t0, t1) = (self.t[j], self.t[j + 1]);
        let (m0, m1) = (self.dt[j] * self.h, self.dt[j + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let t = (2.0 * u3 - 3.0 * u2 + 1.0) * t0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * t1
            + (u3 - u2) * m1;
        let dt = ((6.0 * u2 - 6.0 * u) * t0
            + (3.0 * u2 - 4.0 * u + 1.0) * m0
            + (-6.0 * u2 + 6.0 * u) * t1
            + (3.0 * u2 - 2.0 * u) * m1)
            / self.h;
        (t, dt)
    }
}

/// A curve parametrized by arc length on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcLengthCurve {
    spec: CurveSpec,
    length: f64,
    k_min: f64,
    k_max: f64,
    dk_max: f64,
    total_curvature: f64,
    /// `n = orientation · Jγ'` with `J` the rotation by `π/2`.
    orientation: f64,
    table: Option<ArcTable>,
    speed_error: f64,
}

/// Builds the unit-speed parametrization and checks the curvature contract.
pub fn make_arclength(spec: CurveSpec) -> Result<ArcLengthCurve> {
    let (t0, t1) = spec.param_range();
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidArgument("parameter range must be finite and nonempty".into()));
    }
    match spec {
        CurveSpec::CircularArc { radius, start, end, .. } => {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidArgument("radius must be positive".into()));
            }
            let total = (end - start).abs();
            if total >= FRAC_PI_2 {
                return Err(Error::TotalCurvature { total });
            }
            Ok(ArcLengthCurve {
                spec,
                length: radius * total,
                k_min: 1.0 / radius,
                k_max: 1.0 / radius,
                dk_max: 0.0,
                total_curvature: total,
                orientation: 1.0,
                table: None,
                speed_error: 0.0,
            })
        }
        CurveSpec::EllipseArc { a, b, .. } if !(a > 0.0 && b > 0.0) => {
            Err(Error::InvalidArgument("semi-axes must be positive".into()))
        }
        _ if t1 < t0 => Err(Error::InvalidArgument("parameter range must be increasing".into())),
        _ => build_parametric(spec, t0, t1),
    }
}

fn build_parametric(spec: CurveSpec, t0: f64, t1: f64) -> Result<ArcLengthCurve> {
    let dt = (t1 - t0) / SCAN as f64;
    let mut k_min = f64::INFINITY;
    let mut k_max: f64 = 0.0;
    let mut dk_max: f64 = 0.0;
    let mut sign = 0.0;
    for i in 0..=SCAN {
        let t = t0 + i as f64 * dt;
        let d = spec.derivatives(t);
        if norm(d[1]) == 0.0 {
            return Err(Error::InvalidArgument("curve has a singular point".into()));
        }
        let (k, dk) = signed_curvature(&d);
        if k == 0.0 || !k.is_finite() {
            return Err(Error::ZeroCurvature { at: t });
        }
        if sign != 0.0 && k.signum() != sign {
            return Err(Error::CurvatureSignChange { at: t });
        }
        sign = k.signum();
        k_min = k_min.min(k.abs());
        k_max = k_max.max(k.abs());
        dk_max = dk_max.max((dk / norm(d[1])).abs());
    }
    if k_min < 1e-12 * k_max {
        return Err(Error::ZeroCurvature { at: t0 });
    }
    let rule = GaussRule::new(10);
    let total = rule
        .composite(
            |t| {
                let d = spec.derivatives(t);
                cross(d[1], d[2]).abs() / dot(d[1], d[1])
            },
            t0,
            t1,
            64,
        );
    if total >= FRAC_PI_2 {
        return Err(Error::TotalCurvature { total });
    }

    // Cumulative arc length on a uniform parameter grid.
    let speed = |t: f64| norm(spec.derivatives(t)[1]);
    let panels = 1024;
    let ph = (t1 - t0) / panels as f64;
    let mut cum = Vec::with_capacity(panels + 1);
    cum.push(0.0);
    for i in 0..panels {
        let a = t0 + i as f64 * ph;
        let last = cum[i];
        cum.push(last + rule.integrate(speed, a, a + ph));
    }
    let length = cum[panels];

    let mut n = INITIAL_TABLE;
    loop {
        let table = invert_table(&spec, &rule, &cum, t0, ph, length, n);
        let err = speed_audit(&spec, &table, length);
        if err <= SPEED_TOL {
            return Ok(ArcLengthCurve {
                spec,
                length,
                k_min,
                k_max,
                dk_max,
                total_curvature: total,
                orientation: sign,
                table: Some(table),
                speed_error: err,
            });
        }
        if n >= MAX_TABLE {
            return Err(Error::NonConvergence { best: err, nodes: n });
        }
        n *= 2;
    }
}

/// Solves `S(t_j) = jL/n` by Newton's method inside the bracketing panel.
fn invert_table(
    spec: &CurveSpec,
    rule: &GaussRule,
    cum: &[f64],
    t0: f64,
    ph: f64,
    length: f64,
    n: usize,
) -> ArcTable {
    let h = length / n as f64;
    let speed = |t: f64| norm(spec.derivatives(t)[1]);
    let mut t = Vec::with_capacity(n + 1);
    let mut dt = Vec::with_capacity(n + 1);
    let mut panel = 0;
    for j in 0..=n {
        let target = if j == n { length } else { j as f64 * h };
        while panel + 1 < cum.len() - 1 && cum[panel + 1] <= target {
            panel += 1;
        }
        let a = t0 + panel as f64 * ph;
        let b = a + ph;
        let mut x = a + ph * ((target - cum[panel]) / (cum[panel + 1] - cum[panel])).clamp(0.0, 1.0);
        for _ in 0..50 {
            let s = cum[panel] + rule.integrate(speed, a, x);
            let step = (s - target) / speed(x);
            x = (x - step).clamp(a, b);
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        t.push(x);
        dt.push(1.0 / speed(x));
    }
    ArcTable { h, t, dt }
}

fn speed_audit(spec: &CurveSpec, table: &ArcTable, length: f64) -> f64 {
    let n = table.t.len() - 1;
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for q in [0.125, 0.375, 0.625, 0.875] {
            let s = (j as f64 + q) * table.h;
            if s > length {
                continue;
            }
            let (t, dtds) = table.eval(s);
            worst = worst.max((norm(spec.derivatives(t)[1]) * dtds - 1.0).abs());
        }
    }
    worst
}

impl ArcLengthCurve {
    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// `sup |κ'|` over the construction grid.
    pub fn dk_max(&self) -> f64 {
        self.dk_max
    }

    pub fn total_curvature(&self) -> f64 {
        self.total_curvature
    }

    /// Largest observed `||γ'| - 1|` of the arc-length table (0 for circles).
    pub fn speed_error(&self) -> f64 {
        self.speed_error
    }

    /// `|γ'(s)|` of the stored parametrization, which is 1 up to table error.
    pub fn speed(&self, s: f64) -> f64 {
        match &self.table {
            None => 1.0,
            Some(table) => {
                let (t, dtds) = table.eval(s.clamp(0.0, self.length));
                norm(self.spec.derivatives(t)[1]) * dtds
            }
        }
    }

    pub fn gamma(&self, s: f64) -> [f64; 2] {
        self.frame(s).gamma
    }

    /// Frenet data at arc length `s` (clamped to `[0, L]`).
    pub fn frame(&self, s: f64) -> Frame {
        let s = s.clamp(0.0, self.length);
        match (&self.spec, &self.table) {
            (
                &CurveSpec::CircularArc {
                    center,
                    radius,
                    start,
                    end,
                },
                _,
            ) => {
                let dir = if end >= start { 1.0 } else { -1.0 };
                let (sn, cs) = (start + dir * s / radius).sin_cos();
                Frame {
                    gamma: [center[0] + radius * cs, center[1] + radius * sn],
                    tangent: [-dir * sn, dir * cs],
                    normal: [-cs, -sn],
                    kappa: 1.0 / radius,
                    dkappa: 0.0,
                }
            }
            (spec, Some(table)) => {
                let (t, _) = table.eval(s);
                let d = spec.derivatives(t);
                let sp = norm(d[1]);
                let tangent = [d[1][0] / sp, d[1][1] / sp];
                let o = self.orientation;
                let (k, dk) = signed_curvature(&d);
                Frame {
                    gamma: d[0],
                    tangent,
                    normal: [-o * tangent[1], o * tangent[0]],
                    kappa: k.abs(),
                    dkappa: o * dk / sp,
                }
            }
            (_, None) => unreachable!("parametric curves always carry a table"),
        }
    }
}

/// `φ_ξ` and its first three derivatives at one point, with `α_ξ` defined by
/// `φ' = sin α`, `φ'' = κ cos α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEval {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub d3phi: f64,
    pub alpha: f64,
}

impl PhaseEval {
    /// From a frame and a unit vector `u`.
    pub fn from_frame(f: &Frame, u: [f64; 2]) -> Self {
        let ut = dot(u, f.tangent);
        let un = dot(u, f.normal);
        PhaseEval {
            phi: dot(u, f.gamma),
            dphi: ut,
            d2phi: f.kappa * un,
            d3phi: f.dkappa * un - f.kappa * f.kappa * ut,
            alpha: ut.atan2(un),
        }
    }
}

/// `ξ/|ξ|`.
pub fn unit_vector(xi: [f64; 2]) -> Result<[f64; 2]> {
    let r = norm(xi);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument("direction must be a nonzero finite vector".into()));
    }
    Ok([xi[0] / r, xi[1] / r])
}

pub fn phase(curve: &ArcLengthCurve, xi: [f64; 2], t: f64) -> Result<PhaseEval> {
    let u = unit_vector(xi)?;
    Ok(PhaseEval::from_frame(&curve.frame(t), u))
}

/// The set `{t : |φ'_ξ(t)| < 2σ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearStationary {
    pub interval: Option<(f64, f64)>,
    pub length: f64,
    /// `8σ / K_min`.
    pub bound: f64,
    pub components: usize,
}

/// Locates the near-stationary set by a dense scan with bisected endpoints.
///
/// For `σ <= 1/4` the set must be a single interval of length at most
/// `8σ/K_min`; anything else is reported as an invariant violation. Larger
/// `σ` is measured but not checked.
pub fn near_stationary_interval(curve: &ArcLengthCurve, xi: [f64; 2], sigma: f64) -> Result<NearStationary> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    let u = unit_vector(xi)?;
    let len = curve.length();
    let g = |s: f64| dot(u, curve.frame(s).tangent).abs() - 2.0 * sigma;
    let step_cap = sigma / (8.0 * curve.k_max().max(1e-300));
    let samples = ((len / step_cap).ceil() as usize).clamp(SCAN, 1 << 22);
    let h = len / samples as f64;
    let refine = |mut a: f64, mut b: f64| {
        // g(a) and g(b) have opposite signs.
        let ga = g(a) < 0.0;
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if (g(m) < 0.0) == ga {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut parts: Vec<(f64, f64)> = Vec::new();
    let mut prev_in = g(0.0) < 0.0;
    let mut open = prev_in.then_some(0.0);
    for i in 1..=samples {
        let s = if i == samples { len } else { i as f64 * h };
        let inside = g(s) < 0.0;
        if inside != prev_in {
            let edge = refine(s - h, s);
            if inside {
                open = Some(edge);
            } else if let Some(a) = open.take() {
                parts.push((a, edge));
            }
        }
        prev_in = inside;
    }
    if let Some(a) = open {
        parts.push((a, len));
    }
    let bound = 8.0 * sigma / curve.k_min();
    let length: f64 = parts.iter().map(|(a, b)| b - a).sum();
    let out = NearStationary {
        interval: match parts.as_slice() {
            [] => None,
            [first, ..] => Some((first.0, parts[parts.len() - 1].1)),
        },
        length,
        bound,
        components: parts.len(),
    };
    if sigma <= 0.25 {
        if out.components > 1 {
            return Err(Error::InvariantViolation(alloc::format!(
                "near-stationary set has {} components",
                out.components
            )));
        }
        if length > bound * (1.0 + 1e-12) {
            return Err(Error::InvariantViolation(alloc::format!(
                "near-stationary length {length} exceeds {bound}"
            )));
        }
    }
    Ok(out)
}

/// Number of sign changes of `φ''_ξ` over `samples` equally spaced points.
pub fn second_derivative_sign_changes(curve: &ArcLengthCurve, xi: [f64; 2], samples: usize) -> Result<usize> {
    let u = unit_vector(xi)?;
    let mut changes = 0;
    let mut last = 0.0;
    for i in 0..=samples {
        let s = curve.length() * i as f64 / samples as f64;
        let v = PhaseEval::from_frame(&curve.frame(s), u).d2phi;
        if v != 0.0 {
            if last != 0.0 && v.signum() != last {
                changes += 1;
            }
            last = v.signum();
        }
    }
    Ok(changes)
}
