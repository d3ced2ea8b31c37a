//! Flat and spherical counterexamples: eigenfunctions vanishing on a closed
//! geodesic of the torus, zero-free eigenfunctions on an irrational segment,
//! and zonal harmonics through Legendre polynomials.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_circle, LatticePoint};
use crate::nodal::count_sign_changes_in;
use crate::quad::GaussRule;
use crate::wavefield::Eigenfunction;

/// Samples used by the geodesic audits.
pub const GEODESIC_SAMPLES: usize = 1000;

/// Largest prime bound accepted by [`parallel_exception_search`].
pub const MAX_PRIME_BOUND: u32 = 10_000;

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The closed geodesic `{qx - py = c}` with direction `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalGeodesic {
    pub p: i64,
    pub q: i64,
    pub c: f64,
}

impl RationalGeodesic {
    pub fn new(p: i64, q: i64, c: f64) -> Result<Self> {
        if p == 0 && q == 0 {
            return Err(Error::InvalidArgument("(p, q) must not be (0, 0)".into()));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidArgument(format!("gcd({p}, {q}) != 1")));
        }
        Ok(Self { p, q, c })
    }

    /// `t ∈ [0, 1]` runs once around the torus.
    pub fn point(&self, t: f64) -> [f64; 2] {
        let (p, q) = (self.p as f64, self.q as f64);
        let s = self.c / (p * p + q * q);
        [s * q + t * p, -s * p + t * q]
    }
}

/// `F_n(x, y) = sin n(qx - py - c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicEigenfunction {
    pub geodesic: RationalGeodesic,
    pub n: i64,
}

impl GeodesicEigenfunction {
    /// Frequency vector `n(q, -p)`.
    pub fn frequency(&self) -> LatticePoint {
        LatticePoint::new(self.n * self.geodesic.q, -self.n * self.geodesic.p)
    }

    /// `λ^2 = n^2 (p^2 + q^2)`.
    pub fn eigenvalue(&self) -> u64 {
        self.frequency().norm_sq() as u64
    }

    fn arg(&self, x: [f64; 2]) -> f64 {
        let g = &self.geodesic;
        self.n as f64 * (g.q as f64 * x[0] - g.p as f64 * x[1] - g.c)
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.arg(x).sin()
    }

    /// `∂_xx F + ∂_yy F` from the closed-form derivatives.
    pub fn laplacian(&self, x: [f64; 2]) -> f64 {
        let k = self.frequency();
        let s = self.arg(x).sin();
        -((k.x * k.x) as f64) * s - ((k.y * k.y) as f64) * s
    }

    /// The same function as an exponential sum on its lattice circle.
    pub fn to_eigenfunction(&self) -> Result<Eigenfunction> {
        let k = self.frequency();
        let circle = enumerate_circle(self.eigenvalue())?;
        let shift = self.n as f64 * self.geodesic.c;
        // sin(θ - nc) = (e^{i(θ - nc)} - e^{-i(θ - nc)}) / 2i
        let a = Complex64::from_polar(0.5, -shift) * Complex64::new(0.0, -1.0);
        let mut coeffs = alloc::vec![Complex64::zero(); circle.count()];
        let i = circle.index_of(k).ok_or(Error::InvariantViolation("frequency not on circle".into()))?;
        coeffs[i] = a;
        coeffs[circle.antipode_index(i)] = a.conj();
        Eigenfunction::from_coefficients(&circle, coeffs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicAudit {
    pub eigenvalue: u64,
    /// `max |F|` over the samples on the geodesic.
    pub max_on_geodesic: f64,
    /// Largest `|ΔF + λ^2 F| / λ^2` over samples of the torus.
    pub laplacian_residual: f64,
}

pub fn rational_geodesic_eigenfunction(
    p: i64,
    q: i64,
    c: f64,
    n: i64,
) -> Result<(GeodesicEigenfunction, GeodesicAudit)> {
    if n < 1 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let f = GeodesicEigenfunction {
        geodesic: RationalGeodesic::new(p, q, c)?,
        n,
    };
    let lam2 = f.eigenvalue() as f64;
    let mut max_on = 0.0f64;
    let mut residual = 0.0f64;
    for i in 0..GEODESIC_SAMPLES {
        let t = i as f64 / GEODESIC_SAMPLES as f64;
        max_on = max_on.max(f.value(f.geodesic.point(t)).abs());
        let x = [0.37 + 6.1 * t, 1.9 - 4.3 * t];
        residual = residual.max((f.laplacian(x) + lam2 * f.value(x)).abs() / lam2);
    }
    if max_on > 1e-12 {
        return Err(Error::InvariantViolation(format!("max |F| = {max_on} on the geodesic")));
    }
    Ok((
        f,
        GeodesicAudit {
            eigenvalue: f.eigenvalue(),
            max_on_geodesic: max_on,
            laplacian_residual: residual,
        },
    ))
}

/// A convergent `p_k/q_k` of a continued fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximant {
    pub p: i64,
    pub q: i64,
    /// Partial quotient `a_k`.
    pub a: i64,
    /// `|β - p/q|`.
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionEnd {
    Complete,
    /// The remainder fell below `1e-15`: `β` is numerically rational.
    Terminated,
    /// `1/q^2` would drop below what double precision can resolve.
    PrecisionLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    pub beta: f64,
    pub approximants: Vec<Approximant>,
    pub end: ExpansionEnd,
}

/// Convergents of `β`, starting from `a_0/1`. Denominators are strictly
/// increasing from the second convergent on.
pub fn continued_fraction_approximants(beta: f64, count: usize) -> Result<ContinuedFraction> {
    if count == 0 || !beta.is_finite() {
        return Err(Error::InvalidArgument("need count >= 1 and finite beta".into()));
    }
    let mut approximants = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = beta;
    let mut end = ExpansionEnd::Complete;
    while approximants.len() < count {
        let a = x.floor();
        if a.abs() > 1e15 {
            end = ExpansionEnd::Terminated;
            break;
        }
        let a = a as i64;
        let (p, q) = (a * p1 + p0, a * q1 + q0);
        if (q as f64) > 1e6 {
            end = ExpansionEnd::PrecisionLimit;
            break;
        }
        let error = (beta - p as f64 / q as f64).abs();
        if error >= 1.0 / (q as f64 * q as f64) {
            return Err(Error::InvariantViolation(format!("convergent {p}/{q} misses 1/q^2")));
        }
        approximants.push(Approximant { p, q, a, error });
        (p0, q0, p1, q1) = (p1, q1, p, q);
        let r = x - a as f64;
        if r < 1e-15 {
            end = ExpansionEnd::Terminated;
            break;
        }
        x = 1.0 / r;
    }
    Ok(ContinuedFraction { beta, approximants, end })
}

/// `F_k(x) = cos ⟨(p_k, q_k), x - v0⟩` on the segment `v0 + t(1, -β)`, `|t| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrrationalWitness {
    pub beta: f64,
    pub v0: [f64; 2],
    pub k: usize,
    pub approximant: Approximant,
    /// `λ_k^2 = p_k^2 + q_k^2`.
    pub eigenvalue: u64,
    /// `cos |p_k - q_k β|`, the infimum over the open segment.
    pub min_on_segment: f64,
    /// Smallest sampled value, endpoints included.
    pub sampled_min: f64,
    /// `cos(1/q_k)`.
    pub lower_bound: f64,
    /// Certified sign changes on the segment.
    pub sign_changes: usize,
}

impl IrrationalWitness {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let a = self.approximant;
        (a.p as f64 * (x[0] - self.v0[0]) + a.q as f64 * (x[1] - self.v0[1])).cos()
    }

    pub fn segment_point(&self, t: f64) -> [f64; 2] {
        [self.v0[0] + t, self.v0[1] - t * self.beta]
    }

    pub fn to_eigenfunction(&self) -> Result<Eigenfunction> {
        let a = self.approximant;
        let mu = LatticePoint::new(a.p, a.q);
        let circle = enumerate_circle(self.eigenvalue)?;
        let i = circle.index_of(mu).ok_or(Error::InvariantViolation("frequency not on circle".into()))?;
        let c = Complex64::from_polar(0.5, -(a.p as f64 * self.v0[0] + a.q as f64 * self.v0[1]));
        let mut coeffs = alloc::vec![Complex64::zero(); circle.count()];
        coeffs[i] = c;
        coeffs[circle.antipode_index(i)] = c.conj();
        Eigenfunction::from_coefficients(&circle, coeffs)
    }
}

/// Builds the `k`-th witness (1-based) and certifies that it has no zero on
/// the segment.
pub fn irrational_geodesic_witness(beta: f64, v0: [f64; 2], k: usize) -> Result<IrrationalWitness> {
    if k == 0 {
        return Err(Error::InvalidArgument("k is 1-based".into()));
    }
    let cf = continued_fraction_approximants(beta, k)?;
    let approximant = *cf.approximants.get(k - 1).ok_or(Error::InvalidArgument(format!(
        "only {} approximants available",
        cf.approximants.len()
    )))?;
    let (p, q) = (approximant.p as f64, approximant.q as f64);
    let mut w = IrrationalWitness {
        beta,
        v0,
        k,
        approximant,
        eigenvalue: (approximant.p * approximant.p + approximant.q * approximant.q) as u64,
        min_on_segment: (p - q * beta).abs().cos(),
        sampled_min: f64::INFINITY,
        lower_bound: (1.0 / q).cos(),
        sign_changes: 0,
    };
    for i in 0..=GEODESIC_SAMPLES {
        let t = -1.0 + 2.0 * i as f64 / GEODESIC_SAMPLES as f64;
        w.sampled_min = w.sampled_min.min(w.value(w.segment_point(t)));
    }
    let freq = (p * p + q * q).sqrt() * (1.0 + beta * beta).sqrt();
    w.sign_changes = count_sign_changes_in(|t| w.value(w.segment_point(t)), -1.0, 1.0, freq, 1e-12)?.count;
    if !(w.min_on_segment >= w.lower_bound && w.sampled_min >= w.lower_bound - 1e-12 && w.lower_bound > 0.0) {
        return Err(Error::InvariantViolation(format!(
            "witness {k}: min {} below cos(1/q) = {}",
            w.sampled_min.min(w.min_on_segment),
            w.lower_bound
        )));
    }
    if w.sign_changes != 0 {
        return Err(Error::InvariantViolation(format!("witness {k} has {} sign changes", w.sign_changes)));
    }
    Ok(w)
}

/// `P_ℓ(x)` by the three-term recurrence.
pub fn legendre_eval(ell: u32, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!("|x| = {} > 1", x.abs())));
    }
    Ok(legendre_unchecked(ell, x))
}

fn legendre_unchecked(ell: u32, x: f64) -> f64 {
    legendre_pair(ell, x).0
}

/// `(P_ℓ(x), P_{ℓ-1}(x))`, with `P_{-1} = 0`.
fn legendre_pair(ell: u32, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..ell {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `P_ℓ(x)` in exact arithmetic from the recurrence.
pub fn legendre_recurrence_exact(ell: u32, x: &BigRational) -> BigRational {
    let (mut prev, mut cur) = (BigRational::zero(), BigRational::one());
    for k in 0..ell {
        let k = BigRational::from_integer(BigInt::from(k));
        let one = BigRational::one();
        let two_k1 = &k + &k + &one;
        let next = (two_k1 * x * &cur - &k * &prev) / (k + one);
        prev = cur;
        cur = next;
    }
    cur
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `P_ℓ(x) = 2^{-ℓ} Σ_j (-1)^j C(ℓ, j) C(2ℓ - 2j, ℓ) x^{ℓ - 2j}` exactly.
pub fn legendre_explicit_exact(ell: u32, x: &BigRational) -> BigRational {
    let mut sum = BigRational::zero();
    for j in 0..=ell / 2 {
        let c = binomial(ell, j) * binomial(2 * ell - 2 * j, ell);
        let term = BigRational::from_integer(c) * num_traits::pow(x.clone(), (ell - 2 * j) as usize);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum / BigRational::from_integer(BigInt::one() << ell as usize)
}

/// The `ℓ` zeros of `P_ℓ`, ascending. Each lies in one interval cut out by
/// the zeros of `P_{ℓ-1}` and `±1`, and a sign change is verified there.
pub fn legendre_zeros(ell: u32) -> Result<Vec<f64>> {
    if ell == 0 {
        return Err(Error::InvalidArgument("P_0 has no zeros".into()));
    }
    let mut cuts = alloc::vec![-1.0];
    if ell > 1 {
        cuts.extend_from_slice(GaussRule::new(ell as usize - 1).nodes());
    }
    cuts.push(1.0);
    let mut zeros = Vec::with_capacity(ell as usize);
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (legendre_unchecked(ell, lo), legendre_unchecked(ell, hi));
        if flo * fhi >= 0.0 {
            return Err(Error::InvariantViolation(format!("P_{ell} has no sign change on [{lo}, {hi}]")));
        }
        let neg_lo = flo < 0.0;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (p, pm1) = legendre_pair(ell, x);
            if p == 0.0 {
                break;
            }
            if (p < 0.0) == neg_lo {
                lo = x;
            } else {
                hi = x;
            }
            let dp = ell as f64 * (x * p - pm1) / (x * x - 1.0);
            let newton = x - p / dp;
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == x || next <= lo || next >= hi {
                break;
            }
            x = next;
        }
        for c in [lo, hi] {
            if legendre_unchecked(ell, c).abs() < legendre_unchecked(ell, x).abs() {
                x = c;
            }
        }
        // Near ±1 the slope is about ℓ^2/2 and one ulp of x moves P_ℓ by more
        // than 1e-12, so the residual is also allowed two ulps of slope.
        let (p, pm1) = legendre_pair(ell, x);
        let slope = (ell as f64 * (x * p - pm1) / (x * x - 1.0)).abs();
        if p.abs() > 1e-12f64.max(2.0 * f64::EPSILON * slope) {
            return Err(Error::InvariantViolation(format!("P_{ell} residual {p} too large at {x}")));
        }
        zeros.push(x);
    }
    Ok(zeros)
}

/// Strict interlacing of the zeros of `P_ℓ` (`a`) and `P_{ℓ+1}` (`b`).
pub fn interlaces(a: &[f64], b: &[f64]) -> bool {
    b.len() == a.len() + 1 && a.iter().enumerate().all(|(i, &z)| b[i] < z && z < b[i + 1])
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distance below which `cos θ0` counts as a computed zero of `P_ℓ`.
pub const ZERO_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ExceptionReport {
    /// `θ0 = π/2`: every odd `ℓ` vanishes on the equator.
    Equator { odd_degrees: Vec<u32>, max_abs: f64 },
    /// `cos θ0` is a zero of `P_L`; values at primes `p ∈ (L + 1, P]`.
    Exceptional {
        x0: f64,
        degree: u32,
        hits: Vec<u32>,
        primes: Vec<(u32, f64)>,
        min_abs: f64,
    },
    /// `cos θ0` is not a zero of any `P_ℓ` with `ℓ <= max_degree`.
    Generic { x0: f64, max_degree: u32, min_abs: f64 },
}

/// Looks for degrees `ℓ <= max_degree` whose zonal harmonic vanishes on the
/// parallel `θ = θ0`, then checks the primes up to `prime_bound`.
pub fn parallel_exception_search(theta0: f64, max_degree: u32, prime_bound: u32) -> Result<ExceptionReport> {
    if !(theta0 > 0.0 && theta0 <= FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!("θ0 = {theta0} is outside (0, π/2]")));
    }
    if prime_bound > MAX_PRIME_BOUND || max_degree == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= max_degree and prime_bound <= {MAX_PRIME_BOUND}"
        )));
    }
    if (theta0 - FRAC_PI_2).abs() <= 1e-15 {
        let odd_degrees: Vec<u32> = (1..=max_degree).filter(|l| l % 2 == 1).collect();
        let max_abs = odd_degrees.iter().map(|&l| legendre_unchecked(l, 0.0).abs()).fold(0.0, f64::max);
        return Ok(ExceptionReport::Equator { odd_degrees, max_abs });
    }
    let x0 = theta0.cos();
    let mut hits = Vec::new();
    let mut min_abs = f64::INFINITY;
    for ell in 1..=max_degree {
        let zeros = legendre_zeros(ell)?;
        if zeros.iter().any(|z| (z - x0).abs() <= ZERO_MATCH_TOL) {
            hits.push(ell);
        } else {
            min_abs = min_abs.min(legendre_unchecked(ell, x0).abs());
        }
    }
    let Some(&degree) = hits.first() else {
        return Ok(ExceptionReport::Generic { x0, max_degree, min_abs });
    };
    let primes: Vec<(u32, f64)> = (degree + 2..=prime_bound)
        .filter(|&p| is_prime(p))
        .map(|p| (p, legendre_unchecked(p, x0).abs()))
        .collect();
    let min_abs = primes.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    if let Some(&(p, v)) = primes.iter().find(|&&(_, v)| v <= 1e-10) {
        return Err(Error::InvariantViolation(format!("|P_{p}(cos θ0)| = {v} at a prime degree")));
    }
    Ok(ExceptionReport::Exceptional { x0, degree, hits, primes, min_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_geodesic_examples() {
        let (f, a) = rational_geodesic_eigenfunction(1, 0, 0.0, 1).unwrap();
        assert_eq!(a.eigenvalue, 1);
        // sin(-y) vanishes on the x-axis.
        assert!(f.value([0.7, 0.0]).abs() < 1e-15);
        let (f, a) = rational_geodesic_eigenfunction(3, 4, 0.0, 2).unwrap();
        assert_eq!(a.eigenvalue, 100);
        assert!(a.max_on_geodesic <= 1e-12);
        assert!(a.laplacian_residual <= 1e-12);
        let e = f.to_eigenfunction().unwrap();
        assert!((e.norm_sq() - 0.5).abs() < 1e-15);
        for x in [[0.1, 0.2], [1.3, -0.4]] {
            assert!((e.evaluate(x) - f.value(x)).abs() < 1e-12);
        }
        assert!(rational_geodesic_eigenfunction(0, 0, 0.0, 1).is_err());
        assert!(rational_geodesic_eigenfunction(2, 4, 0.0, 1).is_err());
    }

    #[test]
    fn sqrt2_convergents() {
        let cf = continued_fraction_approximants(2f64.sqrt(), 6).unwrap();
        let got: Vec<(i64, i64)> = cf.approximants.iter().map(|a| (a.p, a.q)).collect();
        assert_eq!(got, [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29), (99, 70)]);
        assert!((cf.approximants[3].error - 0.002453).abs() < 1e-6);
        let golden = continued_fraction_approximants((1.0 + 5f64.sqrt()) / 2.0, 10).unwrap();
        let fib = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89];
        for (i, a) in golden.approximants.iter().enumerate() {
            assert_eq!((a.p, a.q), (fib[i + 1], fib[i]));
            assert_eq!(a.a, 1);
        }
        let r = continued_fraction_approximants(0.75, 10).unwrap();
        assert_eq!(r.end, ExpansionEnd::Terminated);
        assert_eq!(r.approximants.last().map(|a| (a.p, a.q)), Some((3, 4)));
    }

    #[test]
    fn witness_sqrt2() {
        for k in 1..=8 {
            let w = irrational_geodesic_witness(2f64.sqrt(), [0.3, -1.1], k).unwrap();
            assert_eq!(w.sign_changes, 0);
            assert!(w.min_on_segment >= w.lower_bound);
        }
        let w = irrational_geodesic_witness(2f64.sqrt(), [0.3, -1.1], 4).unwrap();
        assert_eq!((w.approximant.p, w.approximant.q), (17, 12));
        assert!(w.sampled_min >= (1.0f64 / 12.0).cos());
        assert_eq!(w.value(w.v0), 1.0);
        let e = w.to_eigenfunction().unwrap();
        let x = w.segment_point(0.4);
        assert!((e.evaluate(x) - w.value(x)).abs() < 1e-12);
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre_eval(3, 0.0).unwrap(), 0.0);
        assert!((legendre_eval(2, 0.5).unwrap() + 0.125).abs() < 1e-16);
        for l in 0..=200 {
            assert!((legendre_eval(l, 1.0).unwrap() - 1.0).abs() <= 1e-12);
        }
        assert!(legendre_eval(2, 1.5).is_err());
    }

    #[test]
    fn legendre_exact_agreement() {
        let xs = [rat(0, 1), rat(1, 2), rat(-1, 2), rat(1, 1), rat(-1, 1)];
        for l in 0..=30 {
            for x in &xs {
                let r = legendre_recurrence_exact(l, x);
                assert_eq!(r, legendre_explicit_exact(l, x), "l = {l}");
                let (xf, rf) = (x.to_f64().unwrap(), r.to_f64().unwrap());
                assert!((legendre_eval(l, xf).unwrap() - rf).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn legendre_zero_sets() {
        assert_eq!(legendre_zeros(1).unwrap(), [0.0]);
        let z = legendre_zeros(2).unwrap();
        assert!((z[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15 && (z[0] + z[1]).abs() < 1e-15);
        let z5 = legendre_zeros(5).unwrap();
        assert_eq!(z5.len(), 5);
        for i in 0..5 {
            assert!((z5[i] + z5[4 - i]).abs() < 1e-14);
        }
        let mut prev = legendre_zeros(1).unwrap();
        for l in 2..=200 {
            let z = legendre_zeros(l).unwrap();
            assert_eq!(z.len(), l as usize);
            assert!(interlaces(&prev, &z), "l = {l}");
            prev = z;
        }
    }

    #[test]
    fn exception_search_branches() {
        match parallel_exception_search(FRAC_PI_2, 21, 101).unwrap() {
            ExceptionReport::Equator { odd_degrees, max_abs } => {
                assert_eq!(odd_degrees.len(), 11);
                assert_eq!(max_abs, 0.0);
            }
            r => panic!("{r:?}"),
        }
        match parallel_exception_search((1.0 / 3f64.sqrt()).acos(), 30, 101).unwrap() {
            ExceptionReport::Exceptional { degree, primes, min_abs, .. } => {
                assert_eq!(degree, 2);
                assert_eq!(primes.first().map(|p| p.0), Some(5));
                assert!(min_abs > 1e-10);
            }
            r => panic!("{r:?}"),
        }
        assert!(matches!(
            parallel_exception_search(0.4321, 200, 101).unwrap(),
            ExceptionReport::Generic { .. }
        ));
        assert!(parallel_exception_search(2.0, 10, 101).is_err());
    }

    #[test]
    fn primes() {
        let v: Vec<u32> = (0..30).filter(|&n| is_prime(n)).collect();
        assert_eq!(v, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    proptest! {
        #[test]
        fn legendre_parity(l in 0u32..120, x in -1.0..1.0f64) {
            let a = legendre_eval(l, x).unwrap();
            let b = legendre_eval(l, -x).unwrap();
            let s = if l % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - s * b).abs() <= 1e-14);
        }

        #[test]
        fn convergent_bound(beta in 0.01..50.0f64, count in 1usize..12) {
            let cf = continued_fraction_approximants(beta, count).unwrap();
            for (i, w) in cf.approximants.windows(2).enumerate() {
                prop_assert!(w[0].q < w[1].q || (i == 0 && w[0].q == w[1].q));
            }
            for a in &cf.approximants {
                prop_assert!(a.error < 1.0 / (a.q as f64).powi(2));
            }
        }

        #[test]
        fn geodesic_vanishes(p in -9i64..10, q in -9i64..10, c in -3.0..3.0f64, n in 1i64..6) {
            prop_assume!(gcd(p, q) == 1);
            let (_, a) = rational_geodesic_eigenfunction(p, q, c, n).unwrap();
            prop_assert!(a.max_on_geodesic <= 1e-12);
            prop_assert_eq!(a.eigenvalue as i64, n * n * (p * p + q * q));
        }
    }
}
