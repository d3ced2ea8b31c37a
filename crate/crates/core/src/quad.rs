//! Gauss–Legendre rules and composite quadrature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Node budget for adaptive quadrature.
pub const MAX_NODES: usize = 1 << 22;

/// Values that composite rules can accumulate.
pub trait Scalar:
    Copy + Default + core::ops::Add<Output = Self> + core::ops::Sub<Output = Self> + core::ops::Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Change between the last two refinements.
    pub error_estimate: f64,
    pub nodes: usize,
}

/// An `m`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes by Newton iteration on `P_m` from the Chebyshev guesses.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "a Gauss rule needs at least one node");
        let mut nodes = alloc::vec![0.0; m];
        let mut weights = alloc::vec![0.0; m];
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Sum of the rule over `panels` equal panels of `[a, b]`.
    pub fn composite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|j| {
                let lo = a + j as f64 * h;
                self.integrate(&mut f, lo, if j + 1 == panels { b } else { lo + h })
            })
            .sum()
    }
}

impl GaussRule {
    fn composite_scalar<T: Scalar, F: FnMut(f64) -> T>(&self, f: &mut F, a: f64, b: f64, panels: usize) -> T {
        let h = (b - a) / panels as f64;
        let half = h / 2.0;
        let mut acc = T::default();
        for j in 0..panels {
            let mid = a + (j as f64 + 0.5) * h;
            let mut panel = T::default();
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                panel = panel + f(mid + half * x) * *w;
            }
            acc = acc + panel * half;
        }
        acc
    }

    /// Composite rule with the panel count doubled until two successive
    /// values differ by at most `tol · max(1, |I|)`.
    pub fn adaptive<T: Scalar, F: FnMut(f64) -> T>(
        &self,
        mut f: F,
        a: f64,
        b: f64,
        tol: f64,
        min_panels: usize,
    ) -> Result<Estimate<T>> {
        let mut panels = min_panels.max(1);
        let mut prev = self.composite_scalar(&mut f, a, b, panels);
        loop {
            panels *= 2;
            let nodes = panels * self.len();
            let next = self.composite_scalar(&mut f, a, b, panels);
            let change = (next - prev).magnitude();
            if change <= tol * next.magnitude().max(1.0) {
                return Ok(Estimate { value: next, error_estimate: change, nodes });
            }
            if nodes >= MAX_NODES {
                return Err(Error::NonConvergence {
                    best: next.magnitude(),
                    nodes,
                });
            }
            prev = next;
        }
    }
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (x * p1 - p0) / (x * x - 1.0))
}
