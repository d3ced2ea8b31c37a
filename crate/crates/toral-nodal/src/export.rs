//! JSON files holding one eigenfunction and the curve it was restricted to.

use serde::{Deserialize, Serialize};
use toral_nodal_core::lattice::enumerate_circle;
use toral_nodal_core::wavefield::Eigenfunction;
use num_complex::Complex64;

use crate::config::{CurveConfig, SCHEMA};
use crate::error::{CliError, Result};

/// `point + t · direction` for `t_min < t < t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSegment {
    pub point: [f64; 2],
    pub direction: [f64; 2],
    pub t_min: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenfunctionFile {
    pub schema: String,
    pub n: u64,
    pub seed: Option<u64>,
    /// Lattice points in the circle's angular order.
    pub points: Vec<[i64; 2]>,
    /// `[re, im]` per point.
    pub coeffs: Vec<[f64; 2]>,
    pub curve: Option<CurveConfig>,
    pub geodesic_segment: Option<GeodesicSegment>,
}

impl EigenfunctionFile {
    pub fn new(eigen: &Eigenfunction, seed: Option<u64>) -> Self {
        Self {
            schema: SCHEMA.into(),
            n: eigen.circle().n(),
            seed,
            points: eigen.circle().points().iter().map(|p| [p.x, p.y]).collect(),
            coeffs: eigen.coeffs().iter().map(|a| [a.re, a.im]).collect(),
            curve: None,
            geodesic_segment: None,
        }
    }

    /// Rebuilds the eigenfunction, checking the points against the circle.
    pub fn to_eigenfunction(&self) -> Result<Eigenfunction> {
        if self.schema != SCHEMA {
            return Err(CliError::Config(format!("schema {:?}", self.schema)));
        }
        let circle = enumerate_circle(self.n)?;
        let expected: Vec<[i64; 2]> = circle.points().iter().map(|p| [p.x, p.y]).collect();
        if expected != self.points {
            return Err(CliError::Config(format!("points do not match the circle of n = {}", self.n)));
        }
        let coeffs = self.coeffs.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        Ok(Eigenfunction::from_coefficients(&circle, coeffs)?)
    }
}
