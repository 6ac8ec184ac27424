//! Evaluation of a trial function `u(p) = Σ α_n Y0(√E|p - y_n|)` at interior points.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::assembly::Problem;
use crate::error::{Error, Result};
use crate::geometry::{interior_grid, ChargeSet, InteriorGrid, Vec2};
use crate::search::{evaluate, Sample};
use crate::special::y0_y1;

/// `u` at each point. Points on a charge are rejected.
pub fn field_values(charges: &ChargeSet, alpha: &DVector<f64>, e: f64, points: &[Vec2]) -> Result<Vec<f64>> {
    if alpha.len() != charges.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coefficients for {} charges",
            alpha.len(),
            charges.len()
        )));
    }
    if !(e > 0.0) {
        return Err(Error::InvalidParameter(format!("energy E = {e} must be positive")));
    }
    let k = e.sqrt();
    points
        .par_iter()
        .map(|p| {
            let mut u = 0.0;
            for (a, y) in alpha.iter().zip(&charges.y) {
                let r = (p - y).norm();
                if r == 0.0 {
                    return Err(Error::Domain(format!("point ({}, {}) lies on a charge", p.x, p.y)));
                }
                u += a * y0_y1(k * r).0;
            }
            Ok(u)
        })
        .collect()
}

/// A trial function sampled on the interior raster.
#[derive(Debug, Clone)]
pub struct ModeRaster {
    pub sample: Sample,
    pub grid: InteriorGrid,
    pub values: Vec<f64>,
}

/// Minimize the tension at `sqrt_e` and sample the minimizer on an `nx × nx` raster.
pub fn rasterize_mode(problem: &Problem, sqrt_e: f64, nx: usize) -> Result<ModeRaster> {
    let e = sqrt_e * sqrt_e;
    let sample = evaluate(problem, e)?;
    let grid = interior_grid(&problem.curve, nx)?;
    let points: Vec<Vec2> = grid.points.iter().map(|g| g.p).collect();
    let values = field_values(&problem.charges, &sample.alpha, e, &points)?;
    Ok(ModeRaster { sample, grid, values })
}
