// SPDX-License-Identifier: Apache-2.0

use crate::{Error, Result};

/// Ordinary least-squares line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope. `None` with only two points.
    pub slope_std: Option<f64>,
    pub r_squared: f64,
}

/// Fits a line through `(x, y)` pairs. Needs at least two points with
/// distinct abscissae.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData("linear fit needs at least 2 points"));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::SingularFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse = points
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let slope_std = (points.len() > 2).then(|| libm::sqrt(sse / (n - 2.0) / sxx));
    Ok(LinearFit {
        slope,
        intercept,
        slope_std,
        r_squared,
    })
}
