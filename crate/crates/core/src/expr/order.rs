use std::f64::consts::TAU;

use num_complex::Complex64;

use super::ComplexExpr;
use crate::error::{Error, Result};

const RADII: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];
const ANGLES: usize = 8;
const MAX_SPREAD: f64 = 0.1;

/// Result of [`order_at`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderEstimate {
    pub order: i32,
    /// Largest distance of a per-angle slope from `order`.
    pub confidence: f64,
}

/// Estimates the order of zero (positive) or pole (negative) of a holomorphic
/// expression at `p` from the growth of `|e|` on shrinking circles.
pub fn order_at(e: &ComplexExpr, p: Complex64) -> Result<OrderEstimate> {
    if !e.is_holomorphic() {
        return Err(Error::NotHolomorphic);
    }
    let xs: Vec<f64> = RADII.iter().map(|r| r.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();

    let mut slopes = Vec::with_capacity(ANGLES);
    for k in 0..ANGLES {
        // offset keeps the rays off the coordinate axes
        let theta = TAU * k as f64 / ANGLES as f64 + 0.3;
        let dir = Complex64::from_polar(1.0, theta);
        let mut ys = Vec::with_capacity(RADII.len());
        for r in RADII {
            let v = e.eval(p + dir * r)?.norm();
            if v == 0.0 || !v.is_finite() {
                return Err(Error::InconclusiveOrder {
                    point: p,
                    confidence: f64::INFINITY,
                });
            }
            ys.push(v.ln());
        }
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        slopes.push(sxy / sxx);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let order = mean.round();
    let confidence = slopes
        .iter()
        .map(|s| (s - order).abs())
        .fold(0.0, f64::max);
    if confidence > MAX_SPREAD {
        return Err(Error::InconclusiveOrder { point: p, confidence });
    }
    Ok(OrderEstimate {
        order: order as i32,
        confidence,
    })
}
