use crate::error::{Error, Result};

use super::RadialGrid;

/// Running trapezoid integral of `samples` over the grid; `out[0] = 0`.
pub fn cumulative_trapezoid(grid: &RadialGrid, samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            actual: samples.len(),
        });
    }
    let y = grid.nodes();
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..samples.len() {
        acc += 0.5 * (y[i] - y[i - 1]) * (samples[i] + samples[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Three-point Gauss-Legendre abscissae on `[0, 1]`.
pub const GAUSS3_POINTS: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];

/// Weights matching [`GAUSS3_POINTS`], summing to 1.
pub const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Composite three-point Gauss-Legendre rule with `panels` equal panels.
pub fn gauss_composite(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        for (t, w) in GAUSS3_POINTS.iter().zip(GAUSS3_WEIGHTS) {
            acc += w * f(x0 + t * h);
        }
    }
    acc * h
}
