//! Scalar search utilities: grid-scan + golden-section maximization,
//! averaged trapezoid integration, and sign-change bisection. Generic over
//! the objective so that stubs can exercise the machinery directly.

use crate::error::{Error, Result};

const SCAN_POINTS: usize = 512;
const CROSSING_SCAN_POINTS: usize = 2048;

#[derive(Debug, Clone, Copy)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    /// The grid maximum sat on the interval boundary; the reported point
    /// is not an interior maximizer.
    pub at_boundary: bool,
}

/// Maximizes `f` on `interval` via a 512-point log-spaced scan followed by
/// golden-section refinement of the bracketing triple.
pub fn find_max<F: Fn(f64) -> Result<f64>>(f: F, interval: (f64, f64)) -> Result<Maximum> {
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi <= lo {
        return Err(Error::InvalidArgument(format!(
            "interval must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let grid = log_grid(lo, hi, SCAN_POINTS);
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    let mut vals = Vec::with_capacity(grid.len());
    for (k, &d) in grid.iter().enumerate() {
        let v = f(d)?;
        if v > best_val {
            best_val = v;
            best = k;
        }
        vals.push(v);
    }
    if best == 0 || best == grid.len() - 1 {
        return Ok(Maximum { argmax: grid[best], value: best_val, at_boundary: true });
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    // Golden-section on the bracketing interval.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while b - a > 1e-7 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    let (argmax, value) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    Ok(Maximum { argmax, value, at_boundary: false })
}

/// (1/δ_max)∫₀^{δ_max} f(δ) dδ by composite trapezoid on `points` uniform
/// panels; the δ → 0⁺ endpoint is evaluated at the first interior node.
pub fn average_over<F: Fn(f64) -> Result<f64>>(f: F, delta_max: f64, points: usize) -> Result<f64> {
    if delta_max.is_nan() || delta_max <= 0.0 {
        return Err(Error::InvalidArgument("delta_max must be positive".into()));
    }
    let h = delta_max / points as f64;
    let mut sum = 0.0;
    let mut prev = f(h)?; // limit extension at 0
    for k in 1..=points {
        let v = f(k as f64 * h)?;
        sum += 0.5 * (prev + v) * h;
        prev = v;
    }
    Ok(sum / delta_max)
}

/// All sign changes of `f` on `interval`, located on a uniform scan grid
/// and refined by bisection to 1e-6.
pub fn sign_changes<F: Fn(f64) -> Result<f64>>(f: F, interval: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo <= 0.0 || hi <= lo {
        return Err(Error::InvalidArgument(format!(
            "interval must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let step = (hi - lo) / (CROSSING_SCAN_POINTS - 1) as f64;
    let mut roots = Vec::new();
    let mut xa = lo;
    let mut fa = f(xa)?;
    for k in 1..CROSSING_SCAN_POINTS {
        let xb = lo + k as f64 * step;
        let fb = f(xb)?;
        if fa == 0.0 {
            roots.push(xa);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut a, mut b, mut va) = (xa, xb, fa);
            while b - a > 1e-6 {
                let m = 0.5 * (a + b);
                let vm = f(m)?;
                if vm == 0.0 || vm.signum() == va.signum() {
                    a = m;
                    va = vm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        xa = xb;
        fa = fb;
    }
    Ok(roots)
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (llo + (lhi - llo) * k as f64 / (points - 1) as f64).exp())
        .collect()
}
