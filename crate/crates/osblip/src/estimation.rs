//! Best linear unbiased estimation of (μ, σ) from a Type-II right-censored
//! sample, via generalized least squares on the observed order statistics.

use nalgebra::{Cholesky, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentSlice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    None,
    Log,
}

/// Ordered observed values x₁ ≤ … ≤ x_r out of a sample of size n.
#[derive(Debug, Clone, Serialize)]
pub struct CensoredSample {
    pub n: usize,
    pub r: usize,
    pub x: Vec<f64>,
    pub transform: Transform,
}

impl CensoredSample {
    pub fn new(n: usize, r: usize, x: Vec<f64>, transform: Transform) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::InvalidArgument(format!("need 1 <= r <= n, got r={r}, n={n}")));
        }
        if x.len() != r {
            return Err(Error::InvalidArgument(format!(
                "expected {r} observed values, got {}",
                x.len()
            )));
        }
        for w in x.windows(2) {
            if w[1] < w[0] {
                return Err(Error::InvalidArgument("observed values must be non-decreasing".into()));
            }
        }
        Ok(CensoredSample { n, r, x, transform })
    }

    /// Builds a sample from raw (unsorted) data: optional log transform,
    /// ascending sort, truncation at the first `r` order statistics.
    pub fn from_raw(raw: &[f64], r: usize, transform: Transform) -> Result<Self> {
        let n = raw.len();
        if transform == Transform::Log && raw.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidArgument(
                "log transform requires strictly positive data".into(),
            ));
        }
        let mut vals: Vec<f64> = match transform {
            Transform::None => raw.to_vec(),
            Transform::Log => raw.iter().map(|v| v.ln()).collect(),
        };
        vals.sort_by(|a, b| a.partial_cmp(b).expect("non-finite data"));
        if r == 0 || r > n {
            return Err(Error::InvalidArgument(format!("need 1 <= r <= n, got r={r}, n={n}")));
        }
        vals.truncate(r);
        CensoredSample::new(n, r, vals, transform)
    }
}

/// BLUEs of (μ, σ) with their variance factors (in σ² units) and the
/// scalars V₁ = 1ᵀΣ⁻¹1, V₂ = αᵀΣ⁻¹α, V₃ = 1ᵀΣ⁻¹α, Δ = V₁V₂ − V₃².
#[derive(Debug, Clone, Serialize)]
pub struct BlueResult {
    pub mu_star: f64,
    pub sigma_star: f64,
    pub var_mu: f64,
    pub var_sigma: f64,
    pub cov_mu_sigma: f64,
    pub big_delta: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

/// Scalars derived from the observed moment block alone (no data needed).
#[derive(Debug, Clone)]
pub(crate) struct GlsScalars {
    pub si_one: DVector<f64>,
    pub si_alpha: DVector<f64>,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub big_delta: f64,
}

pub(crate) fn gls_scalars(slice: &MomentSlice) -> Result<GlsScalars> {
    let chol = Cholesky::new(slice.sigma_obs.clone())
        .ok_or_else(|| Error::Numerical("observed covariance block is singular".into()))?;
    let ones = DVector::from_element(slice.r, 1.0);
    let si_one = chol.solve(&ones);
    let si_alpha = chol.solve(&slice.alpha_obs);
    let v1 = ones.dot(&si_one);
    let v2 = slice.alpha_obs.dot(&si_alpha);
    let v3 = ones.dot(&si_alpha);
    let big_delta = v1 * v2 - v3 * v3;
    if big_delta.is_nan() || big_delta <= 0.0 {
        return Err(Error::Numerical(format!(
            "degenerate GLS system: Delta = {big_delta}"
        )));
    }
    Ok(GlsScalars { si_one, si_alpha, v1, v2, v3, big_delta })
}

/// Computes the BLUEs of (μ, σ) from the observed sample.
pub fn blue(sample: &CensoredSample, slice: &MomentSlice) -> Result<BlueResult> {
    if sample.r < 2 {
        return Err(Error::InvalidArgument(
            "r >= 2 required: sigma is unidentifiable from a single order statistic".into(),
        ));
    }
    if sample.n != slice.n || sample.r != slice.r {
        return Err(Error::InvalidArgument(format!(
            "sample (n={}, r={}) does not match slice (n={}, r={})",
            sample.n, sample.r, slice.n, slice.r
        )));
    }
    let g = gls_scalars(slice)?;
    let x = DVector::from_column_slice(&sample.x);
    let ox = g.si_one.dot(&x); // 1ᵀΣ⁻¹X
    let ax = g.si_alpha.dot(&x); // αᵀΣ⁻¹X
    let mu_star = (g.v2 * ox - g.v3 * ax) / g.big_delta;
    let sigma_star = (g.v1 * ax - g.v3 * ox) / g.big_delta;
    Ok(BlueResult {
        mu_star,
        sigma_star,
        var_mu: g.v2 / g.big_delta,
        var_sigma: g.v1 / g.big_delta,
        cov_mu_sigma: -g.v3 / g.big_delta,
        big_delta: g.big_delta,
        v1: g.v1,
        v2: g.v2,
        v3: g.v3,
    })
}

/// The plug-in ratio δ̂ = μ*/σ*.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaHat {
    pub value: f64,
    /// Set when |σ*| < 1e-8·|μ*|: the ratio is numerically unstable.
    pub unstable: bool,
}

pub fn delta_hat(b: &BlueResult) -> Result<DeltaHat> {
    if b.sigma_star == 0.0 {
        return Err(Error::Numerical("delta-hat undefined: sigma* is zero".into()));
    }
    Ok(DeltaHat {
        value: b.mu_star / b.sigma_star,
        unstable: b.sigma_star.abs() < 1e-8 * b.mu_star.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Family;
    use crate::moments::{compute_moments, slice_moments, ParentModel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn exp_slice(n: usize, r: usize) -> MomentSlice {
        let ms = compute_moments(&ParentModel::closed_form(Family::Exponential), n).unwrap();
        let targets: Vec<usize> = ((r + 1)..=n).collect();
        slice_moments(&ms, r, &targets).unwrap()
    }

    #[test]
    fn exponential_n2_hand_values() {
        // Σ⁻¹ = [[5, −1], [−1, 1]] for the complete n=2 exponential sample;
        // with X = (1, 2): V₁=4, V₂=2, V₃=2, Δ=4, μ*=0.5, σ*=1.
        let ms = compute_moments(&ParentModel::closed_form(Family::Exponential), 2).unwrap();
        let slice = MomentSlice {
            n: 2,
            r: 2,
            s_indices: vec![],
            alpha_obs: ms.alpha.clone(),
            sigma_obs: ms.sigma.clone(),
            alpha_fut: nalgebra::DVector::zeros(0),
            omega: nalgebra::DMatrix::zeros(2, 0),
            omega_ff: nalgebra::DMatrix::zeros(0, 0),
        };
        let sample = CensoredSample::new(2, 2, vec![1.0, 2.0], Transform::None).unwrap();
        let b = blue(&sample, &slice).unwrap();
        assert_abs_diff_eq!(b.v1, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.v2, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.v3, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.big_delta, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.mu_star, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b.sigma_star, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.var_mu, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b.var_sigma, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.cov_mu_sigma, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn noiseless_mean_path_recovered() {
        let slice = exp_slice(6, 4);
        let (mu, sigma) = (3.2, 0.7);
        let x: Vec<f64> = (0..4).map(|i| mu + sigma * slice.alpha_obs[i]).collect();
        let sample = CensoredSample::new(6, 4, x, Transform::None).unwrap();
        let b = blue(&sample, &slice).unwrap();
        assert_abs_diff_eq!(b.mu_star, mu, epsilon = 1e-10);
        assert_abs_diff_eq!(b.sigma_star, sigma, epsilon = 1e-10);
    }

    #[test]
    fn r1_rejected() {
        let slice = exp_slice(3, 1);
        let sample = CensoredSample::new(3, 1, vec![0.5], Transform::None).unwrap();
        assert!(blue(&sample, &slice).is_err());
    }

    #[test]
    fn delta_hat_cases() {
        let base = BlueResult {
            mu_star: 0.0,
            sigma_star: 2.0,
            var_mu: 1.0,
            var_sigma: 1.0,
            cov_mu_sigma: 0.0,
            big_delta: 1.0,
            v1: 1.0,
            v2: 1.0,
            v3: 0.0,
        };
        assert_abs_diff_eq!(delta_hat(&base).unwrap().value, 0.0);
        let zero_sigma = BlueResult { sigma_star: 0.0, mu_star: 1.0, ..base.clone() };
        assert!(delta_hat(&zero_sigma).is_err());
        let tiny = BlueResult { sigma_star: 1e-12, mu_star: 1.0, ..base };
        assert!(delta_hat(&tiny).unwrap().unstable);
    }

    #[test]
    fn from_raw_sorts_and_truncates() {
        let s = CensoredSample::from_raw(&[3.0, 1.0, 2.0, 5.0], 2, Transform::None).unwrap();
        assert_eq!(s.n, 4);
        assert_eq!(s.x, vec![1.0, 2.0]);
        assert!(CensoredSample::from_raw(&[1.0, -2.0], 2, Transform::Log).is_err());
    }

    #[test]
    fn big_delta_matches_two_by_two_determinant() {
        let slice = exp_slice(8, 5);
        let g = gls_scalars(&slice).unwrap();
        let det = g.v1 * g.v2 - g.v3 * g.v3;
        assert_abs_diff_eq!(g.big_delta, det, epsilon = 1e-12);
        assert!(g.big_delta > 0.0);
    }

    proptest! {
        // blue on a + b·x returns (a + b·μ*, b·σ*) for b > 0.
        #[test]
        fn equivariance(a in -5.0f64..5.0, b in 0.1f64..4.0, shift in 0.0f64..2.0) {
            let slice = exp_slice(5, 3);
            let x = vec![0.1 + shift, 0.5 + shift, 1.3 + shift];
            let s0 = CensoredSample::new(5, 3, x.clone(), Transform::None).unwrap();
            let b0 = blue(&s0, &slice).unwrap();
            let xt: Vec<f64> = x.iter().map(|v| a + b * v).collect();
            let s1 = CensoredSample::new(5, 3, xt, Transform::None).unwrap();
            let b1 = blue(&s1, &slice).unwrap();
            let scale = b0.mu_star.abs().max(b0.sigma_star.abs()).max(1.0);
            prop_assert!((b1.mu_star - (a + b * b0.mu_star)).abs() < 1e-10 * scale * b.max(1.0));
            prop_assert!((b1.sigma_star - b * b0.sigma_star).abs() < 1e-10 * scale * b.max(1.0));
        }
    }
}
