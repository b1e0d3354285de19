//! Means and covariances of standardized order statistics.
//!
//! For a sample of size n from a standardized parent, `MomentSet` holds
//! α_i = E[Z_{i:n}] and Σ_ij = Cov(Z_{i:n}, Z_{j:n}). Three engines are
//! available: closed forms (exponential, uniform), adaptive Gauss–Legendre
//! quadrature over the quantile-transformed u-domain, and Monte Carlo.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::family::Family;
use crate::quadrature::integrate;

pub const MAX_QUADRATURE_N: usize = 200;
pub const DEFAULT_QUAD_REL_TOL: f64 = 1e-8;
pub const DEFAULT_MC_REPS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl MomentMethod {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "closed_form" | "closed-form" | "closed" => Ok(MomentMethod::ClosedForm),
            "quadrature" | "quad" => Ok(MomentMethod::Quadrature),
            "monte_carlo" | "monte-carlo" | "mc" => Ok(MomentMethod::MonteCarlo),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MomentMethod::ClosedForm => "closed_form",
            MomentMethod::Quadrature => "quadrature",
            MomentMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// Identifies the parent distribution and the moment engine.
#[derive(Debug, Clone)]
pub struct ParentModel {
    pub family: Family,
    pub method: MomentMethod,
    pub quad_rel_tol: f64,
    pub mc_reps: u64,
    pub mc_seed: u64,
}

impl ParentModel {
    pub fn closed_form(family: Family) -> Self {
        Self::new(family, MomentMethod::ClosedForm)
    }

    pub fn quadrature(family: Family) -> Self {
        Self::new(family, MomentMethod::Quadrature)
    }

    pub fn monte_carlo(family: Family, reps: u64, seed: u64) -> Self {
        let mut m = Self::new(family, MomentMethod::MonteCarlo);
        m.mc_reps = reps;
        m.mc_seed = seed;
        m
    }

    fn new(family: Family, method: MomentMethod) -> Self {
        ParentModel {
            family,
            method,
            quad_rel_tol: DEFAULT_QUAD_REL_TOL,
            mc_reps: DEFAULT_MC_REPS,
            mc_seed: 0,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.quad_rel_tol = tol;
        self
    }
}

/// How a `MomentSet` was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub family: String,
    pub method: MomentMethod,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

/// Full-sample standardized order-statistic moments.
#[derive(Debug, Clone)]
pub struct MomentSet {
    pub n: usize,
    pub alpha: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub provenance: Provenance,
    /// Standard errors of alpha entries, Monte Carlo provenance only.
    pub alpha_se: Option<DVector<f64>>,
    /// Standard errors of sigma entries, Monte Carlo provenance only.
    pub sigma_se: Option<DMatrix<f64>>,
    /// Warning-level invariant findings (never fatal).
    pub warnings: Vec<String>,
}

impl MomentSet {
    pub fn new(
        n: usize,
        alpha: DVector<f64>,
        sigma: DMatrix<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut ms = MomentSet {
            n,
            alpha,
            sigma,
            provenance,
            alpha_se: None,
            sigma_se: None,
            warnings: Vec::new(),
        };
        ms.validate()?;
        Ok(ms)
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidArgument("sample size n must be >= 1".into()));
        }
        if self.alpha.len() != n || self.sigma.nrows() != n || self.sigma.ncols() != n {
            return Err(Error::InvariantViolation(format!(
                "dimension mismatch: n={n}, alpha={}, sigma={}x{}",
                self.alpha.len(),
                self.sigma.nrows(),
                self.sigma.ncols()
            )));
        }
        for i in 1..n {
            // NaN must also fail, hence the non-negated comparison.
            if self.alpha[i].partial_cmp(&self.alpha[i - 1]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvariantViolation(format!(
                    "alpha not strictly increasing at index {i}"
                )));
            }
        }
        // Symmetry, then symmetrize residual round-off.
        let scale = self.sigma.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.sigma[(i, j)] - self.sigma[(j, i)]).abs() > 1e-8 * scale.max(1.0) {
                    return Err(Error::InvariantViolation(format!(
                        "sigma not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let sym = (&self.sigma + self.sigma.transpose()) * 0.5;
        self.sigma = sym;

        for i in 0..n {
            for j in 0..n {
                if self.sigma[(i, j)].is_nan() || self.sigma[(i, j)] <= 0.0 {
                    return Err(Error::InvariantViolation(format!(
                        "sigma entry ({i}, {j}) = {} not positive",
                        self.sigma[(i, j)]
                    )));
                }
            }
        }

        // Positive definiteness; Monte Carlo results may be nudged.
        if Cholesky::new(self.sigma.clone()).is_none() {
            if self.provenance.method == MomentMethod::MonteCarlo {
                let mut eps = 1e-10 * self.sigma.trace() / n as f64;
                let mut fixed = false;
                for _ in 0..4 {
                    let nudged = &self.sigma + DMatrix::identity(n, n) * eps;
                    if Cholesky::new(nudged.clone()).is_some() {
                        self.sigma = nudged;
                        self.warnings
                            .push(format!("sigma nudged by {eps:.3e}*I to restore positive definiteness"));
                        fixed = true;
                        break;
                    }
                    eps *= 2.0;
                }
                if !fixed {
                    return Err(Error::InvariantViolation(
                        "sigma not positive definite after nudging".into(),
                    ));
                }
            } else {
                return Err(Error::InvariantViolation("sigma not positive definite".into()));
            }
        }

        // Row decay away from the diagonal: warning for Monte Carlo, hard
        // (with round-off slack) otherwise.
        let slack = 1e-9 * scale.max(1.0);
        for i in 0..n {
            for j in i..n.saturating_sub(1) {
                let lhs = self.sigma[(i, j + 1)];
                let rhs = self.sigma[(i, j)];
                if lhs > rhs + slack {
                    let msg = format!("covariance row decay violated at ({i}, {j}) -> ({i}, {})", j + 1);
                    if self.provenance.method == MomentMethod::MonteCarlo {
                        self.warnings.push(msg);
                    } else {
                        return Err(Error::InvariantViolation(msg));
                    }
                }
            }
        }
        Ok(())
    }

    /// trace(Σ) + Σᵢ αᵢ² − n·E[Z²], zero in exact arithmetic.
    pub fn moment_identity_residual(&self, family: &Family) -> Option<f64> {
        let ez2 = family.second_moment()?;
        let total = self.sigma.trace() + self.alpha.iter().map(|a| a * a).sum::<f64>();
        Some(total - self.n as f64 * ez2)
    }
}

/// The (observed, future) block partition used by the predictor formulas.
#[derive(Debug, Clone)]
pub struct MomentSlice {
    pub n: usize,
    pub r: usize,
    pub s_indices: Vec<usize>,
    pub alpha_obs: DVector<f64>,
    pub sigma_obs: DMatrix<f64>,
    /// α values at the future indices, ordered as `s_indices`.
    pub alpha_fut: DVector<f64>,
    /// r×ℓ matrix, column k = ω_{s_k}.
    pub omega: DMatrix<f64>,
    /// ℓ×ℓ future-future covariance block.
    pub omega_ff: DMatrix<f64>,
}

impl MomentSlice {
    pub fn ell(&self) -> usize {
        self.s_indices.len()
    }

    /// Column of `omega` for target index `s` (1-based order-statistic index).
    pub fn omega_col(&self, s: usize) -> Result<DVector<f64>> {
        let k = self.target_pos(s)?;
        Ok(self.omega.column(k).into_owned())
    }

    pub fn target_pos(&self, s: usize) -> Result<usize> {
        self.s_indices
            .iter()
            .position(|&t| t == s)
            .ok_or_else(|| Error::InvalidArgument(format!("target {s} not in slice")))
    }
}

/// Computes the full-sample moments for the given model.
pub fn compute_moments(model: &ParentModel, n: usize) -> Result<MomentSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    match model.method {
        MomentMethod::ClosedForm => closed_form_moments(&model.family, n),
        MomentMethod::Quadrature => {
            if n > MAX_QUADRATURE_N {
                return Err(Error::InvalidArgument(format!(
                    "quadrature supports n <= {MAX_QUADRATURE_N}, got {n}"
                )));
            }
            quadrature_moments(&model.family, n, model.quad_rel_tol)
        }
        MomentMethod::MonteCarlo => {
            crate::mc::empirical_moments(&model.family, n, model.mc_reps, model.mc_seed)
        }
    }
}

/// Extracts the observed/future sub-blocks for censoring index `r` and
/// future targets `s_indices` (1-based, strictly increasing, all > r).
pub fn slice_moments(ms: &MomentSet, r: usize, s_indices: &[usize]) -> Result<MomentSlice> {
    let n = ms.n;
    if r == 0 || r >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= r < n, got r={r}, n={n}")));
    }
    if s_indices.is_empty() {
        return Err(Error::InvalidArgument("at least one future index required".into()));
    }
    for w in s_indices.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument(
                "future indices must be strictly increasing (duplicates rejected)".into(),
            ));
        }
    }
    if s_indices[0] <= r {
        return Err(Error::InvalidArgument(format!(
            "future indices must exceed r={r}, got {}",
            s_indices[0]
        )));
    }
    if *s_indices.last().unwrap() > n {
        return Err(Error::InvalidArgument(format!(
            "future index {} exceeds n={n}",
            s_indices.last().unwrap()
        )));
    }
    let ell = s_indices.len();
    let alpha_obs = DVector::from_fn(r, |i, _| ms.alpha[i]);
    let sigma_obs = DMatrix::from_fn(r, r, |i, j| ms.sigma[(i, j)]);
    let alpha_fut = DVector::from_fn(ell, |k, _| ms.alpha[s_indices[k] - 1]);
    let omega = DMatrix::from_fn(r, ell, |i, k| ms.sigma[(i, s_indices[k] - 1)]);
    let omega_ff = DMatrix::from_fn(ell, ell, |k, l| ms.sigma[(s_indices[k] - 1, s_indices[l] - 1)]);
    if Cholesky::new(sigma_obs.clone()).is_none() {
        return Err(Error::InvariantViolation("observed block not positive definite".into()));
    }
    Ok(MomentSlice {
        n,
        r,
        s_indices: s_indices.to_vec(),
        alpha_obs,
        sigma_obs,
        alpha_fut,
        omega,
        omega_ff,
    })
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

fn closed_form_moments(family: &Family, n: usize) -> Result<MomentSet> {
    let provenance = Provenance {
        family: family.name(),
        method: MomentMethod::ClosedForm,
        tolerance: None,
        seed: None,
    };
    match family {
        Family::Exponential => {
            // α_i = Σ_{k<=i} 1/(n−k+1); σ_ij = Σ_{k<=min(i,j)} 1/(n−k+1)².
            let mut alpha = DVector::zeros(n);
            let mut diag_partial = vec![0.0; n];
            let mut a = 0.0;
            let mut v = 0.0;
            for i in 0..n {
                let d = (n - i) as f64;
                a += 1.0 / d;
                v += 1.0 / (d * d);
                alpha[i] = a;
                diag_partial[i] = v;
            }
            let sigma = DMatrix::from_fn(n, n, |i, j| diag_partial[i.min(j)]);
            MomentSet::new(n, alpha, sigma, provenance)
        }
        Family::Uniform => {
            let np1 = (n + 1) as f64;
            let alpha = DVector::from_fn(n, |i, _| (i + 1) as f64 / np1);
            let sigma = DMatrix::from_fn(n, n, |i, j| {
                let (lo, hi) = if i <= j { (i + 1, j + 1) } else { (j + 1, i + 1) };
                lo as f64 * (n + 1 - hi) as f64 / (np1 * np1 * (n + 2) as f64)
            });
            MomentSet::new(n, alpha, sigma, provenance)
        }
        other => Err(Error::Unsupported(format!(
            "closed-form moments not available for family '{}'",
            other.name()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Quadrature over the quantile-transformed u-domain
// ---------------------------------------------------------------------------

/// exp(Σ c_k · ln t_k) with zero exponents skipped so that 0·ln 0 never
/// produces NaN.
fn log_weight(terms: &[(f64, f64)]) -> f64 {
    let mut lw = 0.0;
    for &(c, t) in terms {
        if c != 0.0 {
            lw += c * t.ln();
        }
    }
    lw
}

fn quadrature_moments(family: &Family, n: usize, rel_tol: f64) -> Result<MomentSet> {
    let nf = n as f64;
    let q = |u: f64| family.quantile(u);

    // First moments and diagonal second moments.
    let firsts: Vec<Result<(f64, f64)>> = (1..=n)
        .into_par_iter()
        .map(|i| {
            let lc = ln_gamma(nf + 1.0) - ln_gamma(i as f64) - ln_gamma((n - i + 1) as f64);
            let weight = move |u: f64| {
                let lw = lc + log_weight(&[((i - 1) as f64, u), ((n - i) as f64, 1.0 - u)]);
                lw.exp()
            };
            let a = integrate(|u| weight(u) * q(u), 0.0, 1.0, rel_tol)?;
            let m2 = integrate(
                |u| {
                    let z = q(u);
                    weight(u) * z * z
                },
                0.0,
                1.0,
                rel_tol,
            )?;
            Ok((a, m2))
        })
        .collect();

    let mut alpha = DVector::zeros(n);
    let mut raw2 = DMatrix::zeros(n, n);
    for (idx, res) in firsts.into_iter().enumerate() {
        let (a, m2) = res?;
        alpha[idx] = a;
        raw2[(idx, idx)] = m2;
    }

    // Cross moments E[Z_{i:n} Z_{j:n}] for i < j. The inner integral is
    // rescaled by u = v·t onto the fixed domain t ∈ (0, 1).
    let pairs: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)))
        .collect();
    let cross: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lc = ln_gamma(nf + 1.0)
                - ln_gamma(i as f64)
                - ln_gamma((j - i) as f64)
                - ln_gamma((n - j + 1) as f64);
            let e_t = (i - 1) as f64;
            let e_1mt = (j - i - 1) as f64;
            let e_v = (j - 1) as f64;
            let e_1mv = (n - j) as f64;
            integrate(
                |v| {
                    let lw_out = lc + log_weight(&[(e_v, v), (e_1mv, 1.0 - v)]);
                    let w_out = lw_out.exp();
                    if w_out == 0.0 {
                        return 0.0;
                    }
                    let inner = integrate(
                        |t| {
                            let lw = log_weight(&[(e_t, t), (e_1mt, 1.0 - t)]);
                            lw.exp() * q(v * t)
                        },
                        0.0,
                        1.0,
                        rel_tol,
                    )
                    .unwrap_or(f64::NAN);
                    w_out * q(v) * inner
                },
                0.0,
                1.0,
                rel_tol,
            )
        })
        .collect();
    for (&(i, j), res) in pairs.iter().zip(cross) {
        let m = res?;
        raw2[(i - 1, j - 1)] = m;
        raw2[(j - 1, i - 1)] = m;
    }

    let sigma = DMatrix::from_fn(n, n, |i, j| raw2[(i, j)] - alpha[i] * alpha[j]);
    MomentSet::new(
        n,
        alpha,
        sigma,
        Provenance {
            family: family.name(),
            method: MomentMethod::Quadrature,
            tolerance: Some(rel_tol),
            seed: None,
        },
    )
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MomentFile {
    n: usize,
    family: String,
    method: MomentMethod,
    tolerance: Option<f64>,
    seed: Option<u64>,
    alpha: Vec<f64>,
    sigma: Vec<Vec<f64>>,
}

pub fn save_moments(ms: &MomentSet, path: &std::path::Path) -> Result<()> {
    let file = MomentFile {
        n: ms.n,
        family: ms.provenance.family.clone(),
        method: ms.provenance.method,
        tolerance: ms.provenance.tolerance,
        seed: ms.provenance.seed,
        alpha: ms.alpha.iter().copied().collect(),
        sigma: (0..ms.n)
            .map(|i| ms.sigma.row(i).iter().copied().collect())
            .collect(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| Error::Format(format!("serialization failed: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_moments(path: &std::path::Path) -> Result<MomentSet> {
    let text = std::fs::read_to_string(path)?;
    let file: MomentFile =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{e}")))?;
    if file.n == 0 {
        return Err(Error::InvalidArgument("moment file has n = 0".into()));
    }
    if file.alpha.len() != file.n || file.sigma.len() != file.n {
        return Err(Error::Format("alpha/sigma length does not match n".into()));
    }
    for row in &file.sigma {
        if row.len() != file.n {
            return Err(Error::Format("sigma is not square".into()));
        }
    }
    let alpha = DVector::from_vec(file.alpha);
    let sigma = DMatrix::from_fn(file.n, file.n, |i, j| file.sigma[i][j]);
    MomentSet::new(
        file.n,
        alpha,
        sigma,
        Provenance {
            family: file.family,
            method: file.method,
            tolerance: file.tolerance,
            seed: file.seed,
        },
    )
}
