//! Monte Carlo harness validating moments and MSPE formulas by brute
//! force. Replications use counter-based RNG streams (one ChaCha stream
//! per replication index) so that parallel and serial runs agree bitwise;
//! partial sums are merged in fixed chunk order.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::Family;
use crate::moments::{MomentMethod, MomentSet, Provenance};

pub const MIN_SIM_REPS: u64 = 10_000;
const CHUNK: u64 = 4096;

/// A predictor entered into a simulation run: fixed coefficient rows and,
/// optionally, the analytic MSPE matrix (σ² units) to verify against.
#[derive(Debug, Clone)]
pub struct NamedPredictor {
    pub label: String,
    pub coeffs: DMatrix<f64>,
    pub analytic_mspe: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct SimPlan {
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub targets: Vec<usize>,
    pub mu: f64,
    pub sigma: f64,
    pub reps: u64,
    pub seed: u64,
    pub predictors: Vec<NamedPredictor>,
}

impl SimPlan {
    fn validate(&self) -> Result<()> {
        if self.reps < MIN_SIM_REPS {
            return Err(Error::InvalidArgument(format!(
                "reps must be >= {MIN_SIM_REPS}, got {}",
                self.reps
            )));
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::InvalidArgument("sigma must be positive".into()));
        }
        if self.r == 0 || self.r >= self.n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= r < n, got r={}, n={}",
                self.r, self.n
            )));
        }
        if self.targets.is_empty()
            || self.targets.windows(2).any(|w| w[1] <= w[0])
            || self.targets[0] <= self.r
            || *self.targets.last().unwrap() > self.n
        {
            return Err(Error::InvalidArgument(format!(
                "bad target indices {:?} for n={}, r={}",
                self.targets, self.n, self.r
            )));
        }
        let ell = self.targets.len();
        for p in &self.predictors {
            if p.coeffs.nrows() != ell || p.coeffs.ncols() != self.r {
                return Err(Error::InvalidArgument(format!(
                    "predictor '{}' has shape {}x{}, expected {}x{}",
                    p.label,
                    p.coeffs.nrows(),
                    p.coeffs.ncols(),
                    ell,
                    self.r
                )));
            }
            if let Some(m) = &p.analytic_mspe {
                if m.nrows() != ell || m.ncols() != ell {
                    return Err(Error::InvalidArgument(format!(
                        "analytic MSPE for '{}' is not {ell}x{ell}",
                        p.label
                    )));
                }
            }
        }
        // 2^63 error-product accumulations is far past any practical run.
        if self.reps > (1u64 << 40) {
            return Err(Error::InvalidArgument("reps exceeds the overflow guard (2^40)".into()));
        }
        Ok(())
    }
}

/// Entrywise comparison verdict against analytic values.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    /// Largest |empirical − analytic·σ²| / SE across entries.
    pub max_z: f64,
    pub tolerance_multiple: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictorVerdict {
    pub label: String,
    /// Empirical MSPE matrix in data units².
    pub mspe: Vec<Vec<f64>>,
    /// Jackknife standard errors per entry.
    pub se: Vec<Vec<f64>>,
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub family: String,
    pub n: usize,
    pub r: usize,
    pub targets: Vec<usize>,
    pub mu: f64,
    pub sigma: f64,
    pub reps: u64,
    pub seed: u64,
    pub predictors: Vec<PredictorVerdict>,
}

fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep.wrapping_add(1));
    rng
}

fn draw_sorted(family: &Family, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut z: Vec<f64> = (0..n)
        .map(|_| {
            let mut u: f64 = rng.gen();
            if u <= 0.0 {
                u = f64::MIN_POSITIVE;
            }
            family.quantile(u)
        })
        .collect();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    z
}

struct Accum {
    sum: Vec<DMatrix<f64>>,
    sumsq: Vec<DMatrix<f64>>,
}

/// Runs the plan: draws samples, applies each predictor's rows to the
/// observed block and accumulates error cross-products against the true
/// future order statistics.
pub fn simulate(plan: &SimPlan) -> Result<SimReport> {
    plan.validate()?;
    let ell = plan.targets.len();
    let np = plan.predictors.len();
    let chunks = plan.reps.div_ceil(CHUNK);

    let partials: Vec<Accum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(plan.reps);
            let mut acc = Accum {
                sum: vec![DMatrix::zeros(ell, ell); np],
                sumsq: vec![DMatrix::zeros(ell, ell); np],
            };
            let mut errors = vec![DVector::zeros(ell); np];
            for rep in lo..hi {
                let mut rng = rep_rng(plan.seed, rep);
                let z = draw_sorted(&plan.family, plan.n, &mut rng);
                let x: Vec<f64> = z.iter().map(|&v| plan.mu + plan.sigma * v).collect();
                let obs = DVector::from_column_slice(&x[..plan.r]);
                for (p, pred) in plan.predictors.iter().enumerate() {
                    let hat = &pred.coeffs * &obs;
                    for (k, &t) in plan.targets.iter().enumerate() {
                        errors[p][k] = hat[k] - x[t - 1];
                    }
                }
                for (p, err) in errors.iter().enumerate() {
                    for i in 0..ell {
                        for j in 0..ell {
                            let v = err[i] * err[j];
                            acc.sum[p][(i, j)] += v;
                            acc.sumsq[p][(i, j)] += v * v;
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut sum = vec![DMatrix::zeros(ell, ell); np];
    let mut sumsq = vec![DMatrix::zeros(ell, ell); np];
    for part in partials {
        for p in 0..np {
            sum[p] += &part.sum[p];
            sumsq[p] += &part.sumsq[p];
        }
    }

    let m = plan.reps as f64;
    let sigma2 = plan.sigma * plan.sigma;
    let mut reports = Vec::with_capacity(np);
    for (p, pred) in plan.predictors.iter().enumerate() {
        let mean = &sum[p] / m;
        let se = DMatrix::from_fn(ell, ell, |i, j| {
            let var = (sumsq[p][(i, j)] - sum[p][(i, j)] * sum[p][(i, j)] / m) / (m - 1.0);
            (var.max(0.0) / m).sqrt()
        });
        let verdict = pred.analytic_mspe.as_ref().map(|analytic| {
            let mut max_z = 0.0f64;
            for i in 0..ell {
                for j in 0..ell {
                    let dev = (mean[(i, j)] - analytic[(i, j)] * sigma2).abs();
                    let z = if se[(i, j)] > 0.0 { dev / se[(i, j)] } else { f64::INFINITY };
                    max_z = max_z.max(z);
                }
            }
            Verdict { pass: max_z <= 3.0, max_z, tolerance_multiple: 3.0 }
        });
        reports.push(PredictorVerdict {
            label: pred.label.clone(),
            mspe: matrix_rows(&mean),
            se: matrix_rows(&se),
            verdict,
        });
    }

    Ok(SimReport {
        family: plan.family.name(),
        n: plan.n,
        r: plan.r,
        targets: plan.targets.clone(),
        mu: plan.mu,
        sigma: plan.sigma,
        reps: plan.reps,
        seed: plan.seed,
        predictors: reports,
    })
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Sample mean and covariance of sorted standardized draws, with standard
/// errors carried as Monte Carlo provenance.
pub fn empirical_moments(family: &Family, n: usize, reps: u64, seed: u64) -> Result<MomentSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    if reps < 2 {
        return Err(Error::InvalidArgument(
            "at least 2 replications required for finite standard errors".into(),
        ));
    }
    let chunks = reps.div_ceil(CHUNK);
    struct MomAccum {
        s1: DVector<f64>,
        s1sq: DVector<f64>,
        s2: DMatrix<f64>,
        s2sq: DMatrix<f64>,
    }
    let partials: Vec<MomAccum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(reps);
            let mut acc = MomAccum {
                s1: DVector::zeros(n),
                s1sq: DVector::zeros(n),
                s2: DMatrix::zeros(n, n),
                s2sq: DMatrix::zeros(n, n),
            };
            for rep in lo..hi {
                let mut rng = rep_rng(seed, rep);
                let z = draw_sorted(family, n, &mut rng);
                for i in 0..n {
                    acc.s1[i] += z[i];
                    acc.s1sq[i] += z[i] * z[i];
                    for j in i..n {
                        let v = z[i] * z[j];
                        acc.s2[(i, j)] += v;
                        acc.s2sq[(i, j)] += v * v;
                    }
                }
            }
            acc
        })
        .collect();

    let mut s1 = DVector::zeros(n);
    let mut s1sq = DVector::zeros(n);
    let mut s2 = DMatrix::zeros(n, n);
    let mut s2sq = DMatrix::zeros(n, n);
    for part in partials {
        s1 += &part.s1;
        s1sq += &part.s1sq;
        s2 += &part.s2;
        s2sq += &part.s2sq;
    }
    let m = reps as f64;
    let alpha = &s1 / m;
    let alpha_se = DVector::from_fn(n, |i, _| {
        let var = (s1sq[i] - s1[i] * s1[i] / m) / (m - 1.0);
        (var.max(0.0) / m).sqrt()
    });
    let mut raw2 = DMatrix::zeros(n, n);
    let mut raw2_se = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            raw2[(i, j)] = s2[(i, j)] / m;
            raw2[(j, i)] = raw2[(i, j)];
            let var = (s2sq[(i, j)] - s2[(i, j)] * s2[(i, j)] / m) / (m - 1.0);
            let se = (var.max(0.0) / m).sqrt();
            raw2_se[(i, j)] = se;
            raw2_se[(j, i)] = se;
        }
    }
    let sigma = DMatrix::from_fn(n, n, |i, j| raw2[(i, j)] - alpha[i] * alpha[j]);
    // Delta-method bound: SE(σ_ij) ≤ SE of the raw product plus the
    // propagated mean terms.
    let sigma_se = DMatrix::from_fn(n, n, |i, j| {
        raw2_se[(i, j)] + alpha[i].abs() * alpha_se[j] + alpha[j].abs() * alpha_se[i]
    });

    let mut ms = MomentSet::new(
        n,
        alpha,
        sigma,
        Provenance {
            family: family.name(),
            method: MomentMethod::MonteCarlo,
            tolerance: None,
            seed: Some(seed),
        },
    )?;
    ms.alpha_se = Some(alpha_se);
    ms.sigma_se = Some(sigma_se);
    Ok(ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{compute_moments, slice_moments, ParentModel};
    use crate::prediction::{blip, blup, blup_mspe, mspe_of_coeffs};

    #[test]
    fn empirical_moments_match_exponential_truth() {
        let ms = empirical_moments(&Family::Exponential, 2, 1_000_000, 42).unwrap();
        let se = ms.alpha_se.as_ref().unwrap();
        assert!((ms.alpha[0] - 0.5).abs() < 4.0 * se[0], "alpha0 {}", ms.alpha[0]);
        assert!((ms.alpha[1] - 1.5).abs() < 4.0 * se[1], "alpha1 {}", ms.alpha[1]);
        let sse = ms.sigma_se.as_ref().unwrap();
        assert!((ms.sigma[(0, 0)] - 0.25).abs() < 4.0 * sse[(0, 0)]);
        assert!((ms.sigma[(1, 1)] - 1.25).abs() < 4.0 * sse[(1, 1)]);
    }

    #[test]
    fn single_rep_rejected() {
        assert!(empirical_moments(&Family::Uniform, 3, 1, 0).is_err());
    }

    #[test]
    fn simulate_is_deterministic() {
        let ms = compute_moments(&ParentModel::closed_form(Family::Exponential), 5).unwrap();
        let slice = slice_moments(&ms, 3, &[4, 5]).unwrap();
        let p = blup(&slice).unwrap();
        let plan = SimPlan {
            family: Family::Exponential,
            n: 5,
            r: 3,
            targets: vec![4, 5],
            mu: 0.3,
            sigma: 1.7,
            reps: 10_000,
            seed: 99,
            predictors: vec![NamedPredictor {
                label: "blup".into(),
                coeffs: p.coeffs.clone(),
                analytic_mspe: None,
            }],
        };
        let r1 = simulate(&plan).unwrap();
        let r2 = simulate(&plan).unwrap();
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
    }

    #[test]
    fn blup_mspe_verified_at_modest_reps() {
        let ms = compute_moments(&ParentModel::closed_form(Family::Exponential), 5).unwrap();
        let slice = slice_moments(&ms, 3, &[4]).unwrap();
        let p = blup(&slice).unwrap();
        let analytic = blup_mspe(&slice).unwrap();
        let plan = SimPlan {
            family: Family::Exponential,
            n: 5,
            r: 3,
            targets: vec![4],
            mu: 0.0,
            sigma: 1.0,
            reps: 200_000,
            seed: 7,
            predictors: vec![NamedPredictor {
                label: "blup".into(),
                coeffs: p.coeffs.clone(),
                analytic_mspe: Some(analytic.w.clone()),
            }],
        };
        let report = simulate(&plan).unwrap();
        let v = report.predictors[0].verdict.as_ref().unwrap();
        assert!(v.pass, "max_z = {}", v.max_z);
    }

    #[test]
    fn blip_beats_blup_empirically() {
        let ms = compute_moments(&ParentModel::closed_form(Family::Exponential), 5).unwrap();
        let slice = slice_moments(&ms, 3, &[5]).unwrap();
        let (mu, sigma) = (2.0, 1.0); // true delta = 2
        let bu = blup(&slice).unwrap();
        let bl = blip(&slice, mu / sigma).unwrap();
        let analytic_bl = mspe_of_coeffs(&bl.coeffs, &slice, mu / sigma).unwrap();
        let plan = SimPlan {
            family: Family::Exponential,
            n: 5,
            r: 3,
            targets: vec![5],
            mu,
            sigma,
            reps: 200_000,
            seed: 21,
            predictors: vec![
                NamedPredictor {
                    label: "blup".into(),
                    coeffs: bu.coeffs.clone(),
                    analytic_mspe: None,
                },
                NamedPredictor {
                    label: "blip".into(),
                    coeffs: bl.coeffs.clone(),
                    analytic_mspe: Some(analytic_bl.w.clone()),
                },
            ],
        };
        let report = simulate(&plan).unwrap();
        assert!(report.predictors[1].verdict.as_ref().unwrap().pass);
        let mspe_blup = report.predictors[0].mspe[0][0];
        let mspe_blip = report.predictors[1].mspe[0][0];
        let noise = 3.0 * report.predictors[0].se[0][0];
        assert!(mspe_blip <= mspe_blup + noise, "{mspe_blip} vs {mspe_blup}");
    }

    #[test]
    fn plan_validation() {
        let base = SimPlan {
            family: Family::Exponential,
            n: 5,
            r: 3,
            targets: vec![4],
            mu: 0.0,
            sigma: 1.0,
            reps: 10_000,
            seed: 0,
            predictors: vec![],
        };
        assert!(simulate(&SimPlan { reps: 100, ..base.clone() }).is_err());
        assert!(simulate(&SimPlan { sigma: 0.0, ..base.clone() }).is_err());
        assert!(simulate(&SimPlan { targets: vec![2], ..base.clone() }).is_err());
    }
}
