//! Efficiency functionals of δ: RE₁ for marginal prediction, determinant
//! and trace efficiencies for joint prediction, their maximizers δ*, the
//! crossings with 1, and integrated efficiency measures.
//!
//! Each functional builds the BLIP at δ, evaluates its MSPE at the same δ
//! ("true-δ" semantics) and ratios against a δ-free reference: the exact
//! BLUP MSPE for the marginal RE₁, and the anchored joint reference of
//! [`anchored_blup_mspe`] for the D- and trace-efficiencies, matching the
//! convention of the published benchmark tables. A plug-in mode that
//! builds at one δ and evaluates at another is available for data-driven
//! analyses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moments::MomentSlice;
use crate::prediction::{anchored_blup_mspe, blip, blup_mspe, mspe_of_coeffs, MspeMatrix};

pub mod search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyKind {
    Re1,
    D,
    Trace,
}

impl EfficiencyKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "re1" => Ok(EfficiencyKind::Re1),
            "d" => Ok(EfficiencyKind::D),
            "trace" => Ok(EfficiencyKind::Trace),
            other => Err(Error::InvalidArgument(format!("unknown efficiency kind '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EfficiencyKind::Re1 => "re1",
            EfficiencyKind::D => "d",
            EfficiencyKind::Trace => "trace",
        }
    }
}

/// Which efficiency to compute and for which targets.
#[derive(Debug, Clone, Serialize)]
pub struct EfficiencySpec {
    pub kind: EfficiencyKind,
    pub targets: Vec<usize>,
}

impl EfficiencySpec {
    pub fn new(kind: EfficiencyKind, targets: Vec<usize>) -> Result<Self> {
        match kind {
            EfficiencyKind::Re1 if targets.len() != 1 => {
                return Err(Error::InvalidArgument("RE1 takes exactly one target".into()))
            }
            EfficiencyKind::D | EfficiencyKind::Trace if targets.len() != 2 => {
                return Err(Error::InvalidArgument(
                    "D- and trace-efficiency take exactly two targets".into(),
                ))
            }
            _ => {}
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidArgument("joint targets must be distinct".into()));
        }
        Ok(EfficiencySpec { kind, targets })
    }

    fn check_slice(&self, slice: &MomentSlice) -> Result<()> {
        if slice.s_indices != self.targets {
            return Err(Error::InvalidArgument(format!(
                "slice targets {:?} do not match spec targets {:?}",
                slice.s_indices, self.targets
            )));
        }
        Ok(())
    }
}

/// A sampled efficiency curve over a δ grid.
#[derive(Debug, Clone, Serialize)]
pub struct EfficiencyCurve {
    pub delta_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub spec: EfficiencySpec,
}

fn denominator(kind: EfficiencyKind, slice: &MomentSlice) -> Result<MspeMatrix> {
    match kind {
        EfficiencyKind::Re1 => blup_mspe(slice),
        EfficiencyKind::D | EfficiencyKind::Trace => anchored_blup_mspe(slice),
    }
}

/// Efficiency ratio at δ: BLIP built and assessed at the same δ against
/// the δ-free reference MSPE (exact BLUP MSPE for RE₁, anchored joint
/// reference for D/trace).
pub fn efficiency_at(spec: &EfficiencySpec, slice: &MomentSlice, delta: f64) -> Result<f64> {
    spec.check_slice(slice)?;
    if delta == 0.0 && spec.kind == EfficiencyKind::Re1 {
        return Err(Error::InvalidArgument("RE1 is defined on delta != 0".into()));
    }
    let p = blip(slice, delta)?;
    let num = mspe_of_coeffs(&p.coeffs, slice, delta)?;
    let den = denominator(spec.kind, slice)?;
    ratio(spec.kind, &num.w, &den.w)
}

/// Plug-in mode: coefficients built at `delta_build`, MSPE assessed at
/// `delta_eval`.
pub fn efficiency_plugin(
    spec: &EfficiencySpec,
    slice: &MomentSlice,
    delta_build: f64,
    delta_eval: f64,
) -> Result<f64> {
    spec.check_slice(slice)?;
    let p = blip(slice, delta_build)?;
    let num = mspe_of_coeffs(&p.coeffs, slice, delta_eval)?;
    let den = denominator(spec.kind, slice)?;
    ratio(spec.kind, &num.w, &den.w)
}

fn ratio(kind: EfficiencyKind, num: &nalgebra::DMatrix<f64>, den: &nalgebra::DMatrix<f64>) -> Result<f64> {
    let (a, b) = match kind {
        EfficiencyKind::Re1 => (num[(0, 0)], den[(0, 0)]),
        EfficiencyKind::D => (num.clone().determinant(), den.clone().determinant()),
        EfficiencyKind::Trace => (num.trace(), den.trace()),
    };
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Numerical(format!("degenerate reference MSPE ({b}) in efficiency ratio")));
    }
    Ok(a / b)
}

/// Maximizer of the efficiency over `interval` ⊂ (0, ∞): 512-point
/// log-spaced grid scan refined by golden-section search.
pub fn find_delta_star(
    spec: &EfficiencySpec,
    slice: &MomentSlice,
    interval: (f64, f64),
) -> Result<search::Maximum> {
    spec.check_slice(slice)?;
    search::find_max(|d| efficiency_at(spec, slice, d), interval)
}

/// Integrated efficiency measure: the average of the efficiency over
/// (0, δ_max), composite trapezoid on a 4096-point grid with the 0⁺
/// endpoint evaluated at the first interior node.
pub fn iem(spec: &EfficiencySpec, slice: &MomentSlice, delta_max: f64) -> Result<f64> {
    spec.check_slice(slice)?;
    search::average_over(|d| efficiency_at(spec, slice, d), delta_max, 4096)
}

/// All δ in `interval` where eff(δ) − 1 changes sign, refined by
/// bisection to 1e-6. Possibly empty.
pub fn crossings(
    spec: &EfficiencySpec,
    slice: &MomentSlice,
    interval: (f64, f64),
) -> Result<Vec<f64>> {
    spec.check_slice(slice)?;
    search::sign_changes(|d| Ok(efficiency_at(spec, slice, d)? - 1.0), interval)
}

/// Vectorized `efficiency_at` over a user grid.
pub fn curve(spec: &EfficiencySpec, slice: &MomentSlice, delta_grid: &[f64]) -> Result<EfficiencyCurve> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty delta grid".into()));
    }
    for w in delta_grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidArgument("delta grid must be strictly increasing".into()));
        }
    }
    let values = delta_grid
        .iter()
        .map(|&d| efficiency_at(spec, slice, d))
        .collect::<Result<Vec<f64>>>()?;
    if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Numerical("efficiency curve has non-positive or non-finite values".into()));
    }
    Ok(EfficiencyCurve {
        delta_grid: delta_grid.to_vec(),
        values,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Family;
    use crate::moments::{compute_moments, slice_moments, ParentModel};
    use crate::prediction::blup;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exp_slice(n: usize, r: usize, targets: &[usize]) -> MomentSlice {
        let ms = compute_moments(&ParentModel::closed_form(Family::Exponential), n).unwrap();
        slice_moments(&ms, r, targets).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(EfficiencySpec::new(EfficiencyKind::Re1, vec![4, 5]).is_err());
        assert!(EfficiencySpec::new(EfficiencyKind::D, vec![4]).is_err());
        assert!(EfficiencySpec::new(EfficiencyKind::Trace, vec![4, 4]).is_err());
        assert!(EfficiencySpec::new(EfficiencyKind::D, vec![4, 5]).is_ok());
    }

    #[test]
    fn blup_against_itself_is_one() {
        // Replacing the BLIP by the BLUP gives an identical numerator.
        let slice = exp_slice(5, 3, &[4]);
        let bu = blup(&slice).unwrap();
        let num = mspe_of_coeffs(&bu.coeffs, &slice, 1.7).unwrap();
        let den = blup_mspe(&slice).unwrap();
        assert_abs_diff_eq!(num.w[(0, 0)] / den.w[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn re1_zero_delta_rejected() {
        let slice = exp_slice(5, 3, &[4]);
        let spec = EfficiencySpec::new(EfficiencyKind::Re1, vec![4]).unwrap();
        assert!(efficiency_at(&spec, &slice, 0.0).is_err());
    }

    #[test]
    fn re1_bounded_by_one_randomized() {
        // BLIP optimality over the linear class containing the BLUP.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(3..9usize);
            let r = rng.gen_range(2..n);
            let s = rng.gen_range((r + 1)..=n);
            let family = if rng.gen_bool(0.5) { Family::Exponential } else { Family::Uniform };
            let ms = compute_moments(&ParentModel::closed_form(family), n).unwrap();
            let slice = slice_moments(&ms, r, &[s]).unwrap();
            let spec = EfficiencySpec::new(EfficiencyKind::Re1, vec![s]).unwrap();
            let delta = rng.gen_range(0.01..8.0);
            let v = efficiency_at(&spec, &slice, delta).unwrap();
            assert!(v <= 1.0 + 1e-10, "RE1 = {v} at n={n}, r={r}, s={s}, delta={delta}");
        }
    }

    #[test]
    fn delta_star_is_local_max() {
        // Normal RE1 has an interior maximum (the exponential one is
        // monotone, which the boundary flag reports instead).
        let ms = compute_moments(&ParentModel::quadrature(Family::Normal), 6).unwrap();
        let slice = slice_moments(&ms, 3, &[5]).unwrap();
        let spec = EfficiencySpec::new(EfficiencyKind::Re1, vec![5]).unwrap();
        let m = find_delta_star(&spec, &slice, (0.01, 20.0)).unwrap();
        assert!(!m.at_boundary);

        let exp_sl = exp_slice(6, 3, &[5]);
        let exp_spec = EfficiencySpec::new(EfficiencyKind::Re1, vec![5]).unwrap();
        assert!(find_delta_star(&exp_spec, &exp_sl, (0.01, 20.0)).unwrap().at_boundary);
        let f = |d| efficiency_at(&spec, &slice, d).unwrap();
        assert!(f(m.argmax - 1e-3) <= m.value + 1e-12);
        assert!(f(m.argmax + 1e-3) <= m.value + 1e-12);
    }

    #[test]
    fn curve_basics() {
        let slice = exp_slice(5, 3, &[4]);
        let spec = EfficiencySpec::new(EfficiencyKind::Re1, vec![4]).unwrap();
        let c = curve(&spec, &slice, &[0.5]).unwrap();
        assert_eq!(c.values.len(), 1);
        assert!(curve(&spec, &slice, &[]).is_err());
        assert!(curve(&spec, &slice, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn iem_converges_under_grid_doubling() {
        let slice = exp_slice(5, 3, &[4, 5]);
        let spec = EfficiencySpec::new(EfficiencyKind::Trace, vec![4, 5]).unwrap();
        let f = |d| efficiency_at(&spec, &slice, d);
        let coarse = search::average_over(f, 10.0, 4096).unwrap();
        let fine = search::average_over(f, 10.0, 8192).unwrap();
        assert!((coarse - fine).abs() < 1e-4, "coarse={coarse}, fine={fine}");
    }
}
