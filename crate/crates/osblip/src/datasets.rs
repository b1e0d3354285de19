//! Bundled example data.

/// Environmental lead contamination measurements (n = 15), from Bhaumik &
/// Gibbons (2004); a log-normal model fits well, so analyses run on the
/// natural-log scale.
pub const LEAD_CONTAMINATION: [f64; 15] = [
    26.0, 63.0, 3.0, 70.0, 16.0, 5.0, 1.0, 57.0, 5.0, 3.0, 24.0, 2.0, 1.0, 48.0, 3.0,
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{CensoredSample, Transform};

    #[test]
    fn log_ordered_prefix_matches_published_values() {
        let sample = CensoredSample::from_raw(&LEAD_CONTAMINATION, 9, Transform::Log).unwrap();
        let expected = [0.0, 0.0, 0.693, 1.099, 1.099, 1.099, 1.609, 1.609, 2.773];
        for (got, want) in sample.x.iter().zip(expected) {
            assert!((got - want).abs() < 5e-4, "{got} vs {want}");
        }
    }
}
