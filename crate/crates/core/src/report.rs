use serde::{Deserialize, Serialize};

/// Summary of one residual over a set of sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub samples: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Largest magnitude among the terms entering the residual.
    pub scale: f64,
    /// The check carries no information on this target (e.g. a flat connection).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
}

impl ResidualReport {
    /// Builds a report from per-sample `(residual, scale)` pairs.
    pub fn from_samples(
        name: impl Into<String>,
        tolerance: f64,
        samples: impl IntoIterator<Item = (f64, f64)>,
    ) -> ResidualReport {
        let mut count = 0;
        let mut max = 0.0_f64;
        let mut sum = 0.0;
        let mut scale = 0.0_f64;
        let mut nan = false;
        for (r, s) in samples {
            count += 1;
            nan |= r.is_nan();
            max = max.max(r);
            sum += r;
            scale = scale.max(s);
        }
        assert!(count > 0, "a residual report needs at least one sample");
        if nan {
            max = f64::NAN;
        }
        ResidualReport {
            name: name.into(),
            samples: count,
            max_residual: max,
            mean_residual: sum / count as f64,
            tolerance,
            passed: max <= tolerance,
            scale,
            vacuous: false,
        }
    }

    pub fn vacuous(mut self, vacuous: bool) -> Self {
        self.vacuous = vacuous;
        self
    }

    /// One aligned line for text output.
    pub fn line(&self) -> String {
        let status = match (self.vacuous, self.passed) {
            (true, _) => "VACUOUS",
            (false, true) => "PASS",
            (false, false) => "FAIL",
        };
        format!(
            "{status:<7} {:<44} max {:>10.3e}  mean {:>10.3e}  tol {:>8.1e}  scale {:>9.3e}  n={}",
            self.name, self.max_residual, self.mean_residual, self.tolerance, self.scale, self.samples
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_iff_max_within_tolerance() {
        let r = ResidualReport::from_samples("a", 1e-8, [(1e-9, 1.0), (5e-9, 2.0)]);
        assert!(r.passed);
        assert_eq!(r.samples, 2);
        assert_eq!(r.scale, 2.0);
        assert!((r.mean_residual - 3e-9).abs() < 1e-20);
        let r = ResidualReport::from_samples("b", 1e-8, [(1e-9, 1.0), (2e-8, 1.0)]);
        assert!(!r.passed);
        let r = ResidualReport::from_samples("c", 1e-8, [(f64::NAN, 1.0), (0.0, 1.0)]);
        assert!(!r.passed);
    }
}
