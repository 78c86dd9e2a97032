//! Small descriptive statistics used by the experiment records.

/// Five-number summary for a box plot. Quartiles use linear interpolation
/// between order statistics; whiskers span the full data range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxSummary {
    /// `None` for an empty slice.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(BoxSummary {
            min: sorted[0],
            q1: linear_quantile(&sorted, 0.25),
            median: linear_quantile(&sorted, 0.5),
            q3: linear_quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
        })
    }
}

/// Quantile of ascending `sorted` at `prob`, interpolating linearly.
pub fn linear_quantile(sorted: &[f64], prob: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * prob;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Affine map `x ↦ (x − mean) / scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Standardization {
    pub mean: f64,
    pub scale: f64,
}

impl Standardization {
    /// Fits the map that gives `reference` zero mean and unit population
    /// variance. Fails for fewer than two values or zero spread.
    pub fn fit(reference: &[f64]) -> Result<Self, String> {
        if reference.len() < 2 {
            return Err(format!(
                "need at least 2 null samples to normalize, got {}",
                reference.len()
            ));
        }
        let mean = mean(reference);
        let scale = std_dev(reference);
        if !(scale.is_finite() && scale > 0.0) {
            return Err(format!("null samples have degenerate spread {scale}"));
        }
        Ok(Standardization { mean, scale })
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.scale
    }
}
