use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("vector dimension mismatch: {left} vs {right}")]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

/// Cosine similarity. A zero vector on either side yields 0.0.
///
/// Each input is scaled by a power of two near its largest magnitude, which
/// is exact and keeps squared norms from overflowing. Sums use compensated
/// products so that near-orthogonal pairs keep the correct sign. The result
/// is clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, DimensionMismatch> {
    if a.len() != b.len() {
        return Err(DimensionMismatch { left: a.len(), right: b.len() });
    }
    let (Some(scale_a), Some(scale_b)) = (power_of_two_scale(a), power_of_two_scale(b)) else {
        return Ok(0.0);
    };
    let mut dot = CompensatedSum::default();
    let mut norm_a = CompensatedSum::default();
    let mut norm_b = CompensatedSum::default();
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (x / scale_a, y / scale_b);
        dot.add_product(x, y);
        norm_a.add_product(x, x);
        norm_b.add_product(y, y);
    }
    Ok((dot.value() / (norm_a.value().sqrt() * norm_b.value().sqrt())).clamp(-1.0, 1.0))
}

/// The power of two at or just below the largest magnitude, or None for a
/// zero vector.
fn power_of_two_scale(v: &[f64]) -> Option<f64> {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return None;
    }
    let exponent = max.log2().floor() as i32;
    Some(2f64.powi(exponent.clamp(-1022, 1023)))
}

/// Running sum of products carried in twice the working precision.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    error: f64,
}

impl CompensatedSum {
    fn add_product(&mut self, x: f64, y: f64) {
        let product = x * y;
        let product_error = x.mul_add(y, -product);
        let sum = self.sum + product;
        let back = sum - self.sum;
        let sum_error = (self.sum - (sum - back)) + (product - back);
        self.sum = sum;
        self.error += sum_error + product_error;
    }

    fn value(&self) -> f64 {
        self.sum + self.error
    }
}
