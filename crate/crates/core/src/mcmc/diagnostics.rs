/// Batch-means summary of a scalar trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchMeans {
    pub mean: f64,
    /// Standard error of the mean.
    pub stderr: f64,
    pub ess: f64,
}

/// Batch means with `floor(sqrt(n))` batches of equal size.
pub fn batch_means(x: &[f64]) -> BatchMeans {
    let n = x.len();
    if n == 0 {
        return BatchMeans { mean: f64::NAN, stderr: f64::NAN, ess: 0.0 };
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
    let b = (n as f64).sqrt().floor() as usize;
    let a = n / b.max(1);
    if b < 2 || a < 2 || var == 0.0 {
        return BatchMeans { mean, stderr: (var / n as f64).sqrt(), ess: n as f64 };
    }
    let used = a * b;
    let means: Vec<f64> = (0..a).map(|k| x[k * b..(k + 1) * b].iter().sum::<f64>() / b as f64).collect();
    let bm = means.iter().sum::<f64>() / a as f64;
    let var_means = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (a - 1) as f64;
    let sigma2 = b as f64 * var_means;
    let ess = (used as f64 * var / sigma2).min(used as f64);
    BatchMeans { mean, stderr: (sigma2 / used as f64).sqrt(), ess }
}

/// Split potential scale reduction for one scalar over several chains of equal length.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let half = chains.iter().map(|c| c.len() / 2).min().unwrap_or(0);
    if half < 2 {
        return f64::NAN;
    }
    let parts: Vec<&[f64]> = chains.iter().flat_map(|c| [&c[..half], &c[c.len() - half..]]).collect();
    let n = half as f64;
    let means: Vec<f64> = parts.iter().map(|p| p.iter().sum::<f64>() / n).collect();
    let w = parts
        .iter()
        .zip(&means)
        .map(|(p, m)| p.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / parts.len() as f64;
    let gm = means.iter().sum::<f64>() / means.len() as f64;
    let b = n * means.iter().map(|m| (m - gm).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (((n - 1.0) / n * w + b / n) / w).sqrt()
}
