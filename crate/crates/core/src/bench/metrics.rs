use nalgebra::Vector3;

use crate::error::{Error, Result};

/// RMS Euclidean distance between reconstructed points and their ground
/// truth.
pub fn dispersion(points: &[Vector3<f64>], ground_truth: &[Vector3<f64>]) -> Result<f64> {
    if points.len() != ground_truth.len() {
        return Err(Error::LengthMismatch {
            left: points.len(),
            right: ground_truth.len(),
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sum: f64 = points
        .iter()
        .zip(ground_truth)
        .map(|(p, g)| (p - g).norm_squared())
        .sum();
    Ok((sum / points.len() as f64).sqrt())
}

/// RMS over tracks of the mean pairwise distance among the positions
/// reconstructed for the same track from different view pairs.
///
/// Each entry holds one track's positions; tracks with fewer than two
/// positions carry no disagreement and are skipped.
pub fn pairwise_disagreement(per_track: &[Vec<Vector3<f64>>]) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for positions in per_track {
        let k = positions.len();
        if k < 2 {
            continue;
        }
        let mut total = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                total += (positions[i] - positions[j]).norm();
            }
        }
        let mean = total / (k * (k - 1) / 2) as f64;
        sum += mean * mean;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyInput);
    }
    Ok((sum / count as f64).sqrt())
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}
