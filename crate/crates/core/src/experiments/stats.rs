use serde::{Deserialize, Serialize};

/// Values above this multiple of the median are treated as outliers.
pub const OUTLIER_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1`); zero for a single value.
    pub std: f64,
    pub stderr: f64,
    pub median: f64,
}

/// `None` for an empty slice.
pub fn stats(values: &[f64]) -> Option<Stats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(Stats {
        count: values.len(),
        mean,
        std,
        stderr: std / n.sqrt(),
        median: median(values),
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Splits positions into `(kept, outliers)`, an outlier being a value above
/// [`OUTLIER_FACTOR`] times the median. Nothing is trimmed when the median is
/// not positive.
pub fn trim_outliers(values: &[f64]) -> (Vec<usize>, Vec<usize>) {
    if values.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let med = median(values);
    (0..values.len()).partition(|&i| !(med > 0.0 && values[i] > OUTLIER_FACTOR * med))
}

/// Full statistics, trimmed statistics and outlier labels of `(label, value)`
/// pairs.
pub fn aggregate(
    labelled: &[(usize, f64)],
    trim: bool,
) -> (Option<Stats>, Option<Stats>, Vec<usize>) {
    let values: Vec<f64> = labelled.iter().map(|p| p.1).collect();
    let full = stats(&values);
    if !trim {
        return (full, None, Vec::new());
    }
    let (kept, out) = trim_outliers(&values);
    let kept: Vec<f64> = kept.iter().map(|&i| values[i]).collect();
    (
        full,
        stats(&kept),
        out.iter().map(|&i| labelled[i].0).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_stats() {
        assert!(stats(&[]).is_none());
        let s = stats(&[2.0]).unwrap();
        assert_eq!((s.count, s.mean, s.std, s.median), (1, 2.0, 0.0, 2.0));
        let s = stats(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 2.5);
        assert!((s.std - (50.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.stderr - s.std / 2.0).abs() < 1e-15);
    }

    #[test]
    fn outlier_rule() {
        let v = [1.0, 0.9, 1.1, 12.0, 1.0];
        let (kept, out) = trim_outliers(&v);
        assert_eq!(out, vec![3]);
        assert_eq!(kept, vec![0, 1, 2, 4]);
        assert_eq!(trim_outliers(&[-1.0, 50.0, -2.0]).1, Vec::<usize>::new());
        let (full, trimmed, labels) = aggregate(&[(7, 1.0), (8, 1.0), (9, 30.0)], true);
        assert_eq!(labels, vec![9]);
        assert_eq!(trimmed.unwrap().mean, 1.0);
        assert!((full.unwrap().mean - 32.0 / 3.0).abs() < 1e-15);
    }
}
