//! Medians and fixed-edge histograms for the aggregate tables.

use serde::{Deserialize, Serialize};

/// Left edges of the plateau-size bins; the last bin is open.
pub const SIZE_BIN_EDGES: [u64; 7] = [1, 5, 10, 50, 100, 500, 1000];

/// Number of equal-width exit-ratio bins on [0, 1].
pub const EXIT_RATIO_BINS: usize = 10;

/// Median of a sample; the mean of the middle pair for even counts.
pub fn median<T: Copy + Into<f64>>(values: &[T]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|&x| x.into()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// One histogram bin, `[lo, hi)`; `hi` is `None` for the open last bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: Option<f64>,
    pub count: usize,
}

pub fn size_histogram(sizes: &[usize]) -> Vec<Bin> {
    let mut bins: Vec<Bin> = SIZE_BIN_EDGES
        .iter()
        .enumerate()
        .map(|(i, &lo)| Bin {
            lo: lo as f64,
            hi: SIZE_BIN_EDGES.get(i + 1).map(|&h| h as f64),
            count: 0,
        })
        .collect();
    for &s in sizes {
        let i = SIZE_BIN_EDGES.iter().rposition(|&e| s as u64 >= e).unwrap_or(0);
        bins[i].count += 1;
    }
    bins
}

/// Ratio histogram on [0, 1]; the last bin is closed so 1.0 lands in it.
pub fn exit_ratio_histogram(ratios: &[f64]) -> Vec<Bin> {
    let w = 1.0 / EXIT_RATIO_BINS as f64;
    let mut bins: Vec<Bin> = (0..EXIT_RATIO_BINS)
        .map(|i| Bin {
            lo: i as f64 * w,
            hi: Some((i + 1) as f64 * w),
            count: 0,
        })
        .collect();
    for &r in ratios {
        let i = ((r * EXIT_RATIO_BINS as f64).floor() as usize).min(EXIT_RATIO_BINS - 1);
        bins[i].count += 1;
    }
    bins
}
