//! Trailing-window minimum of a per-iteration series.

use std::collections::VecDeque;

/// Window used throughout the experiments.
pub const ROLLING_WINDOW: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct RollingMinSeries {
    pub window: usize,
    /// `values[k] = min(source[max(0, k+1−window) ..= k])`.
    pub values: Vec<f64>,
}

impl RollingMinSeries {
    /// Monotone-deque pass, linear in the series length. NaN entries never
    /// win a comparison, so they only surface if the whole window is NaN.
    pub fn new(source: &[f64], window: usize) -> Self {
        assert!(window > 0, "window must be positive");
        let mut values = Vec::with_capacity(source.len());
        let mut deque: VecDeque<usize> = VecDeque::new();
        for (k, &v) in source.iter().enumerate() {
            while let Some(&back) = deque.back() {
                if source[back].is_nan() || v <= source[back] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(k);
            while let Some(&front) = deque.front() {
                if front + window <= k {
                    deque.pop_front();
                } else {
                    break;
                }
            }
            values.push(source[*deque.front().expect("deque holds k")]);
        }
        Self { window, values }
    }

    pub fn with_default_window(source: &[f64]) -> Self {
        Self::new(source, ROLLING_WINDOW)
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Smallest rolling value seen over the run.
    pub fn overall_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_example() {
        let s = RollingMinSeries::new(&[5.0, 3.0, 4.0, 6.0, 7.0, 1.0], 3);
        assert_eq!(s.values, vec![5.0, 3.0, 3.0, 3.0, 4.0, 1.0]);
        assert_eq!(s.last(), Some(1.0));
    }

    #[test]
    fn window_one_is_identity() {
        let src = [2.0, -1.0, 8.0];
        assert_eq!(RollingMinSeries::new(&src, 1).values, src.to_vec());
    }

    #[test]
    fn empty_source() {
        let s = RollingMinSeries::with_default_window(&[]);
        assert!(s.values.is_empty());
        assert_eq!(s.last(), None);
    }
}
