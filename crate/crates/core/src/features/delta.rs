use super::{Columns, FeatureMatrix, BASE_DIM};
use crate::prelude::*;
use crate::{Error, Result};

/// Half-width N of the regression window.
pub const DELTA_WINDOW: usize = 2;

/// `d_t = sum_{n=1..N} n (c_{t+n} - c_{t-n}) / (2 sum n^2)`, with the first
/// and last frames replicated beyond the edges.
pub fn deltas(f: &FeatureMatrix, half_window: usize) -> FeatureMatrix {
    let rows = f.rows();
    let cols = f.cols();
    let denom: f64 = 2.0 * (1..=half_window).map(|n| (n * n) as f64).sum::<f64>();
    let mut data = vec![0.0f32; rows * cols];
    if rows > 0 && half_window > 0 {
        for t in 0..rows {
            for c in 0..cols {
                let mut acc = 0.0f64;
                for n in 1..=half_window {
                    let next = (t + n).min(rows - 1);
                    let prev = t.saturating_sub(n);
                    acc += n as f64 * (f.get(next, c) as f64 - f.get(prev, c) as f64);
                }
                data[t * cols + c] = (acc / denom) as f32;
            }
        }
    }
    FeatureMatrix::from_parts(rows, cols, data, Columns::Generic, f.sample_rate(), f.hop())
}

/// Appends deltas and delta-deltas to the 15-dim static block (45 dims).
pub fn add_deltas(f: &FeatureMatrix) -> Result<FeatureMatrix> {
    if f.cols() != BASE_DIM {
        return Err(Error::DimensionMismatch {
            expected: BASE_DIM,
            got: f.cols(),
        });
    }
    let d = deltas(f, DELTA_WINDOW);
    let dd = deltas(&d, DELTA_WINDOW);
    Ok(f.hstack(&d)?.hstack(&dd)?.with_columns(Columns::WithDeltas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: usize, f: impl Fn(usize, usize) -> f32) -> FeatureMatrix {
        let data = (0..rows * BASE_DIM).map(|i| f(i / BASE_DIM, i % BASE_DIM)).collect();
        FeatureMatrix::new(rows, BASE_DIM, data).unwrap()
    }

    #[test]
    fn constant_columns_have_zero_deltas() {
        let out = add_deltas(&matrix(10, |_, c| c as f32 * 1.5 - 3.0)).unwrap();
        assert_eq!(out.cols(), 45);
        for t in 0..10 {
            assert!(out.row(t)[15..].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn ramp_has_unit_delta_and_zero_acceleration_inside() {
        let out = add_deltas(&matrix(20, |t, _| t as f32)).unwrap();
        // deltas are exact two frames in; delta-deltas need four
        for t in 2..18 {
            assert!((out.get(t, 15) - 1.0).abs() < 1e-6);
        }
        for t in 4..16 {
            assert!(out.get(t, 30).abs() < 1e-6);
        }
    }

    #[test]
    fn single_frame_has_zero_deltas() {
        let out = add_deltas(&matrix(1, |_, c| c as f32)).unwrap();
        assert!(out.row(0)[15..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wrong_width_is_rejected() {
        let f = FeatureMatrix::new(2, 13, vec![0.0; 26]).unwrap();
        assert_eq!(add_deltas(&f), Err(Error::DimensionMismatch { expected: 15, got: 13 }));
    }

    proptest! {
        #[test]
        fn delta_is_linear(
            a in -3.0f32..3.0,
            b in -3.0f32..3.0,
            xs in proptest::collection::vec(-10.0f32..10.0, 8),
            ys in proptest::collection::vec(-10.0f32..10.0, 8),
        ) {
            let f = FeatureMatrix::new(8, 1, xs.clone()).unwrap();
            let g = FeatureMatrix::new(8, 1, ys.clone()).unwrap();
            let mix: Vec<f32> = xs.iter().zip(&ys).map(|(x, y)| a * x + b * y).collect();
            let lhs = deltas(&FeatureMatrix::new(8, 1, mix).unwrap(), 2);
            let (df, dg) = (deltas(&f, 2), deltas(&g, 2));
            for t in 0..8 {
                let rhs = a * df.get(t, 0) + b * dg.get(t, 0);
                prop_assert!((lhs.get(t, 0) - rhs).abs() < 1e-3);
            }
        }
    }
}
