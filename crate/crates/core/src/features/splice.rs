use super::{Columns, FeatureMatrix};
use crate::prelude::*;

/// `past` frames before and `future` frames after the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextWindowSpec {
    pub past: usize,
    pub future: usize,
}

impl ContextWindowSpec {
    pub const fn new(past: usize, future: usize) -> Self {
        Self { past, future }
    }

    /// Frames per spliced row.
    pub const fn len(&self) -> usize {
        self.past + self.future + 1
    }

    pub const fn is_empty(&self) -> bool {
        false
    }

    /// Label in the `P10-F6` style.
    pub fn label(&self) -> String {
        format!("P{}-F{}", self.past, self.future)
    }

    /// Parses `P10-F6` (case-insensitive).
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (p, f) = s.split_once('-')?;
        let past = p.strip_prefix(['P', 'p'])?.parse().ok()?;
        let future = f.strip_prefix(['F', 'f'])?.parse().ok()?;
        Some(Self { past, future })
    }
}

impl Default for ContextWindowSpec {
    fn default() -> Self {
        Self { past: 8, future: 8 }
    }
}

/// Row `t` becomes `[x_{t-P}, ..., x_t, ..., x_{t+F}]`; frames beyond either
/// edge are replaced by the first or last frame.
pub fn splice(f: &FeatureMatrix, w: ContextWindowSpec) -> FeatureMatrix {
    let rows = f.rows();
    let cols = f.cols() * w.len();
    let mut data = Vec::with_capacity(rows * cols);
    for t in 0..rows {
        for k in 0..w.len() {
            let src = (t + k).saturating_sub(w.past).min(rows - 1);
            data.extend_from_slice(f.row(src));
        }
    }
    FeatureMatrix::from_parts(
        rows,
        cols,
        data,
        Columns::Spliced { past: w.past, future: w.future },
        f.sample_rate(),
        f.hop(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(rows: usize, cols: usize) -> FeatureMatrix {
        FeatureMatrix::new(rows, cols, (0..rows * cols).map(|i| i as f32).collect()).unwrap()
    }

    #[test]
    fn paper_windows_are_765_wide() {
        let f = ramp(12, 45);
        for w in [ContextWindowSpec::new(8, 8), ContextWindowSpec::new(10, 6)] {
            let s = splice(&f, w);
            assert_eq!((s.rows(), s.cols()), (12, 765));
        }
    }

    #[test]
    fn zero_context_is_identity() {
        let f = ramp(5, 3);
        assert_eq!(splice(&f, ContextWindowSpec::new(0, 0)).data(), f.data());
    }

    #[test]
    fn edges_replicate() {
        let f = ramp(3, 1);
        let s = splice(&f, ContextWindowSpec::new(2, 1));
        assert_eq!(s.row(0), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(s.row(2), &[0.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn labels_parse() {
        let w = ContextWindowSpec::parse("P10-F6").unwrap();
        assert_eq!(w, ContextWindowSpec::new(10, 6));
        assert_eq!(w.label(), "P10-F6");
        assert!(ContextWindowSpec::parse("10-6").is_none());
    }

    proptest! {
        #[test]
        fn central_block_is_the_original_row(rows in 1usize..20, cols in 1usize..6, past in 0usize..5, future in 0usize..5) {
            let f = ramp(rows, cols);
            let s = splice(&f, ContextWindowSpec::new(past, future));
            prop_assert_eq!(s.rows(), rows);
            prop_assert_eq!(s.cols(), cols * (past + future + 1));
            for t in 0..rows {
                prop_assert_eq!(&s.row(t)[past * cols..(past + 1) * cols], f.row(t));
            }
        }
    }
}
