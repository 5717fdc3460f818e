//! Phone error rate by Levenshtein alignment.

use crate::prelude::*;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match,
    Substitution,
    Insertion,
    Deletion,
}

/// Error counts of one or more aligned sequence pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EditCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_len: usize,
}

impl EditCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    /// `100 * (S + D + I) / N`.
    pub fn per(&self) -> f64 {
        if self.reference_len == 0 {
            return 0.0;
        }
        100.0 * self.errors() as f64 / self.reference_len as f64
    }

    pub fn merge(&mut self, other: &EditCounts) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.reference_len += other.reference_len;
    }
}

/// Minimum-cost edit script with unit costs. Among equal-cost scripts the
/// backtrace prefers substitution (or match), then insertion, then deletion.
pub fn edit_script<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Vec<EditOp> {
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = d[(i - 1) * w + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let ins = d[i * w + j - 1] + 1;
            let del = d[(i - 1) * w + j] + 1;
            d[i * w + j] = diag.min(ins).min(del);
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            if d[(i - 1) * w + j - 1] + usize::from(!same) == here {
                ops.push(if same { EditOp::Match } else { EditOp::Substitution });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && d[i * w + j - 1] + 1 == here {
            ops.push(EditOp::Insertion);
            j -= 1;
        } else {
            ops.push(EditOp::Deletion);
            i -= 1;
        }
    }
    ops.reverse();
    ops
}

/// Edit counts of one reference/hypothesis pair.
pub fn edit_counts<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<EditCounts> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let mut c = EditCounts {
        reference_len: reference.len(),
        ..Default::default()
    };
    for op in edit_script(reference, hypothesis) {
        match op {
            EditOp::Match => {}
            EditOp::Substitution => c.substitutions += 1,
            EditOp::Insertion => c.insertions += 1,
            EditOp::Deletion => c.deletions += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtteranceScore {
    pub id: String,
    pub counts: EditCounts,
}

/// Per-utterance and corpus error counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoreReport {
    pub utterances: Vec<UtteranceScore>,
    pub total: EditCounts,
}

impl ScoreReport {
    pub fn add<T: PartialEq>(&mut self, id: &str, reference: &[T], hypothesis: &[T]) -> Result<()> {
        let counts = edit_counts(reference, hypothesis).map_err(|e| e.in_utterance(id))?;
        self.total.merge(&counts);
        self.utterances.push(UtteranceScore {
            id: id.to_string(),
            counts,
        });
        Ok(())
    }

    pub fn per(&self) -> f64 {
        self.total.per()
    }
}

/// Score of a single pair.
pub fn per<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<ScoreReport> {
    let mut r = ScoreReport::default();
    r.add("", reference, hypothesis).map_err(|e| match e {
        Error::Utterance { source, .. } => *source,
        other => other,
    })?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(per(&["a", "b"], &["a", "b"]).unwrap().per(), 0.0);
        let r = per(&["a", "b", "c"], &["a", "c"]).unwrap();
        assert_eq!((r.total.deletions, r.total.errors()), (1, 1));
        assert!((r.per() - 100.0 / 3.0).abs() < 1e-12);
        let r = per(&["a", "b"], &["c", "d"]).unwrap();
        assert_eq!((r.total.substitutions, r.per()), (2, 100.0));
        assert_eq!(per::<u8>(&[], &[1]), Err(Error::EmptyReference));
    }

    #[test]
    fn tie_prefers_substitution_then_insertion() {
        // "a" vs "b c" costs 2 as S+I or I+S; the backtrace takes the
        // substitution at the end first.
        let ops = edit_script(&['a'], &['b', 'c']);
        assert_eq!(ops, vec![EditOp::Insertion, EditOp::Substitution]);
        let c = edit_counts(&['a'], &['b', 'c']).unwrap();
        assert_eq!((c.substitutions, c.insertions, c.deletions), (1, 1, 0));
    }

    #[test]
    fn corpus_aggregation() {
        let mut r = ScoreReport::default();
        r.add("u1", &[1, 2, 3], &[1, 2, 3]).unwrap();
        r.add("u2", &[1], &[2, 2]).unwrap();
        assert_eq!(r.total.reference_len, 4);
        assert_eq!(r.per(), 50.0);
        assert!(matches!(r.add::<u8>("bad", &[], &[]), Err(Error::Utterance { .. })));
    }
}
