//! Partition-comparison metrics: variation of information with split/merge
//! decomposition, and adapted Rand error.
//!
//! Both are computed from the contingency table of a ground-truth and a
//! candidate partition. `vi_split` is the conditional entropy H(seg | gt)
//! (over-segmentation), `vi_merge` is H(gt | seg) (under-segmentation);
//! their sum is the total variation of information. The adapted Rand error
//! is one minus the Rand F-score of the normalized table.

use thiserror::Error;

use crate::graph::NodeLabeling;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("labelings have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("labelings must not be empty")]
    Empty,
}

/// Joint label counts of two partitions, with marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u64>,
    n_gt: usize,
    n_seg: usize,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn count(&self, gt_label: usize, seg_label: usize) -> u64 {
        self.counts[gt_label * self.n_seg + seg_label]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Non-zero entries as `(gt_label, seg_label, count)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().enumerate().filter_map(|(i, &c)| {
            (c > 0).then_some((i / self.n_seg, i % self.n_seg, c))
        })
    }
}

/// Logarithm base for entropy-based metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    fn scale(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }
}

/// Split score, merge score and adapted Rand error of a segmentation against
/// ground truth. All three are zero iff the partitions are identical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub vi_split: f64,
    pub vi_merge: f64,
    pub rand_error: f64,
}

/// Exact joint counts of the two labelings.
pub fn contingency(
    gt: &NodeLabeling,
    seg: &NodeLabeling,
) -> Result<ContingencyTable, MetricError> {
    if gt.len() != seg.len() {
        return Err(MetricError::LengthMismatch(gt.len(), seg.len()));
    }
    if gt.is_empty() {
        return Err(MetricError::Empty);
    }
    let (n_gt, n_seg) = (gt.n_labels(), seg.n_labels());
    let mut counts = vec![0u64; n_gt * n_seg];
    for (&i, &j) in gt.labels().iter().zip(seg.labels()) {
        counts[i * n_seg + j] += 1;
    }
    let mut row_sums = vec![0u64; n_gt];
    let mut col_sums = vec![0u64; n_seg];
    for i in 0..n_gt {
        for j in 0..n_seg {
            row_sums[i] += counts[i * n_seg + j];
            col_sums[j] += counts[i * n_seg + j];
        }
    }
    Ok(ContingencyTable {
        counts,
        n_gt,
        n_seg,
        row_sums,
        col_sums,
        total: gt.len() as u64,
    })
}

/// `(vi_split, vi_merge)` = `(H(seg | gt), H(gt | seg))` in the given base.
pub fn vi_with_base(
    gt: &NodeLabeling,
    seg: &NodeLabeling,
    base: LogBase,
) -> Result<(f64, f64), MetricError> {
    let table = contingency(gt, seg)?;
    let n = table.total() as f64;
    let mut split = 0.0;
    let mut merge = 0.0;
    for (i, j, c) in table.entries() {
        let p = c as f64 / n;
        split += p * ((table.row_sums()[i] as f64 / n) / p).ln();
        merge += p * ((table.col_sums()[j] as f64 / n) / p).ln();
    }
    let scale = base.scale();
    Ok((split / scale, merge / scale))
}

/// Natural-log variation of information, separated into split and merge
/// scores.
pub fn vi(gt: &NodeLabeling, seg: &NodeLabeling) -> Result<(f64, f64), MetricError> {
    vi_with_base(gt, seg, LogBase::E)
}

/// Adapted Rand error: `1 - 2 * sum(p_ij^2) / (sum(t_i^2) + sum(s_j^2))`
/// over the contingency table normalized by the node count. No background
/// label is excluded.
pub fn adapted_rand_error(gt: &NodeLabeling, seg: &NodeLabeling) -> Result<f64, MetricError> {
    let table = contingency(gt, seg)?;
    let n = table.total() as f64;
    let mut joint_sq = 0.0;
    for (_, _, c) in table.entries() {
        joint_sq += (c as f64 / n).powi(2);
    }
    let gt_sq: f64 = table
        .row_sums()
        .iter()
        .map(|&t| (t as f64 / n).powi(2))
        .sum();
    let seg_sq: f64 = table
        .col_sums()
        .iter()
        .map(|&s| (s as f64 / n).powi(2))
        .sum();
    Ok(1.0 - 2.0 * joint_sq / (gt_sq + seg_sq))
}

/// All metrics at once.
pub fn report(
    gt: &NodeLabeling,
    seg: &NodeLabeling,
    base: LogBase,
) -> Result<MetricReport, MetricError> {
    let (vi_split, vi_merge) = vi_with_base(gt, seg, base)?;
    let rand_error = adapted_rand_error(gt, seg)?;
    Ok(MetricReport {
        vi_split,
        vi_merge,
        rand_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(raw: &[usize]) -> NodeLabeling {
        NodeLabeling::from_labels(raw)
    }

    #[test]
    fn contingency_diagonal() {
        let t = contingency(&lab(&[0, 0, 1, 1]), &lab(&[0, 0, 1, 1])).unwrap();
        assert_eq!(t.count(0, 0), 2);
        assert_eq!(t.count(1, 1), 2);
        assert_eq!(t.count(0, 1), 0);
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn contingency_merge_case() {
        let t = contingency(&lab(&[0, 0, 1, 1]), &lab(&[0, 0, 0, 0])).unwrap();
        assert_eq!(t.count(0, 0), 2);
        assert_eq!(t.count(1, 0), 2);
        assert_eq!(t.row_sums(), &[2, 2]);
        assert_eq!(t.col_sums(), &[4]);
    }

    #[test]
    fn contingency_single_node() {
        let t = contingency(&lab(&[0]), &lab(&[0])).unwrap();
        assert_eq!(t.count(0, 0), 1);
        assert_eq!(t.total(), 1);
    }

    #[test]
    fn vi_identical_is_zero() {
        let (s, m) = vi(&lab(&[0, 1, 1, 2]), &lab(&[5, 9, 9, 0])).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn vi_pure_merge_error() {
        let (s, m) = vi(&lab(&[0, 0, 1, 1]), &lab(&[0, 0, 0, 0])).unwrap();
        assert_eq!(s, 0.0);
        assert!((m - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn vi_pure_split_error() {
        let (s, m) = vi(&lab(&[0, 0, 0, 0]), &lab(&[0, 0, 1, 1])).unwrap();
        assert!((s - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(m, 0.0);
    }

    #[test]
    fn vi_split_merge_swap_symmetry() {
        let a = lab(&[0, 0, 1, 2, 2, 1]);
        let b = lab(&[0, 1, 1, 2, 0, 2]);
        let (s_ab, m_ab) = vi(&a, &b).unwrap();
        let (s_ba, m_ba) = vi(&b, &a).unwrap();
        assert!((s_ab - m_ba).abs() < 1e-15);
        assert!((m_ab - s_ba).abs() < 1e-15);
    }

    #[test]
    fn vi_base_two_rescales() {
        let gt = lab(&[0, 0, 1, 1]);
        let seg = lab(&[0, 0, 0, 0]);
        let (_, m) = vi_with_base(&gt, &seg, LogBase::Two).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rand_error_identical_is_zero() {
        assert_eq!(
            adapted_rand_error(&lab(&[0, 1, 1, 2]), &lab(&[2, 0, 0, 1])).unwrap(),
            0.0
        );
    }

    #[test]
    fn rand_error_examples() {
        let e = adapted_rand_error(&lab(&[0, 0, 0, 0]), &lab(&[0, 0, 1, 1])).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-12);
        let e = adapted_rand_error(&lab(&[0, 0, 1, 1]), &lab(&[0, 0, 0, 0])).unwrap();
        assert!((e - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_invariant_under_relabeling() {
        let gt = lab(&[0, 0, 1, 1, 2, 2]);
        let seg = lab(&[0, 1, 1, 1, 2, 0]);
        // from_labels normalizes, so any relabeled input gives identical
        // NodeLabelings; feed permuted raw labels instead
        let gt_perm = lab(&[7, 7, 3, 3, 5, 5]);
        let seg_perm = lab(&[9, 4, 4, 4, 1, 9]);
        assert_eq!(vi(&gt, &seg).unwrap(), vi(&gt_perm, &seg_perm).unwrap());
        assert_eq!(
            adapted_rand_error(&gt, &seg).unwrap(),
            adapted_rand_error(&gt_perm, &seg_perm).unwrap()
        );
    }

    #[test]
    fn length_mismatch_rejected() {
        assert_eq!(
            vi(&lab(&[0, 1]), &lab(&[0])).unwrap_err(),
            MetricError::LengthMismatch(2, 1)
        );
    }
}
