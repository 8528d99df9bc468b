//! Small numeric helpers shared across modules.

/// Pairwise (cascade) summation. Error grows like O(log n) in ulps instead of
/// O(n), which keeps large streaming accumulations reproducible to ~1e-12
/// relative regardless of chunking.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    const SEQ_CUTOFF: usize = 32;
    if values.len() <= SEQ_CUTOFF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Accumulates chunk sums in index order, then combines pairwise. Parallel
/// producers can fill chunks in any schedule; the final reduction order is
/// fixed, so results do not depend on thread timing.
pub(crate) fn combine_chunk_sums(chunk_sums: &[f64]) -> f64 {
    pairwise_sum(chunk_sums)
}
