use super::Vocabulary;
use crate::error::{Error, Result};

/// Builds the negative-sampling table: token `i` fills a contiguous run of
/// slots proportional to `count(i)^exponent`.
///
/// Run boundaries are the rounded cumulative shares, so every token's slot
/// count is within one slot of its exact share.
pub fn build_noise_table(vocab: &Vocabulary, exponent: f64, table_size: usize) -> Result<Vec<u32>> {
    noise_table_from_counts(vocab.counts(), exponent, table_size)
}

pub(crate) fn noise_table_from_counts(counts: &[u64], exponent: f64, table_size: usize) -> Result<Vec<u32>> {
    if counts.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    if table_size < counts.len() {
        return Err(Error::InvalidArgument(format!(
            "noise table size {table_size} is smaller than the vocabulary ({})",
            counts.len()
        )));
    }
    // loaded models have no counts; fall back to uniform
    let weights: Vec<f64> = if counts.iter().all(|&c| c == 0) {
        vec![1.0; counts.len()]
    } else {
        counts.iter().map(|&c| (c as f64).powf(exponent)).collect()
    };
    let total: f64 = weights.iter().sum();
    let mut table = Vec::with_capacity(table_size);
    let mut cumulative = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cumulative += w;
        let end = if i + 1 == weights.len() {
            table_size
        } else {
            ((cumulative / total) * table_size as f64).round() as usize
        };
        let end = end.clamp(table.len(), table_size);
        table.resize(end, i as u32);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn slots(table: &[u32], token: u32) -> usize {
        table.iter().filter(|&&t| t == token).count()
    }

    #[test]
    fn symmetric_counts() {
        let t = noise_table_from_counts(&[1, 1], 0.75, 10).unwrap();
        assert_eq!((slots(&t, 0), slots(&t, 1)), (5, 5));
    }

    #[test]
    fn power_share() {
        let t = noise_table_from_counts(&[16, 1], 0.75, 9).unwrap();
        assert_eq!((slots(&t, 0), slots(&t, 1)), (8, 1));
        assert_eq!(&t[..8], &[0; 8]);
    }

    #[test]
    fn single_token() {
        let t = noise_table_from_counts(&[7], 0.75, 5).unwrap();
        assert_eq!(t, vec![0; 5]);
    }

    #[test]
    fn too_small() {
        assert!(noise_table_from_counts(&[1, 2, 3], 0.75, 2).is_err());
    }

    proptest! {
        #[test]
        fn shares_within_one_slot(counts in prop::collection::vec(1u64..10_000, 1..40), extra in 0usize..5000) {
            let size = counts.len() + extra;
            let t = noise_table_from_counts(&counts, 0.75, size).unwrap();
            prop_assert_eq!(t.len(), size);
            prop_assert!(t.windows(2).all(|w| w[0] <= w[1]));
            let total: f64 = counts.iter().map(|&c| (c as f64).powf(0.75)).sum();
            for (i, &c) in counts.iter().enumerate() {
                let exact = (c as f64).powf(0.75) / total;
                let got = slots(&t, i as u32) as f64 / size as f64;
                prop_assert!((got - exact).abs() <= 1.0 / size as f64 + 1e-12);
            }
        }
    }
}
