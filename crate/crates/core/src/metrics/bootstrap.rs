use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mean_std, MetricsError};
use crate::engine::{ApplicationMatrix, SignalMode};
use crate::gender::Gender;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPoint {
    pub size: usize,
    pub n_boot: usize,
    pub mean: f64,
    pub std: f64,
}

/// Draws `n_boot` template subsets per size, uniformly without
/// replacement, each sorted into bank order. One ChaCha8 stream seeded with
/// `seed` feeds all sizes in the given order.
pub fn draw_subsets(
    bank_len: usize,
    sizes: &[usize],
    n_boot: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<usize>>>, MetricsError> {
    if let Some(&need) = sizes.iter().find(|&&s| s > bank_len || s == 0) {
        return Err(MetricsError::BankTooSmall { need, have: bank_len });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sizes
        .iter()
        .map(|&size| {
            (0..n_boot)
                .map(|_| {
                    let mut subset = index::sample(&mut rng, bank_len, size).into_vec();
                    subset.sort_unstable();
                    subset
                })
                .collect()
        })
        .collect())
}

/// Greedy accuracy `A_C` over random template subsets of increasing size.
///
/// Uses a correct-gender matrix of the full bank: the greedy search over a
/// subset corrects a biased sample exactly when some template of the subset
/// has a matching cell, so each subset is scored without new translations.
pub fn bootstrap_subsets(
    matrix: &ApplicationMatrix,
    sizes: &[usize],
    n_boot: usize,
    seed: u64,
) -> Result<Vec<BootstrapPoint>, MetricsError> {
    if matrix.mode != SignalMode::CorrectGender {
        return Err(MetricsError::WrongMode {
            expected: SignalMode::CorrectGender,
            got: matrix.mode,
        });
    }
    if matrix.n_samples() == 0 || n_boot == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let gold: Vec<Gender> = matrix.baselines.iter().map(|b| b.gold_gender).collect();
    let draws = draw_subsets(matrix.n_templates(), sizes, n_boot, seed)?;
    sizes
        .iter()
        .zip(draws)
        .map(|(&size, subsets)| {
            let scores = subsets
                .iter()
                .map(|subset| {
                    let pred = matrix.greedy_replay(subset);
                    super::accuracy::<u8>(&pred, &gold, None).map(|s| s.mean)
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let (mean, std) = mean_std(&scores).expect("n_boot > 0");
            Ok(BootstrapPoint { size, n_boot, mean, std })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_are_sorted_distinct_and_seeded() {
        let a = draw_subsets(10, &[3, 10], 5, 7).unwrap();
        assert_eq!(a, draw_subsets(10, &[3, 10], 5, 7).unwrap());
        assert_ne!(a, draw_subsets(10, &[3, 10], 5, 8).unwrap());
        for s in &a[0] {
            assert_eq!(s.len(), 3);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(a[1].iter().all(|s| *s == (0..10).collect::<Vec<_>>()));
        assert_eq!(draw_subsets(4, &[5], 1, 0), Err(MetricsError::BankTooSmall { need: 5, have: 4 }));
    }
}
