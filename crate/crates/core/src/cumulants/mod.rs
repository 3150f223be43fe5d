//! Cumulant and Ursell-function combinatorics over set partitions, k-statistic
//! ladders across window sizes, and CLT diagnostics.

mod kstat;
mod ursell;

pub use kstat::{
    clt_diagnostics, k_statistics, ks_p_value, loglog_slope, required_replicates, CltReport,
    CumulantLadder, LadderPoint, Slope, MAX_KSTAT_ORDER, MIN_CLT_REPLICATES,
};
pub use ursell::{
    cyclic_truncated_correlation, ursell_alpha, ursell_decay_scan, ursell_from_correlations,
    DecayPoint,
};

use num_traits::{FromPrimitive, Num};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CumulantError {
    #[error("order {k} exceeds the supported maximum {max}")]
    OrderTooLarge { k: usize, max: usize },
    #[error("order {k} needs at least {need} replicates, got {got}")]
    InsufficientReplicates { k: usize, got: usize, need: usize },
    #[error("degenerate sample: zero variance")]
    Degenerate,
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error("sampling failed: {0}")]
    Sampling(String),
}

/// Largest order for the exact partition tables.
pub const MAX_EXACT_ORDER: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Blocks in order of their smallest element, each sorted.
    pub blocks: Vec<Vec<usize>>,
    /// (−1)^{b−1}(b−1)! for b blocks.
    pub weight: i64,
}

/// All set partitions of {0..k−1}.
#[derive(Clone, Debug)]
pub struct PartitionTable {
    k: usize,
    parts: Vec<Partition>,
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

impl PartitionTable {
    pub fn new(k: usize) -> Result<Self, CumulantError> {
        if k > MAX_EXACT_ORDER {
            return Err(CumulantError::OrderTooLarge {
                k,
                max: MAX_EXACT_ORDER,
            });
        }
        let mut parts = Vec::new();
        // restricted growth strings a with a[0] = 0, a[i] ≤ 1 + max(a[..i])
        let mut a = vec![0usize; k];
        loop {
            let nb = a.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); nb];
            for (i, &b) in a.iter().enumerate() {
                blocks[b].push(i);
            }
            let sign = if nb % 2 == 1 { 1 } else { -1 };
            parts.push(Partition {
                weight: sign * factorial(nb.saturating_sub(1)),
                blocks,
            });
            // next string
            let mut i = k;
            loop {
                if i <= 1 {
                    return Ok(PartitionTable { k, parts });
                }
                i -= 1;
                let cap = a[..i].iter().max().unwrap() + 1;
                if a[i] < cap {
                    a[i] += 1;
                    for x in a.iter_mut().skip(i + 1) {
                        *x = 0;
                    }
                    break;
                }
            }
        }
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Number of partitions with exactly b blocks.
    pub fn count_with_blocks(&self, b: usize) -> usize {
        self.parts.iter().filter(|p| p.blocks.len() == b).count()
    }
}

fn weight<T: FromPrimitive>(w: i64) -> T {
    T::from_i64(w).expect("partition weight fits the scalar type")
}

/// S_j = Σ_π w(π) Π_{B∈π} M_{|B|} for j = 1..k, with M the raw moments M₁..M_k.
pub fn cumulants_from_moments<T: Num + Clone + FromPrimitive>(
    moments: &[T],
) -> Result<Vec<T>, CumulantError> {
    (1..=moments.len())
        .map(|j| {
            let table = PartitionTable::new(j)?;
            Ok(table.parts.iter().fold(T::zero(), |acc, p| {
                let prod = p
                    .blocks
                    .iter()
                    .fold(T::one(), |q, b| q * moments[b.len() - 1].clone());
                acc + weight::<T>(p.weight) * prod
            }))
        })
        .collect()
}

/// M_j = Σ_π Π_{B∈π} S_{|B|}.
pub fn moments_from_cumulants<T: Num + Clone + FromPrimitive>(
    cumulants: &[T],
) -> Result<Vec<T>, CumulantError> {
    (1..=cumulants.len())
        .map(|j| {
            let table = PartitionTable::new(j)?;
            Ok(table.parts.iter().fold(T::zero(), |acc, p| {
                acc + p
                    .blocks
                    .iter()
                    .fold(T::one(), |q, b| q * cumulants[b.len() - 1].clone())
            }))
        })
        .collect()
}
