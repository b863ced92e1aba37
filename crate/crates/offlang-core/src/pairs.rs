//! Contrastive pair construction for sub-task A.
//!
//! Three pools over the two classes: negatives = OFF x NOT_OFF, positives =
//! OFF x OFF and NOT_OFF x NOT_OFF — ordered pairs, self-pairs included, so
//! the pool sizes are exactly n*m, n^2, m^2. Pools are kept as the two class
//! member lists; pair `k` of a pool maps to `(members_a[k / |b|],
//! members_b[k % |b|])`, which enumerates the Cartesian product without
//! materializing it. Sampling draws `size/2` negatives and `size/4` from each
//! positive pool, uniformly without replacement, then shuffles the union.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{Corpus, LabelA};
use crate::rng::Rng;

/// One class member carried into pools and sampled pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolMember {
    pub id: String,
    pub text: String,
}

/// The three contrastive example pools for sub-task A.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPools {
    off: Vec<PoolMember>,
    not_off: Vec<PoolMember>,
}

/// Identifies a pool in sizes, errors, and enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Negatives,
    PositivesOff,
    PositivesNotOff,
}

impl PoolKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolKind::Negatives => "negatives",
            PoolKind::PositivesOff => "positives_off",
            PoolKind::PositivesNotOff => "positives_not_off",
        }
    }
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairError {
    /// Pool construction needs at least one record of each class.
    SingleClassCorpus,
    /// Sample size must be divisible by 4 to honor the 2:1:1 split.
    InvalidSize(u64),
    InsufficientPool {
        pool: PoolKind,
        requested: u64,
        available: u64,
    },
}

impl fmt::Display for PairError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairError::SingleClassCorpus => {
                f.write_str("corpus must contain both OFF and NOT_OFF records")
            }
            PairError::InvalidSize(n) => write!(f, "sample size {n} is not divisible by 4"),
            PairError::InsufficientPool {
                pool,
                requested,
                available,
            } => {
                write!(
                    f,
                    "pool {pool} has {available} pairs, {requested} requested"
                )
            }
        }
    }
}

impl core::error::Error for PairError {}

/// Build the sub-task A pools from a labeled corpus.
pub fn build_pools(corpus: &Corpus) -> Result<PairPools, PairError> {
    let mut off = Vec::new();
    let mut not_off = Vec::new();
    for r in corpus.records() {
        let member = PoolMember {
            id: r.id.clone(),
            text: r.text.clone(),
        };
        match r.label_a {
            LabelA::Off => off.push(member),
            LabelA::NotOff => not_off.push(member),
        }
    }
    if off.is_empty() || not_off.is_empty() {
        return Err(PairError::SingleClassCorpus);
    }
    Ok(PairPools { off, not_off })
}

impl PairPools {
    /// Number of OFF records (`n`).
    pub fn off_count(&self) -> usize {
        self.off.len()
    }

    /// Number of NOT_OFF records (`m`).
    pub fn not_off_count(&self) -> usize {
        self.not_off.len()
    }

    pub fn len(&self, pool: PoolKind) -> u64 {
        let n = self.off.len() as u64;
        let m = self.not_off.len() as u64;
        match pool {
            PoolKind::Negatives => n * m,
            PoolKind::PositivesOff => n * n,
            PoolKind::PositivesNotOff => m * m,
        }
    }

    fn sides(&self, pool: PoolKind) -> (&[PoolMember], &[PoolMember]) {
        match pool {
            PoolKind::Negatives => (&self.off, &self.not_off),
            PoolKind::PositivesOff => (&self.off, &self.off),
            PoolKind::PositivesNotOff => (&self.not_off, &self.not_off),
        }
    }

    /// The `k`-th ordered pair of a pool under row-major enumeration.
    pub fn pair(&self, pool: PoolKind, k: u64) -> (&PoolMember, &PoolMember) {
        let (a, b) = self.sides(pool);
        let cols = b.len() as u64;
        (&a[(k / cols) as usize], &b[(k % cols) as usize])
    }

    /// Enumerate a pool in row-major order.
    pub fn iter(&self, pool: PoolKind) -> impl Iterator<Item = (&PoolMember, &PoolMember)> + '_ {
        (0..self.len(pool)).map(move |k| self.pair(pool, k))
    }
}

/// One sampled pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pair {
    pub text_a: String,
    pub text_b: String,
    pub similar: bool,
}

/// How a [`PairDataset`] was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingPlan {
    pub size: u64,
    pub seed: u64,
}

/// A balanced sample of contrastive pairs: half negatives, a quarter from
/// each positive pool, in seeded-shuffled order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairDataset {
    pub pairs: Vec<Pair>,
    pub plan: SamplingPlan,
}

/// Draw `size/2` negatives and `size/4` positives of each class, uniformly
/// without replacement and seeded, then shuffle the union with the same
/// stream. `size` must be divisible by 4.
pub fn sample_pairs(pools: &PairPools, size: u64, seed: u64) -> Result<PairDataset, PairError> {
    if !size.is_multiple_of(4) {
        return Err(PairError::InvalidSize(size));
    }
    let wants = [
        (PoolKind::Negatives, size / 2),
        (PoolKind::PositivesOff, size / 4),
        (PoolKind::PositivesNotOff, size / 4),
    ];
    for (pool, requested) in wants {
        let available = pools.len(pool);
        if requested > available {
            return Err(PairError::InsufficientPool {
                pool,
                requested,
                available,
            });
        }
    }
    let mut rng = Rng::seed_from(seed);
    let mut pairs = Vec::with_capacity(size as usize);
    for (pool, requested) in wants {
        let similar = pool != PoolKind::Negatives;
        for k in rng.sample_without_replacement(pools.len(pool), requested as usize) {
            let (a, b) = pools.pair(pool, k);
            pairs.push(Pair {
                text_a: a.text.clone(),
                text_b: b.text.clone(),
                similar,
            });
        }
    }
    rng.shuffle(&mut pairs);
    Ok(PairDataset {
        pairs,
        plan: SamplingPlan { size, seed },
    })
}
