//! The Bubley–Dyer Markov chain on linear extensions.
//!
//! Each step tosses a fair coin. On heads the state is held. On tails an
//! adjacent position `i ∈ {1, …, m−1}` is drawn with probability
//! `f(i) = i(m−i)/K`, `K = (m³−m)/6`, and classes at positions `i` and `i+1`
//! swap unless the swap breaks a strict constraint. The chain is lazy,
//! symmetric and ergodic, so its stationary law is uniform.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::orders::{LinearExtension, PartialPreferenceOrder};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Target total-variation distance from uniform.
    pub epsilon: f64,
    /// Multiplier on `m³·ln(m/ε)` when choosing the number of steps.
    pub step_constant: f64,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            step_constant: 4.0,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter("sampler epsilon must lie in (0, 1)".into()));
        }
        if !(self.step_constant > 0.0) {
            return Err(Error::InvalidParameter("step constant must be positive".into()));
        }
        Ok(())
    }

    /// `⌈c₀·m³·ln(m/ε)⌉`, at least 1.
    pub fn steps(&self, classes: usize) -> u64 {
        let m = classes as f64;
        let t = (self.step_constant * m * m * m * (m / self.epsilon).ln()).ceil();
        (t as u64).max(1)
    }
}

/// Swap-position weights `f(i) = i(m−i)/K` on `{1, …, m−1}`.
#[derive(Debug, Clone)]
pub struct SwapDistribution {
    m: usize,
    k: u64,
    cumulative: Vec<u64>,
    // position for each of the K integer tickets, when K is small enough
    table: Vec<u16>,
}

const TABLE_LIMIT: u64 = 1 << 20;

impl SwapDistribution {
    /// Needs `m ≥ 2` classes.
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("swap distribution needs two classes".into()));
        }
        let mm = m as u64;
        let k = (mm * mm * mm - mm) / 6;
        let mut cumulative = Vec::with_capacity(m - 1);
        let mut acc = 0;
        for i in 1..mm {
            acc += i * (mm - i);
            cumulative.push(acc);
        }
        debug_assert_eq!(acc, k);
        let mut table = Vec::new();
        if k <= TABLE_LIMIT && m <= u16::MAX as usize {
            table.reserve(k as usize);
            let mut lo = 0;
            for (i, &hi) in cumulative.iter().enumerate() {
                table.extend(std::iter::repeat_n((i + 1) as u16, (hi - lo) as usize));
                lo = hi;
            }
        }
        Ok(Self {
            m,
            k,
            cumulative,
            table,
        })
    }

    pub fn classes(&self) -> usize {
        self.m
    }

    /// `K = (m³ − m)/6`.
    pub fn normalizer(&self) -> u64 {
        self.k
    }

    /// `f(i)` for `i ∈ 1..m`.
    pub fn weight(&self, i: usize) -> f64 {
        assert!(i >= 1 && i < self.m);
        (i * (self.m - i)) as f64 / self.k as f64
    }

    pub fn weights(&self) -> Vec<f64> {
        (1..self.m).map(|i| self.weight(i)).collect()
    }

    /// Draws a 1-based swap position.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.position(rng.random_range(0..self.k))
    }

    #[inline]
    fn position(&self, ticket: u64) -> usize {
        if !self.table.is_empty() {
            self.table[ticket as usize] as usize
        } else {
            self.cumulative.partition_point(|&c| c <= ticket) + 1
        }
    }

    /// One lazy move from a single draw over `2K` tickets: the upper half is
    /// heads (`None`), the lower half picks a position by `f`.
    #[inline]
    pub fn draw_move<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        let ticket = if self.k < (1 << 31) {
            rng.random_range(0..2 * self.k as u32) as u64
        } else {
            rng.random_range(0..2 * self.k)
        };
        (ticket < self.k).then(|| self.position(ticket))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coin {
    Heads,
    Tails,
}

/// One chain transition with the coin and position fixed. Position `i` is
/// 1-based. Returns whether the state changed.
pub fn apply_move(
    poset: &PartialPreferenceOrder,
    state: &mut LinearExtension,
    coin: Coin,
    i: usize,
) -> bool {
    if coin == Coin::Heads {
        return false;
    }
    let order = state.classes_mut();
    assert!(i >= 1 && i < order.len(), "swap position out of range");
    let (x, y) = (order[i - 1], order[i]);
    if poset.class_precedes(x, y) {
        false
    } else {
        order.swap(i - 1, i);
        true
    }
}

/// One random transition of the chain.
pub fn chain_step<R: Rng + ?Sized>(
    poset: &PartialPreferenceOrder,
    state: &mut LinearExtension,
    rng: &mut R,
    dist: &SwapDistribution,
) -> bool {
    match dist.draw_move(rng) {
        Some(i) => apply_move(poset, state, Coin::Tails, i),
        None => false,
    }
}

/// Precomputed chain for one poset.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    poset: &'a PartialPreferenceOrder,
    dist: Option<SwapDistribution>,
    steps: u64,
    start: LinearExtension,
    // a total order never moves
    frozen: bool,
    // `2K` tickets: the swap position, or 0 for heads
    moves: Option<Vec<u16>>,
}

impl<'a> Sampler<'a> {
    pub fn new(poset: &'a PartialPreferenceOrder, config: &SamplerConfig) -> Result<Self> {
        config.validate()?;
        let m = poset.class_count();
        let dist = if m >= 2 { Some(SwapDistribution::new(m)?) } else { None };
        let moves = dist.as_ref().filter(|d| !d.table.is_empty()).map(|d| {
            let mut t = d.table.clone();
            t.resize(2 * d.table.len(), 0);
            t
        });
        Ok(Self {
            moves,
            poset,
            dist,
            steps: config.steps(m),
            start: LinearExtension::minimal(poset),
            frozen: poset.is_complete(),
        })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Runs the chain from the minimal topological order for the configured
    /// number of steps.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LinearExtension {
        let mut state = self.start.clone();
        let Some(dist) = &self.dist else {
            return state;
        };
        if self.frozen {
            return state;
        }
        let m = self.poset.class_count();
        let less = self.poset.closure_matrix();
        let order = state.classes_mut();
        let Some(moves) = &self.moves else {
            for _ in 0..self.steps {
                let Some(i) = dist.draw_move(rng) else {
                    continue;
                };
                let (x, y) = (order[i - 1], order[i]);
                if !less[x * m + y] {
                    order.swap(i - 1, i);
                }
            }
            return state;
        };
        // Same draws as `draw_move`, without data-dependent branches: heads
        // tickets read position 0, which never swaps.
        let span = moves.len() as u32;
        for _ in 0..self.steps {
            let code = moves[rng.random_range(0..span) as usize] as usize;
            let i = code.max(1);
            let (x, y) = (order[i - 1], order[i]);
            let live = (code != 0) & !less[x * m + y];
            let d = (x ^ y) & (live as usize).wrapping_neg();
            order[i - 1] = x ^ d;
            order[i] = y ^ d;
        }
        state
    }

    /// Draw `j` comes from stream `j` under `seed`, so the result does not
    /// depend on scheduling.
    pub fn sample_many(&self, k: usize, seed: u64) -> Vec<LinearExtension> {
        (0..k)
            .into_par_iter()
            .map(|j| {
                let mut rng: ChaCha8Rng = stream_rng(seed, j as u64);
                self.sample(&mut rng)
            })
            .collect()
    }
}

/// A near-uniform random linear extension.
pub fn sample_extension<R: Rng + ?Sized>(
    poset: &PartialPreferenceOrder,
    config: &SamplerConfig,
    rng: &mut R,
) -> Result<LinearExtension> {
    Ok(Sampler::new(poset, config)?.sample(rng))
}

/// `k` independent restarts of the chain, seeded from `config.seed`.
pub fn sample_many(
    poset: &PartialPreferenceOrder,
    k: usize,
    config: &SamplerConfig,
) -> Result<Vec<LinearExtension>> {
    Ok(Sampler::new(poset, config)?.sample_many(k, config.seed))
}
