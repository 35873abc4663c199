//! Model parameters and the two Markov chains: the counting chain on
//! `{0, …, N}` and the spatial chain on genome configurations `{0,1}^N`.
//!
//! Both chains share one randomness contract. Every time step draws exactly
//! two 64-bit words from the [`RandomSource`], in this order:
//!
//! 1. a site index, uniform on `0..N`, taken as `(word * N) >> 64`;
//! 2. a flip coin, uniform on `[0, 1)`, taken as `(word >> 11) * 2^-53`.
//!
//! A picked 0-site becomes 1 when the coin is below `p_up`; a picked 1-site
//! becomes 0 when the coin is below `p_down`. The counting chain treats
//! sites `0..k` as the ones, so a counting trajectory and a spatial
//! trajectory driven by the same stream make identical flip decisions
//! whenever their configurations agree on which indices hold ones.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Genome length together with the two flip probabilities.
///
/// The one-parameter model with selection parameter `p` is the slice
/// `p_up = p`, `p_down = 1 - p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    n_sites: usize,
    p_up: f64,
    p_down: f64,
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}

impl ChainParams {
    /// One-parameter model: a picked 0 flips with probability `p`, a picked
    /// 1 flips with probability `1 - p`.
    pub fn new(n_sites: usize, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Self::general(n_sites, p, 1.0 - p)
    }

    /// Two-parameter model with independent up and down flip probabilities.
    pub fn general(n_sites: usize, p_up: f64, p_down: f64) -> Result<Self> {
        if n_sites < 1 {
            return Err(Error::InvalidArgument(
                "n_sites must be at least 1".to_string(),
            ));
        }
        check_probability("p_up", p_up)?;
        check_probability("p_down", p_down)?;
        Ok(Self {
            n_sites,
            p_up,
            p_down,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn p_up(&self) -> f64 {
        self.p_up
    }

    pub fn p_down(&self) -> f64 {
        self.p_down
    }

    /// Stationary one-probability `q = p_up / (p_up + p_down)` together with
    /// its complement, each computed from its own numerator.
    ///
    /// Fails for the frozen chain `p_up = p_down = 0`.
    pub fn stationary_q(&self) -> Result<(f64, f64)> {
        let total = self.p_up + self.p_down;
        if total <= 0.0 {
            return Err(Error::DegenerateParams);
        }
        Ok((self.p_up / total, self.p_down / total))
    }

    /// [`Self::stationary_q`] restricted to `0 < q < 1`, where every state is
    /// recurrent and the Gaussian limit is non-degenerate.
    pub fn interior_q(&self) -> Result<(f64, f64)> {
        let (q, r) = self.stationary_q()?;
        if q <= 0.0 || r <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "requires 0 < q < 1, got q = {q}"
            )));
        }
        Ok((q, r))
    }

    /// Checks `0 <= k <= N`.
    pub fn count_state(&self, k: usize) -> Result<CountState> {
        self.check_state(CountState(k))
    }

    pub fn check_state(&self, k: CountState) -> Result<CountState> {
        let k = k.0;
        if k > self.n_sites {
            return Err(Error::StateOutOfRange {
                k,
                n_sites: self.n_sites,
            });
        }
        Ok(CountState(k))
    }

    /// Real root of `up(k) = down(k)` when `up` and `down` are extended
    /// linearly in `k`.
    pub fn equilibrium_state(&self) -> Result<f64> {
        let (q, _) = self.stationary_q()?;
        Ok(self.n_sites as f64 * q)
    }
}

/// Number of sites currently in state 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountState(usize);

impl CountState {
    pub fn new(k: usize) -> Self {
        Self(k)
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// One-step probabilities out of a counting state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionTriple {
    pub up: f64,
    pub down: f64,
    pub stay: f64,
}

/// Birth-death kernel of the counting chain at `k`.
///
/// The boundary states reflect: `down` is exactly zero at `k = 0` and `up`
/// is exactly zero at `k = N`.
pub fn transition_probs(params: &ChainParams, k: CountState) -> Result<TransitionTriple> {
    let k = params.check_state(k)?.0;
    let n = params.n_sites as f64;
    let up = params.p_up * (params.n_sites - k) as f64 / n;
    let down = params.p_down * k as f64 / n;
    Ok(TransitionTriple {
        up,
        down,
        stay: 1.0 - up - down,
    })
}

/// Deterministic pseudo-random stream seeded from a single `u64`.
///
/// Backed by ChaCha8 with the `rand_core` `seed_from_u64` key expansion,
/// both of which are value-stable across releases.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform index on `0..n` from a single draw (multiply-shift; bias at
    /// most `n / 2^64`).
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Uniform on `[0, 1)` with 53 random bits from a single draw.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }
}

/// Advances the counting chain by one time step, self-transitions included.
///
/// `k` must be a valid state for `params`.
#[inline]
pub fn step_count(params: &ChainParams, k: CountState, rng: &mut RandomSource) -> CountState {
    debug_assert!(k.0 <= params.n_sites);
    let site = rng.index(params.n_sites);
    let coin = rng.unit();
    if site < k.0 {
        if coin < params.p_down {
            return CountState(k.0 - 1);
        }
    } else if coin < params.p_up {
        return CountState(k.0 + 1);
    }
    k
}

const WORD_BITS: usize = 64;

/// Genome configuration stored as packed bits with a cached ones-count.
///
/// Sites are indexed `0..N` internally; anything user-facing labels them
/// `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GenomeConfig {
    words: Vec<u64>,
    len: usize,
    ones: usize,
}

impl GenomeConfig {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
            ones: 0,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut config = Self::zeros(len);
        for site in 0..len {
            config.set(site, true);
        }
        config
    }

    /// Builds a configuration from 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut config = Self::zeros(bits.len());
        for (site, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => config.set(site, true),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "site {} holds {other}, expected 0 or 1",
                        site + 1
                    )))
                }
            }
        }
        Ok(config)
    }

    /// The configuration whose sites `0..len` are the low bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(
            len <= WORD_BITS,
            "mask configurations hold at most 64 sites"
        );
        let mut config = Self::zeros(len);
        for site in 0..len {
            if mask >> site & 1 == 1 {
                config.set(site, true);
            }
        }
        config
    }

    /// Independent fair bits, one draw per site.
    pub fn random(len: usize, rng: &mut RandomSource) -> Self {
        let mut config = Self::zeros(len);
        for site in 0..len {
            if rng.bit() {
                config.set(site, true);
            }
        }
        config
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, site: usize) -> bool {
        debug_assert!(site < self.len);
        self.words[site / WORD_BITS] >> (site % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, site: usize, value: bool) {
        assert!(site < self.len, "site {site} out of range");
        let word = &mut self.words[site / WORD_BITS];
        let mask = 1u64 << (site % WORD_BITS);
        let was = *word & mask != 0;
        if was != value {
            *word ^= mask;
            if value {
                self.ones += 1;
            } else {
                self.ones -= 1;
            }
        }
    }

    #[inline]
    fn flip(&mut self, site: usize) {
        let word = &mut self.words[site / WORD_BITS];
        let mask = 1u64 << (site % WORD_BITS);
        *word ^= mask;
        if *word & mask != 0 {
            self.ones += 1;
        } else {
            self.ones -= 1;
        }
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|s| u8::from(self.get(s))).collect()
    }
}

/// Number of ones in a configuration; the projection onto the counting chain.
pub fn count_ones(config: &GenomeConfig) -> CountState {
    CountState(config.ones)
}

/// Advances the spatial chain in place by one step.
///
/// Returns the flipped site, if any.
#[inline]
pub fn step_spatial_in_place(
    params: &ChainParams,
    config: &mut GenomeConfig,
    rng: &mut RandomSource,
) -> Option<usize> {
    debug_assert_eq!(config.len, params.n_sites);
    let site = rng.index(params.n_sites);
    let coin = rng.unit();
    let threshold = if config.get(site) {
        params.p_down
    } else {
        params.p_up
    };
    if coin < threshold {
        config.flip(site);
        Some(site)
    } else {
        None
    }
}

/// Value-returning form of [`step_spatial_in_place`].
pub fn step_spatial(
    params: &ChainParams,
    config: &GenomeConfig,
    rng: &mut RandomSource,
) -> Result<GenomeConfig> {
    if config.len() != params.n_sites {
        return Err(Error::InvalidArgument(format!(
            "configuration has {} sites, params expect {}",
            config.len(),
            params.n_sites
        )));
    }
    let mut next = config.clone();
    step_spatial_in_place(params, &mut next, rng);
    Ok(next)
}
