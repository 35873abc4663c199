//! Seeded Monte Carlo estimators for the counting and spatial chains.
//!
//! # Replica seeds
//!
//! Replica `r` of a run with master seed `s` draws from
//! `RandomSource::from_seed(derive_replica_seed(s, r))`, where
//!
//! ```text
//! z = s + (r + 1) * 0x9E3779B97F4A7C15          (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9     (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB     (wrapping)
//! seed = z ^ (z >> 31)
//! ```
//!
//! i.e. the `(r + 1)`-th output of a SplitMix64 generator started at `s`.
//! The finalizer is a bijection and the increment is odd, so distinct replica
//! indices below `2^64` always get distinct seeds.
//!
//! Replicas run in parallel; their outcomes are gathered in replica-index
//! order and reduced with exact integer arithmetic, so results do not depend
//! on thread count or scheduling.

use rayon::prelude::*;

use crate::chain::{
    step_count, step_spatial_in_place, ChainParams, CountState, GenomeConfig, RandomSource,
};
use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_CONST1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_CONST2: u64 = 0x94D0_49BB_1331_11EB;

/// Per-replica step cap for hitting-time estimators.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Spatial runs record full configuration counts up to this many sites.
pub const CONFIG_HISTOGRAM_MAX_SITES: usize = 16;

pub fn derive_replica_seed(master_seed: u64, replica_index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(replica_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(MIX_CONST1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX_CONST2);
    z ^ (z >> 31)
}

/// Default burn-in, `ceil(20 N ln(N + 1))` steps.
pub fn default_burn_in(n_sites: usize) -> u64 {
    (20.0 * n_sites as f64 * (n_sites as f64 + 1.0).ln()).ceil() as u64
}

/// Mean of independent replicas with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicas)`; zero for one replica.
    pub std_error: f64,
    pub replicas: u64,
    pub master_seed: u64,
}

impl EstimateWithCI {
    /// Summarizes integer-valued replica outcomes. Sums are accumulated in
    /// `u128`, so the result is independent of the order of `samples`.
    pub fn from_samples(samples: &[u64], master_seed: u64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("replicas must be at least 1".into()));
        }
        let n = samples.len() as u128;
        let (sum, sum_sq) = samples.iter().fold((0u128, 0u128), |(s, sq), &x| {
            let x = u128::from(x);
            (s + x, sq + x * x)
        });
        let mean = sum as f64 / n as f64;
        let std_error = if n > 1 {
            // n * sum_sq - sum^2 = n^2 * (population variance), exact.
            let scatter = n * sum_sq - sum * sum;
            let variance = scatter as f64 / (n * (n - 1)) as f64;
            (variance / n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            std_error,
            replicas: samples.len() as u64,
            master_seed,
        })
    }

    /// `|mean - reference| / std_error`; infinite when the error is zero and
    /// the mean is off.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = (self.mean - reference).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.std_error
        }
    }
}

/// Visit counts of the counting chain over a recorded window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyHistogram {
    pub counts: Vec<u64>,
    pub total_steps: u64,
}

impl OccupancyHistogram {
    pub fn frequencies(&self) -> Vec<f64> {
        let total = self.total_steps as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }
}

fn check_steps(steps: u64) -> Result<()> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    Ok(())
}

/// Simulates `burn_in + steps` steps of the counting chain from `init_k` and
/// counts the states visited at times `burn_in + 1 ..= burn_in + steps`.
pub fn run_occupancy(
    params: &ChainParams,
    init_k: CountState,
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<OccupancyHistogram> {
    let mut k = params.check_state(init_k)?;
    check_steps(steps)?;
    let mut rng = RandomSource::from_seed(seed);
    for _ in 0..burn_in {
        k = step_count(params, k, &mut rng);
    }
    let mut counts = vec![0u64; params.n_sites() + 1];
    for _ in 0..steps {
        k = step_count(params, k, &mut rng);
        counts[k.get()] += 1;
    }
    Ok(OccupancyHistogram {
        counts,
        total_steps: steps,
    })
}

/// States at times `burn_in, burn_in + 1, …, burn_in + steps`, drawn from
/// the same stream as [`run_occupancy`] with identical arguments.
pub fn run_trajectory(
    params: &ChainParams,
    init_k: CountState,
    steps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<Vec<usize>> {
    let mut k = params.check_state(init_k)?;
    let mut rng = RandomSource::from_seed(seed);
    for _ in 0..burn_in {
        k = step_count(params, k, &mut rng);
    }
    let mut path = Vec::with_capacity(steps as usize + 1);
    path.push(k.get());
    for _ in 0..steps {
        k = step_count(params, k, &mut rng);
        path.push(k.get());
    }
    Ok(path)
}

/// Runs `replicas` independent hitting-time replicas and reduces them.
/// `replica` returns `None` when it hits the cap.
fn run_replicas<F>(replicas: u64, seed: u64, cap: u64, replica: F) -> Result<EstimateWithCI>
where
    F: Fn(&mut RandomSource) -> Option<u64> + Sync,
{
    if replicas == 0 {
        return Err(Error::InvalidArgument("replicas must be at least 1".into()));
    }
    let outcomes: Vec<Option<u64>> = (0..replicas)
        .into_par_iter()
        .map(|r| replica(&mut RandomSource::from_seed(derive_replica_seed(seed, r))))
        .collect();
    let truncated = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    if truncated > 0 {
        return Err(Error::Truncated {
            truncated,
            replicas,
            cap,
        });
    }
    let samples: Vec<u64> = outcomes.into_iter().flatten().collect();
    EstimateWithCI::from_samples(&samples, seed)
}

/// Mean first return time to `k`, `min{n >= 1 : Y_n = k}` from `Y_0 = k`.
pub fn estimate_return_time(
    params: &ChainParams,
    k: CountState,
    replicas: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    estimate_return_time_capped(params, k, replicas, seed, DEFAULT_STEP_CAP)
}

pub fn estimate_return_time_capped(
    params: &ChainParams,
    k: CountState,
    replicas: u64,
    seed: u64,
    cap: u64,
) -> Result<EstimateWithCI> {
    let k = params.check_state(k)?;
    let (q, _) = params.stationary_q()?;
    let absorbing = (q == 1.0 && k.get() == params.n_sites()) || (q == 0.0 && k.get() == 0);
    if (q == 0.0 || q == 1.0) && !absorbing {
        return Err(Error::NonRecurrent {
            k: k.get(),
            q: q.to_string(),
        });
    }
    run_replicas(replicas, seed, cap, |rng| {
        let mut state = k;
        for t in 1..=cap {
            state = step_count(params, state, rng);
            if state == k {
                return Some(t);
            }
        }
        None
    })
}

/// Mean hitting time of `N` for the `p = 1` chain started at `init_k`.
pub fn estimate_absorption_time(
    n_sites: usize,
    init_k: CountState,
    replicas: u64,
    seed: u64,
) -> Result<EstimateWithCI> {
    estimate_absorption_time_capped(n_sites, init_k, replicas, seed, DEFAULT_STEP_CAP)
}

pub fn estimate_absorption_time_capped(
    n_sites: usize,
    init_k: CountState,
    replicas: u64,
    seed: u64,
    cap: u64,
) -> Result<EstimateWithCI> {
    let params = ChainParams::new(n_sites, 1.0)?;
    let start = params.check_state(init_k)?;
    let target = CountState::new(n_sites);
    run_replicas(replicas, seed, cap, |rng| {
        let mut state = start;
        let mut t = 0;
        while state != target {
            if t == cap {
                return None;
            }
            state = step_count(&params, state, rng);
            t += 1;
        }
        Some(t)
    })
}

/// Per-site statistics of thinned spatial samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMarginals {
    pub per_site_frequency: Vec<f64>,
    pub max_abs_pair_covariance: f64,
    pub samples: u64,
}

/// Everything collected by one spatial run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialRun {
    pub marginals: SpatialMarginals,
    /// Sample covariance matrix of the site indicators, row-major `N x N`.
    pub covariance: Vec<f64>,
    /// Ones-count of each sample, tallied over `0..=N`.
    pub ones_count_histogram: Vec<u64>,
    /// Sample counts per configuration (bit `s` of the index is site `s`),
    /// kept only for `N <= CONFIG_HISTOGRAM_MAX_SITES`.
    pub config_histogram: Option<Vec<u64>>,
    pub final_config: GenomeConfig,
}

/// Simulates the spatial chain from a uniformly random configuration
/// (`N` leading fair-bit draws), discards `burn_in` steps, then runs `steps`
/// more and samples after every `sample_every`-th of them.
pub fn run_spatial(
    params: &ChainParams,
    steps: u64,
    burn_in: u64,
    sample_every: u64,
    seed: u64,
) -> Result<SpatialRun> {
    params.interior_q()?;
    check_steps(steps)?;
    if sample_every == 0 {
        return Err(Error::InvalidArgument(
            "sample_every must be at least 1".into(),
        ));
    }
    if steps < sample_every {
        return Err(Error::InvalidArgument(format!(
            "steps ({steps}) must be at least sample_every ({sample_every})"
        )));
    }
    let n = params.n_sites();
    let mut rng = RandomSource::from_seed(seed);
    let mut config = GenomeConfig::random(n, &mut rng);
    for _ in 0..burn_in {
        step_spatial_in_place(params, &mut config, &mut rng);
    }

    let mut site_ones = vec![0u64; n];
    // Upper triangle (i <= j) of the co-occurrence counts.
    let mut pair_ones = vec![0u64; n * n];
    let mut ones_count_histogram = vec![0u64; n + 1];
    let mut config_histogram = (n <= CONFIG_HISTOGRAM_MAX_SITES).then(|| vec![0u64; 1 << n]);
    let mut ones = Vec::with_capacity(n);
    let mut samples = 0u64;

    for t in 1..=steps {
        step_spatial_in_place(params, &mut config, &mut rng);
        if t % sample_every != 0 {
            continue;
        }
        samples += 1;
        ones.clear();
        ones.extend((0..n).filter(|&s| config.get(s)));
        ones_count_histogram[ones.len()] += 1;
        for (a, &i) in ones.iter().enumerate() {
            site_ones[i] += 1;
            for &j in &ones[a..] {
                pair_ones[i * n + j] += 1;
            }
        }
        if let Some(hist) = config_histogram.as_mut() {
            hist[ones.iter().fold(0usize, |m, &s| m | 1 << s)] += 1;
        }
    }

    let count = samples as f64;
    let per_site_frequency: Vec<f64> = site_ones.iter().map(|&c| c as f64 / count).collect();
    let mut covariance = vec![0.0; n * n];
    let mut max_abs_pair_covariance: f64 = 0.0;
    if samples > 1 {
        for i in 0..n {
            for j in i..n {
                let centered =
                    pair_ones[i * n + j] as f64 - site_ones[i] as f64 * site_ones[j] as f64 / count;
                let cov = centered / (count - 1.0);
                covariance[i * n + j] = cov;
                covariance[j * n + i] = cov;
                if i != j {
                    max_abs_pair_covariance = max_abs_pair_covariance.max(cov.abs());
                }
            }
        }
    }

    Ok(SpatialRun {
        marginals: SpatialMarginals {
            per_site_frequency,
            max_abs_pair_covariance,
            samples,
        },
        covariance,
        ones_count_histogram,
        config_histogram,
        final_config: config,
    })
}

pub fn run_spatial_marginals(
    params: &ChainParams,
    steps: u64,
    burn_in: u64,
    sample_every: u64,
    seed: u64,
) -> Result<SpatialMarginals> {
    run_spatial(params, steps, burn_in, sample_every, seed).map(|run| run.marginals)
}
