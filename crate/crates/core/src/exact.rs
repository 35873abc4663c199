//! Closed-form and numerically exact quantities for the counting and spatial
//! chains.
//!
//! Binomial masses are formed in log space from `lgamma` so that states with
//! astronomically small mass (and the correspondingly huge return times)
//! stay representable.

use std::f64::consts::{LN_10, PI, SQRT_2};

use crate::chain::{count_ones, transition_probs, ChainParams, CountState, GenomeConfig};
use crate::error::{Error, Result};

/// Tolerance on the total mass of a user-supplied distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Largest genome length for which the spatial state space is enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Probability vector over the counting states `0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    mass: Vec<f64>,
}

impl DistributionVector {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidArgument("distribution is empty".into()));
        }
        if let Some(bad) = mass.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "distribution entries must be finite and non-negative, found {bad}"
            )));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "distribution sums to {total}, expected 1"
            )));
        }
        Ok(Self { mass })
    }

    /// Unit mass at `k` on `0..=n_sites`.
    pub fn point_mass(n_sites: usize, k: usize) -> Result<Self> {
        if k > n_sites {
            return Err(Error::StateOutOfRange { k, n_sites });
        }
        let mut mass = vec![0.0; n_sites + 1];
        mass[k] = 1.0;
        Ok(Self { mass })
    }

    pub fn uniform(n_sites: usize) -> Self {
        let w = 1.0 / (n_sites + 1) as f64;
        Self {
            mass: vec![w; n_sites + 1],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mass
    }

    /// Number of states, `N + 1`.
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// Natural log of a probability; `-inf` marks zero mass.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProbability(f64);

impl LogProbability {
    pub const ZERO_MASS: Self = Self(f64::NEG_INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero_mass(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn probability(self) -> f64 {
        self.0.exp()
    }
}

/// `ln C(n, k)`, exact zero at the ends.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    if k == 0 || k == n {
        return 0.0;
    }
    let lg = |x: usize| libm::lgamma(x as f64 + 1.0);
    lg(n) - lg(k) - lg(n - k)
}

/// `k ln q + (n - k) ln(1 - q)` with the `0 ln 0 = 0` convention.
fn ln_product_mass(n: usize, k: usize, q: f64, one_minus_q: f64) -> f64 {
    let term = |count: usize, prob: f64| {
        if count == 0 {
            0.0
        } else {
            count as f64 * prob.ln()
        }
    };
    term(k, q) + term(n - k, one_minus_q)
}

/// Log of the stationary counting mass at `k`, unnormalized by any
/// numerical sum.
pub fn log_stationary_mass(params: &ChainParams, k: CountState) -> Result<LogProbability> {
    let (q, r) = params.stationary_q()?;
    let n = params.n_sites();
    let k = params.check_state(k)?.get();
    Ok(LogProbability(
        ln_binomial(n, k) + ln_product_mass(n, k, q, r),
    ))
}

/// Stationary law of the counting chain, Binomial(N, q) with
/// `q = p_up / (p_up + p_down)`.
pub fn stationary_count(params: &ChainParams) -> Result<DistributionVector> {
    let logs = stationary_count_log(params)?;
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut mass: Vec<f64> = logs.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= total;
    }
    Ok(DistributionVector { mass })
}

/// Log-space stationary counting law, one entry per state.
pub fn stationary_count_log(params: &ChainParams) -> Result<Vec<f64>> {
    let (q, r) = params.stationary_q()?;
    let n = params.n_sites();
    Ok((0..=n)
        .map(|k| ln_binomial(n, k) + ln_product_mass(n, k, q, r))
        .collect())
}

/// Log stationary mass of a single spatial configuration. Depends on the
/// configuration only through its ones-count.
pub fn stationary_spatial_logmass(
    params: &ChainParams,
    config: &GenomeConfig,
) -> Result<LogProbability> {
    if config.len() != params.n_sites() {
        return Err(Error::LengthMismatch {
            left: config.len(),
            right: params.n_sites(),
        });
    }
    let (q, r) = params.stationary_q()?;
    Ok(LogProbability(ln_product_mass(
        params.n_sites(),
        count_ones(config).get(),
        q,
        r,
    )))
}

/// Result of summing the spatial stationary law over every configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialEnumeration {
    pub total: f64,
    /// Spatial mass aggregated by ones-count.
    pub by_count: Vec<f64>,
}

/// Sums `exp(stationary_spatial_logmass)` over all `2^N` configurations.
pub fn enumerate_spatial_mass(params: &ChainParams, cap: usize) -> Result<SpatialEnumeration> {
    let n = params.n_sites();
    if n > cap {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration needs n_sites <= {cap}, got {n}"
        )));
    }
    let mut by_count = vec![0.0; n + 1];
    for mask in 0..(1u64 << n) {
        let config = GenomeConfig::from_mask(n, mask);
        let mass = stationary_spatial_logmass(params, &config)?.probability();
        by_count[count_ones(&config).get()] += mass;
    }
    Ok(SpatialEnumeration {
        total: by_count.iter().sum(),
        by_count,
    })
}

/// Largest violation of `dist(k) up(k) = dist(k+1) down(k+1)` over `k`.
pub fn check_detailed_balance(params: &ChainParams, dist: &DistributionVector) -> Result<f64> {
    let n = params.n_sites();
    if dist.len() != n + 1 {
        return Err(Error::LengthMismatch {
            left: dist.len(),
            right: n + 1,
        });
    }
    let kernel = Kernel::new(params);
    let mass = dist.as_slice();
    let residual = (0..n)
        .map(|k| {
            let flow_down = mass[k + 1] * kernel.down[k + 1];
            mass[k].mul_add(kernel.up[k], -flow_down).abs()
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

/// Expected return time `1 / nu(k)`, carried in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnTime {
    ln_value: f64,
}

impl ReturnTime {
    /// `-ln nu(k)`; `+inf` when the state has no stationary mass.
    pub fn ln_value(self) -> f64 {
        self.ln_value
    }

    pub fn log10_value(self) -> f64 {
        self.ln_value / LN_10
    }

    /// The return time itself; `+inf` both for zero-mass states and when the
    /// value overflows `f64`.
    pub fn value(self) -> f64 {
        self.ln_value.exp()
    }

    /// The return time when it is finite and representable.
    pub fn finite_value(self) -> Option<f64> {
        Some(self.value()).filter(|v| v.is_finite())
    }
}

pub fn expected_return_time(params: &ChainParams, k: CountState) -> Result<ReturnTime> {
    let log_mass = log_stationary_mass(params, k)?;
    Ok(ReturnTime {
        ln_value: -log_mass.value(),
    })
}

/// Large-N approximation `sqrt(2 pi q (1 - q) N)` of the return time to the
/// equilibrium state.
pub fn return_time_asymptotic(params: &ChainParams) -> Result<f64> {
    let (q, r) = params.interior_q()?;
    Ok((2.0 * PI * q * r * params.n_sites() as f64).sqrt())
}

pub fn equilibrium_state(params: &ChainParams) -> Result<f64> {
    params.equilibrium_state()
}

/// Tabulated kernel; index `k` holds the rates out of state `k`.
struct Kernel {
    up: Vec<f64>,
    down: Vec<f64>,
    stay: Vec<f64>,
}

impl Kernel {
    fn new(params: &ChainParams) -> Self {
        let n = params.n_sites();
        let mut kernel = Kernel {
            up: Vec::with_capacity(n + 1),
            down: Vec::with_capacity(n + 1),
            stay: Vec::with_capacity(n + 1),
        };
        for k in 0..=n {
            let t = transition_probs(params, CountState::new(k)).expect("k <= n");
            kernel.up.push(t.up);
            kernel.down.push(t.down);
            kernel.stay.push(t.stay);
        }
        kernel
    }

    fn apply(&self, input: &[f64], out: &mut [f64]) {
        let n = input.len() - 1;
        for k in 0..=n {
            let mut m = input[k] * self.stay[k];
            if k > 0 {
                m += input[k - 1] * self.up[k - 1];
            }
            if k < n {
                m += input[k + 1] * self.down[k + 1];
            }
            out[k] = m;
        }
    }
}

/// Marginal law of the counting chain after `steps` steps from `dist`.
pub fn evolve_distribution(
    params: &ChainParams,
    dist: &DistributionVector,
    steps: u64,
) -> Result<DistributionVector> {
    let mut out = None;
    evolve_with(params, dist, steps, |_, d| out = Some(d.to_vec()))?;
    Ok(DistributionVector {
        mass: out.expect("visitor sees the final law"),
    })
}

/// TV distance to the stationary law at every time `0..=steps`.
pub fn tv_curve(params: &ChainParams, dist: &DistributionVector, steps: u64) -> Result<Vec<f64>> {
    let stationary = stationary_count(params)?;
    let mut curve = Vec::with_capacity(steps as usize + 1);
    evolve_with(params, dist, steps, |_, d| {
        curve.push(tv_slices(d, stationary.as_slice()))
    })?;
    Ok(curve)
}

/// Runs the forward recursion, calling `visit(t, law)` for `t = 0..=steps`.
fn evolve_with<F>(
    params: &ChainParams,
    dist: &DistributionVector,
    steps: u64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(u64, &[f64]),
{
    let n = params.n_sites();
    if dist.len() != n + 1 {
        return Err(Error::LengthMismatch {
            left: dist.len(),
            right: n + 1,
        });
    }
    let kernel = Kernel::new(params);
    let mut current = dist.mass.clone();
    let mut next = vec![0.0; n + 1];
    visit(0, &current);
    for t in 1..=steps {
        kernel.apply(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
        visit(t, &current);
    }
    Ok(())
}

fn tv_slices(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Half the L1 distance between two laws on the same state space.
pub fn total_variation(a: &DistributionVector, b: &DistributionVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(tv_slices(a.as_slice(), b.as_slice()))
}

/// Standard normal CDF via the complementary error function (`libm::erfc`,
/// a port of the FreeBSD/musl implementation with sub-ulp-scale error).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Kolmogorov-type distance between the stationary CDF and its Gaussian
/// limit, with the usual `k + 1/2` continuity correction.
pub fn gaussian_deviation(params: &ChainParams) -> Result<f64> {
    let (q, r) = params.interior_q()?;
    let dist = stationary_count(params)?;
    let n = params.n_sites() as f64;
    let mean = n * q;
    let sd = (n * q * r).sqrt();
    let mut cdf = 0.0;
    let mut worst: f64 = 0.0;
    for (k, m) in dist.as_slice().iter().enumerate() {
        cdf += m;
        let gauss = normal_cdf((k as f64 + 0.5 - mean) / sd);
        worst = worst.max((cdf.min(1.0) - gauss).abs());
    }
    Ok(worst)
}

/// Expected absorption time at `N` for the `p = 1` chain started at
/// `start_k`: `sum_{j=start_k}^{N-1} N / (N - j)`.
pub fn absorption_expectation(n_sites: usize, start_k: usize) -> Result<f64> {
    if n_sites < 1 {
        return Err(Error::InvalidArgument("n_sites must be at least 1".into()));
    }
    if start_k > n_sites {
        return Err(Error::StateOutOfRange {
            k: start_k,
            n_sites,
        });
    }
    // Smallest terms first.
    let harmonic_tail: f64 = (1..=n_sites - start_k).rev().map(|m| 1.0 / m as f64).sum();
    Ok(n_sites as f64 * harmonic_tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, p: f64) -> ChainParams {
        ChainParams::new(n, p).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn stationary_examples() {
        let d = stationary_count(&params(2, 0.5)).unwrap();
        for (m, e) in d.as_slice().iter().zip([0.25, 0.5, 0.25]) {
            assert!((m - e).abs() < 1e-15);
        }

        // Binomial(10, 0.4) by explicit products.
        let d = stationary_count(&ChainParams::general(10, 0.2, 0.3).unwrap()).unwrap();
        let mut choose = 1.0;
        for k in 0..=10 {
            let expect = choose * 0.4f64.powi(k as i32) * 0.6f64.powi(10 - k as i32);
            assert!((d.as_slice()[k] - expect).abs() < 1e-14, "k = {k}");
            choose = choose * (10 - k) as f64 / (k + 1) as f64;
        }
    }

    #[test]
    fn stationary_matches_power_iteration() {
        let p = params(12, 0.7);
        let iterated =
            evolve_distribution(&p, &DistributionVector::point_mass(12, 0).unwrap(), 100_000)
                .unwrap();
        let tv = total_variation(&iterated, &stationary_count(&p).unwrap()).unwrap();
        assert!(tv < 1e-10, "tv = {tv}");
    }

    #[test]
    fn stationary_rejects_frozen_chain() {
        let frozen = ChainParams::general(4, 0.0, 0.0).unwrap();
        assert_eq!(stationary_count(&frozen), Err(Error::DegenerateParams));
        assert_eq!(
            expected_return_time(&frozen, CountState::new(0)),
            Err(Error::DegenerateParams)
        );
    }

    #[test]
    fn stationary_at_boundary_q_is_point_mass() {
        let d = stationary_count(&params(6, 1.0)).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let d = stationary_count(&params(3, 0.0)).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn stationary_survives_large_n() {
        let d = stationary_count(&params(100_000, 0.3)).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert!(d.as_slice().iter().all(|m| m.is_finite() && *m >= 0.0));
    }

    #[test]
    fn spatial_logmass_examples() {
        let p = params(3, 0.5);
        for mask in 0..8 {
            let c = GenomeConfig::from_mask(3, mask);
            let l = stationary_spatial_logmass(&p, &c).unwrap().value();
            assert!((l - (1.0f64 / 8.0).ln()).abs() < 1e-15);
        }
        let c = GenomeConfig::from_bits(&[1, 1, 0, 1]).unwrap();
        let l = stationary_spatial_logmass(&params(4, 0.7), &c)
            .unwrap()
            .value();
        assert!((l - 0.1029f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn spatial_logmass_zero_mass_sentinel() {
        let c = GenomeConfig::from_bits(&[1, 0, 1]).unwrap();
        let l = stationary_spatial_logmass(&params(3, 1.0), &c).unwrap();
        assert!(l.is_zero_mass());
        let all = GenomeConfig::ones(3);
        assert_eq!(
            stationary_spatial_logmass(&params(3, 1.0), &all)
                .unwrap()
                .value(),
            0.0
        );
    }

    #[test]
    fn spatial_enumeration_sums_to_one_and_projects() {
        for n in 1..=12 {
            for p in [0.1, 0.5, 0.7] {
                let par = params(n, p);
                let e = enumerate_spatial_mass(&par, DEFAULT_ENUMERATION_CAP).unwrap();
                assert!((e.total - 1.0).abs() < 1e-10);
                let nu = stationary_count(&par).unwrap();
                for (a, b) in e.by_count.iter().zip(nu.as_slice()) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
        assert!(enumerate_spatial_mass(&params(21, 0.5), DEFAULT_ENUMERATION_CAP).is_err());
    }

    #[test]
    fn detailed_balance_examples() {
        for (n, p) in [(1, 0.3), (7, 0.5), (40, 0.9), (300, 0.05)] {
            let par = params(n, p);
            let r = check_detailed_balance(&par, &stationary_count(&par).unwrap()).unwrap();
            assert!(r < 1e-12, "N = {n}: {r}");
        }

        // Uniform law on {0,1,2} at p = 0.7: the two balance equations give
        // |0.7 - 0.15|/3 and |0.35 - 0.6|/3.
        let r = check_detailed_balance(&params(2, 0.7), &DistributionVector::uniform(2)).unwrap();
        assert!((r - 0.55 / 3.0).abs() < 1e-15);

        let p = params(1, 0.37);
        let d = DistributionVector::new(vec![1.0 - 0.37, 0.37]).unwrap();
        assert!(check_detailed_balance(&p, &d).unwrap() <= 1e-16);

        assert!(check_detailed_balance(&p, &DistributionVector::uniform(3)).is_err());
    }

    #[test]
    fn return_time_examples() {
        let t = expected_return_time(&params(10, 0.5), CountState::new(10)).unwrap();
        assert!(rel(t.value(), 1024.0) < 1e-12);

        let t = expected_return_time(&params(8, 0.6), CountState::new(8)).unwrap();
        assert!(rel(t.value(), 390_625.0 / 6561.0) < 1e-12);

        // 2^100 / C(100, 50), mpmath at 40 digits.
        let t = expected_return_time(&params(100, 0.5), CountState::new(50)).unwrap();
        assert!(rel(t.value(), 12.564_512_901_854_9) < 1e-10);
    }

    #[test]
    fn return_time_beyond_float_range() {
        let t = expected_return_time(&params(5000, 0.5), CountState::new(5000)).unwrap();
        assert_eq!(t.value(), f64::INFINITY);
        assert_eq!(t.finite_value(), None);
        assert!(rel(t.log10_value(), 5000.0 * 2f64.log10()) < 1e-12);
    }

    #[test]
    fn return_time_to_unreachable_state_is_infinite() {
        let t = expected_return_time(&params(4, 1.0), CountState::new(2)).unwrap();
        assert_eq!(t.value(), f64::INFINITY);
        let t = expected_return_time(&params(4, 1.0), CountState::new(4)).unwrap();
        assert_eq!(t.value(), 1.0);
    }

    #[test]
    fn asymptotic_examples() {
        let a = return_time_asymptotic(&params(100, 0.5)).unwrap();
        assert!((a - (50.0 * PI).sqrt()).abs() < 1e-12);
        assert!((a - 12.533_141_373_155).abs() < 1e-9);

        let gap = |n: usize| {
            let p = params(n, 0.5);
            let exact = expected_return_time(&p, CountState::new(n / 2))
                .unwrap()
                .value();
            rel(return_time_asymptotic(&p).unwrap(), exact)
        };
        assert!(gap(100) < 0.005);
        assert!(gap(400) < gap(100));

        assert!(return_time_asymptotic(&params(10, 1.0)).is_err());
        assert!(return_time_asymptotic(&params(10, 0.0)).is_err());
    }

    #[test]
    fn evolve_one_step_from_zero() {
        for (n, p) in [(1, 0.2), (5, 0.7), (30, 1.0)] {
            let d = evolve_distribution(
                &params(n, p),
                &DistributionVector::point_mass(n, 0).unwrap(),
                1,
            )
            .unwrap();
            assert!((d.as_slice()[1] - p).abs() < 1e-15);
            assert!((d.as_slice()[0] - (1.0 - p)).abs() < 1e-15);
        }
    }

    #[test]
    fn evolve_fixes_stationary_law() {
        let p = params(25, 0.35);
        let nu = stationary_count(&p).unwrap();
        let later = evolve_distribution(&p, &nu, 1000).unwrap();
        assert!(total_variation(&nu, &later).unwrap() < 1e-12);
    }

    #[test]
    fn evolve_conserves_mass() {
        let p = params(50, 0.8);
        let d = evolve_distribution(&p, &DistributionVector::point_mass(50, 50).unwrap(), 10_000)
            .unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        assert!(d.as_slice().iter().all(|m| *m >= 0.0));
    }

    #[test]
    fn tv_curve_starts_at_initial_distance() {
        let p = params(6, 0.5);
        let start = DistributionVector::point_mass(6, 0).unwrap();
        let curve = tv_curve(&p, &start, 10).unwrap();
        assert_eq!(curve.len(), 11);
        let nu = stationary_count(&p).unwrap();
        assert_eq!(curve[0], total_variation(&start, &nu).unwrap());
    }

    #[test]
    fn total_variation_examples() {
        let d = DistributionVector::uniform(4);
        assert_eq!(total_variation(&d, &d).unwrap(), 0.0);
        let a = DistributionVector::point_mass(4, 0).unwrap();
        let b = DistributionVector::point_mass(4, 4).unwrap();
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);
        let a = DistributionVector::new(vec![0.5, 0.5]).unwrap();
        let b = DistributionVector::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(total_variation(&a, &b).unwrap(), 0.25);
        assert!(total_variation(&a, &d).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(DistributionVector::new(vec![0.5, 0.6]).is_err());
        assert!(DistributionVector::new(vec![1.5, -0.5]).is_err());
        assert!(DistributionVector::new(vec![]).is_err());
        assert!(DistributionVector::point_mass(3, 4).is_err());
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // scipy.stats.norm.cdf
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-16);
    }

    #[test]
    fn gaussian_deviation_examples() {
        // Reference values from scipy.stats binom.cdf / norm.cdf.
        let d = gaussian_deviation(&params(25, 0.5)).unwrap();
        assert!((d - 0.001_107_506_616_300_546_5).abs() < 1e-12);
        let d = gaussian_deviation(&params(100, 0.7)).unwrap();
        assert!((d - 0.005_781_695_979_174_772).abs() < 1e-12);

        let d1 = gaussian_deviation(&params(1, 0.5)).unwrap();
        assert!(d1 > 0.0 && d1 < 1.0);

        let devs: Vec<f64> = [25, 100, 400]
            .iter()
            .map(|&n| gaussian_deviation(&params(n, 0.5)).unwrap())
            .collect();
        assert!(devs.windows(2).all(|w| w[1] < w[0]));

        for n in [25usize, 100, 400, 1600] {
            let d = gaussian_deviation(&params(n, 0.5)).unwrap();
            assert!(d * (n as f64).sqrt() < 0.4748);
        }

        assert!(gaussian_deviation(&params(10, 1.0)).is_err());
    }

    #[test]
    fn absorption_examples() {
        // Harmonic sums, mpmath at 40 digits.
        assert!((absorption_expectation(10, 0).unwrap() - 29.289_682_539_682_54).abs() < 1e-12);
        assert!((absorption_expectation(100, 0).unwrap() - 518.737_751_763_962).abs() < 1e-9);
        assert_eq!(absorption_expectation(7, 7).unwrap(), 0.0);
        assert_eq!(absorption_expectation(7, 6).unwrap(), 7.0);
        assert!(absorption_expectation(7, 8).is_err());
    }
}
