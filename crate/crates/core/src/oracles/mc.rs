//! Barrier-monitored Monte Carlo for the firm-value process
//!
//! `ln V` is stepped exactly. Between grid dates the process is a Brownian
//! bridge and the barrier is linear in log space, so the per-step crossing
//! probability `exp(−2·D₀·D₁ / (σ²·Δt))` is exact and the estimator carries
//! no monitoring bias when the correction is on.
//!
//! Paths are split into fixed chunks. Chunk `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, so the result depends only
//! on `(seed, n_paths, n_steps)` and not on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::closed_form::MarketParams;
use crate::error::{ensure_finite, PricingError, Result};

/// Paths per RNG stream.
pub const CHUNK_PATHS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    n_paths: usize,
    n_steps: usize,
    seed: u64,
    bridge_correction: bool,
}

impl McSpec {
    pub const MIN_PATHS: usize = 1000;
    pub const MIN_STEPS: usize = 50;

    /// Bridge correction on.
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Result<Self> {
        if n_paths < Self::MIN_PATHS {
            return Err(PricingError::Input(format!(
                "n_paths must be >= {}, got {n_paths}",
                Self::MIN_PATHS
            )));
        }
        if n_steps < Self::MIN_STEPS {
            return Err(PricingError::Input(format!(
                "n_steps must be >= {}, got {n_steps}",
                Self::MIN_STEPS
            )));
        }
        Ok(Self {
            n_paths,
            n_steps,
            seed,
            bridge_correction: true,
        })
    }

    pub fn with_bridge_correction(self, on: bool) -> Self {
        Self {
            bridge_correction: on,
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn bridge_correction(&self) -> bool {
        self.bridge_correction
    }
}

/// `V_b(t) = level · e^{−growth·(maturity − t)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingBarrier {
    pub growth: f64,
    pub level: f64,
    pub maturity: f64,
}

impl MovingBarrier {
    pub fn at(&self, t: f64) -> f64 {
        self.level * (-self.growth * (self.maturity - t)).exp()
    }

    fn log_at(&self, t: f64) -> f64 {
        self.level.ln() - self.growth * (self.maturity - t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// `|estimate − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.estimate == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.estimate - target).abs() / self.std_error
        }
    }
}

// Running count, mean and centred second moment (Welford, merged by Chan).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let delta = v - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: &Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return *other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

/// Present value at `t = 0` of a claim paying `payoff(V_horizon)` at
/// `horizon` if the barrier is never touched, and `rebate_at_hit(τ)` at the
/// first touching time `τ` otherwise.
pub fn mc_barrier_price<P, Q>(
    payoff: P,
    rebate_at_hit: Q,
    horizon: f64,
    barrier: MovingBarrier,
    market: &MarketParams,
    mc: &McSpec,
    v0: f64,
) -> Result<McEstimate>
where
    P: Fn(f64) -> f64 + Sync,
    Q: Fn(f64) -> f64 + Sync,
{
    ensure_finite("V0", v0)?;
    ensure_finite("horizon", horizon)?;
    ensure_finite("barrier growth", barrier.growth)?;
    ensure_finite("barrier maturity", barrier.maturity)?;
    if !(horizon > 0.0) {
        return Err(PricingError::Input(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    if !(barrier.level >= 0.0) || !barrier.level.is_finite() {
        return Err(PricingError::Input(format!(
            "barrier level must be finite and >= 0, got {}",
            barrier.level
        )));
    }
    if !(v0 > barrier.at(0.0)) {
        return Err(PricingError::Input(format!(
            "V0 = {v0} is not above the barrier {}",
            barrier.at(0.0)
        )));
    }

    let dt = horizon / mc.n_steps as f64;
    let sigma = market.sigma();
    let drift = (market.r() - market.q() - 0.5 * sigma * sigma) * dt;
    let vol = sigma * dt.sqrt();
    let bridge_scale = -2.0 / (sigma * sigma * dt);
    let log_v0 = v0.ln();
    let r = market.r();
    let terminal_discount = (-r * horizon).exp();
    let times: Vec<f64> = (0..=mc.n_steps)
        .map(|n| horizon * n as f64 / mc.n_steps as f64)
        .collect();
    let log_barrier: Vec<f64> = if barrier.level > 0.0 {
        times.iter().map(|&t| barrier.log_at(t)).collect()
    } else {
        vec![f64::NEG_INFINITY; times.len()]
    };

    let simulate = |rng: &mut ChaCha8Rng| -> f64 {
        let mut x = log_v0;
        for n in 0..mc.n_steps {
            let z: f64 = rng.sample(StandardNormal);
            let next = x + drift + vol * z;
            let d1 = next - log_barrier[n + 1];
            let mut hit = d1 <= 0.0;
            if !hit && mc.bridge_correction {
                let d0 = x - log_barrier[n];
                let p = (bridge_scale * d0 * d1).exp();
                hit = rng.gen::<f64>() < p;
            }
            if hit {
                let t_hit = times[n + 1];
                return rebate_at_hit(t_hit) * (-r * t_hit).exp();
            }
            x = next;
        }
        payoff(x.exp()) * terminal_discount
    };

    let n_chunks = mc.n_paths.div_ceil(CHUNK_PATHS);
    let chunks: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(k as u64);
            let paths = CHUNK_PATHS.min(mc.n_paths - k * CHUNK_PATHS);
            let mut m = Moments::default();
            for _ in 0..paths {
                m.push(simulate(&mut rng));
            }
            m
        })
        .collect();

    let total = chunks
        .iter()
        .fold(Moments::default(), |acc, m| acc.merge(m));
    let n = total.count;
    let mean = total.mean;
    let variance = total.m2 / (n - 1.0);
    if !mean.is_finite() || !variance.is_finite() {
        return Err(PricingError::Numerical(
            "Monte Carlo estimate is not finite".into(),
        ));
    }
    Ok(McEstimate {
        estimate: mean,
        std_error: (variance / n).sqrt(),
    })
}
