//! Episodic EV-charging environment: 24 hourly steps, sinusoidal surge
//! pricing, fixed-point state-of-charge dynamics, discrete charge-fraction
//! actions.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::money::{Energy, Price, CKWH_PER_KWH};

pub const FEATURE_DIM: usize = 5;

/// Environment parameters. Defaults give a 50 kWh battery charged over a
/// 24-hour day against a price curve peaking in the evening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub episode_steps: u32,
    pub battery_kwh: f64,
    /// Station throughput limit per episode.
    pub station_cap_kwh: f64,
    pub max_rate_kwh: f64,
    pub soc_target: f64,
    pub price_base: f64,
    pub price_amp: f64,
    /// Number of discrete charge fractions spanning [0, 1].
    pub action_levels: usize,
}

impl Default for EnvConfig {
    fn default() -> EnvConfig {
        EnvConfig {
            episode_steps: 24,
            battery_kwh: 50.0,
            station_cap_kwh: 100.0,
            max_rate_kwh: 10.0,
            soc_target: 0.9,
            price_base: 0.5,
            price_amp: 0.3,
            action_levels: 11,
        }
    }
}

impl EnvConfig {
    /// Field-path validation used by the CLI config loader.
    pub fn validate(&self) -> Result<(), (&'static str, &'static str)> {
        if self.episode_steps == 0 {
            return Err(("env.episode_steps", "must be positive"));
        }
        if !(self.battery_kwh > 0.0) {
            return Err(("env.battery_kwh", "must be positive"));
        }
        if !(self.station_cap_kwh > 0.0) {
            return Err(("env.station_cap_kwh", "must be positive"));
        }
        if !(self.max_rate_kwh > 0.0) {
            return Err(("env.max_rate_kwh", "must be positive"));
        }
        if !(self.soc_target > 0.0 && self.soc_target <= 1.0) {
            return Err(("env.soc_target", "must lie in (0, 1]"));
        }
        if !(self.price_amp > 0.0 && self.price_amp < self.price_base) {
            return Err(("env.price_amp", "requires 0 < price_amp < price_base"));
        }
        if self.action_levels < 2 {
            return Err(("env.action_levels", "needs at least 2 levels"));
        }
        Ok(())
    }

    pub fn battery(&self) -> Energy {
        Energy::from_kwh(self.battery_kwh)
    }

    pub fn station_cap(&self) -> Energy {
        Energy::from_kwh(self.station_cap_kwh)
    }

    pub fn max_rate(&self) -> Energy {
        Energy::from_kwh(self.max_rate_kwh)
    }

    pub fn target_charge(&self) -> Energy {
        Energy(libm::round(self.soc_target * self.battery().ckwh() as f64) as i64)
    }
}

/// A client's environment: shared config plus its own price amplitude.
/// Client k scales the amplitude by (1 + 0.1 k), clamped below the base so
/// prices stay positive, which makes the federated clients non-IID.
#[derive(Debug, Clone)]
pub struct ChargingEnv {
    config: EnvConfig,
    amp: f64,
    prices: Vec<Price>,
}

/// Attempt to step a finished episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpisodeFinished;

impl fmt::Display for EpisodeFinished {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "episode already finished")
    }
}

impl core::error::Error for EpisodeFinished {}

impl ChargingEnv {
    pub fn new(config: EnvConfig, client_index: usize) -> ChargingEnv {
        let scaled = config.price_amp * (1.0 + 0.1 * client_index as f64);
        let amp = scaled.min(0.99 * config.price_base);
        let prices = (0..config.episode_steps)
            .map(|h| price_at(config.price_base, amp, h))
            .collect();
        ChargingEnv {
            config,
            amp,
            prices,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn amp(&self) -> f64 {
        self.amp
    }

    /// Hourly price, integer milli-units per kWh.
    pub fn price(&self, hour: u32) -> Price {
        self.prices[hour as usize]
    }

    pub fn price_curve(&self) -> &[Price] {
        &self.prices
    }

    pub fn max_price(&self) -> Price {
        *self.prices.iter().max().expect("curve nonempty")
    }

    /// Mean of the hourly prices; for the symmetric sinusoid it equals the
    /// base price exactly.
    pub fn mean_price(&self) -> Price {
        let sum: i64 = self.prices.iter().map(|p| p.milli()).sum();
        Price(libm::round(sum as f64 / self.prices.len() as f64) as i64)
    }

    /// Start an episode: hour 0, state of charge drawn uniformly from
    /// [0.1, 0.5] by the seeded generator.
    pub fn reset(&self, seed: u64) -> EnvState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let soc: f64 = rng.random_range(0.1..=0.5);
        let battery = self.config.battery();
        let charge = Energy(libm::round(soc * battery.ckwh() as f64) as i64);
        EnvState {
            charge,
            initial_charge: charge,
            hour: 0,
            delivered_total: Energy::ZERO,
            done: false,
        }
    }

    /// Apply one action. Delivery is clamped by the per-step rate, the
    /// battery headroom, and the station's episode cap. Returns the energy
    /// actually delivered and the done flag; rewards are the contract's
    /// business, not the environment's.
    pub fn step(&self, state: &mut EnvState, action: usize) -> Result<(Energy, bool), EpisodeFinished> {
        if state.done {
            return Err(EpisodeFinished);
        }
        assert!(action < self.config.action_levels, "action index in range");

        let max_rate = self.config.max_rate();
        let requested = Energy(
            max_rate.ckwh() * action as i64 / (self.config.action_levels as i64 - 1),
        );
        let battery_headroom = self.config.battery().saturating_sub(state.charge);
        let station_headroom = self.config.station_cap().saturating_sub(state.delivered_total);
        let delivered = requested.min(battery_headroom).min(station_headroom);

        state.charge += delivered;
        state.delivered_total += delivered;
        state.hour += 1;
        if state.hour >= self.config.episode_steps {
            state.done = true;
        }
        Ok((delivered, state.done))
    }

    /// Feature vector for the Q-network:
    /// [soc, sin(2*pi*h/24), cos(2*pi*h/24), normalized price, remaining fraction].
    pub fn features(&self, state: &EnvState) -> [f64; FEATURE_DIM] {
        let steps = self.config.episode_steps as f64;
        let h = state.hour.min(self.config.episode_steps - 1);
        let angle = 2.0 * PI * state.hour as f64 / steps;
        let p = self.price(h).units_per_kwh();
        let p_min = self.config.price_base - self.amp;
        let p_max = self.config.price_base + self.amp;
        [
            self.soc(state),
            libm::sin(angle),
            libm::cos(angle),
            (p - p_min) / (p_max - p_min),
            (steps - state.hour as f64) / steps,
        ]
    }

    pub fn soc(&self, state: &EnvState) -> f64 {
        state.charge.ckwh() as f64 / self.config.battery().ckwh() as f64
    }
}

/// Mutable episode state, all energies in fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvState {
    pub charge: Energy,
    pub initial_charge: Energy,
    pub hour: u32,
    pub delivered_total: Energy,
    pub done: bool,
}

/// p(h) = base + amp * sin(2*pi*(h - 12)/24), peaking at h = 18 and lowest
/// at h = 6, rounded to the milli grid.
fn price_at(base: f64, amp: f64, hour: u32) -> Price {
    let angle = 2.0 * PI * (hour as f64 - 12.0) / 24.0;
    Price::from_units_per_kwh(base + amp * libm::sin(angle))
}
