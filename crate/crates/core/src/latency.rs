//! Latency instrumentation for contract calls.
//!
//! The ledger records a wall latency per transaction but never hashes it,
//! so where the number comes from is pluggable: zero for pure tests, a
//! seeded Gaussian model for reproducing testnet-like figures, or a real
//! monotonic clock supplied by the std companion crate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rngutil::sample_normal;

/// Brackets one contract call and yields its latency in nanoseconds.
pub trait LatencyProbe {
    fn begin(&mut self);
    fn end(&mut self) -> u64;
}

/// Reports zero latency for every call.
#[derive(Debug, Default, Clone)]
pub struct NullProbe;

impl LatencyProbe for NullProbe {
    fn begin(&mut self) {}
    fn end(&mut self) -> u64 {
        0
    }
}

/// Draws call latencies from N(mean, std), clamped at zero.
#[derive(Debug, Clone)]
pub struct SyntheticProbe {
    mean_s: f64,
    std_s: f64,
    rng: ChaCha8Rng,
}

impl SyntheticProbe {
    pub fn new(mean_s: f64, std_s: f64, seed: u64) -> SyntheticProbe {
        SyntheticProbe {
            mean_s,
            std_s,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl LatencyProbe for SyntheticProbe {
    fn begin(&mut self) {}

    fn end(&mut self) -> u64 {
        let s = sample_normal(&mut self.rng, self.mean_s, self.std_s).max(0.0);
        libm::round(s * 1e9) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_probe_is_seed_deterministic() {
        let mut a = SyntheticProbe::new(0.12, 0.01, 9);
        let mut b = SyntheticProbe::new(0.12, 0.01, 9);
        for _ in 0..10 {
            a.begin();
            b.begin();
            assert_eq!(a.end(), b.end());
        }
    }
}
