//! Seed mixing and the one distribution the simulator samples by hand.

use rand::Rng;

/// SplitMix64 finalizer; decorrelates seeds derived from nearby integers.
pub fn mix_seed(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from N(mean, std) via Box-Muller, using `libm` so the result
/// is identical on every platform.
pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, std: f64) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random::<f64>();
    let mag = libm::sqrt(-2.0 * libm::log(u1));
    mean + std * mag * libm::cos(2.0 * core::f64::consts::PI * u2)
}
