//! Reproducible random streams.
//!
//! Every stochastic draw comes from a ChaCha8 stream addressed by
//! `(seed, domain, index)`. ChaCha runs in counter mode, so a stream is a pure
//! function of its key: a trajectory's randomness does not depend on which
//! worker evaluates it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Separates independent uses of the same master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain(pub u64);

impl Domain {
    /// Monte Carlo trajectories; the stream index is the trajectory number.
    pub const TRAJECTORY: Domain = Domain(1);
    /// Fixed switching rates of a fluctuator collection; index = qubit * 2^32 + j.
    pub const FIXED_RATES: Domain = Domain(2);
    /// Synthetic waveforms for spectral estimates.
    pub const WAVEFORM: Domain = Domain(3);
    /// Free for tests and ad-hoc sampling.
    pub const AUX: Domain = Domain(4);
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The stream for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> Stream {
    let mut state = seed ^ domain.0.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
