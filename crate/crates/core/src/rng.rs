//! Order-independent random streams.
//!
//! A path draws from the ChaCha8 stream selected by
//! `(master seed, salt)` as key and the path index as stream id, so any
//! path can be regenerated in isolation and parallel schedules never
//! change results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Salt for instantaneous-impact market paths.
pub const INSTANT_SALT: u64 = 0x1a57_a47e_0000_0001;
/// Salt for transient-impact signal paths.
pub const TRANSIENT_SALT: u64 = 0x7a4e_5e47_0000_0002;
/// Salt for stand-alone signal simulation.
pub const SIGNAL_SALT: u64 = 0x0051_6a41_0000_0003;
/// XOR-ed into the salt of the second strategy when pairing is disabled.
pub const INDEPENDENT_SALT: u64 = 0x1d3b_e4de_47e1_0bb0;

pub type PathRng = ChaCha8Rng;

pub fn path_stream(master_seed: u64, path_index: u64, salt: u64) -> PathRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&salt.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(path_index);
    rng
}
