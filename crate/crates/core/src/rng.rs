//! Deterministic, seedable random streams.
//!
//! Every random quantity in the laboratory is drawn from an [`RngStream`]
//! identified by a `(base_seed, stream_id)` pair. The generator is ChaCha8
//! seeded from `base_seed` (via `SeedableRng::seed_from_u64`) with its 64-bit
//! stream selector set to `stream_id`, so distinct instances of an experiment
//! read disjoint keystreams no matter which worker runs them.
//!
//! Draw order is part of the contract:
//!
//! * normal variates use the ziggurat sampler of `rand_distr::StandardNormal`
//!   applied to the stream's 64-bit outputs, one variate at a time;
//! * bounded integers use `rand`'s `random_range` (Lemire's widening multiply);
//! * shuffles are Fisher-Yates from the last index down (`SliceRandom::shuffle`).
//!
//! The crate versions are pinned by `Cargo.lock`; changing them may change
//! individual draws but never the statistical behaviour.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A single-owner deterministic random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    base_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

/// Creates the stream identified by `(base_seed, stream_id)`.
pub fn derive_stream(base_seed: u64, stream_id: u64) -> RngStream {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream_id);
    RngStream {
        base_seed,
        stream_id,
        rng,
    }
}

impl RngStream {
    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit keystream words consumed so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Overwrites `out` with i.i.d. standard normal draws, in index order.
    #[inline]
    pub fn fill_std_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = StandardNormal.sample(&mut self.rng);
        }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..upper`. `upper` must be positive.
    pub fn index(&mut self, upper: usize) -> usize {
        self.rng.random_range(0..upper)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.rng);
    }
}

/// Draws `count` i.i.d. standard normal variates.
pub fn sample_std_normal(stream: &mut RngStream, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptyRequest("sample_std_normal needs count >= 1"));
    }
    let mut out = vec![0.0; count];
    stream.fill_std_normal(&mut out);
    Ok(out)
}

/// One draw of `scale * chi^2_d`, realised as `scale` times the sum of `d`
/// squared standard normals.
pub fn sample_chi_squared(stream: &mut RngStream, d: usize, scale: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("chi-squared needs d >= 1".into()));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "chi-squared scale must be positive and finite, got {scale}"
        )));
    }
    let mut acc = 0.0;
    for _ in 0..d {
        let z = stream.std_normal();
        acc += z * z;
    }
    Ok(scale * acc)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finaliser.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable stream id for Monte Carlo instance `rep` of grid cell `cell` of the
/// experiment named `tag`.
///
/// The tag is hashed with 64-bit FNV-1a; cell and rep are folded in with the
/// SplitMix64 finaliser: `mix(mix(fnv(tag) ^ cell) ^ rep)`. This function is
/// frozen: changing it changes every experiment's output.
pub fn instance_stream_id(tag: &str, cell: u64, rep: u64) -> u64 {
    let mut h = FNV_OFFSET;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    mix64(mix64(h ^ cell) ^ rep)
}

/// Shorthand for `derive_stream(base_seed, instance_stream_id(tag, cell, rep))`.
pub fn instance_stream(base_seed: u64, tag: &str, cell: u64, rep: u64) -> RngStream {
    derive_stream(base_seed, instance_stream_id(tag, cell, rep))
}
