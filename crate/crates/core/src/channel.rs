//! Insertion/deletion/substitution channel simulator.
//!
//! Each pending input bit goes through a geometric number of insertions
//! (uniform random bits, probability `Pi` each) and is then either deleted
//! (`Pd`), received flipped (`Pt·Ps`) or received intact (`Pt·(1-Ps)`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub pi: f64,
    pub pd: f64,
    pub ps: f64,
}

impl ChannelParams {
    pub fn new(pi: f64, pd: f64, ps: f64) -> Result<Self> {
        let p = Self { pi, pd, ps };
        p.validate()?;
        Ok(p)
    }

    /// Noiseless channel.
    pub fn ideal() -> Self {
        Self { pi: 0.0, pd: 0.0, ps: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(unit(self.pi) && unit(self.pd) && unit(self.ps)) {
            return Err(Error::InvalidChannel(format!(
                "probabilities must lie in [0,1]: Pi={}, Pd={}, Ps={}",
                self.pi, self.pd, self.ps
            )));
        }
        if self.pi + self.pd > 1.0 + 1e-12 {
            return Err(Error::InvalidChannel(format!("Pi + Pd = {} exceeds 1", self.pi + self.pd)));
        }
        // an input bit must eventually leave the queue
        if self.pi >= 1.0 {
            return Err(Error::InvalidChannel("Pi = 1 never transmits".into()));
        }
        Ok(())
    }

    /// Transmission probability `1 - Pi - Pd`.
    #[inline]
    pub fn pt(&self) -> f64 {
        (1.0 - self.pi - self.pd).max(0.0)
    }
}

/// The `M` received copies of one transmitted frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedSet {
    pub sequences: Vec<Vec<u8>>,
    pub seed: u64,
}

impl ReceivedSet {
    pub fn new(sequences: Vec<Vec<u8>>, seed: u64) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::Domain("a received set needs at least one sequence".into()));
        }
        Ok(Self { sequences, seed })
    }

    pub fn copies(&self) -> usize {
        self.sequences.len()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.sequences.iter().map(Vec::len).collect()
    }
}

/// SplitMix64 finaliser, used to derive independent sub-seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn frame_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Event counts from one pass through the channel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChannelTrace {
    pub insertions: usize,
    pub deletions: usize,
    pub substitutions: usize,
}

/// Sends `x` through the channel once.
pub fn transmit<R: Rng + ?Sized>(params: ChannelParams, x: &[u8], rng: &mut R) -> Vec<u8> {
    transmit_traced(params, x, rng).0
}

/// Like [`transmit`], also reporting how many events of each kind occurred.
pub fn transmit_traced<R: Rng + ?Sized>(
    params: ChannelParams,
    x: &[u8],
    rng: &mut R,
) -> (Vec<u8>, ChannelTrace) {
    let mut out = Vec::with_capacity(x.len() + x.len() / 8 + 4);
    let mut trace = ChannelTrace::default();
    let del = params.pi + params.pd;
    for &bit in x {
        loop {
            let u: f64 = rng.random();
            if u < params.pi {
                out.push(rng.random_range(0..2u8));
                trace.insertions += 1;
                continue;
            }
            if u < del {
                trace.deletions += 1;
            } else {
                let flip = params.ps > 0.0 && rng.random_bool(params.ps);
                trace.substitutions += usize::from(flip);
                out.push(bit ^ u8::from(flip));
            }
            break;
        }
    }
    (out, trace)
}

/// `copies` independent transmissions of the same `x`. Copy `j` uses the
/// generator seeded with `derive_seed(seed, j)`.
pub fn transmit_many(params: ChannelParams, x: &[u8], copies: usize, seed: u64) -> Result<ReceivedSet> {
    if copies == 0 {
        return Err(Error::Domain("at least one copy is required".into()));
    }
    let sequences = (0..copies as u64)
        .map(|j| transmit(params, x, &mut frame_rng(derive_seed(seed, j))))
        .collect();
    ReceivedSet::new(sequences, seed)
}

/// Pseudorandom scrambling sequence known to both ends.
pub fn offset_sequence(length: usize, seed: u64) -> Vec<u8> {
    let mut rng = frame_rng(derive_seed(seed, 0x0FF5E7));
    (0..length).map(|_| rng.random_range(0..2u8)).collect()
}

/// XORs `offset` onto `x`. Positions beyond the end of `offset` are left unchanged.
pub fn apply_offset(x: &[u8], offset: &[u8]) -> Vec<u8> {
    x.iter()
        .zip(offset.iter().chain(std::iter::repeat(&0)))
        .map(|(a, b)| a ^ b)
        .collect()
}
