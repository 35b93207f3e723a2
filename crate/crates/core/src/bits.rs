//! Bit-string helpers. Bits are stored one per `u8` (0 or 1).

use crate::error::{Error, Result};
use rand::Rng;

/// Parses a string of `0`/`1` characters, ignoring ASCII whitespace.
pub fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_ascii_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Parse(format!("unexpected character `{other}` in bit string"))),
        })
        .collect()
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// Packs `bits` MSB-first into an integer. `bits.len()` must be at most 32.
#[inline]
pub fn pack(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1))
}

/// Inverse of [`pack`].
pub fn unpack(value: u32, len: usize) -> Vec<u8> {
    (0..len).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

pub fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// Counts bit errors of `decoded` against `reference`. Positions missing from
/// `decoded` count as errors.
pub fn count_bit_errors(decoded: &[u8], reference: &[u8]) -> usize {
    let compared = decoded.iter().zip(reference).filter(|(a, b)| a != b).count();
    compared + reference.len().saturating_sub(decoded.len())
}
