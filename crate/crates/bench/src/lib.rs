//! Shared fixtures for the criterion benchmarks.

use idsfano::convcode::lookup;
use idsfano::harness::{simulate_frame, ChannelPoint, SimulatedFrame};
use idsfano::CodeSpec;

pub fn named(code: &str) -> CodeSpec {
    lookup(code).expect("built-in code").code
}

/// A batch of frames at `Pi = Pd = p`, `Ps = 0`.
pub fn frames(code: &CodeSpec, p: f64, blocks: usize, copies: usize, count: u64) -> Vec<SimulatedFrame> {
    let point = ChannelPoint::new(p, p, 0.0).expect("valid point");
    (0..count)
        .map(|seed| simulate_frame(code, &point, blocks, copies, seed).expect("frame simulation"))
        .collect()
}
