//! Maximum-likelihood decoding on the drift-expanded trellis, for a single
//! received copy.
//!
//! Nodes are `(state, drift)` pairs at every block boundary. The path metric
//! is the log segment likelihood `π + γ`; tail and rate terms are constant
//! for a fixed terminal drift and are left out.

use crate::channel::{ChannelParams, ReceivedSet};
use crate::convcode::{CodeSpec, EncoderState};
use crate::error::{Error, Result};
use crate::fano::{DecodeResult, DecoderConfig, DecoderContext};

/// Trellis extent for one decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrellisDims {
    pub depth: usize,
    pub states: usize,
    pub drift_cap: usize,
}

impl DecoderContext {
    pub fn viterbi(&self, received: &ReceivedSet, offset: &[u8]) -> Result<DecodeResult> {
        if received.copies() != 1 {
            return Err(Error::InvalidConfig("the trellis decoder handles a single copy".into()));
        }
        let frame = self.prepare(received, offset)?;
        let code = self.code();
        let cfg = self.config();
        let (b, m) = (code.b(), code.m());
        let states = code.num_states();
        let cap = cfg.drift_cap as i64;
        let width = 2 * cfg.drift_cap + 1;
        let total = self.depth();
        let lambda = cfg.lambda();
        if lambda << b > 256 {
            return Err(Error::InvalidConfig("backpointers need imax + dmax + 1 ≤ 256 / 2^b".into()));
        }
        let shift_old = b * m.saturating_sub(1);
        let input_mask = (1u32 << b) - 1;

        let mut cur = vec![f64::NEG_INFINITY; states * width];
        let mut next = vec![f64::NEG_INFINITY; states * width];
        cur[cfg.drift_cap] = 0.0;
        // back[t][node] = δ index · 2^b + (dropped block, or the input when m = 0)
        let mut back = vec![vec![u8::MAX; states * width]; total];
        let mut evaluations = 0u64;

        for t in 0..total {
            next.fill(f64::NEG_INFINITY);
            let inputs = if t < self.blocks() { code.num_inputs() as u32 } else { 1 };
            for s in 0..states {
                for di in 0..width {
                    let metric = cur[s * width + di];
                    if metric == f64::NEG_INFINITY {
                        continue;
                    }
                    let d = di as i64 - cap;
                    let state = EncoderState(s as u32);
                    for u in 0..inputs {
                        let (x, ns) = self.transmitted(&frame, t, state, u);
                        let tag = if m == 0 { u } else { (s as u32) >> shift_old };
                        for (k, delta) in (-(cfg.dmax as i64)..=cfg.imax as i64).enumerate() {
                            evaluations += 1;
                            let Some((seg, _, _)) = self.segment_term(&frame, 0, t, d, delta, x) else {
                                continue;
                            };
                            let idx = ns.0 as usize * width + (d + delta + cap) as usize;
                            let cand = metric + seg;
                            if cand > next[idx] {
                                next[idx] = cand;
                                back[t][idx] = (k << b) as u8 | tag as u8;
                            }
                        }
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }

        let final_drift = frame.lengths()[0] as i64 - (code.c() * total) as i64;
        let end = (final_drift + cap) as usize;
        let best = cur[end];
        if best == f64::NEG_INFINITY {
            return Ok(DecodeResult {
                decoded: Vec::new(),
                forward_steps: 0,
                branch_evaluations: evaluations,
                completed: false,
                final_metric: best,
                drifts: vec![Vec::new()],
            });
        }

        let mut inputs = vec![0u32; total];
        let mut drifts = vec![0i64; total];
        let (mut s, mut di) = (0u32, end);
        for t in (0..total).rev() {
            drifts[t] = di as i64 - cap;
            let bp = u32::from(back[t][s as usize * width + di]);
            let tag = bp & input_mask;
            let k = (bp >> b) as i64;
            let delta = k - cfg.dmax as i64;
            let (u, prev) = if m == 0 { (tag, 0) } else { (s & input_mask, (s >> b) | (tag << shift_old)) };
            inputs[t] = u;
            s = prev;
            di = (di as i64 - delta) as usize;
        }
        debug_assert_eq!((s, di), (0, cfg.drift_cap));

        let decoded = inputs[..self.blocks()].iter().flat_map(|&u| code.input_bits(u)).collect();
        Ok(DecodeResult {
            decoded,
            forward_steps: 0,
            branch_evaluations: evaluations,
            completed: true,
            final_metric: best,
            drifts: vec![drifts],
        })
    }

    /// Log likelihood `Σ (π + γ)` of one path through the trellis.
    pub fn trellis_path_metric(&self, received: &ReceivedSet, offset: &[u8], info: &[u8], drifts: &[i64]) -> Result<f64> {
        let frame = self.prepare(received, offset)?;
        let code = self.code();
        let b = code.b();
        let mut state = EncoderState::default();
        let mut d = 0;
        let mut metric = 0.0;
        for (t, &next) in drifts.iter().enumerate().take(self.depth()) {
            let u = if t < self.blocks() { code.input_value(&info[t * b..(t + 1) * b]) } else { 0 };
            let (x, ns) = self.transmitted(&frame, t, state, u);
            match self.segment_term(&frame, 0, t, d, next - d, x) {
                Some((seg, _, _)) => metric += seg,
                None => return Ok(f64::NEG_INFINITY),
            }
            state = ns;
            d = next;
        }
        Ok(metric)
    }
}

/// Decodes one received copy on the drift trellis.
pub fn viterbi_decode(
    code: &CodeSpec,
    params: ChannelParams,
    config: DecoderConfig,
    received: &ReceivedSet,
    offset: &[u8],
    blocks: usize,
) -> Result<DecodeResult> {
    DecoderContext::new(code, params, config, blocks)?.viterbi(received, offset)
}

/// Number of trellis nodes over depths `1..=L`, excluding the termination
/// tail. Drifts are limited by the cap, by the per-block caps accumulated
/// since the root and by the received lengths; with several copies the
/// drift ranges multiply.
pub fn trellis_node_count(code: &CodeSpec, config: &DecoderConfig, blocks: usize, lengths: &[usize]) -> u64 {
    let c = code.c() as i64;
    let cap = config.drift_cap as i64;
    let states = code.num_states() as u64;
    (1..=blocks as i64)
        .map(|t| {
            let per_copy = lengths.iter().map(|&n| {
                let lo = (-cap).max(-(config.dmax as i64) * t).max(-c * t);
                let hi = cap.min(config.imax as i64 * t).min(n as i64 - c * t);
                (hi - lo + 1).max(0) as u64
            });
            states * per_copy.product::<u64>()
        })
        .sum()
}
