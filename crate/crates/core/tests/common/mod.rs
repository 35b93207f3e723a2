//! Brute-force maximum likelihood over messages and drift paths.
//!
//! Segment probabilities come from recursing over channel events directly,
//! without the lattice tables used by the decoders.

#![allow(dead_code)]

use std::collections::HashMap;

use idsfano::bits::random_bits;
use idsfano::channel::{frame_rng, transmit_many};
use idsfano::convcode::lookup;
use idsfano::fano::DecoderContext;
use idsfano::{ChannelParams, CodeSpec, DecoderConfig, ReceivedSet};
use rand::Rng;

/// `P(y | x)` where every transmitted bit is preceded by any number of
/// insertions and then deleted or transmitted.
pub fn channel_probability(p: &ChannelParams, x: &[u8], y: &[u8]) -> f64 {
    if x.is_empty() {
        return if y.is_empty() { 1.0 } else { 0.0 };
    }
    let mut total = p.pd * channel_probability(p, &x[1..], y);
    if let Some((&first, rest)) = y.split_first() {
        total += p.pi * 0.5 * channel_probability(p, x, rest);
        let emit = if first == x[0] { 1.0 - p.ps } else { p.ps };
        total += p.pt() * emit * channel_probability(p, &x[1..], rest);
    }
    total
}

struct Oracle<'a> {
    params: ChannelParams,
    c: usize,
    imax: i64,
    dmax: i64,
    cap: i64,
    y: &'a [u8],
    memo: HashMap<(Vec<u8>, usize, usize), f64>,
}

impl Oracle<'_> {
    fn segment(&mut self, x: &[u8], pos: usize, len: usize) -> f64 {
        let key = (x.to_vec(), pos, len);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = channel_probability(&self.params, x, &self.y[pos..pos + len]);
        self.memo.insert(key, v);
        v
    }

    /// Best probability over drift paths for a fixed codeword.
    fn best_path(&mut self, x: &[u8], t: usize, drift: i64, final_drift: i64) -> f64 {
        let depth = x.len() / self.c;
        if t == depth {
            return if drift == final_drift { 1.0 } else { 0.0 };
        }
        let c = self.c as i64;
        let n = self.y.len() as i64;
        let pos = c * t as i64 + drift;
        let mut best = 0.0f64;
        for delta in -self.dmax..=self.imax {
            let next = drift + delta;
            let len = c + delta;
            if next.abs() > self.cap || pos + len > n || len < 0 {
                continue;
            }
            let block = &x[t * self.c..(t + 1) * self.c];
            let seg = self.segment(block, pos as usize, len as usize);
            if seg == 0.0 {
                continue;
            }
            best = best.max(seg * self.best_path(x, t + 1, next, final_drift));
        }
        best
    }
}

fn all_messages(bits: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << bits).map(move |v| (0..bits).map(|i| ((v >> i) & 1) as u8).collect())
}

pub fn check_instance(code: &CodeSpec, params: ChannelParams, info: &[u8], rx: &ReceivedSet) -> Result<(), String> {
    let blocks = info.len() / code.b();
    let cfg = DecoderConfig::default();
    let ctx = DecoderContext::new(code, params, cfg, blocks).unwrap();
    let y = &rx.sequences[0];
    let final_drift = y.len() as i64 - (code.c() * (blocks + code.m())) as i64;
    let mut oracle = Oracle {
        params,
        c: code.c(),
        imax: cfg.imax as i64,
        dmax: cfg.dmax as i64,
        cap: cfg.drift_cap as i64,
        y,
        memo: HashMap::new(),
    };
    let scored: Vec<(Vec<u8>, f64)> = all_messages(info.len())
        .map(|m| {
            let x = code.encode_terminated(&m).unwrap();
            let p = oracle.best_path(&x, 0, 0, final_drift);
            (m, p)
        })
        .collect();
    let best = scored.iter().map(|s| s.1).fold(0.0, f64::max);

    match ctx.viterbi(rx, &[]) {
        Ok(res) if res.completed => {
            if best == 0.0 {
                return Err("decoder found a path the oracle rules out".into());
            }
            if (res.final_metric - best.log2()).abs() >= 1e-9 {
                return Err(format!("metric {} vs oracle {}", res.final_metric, best.log2()));
            }
            let chosen = scored.iter().find(|s| s.0 == res.decoded).map_or(0.0, |s| s.1);
            if (chosen.log2() - best.log2()).abs() >= 1e-9 {
                return Err("decoded message is not a maximiser".into());
            }
            Ok(())
        }
        _ if best == 0.0 => Ok(()),
        _ => Err("oracle finds a path the decoder missed".into()),
    }
}

/// Runs the oracle on `count` random CC1 instances with `L ≤ 5`, `Pi = Pd ≤ 0.1`.
pub fn random_instances(count: u64, seed: u64) -> Result<(), String> {
    let code = lookup("CC1").unwrap().code;
    let mut rng = frame_rng(seed);
    for instance in 0..count {
        let blocks = rng.random_range(1..=5usize);
        let p = rng.random_range(0.005..=0.1);
        let ps = if instance % 3 == 0 { 0.0 } else { rng.random_range(0.0..0.05) };
        let params = ChannelParams::new(p, p, ps).unwrap();
        let info = random_bits(blocks, &mut rng);
        let x = code.encode_terminated(&info).unwrap();
        let rx = transmit_many(params, &x, 1, instance).unwrap();
        check_instance(&code, params, &info, &rx).map_err(|e| format!("instance {instance}: {e}"))?;
    }
    Ok(())
}
