//! Fano sequential decoding over the joint code/channel tree.
//!
//! A node at depth `t` pairs the encoder state with one drift value per
//! received copy. Each branch appends one input block and one drift change
//! `δ ∈ [−dmax, imax]` per copy.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::bits::pack;
use crate::channel::{ChannelParams, ReceivedSet};
use crate::convcode::{CodeSpec, EncoderState};
use crate::error::{Error, Result};
use crate::lattice::{critical_point, expected_drift_direction, SegmentTable, TailTable};

/// Largest number of received copies handled by the decoders.
pub const MAX_COPIES: usize = 4;

/// The search is abandoned once the threshold falls below this value.
pub const THRESHOLD_FLOOR: f64 = -1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricMode {
    /// Tail term from exact suffix probabilities.
    ExactTail,
    /// Tail term replaced by its asymptotic bias `c·log2 q1 + (c+δ)·log2 z1`.
    AsymptoticBias,
}

impl fmt::Display for MetricMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricMode::ExactTail => "exact",
            MetricMode::AsymptoticBias => "asymptotic",
        })
    }
}

impl FromStr for MetricMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" | "exact-tail" => Ok(MetricMode::ExactTail),
            "asymptotic" | "asymptotic-bias" | "bias" => Ok(MetricMode::AsymptoticBias),
            other => Err(Error::Parse(format!("unknown metric mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    /// Threshold step Δ.
    pub delta: f64,
    /// Largest drift increase per block, per copy.
    pub imax: usize,
    /// Largest drift decrease per block, per copy.
    pub dmax: usize,
    pub drift_cap: usize,
    pub step_cap: u64,
    pub metric_mode: MetricMode,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            delta: 4.0,
            imax: 3,
            dmax: 3,
            drift_cap: 30,
            step_cap: 100_000,
            metric_mode: MetricMode::ExactTail,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self, code: &CodeSpec) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("threshold step must be positive, got {}", self.delta)));
        }
        if self.step_cap == 0 {
            return Err(Error::InvalidConfig("step cap must be at least 1".into()));
        }
        if self.dmax > code.c() {
            return Err(Error::InvalidConfig(format!(
                "dmax={} exceeds the block length {}",
                self.dmax,
                code.c()
            )));
        }
        Ok(())
    }

    /// Number of drift changes per branch and copy, `imax + dmax + 1`.
    pub fn lambda(&self) -> usize {
        self.imax + self.dmax + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decoded information bits; shorter than `L·b` when the search stopped early.
    pub decoded: Vec<u8>,
    pub forward_steps: u64,
    pub branch_evaluations: u64,
    pub completed: bool,
    pub final_metric: f64,
    /// Drift after each block along the returned path, one row per copy.
    pub drifts: Vec<Vec<i64>>,
}

/// Classical Fano first-visit criterion: the node just entered has not been
/// seen at a higher threshold when its parent lies below `T + Δ`.
#[inline]
pub fn first_visit_test(mu_parent: f64, threshold: f64, delta: f64) -> bool {
    mu_parent < threshold + delta
}

/// Tables shared by every frame decoded at one operating point.
#[derive(Debug, Clone)]
pub struct DecoderContext {
    code: CodeSpec,
    params: ChannelParams,
    config: DecoderConfig,
    blocks: usize,
    segments: SegmentTable,
    // per δ index, asymptotic mode only
    bias: Vec<f64>,
    tails: Option<TailTable>,
}

/// One frame's received copies, preprocessed for constant-time segment lookups.
#[derive(Debug, Clone)]
pub struct PreparedFrame {
    lengths: Vec<usize>,
    // windows[j][p]: bits y_j[p .. p+W] packed MSB-first, zero padded
    windows: Vec<Vec<u32>>,
    offsets: Vec<u32>,
}

impl DecoderContext {
    /// `blocks` is the number of information blocks `L`.
    pub fn new(code: &CodeSpec, params: ChannelParams, config: DecoderConfig, blocks: usize) -> Result<Self> {
        params.validate()?;
        config.validate(code)?;
        let c = code.c();
        let segments = SegmentTable::new(&params, c, config.imax, config.dmax)?;
        let (bias, tails) = match config.metric_mode {
            MetricMode::AsymptoticBias => {
                let cp = critical_point(&params, expected_drift_direction(&params))?;
                let bias = (-(config.dmax as i64)..=config.imax as i64)
                    .map(|d| c as f64 * cp.q1.log2() + (c as i64 + d) as f64 * cp.z1.log2())
                    .collect();
                (bias, None)
            }
            MetricMode::ExactTail => {
                let total = blocks + code.m();
                let tails = TailTable::new(&params, c, total, c * total + config.drift_cap)?;
                (Vec::new(), Some(tails))
            }
        };
        Ok(Self { code: code.clone(), params, config, blocks, segments, bias, tails })
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.config
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn segments(&self) -> &SegmentTable {
        &self.segments
    }

    /// Total tree depth including the termination blocks.
    pub fn depth(&self) -> usize {
        self.blocks + self.code.m()
    }

    pub fn prepare(&self, received: &ReceivedSet, offset: &[u8]) -> Result<PreparedFrame> {
        let c = self.code.c();
        let total = self.depth();
        let copies = received.copies();
        if copies > MAX_COPIES {
            return Err(Error::InvalidConfig(format!("at most {MAX_COPIES} copies are supported")));
        }
        let sent = c * total;
        for (j, y) in received.sequences.iter().enumerate() {
            let drift = y.len() as i64 - sent as i64;
            if drift.unsigned_abs() as usize > self.config.drift_cap {
                return Err(Error::Domain(format!(
                    "copy {j} has final drift {drift}, beyond the cap {}",
                    self.config.drift_cap
                )));
            }
        }
        if offset.len() < sent && !offset.is_empty() {
            return Err(Error::LengthMismatch { expected: sent, got: offset.len() });
        }
        let width = c + self.config.imax;
        let windows = received
            .sequences
            .iter()
            .map(|y| {
                (0..=y.len())
                    .map(|p| {
                        (0..width).fold(0u32, |acc, k| (acc << 1) | u32::from(y.get(p + k).copied().unwrap_or(0)))
                    })
                    .collect()
            })
            .collect();
        let offsets = (0..total)
            .map(|t| if offset.is_empty() { 0 } else { pack(&offset[c * t..c * (t + 1)]) })
            .collect();
        Ok(PreparedFrame { lengths: received.lengths(), windows, offsets })
    }

    /// Hypothesised transmitted block at depth `t` (encoder output with the offset applied).
    #[inline]
    pub(crate) fn transmitted(&self, frame: &PreparedFrame, t: usize, state: EncoderState, input: u32) -> (u32, EncoderState) {
        let (out, next) = self.code.step(state, input);
        (out ^ frame.offsets[t], next)
    }

    /// Log segment likelihood `π + γ` of copy `j` for a branch from depth `t`,
    /// together with the received positions before and after it. `None`
    /// when the drift change leaves the feasible tree.
    #[inline]
    pub(crate) fn segment_term(
        &self,
        frame: &PreparedFrame,
        j: usize,
        t: usize,
        drift: i64,
        delta: i64,
        x: u32,
    ) -> Option<(f64, usize, usize)> {
        let c = self.code.c() as i64;
        let cap = self.config.drift_cap as i64;
        let n = frame.lengths[j] as i64;
        let total = self.depth() as i64;
        let next = drift + delta;
        let pos = c * t as i64 + drift;
        let next_pos = pos + c + delta;
        if next.abs() > cap || next_pos > n || pos < 0 {
            return None;
        }
        let remaining = total - t as i64 - 1;
        let gap = n - c * total - next;
        if gap < -(self.config.dmax as i64) * remaining || gap > self.config.imax as i64 * remaining {
            return None;
        }
        let len = (c + delta) as usize;
        let y = frame.windows[j][pos as usize] >> (c as usize + self.config.imax - len);
        let seg = self.segments.get(x, delta, y);
        if seg == f64::NEG_INFINITY {
            return None;
        }
        Some((seg, pos as usize, next_pos as usize))
    }

    /// Per-copy contribution `π + γ + τ` of a branch from depth `t`.
    #[inline]
    pub(crate) fn copy_term(&self, frame: &PreparedFrame, j: usize, t: usize, drift: i64, delta: i64, x: u32) -> Option<f64> {
        let (seg, pos, next_pos) = self.segment_term(frame, j, t, drift, delta, x)?;
        let tail = match &self.tails {
            None => self.bias[(delta + self.config.dmax as i64) as usize],
            Some(tails) => {
                let n = frame.lengths[j];
                let remaining = self.depth() - t - 1;
                tails.get(remaining, n - next_pos) - tails.get(remaining + 1, n - pos)
            }
        };
        Some(seg + tail)
    }

    /// Branch metric increment `Z` for input block `input` from a node at
    /// depth `t`, or `None` if the branch leaves the feasible tree.
    pub fn branch_metric(
        &self,
        frame: &PreparedFrame,
        t: usize,
        state: EncoderState,
        drifts: &[i64],
        input: u32,
        deltas: &[i64],
    ) -> Option<f64> {
        if t >= self.depth() || (t >= self.blocks && input != 0) {
            return None;
        }
        let (x, _) = self.transmitted(frame, t, state, input);
        let mut z = -(self.code.b() as f64);
        for (j, (&d, &delta)) in drifts.iter().zip(deltas).enumerate() {
            if delta < -(self.config.dmax as i64) || delta > self.config.imax as i64 {
                return None;
            }
            z += self.copy_term(frame, j, t, d, delta, x)?;
        }
        Some(z)
    }

    /// Path metric of a full hypothesis: information bits plus per-copy drift
    /// after every block.
    pub fn path_metric(&self, frame: &PreparedFrame, info: &[u8], drifts: &[Vec<i64>]) -> Option<f64> {
        let b = self.code.b();
        let mut state = EncoderState::default();
        let mut cur = vec![0i64; drifts.len()];
        let mut metric = 0.0;
        for t in 0..self.depth() {
            let input = if t < self.blocks { self.code.input_value(&info[t * b..(t + 1) * b]) } else { 0 };
            let deltas: Vec<i64> = drifts.iter().zip(&cur).map(|(row, &d)| row[t] - d).collect();
            metric += self.branch_metric(frame, t, state, &cur, input, &deltas)?;
            state = self.code.step(state, input).1;
            for (d, row) in cur.iter_mut().zip(drifts) {
                *d = row[t];
            }
        }
        Some(metric)
    }

    pub fn fano(&self, received: &ReceivedSet, offset: &[u8]) -> Result<DecodeResult> {
        let frame = self.prepare(received, offset)?;
        Ok(FanoSearch::new(self, &frame).run())
    }
}

impl PreparedFrame {
    pub fn copies(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }
}

/// Decodes `received` with a fresh context. Harness code should build one
/// [`DecoderContext`] per operating point and reuse it instead.
pub fn fano_decode(
    code: &CodeSpec,
    params: ChannelParams,
    config: DecoderConfig,
    received: &ReceivedSet,
    offset: &[u8],
    blocks: usize,
) -> Result<DecodeResult> {
    DecoderContext::new(code, params, config, blocks)?.fano(received, offset)
}

#[derive(Debug, Clone, Copy)]
struct Successor {
    input: u32,
    deltas: [i8; MAX_COPIES],
    metric: f64,
}

impl Successor {
    fn spread(&self) -> i32 {
        self.deltas.iter().map(|d| i32::from(*d).abs()).sum()
    }
}

fn successor_order(a: &Successor, b: &Successor) -> Ordering {
    b.metric
        .total_cmp(&a.metric)
        .then(a.input.cmp(&b.input))
        .then(a.spread().cmp(&b.spread()))
        .then(a.deltas.cmp(&b.deltas))
}

#[derive(Debug, Clone)]
struct Node {
    depth: usize,
    state: EncoderState,
    drifts: [i64; MAX_COPIES],
    metric: f64,
    // input block that led here
    input: u32,
    successors: Vec<Successor>,
    next: usize,
}

struct FanoSearch<'a> {
    ctx: &'a DecoderContext,
    frame: &'a PreparedFrame,
    branch_evaluations: u64,
    // scratch: feasible (δ, term) per copy for the current input
    terms: Vec<Vec<(i8, f64)>>,
}

impl<'a> FanoSearch<'a> {
    fn new(ctx: &'a DecoderContext, frame: &'a PreparedFrame) -> Self {
        Self { ctx, frame, branch_evaluations: 0, terms: vec![Vec::new(); frame.copies()] }
    }

    fn expand(&mut self, node: &mut Node) {
        let ctx = self.ctx;
        let t = node.depth;
        let copies = self.frame.copies();
        let mut out = Vec::new();
        if t < ctx.depth() {
            let inputs = if t < ctx.blocks { ctx.code.num_inputs() as u32 } else { 1 };
            let base = node.metric - ctx.code.b() as f64;
            for input in 0..inputs {
                let (x, _) = ctx.transmitted(self.frame, t, node.state, input);
                for j in 0..copies {
                    let terms = &mut self.terms[j];
                    terms.clear();
                    for delta in -(ctx.config.dmax as i64)..=ctx.config.imax as i64 {
                        if let Some(v) = ctx.copy_term(self.frame, j, t, node.drifts[j], delta, x) {
                            terms.push((delta as i8, v));
                        }
                    }
                }
                if self.terms.iter().any(Vec::is_empty) {
                    continue;
                }
                // odometer over the per-copy choices
                let mut idx = [0usize; MAX_COPIES];
                loop {
                    let mut deltas = [0i8; MAX_COPIES];
                    let mut metric = base;
                    for j in 0..copies {
                        let (d, v) = self.terms[j][idx[j]];
                        deltas[j] = d;
                        metric += v;
                    }
                    out.push(Successor { input, deltas, metric });
                    let mut j = 0;
                    while j < copies {
                        idx[j] += 1;
                        if idx[j] < self.terms[j].len() {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == copies {
                        break;
                    }
                }
            }
        }
        self.branch_evaluations += out.len() as u64;
        out.sort_by(successor_order);
        node.successors = out;
        node.next = 0;
    }

    fn child(&mut self, parent: &Node, s: Successor) -> Node {
        let next_state = self.ctx.code.step(parent.state, s.input).1;
        let mut drifts = parent.drifts;
        for (d, delta) in drifts.iter_mut().zip(s.deltas) {
            *d += i64::from(delta);
        }
        let mut node = Node {
            depth: parent.depth + 1,
            state: next_state,
            drifts,
            metric: s.metric,
            input: s.input,
            successors: Vec::new(),
            next: 0,
        };
        self.expand(&mut node);
        node
    }

    fn run(mut self) -> DecodeResult {
        let ctx = self.ctx;
        let cfg = ctx.config;
        let total = ctx.depth();
        let step = cfg.delta;
        let mut root = Node {
            depth: 0,
            state: EncoderState::default(),
            drifts: [0; MAX_COPIES],
            metric: 0.0,
            input: 0,
            successors: Vec::new(),
            next: 0,
        };
        self.expand(&mut root);
        let mut stack = vec![root];
        // threshold is `level · Δ`
        let mut level: i64 = 0;
        let mut forward_steps: u64 = 0;
        let mut deepest: Vec<(u32, [i64; MAX_COPIES])> = Vec::new();
        let mut completed = false;

        'search: loop {
            let threshold = level as f64 * step;
            let top = stack.last().expect("stack holds the root");
            let candidate = top.successors.get(top.next).copied();
            match candidate {
                Some(s) if s.metric >= threshold => {
                    forward_steps += 1;
                    let parent_metric = top.metric;
                    let child = self.child(top, s);
                    if first_visit_test(parent_metric, threshold, step) {
                        level = level.max((child.metric / step).floor() as i64);
                    }
                    stack.push(child);
                    if stack.len() - 1 > deepest.len() {
                        deepest = stack[1..].iter().map(|n| (n.input, n.drifts)).collect();
                    }
                    if stack.len() - 1 == total {
                        completed = true;
                        break 'search;
                    }
                    if forward_steps >= cfg.step_cap {
                        break 'search;
                    }
                }
                _ => loop {
                    // look back
                    let lower = if stack.len() == 1 {
                        true
                    } else {
                        let mu_parent = stack[stack.len() - 2].metric;
                        mu_parent < level as f64 * step
                    };
                    if lower {
                        level -= 1;
                        if (level as f64 * step) < THRESHOLD_FLOOR {
                            break 'search;
                        }
                        stack.last_mut().expect("non-empty").next = 0;
                        break;
                    }
                    stack.pop();
                    let parent = stack.last_mut().expect("parent exists");
                    parent.next += 1;
                    if parent.next < parent.successors.len() {
                        break;
                    }
                },
            }
        }

        let b = ctx.code.b();
        let info_blocks = deepest.len().min(ctx.blocks);
        let mut decoded = Vec::with_capacity(info_blocks * b);
        for &(input, _) in &deepest[..info_blocks] {
            decoded.extend(ctx.code.input_bits(input));
        }
        let copies = self.frame.copies();
        let drifts = (0..copies).map(|j| deepest.iter().map(|(_, d)| d[j]).collect()).collect();
        let final_metric = if completed { stack.last().map_or(f64::NEG_INFINITY, |n| n.metric) } else { f64::NEG_INFINITY };
        DecodeResult {
            decoded,
            forward_steps,
            branch_evaluations: self.branch_evaluations,
            completed,
            final_metric,
            drifts,
        }
    }
}
