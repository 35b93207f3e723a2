//! Probability computations on the two-dimensional edit lattice.
//!
//! Rows index transmitted bits, columns index received bits. A horizontal
//! step is an insertion (consumes a received bit only), a vertical step is a
//! deletion (consumes a transmitted bit only) and a diagonal step is a
//! transmission. Insertions happen *before* the pending transmitted bit, so
//! no horizontal step is allowed in the last row.
//!
//! All sums are carried out in the log2 domain.

pub mod delannoy;

pub use delannoy::{
    critical_point, delannoy, delannoy_table, expected_drift_direction, tail_ratio_asymptotic,
    CriticalPoint,
};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// `log2(2^a + 2^b)`, exact for infinities.
#[inline]
pub fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() * std::f64::consts::LOG2_E
}

#[inline]
fn log2w(w: f64) -> f64 {
    if w > 0.0 {
        w.log2()
    } else {
        f64::NEG_INFINITY
    }
}

/// Edge weights of a lattice. The diagonal weight depends on whether the
/// transmitted and received bits agree; when no bits are attached both
/// diagonal weights should be equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeWeights {
    pub horizontal: f64,
    pub vertical: f64,
    pub diagonal_match: f64,
    pub diagonal_mismatch: f64,
}

impl EdgeWeights {
    /// Weights for the likelihood of a specific received segment given
    /// specific transmitted bits.
    pub fn likelihood(p: &ChannelParams) -> Self {
        Self {
            horizontal: p.pi / 2.0,
            vertical: p.pd,
            diagonal_match: p.pt() * (1.0 - p.ps),
            diagonal_mismatch: p.pt() * p.ps,
        }
    }

    /// Weights for drift transitions, marginalised over the received bits.
    pub fn drift(p: &ChannelParams) -> Self {
        Self { horizontal: p.pi, vertical: p.pd, diagonal_match: p.pt(), diagonal_mismatch: p.pt() }
    }

    /// Weights for received sequences produced by uniformly random transmitted bits.
    pub fn tail(p: &ChannelParams) -> Self {
        let half_t = p.pt() / 2.0;
        Self { horizontal: p.pi / 2.0, vertical: p.pd, diagonal_match: half_t, diagonal_mismatch: half_t }
    }
}

/// A filled `(rows+1) × (cols+1)` lattice of log2 path weights.
#[derive(Debug, Clone)]
pub struct LatticeTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl LatticeTable {
    /// Forward DP from `(0,0)`. `x`/`y` supply the bits compared on diagonal
    /// steps; when either is `None` the match weight is used throughout.
    /// With `last_row_horizontal == false`, horizontal steps in row `rows`
    /// are forbidden.
    pub fn fill(
        rows: usize,
        cols: usize,
        x: Option<&[u8]>,
        y: Option<&[u8]>,
        w: EdgeWeights,
        last_row_horizontal: bool,
    ) -> Self {
        let (lh, lv, lm, lx) = (
            log2w(w.horizontal),
            log2w(w.vertical),
            log2w(w.diagonal_match),
            log2w(w.diagonal_mismatch),
        );
        let width = cols + 1;
        let mut values = vec![f64::NEG_INFINITY; (rows + 1) * width];
        values[0] = 0.0;
        for r in 0..=rows {
            let horiz_ok = r < rows || last_row_horizontal;
            for s in 0..=cols {
                if r == 0 && s == 0 {
                    continue;
                }
                let mut acc = f64::NEG_INFINITY;
                if s > 0 && horiz_ok {
                    acc = log2_add(acc, values[r * width + s - 1] + lh);
                }
                if r > 0 {
                    acc = log2_add(acc, values[(r - 1) * width + s] + lv);
                    if s > 0 {
                        let same = match (x, y) {
                            (Some(x), Some(y)) => x[r - 1] == y[s - 1],
                            _ => true,
                        };
                        let ld = if same { lm } else { lx };
                        acc = log2_add(acc, values[(r - 1) * width + s - 1] + ld);
                    }
                }
                values[r * width + s] = acc;
            }
        }
        Self { rows, cols, values }
    }

    #[inline]
    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.values[r * (self.cols + 1) + s]
    }

    /// log2 weight of all paths to the far corner.
    pub fn corner(&self) -> f64 {
        self.get(self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// `log2 P(y, δ | x)` where `δ = |y| − |x|` is the drift change over the segment.
pub fn segment_log2_likelihood(params: &ChannelParams, x: &[u8], y: &[u8]) -> f64 {
    LatticeTable::fill(x.len(), y.len(), Some(x), Some(y), EdgeWeights::likelihood(params), false)
        .corner()
}

/// `P(y_seg, δ_out | x, δ_in)`: probability that the transmitted block `x`,
/// entered with drift `δ_in`, produces exactly `y_seg` and leaves drift `δ_out`.
pub fn segment_likelihood(
    params: &ChannelParams,
    x: &[u8],
    y_seg: &[u8],
    delta_in: i64,
    delta_out: i64,
) -> Result<f64> {
    let len = x.len() as i64 + delta_out - delta_in;
    if len < 0 {
        return Err(Error::Domain(format!("segment length {len} is negative")));
    }
    if len != y_seg.len() as i64 {
        return Err(Error::Domain(format!(
            "segment of {} bits does not match drift change {} over {} bits",
            y_seg.len(),
            delta_out - delta_in,
            x.len()
        )));
    }
    Ok(segment_log2_likelihood(params, x, y_seg).exp2())
}

/// Drift transition probability `P(d_out | d_in)` over `c` transmitted bits.
pub fn drift_transition(params: &ChannelParams, delta_in: i64, delta_out: i64, c: usize) -> f64 {
    let len = c as i64 + delta_out - delta_in;
    if len < 0 {
        return 0.0;
    }
    LatticeTable::fill(c, len as usize, None, None, EdgeWeights::drift(params), false)
        .corner()
        .exp2()
}

/// `P_R(y)`: probability of receiving `y` from `r` uniformly random transmitted bits.
pub fn tail_probability(params: &ChannelParams, r: usize, y_tail: &[u8]) -> f64 {
    tail_log2_probability(params, r, y_tail.len()).exp2()
}

/// log2 of [`tail_probability`]. Only the received length matters.
pub fn tail_log2_probability(params: &ChannelParams, r: usize, n: usize) -> f64 {
    LatticeTable::fill(r, n, None, None, EdgeWeights::tail(params), false).corner()
}

/// `log2 P(y, δ | x)` for every `c`-bit block `x`, drift change
/// `δ ∈ [−dmax, imax]` and received segment `y` of `c + δ` bits.
#[derive(Debug, Clone)]
pub struct SegmentTable {
    c: usize,
    imax: usize,
    dmax: usize,
    // offset of each δ within the block for one `x`
    delta_offsets: Vec<usize>,
    stride: usize,
    values: Vec<f64>,
}

impl SegmentTable {
    pub fn new(params: &ChannelParams, c: usize, imax: usize, dmax: usize) -> Result<Self> {
        params.validate()?;
        if dmax > c {
            return Err(Error::InvalidConfig(format!("dmax={dmax} exceeds the block length {c}")));
        }
        if c + imax > 24 {
            return Err(Error::EnumerationTooLarge(format!("segments of {} bits", c + imax)));
        }
        let mut delta_offsets = Vec::with_capacity(imax + dmax + 1);
        let mut stride = 0;
        for len in (c - dmax)..=(c + imax) {
            delta_offsets.push(stride);
            stride += 1 << len;
        }
        let w = EdgeWeights::likelihood(params);
        let mut values = Vec::with_capacity(stride << c);
        for x in 0..1u32 << c {
            let xb = crate::bits::unpack(x, c);
            for len in (c - dmax)..=(c + imax) {
                for y in 0..1u32 << len {
                    let yb = crate::bits::unpack(y, len);
                    values.push(LatticeTable::fill(c, len, Some(&xb), Some(&yb), w, false).corner());
                }
            }
        }
        Ok(Self { c, imax, dmax, delta_offsets, stride, values })
    }

    /// `x` and `y` are packed MSB-first; `y` must have `c + delta` bits.
    #[inline]
    pub fn get(&self, x: u32, delta: i64, y: u32) -> f64 {
        let di = (delta + self.dmax as i64) as usize;
        self.values[x as usize * self.stride + self.delta_offsets[di] + y as usize]
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn imax(&self) -> usize {
        self.imax
    }

    pub fn dmax(&self) -> usize {
        self.dmax
    }
}

/// `log2 P_{c·k}(n)`: probability of a specific received suffix of `n` bits
/// given `k` unknown blocks of uniformly random transmitted bits.
#[derive(Debug, Clone)]
pub struct TailTable {
    c: usize,
    blocks: usize,
    max_len: usize,
    values: Vec<f64>,
}

impl TailTable {
    pub fn new(params: &ChannelParams, c: usize, blocks: usize, max_len: usize) -> Result<Self> {
        params.validate()?;
        let w = EdgeWeights::tail(params);
        let (la, lb, lg) = (log2w(w.horizontal), log2w(w.vertical), log2w(w.diagonal_match));
        let width = max_len + 1;
        let mut values = vec![f64::NEG_INFINITY; (blocks + 1) * width];
        values[0] = 0.0;
        // rolling rows of unrestricted Delannoy numbers; the tail excludes
        // paths whose last step is horizontal in the final row
        let mut prev = vec![f64::NEG_INFINITY; width];
        prev[0] = 0.0;
        for (s, v) in prev.iter_mut().enumerate().skip(1) {
            *v = la * s as f64;
        }
        let mut cur = vec![f64::NEG_INFINITY; width];
        for r in 1..=blocks * c {
            let mut last = f64::NEG_INFINITY;
            for s in 0..width {
                let mut tail = prev[s] + lb;
                if s > 0 {
                    tail = log2_add(tail, prev[s - 1] + lg);
                }
                if r % c == 0 {
                    values[(r / c) * width + s] = tail;
                }
                let full = if s > 0 { log2_add(tail, last + la) } else { tail };
                cur[s] = full;
                last = full;
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        Ok(Self { c, blocks, max_len, values })
    }

    /// `log2 P_{c·blocks}(len)`; `−∞` when `len` exceeds the table.
    #[inline]
    pub fn get(&self, blocks: usize, len: usize) -> f64 {
        if len > self.max_len || blocks > self.blocks {
            return f64::NEG_INFINITY;
        }
        self.values[blocks * (self.max_len + 1) + len]
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }
}
