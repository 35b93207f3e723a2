//! Binary feedforward convolutional codes `[c, b, m]`.
//!
//! Generator polynomials are given in octal. Bit 0 (the least significant
//! bit) of each generator taps the current input, bit `b·k + j` taps input
//! bit `j` of the block entered `k` blocks ago. With this convention the
//! `[3,1,1]` code with generators `1 3 3` emits `111` from the zero state on
//! input `1` and `011` from state `1` on input `0`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::error::{Error, Result};

/// Encoder register contents: `b·m` bits, most recent block in the low bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EncoderState(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    c: usize,
    b: usize,
    m: usize,
    generators: Vec<u32>,
    // transition tables indexed by `state << b | input`
    next: Vec<u32>,
    output: Vec<u32>,
}

/// A registry entry: a named code together with its free distance.
#[derive(Debug, Clone)]
pub struct NamedCode {
    pub name: &'static str,
    pub code: CodeSpec,
    pub d_free: u32,
}

const MAX_REGISTER_BITS: usize = 20;
const MAX_OUTPUTS: usize = 16;

impl CodeSpec {
    pub fn new(c: usize, b: usize, m: usize, generators: Vec<u32>) -> Result<Self> {
        if c == 0 || b == 0 {
            return Err(Error::InvalidCode(format!("c and b must be positive, got c={c}, b={b}")));
        }
        if c > MAX_OUTPUTS {
            return Err(Error::InvalidCode(format!("at most {MAX_OUTPUTS} outputs per block are supported")));
        }
        if b * m > MAX_REGISTER_BITS {
            return Err(Error::InvalidCode(format!(
                "register of {} bits exceeds the supported {MAX_REGISTER_BITS}",
                b * m
            )));
        }
        if generators.len() != c {
            return Err(Error::InvalidCode(format!(
                "expected {c} generator polynomials, got {}",
                generators.len()
            )));
        }
        let window = b * (m + 1);
        if let Some(g) = generators.iter().find(|&&g| u64::from(g) >= 1u64 << window) {
            return Err(Error::InvalidCode(format!(
                "generator {g:o} does not fit in {window} taps"
            )));
        }

        let states = 1usize << (b * m);
        let inputs = 1usize << b;
        let state_mask = (states - 1) as u32;
        let mut next = Vec::with_capacity(states * inputs);
        let mut output = Vec::with_capacity(states * inputs);
        for s in 0..states as u32 {
            for u in 0..inputs as u32 {
                let w = u | (s << b);
                let out = generators
                    .iter()
                    .fold(0u32, |acc, &g| (acc << 1) | ((g & w).count_ones() & 1));
                output.push(out);
                next.push(w & state_mask);
            }
        }
        Ok(Self { c, b, m, generators, next, output })
    }

    /// Builds a code from octal generator strings such as `["117", "127", "155"]`.
    pub fn from_octal(c: usize, b: usize, m: usize, generators: &[&str]) -> Result<Self> {
        let gens = generators
            .iter()
            .map(|g| {
                u32::from_str_radix(g.trim(), 8)
                    .map_err(|_| Error::InvalidCode(format!("`{g}` is not an octal number")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(c, b, m, gens)
    }

    /// Parses either a registry name (`CC1`) or an explicit `c,b,m:g1,g2,...`
    /// specification with octal generators.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some((dims, gens)) = spec.split_once(':') {
            let dims: Vec<usize> = dims
                .trim_matches(|ch| ch == '[' || ch == ']')
                .split(',')
                .map(|d| d.trim().parse().map_err(|_| Error::Parse(format!("bad dimension `{d}`"))))
                .collect::<Result<_>>()?;
            let [c, b, m] = dims[..] else {
                return Err(Error::Parse(format!("expected `c,b,m`, got {} values", dims.len())));
            };
            let gens: Vec<&str> = gens.split(',').collect();
            Self::from_octal(c, b, m, &gens)
        } else {
            lookup(spec).map(|n| n.code)
        }
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    pub fn num_states(&self) -> usize {
        1 << (self.b * self.m)
    }

    pub fn num_inputs(&self) -> usize {
        1 << self.b
    }

    /// One encoder step on packed values. The output is packed MSB-first,
    /// i.e. generator 0 lands in the most significant of the `c` bits.
    #[inline]
    pub fn step(&self, state: EncoderState, input: u32) -> (u32, EncoderState) {
        let idx = ((state.0 as usize) << self.b) | input as usize;
        (self.output[idx], EncoderState(self.next[idx]))
    }

    /// Encodes one block of `b` input bits, returning the `c` output bits and the next state.
    pub fn encode_block(&self, state: EncoderState, input: &[u8]) -> Result<(Vec<u8>, EncoderState)> {
        if input.len() != self.b {
            return Err(Error::LengthMismatch { expected: self.b, got: input.len() });
        }
        let (out, next) = self.step(state, self.input_value(input));
        Ok((crate::bits::unpack(out, self.c), next))
    }

    /// Encodes `info` (a multiple of `b` bits) followed by `m` zero blocks.
    pub fn encode_terminated(&self, info: &[u8]) -> Result<Vec<u8>> {
        if !info.len().is_multiple_of(self.b) {
            return Err(Error::LengthMismatch { expected: self.b, got: info.len() });
        }
        let blocks = info.len() / self.b;
        let mut out = Vec::with_capacity(self.c * (blocks + self.m));
        let mut state = EncoderState::default();
        let inputs = info.chunks(self.b).map(|blk| self.input_value(blk));
        for u in inputs.chain(std::iter::repeat_n(0, self.m)) {
            let (o, next) = self.step(state, u);
            out.extend(crate::bits::unpack(o, self.c));
            state = next;
        }
        debug_assert_eq!(state, EncoderState::default());
        Ok(out)
    }

    /// Packs one input block; bit `j` of the block becomes bit `j` of the value.
    pub fn input_value(&self, block: &[u8]) -> u32 {
        block.iter().enumerate().fold(0, |acc, (j, &bit)| acc | (u32::from(bit & 1) << j))
    }

    pub fn input_bits(&self, value: u32) -> impl Iterator<Item = u8> + '_ {
        (0..self.b).map(move |j| ((value >> j) & 1) as u8)
    }

    /// Free distance by a shortest-path search over the state diagram.
    pub fn free_distance(&self) -> u32 {
        let weight = |out: u32| out.count_ones();
        let mut best = u32::MAX;
        let mut dist = vec![u32::MAX; self.num_states()];
        let mut heap = BinaryHeap::new();
        for u in 1..self.num_inputs() as u32 {
            let (out, next) = self.step(EncoderState(0), u);
            if next.0 == 0 {
                best = best.min(weight(out));
            } else if weight(out) < dist[next.0 as usize] {
                dist[next.0 as usize] = weight(out);
                heap.push(Reverse((weight(out), next.0)));
            }
        }
        while let Some(Reverse((d, s))) = heap.pop() {
            if d > dist[s as usize] || d >= best {
                continue;
            }
            for u in 0..self.num_inputs() as u32 {
                let (out, next) = self.step(EncoderState(s), u);
                let nd = d + weight(out);
                if next.0 == 0 {
                    best = best.min(nd);
                } else if nd < dist[next.0 as usize] {
                    dist[next.0 as usize] = nd;
                    heap.push(Reverse((nd, next.0)));
                }
            }
        }
        best
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.c, self.b, self.m)?;
        for (i, g) in self.generators.iter().enumerate() {
            write!(f, "{}{g:o}", if i == 0 { ":" } else { "," })?;
        }
        Ok(())
    }
}

/// The benchmark codes: three rate-1/3 codes of increasing memory.
pub fn registry() -> Vec<NamedCode> {
    let mk = |name, m, gens: [&str; 3], d_free| NamedCode {
        name,
        code: CodeSpec::from_octal(3, 1, m, &gens).expect("registry codes are valid"),
        d_free,
    };
    vec![
        mk("CC1", 1, ["1", "3", "3"], 5),
        mk("CC2", 6, ["117", "127", "155"], 15),
        mk("CC3", 10, ["3645", "2133", "3347"], 21),
    ]
}

pub fn lookup(name: &str) -> Result<NamedCode> {
    registry()
        .into_iter()
        .find(|n| n.name.eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| Error::UnknownCode(name.to_string()))
}
