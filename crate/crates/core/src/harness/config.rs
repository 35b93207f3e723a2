//! Line-oriented `key = value` experiment manifests.
//!
//! ```text
//! # CC1 around the cutoff
//! code = CC1
//! blocks = 300
//! points = 0.01:0.01:0 @ 2.46e-3; 0.02:0.02:0
//! delta = 4
//! seed = 7
//! ```
//!
//! A point is `Pi:Pd:Ps`, optionally followed by `@ BER` giving the expected
//! bit error rate used to size the number of frames.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::channel::ChannelParams;
use crate::convcode::CodeSpec;
use crate::error::{Error, Result};
use crate::fano::DecoderConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub params: ChannelParams,
    pub expected_ber: Option<f64>,
}

impl ChannelPoint {
    pub fn new(pi: f64, pd: f64, ps: f64) -> Result<Self> {
        Ok(Self { params: ChannelParams::new(pi, pd, ps)?, expected_ber: None })
    }

    pub fn expecting(mut self, ber: f64) -> Self {
        self.expected_ber = Some(ber);
        self
    }
}

impl FromStr for ChannelPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (probs, ber) = match s.split_once('@') {
            Some((p, b)) => (p, Some(parse_num::<f64>("expected BER", b)?)),
            None => (s, None),
        };
        let parts: Vec<&str> = probs.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("channel point `{s}` is not `Pi:Pd:Ps`")));
        }
        let p = |i: usize| parse_num::<f64>("probability", parts[i]);
        Ok(Self { params: ChannelParams::new(p(0)?, p(1)?, p(2)?)?, expected_ber: ber })
    }
}

impl fmt::Display for ChannelPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.params.pi, self.params.pd, self.params.ps)?;
        if let Some(b) = self.expected_ber {
            write!(f, "@{b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Fano,
    Viterbi,
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fano" => Ok(DecoderKind::Fano),
            "viterbi" => Ok(DecoderKind::Viterbi),
            other => Err(Error::Parse(format!("unknown decoder `{other}`"))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Fano => "fano",
            DecoderKind::Viterbi => "viterbi",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Registry name or explicit `c,b,m:g1,g2,...` specification.
    pub code: String,
    pub blocks: usize,
    pub points: Vec<ChannelPoint>,
    pub copies: usize,
    pub decoder: DecoderConfig,
    pub kind: DecoderKind,
    /// Fixed frame count; when unset it is derived from the expected BER.
    pub frames: Option<usize>,
    pub min_errors: f64,
    pub max_frames: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            code: "CC1".into(),
            blocks: 300,
            points: Vec::new(),
            copies: 1,
            decoder: DecoderConfig::default(),
            kind: DecoderKind::Fano,
            frames: None,
            min_errors: 100.0,
            max_frames: 10_000,
            seed: 1,
            output: None,
        }
    }
}

fn parse_num<T: FromStr>(what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("invalid {what} `{}`", s.trim())))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "code" => {
                CodeSpec::parse(v)?;
                self.code = v.to_string();
            }
            "blocks" => self.blocks = parse_num("block count", v)?,
            "copies" => self.copies = parse_num("copy count", v)?,
            "points" => {
                self.points = v
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "decoder" => self.kind = v.parse()?,
            "delta" => self.decoder.delta = parse_num("threshold step", v)?,
            "imax" => self.decoder.imax = parse_num("imax", v)?,
            "dmax" => self.decoder.dmax = parse_num("dmax", v)?,
            "drift_cap" => self.decoder.drift_cap = parse_num("drift cap", v)?,
            "step_cap" => self.decoder.step_cap = parse_num("step cap", v)?,
            "metric_mode" => self.decoder.metric_mode = v.parse()?,
            "frames" => self.frames = Some(parse_num("frame count", v)?),
            "min_errors" => self.min_errors = parse_num("error target", v)?,
            "max_frames" => self.max_frames = parse_num("frame cap", v)?,
            "seed" => self.seed = parse_num("seed", v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            other => return Err(Error::Parse(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(k, v).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn code_spec(&self) -> Result<CodeSpec> {
        CodeSpec::parse(&self.code)
    }

    pub fn validate(&self) -> Result<()> {
        let code = self.code_spec()?;
        self.decoder.validate(&code)?;
        if self.copies == 0 {
            return Err(Error::InvalidConfig("copies must be at least 1".into()));
        }
        if self.kind == DecoderKind::Viterbi && self.copies != 1 {
            return Err(Error::InvalidConfig("the trellis decoder handles a single copy".into()));
        }
        if self.frames == Some(0) || self.max_frames == 0 {
            return Err(Error::InvalidConfig("frame counts must be at least 1".into()));
        }
        for p in &self.points {
            p.params.validate()?;
        }
        Ok(())
    }

    /// Frames to simulate at `point`.
    pub fn frames_for(&self, point: &ChannelPoint) -> usize {
        if let Some(f) = self.frames {
            return f;
        }
        let bits = (self.blocks * self.code_spec().map_or(1, |c| c.b())) as f64;
        match point.expected_ber {
            Some(ber) if ber > 0.0 => ((self.min_errors / (ber * bits)).ceil() as usize).clamp(1, self.max_frames),
            _ => self.max_frames,
        }
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "code = {}", self.code)?;
        writeln!(f, "blocks = {}", self.blocks)?;
        let pts: Vec<String> = self.points.iter().map(ToString::to_string).collect();
        writeln!(f, "points = {}", pts.join("; "))?;
        writeln!(f, "copies = {}", self.copies)?;
        writeln!(f, "decoder = {}", self.kind)?;
        writeln!(f, "delta = {}", self.decoder.delta)?;
        writeln!(f, "imax = {}", self.decoder.imax)?;
        writeln!(f, "dmax = {}", self.decoder.dmax)?;
        writeln!(f, "drift_cap = {}", self.decoder.drift_cap)?;
        writeln!(f, "step_cap = {}", self.decoder.step_cap)?;
        writeln!(f, "metric_mode = {}", self.decoder.metric_mode)?;
        if let Some(n) = self.frames {
            writeln!(f, "frames = {n}")?;
        }
        writeln!(f, "min_errors = {}", self.min_errors)?;
        writeln!(f, "max_frames = {}", self.max_frames)?;
        writeln!(f, "seed = {}", self.seed)?;
        if let Some(p) = &self.output {
            writeln!(f, "output = {}", p.display())?;
        }
        Ok(())
    }
}
