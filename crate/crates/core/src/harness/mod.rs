//! Monte-Carlo experiment driver: frame generation, decoding, error and
//! effort accounting, and CSV output.

pub mod config;
pub mod recipes;
pub mod stats;

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bits::{count_bit_errors, random_bits};
use crate::channel::{apply_offset, derive_seed, frame_rng, offset_sequence, transmit_many, ReceivedSet};
use crate::convcode::CodeSpec;
use crate::error::{Error, Result};
use crate::fano::DecoderContext;
use crate::viterbi::trellis_node_count;

pub use config::{ChannelPoint, DecoderKind, ExperimentConfig};
pub use stats::{wilson95, wilson_interval};

pub const CSV_HEADER: &str = "code,Pi,Pd,Ps,M,delta,frames,bits,bit_errors,BER,ci_lo,ci_hi,F_av,N_tot,nu,timeouts,seed";

/// A simulated frame before decoding.
#[derive(Debug, Clone)]
pub struct SimulatedFrame {
    pub info: Vec<u8>,
    pub offset: Vec<u8>,
    pub received: ReceivedSet,
}

/// Draws the information bits, scrambles the codeword and passes it through the channel.
pub fn simulate_frame(code: &CodeSpec, point: &ChannelPoint, blocks: usize, copies: usize, seed: u64) -> Result<SimulatedFrame> {
    let info = random_bits(blocks * code.b(), &mut frame_rng(seed));
    let codeword = code.encode_terminated(&info)?;
    let offset = offset_sequence(codeword.len(), seed);
    let sent = apply_offset(&codeword, &offset);
    let received = transmit_many(point.params, &sent, copies, derive_seed(seed, 1))?;
    Ok(SimulatedFrame { info, offset, received })
}

/// Outcome of decoding one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub forward_steps: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub code: String,
    pub point: ChannelPoint,
    pub copies: usize,
    pub delta: f64,
    pub decoder: DecoderKind,
    pub frames: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci: (f64, f64),
    pub f_av: f64,
    pub n_tot: u64,
    pub nu: f64,
    pub timeouts: u64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl PointResult {
    pub fn csv_row(&self) -> String {
        let p = &self.point.params;
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6e},{:.6e},{:.6e},{:.4},{},{:.4},{},{}",
            self.code,
            p.pi,
            p.pd,
            p.ps,
            self.copies,
            self.delta,
            self.frames,
            self.bits,
            self.bit_errors,
            self.ber,
            self.ci.0,
            self.ci.1,
            self.f_av,
            self.n_tot,
            self.nu,
            self.timeouts,
            self.seed
        )
    }
}

fn decode_frame(ctx: &DecoderContext, kind: DecoderKind, frame: &SimulatedFrame) -> FrameOutcome {
    let total = frame.info.len() as u64;
    let result = match kind {
        DecoderKind::Fano => ctx.fano(&frame.received, &frame.offset),
        DecoderKind::Viterbi => ctx.viterbi(&frame.received, &frame.offset),
    };
    match result {
        Ok(r) => FrameOutcome {
            bit_errors: count_bit_errors(&r.decoded, &frame.info) as u64,
            forward_steps: r.forward_steps,
            timed_out: !r.completed,
        },
        // received lengths beyond the drift cap: nothing is decoded
        Err(_) => FrameOutcome { bit_errors: total, forward_steps: 0, timed_out: true },
    }
}

/// Simulates and decodes the frames of one operating point. `index` selects
/// the point's sub-seed.
pub fn run_point(config: &ExperimentConfig, point: &ChannelPoint, index: usize) -> Result<PointResult> {
    run_point_with(config, point, index, config.kind)
}

fn run_point_with(config: &ExperimentConfig, point: &ChannelPoint, index: usize, kind: DecoderKind) -> Result<PointResult> {
    config.validate()?;
    if kind == DecoderKind::Viterbi && config.copies != 1 {
        return Err(Error::InvalidConfig("the trellis decoder handles a single copy".into()));
    }
    let start = Instant::now();
    let code = config.code_spec()?;
    let ctx = DecoderContext::new(&code, point.params, config.decoder, config.blocks)?;
    let seed = derive_seed(config.seed, index as u64);
    let frames = config.frames_for(point);
    let outcomes: Vec<FrameOutcome> = (0..frames as u64)
        .into_par_iter()
        .map(|f| {
            simulate_frame(&code, point, config.blocks, config.copies, derive_seed(seed, f))
                .map(|frame| decode_frame(&ctx, kind, &frame))
        })
        .collect::<Result<_>>()?;

    let bits = (frames * config.blocks * code.b()) as u64;
    let bit_errors: u64 = outcomes.iter().map(|o| o.bit_errors).sum();
    let timeouts = outcomes.iter().filter(|o| o.timed_out).count() as u64;
    let lengths = vec![code.c() * (config.blocks + code.m()); config.copies];
    let n_tot = trellis_node_count(&code, &config.decoder, config.blocks, &lengths);
    let f_av = match kind {
        DecoderKind::Fano => outcomes.iter().map(|o| o.forward_steps).sum::<u64>() as f64 / frames as f64,
        // the trellis decoder visits every node
        DecoderKind::Viterbi => n_tot as f64,
    };
    Ok(PointResult {
        code: config.code.clone(),
        point: *point,
        copies: config.copies,
        delta: config.decoder.delta,
        decoder: kind,
        frames: frames as u64,
        bits,
        bit_errors,
        ber: bit_errors as f64 / bits as f64,
        ci: wilson95(bit_errors, bits),
        f_av,
        n_tot,
        nu: if f_av > 0.0 { n_tot as f64 / f_av } else { f64::INFINITY },
        timeouts,
        seed,
        wall_time: start.elapsed(),
    })
}

/// Runs every point of the grid, streaming CSV rows to `sink` as they finish.
pub fn run_grid_to<W: Write>(config: &ExperimentConfig, sink: &mut W) -> Result<Vec<PointResult>> {
    writeln!(sink, "{CSV_HEADER}")?;
    let mut rows = Vec::with_capacity(config.points.len());
    for (i, point) in config.points.iter().enumerate() {
        let row = run_point(config, point, i)?;
        writeln!(sink, "{}", row.csv_row())?;
        sink.flush()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Runs the grid and writes it to `config.output` when set.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<PointResult>> {
    match &config.output {
        Some(path) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
            run_grid_to(config, &mut file)
        }
        None => run_grid_to(config, &mut std::io::sink()),
    }
}

/// Fano and Viterbi decoding of identical noise realisations. Single copy only.
pub fn compare_decoders(config: &ExperimentConfig, point: &ChannelPoint, index: usize) -> Result<(PointResult, PointResult)> {
    Ok((
        run_point_with(config, point, index, DecoderKind::Fano)?,
        run_point_with(config, point, index, DecoderKind::Viterbi)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig { blocks: 40, frames: Some(6), seed: 3, ..ExperimentConfig::default() }
    }

    #[test]
    fn noiseless_point() {
        let cfg = small_config();
        let r = run_point(&cfg, &ChannelPoint::new(0.0, 0.0, 0.0).unwrap(), 0).unwrap();
        assert_eq!(r.bit_errors, 0);
        assert_eq!(r.f_av, 41.0);
        assert_eq!(r.bits, 6 * 40);
        assert_eq!(r.timeouts, 0);
    }

    #[test]
    fn grid_rows_are_deterministic() {
        let mut cfg = small_config();
        cfg.points = vec![
            ChannelPoint::new(0.02, 0.02, 0.0).unwrap(),
            ChannelPoint::new(0.04, 0.04, 0.0).unwrap(),
        ];
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_grid_to(&cfg, &mut a).unwrap();
        run_grid_to(&cfg, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("CC1,0.02,0.02,0,1,4,6,240,"));
        assert_eq!(lines[1].split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn decoders_see_the_same_frames() {
        let cfg = small_config();
        let point = ChannelPoint::new(0.0, 0.0, 0.0).unwrap();
        let (f, v) = compare_decoders(&cfg, &point, 0).unwrap();
        assert_eq!((f.bit_errors, v.bit_errors), (0, 0));
        assert_eq!(f.seed, v.seed);
        assert_eq!(v.nu, 1.0);
    }
}
