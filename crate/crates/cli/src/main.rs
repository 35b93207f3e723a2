use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use idsfano::bits::{bits_to_string, parse_bits, random_bits};
use idsfano::channel::{apply_offset, offset_sequence, transmit_many};
use idsfano::cutoff::{find_cutoff_probability, shortcut_cutoff, CutoffProblem, PsMode, Sigma1Target};
use idsfano::harness::recipes::{figure, Curve};
use idsfano::harness::{run_grid_to, run_point, DecoderKind, ExperimentConfig, PointResult, CSV_HEADER};
use idsfano::{frame_rng, ChannelParams, CodeSpec, DecoderConfig, MetricMode, ReceivedSet};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "IDSFANO_THREADS";

#[derive(Parser)]
#[command(name = "idsfano", version, about = "Sequential decoding of convolutional codes over insertion/deletion/substitution channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode information bits into a terminated codeword.
    Encode(EncodeArgs),
    /// Pass a bit string through the channel.
    Channel(ChannelArgs),
    /// Decode received sequences, one per line.
    Decode(DecodeArgs),
    /// Measure bit error rates over a grid of channel points.
    Ber(ExperimentArgs),
    /// Measure the complexity reduction factor of the Fano decoder.
    Nu(ExperimentArgs),
    /// Find the channel probability at which the cutoff rate equals the code rate.
    Cutoff(CutoffArgs),
    /// Rerun the experiment grid behind one of the published figures.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Registry name or `c,b,m:g1,g2,...` in octal.
    #[arg(long, default_value = "CC1")]
    code: String,
    /// Information bits; random when omitted.
    #[arg(long)]
    bits: Option<String>,
    /// Number of random information blocks.
    #[arg(long, default_value_t = 300)]
    blocks: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// XOR the codeword with the pseudo-random offset of this seed.
    #[arg(long)]
    offset_seed: Option<u64>,
}

#[derive(Args)]
struct ChannelOpts {
    #[arg(long, default_value_t = 0.0)]
    pi: f64,
    #[arg(long, default_value_t = 0.0)]
    pd: f64,
    #[arg(long, default_value_t = 0.0)]
    ps: f64,
}

impl ChannelOpts {
    fn params(&self) -> Result<ChannelParams> {
        Ok(ChannelParams::new(self.pi, self.pd, self.ps)?)
    }
}

#[derive(Args)]
struct ChannelArgs {
    #[command(flatten)]
    channel: ChannelOpts,
    /// Transmitted bits; read from stdin when omitted.
    #[arg(long)]
    bits: Option<String>,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct DecoderOpts {
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    imax: Option<usize>,
    #[arg(long)]
    dmax: Option<usize>,
    #[arg(long)]
    drift_cap: Option<usize>,
    #[arg(long)]
    step_cap: Option<u64>,
    /// `exact` or `asymptotic`.
    #[arg(long)]
    metric_mode: Option<MetricMode>,
}

impl DecoderOpts {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if let Some(v) = self.delta {
            out.push(("delta", v.to_string()));
        }
        if let Some(v) = self.imax {
            out.push(("imax", v.to_string()));
        }
        if let Some(v) = self.dmax {
            out.push(("dmax", v.to_string()));
        }
        if let Some(v) = self.drift_cap {
            out.push(("drift_cap", v.to_string()));
        }
        if let Some(v) = self.step_cap {
            out.push(("step_cap", v.to_string()));
        }
        if let Some(v) = self.metric_mode {
            out.push(("metric_mode", v.to_string()));
        }
        out
    }

    fn config(&self) -> Result<DecoderConfig> {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in self.pairs() {
            cfg.set(k, &v)?;
        }
        Ok(cfg.decoder)
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long, default_value = "CC1")]
    code: String,
    #[command(flatten)]
    channel: ChannelOpts,
    #[command(flatten)]
    decoder: DecoderOpts,
    /// `fano` or `viterbi`.
    #[arg(long, default_value = "fano")]
    decoder_kind: DecoderKind,
    /// Information blocks in the frame.
    #[arg(long)]
    blocks: usize,
    /// Offset seed used at the transmitter, if any.
    #[arg(long)]
    offset_seed: Option<u64>,
    /// File with one received sequence per line; stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` manifest; flags override its settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    copies: Option<usize>,
    /// Channel points `Pi:Pd:Ps[@BER]` separated by `;`.
    #[arg(long)]
    points: Option<String>,
    /// `fano` or `viterbi`.
    #[arg(long)]
    decoder_kind: Option<DecoderKind>,
    #[command(flatten)]
    decoder: DecoderOpts,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    min_errors: Option<f64>,
    #[arg(long)]
    max_frames: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        let mut pairs = self.decoder.pairs();
        let opt = |k: &'static str, v: Option<String>, pairs: &mut Vec<(&'static str, String)>| {
            if let Some(v) = v {
                pairs.push((k, v));
            }
        };
        opt("code", self.code.clone(), &mut pairs);
        opt("blocks", self.blocks.map(|v| v.to_string()), &mut pairs);
        opt("copies", self.copies.map(|v| v.to_string()), &mut pairs);
        opt("points", self.points.clone(), &mut pairs);
        opt("decoder", self.decoder_kind.map(|v| v.to_string()), &mut pairs);
        opt("frames", self.frames.map(|v| v.to_string()), &mut pairs);
        opt("min_errors", self.min_errors.map(|v| v.to_string()), &mut pairs);
        opt("max_frames", self.max_frames.map(|v| v.to_string()), &mut pairs);
        opt("seed", self.seed.map(|v| v.to_string()), &mut pairs);
        opt("output", self.output.as_ref().map(|p| p.display().to_string()), &mut pairs);
        for (k, v) in pairs {
            cfg.set(k, &v)?;
        }
        cfg.validate()?;
        if cfg.points.is_empty() {
            bail!("no channel points given (use --points or a config file)");
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct CutoffArgs {
    /// Registry name or `c,b`.
    #[arg(long, default_value = "3,1")]
    code: String,
    #[arg(long, default_value_t = 3)]
    imax: usize,
    #[arg(long, default_value_t = 3)]
    dmax: usize,
    /// Ratio `Pd / Pi`.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// `fixed:<Ps>` or `ratio:<beta>`.
    #[arg(long, default_value = "ratio:0")]
    ps_mode: PsMode,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Solve the single condition at σ = −1/2 instead of both exponents.
    #[arg(long)]
    shortcut: bool,
    /// Use one factor of λ in the incorrect-path target for every copy count.
    #[arg(long)]
    single_lambda: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    /// fig5, fig6, fig7, fig8 or fig9.
    figure: String,
    /// Directory for one CSV per curve; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Frames per point, overriding the error-count sizing.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    max_frames: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Only curves whose label contains this text.
    #[arg(long)]
    only: Option<String>,
    #[command(flatten)]
    decoder: DecoderOpts,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Encode(a) => encode(a),
        Command::Channel(a) => channel(a),
        Command::Decode(a) => decode(a),
        Command::Ber(a) => experiment(a, None),
        Command::Nu(a) => experiment(a, Some(DecoderKind::Fano)),
        Command::Cutoff(a) => cutoff(a),
        Command::Reproduce(a) => reproduce(a),
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_VAR} must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn read_lines(path: Option<&PathBuf>) -> Result<Vec<String>> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => io::stdin().lock().lines().collect::<io::Result<Vec<_>>>()?.join("\n"),
    };
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn encode(a: EncodeArgs) -> Result<()> {
    let code = CodeSpec::parse(&a.code)?;
    let info = match &a.bits {
        Some(s) => parse_bits(s)?,
        None => random_bits(a.blocks * code.b(), &mut frame_rng(a.seed)),
    };
    let mut cw = code.encode_terminated(&info)?;
    if let Some(seed) = a.offset_seed {
        cw = apply_offset(&cw, &offset_sequence(cw.len(), seed));
    }
    if a.bits.is_none() {
        println!("{}", bits_to_string(&info));
    }
    println!("{}", bits_to_string(&cw));
    Ok(())
}

fn channel(a: ChannelArgs) -> Result<()> {
    let bits = match &a.bits {
        Some(s) => parse_bits(s)?,
        None => parse_bits(&read_lines(None)?.concat())?,
    };
    let rx = transmit_many(a.channel.params()?, &bits, a.copies, a.seed)?;
    for y in &rx.sequences {
        println!("{}", bits_to_string(y));
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let code = CodeSpec::parse(&a.code)?;
    let cfg = a.decoder.config()?;
    let sequences = read_lines(a.input.as_ref())?.iter().map(|l| parse_bits(l)).collect::<idsfano::Result<Vec<_>>>()?;
    let rx = ReceivedSet::new(sequences, 0)?;
    let offset = a.offset_seed.map(|s| offset_sequence(code.c() * (a.blocks + code.m()), s)).unwrap_or_default();
    let ctx = idsfano::fano::DecoderContext::new(&code, a.channel.params()?, cfg, a.blocks)?;
    let res = match a.decoder_kind {
        DecoderKind::Fano => ctx.fano(&rx, &offset)?,
        DecoderKind::Viterbi => ctx.viterbi(&rx, &offset)?,
    };
    println!("{}", bits_to_string(&res.decoded));
    eprintln!(
        "completed={} forward_steps={} branch_evaluations={} metric={:.4}",
        res.completed, res.forward_steps, res.branch_evaluations, res.final_metric
    );
    Ok(())
}

fn experiment(a: ExperimentArgs, force: Option<DecoderKind>) -> Result<()> {
    let mut cfg = a.config()?;
    if let Some(kind) = force {
        cfg.kind = kind;
    }
    match cfg.output.clone() {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            report(&run_grid_to(&cfg, &mut f)?);
        }
        None => {
            run_grid_to(&cfg, &mut io::stdout().lock())?;
        }
    }
    Ok(())
}

fn report(rows: &[PointResult]) {
    for r in rows {
        eprintln!(
            "{} M={} {}: BER {:.3e} [{:.3e}, {:.3e}]  nu {:.1}  timeouts {}  {:.1}s",
            r.code,
            r.copies,
            r.point,
            r.ber,
            r.ci.0,
            r.ci.1,
            r.nu,
            r.timeouts,
            r.wall_time.as_secs_f64()
        );
    }
}

fn cutoff(a: CutoffArgs) -> Result<()> {
    let (c, b) = match a.code.split_once(',') {
        Some((c, b)) if !b.contains(',') && !b.contains(':') => (c.trim().parse()?, b.trim().parse()?),
        _ => {
            let code = CodeSpec::parse(&a.code)?;
            (code.c(), code.b())
        }
    };
    let problem = CutoffProblem {
        c,
        b,
        imax: a.imax,
        dmax: a.dmax,
        alpha: a.alpha,
        ps: a.ps_mode,
        copies: a.copies,
        eps: a.eps,
        target: if a.single_lambda { Sigma1Target::SingleLambda } else { Sigma1Target::PerCopy },
        ..CutoffProblem::default()
    };
    let r = if a.shortcut { shortcut_cutoff(&problem)? } else { find_cutoff_probability(&problem)? };
    println!("c,b,imax,dmax,alpha,ps_mode,M,p,Pi,Pd,Ps,sigma0,sigma1,iterations,residual");
    println!(
        "{c},{b},{},{},{},{},{},{:.8},{:.8},{:.8},{:.8},{:.8},{:.8},{},{:.3e}",
        a.imax, a.dmax, a.alpha, a.ps_mode, a.copies, r.p, r.params.pi, r.params.pd, r.params.ps, r.sigma0, r.sigma1, r.iterations, r.residual
    );
    Ok(())
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || ch == '.' { ch.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn reproduce(a: ReproduceArgs) -> Result<()> {
    let curves: Vec<Curve> =
        figure(&a.figure)?.into_iter().filter(|c| a.only.as_ref().is_none_or(|s| c.label.contains(s.as_str()))).collect();
    if curves.is_empty() {
        bail!("no curve of {} matches the filter", a.figure);
    }
    if let Some(dir) = &a.output {
        fs::create_dir_all(dir)?;
    }
    let mut stdout = io::stdout().lock();
    for mut curve in curves {
        let cfg = &mut curve.config;
        for (k, v) in a.decoder.pairs() {
            cfg.set(k, &v)?;
        }
        if let Some(f) = a.frames {
            cfg.frames = Some(f);
        }
        if let Some(f) = a.max_frames {
            cfg.max_frames = f;
        }
        if let Some(s) = a.seed {
            cfg.seed = s;
        }
        let mut sink: Box<dyn Write> = match &a.output {
            Some(dir) => Box::new(io::BufWriter::new(fs::File::create(dir.join(format!("{}_{}.csv", a.figure, slug(curve.label))))?)),
            None => {
                writeln!(stdout, "# {} {}", a.figure, curve.label)?;
                Box::new(io::stdout())
            }
        };
        writeln!(sink, "{CSV_HEADER},published")?;
        for (i, (point, published)) in cfg.points.iter().zip(&curve.published).enumerate() {
            let r = run_point(cfg, point, i)?;
            writeln!(sink, "{},{published}", r.csv_row())?;
            sink.flush()?;
            let measured = if a.figure == "fig8" || a.figure == "fig9" { r.nu } else { r.ber };
            eprintln!("{} {}: measured {:.4e}, published {:.4e}", curve.label, point, measured, published);
        }
    }
    Ok(())
}
