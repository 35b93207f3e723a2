//! Experiment grids for the published BER and complexity figures.

use crate::error::{Error, Result};
use crate::fano::DecoderConfig;

use super::config::{ChannelPoint, DecoderKind, ExperimentConfig};

/// One curve of a figure: a configuration whose points carry the published values.
#[derive(Debug, Clone)]
pub struct Curve {
    pub label: &'static str,
    pub config: ExperimentConfig,
    /// Published BER or complexity reduction factor per point.
    pub published: Vec<f64>,
}

fn symmetric(pairs: &[(f64, f64)], ps: f64, ber: bool) -> Vec<ChannelPoint> {
    pairs
        .iter()
        .map(|&(p, v)| {
            let pt = ChannelPoint::new(p, p, ps).expect("valid grid point");
            if ber {
                pt.expecting(v)
            } else {
                pt
            }
        })
        .collect()
}

fn curve(label: &'static str, code: &str, copies: usize, kind: DecoderKind, points: Vec<ChannelPoint>, published: Vec<f64>) -> Curve {
    let config = ExperimentConfig {
        code: code.into(),
        copies,
        kind,
        points,
        decoder: DecoderConfig::default(),
        ..ExperimentConfig::default()
    };
    Curve { label, config, published }
}

fn ber_curve(label: &'static str, code: &str, copies: usize, kind: DecoderKind, ps: f64, data: &[(f64, f64)]) -> Curve {
    curve(label, code, copies, kind, symmetric(data, ps, true), data.iter().map(|d| d.1).collect())
}

/// Points for complexity curves; frames sized from the companion BER curve when known.
fn nu_curve(label: &'static str, code: &str, copies: usize, ps: f64, data: &[(f64, f64)]) -> Curve {
    let mut c = curve(label, code, copies, DecoderKind::Fano, symmetric(data, ps, false), data.iter().map(|d| d.1).collect());
    c.config.frames = Some(200);
    c
}

/// BER against `Pi = Pd` for codes of increasing memory.
pub fn fig5() -> Vec<Curve> {
    vec![
        ber_curve(
            "CC1 Fano Ps=0",
            "CC1",
            1,
            DecoderKind::Fano,
            0.0,
            &[(3e-3, 0.000458), (5e-3, 0.000848), (1e-2, 0.00246333), (2e-2, 0.008132), (4e-2, 0.03044561)],
        ),
        ber_curve(
            "CC1 Viterbi Ps=0",
            "CC1",
            1,
            DecoderKind::Viterbi,
            0.0,
            &[(3e-3, 0.00035667), (5e-3, 0.000642), (1e-2, 0.00171133), (2e-2, 0.00546733), (4e-2, 0.021534)],
        ),
        ber_curve(
            "CC2 Fano Ps=0.02",
            "CC2",
            1,
            DecoderKind::Fano,
            0.02,
            &[(3e-3, 0.0000280), (5e-3, 0.000074), (1e-2, 0.00027600), (2e-2, 0.00160790)],
        ),
        ber_curve(
            "CC2 Viterbi Ps=0.02",
            "CC2",
            1,
            DecoderKind::Viterbi,
            0.02,
            &[(3e-3, 0.000006670), (5e-3, 0.00001667), (1e-2, 0.00007533), (2e-2, 0.00075933), (4e-2, 0.01070133)],
        ),
        ber_curve(
            "CC2 Fano Ps=0",
            "CC2",
            1,
            DecoderKind::Fano,
            0.0,
            &[(5e-3, 0.0000006667), (1e-2, 0.0000055556), (2e-2, 0.00008200), (4e-2, 0.00185989)],
        ),
        ber_curve("CC2 Viterbi Ps=0", "CC2", 1, DecoderKind::Viterbi, 0.0, &[(1e-2, 2e-6), (2e-2, 0.00002267), (4e-2, 0.001278)]),
        ber_curve("CC3 Fano Ps=0", "CC3", 1, DecoderKind::Fano, 0.0, &[(2e-2, 0.000002), (3e-2, 0.0000337778), (4e-2, 0.00013765)]),
    ]
}

/// BER with one, two and three received copies.
pub fn fig6() -> Vec<Curve> {
    let fano = DecoderKind::Fano;
    vec![
        ber_curve(
            "CC1 M=1",
            "CC1",
            1,
            fano,
            0.0,
            &[(3e-3, 0.000458), (5e-3, 0.000848), (1e-2, 0.00246333), (2e-2, 0.008132), (4e-2, 0.03044561)],
        ),
        ber_curve(
            "CC1 M=2",
            "CC1",
            2,
            fano,
            0.0,
            &[(3e-3, 0.0000416667), (5e-3, 0.0000986667), (1e-2, 0.0003436667), (2e-2, 0.0011630000)],
        ),
        ber_curve(
            "CC1 M=3",
            "CC1",
            3,
            fano,
            0.0,
            &[(3e-3, 0.00000333), (5e-3, 0.00001533), (1e-2, 0.00008067), (2e-2, 0.00042000), (3e-2, 0.00106267)],
        ),
        ber_curve(
            "CC2 M=1",
            "CC2",
            1,
            fano,
            0.0,
            &[(5e-3, 0.0000006667), (1e-2, 0.0000055556), (2e-2, 0.00008200), (4e-2, 0.00185989)],
        ),
        ber_curve(
            "CC2 M=2",
            "CC2",
            2,
            fano,
            0.0,
            &[(2e-2, 0.0000056667), (3e-2, 0.00002833), (4e-2, 0.0000756667), (0.06, 0.00031247)],
        ),
        ber_curve(
            "CC2 M=3",
            "CC2",
            3,
            fano,
            0.0,
            &[(2e-2, 0.00000150), (2.5e-2, 0.00000500), (3e-2, 0.0000093333), (3.5e-2, 0.00001853)],
        ),
    ]
}

fn one_sided(label: &'static str, code: &str, copies: usize, deletions: bool, data: &[(f64, f64)]) -> Curve {
    let points = data
        .iter()
        .map(|&(p, ber)| {
            let (pi, pd) = if deletions { (0.0, p) } else { (p, 0.0) };
            ChannelPoint::new(pi, pd, 0.0).expect("valid grid point").expecting(ber)
        })
        .collect();
    curve(label, code, copies, DecoderKind::Fano, points, data.iter().map(|d| d.1).collect())
}

/// BER with insertions only or deletions only.
pub fn fig7() -> Vec<Curve> {
    vec![
        one_sided(
            "CC1 M=1 Pi=0",
            "CC1",
            1,
            true,
            &[(3e-3, 0.00027333), (5e-3, 0.00049267), (1e-2, 0.00110067), (2e-2, 0.00289133), (4e-2, 0.00888000)],
        ),
        one_sided(
            "CC1 M=1 Pd=0",
            "CC1",
            1,
            false,
            &[(3e-3, 0.00012667), (5e-3, 0.00024333), (1e-2, 0.000542), (2e-2, 0.00128133), (4e-2, 0.00388733)],
        ),
        one_sided(
            "CC1 M=2 Pi=0",
            "CC1",
            2,
            true,
            &[
                (3e-3, 0.00000400),
                (5e-3, 0.00000600),
                (1e-2, 0.00002133),
                (2e-2, 0.00010800),
                (4e-2, 0.00055800),
                (6e-2, 0.00148933),
                (8e-2, 0.00359933),
            ],
        ),
        one_sided(
            "CC1 M=2 Pd=0",
            "CC1",
            2,
            false,
            &[(3e-3, 0.00000067), (5e-3, 0.00000133), (1e-2, 0.00000533), (2e-2, 0.00002333), (4e-2, 0.00014011)],
        ),
        one_sided("CC2 M=1 Pi=0", "CC2", 1, true, &[(2e-2, 0.00000200), (4e-2, 0.00003733), (6e-2, 0.00027733)]),
        one_sided("CC2 M=2 Pi=0", "CC2", 2, true, &[(6e-2, 0.00000067), (8e-2, 0.00000333), (0.1, 0.00001200)]),
    ]
}

/// Complexity reduction factor for a single copy.
pub fn fig8() -> Vec<Curve> {
    vec![
        nu_curve("CC1 Ps=0", "CC1", 1, 0.0, &[(3e-3, 104.8786), (5e-3, 102.9429), (1e-2, 93.6214), (2e-2, 55.8714), (4e-2, 6.3786)]),
        nu_curve("CC2 Ps=0", "CC2", 1, 0.0, &[(3e-3, 3.2923e3), (5e-3, 3.2157e3), (1e-2, 2702.0), (2e-2, 1241.9), (4e-2, 88.3571)]),
        nu_curve("CC2 Ps=0.02", "CC2", 1, 0.02, &[(3e-3, 2223.0), (5e-3, 1.8987e3), (1e-2, 795.7143), (2e-2, 174.4286)]),
        nu_curve(
            "CC3 Ps=0",
            "CC3",
            1,
            0.0,
            &[(3e-3, 5.3644e4), (5e-3, 5.2148e4), (1e-2, 4.5109e4), (2e-2, 1.9432e4), (3e-2, 5.1843e3), (4e-2, 1.6371e3)],
        ),
    ]
}

/// Complexity reduction factor for two copies.
pub fn fig9() -> Vec<Curve> {
    vec![
        nu_curve(
            "CC1 Ps=0",
            "CC1",
            2,
            0.0,
            &[(3e-3, 6.8817e3), (5e-3, 6.6193e3), (1e-2, 5.7642e3), (2e-2, 3.4289e3), (3e-2, 1.7572e3), (4e-2, 713.7), (5e-2, 295.2)],
        ),
        nu_curve(
            "CC2 Ps=0",
            "CC2",
            2,
            0.0,
            &[(3e-3, 2.1784e5), (5e-3, 1.9507e5), (1e-2, 1.6432e5), (2e-2, 8.025e4), (3e-2, 2.789e4), (4e-2, 1.275e4), (5e-2, 5.45e3)],
        ),
    ]
}

pub fn figure(name: &str) -> Result<Vec<Curve>> {
    match name {
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        "fig7" => Ok(fig7()),
        "fig8" => Ok(fig8()),
        "fig9" => Ok(fig9()),
        other => Err(Error::Parse(format!("unknown figure `{other}` (expected fig5 to fig9)"))),
    }
}
