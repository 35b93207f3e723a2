use idsfano::bits::random_bits;
use idsfano::channel::{frame_rng, transmit, transmit_many};
use idsfano::convcode::lookup;
use idsfano::cutoff::build_distributions;
use idsfano::fano::DecoderContext;
use idsfano::lattice::{
    critical_point, delannoy, delannoy_table, drift_transition, expected_drift_direction, segment_log2_likelihood,
    tail_log2_probability,
};
use idsfano::{ChannelParams, DecoderConfig, EncoderState, MetricMode, ReceivedSet};
use proptest::prelude::*;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn all_words(len: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << len).map(move |v| (0..len).map(|i| ((v >> i) & 1) as u8).collect())
}

fn channel() -> impl Strategy<Value = ChannelParams> {
    (0.0..0.2f64, 0.0..0.2f64, 0.0..0.1f64).prop_map(|(pi, pd, ps)| ChannelParams::new(pi, pd, ps).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn segment_probabilities_sum_to_drift_transition(p in channel(), x in proptest::collection::vec(0u8..2, 1..=4), delta in -3i64..=3) {
        let len = x.len() as i64 + delta;
        prop_assume!(len >= 0);
        let total: f64 = all_words(len as usize).map(|y| segment_log2_likelihood(&p, &x, &y).exp2()).sum();
        let drift = drift_transition(&p, 0, delta, x.len());
        prop_assert!((total - drift).abs() <= 1e-12 * drift.max(1e-300) + 1e-15);
    }

    #[test]
    fn lattice_is_normalised(p in channel(), x in proptest::collection::vec(0u8..2, 1..=3)) {
        // received words up to `extra` bits longer than x: insertions minus deletions ≤ extra
        let extra = 6u64;
        let n = x.len() as u64;
        let total: f64 = (0..=x.len() + extra as usize)
            .flat_map(all_words)
            .map(|y| segment_log2_likelihood(&p, &x, &y).exp2())
            .sum();
        // insertions before each bit are geometric (negative binomial in total);
        // each bit is then deleted independently with probability Pd / (1 − Pi)
        let q = p.pd / (1.0 - p.pi);
        let insertions = |k: u64| binomial(k + n - 1, k) * p.pi.powi(k as i32) * (1.0 - p.pi).powi(n as i32);
        let kept: f64 = (0..=n)
            .map(|d| {
                let deletions = binomial(n, d) * q.powi(d as i32) * (1.0 - q).powi((n - d) as i32);
                deletions * (0..=extra + d).map(insertions).sum::<f64>()
            })
            .sum();
        prop_assert!((total - kept).abs() <= 1e-12, "{} vs {}", total, kept);
    }

    #[test]
    fn delannoy_boundaries_and_recursion(r in 0usize..12, s in 0usize..12, a in 0.01..2.0f64, b in 0.01..2.0f64, g in 0.01..2.0f64) {
        let d = delannoy_table(r, s, a, b, g);
        for i in 0..=r {
            prop_assert!((d[i][0] - b.powi(i as i32)).abs() <= 1e-12 * d[i][0]);
        }
        for j in 0..=s {
            prop_assert!((d[0][j] - a.powi(j as i32)).abs() <= 1e-12 * d[0][j]);
        }
        for i in 1..=r {
            for j in 1..=s {
                let want = a * d[i][j - 1] + b * d[i - 1][j] + g * d[i - 1][j - 1];
                prop_assert!((d[i][j] - want).abs() <= 1e-12 * want);
            }
        }
    }

    #[test]
    fn tail_probability_is_a_delannoy_difference(p in channel(), r in 1usize..25, n in 1usize..25) {
        let (a, b, g) = (p.pi / 2.0, p.pd, p.pt() / 2.0);
        let d = delannoy_table(r, n, a, b, g);
        let want = d[r][n] - a * d[r][n - 1];
        let also = b * d[r - 1][n] + g * d[r - 1][n - 1];
        let got = tail_log2_probability(&p, r, n).exp2();
        prop_assert!((got - want).abs() <= 1e-10 * want.max(1e-300));
        prop_assert!((got - also).abs() <= 1e-10 * also.max(1e-300));
    }

    #[test]
    fn critical_point_lies_on_the_curve(pi in 0.0..0.3f64, pd in 0.0..0.3f64, ps in 0.0..0.1f64) {
        let p = ChannelParams::new(pi, pd, ps).unwrap();
        let cp = critical_point(&p, expected_drift_direction(&p)).unwrap();
        prop_assert!(cp.residual(&p).abs() <= 1e-12);
        prop_assert!(cp.q1 > 0.0 && cp.z1 > 0.0);
    }

    #[test]
    fn symmetric_channel_critical_point(p in 0.0005..0.3f64, ps in 0.0..0.1f64) {
        let params = ChannelParams::new(p, p, ps).unwrap();
        let cp = critical_point(&params, expected_drift_direction(&params)).unwrap();
        prop_assert!((cp.q1 - 1.0).abs() < 1e-12 && (cp.z1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_mgf_identity(p in 0.001..0.1f64, sigma in -1.0..0.0f64) {
        let params = ChannelParams::new(p, p, 0.0).unwrap();
        let (g0, g1) = build_distributions(3, 1, &params, 3, 3, 1).unwrap();
        let lhs = g1.mgf(sigma + 1.0);
        let rhs = 0.5 * g0.mgf(sigma) / 7.0;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn insertion_free_channels_never_lengthen(x in proptest::collection::vec(0u8..2, 0..200), pd in 0.0..0.5f64, seed in any::<u64>()) {
        let p = ChannelParams::new(0.0, pd, 0.1).unwrap();
        prop_assert!(transmit(p, &x, &mut frame_rng(seed)).len() <= x.len());
        let q = ChannelParams::new(pd, 0.0, 0.1).unwrap();
        prop_assert!(transmit(q, &x, &mut frame_rng(seed)).len() >= x.len());
    }
}

#[test]
fn standard_delannoy_closed_form() {
    for m in 0..10u64 {
        for n in 0..10u64 {
            let closed: f64 = (0..=m.min(n)).map(|k| binomial(m, k) * binomial(n, k) * 2f64.powi(k as i32)).sum();
            assert_eq!(delannoy(m as usize, n as usize, 1.0, 1.0, 1.0), closed);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn noiseless_fano_walks_straight_down(code_idx in 0usize..2, blocks in 1usize..40, seed in any::<u64>(), exact in any::<bool>()) {
        let code = lookup(["CC1", "CC2"][code_idx]).unwrap().code;
        let params = ChannelParams::new(0.01, 0.01, 0.0).unwrap();
        let mode = if exact { MetricMode::ExactTail } else { MetricMode::AsymptoticBias };
        let cfg = DecoderConfig { metric_mode: mode, ..DecoderConfig::default() };
        let ctx = DecoderContext::new(&code, params, cfg, blocks).unwrap();
        let info = random_bits(blocks * code.b(), &mut frame_rng(seed));
        let cw = code.encode_terminated(&info).unwrap();
        let rx = ReceivedSet::new(vec![cw], 0).unwrap();
        let res = ctx.fano(&rx, &[]).unwrap();
        prop_assert!(res.completed);
        prop_assert_eq!(&res.decoded, &info);
        prop_assert_eq!(res.forward_steps as usize, blocks + code.m());

        // the correct path metric never falls
        let frame = ctx.prepare(&rx, &[]).unwrap();
        let mut state = EncoderState::default();
        for t in 0..ctx.depth() {
            let u = if t < blocks { code.input_value(&info[t * code.b()..(t + 1) * code.b()]) } else { 0 };
            let z = ctx.branch_metric(&frame, t, state, &[0], u, &[0]).unwrap();
            prop_assert!(z >= 0.0, "negative increment {} at depth {}", z, t);
            state = code.step(state, u).1;
        }
    }

    #[test]
    fn every_forward_step_expands_one_node(p in 0.0..0.04f64, copies in 1usize..=2, seed in any::<u64>()) {
        let code = lookup("CC1").unwrap().code;
        let params = ChannelParams::new(p, p, 0.0).unwrap();
        let cfg = DecoderConfig { step_cap: 5_000, ..DecoderConfig::default() };
        let ctx = DecoderContext::new(&code, params, cfg, 30).unwrap();
        let info = random_bits(30, &mut frame_rng(seed));
        let rx = transmit_many(params, &code.encode_terminated(&info).unwrap(), copies, seed).unwrap();
        if let Ok(res) = ctx.fano(&rx, &[]) {
            let per_node = (code.num_inputs() * cfg.lambda().pow(copies as u32)) as u64;
            prop_assert!(res.forward_steps <= cfg.step_cap);
            prop_assert!((res.forward_steps + 1) * per_node >= res.branch_evaluations);
            if res.completed {
                prop_assert_eq!(res.decoded.len(), 30);
            }
        }
    }

    #[test]
    fn viterbi_beats_the_transmitted_path(p in 0.0..0.05f64, seed in any::<u64>()) {
        let code = lookup("CC1").unwrap().code;
        let params = ChannelParams::new(p, p, 0.01).unwrap();
        let ctx = DecoderContext::new(&code, params, DecoderConfig::default(), 25).unwrap();
        let info = random_bits(25, &mut frame_rng(seed));
        let rx = transmit_many(params, &code.encode_terminated(&info).unwrap(), 1, seed).unwrap();
        if let Ok(res) = ctx.viterbi(&rx, &[]) {
            // the true message on the decoded drifts is one competing path
            let other = ctx.trellis_path_metric(&rx, &[], &info, &res.drifts[0]).unwrap();
            prop_assert!(other <= res.final_metric + 1e-9);
        }
    }
}
