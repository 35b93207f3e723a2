//! Viterbi decoding against exhaustive search over messages and drift paths.

mod common;

use common::{channel_probability, check_instance, random_instances};
use idsfano::bits::random_bits;
use idsfano::channel::frame_rng;
use idsfano::convcode::lookup;
use idsfano::{ChannelParams, ReceivedSet};
use rand::Rng;

#[test]
fn single_deletion_example() {
    let code = lookup("CC1").unwrap().code;
    let params = ChannelParams::new(0.02, 0.02, 0.0).unwrap();
    let info = [1, 0, 1, 1];
    let mut y = code.encode_terminated(&info).unwrap();
    y.remove(5);
    check_instance(&code, params, &info, &ReceivedSet::new(vec![y], 0).unwrap()).unwrap();
}

#[test]
fn matches_exhaustive_search() {
    random_instances(100, 2024).unwrap();
}

#[test]
fn recursion_agrees_with_lattice() {
    let params = ChannelParams::new(0.07, 0.05, 0.03).unwrap();
    let mut rng = frame_rng(5);
    for _ in 0..200 {
        let x = random_bits(rng.random_range(1..=4), &mut rng);
        let y = random_bits(rng.random_range(0..=7), &mut rng);
        let direct = channel_probability(&params, &x, &y);
        let lattice = idsfano::lattice::segment_log2_likelihood(&params, &x, &y).exp2();
        assert!((direct - lattice).abs() <= 1e-12 * direct.max(1e-300), "{x:?} {y:?}");
    }
}
