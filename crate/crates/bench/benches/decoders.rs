use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use idsfano::cutoff::{find_cutoff_probability, CutoffProblem};
use idsfano::fano::DecoderContext;
use idsfano::lattice::SegmentTable;
use idsfano::{ChannelParams, DecoderConfig};
use idsfano_bench::{frames, named};

const BLOCKS: usize = 300;

fn fano(c: &mut Criterion) {
    let mut group = c.benchmark_group("fano");
    group.sample_size(10);
    for (code, copies) in [("CC1", 1), ("CC1", 2), ("CC2", 1)] {
        let spec = named(code);
        let p = 0.01;
        let params = ChannelParams::new(p, p, 0.0).unwrap();
        let ctx = DecoderContext::new(&spec, params, DecoderConfig::default(), BLOCKS).unwrap();
        let batch = frames(&spec, p, BLOCKS, copies, 8);
        group.bench_with_input(BenchmarkId::new(code, copies), &batch, |b, batch| {
            b.iter(|| {
                for f in batch {
                    let _ = ctx.fano(&f.received, &f.offset);
                }
            })
        });
    }
    group.finish();
}

fn viterbi(c: &mut Criterion) {
    let mut group = c.benchmark_group("viterbi");
    group.sample_size(10);
    let spec = named("CC1");
    let p = 0.01;
    let params = ChannelParams::new(p, p, 0.0).unwrap();
    let ctx = DecoderContext::new(&spec, params, DecoderConfig::default(), BLOCKS).unwrap();
    let batch = frames(&spec, p, BLOCKS, 1, 2);
    group.bench_function("CC1", |b| {
        b.iter(|| {
            for f in &batch {
                let _ = ctx.viterbi(&f.received, &f.offset);
            }
        })
    });
    group.finish();
}

fn tables(c: &mut Criterion) {
    let params = ChannelParams::new(0.01, 0.01, 0.0).unwrap();
    c.bench_function("segment_table_c3", |b| b.iter(|| SegmentTable::new(&params, 3, 3, 3).unwrap()));
    c.bench_function("cutoff_cc1", |b| {
        b.iter(|| find_cutoff_probability(&CutoffProblem::default()).unwrap())
    });
}

criterion_group!(benches, fano, viterbi, tables);
criterion_main!(benches);
