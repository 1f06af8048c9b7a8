use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use dvpool::{ccp_pool, dvpp, dvpp_batch, sp_pool, DvppConfig, Reduction, Variant};
use dvpool_bench::random_map;
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let x = random_map(&[2048, 7, 7], 1);
    let mut group = c.benchmark_group("kernels_2048x7x7");
    group.throughput(Throughput::Elements(x.data().len() as u64));
    for n in [1, 2, 4] {
        group.bench_with_input(BenchmarkId::new("sp_pool", n), &n, |b, &n| {
            b.iter(|| sp_pool(black_box(&x), n, Reduction::Avg).unwrap())
        });
    }
    for m in [1, 3, 4] {
        group.bench_with_input(BenchmarkId::new("ccp_pool", m), &m, |b, &m| {
            b.iter(|| ccp_pool(black_box(&x), m, Reduction::Avg).unwrap())
        });
    }
    group.finish();
}

fn variants(c: &mut Criterion) {
    let x = random_map(&[2048, 7, 7], 2);
    let configs = [
        ("sc-ser", DvppConfig::representative_ser()),
        ("sc-c-ser", DvppConfig::representative_c_ser()),
        ("sc-par", DvppConfig::avg(Variant::ScPar, &[1], &[3], &[]).unwrap()),
        ("twins", DvppConfig::avg(Variant::Twins, &[3], &[4], &[]).unwrap()),
        ("spp", DvppConfig::avg(Variant::SpOnly, &[2, 3, 4], &[], &[]).unwrap()),
    ];
    let mut group = c.benchmark_group("dvpp_2048x7x7");
    for (name, cfg) in &configs {
        group.bench_function(*name, |b| b.iter(|| dvpp(black_box(&x), cfg).unwrap()));
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let maps: Vec<_> = (0..64).map(|i| random_map(&[512, 14, 14], i)).collect();
    let cfg = DvppConfig::representative_c_ser();
    let mut group = c.benchmark_group("dvpp_batch");
    group.throughput(Throughput::Elements(maps.len() as u64));
    group.sample_size(20);
    group.bench_function("64x512x14x14", |b| b.iter(|| dvpp_batch(black_box(&maps), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, kernels, variants, batch);
criterion_main!(benches);
