use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use dtwidx::{linear_scan, synth, BandConstraint, DtwIndex, Execution, IndexConfig};

const LEN: usize = 128;
const R: usize = 13;

fn batch_search(c: &mut Criterion) {
    let data = synth::random_walks(2_000, LEN, R, 1);
    let queries = synth::random_walks(64, LEN, R, 2);
    let index = DtwIndex::build(&data, IndexConfig::new(R)).unwrap();

    let mut group = c.benchmark_group("range_search_batch");
    group.throughput(Throughput::Elements(queries.len() as u64));
    group.sample_size(10);
    for (name, exec) in [("serial", Execution::Serial), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::new(name, queries.len()), &exec, |b, &exec| {
            b.iter(|| index.range_search_batch(&queries, 20.0, exec).unwrap())
        });
    }
    group.finish();
}

fn index_vs_scan(c: &mut Criterion) {
    let data = synth::random_walks(2_000, LEN, R, 3);
    let q = synth::random_walks(1, LEN, R, 4).remove(0);
    let index = DtwIndex::build(&data, IndexConfig::new(R)).unwrap();
    let mut keogh = IndexConfig::new(R);
    keogh.keogh_filter = true;
    let index_keogh = DtwIndex::build(&data, keogh).unwrap();

    let mut group = c.benchmark_group("single_query");
    group.bench_function("linear_scan", |b| {
        b.iter(|| linear_scan(&data, &q, 20.0, BandConstraint::Radius(R)).unwrap())
    });
    group.bench_function("index", |b| b.iter(|| index.range_search(&q, 20.0).unwrap()));
    group.bench_function("index_keogh_stage", |b| b.iter(|| index_keogh.range_search(&q, 20.0).unwrap()));
    group.finish();
}

criterion_group!(benches, batch_search, index_vs_scan);
criterion_main!(benches);
