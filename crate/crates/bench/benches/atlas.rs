use criterion::{criterion_group, criterion_main};

criterion_group!(benches, atlas_bench::benchmarks);
criterion_main!(benches);
