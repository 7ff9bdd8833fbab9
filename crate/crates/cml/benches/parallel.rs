//! Parallel vs sequential throughput of the data-parallel entry points: the
//! axiom soundness campaign and batch family evaluation. With
//! `--no-default-features` both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cml::axioms::{soundness_campaign, SchemaId};
use cml::grid::enumerate_family;
use cml::kernel::Process;
use cml::metrics::pdist;
use cml::random::{rng_from_seed, KernelGen};
use cml::{measures, parse, Exec};
use std::sync::Arc;

fn bench_campaign(c: &mut Criterion) {
    let mut group = c.benchmark_group("soundness_campaign");
    let schemas = [
        SchemaId::A1,
        SchemaId::A2,
        SchemaId::A3,
        SchemaId::A4,
        SchemaId::C2,
        SchemaId::C3,
    ];
    for samples in [200usize, 1000] {
        group.bench_with_input(
            BenchmarkId::new("parallel", samples),
            &samples,
            |b, &samples| {
                b.iter(|| soundness_campaign(&schemas, samples, 42, Exec::Parallel));
            },
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", samples),
            &samples,
            |b, &samples| {
                b.iter(|| soundness_campaign(&schemas, samples, 42, Exec::Sequential));
            },
        );
    }
    group.finish();
}

fn bench_pdist(c: &mut Criterion) {
    let mut group = c.benchmark_group("pdist_family");
    let spec = measures(&parse("L[a,2] L[b,2] T").unwrap());
    let (family, _) = enumerate_family(2, &spec, true, 2000);
    let gen = KernelGen::default();
    let mut rng = rng_from_seed(3);
    let k1 = Arc::new(gen.sample(&mut rng));
    let k2 = Arc::new(gen.sample(&mut rng));
    let p1 = Process::from_index(k1, 0);
    let p2 = Process::from_index(k2, 0);
    group.bench_function(BenchmarkId::new("parallel", family.len()), |b| {
        b.iter(|| pdist(&p1, &p2, &family, false, Exec::Parallel).unwrap());
    });
    group.bench_function(BenchmarkId::new("sequential", family.len()), |b| {
        b.iter(|| pdist(&p1, &p2, &family, false, Exec::Sequential).unwrap());
    });
    group.finish();
}

criterion_group!(benches, bench_campaign, bench_pdist);
criterion_main!(benches);
