use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use ppcard_core::clustering::{kmeans, KMeansSettings, KRange, Points, TieBreak};
use ppcard_core::datagen::BundleSpec;
use ppcard_core::{
    estimate_cardinality, perturb_dataset, BloomFilter, Encoder, EncodedDataset, EncodingParams, EstimatorSettings,
    PlainRecord, PrivacyParams, RecordSchema, ReferenceConfig, ReferenceMethod,
};

fn records() -> Vec<PlainRecord> {
    let (bundle, _) = BundleSpec::clean(171, 1).generate().unwrap();
    bundle.providers.into_iter().flat_map(|(_, r)| r).collect()
}

fn encode_all(recs: &[PlainRecord]) -> Vec<BloomFilter> {
    let encoder = Encoder::new(RecordSchema::voter(), EncodingParams::default()).unwrap();
    recs.iter().map(|r| encoder.encode(r).unwrap()).collect()
}

fn perturbed(filters: &[BloomFilter], epsilon: f64) -> Vec<EncodedDataset> {
    let half = filters.len() / 2;
    [("p0", &filters[..half]), ("p1", &filters[half..])]
        .into_iter()
        .enumerate()
        .map(|(i, (id, f))| perturb_dataset(id, f, &PrivacyParams::new(epsilon, i as u64).unwrap()).unwrap())
        .collect()
}

fn bench(c: &mut Criterion) {
    let recs = records();
    let filters = encode_all(&recs);

    c.bench_function("encode 342 records", |b| b.iter(|| encode_all(black_box(&recs))));

    c.bench_function("perturb 342 filters", |b| {
        let privacy = PrivacyParams::new(3.0, 7).unwrap();
        b.iter(|| perturb_dataset("p0", black_box(&filters), &privacy).unwrap())
    });

    let inputs = perturbed(&filters, 3.0);
    let pooled: Vec<BloomFilter> = inputs.iter().flat_map(|d| d.filters.iter().cloned()).collect();
    let points = Points::from_filters(&pooled).unwrap().with_pairwise();

    let mut group = c.benchmark_group("kmeans k=171");
    group.sample_size(10);
    for refine in [false, true] {
        let settings = KMeansSettings { refine, ..KMeansSettings::default() };
        group.bench_function(if refine { "refined" } else { "lloyd" }, |b| {
            b.iter(|| kmeans(black_box(&points), 171, &settings).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    let settings = EstimatorSettings {
        k_range: Some(KRange::new(150, 200)),
        tie_break: TieBreak::Largest,
        ..EstimatorSettings::default()
    };
    group.bench_function("method A, k in [150, 200]", |b| {
        b.iter_batched(
            || ReferenceConfig::new(ReferenceMethod::A, 0.12, 3),
            |cfg| estimate_cardinality(&inputs, &cfg, &settings, None).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
