use criterion::{black_box, criterion_group, criterion_main, Criterion};
use jingleprint::{
    detect_pois, frame_signature, median_filter_3x3, quantize, scan_stream, segment,
    DescriptorParams, FrameSource, HarrisParams, ScanConfig, SrmParams,
};
use jingleprint_bench::{catalogue_for, small_corpus};

fn per_frame(c: &mut Criterion) {
    let corpus = small_corpus();
    let frame = corpus.streams[0][300].clone();
    let qf = quantize(&median_filter_3x3(&frame), 64).unwrap();
    let snap = DescriptorParams::default().resolve(frame.pixel_count());

    c.bench_function("median_3x3_64x48", |b| {
        b.iter(|| median_filter_3x3(black_box(&frame)))
    });
    c.bench_function("segment_64x48", |b| {
        b.iter(|| segment(black_box(&qf), &SrmParams::default()))
    });
    c.bench_function("harris_64x48", |b| {
        b.iter(|| detect_pois(black_box(&frame), &HarrisParams::default(), 50, 3).unwrap())
    });
    c.bench_function("frame_signature_64x48", |b| {
        b.iter(|| frame_signature(black_box(&frame), &snap).unwrap())
    });
}

fn scanning(c: &mut Criterion) {
    let corpus = small_corpus();
    let cat = catalogue_for(&corpus);
    let stream = corpus.streams[0].clone();
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (name, cache) in [("cached", true), ("uncached", false)] {
        let cfg = ScanConfig {
            jobs: 1,
            cache,
            stride: if cache { 1 } else { 4 },
            ..ScanConfig::default()
        };
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut src = FrameSource::from_frames(stream.clone());
                scan_stream(&mut src, &cat, &cfg).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, per_frame, scanning);
criterion_main!(benches);
