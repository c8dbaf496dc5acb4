use blinkwatch_bench::{astronaut, cascade, eye_stream, noise_image, FRAME};
use blinkwatch_core::cascade::{detect_multiscale, DetectParams};
use blinkwatch_core::drowsiness::{replay, TrackerConfig};
use blinkwatch_core::haarboost::{adaboost_train, enumerate_features, train_stump, Label, LabeledSample};
use blinkwatch_core::imaging::{IntegralImage, Rect};
use blinkwatch_core::synth::surrogate_dataset;
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn imaging(c: &mut Criterion) {
    let img = noise_image(1, FRAME.0, FRAME.1);
    c.bench_function("integral_image_384x286", |b| b.iter(|| IntegralImage::new(black_box(&img))));

    let ii = IntegralImage::new(&img);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rects: Vec<Rect> = (0..1024)
        .map(|_| {
            let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
            Rect::new(rng.random_range(0..=FRAME.0 - w), rng.random_range(0..=FRAME.1 - h), w, h)
        })
        .collect();
    c.bench_function("rect_sum_x1024", |b| {
        b.iter(|| rects.iter().map(|&r| ii.rect_sum(r).unwrap()).sum::<u64>())
    });
}

fn boosting(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let values: Vec<f64> = (0..2000).map(|_| rng.random_range(-500.0..500.0)).collect();
    let labels: Vec<Label> = (0..2000)
        .map(|_| if rng.random_bool(0.3) { Label::Positive } else { Label::Negative })
        .collect();
    let weights = vec![1.0 / 2000.0; 2000];
    c.bench_function("train_stump_2000", |b| b.iter(|| train_stump(&values, &labels, &weights).unwrap()));

    let set = surrogate_dataset(5, 100, 100);
    let samples: Vec<LabeledSample> = set
        .positives
        .iter()
        .map(|p| LabeledSample::new(p, Label::Positive))
        .chain(set.negatives.iter().map(|n| LabeledSample::new(n, Label::Negative)))
        .collect();
    let features = enumerate_features(16, 8);
    let mut group = c.benchmark_group("adaboost");
    group.sample_size(10);
    group.bench_function("3_rounds_200_samples_16x8", |b| {
        b.iter(|| adaboost_train(&samples, &features, 3).unwrap())
    });
    group.finish();
}

fn detection(c: &mut Criterion) {
    let face = cascade("haarcascade_frontalface_default.xml");
    let img = astronaut();
    let params = DetectParams {
        min_size: 40,
        min_neighbors: 3,
        ..Default::default()
    };
    let mut group = c.benchmark_group("detect");
    group.sample_size(20);
    group.bench_function("frontal_face_astronaut", |b| b.iter(|| detect_multiscale(&face, &img, &params).unwrap()));
    let frame = noise_image(6, FRAME.0, FRAME.1);
    group.bench_function("frontal_face_noise_384x286", |b| {
        b.iter(|| detect_multiscale(&face, &frame, &params).unwrap())
    });
    group.finish();
}

fn tracking(c: &mut Criterion) {
    let stream = eye_stream(10_000);
    c.bench_function("tracker_replay_10k", |b| {
        b.iter_batched(|| stream.clone(), |s| replay(TrackerConfig::default(), &s).unwrap(), BatchSize::LargeInput)
    });
}

criterion_group!(benches, imaging, boosting, detection, tracking);
criterion_main!(benches);
