use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polarnav_autodiff::{conv, Graph, Tensor};
use polarnav_core::costmap::{ObsImage, ObservationConfig};
use polarnav_core::gridworld::EnvConfig;
use polarnav_core::par::Execution;
use polarnav_core::ActionBounds;
use polarnav_harness::scenarios::held_out_worlds;
use polarnav_harness::{run_benchmark, HarnessConfig, PlannerKind};
use polarnav_sac::{evaluate, ReplayBuffer, SacAgent, SacConfig, Transition};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor<f32> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn conv_forward_backward(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = random(&[32, 3, 40, 40], &mut rng);
    let w = random(&[16, 3, 3, 3], &mut rng);
    let b = random(&[16], &mut rng);
    let mut group = c.benchmark_group("conv2d_batch32");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            conv::set_parallel(mode == Execution::Parallel);
            bench.iter(|| {
                let mut g = Graph::new();
                let (xv, wv, bv) = (g.input(x.clone()), g.input_with_grad(w.clone()), g.input_with_grad(b.clone()));
                let y = g.conv2d(xv, wv, bv, 2).unwrap();
                let s = g.sum(y);
                black_box(g.backward(s).unwrap());
            });
        });
    }
    conv::set_parallel(true);
    group.finish();
}

fn sac_update(c: &mut Criterion) {
    let obs = ObservationConfig::desk();
    let config = SacConfig::desk();
    let shape = obs.shape();
    let mut agent = SacAgent::<f32>::new(config.clone(), shape, ActionBounds::default(), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut buffer = ReplayBuffer::new(1000, shape);
    let image = |rng: &mut ChaCha8Rng| {
        let mut img = ObsImage::zeros(shape.0, shape.1, shape.2);
        img.data.iter_mut().for_each(|v| *v = rng.random_range(0.0..1.0));
        img
    };
    for _ in 0..200 {
        let t = Transition {
            obs: image(&mut rng),
            action: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            reward: rng.random_range(-1.0..1.0),
            next_obs: image(&mut rng),
            done: false,
        };
        buffer.push(&t);
    }
    let mut group = c.benchmark_group("sac_update");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            conv::set_parallel(mode == Execution::Parallel);
            bench.iter(|| {
                let batch = buffer.sample(config.batch_size, &mut rng);
                black_box(agent.update(&batch, &mut rng).unwrap());
            });
        });
    }
    conv::set_parallel(true);
    group.finish();
}

fn held_out_evaluation(c: &mut Criterion) {
    let obs = ObservationConfig::desk();
    let agent = SacAgent::<f32>::new(SacConfig::desk(), obs.shape(), ActionBounds::default(), 0).unwrap();
    let worlds = held_out_worlds(8);
    let env = EnvConfig::default();
    let mut group = c.benchmark_group("evaluate_8_episodes");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| black_box(evaluate(&agent, &obs, &env, &worlds, mode).unwrap()));
        });
    }
    group.finish();
}

fn classical_benchmark(c: &mut Criterion) {
    let mut config = HarnessConfig::default();
    config.benchmark.planners = vec![PlannerKind::Dwa, PlannerKind::Sp];
    config.benchmark.runs_per_cell = 1;
    let mut group = c.benchmark_group("benchmark_classical");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |bench| {
            bench.iter(|| black_box(run_benchmark(&config, None, mode).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, conv_forward_backward, sac_update, held_out_evaluation, classical_benchmark);
criterion_main!(benches);
