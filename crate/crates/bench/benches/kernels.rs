use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use qcmc_core::chirotope::{self, PartialChirotope, RealizationRequest};
use qcmc_core::distgeo::{self, CenteringSchedule};
use qcmc_core::jumpproc::{Process, ProcessConfig, ProcessKind};
use qcmc_core::lp::{self, Direction, Sense, SimplexProblem};
use qcmc_core::{bridge, molecules, SimRng};

fn bridges(c: &mut Criterion) {
    let mut rng = SimRng::new(1);
    c.bench_function("levy bridge K=32 d=3", |b| b.iter(|| bridge::levy_bridge(black_box(32), 3, &mut rng).unwrap()));
}

fn jumps(c: &mut Criterion) {
    for kind in [ProcessKind::N, ProcessKind::W] {
        let mut p = Process::new(ProcessConfig::new(kind, 32, 2, 2.0 / 3.0), 7).unwrap();
        c.bench_function(&format!("{kind:?} process, 1000 jumps, K=32"), |b| b.iter(|| p.run(1000)));
    }
}

fn centering(c: &mut Criterion) {
    let doc = molecules::tetrahedron();
    let start = doc.conformation.clone().unwrap();
    let schedule = CenteringSchedule { max_steps: 10_000, ..CenteringSchedule::default() };
    c.bench_function("centering K4 to convergence", |b| {
        b.iter_batched(
            || (start.clone(), SimRng::new(3)),
            |(mut conf, mut rng)| distgeo::iterative_centering(&doc.graph, &mut conf, &schedule, &mut rng),
            BatchSize::SmallInput,
        )
    });
}

fn simplex(c: &mut Criterion) {
    let mut rng = SimRng::new(11);
    let (m, n) = (20, 15);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.next_uniform()).collect()).collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.next_uniform()).collect();
    let problem = SimplexProblem::new(Sense::Max, Direction::LessEq, objective, &rows, vec![1.0; m]).unwrap();
    c.bench_function("simplex 20x15 dense", |b| b.iter(|| lp::solve(black_box(&problem)).unwrap()));
}

fn realization(c: &mut Criterion) {
    let doc = molecules::threonine_chain(5, 0.3).unwrap();
    let chi = PartialChirotope::from_records(4, &doc.chirality).unwrap();
    let request = RealizationRequest::from_chirotope(doc.graph.vertex_count(), &chi).unwrap();
    c.bench_function("LP realization Thr5", |b| b.iter(|| chirotope::realize_lp(black_box(&request)).unwrap()));
}

criterion_group!(benches, bridges, jumps, centering, simplex, realization);
criterion_main!(benches);
