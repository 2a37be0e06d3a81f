use criterion::{black_box, criterion_group, criterion_main, Criterion};

use geophase::{
    expm_i, full_cycle_from, half_cycle, hermitian_eigensystem, propagate,
    two_particle_hamiltonian, wilczek_zee_holonomy, ComplexVector, PropagationConfig, PulsedTripod,
    PulsedTwoParticle, TwoParticleModel, TwoParticleState,
};

fn six_state() -> geophase::HermitianOperator {
    let model = TwoParticleModel::new(16.0, 0.0).unwrap();
    two_particle_hamiltonian(&model, [0.7, 0.3, 0.5]).unwrap()
}

fn kernels(c: &mut Criterion) {
    let h = six_state();
    c.bench_function("eigensystem 6x6", |b| {
        b.iter(|| hermitian_eigensystem(black_box(&h)).unwrap())
    });
    c.bench_function("expm_i 6x6", |b| {
        b.iter(|| expm_i(black_box(&h), black_box(0.5)).unwrap())
    });
}

fn runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("propagation");
    g.sample_size(10);

    let seq = half_cycle(1.0, 20.0, [50.0, 100.0, 140.0, 190.0]).unwrap();
    let src = PulsedTwoParticle::new(TwoParticleModel::new(4.0, 0.0).unwrap(), seq.clone());
    let psi0 = ComplexVector::basis(6, TwoParticleState::Ba.index()).unwrap();
    let cfg = PropagationConfig::new(0.5);
    g.bench_function("half gate, h = T/40", |b| {
        b.iter(|| propagate(&src, &psi0, seq.window(), &cfg).unwrap())
    });

    let double = full_cycle_from(5e-4, 8e4, 2e5, 2.2e5).unwrap();
    let src = PulsedTwoParticle::new(TwoParticleModel::new(16.0, 0.0).unwrap(), double.clone());
    let cfg = PropagationConfig::new(2e3);
    g.bench_function("full gate, h = T/40", |b| {
        b.iter(|| propagate(&src, &psi0, double.window(), &cfg).unwrap())
    });

    let tripod = PulsedTripod {
        pulses: seq.clone(),
    };
    let cfg = PropagationConfig::new(0.25);
    g.bench_function("tripod holonomy", |b| {
        b.iter(|| wilczek_zee_holonomy(&tripod, 0.0, seq.window(), &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, kernels, runs);
criterion_main!(benches);
