use geophase::{
    half_cycle, numkernel::max_abs, rotation_composition_check, spin_representation,
    tripod_generators, tripod_hamiltonian, two_particle_hamiltonian, CMatrix, Complex64,
    ComplexVector, HamiltonianSource, Level, PulsedTwoParticle, TwoParticleModel, TwoParticleState,
};
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn lorentz_algebra_of_printed_generators() {
    let g = tripod_generators();
    assert!(g.algebra_residual() <= 1e-12);
    assert!(g.cross_commutator_residual() <= 1e-12);
    // Independently: the sum and difference triples are each su(2)-closed too.
    assert!(g.sum().algebra_residual() <= 1e-12);
}

#[test]
fn each_copy_is_spin_half() {
    // Four states carry the (1/2, 1/2) representation: each copy is spin 1/2
    // with the other as a two-fold multiplicity, so J² = 3/4 on everything.
    let g = tripod_generators();
    for triple in [&g.first, &g.second] {
        let cas = triple.casimir();
        assert!(max_abs(&(cas - CMatrix::identity(4, 4) * c(0.75))) < 1e-12);
    }
}

#[test]
fn composition_identity_all_representations() {
    for j in [0.5, 1.0, 1.5, 2.0] {
        let rep = spin_representation(j).unwrap();
        let dev = rotation_composition_check(&rep.generators).unwrap();
        assert!(dev <= 1e-12, "J = {j}: {dev:e}");
    }
    let dev = rotation_composition_check(&tripod_generators().sum()).unwrap();
    assert!(dev <= 1e-12);
}

#[test]
fn spin_matrices_against_closed_forms() {
    let half = spin_representation(0.5).unwrap();
    assert_eq!(half.generators.x.get(0, 1), c(0.5));
    let one = spin_representation(1.0).unwrap();
    let r = 1.0 / 2f64.sqrt();
    assert!((one.generators.x.get(0, 1).re - r).abs() < 1e-15);
    assert!((one.generators.y.get(1, 0).im - r).abs() < 1e-15);
    let three_half = spin_representation(1.5).unwrap();
    let cas = three_half.generators.casimir();
    assert!(max_abs(&(cas - CMatrix::identity(4, 4) * c(3.75))) < 1e-12);
    assert!(spin_representation(0.3).is_err());
    assert!(spin_representation(-1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn tripod_equals_generator_difference(
        wx in -5.0f64..5.0, wy in -5.0f64..5.0, wz in -5.0f64..5.0
    ) {
        let h = tripod_hamiltonian([wx, wy, wz]).unwrap();
        let d = tripod_generators().difference().dot([wx, wy, wz]);
        prop_assert!(max_abs(&(h.matrix() - d.matrix())) <= 1e-14);
    }

    #[test]
    fn six_state_model_restricts_to_tripod(
        wx in 0.0f64..3.0, wy in 0.0f64..3.0, wz in 0.0f64..3.0, xi in 0.5f64..100.0
    ) {
        let model = TwoParticleModel::new(xi, 0.0).unwrap();
        let full = two_particle_hamiltonian(&model, [wx, wy, wz]).unwrap();
        let tri = tripod_hamiltonian([wx, wy, wz]).unwrap();
        // tripod index ← six-state index
        let map = [
            (0, TwoParticleState::Aa),
            (1, TwoParticleState::Ba),
            (2, TwoParticleState::Da),
            (3, TwoParticleState::Ab),
        ];
        for &(i, si) in &map {
            for &(j, sj) in &map {
                prop_assert_eq!(tri.get(i, j), full.get(si.index(), sj.index()));
            }
        }
    }
}

/// Interaction terms of the two-particle coupling: (axis, particle, the level
/// coupled to |a⟩ on that particle).
const TERMS: [(usize, usize, Level); 3] = [(0, 0, Level::B), (1, 0, Level::D), (2, 1, Level::B)];

fn coupled(p: (Level, Level)) -> Vec<(usize, (Level, Level))> {
    let mut out = Vec::new();
    for (axis, particle, other) in TERMS {
        let lv = if particle == 0 { p.0 } else { p.1 };
        let flipped = match lv {
            Level::A => other,
            l if l == other => Level::A,
            _ => continue,
        };
        let q = if particle == 0 {
            (flipped, p.1)
        } else {
            (p.0, flipped)
        };
        out.push((axis, q));
    }
    out
}

#[test]
fn selection_rules_from_product_states() {
    // Closure of |ba⟩ under the interaction terms, over all 16 product states.
    let start = (Level::B, Level::A);
    let mut reach = vec![start];
    let mut k = 0;
    while k < reach.len() {
        for (_, q) in coupled(reach[k]) {
            if !reach.contains(&q) {
                reach.push(q);
            }
        }
        k += 1;
    }
    let mut expected: Vec<_> = TwoParticleState::BASIS.iter().map(|s| s.levels()).collect();
    expected.sort();
    reach.sort();
    assert_eq!(reach, expected);
    assert_eq!(Level::ALL.len() * Level::ALL.len(), 16);

    let (wx, wy, wz, xi) = (0.3, 0.7, 1.1, 5.0);
    let w = [wx, wy, wz];
    let h = two_particle_hamiltonian(&TwoParticleModel::new(xi, 0.0).unwrap(), w).unwrap();
    let mut oracle = CMatrix::zeros(6, 6);
    for s in TwoParticleState::BASIS {
        for (axis, q) in coupled(s.levels()) {
            let t = TwoParticleState::from_levels(q).expect("closed space");
            oracle[(t.index(), s.index())] += c(w[axis]);
        }
        // Detuning counts |a⟩ excitations relative to the singly excited
        // manifold, doubly excited |aa⟩ being shifted onto resonance.
        let na = [s.levels().0, s.levels().1]
            .iter()
            .filter(|&&l| l == Level::A)
            .count();
        if na == 0 {
            oracle[(s.index(), s.index())] = c(xi);
        }
    }
    assert!(max_abs(&(h.matrix() - oracle)) == 0.0);
}

#[test]
fn ideal_source_is_the_decoupled_limit() {
    let seq = half_cycle(1.0, 20.0, [50.0, 100.0, 140.0, 190.0]).unwrap();
    let ideal = PulsedTwoParticle::ideal(seq.clone());
    let big = PulsedTwoParticle::new(TwoParticleModel::new(1.0, 0.0).unwrap(), seq);
    for t in [0.0, 77.0, 120.0, 260.0] {
        let a = ideal.hamiltonian(t).unwrap();
        let b = big.hamiltonian(t).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(a.get(r, col), b.get(r, col));
            }
        }
        for r in 4..6 {
            for col in 0..6 {
                assert_eq!(a.get(r, col), c(0.0));
            }
        }
    }
    let v = ComplexVector::basis(6, 4).unwrap();
    assert_eq!(
        ideal.hamiltonian(120.0).unwrap().expectation(&v).unwrap(),
        0.0
    );
}
