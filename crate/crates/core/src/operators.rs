//! Angular-momentum generators and the model Hamiltonians.
//!
//! * [`spin_representation`]: the (2J+1)-dimensional irrep of su(2).
//! * [`tripod_generators`]: two commuting spin-½ triples on a four-level
//!   space whose difference `Ω·(J⁽¹⁾ − J⁽²⁾)` is the tripod coupling matrix.
//! * [`two_particle_hamiltonian`]: rotating-frame effective Hamiltonian of two
//!   dipole-dipole coupled particles, restricted to the six product states
//!   reachable from `|ba⟩`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{max_abs, CMatrix, HermitianOperator};

const SPIN_MAX: f64 = 8.0;

/// Three Hermitian operators (x, y, z) forming an angular-momentum triple.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorTriple {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub z: HermitianOperator,
}

impl GeneratorTriple {
    pub fn components(&self) -> [&HermitianOperator; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `ω_x·J_x + ω_y·J_y + ω_z·J_z`.
    pub fn dot(&self, omega: [f64; 3]) -> HermitianOperator {
        let m = self.x.matrix() * Complex64::new(omega[0], 0.0)
            + self.y.matrix() * Complex64::new(omega[1], 0.0)
            + self.z.matrix() * Complex64::new(omega[2], 0.0);
        HermitianOperator::new(m).expect("real combination of Hermitian operators")
    }

    /// Largest residual of `[J_i, J_j] = i ε_ijk J_k` over all ordered pairs.
    pub fn algebra_residual(&self) -> f64 {
        let c = self.components();
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let comm = c[i].commutator(c[j]);
                let rhs = match (i, j) {
                    _ if i == j => CMatrix::zeros(self.dim(), self.dim()),
                    _ => {
                        let k = 3 - i - j;
                        let sign = levi_civita(i, j, k);
                        c[k].matrix() * Complex64::new(0.0, sign)
                    }
                };
                worst = worst.max(max_abs(&(comm - rhs)));
            }
        }
        worst
    }

    /// `J_x² + J_y² + J_z²`.
    pub fn casimir(&self) -> CMatrix {
        self.components()
            .iter()
            .map(|j| j.matrix() * j.matrix())
            .fold(CMatrix::zeros(self.dim(), self.dim()), |acc, m| acc + m)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            x: self.x.add(&other.x)?,
            y: self.y.add(&other.y)?,
            z: self.z.add(&other.z)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            x: self.x.sub(&other.x)?,
            y: self.y.sub(&other.y)?,
            z: self.z.sub(&other.z)?,
        })
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinRepresentation {
    /// Total spin J (integer or half-integer).
    pub j: f64,
    pub generators: GeneratorTriple,
}

impl SpinRepresentation {
    pub fn dim(&self) -> usize {
        self.generators.dim()
    }

    /// Basis index of `|J, m_z = m⟩` (ordering m = J, J−1, …, −J).
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let k = self.j - m;
        if m.abs() > self.j + 1e-12 || (k - k.round()).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "m = {m} is not a projection of J = {}",
                self.j
            )));
        }
        Ok(k.round() as usize)
    }

    pub fn casimir_residual(&self) -> f64 {
        let n = self.dim();
        let target = CMatrix::identity(n, n) * Complex64::new(self.j * (self.j + 1.0), 0.0);
        max_abs(&(self.generators.casimir() - target))
    }
}

/// Spin-J matrices with `J_z = diag(J, J−1, …, −J)`.
pub fn spin_representation(j: f64) -> Result<SpinRepresentation> {
    let twice = 2.0 * j;
    if !j.is_finite() || j < 0.0 || (twice - twice.round()).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "J = {j} is not a non-negative half-integer"
        )));
    }
    if j > SPIN_MAX {
        return Err(Error::invalid(format!(
            "J = {j} exceeds the supported maximum {SPIN_MAX}"
        )));
    }
    let dim = twice.round() as usize + 1;
    let m = |k: usize| j - k as f64;
    let mut raise = CMatrix::zeros(dim, dim);
    for k in 1..dim {
        let mk = m(k);
        raise[(k - 1, k)] = Complex64::new((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower) * Complex64::new(0.5, 0.0);
    let jy = (&raise - &lower) * Complex64::new(0.0, -0.5);
    let jz = CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            Complex64::new(m(r), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(SpinRepresentation {
        j,
        generators: GeneratorTriple {
            x: HermitianOperator::new(jx)?,
            y: HermitianOperator::new(jy)?,
            z: HermitianOperator::new(jz)?,
        },
    })
}

/// `Ω·J` for a spin in a field with Larmor vector `omega`.
pub fn spin_hamiltonian(rep: &SpinRepresentation, omega: [f64; 3]) -> Result<HermitianOperator> {
    check_finite(omega)?;
    Ok(rep.generators.dot(omega))
}

fn check_finite(omega: [f64; 3]) -> Result<()> {
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid(format!("non-finite field {omega:?}")));
    }
    Ok(())
}

/// The two commuting spin-½ triples on the four-level tripod space.
#[derive(Clone, Debug, PartialEq)]
pub struct TripodGenerators {
    pub first: GeneratorTriple,
    pub second: GeneratorTriple,
}

impl TripodGenerators {
    /// `J⁽¹⁾ + J⁽²⁾`, the generator of the holonomy rotation.
    pub fn sum(&self) -> GeneratorTriple {
        self.first.add(&self.second).expect("equal dimensions")
    }

    /// `J⁽¹⁾ − J⁽²⁾`, the generator entering the Hamiltonian.
    pub fn difference(&self) -> GeneratorTriple {
        self.first.sub(&self.second).expect("equal dimensions")
    }

    /// Largest `‖[J⁽¹⁾_i, J⁽²⁾_j]‖_max` over all nine pairs.
    pub fn cross_commutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in self.first.components() {
            for b in self.second.components() {
                worst = worst.max(max_abs(&a.commutator(b)));
            }
        }
        worst
    }

    /// Worst residual over every commutation relation of su(2)⊕su(2).
    pub fn algebra_residual(&self) -> f64 {
        self.first
            .algebra_residual()
            .max(self.second.algebra_residual())
            .max(self.cross_commutator_residual())
    }
}

fn half_matrix(rows: [[Complex64; 4]; 4]) -> HermitianOperator {
    let flat: Vec<Complex64> = rows.iter().flatten().map(|z| z * 0.5).collect();
    HermitianOperator::from_rows(4, &flat).expect("tabulated generator is Hermitian")
}

/// The six tabulated 4×4 generators.
pub fn tripod_generators() -> TripodGenerators {
    let o = Complex64::new(0.0, 0.0);
    let p = Complex64::new(1.0, 0.0);
    let n = Complex64::new(-1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mi = Complex64::new(0.0, -1.0);

    let j1x = half_matrix([[o, p, o, o], [p, o, o, o], [o, o, o, mi], [o, o, i, o]]);
    let j2x = half_matrix([[o, n, o, o], [n, o, o, o], [o, o, o, mi], [o, o, i, o]]);
    let j1y = half_matrix([[o, o, p, o], [o, o, o, i], [p, o, o, o], [o, mi, o, o]]);
    let j2y = half_matrix([[o, o, n, o], [o, o, o, i], [n, o, o, o], [o, mi, o, o]]);
    let j1z = half_matrix([[o, o, o, p], [o, o, mi, o], [o, i, o, o], [p, o, o, o]]);
    let j2z = half_matrix([[o, o, o, n], [o, o, mi, o], [o, i, o, o], [n, o, o, o]]);

    let gens = TripodGenerators {
        first: GeneratorTriple {
            x: j1x,
            y: j1y,
            z: j1z,
        },
        second: GeneratorTriple {
            x: j2x,
            y: j2y,
            z: j2z,
        },
    };
    debug_assert!(gens.algebra_residual() <= 1e-12);
    gens
}

/// Tripod coupling: first row `(0, Ω_x, Ω_y, Ω_z)` and its transpose.
pub fn tripod_hamiltonian(omega: [f64; 3]) -> Result<HermitianOperator> {
    check_finite(omega)?;
    let mut m = CMatrix::zeros(4, 4);
    for (k, &w) in omega.iter().enumerate() {
        m[(0, k + 1)] = Complex64::new(w, 0.0);
        m[(k + 1, 0)] = Complex64::new(w, 0.0);
    }
    HermitianOperator::new(m)
}

/// Single-particle internal levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    A,
    B,
    C,
    D,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::A, Level::B, Level::C, Level::D];

    pub fn label(self) -> char {
        match self {
            Level::A => 'a',
            Level::B => 'b',
            Level::C => 'c',
            Level::D => 'd',
        }
    }
}

/// Basis states of the coupled two-particle space, in matrix order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwoParticleState {
    Ba,
    Da,
    Ab,
    Aa,
    Bb,
    Db,
}

impl TwoParticleState {
    pub const BASIS: [TwoParticleState; 6] = [
        TwoParticleState::Ba,
        TwoParticleState::Da,
        TwoParticleState::Ab,
        TwoParticleState::Aa,
        TwoParticleState::Bb,
        TwoParticleState::Db,
    ];

    pub fn index(self) -> usize {
        Self::BASIS.iter().position(|&s| s == self).unwrap()
    }

    /// (particle A level, particle B level).
    pub fn levels(self) -> (Level, Level) {
        use Level::*;
        match self {
            TwoParticleState::Ba => (B, A),
            TwoParticleState::Da => (D, A),
            TwoParticleState::Ab => (A, B),
            TwoParticleState::Aa => (A, A),
            TwoParticleState::Bb => (B, B),
            TwoParticleState::Db => (D, B),
        }
    }

    pub fn from_levels(levels: (Level, Level)) -> Option<Self> {
        Self::BASIS.iter().copied().find(|s| s.levels() == levels)
    }

    pub fn label(self) -> String {
        let (a, b) = self.levels();
        format!("{}{}", a.label(), b.label())
    }
}

/// Two particles with dipole-dipole shift `xi` on the doubly excited state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoParticleModel {
    /// Dipole-dipole shift ξ of `|aa⟩` (angular frequency).
    pub xi: f64,
    /// Single-particle splitting μ of `|a⟩`. Only enters the lab frame; the
    /// rotating-frame Hamiltonian does not depend on it.
    pub mu: f64,
}

impl TwoParticleModel {
    pub fn new(xi: f64, mu: f64) -> Result<Self> {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::invalid(format!(
                "dipole-dipole shift must be positive, got {xi}"
            )));
        }
        if !mu.is_finite() {
            return Err(Error::invalid("single-particle splitting must be finite"));
        }
        Ok(Self { xi, mu })
    }

    pub fn dim(&self) -> usize {
        TwoParticleState::BASIS.len()
    }
}

/// Rotating-frame Hamiltonian on `(|ba⟩, |da⟩, |ab⟩, |aa⟩, |bb⟩, |db⟩)`.
///
/// Fields are tuned to the dipole-shifted `|aa⟩` resonance, so the tripod
/// `{ba, da, ab} ↔ aa` is resonant while `|bb⟩`, `|db⟩` sit at detuning `+ξ`.
/// Ω_x drives a↔b on particle A, Ω_y drives a↔d on particle A and Ω_z drives
/// a↔b on particle B.
pub fn two_particle_hamiltonian(
    model: &TwoParticleModel,
    omega: [f64; 3],
) -> Result<HermitianOperator> {
    check_finite(omega)?;
    use TwoParticleState::*;
    let [wx, wy, wz] = omega;
    let couplings = [
        (Ba, Aa, wx),
        (Da, Aa, wy),
        (Ab, Aa, wz),
        (Ba, Bb, wz),
        (Ab, Bb, wx),
        (Ab, Db, wy),
        (Da, Db, wz),
    ];
    let mut m = CMatrix::zeros(6, 6);
    for (s, t, w) in couplings {
        m[(s.index(), t.index())] = Complex64::new(w, 0.0);
        m[(t.index(), s.index())] = Complex64::new(w, 0.0);
    }
    m[(Bb.index(), Bb.index())] = Complex64::new(model.xi, 0.0);
    m[(Db.index(), Db.index())] = Complex64::new(model.xi, 0.0);
    HermitianOperator::new(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalState {
    L00,
    L01,
    L10,
    L11,
}

impl LogicalState {
    pub const ALL: [LogicalState; 4] = [
        LogicalState::L00,
        LogicalState::L01,
        LogicalState::L10,
        LogicalState::L11,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LogicalState::L00 => "00",
            LogicalState::L01 => "01",
            LogicalState::L10 => "10",
            LogicalState::L11 => "11",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalBasisEntry {
    pub logical: LogicalState,
    /// (particle A level, particle B level).
    pub product: (Level, Level),
    /// Index in the six-state coupled space, if the state belongs to it.
    pub coupled_index: Option<usize>,
}

impl LogicalBasisEntry {
    /// Spectators are not part of the simulated coupled space and are taken
    /// to evolve trivially in the rotating frame. For 01 and 10 this drops
    /// their ξ-detuned couplings (|ca⟩↔|cb⟩ via Ω_z, |bc⟩↔|ac⟩ via Ω_x).
    pub fn is_spectator(&self) -> bool {
        self.coupled_index.is_none()
    }
}

/// Qubit A = {|c⟩, |b⟩}, qubit B = {|c⟩, |a⟩}.
pub fn logical_basis() -> [LogicalBasisEntry; 4] {
    use Level::*;
    let entry = |logical, product| LogicalBasisEntry {
        logical,
        product,
        coupled_index: TwoParticleState::from_levels(product).map(|s| s.index()),
    };
    [
        entry(LogicalState::L00, (C, C)),
        entry(LogicalState::L01, (C, A)),
        entry(LogicalState::L10, (B, C)),
        entry(LogicalState::L11, (B, A)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{hermitian_eigensystem, ComplexVector};

    #[test]
    fn spin_half_is_pauli_over_two() {
        let rep = spin_representation(0.5).unwrap();
        let g = &rep.generators;
        assert_eq!(g.z.get(0, 0).re, 0.5);
        assert_eq!(g.z.get(1, 1).re, -0.5);
        assert!((g.x.get(0, 1).re - 0.5).abs() < 1e-15);
        assert!((g.y.get(0, 1) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn spin_one_ladder_entries() {
        let rep = spin_representation(1.0).unwrap();
        let g = &rep.generators;
        for (k, m) in [1.0, 0.0, -1.0].iter().enumerate() {
            assert_eq!(g.z.get(k, k).re, *m);
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((g.x.get(0, 1).re - s).abs() < 1e-15);
        assert!((g.x.get(1, 2).re - s).abs() < 1e-15);
    }

    #[test]
    fn spin_three_halves_casimir() {
        let rep = spin_representation(1.5).unwrap();
        assert!(rep.casimir_residual() < 1e-12);
        assert!((rep.generators.casimir()[(0, 0)].re - 15.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_spins_rejected() {
        assert!(spin_representation(0.3).is_err());
        assert!(spin_representation(-1.0).is_err());
        assert!(spin_representation(8.5).is_err());
        assert!(spin_representation(8.0).is_ok());
    }

    #[test]
    fn spin_hamiltonian_examples() {
        let rep = spin_representation(1.0).unwrap();
        let h = spin_hamiltonian(&rep, [0.0, 0.0, 2.0]).unwrap();
        let eig = hermitian_eigensystem(&h).unwrap();
        for (l, e) in eig.values.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((l - e).abs() < 1e-13);
        }
        assert_eq!(spin_hamiltonian(&rep, [0.0; 3]).unwrap().max_abs(), 0.0);

        let half = spin_representation(0.5).unwrap();
        let h = spin_hamiltonian(&half, [1.0, 1.0, 1.0]).unwrap();
        let eig = hermitian_eigensystem(&h).unwrap();
        let r = 3f64.sqrt() / 2.0;
        assert!((eig.values[0] + r).abs() < 1e-13 && (eig.values[1] - r).abs() < 1e-13);
        assert!(spin_hamiltonian(&half, [f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn tripod_generator_difference_x() {
        let g = tripod_generators();
        let d = g.difference();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if (r, c) == (0, 1) || (r, c) == (1, 0) {
                    1.0
                } else {
                    0.0
                };
                assert!((d.x.get(r, c) - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn tripod_generator_algebra() {
        let g = tripod_generators();
        assert!(max_abs(&g.first.x.commutator(&g.second.y)) < 1e-15);
        let lhs = g.first.x.commutator(&g.first.y);
        let rhs = g.first.z.matrix() * Complex64::new(0.0, 1.0);
        assert!(max_abs(&(lhs - rhs)) < 1e-15);
        assert!(g.algebra_residual() <= 1e-12);
    }

    #[test]
    fn tripod_hamiltonian_structure() {
        assert_eq!(tripod_hamiltonian([0.0; 3]).unwrap().max_abs(), 0.0);
        let h = tripod_hamiltonian([1.0, 0.0, 0.0]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if (r, c) == (0, 1) || (r, c) == (1, 0) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(h.get(r, c).re, expect);
            }
        }
    }

    #[test]
    fn zero_dynamical_phase_condition_and_dark_superpositions() {
        let g = tripod_generators();
        let dz = g.difference().z;
        for k in [1, 2] {
            let v = ComplexVector::basis(4, k).unwrap();
            assert!(dz.apply(&v).unwrap().norm() < 1e-15);
        }
        let sz = g.sum().z;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // (|3⟩ ± i|2⟩)/√2 in 1-based level labels; index 1 is |2⟩, index 2 is |3⟩
        for (sign, eigenvalue) in [(1.0, -1.0), (-1.0, 1.0)] {
            let v = ComplexVector::new(vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, sign * s),
                Complex64::new(s, 0.0),
                Complex64::new(0.0, 0.0),
            ])
            .unwrap();
            let sv = sz.apply(&v).unwrap();
            assert!(
                sv.max_abs_diff(&v.scaled(Complex64::new(eigenvalue, 0.0)))
                    .unwrap()
                    < 1e-12
            );
        }
    }

    #[test]
    fn two_particle_uncoupled_is_diagonal() {
        let model = TwoParticleModel::new(4.0, 100.0).unwrap();
        let h = two_particle_hamiltonian(&model, [0.0; 3]).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expect = if r == c && r >= 4 { 4.0 } else { 0.0 };
                assert_eq!(h.get(r, c).re, expect);
            }
        }
    }

    #[test]
    fn two_particle_model_validation() {
        assert!(TwoParticleModel::new(0.0, 0.0).is_err());
        assert!(TwoParticleModel::new(-1.0, 0.0).is_err());
        assert!(TwoParticleModel::new(f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn logical_basis_mapping() {
        let basis = logical_basis();
        assert_eq!(basis[3].coupled_index, Some(0));
        assert_eq!(basis[3].product, (Level::B, Level::A));
        assert_eq!(basis[0].product, (Level::C, Level::C));
        assert!(basis[0].is_spectator() && basis[1].is_spectator() && basis[2].is_spectator());
        assert!(!basis[3].is_spectator());
    }
}
