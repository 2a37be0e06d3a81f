//! Unitary time stepping of `i·dψ/dt = H(t)·ψ` and parallel transport of
//! instantaneous eigensubspaces.
//!
//! Each step applies `exp(−i·H(t_k + h/2)·h)` built from the eigensystem of the
//! midpoint Hamiltonian. The step is exactly unitary, so the norm only drifts
//! at round-off level; the scheme is second order in `h`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{hermitian_eigensystem, max_abs, CMatrix, ComplexVector, HermitianOperator};
use crate::operators::{
    tripod_hamiltonian, two_particle_hamiltonian, TwoParticleModel, TwoParticleState,
};
use crate::pulses::PulseSequence;

/// Norm tolerance for initial states.
pub const NORM_TOL: f64 = 1e-9;

/// A time-dependent Hamiltonian.
pub trait HamiltonianSource {
    fn dim(&self) -> usize;
    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator>;
    /// Shortest time scale of the controls (e.g. the narrowest pulse width),
    /// if there is one. The step must be at most a twentieth of it.
    fn min_feature_width(&self) -> Option<f64> {
        None
    }
}

/// Adapts a closure `t ↦ H(t)` into a [`HamiltonianSource`].
pub struct FnHamiltonian<F> {
    dim: usize,
    min_width: Option<f64>,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64) -> Result<HermitianOperator>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self {
            dim,
            min_width: None,
            f,
        }
    }

    pub fn with_min_width(mut self, width: Option<f64>) -> Self {
        self.min_width = width;
        self
    }
}

impl<F> HamiltonianSource for FnHamiltonian<F>
where
    F: Fn(f64) -> Result<HermitianOperator>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator> {
        let h = (self.f)(t)?;
        if h.dim() != self.dim {
            return Err(Error::invalid(format!(
                "Hamiltonian at t = {t} has dimension {}, expected {}",
                h.dim(),
                self.dim
            )));
        }
        Ok(h)
    }

    fn min_feature_width(&self) -> Option<f64> {
        self.min_width
    }
}

/// Tripod Hamiltonian driven by a pulse sequence.
#[derive(Clone, Debug)]
pub struct PulsedTripod {
    pub pulses: PulseSequence,
}

impl HamiltonianSource for PulsedTripod {
    fn dim(&self) -> usize {
        4
    }

    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator> {
        tripod_hamiltonian(self.pulses.omega_at(t)?)
    }

    fn min_feature_width(&self) -> Option<f64> {
        self.pulses.min_width()
    }
}

/// Six-state two-particle Hamiltonian driven by a pulse sequence.
///
/// Without a model the ξ-detuned states |bb⟩, |db⟩ are decoupled, which is
/// the ξ → ∞ limit: the four remaining states form an exact tripod.
#[derive(Clone, Debug)]
pub struct PulsedTwoParticle {
    pub pulses: PulseSequence,
    pub model: Option<TwoParticleModel>,
}

impl PulsedTwoParticle {
    pub fn new(model: TwoParticleModel, pulses: PulseSequence) -> Self {
        Self {
            pulses,
            model: Some(model),
        }
    }

    pub fn ideal(pulses: PulseSequence) -> Self {
        Self {
            pulses,
            model: None,
        }
    }
}

impl HamiltonianSource for PulsedTwoParticle {
    fn dim(&self) -> usize {
        6
    }

    fn hamiltonian(&self, t: f64) -> Result<HermitianOperator> {
        let omega = self.pulses.omega_at(t)?;
        match &self.model {
            Some(model) => two_particle_hamiltonian(model, omega),
            None => {
                let model = TwoParticleModel::new(1.0, 0.0)?;
                let mut m = two_particle_hamiltonian(&model, omega)?.matrix().clone();
                for s in [TwoParticleState::Bb, TwoParticleState::Db] {
                    m.row_mut(s.index()).fill(Complex64::new(0.0, 0.0));
                    m.column_mut(s.index()).fill(Complex64::new(0.0, 0.0));
                }
                HermitianOperator::new(m)
            }
        }
    }

    fn min_feature_width(&self) -> Option<f64> {
        self.pulses.min_width()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationConfig {
    /// Nominal time step; the actual step divides the window evenly.
    pub step: f64,
    /// Record every `record_stride`-th step (the last step is always kept).
    pub record_stride: usize,
    /// Also integrate at half the step and report the final-state change.
    pub convergence_check: bool,
}

impl PropagationConfig {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            record_stride: 1,
            convergence_check: false,
        }
    }

    /// Default step for pulses of width `width`: `width/40`.
    pub fn for_pulse_width(width: f64) -> Self {
        Self::new(width / 40.0)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_convergence_check(mut self, on: bool) -> Self {
        self.convergence_check = on;
        self
    }

    fn validate(&self, source: &dyn HamiltonianSource) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Configuration(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Configuration(
                "record stride must be at least 1".into(),
            ));
        }
        if let Some(w) = source.min_feature_width() {
            if self.step > w / 20.0 * (1.0 + 1e-12) {
                return Err(Error::Configuration(format!(
                    "step {} exceeds 1/20 of the narrowest pulse width {w}",
                    self.step
                )));
            }
        }
        Ok(())
    }

    fn grid(&self, window: (f64, f64)) -> Result<(usize, f64)> {
        let (t0, t1) = window;
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::invalid(format!("empty time window [{t0}, {t1}]")));
        }
        let n = ((t1 - t0) / self.step - 1e-9).ceil().max(1.0) as usize;
        Ok((n, (t1 - t0) / n as f64))
    }
}

/// Recorded evolution. All sequences have one entry per recorded sample; the
/// phase accumulators are integrated every step regardless of the stride.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexVector>,
    /// `⟨ψ(t)|H(t)|ψ(t)⟩` at each sample.
    pub energy_expectations: Vec<f64>,
    /// Running `∫⟨ψ|H|ψ⟩dt`.
    pub accumulated_dynamical_phase: Vec<f64>,
    /// Running `Σ −arg⟨ψ(t_k)|ψ(t_{k+1})⟩`, used to pick the 2π branch of
    /// the total phase.
    pub accumulated_transport_phase: Vec<f64>,
    /// Step actually used.
    pub step: f64,
    /// Largest final-amplitude change when the step is halved, if requested.
    pub step_halving_delta: Option<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_state(&self) -> &ComplexVector {
        &self.states[0]
    }

    pub fn final_state(&self) -> &ComplexVector {
        self.states
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn final_dynamical_phase(&self) -> f64 {
        *self.accumulated_dynamical_phase.last().unwrap()
    }

    pub fn final_transport_phase(&self) -> f64 {
        *self.accumulated_transport_phase.last().unwrap()
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Recorded sample closest to `t`.
    pub fn sample_near(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &tk) in self.times.iter().enumerate() {
            if (tk - t).abs() < (self.times[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

/// Integrates from `psi0` over `window` with the midpoint-exponential rule.
pub fn propagate(
    source: &dyn HamiltonianSource,
    psi0: &ComplexVector,
    window: (f64, f64),
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    cfg.validate(source)?;
    if psi0.dim() != source.dim() {
        return Err(Error::invalid(format!(
            "initial state has dimension {}, Hamiltonian has {}",
            psi0.dim(),
            source.dim()
        )));
    }
    if !psi0.is_normalized(NORM_TOL) {
        return Err(Error::invalid(format!(
            "initial state norm {} is not 1",
            psi0.norm()
        )));
    }
    let mut traj = integrate(source, psi0, window, cfg)?;
    if cfg.convergence_check {
        let fine = PropagationConfig {
            step: traj.step / 2.0,
            record_stride: usize::MAX,
            convergence_check: false,
        };
        let refined = integrate(source, psi0, window, &fine)?;
        traj.step_halving_delta = Some(traj.final_state().max_abs_diff(refined.final_state())?);
    }
    Ok(traj)
}

fn integrate(
    source: &dyn HamiltonianSource,
    psi0: &ComplexVector,
    window: (f64, f64),
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    let (n, h) = cfg.grid(window)?;
    let t0 = window.0;
    let capacity = n / cfg.record_stride.min(n) + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        energy_expectations: Vec::with_capacity(capacity),
        accumulated_dynamical_phase: Vec::with_capacity(capacity),
        accumulated_transport_phase: Vec::with_capacity(capacity),
        step: h,
        step_halving_delta: None,
    };

    let mut psi = psi0.as_dvector().clone();
    let mut dynamical = 0.0;
    let mut transport = 0.0;
    let record = |traj: &mut Trajectory,
                  t: f64,
                  psi: &nalgebra::DVector<Complex64>,
                  d: f64,
                  g: f64|
     -> Result<()> {
        let state = ComplexVector::from_dvector(psi.clone());
        traj.energy_expectations
            .push(source.hamiltonian(t)?.expectation(&state)?);
        traj.times.push(t);
        traj.states.push(state);
        traj.accumulated_dynamical_phase.push(d);
        traj.accumulated_transport_phase.push(g);
        Ok(())
    };
    record(&mut traj, t0, &psi, 0.0, 0.0)?;

    for k in 0..n {
        let t_mid = t0 + (k as f64 + 0.5) * h;
        let eig = hermitian_eigensystem(&source.hamiltonian(t_mid)?)?;
        let v = eig.vectors.matrix();
        let mut coeffs = v.ad_mul(&psi);
        let mut energy = 0.0;
        let mut survival = Complex64::new(0.0, 0.0);
        for (c, &lambda) in coeffs.iter_mut().zip(&eig.values) {
            let p = c.norm_sqr();
            let phase = Complex64::from_polar(1.0, -lambda * h);
            energy += lambda * p;
            survival += phase * p;
            *c *= phase;
        }
        // the propagator commutes with H(t_mid), so this is the midpoint value
        dynamical += energy * h;
        transport -= survival.arg();
        psi = v * coeffs;

        if (k + 1) % cfg.record_stride == 0 || k + 1 == n {
            let t = if k + 1 == n {
                window.1
            } else {
                t0 + (k + 1) as f64 * h
            };
            record(&mut traj, t, &psi, dynamical, transport)?;
        }
    }
    Ok(traj)
}

/// Parallel-transported orthonormal frames of an eigensubspace.
#[derive(Clone, Debug)]
pub struct TrackedSubspace {
    pub energy: f64,
    pub times: Vec<f64>,
    /// `dim × d` matrices whose columns span the subspace at each sample.
    pub bases: Vec<CMatrix>,
}

impl TrackedSubspace {
    pub fn subspace_dim(&self) -> usize {
        self.bases[0].ncols()
    }

    pub fn initial_basis(&self) -> &CMatrix {
        &self.bases[0]
    }

    pub fn final_basis(&self) -> &CMatrix {
        self.bases.last().unwrap()
    }

    /// Largest `max|B_k†B_{k+1} − I|` over successive recorded samples.
    pub fn continuity_defect(&self) -> f64 {
        let d = self.subspace_dim();
        self.bases
            .windows(2)
            .map(|w| max_abs(&(w[0].ad_mul(&w[1]) - CMatrix::identity(d, d))))
            .fold(0.0, f64::max)
    }
}

/// Follows the eigensubspace at `energy` along the window, fixing the gauge
/// at each sample by the unitary closest to the projected previous frame.
pub fn adiabatic_eigenstate_track(
    source: &dyn HamiltonianSource,
    energy: f64,
    window: (f64, f64),
    cfg: &PropagationConfig,
) -> Result<TrackedSubspace> {
    cfg.validate(source)?;
    let (n, h) = cfg.grid(window)?;
    let t0 = window.0;

    let subspace_at = |t: f64| -> Result<CMatrix> {
        let eig = hermitian_eigensystem(&source.hamiltonian(t)?)?;
        let scale = eig.values.iter().fold(1.0f64, |a, l| a.max(l.abs()));
        let idx = eig.indices_near(energy, 1e-8 * scale);
        let v = eig.vectors.matrix();
        Ok(CMatrix::from_fn(v.nrows(), idx.len(), |r, c| {
            v[(r, idx[c])]
        }))
    };

    let first = subspace_at(t0)?;
    let d = first.ncols();
    if d == 0 {
        return Err(Error::invalid(format!(
            "no eigenvalue at energy {energy} at t = {t0}"
        )));
    }
    let mut out = TrackedSubspace {
        energy,
        times: vec![t0],
        bases: vec![first.clone()],
    };
    let mut frame = first;
    for k in 1..=n {
        let t = if k == n { window.1 } else { t0 + k as f64 * h };
        let sub = subspace_at(t)?;
        if sub.ncols() != d {
            return Err(Error::DegeneracyCrossing {
                t,
                expected: d,
                found: sub.ncols(),
            });
        }
        let projected = sub.ad_mul(&frame);
        frame = &sub
            * closest_unitary(&projected).ok_or(Error::DegeneracyCrossing {
                t,
                expected: d,
                found: 0,
            })?;
        if k % cfg.record_stride == 0 || k == n {
            out.times.push(t);
            out.bases.push(frame.clone());
        }
    }
    Ok(out)
}

/// Unitary factor of the polar decomposition `M = U·(M†M)^{1/2}`; `None` when
/// `M` is (numerically) singular.
fn closest_unitary(m: &CMatrix) -> Option<CMatrix> {
    let gram = HermitianOperator::new({
        let g = m.ad_mul(m);
        (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
    })
    .ok()?;
    let eig = hermitian_eigensystem(&gram).ok()?;
    if eig.values[0] < 1e-12 {
        return None;
    }
    let v = eig.vectors.matrix();
    let mut scaled = v.clone();
    for (k, &s) in eig.values.iter().enumerate() {
        scaled.column_mut(k).iter_mut().for_each(|z| *z /= s.sqrt());
    }
    Some(m * (scaled * v.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::expm_i;
    use crate::operators::{spin_hamiltonian, spin_representation, tripod_hamiltonian};
    use crate::pulses::half_cycle;
    use std::f64::consts::PI;

    fn constant(h: HermitianOperator) -> FnHamiltonian<impl Fn(f64) -> Result<HermitianOperator>> {
        let dim = h.dim();
        FnHamiltonian::new(dim, move |_| Ok(h.clone()))
    }

    #[test]
    fn zero_hamiltonian_leaves_state() {
        let src = constant(HermitianOperator::zeros(3));
        let psi = ComplexVector::basis(3, 1).unwrap();
        let traj = propagate(&src, &psi, (0.0, 5.0), &PropagationConfig::new(0.1)).unwrap();
        for s in &traj.states {
            assert!(s.max_abs_diff(&psi).unwrap() < 1e-15);
        }
        assert_eq!(traj.len(), 51);
    }

    #[test]
    fn constant_hamiltonian_matches_closed_form() {
        let h = tripod_hamiltonian([0.3, -0.7, 1.1]).unwrap();
        let src = constant(h.clone());
        let psi = ComplexVector::basis(4, 2).unwrap();
        let traj = propagate(&src, &psi, (1.0, 4.5), &PropagationConfig::new(0.05)).unwrap();
        let exact = expm_i(&h, 3.5).unwrap().apply(&psi).unwrap();
        assert!(traj.final_state().max_abs_diff(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn spin_half_dynamical_phase() {
        let rep = spin_representation(0.5).unwrap();
        let src = constant(spin_hamiltonian(&rep, [0.0, 0.0, 1.0]).unwrap());
        let up = ComplexVector::basis(2, 0).unwrap();
        let traj = propagate(&src, &up, (0.0, PI), &PropagationConfig::new(0.01)).unwrap();
        let expected = up.scaled(Complex64::from_polar(1.0, -PI / 2.0));
        assert!(traj.final_state().max_abs_diff(&expected).unwrap() < 1e-12);
        assert!((traj.final_dynamical_phase() - PI / 2.0).abs() < 1e-12);
        assert!((traj.final_transport_phase() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn stride_keeps_last_sample_and_accumulators() {
        let rep = spin_representation(1.0).unwrap();
        let src = constant(spin_hamiltonian(&rep, [0.0, 0.0, 1.0]).unwrap());
        let psi = ComplexVector::basis(3, 0).unwrap();
        let traj = propagate(
            &src,
            &psi,
            (0.0, 10.0),
            &PropagationConfig::new(0.1).with_stride(7),
        )
        .unwrap();
        assert_eq!(*traj.times.last().unwrap(), 10.0);
        assert!((traj.final_dynamical_phase() - 10.0).abs() < 1e-12);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bad_inputs() {
        let src = constant(HermitianOperator::zeros(2));
        let psi = ComplexVector::basis(2, 0).unwrap();
        let unnormalized = psi.scaled(Complex64::new(1.1, 0.0));
        assert!(matches!(
            propagate(
                &src,
                &unnormalized,
                (0.0, 1.0),
                &PropagationConfig::new(0.1)
            ),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            propagate(&src, &psi, (0.0, 1.0), &PropagationConfig::new(-0.1)),
            Err(Error::Configuration(_))
        ));
        let pulsed =
            FnHamiltonian::new(2, |_| Ok(HermitianOperator::zeros(2))).with_min_width(Some(1.0));
        assert!(matches!(
            propagate(&pulsed, &psi, (0.0, 1.0), &PropagationConfig::new(0.1)),
            Err(Error::Configuration(_))
        ));
        assert!(propagate(
            &src,
            &ComplexVector::basis(3, 0).unwrap(),
            (0.0, 1.0),
            &PropagationConfig::new(0.1)
        )
        .is_err());
    }

    #[test]
    fn tracking_constant_hamiltonian_is_static() {
        let src = constant(tripod_hamiltonian([0.0, 0.0, 1.0]).unwrap());
        let tracked =
            adiabatic_eigenstate_track(&src, 0.0, (0.0, 10.0), &PropagationConfig::new(0.5))
                .unwrap();
        assert_eq!(tracked.subspace_dim(), 2);
        let diff = tracked.final_basis() - tracked.initial_basis();
        assert!(max_abs(&diff) < 1e-14);
    }

    #[test]
    fn tripod_dark_subspace_stays_two_dimensional() {
        let seq = half_cycle(1.0, 20.0, [50.0, 100.0, 140.0, 190.0]).unwrap();
        let src = FnHamiltonian::new(4, |t| tripod_hamiltonian(seq.omega_at(t)?))
            .with_min_width(seq.min_width());
        let tracked =
            adiabatic_eigenstate_track(&src, 0.0, seq.window(), &PropagationConfig::new(0.5))
                .unwrap();
        assert_eq!(tracked.subspace_dim(), 2);
        assert!(tracked.continuity_defect() < 1e-3);
    }

    #[test]
    fn crossing_is_reported() {
        // eigenvalue 0 is doubly degenerate at t < 0.5 and simple afterwards
        let src = FnHamiltonian::new(2, |t| {
            let d = if t < 0.5 { 0.0 } else { 1.0 };
            HermitianOperator::from_real_symmetric(2, &[0.0, 0.0, 0.0, d])
        });
        let err = adiabatic_eigenstate_track(&src, 0.0, (0.0, 1.0), &PropagationConfig::new(0.1))
            .unwrap_err();
        assert!(matches!(
            err,
            Error::DegeneracyCrossing {
                expected: 2,
                found: 1,
                ..
            }
        ));
    }
}
