//! Phase bookkeeping for (quasi-)cyclic evolutions.
//!
//! Sign convention: a state that returns as `e^{−iγ}|ψ₀⟩` is reported with
//! phase `+γ`, both for the total and for its dynamical and geometric parts.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkernel::{
    expm_i, max_abs, normal_eigen, overlap, CMatrix, ComplexVector, UnitaryOperator,
};
use crate::operators::{spin_hamiltonian, spin_representation, GeneratorTriple};
use crate::propagate::{
    adiabatic_eigenstate_track, propagate, FnHamiltonian, HamiltonianSource, PropagationConfig,
    Trajectory,
};
use crate::pulses::FieldPath;
use crate::wrap_angle;

/// Evolutions whose survival probability amplitude falls below `1 − 0.01`
/// are flagged as non-cyclic.
pub const CYCLICITY_LIMIT: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseDecomposition {
    pub total: f64,
    pub dynamical: f64,
    /// `total − dynamical`.
    pub geometric: f64,
    /// `1 − |⟨ψ₀|ψ(t_end)⟩|`.
    pub cyclicity_defect: f64,
    pub survival_amplitude: Complex64,
}

impl PhaseDecomposition {
    pub fn is_cyclic(&self) -> bool {
        self.cyclicity_defect <= CYCLICITY_LIMIT
    }
}

/// `angle + 2πk` for the integer `k` that lands closest to `reference`.
pub fn nearest_branch(angle: f64, reference: f64) -> f64 {
    reference + wrap_angle(angle - reference)
}

/// Splits the phase of `ψ(t_end)` relative to `psi0` into dynamical and
/// geometric parts. The principal value `−arg⟨ψ₀|ψ(t_end)⟩` is lifted to the
/// branch nearest the per-step accumulated phase, which resolves multiples of
/// 2π; the geometric part therefore lies in (−π, π] around it.
pub fn phase_decomposition(traj: &Trajectory, psi0: &ComplexVector) -> Result<PhaseDecomposition> {
    if traj.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    if !psi0.is_normalized(crate::propagate::NORM_TOL) {
        return Err(Error::invalid("reference state is not normalized"));
    }
    let survival = overlap(psi0, traj.final_state())?;
    let total = nearest_branch(-survival.arg(), traj.final_transport_phase());
    let dynamical = traj.final_dynamical_phase();
    Ok(PhaseDecomposition {
        total,
        dynamical,
        geometric: total - dynamical,
        cyclicity_defect: (1.0 - survival.norm()).clamp(0.0, 1.0),
        survival_amplitude: survival,
    })
}

/// Propagates `|J, m_z = m⟩` around `path` and decomposes its phase.
pub fn spin_berry_phase(
    j: f64,
    m: f64,
    path: &FieldPath,
    cfg: &PropagationConfig,
) -> Result<(PhaseDecomposition, Trajectory)> {
    let rep = spin_representation(j)?;
    let psi0 = ComplexVector::basis(rep.dim(), rep.index_of(m)?)?;
    let source = FnHamiltonian::new(rep.dim(), |t| spin_hamiltonian(&rep, path.omega_at(t)?));
    let traj = propagate(&source, &psi0, path.window(), cfg)?;
    Ok((phase_decomposition(&traj, &psi0)?, traj))
}

/// `max|e^{−i(π/2)J_x}·e^{−i(π/2)J_z}·e^{−i(π/2)J_y} − e^{−i(π/2)J_z}|`.
pub fn rotation_composition_check(generators: &GeneratorTriple) -> Result<f64> {
    let rx = expm_i(&generators.x, FRAC_PI_2)?;
    let ry = expm_i(&generators.y, FRAC_PI_2)?;
    let rz = expm_i(&generators.z, FRAC_PI_2)?;
    let lhs = rx.compose(&rz)?.compose(&ry)?;
    Ok(max_abs(&(lhs.matrix() - rz.matrix())))
}

#[derive(Clone, Debug)]
pub struct HolonomyResult {
    /// `B₀†·B_end` in the coordinates of the initial frame `B₀`.
    pub holonomy: UnitaryOperator,
    /// `arg` of the holonomy eigenvalues, ascending, in (−π, π].
    pub eigenphases: Vec<f64>,
    /// Eigenvectors of `holonomy` (columns), in initial-frame coordinates.
    pub eigenvectors: UnitaryOperator,
    pub initial_basis: CMatrix,
}

impl HolonomyResult {
    /// Eigenvectors of the holonomy lifted to the full Hilbert space, in the
    /// order of `eigenphases`.
    pub fn eigenstates(&self) -> Vec<ComplexVector> {
        let lifted = &self.initial_basis * self.eigenvectors.matrix();
        (0..lifted.ncols())
            .map(|k| {
                ComplexVector::new(lifted.column(k).iter().copied().collect())
                    .expect("non-empty column")
            })
            .collect()
    }
}

/// Parallel-transports the eigensubspace at `energy` around a closed loop and
/// returns the resulting (Wilczek–Zee) holonomy.
pub fn wilczek_zee_holonomy(
    source: &dyn HamiltonianSource,
    energy: f64,
    window: (f64, f64),
    cfg: &PropagationConfig,
) -> Result<HolonomyResult> {
    check_closed(source, window)?;
    let tracked = adiabatic_eigenstate_track(source, energy, window, cfg)?;
    let b0 = tracked.initial_basis().clone();
    let hol = b0.ad_mul(tracked.final_basis());
    let holonomy = UnitaryOperator::new(hol)
        .map_err(|e| Error::invalid(format!("transported frame does not close on itself: {e}")))?;
    let (values, vectors) = normal_eigen(holonomy.matrix())?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    let phases: Vec<f64> = values.iter().map(|z| phase_in_half_open(z.arg())).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let d = values.len();
    let v = vectors.matrix();
    let sorted = CMatrix::from_fn(d, d, |r, c| v[(r, order[c])]);
    Ok(HolonomyResult {
        holonomy,
        eigenphases: order.iter().map(|&k| phases[k]).collect(),
        eigenvectors: UnitaryOperator::from_matrix_unchecked(sorted),
        initial_basis: b0,
    })
}

fn phase_in_half_open(a: f64) -> f64 {
    if a <= -PI {
        a + 2.0 * PI
    } else {
        a
    }
}

/// The loop must end on the Hamiltonian it started from, up to a positive
/// scale factor.
fn check_closed(source: &dyn HamiltonianSource, window: (f64, f64)) -> Result<()> {
    let h0 = source.hamiltonian(window.0)?;
    let h1 = source.hamiltonian(window.1)?;
    let (n0, n1) = (h0.max_abs(), h1.max_abs());
    if n0 == 0.0 && n1 == 0.0 {
        return Ok(());
    }
    if n0 == 0.0 || n1 == 0.0 {
        return Err(Error::invalid(
            "open path: Hamiltonian vanishes at only one end",
        ));
    }
    let mismatch =
        max_abs(&(h0.matrix() / Complex64::new(n0, 0.0) - h1.matrix() / Complex64::new(n1, 0.0)));
    if mismatch > 1e-6 {
        return Err(Error::invalid(format!(
            "open path: end-point Hamiltonians differ by {mismatch:e} after normalization"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseXiFit {
    /// Coefficient of `1/ξ`.
    pub c: f64,
    /// Constant term, present only for the offset model.
    pub offset: Option<f64>,
    pub r_squared: f64,
}

impl InverseXiFit {
    pub fn predict(&self, xi: f64) -> f64 {
        self.c / xi + self.offset.unwrap_or(0.0)
    }
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(Error::invalid(
            "fit points need finite phases and positive ξ",
        ));
    }
    Ok(())
}

/// Coefficient of determination about the mean. A constant data set that the
/// model misses reports 0.
fn r_squared(points: &[(f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    let n = points.len() as f64;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - model(p.0)).powi(2)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - ss_res / ss_tot
}

/// Least squares for `phase = c/ξ` (no offset).
pub fn fit_inverse_xi(points: &[(f64, f64)]) -> Result<InverseXiFit> {
    check_points(points)?;
    let num: f64 = points.iter().map(|&(x, y)| y / x).sum();
    let den: f64 = points.iter().map(|&(x, _)| 1.0 / (x * x)).sum();
    let c = num / den;
    Ok(InverseXiFit {
        c,
        offset: None,
        r_squared: r_squared(points, |x| c / x),
    })
}

/// Least squares for `phase = c/ξ + d`.
pub fn fit_inverse_xi_with_offset(points: &[(f64, f64)]) -> Result<InverseXiFit> {
    check_points(points)?;
    let n = points.len() as f64;
    let us: Vec<f64> = points.iter().map(|p| 1.0 / p.0).collect();
    let mu = us.iter().sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = us.iter().map(|u| (u - mu).powi(2)).sum();
    let sxy: f64 = us
        .iter()
        .zip(points)
        .map(|(u, p)| (u - mu) * (p.1 - my))
        .sum();
    if sxx == 0.0 {
        return Err(Error::invalid(
            "offset fit needs at least two distinct ξ values",
        ));
    }
    let c = sxy / sxx;
    let d = my - c * mu;
    Ok(InverseXiFit {
        c,
        offset: Some(d),
        r_squared: r_squared(points, |x| c / x + d),
    })
}
