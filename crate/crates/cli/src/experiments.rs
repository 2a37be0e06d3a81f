//! The experiments behind each subcommand.

use std::f64::consts::FRAC_PI_2;

use geophase::{
    fit_inverse_xi, nearest_branch, octant_path, phase_decomposition, propagate, spin_berry_phase,
    spin_representation, wilczek_zee_holonomy, wrap_angle, Axis, Complex64, ComplexVector,
    GaussianPulse, InverseXiFit, PhaseDecomposition, PropagationConfig, PulseSequence,
    PulsedTripod, PulsedTwoParticle, Trajectory, TwoParticleModel, TwoParticleState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, JitterSpec, TripodInitial};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, CsvTable, ExperimentOutput, Report, Value};

/// Largest tolerated deviation of any recorded norm from 1.
pub const NORM_LIMIT: f64 = 1e-9;
/// Gates losing more than this population are flagged.
pub const LEAKAGE_WARNING: f64 = 0.05;
/// Adiabaticity threshold Ω·(segment duration) for the spin demo.
pub const SPIN_ADIABATIC_PRODUCT: f64 = 50.0;

const HALF_AXES: [Axis; 4] = [Axis::Z, Axis::X, Axis::Y, Axis::Z];
const FULL_AXES: [Axis; 7] = [
    Axis::Z,
    Axis::X,
    Axis::Y,
    Axis::Z,
    Axis::X,
    Axis::Y,
    Axis::Z,
];

fn check_norm(traj: &Trajectory, what: &str) -> CliResult<f64> {
    let d = traj.max_norm_defect();
    if d > NORM_LIMIT {
        return Err(CliError::Numerical(format!(
            "{what}: norm drifted by {d:e}"
        )));
    }
    Ok(d)
}

pub fn build_sequence(
    axes: &[Axis],
    alphas: &[f64],
    widths: &[f64],
    centers: &[f64],
) -> CliResult<PulseSequence> {
    let pulses = axes
        .iter()
        .zip(alphas)
        .zip(widths)
        .zip(centers)
        .map(|(((&axis, &a), &w), &c)| GaussianPulse::new(axis, a, c, w))
        .collect::<geophase::Result<Vec<_>>>()?;
    Ok(PulseSequence::with_default_window(pulses)?)
}

/// The configured pulse train: z, x, y, z or, for double-loop experiments,
/// z, x, y, z, x, y, z.
pub fn sequence(cfg: &ExperimentConfig) -> CliResult<PulseSequence> {
    let centers = cfg.centers()?;
    let axes: &[Axis] = if cfg.experiment()?.uses_full_cycle() {
        &FULL_AXES
    } else {
        &HALF_AXES
    };
    let n = axes.len();
    build_sequence(
        axes,
        &vec![cfg.alpha()?; n],
        &vec![cfg.pulse_width()?; n],
        &centers,
    )
}

fn sample_indices(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |&k| k % stride == 0 || k + 1 == len)
}

// ---------------------------------------------------------------- spin demo

#[derive(Clone, Debug, PartialEq)]
pub struct SpinRow {
    pub m: f64,
    pub decomposition: PhaseDecomposition,
    pub expected_geometric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinDemoResult {
    pub j: f64,
    pub omega: f64,
    pub segment_duration: f64,
    pub rows: Vec<SpinRow>,
    pub max_norm_defect: f64,
    pub warnings: Vec<String>,
}

pub fn spin_demo(cfg: &ExperimentConfig) -> CliResult<SpinDemoResult> {
    let (j, omega, seg) = (cfg.spin_j()?, cfg.omega()?, cfg.segment_duration()?);
    let rep = spin_representation(j)?;
    let path = octant_path(omega, seg)?;
    let pcfg = PropagationConfig::new(cfg.step()?);
    let mut warnings = Vec::new();
    if omega * seg < SPIN_ADIABATIC_PRODUCT {
        warnings.push(format!(
            "Ω·segment = {} < {SPIN_ADIABATIC_PRODUCT}: evolution is not adiabatic",
            omega * seg
        ));
    }
    let ms: Vec<f64> = (0..rep.dim()).map(|k| j - k as f64).collect();
    let runs: Vec<CliResult<(SpinRow, f64)>> = ms
        .par_iter()
        .map(|&m| {
            let (pd, traj) = spin_berry_phase(j, m, &path, &pcfg)?;
            let norm = check_norm(&traj, "spin demo")?;
            Ok((
                SpinRow {
                    m,
                    decomposition: pd,
                    expected_geometric: FRAC_PI_2 * m,
                },
                norm,
            ))
        })
        .collect();
    let mut rows = Vec::new();
    let mut max_norm_defect: f64 = 0.0;
    for r in runs {
        let (row, n) = r?;
        if !row.decomposition.is_cyclic() {
            warnings.push(format!("m = {}: evolution is not cyclic", row.m));
        }
        max_norm_defect = max_norm_defect.max(n);
        rows.push(row);
    }
    Ok(SpinDemoResult {
        j,
        omega,
        segment_duration: seg,
        rows,
        max_norm_defect,
        warnings,
    })
}

fn spin_output(r: &SpinDemoResult) -> ExperimentOutput {
    let mut report = Report::new(Experiment::SpinDemo.name());
    report.float("j", r.j);
    report.float("omega", r.omega);
    report.float("segment_duration", r.segment_duration);
    let mut csv = CsvTable::new(&[
        "m",
        "dynamical_phase",
        "geometric_phase",
        "expected_geometric_phase",
        "total_phase",
        "cyclicity_defect",
    ]);
    for row in &r.rows {
        let pd = &row.decomposition;
        csv.push(vec![
            row.m.into(),
            pd.dynamical.into(),
            pd.geometric.into(),
            row.expected_geometric.into(),
            pd.total.into(),
            pd.cyclicity_defect.into(),
        ]);
        report.details.push(format!(
            "m = {:+}: γ_d = {:.6}, γ_g = {:.6}, expected {:.6}",
            row.m, pd.dynamical, pd.geometric, row.expected_geometric
        ));
    }
    let worst = r
        .rows
        .iter()
        .map(|row| (row.decomposition.geometric - row.expected_geometric).abs())
        .fold(0.0, f64::max);
    report.float("max_geometric_error", worst);
    report.float("max_norm_defect", r.max_norm_defect);
    report.warnings = r.warnings.clone();
    ExperimentOutput { report, csv }
}

// ---------------------------------------------------------------- tripod

pub fn tripod_state(initial: TripodInitial) -> ComplexVector {
    let r = 1.0 / 2f64.sqrt();
    let z = Complex64::new(0.0, 0.0);
    let entries = match initial {
        TripodInitial::Two => vec![z, Complex64::new(1.0, 0.0), z, z],
        TripodInitial::Three => vec![z, z, Complex64::new(1.0, 0.0), z],
        TripodInitial::Plus => vec![z, Complex64::new(0.0, r), Complex64::new(r, 0.0), z],
        TripodInitial::Minus => vec![z, Complex64::new(0.0, -r), Complex64::new(r, 0.0), z],
    };
    ComplexVector::new(entries).expect("normalized literal state")
}

/// Signed amplitude along an expected intermediate state of the transfer
/// chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub label: &'static str,
    pub t: f64,
    pub signed_overlap: f64,
}

#[derive(Clone, Debug)]
pub struct TripodResult {
    pub initial: TripodInitial,
    pub double: bool,
    pub decomposition: PhaseDecomposition,
    /// max over samples of |⟨ψ|H|ψ⟩|
    pub max_dark_energy: f64,
    pub holonomy_phases: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub max_norm_defect: f64,
    pub window: (f64, f64),
    pub trajectory: Trajectory,
}

pub fn tripod_cycle(cfg: &ExperimentConfig) -> CliResult<TripodResult> {
    let seq = sequence(cfg)?;
    let double = cfg.experiment()?.uses_full_cycle();
    let initial = cfg.initial();
    let window = seq.window();
    let centers = seq.centers();
    let pcfg = PropagationConfig::new(cfg.step()?);
    let src = PulsedTripod { pulses: seq };
    let run_cfg = pcfg.with_convergence_check(cfg.convergence_check());
    let psi0 = tripod_state(initial);
    let traj = propagate(&src, &psi0, window, &run_cfg)?;
    let max_norm_defect = check_norm(&traj, "tripod")?;
    let decomposition = phase_decomposition(&traj, &psi0)?;
    let max_dark_energy = traj
        .energy_expectations
        .iter()
        .fold(0.0f64, |a, e| a.max(e.abs()));
    let holonomy_phases = wilczek_zee_holonomy(&src, 0.0, window, &pcfg)?.eigenphases;
    let mut checkpoints = Vec::new();
    if double {
        // |2⟩ → −|4⟩ → +|3⟩ → −|2⟩
        let at =
            |t: f64, idx: usize, sign: f64| sign * traj.states[traj.sample_near(t)].get(idx).re;
        let t1 = (centers[1] + centers[2]) / 2.0;
        let t2 = (centers[3] + centers[4]) / 2.0;
        checkpoints = vec![
            Checkpoint {
                label: "-|4>",
                t: t1,
                signed_overlap: at(t1, 3, -1.0),
            },
            Checkpoint {
                label: "+|3>",
                t: t2,
                signed_overlap: at(t2, 2, 1.0),
            },
            Checkpoint {
                label: "-|2>",
                t: window.1,
                signed_overlap: at(window.1, 1, -1.0),
            },
        ];
    }
    Ok(TripodResult {
        initial,
        double,
        decomposition,
        max_dark_energy,
        holonomy_phases,
        checkpoints,
        max_norm_defect,
        window,
        trajectory: traj,
    })
}

fn tripod_output(r: &TripodResult, stride: usize) -> ExperimentOutput {
    let name = if r.double {
        Experiment::TripodDouble
    } else {
        Experiment::TripodCycle
    };
    let mut report = Report::new(name.name());
    let pd = &r.decomposition;
    report.metric("initial", Value::Text(r.initial.name().to_string()));
    report.float("total_phase", pd.total);
    report.float("dynamical_phase", pd.dynamical);
    report.float("geometric_phase", pd.geometric);
    report.float("cyclicity_defect", pd.cyclicity_defect);
    report.metric("cyclic", Value::Text(pd.is_cyclic().to_string()));
    report.float("max_dark_energy", r.max_dark_energy);
    if let Some(d) = r.trajectory.step_halving_delta {
        report.float("step_halving_delta", d);
    }
    report.metric(
        "holonomy_eigenphases",
        Value::List(r.holonomy_phases.clone()),
    );
    for c in &r.checkpoints {
        report.details.push(format!(
            "checkpoint {} at t = {}: signed overlap {:.6}",
            c.label, c.t, c.signed_overlap
        ));
    }
    if !r.checkpoints.is_empty() {
        let worst = r
            .checkpoints
            .iter()
            .map(|c| c.signed_overlap)
            .fold(f64::INFINITY, f64::min);
        report.float("min_checkpoint_overlap", worst);
    }
    report.float("max_norm_defect", r.max_norm_defect);
    if !pd.is_cyclic() {
        report.warnings.push(format!(
            "evolution is not cyclic (defect {:.3e}); phase split is not meaningful",
            pd.cyclicity_defect
        ));
    }
    let mut csv = CsvTable::new(&[
        "t",
        "re_1",
        "im_1",
        "re_2",
        "im_2",
        "re_3",
        "im_3",
        "re_4",
        "im_4",
        "norm",
        "dynamical_phase",
    ]);
    let traj = &r.trajectory;
    for k in sample_indices(traj.len(), stride) {
        let s = &traj.states[k];
        let mut row: Vec<Cell> = vec![traj.times[k].into()];
        for z in s.entries() {
            row.push(z.re.into());
            row.push(z.im.into());
        }
        row.push(s.norm().into());
        row.push(traj.accumulated_dynamical_phase[k].into());
        csv.push(row);
    }
    ExperimentOutput { report, csv }
}

// ---------------------------------------------------------------- gates

/// Evolution under the six-state model next to the ideal (ξ → ∞) reference.
#[derive(Clone, Debug)]
pub struct RelativeRun {
    pub actual: Trajectory,
    pub reference: Trajectory,
    /// `−arg⟨ref|ψ⟩` at each recorded sample, unwrapped.
    pub relative_phase: Vec<f64>,
}

impl RelativeRun {
    pub fn max_norm_defect(&self) -> f64 {
        self.actual
            .max_norm_defect()
            .max(self.reference.max_norm_defect())
    }
}

/// Propagates |ba⟩ under both models, recording about every width/40 so
/// that the relative phase can be followed continuously.
pub fn co_propagate(
    model: TwoParticleModel,
    seq: &PulseSequence,
    step: f64,
    convergence_check: bool,
) -> CliResult<RelativeRun> {
    let width = seq.min_width().unwrap_or(step);
    let stride = ((width / 40.0) / step).floor().max(1.0) as usize;
    let pcfg = PropagationConfig::new(step)
        .with_stride(stride)
        .with_convergence_check(convergence_check);
    let psi0 = ComplexVector::basis(6, TwoParticleState::Ba.index())?;
    let window = seq.window();
    let actual = propagate(
        &PulsedTwoParticle::new(model, seq.clone()),
        &psi0,
        window,
        &pcfg,
    )?;
    let ref_cfg = pcfg.with_convergence_check(false);
    let reference = propagate(
        &PulsedTwoParticle::ideal(seq.clone()),
        &psi0,
        window,
        &ref_cfg,
    )?;
    check_norm(&actual, "six-state run")?;
    check_norm(&reference, "reference run")?;

    let mut relative_phase = Vec::with_capacity(actual.len());
    let mut prev: Option<f64> = None;
    for (a, r) in actual.states.iter().zip(&reference.states) {
        let p = -geophase::overlap(r, a)?.arg();
        let next = match prev {
            None => p,
            Some(q) => {
                let d = wrap_angle(p - q);
                if d.abs() > FRAC_PI_2 {
                    return Err(CliError::Numerical(format!(
                        "relative phase jumped by {d:.3} rad between samples; reduce the step"
                    )));
                }
                q + d
            }
        };
        relative_phase.push(next);
        prev = Some(next);
    }
    Ok(RelativeRun {
        actual,
        reference,
        relative_phase,
    })
}

#[derive(Clone, Debug)]
pub struct GateHalfResult {
    pub xi: f64,
    pub population_da: f64,
    /// `arg c_da` as computed, in (−π, π].
    pub arg_da: f64,
    /// Phase of |da⟩ relative to the ideal transfer (e^{−iγ} convention),
    /// unwrapped.
    pub phase_da: f64,
    pub step_halving_delta: Option<f64>,
    pub max_norm_defect: f64,
    pub run: RelativeRun,
}

pub fn gate_half_with(
    seq: &PulseSequence,
    xi: f64,
    step: f64,
    convergence_check: bool,
) -> CliResult<GateHalfResult> {
    let model = TwoParticleModel::new(xi, 0.0)?;
    let run = co_propagate(model, seq, step, convergence_check)?;
    let da = TwoParticleState::Da.index();
    let c = run.actual.final_state().get(da);
    let c_ref = run.reference.final_state().get(da);
    let last = *run.relative_phase.last().expect("non-empty run");
    let phase_da = nearest_branch(-(c.arg() - c_ref.arg()), last);
    Ok(GateHalfResult {
        xi,
        population_da: c.norm_sqr(),
        arg_da: c.arg(),
        phase_da,
        step_halving_delta: run.actual.step_halving_delta,
        max_norm_defect: run.max_norm_defect(),
        run,
    })
}

pub fn gate_half(cfg: &ExperimentConfig) -> CliResult<GateHalfResult> {
    gate_half_with(
        &sequence(cfg)?,
        cfg.xi()?,
        cfg.step()?,
        cfg.convergence_check(),
    )
}

fn amplitude_columns(header: &mut Vec<&'static str>, states: &[TwoParticleState]) {
    for s in states {
        header.push(match s {
            TwoParticleState::Ba => "abs_ba",
            TwoParticleState::Da => "abs_da",
            TwoParticleState::Ab => "abs_ab",
            TwoParticleState::Aa => "abs_aa",
            TwoParticleState::Bb => "abs_bb",
            TwoParticleState::Db => "abs_db",
        });
    }
}

fn relative_csv(run: &RelativeRun, states: &[TwoParticleState], stride: usize) -> CsvTable {
    let mut header = vec!["t"];
    amplitude_columns(&mut header, states);
    header.extend(["norm", "dynamical_phase", "relative_phase"]);
    let mut csv = CsvTable::new(&header);
    let traj = &run.actual;
    for k in sample_indices(traj.len(), stride) {
        let s = &traj.states[k];
        let mut row: Vec<Cell> = vec![traj.times[k].into()];
        row.extend(states.iter().map(|st| Cell::from(s.get(st.index()).norm())));
        row.push(s.norm().into());
        row.push(traj.accumulated_dynamical_phase[k].into());
        row.push(run.relative_phase[k].into());
        csv.push(row);
    }
    csv
}

fn gate_half_output(r: &GateHalfResult, stride: usize) -> ExperimentOutput {
    let mut report = Report::new(Experiment::GateHalf.name());
    report.float("xi", r.xi);
    report.float("population_da", r.population_da);
    report.float("arg_da", r.arg_da);
    report.float("phase_da", r.phase_da);
    if let Some(d) = r.step_halving_delta {
        report.float("step_halving_delta", d);
    }
    report.float("max_norm_defect", r.max_norm_defect);
    use TwoParticleState::*;
    ExperimentOutput {
        report,
        csv: relative_csv(&r.run, &[Ba, Ab, Da], stride),
    }
}

#[derive(Clone, Debug)]
pub struct XiScanResult {
    /// (ξ, phase of |da⟩, population of |da⟩)
    pub points: Vec<(f64, f64, f64)>,
    pub fit: InverseXiFit,
    pub max_norm_defect: f64,
}

impl XiScanResult {
    /// |phase| at the second ξ over |phase| at the first.
    pub fn first_ratio(&self) -> f64 {
        self.points[1].1.abs() / self.points[0].1.abs()
    }

    /// |phase| non-increasing along increasing ξ.
    pub fn monotone(&self) -> bool {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.windows(2).all(|w| w[1].1.abs() <= w[0].1.abs())
    }
}

pub fn xi_scan(cfg: &ExperimentConfig) -> CliResult<XiScanResult> {
    let seq = sequence(cfg)?;
    let step = cfg.step()?;
    let xs = cfg.xi_list()?;
    let runs: Vec<CliResult<GateHalfResult>> = xs
        .par_iter()
        .map(|&xi| gate_half_with(&seq, xi, step, false))
        .collect();
    let mut points = Vec::new();
    let mut max_norm_defect: f64 = 0.0;
    for r in runs {
        let r = r?;
        max_norm_defect = max_norm_defect.max(r.max_norm_defect);
        points.push((r.xi, r.phase_da, r.population_da));
    }
    let fit_points: Vec<(f64, f64)> = points.iter().map(|p| (p.0, p.1.abs())).collect();
    let fit = fit_inverse_xi(&fit_points)?;
    Ok(XiScanResult {
        points,
        fit,
        max_norm_defect,
    })
}

fn xi_scan_output(r: &XiScanResult) -> ExperimentOutput {
    let mut report = Report::new(Experiment::XiScan.name());
    report.float("fit_c", r.fit.c);
    report.float("fit_r_squared", r.fit.r_squared);
    report.float("ratio_second_to_first", r.first_ratio());
    report.metric("monotone", Value::Text(r.monotone().to_string()));
    report.float("max_norm_defect", r.max_norm_defect);
    let mut csv = CsvTable::new(&[
        "xi",
        "phase_da",
        "abs_phase_da",
        "population_da",
        "fit_abs_phase",
    ]);
    for &(xi, ph, pop) in &r.points {
        csv.push(vec![
            xi.into(),
            ph.into(),
            ph.abs().into(),
            pop.into(),
            r.fit.predict(xi).into(),
        ]);
    }
    ExperimentOutput { report, csv }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateReport {
    pub xi: f64,
    /// Rows and columns ordered 00, 01, 10, 11.
    pub logical_unitary: [[Complex64; 4]; 4],
    pub c_ba: Complex64,
    pub conditional_phase: f64,
    /// Unwrapped phase relative to the ideal double loop.
    pub stark_phase: f64,
    pub fidelity: f64,
    pub leakage: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub max_norm_defect: f64,
}

impl GateReport {
    pub fn degraded(&self) -> bool {
        self.leakage > LEAKAGE_WARNING
    }
}

/// Runs the double loop from |ba⟩ and assembles the logical gate. The
/// spectators 00, 01, 10 are untouched in the rotating frame.
pub fn gate_full_with(
    seq: &PulseSequence,
    xi: f64,
    step: f64,
) -> CliResult<(GateReport, RelativeRun)> {
    let model = TwoParticleModel::new(xi, 0.0)?;
    let run = co_propagate(model, seq, step, false)?;
    let fin = run.actual.final_state();
    let c_ba = fin.get(TwoParticleState::Ba.index());
    let c_ref = run
        .reference
        .final_state()
        .get(TwoParticleState::Ba.index());
    let stark_phase = *run.relative_phase.last().expect("non-empty run");
    // The ideal loop's own phase, read in (−π/2, 3π/2] so that −1 maps to π.
    let ideal_phase = wrap_angle(-c_ref.arg() - FRAC_PI_2) + FRAC_PI_2;
    let conditional_phase = nearest_branch(-c_ba.arg(), ideal_phase + stark_phase);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut u = [[zero; 4]; 4];
    for (k, row) in u.iter_mut().enumerate().take(3) {
        row[k] = one;
    }
    u[3][3] = c_ba;
    // tr(diag(1,1,1,−1)·U)/4
    let fidelity = ((Complex64::new(3.0, 0.0) - c_ba) / 4.0).norm_sqr();
    let leakage = (1.0 - c_ba.norm_sqr()).max(0.0);

    let c = seq.centers();
    let traj = &run.actual;
    let at = |t: f64, s: TwoParticleState, sign: f64| {
        sign * traj.states[traj.sample_near(t)].get(s.index()).re
    };
    let (t1, t2, t3) = ((c[1] + c[2]) / 2.0, (c[3] + c[4]) / 2.0, seq.window().1);
    let checkpoints = vec![
        Checkpoint {
            label: "-|ab>",
            t: t1,
            signed_overlap: at(t1, TwoParticleState::Ab, -1.0),
        },
        Checkpoint {
            label: "+|da>",
            t: t2,
            signed_overlap: at(t2, TwoParticleState::Da, 1.0),
        },
        Checkpoint {
            label: "-|ba>",
            t: t3,
            signed_overlap: at(t3, TwoParticleState::Ba, -1.0),
        },
    ];
    let report = GateReport {
        xi,
        logical_unitary: u,
        c_ba,
        conditional_phase,
        stark_phase,
        fidelity,
        leakage,
        checkpoints,
        max_norm_defect: run.max_norm_defect(),
    };
    Ok((report, run))
}

pub fn gate_full(cfg: &ExperimentConfig) -> CliResult<(GateReport, RelativeRun)> {
    gate_full_with(&sequence(cfg)?, cfg.xi()?, cfg.step()?)
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:+.6}{:+.6}i", z.re, z.im)
}

fn gate_full_output(g: &GateReport, run: &RelativeRun, stride: usize) -> ExperimentOutput {
    let mut report = Report::new(Experiment::GateFull.name());
    report.float("xi", g.xi);
    report.float("conditional_phase", g.conditional_phase);
    report.float("stark_phase", g.stark_phase);
    report.float("fidelity", g.fidelity);
    report.float("leakage", g.leakage);
    report.float("c_ba_re", g.c_ba.re);
    report.float("c_ba_im", g.c_ba.im);
    let worst = g
        .checkpoints
        .iter()
        .map(|c| c.signed_overlap)
        .fold(f64::INFINITY, f64::min);
    report.float("min_checkpoint_overlap", worst);
    report.float("max_norm_defect", g.max_norm_defect);
    report
        .details
        .push("logical unitary (00, 01, 10, 11):".to_string());
    for row in &g.logical_unitary {
        let cells: Vec<String> = row.iter().map(|&z| fmt_complex(z)).collect();
        report.details.push(format!("  {}", cells.join("  ")));
    }
    for c in &g.checkpoints {
        report.details.push(format!(
            "checkpoint {} at t = {}: signed overlap {:.6}",
            c.label, c.t, c.signed_overlap
        ));
    }
    if g.degraded() {
        report.warnings.push(format!(
            "degraded gate: leakage {:.3e} > {LEAKAGE_WARNING}",
            g.leakage
        ));
    }
    ExperimentOutput {
        report,
        csv: relative_csv(run, &TwoParticleState::BASIS, stride),
    }
}

// ---------------------------------------------------------------- robustness

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessSummary {
    pub runs: usize,
    pub seed: u64,
    pub jitter: JitterSpec,
    pub phase_mean: f64,
    pub phase_std: f64,
    pub fidelity_mean: f64,
    pub fidelity_min: f64,
    pub leakage_max: f64,
    pub max_norm_defect: f64,
    pub per_run: Vec<GateReport>,
}

fn factor(rng: &mut ChaCha8Rng, rel: f64) -> f64 {
    if rel == 0.0 {
        1.0
    } else {
        rng.gen_range(1.0 - rel..=1.0 + rel)
    }
}

/// Draws one perturbed pulse train and ξ. Run `k` uses ChaCha8 stream `k` of
/// `seed`, so the result does not depend on scheduling.
pub fn jittered_gate(
    cfg: &ExperimentConfig,
    seed: u64,
    run: usize,
) -> CliResult<(PulseSequence, f64)> {
    let jitter = cfg.jitter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    let (alpha, width, spacing) = (cfg.alpha()?, cfg.pulse_width()?, cfg.mean_spacing()?);
    let centers = cfg.centers()?;
    let n = FULL_AXES.len();
    let mut alphas = Vec::with_capacity(n);
    let mut widths = Vec::with_capacity(n);
    let mut shifted = Vec::with_capacity(n);
    for &c in &centers {
        alphas.push(alpha * factor(&mut rng, jitter.amplitude));
        widths.push(width * factor(&mut rng, jitter.width));
        shifted.push(c + spacing * (factor(&mut rng, jitter.timing) - 1.0));
    }
    let xi = cfg.xi()? * factor(&mut rng, jitter.xi);
    Ok((build_sequence(&FULL_AXES, &alphas, &widths, &shifted)?, xi))
}

/// Mean and population standard deviation. Deviations are taken from the
/// first value, so identical inputs give exactly zero spread.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let x0 = xs[0];
    let s1: f64 = xs.iter().map(|x| x - x0).sum();
    let s2: f64 = xs.iter().map(|x| (x - x0).powi(2)).sum();
    let var = ((s2 - s1 * s1 / n) / n).max(0.0);
    (x0 + s1 / n, var.sqrt())
}

pub fn robustness(cfg: &ExperimentConfig) -> CliResult<RobustnessSummary> {
    let seed = cfg.seed()?;
    let runs = cfg.runs()?;
    let step = cfg.step()?;
    let results: Vec<CliResult<GateReport>> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let (seq, xi) = jittered_gate(cfg, seed, k)?;
            Ok(gate_full_with(&seq, xi, step)?.0)
        })
        .collect();
    let per_run = results.into_iter().collect::<CliResult<Vec<_>>>()?;
    let phases: Vec<f64> = per_run.iter().map(|g| g.conditional_phase).collect();
    let fids: Vec<f64> = per_run.iter().map(|g| g.fidelity).collect();
    let (phase_mean, phase_std) = mean_std(&phases);
    let (fidelity_mean, _) = mean_std(&fids);
    Ok(RobustnessSummary {
        runs,
        seed,
        jitter: cfg.jitter(),
        phase_mean,
        phase_std,
        fidelity_mean,
        fidelity_min: fids.iter().copied().fold(f64::INFINITY, f64::min),
        leakage_max: per_run.iter().map(|g| g.leakage).fold(0.0, f64::max),
        max_norm_defect: per_run
            .iter()
            .map(|g| g.max_norm_defect)
            .fold(0.0, f64::max),
        per_run,
    })
}

fn robustness_output(s: &RobustnessSummary) -> ExperimentOutput {
    let mut report = Report::new(Experiment::Robustness.name());
    report.metric("runs", Value::Int(s.runs as i64));
    report.metric("seed", Value::Text(s.seed.to_string()));
    report.metric("jitter", Value::Text(s.jitter.to_string()));
    report.float("phase_mean", s.phase_mean);
    report.float("phase_std", s.phase_std);
    report.float("fidelity_mean", s.fidelity_mean);
    report.float("fidelity_min", s.fidelity_min);
    report.float("leakage_max", s.leakage_max);
    report.float("max_norm_defect", s.max_norm_defect);
    let degraded = s.per_run.iter().filter(|g| g.degraded()).count();
    if degraded > 0 {
        report.warnings.push(format!(
            "{degraded} run(s) leaked more than {LEAKAGE_WARNING}"
        ));
    }
    let mut csv = CsvTable::new(&["run", "xi", "conditional_phase", "fidelity", "leakage"]);
    for (k, g) in s.per_run.iter().enumerate() {
        csv.push(vec![
            k.into(),
            g.xi.into(),
            g.conditional_phase.into(),
            g.fidelity.into(),
            g.leakage.into(),
        ]);
    }
    ExperimentOutput { report, csv }
}

// ---------------------------------------------------------------- dispatch

pub fn run(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    let stride = cfg.stride()?;
    Ok(match cfg.experiment()? {
        Experiment::SpinDemo => spin_output(&spin_demo(cfg)?),
        Experiment::TripodCycle | Experiment::TripodDouble => {
            tripod_output(&tripod_cycle(cfg)?, stride)
        }
        Experiment::GateHalf => gate_half_output(&gate_half(cfg)?, stride),
        Experiment::XiScan => xi_scan_output(&xi_scan(cfg)?),
        Experiment::GateFull => {
            let (g, run) = gate_full(cfg)?;
            gate_full_output(&g, &run, stride)
        }
        Experiment::Robustness => robustness_output(&robustness(cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spread_of_identical_values_is_zero() {
        let xs = [0.1 + 0.2; 100];
        assert_eq!(mean_std(&xs), (xs[0], 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15 && (s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tripod_states_are_normalized() {
        for i in [
            TripodInitial::Two,
            TripodInitial::Three,
            TripodInitial::Plus,
            TripodInitial::Minus,
        ] {
            assert!((tripod_state(i).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn jitter_draws_are_reproducible_and_bounded() {
        let mut cfg = ExperimentConfig::for_experiment(Experiment::Robustness);
        cfg.jitter = Some(JitterSpec::uniform(0.1));
        let (a, xa) = jittered_gate(&cfg, 11, 3).unwrap();
        let (b, xb) = jittered_gate(&cfg, 11, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(xa, xb);
        let (c, _) = jittered_gate(&cfg, 11, 4).unwrap();
        assert_ne!(a, c);
        for p in a.pulses() {
            assert!((p.alpha / cfg.alpha().unwrap() - 1.0).abs() <= 0.1);
            assert!((p.width / cfg.pulse_width().unwrap() - 1.0).abs() <= 0.1);
        }
        assert!((xa / 16.0 - 1.0).abs() <= 0.1);
    }

    #[test]
    fn no_op_gate() {
        let seq = build_sequence(
            &FULL_AXES,
            &[0.0; 7],
            &[20.0; 7],
            &[50.0, 105.0, 160.0, 215.0, 270.0, 325.0, 380.0],
        )
        .unwrap();
        let (g, _) = gate_full_with(&seq, 16.0, 0.5).unwrap();
        assert_eq!(g.c_ba, Complex64::new(1.0, 0.0));
        assert!((g.fidelity - 0.25).abs() < 1e-15);
        assert_eq!(g.leakage, 0.0);
        assert_eq!(g.conditional_phase, 0.0);
    }
}
