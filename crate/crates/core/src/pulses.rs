//! Control fields: Gaussian pulse sequences for the tripod and two-particle
//! systems, and the piecewise-rotating field of the spin-J demonstration.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Rotation3, Unit, Vector3};

use crate::error::{Error, Result};

/// Number of widths kept on either side of a pulse centre. Beyond this the
/// envelope is below `4e−6·α`.
pub const TRUNCATION_WIDTHS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }

    pub fn label(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::invalid(format!("unknown axis '{other}'"))),
        }
    }
}

/// Time-dependent amplitude of a single control pulse.
pub trait Envelope {
    fn amplitude(&self, t: f64) -> f64;
    fn center(&self) -> f64;
    /// Half-extent of the support that must lie inside a simulation window.
    fn support_radius(&self) -> f64;
}

/// `alpha·exp(−(t − center)²/(2·width²))` on one field component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPulse {
    pub axis: Axis,
    pub alpha: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianPulse {
    pub fn new(axis: Axis, alpha: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid(format!(
                "pulse width must be positive, got {width}"
            )));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::invalid(format!(
                "pulse amplitude must be non-negative, got {alpha}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::invalid("pulse centre must be finite"));
        }
        Ok(Self {
            axis,
            alpha,
            center,
            width,
        })
    }
}

impl Envelope for GaussianPulse {
    fn amplitude(&self, t: f64) -> f64 {
        let u = (t - self.center) / self.width;
        self.alpha * (-0.5 * u * u).exp()
    }

    fn center(&self) -> f64 {
        self.center
    }

    fn support_radius(&self) -> f64 {
        TRUNCATION_WIDTHS * self.width
    }
}

/// Ordered pulses plus the simulation window they live in.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<GaussianPulse>,
    t_start: f64,
    t_end: f64,
}

impl PulseSequence {
    pub fn new(pulses: Vec<GaussianPulse>, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::invalid(format!("empty window [{t_start}, {t_end}]")));
        }
        for pair in pulses.windows(2) {
            if !(pair[1].center > pair[0].center) {
                return Err(Error::invalid(format!(
                    "pulse centres must be strictly increasing ({} then {})",
                    pair[0].center, pair[1].center
                )));
            }
        }
        for p in &pulses {
            let r = p.support_radius();
            if p.center - r < t_start - 1e-9 * r || p.center + r > t_end + 1e-9 * r {
                return Err(Error::invalid(format!(
                    "window [{t_start}, {t_end}] does not cover pulse at {} ± {r}",
                    p.center
                )));
            }
        }
        Ok(Self {
            pulses,
            t_start,
            t_end,
        })
    }

    /// Window spanning every pulse centre ± 5 widths.
    pub fn with_default_window(pulses: Vec<GaussianPulse>) -> Result<Self> {
        if pulses.is_empty() {
            return Err(Error::invalid("default window needs at least one pulse"));
        }
        let t_start = pulses
            .iter()
            .map(|p| p.center - p.support_radius())
            .fold(f64::INFINITY, f64::min);
        let t_end = pulses
            .iter()
            .map(|p| p.center + p.support_radius())
            .fold(f64::NEG_INFINITY, f64::max);
        Self::new(pulses, t_start, t_end)
    }

    pub fn pulses(&self) -> &[GaussianPulse] {
        &self.pulses
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn min_width(&self) -> Option<f64> {
        self.pulses.iter().map(|p| p.width).reduce(f64::min)
    }

    pub fn max_alpha(&self) -> f64 {
        self.pulses.iter().map(|p| p.alpha).fold(0.0, f64::max)
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.pulses.iter().map(|p| p.axis).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.pulses.iter().map(|p| p.center).collect()
    }

    /// Field vector `(Ω_x, Ω_y, Ω_z)` at time `t`; pulses on the same axis add.
    pub fn omega_at(&self, t: f64) -> Result<[f64; 3]> {
        let slack = 1e-12 * self.duration().max(1.0);
        if !(t >= self.t_start - slack && t <= self.t_end + slack) {
            return Err(Error::OutOfRange {
                t,
                start: self.t_start,
                end: self.t_end,
            });
        }
        Ok(self.omega_unchecked(t))
    }

    fn omega_unchecked(&self, t: f64) -> [f64; 3] {
        let mut omega = [0.0; 3];
        for p in &self.pulses {
            omega[p.axis.index()] += p.amplitude(t);
        }
        omega
    }
}

/// Default half-cycle centres in units of the pulse width (50, 100, 140, 190
/// for width 20).
pub const HALF_CYCLE_CENTERS_PER_WIDTH: [f64; 4] = [2.5, 5.0, 7.0, 9.5];

/// Four pulses on axes z, x, y, z: one pass of the field around the octant.
pub fn half_cycle(alpha: f64, width: f64, centers: [f64; 4]) -> Result<PulseSequence> {
    let axes = [Axis::Z, Axis::X, Axis::Y, Axis::Z];
    let pulses = axes
        .iter()
        .zip(centers)
        .map(|(&axis, c)| GaussianPulse::new(axis, alpha, c, width))
        .collect::<Result<Vec<_>>>()?;
    PulseSequence::with_default_window(pulses)
}

/// Seven pulses z, x, y, z, x, y, z uniformly spaced, the first at 2.5 widths.
pub fn full_cycle(alpha: f64, width: f64, spacing: f64) -> Result<PulseSequence> {
    full_cycle_from(alpha, width, 2.5 * width, spacing)
}

pub fn full_cycle_from(
    alpha: f64,
    width: f64,
    first_center: f64,
    spacing: f64,
) -> Result<PulseSequence> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::invalid(format!(
            "pulse spacing must be positive, got {spacing}"
        )));
    }
    let axes = [
        Axis::Z,
        Axis::X,
        Axis::Y,
        Axis::Z,
        Axis::X,
        Axis::Y,
        Axis::Z,
    ];
    let pulses = axes
        .iter()
        .enumerate()
        .map(|(k, &axis)| GaussianPulse::new(axis, alpha, first_center + k as f64 * spacing, width))
        .collect::<Result<Vec<_>>>()?;
    PulseSequence::with_default_window(pulses)
}

/// One leg of a field path: rotate the field direction about `axis` by
/// `angle` at a constant rate over `duration`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSegment {
    pub axis: Unit<Vector3<f64>>,
    pub angle: f64,
    pub duration: f64,
}

/// Constant-magnitude field whose direction follows a chain of rotations,
/// starting along +z.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPath {
    pub segments: Vec<FieldSegment>,
    pub omega_magnitude: f64,
}

impl FieldPath {
    pub fn new(segments: Vec<FieldSegment>, omega_magnitude: f64) -> Result<Self> {
        if !(omega_magnitude > 0.0) || !omega_magnitude.is_finite() {
            return Err(Error::invalid("field magnitude must be positive"));
        }
        if segments
            .iter()
            .any(|s| !(s.duration > 0.0) || !s.angle.is_finite())
        {
            return Err(Error::invalid(
                "segments need positive durations and finite angles",
            ));
        }
        Ok(Self {
            segments,
            omega_magnitude,
        })
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn window(&self) -> (f64, f64) {
        (0.0, self.duration())
    }

    /// Rotation accumulated by the end of every segment.
    fn cumulative(&self) -> Vec<Rotation3<f64>> {
        let mut acc = Rotation3::identity();
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(acc);
        for s in &self.segments {
            acc = Rotation3::from_axis_angle(&s.axis, s.angle) * acc;
            out.push(acc);
        }
        out
    }

    /// Total rotation applied over the whole path.
    pub fn composed_rotation(&self) -> Rotation3<f64> {
        *self.cumulative().last().unwrap()
    }

    /// Unit field direction at time `t` (clamped to the path).
    pub fn direction_at(&self, t: f64) -> Vector3<f64> {
        let cumulative = self.cumulative();
        let mut t0 = 0.0;
        for (k, s) in self.segments.iter().enumerate() {
            if t <= t0 + s.duration || k + 1 == self.segments.len() {
                let frac = ((t - t0) / s.duration).clamp(0.0, 1.0);
                let r = Rotation3::from_axis_angle(&s.axis, s.angle * frac) * cumulative[k];
                return r * Vector3::z();
            }
            t0 += s.duration;
        }
        Vector3::z()
    }

    pub fn omega_at(&self, t: f64) -> Result<[f64; 3]> {
        let (start, end) = self.window();
        let slack = 1e-12 * end.max(1.0);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let d = self.direction_at(t) * self.omega_magnitude;
        Ok([d.x, d.y, d.z])
    }
}

/// z → x (about y), x → y (about z), y → z (about x), each a right-handed
/// quarter turn. The loop encloses one octant (solid angle π/2) and the
/// composed rotation is a quarter turn about z.
pub fn octant_path(omega_magnitude: f64, segment_duration: f64) -> Result<FieldPath> {
    if !(segment_duration > 0.0) {
        return Err(Error::invalid("segment duration must be positive"));
    }
    let seg = |axis: Vector3<f64>| FieldSegment {
        axis: Unit::new_normalize(axis),
        angle: FRAC_PI_2,
        duration: segment_duration,
    };
    FieldPath::new(
        vec![seg(Vector3::y()), seg(Vector3::z()), seg(Vector3::x())],
        omega_magnitude,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> PulseSequence {
        half_cycle(1.0, 20.0, [50.0, 100.0, 140.0, 190.0]).unwrap()
    }

    #[test]
    fn isolated_peak() {
        let pulse = GaussianPulse::new(Axis::X, 1.0, 100.0, 20.0).unwrap();
        let seq = PulseSequence::with_default_window(vec![pulse]).unwrap();
        let w = seq.omega_at(100.0).unwrap();
        assert_eq!(w, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn midpoint_of_consecutive_pulses() {
        let w = defaults().omega_at(120.0).unwrap();
        let expected = (-0.5f64).exp();
        assert!((w[0] - expected).abs() < 1e-15);
        assert!((w[1] - expected).abs() < 1e-15);
        assert!((expected - 0.6065306597).abs() < 1e-9);
    }

    #[test]
    fn empty_sequence_is_zero() {
        let seq = PulseSequence::new(vec![], 0.0, 10.0).unwrap();
        assert_eq!(seq.omega_at(3.0).unwrap(), [0.0; 3]);
    }

    #[test]
    fn out_of_window_rejected() {
        let seq = defaults();
        assert!(matches!(seq.omega_at(-60.0), Err(Error::OutOfRange { .. })));
        assert!(seq.omega_at(290.0).is_ok());
    }

    #[test]
    fn half_cycle_layout() {
        let seq = defaults();
        assert_eq!(seq.axes(), vec![Axis::Z, Axis::X, Axis::Y, Axis::Z]);
        assert_eq!(seq.centers(), vec![50.0, 100.0, 140.0, 190.0]);
        assert_eq!(seq.window(), (-50.0, 290.0));
        let zero = half_cycle(0.0, 20.0, [50.0, 100.0, 140.0, 190.0]).unwrap();
        assert_eq!(zero.omega_at(120.0).unwrap(), [0.0; 3]);
        assert!(half_cycle(1.0, 20.0, [50.0, 100.0, 100.0, 190.0]).is_err());
    }

    #[test]
    fn full_cycle_layout() {
        let seq = full_cycle(1.0, 20.0, 50.0).unwrap();
        assert_eq!(
            seq.centers(),
            vec![50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0]
        );
        assert_eq!(
            seq.axes(),
            vec![
                Axis::Z,
                Axis::X,
                Axis::Y,
                Axis::Z,
                Axis::X,
                Axis::Y,
                Axis::Z
            ]
        );
        let half = half_cycle(1.0, 20.0, [50.0, 100.0, 150.0, 200.0]).unwrap();
        assert_eq!(&seq.pulses()[..4], half.pulses());
        assert!(full_cycle(1.0, 20.0, 0.0).is_err());
        assert!(full_cycle(1.0, 20.0, -5.0).is_err());
    }

    #[test]
    fn non_consecutive_overlap_matches_closed_form() {
        let seq = defaults();
        let (t0, t1) = seq.window();
        let p = seq.pulses();
        let mut worst: f64 = 0.0;
        for k in 0..=4000 {
            let t = t0 + (t1 - t0) * k as f64 / 4000.0;
            for i in 0..p.len() {
                for j in i + 2..p.len() {
                    worst = worst.max(p[i].amplitude(t) * p[j].amplitude(t));
                }
            }
        }
        // Two unit Gaussians a distance d apart peak jointly at exp(−d²/(4T²));
        // the closest non-consecutive pair here is z(50), y(140).
        let expected = (-(90.0f64).powi(2) / (4.0 * 400.0)).exp();
        assert!(
            (worst - expected).abs() < 1e-6,
            "non-consecutive overlap {worst}"
        );
        let consecutive = (-(40.0f64).powi(2) / (4.0 * 400.0)).exp();
        assert!(worst < 0.02 * consecutive);
    }

    #[test]
    fn octant_path_visits_octant_corners() {
        let path = octant_path(1.0, 100.0).unwrap();
        let close = |a: Vector3<f64>, b: Vector3<f64>| (a - b).norm() < 1e-12;
        assert!(close(path.direction_at(100.0), Vector3::x()));
        assert!(close(path.direction_at(200.0), Vector3::y()));
        assert!(close(path.direction_at(300.0), Vector3::z()));
        let r = path.composed_rotation();
        let quarter_z = Rotation3::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2);
        assert!((r.matrix() - quarter_z.matrix()).abs().max() < 1e-12);
        for k in 0..=300 {
            assert!((path.direction_at(k as f64).norm() - 1.0).abs() < 1e-12);
        }
    }
}
