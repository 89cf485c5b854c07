//! Piecewise drive schedules for `h_x(t)` and `h_z(t)`.
//!
//! The observation protocol is: ramp `h_x` from zero to its target at
//! positive `h_z` (preparation), flip the sign of `h_z` over a crossing
//! window, pause at the (possibly modulated) target, then ramp `h_x` back
//! to zero for measurement. Times are dimensionless (`ħ = J = 1`); an
//! optional scale factor maps one time unit to physical nanoseconds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Damped-sinusoid model of the longitudinal-field flip.
///
/// The field crosses from its pre-flip value to `target` over
/// `crossing_time` (proportional to the square of the target magnitude when
/// built via [`ModulatedFlip::with_crossing_scale`]), then rings around the
/// target as `amplitude · exp(-t/decay_time) · sin(2π frequency t)`. The
/// true hardware waveform is a measured quantity; all parameters are
/// configuration inputs, and a tabulated profile can be used instead when
/// measured data is available.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulatedFlip {
    pub target_hz: f64,
    pub crossing_time: f64,
    pub amplitude: f64,
    pub decay_time: f64,
    pub frequency: f64,
}

/// Default settling horizon: the modulation should be below 1% of its
/// amplitude by this time after the flip.
pub const DEFAULT_SETTLING_TIME: f64 = 0.75;

impl ModulatedFlip {
    /// Crossing time `k · h_z²`.
    pub fn with_crossing_scale(
        target_hz: f64,
        k: f64,
        amplitude: f64,
        decay_time: f64,
        frequency: f64,
    ) -> Result<Self> {
        if k <= 0.0 {
            return Err(Error::Contract("crossing scale k must be positive".into()));
        }
        Ok(Self {
            target_hz,
            crossing_time: k * target_hz * target_hz,
            amplitude,
            decay_time,
            frequency,
        })
    }

    /// Check that the ring decays below 1% of its amplitude within the
    /// settling horizon.
    pub fn validate_settling(&self, settling_time: f64) -> Result<()> {
        if self.amplitude == 0.0 {
            return Ok(());
        }
        if self.decay_time <= 0.0 {
            return Err(Error::Contract("decay time must be positive".into()));
        }
        let remaining = (-settling_time / self.decay_time).exp();
        if remaining >= 0.01 {
            return Err(Error::Contract(format!(
                "modulation retains {:.1}% of its amplitude at the settling time {settling_time}",
                100.0 * remaining
            )));
        }
        Ok(())
    }
}

/// Time profile of one field within a segment; `t` is segment-local.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Constant { value: f64 },
    Linear { from: f64, to: f64 },
    /// Piecewise-linear interpolation of `(t, value)` samples.
    Tabulated { points: Vec<(f64, f64)> },
    /// Damped-sinusoid ring around the flip target (post-crossing part).
    ModulatedFlip { flip: ModulatedFlip },
}

impl Profile {
    pub fn value(&self, t: f64, duration: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { from, to } => {
                if duration <= 0.0 {
                    *to
                } else {
                    from + (to - from) * (t / duration).clamp(0.0, 1.0)
                }
            }
            Profile::Tabulated { points } => interp(points, t),
            Profile::ModulatedFlip { flip } => {
                flip.target_hz
                    + flip.amplitude
                        * (-t / flip.decay_time).exp()
                        * (2.0 * std::f64::consts::PI * flip.frequency * t).sin()
            }
        }
    }

    /// Shortest internal feature a stepper must resolve.
    fn feature(&self, duration: f64) -> f64 {
        match self {
            Profile::Constant { .. } | Profile::Linear { .. } => duration,
            Profile::Tabulated { points } => points
                .windows(2)
                .map(|w| w[1].0 - w[0].0)
                .fold(duration, f64::min),
            Profile::ModulatedFlip { flip } => {
                let mut f = duration;
                if flip.amplitude != 0.0 {
                    if flip.frequency > 0.0 {
                        f = f.min(1.0 / flip.frequency);
                    }
                    f = f.min(flip.decay_time);
                }
                f
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let Profile::Tabulated { points } = self {
            if points.len() < 2 {
                return Err(Error::Contract("tabulated profile needs >= 2 points".into()));
            }
            for w in points.windows(2) {
                if w[1].0 <= w[0].0 {
                    return Err(Error::Contract(
                        "tabulated profile times must be strictly increasing".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn interp(points: &[(f64, f64)], t: f64) -> f64 {
    if t <= points[0].0 {
        return points[0].1;
    }
    if t >= points[points.len() - 1].0 {
        return points[points.len() - 1].1;
    }
    let k = points.partition_point(|&(pt, _)| pt <= t);
    let (t0, v0) = points[k - 1];
    let (t1, v1) = points[k];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// One schedule segment with independent `h_x` and `h_z` profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub h_x: Profile,
    pub h_z: Profile,
    /// Optional anchor label ("ramp-in", "flip", "pause", "measure").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// An ordered list of segments describing the full drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub segments: Vec<Segment>,
}

impl DriveSchedule {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Contract("schedule needs at least one segment".into()));
        }
        for s in &segments {
            if s.duration < 0.0 {
                return Err(Error::Contract("segment durations must be >= 0".into()));
            }
            s.h_x.validate()?;
            s.h_z.validate()?;
        }
        Ok(Self { segments })
    }

    /// Constant fields for a fixed duration.
    pub fn constant(h_x: f64, h_z: f64, duration: f64) -> Self {
        Self {
            segments: vec![Segment {
                duration,
                h_x: Profile::Constant { value: h_x },
                h_z: Profile::Constant { value: h_z },
                label: None,
            }],
        }
    }

    /// The four-segment decay-observation protocol: ramp-in over `irt` at
    /// positive `h_z`, sign flip of `h_z` over the crossing window, pause of
    /// `pause` at the modulated target, measurement ramp of `h_x → 0` over
    /// `mt`.
    pub fn decay_protocol(
        irt: f64,
        pause: f64,
        mt: f64,
        h_x_target: f64,
        h_z_initial: f64,
        flip: ModulatedFlip,
    ) -> Result<Self> {
        if h_z_initial <= 0.0 {
            return Err(Error::Contract(
                "the preparation field h_z must be positive".into(),
            ));
        }
        Self::new(vec![
            Segment {
                duration: irt,
                h_x: Profile::Linear { from: 0.0, to: h_x_target },
                h_z: Profile::Constant { value: h_z_initial },
                label: Some("ramp-in".into()),
            },
            Segment {
                duration: flip.crossing_time,
                h_x: Profile::Constant { value: h_x_target },
                h_z: Profile::Linear { from: h_z_initial, to: flip.target_hz },
                label: Some("flip".into()),
            },
            Segment {
                duration: pause,
                h_x: Profile::Constant { value: h_x_target },
                h_z: Profile::ModulatedFlip { flip },
                label: Some("pause".into()),
            },
            Segment {
                duration: mt,
                h_x: Profile::Linear { from: h_x_target, to: 0.0 },
                h_z: Profile::Constant { value: flip.target_hz },
                label: Some("measure".into()),
            },
        ])
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Fields at global time `t`; times past the end hold the final values.
    pub fn sample(&self, t: f64) -> (f64, f64) {
        let mut remaining = t.max(0.0);
        for (i, seg) in self.segments.iter().enumerate() {
            let last = i == self.segments.len() - 1;
            if remaining <= seg.duration || last {
                let local = remaining.min(seg.duration);
                return (
                    seg.h_x.value(local, seg.duration),
                    seg.h_z.value(local, seg.duration),
                );
            }
            remaining -= seg.duration;
        }
        unreachable!("schedule has at least one segment");
    }

    /// Start time of the segment with the given label, if present.
    pub fn anchor(&self, label: &str) -> Option<f64> {
        let mut t = 0.0;
        for seg in &self.segments {
            if seg.label.as_deref() == Some(label) {
                return Some(t);
            }
            t += seg.duration;
        }
        None
    }

    /// Shortest feature any stepper must resolve.
    pub fn min_feature(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.duration > 0.0)
            .map(|s| {
                s.h_x
                    .feature(s.duration)
                    .min(s.h_z.feature(s.duration))
            })
            .fold(f64::INFINITY, f64::min)
    }
}
