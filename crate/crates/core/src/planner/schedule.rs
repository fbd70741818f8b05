use super::laws::ControlLaw;
use crate::error::{Error, Result};
use crate::quad::{ControlSource, Controls};

/// Slack allowed when a query lands just past the end of a schedule.
const TIME_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub law: ControlLaw,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Contiguous, time-ordered rotor-speed laws covering `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSchedule {
    segments: Vec<Segment>,
}

impl ControlSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(law: ControlLaw, duration: f64) -> Result<Self> {
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::Domain(format!(
                "segment duration must be nonnegative, got {duration}"
            )));
        }
        Ok(ControlSchedule {
            segments: vec![Segment {
                t_start: 0.0,
                t_end: duration,
                law,
            }],
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// True when the schedule spans no time at all.
    pub fn is_empty(&self) -> bool {
        self.total_duration() == 0.0
    }

    /// Appends `other`, shifted to start where `self` ends. Zero-length
    /// segments are dropped whenever something longer is present.
    pub fn then(mut self, other: ControlSchedule) -> ControlSchedule {
        let offset = self.total_duration();
        self.segments.extend(other.segments.into_iter().map(|s| Segment {
            t_start: s.t_start + offset,
            t_end: s.t_end + offset,
            law: s.law,
        }));
        if self.segments.iter().any(|s| s.duration() > 0.0) {
            self.segments.retain(|s| s.duration() > 0.0);
        } else {
            self.segments.truncate(1);
        }
        self
    }

    pub fn concat(parts: impl IntoIterator<Item = ControlSchedule>) -> ControlSchedule {
        parts
            .into_iter()
            .fold(ControlSchedule::new(), ControlSchedule::then)
    }

    fn segment_at(&self, t: f64) -> Result<&Segment> {
        let total = self.total_duration();
        if self.segments.is_empty() || !(t >= 0.0) || t > total + TIME_SLACK {
            return Err(Error::ScheduleGap { t, duration: total });
        }
        Ok(self
            .segments
            .iter()
            .find(|s| t < s.t_end)
            .unwrap_or_else(|| self.segments.last().unwrap()))
    }

    pub fn controls_at(&self, t: f64) -> Result<Controls> {
        let seg = self.segment_at(t)?;
        seg.law.evaluate((t - seg.t_start).min(seg.duration()))
    }

    /// Tilt angle the plan commands at time `t` (0 for non-translating laws).
    pub fn tilt_at(&self, t: f64) -> Result<f64> {
        let seg = self.segment_at(t)?;
        seg.law.tilt((t - seg.t_start).min(seg.duration()))
    }

    /// Controls on a uniform grid of step `dt`, always including the end.
    pub fn sample(&self, dt: f64) -> Result<Vec<(f64, Controls)>> {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!("sample step must be positive, got {dt}")));
        }
        let total = self.total_duration();
        let n = (total / dt - 1e-9).ceil().max(0.0) as usize;
        (0..=n)
            .map(|k| {
                let t = if k == n { total } else { k as f64 * dt };
                Ok((t, self.controls_at(t)?))
            })
            .collect()
    }
}

impl ControlSource for ControlSchedule {
    fn controls_at(&self, t: f64) -> Result<Controls> {
        ControlSchedule::controls_at(self, t)
    }

    fn duration(&self) -> f64 {
        self.total_duration()
    }
}
