use crate::error::{Error, Result};

/// Position and its first four derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfileSample {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
    pub jerk: f64,
    pub snap: f64,
}

/// Rest-to-rest motion over a fixed duration: ramp up, cruise, ramp down.
///
/// The ramps follow the septic smoothstep, so velocity, acceleration, jerk
/// and snap are all continuous and the first three vanish at both ends.
/// Outside `[0, duration]` the profile is held at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothTrapezoid {
    distance: f64,
    duration: f64,
    ramp: f64,
    cruise_speed: f64,
}

fn smoothstep(u: f64) -> [f64; 5] {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    [
        7.0 * u4 * u - 14.0 * u4 * u2 + 10.0 * u4 * u3 - 2.5 * u4 * u4,
        35.0 * u4 - 84.0 * u4 * u + 70.0 * u4 * u2 - 20.0 * u4 * u3,
        140.0 * u3 - 420.0 * u4 + 420.0 * u4 * u - 140.0 * u4 * u2,
        420.0 * u2 - 1680.0 * u3 + 2100.0 * u4 - 840.0 * u4 * u,
        840.0 * u - 5040.0 * u2 + 8400.0 * u3 - 4200.0 * u4,
    ]
}

impl SmoothTrapezoid {
    /// `ramp_fraction` is the share of the duration spent in each ramp.
    pub fn new(distance: f64, duration: f64, ramp_fraction: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::Domain(format!("duration must be positive, got {duration}")));
        }
        if !(ramp_fraction > 0.0 && ramp_fraction <= 0.5) {
            return Err(Error::Domain(format!(
                "ramp fraction must lie in (0, 0.5], got {ramp_fraction}"
            )));
        }
        if !distance.is_finite() {
            return Err(Error::Domain(format!("distance must be finite, got {distance}")));
        }
        Ok(SmoothTrapezoid {
            distance,
            duration,
            ramp: ramp_fraction * duration,
            cruise_speed: distance / ((1.0 - ramp_fraction) * duration),
        })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn cruise_speed(&self) -> f64 {
        self.cruise_speed
    }

    pub fn sample(&self, t: f64) -> ProfileSample {
        let (v, tr, d) = (self.cruise_speed, self.ramp, self.duration);
        if t <= 0.0 {
            return ProfileSample::default();
        }
        if t >= d {
            return ProfileSample {
                pos: self.distance,
                ..Default::default()
            };
        }
        if t < tr {
            let s = smoothstep(t / tr);
            ProfileSample {
                pos: v * tr * s[0],
                vel: v * s[1],
                acc: v * s[2] / tr,
                jerk: v * s[3] / (tr * tr),
                snap: v * s[4] / (tr * tr * tr),
            }
        } else if t > d - tr {
            let s = smoothstep((d - t) / tr);
            ProfileSample {
                pos: self.distance - v * tr * s[0],
                vel: v * s[1],
                acc: -v * s[2] / tr,
                jerk: v * s[3] / (tr * tr),
                snap: -v * s[4] / (tr * tr * tr),
            }
        } else {
            ProfileSample {
                pos: v * tr / 2.0 + v * (t - tr),
                vel: v,
                ..Default::default()
            }
        }
    }
}
