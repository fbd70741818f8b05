use std::path::PathBuf;

/// Errors raised anywhere in the simulator.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Pitch approached ±π/2 where the Euler-rate map is singular.
    #[error("gimbal lock: pitch {theta} rad{}", time_suffix(.time))]
    GimbalLock { theta: f64, time: Option<f64> },

    /// The Jacobi eigensolver did not reach its off-diagonal threshold.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    Convergence { sweeps: usize, off_norm: f64 },

    /// The network weight policy cannot serve the requested operation.
    #[error("weight policy error: {0}")]
    Policy(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: String, actual: String },

    /// The communication graph is not connected.
    #[error("network is disconnected: {0}")]
    Disconnected(String),

    /// A control schedule was queried outside the interval it covers.
    #[error("control schedule undefined at t = {t} s (covers [0, {duration}] s)")]
    ScheduleGap { t: f64, duration: f64 },

    /// A rotor speed left the admissible range [0, ω_max].
    #[error("rotor {rotor} speed {omega} rad/s exceeds limit {omega_max} rad/s at t = {t} s")]
    Saturation {
        rotor: usize,
        omega: f64,
        omega_max: f64,
        t: f64,
    },

    /// No admissible control realises the requested maneuver.
    #[error("infeasible maneuver: {0}")]
    Infeasible(String),

    #[error("{}:{line}: key `{key}`: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        key: String,
        message: String,
    },

    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn time_suffix(time: &Option<f64>) -> String {
    match time {
        Some(t) => format!(" at t = {t} s"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
