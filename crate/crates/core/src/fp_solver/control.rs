use crate::error::{Error, Result};

/// Prescribed control `ℓ(t)` for the first-moment constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSpec {
    /// `ℓ(t) = ell0 + rate·t`
    Affine { ell0: f64, rate: f64 },
    /// `ℓ(t) = offset + amplitude·sin(omega·t + phase)`
    Sinusoid {
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Piecewise-linear interpolation of `(t, ℓ)` nodes, held constant outside.
    Table { times: Vec<f64>, values: Vec<f64> },
}

impl ControlSpec {
    pub fn constant(ell: f64) -> Self {
        ControlSpec::Affine { ell0: ell, rate: 0.0 }
    }

    /// Linear ramp from `from` at `t = 0` to `to` at `t = t_end`.
    pub fn ramp(from: f64, to: f64, t_end: f64) -> Self {
        ControlSpec::Affine {
            ell0: from,
            rate: (to - from) / t_end,
        }
    }

    /// `ℓ(t) = −a·cos(πt/T)`: from `−a` to `a` on `[0, T]` with vanishing slope at both ends.
    pub fn cosine_ramp(amplitude: f64, t_end: f64) -> Self {
        ControlSpec::Sinusoid {
            offset: 0.0,
            amplitude,
            omega: std::f64::consts::PI / t_end,
            phase: -std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::Domain(
                "control table needs at least two (t, ell) nodes of equal length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("control table times must be strictly increasing".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::Domain("control table contains non-finite entries".into()));
        }
        Ok(ControlSpec::Table { times, values })
    }

    pub fn ell(&self, t: f64) -> f64 {
        match self {
            ControlSpec::Affine { ell0, rate } => ell0 + rate * t,
            ControlSpec::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => offset + amplitude * (omega * t + phase).sin(),
            ControlSpec::Table { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let k = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    pub fn ell_dot(&self, t: f64) -> f64 {
        match self {
            ControlSpec::Affine { rate, .. } => *rate,
            ControlSpec::Sinusoid {
                amplitude,
                omega,
                phase,
                ..
            } => amplitude * omega * (omega * t + phase).cos(),
            ControlSpec::Table { times, values } => {
                let n = times.len();
                if t < times[0] || t >= times[n - 1] {
                    return 0.0;
                }
                // right derivative at nodes
                let k = times.partition_point(|&s| s <= t) - 1;
                (values[k + 1] - values[k]) / (times[k + 1] - times[k])
            }
        }
    }

    pub fn ell_ddot(&self, t: f64) -> f64 {
        match self {
            ControlSpec::Affine { .. } | ControlSpec::Table { .. } => 0.0,
            ControlSpec::Sinusoid {
                amplitude,
                omega,
                phase,
                ..
            } => -amplitude * omega * omega * (omega * t + phase).sin(),
        }
    }

    /// Same control run `c` times faster: `ℓ̃(t) = ℓ(ct)`.
    pub fn time_scaled(&self, c: f64) -> Self {
        match self {
            ControlSpec::Affine { ell0, rate } => ControlSpec::Affine {
                ell0: *ell0,
                rate: rate * c,
            },
            ControlSpec::Sinusoid {
                offset,
                amplitude,
                omega,
                phase,
            } => ControlSpec::Sinusoid {
                offset: *offset,
                amplitude: *amplitude,
                omega: omega * c,
                phase: *phase,
            },
            ControlSpec::Table { times, values } => ControlSpec::Table {
                times: times.iter().map(|t| t / c).collect(),
                values: values.clone(),
            },
        }
    }

    /// Kinks of a table control (where `ℓ̇` jumps); empty for smooth controls.
    pub fn kinks(&self) -> &[f64] {
        match self {
            ControlSpec::Table { times, .. } => times,
            _ => &[],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_ramp_endpoints() {
        let c = ControlSpec::cosine_ramp(1.6, 16.0);
        assert!((c.ell(0.0) + 1.6).abs() < 1e-15);
        assert!((c.ell(16.0) - 1.6).abs() < 1e-12);
        assert!(c.ell_dot(0.0).abs() < 1e-15);
        assert!((c.ell_dot(8.0) - 1.6 * std::f64::consts::PI / 16.0).abs() < 1e-14);
    }

    #[test]
    fn sinusoid_derivatives_match_differences() {
        let c = ControlSpec::Sinusoid {
            offset: 0.3,
            amplitude: 1.2,
            omega: 0.7,
            phase: 0.4,
        };
        let e = 1e-5;
        for t in [0.0, 1.3, 4.2] {
            assert!(((c.ell(t + e) - c.ell(t - e)) / (2.0 * e) - c.ell_dot(t)).abs() < 1e-9);
            assert!(((c.ell_dot(t + e) - c.ell_dot(t - e)) / (2.0 * e) - c.ell_ddot(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn table_interpolates_and_holds() {
        let c = ControlSpec::table(vec![0.0, 1.0, 3.0], vec![-1.0, 1.0, 0.0]).unwrap();
        assert_eq!(c.ell(0.5), 0.0);
        assert_eq!(c.ell(2.0), 0.5);
        assert_eq!(c.ell(5.0), 0.0);
        assert_eq!(c.ell_dot(0.5), 2.0);
        assert_eq!(c.ell_dot(1.0), -0.5);
        assert_eq!(c.ell_dot(4.0), 0.0);
        assert!(ControlSpec::table(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn time_scaling_commutes_with_evaluation() {
        let controls = [
            ControlSpec::ramp(-1.6, 1.6, 10.0),
            ControlSpec::cosine_ramp(1.6, 10.0),
            ControlSpec::table(vec![0.0, 2.0, 4.0], vec![-1.0, 1.5, -1.0]).unwrap(),
        ];
        for c in &controls {
            let s = c.time_scaled(2.0);
            for t in [0.0, 0.7, 1.9, 3.3] {
                assert!((s.ell(t) - c.ell(2.0 * t)).abs() < 1e-14);
            }
        }
    }
}
