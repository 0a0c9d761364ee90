//! Adaptive Dormand–Prince 5(4) integrator for complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right-hand side dy/dt = f(t, y).
pub trait ComplexSystem {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub initial_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-11,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            initial_step: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_calls: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, coeffs: &[f64], ks: &[Vec<Complex64>]) {
    out.copy_from_slice(y);
    for (c, k) in coeffs.iter().zip(ks) {
        if *c == 0.0 {
            continue;
        }
        let w = h * c;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += ki * w;
        }
    }
}

/// Integrates from `t0` over every time in `checkpoints` (ascending, ≥ t0), landing on each
/// exactly and handing the state to `on_checkpoint`. Returns the final state.
pub fn integrate<S, F>(
    system: &S,
    t0: f64,
    y0: &[Complex64],
    checkpoints: &[f64],
    control: &StepControl,
    mut on_checkpoint: F,
) -> Result<(Vec<Complex64>, Stats)>
where
    S: ComplexSystem + ?Sized,
    F: FnMut(f64, &[Complex64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut stats = Stats::default();
    let mut ks: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut y_new = vec![Complex64::new(0.0, 0.0); n];
    let mut h = control.initial_step.min(control.max_step);

    system.rhs(t, &y, &mut ks[0]);
    stats.rhs_calls += 1;

    for &target in checkpoints {
        if target < t - 1e-12 * t.abs().max(1.0) {
            return Err(Error::Propagation {
                time: t,
                reason: format!("checkpoint {target} lies before current time"),
            });
        }
        while t < target {
            let remaining = target - t;
            let mut last = false;
            let mut step = h.min(control.max_step);
            if step >= remaining * (1.0 - 1e-12) {
                step = remaining;
                last = true;
            }
            if step < control.min_step && !last {
                return Err(Error::Propagation {
                    time: t,
                    reason: format!("step size underflow ({step:.3e})"),
                });
            }

            let (k_head, k_tail) = ks.split_at_mut(1);
            let k1 = &k_head[0];
            combine(&mut tmp, &y, step, &A2, std::slice::from_ref(k1));
            system.rhs(t + C[1] * step, &tmp, &mut k_tail[0]);
            let stages = [&A3[..], &A4[..], &A5[..], &A6[..]];
            for (s, coeffs) in stages.iter().enumerate() {
                let stage = s + 2;
                let (done, rest) = ks.split_at_mut(stage);
                combine(&mut tmp, &y, step, coeffs, done);
                system.rhs(t + C[stage] * step, &tmp, &mut rest[0]);
            }
            {
                let (done, rest) = ks.split_at_mut(6);
                combine(&mut y_new, &y, step, &B, done);
                system.rhs(t + step, &y_new, &mut rest[0]);
            }
            stats.rhs_calls += 6;

            let mut err_sq = 0.0;
            for i in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (s, k) in ks.iter().enumerate() {
                    if E[s] != 0.0 {
                        e += k[i] * E[s];
                    }
                }
                let scale = control.atol + control.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() * step / scale).powi(2);
            }
            let err = (err_sq / n as f64).sqrt();
            if !err.is_finite() {
                return Err(Error::Propagation {
                    time: t,
                    reason: "non-finite state".into(),
                });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                ks.swap(0, 6);
                stats.accepted += 1;
                if !last {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
                if h < control.min_step {
                    return Err(Error::Propagation {
                        time: t,
                        reason: format!("step size underflow ({h:.3e})"),
                    });
                }
            }
        }
        on_checkpoint(t, &y)?;
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotation(f64);

    impl ComplexSystem for Rotation {
        fn rhs(&self, _t: f64, y: &[Complex64], dy: &mut [Complex64]) {
            dy[0] = Complex64::new(0.0, -self.0) * y[0];
        }
    }

    #[test]
    fn phase_rotation_is_accurate() {
        let sys = Rotation(3.0);
        let times: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let mut seen = Vec::new();
        let (y, _) = integrate(
            &sys,
            0.0,
            &[Complex64::new(1.0, 0.0)],
            &times,
            &StepControl::default(),
            |t, y| {
                seen.push((t, y[0]));
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), 10);
        let exact = Complex64::new(0.0, -30.0).exp();
        assert!((y[0] - exact).norm() < 1e-7);
        assert_eq!(seen[4].0, 5.0);
    }
}
