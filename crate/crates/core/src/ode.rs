//! Dormand-Prince 5(4) embedded Runge-Kutta integrator.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand-Prince step of size `h` from `(t, y)` with `f0 = f(t, y)`.
/// Returns the fifth-order state, its derivative and the error estimate.
pub fn dopri_step<const N: usize>(
    f: &mut impl FnMut(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N], [f64; N]) {
    let mut k = [[0.0; N]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        if s == 6 {
            // stage 7 is evaluated at the new point (FSAL)
            k[6] = f(t + h, &ys);
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            }
            return (ys, k[6], err);
        }
        k[s] = f(t + C[s] * h, &ys);
    }
    unreachable!()
}

/// Adaptive integrator holding the current state.
pub struct Dopri5<F, const N: usize>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    f: F,
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
    h: f64,
    opts: OdeOptions,
    pub steps: usize,
    pub rejected: usize,
}

/// The last accepted step, kept for Hermite interpolation.
#[derive(Clone, Copy, Debug)]
pub struct StepRecord<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> StepRecord<N> {
    /// Cubic Hermite interpolant inside the step.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    /// `direction` is the sign of the integration direction.
    pub fn new(mut f: F, t0: f64, y0: [f64; N], direction: f64, opts: OdeOptions) -> Self {
        let dy = f(t0, &y0);
        let sign = if direction < 0.0 { -1.0 } else { 1.0 };
        let h = opts
            .h_init
            .map(|h| h.abs())
            .unwrap_or_else(|| initial_step(&y0, &dy, &opts));
        Self {
            f,
            t: t0,
            y: y0,
            dy,
            h: sign * h,
            opts,
            steps: 0,
            rejected: 0,
        }
    }

    pub fn rhs(&mut self, t: f64, y: &[f64; N]) -> [f64; N] {
        (self.f)(t, y)
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Take one accepted step, never passing `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<StepRecord<N>> {
        let sign = self.h.signum();
        loop {
            if self.steps + self.rejected >= self.opts.max_steps {
                return Err(Error::Integration(format!("step budget exhausted at t = {:e}", self.t)));
            }
            let mut h = self.h.abs().min(self.opts.h_max) * sign;
            let remaining = t_limit - self.t;
            let clipped = h.abs() >= remaining.abs();
            if clipped {
                h = remaining;
            }
            if h.abs() < self.opts.h_min * (1.0 + self.t.abs()) && !clipped {
                return Err(Error::Integration(format!(
                    "step size underflow at t = {:e} (stiff or singular)",
                    self.t
                )));
            }
            let (y1, f1, err) = dopri_step(&mut self.f, self.t, &self.y, &self.dy, h);
            let mut acc = 0.0;
            for i in 0..N {
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y1[i].abs());
                acc += (err[i] / sc).powi(2);
            }
            let en = (acc / N as f64).sqrt();
            if !en.is_finite() {
                self.h = 0.2 * h;
                self.rejected += 1;
                continue;
            }
            let fac = (0.9 * en.powf(-0.2)).clamp(0.2, 5.0);
            if en <= 1.0 {
                let rec = StepRecord {
                    t0: self.t,
                    y0: self.y,
                    f0: self.dy,
                    t1: self.t + h,
                    y1,
                    f1,
                };
                self.t = if clipped { t_limit } else { self.t + h };
                self.y = y1;
                self.dy = f1;
                self.steps += 1;
                if !clipped || fac < 1.0 {
                    self.h = h * fac;
                }
                return Ok(rec);
            }
            self.h = h * fac.min(1.0);
            self.rejected += 1;
        }
    }

    /// Integrate exactly to `t_end`.
    pub fn integrate_to(&mut self, t_end: f64) -> Result<()> {
        while (t_end - self.t) * self.h.signum() > 0.0 {
            self.step(t_end)?;
        }
        Ok(())
    }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], opts: &OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(opts.h_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let mut ode = Dopri5::new(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 1.0, OdeOptions::with_tol(1e-12));
        ode.integrate_to(5.0).unwrap();
        assert!((ode.y[0] - (-5f64).exp()).abs() < 1e-11);
        assert_eq!(ode.t, 5.0);
    }

    #[test]
    fn harmonic_oscillator_backward_and_forward() {
        let f = |_: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut ode = Dopri5::new(f, 0.0, [1.0, 0.0], 1.0, OdeOptions::with_tol(1e-12));
        ode.integrate_to(10.0).unwrap();
        let mut back = Dopri5::new(f, 10.0, ode.y, -1.0, OdeOptions::with_tol(1e-12));
        back.integrate_to(0.0).unwrap();
        assert!((back.y[0] - 1.0).abs() < 1e-9 && back.y[1].abs() < 1e-9);
    }

    #[test]
    fn hermite_interpolant_is_third_order_inside_a_step() {
        let f = |t: f64, _: &[f64; 1]| [t.cos()];
        let mut ode = Dopri5::new(f, 0.0, [0.0], 1.0, OdeOptions::with_tol(1e-12));
        let rec = ode.step(1.0).unwrap();
        let tm = 0.5 * (rec.t0 + rec.t1);
        assert!((rec.interpolate(tm)[0] - tm.sin()).abs() < 1e-10);
    }
}
