//! Explicit Runge–Kutta 8(5,3) stepper with PI step-size control,
//! compensated state summation and a 7th-order dense output.

use super::tableau::{A, B, C, D, E3, E5, STAGES, STAGES_EXTENDED};
use crate::error::{Error, Result};

/// A first-order system `y' = f(x, y)` of fixed dimension.
pub trait System<const N: usize> {
    fn rhs(&self, x: f64, y: &[f64; N], dy: &mut [f64; N]);

    /// Per-component error scale for a step from `y0` to `y1`.
    fn error_scale(&self, y0: &[f64; N], y1: &[f64; N], rtol: f64, atol: f64) -> [f64; N] {
        let mut sc = [0.0; N];
        for n in 0..N {
            sc[n] = atol + rtol * y0[n].abs().max(y1[n].abs());
        }
        sc
    }
}

impl<const N: usize, F> System<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn rhs(&self, x: f64, y: &[f64; N], dy: &mut [f64; N]) {
        self(x, y, dy)
    }
}

/// An accepted step together with its stages.
#[derive(Clone, Debug)]
pub struct Step<const N: usize> {
    pub x0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub y1: [f64; N],
    pub f1: [f64; N],
    k: Box<[[f64; N]; STAGES_EXTENDED]>,
}

impl<const N: usize> Step<N> {
    pub fn x1(&self) -> f64 {
        self.x0 + self.h
    }
}

/// Continuous extension over one step.
#[derive(Clone, Debug)]
pub struct Dense<const N: usize> {
    pub x0: f64,
    pub h: f64,
    y0: [f64; N],
    coeffs: [[f64; N]; 7],
}

impl<const N: usize> Dense<N> {
    pub fn x1(&self) -> f64 {
        self.x0 + self.h
    }

    pub fn eval(&self, x: f64) -> [f64; N] {
        let s = (x - self.x0) / self.h;
        let mut y = [0.0; N];
        for (i, f) in self.coeffs.iter().rev().enumerate() {
            let w = if i % 2 == 0 { s } else { 1.0 - s };
            for n in 0..N {
                y[n] = (y[n] + f[n]) * w;
            }
        }
        for n in 0..N {
            y[n] += self.y0[n];
        }
        y
    }
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct Dop853<const N: usize> {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub safety: f64,
    /// PI controller weight on the previous error.
    pub beta: f64,
    pub compensated: bool,
    pub stats: Stats,
    err_prev: f64,
    carry: [f64; N],
}

impl<const N: usize> Dop853<N> {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max: f64::INFINITY,
            safety: 0.9,
            beta: 0.04,
            compensated: true,
            stats: Stats::default(),
            err_prev: 1e-4,
            carry: [0.0; N],
        }
    }

    /// Forget the compensation carry and controller memory, e.g. after the
    /// state was modified outside the stepper.
    pub fn reset(&mut self) {
        self.err_prev = 1e-4;
        self.carry = [0.0; N];
    }

    fn stages<S: System<N>>(
        &mut self,
        sys: &S,
        x: f64,
        y: &[f64; N],
        f: &[f64; N],
        h: f64,
    ) -> (Box<[[f64; N]; STAGES_EXTENDED]>, [f64; N]) {
        let mut k = Box::new([[0.0; N]; STAGES_EXTENDED]);
        k[0] = *f;
        let mut tmp = [0.0; N];
        for s in 1..STAGES {
            for n in 0..N {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][n];
                }
                tmp[n] = y[n] + h * acc;
            }
            sys.rhs(x + C[s] * h, &tmp, &mut k[s]);
        }
        self.stats.evaluations += STAGES - 1;
        let mut inc = [0.0; N];
        for n in 0..N {
            let mut acc = 0.0;
            for j in 0..STAGES {
                acc += B[j] * k[j][n];
            }
            inc[n] = h * acc;
        }
        (k, inc)
    }

    fn error_norm<S: System<N>>(&self, sys: &S, k: &[[f64; N]; STAGES_EXTENDED], y: &[f64; N], y1: &[f64; N], h: f64) -> f64 {
        let scale = sys.error_scale(y, y1, self.rtol, self.atol);
        let mut e5 = 0.0;
        let mut e3 = 0.0;
        for n in 0..N {
            let sc = scale[n];
            let mut a5 = 0.0;
            let mut a3 = 0.0;
            for j in 0..=STAGES {
                a5 += E5[j] * k[j][n];
                a3 += E3[j] * k[j][n];
            }
            e5 += (a5 / sc).powi(2);
            e3 += (a3 / sc).powi(2);
        }
        if e5 == 0.0 && e3 == 0.0 {
            return 0.0;
        }
        h.abs() * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
    }

    /// Initial step-size guess from the first two derivatives.
    pub fn initial_step<S: System<N>>(&mut self, sys: &S, x: f64, y: &[f64; N], f: &[f64; N]) -> f64 {
        let sc = |v: f64| self.atol + self.rtol * v.abs();
        let d0 = (y.iter().map(|v| (v / sc(*v)).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d1 = (y.iter().zip(f).map(|(v, d)| (d / sc(*v)).powi(2)).sum::<f64>() / N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let mut y1 = [0.0; N];
        for n in 0..N {
            y1[n] = y[n] + h0 * f[n];
        }
        let mut f1 = [0.0; N];
        sys.rhs(x + h0, &y1, &mut f1);
        self.stats.evaluations += 1;
        let d2 = (y
            .iter()
            .zip(f.iter().zip(&f1))
            .map(|(v, (a, b))| ((b - a) / sc(*v)).powi(2))
            .sum::<f64>()
            / N as f64)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Advance by one accepted step starting with trial size `h`. Returns the
    /// step and the proposed size of the next one.
    pub fn step<S: System<N>>(
        &mut self,
        sys: &S,
        x: f64,
        y: &[f64; N],
        f: &[f64; N],
        mut h: f64,
    ) -> Result<(Step<N>, f64)> {
        let order_exp = 1.0 / 8.0 - 0.75 * self.beta;
        let mut rejected_last = false;
        loop {
            h = h.min(self.h_max);
            if !(h > 1e-15 * x.abs().max(1.0)) || !h.is_finite() {
                return Err(Error::StepCollapse { t: x });
            }
            let (mut k, inc) = self.stages(sys, x, y, f, h);
            let mut y1 = [0.0; N];
            let mut carry = self.carry;
            for n in 0..N {
                if self.compensated {
                    let d = inc[n] - carry[n];
                    let s = y[n] + d;
                    carry[n] = (s - y[n]) - d;
                    y1[n] = s;
                } else {
                    y1[n] = y[n] + inc[n];
                }
            }
            let finite = y1.iter().all(|v| v.is_finite());
            let mut f1 = [0.0; N];
            if finite {
                sys.rhs(x + h, &y1, &mut f1);
                self.stats.evaluations += 1;
            }
            let err = if finite && f1.iter().all(|v| v.is_finite()) {
                k[STAGES] = f1;
                self.error_norm(sys, &k, y, &y1, h)
            } else {
                f64::INFINITY
            };
            if err <= 1.0 {
                self.stats.accepted += 1;
                let err = err.max(1e-10);
                let mut fac = self.safety * err.powf(-order_exp) * self.err_prev.powf(self.beta);
                fac = fac.clamp(0.2, 10.0);
                if rejected_last {
                    fac = fac.min(1.0);
                }
                self.err_prev = err;
                self.carry = carry;
                let step = Step { x0: x, h, y0: *y, f0: *f, y1, f1, k };
                return Ok((step, h * fac));
            }
            self.stats.rejected += 1;
            rejected_last = true;
            let fac = if err.is_finite() {
                (self.safety * err.powf(-1.0 / 8.0)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h *= fac;
        }
    }

    /// Single step of exactly `h`, no error control. Used to land on a
    /// target abscissa inside an already accepted step.
    pub fn fixed_step<S: System<N>>(&mut self, sys: &S, x: f64, y: &[f64; N], f: &[f64; N], h: f64) -> Step<N> {
        let (mut k, inc) = self.stages(sys, x, y, f, h);
        let mut y1 = [0.0; N];
        for n in 0..N {
            y1[n] = y[n] + inc[n];
        }
        let mut f1 = [0.0; N];
        sys.rhs(x + h, &y1, &mut f1);
        self.stats.evaluations += 1;
        k[STAGES] = f1;
        Step { x0: x, h, y0: *y, f0: *f, y1, f1, k }
    }

    /// Continuous extension for an accepted step (three extra evaluations).
    pub fn dense<S: System<N>>(&mut self, sys: &S, step: &Step<N>) -> Dense<N> {
        let h = step.h;
        let mut k = step.k.clone();
        let mut tmp = [0.0; N];
        for s in STAGES + 1..STAGES_EXTENDED {
            for n in 0..N {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][n];
                }
                tmp[n] = step.y0[n] + h * acc;
            }
            let mut out = [0.0; N];
            sys.rhs(step.x0 + C[s] * h, &tmp, &mut out);
            k[s] = out;
        }
        self.stats.evaluations += STAGES_EXTENDED - STAGES - 1;
        let mut coeffs = [[0.0; N]; 7];
        for n in 0..N {
            let dy = step.y1[n] - step.y0[n];
            coeffs[0][n] = dy;
            coeffs[1][n] = h * step.f0[n] - dy;
            coeffs[2][n] = 2.0 * dy - h * (step.f1[n] + step.f0[n]);
            for (r, row) in D.iter().enumerate() {
                let mut acc = 0.0;
                for j in 0..STAGES_EXTENDED {
                    acc += row[j] * k[j][n];
                }
                coeffs[3 + r][n] = h * acc;
            }
        }
        Dense { x0: step.x0, h, y0: step.y0, coeffs }
    }
}
