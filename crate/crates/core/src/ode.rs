//! Classical fixed-step fourth-order Runge-Kutta.

use alloc::vec::Vec;

/// A first-order system dy/dt = f(t, y) over real state vectors.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

/// RK4 stepper with preallocated stage buffers.
#[derive(Clone, Debug)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        let z = alloc::vec![0.0; dim];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advances `y` from t to t + h in place.
    pub fn step<S: OdeSystem + ?Sized>(&mut self, sys: &S, t: f64, h: f64, y: &mut [f64]) {
        let half = 0.5 * h;
        sys.rhs(t, y, &mut self.k1);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k1) {
            *tmp = y + half * k;
        }
        sys.rhs(t + half, &self.tmp, &mut self.k2);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k2) {
            *tmp = y + half * k;
        }
        sys.rhs(t + half, &self.tmp, &mut self.k3);
        for ((tmp, y), k) in self.tmp.iter_mut().zip(y.iter()).zip(&self.k3) {
            *tmp = y + h * k;
        }
        sys.rhs(t + h, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for (i, y) in y.iter_mut().enumerate() {
            *y += sixth * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }

    /// Integrates from `t0` to `t1` with the smallest number of equal steps
    /// not exceeding `max_step`, calling `observe(t, y)` after every step.
    /// Returns the number of steps taken.
    pub fn integrate<S, O>(
        &mut self,
        sys: &S,
        t0: f64,
        t1: f64,
        max_step: f64,
        y: &mut [f64],
        mut observe: O,
    ) -> usize
    where
        S: OdeSystem + ?Sized,
        O: FnMut(f64, &[f64]),
    {
        let n = steps_for(t1 - t0, max_step);
        if n == 0 {
            return 0;
        }
        let h = (t1 - t0) / n as f64;
        for i in 0..n {
            let t = t0 + i as f64 * h;
            self.step(sys, t, h, y);
            observe(t0 + (i + 1) as f64 * h, y);
        }
        n
    }
}

/// Number of equal steps of at most `max_step` covering `span`.
pub fn steps_for(span: f64, max_step: f64) -> usize {
    if span <= 0.0 {
        return 0;
    }
    let n = libm::ceil(span / max_step);
    // Guard against ceil rounding up an exact multiple.
    let n = if (n - 1.0) * max_step >= span * (1.0 - 1e-12) && n > 1.0 {
        n - 1.0
    } else {
        n
    };
    n as usize
}
