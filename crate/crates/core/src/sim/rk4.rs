use crate::error::{Error, Result};

/// Classical fourth-order Runge-Kutta with reusable stage buffers.
///
/// The derivative callback receives the stage time, so inputs can either be
/// evaluated at each stage or captured once and held over the step.
#[derive(Debug, Clone, Default)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn resize(&mut self, dim: usize) {
        if self.k1.len() != dim {
            for buf in [
                &mut self.k1,
                &mut self.k2,
                &mut self.k3,
                &mut self.k4,
                &mut self.tmp,
            ] {
                buf.clear();
                buf.resize(dim, 0.0);
            }
        }
    }

    /// Advances `x` from `t` to `t + dt` in place.
    pub fn step<F>(&mut self, t: f64, dt: f64, x: &mut [f64], mut f: F) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let dim = x.len();
        self.resize(dim);
        let half = 0.5 * dt;

        f(t, x, &mut self.k1);
        for i in 0..dim {
            self.tmp[i] = x[i] + half * self.k1[i];
        }
        f(t + half, &self.tmp, &mut self.k2);
        for i in 0..dim {
            self.tmp[i] = x[i] + half * self.k2[i];
        }
        f(t + half, &self.tmp, &mut self.k3);
        for i in 0..dim {
            self.tmp[i] = x[i] + dt * self.k3[i];
        }
        f(t + dt, &self.tmp, &mut self.k4);

        let finite = [&self.k1, &self.k2, &self.k3, &self.k4]
            .iter()
            .all(|k| k.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(Error::NonFinite { t });
        }

        let sixth = dt / 6.0;
        for i in 0..dim {
            x[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

/// One-shot convenience wrapper around [`Rk4::step`].
pub fn rk4_step<F>(f: F, t: f64, x: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = x.to_vec();
    Rk4::new(x.len()).step(t, dt, &mut out, f)?;
    Ok(out)
}
