//! Derivative-free Nelder–Mead minimization for small dimensions.

/// Stopping rules and initial simplex size.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ...and the simplex diameter falls below this.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Rebuild the simplex around the best vertex this many times after
    /// convergence, which gets past spurious stalls on kinked objectives.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            f_tol: 1e-13,
            x_tol: 1e-10,
            max_evals: 20_000,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut best = self.run(&mut f, x0, self.initial_step);
        let mut step = self.initial_step;
        for _ in 0..self.restarts {
            step *= 0.1;
            let next = self.run(&mut f, &best.x, step.max(self.x_tol * 10.0));
            let improved = next.value < best.value - self.f_tol;
            let evals = best.evals + next.evals;
            if next.value <= best.value {
                best = Minimum { evals, ..next };
            } else {
                best.evals = evals;
            }
            if !improved {
                break;
            }
        }
        best
    }

    fn run<F>(&self, f: &mut F, x0: &[f64], step: f64) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += if p[i].abs() > 1e-12 { step * p[i].abs().max(0.5) } else { step };
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| nan_to_inf(f(p))).collect();
        let mut evals = n + 1;
        let mut converged = false;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = vals[n] - vals[0];
            let diameter = pts[1..]
                .iter()
                .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread.abs() <= self.f_tol && diameter <= self.x_tol {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|d| pts[..n].iter().map(|p| p[d]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&pts[n])
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let xr = along(-1.0);
            let fr = nan_to_inf(f(&xr));
            evals += 1;
            if fr < vals[0] {
                let xe = along(-2.0);
                let fe = nan_to_inf(f(&xe));
                evals += 1;
                if fe < fr {
                    pts[n] = xe;
                    vals[n] = fe;
                } else {
                    pts[n] = xr;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = xr;
                vals[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < vals[n] {
                let x = along(-0.5);
                let v = nan_to_inf(f(&x));
                (x, v)
            } else {
                let x = along(0.5);
                let v = nan_to_inf(f(&x));
                (x, v)
            };
            evals += 1;
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
                continue;
            }
            // shrink toward the best vertex
            for i in 1..=n {
                let p: Vec<f64> = pts[i]
                    .iter()
                    .zip(&pts[0])
                    .map(|(x, b)| b + 0.5 * (x - b))
                    .collect();
                vals[i] = nan_to_inf(f(&p));
                pts[i] = p;
            }
            evals += n;
        }

        let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
        Minimum {
            x: pts[best].clone(),
            value: vals[best],
            evals,
            converged,
        }
    }
}

fn nan_to_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = NelderMead::default().minimize(rosen, &[-1.2, 1.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn handles_kinked_objective() {
        let f = |x: &[f64]| (x[0] - 0.3).abs() + 2.0 * (x[1] + 0.2).abs() + (x[2] - x[0]).abs();
        let m = NelderMead::default().minimize(f, &[1.0, 1.0, 1.0]);
        assert!(m.value < 1e-8, "{m:?}");
    }

    #[test]
    fn one_dimensional() {
        let m = NelderMead::default().minimize(|x| (x[0] - 2.0).powi(2), &[0.0]);
        assert!((m.x[0] - 2.0).abs() < 1e-6);
    }
}
