//! Bounded derivative-free local search (Nelder-Mead simplex).
//!
//! Parameters live on a torus: each coordinate has a period and is wrapped
//! into `[0, period)` before evaluation, which keeps angle parameters inside
//! their bounds without hard constraint handling. The search tracks the best
//! point ever evaluated, so the result is never worse than the starting
//! point.

/// Standard simplex coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Maximum number of objective evaluations.
    pub max_evals: usize,
    /// Stop when the simplex value spread falls below this.
    pub f_tol: f64,
    /// Initial simplex edge length.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 400,
            f_tol: 1e-10,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    /// Best point found, wrapped into bounds.
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// True when the search stopped on the evaluation budget rather than
    /// convergence; the best-so-far point is still returned.
    pub budget_exhausted: bool,
}

pub fn wrap(x: &[f64], periods: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(periods)
        .map(|(v, p)| {
            let w = v.rem_euclid(*p);
            if w.is_nan() {
                0.0
            } else {
                w
            }
        })
        .collect()
}

impl NelderMead {
    pub fn minimize(
        &self,
        mut f: impl FnMut(&[f64]) -> f64,
        x0: &[f64],
        periods: &[f64],
    ) -> MinimizeResult {
        assert_eq!(x0.len(), periods.len());
        let dim = x0.len();
        let mut evals = 0usize;
        let mut best_x = wrap(x0, periods);
        let mut best_value = f64::INFINITY;

        let mut eval =
            |x: &[f64], evals: &mut usize, best_x: &mut Vec<f64>, best_value: &mut f64| {
                let wrapped = wrap(x, periods);
                let v = f(&wrapped);
                *evals += 1;
                if v < *best_value {
                    *best_value = v;
                    *best_x = wrapped;
                }
                v
            };

        // Initial simplex: the start point plus one step along each axis.
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let v0 = eval(x0, &mut evals, &mut best_x, &mut best_value);
        simplex.push((x0.to_vec(), v0));
        for i in 0..dim {
            let mut x = x0.to_vec();
            x[i] += self.initial_step * periods[i].min(1.0);
            let v = eval(&x, &mut evals, &mut best_x, &mut best_value);
            simplex.push((x, v));
        }

        let mut budget_exhausted = false;
        loop {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let spread = simplex[dim].1 - simplex[0].1;
            if spread.abs() <= self.f_tol {
                break;
            }
            if evals >= self.max_evals {
                budget_exhausted = true;
                break;
            }

            // Centroid of all but the worst vertex.
            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi;
                }
            }
            for c in &mut centroid {
                *c /= dim as f64;
            }

            let worst = simplex[dim].clone();
            let lerp = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = lerp(REFLECT);
            let vr = eval(&xr, &mut evals, &mut best_x, &mut best_value);
            if vr < simplex[0].1 {
                let xe = lerp(EXPAND);
                let ve = eval(&xe, &mut evals, &mut best_x, &mut best_value);
                simplex[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
            } else if vr < simplex[dim - 1].1 {
                simplex[dim] = (xr, vr);
            } else {
                let (xc, vc) = if vr < worst.1 {
                    let xc = lerp(CONTRACT);
                    let vc = eval(&xc, &mut evals, &mut best_x, &mut best_value);
                    (xc, vc)
                } else {
                    let xc = lerp(-CONTRACT);
                    let vc = eval(&xc, &mut evals, &mut best_x, &mut best_value);
                    (xc, vc)
                };
                if vc < worst.1.min(vr) {
                    simplex[dim] = (xc, vc);
                } else {
                    // Shrink toward the best vertex.
                    let anchor = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        for (xi, ai) in vertex.0.iter_mut().zip(&anchor) {
                            *xi = ai + SHRINK * (*xi - ai);
                        }
                        vertex.1 =
                            eval(&vertex.0.clone(), &mut evals, &mut best_x, &mut best_value);
                    }
                }
            }
        }

        MinimizeResult {
            x: best_x,
            value: best_value,
            evals,
            budget_exhausted,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn minimizes_shifted_cosine() {
        // min of 1 - cos(x - 1.3) on the circle is at x = 1.3.
        let nm = NelderMead {
            max_evals: 500,
            ..Default::default()
        };
        let r = nm.minimize(|x| 1.0 - (x[0] - 1.3).cos(), &[0.1], &[TAU]);
        assert_abs_diff_eq!(r.x[0], 1.3, epsilon = 1e-4);
        assert!(r.value < 1e-8);
    }

    #[test]
    fn minimizes_two_dimensional_bowl() {
        let nm = NelderMead {
            max_evals: 2000,
            ..Default::default()
        };
        let r = nm.minimize(
            |x| (x[0] - 2.0).powi(2) + 3.0 * (x[1] - 1.0).powi(2),
            &[0.5, 0.5],
            &[TAU, TAU],
        );
        assert_abs_diff_eq!(r.x[0], 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 1e-3);
    }

    #[test]
    fn never_worse_than_start() {
        let nm = NelderMead {
            max_evals: 3,
            ..Default::default()
        };
        let start = [0.7, 4.0];
        let f = |x: &[f64]| x[0].sin() + x[1].cos();
        let r = nm.minimize(f, &start, &[TAU, TAU]);
        assert!(r.value <= f(&start) + 1e-15);
        assert!(r.budget_exhausted);
    }

    #[test]
    fn wraps_into_bounds() {
        let w = wrap(&[-0.5, 7.0], &[TAU, TAU]);
        assert!(w
            .iter()
            .zip([TAU, TAU])
            .all(|(&x, p)| (0.0..p).contains(&x)));
        assert_abs_diff_eq!(w[0], TAU - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn respects_eval_budget() {
        let mut count = 0usize;
        let nm = NelderMead {
            max_evals: 50,
            f_tol: 0.0,
            ..Default::default()
        };
        let _ = nm.minimize(
            |x| {
                count += 1;
                x.iter().map(|v| v * v).sum()
            },
            &[1.0, 1.0, 1.0],
            &[TAU, TAU, TAU],
        );
        // A few evals past the cap are allowed within one iteration.
        assert!(count <= 60, "count {count}");
    }
}
