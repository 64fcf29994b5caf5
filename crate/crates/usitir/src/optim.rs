//! Derivative-free simplex (Nelder-Mead) minimization with seeded
//! multi-start, used by the generic CT search and the brute-force oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Single Nelder-Mead descent from `start` with the given initial step.
pub fn nelder_mead<F>(f: &F, start: &[f64], step: f64, max_evals: usize, shrink_tol: f64) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    assert!(n > 0, "objective must have at least one parameter");
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(start, &mut evals);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size: f64 = (0..n)
            .map(|i| (simplex[n].0[i] - simplex[0].0[i]).abs())
            .fold(0.0, f64::max);
        if spread.abs() < shrink_tol && size < shrink_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();

        let reflect: Vec<f64> = (0..n)
            .map(|i| centroid[i] + alpha * (centroid[i] - worst.0[i]))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n)
                .map(|i| centroid[i] + gamma * (reflect[i] - centroid[i]))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|i| centroid[i] + rho * (worst.0[i] - centroid[i]))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..n)
                        .map(|i| best[i] + sigma * (entry.0[i] - best[i]))
                        .collect();
                    let v = eval(&x, &mut evals);
                    *entry = (x, v);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult {
        x: simplex[0].0.clone(),
        value: simplex[0].1,
        evaluations: evals,
        converged,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MultiStartConfig {
    pub restarts: usize,
    pub max_evals_per_restart: usize,
    pub shrink_tol: f64,
    /// Coefficient box [-bound, bound] for seeding restarts.
    pub seed_bound: f64,
    pub initial_step: f64,
}

impl Default for MultiStartConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_evals_per_restart: 2000,
            shrink_tol: 1e-10,
            seed_bound: 50.0,
            initial_step: 0.5,
        }
    }
}

/// Multi-start Nelder-Mead: restarts run in parallel with per-restart RNGs,
/// merged by lowest value with the lowest restart index breaking ties.
pub fn multistart_minimize<F>(f: &F, n_params: usize, seed: u64, cfg: &MultiStartConfig) -> SimplexResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let results: Vec<(usize, SimplexResult)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let start: Vec<f64> = if r == 0 {
                vec![0.0; n_params]
            } else {
                (0..n_params)
                    .map(|_| rng.gen_range(-cfg.seed_bound..cfg.seed_bound))
                    .collect()
            };
            let step = if r == 0 { cfg.initial_step } else { cfg.initial_step * (1.0 + r as f64 % 3.0) };
            (r, nelder_mead(f, &start, step, cfg.max_evals_per_restart, cfg.shrink_tol))
        })
        .collect();

    results
        .into_iter()
        .min_by(|(ra, a), (rb, b)| a.value.total_cmp(&b.value).then(ra.cmp(rb)))
        .map(|(_, r)| r)
        .expect("at least one restart")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| x.iter().map(|v| (v - 1.5) * (v - 1.5)).sum::<f64>();
        let r = nelder_mead(&f, &[0.0, 0.0, 0.0], 0.5, 2000, 1e-12);
        assert!(r.value < 1e-16);
        for v in r.x {
            assert!((v - 1.5).abs() < 1e-7);
        }
    }

    #[test]
    fn multistart_finds_global_minimum() {
        // two basins; global at x = -2 with value -1
        let f = |x: &[f64]| {
            let x = x[0];
            ((x + 2.0) * (x + 2.0) - 1.0).min((x - 3.0) * (x - 3.0) - 0.5)
        };
        let r = multistart_minimize(&f, 1, 42, &MultiStartConfig { seed_bound: 10.0, ..Default::default() });
        assert!((r.value + 1.0).abs() < 1e-8);
    }

    #[test]
    fn deterministic_per_seed() {
        let f = |x: &[f64]| x.iter().map(|v| v.cos() + 0.01 * v * v).sum::<f64>();
        let a = multistart_minimize(&f, 2, 7, &MultiStartConfig::default());
        let b = multistart_minimize(&f, 2, 7, &MultiStartConfig::default());
        assert_eq!(a.x, b.x);
        assert_eq!(a.value, b.value);
    }
}
