//! Random search for objectives with a large relaxation gap on the
//! three-dimensional lifted set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conic::{ConicBackend, ConicError, RelaxationLevel};
use crate::cuts::form_from_row;
use crate::cuts::poly::LocalForm;
use crate::exact::objective_gap;
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Objective evaluations in total, each one exact and one relaxed solve.
    pub budget: usize,
    pub seed: u64,
    /// Share of the budget spent refining the best objectives found.
    pub refine_fraction: f64,
    /// Incumbents refined in parallel.
    pub climbers: usize,
    pub initial_step: f64,
    pub batch: usize,
    /// Objectives evaluated before any random draw; they count against the
    /// budget.
    pub starts: Vec<[f64; 9]>,
    /// Building blocks for random draws: unit objectives combined with
    /// nonnegative weights. Without them only Gaussian directions are drawn.
    pub pieces: Vec<[f64; 9]>,
    pub exec: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 4000,
            seed: 1,
            refine_fraction: 0.7,
            climbers: 2,
            initial_step: 0.05,
            batch: 32,
            starts: Vec::new(),
            pieces: Vec::new(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapSearch {
    pub gap: f64,
    /// Unit objective on `x1 x2 x3 X11 X22 X33 X12 X13 X23`.
    pub objective: [f64; 9],
    pub evaluations: usize,
    /// Evaluations whose solves failed; they are skipped.
    pub failures: usize,
}

/// Objective form of a coefficient vector in table order.
pub fn objective_form(c: &[f64; 9]) -> LocalForm {
    let mut row = [0.0; 10];
    row[..9].copy_from_slice(c);
    form_from_row(&row)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn unit(mut v: [f64; 9]) -> [f64; 9] {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Unit objective of a cut: its variable coefficients over their norm.
pub fn cut_objective(cut: &crate::cuts::LinearCut) -> [f64; 9] {
    let row = cut.row();
    unit(std::array::from_fn(|i| row[i]))
}

fn draw(rng: &mut ChaCha8Rng, pieces: &[[f64; 9]]) -> [f64; 9] {
    // a quarter of the draws stay Gaussian even when pieces are given
    if pieces.is_empty() || rng.random_range(0..4) == 0 {
        return unit(std::array::from_fn(|_| gaussian(rng)));
    }
    let mut v = [0.0; 9];
    for _ in 0..rng.random_range(1..=3) {
        let p = &pieces[rng.random_range(0..pieces.len())];
        let w: f64 = rng.random();
        v.iter_mut().zip(p).for_each(|(a, b)| *a += w * b);
    }
    unit(v)
}

#[derive(Clone, Copy)]
struct Climber {
    gap: f64,
    objective: [f64; 9],
    step: f64,
}

/// The configured starts, then random draws, then hill climbing from the best
/// few objectives with shrinking perturbations.
pub fn search_max_gap(
    level: &RelaxationLevel,
    config: &SearchConfig,
    backend: &dyn ConicBackend,
) -> Result<GapSearch, ConicError> {
    let budget = config.budget.max(1);
    let batch = config.batch.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let explore = ((budget as f64) * (1.0 - config.refine_fraction)).ceil().max(1.0) as usize;
    let mut pending = config.starts.iter().map(|s| unit(*s));
    let mut seen: Vec<([f64; 9], f64)> = Vec::new();
    let mut climbers: Vec<Climber> = Vec::new();
    let mut evaluations = 0;
    let mut failures = 0;
    let mut last_err = None;

    while evaluations < budget {
        let size = batch.min(budget - evaluations);
        let refining = evaluations >= explore && !climbers.is_empty();
        let mut cands: Vec<[f64; 9]> = pending.by_ref().take(size).collect();
        let mut owner: Vec<Option<usize>> = vec![None; cands.len()];
        while cands.len() < size {
            if refining {
                let k = cands.len() % climbers.len();
                let c = &climbers[k];
                let g: [f64; 9] = std::array::from_fn(|_| gaussian(&mut rng));
                cands.push(unit(std::array::from_fn(|i| c.objective[i] + c.step * g[i])));
                owner.push(Some(k));
            } else {
                cands.push(draw(&mut rng, &config.pieces));
                owner.push(None);
            }
        }
        let gaps = par::map(config.exec, &cands, |c| objective_gap(&objective_form(c), level, backend));
        evaluations += size;
        let mut improved = vec![false; climbers.len()];
        for ((c, g), o) in cands.into_iter().zip(gaps).zip(owner) {
            let g = match g {
                Ok(g) => g,
                Err(e) => {
                    failures += 1;
                    last_err = Some(e);
                    continue;
                }
            };
            match o {
                Some(k) if g > climbers[k].gap => {
                    climbers[k].gap = g;
                    climbers[k].objective = c;
                    if !improved[k] {
                        climbers[k].step *= 1.2;
                    }
                    improved[k] = true;
                }
                Some(_) => {}
                None => seen.push((c, g)),
            }
        }
        if refining {
            for (c, up) in climbers.iter_mut().zip(improved) {
                if !up {
                    c.step *= 0.95;
                }
            }
        } else if evaluations >= explore {
            seen.sort_by(|a, b| b.1.total_cmp(&a.1));
            climbers = seen
                .iter()
                .take(config.climbers.max(1))
                .map(|&(objective, gap)| Climber {
                    gap,
                    objective,
                    step: config.initial_step,
                })
                .collect();
        }
    }
    let best = climbers
        .iter()
        .map(|c| (c.objective, c.gap))
        .chain(seen.iter().copied())
        .max_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((objective, gap)) => Ok(GapSearch {
            gap,
            objective,
            evaluations,
            failures,
        }),
        None => Err(last_err.expect("every evaluation failed")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::ClarabelBackend;

    #[test]
    fn zero_objective_has_zero_gap() {
        let g = objective_gap(&LocalForm::default(), &RelaxationLevel::psd_rlt(), &ClarabelBackend::default())
            .unwrap();
        assert!(g.abs() < 1e-7);
    }

    #[test]
    fn small_search_is_deterministic() {
        let cfg = SearchConfig {
            budget: 8,
            batch: 4,
            ..Default::default()
        };
        let backend = ClarabelBackend::default();
        let a = search_max_gap(&RelaxationLevel::psd_rlt(), &cfg, &backend).unwrap();
        let b = search_max_gap(&RelaxationLevel::psd_rlt(), &cfg, &backend).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 8);
        assert_eq!(a.failures, 0);
        assert!(a.gap >= -1e-6 && a.gap <= 0.0625 + 1e-4);
    }
}
