//! Exact global maximisation for small `n` by enumerating the `3^n` faces of
//! the box and the stationary points of the objective on each face.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::BoxQpInstance;
use crate::par::{self, Execution};

/// Largest dimension accepted by [`solve_global`].
pub const MAX_ORACLE_DIM: usize = 12;
/// Slack allowed on a free component before it is rejected as out of box.
pub const CANDIDATE_BOX_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {n} exceeds the oracle budget of {max}")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Zero,
    One,
    Free,
}

/// Which components sit at 0, at 1, or are free. Pattern indices read the
/// components as base-3 digits with component 0 most significant, so numeric
/// order is lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActivePattern(pub Vec<Bound>);

impl ActivePattern {
    pub fn from_index(mut index: usize, n: usize) -> Self {
        let mut b = vec![Bound::Zero; n];
        for slot in b.iter_mut().rev() {
            *slot = [Bound::Zero, Bound::One, Bound::Free][index % 3];
            index /= 3;
        }
        ActivePattern(b)
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, b| acc * 3 + *b as usize)
    }

    pub fn count(n: usize) -> usize {
        3usize.pow(n as u32)
    }

    pub fn free(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == Bound::Free).collect()
    }
}

impl fmt::Display for ActivePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(match b {
                Bound::Zero => "0",
                Bound::One => "1",
                Bound::Free => "F",
            })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSolution {
    pub value: f64,
    pub x: DVector<f64>,
    pub pattern: ActivePattern,
    /// In-box stationary candidates evaluated.
    pub candidates: usize,
}

/// Stationary points of the objective on the face `pattern` that lie in the
/// box, clamped onto it. Singular systems yield the minimum-norm solution and
/// the box-segment endpoints along each null-space direction.
pub fn face_candidates(inst: &BoxQpInstance, pattern: &ActivePattern) -> Vec<DVector<f64>> {
    let n = inst.n();
    let q = inst.quad();
    let free = pattern.free();
    let mut base = DVector::zeros(n);
    for i in 0..n {
        if pattern.0[i] == Bound::One {
            base[i] = 1.0;
        }
    }
    if free.is_empty() {
        return vec![base];
    }
    let m = free.len();
    let h = DMatrix::from_fn(m, m, |a, b| 2.0 * q[(free[a], free[b])]);
    let rhs = DVector::from_fn(m, |a, _| {
        let i = free[a];
        let fixed: f64 = (0..n)
            .filter(|&j| pattern.0[j] == Bound::One)
            .map(|j| 2.0 * q[(i, j)])
            .sum();
        -(inst.lin()[i] + fixed)
    });
    let svd = h.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-10 * smax.max(1.0);
    let Ok(sol) = svd.solve(&rhs, eps) else {
        return Vec::new();
    };
    if (&h * &sol - &rhs).norm() > 1e-9 * (1.0 + rhs.norm()) {
        return Vec::new();
    }
    let mut points = vec![sol.clone()];
    let v_t = svd.v_t.as_ref().expect("requested V");
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > eps {
            continue;
        }
        let d = v_t.row(k).transpose();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for a in 0..m {
            if d[a].abs() < 1e-14 {
                if sol[a] < -CANDIDATE_BOX_TOL || sol[a] > 1.0 + CANDIDATE_BOX_TOL {
                    lo = f64::INFINITY;
                }
                continue;
            }
            let (t0, t1) = ((0.0 - sol[a]) / d[a], (1.0 - sol[a]) / d[a]);
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
        }
        if lo <= hi {
            points.push(&sol + &d * lo);
            points.push(&sol + &d * hi);
        }
    }
    points
        .into_iter()
        .filter(|p| {
            p.iter()
                .all(|&v| v >= -CANDIDATE_BOX_TOL && v <= 1.0 + CANDIDATE_BOX_TOL)
        })
        .map(|p| {
            let mut x = base.clone();
            for (a, &i) in free.iter().enumerate() {
                x[i] = p[a].clamp(0.0, 1.0);
            }
            x
        })
        .collect()
}

fn value_at(inst: &BoxQpInstance, x: &DVector<f64>) -> f64 {
    x.dot(&(inst.quad() * x)) + inst.lin().dot(x)
}

fn best_on_face(inst: &BoxQpInstance, pattern: &ActivePattern) -> Option<(f64, DVector<f64>, usize)> {
    let cands = face_candidates(inst, pattern);
    let count = cands.len();
    cands
        .into_iter()
        .map(|x| (value_at(inst, &x), x))
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .map(|(v, x)| (v, x, count))
}

pub fn solve_global(inst: &BoxQpInstance) -> Result<GlobalSolution, OracleError> {
    solve_global_with(inst, Execution::default())
}

/// Values within `1e-12 (1 + |best|)` of the best count as ties, broken by the
/// smallest pattern index.
pub fn solve_global_with(inst: &BoxQpInstance, exec: Execution) -> Result<GlobalSolution, OracleError> {
    let n = inst.n();
    if n > MAX_ORACLE_DIM {
        return Err(OracleError::TooLarge {
            n,
            max: MAX_ORACLE_DIM,
        });
    }
    let total = ActivePattern::count(n);
    let found: Vec<(usize, f64, usize)> = par::flat_map_chunks(exec, total, 512, |range| {
        range
            .filter_map(|idx| {
                best_on_face(inst, &ActivePattern::from_index(idx, n)).map(|(v, _, c)| (idx, v, c))
            })
            .collect()
    });
    let candidates = found.iter().map(|f| f.2).sum();
    let best = found.iter().map(|f| f.1).fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * (1.0 + best.abs());
    let &(idx, _, _) = found
        .iter()
        .find(|f| f.1 >= best - tie)
        .expect("the all-zero vertex is always a candidate");
    let pattern = ActivePattern::from_index(idx, n);
    let (value, x, _) = best_on_face(inst, &pattern).expect("recomputed face");
    Ok(GlobalSolution {
        value,
        x,
        pattern,
        candidates,
    })
}

/// Gaps of a relaxation bound against the exact optimum and, optionally, a
/// feasible value recovered from the relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub relax_value: f64,
    pub optimal_value: f64,
    pub optimality_gap: f64,
    pub feasible_value: Option<f64>,
    pub feasible_gap: Option<f64>,
}

impl GapReport {
    pub fn with_feasible(mut self, feasible: f64) -> Self {
        self.feasible_value = Some(feasible);
        self.feasible_gap = Some(self.relax_value - feasible);
        self
    }
}

pub fn certify_bound(inst: &BoxQpInstance, relax_value: f64) -> Result<GapReport, OracleError> {
    let opt = solve_global(inst)?;
    Ok(GapReport {
        relax_value,
        optimal_value: opt.value,
        optimality_gap: relax_value - opt.value,
        feasible_value: None,
        feasible_gap: None,
    })
}

/// The instance in the variable `y` with `x_i = 1 - y_i`, and the constant
/// dropped from its objective.
pub fn switch_instance(inst: &BoxQpInstance, i: usize) -> (BoxQpInstance, f64) {
    let n = inst.n();
    let mut s = DVector::from_element(n, 1.0);
    s[i] = -1.0;
    let mut c = DVector::zeros(n);
    c[i] = 1.0;
    let sm = DMatrix::from_diagonal(&s);
    let quad = &sm * inst.quad() * &sm;
    let lin = &sm * (inst.quad() * &c * 2.0 + inst.lin());
    let constant = c.dot(&(inst.quad() * &c)) + inst.lin().dot(&c);
    let quad = DMatrix::from_fn(n, n, |a, b| if a <= b { quad[(a, b)] } else { quad[(b, a)] });
    (
        BoxQpInstance::new(quad, lin, None).expect("symmetric"),
        constant,
    )
}

/// The instance with components reordered so that new component `a` is old
/// component `perm[a]`.
pub fn permute_instance(inst: &BoxQpInstance, perm: &[usize]) -> BoxQpInstance {
    let n = inst.n();
    let quad = DMatrix::from_fn(n, n, |a, b| inst.quad()[(perm[a], perm[b])]);
    let lin = DVector::from_fn(n, |a, _| inst.lin()[perm[a]]);
    BoxQpInstance::new(quad, lin, None).expect("symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{builtin_bl, generate, GenSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pattern_indexing() {
        for idx in 0..81 {
            assert_eq!(ActivePattern::from_index(idx, 4).index(), idx);
        }
        assert_eq!(ActivePattern::from_index(5, 3).to_string(), "01F");
    }

    #[test]
    fn bl_optimum() {
        let sol = solve_global(&builtin_bl()).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
        for &v in sol.x.iter() {
            assert!((0.0..=1.0).contains(&v));
        }
        let report = certify_bound(&builtin_bl(), 1.09291).unwrap();
        assert!((report.optimality_gap - 0.09291).abs() < 1e-9);
    }

    #[test]
    fn linear_objective() {
        let q = DVector::from_vec(vec![2.0, -1.0, 0.5, 0.0]);
        let inst = BoxQpInstance::new(DMatrix::zeros(4, 4), q, None).unwrap();
        let sol = solve_global(&inst).unwrap();
        assert!((sol.value - 2.5).abs() < 1e-12);
        assert_eq!(sol.x.as_slice(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn singular_free_block() {
        // objective depends on x0 - x1 only along a flat valley
        let inst = BoxQpInstance::from_rows(&[&[-1.0, 1.0], &[1.0, -1.0]], &[0.0, 0.0]).unwrap();
        let sol = solve_global(&inst).unwrap();
        assert!(sol.value.abs() < 1e-12);
        assert_eq!(sol.pattern.to_string(), "00");
    }

    #[test]
    fn dominates_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for num in 1..=5 {
            let inst = generate(&GenSpec::new(6, 70, num, 3));
            let sol = solve_global(&inst).unwrap();
            for _ in 0..10_000 {
                let x = DVector::from_fn(6, |_, _| rng.random::<f64>());
                assert!(inst.feasible_value(&x).unwrap() <= sol.value + 1e-9);
            }
        }
    }

    #[test]
    fn too_large() {
        let inst = BoxQpInstance::new(DMatrix::zeros(13, 13), DVector::zeros(13), None).unwrap();
        assert_eq!(
            solve_global(&inst),
            Err(OracleError::TooLarge { n: 13, max: 12 })
        );
    }

    #[test]
    fn sequential_matches_parallel() {
        let inst = generate(&GenSpec::new(7, 80, 2, 5));
        assert_eq!(
            solve_global_with(&inst, Execution::Sequential).unwrap(),
            solve_global_with(&inst, Execution::Parallel).unwrap()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn permutation_invariance(seed in 0u64..1000, shift in 0usize..5) {
            let inst = generate(&GenSpec::new(5, 80, 1, seed));
            let perm: Vec<usize> = (0..5).map(|a| (a + shift) % 5).collect();
            let a = solve_global(&inst).unwrap().value;
            let b = solve_global(&permute_instance(&inst, &perm)).unwrap().value;
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn switching_consistency(seed in 0u64..1000, i in 0usize..4) {
            let inst = generate(&GenSpec::new(4, 90, 1, seed));
            let (switched, constant) = switch_instance(&inst, i);
            let a = solve_global(&inst).unwrap().value;
            let b = solve_global(&switched).unwrap().value + constant;
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
