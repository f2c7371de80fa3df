//! Instance generation, the instance file format and the table runners.

mod io;
mod search;
mod tables;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::BoxQpInstance;
pub use io::{parse_instance, serialize_instance, ParseError};
pub use search::{cut_objective, objective_form, search_max_gap, GapSearch, SearchConfig};
pub use tables::{
    run_t1, run_t2, run_t3, run_t4, run_t56, suite_levels, t4_deterministic_objectives, Cell,
    SuiteConfig, SuiteRow, Table, T4Row,
};

/// How the diagonal of `Q` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagMode {
    /// Same rule as the off-diagonal entries.
    #[default]
    Same,
    Zero,
}

impl DiagMode {
    pub fn parse(s: &str) -> Option<DiagMode> {
        match s {
            "same" => Some(DiagMode::Same),
            "zero" => Some(DiagMode::Zero),
            _ => None,
        }
    }
}

/// One random instance: dimension, density in percent, instance number and a
/// global seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub density: u32,
    pub number: u32,
    pub seed: u64,
    pub diag: DiagMode,
}

impl GenSpec {
    pub fn new(n: usize, density: u32, number: u32, seed: u64) -> Self {
        GenSpec {
            n,
            density,
            number,
            seed,
            diag: DiagMode::Same,
        }
    }

    pub fn label(&self) -> String {
        format!("{:02}-{:03}-{}", self.n, self.density, self.number)
    }

    /// Per-instance stream seed.
    pub fn stream_seed(&self) -> u64 {
        let mut h = self.seed;
        for v in [self.n as u64, u64::from(self.density), u64::from(self.number)] {
            h = splitmix(h ^ v);
        }
        h
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Each `q_i` and each `Q_ij`, `i < j`, is with probability `density`% a
/// uniform integer in `[-50, 50]` and otherwise zero.
pub fn generate(spec: &GenSpec) -> BoxQpInstance {
    assert!(spec.n >= 1 && spec.density <= 100);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.stream_seed());
    let p = f64::from(spec.density) / 100.0;
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        if rng.random::<f64>() < p {
            f64::from(rng.random_range(-50i32..=50))
        } else {
            0.0
        }
    };
    let n = spec.n;
    let mut q = DVector::zeros(n);
    for i in 0..n {
        q[i] = draw(&mut rng);
    }
    let mut quad = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = if i == j && spec.diag == DiagMode::Zero {
                0.0
            } else {
                draw(&mut rng)
            };
            quad[(i, j)] = v;
            quad[(j, i)] = v;
        }
    }
    BoxQpInstance::new(quad, q, Some(spec.label())).expect("symmetric by construction")
}

/// The three-dimensional instance with optimum 1 whose PSD+RLT+TRI bound is
/// not tight.
pub fn builtin_bl() -> BoxQpInstance {
    BoxQpInstance::from_rows(
        &[&[-2.25, -3.0, -3.0], &[-3.0, 0.0, -0.5], &[-3.0, -0.5, 1.0]],
        &[3.0, 1.0, 0.0],
    )
    .expect("valid instance")
    .with_label("BL")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_density_is_zero() {
        let inst = generate(&GenSpec::new(6, 0, 1, 7));
        assert!(inst.quad().iter().all(|&v| v == 0.0));
        assert!(inst.lin().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn full_density_stays_in_range() {
        let inst = generate(&GenSpec::new(10, 100, 1, 7));
        for &v in inst.quad().iter().chain(inst.lin().iter()) {
            assert!(v.fract() == 0.0 && (-50.0..=50.0).contains(&v));
        }
        assert_eq!(inst.label(), Some("10-100-1"));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GenSpec::new(8, 75, 1, 2024);
        assert_eq!(generate(&spec), generate(&spec));
        assert_ne!(generate(&spec), generate(&GenSpec { number: 2, ..spec }));
        let zero = generate(&GenSpec {
            diag: DiagMode::Zero,
            ..spec
        });
        assert!((0..8).all(|i| zero.quad()[(i, i)] == 0.0));
    }

    #[test]
    fn bl_data() {
        let bl = builtin_bl();
        assert_eq!(bl.n(), 3);
        assert!((bl.objective_norm() - 9.4373).abs() < 1e-4);
    }
}
