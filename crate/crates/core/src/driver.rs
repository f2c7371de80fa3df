//! Round-based cutting planes: solve, separate, add, re-solve.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conic::{
    build_relaxation, conflicting_caps, local_values, soc_z_interval, AffineForm, CapSet,
    ConicBackend, ConicError, ConicProgram, LinearRow, RelaxationLevel, RowOrigin, Sense,
    SocCap, TrilinearBlock, VarKind,
};
use crate::cuts::{self, Family, LinearCut};
use crate::model::{BoxQpInstance, MomentPoint, Triple};
use crate::par::{self, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Etri1,
    Etri23,
    Soc,
}

impl Phase {
    pub fn families(self) -> &'static [Family] {
        match self {
            Phase::Etri1 => &[Family::Etri1],
            Phase::Etri23 => &[Family::Etri2, Family::Etri3],
            Phase::Soc => &[],
        }
    }
}

/// Phases implied by a level, in order.
pub fn phases_for(level: &RelaxationLevel) -> Vec<Phase> {
    let mut out = Vec::new();
    if level.etri1 {
        out.push(Phase::Etri1);
    }
    if level.etri2 || level.etri3 {
        out.push(Phase::Etri23);
    }
    if level.soc {
        out.push(Phase::Soc);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriverConfig {
    /// Solves per run, including the first.
    pub max_rounds: usize,
    /// Cuts (and new blocks) added per round.
    pub per_round_cap: usize,
    /// A cut is added when its violation exceeds both thresholds.
    pub abs_threshold: f64,
    pub norm_threshold: f64,
    /// Emptiness margin for `z` intervals and slack for cap violations.
    pub soc_threshold: f64,
    pub cap_set: CapSet,
    /// Largest `lambda_2 / lambda_1` of `Y` accepted as rank one.
    pub rank_tol: f64,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            max_rounds: 20,
            per_round_cap: 10,
            abs_threshold: 1e-6,
            norm_threshold: 1e-5,
            soc_threshold: 1e-5,
            cap_set: CapSet::default(),
            rank_tol: 1e-5,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

impl DriverConfig {
    pub fn validate(&self) -> Result<(), DriverError> {
        let ok = self.max_rounds >= 1
            && self.per_round_cap >= 1
            && self.abs_threshold > 0.0
            && self.norm_threshold > 0.0
            && self.soc_threshold > 0.0
            && self.rank_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(DriverError::Config(format!("{self:?}")))
        }
    }
}

/// Everything needed to rebuild the current relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    /// Families enforced in full; ETRI families are separated instead.
    pub base_level: RelaxationLevel,
    pub cuts: Vec<LinearCut>,
    pub blocks: Vec<TrilinearBlock>,
}

impl ModelState {
    pub fn new(level: &RelaxationLevel) -> Self {
        ModelState {
            base_level: RelaxationLevel {
                etri1: false,
                etri2: false,
                etri3: false,
                ..*level
            },
            cuts: Vec::new(),
            blocks: Vec::new(),
        }
    }

    pub fn program(&self, inst: &BoxQpInstance) -> Result<ConicProgram, ConicError> {
        build_relaxation(inst, &self.base_level, &self.cuts, &self.blocks)
    }

    pub fn count(&self, family: Family) -> usize {
        self.cuts.iter().filter(|c| c.family == family).count()
    }

    pub fn etri_count(&self) -> usize {
        self.cuts.iter().filter(|c| c.family.is_etri()).count()
    }

    pub fn cap_count(&self) -> usize {
        self.blocks.iter().map(|b| b.caps.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub round: usize,
    pub phase: Option<Phase>,
    pub value: f64,
    pub point: MomentPoint,
    /// Cuts added after this solve.
    pub added: Vec<LinearCut>,
    pub blocks_added: usize,
    pub caps_added: usize,
}

impl RoundLog {
    pub fn added_by_family(&self) -> BTreeMap<Family, usize> {
        let mut m = BTreeMap::new();
        for c in &self.added {
            *m.entry(c.family).or_insert(0) += 1;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub log: Vec<RoundLog>,
    pub value: f64,
    pub point: MomentPoint,
    /// `x'Qx + q'x` at the relaxation's `x`, clamped into the box.
    pub feasible_value: f64,
    pub rank_ratio: f64,
    pub etri_count: usize,
    pub soc_blocks: usize,
    pub soc_caps: usize,
    /// The relaxation's `x` when `Y` is rank one.
    pub extracted: Option<DVector<f64>>,
    pub state: ModelState,
    /// False when the round limit stopped the run with violations left.
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("solve failed in round {round}: {source}")]
    Backend {
        round: usize,
        log: Vec<RoundLog>,
        source: ConicError,
    },
}

fn cut_key(c: &LinearCut) -> (Vec<usize>, [u64; 10]) {
    (c.indices().to_vec(), c.row().map(f64::to_bits))
}

/// Violated cuts of `families` at `p`, at most `cap`, most violated (by
/// normalised violation) first; ties go to the smaller triple, then family,
/// then tag.
pub fn separate(
    p: &MomentPoint,
    families: &[Family],
    cap: usize,
    abs_threshold: f64,
    norm_threshold: f64,
    exec: Execution,
) -> Vec<LinearCut> {
    let locals: Vec<Vec<LinearCut>> = families.iter().map(|&f| cuts::generate_local(f)).collect();
    let triples: Vec<Triple> = cuts::triples(p.n()).collect();
    let mut found: Vec<(f64, LinearCut)> = par::map(exec, &triples, |&t| {
        let mut out = Vec::new();
        for local in &locals {
            for c in local {
                let cut = c.relocated(t);
                let violation = -cut.evaluate(p);
                let normalized = violation / cut.coefficient_norm();
                if violation > abs_threshold && normalized > norm_threshold {
                    out.push((normalized, cut));
                }
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect();
    found.sort_by(|(a, ca), (b, cb)| {
        b.partial_cmp(a)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ca.triple().cmp(&cb.triple()))
            .then_with(|| ca.family.cmp(&cb.family))
            .then_with(|| ca.tag.cmp(&cb.tag))
    });
    found.into_iter().take(cap).map(|(_, c)| c).collect()
}

/// New blocks for triples whose `z` interval is empty and extra caps for
/// existing blocks violated at the current `z`.
pub fn separate_soc(
    p: &MomentPoint,
    state: &ModelState,
    config: &DriverConfig,
) -> (Vec<TrilinearBlock>, Vec<(usize, Vec<SocCap>)>) {
    let caps = config.cap_set.caps();
    let tol = config.soc_threshold;
    let with_block: HashSet<Triple> = state.blocks.iter().map(|b| b.triple).collect();
    let triples: Vec<Triple> = cuts::triples(p.n()).filter(|t| !with_block.contains(t)).collect();

    let mut empty: Vec<(f64, Triple)> = par::map(config.exec, &triples, |&t| {
        (soc_z_interval(p, t, &caps).gap(), t)
    })
    .into_iter()
    .filter(|(gap, _)| *gap > tol)
    .collect();
    empty.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    let new_blocks = empty
        .into_iter()
        .take(config.per_round_cap)
        .map(|(_, t)| {
            let idx = conflicting_caps(p, t, &caps, tol);
            let chosen = if idx.is_empty() {
                caps.clone()
            } else {
                idx.into_iter().map(|i| caps[i]).collect()
            };
            TrilinearBlock::new(t, chosen)
        })
        .collect();

    let mut extra = Vec::new();
    for (bi, block) in state.blocks.iter().enumerate() {
        let Some(&z) = p.z.get(&block.triple) else {
            continue;
        };
        let (x, xx) = local_values(p, block.triple);
        let missing: Vec<SocCap> = caps
            .iter()
            .filter(|c| !block.caps.contains(c))
            .filter(|c| {
                let v = c.violation(&x, &xx, z);
                v.is_infinite() || v.max(0.0).sqrt() > tol
            })
            .copied()
            .collect();
        if !missing.is_empty() {
            extra.push((bi, missing));
        }
    }
    (new_blocks, extra)
}

fn solve_state(
    inst: &BoxQpInstance,
    state: &ModelState,
    backend: &dyn ConicBackend,
) -> Result<(f64, MomentPoint), ConicError> {
    let prog = state.program(inst)?;
    let sol = backend.solve(&prog).into_optimal()?;
    // the dual side keeps the reported value an upper bound when the solver
    // stops short of full accuracy
    Ok((sol.bound, prog.moment_point(&sol.values)))
}

pub fn run(
    inst: &BoxQpInstance,
    level: &RelaxationLevel,
    config: &DriverConfig,
    backend: &dyn ConicBackend,
) -> Result<SolveReport, DriverError> {
    config.validate()?;
    let phases = phases_for(level);
    let mut state = ModelState::new(level);
    let mut log: Vec<RoundLog> = Vec::new();
    let mut phase_idx = 0;
    let mut converged = false;
    let mut present: HashSet<(Vec<usize>, [u64; 10])> = HashSet::new();

    for round in 0..config.max_rounds {
        let (value, point) = solve_state(inst, &state, backend).map_err(|source| {
            DriverError::Backend {
                round,
                log: log.clone(),
                source,
            }
        })?;
        let mut entry = RoundLog {
            round,
            phase: phases.get(phase_idx).copied(),
            value,
            point: point.clone(),
            added: Vec::new(),
            blocks_added: 0,
            caps_added: 0,
        };
        let last_round = round + 1 == config.max_rounds;
        while phase_idx < phases.len() {
            let families: Vec<Family> = phases[..=phase_idx]
                .iter()
                .flat_map(|p| p.families().iter().copied())
                .collect();
            let added: Vec<LinearCut> = separate(
                &point,
                &families,
                config.per_round_cap,
                config.abs_threshold,
                config.norm_threshold,
                config.exec,
            )
            .into_iter()
            .filter(|c| !present.contains(&cut_key(c)))
            .collect();
            let (blocks, extra) = if phases[phase_idx] == Phase::Soc {
                separate_soc(&point, &state, config)
            } else {
                (Vec::new(), Vec::new())
            };
            if added.is_empty() && blocks.is_empty() && extra.is_empty() {
                phase_idx += 1;
                continue;
            }
            entry.phase = Some(phases[phase_idx]);
            if !last_round {
                for c in &added {
                    present.insert(cut_key(c));
                }
                state.cuts.extend(added.iter().cloned());
                entry.added = added;
                entry.blocks_added = blocks.len();
                entry.caps_added = blocks.iter().map(|b| b.caps.len()).sum::<usize>()
                    + extra.iter().map(|e| e.1.len()).sum::<usize>();
                for (bi, caps) in extra {
                    state.blocks[bi].caps.extend(caps);
                }
                state.blocks.extend(blocks);
            }
            break;
        }
        let done = phase_idx >= phases.len();
        log.push(entry);
        if done {
            converged = true;
            break;
        }
        if last_round {
            break;
        }
    }

    let last = log.last().expect("at least one round");
    let point = last.point.clone();
    let x = point.x.map(|v| v.clamp(0.0, 1.0));
    let feasible_value = inst.feasible_value(&x).expect("clamped into the box");
    let rank_ratio = point.rank_ratio();
    Ok(SolveReport {
        value: last.value,
        feasible_value,
        rank_ratio,
        etri_count: state.etri_count(),
        soc_blocks: state.blocks.len(),
        soc_caps: state.cap_count(),
        extracted: (rank_ratio <= config.rank_tol).then_some(x),
        point,
        state,
        log,
        converged,
    })
}

/// Re-solves with the objective held at (essentially) `pinned` and a seeded
/// random linear objective over `(x, X)`. Returns `x` when the new solution
/// is rank one and its feasible value is within `1e-4` of `pinned`.
pub fn extract_rank_one(
    inst: &BoxQpInstance,
    pinned: f64,
    state: &ModelState,
    backend: &dyn ConicBackend,
    seed: u64,
    rank_tol: f64,
) -> Result<Option<DVector<f64>>, ConicError> {
    let mut prog = state.program(inst)?;
    let slack = 1e-7 * pinned.abs().max(1.0);
    let mut pin = prog.objective.clone();
    pin.constant -= pinned - slack;
    prog.inequalities.push(LinearRow {
        form: pin,
        origin: RowOrigin::Custom,
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = prog
        .vars
        .kinds()
        .iter()
        .enumerate()
        .filter(|(_, k)| matches!(k, VarKind::X(_) | VarKind::Lift(_)))
        .map(|(i, _)| (i, rng.random::<f64>() * 2.0 - 1.0))
        .collect();
    prog.objective = AffineForm {
        terms,
        constant: 0.0,
    };
    prog.sense = Sense::Maximize;
    let sol = backend.solve(&prog).into_optimal()?;
    let point = prog.moment_point(&sol.values);
    if point.rank_ratio() > rank_tol {
        return Ok(None);
    }
    let x = point.x.map(|v| v.clamp(0.0, 1.0));
    let value = inst.feasible_value(&x).expect("clamped");
    Ok(((value - pinned).abs() <= 1e-4).then_some(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::builtin_bl;
    use crate::conic::ClarabelBackend;
    use nalgebra::DMatrix;

    #[test]
    fn rank_one_point_separates_nothing() {
        let p = MomentPoint::rank_one(&[0.2, 0.9, 0.4, 0.6], false);
        let fams = [Family::Tri, Family::Etri1, Family::Etri2, Family::Etri3];
        assert!(separate(&p, &fams, 100, 1e-9, 1e-9, Execution::Sequential).is_empty());
    }

    #[test]
    fn bl_tri_cut_after_psd_rlt() {
        let backend = ClarabelBackend::default();
        let bl = builtin_bl();
        let state = ModelState::new(&RelaxationLevel::psd_rlt());
        let (_, p) = solve_state(&bl, &state, &backend).unwrap();
        let cuts = separate(&p, &[Family::Tri], 10, 1e-6, 1e-5, Execution::Sequential);
        assert!(!cuts.is_empty());
        let state = ModelState::new(&RelaxationLevel::psd_rlt_tri());
        let (_, p) = solve_state(&bl, &state, &backend).unwrap();
        assert!(!separate(&p, &[Family::Etri1], 10, 1e-6, 1e-5, Execution::Sequential).is_empty());
    }

    #[test]
    fn concave_stops_immediately() {
        let inst =
            BoxQpInstance::new(-DMatrix::identity(4, 4), DVector::zeros(4), None).unwrap();
        let r = run(&inst, &RelaxationLevel::soc(), &DriverConfig::default(), &ClarabelBackend::default())
            .unwrap();
        assert_eq!(r.log.len(), 1);
        assert!(r.log[0].added.is_empty() && r.log[0].blocks_added == 0);
        assert!(r.value.abs() < 1e-6);
    }

    #[test]
    fn bad_config() {
        let cfg = DriverConfig {
            per_round_cap: 0,
            ..Default::default()
        };
        assert!(matches!(
            run(&builtin_bl(), &RelaxationLevel::etri1(), &cfg, &ClarabelBackend::default()),
            Err(DriverError::Config(_))
        ));
    }
}
