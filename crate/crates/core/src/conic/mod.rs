//! Conic programs over the lifted space and the relaxations built from them.
//!
//! A [`ConicProgram`] is a list of variables, affine equalities, affine
//! inequalities (`form >= 0`), rotated second-order cones
//! (`alpha^2 <= beta * gamma`, `beta, gamma >= 0`) and PSD blocks whose entries
//! are affine forms. Backends implement [`ConicBackend`].

mod backend;
mod level;
mod trilinear;

use std::collections::{HashMap, HashSet};

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::cuts::{self, poly::LocalForm, Family, LiftedVar, LinearCut};
use crate::model::{BoxQpInstance, MomentPoint, SymIndex, Triple};
pub use backend::{ClarabelBackend, DEFAULT_ACCEPT_TOL, DEFAULT_REQUEST_TOL, TOL_ENV_VAR};
pub use level::RelaxationLevel;
pub use trilinear::{
    conflicting_caps, local_values, soc_z_interval, trilinear_hull_rows, CapKind, CapSet, SocCap,
    TrilinearBlock, ZInterval,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConicError {
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("inconsistent relaxation: {0}")]
    InconsistentLevel(String),
    #[error("backend reported {status:?}: {message}")]
    Backend { status: SolveStatus, message: String },
}

/// What a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    X(usize),
    Lift(SymIndex),
    Tri(Triple),
    Aux(usize),
}

impl From<LiftedVar> for VarKind {
    fn from(v: LiftedVar) -> Self {
        match v {
            LiftedVar::X(i) => VarKind::X(i),
            LiftedVar::Lift(s) => VarKind::Lift(s),
        }
    }
}

/// `constant + sum coef * v[index]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineForm {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineForm {
    pub fn constant(c: f64) -> Self {
        AffineForm {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(index: usize, coef: f64) -> Self {
        AffineForm {
            terms: vec![(index, coef)],
            constant: 0.0,
        }
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * values[i]).sum::<f64>()
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.constant *= s;
        self.terms.iter_mut().for_each(|t| t.1 *= s);
        self
    }
}

/// Where a linear row came from; used for counting and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowOrigin {
    Cut(Family),
    Trilinear(Triple),
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub form: AffineForm,
    pub origin: RowOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotatedSoc {
    pub alpha: AffineForm,
    pub beta: AffineForm,
    pub gamma: AffineForm,
    pub triple: Triple,
}

/// A `dim x dim` symmetric matrix required to be PSD; `entries` holds the
/// upper triangle column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock {
    pub dim: usize,
    pub entries: Vec<AffineForm>,
}

impl PsdBlock {
    pub fn entry_index(r: usize, c: usize) -> usize {
        let (r, c) = (r.min(c), r.max(c));
        c * (c + 1) / 2 + r
    }

    pub fn matrix(&self, values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            self.entries[Self::entry_index(r, c)].eval(values)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarMap {
    kinds: Vec<VarKind>,
    index: HashMap<VarKind, usize>,
}

impl VarMap {
    pub fn add(&mut self, kind: VarKind) -> usize {
        if let Some(&i) = self.index.get(&kind) {
            return i;
        }
        self.kinds.push(kind);
        self.index.insert(kind, self.kinds.len() - 1);
        self.kinds.len() - 1
    }

    pub fn get(&self, kind: VarKind) -> Option<usize> {
        self.index.get(&kind).copied()
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    pub vars: VarMap,
    pub equalities: Vec<AffineForm>,
    pub inequalities: Vec<LinearRow>,
    pub socs: Vec<RotatedSoc>,
    pub psd: Vec<PsdBlock>,
    pub objective: AffineForm,
    pub sense: Sense,
    n: usize,
}

impl ConicProgram {
    /// Empty program over `x` and packed `X` for dimension `n`, no constraints.
    pub fn lifted(n: usize) -> Self {
        let mut vars = VarMap::default();
        for i in 0..n {
            vars.add(VarKind::X(i));
        }
        for s in SymIndex::all(n) {
            vars.add(VarKind::Lift(s));
        }
        ConicProgram {
            vars,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            socs: Vec::new(),
            psd: Vec::new(),
            objective: AffineForm::default(),
            sense: Sense::Maximize,
            n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_var(&self, i: usize) -> usize {
        self.vars.get(VarKind::X(i)).expect("x variable")
    }

    pub fn lift_var(&self, a: usize, b: usize) -> usize {
        self.vars
            .get(VarKind::Lift(SymIndex::new(a, b)))
            .expect("lifted variable")
    }

    /// Adds the PSD constraint on `Y(x, X)` with its fixed unit corner.
    pub fn add_moment_psd(&mut self) {
        let n = self.n;
        let mut entries = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for c in 0..=n {
            for r in 0..=c {
                entries.push(match (r, c) {
                    (0, 0) => AffineForm::constant(1.0),
                    (0, c) => AffineForm::var(self.x_var(c - 1), 1.0),
                    (r, c) => AffineForm::var(self.lift_var(r - 1, c - 1), 1.0),
                });
            }
        }
        self.psd.push(PsdBlock { dim: n + 1, entries });
    }

    /// Affine form of a cut's left-hand side.
    pub fn cut_form(&self, cut: &LinearCut) -> AffineForm {
        let (terms, b) = cut.terms();
        AffineForm {
            terms: terms
                .into_iter()
                .map(|(v, c)| (self.vars.get(v.into()).expect("cut variable"), c))
                .collect(),
            constant: b,
        }
    }

    pub fn add_cut(&mut self, cut: &LinearCut) {
        let form = self.cut_form(cut);
        self.inequalities.push(LinearRow {
            form,
            origin: RowOrigin::Cut(cut.family),
        });
    }

    /// Affine form of a local lifted form on `triple`, using `z` of that
    /// triple when the form needs it.
    pub fn local_form(&mut self, triple: Triple, f: &LocalForm) -> AffineForm {
        let idx = [triple.0, triple.1, triple.2];
        let mut terms = Vec::new();
        for a in 0..3 {
            if f.c[a] != 0.0 {
                terms.push((self.x_var(idx[a]), f.c[a]));
            }
            if f.diag[a] != 0.0 {
                terms.push((self.lift_var(idx[a], idx[a]), f.diag[a]));
            }
        }
        for slot in 0..3 {
            if f.off[slot] != 0.0 {
                let (a, b) = cuts::poly::off_pair(slot);
                terms.push((self.lift_var(idx[a], idx[b]), f.off[slot]));
            }
        }
        if f.z != 0.0 {
            let z = self.vars.add(VarKind::Tri(triple));
            terms.push((z, f.z));
        }
        AffineForm {
            terms,
            constant: f.b,
        }
    }

    /// Adds `z_triple`, the trilinear hull rows and the block's cones.
    pub fn add_block(&mut self, block: &TrilinearBlock) {
        let t = block.triple;
        self.vars.add(VarKind::Tri(t));
        for row in trilinear_hull_rows() {
            let form = self.local_form(t, &row);
            self.inequalities.push(LinearRow {
                form,
                origin: RowOrigin::Trilinear(t),
            });
        }
        for cap in &block.caps {
            let alpha = self.local_form(t, &cap.alpha);
            let beta = self.local_form(t, &cap.beta);
            let gamma = self.local_form(t, &cap.gamma);
            self.socs.push(RotatedSoc {
                alpha,
                beta,
                gamma,
                triple: t,
            });
        }
    }

    /// Sets the objective `Q . X + q'x`, maximised.
    pub fn set_instance_objective(&mut self, inst: &BoxQpInstance) {
        let mut terms = Vec::new();
        for i in 0..self.n {
            if inst.lin()[i] != 0.0 {
                terms.push((self.x_var(i), inst.lin()[i]));
            }
        }
        for s in SymIndex::all(self.n) {
            let c = inst.lifted_coefficient(s);
            if c != 0.0 {
                terms.push((self.vars.get(VarKind::Lift(s)).unwrap(), c));
            }
        }
        self.objective = AffineForm {
            terms,
            constant: 0.0,
        };
        self.sense = Sense::Maximize;
    }

    /// Reads `(x, X, z)` out of a primal vector.
    pub fn moment_point(&self, values: &[f64]) -> MomentPoint {
        let n = self.n;
        let x = nalgebra::DVector::from_fn(n, |i, _| values[self.x_var(i)]);
        let xx = DMatrix::from_fn(n, n, |a, b| values[self.lift_var(a, b)]);
        let mut p = MomentPoint::new(x, xx).expect("symmetric by construction");
        for (i, kind) in self.vars.kinds().iter().enumerate() {
            if let VarKind::Tri(t) = kind {
                p.z.insert(*t, values[i]);
            }
        }
        p
    }

    /// Largest violation of any constraint at `values`: equality residuals,
    /// negative parts of inequalities, cone distance for the rotated cones and
    /// the negative part of each PSD block's smallest eigenvalue.
    pub fn max_residual(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for e in &self.equalities {
            worst = worst.max(e.eval(values).abs());
        }
        for row in &self.inequalities {
            worst = worst.max(-row.form.eval(values));
        }
        for soc in &self.socs {
            let (a, b, g) = (
                soc.alpha.eval(values),
                soc.beta.eval(values),
                soc.gamma.eval(values),
            );
            let lhs = (4.0 * a * a + (b - g).powi(2)).sqrt();
            worst = worst.max(lhs - (b + g)).max(-b).max(-g);
        }
        for block in &self.psd {
            let m = block.matrix(values);
            let min = SymmetricEigen::new(m)
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(-min);
        }
        worst
    }

    pub fn count_rows(&self, origin: RowOrigin) -> usize {
        self.inequalities.iter().filter(|r| r.origin == origin).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendSolution {
    pub status: SolveStatus,
    /// In the program's own sense, including the objective constant.
    pub objective: f64,
    /// The weaker of the primal and dual objective values: an upper bound for
    /// a maximisation and a lower bound for a minimisation, up to the
    /// residuals.
    pub bound: f64,
    pub values: Vec<f64>,
    /// Largest constraint violation of `values`, measured independently of the
    /// backend.
    pub max_residual: f64,
    pub iterations: u32,
    pub message: String,
}

impl BackendSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Turns anything but `Optimal` into an error.
    pub fn into_optimal(self) -> Result<BackendSolution, ConicError> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(ConicError::Backend {
                status: self.status,
                message: self.message,
            })
        }
    }
}

/// A synchronous conic solver.
pub trait ConicBackend: Sync {
    fn solve(&self, program: &ConicProgram) -> BackendSolution;
}

/// Assembles the relaxation of `inst` for `level`, extra `active_cuts` and
/// trilinear `blocks`.
///
/// Plain TRI rows are left out on triples that carry a block, and pair RLT
/// rows on pairs covered by a block; the block's hull rows imply both.
pub fn build_relaxation(
    inst: &BoxQpInstance,
    level: &RelaxationLevel,
    active_cuts: &[LinearCut],
    blocks: &[TrilinearBlock],
) -> Result<ConicProgram, ConicError> {
    let n = inst.n();
    if !blocks.is_empty() && !level.soc {
        return Err(ConicError::InconsistentLevel(
            "trilinear blocks supplied but the level has no SOC".into(),
        ));
    }
    let mut block_triples = HashSet::new();
    for b in blocks {
        let (i, j, k) = b.triple;
        if !(i < j && j < k) {
            return Err(ConicError::InconsistentLevel(format!(
                "block triple {:?} is not increasing",
                b.triple
            )));
        }
        if k >= n {
            return Err(ConicError::IndexOutOfRange { index: k, n });
        }
        if !block_triples.insert(b.triple) {
            return Err(ConicError::InconsistentLevel(format!(
                "duplicate block on {:?}",
                b.triple
            )));
        }
    }
    for c in active_cuts {
        if let Some(&bad) = c.indices().iter().find(|&&i| i >= n) {
            return Err(ConicError::IndexOutOfRange { index: bad, n });
        }
    }
    let covered_pairs: HashSet<(usize, usize)> = block_triples
        .iter()
        .flat_map(|&(i, j, k)| [(i, j), (i, k), (j, k)])
        .collect();

    let mut prog = ConicProgram::lifted(n);
    if level.psd {
        prog.add_moment_psd();
    }
    let mut seen = HashSet::new();
    let mut push = |prog: &mut ConicProgram, cut: &LinearCut| {
        let key = (cut.indices().to_vec(), cut.row().map(f64::to_bits));
        if seen.insert(key) {
            prog.add_cut(cut);
        }
    };
    if level.diag || level.rlt {
        for c in cuts::diag_cuts(n) {
            push(&mut prog, &c);
        }
    }
    if level.rlt {
        for c in cuts::rlt_pair_cuts(n) {
            let idx = c.indices();
            if !covered_pairs.contains(&(idx[0], idx[1])) {
                push(&mut prog, &c);
            }
        }
    }
    let triple_families: Vec<Family> = [
        (level.tri, Family::Tri),
        (level.etri1, Family::Etri1),
        (level.etri2, Family::Etri2),
        (level.etri3, Family::Etri3),
    ]
    .into_iter()
    .filter_map(|(on, f)| on.then_some(f))
    .collect();
    for &fam in &triple_families {
        let local = cuts::generate_local(fam);
        for t in cuts::triples(n) {
            if fam == Family::Tri && block_triples.contains(&t) {
                continue;
            }
            for c in &local {
                push(&mut prog, &c.relocated(t));
            }
        }
    }
    for c in active_cuts {
        if let Some(t) = c.triple() {
            if c.family == Family::Tri && block_triples.contains(&t) {
                continue;
            }
        }
        push(&mut prog, c);
    }
    for b in blocks {
        prog.add_block(b);
    }
    prog.set_instance_objective(inst);
    Ok(prog)
}

/// Runs the backend; never returns a non-optimal solution silently, the
/// status carries the outcome.
pub fn solve(program: &ConicProgram, backend: &dyn ConicBackend) -> BackendSolution {
    backend.solve(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::builtin_bl;
    use nalgebra::DVector;

    #[test]
    fn row_counts() {
        let bl = builtin_bl();
        let p = build_relaxation(&bl, &RelaxationLevel::psd_rlt(), &[], &[]).unwrap();
        assert_eq!(p.psd.len(), 1);
        assert_eq!(p.psd[0].dim, 4);
        assert_eq!(p.vars.len(), 9);
        // 3 DIAG + 4 McCormick on each of 3 pairs
        assert_eq!(p.inequalities.len(), 15);

        let tri = build_relaxation(&bl, &RelaxationLevel::psd_rlt_tri(), &[], &[]).unwrap();
        assert_eq!(tri.inequalities.len(), 19);

        let block = TrilinearBlock::full((0, 1, 2), &CapSet::default());
        let soc = build_relaxation(&bl, &RelaxationLevel::soc(), &[], &[block.clone()]).unwrap();
        assert_eq!(soc.vars.len(), 10);
        assert_eq!(soc.count_rows(RowOrigin::Trilinear((0, 1, 2))), 8);
        assert_eq!(soc.count_rows(RowOrigin::Cut(Family::Tri)), 0);
        assert_eq!(soc.socs.len(), block.caps.len());

        let one = BoxQpInstance::new(DMatrix::from_element(1, 1, -1.0), DVector::zeros(1), None)
            .unwrap();
        let p = build_relaxation(&one, &RelaxationLevel::psd_diag(), &[], &[]).unwrap();
        assert_eq!(p.psd[0].dim, 2);
        assert_eq!(p.inequalities.len(), 1);
    }

    #[test]
    fn rejects_inconsistent_inputs() {
        let bl = builtin_bl();
        let block = TrilinearBlock::full((0, 1, 2), &CapSet::default());
        assert!(matches!(
            build_relaxation(&bl, &RelaxationLevel::psd_rlt(), &[], &[block]),
            Err(ConicError::InconsistentLevel(_))
        ));
        let far = cuts::generate_family(Family::Tri, (0, 1, 5));
        assert!(matches!(
            build_relaxation(&bl, &RelaxationLevel::psd_rlt(), &far, &[]),
            Err(ConicError::IndexOutOfRange { index: 5, n: 3 })
        ));
    }

    #[test]
    fn residual_of_rank_one_lift_is_zero() {
        let bl = builtin_bl();
        let block = TrilinearBlock::full((0, 1, 2), &CapSet::default());
        let prog = build_relaxation(&bl, &RelaxationLevel::soc(), &[], &[block]).unwrap();
        let x = [0.3, 0.8, 0.55];
        let mut values = vec![0.0; prog.vars.len()];
        for (i, kind) in prog.vars.kinds().iter().enumerate() {
            values[i] = match *kind {
                VarKind::X(a) => x[a],
                VarKind::Lift(s) => x[s.pair().0] * x[s.pair().1],
                VarKind::Tri(_) => x[0] * x[1] * x[2],
                VarKind::Aux(_) => 0.0,
            };
        }
        assert!(prog.max_residual(&values) < 1e-12);
        let p = prog.moment_point(&values);
        assert!((p.z[&(0, 1, 2)] - x[0] * x[1] * x[2]).abs() < 1e-15);
    }
}
