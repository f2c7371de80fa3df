//! The exact disjunctive description of the three-dimensional lifted set, its
//! polyhedral outer approximations, and violation maximisation over
//! relaxations.

use nalgebra::{DMatrix, Matrix3x4, Matrix4, SVD};
use thiserror::Error;

use crate::conic::{
    build_relaxation, AffineForm, BackendSolution, CapSet, ConicBackend, ConicError,
    ConicProgram, LinearRow, PsdBlock, RelaxationLevel, RowOrigin, Sense, TrilinearBlock,
    VarKind,
};
use crate::cuts::poly::{off_slot, LocalForm};
use crate::cuts::{base_cut, CutTag, Family, LinearCut, SwitchPattern};
use crate::model::{BoxQpInstance, MomentPoint, SymIndex};
use crate::par::{self, Execution};

/// Violations at or below this count as dominated.
pub const DOMINATION_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("the disjunctive formulation needs n = 3, got {0}")]
    WrongDimension(usize),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// The simplex `0 <= x_i <= x_j <= x_k <= 1` for `order = [i, j, k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimplexOrdering {
    pub order: [usize; 3],
}

impl SimplexOrdering {
    /// The six orderings in lexicographic order 123, 132, 213, 231, 312, 321.
    pub fn all() -> [SimplexOrdering; 6] {
        [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ]
        .map(|order| SimplexOrdering { order })
    }

    /// Vertex columns `e, e_j + e_k, e_k, 0`.
    pub fn a(&self) -> Matrix3x4<f64> {
        let [_, j, k] = self.order;
        let mut a = Matrix3x4::zeros();
        for r in 0..3 {
            a[(r, 0)] = 1.0;
        }
        a[(j, 1)] = 1.0;
        a[(k, 1)] = 1.0;
        a[(k, 2)] = 1.0;
        a
    }

    /// `A` with a row of ones on top.
    pub fn abar(&self) -> Matrix4<f64> {
        let a = self.a();
        Matrix4::from_fn(|r, c| if r == 0 { 1.0 } else { a[(r - 1, c)] })
    }

    /// `abar^-1`; integral.
    pub fn m(&self) -> Matrix4<f64> {
        let inv = self.abar().try_inverse().expect("vertices are affinely independent");
        inv.map(f64::round)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtremeSet {
    P0,
    P1,
}

/// Generators `X` with `e'Xe = 1` for one ordering and their lifts
/// `abar X abar'`, which are matrices `Y(x, X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremeMatrixSet {
    pub set: ExtremeSet,
    pub ordering: SimplexOrdering,
    pub generators: Vec<Matrix4<f64>>,
    pub lifted: Vec<Matrix4<f64>>,
}

impl ExtremeMatrixSet {
    pub fn points(&self) -> Vec<MomentPoint> {
        self.lifted
            .iter()
            .map(|y| MomentPoint::from_y(&DMatrix::from_column_slice(4, 4, y.as_slice())))
            .collect()
    }
}

fn e(i: usize, j: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(i, j)] = 1.0;
    m
}

fn generators(set: ExtremeSet) -> Vec<Matrix4<f64>> {
    let mut out = Vec::new();
    match set {
        ExtremeSet::P0 => {
            for j in 0..4 {
                for i in 0..=j {
                    out.push((e(i, j) + e(j, i)) / 2.0);
                }
            }
        }
        ExtremeSet::P1 => {
            for i in 0..4 {
                out.push(e(i, i));
            }
            for i in 0..4 {
                for j in (0..4).filter(|&j| j != i) {
                    out.push(e(i, i) / 2.0 + (e(i, j) + e(j, i)) / 4.0);
                }
            }
            for i in 0..4 {
                for j in (0..4).filter(|&j| j != i) {
                    for k in ((j + 1)..4).filter(|&k| k != i) {
                        out.push(
                            e(i, i) / 3.0 + (e(i, j) + e(j, i) + e(i, k) + e(k, i)) / 6.0,
                        );
                    }
                }
            }
            let ones = Matrix4::from_element(1.0);
            for i in 0..4 {
                let ei = e(i, i) * ones;
                out.push((ei + ei.transpose()) / 8.0);
            }
        }
    }
    out
}

pub fn enumerate_extreme(set: ExtremeSet, ordering: SimplexOrdering) -> ExtremeMatrixSet {
    let abar = ordering.abar();
    let generators = generators(set);
    let lifted = generators
        .iter()
        .map(|x| abar * x * abar.transpose())
        .collect();
    ExtremeMatrixSet {
        set,
        ordering,
        generators,
        lifted,
    }
}

/// All lifted extreme matrices over the six orderings.
pub fn all_extreme_points(set: ExtremeSet) -> Vec<MomentPoint> {
    SimplexOrdering::all()
        .iter()
        .flat_map(|&p| enumerate_extreme(set, p).points())
        .collect()
}

/// The form `sum_{c,d} w_c v_d Y_cd` in local coordinates.
fn quadratic_form_of_y(w: &[f64; 4], v: &[f64; 4]) -> LocalForm {
    let mut f = LocalForm::default();
    for c in 0..4 {
        for d in 0..4 {
            let coef = w[c] * v[d];
            if coef == 0.0 {
                continue;
            }
            match (c, d) {
                (0, 0) => f.b += coef,
                (0, d) => f.c[d - 1] += coef,
                (c, 0) => f.c[c - 1] += coef,
                (c, d) if c == d => f.diag[c - 1] += coef,
                (c, d) => f.off[off_slot(c - 1, d - 1)] += coef,
            }
        }
    }
    f
}

/// The ten entries of `M Y M' >= 0` as cuts on `(0, 1, 2)`.
pub fn m_hyperplanes(ordering: SimplexOrdering) -> Vec<LinearCut> {
    let m = ordering.m();
    let row = |a: usize| -> [f64; 4] { std::array::from_fn(|c| m[(a, c)]) };
    let mut out = Vec::new();
    for b in 0..4 {
        for a in 0..=b {
            let form = quadratic_form_of_y(&row(a), &row(b));
            out.push(LinearCut::from_local((0, 1, 2), form, Family::Ordering, CutTag::default()));
        }
    }
    out
}

/// Smallest left-hand side of `cut` over `points`.
pub fn min_over(cut: &LinearCut, points: &[MomentPoint]) -> f64 {
    points
        .iter()
        .map(|p| cut.evaluate(p))
        .fold(f64::INFINITY, f64::min)
}

/// Number of `points` on which `cut` holds with `|lhs| <= tol`.
pub fn tight_count(cut: &LinearCut, points: &[MomentPoint], tol: f64) -> usize {
    points
        .iter()
        .filter(|p| cut.evaluate(p).abs() <= tol)
        .count()
}

/// The rank-one points, in local `x`, on which the first base inequality of
/// ETRI1, ETRI2 or ETRI3 is tight.
pub fn tight_fixtures(family: Family) -> (LinearCut, Vec<[f64; 3]>) {
    let pts = match family {
        Family::Etri1 => vec![
            [0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.0],
            [0.0, 0.0, 0.5],
            [1.0, 1.0, 1.0],
        ],
        Family::Etri2 => vec![
            [0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.0],
            [0.0, 0.0, 0.5],
            [0.5, 1.0, 1.0],
        ],
        Family::Etri3 => vec![
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, 0.5],
            [0.5, 1.0, 0.0],
            [1.0, 1.0, 1.0],
        ],
        other => panic!("no fixtures for {other}"),
    };
    (base_cut(family, 0), pts)
}

/// Affine rank of points given as coordinate vectors.
pub fn affine_rank(points: &[Vec<f64>]) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let d = points[0].len();
    let diffs = DMatrix::from_fn(points.len() - 1, d, |r, c| points[r + 1][c] - points[0][c]);
    let svd = SVD::new(diffs, false, false);
    let smax = svd.singular_values.max();
    svd.singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count()
}

/// The nine lifted coordinates of a rank-one point in table order.
pub fn lifted_coordinates(x: [f64; 3]) -> Vec<f64> {
    vec![
        x[0],
        x[1],
        x[2],
        x[0] * x[0],
        x[1] * x[1],
        x[2] * x[2],
        x[0] * x[1],
        x[0] * x[2],
        x[1] * x[2],
    ]
}

/// Lifted objective `Q . X + q'x` of a three-dimensional instance.
pub fn instance_form(inst: &BoxQpInstance) -> LocalForm {
    let mut f = LocalForm::default();
    for a in 0..3 {
        f.c[a] = inst.lin()[a];
        f.diag[a] = inst.lifted_coefficient(SymIndex::new(a, a));
    }
    for slot in 0..3 {
        let (a, b) = crate::cuts::poly::off_pair(slot);
        f.off[slot] = inst.lifted_coefficient(SymIndex::new(a, b));
    }
    f
}

/// The disjunctive program with objective `objective` (over `x`, `X`).
pub fn disjunctive_program(objective: &LocalForm, sense: Sense) -> ConicProgram {
    let mut prog = ConicProgram::lifted(3);
    let orderings = SimplexOrdering::all();
    let mut blocks = Vec::new();
    for (p, _) in orderings.iter().enumerate() {
        let vars: Vec<usize> = (0..10).map(|k| prog.vars.add(VarKind::Aux(10 * p + k))).collect();
        for &v in &vars {
            prog.inequalities.push(LinearRow {
                form: AffineForm::var(v, 1.0),
                origin: RowOrigin::Custom,
            });
        }
        blocks.push(vars);
    }
    for b in 0..4 {
        for a in 0..=b {
            // Y_ab - sum_p (abar X_p abar')_ab = 0
            let mut form = match (a, b) {
                (0, 0) => AffineForm::constant(1.0),
                (0, b) => AffineForm::var(prog.x_var(b - 1), 1.0),
                (a, b) => AffineForm::var(prog.lift_var(a - 1, b - 1), 1.0),
            };
            for (p, ord) in orderings.iter().enumerate() {
                let abar = ord.abar();
                for c in 0..4 {
                    for d in 0..4 {
                        let coef = abar[(a, c)] * abar[(b, d)];
                        if coef != 0.0 {
                            form.terms
                                .push((blocks[p][PsdBlock::entry_index(c, d)], -coef));
                        }
                    }
                }
            }
            prog.equalities.push(form);
        }
    }
    for vars in &blocks {
        prog.psd.push(PsdBlock {
            dim: 4,
            entries: vars.iter().map(|&v| AffineForm::var(v, 1.0)).collect(),
        });
    }
    prog.objective = prog.local_form((0, 1, 2), objective);
    prog.sense = sense;
    prog
}

/// Relaxation of the three-dimensional lifted set for `level` plus `extra`,
/// with a full trilinear block when the level has SOC.
pub fn level_program(
    level: &RelaxationLevel,
    extra: &[LinearCut],
    objective: &LocalForm,
    sense: Sense,
) -> Result<ConicProgram, ConicError> {
    let zero = BoxQpInstance::new(DMatrix::zeros(3, 3), nalgebra::DVector::zeros(3), None)
        .expect("valid");
    let blocks = if level.soc {
        vec![TrilinearBlock::full((0, 1, 2), &CapSet::default())]
    } else {
        Vec::new()
    };
    let mut prog = build_relaxation(&zero, level, extra, &blocks)?;
    prog.objective = prog.local_form((0, 1, 2), objective);
    prog.sense = sense;
    Ok(prog)
}

fn optimal(sol: BackendSolution) -> Result<f64, ConicError> {
    Ok(sol.into_optimal()?.objective)
}

/// Exact optimum of a three-dimensional instance.
pub fn solve_exact_qpb3(inst: &BoxQpInstance, backend: &dyn ConicBackend) -> Result<f64, ExactError> {
    if inst.n() != 3 {
        return Err(ExactError::WrongDimension(inst.n()));
    }
    let prog = disjunctive_program(&instance_form(inst), Sense::Maximize);
    Ok(optimal(backend.solve(&prog))?)
}

/// Exact minimum of a linear function of `(x, X)` over the lifted set.
pub fn exact_min(objective: &LocalForm, backend: &dyn ConicBackend) -> Result<f64, ConicError> {
    optimal(backend.solve(&disjunctive_program(objective, Sense::Minimize)))
}

/// Minimum of a linear function of `(x, X)` over a relaxation.
pub fn relaxation_min(
    objective: &LocalForm,
    level: &RelaxationLevel,
    extra: &[LinearCut],
    backend: &dyn ConicBackend,
) -> Result<f64, ConicError> {
    let prog = level_program(level, extra, objective, Sense::Minimize)?;
    optimal(backend.solve(&prog))
}

/// `exact_min - relaxation_min` for one objective; non-negative up to solver
/// accuracy.
pub fn objective_gap(
    objective: &LocalForm,
    level: &RelaxationLevel,
    backend: &dyn ConicBackend,
) -> Result<f64, ConicError> {
    Ok(exact_min(objective, backend)? - relaxation_min(objective, level, &[], backend)?)
}

/// Image of a three-dimensional `p` under the affine map of a switch pattern,
/// chosen so that `cut.apply_switch(s)` at `switch_point(p, s^-1)` equals
/// `cut` at `p`.
pub fn switch_point(p: &MomentPoint, pattern: &SwitchPattern) -> MomentPoint {
    let y = p.assemble_y();
    // T(x)_a = flip_a(x_{perm(a)}) as an affine map on (1, x)
    let mut t = Matrix4::zeros();
    t[(0, 0)] = 1.0;
    let perm = pattern.perm();
    for a in 0..3 {
        if pattern.flips(a) {
            t[(a + 1, 0)] = 1.0;
            t[(a + 1, perm[a] + 1)] = -1.0;
        } else {
            t[(a + 1, perm[a] + 1)] = 1.0;
        }
    }
    let t = DMatrix::from_column_slice(4, 4, t.as_slice());
    MomentPoint::from_y(&(&t * y * t.transpose()))
}

/// Largest violation `-lhs` of `cut` over the relaxation, optionally divided
/// by the coefficient norm; never negative.
pub fn max_violation(
    cut: &LinearCut,
    level: &RelaxationLevel,
    backend: &dyn ConicBackend,
    normalized: bool,
) -> Result<f64, ConicError> {
    max_violation_with(cut, level, &[], backend, normalized)
}

pub fn max_violation_with(
    cut: &LinearCut,
    level: &RelaxationLevel,
    extra: &[LinearCut],
    backend: &dyn ConicBackend,
    normalized: bool,
) -> Result<f64, ConicError> {
    let min = relaxation_min(cut.form(), level, extra, backend)?;
    let v = (-min).max(0.0);
    Ok(if normalized { v / cut.coefficient_norm() } else { v })
}

pub fn is_dominated(
    cut: &LinearCut,
    level: &RelaxationLevel,
    extra: &[LinearCut],
    backend: &dyn ConicBackend,
    tol: f64,
) -> Result<bool, ConicError> {
    Ok(max_violation_with(cut, level, extra, backend, false)? <= tol)
}

/// Unnormalised and normalised maximum violation over `cuts`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyViolation {
    pub raw: f64,
    pub normalized: f64,
}

pub fn family_max_violation(
    cuts: &[LinearCut],
    level: &RelaxationLevel,
    backend: &dyn ConicBackend,
    exec: Execution,
) -> Result<FamilyViolation, ConicError> {
    let each = par::map(exec, cuts, |c| max_violation(c, level, backend, false));
    let mut out = FamilyViolation {
        raw: 0.0,
        normalized: 0.0,
    };
    for (c, v) in cuts.iter().zip(each) {
        let v = v?;
        out.raw = out.raw.max(v);
        out.normalized = out.normalized.max(v / c.coefficient_norm());
    }
    Ok(out)
}
