use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::{AffineForm, BackendSolution, ConicBackend, ConicProgram, Sense, SolveStatus};

/// Tolerance requested from the solver.
pub const DEFAULT_REQUEST_TOL: f64 = 1e-8;
/// Largest independently measured residual accepted as optimal.
pub const DEFAULT_ACCEPT_TOL: f64 = 1e-6;
/// Overrides the requested tolerance when set to a positive number.
pub const TOL_ENV_VAR: &str = "BOXQP_SOLVER_TOL";

/// Interior-point backend built on Clarabel.
#[derive(Debug, Clone)]
pub struct ClarabelBackend {
    pub request_tol: f64,
    pub accept_tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        let request_tol = std::env::var(TOL_ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0)
            .unwrap_or(DEFAULT_REQUEST_TOL);
        ClarabelBackend {
            request_tol,
            accept_tol: DEFAULT_ACCEPT_TOL,
            max_iter: 200,
            verbose: false,
        }
    }
}

#[derive(Default)]
struct Rows {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
}

impl Rows {
    /// Appends the slack row `s = scale * form(v)`, written as `b - A v`.
    fn push(&mut self, form: &AffineForm, scale: f64) {
        let r = self.b.len();
        for &(col, c) in &form.terms {
            self.i.push(r);
            self.j.push(col);
            self.v.push(-scale * c);
        }
        self.b.push(scale * form.constant);
    }
}

impl ConicBackend for ClarabelBackend {
    fn solve(&self, program: &ConicProgram) -> BackendSolution {
        let nv = program.vars.len();
        let mut rows = Rows::default();
        let mut cones = Vec::new();

        if !program.equalities.is_empty() {
            for e in &program.equalities {
                rows.push(e, 1.0);
            }
            cones.push(SupportedConeT::ZeroConeT(program.equalities.len()));
        }
        if !program.inequalities.is_empty() {
            for r in &program.inequalities {
                rows.push(&r.form, 1.0);
            }
            cones.push(SupportedConeT::NonnegativeConeT(program.inequalities.len()));
        }
        for soc in &program.socs {
            // alpha^2 <= beta gamma  <=>  |(beta - gamma, 2 alpha)| <= beta + gamma
            let sum = add_forms(&soc.beta, &soc.gamma, 1.0);
            let diff = add_forms(&soc.beta, &soc.gamma, -1.0);
            rows.push(&sum, 1.0);
            rows.push(&diff, 1.0);
            rows.push(&soc.alpha, 2.0);
            cones.push(SupportedConeT::SecondOrderConeT(3));
        }
        for block in &program.psd {
            for c in 0..block.dim {
                for r in 0..=c {
                    let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
                    rows.push(&block.entries[super::PsdBlock::entry_index(r, c)], scale);
                }
            }
            cones.push(SupportedConeT::PSDTriangleConeT(block.dim));
        }

        let sign = match program.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut q = vec![0.0; nv];
        for &(col, c) in &program.objective.terms {
            q[col] += sign * c;
        }
        let p = CscMatrix::zeros((nv, nv));
        let a = CscMatrix::new_from_triplets(rows.b.len(), nv, rows.i, rows.j, rows.v);

        let settings = DefaultSettingsBuilder::default()
            .verbose(self.verbose)
            .max_iter(self.max_iter)
            .tol_gap_abs(self.request_tol)
            .tol_gap_rel(self.request_tol)
            .tol_feas(self.request_tol)
            .build()
            .expect("valid solver settings");

        let mut solver = match DefaultSolver::new(&p, &q, &a, &rows.b, &cones, settings) {
            Ok(s) => s,
            Err(e) => {
                return BackendSolution {
                    status: SolveStatus::NumericalTrouble,
                    objective: f64::NAN,
                    bound: f64::NAN,
                    values: vec![f64::NAN; nv],
                    max_residual: f64::INFINITY,
                    iterations: 0,
                    message: format!("solver setup failed: {e}"),
                }
            }
        };
        solver.solve();
        let sol = &solver.solution;
        let values = sol.x.clone();
        let objective = program.objective.eval(&values);
        let max_residual = program.max_residual(&values);
        let duality_gap = (sol.obj_val - sol.obj_val_dual).abs() / (1.0 + sol.obj_val.abs());
        // the solver minimises sign * objective without its constant
        let dual = sign * sol.obj_val_dual + program.objective.constant;
        let bound = match program.sense {
            Sense::Maximize => objective.max(dual),
            Sense::Minimize => objective.min(dual),
        };
        let (status, message) = match sol.status {
            SolverStatus::InsufficientProgress | SolverStatus::MaxIterations
                if max_residual <= self.accept_tol && duality_gap <= self.accept_tol =>
            {
                (
                    SolveStatus::Optimal,
                    format!("{:?}, accepted with duality gap {duality_gap:.1e}", sol.status),
                )
            }
            SolverStatus::Solved | SolverStatus::AlmostSolved
                if max_residual <= self.accept_tol =>
            {
                (SolveStatus::Optimal, format!("{:?}", sol.status))
            }
            SolverStatus::Solved | SolverStatus::AlmostSolved => (
                SolveStatus::NumericalTrouble,
                format!("{:?} but residual {max_residual:.3e} exceeds {:.1e}", sol.status, self.accept_tol),
            ),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                (SolveStatus::Infeasible, format!("{:?}", sol.status))
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                (SolveStatus::Unbounded, format!("{:?}", sol.status))
            }
            other => (SolveStatus::NumericalTrouble, format!("{other:?}")),
        };
        BackendSolution {
            status,
            objective,
            bound,
            values,
            max_residual,
            iterations: sol.iterations,
            message,
        }
    }
}

fn add_forms(a: &AffineForm, b: &AffineForm, sb: f64) -> AffineForm {
    let mut terms = a.terms.clone();
    terms.extend(b.terms.iter().map(|&(i, c)| (i, sb * c)));
    AffineForm {
        terms,
        constant: a.constant + sb * b.constant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{build_relaxation, RelaxationLevel};
    use crate::model::BoxQpInstance;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn concave_instance_is_zero() {
        let inst =
            BoxQpInstance::new(-DMatrix::identity(3, 3), DVector::zeros(3), None).unwrap();
        let prog = build_relaxation(&inst, &RelaxationLevel::psd_diag(), &[], &[]).unwrap();
        let sol = ClarabelBackend::default().solve(&prog);
        assert_eq!(sol.status, SolveStatus::Optimal, "{}", sol.message);
        assert!(sol.objective.abs() < 1e-6);
    }

    #[test]
    fn linear_instance_hits_vertex() {
        let inst = BoxQpInstance::new(DMatrix::zeros(3, 3), DVector::from_element(3, 1.0), None)
            .unwrap();
        let prog = build_relaxation(&inst, &RelaxationLevel::psd_rlt(), &[], &[]).unwrap();
        let sol = ClarabelBackend::default().solve(&prog);
        assert!(sol.is_optimal());
        assert!((sol.objective - 3.0).abs() < 1e-6);
    }
}
