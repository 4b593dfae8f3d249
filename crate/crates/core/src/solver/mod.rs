//! Weighted l1 minimization under exact linear constraints.
//!
//! The problem is `min sum_i w_i |x_i|  s.t.  A x = y` with positive weights.
//! Two independent routes solve it:
//! - [`SolverKind::FirstOrder`]: an alternating-direction splitting method.
//!   Each iterate is projected onto the constraint set through a cached
//!   Cholesky factorization of `A A^T`, then shrunk coordinatewise; see
//!   `admm.rs`.
//! - [`SolverKind::ReferenceLp`]: an exact textbook simplex on the split
//!   `x = u - v`, hard-capped to small instances; see `simplex.rs`. It exists
//!   to certify the first-order route and stays independent of it.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::SensingMatrix;

mod admm;
mod simplex;

pub use simplex::{solve_reference_lp, REFERENCE_LP_MAX_COLS, REFERENCE_LP_MAX_ROWS};

/// Strictly positive, finite per-coordinate weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Array1<f64>);

impl WeightVector {
    pub fn new(w: Array1<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::dim("empty weight vector".to_string()));
        }
        if !w.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::domain(
                "weights must be finite and positive".to_string(),
            ));
        }
        Ok(WeightVector(w))
    }

    pub fn uniform(n: usize) -> Self {
        WeightVector(Array1::ones(n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn view(&self) -> ArrayView1<'_, f64> {
        self.0.view()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice().expect("weights are contiguous")
    }
}

/// Which route solves the subproblem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    FirstOrder,
    ReferenceLp,
}

/// Solver tolerances and effort budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Relative feasibility `||A x - y|| / ||y||` required of a solution.
    pub feasibility_tol: f64,
    /// Relative residual level at which iterations stop.
    pub optimality_tol: f64,
    pub max_inner_iters: usize,
    pub kind: SolverKind,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-7,
            max_inner_iters: 5000,
            kind: SolverKind::FirstOrder,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("feasibility_tol", self.feasibility_tol),
            ("optimality_tol", self.optimality_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        if self.max_inner_iters == 0 {
            return Err(Error::domain(
                "max_inner_iters must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Result of one weighted subproblem solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: Array1<f64>,
    /// Relative feasibility residual `||A x - y|| / ||y||` (absolute if y = 0).
    pub residual: f64,
    /// Weighted l1 objective at the solution.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projection onto the affine set `{x : A x = y}` through a cached Cholesky
/// factorization of the Gram matrix `A A^T`.
pub struct AffineProjector {
    phi: Array2<f64>,
    factor: Array2<f64>,
    cond_estimate: f64,
}

impl AffineProjector {
    pub fn new(phi: &ArrayView2<f64>) -> Result<Self> {
        let gram = phi.dot(&phi.t());
        let factor = linalg::cholesky_lower(&gram.view())?;
        let cond_estimate = linalg::cond_estimate_from_factor(&factor.view());
        log::debug!(
            "affine projector {}x{}: gram condition estimate {cond_estimate:.3e}",
            phi.nrows(),
            phi.ncols()
        );
        Ok(AffineProjector {
            phi: phi.to_owned(),
            factor,
            cond_estimate,
        })
    }

    pub fn rows(&self) -> usize {
        self.phi.nrows()
    }

    pub fn cols(&self) -> usize {
        self.phi.ncols()
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond_estimate
    }

    pub(crate) fn matrix(&self) -> &Array2<f64> {
        &self.phi
    }

    /// `x = v - A^T (A A^T)^{-1} (A v - y)`, written into `out`.
    /// `work` must have length `rows`.
    pub(crate) fn project_into(
        &self,
        v: &Array1<f64>,
        y: &ArrayView1<f64>,
        out: &mut Array1<f64>,
        work: &mut Array1<f64>,
    ) {
        ndarray::linalg::general_mat_vec_mul(1.0, &self.phi, v, 0.0, work);
        *work -= y;
        linalg::cholesky_solve_in_place(&self.factor.view(), work);
        out.assign(v);
        ndarray::linalg::general_mat_vec_mul(-1.0, &self.phi.t(), work, 1.0, out);
    }

    /// Minimum-Euclidean-norm solution of `A x = y`, polished with one step
    /// of iterative refinement.
    pub fn least_norm(&self, y: &ArrayView1<f64>) -> Array1<f64> {
        let mut lambda = y.to_owned();
        linalg::cholesky_solve_in_place(&self.factor.view(), &mut lambda);
        let mut x = self.phi.t().dot(&lambda);
        // refinement: lambda += (A A^T)^{-1} (y - A x)
        let mut resid = y.to_owned();
        ndarray::linalg::general_mat_vec_mul(-1.0, &self.phi, &x, 1.0, &mut resid);
        linalg::cholesky_solve_in_place(&self.factor.view(), &mut resid);
        ndarray::linalg::general_mat_vec_mul(1.0, &self.phi.t(), &resid, 1.0, &mut x);
        x
    }
}

fn check_solve_dims(phi: &SensingMatrix, y: &ArrayView1<f64>, w: &WeightVector) -> Result<()> {
    if y.len() != phi.rows() {
        return Err(Error::dim(format!(
            "y length {} vs {} rows",
            y.len(),
            phi.rows()
        )));
    }
    if w.len() != phi.cols() {
        return Err(Error::dim(format!(
            "weight length {} vs {} columns",
            w.len(),
            phi.cols()
        )));
    }
    Ok(())
}

/// Minimizes `sum_i w_i |x_i|` subject to `A x = y`, dispatching on
/// `params.kind`. `y = 0` short-circuits to the zero solution.
pub fn solve_weighted_l1(
    phi: &SensingMatrix,
    y: &ArrayView1<f64>,
    w: &WeightVector,
    params: &SolverParams,
) -> Result<SolveReport> {
    params.validate()?;
    check_solve_dims(phi, y, w)?;
    let ynorm = y.dot(y).sqrt();
    if ynorm == 0.0 {
        return Ok(SolveReport {
            solution: Array1::zeros(phi.cols()),
            residual: 0.0,
            objective: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    match params.kind {
        SolverKind::FirstOrder => {
            let proj = build_projector(phi, y)?;
            Ok(admm::minimize(&proj, y, w, params, None))
        }
        SolverKind::ReferenceLp => {
            let solution = simplex::solve_reference_lp(phi, y, w)?;
            let mut resid = y.to_owned();
            ndarray::linalg::general_mat_vec_mul(1.0, phi.entries(), &solution, -1.0, &mut resid);
            let residual = resid.dot(&resid).sqrt() / ynorm;
            let objective = solution
                .iter()
                .zip(w.as_slice())
                .map(|(x, w)| w * x.abs())
                .sum::<f64>();
            Ok(SolveReport {
                solution,
                residual,
                objective,
                iterations: 0,
                converged: true,
            })
        }
    }
}

/// Builds the projector, distinguishing an unusable factorization from a
/// genuinely unsolvable right-hand side.
pub(crate) fn build_projector(phi: &SensingMatrix, y: &ArrayView1<f64>) -> Result<AffineProjector> {
    match AffineProjector::new(&phi.entries().view()) {
        Ok(p) => Ok(p),
        Err(Error::IllConditioned(msg)) => {
            // rank-deficient rows: y outside the row-image has no solution
            if least_squares_residual(phi.entries(), y) > 1e-6 {
                Err(Error::Infeasible(format!(
                    "rank-deficient system with unreachable y ({msg})"
                )))
            } else {
                Err(Error::IllConditioned(msg))
            }
        }
        Err(e) => Err(e),
    }
}

/// Relative residual of a ridge-regularized least-squares fit; used only to
/// classify failures of the exact factorization.
fn least_squares_residual(phi: &Array2<f64>, y: &ArrayView1<f64>) -> f64 {
    let n = phi.nrows();
    let ynorm = y.dot(y).sqrt();
    if ynorm == 0.0 {
        return 0.0;
    }
    let mut gram = phi.dot(&phi.t());
    let scale = (0..n)
        .map(|i| gram[[i, i]])
        .fold(0.0_f64, f64::max)
        .max(1.0);
    for i in 0..n {
        gram[[i, i]] += 1e-10 * scale;
    }
    let factor = match linalg::cholesky_lower(&gram.view()) {
        Ok(f) => f,
        Err(_) => return f64::INFINITY,
    };
    let mut lambda = y.to_owned();
    linalg::cholesky_solve_in_place(&factor.view(), &mut lambda);
    let x = phi.t().dot(&lambda);
    let mut resid = y.to_owned();
    ndarray::linalg::general_mat_vec_mul(-1.0, phi, &x, 1.0, &mut resid);
    resid.dot(&resid).sqrt() / ynorm
}

/// Minimum-norm solution `A^T (A A^T)^{-1} y` of an underdetermined system.
pub fn least_norm_solution(phi: &SensingMatrix, y: &ArrayView1<f64>) -> Result<Array1<f64>> {
    if y.len() != phi.rows() {
        return Err(Error::dim(format!(
            "y length {} vs {} rows",
            y.len(),
            phi.rows()
        )));
    }
    let proj = build_projector(phi, y)?;
    Ok(proj.least_norm(y))
}

/// Warm-startable handle used by the decode loops: one factorization, many
/// weighted solves against the same matrix and measurements.
pub struct SubproblemSolver<'a> {
    proj: AffineProjector,
    y: ArrayView1<'a, f64>,
    params: SolverParams,
    phi: &'a SensingMatrix,
}

impl<'a> SubproblemSolver<'a> {
    pub fn new(
        phi: &'a SensingMatrix,
        y: ArrayView1<'a, f64>,
        params: SolverParams,
    ) -> Result<Self> {
        params.validate()?;
        if y.len() != phi.rows() {
            return Err(Error::dim(format!(
                "y length {} vs {} rows",
                y.len(),
                phi.rows()
            )));
        }
        let proj = build_projector(phi, &y)?;
        Ok(SubproblemSolver {
            proj,
            y,
            params,
            phi,
        })
    }

    pub fn cols(&self) -> usize {
        self.proj.cols()
    }

    pub fn solve(&self, w: &WeightVector, warm: Option<&Array1<f64>>) -> Result<SolveReport> {
        if w.len() != self.proj.cols() {
            return Err(Error::dim(format!(
                "weight length {} vs {} columns",
                w.len(),
                self.proj.cols()
            )));
        }
        match self.params.kind {
            SolverKind::FirstOrder => {
                Ok(admm::minimize(&self.proj, &self.y, w, &self.params, warm))
            }
            SolverKind::ReferenceLp => {
                let w_checked = WeightVector::new(w.view().to_owned())?;
                let solution = simplex::solve_reference_lp(self.phi, &self.y, &w_checked)?;
                let ynorm = self.y.dot(&self.y).sqrt().max(f64::MIN_POSITIVE);
                let mut resid = self.y.to_owned();
                ndarray::linalg::general_mat_vec_mul(
                    1.0,
                    self.phi.entries(),
                    &solution,
                    -1.0,
                    &mut resid,
                );
                let residual = resid.dot(&resid).sqrt() / ynorm;
                let objective = solution
                    .iter()
                    .zip(w.as_slice())
                    .map(|(x, w)| w * x.abs())
                    .sum::<f64>();
                Ok(SolveReport {
                    solution,
                    residual,
                    objective,
                    iterations: 0,
                    converged: true,
                })
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::oracle::brute_force_weighted_l1;
    use super::*;
    use crate::model::{make_gaussian_matrix, sample_sparse_signal};
    use crate::rng::RngSpec;
    use ndarray::array;

    fn random_instance(seed: u64, n: usize, cols: usize, k: usize) -> (SensingMatrix, Array1<f64>) {
        let spec = RngSpec::new(seed);
        let phi = make_gaussian_matrix(n, cols, false, &spec.derive(0)).unwrap();
        let x = sample_sparse_signal(cols, k, 1.0, &spec.derive(1)).unwrap();
        let y = phi.apply(&x.dense().view()).unwrap();
        (phi, y)
    }

    #[test]
    fn identity_matrix_returns_y_itself() {
        let phi = SensingMatrix::from_dense(Array2::eye(4)).unwrap();
        let y = array![1.0, -2.0, 0.0, 0.5];
        let w = WeightVector::uniform(4);
        let rep = solve_weighted_l1(&phi, &y.view(), &w, &SolverParams::default()).unwrap();
        assert!(rep.converged);
        for (a, b) in rep.solution.iter().zip(y.iter()) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        assert!((rep.objective - 3.5).abs() < 1e-7);
    }

    #[test]
    fn zero_measurements_give_zero_solution() {
        let (phi, _) = random_instance(1, 4, 8, 2);
        let y = Array1::zeros(4);
        let w = WeightVector::uniform(8);
        let rep = solve_weighted_l1(&phi, &y.view(), &w, &SolverParams::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert!(rep.solution.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn recovers_a_one_sparse_signal_matching_brute_force() {
        let spec = RngSpec::new(33);
        let phi = make_gaussian_matrix(3, 5, false, &spec.derive(0)).unwrap();
        let x = sample_sparse_signal(5, 1, 1.0, &spec.derive(1)).unwrap();
        let y = phi.apply(&x.dense().view()).unwrap();
        let w = WeightVector::uniform(5);
        let rep = solve_weighted_l1(&phi, &y.view(), &w, &SolverParams::default()).unwrap();
        let (x_star, obj_star) = brute_force_weighted_l1(&phi, &y.view(), &w, 2).unwrap();
        assert!((rep.objective - obj_star).abs() <= 1e-6 * (1.0 + obj_star.abs()));
        for (a, b) in rep.solution.iter().zip(x_star.iter()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn solver_objective_matches_brute_force_on_small_instances() {
        for seed in 0..20u64 {
            let (phi, y) = random_instance(100 + seed, 4, 9, 2);
            let w = WeightVector::uniform(9);
            let rep = solve_weighted_l1(&phi, &y.view(), &w, &SolverParams::default()).unwrap();
            assert!(rep.converged, "seed {seed} failed to converge");
            let (_, obj_star) = brute_force_weighted_l1(&phi, &y.view(), &w, 4).unwrap();
            let gap = (rep.objective - obj_star) / (1.0 + obj_star.abs());
            assert!(
                gap.abs() <= 1e-6,
                "seed {seed}: objective {} vs oracle {obj_star}",
                rep.objective
            );
            assert!(
                gap >= -1e-9,
                "seed {seed}: solver beat the exact oracle, bug in one of them"
            );
        }
    }

    #[test]
    fn doubling_all_weights_keeps_the_minimizer() {
        let (phi, y) = random_instance(7, 6, 12, 3);
        let w1 = WeightVector::uniform(12);
        let w2 = WeightVector::new(Array1::from_elem(12, 2.0)).unwrap();
        let p = SolverParams::default();
        let r1 = solve_weighted_l1(&phi, &y.view(), &w1, &p).unwrap();
        let r2 = solve_weighted_l1(&phi, &y.view(), &w2, &p).unwrap();
        assert!((r2.objective - 2.0 * r1.objective).abs() <= 1e-6 * (1.0 + r1.objective));
        let diff = (&r1.solution - &r2.solution).mapv(f64::abs).sum();
        assert!(
            diff <= 1e-5 * (1.0 + r1.solution.mapv(f64::abs).sum()),
            "minimizer moved by {diff}"
        );
    }

    #[test]
    fn solution_is_positively_homogeneous_in_y() {
        let (phi, y) = random_instance(19, 5, 10, 2);
        let w = WeightVector::uniform(10);
        let p = SolverParams::default();
        let r1 = solve_weighted_l1(&phi, &y.view(), &w, &p).unwrap();
        let y3 = y.mapv(|v| 3.0 * v);
        let r3 = solve_weighted_l1(&phi, &y3.view(), &w, &p).unwrap();
        for (a, b) in r3.solution.iter().zip(r1.solution.iter()) {
            assert!(
                (a - 3.0 * b).abs() <= 1e-6 * (1.0 + b.abs() * 3.0),
                "{a} vs 3*{b}"
            );
        }
    }

    #[test]
    fn feasibility_residual_is_tiny_for_well_posed_systems() {
        let (phi, y) = random_instance(23, 16, 48, 6);
        let w = WeightVector::uniform(48);
        let rep = solve_weighted_l1(&phi, &y.view(), &w, &SolverParams::default()).unwrap();
        assert!(rep.residual <= 1e-9, "residual {}", rep.residual);
    }

    #[test]
    fn least_norm_solution_lies_in_the_row_space() {
        let phi = SensingMatrix::from_dense(Array2::eye(3)).unwrap();
        let y = array![1.0, 2.0, 3.0];
        let x = least_norm_solution(&phi, &y.view()).unwrap();
        for (a, b) in x.iter().zip(y.iter()) {
            assert!((a - b).abs() < 1e-12);
        }

        let wide = SensingMatrix::from_dense(array![[1.0, 1.0]]).unwrap();
        let x = least_norm_solution(&wide, &array![2.0].view()).unwrap();
        assert!(
            (x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12,
            "{x:?}"
        );

        // any null-space perturbation has larger Euclidean norm
        let (phi, y) = random_instance(41, 8, 16, 3);
        let x = least_norm_solution(&phi, &y.view()).unwrap();
        let mut resid = y.clone();
        ndarray::linalg::general_mat_vec_mul(1.0, phi.entries(), &x, -1.0, &mut resid);
        assert!(resid.dot(&resid).sqrt() / y.dot(&y).sqrt() <= 1e-10);
        let probe = RngSpec::new(99);
        for t in 0..8u64 {
            let v = make_gaussian_matrix(1, 16, false, &probe.derive(t)).unwrap();
            let v = v.entries().row(0).to_owned();
            // null component of v
            let proj = AffineProjector::new(&phi.entries().view()).unwrap();
            let zeros = Array1::zeros(8);
            let mut work = Array1::zeros(8);
            let mut null = Array1::zeros(16);
            proj.project_into(&v, &zeros.view(), &mut null, &mut work);
            let x_norm = x.dot(&x);
            let perturbed = &x + &null;
            assert!(perturbed.dot(&perturbed) >= x_norm - 1e-9);
        }
    }

    #[test]
    fn rank_deficient_rows_are_reported() {
        // duplicated row: Gram matrix is singular
        let m = array![[1.0, 2.0, 3.0, 1.0], [1.0, 2.0, 3.0, 1.0]];
        let phi = SensingMatrix::from_dense(m).unwrap();
        let y_ok = array![1.0, 1.0];
        let err = least_norm_solution(&phi, &y_ok.view()).unwrap_err();
        assert!(matches!(err, Error::IllConditioned(_)), "{err:?}");
        // inconsistent right-hand side on the same rows
        let y_bad = array![1.0, 2.0];
        let w = WeightVector::uniform(4);
        let err = solve_weighted_l1(&phi, &y_bad.view(), &w, &SolverParams::default()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err:?}");
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let (phi, y) = random_instance(3, 4, 8, 2);
        let w_bad = WeightVector::uniform(7);
        assert!(solve_weighted_l1(&phi, &y.view(), &w_bad, &SolverParams::default()).is_err());
        let y_bad = Array1::zeros(5);
        let w = WeightVector::uniform(8);
        assert!(solve_weighted_l1(&phi, &y_bad.view(), &w, &SolverParams::default()).is_err());
        let mut p = SolverParams::default();
        p.optimality_tol = 0.0;
        assert!(solve_weighted_l1(&phi, &y.view(), &w, &p).is_err());
    }

    #[test]
    fn weight_vector_rejects_nonpositive_entries() {
        assert!(WeightVector::new(array![1.0, 0.0]).is_err());
        assert!(WeightVector::new(array![1.0, -2.0]).is_err());
        assert!(WeightVector::new(array![1.0, f64::NAN]).is_err());
        assert!(WeightVector::new(Array1::zeros(0)).is_err());
    }
}
