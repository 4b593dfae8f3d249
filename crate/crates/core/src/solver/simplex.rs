//! Exact reference solver: dense two-phase tableau simplex.
//!
//! Solves `min w^T u + w^T v  s.t.  A u - A v = y, u, v >= 0` and returns
//! `x = u - v`. Correctness over speed: instances are hard-capped, pivoting
//! falls back to Bland's rule to rule out cycling, and the result is meant to
//! certify the first-order route, so the two implementations share nothing.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::model::SensingMatrix;
use crate::solver::WeightVector;

/// Hard caps on reference instances (rows x signal width).
pub const REFERENCE_LP_MAX_ROWS: usize = 32;
pub const REFERENCE_LP_MAX_COLS: usize = 64;

const PIVOT_TOL: f64 = 1e-10;
const COST_TOL: f64 = 1e-9;
/// Dantzig pricing switches to Bland's rule after this many pivots.
const DANTZIG_PIVOT_BUDGET: usize = 2_000;
const TOTAL_PIVOT_BUDGET: usize = 20_000;

/// Exact weighted l1 minimizer over `{x : A x = y}` for small instances.
pub fn solve_reference_lp(
    phi: &SensingMatrix,
    y: &ArrayView1<f64>,
    w: &WeightVector,
) -> Result<Array1<f64>> {
    let n = phi.rows();
    let cols = phi.cols();
    if n > REFERENCE_LP_MAX_ROWS || cols > REFERENCE_LP_MAX_COLS {
        return Err(Error::Lp(format!(
            "instance {n}x{cols} above the reference cap {REFERENCE_LP_MAX_ROWS}x{REFERENCE_LP_MAX_COLS}"
        )));
    }
    if y.len() != n {
        return Err(Error::dim(format!("y length {} vs {n} rows", y.len())));
    }
    if w.len() != cols {
        return Err(Error::dim(format!(
            "weight length {} vs {cols} columns",
            w.len()
        )));
    }

    let mut tab = Tableau::new(phi, y, w);
    tab.phase_one()?;
    tab.phase_two()?;
    Ok(tab.extract(cols))
}

/// Dense tableau over the split variables plus one artificial per row.
/// Column layout: `[u (cols) | v (cols) | artificials (n) | rhs]`.
struct Tableau {
    t: Array2<f64>,
    /// Reduced-cost row (same column layout, rhs slot holds -objective).
    cost: Array1<f64>,
    basis: Vec<usize>,
    n: usize,
    n_real: usize,
    costs: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn new(phi: &SensingMatrix, y: &ArrayView1<f64>, w: &WeightVector) -> Self {
        let n = phi.rows();
        let cols = phi.cols();
        let n_real = 2 * cols;
        let width = n_real + n + 1;
        let mut t = Array2::<f64>::zeros((n, width));
        for i in 0..n {
            let flip = if y[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..cols {
                let a = flip * phi.entries()[[i, j]];
                t[[i, j]] = a;
                t[[i, cols + j]] = -a;
            }
            t[[i, n_real + i]] = 1.0;
            t[[i, width - 1]] = flip * y[i];
        }
        let mut costs = Vec::with_capacity(n_real);
        costs.extend(w.as_slice());
        costs.extend(w.as_slice());
        Tableau {
            t,
            cost: Array1::zeros(width),
            basis: (0..n).map(|i| n_real + i).collect(),
            n,
            n_real,
            costs,
            pivots: 0,
        }
    }

    fn width(&self) -> usize {
        self.t.ncols()
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[[i, self.width() - 1]]
    }

    /// Rebuilds the reduced-cost row `c - c_B B^-1 A` for the given
    /// per-column costs.
    fn reset_costs(&mut self, col_cost: impl Fn(usize) -> f64) {
        let width = self.width();
        self.cost.fill(0.0);
        for j in 0..width - 1 {
            self.cost[j] = col_cost(j);
        }
        for i in 0..self.n {
            let cb = col_cost(self.basis[i]);
            if cb != 0.0 {
                for j in 0..width {
                    self.cost[j] -= cb * self.t[[i, j]];
                }
            }
        }
    }

    /// One pivot: returns false when no entering column remains (optimal).
    fn pivot_step(&mut self, enterable: usize) -> Result<bool> {
        // pricing: Dantzig first, Bland once the budget is spent
        let entering = if self.pivots < DANTZIG_PIVOT_BUDGET {
            let mut best = COST_TOL;
            let mut best_j = None;
            for j in 0..enterable {
                let d = -self.cost[j];
                if d > best {
                    best = d;
                    best_j = Some(j);
                }
            }
            best_j
        } else {
            (0..enterable).find(|&j| self.cost[j] < -COST_TOL)
        };
        let Some(jin) = entering else {
            return Ok(false);
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.n {
            let a = self.t[[i, jin]];
            if a > PIVOT_TOL {
                let ratio = self.rhs(i) / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio < lr + 1e-12 && self.basis[i] < self.basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((iout, _)) = leave else {
            return Err(Error::Lp("unbounded program".to_string()));
        };

        self.pivots += 1;
        if self.pivots > TOTAL_PIVOT_BUDGET {
            return Err(Error::Lp("pivot budget exhausted".to_string()));
        }

        let width = self.width();
        let piv = self.t[[iout, jin]];
        {
            let mut row = self.t.row_mut(iout);
            row.mapv_inplace(|v| v / piv);
        }
        for i in 0..self.n {
            if i == iout {
                continue;
            }
            let f = self.t[[i, jin]];
            if f != 0.0 {
                for j in 0..width {
                    self.t[[i, j]] -= f * self.t[[iout, j]];
                }
                self.t[[i, jin]] = 0.0;
            }
        }
        let f = self.cost[jin];
        if f != 0.0 {
            for j in 0..width {
                self.cost[j] -= f * self.t[[iout, j]];
            }
            self.cost[jin] = 0.0;
        }
        self.basis[iout] = jin;
        Ok(true)
    }

    fn phase_one(&mut self) -> Result<()> {
        let n_real = self.n_real;
        self.reset_costs(|j| if j >= n_real { 1.0 } else { 0.0 });
        let enterable = n_real; // artificials never re-enter
        while self.pivot_step(enterable)? {}
        let scale: f64 = (0..self.n).map(|i| self.rhs(i).abs()).fold(1.0, f64::max);
        let infeas: f64 = (0..self.n)
            .filter(|&i| self.basis[i] >= n_real)
            .map(|i| self.rhs(i))
            .sum();
        if infeas > 1e-8 * scale {
            return Err(Error::Infeasible(format!(
                "phase-one objective {infeas:.3e} above tolerance"
            )));
        }
        Ok(())
    }

    fn phase_two(&mut self) -> Result<()> {
        let n_real = self.n_real;
        let costs = self.costs.clone();
        self.reset_costs(|j| if j < n_real { costs[j] } else { 0.0 });
        // a leftover artificial sits basic at level zero on a degenerate row;
        // it never enters again, so it simply pins that row
        while self.pivot_step(n_real)? {}
        Ok(())
    }

    fn extract(&self, cols: usize) -> Array1<f64> {
        let mut x = Array1::zeros(cols);
        for (i, &b) in self.basis.iter().enumerate() {
            if b < cols {
                x[b] += self.rhs(i);
            } else if b < 2 * cols {
                x[b - cols] -= self.rhs(i);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_gaussian_matrix, sample_sparse_signal};
    use crate::rng::RngSpec;
    use ndarray::array;

    fn objective(x: &Array1<f64>, w: &WeightVector) -> f64 {
        x.iter().zip(w.as_slice()).map(|(v, w)| w * v.abs()).sum()
    }

    #[test]
    fn identity_system_is_returned_exactly() {
        let phi = SensingMatrix::from_dense(Array2::eye(4)).unwrap();
        let y = array![1.0, -2.0, 0.0, 0.5];
        let w = WeightVector::uniform(4);
        let x = solve_reference_lp(&phi, &y.view(), &w).unwrap();
        for (a, b) in x.iter().zip(y.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_row_has_unit_objective() {
        let phi = SensingMatrix::from_dense(array![[1.0, 1.0]]).unwrap();
        let y = array![1.0];
        let w = WeightVector::uniform(2);
        let x = solve_reference_lp(&phi, &y.view(), &w).unwrap();
        assert!(
            (objective(&x, &w) - 1.0).abs() < 1e-9,
            "objective {}",
            objective(&x, &w)
        );
        assert!((x[0] + x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_instances_reach_the_enumerated_optimum() {
        // max_support = rows makes the enumeration oracle exact: some optimal
        // vertex of the LP has at most that many nonzeros.
        for seed in 0..10u64 {
            let spec = RngSpec::new(seed);
            let phi = make_gaussian_matrix(6, 12, false, &spec.derive(0)).unwrap();
            let x0 = sample_sparse_signal(12, 2, 1.0, &spec.derive(1))
                .unwrap()
                .dense();
            let y = phi.apply(&x0.view()).unwrap();
            let w = WeightVector::uniform(12);
            let x = solve_reference_lp(&phi, &y.view(), &w).unwrap();
            let (_, best) =
                crate::solver::oracle::brute_force_weighted_l1(&phi, &y.view(), &w, 6).unwrap();
            let obj = objective(&x, &w);
            assert!(
                (obj - best).abs() <= 1e-8 * best.max(1.0),
                "seed {seed}: lp objective {obj} vs enumerated optimum {best}"
            );
            let resid = (&phi.apply(&x.view()).unwrap() - &y).mapv(f64::abs).sum();
            assert!(
                resid <= 1e-8 * y.mapv(f64::abs).sum(),
                "seed {seed}: residual {resid}"
            );
        }
    }

    #[test]
    fn weights_steer_the_optimum_between_equivalent_columns() {
        // two identical columns: all mass lands on the cheaper one
        let phi = SensingMatrix::from_dense(array![[1.0, 1.0]]).unwrap();
        let y = array![2.0];
        let w = WeightVector::new(array![5.0, 1.0]).unwrap();
        let x = solve_reference_lp(&phi, &y.view(), &w).unwrap();
        assert!(x[0].abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_measurements_are_handled() {
        let phi = SensingMatrix::from_dense(array![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let y = array![-3.0, 2.0];
        let w = WeightVector::uniform(2);
        let x = solve_reference_lp(&phi, &y.view(), &w).unwrap();
        assert!((x[0] + 3.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system_is_detected() {
        let phi = SensingMatrix::from_dense(array![[0.0, 0.0]]).unwrap();
        let y = array![1.0];
        let w = WeightVector::uniform(2);
        assert!(matches!(
            solve_reference_lp(&phi, &y.view(), &w),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn oversized_instances_are_refused() {
        let phi = make_gaussian_matrix(33, 66, false, &RngSpec::new(0)).unwrap();
        let y = Array1::zeros(33);
        let w = WeightVector::uniform(66);
        assert!(matches!(
            solve_reference_lp(&phi, &y.view(), &w),
            Err(Error::Lp(_))
        ));
    }
}
