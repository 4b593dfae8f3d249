//! Built-in consistency checks, runnable from the CLI.
//!
//! These are quick end-to-end probes of the numeric core: frozen reference
//! constants, agreement between the two solver routes, and bit-exact replay
//! of harness trials. They are meant for a fresh install or a new machine,
//! where a unit test run is not at hand.

use super::{
    binary_entropy, mix_seed, noisy_success_threshold, sweep_curve, RecipeKind, SweepTemplate,
};
use crate::adaptive::generous_weight;
use crate::harness::{DecoderSpec, KRule, MatrixRecipe, SignalTemplate};
use crate::model::{make_gaussian_matrix, sample_sparse_signal};
use crate::rng::RngSpec;
use crate::solver::{SolverKind, SolverParams, SubproblemSolver, WeightVector};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            passed: false,
            detail: detail.into(),
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn check_entropy() -> CheckResult {
    let name = "binary_entropy";
    let cases = [
        (0.5, 1.0),
        (0.25, 0.8112781244591328),
        (0.0, 0.0),
        (1.0, 0.0),
    ];
    for (p, want) in cases {
        match binary_entropy(p) {
            Ok(got) if close(got, want, 1e-12) => {}
            Ok(got) => return CheckResult::fail(name, format!("H({p}) = {got}, want {want}")),
            Err(e) => return CheckResult::fail(name, format!("H({p}) failed: {e}")),
        }
    }
    CheckResult::pass(name, "entropy values match stored references")
}

fn check_noise_threshold() -> CheckResult {
    let name = "noise_threshold";
    let want = 0.5225578117937447;
    match noisy_success_threshold(128, 256, 64, 0.01) {
        Ok(got) if close(got, want, 1e-12) => {
            CheckResult::pass(name, format!("threshold(128, 256, 64, 0.01) = {got:.12}"))
        }
        Ok(got) => CheckResult::fail(name, format!("threshold = {got}, want {want}")),
        Err(e) => CheckResult::fail(name, format!("threshold failed: {e}")),
    }
}

fn check_generous_weight() -> CheckResult {
    let name = "generous_weight";
    let cases = [(1.0, 1.0), (16.0, 3.3), (1.0 / 16.0, 80.0 / 27.0)];
    for (s, want) in cases {
        match generous_weight(s) {
            Ok(got) if close(got, want, 1e-12) => {}
            Ok(got) => return CheckResult::fail(name, format!("weight({s}) = {got}, want {want}")),
            Err(e) => return CheckResult::fail(name, format!("weight({s}) failed: {e}")),
        }
    }
    CheckResult::pass(name, "reweighting map matches stored references")
}

fn check_solver_routes() -> CheckResult {
    let name = "solver_routes_agree";
    let rows = 8;
    let cols = 16;
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let spec = RngSpec::new(mix_seed(0x5e1f, seed));
        let matrix = match make_gaussian_matrix(rows, cols, false, &spec.derive(0)) {
            Ok(m) => m,
            Err(e) => return CheckResult::fail(name, format!("matrix build failed: {e}")),
        };
        let signal = match sample_sparse_signal(cols, 2, 1.0, &spec.derive(1)) {
            Ok(s) => s,
            Err(e) => return CheckResult::fail(name, format!("signal draw failed: {e}")),
        };
        let y = match matrix.apply(&signal.dense().view()) {
            Ok(y) => y,
            Err(e) => return CheckResult::fail(name, format!("measurement failed: {e}")),
        };
        let mut stream = spec.derive(2).stream();
        let weights = match WeightVector::new(
            (0..cols)
                .map(|_| 0.5 + 1.5 * rand::Rng::gen::<f64>(&mut stream))
                .collect(),
        ) {
            Ok(w) => w,
            Err(e) => return CheckResult::fail(name, format!("weight draw failed: {e}")),
        };
        let mut objectives = [0.0f64; 2];
        for (slot, kind) in [SolverKind::FirstOrder, SolverKind::ReferenceLp]
            .iter()
            .enumerate()
        {
            let params = SolverParams {
                kind: *kind,
                ..SolverParams::default()
            };
            let report = match SubproblemSolver::new(&matrix, y.view(), params)
                .and_then(|solver| solver.solve(&weights, None))
            {
                Ok(r) => r,
                Err(e) => return CheckResult::fail(name, format!("{kind:?} failed: {e}")),
            };
            objectives[slot] = report
                .solution
                .iter()
                .zip(weights.as_slice())
                .map(|(x, w)| w * x.abs())
                .sum();
        }
        let gap = (objectives[0] - objectives[1]).abs() / objectives[1].abs().max(1e-12);
        worst = worst.max(gap);
        if gap > 1e-6 {
            return CheckResult::fail(
                name,
                format!("seed {seed}: objectives {objectives:?} differ by {gap:.2e}"),
            );
        }
    }
    CheckResult::pass(
        name,
        format!("5 instances, worst relative objective gap {worst:.2e}"),
    )
}

fn demo_template() -> SweepTemplate {
    SweepTemplate {
        matrix: MatrixRecipe {
            rows: 8,
            kind: RecipeKind::Gaussian { cols: 16 },
            normalize: false,
        },
        signal: SignalTemplate {
            block_lens: vec![],
            block_sparsity: vec![KRule::Axis],
            pooled: false,
            error_sparsity: KRule::Fixed(0),
            signal_scale: 1.0,
            error_scale: 1.0,
        },
        sigma: 0.0,
        decoder: DecoderSpec::Lga,
        greedy: Default::default(),
        solver: Default::default(),
        trials: 8,
        seed: 0xc0ffee,
    }
}

fn check_replay() -> CheckResult {
    let name = "trial_replay";
    let template = demo_template();
    let spec = match template.resolve(2) {
        Ok(s) => s,
        Err(e) => return CheckResult::fail(name, format!("resolve failed: {e}")),
    };
    for index in [0usize, 3] {
        let first = super::run_trial(&spec, index);
        let second = super::run_trial(&spec, index);
        if first.recovery_error.to_bits() != second.recovery_error.to_bits()
            || first.success != second.success
        {
            return CheckResult::fail(
                name,
                format!("trial {index} did not replay bit-identically"),
            );
        }
    }
    CheckResult::pass(name, "repeated trials replay bit-identically")
}

fn check_sweep_determinism() -> CheckResult {
    let name = "sweep_determinism";
    let template = demo_template();
    let axis = [1usize, 2, 3];
    let mut runs = Vec::new();
    for workers in [1usize, 2] {
        let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(p) => p,
            Err(e) => return CheckResult::fail(name, format!("pool build failed: {e}")),
        };
        match pool.install(|| sweep_curve(&template, &axis)) {
            Ok(points) => runs.push(points),
            Err(e) => return CheckResult::fail(name, format!("sweep failed: {e}")),
        }
    }
    let same = runs[0].len() == runs[1].len()
        && runs[0].iter().zip(&runs[1]).all(|(a, b)| {
            a.successes == b.successes
                && a.mean_relative_error.to_bits() == b.mean_relative_error.to_bits()
        });
    if same {
        CheckResult::pass(name, "1-worker and 2-worker sweeps agree bit for bit")
    } else {
        CheckResult::fail(name, "sweeps differ across worker counts")
    }
}

/// Run every check and collect the results.
pub fn run() -> Vec<CheckResult> {
    vec![
        check_entropy(),
        check_noise_threshold(),
        check_generous_weight(),
        check_solver_routes(),
        check_replay(),
        check_sweep_determinism(),
    ]
}
