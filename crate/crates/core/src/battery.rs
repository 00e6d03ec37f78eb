//! Seeded randomized checks of the symmetric-function layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symfunc::{
    gamma_cone_contains, newton_maclaurin_gap, sigma_grad, sigma_matrix, verify_matrix_identities, ConeSpec, SymMat,
    SymVec,
};

/// Central-difference step for the gradient check.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryReport {
    pub seed: u64,
    pub samples: usize,
    /// Largest residual of the three matrix identities over all samples and orders.
    pub identity_max: f64,
    /// Largest `|S_k^{ij} − ∂S_k/∂a_ij|` against central differences, relative to `max(1, |S_k^{ij}|)`.
    pub gradient_max: f64,
    /// Smallest Newton–MacLaurin gap `m < l` over cone samples.
    pub maclaurin_min: f64,
}

impl BatteryReport {
    pub fn passed(&self, identity_tol: f64, gradient_tol: f64, maclaurin_tol: f64) -> bool {
        self.identity_max <= identity_tol && self.gradient_max <= gradient_tol && self.maclaurin_min >= -maclaurin_tol
    }
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMat<f64> {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(-1.0..1.0);
            data[i * n + j] = x;
            data[j * n + i] = x;
        }
    }
    SymMat::from_row_major(n, data).expect("finite entries")
}

/// `∂S_k/∂a_ij` by central differences along the symmetric perturbation.
fn fd_gradient_error(a: &SymMat<f64>, k: usize) -> f64 {
    let n = a.dim();
    let g = sigma_grad(a, k);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let bump = |sgn: f64| {
                let mut d = a.as_slice().to_vec();
                d[i * n + j] += sgn * FD_STEP;
                if i != j {
                    d[j * n + i] += sgn * FD_STEP;
                }
                sigma_matrix(&SymMat::from_row_major(n, d).expect("finite entries"), k)
            };
            let mut fd = (bump(1.0) - bump(-1.0)) / (2.0 * FD_STEP);
            if i != j {
                fd *= 0.5;
            }
            worst = worst.max((fd - g.get(i, j)).abs() / g.get(i, j).abs().max(1.0));
        }
    }
    worst
}

/// A vector of `Γ_l`: uniform entries shifted up until every `S_j`, `j ≤ l`, is positive.
fn cone_sample(rng: &mut ChaCha8Rng, n: usize, l: usize) -> SymVec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
    loop {
        let v = SymVec::new(x.clone()).expect("finite entries");
        if gamma_cone_contains(&v, ConeSpec { n, k: l }).unwrap_or(false) {
            return v;
        }
        x.iter_mut().for_each(|e| *e += 0.25);
    }
}

/// Runs `samples` random symmetric matrices with `n ∈ {3,…,6}`.
pub fn run_battery(seed: u64, samples: usize) -> BatteryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        BatteryReport { seed, samples, identity_max: 0.0, gradient_max: 0.0, maclaurin_min: f64::INFINITY };
    for _ in 0..samples {
        let n = rng.gen_range(3..=6);
        let a = random_sym(&mut rng, n);
        for k in 1..=n {
            let res = verify_matrix_identities(&a, k).expect("valid order");
            report.identity_max = report.identity_max.max(res.max());
        }
        let k = rng.gen_range(1..=n);
        report.gradient_max = report.gradient_max.max(fd_gradient_error(&a, k));
        let l = rng.gen_range(1..=n);
        let v = cone_sample(&mut rng, n, l);
        for m in 1..l {
            let gap = newton_maclaurin_gap(&v, m, l).expect("sample lies in the cone");
            report.maclaurin_min = report.maclaurin_min.min(gap);
        }
    }
    report
}
