//! Ground-truth generation, Gaussian and misspecified Laplace data
//! sampling, and empirical convergence-rate probes.

use crate::data::DataMatrix;
use crate::mcd::{matrix_norm, CholeskyModel, NormKind};
use crate::posterior::Hyperparams;
use crate::sampler::{self, ChainConfig, SamplerError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// Specification of a random sparse ground-truth Cholesky model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TruthSpec {
    pub p: usize,
    /// Fraction of lower-triangular entries set nonzero.
    pub sparsity: f64,
    pub coef_low: f64,
    pub coef_high: f64,
    pub d_low: f64,
    pub d_high: f64,
    pub seed: u64,
}

impl Default for TruthSpec {
    fn default() -> Self {
        Self {
            p: 50,
            sparsity: 0.03,
            coef_low: 0.3,
            coef_high: 0.7,
            d_low: 2.0,
            d_high: 5.0,
            seed: 0,
        }
    }
}

impl TruthSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.p < 2 {
            return Err(format!("p must be at least 2, got {}", self.p));
        }
        if !(self.sparsity >= 0.0 && self.sparsity < 1.0) {
            return Err(format!("sparsity must lie in [0, 1), got {}", self.sparsity));
        }
        if !(0.0 < self.coef_low && self.coef_low < self.coef_high) {
            return Err(format!(
                "need 0 < coef_low < coef_high, got ({}, {})",
                self.coef_low, self.coef_high
            ));
        }
        if !(0.0 < self.d_low && self.d_low <= self.d_high) {
            return Err(format!(
                "need 0 < d_low <= d_high, got ({}, {})",
                self.d_low, self.d_high
            ));
        }
        Ok(())
    }

    /// ⌈sparsity · p(p−1)/2⌉.
    pub fn nonzero_count(&self) -> usize {
        let total = self.p * (self.p - 1) / 2;
        (self.sparsity * total as f64).ceil() as usize
    }
}

/// Samples a sparse truth: uniformly chosen lower-triangular positions,
/// magnitudes uniform on [coef_low, coef_high] with fair random sign, and
/// conditional variances uniform on [d_low, d_high].
pub fn generate_truth<R: Rng + ?Sized>(spec: &TruthSpec, rng: &mut R) -> CholeskyModel {
    spec.validate().expect("invalid truth spec");
    let p = spec.p;
    let total = p * (p - 1) / 2;
    let count = spec.nonzero_count();
    let positions = rand::seq::index::sample(rng, total, count);
    let mut a_rows: Vec<Vec<f64>> = (0..p).map(|j| vec![0.0; j]).collect();
    for flat in positions.iter() {
        // Flat index over lower-triangular positions, row-major: row j
        // (0-based, j >= 1) starts at j(j−1)/2.
        let mut j = 1usize;
        while (j + 1) * j / 2 <= flat {
            j += 1;
        }
        let l = flat - j * (j - 1) / 2;
        let mag = rng.gen::<f64>() * (spec.coef_high - spec.coef_low) + spec.coef_low;
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        a_rows[j][l] = sign * mag;
    }
    let d = (0..p)
        .map(|_| rng.gen::<f64>() * (spec.d_high - spec.d_low) + spec.d_low)
        .collect();
    CholeskyModel::new(a_rows, d)
}

/// One observation via the autoregressive recursion; `row_scale` multiplies
/// the whole row (1 for Gaussian, √W for the Laplace scale mixture).
fn sample_row<R: Rng + ?Sized>(truth: &CholeskyModel, rng: &mut R, buf: &mut [f64]) {
    let p = truth.p();
    for j in 0..p {
        let z: f64 = StandardNormal.sample(rng);
        let mut mean = 0.0;
        for (l, &a) in truth.a_row(j + 1).iter().enumerate() {
            if a != 0.0 {
                mean += a * buf[l];
            }
        }
        buf[j] = mean + truth.d()[j].sqrt() * z;
    }
}

/// n i.i.d. draws from N_p(0, Ω⁻¹), generated structurally (no p×p
/// inversion).
pub fn sample_gaussian<R: Rng + ?Sized>(
    n: usize,
    truth: &CholeskyModel,
    rng: &mut R,
) -> DataMatrix {
    let p = truth.p();
    let mut rows = vec![vec![0.0; p]; n];
    for row in &mut rows {
        sample_row(truth, rng, row);
    }
    DataMatrix::from_rows(&rows).expect("sampled data is valid")
}

/// Multivariate Laplace draws X = √W·Z with W ~ Exp(1) and Z ~ N_p(0, Σ₀),
/// an exponential scale mixture whose covariance is exactly Σ₀.
pub fn sample_laplace<R: Rng + ?Sized>(
    n: usize,
    truth: &CholeskyModel,
    rng: &mut R,
) -> DataMatrix {
    let p = truth.p();
    let mut rows = vec![vec![0.0; p]; n];
    for row in &mut rows {
        let w: f64 = Exp1.sample(rng);
        sample_row(truth, rng, row);
        let scale = w.sqrt();
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    DataMatrix::from_rows(&rows).expect("sampled data is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataLaw {
    Gaussian,
    Laplace,
}

impl std::str::FromStr for DataLaw {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "laplace" => Ok(Self::Laplace),
            other => Err(format!("unknown data law: {other}")),
        }
    }
}

pub fn sample_data<R: Rng + ?Sized>(
    law: DataLaw,
    n: usize,
    truth: &CholeskyModel,
    rng: &mut R,
) -> DataMatrix {
    match law {
        DataLaw::Gaussian => sample_gaussian(n, truth, rng),
        DataLaw::Laplace => sample_laplace(n, truth, rng),
    }
}

/// Mean posterior estimation error for a grid of sample sizes.
///
/// For each n: draw a fresh truth and data set per replicate, fit the DAG,
/// then average ‖A − A₀‖ (in `norm`) over posterior model draws from the
/// selected supports.
pub fn rate_probe(
    norm: NormKind,
    n_grid: &[usize],
    spec: &TruthSpec,
    replicates: usize,
    hyper: &Hyperparams,
    cfg: &ChainConfig,
    draws_per_fit: usize,
) -> Result<Vec<(usize, f64)>, SamplerError> {
    assert!(n_grid.windows(2).all(|w| w[0] < w[1]), "n_grid must be increasing");
    let mut out = Vec::with_capacity(n_grid.len());
    for (ni, &n) in n_grid.iter().enumerate() {
        let mut total = 0.0;
        for rep in 0..replicates {
            let stream = (ni * replicates + rep) as u64;
            let mut rng =
                ChaCha8Rng::seed_from_u64(sampler::derive_seed(spec.seed, 1000 + stream));
            let truth = generate_truth(spec, &mut rng);
            let data = sample_gaussian(n, &truth, &mut rng);
            let cell_cfg = ChainConfig {
                seed: sampler::derive_seed(cfg.seed, 2000 + stream),
                ..cfg.clone()
            };
            let fit = sampler::fit_dag(&data, hyper, &cell_cfg)?;
            let a0 = truth.a_dense();
            let mut err = 0.0;
            for _ in 0..draws_per_fit {
                let model =
                    sampler::sample_posterior_model(&data, &fit.selected, hyper, &mut rng)?;
                err += matrix_norm(&(model.a_dense() - &a0), norm);
            }
            total += err / draws_per_fit as f64;
        }
        out.push((n, total / replicates as f64));
    }
    Ok(out)
}
