//! Per-column Metropolis–Hastings over support sets, chain management,
//! inclusion probabilities and model selection.
//!
//! Columns j = 2..p are independent work units sharing only the immutable
//! data matrix. Each column owns a ChaCha stream seeded from
//! `derive_seed(cfg.seed, j)`, so results are identical for any worker
//! count and any column processing order.

use crate::data::{DataMatrix, SupportSet};
use crate::gram::FitSummary;
use crate::mcd::CholeskyModel;
use crate::posterior::{
    self, log_marginal_from_dhat, sample_a_from_fit, sample_d_from_dhat, Hyperparams,
    PosteriorError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SamplerError {
    #[error("column {column}: initial support is inadmissible")]
    InvalidInit { column: usize },
    #[error("column {column}: {source}")]
    Column { column: usize, source: PosteriorError },
    #[error("invalid chain config: {0}")]
    InvalidConfig(String),
}

/// Chain initialization strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Empty,
    /// Start from the k indices most correlated (in absolute value) with
    /// the response column, k capped at R_j.
    Screening(usize),
    /// Explicit initial indices; entries >= j are ignored for column j.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub init: Init,
    pub seed: u64,
    pub threshold: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            iterations: 24_000,
            burn_in: 4_000,
            init: Init::Screening(5),
            seed: 0,
            threshold: 0.5,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.iterations == 0 || self.burn_in >= self.iterations {
            return Err(SamplerError::InvalidConfig(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(SamplerError::InvalidConfig(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Post-burn-in sample path of one column's chain, with the visited
/// supports stored run-length encoded.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub column: usize,
    /// (support indices, run length) pairs covering the retained iterations.
    pub visited: Vec<(Vec<usize>, u32)>,
    pub accept_count: u64,
    pub proposal_count: u64,
    /// Per-index inclusion frequency over retained iterations (entry l−1
    /// for index l in 1..j).
    pub inclusion: Vec<f64>,
}

impl ChainTrace {
    pub fn retained(&self) -> u64 {
        self.visited.iter().map(|(_, c)| *c as u64).sum()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposal_count == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.proposal_count as f64
        }
    }
}

/// Deterministic per-stream seed derivation (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One proposal from the add/delete flip kernel.
///
/// Returns the proposed support and log q(S|S′) − log q(S′|S). Infeasible
/// moves (delete from the empty set, add at the size cap) are returned as
/// self-proposals with ratio 0.
pub fn propose<R: Rng + ?Sized>(
    s: &SupportSet,
    j: usize,
    r_j: usize,
    rng: &mut R,
) -> (SupportSet, f64) {
    debug_assert_eq!(s.column(), j);
    let len = s.len();
    let zeros = (j - 1) - len;
    let delete = rng.gen::<bool>();
    if delete {
        if len == 0 {
            return (s.clone(), 0.0);
        }
        let pos = rng.gen_range(0..len);
        let l = s.indices()[pos];
        let ratio = (len as f64 / (zeros + 1) as f64).ln();
        (s.with_removed(l), ratio)
    } else {
        if len >= r_j || zeros == 0 {
            return (s.clone(), 0.0);
        }
        let pick = rng.gen_range(0..zeros);
        let l = nth_absent(s, j, pick);
        let ratio = (zeros as f64 / (len + 1) as f64).ln();
        (s.with_added(l), ratio)
    }
}

/// The `pick`-th (0-based) index in 1..j absent from `s`.
fn nth_absent(s: &SupportSet, j: usize, pick: usize) -> usize {
    let mut remaining = pick;
    let mut members = s.indices().iter().peekable();
    for l in 1..j {
        if members.peek() == Some(&&l) {
            members.next();
            continue;
        }
        if remaining == 0 {
            return l;
        }
        remaining -= 1;
    }
    unreachable!("pick out of range in nth_absent")
}

/// Current chain state: support, cached Gram fit, and log score.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub support: SupportSet,
    pub fit: FitSummary,
    pub log_score: f64,
}

impl ChainState {
    pub fn init(
        data: &DataMatrix,
        support: SupportSet,
        hyper: &Hyperparams,
        r_j: usize,
    ) -> Result<Self, SamplerError> {
        let column = support.column();
        let fit = FitSummary::fit(data, &support)
            .map_err(|_| SamplerError::InvalidInit { column })?;
        let log_score = log_marginal_from_dhat(
            fit.d_hat(),
            support.len(),
            column,
            data.n(),
            data.p(),
            hyper,
            r_j,
        );
        if log_score == f64::NEG_INFINITY {
            return Err(SamplerError::InvalidInit { column });
        }
        Ok(Self { support, fit, log_score })
    }
}

/// One MH step. Always consumes exactly one branch draw, at most one index
/// draw, and exactly one uniform accept draw, so traces stay reproducible
/// regardless of scoring-cache internals. Returns whether the proposal was
/// accepted (self-proposals count as accepted).
pub fn mh_step<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &DataMatrix,
    hyper: &Hyperparams,
    r_j: usize,
    rng: &mut R,
) -> bool {
    let j = state.support.column();
    let (cand, log_q_ratio) = propose(&state.support, j, r_j, rng);
    let u: f64 = rng.gen();
    if cand == state.support {
        return true; // self-proposal
    }
    let cand_fit = if cand.len() > state.support.len() {
        let added = *cand
            .indices()
            .iter()
            .find(|l| !state.support.contains(**l))
            .expect("added index");
        state.fit.update_add(data, added)
    } else {
        let removed = *state
            .support
            .indices()
            .iter()
            .find(|l| !cand.contains(**l))
            .expect("removed index");
        state.fit.update_remove(data, removed)
    };
    let (cand_fit, cand_score) = match cand_fit {
        Ok(fit) => {
            let score = log_marginal_from_dhat(
                fit.d_hat(),
                cand.len(),
                j,
                data.n(),
                data.p(),
                hyper,
                r_j,
            );
            (Some(fit), score)
        }
        Err(_) => (None, f64::NEG_INFINITY),
    };
    if cand_score == f64::NEG_INFINITY {
        return false;
    }
    let log_acc = cand_score - state.log_score + log_q_ratio;
    if u.ln() < log_acc {
        state.support = cand;
        state.fit = cand_fit.expect("finite score implies fit");
        state.log_score = cand_score;
        true
    } else {
        false
    }
}

/// Screening start: indices with the largest |corr(x_l, x_j)|, greedily
/// skipping numerically dependent columns so the start is admissible.
fn screening_support(data: &DataMatrix, j: usize, k: usize, r_j: usize) -> SupportSet {
    let k = k.min(r_j).min(j - 1);
    if k == 0 {
        return SupportSet::empty(j);
    }
    let yn = data.col_norm_sq(j).sqrt();
    let mut scored: Vec<(f64, usize)> = (1..j)
        .map(|l| {
            let ln = data.col_norm_sq(l).sqrt();
            let c = if ln > 0.0 && yn > 0.0 {
                (data.dot(l, j) / (ln * yn)).abs()
            } else {
                0.0
            };
            (c, l)
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut fit = FitSummary::fit(data, &SupportSet::empty(j)).expect("empty fit");
    let mut chosen = Vec::new();
    for (_, l) in scored {
        if chosen.len() == k {
            break;
        }
        match fit.update_add(data, l) {
            Ok(next) => {
                fit = next;
                chosen.push(l);
            }
            Err(_) => continue,
        }
    }
    SupportSet::new(j, chosen).expect("screening support invariant")
}

fn initial_support(
    data: &DataMatrix,
    j: usize,
    r_j: usize,
    init: &Init,
) -> Result<SupportSet, SamplerError> {
    match init {
        Init::Empty => Ok(SupportSet::empty(j)),
        Init::Screening(k) => Ok(screening_support(data, j, *k, r_j)),
        Init::Explicit(indices) => {
            let filtered: Vec<usize> = indices.iter().copied().filter(|&l| l < j).collect();
            SupportSet::new(j, filtered).map_err(|_| SamplerError::InvalidInit { column: j })
        }
    }
}

/// Runs one column's chain. Deterministic given (data, hyper, cfg.seed).
pub fn run_chain(
    data: &DataMatrix,
    j: usize,
    hyper: &Hyperparams,
    cfg: &ChainConfig,
) -> Result<ChainTrace, SamplerError> {
    cfg.validate()?;
    let r_j = posterior::default_r(data.n(), data.p(), hyper, j);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, j as u64));
    let start = initial_support(data, j, r_j, &cfg.init)?;
    let mut state = ChainState::init(data, start, hyper, r_j)?;

    let mut accept_count = 0u64;
    let mut visited: Vec<(Vec<usize>, u32)> = Vec::new();
    let mut counts = vec![0u64; j - 1];
    let retained = (cfg.iterations - cfg.burn_in) as u64;

    for it in 0..cfg.iterations {
        if mh_step(&mut state, data, hyper, r_j, &mut rng) {
            accept_count += 1;
        }
        if it >= cfg.burn_in {
            for &l in state.support.indices() {
                counts[l - 1] += 1;
            }
            match visited.last_mut() {
                Some((s, c)) if s.as_slice() == state.support.indices() => *c += 1,
                _ => visited.push((state.support.indices().to_vec(), 1)),
            }
        }
    }
    let inclusion = counts.iter().map(|&c| c as f64 / retained as f64).collect();
    Ok(ChainTrace {
        column: j,
        visited,
        accept_count,
        proposal_count: cfg.iterations as u64,
        inclusion,
    })
}

/// Result of fitting every column of the DAG.
#[derive(Debug, Clone, PartialEq)]
pub struct DagFit {
    /// Traces for columns j = 2..=p (index j−2).
    pub traces: Vec<ChainTrace>,
    /// Thresholded support per column j = 2..=p.
    pub selected: Vec<SupportSet>,
    /// Strictly lower-triangular inclusion probabilities; row j−2 holds
    /// entries for (j, 1..j−1).
    pub inclusion: Vec<Vec<f64>>,
}

/// Runs all columns (in parallel when a rayon pool is available) and
/// thresholds inclusion probabilities into a final selected model.
pub fn fit_dag(
    data: &DataMatrix,
    hyper: &Hyperparams,
    cfg: &ChainConfig,
) -> Result<DagFit, SamplerError> {
    cfg.validate()?;
    let traces: Vec<ChainTrace> = (2..=data.p())
        .into_par_iter()
        .map(|j| run_chain(data, j, hyper, cfg))
        .collect::<Result<_, _>>()?;
    let selected = traces
        .iter()
        .map(|t| {
            let idx: Vec<usize> = t
                .inclusion
                .iter()
                .enumerate()
                .filter(|(_, &pr)| pr >= cfg.threshold)
                .map(|(i, _)| i + 1)
                .collect();
            SupportSet::new(t.column, idx).expect("selected support invariant")
        })
        .collect();
    let inclusion = traces.iter().map(|t| t.inclusion.clone()).collect();
    Ok(DagFit { traces, selected, inclusion })
}

/// Draws one (A, D) model from the conditional posterior given per-column
/// supports (entry j−2 of `supports` applies to column j; column 1 has no
/// regressors and only a variance draw).
pub fn sample_posterior_model<R: Rng + ?Sized>(
    data: &DataMatrix,
    supports: &[SupportSet],
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<CholeskyModel, SamplerError> {
    let p = data.p();
    assert_eq!(supports.len(), p - 1, "need one support per column 2..=p");
    let n = data.n();
    let mut a_rows: Vec<Vec<f64>> = (0..p).map(|j| vec![0.0; j]).collect();
    let mut d = Vec::with_capacity(p);

    let d1_hat = data.col_norm_sq(1) / n as f64;
    d.push(
        sample_d_from_dhat(d1_hat, n, hyper, rng)
            .map_err(|source| SamplerError::Column { column: 1, source })?,
    );
    for (idx, s) in supports.iter().enumerate() {
        let j = idx + 2;
        assert_eq!(s.column(), j, "support column mismatch");
        let fit = FitSummary::fit(data, s).map_err(|_| SamplerError::Column {
            column: j,
            source: PosteriorError::SingularGram,
        })?;
        let dj = sample_d_from_dhat(fit.d_hat(), n, hyper, rng)
            .map_err(|source| SamplerError::Column { column: j, source })?;
        if !s.is_empty() {
            let a = sample_a_from_fit(&fit, dj, hyper, rng);
            for (&l, &v) in s.indices().iter().zip(&a) {
                a_rows[j - 1][l - 1] = v;
            }
        }
        d.push(dj);
    }
    Ok(CholeskyModel::new(a_rows, d))
}
