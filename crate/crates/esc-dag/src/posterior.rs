//! Prior and fractional-posterior scoring for support sets, plus the
//! conditional samplers for (d_j, a_{S_j}).
//!
//! All scoring is done in log space and scores are only ever combined via
//! differences; `f64::NEG_INFINITY` marks an inadmissible support (size cap
//! exceeded, singular Gram, or zero residual variance).

use crate::data::{DataMatrix, SupportSet};
use crate::gram::FitSummary;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PosteriorError {
    #[error("residual variance is zero; the conditional for d is degenerate")]
    ZeroResidualVariance,
    #[error("singular Gram matrix for the requested support")]
    SingularGram,
}

/// Rule producing the per-column support-size cap R_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RRule {
    /// ⌊n(log p)⁻¹{(log n)⁻¹ ∨ c₃}⌋ with the strict-floor convention
    /// (⌊x⌋ = largest integer strictly smaller than x).
    ConditionP,
    /// ⌊n / log p⌋ with the standard floor. Default.
    OrderCap,
    /// Explicit caps, entry j−2 applying to column j.
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PriorVariant {
    /// Improper power prior on d_j.
    Esc,
    /// Proper inverse-gamma prior IG(ν₀/2, ν₀′) on d_j.
    Mesc,
}

impl std::str::FromStr for PriorVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ESC" => Ok(Self::Esc),
            "MESC" => Ok(Self::Mesc),
            other => Err(format!("unknown prior variant: {other}")),
        }
    }
}

/// Hyperparameters of the prior and fractional posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub nu0: f64,
    pub nu0_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub r_rule: RRule,
    pub variant: PriorVariant,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.999,
            gamma: 0.1,
            nu0: 0.0,
            nu0_prime: 1.0,
            c1: 0.0005,
            c2: 2.0,
            c3: 0.01,
            r_rule: RRule::OrderCap,
            variant: PriorVariant::Esc,
        }
    }
}

impl Hyperparams {
    /// Validates hard constraints; returns human-readable warnings for
    /// theory-guideline violations (c₂ < 2) instead of rejecting them.
    pub fn validate(&self) -> Result<Vec<String>, String> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.gamma <= 0.0 {
            return Err(format!("gamma must be positive, got {}", self.gamma));
        }
        if self.nu0 < 0.0 {
            return Err(format!("nu0 must be nonnegative, got {}", self.nu0));
        }
        if self.nu0_prime <= 0.0 && self.variant == PriorVariant::Mesc {
            return Err(format!("nu0_prime must be positive for MESC, got {}", self.nu0_prime));
        }
        if self.c1 <= 0.0 {
            return Err(format!("c1 must be positive, got {}", self.c1));
        }
        if self.c3 <= 0.0 {
            return Err(format!("c3 must be positive, got {}", self.c3));
        }
        let mut warnings = Vec::new();
        if self.c2 < 2.0 {
            warnings.push(format!(
                "c2 = {} is below the guideline c2 >= 2; proceeding anyway",
                self.c2
            ));
        }
        Ok(warnings)
    }
}

/// Unnormalized log posterior of one support set, with its residual
/// variance cached for reuse by the samplers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportScore {
    pub log_score: f64,
    pub d_hat: f64,
}

/// Strict floor: largest integer strictly smaller than `x`.
fn strict_floor(x: f64) -> usize {
    let f = x.floor();
    let v = if f == x { f - 1.0 } else { f };
    v.max(0.0) as usize
}

/// Support-size cap for column `j`, after the j−1 and n−2 caps.
///
/// The n−2 cap keeps d̂_S strictly positive with probability one; the score
/// is undefined at d̂_S = 0.
pub fn default_r(n: usize, p: usize, hyper: &Hyperparams, j: usize) -> usize {
    assert!(n >= 3 && p >= 2 && j >= 2);
    let rule = match &hyper.r_rule {
        RRule::ConditionP => {
            let lp = (p as f64).ln();
            let ln_inv = 1.0 / (n as f64).ln();
            strict_floor(n as f64 / lp * ln_inv.max(hyper.c3))
        }
        RRule::OrderCap => (n as f64 / (p as f64).ln()).floor() as usize,
        RRule::Explicit(caps) => caps.get(j - 2).copied().unwrap_or(0),
    };
    rule.min(j - 1).min(n - 2)
}

fn log_binom(n: usize, k: usize) -> f64 {
    (1..=k)
        .map(|i| (((n - k + i) as f64) / i as f64).ln())
        .sum()
}

/// log π_j(S) up to constants: −log C(j−1,|S|) − |S|(log c₁ + c₂ log p);
/// −∞ beyond the cap.
pub fn log_prior_support(s: &SupportSet, p: usize, hyper: &Hyperparams, r_j: usize) -> f64 {
    log_prior_support_size(s.len(), s.column(), p, hyper, r_j)
}

fn log_prior_support_size(
    s_len: usize,
    column: usize,
    p: usize,
    hyper: &Hyperparams,
    r_j: usize,
) -> f64 {
    if s_len > r_j {
        return f64::NEG_INFINITY;
    }
    let s = s_len as f64;
    -log_binom(column - 1, s_len) - s * (hyper.c1.ln() + hyper.c2 * (p as f64).ln())
}

/// Assembles the log marginal score from an already computed residual
/// variance. This is the sampler's hot path.
pub fn log_marginal_from_dhat(
    d_hat: f64,
    s_len: usize,
    column: usize,
    n: usize,
    p: usize,
    hyper: &Hyperparams,
    r_j: usize,
) -> f64 {
    let prior = log_prior_support_size(s_len, column, p, hyper, r_j);
    if prior == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let an = hyper.alpha * n as f64;
    let exponent = (an + hyper.nu0) / 2.0;
    let d_term = match hyper.variant {
        PriorVariant::Esc => {
            if d_hat <= 0.0 {
                return f64::NEG_INFINITY;
            }
            d_hat.ln()
        }
        PriorVariant::Mesc => (an * d_hat / 2.0 + hyper.nu0_prime).ln(),
    };
    prior - 0.5 * s_len as f64 * (1.0 + hyper.alpha / hyper.gamma).ln() - exponent * d_term
}

/// Log unnormalized α-posterior of `S` (fresh fit). A singular Gram or a
/// zero residual variance yields `log_score = −∞`, not an error.
pub fn log_marginal_support(
    data: &DataMatrix,
    s: &SupportSet,
    hyper: &Hyperparams,
    r_j: usize,
) -> SupportScore {
    if s.len() > r_j {
        return SupportScore { log_score: f64::NEG_INFINITY, d_hat: f64::NAN };
    }
    match FitSummary::fit(data, s) {
        Ok(fit) => {
            let d_hat = fit.d_hat();
            SupportScore {
                log_score: log_marginal_from_dhat(
                    d_hat,
                    s.len(),
                    s.column(),
                    data.n(),
                    data.p(),
                    hyper,
                    r_j,
                ),
                d_hat,
            }
        }
        Err(_) => SupportScore { log_score: f64::NEG_INFINITY, d_hat: f64::NAN },
    }
}

/// Shape/rate of the inverse-gamma conditional for d_j given d̂_S.
pub fn d_conditional_params(d_hat: f64, n: usize, hyper: &Hyperparams) -> (f64, f64) {
    let an = hyper.alpha * n as f64;
    let shape = (an + hyper.nu0) / 2.0;
    let rate = match hyper.variant {
        PriorVariant::Esc => an * d_hat / 2.0,
        PriorVariant::Mesc => an * d_hat / 2.0 + hyper.nu0_prime,
    };
    (shape, rate)
}

/// Inverse-gamma draw for d_j given an already computed d̂.
pub fn sample_d_from_dhat<R: Rng + ?Sized>(
    d_hat: f64,
    n: usize,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<f64, PosteriorError> {
    let (shape, rate) = d_conditional_params(d_hat, n, hyper);
    if rate <= 0.0 {
        return Err(PosteriorError::ZeroResidualVariance);
    }
    let gamma = Gamma::new(shape, 1.0 / rate).expect("valid gamma parameters");
    // X ~ IG(shape, rate)  <=>  1/X ~ Gamma(shape, rate).
    Ok(1.0 / gamma.sample(rng))
}

/// Draw from IG((αn+ν₀)/2, αn·d̂_S/2) (ESC) or its ν₀′-shifted MESC form.
pub fn sample_d<R: Rng + ?Sized>(
    data: &DataMatrix,
    s: &SupportSet,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<f64, PosteriorError> {
    let fit = FitSummary::fit(data, s).map_err(|_| PosteriorError::SingularGram)?;
    sample_d_from_dhat(fit.d_hat(), data.n(), hyper, rng)
}

/// Normal draw for a_{S_j} given d: mean â_S, covariance d/(α+γ)·(X_SᵀX_S)⁻¹.
pub fn sample_a_from_fit<R: Rng + ?Sized>(
    fit: &FitSummary,
    d: f64,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Vec<f64> {
    let scale = (d / (hyper.alpha + hyper.gamma)).sqrt();
    let z: Vec<f64> = (0..fit.support_len())
        .map(|_| StandardNormal.sample(rng))
        .collect();
    fit.coefficients_plus_whitened(scale, &z)
}

pub fn sample_a<R: Rng + ?Sized>(
    data: &DataMatrix,
    s: &SupportSet,
    d: f64,
    hyper: &Hyperparams,
    rng: &mut R,
) -> Result<Vec<f64>, PosteriorError> {
    assert!(!s.is_empty(), "sample_a requires a nonempty support");
    assert!(d > 0.0, "sample_a requires d > 0");
    let fit = FitSummary::fit(data, s).map_err(|_| PosteriorError::SingularGram)?;
    Ok(sample_a_from_fit(&fit, d, hyper, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn hyper() -> Hyperparams {
        Hyperparams::default()
    }

    #[test]
    fn default_r_condition_p_example() {
        // n = 100, p = 300, c3 below 1/log n: n/(log p · log n) ≈ 3.807 → 3.
        let h = Hyperparams { r_rule: RRule::ConditionP, c3: 0.001, ..hyper() };
        assert_eq!(default_r(100, 300, &h, 200), 3);
    }

    #[test]
    fn strict_floor_convention_at_integers() {
        // Strict floor makes ⌊3⌋ = 2.
        assert_eq!(strict_floor(3.0), 2);
        assert_eq!(strict_floor(3.807), 3);
        assert_eq!(strict_floor(0.5), 0);
    }

    #[test]
    fn default_r_order_cap_example() {
        // ⌊100 / ln 300⌋ = ⌊17.53⌋ = 17.
        assert_eq!(default_r(100, 300, &hyper(), 200), 17);
        // min with j−1 and n−2.
        assert_eq!(default_r(100, 300, &hyper(), 10), 9);
        assert_eq!(default_r(5, 2, &hyper(), 2), 1);
    }

    #[test]
    fn default_r_j_two_is_one() {
        assert_eq!(default_r(100, 300, &hyper(), 2), 1);
        let h = Hyperparams { r_rule: RRule::ConditionP, ..hyper() };
        assert_eq!(default_r(100, 300, &h, 2), 1);
    }

    #[test]
    fn log_prior_empty_is_zero() {
        let s = SupportSet::empty(5);
        assert_eq!(log_prior_support(&s, 300, &hyper(), 3), 0.0);
    }

    #[test]
    fn log_prior_formula_example() {
        // j−1 = 4, |S| = 2, c1 = 0.0005, c2 = 2, p = 300:
        // −log 6 − 2·log(0.0005) − 4·log 300.
        let s = SupportSet::new(5, vec![1, 3]).unwrap();
        let got = log_prior_support(&s, 300, &hyper(), 4);
        let expect = -(6.0f64).ln() - 2.0 * (0.0005f64).ln() - 4.0 * (300.0f64).ln();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn log_prior_truncates_beyond_cap() {
        let s = SupportSet::new(5, vec![1, 2, 3]).unwrap();
        assert_eq!(log_prior_support(&s, 300, &hyper(), 2), f64::NEG_INFINITY);
    }

    fn random_data(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DataMatrix {
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect())
            .collect();
        DataMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn empty_support_score_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_data(&mut rng, 30, 4);
        let h = hyper();
        let s = SupportSet::empty(4);
        let got = log_marginal_support(&data, &s, &h, 3);
        let d_empty = data.col_norm_sq(4) / 30.0;
        let expect = -((h.alpha * 30.0 + h.nu0) / 2.0) * d_empty.ln();
        assert!((got.log_score - expect).abs() < 1e-10);
        assert!((got.d_hat - d_empty).abs() < 1e-14);
    }

    #[test]
    fn score_difference_matches_independent_reassembly() {
        // Orthogonal two-predictor design; re-evaluate the marginal formula
        // from scratch with quantities computed by hand.
        let data = DataMatrix::from_rows(&[
            vec![1.0, 1.0, 0.7],
            vec![1.0, -1.0, 1.1],
            vec![-1.0, 1.0, -0.2],
            vec![-1.0, -1.0, 0.4],
        ])
        .unwrap();
        let h = hyper();
        let n = 4.0;
        let p = 3;
        let r_j = 2;
        let s1 = SupportSet::new(3, vec![1]).unwrap();
        let s2 = SupportSet::new(3, vec![1, 2]).unwrap();
        let got = log_marginal_support(&data, &s2, &h, r_j).log_score
            - log_marginal_support(&data, &s1, &h, r_j).log_score;

        // Independent evaluation: orthogonal design, so the projection onto
        // {1,2} removes (x_lᵀy)²/n per predictor from ‖y‖².
        let yty = data.col_norm_sq(3);
        let d1 = (yty - data.dot(1, 3).powi(2) / n) / n;
        let d2 = (yty - data.dot(1, 3).powi(2) / n - data.dot(2, 3).powi(2) / n) / n;
        let prior = |slen: f64| -> f64 {
            let lb = if slen == 1.0 { (2.0f64).ln() } else { (1.0f64).ln() };
            -lb - slen * (h.c1.ln() + h.c2 * (p as f64).ln())
        };
        let term = |slen: f64, d: f64| {
            prior(slen) - 0.5 * slen * (1.0 + h.alpha / h.gamma).ln()
                - (h.alpha * n + h.nu0) / 2.0 * d.ln()
        };
        let expect = term(2.0, d2) - term(1.0, d1);
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn same_size_score_differences_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = random_data(&mut rng, 25, 5);
        let scaled = data.scaled(10.0);
        let h = hyper();
        let s1 = SupportSet::new(5, vec![1, 2]).unwrap();
        let s2 = SupportSet::new(5, vec![3, 4]).unwrap();
        let diff = |d: &DataMatrix| {
            log_marginal_support(d, &s1, &h, 4).log_score
                - log_marginal_support(d, &s2, &h, 4).log_score
        };
        let (a, b) = (diff(&data), diff(&scaled));
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn argmax_support_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let data = random_data(&mut rng, 25, 5);
        let h = hyper();
        let r_j = 4;
        let argmax = |d: &DataMatrix| {
            let mut best: Option<(Vec<usize>, f64)> = None;
            // Lexicographically smallest support wins ties: iterate subsets
            // in lexicographic order and require strict improvement.
            for mask in 0u32..16 {
                let idx: Vec<usize> = (1..5).filter(|l| mask & (1 << (l - 1)) != 0).collect();
                let s = SupportSet::new(5, idx.clone()).unwrap();
                let score = log_marginal_support(d, &s, &h, r_j).log_score;
                if best.as_ref().map_or(true, |(_, b)| score > *b) {
                    best = Some((idx, score));
                }
            }
            best.unwrap().0
        };
        for c in [0.01, 1.0, 250.0] {
            assert_eq!(argmax(&data), argmax(&data.scaled(c)));
        }
    }

    #[test]
    fn monotone_penalty_in_support_size() {
        // With d̂ held fixed, the score strictly decreases in |S|.
        let h = hyper();
        let d_hat = 1.7;
        let mut prev = f64::INFINITY;
        for s_len in 0..=6 {
            let score = log_marginal_from_dhat(d_hat, s_len, 8, 100, 300, &h, 7);
            assert!(score < prev, "not strictly decreasing at |S| = {s_len}");
            prev = score;
        }
    }

    #[test]
    fn normalizable_over_all_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data = random_data(&mut rng, 40, 9);
        let h = hyper();
        let j = 9;
        let r_j = 8;
        let scores: Vec<f64> = (0u32..256)
            .map(|mask| {
                let idx: Vec<usize> = (1..9).filter(|l| mask & (1 << (l - 1)) != 0).collect();
                log_marginal_support(&data, &SupportSet::new(j, idx).unwrap(), &h, r_j).log_score
            })
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max.is_finite());
        let total: f64 = scores.iter().map(|s| (s - max).exp()).sum();
        assert!(total.is_finite() && total > 0.0);
        let probs: Vec<f64> = scores.iter().map(|s| (s - max).exp() / total).collect();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn esc_mesc_agree_as_nu0_prime_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data = random_data(&mut rng, 30, 5);
        let esc = hyper();
        let mesc = Hyperparams {
            variant: PriorVariant::Mesc,
            nu0_prime: 1e-12,
            ..hyper()
        };
        let s1 = SupportSet::new(5, vec![1, 2]).unwrap();
        let s2 = SupportSet::new(5, vec![3]).unwrap();
        let diff = |h: &Hyperparams| {
            log_marginal_support(&data, &s1, h, 4).log_score
                - log_marginal_support(&data, &s2, h, 4).log_score
        };
        let (a, b) = (diff(&esc), diff(&mesc));
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn sample_d_moments_match_inverse_gamma() {
        // α = 0.999, n = 100, ν₀ = 0, d̂ = 2: shape 49.95, rate 99.9·2/2.
        let h = hyper();
        let d_hat = 2.0;
        let (shape, rate) = d_conditional_params(d_hat, 100, &h);
        assert!((shape - 49.95).abs() < 1e-12);
        let mean = rate / (shape - 1.0);
        assert!((mean - 99.9 / 48.95).abs() < 1e-10);
        let var = rate * rate / ((shape - 1.0).powi(2) * (shape - 2.0));

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let m = 1_000_000usize;
        let draws: Vec<f64> = (0..m)
            .map(|_| sample_d_from_dhat(d_hat, 100, &h, &mut rng).unwrap())
            .collect();
        let emp_mean = draws.iter().sum::<f64>() / m as f64;
        let emp_var =
            draws.iter().map(|x| (x - emp_mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let se_mean = (var / m as f64).sqrt();
        assert!(
            (emp_mean - mean).abs() < 3.0 * se_mean,
            "mean {emp_mean} vs {mean} (se {se_mean})"
        );
        // SE of the sample variance ≈ sqrt((m4 − var²)/m); bounded loosely
        // via the 4th central moment of the draws themselves.
        let m4 = draws.iter().map(|x| (x - emp_mean).powi(4)).sum::<f64>() / m as f64;
        let se_var = ((m4 - emp_var * emp_var) / m as f64).sqrt();
        assert!(
            (emp_var - var).abs() < 5.0 * se_var,
            "var {emp_var} vs {var} (se {se_var})"
        );
    }

    #[test]
    fn sample_d_zero_dhat_is_invalid_under_esc() {
        let h = hyper();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sample_d_from_dhat(0.0, 100, &h, &mut rng),
            Err(PosteriorError::ZeroResidualVariance)
        );
        let mesc = Hyperparams { variant: PriorVariant::Mesc, ..hyper() };
        assert!(sample_d_from_dhat(0.0, 100, &mesc, &mut rng).is_ok());
    }

    #[test]
    fn sample_d_deterministic_under_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..10)
            .map(|_| sample_d_from_dhat(1.3, 50, &hyper(), &mut rng).unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b: Vec<f64> = (0..10)
            .map(|_| sample_d_from_dhat(1.3, 50, &hyper(), &mut rng).unwrap())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_a_mean_matches_least_squares() {
        // Orthogonal design: â has closed form x_lᵀy/n.
        let data = DataMatrix::from_rows(&[
            vec![1.0, 1.0, 0.9],
            vec![1.0, -1.0, 0.1],
            vec![-1.0, 1.0, -0.5],
            vec![-1.0, -1.0, 0.3],
        ])
        .unwrap();
        let h = hyper();
        let s = SupportSet::new(3, vec![1, 2]).unwrap();
        let a_hat = [data.dot(1, 3) / 4.0, data.dot(2, 3) / 4.0];
        let d = 0.8;
        let m = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut sums = [0.0f64; 2];
        for _ in 0..m {
            let a = sample_a(&data, &s, d, &h, &mut rng).unwrap();
            sums[0] += a[0];
            sums[1] += a[1];
        }
        // Var of each coord: d/(α+γ)·(Gram⁻¹)_ll = d/(α+γ)/4.
        let sd = (d / (h.alpha + h.gamma) / 4.0).sqrt();
        let se = sd / (m as f64).sqrt();
        for k in 0..2 {
            let emp = sums[k] / m as f64;
            assert!((emp - a_hat[k]).abs() < 4.0 * se, "coord {k}: {emp} vs {}", a_hat[k]);
        }
    }

    #[test]
    fn sample_a_covariance_matches_closed_form() {
        let mut rng0 = ChaCha8Rng::seed_from_u64(3);
        let data = random_data(&mut rng0, 30, 3);
        let h = hyper();
        let s = SupportSet::new(3, vec![1, 2]).unwrap();
        let d = 1.4;
        // Direct 2x2 Gram inverse.
        let (g11, g12, g22) = (data.dot(1, 1), data.dot(1, 2), data.dot(2, 2));
        let det = g11 * g22 - g12 * g12;
        let scale = d / (h.alpha + h.gamma);
        let cov = [
            [scale * g22 / det, -scale * g12 / det],
            [-scale * g12 / det, scale * g11 / det],
        ];
        let m = 100_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let draws: Vec<Vec<f64>> = (0..m)
            .map(|_| sample_a(&data, &s, d, &h, &mut rng).unwrap())
            .collect();
        let mean: [f64; 2] = [
            draws.iter().map(|a| a[0]).sum::<f64>() / m as f64,
            draws.iter().map(|a| a[1]).sum::<f64>() / m as f64,
        ];
        for r in 0..2 {
            for c in 0..2 {
                let emp = draws
                    .iter()
                    .map(|a| (a[r] - mean[r]) * (a[c] - mean[c]))
                    .sum::<f64>()
                    / m as f64;
                assert!(
                    (emp - cov[r][c]).abs() <= 0.1 * cov[r][c].abs().max(1e-6),
                    "cov[{r}][{c}]: {emp} vs {}",
                    cov[r][c]
                );
            }
        }
    }

    #[test]
    fn sample_a_degenerate_covariance_limit() {
        let mut rng0 = ChaCha8Rng::seed_from_u64(4);
        let data = random_data(&mut rng0, 30, 3);
        let h = hyper();
        let s = SupportSet::new(3, vec![1, 2]).unwrap();
        let a_hat = crate::gram::least_squares(&data, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let a = sample_a(&data, &s, 1e-12, &h, &mut rng).unwrap();
        for (x, y) in a.iter().zip(&a_hat) {
            assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn validate_warns_on_small_c2() {
        let h = Hyperparams { c2: 1.0, ..hyper() };
        let warnings = h.validate().unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(Hyperparams { alpha: 1.5, ..hyper() }.validate().is_err());
    }
}
