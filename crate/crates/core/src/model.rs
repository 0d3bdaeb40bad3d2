//! Finite local deterministic hidden-variable models over labeled settings:
//! the generalized Brans construction from a state and POVM family, the
//! tautological model reproducing any correlation table (signalling or not),
//! property checkers for the three separability conditions, and the causal
//! decomposition that realizes measurement-dependent weights through a common
//! cause of the hidden variable and the settings.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::UnitVector3;
use crate::pair::PairDistribution;
use crate::quantum::{born_probability, validate_label, DensityOperator, PovmFamily};

/// Per-setting weight vectors must sum to 1 within this tolerance.
pub const WEIGHT_NORMALIZATION_TOL: f64 = 1e-10;

/// Absolute tolerance of all property checks (exact rational-like sums at
/// desk scale, so a single tight tolerance suffices).
pub const PROPERTY_TOL: f64 = 1e-10;

/// Reproduction passes when the maximum discrepancy is below this.
pub const REPRODUCTION_TOL: f64 = 1e-9;

/// Experimental joint distributions `p(a,b|x,y)` over a finite settings grid,
/// with outcomes `1..=d1` and `1..=d2` per side.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    settings: Vec<(String, String)>,
    d1: usize,
    d2: usize,
    /// `probs[setting][(a-1)·d2 + (b-1)]`.
    probs: Vec<Vec<f64>>,
}

impl CorrelationTable {
    pub fn new(
        settings: Vec<(String, String)>,
        d1: usize,
        d2: usize,
        probs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidInput("outcome-set sizes must be positive".into()));
        }
        if settings.is_empty() {
            return Err(Error::InvalidInput("correlation table needs settings".into()));
        }
        if probs.len() != settings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} settings but {} probability rows",
                settings.len(),
                probs.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (x, y) in &settings {
            validate_label(x)?;
            validate_label(y)?;
            if !seen.insert((x.clone(), y.clone())) {
                return Err(Error::InvalidInput(format!("duplicate setting ({x}, {y})")));
            }
        }
        for (s, row) in probs.iter().enumerate() {
            if row.len() != d1 * d2 {
                return Err(Error::DimensionMismatch(format!(
                    "setting {:?} has {} probabilities, expected {}",
                    settings[s],
                    row.len(),
                    d1 * d2
                )));
            }
            let mut total = 0.0;
            for &p in row {
                if !p.is_finite() || p < -1e-12 {
                    return Err(Error::Validation(format!(
                        "probability {p} at setting {:?} is negative or non-finite",
                        settings[s]
                    )));
                }
                total += p.max(0.0);
            }
            if (total - 1.0).abs() > WEIGHT_NORMALIZATION_TOL {
                return Err(Error::Validation(format!(
                    "probabilities at setting {:?} sum to {total}, not 1",
                    settings[s]
                )));
            }
        }
        Ok(Self { settings, d1, d2, probs })
    }

    pub fn settings(&self) -> &[(String, String)] {
        &self.settings
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn setting_index(&self, x: &str, y: &str) -> Option<usize> {
        self.settings.iter().position(|(sx, sy)| sx == x && sy == y)
    }

    /// Probability of outcomes `a ∈ 1..=d1`, `b ∈ 1..=d2` at setting index `s`.
    pub fn prob(&self, s: usize, a: usize, b: usize) -> f64 {
        self.probs[s][(a - 1) * self.d2 + (b - 1)]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }

    /// Distinct x-labels in order of first appearance.
    pub fn x_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (x, _) in &self.settings {
            if !out.contains(x) {
                out.push(x.clone());
            }
        }
        out
    }

    /// Distinct y-labels in order of first appearance.
    pub fn y_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (_, y) in &self.settings {
            if !out.contains(y) {
                out.push(y.clone());
            }
        }
        out
    }

    /// The binary-outcome distribution at setting `s`, with the outcome map
    /// `1 ↦ +1`, `2 ↦ −1`.
    pub fn pair_distribution(&self, s: usize) -> Result<PairDistribution> {
        if self.d1 != 2 || self.d2 != 2 {
            return Err(Error::Unsupported(format!(
                "±1 outcome view needs binary outcomes, table has {}×{}",
                self.d1, self.d2
            )));
        }
        Ok(PairDistribution::from_fn(|a, b| {
            self.prob(s, if a == 1 { 1 } else { 2 }, if b == 1 { 1 } else { 2 })
        }))
    }

    /// Singlet-state table over a full grid of measurement directions, with
    /// shared labels `x0…`/`y0…`.
    pub fn singlet_grid(xs: &[UnitVector3], ys: &[UnitVector3]) -> Result<Self> {
        let mut settings = Vec::new();
        let mut probs = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                settings.push((format!("x{i}"), format!("y{j}")));
                let d = PairDistribution::singlet(x, y);
                probs.push(vec![d.prob(1, 1), d.prob(1, -1), d.prob(-1, 1), d.prob(-1, -1)]);
            }
        }
        Self::new(settings, 2, 2, probs)
    }

    /// Uniform binary table over an `nx × ny` grid.
    pub fn uniform_grid(nx: usize, ny: usize) -> Result<Self> {
        let mut settings = Vec::new();
        let mut probs = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                settings.push((format!("x{i}"), format!("y{j}")));
                probs.push(vec![0.25; 4]);
            }
        }
        Self::new(settings, 2, 2, probs)
    }

    /// A deliberately signalling table: Bob's outcome copies Alice's setting
    /// (`b = +1` iff the x-setting is `x0`), with Alice's outcome a fair coin.
    pub fn b_equals_x_demo() -> Self {
        let settings =
            vec![("x0".to_string(), "y0".to_string()), ("x1".to_string(), "y0".to_string())];
        // Rows are (a,b) ∈ {(+,+),(+,−),(−,+),(−,−)} with 1↦+1, 2↦−1.
        let probs = vec![vec![0.5, 0.0, 0.5, 0.0], vec![0.0, 0.5, 0.0, 0.5]];
        Self::new(settings, 2, 2, probs).expect("demo table is valid")
    }
}

/// A finite measurement-dependent local deterministic model: a hidden
/// variable λ over a finite label set, per-setting weights `p(λ|x,y)`, and a
/// deterministic outcome rule `(a,b)(λ,x,y)`.
#[derive(Debug, Clone)]
pub struct FiniteLhvModel {
    lambda_domain: Vec<String>,
    settings: Vec<(String, String)>,
    d1: usize,
    d2: usize,
    /// `weights[setting][λ]`.
    weights: Vec<Vec<f64>>,
    /// `outcomes[setting][λ] = (a, b)` with `a ∈ 1..=d1`, `b ∈ 1..=d2`.
    outcomes: Vec<Vec<(usize, usize)>>,
    preparation: String,
}

impl FiniteLhvModel {
    pub fn new(
        lambda_domain: Vec<String>,
        settings: Vec<(String, String)>,
        d1: usize,
        d2: usize,
        weights: Vec<Vec<f64>>,
        outcomes: Vec<Vec<(usize, usize)>>,
        preparation: impl Into<String>,
    ) -> Result<Self> {
        if lambda_domain.is_empty() {
            return Err(Error::InvalidInput("empty hidden-variable domain".into()));
        }
        {
            let mut seen = std::collections::BTreeSet::new();
            for l in &lambda_domain {
                if !seen.insert(l.clone()) {
                    return Err(Error::InvalidInput(format!("duplicate λ label {l:?}")));
                }
            }
        }
        if settings.is_empty() {
            return Err(Error::InvalidInput("model needs at least one setting".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (x, y) in &settings {
            validate_label(x)?;
            validate_label(y)?;
            if !seen.insert((x.clone(), y.clone())) {
                return Err(Error::InvalidInput(format!("duplicate setting ({x}, {y})")));
            }
        }
        if weights.len() != settings.len() || outcomes.len() != settings.len() {
            return Err(Error::DimensionMismatch(
                "weights and outcome rules must cover every setting".into(),
            ));
        }
        let mut clean_weights = Vec::with_capacity(weights.len());
        for (s, w) in weights.iter().enumerate() {
            if w.len() != lambda_domain.len() {
                return Err(Error::DimensionMismatch(format!(
                    "setting {:?}: {} weights for {} hidden-variable values",
                    settings[s],
                    w.len(),
                    lambda_domain.len()
                )));
            }
            let mut total = 0.0;
            let mut row = Vec::with_capacity(w.len());
            for &v in w {
                if !v.is_finite() || v < -1e-12 {
                    return Err(Error::Validation(format!(
                        "weight {v} at setting {:?} is negative or non-finite",
                        settings[s]
                    )));
                }
                row.push(v.max(0.0));
                total += v.max(0.0);
            }
            if (total - 1.0).abs() > WEIGHT_NORMALIZATION_TOL {
                return Err(Error::Validation(format!(
                    "weights at setting {:?} sum to {total}, not 1",
                    settings[s]
                )));
            }
            clean_weights.push(row);
        }
        for (s, rules) in outcomes.iter().enumerate() {
            if rules.len() != lambda_domain.len() {
                return Err(Error::DimensionMismatch(format!(
                    "setting {:?}: outcome rule misses hidden-variable values",
                    settings[s]
                )));
            }
            for &(a, b) in rules {
                if a == 0 || a > d1 || b == 0 || b > d2 {
                    return Err(Error::InvalidInput(format!(
                        "outcome ({a},{b}) outside 1..={d1} × 1..={d2}"
                    )));
                }
            }
        }
        Ok(Self {
            lambda_domain,
            settings,
            d1,
            d2,
            weights: clean_weights,
            outcomes,
            preparation: preparation.into(),
        })
    }

    pub fn lambda_domain(&self) -> &[String] {
        &self.lambda_domain
    }

    pub fn settings(&self) -> &[(String, String)] {
        &self.settings
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn preparation(&self) -> &str {
        &self.preparation
    }

    pub fn weight(&self, setting: usize, lambda: usize) -> f64 {
        self.weights[setting][lambda]
    }

    pub fn weights_for_setting(&self, setting: usize) -> &[f64] {
        &self.weights[setting]
    }

    pub fn outcome(&self, setting: usize, lambda: usize) -> (usize, usize) {
        self.outcomes[setting][lambda]
    }

    pub fn setting_index(&self, x: &str, y: &str) -> Option<usize> {
        self.settings.iter().position(|(sx, sy)| sx == x && sy == y)
    }

    /// The joint distribution the model implies:
    /// `p(a,b|x,y) = Σ_λ p(λ|x,y)·[outcome(λ,x,y) = (a,b)]`.
    pub fn implied_table(&self) -> CorrelationTable {
        let mut probs = Vec::with_capacity(self.settings.len());
        for s in 0..self.settings.len() {
            let mut row = vec![0.0; self.d1 * self.d2];
            for l in 0..self.lambda_domain.len() {
                let (a, b) = self.outcomes[s][l];
                row[(a - 1) * self.d2 + (b - 1)] += self.weights[s][l];
            }
            probs.push(row);
        }
        CorrelationTable::new(self.settings.clone(), self.d1, self.d2, probs)
            .expect("model weights are validated distributions")
    }
}

/// The generalized Brans construction: the hidden variable is the joint
/// outcome pair itself, weighted by the Born probabilities
/// `p(λ|x,y) = tr[ρ·E^{xy}_{λ₁λ₂}]`, with the identity outcome rule. The
/// model reproduces the quantum statistics by construction, is local and
/// deterministic, and its measurement dependence is capped by `log₂(d₁·d₂)`.
pub fn build_general_brans(
    rho: &DensityOperator,
    povms: &PovmFamily,
    preparation: impl Into<String>,
) -> Result<FiniteLhvModel> {
    if rho.dim() != povms.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs POVM dimension {}",
            rho.dim(),
            povms.dim()
        )));
    }
    let (d1, d2) = (povms.d1(), povms.d2());
    let lambda_domain: Vec<String> =
        (1..=d1).flat_map(|a| (1..=d2).map(move |b| format!("a{a}b{b}"))).collect();
    let mut weights = Vec::with_capacity(povms.settings().len());
    let mut outcomes = Vec::with_capacity(povms.settings().len());
    for s in 0..povms.settings().len() {
        let mut w = Vec::with_capacity(d1 * d2);
        let mut o = Vec::with_capacity(d1 * d2);
        for a in 1..=d1 {
            for b in 1..=d2 {
                w.push(born_probability(rho, povms.effect(s, a, b)?)?);
                o.push((a, b));
            }
        }
        weights.push(w);
        outcomes.push(o);
    }
    FiniteLhvModel::new(
        lambda_domain,
        povms.settings().to_vec(),
        d1,
        d2,
        weights,
        outcomes,
        preparation,
    )
}

/// The tautological local deterministic model of an arbitrary correlation
/// table: λ ranges over joint outcomes, distributed exactly as the table
/// prescribes at each setting, and the outcome rule reads the outcomes off λ.
/// Works whether or not the table is signalling — the cost is carried
/// entirely by measurement dependence.
pub fn build_signalling_model(table: &CorrelationTable) -> Result<FiniteLhvModel> {
    let (d1, d2) = (table.d1(), table.d2());
    let lambda_domain: Vec<String> =
        (1..=d1).flat_map(|a| (1..=d2).map(move |b| format!("a{a}b{b}"))).collect();
    let mut weights = Vec::with_capacity(table.settings().len());
    let mut outcomes = Vec::with_capacity(table.settings().len());
    for s in 0..table.settings().len() {
        let mut w = Vec::with_capacity(d1 * d2);
        let mut o = Vec::with_capacity(d1 * d2);
        for a in 1..=d1 {
            for b in 1..=d2 {
                w.push(table.prob(s, a, b));
                o.push((a, b));
            }
        }
        weights.push(w);
        outcomes.push(o);
    }
    FiniteLhvModel::new(
        lambda_domain,
        table.settings().to_vec(),
        d1,
        d2,
        weights,
        outcomes,
        "empirical",
    )
}

/// Outcome of comparing a model's implied statistics against a table.
#[derive(Debug, Clone, Serialize)]
pub struct ReproductionReport {
    pub max_abs_error: f64,
    pub pass: bool,
}

/// Compares `Σ_λ weight·δ-outcome` against the table, entry by entry.
pub fn verify_reproduction(
    model: &FiniteLhvModel,
    table: &CorrelationTable,
) -> Result<ReproductionReport> {
    if model.d1() != table.d1() || model.d2() != table.d2() {
        return Err(Error::DimensionMismatch(format!(
            "outcome sets differ: model {}×{}, table {}×{}",
            model.d1(),
            model.d2(),
            table.d1(),
            table.d2()
        )));
    }
    let implied = model.implied_table();
    let mut max_err = 0.0f64;
    for (s, (x, y)) in table.settings().iter().enumerate() {
        let ms = implied.setting_index(x, y).ok_or_else(|| {
            Error::DimensionMismatch(format!("model lacks table setting ({x}, {y})"))
        })?;
        for a in 1..=table.d1() {
            for b in 1..=table.d2() {
                max_err = max_err.max((implied.prob(ms, a, b) - table.prob(s, a, b)).abs());
            }
        }
    }
    // The settings sets must coincide, not merely overlap.
    for (x, y) in implied.settings() {
        if table.setting_index(x, y).is_none() {
            return Err(Error::DimensionMismatch(format!("table lacks model setting ({x}, {y})")));
        }
    }
    Ok(ReproductionReport { max_abs_error: max_err, pass: max_err < REPRODUCTION_TOL })
}

/// The three separability conditions, checked at the finite level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PropertyReport {
    /// Statistical completeness: outcomes are uncorrelated given (λ, x, y).
    pub outcome_independence: bool,
    /// Statistical locality: each side's outcome ignores the distant setting.
    pub parameter_independence: bool,
    /// The λ-distribution ignores the settings.
    pub measurement_independence: bool,
}

/// Checks the three conditions directly on the model's tables. Deterministic
/// outcome rules always factorize, so `outcome_independence` holds
/// structurally, but it is still computed honestly from the δ-distributions.
pub fn check_properties(model: &FiniteLhvModel) -> PropertyReport {
    let n_lambda = model.lambda_domain().len();
    let n_settings = model.settings().len();

    // Outcome independence: p(a,b|λ,x,y) = p(a|λ,x,y)·p(b|λ,x,y). For a
    // δ-rule both sides are 0/1 indicators of the same event.
    let mut outcome_independence = true;
    for s in 0..n_settings {
        for l in 0..n_lambda {
            let (ra, rb) = model.outcome(s, l);
            for a in 1..=model.d1() {
                for b in 1..=model.d2() {
                    let joint: f64 = if (a, b) == (ra, rb) { 1.0 } else { 0.0 };
                    let pa: f64 = if a == ra { 1.0 } else { 0.0 };
                    let pb: f64 = if b == rb { 1.0 } else { 0.0 };
                    if (joint - pa * pb).abs() > PROPERTY_TOL {
                        outcome_independence = false;
                    }
                }
            }
        }
    }

    // Parameter independence: a's rule is constant in y at fixed (λ, x), and
    // b's rule constant in x at fixed (λ, y).
    let mut parameter_independence = true;
    for i in 0..n_settings {
        for j in (i + 1)..n_settings {
            let (xi, yi) = &model.settings()[i];
            let (xj, yj) = &model.settings()[j];
            for l in 0..n_lambda {
                if xi == xj && model.outcome(i, l).0 != model.outcome(j, l).0 {
                    parameter_independence = false;
                }
                if yi == yj && model.outcome(i, l).1 != model.outcome(j, l).1 {
                    parameter_independence = false;
                }
            }
        }
    }

    // Measurement independence: identical weight vectors at every setting.
    let mut measurement_independence = true;
    for s in 1..n_settings {
        for l in 0..n_lambda {
            if (model.weight(s, l) - model.weight(0, l)).abs() > PROPERTY_TOL {
                measurement_independence = false;
            }
        }
    }

    PropertyReport { outcome_independence, parameter_independence, measurement_independence }
}

/// A causal completion of measurement-dependent weights: a further variable μ
/// (one value per joint setting) with `p(μ|λ)` chosen so that the settings,
/// read off μ deterministically, correlate with λ exactly as the weights and
/// the setting distribution prescribe.
#[derive(Debug, Clone)]
pub struct MuModel {
    /// μ values, one per retained setting (μ = (μ₁, μ₂) = the setting pair).
    pub mu_domain: Vec<(String, String)>,
    /// Hidden-variable labels retained (positive marginal probability).
    pub lambda_domain: Vec<String>,
    /// `p_mu_given_lambda[λ][μ]`.
    pub p_mu_given_lambda: Vec<Vec<f64>>,
    /// λ labels dropped because their marginal probability is zero; the
    /// conditional `p(μ|λ)` is undefined there.
    pub excluded_lambdas: Vec<String>,
    /// Settings dropped because `p(x,y) = 0`.
    pub dropped_settings: Vec<(String, String)>,
    /// Marginal `p₀(λ)` over the retained λ (for round-trip checks).
    pub lambda_marginal: Vec<f64>,
}

impl MuModel {
    /// Largest deviation between the reconstructed `p(x,y|λ) = p(μ|λ)` and the
    /// Bayes-derived `weight(λ,x,y)·p(x,y)/p₀(λ)` on the retained domains.
    pub fn reconstruction_error(
        &self,
        weights: &[Vec<f64>],
        p_xy: &[f64],
        lambda_labels: &[String],
        settings: &[(String, String)],
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for (li, label) in self.lambda_domain.iter().enumerate() {
            let l_orig = lambda_labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| Error::InvalidInput(format!("unknown λ label {label:?}")))?;
            for (mi, mu) in self.mu_domain.iter().enumerate() {
                let s_orig = settings
                    .iter()
                    .position(|s| s == mu)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown setting {mu:?}")))?;
                let bayes = weights[s_orig][l_orig] * p_xy[s_orig] / self.lambda_marginal[li];
                worst = worst.max((self.p_mu_given_lambda[li][mi] - bayes).abs());
            }
        }
        Ok(worst)
    }
}

/// Builds the μ-model for given weights (`weights[setting][λ]`) and a joint
/// setting distribution. Settings with `p(x,y) = 0` are dropped; λ values
/// with zero marginal are excluded (with a warning entry) because their
/// conditional is undefined.
pub fn causal_decomposition(
    lambda_domain: &[String],
    settings: &[(String, String)],
    weights: &[Vec<f64>],
    p_xy: &[f64],
) -> Result<MuModel> {
    if weights.len() != settings.len() || p_xy.len() != settings.len() {
        return Err(Error::DimensionMismatch("weights and p(x,y) must cover every setting".into()));
    }
    for w in weights {
        if w.len() != lambda_domain.len() {
            return Err(Error::DimensionMismatch("ragged weight table".into()));
        }
    }
    let total: f64 = p_xy.iter().sum();
    for &p in p_xy {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Validation(format!("setting probability {p} invalid")));
        }
    }
    if (total - 1.0).abs() > WEIGHT_NORMALIZATION_TOL {
        return Err(Error::Validation(format!("setting distribution sums to {total}, not 1")));
    }

    let kept: Vec<usize> = (0..settings.len()).filter(|&s| p_xy[s] > 0.0).collect();
    if kept.is_empty() {
        return Err(Error::InvalidInput("every setting has zero probability".into()));
    }
    let dropped_settings: Vec<(String, String)> =
        (0..settings.len()).filter(|&s| p_xy[s] == 0.0).map(|s| settings[s].clone()).collect();

    let mut mu_rows = Vec::new();
    let mut kept_lambdas = Vec::new();
    let mut marginals = Vec::new();
    let mut excluded = Vec::new();
    for (l, label) in lambda_domain.iter().enumerate() {
        let p0: f64 = kept.iter().map(|&s| weights[s][l] * p_xy[s]).sum();
        if p0 <= 0.0 {
            excluded.push(label.clone());
            continue;
        }
        let row: Vec<f64> = kept.iter().map(|&s| weights[s][l] * p_xy[s] / p0).collect();
        mu_rows.push(row);
        kept_lambdas.push(label.clone());
        marginals.push(p0);
    }
    if kept_lambdas.is_empty() {
        return Err(Error::InvalidInput(
            "every hidden-variable value has zero marginal probability".into(),
        ));
    }
    Ok(MuModel {
        mu_domain: kept.iter().map(|&s| settings[s].clone()).collect(),
        lambda_domain: kept_lambdas,
        p_mu_given_lambda: mu_rows,
        excluded_lambdas: excluded,
        dropped_settings,
        lambda_marginal: marginals,
    })
}
