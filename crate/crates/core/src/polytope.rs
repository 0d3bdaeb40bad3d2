//! Bell-separability apparatus: CHSH evaluation and its sign-variant orbit,
//! Fine's formal joint distribution for measurement-independent models,
//! local-polytope membership by phase-1 linear programming over deterministic
//! strategies, and one-sided signalling detection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::UnitVector3;
use crate::model::{check_properties, CorrelationTable, FiniteLhvModel};
use crate::simplex::phase1;

/// LP feasibility threshold on the phase-1 objective, and the bound on the
/// witness reconstruction error.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// One-sided marginals differing by more than this constitute signalling.
pub const SIGNALLING_TOL: f64 = 1e-9;

/// Fine joints larger than this many entries are refused.
pub const MAX_FINE_ENTRIES: usize = 1 << 16;

/// Largest per-side setting count accepted by the strategy enumeration.
pub const MAX_SETTINGS_PER_SIDE: usize = 4;

/// The four setting labels entering a CHSH combination.
#[derive(Debug, Clone, Serialize)]
pub struct ChshSettings {
    pub x: String,
    pub x_prime: String,
    pub y: String,
    pub y_prime: String,
}

impl ChshSettings {
    pub fn new(
        x: impl Into<String>,
        x_prime: impl Into<String>,
        y: impl Into<String>,
        y_prime: impl Into<String>,
    ) -> Self {
        Self { x: x.into(), x_prime: x_prime.into(), y: y.into(), y_prime: y_prime.into() }
    }

    /// The natural choice on a 2×2 grid with shared labels.
    pub fn standard_2x2() -> Self {
        Self::new("x0", "x1", "y0", "y1")
    }
}

fn correlator_at(table: &CorrelationTable, x: &str, y: &str) -> Result<f64> {
    let s = table
        .setting_index(x, y)
        .ok_or_else(|| Error::InvalidInput(format!("table lacks setting pair ({x}, {y})")))?;
    Ok(table.pair_distribution(s)?.correlator())
}

/// The canonical CHSH combination
/// `S = E(x,y) + E(x,y′) + E(x′,y) − E(x′,y′)`.
pub fn chsh_value(table: &CorrelationTable, s: &ChshSettings) -> Result<f64> {
    let e = chsh_correlators(table, s)?;
    Ok(e[0] + e[1] + e[2] - e[3])
}

fn chsh_correlators(table: &CorrelationTable, s: &ChshSettings) -> Result<[f64; 4]> {
    Ok([
        correlator_at(table, &s.x, &s.y)?,
        correlator_at(table, &s.x, &s.y_prime)?,
        correlator_at(table, &s.x_prime, &s.y)?,
        correlator_at(table, &s.x_prime, &s.y_prime)?,
    ])
}

/// One signed CHSH combination from the orbit of the canonical form.
#[derive(Debug, Clone, Serialize)]
pub struct ChshVariant {
    /// Signs applied to `[E(x,y), E(x,y′), E(x′,y), E(x′,y′)]`, e.g. `"+++-"`.
    pub signs: String,
    pub value: f64,
}

/// All eight sign patterns with an odd number of minus signs — the symmetry
/// orbit of the CHSH functional under local outcome relabelings.
pub fn chsh_variants(table: &CorrelationTable, s: &ChshSettings) -> Result<Vec<ChshVariant>> {
    let e = chsh_correlators(table, s)?;
    let mut out = Vec::with_capacity(8);
    for mask in 0..16u32 {
        let signs: Vec<f64> = (0..4).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        if signs.iter().product::<f64>() > 0.0 {
            continue;
        }
        let value: f64 = signs.iter().zip(&e).map(|(s, e)| s * e).sum();
        let label: String = signs.iter().map(|&s| if s > 0.0 { '+' } else { '-' }).collect();
        out.push(ChshVariant { signs: label, value });
    }
    Ok(out)
}

/// The variant of largest value (which equals the largest |S|, since the
/// orbit is closed under global sign flip).
pub fn chsh_best_variant(table: &CorrelationTable, s: &ChshSettings) -> Result<ChshVariant> {
    let variants = chsh_variants(table, s)?;
    Ok(variants.into_iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("orbit is non-empty"))
}

/// Coplanar measurement angles (x, x′, y, y′) for which the singlet state
/// gives the canonical CHSH value +2√2.
pub fn chsh_optimal_angles() -> [f64; 4] {
    use std::f64::consts::PI;
    [0.0, 3.0 * PI / 2.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0]
}

/// The directions for [`chsh_optimal_angles`], in the xz-plane.
pub fn chsh_optimal_directions() -> [UnitVector3; 4] {
    chsh_optimal_angles().map(UnitVector3::in_xz_plane)
}

/// A vertex of the local polytope: one fixed ±1 outcome per local setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterministicStrategy {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    a_values: Vec<i8>,
    b_values: Vec<i8>,
}

impl DeterministicStrategy {
    pub fn new(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        a_values: Vec<i8>,
        b_values: Vec<i8>,
    ) -> Result<Self> {
        if x_labels.len() != a_values.len() || y_labels.len() != b_values.len() {
            return Err(Error::DimensionMismatch(
                "strategy outcome lists must align with setting labels".into(),
            ));
        }
        if a_values.iter().chain(&b_values).any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidInput("strategy outcomes must be ±1".into()));
        }
        Ok(Self { x_labels, y_labels, a_values, b_values })
    }

    pub fn a(&self, x: &str) -> Result<i8> {
        self.x_labels
            .iter()
            .position(|l| l == x)
            .map(|i| self.a_values[i])
            .ok_or_else(|| Error::InvalidInput(format!("strategy lacks x-setting {x:?}")))
    }

    pub fn b(&self, y: &str) -> Result<i8> {
        self.y_labels
            .iter()
            .position(|l| l == y)
            .map(|i| self.b_values[i])
            .ok_or_else(|| Error::InvalidInput(format!("strategy lacks y-setting {y:?}")))
    }

    /// Indicator p(a,b|x,y) of this strategy's outcomes.
    pub fn prob(&self, x: &str, y: &str, a: i8, b: i8) -> Result<f64> {
        Ok(if self.a(x)? == a && self.b(y)? == b { 1.0 } else { 0.0 })
    }

    /// Compact signature aligned with the label lists, e.g. `"a:+- b:++"`.
    pub fn signature(&self) -> String {
        let part = |vals: &[i8]| -> String {
            vals.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect()
        };
        format!("a:{} b:{}", part(&self.a_values), part(&self.b_values))
    }

    /// The point-mass correlation table of this strategy on given settings.
    pub fn table(&self, settings: &[(String, String)]) -> Result<CorrelationTable> {
        let mut probs = Vec::with_capacity(settings.len());
        for (x, y) in settings {
            let mut row = vec![0.0; 4];
            let a = self.a(x)?;
            let b = self.b(y)?;
            let idx = |v: i8| if v > 0 { 0 } else { 1 };
            row[idx(a) * 2 + idx(b)] = 1.0;
            probs.push(row);
        }
        CorrelationTable::new(settings.to_vec(), 2, 2, probs)
    }
}

/// The full Cartesian grid of setting pairs for two label lists.
pub fn full_grid(x_labels: &[String], y_labels: &[String]) -> Vec<(String, String)> {
    let mut out = Vec::with_capacity(x_labels.len() * y_labels.len());
    for x in x_labels {
        for y in y_labels {
            out.push((x.clone(), y.clone()));
        }
    }
    out
}

/// All `2^(|X|+|Y|)` deterministic strategies, in a fixed order (outcome bits
/// ascend with the enumeration index, x-settings first).
pub fn enumerate_deterministic_strategies(
    x_labels: &[String],
    y_labels: &[String],
) -> Result<Vec<DeterministicStrategy>> {
    let (nx, ny) = (x_labels.len(), y_labels.len());
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput(
            "strategy enumeration needs settings on both sides".into(),
        ));
    }
    if nx > MAX_SETTINGS_PER_SIDE || ny > MAX_SETTINGS_PER_SIDE {
        return Err(Error::Unsupported(format!(
            "strategy enumeration capped at {MAX_SETTINGS_PER_SIDE} settings per side, got {nx}×{ny}"
        )));
    }
    let mut out = Vec::with_capacity(1 << (nx + ny));
    for k in 0..1u32 << (nx + ny) {
        let bit = |i: usize| if k >> i & 1 == 1 { -1i8 } else { 1 };
        let a_values: Vec<i8> = (0..nx).map(bit).collect();
        let b_values: Vec<i8> = (nx..nx + ny).map(bit).collect();
        out.push(DeterministicStrategy::new(
            x_labels.to_vec(),
            y_labels.to_vec(),
            a_values,
            b_values,
        )?);
    }
    Ok(out)
}

/// The convex mixture of strategies as a correlation table.
pub fn strategy_mixture_table(
    strategies: &[DeterministicStrategy],
    weights: &[f64],
    settings: &[(String, String)],
) -> Result<CorrelationTable> {
    if strategies.len() != weights.len() {
        return Err(Error::DimensionMismatch("one weight per strategy required".into()));
    }
    let mut probs = vec![vec![0.0; 4]; settings.len()];
    for (strategy, &w) in strategies.iter().zip(weights) {
        for (s, (x, y)) in settings.iter().enumerate() {
            let a = strategy.a(x)?;
            let b = strategy.b(y)?;
            let idx = |v: i8| if v > 0 { 0usize } else { 1 };
            probs[s][idx(a) * 2 + idx(b)] += w;
        }
    }
    CorrelationTable::new(settings.to_vec(), 2, 2, probs)
}

/// The canonical Bell-separable model of a strategy mixture: λ indexes the
/// strategies, weights are setting-independent, outcomes follow the strategy.
pub fn strategy_mixture_model(
    strategies: &[DeterministicStrategy],
    weights: &[f64],
    settings: &[(String, String)],
) -> Result<FiniteLhvModel> {
    if strategies.len() != weights.len() {
        return Err(Error::DimensionMismatch("one weight per strategy required".into()));
    }
    let lambda_domain: Vec<String> = (0..strategies.len()).map(|k| format!("s{k}")).collect();
    let weight_row: Vec<f64> = weights.to_vec();
    let mut outcomes = Vec::with_capacity(settings.len());
    for (x, y) in settings {
        let mut row = Vec::with_capacity(strategies.len());
        for strategy in strategies {
            let to_idx = |v: i8| if v > 0 { 1usize } else { 2 };
            row.push((to_idx(strategy.a(x)?), to_idx(strategy.b(y)?)));
        }
        outcomes.push(row);
    }
    FiniteLhvModel::new(
        lambda_domain,
        settings.to_vec(),
        2,
        2,
        vec![weight_row; settings.len()],
        outcomes,
        "strategy mixture",
    )
}

/// Fine's formal joint distribution over one outcome per local setting.
#[derive(Debug, Clone)]
pub struct FineJoint {
    x_list: Vec<String>,
    y_list: Vec<String>,
    d1: usize,
    d2: usize,
    /// Mixed-radix over (a₁…a_m, b₁…b_n), a₁ most significant, digit = outcome−1.
    probs: Vec<f64>,
}

impl FineJoint {
    pub fn x_list(&self) -> &[String] {
        &self.x_list
    }

    pub fn y_list(&self) -> &[String] {
        &self.y_list
    }

    pub fn entries(&self) -> &[f64] {
        &self.probs
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn index_of(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        if a.len() != self.x_list.len() || b.len() != self.y_list.len() {
            return Err(Error::DimensionMismatch(
                "outcome pattern must cover every listed setting".into(),
            ));
        }
        let mut idx = 0usize;
        for &ai in a {
            if ai == 0 || ai > self.d1 {
                return Err(Error::InvalidInput(format!("outcome {ai} outside 1..={}", self.d1)));
            }
            idx = idx * self.d1 + (ai - 1);
        }
        for &bj in b {
            if bj == 0 || bj > self.d2 {
                return Err(Error::InvalidInput(format!("outcome {bj} outside 1..={}", self.d2)));
            }
            idx = idx * self.d2 + (bj - 1);
        }
        Ok(idx)
    }

    /// Probability of the complete outcome pattern.
    pub fn prob(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        Ok(self.probs[self.index_of(a, b)?])
    }

    /// Marginal on the single pair (x_list[xi], y_list[yj]), row-major
    /// `[(a−1)·d2 + (b−1)]`.
    pub fn pair_marginal(&self, xi: usize, yj: usize) -> Result<Vec<f64>> {
        if xi >= self.x_list.len() || yj >= self.y_list.len() {
            return Err(Error::InvalidInput("marginal indices out of range".into()));
        }
        let m = self.x_list.len();
        let n = self.y_list.len();
        let mut out = vec![0.0; self.d1 * self.d2];
        for (idx, &p) in self.probs.iter().enumerate() {
            // Decode the two digits of interest from the mixed-radix index.
            let mut rest = idx;
            let mut b_digit = 0usize;
            for pos in (0..n).rev() {
                let digit = rest % self.d2;
                rest /= self.d2;
                if pos == yj {
                    b_digit = digit;
                }
            }
            let mut a_digit = 0usize;
            for pos in (0..m).rev() {
                let digit = rest % self.d1;
                rest /= self.d1;
                if pos == xi {
                    a_digit = digit;
                }
            }
            out[a_digit * self.d2 + b_digit] += p;
        }
        Ok(out)
    }
}

/// Builds the Fine joint `p_F(a₁…a_m, b₁…b_n) = Σ_λ p(λ)·Π_j [a(λ,x_j)=a_j]·
/// Π_k [b(λ,y_k)=b_k]` for a measurement-independent, parameter-independent
/// model. Refuses measurement-dependent input: the construction needs a
/// single settings-free λ-distribution.
pub fn fine_joint(
    model: &FiniteLhvModel,
    x_list: &[String],
    y_list: &[String],
) -> Result<FineJoint> {
    if x_list.is_empty() || y_list.is_empty() {
        return Err(Error::InvalidInput("fine_joint needs settings on both sides".into()));
    }
    let props = check_properties(model);
    if !props.measurement_independence {
        return Err(Error::Assumption(
            "the hidden-variable weights depend on the settings; Fine's joint \
             distribution is only defined for measurement-independent models"
                .into(),
        ));
    }
    if !props.parameter_independence {
        return Err(Error::Assumption(
            "an outcome rule responds to the distant setting; single-side \
             response functions a(λ,x), b(λ,y) are not well defined"
                .into(),
        ));
    }
    let (d1, d2) = (model.d1(), model.d2());
    let size = d1
        .checked_pow(x_list.len() as u32)
        .and_then(|v| v.checked_mul(d2.checked_pow(y_list.len() as u32)?))
        .ok_or_else(|| Error::Unsupported("Fine joint outcome space overflows".into()))?;
    if size > MAX_FINE_ENTRIES {
        return Err(Error::Unsupported(format!(
            "Fine joint would have {size} entries (cap {MAX_FINE_ENTRIES})"
        )));
    }

    // One representative setting per listed label; parameter independence
    // makes the choice irrelevant.
    let x_rep: Vec<usize> = x_list
        .iter()
        .map(|x| {
            model
                .settings()
                .iter()
                .position(|(sx, _)| sx == x)
                .ok_or_else(|| Error::InvalidInput(format!("model lacks x-setting {x:?}")))
        })
        .collect::<Result<_>>()?;
    let y_rep: Vec<usize> = y_list
        .iter()
        .map(|y| {
            model
                .settings()
                .iter()
                .position(|(_, sy)| sy == y)
                .ok_or_else(|| Error::InvalidInput(format!("model lacks y-setting {y:?}")))
        })
        .collect::<Result<_>>()?;

    let weights = model.weights_for_setting(0);
    let mut probs = vec![0.0; size];
    for (l, &w) in weights.iter().enumerate() {
        let mut idx = 0usize;
        for &s in &x_rep {
            idx = idx * d1 + (model.outcome(s, l).0 - 1);
        }
        for &s in &y_rep {
            idx = idx * d2 + (model.outcome(s, l).1 - 1);
        }
        probs[idx] += w;
    }
    Ok(FineJoint { x_list: x_list.to_vec(), y_list: y_list.to_vec(), d1, d2, probs })
}

/// Largest deviation between the Fine joint's pair marginals and the model's
/// implied table, over pairs present in the model.
pub fn fine_marginal_error(fine: &FineJoint, model: &FiniteLhvModel) -> Result<f64> {
    let implied = model.implied_table();
    let mut worst = 0.0f64;
    for (xi, x) in fine.x_list().iter().enumerate() {
        for (yj, y) in fine.y_list().iter().enumerate() {
            let Some(s) = implied.setting_index(x, y) else { continue };
            let marginal = fine.pair_marginal(xi, yj)?;
            for a in 1..=model.d1() {
                for b in 1..=model.d2() {
                    let diff =
                        (marginal[(a - 1) * model.d2() + (b - 1)] - implied.prob(s, a, b)).abs();
                    worst = worst.max(diff);
                }
            }
        }
    }
    Ok(worst)
}

/// A violated linear functional over the table entries — an unnamed
/// Bell-type inequality extracted from the phase-1 dual.
#[derive(Debug, Clone, Serialize)]
pub struct InfeasibilityCertificate {
    /// One label per LP row: `"normalization"` or `"p(±1,±1|x,y)"`.
    pub row_labels: Vec<String>,
    pub coefficients: Vec<f64>,
    /// The functional evaluated on the table (right-hand sides).
    pub value_on_table: f64,
    /// Its maximum over all deterministic strategies; the table exceeds this.
    pub max_on_strategies: f64,
}

/// Outcome of the local-polytope membership test.
#[derive(Debug, Clone, Serialize)]
pub enum Separability {
    Feasible {
        /// Strategies with non-negligible weight, reconstructing the table.
        witness: Vec<(DeterministicStrategy, f64)>,
        reconstruction_error: f64,
    },
    Infeasible {
        certificate: InfeasibilityCertificate,
    },
}

impl Separability {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Separability::Feasible { .. })
    }
}

/// Tests Bell separability: is the table a convex mixture of deterministic
/// strategies? Binary outcomes only; at most 4 settings per side.
pub fn separability_feasible(table: &CorrelationTable) -> Result<Separability> {
    if table.d1() != 2 || table.d2() != 2 {
        return Err(Error::Unsupported(format!(
            "local-polytope membership supports binary outcomes only; \
             table has {}×{} outcomes (signalling detection still applies)",
            table.d1(),
            table.d2()
        )));
    }
    let x_labels = table.x_labels();
    let y_labels = table.y_labels();
    let strategies = enumerate_deterministic_strategies(&x_labels, &y_labels)?;

    // Rows: normalization, then per setting the three outcome equalities
    // (the fourth is redundant given normalization of both sides).
    let n_settings = table.settings().len();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(1 + 3 * n_settings);
    let mut rhs: Vec<f64> = Vec::with_capacity(1 + 3 * n_settings);
    let mut row_labels: Vec<String> = Vec::with_capacity(1 + 3 * n_settings);
    rows.push(vec![1.0; strategies.len()]);
    rhs.push(1.0);
    row_labels.push("normalization".to_string());
    let outcome_sign = |o: usize| if o == 1 { 1i8 } else { -1 };
    for (s, (x, y)) in table.settings().iter().enumerate() {
        for a in 1..=2usize {
            for b in 1..=2usize {
                if (a, b) == (2, 2) {
                    continue;
                }
                let row: Vec<f64> = strategies
                    .iter()
                    .map(|k| k.prob(x, y, outcome_sign(a), outcome_sign(b)))
                    .collect::<Result<_>>()?;
                rows.push(row);
                rhs.push(table.prob(s, a, b));
                row_labels.push(format!("p({:+},{:+}|{x},{y})", outcome_sign(a), outcome_sign(b)));
            }
        }
    }

    let solution = phase1(&rows, &rhs)?;
    if solution.objective < FEASIBILITY_TOL {
        let witness: Vec<(DeterministicStrategy, f64)> = strategies
            .iter()
            .zip(&solution.x)
            .filter(|(_, &w)| w > 1e-15)
            .map(|(k, &w)| (k.clone(), w))
            .collect();
        let rebuilt = strategy_mixture_table(
            &witness.iter().map(|(k, _)| k.clone()).collect::<Vec<_>>(),
            &witness.iter().map(|&(_, w)| w).collect::<Vec<_>>(),
            table.settings(),
        )?;
        let mut err = 0.0f64;
        for s in 0..n_settings {
            for a in 1..=2 {
                for b in 1..=2 {
                    err = err.max((rebuilt.prob(s, a, b) - table.prob(s, a, b)).abs());
                }
            }
        }
        Ok(Separability::Feasible { witness, reconstruction_error: err })
    } else {
        let y = &solution.dual;
        let value_on_table: f64 = y.iter().zip(&rhs).map(|(yi, bi)| yi * bi).sum();
        let max_on_strategies = (0..strategies.len())
            .map(|k| (0..rows.len()).map(|i| y[i] * rows[i][k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Separability::Infeasible {
            certificate: InfeasibilityCertificate {
                row_labels,
                coefficients: y.clone(),
                value_on_table,
                max_on_strategies,
            },
        })
    }
}

/// Which side's statistics respond to the distant setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

/// One detected violation of statistical locality at the observed level.
#[derive(Debug, Clone, Serialize)]
pub struct SignallingViolation {
    pub side: Side,
    /// The violating side's own setting, held fixed.
    pub fixed_setting: String,
    /// The two distant settings whose change moves the marginal.
    pub distant_settings: (String, String),
    pub max_deviation: f64,
}

/// Scans all one-sided marginals for dependence on the distant setting.
/// Empty result ⟺ the table is no-signalling (within tolerance).
pub fn detect_signalling(table: &CorrelationTable) -> Vec<SignallingViolation> {
    let mut out = Vec::new();
    let settings = table.settings();

    let marginal_a = |s: usize| -> Vec<f64> {
        (1..=table.d1()).map(|a| (1..=table.d2()).map(|b| table.prob(s, a, b)).sum()).collect()
    };
    let marginal_b = |s: usize| -> Vec<f64> {
        (1..=table.d2()).map(|b| (1..=table.d1()).map(|a| table.prob(s, a, b)).sum()).collect()
    };

    // Side A: Alice's marginal at fixed x must not depend on y.
    for i in 0..settings.len() {
        for j in (i + 1)..settings.len() {
            if settings[i].0 == settings[j].0 && settings[i].1 != settings[j].1 {
                let (mi, mj) = (marginal_a(i), marginal_a(j));
                let dev = mi.iter().zip(&mj).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                if dev > SIGNALLING_TOL {
                    out.push(SignallingViolation {
                        side: Side::A,
                        fixed_setting: settings[i].0.clone(),
                        distant_settings: (settings[i].1.clone(), settings[j].1.clone()),
                        max_deviation: dev,
                    });
                }
            }
        }
    }
    // Side B: Bob's marginal at fixed y must not depend on x.
    for i in 0..settings.len() {
        for j in (i + 1)..settings.len() {
            if settings[i].1 == settings[j].1 && settings[i].0 != settings[j].0 {
                let (mi, mj) = (marginal_b(i), marginal_b(j));
                let dev = mi.iter().zip(&mj).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                if dev > SIGNALLING_TOL {
                    out.push(SignallingViolation {
                        side: Side::B,
                        fixed_setting: settings[i].1.clone(),
                        distant_settings: (settings[i].0.clone(), settings[j].0.clone()),
                        max_deviation: dev,
                    });
                }
            }
        }
    }
    out
}
