//! JSON interchange formats.
//!
//! Complex entries are two-element `[re, im]` arrays and matrices are
//! row-major nested arrays. Composite keys join setting labels with `:`
//! (`"x:y"`, `"x:y:a:b"`), which is why `:` is banned inside labels.
//! `serde_json` maps preserve sorted key order, so serialization is
//! deterministic.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::model::{CorrelationTable, FiniteLhvModel, MuModel};
use crate::quantum::{DensityOperator, Effect, PovmFamily};

fn complex_to_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn complex_from_json(v: &Value) -> Result<Complex64> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidInput(format!("expected [re, im], got {v}")))?;
    let re = arr[0].as_f64().ok_or_else(|| Error::InvalidInput("non-numeric re part".into()))?;
    let im = arr[1].as_f64().ok_or_else(|| Error::InvalidInput("non-numeric im part".into()))?;
    Ok(Complex64::new(re, im))
}

/// Row-major nested arrays of `[re, im]` entries.
pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex_to_json(m.get(i, j))).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::InvalidInput("matrix must be an array of rows".into()))?;
    let mut data = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| Error::InvalidInput("matrix row must be an array".into()))?;
        data.push(cells.iter().map(complex_from_json).collect::<Result<Vec<_>>>()?);
    }
    ComplexMatrix::from_rows(data)
}

pub fn density_to_json(rho: &DensityOperator) -> Value {
    matrix_to_json(rho.matrix())
}

pub fn density_from_json(v: &Value) -> Result<DensityOperator> {
    DensityOperator::new(matrix_from_json(v)?)
}

fn settings_to_json(settings: &[(String, String)]) -> Value {
    Value::Array(settings.iter().map(|(x, y)| json!([x, y])).collect())
}

fn settings_from_json(v: &Value) -> Result<Vec<(String, String)>> {
    let arr =
        v.as_array().ok_or_else(|| Error::InvalidInput("\"settings\" must be an array".into()))?;
    arr.iter()
        .map(|pair| {
            let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                Error::InvalidInput(format!("setting must be [x, y], got {pair}"))
            })?;
            let x = p[0]
                .as_str()
                .ok_or_else(|| Error::InvalidInput("setting labels must be strings".into()))?;
            let y = p[1]
                .as_str()
                .ok_or_else(|| Error::InvalidInput("setting labels must be strings".into()))?;
            Ok((x.to_string(), y.to_string()))
        })
        .collect()
}

fn field<'v>(v: &'v Value, name: &str) -> Result<&'v Value> {
    v.get(name).ok_or_else(|| Error::InvalidInput(format!("missing field {name:?}")))
}

fn usize_field(v: &Value, name: &str) -> Result<usize> {
    field(v, name)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::InvalidInput(format!("field {name:?} must be a nonnegative integer")))
}

/// `{"settings": [["x","y"],…], "outcomes": [d1,d2], "probs": {"x:y": [[…],…]}}`
/// with `probs["x:y"][a-1][b-1] = p(a,b|x,y)`.
pub fn table_to_json(table: &CorrelationTable) -> Value {
    let mut probs = Map::new();
    for (s, (x, y)) in table.settings().iter().enumerate() {
        let rows: Vec<Value> = (1..=table.d1())
            .map(|a| Value::Array((1..=table.d2()).map(|b| json!(table.prob(s, a, b))).collect()))
            .collect();
        probs.insert(format!("{x}:{y}"), Value::Array(rows));
    }
    json!({
        "settings": settings_to_json(table.settings()),
        "outcomes": [table.d1(), table.d2()],
        "probs": Value::Object(probs),
    })
}

pub fn table_from_json(v: &Value) -> Result<CorrelationTable> {
    let settings = settings_from_json(field(v, "settings")?)?;
    let outcomes = field(v, "outcomes")?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidInput("\"outcomes\" must be [d1, d2]".into()))?;
    let d1 = outcomes[0]
        .as_u64()
        .ok_or_else(|| Error::InvalidInput("d1 must be an integer".into()))? as usize;
    let d2 = outcomes[1]
        .as_u64()
        .ok_or_else(|| Error::InvalidInput("d2 must be an integer".into()))? as usize;
    let probs_obj = field(v, "probs")?
        .as_object()
        .ok_or_else(|| Error::InvalidInput("\"probs\" must be an object".into()))?;
    let mut probs = Vec::with_capacity(settings.len());
    for (x, y) in &settings {
        let key = format!("{x}:{y}");
        let entry = probs_obj
            .get(&key)
            .ok_or_else(|| Error::InvalidInput(format!("missing probabilities for {key:?}")))?;
        let rows = entry
            .as_array()
            .filter(|r| r.len() == d1)
            .ok_or_else(|| Error::InvalidInput(format!("{key:?} must have {d1} outcome rows")))?;
        let mut flat = Vec::with_capacity(d1 * d2);
        for row in rows {
            let cells = row.as_array().filter(|c| c.len() == d2).ok_or_else(|| {
                Error::InvalidInput(format!("{key:?} rows must have {d2} entries"))
            })?;
            for c in cells {
                flat.push(
                    c.as_f64().ok_or_else(|| {
                        Error::InvalidInput("probabilities must be numbers".into())
                    })?,
                );
            }
        }
        probs.push(flat);
    }
    CorrelationTable::new(settings, d1, d2, probs)
}

/// `{"d1": …, "d2": …, "settings": […], "effects": {"x:y:a:b": matrix}}`.
pub fn povm_to_json(povms: &PovmFamily) -> Result<Value> {
    let mut effects = Map::new();
    for (s, (x, y)) in povms.settings().iter().enumerate() {
        for a in 1..=povms.d1() {
            for b in 1..=povms.d2() {
                effects.insert(
                    format!("{x}:{y}:{a}:{b}"),
                    matrix_to_json(povms.effect(s, a, b)?.matrix()),
                );
            }
        }
    }
    Ok(json!({
        "d1": povms.d1(),
        "d2": povms.d2(),
        "settings": settings_to_json(povms.settings()),
        "effects": Value::Object(effects),
    }))
}

pub fn povm_from_json(v: &Value) -> Result<PovmFamily> {
    let d1 = usize_field(v, "d1")?;
    let d2 = usize_field(v, "d2")?;
    let settings = settings_from_json(field(v, "settings")?)?;
    let effects_obj = field(v, "effects")?
        .as_object()
        .ok_or_else(|| Error::InvalidInput("\"effects\" must be an object".into()))?;
    let mut effects = Vec::with_capacity(settings.len());
    for (x, y) in &settings {
        let mut group = Vec::with_capacity(d1 * d2);
        for a in 1..=d1 {
            for b in 1..=d2 {
                let key = format!("{x}:{y}:{a}:{b}");
                let m = effects_obj
                    .get(&key)
                    .ok_or_else(|| Error::InvalidInput(format!("missing effect {key:?}")))?;
                group.push(Effect::new(matrix_from_json(m)?)?);
            }
        }
        effects.push(group);
    }
    PovmFamily::new(d1, d2, settings, effects)
}

/// Inspection dump of a finite model: λ labels, settings, per-setting weight
/// vectors and outcome rules.
pub fn model_to_json(model: &FiniteLhvModel) -> Value {
    let mut weights = Map::new();
    let mut rules = Map::new();
    for (s, (x, y)) in model.settings().iter().enumerate() {
        let key = format!("{x}:{y}");
        weights.insert(key.clone(), json!(model.weights_for_setting(s)));
        let outcome_rows: Vec<Value> = (0..model.lambda_domain().len())
            .map(|l| {
                let (a, b) = model.outcome(s, l);
                json!([a, b])
            })
            .collect();
        rules.insert(key, Value::Array(outcome_rows));
    }
    json!({
        "lambda": model.lambda_domain(),
        "settings": settings_to_json(model.settings()),
        "outcomes": [model.d1(), model.d2()],
        "preparation": model.preparation(),
        "weights": Value::Object(weights),
        "outcome_rules": Value::Object(rules),
    })
}

/// Parses the [`model_to_json`] format back into a model. `preparation` is
/// optional (defaults to `"file"`).
pub fn model_from_json(v: &Value) -> Result<FiniteLhvModel> {
    let lambda: Vec<String> = field(v, "lambda")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("\"lambda\" must be an array".into()))?
        .iter()
        .map(|l| {
            l.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::InvalidInput("λ labels must be strings".into()))
        })
        .collect::<Result<_>>()?;
    let settings = settings_from_json(field(v, "settings")?)?;
    let outcomes_field = field(v, "outcomes")?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::InvalidInput("\"outcomes\" must be [d1, d2]".into()))?;
    let d1 = outcomes_field[0]
        .as_u64()
        .ok_or_else(|| Error::InvalidInput("d1 must be an integer".into()))? as usize;
    let d2 = outcomes_field[1]
        .as_u64()
        .ok_or_else(|| Error::InvalidInput("d2 must be an integer".into()))? as usize;
    let preparation = v.get("preparation").and_then(Value::as_str).unwrap_or("file").to_string();
    let weights_obj = field(v, "weights")?
        .as_object()
        .ok_or_else(|| Error::InvalidInput("\"weights\" must be an object".into()))?;
    let rules_obj = field(v, "outcome_rules")?
        .as_object()
        .ok_or_else(|| Error::InvalidInput("\"outcome_rules\" must be an object".into()))?;
    let mut weights = Vec::with_capacity(settings.len());
    let mut rules = Vec::with_capacity(settings.len());
    for (x, y) in &settings {
        let key = format!("{x}:{y}");
        let w = weights_obj
            .get(&key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput(format!("missing weight vector for {key:?}")))?;
        weights.push(
            w.iter()
                .map(|v| {
                    v.as_f64().ok_or_else(|| Error::InvalidInput("weights must be numbers".into()))
                })
                .collect::<Result<Vec<f64>>>()?,
        );
        let r = rules_obj
            .get(&key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput(format!("missing outcome rules for {key:?}")))?;
        rules.push(
            r.iter()
                .map(|pair| {
                    let p = pair.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                        Error::InvalidInput("outcome rules must be [a, b] pairs".into())
                    })?;
                    let a = p[0].as_u64().ok_or_else(|| {
                        Error::InvalidInput("outcomes must be positive integers".into())
                    })? as usize;
                    let b = p[1].as_u64().ok_or_else(|| {
                        Error::InvalidInput("outcomes must be positive integers".into())
                    })? as usize;
                    Ok((a, b))
                })
                .collect::<Result<Vec<(usize, usize)>>>()?,
        );
    }
    FiniteLhvModel::new(lambda, settings, d1, d2, weights, rules, preparation)
}

/// Parsed causal-decomposition input: λ labels, settings, per-setting weight
/// vectors, and the setting distribution.
pub type WeightTable = (Vec<String>, Vec<(String, String)>, Vec<Vec<f64>>, Vec<f64>);

/// Input for the causal decomposition: λ labels, settings, weight vectors per
/// setting, and optionally a setting distribution (uniform by default).
/// `{"lambda": […], "settings": […], "weights": {"x:y": […]}, "p_xy": {"x:y": …}?}`
pub fn weight_table_from_json(v: &Value) -> Result<WeightTable> {
    let lambda: Vec<String> = field(v, "lambda")?
        .as_array()
        .ok_or_else(|| Error::InvalidInput("\"lambda\" must be an array".into()))?
        .iter()
        .map(|l| {
            l.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::InvalidInput("λ labels must be strings".into()))
        })
        .collect::<Result<_>>()?;
    let settings = settings_from_json(field(v, "settings")?)?;
    let weights_obj = field(v, "weights")?
        .as_object()
        .ok_or_else(|| Error::InvalidInput("\"weights\" must be an object".into()))?;
    let mut weights = Vec::with_capacity(settings.len());
    for (x, y) in &settings {
        let key = format!("{x}:{y}");
        let row = weights_obj
            .get(&key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput(format!("missing weight vector for {key:?}")))?;
        weights.push(
            row.iter()
                .map(|w| {
                    w.as_f64().ok_or_else(|| Error::InvalidInput("weights must be numbers".into()))
                })
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    let p_xy = match v.get("p_xy") {
        None | Some(Value::Null) => {
            vec![1.0 / settings.len() as f64; settings.len()]
        }
        Some(obj) => {
            let map = obj
                .as_object()
                .ok_or_else(|| Error::InvalidInput("\"p_xy\" must be an object".into()))?;
            settings
                .iter()
                .map(|(x, y)| {
                    let key = format!("{x}:{y}");
                    map.get(&key).and_then(Value::as_f64).ok_or_else(|| {
                        Error::InvalidInput(format!("missing setting probability for {key:?}"))
                    })
                })
                .collect::<Result<Vec<f64>>>()?
        }
    };
    Ok((lambda, settings, weights, p_xy))
}

pub fn mu_model_to_json(mu: &MuModel) -> Value {
    let mut rows = Map::new();
    for (l, label) in mu.lambda_domain.iter().enumerate() {
        rows.insert(label.clone(), json!(mu.p_mu_given_lambda[l]));
    }
    json!({
        "mu": settings_to_json(&mu.mu_domain),
        "lambda": mu.lambda_domain,
        "p_mu_given_lambda": Value::Object(rows),
        "lambda_marginal": mu.lambda_marginal,
        "excluded_lambdas": mu.excluded_lambdas,
        "dropped_settings": settings_to_json(&mu.dropped_settings),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVector3;
    use crate::model::{build_general_brans, causal_decomposition};
    use crate::quantum::singlet_state;

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_rows(vec![
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -0.5)],
            vec![Complex64::new(-3.0, 0.0), Complex64::new(0.25, 0.75)],
        ])
        .unwrap();
        let v = matrix_to_json(&m);
        let back = matrix_from_json(&v).unwrap();
        assert_eq!(back.sub(&m).unwrap().max_abs(), 0.0);
        assert!(matrix_from_json(&json!([[1.0]])).is_err());
        assert!(matrix_from_json(&json!([[[1.0, 2.0]], [[1.0, 2.0], [3.0, 4.0]]])).is_err());
    }

    #[test]
    fn density_round_trip() {
        let rho = singlet_state();
        let v = density_to_json(&rho);
        let back = density_from_json(&v).unwrap();
        assert!(back.matrix().sub(rho.matrix()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn table_round_trip_and_validation() {
        let xs = [UnitVector3::z_axis(), UnitVector3::in_xz_plane(1.1)];
        let ys = [UnitVector3::in_xz_plane(0.6), UnitVector3::in_xz_plane(2.4)];
        let table = CorrelationTable::singlet_grid(&xs, &ys).unwrap();
        let v = table_to_json(&table);
        assert!(v["probs"]["x0:y0"].is_array());
        let back = table_from_json(&v).unwrap();
        assert_eq!(back.settings(), table.settings());
        for s in 0..table.settings().len() {
            for a in 1..=2 {
                for b in 1..=2 {
                    assert_eq!(back.prob(s, a, b), table.prob(s, a, b));
                }
            }
        }
        // Unnormalized probabilities are rejected at construction.
        let mut bad = v.clone();
        bad["probs"]["x0:y0"][0][0] = json!(0.9);
        assert!(table_from_json(&bad).is_err());
        // Deterministic output: identical serialization both times.
        assert_eq!(
            serde_json::to_string(&table_to_json(&table)).unwrap(),
            serde_json::to_string(&v).unwrap()
        );
    }

    #[test]
    fn povm_round_trip() {
        let xs = [UnitVector3::z_axis(), UnitVector3::x_axis()];
        let ys = [UnitVector3::in_xz_plane(0.9), UnitVector3::in_xz_plane(2.2)];
        let povms = PovmFamily::from_direction_grid(&xs, &ys).unwrap();
        let v = povm_to_json(&povms).unwrap();
        let back = povm_from_json(&v).unwrap();
        assert_eq!(back.settings(), povms.settings());
        for s in 0..povms.settings().len() {
            for a in 1..=2 {
                for b in 1..=2 {
                    let diff = back
                        .effect(s, a, b)
                        .unwrap()
                        .matrix()
                        .sub(povms.effect(s, a, b).unwrap().matrix())
                        .unwrap()
                        .max_abs();
                    assert!(diff < 1e-15);
                }
            }
        }
        // Tampered effect breaks completeness → constructor refuses.
        let mut bad = v.clone();
        bad["effects"]["x0:y0:1:1"][0][0] = json!([0.9, 0.0]);
        assert!(povm_from_json(&bad).is_err());
    }

    #[test]
    fn model_and_mu_serialization() {
        let rho = singlet_state();
        let dirs = [(UnitVector3::z_axis(), UnitVector3::in_xz_plane(0.8))];
        let povms = PovmFamily::from_projective_pairs(&dirs).unwrap();
        let model = build_general_brans(&rho, &povms, "singlet").unwrap();
        let v = model_to_json(&model);
        assert_eq!(v["lambda"].as_array().unwrap().len(), 4);
        assert!(v["weights"]["x0:y0"].is_array());

        let back = model_from_json(&v).unwrap();
        assert_eq!(back.lambda_domain(), model.lambda_domain());
        assert_eq!(back.preparation(), "singlet");
        for l in 0..4 {
            assert_eq!(back.weight(0, l), model.weight(0, l));
            assert_eq!(back.outcome(0, l), model.outcome(0, l));
        }
        assert!(model_from_json(&json!({"lambda": ["l0"]})).is_err());

        let mu = causal_decomposition(
            model.lambda_domain(),
            model.settings(),
            &[model.weights_for_setting(0).to_vec()],
            &[1.0],
        )
        .unwrap();
        let mv = mu_model_to_json(&mu);
        assert_eq!(mv["mu"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn weight_table_parsing() {
        let v = json!({
            "lambda": ["l0", "l1"],
            "settings": [["x0", "y0"], ["x1", "y0"]],
            "weights": {"x0:y0": [0.5, 0.5], "x1:y0": [0.25, 0.75]},
        });
        let (lambda, settings, weights, p_xy) = weight_table_from_json(&v).unwrap();
        assert_eq!(lambda.len(), 2);
        assert_eq!(settings.len(), 2);
        assert_eq!(weights[1][1], 0.75);
        assert_eq!(p_xy, vec![0.5, 0.5]);

        let with_p = json!({
            "lambda": ["l0"],
            "settings": [["x0", "y0"], ["x1", "y0"]],
            "weights": {"x0:y0": [1.0], "x1:y0": [1.0]},
            "p_xy": {"x0:y0": 0.9, "x1:y0": 0.1},
        });
        let (_, _, _, p_xy) = weight_table_from_json(&with_p).unwrap();
        assert_eq!(p_xy, vec![0.9, 0.1]);

        assert!(weight_table_from_json(&json!({"lambda": ["l0"]})).is_err());
    }
}
