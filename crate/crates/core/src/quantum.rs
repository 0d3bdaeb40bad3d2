//! Quantum-state primitives: density operators, POVM effects and families,
//! Born-rule probabilities, and the standard states/projectors used by the
//! hidden-variable constructions (singlet state, spin projectors, maximally
//! entangled qudit pairs, mutually unbiased qudit bases).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::UnitVector3;
use crate::matrix::{hermitian_eig, tensor_product, ComplexMatrix, HERMITICITY_TOL};

/// Tolerance on `|tr ρ − 1|` for density operators.
pub const TRACE_TOL: f64 = 1e-10;

/// Eigenvalue slack for positivity checks: eigenvalues ≥ −this (density
/// operators) and within `[−this, 1 + this]` (effects).
pub const EIGENVALUE_TOL: f64 = 1e-10;

/// Entrywise tolerance on `Σ_{a,b} E^{xy}_{ab} − I` for a POVM family.
pub const POVM_COMPLETENESS_TOL: f64 = 1e-9;

/// Born probabilities may stray this far outside `[0,1]` before clamping;
/// anything worse is an error, not a silent clamp.
pub const PROBABILITY_TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A quantum state ρ: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Validation("density operator must be square".into()));
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "density operator not Hermitian: max |ρ − ρ†| = {herm:.3e}"
            )));
        }
        let tr = matrix.trace()?;
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Validation(format!(
                "density operator trace {} + {}i deviates from 1",
                tr.re, tr.im
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = *eig.values.last().expect("non-empty spectrum");
        if min < -EIGENVALUE_TOL {
            return Err(Error::Validation(format!(
                "density operator not positive semidefinite: witness eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Outer product |ψ⟩⟨ψ| of a (normalized) state vector.
    pub fn from_pure(state: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq < 1e-300 {
            return Err(Error::Validation("zero state vector".into()));
        }
        let n = state.len();
        let mut m = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, state[i] * state[j].conj() / norm_sq);
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// A POVM element: Hermitian with spectrum in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Validation("effect must be square".into()));
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::Validation(format!(
                "effect not Hermitian: max |E − E†| = {herm:.3e}"
            )));
        }
        let eig = hermitian_eig(&matrix)?;
        let max = eig.values[0];
        let min = *eig.values.last().expect("non-empty spectrum");
        if min < -EIGENVALUE_TOL || max > 1.0 + EIGENVALUE_TOL {
            return Err(Error::Validation(format!(
                "effect spectrum [{min:.6e}, {max:.6e}] escapes [0, 1]"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// The Born rule `tr[ρE]`. The trace of a product of Hermitian PSD operators
/// is real; a small imaginary part or an excursion outside `[0,1]` is rounding
/// and is clamped, but only within [`PROBABILITY_TOL`].
pub fn born_probability(rho: &DensityOperator, effect: &Effect) -> Result<f64> {
    if rho.dim() != effect.dim() {
        return Err(Error::DimensionMismatch(format!(
            "born_probability: state dimension {} vs effect dimension {}",
            rho.dim(),
            effect.dim()
        )));
    }
    let tr = rho.matrix().mul(effect.matrix())?.trace()?;
    if tr.im.abs() > PROBABILITY_TOL {
        return Err(Error::Numerical(format!("born probability has imaginary part {:.3e}", tr.im)));
    }
    let p = tr.re;
    if !(-PROBABILITY_TOL..=1.0 + PROBABILITY_TOL).contains(&p) {
        return Err(Error::Numerical(format!(
            "born probability {p:.17} outside [0,1] beyond tolerance {PROBABILITY_TOL:e}"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// The two-qubit singlet |Ψ⁻⟩ = (|01⟩ − |10⟩)/√2 as a density operator.
pub fn singlet_state() -> DensityOperator {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DensityOperator::from_pure(&[c(0.0, 0.0), c(r, 0.0), c(-r, 0.0), c(0.0, 0.0)])
        .expect("singlet vector is normalized")
}

/// Maximally entangled pair of d-level systems, |Φ⟩ = Σᵢ |ii⟩ / √d.
pub fn maximally_entangled_state(d: usize) -> Result<DensityOperator> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let amp = 1.0 / (d as f64).sqrt();
    let mut state = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        state[i * d + i] = c(amp, 0.0);
    }
    DensityOperator::from_pure(&state)
}

/// Qubit projector `(I + a·x̂·σ)/2` onto spin outcome `a = ±1` along `x̂`.
pub fn spin_projector(direction: &UnitVector3, outcome: i8) -> Result<Effect> {
    if outcome != 1 && outcome != -1 {
        return Err(Error::InvalidInput(format!("spin outcome must be ±1, got {outcome}")));
    }
    let a = outcome as f64;
    let [x, y, z] = direction.components();
    let m = ComplexMatrix::from_rows(vec![
        vec![c((1.0 + a * z) / 2.0, 0.0), c(a * x / 2.0, -a * y / 2.0)],
        vec![c(a * x / 2.0, a * y / 2.0), c((1.0 - a * z) / 2.0, 0.0)],
    ])?;
    Effect::new(m)
}

/// Which tensor factor to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of a `(d1·d2)`-dimensional operator over one factor.
pub fn partial_trace(
    m: &ComplexMatrix,
    d1: usize,
    d2: usize,
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != d1 * d2 {
        return Err(Error::DimensionMismatch(format!(
            "partial trace: matrix is {}×{}, expected {}×{}",
            m.rows(),
            m.cols(),
            d1 * d2,
            d1 * d2
        )));
    }
    match traced {
        Subsystem::Second => {
            let mut out = ComplexMatrix::zeros(d1, d1);
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut s = c(0.0, 0.0);
                    for k in 0..d2 {
                        s += m.get(i * d2 + k, j * d2 + k);
                    }
                    out.set(i, j, s);
                }
            }
            Ok(out)
        }
        Subsystem::First => {
            let mut out = ComplexMatrix::zeros(d2, d2);
            for i in 0..d2 {
                for j in 0..d2 {
                    let mut s = c(0.0, 0.0);
                    for k in 0..d1 {
                        s += m.get(k * d2 + i, k * d2 + j);
                    }
                    out.set(i, j, s);
                }
            }
            Ok(out)
        }
    }
}

/// The d-dimensional discrete Fourier unitary, `F[j,k] = ω^{jk}/√d`.
pub fn fourier_matrix(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    let scale = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        for k in 0..d {
            let phase = 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64;
            m.set(j, k, Complex64::from_polar(scale, phase));
        }
    }
    m
}

/// Rank-1 projectors onto the columns of a unitary (an orthonormal basis).
pub fn basis_projectors(unitary: &ComplexMatrix) -> Result<Vec<Effect>> {
    if !unitary.is_square() {
        return Err(Error::Validation("basis matrix must be square".into()));
    }
    let d = unitary.rows();
    let mut out = Vec::with_capacity(d);
    for col in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m.set(i, j, unitary.get(i, col) * unitary.get(j, col).conj());
            }
        }
        out.push(Effect::new(m)?);
    }
    Ok(out)
}

/// A family of joint POVMs `{E^{xy}_{ab}}` indexed by setting labels.
///
/// `d1`, `d2` are the outcome-set sizes per side; outcomes are `1..=d1` and
/// `1..=d2`. For each setting the effects must sum to the identity.
#[derive(Debug, Clone)]
pub struct PovmFamily {
    d1: usize,
    d2: usize,
    settings: Vec<(String, String)>,
    /// `effects[setting][(a-1)·d2 + (b-1)]`.
    effects: Vec<Vec<Effect>>,
}

/// Setting labels double as JSON keys of the form `"x:y"` (and `"x:y:a:b"`),
/// so the separator is reserved.
pub fn validate_label(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::InvalidInput("empty setting label".into()));
    }
    if label.contains(':') {
        return Err(Error::InvalidInput(format!("setting label {label:?} must not contain ':'")));
    }
    Ok(())
}

impl PovmFamily {
    pub fn new(
        d1: usize,
        d2: usize,
        settings: Vec<(String, String)>,
        effects: Vec<Vec<Effect>>,
    ) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::InvalidInput("outcome-set sizes must be positive".into()));
        }
        if settings.is_empty() {
            return Err(Error::InvalidInput("POVM family needs at least one setting".into()));
        }
        if effects.len() != settings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} settings but {} effect groups",
                settings.len(),
                effects.len()
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
        let dim = effects
            .first()
            .and_then(|g| g.first())
            .map(|e| e.dim())
            .ok_or_else(|| Error::InvalidInput("empty effect group".into()))?;
        for (s, group) in effects.iter().enumerate() {
            if group.len() != d1 * d2 {
                return Err(Error::DimensionMismatch(format!(
                    "setting {:?} has {} effects, expected {}",
                    settings[s],
                    group.len(),
                    d1 * d2
                )));
            }
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for e in group {
                if e.dim() != dim {
                    return Err(Error::DimensionMismatch(
                        "effects of differing dimension in one family".into(),
                    ));
                }
                sum = sum.add(e.matrix())?;
            }
            let defect = sum.sub(&ComplexMatrix::identity(dim))?.max_abs();
            if defect > POVM_COMPLETENESS_TOL {
                return Err(Error::Validation(format!(
                    "POVM for setting {:?} sums to identity only within {defect:.3e} (tolerance {POVM_COMPLETENESS_TOL:e})",
                    settings[s]
                )));
            }
        }
        Ok(Self { d1, d2, settings, effects })
    }

    /// Joint projective measurements `P(x,a) ⊗ P(y,b)` for the given list of
    /// direction pairs; setting labels are `x0,y0`, `x1,y1`, … per pair.
    pub fn from_projective_pairs(pairs: &[(UnitVector3, UnitVector3)]) -> Result<Self> {
        let settings: Vec<(String, String)> =
            (0..pairs.len()).map(|i| (format!("x{i}"), format!("y{i}"))).collect();
        let mut effects = Vec::with_capacity(pairs.len());
        for (x, y) in pairs {
            effects.push(Self::spin_pair_effects(x, y)?);
        }
        Self::new(2, 2, settings, effects)
    }

    /// Full grid of joint projective spin measurements over `xs × ys`, with
    /// shared labels `x0…`, `y0…`.
    pub fn from_direction_grid(xs: &[UnitVector3], ys: &[UnitVector3]) -> Result<Self> {
        let mut settings = Vec::new();
        let mut effects = Vec::new();
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                settings.push((format!("x{i}"), format!("y{j}")));
                effects.push(Self::spin_pair_effects(x, y)?);
            }
        }
        Self::new(2, 2, settings, effects)
    }

    /// Full grid of products of local projective bases (one unitary per local
    /// setting, columns = basis states).
    pub fn from_local_bases(bases1: &[ComplexMatrix], bases2: &[ComplexMatrix]) -> Result<Self> {
        if bases1.is_empty() || bases2.is_empty() {
            return Err(Error::InvalidInput("need at least one basis per side".into()));
        }
        let d1 = bases1[0].rows();
        let d2 = bases2[0].rows();
        let proj1: Vec<Vec<Effect>> = bases1.iter().map(basis_projectors).collect::<Result<_>>()?;
        let proj2: Vec<Vec<Effect>> = bases2.iter().map(basis_projectors).collect::<Result<_>>()?;
        let mut settings = Vec::new();
        let mut effects = Vec::new();
        for (i, pa) in proj1.iter().enumerate() {
            for (j, pb) in proj2.iter().enumerate() {
                settings.push((format!("x{i}"), format!("y{j}")));
                let mut group = Vec::with_capacity(d1 * d2);
                for ea in pa {
                    for eb in pb {
                        group.push(Effect::new(tensor_product(ea.matrix(), eb.matrix()))?);
                    }
                }
                effects.push(group);
            }
        }
        Self::new(d1, d2, settings, effects)
    }

    fn spin_pair_effects(x: &UnitVector3, y: &UnitVector3) -> Result<Vec<Effect>> {
        let mut group = Vec::with_capacity(4);
        for &a in &[1i8, -1] {
            for &b in &[1i8, -1] {
                let e =
                    tensor_product(spin_projector(x, a)?.matrix(), spin_projector(y, b)?.matrix());
                group.push(Effect::new(e)?);
            }
        }
        Ok(group)
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn dim(&self) -> usize {
        self.effects[0][0].dim()
    }

    pub fn settings(&self) -> &[(String, String)] {
        &self.settings
    }

    /// Effect for setting index `s` and outcomes `a ∈ 1..=d1`, `b ∈ 1..=d2`.
    pub fn effect(&self, s: usize, a: usize, b: usize) -> Result<&Effect> {
        if s >= self.settings.len() {
            return Err(Error::InvalidInput(format!("setting index {s} out of range")));
        }
        if a == 0 || a > self.d1 || b == 0 || b > self.d2 {
            return Err(Error::InvalidInput(format!(
                "outcome ({a},{b}) outside 1..={} × 1..={}",
                self.d1, self.d2
            )));
        }
        Ok(&self.effects[s][(a - 1) * self.d2 + (b - 1)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> UnitVector3 {
        loop {
            let v = [
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            ];
            if let Ok(u) = UnitVector3::normalized(v[0], v[1], v[2]) {
                if (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() > 0.1 {
                    return u;
                }
            }
        }
    }

    #[test]
    fn born_trivial_cases() {
        let rho = DensityOperator::new(ComplexMatrix::identity(2).scale_re(0.5)).unwrap();
        let id = Effect::new(ComplexMatrix::identity(2)).unwrap();
        assert!((born_probability(&rho, &id).unwrap() - 1.0).abs() < 1e-15);

        let zero_state = DensityOperator::from_pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let one_proj = spin_projector(&UnitVector3::z_axis(), -1).unwrap();
        assert!(born_probability(&zero_state, &one_proj).unwrap() < 1e-15);

        let bad = Effect::new(ComplexMatrix::identity(3)).unwrap();
        assert!(born_probability(&zero_state, &bad).is_err());
    }

    #[test]
    fn singlet_reproduces_correlation_formula() {
        let rho = singlet_state();
        assert!((rho.matrix().trace().unwrap().re - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            for &a in &[1i8, -1] {
                for &b in &[1i8, -1] {
                    let e = Effect::new(tensor_product(
                        spin_projector(&x, a).unwrap().matrix(),
                        spin_projector(&y, b).unwrap().matrix(),
                    ))
                    .unwrap();
                    let p = born_probability(&rho, &e).unwrap();
                    let expect = (1.0 - (a as f64) * (b as f64) * x.dot(&y)) / 4.0;
                    assert!((p - expect).abs() < 1e-13, "p={p} expect={expect}");
                }
            }
        }
    }

    #[test]
    fn singlet_perfect_anticorrelation_and_reduced_state() {
        let rho = singlet_state();
        let x = UnitVector3::from_spherical(1.0, 2.0);
        let e = Effect::new(tensor_product(
            spin_projector(&x, 1).unwrap().matrix(),
            spin_projector(&x, 1).unwrap().matrix(),
        ))
        .unwrap();
        assert!(born_probability(&rho, &e).unwrap() < 1e-13);

        for side in [Subsystem::First, Subsystem::Second] {
            let red = partial_trace(rho.matrix(), 2, 2, side).unwrap();
            let dev = red.sub(&ComplexMatrix::identity(2).scale_re(0.5)).unwrap().max_abs();
            assert!(dev < 1e-14);
        }
    }

    #[test]
    fn spin_projector_cases() {
        let p = spin_projector(&UnitVector3::z_axis(), 1).unwrap();
        assert!((p.matrix().get(0, 0).re - 1.0).abs() < 1e-15);
        assert!(p.matrix().get(1, 1).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            let sum = spin_projector(&x, 1)
                .unwrap()
                .matrix()
                .add(spin_projector(&x, -1).unwrap().matrix())
                .unwrap();
            assert!(sum.sub(&ComplexMatrix::identity(2)).unwrap().max_abs() < 1e-12);

            // tr[P(x,+)P(y,+)] = (1 + x·y)/2
            let overlap = spin_projector(&x, 1)
                .unwrap()
                .matrix()
                .mul(spin_projector(&y, 1).unwrap().matrix())
                .unwrap()
                .trace()
                .unwrap();
            assert!((overlap.re - (1.0 + x.dot(&y)) / 2.0).abs() < 1e-13);
            assert!(overlap.im.abs() < 1e-13);
        }

        assert!(spin_projector(&UnitVector3::z_axis(), 0).is_err());
    }

    #[test]
    fn density_and_effect_validation() {
        // Trace ≠ 1.
        assert!(DensityOperator::new(ComplexMatrix::identity(2)).is_err());
        // Negative eigenvalue.
        let m = ComplexMatrix::from_rows(vec![
            vec![c(1.5, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-0.5, 0.0)],
        ])
        .unwrap();
        let err = DensityOperator::new(m).unwrap_err();
        assert!(err.to_string().contains("witness eigenvalue"));
        // Effect above 1.
        assert!(Effect::new(ComplexMatrix::identity(2).scale_re(1.5)).is_err());
        // Non-Hermitian effect.
        let nh = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.3, 0.0)],
            vec![c(0.0, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(Effect::new(nh).is_err());
    }

    #[test]
    fn povm_family_completeness_enforced() {
        let x = UnitVector3::x_axis();
        let y = UnitVector3::z_axis();
        let fam = PovmFamily::from_projective_pairs(&[(x, y)]).unwrap();
        assert_eq!(fam.d1(), 2);
        assert_eq!(fam.dim(), 4);

        // Breaking one effect breaks completeness.
        let mut group = Vec::new();
        for &a in &[1i8, -1] {
            for &b in &[1i8, -1] {
                let m = tensor_product(
                    spin_projector(&x, a).unwrap().matrix(),
                    spin_projector(&y, b).unwrap().matrix(),
                );
                group.push(Effect::new(m.scale_re(if a == 1 { 0.9 } else { 1.0 })).unwrap());
            }
        }
        let bad = PovmFamily::new(2, 2, vec![("x0".into(), "y0".into())], vec![group]);
        assert!(bad.is_err());
    }

    #[test]
    fn povm_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rho = singlet_state();
        for _ in 0..20 {
            let x = random_unit(&mut rng);
            let y = random_unit(&mut rng);
            let fam = PovmFamily::from_projective_pairs(&[(x, y)]).unwrap();
            let mut total = 0.0;
            for a in 1..=2 {
                for b in 1..=2 {
                    total += born_probability(&rho, fam.effect(0, a, b).unwrap()).unwrap();
                }
            }
            assert!((total - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn qutrit_bases_and_entangled_state() {
        let rho = maximally_entangled_state(3).unwrap();
        assert_eq!(rho.dim(), 9);
        let bases = vec![ComplexMatrix::identity(3), fourier_matrix(3)];
        let fam = PovmFamily::from_local_bases(&bases, &bases).unwrap();
        assert_eq!(fam.d1(), 3);
        assert_eq!(fam.settings().len(), 4);
        let mut total = 0.0;
        for a in 1..=3 {
            for b in 1..=3 {
                total += born_probability(&rho, fam.effect(1, a, b).unwrap()).unwrap();
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn labels_with_separator_rejected() {
        let x = UnitVector3::x_axis();
        let y = UnitVector3::z_axis();
        let fam = PovmFamily::from_projective_pairs(&[(x, y)]).unwrap();
        let effects =
            vec![(0..4).map(|k| fam.effect(0, k / 2 + 1, k % 2 + 1).unwrap().clone()).collect()];
        let bad = PovmFamily::new(2, 2, vec![("a:b".into(), "y".into())], effects);
        assert!(bad.is_err());
    }
}
