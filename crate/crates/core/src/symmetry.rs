//! Time-reversal, particle-hole and chiral operators, their algebra, and the
//! tenfold-way classification in one dimension.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::linalg::{conj, identity, unitarity_defect};
use crate::model::HoppingModel;
use crate::{CMatrix, CVector, Error, Result, Tolerances, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SymmetryLabel {
    T,
    C,
    S,
    TC,
    TS,
    CS,
    TCS,
    Custom,
}

impl SymmetryLabel {
    /// Letter content as `(T, C, S)` flags; `None` for custom operators.
    fn letters(self) -> Option<[bool; 3]> {
        use SymmetryLabel::*;
        Some(match self {
            T => [true, false, false],
            C => [false, true, false],
            S => [false, false, true],
            TC => [true, true, false],
            TS => [true, false, true],
            CS => [false, true, true],
            TCS => [true, true, true],
            Custom => return None,
        })
    }

    fn from_letters(l: [bool; 3]) -> Self {
        use SymmetryLabel::*;
        match l {
            [true, false, false] => T,
            [false, true, false] => C,
            [false, false, true] => S,
            [true, true, false] => TC,
            [true, false, true] => TS,
            [false, true, true] => CS,
            [true, true, true] => TCS,
            [false, false, false] => Custom,
        }
    }
}

impl fmt::Display for SymmetryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// A unitary or antiunitary operator `𝔒`, stored as its linear part `U`
/// (with `𝔒 = U𝒦` when antiunitary), and the contract
/// `𝔒 H_k 𝔒⁻¹ = ε_E H_{ε_k k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOperator {
    label: SymmetryLabel,
    matrix: CMatrix,
    antiunitary: bool,
    energy_sign: Sign,
}

impl SymmetryOperator {
    /// Validates unitarity and, for the labels T, C and S, the conjugation flag
    /// and energy sign those labels imply.
    pub fn new(
        label: SymmetryLabel,
        matrix: CMatrix,
        antiunitary: bool,
        energy_sign: Sign,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidSymmetry {
            label: label.to_string(),
            reason,
        };
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(invalid(format!(
                "matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if !(defect <= Tolerances::default().proj) {
            return Err(invalid(format!(
                "matrix is not unitary (‖U†U − 1‖ = {defect:.3e})"
            )));
        }
        let expected = match label {
            SymmetryLabel::T => Some((true, Sign::Plus)),
            SymmetryLabel::C => Some((true, Sign::Minus)),
            SymmetryLabel::S => Some((false, Sign::Minus)),
            _ => None,
        };
        if let Some((anti, sign)) = expected {
            if anti != antiunitary {
                return Err(invalid(format!(
                    "must be {}",
                    if anti { "antiunitary" } else { "unitary" }
                )));
            }
            if sign != energy_sign {
                return Err(invalid(format!("energy sign must be {sign}")));
            }
        }
        Ok(Self {
            label,
            matrix,
            antiunitary,
            energy_sign,
        })
    }

    /// `𝔗 = U𝒦`, commuting with `H` and flipping `k`.
    pub fn time_reversal(u: CMatrix) -> Result<Self> {
        Self::new(SymmetryLabel::T, u, true, Sign::Plus)
    }

    /// `𝔈 = U𝒦`, anticommuting with `H` and flipping `k`.
    pub fn particle_hole(u: CMatrix) -> Result<Self> {
        Self::new(SymmetryLabel::C, u, true, Sign::Minus)
    }

    /// `𝔖 = U`, anticommuting with `H` at fixed `k`.
    pub fn chiral(u: CMatrix) -> Result<Self> {
        Self::new(SymmetryLabel::S, u, false, Sign::Minus)
    }

    pub fn label(&self) -> SymmetryLabel {
        self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn antiunitary(&self) -> bool {
        self.antiunitary
    }

    pub fn energy_sign(&self) -> Sign {
        self.energy_sign
    }

    /// −1 exactly for antiunitary operators.
    pub fn momentum_sign(&self) -> Sign {
        if self.antiunitary {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `𝔒 M 𝔒⁻¹`, i.e. `U M U†` or `U conj(M) U†`.
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        if self.antiunitary {
            &self.matrix * conj(m) * self.matrix.adjoint()
        } else {
            &self.matrix * m * self.matrix.adjoint()
        }
    }

    /// `𝔒 M` as an (anti)linear map composed with `M`: `U M` or `U conj(M)`.
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        if self.antiunitary {
            &self.matrix * conj(m)
        } else {
            &self.matrix * m
        }
    }

    pub fn apply_vector(&self, v: &CVector) -> CVector {
        if self.antiunitary {
            &self.matrix * v.map(|z| z.conj())
        } else {
            &self.matrix * v
        }
    }

    /// Square of the operator as a linear matrix: `U conj(U)` or `U²`.
    pub fn square_matrix(&self) -> CMatrix {
        if self.antiunitary {
            &self.matrix * conj(&self.matrix)
        } else {
            &self.matrix * &self.matrix
        }
    }

    /// The sign `s` with `𝔒² = s·1`.
    pub fn square_sign(&self, tol: f64) -> Result<Sign> {
        let sq = self.square_matrix();
        let id = identity(self.dim());
        let plus = (&sq - &id).norm();
        let minus = (&sq + &id).norm();
        if plus <= tol {
            Ok(Sign::Plus)
        } else if minus <= tol {
            Ok(Sign::Minus)
        } else {
            Err(Error::NotInvolution {
                label: self.label.to_string(),
                deviation: plus.min(minus),
            })
        }
    }

    /// Multiplies the linear part by a unit scalar.
    pub fn scaled(&self, phase: C64) -> Self {
        Self {
            matrix: &self.matrix * phase,
            ..self.clone()
        }
    }

    pub(crate) fn relabeled(mut self, label: SymmetryLabel) -> Self {
        self.label = label;
        self
    }
}

/// `a ∘ b`. Conjugation flags combine by XOR, signs multiply, and an antiunitary
/// `a` conjugates the linear part of `b`.
pub fn compose(a: &SymmetryOperator, b: &SymmetryOperator) -> Result<SymmetryOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let matrix = a.apply(&b.matrix);
    let label = match (a.label.letters(), b.label.letters()) {
        (Some(x), Some(y)) if (0..3).all(|i| !(x[i] && y[i])) => {
            SymmetryLabel::from_letters([x[0] | y[0], x[1] | y[1], x[2] | y[2]])
        }
        _ => SymmetryLabel::Custom,
    };
    Ok(SymmetryOperator {
        label,
        matrix,
        antiunitary: a.antiunitary ^ b.antiunitary,
        energy_sign: a.energy_sign.times(b.energy_sign),
    })
}

/// Declared symmetries plus the ones they imply.
///
/// Whenever two of T, C, S are known the third is derived as their product. The
/// chiral operator is normalised so that `S² = +1`.
#[derive(Debug, Clone, Default)]
pub struct SymmetrySet {
    t: Option<SymmetryOperator>,
    c: Option<SymmetryOperator>,
    s: Option<SymmetryOperator>,
    declared: Vec<SymmetryLabel>,
    eta: Option<C64>,
}

impl SymmetrySet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(
        t: Option<SymmetryOperator>,
        c: Option<SymmetryOperator>,
        s: Option<SymmetryOperator>,
    ) -> Result<Self> {
        let tol = Tolerances::default().proj;
        let mut declared = Vec::new();
        for (op, label) in [
            (&t, SymmetryLabel::T),
            (&c, SymmetryLabel::C),
            (&s, SymmetryLabel::S),
        ] {
            if let Some(op) = op {
                if op.label() != label {
                    return Err(Error::InconsistentSymmetries(format!(
                        "operator in the {label} slot is labelled {}",
                        op.label()
                    )));
                }
                declared.push(label);
            }
        }
        let dims: Vec<usize> = [&t, &c, &s]
            .iter()
            .filter_map(|o| o.as_ref().map(|o| o.dim()))
            .collect();
        if let Some(&d) = dims.first() {
            if let Some(&other) = dims.iter().find(|&&x| x != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: other,
                });
            }
        }
        for op in [&t, &c].into_iter().flatten() {
            op.square_sign(tol)?;
        }

        let mut eta = None;
        let (t, c, s) = match (t, c, s) {
            (Some(t), Some(c), s) => {
                let tc = compose(&t, &c)?;
                let s = match s {
                    Some(s) => {
                        let phase = [
                            C64::new(1.0, 0.0),
                            C64::new(-1.0, 0.0),
                            C64::new(0.0, 1.0),
                            C64::new(0.0, -1.0),
                        ]
                        .into_iter()
                        .find(|&p| (s.matrix() - tc.matrix() * p).norm() <= tol)
                        .ok_or_else(|| {
                            Error::InconsistentSymmetries("declared S is not ±TC or ±iTC".into())
                        })?;
                        eta = Some(phase);
                        s
                    }
                    None => tc.relabeled(SymmetryLabel::S),
                };
                (Some(t), Some(c), Some(s))
            }
            (Some(t), None, Some(s)) => {
                let c = compose(&t, &s)?.relabeled(SymmetryLabel::C);
                c.square_sign(tol)?;
                (Some(t), Some(c), Some(s))
            }
            (None, Some(c), Some(s)) => {
                let t = compose(&c, &s)?.relabeled(SymmetryLabel::T);
                t.square_sign(tol)?;
                (Some(t), Some(c), Some(s))
            }
            other => other,
        };
        let s = match s {
            Some(s) => Some(match s.square_sign(tol)? {
                Sign::Plus => s,
                Sign::Minus => s.scaled(C64::new(0.0, 1.0)),
            }),
            None => None,
        };
        Ok(Self {
            t,
            c,
            s,
            declared,
            eta,
        })
    }

    pub fn t(&self) -> Option<&SymmetryOperator> {
        self.t.as_ref()
    }

    pub fn c(&self) -> Option<&SymmetryOperator> {
        self.c.as_ref()
    }

    pub fn s(&self) -> Option<&SymmetryOperator> {
        self.s.as_ref()
    }

    /// Labels given by the caller, as opposed to derived ones.
    pub fn declared(&self) -> &[SymmetryLabel] {
        &self.declared
    }

    /// The phase `η` with `S = η·TC` when all three were declared.
    pub fn eta(&self) -> Option<C64> {
        self.eta
    }

    pub fn dim(&self) -> Option<usize> {
        self.operators().first().map(|o| o.dim())
    }

    /// T, C, S when present.
    pub fn operators(&self) -> Vec<&SymmetryOperator> {
        [&self.t, &self.c, &self.s].into_iter().flatten().collect()
    }

    /// Present operators plus the composites `TS` and `CS`.
    pub fn with_composites(&self) -> Vec<SymmetryOperator> {
        let mut out: Vec<SymmetryOperator> = self.operators().into_iter().cloned().collect();
        if let Some(s) = &self.s {
            for op in [&self.t, &self.c].into_iter().flatten() {
                if let Ok(x) = compose(op, s) {
                    out.push(x);
                }
            }
        }
        out
    }

    pub fn has_energy_flip(&self) -> bool {
        self.c.is_some() || self.s.is_some()
    }

    pub fn classify(&self) -> Result<AzcClass> {
        classify(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KGroup {
    #[serde(rename = "0")]
    Trivial,
    Z,
    Z2,
}

impl fmt::Display for KGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KGroup::Trivial => "0",
            KGroup::Z => "Z",
            KGroup::Z2 => "Z2",
        })
    }
}

/// The ten Altland–Zirnbauer–Cartan classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AzcClass {
    A,
    AIII,
    AI,
    BDI,
    D,
    DIII,
    AII,
    CII,
    C,
    CI,
}

impl AzcClass {
    pub const ALL: [AzcClass; 10] = [
        AzcClass::A,
        AzcClass::AIII,
        AzcClass::AI,
        AzcClass::BDI,
        AzcClass::D,
        AzcClass::DIII,
        AzcClass::AII,
        AzcClass::CII,
        AzcClass::C,
        AzcClass::CI,
    ];

    /// `(T², C², S present)` with `None` for an absent operator.
    pub fn signature(self) -> (Option<Sign>, Option<Sign>, bool) {
        use AzcClass::*;
        use Sign::*;
        match self {
            A => (None, None, false),
            AIII => (None, None, true),
            AI => (Some(Plus), None, false),
            BDI => (Some(Plus), Some(Plus), true),
            D => (None, Some(Plus), false),
            DIII => (Some(Minus), Some(Plus), true),
            AII => (Some(Minus), None, false),
            CII => (Some(Minus), Some(Minus), true),
            C => (None, Some(Minus), false),
            CI => (Some(Plus), Some(Minus), true),
        }
    }

    pub fn from_signature(t: Option<Sign>, c: Option<Sign>, s: bool) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.signature() == (t, c, s))
    }

    pub fn k_theory_1d(self) -> KGroup {
        use AzcClass::*;
        match self {
            A | AI | AII | C | CI => KGroup::Trivial,
            AIII | BDI | CII => KGroup::Z,
            D | DIII => KGroup::Z2,
        }
    }

    /// Group in which the Zak-phase invariant can take values.
    pub fn invariant_support(self) -> KGroup {
        match self {
            AzcClass::AIII | AzcClass::BDI | AzcClass::D => KGroup::Z2,
            _ => KGroup::Trivial,
        }
    }

    /// Classes without any symmetry that flips the sign of the energy.
    pub fn invariant_defined(self) -> bool {
        !matches!(self, AzcClass::A | AzcClass::AI | AzcClass::AII)
    }
}

impl fmt::Display for AzcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for AzcClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown symmetry class {s:?}")))
    }
}

pub fn classify(set: &SymmetrySet) -> Result<AzcClass> {
    let tol = Tolerances::default().proj;
    let t = set.t().map(|o| o.square_sign(tol)).transpose()?;
    let c = set.c().map(|o| o.square_sign(tol)).transpose()?;
    let s = set.s().is_some();
    AzcClass::from_signature(t, c, s).ok_or_else(|| {
        Error::InconsistentSymmetries(format!(
            "no class has T² = {}, C² = {}, S {}",
            t.map_or("absent".into(), |x| x.to_string()),
            c.map_or("absent".into(), |x| x.to_string()),
            if s { "present" } else { "absent" }
        ))
    })
}

/// Antiunitary member of the set (declared or composite) squaring to −1.
pub fn detect_quaternionic(set: &SymmetrySet) -> Option<SymmetryOperator> {
    let tol = Tolerances::default().proj;
    set.with_composites()
        .into_iter()
        .filter(|o| o.antiunitary())
        .find(|o| matches!(o.square_sign(tol), Ok(Sign::Minus)))
}

/// Outcome of a grid check of an operator relation.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub label: SymmetryLabel,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub worst_k: f64,
    pub grid_points: usize,
    pub passed: bool,
}

impl VerificationReport {
    pub(crate) fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::SymmetryViolation {
                label: self.label.to_string(),
                deviation: self.max_deviation,
                at: format!(" at k = {:.6}", self.worst_k),
            })
        }
    }
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    let h = 2.0 * PI / points.max(1) as f64;
    (0..points).map(move |i| i as f64 * h)
}

fn check_dim(model: &HoppingModel, op: &SymmetryOperator) -> Result<()> {
    if op.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

/// Checks `𝔒 H_k 𝔒⁻¹ = ε_E H_{ε_k k}` on a uniform grid.
pub fn verify_symmetry(
    model: &HoppingModel,
    op: &SymmetryOperator,
    grid_points: usize,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_dim(model, op)?;
    let eps_e = op.energy_sign().value();
    let eps_k = op.momentum_sign().value();
    let mut worst = (0.0, 0.0);
    for k in grid(grid_points) {
        let lhs = op.conjugate(&model.fiber_hamiltonian(k));
        let rhs = model.fiber_hamiltonian(eps_k * k) * C64::new(eps_e, 0.0);
        let dev = (lhs - rhs).norm();
        if dev > worst.0 || dev.is_nan() {
            worst = (dev, k);
        }
    }
    let tolerance = tol.sym_scaled(model.norm_bound());
    Ok(VerificationReport {
        label: op.label(),
        max_deviation: worst.0,
        tolerance,
        worst_k: worst.1,
        grid_points,
        passed: worst.0 <= tolerance,
    })
}

/// Checks `𝔒 P_k 𝔒⁻¹ = P_{ε_k k}` (ε_E = +1) or `1 − P_{ε_k k}` (ε_E = −1).
pub fn verify_projector_relations(
    model: &HoppingModel,
    op: &SymmetryOperator,
    grid_points: usize,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_dim(model, op)?;
    let eps_k = op.momentum_sign().value();
    let id = identity(model.dim());
    let mut worst = (0.0, 0.0);
    for k in grid(grid_points) {
        let lhs = op.conjugate(&model.occupied_projector(k, tol)?);
        let target = model.occupied_projector(eps_k * k, tol)?;
        let rhs = match op.energy_sign() {
            Sign::Plus => target,
            Sign::Minus => &id - target,
        };
        let dev = (lhs - rhs).norm();
        if dev > worst.0 || dev.is_nan() {
            worst = (dev, k);
        }
    }
    Ok(VerificationReport {
        label: op.label(),
        max_deviation: worst.0,
        tolerance: tol.sym,
        worst_k: worst.1,
        grid_points,
        passed: worst.0 <= tol.sym,
    })
}

/// Verifies every present operator (and the composites) against the model,
/// failing on the first violation.
pub fn verify_set(
    model: &HoppingModel,
    set: &SymmetrySet,
    grid_points: usize,
    tol: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    set.with_composites()
        .iter()
        .map(|op| verify_symmetry(model, op, grid_points, tol)?.into_result())
        .collect()
}

/// Consequences of `𝔒 U 𝔒⁻¹ = U` for an antiunitary `𝔒` with `𝔒² = −1`.
#[derive(Debug, Clone, Serialize)]
pub struct QuaternionicReport {
    pub det: (f64, f64),
    pub det_deviation: f64,
    /// Largest distance between an eigenvalue and the conjugate of its partner.
    pub pairing_deviation: f64,
    pub passed: bool,
}

pub fn quaternionic_det_check(
    u: &CMatrix,
    op: &SymmetryOperator,
    tol: &Tolerances,
) -> Result<QuaternionicReport> {
    if !op.antiunitary() || op.square_sign(tol.proj)? != Sign::Minus {
        return Err(Error::InvalidSymmetry {
            label: op.label().to_string(),
            reason: "a quaternionic structure must be antiunitary with square −1".into(),
        });
    }
    if u.nrows() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: u.nrows(),
        });
    }
    let defect = unitarity_defect(u);
    if defect > tol.unit {
        return Err(Error::Precondition(format!(
            "matrix is not unitary (defect {defect:.3e})"
        )));
    }
    let comm = (op.conjugate(u) - u).norm();
    if comm > tol.sym_scaled(u.norm()) {
        return Err(Error::Precondition(format!(
            "operator does not commute with the unitary (‖𝔒U𝔒⁻¹ − U‖ = {comm:.3e})"
        )));
    }
    let det = u.determinant();
    let det_deviation = (det - C64::new(1.0, 0.0)).norm();
    let (values, _) = crate::linalg::unitary_eigen(u)?;
    let n = values.len();
    let mut matched = vec![false; n];
    let mut pairing_deviation: f64 = 0.0;
    for i in 0..n {
        if matched[i] {
            continue;
        }
        matched[i] = true;
        let target = values[i].conj();
        let partner = (0..n).filter(|&j| !matched[j]).min_by(|&a, &b| {
            (values[a] - target)
                .norm()
                .total_cmp(&(values[b] - target).norm())
        });
        match partner {
            Some(j) => {
                matched[j] = true;
                pairing_deviation = pairing_deviation.max((values[j] - target).norm());
            }
            None => pairing_deviation = f64::INFINITY,
        }
    }
    Ok(QuaternionicReport {
        det: (det.re, det.im),
        det_deviation,
        pairing_deviation,
        passed: det_deviation <= tol.int && pairing_deviation <= tol.int,
    })
}
