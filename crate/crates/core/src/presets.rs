//! Generalised Kitaev chains, their multichannel version, quaternionic
//! doublings, and one verified representative for each symmetry class.
//!
//! Sign convention: the Kitaev chain with coefficients `c_n` has fiber
//! `H_k = [[0, z(k)], [z(k)*, 0]]` with `z(k) = Σ_n c_n e^{ink}`. Since
//! `H_k = Σ_j e^{−ijk} A_j`, coefficient `c_n` sits in the upper-right entry of
//! `A_{−n}` and in the lower-left entry of `A_n`. With this choice `c_1 = 1`
//! winds once counter-clockwise.

use std::collections::BTreeMap;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::linalg::{conj, direct_sum, identity, pauli_x, pauli_y, pauli_z, real_matrix};
use crate::model::HoppingModel;
use crate::symmetry::{verify_set, AzcClass, SymmetryOperator, SymmetrySet};
use crate::{CMatrix, Error, Result, Tolerances, C64};

/// Real Fourier coefficients `c_n` of `z(k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KitaevSpec {
    coefficients: BTreeMap<i64, f64>,
}

impl KitaevSpec {
    pub fn new(coefficients: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in coefficients {
            if !c.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "coefficient c_{n} is not finite"
                )));
            }
            if map.insert(n, c).is_some() {
                return Err(Error::InvalidModel(format!(
                    "coefficient c_{n} given twice"
                )));
            }
        }
        Ok(Self { coefficients: map })
    }

    /// Rejects coefficients with a nonzero imaginary part.
    pub fn from_complex(coefficients: impl IntoIterator<Item = (i64, C64)>) -> Result<Self> {
        let mut real = Vec::new();
        for (n, c) in coefficients {
            if c.im != 0.0 {
                return Err(Error::InvalidModel(format!(
                    "coefficient c_{n} = {c} is complex; the chain needs real c_n"
                )));
            }
            real.push((n, c.re));
        }
        Self::new(real)
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, f64> {
        &self.coefficients
    }

    /// `max |n|` over the stored coefficients.
    pub fn range(&self) -> usize {
        self.coefficients
            .keys()
            .map(|n| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `z(k) = Σ_n c_n e^{ink}`.
    pub fn z(&self, k: f64) -> C64 {
        self.coefficients
            .iter()
            .map(|(&n, &c)| C64::from_polar(c, n as f64 * k))
            .sum()
    }
}

/// Parses `n:c,n:c,…`, e.g. `0:0.5,1:1`.
impl FromStr for KitaevSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (n, c) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected n:c, got `{item}`")))?;
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad offset `{n}` in `{item}`")))?;
            let c = c.trim();
            let value: f64 = match c.parse() {
                Ok(v) => v,
                Err(_) if c.contains('i') => {
                    return Err(Error::InvalidModel(format!(
                        "coefficient c_{n} = {c} is complex; the chain needs real c_n"
                    )))
                }
                Err(_) => return Err(Error::Parse(format!("bad coefficient `{c}` in `{item}`"))),
            };
            pairs.push((n, value));
        }
        KitaevSpec::new(pairs)
    }
}

/// Real `m×m` Fourier coefficients `A_n` of `A_k = Σ_n A_n e^{ink}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSpec {
    channels: usize,
    coefficients: BTreeMap<i64, DMatrix<f64>>,
}

impl MultichannelSpec {
    pub fn new(
        channels: usize,
        coefficients: impl IntoIterator<Item = (i64, DMatrix<f64>)>,
    ) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidModel("channel count must be positive".into()));
        }
        let mut map = BTreeMap::new();
        for (n, a) in coefficients {
            if a.nrows() != channels || a.ncols() != channels {
                return Err(Error::InvalidModel(format!(
                    "A_{n} is {}x{}, expected {channels}x{channels}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!("A_{n} has non-finite entries")));
            }
            if map.insert(n, a).is_some() {
                return Err(Error::InvalidModel(format!("A_{n} given twice")));
            }
        }
        Ok(Self {
            channels,
            coefficients: map,
        })
    }

    /// Rejects matrices with nonzero imaginary parts.
    pub fn from_complex(
        channels: usize,
        coefficients: impl IntoIterator<Item = (i64, CMatrix)>,
    ) -> Result<Self> {
        let mut real = Vec::new();
        for (n, a) in coefficients {
            if a.iter().any(|z| z.im != 0.0) {
                return Err(Error::InvalidModel(format!(
                    "A_{n} has complex entries; the multichannel chain needs real matrices"
                )));
            }
            real.push((n, a.map(|z| z.re)));
        }
        Self::new(channels, real)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, DMatrix<f64>> {
        &self.coefficients
    }

    pub fn range(&self) -> usize {
        self.coefficients
            .keys()
            .map(|n| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `A_k = Σ_n A_n e^{ink}`.
    pub fn block(&self, k: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.channels, self.channels);
        for (&n, a) in &self.coefficients {
            let phase = C64::from_polar(1.0, n as f64 * k);
            out += a.map(|x| phase * x);
        }
        out
    }
}

/// Parses `n:a11,a12,…;n:…` with row-major entries; the channel count is the
/// square root of the entry count.
impl FromStr for MultichannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut channels = None;
        let mut coeffs = Vec::new();
        for item in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (n, entries) = item
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected n:entries, got `{item}`")))?;
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad offset `{n}` in `{item}`")))?;
            let values = entries
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("bad matrix entries in `{item}`")))?;
            let m = (values.len() as f64).sqrt().round() as usize;
            if m * m != values.len() || m == 0 {
                return Err(Error::Parse(format!(
                    "A_{n} has {} entries, which is not a square count",
                    values.len()
                )));
            }
            if *channels.get_or_insert(m) != m {
                return Err(Error::Parse(format!(
                    "A_{n} is {m}x{m}, earlier blocks differ"
                )));
            }
            coeffs.push((n, DMatrix::from_row_slice(m, m, &values)));
        }
        let channels =
            channels.ok_or_else(|| Error::Parse("no coefficient blocks given".into()))?;
        MultichannelSpec::new(channels, coeffs)
    }
}

fn bdi_set(sigma: CMatrix) -> Result<SymmetrySet> {
    let n = sigma.nrows();
    SymmetrySet::new(
        Some(SymmetryOperator::time_reversal(identity(n))?),
        Some(SymmetryOperator::particle_hole(sigma.clone())?),
        Some(SymmetryOperator::chiral(sigma)?),
    )
}

fn sigma3(m: usize) -> CMatrix {
    direct_sum(&identity(m), &(-identity(m)))
}

/// Two-band chain with `z(k) = Σ c_n e^{ink}` and the BDI operators
/// `𝔗 = 𝒦`, `𝔈 = σ₃𝒦`, `𝔖 = σ₃`.
pub fn kitaev_chain(spec: &KitaevSpec) -> Result<(HoppingModel, SymmetrySet)> {
    let complex: BTreeMap<i64, C64> = spec
        .coefficients()
        .iter()
        .map(|(&n, &c)| (n, C64::new(c, 0.0)))
        .collect();
    let model = chiral_two_band(&complex, spec.range())?;
    Ok((model, bdi_set(pauli_z())?))
}

fn chiral_two_band(coeffs: &BTreeMap<i64, C64>, range: usize) -> Result<HoppingModel> {
    let r = range as i64;
    let hoppings = (-r..=r).map(|j| {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = coeffs.get(&-j).copied().unwrap_or_default();
        a[(1, 0)] = coeffs.get(&j).copied().unwrap_or_default().conj();
        (j, a)
    });
    HoppingModel::new(2, range, hoppings)
}

/// Two-band chain with complex `c_n` and only the chiral operator `σ₃` (class AIII).
pub fn chiral_chain(coefficients: &BTreeMap<i64, C64>) -> Result<(HoppingModel, SymmetrySet)> {
    let range = coefficients
        .keys()
        .map(|n| n.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let model = chiral_two_band(coefficients, range)?;
    let set = SymmetrySet::new(None, None, Some(SymmetryOperator::chiral(pauli_z())?))?;
    Ok((model, set))
}

/// `H_k = [[0, A_k], [A_k†, 0]]` with `Σ₃ = diag(1_m, −1_m)` and the BDI
/// operators `𝒦`, `Σ₃𝒦`, `Σ₃`.
pub fn multichannel_kitaev(spec: &MultichannelSpec) -> Result<(HoppingModel, SymmetrySet)> {
    let m = spec.channels();
    let r = spec.range() as i64;
    let zero = DMatrix::<f64>::zeros(m, m);
    let hoppings = (-r..=r).map(|j| {
        let mut a = CMatrix::zeros(2 * m, 2 * m);
        let upper = spec.coefficients().get(&-j).unwrap_or(&zero);
        let lower = spec.coefficients().get(&j).unwrap_or(&zero).transpose();
        a.view_mut((0, m), (m, m))
            .copy_from(&upper.map(|x| C64::new(x, 0.0)));
        a.view_mut((m, 0), (m, m))
            .copy_from(&lower.map(|x| C64::new(x, 0.0)));
        (j, a)
    });
    let model = HoppingModel::new(2 * m, spec.range(), hoppings)?;
    Ok((model, bdi_set(sigma3(m))?))
}

/// Which operator of the base set is carried over to the doubled model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DoubleLift {
    /// Only the new time reversal; class AII.
    None,
    /// Base particle-hole `U𝒦` becomes `diag(U, conj U)𝒦`; a BDI base gives DIII.
    #[default]
    ParticleHole,
    /// Base chiral `U` becomes `diag(U, conj U)`; a BDI base gives CII.
    Chiral,
}

/// `H_tot(k) = diag(H(k), conj H(−k))` with `𝔗 = (J ⊗ 1)𝒦`, `J = [[0, −1], [1, 0]]`,
/// so that `𝔗² = −1`.
pub fn quaternionic_double(
    base: &HoppingModel,
    set: &SymmetrySet,
    lift: DoubleLift,
) -> Result<(HoppingModel, SymmetrySet)> {
    let tol = Tolerances::default();
    let gap = base.gap_at_zero(1024, &tol)?;
    if !gap.gapped {
        return Err(Error::Gapless {
            k: gap.k_at_min,
            energy: gap.min_abs_energy,
        });
    }
    let n = base.dim();
    let hoppings = base
        .hoppings()
        .iter()
        .map(|(&j, a)| (j, direct_sum(a, &conj(a))));
    let model = HoppingModel::new(2 * n, base.range(), hoppings)?;
    let mut j = CMatrix::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&(-identity(n)));
    j.view_mut((n, 0), (n, n)).copy_from(&identity(n));
    let t = SymmetryOperator::time_reversal(j)?;
    let lifted = |u: &CMatrix| direct_sum(u, &conj(u));
    let doubled = match lift {
        DoubleLift::None => SymmetrySet::new(Some(t), None, None)?,
        DoubleLift::ParticleHole => {
            let c = set.c().ok_or_else(|| {
                Error::Precondition("base set has no particle-hole operator".into())
            })?;
            SymmetrySet::new(
                Some(t),
                Some(SymmetryOperator::particle_hole(lifted(c.matrix()))?),
                None,
            )?
        }
        DoubleLift::Chiral => {
            let s = set
                .s()
                .ok_or_else(|| Error::Precondition("base set has no chiral operator".into()))?;
            SymmetrySet::new(
                Some(t),
                None,
                Some(SymmetryOperator::chiral(lifted(s.matrix()))?),
            )?
        }
    };
    verify_set(&model, &doubled, 128, &tol).map_err(|e| {
        Error::numerical(format!("doubled model fails its own symmetry check: {e}"))
    })?;
    Ok((model, doubled))
}

/// Adds `coef·cos(nk)·m` to the hoppings.
fn add_cos(h: &mut BTreeMap<i64, CMatrix>, n: i64, coef: f64, m: &CMatrix) {
    let dim = m.nrows();
    if n == 0 {
        *h.entry(0).or_insert_with(|| CMatrix::zeros(dim, dim)) += m * C64::new(coef, 0.0);
        return;
    }
    for j in [n, -n] {
        *h.entry(j).or_insert_with(|| CMatrix::zeros(dim, dim)) += m * C64::new(0.5 * coef, 0.0);
    }
}

/// Adds `coef·sin(nk)·m`; `sin(nk) = (e^{ink} − e^{−ink})/2i` and `e^{ink}`
/// multiplies `A_{−n}`.
fn add_sin(h: &mut BTreeMap<i64, CMatrix>, n: i64, coef: f64, m: &CMatrix) {
    let dim = m.nrows();
    *h.entry(-n).or_insert_with(|| CMatrix::zeros(dim, dim)) += m * C64::new(0.0, -0.5 * coef);
    *h.entry(n).or_insert_with(|| CMatrix::zeros(dim, dim)) += m * C64::new(0.0, 0.5 * coef);
}

fn from_terms(dim: usize, h: BTreeMap<i64, CMatrix>) -> Result<HoppingModel> {
    let range = h
        .keys()
        .map(|j| j.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    HoppingModel::new(dim, range, h)
}

fn real_symmetric_model() -> Result<HoppingModel> {
    let a0 = real_matrix(2, 2, &[1.0, 0.3, 0.3, -1.0]);
    let a1 = real_matrix(2, 2, &[0.2, 0.1, 0.4, -0.3]);
    HoppingModel::new(2, 1, [(0, a0), (1, a1)])
}

/// A gapped model whose verified symmetry set is exactly `class`.
///
/// | class | construction |
/// |-------|--------------|
/// | A | two bands with complex hoppings, no operators |
/// | AIII | complex chiral chain, `𝔖 = σ₃` |
/// | AI | real hoppings, `𝔗 = 𝒦` |
/// | BDI | Kitaev chain `c_1 = 1` |
/// | D | Kitaev chain plus `0.3 sin k · 1`, `𝔈 = σ₃𝒦` |
/// | DIII | double of the BDI chain lifting `𝔈` |
/// | AII | double of the AI model |
/// | CII | double of the BDI chain lifting `𝔖` |
/// | C | `d·σ + d₀` with even `d`, odd `d₀`, `𝔈 = iσ₂𝒦` |
/// | CI | `d_x σ_x + d_z σ_z` with even `d`, `𝔗 = 𝒦`, `𝔈 = iσ₂𝒦` |
pub fn representative(class: AzcClass) -> Result<(HoppingModel, SymmetrySet)> {
    let isigma2 = pauli_y() * C64::new(0.0, 1.0);
    match class {
        AzcClass::A => {
            let a0 = real_matrix(2, 2, &[1.0, 0.2, 0.2, -1.0]);
            let a1 =
                crate::linalg::cmatrix(&[&[(0.2, 0.1), (0.3, 0.0)], &[(0.0, 0.1), (-0.25, 0.0)]]);
            Ok((
                HoppingModel::new(2, 1, [(0, a0), (1, a1)])?,
                SymmetrySet::empty(),
            ))
        }
        AzcClass::AIII => {
            let coeffs = BTreeMap::from([
                (-1, C64::new(0.2, 0.1)),
                (0, C64::new(0.0, 0.3)),
                (1, C64::new(1.0, 0.0)),
            ]);
            chiral_chain(&coeffs)
        }
        AzcClass::AI => {
            let set = SymmetrySet::new(
                Some(SymmetryOperator::time_reversal(identity(2))?),
                None,
                None,
            )?;
            Ok((real_symmetric_model()?, set))
        }
        AzcClass::BDI => kitaev_chain(&"1:1".parse()?),
        AzcClass::D => {
            let (base, _) = kitaev_chain(&"1:1".parse()?)?;
            let mut h = base.hoppings().clone();
            add_sin(&mut h, 1, 0.3, &identity(2));
            let set = SymmetrySet::new(
                None,
                Some(SymmetryOperator::particle_hole(pauli_z())?),
                None,
            )?;
            Ok((from_terms(2, h)?, set))
        }
        AzcClass::DIII | AzcClass::CII => {
            let (base, set) = kitaev_chain(&"1:1".parse()?)?;
            let lift = if class == AzcClass::DIII {
                DoubleLift::ParticleHole
            } else {
                DoubleLift::Chiral
            };
            quaternionic_double(&base, &set, lift)
        }
        AzcClass::AII => {
            let base = real_symmetric_model()?;
            quaternionic_double(&base, &SymmetrySet::empty(), DoubleLift::None)
        }
        AzcClass::C => {
            let mut h = BTreeMap::new();
            add_cos(&mut h, 0, 0.5, &pauli_x());
            add_cos(&mut h, 1, 1.0, &pauli_x());
            add_cos(&mut h, 2, 0.7, &pauli_y());
            add_cos(&mut h, 1, 0.3, &pauli_z());
            add_sin(&mut h, 1, 0.2, &identity(2));
            let set =
                SymmetrySet::new(None, Some(SymmetryOperator::particle_hole(isigma2)?), None)?;
            Ok((from_terms(2, h)?, set))
        }
        AzcClass::CI => {
            let mut h = BTreeMap::new();
            add_cos(&mut h, 0, 1.0, &pauli_x());
            add_cos(&mut h, 1, 0.5, &pauli_x());
            add_cos(&mut h, 2, 0.3, &pauli_z());
            let set = SymmetrySet::new(
                Some(SymmetryOperator::time_reversal(identity(2))?),
                Some(SymmetryOperator::particle_hole(isigma2)?),
                None,
            )?;
            Ok((from_terms(2, h)?, set))
        }
    }
}
