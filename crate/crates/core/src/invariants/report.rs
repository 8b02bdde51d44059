use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::model::GapReport;
use crate::symmetry::{AzcClass, KGroup, SymmetryLabel, VerificationReport};
use crate::transport::{SymmetricBasisReport, TransportReport};
use crate::Tolerances;

/// Value of the ℤ₂ invariant, or a marker for classes where it is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Z2 {
    Zero,
    One,
    NotApplicable,
}

impl Z2 {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Z2::Zero => Some(0),
            Z2::One => Some(1),
            Z2::NotApplicable => None,
        }
    }

    pub fn from_parity(n: i64) -> Self {
        if n.rem_euclid(2) == 0 {
            Z2::Zero
        } else {
            Z2::One
        }
    }
}

impl fmt::Display for Z2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Z2::Zero => "0",
            Z2::One => "1",
            Z2::NotApplicable => "n/a",
        })
    }
}

impl Serialize for Z2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_int() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str("not-applicable"),
        }
    }
}

/// Grid sizes and tolerances for [`super::analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Transport steps M.
    pub steps: usize,
    pub gap_grid: usize,
    pub symmetry_grid: usize,
    /// Grid points for the symmetric-frame checks; 0 skips them.
    pub basis_grid: usize,
    pub tolerances: Tolerances,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            steps: 2048,
            gap_grid: 1024,
            symmetry_grid: 256,
            basis_grid: 64,
            tolerances: Tolerances::default(),
        }
    }
}

/// Where an oracle winding number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    /// Scalar off-diagonal block: sampling and root counting agree.
    RootCounting,
    /// Matrix off-diagonal block: det loop and polar-factor loop agree.
    Determinant,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub zak_total_wilson: f64,
    pub zak_total_discrepancy: f64,
    pub zak_occupied_wilson: f64,
    pub zak_occupied_discrepancy: f64,
    /// Distance of `2·zak_occupied` from the nearest integer.
    pub z2_residual: f64,
    pub oracle_method: Option<OracleMethod>,
    pub transport: TransportReport,
    pub symmetric_basis: Option<SymmetricBasisReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub azc_class: AzcClass,
    pub k_theory_1d: KGroup,
    pub invariant_support: KGroup,
    pub quaternionic: bool,
    pub quaternionic_witness: Option<SymmetryLabel>,
    pub gap: GapReport,
    pub zak_total: f64,
    pub zak_occupied: f64,
    pub z2: Z2,
    /// Winding of the off-diagonal block of a chiral model, when it has one.
    pub oracle_winding: Option<i64>,
    pub parity_consistent: Option<bool>,
    /// Winding of `det W_k` for the transport frame.
    pub frame_winding: i64,
    pub symmetries: Vec<VerificationReport>,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
    pub config: AnalysisConfig,
}
