use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every check in the crate.
///
/// Relative tolerances are scaled by `max(1, ‖H‖)` at the point of use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity of hopping input (`A_{-j} = A_j†`).
    pub herm: f64,
    /// Eigen-residual, relative.
    pub eig: f64,
    /// Idempotence / self-adjointness of projectors, unitarity of operators.
    pub proj: f64,
    /// Smallest |E| that still counts as gapped.
    pub gap: f64,
    /// Operator relations `O H_k O⁻¹ = ε_E H_{ε_k k}`, relative.
    pub sym: f64,
    /// Unitarity of transport matrices and holonomy log reconstruction.
    pub unit: f64,
    /// Intertwining `P_k 𝒯_k = 𝒯_k P_0` and `[X, P_0] = 0`.
    pub intw: f64,
    /// Trace formula vs. Wilson-loop evaluation of the Zak phase.
    pub zak: f64,
    /// Rounding residual for integer-valued quantities.
    pub int: f64,
    /// Closure of sampled loops.
    pub r#loop: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            eig: 1e-8,
            proj: 1e-8,
            gap: 1e-8,
            sym: 1e-8,
            unit: 1e-8,
            intw: 1e-6,
            zak: 1e-5,
            int: 1e-3,
            r#loop: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn eig_scaled(&self, norm: f64) -> f64 {
        self.eig * norm.max(1.0)
    }

    pub fn sym_scaled(&self, norm: f64) -> f64 {
        self.sym * norm.max(1.0)
    }
}
