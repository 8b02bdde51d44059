//! Zak phases of the transport frame, Wilson-loop cross-checks and gauge shifts.

use std::f64::consts::PI;
use std::ops::Range;

use serde::Serialize;

use super::winding::{round_integer, winding_unitary};
use crate::symmetry::{Sign, SymmetryOperator};
use crate::transport::TransportResult;
use crate::{CMatrix, Error, Result, C64};

/// A Zak phase evaluated by the trace formula and by a discrete Wilson loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZakEvaluation {
    pub value: f64,
    pub wilson: f64,
    pub discrepancy: f64,
}

/// `(1/2π) Σ_i arg det(V_i† V_{i+1})` over the columns `cols` of the frames
/// `V_0, …, V_M`, each step taken on the principal branch.
pub fn wilson_loop(frames: &[CMatrix], cols: Range<usize>) -> f64 {
    if cols.is_empty() {
        return 0.0;
    }
    let width = cols.end - cols.start;
    frames
        .windows(2)
        .map(|pair| {
            let a = pair[0].columns(cols.start, width);
            let b = pair[1].columns(cols.start, width);
            (a.adjoint() * b).determinant().arg()
        })
        .sum::<f64>()
        / (2.0 * PI)
}

/// The Bloch frames `W_0, …, W_M` of the transport result.
pub fn frames(tr: &TransportResult) -> Vec<CMatrix> {
    (0..=tr.steps()).map(|i| tr.frame(i)).collect()
}

/// `−tr(X)/2π` over all bands; must be an integer and agree with the Wilson loop.
pub fn zak_phase_total(tr: &TransportResult) -> Result<ZakEvaluation> {
    zak_phase_total_with(tr, &frames(tr))
}

pub fn zak_phase_total_with(tr: &TransportResult, frames: &[CMatrix]) -> Result<ZakEvaluation> {
    let tol = tr.tolerances();
    let value = -tr.log_x().trace().re / (2.0 * PI);
    let wilson = wilson_loop(frames, 0..tr.dim());
    let discrepancy = (value - wilson).abs();
    if discrepancy > tol.zak {
        return Err(Error::numerical(format!(
            "total Zak phase: trace formula {value:.9} vs Wilson loop {wilson:.9}"
        )));
    }
    round_integer(value, tol.int)?;
    Ok(ZakEvaluation {
        value,
        wilson,
        discrepancy,
    })
}

/// `−tr(P_0 X P_0)/2π`, valid because `X` commutes with `P_0`.
pub fn zak_phase_occupied(tr: &TransportResult) -> Result<ZakEvaluation> {
    zak_phase_occupied_with(tr, &frames(tr))
}

pub fn zak_phase_occupied_with(tr: &TransportResult, frames: &[CMatrix]) -> Result<ZakEvaluation> {
    let tol = tr.tolerances();
    let p0 = tr.initial_projector();
    let x = tr.log_x();
    let comm = (x * &p0 - &p0 * x).norm();
    if comm > tol.intw {
        return Err(Error::Precondition(format!(
            "holonomy logarithm does not commute with P_0 (‖[X, P_0]‖ = {comm:.3e})"
        )));
    }
    let value = -(&p0 * x * &p0).trace().re / (2.0 * PI);
    let wilson = wilson_loop(frames, 0..tr.occupied());
    let discrepancy = (value - wilson).abs();
    if discrepancy > tol.zak {
        return Err(Error::numerical(format!(
            "occupied Zak phase: trace formula {value:.9} vs Wilson loop {wilson:.9}"
        )));
    }
    Ok(ZakEvaluation {
        value,
        wilson,
        discrepancy,
    })
}

/// Winding of `det W_k` for the transport frame; equals the total Zak phase.
pub fn frame_winding(tr: &TransportResult, frames: &[CMatrix]) -> Result<i64> {
    let mut loop_: Vec<CMatrix> = frames.to_vec();
    // W_{2π} equals W_0 up to the logarithm reconstruction error.
    if let Some(last) = loop_.last_mut() {
        *last = frames[0].clone();
    }
    winding_unitary(&loop_, tr.tolerances())
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeShiftReport {
    pub zak_before: f64,
    pub zak_after: f64,
    pub shift: f64,
    pub winding: i64,
    pub residual: f64,
    /// `Some` when an operator was supplied: whether `B` respects it.
    pub compatible: Option<bool>,
    pub compatibility_deviation: Option<f64>,
    pub passed: bool,
}

/// Applies the gauge `B_k` (sampled on the transport grid) to the frame,
/// `u_j(k) = B_k v_j(k)`, and compares the change of the total Wilson-loop Zak
/// phase with the winding of `det B`.
///
/// When `op` is a symmetry that flips the energy and `B` is compatible with it
/// (`𝔒 B_k 𝔒⁻¹ = B_{ε_k k}`), the winding must be even.
pub fn gauge_shift_check(
    tr: &TransportResult,
    gauge: &[CMatrix],
    op: Option<&SymmetryOperator>,
) -> Result<GaugeShiftReport> {
    let tol = tr.tolerances();
    let m = tr.steps();
    if gauge.len() != m + 1 {
        return Err(Error::Precondition(format!(
            "gauge has {} samples, the transport grid has {}",
            gauge.len(),
            m + 1
        )));
    }
    let model = tr.model();
    for (i, (&k, b)) in tr.grid().iter().zip(gauge).enumerate() {
        if b.nrows() != tr.dim() || b.ncols() != tr.dim() {
            return Err(Error::DimensionMismatch {
                expected: tr.dim(),
                found: b.nrows(),
            });
        }
        if i % 16 == 0 || i == m {
            let p = model.occupied_projector(k, tol)?;
            let comm = (b * &p - &p * b).norm();
            if comm > tol.intw {
                return Err(Error::Precondition(format!(
                    "gauge is not block-diagonal at k = {k:.6} (‖[B, P]‖ = {comm:.3e})"
                )));
            }
        }
    }
    let before = frames(tr);
    let after: Vec<CMatrix> = before.iter().zip(gauge).map(|(w, b)| b * w).collect();
    let zak_before = wilson_loop(&before, 0..tr.dim());
    let zak_after = wilson_loop(&after, 0..tr.dim());
    let shift = zak_after - zak_before;
    let winding = winding_unitary(gauge, tol)?;
    let residual = (shift - winding as f64).abs();

    let (compatible, compatibility_deviation) = match op {
        None => (None, None),
        Some(op) => {
            let dev = (0..=m)
                .map(|i| {
                    let target = if op.antiunitary() {
                        &gauge[m - i]
                    } else {
                        &gauge[i]
                    };
                    (op.conjugate(&gauge[i]) - target).norm()
                })
                .fold(0.0, f64::max);
            (Some(dev <= tol.intw), Some(dev))
        }
    };
    let needs_even =
        matches!(op, Some(o) if o.energy_sign() == Sign::Minus) && compatible == Some(true);
    if needs_even && winding % 2 != 0 {
        return Err(Error::InvariantViolation(format!(
            "symmetry-compatible gauge has odd winding {winding}"
        )));
    }
    Ok(GaugeShiftReport {
        zak_before,
        zak_after,
        shift,
        winding,
        residual,
        compatible,
        compatibility_deviation,
        passed: residual < tol.int,
    })
}

/// The gauge `B_k = W_k diag(e^{i n_j k}) W_k†` on the transport grid, which
/// multiplies frame vector `j` by `e^{i n_j k}`.
pub fn diagonal_gauge(tr: &TransportResult, exponents: &[i64]) -> Result<Vec<CMatrix>> {
    if exponents.len() != tr.dim() {
        return Err(Error::DimensionMismatch {
            expected: tr.dim(),
            found: exponents.len(),
        });
    }
    Ok((0..=tr.steps())
        .map(|i| {
            let k = tr.grid()[i];
            let w = tr.frame(i);
            let mut scaled = w.clone();
            for (j, &n) in exponents.iter().enumerate() {
                let phase = C64::from_polar(1.0, n as f64 * k);
                for z in scaled.column_mut(j).iter_mut() {
                    *z *= phase;
                }
            }
            scaled * w.adjoint()
        })
        .collect())
}
