//! Zak phases, the ℤ₂ invariant, winding numbers, and the full analysis pipeline.

mod report;
pub mod winding;
pub mod zak;

use std::collections::BTreeMap;

pub use report::{AnalysisConfig, Diagnostics, InvariantReport, OracleMethod, Z2};
pub use winding::{
    kitaev_winding, laurent_winding_roots, laurent_winding_sampled, multichannel_winding,
    winding_of_function, winding_scalar, winding_unitary,
};
pub use zak::{
    diagonal_gauge, frame_winding, gauge_shift_check, wilson_loop, zak_phase_occupied,
    zak_phase_total, GaugeShiftReport, ZakEvaluation,
};

use crate::linalg::{identity, polar_unitary};
use crate::model::HoppingModel;
use crate::symmetry::{
    classify, detect_quaternionic, verify_projector_relations, verify_set, AzcClass, SymmetrySet,
};
use crate::transport::{
    parallel_transport, verify_symmetric_basis, verify_transport, TransportResult,
};
use crate::{CMatrix, Error, Result, Tolerances, C64};

/// `round(2·zak_occupied) mod 2` for classes where it is defined.
///
/// Returns the value and the rounding residual. A quaternionic class with odd
/// value is reported as an invariant violation.
pub fn z2_from_zak(
    class: AzcClass,
    quaternionic: bool,
    zak_occupied: f64,
    tol: &Tolerances,
) -> Result<(Z2, f64)> {
    let doubled = 2.0 * zak_occupied;
    let residual = (doubled - doubled.round()).abs();
    if !class.invariant_defined() {
        return Ok((Z2::NotApplicable, residual));
    }
    let n = winding::round_integer(doubled, tol.int)?;
    let z = Z2::from_parity(n);
    if quaternionic && z == Z2::One {
        return Err(Error::InvariantViolation(format!(
            "class {class} has a quaternionic structure but 2·zak_occupied = {doubled:.6} is odd"
        )));
    }
    Ok((z, residual))
}

/// ℤ₂ invariant of a transported model under a symmetry set.
pub fn z2_invariant(model: &HoppingModel, set: &SymmetrySet, tr: &TransportResult) -> Result<Z2> {
    let class = classify(set)?;
    if class.invariant_defined() {
        check_half_filling(model, tr.occupied())?;
    }
    let occ = zak_phase_occupied(tr)?;
    Ok(z2_from_zak(
        class,
        detect_quaternionic(set).is_some(),
        occ.value,
        tr.tolerances(),
    )?
    .0)
}

fn check_half_filling(model: &HoppingModel, occupied: usize) -> Result<()> {
    if !model.dim().is_multiple_of(2) || 2 * occupied != model.dim() {
        return Err(Error::InvariantViolation(format!(
            "a symmetry reversing the energy forces m = N/2, found m = {occupied}, N = {}",
            model.dim()
        )));
    }
    Ok(())
}

/// Off-diagonal block `A_k` of a model written as `[[0, A_k], [A_k†, 0]]` in
/// the eigenbasis of a chiral operator `±diag(1, −1)`, if it has that form.
fn chiral_block(model: &HoppingModel, set: &SymmetrySet) -> Option<usize> {
    let n = model.dim();
    if !n.is_multiple_of(2) {
        return None;
    }
    let half = n / 2;
    let s = set.s()?;
    let mut sigma = identity(n);
    for i in half..n {
        sigma[(i, i)] = C64::new(-1.0, 0.0);
    }
    let plus = (s.matrix() - &sigma).norm();
    let minus = (s.matrix() + &sigma).norm();
    if plus.min(minus) > 1e-12 {
        return None;
    }
    let off = model.hoppings().values().all(|a| {
        a.view((0, 0), (half, half)).norm() == 0.0
            && a.view((half, half), (half, half)).norm() == 0.0
    });
    off.then_some(half)
}

/// Winding of the chiral off-diagonal block, computed by two independent
/// methods that must agree.
pub fn block_oracle(
    model: &HoppingModel,
    set: &SymmetrySet,
    tol: &Tolerances,
) -> Result<Option<(i64, OracleMethod)>> {
    let Some(half) = chiral_block(model, set) else {
        return Ok(None);
    };
    let block = |k: f64| -> CMatrix {
        model
            .fiber_hamiltonian(k)
            .view((0, half), (half, half))
            .into_owned()
    };
    let initial = 64 * (model.range() + 1);
    if half == 1 {
        // Upper-right entry of H_k is Σ_j e^{-ijk} (A_j)_{01} = Σ_n c_n e^{ink}.
        let coeffs: BTreeMap<i64, C64> = model
            .hoppings()
            .iter()
            .map(|(&j, a)| (-j, a[(0, 1)]))
            .filter(|(_, c)| c.norm() > 0.0)
            .collect();
        let counted = laurent_winding_roots(&coeffs)?;
        let sampled = laurent_winding_sampled(&coeffs, tol)?;
        if counted != sampled {
            return Err(Error::InvariantViolation(format!(
                "sampled winding {sampled} disagrees with root counting {counted}"
            )));
        }
        return Ok(Some((counted, OracleMethod::RootCounting)));
    }
    let from_det = winding_of_function(initial, tol, |k| block(k).determinant())?;
    let from_polar = winding_of_function(initial, tol, |k| polar_unitary(&block(k)).determinant())?;
    if from_det != from_polar {
        return Err(Error::InvariantViolation(format!(
            "det winding {from_det} disagrees with polar winding {from_polar}"
        )));
    }
    Ok(Some((from_det, OracleMethod::Determinant)))
}

/// Gap check, symmetry verification, classification, transport, Zak phases,
/// ℤ₂ invariant and (when available) the winding oracle.
pub fn analyze(
    model: &HoppingModel,
    set: &SymmetrySet,
    config: &AnalysisConfig,
) -> Result<InvariantReport> {
    let tol = &config.tolerances;
    if let Some(d) = set.dim() {
        if d != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: d,
            });
        }
    }
    let gap = model.gap_at_zero(config.gap_grid, tol)?;
    if !gap.gapped {
        return Err(Error::Gapless {
            k: gap.k_at_min,
            energy: gap.min_abs_energy,
        });
    }
    let symmetries = verify_set(model, set, config.symmetry_grid, tol)?;
    for op in set.with_composites() {
        verify_projector_relations(model, &op, config.symmetry_grid, tol)?.into_result()?;
    }
    let class = classify(set)?;
    if set.has_energy_flip() {
        check_half_filling(model, gap.occupied_rank)?;
    }
    let witness = detect_quaternionic(set);

    let tr = parallel_transport(model, config.steps, tol)?;
    let transport = verify_transport(&tr)?;
    if !transport.passed {
        return Err(Error::numerical(format!(
            "transport contract violated at M = {} (unitarity {:.2e}, intertwining {:.2e}, telescopic {:.2e}, [X, P_0] {:.2e}); increase the step count",
            config.steps, transport.unitarity, transport.intertwining, transport.telescopic, transport.log_commutator
        )));
    }
    let frames = zak::frames(&tr);
    let total = zak::zak_phase_total_with(&tr, &frames)?;
    let occupied = zak::zak_phase_occupied_with(&tr, &frames)?;
    let (z2, z2_residual) = z2_from_zak(class, witness.is_some(), occupied.value, tol)?;
    let frame_winding = frame_winding(&tr, &frames)?;
    if witness.is_some() && frame_winding % 2 != 0 {
        return Err(Error::InvariantViolation(format!(
            "quaternionic structure present but the frame winding {frame_winding} is odd"
        )));
    }

    let symmetric_basis = if config.basis_grid > 0 && !set.operators().is_empty() {
        Some(verify_symmetric_basis(&tr, set, config.basis_grid)?)
    } else {
        None
    };

    let oracle = block_oracle(model, set, tol)?;
    let oracle_winding = oracle.map(|o| o.0);
    let parity_consistent = match (oracle_winding, z2.as_int()) {
        (Some(w), Some(z)) => Some(w.rem_euclid(2) == z),
        _ => None,
    };

    let mut warnings = Vec::new();
    if !class.invariant_defined() {
        warnings.push(format!(
            "class {class}: the Zak phases depend on the choice of Bloch frame and are not invariants"
        ));
    }
    if let Some(b) = &symmetric_basis {
        if !b.passed {
            warnings.push("transport frame fails a subspace-level symmetry relation".into());
        }
    }

    Ok(InvariantReport {
        azc_class: class,
        k_theory_1d: class.k_theory_1d(),
        invariant_support: class.invariant_support(),
        quaternionic: witness.is_some(),
        quaternionic_witness: witness.map(|w| w.label()),
        gap,
        zak_total: total.value,
        zak_occupied: occupied.value,
        z2,
        oracle_winding,
        parity_consistent,
        frame_winding,
        symmetries,
        diagnostics: Diagnostics {
            zak_total_wilson: total.wilson,
            zak_total_discrepancy: total.discrepancy,
            zak_occupied_wilson: occupied.wilson,
            zak_occupied_discrepancy: occupied.discrepancy,
            z2_residual,
            oracle_method: oracle.map(|o| o.1),
            transport,
            symmetric_basis,
        },
        warnings,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{kitaev_chain, quaternionic_double, DoubleLift};

    fn quick() -> AnalysisConfig {
        AnalysisConfig {
            steps: 512,
            ..AnalysisConfig::default()
        }
    }

    fn run(spec: &str) -> InvariantReport {
        let (m, set) = kitaev_chain(&spec.parse().unwrap()).unwrap();
        analyze(&m, &set, &quick()).unwrap()
    }

    #[test]
    fn kitaev_topological() {
        let r = run("1:1");
        assert_eq!(r.azc_class, AzcClass::BDI);
        assert_eq!(r.z2, Z2::One);
        assert_eq!(r.oracle_winding, Some(1));
        assert_eq!(r.parity_consistent, Some(true));
        assert!((r.zak_total + 1.0).abs() < 1e-6);
    }

    #[test]
    fn kitaev_trivial() {
        let r = run("0:2,1:1");
        assert_eq!(r.z2, Z2::Zero);
        assert_eq!(r.oracle_winding, Some(0));
    }

    #[test]
    fn kitaev_gapless() {
        let (m, set) = kitaev_chain(&"0:1,1:1".parse().unwrap()).unwrap();
        assert!(matches!(
            analyze(&m, &set, &quick()),
            Err(Error::Gapless { .. })
        ));
    }

    #[test]
    fn double_has_trivial_invariant() {
        let (base, set) = kitaev_chain(&"1:1".parse().unwrap()).unwrap();
        let (m, set) = quaternionic_double(&base, &set, DoubleLift::ParticleHole).unwrap();
        let r = analyze(&m, &set, &quick()).unwrap();
        assert_eq!(r.azc_class, AzcClass::DIII);
        assert!(r.quaternionic);
        assert_eq!(r.z2, Z2::Zero);
        assert_eq!(r.frame_winding % 2, 0);
    }

    #[test]
    fn z2_not_applicable_without_energy_flip() {
        let (z, _) = z2_from_zak(AzcClass::AI, false, 0.37, &Tolerances::default()).unwrap();
        assert_eq!(z, Z2::NotApplicable);
    }

    #[test]
    fn odd_quaternionic_value_is_a_violation() {
        assert!(matches!(
            z2_from_zak(AzcClass::DIII, true, 0.5, &Tolerances::default()),
            Err(Error::InvariantViolation(_))
        ));
    }
}
