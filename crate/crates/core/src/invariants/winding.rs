//! Winding numbers of closed loops in `ℂ \ {0}` and `U(N)`, and the
//! winding-number oracles for chiral chains.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Schur;

use crate::linalg::{polar_unitary, unitarity_defect};
use crate::presets::{KitaevSpec, MultichannelSpec};
use crate::{CMatrix, Error, Result, Tolerances, C64};

/// Roots closer than this to the unit circle count as a gap closing.
pub const ROOT_CIRCLE_MARGIN: f64 = 1e-8;

/// Largest grid tried when refining a sampled loop.
const MAX_LOOP_POINTS: usize = 1 << 20;

/// Degree of a closed loop sampled at `z_0, …, z_M` with `z_M ≈ z_0`.
///
/// Successive samples must differ in argument by less than π/2; otherwise the
/// loop is reported as undersampled rather than guessed.
pub fn winding_scalar(samples: &[C64], tol: &Tolerances) -> Result<i64> {
    if samples.len() < 3 {
        return Err(Error::InvalidLoop(format!(
            "a loop needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let scale = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(i) = samples.iter().position(|z| !(z.norm() > 1e-14 * scale)) {
        return Err(Error::InvalidLoop(format!("sample {i} is zero")));
    }
    let first = samples[0];
    let last = samples[samples.len() - 1];
    let gap = (first - last).norm();
    if gap > tol.r#loop * first.norm().max(1.0) {
        return Err(Error::InvalidLoop(format!(
            "loop is not closed (|z_0 − z_M| = {gap:.3e})"
        )));
    }
    let mut total = 0.0;
    for (i, pair) in samples.windows(2).enumerate() {
        let step = (pair[1] / pair[0]).arg();
        if step.abs() >= FRAC_PI_2 {
            return Err(Error::InvalidLoop(format!(
                "undersampled: argument jumps by {step:.3} between samples {i} and {}",
                i + 1
            )));
        }
        total += step;
    }
    round_integer(total / (2.0 * PI), tol.int)
}

/// Winding of `det U_k`.
pub fn winding_unitary(samples: &[CMatrix], tol: &Tolerances) -> Result<i64> {
    for (i, u) in samples.iter().enumerate() {
        let d = unitarity_defect(u);
        if !(d <= tol.unit) {
            return Err(Error::InvalidLoop(format!(
                "sample {i} is not unitary (defect {d:.3e})"
            )));
        }
    }
    let dets: Vec<C64> = samples.iter().map(|u| u.determinant()).collect();
    winding_scalar(&dets, tol)
}

pub(crate) fn round_integer(x: f64, tol: f64) -> Result<i64> {
    let r = x.round();
    if !((x - r).abs() <= tol) {
        return Err(Error::numerical(format!(
            "value {x:.9} is not within {tol:.1e} of an integer"
        )));
    }
    Ok(r as i64)
}

/// Samples `f` on `points + 1` uniform momenta in `[0, 2π]`, closing the loop
/// with `f(0)` so that closure holds exactly.
pub fn sample_loop(points: usize, f: impl Fn(f64) -> C64) -> Vec<C64> {
    let h = 2.0 * PI / points as f64;
    let mut out: Vec<C64> = (0..points).map(|i| f(i as f64 * h)).collect();
    out.push(out[0]);
    out
}

/// Winding of a smooth function of `k`, doubling the grid from `initial`
/// points until the loop is resolved.
pub fn winding_of_function(
    initial: usize,
    tol: &Tolerances,
    f: impl Fn(f64) -> C64,
) -> Result<i64> {
    let mut points = initial.max(16);
    loop {
        let samples = sample_loop(points, &f);
        let scale = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(i) = samples.iter().position(|z| !(z.norm() > 1e-14 * scale)) {
            return Err(Error::Gapless {
                k: i as f64 * 2.0 * PI / points as f64,
                energy: samples[i].norm(),
            });
        }
        match winding_scalar(&samples, tol) {
            Err(Error::InvalidLoop(msg)) if msg.starts_with("undersampled") => {
                if points >= MAX_LOOP_POINTS {
                    return Err(Error::InvalidLoop(msg));
                }
                points *= 2;
            }
            other => return other,
        }
    }
}

/// `Σ_n c_n e^{ink}`.
pub fn laurent_value(coeffs: &BTreeMap<i64, C64>, k: f64) -> C64 {
    coeffs
        .iter()
        .map(|(&n, &c)| c * C64::from_polar(1.0, n as f64 * k))
        .sum()
}

/// Roots of `Σ_i a_i w^i` (`a` in ascending order, leading coefficient nonzero)
/// as eigenvalues of the companion matrix.
pub fn polynomial_roots(a: &[C64]) -> Result<Vec<C64>> {
    let degree = a.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = a[degree];
    let mut companion = CMatrix::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -a[i] / lead;
    }
    let schur = Schur::try_new(companion, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("companion matrix eigenvalues did not converge"))?;
    let t = schur.unpack().1;
    Ok((0..degree).map(|i| t[(i, i)]).collect())
}

/// Winding of `k ↦ Σ_n c_n e^{ink}` by the argument principle.
///
/// With `R = max |n|`, `p(w) = Σ c_n w^{n+R}` is a polynomial and the winding
/// equals the number of its roots inside the unit disk minus `R`.
pub fn laurent_winding_roots(coeffs: &BTreeMap<i64, C64>) -> Result<i64> {
    let nonzero: BTreeMap<i64, C64> = coeffs
        .iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(&n, &c)| (n, c))
        .collect();
    let (Some((&low, _)), Some((&high, _))) = (nonzero.first_key_value(), nonzero.last_key_value())
    else {
        return Err(Error::Gapless {
            k: 0.0,
            energy: 0.0,
        });
    };
    let r = nonzero.keys().map(|n| n.abs()).max().unwrap_or(0);
    // Powers of w below low + R are zero roots, all inside the disk.
    let zero_roots = low + r;
    let trimmed: Vec<C64> = (low..=high)
        .map(|n| nonzero.get(&n).copied().unwrap_or_default())
        .collect();
    let roots = polynomial_roots(&trimmed)?;
    if let Some(z) = roots
        .iter()
        .find(|z| (z.norm() - 1.0).abs() < ROOT_CIRCLE_MARGIN)
    {
        return Err(Error::Gapless {
            k: z.arg().rem_euclid(2.0 * PI),
            energy: (z.norm() - 1.0).abs(),
        });
    }
    let inside = roots.iter().filter(|z| z.norm() < 1.0).count() as i64;
    Ok(zero_roots + inside - r)
}

/// Winding of the Laurent loop by sampling, refining as needed.
pub fn laurent_winding_sampled(coeffs: &BTreeMap<i64, C64>, tol: &Tolerances) -> Result<i64> {
    let r = coeffs
        .keys()
        .map(|n| n.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    winding_of_function(64 * (r + 1), tol, |k| laurent_value(coeffs, k))
}

/// Winding of `z(k) = Σ c_n e^{ink}` computed by sampling and by root counting;
/// disagreement is an error.
pub fn kitaev_winding(spec: &KitaevSpec, tol: &Tolerances) -> Result<i64> {
    let coeffs: BTreeMap<i64, C64> = spec
        .coefficients()
        .iter()
        .map(|(&n, &c)| (n, C64::new(c, 0.0)))
        .collect();
    let sampled = laurent_winding_sampled(&coeffs, tol)?;
    let counted = laurent_winding_roots(&coeffs)?;
    if sampled != counted {
        return Err(Error::InvariantViolation(format!(
            "sampled winding {sampled} disagrees with root counting {counted}"
        )));
    }
    Ok(sampled)
}

/// Winding of `det A_k` for `A_k = Σ_n A_n e^{ink}`; checked against the
/// winding of the polar factor `U_k = A_k |A_k|⁻¹` on a `grid`-point loop.
pub fn multichannel_winding(spec: &MultichannelSpec, grid: usize, tol: &Tolerances) -> Result<i64> {
    let from_det = winding_of_function(grid, tol, |k| spec.block(k).determinant())?;
    let from_polar =
        winding_of_function(grid, tol, |k| polar_unitary(&spec.block(k)).determinant())?;
    if from_det != from_polar {
        return Err(Error::InvariantViolation(format!(
            "det winding {from_det} disagrees with polar winding {from_polar}"
        )));
    }
    Ok(from_det)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn coeffs(pairs: &[(i64, f64)]) -> BTreeMap<i64, C64> {
        pairs.iter().map(|&(n, c)| (n, C64::new(c, 0.0))).collect()
    }

    #[test]
    fn scalar_examples() {
        let constant = vec![C64::new(2.0, 1.0); 10];
        assert_eq!(winding_scalar(&constant, &tol()).unwrap(), 0);
        let circle = sample_loop(64, |k| C64::from_polar(1.0, k));
        assert_eq!(winding_scalar(&circle, &tol()).unwrap(), 1);
        let reversed: Vec<C64> = circle.iter().rev().copied().collect();
        assert_eq!(winding_scalar(&reversed, &tol()).unwrap(), -1);
    }

    #[test]
    fn scalar_refusals() {
        let mut zero = sample_loop(64, |k| C64::from_polar(1.0, k));
        zero[5] = C64::new(0.0, 0.0);
        assert!(winding_scalar(&zero, &tol())
            .unwrap_err()
            .to_string()
            .contains("zero"));

        let mut open = sample_loop(64, |k| C64::from_polar(1.0, k));
        open.pop();
        assert!(winding_scalar(&open, &tol())
            .unwrap_err()
            .to_string()
            .contains("not closed"));

        let coarse = sample_loop(8, |k| C64::from_polar(1.0, 3.0 * k));
        assert!(winding_scalar(&coarse, &tol())
            .unwrap_err()
            .to_string()
            .contains("undersampled"));
    }

    #[test]
    fn unitary_examples() {
        let constant = vec![CMatrix::identity(2, 2); 10];
        assert_eq!(winding_unitary(&constant, &tol()).unwrap(), 0);
        let h = 2.0 * PI / 64.0;
        let mut diag: Vec<CMatrix> = (0..64)
            .map(|i| {
                let mut u = CMatrix::identity(2, 2);
                u[(0, 0)] = C64::from_polar(1.0, i as f64 * h);
                u
            })
            .collect();
        diag.push(diag[0].clone());
        assert_eq!(winding_unitary(&diag, &tol()).unwrap(), 1);
    }

    #[test]
    fn root_counting_examples() {
        assert_eq!(laurent_winding_roots(&coeffs(&[(1, 1.0)])).unwrap(), 1);
        assert_eq!(
            laurent_winding_roots(&coeffs(&[(0, 2.0), (1, 1.0)])).unwrap(),
            0
        );
        assert_eq!(laurent_winding_roots(&coeffs(&[(-1, 1.0)])).unwrap(), -1);
        assert_eq!(
            laurent_winding_roots(&coeffs(&[(0, 0.5), (1, 1.0)])).unwrap(),
            1
        );
        assert_eq!(
            laurent_winding_roots(&coeffs(&[(2, 1.0), (0, 0.1)])).unwrap(),
            2
        );
    }

    #[test]
    fn root_counting_refuses_circle_roots() {
        assert!(matches!(
            laurent_winding_roots(&coeffs(&[(0, 1.0), (1, 1.0)])),
            Err(Error::Gapless { .. })
        ));
    }

    #[test]
    fn kitaev_examples() {
        for (spec, w) in [
            ("1:1", 1),
            ("0:2,1:1", 0),
            ("-1:1", -1),
            ("0:0.3,2:1,-1:0.2", 2),
        ] {
            assert_eq!(
                kitaev_winding(&spec.parse().unwrap(), &tol()).unwrap(),
                w,
                "{spec}"
            );
        }
    }

    #[test]
    fn multichannel_examples() {
        let diag: MultichannelSpec = MultichannelSpec::new(
            2,
            [
                (
                    1,
                    nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
                ),
                (
                    0,
                    nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
                ),
            ],
        )
        .unwrap();
        assert_eq!(multichannel_winding(&diag, 256, &tol()).unwrap(), 1);

        let scalar = MultichannelSpec::new(2, [(1, nalgebra::DMatrix::identity(2, 2))]).unwrap();
        assert_eq!(multichannel_winding(&scalar, 256, &tol()).unwrap(), 2);

        let constant = MultichannelSpec::new(
            2,
            [(
                0,
                nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]),
            )],
        )
        .unwrap();
        assert_eq!(multichannel_winding(&constant, 256, &tol()).unwrap(), 0);
    }
}
