//! Finite-range hopping models and their Bloch fibers.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::linalg::{canonical_hermitian_eigen, hermitian_eigen};
use crate::{CMatrix, Error, Result, Tolerances, C64};

/// Translation-invariant Hamiltonian `(Hψ)_n = Σ_j A_j ψ_{n+j}` with `|j| ≤ R`.
///
/// Every stored offset `j` has its partner `-j`, and `A_{-j} = A_j†` holds
/// within [`Tolerances::herm`]. Offsets that are not stored are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppingModel {
    dim: usize,
    range: usize,
    hoppings: BTreeMap<i64, CMatrix>,
}

/// Sorted spectrum of one fiber.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub k: f64,
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
}

/// Result of scanning `min_i |E_i(k)|` over the Brillouin circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    /// Twice the smallest |E| found.
    pub gap_width: f64,
    pub min_abs_energy: f64,
    pub k_at_min: f64,
    /// Number of negative eigenvalues (measured at k = 0 when gapless).
    pub occupied_rank: usize,
    pub gapped: bool,
    pub grid_points: usize,
}

/// Occupied projector together with its k-derivative and the transport generator.
#[derive(Debug, Clone)]
pub(crate) struct ProjectorFrame {
    pub projector: CMatrix,
    pub derivative: CMatrix,
    /// `[∂_k P, P]`.
    pub generator: CMatrix,
}

impl HoppingModel {
    /// Builds a model from `(offset, matrix)` pairs.
    ///
    /// Missing partners `-j` are filled with `A_j†`; partners that are given
    /// must agree with the adjoint within `Tolerances::default().herm`.
    pub fn new(
        dim: usize,
        range: usize,
        hoppings: impl IntoIterator<Item = (i64, CMatrix)>,
    ) -> Result<Self> {
        Self::with_tolerance(dim, range, hoppings, Tolerances::default().herm)
    }

    pub fn with_tolerance(
        dim: usize,
        range: usize,
        hoppings: impl IntoIterator<Item = (i64, CMatrix)>,
        herm_tol: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel(
                "internal dimension N must be positive".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for (j, a) in hoppings {
            if j.unsigned_abs() as usize > range {
                return Err(Error::InvalidModel(format!(
                    "offset {j} exceeds the declared range R = {range}"
                )));
            }
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::InvalidModel(format!(
                    "hopping at offset {j} is {}x{}, expected {dim}x{dim}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "hopping at offset {j} has non-finite entries"
                )));
            }
            if map.insert(j, a).is_some() {
                return Err(Error::InvalidModel(format!("offset {j} given twice")));
            }
        }
        let offsets: Vec<i64> = map.keys().copied().collect();
        for j in offsets {
            let adj = map[&j].adjoint();
            match map.get(&-j) {
                Some(partner) => {
                    let dev = (partner - &adj).norm();
                    if dev > herm_tol * adj.norm().max(1.0) {
                        return Err(Error::InvalidModel(format!(
                            "A_{{{}}} differs from A_{{{}}}† by {dev:.3e}",
                            -j, j
                        )));
                    }
                }
                None => {
                    map.insert(-j, adj);
                }
            }
        }
        Ok(Self {
            dim,
            range,
            hoppings: map,
        })
    }

    /// Internal dimension N.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Hopping range R.
    pub fn range(&self) -> usize {
        self.range
    }

    pub fn hoppings(&self) -> &BTreeMap<i64, CMatrix> {
        &self.hoppings
    }

    pub fn hopping(&self, offset: i64) -> Option<&CMatrix> {
        self.hoppings.get(&offset)
    }

    /// `Σ_j ‖A_j‖_F`, an upper bound on `‖H_k‖` used to scale tolerances.
    pub fn norm_bound(&self) -> f64 {
        self.hoppings.values().map(|a| a.norm()).sum()
    }

    /// `H_k = Σ_j e^{-ijk} A_j`.
    pub fn fiber_hamiltonian(&self, k: f64) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for (&j, a) in &self.hoppings {
            h += a * C64::from_polar(1.0, -(j as f64) * k);
        }
        h
    }

    /// `∂_k H_k = Σ_j (-ij) e^{-ijk} A_j`.
    pub fn fiber_derivative(&self, k: f64) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for (&j, a) in &self.hoppings {
            if j == 0 {
                continue;
            }
            let phase = C64::new(0.0, -(j as f64)) * C64::from_polar(1.0, -(j as f64) * k);
            h += a * phase;
        }
        h
    }

    /// Sorted eigen-decomposition of `H_k` with the deterministic gauge of
    /// [`crate::linalg::canonical_hermitian_eigen`].
    pub fn spectrum(&self, k: f64, tol: &Tolerances) -> Result<SpectralData> {
        let h = self.fiber_hamiltonian(k);
        let cluster = tol.eig_scaled(h.norm());
        let (eigenvalues, eigenvectors) = canonical_hermitian_eigen(&h, k, cluster)?;
        Ok(SpectralData {
            k,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Scans a uniform grid of `grid_points` momenta, then subdivides the two
    /// cells around the minimiser eightfold.
    pub fn gap_at_zero(&self, grid_points: usize, tol: &Tolerances) -> Result<GapReport> {
        if grid_points < 16 {
            return Err(Error::Precondition(format!(
                "gap scan needs at least 16 grid points, got {grid_points}"
            )));
        }
        let h_step = 2.0 * PI / grid_points as f64;
        let mut min_abs = f64::INFINITY;
        let mut k_min = 0.0;
        let mut i_min = 0;
        let mut ranks = Vec::with_capacity(grid_points);
        for i in 0..grid_points {
            let k = i as f64 * h_step;
            let (e, _) = hermitian_eigen(&self.fiber_hamiltonian(k), k)?;
            let local = e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            ranks.push((k, e.iter().filter(|&&x| x < 0.0).count()));
            if local < min_abs {
                min_abs = local;
                k_min = k;
                i_min = i;
            }
        }
        let centre = i_min as f64 * h_step;
        for s in -7..=7 {
            let k = centre + s as f64 * h_step / 8.0;
            let (e, _) = hermitian_eigen(&self.fiber_hamiltonian(k), k)?;
            let local = e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            if local < min_abs {
                min_abs = local;
                k_min = k.rem_euclid(2.0 * PI);
            }
        }
        let gapped = min_abs > tol.gap;
        let first = ranks[0].1;
        if gapped {
            if let Some(&(k, other)) = ranks.iter().find(|(_, r)| *r != first) {
                return Err(Error::RankChange { first, other, k });
            }
        }
        Ok(GapReport {
            gap_width: 2.0 * min_abs,
            min_abs_energy: min_abs,
            k_at_min: k_min,
            occupied_rank: first,
            gapped,
            grid_points,
        })
    }

    /// Orthogonal projector onto the negative-energy eigenspace of `H_k`.
    pub fn occupied_projector(&self, k: f64, tol: &Tolerances) -> Result<CMatrix> {
        Ok(self.projector_frame(k, tol)?.projector)
    }

    /// `∂_k P_k` from first-order perturbation theory:
    /// `Σ_{n occ, m unocc} |m⟩⟨m|∂H|n⟩⟨n| / (E_n − E_m) + h.c.`
    pub fn projector_derivative(&self, k: f64, tol: &Tolerances) -> Result<CMatrix> {
        Ok(self.projector_frame(k, tol)?.derivative)
    }

    pub(crate) fn projector_frame(&self, k: f64, tol: &Tolerances) -> Result<ProjectorFrame> {
        let h = self.fiber_hamiltonian(k);
        let (e, v) = hermitian_eigen(&h, k)?;
        if let Some(&bad) = e.iter().find(|x| x.abs() <= tol.gap) {
            return Err(Error::Gapless {
                k,
                energy: bad.abs(),
            });
        }
        let m = e.iter().filter(|&&x| x < 0.0).count();
        let n = self.dim;
        let occ = v.columns(0, m);
        let unocc = v.columns(m, n - m);
        let projector = occ * occ.adjoint();
        let dh = self.fiber_derivative(k);
        let mut coupling = unocc.adjoint() * &dh * occ;
        for col in 0..m {
            for row in 0..n - m {
                coupling[(row, col)] /= C64::new(e[col] - e[m + row], 0.0);
            }
        }
        // D maps occupied → unoccupied; ∂P = D + D†, [∂P, P] = D − D†.
        let d = unocc * coupling * occ.adjoint();
        let d_adj = d.adjoint();
        Ok(ProjectorFrame {
            projector,
            derivative: &d + &d_adj,
            generator: d - d_adj,
        })
    }

    /// `A_j(t) = (1 − t) A_j(self) + t A_j(other)`.
    pub fn interpolate(&self, other: &HoppingModel, t: f64) -> Result<HoppingModel> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let range = self.range.max(other.range);
        let zero = CMatrix::zeros(self.dim, self.dim);
        let mut offsets: Vec<i64> = self
            .hoppings
            .keys()
            .chain(other.hoppings.keys())
            .copied()
            .collect();
        offsets.sort_unstable();
        offsets.dedup();
        let hoppings = offsets.into_iter().map(|j| {
            let a = self.hoppings.get(&j).unwrap_or(&zero);
            let b = other.hoppings.get(&j).unwrap_or(&zero);
            (j, a * C64::new(1.0 - t, 0.0) + b * C64::new(t, 0.0))
        });
        HoppingModel::new(self.dim, range, hoppings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cmatrix, identity, pauli_x, real_matrix};
    use crate::presets::kitaev_chain;
    use approx::assert_relative_eq;

    fn onsite(diag: &[f64]) -> HoppingModel {
        let n = diag.len();
        let a0 = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        HoppingModel::new(n, 0, [(0, a0)]).unwrap()
    }

    fn kitaev(spec: &str) -> HoppingModel {
        kitaev_chain(&spec.parse().unwrap()).unwrap().0
    }

    #[test]
    fn onsite_fiber_is_constant() {
        let m = onsite(&[1.0, -1.0]);
        for k in [0.0, 0.3, 2.0, 5.9] {
            assert_eq!(
                m.fiber_hamiltonian(k),
                real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
            );
            assert_eq!(m.fiber_derivative(k), CMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn kitaev_fiber_values() {
        let h = kitaev("1:1").fiber_hamiltonian(PI / 2.0);
        let expected = cmatrix(&[&[(0.0, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (0.0, 0.0)]]);
        assert!((h - expected).norm() < 1e-15);

        let h = kitaev("0:0.5,1:1").fiber_hamiltonian(PI);
        let expected = real_matrix(2, 2, &[0.0, -0.5, -0.5, 0.0]);
        assert!((h - expected).norm() < 1e-15);
    }

    #[test]
    fn kitaev_derivative_at_zero() {
        let d = kitaev("1:1").fiber_derivative(0.0);
        let expected = cmatrix(&[&[(0.0, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (0.0, 0.0)]]);
        assert!((d - expected).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = kitaev("-1:0.3,0:0.5,1:1,2:-0.4");
        let h = 1e-6;
        for k in [0.0, 1.1, 3.3] {
            let fd =
                (m.fiber_hamiltonian(k + h) - m.fiber_hamiltonian(k - h)) / C64::new(2.0 * h, 0.0);
            assert!((fd - m.fiber_derivative(k)).norm() < 1e-8);
        }
    }

    #[test]
    fn spectrum_examples() {
        let tol = Tolerances::default();
        for k in [0.0, 1.0, 4.0] {
            let s = kitaev("1:1").spectrum(k, &tol).unwrap();
            assert_relative_eq!(s.eigenvalues[0], -1.0, epsilon = 1e-12);
            assert_relative_eq!(s.eigenvalues[1], 1.0, epsilon = 1e-12);
        }
        let s = onsite(&[2.0, -3.0]).spectrum(0.7, &tol).unwrap();
        assert_eq!(s.eigenvalues, vec![-3.0, 2.0]);
        let s = kitaev("0:0.5,1:1").spectrum(PI, &tol).unwrap();
        assert_relative_eq!(s.eigenvalues[0], -0.5, epsilon = 1e-12);
        assert_relative_eq!(s.eigenvalues[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn gap_examples() {
        let tol = Tolerances::default();
        let g = kitaev("1:1").gap_at_zero(1024, &tol).unwrap();
        assert!(g.gapped);
        assert_eq!(g.occupied_rank, 1);
        assert_relative_eq!(g.gap_width, 2.0, epsilon = 1e-12);

        let g = kitaev("0:1,1:1").gap_at_zero(1024, &tol).unwrap();
        assert!(!g.gapped);

        let g = kitaev("0:0.5,1:1").gap_at_zero(1024, &tol).unwrap();
        assert!(g.gapped);
        assert_relative_eq!(g.gap_width, 1.0, epsilon = 1e-6);
        assert_relative_eq!(g.k_at_min, PI, epsilon = 1e-9);
    }

    #[test]
    fn gap_grid_too_small_is_rejected() {
        assert!(matches!(
            kitaev("1:1").gap_at_zero(8, &Tolerances::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn projector_examples() {
        let tol = Tolerances::default();
        let p = onsite(&[1.0, -1.0]).occupied_projector(0.4, &tol).unwrap();
        assert!((p - real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-14);

        let p = kitaev("1:1").occupied_projector(0.0, &tol).unwrap();
        let expected = real_matrix(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((&p - expected).norm() < 1e-12);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert_relative_eq!(p.trace().re, 1.0, epsilon = 1e-12);

        let m = kitaev("0:0.3,1:1,-2:0.2");
        let p0 = m.occupied_projector(1.3, &tol).unwrap();
        let p1 = m.occupied_projector(1.3 + 2.0 * PI, &tol).unwrap();
        assert!((p0 - p1).norm() < 1e-8);
    }

    #[test]
    fn projector_on_gapless_fiber_errors() {
        let m = kitaev("0:1,1:1");
        assert!(matches!(
            m.occupied_projector(PI, &Tolerances::default()),
            Err(Error::Gapless { .. })
        ));
        assert!(m.projector_derivative(PI, &Tolerances::default()).is_err());
    }

    #[test]
    fn projector_derivative_examples() {
        let tol = Tolerances::default();
        let d = onsite(&[1.0, -1.0])
            .projector_derivative(0.2, &tol)
            .unwrap();
        assert!(d.norm() < 1e-15);

        let m = kitaev("1:1");
        let h = 1e-6;
        let fd = (m.occupied_projector(h, &tol).unwrap() - m.occupied_projector(-h, &tol).unwrap())
            / C64::new(2.0 * h, 0.0);
        let d = m.projector_derivative(0.0, &tol).unwrap();
        assert!(crate::linalg::max_abs(&(fd - &d)) < 1e-6);
        let p = m.occupied_projector(0.0, &tol).unwrap();
        assert!((&p * &d * &p).norm() < 1e-8);
        let q = identity(2) - &p;
        assert!((&q * &d * &q).norm() < 1e-8);
    }

    #[test]
    fn hermiticity_is_enforced() {
        let a1 = pauli_x();
        let bad = real_matrix(2, 2, &[0.0, 2.0, 1.0, 0.0]);
        let err = HoppingModel::new(2, 1, [(1, a1), (-1, bad)]).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
        let err = HoppingModel::new(2, 1, [(2, pauli_x())]).unwrap_err();
        assert!(err.to_string().contains("exceeds"));
    }

    #[test]
    fn missing_partner_is_filled() {
        let a1 = cmatrix(&[&[(0.0, 0.0), (1.0, 2.0)], &[(0.0, 0.0), (0.0, 0.0)]]);
        let m = HoppingModel::new(2, 1, [(1, a1.clone())]).unwrap();
        assert_eq!(m.hopping(-1).unwrap(), &a1.adjoint());
        assert!(crate::linalg::hermiticity_defect(&m.fiber_hamiltonian(0.77)) < 1e-14);
    }
}
