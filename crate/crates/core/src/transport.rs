//! Parallel transport of the occupied projector around the Brillouin circle and
//! the periodic Bloch frame it produces.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::linalg::{
    hermiticity_defect, identity, phase_exponential, polar_unitary, unitarity_defect, unitary_eigen,
};
use crate::model::HoppingModel;
use crate::symmetry::{Sign, SymmetryLabel, SymmetryOperator, SymmetrySet};
use crate::{CMatrix, Error, Result, Tolerances, C64};

const TWO_PI: f64 = 2.0 * PI;

/// Eigenphases closer than this are treated as one degenerate cluster.
pub const PHASE_CLUSTER: f64 = 1e-8;

/// Which spectral projector drives the transport. Both give the same
/// generator analytically; the choice exists to check that numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Band {
    #[default]
    Occupied,
    Unoccupied,
}

/// `X = −i ln U` with eigenphases in `[0, 2π)`.
#[derive(Debug, Clone)]
pub struct HolonomyLog {
    pub x: CMatrix,
    /// Orthonormal eigenvectors of `X`, one per column.
    pub eigenvectors: CMatrix,
    pub phases: Vec<f64>,
}

impl HolonomyLog {
    /// `e^{i·s·X}`.
    pub fn exp_scaled(&self, s: f64) -> CMatrix {
        phase_exponential(&self.eigenvectors, &self.phases, s)
    }
}

/// Sampled solution of `∂_k 𝒯_k = [∂_k P_k, P_k] 𝒯_k`, `𝒯_0 = 1`.
#[derive(Debug, Clone)]
pub struct TransportResult {
    model: HoppingModel,
    tol: Tolerances,
    band: Band,
    grid: Vec<f64>,
    unitaries: Vec<CMatrix>,
    log: HolonomyLog,
    initial_energies: Vec<f64>,
    initial_basis: CMatrix,
    occupied: usize,
}

struct Integrator<'a> {
    model: &'a HoppingModel,
    tol: &'a Tolerances,
    band: Band,
}

impl Integrator<'_> {
    fn generator(&self, k: f64) -> Result<CMatrix> {
        let frame = self.model.projector_frame(k, self.tol)?;
        Ok(match self.band {
            Band::Occupied => frame.generator,
            Band::Unoccupied => {
                let q = identity(self.model.dim()) - frame.projector;
                let dq = -frame.derivative;
                &dq * &q - &q * &dq
            }
        })
    }

    /// One RK4 step of size `h` from `k` followed by polar projection. `g0` is
    /// the generator at `k`; returns the new matrix and the generator at `k + h`.
    fn step(&self, t: &CMatrix, k: f64, h: f64, g0: &CMatrix) -> Result<(CMatrix, CMatrix)> {
        let g_mid = self.generator(k + 0.5 * h)?;
        let g_end = self.generator(k + h)?;
        let half = C64::new(0.5 * h, 0.0);
        let k1 = g0 * t;
        let k2 = &g_mid * (t + &k1 * half);
        let k3 = &g_mid * (t + &k2 * half);
        let k4 = &g_end * (t + &k3 * C64::new(h, 0.0));
        let raw = t + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::numerical(format!(
                "transport diverged near k = {k:.6}"
            )));
        }
        let next = polar_unitary(&raw);
        let defect = unitarity_defect(&next);
        if defect > self.tol.unit {
            return Err(Error::numerical(format!(
                "unitarity defect {defect:.3e} after re-unitarisation near k = {k:.6}; increase the step count"
            )));
        }
        Ok((next, g_end))
    }

    /// Integrates `steps` uniform steps starting at `(k0, t0)`; returns all samples.
    fn run(&self, k0: f64, t0: CMatrix, steps: usize) -> Result<Vec<CMatrix>> {
        let h = TWO_PI / steps as f64;
        let mut out = Vec::with_capacity(steps + 1);
        let mut g = self.generator(k0)?;
        out.push(t0);
        for i in 0..steps {
            let k = k0 + i as f64 * h;
            let (next, g_next) = self.step(&out[i], k, h, &g)?;
            out.push(next);
            g = g_next;
        }
        Ok(out)
    }
}

/// Canonical eigenbasis of `H_0`, occupied vectors first.
///
/// Returns the energies, the basis as columns, and the occupied count `m`.
pub fn initial_basis(model: &HoppingModel, tol: &Tolerances) -> Result<(Vec<f64>, CMatrix, usize)> {
    let spec = model.spectrum(0.0, tol)?;
    if let Some(&e) = spec.eigenvalues.iter().find(|e| e.abs() <= tol.gap) {
        return Err(Error::Gapless {
            k: 0.0,
            energy: e.abs(),
        });
    }
    let m = spec.eigenvalues.iter().filter(|&&e| e < 0.0).count();
    Ok((spec.eigenvalues, spec.eigenvectors, m))
}

/// Integrates the transport over one period with `steps` RK4 steps.
pub fn parallel_transport(
    model: &HoppingModel,
    steps: usize,
    tol: &Tolerances,
) -> Result<TransportResult> {
    parallel_transport_with(model, steps, tol, Band::Occupied)
}

pub fn parallel_transport_with(
    model: &HoppingModel,
    steps: usize,
    tol: &Tolerances,
    band: Band,
) -> Result<TransportResult> {
    if steps < 64 {
        return Err(Error::Precondition(format!(
            "transport needs at least 64 steps, got {steps}"
        )));
    }
    let (initial_energies, initial_basis, occupied) = initial_basis(model, tol)?;
    let integrator = Integrator { model, tol, band };
    let unitaries = integrator.run(0.0, identity(model.dim()), steps)?;
    let log = block_log(&unitaries[steps], &initial_basis, occupied, tol)?;
    let h = TWO_PI / steps as f64;
    let grid = (0..=steps)
        .map(|i| if i == steps { TWO_PI } else { i as f64 * h })
        .collect();
    Ok(TransportResult {
        model: model.clone(),
        tol: *tol,
        band,
        grid,
        unitaries,
        log,
        initial_energies,
        initial_basis,
        occupied,
    })
}

/// `X = −i ln U` on the branch `[0, 2π)`.
///
/// Phases within [`PHASE_CLUSTER`] below `2π` are mapped to `0`, and phases
/// within [`PHASE_CLUSTER`] of each other are replaced by their mean, so that
/// nearly degenerate eigenspaces get a basis-independent logarithm.
pub fn holonomy_log(u: &CMatrix, tol: &Tolerances) -> Result<HolonomyLog> {
    let defect = unitarity_defect(u);
    if !(defect <= tol.unit) {
        return Err(Error::Precondition(format!(
            "holonomy is not unitary (‖U†U − 1‖ = {defect:.3e})"
        )));
    }
    let (values, q) = unitary_eigen(u)?;
    let mut phases: Vec<f64> = values
        .iter()
        .map(|z| {
            let p = z.arg().rem_euclid(TWO_PI);
            if p >= TWO_PI - PHASE_CLUSTER {
                0.0
            } else {
                p
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..phases.len()).collect();
    order.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]));
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && phases[order[end]] - phases[order[end - 1]] <= PHASE_CLUSTER {
            end += 1;
        }
        let mean = order[start..end].iter().map(|&i| phases[i]).sum::<f64>() / (end - start) as f64;
        for &i in &order[start..end] {
            phases[i] = mean.max(0.0);
        }
        start = end;
    }
    let mut scaled = q.clone();
    for (j, &p) in phases.iter().enumerate() {
        scaled.column_mut(j).scale_mut(p);
    }
    let x = scaled * q.adjoint();
    let x = (&x + x.adjoint()).scale(0.5);
    let log = HolonomyLog {
        x,
        eigenvectors: q,
        phases,
    };
    let err = (log.exp_scaled(1.0) - u).norm();
    if err > tol.unit {
        return Err(Error::numerical(format!(
            "holonomy logarithm does not reproduce the input (error {err:.3e})"
        )));
    }
    Ok(log)
}

/// Logarithm of the holonomy taken separately on the occupied and unoccupied
/// spaces of `H_0`, so that `X` commutes with `P_0` even when eigenphases of the
/// two blocks nearly coincide. The part of `U` coupling the blocks is an
/// intertwining defect and is dropped here.
fn block_log(u: &CMatrix, basis: &CMatrix, occupied: usize, tol: &Tolerances) -> Result<HolonomyLog> {
    let n = u.nrows();
    let mut eigenvectors = CMatrix::zeros(n, n);
    let mut phases = Vec::with_capacity(n);
    let mut x = CMatrix::zeros(n, n);
    for (start, width) in [(0, occupied), (occupied, n - occupied)] {
        if width == 0 {
            continue;
        }
        let v = basis.columns(start, width);
        let block = polar_unitary(&(v.adjoint() * u * v));
        let log = holonomy_log(&block, tol)?;
        eigenvectors
            .columns_mut(start, width)
            .copy_from(&(v * &log.eigenvectors));
        phases.extend_from_slice(&log.phases);
        x += v * &log.x * v.adjoint();
    }
    let x = (&x + x.adjoint()).scale(0.5);
    Ok(HolonomyLog {
        x,
        eigenvectors,
        phases,
    })
}

/// `P U P + (1 − P) U (1 − P)`.
fn block_diagonal_part(u: &CMatrix, p: &CMatrix) -> CMatrix {
    let q = identity(u.nrows()) - p;
    p * u * p + &q * u * &q
}

impl TransportResult {
    pub fn model(&self) -> &HoppingModel {
        &self.model
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn band(&self) -> Band {
        self.band
    }

    /// Number of integration steps M.
    pub fn steps(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Occupied rank m.
    pub fn occupied(&self) -> usize {
        self.occupied
    }

    /// `M + 1` momenta `0, h, …, 2π`.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn holonomy(&self) -> &CMatrix {
        &self.unitaries[self.steps()]
    }

    pub fn log(&self) -> &HolonomyLog {
        &self.log
    }

    pub fn log_x(&self) -> &CMatrix {
        &self.log.x
    }

    pub fn initial_energies(&self) -> &[f64] {
        &self.initial_energies
    }

    pub fn initial_basis(&self) -> &CMatrix {
        &self.initial_basis
    }

    /// `P_0` built from the occupied columns of the initial basis.
    pub fn initial_projector(&self) -> CMatrix {
        let occ = self.initial_basis.columns(0, self.occupied);
        occ * occ.adjoint()
    }

    /// Bloch frame `W = 𝒯_k e^{−ikX/2π} V_0` at grid index `i`.
    pub fn frame(&self, i: usize) -> CMatrix {
        let k = self.grid[i];
        &self.unitaries[i] * self.log.exp_scaled(-k / TWO_PI) * &self.initial_basis
    }

    /// `𝒯_{−k_i}`, reconstructed as `𝒯_{2π−k_i} 𝒯_{2π}†`.
    pub fn transport_at_negative(&self, i: usize) -> CMatrix {
        let m = self.steps();
        &self.unitaries[m - i] * self.holonomy().adjoint()
    }

    /// Transport at arbitrary `k ∈ [0, 2π]`, by one RK4 sub-step from the
    /// grid point below.
    pub fn transport_at(&self, k: f64) -> Result<CMatrix> {
        if !(0.0..=TWO_PI).contains(&k) {
            return Err(Error::Precondition(format!("k = {k} lies outside [0, 2π]")));
        }
        let h = TWO_PI / self.steps() as f64;
        let i = ((k / h).floor() as usize).min(self.steps());
        let dk = k - self.grid[i];
        if dk <= 0.0 {
            return Ok(self.unitaries[i].clone());
        }
        let integrator = Integrator {
            model: &self.model,
            tol: &self.tol,
            band: self.band,
        };
        let g0 = integrator.generator(self.grid[i])?;
        Ok(integrator
            .step(&self.unitaries[i], self.grid[i], dk, &g0)?
            .0)
    }

    /// Columns `v_j(k) = 𝒯_k e^{−ikX/2π} v_j(0)`.
    pub fn bloch_basis(&self, k: f64) -> Result<CMatrix> {
        Ok(self.transport_at(k)? * self.log.exp_scaled(-k / TWO_PI) * &self.initial_basis)
    }

    /// Writes one JSON object per line: `{"k", "T"}` for every sample, then
    /// `{"X", "phases"}`. Matrices are row lists of `[re, im]` pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Sample<'a> {
            k: f64,
            #[serde(rename = "T")]
            t: &'a [Vec<[f64; 2]>],
        }
        #[derive(Serialize)]
        struct Log<'a> {
            #[serde(rename = "X")]
            x: &'a [Vec<[f64; 2]>],
            phases: &'a [f64],
        }
        let json = |e: serde_json::Error| Error::numerical(e.to_string());
        for (k, t) in self.grid.iter().zip(&self.unitaries) {
            let rows = crate::format::matrix_rows(t);
            serde_json::to_writer(&mut w, &Sample { k: *k, t: &rows }).map_err(json)?;
            writeln!(w)?;
        }
        let rows = crate::format::matrix_rows(&self.log.x);
        serde_json::to_writer(
            &mut w,
            &Log {
                x: &rows,
                phases: &self.log.phases,
            },
        )
        .map_err(json)?;
        writeln!(w)?;
        Ok(())
    }
}

/// Defects of the transport contract.
#[derive(Debug, Clone, Serialize)]
pub struct TransportReport {
    pub steps: usize,
    /// `max_k ‖𝒯_k†𝒯_k − 1‖`.
    pub unitarity: f64,
    /// `max_k ‖P_k 𝒯_k − 𝒯_k P_0‖`.
    pub intertwining: f64,
    /// `max_k ‖𝒯_{k+2π} − 𝒯_k 𝒯_{2π}‖`, from a second period of integration.
    pub telescopic: f64,
    /// `‖e^{iX} − U‖` with `U` the block-diagonal part of `𝒯_{2π}` for `P_0`, re-unitarised.
    pub log_reconstruction: f64,
    /// `‖[X, P_0]‖`.
    pub log_commutator: f64,
    pub passed: bool,
}

pub fn verify_transport(tr: &TransportResult) -> Result<TransportReport> {
    let tol = &tr.tol;
    let model = &tr.model;
    let p0 = tr.initial_projector();
    let mut unitarity: f64 = 0.0;
    let mut intertwining: f64 = 0.0;
    for (k, t) in tr.grid.iter().zip(&tr.unitaries) {
        unitarity = unitarity.max(unitarity_defect(t));
        let p = model.occupied_projector(*k, tol)?;
        intertwining = intertwining.max((p * t - t * &p0).norm());
    }
    let integrator = Integrator {
        model,
        tol,
        band: tr.band,
    };
    let second = integrator.run(TWO_PI, tr.holonomy().clone(), tr.steps())?;
    let telescopic = second
        .iter()
        .zip(&tr.unitaries)
        .map(|(later, t)| (later - t * tr.holonomy()).norm())
        .fold(0.0, f64::max);
    // Coupling between the blocks is already measured by the intertwining defect.
    let log_reconstruction =
        (tr.log.exp_scaled(1.0) - polar_unitary(&block_diagonal_part(tr.holonomy(), &p0))).norm();
    let log_commutator = (&tr.log.x * &p0 - &p0 * &tr.log.x).norm();
    let passed = unitarity <= tol.unit
        && intertwining <= tol.intw
        && telescopic <= tol.intw
        && log_reconstruction <= tol.unit
        && log_commutator <= tol.intw
        && hermiticity_defect(&tr.log.x) <= tol.unit;
    Ok(TransportReport {
        steps: tr.steps(),
        unitarity,
        intertwining,
        telescopic,
        log_reconstruction,
        log_commutator,
        passed,
    })
}

/// How an operator is expected to act on a symmetric Bloch frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrameCase {
    /// Unitary, commutes with `H`: `𝔒 v_j(k) ∝ v_j(k)`.
    CommutingUnitary,
    /// Unitary, anticommutes: `𝔒 v_j(k) ∝ v_{N−j+1}(k)`.
    Chiral,
    /// Antiunitary, commutes, square +1: `𝔒 v_j(k) = v_j(−k)`.
    Real,
    /// Antiunitary, anticommutes, square +1: `𝔒 v_j(k) = v_{N−j+1}(−k)`.
    RealFlip,
    /// Antiunitary with square −1: only the occupied span is checked.
    Quaternionic,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorFrameCheck {
    pub label: SymmetryLabel,
    pub case: FrameCase,
    /// Column-wise relation of the case, max deviation over the grid.
    pub vector_deviation: f64,
    pub vector_passed: bool,
    /// `𝔒` maps the occupied span at `k` to the expected span at `±k`.
    pub subspace_deviation: f64,
    pub subspace_passed: bool,
    /// `𝔒𝒯_k𝔒⁻¹ = 𝒯_{ε_k k}`.
    pub transport_deviation: f64,
    pub transport_passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetricBasisReport {
    pub grid_points: usize,
    pub checks: Vec<OperatorFrameCheck>,
    /// Subspace and transport relations hold for every operator.
    pub passed: bool,
}

fn frame_case(op: &SymmetryOperator, tol: f64) -> Result<FrameCase> {
    Ok(match (op.antiunitary(), op.energy_sign()) {
        (false, Sign::Plus) => FrameCase::CommutingUnitary,
        (false, Sign::Minus) => FrameCase::Chiral,
        (true, sign) => match (op.square_sign(tol)?, sign) {
            (Sign::Minus, _) => FrameCase::Quaternionic,
            (Sign::Plus, Sign::Plus) => FrameCase::Real,
            (Sign::Plus, Sign::Minus) => FrameCase::RealFlip,
        },
    })
}

/// Checks the declared and composite operators against the transport frame on
/// `grid_points` samples of the integration grid.
pub fn verify_symmetric_basis(
    tr: &TransportResult,
    set: &SymmetrySet,
    grid_points: usize,
) -> Result<SymmetricBasisReport> {
    let ops = set.with_composites();
    verify_operators(tr, &ops, grid_points)
}

pub fn verify_operators(
    tr: &TransportResult,
    ops: &[SymmetryOperator],
    grid_points: usize,
) -> Result<SymmetricBasisReport> {
    let tol = &tr.tol;
    let m_steps = tr.steps();
    let stride = (m_steps / grid_points.clamp(1, m_steps)).max(1);
    let indices: Vec<usize> = (0..=m_steps).step_by(stride).collect();
    let n = tr.dim();
    let occ = tr.occupied;
    let id = identity(n);
    let span = |w: &CMatrix| {
        let c = w.columns(0, occ);
        c * c.adjoint()
    };
    let mut checks = Vec::with_capacity(ops.len());
    for op in ops {
        if op.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: op.dim(),
            });
        }
        let case = frame_case(op, tol.proj)?;
        let flips_k = op.antiunitary();
        let mut vector: f64 = 0.0;
        let mut subspace: f64 = 0.0;
        let mut transport: f64 = 0.0;
        for &i in &indices {
            let j = if flips_k { m_steps - i } else { i };
            let w = tr.frame(i);
            let w_target = tr.frame(j);
            let ow = op.apply(&w);
            vector = vector.max(match case {
                FrameCase::CommutingUnitary => phase_free_deviation(&ow, &w_target, false),
                FrameCase::Chiral => phase_free_deviation(&ow, &w_target, true),
                FrameCase::Real | FrameCase::Quaternionic => (&ow - &w_target).norm(),
                FrameCase::RealFlip => (&ow - reversed_columns(&w_target)).norm(),
            });
            let mapped = op.conjugate(&span(&w));
            let target = match op.energy_sign() {
                Sign::Plus => span(&w_target),
                Sign::Minus => &id - span(&w_target),
            };
            subspace = subspace.max((mapped - target).norm());
            let t_target = if flips_k {
                tr.transport_at_negative(i)
            } else {
                tr.unitaries[i].clone()
            };
            transport = transport.max((op.conjugate(&tr.unitaries[i]) - t_target).norm());
        }
        checks.push(OperatorFrameCheck {
            label: op.label(),
            case,
            vector_deviation: vector,
            vector_passed: vector <= tol.intw,
            subspace_deviation: subspace,
            subspace_passed: subspace <= tol.intw,
            transport_deviation: transport,
            transport_passed: transport <= tol.intw,
        });
    }
    let passed = checks
        .iter()
        .all(|c| c.subspace_passed && c.transport_passed);
    Ok(SymmetricBasisReport {
        grid_points: indices.len(),
        checks,
        passed,
    })
}

fn reversed_columns(w: &CMatrix) -> CMatrix {
    let n = w.ncols();
    CMatrix::from_fn(w.nrows(), n, |r, c| w[(r, n - 1 - c)])
}

/// `max_j (1 − |⟨target_j, a_j⟩|)`, optionally against reversed target columns.
fn phase_free_deviation(a: &CMatrix, target: &CMatrix, reverse: bool) -> f64 {
    let n = a.ncols();
    (0..n)
        .map(|j| {
            let t = if reverse { n - 1 - j } else { j };
            1.0 - target.column(t).dotc(&a.column(j)).norm()
        })
        .fold(0.0, f64::max)
}
