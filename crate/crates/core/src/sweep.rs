//! Gap and ℤ₂ invariant along straight-line paths between two models.

use serde::Serialize;

use crate::invariants::{z2_from_zak, zak_phase_occupied, AnalysisConfig, Z2};
use crate::model::HoppingModel;
use crate::symmetry::{classify, detect_quaternionic, verify_set, AzcClass, SymmetrySet};
use crate::transport::parallel_transport;
use crate::{Error, Result, Tolerances};

/// Largest transport step count tried when a sample sits close to a gap closing.
const MAX_STEPS: usize = 1 << 16;

/// `A_j(t) = (1 − t) A_j(start) + t A_j(end)`, sharing one symmetry set.
#[derive(Debug, Clone)]
pub struct ModelPath {
    start: HoppingModel,
    end: HoppingModel,
    set: SymmetrySet,
    samples: usize,
}

impl ModelPath {
    pub fn new(
        start: HoppingModel,
        end: HoppingModel,
        set: SymmetrySet,
        samples: usize,
    ) -> Result<Self> {
        if start.dim() != end.dim() {
            return Err(Error::DimensionMismatch {
                expected: start.dim(),
                found: end.dim(),
            });
        }
        if let Some(d) = set.dim() {
            if d != start.dim() {
                return Err(Error::DimensionMismatch {
                    expected: start.dim(),
                    found: d,
                });
            }
        }
        if samples < 2 {
            return Err(Error::Precondition(format!(
                "a sweep needs at least 2 samples, got {samples}"
            )));
        }
        Ok(Self {
            start,
            end,
            set,
            samples,
        })
    }

    pub fn at(&self, t: f64) -> Result<HoppingModel> {
        self.start.interpolate(&self.end, t)
    }

    pub fn set(&self) -> &SymmetrySet {
        &self.set
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    fn t(&self, i: usize) -> f64 {
        i as f64 / (self.samples - 1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSample {
    pub t: f64,
    pub gap_width: f64,
    pub gapped: bool,
    /// `None` at gapless samples.
    pub z2: Option<Z2>,
    pub zak_occupied: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Transition {
    /// Best estimate of the closing point.
    pub t: f64,
    /// Bracket `[lower, upper]` containing the gapless region.
    pub lower: f64,
    pub upper: f64,
    /// Smallest `|E|` found inside the bracket.
    pub min_abs_energy: f64,
    pub z2_before: Option<Z2>,
    pub z2_after: Option<Z2>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub z2: Option<Z2>,
    pub constant: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub azc_class: AzcClass,
    pub samples: Vec<SweepSample>,
    pub transitions: Vec<Transition>,
    pub segments: Vec<Segment>,
    /// z2 is constant on every maximal gapped segment.
    pub invariant_constant: bool,
    pub config: AnalysisConfig,
    pub bisection_width: f64,
}

/// Default bracket width for located transitions.
pub const BISECTION_WIDTH: f64 = 1e-3;

/// Smallest `|E|` over the Brillouin circle: grid scan with eightfold
/// refinement, then golden-section search in `k` around the minimiser.
pub fn refined_min_energy(
    model: &HoppingModel,
    grid: usize,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let report = model.gap_at_zero(grid, tol).or_else(|e| match e {
        // A rank change means the gap closed somewhere on the grid.
        Error::RankChange { .. } => Ok(crate::model::GapReport {
            gap_width: 0.0,
            min_abs_energy: 0.0,
            k_at_min: 0.0,
            occupied_rank: 0,
            gapped: false,
            grid_points: grid,
        }),
        other => Err(other),
    })?;
    if report.min_abs_energy == 0.0 {
        return Ok((0.0, report.k_at_min));
    }
    let f = |k: f64| -> Result<f64> {
        let (e, _) = crate::linalg::hermitian_eigen(&model.fiber_hamiltonian(k), k)?;
        Ok(e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min))
    };
    let h = 2.0 * std::f64::consts::PI / grid as f64 / 8.0;
    let (k, e) = golden_min(report.k_at_min - h, report.k_at_min + h, 1e-13, &f)?;
    Ok(if e < report.min_abs_energy {
        (e, k)
    } else {
        (report.min_abs_energy, report.k_at_min)
    })
}

fn golden_min(
    mut a: f64,
    mut b: f64,
    width: f64,
    f: &impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > width {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

struct Evaluator<'a> {
    path: &'a ModelPath,
    config: &'a AnalysisConfig,
    class: AzcClass,
    quaternionic: bool,
}

impl Evaluator<'_> {
    fn gap(&self, t: f64) -> Result<f64> {
        let m = self.path.at(t)?;
        Ok(refined_min_energy(&m, self.config.gap_grid, &self.config.tolerances)?.0)
    }

    fn gapless(&self, t: f64) -> Result<bool> {
        Ok(self.gap(t)? <= self.config.tolerances.gap)
    }

    fn sample(&self, t: f64) -> Result<SweepSample> {
        let tol = &self.config.tolerances;
        let model = self.path.at(t)?;
        verify_set(&model, &self.path.set, self.config.symmetry_grid, tol).map_err(
            |e| match e {
                Error::SymmetryViolation {
                    label,
                    deviation,
                    at,
                } => Error::SymmetryViolation {
                    label,
                    deviation,
                    at: format!("{at} on the path at t = {t:.6}"),
                },
                other => other,
            },
        )?;
        let min_e = refined_min_energy(&model, self.config.gap_grid, tol)?.0;
        if min_e <= tol.gap {
            return Ok(SweepSample {
                t,
                gap_width: 2.0 * min_e,
                gapped: false,
                z2: None,
                zak_occupied: None,
            });
        }
        let (z2, zak) = self.invariant(&model)?;
        Ok(SweepSample {
            t,
            gap_width: 2.0 * min_e,
            gapped: true,
            z2: Some(z2),
            zak_occupied: Some(zak),
        })
    }

    /// Transport-based invariant, refining the step count when the sample is
    /// too close to a closing for the configured grid.
    fn invariant(&self, model: &HoppingModel) -> Result<(Z2, f64)> {
        let tol = &self.config.tolerances;
        let mut steps = self.config.steps;
        loop {
            let attempt = parallel_transport(model, steps, tol).and_then(|tr| {
                let occ = zak_phase_occupied(&tr)?;
                let (z2, _) = z2_from_zak(self.class, self.quaternionic, occ.value, tol)?;
                Ok((z2, occ.value))
            });
            match attempt {
                Err(Error::Numerical(_) | Error::Precondition(_)) if steps < MAX_STEPS => {
                    steps *= 4
                }
                other => return other,
            }
        }
    }

    /// Shrinks `[lo, hi]` with `gapless(lo) != gapless(hi)` to width below `width`.
    fn bisect(&self, mut lo: f64, mut hi: f64, lo_gapless: bool, width: f64) -> Result<(f64, f64)> {
        while hi - lo >= width {
            let mid = 0.5 * (lo + hi);
            if self.gapless(mid)? == lo_gapless {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo, hi))
    }

    /// Minimises the gap over `[lo, hi]` by ternary search.
    fn ternary(&self, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
        let eps = self.config.tolerances.gap;
        while hi - lo > 1e-10 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let (g1, g2) = (self.gap(m1)?, self.gap(m2)?);
            if g1 <= eps {
                return Ok((m1, g1));
            }
            if g2 <= eps {
                return Ok((m2, g2));
            }
            if g1 < g2 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let t = 0.5 * (lo + hi);
        Ok((t, self.gap(t)?))
    }
}

/// Samples the path uniformly, locates gap closings, and checks that z2 is
/// constant between them.
pub fn sweep(path: &ModelPath, config: &AnalysisConfig) -> Result<SweepResult> {
    sweep_with_width(path, config, BISECTION_WIDTH)
}

pub fn sweep_with_width(
    path: &ModelPath,
    config: &AnalysisConfig,
    width: f64,
) -> Result<SweepResult> {
    let class = classify(&path.set)?;
    let ev = Evaluator {
        path,
        config,
        class,
        quaternionic: detect_quaternionic(&path.set).is_some(),
    };
    let samples: Vec<SweepSample> = (0..path.samples)
        .map(|i| ev.sample(path.t(i)))
        .collect::<Result<_>>()?;

    let mut transitions = Vec::new();
    let n = samples.len();
    let mut i = 0;
    while i < n {
        if !samples[i].gapped {
            let start = i;
            while i < n && !samples[i].gapped {
                i += 1;
            }
            let end = i - 1;
            let lower = if start > 0 {
                ev.bisect(samples[start - 1].t, samples[start].t, false, width)?
                    .0
            } else {
                samples[start].t
            };
            let upper = if end + 1 < n {
                ev.bisect(samples[end].t, samples[end + 1].t, true, width)?
                    .1
            } else {
                samples[end].t
            };
            transitions.push(Transition {
                t: 0.5 * (lower + upper),
                lower,
                upper,
                min_abs_energy: 0.0,
                z2_before: start.checked_sub(1).and_then(|j| samples[j].z2),
                z2_after: samples.get(end + 1).and_then(|s| s.z2),
            });
            continue;
        }
        i += 1;
    }

    // Closings between gapped samples: invariant changes or dips in the gap.
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (&samples[i], &samples[i + 1]);
        if !(a.gapped && b.gapped) {
            continue;
        }
        let changed = a.z2 != b.z2;
        let dip = i + 2 < n
            && samples[i + 2].gapped
            && b.gap_width < a.gap_width
            && b.gap_width < samples[i + 2].gap_width;
        if changed {
            let (t, g) = ev.ternary(a.t, b.t)?;
            transitions.push(Transition {
                t,
                lower: (t - 0.5 * width).max(a.t),
                upper: (t + 0.5 * width).min(b.t),
                min_abs_energy: g,
                z2_before: a.z2,
                z2_after: b.z2,
            });
        } else if dip {
            let c = &samples[i + 2];
            let (t, g) = ev.ternary(a.t, c.t)?;
            if g <= config.tolerances.gap {
                transitions.push(Transition {
                    t,
                    lower: (t - 0.5 * width).max(a.t),
                    upper: (t + 0.5 * width).min(c.t),
                    min_abs_energy: g,
                    z2_before: a.z2,
                    z2_after: c.z2,
                });
            }
        }
    }
    transitions.sort_by(|x, y| x.t.total_cmp(&y.t));
    // A dip and an invariant change can locate the same closing.
    transitions.dedup_by(|later, earlier| later.t - earlier.t < width);

    let mut segments: Vec<Segment> = Vec::new();
    let mut current: Option<(f64, f64, Vec<Option<Z2>>)> = None;
    let mut cut = transitions.iter().map(|t| t.t).peekable();
    for s in &samples {
        let mut crossed = false;
        while let Some(&t) = cut.peek() {
            if t <= s.t {
                crossed = true;
                cut.next();
            } else {
                break;
            }
        }
        if crossed || !s.gapped {
            if let Some(seg) = current.take() {
                segments.push(close_segment(seg));
            }
        }
        if s.gapped {
            match &mut current {
                Some((_, end, values)) => {
                    *end = s.t;
                    values.push(s.z2);
                }
                None => current = Some((s.t, s.t, vec![s.z2])),
            }
        }
    }
    if let Some(seg) = current.take() {
        segments.push(close_segment(seg));
    }
    let invariant_constant = segments.iter().all(|s| s.constant);
    Ok(SweepResult {
        azc_class: class,
        samples,
        transitions,
        segments,
        invariant_constant,
        config: *config,
        bisection_width: width,
    })
}

fn close_segment((t_start, t_end, values): (f64, f64, Vec<Option<Z2>>)) -> Segment {
    let constant = values.windows(2).all(|w| w[0] == w[1]);
    Segment {
        t_start,
        t_end,
        z2: values[0],
        constant,
    }
}
