use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;
use zaktop::symmetry::{classify, detect_quaternionic, verify_set, KGroup, VerificationReport};
use zaktop::sweep::SweepResult;
use zaktop::{
    AnalysisConfig, AzcClass, Error, HoppingModel, InvariantReport, SymmetryLabel, SymmetrySet,
};

use crate::{CliResult, Format};

#[derive(Serialize)]
pub struct ClassifyReport {
    pub azc_class: AzcClass,
    pub k_theory_1d: KGroup,
    pub invariant_support: KGroup,
    pub quaternionic: bool,
    pub quaternionic_witness: Option<SymmetryLabel>,
    pub symmetries: Vec<VerificationReport>,
    pub config: AnalysisConfig,
}

impl ClassifyReport {
    pub fn new(model: &HoppingModel, set: &SymmetrySet, config: &AnalysisConfig) -> CliResult<Self> {
        if let Some(d) = set.dim() {
            if d != model.dim() {
                return Err(Error::DimensionMismatch {
                    expected: model.dim(),
                    found: d,
                }
                .into());
            }
        }
        let symmetries = verify_set(model, set, config.symmetry_grid, &config.tolerances)?;
        let class = classify(set)?;
        let witness = detect_quaternionic(set);
        Ok(Self {
            azc_class: class,
            k_theory_1d: class.k_theory_1d(),
            invariant_support: class.invariant_support(),
            quaternionic: witness.is_some(),
            quaternionic_witness: witness.map(|w| w.label()),
            symmetries,
            config: *config,
        })
    }
}

pub struct SpectrumTable {
    pub k: Vec<f64>,
    /// One row of ascending energies per k.
    pub bands: Vec<Vec<f64>>,
    pub config: AnalysisConfig,
}

impl SpectrumTable {
    /// `points` momenta `k = 2πi/points` on `[0, 2π)`.
    pub fn new(model: &HoppingModel, points: usize, config: &AnalysisConfig) -> CliResult<Self> {
        let tol = &config.tolerances;
        if points < 2 {
            return Err(crate::CliError::Usage("--kgrid must be at least 2".into()));
        }
        let k: Vec<f64> = (0..points).map(|i| 2.0 * PI * i as f64 / points as f64).collect();
        let bands = k
            .iter()
            .map(|&k| Ok(model.spectrum(k, tol)?.eigenvalues))
            .collect::<zaktop::Result<_>>()?;
        Ok(Self {
            k,
            bands,
            config: *config,
        })
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Plain decimal with `-0` folded to `0`.
fn num(x: f64) -> String {
    (x + 0.0).to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

pub fn config_line(c: &AnalysisConfig) -> String {
    let t = &c.tolerances;
    format!(
        "config: steps={} kgrid={} symmetry_grid={} basis_grid={} tol: herm={:e} eig={:e} proj={:e} gap={:e} sym={:e} unit={:e} intw={:e} zak={:e} int={:e} loop={:e}",
        c.steps, c.gap_grid, c.symmetry_grid, c.basis_grid,
        t.herm, t.eig, t.proj, t.gap, t.sym, t.unit, t.intw, t.zak, t.int, t.r#loop
    )
}

fn class_line(class: AzcClass, k: KGroup, support: KGroup, quaternionic: bool) -> String {
    format!(
        "class: {class}, K-theory(1D): {k}, I-support: {support}, quaternionic: {}",
        yes_no(quaternionic)
    )
}

fn symmetry_lines(w: &mut dyn Write, reports: &[VerificationReport]) -> CliResult<()> {
    if reports.is_empty() {
        writeln!(w, "symmetries: none")?;
    }
    for r in reports {
        writeln!(
            w,
            "symmetry {}: max deviation {:.3e} (tol {:.1e}) at k = {:.6} on {} points, {}",
            r.label,
            r.max_deviation,
            r.tolerance,
            r.worst_k,
            r.grid_points,
            if r.passed { "ok" } else { "FAILED" }
        )?;
    }
    Ok(())
}

fn json<T: Serialize>(w: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Numerical(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

pub fn write_classify(w: &mut dyn Write, r: &ClassifyReport, format: Format) -> CliResult<()> {
    match format {
        Format::Table => {
            symmetry_lines(w, &r.symmetries)?;
            writeln!(
                w,
                "{}",
                class_line(r.azc_class, r.k_theory_1d, r.invariant_support, r.quaternionic)
            )?;
            writeln!(w, "{}", config_line(&r.config))?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["label", "max_deviation", "tolerance", "worst_k", "passed", "class", "k_theory_1d", "invariant_support", "quaternionic"])?;
            let class = r.azc_class.to_string();
            let k = r.k_theory_1d.to_string();
            let support = r.invariant_support.to_string();
            let q = r.quaternionic.to_string();
            if r.symmetries.is_empty() {
                c.write_record(["NA", "NA", "NA", "NA", "NA", &class, &k, &support, &q])?;
            }
            for s in &r.symmetries {
                c.write_record([
                    &s.label.to_string(),
                    &format!("{:e}", s.max_deviation),
                    &format!("{:e}", s.tolerance),
                    &s.worst_k.to_string(),
                    &s.passed.to_string(),
                    &class,
                    &k,
                    &support,
                    &q,
                ])?;
            }
            c.flush()?;
            eprintln!("{}", config_line(&r.config));
        }
        Format::Json => json(w, r)?,
    }
    Ok(())
}

pub fn write_invariant(w: &mut dyn Write, r: &InvariantReport, format: Format) -> CliResult<()> {
    match format {
        Format::Table => {
            symmetry_lines(w, &r.symmetries)?;
            writeln!(
                w,
                "{}",
                class_line(r.azc_class, r.k_theory_1d, r.invariant_support, r.quaternionic)
            )?;
            writeln!(
                w,
                "gap: {:.6e} (min |E| {:.6e} at k = {:.6}, {} occupied)",
                r.gap.gap_width, r.gap.min_abs_energy, r.gap.k_at_min, r.gap.occupied_rank
            )?;
            writeln!(w, "zak_total: {:.10}", r.zak_total)?;
            writeln!(w, "zak_occupied: {:.10}", r.zak_occupied)?;
            writeln!(w, "z2: {}", r.z2)?;
            writeln!(w, "oracle_winding: {}", opt(r.oracle_winding))?;
            writeln!(w, "parity_consistent: {}", opt(r.parity_consistent))?;
            writeln!(w, "frame_winding: {}", r.frame_winding)?;
            let t = &r.diagnostics.transport;
            writeln!(
                w,
                "transport: unitarity {:.2e}, intertwining {:.2e}, telescopic {:.2e}, log reconstruction {:.2e}, [X, P0] {:.2e}",
                t.unitarity, t.intertwining, t.telescopic, t.log_reconstruction, t.log_commutator
            )?;
            writeln!(
                w,
                "wilson: total {:.10} (diff {:.2e}), occupied {:.10} (diff {:.2e})",
                r.diagnostics.zak_total_wilson,
                r.diagnostics.zak_total_discrepancy,
                r.diagnostics.zak_occupied_wilson,
                r.diagnostics.zak_occupied_discrepancy
            )?;
            for warning in &r.warnings {
                writeln!(w, "warning: {warning}")?;
            }
            writeln!(w, "{}", config_line(&r.config))?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            c.write_record([
                "class",
                "k_theory_1d",
                "invariant_support",
                "quaternionic",
                "gap",
                "min_abs_energy",
                "zak_total",
                "zak_occupied",
                "z2",
                "oracle_winding",
                "parity_consistent",
                "frame_winding",
            ])?;
            c.write_record([
                r.azc_class.to_string(),
                r.k_theory_1d.to_string(),
                r.invariant_support.to_string(),
                r.quaternionic.to_string(),
                num(r.gap.gap_width),
                num(r.gap.min_abs_energy),
                num(r.zak_total),
                num(r.zak_occupied),
                opt(r.z2.as_int()),
                opt(r.oracle_winding),
                opt(r.parity_consistent),
                r.frame_winding.to_string(),
            ])?;
            c.flush()?;
            for warning in &r.warnings {
                eprintln!("warning: {warning}");
            }
            eprintln!("{}", config_line(&r.config));
        }
        Format::Json => json(w, r)?,
    }
    Ok(())
}

pub fn sweep_summary(r: &SweepResult) -> String {
    let mut s = format!(
        "class {}: {} transition(s), z2 constant on gapped segments: {}",
        r.azc_class,
        r.transitions.len(),
        yes_no(r.invariant_constant)
    );
    for t in &r.transitions {
        s.push_str(&format!(
            "; t = {:.6} in [{:.6}, {:.6}] ({} -> {})",
            t.t,
            t.lower,
            t.upper,
            opt(t.z2_before),
            opt(t.z2_after)
        ));
    }
    s
}

pub fn write_sweep(w: &mut dyn Write, r: &SweepResult, format: Format) -> CliResult<()> {
    match format {
        Format::Table => {
            writeln!(w, "{:>10}  {:>14}  {:>3}", "t", "gap", "z2")?;
            for s in &r.samples {
                let z2 = s.z2.map_or("NA".to_string(), |z| z.to_string());
                writeln!(w, "{:>10.6}  {:>14.6e}  {:>3}", s.t, s.gap_width, z2)?;
            }
            writeln!(w, "{}", sweep_summary(r))?;
            writeln!(w, "{}", config_line(&r.config))?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["t", "gap", "z2"])?;
            for s in &r.samples {
                let z2 = match s.z2 {
                    Some(z) => opt(z.as_int()),
                    None => "NA".into(),
                };
                c.write_record([num(s.t), num(s.gap_width), z2])?;
            }
            c.flush()?;
            eprintln!("{}", config_line(&r.config));
        }
        Format::Json => json(w, r)?,
    }
    Ok(())
}

pub fn write_spectrum(w: &mut dyn Write, s: &SpectrumTable, format: Format) -> CliResult<()> {
    let n = s.bands.first().map_or(0, Vec::len);
    match format {
        Format::Table => {
            write!(w, "{:>10}", "k")?;
            for i in 1..=n {
                write!(w, "  {:>14}", format!("E_{i}"))?;
            }
            writeln!(w)?;
            for (k, row) in s.k.iter().zip(&s.bands) {
                write!(w, "{k:>10.6}")?;
                for e in row {
                    write!(w, "  {e:>14.8}")?;
                }
                writeln!(w)?;
            }
            writeln!(w, "{}", config_line(&s.config))?;
        }
        Format::Csv => {
            let mut c = csv::Writer::from_writer(w);
            let mut header = vec!["k".to_string()];
            header.extend((1..=n).map(|i| format!("E_{i}")));
            c.write_record(&header)?;
            for (k, row) in s.k.iter().zip(&s.bands) {
                let mut record = vec![num(*k)];
                record.extend(row.iter().map(|e| num(*e)));
                c.write_record(&record)?;
            }
            c.flush()?;
            eprintln!("{}", config_line(&s.config));
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                k: &'a [f64],
                bands: &'a [Vec<f64>],
                config: &'a AnalysisConfig,
            }
            json(
                w,
                &Doc {
                    k: &s.k,
                    bands: &s.bands,
                    config: &s.config,
                },
            )?
        }
    }
    Ok(())
}
