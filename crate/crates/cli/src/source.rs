use std::path::PathBuf;

use clap::{Args, ValueEnum};
use zaktop::presets::{
    kitaev_chain, multichannel_kitaev, quaternionic_double, representative, DoubleLift,
};
use zaktop::symmetry::AzcClass;
use zaktop::{Error, HoppingModel, Result, SymmetrySet};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Two-band chain `z(k) = Σ c_n e^{ink}`; `--coeffs 0:0.5,1:1`.
    Kitaev,
    /// Chiral chain with real `m×m` blocks; `--coeffs "0:1,0,0,1;1:0,1,1,0"`.
    Multichannel,
    /// Built-in example of a symmetry class; `--class DIII`.
    Representative,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Double {
    None,
    ParticleHole,
    Chiral,
}

#[derive(Args, Clone)]
pub struct ModelSource {
    /// Model file.
    #[arg(long, short, value_name = "FILE", conflicts_with = "preset")]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Coefficients for the kitaev and multichannel presets.
    #[arg(long, value_name = "SPEC")]
    coeffs: Option<String>,
    /// Symmetry class for the representative preset.
    #[arg(long, value_name = "CLASS")]
    class: Option<String>,
    /// Replace the model by its doubled copy with a time reversal squaring to −1.
    #[arg(long, value_enum)]
    double: Option<Double>,
}

impl ModelSource {
    pub fn file(path: PathBuf) -> Self {
        Self {
            input: Some(path),
            preset: None,
            coeffs: None,
            class: None,
            double: None,
        }
    }

    pub fn with_coeffs(&self, coeffs: String) -> Self {
        Self {
            coeffs: Some(coeffs),
            ..self.clone()
        }
    }

    pub fn load(&self) -> Result<(HoppingModel, SymmetrySet)> {
        let coeffs = || {
            self.coeffs
                .as_deref()
                .ok_or_else(|| Error::Parse("this preset needs --coeffs".into()))
        };
        let (model, set) = match (&self.input, self.preset) {
            (Some(path), _) => zaktop::format::load_model(path)?,
            (None, Some(Preset::Kitaev)) => kitaev_chain(&coeffs()?.parse()?)?,
            (None, Some(Preset::Multichannel)) => multichannel_kitaev(&coeffs()?.parse()?)?,
            (None, Some(Preset::Representative)) => {
                let class: AzcClass = self
                    .class
                    .as_deref()
                    .ok_or_else(|| Error::Parse("the representative preset needs --class".into()))?
                    .parse()?;
                representative(class)?
            }
            (None, None) => {
                return Err(Error::Parse(
                    "no model given: use --input FILE or --preset".into(),
                ))
            }
        };
        match self.double {
            None => Ok((model, set)),
            Some(d) => {
                let lift = match d {
                    Double::None => DoubleLift::None,
                    Double::ParticleHole => DoubleLift::ParticleHole,
                    Double::Chiral => DoubleLift::Chiral,
                };
                quaternionic_double(&model, &set, lift)
            }
        }
    }
}

/// Both sets declare the same labels with the same operators.
pub fn same_symmetries(a: &SymmetrySet, b: &SymmetrySet) -> bool {
    let same = |x: Option<&zaktop::SymmetryOperator>, y: Option<&zaktop::SymmetryOperator>| match (x, y) {
        (None, None) => true,
        (Some(x), Some(y)) => {
            x.antiunitary() == y.antiunitary()
                && x.matrix().shape() == y.matrix().shape()
                && (x.matrix() - y.matrix()).norm() <= 1e-12
        }
        _ => false,
    };
    a.declared() == b.declared() && same(a.t(), b.t()) && same(a.c(), b.c()) && same(a.s(), b.s())
}
