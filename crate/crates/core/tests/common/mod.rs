#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use zaktop::presets::{KitaevSpec, MultichannelSpec};
use zaktop::{CMatrix, HoppingModel, Tolerances, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    let a = random_complex(rng, n, scale);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Haar-ish random unitary from the QR factor of a complex Gaussian-like matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let a = random_complex(rng, n, 1.0);
    let qr = a.qr();
    qr.q()
}

/// Random model with `min_{k} |E| ≥ min_energy`, by rejection.
pub fn random_gapped_model(rng: &mut impl Rng, n: usize, r: usize, min_energy: f64) -> HoppingModel {
    let tol = Tolerances::default();
    loop {
        let mut terms = vec![(0, random_hermitian(rng, n, 1.0))];
        for j in 1..=r as i64 {
            terms.push((j, random_complex(rng, n, 0.6 / j as f64)));
        }
        let model = HoppingModel::new(n, r, terms).unwrap();
        if let Ok(gap) = model.gap_at_zero(512, &tol) {
            if gap.gapped && gap.min_abs_energy >= min_energy {
                return model;
            }
        }
    }
}

pub fn min_modulus(f: impl Fn(f64) -> C64, points: usize) -> f64 {
    (0..points)
        .map(|i| f(2.0 * PI * i as f64 / points as f64).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Real Kitaev coefficients on `[-r, r]` with `min |z(k)| ≥ min_modulus`.
pub fn random_kitaev(rng: &mut impl Rng, max_range: usize, min_mod: f64) -> KitaevSpec {
    loop {
        let r = rng.gen_range(1..=max_range) as i64;
        let spec = KitaevSpec::new((-r..=r).map(|n| (n, rng.gen_range(-1.0..1.0)))).unwrap();
        if min_modulus(|k| spec.z(k), 4096) >= min_mod {
            return spec;
        }
    }
}

pub fn random_multichannel(rng: &mut impl Rng, m: usize, max_range: usize, min_sv: f64) -> MultichannelSpec {
    loop {
        let r = rng.gen_range(1..=max_range) as i64;
        let spec = MultichannelSpec::new(
            m,
            (-r..=r).map(|n| (n, DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0)))),
        )
        .unwrap();
        let smallest = (0..2048)
            .map(|i| {
                let k = 2.0 * PI * i as f64 / 2048.0;
                spec.block(k).singular_values().min()
            })
            .fold(f64::INFINITY, f64::min);
        if smallest >= min_sv {
            return spec;
        }
    }
}

/// Winding of a nonvanishing loop by summing principal-branch phase steps on a
/// grid fine enough that each step stays below π/4.
pub fn winding_oracle(f: impl Fn(f64) -> C64) -> i64 {
    let mut points = 1024;
    loop {
        let samples: Vec<C64> = (0..=points)
            .map(|i| f(2.0 * PI * i as f64 / points as f64))
            .collect();
        let steps: Vec<f64> = samples.windows(2).map(|w| (w[1] / w[0]).arg()).collect();
        if steps.iter().all(|s| s.abs() < PI / 4.0) {
            let total: f64 = steps.iter().sum();
            return (total / (2.0 * PI)).round() as i64;
        }
        points *= 4;
        assert!(points <= 1 << 22, "loop too close to the origin");
    }
}

pub fn kitaev_winding_oracle(spec: &KitaevSpec) -> i64 {
    winding_oracle(|k| spec.z(k))
}

pub fn coefficients(spec: &KitaevSpec) -> BTreeMap<i64, C64> {
    spec.coefficients()
        .iter()
        .map(|(&n, &c)| (n, C64::new(c, 0.0)))
        .collect()
}
