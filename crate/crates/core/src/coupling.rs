//! Dipole–phonon coupling: prefactor, M-resolved couplings, dressed states and resonance scans.
//!
//! Conversion note. The field scale of mode p is
//! E₀ = |b_m| √(ħ ω_p³ M_rot / (2e²)) in V/m with ω_p in rad/s and M_rot in kg.
//! Multiplying by a dipole μ gives an energy; the reported prefactor is that
//! energy per Debye expressed as a frequency in kHz, either E₀μ/h
//! ([`PrefactorUnits::Hz`]) or E₀μ/(2πh) ([`PrefactorUnits::HzOverTwoPi`]).
//! The second form is the default; it is the one that lands the propanediol
//! 3₃₁/3₃₀ couplings near 2.7/5.7/8.4 kHz.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotor::{FieldAxis, LevelLabel, MoleculeSpec, RotState, Rotor};
use crate::trap::{self, IonChainSpec, NormalModeSet, ParticleKind};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PrefactorUnits {
    #[serde(rename = "hz")]
    Hz,
    #[default]
    #[serde(rename = "hz_over_2pi")]
    HzOverTwoPi,
}

/// Field scale E₀ in V/m for displacement b_m, mode frequency in MHz and mass in u.
pub fn field_scale(b_m: f64, mode_mhz: f64, mass_u: f64) -> f64 {
    let w = units::mhz_to_rad_per_s(mode_mhz);
    let m = mass_u * units::ATOMIC_MASS_UNIT;
    let e = units::ELEMENTARY_CHARGE;
    b_m.abs() * (units::HBAR * w.powi(3) * m / (2.0 * e * e)).sqrt()
}

/// Prefactor in kHz per Debye for given b_m, mode frequency (MHz) and molecular mass (u).
pub fn prefactor_from(b_m: f64, mode_mhz: f64, mass_u: f64, convention: PrefactorUnits) -> f64 {
    let hz = field_scale(b_m, mode_mhz, mass_u) * units::DEBYE / units::PLANCK;
    let hz = match convention {
        PrefactorUnits::Hz => hz,
        PrefactorUnits::HzOverTwoPi => hz / (2.0 * PI),
    };
    hz * 1e-3
}

/// Prefactor E₀ of a labeled mode, kHz per Debye.
pub fn prefactor(modes: &NormalModeSet, label: &str, mass_u: f64, convention: PrefactorUnits) -> Result<f64> {
    if !(mass_u > 0.0) {
        return Err(Error::invalid("mass", "must be positive"));
    }
    let b_m = trap::molecule_displacement(modes, label)?;
    let mode = modes.mode(label)?;
    Ok(prefactor_from(b_m, mode.frequency, mass_u, convention))
}

/// Resonant dipole–phonon coupling of one M-resolved transition.
#[derive(Debug, Clone, PartialEq)]
pub struct DipolePhononCoupling {
    /// ω_p in MHz.
    pub mode_frequency: f64,
    /// E₀ in kHz/D.
    pub prefactor: f64,
    pub lower: RotState,
    pub upper: RotState,
    /// ⟨upper|μ_z|lower⟩ in Debye.
    pub matrix_element: Complex64,
    /// Ẽ₀ = |E₀ × element| in kHz.
    pub total_coupling: f64,
    /// |ΔE_rot − ω_p| in kHz.
    pub detuning: f64,
}

/// Coupling between `lower` and `upper` at projection M through the mode's field axis (z).
pub fn transition_coupling(
    rotor: &Rotor,
    mode_frequency: f64,
    prefactor: f64,
    lower: LevelLabel,
    upper: LevelLabel,
    m: i64,
) -> Result<DipolePhononCoupling> {
    let lo = RotState::new(lower, m)?;
    let up = RotState::new(upper, m)?;
    let element = rotor.dipole_element(up, lo, FieldAxis::Z)?;
    let delta = rotor.energy(upper)? - rotor.energy(lower)?;
    Ok(DipolePhononCoupling {
        mode_frequency,
        prefactor,
        lower: lo,
        upper: up,
        matrix_element: element,
        total_coupling: (element * prefactor).norm(),
        detuning: (delta - mode_frequency).abs() * 1e3,
    })
}

/// Dressed-state splitting ΔE = √n_p · Ẽ₀; zero for the phonon ground state.
pub fn splitting(coupling_khz: f64, n_p: u32) -> f64 {
    (n_p as f64).sqrt() * coupling_khz
}

/// A superposition over the resonant pair {|n_p, j₁⟩, |n_p−1, j₂⟩}.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    pub label: String,
    /// Amplitudes on (|n_p, j₁⟩, |n_p−1, j₂⟩).
    pub amplitudes: [f64; 2],
    /// Energy relative to the bare degenerate pair, kHz.
    pub energy: f64,
}

impl DressedState {
    pub fn phonon_expectation(&self, n_p: u32) -> f64 {
        let n = n_p as f64;
        self.amplitudes[0].powi(2) * n + self.amplitudes[1].powi(2) * (n - 1.0)
    }

    pub fn overlap(&self, other: &DressedState) -> f64 {
        self.amplitudes[0] * other.amplitudes[0] + self.amplitudes[1] * other.amplitudes[1]
    }
}

/// |n_p, j±⟩ = (|n_p, j₁⟩ ± |n_p−1, j₂⟩)/√2 with energies ±√n_p Ẽ₀.
pub fn dressed_states(n_p: u32, j1: RotState, j2: RotState, coupling_khz: f64) -> Result<[DressedState; 2]> {
    if n_p == 0 {
        return Err(Error::invalid("n_p", "dressed states need n_p >= 1"));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let de = splitting(coupling_khz, n_p);
    Ok([
        DressedState {
            label: format!("|{n_p},{j1}> + |{},{j2}>", n_p - 1),
            amplitudes: [s, s],
            energy: de,
        },
        DressedState {
            label: format!("|{n_p},{j1}> - |{},{j2}>", n_p - 1),
            amplitudes: [s, -s],
            energy: -de,
        },
    ])
}

/// Grid and search settings for a (mass × ω_z) resonance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    /// Chain template; the molecule entry's mass and the radial frequency are overwritten per point.
    pub chain: IonChainSpec,
    pub radial_grid: Vec<f64>,
    pub mass_grid: Vec<f64>,
    pub jmax: i64,
    pub tolerance_khz: f64,
    pub units: PrefactorUnits,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub mass: f64,
    pub radial_mhz: f64,
    /// `None` when the chain is unstable at this point.
    pub zigzag_mhz: Option<f64>,
    pub b_m: f64,
    /// kHz/D; NaN when unstable.
    pub prefactor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resonance {
    pub molecule: String,
    pub mass: f64,
    pub radial_mhz: f64,
    pub lower: LevelLabel,
    pub upper: LevelLabel,
    pub transition_mhz: f64,
    pub b_m: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub grid: Vec<GridPoint>,
    pub resonances: Vec<Resonance>,
}

fn chain_at(template: &IonChainSpec, mass: f64, radial: f64) -> IonChainSpec {
    let mut chain = template.clone();
    for p in chain.particles.iter_mut().filter(|p| p.kind == ParticleKind::Molecule) {
        p.mass = mass;
    }
    chain.radial_mhz = radial;
    chain
}

/// Zig-zag frequency and molecule displacement, or `None` if unstable or absent.
pub fn zigzag_at(template: &IonChainSpec, mass: f64, radial: f64) -> Option<(f64, f64)> {
    let modes = trap::normal_modes(&chain_at(template, mass, radial)).ok()?;
    let b_m = trap::molecule_displacement(&modes, "zigzag").ok()?;
    Some((modes.zigzag().ok()?.frequency, b_m))
}

/// Prefactor grid over (mass, ω_z) and resonances for each molecule at its own mass.
pub fn scan_resonances(molecules: &[MoleculeSpec], settings: &ScanSettings) -> Result<ScanResult> {
    if settings.radial_grid.is_empty() || settings.mass_grid.is_empty() {
        return Err(Error::invalid("scan", "grids must be nonempty"));
    }
    settings.chain.validate()?;
    if settings.chain.molecule_index().is_none() {
        return Err(Error::invalid("chain.particles", "scan template needs a molecule"));
    }
    let grid: Vec<GridPoint> = settings
        .mass_grid
        .par_iter()
        .flat_map_iter(|&mass| {
            settings
                .radial_grid
                .iter()
                .map(move |&wz| match zigzag_at(&settings.chain, mass, wz) {
                    Some((f, b)) => GridPoint {
                        mass,
                        radial_mhz: wz,
                        zigzag_mhz: Some(f),
                        b_m: b,
                        prefactor: prefactor_from(b, f, mass, settings.units),
                    },
                    None => GridPoint {
                        mass,
                        radial_mhz: wz,
                        zigzag_mhz: None,
                        b_m: f64::NAN,
                        prefactor: f64::NAN,
                    },
                })
        })
        .collect();

    let per_molecule: Vec<Vec<Resonance>> = molecules
        .par_iter()
        .map(|spec| molecule_resonances(spec, settings))
        .collect::<Result<_>>()?;
    Ok(ScanResult {
        grid,
        resonances: per_molecule.into_iter().flatten().collect(),
    })
}

/// Resonances of one molecule along the ω_z grid at its own mass.
pub fn molecule_resonances(spec: &MoleculeSpec, settings: &ScanSettings) -> Result<Vec<Resonance>> {
    let lines = crate::rotor::transition_table(spec, settings.jmax.max(1))?;
    let samples: Vec<Option<f64>> = settings
        .radial_grid
        .iter()
        .map(|&wz| zigzag_at(&settings.chain, spec.mass, wz).map(|(f, _)| f))
        .collect();
    let tol_mhz = settings.tolerance_khz * 1e-3;
    let mut out = Vec::new();
    for line in lines.iter().filter(|l| l.z_active()) {
        for (w, pair) in settings.radial_grid.windows(2).zip(samples.windows(2)) {
            let (Some(f0), Some(f1)) = (pair[0], pair[1]) else {
                continue;
            };
            let (g0, g1) = (f0 - line.frequency, f1 - line.frequency);
            if g0 == 0.0 || g0.signum() == g1.signum() {
                continue;
            }
            let (mut lo, mut hi, mut glo) = (w[0], w[1], g0);
            while (hi - lo).abs() > 1e-6 {
                let mid = 0.5 * (lo + hi);
                let Some((f, _)) = zigzag_at(&settings.chain, spec.mass, mid) else {
                    break;
                };
                let g = f - line.frequency;
                if g.signum() == glo.signum() {
                    lo = mid;
                    glo = g;
                } else {
                    hi = mid;
                }
            }
            let star = 0.5 * (lo + hi);
            let Some((f, b)) = zigzag_at(&settings.chain, spec.mass, star) else {
                continue;
            };
            if (f - line.frequency).abs() <= tol_mhz {
                out.push(Resonance {
                    molecule: spec.name.clone(),
                    mass: spec.mass,
                    radial_mhz: star,
                    lower: line.lower,
                    upper: line.upper,
                    transition_mhz: line.frequency,
                    b_m: b,
                    prefactor: prefactor_from(b, f, spec.mass, settings.units),
                });
            }
        }
    }
    Ok(out)
}
