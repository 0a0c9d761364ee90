//! Polarized microwave pulses on a set of rotational levels (all M sublevels).
//!
//! Each pulse is treated in the rotating-wave approximation on its carrier.
//! Every level pair whose transition lies within `coupling_cutoff_mhz` of the
//! carrier is coupled with its own detuning, so off-resonant neighbours are
//! kept. The state lives in the interaction picture of the bare rotor, with the
//! clock reset at the start of each pulse.
//!
//! Field amplitudes are given as a Rabi rate per Debye: a pulse with
//! `rabi_per_debye_khz = 10` drives a 1 D matrix element at Ω/2π = 10 kHz.

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, ComplexSystem, StepControl};
use crate::rotor::{FieldAxis, LevelLabel, MoleculeSpec, RotState, Rotor};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex unit polarization vector over (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization(pub [Complex64; 3]);

impl Polarization {
    pub fn new(v: [Complex64; 3]) -> Result<Self> {
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::invalid("polarization", "zero vector"));
        }
        Ok(Self(v.map(|c| c / norm)))
    }

    pub fn preset(axis: FieldAxis) -> Self {
        Self(axis.vector())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Fraction of the field intensity along a unit vector.
    pub fn intensity_along(&self, axis: FieldAxis) -> f64 {
        let e = axis.vector();
        e.iter()
            .zip(&self.0)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// How an admixture fraction ε is turned into amplitude weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixingConvention {
    /// Weights √(1−ε), √ε: ε is an intensity fraction.
    #[default]
    Intensity,
    /// Weights 1−ε, ε before renormalization: ε is an amplitude fraction.
    Amplitude,
}

/// Base polarization with a fraction ε of another preset mixed in, renormalized.
pub fn imperfect_polarization(
    base: FieldAxis,
    epsilon: f64,
    admixed: FieldAxis,
    convention: MixingConvention,
) -> Result<Polarization> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("admixture", "must lie in [0, 1]"));
    }
    let (wb, wa) = match convention {
        MixingConvention::Intensity => ((1.0 - epsilon).sqrt(), epsilon.sqrt()),
        MixingConvention::Amplitude => (1.0 - epsilon, epsilon),
    };
    let (b, a) = (base.vector(), admixed.vector());
    Polarization::new([0, 1, 2].map(|k| b[k] * wb + a[k] * wa))
}

/// Pulse envelope shape; lengths are fractions of the pulse duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Envelope {
    /// Flat top with sin² rise and fall, each lasting `ramp_fraction` of the duration.
    FlatTop { ramp_fraction: f64 },
    /// Gaussian centred in the window with σ = `sigma_fraction` × duration.
    Gaussian { sigma_fraction: f64 },
}

impl Default for Envelope {
    fn default() -> Self {
        Envelope::FlatTop { ramp_fraction: 0.1 }
    }
}

impl Envelope {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Envelope::FlatTop { ramp_fraction } if !(0.0..=0.5).contains(&ramp_fraction) => {
                Err(Error::invalid("envelope.ramp_fraction", "must lie in [0, 0.5]"))
            }
            Envelope::Gaussian { sigma_fraction } if !(sigma_fraction > 0.0) => {
                Err(Error::invalid("envelope.sigma_fraction", "must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Envelope value in [0, 1] at fractional time s = t/T.
    pub fn value(&self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        match *self {
            Envelope::FlatTop { ramp_fraction: r } => {
                if r == 0.0 {
                    1.0
                } else if s < r {
                    (0.5 * PI * s / r).sin().powi(2)
                } else if s > 1.0 - r {
                    (0.5 * PI * (1.0 - s) / r).sin().powi(2)
                } else {
                    1.0
                }
            }
            Envelope::Gaussian { sigma_fraction } => (-0.5 * ((s - 0.5) / sigma_fraction).powi(2)).exp(),
        }
    }

    /// ∫₀¹ f(s) ds.
    pub fn mean(&self) -> f64 {
        match *self {
            Envelope::FlatTop { ramp_fraction } => 1.0 - ramp_fraction,
            Envelope::Gaussian { .. } => {
                let n = 4000;
                let h = 1.0 / n as f64;
                let mut acc = self.value(0.0) + self.value(1.0);
                for k in 1..n {
                    acc += if k % 2 == 1 { 4.0 } else { 2.0 } * self.value(k as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }

    /// Fractional breakpoints between smooth pieces, and whether each piece is constant.
    fn pieces(&self) -> Vec<(f64, f64, bool)> {
        match *self {
            Envelope::FlatTop { ramp_fraction: r } if r > 0.0 => {
                vec![(0.0, r, false), (r, 1.0 - r, true), (1.0 - r, 1.0, false)]
            }
            Envelope::FlatTop { .. } => vec![(0.0, 1.0, true)],
            Envelope::Gaussian { .. } => vec![(0.0, 1.0, false)],
        }
    }
}

/// A microwave pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub carrier_mhz: f64,
    pub polarization: Polarization,
    /// Peak Rabi rate Ω/2π driven on a 1 D element, kHz.
    pub rabi_per_debye_khz: f64,
    pub envelope: Envelope,
    pub duration_us: f64,
    /// Area the pulse was designed for on its reference transition, rad.
    pub target_area: f64,
    /// Reference transition (lower, upper) used for the design, if any.
    pub reference: Option<(RotState, RotState)>,
}

impl PulseSpec {
    fn peak_rate(&self) -> f64 {
        2.0 * PI * self.rabi_per_debye_khz * 1e-3
    }

    /// Pulse area ∫Ω(t)dt on a transition with element magnitude `element` (Debye).
    pub fn area(&self, element: f64) -> f64 {
        self.peak_rate() * element * self.envelope.mean() * self.duration_us
    }
}

/// Rotational levels with all their M sublevels, energies and Cartesian dipole matrices.
#[derive(Debug, Clone)]
pub struct RotorSubspace {
    pub rotor: Rotor,
    pub states: Vec<RotState>,
    /// Energies in MHz.
    pub energies: Vec<f64>,
    /// ⟨i|μ_β|j⟩ for β = x, y, z, in Debye.
    pub dipole: [DMatrix<Complex64>; 3],
}

impl RotorSubspace {
    pub fn new(spec: &MoleculeSpec, levels: &[LevelLabel]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("subspace", "needs at least one level"));
        }
        let jmax = levels.iter().map(|l| l.j).max().unwrap_or(0).max(1);
        let rotor = Rotor::new(spec, jmax)?;
        let mut states = Vec::new();
        let mut energies = Vec::new();
        for &level in levels {
            let e = rotor.energy(level)?;
            for m in -level.j..=level.j {
                states.push(RotState { level, m });
                energies.push(e);
            }
        }
        let n = states.len();
        let mut dipole = [DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
        for (i, &a) in states.iter().enumerate() {
            for (j, &b) in states.iter().enumerate() {
                for (k, axis) in [FieldAxis::X, FieldAxis::Y, FieldAxis::Z].into_iter().enumerate() {
                    dipole[k][(i, j)] = rotor.dipole_element(a, b, axis)?;
                }
            }
        }
        Ok(Self {
            rotor,
            states,
            energies,
            dipole,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: RotState) -> Result<usize> {
        self.states
            .iter()
            .position(|x| *x == s)
            .ok_or_else(|| Error::UnknownLevel(s.to_string()))
    }

    /// ⟨bra|μ·e|ket⟩ within the subspace.
    pub fn polarized_element(&self, bra: usize, ket: usize, e: &Polarization) -> Complex64 {
        (0..3).map(|k| e.0[k] * self.dipole[k][(bra, ket)]).sum()
    }

    pub fn levels(&self) -> Vec<LevelLabel> {
        let mut out: Vec<LevelLabel> = Vec::new();
        for s in &self.states {
            if !out.contains(&s.level) {
                out.push(s.level);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicrowaveOptions {
    /// Pairs further than this from the carrier are not coupled, MHz.
    pub coupling_cutoff_mhz: f64,
    /// Piecewise-constant segments per smooth envelope piece.
    pub segments: usize,
}

impl Default for MicrowaveOptions {
    fn default() -> Self {
        Self {
            coupling_cutoff_mhz: 100.0,
            segments: 400,
        }
    }
}

/// One RWA coupling term: H[u,l] = f(t) · value · e^{i δ t}, plus its conjugate.
#[derive(Debug, Clone, Copy)]
struct Coupling {
    pulse: usize,
    upper: usize,
    lower: usize,
    value: Complex64,
    /// Detuning E_u − E_l − ω in rad/µs.
    detuning: f64,
}

fn couplings(space: &RotorSubspace, pulses: &[PulseSpec], opts: &MicrowaveOptions) -> Vec<Coupling> {
    let mut out = Vec::new();
    for (p, pulse) in pulses.iter().enumerate() {
        for u in 0..space.len() {
            for l in 0..space.len() {
                let gap = space.energies[u] - space.energies[l];
                if gap <= 0.0 || (gap - pulse.carrier_mhz).abs() > opts.coupling_cutoff_mhz {
                    continue;
                }
                let d = space.polarized_element(u, l, &pulse.polarization);
                if d.norm() < 1e-14 {
                    continue;
                }
                out.push(Coupling {
                    pulse: p,
                    upper: u,
                    lower: l,
                    value: d * (-0.5 * pulse.peak_rate()),
                    detuning: 2.0 * PI * (gap - pulse.carrier_mhz),
                });
            }
        }
    }
    out
}

/// Frame frequencies F_l (MHz) with F_u − F_l = ω on every coupled pair, if consistent.
fn rotating_frame(space: &RotorSubspace, pulses: &[PulseSpec], terms: &[Coupling]) -> Option<Vec<f64>> {
    let n = space.len();
    let mut frame: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if frame[root].is_some() {
            continue;
        }
        frame[root] = Some(space.energies[root]);
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let fi = frame[i].unwrap_or_default();
            for t in terms.iter().filter(|t| t.upper == i || t.lower == i) {
                let w = pulses[t.pulse].carrier_mhz;
                let (other, expected) = if t.lower == i {
                    (t.upper, fi + w)
                } else {
                    (t.lower, fi - w)
                };
                match frame[other] {
                    None => {
                        frame[other] = Some(expected);
                        queue.push_back(other);
                    }
                    Some(f) if (f - expected).abs() > 1e-9 => return None,
                    Some(_) => {}
                }
            }
        }
    }
    frame.into_iter().collect()
}

pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn expm_hermitian(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * dt)));
    v * phases * v.adjoint()
}

struct PulseSystem<'a> {
    n: usize,
    terms: &'a [Coupling],
    pulses: &'a [PulseSpec],
}

impl ComplexSystem for PulseSystem<'_> {
    fn rhs(&self, t: f64, y: &[Complex64], dy: &mut [Complex64]) {
        // dU/dt = −i H(t) U, U stored row-major.
        let n = self.n;
        dy.iter_mut().for_each(|x| *x = ZERO);
        for c in self.terms {
            let p = &self.pulses[c.pulse];
            let f = p.envelope.value(t / p.duration_us);
            if f == 0.0 {
                continue;
            }
            let h_ul = c.value * f * Complex64::from_polar(1.0, c.detuning * t);
            for (row, src, h) in [(c.upper, c.lower, h_ul), (c.lower, c.upper, h_ul.conj())] {
                let coeff = -I * h;
                for k in 0..n {
                    dy[row * n + k] += coeff * y[src * n + k];
                }
            }
        }
    }
}

/// Interaction-picture propagator of pulses applied jointly from t = 0.
pub fn pulse_unitary(
    space: &RotorSubspace,
    pulses: &[PulseSpec],
    opts: &MicrowaveOptions,
) -> Result<DMatrix<Complex64>> {
    let n = space.len();
    if pulses.is_empty() {
        return Ok(DMatrix::identity(n, n));
    }
    for p in pulses {
        p.envelope.validate()?;
        if (p.polarization.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("polarization", "must be normalized"));
        }
        if !(p.duration_us >= 0.0) {
            return Err(Error::invalid("pulse.duration_us", "must be non-negative"));
        }
        let peak = p.rabi_per_debye_khz * 1e-3 * space.dipole.iter().map(max_abs).fold(0.0, f64::max);
        if peak > 0.1 * p.carrier_mhz.abs() {
            log::warn!(
                "peak Rabi {peak:.3e} MHz is not small against carrier {:.3e} MHz",
                p.carrier_mhz
            );
        }
    }
    let terms = couplings(space, pulses, opts);
    let total = pulses.iter().map(|p| p.duration_us).fold(0.0, f64::max);
    let u = match rotating_frame(space, pulses, &terms) {
        Some(frame) => piecewise_unitary(space, pulses, &terms, &frame, total, opts),
        None => ode_unitary(space, pulses, &terms, total)?,
    };
    let err = max_abs(&(u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)));
    if err > 1e-9 {
        return Err(Error::Propagation {
            time: total,
            reason: format!("pulse propagator not unitary (|U†U − I| = {err:.3e})"),
        });
    }
    Ok(u)
}

fn piecewise_unitary(
    space: &RotorSubspace,
    pulses: &[PulseSpec],
    terms: &[Coupling],
    frame: &[f64],
    total: f64,
    opts: &MicrowaveOptions,
) -> DMatrix<Complex64> {
    let n = space.len();
    let offsets: Vec<f64> = space
        .energies
        .iter()
        .zip(frame)
        .map(|(e, f)| 2.0 * PI * (e - f))
        .collect();

    // Breakpoints of every pulse's smooth pieces, merged.
    let mut cuts = vec![0.0, total];
    for p in pulses {
        for (a, b, _) in p.envelope.pieces() {
            cuts.push(a * p.duration_us);
            cuts.push(b * p.duration_us);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let hamiltonian = |t: f64| {
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            offsets.iter().map(|&o| Complex64::new(o, 0.0)),
        ));
        for c in terms {
            let p = &pulses[c.pulse];
            let f = p.envelope.value(t / p.duration_us);
            if f != 0.0 {
                h[(c.upper, c.lower)] += c.value * f;
                h[(c.lower, c.upper)] += (c.value * f).conj();
            }
        }
        h
    };
    let constant_on = |a: f64, b: f64| {
        pulses.iter().all(|p| {
            let (sa, sb) = (a / p.duration_us, b / p.duration_us);
            sb <= 0.0
                || sa >= 1.0
                || p.envelope
                    .pieces()
                    .iter()
                    .any(|&(x, y, flat)| flat && sa >= x - 1e-12 && sb <= y + 1e-12)
        })
    };

    let mut u = DMatrix::<Complex64>::identity(n, n);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let segments = if constant_on(a, b) { 1 } else { opts.segments.max(1) };
        let h = (b - a) / segments as f64;
        for k in 0..segments {
            let mid = a + (k as f64 + 0.5) * h;
            u = expm_hermitian(&hamiltonian(mid), h) * u;
        }
    }
    let back = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        offsets.iter().map(|&o| Complex64::from_polar(1.0, o * total)),
    ));
    back * u
}

fn ode_unitary(
    space: &RotorSubspace,
    pulses: &[PulseSpec],
    terms: &[Coupling],
    total: f64,
) -> Result<DMatrix<Complex64>> {
    let n = space.len();
    let sys = PulseSystem { n, terms, pulses };
    let max_detuning = terms.iter().map(|c| c.detuning.abs()).fold(0.0, f64::max);
    let control = StepControl {
        rtol: 1e-12,
        atol: 1e-14,
        max_step: if max_detuning > 0.0 {
            0.5 / max_detuning
        } else {
            f64::INFINITY
        },
        ..StepControl::default()
    };
    let identity: Vec<Complex64> = (0..n * n)
        .map(|k| if k / n == k % n { Complex64::new(1.0, 0.0) } else { ZERO })
        .collect();
    let (y, _) = ode::integrate(&sys, 0.0, &identity, &[total], &control, |_, _| Ok(()))?;
    Ok(DMatrix::from_row_slice(n, n, &y))
}

/// ρ → UρU† for pulses applied jointly.
pub fn propagate_pulse(
    space: &RotorSubspace,
    rho: &DMatrix<Complex64>,
    pulses: &[PulseSpec],
    opts: &MicrowaveOptions,
) -> Result<DMatrix<Complex64>> {
    if rho.nrows() != space.len() || rho.ncols() != space.len() {
        return Err(Error::invalid("state", "dimension does not match the subspace"));
    }
    let u = pulse_unitary(space, pulses, opts)?;
    Ok(&u * rho * u.adjoint())
}

/// Incoherent populations through the pulses; returns the new populations.
pub fn propagate_pulse_populations(
    space: &RotorSubspace,
    populations: &[f64],
    pulses: &[PulseSpec],
    opts: &MicrowaveOptions,
) -> Result<Vec<f64>> {
    let rho = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        populations.len(),
        populations.iter().map(|&p| Complex64::new(p, 0.0)),
    ));
    let out = propagate_pulse(space, &rho, pulses, opts)?;
    Ok(out.diagonal().iter().map(|z| z.re).collect())
}

/// Resonant π pulse (or another area) on `lower → upper` for the given polarization.
pub fn design_pulse(
    space: &RotorSubspace,
    lower: RotState,
    upper: RotState,
    polarization: Polarization,
    rabi_per_debye_khz: f64,
    envelope: Envelope,
    area: f64,
) -> Result<PulseSpec> {
    envelope.validate()?;
    if !(rabi_per_debye_khz > 0.0) {
        return Err(Error::invalid("rabi_per_debye_khz", "must be positive"));
    }
    let (l, u) = (space.index_of(lower)?, space.index_of(upper)?);
    let carrier = space.energies[u] - space.energies[l];
    if carrier <= 0.0 {
        return Err(Error::Design(format!("{upper} does not lie above {lower}")));
    }
    let element = space.polarized_element(u, l, &polarization).norm();
    if element < 1e-12 {
        return Err(Error::Design(format!(
            "matrix element <{upper}|mu.e|{lower}> vanishes for this polarization"
        )));
    }
    let mut pulse = PulseSpec {
        carrier_mhz: carrier,
        polarization,
        rabi_per_debye_khz,
        envelope,
        duration_us: 0.0,
        target_area: area,
        reference: Some((lower, upper)),
    };
    pulse.duration_us = area / (pulse.peak_rate() * element * envelope.mean());
    Ok(pulse)
}

pub fn design_pi_pulse(
    space: &RotorSubspace,
    lower: RotState,
    upper: RotState,
    polarization: Polarization,
    rabi_per_debye_khz: f64,
) -> Result<PulseSpec> {
    design_pulse(
        space,
        lower,
        upper,
        polarization,
        rabi_per_debye_khz,
        Envelope::default(),
        PI,
    )
}
