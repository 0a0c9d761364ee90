//! Sympathetic sideband cooling of one rotational M block: atoms ⊗ phonon ⊗ {j₁, j₂}.
//!
//! Time runs in µs and angular frequencies in rad/µs. The laser drives the
//! atoms' red sideband, the radial mode is resonant with the rotational pair,
//! and spontaneous emission of the atoms removes the energy.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{self, ComplexSystem, StepControl};
use crate::units;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which of the two coupled rotational states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RotorSlot {
    /// j₁, the lower level and cooling target.
    Lower,
    /// j₂, the upper level.
    Upper,
}

impl RotorSlot {
    fn index(self) -> usize {
        match self {
            RotorSlot::Lower => 0,
            RotorSlot::Upper => 1,
        }
    }
}

/// Index map (a₁..a_N, n_p, j) → flat index; atom 1 is the most significant factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeSpace {
    pub atoms: usize,
    pub phonon_cutoff: usize,
}

impl Default for CompositeSpace {
    fn default() -> Self {
        Self {
            atoms: 2,
            phonon_cutoff: 2,
        }
    }
}

/// Decomposed basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    /// Bit i set when atom i (counting from 1 at the most significant bit) is excited.
    pub excited: u32,
    pub phonons: usize,
    pub rotor: RotorSlot,
}

impl CompositeSpace {
    pub fn new(atoms: usize, phonon_cutoff: usize) -> Result<Self> {
        if atoms == 0 || atoms > 8 {
            return Err(Error::invalid("cooling.atoms", "must be between 1 and 8"));
        }
        Ok(Self { atoms, phonon_cutoff })
    }

    pub fn phonon_levels(&self) -> usize {
        self.phonon_cutoff + 1
    }

    pub fn dim(&self) -> usize {
        (1 << self.atoms) * self.phonon_levels() * 2
    }

    pub fn index(&self, s: BasisState) -> usize {
        ((s.excited as usize) * self.phonon_levels() + s.phonons) * 2 + s.rotor.index()
    }

    pub fn state(&self, index: usize) -> BasisState {
        let rotor = if index.is_multiple_of(2) {
            RotorSlot::Lower
        } else {
            RotorSlot::Upper
        };
        let rest = index / 2;
        BasisState {
            excited: (rest / self.phonon_levels()) as u32,
            phonons: rest % self.phonon_levels(),
            rotor,
        }
    }

    /// Bit mask of atom `i` (0-based from the first atom).
    pub fn atom_bit(&self, i: usize) -> u32 {
        1 << (self.atoms - 1 - i)
    }

    pub fn label(&self, index: usize) -> String {
        let s = self.state(index);
        let atoms: String = (0..self.atoms)
            .map(|i| if s.excited & self.atom_bit(i) != 0 { 'e' } else { 'g' })
            .collect();
        let j = match s.rotor {
            RotorSlot::Lower => "j1",
            RotorSlot::Upper => "j2",
        };
        format!("{atoms}_n{}_{j}", s.phonons)
    }
}

/// How the configured γ enters the jump operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpConvention {
    /// L_i = √γ σ₋⁽ⁱ⁾, independent channels; γ is a decay rate.
    #[default]
    Rate,
    /// L_i = γ σ₋⁽ⁱ⁾, independent channels; decay rate γ².
    Amplitude,
    /// L = √γ Σ_i σ₋⁽ⁱ⁾, one collective channel.
    Collective,
}

/// Physical parameters of one cooling step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingParams {
    /// Ω/2π in MHz.
    pub rabi_mhz: f64,
    /// Effective decay rate γ in 1/µs.
    pub gamma_mhz: f64,
    /// Effective Lamb-Dicke parameter.
    pub eta: f64,
    /// Mode displacement entries b_i of each atom.
    pub atom_displacements: Vec<f64>,
    /// Ẽ₀ in kHz (ordinary frequency).
    pub coupling_khz: f64,
    /// ω_p/2π in MHz.
    pub mode_mhz: f64,
    /// Δ/2π in MHz; `None` means the red sideband −ω_p.
    pub detuning_mhz: Option<f64>,
    /// Laser phases φ_i at the atoms, rad.
    pub phases: Vec<f64>,
    pub duration_ms: f64,
}

impl CoolingParams {
    pub fn validate(&self, space: &CompositeSpace) -> Result<()> {
        if !(self.gamma_mhz >= 0.0) {
            return Err(Error::invalid("cooling.gamma_mhz", "must be non-negative"));
        }
        if !(self.rabi_mhz >= 0.0) {
            return Err(Error::invalid("cooling.rabi_mhz", "must be non-negative"));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::invalid("cooling.eta", "must be non-negative"));
        }
        if !(self.duration_ms >= 0.0) {
            return Err(Error::invalid("cooling.duration_ms", "must be non-negative"));
        }
        if self.atom_displacements.len() != space.atoms {
            return Err(Error::invalid(
                "cooling.atom_displacements",
                format!("need {} entries", space.atoms),
            ));
        }
        if self.phases.len() != space.atoms {
            return Err(Error::invalid(
                "cooling.phases",
                format!("need {} entries", space.atoms),
            ));
        }
        if self.eta > 0.3 {
            log::warn!("Lamb-Dicke parameter {} is outside the small-η regime", self.eta);
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        self.detuning_mhz.unwrap_or(-self.mode_mhz)
    }
}

/// Integration and model options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingOptions {
    pub secular: bool,
    pub jump: JumpConvention,
    pub rtol: f64,
    pub atol: f64,
    /// Check Hermiticity, trace and positivity at every record.
    pub check_state: bool,
}

impl Default for CoolingOptions {
    fn default() -> Self {
        Self {
            secular: true,
            jump: JumpConvention::Rate,
            rtol: 1e-9,
            atol: 1e-12,
            check_state: true,
        }
    }
}

/// Sparse operator as (row, col, value) triplets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseOp {
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    fn push(&mut self, r: usize, c: usize, v: Complex64) {
        if v != ZERO {
            self.entries.push((r, c, v));
        }
    }

    fn adjoint(&self) -> SparseOp {
        SparseOp {
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect(),
        }
    }

    fn scaled(&self, s: Complex64) -> SparseOp {
        SparseOp {
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect(),
        }
    }

    pub fn to_dense(&self, dim: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(dim, dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    /// Product self·other, both sparse.
    fn mul(&self, other: &SparseOp, dim: usize) -> SparseOp {
        let dense = self.to_dense(dim) * other.to_dense(dim);
        let mut out = SparseOp::default();
        for r in 0..dim {
            for c in 0..dim {
                out.push(r, c, dense[(r, c)]);
            }
        }
        out
    }
}

fn sigma_plus(space: &CompositeSpace, atom: usize) -> SparseOp {
    let bit = space.atom_bit(atom);
    let mut op = SparseOp::default();
    for idx in 0..space.dim() {
        let s = space.state(idx);
        if s.excited & bit == 0 {
            let t = BasisState {
                excited: s.excited | bit,
                ..s
            };
            op.push(space.index(t), idx, ONE);
        }
    }
    op
}

/// σ₊⁽ⁱ⁾ a (`lower` true) or σ₊⁽ⁱ⁾ a† acting on the phonon ladder.
fn sigma_plus_phonon(space: &CompositeSpace, atom: usize, lower: bool) -> SparseOp {
    let bit = space.atom_bit(atom);
    let mut op = SparseOp::default();
    for idx in 0..space.dim() {
        let s = space.state(idx);
        if s.excited & bit != 0 {
            continue;
        }
        let (n, amp) = if lower {
            if s.phonons == 0 {
                continue;
            }
            (s.phonons - 1, (s.phonons as f64).sqrt())
        } else {
            if s.phonons == space.phonon_cutoff {
                continue;
            }
            (s.phonons + 1, ((s.phonons + 1) as f64).sqrt())
        };
        let t = BasisState {
            excited: s.excited | bit,
            phonons: n,
            rotor: s.rotor,
        };
        op.push(space.index(t), idx, Complex64::new(amp, 0.0));
    }
    op
}

/// a|j₂⟩⟨j₁| + h.c., in units of the coupling.
fn dipole_phonon(space: &CompositeSpace) -> SparseOp {
    let mut op = SparseOp::default();
    for idx in 0..space.dim() {
        let s = space.state(idx);
        if s.rotor == RotorSlot::Lower && s.phonons > 0 {
            let t = BasisState {
                phonons: s.phonons - 1,
                rotor: RotorSlot::Upper,
                ..s
            };
            let amp = Complex64::new((s.phonons as f64).sqrt(), 0.0);
            op.push(space.index(t), idx, amp);
            op.push(idx, space.index(t), amp);
        }
    }
    op
}

/// Interaction-picture Hamiltonian as harmonic groups: H(t) = Σ_g e^{iν_g t} O_g.
#[derive(Debug, Clone)]
pub struct HarmonicHamiltonian {
    pub dim: usize,
    pub groups: Vec<(f64, SparseOp)>,
}

impl HarmonicHamiltonian {
    pub fn build(space: &CompositeSpace, params: &CoolingParams, secular: bool) -> Result<Self> {
        params.validate(space)?;
        let omega = units::mhz_to_rad_per_us(params.rabi_mhz);
        let delta = units::mhz_to_rad_per_us(params.detuning());
        let wp = units::mhz_to_rad_per_us(params.mode_mhz);
        let coupling = units::khz_to_rad_per_us(params.coupling_khz);
        let resonance_floor = 1e-9 * wp.abs().max(1.0);

        let mut raw: Vec<(f64, SparseOp)> = Vec::new();
        for atom in 0..space.atoms {
            let phase = Complex64::from_polar(0.5 * omega, params.phases[atom]);
            let ld = I * params.eta * params.atom_displacements[atom];
            raw.push((delta, sigma_plus(space, atom).scaled(phase)));
            raw.push((delta + wp, sigma_plus_phonon(space, atom, true).scaled(phase * ld)));
            raw.push((delta - wp, sigma_plus_phonon(space, atom, false).scaled(phase * ld)));
        }

        let mut groups: Vec<(f64, SparseOp)> = vec![(0.0, dipole_phonon(space).scaled(Complex64::new(coupling, 0.0)))];
        let mut add = |freq: f64, op: SparseOp| {
            let freq = if freq.abs() <= resonance_floor { 0.0 } else { freq };
            if let Some(g) = groups.iter_mut().find(|g| g.0 == freq) {
                g.1.entries.extend(op.entries);
            } else {
                groups.push((freq, op));
            }
        };
        for (freq, op) in raw {
            if op.entries.is_empty() || (secular && freq.abs() > resonance_floor) {
                continue;
            }
            let adj = op.adjoint();
            add(freq, op);
            add(-freq, adj);
        }
        Ok(Self {
            dim: space.dim(),
            groups,
        })
    }

    pub fn at(&self, t: f64) -> DMatrix<Complex64> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for (freq, op) in &self.groups {
            let ph = Complex64::from_polar(1.0, freq * t);
            for &(r, c, v) in &op.entries {
                h[(r, c)] += v * ph;
            }
        }
        h
    }

    pub fn max_frequency(&self) -> f64 {
        self.groups.iter().map(|g| g.0.abs()).fold(0.0, f64::max)
    }
}

/// H(t) at time t (µs) in rad/µs, as a dense Hermitian matrix.
pub fn build_interaction_hamiltonian(
    space: &CompositeSpace,
    params: &CoolingParams,
    t: f64,
) -> Result<DMatrix<Complex64>> {
    Ok(HarmonicHamiltonian::build(space, params, false)?.at(t))
}

/// Jump operators for the chosen convention.
pub fn jump_operators(space: &CompositeSpace, gamma: f64, convention: JumpConvention) -> Vec<SparseOp> {
    let lowering: Vec<SparseOp> = (0..space.atoms).map(|i| sigma_plus(space, i).adjoint()).collect();
    match convention {
        JumpConvention::Rate => lowering
            .iter()
            .map(|l| l.scaled(Complex64::new(gamma.sqrt(), 0.0)))
            .collect(),
        JumpConvention::Amplitude => lowering.iter().map(|l| l.scaled(Complex64::new(gamma, 0.0))).collect(),
        JumpConvention::Collective => {
            let mut sum = SparseOp::default();
            for l in &lowering {
                sum.entries.extend(l.scaled(Complex64::new(gamma.sqrt(), 0.0)).entries);
            }
            vec![sum]
        }
    }
}

struct LindbladSystem {
    dim: usize,
    hamiltonian: HarmonicHamiltonian,
    jumps: Vec<SparseOp>,
    /// −½ Σ L†L
    damping: SparseOp,
}

impl LindbladSystem {
    fn new(space: &CompositeSpace, hamiltonian: HarmonicHamiltonian, gamma: f64, jump: JumpConvention) -> Self {
        let dim = space.dim();
        let jumps = if gamma > 0.0 {
            jump_operators(space, gamma, jump)
        } else {
            Vec::new()
        };
        let mut damping = SparseOp::default();
        for l in &jumps {
            damping
                .entries
                .extend(l.adjoint().mul(l, dim).scaled(Complex64::new(-0.5, 0.0)).entries);
        }
        Self {
            dim,
            hamiltonian,
            jumps,
            damping,
        }
    }
}

impl ComplexSystem for LindbladSystem {
    fn rhs(&self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.dim;
        // W = −iHρ − ½ Σ L†L ρ, then dρ = W + W† + Σ LρL†.
        let mut w = vec![ZERO; d * d];
        for (freq, op) in &self.hamiltonian.groups {
            let ph = Complex64::from_polar(1.0, freq * t) * -I;
            for &(r, c, v) in &op.entries {
                let coeff = v * ph;
                let (dst, src) = (&mut w[r * d..(r + 1) * d], &rho[c * d..(c + 1) * d]);
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += coeff * y;
                }
            }
        }
        for &(r, c, v) in &self.damping.entries {
            let (dst, src) = (&mut w[r * d..(r + 1) * d], &rho[c * d..(c + 1) * d]);
            for (x, y) in dst.iter_mut().zip(src) {
                *x += v * y;
            }
        }
        for r in 0..d {
            for c in 0..d {
                out[r * d + c] = w[r * d + c] + w[c * d + r].conj();
            }
        }
        for l in &self.jumps {
            // Z = Lρ, then out += Z L†
            let mut z = vec![ZERO; d * d];
            for &(r, c, v) in &l.entries {
                let (dst, src) = (&mut z[r * d..(r + 1) * d], &rho[c * d..(c + 1) * d]);
                for (x, y) in dst.iter_mut().zip(src) {
                    *x += v * y;
                }
            }
            for &(s, b, v) in &l.entries {
                let vc = v.conj();
                for r in 0..d {
                    out[r * d + s] += z[r * d + b] * vc;
                }
            }
        }
    }
}

/// Hermitian, unit-trace state over a [`CompositeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(pub DMatrix<Complex64>);

impl DensityMatrix {
    /// Product state: all atoms ground, diagonal phonon and rotor distributions.
    pub fn ground_atoms(space: &CompositeSpace, phonons: &[f64], rotor: [f64; 2]) -> Result<Self> {
        if phonons.len() != space.phonon_levels() {
            return Err(Error::invalid(
                "phonons",
                format!("need {} entries", space.phonon_levels()),
            ));
        }
        let mut m = DMatrix::zeros(space.dim(), space.dim());
        for (n, p) in phonons.iter().enumerate() {
            for (slot, q) in [(RotorSlot::Lower, rotor[0]), (RotorSlot::Upper, rotor[1])] {
                let idx = space.index(BasisState {
                    excited: 0,
                    phonons: n,
                    rotor: slot,
                });
                m[(idx, idx)] = Complex64::new(p * q, 0.0);
            }
        }
        Ok(Self(m))
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.0.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    fn from_flat(d: usize, y: &[Complex64]) -> Self {
        Self(DMatrix::from_row_slice(d, d, y))
    }

    fn to_flat(&self) -> Vec<Complex64> {
        let d = self.0.nrows();
        let mut v = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                v.push(self.0[(r, c)]);
            }
        }
        v
    }

    /// Reduced 2×2 rotor matrix over (j₁, j₂).
    pub fn reduced_rotor(&self, space: &CompositeSpace) -> [[Complex64; 2]; 2] {
        let mut out = [[ZERO; 2]; 2];
        for idx in 0..space.dim() {
            let s = space.state(idx);
            if s.rotor != RotorSlot::Lower {
                continue;
            }
            let partner = space.index(BasisState {
                rotor: RotorSlot::Upper,
                ..s
            });
            out[0][0] += self.0[(idx, idx)];
            out[1][1] += self.0[(partner, partner)];
            out[0][1] += self.0[(idx, partner)];
            out[1][0] += self.0[(partner, idx)];
        }
        out
    }

    pub fn phonon_populations(&self, space: &CompositeSpace) -> Vec<f64> {
        let mut out = vec![0.0; space.phonon_levels()];
        for idx in 0..space.dim() {
            out[space.state(idx).phonons] += self.0[(idx, idx)].re;
        }
        out
    }

    pub fn excited_population(&self, space: &CompositeSpace, atom: usize) -> f64 {
        let bit = space.atom_bit(atom);
        (0..space.dim())
            .filter(|&i| space.state(i).excited & bit != 0)
            .map(|i| self.0[(i, i)].re)
            .sum()
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingRecord {
    pub time_ms: f64,
    pub populations: Vec<f64>,
    /// Populations of (j₁, j₂).
    pub rotor: [f64; 2],
    pub phonons: Vec<f64>,
    pub trace: f64,
    pub purity: f64,
    pub min_eigenvalue: f64,
}

impl CoolingRecord {
    fn from_state(space: &CompositeSpace, time_ms: f64, rho: &DensityMatrix, eigen: bool) -> Self {
        let r = rho.reduced_rotor(space);
        Self {
            time_ms,
            populations: rho.populations(),
            rotor: [r[0][0].re, r[1][1].re],
            phonons: rho.phonon_populations(space),
            trace: rho.trace(),
            purity: rho.purity(),
            min_eigenvalue: if eigen { rho.min_eigenvalue() } else { f64::NAN },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<CoolingRecord>,
    pub final_state: DensityMatrix,
    pub steps: usize,
}

const TRACE_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;

fn record_times(duration_ms: f64, record_every_ms: f64) -> Vec<f64> {
    let mut times = Vec::new();
    if record_every_ms > 0.0 {
        let n = (duration_ms / record_every_ms - 1e-9).floor() as usize;
        times.extend((1..=n).map(|k| k as f64 * record_every_ms));
    }
    if times.last().is_none_or(|&t| t < duration_ms) && duration_ms > 0.0 {
        times.push(duration_ms);
    }
    times
}

/// Lindblad evolution of ρ₀ for `params.duration_ms`, recording every `record_every_ms`
/// (the initial state is recorded at t = 0).
pub fn propagate(
    space: &CompositeSpace,
    rho0: &DensityMatrix,
    params: &CoolingParams,
    options: &CoolingOptions,
    record_every_ms: f64,
) -> Result<Trajectory> {
    let hamiltonian = HarmonicHamiltonian::build(space, params, options.secular)?;
    let max_freq = hamiltonian.max_frequency();
    let system = LindbladSystem::new(space, hamiltonian, params.gamma_mhz, options.jump);
    let d = space.dim();
    if rho0.0.nrows() != d {
        return Err(Error::invalid(
            "rho0",
            format!("dimension {} does not match space {d}", rho0.0.nrows()),
        ));
    }
    let mut control = StepControl {
        rtol: options.rtol,
        atol: options.atol,
        ..StepControl::default()
    };
    if max_freq > 0.0 {
        control.max_step = 1.0 / (20.0 * params.mode_mhz.abs().max(max_freq / (2.0 * std::f64::consts::PI * 2.0)));
        control.initial_step = control.max_step;
    }

    let checks = options.check_state;
    let mut records = vec![CoolingRecord::from_state(space, 0.0, rho0, checks)];
    let times_ms = record_times(params.duration_ms, record_every_ms);
    let times_us: Vec<f64> = times_ms.iter().map(|&t| units::ms_to_us(t)).collect();
    let trace0 = rho0.trace();
    let (y, stats) = ode::integrate(&system, 0.0, &rho0.to_flat(), &times_us, &control, |t, y| {
        let rho = DensityMatrix::from_flat(d, y);
        let rec = CoolingRecord::from_state(space, t * 1e-3, &rho, checks);
        if checks {
            let herm = rho.hermiticity_error();
            if herm > HERMITIAN_TOL {
                return Err(Error::Propagation {
                    time: t,
                    reason: format!("Hermiticity error {herm:.3e}"),
                });
            }
            if (rec.trace - trace0).abs() > TRACE_TOL {
                return Err(Error::Propagation {
                    time: t,
                    reason: format!("trace drifted to {:.12}", rec.trace),
                });
            }
            if rec.min_eigenvalue < -POSITIVITY_TOL {
                return Err(Error::Propagation {
                    time: t,
                    reason: format!("negative eigenvalue {:.3e}", rec.min_eigenvalue),
                });
            }
        }
        records.push(rec);
        Ok(())
    })?;
    Ok(Trajectory {
        records,
        final_state: DensityMatrix::from_flat(d, &y),
        steps: stats.accepted,
    })
}

/// Linear map of the rotor 2×2 block through one cooling step, for a fixed
/// atom (ground) and phonon initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingChannel {
    /// Outputs for the inputs |j₁⟩⟨j₁|, |j₂⟩⟨j₂|, X = |j₁⟩⟨j₂| + h.c., Y = i|j₁⟩⟨j₂| − i|j₂⟩⟨j₁|.
    outputs: [[[Complex64; 2]; 2]; 4],
    /// Final phonon distribution for each diagonal input.
    phonons: [Vec<f64>; 2],
}

impl CoolingChannel {
    /// The identity channel (an uncoupled block).
    pub fn identity(phonons: &[f64]) -> Self {
        let mut outputs = [[[ZERO; 2]; 2]; 4];
        outputs[0][0][0] = ONE;
        outputs[1][1][1] = ONE;
        outputs[2][0][1] = ONE;
        outputs[2][1][0] = ONE;
        outputs[3][0][1] = I;
        outputs[3][1][0] = -I;
        Self {
            outputs,
            phonons: [phonons.to_vec(), phonons.to_vec()],
        }
    }

    pub fn build(
        space: &CompositeSpace,
        phonons: &[f64],
        params: &CoolingParams,
        options: &CoolingOptions,
    ) -> Result<Self> {
        if params.coupling_khz == 0.0 {
            return Ok(Self::identity(phonons));
        }
        let lower = DensityMatrix::ground_atoms(space, phonons, [1.0, 0.0])?;
        let upper = DensityMatrix::ground_atoms(space, phonons, [0.0, 1.0])?;
        let mut x = DensityMatrix(DMatrix::zeros(space.dim(), space.dim()));
        let mut y = x.clone();
        for (n, p) in phonons.iter().enumerate() {
            let a = space.index(BasisState {
                excited: 0,
                phonons: n,
                rotor: RotorSlot::Lower,
            });
            let b = space.index(BasisState {
                excited: 0,
                phonons: n,
                rotor: RotorSlot::Upper,
            });
            x.0[(a, b)] = Complex64::new(*p, 0.0);
            x.0[(b, a)] = Complex64::new(*p, 0.0);
            y.0[(a, b)] = I * *p;
            y.0[(b, a)] = -I * *p;
        }
        let mut opts = *options;
        let mut outputs = [[[ZERO; 2]; 2]; 4];
        let mut phonon_out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (k, input) in [lower, upper, x, y].iter().enumerate() {
            // Traceless inputs are not states; skip the positivity checks for them.
            opts.check_state = options.check_state && k < 2;
            let traj = propagate(space, input, params, &opts, params.duration_ms)?;
            outputs[k] = traj.final_state.reduced_rotor(space);
            if k < 2 {
                phonon_out[k] = traj.final_state.phonon_populations(space);
            }
        }
        Ok(Self {
            outputs,
            phonons: phonon_out,
        })
    }

    /// Apply to a rotor 2×2 density block.
    pub fn apply(&self, rho: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let w = [rho[0][0].re, rho[1][1].re, rho[0][1].re, rho[0][1].im];
        let mut out = [[ZERO; 2]; 2];
        for (map, wk) in self.outputs.iter().zip(w) {
            for (out_row, map_row) in out.iter_mut().zip(map) {
                for (o, m) in out_row.iter_mut().zip(map_row) {
                    *o += m * wk;
                }
            }
        }
        out
    }

    /// Final phonon distribution for diagonal rotor populations (unnormalized).
    pub fn phonons_for(&self, rotor: [f64; 2]) -> Vec<f64> {
        self.phonons[0]
            .iter()
            .zip(&self.phonons[1])
            .map(|(a, b)| rotor[0] * a + rotor[1] * b)
            .collect()
    }
}

/// Diagonal rotor/phonon content of one M block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPopulations {
    pub m: i64,
    /// Populations of (j₁, j₂); need not sum to one.
    pub rotor: [f64; 2],
    /// Phonon distribution, normalized.
    pub phonons: Vec<f64>,
}

/// One cooling step on every M block; the coupling of block M is `coupling_khz(M)`.
/// Blocks with zero coupling (M = 0) are returned unchanged.
pub fn cool_one_step(
    space: &CompositeSpace,
    blocks: &[BlockPopulations],
    params: &CoolingParams,
    coupling_khz: impl Fn(i64) -> f64 + Sync,
    options: &CoolingOptions,
) -> Result<Vec<BlockPopulations>> {
    use rayon::prelude::*;
    blocks
        .par_iter()
        .map(|block| {
            let g = coupling_khz(block.m);
            let total = block.rotor[0] + block.rotor[1];
            if g == 0.0 || total == 0.0 {
                return Ok(block.clone());
            }
            let p = CoolingParams {
                coupling_khz: g,
                ..params.clone()
            };
            let rotor = [block.rotor[0] / total, block.rotor[1] / total];
            let rho0 = DensityMatrix::ground_atoms(space, &block.phonons, rotor)?;
            let traj = propagate(space, &rho0, &p, options, p.duration_ms)?;
            let r = traj.final_state.reduced_rotor(space);
            Ok(BlockPopulations {
                m: block.m,
                rotor: [r[0][0].re * total, r[1][1].re * total],
                phonons: traj.final_state.phonon_populations(space),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn params(coupling: f64) -> CoolingParams {
        CoolingParams {
            rabi_mhz: 0.2,
            gamma_mhz: 0.1,
            eta: 0.012,
            atom_displacements: vec![1.0, 1.0],
            coupling_khz: coupling,
            mode_mhz: 8.8,
            detuning_mhz: None,
            phases: vec![0.0, 0.0],
            duration_ms: 0.2,
        }
    }

    #[test]
    fn index_map_is_bijective() {
        let space = CompositeSpace::default();
        assert_eq!(space.dim(), 24);
        for i in 0..space.dim() {
            assert_eq!(space.index(space.state(i)), i);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let space = CompositeSpace::default();
        let h = build_interaction_hamiltonian(&space, &params(2.7), 0.37).unwrap();
        assert!((&h - h.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn dipole_phonon_block_has_coupling_magnitude() {
        let space = CompositeSpace::default();
        let mut p = params(2.7);
        p.rabi_mhz = 0.0;
        let h = build_interaction_hamiltonian(&space, &p, 0.0).unwrap();
        let a = space.index(BasisState {
            excited: 0,
            phonons: 1,
            rotor: RotorSlot::Lower,
        });
        let b = space.index(BasisState {
            excited: 0,
            phonons: 0,
            rotor: RotorSlot::Upper,
        });
        assert!((h[(b, a)].norm() - units::khz_to_rad_per_us(2.7)).abs() < 1e-15);
    }

    #[test]
    fn sideband_amplitude_at_t0() {
        let space = CompositeSpace::default();
        let mut p = params(0.0);
        p.detuning_mhz = Some(0.0);
        let h = build_interaction_hamiltonian(&space, &p, 0.0).unwrap();
        let g1 = space.index(BasisState {
            excited: 0,
            phonons: 1,
            rotor: RotorSlot::Lower,
        });
        let e0 = space.index(BasisState {
            excited: space.atom_bit(0),
            phonons: 0,
            rotor: RotorSlot::Lower,
        });
        let omega = units::mhz_to_rad_per_us(0.2);
        assert!((h[(e0, g1)].norm() - omega * 0.012 / 2.0).abs() < 1e-14);
    }
}
