//! Equilibrium positions and normal modes of a linear chain of ions with unequal masses.
//!
//! Internally the chain is solved in natural units: masses relative to the
//! reference species, stiffness relative to m_ref·ω_x², lengths relative to
//! ℓ = (e²/(4πε₀ m_ref ω_x²))^{1/3}.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleKind {
    Atom,
    Molecule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    /// Mass in u.
    pub mass: f64,
    /// Charge in units of e.
    #[serde(default = "unit_charge")]
    pub charge: f64,
    pub kind: ParticleKind,
}

fn unit_charge() -> f64 {
    1.0
}

impl Particle {
    pub fn atom(mass: f64) -> Self {
        Self {
            mass,
            charge: 1.0,
            kind: ParticleKind::Atom,
        }
    }

    pub fn molecule(mass: f64) -> Self {
        Self {
            mass,
            charge: 1.0,
            kind: ParticleKind::Molecule,
        }
    }
}

/// How the quoted trap frequencies map onto particles of different mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassScaling {
    /// Radial ∝ 1/m, axial ∝ 1/√m relative to the reference species.
    Pseudopotential,
    /// Every particle sees the quoted frequencies.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceSpecies {
    Molecule,
    Atom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonChainSpec {
    pub particles: Vec<Particle>,
    /// Axial trap frequency ω_x in MHz.
    pub axial_mhz: f64,
    /// Radial trap frequency ω_z in MHz.
    pub radial_mhz: f64,
    pub reference: ReferenceSpecies,
    pub scaling: MassScaling,
}

impl IonChainSpec {
    /// Atom–molecule–atom chain.
    pub fn sandwich(atom_mass: f64, molecule_mass: f64, axial_mhz: f64, radial_mhz: f64, scaling: MassScaling) -> Self {
        Self {
            particles: vec![
                Particle::atom(atom_mass),
                Particle::molecule(molecule_mass),
                Particle::atom(atom_mass),
            ],
            axial_mhz,
            radial_mhz,
            reference: ReferenceSpecies::Molecule,
            scaling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.particles.len() < 2 {
            return Err(Error::invalid("chain.particles", "need at least two particles"));
        }
        for (i, p) in self.particles.iter().enumerate() {
            if !(p.mass > 0.0) {
                return Err(Error::invalid(format!("chain.particles[{i}].mass"), "must be positive"));
            }
            if !(p.charge > 0.0) {
                return Err(Error::invalid(
                    format!("chain.particles[{i}].charge"),
                    "must be positive",
                ));
            }
        }
        if !(self.axial_mhz > 0.0) {
            return Err(Error::invalid("chain.axial_mhz", "must be positive"));
        }
        if !(self.radial_mhz > 0.0) {
            return Err(Error::invalid("chain.radial_mhz", "must be positive"));
        }
        Ok(())
    }

    pub fn molecule_index(&self) -> Option<usize> {
        self.particles.iter().position(|p| p.kind == ParticleKind::Molecule)
    }

    /// Mass of the species the quoted frequencies refer to; falls back to the first particle.
    pub fn reference_mass(&self) -> f64 {
        let kind = match self.reference {
            ReferenceSpecies::Molecule => ParticleKind::Molecule,
            ReferenceSpecies::Atom => ParticleKind::Atom,
        };
        self.particles
            .iter()
            .find(|p| p.kind == kind)
            .unwrap_or(&self.particles[0])
            .mass
    }

    /// Per-particle (axial, radial) frequencies in MHz.
    pub fn particle_frequencies(&self) -> Vec<(f64, f64)> {
        let m_ref = self.reference_mass();
        self.particles
            .iter()
            .map(|p| match self.scaling {
                MassScaling::Pseudopotential => (
                    self.axial_mhz * (m_ref / p.mass).sqrt(),
                    self.radial_mhz * m_ref / p.mass,
                ),
                MassScaling::None => (self.axial_mhz, self.radial_mhz),
            })
            .collect()
    }

    /// Natural length ℓ in µm.
    pub fn length_scale_um(&self) -> f64 {
        let m = self.reference_mass() * units::ATOMIC_MASS_UNIT;
        let w = units::mhz_to_rad_per_s(self.axial_mhz);
        (units::coulomb_energy_length() / (m * w * w)).cbrt() * 1e6
    }

    fn reduced_masses(&self) -> Vec<f64> {
        let m_ref = self.reference_mass();
        self.particles.iter().map(|p| p.mass / m_ref).collect()
    }

    fn charges(&self) -> Vec<f64> {
        self.particles.iter().map(|p| p.charge).collect()
    }

    /// Axial spring constants k_i / (m_ref ω_x²).
    fn axial_stiffness(&self) -> Vec<f64> {
        let mu = self.reduced_masses();
        self.particle_frequencies()
            .iter()
            .zip(&mu)
            .map(|((ax, _), m)| m * (ax / self.axial_mhz).powi(2))
            .collect()
    }
}

const GRADIENT_TOL: f64 = 1e-12;
const MAX_NEWTON: usize = 200;

fn energy(z: &[f64], k: &[f64], q: &[f64]) -> f64 {
    let mut e = 0.0;
    for i in 0..z.len() {
        e += 0.5 * k[i] * z[i] * z[i];
        for j in (i + 1)..z.len() {
            e += q[i] * q[j] / (z[j] - z[i]).abs();
        }
    }
    e
}

fn gradient(z: &[f64], k: &[f64], q: &[f64]) -> DVector<f64> {
    let n = z.len();
    DVector::from_fn(n, |i, _| {
        let mut g = k[i] * z[i];
        for j in 0..n {
            if j != i {
                let d = z[i] - z[j];
                g -= q[i] * q[j] * d.signum() / (d * d);
            }
        }
        g
    })
}

/// Axial Hessian of the potential in natural units (not mass weighted).
fn axial_hessian(z: &[f64], k: &[f64], q: &[f64]) -> DMatrix<f64> {
    let n = z.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = k[i];
        for j in 0..n {
            if j != i {
                let c = 2.0 * q[i] * q[j] / (z[i] - z[j]).abs().powi(3);
                h[(i, i)] += c;
                h[(i, j)] = -c;
            }
        }
    }
    h
}

fn ordered(z: &[f64]) -> bool {
    z.windows(2).all(|w| w[1] > w[0])
}

/// Equilibrium positions in natural units.
fn equilibrium_natural(chain: &IonChainSpec) -> Result<Vec<f64>> {
    let n = chain.particles.len();
    let k = chain.axial_stiffness();
    let q = chain.charges();
    let mut z: Vec<f64> = (0..n).map(|i| i as f64 - 0.5 * (n as f64 - 1.0)).collect();
    let mut g = gradient(&z, &k, &q);
    for _ in 0..MAX_NEWTON {
        if g.norm() < GRADIENT_TOL {
            return Ok(z);
        }
        let h = axial_hessian(&z, &k, &q);
        let step = h.cholesky().map(|c| c.solve(&g)).unwrap_or_else(|| g.clone());
        let e0 = energy(&z, &k, &q);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(zi, si)| zi - t * si).collect();
            if ordered(&trial) && energy(&trial, &k, &q) <= e0 + 1e-14 * e0.abs() {
                z = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::Convergence {
                    residual: g.norm(),
                    iterations: MAX_NEWTON,
                });
            }
        }
        g = gradient(&z, &k, &q);
    }
    if g.norm() < GRADIENT_TOL {
        Ok(z)
    } else {
        Err(Error::Convergence {
            residual: g.norm(),
            iterations: MAX_NEWTON,
        })
    }
}

/// Axial equilibrium positions in µm.
pub fn equilibrium_positions(chain: &IonChainSpec) -> Result<Vec<f64>> {
    chain.validate()?;
    let scale = chain.length_scale_um();
    Ok(equilibrium_natural(chain)?.into_iter().map(|z| z * scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeAxis {
    Axial,
    Radial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMode {
    pub axis: ModeAxis,
    /// Mode frequency ω_p in MHz.
    pub frequency: f64,
    /// Mass-weighted displacement vector, unit norm, one entry per particle.
    pub vector: Vec<f64>,
    pub label: String,
    pub zigzag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalModeSet {
    /// Axial equilibrium positions in µm.
    pub positions: Vec<f64>,
    pub modes: Vec<NormalMode>,
    pub molecule_index: Option<usize>,
}

impl NormalModeSet {
    pub fn mode(&self, label: &str) -> Result<&NormalMode> {
        let wanted = label.trim().to_ascii_lowercase();
        if wanted == "zigzag" || wanted == "zig-zag" {
            return self.zigzag();
        }
        self.modes
            .iter()
            .find(|m| m.label == wanted)
            .ok_or_else(|| Error::UnknownMode(label.to_string()))
    }

    pub fn zigzag(&self) -> Result<&NormalMode> {
        self.modes
            .iter()
            .find(|m| m.zigzag)
            .ok_or_else(|| Error::UnknownMode("zigzag".into()))
    }

    pub fn axial(&self) -> impl Iterator<Item = &NormalMode> {
        self.modes.iter().filter(|m| m.axis == ModeAxis::Axial)
    }

    pub fn radial(&self) -> impl Iterator<Item = &NormalMode> {
        self.modes.iter().filter(|m| m.axis == ModeAxis::Radial)
    }
}

fn mass_weight(h: &DMatrix<f64>, mu: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] / (mu[i] * mu[j]).sqrt())
}

/// Mass-weighted axial and radial Hessians at equilibrium, in units of ω_x².
pub fn mass_weighted_hessians(chain: &IonChainSpec) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    chain.validate()?;
    let z = equilibrium_natural(chain)?;
    let k = chain.axial_stiffness();
    let q = chain.charges();
    let mu = chain.reduced_masses();
    let n = z.len();
    let axial = axial_hessian(&z, &k, &q);

    let mut radial = DMatrix::zeros(n, n);
    for (i, (_, wr)) in chain.particle_frequencies().iter().enumerate() {
        radial[(i, i)] = mu[i] * (wr / chain.axial_mhz).powi(2);
        for j in 0..n {
            if j != i {
                let c = q[i] * q[j] / (z[i] - z[j]).abs().powi(3);
                radial[(i, i)] -= c;
                radial[(i, j)] = c;
            }
        }
    }
    Ok((mass_weight(&axial, &mu), mass_weight(&radial, &mu), z))
}

fn alternates(v: &[f64]) -> bool {
    let floor = 1e-9;
    v.iter().all(|x| x.abs() > floor) && v.windows(2).all(|w| w[0] * w[1] < 0.0)
}

fn diagonalize(h: DMatrix<f64>, axis: ModeAxis, axial_mhz: f64) -> Result<Vec<NormalMode>> {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let prefix = match axis {
        ModeAxis::Axial => "axial",
        ModeAxis::Radial => "radial",
    };
    let mut modes = Vec::with_capacity(n);
    for (rank, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        let label = format!("{prefix}-{rank}");
        let mut v: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        if lambda <= 0.0 {
            let what = if alternates(&v) {
                format!("{label} (zig-zag)")
            } else {
                label
            };
            return Err(Error::Instability {
                mode: what,
                omega_sq: lambda * axial_mhz * axial_mhz,
            });
        }
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        modes.push(NormalMode {
            axis,
            frequency: lambda.sqrt() * axial_mhz,
            vector: v,
            label,
            zigzag: false,
        });
    }
    Ok(modes)
}

pub fn normal_modes(chain: &IonChainSpec) -> Result<NormalModeSet> {
    let (axial, radial, z) = mass_weighted_hessians(chain)?;
    let mut modes = diagonalize(axial, ModeAxis::Axial, chain.axial_mhz)?;
    let mut radial_modes = diagonalize(radial, ModeAxis::Radial, chain.axial_mhz)?;
    // Lowest-frequency fully alternating radial mode is the zig-zag.
    if let Some(m) = radial_modes.iter_mut().find(|m| alternates(&m.vector)) {
        m.zigzag = true;
    }
    modes.append(&mut radial_modes);
    let scale = chain.length_scale_um();
    Ok(NormalModeSet {
        positions: z.into_iter().map(|x| x * scale).collect(),
        modes,
        molecule_index: chain.molecule_index(),
    })
}

/// Molecule entry b_m of the labeled mode's displacement vector.
pub fn molecule_displacement(modes: &NormalModeSet, label: &str) -> Result<f64> {
    let idx = modes
        .molecule_index
        .ok_or_else(|| Error::invalid("chain.particles", "no molecule in chain"))?;
    Ok(modes.mode(label)?.vector[idx])
}
