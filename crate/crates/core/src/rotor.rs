//! Rigid asymmetric-top levels in representation Iʳ (a ↔ z) and space-frame dipole elements.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{w3j, BodyAxis};
use crate::error::{Error, Result};

/// Molecular input record: mass in u, rotational constants in MHz, dipole in Debye.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    pub name: String,
    pub mass: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub mu_a: f64,
    #[serde(default)]
    pub mu_b: f64,
    #[serde(default)]
    pub mu_c: f64,
}

impl MoleculeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::invalid("molecule.mass", "must be positive"));
        }
        if !(self.a >= self.b && self.b >= self.c && self.c > 0.0) {
            return Err(Error::invalid(
                "molecule",
                "rotational constants must satisfy A >= B >= C > 0",
            ));
        }
        Ok(())
    }

    pub fn has_dipole(&self) -> bool {
        self.mu_a != 0.0 || self.mu_b != 0.0 || self.mu_c != 0.0
    }

    /// Body-frame dipole used for matrix elements. A molecule without tabulated
    /// components is treated as a unit a-axis dipole, so couplings come out per Debye.
    pub fn effective_dipole(&self) -> [f64; 3] {
        if self.has_dipole() {
            [self.mu_a, self.mu_b, self.mu_c]
        } else {
            [1.0, 0.0, 0.0]
        }
    }
}

/// Asymmetric-top label J_{Ka,Kc}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LevelLabel {
    pub j: i64,
    pub ka: i64,
    pub kc: i64,
}

impl LevelLabel {
    pub fn new(j: i64, ka: i64, kc: i64) -> Result<Self> {
        let ok = j >= 0 && (0..=j).contains(&ka) && (0..=j).contains(&kc) && (ka + kc == j || ka + kc == j + 1);
        if !ok {
            return Err(Error::UnknownLevel(format!("J={j} Ka={ka} Kc={kc}")));
        }
        Ok(Self { j, ka, kc })
    }

    /// Position of this label in the ascending-energy sequence of its J block.
    pub fn index_in_block(self) -> usize {
        // sequence (0,J),(1,J),(1,J-1),(2,J-1),... : i = Ka + (J - Kc)
        (self.ka + (self.j - self.kc)) as usize
    }

    fn from_block_index(j: i64, i: usize) -> Self {
        let i = i as i64;
        Self {
            j,
            ka: (i + 1) / 2,
            kc: j - i / 2,
        }
    }
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ka < 10 && self.kc < 10 {
            write!(f, "{}_{}{}", self.j, self.ka, self.kc)
        } else {
            write!(f, "{}_{}_{}", self.j, self.ka, self.kc)
        }
    }
}

impl FromStr for LevelLabel {
    type Err = Error;

    /// Accepts "3_31", "3_3_1" and "3,3,1".
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownLevel(s.to_string());
        let parts: Vec<&str> = s.trim().split([',', '_']).map(str::trim).collect();
        let nums: Vec<i64> = match parts.as_slice() {
            [j, k] if k.len() == 2 => {
                let mut chars = k.chars();
                let ka = chars.next().and_then(|c| c.to_digit(10)).ok_or_else(bad)? as i64;
                let kc = chars.next().and_then(|c| c.to_digit(10)).ok_or_else(bad)? as i64;
                vec![j.parse().map_err(|_| bad())?, ka, kc]
            }
            [j, ka, kc] => vec![
                j.parse().map_err(|_| bad())?,
                ka.parse().map_err(|_| bad())?,
                kc.parse().map_err(|_| bad())?,
            ],
            _ => return Err(bad()),
        };
        LevelLabel::new(nums[0], nums[1], nums[2]).map_err(|_| bad())
    }
}

/// One asymmetric-top eigenlevel; energy in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotLevel {
    pub label: LevelLabel,
    pub energy: f64,
}

/// A rotational eigenstate with space projection M.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RotState {
    pub level: LevelLabel,
    pub m: i64,
}

impl RotState {
    pub fn new(level: LevelLabel, m: i64) -> Result<Self> {
        if m.abs() > level.j {
            return Err(Error::UnknownLevel(format!("{level} with M={m}")));
        }
        Ok(Self { level, m })
    }
}

impl fmt::Display for RotState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(M={})", self.level, self.m)
    }
}

/// Eigenlevels of one J block; eigenvector columns follow `levels`, rows are K = -J..J.
#[derive(Debug, Clone)]
pub struct RotorBlock {
    pub j: i64,
    pub levels: Vec<RotLevel>,
    pub eigenvectors: DMatrix<f64>,
}

/// Rigid-rotor Hamiltonian A·Ja² + B·Jb² + C·Jc² in the symmetric-top K basis (MHz).
pub fn rotor_hamiltonian(spec: &MoleculeSpec, j: i64) -> DMatrix<f64> {
    let dim = (2 * j + 1) as usize;
    let jj = (j * (j + 1)) as f64;
    let mut h = DMatrix::zeros(dim, dim);
    let bc_mean = 0.5 * (spec.b + spec.c);
    let bc_diff = 0.25 * (spec.b - spec.c);
    for k in -j..=j {
        let i = (k + j) as usize;
        let kf = k as f64;
        h[(i, i)] = bc_mean * (jj - kf * kf) + spec.a * kf * kf;
        if k + 2 <= j {
            let v = bc_diff * ((jj - kf * (kf + 1.0)) * (jj - (kf + 1.0) * (kf + 2.0))).sqrt();
            h[(i + 2, i)] = v;
            h[(i, i + 2)] = v;
        }
    }
    h
}

pub fn build_rotor_block(spec: &MoleculeSpec, j: i64) -> RotorBlock {
    let h = rotor_hamiltonian(spec, j);
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));

    let mut eigenvectors = DMatrix::zeros(dim, dim);
    let mut levels = Vec::with_capacity(dim);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
        if pivot < 0.0 {
            v.neg_mut();
        }
        eigenvectors.set_column(col, &v);
        levels.push(RotLevel {
            label: LevelLabel::from_block_index(j, col),
            energy: eig.eigenvalues[src],
        });
    }
    RotorBlock {
        j,
        levels,
        eigenvectors,
    }
}

/// Space-frame field axis for dipole elements, including circular components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldAxis {
    X,
    Y,
    Z,
    #[serde(rename = "sigma+")]
    SigmaPlus,
    #[serde(rename = "sigma-")]
    SigmaMinus,
}

impl FieldAxis {
    /// Cartesian unit vector (x, y, z) of this polarization.
    pub fn vector(self) -> [Complex64; 3] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        match self {
            FieldAxis::X => [l, o, o],
            FieldAxis::Y => [o, l, o],
            FieldAxis::Z => [o, o, l],
            FieldAxis::SigmaPlus => [Complex64::new(s, 0.0), Complex64::new(0.0, s), o],
            FieldAxis::SigmaMinus => [Complex64::new(s, 0.0), Complex64::new(0.0, -s), o],
        }
    }
}

impl FromStr for FieldAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(FieldAxis::X),
            "y" => Ok(FieldAxis::Y),
            "z" => Ok(FieldAxis::Z),
            "sigma+" | "s+" | "sigma_plus" => Ok(FieldAxis::SigmaPlus),
            "sigma-" | "s-" | "sigma_minus" => Ok(FieldAxis::SigmaMinus),
            other => Err(Error::invalid("polarization", format!("unknown axis `{other}`"))),
        }
    }
}

/// Rotor levels for all J ≤ jmax with cached eigenvectors.
#[derive(Debug, Clone)]
pub struct Rotor {
    pub spec: MoleculeSpec,
    blocks: Vec<RotorBlock>,
    dipole_spherical: [Complex64; 3],
}

impl Rotor {
    pub fn new(spec: &MoleculeSpec, jmax: i64) -> Result<Self> {
        spec.validate()?;
        if jmax < 0 {
            return Err(Error::invalid("jmax", "must be non-negative"));
        }
        let blocks = (0..=jmax).map(|j| build_rotor_block(spec, j)).collect();
        let mu = spec.effective_dipole();
        let mut dipole_spherical = [Complex64::new(0.0, 0.0); 3];
        for (axis, value) in [BodyAxis::A, BodyAxis::B, BodyAxis::C].into_iter().zip(mu) {
            for (slot, w) in dipole_spherical.iter_mut().zip(axis.spherical_weights()) {
                *slot += w * value;
            }
        }
        Ok(Self {
            spec: spec.clone(),
            blocks,
            dipole_spherical,
        })
    }

    pub fn jmax(&self) -> i64 {
        self.blocks.len() as i64 - 1
    }

    pub fn block(&self, j: i64) -> Result<&RotorBlock> {
        usize::try_from(j)
            .ok()
            .and_then(|j| self.blocks.get(j))
            .ok_or_else(|| Error::UnknownLevel(format!("J={j} beyond jmax={}", self.jmax())))
    }

    pub fn blocks(&self) -> &[RotorBlock] {
        &self.blocks
    }

    pub fn level(&self, label: LevelLabel) -> Result<RotLevel> {
        let block = self.block(label.j)?;
        Ok(block.levels[label.index_in_block()])
    }

    pub fn energy(&self, label: LevelLabel) -> Result<f64> {
        Ok(self.level(label)?.energy)
    }

    /// All levels sorted by energy.
    pub fn levels(&self) -> Vec<RotLevel> {
        let mut all: Vec<RotLevel> = self.blocks.iter().flat_map(|b| b.levels.iter().copied()).collect();
        all.sort_by(|x, y| x.energy.total_cmp(&y.energy));
        all
    }

    /// Body-frame part Σ_{K,k} c'_{K'} c_K (−1)^{K'} 3j(J 1 J'; K k −K') μ_k of an element.
    fn body_sum(&self, bra: LevelLabel, ket: LevelLabel) -> Result<Complex64> {
        let bb = self.block(bra.j)?;
        let kb = self.block(ket.j)?;
        let (jp, j) = (bra.j, ket.j);
        let cbra = bb.eigenvectors.column(bra.index_in_block());
        let cket = kb.eigenvectors.column(ket.index_in_block());
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -j..=j {
            let ck = cket[(k + j) as usize];
            if ck == 0.0 {
                continue;
            }
            for q in -1..=1i64 {
                let mu = self.dipole_spherical[(q + 1) as usize];
                if mu.norm_sqr() == 0.0 {
                    continue;
                }
                let kp = k + q;
                if kp.abs() > jp {
                    continue;
                }
                let cbk = cbra[(kp + jp) as usize];
                if cbk == 0.0 {
                    continue;
                }
                let phase = if kp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                acc += mu * (phase * cbk * ck * w3j(j, 1, jp, k, q, -kp));
            }
        }
        Ok(acc)
    }

    fn space_factor(jp: i64, mp: i64, j: i64, m: i64, p: i64) -> f64 {
        if mp != m + p {
            return 0.0;
        }
        let phase = if mp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        phase * (((2 * j + 1) * (2 * jp + 1)) as f64).sqrt() * w3j(j, 1, jp, m, p, -mp)
    }

    /// ⟨bra|μ_p|ket⟩ for the space spherical component p ∈ {−1,0,1}, in Debye.
    pub fn spherical_element(&self, bra: RotState, ket: RotState, p: i64) -> Result<Complex64> {
        self.check_state(bra)?;
        self.check_state(ket)?;
        if (bra.level.j - ket.level.j).abs() > 1 || bra.m != ket.m + p {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let space = Self::space_factor(bra.level.j, bra.m, ket.level.j, ket.m, p);
        if space == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.body_sum(bra.level, ket.level)? * space)
    }

    /// ⟨bra|μ·e|ket⟩ for a Cartesian polarization vector e (no conjugation), in Debye.
    pub fn polarized_element(&self, bra: RotState, ket: RotState, e: &[Complex64; 3]) -> Result<Complex64> {
        self.check_state(bra)?;
        self.check_state(ket)?;
        let p = bra.m - ket.m;
        if p.abs() > 1 || (bra.level.j - ket.level.j).abs() > 1 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        // Weight of spherical component p in e·μ: μ_x = (μ₋₁ − μ₊₁)/√2, μ_y = i(μ₋₁ + μ₊₁)/√2.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::new(0.0, 1.0);
        let weight = match p {
            0 => e[2],
            -1 => (e[0] + i * e[1]) * s,
            _ => (-e[0] + i * e[1]) * s,
        };
        if weight.norm_sqr() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.spherical_element(bra, ket, p)? * weight)
    }

    /// Dipole element along a named field axis, in Debye.
    pub fn dipole_element(&self, bra: RotState, ket: RotState, axis: FieldAxis) -> Result<Complex64> {
        self.polarized_element(bra, ket, &axis.vector())
    }

    fn check_state(&self, s: RotState) -> Result<()> {
        if s.level.j > self.jmax() || s.m.abs() > s.level.j {
            return Err(Error::UnknownLevel(s.to_string()));
        }
        Ok(())
    }

    /// Every dipole-allowed pair with J ≤ jmax, lower level first.
    pub fn transition_table(&self) -> Result<Vec<TransitionLine>> {
        let levels = self.levels();
        let mu = self.spec.effective_dipole();
        let threshold = 1e-12 * mu.iter().map(|x| x * x).sum::<f64>();
        let mut out = Vec::new();
        for (il, lower) in levels.iter().enumerate() {
            for upper in &levels[il + 1..] {
                if (upper.label.j - lower.label.j).abs() > 1 {
                    continue;
                }
                let freq = upper.energy - lower.energy;
                if freq <= 0.0 {
                    continue;
                }
                let reduced = self.body_sum(upper.label, lower.label)?.norm_sqr();
                if reduced <= threshold * 1e-6 {
                    continue;
                }
                let mut strength = [0.0f64; 3];
                for m in -lower.label.j..=lower.label.j {
                    for p in -1..=1i64 {
                        let mp = m + p;
                        if mp.abs() > upper.label.j {
                            continue;
                        }
                        let f = Self::space_factor(upper.label.j, mp, lower.label.j, m, p).powi(2) * reduced;
                        if p == 0 {
                            strength[2] = strength[2].max(f);
                        } else {
                            // |weight|² = 1/2 for x and y on a single circular component
                            strength[0] = strength[0].max(0.5 * f);
                            strength[1] = strength[1].max(0.5 * f);
                        }
                    }
                }
                if strength.iter().any(|&s| s > threshold) {
                    out.push(TransitionLine {
                        lower: lower.label,
                        upper: upper.label,
                        frequency: freq,
                        strength_x: strength[0],
                        strength_y: strength[1],
                        strength_z: strength[2],
                    });
                }
            }
        }
        Ok(out)
    }
}

/// One dipole-allowed line: frequency in MHz, max-over-M squared elements in D².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionLine {
    pub lower: LevelLabel,
    pub upper: LevelLabel,
    pub frequency: f64,
    pub strength_x: f64,
    pub strength_y: f64,
    pub strength_z: f64,
}

impl TransitionLine {
    pub fn z_active(&self) -> bool {
        self.strength_z > 0.0
    }
}

pub fn transition_table(spec: &MoleculeSpec, jmax: i64) -> Result<Vec<TransitionLine>> {
    if jmax < 1 {
        return Err(Error::invalid("jmax", "must be at least 1"));
    }
    Rotor::new(spec, jmax)?.transition_table()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use approx::assert_relative_eq;

    #[test]
    fn j1_closed_forms() {
        let spec = presets::molecule("propanediol").unwrap();
        let block = build_rotor_block(&spec, 1);
        let e: Vec<f64> = block.levels.iter().map(|l| l.energy).collect();
        assert_relative_eq!(e[0], spec.b + spec.c, max_relative = 1e-14);
        assert_relative_eq!(e[1], spec.a + spec.c, max_relative = 1e-14);
        assert_relative_eq!(e[2], spec.a + spec.b, max_relative = 1e-14);
        let labels: Vec<String> = block.levels.iter().map(|l| l.label.to_string()).collect();
        assert_eq!(labels, ["1_01", "1_11", "1_10"]);
    }

    #[test]
    fn label_parsing() {
        let l: LevelLabel = "3_30".parse().unwrap();
        assert_eq!(l, LevelLabel { j: 3, ka: 3, kc: 0 });
        assert_eq!("3,3,1".parse::<LevelLabel>().unwrap().kc, 1);
        assert!("3_23".parse::<LevelLabel>().is_err());
        assert!("3_22".parse::<LevelLabel>().is_ok());
        assert_eq!(l.index_in_block(), 6);
    }

    #[test]
    fn m_zero_element_vanishes() {
        let rotor = Rotor::new(&presets::molecule("propanediol").unwrap(), 3).unwrap();
        let up = RotState::new("3_30".parse().unwrap(), 0).unwrap();
        let lo = RotState::new("3_31".parse().unwrap(), 0).unwrap();
        assert_eq!(rotor.dipole_element(up, lo, FieldAxis::Z).unwrap().norm(), 0.0);
    }
}
