//! Bundled molecular constants (mass in u, A/B/C in MHz, dipole in Debye).
//!
//! Dipole components that are not tabulated are left at zero; such molecules
//! report couplings per Debye of a-axis dipole.

use crate::error::{Error, Result};
use crate::rotor::MoleculeSpec;

/// Mass of ¹⁷²Yb⁺ in u.
pub const YB172_MASS: f64 = 171.936;

pub const MOLECULE_NAMES: [&str; 4] = ["propanediol", "glutamine", "chdbri", "chcabri"];

pub fn molecule(name: &str) -> Result<MoleculeSpec> {
    let (full, mass, a, b, c, mu_a) = match name.to_ascii_lowercase().as_str() {
        "propanediol" => ("protonated 1,2-propanediol", 77.0, 8612.0, 3758.0, 2868.0, 2.4),
        "glutamine" => ("protonated glutamine", 147.0, 2210.0, 830.0, 750.0, 2.0),
        "chdbri" => ("CHDBrI+", 221.0, 14750.0, 1170.0, 1095.0, 0.0),
        "chcabri" => ("CHCaBrI+", 259.0, 2550.0, 830.0, 660.0, 0.0),
        other => return Err(Error::invalid("molecule", format!("unknown molecule preset `{other}`"))),
    };
    Ok(MoleculeSpec {
        name: full.to_string(),
        mass,
        a,
        b,
        c,
        mu_a,
        mu_b: 0.0,
        mu_c: 0.0,
    })
}

pub fn all_molecules() -> Vec<MoleculeSpec> {
    MOLECULE_NAMES
        .iter()
        .map(|n| molecule(n).expect("bundled preset"))
        .collect()
}
