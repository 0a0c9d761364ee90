//! Sympathetic rotational cooling of polyatomic molecular ions co-trapped with atomic ions.
//!
//! Modules, bottom-up: [`angular`] (3j symbols, direction cosines), [`rotor`]
//! (asymmetric-top levels and dipole elements), [`trap`] (ion-chain modes),
//! [`coupling`] (dipole–phonon coupling and resonance scans), [`lindblad`]
//! (sideband-cooling master equation), [`microwave`] (polarized pulses) and
//! [`protocol`] (cooling/pulse sequences).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod coupling;
pub mod error;
pub mod lindblad;
pub mod microwave;
pub mod ode;
pub mod presets;
pub mod protocol;
pub mod rotor;
pub mod trap;
pub mod units;

pub use error::{Error, Result};
pub use lindblad::{CompositeSpace, CoolingOptions, CoolingParams, DensityMatrix, JumpConvention};
pub use microwave::{Envelope, MixingConvention, Polarization, PulseSpec, RotorSubspace};
pub use protocol::{ProtocolPlan, ProtocolTrace, ReferenceSettings, Step, Target};
pub use rotor::{FieldAxis, LevelLabel, MoleculeSpec, RotLevel, RotState, Rotor, RotorBlock, TransitionLine};
pub use trap::{IonChainSpec, MassScaling, NormalMode, NormalModeSet, Particle, ParticleKind, ReferenceSpecies};

/// Crate version, for output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
