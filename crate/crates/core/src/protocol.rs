//! Repeated cycles of sideband cooling and microwave pulses on a rotational subspace.
//!
//! The subspace state is a density matrix over all (level, M) states. A cooling
//! step acts on each M block of the cooled pair through a cached
//! [`CoolingChannel`]; coherences other than those inside a cooled pair are
//! dropped at that hand-off. Pulses act as unitaries on the full state.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{CompositeSpace, CoolingChannel, CoolingOptions, CoolingParams};
use crate::microwave::{self, Envelope, MicrowaveOptions, Polarization, PulseSpec, RotorSubspace};
use crate::presets;
use crate::rotor::{FieldAxis, LevelLabel, MoleculeSpec, RotState};

/// What the cooling error is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// All M sublevels of a level.
    Level(LevelLabel),
    /// A single (level, M) state.
    State(RotState),
}

impl Target {
    fn contains(&self, s: RotState) -> bool {
        match *self {
            Target::Level(l) => s.level == l,
            Target::State(t) => s == t,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Level(l) => write!(f, "{l}"),
            Target::State(s) => write!(f, "{s}"),
        }
    }
}

/// 1 minus the target population.
pub fn cooling_error(subspace: &RotorSubspace, populations: &[f64], target: Target) -> Result<f64> {
    if !subspace.states.iter().any(|s| target.contains(*s)) {
        return Err(Error::UnknownLevel(target.to_string()));
    }
    if populations.len() != subspace.len() {
        return Err(Error::invalid("populations", "length does not match the subspace"));
    }
    let inside: f64 = subspace
        .states
        .iter()
        .zip(populations)
        .filter(|(s, _)| target.contains(**s))
        .map(|(_, p)| p)
        .sum();
    Ok((1.0 - inside).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Cool,
    /// Pulses applied jointly.
    Pulse(Vec<PulseSpec>),
}

/// Extra steps run after the main steps of every `every`-th iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: String,
    pub steps: Vec<Step>,
    pub every: usize,
}

#[derive(Debug, Clone)]
pub struct ProtocolPlan {
    pub subspace: RotorSubspace,
    /// (j₁, j₂): cooling moves population from (j₂, M) to (j₁, M).
    pub cooled: (LevelLabel, LevelLabel),
    pub cooling: CoolingParams,
    /// Ẽ₀ in kHz indexed by |M|; missing entries count as zero.
    pub coupling_by_m: Vec<f64>,
    pub space: CompositeSpace,
    pub cooling_options: CoolingOptions,
    pub microwave_options: MicrowaveOptions,
    /// Phonon distribution at the start of every cooling step.
    pub initial_phonons: Vec<f64>,
    pub steps: Vec<Step>,
    pub stages: Vec<Stage>,
    pub iterations: usize,
    pub target: Target,
    pub initial: Vec<f64>,
    /// Allowed |E(j₂) − E(j₁) − ω_p| in MHz.
    pub resonance_tolerance_mhz: f64,
    pub record_steps: bool,
}

impl ProtocolPlan {
    pub fn validate(&self) -> Result<()> {
        let (j1, j2) = self.cooled;
        let gap = self.subspace.rotor.energy(j2)? - self.subspace.rotor.energy(j1)?;
        if (gap - self.cooling.mode_mhz).abs() > self.resonance_tolerance_mhz {
            return Err(Error::invalid(
                "protocol.cooled",
                format!(
                    "{j1}/{j2} splitting {gap:.6} MHz is off the mode at {:.6} MHz by more than {} MHz",
                    self.cooling.mode_mhz, self.resonance_tolerance_mhz
                ),
            ));
        }
        for level in [j1, j2] {
            if !self.subspace.states.iter().any(|s| s.level == level) {
                return Err(Error::UnknownLevel(level.to_string()));
            }
        }
        if self.initial.len() != self.subspace.len() {
            return Err(Error::invalid("protocol.initial", "length does not match the subspace"));
        }
        let total: f64 = self.initial.iter().sum();
        if (total - 1.0).abs() > 1e-8 || self.initial.iter().any(|p| *p < 0.0) {
            return Err(Error::invalid("protocol.initial", "must be a probability distribution"));
        }
        if self.initial_phonons.len() != self.space.phonon_levels() {
            return Err(Error::invalid(
                "protocol.initial_phonons",
                format!("need {} entries", self.space.phonon_levels()),
            ));
        }
        if self.stages.iter().any(|s| s.every == 0) {
            return Err(Error::invalid("protocol.stages.every", "must be at least 1"));
        }
        self.cooling.validate(&self.space)?;
        Ok(())
    }

    fn coupling(&self, m: i64) -> f64 {
        self.coupling_by_m
            .get(m.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }

    fn all_pulses(&self) -> impl Iterator<Item = &Vec<PulseSpec>> {
        self.steps
            .iter()
            .chain(self.stages.iter().flat_map(|s| s.steps.iter()))
            .filter_map(|s| match s {
                Step::Pulse(p) => Some(p),
                Step::Cool => None,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub populations: Vec<f64>,
    pub error: f64,
    /// Names of the extra stages that ran in this iteration.
    pub stages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSnapshot {
    pub iteration: usize,
    pub step: String,
    pub populations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub states: Vec<RotState>,
    /// Iteration 0 is the initial distribution.
    pub records: Vec<IterationRecord>,
    pub snapshots: Vec<StepSnapshot>,
}

impl ProtocolTrace {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    pub fn final_error(&self) -> f64 {
        self.records.last().map_or(1.0, |r| r.error)
    }

    /// First iteration whose error is at or below `threshold`.
    pub fn iterations_to(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.error <= threshold).map(|r| r.iteration)
    }

    pub fn population(&self, iteration: usize, s: RotState) -> Option<f64> {
        let k = self.states.iter().position(|x| *x == s)?;
        self.records.get(iteration).map(|r| r.populations[k])
    }
}

struct Runner<'a> {
    plan: &'a ProtocolPlan,
    channels: HashMap<u64, CoolingChannel>,
    unitaries: HashMap<usize, DMatrix<Complex64>>,
    pairs: Vec<(i64, usize, usize)>,
}

impl<'a> Runner<'a> {
    fn new(plan: &'a ProtocolPlan) -> Result<Self> {
        let (j1, j2) = plan.cooled;
        let sub = &plan.subspace;
        let mut pairs = Vec::new();
        for m in -j1.j.min(j2.j)..=j1.j.min(j2.j) {
            let lo = sub.index_of(RotState::new(j1, m)?)?;
            let hi = sub.index_of(RotState::new(j2, m)?)?;
            pairs.push((m, lo, hi));
        }
        Ok(Self {
            plan,
            channels: HashMap::new(),
            unitaries: HashMap::new(),
            pairs,
        })
    }

    fn channel(&mut self, m: i64) -> Result<&CoolingChannel> {
        let g = self.plan.coupling(m);
        let key = g.to_bits();
        if !self.channels.contains_key(&key) {
            let p = CoolingParams {
                coupling_khz: g,
                ..self.plan.cooling.clone()
            };
            let ch = CoolingChannel::build(
                &self.plan.space,
                &self.plan.initial_phonons,
                &p,
                &self.plan.cooling_options,
            )?;
            self.channels.insert(key, ch);
        }
        Ok(&self.channels[&key])
    }

    fn cool(&mut self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let n = rho.nrows();
        let mut out = DMatrix::from_diagonal(&rho.diagonal());
        for (m, lo, hi) in self.pairs.clone() {
            let block = [[rho[(lo, lo)], rho[(lo, hi)]], [rho[(hi, lo)], rho[(hi, hi)]]];
            let next = self.channel(m)?.apply(block);
            for (r, a) in [lo, hi].into_iter().enumerate() {
                for (c, b) in [lo, hi].into_iter().enumerate() {
                    out[(a, b)] = next[r][c];
                }
            }
        }
        debug_assert_eq!(out.nrows(), n);
        Ok(out)
    }

    fn pulse(&mut self, key: usize, pulses: &[PulseSpec], rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if !self.unitaries.contains_key(&key) {
            let u = microwave::pulse_unitary(&self.plan.subspace, pulses, &self.plan.microwave_options)?;
            self.unitaries.insert(key, u);
        }
        let u = &self.unitaries[&key];
        Ok(u * rho * u.adjoint())
    }
}

fn step_name(step: &Step) -> String {
    match step {
        Step::Cool => "cool".into(),
        Step::Pulse(p) => {
            let names: Vec<String> = p.iter().map(|x| format!("pulse@{:.6}MHz", x.carrier_mhz)).collect();
            names.join("+")
        }
    }
}

fn diagonal(rho: &DMatrix<Complex64>) -> Vec<f64> {
    rho.diagonal().iter().map(|z| z.re).collect()
}

/// Runs the plan and records populations and error after every iteration.
pub fn run_protocol(plan: &ProtocolPlan) -> Result<ProtocolTrace> {
    plan.validate()?;
    let report = plan_validator(plan);
    if !report.stranded.is_empty() {
        log::warn!("{report}");
    }
    let sub = &plan.subspace;
    let mut runner = Runner::new(plan)?;
    let mut rho = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        sub.len(),
        plan.initial.iter().map(|p| Complex64::new(*p, 0.0)),
    ));
    let initial = diagonal(&rho);
    let mut records = vec![IterationRecord {
        iteration: 0,
        error: cooling_error(sub, &initial, plan.target)?,
        populations: initial,
        stages: Vec::new(),
    }];
    let mut snapshots = Vec::new();

    // Steps are keyed by position so pulse unitaries are built once.
    let mut next_key = 0;
    let mut number = |steps: &[Step]| -> Vec<usize> {
        steps
            .iter()
            .map(|_| {
                next_key += 1;
                next_key
            })
            .collect()
    };
    let main_keys = number(&plan.steps);
    let stage_keys: Vec<Vec<usize>> = plan.stages.iter().map(|s| number(&s.steps)).collect();

    for iteration in 1..=plan.iterations {
        let mut ran = Vec::new();
        let mut sequence: Vec<(usize, &Step)> = main_keys.iter().copied().zip(plan.steps.iter()).collect();
        for (stage, keys) in plan.stages.iter().zip(&stage_keys) {
            if iteration % stage.every == 0 {
                ran.push(stage.name.clone());
                sequence.extend(keys.iter().copied().zip(stage.steps.iter()));
            }
        }
        for (key, step) in sequence {
            rho = match step {
                Step::Cool => runner.cool(&rho),
                Step::Pulse(p) => runner.pulse(key, p, &rho),
            }
            .map_err(|e| Error::Protocol {
                iteration,
                source: Box::new(e),
            })?;
            let pops = diagonal(&rho);
            let total: f64 = pops.iter().sum();
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::Protocol {
                    iteration,
                    source: Box::new(Error::Propagation {
                        time: 0.0,
                        reason: format!("population sum drifted to {total:.12} after {}", step_name(step)),
                    }),
                });
            }
            if plan.record_steps {
                snapshots.push(StepSnapshot {
                    iteration,
                    step: step_name(step),
                    populations: pops,
                });
            }
        }
        let pops = diagonal(&rho);
        records.push(IterationRecord {
            iteration,
            error: cooling_error(sub, &pops, plan.target)?,
            populations: pops,
            stages: ran,
        });
    }
    Ok(ProtocolTrace {
        states: sub.states.clone(),
        records,
        snapshots,
    })
}

/// Reachability of the target from every subspace state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub target: String,
    pub stranded: Vec<RotState>,
    pub suggestions: Vec<String>,
}

impl ValidationReport {
    pub fn all_reachable(&self) -> bool {
        self.stranded.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stranded.is_empty() {
            return write!(f, "every state reaches {}", self.target);
        }
        let names: Vec<String> = self.stranded.iter().map(|s| s.to_string()).collect();
        write!(f, "states that never reach {}: {}", self.target, names.join(", "))?;
        for s in &self.suggestions {
            write!(f, "; {s}")?;
        }
        Ok(())
    }
}

/// Directed graph of the plan: resonant pulse couplings in both directions,
/// cooling from (j₂, M) to (j₁, M) where the coupling is nonzero.
pub fn plan_validator(plan: &ProtocolPlan) -> ValidationReport {
    let sub = &plan.subspace;
    let n = sub.len();
    let mut edges: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for pulses in plan.all_pulses() {
        for pulse in pulses {
            for u in 0..n {
                for l in 0..n {
                    let gap = sub.energies[u] - sub.energies[l];
                    if gap <= 0.0 {
                        continue;
                    }
                    let d = sub.polarized_element(u, l, &pulse.polarization).norm();
                    let width = 1e-3 + 10.0 * pulse.rabi_per_debye_khz * 1e-3 * d;
                    if d > 1e-12 && (gap - pulse.carrier_mhz).abs() <= width {
                        edges[u].insert(l);
                        edges[l].insert(u);
                    }
                }
            }
        }
    }
    let (j1, j2) = plan.cooled;
    for (k, s) in sub.states.iter().enumerate() {
        if s.level == j2 && plan.coupling(s.m) != 0.0 {
            if let Ok(dest) = sub.index_of(RotState { level: j1, m: s.m }) {
                edges[k].insert(dest);
            }
        }
    }

    // Backward search from the target over reversed edges.
    let mut reaches = vec![false; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (k, s) in sub.states.iter().enumerate() {
        if plan.target.contains(*s) {
            reaches[k] = true;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        for from in 0..n {
            if !reaches[from] && edges[from].contains(&k) {
                reaches[from] = true;
                queue.push_back(from);
            }
        }
    }

    let stranded: Vec<RotState> = (0..n).filter(|&k| !reaches[k]).map(|k| sub.states[k]).collect();
    let mut suggestions = Vec::new();
    for &s in &stranded {
        let from = sub.index_of(s).unwrap_or_default();
        let link = (0..n).find(|&to| reaches[to] && (0..3).any(|axis| sub.dipole[axis][(to, from)].norm() > 1e-12));
        match link {
            Some(to) => {
                let t = sub.states[to];
                suggestions.push(format!(
                    "add a pulse linking {s} to {t} (dJ={}, dM={})",
                    t.level.j - s.level.j,
                    t.m - s.m
                ));
            }
            None => suggestions.push(format!(
                "{s} has no dipole-allowed link to a state that reaches the target"
            )),
        }
    }
    ValidationReport {
        target: plan.target.to_string(),
        stranded,
        suggestions,
    }
}

/// b-axis dipole assumed for the reference molecule. The reference pulses
/// drive b-type lines; their designed areas do not depend on this value.
pub const ASSUMED_MU_B: f64 = 1.0;

/// Knobs shared by the two reference protocols.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSettings {
    pub molecule: MoleculeSpec,
    pub cooling: CoolingParams,
    pub coupling_by_m: Vec<f64>,
    pub space: CompositeSpace,
    pub cooling_options: CoolingOptions,
    pub microwave_options: MicrowaveOptions,
    /// `None` spreads the phonons uniformly over 0..=n_max.
    pub initial_phonons: Option<Vec<f64>>,
    pub rabi_per_debye_khz: f64,
    pub envelope: Envelope,
    pub mixing: microwave::MixingConvention,
    pub iterations: usize,
    /// Stage 2 of the single-state protocol runs every `stage_every`-th iteration.
    pub stage_every: usize,
    pub resonance_tolerance_mhz: f64,
    pub record_steps: bool,
}

impl ReferenceSettings {
    pub fn lower() -> LevelLabel {
        LevelLabel { j: 3, ka: 3, kc: 1 }
    }

    pub fn upper() -> LevelLabel {
        LevelLabel { j: 3, ka: 3, kc: 0 }
    }

    pub fn auxiliary() -> LevelLabel {
        LevelLabel { j: 2, ka: 2, kc: 1 }
    }

    fn levels() -> [LevelLabel; 3] {
        [Self::auxiliary(), Self::lower(), Self::upper()]
    }
}

impl Default for ReferenceSettings {
    fn default() -> Self {
        let mut molecule = presets::molecule("propanediol").expect("bundled preset");
        molecule.mu_b = ASSUMED_MU_B;
        let rotor = crate::rotor::Rotor::new(&molecule, 3).expect("bundled preset");
        let gap = rotor.energy(Self::upper()).expect("level") - rotor.energy(Self::lower()).expect("level");
        Self {
            molecule,
            cooling: CoolingParams {
                rabi_mhz: 0.2,
                gamma_mhz: 0.1,
                eta: 0.012,
                atom_displacements: vec![1.0, 1.0],
                coupling_khz: 0.0,
                mode_mhz: gap,
                detuning_mhz: None,
                phases: vec![0.0, 0.0],
                duration_ms: 8.0,
            },
            coupling_by_m: vec![0.0, 2.7, 5.7, 8.4],
            space: CompositeSpace::default(),
            cooling_options: CoolingOptions::default(),
            microwave_options: MicrowaveOptions::default(),
            initial_phonons: None,
            rabi_per_debye_khz: 10.0,
            envelope: Envelope::default(),
            mixing: microwave::MixingConvention::Intensity,
            iterations: 10,
            stage_every: 3,
            resonance_tolerance_mhz: 1e-3,
            record_steps: false,
        }
    }
}

fn base_plan(settings: &ReferenceSettings, target: Target) -> Result<ProtocolPlan> {
    let subspace = RotorSubspace::new(&settings.molecule, &ReferenceSettings::levels())?;
    let phonon_levels = settings.space.phonon_levels();
    let initial_phonons = settings
        .initial_phonons
        .clone()
        .unwrap_or_else(|| vec![1.0 / phonon_levels as f64; phonon_levels]);
    let n = subspace.len();
    Ok(ProtocolPlan {
        subspace,
        cooled: (ReferenceSettings::lower(), ReferenceSettings::upper()),
        cooling: settings.cooling.clone(),
        coupling_by_m: settings.coupling_by_m.clone(),
        space: settings.space,
        cooling_options: settings.cooling_options,
        microwave_options: settings.microwave_options,
        initial_phonons,
        steps: Vec::new(),
        stages: Vec::new(),
        iterations: settings.iterations,
        target,
        initial: vec![1.0 / n as f64; n],
        resonance_tolerance_mhz: settings.resonance_tolerance_mhz,
        record_steps: settings.record_steps,
    })
}

fn designed(
    plan: &ProtocolPlan,
    settings: &ReferenceSettings,
    lower: RotState,
    upper: RotState,
    design_axis: FieldAxis,
    applied: Polarization,
) -> Result<PulseSpec> {
    let mut pulse = microwave::design_pulse(
        &plan.subspace,
        lower,
        upper,
        Polarization::preset(design_axis),
        settings.rabi_per_debye_khz,
        settings.envelope,
        std::f64::consts::PI,
    )?;
    pulse.polarization = applied;
    Ok(pulse)
}

/// Depletion into all M of j₁ with an x-polarized pulse on the 3₃₀ ↔ 2₂₁ line,
/// carrying an intensity fraction `z_admixture` of z polarization.
///
/// The pulse is a π pulse on |2₂₁, 1⟩ → |3₃₀, 2⟩ for perfect x light; its
/// duration is kept when the polarization is degraded.
pub fn depletion_plan(settings: &ReferenceSettings, z_admixture: f64) -> Result<ProtocolPlan> {
    let mut plan = base_plan(settings, Target::Level(ReferenceSettings::lower()))?;
    let polarization = microwave::imperfect_polarization(FieldAxis::X, z_admixture, FieldAxis::Z, settings.mixing)?;
    let pulse = designed(
        &plan,
        settings,
        RotState::new(ReferenceSettings::auxiliary(), 1)?,
        RotState::new(ReferenceSettings::upper(), 2)?,
        FieldAxis::X,
        polarization,
    )?;
    plan.steps = vec![Step::Cool, Step::Pulse(vec![pulse])];
    Ok(plan)
}

/// Preparation of |3₃₁, 3⟩ from an even mixture over the M of 3₃₁.
///
/// Stage 1 drives 3₃₁ → 3₃₀ with σ₊ light. Stage 2 moves |3₃₀, 0⟩ through
/// |2₂₁, 0⟩ to |3₃₀, 1⟩ with a z pulse followed by a σ₊ pulse. Every σ₊ pulse
/// carries an intensity fraction `minus_admixture` of σ₋.
pub fn single_state_plan(settings: &ReferenceSettings, minus_admixture: f64) -> Result<ProtocolPlan> {
    let lower = ReferenceSettings::lower();
    let upper = ReferenceSettings::upper();
    let aux = ReferenceSettings::auxiliary();
    let mut plan = base_plan(settings, Target::State(RotState::new(lower, 3)?))?;
    let circular = microwave::imperfect_polarization(
        FieldAxis::SigmaPlus,
        minus_admixture,
        FieldAxis::SigmaMinus,
        settings.mixing,
    )?;

    let stage1 = designed(
        &plan,
        settings,
        RotState::new(lower, 0)?,
        RotState::new(upper, 1)?,
        FieldAxis::SigmaPlus,
        circular,
    )?;
    let via = designed(
        &plan,
        settings,
        RotState::new(aux, 0)?,
        RotState::new(upper, 0)?,
        FieldAxis::Z,
        Polarization::preset(FieldAxis::Z),
    )?;
    let raise = designed(
        &plan,
        settings,
        RotState::new(aux, 0)?,
        RotState::new(upper, 1)?,
        FieldAxis::SigmaPlus,
        circular,
    )?;

    let k = plan.subspace.len();
    let mut initial = vec![0.0; k];
    for (slot, s) in initial.iter_mut().zip(&plan.subspace.states) {
        if s.level == lower {
            *slot = 1.0 / (2 * lower.j + 1) as f64;
        }
    }
    plan.initial = initial;
    plan.steps = vec![Step::Pulse(vec![stage1]), Step::Cool];
    plan.stages = vec![Stage {
        name: "stage2".into(),
        steps: vec![Step::Pulse(vec![via]), Step::Pulse(vec![raise]), Step::Cool],
        every: settings.stage_every,
    }];
    Ok(plan)
}

pub fn run_depletion_protocol(settings: &ReferenceSettings, z_admixture: f64) -> Result<ProtocolTrace> {
    run_protocol(&depletion_plan(settings, z_admixture)?)
}

pub fn run_single_state_protocol(settings: &ReferenceSettings, minus_admixture: f64) -> Result<ProtocolTrace> {
    run_protocol(&single_state_plan(settings, minus_admixture)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_error_counts_states() {
        let settings = ReferenceSettings::default();
        let plan = depletion_plan(&settings, 0.0).unwrap();
        let n = plan.subspace.len();
        assert_eq!(n, 19);
        let err = cooling_error(&plan.subspace, &[1.0 / 19.0; 19], plan.target).unwrap();
        assert!((err - 12.0 / 19.0).abs() < 1e-12);
    }

    #[test]
    fn reachability_of_reference_plans() {
        let settings = ReferenceSettings::default();
        let plan = depletion_plan(&settings, 0.0).unwrap();
        assert!(plan_validator(&plan).all_reachable());

        let z_only = depletion_plan(&settings, 1.0).unwrap();
        let report = plan_validator(&z_only);
        let trapped = RotState::new(ReferenceSettings::upper(), 0).unwrap();
        assert!(report.stranded.contains(&trapped), "{report}");

        let mut bare = plan.clone();
        bare.steps = vec![Step::Cool];
        let report = plan_validator(&bare);
        assert!(report
            .stranded
            .iter()
            .all(|s| s.level == ReferenceSettings::auxiliary() || s.m == 0));
        assert_eq!(report.stranded.len(), 6);
    }
}
