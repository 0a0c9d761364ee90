//! Subcommand implementations; each writes its files into the output directory.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use rotcool::coupling::{self, ScanSettings};
use rotcool::lindblad::{self, CompositeSpace, CoolingOptions, CoolingParams, DensityMatrix};
use rotcool::microwave::{self, MicrowaveOptions, Polarization, PulseSpec, RotorSubspace};
use rotcool::protocol::{self, ProtocolPlan, ProtocolTrace, ReferenceSettings, Step, Target};
use rotcool::{presets, trap, IonChainSpec, LevelLabel, MoleculeSpec, RotState, Rotor};
use serde::Serialize;
use serde_json::json;

use crate::config::{ProtocolKind, PulseConfig, RunConfig};
use crate::error::CliError;
use crate::output::{num, write_csv, write_json, Meta};

fn level(text: &str) -> Result<LevelLabel, CliError> {
    Ok(text.parse::<LevelLabel>()?)
}

/// "3_31:2" → (3_31, M = 2).
pub fn state(text: &str) -> Result<RotState, CliError> {
    let (l, m) = text
        .rsplit_once(':')
        .ok_or_else(|| CliError::Config(format!("state `{text}` is not level:M")))?;
    let m: i64 = m
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("state `{text}`: M is not an integer")))?;
    Ok(RotState::new(level(l)?, m)?)
}

fn state_column(s: &RotState) -> String {
    format!("{}:{}", s.level, s.m)
}

fn chain(config: &RunConfig, spec: &MoleculeSpec) -> IonChainSpec {
    let mut chain = IonChainSpec::sandwich(
        config.chain.atom_mass,
        spec.mass,
        config.chain.axial_mhz,
        config.chain.radial_mhz,
        config.numerics.mass_scaling,
    );
    chain.reference = config.numerics.mass_reference;
    chain
}

fn cooling_options(config: &RunConfig) -> CoolingOptions {
    CoolingOptions {
        secular: config.numerics.secular,
        jump: config.numerics.jump,
        rtol: config.numerics.rtol,
        atol: config.numerics.atol,
        check_state: true,
    }
}

fn microwave_options(config: &RunConfig) -> MicrowaveOptions {
    MicrowaveOptions {
        coupling_cutoff_mhz: config.numerics.coupling_cutoff_mhz,
        segments: config.numerics.segments,
    }
}

fn composite_space(config: &RunConfig) -> Result<CompositeSpace, CliError> {
    Ok(CompositeSpace::new(
        config.numerics.atoms,
        config.numerics.phonon_cutoff,
    )?)
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Ẽ₀ by |M| for the cooled pair: the configured table, or prefactor × |⟨μ_z⟩| from the chain.
fn couplings(config: &RunConfig, spec: &MoleculeSpec) -> Result<Vec<f64>, CliError> {
    if !config.cooling.coupling_khz.is_empty() {
        return Ok(config.cooling.coupling_khz.clone());
    }
    let (lower, upper) = (level(&config.cooling.lower)?, level(&config.cooling.upper)?);
    let rotor = Rotor::new(spec, lower.j.max(upper.j).max(1))?;
    let modes = trap::normal_modes(&chain(config, spec))?;
    let mode = modes.mode(&config.chain.mode)?;
    let e0 = coupling::prefactor(&modes, &config.chain.mode, spec.mass, config.numerics.prefactor_units)?;
    (0..=lower.j.min(upper.j))
        .map(|m| Ok(coupling::transition_coupling(&rotor, mode.frequency, e0, lower, upper, m)?.total_coupling))
        .collect()
}

fn cooling_params(config: &RunConfig, spec: &MoleculeSpec) -> Result<CoolingParams, CliError> {
    let c = &config.cooling;
    let mode_mhz = match c.mode_mhz {
        Some(f) => f,
        None => {
            let (lower, upper) = (level(&c.lower)?, level(&c.upper)?);
            let rotor = Rotor::new(spec, lower.j.max(upper.j))?;
            rotor.energy(upper)? - rotor.energy(lower)?
        }
    };
    Ok(CoolingParams {
        rabi_mhz: c.rabi_mhz,
        gamma_mhz: c.gamma_mhz,
        eta: c.eta,
        atom_displacements: c.atom_displacements.clone(),
        coupling_khz: 0.0,
        mode_mhz,
        detuning_mhz: c.detuning_mhz,
        phases: c.phases.clone(),
        duration_ms: c.duration_ms,
    })
}

fn echo_config(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("resolved_config.toml"), config.to_toml()?)?;
    Ok(())
}

pub fn levels(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    echo_config(config, out)?;
    let spec = config.molecule_spec()?;
    let rotor = Rotor::new(&spec, config.levels.jmax)?;
    let meta = Meta::new(config, "levels", "levels/1");
    let rows: Vec<Vec<String>> = rotor
        .levels()
        .iter()
        .map(|l| {
            vec![
                l.label.j.to_string(),
                l.label.ka.to_string(),
                l.label.kc.to_string(),
                l.label.to_string(),
                num(l.energy),
            ]
        })
        .collect();
    let header = ["j", "ka", "kc", "label", "energy_mhz"].map(String::from);
    write_csv(&out.join("levels.csv"), &meta, &header, &rows)?;

    let meta = Meta::new(config, "levels", "transitions/1");
    let lines = if config.levels.jmax >= 1 {
        rotor.transition_table()?
    } else {
        Vec::new()
    };
    let rows: Vec<Vec<String>> = lines
        .iter()
        .map(|t| {
            vec![
                t.lower.to_string(),
                t.upper.to_string(),
                num(t.frequency),
                num(t.strength_x),
                num(t.strength_y),
                num(t.strength_z),
            ]
        })
        .collect();
    let header = [
        "lower",
        "upper",
        "frequency_mhz",
        "strength_x",
        "strength_y",
        "strength_z",
    ]
    .map(String::from);
    write_csv(&out.join("transitions.csv"), &meta, &header, &rows)?;
    Ok(())
}

pub fn modes(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    echo_config(config, out)?;
    let spec = config.molecule_spec()?;
    let chain = chain(config, &spec);
    let set = trap::normal_modes(&chain)?;
    let n = chain.particles.len();
    let meta = Meta::new(config, "modes", "modes/1");
    let mut header: Vec<String> = ["label", "axis", "frequency_mhz", "zigzag"].map(String::from).to_vec();
    header.extend((0..n).map(|i| format!("b_{i}")));
    let rows: Vec<Vec<String>> = set
        .modes
        .iter()
        .map(|m| {
            let mut row = vec![
                m.label.clone(),
                format!("{:?}", m.axis).to_lowercase(),
                num(m.frequency),
                m.zigzag.to_string(),
            ];
            row.extend(m.vector.iter().map(|b| num(*b)));
            row
        })
        .collect();
    write_csv(&out.join("modes.csv"), &meta, &header, &rows)?;

    let meta = Meta::new(config, "modes", "positions/1");
    let rows: Vec<Vec<String>> = chain
        .particles
        .iter()
        .zip(&set.positions)
        .enumerate()
        .map(|(i, (p, x))| {
            vec![
                i.to_string(),
                format!("{:?}", p.kind).to_lowercase(),
                num(p.mass),
                num(*x),
            ]
        })
        .collect();
    let header = ["index", "kind", "mass_u", "position_um"].map(String::from);
    write_csv(&out.join("positions.csv"), &meta, &header, &rows)?;

    let e0 = coupling::prefactor(&set, &config.chain.mode, spec.mass, config.numerics.prefactor_units)?;
    let mode = set.mode(&config.chain.mode)?;
    let summary = json!({
        "mode": mode.label,
        "mode_mhz": mode.frequency,
        "b_m": trap::molecule_displacement(&set, &config.chain.mode)?,
        "prefactor_khz_per_debye": e0,
        "coupling_khz": couplings(config, &spec)?,
    });
    write_json(
        &out.join("modes.json"),
        &Meta::new(config, "modes", "modes-summary/1"),
        &summary,
    )?;
    Ok(())
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn scan(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    echo_config(config, out)?;
    let s = &config.scan;
    let spec = config.molecule_spec()?;
    let settings = ScanSettings {
        chain: chain(config, &spec),
        radial_grid: linspace(s.radial_min_mhz, s.radial_max_mhz, s.radial_points),
        mass_grid: linspace(s.mass_min, s.mass_max, s.mass_points),
        jmax: s.jmax,
        tolerance_khz: s.tolerance_khz,
        units: config.numerics.prefactor_units,
    };
    let molecules: Vec<MoleculeSpec> = s
        .molecules
        .iter()
        .map(|name| presets::molecule(name).map_err(|_| CliError::UnknownPreset(name.clone())))
        .collect::<Result<_, _>>()?;
    let result = coupling::scan_resonances(&molecules, &settings)?;

    let meta = Meta::new(config, "scan", "scan-grid/1");
    let rows: Vec<Vec<String>> = result
        .grid
        .iter()
        .map(|g| {
            vec![
                num(g.mass),
                num(g.radial_mhz),
                g.zigzag_mhz.map_or("nan".into(), num),
                num(g.b_m),
                num(g.prefactor),
            ]
        })
        .collect();
    let header = ["mass_u", "radial_mhz", "zigzag_mhz", "b_m", "prefactor_khz_per_debye"].map(String::from);
    write_csv(&out.join("scan_grid.csv"), &meta, &header, &rows)?;

    let meta = Meta::new(config, "scan", "resonances/1");
    let rows: Vec<Vec<String>> = result
        .resonances
        .iter()
        .map(|r| {
            vec![
                r.molecule.clone(),
                num(r.mass),
                num(r.radial_mhz),
                r.lower.to_string(),
                r.upper.to_string(),
                num(r.transition_mhz),
                num(r.b_m),
                num(r.prefactor),
            ]
        })
        .collect();
    let header = [
        "molecule",
        "mass_u",
        "radial_mhz",
        "lower",
        "upper",
        "transition_mhz",
        "b_m",
        "prefactor_khz_per_debye",
    ]
    .map(String::from);
    write_csv(&out.join("resonances.csv"), &meta, &header, &rows)?;

    let stable: Vec<f64> = result
        .grid
        .iter()
        .map(|g| g.prefactor)
        .filter(|p| p.is_finite())
        .collect();
    let mut per_molecule: BTreeMap<String, usize> = molecules.iter().map(|m| (m.name.clone(), 0)).collect();
    for r in &result.resonances {
        *per_molecule.entry(r.molecule.clone()).or_default() += 1;
    }
    let summary = json!({
        "grid_points": result.grid.len(),
        "stable_points": stable.len(),
        "prefactor_min": stable.iter().copied().fold(f64::INFINITY, f64::min),
        "prefactor_max": stable.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "resonances_per_molecule": per_molecule,
    });
    write_json(
        &out.join("scan.json"),
        &Meta::new(config, "scan", "scan-summary/1"),
        &summary,
    )?;
    Ok(())
}

pub fn cool(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    echo_config(config, out)?;
    let spec = config.molecule_spec()?;
    let space = composite_space(config)?;
    let base = cooling_params(config, &spec)?;
    base.validate(&space)?;
    let table = couplings(config, &spec)?;
    let (lower, upper) = (level(&config.cooling.lower)?, level(&config.cooling.upper)?);
    let jm = lower.j.min(upper.j);
    let blocks: Vec<i64> = if config.cooling.blocks.is_empty() {
        (-jm..=jm).collect()
    } else {
        config.cooling.blocks.clone()
    };
    if let Some(m) = blocks.iter().find(|m| m.abs() > jm) {
        return Err(CliError::Config(format!("`cooling.blocks`: M={m} exceeds J={jm}")));
    }
    let phonons = if config.cooling.initial_phonons.is_empty() {
        uniform(space.phonon_levels())
    } else {
        config.cooling.initial_phonons.clone()
    };
    let options = cooling_options(config);
    let record = config.cooling.record_every_ms;

    let runs: Vec<(i64, f64, lindblad::Trajectory)> = blocks
        .par_iter()
        .map(|&m| {
            let g = table.get(m.unsigned_abs() as usize).copied().unwrap_or(0.0);
            let params = CoolingParams {
                coupling_khz: g,
                ..base.clone()
            };
            let rho = DensityMatrix::ground_atoms(&space, &phonons, config.cooling.initial_rotor)?;
            Ok((m, g, lindblad::propagate(&space, &rho, &params, &options, record)?))
        })
        .collect::<Result<_, rotcool::Error>>()?;

    let meta = Meta::new(config, "cool", "cooling/1");
    let mut header: Vec<String> = ["m", "coupling_khz", "time_ms", "p_lower", "p_upper"]
        .map(String::from)
        .to_vec();
    header.extend((0..space.phonon_levels()).map(|n| format!("phonon_{n}")));
    header.extend(["trace", "purity", "min_eigenvalue"].map(String::from));
    let mut rows = Vec::new();
    let mut finals = Vec::new();
    for (m, g, traj) in &runs {
        for r in &traj.records {
            let mut row = vec![m.to_string(), num(*g), num(r.time_ms), num(r.rotor[0]), num(r.rotor[1])];
            row.extend(r.phonons.iter().map(|p| num(*p)));
            row.extend([num(r.trace), num(r.purity), num(r.min_eigenvalue)]);
            rows.push(row);
        }
        let last = traj.records.last();
        let first = traj.records.first();
        finals.push(json!({
            "m": m,
            "coupling_khz": g,
            "p_lower": last.map(|r| r.rotor[0]),
            "p_upper": last.map(|r| r.rotor[1]),
            "upper_remaining_fraction": match (first, last) {
                (Some(a), Some(b)) if a.rotor[1] > 0.0 => Some(b.rotor[1] / a.rotor[1]),
                _ => None,
            },
            "steps": traj.steps,
        }));
    }
    write_csv(&out.join("cooling.csv"), &meta, &header, &rows)?;
    write_json(
        &out.join("cooling.json"),
        &Meta::new(config, "cool", "cooling-summary/1"),
        &json!({ "blocks": finals }),
    )?;
    Ok(())
}

/// Groups of pulses applied jointly, in order of first appearance.
fn pulse_groups(config: &RunConfig, subspace: &RotorSubspace) -> Result<Vec<Vec<PulseSpec>>, CliError> {
    let mut order: Vec<usize> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<PulseSpec>> = BTreeMap::new();
    for (i, p) in config.pulses.iter().enumerate() {
        let key = p.group.unwrap_or(usize::MAX - i);
        if !order.contains(&key) {
            order.push(key);
        }
        groups.entry(key).or_default().push(build_pulse(config, subspace, p)?);
    }
    Ok(order
        .into_iter()
        .map(|k| groups.remove(&k).unwrap_or_default())
        .collect())
}

fn build_pulse(config: &RunConfig, subspace: &RotorSubspace, p: &PulseConfig) -> Result<PulseSpec, CliError> {
    let polarization =
        microwave::imperfect_polarization(p.polarization, p.admixture, p.admixed, config.numerics.mixing)?;
    let mut pulse = match (&p.lower, &p.upper) {
        (Some(lo), Some(up)) => microwave::design_pulse(
            subspace,
            state(lo)?,
            state(up)?,
            Polarization::preset(p.polarization),
            p.rabi_per_debye_khz,
            p.envelope,
            p.area,
        )?,
        _ => PulseSpec {
            carrier_mhz: p.carrier_mhz.unwrap_or_default(),
            polarization,
            rabi_per_debye_khz: p.rabi_per_debye_khz,
            envelope: p.envelope,
            duration_us: p.duration_us.unwrap_or_default(),
            target_area: p.area,
            reference: None,
        },
    };
    if let Some(c) = p.carrier_mhz {
        pulse.carrier_mhz = c;
    }
    if let Some(d) = p.duration_us {
        pulse.duration_us = d;
    }
    pulse.polarization = polarization;
    Ok(pulse)
}

fn subspace(config: &RunConfig, spec: &MoleculeSpec) -> Result<RotorSubspace, CliError> {
    let levels: Vec<LevelLabel> = config.drive.levels.iter().map(|l| level(l)).collect::<Result<_, _>>()?;
    Ok(RotorSubspace::new(spec, &levels)?)
}

fn read_populations(path: &Path, subspace: &RotorSubspace) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut pops = vec![0.0; subspace.len()];
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or_default().to_string();
        let s = RotState::new(
            level(&get(0))?,
            get(1)
                .parse()
                .map_err(|_| CliError::Config(format!("{}: bad M", path.display())))?,
        )?;
        let p: f64 = get(2)
            .parse()
            .map_err(|_| CliError::Config(format!("{}: bad population", path.display())))?;
        pops[subspace.index_of(s)?] = p;
    }
    Ok(pops)
}

pub fn drive(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    echo_config(config, out)?;
    let spec = config.molecule_spec()?;
    let sub = subspace(config, &spec)?;
    let before = match &config.drive.input {
        Some(path) => read_populations(path, &sub)?,
        None => uniform(sub.len()),
    };
    let groups = pulse_groups(config, &sub)?;
    let opts = microwave_options(config);
    let mut after = before.clone();
    for g in &groups {
        after = microwave::propagate_pulse_populations(&sub, &after, g, &opts)?;
    }
    let meta = Meta::new(config, "drive", "drive/1");
    let rows: Vec<Vec<String>> = sub
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| vec![s.level.to_string(), s.m.to_string(), num(before[i]), num(after[i])])
        .collect();
    let header = ["level", "m", "population_before", "population_after"].map(String::from);
    write_csv(&out.join("populations.csv"), &meta, &header, &rows)?;
    let pulses: Vec<serde_json::Value> = groups
        .iter()
        .flatten()
        .map(|p| json!({ "carrier_mhz": p.carrier_mhz, "duration_us": p.duration_us, "rabi_per_debye_khz": p.rabi_per_debye_khz }))
        .collect();
    let summary = json!({ "pulses": pulses, "total_before": before.iter().sum::<f64>(), "total_after": after.iter().sum::<f64>() });
    write_json(
        &out.join("drive.json"),
        &Meta::new(config, "drive", "drive-summary/1"),
        &summary,
    )?;
    Ok(())
}

fn reference_settings(config: &RunConfig) -> Result<ReferenceSettings, CliError> {
    let spec = config.molecule_spec()?;
    let phonons = if config.cooling.initial_phonons.is_empty() {
        None
    } else {
        Some(config.cooling.initial_phonons.clone())
    };
    Ok(ReferenceSettings {
        cooling: cooling_params(config, &spec)?,
        coupling_by_m: couplings(config, &spec)?,
        molecule: spec,
        space: composite_space(config)?,
        cooling_options: cooling_options(config),
        microwave_options: microwave_options(config),
        initial_phonons: phonons,
        rabi_per_debye_khz: config.pulses.first().map_or(10.0, |p| p.rabi_per_debye_khz),
        envelope: config.pulses.first().map_or_else(Default::default, |p| p.envelope),
        mixing: config.numerics.mixing,
        iterations: config.protocol.iterations,
        stage_every: config.protocol.stage_every,
        resonance_tolerance_mhz: config.numerics.resonance_tolerance_mhz,
        record_steps: config.protocol.record_steps,
    })
}

fn custom_plan(config: &RunConfig) -> Result<ProtocolPlan, CliError> {
    let settings = reference_settings(config)?;
    let spec = config.molecule_spec()?;
    let sub = subspace(config, &spec)?;
    let groups = pulse_groups(config, &sub)?;
    let steps = config
        .protocol
        .steps
        .iter()
        .map(|s| match s.trim() {
            "cool" => Ok(Step::Cool),
            other => {
                let k: usize = other
                    .strip_prefix("pulse:")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| CliError::Config(format!("`protocol.steps`: unknown step `{other}`")))?;
                groups
                    .get(k)
                    .cloned()
                    .map(Step::Pulse)
                    .ok_or_else(|| CliError::Config(format!("`protocol.steps`: no pulse group {k}")))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let target = if config.protocol.target.contains(':') {
        Target::State(state(&config.protocol.target)?)
    } else {
        Target::Level(level(&config.protocol.target)?)
    };
    let n = sub.len();
    let space = settings.space;
    Ok(ProtocolPlan {
        subspace: sub,
        cooled: (level(&config.cooling.lower)?, level(&config.cooling.upper)?),
        cooling: settings.cooling,
        coupling_by_m: settings.coupling_by_m,
        space,
        cooling_options: settings.cooling_options,
        microwave_options: settings.microwave_options,
        initial_phonons: settings
            .initial_phonons
            .unwrap_or_else(|| uniform(space.phonon_levels())),
        steps,
        stages: Vec::new(),
        iterations: config.protocol.iterations,
        target,
        initial: uniform(n),
        resonance_tolerance_mhz: settings.resonance_tolerance_mhz,
        record_steps: config.protocol.record_steps,
    })
}

#[derive(Debug, Serialize)]
pub struct ProtocolSummary {
    pub kind: ProtocolKind,
    pub admixture: f64,
    pub iterations: usize,
    pub threshold: f64,
    pub final_error: f64,
    pub iterations_to_threshold: Option<usize>,
    pub converged: bool,
    pub errors: Vec<f64>,
    pub stranded: Vec<String>,
}

pub fn run_protocol(config: &RunConfig) -> Result<(ProtocolTrace, ProtocolSummary), CliError> {
    let settings = reference_settings(config)?;
    let eps = config.protocol.admixture;
    let plan = match config.protocol.kind {
        ProtocolKind::Depletion => protocol::depletion_plan(&settings, eps)?,
        ProtocolKind::SingleState => protocol::single_state_plan(&settings, eps)?,
        ProtocolKind::Custom => custom_plan(config)?,
    };
    let report = protocol::plan_validator(&plan);
    let trace = protocol::run_protocol(&plan)?;
    let threshold = config.protocol.threshold;
    let summary = ProtocolSummary {
        kind: config.protocol.kind,
        admixture: eps,
        iterations: plan.iterations,
        threshold,
        final_error: trace.final_error(),
        iterations_to_threshold: trace.iterations_to(threshold),
        converged: trace.final_error() <= threshold,
        errors: trace.errors(),
        stranded: report.stranded.iter().map(state_column).collect(),
    };
    Ok((trace, summary))
}

pub fn protocol(config: &RunConfig, out: &Path) -> Result<(), CliError> {
    echo_config(config, out)?;
    let (trace, summary) = run_protocol(config)?;
    let meta = Meta::new(config, "protocol", "protocol/1");
    let mut header: Vec<String> = ["iteration", "error", "stages"].map(String::from).to_vec();
    header.extend(trace.states.iter().map(state_column));
    let rows: Vec<Vec<String>> = trace
        .records
        .iter()
        .map(|r| {
            let mut row = vec![r.iteration.to_string(), num(r.error), r.stages.join(";")];
            row.extend(r.populations.iter().map(|p| num(*p)));
            row
        })
        .collect();
    write_csv(&out.join("protocol.csv"), &meta, &header, &rows)?;
    if config.protocol.record_steps {
        let mut header: Vec<String> = ["iteration", "step"].map(String::from).to_vec();
        header.extend(trace.states.iter().map(state_column));
        let rows: Vec<Vec<String>> = trace
            .snapshots
            .iter()
            .map(|s| {
                let mut row = vec![s.iteration.to_string(), s.step.clone()];
                row.extend(s.populations.iter().map(|p| num(*p)));
                row
            })
            .collect();
        write_csv(
            &out.join("protocol_steps.csv"),
            &Meta::new(config, "protocol", "protocol-steps/1"),
            &header,
            &rows,
        )?;
    }
    write_json(
        &out.join("protocol.json"),
        &Meta::new(config, "protocol", "protocol-summary/1"),
        &summary,
    )?;
    Ok(())
}
