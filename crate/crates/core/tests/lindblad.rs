use approx::assert_relative_eq;
use num_complex::Complex64;
use rotcool::lindblad::{self, BasisState, CoolingChannel, RotorSlot};
use rotcool::protocol::ReferenceSettings;
use rotcool::{CompositeSpace, CoolingOptions, CoolingParams, DensityMatrix, JumpConvention};

fn params(coupling_khz: f64, duration_ms: f64) -> CoolingParams {
    CoolingParams {
        coupling_khz,
        duration_ms,
        ..ReferenceSettings::default().cooling
    }
}

fn excited_first_atom(space: &CompositeSpace) -> (DensityMatrix, usize) {
    let d = space.dim();
    let mut rho = DensityMatrix(nalgebra::DMatrix::zeros(d, d));
    let idx = space.index(BasisState {
        excited: space.atom_bit(0),
        phonons: 0,
        rotor: RotorSlot::Lower,
    });
    rho.0[(idx, idx)] = Complex64::new(1.0, 0.0);
    (rho, idx)
}

#[test]
fn jump_conventions_set_the_decay_rate() {
    let space = CompositeSpace::default();
    let (rho, idx) = excited_first_atom(&space);
    let mut p = params(0.0, 0.02);
    p.rabi_mhz = 0.0;
    p.gamma_mhz = 0.3;
    for (jump, rate) in [(JumpConvention::Rate, 0.3), (JumpConvention::Amplitude, 0.09)] {
        let options = CoolingOptions {
            jump,
            ..CoolingOptions::default()
        };
        let traj = lindblad::propagate(&space, &rho, &p, &options, 0.005).unwrap();
        for rec in &traj.records {
            assert_relative_eq!(rec.populations[idx], (-rate * rec.time_ms * 1e3).exp(), epsilon = 1e-7);
        }
    }
    // One shared channel: the symmetric half decays at 2γ, the antisymmetric half is dark.
    let options = CoolingOptions {
        jump: JumpConvention::Collective,
        ..CoolingOptions::default()
    };
    let traj = lindblad::propagate(&space, &rho, &p, &options, 0.005).unwrap();
    for rec in &traj.records {
        let expected = 0.25 * (1.0 + (-0.3 * rec.time_ms * 1e3).exp()).powi(2);
        assert_relative_eq!(rec.populations[idx], expected, epsilon = 1e-7);
    }
}

#[test]
fn dimension_follows_atoms_and_cutoff() {
    assert_eq!(CompositeSpace::default().dim(), 24);
    assert_eq!(CompositeSpace::new(1, 3).unwrap().dim(), 16);
    assert!(CompositeSpace::new(0, 2).is_err());
    let space = CompositeSpace::new(3, 1).unwrap();
    for i in 0..space.dim() {
        assert_eq!(space.index(space.state(i)), i);
    }
}

#[test]
fn channel_reproduces_direct_propagation() {
    let space = CompositeSpace::default();
    let phonons = vec![1.0 / 3.0; 3];
    let p = params(5.7, 1.0);
    let options = CoolingOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..CoolingOptions::default()
    };
    let channel = CoolingChannel::build(&space, &phonons, &p, &options).unwrap();
    let rotor = [0.3, 0.7];
    let direct = lindblad::propagate(
        &space,
        &DensityMatrix::ground_atoms(&space, &phonons, rotor).unwrap(),
        &p,
        &options,
        1.0,
    )
    .unwrap();
    let expected = direct.final_state.reduced_rotor(&space);
    let zero = Complex64::new(0.0, 0.0);
    let mapped = channel.apply([
        [Complex64::new(rotor[0], 0.0), zero],
        [zero, Complex64::new(rotor[1], 0.0)],
    ]);
    for r in 0..2 {
        for c in 0..2 {
            let gap = (mapped[r][c] - expected[r][c]).norm();
            assert!(gap < 1e-10, "{gap:e}");
        }
    }
}

#[test]
fn uncoupled_block_is_left_alone() {
    let space = CompositeSpace::default();
    let phonons = vec![1.0 / 3.0; 3];
    let options = CoolingOptions::default();
    let channel = CoolingChannel::build(&space, &phonons, &params(0.0, 8.0), &options).unwrap();
    assert_eq!(channel, CoolingChannel::identity(&phonons));
    let traj = lindblad::propagate(
        &space,
        &DensityMatrix::ground_atoms(&space, &phonons, [0.4, 0.6]).unwrap(),
        &params(0.0, 2.0),
        &options,
        1.0,
    )
    .unwrap();
    let last = traj.records.last().unwrap().rotor;
    assert_relative_eq!(last[0], 0.4, epsilon = 1e-10);
    assert_relative_eq!(last[1], 0.6, epsilon = 1e-10);
}

#[test]
fn cooling_removes_phonons_and_upper_population() {
    let space = CompositeSpace::default();
    let phonons = vec![1.0 / 3.0; 3];
    let traj = lindblad::propagate(
        &space,
        &DensityMatrix::ground_atoms(&space, &phonons, [0.5, 0.5]).unwrap(),
        &params(8.4, 8.0),
        &CoolingOptions::default(),
        2.0,
    )
    .unwrap();
    let last = traj.records.last().unwrap();
    assert!(last.rotor[1] < 0.025);
    assert!(last.phonons[0] > 0.99);
    assert!(traj.records.windows(2).all(|w| w[1].rotor[1] <= w[0].rotor[1] + 1e-12));
}

#[test]
fn mismatched_inputs_are_rejected() {
    let space = CompositeSpace::default();
    let rho = DensityMatrix::ground_atoms(&space, &[1.0, 0.0, 0.0], [1.0, 0.0]).unwrap();
    let mut p = params(2.7, 0.1);
    p.atom_displacements = vec![1.0];
    assert!(lindblad::propagate(&space, &rho, &p, &CoolingOptions::default(), 0.1).is_err());
    let mut p = params(2.7, 0.1);
    p.gamma_mhz = -1.0;
    assert!(lindblad::propagate(&space, &rho, &p, &CoolingOptions::default(), 0.1).is_err());
    assert!(DensityMatrix::ground_atoms(&space, &[1.0, 0.0], [1.0, 0.0]).is_err());
}
