use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rotcool::angular::{direction_cosine_spherical, wigner3j_doubled, SymTopKet};
use rotcool::coupling;
use rotcool::lindblad;
use rotcool::microwave::{self, MicrowaveOptions};
use rotcool::protocol::{self, ReferenceSettings, Target};
use rotcool::rotor::{build_rotor_block, transition_table};
use rotcool::trap::{self, Particle, ReferenceSpecies};
use rotcool::{
    CompositeSpace, CoolingOptions, CoolingParams, DensityMatrix, Envelope, FieldAxis, IonChainSpec, LevelLabel,
    MassScaling, MixingConvention, MoleculeSpec, Polarization, RotState, Rotor, RotorSubspace,
};

/// Doubled (j1, j2, j3, m1, m2, m3) with valid projections, j ≤ 7.
fn three_j_args() -> impl Strategy<Value = [i64; 6]> {
    (0i64..=14, 0i64..=14, 0i64..=14)
        .prop_flat_map(|(a, b, c)| {
            let ms = |tj: i64| (0..=tj).prop_map(move |k| -tj + 2 * k);
            (Just(a), Just(b), Just(c), ms(a), ms(b), ms(c))
        })
        .prop_map(|(a, b, c, x, y, z)| [a, b, c, x, y, z])
}

fn w(a: [i64; 6]) -> f64 {
    wigner3j_doubled(a[0], a[1], a[2], a[3], a[4], a[5]).unwrap()
}

fn molecule() -> impl Strategy<Value = MoleculeSpec> {
    (
        1000.0f64..20000.0,
        0.05f64..0.95,
        0.05f64..0.95,
        0.5f64..3.0,
        0.0f64..2.0,
    )
        .prop_map(|(a, fb, fc, mu_a, mu_b)| {
            let b = a * fb;
            let c = b * fc;
            MoleculeSpec {
                name: "random".into(),
                mass: 100.0,
                a,
                b,
                c,
                mu_a,
                mu_b,
                mu_c: 0.0,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn three_j_permutation_symmetry(a in three_j_args()) {
        let sum_j = (a[0] + a[1] + a[2]) / 2;
        let odd = if sum_j % 2 == 0 { 1.0 } else { -1.0 };
        let base = w(a);
        prop_assert!((w([a[1], a[2], a[0], a[4], a[5], a[3]]) - base).abs() < 1e-13);
        prop_assert!((w([a[1], a[0], a[2], a[4], a[3], a[5]]) - odd * base).abs() < 1e-13);
        prop_assert!((w([a[0], a[1], a[2], -a[3], -a[4], -a[5]]) - odd * base).abs() < 1e-13);
    }

    #[test]
    fn three_j_orthogonality(tj1 in 0i64..=8, tj2 in 0i64..=8, tm3_pick in 0usize..20) {
        let lo = (tj1 - tj2).abs();
        let hi = tj1 + tj2;
        let j3s: Vec<i64> = (lo..=hi).step_by(2).collect();
        let tm3s: Vec<i64> = (-hi..=hi).step_by(2).collect();
        let tm3 = tm3s[tm3_pick % tm3s.len()];
        for &ja in &j3s {
            for &jb in &j3s {
                if tm3.abs() > ja || tm3.abs() > jb {
                    continue;
                }
                let mut sum = 0.0;
                for tm1 in (-tj1..=tj1).step_by(2) {
                    let tm2 = -tm3 - tm1;
                    if tm2.abs() > tj2 {
                        continue;
                    }
                    sum += w([tj1, tj2, ja, tm1, tm2, tm3]) * w([tj1, tj2, jb, tm1, tm2, tm3]);
                }
                let expected = if ja == jb { 1.0 / (ja + 1) as f64 } else { 0.0 };
                prop_assert!((sum - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_direction_cosine(j in 1i64..=8, k_pick in 0i64..17, m_pick in 0i64..17) {
        let k = k_pick % (2 * j + 1) - j;
        let m = m_pick % (2 * j + 1) - j;
        let ket = SymTopKet::new(j, k, m).unwrap();
        let value = direction_cosine_spherical(ket, ket, 0, 0);
        prop_assert!((value - (m * k) as f64 / (j * (j + 1)) as f64).abs() < 1e-13);
    }

    #[test]
    fn rotor_block_trace_and_ordering(spec in molecule(), j in 0i64..=6) {
        let block = build_rotor_block(&spec, j);
        prop_assert_eq!(block.levels.len() as i64, 2 * j + 1);
        let trace: f64 = block.levels.iter().map(|l| l.energy).sum();
        let expected = (2 * j + 1) as f64 * (j * (j + 1)) as f64 * (spec.a + spec.b + spec.c) / 3.0;
        prop_assert!((trace - expected).abs() <= 1e-10 * expected.abs().max(1.0));
        prop_assert!(block.levels.windows(2).all(|w| w[1].energy >= w[0].energy - 1e-9));
    }

    #[test]
    fn z_elements_conserve_m_and_reflect(spec in molecule(), m in 0i64..=3) {
        let rotor = Rotor::new(&spec, 3).unwrap();
        let levels = rotor.levels();
        for a in &levels {
            for b in &levels {
                if a.label.j < m || b.label.j < m {
                    continue;
                }
                let up = rotor.dipole_element(RotState::new(a.label, m).unwrap(), RotState::new(b.label, m).unwrap(), FieldAxis::Z).unwrap();
                let down = rotor.dipole_element(RotState::new(a.label, -m).unwrap(), RotState::new(b.label, -m).unwrap(), FieldAxis::Z).unwrap();
                prop_assert!((up.norm() - down.norm()).abs() < 1e-12);
                if m > 0 && a.label.j >= m - 1 && b.label.j >= m {
                    let off = rotor.dipole_element(RotState::new(a.label, m - 1).unwrap(), RotState::new(b.label, m).unwrap(), FieldAxis::Z).unwrap();
                    prop_assert!(off.norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn k_doublet_coupling_is_linear_in_m(spec in molecule()) {
        let rotor = Rotor::new(&spec, 3).unwrap();
        let lower: LevelLabel = "3_31".parse().unwrap();
        let upper: LevelLabel = "3_30".parse().unwrap();
        let base = coupling::transition_coupling(&rotor, 1.0, 4.0, lower, upper, 1).unwrap().total_coupling;
        prop_assume!(base > 1e-9);
        for m in 2..=3 {
            let c = coupling::transition_coupling(&rotor, 1.0, 4.0, lower, upper, m).unwrap().total_coupling;
            prop_assert!((c / base - m as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn transition_table_is_upward(spec in molecule()) {
        for line in transition_table(&spec, 3).unwrap() {
            prop_assert!(line.frequency >= 0.0);
            prop_assert!((line.lower.j - line.upper.j).abs() <= 1);
        }
    }

    #[test]
    fn splitting_grows_as_root_n(g in 0.01f64..50.0, n in 1u32..200) {
        let ratio = coupling::splitting(g, n) / coupling::splitting(g, 1);
        prop_assert!((ratio - (n as f64).sqrt()).abs() < 1e-12 * ratio);
    }

    #[test]
    fn sandwich_chain_is_mirror_symmetric(mass in 20.0f64..300.0, radial in 8.0f64..20.0) {
        let chain = IonChainSpec::sandwich(171.936, mass, 1.0, radial, MassScaling::None);
        let modes = trap::normal_modes(&chain).unwrap();
        let z = &modes.positions;
        prop_assert!((z[0] + z[2]).abs() < 1e-9 * z[2].abs());
        prop_assert!(z[1].abs() < 1e-9 * z[2].abs());
        for mode in &modes.modes {
            let norm: f64 = mode.vector.iter().map(|x| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            prop_assert!(mode.frequency > 0.0);
        }
    }

    #[test]
    fn axial_com_mode_sits_at_the_trap_frequency(masses in proptest::collection::vec(20.0f64..200.0, 2..5)) {
        let same = masses[0];
        let mut particles: Vec<Particle> = masses.iter().map(|_| Particle::atom(same)).collect();
        particles[0] = Particle::molecule(same);
        let chain = IonChainSpec {
            particles,
            axial_mhz: 1.0,
            radial_mhz: 30.0,
            reference: ReferenceSpecies::Molecule,
            scaling: MassScaling::Pseudopotential,
        };
        let modes = trap::normal_modes(&chain).unwrap();
        let lowest = modes.axial().next().unwrap().frequency;
        prop_assert!((lowest - 1.0).abs() < 1e-9);
    }

    #[test]
    fn imperfect_polarization_is_normalized(eps in 0.0f64..=1.0) {
        for (base, extra) in [(FieldAxis::X, FieldAxis::Z), (FieldAxis::SigmaPlus, FieldAxis::SigmaMinus)] {
            for convention in [MixingConvention::Intensity, MixingConvention::Amplitude] {
                let p = microwave::imperfect_polarization(base, eps, extra, convention).unwrap();
                prop_assert!((p.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cooling_error_is_a_fraction(raw in proptest::collection::vec(0.0f64..1.0, 19)) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-6);
        let pops: Vec<f64> = raw.iter().map(|p| p / total).collect();
        let plan = protocol::depletion_plan(&ReferenceSettings::default(), 0.0).unwrap();
        let level = protocol::cooling_error(&plan.subspace, &pops, plan.target).unwrap();
        let single = protocol::cooling_error(&plan.subspace, &pops, Target::State(RotState::new(ReferenceSettings::lower(), 3).unwrap())).unwrap();
        prop_assert!((0.0..=1.0).contains(&level));
        prop_assert!(single >= level - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pulses_are_unitary(rabi in 2.0f64..40.0, area in 0.1f64..6.0, ramp in 0.0f64..0.5, detune in -0.05f64..0.05) {
        let settings = ReferenceSettings::default();
        let space = RotorSubspace::new(&settings.molecule, &[ReferenceSettings::auxiliary(), ReferenceSettings::upper()]).unwrap();
        let mut pulse = microwave::design_pulse(
            &space,
            RotState::new(ReferenceSettings::auxiliary(), 0).unwrap(),
            RotState::new(ReferenceSettings::upper(), 1).unwrap(),
            Polarization::preset(FieldAxis::SigmaPlus),
            rabi,
            Envelope::FlatTop { ramp_fraction: ramp },
            area,
        ).unwrap();
        pulse.carrier_mhz += detune;
        let u = microwave::pulse_unitary(&space, &[pulse], &MicrowaveOptions::default()).unwrap();
        let n = u.nrows();
        let err = (u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9);
    }

    #[test]
    fn lindblad_keeps_a_valid_state(
        coupling_khz in 0.0f64..10.0,
        rabi in 0.0f64..0.4,
        gamma in 0.01f64..0.5,
        eta in 0.0f64..0.05,
        p1 in 0.0f64..1.0,
        n1 in 0.0f64..1.0,
    ) {
        let space = CompositeSpace::default();
        let params = CoolingParams {
            coupling_khz,
            rabi_mhz: rabi,
            gamma_mhz: gamma,
            eta,
            duration_ms: 0.2,
            ..ReferenceSettings::default().cooling
        };
        let phonons = [1.0 - n1, n1 * 0.5, n1 * 0.5];
        let rho = DensityMatrix::ground_atoms(&space, &phonons, [p1, 1.0 - p1]).unwrap();
        let traj = lindblad::propagate(&space, &rho, &params, &CoolingOptions::default(), 0.05).unwrap();
        for rec in &traj.records {
            prop_assert!((rec.trace - 1.0).abs() < 1e-8);
            prop_assert!(rec.min_eigenvalue > -1e-8);
            prop_assert!(rec.purity <= 1.0 + 1e-9);
        }
        prop_assert!(traj.final_state.hermiticity_error() < 1e-10);
    }
}
