//! Library results against independent reference computations.

mod common;

use approx::assert_relative_eq;
use nalgebra::{Matrix2, SymmetricEigen};
use rotcool::angular::{direction_cosine_spherical, wigner3j_doubled, SymTopKet};
use rotcool::coupling;
use rotcool::presets;
use rotcool::trap::{self, MassScaling, Particle, ReferenceSpecies};
use rotcool::{IonChainSpec, LevelLabel, RotState};

#[test]
fn wigner3j_matches_racah_rationals() {
    let mut worst = 0.0f64;
    for a in common::all_3j_arguments(5) {
        let ours = wigner3j_doubled(a[0], a[1], a[2], a[3], a[4], a[5]).unwrap();
        worst = worst.max((ours - common::racah_3j(a[0], a[1], a[2], a[3], a[4], a[5])).abs());
    }
    assert!(worst < 1e-12, "max error {worst:e}");
}

#[test]
fn wigner3j_known_values() {
    // (1 1 0; 0 0 0) = -1/√3 and (1 1 2; 1 -1 0) = 1/√30.
    assert_relative_eq!(
        wigner3j_doubled(2, 2, 0, 0, 0, 0).unwrap(),
        -1.0 / 3f64.sqrt(),
        max_relative = 1e-15
    );
    assert_relative_eq!(
        wigner3j_doubled(2, 2, 4, 2, -2, 0).unwrap(),
        1.0 / 30f64.sqrt(),
        max_relative = 1e-15
    );
    assert_eq!(wigner3j_doubled(2, 2, 6, 0, 0, 0).unwrap(), 0.0);
    assert!(wigner3j_doubled(2, 2, 2, 1, 0, -1).is_err());
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Wigner small-d from the explicit finite sum.
fn small_d(j: i64, mp: i64, m: i64, beta: f64) -> f64 {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let pre = (factorial(j + mp) * factorial(j - mp) * factorial(j + m) * factorial(j - m)).sqrt();
    let mut sum = 0.0;
    for k in 0..=(2 * j) {
        let dens = [j + m - k, k, mp - m + k, j - mp - k];
        if dens.iter().any(|&d| d < 0) {
            continue;
        }
        let sign = if (mp - m + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let den: f64 = dens.iter().map(|&d| factorial(d)).product();
        sum += sign / den * c.powi((2 * j + m - mp - 2 * k) as i32) * s.powi((mp - m + 2 * k) as i32);
    }
    pre * sum
}

/// Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// ⟨J'KM|cos θ|JKM⟩ by quadrature over the Euler angle θ; the φ and χ integrals are analytic.
fn cos_theta_by_quadrature(jp: i64, j: i64, k: i64, m: i64, nodes: &[(f64, f64)]) -> f64 {
    let integral: f64 = nodes
        .iter()
        .map(|&(x, w)| {
            let beta = x.acos();
            w * small_d(jp, m, k, beta) * small_d(j, m, k, beta) * x
        })
        .sum();
    0.5 * (((2 * j + 1) * (2 * jp + 1)) as f64).sqrt() * integral
}

#[test]
fn direction_cosine_matches_euler_quadrature() {
    let nodes = gauss_legendre(24);
    let mut worst = 0.0f64;
    for j in 0..=5 {
        for jp in (j - 1).max(0)..=j + 1 {
            for k in -j.min(jp)..=j.min(jp) {
                for m in -j.min(jp)..=j.min(jp) {
                    let ours = direction_cosine_spherical(
                        SymTopKet::new(jp, k, m).unwrap(),
                        SymTopKet::new(j, k, m).unwrap(),
                        0,
                        0,
                    );
                    let oracle = cos_theta_by_quadrature(jp, j, k, m, &nodes);
                    worst = worst.max((ours - oracle).abs());
                }
            }
        }
    }
    assert!(worst < 1e-12, "max error {worst:e}");
}

/// Potential in natural units with axial coordinates z and radial coordinates y.
fn potential(z: &[f64], y: &[f64], axial_k: &[f64], radial_k: &[f64]) -> f64 {
    let mut v = 0.0;
    for i in 0..z.len() {
        v += 0.5 * axial_k[i] * z[i] * z[i] + 0.5 * radial_k[i] * y[i] * y[i];
        for j in (i + 1)..z.len() {
            v += 1.0 / ((z[i] - z[j]).powi(2) + (y[i] - y[j]).powi(2)).sqrt();
        }
    }
    v
}

fn mixed_chain() -> IonChainSpec {
    IonChainSpec {
        particles: vec![
            Particle::atom(171.936),
            Particle::molecule(77.0),
            Particle::atom(171.936),
            Particle::atom(40.0),
        ],
        axial_mhz: 1.0,
        radial_mhz: 9.0,
        reference: ReferenceSpecies::Molecule,
        scaling: MassScaling::Pseudopotential,
    }
}

#[test]
fn hessians_match_finite_differences() {
    let chain = mixed_chain();
    let (axial, radial, z) = trap::mass_weighted_hessians(&chain).unwrap();
    let m_ref = chain.reference_mass();
    let mu: Vec<f64> = chain.particles.iter().map(|p| p.mass / m_ref).collect();
    let freqs = chain.particle_frequencies();
    let axial_k: Vec<f64> = freqs
        .iter()
        .zip(&mu)
        .map(|((a, _), m)| m * (a / chain.axial_mhz).powi(2))
        .collect();
    let radial_k: Vec<f64> = freqs
        .iter()
        .zip(&mu)
        .map(|((_, r), m)| m * (r / chain.axial_mhz).powi(2))
        .collect();
    let n = z.len();
    let y0 = vec![0.0; n];
    let h = 1e-4;

    let eval = |dz: &[(usize, f64)], dy: &[(usize, f64)]| {
        let mut zz = z.clone();
        let mut yy = y0.clone();
        dz.iter().for_each(|&(i, d)| zz[i] += d);
        dy.iter().for_each(|&(i, d)| yy[i] += d);
        potential(&zz, &yy, &axial_k, &radial_k)
    };
    for i in 0..n {
        let grad = (eval(&[(i, h)], &[]) - eval(&[(i, -h)], &[])) / (2.0 * h);
        assert!(grad.abs() < 1e-6, "equilibrium gradient {grad:e}");
    }
    let fd = |along_z: bool, i: usize, j: usize| {
        let pick = |a: f64, b: f64| {
            let moves = [(i, a), (j, b)];
            if along_z {
                eval(&moves, &[])
            } else {
                eval(&[], &moves)
            }
        };
        (pick(h, h) - pick(h, -h) - pick(-h, h) + pick(-h, -h)) / (4.0 * h * h)
    };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let w = (mu[i] * mu[j]).sqrt();
            worst = worst.max((fd(true, i, j) / w - axial[(i, j)]).abs());
            worst = worst.max((fd(false, i, j) / w - radial[(i, j)]).abs());
        }
    }
    assert!(worst < 1e-5, "max Hessian deviation {worst:e}");
}

#[test]
fn mode_frequencies_match_independent_eigensolve() {
    let chain = mixed_chain();
    let (axial, radial, _) = trap::mass_weighted_hessians(&chain).unwrap();
    let modes = trap::normal_modes(&chain).unwrap();
    for (matrix, ours) in [
        (axial, modes.axial().map(|m| m.frequency).collect::<Vec<_>>()),
        (radial, modes.radial().map(|m| m.frequency).collect::<Vec<_>>()),
    ] {
        // Schur decomposition instead of the symmetric solver the library uses.
        let mut lambda: Vec<f64> = matrix.schur().eigenvalues().unwrap().iter().copied().collect();
        lambda.sort_by(f64::total_cmp);
        for (l, f) in lambda.iter().zip(&ours) {
            assert_relative_eq!(l.sqrt() * chain.axial_mhz, *f, max_relative = 1e-10);
        }
    }
}

#[test]
fn equal_mass_three_ion_spectrum() {
    for (axial, radial) in [(1.0, 5.0), (0.7, 3.1), (2.0, 18.0)] {
        let chain = IonChainSpec {
            particles: vec![Particle::atom(40.0), Particle::molecule(40.0), Particle::atom(40.0)],
            axial_mhz: axial,
            radial_mhz: radial,
            reference: ReferenceSpecies::Molecule,
            scaling: MassScaling::None,
        };
        let modes = trap::normal_modes(&chain).unwrap();
        let ax: Vec<f64> = modes.axial().map(|m| m.frequency).collect();
        for (f, ratio) in ax.iter().zip([1.0, 3f64.sqrt(), (29.0f64 / 5.0).sqrt()]) {
            assert_relative_eq!(*f, ratio * axial, max_relative = 1e-9);
        }
        let zigzag = (radial * radial - 12.0 / 5.0 * axial * axial).sqrt();
        assert_relative_eq!(modes.zigzag().unwrap().frequency, zigzag, max_relative = 1e-9);
    }
}

#[test]
fn dressed_states_diagonalize_the_resonant_pair() {
    let lower: LevelLabel = "3_31".parse().unwrap();
    let upper: LevelLabel = "3_30".parse().unwrap();
    let (j1, j2) = (RotState::new(lower, 2).unwrap(), RotState::new(upper, 2).unwrap());
    for n_p in 1..=9u32 {
        let g = 5.7 * (n_p as f64).sqrt();
        let eig = SymmetricEigen::new(Matrix2::new(0.0, g, g, 0.0));
        let states = coupling::dressed_states(n_p, j1, j2, 5.7).unwrap();
        for state in &states {
            let col = (0..2)
                .find(|&c| (eig.eigenvalues[c] - state.energy).abs() < 1e-12 * g)
                .unwrap();
            let v = eig.eigenvectors.column(col);
            let overlap = (v[0] * state.amplitudes[0] + v[1] * state.amplitudes[1]).abs();
            assert_relative_eq!(overlap, 1.0, max_relative = 1e-12);
        }
        assert_relative_eq!(states[0].overlap(&states[1]), 0.0, epsilon = 1e-15);
        assert_relative_eq!(
            states[0].phonon_expectation(n_p),
            n_p as f64 - 0.5,
            max_relative = 1e-12
        );
    }
    assert!(coupling::dressed_states(0, j1, j2, 5.7).is_err());
}

#[test]
fn bundled_asymmetric_top_levels_are_ordered_within_j() {
    for spec in presets::all_molecules() {
        for j in 0..=6 {
            let block = rotcool::rotor::build_rotor_block(&spec, j);
            assert!(block.levels.windows(2).all(|w| w[1].energy >= w[0].energy));
            let trace: f64 = block.levels.iter().map(|l| l.energy).sum();
            // The trace of the rigid-rotor Hamiltonian over a J block is (2J+1) J(J+1) (A+B+C)/3.
            let expected = (2 * j + 1) as f64 * (j * (j + 1)) as f64 * (spec.a + spec.b + spec.c) / 3.0;
            assert_relative_eq!(trace, expected, max_relative = 1e-12, epsilon = 1e-9);
        }
    }
}
