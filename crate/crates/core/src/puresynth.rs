//! Pure-state preparation: turn an n-qubit state vector into a ladder of
//! uniformly controlled Y and Z rotations.
//!
//! The amplitudes are viewed as leaves of a binary tree; each internal node
//! carries the Bloch angles of the split between its two sub-blocks. Level k
//! becomes a `F^k[R_y]`, `F^k[R_z]` pair controlled on qubits `0..k`. Phase
//! bookkeeping pushes all relative phases into the R_z angles; the single
//! leftover global phase is returned as a ledger value and stored on the
//! circuit.

use crate::circuit::{Axis, Circuit, Gate, Polarity};
use crate::error::{Error, Result};
use crate::linalg::StateVector;

/// Per-level rotation angles of the preparation ladder: at level `k`, branch
/// `a` (the state of qubits `0..k`), a Y rotation by `theta_y[k][a]` followed
/// by a Z rotation by `phi_z[k][a]` on qubit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTree {
    pub theta_y: Vec<Vec<f64>>,
    pub phi_z: Vec<Vec<f64>>,
}

/// Options for [`synth_pure_with`].
#[derive(Debug, Clone, Copy)]
pub struct PureSynthOptions {
    /// When only one branch at a level has amplitude, emit plain rotations
    /// instead of a full UCR. Exact on the prepared state (the other branches
    /// carry no amplitude), not on the full unitary.
    pub single_branch_rotations: bool,
}

impl Default for PureSynthOptions {
    fn default() -> Self {
        Self {
            single_branch_rotations: true,
        }
    }
}

/// Decompose a state into its angle tree plus a global-phase ledger.
///
/// Walking the tree with `theta`/`phi` reproduces `psi` times
/// `exp(-i * ledger)`; branches with zero norm get `theta = phi = 0`, and a
/// one-sided branch inherits the phase of its populated child so no spurious
/// rotations appear.
pub fn pure_angles(psi: &StateVector) -> Result<(AngleTree, f64)> {
    let n = psi.num_qubits;
    let mut mags: Vec<f64> = psi.amplitudes.iter().map(|a| a.norm()).collect();
    if mags.iter().all(|&m| m == 0.0) {
        return Err(Error::Validation("cannot synthesize the zero vector".into()));
    }
    let mut phases: Vec<f64> = psi
        .amplitudes
        .iter()
        .zip(&mags)
        .map(|(a, &m)| if m > 0.0 { a.arg() } else { 0.0 })
        .collect();
    let mut populated: Vec<bool> = mags.iter().map(|&m| m > 0.0).collect();

    let mut theta_y = vec![Vec::new(); n];
    let mut phi_z = vec![Vec::new(); n];
    for k in (0..n).rev() {
        let half = 1usize << k;
        let mut up_mags = vec![0.0; half];
        let mut up_phases = vec![0.0; half];
        let mut up_pop = vec![false; half];
        let mut theta = vec![0.0; half];
        let mut phi = vec![0.0; half];
        for a in 0..half {
            let (m0, m1) = (mags[2 * a], mags[2 * a + 1]);
            let (p0, p1) = (phases[2 * a], phases[2 * a + 1]);
            up_mags[a] = m0.hypot(m1);
            match (populated[2 * a], populated[2 * a + 1]) {
                (true, true) => {
                    theta[a] = 2.0 * m1.atan2(m0);
                    phi[a] = p1 - p0;
                    up_phases[a] = 0.5 * (p0 + p1);
                    up_pop[a] = true;
                }
                (true, false) => {
                    up_phases[a] = p0;
                    up_pop[a] = true;
                }
                (false, true) => {
                    theta[a] = std::f64::consts::PI;
                    up_phases[a] = p1;
                    up_pop[a] = true;
                }
                (false, false) => {}
            }
        }
        theta_y[k] = theta;
        phi_z[k] = phi;
        mags = up_mags;
        phases = up_phases;
        populated = up_pop;
    }
    Ok((AngleTree { theta_y, phi_z }, phases[0]))
}

/// Branches at level `k` that carry any amplitude of `psi`.
fn populated_branches(psi: &StateVector, k: usize) -> Vec<usize> {
    let n = psi.num_qubits;
    let block = 1usize << (n - k);
    (0..1usize << k)
        .filter(|&a| {
            psi.amplitudes[a * block..(a + 1) * block]
                .iter()
                .any(|z| z.norm() > 0.0)
        })
        .collect()
}

/// Build the UCR ladder preparing `psi` from |0...0>.
///
/// The circuit's `global_phase` is set so the simulated output equals `psi`
/// exactly, not just up to phase.
pub fn synth_pure(psi: &StateVector) -> Result<Circuit> {
    synth_pure_with(psi, PureSynthOptions::default())
}

pub fn synth_pure_with(psi: &StateVector, opts: PureSynthOptions) -> Result<Circuit> {
    let n = psi.num_qubits;
    let (tree, ledger) = pure_angles(psi)?;
    let mut c = Circuit::new(n);
    c.global_phase = ledger;
    for k in 0..n {
        let branches = if opts.single_branch_rotations {
            populated_branches(psi, k)
        } else {
            Vec::new()
        };
        if opts.single_branch_rotations && branches.len() == 1 {
            let a = branches[0];
            c.push(Gate::Ry {
                qubit: k,
                angle: tree.theta_y[k][a],
            })?;
            c.push(Gate::Rz {
                qubit: k,
                angle: tree.phi_z[k][a],
            })?;
            continue;
        }
        let controls: Vec<usize> = (0..k).collect();
        c.push(Gate::Ucr {
            axis: Axis::Y,
            controls: controls.clone(),
            target: k,
            angles: tree.theta_y[k].clone(),
        })?;
        c.push(Gate::Ucr {
            axis: Axis::Z,
            controls,
            target: k,
            angles: tree.phi_z[k].clone(),
        })?;
    }
    Ok(c)
}

/// Gates realizing the diagonal `|a> -> exp(i phases[a]) |a>` on `qubits`, up
/// to the returned global phase: an R_z-axis UCR per qubit, solved level by
/// level from the phase differences of adjacent sub-blocks.
pub fn diagonal_phase_gates(qubits: &[usize], phases: &[f64]) -> Result<(Vec<Gate>, f64)> {
    let m = qubits.len();
    if phases.len() != 1 << m {
        return Err(Error::Dimension(format!(
            "diagonal over {m} qubits needs {} phases, got {}",
            1usize << m,
            phases.len()
        )));
    }
    let mut level: Vec<f64> = phases.to_vec();
    let mut gates = Vec::new();
    for j in (0..m).rev() {
        let half = 1usize << j;
        let mut next = vec![0.0; half];
        let mut angles = vec![0.0; half];
        for a in 0..half {
            angles[a] = level[2 * a + 1] - level[2 * a];
            next[a] = 0.5 * (level[2 * a] + level[2 * a + 1]);
        }
        if j == 0 {
            gates.push(Gate::Rz {
                qubit: qubits[0],
                angle: angles[0],
            });
        } else {
            gates.push(Gate::Ucr {
                axis: Axis::Z,
                controls: qubits[..j].to_vec(),
                target: qubits[j],
                angles,
            });
        }
        level = next;
    }
    Ok((gates, level[0]))
}

/// The preparation ladder for `psi` on `targets` with every UCR's control set
/// enlarged by `controls`: the block acts as the preparation unitary times
/// `exp(-i * ledger)` on the matching control branch and as the identity on
/// every other branch. Returns the gates and the ledger phase, which the
/// caller must cancel (see [`synth_pure_as_controlled`]) for branch-exact
/// phases.
pub fn controlled_ucr_ladder(
    psi: &StateVector,
    controls: &[(usize, Polarity)],
    targets: &[usize],
) -> Result<(Vec<Gate>, f64)> {
    let n = psi.num_qubits;
    if targets.len() != n {
        return Err(Error::Dimension(format!(
            "state has {n} qubits but {} targets given",
            targets.len()
        )));
    }
    let kc = controls.len();
    let mut pattern = 0usize;
    for (pos, (_, pol)) in controls.iter().enumerate() {
        if *pol == Polarity::Positive {
            pattern |= 1 << (kc - 1 - pos);
        }
    }
    let ctrl_qs: Vec<usize> = controls.iter().map(|(q, _)| *q).collect();
    let (tree, ledger) = pure_angles(psi)?;
    let mut gates = Vec::new();
    for k in 0..n {
        let mut all_controls = ctrl_qs.clone();
        all_controls.extend_from_slice(&targets[..k]);
        let width = 1usize << (kc + k);
        let mut theta = vec![0.0; width];
        let mut phi = vec![0.0; width];
        for b in 0..1usize << k {
            theta[(pattern << k) | b] = tree.theta_y[k][b];
            phi[(pattern << k) | b] = tree.phi_z[k][b];
        }
        gates.push(Gate::Ucr {
            axis: Axis::Y,
            controls: all_controls.clone(),
            target: targets[k],
            angles: theta,
        });
        gates.push(Gate::Ucr {
            axis: Axis::Z,
            controls: all_controls,
            target: targets[k],
            angles: phi,
        });
    }
    Ok((gates, ledger))
}

/// Controlled preparation block with exact branch phases: the enlarged UCR
/// ladder followed by a diagonal correction on the control qubits. Applying
/// the returned gates and then the returned global phase acts as exactly the
/// preparation unitary on the active control branch and as the identity on
/// the others (diagonal corrections cannot carry the determinant, hence the
/// explicit phase).
pub fn synth_pure_as_controlled(
    psi: &StateVector,
    controls: &[(usize, Polarity)],
    targets: &[usize],
) -> Result<(Vec<Gate>, f64)> {
    let (mut gates, ledger) = controlled_ucr_ladder(psi, controls, targets)?;
    if controls.is_empty() {
        return Ok((gates, ledger));
    }
    let kc = controls.len();
    let mut pattern = 0usize;
    for (pos, (_, pol)) in controls.iter().enumerate() {
        if *pol == Polarity::Positive {
            pattern |= 1 << (kc - 1 - pos);
        }
    }
    let ctrl_qs: Vec<usize> = controls.iter().map(|(q, _)| *q).collect();
    let mut phases = vec![0.0; 1 << kc];
    phases[pattern] = ledger;
    let (correction, residual) = diagonal_phase_gates(&ctrl_qs, &phases)?;
    gates.extend(correction);
    Ok((gates, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{gate_counts, gate_counts_with, lower_all, unitary_of, LowerOptions};
    use crate::linalg::ComplexMatrix;
    use crate::sim::run_pure;
    use crate::testutil::{c64, random_state};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn prepared(c: &Circuit) -> StateVector {
        run_pure(c, &StateVector::basis(c.num_qubits, 0)).unwrap()
    }

    fn max_amp_dev(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn angles_of_all_zeros_state() {
        let psi = StateVector::basis(3, 0);
        let (tree, ledger) = pure_angles(&psi).unwrap();
        assert_eq!(ledger, 0.0);
        for k in 0..3 {
            assert!(tree.theta_y[k].iter().all(|&t| t == 0.0));
            assert!(tree.phi_z[k].iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn angles_of_one_state() {
        let psi = StateVector::basis(1, 1);
        let (tree, ledger) = pure_angles(&psi).unwrap();
        assert_eq!(tree.theta_y[0][0], PI);
        assert_eq!(tree.phi_z[0][0], 0.0);
        assert_eq!(ledger, 0.0);
    }

    #[test]
    fn angles_of_uniform_two_qubit_state() {
        let h = c64(0.5, 0.0);
        let psi = StateVector::new(2, vec![h, h, h, h]).unwrap();
        let (tree, _) = pure_angles(&psi).unwrap();
        assert!((tree.theta_y[0][0] - PI / 2.0).abs() < 1e-15);
        assert!((tree.theta_y[1][0] - PI / 2.0).abs() < 1e-15);
        assert!((tree.theta_y[1][1] - PI / 2.0).abs() < 1e-15);
        for k in 0..2 {
            assert!(tree.phi_z[k].iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn angle_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..=5 {
            let psi = random_state(&mut rng, n);
            let (tree, _) = pure_angles(&psi).unwrap();
            for k in 0..n {
                for (&t, &p) in tree.theta_y[k].iter().zip(&tree.phi_z[k]) {
                    assert!((0.0..=PI).contains(&t));
                    assert!(p > -2.0 * PI && p <= 2.0 * PI);
                }
            }
        }
    }

    #[test]
    fn prepares_random_states_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for n in 1..=6 {
            for _ in 0..10 {
                let psi = random_state(&mut rng, n);
                let c = synth_pure(&psi).unwrap();
                assert!(max_amp_dev(&prepared(&c), &psi) < 1e-12, "n={n}");
                let lowered = lower_all(&c).unwrap();
                assert!(max_amp_dev(&prepared(&lowered), &psi) < 1e-12, "lowered n={n}");
            }
        }
    }

    #[test]
    fn worst_case_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let opts = LowerOptions {
            skip_zero_rotations: false,
            fuse_ucr_pairs: true,
        };
        for n in 1..=6 {
            let psi = random_state(&mut rng, n);
            let c = synth_pure(&psi).unwrap();
            let counts = gate_counts_with(&c, opts).unwrap();
            let expect_cnot = (1usize << (n + 1)) - 2 * n - 2;
            let expect_rot = (1usize << (n + 1)) - 2;
            assert_eq!(counts.cnot, expect_cnot, "n={n}");
            assert_eq!(counts.one_qubit_rotations, expect_rot, "n={n}");
        }
    }

    #[test]
    fn zero_skip_soundness() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for n in 1..=5 {
            let psi = random_state(&mut rng, n);
            let c = synth_pure(&psi).unwrap();
            let skipped = lower_all(&c).unwrap();
            let full = lower_all_with_no_skip(&c);
            let f1 = prepared(&skipped).overlap_sq(&psi);
            let f2 = prepared(&full).overlap_sq(&psi);
            assert!((f1 - f2).abs() < 1e-12);
        }
    }

    fn lower_all_with_no_skip(c: &Circuit) -> Circuit {
        crate::circuit::lower_all_with(
            c,
            LowerOptions {
                skip_zero_rotations: false,
                fuse_ucr_pairs: true,
            },
        )
        .unwrap()
    }

    #[test]
    fn product_state_needs_no_cnots() {
        let a = c64(0.8, 0.0);
        // Phase small enough that no leaf phase wraps past pi, so the Z-angle
        // levels stay exactly constant and collapse.
        let b = Complex64::from_polar(0.6, 0.3);
        let n = 4;
        let mut amps = vec![c64(1.0, 0.0)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for z in &amps {
                next.push(z * a);
                next.push(z * b);
            }
            amps = next;
        }
        let psi = StateVector::new(n, amps).unwrap();
        let c = synth_pure(&psi).unwrap();
        let counts = gate_counts(&c).unwrap();
        assert_eq!(counts.cnot, 0);
        assert!(max_amp_dev(&prepared(&lower_all(&c).unwrap()), &psi) < 1e-12);
    }

    #[test]
    fn basis_states_need_no_cnots() {
        for n in 1..=4 {
            for a in 0..1usize << n {
                let psi = StateVector::basis(n, a);
                let c = synth_pure(&psi).unwrap();
                let counts = gate_counts(&c).unwrap();
                assert_eq!(counts.cnot, 0, "n={n} a={a}");
                assert!(counts.one_qubit_rotations <= n);
                assert!(max_amp_dev(&prepared(&lower_all(&c).unwrap()), &psi) < 1e-12);
            }
        }
    }

    #[test]
    fn sparse_states_beat_dense_worst_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let n = 4;
        for s in [1usize, 2, 3, 4] {
            let mut amps = vec![c64(0.0, 0.0); 1 << n];
            let mut support: Vec<usize> = (0..1usize << n).collect();
            for _ in 0..s {
                let pick = rng.gen_range(0..support.len());
                let a = support.swap_remove(pick);
                amps[a] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in amps.iter_mut() {
                *z /= norm;
            }
            let psi = StateVector::new(n, amps).unwrap();
            let c = synth_pure(&psi).unwrap();
            let counts = gate_counts(&c).unwrap();
            let dense = (1usize << (n + 1)) - 2 * n - 2;
            assert!(counts.cnot <= dense, "s={s}");
            if s == 1 {
                assert_eq!(counts.cnot, 0);
            }
            assert!(max_amp_dev(&prepared(&lower_all(&c).unwrap()), &psi) < 1e-12);
        }
    }

    #[test]
    fn diagonal_phase_gates_realize_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for m in 1..=3 {
            let phases: Vec<f64> = (0..1usize << m)
                .map(|_| rng.gen_range(-PI..PI))
                .collect();
            let qubits: Vec<usize> = (0..m).collect();
            let (gates, global) = diagonal_phase_gates(&qubits, &phases).unwrap();
            let mut c = Circuit::new(m);
            c.extend(gates).unwrap();
            c.global_phase = global;
            let u = unitary_of(&c).unwrap();
            for a in 0..1usize << m {
                for b in 0..1usize << m {
                    let want = if a == b {
                        Complex64::from_polar(1.0, phases[a])
                    } else {
                        c64(0.0, 0.0)
                    };
                    assert!((u[(a, b)] - want).norm() < 1e-12, "m={m}");
                }
            }
        }
    }

    #[test]
    fn controlled_empty_controls_matches_synth_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let psi = random_state(&mut rng, 3);
        let (gates, phase) = synth_pure_as_controlled(&psi, &[], &[0, 1, 2]).unwrap();
        let mut c = Circuit::new(3);
        c.extend(gates).unwrap();
        c.global_phase = phase;
        assert!(max_amp_dev(&prepared(&c), &psi) < 1e-12);
    }

    #[test]
    fn controlled_flip_block_unitary() {
        // Control on qubit 0, target |1> on qubit 1: the active branch is
        // exactly R_y(pi), the idle branch the identity.
        let psi = StateVector::basis(1, 1);
        let (gates, phase) =
            synth_pure_as_controlled(&psi, &[(0, Polarity::Positive)], &[1]).unwrap();
        let mut c = Circuit::new(2);
        c.extend(gates).unwrap();
        c.global_phase = phase;
        let u = unitary_of(&c).unwrap();
        let mut want = ComplexMatrix::identity(4);
        want[(2, 2)] = c64(0.0, 0.0);
        want[(3, 3)] = c64(0.0, 0.0);
        want[(2, 3)] = c64(-1.0, 0.0);
        want[(3, 2)] = c64(1.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                assert!((u[(i, j)] - want[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn negative_controls_select_zero_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let psi = random_state(&mut rng, 1);
        let controls = [(0, Polarity::Negative), (1, Polarity::Negative)];
        let (gates, phase) = synth_pure_as_controlled(&psi, &controls, &[2]).unwrap();
        let mut c = Circuit::new(3);
        c.extend(gates).unwrap();
        c.global_phase = phase;
        for anc in 0..4usize {
            let init = StateVector::basis(3, anc << 1);
            let out = run_pure(&c, &init).unwrap();
            if anc == 0 {
                // |00> branch: target carries psi, exact phases included.
                assert!((out.amplitudes[0] - psi.amplitudes[0]).norm() < 1e-12);
                assert!((out.amplitudes[1] - psi.amplitudes[1]).norm() < 1e-12);
            } else {
                assert!((out.amplitudes[anc << 1] - c64(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn branch_phase_exactness_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..10 {
            let psi = random_state(&mut rng, 2);
            let controls = [(0, Polarity::Positive), (1, Polarity::Negative)];
            let (gates, phase) = synth_pure_as_controlled(&psi, &controls, &[2, 3]).unwrap();
            let mut c = Circuit::new(4);
            c.extend(gates).unwrap();
            c.global_phase = phase;
            let u = unitary_of(&c).unwrap();
            // Active branch |10> on the controls; block rows/cols 8..12.
            let block = 8;
            let prep = synth_pure(&psi).unwrap();
            let want = unitary_of(&prep).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!(
                        (u[(block + i, block + j)] - want[(i, j)]).norm() < 1e-12,
                        "active branch deviates"
                    );
                }
            }
            // Idle branches are exactly the identity.
            for a in 0..16 {
                if (8..12).contains(&a) {
                    continue;
                }
                assert!((u[(a, a)] - c64(1.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_vector_rejected() {
        let psi = StateVector {
            num_qubits: 1,
            amplitudes: vec![c64(0.0, 0.0), c64(0.0, 0.0)],
        };
        assert!(pure_angles(&psi).is_err());
    }
}
