//! State-vector and density-matrix simulation.
//!
//! Gate application is in-place amplitude stride updates; macro gates (UCR,
//! CSWAP, controlled gates) are applied semantically, which makes the
//! simulator an oracle independent of the decomposition passes.

use num_complex::Complex64;

use crate::circuit::{Axis, Circuit, Gate, Polarity};
use crate::error::{Error, Result};
use crate::linalg::{self, DensityMatrix, StateVector};

pub const MAX_PURE_QUBITS: usize = 24;
pub const MAX_DENSITY_QUBITS: usize = 12;

fn bit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

fn apply_one_qubit(
    amps: &mut [Complex64],
    num_qubits: usize,
    qubit: usize,
    m: [[Complex64; 2]; 2],
) {
    let mask = bit_mask(num_qubits, qubit);
    for i in 0..amps.len() {
        if i & mask == 0 {
            let a0 = amps[i];
            let a1 = amps[i | mask];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn ry_matrix(angle: f64) -> [[Complex64; 2]; 2] {
    let half = angle / 2.0;
    [
        [
            Complex64::new(half.cos(), 0.0),
            Complex64::new(-half.sin(), 0.0),
        ],
        [
            Complex64::new(half.sin(), 0.0),
            Complex64::new(half.cos(), 0.0),
        ],
    ]
}

fn rz_matrix(angle: f64) -> [[Complex64; 2]; 2] {
    let half = angle / 2.0;
    [
        [Complex64::from_polar(1.0, -half), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, half)],
    ]
}

/// Apply one gate to an amplitude vector in place.
pub fn apply_gate(amps: &mut [Complex64], num_qubits: usize, gate: &Gate) -> Result<()> {
    match gate {
        Gate::X { qubit } => {
            let mask = bit_mask(num_qubits, *qubit);
            for i in 0..amps.len() {
                if i & mask == 0 {
                    amps.swap(i, i | mask);
                }
            }
        }
        Gate::H { qubit } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            apply_one_qubit(
                amps,
                num_qubits,
                *qubit,
                [
                    [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
                ],
            );
        }
        Gate::T { qubit } | Gate::Tdg { qubit } | Gate::S { qubit } => {
            let phase = match gate {
                Gate::T { .. } => Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
                Gate::Tdg { .. } => Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4),
                _ => Complex64::new(0.0, 1.0),
            };
            let mask = bit_mask(num_qubits, *qubit);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask != 0 {
                    *a *= phase;
                }
            }
        }
        Gate::Ry { qubit, angle } => {
            apply_one_qubit(amps, num_qubits, *qubit, ry_matrix(*angle));
        }
        Gate::Rz { qubit, angle } => {
            apply_one_qubit(amps, num_qubits, *qubit, rz_matrix(*angle));
        }
        Gate::Cnot { control, target } => {
            let cm = bit_mask(num_qubits, *control);
            let tm = bit_mask(num_qubits, *target);
            for i in 0..amps.len() {
                if i & cm != 0 && i & tm == 0 {
                    amps.swap(i, i | tm);
                }
            }
        }
        Gate::Cswap { control, a, b } => {
            let cm = bit_mask(num_qubits, *control);
            let am = bit_mask(num_qubits, *a);
            let bm = bit_mask(num_qubits, *b);
            for i in 0..amps.len() {
                if i & cm != 0 && i & am != 0 && i & bm == 0 {
                    amps.swap(i, i ^ (am | bm));
                }
            }
        }
        Gate::Ucr {
            axis,
            controls,
            target,
            angles,
        } => {
            let k = controls.len();
            let tm = bit_mask(num_qubits, *target);
            for i in 0..amps.len() {
                if i & tm != 0 {
                    continue;
                }
                let mut branch = 0usize;
                for (pos, &c) in controls.iter().enumerate() {
                    if i & bit_mask(num_qubits, c) != 0 {
                        branch |= 1 << (k - 1 - pos);
                    }
                }
                let m = match axis {
                    Axis::Y => ry_matrix(angles[branch]),
                    Axis::Z => rz_matrix(angles[branch]),
                };
                let a0 = amps[i];
                let a1 = amps[i | tm];
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i | tm] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Gate::Controlled { gate, controls } => {
            let inner_qubit = match gate.as_ref() {
                Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } | Gate::X { qubit } => *qubit,
                other => {
                    return Err(Error::Circuit(format!(
                        "cannot simulate controlled {other:?}"
                    )))
                }
            };
            let m = match gate.as_ref() {
                Gate::Ry { angle, .. } => ry_matrix(*angle),
                Gate::Rz { angle, .. } => rz_matrix(*angle),
                _ => [
                    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                ],
            };
            let tm = bit_mask(num_qubits, inner_qubit);
            'indices: for i in 0..amps.len() {
                if i & tm != 0 {
                    continue;
                }
                for (q, pol) in controls {
                    let set = i & bit_mask(num_qubits, *q) != 0;
                    let want = *pol == Polarity::Positive;
                    if set != want {
                        continue 'indices;
                    }
                }
                let a0 = amps[i];
                let a1 = amps[i | tm];
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i | tm] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
    Ok(())
}

/// Run a circuit on a pure input state; includes the circuit's global phase.
pub fn run_pure(c: &Circuit, init: &StateVector) -> Result<StateVector> {
    if c.num_qubits != init.num_qubits {
        return Err(Error::Dimension(format!(
            "circuit width {} vs state width {}",
            c.num_qubits, init.num_qubits
        )));
    }
    if c.num_qubits > MAX_PURE_QUBITS {
        return Err(Error::Dimension(format!(
            "pure simulation supports at most {MAX_PURE_QUBITS} qubits"
        )));
    }
    let mut amps = init.amplitudes.clone();
    for g in &c.gates {
        apply_gate(&mut amps, c.num_qubits, g)?;
    }
    if c.global_phase != 0.0 {
        let phase = Complex64::from_polar(1.0, c.global_phase);
        for a in amps.iter_mut() {
            *a *= phase;
        }
    }
    Ok(StateVector {
        num_qubits: c.num_qubits,
        amplitudes: amps,
    })
}

/// Run a circuit on a density matrix: rho -> U rho U^dag gate by gate.
pub fn run_density(c: &Circuit, init: &DensityMatrix) -> Result<DensityMatrix> {
    if c.num_qubits != init.num_qubits {
        return Err(Error::Dimension(format!(
            "circuit width {} vs density width {}",
            c.num_qubits, init.num_qubits
        )));
    }
    if c.num_qubits > MAX_DENSITY_QUBITS {
        return Err(Error::Dimension(format!(
            "density simulation supports at most {MAX_DENSITY_QUBITS} qubits"
        )));
    }
    let d = init.dim();
    let mut rho = init.matrix.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    for g in &c.gates {
        // rho <- U rho (columns), then rho <- rho U^dag (conjugated rows).
        for col in 0..d {
            for (row, b) in buf.iter_mut().enumerate() {
                *b = rho[(row, col)];
            }
            apply_gate(&mut buf, c.num_qubits, g)?;
            for (row, b) in buf.iter().enumerate() {
                rho[(row, col)] = *b;
            }
        }
        for row in 0..d {
            for (col, b) in buf.iter_mut().enumerate() {
                *b = rho[(row, col)].conj();
            }
            apply_gate(&mut buf, c.num_qubits, g)?;
            for (col, b) in buf.iter().enumerate() {
                rho[(row, col)] = b.conj();
            }
        }
    }
    Ok(DensityMatrix {
        num_qubits: c.num_qubits,
        matrix: rho,
    })
}

/// Verification target: either a pure state or a density matrix.
#[derive(Debug, Clone)]
pub enum Target {
    Pure(StateVector),
    Density(DensityMatrix),
}

#[derive(Debug, Clone)]
pub struct SimResult {
    /// Full output state when the whole run stays pure.
    pub pure_out: Option<StateVector>,
    /// Reduced state over the non-trash qubits.
    pub traced: DensityMatrix,
    pub fidelity: f64,
    pub trace_distance: f64,
}

/// Run the circuit from |0...0>, trace out `trash`, and compare with the
/// target state.
pub fn verify(target: &Target, c: &Circuit, trash: &[usize]) -> Result<SimResult> {
    let keep: Vec<usize> = (0..c.num_qubits).filter(|q| !trash.contains(q)).collect();
    if keep.is_empty() {
        return Err(Error::Dimension("verify: all qubits are trash".into()));
    }
    let target_qubits = match target {
        Target::Pure(s) => s.num_qubits,
        Target::Density(r) => r.num_qubits,
    };
    if keep.len() != target_qubits {
        return Err(Error::Dimension(format!(
            "verify: target has {} qubits but {} are kept",
            target_qubits,
            keep.len()
        )));
    }
    let out = run_pure(c, &StateVector::basis(c.num_qubits, 0))?;
    let traced = linalg::partial_trace_state(&out, &keep)?;
    let target_density = match target {
        Target::Pure(s) => s.outer(),
        Target::Density(r) => r.clone(),
    };
    let fidelity = linalg::fidelity(&traced, &target_density)?;
    let trace_distance = linalg::trace_distance(&traced, &target_density)?;
    Ok(SimResult {
        pure_out: if trash.is_empty() { Some(out) } else { None },
        traced,
        fidelity,
        trace_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{lower_all, unitary_of};
    use crate::linalg::frobenius_norm;
    use crate::testutil::{random_density, random_state};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_circuit(rng: &mut impl Rng, n: usize, len: usize) -> Circuit {
        let mut c = Circuit::new(n);
        for _ in 0..len {
            let q = rng.gen_range(0..n);
            match rng.gen_range(0..5) {
                0 => c.push(Gate::H { qubit: q }).unwrap(),
                1 => c
                    .push(Gate::Ry {
                        qubit: q,
                        angle: rng.gen_range(-3.0..3.0),
                    })
                    .unwrap(),
                2 => c
                    .push(Gate::Rz {
                        qubit: q,
                        angle: rng.gen_range(-3.0..3.0),
                    })
                    .unwrap(),
                3 => c.push(Gate::T { qubit: q }).unwrap(),
                _ => {
                    if n > 1 {
                        let mut t = rng.gen_range(0..n);
                        while t == q {
                            t = rng.gen_range(0..n);
                        }
                        c.push(Gate::Cnot {
                            control: q,
                            target: t,
                        })
                        .unwrap();
                    }
                }
            }
        }
        c
    }

    #[test]
    fn empty_circuit_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(&mut rng, 3);
        let out = run_pure(&Circuit::new(3), &s).unwrap();
        assert_eq!(out.amplitudes, s.amplitudes);
    }

    #[test]
    fn x_flips_basis_state() {
        let mut c = Circuit::new(1);
        c.push(Gate::X { qubit: 0 }).unwrap();
        let out = run_pure(&c, &StateVector::basis(1, 0)).unwrap();
        assert!((out.amplitudes[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norm_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_state(&mut rng, 4);
        let c = random_circuit(&mut rng, 4, 40);
        let out = run_pure(&c, &s).unwrap();
        let norm: f64 = out.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_matches_pure_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4usize {
            let s = random_state(&mut rng, n);
            let c = random_circuit(&mut rng, n, 25);
            let pure = run_pure(&c, &s).unwrap();
            let density = run_density(&c, &s.outer()).unwrap();
            let dev = frobenius_norm(&density.matrix.sub(&pure.outer().matrix));
            assert!(dev <= 1e-12, "n={n} dev={dev:e}");
        }
    }

    #[test]
    fn density_preserves_trace_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(&mut rng, 3);
        let c = random_circuit(&mut rng, 3, 30);
        let out = run_density(&c, &rho).unwrap();
        assert!((out.matrix.trace().re - 1.0).abs() < 1e-12);
        assert!(crate::linalg::hermitian_deviation(&out.matrix) < 1e-12);
    }

    #[test]
    fn unitary_columns_match_run_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=4usize {
            let c = random_circuit(&mut rng, n, 20);
            let u = unitary_of(&c).unwrap();
            for a in 0..(1usize << n) {
                let out = run_pure(&c, &StateVector::basis(n, a)).unwrap();
                for row in 0..(1usize << n) {
                    assert!((u[(row, a)] - out.amplitudes[row]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cswap_action_with_control_off_and_on() {
        let mut c = Circuit::new(3);
        c.push(Gate::Cswap {
            control: 0,
            a: 1,
            b: 2,
        })
        .unwrap();
        // Control |0>: nothing happens.
        for idx in 0..4 {
            let out = run_pure(&c, &StateVector::basis(3, idx)).unwrap();
            assert!((out.amplitudes[idx].norm() - 1.0).abs() < 1e-15);
        }
        // Control |1>: |1,a,b> -> |1,b,a>.
        let out = run_pure(&c, &StateVector::basis(3, 0b101)).unwrap();
        assert!((out.amplitudes[0b110].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lowered_circuit_matches_macro_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut c = Circuit::new(4);
        c.push(Gate::Ucr {
            axis: Axis::Y,
            controls: vec![0, 1, 2],
            target: 3,
            angles: (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        })
        .unwrap();
        c.push(Gate::Cswap {
            control: 0,
            a: 1,
            b: 2,
        })
        .unwrap();
        let s = random_state(&mut rng, 4);
        let macro_out = run_pure(&c, &s).unwrap();
        let lowered_out = run_pure(&lower_all(&c).unwrap(), &s).unwrap();
        for (a, b) in macro_out.amplitudes.iter().zip(&lowered_out.amplitudes) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn verify_self_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = random_circuit(&mut rng, 3, 20);
        let out = run_pure(&c, &StateVector::basis(3, 0)).unwrap();
        let r = verify(&Target::Pure(out), &c, &[]).unwrap();
        assert!(r.fidelity >= 1.0 - 1e-12);
        assert!(r.trace_distance <= 1e-6);
    }
}
