//! Mixed-state preparation from an ensemble or a density matrix.
//!
//! Two routes: the CSWAP mixture ladder (each ensemble member prepared in its
//! own register, swapped into the main register with probability controlled
//! by a weight rotation on an ancilla) and purification (ancillas prepared in
//! the weight state, each member prepared by a controlled block on its
//! ancilla pattern). The density-matrix entry point factorizes with the
//! Cholesky module first.

use num_complex::Complex64;

use crate::cholesky::{ensemble_from_density, Ensemble, FactorKind};
use crate::circuit::{gate_counts, Axis, Circuit, Gate, GateCountReport, Polarity};
use crate::error::{Error, Result};
use crate::linalg::{fidelity, partial_trace, partial_trace_state, trace_distance, DensityMatrix, StateVector};
use crate::puresynth::{controlled_ucr_ladder, diagonal_phase_gates, pure_angles, synth_pure};
use crate::sim::{run_density, run_pure};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Which mixed-state construction to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthMethod {
    Mixture,
    Purification,
}

/// Register layout and angle budget of a mixed-state synthesis.
#[derive(Debug, Clone)]
pub struct MixedSynthesisPlan {
    pub method: SynthMethod,
    pub ensemble: Ensemble,
    /// Purification: number of ancilla qubits, ceil(log2 l). Mixture: the
    /// l - 1 weight ancillas.
    pub ancilla_count: usize,
    /// Mixture weight-rotation half-angles, one per mixing step.
    pub weight_angles: Vec<f64>,
    pub target: Vec<usize>,
    pub trash: Vec<usize>,
}

/// Error of the synthesized state against the requested one.
#[derive(Debug, Clone, Copy)]
pub struct ApproxError {
    pub trace_distance: f64,
    pub fidelity: f64,
}

fn ensemble_width(e: &Ensemble) -> Result<usize> {
    if e.is_empty() {
        return Err(Error::EmptyEnsemble("ensemble has no members".into()));
    }
    let n = e.states[0].num_qubits;
    if e.states.iter().any(|s| s.num_qubits != n) {
        return Err(Error::Dimension(
            "ensemble states have mixed qubit counts".into(),
        ));
    }
    let sum: f64 = e.weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Validation(format!(
            "ensemble weights sum to {sum}, expected 1"
        )));
    }
    Ok(n)
}

/// Number of ancillas needed to index `l` ensemble members.
pub fn purification_ancillas(l: usize) -> usize {
    if l <= 1 {
        0
    } else {
        (usize::BITS - (l - 1).leading_zeros()) as usize
    }
}

/// Weight-rotation half-angles of the mixing ladder:
/// `alpha_i = arctan(sqrt(p_i / sum_{j<i} p_j))` for i = 1..l-1. Step i of
/// the ladder swaps the fresh state in with probability `sin^2(alpha_i)`,
/// which telescopes to exactly the weights `p`.
pub fn mixture_weight_angles(p: &[f64]) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::EmptyEnsemble("no weights".into()));
    }
    if let Some(&bad) = p.iter().find(|&&w| w <= 0.0) {
        return Err(Error::Validation(format!("nonpositive weight {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::Validation(format!(
            "weights sum to {sum}, expected 1"
        )));
    }
    let mut prefix = p[0];
    let mut angles = Vec::with_capacity(p.len() - 1);
    for &pi in &p[1..] {
        angles.push((pi / prefix).sqrt().atan());
        prefix += pi;
    }
    Ok(angles)
}

/// Layout and angles for a synthesis without emitting gates.
pub fn plan(e: &Ensemble, method: SynthMethod) -> Result<MixedSynthesisPlan> {
    let n = ensemble_width(e)?;
    let l = e.len();
    match method {
        SynthMethod::Mixture => {
            let total = if l == 1 { n } else { l * (n + 1) - 1 };
            Ok(MixedSynthesisPlan {
                method,
                ensemble: e.clone(),
                ancilla_count: l - 1,
                weight_angles: mixture_weight_angles(&e.weights)?,
                target: (0..n).collect(),
                trash: (n..total).collect(),
            })
        }
        SynthMethod::Purification => {
            let m = purification_ancillas(l);
            Ok(MixedSynthesisPlan {
                method,
                ensemble: e.clone(),
                ancilla_count: m,
                weight_angles: Vec::new(),
                target: (m..m + n).collect(),
                trash: (0..m).collect(),
            })
        }
    }
}

/// Mixture ladder: main register 0..n-1 starts in |psi_0>; step i prepares
/// |psi_i> in a fresh register, rotates a fresh ancilla by 2 alpha_i, and
/// swaps the registers controlled on the ancilla. Tracing out everything but
/// the main register leaves `sum_i p_i |psi_i><psi_i|`.
pub fn synth_mixture(e: &Ensemble) -> Result<(Circuit, GateCountReport)> {
    let n = ensemble_width(e)?;
    let l = e.len();
    if l == 1 {
        let c = synth_pure(&e.states[0])?;
        let report = gate_counts(&c)?;
        return Ok((c, report));
    }
    let total = l * (n + 1) - 1;
    let mut c = Circuit::new(total);
    let angles = mixture_weight_angles(&e.weights)?;

    let main_prep = synth_pure(&e.states[0])?;
    c.global_phase += main_prep.global_phase;
    c.extend(main_prep.gates)?;
    for i in 1..l {
        let base = n + (i - 1) * (n + 1);
        let anc = base + n;
        let prep = synth_pure(&e.states[i])?;
        c.global_phase += prep.global_phase;
        c.extend(prep.gates.iter().map(|g| g.map_qubits(&|q| base + q)))?;
        c.push(Gate::Ry {
            qubit: anc,
            angle: 2.0 * angles[i - 1],
        })?;
        for q in 0..n {
            c.push(Gate::Cswap {
                control: anc,
                a: q,
                b: base + q,
            })?;
        }
    }
    c.metadata.target = (0..n).collect();
    c.metadata.trash = (n..total).collect();
    c.metadata.registers_static = total;
    c.metadata.registers_dynamic = 2 * n + 1;
    let report = gate_counts(&c)?;
    Ok((c, report))
}

/// Reduced state actually produced by the mixture ladder, simulated gate by
/// gate in the dynamic-register form: one (2n+1)-qubit density window per
/// mixing step, tracing each spent register immediately. Registers are never
/// touched after their step, so this equals the static circuit's reduced
/// output while staying simulable for any ensemble size.
pub fn mixture_reduced_state(e: &Ensemble) -> Result<DensityMatrix> {
    let n = ensemble_width(e)?;
    let l = e.len();
    let first = synth_pure(&e.states[0])?;
    let mut rho = run_pure(&first, &StateVector::basis(n, 0))?.outer();
    if l == 1 {
        return Ok(rho);
    }
    let angles = mixture_weight_angles(&e.weights)?;
    let width = 2 * n + 1;
    for i in 1..l {
        // init = rho_main (x) |0...0><0...0| on the register and ancilla.
        let d = 1usize << width;
        let dm = 1usize << n;
        let pad = d / dm;
        let mut init = crate::linalg::ComplexMatrix::zeros(d, d);
        for a in 0..dm {
            for b in 0..dm {
                init[(a * pad, b * pad)] = rho.matrix[(a, b)];
            }
        }
        let mut step = Circuit::new(width);
        let prep = synth_pure(&e.states[i])?;
        step.extend(prep.gates.iter().map(|g| g.map_qubits(&|q| n + q)))?;
        step.push(Gate::Ry {
            qubit: 2 * n,
            angle: 2.0 * angles[i - 1],
        })?;
        for q in 0..n {
            step.push(Gate::Cswap {
                control: 2 * n,
                a: q,
                b: n + q,
            })?;
        }
        let out = run_density(
            &step,
            &DensityMatrix {
                num_qubits: width,
                matrix: init,
            },
        )?;
        rho = partial_trace(&out, &(0..n).collect::<Vec<_>>())?;
    }
    Ok(rho)
}

/// Prepare `sum_i sqrt(p_i) |i>` on `m` qubits with Y-axis UCRs only (the
/// coefficients are real and nonnegative, so no Z rotations are needed).
pub fn synth_p_state(p: &[f64], m: usize) -> Result<Circuit> {
    let l = p.len();
    if l > 1 << m {
        return Err(Error::Dimension(format!(
            "{l} weights do not fit in {m} ancilla qubits"
        )));
    }
    if let Some(&bad) = p.iter().find(|&&w| w < 0.0) {
        return Err(Error::Validation(format!("negative weight {bad}")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << m];
    for (i, &pi) in p.iter().enumerate() {
        amps[i] = Complex64::new(pi.sqrt(), 0.0);
    }
    let psi = StateVector::new(m, amps)?;
    let mut c = Circuit::new(m);
    if m == 0 {
        return Ok(c);
    }
    let (tree, _) = pure_angles(&psi)?;
    for k in 0..m {
        c.push(Gate::Ucr {
            axis: Axis::Y,
            controls: (0..k).collect(),
            target: k,
            angles: tree.theta_y[k].clone(),
        })?;
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy)]
pub struct PurificationOptions {
    /// Correct the per-branch preparation phases with a diagonal ladder on
    /// the ancillas so the purified state is exact, not just branchwise
    /// correct up to phase. The reduced state is unaffected either way.
    pub phase_fix: bool,
}

impl Default for PurificationOptions {
    fn default() -> Self {
        Self { phase_fix: true }
    }
}

pub fn synth_purification(e: &Ensemble) -> Result<(Circuit, GateCountReport)> {
    synth_purification_with(e, PurificationOptions::default())
}

/// Purification circuit on m + n qubits: ancillas 0..m-1 carry the weight
/// state, and each member |psi_i> is prepared by an enlarged-UCR block firing
/// on ancilla pattern i (big-endian bits of i, negative controls for 0 bits).
/// The output state is `sum_i sqrt(p_i) |i> (x) |psi_i>`; tracing the
/// ancillas gives the mixed target.
pub fn synth_purification_with(
    e: &Ensemble,
    opts: PurificationOptions,
) -> Result<(Circuit, GateCountReport)> {
    let n = ensemble_width(e)?;
    let l = e.len();
    if l == 1 {
        let c = synth_pure(&e.states[0])?;
        let report = gate_counts(&c)?;
        return Ok((c, report));
    }
    let m = purification_ancillas(l);
    let total = m + n;
    let mut c = Circuit::new(total);
    c.extend(synth_p_state(&e.weights, m)?.gates)?;

    let targets: Vec<usize> = (m..total).collect();
    let mut branch_phases = vec![0.0; 1 << m];
    for (i, psi) in e.states.iter().enumerate() {
        let controls: Vec<(usize, Polarity)> = (0..m)
            .map(|pos| {
                let bit = (i >> (m - 1 - pos)) & 1;
                (
                    pos,
                    if bit == 1 {
                        Polarity::Positive
                    } else {
                        Polarity::Negative
                    },
                )
            })
            .collect();
        let (gates, ledger) = controlled_ucr_ladder(psi, &controls, &targets)?;
        c.extend(gates)?;
        branch_phases[i] = ledger;
    }
    if opts.phase_fix && branch_phases.iter().any(|&w| w != 0.0) {
        let ancillas: Vec<usize> = (0..m).collect();
        let (gates, root) = diagonal_phase_gates(&ancillas, &branch_phases)?;
        c.extend(gates)?;
        c.global_phase += root;
    }
    c.metadata.target = targets;
    c.metadata.trash = (0..m).collect();
    c.metadata.registers_static = total;
    c.metadata.registers_dynamic = total;
    let report = gate_counts(&c)?;
    Ok((c, report))
}

/// The purified state a phase-fixed purification circuit prepares.
pub fn purified_state(e: &Ensemble) -> Result<StateVector> {
    let n = ensemble_width(e)?;
    let m = purification_ancillas(e.len());
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (m + n)];
    for (i, (w, psi)) in e.weights.iter().zip(&e.states).enumerate() {
        let s = w.sqrt();
        for (a, &z) in psi.amplitudes.iter().enumerate() {
            amps[(i << n) | a] = z * s;
        }
    }
    StateVector::new(m + n, amps)
}

/// Merge the per-member controlled blocks of a purification circuit into one
/// Y/Z UCR pair per main qubit. The blocks fire on disjoint ancilla patterns,
/// so on the prepared state (ancillas in the weight superposition) the angle
/// vectors simply add; the merged circuit produces the same output state.
pub fn merge_purification_ucr(c: &Circuit) -> Result<Circuit> {
    let ancillas = &c.metadata.trash;
    let main = &c.metadata.target;
    let expect_shape =
        |msg: &str| -> Error { Error::Circuit(format!("unrecognized circuit shape: {msg}")) };

    let mut head = Vec::new();
    let mut merged_y: Vec<Option<Vec<f64>>> = vec![None; c.num_qubits];
    let mut merged_z: Vec<Option<Vec<f64>>> = vec![None; c.num_qubits];
    let mut controls_for: Vec<Option<Vec<usize>>> = vec![None; c.num_qubits];
    let mut tail = Vec::new();
    let mut seen_body = false;

    for g in &c.gates {
        match g {
            Gate::Ucr {
                axis,
                controls,
                target,
                angles,
            } if main.contains(target) => {
                seen_body = true;
                let slot = match axis {
                    Axis::Y => &mut merged_y[*target],
                    Axis::Z => &mut merged_z[*target],
                };
                match controls_for[*target] {
                    None => controls_for[*target] = Some(controls.clone()),
                    Some(ref want) if want == controls => {}
                    Some(_) => {
                        return Err(expect_shape("control sets differ across blocks"));
                    }
                }
                match slot {
                    None => *slot = Some(angles.clone()),
                    Some(acc) => {
                        if acc.len() != angles.len() {
                            return Err(expect_shape("angle widths differ across blocks"));
                        }
                        for (a, b) in acc.iter_mut().zip(angles) {
                            *a += b;
                        }
                    }
                }
            }
            Gate::Ucr { target, .. } if ancillas.contains(target) && !seen_body => {
                head.push(g.clone());
            }
            Gate::Ucr { target, .. } | Gate::Rz { qubit: target, .. }
                if ancillas.contains(target) && seen_body =>
            {
                tail.push(g.clone());
            }
            Gate::Rz { qubit, .. } if ancillas.contains(qubit) && !seen_body => {
                head.push(g.clone());
            }
            Gate::Ry { .. } | Gate::Rz { .. } if !seen_body => head.push(g.clone()),
            other => {
                return Err(expect_shape(&format!("unexpected gate {other:?}")));
            }
        }
    }

    let mut out = Circuit::new(c.num_qubits);
    out.global_phase = c.global_phase;
    out.metadata = c.metadata.clone();
    out.extend(head)?;
    let mut mains = main.clone();
    mains.sort_unstable();
    for t in mains {
        let controls = controls_for[t]
            .take()
            .ok_or_else(|| expect_shape("missing body level"))?;
        let width = 1usize << controls.len();
        let y = merged_y[t].take().unwrap_or_else(|| vec![0.0; width]);
        let z = merged_z[t].take().unwrap_or_else(|| vec![0.0; width]);
        out.push(Gate::Ucr {
            axis: Axis::Y,
            controls: controls.clone(),
            target: t,
            angles: y,
        })?;
        out.push(Gate::Ucr {
            axis: Axis::Z,
            controls,
            target: t,
            angles: z,
        })?;
    }
    out.extend(tail)?;
    Ok(out)
}

/// Full pipeline from a density matrix: Cholesky-factorize (pivoted when
/// `drop_tol` is zero, incomplete otherwise), read off the ensemble, emit the
/// chosen circuit, and report the simulated reconstruction error.
pub fn synth_from_density(
    rho: &DensityMatrix,
    method: SynthMethod,
    drop_tol: f64,
) -> Result<(Circuit, GateCountReport, ApproxError)> {
    let (ensemble, factor) = ensemble_from_density(rho, drop_tol)?;
    debug_assert!(matches!(
        factor.kind,
        FactorKind::Complete | FactorKind::Incomplete { .. }
    ));
    let (circuit, report) = match method {
        SynthMethod::Mixture => synth_mixture(&ensemble)?,
        SynthMethod::Purification => synth_purification(&ensemble)?,
    };
    let reduced = match method {
        SynthMethod::Mixture => mixture_reduced_state(&ensemble)?,
        SynthMethod::Purification => {
            let out = run_pure(&circuit, &StateVector::basis(circuit.num_qubits, 0))?;
            partial_trace_state(&out, &circuit.metadata.target)?
        }
    };
    let approx = ApproxError {
        trace_distance: trace_distance(&reduced, rho)?,
        fidelity: fidelity(&reduced, rho)?,
    };
    Ok((circuit, report, approx))
}
