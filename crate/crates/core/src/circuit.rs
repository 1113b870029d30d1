//! Gate-level circuit representation and decomposition passes.
//!
//! Macro gates (uniformly controlled rotations, generic controlled gates,
//! CSWAP) are lowered to the primitive set {RY, RZ, H, T, TDG, S, X, CNOT}
//! by [`lower_all`]. Uniformly controlled rotations expand through the
//! binary-reflected-Gray-code construction; adjacent RY/RZ pairs over the
//! same controls fuse with one CNOT pair cancelled at the junction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::sim;

/// Rotations below this magnitude are deleted during lowering.
pub const ZERO_ROTATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X { qubit: usize },
    H { qubit: usize },
    T { qubit: usize },
    Tdg { qubit: usize },
    S { qubit: usize },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    Cswap { control: usize, a: usize, b: usize },
    /// Uniformly controlled rotation: applies an axis rotation by
    /// `angles[a]` to `target` for each basis configuration `a` of the
    /// control qubits (`controls[0]` is the most significant bit of `a`).
    Ucr {
        axis: Axis,
        controls: Vec<usize>,
        target: usize,
        angles: Vec<f64>,
    },
    /// A gate conditioned on a control pattern; negative polarity means the
    /// control fires on |0>.
    Controlled {
        gate: Box<Gate>,
        controls: Vec<(usize, Polarity)>,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::X { qubit }
            | Gate::H { qubit }
            | Gate::T { qubit }
            | Gate::Tdg { qubit }
            | Gate::S { qubit }
            | Gate::Ry { qubit, .. }
            | Gate::Rz { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Cswap { control, a, b } => vec![*control, *a, *b],
            Gate::Ucr {
                controls, target, ..
            } => {
                let mut qs = controls.clone();
                qs.push(*target);
                qs
            }
            Gate::Controlled { gate, controls } => {
                let mut qs: Vec<usize> = controls.iter().map(|(q, _)| *q).collect();
                qs.extend(gate.qubits());
                qs
            }
        }
    }

    /// The same gate with every qubit index sent through `f`.
    pub fn map_qubits(&self, f: &dyn Fn(usize) -> usize) -> Gate {
        match self {
            Gate::X { qubit } => Gate::X { qubit: f(*qubit) },
            Gate::H { qubit } => Gate::H { qubit: f(*qubit) },
            Gate::T { qubit } => Gate::T { qubit: f(*qubit) },
            Gate::Tdg { qubit } => Gate::Tdg { qubit: f(*qubit) },
            Gate::S { qubit } => Gate::S { qubit: f(*qubit) },
            Gate::Ry { qubit, angle } => Gate::Ry {
                qubit: f(*qubit),
                angle: *angle,
            },
            Gate::Rz { qubit, angle } => Gate::Rz {
                qubit: f(*qubit),
                angle: *angle,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(*control),
                target: f(*target),
            },
            Gate::Cswap { control, a, b } => Gate::Cswap {
                control: f(*control),
                a: f(*a),
                b: f(*b),
            },
            Gate::Ucr {
                axis,
                controls,
                target,
                angles,
            } => Gate::Ucr {
                axis: *axis,
                controls: controls.iter().map(|&q| f(q)).collect(),
                target: f(*target),
                angles: angles.clone(),
            },
            Gate::Controlled { gate, controls } => Gate::Controlled {
                gate: Box::new(gate.map_qubits(f)),
                controls: controls.iter().map(|&(q, p)| (f(q), p)).collect(),
            },
        }
    }

    pub fn is_primitive(&self) -> bool {
        !matches!(
            self,
            Gate::Ucr { .. } | Gate::Controlled { .. } | Gate::Cswap { .. }
        )
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::Circuit(format!(
                    "qubit {q} out of range for width {num_qubits}"
                )));
            }
        }
        let mut sorted = qs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qs.len() {
            return Err(Error::Circuit(format!("repeated operand in {self:?}")));
        }
        if let Gate::Ucr {
            controls, angles, ..
        } = self
        {
            if angles.len() != 1 << controls.len() {
                return Err(Error::Circuit(format!(
                    "UCR with {} controls needs {} angles, got {}",
                    controls.len(),
                    1usize << controls.len(),
                    angles.len()
                )));
            }
        }
        Ok(())
    }
}

/// Register labels attached to a synthesized circuit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metadata {
    /// Qubits carrying the prepared state at the end of the circuit.
    pub target: Vec<usize>,
    /// Qubits discarded by partial trace.
    pub trash: Vec<usize>,
    /// Register count if every qubit must be allocated up front.
    pub registers_static: usize,
    /// Register count if trashed qubits can be recycled mid-circuit.
    pub registers_dynamic: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    /// Phase `exp(i * global_phase)` applied to the whole unitary; carried so
    /// controlled blocks can be made branch-phase exact.
    pub global_phase: f64,
    pub metadata: Metadata,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            global_phase: 0.0,
            metadata: Metadata {
                target: (0..num_qubits).collect(),
                trash: Vec::new(),
                registers_static: num_qubits,
                registers_dynamic: num_qubits,
            },
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    pub fn is_lowered(&self) -> bool {
        self.gates.iter().all(Gate::is_primitive)
    }
}

/// Binary reflected Gray code of `j`.
pub fn gray(j: usize) -> usize {
    j ^ (j >> 1)
}

fn bit_dot_parity(x: usize, y: usize) -> f64 {
    if (x & y).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Gray-code angle transform: `phi_a = 2^-k sum_b (-1)^(b(b).g(a)) theta_b`.
pub fn ucr_angles(theta: &[f64]) -> Result<Vec<f64>> {
    let len = theta.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "angle list length {len} is not a power of two"
        )));
    }
    let scale = 1.0 / len as f64;
    Ok((0..len)
        .map(|a| {
            let ga = gray(a);
            scale
                * theta
                    .iter()
                    .enumerate()
                    .map(|(b, &t)| bit_dot_parity(b, ga) * t)
                    .sum::<f64>()
        })
        .collect())
}

/// Inverse of [`ucr_angles`]: `theta_b = sum_a (-1)^(b(b).g(a)) phi_a`.
pub fn ucr_angles_inverse(phi: &[f64]) -> Result<Vec<f64>> {
    let len = phi.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "angle list length {len} is not a power of two"
        )));
    }
    Ok((0..len)
        .map(|b| {
            phi.iter()
                .enumerate()
                .map(|(a, &p)| bit_dot_parity(b, gray(a)) * p)
                .sum::<f64>()
        })
        .collect())
}

fn rotation(axis: Axis, qubit: usize, angle: f64) -> Gate {
    match axis {
        Axis::Y => Gate::Ry { qubit, angle },
        Axis::Z => Gate::Rz { qubit, angle },
    }
}

/// Control qubit of the CNOT after rotation slot `j` in the Gray ladder:
/// the bit where the Gray codes of `j` and `j+1` differ; the final CNOT
/// closes the cycle on the highest control.
fn gray_transition_control(controls: &[usize], j: usize) -> usize {
    let k = controls.len();
    let bit = if j + 1 == 1 << k {
        k - 1
    } else {
        (j + 1).trailing_zeros() as usize
    };
    // Bit 0 of the branch index is the last control in the list.
    controls[k - 1 - bit]
}

/// Expand a uniformly controlled rotation into `2^k` rotations alternating
/// with `2^k` CNOTs.
pub fn decompose_ucr(
    axis: Axis,
    controls: &[usize],
    target: usize,
    angles: &[f64],
) -> Result<Vec<Gate>> {
    let k = controls.len();
    if angles.len() != 1 << k {
        return Err(Error::Dimension(format!(
            "UCR with {k} controls needs {} angles, got {}",
            1usize << k,
            angles.len()
        )));
    }
    if k == 0 {
        return Ok(vec![rotation(axis, target, angles[0])]);
    }
    let phi = ucr_angles(angles)?;
    let mut out = Vec::with_capacity(2 << k);
    for (j, &p) in phi.iter().enumerate() {
        out.push(rotation(axis, target, p));
        out.push(Gate::Cnot {
            control: gray_transition_control(controls, j),
            target,
        });
    }
    Ok(out)
}

/// Lower an adjacent `F^k[R_y]`, `F^k[R_z]` pair over the same controls and
/// target. The RZ ladder is emitted in reversed gate order so the CNOT pair
/// at the junction cancels, saving two CNOTs.
pub fn fuse_ucr_pair(
    controls: &[usize],
    target: usize,
    angles_y: &[f64],
    angles_z: &[f64],
) -> Result<Vec<Gate>> {
    if angles_y.len() != angles_z.len() {
        return Err(Error::Dimension(
            "fused UCR pair needs matching angle lengths".into(),
        ));
    }
    let k = controls.len();
    if k == 0 {
        return Ok(vec![
            rotation(Axis::Y, target, angles_y[0]),
            rotation(Axis::Z, target, angles_z[0]),
        ]);
    }
    let mut y = decompose_ucr(Axis::Y, controls, target, angles_y)?;
    let mut z = decompose_ucr(Axis::Z, controls, target, angles_z)?;
    // The reversed RZ ladder implements the same block-diagonal unitary
    // because every factor is either diagonal or an X-conjugation.
    z.reverse();
    y.pop(); // trailing CNOT of the Y ladder
    z.remove(0); // leading CNOT of the reversed Z ladder
    y.extend(z);
    Ok(y)
}

/// Exact Fredkin lowering: CSWAP = CNOT(b,a) . Toffoli(c,a -> b) . CNOT(b,a),
/// with the Toffoli expanded into 2 H, 3 T, 4 T-dagger, 1 S, and 6 CNOTs.
/// Total: 8 CNOTs and 10 one-qubit gates.
pub fn lower_cswap(control: usize, a: usize, b: usize) -> Vec<Gate> {
    let mut out = vec![Gate::Cnot {
        control: b,
        target: a,
    }];
    out.extend(toffoli(control, a, b));
    out.push(Gate::Cnot {
        control: b,
        target: a,
    });
    out
}

/// Standard exact Toffoli decomposition, with the lone T on the first
/// control written as S followed by T-dagger.
fn toffoli(c1: usize, c2: usize, t: usize) -> Vec<Gate> {
    vec![
        Gate::H { qubit: t },
        Gate::Cnot {
            control: c2,
            target: t,
        },
        Gate::Tdg { qubit: t },
        Gate::Cnot {
            control: c1,
            target: t,
        },
        Gate::T { qubit: t },
        Gate::Cnot {
            control: c2,
            target: t,
        },
        Gate::Tdg { qubit: t },
        Gate::Cnot {
            control: c1,
            target: t,
        },
        Gate::T { qubit: c2 },
        Gate::T { qubit: t },
        Gate::H { qubit: t },
        Gate::Cnot {
            control: c1,
            target: c2,
        },
        Gate::S { qubit: c1 },
        Gate::Tdg { qubit: c1 },
        Gate::Tdg { qubit: c2 },
        Gate::Cnot {
            control: c1,
            target: c2,
        },
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct LowerOptions {
    /// Delete rotations with |angle| <= 1e-14 and all-zero UCRs.
    pub skip_zero_rotations: bool,
    /// Fuse adjacent RY/RZ UCR pairs over identical controls.
    pub fuse_ucr_pairs: bool,
}

impl Default for LowerOptions {
    fn default() -> Self {
        Self {
            skip_zero_rotations: true,
            fuse_ucr_pairs: true,
        }
    }
}

fn ucr_all_zero(angles: &[f64]) -> bool {
    angles.iter().all(|a| a.abs() <= ZERO_ROTATION_TOL)
}

fn ucr_constant(angles: &[f64]) -> Option<f64> {
    let first = angles[0];
    if angles.iter().all(|a| (a - first).abs() <= ZERO_ROTATION_TOL) {
        Some(first)
    } else {
        None
    }
}

fn lower_controlled(
    gate: &Gate,
    controls: &[(usize, Polarity)],
    out: &mut Vec<Gate>,
) -> Result<()> {
    if controls.is_empty() {
        out.push(gate.clone());
        return Ok(());
    }
    match gate {
        Gate::Ry { qubit, angle } | Gate::Rz { qubit, angle } => {
            // A singly-populated UCR over the control qubits.
            let axis = if matches!(gate, Gate::Ry { .. }) {
                Axis::Y
            } else {
                Axis::Z
            };
            let k = controls.len();
            let mut pattern = 0usize;
            for (pos, (_, pol)) in controls.iter().enumerate() {
                if *pol == Polarity::Positive {
                    pattern |= 1 << (k - 1 - pos);
                }
            }
            let mut angles = vec![0.0; 1 << k];
            angles[pattern] = *angle;
            out.extend(decompose_ucr(
                axis,
                &controls.iter().map(|(q, _)| *q).collect::<Vec<_>>(),
                *qubit,
                &angles,
            )?);
            Ok(())
        }
        Gate::X { qubit } => {
            // X-conjugate negative controls, then CNOT or Toffoli.
            let flips: Vec<usize> = controls
                .iter()
                .filter(|(_, pol)| *pol == Polarity::Negative)
                .map(|(q, _)| *q)
                .collect();
            for &q in &flips {
                out.push(Gate::X { qubit: q });
            }
            match controls.len() {
                1 => out.push(Gate::Cnot {
                    control: controls[0].0,
                    target: *qubit,
                }),
                2 => out.extend(toffoli(controls[0].0, controls[1].0, *qubit)),
                k => {
                    return Err(Error::Circuit(format!(
                        "controlled-X with {k} controls is not supported"
                    )))
                }
            }
            for &q in &flips {
                out.push(Gate::X { qubit: q });
            }
            Ok(())
        }
        other => Err(Error::Circuit(format!(
            "cannot lower controlled {other:?}"
        ))),
    }
}

/// Cancel CNOT pairs that are identical and separated only by gates they
/// commute with. Conservative commutation rules: same-target CNOTs,
/// same-control CNOTs, diagonal gates on the control, and disjoint gates.
fn cancel_cnots(gates: &mut Vec<Gate>) {
    loop {
        let mut cancelled = false;
        'outer: for i in 0..gates.len() {
            let (control, target) = match gates[i] {
                Gate::Cnot { control, target } => (control, target),
                _ => continue,
            };
            for j in (i + 1)..gates.len() {
                match &gates[j] {
                    Gate::Cnot {
                        control: c2,
                        target: t2,
                    } if *c2 == control && *t2 == target => {
                        gates.remove(j);
                        gates.remove(i);
                        cancelled = true;
                        break 'outer;
                    }
                    Gate::Cnot {
                        control: c2,
                        target: t2,
                    } if (*t2 == target && *c2 != target)
                        || (*c2 == control && *t2 != control) =>
                    {
                        continue;
                    }
                    Gate::Rz { qubit, .. }
                    | Gate::T { qubit }
                    | Gate::Tdg { qubit }
                    | Gate::S { qubit }
                        if *qubit == control =>
                    {
                        continue;
                    }
                    other => {
                        let qs = other.qubits();
                        if qs.contains(&control) || qs.contains(&target) {
                            break;
                        }
                    }
                }
            }
        }
        if !cancelled {
            return;
        }
    }
}

/// Expand all macro gates to the primitive set, preserving the unitary up to
/// global phase, and apply the zero-rotation and CNOT-cancellation cleanups.
pub fn lower_all_with(c: &Circuit, opts: LowerOptions) -> Result<Circuit> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < c.gates.len() {
        match &c.gates[i] {
            Gate::Ucr {
                axis,
                controls,
                target,
                angles,
            } => {
                if opts.skip_zero_rotations && ucr_all_zero(angles) {
                    i += 1;
                    continue;
                }
                // A constant UCR is an uncontrolled rotation.
                if let Some(theta) = ucr_constant(angles) {
                    out.push(rotation(*axis, *target, theta));
                    i += 1;
                    continue;
                }
                // Fuse with a matching RZ partner when possible.
                if opts.fuse_ucr_pairs && *axis == Axis::Y {
                    if let Some(Gate::Ucr {
                        axis: Axis::Z,
                        controls: cz,
                        target: tz,
                        angles: az,
                    }) = c.gates.get(i + 1)
                    {
                        if cz == controls && tz == target && ucr_constant(az).is_none() {
                            out.extend(fuse_ucr_pair(controls, *target, angles, az)?);
                            i += 2;
                            continue;
                        }
                    }
                }
                out.extend(decompose_ucr(*axis, controls, *target, angles)?);
                i += 1;
            }
            Gate::Cswap { control, a, b } => {
                out.extend(lower_cswap(*control, *a, *b));
                i += 1;
            }
            Gate::Controlled { gate, controls } => {
                lower_controlled(gate, controls, &mut out)?;
                i += 1;
            }
            g => {
                out.push(g.clone());
                i += 1;
            }
        }
    }
    if opts.skip_zero_rotations {
        out.retain(|g| match g {
            Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => angle.abs() > ZERO_ROTATION_TOL,
            _ => true,
        });
        cancel_cnots(&mut out);
    }
    let mut lowered = Circuit {
        num_qubits: c.num_qubits,
        gates: Vec::new(),
        global_phase: c.global_phase,
        metadata: c.metadata.clone(),
    };
    lowered.extend(out)?;
    Ok(lowered)
}

pub fn lower_all(c: &Circuit) -> Result<Circuit> {
    lower_all_with(c, LowerOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateCountReport {
    pub cnot: usize,
    pub one_qubit_rotations: usize,
    pub cswap: usize,
    pub total_primitive: usize,
    pub registers_static: usize,
    pub registers_dynamic: usize,
}

/// Gate counts over the lowered circuit. CSWAPs are counted as macro gates;
/// `total_primitive` includes their 18-gate expansion.
pub fn gate_counts_with(c: &Circuit, opts: LowerOptions) -> Result<GateCountReport> {
    // Lower UCR/Controlled but keep CSWAPs countable.
    let mut keep_cswap = Circuit::new(c.num_qubits);
    let mut cswap = 0usize;
    let mut cswap_ops = Vec::new();
    for g in &c.gates {
        if let Gate::Cswap { .. } = g {
            cswap += 1;
            cswap_ops.push(g.clone());
        } else {
            keep_cswap.push(g.clone())?;
        }
    }
    let lowered = lower_all_with(&keep_cswap, opts)?;
    let mut cnot = 0usize;
    let mut one_qubit = 0usize;
    for g in &lowered.gates {
        match g {
            Gate::Cnot { .. } => cnot += 1,
            _ => one_qubit += 1,
        }
    }
    Ok(GateCountReport {
        cnot,
        one_qubit_rotations: one_qubit,
        cswap,
        total_primitive: cnot + one_qubit + 18 * cswap,
        registers_static: c.metadata.registers_static,
        registers_dynamic: c.metadata.registers_dynamic,
    })
}

pub fn gate_counts(c: &Circuit) -> Result<GateCountReport> {
    gate_counts_with(c, LowerOptions::default())
}

/// Worst-case counts by the Gray-ladder accounting convention: a k-fold UCR
/// is budgeted 2^k CNOTs and 2^k rotations even at k = 0 (where the concrete
/// lowering emits a bare rotation), and an adjacent Y/Z pair over the same
/// controls is budgeted as fused, 2^(k+1)-2 CNOTs and 2^(k+1) rotations.
/// This matches the closed-form worst-case formulas independent of the angle
/// values, which the angle-aware lowering can undercut.
pub fn worst_case_gate_counts(c: &Circuit) -> GateCountReport {
    let mut cnot = 0usize;
    let mut one_qubit = 0usize;
    let mut cswap = 0usize;
    let mut i = 0;
    while i < c.gates.len() {
        match &c.gates[i] {
            Gate::Ucr {
                axis: Axis::Y,
                controls,
                target,
                ..
            } => {
                let k = controls.len();
                if let Some(Gate::Ucr {
                    axis: Axis::Z,
                    controls: cz,
                    target: tz,
                    ..
                }) = c.gates.get(i + 1)
                {
                    if cz == controls && tz == target {
                        cnot += (1usize << (k + 1)) - 2;
                        one_qubit += 1usize << (k + 1);
                        i += 2;
                        continue;
                    }
                }
                cnot += 1usize << k;
                one_qubit += 1usize << k;
                i += 1;
            }
            Gate::Ucr { controls, .. } => {
                cnot += 1usize << controls.len();
                one_qubit += 1usize << controls.len();
                i += 1;
            }
            Gate::Controlled { controls, .. } => {
                cnot += 1usize << controls.len();
                one_qubit += 1usize << controls.len();
                i += 1;
            }
            Gate::Cswap { .. } => {
                cswap += 1;
                i += 1;
            }
            Gate::Cnot { .. } => {
                cnot += 1;
                i += 1;
            }
            _ => {
                one_qubit += 1;
                i += 1;
            }
        }
    }
    GateCountReport {
        cnot,
        one_qubit_rotations: one_qubit,
        cswap,
        total_primitive: cnot + one_qubit + 18 * cswap,
        registers_static: c.metadata.registers_static,
        registers_dynamic: c.metadata.registers_dynamic,
    }
}

/// Full unitary of the circuit, including its global phase.
pub fn unitary_of(c: &Circuit) -> Result<ComplexMatrix> {
    if c.num_qubits > 10 {
        return Err(Error::Dimension(format!(
            "unitary_of supports at most 10 qubits, got {}",
            c.num_qubits
        )));
    }
    let d = 1usize << c.num_qubits;
    let phase = Complex64::from_polar(1.0, c.global_phase);
    let mut u = ComplexMatrix::zeros(d, d);
    for col in 0..d {
        let mut amps = vec![Complex64::new(0.0, 0.0); d];
        amps[col] = Complex64::new(1.0, 0.0);
        for g in &c.gates {
            sim::apply_gate(&mut amps, c.num_qubits, g)?;
        }
        for row in 0..d {
            u[(row, col)] = amps[row] * phase;
        }
    }
    Ok(u)
}
