use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Complex;

const UNITARY_TOL: f64 = 1e-10;
const ANGLE_TOL: f64 = 1e-12;

/// Single-qubit operation carried by a gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    X,
    Z,
    H,
    Ry(f64),
    Rz(f64),
    /// Row-major `[u00, u01, u10, u11]`.
    Unitary([Complex<f64>; 4]),
}

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

impl GateOp {
    pub fn matrix(&self) -> [Complex<f64>; 4] {
        match *self {
            GateOp::X => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            GateOp::Z => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
            GateOp::H => {
                let h = FRAC_1_SQRT_2;
                [c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]
            }
            GateOp::Ry(theta) => {
                let (s, co) = (theta / 2.0).sin_cos();
                [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            GateOp::Rz(theta) => {
                let (s, co) = (theta / 2.0).sin_cos();
                [c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)]
            }
            GateOp::Unitary(u) => u,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateOp::X => "X",
            GateOp::Z => "Z",
            GateOp::H => "H",
            GateOp::Ry(_) => "RY",
            GateOp::Rz(_) => "RZ",
            GateOp::Unitary(_) => "U",
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            GateOp::Ry(t) | GateOp::Rz(t) => Some(t),
            _ => None,
        }
    }

    fn unitarity_defect(&self) -> f64 {
        let u = self.matrix();
        // U†U entries
        let d00 = u[0].norm_sqr() + u[2].norm_sqr() - 1.0;
        let d11 = u[1].norm_sqr() + u[3].norm_sqr() - 1.0;
        let d01 = (u[0].conj() * u[1] + u[2].conj() * u[3]).norm();
        d00.abs().max(d11.abs()).max(d01)
    }
}

fn angle_is_multiple_of(theta: f64, unit: f64) -> bool {
    let k = (theta / unit).round();
    (theta - k * unit).abs() < ANGLE_TOL
}

/// A quantum control: the gate fires when `qubit` reads `on`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub on: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, on: true }
    }

    pub fn off(qubit: usize) -> Self {
        Self { qubit, on: false }
    }
}

/// A classical condition: the gate runs when `clbit` holds `value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Condition {
    pub clbit: usize,
    pub value: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Single { target: usize, op: GateOp },
    Controlled { controls: Vec<Control>, target: usize, op: GateOp },
    Measure { qubit: usize, clbit: usize },
    Conditioned { conditions: Vec<Condition>, gate: Box<Gate> },
}

impl Gate {
    pub fn single(target: usize, op: GateOp) -> Self {
        Gate::Single { target, op }
    }

    /// `op` on `target` with controls; an empty control list gives a
    /// [`Gate::Single`].
    pub fn controlled(controls: Vec<Control>, target: usize, op: GateOp) -> Self {
        if controls.is_empty() {
            Gate::Single { target, op }
        } else {
            Gate::Controlled { controls, target, op }
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::Controlled { controls: vec![Control::on(control)], target, op: GateOp::X }
    }

    /// `gate` guarded by classical conditions; no conditions returns `gate`.
    pub fn conditioned(conditions: Vec<Condition>, gate: Gate) -> Self {
        if conditions.is_empty() {
            gate
        } else {
            Gate::Conditioned { conditions, gate: Box::new(gate) }
        }
    }

    /// Quantum gate without its classical guard.
    pub fn inner(&self) -> &Gate {
        match self {
            Gate::Conditioned { gate, .. } => gate,
            other => other,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self.inner() {
            Gate::Single { target, .. } => vec![*target],
            Gate::Controlled { controls, target, .. } => controls.iter().map(|c| c.qubit).chain([*target]).collect(),
            Gate::Measure { qubit, .. } => vec![*qubit],
            Gate::Conditioned { .. } => unreachable!("nested conditions are rejected"),
        }
    }

    /// Classical bits read (conditions) or written (measurement).
    pub fn clbits(&self) -> Vec<usize> {
        let mut bits: Vec<usize> = match self {
            Gate::Conditioned { conditions, .. } => conditions.iter().map(|c| c.clbit).collect(),
            _ => Vec::new(),
        };
        if let Gate::Measure { clbit, .. } = self.inner() {
            bits.push(*clbit);
        }
        bits
    }

    /// Kind label such as `H`, `CX` or `CCRY`.
    pub fn mnemonic(&self) -> String {
        match self.inner() {
            Gate::Single { op, .. } => op.mnemonic().to_string(),
            Gate::Controlled { controls, op, .. } => format!("{}{}", "C".repeat(controls.len()), op.mnemonic()),
            Gate::Measure { .. } => "MEASURE".to_string(),
            Gate::Conditioned { .. } => unreachable!("nested conditions are rejected"),
        }
    }

    pub fn is_multi_qubit(&self) -> bool {
        matches!(self.inner(), Gate::Controlled { .. })
    }

    /// Whether the gate leaves the Clifford group.
    pub fn is_non_clifford(&self) -> bool {
        match self.inner() {
            Gate::Single { op: GateOp::Unitary(_), .. } => true,
            Gate::Single { op, .. } => op.angle().is_some_and(|t| !angle_is_multiple_of(t, FRAC_PI_2)),
            Gate::Controlled { controls, op, .. } => match op {
                GateOp::X | GateOp::Z => controls.len() > 1,
                GateOp::H | GateOp::Unitary(_) => true,
                GateOp::Ry(t) | GateOp::Rz(t) => !angle_is_multiple_of(*t, 4.0 * PI),
            },
            Gate::Measure { .. } => false,
            Gate::Conditioned { .. } => unreachable!("nested conditions are rejected"),
        }
    }

    fn write_text(&self, out: &mut String) {
        match self {
            Gate::Conditioned { conditions, gate } => {
                let guard: Vec<String> =
                    conditions.iter().map(|c| format!("{}={}", c.clbit, u8::from(c.value))).collect();
                let _ = write!(out, "IF {} ", guard.join(","));
                gate.write_text(out);
            }
            Gate::Measure { qubit, clbit } => {
                let _ = write!(out, "MEASURE {qubit} {clbit}");
            }
            Gate::Single { target, op } => {
                let _ = write!(out, "{} {target}", op.mnemonic());
                write_params(out, op);
            }
            Gate::Controlled { controls, target, op } => {
                out.push_str(&self.mnemonic());
                for ctrl in controls {
                    let _ = write!(out, " {}{}", if ctrl.on { "" } else { "~" }, ctrl.qubit);
                }
                let _ = write!(out, " {target}");
                write_params(out, op);
            }
        }
    }
}

fn write_params(out: &mut String, op: &GateOp) {
    match op {
        GateOp::Ry(t) | GateOp::Rz(t) => {
            let _ = write!(out, " {t:?}");
        }
        GateOp::Unitary(u) => {
            for z in u {
                let _ = write!(out, " {:?} {:?}", z.re, z.im);
            }
        }
        _ => {}
    }
}

/// Ordered gate list on `qubits` qubits (qubit 0 most significant) and
/// `clbits` classical bits, starting from `|0…0⟩` and all-zero bits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub qubits: usize,
    pub clbits: usize,
    pub gates: Vec<Gate>,
}

/// Structural cost of a circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceMetrics {
    pub logical_qubits: usize,
    /// Longest chain of gates sharing a qubit or classical bit.
    pub depth: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub two_qubit_gates: usize,
    pub non_clifford_rotations: usize,
}

impl Circuit {
    pub fn new(qubits: usize, clbits: usize) -> Self {
        Self { qubits, clbits, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends `other`, whose qubit `i` becomes qubit `i + qubit_offset` and
    /// classical bit `j` becomes `j + clbit_offset`.
    pub fn append(&mut self, other: &Circuit, qubit_offset: usize, clbit_offset: usize) {
        for gate in &other.gates {
            self.gates.push(shift_gate(gate, qubit_offset, clbit_offset));
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (index, gate) in self.gates.iter().enumerate() {
            self.validate_gate(gate, false).map_err(|msg| Error::InvalidCircuit(format!("gate {index}: {msg}")))?;
        }
        Ok(())
    }

    fn validate_gate(&self, gate: &Gate, nested: bool) -> std::result::Result<(), String> {
        let check_qubit = |q: usize| if q < self.qubits { Ok(()) } else { Err(format!("qubit {q} out of range")) };
        match gate {
            Gate::Conditioned { conditions, gate } => {
                if nested {
                    return Err("nested condition".into());
                }
                if conditions.is_empty() {
                    return Err("empty condition".into());
                }
                if let Some(cond) = conditions.iter().find(|c| c.clbit >= self.clbits) {
                    return Err(format!("classical bit {} out of range", cond.clbit));
                }
                self.validate_gate(gate, true)
            }
            Gate::Measure { qubit, clbit } => {
                check_qubit(*qubit)?;
                if *clbit >= self.clbits {
                    return Err(format!("classical bit {clbit} out of range"));
                }
                Ok(())
            }
            Gate::Single { target, op } => {
                check_qubit(*target)?;
                check_unitary(op)
            }
            Gate::Controlled { controls, target, op } => {
                check_qubit(*target)?;
                let mut seen = vec![*target];
                for ctrl in controls {
                    check_qubit(ctrl.qubit)?;
                    if seen.contains(&ctrl.qubit) {
                        return Err(format!("qubit {} used twice", ctrl.qubit));
                    }
                    seen.push(ctrl.qubit);
                }
                check_unitary(op)
            }
        }
    }

    pub fn metrics(&self) -> ResourceMetrics {
        let mut qubit_layer = vec![0usize; self.qubits];
        let mut clbit_layer = vec![0usize; self.clbits];
        let mut gate_counts = BTreeMap::new();
        let mut depth = 0;
        let mut two_qubit_gates = 0;
        let mut non_clifford_rotations = 0;
        for gate in &self.gates {
            let qubits = gate.qubits();
            let clbits = gate.clbits();
            let start =
                qubits.iter().map(|&q| qubit_layer[q]).chain(clbits.iter().map(|&b| clbit_layer[b])).max().unwrap_or(0);
            let layer = start + 1;
            for &q in &qubits {
                qubit_layer[q] = layer;
            }
            for &b in &clbits {
                clbit_layer[b] = layer;
            }
            depth = depth.max(layer);
            *gate_counts.entry(gate.mnemonic()).or_insert(0) += 1;
            two_qubit_gates += usize::from(gate.is_multi_qubit());
            non_clifford_rotations += usize::from(gate.is_non_clifford());
        }
        ResourceMetrics { logical_qubits: self.qubits, depth, gate_counts, two_qubit_gates, non_clifford_rotations }
    }

    /// Line-oriented text: a `QUBITS q CLBITS c` header, then one gate per
    /// line.
    pub fn to_text(&self) -> String {
        let mut out = format!("QUBITS {} CLBITS {}\n", self.qubits, self.clbits);
        for gate in &self.gates {
            gate.write_text(&mut out);
            out.push('\n');
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (line_no, header) = lines.next().ok_or(Error::Parse { line: 0, message: "missing header".into() })?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let (qubits, clbits) = match words.as_slice() {
            ["QUBITS", q, "CLBITS", c] => (parse_index(q, line_no)?, parse_index(c, line_no)?),
            _ => return Err(Error::Parse { line: line_no, message: format!("bad header `{header}`") }),
        };
        let mut circuit = Circuit::new(qubits, clbits);
        for (line_no, line) in lines {
            circuit.gates.push(parse_gate(line, line_no)?);
        }
        circuit.validate()?;
        Ok(circuit)
    }
}

fn check_unitary(op: &GateOp) -> std::result::Result<(), String> {
    let defect = op.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(format!("payload is not unitary (defect {defect:e})"));
    }
    Ok(())
}

fn shift_gate(gate: &Gate, dq: usize, dc: usize) -> Gate {
    match gate {
        Gate::Single { target, op } => Gate::Single { target: target + dq, op: *op },
        Gate::Controlled { controls, target, op } => Gate::Controlled {
            controls: controls.iter().map(|c| Control { qubit: c.qubit + dq, on: c.on }).collect(),
            target: target + dq,
            op: *op,
        },
        Gate::Measure { qubit, clbit } => Gate::Measure { qubit: qubit + dq, clbit: clbit + dc },
        Gate::Conditioned { conditions, gate } => Gate::Conditioned {
            conditions: conditions.iter().map(|c| Condition { clbit: c.clbit + dc, value: c.value }).collect(),
            gate: Box::new(shift_gate(gate, dq, dc)),
        },
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_index(word: &str, line: usize) -> Result<usize> {
    word.parse().map_err(|_| parse_error(line, format!("expected an index, found `{word}`")))
}

fn parse_real(word: &str, line: usize) -> Result<f64> {
    word.parse().map_err(|_| parse_error(line, format!("expected a number, found `{word}`")))
}

fn parse_gate(line: &str, line_no: usize) -> Result<Gate> {
    let mut words = line.split_whitespace();
    let head = words.next().ok_or_else(|| parse_error(line_no, "empty line"))?;
    if head == "IF" {
        let guard = words.next().ok_or_else(|| parse_error(line_no, "missing condition"))?;
        let conditions = guard
            .split(',')
            .map(|term| {
                let (bit, value) =
                    term.split_once('=').ok_or_else(|| parse_error(line_no, format!("bad condition `{term}`")))?;
                let value = match value {
                    "0" => false,
                    "1" => true,
                    _ => return Err(parse_error(line_no, format!("bad condition value `{value}`"))),
                };
                Ok(Condition { clbit: parse_index(bit, line_no)?, value })
            })
            .collect::<Result<Vec<_>>>()?;
        let rest: Vec<&str> = words.collect();
        let inner = parse_gate(&rest.join(" "), line_no)?;
        if matches!(inner, Gate::Conditioned { .. }) {
            return Err(parse_error(line_no, "nested condition"));
        }
        return Ok(Gate::Conditioned { conditions, gate: Box::new(inner) });
    }
    let args: Vec<&str> = words.collect();
    if head == "MEASURE" {
        return match args.as_slice() {
            [q, b] => Ok(Gate::Measure { qubit: parse_index(q, line_no)?, clbit: parse_index(b, line_no)? }),
            _ => Err(parse_error(line_no, "MEASURE takes a qubit and a classical bit")),
        };
    }
    let kind = head.trim_start_matches('C');
    let n_controls = head.len() - kind.len();
    let n_params = match kind {
        "X" | "Z" | "H" => 0,
        "RY" | "RZ" => 1,
        "U" => 8,
        _ => return Err(parse_error(line_no, format!("unknown gate `{head}`"))),
    };
    if args.len() != n_controls + 1 + n_params {
        return Err(parse_error(line_no, format!("`{head}` expects {} arguments", n_controls + 1 + n_params)));
    }
    let controls = args[..n_controls]
        .iter()
        .map(|w| match w.strip_prefix('~') {
            Some(q) => Ok(Control::off(parse_index(q, line_no)?)),
            None => Ok(Control::on(parse_index(w, line_no)?)),
        })
        .collect::<Result<Vec<_>>>()?;
    let target = parse_index(args[n_controls], line_no)?;
    let params = args[n_controls + 1..].iter().map(|w| parse_real(w, line_no)).collect::<Result<Vec<_>>>()?;
    let op = match kind {
        "X" => GateOp::X,
        "Z" => GateOp::Z,
        "H" => GateOp::H,
        "RY" => GateOp::Ry(params[0]),
        "RZ" => GateOp::Rz(params[0]),
        _ => GateOp::Unitary([
            c(params[0], params[1]),
            c(params[2], params[3]),
            c(params[4], params[5]),
            c(params[6], params[7]),
        ]),
    };
    Ok(Gate::controlled(controls, target, op))
}
