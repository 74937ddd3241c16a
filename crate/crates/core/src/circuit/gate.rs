use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

/// Elementary gate on indexed qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// Hadamard.
    H(usize),
    /// Change of basis `Y = R_x(-pi/2) = (1/sqrt 2) [[1, i], [i, 1]]`, with
    /// `Y Z Y† = σ_y`.
    Y(usize),
    /// Adjoint of [`Gate::Y`].
    Ydg(usize),
    /// `R_z(θ) = diag(e^{-iθ/2}, e^{iθ/2})`.
    Rz { qubit: usize, theta: f64 },
    /// `R_j = diag(1, e^{2πi/2^j})`, or its adjoint.
    Rj { qubit: usize, j: u32, adjoint: bool },
    /// `diag(1, e^{iλ})`.
    Phase { qubit: usize, lambda: f64 },
    Cnot { control: usize, target: usize },
    Controlled { control: usize, gate: Box<Gate> },
}

/// Number of elementary one- and two-qubit gates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GateCount {
    pub one_qubit: u64,
    pub two_qubit: u64,
}

impl GateCount {
    pub const fn new(one_qubit: u64, two_qubit: u64) -> Self {
        GateCount { one_qubit, two_qubit }
    }

    pub fn total(&self) -> u64 {
        self.one_qubit + self.two_qubit
    }
}

impl std::ops::Add for GateCount {
    type Output = GateCount;
    fn add(self, o: GateCount) -> GateCount {
        GateCount::new(self.one_qubit + o.one_qubit, self.two_qubit + o.two_qubit)
    }
}

impl std::ops::AddAssign for GateCount {
    fn add_assign(&mut self, o: GateCount) {
        *self = *self + o;
    }
}

impl std::ops::Mul<u64> for GateCount {
    type Output = GateCount;
    fn mul(self, k: u64) -> GateCount {
        GateCount::new(self.one_qubit * k, self.two_qubit * k)
    }
}

/// Toffoli: six CNOTs and nine single-qubit gates.
pub const TOFFOLI_COST: GateCount = GateCount::new(9, 6);
/// Controlled diagonal rotation: two CNOTs and three rotations.
pub const CONTROLLED_ROTATION_COST: GateCount = GateCount::new(3, 2);
/// Controlled general single-qubit gate (`A`, `B`, `C` and a control phase
/// around two CNOTs).
pub const CONTROLLED_SINGLE_COST: GateCount = GateCount::new(4, 2);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn diag(a: Complex64, b: Complex64) -> Matrix2 {
    [[a, c(0.0, 0.0)], [c(0.0, 0.0), b]]
}

impl Gate {
    pub fn controlled(self, control: usize) -> Gate {
        Gate::Controlled {
            control,
            gate: Box::new(self),
        }
    }

    /// Qubit the innermost single-qubit operation acts on.
    pub fn target(&self) -> usize {
        match self {
            Gate::H(q) | Gate::Y(q) | Gate::Ydg(q) => *q,
            Gate::Rz { qubit, .. } | Gate::Rj { qubit, .. } | Gate::Phase { qubit, .. } => *qubit,
            Gate::Cnot { target, .. } => *target,
            Gate::Controlled { gate, .. } => gate.target(),
        }
    }

    /// All control qubits, outermost first.
    pub fn controls(&self) -> Vec<usize> {
        match self {
            Gate::Cnot { control, .. } => vec![*control],
            Gate::Controlled { control, gate } => {
                let mut v = vec![*control];
                v.extend(gate.controls());
                v
            }
            _ => Vec::new(),
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        let mut v = self.controls();
        v.push(self.target());
        v
    }

    /// 2x2 matrix applied to the target once all controls are set.
    pub fn target_matrix(&self) -> Matrix2 {
        let s = FRAC_1_SQRT_2;
        match self {
            Gate::H(_) => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
            Gate::Y(_) => [[c(s, 0.0), c(0.0, s)], [c(0.0, s), c(s, 0.0)]],
            Gate::Ydg(_) => [[c(s, 0.0), c(0.0, -s)], [c(0.0, -s), c(s, 0.0)]],
            Gate::Rz { theta, .. } => diag(Complex64::from_polar(1.0, -theta / 2.0), Complex64::from_polar(1.0, theta / 2.0)),
            Gate::Rj { j, adjoint, .. } => {
                let angle = 2.0 * PI / 2f64.powi(*j as i32);
                diag(c(1.0, 0.0), Complex64::from_polar(1.0, if *adjoint { -angle } else { angle }))
            }
            Gate::Phase { lambda, .. } => diag(c(1.0, 0.0), Complex64::from_polar(1.0, *lambda)),
            Gate::Cnot { .. } => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            Gate::Controlled { gate, .. } => gate.target_matrix(),
        }
    }

    pub fn adjoint(&self) -> Gate {
        match self {
            Gate::H(q) => Gate::H(*q),
            Gate::Y(q) => Gate::Ydg(*q),
            Gate::Ydg(q) => Gate::Y(*q),
            Gate::Rz { qubit, theta } => Gate::Rz { qubit: *qubit, theta: -theta },
            Gate::Rj { qubit, j, adjoint } => Gate::Rj {
                qubit: *qubit,
                j: *j,
                adjoint: !adjoint,
            },
            Gate::Phase { qubit, lambda } => Gate::Phase {
                qubit: *qubit,
                lambda: -lambda,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: *control,
                target: *target,
            },
            Gate::Controlled { control, gate } => gate.adjoint().controlled(*control),
        }
    }

    /// Same gate with every qubit index mapped through `f`.
    pub fn remap(&self, f: &impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::H(q) => Gate::H(f(*q)),
            Gate::Y(q) => Gate::Y(f(*q)),
            Gate::Ydg(q) => Gate::Ydg(f(*q)),
            Gate::Rz { qubit, theta } => Gate::Rz { qubit: f(*qubit), theta: *theta },
            Gate::Rj { qubit, j, adjoint } => Gate::Rj {
                qubit: f(*qubit),
                j: *j,
                adjoint: *adjoint,
            },
            Gate::Phase { qubit, lambda } => Gate::Phase {
                qubit: f(*qubit),
                lambda: *lambda,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(*control),
                target: f(*target),
            },
            Gate::Controlled { control, gate } => gate.remap(f).controlled(f(*control)),
        }
    }

    /// Checks index range, distinct qubits and finite angles.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        if let Some(q) = qs.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::Index(format!("gate {self} touches qubit {q} outside a {n_qubits}-qubit register")));
        }
        for (i, a) in qs.iter().enumerate() {
            if qs[i + 1..].contains(a) {
                return Err(Error::Index(format!("gate {self} uses qubit {a} twice")));
            }
        }
        let finite = match self.innermost() {
            Gate::Rz { theta, .. } => theta.is_finite(),
            Gate::Phase { lambda, .. } => lambda.is_finite(),
            _ => true,
        };
        if !finite {
            return Err(Error::Validation(format!("gate {self} has a non-finite angle")));
        }
        Ok(())
    }

    fn innermost(&self) -> &Gate {
        match self {
            Gate::Controlled { gate, .. } => gate.innermost(),
            g => g,
        }
    }

    fn is_diagonal_rotation(&self) -> bool {
        matches!(self, Gate::Rz { .. } | Gate::Rj { .. } | Gate::Phase { .. })
    }

    /// Elementary one- and two-qubit gate equivalent.
    ///
    /// Singly controlled gates use fixed decompositions: Toffoli for a
    /// controlled CNOT, two CNOTs plus three rotations for a controlled
    /// diagonal rotation, and two CNOTs plus four single-qubit gates for any
    /// other controlled single-qubit gate. Deeper nesting follows the
    /// Barenco construction `C^k(U) = 3 C^{k-1}(V) + 2 C^{k-1}(X)`.
    pub fn elementary_cost(&self) -> GateCount {
        match self {
            Gate::Cnot { .. } => GateCount::new(0, 1),
            Gate::Controlled { gate, .. } => match gate.as_ref() {
                Gate::Cnot { .. } => TOFFOLI_COST,
                g if g.is_diagonal_rotation() => CONTROLLED_ROTATION_COST,
                Gate::Controlled { .. } => {
                    // Three C^{k-1} gates on a square root and two C^{k-1} NOTs.
                    let inner = gate.elementary_cost();
                    let not = Gate::Cnot { control: 0, target: 1 };
                    let mut nots = not;
                    for _ in 1..gate.controls().len() {
                        nots = nots.controlled(usize::MAX);
                    }
                    inner * 3 + nots.elementary_cost() * 2
                }
                _ => CONTROLLED_SINGLE_COST,
            },
            _ => GateCount::new(1, 0),
        }
    }

    fn mnemonic(&self) -> String {
        match self {
            Gate::H(_) => "H".into(),
            Gate::Y(_) => "Y".into(),
            Gate::Ydg(_) => "YDG".into(),
            Gate::Rz { .. } => "RZ".into(),
            Gate::Rj { adjoint: false, .. } => "RJ".into(),
            Gate::Rj { adjoint: true, .. } => "RJDG".into(),
            Gate::Phase { .. } => "PHASE".into(),
            Gate::Cnot { .. } => "CNOT".into(),
            Gate::Controlled { gate, .. } => format!("C-{}", gate.mnemonic()),
        }
    }
}

impl fmt::Display for Gate {
    /// `GATE q[,q2,...] [angle]`, controls first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        write!(f, "{} {}", self.mnemonic(), qs.join(","))?;
        match self.innermost() {
            Gate::Rz { theta, .. } => write!(f, " {theta:?}"),
            Gate::Phase { lambda, .. } => write!(f, " {lambda:?}"),
            Gate::Rj { j, .. } => write!(f, " {j}"),
            _ => Ok(()),
        }
    }
}
