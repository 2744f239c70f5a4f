//! Decomposition of the primitive gates into the standard set
//! {CNOT, H, T, R^k, X}.
//!
//! CR^k becomes two CNOTs and two R^{k+1} gates plus one adjoint R^{k+1}
//! (the adjoint is needed for exact equality; only the non-adjoint gates
//! enter the conventional count). C^2NOT expands to seven T-class gates,
//! two H, one S-class gate and six CNOTs. C^lNOT for l >= 3 first lowers
//! to 2l-3 C^2NOTs using l-2 clean ancillae.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// Gate over the extended standard set. `Phase { k }` is the single-qubit
/// R^k gate imparting a phase of pi/2^k on |1> (k = 2 is T, k = 1 is S).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StdGate {
    H { target: usize },
    X { target: usize },
    Phase { k: usize, adjoint: bool, target: usize },
    CNot { control: usize, target: usize },
}

impl StdGate {
    fn t(target: usize) -> Self {
        StdGate::Phase {
            k: 2,
            adjoint: false,
            target,
        }
    }

    fn t_dag(target: usize) -> Self {
        StdGate::Phase {
            k: 2,
            adjoint: true,
            target,
        }
    }

    pub fn label(&self) -> String {
        match self {
            StdGate::H { .. } => "H".into(),
            StdGate::X { .. } => "X".into(),
            StdGate::Phase { k: 2, .. } => "T".into(),
            StdGate::Phase { k, .. } => format!("R^{k}"),
            StdGate::CNot { .. } => "CNOT".into(),
        }
    }
}

/// Flat gate list over the extended set, possibly wider than the source
/// circuit when clean ancillae were designated.
#[derive(Debug, Clone, Default)]
pub struct StdCircuit {
    pub n: usize,
    pub gates: Vec<StdGate>,
}

pub fn apply_std_gate(amps: &mut [Complex64], gate: &StdGate) {
    match gate {
        StdGate::H { target } => {
            crate::unitary::apply_gate(amps, &Gate::H { target: *target }, 0)
        }
        StdGate::X { target } => {
            crate::unitary::apply_gate(amps, &Gate::X { target: *target }, 0)
        }
        StdGate::Phase { k, adjoint, target } => {
            let sign = if *adjoint { -1.0 } else { 1.0 };
            let phase =
                Complex64::from_polar(1.0, sign * std::f64::consts::PI / (1u64 << k) as f64);
            let bit = 1usize << target;
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & bit != 0 {
                    *amp *= phase;
                }
            }
        }
        StdGate::CNot { control, target } => {
            crate::unitary::apply_gate(amps, &Gate::cnot(*control, *target), 0)
        }
    }
}

/// CR^k as two CNOTs, two R^{k+1} and one adjoint R^{k+1}; exact.
pub fn decompose_cr(k: usize, control: usize, target: usize) -> Vec<StdGate> {
    vec![
        StdGate::Phase {
            k: k + 1,
            adjoint: false,
            target: control,
        },
        StdGate::Phase {
            k: k + 1,
            adjoint: false,
            target,
        },
        StdGate::CNot { control, target },
        StdGate::Phase {
            k: k + 1,
            adjoint: true,
            target,
        },
        StdGate::CNot { control, target },
    ]
}

/// C^2NOT over the standard set: H-conjugated CCZ written as a phase
/// polynomial over the parity lines a, b, c, b^c, a^b^c, a^c, a^b.
/// Exact (no global phase); tally {T: 7, H: 2, R^1: 1, CNOT: 6}.
pub fn decompose_toffoli(c0: usize, c1: usize, target: usize) -> Vec<StdGate> {
    let (a, b, c) = (c0, c1, target);
    vec![
        StdGate::H { target: c },
        StdGate::t(a),
        StdGate::t(b),
        StdGate::CNot {
            control: b,
            target: c,
        },
        StdGate::t_dag(c),
        StdGate::CNot {
            control: a,
            target: c,
        },
        StdGate::t(c),
        StdGate::CNot {
            control: b,
            target: c,
        },
        StdGate::t_dag(c),
        StdGate::CNot {
            control: a,
            target: c,
        },
        StdGate::t(c),
        StdGate::CNot {
            control: a,
            target: b,
        },
        StdGate::t(b),
        StdGate::Phase {
            k: 1,
            adjoint: true,
            target: b,
        },
        StdGate::CNot {
            control: a,
            target: b,
        },
        StdGate::H { target: c },
    ]
}

/// C^lNOT (l >= 3) as 2l-3 C^2NOTs over the given clean ancillae, which
/// are returned to |0>. Output stays at the primitive level so callers
/// can count Toffolis before further expansion.
pub fn lower_multicontrol(controls: &[usize], target: usize, ancillas: &[usize]) -> Result<Vec<Gate>> {
    let l = controls.len();
    assert!(l >= 3, "lowering applies to l >= 3 controls");
    if ancillas.len() < l - 2 {
        return Err(Error::Resource {
            needed: l - 2,
            got: ancillas.len(),
        });
    }
    let ancillas = &ancillas[..l - 2];
    for &a in ancillas {
        if controls.contains(&a) || a == target {
            return Err(Error::InvalidArgument(format!(
                "ancilla {a} overlaps the gate support"
            )));
        }
    }
    let mut compute = vec![Gate::toffoli(controls[0], controls[1], ancillas[0])];
    for i in 1..l - 2 {
        compute.push(Gate::toffoli(controls[i + 1], ancillas[i - 1], ancillas[i]));
    }
    let mut gates = compute.clone();
    gates.push(Gate::toffoli(controls[l - 1], ancillas[l - 3], target));
    gates.extend(compute.into_iter().rev());
    Ok(gates)
}

/// Expand a whole circuit into the standard set. `ancillas` are extra
/// clean qubit indices available for C^lNOT lowering (l >= 3).
pub fn decompose_standard(circuit: &Circuit, ancillas: &[usize]) -> Result<StdCircuit> {
    let n = circuit
        .n
        .max(ancillas.iter().map(|&a| a + 1).max().unwrap_or(0));
    let mut gates = Vec::new();
    for gate in circuit.gates() {
        match gate {
            Gate::H { target } => gates.push(StdGate::H { target: *target }),
            Gate::X { target } => gates.push(StdGate::X { target: *target }),
            Gate::CR { k, control, target } => {
                gates.extend(decompose_cr(*k, *control, *target));
            }
            Gate::CNot { controls, target } => match controls.len() {
                1 => gates.push(StdGate::CNot {
                    control: controls[0],
                    target: *target,
                }),
                2 => gates.extend(decompose_toffoli(controls[0], controls[1], *target)),
                _ => {
                    for toffoli in lower_multicontrol(controls, *target, ancillas)? {
                        let Gate::CNot { controls, target } = toffoli else {
                            unreachable!()
                        };
                        gates.extend(decompose_toffoli(controls[0], controls[1], target));
                    }
                }
            },
        }
    }
    Ok(StdCircuit { n, gates })
}

pub fn std_census(circuit: &StdCircuit) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for gate in &circuit.gates {
        *counts.entry(gate.label()).or_insert(0) += 1;
    }
    counts
}
