//! Primitive gate set, circuit components (parallel layers) and circuits.
//!
//! A component is one computational cycle: a set of primitive gates with
//! pairwise disjoint qubit supports. A circuit is an ordered list of
//! components, executed first to last.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A primitive gate. `CR` imparts a phase of pi/2^k on |11>; `CNot` with
/// `l` controls is the multi-controlled Toffoli C^lNOT.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "g")]
pub enum Gate {
    H {
        #[serde(rename = "q")]
        target: usize,
    },
    X {
        #[serde(rename = "q")]
        target: usize,
    },
    CR {
        k: usize,
        #[serde(rename = "c")]
        control: usize,
        #[serde(rename = "q")]
        target: usize,
    },
    #[serde(rename = "CNOT")]
    CNot {
        #[serde(rename = "c")]
        controls: Vec<usize>,
        #[serde(rename = "q")]
        target: usize,
    },
}

impl Gate {
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::CNot {
            controls: vec![control],
            target,
        }
    }

    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Self {
        Gate::CNot {
            controls: vec![c0, c1],
            target,
        }
    }

    /// All qubits the gate touches (controls and target).
    pub fn support(&self) -> Vec<usize> {
        match self {
            Gate::H { target } | Gate::X { target } => vec![*target],
            Gate::CR {
                control, target, ..
            } => vec![*control, *target],
            Gate::CNot { controls, target } => {
                let mut s = controls.clone();
                s.push(*target);
                s
            }
        }
    }

    pub fn target(&self) -> usize {
        match self {
            Gate::H { target }
            | Gate::X { target }
            | Gate::CR { target, .. }
            | Gate::CNot { target, .. } => *target,
        }
    }

    /// Short label for census reports, e.g. "H", "CR^1", "CNOT", "C^2NOT".
    pub fn label(&self) -> String {
        match self {
            Gate::H { .. } => "H".into(),
            Gate::X { .. } => "X".into(),
            Gate::CR { k, .. } => format!("CR^{k}"),
            Gate::CNot { controls, .. } => {
                if controls.len() == 1 {
                    "CNOT".into()
                } else {
                    format!("C^{}NOT", controls.len())
                }
            }
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let support = self.support();
        for &q in &support {
            if q >= n {
                return Err(Error::IndexOutOfRange { index: q, n });
            }
        }
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() {
            return Err(Error::MalformedComponent(format!(
                "gate {self:?} has repeated qubit indices"
            )));
        }
        match self {
            Gate::CR { k, .. } if *k >= n => Err(Error::MalformedComponent(format!(
                "CR exponent k={k} must satisfy k < n = {n}"
            ))),
            Gate::CNot { controls, .. } if controls.is_empty() => Err(Error::MalformedComponent(
                "C^lNOT needs at least one control".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One parallel layer of primitive gates on `n` qubits. The empty gate
/// list is the identity component.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Component {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Component { n, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn identity(n: usize) -> Self {
        Component { n, gates: vec![] }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        for gate in &self.gates {
            gate.validate(self.n)?;
            for q in gate.support() {
                if seen[q] {
                    return Err(Error::MalformedComponent(format!(
                        "overlapping gate supports at qubit {q}"
                    )));
                }
                seen[q] = true;
            }
        }
        Ok(())
    }
}

/// A circuit over `n = t + L` qubits: `t` first-register qubits `[0, t)`
/// followed by `L` second-register qubits, composed of ordered components.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub n: usize,
    pub t: usize,
    pub l: usize,
    pub components: Vec<Component>,
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n: usize,
    t: usize,
    #[serde(rename = "L")]
    l: usize,
    components: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(t: usize, l: usize, components: Vec<Component>) -> Result<Self> {
        let n = t + l;
        for c in &components {
            if c.n != n {
                return Err(Error::MismatchedQubits(c.n, n));
            }
            c.validate()?;
        }
        Ok(Circuit {
            n,
            t,
            l,
            components,
        })
    }

    pub fn empty(t: usize, l: usize) -> Self {
        Circuit {
            n: t + l,
            t,
            l,
            components: vec![],
        }
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.components.iter().flat_map(|c| c.gates.iter())
    }

    /// Components in reversed order. Because every primitive gate matrix
    /// is symmetric, this realizes the computational-basis transpose.
    pub fn reversed(&self) -> Circuit {
        Circuit {
            n: self.n,
            t: self.t,
            l: self.l,
            components: self.components.iter().rev().cloned().collect(),
        }
    }

    /// Repack gates into the earliest component where their support is
    /// free (list scheduling). Gates on overlapping supports keep their
    /// relative order, so the unitary is unchanged.
    pub fn packed(&self) -> Circuit {
        let mut layers: Vec<Vec<Gate>> = Vec::new();
        let mut ready_at = vec![0usize; self.n];
        for gate in self.gates() {
            let support = gate.support();
            let layer = support.iter().map(|&q| ready_at[q]).max().unwrap_or(0);
            if layer == layers.len() {
                layers.push(Vec::new());
            }
            for &q in &support {
                ready_at[q] = layer + 1;
            }
            layers[layer].push(gate.clone());
        }
        Circuit {
            n: self.n,
            t: self.t,
            l: self.l,
            components: layers
                .into_iter()
                .map(|gates| Component { n: self.n, gates })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitRepr {
            n: self.n,
            t: self.t,
            l: self.l,
            components: self.components.iter().map(|c| c.gates.clone()).collect(),
        })
        .expect("circuit serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let repr: CircuitRepr = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("bad circuit JSON: {e}")))?;
        if repr.t + repr.l != repr.n {
            return Err(Error::InvalidArgument(format!(
                "register sizes t={} + L={} do not sum to n={}",
                repr.t, repr.l, repr.n
            )));
        }
        Circuit::new(
            repr.t,
            repr.l,
            repr.components
                .into_iter()
                .map(|gates| Component { n: repr.n, gates })
                .collect(),
        )
    }
}

/// Exact per-kind gate counts plus the Clifford/non-Clifford split.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GateCensus {
    pub counts: BTreeMap<String, usize>,
    pub clifford: usize,
    pub non_clifford: usize,
}

pub fn gate_census(circuit: &Circuit) -> GateCensus {
    let mut census = GateCensus::default();
    for gate in circuit.gates() {
        *census.counts.entry(gate.label()).or_insert(0) += 1;
        if crate::clifford::gate_is_clifford(gate) {
            census.clifford += 1;
        } else {
            census.non_clifford += 1;
        }
    }
    census
}

/// Random component over the full primitive grammar, for property tests
/// and search fuzzing.
pub fn random_component<R: Rng>(rng: &mut R, n: usize) -> Component {
    let mut free: Vec<usize> = (0..n).collect();
    let mut gates = Vec::new();
    while !free.is_empty() && rng.gen_bool(0.7) {
        let pick = |free: &mut Vec<usize>, rng: &mut R| {
            let i = rng.gen_range(0..free.len());
            free.swap_remove(i)
        };
        match rng.gen_range(0..4) {
            0 => gates.push(Gate::H {
                target: pick(&mut free, rng),
            }),
            1 => gates.push(Gate::X {
                target: pick(&mut free, rng),
            }),
            2 if free.len() >= 2 => gates.push(Gate::CR {
                k: rng.gen_range(0..n),
                control: pick(&mut free, rng),
                target: pick(&mut free, rng),
            }),
            _ if free.len() >= 2 => {
                let l = rng.gen_range(1..free.len().min(4));
                let controls = (0..l).map(|_| pick(&mut free, rng)).collect();
                gates.push(Gate::CNot {
                    controls,
                    target: pick(&mut free, rng),
                });
            }
            _ => {}
        }
    }
    Component { n, gates }
}

pub fn random_circuit<R: Rng>(rng: &mut R, t: usize, l: usize, depth: usize) -> Circuit {
    let n = t + l;
    Circuit {
        n,
        t,
        l,
        components: (0..depth).map(|_| random_component(rng, n)).collect(),
    }
}
