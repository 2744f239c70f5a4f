//! Reduced-depth minimization and the two-server circuit split.
//!
//! Circuits are compared by their action on |0...0> up to global phase
//! ("C-equivalence"), which admits more component reorderings than full
//! unitary equality. The optimizer permutes components to push every
//! Clifford layer ahead of the first non-Clifford one, then splits there:
//! the Clifford prefix is reversed into A's stabilizer circuit, the rest
//! becomes B's circuit.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::clifford::is_clifford;
use crate::codec::{encode, BitString};
use crate::error::{Error, Result};
use crate::statevec::StateVector;
use crate::unitary::{apply_component, vector_diff_up_to_phase};

pub const EQUIV_TOL: f64 = 1e-10;
pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;
/// Exhaustive search is used up to this many components (d! candidates).
pub const EXHAUSTIVE_DEPTH: usize = 9;

#[derive(Debug, Clone)]
pub struct Partition {
    pub c_less: Circuit,
    pub c_greater: Circuit,
    pub d_star: usize,
    /// False when the move budget ran out before the search space was
    /// exhausted; the split is then the best found, not proven minimal.
    pub optimal: bool,
}

#[derive(Debug, Clone)]
pub struct BlindPair {
    /// A's circuit: the reversed (transposed) Clifford prefix.
    pub circ_a: Circuit,
    /// B's circuit: everything from the first non-Clifford layer on.
    pub circ_b: Circuit,
    pub t: usize,
    pub l: usize,
    pub n: usize,
}

/// d_> : component count from the first non-Clifford layer to the end;
/// zero for an all-Clifford circuit.
pub fn reduced_depth(circuit: &Circuit) -> usize {
    match circuit.components.iter().position(|c| !is_clifford(c)) {
        Some(i) => circuit.depth() - i,
        None => 0,
    }
}

fn zero_state(circuit: &Circuit) -> Result<Vec<Complex64>> {
    if circuit.n > 12 {
        return Err(Error::SizeCap {
            what: "equivalence check",
            cap: 12,
            got: circuit.n,
        });
    }
    let mut s = StateVector::zero(circuit.n)?;
    s.apply_circuit(circuit, 0)?;
    Ok(s.amps)
}

/// C-equivalence: equal action on |0...0> up to global phase.
pub fn equivalent(c1: &Circuit, c2: &Circuit) -> Result<bool> {
    if c1.n != c2.n {
        return Err(Error::MismatchedQubits(c1.n, c2.n));
    }
    Ok(vector_diff_up_to_phase(&zero_state(c1)?, &zero_state(c2)?) < EQUIV_TOL)
}

fn reorder(circuit: &Circuit, perm: &[usize]) -> Circuit {
    Circuit {
        n: circuit.n,
        t: circuit.t,
        l: circuit.l,
        components: perm
            .iter()
            .map(|&i| circuit.components[i].clone())
            .collect(),
    }
}

struct Searcher<'a> {
    circuit: &'a Circuit,
    clifford: Vec<bool>,
    reference: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'a> Searcher<'a> {
    fn reduced_depth_of(&self, perm: &[usize]) -> usize {
        match perm.iter().position(|&i| !self.clifford[i]) {
            Some(i) => perm.len() - i,
            None => 0,
        }
    }

    fn is_equivalent(&mut self, perm: &[usize]) -> bool {
        self.scratch.fill(Complex64::default());
        self.scratch[0] = Complex64::new(1.0, 0.0);
        for &i in perm {
            apply_component(&mut self.scratch, &self.circuit.components[i], 0);
        }
        vector_diff_up_to_phase(&self.scratch, &self.reference) < EQUIV_TOL
    }

    fn encoding_of(&self, perm: &[usize]) -> BitString {
        encode(&reorder(self.circuit, perm))
    }
}

struct Best {
    rd: usize,
    enc: BitString,
    perm: Vec<usize>,
}

/// Minimize reduced depth over C-equivalent component permutations and
/// split there. Exhaustive for short circuits, budgeted best-first over
/// adjacent swaps otherwise; ties go to the smallest bit-string encoding.
pub fn optimize(circuit: &Circuit) -> Result<Partition> {
    optimize_with_budget(circuit, DEFAULT_SEARCH_BUDGET)
}

pub fn optimize_with_budget(circuit: &Circuit, budget: usize) -> Result<Partition> {
    let d = circuit.depth();
    let identity: Vec<usize> = (0..d).collect();
    let mut searcher = Searcher {
        circuit,
        clifford: circuit.components.iter().map(is_clifford).collect(),
        reference: zero_state(circuit)?,
        scratch: vec![Complex64::default(); 1 << circuit.n],
    };
    let mut best = Best {
        rd: searcher.reduced_depth_of(&identity),
        enc: searcher.encoding_of(&identity),
        perm: identity.clone(),
    };

    let optimal = if d <= EXHAUSTIVE_DEPTH {
        exhaustive(&mut searcher, &mut best);
        true
    } else {
        best_first(&mut searcher, &mut best, budget)
    };

    let split = d - best.rd;
    let ordered = reorder(circuit, &best.perm);
    let c_less = Circuit {
        components: ordered.components[..split].to_vec(),
        ..ordered.clone()
    };
    let c_greater = Circuit {
        components: ordered.components[split..].to_vec(),
        ..ordered
    };
    Ok(Partition {
        c_less,
        c_greater,
        d_star: best.rd,
        optimal,
    })
}

/// Heap's algorithm over all d! permutations; simulation only runs for
/// candidates that already beat the incumbent on (d_>, encoding).
fn exhaustive(searcher: &mut Searcher, best: &mut Best) {
    let d = searcher.circuit.depth();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut counters = vec![0usize; d];
    let mut consider = |perm: &[usize], best: &mut Best| {
        let rd = searcher.reduced_depth_of(perm);
        if rd > best.rd {
            return;
        }
        let enc = searcher.encoding_of(perm);
        if rd == best.rd && enc >= best.enc {
            return;
        }
        if searcher.is_equivalent(perm) {
            *best = Best {
                rd,
                enc,
                perm: perm.to_vec(),
            };
        }
    };
    consider(&perm, best);
    let mut i = 1;
    while i < d {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            consider(&perm, best);
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
}

/// Best-first over adjacent transpositions, each candidate verified
/// against the original by simulation. Returns whether the reachable
/// space was exhausted within the budget.
fn best_first(searcher: &mut Searcher, best: &mut Best, budget: usize) -> bool {
    let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut queue: BinaryHeap<Reverse<(usize, BitString, Vec<usize>)>> = BinaryHeap::new();
    visited.insert(best.perm.clone());
    queue.push(Reverse((best.rd, best.enc.clone(), best.perm.clone())));
    let mut checks = 0usize;

    while let Some(Reverse((_, _, perm))) = queue.pop() {
        for i in 0..perm.len() - 1 {
            let mut next = perm.clone();
            next.swap(i, i + 1);
            if visited.contains(&next) {
                continue;
            }
            visited.insert(next.clone());
            if checks >= budget {
                return false;
            }
            checks += 1;
            if !searcher.is_equivalent(&next) {
                continue;
            }
            let rd = searcher.reduced_depth_of(&next);
            let enc = searcher.encoding_of(&next);
            if rd < best.rd || (rd == best.rd && enc < best.enc) {
                *best = Best {
                    rd,
                    enc: enc.clone(),
                    perm: next.clone(),
                };
            }
            queue.push(Reverse((rd, enc, next)));
        }
    }
    true
}

/// Alg. 1's tail: reverse the Clifford prefix for server A, hand the
/// remainder to server B.
pub fn blind_pair(circuit: &Circuit) -> Result<BlindPair> {
    blind_pair_with_budget(circuit, DEFAULT_SEARCH_BUDGET)
}

pub fn blind_pair_with_budget(circuit: &Circuit, budget: usize) -> Result<BlindPair> {
    let partition = optimize_with_budget(circuit, budget)?;
    pair_from_partition(&partition)
}

pub fn pair_from_partition(partition: &Partition) -> Result<BlindPair> {
    if partition.c_less.components.iter().any(|c| !is_clifford(c)) {
        return Err(Error::NonCliffordFirstStage);
    }
    Ok(BlindPair {
        circ_a: partition.c_less.reversed(),
        circ_b: partition.c_greater.clone(),
        t: partition.c_less.t,
        l: partition.c_less.l,
        n: partition.c_less.n,
    })
}

/// Joint state of the bipartite execution: A's circuit on qubits 0..n of
/// |Phi>^n, B's on qubits n..2n (pair i = (i, n+i)).
pub fn bipartite_state(pair: &BlindPair) -> Result<StateVector> {
    let mut s = StateVector::epr_pairs(pair.n)?;
    s.apply_circuit(&pair.circ_a, 0)?;
    s.apply_circuit(&pair.circ_b, pair.n)?;
    Ok(s)
}

/// Probability that A's first-register bits all read zero.
pub fn post_selection_probability(pair: &BlindPair) -> Result<f64> {
    let s = bipartite_state(pair)?;
    let dist = s.distribution(&(0..pair.t).collect::<Vec<_>>());
    Ok(dist.prob(0))
}

/// Distribution of B's first-register bits conditioned on A's
/// first-register zeros (marginalized over everything else).
pub fn blind_conditional_distribution(pair: &BlindPair) -> Result<crate::statevec::Distribution> {
    let s = bipartite_state(pair)?;
    let n = pair.n;
    let t = pair.t;
    let a_mask = (1usize << t) - 1;
    let mut probs = vec![0.0f64; 1 << t];
    let mut total = 0.0;
    for (i, amp) in s.amps.iter().enumerate() {
        if i & a_mask != 0 {
            continue;
        }
        let p = amp.norm_sqr();
        total += p;
        probs[i >> n & a_mask] += p;
    }
    for p in &mut probs {
        *p /= total;
    }
    Ok(crate::statevec::Distribution::from_probs(
        (n..n + t).collect(),
        probs,
    ))
}

/// Residual of the ricochet identity for one A-side outcome x (whose
/// first-register bits must be zero): the normalized difference between
/// the post-selected B-side state (with the X^x correction) and the
/// direct run of the recomposed circuit on |0...0>.
pub fn verify_lemma1(c_less: &Circuit, c_greater: &Circuit, x: usize) -> Result<f64> {
    if c_less.n != c_greater.n {
        return Err(Error::MismatchedQubits(c_less.n, c_greater.n));
    }
    let n = c_less.n;
    if 2 * n > crate::statevec::MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "ricochet verification",
            cap: crate::statevec::MAX_QUBITS,
            got: 2 * n,
        });
    }
    let t = c_less.t;
    if x & ((1 << t) - 1) != 0 || x >> n != 0 {
        return Err(Error::InvalidArgument(format!(
            "outcome {x:#b} must have zero first-register bits"
        )));
    }

    let mut joint = StateVector::epr_pairs(n)?;
    joint.apply_circuit(&c_less.reversed(), 0)?;
    joint.apply_circuit(c_greater, n)?;
    // X^x correction on B, then project A on <x|.
    let b_flip = x << n;
    let mask = (1usize << n) - 1;
    let mut projected = vec![Complex64::default(); 1 << n];
    for (i, amp) in joint.amps.iter().enumerate() {
        if i & mask == x {
            projected[(i ^ b_flip) >> n] = *amp;
        }
    }
    let norm = projected.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return Ok(f64::INFINITY);
    }
    for a in &mut projected {
        *a /= norm;
    }

    let mut direct = StateVector::zero(n)?;
    direct.apply_circuit(c_less, 0)?;
    direct.apply_circuit(c_greater, 0)?;
    Ok(vector_diff_up_to_phase(&projected, &direct.amps))
}
