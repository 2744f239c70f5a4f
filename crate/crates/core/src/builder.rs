//! Compiled period-finding circuit construction.
//!
//! The second register does not hold residues directly: the multiplicative
//! orbit {1, a, a^2, ...} mod N is mapped to short codewords. The modexp
//! stage then only ever targets second-register qubits with X-type gates
//! whose controls all sit in the first register: each codeword bit is the
//! XOR polynomial (algebraic normal form) of the first-register bits, one
//! CNOT or C^lNOT per monomial. Keeping the second register control-free
//! is what lets X corrections on it commute through the whole circuit,
//! which the two-server split relies on.

use std::collections::BTreeSet;

use crate::circuit::{Circuit, Component, Gate};
use crate::error::{Error, Result};
use crate::shor::{gcd, modexp, multiplicative_order};

/// Codeword assignment for the multiplicative orbit of a mod N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledEncoding {
    /// Residues 1, a, a^2, ... of length r.
    pub orbit: Vec<u64>,
    /// codewords[i] is the L-bit codeword of orbit position i; position 0
    /// (residue 1) is the initial second-register state.
    pub codewords: Vec<usize>,
    pub l: usize,
}

impl CompiledEncoding {
    /// Default map: orbit position i gets the binary codeword i.
    pub fn binary(n: u64, a: u64, l: usize) -> Result<Self> {
        Self::check_coprime(n, a)?;
        let r = multiplicative_order(a, n) as usize;
        Self::with_codewords(n, a, (0..r).collect(), l)
    }

    fn check_coprime(n: u64, a: u64) -> Result<()> {
        if gcd(a, n) != 1 {
            return Err(Error::InvalidArgument(format!(
                "gcd({a}, {n}) > 1, no multiplicative orbit"
            )));
        }
        Ok(())
    }

    pub fn with_codewords(n: u64, a: u64, codewords: Vec<usize>, l: usize) -> Result<Self> {
        Self::check_coprime(n, a)?;
        let r = multiplicative_order(a, n) as usize;
        if r > 1 << l {
            return Err(Error::Encoding(format!(
                "orbit of size {r} does not fit in {l} codeword bits"
            )));
        }
        if codewords.len() != r {
            return Err(Error::Encoding(format!(
                "need {r} codewords, got {}",
                codewords.len()
            )));
        }
        if codewords.iter().any(|&c| c >= 1 << l) {
            return Err(Error::Encoding("codeword wider than L bits".into()));
        }
        if BTreeSet::from_iter(&codewords).len() != r {
            return Err(Error::Encoding("codewords are not distinct".into()));
        }
        let orbit = (0..r as u64).map(|i| modexp(a, i, n)).collect();
        Ok(CompiledEncoding {
            orbit,
            codewords,
            l,
        })
    }

    pub fn r(&self) -> usize {
        self.orbit.len()
    }
}

/// Compiled period-finding circuit: Hadamards on the first register, the
/// codeword-valued modexp polynomial, then a QFT-style readout stage from
/// H and CR^k gates. First-register qubit j drives multiplication by
/// a^(2^(t-1-j)); the readout emits the low outcome bit on qubit 0.
pub fn shor_circuit_with_encoding(t: usize, encoding: &CompiledEncoding) -> Result<Circuit> {
    let l = encoding.l;
    let n = t + l;
    if t == 0 {
        return Err(Error::InvalidArgument("first register is empty".into()));
    }
    if n > 12 {
        return Err(Error::SizeCap {
            what: "compiled circuit",
            cap: 12,
            got: n,
        });
    }
    let r = encoding.r();
    let mut components = Vec::new();
    let mut push = |gate: Gate| {
        components.push(Component::new(n, vec![gate]).expect("single gate"));
    };

    // Initial codeword of residue 1, then the superposition stage.
    let initial = encoding.codewords[0];
    for b in 0..l {
        if initial >> b & 1 == 1 {
            push(Gate::X { target: t + b });
        }
    }
    for j in 0..t {
        push(Gate::H { target: j });
    }

    // Modexp stage. The second register must end in the codeword of
    // orbit position sum_j x_j 2^(t-1-j) mod r; the XOR offset from the
    // initial codeword is a boolean function of x, emitted monomial by
    // monomial from its algebraic normal form (Moebius transform).
    let mut anf: Vec<usize> = (0..1usize << t)
        .map(|x| {
            let index: usize = (0..t)
                .filter(|&j| x >> j & 1 == 1)
                .map(|j| (1usize << (t - 1 - j)) % r)
                .sum::<usize>()
                % r;
            encoding.codewords[index] ^ initial
        })
        .collect();
    for j in 0..t {
        for x in 0..1usize << t {
            if x >> j & 1 == 1 {
                anf[x] ^= anf[x ^ (1 << j)];
            }
        }
    }
    for (monomial, &mask) in anf.iter().enumerate().skip(1) {
        let controls: Vec<usize> = (0..t).filter(|&j| monomial >> j & 1 == 1).collect();
        for b in 0..l {
            if mask >> b & 1 == 1 {
                push(Gate::CNot {
                    controls: controls.clone(),
                    target: t + b,
                });
            }
        }
    }

    // Readout stage: H then accumulated controlled phases per qubit.
    for j in 0..t {
        push(Gate::H { target: j });
        for m in j + 1..t {
            push(Gate::CR {
                k: m - j,
                control: m,
                target: j,
            });
        }
    }

    Ok(Circuit::new(t, l, components)?.packed())
}

pub fn shor_circuit(n: u64, a: u64, t: usize, l: usize) -> Result<Circuit> {
    shor_circuit_with_encoding(t, &CompiledEncoding::binary(n, a, l)?)
}
