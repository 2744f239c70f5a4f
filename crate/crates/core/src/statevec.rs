//! Exact dense state-vector simulation.
//!
//! Qubit `q` is bit `q` of the basis index, so qubit 0 (the topmost wire)
//! is the least significant bit of outcome strings.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Circuit, Component};
use crate::error::{Error, Result};
use crate::unitary::apply_component;

pub const MAX_QUBITS: usize = 14;

#[derive(Debug, Clone)]
pub struct StateVector {
    pub m: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on m qubits.
    pub fn zero(m: usize) -> Result<Self> {
        if m == 0 || m > MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "state vector",
                cap: MAX_QUBITS,
                got: m,
            });
        }
        let mut amps = vec![Complex64::default(); 1 << m];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { m, amps })
    }

    /// n EPR pairs on 2n qubits; pair i links A-side qubit i to B-side
    /// qubit n + i (A block first, then B block).
    pub fn epr_pairs(n: usize) -> Result<Self> {
        if n == 0 || 2 * n > MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "EPR resource",
                cap: MAX_QUBITS,
                got: 2 * n,
            });
        }
        let m = 2 * n;
        let norm = 1.0 / (1u64 << n) as f64;
        let amp = Complex64::new(norm.sqrt(), 0.0);
        let mut amps = vec![Complex64::default(); 1 << m];
        for a in 0..1usize << n {
            amps[a | a << n] = amp;
        }
        Ok(StateVector { m, amps })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn renormalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a /= norm;
        }
    }

    /// Apply a component to the sub-register starting at `offset`.
    pub fn apply(&mut self, component: &Component, offset: usize) -> Result<()> {
        component.validate()?;
        let highest = component
            .gates
            .iter()
            .flat_map(|g| g.support())
            .max()
            .unwrap_or(0);
        if highest + offset >= self.m {
            return Err(Error::IndexOutOfRange {
                index: highest + offset,
                n: self.m,
            });
        }
        apply_component(&mut self.amps, component, offset);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit, offset: usize) -> Result<()> {
        for component in &circuit.components {
            self.apply(component, offset)?;
        }
        Ok(())
    }

    /// Exact marginal Z-basis distribution over a qubit subset. Outcome
    /// bit j is the measured value of `qubits[j]`.
    pub fn distribution(&self, qubits: &[usize]) -> Distribution {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut outcome = 0usize;
            for (j, &q) in qubits.iter().enumerate() {
                outcome |= (i >> q & 1) << j;
            }
            probs[outcome] += p;
        }
        Distribution {
            qubits: qubits.to_vec(),
            probs,
        }
    }

    /// Measure `qubits` in rotated bases cos(theta) Z + sin(theta) X and
    /// collapse. Returns one bit per measured qubit.
    pub fn measure<R: Rng>(
        &mut self,
        qubits: &[usize],
        angles: &[f64],
        rng: &mut R,
    ) -> Result<Vec<u8>> {
        if qubits.len() != angles.len() {
            return Err(Error::InvalidArgument(
                "one basis angle per measured qubit".into(),
            ));
        }
        let mut bits = Vec::with_capacity(qubits.len());
        for (&q, &theta) in qubits.iter().zip(angles) {
            if q >= self.m {
                return Err(Error::IndexOutOfRange {
                    index: q,
                    n: self.m,
                });
            }
            self.rotate_to_z(q, theta);
            let bit_mask = 1usize << q;
            let p0: f64 = self
                .amps
                .iter()
                .enumerate()
                .filter(|(i, _)| i & bit_mask == 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            let outcome = if rng.gen::<f64>() < p0 { 0u8 } else { 1u8 };
            for (i, amp) in self.amps.iter_mut().enumerate() {
                if ((i & bit_mask != 0) as u8) != outcome {
                    *amp = Complex64::default();
                }
            }
            self.renormalize();
            self.rotate_from_z(q, theta);
            bits.push(outcome);
        }
        Ok(bits)
    }

    /// Basis change sending the +1 eigenvector of cos(t) Z + sin(t) X to |0>.
    fn rotate_to_z(&mut self, q: usize, theta: f64) {
        if theta == 0.0 {
            return;
        }
        let (sin, cos) = (theta / 2.0).sin_cos();
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = a0 * cos + a1 * sin;
                self.amps[i | bit] = -a0 * sin + a1 * cos;
            }
        }
    }

    fn rotate_from_z(&mut self, q: usize, theta: f64) {
        if theta == 0.0 {
            return;
        }
        let (sin, cos) = (theta / 2.0).sin_cos();
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = a0 * cos - a1 * sin;
                self.amps[i | bit] = a0 * sin + a1 * cos;
            }
        }
    }
}

/// Exact probabilities over the outcomes of a qubit subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub qubits: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn from_probs(qubits: Vec<usize>, probs: Vec<f64>) -> Self {
        Distribution { qubits, probs }
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total_variation(&self, other: &Distribution) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0
    }

    /// Draw one outcome by inverse transform on the cumulative weights.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (outcome, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return outcome;
            }
        }
        self.probs.len() - 1
    }

    /// CSV rows `outcome,probability`, outcomes ascending as binary
    /// integers, printed with the low bit (qubit listed first) rightmost.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome,probability\n");
        let width = self.width();
        for (outcome, &p) in self.probs.iter().enumerate() {
            let bits: String = (0..width)
                .rev()
                .map(|j| if outcome >> j & 1 == 1 { '1' } else { '0' })
                .collect();
            out.push_str(&format!("{bits},{p:.11e}\n"));
        }
        out
    }
}
