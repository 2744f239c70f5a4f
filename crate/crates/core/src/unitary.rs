//! Dense unitary representations of components and circuits.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Component, Gate};
use crate::error::{Error, Result};

pub const DEFAULT_QUBIT_CAP: usize = 12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Apply `gate` in place to a 2^m amplitude vector, with the gate's qubit
/// indices shifted by `offset`. Basis index bit `q` is qubit `q`.
pub fn apply_gate(amps: &mut [Complex64], gate: &Gate, offset: usize) {
    let dim = amps.len();
    match gate {
        Gate::X { target } => {
            let bit = 1usize << (target + offset);
            for i in 0..dim {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
        Gate::H { target } => {
            let bit = 1usize << (target + offset);
            for i in 0..dim {
                if i & bit == 0 {
                    let a = amps[i];
                    let b = amps[i | bit];
                    amps[i] = (a + b) * FRAC_1_SQRT_2;
                    amps[i | bit] = (a - b) * FRAC_1_SQRT_2;
                }
            }
        }
        Gate::CR { k, control, target } => {
            let mask = (1usize << (control + offset)) | (1usize << (target + offset));
            let phase = Complex64::from_polar(1.0, std::f64::consts::PI / (1u64 << k) as f64);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp *= phase;
                }
            }
        }
        Gate::CNot { controls, target } => {
            let cmask: usize = controls.iter().map(|&c| 1usize << (c + offset)).sum();
            let bit = 1usize << (target + offset);
            for i in 0..dim {
                if i & cmask == cmask && i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
    }
}

pub fn apply_component(amps: &mut [Complex64], component: &Component, offset: usize) {
    for gate in &component.gates {
        apply_gate(amps, gate, offset);
    }
}

/// Unitary of a single component as a dense 2^n x 2^n matrix.
pub fn component_unitary(component: &Component) -> Result<DMatrix<Complex64>> {
    component.validate()?;
    let dim = 1usize << component.n;
    let mut u = DMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::default(); dim];
    for j in 0..dim {
        col.fill(Complex64::default());
        col[j] = Complex64::new(1.0, 0.0);
        apply_component(&mut col, component, 0);
        for i in 0..dim {
            u[(i, j)] = col[i];
        }
    }
    Ok(u)
}

/// Unitary of the whole circuit: the right-to-left product of component
/// unitaries, i.e. components act first to last.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    circuit_unitary_capped(circuit, DEFAULT_QUBIT_CAP)
}

pub fn circuit_unitary_capped(circuit: &Circuit, cap: usize) -> Result<DMatrix<Complex64>> {
    if circuit.n > cap {
        return Err(Error::SizeCap {
            what: "circuit_unitary",
            cap,
            got: circuit.n,
        });
    }
    for c in &circuit.components {
        c.validate()?;
    }
    let dim = 1usize << circuit.n;
    let mut u = DMatrix::zeros(dim, dim);
    let mut col = vec![Complex64::default(); dim];
    for j in 0..dim {
        col.fill(Complex64::default());
        col[j] = Complex64::new(1.0, 0.0);
        for component in &circuit.components {
            apply_component(&mut col, component, 0);
        }
        for i in 0..dim {
            u[(i, j)] = col[i];
        }
    }
    Ok(u)
}

pub fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise deviation after removing a global phase, fixed by the
/// first entry of `a` with modulus above 1e-8.
pub fn max_diff_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let phase = a
        .iter()
        .zip(b.iter())
        .find(|(x, _)| x.norm() > 1e-8)
        .map(|(x, y)| {
            if y.norm() > 1e-12 {
                (x / y).unscale((x / y).norm())
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .unwrap_or(Complex64::new(1.0, 0.0));
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

/// Same, for state vectors.
pub fn vector_diff_up_to_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    let phase = a
        .iter()
        .zip(b.iter())
        .find(|(x, _)| x.norm() > 1e-8)
        .map(|(x, y)| {
            if y.norm() > 1e-12 {
                (x / y).unscale((x / y).norm())
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .unwrap_or(Complex64::new(1.0, 0.0));
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}
