//! Clifford membership of components.
//!
//! Fast path is a gate-type table: H, X, CNOT and CR^0 (= CZ) are
//! Clifford; CR^k for k >= 1 and C^lNOT for l >= 2 are not. The numeric
//! path conjugates every single-qubit Pauli generator and checks the
//! image stays in the Pauli group; the table must agree with it.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Component, Gate};
use crate::error::{Error, Result};
use crate::unitary::component_unitary;

pub fn gate_is_clifford(gate: &Gate) -> bool {
    match gate {
        Gate::H { .. } | Gate::X { .. } => true,
        Gate::CR { k, .. } => *k == 0,
        Gate::CNot { controls, .. } => controls.len() == 1,
    }
}

/// A component is Clifford iff all its gates are.
pub fn is_clifford(component: &Component) -> bool {
    component.gates.iter().all(gate_is_clifford)
}

/// Numeric membership test: U P U^dag must be a Pauli-group element (up
/// to phase) for every generator P in {X_i, Z_i}.
pub fn is_clifford_numeric(component: &Component) -> Result<bool> {
    if component.n > 6 {
        return Err(Error::SizeCap {
            what: "is_clifford_numeric",
            cap: 6,
            got: component.n,
        });
    }
    let u = component_unitary(component)?;
    let udag = u.adjoint();
    for q in 0..component.n {
        for pauli in [pauli_x(component.n, q), pauli_z(component.n, q)] {
            let image = &u * &pauli * &udag;
            if !is_pauli_up_to_phase(&image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn pauli_x(n: usize, q: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let bit = 1usize << q;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(j ^ bit, j)] = Complex64::new(1.0, 0.0);
    }
    m
}

fn pauli_z(n: usize, q: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let bit = 1usize << q;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(j, j)] = Complex64::new(if j & bit == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    m
}

/// True iff `m` equals phase * X^a Z^b for bit masks a, b: one nonzero
/// entry per column at a fixed XOR offset, with +/-1 column phase ratios
/// that are linear in the column index.
fn is_pauli_up_to_phase(m: &DMatrix<Complex64>) -> bool {
    const TOL: f64 = 1e-9;
    let dim = m.nrows();
    // Nonzero row of column 0 fixes the X mask.
    let mut mask = None;
    for i in 0..dim {
        if m[(i, 0)].norm() > TOL {
            if mask.is_some() {
                return false;
            }
            mask = Some(i);
        }
    }
    let Some(mask) = mask else { return false };
    let base = m[(mask, 0)];
    let mut ratios = vec![Complex64::default(); dim];
    for j in 0..dim {
        for i in 0..dim {
            let entry = m[(i, j)];
            if i == j ^ mask {
                if (entry.norm() - base.norm()).abs() > TOL {
                    return false;
                }
                ratios[j] = entry / base;
                let re = ratios[j].re;
                if ratios[j].im.abs() > TOL || (re.abs() - 1.0).abs() > TOL {
                    return false;
                }
            } else if entry.norm() > TOL {
                return false;
            }
        }
    }
    // Z-mask linearity: ratio(j) must factor over the bits of j.
    for j in 0..dim {
        let mut expect = 1.0f64;
        for b in 0..dim.trailing_zeros() as usize {
            if j & (1 << b) != 0 {
                expect *= ratios[1 << b].re;
            }
        }
        if (ratios[j].re - expect).abs() > TOL {
            return false;
        }
    }
    true
}
