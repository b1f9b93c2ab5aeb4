use num_complex::Complex64;

use super::PauliSum;
use crate::error::{Error, Result};

/// One creation or annihilation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub creation: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Self {
            mode,
            creation: true,
        }
    }

    pub fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            creation: false,
        }
    }

    pub fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            creation: !self.creation,
        }
    }
}

/// Sum of ladder-operator products, kept exactly as written (no normal ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    products: Vec<(Vec<Ladder>, Complex64)>,
}

impl FermionOperator {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            products: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn products(&self) -> &[(Vec<Ladder>, Complex64)] {
        &self.products
    }

    pub fn push(&mut self, ladders: Vec<Ladder>, coefficient: Complex64) -> Result<()> {
        if let Some(bad) = ladders.iter().find(|l| l.mode >= self.n_modes) {
            return Err(Error::validation(
                "fermion operator",
                format!("mode {} out of range for {} modes", bad.mode, self.n_modes),
            ));
        }
        self.products.push((ladders, coefficient));
        Ok(())
    }

    pub fn with(mut self, ladders: Vec<Ladder>, coefficient: Complex64) -> Result<Self> {
        self.push(ladders, coefficient)?;
        Ok(self)
    }

    /// Hermitian conjugate: reverse each product and flip every ladder.
    pub fn adjoint(&self) -> Self {
        Self {
            n_modes: self.n_modes,
            products: self
                .products
                .iter()
                .map(|(ls, c)| (ls.iter().rev().map(|l| l.adjoint()).collect(), c.conj()))
                .collect(),
        }
    }
}

/// `a_p = (X_p + iY_p)/2 · Z_{p-1}…Z_0`, `a†_p = (X_p − iY_p)/2 · Z_{p-1}…Z_0`.
fn ladder_image(n_qubits: usize, l: Ladder) -> PauliSum {
    let p = l.mode;
    let string = (1u64 << p) - 1;
    let sign = if l.creation { -1.0 } else { 1.0 };
    let mut s = PauliSum::zero(n_qubits).expect("width checked by caller");
    s.accumulate((1 << p, string), Complex64::new(0.5, 0.0));
    s.accumulate((1 << p, string | 1 << p), Complex64::new(0.0, 0.5 * sign));
    s
}

/// Jordan–Wigner image of a fermionic operator on `n_modes` qubits.
pub fn jordan_wigner(f: &FermionOperator) -> Result<PauliSum> {
    let n = f.n_modes;
    let mut out = PauliSum::zero(n)?;
    let images: Vec<[PauliSum; 2]> = (0..n)
        .map(|p| {
            [
                ladder_image(n, Ladder::annihilate(p)),
                ladder_image(n, Ladder::create(p)),
            ]
        })
        .collect();
    for (ladders, coeff) in &f.products {
        let mut prod = PauliSum::identity(n, *coeff)?;
        for l in ladders {
            prod = prod.mul(&images[l.mode][l.creation as usize])?;
            if prod.is_empty() {
                break;
            }
        }
        for (k, c) in prod.raw_terms() {
            out.accumulate(k, c);
        }
    }
    out.prune();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::to_dense_matrix;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn number_operator() {
        let f = FermionOperator::new(1)
            .with(vec![Ladder::create(0), Ladder::annihilate(0)], one())
            .unwrap();
        let s = jordan_wigner(&f).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.coefficient(0, 0), Complex64::new(0.5, 0.0));
        assert_eq!(s.coefficient(0, 1), Complex64::new(-0.5, 0.0));
    }

    #[test]
    fn hopping_antisymmetric_pair() {
        // a†1 a0 − a†0 a1 = (i/2)(Y0 X1 − X0 Y1) in this convention
        let f = FermionOperator::new(2)
            .with(vec![Ladder::create(1), Ladder::annihilate(0)], one())
            .unwrap()
            .with(vec![Ladder::create(0), Ladder::annihilate(1)], -one())
            .unwrap();
        let s = jordan_wigner(&f).unwrap();
        assert_eq!(s.len(), 2);
        // Y0 X1: x = 0b11, z = 0b01
        assert!((s.coefficient(0b11, 0b01) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        // X0 Y1: x = 0b11, z = 0b10
        assert!((s.coefficient(0b11, 0b10) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn annihilator_matrix_lowers_occupation() {
        // a_1 on 2 modes: |11> -> -|01>  (string over mode 0), |10> -> |00>
        let f = FermionOperator::new(2)
            .with(vec![Ladder::annihilate(1)], one())
            .unwrap();
        let m = to_dense_matrix(&jordan_wigner(&f).unwrap()).unwrap();
        assert!((m[(0b01, 0b11)] + one()).norm() < 1e-15);
        assert!((m[(0b00, 0b10)] - one()).norm() < 1e-15);
    }

    #[test]
    fn anti_hermitian_input_maps_to_anti_hermitian() {
        let t = FermionOperator::new(4)
            .with(
                vec![
                    Ladder::create(2),
                    Ladder::create(3),
                    Ladder::annihilate(0),
                    Ladder::annihilate(1),
                ],
                one(),
            )
            .unwrap();
        let mut g = t.clone();
        for (ls, c) in t.adjoint().products() {
            g.push(ls.clone(), -c).unwrap();
        }
        let s = jordan_wigner(&g).unwrap();
        assert!(!s.is_empty());
        assert!(s.is_anti_hermitian(1e-14));
    }

    #[test]
    fn rejects_out_of_range_mode() {
        assert!(FermionOperator::new(2)
            .with(vec![Ladder::create(2)], one())
            .is_err());
    }
}
