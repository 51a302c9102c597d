//! Arithmetic in prime fields `GF(p)`, enough for Reed–Solomon evaluation.

use crate::error::{Error, Result};

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_ORDER {
            return Err(Error::Unsupported(format!(
                "field order {p} exceeds {MAX_ORDER}"
            )));
        }
        if !is_prime(p) {
            return Err(Error::Unsupported(format!(
                "field order {p} is not prime; only prime fields are implemented"
            )));
        }
        Ok(Self { p })
    }

    pub fn order(&self) -> u64 {
        self.p
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    /// Evaluates `coeffs[0] + coeffs[1] x + ...` at `x` (Horner).
    pub fn eval(&self, coeffs: &[u64], x: u64) -> u64 {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_only() {
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(65521).is_ok());
        assert!(matches!(PrimeField::new(4), Err(Error::Unsupported(_))));
        assert!(matches!(PrimeField::new(1), Err(Error::Unsupported(_))));
        assert!(matches!(PrimeField::new(65537), Err(Error::Unsupported(_))));
    }

    #[test]
    fn horner_matches_naive_powers() {
        let f = PrimeField::new(7).unwrap();
        let coeffs = [3, 0, 5, 6];
        for x in 0u64..7 {
            let naive = coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c * x.pow(k as u32))
                .sum::<u64>()
                % 7;
            assert_eq!(f.eval(&coeffs, x), naive);
        }
    }
}
