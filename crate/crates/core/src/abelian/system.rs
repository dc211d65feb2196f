//! Systems of (twisted) linear equations over ℤᵏ with optional semilinear
//! constraints, the flattening to one scalar system, and the compressed
//! length measures.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::abelian::linalg::{IntMatrix, IntVector};
use crate::abelian::semilinear::SemilinearSet;
use crate::error::{Error, Result};

/// One equation Σᵢ Bᵢ·x_{vᵢ} + c = 0 over ℤᵏ; a twist matrix acts on the
/// solution vector as matrix times column, so (XΦ)ⱼ = Σ_l Φ[j][l]·x_l.
/// Untwisted occurrences carry (multiples of) the identity.
#[derive(Clone, Debug)]
pub struct AbelianEquation {
    pub terms: Vec<(usize, IntMatrix)>,
    pub constant: IntVector,
}

#[derive(Clone, Debug)]
pub struct AbelianEquationSystem {
    pub rank: usize,
    pub var_count: usize,
    pub equations: Vec<AbelianEquation>,
    pub constraints: Vec<Option<SemilinearSet>>,
}

impl AbelianEquationSystem {
    pub fn new(rank: usize, var_count: usize) -> AbelianEquationSystem {
        AbelianEquationSystem {
            rank,
            var_count,
            equations: Vec::new(),
            constraints: vec![None; var_count],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for eq in &self.equations {
            if eq.constant.dim() != self.rank {
                return Err(Error::DimensionMismatch(
                    "equation constant has the wrong dimension".into(),
                ));
            }
            for (v, b) in &eq.terms {
                if *v >= self.var_count {
                    return Err(Error::InvalidSystem(format!("unknown variable {v}")));
                }
                if b.rows != self.rank || b.cols != self.rank {
                    return Err(Error::DimensionMismatch(
                        "twist matrix must be k×k".into(),
                    ));
                }
            }
        }
        for s in self.constraints.iter().flatten() {
            if s.dim().is_some_and(|d| d != self.rank) {
                return Err(Error::DimensionMismatch(
                    "constraint dimension differs from the rank".into(),
                ));
            }
        }
        Ok(())
    }

    /// Does the concatenated solution vector satisfy every equation
    /// (ignoring constraints)? Coordinates grouped k at a time per
    /// variable.
    pub fn satisfied_by(&self, xs: &IntVector) -> Result<bool> {
        for eq in &self.equations {
            let mut acc = eq.constant.clone();
            for (v, b) in &eq.terms {
                let x = xs.project(v * self.rank..(v + 1) * self.rank);
                acc = acc.add(&b.mul_vec(&x)?);
            }
            if !acc.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Flatten to one scalar linear system over kn variables: integer
/// solutions correspond bijectively to solutions of the twisted system
/// (constraints not included), coordinates grouped k at a time.
pub fn twisted_to_linear(sys: &AbelianEquationSystem) -> (IntMatrix, IntVector) {
    let k = sys.rank;
    let cols = k * sys.var_count;
    let rows = k * sys.equations.len();
    let mut a = IntMatrix::zeros(rows, cols);
    let mut b = IntVector::zeros(rows);
    for (e, eq) in sys.equations.iter().enumerate() {
        for j in 0..k {
            // Coordinate j of Σ B·x_v + c = 0: (B·x)_j = Σ_l B[j][l]·x_l.
            for (v, m) in &eq.terms {
                for l in 0..k {
                    let add = m[(j, l)].clone();
                    a[(e * k + j, v * k + l)] += add;
                }
            }
            b.0[e * k + j] = -eq.constant.0[j].clone();
        }
    }
    (a, b)
}

fn ceil_log2(x: &BigInt) -> usize {
    let ax = x.abs();
    if ax <= BigInt::one() {
        return 0;
    }
    let mut bits = ax.bits() as usize;
    // bits = floor(log2) + 1; powers of two need one less.
    let is_pow2 = {
        let (_, digits) = ax.to_u32_digits();
        let ones: u32 = digits.iter().map(|d| d.count_ones()).sum();
        ones == 1
    };
    if is_pow2 {
        bits -= 1;
    }
    bits
}

/// The compressed length of one equation: Σ log|bᵢ| + Σ log|cⱼ| + k·n for
/// scalar (untwisted) equations, and Σ log|b_rij| + n·k² + Σ log|cⱼ| + k
/// for matrix-twisted ones. Logs are base two rounded up, zero entries
/// omitted, and the constants of the definition are taken to be one.
pub fn abelian_equation_length(eq: &AbelianEquation, rank: usize) -> usize {
    let occurring = eq.terms.len();
    let scalar: Option<Vec<BigInt>> = eq
        .terms
        .iter()
        .map(|(_, b)| b.as_scalar())
        .collect();
    let const_part: usize = eq
        .constant
        .0
        .iter()
        .filter(|c| !c.is_zero())
        .map(ceil_log2)
        .sum();
    match scalar {
        Some(coeffs) => {
            let var_part: usize = coeffs
                .iter()
                .filter(|b| !b.is_zero())
                .map(ceil_log2)
                .sum();
            let n = coeffs.iter().filter(|b| !b.is_zero()).count();
            var_part + const_part + rank * n
        }
        None => {
            let var_part: usize = eq
                .terms
                .iter()
                .flat_map(|(_, m)| {
                    (0..m.rows).flat_map(move |i| (0..m.cols).map(move |j| m[(i, j)].clone()))
                })
                .filter(|x| !x.is_zero())
                .map(|x| ceil_log2(&x))
                .sum();
            var_part + occurring * rank * rank + const_part + rank
        }
    }
}

/// Free abelian length of a system: the sum over its equations.
pub fn va_equation_length(sys: &AbelianEquationSystem) -> usize {
    sys.equations
        .iter()
        .map(|eq| abelian_equation_length(eq, sys.rank))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flatten_rotation_twist() {
        // k=2: XΦ = Y with Φ = [[0,1],[−1,0]] as XΦ − Y = 0 gives the
        // scalar equations x₂ = y₁ and −x₁ = y₂.
        let mut sys = AbelianEquationSystem::new(2, 2);
        let phi = IntMatrix::from_rows_i64(&[&[0, 1], &[-1, 0]]);
        let minus_id = IntMatrix::from_rows_i64(&[&[-1, 0], &[0, -1]]);
        sys.equations.push(AbelianEquation {
            terms: vec![(0, phi), (1, minus_id)],
            constant: IntVector::from_i64(&[0, 0]),
        });
        let (a, b) = twisted_to_linear(&sys);
        assert!(b.is_zero());
        // Row 0: coordinate 1 of the image: x₂ − y₁ = 0.
        assert_eq!(a.row(0), IntVector::from_i64(&[0, 1, -1, 0]));
        // Row 1: −x₁ − y₂ = 0.
        assert_eq!(a.row(1), IntVector::from_i64(&[-1, 0, 0, -1]));
        // Bijection spot check.
        assert!(sys.satisfied_by(&IntVector::from_i64(&[3, 5, 5, -3])).unwrap());
        assert!(!sys.satisfied_by(&IntVector::from_i64(&[3, 5, 5, 3])).unwrap());
    }

    #[test]
    fn flatten_untwisted_sum() {
        // X + Y = (3,0) as X + Y − (3,0)… constant on the left: +c = 0
        // means c = (−3,0).
        let mut sys = AbelianEquationSystem::new(2, 2);
        let id = IntMatrix::identity(2);
        sys.equations.push(AbelianEquation {
            terms: vec![(0, id.clone()), (1, id)],
            constant: IntVector::from_i64(&[-3, 0]),
        });
        let (a, b) = twisted_to_linear(&sys);
        assert_eq!(b, IntVector::from_i64(&[3, 0]));
        assert_eq!(a.row(0), IntVector::from_i64(&[1, 0, 1, 0]));
        assert_eq!(a.row(1), IntVector::from_i64(&[0, 1, 0, 1]));
    }

    #[test]
    fn zero_twist_annihilates() {
        let mut sys = AbelianEquationSystem::new(1, 1);
        sys.equations.push(AbelianEquation {
            terms: vec![(0, IntMatrix::zeros(1, 1))],
            constant: IntVector::from_i64(&[0]),
        });
        let (a, b) = twisted_to_linear(&sys);
        assert!(b.is_zero());
        assert!(a.row(0).is_zero());
        assert!(sys.satisfied_by(&IntVector::from_i64(&[17])).unwrap());
    }

    #[test]
    fn length_of_x_a5() {
        // X a⁵ = 1 in ℤ: ⌈log 1⌉ + ⌈log 5⌉ + 1·1·1 = 0 + 3 + 1 = 4.
        let mut sys = AbelianEquationSystem::new(1, 1);
        sys.equations.push(AbelianEquation {
            terms: vec![(0, IntMatrix::identity(1))],
            constant: IntVector::from_i64(&[5]),
        });
        assert_eq!(va_equation_length(&sys), 4);
    }

    #[test]
    fn length_of_empty_system() {
        let sys = AbelianEquationSystem::new(2, 3);
        assert_eq!(va_equation_length(&sys), 0);
    }

    #[test]
    fn length_of_twisted_equation() {
        // One 2×2 twist with entries {0,1,−1}: Σlog = 0, + n·k² = 4, +
        // log|c| for c = (2,0): 1, + k = 2: total 7.
        let mut sys = AbelianEquationSystem::new(2, 1);
        sys.equations.push(AbelianEquation {
            terms: vec![(0, IntMatrix::from_rows_i64(&[&[0, 1], &[-1, 0]]))],
            constant: IntVector::from_i64(&[2, 0]),
        });
        assert_eq!(va_equation_length(&sys), 0 + 4 + 1 + 2);
    }

    #[test]
    fn ceil_log2_values() {
        for (x, want) in [(0i64, 0), (1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (1024, 10)] {
            assert_eq!(ceil_log2(&BigInt::from(x)), want, "x = {x}");
        }
    }
}
