//! Minimal nonnegative solutions of integer linear systems by a bounded
//! Contejean–Devie completion. The homogeneous minimal solutions form the
//! Hilbert basis; inhomogeneous systems are homogenized with a slack
//! coordinate and read off at slack value one.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::abelian::linalg::{IntMatrix, IntVector};
use crate::error::{Error, Result};

/// Hard bounds turning runaway completions into errors.
pub const HILBERT_NORM_CAP: u64 = 4096;
pub const HILBERT_FRONTIER_CAP: usize = 2_000_000;

/// Minimal nonzero solutions of A·z = 0, z ≥ 0.
pub fn hilbert_basis(a: &IntMatrix) -> Result<Vec<IntVector>> {
    complete(a, &|_| true)
}

/// Offsets and periods of {z ≥ 0 : A·z = b}: the minimal solutions
/// (offsets) together with the Hilbert basis of the homogeneous system
/// (periods). Every solution is an offset plus an ℕ-combination of
/// periods.
pub fn minimal_solutions(
    a: &IntMatrix,
    b: &IntVector,
) -> Result<(Vec<IntVector>, Vec<IntVector>)> {
    if b.dim() != a.rows {
        return Err(Error::DimensionMismatch(
            "rhs dimension differs from row count".into(),
        ));
    }
    // Homogenize: columns of A, then -b as the slack column; minimal
    // solutions with slack 1 are the offsets, slack 0 the periods. Slack
    // values ≥ 2 are not minimal against slack-1 solutions in general, so
    // they are filtered rather than assumed absent.
    let n = a.cols;
    let mut h = IntMatrix::zeros(a.rows, n + 1);
    for i in 0..a.rows {
        for j in 0..n {
            h[(i, j)] = a[(i, j)].clone();
        }
        h[(i, n)] = -b.0[i].clone();
    }
    let all = complete(&h, &|v: &IntVector| v.0[n] <= BigInt::from(1u8))?;
    let mut offsets = Vec::new();
    let mut periods = Vec::new();
    for v in all {
        let slack = v.0[n].clone();
        let core = v.project(0..n);
        if slack.is_zero() {
            periods.push(core);
        } else if slack == BigInt::from(1u8) {
            offsets.push(core);
        }
    }
    Ok((offsets, periods))
}

/// Contejean–Devie completion restricted to vectors satisfying `keep`
/// (monotone predicates only: pruned vectors' extensions are pruned too).
fn complete(
    a: &IntMatrix,
    keep: &dyn Fn(&IntVector) -> bool,
) -> Result<Vec<IntVector>> {
    let n = a.cols;
    let cols: Vec<IntVector> = (0..n).map(|j| a.col(j)).collect();
    let cap = BigInt::from(HILBERT_NORM_CAP);
    let mut minimal: Vec<IntVector> = Vec::new();
    // Breadth-first: small minimal solutions must be found before the
    // vectors they dominate, or the frontier runs away.
    let mut frontier: std::collections::VecDeque<(IntVector, IntVector)> =
        std::collections::VecDeque::new(); // (z, A·z)
    let mut seen: std::collections::HashSet<IntVector> = std::collections::HashSet::new();
    for j in 0..n {
        let mut e = IntVector::zeros(n);
        e.0[j] = BigInt::from(1u8);
        if keep(&e) {
            let val = cols[j].clone();
            seen.insert(e.clone());
            frontier.push_back((e, val));
        }
    }
    while let Some((z, val)) = frontier.pop_front() {
        if val.is_zero() {
            if !minimal.iter().any(|m| m.le(&z)) {
                minimal.retain(|m| !z.le(m));
                minimal.push(z);
            }
            continue;
        }
        if minimal.iter().any(|m| m.le(&z)) {
            continue;
        }
        for j in 0..n {
            // The Contejean–Devie descent criterion: only extend along
            // coordinates whose column decreases the current value.
            if val.dot(&cols[j]) >= BigInt::zero() {
                continue;
            }
            let mut z2 = z.clone();
            z2.0[j] += 1;
            if z2.norm_inf() > cap {
                return Err(Error::CapExceeded(format!(
                    "Hilbert completion exceeded the norm cap {HILBERT_NORM_CAP}"
                )));
            }
            if !keep(&z2) || minimal.iter().any(|m| m.le(&z2)) {
                continue;
            }
            if seen.insert(z2.clone()) {
                if seen.len() > HILBERT_FRONTIER_CAP {
                    return Err(Error::CapExceeded(
                        "Hilbert completion frontier overflow".into(),
                    ));
                }
                let val2 = val.add(&cols[j]);
                frontier.push_back((z2, val2));
            }
        }
    }
    // Final minimality sweep (insertions can arrive out of order).
    let mut out: Vec<IntVector> = Vec::new();
    minimal.sort();
    for z in minimal {
        if !out.iter().any(|m| m.le(&z)) {
            out.push(z);
        }
    }
    Ok(out)
}

/// Exact membership of `x` in {d + Σ nᵢcᵢ : nᵢ ≥ 0}: solve C·n = x − d
/// for n ≥ 0 via homogenization.
pub fn in_nonneg_span(periods: &[IntVector], d: &IntVector, x: &IntVector) -> Result<bool> {
    let k = d.dim();
    let r = periods.len();
    let rhs = x.sub(d);
    if r == 0 {
        return Ok(rhs.is_zero());
    }
    let mut c = IntMatrix::zeros(k, r);
    for (j, p) in periods.iter().enumerate() {
        for i in 0..k {
            c[(i, j)] = p.0[i].clone();
        }
    }
    let (offsets, _) = minimal_solutions(&c, &rhs)?;
    Ok(!offsets.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecs(vs: &[&[i64]]) -> Vec<IntVector> {
        vs.iter().map(|v| IntVector::from_i64(v)).collect()
    }

    #[test]
    fn hilbert_of_x_eq_y() {
        // x - y = 0, x,y ≥ 0: basis {(1,1)}.
        let a = IntMatrix::from_rows_i64(&[&[1, -1]]);
        let basis = hilbert_basis(&a).unwrap();
        assert_eq!(basis, vecs(&[&[1, 1]]));
    }

    #[test]
    fn hilbert_of_x_plus_y_eq_2z() {
        // x + y = 2z: classical basis {(2,0,1),(0,2,1),(1,1,1)}.
        let a = IntMatrix::from_rows_i64(&[&[1, 1, -2]]);
        let mut basis = hilbert_basis(&a).unwrap();
        basis.sort();
        let mut expect = vecs(&[&[0, 2, 1], &[1, 1, 1], &[2, 0, 1]]);
        expect.sort();
        assert_eq!(basis, expect);
    }

    #[test]
    fn hilbert_brute_force_minimality() {
        // Every generated vector solves the system; every brute-force
        // minimal solution in the box [0,8]^k appears.
        let a = IntMatrix::from_rows_i64(&[&[2, -3, 1]]);
        let basis = hilbert_basis(&a).unwrap();
        for v in &basis {
            assert!(a.mul_vec(v).unwrap().is_zero());
        }
        let mut brute: Vec<IntVector> = Vec::new();
        for x in 0..=8i64 {
            for y in 0..=8i64 {
                for z in 0..=8i64 {
                    if (x, y, z) == (0, 0, 0) {
                        continue;
                    }
                    if 2 * x - 3 * y + z == 0 {
                        brute.push(IntVector::from_i64(&[x, y, z]));
                    }
                }
            }
        }
        let minimal: Vec<&IntVector> = brute
            .iter()
            .filter(|v| !brute.iter().any(|w| w != *v && w.le(v)))
            .collect();
        for m in minimal {
            assert!(basis.contains(m), "missing minimal solution {m:?}");
        }
    }

    #[test]
    fn inhomogeneous_offsets_and_periods() {
        // x - 2y = 1, x,y ≥ 0: offsets {(1,0)}, periods {(2,1)}.
        let a = IntMatrix::from_rows_i64(&[&[1, -2]]);
        let (offsets, periods) =
            minimal_solutions(&a, &IntVector::from_i64(&[1])).unwrap();
        assert_eq!(offsets, vecs(&[&[1, 0]]));
        assert_eq!(periods, vecs(&[&[2, 1]]));
    }

    #[test]
    fn nonneg_span_membership() {
        // Odd numbers: d = 1, period 2.
        let periods = vecs(&[&[2]]);
        let d = IntVector::from_i64(&[1]);
        for x in -5..=9i64 {
            let got = in_nonneg_span(&periods, &d, &IntVector::from_i64(&[x])).unwrap();
            assert_eq!(got, x >= 1 && (x - 1) % 2 == 0, "x = {x}");
        }
    }

    #[test]
    fn unsatisfiable_inhomogeneous() {
        // x + y = -1 with x,y ≥ 0.
        let a = IntMatrix::from_rows_i64(&[&[1, 1]]);
        let (offsets, _) = minimal_solutions(&a, &IntVector::from_i64(&[-1])).unwrap();
        assert!(offsets.is_empty());
    }
}
