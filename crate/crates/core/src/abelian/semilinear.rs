//! Linear and semilinear sets in ℤᵏ, orthant decomposition of lattice
//! cosets, and the Parikh-style image of an automaton over abelian
//! generators.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::hilbert::{in_nonneg_span, minimal_solutions};
use crate::abelian::linalg::{IntMatrix, IntVector, LatticeCoset};
use crate::automata::Nfa;
use crate::error::{Error, Result};
use crate::words::Symbol;

/// {offset + Σ nᵢ·periods[i] : nᵢ ≥ 0}.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinearSet {
    pub offset: IntVector,
    pub periods: Vec<IntVector>,
}

impl LinearSet {
    pub fn singleton(d: IntVector) -> LinearSet {
        LinearSet {
            offset: d,
            periods: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    pub fn contains(&self, x: &IntVector) -> Result<bool> {
        in_nonneg_span(&self.periods, &self.offset, x)
    }

    pub fn project(&self, dims: std::ops::Range<usize>) -> LinearSet {
        LinearSet {
            offset: self.offset.project(dims.clone()),
            periods: self
                .periods
                .iter()
                .map(|p| p.project(dims.clone()))
                .filter(|p| !p.is_zero())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
        }
    }

    pub fn shift(&self, by: &IntVector) -> LinearSet {
        LinearSet {
            offset: self.offset.add(by),
            periods: self.periods.clone(),
        }
    }
}

/// A finite union of linear sets.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SemilinearSet {
    pub components: Vec<LinearSet>,
}

impl SemilinearSet {
    pub fn empty() -> SemilinearSet {
        SemilinearSet { components: vec![] }
    }

    pub fn singleton(d: IntVector) -> SemilinearSet {
        SemilinearSet {
            components: vec![LinearSet::singleton(d)],
        }
    }

    pub fn from_components(components: Vec<LinearSet>) -> SemilinearSet {
        let dedup: BTreeSet<LinearSet> = components.into_iter().collect();
        SemilinearSet {
            components: dedup.into_iter().collect(),
        }
    }

    pub fn union(&self, other: &SemilinearSet) -> SemilinearSet {
        SemilinearSet::from_components(
            self.components
                .iter()
                .chain(&other.components)
                .cloned()
                .collect(),
        )
    }

    pub fn contains(&self, x: &IntVector) -> Result<bool> {
        for c in &self.components {
            if c.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.components.first().map(LinearSet::dim)
    }

    pub fn project(&self, dims: std::ops::Range<usize>) -> SemilinearSet {
        SemilinearSet::from_components(
            self.components
                .iter()
                .map(|c| c.project(dims.clone()))
                .collect(),
        )
    }

    pub fn shift(&self, by: &IntVector) -> SemilinearSet {
        SemilinearSet::from_components(
            self.components.iter().map(|c| c.shift(by)).collect(),
        )
    }

    /// The whole of ℤᵏ.
    pub fn all(k: usize) -> SemilinearSet {
        let mut periods = Vec::new();
        for i in 0..k {
            let mut e = IntVector::zeros(k);
            e.0[i] = BigInt::from(1u8);
            periods.push(e.clone());
            periods.push(e.neg());
        }
        SemilinearSet {
            components: vec![LinearSet {
                offset: IntVector::zeros(k),
                periods,
            }],
        }
    }
}

/// Per-coordinate sign restriction for orthant decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    NonNeg,
    NonPos,
    Free,
}

/// Decompose a lattice coset intersected with a sign region into linear
/// sets whose periods have uniformly signed coordinates (each coordinate
/// of every period in one component shares a sign or is zero). Offsets and
/// periods come from minimal-solution completions per feasible orthant, so
/// the resulting components generate freely reduced generator words
/// directly.
pub fn coset_to_semilinear(coset: &LatticeCoset, signs: &[Sign]) -> Result<SemilinearSet> {
    let k = coset.dim;
    if signs.len() != k {
        return Err(Error::DimensionMismatch(
            "one sign constraint per coordinate".into(),
        ));
    }
    let m = coset.basis.len();
    if m == 0 {
        // Zero-dimensional coset: a single point, kept iff it satisfies
        // the sign constraints.
        let ok = (0..k).all(|i| match signs[i] {
            Sign::NonNeg => !coset.particular.0[i].is_negative(),
            Sign::NonPos => !coset.particular.0[i].is_positive(),
            Sign::Free => true,
        });
        return Ok(if ok {
            SemilinearSet::singleton(coset.particular.clone())
        } else {
            SemilinearSet::empty()
        });
    }
    let free_coords: Vec<usize> = (0..k)
        .filter(|&i| matches!(signs[i], Sign::Free))
        .collect();
    let mut components = Vec::new();
    for mask in 0..(1u32 << free_coords.len()) {
        // Orthant: substitute x_i = s_i·y_i with y ≥ 0; λ = λ⁺ − λ⁻.
        let mut s = vec![1i64; k];
        for (bit, &i) in free_coords.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                s[i] = -1;
            }
        }
        for i in 0..k {
            if matches!(signs[i], Sign::NonPos) {
                s[i] = -1;
            }
        }
        // System: s_i·y_i − Σ_j B_ij(λ⁺_j − λ⁻_j) = p_i over y, λ⁺, λ⁻ ≥ 0.
        let cols = k + 2 * m;
        let mut a = IntMatrix::zeros(k, cols);
        for i in 0..k {
            a[(i, i)] = BigInt::from(s[i]);
            for j in 0..m {
                a[(i, k + j)] = -coset.basis[j].0[i].clone();
                a[(i, k + m + j)] = coset.basis[j].0[i].clone();
            }
        }
        let (offsets, periods) = minimal_solutions(&a, &coset.particular)?;
        if offsets.is_empty() {
            continue;
        }
        let unflip = |v: &IntVector| {
            IntVector(
                (0..k)
                    .map(|i| if s[i] < 0 { -v.0[i].clone() } else { v.0[i].clone() })
                    .collect(),
            )
        };
        let period_vecs: Vec<IntVector> = periods
            .iter()
            .map(|p| unflip(&p.project(0..k)))
            .filter(|p| !p.is_zero())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for o in offsets {
            components.push(LinearSet {
                offset: unflip(&o.project(0..k)),
                periods: period_vecs.clone(),
            });
        }
    }
    Ok(SemilinearSet::from_components(components))
}

/// The image in ℤᵏ of the language of an automaton whose labels are the
/// standard generators and their inverses: a union, over simple
/// start-to-accept paths, of linear sets whose periods are the values of
/// the simple cycles connected to the path. Exact for trimmed automata by
/// the usual pumping argument.
pub fn nfa_to_semilinear(
    aut: &Nfa<Symbol>,
    gens: &[Symbol],
) -> Result<SemilinearSet> {
    let k = gens.len();
    let value_of = |l: &Symbol| -> Result<IntVector> {
        let mut v = IntVector::zeros(k);
        for (i, &g) in gens.iter().enumerate() {
            if *l == g {
                v.0[i] = BigInt::from(1u8);
                return Ok(v);
            }
            if g.inverse() == Some(*l) {
                v.0[i] = BigInt::from(-1i8);
                return Ok(v);
            }
        }
        Err(Error::DomainMismatch(format!(
            "label {l} is not a generator of ℤ^{k}"
        )))
    };
    let a = aut.trim();
    if a.accepts_states().is_empty() {
        return Ok(SemilinearSet::empty());
    }
    let edges: Vec<(u32, IntVector, u32)> = a
        .edges()
        .iter()
        .map(|(p, l, q)| {
            Ok((
                *p,
                match l {
                    None => IntVector::zeros(k),
                    Some(sym) => value_of(sym)?,
                },
                *q,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    // Simple start-to-accept paths (no repeated states).
    const PATH_CAP: usize = 100_000;
    let mut paths: Vec<(IntVector, BTreeSet<u32>)> = Vec::new();
    let mut stack: Vec<(u32, IntVector, BTreeSet<u32>)> = vec![(
        a.start(),
        IntVector::zeros(k),
        BTreeSet::from([a.start()]),
    )];
    while let Some((q, val, visited)) = stack.pop() {
        if a.accepts_states().contains(&q) {
            paths.push((val.clone(), visited.clone()));
            if paths.len() > PATH_CAP {
                return Err(Error::CapExceeded(
                    "too many simple paths in the value decomposition".into(),
                ));
            }
        }
        for (p, v, r) in &edges {
            if *p == q && !visited.contains(r) {
                let mut vis = visited.clone();
                vis.insert(*r);
                stack.push((*r, val.add(v), vis));
            }
        }
    }

    // Simple cycles: canonical base state = the least state on the cycle.
    let mut cycles: Vec<(IntVector, BTreeSet<u32>)> = Vec::new();
    for base in 0..a.state_count() {
        let mut st: Vec<(u32, IntVector, BTreeSet<u32>)> =
            vec![(base, IntVector::zeros(k), BTreeSet::from([base]))];
        while let Some((q, val, visited)) = st.pop() {
            for (p, v, r) in &edges {
                if *p != q {
                    continue;
                }
                if *r == base {
                    let cval = val.add(v);
                    cycles.push((cval, visited.clone()));
                    if cycles.len() > PATH_CAP {
                        return Err(Error::CapExceeded(
                            "too many simple cycles in the value decomposition".into(),
                        ));
                    }
                } else if !visited.contains(r) && *r > base {
                    let mut vis = visited.clone();
                    vis.insert(*r);
                    st.push((*r, val.add(v), vis));
                }
            }
        }
    }

    // For each path: saturate the set of cycles connected to it.
    let mut components = Vec::new();
    for (pval, pstates) in &paths {
        let mut states = pstates.clone();
        let mut used = vec![false; cycles.len()];
        loop {
            let mut grew = false;
            for (i, (_, cstates)) in cycles.iter().enumerate() {
                if !used[i] && cstates.iter().any(|s| states.contains(s)) {
                    used[i] = true;
                    states.extend(cstates.iter().copied());
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let periods: Vec<IntVector> = cycles
            .iter()
            .enumerate()
            .filter(|(i, _)| used[*i])
            .map(|(_, (v, _))| v.clone())
            .filter(|v| !v.is_zero())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        components.push(LinearSet {
            offset: pval.clone(),
            periods,
        });
    }
    Ok(SemilinearSet::from_components(components))
}

/// One disjunct of the reduction from a semilinear constraint to linear
/// equations: X = Σ cᵢYᵢ + d with fresh nonnegative variables Yᵢ.
#[derive(Clone, Debug)]
pub struct ConstraintBlock {
    pub periods: Vec<IntVector>,
    pub offset: IntVector,
}

/// The finite disjunction expressing membership in a semilinear set: one
/// block per linear component.
pub fn semilinear_to_constraints(s: &SemilinearSet) -> Vec<ConstraintBlock> {
    s.components
        .iter()
        .map(|c| ConstraintBlock {
            periods: c.periods.clone(),
            offset: c.offset.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::linalg::solve_linear_system;
    use crate::automata::Nfa;

    fn iv(v: &[i64]) -> IntVector {
        IntVector::from_i64(v)
    }

    #[test]
    fn odd_numbers_block() {
        // {2n+1 : n ≥ 0}: X = 2Y + 1, Y ≥ 0; brute check on -5..9.
        let s = SemilinearSet {
            components: vec![LinearSet {
                offset: iv(&[1]),
                periods: vec![iv(&[2])],
            }],
        };
        let blocks = semilinear_to_constraints(&s);
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].offset, iv(&[1]));
        assert_eq!(blocks[0].periods, vec![iv(&[2])]);
        for x in -5..=9i64 {
            assert_eq!(
                s.contains(&iv(&[x])).unwrap(),
                x >= 1 && x % 2 == 1,
                "x = {x}"
            );
        }
    }

    #[test]
    fn whole_z_as_two_periods() {
        let s = SemilinearSet::all(1);
        for x in -6..=6i64 {
            assert!(s.contains(&iv(&[x])).unwrap());
        }
    }

    #[test]
    fn singleton_set() {
        let s = SemilinearSet::singleton(iv(&[3, -2]));
        assert!(s.contains(&iv(&[3, -2])).unwrap());
        assert!(!s.contains(&iv(&[3, -1])).unwrap());
    }

    #[test]
    fn coset_antidiagonal_with_signs() {
        // {(t,−t)}: x + y = 0 with signs (≥0, ≤0) gives offset (0,0),
        // periods {(1,−1)}.
        let a = IntMatrix::from_rows_i64(&[&[1, 1]]);
        let coset = solve_linear_system(&a, &iv(&[0])).unwrap().unwrap();
        let s = coset_to_semilinear(&coset, &[Sign::NonNeg, Sign::NonPos]).unwrap();
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.components[0].offset, iv(&[0, 0]));
        assert_eq!(s.components[0].periods, vec![iv(&[1, -1])]);
    }

    #[test]
    fn coset_diagonal_nonneg() {
        // {(t,t)} with both coordinates ≥ 0: periods {(1,1)}.
        let a = IntMatrix::from_rows_i64(&[&[1, -1]]);
        let coset = solve_linear_system(&a, &iv(&[0])).unwrap().unwrap();
        let s = coset_to_semilinear(&coset, &[Sign::NonNeg, Sign::NonNeg]).unwrap();
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.components[0].periods, vec![iv(&[1, 1])]);
    }

    #[test]
    fn coset_empty_intersection() {
        // particular (1), no basis, coordinate forced ≤ 0.
        let a = IntMatrix::from_rows_i64(&[&[1]]);
        let coset = solve_linear_system(&a, &iv(&[1])).unwrap().unwrap();
        let s = coset_to_semilinear(&coset, &[Sign::NonPos]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn coset_free_signs_cover_coset() {
        // x − 2y = 1, free signs: decomposition must cover exactly the
        // coset on a box.
        let a = IntMatrix::from_rows_i64(&[&[1, -2]]);
        let coset = solve_linear_system(&a, &iv(&[1])).unwrap().unwrap();
        let s = coset_to_semilinear(&coset, &[Sign::Free, Sign::Free]).unwrap();
        for x in -7..=7i64 {
            for y in -7..=7i64 {
                let inside = x - 2 * y == 1;
                assert_eq!(
                    s.contains(&iv(&[x, y])).unwrap(),
                    inside,
                    "({x},{y})"
                );
            }
        }
        // Uniform signs within each component.
        for c in &s.components {
            for coord in 0..2 {
                let pos = c.periods.iter().any(|p| p.0[coord].is_positive());
                let neg = c.periods.iter().any(|p| p.0[coord].is_negative());
                assert!(!(pos && neg), "mixed signs in component {c:?}");
            }
        }
    }

    #[test]
    fn parikh_of_even_runs() {
        // (aa)* over ℤ: {2n : n ≥ 0}, checked on −6..12.
        let a = Symbol::new("a");
        let aut = Nfa::new(2, vec![(0, Some(a), 1), (1, Some(a), 0)], 0, [0]).unwrap();
        let s = nfa_to_semilinear(&aut, &[a]).unwrap();
        for x in -6..=12i64 {
            assert_eq!(
                s.contains(&iv(&[x])).unwrap(),
                x >= 0 && x % 2 == 0,
                "x = {x}"
            );
        }
    }

    #[test]
    fn parikh_with_cancelling_loop() {
        // a(a⁻¹a)*: value is always 1.
        let (a, ainv) = Symbol::pair("a");
        let aut = Nfa::new(
            3,
            vec![
                (0, Some(a), 1),
                (1, Some(ainv), 2),
                (2, Some(a), 1),
            ],
            0,
            [1],
        )
        .unwrap();
        let s = nfa_to_semilinear(&aut, &[a]).unwrap();
        for x in -6..=6i64 {
            assert_eq!(s.contains(&iv(&[x])).unwrap(), x == 1, "x = {x}");
        }
    }

    #[test]
    fn parikh_of_empty() {
        let aut: Nfa<Symbol> = Nfa::empty_language();
        let s = nfa_to_semilinear(&aut, &[Symbol::new("a")]).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn parikh_matches_enumeration_on_value_slice() {
        // Two generators, loops with mixed values; compare against direct
        // evaluation of enumerated words on [−8,8]².
        let (a, _ai) = Symbol::pair("a");
        let (b, bi) = Symbol::pair("b");
        let aut = Nfa::new(
            2,
            vec![
                (0, Some(a), 0),
                (0, Some(b), 1),
                (1, Some(bi), 0),
                (1, Some(a), 1),
            ],
            0,
            [1],
        )
        .unwrap();
        let s = nfa_to_semilinear(&aut, &[a, b]).unwrap();
        let mut reached: BTreeSet<Vec<i64>> = BTreeSet::new();
        for w in aut.enumerate(8) {
            let mut x = [0i64; 2];
            for l in w {
                if l == a {
                    x[0] += 1;
                } else if l == b {
                    x[1] += 1;
                } else if l == bi {
                    x[1] -= 1;
                }
            }
            reached.insert(x.to_vec());
        }
        // Everything reached within 8 letters must be in the image; the
        // converse on the small box where 8 letters suffice.
        for v in &reached {
            assert!(s.contains(&iv(v)).unwrap(), "missing {v:?}");
        }
        for x in -2..=2i64 {
            for y in -2..=2i64 {
                if s.contains(&iv(&[x, y])).unwrap() {
                    // Small values are reachable with few letters.
                    if x.abs() + 2 * y.abs() + 2 <= 8 {
                        assert!(
                            reached.contains(&vec![x, y]),
                            "extra ({x},{y})"
                        );
                    }
                }
            }
        }
    }
}
