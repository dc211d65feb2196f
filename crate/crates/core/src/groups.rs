//! Concrete computable groups: finite multiplication tables, free abelian
//! groups, direct products, wreath products with finite top groups, and
//! finite extensions given by explicit transversal data. Each variant
//! carries a generating alphabet, a normal form, a regular witness
//! automaton for the normal-form image, and the Schreier machinery for
//! finite-index subgroups.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::abelian::linalg::{solve_linear_system, IntMatrix, IntVector};
use crate::automata::{Nfa, StateId};
use crate::error::{Error, Result};
use crate::words::{Alphabet, Symbol, Word};

pub const BALL_CAP: usize = 1_000_000;

/// A finite group as a multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTable {
    pub names: Vec<String>,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    pub inverse: Vec<usize>,
    /// Indices of the elements declared as generators.
    pub generators: Vec<usize>,
}

impl FiniteTable {
    /// Validate the group axioms and compute identity and inverses.
    pub fn new(
        names: Vec<String>,
        table: Vec<Vec<usize>>,
        generators: Option<Vec<usize>>,
    ) -> Result<FiniteTable> {
        let n = names.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidGroup("table must be n×n".into()));
        }
        for row in &table {
            for &v in row {
                if v >= n {
                    return Err(Error::InvalidGroup("table entry out of range".into()));
                }
            }
        }
        // Identity.
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        // Inverses.
        let inverse = (0..n)
            .map(|x| {
                (0..n)
                    .find(|&y| table[x][y] == identity && table[y][x] == identity)
                    .ok_or_else(|| Error::InvalidGroup(format!("{} has no inverse", names[x])))
            })
            .collect::<Result<Vec<_>>>()?;
        // Associativity.
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup("table is not associative".into()));
                    }
                }
            }
        }
        let generators = generators
            .unwrap_or_else(|| (0..n).filter(|&x| x != identity).collect());
        // Generators must generate.
        let mut reached = vec![false; n];
        reached[identity] = true;
        let mut frontier = vec![identity];
        while let Some(x) = frontier.pop() {
            for &g in &generators {
                for y in [table[x][g], table[x][inverse[g]]] {
                    if !reached[y] {
                        reached[y] = true;
                        frontier.push(y);
                    }
                }
            }
        }
        if reached.iter().any(|r| !r) {
            return Err(Error::InvalidGroup(
                "declared generators do not generate the group".into(),
            ));
        }
        Ok(FiniteTable {
            names,
            table,
            identity,
            inverse,
            generators,
        })
    }

    /// The cyclic group of order n with generator "s" (named elements
    /// 1, s, s2, …).
    pub fn cyclic(n: usize) -> FiniteTable {
        let names = (0..n)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "s".to_string(),
                i => format!("s{i}"),
            })
            .collect();
        let table = (0..n)
            .map(|i| (0..n).map(|j| (i + j) % n).collect())
            .collect();
        FiniteTable::new(names, table, Some(vec![1])).expect("cyclic table is a group")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }
}

/// How an automorphism of the subgroup of an extension is stored: a matrix
/// on the flattened abelian coordinates, or a permutation of the elements
/// of a finite subgroup.
#[derive(Clone, Debug)]
pub enum SubAut {
    Matrix(IntMatrix),
    ElementPerm(Vec<usize>),
}

impl SubAut {
    pub fn identity_for(sub: &GroupSpec) -> Result<SubAut> {
        match sub.abelian_rank() {
            Some(k) => Ok(SubAut::Matrix(IntMatrix::identity(k))),
            None => match &sub.kind {
                GroupKind::Finite(t) => Ok(SubAut::ElementPerm((0..t.order()).collect())),
                _ => Err(Error::UnsupportedBase(
                    "extension subgroups must be free abelian or finite".into(),
                )),
            },
        }
    }

    pub fn apply(&self, sub: &GroupSpec, x: &Element) -> Result<Element> {
        match self {
            SubAut::Matrix(m) => {
                let v = sub.flatten(x)?;
                let w = m.mul_vec(&v)?;
                sub.unflatten(&w)
            }
            SubAut::ElementPerm(p) => match x {
                Element::Finite(i) => Ok(Element::Finite(p[*i])),
                _ => Err(Error::InvalidGroup("permutation on non-finite element".into())),
            },
        }
    }

    pub fn compose(&self, other: &SubAut) -> Result<SubAut> {
        match (self, other) {
            (SubAut::Matrix(a), SubAut::Matrix(b)) => Ok(SubAut::Matrix(b.mul(a)?)),
            (SubAut::ElementPerm(p), SubAut::ElementPerm(q)) => {
                Ok(SubAut::ElementPerm(p.iter().map(|&i| q[i]).collect()))
            }
            _ => Err(Error::InvalidGroup("mixed automorphism kinds".into())),
        }
    }
}

/// Transversal data for a finite extension of a free abelian or finite
/// group: per-transversal conjugation automorphisms and the cocycle
/// t·t' = h·t''. Index 0 is the subgroup coset with representative 1.
#[derive(Clone, Debug)]
pub struct ExtensionData {
    pub sub: GroupSpec,
    pub letters: Vec<Symbol>,
    pub auts: Vec<SubAut>,
    pub cocycle: Vec<Vec<(Element, usize)>>,
}

#[derive(Clone, Debug)]
pub enum GroupKind {
    Finite(FiniteTable),
    FreeAbelian { rank: usize },
    DirectProduct(Vec<GroupSpec>),
    WreathFinite {
        base: Box<GroupSpec>,
        top: FiniteTable,
        /// Per top element: a permutation σ of the coordinates, composing
        /// as σ_{kk'} = σ_{k'} ∘ σ_k.
        action: Vec<Vec<usize>>,
    },
    FiniteExtension(Box<ExtensionData>),
}

/// A concrete group together with its generating alphabet.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub kind: GroupKind,
    /// Positive generator letters with their values; inverse letters are
    /// the paired symbols.
    gens: Vec<(Symbol, Element)>,
}

/// A group element; the variant mirrors the group kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Finite(usize),
    Vector(IntVector),
    Tuple(Vec<Element>),
    Wreath { base: Vec<Element>, top: usize },
    Ext { h: Box<Element>, t: usize },
}

/// Deterministic generator letters for abelian coordinates.
fn abelian_letter_names(rank: usize, offset: usize) -> Vec<String> {
    const SEQ: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
    (0..rank)
        .map(|i| {
            let idx = offset + i;
            if idx < SEQ.len() {
                SEQ[idx].to_string()
            } else {
                format!("a{idx}")
            }
        })
        .collect()
}

impl GroupSpec {
    pub fn free_abelian(rank: usize) -> GroupSpec {
        Self::free_abelian_named(rank, 0)
    }

    fn free_abelian_named(rank: usize, offset: usize) -> GroupSpec {
        let gens = abelian_letter_names(rank, offset)
            .into_iter()
            .enumerate()
            .map(|(i, name)| {
                let (pos, _neg) = Symbol::pair(&name);
                let mut v = IntVector::zeros(rank);
                v.0[i] = BigInt::from(1);
                (pos, Element::Vector(v))
            })
            .collect();
        GroupSpec {
            kind: GroupKind::FreeAbelian { rank },
            gens,
        }
    }

    pub fn finite(table: FiniteTable) -> GroupSpec {
        let gens = table
            .generators
            .iter()
            .map(|&g| {
                let (pos, _neg) = Symbol::pair(&table.names[g]);
                (pos, Element::Finite(g))
            })
            .collect();
        GroupSpec {
            kind: GroupKind::Finite(table),
            gens,
        }
    }

    /// Direct product; abelian factors are renamed to consecutive letters
    /// so the union of the generating sets is disjoint.
    pub fn direct_product(factors: Vec<GroupSpec>) -> Result<GroupSpec> {
        let mut abelian_seen = 0usize;
        let mut renamed: Vec<GroupSpec> = Vec::new();
        for f in factors {
            let f2 = match &f.kind {
                GroupKind::FreeAbelian { rank } => {
                    let g = Self::free_abelian_named(*rank, abelian_seen);
                    abelian_seen += rank;
                    g
                }
                _ => f,
            };
            renamed.push(f2);
        }
        let mut gens: Vec<(Symbol, Element)> = Vec::new();
        for (fi, f) in renamed.iter().enumerate() {
            for (letter, value) in &f.gens {
                if gens.iter().any(|(l, _)| l == letter) {
                    return Err(Error::InvalidGroup(format!(
                        "duplicate generator letter {letter} across product factors"
                    )));
                }
                let tuple = renamed
                    .iter()
                    .enumerate()
                    .map(|(fj, g)| {
                        if fj == fi {
                            value.clone()
                        } else {
                            g.identity()
                        }
                    })
                    .collect();
                gens.push((*letter, Element::Tuple(tuple)));
            }
        }
        Ok(GroupSpec {
            kind: GroupKind::DirectProduct(renamed),
            gens,
        })
    }

    /// Wreath product base ≀ top with the given action of top elements on
    /// the coordinates 0..m-1.
    pub fn wreath(base: GroupSpec, top: FiniteTable, action: Vec<Vec<usize>>) -> Result<GroupSpec> {
        let m = action.first().map_or(0, Vec::len);
        if action.len() != top.order() || m == 0 {
            return Err(Error::InvalidGroup(
                "wreath action needs one permutation per top element".into(),
            ));
        }
        for p in &action {
            let mut seen = vec![false; m];
            for &i in p {
                if i >= m || seen[i] {
                    return Err(Error::InvalidGroup("action entry is not a permutation".into()));
                }
                seen[i] = true;
            }
        }
        if action[top.identity] != (0..m).collect::<Vec<_>>() {
            return Err(Error::InvalidGroup(
                "identity of the top group must act trivially".into(),
            ));
        }
        for k in 0..top.order() {
            for k2 in 0..top.order() {
                let kk2 = top.table[k][k2];
                for i in 0..m {
                    if action[kk2][i] != action[k2][action[k][i]] {
                        return Err(Error::InvalidGroup(
                            "wreath action does not compose correctly".into(),
                        ));
                    }
                }
            }
        }
        // Generators: coordinate copies of the base generators plus a
        // letter per non-identity top element.
        let base_rank = base.flat_rank();
        let mut gens: Vec<(Symbol, Element)> = Vec::new();
        for coord in 0..m {
            let offset = coord * base_rank.unwrap_or(0);
            let names: Vec<String> = match base_rank {
                Some(r) => abelian_letter_names(r, offset),
                None => base
                    .gens
                    .iter()
                    .map(|(l, _)| format!("{}_{}", l.display(), coord))
                    .collect(),
            };
            for (gi, name) in names.iter().enumerate() {
                let (pos, _neg) = Symbol::pair(name);
                let mut tuple: Vec<Element> = (0..m).map(|_| base.identity()).collect();
                tuple[coord] = base.gens[gi].1.clone();
                gens.push((
                    pos,
                    Element::Wreath {
                        base: tuple,
                        top: top.identity,
                    },
                ));
            }
        }
        for (ti, name) in top.names.iter().enumerate() {
            if ti == top.identity {
                continue;
            }
            let (pos, _neg) = Symbol::pair(name);
            gens.push((
                pos,
                Element::Wreath {
                    base: (0..m).map(|_| base.identity()).collect(),
                    top: ti,
                },
            ));
        }
        Ok(GroupSpec {
            kind: GroupKind::WreathFinite {
                base: Box::new(base),
                top,
                action,
            },
            gens,
        })
    }

    /// Finite extension from transversal data: per non-identity
    /// transversal index a letter name, the conjugation action ψ_t on the
    /// subgroup, and the cocycle t·t' = h·t''.
    pub fn finite_extension(data: ExtensionData) -> Result<GroupSpec> {
        let t_count = data.letters.len();
        if data.auts.len() != t_count || data.cocycle.len() != t_count {
            return Err(Error::InvalidGroup(
                "extension needs one automorphism and one cocycle row per transversal element"
                    .into(),
            ));
        }
        for row in &data.cocycle {
            if row.len() != t_count {
                return Err(Error::InvalidGroup("cocycle must be square".into()));
            }
        }
        // Index 0 is the subgroup itself: trivial action and cocycle.
        match &data.auts[0] {
            SubAut::Matrix(m) if m.is_identity() => {}
            SubAut::ElementPerm(p) if p.iter().enumerate().all(|(i, &j)| i == j) => {}
            _ => {
                return Err(Error::InvalidGroup(
                    "transversal index 0 must act trivially".into(),
                ))
            }
        }
        for t in 0..t_count {
            let (h0, tt0) = &data.cocycle[0][t];
            let (h1, tt1) = &data.cocycle[t][0];
            if *tt0 != t || *tt1 != t || *h0 != data.sub.identity() || *h1 != data.sub.identity()
            {
                return Err(Error::InvalidGroup(
                    "cocycle against index 0 must be trivial".into(),
                ));
            }
        }
        let gens_sub: Vec<(Symbol, Element)> = data
            .sub
            .gens
            .iter()
            .map(|(l, v)| {
                (
                    *l,
                    Element::Ext {
                        h: Box::new(v.clone()),
                        t: 0,
                    },
                )
            })
            .collect();
        let mut gens = gens_sub;
        for (ti, letter) in data.letters.iter().enumerate() {
            if ti == 0 {
                continue;
            }
            gens.push((
                *letter,
                Element::Ext {
                    h: Box::new(data.sub.identity()),
                    t: ti,
                },
            ));
        }
        let spec = GroupSpec {
            kind: GroupKind::FiniteExtension(Box::new(data)),
            gens,
        };
        spec.validate_extension()?;
        Ok(spec)
    }

    fn validate_extension(&self) -> Result<()> {
        // Associativity spot-check over generators and transversal
        // letters; catches inconsistent action/cocycle data.
        let mut probes: Vec<Element> = self.gens.iter().map(|(_, v)| v.clone()).collect();
        probes.push(self.identity());
        for a in &probes {
            for b in &probes {
                for c in &probes {
                    let ab_c = self.mul(&self.mul(a, b)?, c)?;
                    let a_bc = self.mul(a, &self.mul(b, c)?)?;
                    if ab_c != a_bc {
                        return Err(Error::InvalidGroup(
                            "extension data is not associative".into(),
                        ));
                    }
                }
            }
        }
        for (_, g) in &self.gens {
            let inv = self.inv(g)?;
            if self.mul(g, &inv)? != self.identity() {
                return Err(Error::InvalidGroup("extension inverse failed".into()));
            }
        }
        Ok(())
    }

    pub fn gens(&self) -> &[(Symbol, Element)] {
        &self.gens
    }

    /// The generating alphabet Σ± (positive letters and their inverses).
    pub fn alphabet(&self) -> Alphabet {
        let mut a = Alphabet::new();
        for (l, _) in &self.gens {
            a.insert(*l);
            if let Some(inv) = l.inverse() {
                a.insert(inv);
            }
        }
        a
    }

    /// Positive generator letters only.
    pub fn positive_letters(&self) -> Vec<Symbol> {
        self.gens.iter().map(|(l, _)| *l).collect()
    }

    /// Rank when the group is free abelian (possibly as a product of free
    /// abelian factors); None otherwise.
    pub fn abelian_rank(&self) -> Option<usize> {
        match &self.kind {
            GroupKind::FreeAbelian { rank } => Some(*rank),
            GroupKind::DirectProduct(fs) => {
                fs.iter().map(|f| f.abelian_rank()).sum::<Option<usize>>()
            }
            _ => None,
        }
    }

    /// Like [`abelian_rank`](Self::abelian_rank) but used for wreath
    /// coordinate naming.
    fn flat_rank(&self) -> Option<usize> {
        self.abelian_rank()
    }

    /// Flatten an element of an (iterated product of) free abelian
    /// group(s) into one coordinate vector.
    pub fn flatten(&self, x: &Element) -> Result<IntVector> {
        match (&self.kind, x) {
            (GroupKind::FreeAbelian { rank }, Element::Vector(v)) => {
                if v.dim() != *rank {
                    return Err(Error::DimensionMismatch("vector of wrong rank".into()));
                }
                Ok(v.clone())
            }
            (GroupKind::DirectProduct(fs), Element::Tuple(xs)) => {
                let mut out = Vec::new();
                for (f, e) in fs.iter().zip(xs) {
                    out.extend(f.flatten(e)?.0);
                }
                Ok(IntVector(out))
            }
            _ => Err(Error::UnsupportedBase(
                "flattening requires a free abelian (product) group".into(),
            )),
        }
    }

    pub fn unflatten(&self, v: &IntVector) -> Result<Element> {
        match &self.kind {
            GroupKind::FreeAbelian { rank } => {
                if v.dim() != *rank {
                    return Err(Error::DimensionMismatch("vector of wrong rank".into()));
                }
                Ok(Element::Vector(v.clone()))
            }
            GroupKind::DirectProduct(fs) => {
                let mut parts = Vec::new();
                let mut at = 0;
                for f in fs {
                    let r = f.abelian_rank().ok_or_else(|| {
                        Error::UnsupportedBase("unflatten needs abelian factors".into())
                    })?;
                    parts.push(f.unflatten(&v.project(at..at + r))?);
                    at += r;
                }
                Ok(Element::Tuple(parts))
            }
            _ => Err(Error::UnsupportedBase(
                "unflattening requires a free abelian (product) group".into(),
            )),
        }
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            GroupKind::Finite(t) => Element::Finite(t.identity),
            GroupKind::FreeAbelian { rank } => Element::Vector(IntVector::zeros(*rank)),
            GroupKind::DirectProduct(fs) => {
                Element::Tuple(fs.iter().map(|f| f.identity()).collect())
            }
            GroupKind::WreathFinite { base, top, action } => Element::Wreath {
                base: (0..action[0].len()).map(|_| base.identity()).collect(),
                top: top.identity,
            },
            GroupKind::FiniteExtension(d) => Element::Ext {
                h: Box::new(d.sub.identity()),
                t: 0,
            },
        }
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Result<Element> {
        match (&self.kind, x, y) {
            (GroupKind::Finite(t), Element::Finite(a), Element::Finite(b)) => {
                Ok(Element::Finite(t.table[*a][*b]))
            }
            (GroupKind::FreeAbelian { .. }, Element::Vector(a), Element::Vector(b)) => {
                Ok(Element::Vector(a.add(b)))
            }
            (GroupKind::DirectProduct(fs), Element::Tuple(a), Element::Tuple(b)) => {
                let parts = fs
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(f, (u, v))| f.mul(u, v))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Element::Tuple(parts))
            }
            (
                GroupKind::WreathFinite { base, top, action },
                Element::Wreath { base: f, top: k },
                Element::Wreath { base: f2, top: k2 },
            ) => {
                let sigma = &action[*k];
                let parts = (0..f.len())
                    .map(|i| base.mul(&f[i], &f2[sigma[i]]))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Element::Wreath {
                    base: parts,
                    top: top.table[*k][*k2],
                })
            }
            (
                GroupKind::FiniteExtension(d),
                Element::Ext { h, t },
                Element::Ext { h: h2, t: t2 },
            ) => {
                // h·t·h'·t' = h·ψ_t(h')·(t·t') = h·ψ_t(h')·coc_h·coc_t.
                let twisted = d.auts[*t].apply(&d.sub, h2)?;
                let (ch, ct) = &d.cocycle[*t][*t2];
                let hh = d.sub.mul(&d.sub.mul(h, &twisted)?, ch)?;
                Ok(Element::Ext {
                    h: Box::new(hh),
                    t: *ct,
                })
            }
            _ => Err(Error::InvalidGroup("element does not belong to this group".into())),
        }
    }

    pub fn inv(&self, x: &Element) -> Result<Element> {
        match (&self.kind, x) {
            (GroupKind::Finite(t), Element::Finite(a)) => Ok(Element::Finite(t.inverse[*a])),
            (GroupKind::FreeAbelian { .. }, Element::Vector(a)) => Ok(Element::Vector(a.neg())),
            (GroupKind::DirectProduct(fs), Element::Tuple(a)) => Ok(Element::Tuple(
                fs.iter()
                    .zip(a)
                    .map(|(f, u)| f.inv(u))
                    .collect::<Result<Vec<_>>>()?,
            )),
            (
                GroupKind::WreathFinite { base, top, action },
                Element::Wreath { base: f, top: k },
            ) => {
                let kinv = top.inverse[*k];
                let sigma_inv = &action[kinv];
                let parts = (0..f.len())
                    .map(|i| base.inv(&f[sigma_inv[i]]))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Element::Wreath {
                    base: parts,
                    top: kinv,
                })
            }
            (GroupKind::FiniteExtension(d), Element::Ext { h, t }) => {
                // Find t' with coc_t(t,t') = 0, then solve for the h part.
                let t2 = (0..d.letters.len())
                    .find(|&t2| d.cocycle[*t][t2].1 == 0)
                    .ok_or_else(|| Error::InvalidGroup("cocycle has no inverse column".into()))?;
                // (h,t)(h',t2) = (h·ψ_t(h')·c_h, 0) = 1 ⟹ ψ_t(h') = h⁻¹·c_h⁻¹.
                let ch = &d.cocycle[*t][t2].0;
                let target = d
                    .sub
                    .mul(&d.sub.inv(h)?, &d.sub.inv(ch)?)?;
                let h2 = apply_inverse_aut(&d.auts[*t], &d.sub, &target)?;
                Ok(Element::Ext {
                    h: Box::new(h2),
                    t: t2,
                })
            }
            _ => Err(Error::InvalidGroup("element does not belong to this group".into())),
        }
    }

    /// The natural homomorphism from words over Σ± to the group.
    pub fn eval_word(&self, w: &Word) -> Result<Element> {
        let mut acc = self.identity();
        for &l in w.letters() {
            let v = self.letter_value(l)?;
            acc = self.mul(&acc, &v)?;
        }
        Ok(acc)
    }

    fn letter_value(&self, l: Symbol) -> Result<Element> {
        for (g, v) in &self.gens {
            if *g == l {
                return Ok(v.clone());
            }
            if g.inverse() == Some(l) {
                return self.inv(v);
            }
        }
        Err(Error::DomainMismatch(format!(
            "letter {l} is not a generator of this group"
        )))
    }

    /// The normal form: standard form per coordinate for free abelian
    /// groups, shortlex geodesics for finite tables, concatenation for
    /// products, base form then transversal letter for wreath products and
    /// extensions (the letter is suppressed on the subgroup itself).
    pub fn normal_form(&self, x: &Element) -> Result<Word> {
        match (&self.kind, x) {
            (GroupKind::Finite(_), Element::Finite(_)) => {
                let table_nf = self.finite_shortlex()?;
                let Element::Finite(i) = x else { unreachable!() };
                Ok(table_nf[*i].clone())
            }
            (GroupKind::FreeAbelian { .. }, Element::Vector(v)) => {
                let mut w = Word::empty();
                for (i, (g, _)) in self.gens.iter().enumerate() {
                    let e = &v.0[i];
                    let letter = if e < &BigInt::zero() {
                        g.inverse().expect("abelian generators are paired")
                    } else {
                        *g
                    };
                    let count = usize::try_from(num_traits::Signed::abs(e))
                        .map_err(|_| Error::CapExceeded("exponent too large".into()))?;
                    for _ in 0..count {
                        w.push(letter);
                    }
                }
                Ok(w)
            }
            (GroupKind::DirectProduct(fs), Element::Tuple(xs)) => {
                let mut w = Word::empty();
                for (f, e) in fs.iter().zip(xs) {
                    w = w.concat(&f.normal_form(e)?);
                }
                Ok(w)
            }
            (GroupKind::WreathFinite { base, top, .. }, Element::Wreath { base: f, top: k }) => {
                let mut w = Word::empty();
                for (coord, e) in f.iter().enumerate() {
                    w = w.concat(&rename_to_coord(self, base, coord, &base.normal_form(e)?)?);
                }
                if *k != top.identity {
                    w.push(self.top_letter(*k)?);
                }
                Ok(w)
            }
            (GroupKind::FiniteExtension(d), Element::Ext { h, t }) => {
                let mut w = d.sub.normal_form(h)?;
                if *t != 0 {
                    w.push(d.letters[*t]);
                }
                Ok(w)
            }
            _ => Err(Error::InvalidGroup("element does not belong to this group".into())),
        }
    }

    fn top_letter(&self, k: usize) -> Result<Symbol> {
        let GroupKind::WreathFinite { top, .. } = &self.kind else {
            return Err(Error::InvalidGroup("not a wreath product".into()));
        };
        Ok(Symbol::new(&top.names[k]))
    }

    /// Shortlex geodesic words for every element of a finite table group.
    fn finite_shortlex(&self) -> Result<Vec<Word>> {
        let GroupKind::Finite(t) = &self.kind else {
            return Err(Error::InvalidGroup("not a finite table group".into()));
        };
        let mut nf: Vec<Option<Word>> = vec![None; t.order()];
        nf[t.identity] = Some(Word::empty());
        let mut queue = VecDeque::from([t.identity]);
        // Letters in declaration order, positive before inverse.
        let letters: Vec<(Symbol, usize)> = t
            .generators
            .iter()
            .flat_map(|&g| {
                let l = Symbol::new(&t.names[g]);
                [(l, g), (l.inverse().unwrap(), t.inverse[g])]
            })
            .collect();
        while let Some(x) = queue.pop_front() {
            let base = nf[x].clone().unwrap();
            for (l, g) in &letters {
                let y = t.table[x][*g];
                if nf[y].is_none() {
                    let mut w = base.clone();
                    w.push(*l);
                    nf[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        Ok(nf.into_iter().map(|w| w.unwrap()).collect())
    }

    /// Geodesic ball of the Cayley graph: element → word length, up to
    /// `radius`.
    pub fn ball(&self, radius: usize) -> Result<HashMap<Element, usize>> {
        let mut dist: HashMap<Element, usize> = HashMap::new();
        dist.insert(self.identity(), 0);
        let mut queue = VecDeque::from([self.identity()]);
        let letters: Vec<Element> = self
            .gens
            .iter()
            .map(|(_, v)| Ok(v.clone()))
            .chain(self.gens.iter().map(|(_, v)| self.inv(v)))
            .collect::<Result<Vec<_>>>()?;
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            if d == radius {
                continue;
            }
            for l in &letters {
                let y = self.mul(&x, l)?;
                if !dist.contains_key(&y) {
                    if dist.len() >= BALL_CAP {
                        return Err(Error::CapExceeded("ball enumeration overflow".into()));
                    }
                    dist.insert(y.clone(), d + 1);
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// A regular witness for the image of the normal form.
    pub fn nf_witness(&self) -> Result<Nfa<Symbol>> {
        match &self.kind {
            GroupKind::FreeAbelian { .. } => {
                // Blocks a₁^± then a₂^± …; each block a single-sign run.
                let k = self.gens.len();
                // States: hub_j = j for 0..=k; pos_j = k+1+2j; neg_j = k+2+2j.
                let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = Vec::new();
                for (j, (g, _)) in self.gens.iter().enumerate() {
                    let hub = j as StateId;
                    let next = (j + 1) as StateId;
                    let pos = (k + 1 + 2 * j) as StateId;
                    let neg = (k + 2 + 2 * j) as StateId;
                    let ginv = g.inverse().unwrap();
                    edges.push((hub, None, next));
                    edges.push((hub, Some(*g), pos));
                    edges.push((pos, Some(*g), pos));
                    edges.push((pos, None, next));
                    edges.push((hub, Some(ginv), neg));
                    edges.push((neg, Some(ginv), neg));
                    edges.push((neg, None, next));
                }
                Nfa::new((3 * k + 1) as u32, edges, 0, [k as StateId])
            }
            GroupKind::Finite(t) => {
                let words = self.finite_shortlex()?;
                let mut acc = Nfa::empty_language();
                for w in words.iter().take(t.order()) {
                    acc = acc.union(&Nfa::single_word(w.letters()));
                }
                Ok(acc.trim())
            }
            GroupKind::DirectProduct(fs) => {
                let mut acc = Nfa::epsilon();
                for f in fs {
                    acc = acc.concat(&f.nf_witness()?);
                }
                Ok(acc)
            }
            GroupKind::WreathFinite { base, top, action } => {
                let m = action[0].len();
                let mut acc = Nfa::epsilon();
                for coord in 0..m {
                    let w = base.nf_witness()?;
                    let renamed = w.map_labels(|l| {
                        Some(
                            rename_to_coord(self, base, coord, &Word::single(*l))
                                .expect("coordinate renaming")
                                .letters()[0],
                        )
                    });
                    acc = acc.concat(&renamed);
                }
                // Optional top letter.
                let n0 = acc.state_count();
                let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = acc
                    .edges()
                    .iter()
                    .map(|(p, l, q)| (*p, *l, *q))
                    .collect();
                for &q in acc.accepts_states() {
                    edges.push((q, None, n0));
                    for (k, name) in top.names.iter().enumerate() {
                        if k != top.identity {
                            edges.push((q, Some(Symbol::new(name)), n0));
                        }
                    }
                }
                Nfa::new(n0 + 1, edges, acc.start(), [n0])
            }
            GroupKind::FiniteExtension(d) => {
                let acc = d.sub.nf_witness()?;
                let n0 = acc.state_count();
                let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = acc
                    .edges()
                    .iter()
                    .map(|(p, l, q)| (*p, *l, *q))
                    .collect();
                for &q in acc.accepts_states() {
                    edges.push((q, None, n0));
                    for (ti, letter) in d.letters.iter().enumerate() {
                        if ti != 0 {
                            edges.push((q, Some(*letter), n0));
                        }
                    }
                }
                Nfa::new(n0 + 1, edges, acc.start(), [n0])
            }
        }
    }
}

/// Rename a word over the base group's generators into the coordinate copy
/// used by the wreath product's generating set.
fn rename_to_coord(
    wreath: &GroupSpec,
    base: &GroupSpec,
    coord: usize,
    w: &Word,
) -> Result<Word> {
    let GroupKind::WreathFinite { action, .. } = &wreath.kind else {
        return Err(Error::InvalidGroup("not a wreath product".into()));
    };
    let _ = action;
    let base_rank = base.flat_rank().unwrap_or(base.gens.len());
    let mut out = Vec::with_capacity(w.len());
    for &l in w.letters() {
        // Find the base generator index of l (or its inverse).
        let mut mapped = None;
        for (gi, (g, _)) in base.gens.iter().enumerate() {
            let target_idx = coord * base_rank + gi;
            let (target, _) = wreath.gens[target_idx];
            if l == *g {
                mapped = Some(target);
            } else if Some(l) == g.inverse() {
                mapped = Some(target.inverse().unwrap());
            }
            if mapped.is_some() {
                break;
            }
        }
        out.push(mapped.ok_or_else(|| {
            Error::DomainMismatch(format!("letter {l} is not a base generator"))
        })?);
    }
    Ok(Word::from_letters(out))
}

fn apply_inverse_aut(aut: &SubAut, sub: &GroupSpec, target: &Element) -> Result<Element> {
    match aut {
        SubAut::Matrix(m) => {
            let v = sub.flatten(target)?;
            // Solve m·w = v exactly.
            let sol = solve_linear_system(m, &v)?
                .ok_or_else(|| Error::InvalidGroup("automorphism is not invertible".into()))?;
            if !sol.basis.is_empty() {
                return Err(Error::InvalidGroup("automorphism matrix is singular".into()));
            }
            sub.unflatten(&sol.particular)
        }
        SubAut::ElementPerm(p) => match target {
            Element::Finite(i) => {
                let j = p
                    .iter()
                    .position(|&x| x == *i)
                    .ok_or_else(|| Error::InvalidGroup("permutation not invertible".into()))?;
                Ok(Element::Finite(j))
            }
            _ => Err(Error::InvalidGroup("permutation on non-finite element".into())),
        },
    }
}

/// Empirical quasigeodesic check: the least λ with |gη| ≤ λ|g| + λ over
/// the ball of the given radius. A report, not a proof.
pub fn check_quasigeodesic_sampled(g: &GroupSpec, radius: usize) -> Result<usize> {
    let ball = g.ball(radius)?;
    let mut lambda = 1usize;
    for (x, d) in &ball {
        let nf_len = g.normal_form(x)?.len();
        // Smallest integer λ with nf_len ≤ λ·d + λ = λ(d+1).
        let need = nf_len.div_ceil(d + 1);
        lambda = lambda.max(need);
    }
    Ok(lambda)
}

/// Finite-index subgroups for which membership is decidable exactly.
#[derive(Clone, Debug)]
pub enum SubgroupDesc {
    /// A finite-index sublattice of a free abelian (product) group,
    /// spanned by the columns of the matrix.
    Lattice(IntMatrix),
    /// The canonical subgroup of a finite extension (t-part zero).
    ExtensionSub,
}

/// Schreier generators and the induced machinery for a finite-index
/// subgroup with a chosen right transversal (index 0 represents 1).
#[derive(Clone, Debug)]
pub struct SchreierData {
    pub group: GroupSpec,
    pub sub: SubgroupDesc,
    pub transversal: Vec<Element>,
    pub gens: Vec<SchreierGen>,
}

#[derive(Clone, Debug)]
pub struct SchreierGen {
    pub t: usize,
    pub x: Symbol,
    pub value: Element,
    pub letter: Symbol,
}

impl SchreierData {
    pub fn member(&self, x: &Element) -> Result<bool> {
        match (&self.sub, x) {
            (SubgroupDesc::Lattice(b), _) => {
                let v = self.group.flatten(x)?;
                Ok(solve_linear_system(b, &v)?.is_some())
            }
            (SubgroupDesc::ExtensionSub, Element::Ext { t, .. }) => Ok(*t == 0),
            _ => Err(Error::InvalidGroup("element does not belong to the group".into())),
        }
    }

    /// The coset representative index of g: the unique i with g·tᵢ⁻¹ ∈ H.
    pub fn bar(&self, g: &Element) -> Result<usize> {
        let mut found = None;
        for (i, t) in self.transversal.iter().enumerate() {
            let ti = self.group.inv(t)?;
            if self.member(&self.group.mul(g, &ti)?)? {
                if found.is_some() {
                    return Err(Error::InvalidGroup(
                        "transversal has two representatives of one coset".into(),
                    ));
                }
                found = Some(i);
            }
        }
        found.ok_or_else(|| Error::InvalidGroup("transversal misses a coset".into()))
    }

    pub fn schreier_letter(&self, t: usize, x: Symbol) -> Option<&SchreierGen> {
        self.gens.iter().find(|g| g.t == t && g.x == x)
    }

    /// The alphabet Z± of Schreier letters.
    pub fn alphabet(&self) -> Alphabet {
        let mut a = Alphabet::new();
        for g in &self.gens {
            a.insert(g.letter);
            if let Some(inv) = g.letter.inverse() {
                a.insert(inv);
            }
        }
        a
    }
}

/// Build the Schreier generating set Z = {t·x·(bar(t·x))⁻¹} for the
/// subgroup, dropping trivial generators. The transversal must contain
/// the identity at index 0.
pub fn schreier(
    group: &GroupSpec,
    sub: SubgroupDesc,
    transversal: Vec<Element>,
) -> Result<SchreierData> {
    if transversal.is_empty() || transversal[0] != group.identity() {
        return Err(Error::InvalidGroup(
            "transversal must start with the identity".into(),
        ));
    }
    let mut data = SchreierData {
        group: group.clone(),
        sub,
        transversal,
        gens: Vec::new(),
    };
    // Transversal sanity: representatives lie in pairwise distinct cosets
    // and index 0 is the subgroup.
    if !data.member(&data.transversal[0])? {
        return Err(Error::InvalidGroup("index 0 must represent the subgroup".into()));
    }
    for (i, t) in data.transversal.iter().enumerate() {
        let b = data.bar(t)?;
        if b != i {
            return Err(Error::InvalidGroup(
                "transversal entries must represent distinct cosets".into(),
            ));
        }
    }
    let mut gens = Vec::new();
    for (ti, t) in data.transversal.iter().enumerate() {
        for (x, xv) in group.gens() {
            let tx = group.mul(t, xv)?;
            let bi = data.bar(&tx)?;
            let value = group.mul(&tx, &group.inv(&data.transversal[bi])?)?;
            if value == group.identity() {
                continue;
            }
            let (letter, _) = Symbol::pair(&format!("z{}{}", ti, x.display()));
            gens.push(SchreierGen {
                t: ti,
                x: *x,
                value,
                letter,
            });
        }
    }
    data.gens = gens;
    // The inverse-set identity from the generating lemma:
    // Z⁻¹ = {t·x⁻¹·(bar(t·x⁻¹))⁻¹}.
    for (ti, t) in data.transversal.iter().enumerate() {
        for (x, xv) in group.gens() {
            let txi = group.mul(t, &group.inv(xv)?)?;
            let bi = data.bar(&txi)?;
            let value = group.mul(&txi, &group.inv(&data.transversal[bi])?)?;
            if value == group.identity() {
                continue;
            }
            let inv = group.inv(&value)?;
            if !data.gens.iter().any(|g| g.value == inv) {
                return Err(Error::InvalidGroup(format!(
                    "inverse-set identity fails at t{} {}",
                    ti, x
                )));
            }
        }
    }
    Ok(data)
}

/// The Schreier normal form ζ(h): factor the overgroup normal form of h
/// into Schreier letters, dropping trivial factors.
pub fn schreier_normal_form(
    d: &SchreierData,
    h: &Element,
) -> Result<Word> {
    if !d.member(h)? {
        return Err(Error::NotAMember(
            "Schreier normal form of a non-member".into(),
        ));
    }
    let w = d.group.normal_form(h)?;
    let mut out = Word::empty();
    let mut t = 0usize; // t₀ = 1
    for &a in w.letters() {
        // Positive or inverse generator letter?
        let mut handled = false;
        for (x, xv) in d.group.gens() {
            if a == *x {
                if let Some(g) = d.schreier_letter(t, *x) {
                    out.push(g.letter);
                }
                let ta = d.group.mul(&d.transversal[t], xv)?;
                t = d.bar(&ta)?;
                handled = true;
                break;
            }
            if Some(a) == x.inverse() {
                // t·x⁻¹·bar(t·x⁻¹)⁻¹ = (v·x·bar(v·x)⁻¹)⁻¹ with v = bar(t·x⁻¹).
                let txi = d.group.mul(&d.transversal[t], &d.group.inv(xv)?)?;
                let v = d.bar(&txi)?;
                if let Some(g) = d.schreier_letter(v, *x) {
                    out.push(g.letter.inverse().expect("schreier letters are paired"));
                }
                t = v;
                handled = true;
                break;
            }
        }
        if !handled {
            return Err(Error::DomainMismatch(format!(
                "letter {a} is not a generator"
            )));
        }
    }
    if t != 0 {
        return Err(Error::NotAMember(
            "normal form does not return to the subgroup".into(),
        ));
    }
    Ok(out)
}

/// Evaluate a word over Z± in the subgroup (as overgroup elements).
pub fn eval_schreier_word(d: &SchreierData, w: &Word) -> Result<Element> {
    let mut acc = d.group.identity();
    for &l in w.letters() {
        let mut val = None;
        for g in &d.gens {
            if g.letter == l {
                val = Some(g.value.clone());
                break;
            }
            if g.letter.inverse() == Some(l) {
                val = Some(d.group.inv(&g.value)?);
                break;
            }
        }
        let v = val.ok_or_else(|| {
            Error::DomainMismatch(format!("letter {l} is not a Schreier letter"))
        })?;
        acc = d.group.mul(&acc, &v)?;
    }
    Ok(acc)
}

/// An automaton accepting exactly im ζ, built by annotating the
/// normal-form witness with transversal states: reading a generator letter
/// at transversal state t emits the Schreier letter of (t, a) (or nothing
/// when it is trivial) and moves to bar(t·a).
pub fn schreier_nf_automaton(d: &SchreierData, witness: &Nfa<Symbol>) -> Result<Nfa<Symbol>> {
    let tn = d.transversal.len() as u32;
    let pair = |q: StateId, t: usize| q * tn + t as u32;
    let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = Vec::new();
    for (p, l, q) in witness.edges() {
        match l {
            None => {
                for t in 0..d.transversal.len() {
                    edges.push((pair(*p, t), None, pair(*q, t)));
                }
            }
            Some(a) => {
                for t in 0..d.transversal.len() {
                    // Value and target coset of reading `a` at state t.
                    let (label, t2) = schreier_step(d, t, *a)?;
                    edges.push((pair(*p, t), label, pair(*q, t2)));
                }
            }
        }
    }
    let accepts: Vec<StateId> = witness
        .accepts_states()
        .iter()
        .map(|&q| pair(q, 0))
        .collect();
    Ok(Nfa::new(
        witness.state_count() * tn,
        edges,
        pair(witness.start(), 0),
        accepts,
    )?
    .trim())
}

/// The Schreier letter (or ε when trivial) and next transversal index for
/// reading one generator letter at transversal state t.
fn schreier_step(d: &SchreierData, t: usize, a: Symbol) -> Result<(Option<Symbol>, usize)> {
    for (x, xv) in d.group.gens() {
        if a == *x {
            let ta = d.group.mul(&d.transversal[t], xv)?;
            let t2 = d.bar(&ta)?;
            let label = d.schreier_letter(t, *x).map(|g| g.letter);
            return Ok((label, t2));
        }
        if Some(a) == x.inverse() {
            let txi = d.group.mul(&d.transversal[t], &d.group.inv(xv)?)?;
            let v = d.bar(&txi)?;
            let label = d
                .schreier_letter(v, *x)
                .map(|g| g.letter.inverse().expect("paired"));
            return Ok((label, v));
        }
    }
    Err(Error::DomainMismatch(format!("letter {a} is not a generator")))
}

/// Serializable description of a group (the JSON schema).
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroupDoc {
    Finite {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<usize>>,
    },
    FreeAbelian {
        rank: usize,
    },
    DirectProduct {
        factors: Vec<GroupDoc>,
    },
    Wreath {
        base: Box<GroupDoc>,
        top: Box<GroupDoc>,
        action: Vec<Vec<usize>>,
    },
    Extension {
        sub: Box<GroupDoc>,
        transversal: Vec<String>,
        /// Per non-identity transversal name: generator letter → word.
        action: BTreeMap<String, BTreeMap<String, String>>,
        /// "t,t'" → [subgroup word, transversal name].
        cocycle: BTreeMap<String, (String, String)>,
    },
}

impl GroupDoc {
    pub fn build(&self) -> Result<GroupSpec> {
        match self {
            GroupDoc::Finite {
                elements,
                table,
                generators,
            } => Ok(GroupSpec::finite(FiniteTable::new(
                elements.clone(),
                table.clone(),
                generators.clone(),
            )?)),
            GroupDoc::FreeAbelian { rank } => Ok(GroupSpec::free_abelian(*rank)),
            GroupDoc::DirectProduct { factors } => GroupSpec::direct_product(
                factors.iter().map(|f| f.build()).collect::<Result<Vec<_>>>()?,
            ),
            GroupDoc::Wreath { base, top, action } => {
                let base = base.build()?;
                let GroupDoc::Finite {
                    elements,
                    table,
                    generators,
                } = top.as_ref()
                else {
                    return Err(Error::InvalidGroup("wreath top must be finite".into()));
                };
                let top =
                    FiniteTable::new(elements.clone(), table.clone(), generators.clone())?;
                GroupSpec::wreath(base, top, action.clone())
            }
            GroupDoc::Extension {
                sub,
                transversal,
                action,
                cocycle,
            } => {
                let sub = sub.build()?;
                build_extension(sub, transversal, action, cocycle)
            }
        }
    }
}

fn build_extension(
    sub: GroupSpec,
    transversal: &[String],
    action: &BTreeMap<String, BTreeMap<String, String>>,
    cocycle: &BTreeMap<String, (String, String)>,
) -> Result<GroupSpec> {
    let tn = transversal.len();
    if tn == 0 {
        return Err(Error::InvalidGroup("empty transversal".into()));
    }
    let letters: Vec<Symbol> = transversal
        .iter()
        .map(|n| {
            let (pos, _neg) = Symbol::pair(n);
            pos
        })
        .collect();
    let t_index = |name: &str| -> Result<usize> {
        transversal
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidGroup(format!("unknown transversal element {name}")))
    };
    // Conjugation automorphisms, tabulated on the subgroup generators and
    // converted to matrices or element permutations.
    let mut auts = Vec::with_capacity(tn);
    for (ti, tname) in transversal.iter().enumerate() {
        if ti == 0 {
            auts.push(SubAut::identity_for(&sub)?);
            continue;
        }
        let word_of = |gen_letter: Symbol| -> Result<Word> {
            let table = action.get(tname).ok_or_else(|| {
                Error::InvalidGroup(format!("missing action for {tname}"))
            })?;
            match table.get(&gen_letter.display()) {
                Some(w) => Ok(Word::parse(w)),
                None => Ok(Word::single(gen_letter)),
            }
        };
        match sub.abelian_rank() {
            Some(k) => {
                let mut m = IntMatrix::zeros(k, k);
                for (j, (g, _)) in sub.gens().iter().enumerate() {
                    let img = sub.eval_word(&word_of(*g)?)?;
                    let col = sub.flatten(&img)?;
                    for i in 0..k {
                        m[(i, j)] = col.0[i].clone();
                    }
                }
                auts.push(SubAut::Matrix(m));
            }
            None => {
                let GroupKind::Finite(t) = &sub.kind else {
                    return Err(Error::UnsupportedBase(
                        "extension subgroups must be free abelian or finite".into(),
                    ));
                };
                // Permutation induced on elements by mapping generators.
                let mut perm = vec![usize::MAX; t.order()];
                let spec_sub = &sub;
                for i in 0..t.order() {
                    let nf = spec_sub.normal_form(&Element::Finite(i))?;
                    let mut img_word = Word::empty();
                    for &l in nf.letters() {
                        let base = if let Some(inv) = l.inverse() {
                            let positive = spec_sub
                                .gens()
                                .iter()
                                .find(|(g, _)| *g == l || inv == *g)
                                .map(|(g, _)| *g);
                            positive
                        } else {
                            None
                        };
                        let _ = base;
                        // Map positive letters through the action, inverse
                        // letters through the inverted image.
                        let mut done = false;
                        for (g, _) in spec_sub.gens() {
                            if l == *g {
                                img_word = img_word.concat(&word_of(*g)?);
                                done = true;
                                break;
                            }
                            if Some(l) == g.inverse() {
                                let w = word_of(*g)?;
                                let inv_elt = spec_sub.inv(&spec_sub.eval_word(&w)?)?;
                                img_word = img_word.concat(&spec_sub.normal_form(&inv_elt)?);
                                done = true;
                                break;
                            }
                        }
                        if !done {
                            return Err(Error::DomainMismatch(format!(
                                "letter {l} is not a subgroup generator"
                            )));
                        }
                    }
                    let Element::Finite(j) = spec_sub.eval_word(&img_word)? else {
                        unreachable!()
                    };
                    perm[i] = j;
                }
                auts.push(SubAut::ElementPerm(perm));
            }
        }
    }
    // Cocycle rows.
    let mut coc = vec![vec![(sub.identity(), 0usize); tn]; tn];
    for (i, coc_row) in coc.iter_mut().enumerate() {
        for (j, slot) in coc_row.iter_mut().enumerate() {
            if i == 0 {
                *slot = (sub.identity(), j);
                continue;
            }
            if j == 0 {
                *slot = (sub.identity(), i);
                continue;
            }
            let key = format!("{},{}", transversal[i], transversal[j]);
            let (hword, tname) = cocycle.get(&key).ok_or_else(|| {
                Error::InvalidGroup(format!("missing cocycle entry for {key}"))
            })?;
            *slot = (sub.eval_word(&Word::parse(hword))?, t_index(tname)?);
        }
    }
    GroupSpec::finite_extension(ExtensionData {
        sub,
        letters,
        auts,
        cocycle: coc,
    })
}

/// The infinite dihedral group as ℤ ⋊ C₂: transversal {1, s} with s
/// inverting the generator.
pub fn infinite_dihedral() -> Result<GroupSpec> {
    let sub = GroupSpec::free_abelian(1);
    let (s, _) = Symbol::pair("s");
    let letters = vec![
        {
            let (one, _) = Symbol::pair("1t");
            one
        },
        s,
    ];
    GroupSpec::finite_extension(ExtensionData {
        sub: sub.clone(),
        letters,
        auts: vec![
            SubAut::Matrix(IntMatrix::identity(1)),
            SubAut::Matrix(IntMatrix::from_rows_i64(&[&[-1]])),
        ],
        cocycle: vec![
            vec![(sub.identity(), 0), (sub.identity(), 1)],
            vec![(sub.identity(), 1), (sub.identity(), 0)],
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2() -> GroupSpec {
        GroupSpec::free_abelian(2)
    }

    fn wreath_z_c2() -> GroupSpec {
        GroupSpec::wreath(
            GroupSpec::free_abelian(1),
            FiniteTable::cyclic(2),
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn eval_in_z2() {
        let g = z2();
        let x = g.eval_word(&Word::parse("a b a^-1")).unwrap();
        assert_eq!(x, Element::Vector(IntVector::from_i64(&[0, 1])));
    }

    #[test]
    fn eval_in_c2() {
        let g = GroupSpec::finite(FiniteTable::cyclic(2));
        let x = g.eval_word(&Word::parse("s s")).unwrap();
        assert_eq!(x, g.identity());
    }

    #[test]
    fn wreath_swap_then_base() {
        // Top swap then a in coordinate 1 lands a in the swapped slot.
        let g = wreath_z_c2();
        let x = g.eval_word(&Word::parse("s a")).unwrap();
        let Element::Wreath { base, top } = &x else { panic!() };
        assert_eq!(*top, 1);
        assert_eq!(base[0], Element::Vector(IntVector::zeros(1)));
        assert_eq!(base[1], Element::Vector(IntVector::from_i64(&[1])));
    }

    #[test]
    fn normal_form_z2() {
        let g = z2();
        let x = Element::Vector(IntVector::from_i64(&[2, -1]));
        let w = g.normal_form(&x).unwrap();
        assert_eq!(w, Word::parse("a a b^-1"));
        assert_eq!(g.eval_word(&w).unwrap(), x);
    }

    #[test]
    fn normal_form_wreath() {
        // ((a, a²), swap): base form "a b b" then the swap letter.
        let g = wreath_z_c2();
        let x = Element::Wreath {
            base: vec![
                Element::Vector(IntVector::from_i64(&[1])),
                Element::Vector(IntVector::from_i64(&[2])),
            ],
            top: 1,
        };
        let w = g.normal_form(&x).unwrap();
        assert_eq!(w, Word::parse("a b b s"));
        assert_eq!(g.eval_word(&w).unwrap(), x);
    }

    #[test]
    fn identity_normal_form_is_empty() {
        for g in [
            z2(),
            wreath_z_c2(),
            infinite_dihedral().unwrap(),
            GroupSpec::finite(FiniteTable::cyclic(3)),
        ] {
            assert_eq!(g.normal_form(&g.identity()).unwrap(), Word::empty());
        }
    }

    #[test]
    fn normal_forms_roundtrip_and_injective_on_ball() {
        for g in [
            z2(),
            wreath_z_c2(),
            infinite_dihedral().unwrap(),
            GroupSpec::direct_product(vec![
                GroupSpec::free_abelian(1),
                GroupSpec::finite(FiniteTable::cyclic(2)),
            ])
            .unwrap(),
        ] {
            let ball = g.ball(4).unwrap();
            let mut seen: HashMap<Word, Element> = HashMap::new();
            for x in ball.keys() {
                let w = g.normal_form(x).unwrap();
                assert_eq!(&g.eval_word(&w).unwrap(), x, "roundtrip for {x:?}");
                if let Some(prev) = seen.insert(w.clone(), x.clone()) {
                    panic!("normal form {w} hit twice: {prev:?} and {x:?}");
                }
            }
        }
    }

    #[test]
    fn dihedral_relations() {
        let g = infinite_dihedral().unwrap();
        let s = g.eval_word(&Word::parse("s")).unwrap();
        assert_eq!(g.mul(&s, &s).unwrap(), g.identity());
        // s a s = a⁻¹.
        let a = g.eval_word(&Word::parse("a")).unwrap();
        let sas = g
            .mul(&g.mul(&s, &a).unwrap(), &s)
            .unwrap();
        assert_eq!(sas, g.inv(&a).unwrap());
        // Reflections square to the identity.
        let aks = g.eval_word(&Word::parse("a a a s")).unwrap();
        assert_eq!(g.mul(&aks, &aks).unwrap(), g.identity());
    }

    #[test]
    fn nf_witness_matches_normal_forms() {
        for g in [z2(), infinite_dihedral().unwrap(), wreath_z_c2()] {
            let witness = g.nf_witness().unwrap();
            let ball = g.ball(3).unwrap();
            for x in ball.keys() {
                let w = g.normal_form(x).unwrap();
                assert!(
                    witness.accepts(w.letters()),
                    "witness rejects {w} in {:?}",
                    g.kind_name()
                );
            }
            // And it rejects some non-normal-form words.
            let bad = Word::parse("a a^-1");
            assert!(!witness.accepts(bad.letters()));
        }
    }

    #[test]
    fn quasigeodesic_constants() {
        // Standard abelian form is geodesic.
        assert_eq!(check_quasigeodesic_sampled(&z2(), 5).unwrap(), 1);
        // Products of geodesic forms stay geodesic.
        let dp = GroupSpec::direct_product(vec![
            GroupSpec::free_abelian(1),
            GroupSpec::free_abelian(1),
        ])
        .unwrap();
        assert_eq!(check_quasigeodesic_sampled(&dp, 5).unwrap(), 1);
        // The dihedral extension form is quasigeodesic with a finite
        // constant on the sampled ball.
        let lambda = check_quasigeodesic_sampled(&infinite_dihedral().unwrap(), 8).unwrap();
        assert!(lambda >= 1 && lambda <= 4, "λ̂ = {lambda}");
    }

    fn three_z_in_z() -> SchreierData {
        let g = GroupSpec::free_abelian(1);
        let t: Vec<Element> = (0..3)
            .map(|i| Element::Vector(IntVector::from_i64(&[i])))
            .collect();
        schreier(
            &g,
            SubgroupDesc::Lattice(IntMatrix::from_rows_i64(&[&[3]])),
            t,
        )
        .unwrap()
    }

    #[test]
    fn schreier_generators_of_3z() {
        let d = three_z_in_z();
        // Only t = a² with x = a gives a nontrivial generator, a³.
        assert_eq!(d.gens.len(), 1);
        assert_eq!(d.gens[0].t, 2);
        assert_eq!(d.gens[0].value, Element::Vector(IntVector::from_i64(&[3])));
    }

    #[test]
    fn schreier_whole_group() {
        // H = G with T = {1}: Z = generator images, trivial ones removed.
        let g = z2();
        let d = schreier(
            &g,
            SubgroupDesc::Lattice(IntMatrix::identity(2)),
            vec![g.identity()],
        )
        .unwrap();
        assert_eq!(d.gens.len(), 2);
    }

    #[test]
    fn schreier_gens_of_2z_x_z() {
        // G = ℤ², H = 2ℤ×ℤ, T = {1, a}: nontrivial values {a², b}.
        let g = z2();
        let t = vec![
            g.identity(),
            Element::Vector(IntVector::from_i64(&[1, 0])),
        ];
        let d = schreier(
            &g,
            SubgroupDesc::Lattice(IntMatrix::from_rows_i64(&[&[2, 0], &[0, 1]])),
            t,
        )
        .unwrap();
        let values: Vec<Element> = d.gens.iter().map(|g| g.value.clone()).collect();
        assert!(values.contains(&Element::Vector(IntVector::from_i64(&[2, 0]))));
        assert!(values.contains(&Element::Vector(IntVector::from_i64(&[0, 1]))));
    }

    #[test]
    fn schreier_normal_form_3z() {
        let d = three_z_in_z();
        let h = Element::Vector(IntVector::from_i64(&[6]));
        let w = schreier_normal_form(&d, &h).unwrap();
        assert_eq!(w.len(), 2); // z z with z = a³
        assert_eq!(eval_schreier_word(&d, &w).unwrap(), h);
        // Identity maps to ε; non-members error.
        assert_eq!(
            schreier_normal_form(&d, &d.group.identity()).unwrap(),
            Word::empty()
        );
        assert!(schreier_normal_form(&d, &Element::Vector(IntVector::from_i64(&[4]))).is_err());
    }

    #[test]
    fn schreier_normal_forms_evaluate_on_ball() {
        let g = z2();
        let t = vec![
            g.identity(),
            Element::Vector(IntVector::from_i64(&[1, 0])),
        ];
        let d = schreier(
            &g,
            SubgroupDesc::Lattice(IntMatrix::from_rows_i64(&[&[2, 0], &[0, 1]])),
            t,
        )
        .unwrap();
        for x in g.ball(4).unwrap().keys() {
            if d.member(x).unwrap() {
                let w = schreier_normal_form(d_ref(&d), x).unwrap();
                assert_eq!(eval_schreier_word(&d, &w).unwrap(), *x);
            }
        }
    }

    fn d_ref(d: &SchreierData) -> &SchreierData {
        d
    }

    #[test]
    fn schreier_automaton_3z_matches_images() {
        let d = three_z_in_z();
        let witness = d.group.nf_witness().unwrap();
        let aut = schreier_nf_automaton(&d, &witness).unwrap();
        // Exactly the ζ-images of a⁻⁹..a⁹ ∩ 3ℤ, and nothing else short.
        let mut expect = std::collections::BTreeSet::new();
        for m in -9..=9i64 {
            if m % 3 == 0 {
                let h = Element::Vector(IntVector::from_i64(&[m]));
                expect.insert(schreier_normal_form(&d, &h).unwrap());
            }
        }
        let got: std::collections::BTreeSet<Word> = aut
            .enumerate(3)
            .into_iter()
            .map(Word::from_letters)
            .collect();
        assert_eq!(got, expect);
        // Non-normal words rejected.
        let z = d.gens[0].letter;
        let zi = z.inverse().unwrap();
        assert!(!aut.accepts(&[z, zi, z]));
    }

    #[test]
    fn group_doc_roundtrip() {
        let doc = GroupDoc::Wreath {
            base: Box::new(GroupDoc::FreeAbelian { rank: 1 }),
            top: Box::new(GroupDoc::Finite {
                elements: vec!["1".into(), "s".into()],
                table: vec![vec![0, 1], vec![1, 0]],
                generators: Some(vec![1]),
            }),
            action: vec![vec![0, 1], vec![1, 0]],
        };
        let g = doc.build().unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        let doc2: GroupDoc = serde_json::from_str(&json).unwrap();
        let g2 = doc2.build().unwrap();
        let w = Word::parse("a s b");
        assert_eq!(g.eval_word(&w).unwrap(), g2.eval_word(&w).unwrap());
    }

    impl GroupSpec {
        fn kind_name(&self) -> &'static str {
            match &self.kind {
                GroupKind::Finite(_) => "finite",
                GroupKind::FreeAbelian { .. } => "free_abelian",
                GroupKind::DirectProduct(_) => "direct_product",
                GroupKind::WreathFinite { .. } => "wreath",
                GroupKind::FiniteExtension(_) => "extension",
            }
        }
    }
}
