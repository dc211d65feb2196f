//! Symbols, alphabets, words and free-monoid homomorphisms.
//!
//! Symbols are interned process-wide: a [`Symbol`] is a small integer with a
//! side table holding its display name, optional inverse partner and optional
//! decoration (barred copies, index ranges, state annotations). Decorations
//! let later constructions recover the base letter and index of a derived
//! letter without parsing display names.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Structured metadata attached to derived letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decoration {
    /// An ordinary letter.
    Plain,
    /// Tagged copy of `base` (segment copies, barred/hatted letters).
    Copy { base: Symbol, tag: usize },
    /// `base` carrying a contiguous index range `lo..=hi`; `hi < lo` encodes
    /// the empty range.
    Range { base: Symbol, lo: usize, hi: usize },
    /// `base` annotated with an (entry, exit) state pair.
    State { base: Symbol, entry: usize, exit: usize },
}

struct SymbolInfo {
    display: String,
    inverse: Option<Symbol>,
    decoration: Decoration,
}

struct Interner {
    table: Vec<SymbolInfo>,
    by_name: BTreeMap<String, Symbol>,
}

fn interner() -> &'static Mutex<Interner> {
    static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        Mutex::new(Interner {
            table: Vec::new(),
            by_name: BTreeMap::new(),
        })
    })
}

/// An interned letter. Identity is the display name; two symbols with the
/// same name are the same symbol.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Symbol(u32);

impl Symbol {
    /// Intern a letter by name.
    pub fn new(name: &str) -> Symbol {
        Self::intern(name, Decoration::Plain)
    }

    fn intern(name: &str, decoration: Decoration) -> Symbol {
        let mut int = interner().lock().unwrap();
        if let Some(&s) = int.by_name.get(name) {
            return s;
        }
        let id = Symbol(int.table.len() as u32);
        int.table.push(SymbolInfo {
            display: name.to_string(),
            inverse: None,
            decoration,
        });
        int.by_name.insert(name.to_string(), id);
        id
    }

    /// Intern a generator together with its formal inverse `name^-1`;
    /// the pairing is involutive.
    pub fn pair(name: &str) -> (Symbol, Symbol) {
        let pos = Self::new(name);
        let neg = Self::new(&format!("{name}^-1"));
        let mut int = interner().lock().unwrap();
        int.table[pos.0 as usize].inverse = Some(neg);
        int.table[neg.0 as usize].inverse = Some(pos);
        (pos, neg)
    }

    /// Intern a fresh letter whose name starts with `prefix` and collides
    /// with nothing interned so far.
    pub fn fresh(prefix: &str) -> Symbol {
        let mut int = interner().lock().unwrap();
        if !int.by_name.contains_key(prefix) {
            let id = Symbol(int.table.len() as u32);
            int.table.push(SymbolInfo {
                display: prefix.to_string(),
                inverse: None,
                decoration: Decoration::Plain,
            });
            int.by_name.insert(prefix.to_string(), id);
            return id;
        }
        let mut k = 1usize;
        loop {
            let name = format!("{prefix}{k}");
            if !int.by_name.contains_key(&name) {
                let id = Symbol(int.table.len() as u32);
                int.table.push(SymbolInfo {
                    display: name.clone(),
                    inverse: None,
                    decoration: Decoration::Plain,
                });
                int.by_name.insert(name, id);
                return id;
            }
            k += 1;
        }
    }

    /// Tagged copy `base~tag`.
    pub fn copy(base: Symbol, tag: usize) -> Symbol {
        let name = format!("{}~{}", base.display(), tag);
        Self::intern(&name, Decoration::Copy { base, tag })
    }

    /// Range-indexed copy `base[lo-hi]`; `hi < lo` gives the empty range.
    pub fn range(base: Symbol, lo: usize, hi: usize) -> Symbol {
        let name = if hi < lo {
            format!("{}[]", base.display())
        } else {
            format!("{}[{}-{}]", base.display(), lo, hi)
        };
        Self::intern(&name, Decoration::Range { base, lo, hi })
    }

    /// State-annotated copy `base{entry,exit}`.
    pub fn state(base: Symbol, entry: usize, exit: usize) -> Symbol {
        let name = format!("{}{{{},{}}}", base.display(), entry, exit);
        Self::intern(&name, Decoration::State { base, entry, exit })
    }

    pub fn display(self) -> String {
        interner().lock().unwrap().table[self.0 as usize]
            .display
            .clone()
    }

    pub fn inverse(self) -> Option<Symbol> {
        interner().lock().unwrap().table[self.0 as usize].inverse
    }

    pub fn decoration(self) -> Decoration {
        interner().lock().unwrap().table[self.0 as usize].decoration
    }

    /// Base letter of a decorated symbol, or the symbol itself.
    pub fn base(self) -> Symbol {
        match self.decoration() {
            Decoration::Plain => self,
            Decoration::Copy { base, .. }
            | Decoration::Range { base, .. }
            | Decoration::State { base, .. } => base,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.display())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Ok(Symbol::new(&name))
    }
}

/// An ordered, duplicate-free set of symbols.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Alphabet {
    symbols: Vec<Symbol>,
}

impl Alphabet {
    pub fn new() -> Alphabet {
        Alphabet { symbols: Vec::new() }
    }

    pub fn from_symbols<I: IntoIterator<Item = Symbol>>(syms: I) -> Alphabet {
        let mut a = Alphabet::new();
        for s in syms {
            a.insert(s);
        }
        a
    }

    /// Intern `names` as plain letters.
    pub fn of(names: &[&str]) -> Alphabet {
        Alphabet::from_symbols(names.iter().map(|n| Symbol::new(n)))
    }

    /// Intern each name as a generator/inverse pair; both letters are added.
    pub fn with_inverses(names: &[&str]) -> Alphabet {
        let mut a = Alphabet::new();
        for n in names {
            let (p, m) = Symbol::pair(n);
            a.insert(p);
            a.insert(m);
        }
        a
    }

    pub fn insert(&mut self, s: Symbol) -> bool {
        if self.symbols.contains(&s) {
            false
        } else {
            self.symbols.push(s);
            true
        }
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.symbols.contains(&s)
    }

    pub fn contains_word(&self, w: &Word) -> bool {
        w.letters().iter().all(|&s| self.contains(s))
    }

    pub fn iter(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// True when every symbol of `self` occurs in `other`.
    pub fn subset_of(&self, other: &Alphabet) -> bool {
        self.symbols.iter().all(|&s| other.contains(s))
    }

    pub fn union(&self, other: &Alphabet) -> Alphabet {
        let mut a = self.clone();
        for s in other.iter() {
            a.insert(s);
        }
        a
    }
}

impl Serialize for Alphabet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            display: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            inverse_of: Option<String>,
        }
        let entries: Vec<Entry> = self
            .symbols
            .iter()
            .map(|sym| Entry {
                display: sym.display(),
                inverse_of: sym.inverse().map(|i| i.display()),
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Entry {
            display: String,
            #[serde(default)]
            inverse_of: Option<String>,
        }
        let entries: Vec<Entry> = Vec::deserialize(d)?;
        let mut a = Alphabet::new();
        for e in &entries {
            a.insert(Symbol::new(&e.display));
        }
        // Pairings are stored on both partners; re-link from either side.
        for e in &entries {
            if let Some(inv) = &e.inverse_of {
                let s = Symbol::new(&e.display);
                let i = Symbol::new(inv);
                let mut int = interner().lock().unwrap();
                int.table[s.0 as usize].inverse = Some(i);
                int.table[i.0 as usize].inverse = Some(s);
            }
        }
        for e in &entries {
            if let Some(inv) = &e.inverse_of {
                let s = Symbol::new(&e.display);
                let i = Symbol::new(inv);
                if i.inverse() != Some(s) {
                    return Err(D::Error::custom(format!(
                        "inverse pairing of {} is not involutive",
                        e.display
                    )));
                }
            }
        }
        Ok(a)
    }
}

/// A finite word over an alphabet; the empty sequence is the word ε.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = Symbol>>(ls: I) -> Word {
        Word(ls.into_iter().collect())
    }

    pub fn single(s: Symbol) -> Word {
        Word(vec![s])
    }

    /// Parse whitespace-separated letter names; an empty string is ε.
    pub fn parse(text: &str) -> Word {
        Word(text.split_whitespace().map(Symbol::new).collect())
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, s: Symbol) {
        self.0.push(s);
    }

    pub fn repeat(&self, n: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * n);
        for _ in 0..n {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    /// Number of occurrences of `s`.
    pub fn count(&self, s: Symbol) -> usize {
        self.0.iter().filter(|&&x| x == s).count()
    }

    /// Split into maximal factors not containing any letter of `seps`;
    /// returns the n+1 segments around the n separator occurrences.
    pub fn split_on(&self, seps: &[Symbol]) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for &l in &self.0 {
            if seps.contains(&l) {
                out.push(Word::empty());
            } else {
                out.last_mut().unwrap().push(l);
            }
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let displays: Vec<String> = self.0.iter().map(|s| s.display()).collect();
        if displays.iter().all(|d| d.chars().count() == 1) {
            write!(f, "{}", displays.concat())
        } else {
            write!(f, "{}", displays.join(" "))
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Word(Vec::<Symbol>::deserialize(d)?))
    }
}

/// A free-monoid homomorphism, stored sparsely: letters outside `images`
/// are fixed points (the usual convention for tables of an L-system).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonoidMap {
    domain: Alphabet,
    codomain: Alphabet,
    images: BTreeMap<Symbol, Word>,
}

impl MonoidMap {
    /// A homomorphism `domain* -> codomain*`. Identity images may be
    /// omitted; they are normalized away so maps compare structurally.
    pub fn new(
        domain: Alphabet,
        codomain: Alphabet,
        images: BTreeMap<Symbol, Word>,
    ) -> Result<MonoidMap> {
        let mut norm = BTreeMap::new();
        for (s, w) in images {
            if !domain.contains(s) {
                return Err(Error::DomainMismatch(format!(
                    "image given for {} which is not in the domain",
                    s
                )));
            }
            if !codomain.contains_word(&w) {
                return Err(Error::DomainMismatch(format!(
                    "image of {} leaves the codomain",
                    s
                )));
            }
            if w.letters() != [s] {
                norm.insert(s, w);
            }
        }
        // Unmapped letters default to themselves, so they must exist in the
        // codomain for the map to be total.
        for s in domain.iter() {
            if !norm.contains_key(&s) && !codomain.contains(s) {
                return Err(Error::DomainMismatch(format!(
                    "letter {} has no image and is missing from the codomain",
                    s
                )));
            }
        }
        Ok(MonoidMap {
            domain,
            codomain,
            images: norm,
        })
    }

    pub fn identity(alphabet: Alphabet) -> MonoidMap {
        MonoidMap {
            domain: alphabet.clone(),
            codomain: alphabet,
            images: BTreeMap::new(),
        }
    }

    /// Endomorphism of `alphabet*`.
    pub fn endo(alphabet: Alphabet, images: BTreeMap<Symbol, Word>) -> Result<MonoidMap> {
        MonoidMap::new(alphabet.clone(), alphabet, images)
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn codomain(&self) -> &Alphabet {
        &self.codomain
    }

    pub fn images(&self) -> &BTreeMap<Symbol, Word> {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.is_empty()
    }

    /// Letters with non-identity images.
    pub fn moved_letters(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.images.keys().copied()
    }

    pub fn image_of(&self, s: Symbol) -> Word {
        match self.images.get(&s) {
            Some(w) => w.clone(),
            None => Word::single(s),
        }
    }

    /// Homomorphic image of `w`; errors if `w` leaves the domain.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        let mut out = Vec::with_capacity(w.len());
        for &l in w.letters() {
            if !self.domain.contains(l) {
                return Err(Error::DomainMismatch(format!(
                    "letter {} outside the domain of the map",
                    l
                )));
            }
            match self.images.get(&l) {
                Some(img) => out.extend_from_slice(img.letters()),
                None => out.push(l),
            }
        }
        Ok(Word::from_letters(out))
    }

    /// `self` followed by `g`: `apply(compose(f,g), w) = apply(g, apply(f, w))`.
    pub fn compose(&self, g: &MonoidMap) -> Result<MonoidMap> {
        if !self.codomain.subset_of(&g.domain) {
            return Err(Error::DomainMismatch(
                "codomain of the first map leaves the domain of the second".into(),
            ));
        }
        let mut images = BTreeMap::new();
        for s in self.domain.iter() {
            let img = g.apply(&self.image_of(s))?;
            images.insert(s, img);
        }
        MonoidMap::new(self.domain.clone(), g.codomain.clone(), images)
    }

    /// Reinterpret over larger alphabets; new letters are fixed points.
    pub fn extend_to(&self, domain: &Alphabet, codomain: &Alphabet) -> Result<MonoidMap> {
        MonoidMap::new(
            self.domain.union(domain),
            self.codomain.union(codomain),
            self.images.clone(),
        )
    }

    /// Rewrite every symbol through `rename` (domain, codomain and images).
    pub fn rename_symbols(&self, rename: &dyn Fn(Symbol) -> Symbol) -> MonoidMap {
        let ren_alpha =
            |a: &Alphabet| Alphabet::from_symbols(a.iter().map(rename));
        let images = self
            .images
            .iter()
            .map(|(&s, w)| {
                (
                    rename(s),
                    Word::from_letters(w.letters().iter().map(|&l| rename(l))),
                )
            })
            .collect();
        MonoidMap {
            domain: ren_alpha(&self.domain),
            codomain: ren_alpha(&self.codomain),
            images,
        }
    }

    /// True when `f(f(a)) = f(a)` letterwise; such maps can be folded into a
    /// system's tables without post-composition.
    pub fn is_idempotent(&self) -> bool {
        self.images.iter().all(|(_, w)| {
            w.letters()
                .iter()
                .all(|&l| self.images.get(&l).map_or(true, |v| v.letters() == [l]))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn abc() -> Alphabet {
        Alphabet::of(&["a", "b", "c", "d"])
    }

    #[test]
    fn identity_apply() {
        let a = abc();
        let id = MonoidMap::identity(a);
        let w = Word::parse("a b");
        assert_eq!(id.apply(&w).unwrap(), w);
    }

    #[test]
    fn paper_bottom_map() {
        // ⊥ ↦ tsa applied to "⊥" gives "tsa".
        let mut alpha = Alphabet::of(&["t", "s", "a"]);
        let bot = Symbol::new("⊥");
        alpha.insert(bot);
        let mut im = BTreeMap::new();
        im.insert(bot, Word::parse("t s a"));
        let f = MonoidMap::endo(alpha, im).unwrap();
        assert_eq!(f.apply(&Word::single(bot)).unwrap(), Word::parse("t s a"));
    }

    #[test]
    fn erasing_map_on_sentential_form() {
        // (s,t,u ↦ ε) applied to "atsua³" gives "a⁴".
        let alpha = Alphabet::of(&["a", "s", "t", "u"]);
        let mut im = BTreeMap::new();
        for n in ["s", "t", "u"] {
            im.insert(Symbol::new(n), Word::empty());
        }
        let f = MonoidMap::endo(alpha, im).unwrap();
        let w = Word::parse("a t s u a a a");
        assert_eq!(f.apply(&w).unwrap(), Word::parse("a a a a"));
    }

    #[test]
    fn compose_identity_left() {
        let a = abc();
        let mut im = BTreeMap::new();
        im.insert(Symbol::new("a"), Word::parse("b c"));
        let f = MonoidMap::endo(a.clone(), im).unwrap();
        let id = MonoidMap::identity(a);
        assert_eq!(id.compose(&f).unwrap(), f);
        assert_eq!(f.compose(&id).unwrap(), f);
    }

    #[test]
    fn compose_chained_renaming() {
        let a = abc();
        let mut f_im = BTreeMap::new();
        f_im.insert(Symbol::new("a"), Word::parse("b"));
        let f = MonoidMap::endo(a.clone(), f_im).unwrap();
        let mut g_im = BTreeMap::new();
        g_im.insert(Symbol::new("b"), Word::parse("c"));
        let g = MonoidMap::endo(a, g_im).unwrap();
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg.apply(&Word::parse("a")).unwrap(), Word::parse("c"));
    }

    #[test]
    fn compose_on_square_system_alphabet() {
        // φ₁: s↦su composed with φ₂: t↦at, u↦ua² on "tsua".
        let alpha = Alphabet::of(&["a", "s", "t", "u"]);
        let mut p1 = BTreeMap::new();
        p1.insert(Symbol::new("s"), Word::parse("s u"));
        let phi1 = MonoidMap::endo(alpha.clone(), p1).unwrap();
        let mut p2 = BTreeMap::new();
        p2.insert(Symbol::new("t"), Word::parse("a t"));
        p2.insert(Symbol::new("u"), Word::parse("u a a"));
        let phi2 = MonoidMap::endo(alpha, p2).unwrap();
        let c = phi1.compose(&phi2).unwrap();
        let got = c.apply(&Word::parse("t s u a")).unwrap();
        let step = phi2
            .apply(&phi1.apply(&Word::parse("t s u a")).unwrap())
            .unwrap();
        assert_eq!(got, step);
        assert_eq!(got, Word::parse("a t s u a a u a a a"));
    }

    #[test]
    fn domain_mismatch_error() {
        let a = Alphabet::of(&["a"]);
        let f = MonoidMap::identity(a);
        let w = Word::parse("a x");
        assert!(f.apply(&w).is_err());
    }

    #[test]
    fn inverse_pairing_involutive() {
        let (p, m) = Symbol::pair("g");
        assert_eq!(p.inverse(), Some(m));
        assert_eq!(m.inverse(), Some(p));
        assert_eq!(m.inverse().unwrap().inverse(), Some(m));
    }

    #[test]
    fn decorations_recover_base_and_index() {
        let a = Symbol::new("a");
        let r = Symbol::range(a, 1, 2);
        assert_eq!(r.base(), a);
        assert_eq!(
            r.decoration(),
            Decoration::Range { base: a, lo: 1, hi: 2 }
        );
        let c = Symbol::copy(a, 3);
        assert_eq!(c.base(), a);
    }

    /// Exhaustive associativity on all words of length ≤ 6 over 4 letters
    /// would be 4^6 checks per word-length; sampling every word up to
    /// length 6 over the fixed maps below is still exact.
    #[test]
    fn compose_associative_exhaustive() {
        let alpha = abc();
        let syms: Vec<Symbol> = alpha.iter().collect();
        let mut f_im = BTreeMap::new();
        f_im.insert(syms[0], Word::from_letters([syms[1], syms[2]]));
        let f = MonoidMap::endo(alpha.clone(), f_im).unwrap();
        let mut g_im = BTreeMap::new();
        g_im.insert(syms[1], Word::empty());
        g_im.insert(syms[2], Word::from_letters([syms[3]]));
        let g = MonoidMap::endo(alpha.clone(), g_im).unwrap();
        let mut h_im = BTreeMap::new();
        h_im.insert(syms[3], Word::from_letters([syms[0], syms[0]]));
        let h = MonoidMap::endo(alpha.clone(), h_im).unwrap();

        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();

        let mut stack = vec![Word::empty()];
        while let Some(w) = stack.pop() {
            assert_eq!(left.apply(&w).unwrap(), right.apply(&w).unwrap());
            if w.len() < 6 {
                for &s in &syms {
                    let mut v = w.clone();
                    v.push(s);
                    stack.push(v);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn apply_distributes_over_concat(u_len in 0usize..8, v_len in 0usize..8, seed in 0u64..1000) {
            let alpha = abc();
            let syms: Vec<Symbol> = alpha.iter().collect();
            let pick = |i: usize| syms[(seed as usize + i * 7) % syms.len()];
            let u = Word::from_letters((0..u_len).map(pick));
            let v = Word::from_letters((0..v_len).map(|i| pick(i + 3)));
            let mut im = BTreeMap::new();
            im.insert(syms[0], Word::from_letters([syms[1], syms[1]]));
            im.insert(syms[2], Word::empty());
            let f = MonoidMap::endo(alpha, im).unwrap();
            let lhs = f.apply(&u.concat(&v)).unwrap();
            let rhs = f.apply(&u).unwrap().concat(&f.apply(&v).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
