//! Constructions around a distinguished hash letter: relabelling the hash
//! occurrences with distinct indexed hashes, per-segment alphabet copies,
//! (#,…,#)-separated form, and segmentwise parallel concatenation
//! (intermesh).
//!
//! All four operate on languages in which every word carries a fixed number
//! of hash occurrences. Index decorations are (base letter, contiguous
//! range) pairs; a table's indexed versions split a letter's range across
//! its image word, and the full product family of such tables is
//! materialized (capped at [`FAMILY_TABLE_CAP`]). The empty range is
//! permitted in the hash-relabelling construction and forbidden in the
//! per-segment copy construction, matching the two source constructions.

use std::collections::{BTreeMap, HashMap};

use crate::automata::{Nfa, StateId};
use crate::edt0l::{DerivationBudget, Edt0lSystem, TableId, FAMILY_TABLE_CAP};
use crate::error::{Error, Result};
use crate::words::{Alphabet, MonoidMap, Symbol, Word};

/// A language whose every word carries exactly `n` occurrences of `hash`.
#[derive(Clone, Debug)]
pub struct HashedLanguageSpec {
    pub base: Edt0lSystem,
    pub hash: Symbol,
    pub n: usize,
}

impl HashedLanguageSpec {
    pub fn new(base: Edt0lSystem, hash: Symbol, n: usize) -> HashedLanguageSpec {
        HashedLanguageSpec { base, hash, n }
    }

    /// Check the hash-count invariant on the bounded slice.
    pub fn validate(&self, budget: DerivationBudget) -> Result<()> {
        for w in self.base.enumerate(budget)? {
            let c = w.count(self.hash);
            if c != self.n {
                return Err(Error::InvariantViolation(format!(
                    "word {w} carries {c} hashes, expected {}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// The i-th indexed hash (1-based).
pub fn indexed_hash(hash: Symbol, i: usize) -> Symbol {
    Symbol::range(hash, i, i)
}

/// The segment-i copy of a letter (0-based), used by [`index_segments`].
pub fn segment_letter(a: Symbol, i: usize) -> Symbol {
    Symbol::range(a, i, i)
}

/// Shape automaton for n-hash words: states are segment positions 0..=n,
/// non-hash letters loop, the i-th hash steps i-1 to i. Deterministic, so
/// annotated table families stay small.
fn shape_automaton(terminal: &Alphabet, hash: Symbol, n: usize) -> Result<Nfa<Symbol>> {
    let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = Vec::new();
    for i in 0..=n {
        for a in terminal.iter() {
            if a == hash {
                continue;
            }
            edges.push((i as StateId, Some(a), i as StateId));
        }
        if i < n {
            edges.push((i as StateId, Some(hash), (i + 1) as StateId));
        }
    }
    Nfa::new((n + 1) as u32, edges, 0, [n as StateId])
}

/// Fold state-annotated terminals through `image_of`, fixing plain letters.
fn fold_annotations(
    sys: &Edt0lSystem,
    image_of: &dyn Fn(Symbol) -> Word,
) -> Result<Edt0lSystem> {
    let mut images = BTreeMap::new();
    let mut dom = sys.terminal().clone();
    let mut cod = Alphabet::new();
    for s in sys.terminal().iter() {
        let img = image_of(s);
        for &l in img.letters() {
            cod.insert(l);
        }
        dom.insert(s);
        images.insert(s, img);
    }
    let fold = MonoidMap::new(dom.union(&cod), cod, images)?;
    sys.hom_image(&fold)
}

/// Replace the i-th hash occurrence with the i-th indexed hash and append a
/// final indexed hash after the last segment: {w₁#w₂#⋯#w_{n+1}} becomes
/// {w₁#₁w₂#₂⋯w_{n+1}#_{n+1}}. The spec's `n` counts hash occurrences of
/// the input; the output carries n+1 indexed hashes, one per segment.
///
/// Budget: steps carry over one-to-one (plus one if the start word needed
/// seeding); lengths grow by one for the appended hash.
pub fn relabel_hashes(spec: &HashedLanguageSpec) -> Result<Edt0lSystem> {
    let hash = spec.hash;
    let n = spec.n;
    let trailing = indexed_hash(hash, n + 1);
    let shape = shape_automaton(spec.base.terminal(), hash, n)?;
    let annotated = spec.base.intersect_regular_annotated(&shape)?;
    // a{p,p} stays a; the hash stepping p to p+1 becomes the (p+1)-st
    // indexed hash.
    let folded = fold_annotations(&annotated, &|s| {
        use crate::words::Decoration;
        match s.decoration() {
            Decoration::State { base, entry, exit } if base == hash && exit == entry + 1 => {
                Word::single(indexed_hash(hash, exit))
            }
            _ => Word::single(s.base()),
        }
    })?;
    // Append the trailing indexed hash after the last segment.
    let mut extended = folded.extended().clone();
    extended.insert(trailing);
    let mut terminal = Alphabet::from_symbols(
        folded.terminal().iter().filter(|&s| s != hash),
    );
    terminal.insert(trailing);
    let tables = folded
        .table_names()
        .iter()
        .cloned()
        .zip(
            folded
                .tables()
                .iter()
                .map(|t| t.extend_to(&extended, &extended))
                .collect::<Result<Vec<_>>>()?,
        )
        .collect();
    Edt0lSystem::new(
        terminal,
        extended,
        folded.start().concat(&Word::single(trailing)),
        tables,
        folded.control().clone(),
    )
}

/// Rewrite each segment into its own alphabet copy:
/// {w₀#⋯#wₙ} becomes {(w₀φ⁰)#⋯#(wₙφⁿ)} with φⁱ the copy map into the i-th
/// segment alphabet. Hashes stay plain; the output has a single-letter
/// start. Budget: steps one-to-one (plus start seeding when needed).
pub fn index_segments(spec: &HashedLanguageSpec) -> Result<Edt0lSystem> {
    let hash = spec.hash;
    let n = spec.n;
    let shape = shape_automaton(spec.base.terminal(), hash, n)?;
    let annotated = spec.base.intersect_regular_annotated(&shape)?;
    // a{p,p} becomes the segment-p copy of a; hashes fold back to plain.
    fold_annotations(&annotated, &|s| {
        use crate::words::Decoration;
        match s.decoration() {
            Decoration::State { base, entry, exit } => {
                if base == hash && exit == entry + 1 {
                    Word::single(hash)
                } else {
                    Word::single(segment_letter(base, entry))
                }
            }
            _ => Word::single(s.base()),
        }
    })
}

/// True when the system is (#,…,#)-separated: the start word carries
/// exactly `n` hashes, no table image contains the hash, and nothing but
/// the hash maps to the hash (the hash is unmoved).
pub fn is_separated(sys: &Edt0lSystem, hash: Symbol, n: usize) -> bool {
    if sys.start().count(hash) != n {
        return false;
    }
    for t in sys.tables() {
        for (s, img) in t.images() {
            if *s == hash {
                return false;
            }
            if img.letters().contains(&hash) {
                return false;
            }
        }
    }
    true
}

/// Produce a separated system for the same language: every hash of every
/// word comes from the start word and tables never create or destroy
/// hashes. Already-separated systems are returned unchanged.
///
/// Route: per-segment alphabet copies, then n+1 parallel copies of that
/// system driven by a shared control (each copy contributes one segment),
/// then a collapse map folded into the tables. Budget: steps carry over
/// one-to-one from [`index_segments`]; lengths scale by n+1 plus n
/// separator letters.
pub fn hash_separate(spec: &HashedLanguageSpec) -> Result<Edt0lSystem> {
    if is_separated(&spec.base, spec.hash, spec.n) {
        return Ok(spec.base.clone());
    }
    let hash = spec.hash;
    let n = spec.n;
    let m = index_segments(spec)?;
    let m = m.normalize_start()?;
    let dead = Symbol::fresh("†");

    // Parallel copies 0..=n of the indexed system.
    let copy_tag = |i: usize| 100 + i;
    let copy = |s: Symbol, i: usize| Symbol::copy(s, copy_tag(i));
    let terminal = Alphabet::from_symbols(spec.base.terminal().iter());
    let mut extended = terminal.clone();
    extended.insert(hash);
    extended.insert(dead);
    for i in 0..=n {
        for s in m.extended().iter() {
            extended.insert(copy(s, i));
        }
    }
    // Collapse: the copy-i image of a segment-i terminal becomes the plain
    // base letter; other copied terminals vanish; copied nonterminals
    // block; the plain hash separates.
    let collapse_image = |s: Symbol, i: usize| -> Word {
        use crate::words::Decoration;
        if m.terminal().contains(s) {
            if let Decoration::Range { base, lo, hi } = s.decoration() {
                if lo == hi && lo == i && base != hash {
                    return Word::single(base);
                }
            }
            Word::empty()
        } else {
            Word::single(dead)
        }
    };
    let mut tables: Vec<(String, MonoidMap)> = Vec::new();
    for (name, t) in m.table_names().iter().zip(m.tables()) {
        let mut images: BTreeMap<Symbol, Word> = BTreeMap::new();
        for i in 0..=n {
            for (s, img) in t.images() {
                images.insert(
                    copy(*s, i),
                    Word::from_letters(img.letters().iter().map(|&x| copy(x, i))),
                );
            }
        }
        tables.push((
            name.clone(),
            MonoidMap::endo(extended.clone(), images)?,
        ));
    }
    // The collapse map, folded as a final table so the separated predicate
    // sees hash-free images; it fixes already-collapsed plain letters.
    let mut collapse_images: BTreeMap<Symbol, Word> = BTreeMap::new();
    for i in 0..=n {
        for s in m.extended().iter() {
            collapse_images.insert(copy(s, i), collapse_image(s, i));
        }
    }
    let collapse = MonoidMap::endo(extended.clone(), collapse_images)?;
    let collapse_id = tables.len() as TableId;
    tables.push(("collapse".into(), collapse));

    let mstart = m.start().letters()[0];
    let mut start = Word::empty();
    for i in 0..=n {
        if i > 0 {
            start.push(hash);
        }
        start.push(copy(mstart, i));
    }
    let nstates = m.control().state_count();
    let mut edges: Vec<(StateId, Option<TableId>, StateId)> = m
        .control()
        .edges()
        .iter()
        .map(|(p, l, q)| (*p, *l, *q))
        .collect();
    for &q in m.control().accepts_states() {
        edges.push((q, Some(collapse_id), nstates));
    }
    let control = Nfa::new(nstates + 1, edges, m.control().start(), [nstates])?;
    Edt0lSystem::new(terminal, extended, start, tables, control)
}

/// Segmentwise parallel concatenation:
/// { u₀v₀ # u₁v₁ # ⋯ # uₙvₙ : u-word ∈ L, v-word ∈ M }.
///
/// Both operands are brought to separated form; the mesh interleaves the
/// start words segment by segment and runs the two controls in sequence
/// (their tables act on disjoint nonterminals, so sequential application
/// derives both sides). Budget: componentwise sum of the separated
/// operands' budgets.
pub fn intermesh(l: &HashedLanguageSpec, m: &HashedLanguageSpec) -> Result<Edt0lSystem> {
    if l.n != m.n {
        return Err(Error::HashCountMismatch(format!(
            "intermesh needs equal hash counts, got {} and {}",
            l.n, m.n
        )));
    }
    if l.hash != m.hash {
        return Err(Error::HashCountMismatch(
            "intermesh operands use different hash letters".into(),
        ));
    }
    let a = hash_separate(l)?;
    let b = hash_separate(m)?;
    mesh_separated(&a, &b, l.hash, l.n)
}

/// Mesh two already-separated systems sharing the hash letter; exposed for
/// the solver pipelines, which build separated systems natively.
pub fn mesh_separated(
    a: &Edt0lSystem,
    b: &Edt0lSystem,
    hash: Symbol,
    n: usize,
) -> Result<Edt0lSystem> {
    if !is_separated(a, hash, n) || !is_separated(b, hash, n) {
        return Err(Error::InvalidSystem(
            "mesh operands must be (#,…,#)-separated".into(),
        ));
    }
    let (a, b) = disjoint_pair(a, b);
    let a_segs = a.start().split_on(&[hash]);
    let b_segs = b.start().split_on(&[hash]);
    let mut start = Word::empty();
    for i in 0..=n {
        if i > 0 {
            start.push(hash);
        }
        start = start.concat(&a_segs[i]).concat(&b_segs[i]);
    }
    let terminal = a.terminal().union(b.terminal());
    let extended = a.extended().union(b.extended());
    let mut tables: Vec<(String, MonoidMap)> = Vec::new();
    let mut a_ids = Vec::new();
    for (name, t) in a.table_names().iter().zip(a.tables()) {
        a_ids.push(tables.len() as TableId);
        tables.push((format!("L.{name}"), t.extend_to(&extended, &extended)?));
    }
    let mut b_ids = Vec::new();
    for (name, t) in b.table_names().iter().zip(b.tables()) {
        b_ids.push(tables.len() as TableId);
        tables.push((format!("M.{name}"), t.extend_to(&extended, &extended)?));
    }
    let ctl_a = a.control().map_labels(|t| Some(a_ids[*t as usize]));
    let ctl_b = b.control().map_labels(|t| Some(b_ids[*t as usize]));
    let control = ctl_a.concat(&ctl_b);
    Edt0lSystem::new(terminal, extended, start, tables, control)
}

/// Rename nonterminals of `b` away from `a`'s letters and vice versa.
fn disjoint_pair(a: &Edt0lSystem, b: &Edt0lSystem) -> (Edt0lSystem, Edt0lSystem) {
    // Reuse the edt0l-module disjointifier through union's building blocks:
    // a local copy keeps the separation module self-contained.
    let nonterminals = |s: &Edt0lSystem| -> Vec<Symbol> {
        s.extended()
            .iter()
            .filter(|&x| !s.terminal().contains(x))
            .collect()
    };
    let rename = |s: &Edt0lSystem, map: &HashMap<Symbol, Symbol>| -> Edt0lSystem {
        let f = |x: Symbol| map.get(&x).copied().unwrap_or(x);
        Edt0lSystem::new(
            s.terminal().clone(),
            Alphabet::from_symbols(s.extended().iter().map(f)),
            Word::from_letters(s.start().letters().iter().map(|&l| f(l))),
            s.table_names()
                .iter()
                .cloned()
                .zip(s.tables().iter().map(|t| t.rename_symbols(&f)))
                .collect(),
            s.control().clone(),
        )
        .expect("renaming preserves well-formedness")
    };
    let mut ren_b = HashMap::new();
    for s in nonterminals(b) {
        if a.extended().contains(s) {
            ren_b.insert(s, Symbol::fresh(&s.display()));
        }
    }
    let b2 = rename(b, &ren_b);
    let mut ren_a = HashMap::new();
    for s in nonterminals(a) {
        if b2.extended().contains(s) {
            ren_a.insert(s, Symbol::fresh(&s.display()));
        }
    }
    (rename(a, &ren_a), b2)
}

/// Replace each segment of a separated system's start word by a fresh
/// single seed letter planted by one extra seeding table, giving a
/// separated system with single-letter segment seeds. Budget: one extra
/// step.
pub fn seed_segments(sys: &Edt0lSystem, hash: Symbol, n: usize) -> Result<Edt0lSystem> {
    if !is_separated(sys, hash, n) {
        return Err(Error::InvalidSystem(
            "seed_segments needs a (#,…,#)-separated system".into(),
        ));
    }
    let segs = sys.start().split_on(&[hash]);
    if segs.iter().all(|s| s.len() == 1 && !sys.terminal().contains(s.letters()[0])) {
        return Ok(sys.clone());
    }
    let mut extended = sys.extended().clone();
    let mut images = BTreeMap::new();
    let mut start = Word::empty();
    for (i, seg) in segs.iter().enumerate() {
        if i > 0 {
            start.push(hash);
        }
        let seed = Symbol::fresh(&format!("⊥{i}_"));
        extended.insert(seed);
        images.insert(seed, seg.clone());
        start.push(seed);
    }
    let seed_table = MonoidMap::endo(extended.clone(), images)?;
    let mut tables: Vec<(String, MonoidMap)> = sys
        .table_names()
        .iter()
        .cloned()
        .zip(
            sys.tables()
                .iter()
                .map(|t| t.extend_to(&extended, &extended))
                .collect::<Result<Vec<_>>>()?,
        )
        .collect();
    let seed_id = tables.len() as TableId;
    tables.push(("seedseg".into(), seed_table));
    let nstates = sys.control().state_count();
    let mut edges: Vec<(StateId, Option<TableId>, StateId)> = sys
        .control()
        .edges()
        .iter()
        .map(|(p, l, q)| (*p, *l, *q))
        .collect();
    edges.push((nstates, Some(seed_id), sys.control().start()));
    let control = Nfa::new(
        nstates + 1,
        edges,
        nstates,
        sys.control().accepts_states().iter().copied(),
    )?;
    Edt0lSystem::new(sys.terminal().clone(), extended, start, tables, control)
}
