//! EDT0L systems: bounded derivation semantics and the closure operations
//! (union, concatenation, Kleene star, homomorphic image, intersection with
//! a regular language).
//!
//! A system is a tuple (Σ, C, ω, ℛ): terminal alphabet, extended alphabet,
//! start word, and a rational control — an NFA whose labels index a table of
//! endomorphisms of C*. The accepted language is {ωφ | φ ∈ ℛ} ∩ Σ*.
//!
//! Languages here are infinite objects; the executable semantics is bounded
//! enumeration under an explicit [`DerivationBudget`]. Every closure
//! operation documents how it transforms budgets. Operations preserve two
//! properties that keep those transforms exact: tables fix terminal letters
//! ("terminal-fixing"), and folding an idempotent letter map into a system
//! costs no extra derivation steps.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::automata::{Nfa, NfaDoc, StateId};
use crate::error::{Error, Result};
use crate::words::{Alphabet, MonoidMap, Symbol, Word};

/// Index into a system's endomorphism table.
pub type TableId = u32;

/// Bounds for enumerating an EDT0L language: maximum number of table
/// applications along a control path, and maximum length of every
/// intermediate sentential form (the start word included).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationBudget {
    pub max_steps: usize,
    pub max_len: usize,
}

impl DerivationBudget {
    pub fn new(max_steps: usize, max_len: usize) -> Self {
        DerivationBudget { max_steps, max_len }
    }
}

/// Affine map from a solution-box radius to a sufficient derivation budget.
/// Pipelines compose these alongside the systems they build, one transform
/// per closure operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetMap {
    pub steps_base: usize,
    pub steps_per_r: usize,
    pub len_base: usize,
    pub len_per_r: usize,
}

impl BudgetMap {
    pub fn constant(steps: usize, len: usize) -> BudgetMap {
        BudgetMap {
            steps_base: steps,
            steps_per_r: 0,
            len_base: len,
            len_per_r: 0,
        }
    }

    pub fn at(&self, r: usize) -> DerivationBudget {
        DerivationBudget {
            max_steps: self.steps_base + self.steps_per_r * r,
            max_len: self.len_base + self.len_per_r * r,
        }
    }

    /// Componentwise max: sufficient for a union of branches.
    pub fn join(self, other: BudgetMap) -> BudgetMap {
        BudgetMap {
            steps_base: self.steps_base.max(other.steps_base),
            steps_per_r: self.steps_per_r.max(other.steps_per_r),
            len_base: self.len_base.max(other.len_base),
            len_per_r: self.len_per_r.max(other.len_per_r),
        }
    }

    /// Componentwise sum: sufficient for concatenation and intermesh.
    pub fn sum(self, other: BudgetMap) -> BudgetMap {
        BudgetMap {
            steps_base: self.steps_base + other.steps_base,
            steps_per_r: self.steps_per_r + other.steps_per_r,
            len_base: self.len_base + other.len_base,
            len_per_r: self.len_per_r + other.len_per_r,
        }
    }

    pub fn add_steps(mut self, k: usize) -> BudgetMap {
        self.steps_base += k;
        self
    }

    pub fn add_len(mut self, k: usize) -> BudgetMap {
        self.len_base += k;
        self
    }

    pub fn scale_len(mut self, k: usize) -> BudgetMap {
        self.len_base *= k;
        self.len_per_r *= k;
        self
    }

    pub fn scale_steps(mut self, k: usize) -> BudgetMap {
        self.steps_base *= k;
        self.steps_per_r *= k;
        self
    }
}

/// Hard caps that turn runaway constructions and enumerations into errors
/// instead of memory exhaustion.
pub const ENUMERATION_NODE_CAP: usize = 4_000_000;
pub const FAMILY_TABLE_CAP: usize = 20_000;

/// An EDT0L system. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Edt0lSystem {
    terminal: Alphabet,
    extended: Alphabet,
    start: Word,
    tables: Vec<MonoidMap>,
    table_names: Vec<String>,
    control: Nfa<TableId>,
}

/// One witnessed derivation: the control path taken and, when requested,
/// every intermediate sentential form.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub word: Word,
    pub path: Vec<TableId>,
    pub intermediates: Option<Vec<Word>>,
}

/// Size summary used by the solver reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SizeReport {
    pub extended_letters: usize,
    pub table_count: usize,
    pub control_states: u32,
    pub total_image_length: usize,
}

impl Edt0lSystem {
    pub fn new(
        terminal: Alphabet,
        extended: Alphabet,
        start: Word,
        tables: Vec<(String, MonoidMap)>,
        control: Nfa<TableId>,
    ) -> Result<Edt0lSystem> {
        if !terminal.subset_of(&extended) {
            return Err(Error::InvalidSystem(
                "terminal alphabet must be contained in the extended alphabet".into(),
            ));
        }
        if !extended.contains_word(&start) {
            return Err(Error::InvalidSystem(
                "start word leaves the extended alphabet".into(),
            ));
        }
        for (name, t) in &tables {
            if !t.domain().subset_of(&extended) || !t.codomain().subset_of(&extended) {
                return Err(Error::InvalidSystem(format!(
                    "table {name} is not an endomorphism of the extended alphabet"
                )));
            }
            for (_, img) in t.images() {
                if !extended.contains_word(img) {
                    return Err(Error::InvalidSystem(format!(
                        "table {name} has an image leaving the extended alphabet"
                    )));
                }
            }
        }
        for l in control.labels() {
            if l as usize >= tables.len() {
                return Err(Error::InvalidSystem(format!(
                    "control label {l} has no table"
                )));
            }
        }
        let (table_names, tables) = tables.into_iter().unzip();
        Ok(Edt0lSystem {
            terminal,
            extended,
            start,
            tables,
            table_names,
            control,
        })
    }

    pub fn terminal(&self) -> &Alphabet {
        &self.terminal
    }

    pub fn extended(&self) -> &Alphabet {
        &self.extended
    }

    pub fn start(&self) -> &Word {
        &self.start
    }

    pub fn tables(&self) -> &[MonoidMap] {
        &self.tables
    }

    pub fn table_names(&self) -> &[String] {
        &self.table_names
    }

    pub fn control(&self) -> &Nfa<TableId> {
        &self.control
    }

    pub fn size_report(&self) -> SizeReport {
        SizeReport {
            extended_letters: self.extended.len(),
            table_count: self.tables.len(),
            control_states: self.control.state_count(),
            total_image_length: self
                .tables
                .iter()
                .flat_map(|t| t.images().values())
                .map(Word::len)
                .sum(),
        }
    }

    /// True when no table moves a terminal letter. All construction
    /// pipelines in this crate maintain this invariant; it is what makes
    /// concatenation and homomorphism folding budget-exact.
    pub fn is_terminal_fixing(&self) -> bool {
        self.tables
            .iter()
            .all(|t| t.moved_letters().all(|s| !self.terminal.contains(s)))
    }

    /// Nonterminal letters (extended minus terminal).
    fn nonterminals(&self) -> Vec<Symbol> {
        self.extended
            .iter()
            .filter(|&s| !self.terminal.contains(s))
            .collect()
    }

    fn rename_letters(&self, rename: &HashMap<Symbol, Symbol>) -> Edt0lSystem {
        let f = |s: Symbol| rename.get(&s).copied().unwrap_or(s);
        Edt0lSystem {
            terminal: self.terminal.clone(),
            extended: Alphabet::from_symbols(self.extended.iter().map(f)),
            start: Word::from_letters(self.start.letters().iter().map(|&l| f(l))),
            tables: self.tables.iter().map(|t| t.rename_symbols(&f)).collect(),
            table_names: self.table_names.clone(),
            control: self.control.clone(),
        }
    }

    /// Rename nonterminals of `other` away from `self` and vice versa, so
    /// that afterwards the extended alphabets meet only in shared terminals.
    fn disjointify(&self, other: &Edt0lSystem) -> (Edt0lSystem, Edt0lSystem) {
        let mut ren_b = HashMap::new();
        for s in other.nonterminals() {
            if self.extended.contains(s) {
                ren_b.insert(s, Symbol::fresh(&s.display()));
            }
        }
        let b = other.rename_letters(&ren_b);
        let mut ren_a = HashMap::new();
        for s in self.nonterminals() {
            if b.extended.contains(s) {
                ren_a.insert(s, Symbol::fresh(&s.display()));
            }
        }
        let a = self.rename_letters(&ren_a);
        (a, b)
    }

    /// Exact membership in the bounded slice.
    pub fn member_bounded(&self, w: &Word, budget: DerivationBudget) -> Result<bool> {
        Ok(self.enumerate(budget)?.contains(w))
    }

    /// The bounded slice { ωφ₁⋯φ_d : d ≤ max_steps, the φᵢ label an
    /// accepting control path, every prefix image (ω included) has length
    /// ≤ max_len } ∩ Σ*. Monotone in both budget components and always a
    /// subset of the accepted language.
    pub fn enumerate(&self, budget: DerivationBudget) -> Result<BTreeSet<Word>> {
        Ok(self
            .enumerate_full(budget, None, false)?
            .into_iter()
            .map(|d| d.word)
            .collect())
    }

    /// As [`enumerate`](Self::enumerate) but dropping every sentential form
    /// for which `prune` returns true. Sound only when pruned forms cannot
    /// derive words inside the caller's slice of interest (the solver
    /// pipelines guarantee this by letter-count monotonicity).
    pub fn enumerate_pruned(
        &self,
        budget: DerivationBudget,
        prune: &dyn Fn(&Word) -> bool,
    ) -> Result<BTreeSet<Word>> {
        Ok(self
            .enumerate_full(budget, Some(prune), false)?
            .into_iter()
            .map(|d| d.word)
            .collect())
    }

    /// Bounded enumeration with one witness derivation per word.
    pub fn enumerate_witnessed(
        &self,
        budget: DerivationBudget,
        keep_intermediates: bool,
    ) -> Result<Vec<Derivation>> {
        self.enumerate_full(budget, None, keep_intermediates)
    }

    fn enumerate_full(
        &self,
        budget: DerivationBudget,
        prune: Option<&dyn Fn(&Word) -> bool>,
        keep_intermediates: bool,
    ) -> Result<Vec<Derivation>> {
        struct Node {
            states: Vec<StateId>,
            word: Word,
            path: Vec<TableId>,
            forms: Vec<Word>,
        }
        let mut results: BTreeMap<Word, Derivation> = BTreeMap::new();
        if self.start.len() > budget.max_len {
            return Ok(Vec::new());
        }
        if let Some(p) = prune {
            if p(&self.start) {
                return Ok(Vec::new());
            }
        }
        let start_set: BTreeSet<StateId> = BTreeSet::from([self.control.start()]);
        let start_set = self.control.closure(&start_set);
        let mut visited: HashSet<(Vec<StateId>, Word)> = HashSet::new();
        let mut queue: VecDeque<Node> = VecDeque::new();
        let root = Node {
            states: start_set.iter().copied().collect(),
            word: self.start.clone(),
            path: Vec::new(),
            forms: if keep_intermediates {
                vec![self.start.clone()]
            } else {
                Vec::new()
            },
        };
        let accepting = |states: &[StateId]| {
            states
                .iter()
                .any(|q| self.control.accepts_states().contains(q))
        };
        let record = |node: &Node, results: &mut BTreeMap<Word, Derivation>| {
            if accepting(&node.states) && self.terminal.contains_word(&node.word) {
                results.entry(node.word.clone()).or_insert_with(|| Derivation {
                    word: node.word.clone(),
                    path: node.path.clone(),
                    intermediates: if keep_intermediates {
                        Some(node.forms.clone())
                    } else {
                        None
                    },
                });
            }
        };
        record(&root, &mut results);
        visited.insert((root.states.clone(), root.word.clone()));
        queue.push_back(root);
        let mut expanded = 0usize;
        while let Some(node) = queue.pop_front() {
            if node.path.len() >= budget.max_steps {
                continue;
            }
            expanded += 1;
            if expanded > ENUMERATION_NODE_CAP {
                return Err(Error::CapExceeded(format!(
                    "enumeration exceeded {ENUMERATION_NODE_CAP} nodes"
                )));
            }
            let state_set: BTreeSet<StateId> = node.states.iter().copied().collect();
            let mut out_labels: BTreeMap<TableId, BTreeSet<StateId>> = BTreeMap::new();
            for (p, l, q) in self.control.edges() {
                if let Some(t) = l {
                    if state_set.contains(p) {
                        out_labels.entry(*t).or_default().insert(*q);
                    }
                }
            }
            for (t, targets) in out_labels {
                let next_states = self.control.closure(&targets);
                let next_word = self.tables[t as usize].apply(&node.word)?;
                if next_word.len() > budget.max_len {
                    continue;
                }
                if let Some(p) = prune {
                    if p(&next_word) {
                        continue;
                    }
                }
                let key: (Vec<StateId>, Word) =
                    (next_states.iter().copied().collect(), next_word.clone());
                if !visited.insert(key.clone()) {
                    continue;
                }
                let mut path = node.path.clone();
                path.push(t);
                let mut forms = node.forms.clone();
                if keep_intermediates {
                    forms.push(next_word.clone());
                }
                let next = Node {
                    states: key.0,
                    word: next_word,
                    path,
                    forms,
                };
                record(&next, &mut results);
                queue.push_back(next);
            }
        }
        Ok(results.into_values().collect())
    }

    /// Replay a derivation path from the start word; used to check witness
    /// soundness.
    pub fn replay(&self, path: &[TableId]) -> Result<Word> {
        let mut w = self.start.clone();
        for &t in path {
            let table = self
                .tables
                .get(t as usize)
                .ok_or_else(|| Error::InvalidSystem(format!("no table {t}")))?;
            w = table.apply(&w)?;
        }
        Ok(w)
    }

    /// Returns an equivalent system whose start word is a single fresh
    /// letter, with the old start word planted by a seeding table. Budgets
    /// shift by one step; lengths are unchanged (the old start still appears
    /// as the second sentential form). A single-letter start is returned
    /// unchanged.
    pub fn normalize_start(&self) -> Result<Edt0lSystem> {
        if self.start.len() == 1 && !self.terminal.contains(self.start.letters()[0]) {
            return Ok(self.clone());
        }
        let bot = Symbol::fresh("⊥");
        let mut extended = self.extended.clone();
        extended.insert(bot);
        let mut images = BTreeMap::new();
        images.insert(bot, self.start.clone());
        let seed = MonoidMap::endo(extended.clone(), images)?;
        let mut tables: Vec<(String, MonoidMap)> = self
            .table_names
            .iter()
            .cloned()
            .zip(
                self.tables
                    .iter()
                    .map(|t| t.extend_to(&extended, &extended))
                    .collect::<Result<Vec<_>>>()?,
            )
            .collect();
        let seed_id = tables.len() as TableId;
        tables.push(("seed".into(), seed));
        // New start state with a seed edge into the old control.
        let n = self.control.state_count();
        let mut edges: Vec<(StateId, Option<TableId>, StateId)> = self
            .control
            .edges()
            .iter()
            .map(|(p, l, q)| (*p, *l, *q))
            .collect();
        edges.push((n, Some(seed_id), self.control.start()));
        let control = Nfa::new(
            n + 1,
            edges,
            n,
            self.control.accepts_states().iter().copied(),
        )?;
        Edt0lSystem::new(self.terminal.clone(), extended, Word::single(bot), tables, control)
    }

    /// Returns an equivalent terminal-fixing system: derivations run on
    /// barred copies of the terminals and a final unbarring map exposes
    /// them. Costs one extra step; lengths are unchanged.
    pub fn make_terminal_fixing(&self) -> Result<Edt0lSystem> {
        if self.is_terminal_fixing() {
            return Ok(self.clone());
        }
        let bar_tag = 9000usize;
        let mut bar_map: HashMap<Symbol, Symbol> = HashMap::new();
        for s in self.terminal.iter() {
            bar_map.insert(s, Symbol::copy(s, bar_tag));
        }
        let barred = self.rename_letters(&bar_map);
        let mut extended = barred.extended.union(&self.terminal);
        let mut unbar_images = BTreeMap::new();
        for (s, b) in &bar_map {
            unbar_images.insert(*b, Word::single(*s));
        }
        extended = extended.union(&self.extended);
        let unbar = MonoidMap::endo(extended.clone(), unbar_images)?;
        let mut tables: Vec<(String, MonoidMap)> = barred
            .table_names
            .iter()
            .cloned()
            .zip(
                barred
                    .tables
                    .iter()
                    .map(|t| t.extend_to(&extended, &extended))
                    .collect::<Result<Vec<_>>>()?,
            )
            .collect();
        let unbar_id = tables.len() as TableId;
        tables.push(("unbar".into(), unbar));
        let n = barred.control.state_count();
        let mut edges: Vec<(StateId, Option<TableId>, StateId)> = barred
            .control
            .edges()
            .iter()
            .map(|(p, l, q)| (*p, *l, *q))
            .collect();
        for &q in barred.control.accepts_states() {
            edges.push((q, Some(unbar_id), n));
        }
        let control = Nfa::new(n + 1, edges, barred.control.start(), [n])?;
        Edt0lSystem::new(
            self.terminal.clone(),
            extended,
            barred.start.clone(),
            tables,
            control,
        )
    }

    /// Rename a single-letter nonterminal start to `target` everywhere.
    fn with_start_symbol(&self, target: Symbol) -> Result<Edt0lSystem> {
        let norm = if self.start.len() == 1 && !self.terminal.contains(self.start.letters()[0])
        {
            self.clone()
        } else {
            self.normalize_start()?
        };
        let old = norm.start.letters()[0];
        if old == target {
            return Ok(norm);
        }
        if norm.extended.contains(target) {
            return Err(Error::InvalidSystem(format!(
                "start rename target {target} already occurs in the system"
            )));
        }
        let mut ren = HashMap::new();
        ren.insert(old, target);
        Ok(norm.rename_letters(&ren))
    }

    fn merge_tables(
        a_tables: Vec<(String, MonoidMap)>,
        b_tables: Vec<(String, MonoidMap)>,
        extended: &Alphabet,
    ) -> Result<(Vec<(String, MonoidMap)>, Vec<TableId>, Vec<TableId>)> {
        let mut merged: Vec<(String, MonoidMap)> = Vec::new();
        let mut index: HashMap<Vec<(Symbol, Word)>, TableId> = HashMap::new();
        let mut push = |name: String, map: MonoidMap| -> Result<TableId> {
            let map = map.extend_to(extended, extended)?;
            let key: Vec<(Symbol, Word)> =
                map.images().iter().map(|(s, w)| (*s, w.clone())).collect();
            if let Some(&id) = index.get(&key) {
                return Ok(id);
            }
            let id = merged.len() as TableId;
            let mut final_name = name.clone();
            let mut k = 2;
            while merged.iter().any(|(n, _)| *n == final_name) {
                final_name = format!("{name}#{k}");
                k += 1;
            }
            index.insert(key, id);
            merged.push((final_name, map));
            Ok(id)
        };
        let mut a_ids = Vec::new();
        for (n, m) in a_tables {
            a_ids.push(push(n, m)?);
        }
        let mut b_ids = Vec::new();
        for (n, m) in b_tables {
            b_ids.push(push(n, m)?);
        }
        Ok((merged, a_ids, b_ids))
    }

    fn named_tables(&self) -> Vec<(String, MonoidMap)> {
        self.table_names
            .iter()
            .cloned()
            .zip(self.tables.iter().cloned())
            .collect()
    }

    /// Union of the accepted languages.
    ///
    /// Both operands are brought to a common single-letter nonterminal start
    /// (an α-renaming when the start is already such a letter, otherwise a
    /// one-step seeding) and the controls are ε-linked. Budget: join of the
    /// operand budgets, plus one step per operand that needed seeding.
    pub fn union(&self, other: &Edt0lSystem) -> Result<Edt0lSystem> {
        let (a, b) = self.disjointify(other);
        let bot = Symbol::fresh("⊥");
        let a = a.with_start_symbol(bot)?;
        let b = b.with_start_symbol(bot)?;
        let terminal = a.terminal.union(&b.terminal);
        let extended = a.extended.union(&b.extended);
        let (tables, a_ids, b_ids) =
            Self::merge_tables(a.named_tables(), b.named_tables(), &extended)?;
        let ctl_a = a.control.map_labels(|t| Some(a_ids[*t as usize]));
        let ctl_b = b.control.map_labels(|t| Some(b_ids[*t as usize]));
        let control = ctl_a.union(&ctl_b);
        Edt0lSystem::new(terminal, extended, Word::single(bot), tables, control)
    }

    /// Concatenation of the accepted languages. Requires terminal-fixing
    /// operands (normalized automatically, at one step each when violated).
    /// Budget: componentwise sum of the operand budgets.
    pub fn concat(&self, other: &Edt0lSystem) -> Result<Edt0lSystem> {
        let a = self.make_terminal_fixing()?;
        let b = other.make_terminal_fixing()?;
        let (a, b) = a.disjointify(&b);
        let terminal = a.terminal.union(&b.terminal);
        let extended = a.extended.union(&b.extended);
        let (tables, a_ids, b_ids) =
            Self::merge_tables(a.named_tables(), b.named_tables(), &extended)?;
        let ctl_a = a.control.map_labels(|t| Some(a_ids[*t as usize]));
        let ctl_b = b.control.map_labels(|t| Some(b_ids[*t as usize]));
        let control = ctl_a.concat(&ctl_b);
        Edt0lSystem::new(
            terminal,
            extended,
            a.start.concat(&b.start),
            tables,
            control,
        )
    }

    /// Kleene star of the accepted language.
    ///
    /// Iterations run on hatted copies of the nonterminals; a freeze map
    /// sends leftover hatted letters to a dead letter before the next copy
    /// is spawned, so a copy must finish within its own round. Budget: k
    /// concatenated factors derivable in (s, l) each need
    /// (k·(s + 2) + 1, k·l + 1).
    pub fn star(&self) -> Result<Edt0lSystem> {
        let base = self.make_terminal_fixing()?;
        let hat_tag = 9100usize;
        let mut hat: HashMap<Symbol, Symbol> = HashMap::new();
        for s in base.nonterminals() {
            hat.insert(s, Symbol::copy(s, hat_tag));
        }
        let hatted = base.rename_letters(&hat);
        let bot = Symbol::fresh("⊥");
        let dead = Symbol::fresh("†");
        let mut extended = hatted.extended.clone();
        extended.insert(bot);
        extended.insert(dead);
        let mut seed_images = BTreeMap::new();
        seed_images.insert(bot, hatted.start.concat(&Word::single(bot)));
        let seed = MonoidMap::endo(extended.clone(), seed_images)?;
        let mut freeze_images = BTreeMap::new();
        for (_, &h) in &hat {
            freeze_images.insert(h, Word::single(dead));
        }
        let freeze = MonoidMap::endo(extended.clone(), freeze_images)?;
        let mut finish_images = BTreeMap::new();
        finish_images.insert(bot, Word::empty());
        let finish = MonoidMap::endo(extended.clone(), finish_images)?;

        let mut tables: Vec<(String, MonoidMap)> = hatted
            .table_names
            .iter()
            .cloned()
            .zip(
                hatted
                    .tables
                    .iter()
                    .map(|t| t.extend_to(&extended, &extended))
                    .collect::<Result<Vec<_>>>()?,
            )
            .collect();
        let seed_id = tables.len() as TableId;
        tables.push(("spawn".into(), seed));
        let freeze_id = tables.len() as TableId;
        tables.push(("freeze".into(), freeze));
        let finish_id = tables.len() as TableId;
        tables.push(("finish".into(), finish));

        // states: inner control shifted by 2; 0 = loop hub, 1 = final.
        let n = hatted.control.state_count();
        let mut edges: Vec<(StateId, Option<TableId>, StateId)> = hatted
            .control
            .edges()
            .iter()
            .map(|(p, l, q)| (*p + 2, *l, *q + 2))
            .collect();
        edges.push((0, Some(seed_id), hatted.control.start() + 2));
        for &q in hatted.control.accepts_states() {
            edges.push((q + 2, Some(freeze_id), 0));
        }
        edges.push((0, Some(finish_id), 1));
        let control = Nfa::new(n + 2, edges, 0, [1])?;
        Edt0lSystem::new(
            base.terminal.clone(),
            extended,
            Word::single(bot),
            tables,
            control,
        )
    }

    /// Image of the accepted language under a free monoid homomorphism
    /// Σ* → Σ'*.
    ///
    /// For a terminal-fixing system and a letterwise-idempotent map the
    /// image is folded into the start word and every table: no extra steps,
    /// lengths scaled by the longest letter image. Otherwise the map is
    /// post-composed as a final table (one extra step).
    pub fn hom_image(&self, f: &MonoidMap) -> Result<Edt0lSystem> {
        if !self.terminal.subset_of(f.domain()) {
            return Err(Error::DomainMismatch(
                "homomorphism domain must cover the terminal alphabet".into(),
            ));
        }
        let new_terminal = f.codomain().clone();
        // Nonterminals must stay out of the new terminal alphabet.
        let mut sys = self.clone();
        let mut ren = HashMap::new();
        for s in sys.nonterminals() {
            if new_terminal.contains(s) {
                ren.insert(s, Symbol::fresh(&s.display()));
            }
        }
        if !ren.is_empty() {
            sys = sys.rename_letters(&ren);
        }
        let extended = sys.extended.union(&new_terminal);
        let f_ext = MonoidMap::new(
            extended.clone(),
            extended.clone(),
            f.images()
                .iter()
                .map(|(s, w)| (*s, w.clone()))
                .collect(),
        )?;
        if sys.is_terminal_fixing() && f.is_idempotent() {
            let start = f_ext.apply(&sys.start)?;
            let tables = sys
                .table_names
                .iter()
                .cloned()
                .zip(
                    sys.tables
                        .iter()
                        .map(|t| t.extend_to(&extended, &extended)?.compose(&f_ext))
                        .collect::<Result<Vec<_>>>()?,
                )
                .collect();
            return Edt0lSystem::new(new_terminal, extended, start, tables, sys.control.clone());
        }
        let mut tables = sys
            .table_names
            .iter()
            .cloned()
            .zip(
                sys.tables
                    .iter()
                    .map(|t| t.extend_to(&extended, &extended))
                    .collect::<Result<Vec<_>>>()?,
            )
            .collect::<Vec<_>>();
        let f_id = tables.len() as TableId;
        tables.push(("hom".into(), f_ext));
        let n = sys.control.state_count();
        let mut edges: Vec<(StateId, Option<TableId>, StateId)> = sys
            .control
            .edges()
            .iter()
            .map(|(p, l, q)| (*p, *l, *q))
            .collect();
        for &q in sys.control.accepts_states() {
            edges.push((q, Some(f_id), n));
        }
        let control = Nfa::new(n + 1, edges, sys.control.start(), [n])?;
        Edt0lSystem::new(new_terminal, extended, sys.start.clone(), tables, control)
    }

    /// Intersection of the accepted language with a regular language.
    ///
    /// Letters are annotated with (entry, exit) state pairs of the
    /// ε-eliminated automaton; each table splits the annotation of a letter
    /// across its image, terminal letters keep only transitions the
    /// automaton actually has, and letters with no consistent split map to a
    /// dead letter. The first control step is fused with the seeding of the
    /// annotated start letter, so budgets transfer unchanged for systems
    /// with a single-letter nonterminal start. The family of annotated
    /// tables is materialized eagerly and capped at [`FAMILY_TABLE_CAP`].
    pub fn intersect_regular(&self, r: &Nfa<Symbol>) -> Result<Edt0lSystem> {
        let annotated = self.intersect_regular_annotated(r)?;
        if annotated.control().accepts_states().is_empty() {
            return Ok(annotated);
        }
        // Fold the unannotating map; idempotent, so no extra step for
        // terminal-fixing systems.
        let mut unann_images = BTreeMap::new();
        let mut dom = annotated.terminal().clone();
        let mut cod = self.terminal().clone();
        for a in annotated.terminal().iter() {
            unann_images.insert(a, Word::single(a.base()));
        }
        dom = dom.union(self.terminal());
        cod = cod.union(self.terminal());
        let unann = MonoidMap::new(dom, cod, unann_images)?;
        annotated.hom_image(&unann)
    }

    /// The annotated half of [`intersect_regular`](Self::intersect_regular):
    /// the returned system's terminal letters are state-annotated copies
    /// `a{p,q}` meaning "this letter reads the automaton from p to q", and
    /// its language is the annotated form of the intersection. Useful when
    /// the annotations themselves carry meaning (segment copies, Schreier
    /// transversal states).
    pub fn intersect_regular_annotated(&self, r: &Nfa<Symbol>) -> Result<Edt0lSystem> {
        let aut = r.eliminate_epsilon().trim();
        if aut.accepts_states().is_empty() {
            return Edt0lSystem::new(
                self.terminal.clone(),
                self.terminal.clone(),
                Word::single(
                    self.terminal
                        .iter()
                        .next()
                        .unwrap_or_else(|| Symbol::fresh("∅")),
                ),
                vec![],
                Nfa::empty_language(),
            )
            .and_then(|mut s| {
                // Keep the start word inside the extended alphabet even for
                // an empty terminal alphabet.
                if s.terminal.is_empty() {
                    let filler = Symbol::fresh("∅");
                    s.extended.insert(filler);
                    s.start = Word::single(filler);
                }
                Ok(s)
            });
        }
        let sys = {
            let s = self.clone();
            let single_nonterminal_start =
                s.start.len() == 1 && !s.terminal.contains(s.start.letters()[0]);
            if single_nonterminal_start {
                s
            } else {
                s.normalize_start()?
            }
        };
        let q_states: Vec<StateId> = (0..aut.state_count()).collect();
        let delta = |p: StateId, a: Symbol| -> BTreeSet<StateId> {
            aut.edges()
                .iter()
                .filter(|(s, l, _)| *s == p && *l == Some(a))
                .map(|(_, _, q)| *q)
                .collect()
        };

        // Annotated alphabet.
        let ann = |c: Symbol, p: StateId, q: StateId| Symbol::state(c, p as usize, q as usize);
        let mut extended = Alphabet::new();
        let start_letter = sys.start.letters()[0];
        let seed_letter = Symbol::fresh("⊤");
        extended.insert(seed_letter);
        let dead = Symbol::fresh("†");
        extended.insert(dead);
        let mut terminal = Alphabet::new();
        for c in sys.extended.iter() {
            for &p in &q_states {
                for &q in &q_states {
                    let a = ann(c, p, q);
                    extended.insert(a);
                    if sys.terminal.contains(c) && delta(p, c).contains(&q) {
                        terminal.insert(a);
                    }
                }
            }
        }

        // All annotated splits of the image of `c` between states p and q.
        let splits = |img: &Word, p: StateId, q: StateId| -> Vec<Word> {
            let mut partial: Vec<(StateId, Vec<Symbol>)> = vec![(p, Vec::new())];
            for (i, &x) in img.letters().iter().enumerate() {
                let last = i + 1 == img.len();
                let mut next = Vec::new();
                for (cur, letters) in &partial {
                    let exits: Vec<StateId> = if sys.terminal.contains(x) {
                        delta(*cur, x).into_iter().collect()
                    } else {
                        q_states.clone()
                    };
                    for e in exits {
                        if last && e != q {
                            continue;
                        }
                        let mut ls = letters.clone();
                        ls.push(ann(x, *cur, e));
                        next.push((e, ls));
                    }
                }
                partial = next;
            }
            partial
                .into_iter()
                .filter(|(end, _)| *end == q)
                .map(|(_, ls)| Word::from_letters(ls))
                .collect()
        };

        // Per base table: the product family of annotated tables.
        let mut tables: Vec<(String, MonoidMap)> = Vec::new();
        let mut family: Vec<Vec<TableId>> = Vec::new();
        for (ti, t) in sys.tables.iter().enumerate() {
            // Choice lists per annotated letter; singletons are fixed.
            let mut choice_letters: Vec<(Symbol, Vec<Word>)> = Vec::new();
            let mut fixed: BTreeMap<Symbol, Word> = BTreeMap::new();
            for c in sys.extended.iter() {
                let img = t.image_of(c);
                for &p in &q_states {
                    for &q in &q_states {
                        let letter = ann(c, p, q);
                        if img.letters() == [c] {
                            // Identity image: the unique split keeps the
                            // annotation, when consistent.
                            let ok = if sys.terminal.contains(c) {
                                delta(p, c).contains(&q)
                            } else {
                                true
                            };
                            if !ok {
                                fixed.insert(letter, Word::single(dead));
                            }
                            continue;
                        }
                        let mut opts = splits(&img, p, q);
                        if img.is_empty() && p != q {
                            opts.clear();
                        }
                        match opts.len() {
                            0 => {
                                fixed.insert(letter, Word::single(dead));
                            }
                            1 => {
                                fixed.insert(letter, opts.pop().unwrap());
                            }
                            _ => choice_letters.push((letter, opts)),
                        }
                    }
                }
            }
            let mut combos: Vec<BTreeMap<Symbol, Word>> = vec![fixed];
            for (letter, opts) in &choice_letters {
                if combos.len() * opts.len() > FAMILY_TABLE_CAP {
                    return Err(Error::CapExceeded(format!(
                        "annotated table family for {} exceeds {FAMILY_TABLE_CAP}",
                        sys.table_names[ti]
                    )));
                }
                let mut next = Vec::with_capacity(combos.len() * opts.len());
                for combo in &combos {
                    for o in opts {
                        let mut c2 = combo.clone();
                        c2.insert(*letter, o.clone());
                        next.push(c2);
                    }
                }
                combos = next;
            }
            let mut ids = Vec::new();
            for (k, images) in combos.into_iter().enumerate() {
                let name = if k == 0 {
                    format!("{}'", sys.table_names[ti])
                } else {
                    format!("{}'{}", sys.table_names[ti], k)
                };
                let id = tables.len() as TableId;
                tables.push((name, MonoidMap::endo(extended.clone(), images)?));
                ids.push(id);
            }
            family.push(ids);
        }

        // Control: base shape with each φ-edge fanned out over its family;
        // the first step is fused with the annotation of the start letter.
        let n = sys.control.state_count();
        let mut edges: Vec<(StateId, Option<TableId>, StateId)> = Vec::new();
        for (p, l, q) in sys.control.edges() {
            match l {
                None => edges.push((*p + 1, None, *q + 1)),
                Some(t) => {
                    for &id in &family[*t as usize] {
                        edges.push((*p + 1, Some(id), *q + 1));
                    }
                }
            }
        }
        // Seed-composite first steps from the fresh start state 0.
        let start_closure = {
            let s = BTreeSet::from([sys.control.start()]);
            sys.control.closure(&s)
        };
        let mut seed_count = 0usize;
        for (p, l, q) in sys.control.edges() {
            let Some(t) = l else { continue };
            if !start_closure.contains(p) {
                continue;
            }
            for &id in &family[*t as usize] {
                for &f in aut.accepts_states() {
                    // ⊤ ↦ (image of the start letter annotated (q₀, f)).
                    let annotated = ann(start_letter, aut.start(), f);
                    let img = tables[id as usize].1.image_of(annotated);
                    let mut images: BTreeMap<Symbol, Word> =
                        tables[id as usize].1.images().clone();
                    images.insert(seed_letter, img);
                    seed_count += 1;
                    if seed_count > FAMILY_TABLE_CAP {
                        return Err(Error::CapExceeded(
                            "seed-composite family exceeds the table cap".into(),
                        ));
                    }
                    let sid = tables.len() as TableId;
                    tables.push((
                        format!("seed'{}", sid),
                        MonoidMap::endo(extended.clone(), images)?,
                    ));
                    edges.push((0, Some(sid), *q + 1));
                }
            }
        }
        let accepts: Vec<StateId> = sys
            .control
            .accepts_states()
            .iter()
            .map(|q| q + 1)
            .collect();
        let control = Nfa::new(n + 1, edges, 0, accepts)?.trim();
        Edt0lSystem::new(
            terminal,
            extended,
            Word::single(seed_letter),
            tables,
            control,
        )
    }
}

/// Regular languages are EDT0L: one nonterminal per automaton state, a
/// table per edge appending the letter, and erasing tables at accepts.
/// Enumerating with budget (steps ≥ wordlen + 1, len ≥ wordlen + 1) agrees
/// with the automaton's own bounded enumeration.
pub fn nfa_to_edt0l(aut: &Nfa<Symbol>, alphabet: &Alphabet) -> Result<Edt0lSystem> {
    let a = aut.eliminate_epsilon().trim();
    let terminal = alphabet.clone();
    let mut extended = terminal.clone();
    let state_syms: Vec<Symbol> = (0..a.state_count())
        .map(|q| Symbol::fresh(&format!("Q{q}_")))
        .collect();
    for &s in &state_syms {
        extended.insert(s);
    }
    if a.accepts_states().is_empty() || a.state_count() == 0 {
        let filler = Symbol::fresh("∅");
        let mut ext = terminal.clone();
        ext.insert(filler);
        return Edt0lSystem::new(
            terminal,
            ext,
            Word::single(filler),
            vec![],
            Nfa::empty_language(),
        );
    }
    let mut tables: Vec<(String, MonoidMap)> = Vec::new();
    let mut edges_ctl: Vec<(StateId, Option<TableId>, StateId)> = Vec::new();
    for (i, (p, l, q)) in a.edges().iter().enumerate() {
        let Some(letter) = l else { continue };
        let mut images = BTreeMap::new();
        images.insert(
            state_syms[*p as usize],
            Word::from_letters([*letter, state_syms[*q as usize]]),
        );
        let id = tables.len() as TableId;
        tables.push((format!("e{i}"), MonoidMap::endo(extended.clone(), images)?));
        edges_ctl.push((0, Some(id), 0));
    }
    for &q in a.accepts_states() {
        let mut images = BTreeMap::new();
        images.insert(state_syms[q as usize], Word::empty());
        let id = tables.len() as TableId;
        tables.push((
            format!("acc{q}"),
            MonoidMap::endo(extended.clone(), images)?,
        ));
        edges_ctl.push((0, Some(id), 1));
    }
    let control = Nfa::new(2, edges_ctl, 0, [1])?;
    Edt0lSystem::new(
        terminal,
        extended,
        Word::single(state_syms[a.start() as usize]),
        tables,
        control,
    )
}

/// Serializable document form; canonical field and key order so that
/// serialize → parse → serialize is byte-identical.
#[derive(Serialize, Deserialize)]
pub struct Edt0lDoc {
    pub terminal: Alphabet,
    pub extended: Alphabet,
    pub start: Word,
    pub endomorphisms: Vec<EndoDoc>,
    pub control: NfaDoc,
}

#[derive(Serialize, Deserialize)]
pub struct EndoDoc {
    pub name: String,
    pub images: BTreeMap<String, Vec<String>>,
}

impl Edt0lSystem {
    pub fn to_doc(&self) -> Edt0lDoc {
        let endos = self
            .table_names
            .iter()
            .zip(&self.tables)
            .map(|(name, t)| EndoDoc {
                name: name.clone(),
                images: t
                    .images()
                    .iter()
                    .map(|(s, w)| {
                        (
                            s.display(),
                            w.letters().iter().map(|l| l.display()).collect(),
                        )
                    })
                    .collect(),
            })
            .collect();
        Edt0lDoc {
            terminal: self.terminal.clone(),
            extended: self.extended.clone(),
            start: self.start.clone(),
            endomorphisms: endos,
            control: self
                .control
                .to_doc(|t| self.table_names[*t as usize].clone()),
        }
    }

    pub fn from_doc(doc: &Edt0lDoc) -> Result<Edt0lSystem> {
        let extended = doc.extended.clone();
        let tables: Vec<(String, MonoidMap)> = doc
            .endomorphisms
            .iter()
            .map(|e| {
                let images = e
                    .images
                    .iter()
                    .map(|(s, ls)| {
                        (
                            Symbol::new(s),
                            Word::from_letters(ls.iter().map(|l| Symbol::new(l))),
                        )
                    })
                    .collect();
                Ok((e.name.clone(), MonoidMap::endo(extended.clone(), images)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let name_to_id: HashMap<&str, TableId> = tables
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), i as TableId))
            .collect();
        let control = Nfa::from_doc(&doc.control, |name| {
            name_to_id
                .get(name)
                .copied()
                .ok_or_else(|| Error::Parse(format!("control references unknown table {name}")))
        })?;
        Edt0lSystem::new(
            doc.terminal.clone(),
            extended,
            doc.start.clone(),
            tables,
            control,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Edt0lSystem> {
        let doc: Edt0lDoc = serde_json::from_str(text)?;
        Edt0lSystem::from_doc(&doc)
    }

    /// DOT rendering of the control automaton in the style of the figures.
    pub fn control_dot(&self, name: &str) -> String {
        self.control
            .to_dot(name, |t| self.table_names[*t as usize].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{anan_system, finite_language_system, squares_system};

    fn a_word(n: usize) -> Word {
        Word::from_letters(vec![Symbol::new("a"); n])
    }

    fn empty_system(terminal: &Alphabet) -> Edt0lSystem {
        finite_language_system(terminal, &[]).unwrap()
    }

    #[test]
    fn trivial_control_yields_start() {
        // Control accepting only the empty label word, ω ∈ Σ*.
        let terminal = Alphabet::of(&["x"]);
        let control = Nfa::epsilon();
        let sys = Edt0lSystem::new(
            terminal.clone(),
            terminal,
            Word::parse("x x"),
            vec![],
            control,
        )
        .unwrap();
        let got = sys.enumerate(DerivationBudget::new(0, 10)).unwrap();
        assert_eq!(got, BTreeSet::from([Word::parse("x x")]));
    }

    #[test]
    fn epsilon_start_zero_budget() {
        let terminal = Alphabet::of(&["x"]);
        let sys = Edt0lSystem::new(
            terminal.clone(),
            terminal,
            Word::empty(),
            vec![],
            Nfa::epsilon(),
        )
        .unwrap();
        assert!(sys
            .member_bounded(&Word::empty(), DerivationBudget::new(0, 0))
            .unwrap());
    }

    #[test]
    fn budget_monotone() {
        let sys = squares_system();
        let small = sys.enumerate(DerivationBudget::new(6, 30)).unwrap();
        let big = sys.enumerate(DerivationBudget::new(8, 50)).unwrap();
        assert!(small.is_subset(&big));
    }

    #[test]
    fn witnesses_replay() {
        let sys = squares_system();
        for d in sys
            .enumerate_witnessed(DerivationBudget::new(8, 50), true)
            .unwrap()
        {
            assert_eq!(sys.replay(&d.path).unwrap(), d.word);
            let forms = d.intermediates.unwrap();
            assert_eq!(forms.last().unwrap(), &d.word);
        }
    }

    #[test]
    fn normalize_start_shifts_budget_by_one() {
        let sys = anan_system();
        let norm = sys.normalize_start().unwrap();
        assert_eq!(norm.start().len(), 1);
        let orig = sys.enumerate(DerivationBudget::new(8, 50)).unwrap();
        let shifted = norm.enumerate(DerivationBudget::new(9, 50)).unwrap();
        assert_eq!(orig, shifted);
    }

    #[test]
    fn normalize_start_single_letter_unchanged() {
        let sys = squares_system();
        let norm = sys.normalize_start().unwrap();
        assert_eq!(norm.start(), sys.start());
    }

    #[test]
    fn union_with_empty_language_budget_exact() {
        // Single-letter nonterminal start: union is budget-exact.
        let sys = squares_system();
        let empty = empty_system(sys.terminal());
        let u = sys.union(&empty).unwrap();
        let b = DerivationBudget::new(8, 50);
        assert_eq!(u.enumerate(b).unwrap(), sys.enumerate(b).unwrap());
    }

    #[test]
    fn union_with_empty_language_seeded_operand() {
        // Multi-letter start: the operand is seeded first, one extra step.
        let sys = anan_system();
        let empty = empty_system(sys.terminal());
        let u = sys.union(&empty).unwrap();
        assert_eq!(
            u.enumerate(DerivationBudget::new(7, 50)).unwrap(),
            sys.enumerate(DerivationBudget::new(6, 50)).unwrap()
        );
    }

    #[test]
    fn union_of_singletons() {
        let terminal = Alphabet::of(&["a", "b"]);
        let l = finite_language_system(&terminal, &[Word::parse("a")]).unwrap();
        let m = finite_language_system(&terminal, &[Word::parse("b b")]).unwrap();
        let u = l.union(&m).unwrap();
        let got = u.enumerate(DerivationBudget::new(2, 10)).unwrap();
        assert_eq!(
            got,
            BTreeSet::from([Word::parse("a"), Word::parse("b b")])
        );
    }

    #[test]
    fn concat_singletons() {
        let terminal = Alphabet::of(&["a", "b"]);
        let l = finite_language_system(&terminal, &[Word::parse("a")]).unwrap();
        let m = finite_language_system(&terminal, &[Word::parse("b")]).unwrap();
        let c = l.concat(&m).unwrap();
        let got = c.enumerate(DerivationBudget::new(4, 10)).unwrap();
        assert_eq!(got, BTreeSet::from([Word::parse("a b")]));
    }

    #[test]
    fn concat_of_squares_with_itself_gives_sums_of_two_squares() {
        let sys = squares_system();
        let c = sys.concat(&sys).unwrap();
        let got = c.enumerate(DerivationBudget::new(16, 100)).unwrap();
        // Brute-force sums of two positive squares, filtered to ≤ 20.
        let mut expect = BTreeSet::new();
        for m in 1..=4usize {
            for n in 1..=4usize {
                if m * m + n * n <= 20 {
                    expect.insert(a_word(m * m + n * n));
                }
            }
        }
        let got_small: BTreeSet<Word> =
            got.into_iter().filter(|w| w.len() <= 20).collect();
        assert_eq!(got_small, expect);
    }

    #[test]
    fn star_of_aa() {
        let terminal = Alphabet::of(&["a"]);
        let l = finite_language_system(&terminal, &[Word::parse("a a")]).unwrap();
        // finite_language_system derives {aa} in 1 step; iterations cost
        // spawn + derive + freeze = 3 steps each, plus the final finish.
        let s = l.star().unwrap();
        let got = s.enumerate(DerivationBudget::new(10, 50)).unwrap();
        let expect: BTreeSet<Word> =
            [0usize, 2, 4, 6].iter().map(|&n| a_word(n)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn hom_image_collapses_hashes() {
        // aⁿ#aⁿ under # ↦ ε, a⁻¹ ↦ a gives { a^(2n) : n ≥ 0 } on the slice.
        let sys = anan_system();
        let a = Symbol::new("a");
        let ainv = Symbol::new("a^-1");
        let hash = Symbol::new("#");
        let dom = Alphabet::from_symbols([a, ainv, hash]);
        let cod = Alphabet::from_symbols([a]);
        let mut images = BTreeMap::new();
        images.insert(hash, Word::empty());
        images.insert(ainv, Word::single(a));
        let f = MonoidMap::new(dom, cod, images).unwrap();
        let h = sys.hom_image(&f).unwrap();
        // Terminal-fixing + idempotent map: same budget both sides.
        let b = DerivationBudget::new(6, 40);
        let got = h.enumerate(b).unwrap();
        let base = sys.enumerate(b).unwrap();
        let expect: BTreeSet<Word> = base.iter().map(|w| f.apply(w).unwrap()).collect();
        assert_eq!(got, expect);
        assert!(got.contains(&a_word(8)));
        assert!(!got.contains(&a_word(7)));
    }

    #[test]
    fn intersect_squares_with_even_runs() {
        let sys = squares_system();
        let a = Symbol::new("a");
        let even = Nfa::new(2, vec![(0, Some(a), 1), (1, Some(a), 0)], 0, [0]).unwrap();
        let meet = sys.intersect_regular(&even).unwrap();
        let got = meet.enumerate(DerivationBudget::new(10, 100)).unwrap();
        let expect: BTreeSet<Word> = [4usize, 16].iter().map(|&n| a_word(n)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn intersect_budget_preserving() {
        // Exact equality at equal budgets for a terminal-fixing operand
        // with a single-letter nonterminal start.
        let sys = squares_system();
        let a = Symbol::new("a");
        let even = Nfa::new(2, vec![(0, Some(a), 1), (1, Some(a), 0)], 0, [0]).unwrap();
        let meet = sys.intersect_regular(&even).unwrap();
        for budget in [DerivationBudget::new(6, 40), DerivationBudget::new(8, 50)] {
            let lhs = meet.enumerate(budget).unwrap();
            let rhs: BTreeSet<Word> = sys
                .enumerate(budget)
                .unwrap()
                .into_iter()
                .filter(|w| w.len() % 2 == 0)
                .collect();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn regular_to_edt0l_agrees_with_nfa_enumeration() {
        let a = Symbol::new("a");
        let b = Symbol::new("b");
        let alphabet = Alphabet::from_symbols([a, b]);
        let aut = Nfa::new(
            2,
            vec![(0, Some(a), 1), (1, Some(b), 0), (1, Some(b), 1)],
            0,
            [1],
        )
        .unwrap();
        let sys = nfa_to_edt0l(&aut, &alphabet).unwrap();
        let budget = DerivationBudget::new(7, 10);
        let got = sys.enumerate(budget).unwrap();
        let expect: BTreeSet<Word> = aut
            .enumerate(6)
            .into_iter()
            .map(Word::from_letters)
            .collect();
        let got_small: BTreeSet<Word> = got.into_iter().filter(|w| w.len() <= 6).collect();
        assert_eq!(got_small, expect);
    }

    #[test]
    fn json_roundtrip_is_byte_identical() {
        let sys = anan_system();
        let json1 = sys.to_json().unwrap();
        let back = Edt0lSystem::from_json(&json1).unwrap();
        let json2 = back.to_json().unwrap();
        assert_eq!(json1, json2);
        let b = DerivationBudget::new(5, 30);
        assert_eq!(back.enumerate(b).unwrap(), sys.enumerate(b).unwrap());
    }

    #[test]
    fn dot_export_mentions_tables() {
        let sys = squares_system();
        let dot = sys.control_dot("squares");
        assert!(dot.contains("phi_bot"));
        assert!(dot.contains("doublecircle"));
    }

    #[test]
    fn terminal_fixing_detection_and_normalization() {
        let terminal = Alphabet::of(&["a"]);
        let a = Symbol::new("a");
        let mut images = BTreeMap::new();
        images.insert(a, Word::from_letters([a, a]));
        let doubling = MonoidMap::endo(terminal.clone(), images).unwrap();
        let control = Nfa::new(2, vec![(0, Some(0), 1), (0, None, 1)], 0, [1]).unwrap();
        let sys = Edt0lSystem::new(
            terminal.clone(),
            terminal,
            Word::single(a),
            vec![("dbl".into(), doubling)],
            control,
        )
        .unwrap();
        assert!(!sys.is_terminal_fixing());
        let fixed = sys.make_terminal_fixing().unwrap();
        assert!(fixed.is_terminal_fixing());
        // One extra unbarring step.
        let orig = sys.enumerate(DerivationBudget::new(1, 10)).unwrap();
        let now = fixed.enumerate(DerivationBudget::new(2, 10)).unwrap();
        assert_eq!(orig, now);
    }
}
