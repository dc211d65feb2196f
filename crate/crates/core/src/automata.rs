//! NFAs with ε-moves over arbitrary label alphabets, the regular-closure
//! constructions (union, intersection, homomorphic image and preimage),
//! bounded enumeration, trimming, DOT export and a small rational-expression
//! layer compiled by Thompson-style induction.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::words::{MonoidMap, Symbol, Word};

pub type StateId = u32;

/// A nondeterministic finite automaton; `None` labels are ε-moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa<L> {
    state_count: u32,
    edges: Vec<(StateId, Option<L>, StateId)>,
    start: StateId,
    accepts: BTreeSet<StateId>,
}

impl<L: Clone + Eq + Hash + Ord> Nfa<L> {
    pub fn new(
        state_count: u32,
        edges: Vec<(StateId, Option<L>, StateId)>,
        start: StateId,
        accepts: impl IntoIterator<Item = StateId>,
    ) -> Result<Nfa<L>> {
        let accepts: BTreeSet<StateId> = accepts.into_iter().collect();
        if start >= state_count {
            return Err(Error::InvalidAutomaton("start state out of range".into()));
        }
        for &q in &accepts {
            if q >= state_count {
                return Err(Error::InvalidAutomaton("accept state out of range".into()));
            }
        }
        for (p, _, q) in &edges {
            if *p >= state_count || *q >= state_count {
                return Err(Error::InvalidAutomaton("edge endpoint out of range".into()));
            }
        }
        Ok(Nfa {
            state_count,
            edges,
            start,
            accepts,
        })
    }

    /// Automaton accepting the empty language.
    pub fn empty_language() -> Nfa<L> {
        Nfa {
            state_count: 1,
            edges: Vec::new(),
            start: 0,
            accepts: BTreeSet::new(),
        }
    }

    /// Automaton accepting exactly {ε}.
    pub fn epsilon() -> Nfa<L> {
        Nfa {
            state_count: 1,
            edges: Vec::new(),
            start: 0,
            accepts: BTreeSet::from([0]),
        }
    }

    /// Accepts exactly the given word.
    pub fn single_word(w: &[L]) -> Nfa<L> {
        let n = w.len() as u32 + 1;
        let edges = w
            .iter()
            .enumerate()
            .map(|(i, l)| (i as u32, Some(l.clone()), i as u32 + 1))
            .collect();
        Nfa {
            state_count: n,
            edges,
            start: 0,
            accepts: BTreeSet::from([n - 1]),
        }
    }

    /// Accepts every word over `labels` (one all-accepting state with loops).
    pub fn all_words(labels: impl IntoIterator<Item = L>) -> Nfa<L> {
        let edges = labels.into_iter().map(|l| (0, Some(l), 0)).collect();
        Nfa {
            state_count: 1,
            edges,
            start: 0,
            accepts: BTreeSet::from([0]),
        }
    }

    pub fn state_count(&self) -> u32 {
        self.state_count
    }

    pub fn edges(&self) -> &[(StateId, Option<L>, StateId)] {
        &self.edges
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn accepts_states(&self) -> &BTreeSet<StateId> {
        &self.accepts
    }

    pub fn labels(&self) -> BTreeSet<L> {
        self.edges
            .iter()
            .filter_map(|(_, l, _)| l.clone())
            .collect()
    }

    /// ε-closure of a state set. Closing twice equals closing once.
    pub fn closure(&self, states: &BTreeSet<StateId>) -> BTreeSet<StateId> {
        let mut out = states.clone();
        let mut frontier: Vec<StateId> = states.iter().copied().collect();
        while let Some(q) = frontier.pop() {
            for (p, l, r) in &self.edges {
                if *p == q && l.is_none() && out.insert(*r) {
                    frontier.push(*r);
                }
            }
        }
        out
    }

    fn step(&self, states: &BTreeSet<StateId>, label: &L) -> BTreeSet<StateId> {
        let mut next = BTreeSet::new();
        for (p, l, q) in &self.edges {
            if states.contains(p) && l.as_ref() == Some(label) {
                next.insert(*q);
            }
        }
        self.closure(&next)
    }

    fn start_set(&self) -> BTreeSet<StateId> {
        self.closure(&BTreeSet::from([self.start]))
    }

    fn is_accepting_set(&self, s: &BTreeSet<StateId>) -> bool {
        s.iter().any(|q| self.accepts.contains(q))
    }

    /// True iff some path labelled `w` (ignoring ε-moves) reaches an accept
    /// state. Foreign labels simply fail to match.
    pub fn accepts(&self, w: &[L]) -> bool {
        let mut cur = self.start_set();
        for l in w {
            cur = self.step(&cur, l);
            if cur.is_empty() {
                return false;
            }
        }
        self.is_accepting_set(&cur)
    }

    /// Exactly the accepted words of length ≤ `max_len`. The search expands
    /// only viable prefixes, so the cost is proportional to the number of
    /// distinct live prefixes rather than |labels|^max_len.
    pub fn enumerate(&self, max_len: usize) -> BTreeSet<Vec<L>> {
        let trimmed = self.trim();
        let labels: Vec<L> = trimmed.labels().into_iter().collect();
        let mut out = BTreeSet::new();
        let mut seen: HashSet<(Vec<StateId>, usize)> = HashSet::new();
        let mut queue: VecDeque<(BTreeSet<StateId>, Vec<L>)> = VecDeque::new();
        let start = trimmed.start_set();
        if trimmed.is_accepting_set(&start) {
            out.insert(Vec::new());
        }
        queue.push_back((start, Vec::new()));
        while let Some((set, word)) = queue.pop_front() {
            if word.len() >= max_len {
                continue;
            }
            for l in &labels {
                let next = trimmed.step(&set, l);
                if next.is_empty() {
                    continue;
                }
                let mut w = word.clone();
                w.push(l.clone());
                if trimmed.is_accepting_set(&next) {
                    out.insert(w.clone());
                }
                let key: (Vec<StateId>, usize) = (next.iter().copied().collect(), w.len());
                // Distinct words can share a state set; we still need to
                // extend each word, so the key tracks sets only to bound the
                // sanity check below, not to prune words.
                let _ = seen.insert(key);
                queue.push_back((next, w));
            }
        }
        out
    }

    /// Remove states that are unreachable from the start or from which no
    /// accept state can be reached.
    pub fn trim(&self) -> Nfa<L> {
        let mut reach: HashSet<StateId> = HashSet::from([self.start]);
        let mut frontier = vec![self.start];
        while let Some(q) = frontier.pop() {
            for (p, _, r) in &self.edges {
                if *p == q && reach.insert(*r) {
                    frontier.push(*r);
                }
            }
        }
        let mut coreach: HashSet<StateId> = self.accepts.iter().copied().collect();
        let mut frontier: Vec<StateId> = coreach.iter().copied().collect();
        while let Some(q) = frontier.pop() {
            for (p, _, r) in &self.edges {
                if *r == q && coreach.insert(*p) {
                    frontier.push(*p);
                }
            }
        }
        let keep: Vec<StateId> = (0..self.state_count)
            .filter(|q| reach.contains(q) && coreach.contains(q))
            .collect();
        if keep.is_empty() {
            return Nfa::empty_language();
        }
        let index: HashMap<StateId, StateId> = keep
            .iter()
            .enumerate()
            .map(|(i, &q)| (q, i as StateId))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|(p, _, q)| index.contains_key(p) && index.contains_key(q))
            .map(|(p, l, q)| (index[p], l.clone(), index[q]))
            .collect();
        let accepts = self
            .accepts
            .iter()
            .filter_map(|q| index.get(q).copied())
            .collect::<BTreeSet<_>>();
        if !index.contains_key(&self.start) {
            return Nfa::empty_language();
        }
        Nfa {
            state_count: keep.len() as u32,
            edges,
            start: index[&self.start],
            accepts,
        }
    }

    pub fn is_empty_language(&self) -> bool {
        self.trim().accepts.is_empty()
    }

    fn offset(&self, by: u32) -> Vec<(StateId, Option<L>, StateId)> {
        self.edges
            .iter()
            .map(|(p, l, q)| (p + by, l.clone(), q + by))
            .collect()
    }

    /// ε-linked union: a new start state with ε-edges into both operands.
    pub fn union(&self, other: &Nfa<L>) -> Nfa<L> {
        let n1 = self.state_count;
        let n2 = other.state_count;
        let mut edges = Vec::with_capacity(self.edges.len() + other.edges.len() + 2);
        edges.extend(self.offset(1));
        edges.extend(other.offset(1 + n1));
        edges.push((0, None, self.start + 1));
        edges.push((0, None, other.start + 1 + n1));
        let mut accepts: BTreeSet<StateId> = self.accepts.iter().map(|q| q + 1).collect();
        accepts.extend(other.accepts.iter().map(|q| q + 1 + n1));
        Nfa {
            state_count: 1 + n1 + n2,
            edges,
            start: 0,
            accepts,
        }
    }

    /// Product construction. Shared labels advance both coordinates; every
    /// ε-move of one operand becomes an ε-move of the product that keeps the
    /// other coordinate fixed, one side at a time.
    pub fn intersection(&self, other: &Nfa<L>) -> Nfa<L> {
        let n2 = other.state_count;
        let pair = |p: StateId, q: StateId| p * n2 + q;
        let mut edges = Vec::new();
        for (p, l, p2) in &self.edges {
            match l {
                None => {
                    for q in 0..n2 {
                        edges.push((pair(*p, q), None, pair(*p2, q)));
                    }
                }
                Some(lbl) => {
                    for (q, m, q2) in &other.edges {
                        if m.as_ref() == Some(lbl) {
                            edges.push((pair(*p, *q), Some(lbl.clone()), pair(*p2, *q2)));
                        }
                    }
                }
            }
        }
        for (q, l, q2) in &other.edges {
            if l.is_none() {
                for p in 0..self.state_count {
                    edges.push((pair(p, *q), None, pair(p, *q2)));
                }
            }
        }
        let mut accepts = BTreeSet::new();
        for &p in &self.accepts {
            for &q in &other.accepts {
                accepts.insert(pair(p, q));
            }
        }
        Nfa {
            state_count: self.state_count * n2,
            edges,
            start: pair(self.start, other.start),
            accepts,
        }
        .trim()
    }

    /// Concatenation: ε-edges from the accepts of `self` into `other`.
    pub fn concat(&self, other: &Nfa<L>) -> Nfa<L> {
        let n1 = self.state_count;
        let mut edges = self.edges.clone();
        edges.extend(other.offset(n1));
        for &q in &self.accepts {
            edges.push((q, None, other.start + n1));
        }
        Nfa {
            state_count: n1 + other.state_count,
            edges,
            start: self.start,
            accepts: other.accepts.iter().map(|q| q + n1).collect(),
        }
    }

    /// Kleene star: fresh start/accept state with loop-back ε-edges.
    pub fn star(&self) -> Nfa<L> {
        let mut edges = self.offset(1);
        edges.push((0, None, self.start + 1));
        for &q in &self.accepts {
            edges.push((q + 1, None, 0));
        }
        Nfa {
            state_count: self.state_count + 1,
            edges,
            start: 0,
            accepts: BTreeSet::from([0]),
        }
    }

    /// Relabel edges through `f`; labels mapped to `None` become ε-moves.
    pub fn map_labels<M: Clone + Eq + Hash + Ord>(
        &self,
        f: impl Fn(&L) -> Option<M>,
    ) -> Nfa<M> {
        Nfa {
            state_count: self.state_count,
            edges: self
                .edges
                .iter()
                .map(|(p, l, q)| (*p, l.as_ref().and_then(|x| f(x)), *q))
                .collect(),
            start: self.start,
            accepts: self.accepts.clone(),
        }
    }

    /// Remove ε-moves: same states, every edge (p,a,q) with p --ε*--> p'
    /// --a--> q, and accepts extended along ε-paths.
    pub fn eliminate_epsilon(&self) -> Nfa<L> {
        let mut edges = Vec::new();
        let mut accepts = BTreeSet::new();
        for p in 0..self.state_count {
            let cl = self.closure(&BTreeSet::from([p]));
            if cl.iter().any(|q| self.accepts.contains(q)) {
                accepts.insert(p);
            }
            for (r, l, q) in &self.edges {
                if l.is_some() && cl.contains(r) {
                    let e = (p, l.clone(), *q);
                    if !edges.contains(&e) {
                        edges.push(e);
                    }
                }
            }
        }
        Nfa {
            state_count: self.state_count,
            edges,
            start: self.start,
            accepts,
        }
    }

    /// DOT rendering; accept states are double-circled as in the figures.
    pub fn to_dot(&self, name: &str, label: impl Fn(&L) -> String) -> String {
        let mut out = String::new();
        out.push_str(&format!("digraph \"{name}\" {{\n  rankdir=LR;\n"));
        out.push_str("  __start [shape=point];\n");
        for q in 0..self.state_count {
            let shape = if self.accepts.contains(&q) {
                "doublecircle"
            } else {
                "circle"
            };
            out.push_str(&format!("  q{q} [shape={shape}];\n"));
        }
        out.push_str(&format!("  __start -> q{};\n", self.start));
        for (p, l, q) in &self.edges {
            let lbl = match l {
                None => "ε".to_string(),
                Some(x) => label(x),
            };
            out.push_str(&format!("  q{p} -> q{q} [label=\"{lbl}\"];\n"));
        }
        out.push_str("}\n");
        out
    }
}

impl Nfa<Symbol> {
    /// Homomorphic image: each edge labelled `a` becomes a path labelled
    /// `a f`; empty images become ε-moves.
    pub fn hom_image(&self, f: &MonoidMap) -> Result<Nfa<Symbol>> {
        for l in self.labels() {
            if !f.domain().contains(l) {
                return Err(Error::DomainMismatch(format!(
                    "label {} outside the domain of the homomorphism",
                    l
                )));
            }
        }
        let mut state_count = self.state_count;
        let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = Vec::new();
        for (p, l, q) in &self.edges {
            match l {
                None => edges.push((*p, None, *q)),
                Some(a) => {
                    let img = f.image_of(*a);
                    match img.len() {
                        0 => edges.push((*p, None, *q)),
                        1 => edges.push((*p, Some(img.letters()[0]), *q)),
                        _ => {
                            let mut prev = *p;
                            for (i, &x) in img.letters().iter().enumerate() {
                                let next = if i + 1 == img.len() {
                                    *q
                                } else {
                                    let s = state_count;
                                    state_count += 1;
                                    s
                                };
                                edges.push((prev, Some(x), next));
                                prev = next;
                            }
                        }
                    }
                }
            }
        }
        Ok(Nfa {
            state_count,
            edges,
            start: self.start,
            accepts: self.accepts.clone(),
        })
    }

    /// Inverse homomorphic image of `self` under `f`, via the barred-copy
    /// construction: K interleaves barred words of the operand with loops
    /// over the preimage alphabet, S forces the grouping (af barred)·a, and
    /// the erasing map τ keeps the unbarred letters. The preimage equals
    /// (K ∩ S)τ.
    pub fn hom_preimage(&self, f: &MonoidMap) -> Result<Nfa<Symbol>> {
        for l in self.labels() {
            if !f.codomain().contains(l) {
                return Err(Error::DomainMismatch(format!(
                    "label {} of the automaton missing from the homomorphism codomain",
                    l
                )));
            }
        }
        let bar = |s: Symbol| Symbol::copy(s, usize::MAX - 1);
        // K: the operand with letters barred and a self-loop for every
        // preimage letter at every state.
        let mut k = self.map_labels(|l| Some(bar(*l)));
        let mut k_edges = k.edges.clone();
        for q in 0..k.state_count {
            for a in f.domain().iter() {
                k_edges.push((q, Some(a), q));
            }
        }
        k.edges = k_edges;
        // S: a hub with one loop (af barred)·a per preimage letter a.
        let mut s_edges: Vec<(StateId, Option<Symbol>, StateId)> = Vec::new();
        let mut s_states = 1u32;
        for a in f.domain().iter() {
            let img = f.image_of(a);
            let mut prev = 0u32;
            for &x in img.letters() {
                let next = s_states;
                s_states += 1;
                s_edges.push((prev, Some(bar(x)), next));
                prev = next;
            }
            s_edges.push((prev, Some(a), 0));
        }
        let s = Nfa {
            state_count: s_states,
            edges: s_edges,
            start: 0,
            accepts: BTreeSet::from([0]),
        };
        let meet = k.intersection(&s);
        // τ erases barred letters.
        Ok(meet.map_labels(|l| match l.decoration() {
            crate::words::Decoration::Copy { tag, .. } if tag == usize::MAX - 1 => None,
            _ => Some(*l),
        })
        .trim())
    }
}

/// Either closure combination from the regular-closure lemma.
pub fn nfa_combine<L: Clone + Eq + Hash + Ord>(
    kind: CombineKind,
    a: &Nfa<L>,
    b: &Nfa<L>,
) -> Nfa<L> {
    match kind {
        CombineKind::Union => a.union(b),
        CombineKind::Intersection => a.intersection(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Union,
    Intersection,
}

/// Rational expressions over an arbitrary label type, compiled to NFAs by
/// structural induction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RatExpr<L> {
    Empty,
    Epsilon,
    Label(L),
    Concat(Vec<RatExpr<L>>),
    Union(Vec<RatExpr<L>>),
    Star(Box<RatExpr<L>>),
}

impl<L: Clone + Eq + Hash + Ord> RatExpr<L> {
    pub fn to_nfa(&self) -> Nfa<L> {
        match self {
            RatExpr::Empty => Nfa::empty_language(),
            RatExpr::Epsilon => Nfa::epsilon(),
            RatExpr::Label(l) => Nfa::single_word(std::slice::from_ref(l)),
            RatExpr::Concat(parts) => {
                let mut acc = Nfa::epsilon();
                for p in parts {
                    acc = acc.concat(&p.to_nfa());
                }
                acc
            }
            RatExpr::Union(parts) => {
                let mut acc = Nfa::empty_language();
                for p in parts {
                    acc = acc.union(&p.to_nfa());
                }
                acc
            }
            RatExpr::Star(inner) => inner.to_nfa().star(),
        }
    }
}

impl RatExpr<String> {
    /// Parse `name (x y)* (u | v) ...`: juxtaposition concatenates, `|`
    /// unions (binding loosest), `*` stars the preceding atom, names are
    /// any run of non-delimiter characters.
    pub fn parse(text: &str) -> Result<RatExpr<String>> {
        let mut tokens = Vec::new();
        let mut cur = String::new();
        for c in text.chars() {
            match c {
                '(' | ')' | '*' | '|' => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                    tokens.push(c.to_string());
                }
                c if c.is_whitespace() => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
        let mut pos = 0usize;
        let expr = Self::parse_union(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!(
                "trailing tokens in rational expression at {}",
                tokens[pos]
            )));
        }
        Ok(expr)
    }

    fn parse_union(tokens: &[String], pos: &mut usize) -> Result<RatExpr<String>> {
        let mut parts = vec![Self::parse_concat(tokens, pos)?];
        while *pos < tokens.len() && tokens[*pos] == "|" {
            *pos += 1;
            parts.push(Self::parse_concat(tokens, pos)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RatExpr::Union(parts)
        })
    }

    fn parse_concat(tokens: &[String], pos: &mut usize) -> Result<RatExpr<String>> {
        let mut parts = Vec::new();
        while *pos < tokens.len() {
            match tokens[*pos].as_str() {
                "|" | ")" => break,
                _ => parts.push(Self::parse_postfix(tokens, pos)?),
            }
        }
        Ok(match parts.len() {
            0 => RatExpr::Epsilon,
            1 => parts.pop().unwrap(),
            _ => RatExpr::Concat(parts),
        })
    }

    fn parse_postfix(tokens: &[String], pos: &mut usize) -> Result<RatExpr<String>> {
        let mut expr = Self::parse_atom(tokens, pos)?;
        while *pos < tokens.len() && tokens[*pos] == "*" {
            *pos += 1;
            expr = RatExpr::Star(Box::new(expr));
        }
        Ok(expr)
    }

    fn parse_atom(tokens: &[String], pos: &mut usize) -> Result<RatExpr<String>> {
        let Some(tok) = tokens.get(*pos) else {
            return Err(Error::Parse("dangling operator".into()));
        };
        match tok.as_str() {
            "(" => {
                *pos += 1;
                let inner = Self::parse_union(tokens, pos)?;
                if tokens.get(*pos).map(String::as_str) != Some(")") {
                    return Err(Error::Parse("unbalanced parentheses".into()));
                }
                *pos += 1;
                Ok(inner)
            }
            ")" | "*" | "|" => Err(Error::Parse(format!("unexpected token {tok}"))),
            name => {
                *pos += 1;
                Ok(RatExpr::Label(name.to_string()))
            }
        }
    }
}

/// Serializable form used by the shared JSON schema.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct NfaDoc {
    pub states: u32,
    pub edges: Vec<(StateId, Option<String>, StateId)>,
    pub start: StateId,
    pub accepts: Vec<StateId>,
}

impl<L: Clone + Eq + Hash + Ord> Nfa<L> {
    pub fn to_doc(&self, label: impl Fn(&L) -> String) -> NfaDoc {
        let mut edges: Vec<(StateId, Option<String>, StateId)> = self
            .edges
            .iter()
            .map(|(p, l, q)| (*p, l.as_ref().map(&label), *q))
            .collect();
        edges.sort();
        NfaDoc {
            states: self.state_count,
            edges,
            start: self.start,
            accepts: self.accepts.iter().copied().collect(),
        }
    }

    pub fn from_doc(doc: &NfaDoc, label: impl Fn(&str) -> Result<L>) -> Result<Nfa<L>> {
        let edges = doc
            .edges
            .iter()
            .map(|(p, l, q)| {
                Ok((
                    *p,
                    match l {
                        None => None,
                        Some(s) => Some(label(s)?),
                    },
                    *q,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Nfa::new(doc.states, edges, doc.start, doc.accepts.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;
    use std::collections::BTreeMap;

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    fn aa_star() -> Nfa<Symbol> {
        // (aa)*
        Nfa::new(
            2,
            vec![(0, Some(sym("a")), 1), (1, Some(sym("a")), 0)],
            0,
            [0],
        )
        .unwrap()
    }

    fn aaa_star() -> Nfa<Symbol> {
        Nfa::new(
            3,
            vec![
                (0, Some(sym("a")), 1),
                (1, Some(sym("a")), 2),
                (2, Some(sym("a")), 0),
            ],
            0,
            [0],
        )
        .unwrap()
    }

    /// Brute-force language slice via `accepts`, for cross-checking the
    /// constructions against their set-level definitions.
    fn slice(n: &Nfa<Symbol>, letters: &[Symbol], max_len: usize) -> BTreeSet<Vec<Symbol>> {
        let mut out = BTreeSet::new();
        let mut frontier: Vec<Vec<Symbol>> = vec![Vec::new()];
        while let Some(w) = frontier.pop() {
            if n.accepts(&w) {
                out.insert(w.clone());
            }
            if w.len() < max_len {
                for &l in letters {
                    let mut v = w.clone();
                    v.push(l);
                    frontier.push(v);
                }
            }
        }
        out
    }

    #[test]
    fn accepts_even_a_runs() {
        let n = aa_star();
        assert!(n.accepts(&[sym("a"); 4]));
        assert!(!n.accepts(&[sym("a"); 3]));
        assert!(n.accepts(&[]));
    }

    #[test]
    fn paper_control_accepts_id_plus_plus_phi() {
        // The aⁿ#aⁿ rational control as an NFA over four endomorphism names.
        let id = "id".to_string();
        let plus = "phi+".to_string();
        let minus = "phi-".to_string();
        let phi = "phi".to_string();
        let n = Nfa::new(
            4,
            vec![
                (0, Some(id.clone()), 1),
                (0, Some(id.clone()), 2),
                (1, Some(plus.clone()), 1),
                (2, Some(minus.clone()), 2),
                (1, Some(phi.clone()), 3),
                (2, Some(phi.clone()), 3),
            ],
            0,
            [3],
        )
        .unwrap();
        assert!(n.accepts(&[id.clone(), plus.clone(), plus.clone(), phi.clone()]));
        assert!(!n.accepts(&[id.clone(), plus.clone(), minus.clone(), phi.clone()]));
        // Enumeration to length 3 gives the three shortest accepted words.
        let words = n.enumerate(3);
        let expect: BTreeSet<Vec<String>> = BTreeSet::from([
            vec![id.clone(), phi.clone()],
            vec![id.clone(), plus, phi.clone()],
            vec![id, minus, phi],
        ]);
        assert_eq!(words, expect);
    }

    #[test]
    fn union_with_empty_is_identity() {
        let n = aa_star();
        let u = n.union(&Nfa::empty_language());
        let letters = [sym("a"), sym("b")];
        assert_eq!(slice(&u, &letters, 5), slice(&n, &letters, 5));
    }

    #[test]
    fn intersection_of_cycles() {
        // (aa)* ∩ (aaa)* = (a⁶)*, checked to length 18.
        let meet = aa_star().intersection(&aaa_star());
        for len in 0..=18 {
            let w = vec![sym("a"); len];
            assert_eq!(meet.accepts(&w), len % 6 == 0, "length {len}");
        }
    }

    #[test]
    fn intersection_with_all_words() {
        let n = aa_star();
        let all = Nfa::all_words([sym("a"), sym("b")]);
        let meet = n.intersection(&all);
        let letters = [sym("a"), sym("b")];
        assert_eq!(slice(&meet, &letters, 5), slice(&n, &letters, 5));
    }

    #[test]
    fn hom_image_of_ab_star() {
        // (ab)* under a↦c, b↦ε gives c*.
        let a = sym("a");
        let b = sym("b");
        let c = sym("c");
        let ab_star = Nfa::new(2, vec![(0, Some(a), 1), (1, Some(b), 0)], 0, [0]).unwrap();
        let alpha = Alphabet::from_symbols([a, b, c]);
        let mut im = BTreeMap::new();
        im.insert(a, Word::single(c));
        im.insert(b, Word::empty());
        let f = MonoidMap::endo(alpha, im).unwrap();
        let img = ab_star.hom_image(&f).unwrap();
        for len in 0..=6 {
            assert!(img.accepts(&vec![c; len]), "c^{len}");
        }
        assert!(!img.accepts(&[a]));
    }

    #[test]
    fn hom_preimage_identity() {
        let a = sym("a");
        let a_star = Nfa::new(1, vec![(0, Some(a), 0)], 0, [0]).unwrap();
        let f = MonoidMap::identity(Alphabet::from_symbols([a]));
        let pre = a_star.hom_preimage(&f).unwrap();
        for len in 0..=5 {
            assert!(pre.accepts(&vec![a; len]));
        }
    }

    #[test]
    fn hom_preimage_of_even_under_doubling() {
        // (aa)* under a↦aa pulls back to a*.
        let a = sym("a");
        let alpha = Alphabet::from_symbols([a]);
        let mut im = BTreeMap::new();
        im.insert(a, Word::from_letters([a, a]));
        let f = MonoidMap::endo(alpha, im).unwrap();
        let pre = aa_star().hom_preimage(&f).unwrap();
        for len in 0..=6 {
            assert!(pre.accepts(&vec![a; len]), "a^{len}");
        }
        assert!(!pre.accepts(&[sym("b")]));
    }

    #[test]
    fn enumerate_even_runs() {
        let n = aa_star();
        let got = n.enumerate(5);
        let expect: BTreeSet<Vec<Symbol>> = BTreeSet::from([
            vec![],
            vec![sym("a"); 2],
            vec![sym("a"); 4],
        ]);
        assert_eq!(got, expect);
        assert!(Nfa::<Symbol>::empty_language().enumerate(7).is_empty());
    }

    #[test]
    fn closure_idempotent() {
        let n = Nfa::new(
            3,
            vec![(0, None, 1), (1, None, 2), (2, Some(sym("a")), 0)],
            0,
            [2],
        )
        .unwrap();
        let once = n.closure(&BTreeSet::from([0]));
        let twice = n.closure(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn constructions_match_set_level_definitions() {
        // Membership in each constructed NFA equals the set-level operation
        // on brute-forced operand languages, words of length ≤ 6, 3 letters.
        let a = sym("a");
        let b = sym("b");
        let c = sym("c");
        let letters = [a, b, c];
        let l = Nfa::new(
            2,
            vec![(0, Some(a), 1), (1, Some(b), 0), (1, Some(c), 1)],
            0,
            [1],
        )
        .unwrap();
        let m = Nfa::new(
            2,
            vec![(0, Some(a), 0), (0, Some(c), 1), (1, Some(b), 1)],
            0,
            [0, 1],
        )
        .unwrap();
        let ls = slice(&l, &letters, 6);
        let ms = slice(&m, &letters, 6);

        let uni = l.union(&m);
        let meet = l.intersection(&m);
        let mut words: Vec<Vec<Symbol>> = vec![vec![]];
        for _ in 0..6 {
            let mut next = Vec::new();
            for w in &words {
                for &x in &letters {
                    let mut v = w.clone();
                    v.push(x);
                    next.push(v);
                }
            }
            words.extend(next.clone());
            words = words.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        }
        for w in &words {
            if w.len() > 6 {
                continue;
            }
            assert_eq!(
                uni.accepts(w),
                ls.contains(w) || ms.contains(w),
                "union on {w:?}"
            );
            assert_eq!(
                meet.accepts(w),
                ls.contains(w) && ms.contains(w),
                "intersection on {w:?}"
            );
        }
    }

    #[test]
    fn ratexpr_parse_and_compile() {
        let e = RatExpr::parse("pb (p1 p2)* p3").unwrap();
        let n = e.to_nfa();
        let w = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        assert!(n.accepts(&w(&["pb", "p3"])));
        assert!(n.accepts(&w(&["pb", "p1", "p2", "p1", "p2", "p3"])));
        assert!(!n.accepts(&w(&["pb", "p2", "p1", "p3"])));

        let u = RatExpr::parse("x* | y z").unwrap().to_nfa();
        assert!(u.accepts(&w(&[])));
        assert!(u.accepts(&w(&["x", "x"])));
        assert!(u.accepts(&w(&["y", "z"])));
        assert!(!u.accepts(&w(&["x", "y"])));
    }

    #[test]
    fn trim_removes_dead_states() {
        let n = Nfa::new(
            4,
            vec![
                (0, Some(sym("a")), 1),
                (0, Some(sym("b")), 2), // 2 is dead
                (3, Some(sym("a")), 1), // 3 unreachable
            ],
            0,
            [1],
        )
        .unwrap();
        let t = n.trim();
        assert_eq!(t.state_count(), 2);
        assert!(t.accepts(&[sym("a")]));
        assert!(!t.accepts(&[sym("b")]));
    }
}
