//! From (twisted) abelian equation systems with semilinear constraints to
//! EDT0L systems for the solution language.
//!
//! Pipeline: flatten to one scalar system, fold each constraint disjunct
//! into extra nonnegative variables, solve the lattice, decompose per sign
//! orthant into uniformly-signed linear sets, and emit one control branch
//! per component: an offset-seeding stage (binary doubling chains for
//! large entries), one pumping table per period, and an erasing finisher.
//! Words come out in the standard normal form a₁^{x₁}⋯a_k^{x_k} per
//! segment, freely reduced because each component pumps every coordinate
//! in one direction only.
//!
//! Solution-language words are produced in the distinct-trailing-hash
//! format w₁#₁w₂#₂⋯wₙ#ₙ used throughout the solver pipelines; fold the
//! hashes to present the usual single-hash form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::abelian::hilbert;
use crate::abelian::linalg::{solve_linear_system, IntMatrix, IntVector};
use crate::abelian::semilinear::{
    coset_to_semilinear, semilinear_to_constraints, SemilinearSet, Sign,
};
use crate::abelian::system::{twisted_to_linear, AbelianEquationSystem};
use crate::automata::{Nfa, StateId};
use crate::edt0l::{BudgetMap, Edt0lSystem, TableId};
use crate::error::{Error, Result};
use crate::separation::indexed_hash;
use crate::words::{Alphabet, MonoidMap, Symbol, Word};

/// Offsets up to this magnitude are seeded in unary; larger entries get a
/// doubling chain so system size stays logarithmic in the constants.
const OFFSET_UNARY_MAX: u64 = 8;

const DISJUNCT_CAP: usize = 10_000;

/// How words are laid out: one segment per variable, each listing the
/// positive generator letters of its coordinates (inverses paired).
#[derive(Clone, Debug)]
pub struct SegmentLayout {
    pub segments: Vec<Vec<Symbol>>,
    pub hash: Symbol,
}

impl SegmentLayout {
    /// n segments of the same k generators.
    pub fn uniform(n: usize, gens: &[Symbol], hash: Symbol) -> SegmentLayout {
        SegmentLayout {
            segments: vec![gens.to_vec(); n],
            hash,
        }
    }

    pub fn total_coords(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    /// The (segment, in-segment) position of a flat coordinate.
    fn coord_letter(&self, flat: usize) -> Symbol {
        let mut rest = flat;
        for seg in &self.segments {
            if rest < seg.len() {
                return seg[rest];
            }
            rest -= seg.len();
        }
        unreachable!("flat coordinate out of range")
    }
}

/// A solved abelian system: the EDT0L system in trailing-hash format, a
/// budget map sound for solution boxes, and the semilinear solution set.
#[derive(Clone, Debug)]
pub struct SolvedAbelian {
    pub system: Edt0lSystem,
    pub budget: BudgetMap,
    pub solutions: SemilinearSet,
    pub layout: SegmentLayout,
}

impl SolvedAbelian {
    /// Fold the indexed hashes to the single-hash solution-language form
    /// {w₁#w₂#⋯#wₙ}. No extra derivation steps.
    pub fn to_solution_language(&self) -> Result<Edt0lSystem> {
        fold_trailing_hashes(&self.system, self.layout.hash, self.layout.segments.len())
    }
}

/// Fold w₁#₁⋯wₙ#ₙ to w₁#⋯#wₙ: the first n−1 indexed hashes become the
/// plain hash, the trailing one vanishes.
pub fn fold_trailing_hashes(
    sys: &Edt0lSystem,
    hash: Symbol,
    n: usize,
) -> Result<Edt0lSystem> {
    let mut images = BTreeMap::new();
    let mut dom = sys.terminal().clone();
    let mut cod = Alphabet::new();
    for s in sys.terminal().iter() {
        if (1..n).any(|i| indexed_hash(hash, i) == s) {
            images.insert(s, Word::single(hash));
            cod.insert(hash);
        } else if indexed_hash(hash, n) == s {
            images.insert(s, Word::empty());
        } else {
            cod.insert(s);
        }
    }
    dom.insert(hash);
    cod.insert(hash);
    let fold = MonoidMap::new(dom, cod, images)?;
    sys.hom_image(&fold)
}

fn gen_word(letter: Symbol, e: &BigInt) -> Result<Word> {
    if e.is_zero() {
        return Ok(Word::empty());
    }
    let l = if e.is_negative() {
        letter.inverse().ok_or_else(|| {
            Error::InvalidSystem(format!("generator {letter} has no inverse letter"))
        })?
    } else {
        letter
    };
    let count = usize::try_from(e.abs()).map_err(|_| {
        Error::CapExceeded("offset entry too large to emit".into())
    })?;
    Ok(Word::from_letters(vec![l; count]))
}

fn to_u64(x: &BigInt) -> u64 {
    u64::try_from(x.abs()).unwrap_or(u64::MAX)
}

/// Emit an EDT0L system accepting
/// { nf(x₁)#₁ nf(x₂)#₂ ⋯ nf(xₙ)#ₙ : x ∈ s } for a semilinear s laid out
/// over the given segments, together with a budget map covering every
/// solution whose coordinates are bounded by the box radius.
pub fn emit_semilinear(s: &SemilinearSet, layout: &SegmentLayout) -> Result<(Edt0lSystem, BudgetMap)> {
    let total = layout.total_coords();
    let nsegs = layout.segments.len();
    if let Some(d) = s.dim() {
        if d != total {
            return Err(Error::DimensionMismatch(format!(
                "semilinear set of dim {d} against layout with {total} coordinates"
            )));
        }
    }
    // Alphabets: generators with inverses, indexed hashes, seed letters.
    let mut terminal = Alphabet::new();
    for seg in &layout.segments {
        for &g in seg {
            terminal.insert(g);
            if let Some(inv) = g.inverse() {
                terminal.insert(inv);
            }
        }
    }
    for i in 1..=nsegs {
        terminal.insert(indexed_hash(layout.hash, i));
    }
    let mut extended = terminal.clone();
    let mut seeds: Vec<Symbol> = Vec::with_capacity(total);
    let mut start = Word::empty();
    {
        let mut flat = 0;
        for (i, seg) in layout.segments.iter().enumerate() {
            for _ in 0..seg.len() {
                let p = Symbol::fresh(&format!("P{flat}_"));
                extended.insert(p);
                seeds.push(p);
                start.push(p);
                flat += 1;
            }
            start.push(indexed_hash(layout.hash, i + 1));
        }
    }

    let mut tables: Vec<(String, MonoidMap)> = Vec::new();
    let mut edges: Vec<(StateId, Option<TableId>, StateId)> = Vec::new();
    let mut state_count: StateId = 2; // 0 = start, 1 = accept
    let mut steps_base: u64 = 0;
    let mut len_slack: u64 = (total + nsegs) as u64;

    for (ci, comp) in s.components.iter().enumerate() {
        // Offset seeding: unary parts in one table, doubling chains for
        // large entries.
        let mut sigma_images: BTreeMap<Symbol, Word> = BTreeMap::new();
        let mut chains: Vec<(usize, Symbol, Symbol, BigInt)> = Vec::new();
        for (flat, e) in comp.offset.0.iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            if to_u64(e) <= OFFSET_UNARY_MAX {
                sigma_images.insert(
                    seeds[flat],
                    gen_word(layout.coord_letter(flat), e)?.concat(&Word::single(seeds[flat])),
                );
            } else {
                let q = Symbol::fresh(&format!("Q{ci}_{flat}_"));
                let m = Symbol::fresh(&format!("M{ci}_{flat}_"));
                extended.insert(q);
                extended.insert(m);
                sigma_images.insert(
                    seeds[flat],
                    Word::from_letters([q, m, seeds[flat]]),
                );
                chains.push((flat, q, m, e.clone()));
            }
        }
        let sigma = MonoidMap::new(extended.clone(), extended.clone(), sigma_images)?;
        let sigma_id = tables.len() as TableId;
        tables.push((format!("seed{ci}"), sigma));
        let chain_start = state_count;
        state_count += 1;
        edges.push((0, Some(sigma_id), chain_start));
        let mut cur = chain_start;
        let mut chain_steps: u64 = 1;

        // Per large coordinate: value built by MSB-to-LSB doubling.
        let mut fin_images: BTreeMap<Symbol, Word> = BTreeMap::new();
        for (flat, q, m, e) in &chains {
            let mag = e.abs();
            let bits = mag.bits();
            for pos in (0..bits - 1).rev() {
                let dbl = MonoidMap::new(
                    extended.clone(),
                    extended.clone(),
                    BTreeMap::from([(*q, Word::from_letters([*q, *q]))]),
                )?;
                let dbl_id = tables.len() as TableId;
                tables.push((format!("dbl{ci}_{flat}_{pos}"), dbl));
                let next = state_count;
                state_count += 1;
                edges.push((cur, Some(dbl_id), next));
                cur = next;
                chain_steps += 1;
                if mag.bit(pos) {
                    let inc = MonoidMap::new(
                        extended.clone(),
                        extended.clone(),
                        BTreeMap::from([(*m, Word::from_letters([*q, *m]))]),
                    )?;
                    let inc_id = tables.len() as TableId;
                    tables.push((format!("inc{ci}_{flat}_{pos}"), inc));
                    let next = state_count;
                    state_count += 1;
                    edges.push((cur, Some(inc_id), next));
                    cur = next;
                    chain_steps += 1;
                }
            }
            let sign = if e.is_negative() {
                BigInt::from(-1)
            } else {
                BigInt::from(1)
            };
            fin_images.insert(*q, gen_word(layout.coord_letter(*flat), &sign)?);
            fin_images.insert(*m, Word::empty());
            len_slack = len_slack.max((total + nsegs) as u64 + 2 * to_u64(e) + 4);
        }
        if !fin_images.is_empty() {
            let fin = MonoidMap::new(extended.clone(), extended.clone(), fin_images)?;
            let fin_id = tables.len() as TableId;
            tables.push((format!("finchain{ci}"), fin));
            let next = state_count;
            state_count += 1;
            edges.push((cur, Some(fin_id), next));
            cur = next;
            chain_steps += 1;
        }

        // Pump loop.
        let pump_state = cur;
        for (pi, period) in comp.periods.iter().enumerate() {
            let mut images: BTreeMap<Symbol, Word> = BTreeMap::new();
            for (flat, e) in period.0.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                images.insert(
                    seeds[flat],
                    gen_word(layout.coord_letter(flat), e)?.concat(&Word::single(seeds[flat])),
                );
            }
            let pump = MonoidMap::new(extended.clone(), extended.clone(), images)?;
            let pump_id = tables.len() as TableId;
            tables.push((format!("pump{ci}_{pi}"), pump));
            edges.push((pump_state, Some(pump_id), pump_state));
        }

        // Finisher: erase the seeds.
        let fin_images: BTreeMap<Symbol, Word> =
            seeds.iter().map(|&p| (p, Word::empty())).collect();
        let fin = MonoidMap::new(extended.clone(), extended.clone(), fin_images)?;
        let fin_id = tables.len() as TableId;
        tables.push((format!("fin{ci}"), fin));
        edges.push((pump_state, Some(fin_id), 1));

        steps_base = steps_base.max(chain_steps + 1 + to_u64(&comp.offset.norm_l1()));
        len_slack = len_slack.max((total + nsegs) as u64 + 2 * to_u64(&comp.offset.norm_l1()) + 4);
    }

    // Tables were created against growing snapshots of the alphabet;
    // re-extend them all over the final alphabet.
    let tables: Vec<(String, MonoidMap)> = tables
        .into_iter()
        .map(|(n, t)| Ok((n, t.extend_to(&extended, &extended)?)))
        .collect::<Result<Vec<_>>>()?;
    let control = Nfa::new(state_count, edges, 0, [1])?;
    let system = Edt0lSystem::new(terminal, extended, start, tables, control)?;
    let budget = BudgetMap {
        steps_base: steps_base as usize + 2,
        steps_per_r: total,
        len_base: len_slack as usize + 8,
        len_per_r: total,
    };
    Ok((system, budget))
}

/// Which route handles sign restrictions (constraint slack variables).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignRoute {
    /// Orthant decomposition and Hilbert bases (primary).
    Arithmetic,
    /// Emit slack segments, intersect with a sign-pattern regular
    /// language, erase the slack segments (the classical route; used as a
    /// cross-check).
    RegularIntersection,
}

/// Compile the solution language of a twisted abelian system with
/// semilinear constraints into an EDT0L system over the given generators,
/// in trailing-hash format.
pub fn abelian_solution_edt0l(
    sys: &AbelianEquationSystem,
    gens: &[Symbol],
    hash: Symbol,
) -> Result<SolvedAbelian> {
    sys.validate()?;
    if gens.len() != sys.rank {
        return Err(Error::DimensionMismatch(
            "one generator letter per coordinate".into(),
        ));
    }
    let layout = SegmentLayout::uniform(sys.var_count, gens, hash);
    let solutions = solve_to_semilinear(sys)?;
    let (system, budget) = emit_semilinear(&solutions, &layout)?;
    Ok(SolvedAbelian {
        system,
        budget,
        solutions,
        layout,
    })
}

/// The semilinear set of all constrained solutions, coordinates grouped k
/// at a time per variable.
pub fn solve_to_semilinear(sys: &AbelianEquationSystem) -> Result<SemilinearSet> {
    let k = sys.rank;
    let kn = k * sys.var_count;
    let (a0, b0) = twisted_to_linear(sys);
    // Disjunct choices: one linear component per constrained variable.
    let mut disjuncts: Vec<Vec<(usize, crate::abelian::semilinear::ConstraintBlock)>> =
        vec![Vec::new()];
    for (v, c) in sys.constraints.iter().enumerate() {
        let Some(set) = c else { continue };
        let blocks = semilinear_to_constraints(set);
        if blocks.is_empty() {
            return Ok(SemilinearSet::empty());
        }
        let mut next = Vec::new();
        for d in &disjuncts {
            for b in &blocks {
                if next.len() >= DISJUNCT_CAP {
                    return Err(Error::CapExceeded(
                        "constraint disjunction too large".into(),
                    ));
                }
                let mut d2 = d.clone();
                d2.push((v, b.clone()));
                next.push(d2);
            }
        }
        disjuncts = next;
    }

    let mut out = SemilinearSet::empty();
    for d in &disjuncts {
        let extra: usize = d.iter().map(|(_, b)| b.periods.len()).sum();
        let cols = kn + extra;
        let rows = a0.rows + d.len() * k;
        let mut a = IntMatrix::zeros(rows, cols);
        let mut b = IntVector::zeros(rows);
        for i in 0..a0.rows {
            for j in 0..a0.cols {
                a[(i, j)] = a0[(i, j)].clone();
            }
            b.0[i] = b0.0[i].clone();
        }
        let mut row = a0.rows;
        let mut ycol = kn;
        for (v, block) in d {
            // x_{v,l} − Σ_i c_i[l]·y_i = d_l
            for l in 0..k {
                a[(row + l, v * k + l)] = BigInt::from(1);
                for (i, p) in block.periods.iter().enumerate() {
                    a[(row + l, ycol + i)] = -p.0[l].clone();
                }
                b.0[row + l] = block.offset.0[l].clone();
            }
            row += k;
            ycol += block.periods.len();
        }
        let Some(coset) = solve_linear_system(&a, &b)? else {
            continue;
        };
        let mut signs = vec![Sign::Free; kn];
        signs.extend(vec![Sign::NonNeg; extra]);
        let sl = coset_to_semilinear(&coset, &signs)?;
        out = out.union(&sl.project(0..kn));
    }
    Ok(out)
}

/// The classical sign-handling route for constrained systems: solve with
/// free slack variables, emit the slack values as extra segments over
/// fresh letters, intersect with the regular language restricting every
/// slack segment to nonnegative powers, and erase the slack segments.
/// Returns the same bounded language as the arithmetic route.
pub fn abelian_solution_edt0l_regular_route(
    sys: &AbelianEquationSystem,
    gens: &[Symbol],
    hash: Symbol,
) -> Result<(Edt0lSystem, BudgetMap)> {
    sys.validate()?;
    let k = sys.rank;
    let kn = k * sys.var_count;
    let (a0, b0) = twisted_to_linear(sys);
    let mut disjunct_systems: Vec<(Edt0lSystem, BudgetMap, usize)> = Vec::new();
    // One emitted system per disjunct (slack counts differ per disjunct).
    let mut disjuncts: Vec<Vec<(usize, crate::abelian::semilinear::ConstraintBlock)>> =
        vec![Vec::new()];
    for (v, c) in sys.constraints.iter().enumerate() {
        let Some(set) = c else { continue };
        let blocks = semilinear_to_constraints(set);
        if blocks.is_empty() {
            disjuncts.clear();
            break;
        }
        let mut next = Vec::new();
        for dsj in &disjuncts {
            for b in &blocks {
                let mut d2 = dsj.clone();
                d2.push((v, b.clone()));
                next.push(d2);
            }
        }
        disjuncts = next;
    }
    for dsj in &disjuncts {
        let extra: usize = dsj.iter().map(|(_, b)| b.periods.len()).sum();
        let cols = kn + extra;
        let rows = a0.rows + dsj.len() * k;
        let mut a = IntMatrix::zeros(rows, cols);
        let mut b = IntVector::zeros(rows);
        for i in 0..a0.rows {
            for j in 0..a0.cols {
                a[(i, j)] = a0[(i, j)].clone();
            }
            b.0[i] = b0.0[i].clone();
        }
        let mut row = a0.rows;
        let mut ycol = kn;
        for (v, block) in dsj {
            for l in 0..k {
                a[(row + l, v * k + l)] = BigInt::from(1);
                for (i, p) in block.periods.iter().enumerate() {
                    a[(row + l, ycol + i)] = -p.0[l].clone();
                }
                b.0[row + l] = block.offset.0[l].clone();
            }
            row += k;
            ycol += block.periods.len();
        }
        let Some(coset) = solve_linear_system(&a, &b)? else {
            continue;
        };
        // All coordinates free: signs handled by the later intersection.
        let sl = coset_to_semilinear(&coset, &vec![Sign::Free; cols])?;
        // Layout: the x segments, then one single-coordinate segment per
        // slack variable over a fresh paired letter.
        let mut layout = SegmentLayout::uniform(sys.var_count, gens, hash);
        let mut slack_letters = Vec::new();
        for i in 0..extra {
            let name = format!("y{i}_");
            let (pos, _neg) = {
                let fresh = Symbol::fresh(&name);
                Symbol::pair(&fresh.display())
            };
            slack_letters.push(pos);
            layout.segments.push(vec![pos]);
        }
        let (emitted, budget) = emit_semilinear(&sl, &layout)?;
        // Sign pattern: slack segments may only use positive letters.
        let nsegs = layout.segments.len();
        let mut edges: Vec<(StateId, Option<Symbol>, StateId)> = Vec::new();
        for (i, seg) in layout.segments.iter().enumerate() {
            let positive_only = i >= sys.var_count;
            for &g in seg {
                edges.push((i as StateId, Some(g), i as StateId));
                if !positive_only {
                    if let Some(inv) = g.inverse() {
                        edges.push((i as StateId, Some(inv), i as StateId));
                    }
                }
            }
            edges.push((
                i as StateId,
                Some(indexed_hash(hash, i + 1)),
                (i + 1) as StateId,
            ));
        }
        let pattern = Nfa::new(nsegs as u32 + 1, edges, 0, [nsegs as StateId])?;
        let constrained = emitted.intersect_regular(&pattern)?;
        // Erase the slack segments and their hashes.
        let mut images = BTreeMap::new();
        let mut dom = constrained.terminal().clone();
        let mut cod = Alphabet::new();
        for s in constrained.terminal().iter() {
            let erase = slack_letters
                .iter()
                .any(|&y| s == y || Some(s) == y.inverse())
                || (sys.var_count + 1..=nsegs).any(|i| s == indexed_hash(hash, i));
            if erase {
                images.insert(s, Word::empty());
            } else {
                cod.insert(s);
            }
        }
        dom = dom.union(&cod);
        let erase = MonoidMap::new(dom, cod, images)?;
        let final_sys = constrained.hom_image(&erase)?;
        disjunct_systems.push((final_sys, budget, extra));
    }
    // Union the disjunct systems.
    let mut iter = disjunct_systems.into_iter();
    let Some((mut acc, mut budget, _)) = iter.next() else {
        // Unsatisfiable: empty system in the right format.
        let layout = SegmentLayout::uniform(sys.var_count, gens, hash);
        let (empty, bm) = emit_semilinear(&SemilinearSet::empty(), &layout)?;
        return Ok((empty, bm));
    };
    for (s, bm, _) in iter {
        acc = acc.union(&s)?;
        budget = budget.join(bm).add_steps(1);
    }
    Ok((acc, budget))
}
