//! Hand-encoded example systems used across the test suites and as CLI
//! demo inputs.

use std::collections::BTreeMap;

use crate::automata::Nfa;
use crate::edt0l::Edt0lSystem;
use crate::error::Result;
use crate::words::{Alphabet, MonoidMap, Symbol, Word};

/// The system accepting { a^(n²) | n ≥ 1 }: extended alphabet
/// {⊥, s, t, u, a}, start word ⊥, control φ_⊥ (φ₁ φ₂)* φ₃ with
/// φ_⊥: ⊥ ↦ tsa, φ₁: s ↦ su, φ₂: t ↦ at, u ↦ ua², φ₃: s,t,u ↦ ε.
pub fn squares_system() -> Edt0lSystem {
    build_squares().expect("squares fixture is well-formed")
}

fn build_squares() -> Result<Edt0lSystem> {
    let a = Symbol::new("a");
    let s = Symbol::new("s");
    let t = Symbol::new("t");
    let u = Symbol::new("u");
    let bot = Symbol::new("⊥");
    let terminal = Alphabet::from_symbols([a]);
    let extended = Alphabet::from_symbols([bot, s, t, u, a]);

    let endo = |images: Vec<(Symbol, Word)>| -> Result<MonoidMap> {
        MonoidMap::endo(extended.clone(), images.into_iter().collect::<BTreeMap<_, _>>())
    };
    let phi_bot = endo(vec![(bot, Word::from_letters([t, s, a]))])?;
    let phi1 = endo(vec![(s, Word::from_letters([s, u]))])?;
    let phi2 = endo(vec![
        (t, Word::from_letters([a, t])),
        (u, Word::from_letters([u, a, a])),
    ])?;
    let phi3 = endo(vec![
        (s, Word::empty()),
        (t, Word::empty()),
        (u, Word::empty()),
    ])?;
    let tables = vec![
        ("phi_bot".to_string(), phi_bot),
        ("phi1".to_string(), phi1),
        ("phi2".to_string(), phi2),
        ("phi3".to_string(), phi3),
    ];
    // q0 --φ_⊥--> q1; q1 --φ₁--> q2; q2 --φ₂--> q1; q1 --φ₃--> q3.
    let control = Nfa::new(
        4,
        vec![
            (0, Some(0), 1),
            (1, Some(1), 2),
            (2, Some(2), 1),
            (1, Some(3), 3),
        ],
        0,
        [3],
    )?;
    Edt0lSystem::new(terminal, extended, Word::single(bot), tables, control)
}

/// The system accepting { aⁿ # aⁿ | n ∈ ℤ }: extended alphabet
/// {⊥, #, a, a⁻¹}, start word ⊥#⊥, control {id·φ₊*·φ, id·φ₋*·φ} with
/// φ₊: ⊥ ↦ ⊥a, φ₋: ⊥ ↦ ⊥a⁻¹, φ: ⊥ ↦ ε.
pub fn anan_system() -> Edt0lSystem {
    build_anan().expect("aⁿ#aⁿ fixture is well-formed")
}

fn build_anan() -> Result<Edt0lSystem> {
    let (a, ainv) = Symbol::pair("a");
    let hash = Symbol::new("#");
    let bot = Symbol::new("⊥");
    let terminal = Alphabet::from_symbols([a, ainv, hash]);
    let extended = Alphabet::from_symbols([bot, hash, a, ainv]);
    let endo = |images: Vec<(Symbol, Word)>| -> Result<MonoidMap> {
        MonoidMap::endo(extended.clone(), images.into_iter().collect::<BTreeMap<_, _>>())
    };
    let id = MonoidMap::identity(extended.clone());
    let plus = endo(vec![(bot, Word::from_letters([bot, a]))])?;
    let minus = endo(vec![(bot, Word::from_letters([bot, ainv]))])?;
    let phi = endo(vec![(bot, Word::empty())])?;
    let tables = vec![
        ("id".to_string(), id),
        ("phi+".to_string(), plus),
        ("phi-".to_string(), minus),
        ("phi".to_string(), phi),
    ];
    // q0 --id--> q1 (φ₊ loop); q0 --id--> q2 (φ₋ loop); both --φ--> q3.
    let control = Nfa::new(
        4,
        vec![
            (0, Some(0), 1),
            (0, Some(0), 2),
            (1, Some(1), 1),
            (2, Some(2), 2),
            (1, Some(3), 3),
            (2, Some(3), 3),
        ],
        0,
        [3],
    )?;
    Edt0lSystem::new(
        terminal,
        extended,
        Word::from_letters([bot, hash, bot]),
        tables,
        control,
    )
}

/// A system accepting exactly the given finite set of words over
/// `terminal`: one seeding table per word from a shared start letter.
pub fn finite_language_system(
    terminal: &Alphabet,
    words: &[Word],
) -> Result<Edt0lSystem> {
    let bot = Symbol::fresh("⊥");
    let mut extended = terminal.clone();
    extended.insert(bot);
    let mut tables = Vec::new();
    let mut edges = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let mut images = BTreeMap::new();
        images.insert(bot, w.clone());
        tables.push((format!("w{i}"), MonoidMap::endo(extended.clone(), images)?));
        edges.push((0u32, Some(i as u32), 1u32));
    }
    let control = Nfa::new(2, edges, 0, [1])?;
    Edt0lSystem::new(terminal.clone(), extended, Word::single(bot), tables, control)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edt0l::DerivationBudget;

    fn a_pow(n: usize) -> Word {
        Word::from_letters(vec![Symbol::new("a"); n])
    }

    #[test]
    fn squares_enumeration_at_paper_budget() {
        let sys = squares_system();
        let got = sys.enumerate(DerivationBudget::new(8, 50)).unwrap();
        let expect: std::collections::BTreeSet<Word> =
            [1usize, 4, 9, 16].iter().map(|&n| a_pow(n)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn squares_membership() {
        let sys = squares_system();
        let b = DerivationBudget::new(8, 50);
        assert!(sys.member_bounded(&a_pow(9), b).unwrap());
        assert!(!sys.member_bounded(&a_pow(8), b).unwrap());
    }

    #[test]
    fn anan_enumeration_small_budget() {
        let sys = anan_system();
        let got = sys.enumerate(DerivationBudget::new(3, 20)).unwrap();
        let a = Symbol::new("a");
        let ainv = Symbol::new("a^-1");
        let hash = Symbol::new("#");
        let expect: std::collections::BTreeSet<Word> = [
            Word::from_letters([hash]),
            Word::from_letters([a, hash, a]),
            Word::from_letters([ainv, hash, ainv]),
        ]
        .into_iter()
        .collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn finite_language_roundtrip() {
        let terminal = Alphabet::of(&["x", "y"]);
        let words = vec![Word::parse("x y"), Word::parse("y"), Word::empty()];
        let sys = finite_language_system(&terminal, &words).unwrap();
        let got = sys.enumerate(DerivationBudget::new(1, 10)).unwrap();
        assert_eq!(got, words.into_iter().collect());
    }
}
