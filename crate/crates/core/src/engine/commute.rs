//! Commutation of `X` and `JX` at the origin, tested four ways.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{covariant_derivative, lie_bracket, ACStructure, VectorField};
use crate::{linalg, Error, Rational, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Letter {
    X,
    JX,
}

impl Letter {
    fn name(self) -> &'static str {
        match self {
            Letter::X => "X",
            Letter::JX => "JX",
        }
    }
}

type Word = Vec<Letter>;

fn all_words(len: usize) -> Vec<Word> {
    (0..1usize << len)
        .map(|bits| {
            (0..len)
                .map(|i| if bits >> (len - 1 - i) & 1 == 1 { Letter::JX } else { Letter::X })
                .collect()
        })
        .collect()
}

fn bracket_name(w: &[Letter]) -> String {
    match w {
        [last] => String::from(last.name()),
        [first, rest @ ..] => {
            let mut s = String::from("[");
            s.push_str(first.name());
            s.push(',');
            s.push_str(&bracket_name(rest));
            s.push(']');
            s
        }
        [] => String::new(),
    }
}

/// Outcome of testing the four commutation criteria up to a given order.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutationReport {
    pub order_tested: u32,
    /// Right-nested brackets of length `2..=order` evaluated at 0, keyed by
    /// their bracket expression, e.g. `"[X,[JX,X]]"`.
    pub defects: BTreeMap<String, Vec<Rational>>,
    /// Largest order up to which each criterion holds, in criterion order:
    /// permutation invariance of words, the `(JX)^q X^p JX` exchange,
    /// vanishing brackets, and derivatives of `[X, JX]`.
    pub criterion_orders: [u32; 4],
    /// Order up to which all brackets vanish.
    pub max_vanishing_order: u32,
    pub criteria_agree: bool,
}

impl CommutationReport {
    pub fn commutes_to(&self, k: u32) -> bool {
        self.max_vanishing_order >= k
    }
}

/// Evaluates every word `L_1 L_2 ... L_r` (meaning `∇_{L_1} ... ∇_{L_{r-1}} L_r`)
/// and every right-nested bracket of length `<= order` at the origin, sharing
/// suffixes between words.
struct WordTable {
    words: BTreeMap<Word, Vec<Rational>>,
    brackets: BTreeMap<Word, Vec<Rational>>,
    derived: BTreeMap<Word, Vec<Rational>>,
}

fn build_table(x: &VectorField, j: &ACStructure, order: u32) -> Result<WordTable> {
    let k = order;
    let x = x.trimmed(k.saturating_sub(1));
    let jx = j.recapped(x.cap()).trimmed(k.saturating_sub(1)).apply(&x)?;
    let field = |l: Letter| if l == Letter::X { &x } else { &jx };

    let mut words = BTreeMap::new();
    let mut brackets = BTreeMap::new();
    // suffix -> field, trimmed to the derivatives still available
    let mut word_fields: BTreeMap<Word, VectorField> = BTreeMap::new();
    let mut bracket_fields: BTreeMap<Word, VectorField> = BTreeMap::new();
    for l in [Letter::X, Letter::JX] {
        let w = alloc::vec![l];
        words.insert(w.clone(), field(l).at_origin()?);
        word_fields.insert(w.clone(), field(l).clone());
        bracket_fields.insert(w, field(l).clone());
    }
    for len in 2..=k as usize {
        let remaining = k - len as u32;
        let mut next_words = BTreeMap::new();
        let mut next_brackets = BTreeMap::new();
        for (suffix, f) in &word_fields {
            for l in [Letter::X, Letter::JX] {
                let d = covariant_derivative(&field(l).trimmed(remaining), f)?.trimmed(remaining);
                let mut w = alloc::vec![l];
                w.extend_from_slice(suffix);
                words.insert(w.clone(), d.at_origin()?);
                next_words.insert(w, d);
            }
        }
        for (suffix, f) in &bracket_fields {
            for l in [Letter::X, Letter::JX] {
                let b = lie_bracket(&field(l).trimmed(remaining + 1), f)?.trimmed(remaining);
                let mut w = alloc::vec![l];
                w.extend_from_slice(suffix);
                brackets.insert(w.clone(), b.at_origin()?);
                next_brackets.insert(w, b);
            }
        }
        word_fields = next_words;
        bracket_fields = next_brackets;
    }

    // v · [X, JX] for words v of length <= order - 2
    let mut derived = BTreeMap::new();
    if k >= 2 {
        let base_rem = k - 2;
        let b = lie_bracket(&x.trimmed(base_rem + 1), &jx.trimmed(base_rem + 1))?.trimmed(base_rem);
        derived.insert(Word::new(), b.at_origin()?);
        let mut layer: BTreeMap<Word, VectorField> = BTreeMap::new();
        layer.insert(Word::new(), b);
        for len in 1..=base_rem as usize {
            let remaining = base_rem - len as u32;
            let mut next = BTreeMap::new();
            for (suffix, f) in &layer {
                for l in [Letter::X, Letter::JX] {
                    let d =
                        covariant_derivative(&field(l).trimmed(remaining), f)?.trimmed(remaining);
                    let mut w = alloc::vec![l];
                    w.extend_from_slice(suffix);
                    derived.insert(w.clone(), d.at_origin()?);
                    next.insert(w, d);
                }
            }
            layer = next;
        }
    }
    Ok(WordTable {
        words,
        brackets,
        derived,
    })
}

/// Largest `r <= order` such that `holds(len)` for every `len` in `2..=r`.
fn max_order(order: u32, holds: impl Fn(u32) -> bool) -> u32 {
    let mut r = order.min(1);
    for len in 2..=order {
        if !holds(len) {
            break;
        }
        r = len;
    }
    r
}

pub fn commutation_defect(x: &VectorField, j: &ACStructure, order: u32) -> Result<CommutationReport> {
    let available = x.reliable_degree().map_or(-1, |d| d as i32);
    let needed = order as i32 - 1;
    let j_available = j.reliable_degree().map_or(-1, |d| d as i32);
    if available < needed || j_available < needed {
        return Err(Error::TruncationDepth {
            needed,
            available: available.min(j_available),
        });
    }
    let table = build_table(x, j, order)?;

    let permutation = |len: u32| {
        let mut by_content: BTreeMap<usize, &Vec<Rational>> = BTreeMap::new();
        all_words(len as usize).iter().all(|w| {
            let jx_count = w.iter().filter(|&&l| l == Letter::JX).count();
            let v = &table.words[w];
            match by_content.get(&jx_count) {
                Some(prev) => *prev == v,
                None => {
                    by_content.insert(jx_count, v);
                    true
                }
            }
        })
    };
    let exchange = |len: u32| {
        // (JX)^q X^p JX  ==  (JX)^{q+1} X^p  with p >= 1, p + q + 1 = len
        (1..len).all(|p| {
            let q = len - 1 - p;
            let mut lhs: Word = core::iter::repeat_n(Letter::JX, q as usize).collect();
            lhs.extend(core::iter::repeat_n(Letter::X, p as usize));
            lhs.push(Letter::JX);
            let mut rhs: Word = core::iter::repeat_n(Letter::JX, q as usize + 1).collect();
            rhs.extend(core::iter::repeat_n(Letter::X, p as usize));
            table.words[&lhs] == table.words[&rhs]
        })
    };
    let brackets_vanish = |len: u32| {
        all_words(len as usize)
            .iter()
            .all(|w| linalg::is_zero_vec(&table.brackets[w]))
    };
    let derivatives_vanish = |len: u32| {
        all_words(len as usize - 2)
            .iter()
            .all(|w| linalg::is_zero_vec(&table.derived[w]))
    };
    let criterion_orders = [
        max_order(order, permutation),
        max_order(order, exchange),
        max_order(order, brackets_vanish),
        max_order(order, derivatives_vanish),
    ];
    let defects = table
        .brackets
        .iter()
        .map(|(w, v)| (bracket_name(w), v.clone()))
        .collect();
    Ok(CommutationReport {
        order_tested: order,
        defects,
        max_vanishing_order: criterion_orders[2],
        criteria_agree: criterion_orders.iter().all(|&o| o == criterion_orders[0]),
        criterion_orders,
    })
}
