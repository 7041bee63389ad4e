//! Knot Morse words, width and the thick/thin level formula.
//!
//! A knot's height function is recorded as its min/max word read bottom-up.
//! After the i-th event the knot meets a regular level sphere in twice
//! `dots(i)` points; a dot is one strand pair. Width is the sum of the level
//! counts over all regular levels. Thick levels sit between a min and the
//! next max, thin levels between a max and the next min, and width can be
//! recomputed from the dot counts at those levels alone as
//! `2*sum(thick^2) - 2*sum(thin^2)`.
//!
//! The stated squared-dot formula is arithmetically consistent only when
//! thick and thin levels are measured in dots, i.e. half the intersection
//! count; the exhaustive equivalence test against the direct definition is
//! the arbiter for that convention.

use serde::Serialize;
use thiserror::Error;

/// One critical event of the height function on the knot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ext {
    Min,
    Max,
}

/// A validated min/max word: starts with a min, ends with a max, and keeps
/// at least one strand pair strictly inside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnotWord {
    events: Vec<Ext>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("bad character {0:?}: words use 'm' for min and 'M' for max")]
    BadChar(char),
    #[error("empty word")]
    Empty,
    #[error("level count hits zero after event {0}: the level would be disconnected")]
    DeadLevel(usize),
    #[error("word ends with {0} unmatched strand pairs")]
    Unclosed(i64),
    #[error("word length {0} is odd")]
    OddLength(usize),
    #[error("enumeration needs an even length of at least 2, got {0}")]
    BadLength(usize),
}

impl KnotWord {
    pub fn events(&self) -> &[Ext] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Strand pairs just above the i-th event (1-based).
    pub fn dots(&self, i: usize) -> u64 {
        let mut d = 0i64;
        for e in &self.events[..i] {
            d += match e {
                Ext::Min => 1,
                Ext::Max => -1,
            };
        }
        u64::try_from(d).expect("validated word never goes negative")
    }

    /// The full dot profile over the n-1 interior regular levels.
    pub fn profile(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.events.len().saturating_sub(1));
        let mut d = 0i64;
        for e in &self.events[..self.events.len().saturating_sub(1)] {
            d += match e {
                Ext::Min => 1,
                Ext::Max => -1,
            };
            out.push(d as u64);
        }
        out
    }

    /// Min/max word with the height reversed.
    pub fn reversed(&self) -> KnotWord {
        KnotWord {
            events: self
                .events
                .iter()
                .rev()
                .map(|e| match e {
                    Ext::Min => Ext::Max,
                    Ext::Max => Ext::Min,
                })
                .collect(),
        }
    }
}

impl std::fmt::Display for KnotWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.events {
            f.write_str(match e {
                Ext::Min => "m",
                Ext::Max => "M",
            })?;
        }
        Ok(())
    }
}

/// Parse a word over {m, M}; whitespace is ignored.
pub fn parse_word(text: &str) -> Result<KnotWord, WordError> {
    let mut events = Vec::new();
    for ch in text.chars() {
        match ch {
            'm' => events.push(Ext::Min),
            'M' => events.push(Ext::Max),
            c if c.is_whitespace() => {}
            c => return Err(WordError::BadChar(c)),
        }
    }
    if events.is_empty() {
        return Err(WordError::Empty);
    }
    if events.len() % 2 != 0 {
        return Err(WordError::OddLength(events.len()));
    }
    let mut d = 0i64;
    for (i, e) in events.iter().enumerate() {
        d += match e {
            Ext::Min => 1,
            Ext::Max => -1,
        };
        if d <= 0 && i + 1 < events.len() {
            return Err(WordError::DeadLevel(i + 1));
        }
    }
    if d != 0 {
        return Err(WordError::Unclosed(d));
    }
    Ok(KnotWord { events })
}

/// Width with respect to the given height word: twice the sum of dot counts
/// over the interior regular levels.
pub fn width(w: &KnotWord) -> u64 {
    w.profile().iter().map(|d| 2 * d).sum()
}

/// Thick and thin dot counts, in height order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThickThin {
    pub thick: Vec<u64>,
    pub thin: Vec<u64>,
}

pub fn thick_thin(w: &KnotWord) -> ThickThin {
    let mut thick = Vec::new();
    let mut thin = Vec::new();
    let profile = w.profile();
    for i in 1..w.len() {
        match (w.events()[i - 1], w.events()[i]) {
            (Ext::Min, Ext::Max) => thick.push(profile[i - 1]),
            (Ext::Max, Ext::Min) => thin.push(profile[i - 1]),
            _ => {}
        }
    }
    ThickThin { thick, thin }
}

/// The squared-dot-count evaluation of width.
pub fn width_formula(d: &ThickThin) -> u64 {
    let plus: u64 = d.thick.iter().map(|a| 2 * a * a).sum();
    let minus: u64 = d.thin.iter().map(|b| 2 * b * b).sum();
    plus - minus
}

/// Stack `w1` on top of `w2`: drop `w1`'s final max and `w2`'s initial min
/// and concatenate. Width adds and loses exactly 2.
pub fn stack(w1: &KnotWord, w2: &KnotWord) -> KnotWord {
    let mut events = Vec::with_capacity(w1.len() + w2.len() - 2);
    events.extend_from_slice(&w1.events[..w1.len() - 1]);
    events.extend_from_slice(&w2.events[1..]);
    let word = KnotWord { events };
    debug_assert!(parse_word(&word.to_string()).is_ok());
    word
}

/// All valid words with `n` events, lexicographically with `m` before `M`.
/// There are Catalan(n/2 - 1) of them.
pub fn enumerate_words(n: usize) -> Result<WordIter, WordError> {
    if n < 2 || n % 2 != 0 {
        return Err(WordError::BadLength(n));
    }
    Ok(WordIter {
        n,
        next: Some(first_word(n)),
    })
}

fn first_word(n: usize) -> Vec<Ext> {
    // All mins then all maxes is lexicographically first with m < M.
    let mut v = vec![Ext::Min; n / 2];
    v.extend(vec![Ext::Max; n / 2]);
    v
}

pub struct WordIter {
    n: usize,
    next: Option<Vec<Ext>>,
}

impl Iterator for WordIter {
    type Item = KnotWord;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.next.take()?;
        let out = KnotWord {
            events: cur.clone(),
        };
        self.next = successor(&cur, self.n);
        Some(out)
    }
}

/// Next valid word in lexicographic order (m < M), if any: find the last
/// position that can flip from m to M keeping a valid completion, flip it,
/// and complete minimally.
fn successor(cur: &[Ext], n: usize) -> Option<Vec<Ext>> {
    // prefix_d[i] = dots after i events.
    for flip in (1..n - 1).rev() {
        if cur[flip] != Ext::Min {
            continue;
        }
        let mut d = 0i64;
        for e in &cur[..flip] {
            d += if *e == Ext::Min { 1 } else { -1 };
        }
        // Try making position `flip` a Max.
        let d_after = d - 1;
        let remaining = (n - flip - 1) as i64;
        // Interior levels must stay >= 1 and the end must return to 0.
        if d_after < 1 && flip + 1 < n {
            continue;
        }
        if d_after > remaining || (remaining - d_after) % 2 != 0 {
            continue;
        }
        let mut next = cur[..flip].to_vec();
        next.push(Ext::Max);
        // Minimal completion: as many mins as possible first, then maxes,
        // while keeping validity. Greedy: at each step take Min if the rest
        // can still close up, else Max.
        let mut dd = d_after;
        for pos in flip + 1..n {
            let left = (n - pos - 1) as i64;
            // Choosing Min requires dd+1 <= left and parity match.
            let can_min = dd + 1 <= left && (left - (dd + 1)) % 2 == 0;
            if can_min {
                next.push(Ext::Min);
                dd += 1;
            } else {
                // Max must keep interior levels positive.
                debug_assert!(dd - 1 >= i64::from(pos + 1 != n));
                next.push(Ext::Max);
                dd -= 1;
            }
        }
        debug_assert_eq!(dd, 0);
        return Some(next);
    }
    None
}

/// Catalan numbers, for enumeration counts.
pub fn catalan(k: usize) -> u64 {
    let mut c = 1u64;
    for i in 0..k {
        c = c * 2 * (2 * i as u64 + 1) / (i as u64 + 2);
    }
    c
}

/// The per-word report emitted by the width tools.
#[derive(Clone, Debug, Serialize)]
pub struct WidthReport {
    pub word: String,
    pub width: u64,
    pub thick: Vec<u64>,
    pub thin: Vec<u64>,
    pub formula: u64,
    pub agree: bool,
}

pub fn width_report(w: &KnotWord) -> WidthReport {
    let tt = thick_thin(w);
    let direct = width(w);
    let formula = width_formula(&tt);
    WidthReport {
        word: w.to_string(),
        width: direct,
        thick: tt.thick,
        thin: tt.thin,
        formula,
        agree: direct == formula,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 18-event test sequence, written bottom-up.
    pub(crate) const BIG_WORD: &str = "mmmmmMMMmmMMmmMMMM";

    #[test]
    fn parse_accepts_and_rejects() {
        assert_eq!(parse_word("mM").unwrap().len(), 2);
        assert_eq!(parse_word("m M\n").unwrap().len(), 2);
        assert!(matches!(parse_word("mMmM"), Err(WordError::DeadLevel(2))));
        assert!(matches!(parse_word("xy"), Err(WordError::BadChar('x'))));
        assert!(matches!(parse_word(""), Err(WordError::Empty)));
        assert!(matches!(parse_word("mmM"), Err(WordError::OddLength(3))));
        assert_eq!(parse_word(BIG_WORD).unwrap().len(), 18);
    }

    #[test]
    fn width_examples() {
        assert_eq!(width(&parse_word("mM").unwrap()), 2);
        assert_eq!(width(&parse_word("mmMM").unwrap()), 8);
        assert_eq!(width(&parse_word(BIG_WORD).unwrap()), 98);
    }

    #[test]
    fn thick_thin_examples() {
        let tt = thick_thin(&parse_word("mM").unwrap());
        assert_eq!(tt, ThickThin { thick: vec![1], thin: vec![] });
        let tt = thick_thin(&parse_word("mmMmMM").unwrap());
        assert_eq!(
            tt,
            ThickThin {
                thick: vec![2, 2],
                thin: vec![1]
            }
        );
        let tt = thick_thin(&parse_word(BIG_WORD).unwrap());
        assert_eq!(
            tt,
            ThickThin {
                thick: vec![5, 4, 4],
                thin: vec![2, 2]
            }
        );
    }

    #[test]
    fn formula_examples() {
        assert_eq!(
            width_formula(&ThickThin {
                thick: vec![1],
                thin: vec![]
            }),
            2
        );
        assert_eq!(
            width_formula(&ThickThin {
                thick: vec![2, 2],
                thin: vec![1]
            }),
            14
        );
        assert_eq!(width(&parse_word("mmMmMM").unwrap()), 14);
        assert_eq!(
            width_formula(&ThickThin {
                thick: vec![5, 4, 4],
                thin: vec![2, 2]
            }),
            98
        );
    }

    #[test]
    fn stack_examples() {
        let mm = parse_word("mM").unwrap();
        let four = parse_word("mmMM").unwrap();
        assert_eq!(stack(&mm, &mm).to_string(), "mM");
        assert_eq!(stack(&four, &four).to_string(), "mmMmMM");
        assert_eq!(width(&stack(&four, &four)), 14);
        assert_eq!(stack(&mm, &four).to_string(), "mmMM");
        assert_eq!(width(&stack(&mm, &four)), 8);
    }

    #[test]
    fn enumeration_counts_match_catalan() {
        assert_eq!(
            enumerate_words(4).unwrap().map(|w| w.to_string()).collect::<Vec<_>>(),
            ["mmMM"]
        );
        assert_eq!(
            enumerate_words(6).unwrap().map(|w| w.to_string()).collect::<Vec<_>>(),
            ["mmmMMM", "mmMmMM"]
        );
        assert_eq!(enumerate_words(16).unwrap().count() as u64, catalan(7));
        assert_eq!(catalan(7), 429);
    }

    #[test]
    fn enumeration_is_strictly_increasing_and_valid() {
        for n in [2usize, 4, 6, 8, 10] {
            let words: Vec<String> = enumerate_words(n).unwrap().map(|w| w.to_string()).collect();
            assert_eq!(words.len() as u64, catalan(n / 2 - 1));
            for w in &words {
                parse_word(w).unwrap();
            }
            // Lexicographic with m before M.
            let key = |s: &String| -> Vec<u8> {
                s.chars().map(|c| if c == 'm' { 0 } else { 1 }).collect()
            };
            for pair in words.windows(2) {
                assert!(key(&pair[0]) < key(&pair[1]));
            }
        }
    }

    #[test]
    fn thick_thin_interleaving_invariant() {
        for n in [2usize, 4, 6, 8, 10, 12] {
            for w in enumerate_words(n).unwrap() {
                let tt = thick_thin(&w);
                assert_eq!(tt.thick.len(), tt.thin.len() + 1);
                for i in 0..tt.thin.len() {
                    assert!(tt.thick[i] > tt.thin[i]);
                    assert!(tt.thin[i] < tt.thick[i + 1]);
                }
                // Width lower bound and parity.
                let wd = width(&w);
                assert_eq!(wd % 2, 0);
                let max_dots = w.profile().iter().copied().max().unwrap_or(0);
                assert!(wd >= 2 * max_dots);
            }
        }
    }

    #[test]
    fn reflection_preserves_width() {
        for n in [4usize, 6, 8, 10] {
            for w in enumerate_words(n).unwrap() {
                assert_eq!(width(&w), width(&w.reversed()));
            }
        }
    }
}
