//! Marked groups: ordered, labeled generator lists with implicit inverses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{Complex, Mobius};

/// One letter of a word: a generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub const fn gen(generator: usize) -> Self {
        Letter {
            generator,
            inverse: false,
        }
    }

    pub const fn inv(generator: usize) -> Self {
        Letter {
            generator,
            inverse: true,
        }
    }

    pub fn inverted(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    /// Signed 1-based index: `+k` for generator `k-1`, `-k` for its inverse.
    pub fn from_signed(k: i32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("signed generator index 0".into()));
        }
        let generator = k.unsigned_abs() as usize - 1;
        Ok(Letter {
            generator,
            inverse: k < 0,
        })
    }

    /// Position in the alphabet `g₀, g₀⁻¹, g₁, g₁⁻¹, …`.
    pub fn alphabet_index(self) -> usize {
        2 * self.generator + usize::from(self.inverse)
    }

    pub fn from_alphabet_index(idx: usize) -> Self {
        Letter {
            generator: idx / 2,
            inverse: idx % 2 == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub map: Mobius,
}

/// An ordered list of labeled generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedGroup {
    generators: Vec<Generator>,
}

impl MarkedGroup {
    pub fn new<S: Into<String>>(gens: impl IntoIterator<Item = (S, Mobius)>) -> Result<Self> {
        let mut generators: Vec<Generator> = Vec::new();
        for (label, map) in gens {
            let label = label.into();
            if generators.iter().any(|g| g.label == label) {
                return Err(Error::InvalidParameter(format!("duplicate generator label {label:?}")));
            }
            if !map.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "generator {label} has non-finite entries"
                )));
            }
            generators.push(Generator {
                label,
                map: map.normalize(),
            });
        }
        Ok(MarkedGroup { generators })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn maps(&self) -> impl Iterator<Item = &Mobius> {
        self.generators.iter().map(|g| &g.map)
    }

    pub fn get(&self, label: &str) -> Option<&Mobius> {
        self.generators.iter().find(|g| g.label == label).map(|g| &g.map)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.label == label)
    }

    pub fn letter_map(&self, letter: Letter) -> Result<Mobius> {
        let g = self.generators.get(letter.generator).ok_or(Error::InvalidGenerator {
            index: letter.generator,
            len: self.len(),
        })?;
        Ok(if letter.inverse { g.map.inverse() } else { g.map })
    }

    /// All `2n` letter maps in alphabet order.
    pub fn alphabet(&self) -> Vec<Mobius> {
        self.generators.iter().flat_map(|g| [g.map, g.map.inverse()]).collect()
    }

    /// Product of the word, leftmost letter outermost.
    pub fn evaluate(&self, word: &[Letter]) -> Result<Mobius> {
        word.iter()
            .try_fold(Mobius::IDENTITY, |acc, &l| Ok(acc.compose(&self.letter_map(l)?)))
    }

    /// `(tr w, -tr w)`: the trace of the word up to the SL(2,ℂ) lift.
    pub fn trace_of_word(&self, word: &[Letter]) -> Result<[Complex; 2]> {
        let t = self.evaluate(word)?.trace();
        Ok([t, -t])
    }

    pub fn word_label(&self, word: &[Letter]) -> String {
        if word.is_empty() {
            return "1".into();
        }
        word.iter()
            .map(|l| {
                let name = self
                    .generators
                    .get(l.generator)
                    .map(|g| g.label.as_str())
                    .unwrap_or("?");
                if l.inverse {
                    format!("{name}⁻¹")
                } else {
                    name.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

impl fmt::Display for MarkedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("⟨")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} = {}", g.label, g.map)?;
        }
        f.write_str("⟩")
    }
}

/// Parses words like `P^-1 N`, `P N^-1 Q` or signed indices `-1 4` against
/// the labels of `group`.
pub fn parse_word(group: &MarkedGroup, text: &str) -> Result<Vec<Letter>> {
    let mut word = Vec::new();
    for token in text.split(|c: char| c.is_whitespace() || c == ',' || c == '*' || c == '·') {
        if token.is_empty() {
            continue;
        }
        if let Ok(k) = token.parse::<i32>() {
            let l = Letter::from_signed(k)?;
            group.letter_map(l)?;
            word.push(l);
            continue;
        }
        let (name, inverse) = match token.strip_suffix("^-1") {
            Some(n) => (n, true),
            None => (token, false),
        };
        let idx = group
            .index_of(name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown generator {name:?}")))?;
        word.push(Letter {
            generator: idx,
            inverse,
        });
    }
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{c, re};

    fn koebe_tuple() -> MarkedGroup {
        let r17 = |x: f64, y: f64| c(x / 17.0, y / 17.0);
        MarkedGroup::new([
            ("P", Mobius::new(re(1.0), c(-16.0, 4.0), re(0.0), re(1.0)).unwrap()),
            (
                "Q",
                Mobius::new(r17(-5.0, 20.0), r17(552.0, -32.0), r17(-1.0, 4.0), r17(107.0, -20.0)).unwrap(),
            ),
            ("M", Mobius::new(re(3.0), re(8.0), re(1.0), re(3.0)).unwrap()),
            (
                "N",
                Mobius::new(r17(31.0, 12.0), r17(32.0, 76.0), r17(-4.0, -1.0), r17(3.0, -12.0)).unwrap(),
            ),
        ])
        .unwrap()
    }

    #[test]
    fn traces_of_koebe_words() {
        let g = koebe_tuple();
        let [t, u] = g.trace_of_word(&[Letter::gen(0)]).unwrap();
        assert!((t.norm() - 2.0).abs() < 1e-12 && t == -u);

        let word = parse_word(&g, "P^-1 N").unwrap();
        let [t, _] = g.trace_of_word(&word).unwrap();
        assert!((t.norm() - 2.0).abs() < 1e-12, "{t}");

        let [t, _] = g.trace_of_word(&[]).unwrap();
        assert_eq!(t, re(2.0));
    }

    #[test]
    fn invalid_indices_are_rejected() {
        let g = koebe_tuple();
        assert!(matches!(
            g.trace_of_word(&[Letter::gen(4)]),
            Err(Error::InvalidGenerator { index: 4, len: 4 })
        ));
        assert!(parse_word(&g, "Z").is_err());
        assert!(parse_word(&g, "0").is_err());
        assert!(parse_word(&g, "5").is_err());
        assert_eq!(parse_word(&g, "-1 4").unwrap(), vec![Letter::inv(0), Letter::gen(3)]);
    }

    #[test]
    fn labels_are_unique() {
        let m = Mobius::IDENTITY;
        assert!(MarkedGroup::new([("A", m), ("A", m)]).is_err());
        let g = MarkedGroup::new([("A", m), ("B", m)]).unwrap();
        assert_eq!(g.word_label(&[Letter::gen(0), Letter::inv(1)]), "A·B⁻¹");
        assert_eq!(
            Letter::from_alphabet_index(Letter::inv(3).alphabet_index()),
            Letter::inv(3)
        );
    }
}
