use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Upper bound on the number of atomic propositions; valuations are 32-bit masks.
pub const MAX_PROPOSITIONS: usize = 32;

/// A set of true propositions, encoded as a bitmask over an [`Alphabet`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Valuation(pub u32);

impl Valuation {
    pub const EMPTY: Valuation = Valuation(0);

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn with(self, index: usize) -> Valuation {
        Valuation(self.0 | (1 << index))
    }
}

/// Ordered set of proposition names; a proposition's position is its bit index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphabetError {
    Duplicate(String),
    Empty,
    Invalid(String),
    TooLarge(usize),
}

impl fmt::Display for AlphabetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphabetError::Duplicate(n) => write!(f, "duplicate proposition `{n}`"),
            AlphabetError::Empty => f.write_str("empty proposition name"),
            AlphabetError::Invalid(n) => write!(f, "`{n}` is not a valid proposition identifier"),
            AlphabetError::TooLarge(n) => {
                write!(f, "{n} propositions exceed the limit of {MAX_PROPOSITIONS}")
            }
        }
    }
}

impl core::error::Error for AlphabetError {}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "true" | "false" | "X" | "G" | "F" | "U")
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Vec::new();
        for name in names {
            let name = name.as_ref();
            if name.is_empty() {
                return Err(AlphabetError::Empty);
            }
            if !is_identifier(name) {
                return Err(AlphabetError::Invalid(name.to_string()));
            }
            if out.iter().any(|n: &String| n == name) {
                return Err(AlphabetError::Duplicate(name.to_string()));
            }
            out.push(name.to_string());
        }
        if out.len() > MAX_PROPOSITIONS {
            return Err(AlphabetError::TooLarge(out.len()));
        }
        Ok(Alphabet { names: out })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Builds a valuation from proposition names; unknown names are returned as the error.
    pub fn valuation<I, S>(&self, names: I) -> Result<Valuation, String>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        names.into_iter().try_fold(Valuation::EMPTY, |v, n| {
            let n = n.as_ref();
            self.index_of(n).map(|i| v.with(i)).ok_or_else(|| n.to_string())
        })
    }

    /// Names of the propositions true under `v`, in alphabet order.
    pub fn names_in(&self, v: Valuation) -> impl Iterator<Item = &str> + '_ {
        self.names
            .iter()
            .enumerate()
            .filter(move |(i, _)| v.contains(*i))
            .map(|(_, n)| n.as_str())
    }

    /// Number of distinct valuations, `2^len`.
    pub fn valuation_count(&self) -> u64 {
        1u64 << self.names.len()
    }
}
