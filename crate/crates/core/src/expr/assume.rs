use std::collections::BTreeSet;

use super::Symbol;

/// Set of symbols declared nonzero. Division by a monomial is only allowed
/// when every atom it contains is declared here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assumptions {
    nonzero: BTreeSet<Symbol>,
    all: bool,
}

impl Default for Assumptions {
    /// `lambda != 0`.
    fn default() -> Self {
        Assumptions::with(&[Symbol::LAMBDA])
    }
}

impl Assumptions {
    pub fn empty() -> Self {
        Assumptions {
            nonzero: BTreeSet::new(),
            all: false,
        }
    }

    pub fn with(symbols: &[Symbol]) -> Self {
        Assumptions {
            nonzero: symbols.iter().cloned().collect(),
            all: false,
        }
    }

    /// Treats every symbol as nonzero (generic-point semantics).
    pub fn permissive(mut self) -> Self {
        self.all = true;
        self
    }

    pub fn insert(&mut self, s: Symbol) {
        self.nonzero.insert(s);
    }

    pub fn extended(&self, symbols: &[Symbol]) -> Self {
        let mut a = self.clone();
        a.nonzero.extend(symbols.iter().cloned());
        a
    }

    pub fn is_nonzero(&self, s: &Symbol) -> bool {
        self.all || self.nonzero.contains(s)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.nonzero.iter()
    }

    /// Parses a comma-separated list of names such as `"t,w"`.
    pub fn parse_list(list: &str) -> Option<Vec<Symbol>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Symbol::from_name)
            .collect()
    }
}
