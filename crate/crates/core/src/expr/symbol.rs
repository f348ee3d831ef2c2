//! Symbols of the expression language.
//!
//! Every symbol carries its kind, fixed at creation. Jet variables store a
//! sorted multi-index so `h_xy` and `h_yx` are the same symbol.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Highest total derivative order representable in jet space.
pub const MAX_JET_ORDER: u32 = 8;

/// Independent variables of the equation, ordered `x < y < t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BaseVar {
    X,
    Y,
    T,
}

impl BaseVar {
    pub const ALL: [BaseVar; 3] = [BaseVar::X, BaseVar::Y, BaseVar::T];

    pub fn letter(self) -> char {
        match self {
            BaseVar::X => 'x',
            BaseVar::Y => 'y',
            BaseVar::T => 't',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Equation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Nu,
    Kappa,
    Lambda,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Nu => "nu",
            Param::Kappa => "kappa",
            Param::Lambda => "lambda",
        }
    }
}

/// Similarity variables of a reduced equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReducedVar {
    Z,
    W,
}

impl ReducedVar {
    pub fn letter(self) -> char {
        match self {
            ReducedVar::Z => 'z',
            ReducedVar::W => 'w',
        }
    }
}

/// Derivative multi-index `(n_x, n_y, n_t)` of the dependent variable `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct JetIndex {
    pub nx: u8,
    pub ny: u8,
    pub nt: u8,
}

impl JetIndex {
    pub const ZERO: JetIndex = JetIndex { nx: 0, ny: 0, nt: 0 };

    pub fn new(nx: u8, ny: u8, nt: u8) -> Result<Self> {
        let j = JetIndex { nx, ny, nt };
        if j.order() > MAX_JET_ORDER {
            return Err(Error::JetOrderOverflow { index: j.suffix() });
        }
        Ok(j)
    }

    pub fn order(self) -> u32 {
        self.nx as u32 + self.ny as u32 + self.nt as u32
    }

    pub fn count(self, v: BaseVar) -> u8 {
        match v {
            BaseVar::X => self.nx,
            BaseVar::Y => self.ny,
            BaseVar::T => self.nt,
        }
    }

    /// Index raised by one derivative in `v`; fails past order 8.
    pub fn raise(self, v: BaseVar) -> Result<Self> {
        let mut j = self;
        match v {
            BaseVar::X => j.nx += 1,
            BaseVar::Y => j.ny += 1,
            BaseVar::T => j.nt += 1,
        }
        if j.order() > MAX_JET_ORDER {
            return Err(Error::JetOrderOverflow { index: j.suffix() });
        }
        Ok(j)
    }

    /// Index lowered by one derivative in `v`, if possible.
    pub fn lower(self, v: BaseVar) -> Option<Self> {
        let mut j = self;
        let slot = match v {
            BaseVar::X => &mut j.nx,
            BaseVar::Y => &mut j.ny,
            BaseVar::T => &mut j.nt,
        };
        if *slot == 0 {
            return None;
        }
        *slot -= 1;
        Some(j)
    }

    /// Parses a derivative suffix such as `xxyy`; letters may come in any order.
    pub fn from_suffix(s: &str) -> Option<Self> {
        let mut j = JetIndex::ZERO;
        for c in s.chars() {
            match c {
                'x' => j.nx += 1,
                'y' => j.ny += 1,
                't' => j.nt += 1,
                _ => return None,
            }
        }
        Some(j)
    }

    /// Sorted suffix letters, `x` before `y` before `t`.
    pub fn suffix(self) -> String {
        let mut s = String::with_capacity(self.order() as usize);
        s.extend(std::iter::repeat_n('x', self.nx as usize));
        s.extend(std::iter::repeat_n('y', self.ny as usize));
        s.extend(std::iter::repeat_n('t', self.nt as usize));
        s
    }

    /// True when no t-derivative is involved.
    pub fn spatial(self) -> bool {
        self.nt == 0
    }
}

/// Derivative multi-index of the reduced unknown `f(z, w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RJetIndex {
    pub nz: u8,
    pub nw: u8,
}

impl RJetIndex {
    pub const ZERO: RJetIndex = RJetIndex { nz: 0, nw: 0 };

    pub fn order(self) -> u32 {
        self.nz as u32 + self.nw as u32
    }

    pub fn raise(self, v: ReducedVar) -> Result<Self> {
        let mut j = self;
        match v {
            ReducedVar::Z => j.nz += 1,
            ReducedVar::W => j.nw += 1,
        }
        if j.order() > MAX_JET_ORDER {
            return Err(Error::JetOrderOverflow {
                index: format!("f_{}", j.suffix()),
            });
        }
        Ok(j)
    }

    pub fn from_suffix(s: &str) -> Option<Self> {
        let mut j = RJetIndex::ZERO;
        for c in s.chars() {
            match c {
                'z' => j.nz += 1,
                'w' => j.nw += 1,
                _ => return None,
            }
        }
        Some(j)
    }

    pub fn suffix(self) -> String {
        let mut s = String::new();
        s.extend(std::iter::repeat_n('z', self.nz as usize));
        s.extend(std::iter::repeat_n('w', self.nw as usize));
        s
    }
}

/// Coarse classification of a symbol, mirroring [`Symbol`] variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    BaseVar,
    Dependent,
    JetVar,
    Param,
    GroupParam,
    ReducedVar,
    ReducedJet,
    AnsatzCoeff,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Base(BaseVar),
    /// `h` itself is the jet with the zero multi-index.
    Jet(JetIndex),
    Param(Param),
    Group(Arc<str>),
    Reduced(ReducedVar),
    /// `f` itself is the reduced jet with the zero multi-index.
    RJet(RJetIndex),
    Coeff(u32),
    Other(Arc<str>),
}

impl Symbol {
    pub const X: Symbol = Symbol::Base(BaseVar::X);
    pub const Y: Symbol = Symbol::Base(BaseVar::Y);
    pub const T: Symbol = Symbol::Base(BaseVar::T);
    pub const H: Symbol = Symbol::Jet(JetIndex::ZERO);
    pub const NU: Symbol = Symbol::Param(Param::Nu);
    pub const KAPPA: Symbol = Symbol::Param(Param::Kappa);
    pub const LAMBDA: Symbol = Symbol::Param(Param::Lambda);
    pub const Z: Symbol = Symbol::Reduced(ReducedVar::Z);
    pub const W: Symbol = Symbol::Reduced(ReducedVar::W);
    pub const F: Symbol = Symbol::RJet(RJetIndex::ZERO);

    pub fn group(name: &str) -> Symbol {
        Symbol::Group(Arc::from(name))
    }

    pub fn other(name: &str) -> Symbol {
        Symbol::Other(Arc::from(name))
    }

    /// `h_J` for a suffix such as `"xxyy"`.
    pub fn jet(suffix: &str) -> Symbol {
        Symbol::Jet(JetIndex::from_suffix(suffix).expect("valid jet suffix"))
    }

    /// `f_J` for a suffix such as `"zzw"`.
    pub fn rjet(suffix: &str) -> Symbol {
        Symbol::RJet(RJetIndex::from_suffix(suffix).expect("valid reduced suffix"))
    }

    /// Classifies an identifier the way the parser does. Returns `None` for
    /// malformed derivative suffixes.
    pub fn from_name(name: &str) -> Option<Symbol> {
        Some(match name {
            "x" => Symbol::X,
            "y" => Symbol::Y,
            "t" => Symbol::T,
            "h" => Symbol::H,
            "nu" => Symbol::NU,
            "kappa" => Symbol::KAPPA,
            "lambda" => Symbol::LAMBDA,
            "z" => Symbol::Z,
            "w" => Symbol::W,
            "f" => Symbol::F,
            "s" | "eps" | "epsilon" => Symbol::group(name),
            _ => {
                if let Some(suffix) = name.strip_prefix("h_") {
                    let j = JetIndex::from_suffix(suffix)?;
                    if suffix.is_empty() || j.order() > MAX_JET_ORDER {
                        return None;
                    }
                    Symbol::Jet(j)
                } else if let Some(suffix) = name.strip_prefix("f_") {
                    let j = RJetIndex::from_suffix(suffix)?;
                    if suffix.is_empty() || j.order() > MAX_JET_ORDER {
                        return None;
                    }
                    Symbol::RJet(j)
                } else if let Some(n) = numbered(name, "c") {
                    Symbol::Coeff(n)
                } else if numbered(name, "s").is_some() {
                    Symbol::group(name)
                } else if name.starts_with("h_") || name.starts_with("f_") {
                    return None;
                } else {
                    Symbol::other(name)
                }
            }
        })
    }

    pub fn kind(&self) -> SymbolKind {
        match self {
            Symbol::Base(_) => SymbolKind::BaseVar,
            Symbol::Jet(j) if *j == JetIndex::ZERO => SymbolKind::Dependent,
            Symbol::Jet(_) => SymbolKind::JetVar,
            Symbol::Param(_) => SymbolKind::Param,
            Symbol::Group(_) => SymbolKind::GroupParam,
            Symbol::Reduced(_) => SymbolKind::ReducedVar,
            Symbol::RJet(_) => SymbolKind::ReducedJet,
            Symbol::Coeff(_) => SymbolKind::AnsatzCoeff,
            Symbol::Other(_) => SymbolKind::Other,
        }
    }

    /// True for `x, y, t` and every `h_J` (including `h`).
    pub fn is_point_coordinate(&self) -> bool {
        matches!(self, Symbol::Base(_) | Symbol::Jet(_))
    }
}

fn numbered(name: &str, prefix: &str) -> Option<u32> {
    let digits = name.strip_prefix(prefix)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Base(v) => write!(f, "{}", v.letter()),
            Symbol::Jet(j) if *j == JetIndex::ZERO => write!(f, "h"),
            Symbol::Jet(j) => write!(f, "h_{}", j.suffix()),
            Symbol::Param(p) => write!(f, "{}", p.name()),
            Symbol::Group(n) | Symbol::Other(n) => write!(f, "{n}"),
            Symbol::Reduced(v) => write!(f, "{}", v.letter()),
            Symbol::RJet(j) if *j == RJetIndex::ZERO => write!(f, "f"),
            Symbol::RJet(j) => write!(f, "f_{}", j.suffix()),
            Symbol::Coeff(n) => write!(f, "c{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_suffix_is_sorted() {
        assert_eq!(Symbol::from_name("h_yx"), Some(Symbol::jet("xy")));
        assert_eq!(Symbol::jet("tyx").to_string(), "h_xyt");
    }

    #[test]
    fn unknown_suffix_rejected() {
        assert_eq!(Symbol::from_name("h_z"), None);
        assert_eq!(Symbol::from_name("f_x"), None);
        assert_eq!(Symbol::from_name("h_xxxxxxxxx"), None);
    }

    #[test]
    fn kinds() {
        assert_eq!(Symbol::from_name("c12"), Some(Symbol::Coeff(12)));
        assert_eq!(Symbol::from_name("s3").unwrap().kind(), SymbolKind::GroupParam);
        assert_eq!(Symbol::H.kind(), SymbolKind::Dependent);
        assert_eq!(Symbol::from_name("rho").unwrap().kind(), SymbolKind::Other);
    }

    #[test]
    fn raise_respects_bound() {
        let j = JetIndex::new(4, 4, 0).unwrap();
        assert!(j.raise(BaseVar::X).is_err());
        assert!(JetIndex::new(9, 0, 0).is_err());
    }
}
