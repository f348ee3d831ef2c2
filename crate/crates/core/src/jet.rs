//! Total derivatives on jet space and on-shell elimination of time derivatives.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::expr::{parse, Assumptions, BaseVar, Expr, JetIndex, Symbol, Q};

/// `D_v e = ∂_v e + Σ_J h_{J+v} ∂e/∂h_J`.
pub fn total_derivative(e: &Expr, v: BaseVar) -> Result<Expr> {
    e.derive(&|s: &Symbol| match s {
        Symbol::Base(b) if *b == v => Ok(Some(Expr::one())),
        Symbol::Jet(j) => Ok(Some(Expr::jet(j.raise(v)?))),
        _ => Ok(None),
    })
}

/// Applies `D_J` for a whole multi-index, `x` derivatives first.
pub fn total_derivative_multi(e: &Expr, j: JetIndex) -> Result<Expr> {
    let mut out = e.clone();
    for v in BaseVar::ALL {
        for _ in 0..j.count(v) {
            out = total_derivative(&out, v)?;
        }
    }
    Ok(out)
}

/// Which printed form of the equation is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum DeltaVariant {
    /// `h_t = ν∇²h − κ∇⁴h + λ|∇h|²`.
    #[default]
    Eq11,
    /// `h_t + ν∇²h + κ∇⁴h − λ|∇h|² = 0`, the form used for the invariance condition.
    Eq29,
}

impl DeltaVariant {
    pub const ALL: [DeltaVariant; 2] = [DeltaVariant::Eq11, DeltaVariant::Eq29];

    pub fn name(self) -> &'static str {
        match self {
            DeltaVariant::Eq11 => "eq11",
            DeltaVariant::Eq29 => "eq29",
        }
    }
}

impl fmt::Display for DeltaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeltaVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq11" => Ok(DeltaVariant::Eq11),
            "eq29" => Ok(DeltaVariant::Eq29),
            _ => Err(Error::Invalid(format!("unknown equation variant `{s}`"))),
        }
    }
}

/// Values of `ν, κ, λ`; each is either a rational or the symbol itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub nu: Expr,
    pub kappa: Expr,
    pub lambda: Expr,
}

impl Params {
    pub fn symbolic() -> Self {
        Params {
            nu: Expr::sym(Symbol::NU),
            kappa: Expr::sym(Symbol::KAPPA),
            lambda: Expr::sym(Symbol::LAMBDA),
        }
    }

    pub fn concrete(nu: Q, kappa: Q, lambda: Q) -> Self {
        Params {
            nu: Expr::constant(nu),
            kappa: Expr::constant(kappa),
            lambda: Expr::constant(lambda),
        }
    }

    pub fn ints(nu: i64, kappa: i64, lambda: i64) -> Self {
        Params {
            nu: Expr::int(nu),
            kappa: Expr::int(kappa),
            lambda: Expr::int(lambda),
        }
    }

    /// True when all three values are rationals.
    pub fn is_concrete(&self) -> bool {
        [&self.nu, &self.kappa, &self.lambda].iter().all(|e| e.as_rational().is_some())
    }

    pub fn lambda_value(&self) -> Option<Q> {
        self.lambda.as_rational()
    }

    /// Replaces `nu`, `kappa`, `lambda` symbols in `e` by these values.
    pub fn apply(&self, e: &Expr) -> Result<Expr> {
        let map: HashMap<Symbol, Expr> = [
            (Symbol::NU, self.nu.clone()),
            (Symbol::KAPPA, self.kappa.clone()),
            (Symbol::LAMBDA, self.lambda.clone()),
        ]
        .into_iter()
        .filter(|(s, v)| v.as_symbol() != Some(s))
        .collect();
        e.substitute(&map, &Assumptions::default())
    }
}

/// A scalar evolution equation `h_t = rhs` with residual `Δ = h_t − rhs`.
#[derive(Debug, Clone)]
pub struct PdeDefinition {
    pub variant: DeltaVariant,
    pub params: Params,
    pub lhs: JetIndex,
    pub rhs: Expr,
    pub residual: Expr,
}

impl PdeDefinition {
    pub fn new(variant: DeltaVariant, params: Params) -> Self {
        let j = |s: &str| Expr::sym(Symbol::jet(s));
        let lap = &j("xx") + &j("yy");
        let bilap = Expr::sum([j("xxxx"), j("xxyy").scale(&Q::from_integer(2.into())), j("yyyy")]);
        let grad2 = &j("x").pow(2) + &j("y").pow(2);
        let (nu, kappa, lambda) = (&params.nu, &params.kappa, &params.lambda);
        let rhs = match variant {
            DeltaVariant::Eq11 => Expr::sum([nu * &lap, -(kappa * &bilap), lambda * &grad2]),
            DeltaVariant::Eq29 => Expr::sum([-(nu * &lap), -(kappa * &bilap), lambda * &grad2]),
        };
        let residual = &j("t") - &rhs;
        PdeDefinition {
            variant,
            params,
            lhs: JetIndex::new(0, 0, 1).expect("order 1"),
            rhs,
            residual,
        }
    }

    pub fn symbolic(variant: DeltaVariant) -> Self {
        PdeDefinition::new(variant, Params::symbolic())
    }

    /// Residual as printed, e.g. for the canonical form `h_t − ν(h_xx+h_yy) + …`.
    pub fn canonical_text(variant: DeltaVariant) -> &'static str {
        match variant {
            DeltaVariant::Eq11 => "h_t - nu*(h_xx + h_yy) + kappa*(h_xxxx + 2*h_xxyy + h_yyyy) - lambda*(h_x^2 + h_y^2)",
            DeltaVariant::Eq29 => "h_t + nu*(h_xx + h_yy) + kappa*(h_xxxx + 2*h_xxyy + h_yyyy) - lambda*(h_x^2 + h_y^2)",
        }
    }

    pub fn canonical_residual(variant: DeltaVariant) -> Expr {
        parse(PdeDefinition::canonical_text(variant)).expect("canonical residual parses")
    }
}

/// Memoized replacement of `h_{J,t}` by differential consequences of
/// `h_t = rhs`. The right side may depend on `x, y, t, h` and spatial jets.
pub struct OnShell {
    rhs: Expr,
    memo: Mutex<HashMap<JetIndex, Expr>>,
}

impl OnShell {
    pub fn new(rhs: Expr) -> Self {
        OnShell {
            rhs,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn for_pde(pde: &PdeDefinition) -> Self {
        OnShell::new(pde.rhs.clone())
    }

    /// On-shell value of `h_J`; `J` with `n_t = 0` maps to itself.
    pub fn value(&self, j: JetIndex) -> Result<Expr> {
        if j.nt == 0 {
            return Ok(Expr::jet(j));
        }
        if let Some(v) = self.memo.lock().expect("memo lock").get(&j) {
            return Ok(v.clone());
        }
        let v = if let Some(lower) = j.lower(BaseVar::X) {
            total_derivative(&self.value(lower)?, BaseVar::X)?
        } else if let Some(lower) = j.lower(BaseVar::Y) {
            total_derivative(&self.value(lower)?, BaseVar::Y)?
        } else if j.nt == 1 {
            self.eliminate(&self.rhs)?
        } else {
            let prev = self.value(j.lower(BaseVar::T).expect("nt > 1"))?;
            self.eliminate(&total_derivative(&prev, BaseVar::T)?)?
        };
        self.memo.lock().expect("memo lock").insert(j, v.clone());
        Ok(v)
    }

    /// Replaces every jet with `n_t >= 1`.
    pub fn eliminate(&self, e: &Expr) -> Result<Expr> {
        let tjets: BTreeSet<JetIndex> = e
            .symbols()
            .into_iter()
            .filter_map(|s| match s {
                Symbol::Jet(j) if j.nt > 0 => Some(j),
                _ => None,
            })
            .collect();
        if tjets.is_empty() {
            return Ok(e.clone());
        }
        let mut map = HashMap::new();
        for j in tjets {
            map.insert(Symbol::Jet(j), self.value(j)?);
        }
        e.substitute(&map, &Assumptions::default().permissive())
    }
}

pub fn eliminate_on_shell(e: &Expr, pde: &PdeDefinition) -> Result<Expr> {
    OnShell::for_pde(pde).eliminate(e)
}

/// Highest jet order appearing in `e`.
pub fn jet_order(e: &Expr) -> u32 {
    e.symbols()
        .iter()
        .filter_map(|s| match s {
            Symbol::Jet(j) => Some(j.order()),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn total_derivative_examples() {
        assert_eq!(total_derivative(&p("h"), BaseVar::X).unwrap(), p("h_x"));
        assert_eq!(total_derivative(&p("h_x^2"), BaseVar::X).unwrap(), p("2*h_x*h_xx"));
        assert_eq!(total_derivative(&p("x*h_y"), BaseVar::T).unwrap(), p("x*h_yt"));
    }

    #[test]
    fn total_derivative_overflows_past_order_eight() {
        let e = p("h_xxxxyyyy");
        assert!(matches!(total_derivative(&e, BaseVar::T), Err(Error::JetOrderOverflow { .. })));
    }

    #[test]
    fn canonical_residual_matches_construction() {
        for v in DeltaVariant::ALL {
            assert_eq!(PdeDefinition::symbolic(v).residual, PdeDefinition::canonical_residual(v));
        }
    }

    #[test]
    fn on_shell_examples() {
        let pde = PdeDefinition::symbolic(DeltaVariant::Eq11);
        assert_eq!(
            eliminate_on_shell(&p("h_t"), &pde).unwrap(),
            p("nu*(h_xx + h_yy) - kappa*(h_xxxx + 2*h_xxyy + h_yyyy) + lambda*(h_x^2 + h_y^2)")
        );
        let dx = total_derivative(&pde.rhs, BaseVar::X).unwrap();
        assert_eq!(eliminate_on_shell(&p("h_xt"), &pde).unwrap(), dx);
        assert_eq!(eliminate_on_shell(&p("h_xx"), &pde).unwrap(), p("h_xx"));
        assert!(eliminate_on_shell(&pde.residual, &pde).unwrap().is_empty());
    }

    #[test]
    fn second_time_derivative_reaches_order_eight() {
        let pde = PdeDefinition::new(DeltaVariant::Eq11, Params::ints(1, 1, 1));
        let shell = OnShell::for_pde(&pde);
        let v = shell.value(JetIndex::new(0, 0, 2).unwrap()).unwrap();
        assert_eq!(jet_order(&v), 8);
        assert!(!v.any_symbol(&|s| matches!(s, Symbol::Jet(j) if j.nt > 0)));
        assert!(shell.value(JetIndex::new(0, 0, 3).unwrap()).is_err());
    }
}
