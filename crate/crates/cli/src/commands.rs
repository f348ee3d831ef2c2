use serde_json::{json, Map, Value};

use liesym_core::adjflow::{adjoint_matrices, flow, transform_solution, verify_adjoint_ode, verify_group_law, AdjointTable};
use liesym_core::detsolve::{discover, verify_generator, AnsatzSpec};
use liesym_core::expr::{parse_with, Assumptions, Expr, Symbol, Q};
use liesym_core::jet::{DeltaVariant, Params, PdeDefinition};
use liesym_core::liealg::{compare_with_printed, generator_basis, matrix_json, table_json, BasisPreset, CommutatorTable, LieAlgebra};
use liesym_core::linalg::same_span;
use liesym_core::nonclassical::{nonclassical, FamilyKind};
use liesym_core::optimal::{check_witness, normalize_with, AdjointEvaluator};
use liesym_core::prolong::VectorField;
use liesym_core::reduce::{catalog_row, consistent_presets, diff_reduced, printed_reduced, reduce_equation, ReductionSpec, Section};
use liesym_core::report::{discrepancy_report, SCHEMA_VERSION};
use liesym_core::{Error, Exec, Result};

use crate::{Cli, Command, Format, Session};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 2;
pub const EXIT_UNRESOLVED: u8 = 3;

struct Ctx {
    params: Params,
    variant: DeltaVariant,
    basis: BasisPreset,
    assume: Assumptions,
    format: Format,
}

impl Ctx {
    fn new(s: &Session) -> Result<Self> {
        let mut assume = Assumptions::default();
        if let Ok(extra) = std::env::var("LIESYM_ASSUME") {
            for name in extra.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                let sym = Symbol::from_name(name).ok_or_else(|| Error::Invalid(format!("LIESYM_ASSUME: unknown symbol `{name}`")))?;
                assume.insert(sym);
            }
        }
        let value = |name: &str, text: &str, sym: Symbol| -> Result<Expr> {
            if text == "symbolic" {
                return Ok(Expr::sym(sym));
            }
            let e = parse_with(text, &Assumptions::default())?;
            e.as_rational().map(Expr::constant).ok_or_else(|| Error::Invalid(format!("--{name} expects a rational or \"symbolic\", got `{text}`")))
        };
        let params = Params { nu: value("nu", &s.nu, Symbol::NU)?, kappa: value("kappa", &s.kappa, Symbol::KAPPA)?, lambda: value("lambda", &s.lambda, Symbol::LAMBDA)? };
        if params.lambda.is_zero() {
            return Err(Error::Invalid("--lambda must be nonzero".into()));
        }
        Ok(Ctx { params, variant: s.delta.parse()?, basis: BasisPreset::parse(&s.basis)?, assume, format: s.format })
    }

    fn pde(&self) -> PdeDefinition {
        PdeDefinition::new(self.variant, self.params.clone())
    }

    fn lambda(&self) -> &Expr {
        &self.params.lambda
    }

    fn algebra(&self) -> Result<LieAlgebra> {
        LieAlgebra::new(generator_basis(self.basis, self.lambda()))
    }

    fn require_concrete(&self, what: &str) -> Result<()> {
        if self.params.is_concrete() {
            Ok(())
        } else {
            Err(Error::SymbolicDiscovery(format!("{what} needs rational --nu, --kappa and --lambda")))
        }
    }

    fn field(&self, text: &str) -> Result<VectorField> {
        let parts: Vec<&str> = text.split(';').map(str::trim).collect();
        let [a, b, c, d] = parts[..] else {
            return Err(Error::Invalid(format!("expected four components \"xi1; xi2; xi3; phi\", got `{text}`")));
        };
        let p = |s: &str| parse_with(s, &self.assume);
        Ok(VectorField::new(p(a)?, p(b)?, p(c)?, p(d)?))
    }

    fn emit(&self, command: &str, text: String, mut body: Map<String, Value>) -> String {
        match self.format {
            Format::Text => text,
            Format::Json => {
                body.insert("schemaVersion".into(), json!(SCHEMA_VERSION));
                body.insert("command".into(), json!(command));
                let mut s = serde_json::to_string_pretty(&Value::Object(body)).expect("json serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn strings(fields: &[VectorField]) -> Vec<String> {
    fields.iter().map(|v| v.to_string()).collect()
}

pub fn run(cli: &Cli) -> Result<(String, u8)> {
    let ctx = Ctx::new(&cli.session)?;
    let exec = Exec::default();
    match &cli.command {
        Command::Symmetries { degree } => symmetries(&ctx, *degree, exec),
        Command::Verify { field } => verify(&ctx, field.as_deref()),
        Command::Algebra { table } => algebra(&ctx, *table),
        Command::Adjoint => adjoint(&ctx, exec),
        Command::Flow { generator } => flows(&ctx, *generator),
        Command::Optimal { coeffs } => optimal(&ctx, coeffs),
        Command::Reduce { row, z, w, r, section, generator } => match row {
            Some(row) => reduce_row(&ctx, *row),
            None => {
                let need = |o: &Option<String>, n: &str| o.clone().ok_or_else(|| Error::Invalid(format!("reduce needs --row or --{n}")));
                reduce_custom(&ctx, &need(z, "z")?, &need(w, "w")?, &need(r, "r")?, &need(section, "section")?, &need(generator, "generator")?)
            }
        },
        Command::Nonclassical { degree } => nonclassical_cmd(&ctx, *degree, exec),
        Command::Discrepancies => discrepancies(&ctx, exec),
    }
}

fn symmetries(ctx: &Ctx, degree: u32, exec: Exec) -> Result<(String, u8)> {
    ctx.require_concrete("symmetry discovery")?;
    let spec = AnsatzSpec::new(degree, ctx.params.clone());
    let (sys, basis) = discover(&spec, &ctx.pde(), exec)?;
    let expected = generator_basis(BasisPreset::Recomputed, ctx.lambda());
    let matches = same_span(&basis, &expected)?;
    let mut text = format!("{} unknowns, {} equations, rank {}, dimension {}\n", sys.unknowns.len(), sys.rows.len(), sys.rank(), basis.len());
    for (k, v) in basis.iter().enumerate() {
        text.push_str(&format!("  X{} = {v}\n", k + 1));
    }
    text.push_str(&format!("span equals V1..V7: {}\n", if matches { "yes" } else { "no" }));
    let body = json!({
        "unknowns": sys.unknowns.len(),
        "equations": sys.rows.len(),
        "rank": sys.rank(),
        "dimension": basis.len(),
        "basis": strings(&basis),
        "matchesGenerators": matches,
    });
    Ok((ctx.emit("symmetries", text, obj(body)), if matches { EXIT_OK } else { EXIT_VERIFY }))
}

fn verify(ctx: &Ctx, field: Option<&str>) -> Result<(String, u8)> {
    let pde = ctx.pde();
    let fields: Vec<(String, VectorField)> = match field {
        Some(f) => vec![("field".to_string(), ctx.field(f)?)],
        None => generator_basis(ctx.basis, ctx.lambda()).into_iter().enumerate().map(|(i, v)| (format!("V{}", i + 1), v)).collect(),
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut all = true;
    for (name, v) in &fields {
        let ok = verify_generator(v, &pde)?;
        all &= ok;
        text.push_str(&format!("{} {name} = {v}\n", if ok { "PASS" } else { "FAIL" }));
        rows.push(json!({"name": name, "field": v.to_string(), "symmetry": ok}));
    }
    let body = json!({"variant": ctx.variant.name(), "basis": ctx.basis.name(), "results": rows});
    Ok((ctx.emit("verify", text, obj(body)), if all { EXIT_OK } else { EXIT_VERIFY }))
}

fn algebra(ctx: &Ctx, table: bool) -> Result<(String, u8)> {
    let alg = ctx.algebra()?;
    let class = alg.classify()?;
    let dims = alg.derived_dims()?;
    let killing = alg.killing_form();
    let mut text = String::new();
    if table {
        text.push_str(&CommutatorTable(&alg).to_string());
    }
    text.push_str(&format!("Killing form:\n{}\n", killing.render().iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("\n")));
    text.push_str(&format!("derived series dimensions: {dims:?}\nsolvable: {}\nsemisimple: {}\n", class.solvable, class.semisimple));
    let mut body = obj(json!({
        "basis": strings(&alg.basis),
        "killingForm": matrix_json(&killing),
        "derivedDims": dims,
        "solvable": class.solvable,
        "semisimple": class.semisimple,
    }));
    if table {
        body.insert("table".into(), table_json(&alg));
    }
    if ctx.basis == BasisPreset::Printed {
        let cmp = compare_with_printed(&alg);
        for (i, j, p, q) in &cmp.antisymmetry_violations {
            text.push_str(&format!("printed table antisymmetry violation: [V{}, V{}] = {p}, [V{}, V{}] = {q}\n", i + 1, j + 1, j + 1, i + 1));
        }
        body.insert(
            "printedAntisymmetryViolations".into(),
            json!(cmp.antisymmetry_violations.iter().map(|(i, j, p, q)| json!({"i": i + 1, "j": j + 1, "ij": p, "ji": q})).collect::<Vec<_>>()),
        );
    }
    Ok((ctx.emit("algebra", text, body), EXIT_OK))
}

fn adjoint(ctx: &Ctx, exec: Exec) -> Result<(String, u8)> {
    let alg = ctx.algebra()?;
    let mats = adjoint_matrices(&alg, exec)?;
    let mut text = AdjointTable(&mats).to_string();
    let mut checks = Vec::new();
    let mut all = true;
    for a in &mats {
        let ode = verify_adjoint_ode(&alg, &a.matrix, a.generator, &a.param)?;
        let law = verify_group_law(&alg, a.generator)?;
        all &= ode && law;
        text.push_str(&format!("V{}: ode {}, group law {}\n", a.generator + 1, ode, law));
        checks.push(json!({"generator": a.generator + 1, "ode": ode, "groupLaw": law}));
    }
    let body = json!({"matrices": mats.iter().map(|a| a.to_json()).collect::<Vec<_>>(), "checks": checks});
    Ok((ctx.emit("adjoint", text, obj(body)), if all { EXIT_OK } else { EXIT_VERIFY }))
}

fn flows(ctx: &Ctx, generator: Option<usize>) -> Result<(String, u8)> {
    let basis = generator_basis(ctx.basis, ctx.lambda());
    let picked: Vec<usize> = match generator {
        Some(k) if (1..=basis.len()).contains(&k) => vec![k - 1],
        Some(k) => return Err(Error::Invalid(format!("--generator must be in 1..{}, got {k}", basis.len()))),
        None => (0..basis.len()).collect(),
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut all = true;
    for i in picked {
        let g = flow(&basis[i])?;
        let t = transform_solution(&basis[i])?;
        let ok = g.satisfies_flow_ode(&basis[i])?;
        all &= ok;
        text.push_str(&format!("G{}: (x, y, t, h) -> ({})\n    h = f(x, y, t) -> h = {}\n", i + 1, g.render().join(", "), t.render()));
        rows.push(json!({"generator": i + 1, "flow": g.to_json(), "transform": t.render(), "flowOde": ok}));
    }
    Ok((ctx.emit("flow", text, obj(json!({"flows": rows}))), if all { EXIT_OK } else { EXIT_VERIFY }))
}

fn optimal(ctx: &Ctx, coeffs: &str) -> Result<(String, u8)> {
    if ctx.lambda().as_rational().is_none() {
        return Err(Error::SymbolicDiscovery("optimal needs a rational --lambda".into()));
    }
    let a = coeffs
        .split(',')
        .map(|c| parse_with(c.trim(), &Assumptions::default())?.as_rational().ok_or_else(|| Error::Invalid(format!("coefficient `{c}` is not rational"))))
        .collect::<Result<Vec<Q>>>()?;
    if a.len() != 7 {
        return Err(Error::Invalid(format!("--coeffs needs 7 values, got {}", a.len())));
    }
    let ev = AdjointEvaluator::new(&ctx.algebra()?)?;
    let form = normalize_with(&ev, &a)?;
    let ok = check_witness(&ev, &a, &form)?;
    let params: Vec<String> = form.params.iter().map(|(n, v)| format!("{n} = {v}")).collect();
    let text = format!(
        "class {}: {}{}\nrepresentative: ({})\nwitness (s1..s7): ({})\nwitness check: {}\n",
        form.class_id,
        form.class_label(),
        if params.is_empty() { String::new() } else { format!(" with {}", params.join(", ")) },
        form.representative.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
        form.witness.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "),
        if ok { "ok" } else { "FAILED" },
    );
    let mut body = obj(form.to_json());
    body.insert("witnessCheck".into(), json!(ok));
    Ok((ctx.emit("optimal", text, body), if ok { EXIT_OK } else { EXIT_VERIFY }))
}

fn reduced_with_params(ctx: &Ctx, spec: &ReductionSpec) -> Result<Expr> {
    let red = reduce_equation(spec, &PdeDefinition::symbolic(ctx.variant))?;
    ctx.params.apply(&red)
}

fn reduce_row(ctx: &Ctx, row: usize) -> Result<(String, u8)> {
    if !(1..=12).contains(&row) {
        return Err(Error::Invalid(format!("--row must be in 1..12, got {row}")));
    }
    let spec = catalog_row(row - 1)?;
    let red = reduced_with_params(ctx, &spec)?;
    let presets: Vec<&str> = consistent_presets(row - 1).iter().map(|p| p.name()).collect();
    let mut text = format!(
        "row {row} ({}): z = {}, w = {}, r = {}\nboost sign: {}\n{red} = 0\n",
        spec.label,
        spec.z,
        spec.w,
        spec.r,
        presets.join(", ")
    );
    let mut body = obj(json!({"row": row, "spec": spec.to_json(), "reduced": red.to_string(), "boostSign": presets}));
    if ctx.params == Params::symbolic() {
        let d = diff_reduced(&printed_reduced(row - 1), &red);
        if !d.is_match() {
            text.push_str(&format!("differs from the published form after scaling by {}:\n", d.factor));
            for (k, p, c) in &d.mismatched {
                text.push_str(&format!("  {k}: published {p}, recomputed {c}\n"));
            }
        }
        body.insert("publishedDiff".into(), d.to_json());
    }
    Ok((ctx.emit("reduce", text, body), EXIT_OK))
}

fn reduce_custom(ctx: &Ctx, z: &str, w: &str, r: &str, section: &str, generator: &str) -> Result<(String, u8)> {
    let p = |s: &str| parse_with(s, &ctx.assume.clone().permissive());
    let parts: Vec<&str> = section.split(';').map(str::trim).collect();
    let [sx, sy, st] = parts[..] else {
        return Err(Error::Invalid(format!("--section expects \"x; y; t\", got `{section}`")));
    };
    let v = ctx.field(generator)?;
    let spec = ReductionSpec::new("custom", v, p(z)?, p(w)?, p(r)?, Section { x: p(sx)?, y: p(sy)?, t: p(st)? })?;
    let inv = spec.invariants_hold();
    if inv.contains(&false) {
        let text = format!("invariance fails: V(z) = 0 {}, V(w) = 0 {}, V(r) = 0 {}\n", inv[0], inv[1], inv[2]);
        let body = json!({"spec": spec.to_json(), "invariants": inv});
        return Ok((ctx.emit("reduce", text, obj(body)), EXIT_VERIFY));
    }
    if !spec.section_is_consistent()? {
        return Err(Error::Invalid("section does not satisfy z(σ) = z and w(σ) = w".into()));
    }
    let red = reduced_with_params(ctx, &spec)?;
    let body = json!({"spec": spec.to_json(), "invariants": inv, "reduced": red.to_string()});
    Ok((ctx.emit("reduce", format!("{red} = 0\n"), obj(body)), EXIT_OK))
}

fn nonclassical_cmd(ctx: &Ctx, degree: u32, exec: Exec) -> Result<(String, u8)> {
    ctx.require_concrete("nonclassical solving")?;
    let rep = nonclassical(degree, ctx.variant, ctx.params.clone(), exec)?;
    let mut text = format!("{} unknowns, {} constraints, {} branches closed by contradiction\n", rep.unknowns, rep.constraints, rep.contradictions);
    for f in &rep.families {
        text.push_str(&format!("{f}\n"));
    }
    let (sup, open) = (rep.count(FamilyKind::Supplementary), rep.count(FamilyKind::Unresolved));
    text.push_str(&format!("supplementary: {sup}, unresolved: {open}\n"));
    let code = if open > 0 { EXIT_UNRESOLVED } else { EXIT_OK };
    Ok((ctx.emit("nonclassical", text, obj(rep.to_json())), code))
}

fn discrepancies(ctx: &Ctx, exec: Exec) -> Result<(String, u8)> {
    let r = discrepancy_report(exec)?;
    Ok((ctx.emit("discrepancies", r.render_text(), obj(r.to_json())), EXIT_OK))
}
