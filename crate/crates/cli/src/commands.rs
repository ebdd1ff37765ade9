use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{json, Value};
use starved_core::compositions::enumerate;
use starved_core::stratify::{brute_force_occurring_with, build_lattice, compute_u_with, run_algorithm, verify_lattice_properties};
use starved_core::subresultants::{
    count_distinct_roots, count_distinct_roots_exact, hyperbolicity_certificate, hyperbolicity_certificate_exact,
    subdiscriminants, subdiscriminants_exact,
};
use starved_core::{Composition, Config, MonicPoly, OccurrenceTable, StratumSolver};

use crate::args::{ClassifyArgs, Format, LatticeArgs, OccursArgs, StratumArgs, SubdiscArgs, VerifyArgs};
use crate::input::{self, PolyEcho};
use crate::{CliError, Output, VERSION};

fn meta(command: &str, cfg: Option<(&Config, &MonicPoly)>, input: Value) -> Value {
    let mut m = json!({ "version": VERSION, "command": command, "input": input });
    if let Some((cfg, f)) = cfg {
        m["config"] = json!(input::effective(cfg, f));
    }
    m
}

fn format_or(f: Option<Format>, allowed: &[Format], command: &str) -> Result<Format, CliError> {
    let f = f.unwrap_or(allowed[0]);
    if !allowed.contains(&f) {
        return Err(CliError::Usage(format!("{command} does not support --format {f:?}").to_lowercase()));
    }
    Ok(f)
}

/// Everything a stratum command needs: polynomial, echo, config and solver.
pub(crate) struct Setup {
    pub f: MonicPoly,
    pub echo: PolyEcho,
    pub cfg: Config,
    pub s: usize,
}

impl Setup {
    pub fn new(args: &StratumArgs) -> Result<Self, CliError> {
        let (f, echo) = input::read_poly(&args.poly)?;
        input::check_s(args.s, f.degree())?;
        let cfg = input::config(&args.tol)?;
        Ok(Self { f, echo, cfg, s: args.s })
    }

    pub fn solver(&self) -> Result<StratumSolver, CliError> {
        Ok(StratumSolver::new(&self.f, self.s, &self.cfg)?)
    }

    pub fn meta(&self, command: &str, extra: Value) -> Value {
        let mut input = json!({ "poly": self.echo, "s": self.s });
        if let (Value::Object(m), Value::Object(e)) = (&mut input, extra) {
            m.extend(e);
        }
        meta(command, Some((&self.cfg, &self.f)), input)
    }
}

fn labels(set: &BTreeSet<Composition>) -> Vec<String> {
    set.iter().map(|u| u.to_string()).collect()
}

pub fn lattice(args: &LatticeArgs) -> Result<Output, CliError> {
    let format = format_or(args.out.format, &[Format::Json, Format::Dot], "lattice")?;
    if args.d == 0 {
        return Err(CliError::Usage("--d must be positive".into()));
    }
    let min_len = args.s.map(|s| s + 1).or(args.min_len).unwrap_or(1);
    if min_len > args.d {
        return Err(CliError::Usage(format!("no composition of {} has {min_len} parts", args.d)));
    }
    let nodes = enumerate(args.d, Some(min_len.max(1)), None).map_err(|e| CliError::Usage(e.to_string()))?;
    let keep: BTreeSet<&Composition> = nodes.iter().collect();
    let edges: Vec<(&Composition, Composition)> = nodes
        .iter()
        .flat_map(|u| u.covers().into_iter().filter(|w| keep.contains(w)).map(move |w| (u, w)))
        .collect();
    if format == Format::Dot {
        let mut out = String::from("digraph compositions {\n  rankdir=BT;\n");
        for u in &nodes {
            let _ = writeln!(out, "  \"{u}\";");
        }
        for (u, w) in &edges {
            let _ = writeln!(out, "  \"{u}\" -> \"{w}\";");
        }
        out.push_str("}\n");
        return Ok(Output::Text(out));
    }
    Ok(Output::Json(json!({
        "meta": meta("lattice", None, json!({ "d": args.d, "min_len": min_len })),
        "count": nodes.len(),
        "nodes": nodes.iter().map(|u| json!({ "composition": u.to_string(), "length": u.len() })).collect::<Vec<_>>(),
        "edges": edges.iter().map(|(u, w)| [u.to_string(), w.to_string()]).collect::<Vec<_>>(),
    })))
}

pub fn classify(args: &ClassifyArgs) -> Result<Output, CliError> {
    format_or(args.common.out.format, &[Format::Json], "classify")?;
    let setup = Setup::new(&args.common)?;
    let u = input::composition(&args.u, setup.f.degree())?;
    let class = setup.solver()?.classify(&u)?;
    Ok(Output::Json(json!({
        "meta": setup.meta("classify", json!({ "u": u.to_string() })),
        "composition": u.to_string(),
        "tag": class.tag,
        "dim": class.dim,
        "certified": class.certified,
        "witness": class.witness,
        "witness_roots": class.witness_roots.as_ref().map(|r| r.roots().to_vec()),
        "witness_composition": class.witness_composition().map(|w| w.to_string()),
    })))
}

pub fn occurs(args: &OccursArgs) -> Result<Output, CliError> {
    format_or(args.common.out.format, &[Format::Json], "occurs")?;
    let setup = Setup::new(&args.common)?;
    let solver = setup.solver()?;
    let atoms = compute_u_with(&solver)?;
    let run = run_algorithm(&atoms, setup.f.degree(), setup.s)?;
    let mut out = json!({
        "meta": setup.meta("occurs", json!({ "oracle": args.oracle })),
        "atoms": labels(&run.atoms),
        "joins": labels(&run.joins),
        "closure": labels(&run.closure),
        "occurring": labels(&run.occurring),
        "count": run.occurring.len(),
        "advisory": run.advisory,
    });
    if args.oracle {
        let brute = brute_force_occurring_with(&solver)?;
        out["oracle"] = json!({ "match": brute == run.occurring, "brute_force": labels(&brute) });
    }
    Ok(Output::Json(out))
}

pub fn atoms(args: &StratumArgs) -> Result<Output, CliError> {
    format_or(args.out.format, &[Format::Json], "atoms")?;
    let setup = Setup::new(args)?;
    let solver = setup.solver()?;
    let atoms = compute_u_with(&solver)?;
    let mut rows = Vec::new();
    for u in &atoms {
        let r = solver.point_stratum(u)?.ok_or_else(|| {
            starved_core::Error::InternalInconsistency(format!("atom {u} has no solved point"))
        })?;
        rows.push(json!({
            "composition": u.to_string(),
            "roots": r.roots(),
            "coeffs": MonicPoly::from_roots(&r).coeffs(),
        }));
    }
    Ok(Output::Json(json!({
        "meta": setup.meta("atoms", json!({})),
        "count": rows.len(),
        "atoms": rows,
    })))
}

pub fn subdisc(args: &SubdiscArgs) -> Result<Output, CliError> {
    format_or(args.out.format, &[Format::Json], "subdisc")?;
    let (f, echo) = input::read_poly(&args.poly)?;
    let seq = subdiscriminants(&f);
    let mut out = json!({
        "meta": meta("subdisc", None, json!({ "poly": echo, "exact": args.exact })),
        "degree": f.degree(),
        "subdiscriminants": seq.values,
        "discriminant": seq.discriminant(),
        "certificate": hyperbolicity_certificate(&f),
    });
    out["distinct_roots"] = match count_distinct_roots(&f) {
        Ok(n) => json!(n),
        Err(e) => json!({ "error": { "kind": e.kind(), "message": e.to_string() } }),
    };
    if args.exact {
        out["exact"] = json!({
            "subdiscriminants": subdiscriminants_exact(&f).exact_strings(),
            "distinct_roots": count_distinct_roots_exact(&f),
            "certificate": hyperbolicity_certificate_exact(&f),
        });
    }
    Ok(Output::Json(out))
}

/// The occurrence table: by the algorithm for `s >= 2`, every composition otherwise.
pub(crate) fn occurrence(setup: &Setup, solver: &StratumSolver) -> Result<OccurrenceTable, CliError> {
    let d = setup.f.degree();
    let occurring = if setup.s >= 2 {
        run_algorithm(&compute_u_with(solver)?, d, setup.s)?.occurring
    } else {
        enumerate(d, None, None)?.into_iter().collect()
    };
    Ok(OccurrenceTable::new(d, setup.s, occurring)?)
}

pub fn verify(args: &VerifyArgs) -> Result<Output, CliError> {
    let format = format_or(args.common.out.format, &[Format::Json, Format::Dot], "verify")?;
    let setup = Setup::new(&args.common)?;
    let solver = setup.solver()?;
    let occ = occurrence(&setup, &solver)?;
    let lattice = build_lattice(&occ, Some(&solver))?;
    if format == Format::Dot {
        return Ok(Output::Text(lattice.to_dot()));
    }
    let report = verify_lattice_properties(&lattice);
    let elements: Vec<Value> = lattice
        .elements
        .iter()
        .map(|e| {
            json!({
                "label": if e.dim < 0 { Value::Null } else { json!(e.label.to_string()) },
                "labels": e.labels.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
                "dim": e.dim,
                "rank": e.rank,
                "witness": e.witness,
            })
        })
        .collect();
    let mut out = json!({
        "meta": setup.meta("verify", json!({ "oracle": args.oracle })),
        "occurring": labels(&occ.occurring),
        "elements": elements,
        "covers": lattice.covers,
        "report": report,
        "expected_max_chain_len": expected_chain(setup.f.degree(), setup.s),
    });
    if args.oracle {
        let brute = brute_force_occurring_with(&solver)?;
        out["oracle"] = json!({ "match": brute == occ.occurring, "brute_force": labels(&brute) });
    }
    Ok(Output::Json(out))
}

/// Cover steps in a maximal chain: `d - s + 1` below the empty stratum for
/// `s >= 2`, `d - 1` for the simplex face lattice when `s <= 1`.
fn expected_chain(d: usize, s: usize) -> usize {
    if s >= 2 {
        (d + 1).saturating_sub(s)
    } else {
        d - 1
    }
}
