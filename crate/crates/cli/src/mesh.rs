//! Samples of every stratum, written as one table.
//!
//! CSV columns: `composition` (dash-separated label), `x1..xL` (distinct
//! roots, blank past the stratum's length), then `f{s+1}..f{d}`.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use starved_core::{Composition, GridSpec, Sampler, StratumTag};

use crate::args::{Format, MeshArgs};
use crate::commands::{occurrence, Setup};
use crate::input;
use crate::{CliError, Output};

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub roots: Vec<f64>,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumMesh {
    pub composition: Composition,
    pub dim: i64,
    pub tag: StratumTag,
    pub rows: Vec<Row>,
    /// Grid cells swept and solved, for positive-dimensional strata.
    pub cells: Option<usize>,
    pub solved: Option<usize>,
    pub near_boundary: Option<usize>,
    pub error: Option<Value>,
}

pub fn mesh(args: &MeshArgs) -> Result<Output, CliError> {
    let format = args.common.out.format.unwrap_or(Format::Csv);
    if format == Format::Dot {
        return Err(CliError::Usage("mesh supports --format csv or json".into()));
    }
    let setup = Setup::new(&args.common)?;
    let bounds = args.bounds.as_deref().map(input::bounds).transpose()?;
    if setup.s <= 1 && bounds.is_none() {
        return Err(CliError::Usage("strata are unbounded for s <= 1; give --bounds lo:hi per swept coefficient".into()));
    }
    let grid = GridSpec { count: args.grid, bounds };
    let solver = setup.solver()?;
    let occ = occurrence(&setup, &solver)?;
    let sampler = Sampler::new(solver, grid.clone());

    let mut order: Vec<&Composition> = occ.occurring.iter().collect();
    order.sort_by_key(|u| (u.len(), (*u).clone()));
    let s = setup.s;
    let strata: Vec<StratumMesh> = order
        .into_iter()
        .map(|u| stratum(&sampler, u, s))
        .collect();

    let failures = strata.iter().filter(|m| m.error.is_some()).count();
    let summary: Vec<Value> = strata
        .iter()
        .map(|m| {
            json!({
                "composition": m.composition.to_string(),
                "dim": m.dim,
                "tag": m.tag,
                "rows": m.rows.len(),
                "cells": m.cells,
                "solved": m.solved,
                "near_boundary": m.near_boundary,
                "error": m.error,
            })
        })
        .collect();
    let mut meta = setup.meta("mesh", json!({ "grid": grid }));
    meta["strata"] = json!(summary);
    meta["failures"] = json!(failures);

    match format {
        Format::Json => Ok(Output::Json(json!({
            "meta": meta,
            "strata": strata.iter().map(|m| json!({
                "composition": m.composition.to_string(),
                "dim": m.dim,
                "rows": m.rows,
            })).collect::<Vec<_>>(),
        }))),
        _ => Ok(Output::Text(csv(&strata, s, setup.f.degree(), &meta))),
    }
}

fn stratum(sampler: &Sampler, u: &Composition, s: usize) -> StratumMesh {
    let mut out = StratumMesh {
        composition: u.clone(),
        dim: (u.len() as i64 - s as i64).max(0),
        tag: if u.len() > s { StratumTag::FullDim } else { StratumTag::Point },
        rows: Vec::new(),
        cells: None,
        solved: None,
        near_boundary: None,
        error: None,
    };
    let err = |e: starved_core::Error| Some(json!({ "kind": e.kind(), "message": e.to_string() }));
    let class = match sampler.classify(u) {
        Ok(c) => c,
        Err(e) => {
            out.error = err(e);
            return out;
        }
    };
    out.tag = class.tag;
    out.dim = class.dim;
    match class.tag {
        StratumTag::Empty => {}
        StratumTag::Point => {
            let r = class.witness_roots.expect("points carry roots");
            let p = class.witness.expect("points carry a polynomial");
            out.rows.push(Row { roots: r.roots().to_vec(), coeffs: p.coeffs().to_vec() });
        }
        StratumTag::FullDim => match sampler.sample(u) {
            Ok(set) => {
                out.cells = Some(set.cells);
                out.solved = Some(set.solved);
                out.near_boundary = Some(set.near_boundary);
                out.rows = set
                    .samples
                    .into_iter()
                    .map(|smp| Row { coeffs: smp.poly.coeffs().to_vec(), roots: smp.roots })
                    .collect();
            }
            Err(e) => out.error = err(e),
        },
    }
    out
}

fn csv(strata: &[StratumMesh], s: usize, d: usize, meta: &Value) -> String {
    let width = strata.iter().map(|m| m.composition.len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "# {}", serde_json::to_string(meta).expect("metadata serializes"));
    let mut header = vec!["composition".to_string()];
    header.extend((1..=width).map(|j| format!("x{j}")));
    header.extend((s + 1..=d).map(|i| format!("f{i}")));
    let _ = writeln!(out, "{}", header.join(","));
    for m in strata {
        let label = m.composition.label();
        for row in &m.rows {
            let mut cells = vec![label.clone()];
            cells.extend((0..width).map(|j| row.roots.get(j).map(|v| number(*v)).unwrap_or_default()));
            cells.extend(row.coeffs[s..].iter().map(|&v| number(v)));
            let _ = writeln!(out, "{}", cells.join(","));
        }
    }
    out
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite floats serialize")
}
