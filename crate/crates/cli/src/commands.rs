use std::path::PathBuf;

use clap::Args;
use lapsum_core::arith::{format_rational, parse_rational, to_f64, BigInt, BigRational};
use lapsum_core::counting::{
    compare_tabulated_q3, q_d_sequence, q_h_sequence, source_equivalence, verify_h_bound, verify_ode, verify_polya,
    verify_psi, IdentityReport, SeqKind,
};
use lapsum_core::diagrams::{count_diagrams, enumerate_diagrams, Diagram};
use lapsum_core::exactcum::{
    cumulant_polynomials, cumulant_table, exact_leading_coefficient, extrapolate_histograms, partition_function,
    GraphHistogram, DECOMPOSITION_TOLERANCE,
};
use lapsum_core::mc::{convergence_table, estimate_cumulants, exact_mean, scaling_slope, McEstimate};
use lapsum_core::weights::{
    cumulant_coefficient, diagram_weight, free_energy_series, free_energy_sparse, partition_shape_report,
    sparse_coefficient,
};
use lapsum_core::{Error, Result};
use serde_json::{json, Map, Value};

use crate::output::{decimal, Report, Table};
use crate::Context;

fn rational_arg(s: &str) -> std::result::Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn rat(x: &BigRational) -> Value {
    json!(format_rational(x))
}

fn dec(x: f64) -> Value {
    json!(decimal(x))
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

fn check_order(requested: usize, ctx: &Context, what: &'static str) -> Result<()> {
    if requested > ctx.max_order {
        return Err(Error::Budget {
            what,
            requested,
            limit: ctx.max_order,
            flag: "max-order",
        });
    }
    Ok(())
}

fn check_probability(p: &BigRational) -> Result<()> {
    if p < &BigRational::from_integer(0.into()) || p > &BigRational::from_integer(1.into()) {
        return invalid(format!("p = {} is not a probability", format_rational(p)));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct CountArgs {
    /// Valence of the star vertices.
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// Largest k.
    #[arg(long, default_value_t = 6)]
    kmax: usize,
}

pub fn count(a: &CountArgs, ctx: &Context) -> Result<Report> {
    if a.q < 2 || a.kmax < 1 {
        return invalid("need q >= 2 and kmax >= 1");
    }
    check_order(a.kmax, ctx, "sequence length kmax")?;
    let d = q_d_sequence(a.q, a.kmax)?;
    let h = q_h_sequence(a.q, a.kmax)?;
    source_equivalence(a.q, a.kmax)?;
    let mut sources = vec!["convolution", "h-recurrence", "ode"];
    match a.q {
        2 => sources.extend(["closed-form", "d-recurrence"]),
        3 => sources.push("three-valent-recurrence"),
        _ => {}
    }
    let mut r = Report::new("count");
    r.param("q", a.q);
    r.param("kmax", a.kmax);
    let mut results = json!({
        "q": a.q,
        "kmax": a.kmax,
        "d": d.values.iter().map(rat).collect::<Vec<_>>(),
        "h": h.values.iter().map(rat).collect::<Vec<_>>(),
        "sources": sources,
        "sources_agree": true,
    });
    r.line(format!("q = {}, k = 1..{} (sources agree: {})", a.q, a.kmax, sources.join(", ")));
    let mut rows = Vec::new();
    for k in 1..=a.kmax {
        let (dk, hk) = (format_rational(d.get(k).unwrap()), format_rational(h.get(k).unwrap()));
        r.line(format!("d_{k} = {dk}    h_{k} = {hk}"));
        rows.push(vec![k.to_string(), dk, hk]);
    }
    if a.q == 3 {
        let cmp = compare_tabulated_q3(a.kmax)?;
        let mut discrepancy = false;
        let entries: Vec<Value> = cmp
            .iter()
            .map(|c| {
                let name = if c.kind == SeqKind::D { "d" } else { "h" };
                if !c.agrees() {
                    discrepancy = true;
                    let msg = format!(
                        "computed {name}_{} = {} differs from the tabulated value {} (all computed routes agree)",
                        c.index,
                        format_rational(&c.computed),
                        format_rational(&c.tabulated)
                    );
                    r.line(format!("DISCREPANCY: {msg}"));
                    r.notes.push(msg);
                }
                json!({
                    "kind": name,
                    "index": c.index,
                    "computed": rat(&c.computed),
                    "tabulated": rat(&c.tabulated),
                    "agrees": c.agrees(),
                })
            })
            .collect();
        results["tabulated"] = json!(entries);
        results["discrepancy"] = json!(discrepancy);
    }
    r.results = results;
    r.table = Some(Table {
        header: vec!["k", "d", "h"],
        rows,
    });
    Ok(r)
}

#[derive(Args, Debug)]
pub struct DiagramsArgs {
    /// Number of star vertices.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    q: usize,
    /// List every diagram in canonical text form.
    #[arg(long)]
    emit: bool,
}

pub fn diagrams(a: &DiagramsArgs, ctx: &Context) -> Result<Report> {
    let listed = if a.emit {
        Some(enumerate_diagrams(a.k, a.q, &ctx.budgets)?)
    } else {
        None
    };
    let count = match &listed {
        Some(l) => l.len() as u64,
        None => count_diagrams(a.k, a.q, &ctx.budgets)?,
    };
    let expected = q_d_sequence(a.q, a.k)?.get(a.k).unwrap().to_integer();
    if BigInt::from(count) != expected {
        return Err(Error::Consistency(format!(
            "enumeration found {count} diagrams for k={}, q={} but the counting sequence gives {expected}",
            a.k, a.q
        )));
    }
    let mut r = Report::new("diagrams");
    r.param("k", a.k);
    r.param("q", a.q);
    r.param("emit", a.emit);
    let mut results = json!({
        "k": a.k,
        "q": a.q,
        "count": count.to_string(),
        "expected": expected.to_string(),
        "sources_agree": true,
    });
    if let Some(l) = &listed {
        for d in l {
            r.line(d.to_string());
        }
        results["diagrams"] = json!(l.iter().map(ToString::to_string).collect::<Vec<_>>());
        r.table = Some(Table {
            header: vec!["index", "diagram"],
            rows: l.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), d.to_string()]).collect(),
        });
    }
    r.line(format!("k = {}, q = {}: {count} diagrams (counting sequence: {expected})", a.k, a.q));
    if a.q == 3 {
        if let Some(c) = compare_tabulated_q3(a.k)?
            .into_iter()
            .find(|c| c.kind == SeqKind::D && c.index == a.k)
        {
            results["tabulated"] = rat(&c.tabulated);
            results["discrepancy"] = json!(!c.agrees());
            if !c.agrees() {
                let msg = format!(
                    "enumerated d_{} = {count} differs from the tabulated value {}",
                    a.k,
                    format_rational(&c.tabulated)
                );
                r.line(format!("DISCREPANCY: {msg}"));
                r.notes.push(msg);
            }
        }
    }
    r.results = results;
    Ok(r)
}

#[derive(Args, Debug)]
pub struct WeightsArgs {
    /// Cumulant order.
    #[arg(long)]
    k: usize,
    /// Edge probabilities at which to evaluate (comma separated, e.g. 1/2,0.3).
    #[arg(long, value_delimiter = ',', value_parser = rational_arg)]
    p: Vec<BigRational>,
    /// Also report the regrouping by partition shape.
    #[arg(long)]
    shapes: bool,
    /// Weight of a single diagram given in canonical text form.
    #[arg(long)]
    diagram: Option<String>,
}

pub fn weights(a: &WeightsArgs, ctx: &Context) -> Result<Report> {
    for p in &a.p {
        check_probability(p)?;
    }
    let mut r = Report::new("weights");
    r.param("k", a.k);
    r.param("p", a.p.iter().map(rat).collect::<Vec<_>>());
    r.param("shapes", a.shapes);
    r.param("diagram", a.diagram.clone());
    let (w, scope) = match &a.diagram {
        Some(text) => (diagram_weight(&Diagram::parse(text, a.k, 2)?, &ctx.budgets)?, "diagram"),
        None => (cumulant_coefficient(a.k, &ctx.budgets)?, "cumulant"),
    };
    let mut results = json!({
        "scope": scope,
        "polynomial": w.to_json(),
        "display": w.poly.to_string(),
    });
    r.line(format!("{} = {}", if scope == "diagram" { "w" } else { "C" }, w.poly));
    if scope == "cumulant" {
        let sparse = sparse_coefficient(a.k)?;
        let lowest = w.poly.coeff(a.k + 1);
        if lowest != sparse {
            return Err(Error::Consistency(format!(
                "lowest coefficient {lowest} of C_{} differs from 2^(k-1) d_k = {sparse}",
                a.k
            )));
        }
        results["orientation_multiplicity"] = json!((BigInt::from(1) << (a.k - 1)).to_string());
        results["sparse_coefficient"] = json!(sparse.to_string());
        results["sparse_consistent"] = json!(true);
        r.line(format!("lowest coefficient = 2^(k-1) d_k = {sparse}"));
    }
    let evals: Vec<Value> = a
        .p
        .iter()
        .map(|p| {
            let v = w.eval(p);
            r.line(format!("at p = {}: {} ≈ {}", format_rational(p), format_rational(&v), decimal(to_f64(&v))));
            json!({ "p": rat(p), "exact": rat(&v), "decimal": dec(to_f64(&v)) })
        })
        .collect();
    results["evaluations"] = json!(evals);
    if a.shapes {
        let shapes = partition_shape_report(a.k, &ctx.budgets)?;
        results["shapes"] = json!(shapes
            .iter()
            .map(|(s, p)| {
                r.line(format!("W{s:?} = {p}"));
                json!({ "shape": s, "display": p.to_string() })
            })
            .collect::<Vec<_>>());
    }
    r.table = Some(Table {
        header: vec!["exponent", "coefficient"],
        rows: w.poly.terms().map(|(e, c)| vec![e.to_string(), c.to_string()]).collect(),
    });
    r.results = results;
    Ok(r)
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    /// Number of vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (exact rational or decimal).
    #[arg(long, value_parser = rational_arg, default_value = "1/2")]
    p: BigRational,
    /// Highest moment/cumulant order.
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    /// Histogram cache file: loaded if present, written otherwise.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Evaluate the partition function at this β.
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Quartic coupling for the partition function.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    g: f64,
    /// Report cumulants as polynomials in p.
    #[arg(long)]
    polynomials: bool,
    /// Extrapolate Cum_k(X_n)/n^(k+2) over --n-list instead.
    #[arg(long)]
    extrapolate: bool,
    /// Cumulant order for --extrapolate.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 5, 6, 7])]
    n_list: Vec<usize>,
}

fn load_or_build(n: usize, cache: &Option<PathBuf>, ctx: &Context, r: &mut Report) -> Result<GraphHistogram> {
    let Some(path) = cache else {
        return GraphHistogram::build(n, &ctx.budgets);
    };
    if path.exists() {
        let h = GraphHistogram::from_cache_string(&std::fs::read_to_string(path)?)?;
        if h.n() != n {
            return invalid(format!("cache {} holds n = {}, not n = {n}", path.display(), h.n()));
        }
        r.notes.push(format!("loaded histogram from {}", path.display()));
        Ok(h)
    } else {
        let h = GraphHistogram::build(n, &ctx.budgets)?;
        std::fs::write(path, h.to_cache_string())?;
        r.notes.push(format!("wrote histogram to {}", path.display()));
        Ok(h)
    }
}

pub fn exact(a: &ExactArgs, ctx: &Context) -> Result<Report> {
    check_probability(&a.p)?;
    let mut r = Report::new("exact");
    r.param("p", rat(&a.p));
    if a.extrapolate {
        return extrapolate(a, ctx, r);
    }
    let Some(n) = a.n else {
        return invalid("--n is required (or use --extrapolate)");
    };
    if a.kmax == 0 {
        return invalid("kmax must be at least 1");
    }
    r.param("n", n);
    r.param("kmax", a.kmax);
    r.param("beta", a.beta.map(decimal));
    r.param("g", decimal(a.g));
    r.param("polynomials", a.polynomials);
    r.param("cache", a.cache.as_ref().map(|p| p.display().to_string()));
    let h = load_or_build(n, &a.cache, ctx, &mut r)?;
    h.validate()?;
    let t = cumulant_table(&h, &a.p, a.kmax, &ctx.budgets)?;
    let mut results = json!({
        "n": n,
        "p": rat(&a.p),
        "graphs": h.total().to_string(),
        "moments": t.moments.iter().map(rat).collect::<Vec<_>>(),
        "cumulants": t.cumulants.iter().map(rat).collect::<Vec<_>>(),
        "cumulants_decimal": t.cumulants.iter().map(|c| dec(to_f64(c))).collect::<Vec<_>>(),
    });
    r.line(format!("n = {n}, p = {} ({} graphs)", format_rational(&a.p), h.total()));
    let mut rows = Vec::new();
    for k in 1..=a.kmax {
        let (m, c) = (&t.moments[k - 1], &t.cumulants[k - 1]);
        r.line(format!("m_{k} = {}    Cum_{k} = {}", format_rational(m), format_rational(c)));
        rows.push(vec![k.to_string(), format_rational(m), format_rational(c), decimal(to_f64(c))]);
    }
    r.table = Some(Table {
        header: vec!["k", "moment", "cumulant", "cumulant_decimal"],
        rows,
    });
    if a.polynomials {
        let polys = cumulant_polynomials(&h, a.kmax, &ctx.budgets)?;
        for (k, p) in polys.iter().enumerate() {
            r.line(format!("Cum_{}(p) = {p}", k + 1));
        }
        results["cumulant_polynomials"] = json!(polys.iter().map(ToString::to_string).collect::<Vec<_>>());
    }
    if let Some(beta) = a.beta {
        let pf = partition_function(&h, beta, a.g)?;
        pf.verify(DECOMPOSITION_TOLERANCE)?;
        r.line(format!(
            "Z = {}  Ẑ = {}  prefactor = {}  E e^(gX) = {}  identity error = {}",
            decimal(pf.z),
            decimal(pf.z_hat),
            decimal(pf.prefactor),
            decimal(pf.expectation),
            decimal(pf.identity_rel_error)
        ));
        results["partition_function"] = json!({
            "beta": dec(beta),
            "g": dec(a.g),
            "z": dec(pf.z),
            "ln_z": dec(pf.ln_z),
            "z_hat": dec(pf.z_hat),
            "prefactor": dec(pf.prefactor),
            "expectation": dec(pf.expectation),
            "identity_rel_error": dec(pf.identity_rel_error),
            "tolerance": dec(DECOMPOSITION_TOLERANCE),
        });
    }
    r.results = results;
    Ok(r)
}

fn extrapolate(a: &ExactArgs, ctx: &Context, mut r: Report) -> Result<Report> {
    r.param("extrapolate", true);
    r.param("k", a.k);
    r.param("n_list", a.n_list.clone());
    let n_max = a.n_list.iter().copied().max().unwrap_or(0);
    if a.n_list.contains(&0) {
        return invalid("n values must be positive");
    }
    // every n up to the largest, so the exact limit can be interpolated too
    let all: Vec<GraphHistogram> = (1..=n_max)
        .map(|n| GraphHistogram::build(n, &ctx.budgets))
        .collect::<Result<_>>()?;
    let chosen: Vec<GraphHistogram> = a.n_list.iter().map(|&n| all[n - 1].clone()).collect();
    let ex = extrapolate_histograms(a.k, &a.p, &chosen, &ctx.budgets)?;
    let mut results = json!({
        "k": a.k,
        "p": rat(&a.p),
        "n": ex.ns,
        "ratios": ex.ratios.iter().map(|&v| dec(v)).collect::<Vec<_>>(),
        "richardson": ex.richardson.iter().map(|&v| dec(v)).collect::<Vec<_>>(),
        "estimate": dec(ex.estimate),
        "residual": dec(ex.residual),
        "monotone": ex.monotone,
    });
    let mut rows = Vec::new();
    for (i, n) in ex.ns.iter().enumerate() {
        let rich = if i == 0 { String::new() } else { decimal(ex.richardson[i - 1]) };
        r.line(format!("n = {n}: Cum_{}/n^{} = {}  Richardson = {rich}", a.k, a.k + 2, decimal(ex.ratios[i])));
        rows.push(vec![n.to_string(), decimal(ex.ratios[i]), rich]);
    }
    r.line(format!("estimate = {}, residual = {}, monotone = {}", decimal(ex.estimate), decimal(ex.residual), ex.monotone));
    if a.k <= ctx.budgets.max_weight_k {
        let c = cumulant_coefficient(a.k, &ctx.budgets)?;
        let target = c.eval(&a.p);
        let tf = to_f64(&target);
        let rel = if tf == 0.0 { f64::NAN } else { (ex.estimate - tf).abs() / tf.abs() };
        r.line(format!("C_{}(p) = {} = {}  (relative deviation {})", a.k, c.poly, format_rational(&target), decimal(rel)));
        results["target"] = json!({ "polynomial": c.poly.to_string(), "exact": rat(&target), "decimal": dec(tf) });
        results["relative_deviation"] = dec(rel);
        results["relative_residual"] = dec(if tf == 0.0 { f64::NAN } else { ex.residual / tf.abs() });
    }
    if n_max >= a.k + 2 {
        let lead = exact_leading_coefficient(a.k, &all, &ctx.budgets)?;
        r.line(format!("exact lim Cum_{}/n^{} = {}", a.k, a.k + 2, lead));
        results["exact_limit"] = json!({ "polynomial": lead.to_string(), "at_p": rat(&lead.eval(&a.p)) });
    }
    r.table = Some(Table {
        header: vec!["n", "ratio", "richardson"],
        rows,
    });
    r.results = results;
    Ok(r)
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Mean-degree parameter: p = cbar / n.
    #[arg(long, default_value_t = 100.0)]
    cbar: f64,
    /// Estimate cumulants 1..=kmax (at most 4).
    #[arg(long, default_value_t = 2)]
    kmax: usize,
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    /// Convergence-table mode: grid of n values.
    #[arg(long, value_delimiter = ',')]
    n_list: Vec<usize>,
    /// Convergence-table mode: grid of cbar values.
    #[arg(long, value_delimiter = ',')]
    cbar_list: Vec<f64>,
    /// Cumulant order tabulated in convergence-table mode.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

const MC_HEADER: [&str; 9] = ["n", "cbar", "k", "R", "estimate", "std_error", "normalized", "target", "seed"];

fn mc_row(e: &McEstimate) -> Vec<String> {
    vec![
        e.n.to_string(),
        decimal(e.cbar),
        e.k.to_string(),
        e.replicates.to_string(),
        decimal(e.estimate),
        decimal(e.std_error),
        decimal(e.normalized),
        decimal(e.target),
        e.seed.to_string(),
    ]
}

fn mc_json(e: &McEstimate) -> Value {
    json!({
        "n": e.n,
        "cbar": dec(e.cbar),
        "k": e.k,
        "R": e.replicates,
        "estimate": dec(e.estimate),
        "std_error": dec(e.std_error),
        "normalized": dec(e.normalized),
        "normalized_std_error": dec(e.normalized_std_error()),
        "target": dec(e.target),
        "z_target": dec(e.z_score(e.target)),
        "seed": e.seed,
    })
}

pub fn mc(a: &McArgs, ctx: &Context) -> Result<Report> {
    let mut r = Report::new("mc");
    r.param("replicates", a.replicates);
    if !a.n_list.is_empty() || !a.cbar_list.is_empty() {
        let ns = if a.n_list.is_empty() { vec![a.n] } else { a.n_list.clone() };
        let cbars = if a.cbar_list.is_empty() { vec![a.cbar] } else { a.cbar_list.clone() };
        r.param("k", a.k);
        r.param("n_list", ns.clone());
        r.param("cbar_list", cbars.iter().map(|&c| decimal(c)).collect::<Vec<_>>());
        let t = convergence_table(a.k, &ns, &cbars, a.replicates, ctx.seed)?;
        let mut rows = Vec::new();
        let mut cells = Vec::new();
        for c in &t.cells {
            match &c.result {
                Ok(e) => {
                    r.line(format!(
                        "n = {}, cbar = {}: normalized Cum_{} = {} ± {} (target {})",
                        c.n,
                        decimal(c.cbar),
                        a.k,
                        decimal(e.normalized),
                        decimal(e.normalized_std_error()),
                        decimal(e.target)
                    ));
                    rows.push(mc_row(e));
                    cells.push(mc_json(e));
                }
                Err(msg) => {
                    r.line(format!("n = {}, cbar = {}: error: {msg}", c.n, decimal(c.cbar)));
                    cells.push(json!({ "n": c.n, "cbar": dec(c.cbar), "error": msg }));
                }
            }
        }
        let trends: Vec<Value> = t
            .trends
            .iter()
            .map(|tr| {
                json!({
                    "along": tr.along,
                    "fixed": dec(tr.fixed),
                    "distances": tr.distances.iter().map(|&d| dec(d)).collect::<Vec<_>>(),
                    "monotone_toward_target": tr.monotone_toward_target,
                })
            })
            .collect();
        let mut slopes = Vec::new();
        for &n in &ns {
            let pts: Vec<(f64, f64)> = t
                .cells
                .iter()
                .filter(|c| c.n == n)
                .filter_map(|c| c.result.as_ref().ok().map(|e| (e.cbar, e.estimate)))
                .collect();
            if let Ok(s) = scaling_slope(&pts) {
                r.line(format!("n = {n}: log-log slope of Cum_{} vs cbar = {} (law: {})", a.k, decimal(s), a.k + 1));
                slopes.push(json!({ "n": n, "slope": dec(s), "expected": a.k + 1 }));
            }
        }
        r.results = json!({ "k": a.k, "cells": cells, "trends": trends, "slopes": slopes });
        r.table = Some(Table {
            header: MC_HEADER.to_vec(),
            rows,
        });
        return Ok(r);
    }
    r.param("n", a.n);
    r.param("cbar", decimal(a.cbar));
    r.param("kmax", a.kmax);
    let est = estimate_cumulants(a.n, a.cbar, a.kmax, a.replicates, ctx.seed)?;
    let mut results = json!({ "estimates": est.iter().map(mc_json).collect::<Vec<_>>() });
    for e in &est {
        r.line(format!(
            "Cum_{}: {} ± {}  normalized {} ± {}  (target {})",
            e.k,
            decimal(e.estimate),
            decimal(e.std_error),
            decimal(e.normalized),
            decimal(e.normalized_std_error()),
            decimal(e.target)
        ));
    }
    if a.cbar > 0.0 {
        let p = a.cbar / a.n as f64;
        let exact_norm = exact_mean(a.n, p) / (a.n as f64 * a.cbar * a.cbar);
        let e1 = &est[0];
        results["mean_reference"] = json!({
            "exact_normalized": dec(exact_norm),
            "one_plus_inverse_cbar": dec(1.0 + 1.0 / a.cbar),
            "z_exact": dec(e1.z_score(exact_norm)),
            "z_one_plus_inverse_cbar": dec(e1.z_score(1.0 + 1.0 / a.cbar)),
        });
        r.line(format!("exact normalized mean = {} (1 + 1/cbar = {})", decimal(exact_norm), decimal(1.0 + 1.0 / a.cbar)));
    }
    r.results = results;
    r.table = Some(Table {
        header: MC_HEADER.to_vec(),
        rows: est.iter().map(mc_row).collect(),
    });
    Ok(r)
}

#[derive(Args, Debug)]
pub struct FreeEnergyArgs {
    /// Coupling g.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.01)]
    g: f64,
    /// Truncation order of the evaluation.
    #[arg(long, default_value_t = 10)]
    order: usize,
    /// Number of D(τ) coefficients to list.
    #[arg(long, default_value_t = 12)]
    coeffs: usize,
}

pub fn free_energy(a: &FreeEnergyArgs, ctx: &Context) -> Result<Report> {
    if a.order == 0 || a.coeffs == 0 {
        return invalid("order and coeffs must be at least 1");
    }
    check_order(a.order.max(a.coeffs), ctx, "series order")?;
    let mut r = Report::new("free-energy");
    r.param("g", decimal(a.g));
    r.param("order", a.order);
    r.param("coeffs", a.coeffs);
    let series = free_energy_series(a.coeffs)?;
    let coeffs: Vec<Value> = (1..=a.coeffs).map(|k| rat(series.coeff(k))).collect();
    let mut rows = Vec::new();
    for k in 1..=a.coeffs {
        let c = format_rational(series.coeff(k));
        r.line(format!("D_{k} = {c}"));
        rows.push(vec![k.to_string(), c]);
    }
    let mut results = json!({ "coefficients": coeffs });
    match free_energy_sparse(a.g, a.order) {
        Ok(fe) => {
            r.line(format!(
                "g = {}: value = {}  residual bound = {}  tau = {}  dominant term = {}",
                decimal(a.g),
                decimal(fe.value),
                decimal(fe.residual),
                decimal(fe.tau),
                fe.dominant_term
            ));
            results["evaluation"] = json!({
                "g": dec(a.g),
                "order": a.order,
                "tau": dec(fe.tau),
                "value": dec(fe.value),
                "residual": dec(fe.residual),
                "last_ratio": dec(fe.last_ratio),
                "dominant_term": fe.dominant_term,
                "terms": fe.terms.iter().map(|&t| dec(t)).collect::<Vec<_>>(),
            });
            results["refused"] = json!(false);
        }
        Err(Error::Convergence(msg)) => {
            r.line(format!("evaluation refused: {msg}"));
            r.notes.push(format!("evaluation refused: {msg}"));
            results["refused"] = json!(true);
            results["reason"] = json!(msg);
            r.code = 2;
        }
        Err(e) => return Err(e),
    }
    r.results = results;
    r.table = Some(Table {
        header: vec!["k", "coefficient"],
        rows,
    });
    Ok(r)
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Order for the two-valent identities.
    #[arg(long, default_value_t = 50)]
    order: usize,
    /// Order for valences 3..=q-max.
    #[arg(long, default_value_t = 30)]
    q_order: usize,
    #[arg(long, default_value_t = 6)]
    q_max: usize,
    /// Largest k for the h_k ≤ 8^k bound.
    #[arg(long, default_value_t = 60)]
    bound_k: usize,
}

fn report_json(rep: &IdentityReport) -> Value {
    json!({
        "name": rep.name,
        "q": rep.q,
        "order": rep.order,
        "holds": rep.holds,
        "first_mismatch": rep.first_mismatch,
    })
}

pub fn verify(a: &VerifyArgs, ctx: &Context) -> Result<Report> {
    if a.order < 2 || a.q_order < 2 || a.q_max < 2 {
        return invalid("orders must be at least 2 and q-max at least 2");
    }
    check_order(a.order.max(a.q_order).max(a.bound_k), ctx, "identity order")?;
    let mut r = Report::new("verify");
    r.param("order", a.order);
    r.param("q_order", a.q_order);
    r.param("q_max", a.q_max);
    r.param("bound_k", a.bound_k);
    let mut reports = Vec::new();
    for q in 2..=a.q_max {
        let order = if q == 2 { a.order } else { a.q_order };
        reports.push(verify_polya(q, order)?);
        reports.push(verify_ode(q, order)?);
        reports.extend(verify_psi(q, order)?);
        let name = "source_equivalence".to_string();
        reports.push(match source_equivalence(q, order) {
            Ok(()) => IdentityReport {
                name,
                q,
                order,
                holds: true,
                first_mismatch: None,
            },
            Err(Error::Consistency(msg)) => {
                r.notes.push(msg);
                IdentityReport {
                    name,
                    q,
                    order,
                    holds: false,
                    first_mismatch: None,
                }
            }
            Err(e) => return Err(e),
        });
    }
    reports.push(verify_h_bound(a.bound_k)?);
    let mut rows = Vec::new();
    for rep in &reports {
        let status = if rep.holds { "PASS" } else { "FAIL" };
        let mismatch = rep.first_mismatch.map(|m| m.to_string()).unwrap_or_default();
        r.line(format!("{status} {} q={} order={} {mismatch}", rep.name, rep.q, rep.order));
        rows.push(vec![rep.name.clone(), rep.q.to_string(), rep.order.to_string(), rep.holds.to_string(), mismatch]);
    }
    let all = reports.iter().all(|rep| rep.holds);
    if !all {
        r.code = 4;
    }
    let mut m = Map::new();
    m.insert("all_hold".into(), json!(all));
    m.insert("reports".into(), json!(reports.iter().map(report_json).collect::<Vec<_>>()));
    r.results = Value::Object(m);
    r.table = Some(Table {
        header: vec!["identity", "q", "order", "holds", "first_mismatch"],
        rows,
    });
    Ok(r)
}
