//! The experiment kinds. Each one returns its artifacts; nothing touches the
//! disk here.

use anyhow::{bail, Context};
use fri_core::branching::{
    couple_cluster_with_mbrw, sample_brw, sample_offspring, transience_diagnostic, write_forest_jsonl, write_tree_jsonl,
};
use fri_core::clusters::{
    decompose_in, grow_cluster_at_origin, moment_diagnostics, run_truncated_process, GrowthLimits, Region,
};
use fri_core::entropy::{entropy_bound, nats_to_bits};
use fri_core::graphs::ball;
use fri_core::process::{
    default_horizon, edges_of, q_k_reference_estimate, sample_fri_window, trace_probability_estimate, vertices_of,
    CountPredicate, TraceEvent, TracePattern,
};
use fri_core::spectral::{
    check_speed_lemma, default_sigma, escape_probability, estimate_rho_power_iteration, estimate_rho_return, EscapeMode,
};
use fri_core::stats::{Estimate, RunningStats};
use fri_core::{FriParams, Window};
use serde_json::json;

use crate::config::{Kind, Units};
use crate::output::{Artifacts, Table};
use crate::row;
use crate::runner::{merge_estimates, Runner};

#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Artifacts,
    pub failed_checks: usize,
    /// Printed to stdout after the run.
    pub summary: Option<String>,
}

pub fn dispatch(r: &mut Runner) -> anyhow::Result<Outcome> {
    match r.kind {
        Kind::Sample => sample(r),
        Kind::Clusters => clusters(r),
        Kind::Growth => growth(r),
        Kind::Truncated => truncated(r),
        Kind::Coupling => coupling(r),
        Kind::Brw => brw(r),
        Kind::Spectral => spectral(r),
        Kind::Entropy => entropy(r),
        Kind::Convergence => convergence(r),
        Kind::Verify => crate::verify::run_suite(r),
    }
}

pub fn rho_hat(r: &Runner) -> anyhow::Result<f64> {
    match r.config.budgets.rho_hat {
        Some(rho) => Ok(rho),
        None => Ok(estimate_rho_power_iteration(&r.oracle, &r.origin(), r.config.budgets.spectral_radius)?.rho_hat),
    }
}

fn sigma(r: &Runner, rho: f64) -> anyhow::Result<f64> {
    match r.config.budgets.sigma {
        Some(s) => Ok(s),
        None => default_sigma(rho, r.oracle.degree_bound()).context("no default sigma; set budgets.sigma"),
    }
}

fn k_window(r: &Runner) -> Window {
    r.config.budgets.k_radius.map_or_else(Window::new, |k| ball(&r.oracle, &r.origin(), k))
}

fn limits(r: &Runner) -> anyhow::Result<GrowthLimits> {
    let b = &r.config.budgets;
    Ok(GrowthLimits::new(b.max_stages, b.vertex_budget)?.confined(r.origin(), b.radius))
}

fn jsonl_header(kind: Kind, cell: usize, p: &FriParams, replica: u64) -> serde_json::Value {
    json!({ "kind": kind, "cell": cell, "u": p.u, "T": p.t, "replica": replica })
}

fn sample(r: &mut Runner) -> anyhow::Result<Outcome> {
    let window = ball(&r.oracle, &r.origin(), r.config.budgets.radius);
    let (replicas, dump) = (r.config.budgets.replicas, r.config.budgets.jsonl_limit);
    let mut table =
        Table::new(&["cell", "u", "T", "replica", "n_walks", "n_distinct", "n_vertices", "n_edges", "max_len"]);
    let mut jsonl = Vec::new();
    for (cell, p) in r.config.grid.cells() {
        let oracle = r.oracle.clone();
        let rows = r.replicas("window", Some((cell, &p)), replicas, |i, rng| {
            let c = sample_fri_window(&oracle, &p, &window, &Window::new(), rng)?;
            let max_len = c.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
            let row =
                row![cell, p.u, p.t, i, c.total(), c.support_len(), vertices_of(&c).len(), edges_of(&c).len(), max_len];
            let mut bytes = Vec::new();
            if i < dump {
                let mut header = jsonl_header(Kind::Sample, cell, &p, i);
                header["window_radius"] = json!(window.len());
                c.write_jsonl(&mut bytes, &header)?;
            }
            Ok((row, bytes))
        })?;
        for (row, bytes) in rows {
            table.push(row);
            jsonl.extend(bytes);
        }
    }
    let mut out = Outcome::default();
    out.artifacts.table("sample.csv", &table)?;
    out.artifacts.jsonl("sample.jsonl", jsonl);
    Ok(out)
}

fn clusters(r: &mut Runner) -> anyhow::Result<Outcome> {
    let radius = r.config.budgets.radius;
    let window = ball(&r.oracle, &r.origin(), radius);
    let regions = vec![Region::new(r.origin(), radius)];
    let mut table =
        Table::new(&["cell", "u", "T", "replica", "n_walks", "n_clusters", "largest", "second", "boundary_reaching"]);
    for (cell, p) in r.config.grid.cells() {
        let oracle = r.oracle.clone();
        let rows = r.replicas("clusters", Some((cell, &p)), r.config.budgets.replicas, |i, rng| {
            let c = sample_fri_window(&oracle, &p, &window, &Window::new(), rng)?;
            let d = decompose_in(&oracle, &c, &regions);
            let sizes = d.sizes();
            let nth = |k: usize| sizes.get(k).copied().unwrap_or(0);
            Ok(row![cell, p.u, p.t, i, c.total(), d.len(), nth(0), nth(1), d.boundary_reaching()])
        })?;
        table.rows.extend(rows);
    }
    let mut out = Outcome::default();
    out.artifacts.table("clusters.csv", &table)?;
    Ok(out)
}

fn growth(r: &mut Runner) -> anyhow::Result<Outcome> {
    let limits = limits(r)?;
    let x = r.origin();
    let mut table = Table::new(&["cell", "u", "T", "replica", "n_vertices", "n_edges", "n_walks", "stages", "status"]);
    for (cell, p) in r.config.grid.cells() {
        let oracle = r.oracle.clone();
        let rows = r.replicas("growth", Some((cell, &p)), r.config.budgets.replicas, |i, rng| {
            let s = grow_cluster_at_origin(&oracle, &p, &x, &limits, rng)?.summary();
            Ok((
                row![cell, p.u, p.t, i, s.n_vertices, s.n_edges, s.n_walks, s.stages, status_name(s.status)],
                s.status.truncated(),
            ))
        })?;
        for (row, truncated) in rows {
            r.truncated_runs += u64::from(truncated);
            table.push(row);
        }
    }
    let mut out = Outcome::default();
    out.artifacts.table("growth.csv", &table)?;
    Ok(out)
}

pub fn status_name(s: fri_core::clusters::GrowthStatus) -> &'static str {
    use fri_core::clusters::GrowthStatus::*;
    match s {
        Complete => "complete",
        BoundaryReached => "boundary_reached",
        StageLimit => "stage_limit",
        BudgetExceeded => "budget_exceeded",
    }
}

fn truncated(r: &mut Runner) -> anyhow::Result<Outcome> {
    let rho = rho_hat(r)?;
    let sigma = sigma(r, rho)?;
    let l = ball(&r.oracle, &r.origin(), r.config.budgets.radius);
    let k = k_window(r);
    let mut table = Table::new(&["cell", "u", "T", "replica", "retained", "n_vertices"]);
    let mut summary = Table::new(&[
        "cell",
        "u",
        "T",
        "n_reports",
        "rho_hat",
        "sigma",
        "n_L",
        "n_K",
        "retained_mean",
        "retained_stderr",
        "retained_lower_bound",
        "retained_bound_holds",
        "vertices_mean",
        "vertices_stderr",
        "vertices_lower_bound",
        "vertices_bound_holds",
        "vertices_variance",
        "variance_upper_bound",
        "variance_bound_holds",
        "concentration_bound",
        "concentration_frequency",
        "shell_condition",
        "small_u_guard",
    ]);
    for (cell, p) in r.config.grid.cells() {
        if p.integer_t().is_none() {
            bail!("the truncated process needs integer T, got {}", p.t);
        }
        let oracle = r.oracle.clone();
        let reports = r.replicas("truncated", Some((cell, &p)), r.config.budgets.replicas, |_, rng| {
            Ok(run_truncated_process(&oracle, &p, &l, &k, sigma, rng)?)
        })?;
        for (i, rep) in reports.iter().enumerate() {
            table.push(row![cell, p.u, p.t, i, rep.retained, rep.n_vertices]);
        }
        if reports.len() >= fri_core::defaults::MIN_MOMENT_REPORTS {
            let m = moment_diagnostics(&reports, rho)?;
            summary.push(row![
                cell,
                p.u,
                p.t,
                m.n_reports,
                rho,
                sigma,
                l.len(),
                k.len(),
                m.retained.mean,
                m.retained.stderr,
                m.retained_lower_bound,
                m.retained_bound_holds,
                m.vertices.mean,
                m.vertices.stderr,
                m.vertices_lower_bound,
                m.vertices_bound_holds,
                m.vertices_variance,
                m.variance_upper_bound,
                m.variance_bound_holds,
                m.concentration_bound,
                m.concentration_frequency,
                m.shell_condition,
                m.small_u_guard
            ]);
        }
    }
    let mut out = Outcome::default();
    out.artifacts.table("truncated.csv", &table)?;
    out.artifacts.table("truncated_summary.csv", &summary)?;
    Ok(out)
}

fn coupling(r: &mut Runner) -> anyhow::Result<Outcome> {
    let limits = limits(r)?;
    let x = r.origin();
    let (forest_budget, dump) = (r.config.budgets.forest_budget, r.config.budgets.jsonl_limit);
    let mut table = Table::new(&[
        "cell",
        "u",
        "T",
        "replica",
        "cluster_vertices",
        "cluster_edges",
        "cluster_walks",
        "status",
        "forest_vertices",
        "image_vertices",
        "containment_holds",
        "dominated",
        "forest_budget_exhausted",
    ]);
    let mut jsonl = Vec::new();
    let mut violations = 0;
    for (cell, p) in r.config.grid.cells() {
        let oracle = r.oracle.clone();
        let rows = r.replicas("coupling", Some((cell, &p)), r.config.budgets.replicas, |i, rng| {
            let c = couple_cluster_with_mbrw(&oracle, &p, &x, &limits, forest_budget, rng)?;
            let s = c.state.summary();
            let mut bytes = Vec::new();
            if i < dump {
                use std::io::Write;
                writeln!(bytes, "{}", jsonl_header(Kind::Coupling, cell, &p, i))?;
                write_forest_jsonl(&c.forest, &c.map, &mut bytes)?;
            }
            let row = row![
                cell,
                p.u,
                p.t,
                i,
                s.n_vertices,
                s.n_edges,
                s.n_walks,
                status_name(s.status),
                c.forest.len(),
                c.map.distinct_images(),
                c.containment_holds,
                c.dominated(),
                c.forest_budget_exhausted
            ];
            let truncated = s.status.truncated() || c.forest_budget_exhausted;
            Ok((row, bytes, truncated, c.containment_holds))
        })?;
        for (row, bytes, truncated, holds) in rows {
            r.truncated_runs += u64::from(truncated);
            violations += usize::from(!holds);
            table.push(row);
            jsonl.extend(bytes);
        }
    }
    let mut out = Outcome::default();
    out.artifacts.table("coupling.csv", &table)?;
    out.artifacts.jsonl("coupling_forests.jsonl", jsonl);
    out.failed_checks = violations;
    Ok(out)
}

fn brw(r: &mut Runner) -> anyhow::Result<Outcome> {
    let rho = rho_hat(r)?;
    let x = r.origin();
    let d = r.oracle.degree_bound();
    let b = r.config.budgets.clone();
    let mut table = Table::new(&[
        "cell",
        "u",
        "T",
        "depth",
        "mean_visits",
        "stderr",
        "mean_offspring",
        "empirical_offspring",
        "empirical_offspring_stderr",
        "rho_inverse",
        "condition_holds",
        "capped_runs",
    ]);
    let mut jsonl = Vec::new();
    for (cell, p) in r.config.grid.cells() {
        let offspring = r.chunks("offspring", Some((cell, &p)), b.mc_samples, |n, rng| {
            let s: RunningStats = (0..n).map(|_| sample_offspring(&p, d, rng) as f64).collect();
            Ok(s.estimate())
        })?;
        let empirical = merge_estimates(&offspring);
        let oracle = r.oracle.clone();
        let runs = r.replicas("transience", Some((cell, &p)), b.replicas, |_, rng| {
            Ok(transience_diagnostic(&oracle, &p, d, &x, b.depth_limit, 1, rho, rng)?)
        })?;
        let capped: u64 = runs.iter().map(|t| t.capped_runs).sum();
        r.truncated_runs += capped;
        let first = &runs[0];
        for depth in 0..=b.depth_limit {
            let visits: RunningStats = runs
                .iter()
                .filter_map(|t| t.visits_by_depth[depth].mean.is_finite().then_some(t.visits_by_depth[depth].mean))
                .collect();
            let e = visits.estimate();
            table.push(row![
                cell,
                p.u,
                p.t,
                depth,
                e.mean,
                e.stderr,
                first.mean_offspring,
                empirical.mean,
                empirical.stderr,
                first.rho_inverse,
                first.condition_holds,
                capped
            ]);
        }
        let oracle = r.oracle.clone();
        let dumps = r.replicas("trees", Some((cell, &p)), b.jsonl_limit, |i, rng| {
            let (tree, map) = sample_brw(&oracle, &p, d, &x, b.depth_limit, rng)?;
            let mut bytes = Vec::new();
            use std::io::Write;
            writeln!(bytes, "{}", jsonl_header(Kind::Brw, cell, &p, i))?;
            write_tree_jsonl(&tree, &map, &mut bytes)?;
            Ok(bytes)
        })?;
        jsonl.extend(dumps.into_iter().flatten());
    }
    let mut out = Outcome::default();
    out.artifacts.table("brw.csv", &table)?;
    out.artifacts.jsonl("brw_trees.jsonl", jsonl);
    Ok(out)
}

fn spectral(r: &mut Runner) -> anyhow::Result<Outcome> {
    let b = r.config.budgets.clone();
    let x = r.origin();
    let graph = r.oracle.family().label();
    let mut table = Table::new(&["method", "graph", "param", "estimate", "stderr", "radius_or_horizon"]);
    let power = estimate_rho_power_iteration(&r.oracle, &x, b.spectral_radius)?;
    table.push(row![
        power.method.label(),
        graph,
        format!("converged={}", power.converged),
        power.rho_hat,
        power.stderr,
        b.spectral_radius
    ]);
    let oracle = r.oracle.clone();
    let ret =
        r.replicas("return", None, 1, |_, rng| Ok(estimate_rho_return(&oracle, &x, b.n_max, b.mc_samples, rng)?))?;
    let ret = &ret[0];
    table.push(row![ret.method.label(), graph, format!("reliable={}", ret.reliable), ret.rho_hat, ret.stderr, b.n_max]);
    let rho = b.rho_hat.unwrap_or(power.rho_hat);
    let k = Window::singleton(x.clone());
    let horizon = match b.horizon {
        Some(h) => h,
        None => default_horizon(rho).context("no default horizon; set budgets.horizon")?,
    };
    let esc = r.chunks("escape_horizon", None, b.mc_samples, |n, rng| {
        Ok(escape_probability(&oracle, &x, &k, EscapeMode::Horizon(horizon), n, rng)?.estimate)
    })?;
    let esc = merge_estimates(&esc);
    table.push(row!["escape_horizon", graph, "K={x}", esc.mean, esc.stderr, horizon]);
    let sigma = sigma(r, rho).ok();
    // both checks depend on T only
    for t in r.config.grid.t.clone() {
        let tag = format!("escape_killed/T={t}");
        let parts = r.chunks(&tag, None, b.mc_samples, |n, rng| {
            Ok(escape_probability(&oracle, &x, &k, EscapeMode::Killed(t), n, rng)?.estimate)
        })?;
        let e = merge_estimates(&parts);
        table.push(row!["escape_killed", graph, format!("K={{x}};T={t}"), e.mean, e.stderr, ""]);
        let (Some(t), Some(sigma)) = (FriParams::new(1.0, t)?.integer_t(), sigma) else { continue };
        let parts = r.chunks(&format!("speed/T={t}"), None, b.mc_samples, |n, rng| {
            Ok(check_speed_lemma(&oracle, &x, t, sigma, rho, n, rng)?.probability)
        })?;
        let e = merge_estimates(&parts);
        table.push(row!["speed_lemma", graph, format!("T={t};sigma={sigma}"), e.mean, e.stderr, ""]);
    }
    let mut out = Outcome::default();
    out.artifacts.table("spectral.csv", &table)?;
    Ok(out)
}

fn entropy(r: &mut Runner) -> anyhow::Result<Outcome> {
    let s = r.config.entropy.s.unwrap_or_else(|| r.oracle.degree(&r.origin()));
    let conv = |h: f64| match r.config.entropy.units {
        Units::Nats => h,
        Units::Bits => nats_to_bits(h),
    };
    let mut table = Table::new(&["u", "T", "s", "h_N", "h_L", "h_W", "total", "total_over_u"]);
    for (_, p) in r.config.grid.cells() {
        let e = entropy_bound(p.u, p.t, s)?;
        table.push(row![p.u, p.t, s, conv(e.h_n), conv(e.h_l), conv(e.h_w), conv(e.total), conv(e.total_over_u())]);
    }
    let mut out = Outcome::default();
    out.artifacts.table("entropy.csv", &table)?;
    Ok(out)
}

fn convergence(r: &mut Runner) -> anyhow::Result<Outcome> {
    let rho = rho_hat(r)?;
    if !r.oracle.family().known_transient() && !(rho < 1.0) {
        bail!("convergence needs a transient graph; {} is not known to be transient", r.oracle.family().label());
    }
    let b = r.config.budgets.clone();
    let horizon = match b.horizon {
        Some(h) => h,
        None => default_horizon(rho)?,
    };
    let x = r.origin();
    let k = match b.k_radius {
        Some(_) => k_window(r),
        None => Window::singleton(x.clone()),
    };
    let oracle = r.oracle.clone();
    let parts = r.chunks("ri_reference", None, b.mc_samples, |n, rng| {
        Ok(q_k_reference_estimate(&oracle, &k, &TracePattern::Any, horizon, n, rng)?)
    })?;
    let mass = merge_estimates(&parts.iter().map(|(q, n)| (q.mass, *n)).collect::<Vec<_>>());
    let truncation = parts.iter().map(|(q, n)| q.truncation_rate * *n as f64).sum::<f64>() / b.mc_samples as f64;
    let too_small = truncation > fri_core::defaults::TRUNCATION_RATE_LIMIT;
    let reference =
        fri_core::process::QkEstimate { mass, horizon, truncation_rate: truncation, horizon_too_small: too_small };
    let event = TraceEvent::new(k.clone(), TracePattern::Any, CountPredicate::Zero)?;
    let mut table = Table::new(&[
        "cell",
        "u",
        "T",
        "fri_estimate",
        "fri_stderr",
        "ri_estimate",
        "ri_stderr",
        "abs_diff",
        "combined_stderr",
        "horizon",
        "truncation_rate",
        "horizon_too_small",
    ]);
    for (cell, p) in r.config.grid.cells() {
        let parts = r.chunks("fri_trace", Some((cell, &p)), b.mc_samples, |n, rng| {
            Ok(trace_probability_estimate(&oracle, &p, &event, n, rng)?)
        })?;
        let fri: Estimate = merge_estimates(&parts);
        let ri = reference.count_probability(p.u, CountPredicate::Zero);
        table.push(row![
            cell,
            p.u,
            p.t,
            fri.mean,
            fri.stderr,
            ri.mean,
            ri.stderr,
            (fri.mean - ri.mean).abs(),
            fri.combined_stderr(&ri),
            horizon,
            truncation,
            too_small
        ]);
    }
    let mut out = Outcome::default();
    out.artifacts.table("convergence.csv", &table)?;
    Ok(out)
}
