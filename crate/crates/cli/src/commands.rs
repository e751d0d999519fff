//! Subcommand implementations: build the model and inputs from the
//! resolved settings, call into the library, and emit one table each.

use std::path::Path;

use mac_broadcast::channel::{ChannelModel, PowerAllocation, PowerMap, RateVector};
use mac_broadcast::multi_state::{self, CrossSetMode};
use mac_broadcast::opt::{
    maximize_average_rate, trace_frontier_baseline, trace_frontier_outer, trace_frontier_proposed,
    FrontierPoint, SearchOptions,
};
use mac_broadcast::sim::{run_sim, unit_sample, SimConfig};
use mac_broadcast::two_state;

use crate::emit::{print_resolved, Cell, Table};
use crate::settings::{Settings, SweepVar};
use crate::CliError;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailed,
}

fn model(s: &Settings) -> Result<ChannelModel, CliError> {
    ChannelModel::new(s.alphas.clone(), s.power, s.probs.clone()).map_err(CliError::from)
}

fn allocation(s: &Settings, ell: usize) -> Result<PowerAllocation, CliError> {
    let first = s
        .allocation
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs --allocation".to_string()))?;
    let user1 = PowerMap::new(ell, first.clone())?;
    match &s.allocation2 {
        Some(second) => Ok(PowerAllocation::Asymmetric(
            user1,
            PowerMap::new(ell, second.clone())?,
        )),
        None => Ok(PowerAllocation::Symmetric(user1)),
    }
}

fn rates(s: &Settings, ell: usize) -> Result<RateVector, CliError> {
    if let Some(list) = &s.rates {
        return RateVector::new(ell, list.clone()).map_err(CliError::from);
    }
    if let Some(path) = &s.rates_file {
        let rv = parse_rates_file(path)?;
        if rv.ell() != ell {
            return Err(CliError::Config(format!(
                "rates file has {} states, model has {ell}",
                rv.ell()
            )));
        }
        return Ok(rv);
    }
    Err(CliError::Config(
        "this command needs --rates or --rates-file".to_string(),
    ))
}

/// Parse a square whitespace-separated grid of stream rates. Errors
/// carry the 1-based line and column (token position) of the offender.
pub fn parse_rates_file(path: &Path) -> Result<RateVector, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read rates {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col, token) in line.split_whitespace().enumerate() {
            let value: f64 = token.parse().map_err(|_| {
                CliError::Config(format!(
                    "{}: line {}, column {}: invalid number '{token}'",
                    path.display(),
                    lineno + 1,
                    col + 1
                ))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    let ell = rows.len();
    if ell == 0 || rows.iter().any(|r| r.len() != ell) {
        return Err(CliError::Config(format!(
            "{}: expected a square grid of rates, got {} row(s) of widths {:?}",
            path.display(),
            ell,
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        )));
    }
    RateVector::new(ell, rows.concat()).map_err(CliError::from)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Two-state achievable region at one allocation.
pub fn region(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("region", s);
    let m = model(s)?;
    let pa = allocation(s, m.ell())?;
    let region = two_state::rate_region(&m, &pa)?;
    let mut table = Table::new(vec!["constraint", "bound", "tag"]);
    for c in region.constraints() {
        table.push(vec![
            Cell::Text(c.label(2)),
            Cell::Real(c.bound),
            Cell::Text(c.tag.clone()),
        ]);
    }
    table.emit("region", s)?;
    Ok(Outcome::Pass)
}

/// General region at one allocation, any number of states.
pub fn multistate(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("multistate", s);
    let m = model(s)?;
    let pa = allocation(s, m.ell())?;
    let region = multi_state::rate_region(&m, &pa)?;
    let mut table = Table::new(vec!["constraint", "bound", "tag"]);
    for c in region.constraints() {
        table.push(vec![
            Cell::Text(c.label(m.ell())),
            Cell::Real(c.bound),
            Cell::Text(c.tag.clone()),
        ]);
    }
    table.emit("multistate", s)?;
    Ok(Outcome::Pass)
}

/// Grouped two-layer baseline caps at one allocation.
pub fn baseline(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("baseline", s);
    let m = model(s)?;
    let pa = allocation(s, m.ell())?;
    let bb = two_state::baseline_region(&m, &pa)?;
    let mut table = Table::new(vec!["weak_sum", "strong_sum"]);
    table.push(vec![Cell::Real(bb.weak), Cell::Real(bb.strong)]);
    table.emit("baseline", s)?;
    Ok(Outcome::Pass)
}

/// Componentwise outer bound at one allocation.
pub fn outer(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("outer", s);
    let m = model(s)?;
    let pa = allocation(s, m.ell())?;
    let ob = two_state::outer_bound(&m, &pa)?;
    let mut table = Table::new(vec!["cap_r11", "cap_r12", "cap_r21", "cap_r22"]);
    table.push(vec![
        Cell::Real(ob.r11),
        Cell::Real(ob.r12),
        Cell::Real(ob.r21),
        Cell::Real(ob.r22),
    ]);
    table.emit("outer", s)?;
    Ok(Outcome::Pass)
}

fn push_front(table: &mut Table, scheme: &str, points: &[FrontierPoint]) {
    for pt in points {
        let b = pt.allocation.user(1);
        table.push(vec![
            Cell::Text(scheme.to_string()),
            Cell::Real(pt.x),
            Cell::Real(pt.y),
            Cell::Real(b.get(1, 1)),
            Cell::Real(b.get(1, 2)),
            Cell::Real(b.get(2, 1)),
            Cell::Real(b.get(2, 2)),
        ]);
    }
}

/// Frontier envelopes of the proposed and baseline schemes (and the
/// outer bound on request) over the allocation grid.
pub fn frontier(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("frontier", s);
    let m = model(s)?;
    let proposed = trace_frontier_proposed(&m, s.grid, s.samples)?;
    let base = trace_frontier_baseline(&m, s.grid, s.samples)?;
    let mut table = Table::new(vec!["scheme", "x", "y", "b11", "b12", "b21", "b22"]);
    push_front(&mut table, "proposed", &proposed);
    push_front(&mut table, "baseline", &base);
    if s.include_outer {
        let outer = trace_frontier_outer(&m, s.grid, s.samples)?;
        push_front(&mut table, "outer", &outer);
    }
    table.emit("frontier", s)?;
    Ok(Outcome::Pass)
}

/// Maximum average rate, proposed vs baseline, swept over alpha1 or p.
pub fn avgrate(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("avgrate", s);
    if s.alphas.len() != 2 {
        return Err(CliError::Config(
            "avgrate needs a two-state model".to_string(),
        ));
    }
    if !(s.sweep_step > 0.0 && s.sweep_stop >= s.sweep_start) {
        return Err(CliError::Config(format!(
            "sweep bounds must be ordered with positive step, got {}..{} step {}",
            s.sweep_start, s.sweep_stop, s.sweep_step
        )));
    }
    let opts = SearchOptions {
        resolution: s.grid,
        refine: s.refine,
        min_step: 1e-4,
    };
    let alpha2 = s.alphas[1];
    let mut table = Table::new(vec![
        "sweep",
        "value",
        "proposed_max",
        "baseline_max",
        "gain",
    ]);
    let steps = ((s.sweep_stop - s.sweep_start) / s.sweep_step).round() as usize;
    for i in 0..=steps {
        let value = (s.sweep_start + i as f64 * s.sweep_step).min(s.sweep_stop);
        let (mut alpha1, p) = match s.sweep {
            SweepVar::Alpha1 => (value, s.p),
            SweepVar::WeakProb => (s.alphas[0], value),
        };
        if alpha1 >= alpha2 {
            // gains are strictly ordered; evaluate just below the tie
            alpha1 = alpha2 * (1.0 - 1e-9);
        }
        let m = ChannelModel::two_state(alpha1, alpha2, s.power, p)?;
        let proposed = maximize_average_rate(&m, &opts, false)?;
        let base = maximize_average_rate(&m, &opts, true)?;
        table.push(vec![
            Cell::Text(s.sweep.name().to_string()),
            Cell::Real(value),
            Cell::Real(proposed.value),
            Cell::Real(base.value),
            Cell::Real(proposed.value - base.value),
        ]);
    }
    table.emit("avgrate", s)?;
    Ok(Outcome::Pass)
}

/// Monte Carlo run; report plus per-state counts.
pub fn simulate(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("simulate", s);
    let m = model(s)?;
    let ell = m.ell();
    let cfg = SimConfig {
        trials: s.trials,
        seed: s.seed,
        model: m,
        rates: rates(s, ell)?,
        allocation: allocation(s, ell)?,
    };
    let rep = run_sim(&cfg)?;
    let mut table = Table::new(vec![
        "empirical_mean",
        "std_error",
        "formula_value",
        "z_score",
        "trials",
        "seed",
        "generator",
        "state_p",
        "state_q",
        "count",
    ]);
    for (&(p, q), &count) in &rep.per_state_counts {
        table.push(vec![
            Cell::Real(rep.empirical_mean),
            Cell::Real(rep.std_error),
            Cell::Real(rep.formula_value),
            Cell::Real(rep.z_score),
            Cell::Count(rep.trials),
            Cell::Count(rep.seed),
            Cell::Text(rep.generator.clone()),
            Cell::Count(p as u64),
            Cell::Count(q as u64),
            Cell::Count(count),
        ]);
    }
    table.emit("simulate", s)?;
    Ok(Outcome::Pass)
}

/// Feasibility check of a rates file against the region and the
/// stage-wise decoding constraints. Exit 0 iff feasible.
pub fn check(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("check", s);
    let m = model(s)?;
    let pa = allocation(s, m.ell())?;
    let path = s
        .rates_file
        .as_ref()
        .ok_or_else(|| CliError::Config("check needs --rates-file".to_string()))?;
    let rv = parse_rates_file(path)?;
    if rv.ell() != m.ell() {
        return Err(CliError::Config(format!(
            "rates file has {} states, model has {}",
            rv.ell(),
            m.ell()
        )));
    }

    let region = two_state::rate_region(&m, &pa)?;
    let region_violations = region.violations(&rv, 1e-12)?;
    let stage = two_state::stage_feasibility(&m, &pa, &rv)?;

    let mut table = Table::new(vec![
        "kind",
        "h1_level",
        "h2_level",
        "stage",
        "constraint",
        "value",
        "bound",
    ]);
    for c in &region_violations {
        println!("violated [{}]: {} > {:.9e}", c.tag, c.label(2), c.bound);
        table.push(vec![
            Cell::Text("region".to_string()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(format!("{} [{}]", c.label(2), c.tag)),
            Cell::Real(c.evaluate(&rv)),
            Cell::Real(c.bound),
        ]);
    }
    for st in &stage.states {
        for v in &st.violations {
            println!(
                "violated [stage {} at state ({},{})]: {} = {:.9e} > {:.9e}",
                v.stage, st.h1_level, st.h2_level, v.label, v.value, v.bound
            );
            table.push(vec![
                Cell::Text("stage".to_string()),
                Cell::Count(st.h1_level as u64),
                Cell::Count(st.h2_level as u64),
                Cell::Count(v.stage as u64),
                Cell::Text(v.label.clone()),
                Cell::Real(v.value),
                Cell::Real(v.bound),
            ]);
        }
    }

    if s.output.is_some() {
        table.emit("check", s)?;
    }
    if region_violations.is_empty() && stage.passed() {
        println!("feasible: rates lie in the region and pass every decoding stage");
        Ok(Outcome::Pass)
    } else {
        println!(
            "infeasible: {} region and {} stage violations",
            region_violations.len(),
            stage
                .states
                .iter()
                .map(|st| st.violations.len())
                .sum::<usize>()
        );
        Ok(Outcome::CheckFailed)
    }
}

/// Reduction check over seeded allocations. Exit 0 iff every deviation
/// is within 1e-12; the literal cross-set mode documents its failure.
pub fn reduce_check(s: &Settings) -> Result<Outcome, CliError> {
    print_resolved("reduce-check", s);
    let m = model(s)?;
    let mode = if s.strict_j2 {
        CrossSetMode::Printed
    } else {
        CrossSetMode::Amended
    };
    let mut table = Table::new(vec!["draw", "max_deviation", "worst_term"]);
    let mut global: f64 = 0.0;
    for draw in 0..s.count as u64 {
        let mut weights: Vec<f64> = (0..4)
            .map(|i| {
                let u = unit_sample(s.seed, draw * 4 + i);
                (-(1.0 - u).ln()).max(1e-300)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let pa = PowerAllocation::Symmetric(PowerMap::new(2, weights)?);
        let rep = multi_state::reduction_check_with(&m, &pa, mode)?;
        let worst = rep
            .deviations
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .map(|(name, _)| name.clone())
            .unwrap_or_default();
        table.push(vec![
            Cell::Count(draw),
            Cell::Real(rep.max_deviation),
            Cell::Text(worst),
        ]);
        global = global.max(rep.max_deviation);
    }
    if s.output.is_some() {
        table.emit("reduce-check", s)?;
    }
    if global <= 1e-12 {
        println!(
            "reduction holds on {} seeded allocations (max deviation {global:.3e})",
            s.count
        );
        Ok(Outcome::Pass)
    } else {
        println!(
            "reduction FAILED: max deviation {global:.3e} over {} seeded allocations",
            s.count
        );
        Ok(Outcome::CheckFailed)
    }
}
