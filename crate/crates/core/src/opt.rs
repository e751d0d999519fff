//! Optimization over rate-region polyhedra: exact linear maximization by
//! vertex enumeration, frontier envelopes in the grouped rate planes,
//! and average-rate maximization over the power-allocation simplex.

use crate::channel::{simplex_grid, ChannelModel, PowerAllocation, PowerMap, RateVector};
use crate::error::{Error, Result};
use crate::multi_state::{self, DecodeTable};
use crate::region::{Constraint, RateRegion};
use crate::two_state;

/// Feasibility slack used when classifying enumerated vertices.
const FEAS_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Linear maximization
// ---------------------------------------------------------------------------

/// Maximize a linear objective with nonnegative coefficients over a rate
/// region.
///
/// The region decomposes into independent coordinate groups (coordinates
/// linked by a shared constraint); each group spans at most a few
/// dimensions, so the optimum is found exactly by intersecting every
/// choice of `d` hyperplanes (constraints and coordinate planes),
/// keeping the feasible points, and taking the best. Ties are broken by
/// the lexicographically smallest argument vector.
pub fn maximize_linear(region: &RateRegion, objective: &[f64]) -> Result<(f64, RateVector)> {
    let ell = region.ell();
    let n = ell * ell;
    if objective.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "objective has {} coefficients, region needs {}",
            objective.len(),
            n
        )));
    }
    if objective.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::Domain(
            "objective coefficients must be finite and >= 0".to_string(),
        ));
    }

    let groups = coordinate_groups(region);
    let mut coords = vec![0.0; n];
    let mut total = 0.0;
    for group in &groups {
        let cons: Vec<&Constraint> = region
            .constraints()
            .iter()
            .filter(|c| group.iter().any(|&i| c.coeffs[i] > 0))
            .collect();
        if cons.is_empty() {
            if group.iter().any(|&i| objective[i] > 0.0) {
                return Err(Error::Unbounded(format!(
                    "coordinate {} has positive weight and no constraint",
                    group[0]
                )));
            }
            continue;
        }
        let verts = group_vertices(group, &cons);
        let obj: Vec<f64> = group.iter().map(|&i| objective[i]).collect();
        let mut best: Option<(f64, &Vec<f64>)> = None;
        for v in &verts {
            let val: f64 = v.iter().zip(&obj).map(|(x, c)| x * c).sum();
            best = Some(match best {
                None => (val, v),
                Some((bv, bx)) => {
                    let tie = (val - bv).abs() <= 1e-12 * (1.0 + val.abs().max(bv.abs()));
                    if (tie && lex_less(v, bx)) || (!tie && val > bv) {
                        (val, v)
                    } else {
                        (bv, bx)
                    }
                }
            });
        }
        let (val, arg) = best.expect("origin vertex always present");
        total += val;
        for (&i, &x) in group.iter().zip(arg) {
            coords[i] = x;
        }
    }
    Ok((total, RateVector::new(ell, coords)?))
}

/// All feasible vertices of the region polytope (cartesian product of
/// the per-group vertex sets). Coordinates not covered by any
/// constraint are held at zero.
pub fn region_vertices(region: &RateRegion) -> Result<Vec<RateVector>> {
    let ell = region.ell();
    let n = ell * ell;
    let groups = coordinate_groups(region);
    let mut per_group: Vec<(Vec<usize>, Vec<Vec<f64>>)> = Vec::new();
    for group in groups {
        let cons: Vec<&Constraint> = region
            .constraints()
            .iter()
            .filter(|c| group.iter().any(|&i| c.coeffs[i] > 0))
            .collect();
        let verts = if cons.is_empty() {
            vec![vec![0.0; group.len()]]
        } else {
            let mut v = group_vertices(&group, &cons);
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v.dedup_by(|a, b| a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= 1e-12));
            v
        };
        per_group.push((group, verts));
    }

    let mut out = vec![vec![0.0; n]];
    for (group, verts) in &per_group {
        let mut next = Vec::with_capacity(out.len() * verts.len());
        for base in &out {
            for v in verts {
                let mut coords = base.clone();
                for (&i, &x) in group.iter().zip(v) {
                    coords[i] = x;
                }
                next.push(coords);
            }
        }
        out = next;
    }
    out.into_iter().map(|c| RateVector::new(ell, c)).collect()
}

/// Connected components of coordinates under "appear in one constraint",
/// each sorted ascending, components ordered by smallest member.
fn coordinate_groups(region: &RateRegion) -> Vec<Vec<usize>> {
    let n = region.ell() * region.ell();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in region.constraints() {
        let support: Vec<usize> = (0..n).filter(|&i| c.coeffs[i] > 0).collect();
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Enumerate the feasible basic points of one group: every intersection
/// of `d` hyperplanes drawn from the coordinate planes and the group's
/// constraints that satisfies all constraints and nonnegativity.
fn group_vertices(group: &[usize], cons: &[&Constraint]) -> Vec<Vec<f64>> {
    let d = group.len();
    // rows: coordinate planes first, then constraints restricted to the group
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + cons.len());
    for k in 0..d {
        let mut r = vec![0.0; d];
        r[k] = 1.0;
        rows.push((r, 0.0));
    }
    for c in cons {
        let r: Vec<f64> = group.iter().map(|&i| c.coeffs[i] as f64).collect();
        rows.push((r, c.bound));
    }

    let mut verts = Vec::new();
    let mut combo: Vec<usize> = (0..d).collect();
    loop {
        if let Some(mut x) = solve_square(&combo, &rows, d) {
            let feasible = x.iter().all(|&v| v >= -FEAS_TOL)
                && cons.iter().all(|c| {
                    let lhs: f64 = group
                        .iter()
                        .zip(&x)
                        .map(|(&i, &v)| c.coeffs[i] as f64 * v)
                        .sum();
                    lhs <= c.bound + FEAS_TOL * (1.0 + c.bound.abs())
                });
            if feasible {
                for v in &mut x {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                verts.push(x);
            }
        }
        if !next_combination(&mut combo, rows.len()) {
            break;
        }
    }
    verts
}

/// Solve the square system picked out by `combo`; `None` if singular.
fn solve_square(combo: &[usize], rows: &[(Vec<f64>, f64)], d: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = combo.iter().map(|&r| rows[r].0.clone()).collect();
    let mut b: Vec<f64> = combo.iter().map(|&r| rows[r].1).collect();
    for col in 0..d {
        let (pivot, mag) = (col..d)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if mag < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..d {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (x, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; d];
    for col in (0..d).rev() {
        let mut acc = b[col];
        for k in col + 1..d {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let d = combo.len();
    let mut i = d;
    while i > 0 {
        i -= 1;
        if combo[i] < n - (d - i) {
            combo[i] += 1;
            for k in i + 1..d {
                combo[k] = combo[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Frontier tracing
// ---------------------------------------------------------------------------

/// One achievable corner or envelope sample in a grouped rate plane:
/// `x` is the weak-group sum rate, `y` the strong-group sum rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub x: f64,
    pub y: f64,
    pub allocation: PowerAllocation,
}

/// Per-allocation corners of the proposed scheme in the
/// `(2*(R11 + R12 + R21), 2*R22)` plane, over the symmetric grid.
pub fn proposed_corners(m: &ChannelModel, resolution: f64) -> Result<Vec<FrontierPoint>> {
    m.require_two_state()?;
    let objective = [0.0, 1.0, 1.0, 0.0];
    let mut corners = Vec::new();
    for pa in simplex_grid(2, resolution)? {
        let lb = two_state::layer_bounds(m, &pa)?;
        let region = two_state::rate_region(m, &pa)?;
        let (mix, _) = maximize_linear(&region, &objective)?;
        corners.push(FrontierPoint {
            x: 2.0 * (lb.r11 + mix),
            y: 2.0 * lb.r22,
            allocation: pa,
        });
    }
    Ok(corners)
}

/// Per-split corners of the two-layer baseline grouping in the
/// `(R_w, R_s)` plane.
pub fn baseline_corners(m: &ChannelModel, resolution: f64) -> Result<Vec<FrontierPoint>> {
    m.require_two_state()?;
    let steps = (1.0 / resolution).round() as u64;
    if !(resolution > 0.0 && resolution <= 1.0) || ((1.0 / resolution) - steps as f64).abs() > 1e-9
    {
        return Err(Error::GridResolution(resolution));
    }
    let mut corners = Vec::new();
    for i in 0..=steps {
        let b11 = i as f64 / steps as f64;
        let b12 = (steps - i) as f64 / steps as f64;
        let pa = PowerAllocation::symmetric_two_state(b11, b12, 0.0, 0.0)?;
        let bb = two_state::baseline_region(m, &pa)?;
        corners.push(FrontierPoint {
            x: bb.weak,
            y: bb.strong,
            allocation: pa,
        });
    }
    Ok(corners)
}

/// Per-allocation corners of the outer bound in the grouped plane of the
/// proposed scheme.
pub fn outer_corners(m: &ChannelModel, resolution: f64) -> Result<Vec<FrontierPoint>> {
    m.require_two_state()?;
    let mut corners = Vec::new();
    for pa in simplex_grid(2, resolution)? {
        let ob = two_state::outer_bound(m, &pa)?;
        corners.push(FrontierPoint {
            x: 2.0 * (ob.r11 + ob.r12 + ob.r21),
            y: 2.0 * ob.r22,
            allocation: pa,
        });
    }
    Ok(corners)
}

/// Upper envelope of a corner set, sampled on an even ladder of
/// `samples` strong-group targets from 0 to the best reachable value.
/// The envelope is non-increasing: a larger strong-group target never
/// allows a larger weak-group sum.
pub fn upper_envelope(corners: &[FrontierPoint], samples: usize) -> Vec<FrontierPoint> {
    if corners.is_empty() || samples == 0 {
        return Vec::new();
    }
    let y_max = corners.iter().map(|c| c.y).fold(0.0f64, f64::max);
    let n = samples.max(2);
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        let y = y_max * t as f64 / (n - 1) as f64;
        let mut best: Option<&FrontierPoint> = None;
        for c in corners {
            if c.y + 1e-12 >= y && best.is_none_or(|b| c.x > b.x) {
                best = Some(c);
            }
        }
        if let Some(b) = best {
            out.push(FrontierPoint {
                x: b.x,
                y,
                allocation: b.allocation.clone(),
            });
        }
    }
    out
}

/// Height of the corner staircase at weak-group rate `x`: the best
/// strong-group rate among corners reaching at least `x`. `None` when
/// `x` is beyond every corner.
pub fn envelope_height(corners: &[FrontierPoint], x: f64) -> Option<f64> {
    corners
        .iter()
        .filter(|c| c.x + 1e-12 >= x)
        .map(|c| c.y)
        .fold(None, |acc, y| Some(acc.map_or(y, |a: f64| a.max(y))))
}

/// Proposed-scheme frontier: envelope of [`proposed_corners`].
pub fn trace_frontier_proposed(
    m: &ChannelModel,
    resolution: f64,
    samples: usize,
) -> Result<Vec<FrontierPoint>> {
    Ok(upper_envelope(&proposed_corners(m, resolution)?, samples))
}

/// Baseline frontier: envelope of [`baseline_corners`].
pub fn trace_frontier_baseline(
    m: &ChannelModel,
    resolution: f64,
    samples: usize,
) -> Result<Vec<FrontierPoint>> {
    Ok(upper_envelope(&baseline_corners(m, resolution)?, samples))
}

/// Outer-bound frontier: envelope of [`outer_corners`].
pub fn trace_frontier_outer(
    m: &ChannelModel,
    resolution: f64,
    samples: usize,
) -> Result<Vec<FrontierPoint>> {
    Ok(upper_envelope(&outer_corners(m, resolution)?, samples))
}

// ---------------------------------------------------------------------------
// Average rate
// ---------------------------------------------------------------------------

/// Two-state average decoded rate at weak-state probability `p`:
/// `2 * (R11 + (1-p)*(R12 + R21) + (1-p)^2 * R22)`.
pub fn average_rate(rv: &RateVector, p_weak: f64) -> Result<f64> {
    if rv.ell() != 2 {
        return Err(Error::WrongStateCount {
            expected: 2,
            actual: rv.ell(),
        });
    }
    if !(0.0..=1.0).contains(&p_weak) {
        return Err(Error::Domain(format!("p = {p_weak} must lie in [0, 1]")));
    }
    let q = 1.0 - p_weak;
    Ok(2.0 * (rv.get(1, 1) + q * (rv.get(1, 2) + rv.get(2, 1)) + q * q * rv.get(2, 2)))
}

/// Average decoded rate as the expectation over the decode table: sum
/// over joint states of state probability times the decoded rate there.
/// At `ℓ = 2` this equals [`average_rate`] identically.
pub fn average_rate_general(m: &ChannelModel, rv: &RateVector, table: &DecodeTable) -> Result<f64> {
    m.validate()?;
    let ell = m.ell();
    if rv.ell() != ell || table.ell() != ell {
        return Err(Error::DimensionMismatch(format!(
            "model ell = {}, rates ell = {}, table ell = {}",
            ell,
            rv.ell(),
            table.ell()
        )));
    }
    let mut total = 0.0;
    for p in 1..=ell {
        for q in 1..=ell {
            total += m.prob(p) * m.prob(q) * table.rate_sum(p, q, rv);
        }
    }
    Ok(total)
}

/// Linear coefficients of the average rate in the stream rates: stream
/// `(u, v)` of either user is decoded exactly when the own level is at
/// least `v` and the other level at least `u`, so its weight is
/// `2 * P(level >= u) * P(level >= v)`.
pub fn average_rate_coefficients(m: &ChannelModel) -> Vec<f64> {
    let ell = m.ell();
    let mut tail = vec![0.0; ell + 2];
    for level in (1..=ell).rev() {
        tail[level] = tail[level + 1] + m.prob(level);
    }
    let mut coeffs = vec![0.0; ell * ell];
    for u in 1..=ell {
        for v in 1..=ell {
            coeffs[(u - 1) * ell + (v - 1)] = 2.0 * tail[u] * tail[v];
        }
    }
    coeffs
}

/// Outcome of an average-rate maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct AvgRateResult {
    /// Best average rate found, bits per channel use.
    pub value: f64,
    /// Rates achieving it (feasible in the region at `allocation`).
    pub rates: RateVector,
    /// Allocation achieving it.
    pub allocation: PowerAllocation,
}

/// Controls for the allocation search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Simplex grid resolution for the coarse pass.
    pub resolution: f64,
    /// Run the local pattern-search refinement after the grid pass.
    pub refine: bool,
    /// Smallest refinement step (halving stops below this).
    pub min_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            resolution: 0.02,
            refine: true,
            min_step: 1e-4,
        }
    }
}

/// Maximize the average rate over the allocation grid (and optionally a
/// local refinement around the best grid point).
///
/// With `baseline = true` the search is restricted to the two-layer
/// scheme: splits between the base stream `(1,1)` and the strong-adapted
/// stream `(1,2)`, evaluated against its staged decoding constraints
/// (two-state model only).
pub fn maximize_average_rate(
    m: &ChannelModel,
    opts: &SearchOptions,
    baseline: bool,
) -> Result<AvgRateResult> {
    m.validate()?;
    if baseline {
        m.require_two_state()?;
    }
    let coeffs = average_rate_coefficients(m);
    let evaluate = |pa: &PowerAllocation| -> Result<(f64, RateVector)> {
        let region = if m.ell() == 2 {
            two_state::rate_region(m, pa)?
        } else {
            multi_state::rate_region(m, pa)?
        };
        maximize_linear(&region, &coeffs)
    };

    let mut best: Option<AvgRateResult> = None;
    let candidates: Vec<PowerAllocation> = if baseline {
        baseline_corners(m, opts.resolution)?
            .into_iter()
            .map(|c| c.allocation)
            .collect()
    } else {
        simplex_grid(m.ell(), opts.resolution)?.collect()
    };
    for pa in candidates {
        let (value, rates) = evaluate(&pa)?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(AvgRateResult {
                value,
                rates,
                allocation: pa,
            });
        }
    }
    let mut best = best.expect("grid is never empty");

    if opts.refine {
        let moves: Vec<(usize, usize)> = if baseline {
            vec![(0, 1), (1, 0)]
        } else {
            let n = m.ell() * m.ell();
            (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .collect()
        };
        let mut step = opts.resolution;
        let mut guard = 0usize;
        while step >= opts.min_step && guard < 100_000 {
            let mut improved = false;
            let frac = best.allocation.user(1).fractions().to_vec();
            let mut round_best: Option<AvgRateResult> = None;
            for &(to, from) in &moves {
                guard += 1;
                if frac[from] < step - 1e-15 || frac[to] + step > 1.0 + 1e-15 {
                    continue;
                }
                let mut next = frac.clone();
                next[from] = (next[from] - step).max(0.0);
                next[to] = (next[to] + step).min(1.0);
                let pa = PowerAllocation::Symmetric(PowerMap::new(m.ell(), next)?);
                let (value, rates) = evaluate(&pa)?;
                if value > best.value + 1e-15 && round_best.as_ref().is_none_or(|b| value > b.value)
                {
                    round_best = Some(AvgRateResult {
                        value,
                        rates,
                        allocation: pa,
                    });
                }
            }
            if let Some(b) = round_best {
                best = b;
                improved = true;
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    Ok(best)
}
