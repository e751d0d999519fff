//! General `ℓ`-state machinery: cross-state index sets, residual-power
//! interference terms, the per-pair and per-layer bound terms, the
//! `ℓ`-state achievable region, the successive-decoding table, and the
//! reduction check against the two-state closed forms.
//!
//! Decode-table orientation: the joint state key is `(p, q)` where `p`
//! is the gain level of **user 2** (`h2²`) and `q` the gain level of
//! **user 1** (`h1²`). All interfaces in this module follow that one
//! convention; the two orientations are easy to transpose by accident,
//! so it is stated here once and nowhere re-defined.

use std::collections::BTreeSet;

use crate::channel::{ChannelModel, PowerAllocation, PowerMap, RateVector};
use crate::error::{Error, Result};
use crate::region::{Constraint, RateRegion};
use crate::two_state;

/// Which definition of the cross-state pair set `J2(u, v)` to use.
///
/// `Amended` takes `j` from `{u, …, v-1}` and `k` from `{v, …, ℓ}`,
/// which reproduces the two-state closed forms exactly. `Printed`
/// keeps the literal source form (`k` from `{u, …, v-1}`, `j` from
/// `{v+1, …, ℓ}`), which is empty whenever `v = ℓ` and is retained only
/// so the discrepancy can be demonstrated; see
/// [`reduction_check_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossSetMode {
    Amended,
    Printed,
}

/// Index sets steering the minimizations in the pair bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    /// States between the pair's levels: `{u, …, v-1}`.
    pub j1: Vec<usize>,
    /// Cross-state pairs `(j, k)`; see [`CrossSetMode`].
    pub j2: Vec<(usize, usize)>,
    /// Pairs `(j, k)` with `v <= j <= k <= ℓ`.
    pub j3: Vec<(usize, usize)>,
}

fn check_pair(u: usize, v: usize, ell: usize) -> Result<()> {
    if u == 0 || v == 0 || u >= v || v > ell {
        return Err(Error::IndexRange(format!(
            "pair (u, v) = ({u}, {v}) must satisfy 1 <= u < v <= {ell}"
        )));
    }
    Ok(())
}

/// Index sets for the pair `(u, v)` under the amended cross set.
pub fn index_sets(u: usize, v: usize, ell: usize) -> Result<IndexSets> {
    index_sets_with(u, v, ell, CrossSetMode::Amended)
}

/// Index sets for the pair `(u, v)` under an explicit cross-set mode.
pub fn index_sets_with(u: usize, v: usize, ell: usize, mode: CrossSetMode) -> Result<IndexSets> {
    check_pair(u, v, ell)?;
    let j1: Vec<usize> = (u..v).collect();
    let j2: Vec<(usize, usize)> = match mode {
        CrossSetMode::Amended => (u..v)
            .flat_map(|j| (v..=ell).map(move |k| (j, k)))
            .collect(),
        CrossSetMode::Printed => (v + 1..=ell)
            .flat_map(|j| (u..v).map(move |k| (j, k)))
            .collect(),
    };
    let j3: Vec<(usize, usize)> = (v..=ell)
        .flat_map(|j| (j..=ell).map(move |k| (j, k)))
        .collect();
    Ok(IndexSets { j1, j2, j3 })
}

// ---------------------------------------------------------------------------
// Residual power fractions
// ---------------------------------------------------------------------------

/// Residual power fraction `B_kind` left as interference at one decoding
/// stage: 1 minus a partial sum of disjoint allocation entries, so the
/// value always lies in `[0, 1]`.
///
/// Kinds 1, 2, 6, and 7 depend on an auxiliary state level `j`; kinds
/// 3, 4, 5, and 8 must be called with `j = None`. `B8(ℓ, ℓ)` is exactly
/// zero by simplex normalization.
pub fn power_residual(
    pa: &PowerMap,
    kind: usize,
    j: Option<usize>,
    u: usize,
    v: usize,
) -> Result<f64> {
    let ell = pa.ell();
    let in_range = |i: usize| i >= 1 && i <= ell;
    if !in_range(u) || !in_range(v) {
        return Err(Error::IndexRange(format!(
            "(u, v) = ({u}, {v}) outside 1..={ell}"
        )));
    }
    let needs_j = matches!(kind, 1 | 2 | 6 | 7);
    let j = match (needs_j, j) {
        (true, Some(j)) if in_range(j) => j,
        (true, Some(j)) => return Err(Error::IndexRange(format!("j = {j} outside 1..={ell}"))),
        (true, None) => {
            return Err(Error::IndexRange(format!(
                "residual kind {kind} requires a state level j"
            )))
        }
        (false, None) => 0,
        (false, Some(_)) => {
            return Err(Error::IndexRange(format!(
                "residual kind {kind} takes no state level j"
            )))
        }
    };
    let value = match kind {
        1 | 6 => 1.0 - pa.block_sum((1, v - 1), (1, j)) - pa.block_sum((v, v), (1, u)),
        2 => 1.0 - pa.block_sum((1, j), (1, v - 1)) - pa.block_sum((1, u), (v, v)),
        3 => {
            1.0 - pa.block_sum((1, v - 1), (1, v - 1))
                - pa.block_sum((v, v), (1, u))
                - pa.block_sum((1, u), (v, v))
        }
        4 => 1.0 - pa.block_sum((1, u), (1, v - 1)) - pa.block_sum((1, u), (v, v)),
        5 => 1.0 - pa.block_sum((1, v - 1), (1, u)) - pa.block_sum((v, v), (1, u)),
        7 => 1.0 - pa.block_sum((1, j), (1, v - 1)) - pa.block_sum((1, u), (v, v)),
        8 => 1.0 - pa.block_sum((1, v), (1, u)),
        _ => {
            return Err(Error::IndexRange(format!(
                "residual kind {kind} outside 1..=8"
            )))
        }
    };
    Ok(value)
}

// ---------------------------------------------------------------------------
// Bound terms
// ---------------------------------------------------------------------------

/// The ten bound terms for an off-diagonal pair `(u, v)`, `u < v`.
///
/// `b6` is `None` when the cross-state set is empty (printed mode at
/// `v = ℓ`); the sum constraint then minimizes over the remaining terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBounds {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
    pub b6: Option<f64>,
    pub b7: f64,
    pub b8: f64,
    pub b9: f64,
    pub b10: f64,
}

impl PairBounds {
    /// Cap on the higher-adapted stream rate `R_uv`.
    pub fn cap_uv(&self) -> f64 {
        self.b1.min(self.b2).min(0.5 * self.b3)
    }

    /// Cap on the lower-adapted stream rate `R_vu`.
    pub fn cap_vu(&self) -> f64 {
        self.b4.min(0.5 * self.b5)
    }

    /// Cap on the sum `R_uv + R_vu`.
    pub fn cap_sum(&self) -> f64 {
        let base = self.b7.min(0.5 * self.b8);
        match self.b6 {
            Some(b6) => b6.min(base),
            None => base,
        }
    }
}

/// The two bound terms for a diagonal layer `(u, u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalBounds {
    pub b11: f64,
    pub b12: f64,
}

impl DiagonalBounds {
    /// Cap on the layer rate `R_uu`.
    pub fn cap(&self) -> f64 {
        self.b11.min(0.5 * self.b12)
    }
}

/// Bound terms for the pair `(u, v)` at a symmetric allocation.
pub fn pair_bounds(
    m: &ChannelModel,
    pa: &PowerAllocation,
    u: usize,
    v: usize,
) -> Result<PairBounds> {
    pair_bounds_with(m, pa, u, v, CrossSetMode::Amended)
}

/// Bound terms for the pair `(u, v)` under an explicit cross-set mode.
pub fn pair_bounds_with(
    m: &ChannelModel,
    pa: &PowerAllocation,
    u: usize,
    v: usize,
    mode: CrossSetMode,
) -> Result<PairBounds> {
    m.validate()?;
    pa.validate()?;
    let b = pa.require_symmetric()?;
    let ell = m.ell();
    if b.ell() != ell {
        return Err(Error::DimensionMismatch(format!(
            "allocation has ell = {}, model has ell = {}",
            b.ell(),
            ell
        )));
    }
    check_pair(u, v, ell)?;
    let sets = index_sets_with(u, v, ell, mode)?;
    let g = |i: usize| m.alpha(i);
    let (g_u, g_v, g_ell) = (g(u), g(v), g(ell));
    let (f_uv, f_vu) = (b.get(u, v), b.get(v, u));

    let r3 = power_residual(b, 3, None, u, v)?;
    let r4 = power_residual(b, 4, None, u, v)?;
    let r5 = power_residual(b, 5, None, u, v)?;

    // per-stream cap at in-between states: the own-gain signal against
    // the layers still undecoded there
    let b1 = sets
        .j1
        .iter()
        .map(|&j| {
            let r1 = power_residual(b, 1, Some(j), u, v).unwrap();
            let r2 = power_residual(b, 2, Some(j), u, v).unwrap();
            m.cap(g_v * f_uv, g(j) * r1 + g_v * r2)
        })
        .fold(f64::INFINITY, f64::min);
    let b2 = m.cap(g_v * f_uv, (g_v + g_ell) * r3);
    let b3 = m.cap(2.0 * g_v * f_uv, 2.0 * g_v * r3);
    let b4 = m.cap(g_u * f_vu, g_ell * r4 + g_u * r5);
    let b5 = m.cap(2.0 * g_v * f_vu, 2.0 * g_v * r3);

    // joint cap at cross states; the residuals follow the in-between
    // level j of each (j, k) pair
    let b6 = if sets.j2.is_empty() {
        None
    } else {
        Some(
            sets.j2
                .iter()
                .map(|&(j, k)| {
                    // residuals follow the pair component lying between u
                    // and v; the amended orientation lists it first, the
                    // printed one second
                    let mid = match mode {
                        CrossSetMode::Amended => j,
                        CrossSetMode::Printed => k,
                    };
                    let r6 = power_residual(b, 6, Some(mid), u, v).unwrap();
                    let r7 = power_residual(b, 7, Some(mid), u, v).unwrap();
                    m.cap(g(j) * f_vu + g(k) * f_uv, g(j) * r6 + g(k) * r7)
                })
                .fold(f64::INFINITY, f64::min),
        )
    };
    let b7 = m.cap(g_v * (f_uv + f_vu), (g_v + g_ell) * r3);
    let b8 = m.cap(2.0 * g_v * (f_uv + f_vu), 2.0 * g_v * r3);
    let b9 = sets
        .j3
        .iter()
        .map(|&(j, k)| m.cap(g(j) * (f_uv + f_vu) + g(k) * f_uv, (g(j) + g(k)) * r3))
        .fold(f64::INFINITY, f64::min);
    let b10 = sets
        .j3
        .iter()
        .map(|&(j, k)| m.cap(g(j) * (f_uv + f_vu) + g(k) * f_vu, (g(j) + g(k)) * r3))
        .fold(f64::INFINITY, f64::min);

    Ok(PairBounds {
        b1,
        b2,
        b3,
        b4,
        b5,
        b6,
        b7,
        b8,
        b9,
        b10,
    })
}

/// Bound terms for the diagonal layer `(u, u)` at a symmetric allocation.
pub fn diagonal_bounds(m: &ChannelModel, pa: &PowerAllocation, u: usize) -> Result<DiagonalBounds> {
    m.validate()?;
    pa.validate()?;
    let b = pa.require_symmetric()?;
    let ell = m.ell();
    if b.ell() != ell {
        return Err(Error::DimensionMismatch(format!(
            "allocation has ell = {}, model has ell = {}",
            b.ell(),
            ell
        )));
    }
    if u == 0 || u > ell {
        return Err(Error::IndexRange(format!("u = {u} outside 1..={ell}")));
    }
    let r8 = power_residual(b, 8, None, u, u)?;
    let (g_u, g_ell) = (m.alpha(u), m.alpha(ell));
    let f_uu = b.get(u, u);
    Ok(DiagonalBounds {
        b11: m.cap(g_u * f_uu, (g_u + g_ell) * r8),
        b12: m.cap(2.0 * g_u * f_uu, 2.0 * g_u * r8),
    })
}

// ---------------------------------------------------------------------------
// Achievable region
// ---------------------------------------------------------------------------

/// The `ℓ`-state achievable region at a symmetric allocation: for every
/// pair `u < v` the five pair constraints, and for every `u` the
/// diagonal layer constraint. At `ℓ = 2` the bounds coincide with
/// [`two_state::rate_region`] (see [`reduction_check`]).
pub fn rate_region(m: &ChannelModel, pa: &PowerAllocation) -> Result<RateRegion> {
    rate_region_with(m, pa, CrossSetMode::Amended)
}

/// The `ℓ`-state region under an explicit cross-set mode.
pub fn rate_region_with(
    m: &ChannelModel,
    pa: &PowerAllocation,
    mode: CrossSetMode,
) -> Result<RateRegion> {
    let ell = m.ell();
    let idx = |u: usize, v: usize| (u - 1) * ell + (v - 1);
    let mut constraints = Vec::new();
    let mk = |pattern: Vec<(usize, usize, u8)>, bound: f64, tag: String| {
        let mut coeffs = vec![0u8; ell * ell];
        for (u, v, c) in pattern {
            coeffs[idx(u, v)] = c;
        }
        Constraint { coeffs, bound, tag }
    };
    for u in 1..=ell {
        let d = diagonal_bounds(m, pa, u)?;
        constraints.push(mk(
            vec![(u, u, 1)],
            d.cap(),
            format!("multi-state layer ({u},{u})"),
        ));
        for v in u + 1..=ell {
            let pb = pair_bounds_with(m, pa, u, v, mode)?;
            let tag = format!("multi-state pair ({u},{v})");
            constraints.push(mk(vec![(u, v, 1)], pb.cap_uv(), tag.clone()));
            constraints.push(mk(vec![(v, u, 1)], pb.cap_vu(), tag.clone()));
            constraints.push(mk(vec![(u, v, 1), (v, u, 1)], pb.cap_sum(), tag.clone()));
            constraints.push(mk(vec![(u, v, 2), (v, u, 1)], pb.b9, tag.clone()));
            constraints.push(mk(vec![(u, v, 1), (v, u, 2)], pb.b10, tag));
        }
    }
    RateRegion::new(ell, constraints)
}

// ---------------------------------------------------------------------------
// Decode table
// ---------------------------------------------------------------------------

/// Identifier of codebook `W^user_{u,v}`: `user` is 1 or 2, `v` the own
/// gain level the stream is adapted to, `u` the other user's level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StreamId {
    pub user: u8,
    pub u: usize,
    pub v: usize,
}

impl StreamId {
    pub fn new(user: u8, u: usize, v: usize) -> Self {
        StreamId { user, u, v }
    }
}

/// Map from joint state `(p, q)` to the set of streams decoded there;
/// `p` is user 2's level and `q` user 1's.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeTable {
    ell: usize,
    sets: Vec<BTreeSet<StreamId>>,
}

/// Build the successive-decoding table for `ell` states.
///
/// The set at `(p, q)` is the union of the sets at `(p-1, q-1)`,
/// `(p, q-1)`, and `(p-1, q)` (out-of-range parents empty) plus the two
/// newly adapted streams `W¹_{p,q}` and `W²_{q,p}`.
pub fn decode_table(ell: usize) -> Result<DecodeTable> {
    if ell < 1 {
        return Err(Error::Domain("decode table requires ell >= 1".to_string()));
    }
    let mut sets: Vec<BTreeSet<StreamId>> = vec![BTreeSet::new(); ell * ell];
    let at = |p: usize, q: usize| (p - 1) * ell + (q - 1);
    for p in 1..=ell {
        for q in 1..=ell {
            let mut set = BTreeSet::new();
            if p > 1 && q > 1 {
                set.extend(sets[at(p - 1, q - 1)].iter().copied());
            }
            if q > 1 {
                set.extend(sets[at(p, q - 1)].iter().copied());
            }
            if p > 1 {
                set.extend(sets[at(p - 1, q)].iter().copied());
            }
            set.insert(StreamId::new(1, p, q));
            set.insert(StreamId::new(2, q, p));
            sets[at(p, q)] = set;
        }
    }
    Ok(DecodeTable { ell, sets })
}

impl DecodeTable {
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Streams decoded in state `(p, q)`; `p` = user 2's level, `q` =
    /// user 1's level, both 1-based.
    pub fn set(&self, p: usize, q: usize) -> &BTreeSet<StreamId> {
        &self.sets[(p - 1) * self.ell + (q - 1)]
    }

    /// Total decoded rate in state `(p, q)` under symmetric stream rates.
    pub fn rate_sum(&self, p: usize, q: usize, rv: &RateVector) -> f64 {
        self.set(p, q).iter().map(|s| rv.get(s.u, s.v)).sum()
    }
}

// ---------------------------------------------------------------------------
// Reduction check
// ---------------------------------------------------------------------------

/// Outcome of comparing the `ℓ = 2` general-region bounds against the
/// two-state closed forms, identity by identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// Named absolute deviations; infinite when a term is missing.
    pub deviations: Vec<(String, f64)>,
    pub max_deviation: f64,
}

impl ReductionReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation <= tol
    }
}

/// Reduction check with the amended cross set (expected to pass).
pub fn reduction_check(m: &ChannelModel, pa: &PowerAllocation) -> Result<ReductionReport> {
    reduction_check_with(m, pa, CrossSetMode::Amended)
}

/// Compare every `ℓ = 2` general bound with its two-state counterpart.
///
/// Under [`CrossSetMode::Printed`] the cross-state set for the pair
/// `(1, 2)` is empty, the joint cap loses its binding term, and the
/// check reports the (documented) failure.
pub fn reduction_check_with(
    m: &ChannelModel,
    pa: &PowerAllocation,
    mode: CrossSetMode,
) -> Result<ReductionReport> {
    m.require_two_state()?;
    let lb = two_state::layer_bounds(m, pa)?;
    let sc = two_state::stage_constants(m, pa)?;
    let pb = pair_bounds_with(m, pa, 1, 2, mode)?;
    let d1 = diagonal_bounds(m, pa, 1)?;
    let d2 = diagonal_bounds(m, pa, 2)?;

    let mut deviations = Vec::new();
    let mut push = |name: &str, general: Option<f64>, two_state: f64| {
        let dev = match general {
            Some(g) => (g - two_state).abs(),
            None => f64::INFINITY,
        };
        deviations.push((name.to_string(), dev));
    };

    push("base single vs stage constant", Some(d1.b11), sc.a(4));
    push(
        "base joint vs stage constant",
        Some(0.5 * d1.b12),
        0.5 * sc.a(3),
    );
    push("cross (1,2) single, mixed state", Some(pb.b1), sc.a(14));
    push(
        "cross (1,2) single, joint state",
        Some(0.5 * pb.b3),
        0.5 * sc.a(24),
    );
    push("cross (2,1) single, mixed state", Some(pb.b4), sc.a(13));
    push(
        "cross (2,1) single, joint state",
        Some(0.5 * pb.b5),
        0.5 * sc.a(27),
    );
    push("cross sum, mixed state", pb.b6, sc.a(15));
    push("cross sum, joint state", Some(0.5 * pb.b8), 0.5 * sc.a(33));
    push("weighted sum 2:1", Some(pb.b9), lb.cross_12);
    push("weighted sum 1:2", Some(pb.b10), lb.cross_21);
    push("top layer cap", Some(d2.cap()), lb.r22);

    // collapsed region bounds, matched by coefficient signature
    let general = rate_region_with(m, pa, mode)?;
    let narrow = two_state::rate_region(m, pa)?;
    for c in narrow.constraints() {
        let g = general.bound_for(&c.coeffs);
        let dev = match g {
            Some(g) => (g - c.bound).abs(),
            None => f64::INFINITY,
        };
        deviations.push((format!("region bound {}", c.label(2)), dev));
    }

    let max_deviation = deviations.iter().map(|(_, d)| *d).fold(0.0f64, f64::max);
    Ok(ReductionReport {
        deviations,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::simplex_grid;
    use crate::SUM_TOL;

    fn fig_model() -> ChannelModel {
        ChannelModel::two_state(0.25, 1.0, 10.0, 0.4).unwrap()
    }

    fn sym(b: [f64; 4]) -> PowerAllocation {
        PowerAllocation::symmetric_two_state(b[0], b[1], b[2], b[3]).unwrap()
    }

    #[test]
    fn index_set_examples() {
        let s = index_sets(1, 2, 2).unwrap();
        assert_eq!(s.j1, vec![1]);
        assert_eq!(s.j2, vec![(1, 2)]);
        assert_eq!(s.j3, vec![(2, 2)]);

        // brute-force the j <= k predicate over {v..ell}
        let s = index_sets(1, 2, 3).unwrap();
        let mut brute = Vec::new();
        for j in 2..=3 {
            for k in 2..=3 {
                if j <= k {
                    brute.push((j, k));
                }
            }
        }
        assert_eq!(s.j3, brute);
        assert_eq!(s.j3, vec![(2, 2), (2, 3), (3, 3)]);

        let s = index_sets(2, 3, 3).unwrap();
        assert_eq!(s.j1, vec![2]);

        assert!(index_sets(2, 2, 3).is_err());
        assert!(index_sets(1, 4, 3).is_err());
    }

    #[test]
    fn printed_cross_set_is_empty_at_the_top_pair() {
        let s = index_sets_with(1, 2, 2, CrossSetMode::Printed).unwrap();
        assert!(s.j2.is_empty());
        let s = index_sets_with(1, 2, 3, CrossSetMode::Printed).unwrap();
        assert_eq!(s.j2, vec![(3, 1)]);
    }

    #[test]
    fn residual_examples() {
        let b = PowerMap::two_state(0.4, 0.3, 0.2, 0.1).unwrap();
        let r1 = power_residual(&b, 1, Some(1), 1, 2).unwrap();
        assert!((r1 - (1.0 - 0.4 - 0.2)).abs() < 1e-15);
        let r3 = power_residual(&b, 3, None, 1, 2).unwrap();
        assert!((r3 - (1.0 - 0.4 - 0.2 - 0.3)).abs() < 1e-15);
        let r8 = power_residual(&b, 8, None, 2, 2).unwrap();
        assert!(r8.abs() <= SUM_TOL);

        assert!(power_residual(&b, 1, None, 1, 2).is_err());
        assert!(power_residual(&b, 3, Some(1), 1, 2).is_err());
        assert!(power_residual(&b, 9, None, 1, 2).is_err());
        assert!(power_residual(&b, 1, Some(3), 1, 2).is_err());
    }

    #[test]
    fn residuals_stay_in_unit_interval() {
        // gains do not enter the residuals, only the allocation does
        for pa in simplex_grid(3, 0.5).unwrap() {
            let b = pa.symmetric().unwrap();
            for v in 2..=3usize {
                for u in 1..v {
                    for kind in [3, 4, 5] {
                        let r = power_residual(b, kind, None, u, v).unwrap();
                        assert!(
                            (-1e-12..=1.0 + 1e-12).contains(&r),
                            "B{kind}({u},{v}) = {r}"
                        );
                    }
                    for kind in [1, 2, 6, 7] {
                        for j in u..v {
                            let r = power_residual(b, kind, Some(j), u, v).unwrap();
                            assert!(
                                (-1e-12..=1.0 + 1e-12).contains(&r),
                                "B{kind}({j},{u},{v}) = {r}"
                            );
                        }
                    }
                }
            }
            for u in 1..=3usize {
                let r = power_residual(b, 8, None, u, u).unwrap();
                assert!((-1e-12..=1.0 + 1e-12).contains(&r), "B8({u},{u}) = {r}");
            }
        }
    }

    #[test]
    fn pair_bounds_reduce_to_stage_constants() {
        let m = fig_model();
        let pa = sym([0.4, 0.3, 0.2, 0.1]);
        let sc = two_state::stage_constants(&m, &pa).unwrap();
        let lb = two_state::layer_bounds(&m, &pa).unwrap();
        let pb = pair_bounds(&m, &pa, 1, 2).unwrap();
        let d1 = diagonal_bounds(&m, &pa, 1).unwrap();

        assert!((d1.b12 - sc.a(3)).abs() < 1e-12);
        assert!((pb.b1 - sc.a(14)).abs() < 1e-12);
        assert!((pb.b9 - lb.cross_12).abs() < 1e-12);
        assert!((pb.b6.unwrap() - sc.a(15)).abs() < 1e-12);
    }

    #[test]
    fn region_shapes() {
        // degenerate single-state channel: one constraint, all power on (1,1)
        let m1 = ChannelModel::new(vec![0.7], 10.0, vec![1.0]).unwrap();
        let pa1 = simplex_grid(1, 1.0).unwrap().next().unwrap();
        let r1 = rate_region(&m1, &pa1).unwrap();
        assert_eq!(r1.constraints().len(), 1);
        let d = diagonal_bounds(&m1, &pa1, 1).unwrap();
        assert_eq!(r1.bound_for(&[1]).unwrap(), d.cap());

        // three states, uniform split: 3 pairs * 5 + 3 diagonal = 18
        let m3 = ChannelModel::new(vec![0.2, 0.5, 1.0], 10.0, vec![0.3, 0.3, 0.4]).unwrap();
        let pa3 = PowerAllocation::Symmetric(PowerMap::new(3, vec![1.0 / 9.0; 9]).unwrap());
        let r3 = rate_region(&m3, &pa3).unwrap();
        assert_eq!(r3.constraints().len(), 18);
    }

    #[test]
    fn two_state_bounds_match_for_random_allocations() {
        let m = fig_model();
        for pa in simplex_grid(2, 0.25).unwrap() {
            let rep = reduction_check(&m, &pa).unwrap();
            assert!(
                rep.passed(1e-12),
                "reduction failed at {:?}: max dev {}",
                pa.user(1).fractions(),
                rep.max_deviation
            );
        }
    }

    #[test]
    fn reduction_examples() {
        let m = fig_model();
        assert!(reduction_check(&m, &sym([0.4, 0.3, 0.2, 0.1]))
            .unwrap()
            .passed(1e-12));
        // all power on the top layer: both top caps collapse to the same value
        assert!(reduction_check(&m, &sym([0.0, 0.0, 0.0, 1.0]))
            .unwrap()
            .passed(1e-12));
    }

    #[test]
    fn printed_cross_set_breaks_the_reduction() {
        let m = fig_model();
        let rep =
            reduction_check_with(&m, &sym([0.4, 0.3, 0.2, 0.1]), CrossSetMode::Printed).unwrap();
        assert!(!rep.passed(1e-12));
        assert!(rep.max_deviation.is_infinite());
    }

    #[test]
    fn decode_table_two_state_rows() {
        let t = decode_table(2).unwrap();
        // both channels weak: only the base pair
        let base: BTreeSet<_> = [StreamId::new(1, 1, 1), StreamId::new(2, 1, 1)]
            .into_iter()
            .collect();
        assert_eq!(t.set(1, 1), &base);

        // user 1 strong (q = 2), user 2 weak (p = 1)
        let expect: BTreeSet<_> = [
            StreamId::new(1, 1, 1),
            StreamId::new(2, 1, 1),
            StreamId::new(1, 1, 2),
            StreamId::new(2, 2, 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(t.set(1, 2), &expect);

        // both strong: all eight streams
        assert_eq!(t.set(2, 2).len(), 8);
    }

    #[test]
    fn decode_table_invariants() {
        for ell in 1..=6usize {
            let t = decode_table(ell).unwrap();
            assert_eq!(t.set(1, 1).len(), 2);
            assert_eq!(t.set(ell, ell).len(), 2 * ell * ell);
            for p in 1..=ell {
                for q in 1..=ell {
                    for p2 in p..=ell {
                        for q2 in q..=ell {
                            assert!(
                                t.set(p, q).is_subset(t.set(p2, q2)),
                                "monotonicity broken at ell={ell}: ({p},{q}) !<= ({p2},{q2})"
                            );
                        }
                    }
                }
            }
        }
        let t = decode_table(3).unwrap();
        assert_eq!(t.set(3, 3).len(), 18);
    }

    #[test]
    fn decode_table_first_appearance_is_unique() {
        let ell = 4;
        let t = decode_table(ell).unwrap();
        let mut firsts = std::collections::HashMap::new();
        for p in 1..=ell {
            for q in 1..=ell {
                for s in t.set(p, q) {
                    let from_parent = (p > 1 && q > 1 && t.set(p - 1, q - 1).contains(s))
                        || (q > 1 && t.set(p, q - 1).contains(s))
                        || (p > 1 && t.set(p - 1, q).contains(s));
                    if !from_parent {
                        assert!(
                            firsts.insert(*s, (p, q)).is_none(),
                            "stream {s:?} first appears twice"
                        );
                    }
                }
            }
        }
        assert_eq!(firsts.len(), 2 * ell * ell);
    }
}
