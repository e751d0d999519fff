//! Closed forms for the two-state channel: per-layer rate caps, the
//! stage-wise decoding constants, the achievable region, the grouped
//! baseline region, the outer bound, and a per-state feasibility check.
//!
//! Streams are indexed `(u, v)`: own gain level `v`, other user's gain
//! level `u`. The successive-decoding order is
//!
//! | state (h1², h2²) | stage 1        | stage 2                    | stage 3        |
//! |------------------|----------------|----------------------------|----------------|
//! | (a1, a1)         | W¹11, W²11     |                            |                |
//! | (a2, a1)         | W¹11, W²11     | W¹12, W²21                 |                |
//! | (a1, a2)         | W¹11, W²11     | W¹21, W²12                 |                |
//! | (a2, a2)         | W¹11, W²11     | W¹12, W²12, W¹21, W²21     | W¹22, W²22     |
//!
//! Every bound below is the capacity kernel of one decoding stage at one
//! state, with already-decoded streams cancelled and the rest as noise.

use crate::channel::{ChannelModel, PowerAllocation, RateVector};
use crate::error::{Error, Result};
use crate::region::{Constraint, RateRegion};
use crate::SUM_TOL;

/// Per-layer rate caps for the symmetric two-state scheme.
///
/// Each field is the tightest cap over the states where the streams in
/// question must be decodable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerBounds {
    /// Cap on `R11` (base layer, decoded in every state).
    pub r11: f64,
    /// Cap on `R12` (own channel strong, other weak).
    pub r12: f64,
    /// Cap on `R21` (own channel weak, other strong).
    pub r21: f64,
    /// Cap on the sum `R12 + R21`.
    pub cross_sum: f64,
    /// Cap on the weighted sum `2*R12 + R21`.
    pub cross_12: f64,
    /// Cap on the weighted sum `R12 + 2*R21`.
    pub cross_21: f64,
    /// Cap on `R22` (top layer, decoded only when both channels are strong).
    pub r22: f64,
}

/// Evaluate the per-layer caps at a symmetric allocation.
pub fn layer_bounds(m: &ChannelModel, pa: &PowerAllocation) -> Result<LayerBounds> {
    m.require_two_state()?;
    m.validate()?;
    pa.validate()?;
    let b = pa.require_symmetric()?;
    if b.ell() != 2 {
        return Err(Error::WrongStateCount {
            expected: 2,
            actual: b.ell(),
        });
    }
    let (a1, a2) = (m.alpha(1), m.alpha(2));
    let (b11, b12, b21, b22) = (b.get(1, 1), b.get(1, 2), b.get(2, 1), b.get(2, 2));
    let nb11 = 1.0 - b11;
    // interference seen by a mixed-state second decoding stage
    let mix = a1 * (b12 + b22) + a2 * (b21 + b22);

    Ok(LayerBounds {
        r11: f64::min(
            m.cap(a1 * b11, (a1 + a2) * nb11),
            0.5 * m.cap(2.0 * a1 * b11, 2.0 * a1 * nb11),
        ),
        r12: f64::min(
            m.cap(a2 * b12, mix),
            0.5 * m.cap(2.0 * a2 * b12, 2.0 * a2 * b22),
        ),
        r21: f64::min(
            m.cap(a1 * b21, mix),
            0.5 * m.cap(2.0 * a2 * b21, 2.0 * a2 * b22),
        ),
        cross_sum: f64::min(
            m.cap(a1 * b21 + a2 * b12, mix),
            0.5 * m.cap(2.0 * a2 * (b12 + b21), 2.0 * a2 * b22),
        ),
        cross_12: m.cap(a2 * (2.0 * b12 + b21), 2.0 * a2 * b22),
        cross_21: m.cap(a2 * (b12 + 2.0 * b21), 2.0 * a2 * b22),
        r22: 0.5 * m.cap(2.0 * a2 * b22, 0.0),
    })
}

// ---------------------------------------------------------------------------
// Stage constants
// ---------------------------------------------------------------------------

/// The 33 stage-wise decoding constants for the two-state channel,
/// allowing distinct per-user splits.
///
/// Grouping (state written as `(h1², h2²)`):
/// - `a1..a3`: stage 1 at `(a1, a1)`, bounding `R¹11`, `R²11`, and their sum;
/// - `a4..a6`: stage 1 at `(a1, a2)`; `a7..a9`: stage 1 at `(a2, a1)`;
///   `a10..a12`: stage 1 at `(a2, a2)`;
/// - `a13..a15`: stage 2 at `(a1, a2)`, bounding `R¹21`, `R²12`, and their sum;
/// - `a16..a18`: stage 2 at `(a2, a1)`, bounding `R¹12`, `R²21`, and their sum;
/// - `a19..a33`: stage 2 at `(a2, a2)`, one bound per nonempty subset of
///   `{R¹12, R¹21, R²12, R²21}`: singles 19–22, pairs 23–28, triples
///   29–32, all four 33.
#[derive(Debug, Clone, PartialEq)]
pub struct StageConstants {
    a: [f64; 34],
}

impl StageConstants {
    /// Constant `a_i`, `i` in `1..=33`.
    pub fn a(&self, i: usize) -> f64 {
        assert!(
            (1..=33).contains(&i),
            "stage constant index {i} out of 1..=33"
        );
        self.a[i]
    }
}

/// Evaluate the stage constants; the allocation may be asymmetric.
pub fn stage_constants(m: &ChannelModel, pa: &PowerAllocation) -> Result<StageConstants> {
    m.require_two_state()?;
    m.validate()?;
    pa.validate()?;
    if pa.ell() != 2 {
        return Err(Error::WrongStateCount {
            expected: 2,
            actual: pa.ell(),
        });
    }
    let (g1, g2) = (m.alpha(1), m.alpha(2));
    let p1 = pa.user(1);
    let p2 = pa.user(2);
    // base-layer fractions and their complements
    let (b1_11, b2_11) = (p1.get(1, 1), p2.get(1, 1));
    let (n1, n2) = (1.0 - b1_11, 1.0 - b2_11);
    // second-stage fractions
    let (b1_12, b1_21, b1_22) = (p1.get(1, 2), p1.get(2, 1), p1.get(2, 2));
    let (b2_12, b2_21, b2_22) = (p2.get(1, 2), p2.get(2, 1), p2.get(2, 2));

    let mut a = [f64::NAN; 34];

    // stage 1: both users' base layers, other six streams as noise
    a[1] = m.cap(g1 * b1_11, g1 * (n1 + n2));
    a[2] = m.cap(g1 * b2_11, g1 * (n1 + n2));
    a[3] = m.cap(g1 * (b1_11 + b2_11), g1 * (n1 + n2));
    a[4] = m.cap(g1 * b1_11, g1 * n1 + g2 * n2);
    a[5] = m.cap(g2 * b2_11, g1 * n1 + g2 * n2);
    a[6] = m.cap(g1 * b1_11 + g2 * b2_11, g1 * n1 + g2 * n2);
    a[7] = m.cap(g2 * b1_11, g2 * n1 + g1 * n2);
    a[8] = m.cap(g1 * b2_11, g2 * n1 + g1 * n2);
    a[9] = m.cap(g2 * b1_11 + g1 * b2_11, g2 * n1 + g1 * n2);
    a[10] = m.cap(g2 * b1_11, g2 * (n1 + n2));
    a[11] = m.cap(g2 * b2_11, g2 * (n1 + n2));
    a[12] = m.cap(g2 * (b1_11 + b2_11), g2 * (n1 + n2));

    // stage 2 at a mixed state: the pair adapted to that state is decoded
    // jointly; each user's other cross/top streams stay as noise
    let mix12 = g1 * (b1_12 + b1_22) + g2 * (b2_21 + b2_22);
    a[13] = m.cap(g1 * b1_21, mix12);
    a[14] = m.cap(g2 * b2_12, mix12);
    a[15] = m.cap(g1 * b1_21 + g2 * b2_12, mix12);
    let mix21 = g2 * (b1_21 + b1_22) + g1 * (b2_12 + b2_22);
    a[16] = m.cap(g2 * b1_12, mix21);
    a[17] = m.cap(g1 * b2_21, mix21);
    a[18] = m.cap(g2 * b1_12 + g1 * b2_21, mix21);

    // stage 2 when both channels are strong: four cross streams decoded
    // jointly over the top layers' interference
    let top = g2 * b1_22 + g2 * b2_22;
    a[19] = m.cap(g2 * b1_12, top);
    a[20] = m.cap(g2 * b1_21, top);
    a[21] = m.cap(g2 * b2_12, top);
    a[22] = m.cap(g2 * b2_21, top);
    a[23] = m.cap(g2 * (b1_12 + b1_21), top);
    a[24] = m.cap(g2 * (b1_12 + b2_12), top);
    a[25] = m.cap(g2 * (b1_12 + b2_21), top);
    a[26] = m.cap(g2 * (b1_21 + b2_12), top);
    a[27] = m.cap(g2 * (b1_21 + b2_21), top);
    a[28] = m.cap(g2 * (b2_12 + b2_21), top);
    a[29] = m.cap(g2 * (b1_12 + b1_21) + g2 * b2_12, top);
    a[30] = m.cap(g2 * (b1_12 + b1_21) + g2 * b2_21, top);
    a[31] = m.cap(g2 * b1_12 + g2 * (b2_12 + b2_21), top);
    a[32] = m.cap(g2 * b1_21 + g2 * (b2_12 + b2_21), top);
    a[33] = m.cap(g2 * (b1_12 + b1_21) + g2 * (b2_12 + b2_21), top);

    Ok(StageConstants { a })
}

// ---------------------------------------------------------------------------
// Achievable region
// ---------------------------------------------------------------------------

/// The two-state achievable region at a symmetric allocation: exactly
/// seven constraints on `(R11, R12, R21, R22)`.
pub fn rate_region(m: &ChannelModel, pa: &PowerAllocation) -> Result<RateRegion> {
    let lb = layer_bounds(m, pa)?;
    let tag = "two-state";
    let mk = |coeffs: [u8; 4], bound: f64| Constraint {
        coeffs: coeffs.to_vec(),
        bound,
        tag: tag.to_string(),
    };
    RateRegion::new(
        2,
        vec![
            mk([1, 0, 0, 0], lb.r11),
            mk([0, 1, 0, 0], lb.r12),
            mk([0, 0, 1, 0], lb.r21),
            mk([0, 1, 1, 0], lb.cross_sum),
            mk([0, 2, 1, 0], lb.cross_12),
            mk([0, 1, 2, 0], lb.cross_21),
            mk([0, 0, 0, 1], lb.r22),
        ],
    )
}

// ---------------------------------------------------------------------------
// Grouped baseline region
// ---------------------------------------------------------------------------

/// Caps for the two-layer baseline grouping: `weak` bounds the sum rate
/// of the two base streams, `strong` the sum rate of the two streams
/// decoded whenever the own channel is strong.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineBounds {
    pub weak: f64,
    pub strong: f64,
}

/// The grouped baseline region. Requires zero power on the cross and
/// top layers (streams `(2,1)` and `(2,2)`) for both users; the
/// allocation may otherwise be asymmetric.
///
/// Note: `strong` is the interference-free sum cap of the strong-adapted
/// streams. Under staged decoding the mixed states can bind first; see
/// [`stage_feasibility`] for the per-state view.
pub fn baseline_region(m: &ChannelModel, pa: &PowerAllocation) -> Result<BaselineBounds> {
    for user in [1, 2] {
        for (u, v) in [(2, 1), (2, 2)] {
            let f = pa.user(user).get(u, v);
            if f > SUM_TOL {
                return Err(Error::NonzeroUpperLayers(format!(
                    "user {user} puts fraction {f} on stream ({u},{v})"
                )));
            }
        }
    }
    let sc = stage_constants(m, pa)?;
    let weak = sc.a(3).min(sc.a(6)).min(sc.a(9)).min(sc.a(4) + sc.a(8));
    let g2 = m.alpha(2);
    let strong = m.cap(g2 * pa.user(1).get(1, 2) + g2 * pa.user(2).get(1, 2), 0.0);
    Ok(BaselineBounds { weak, strong })
}

// ---------------------------------------------------------------------------
// Outer bound
// ---------------------------------------------------------------------------

/// Componentwise outer bound on `(R11, R12, R21, R22)` at a symmetric
/// allocation. Every rate vector in [`rate_region`] satisfies it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterBound {
    pub r11: f64,
    pub r12: f64,
    pub r21: f64,
    pub r22: f64,
}

/// Evaluate the outer bound at a symmetric allocation.
pub fn outer_bound(m: &ChannelModel, pa: &PowerAllocation) -> Result<OuterBound> {
    pa.require_symmetric()?;
    let sc = stage_constants(m, pa)?;
    let lb = layer_bounds(m, pa)?;
    Ok(OuterBound {
        r11: 0.5 * sc.a(3),
        r12: 0.5 * sc.a(24),
        r21: 0.5 * sc.a(27),
        r22: lb.r22,
    })
}

// ---------------------------------------------------------------------------
// Stage-wise feasibility
// ---------------------------------------------------------------------------

/// One violated decoding-stage inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct StageViolation {
    /// Decoding stage within the state (1, 2, or 3).
    pub stage: u8,
    /// Linear form that failed, e.g. `R[1,2] + R[2,1]`.
    pub label: String,
    /// Value of the linear form at the checked rates.
    pub value: f64,
    /// The stage bound it exceeded.
    pub bound: f64,
}

/// Feasibility report for one joint state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCheck {
    /// Gain level of user 1's channel (1 = weak, 2 = strong).
    pub h1_level: usize,
    /// Gain level of user 2's channel.
    pub h2_level: usize,
    pub violations: Vec<StageViolation>,
}

impl StateCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-state feasibility report; order: (1,1), (1,2), (2,1), (2,2)
/// keyed by `(h1_level, h2_level)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub states: Vec<StateCheck>,
}

impl StageReport {
    pub fn passed(&self) -> bool {
        self.states.iter().all(StateCheck::passed)
    }
}

/// Check a symmetric rate vector against every decoding-stage inequality
/// at every joint state. Any vector inside [`rate_region`] (for the same
/// symmetric allocation) passes all four states.
pub fn stage_feasibility(
    m: &ChannelModel,
    pa: &PowerAllocation,
    rv: &RateVector,
) -> Result<StageReport> {
    let sc = stage_constants(m, pa)?;
    if rv.ell() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "rate vector has ell = {}, expected 2",
            rv.ell()
        )));
    }
    let tol = SUM_TOL;
    let (r11, r12, r21, r22) = (rv.get(1, 1), rv.get(1, 2), rv.get(2, 1), rv.get(2, 2));
    let g2 = m.alpha(2);
    let (t1_22, t2_22) = (pa.user(1).get(2, 2), pa.user(2).get(2, 2));

    let mut states = Vec::with_capacity(4);
    for (h1, h2) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
        let mut violations = Vec::new();
        let mut check = |stage: u8, label: &str, value: f64, bound: f64| {
            if value > bound + tol {
                violations.push(StageViolation {
                    stage,
                    label: label.to_string(),
                    value,
                    bound,
                });
            }
        };

        // stage 1: base layers (per-user and sum bounds)
        let base = match (h1, h2) {
            (1, 1) => [sc.a(1), sc.a(2), sc.a(3)],
            (1, 2) => [sc.a(4), sc.a(5), sc.a(6)],
            (2, 1) => [sc.a(7), sc.a(8), sc.a(9)],
            _ => [sc.a(10), sc.a(11), sc.a(12)],
        };
        check(1, "R[1,1] (user 1)", r11, base[0]);
        check(1, "R[1,1] (user 2)", r11, base[1]);
        check(1, "2*R[1,1]", 2.0 * r11, base[2]);

        // stage 2: streams adapted to the realized state
        match (h1, h2) {
            (1, 2) => {
                check(2, "R[2,1] (user 1)", r21, sc.a(13));
                check(2, "R[1,2] (user 2)", r12, sc.a(14));
                check(2, "R[2,1] + R[1,2]", r21 + r12, sc.a(15));
            }
            (2, 1) => {
                check(2, "R[1,2] (user 1)", r12, sc.a(16));
                check(2, "R[2,1] (user 2)", r21, sc.a(17));
                check(2, "R[1,2] + R[2,1]", r12 + r21, sc.a(18));
            }
            (2, 2) => {
                check(2, "R[1,2] (user 1)", r12, sc.a(19));
                check(2, "R[2,1] (user 1)", r21, sc.a(20));
                check(2, "R[1,2] (user 2)", r12, sc.a(21));
                check(2, "R[2,1] (user 2)", r21, sc.a(22));
                check(2, "R[1,2] + R[2,1]", r12 + r21, sc.a(23));
                check(2, "2*R[1,2]", 2.0 * r12, sc.a(24));
                check(2, "R[1,2] + R[2,1]", r12 + r21, sc.a(25));
                check(2, "R[2,1] + R[1,2]", r21 + r12, sc.a(26));
                check(2, "2*R[2,1]", 2.0 * r21, sc.a(27));
                check(2, "R[1,2] + R[2,1]", r12 + r21, sc.a(28));
                check(2, "2*R[1,2] + R[2,1]", 2.0 * r12 + r21, sc.a(29));
                check(2, "R[1,2] + 2*R[2,1]", r12 + 2.0 * r21, sc.a(30));
                check(2, "2*R[1,2] + R[2,1]", 2.0 * r12 + r21, sc.a(31));
                check(2, "R[1,2] + 2*R[2,1]", r12 + 2.0 * r21, sc.a(32));
                check(2, "2*(R[1,2] + R[2,1])", 2.0 * (r12 + r21), sc.a(33));
            }
            _ => {}
        }

        // stage 3: top layers, decoded interference-free when both strong
        if (h1, h2) == (2, 2) {
            check(3, "R[2,2] (user 1)", r22, m.cap(g2 * t1_22, 0.0));
            check(3, "R[2,2] (user 2)", r22, m.cap(g2 * t2_22, 0.0));
            check(3, "2*R[2,2]", 2.0 * r22, m.cap(g2 * (t1_22 + t2_22), 0.0));
        }

        states.push(StateCheck {
            h1_level: h1,
            h2_level: h2,
            violations,
        });
    }
    Ok(StageReport { states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PowerMap;

    fn fig_model() -> ChannelModel {
        ChannelModel::two_state(0.25, 1.0, 10.0, 0.4).unwrap()
    }

    fn sym(b11: f64, b12: f64, b21: f64, b22: f64) -> PowerAllocation {
        PowerAllocation::symmetric_two_state(b11, b12, b21, b22).unwrap()
    }

    #[test]
    fn top_layer_only() {
        let m = fig_model();
        let lb = layer_bounds(&m, &sym(0.0, 0.0, 0.0, 1.0)).unwrap();
        // quarter-log cap on the top layer, everything else starved
        assert!((lb.r22 - 0.25 * 21f64.log2()).abs() < 1e-12);
        assert!((lb.r22 - 1.098079).abs() < 1e-6);
        assert_eq!(lb.r11, 0.0);
        assert_eq!(lb.r12, 0.0);
        assert_eq!(lb.r21, 0.0);
    }

    #[test]
    fn base_layer_only() {
        let m = fig_model();
        let lb = layer_bounds(&m, &sym(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(lb.r12, 0.0);
        assert_eq!(lb.r21, 0.0);
        assert_eq!(lb.r22, 0.0);
        // the sum bound is the tighter of the two base-layer caps
        let single = m.cap(0.25, 0.0);
        let joint = 0.5 * m.cap(0.5, 0.0);
        assert!(joint <= single);
        assert!((lb.r11 - joint).abs() < 1e-15);
    }

    #[test]
    fn cross_layer_symmetry_of_first_arguments() {
        // with b12 = b21 the two cross caps differ only through the
        // signal gains a1*b21 vs a2*b12 entering the mixed-state kernel
        let m = fig_model();
        let lb = layer_bounds(&m, &sym(0.4, 0.2, 0.2, 0.2)).unwrap();
        let mix = 0.25 * (0.2 + 0.2) + 1.0 * (0.2 + 0.2);
        assert!((lb.r12 - f64::min(m.cap(0.2, mix), 0.5 * m.cap(0.4, 0.4))).abs() < 1e-15);
        assert!((lb.r21 - f64::min(m.cap(0.05, mix), 0.5 * m.cap(0.4, 0.4))).abs() < 1e-15);
    }

    #[test]
    fn layer_bounds_requires_symmetric_two_state() {
        let m = fig_model();
        let asym = PowerAllocation::Asymmetric(
            PowerMap::two_state(1.0, 0.0, 0.0, 0.0).unwrap(),
            PowerMap::two_state(0.0, 1.0, 0.0, 0.0).unwrap(),
        );
        assert!(layer_bounds(&m, &asym).is_err());
        let m3 = ChannelModel::new(vec![0.2, 0.5, 1.0], 10.0, vec![0.3, 0.3, 0.4]).unwrap();
        let pa3 = crate::channel::simplex_grid(3, 1.0)
            .unwrap()
            .next()
            .unwrap();
        assert!(layer_bounds(&m3, &pa3).is_err());
    }

    #[test]
    fn stage_constants_symmetry_identities() {
        let m = fig_model();
        for betas in [
            (0.4, 0.3, 0.2, 0.1),
            (0.25, 0.25, 0.25, 0.25),
            (0.7, 0.1, 0.1, 0.1),
            (0.0, 0.0, 0.0, 1.0),
        ] {
            let sc = stage_constants(&m, &sym(betas.0, betas.1, betas.2, betas.3)).unwrap();
            for (i, j) in [(4, 8), (14, 16), (13, 17), (15, 18), (29, 31), (30, 32)] {
                assert!(
                    (sc.a(i) - sc.a(j)).abs() <= 1e-12,
                    "a{i} != a{j} at {betas:?}: {} vs {}",
                    sc.a(i),
                    sc.a(j)
                );
            }
        }
    }

    #[test]
    fn stage_constants_zero_interference_case() {
        let m = fig_model();
        let pa = sym(1.0, 0.0, 0.0, 0.0);
        let sc = stage_constants(&m, &pa).unwrap();
        assert!((sc.a(3) - m.cap(2.0 * 0.25, 0.0)).abs() < 1e-15);
        assert!((sc.a(12) - m.cap(2.0 * 1.0, 0.0)).abs() < 1e-15);
        assert!(sc.a(3) < sc.a(12));
    }

    #[test]
    fn stage_constant_a19_hand_value() {
        // alpha = (0.25, 1), P = 10, symmetric (0.4, 0.3, 0.2, 0.1):
        // signal 0.3 against top-layer interference 0.2 plus 1/P = 0.1
        // gives exactly half a bit
        let m = fig_model();
        let sc = stage_constants(&m, &sym(0.4, 0.3, 0.2, 0.1)).unwrap();
        assert!((sc.a(19) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn region_has_seven_constraints_and_origin() {
        let m = fig_model();
        for pa in crate::channel::simplex_grid(2, 0.25).unwrap() {
            let region = rate_region(&m, &pa).unwrap();
            assert_eq!(region.constraints().len(), 7);
            assert!(region.contains(&RateVector::zero(2), 0.0).unwrap());
        }
    }

    #[test]
    fn region_top_layer_only_collapses() {
        let m = fig_model();
        let region = rate_region(&m, &sym(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(region.bound_for(&[1, 0, 0, 0]), Some(0.0));
        assert_eq!(region.bound_for(&[0, 1, 0, 0]), Some(0.0));
        assert_eq!(region.bound_for(&[0, 0, 1, 0]), Some(0.0));
        let cap = region.bound_for(&[0, 0, 0, 1]).unwrap();
        assert!((cap - 0.25 * (1.0 + 2.0 * 10.0f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn baseline_region_examples() {
        let m = fig_model();
        // single-layer transmission: no strong-adapted power
        let bb = baseline_region(&m, &sym(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(bb.strong, 0.0);
        let sc = stage_constants(&m, &sym(1.0, 0.0, 0.0, 0.0)).unwrap();
        let expect = sc.a(3).min(sc.a(6)).min(sc.a(9)).min(sc.a(4) + sc.a(8));
        assert!((bb.weak - expect).abs() < 1e-15);

        // everything on the strong-adapted layer
        let bb = baseline_region(&m, &sym(0.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(bb.weak, 0.0);
        assert!((bb.strong - m.cap(2.0, 0.0)).abs() < 1e-15);

        // even split: interference-free strong cap
        let bb = baseline_region(&m, &sym(0.5, 0.5, 0.0, 0.0)).unwrap();
        assert!((bb.strong - 0.5 * 11f64.log2()).abs() < 1e-12);
        assert!((bb.strong - 1.729716).abs() < 1e-6);
    }

    #[test]
    fn baseline_region_rejects_upper_layer_power() {
        let m = fig_model();
        assert!(matches!(
            baseline_region(&m, &sym(0.5, 0.4, 0.1, 0.0)),
            Err(Error::NonzeroUpperLayers(_))
        ));
        assert!(matches!(
            baseline_region(&m, &sym(0.5, 0.4, 0.0, 0.1)),
            Err(Error::NonzeroUpperLayers(_))
        ));
    }

    #[test]
    fn outer_bound_relations() {
        let m = fig_model();
        for pa in crate::channel::simplex_grid(2, 0.2).unwrap() {
            let ob = outer_bound(&m, &pa).unwrap();
            let lb = layer_bounds(&m, &pa).unwrap();
            // the top-layer caps agree exactly
            assert_eq!(ob.r22, lb.r22);
            // each achievable cap sits below its outer counterpart
            assert!(lb.r12 <= ob.r12 + 1e-15);
            assert!(lb.r21 <= ob.r21 + 1e-15);
            assert!(lb.r11 <= ob.r11 + 1e-15);
        }
        let ob = outer_bound(&m, &sym(0.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(ob.r11, 0.0);
        assert_eq!(ob.r12, 0.0);
        assert_eq!(ob.r21, 0.0);
    }

    #[test]
    fn stage_feasibility_zero_rates_pass() {
        let m = fig_model();
        let rep = stage_feasibility(&m, &sym(0.4, 0.3, 0.2, 0.1), &RateVector::zero(2)).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.states.len(), 4);
    }

    #[test]
    fn stage_feasibility_isolates_top_layer_violation() {
        let m = fig_model();
        let pa = sym(0.4, 0.3, 0.2, 0.1);
        let lb = layer_bounds(&m, &pa).unwrap();
        let rv = RateVector::two_state(0.0, 0.0, 0.0, lb.r22 + 0.1).unwrap();
        let rep = stage_feasibility(&m, &pa, &rv).unwrap();
        for st in &rep.states {
            if (st.h1_level, st.h2_level) == (2, 2) {
                assert!(!st.passed());
                assert!(st.violations.iter().all(|v| v.stage == 3));
            } else {
                assert!(
                    st.passed(),
                    "state {:?} should pass",
                    (st.h1_level, st.h2_level)
                );
            }
        }
    }

    #[test]
    fn region_membership_implies_stage_feasibility() {
        let m = fig_model();
        let pa = sym(0.4, 0.3, 0.2, 0.1);
        let lb = layer_bounds(&m, &pa).unwrap();
        // corner of the region: individually capped rates scaled to meet
        // the sum constraints
        let mut r12 = lb.r12;
        let mut r21 = lb.r21;
        let scale = (lb.cross_sum / (r12 + r21)).min(1.0);
        r12 *= scale;
        r21 *= scale;
        let rv = RateVector::two_state(lb.r11, r12, r21, lb.r22).unwrap();
        if rate_region(&m, &pa).unwrap().contains(&rv, 1e-12).unwrap() {
            assert!(stage_feasibility(&m, &pa, &rv).unwrap().passed());
        }
    }
}
