//! Channel model, capacity kernel, power allocations, and rate vectors.
//!
//! A `ChannelModel` holds the per-user fading law: `ell` possible squared
//! gains `alpha_1 < … < alpha_ell` (linear scale), the common transmit
//! power budget `P` (noise variance normalized to 1), and the marginal
//! probability of each gain. Both users draw their gains independently
//! from the same law, so the joint channel has `ell^2` states.
//!
//! Power allocations live on the `ell^2`-dimensional probability simplex:
//! entry `(u, v)` is the fraction of a transmitter's power spent on the
//! stream adapted to "own gain level `v`, other user's gain level `u`".

use crate::error::{Error, Result};
use crate::SUM_TOL;

/// Capacity kernel `C(x, y) = 1/2 * log2(1 + x / (y + 1/P))`.
///
/// `x` and `y` are powers expressed as fractions of the budget `P`
/// (so the absolute signal power is `x*P` against interference `y*P`
/// and unit noise). Zero iff `x == 0`; strictly increasing in `x` and
/// strictly decreasing in `y` for `x > 0`.
pub fn cap_term(x: f64, y: f64, power: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "signal fraction x = {x} must be >= 0"
        )));
    }
    if !y.is_finite() || y < 0.0 {
        return Err(Error::Domain(format!(
            "interference fraction y = {y} must be >= 0"
        )));
    }
    if !power.is_finite() || power <= 0.0 {
        return Err(Error::Domain(format!("power P = {power} must be > 0")));
    }
    Ok(cap(x, y, power))
}

/// Unchecked kernel used internally once inputs are validated.
pub(crate) fn cap(x: f64, y: f64, power: f64) -> f64 {
    0.5 * (1.0 + x / (y + 1.0 / power)).log2()
}

// ---------------------------------------------------------------------------
// ChannelModel
// ---------------------------------------------------------------------------

/// Finite-state fading law shared by both transmitters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    /// Squared channel gains in strictly ascending order, all positive.
    pub alphas: Vec<f64>,
    /// Per-user average power budget `P` (linear; noise variance 1).
    pub power: f64,
    /// `probs[m]` is the probability that a user's squared gain equals
    /// `alphas[m]`; entries are nonnegative and sum to 1.
    pub probs: Vec<f64>,
}

impl ChannelModel {
    /// Build and validate a model.
    pub fn new(alphas: Vec<f64>, power: f64, probs: Vec<f64>) -> Result<Self> {
        let m = ChannelModel {
            alphas,
            power,
            probs,
        };
        m.validate()?;
        Ok(m)
    }

    /// Two-state convenience constructor; `p_weak` is the probability of
    /// the weak gain `alpha1`.
    pub fn two_state(alpha1: f64, alpha2: f64, power: f64, p_weak: f64) -> Result<Self> {
        Self::new(vec![alpha1, alpha2], power, vec![p_weak, 1.0 - p_weak])
    }

    /// Number of per-user states.
    pub fn ell(&self) -> usize {
        self.alphas.len()
    }

    /// Check every model invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut faults = Vec::new();
        if self.alphas.is_empty() {
            faults.push("at least one channel state is required".to_string());
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if !a.is_finite() || *a <= 0.0 {
                faults.push(format!("gain alpha[{}] = {} must be > 0", i + 1, a));
            }
        }
        for w in self.alphas.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less) {
                faults.push(format!(
                    "gains must be strictly increasing: {} then {}",
                    w[0], w[1]
                ));
            }
        }
        if !self.power.is_finite() || self.power <= 0.0 {
            faults.push(format!("power P = {} must be > 0", self.power));
        }
        if self.probs.len() != self.alphas.len() {
            faults.push(format!(
                "probs has {} entries, expected {}",
                self.probs.len(),
                self.alphas.len()
            ));
        }
        for (i, p) in self.probs.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                faults.push(format!("probs[{}] = {} must be >= 0", i + 1, p));
            }
        }
        let total: f64 = self.probs.iter().sum();
        if self.probs.len() == self.alphas.len() && (total - 1.0).abs() > SUM_TOL {
            faults.push(format!("probs sum to {total}, expected 1 within 1e-12"));
        }
        if faults.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(faults))
        }
    }

    /// Gain at 1-based level `m`.
    pub fn alpha(&self, m: usize) -> f64 {
        self.alphas[m - 1]
    }

    /// Probability of 1-based level `m`.
    pub fn prob(&self, m: usize) -> f64 {
        self.probs[m - 1]
    }

    /// Capacity kernel with this model's power budget.
    pub(crate) fn cap(&self, x: f64, y: f64) -> f64 {
        cap(x, y, self.power)
    }

    fn require_ell(&self, expected: usize) -> Result<()> {
        if self.ell() != expected {
            return Err(Error::WrongStateCount {
                expected,
                actual: self.ell(),
            });
        }
        Ok(())
    }

    /// Error unless the model has exactly two states.
    pub fn require_two_state(&self) -> Result<()> {
        self.require_ell(2)
    }
}

// ---------------------------------------------------------------------------
// Power allocations
// ---------------------------------------------------------------------------

/// One transmitter's power split over the `ell^2` streams.
///
/// Entry `(u, v)` (both 1-based) is the fraction of power on the stream
/// adapted to the joint state "own gain level `v`, other gain level `u`".
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    ell: usize,
    frac: Vec<f64>,
}

impl PowerMap {
    /// Build from row-major fractions (`frac[(u-1)*ell + (v-1)]`).
    pub fn new(ell: usize, frac: Vec<f64>) -> Result<Self> {
        if ell == 0 || frac.len() != ell * ell {
            return Err(Error::InvalidAllocation(vec![format!(
                "expected {} fractions for ell = {}, got {}",
                ell * ell,
                ell,
                frac.len()
            )]));
        }
        let m = PowerMap { ell, frac };
        m.validate()?;
        Ok(m)
    }

    /// Two-state convenience constructor, entries `(b11, b12, b21, b22)`.
    pub fn two_state(b11: f64, b12: f64, b21: f64, b22: f64) -> Result<Self> {
        Self::new(2, vec![b11, b12, b21, b22])
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Fraction on stream `(u, v)`, 1-based.
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.frac[(u - 1) * self.ell + (v - 1)]
    }

    /// Row-major view of the fractions.
    pub fn fractions(&self) -> &[f64] {
        &self.frac
    }

    /// Sum of fractions over a rectangle of stream indices, `u` in
    /// `u_range` and `v` in `v_range` (1-based, inclusive, empty if
    /// `start > end`). The building block for interference bookkeeping.
    pub fn block_sum(&self, u_range: (usize, usize), v_range: (usize, usize)) -> f64 {
        let mut total = 0.0;
        for u in u_range.0..=u_range.1.min(self.ell) {
            for v in v_range.0..=v_range.1.min(self.ell) {
                total += self.get(u, v);
            }
        }
        total
    }

    fn validate(&self) -> Result<()> {
        let mut faults = Vec::new();
        for (i, f) in self.frac.iter().enumerate() {
            if !f.is_finite() || *f < 0.0 || *f > 1.0 {
                let (u, v) = (i / self.ell + 1, i % self.ell + 1);
                faults.push(format!("fraction ({u},{v}) = {f} outside [0, 1]"));
            }
        }
        let total: f64 = self.frac.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            faults.push(format!("fractions sum to {total}, expected 1 within 1e-12"));
        }
        if faults.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidAllocation(faults))
        }
    }
}

/// Power split for both transmitters: either one shared map or one per user.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerAllocation {
    /// Both users apply the same split.
    Symmetric(PowerMap),
    /// Independent splits for user 1 and user 2.
    Asymmetric(PowerMap, PowerMap),
}

impl PowerAllocation {
    /// Symmetric two-state allocation `(b11, b12, b21, b22)`.
    pub fn symmetric_two_state(b11: f64, b12: f64, b21: f64, b22: f64) -> Result<Self> {
        Ok(PowerAllocation::Symmetric(PowerMap::two_state(
            b11, b12, b21, b22,
        )?))
    }

    pub fn ell(&self) -> usize {
        match self {
            PowerAllocation::Symmetric(m) => m.ell(),
            PowerAllocation::Asymmetric(m, _) => m.ell(),
        }
    }

    /// The split used by transmitter `i` (1 or 2).
    pub fn user(&self, i: usize) -> &PowerMap {
        match self {
            PowerAllocation::Symmetric(m) => m,
            PowerAllocation::Asymmetric(m1, m2) => {
                if i <= 1 {
                    m1
                } else {
                    m2
                }
            }
        }
    }

    /// Shared map if the allocation is symmetric.
    pub fn symmetric(&self) -> Option<&PowerMap> {
        match self {
            PowerAllocation::Symmetric(m) => Some(m),
            PowerAllocation::Asymmetric(..) => None,
        }
    }

    /// Shared map, or an error for asymmetric allocations.
    pub fn require_symmetric(&self) -> Result<&PowerMap> {
        self.symmetric().ok_or(Error::AsymmetricAllocation)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PowerAllocation::Symmetric(m) => m.validate(),
            PowerAllocation::Asymmetric(m1, m2) => {
                m1.validate()?;
                m2.validate()?;
                if m1.ell() != m2.ell() {
                    return Err(Error::InvalidAllocation(vec![format!(
                        "user maps disagree on ell: {} vs {}",
                        m1.ell(),
                        m2.ell()
                    )]));
                }
                Ok(())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Rate vectors
// ---------------------------------------------------------------------------

/// Per-stream rates under the symmetric convention: stream `(u, v)` of
/// either user carries `get(u, v)` bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector {
    ell: usize,
    rates: Vec<f64>,
}

impl RateVector {
    /// Build from row-major rates; all entries must be finite and `>= 0`.
    pub fn new(ell: usize, rates: Vec<f64>) -> Result<Self> {
        if ell == 0 || rates.len() != ell * ell {
            return Err(Error::InvalidRates(vec![format!(
                "expected {} rates for ell = {}, got {}",
                ell * ell,
                ell,
                rates.len()
            )]));
        }
        let mut faults = Vec::new();
        for (i, r) in rates.iter().enumerate() {
            if !r.is_finite() || *r < 0.0 {
                let (u, v) = (i / ell + 1, i % ell + 1);
                faults.push(format!("rate ({u},{v}) = {r} must be >= 0"));
            }
        }
        if !faults.is_empty() {
            return Err(Error::InvalidRates(faults));
        }
        Ok(RateVector { ell, rates })
    }

    /// Two-state convenience constructor, entries `(r11, r12, r21, r22)`.
    pub fn two_state(r11: f64, r12: f64, r21: f64, r22: f64) -> Result<Self> {
        Self::new(2, vec![r11, r12, r21, r22])
    }

    /// All-zero rates (always achievable).
    pub fn zero(ell: usize) -> Self {
        RateVector {
            ell,
            rates: vec![0.0; ell * ell],
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Rate of stream `(u, v)`, 1-based.
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.rates[(u - 1) * self.ell + (v - 1)]
    }

    /// Row-major view of the rates.
    pub fn entries(&self) -> &[f64] {
        &self.rates
    }

    /// Sum of all stream rates.
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Simplex grid
// ---------------------------------------------------------------------------

/// Deterministic enumeration of symmetric allocations whose fractions are
/// multiples of `resolution`; see [`simplex_grid`].
pub struct SimplexGrid {
    ell: usize,
    steps: u64,
    prefix: Vec<u64>,
    started: bool,
    done: bool,
}

/// Enumerate every symmetric [`PowerAllocation`] on the `ell^2` simplex
/// whose entries are multiples of `resolution`, in ascending
/// lexicographic order of the entry tuple.
///
/// `resolution` must lie in `(0, 1]` with `1/resolution` an integer
/// within `1e-9`. The number of points is the composition count
/// `C(N + ell^2 - 1, ell^2 - 1)` with `N = 1/resolution`.
pub fn simplex_grid(ell: usize, resolution: f64) -> Result<SimplexGrid> {
    if ell == 0 {
        return Err(Error::Domain("ell must be >= 1".to_string()));
    }
    if !resolution.is_finite() || resolution <= 0.0 || resolution > 1.0 {
        return Err(Error::GridResolution(resolution));
    }
    let inv = 1.0 / resolution;
    let steps = inv.round();
    if (inv - steps).abs() > 1e-9 {
        return Err(Error::GridResolution(resolution));
    }
    Ok(SimplexGrid {
        ell,
        steps: steps as u64,
        prefix: vec![0; ell * ell - 1],
        started: false,
        done: false,
    })
}

impl SimplexGrid {
    fn emit(&self) -> PowerAllocation {
        let n = self.steps as f64;
        let head: u64 = self.prefix.iter().sum();
        let mut frac: Vec<f64> = self.prefix.iter().map(|&c| c as f64 / n).collect();
        frac.push((self.steps - head) as f64 / n);
        PowerAllocation::Symmetric(PowerMap {
            ell: self.ell,
            frac,
        })
    }

    /// Advance `prefix` to the next tuple with sum <= steps, odometer-style.
    fn advance(&mut self) -> bool {
        let k = self.prefix.len();
        for i in (0..k).rev() {
            for p in self.prefix.iter_mut().skip(i + 1) {
                *p = 0;
            }
            let head: u64 = self.prefix[..=i].iter().sum();
            if head < self.steps {
                self.prefix[i] += 1;
                return true;
            }
        }
        false
    }
}

impl Iterator for SimplexGrid {
    type Item = PowerAllocation;

    fn next(&mut self) -> Option<PowerAllocation> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.emit());
        }
        if self.prefix.is_empty() || !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.emit())
    }
}
