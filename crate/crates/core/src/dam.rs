//! Data modification on multiplier sets.
//!
//! A data set pairs new indices `τ(s), γ(s)` (the delta part) with earlier
//! indices `τ(i), λ(i), γ(i)` (the base part). Each step rewrites one delta
//! point whose support contains the support of some base point, moving
//! weight onto that base point, until no delta support contains a base
//! support. The weighted sum
//!
//! ```text
//! Σ γ(i) τ(i)ᵀ A τ(i) + Σ_base λ(i)ᵀ A τ(i)
//! ```
//!
//! is unchanged by every step, for every symmetric `A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symcore::{bilinear_form, dist_to_hull, quad_form, SimplexPoint, SymMatrix, SUPPORT_THRESHOLD};

/// `θ` at or above `1 - THETA_MARGIN` means corrupted input.
const THETA_MARGIN: f64 = 1e-12;
/// A rewritten point closer than this to the base hull is flagged.
pub const HULL_FLAG_DIST: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaItem {
    pub tau: SimplexPoint,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseItem {
    pub tau: SimplexPoint,
    pub lambda: Vec<f64>,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    pub delta: Vec<DeltaItem>,
    pub base: Vec<BaseItem>,
}

impl DataSet {
    pub fn new(delta: Vec<DeltaItem>, base: Vec<BaseItem>) -> Result<Self> {
        let d = DataSet { delta, base };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.dim();
        for it in &self.delta {
            if it.tau.dim() != p {
                return Err(Error::DimensionMismatch { expected: p, found: it.tau.dim() });
            }
            if !(it.gamma > 0.0) {
                return Err(Error::DamPrecondition(format!("delta weight {} is not positive", it.gamma)));
            }
        }
        for it in &self.base {
            if it.tau.dim() != p || it.lambda.len() != p {
                return Err(Error::DimensionMismatch { expected: p, found: it.lambda.len() });
            }
            if !(it.gamma > 0.0) {
                return Err(Error::DamPrecondition(format!("base weight {} is not positive", it.gamma)));
            }
            if let Some(v) = it.lambda.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::DamPrecondition(format!("multiplier entry {v} is negative")));
            }
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        self.delta.first().map(|d| d.tau.dim()).or_else(|| self.base.first().map(|b| b.tau.dim())).unwrap_or(0)
    }

    /// `Σ γ τᵀAτ` over both parts plus `Σ λᵀAτ` over the base part.
    pub fn functional(&self, a: &SymMatrix) -> Result<f64> {
        let mut acc = 0.0;
        for it in &self.delta {
            acc += it.gamma * quad_form(a, it.tau.coords())?;
        }
        for it in &self.base {
            acc += it.gamma * quad_form(a, it.tau.coords())?;
            acc += bilinear_form(a, &it.lambda, it.tau.coords())?;
        }
        Ok(acc)
    }
}

/// Zero-based indices `k` with `τ_k > 1e-12`.
pub fn support(tau: &SimplexPoint) -> Vec<usize> {
    tau.support()
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|k| b.contains(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separation {
    Holds,
    /// `support(base[i0]) ⊆ support(delta[s0])`.
    Violated {
        s0: usize,
        i0: usize,
    },
}

/// Checks that every base support meets the complement of every delta
/// support; otherwise returns the first offending pair, scanning delta
/// items in order and base items in order within each.
pub fn separation_holds(data: &DataSet) -> Separation {
    let base: Vec<Vec<usize>> = data.base.iter().map(|b| support(&b.tau)).collect();
    for (s, d) in data.delta.iter().enumerate() {
        let ps = support(&d.tau);
        for (i, pi) in base.iter().enumerate() {
            if is_subset(pi, &ps) {
                return Separation::Violated { s0: s, i0: i };
            }
        }
    }
    Separation::Holds
}

/// `θ = min over k ∈ P₊(i₀) of τ_k(s₀)/τ_k(i₀)`; must lie strictly in `(0, 1)`.
pub fn compute_theta(tau_s0: &SimplexPoint, tau_i0: &SimplexPoint) -> Result<f64> {
    if tau_s0.dim() != tau_i0.dim() {
        return Err(Error::DimensionMismatch { expected: tau_s0.dim(), found: tau_i0.dim() });
    }
    let (ps, pi) = (support(tau_s0), support(tau_i0));
    if !is_subset(&pi, &ps) {
        return Err(Error::DamPrecondition(format!("support {pi:?} is not contained in {ps:?}")));
    }
    let theta = pi.iter().map(|&k| tau_s0.coords()[k] / tau_i0.coords()[k]).fold(f64::INFINITY, f64::min);
    if !(theta > 0.0 && theta < 1.0 - THETA_MARGIN) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    Ok(theta)
}

/// Applies the four replacements for the pair `(s0, i0)`:
///
/// ```text
/// τ(s₀) ← (τ(s₀) − θ τ(i₀)) / (1 − θ)
/// λ(i₀) ← λ(i₀) + 2 γ(s₀) θ (1 − θ) τ̄(s₀)
/// γ(i₀) ← γ(i₀) + γ(s₀) θ²
/// γ(s₀) ← γ(s₀) (1 − θ)²
/// ```
pub fn dam_step(data: &DataSet, s0: usize, i0: usize) -> Result<DataSet> {
    let (Some(ds), Some(bi)) = (data.delta.get(s0), data.base.get(i0)) else {
        return Err(Error::DamPrecondition(format!("pair ({s0}, {i0}) out of range")));
    };
    let theta = compute_theta(&ds.tau, &bi.tau)?;
    let raw: Vec<f64> = ds
        .tau
        .coords()
        .iter()
        .zip(bi.tau.coords())
        .map(|(s, i)| {
            let v = (s - theta * i) / (1.0 - theta);
            if v <= SUPPORT_THRESHOLD {
                0.0
            } else {
                v
            }
        })
        .collect();
    let tau_bar = SimplexPoint::normalized(raw)?;
    let gs = ds.gamma;
    let mut out = data.clone();
    {
        let b = &mut out.base[i0];
        for (l, t) in b.lambda.iter_mut().zip(tau_bar.coords()) {
            *l += 2.0 * gs * theta * (1.0 - theta) * t;
        }
        b.gamma += gs * theta * theta;
    }
    out.delta[s0] = DeltaItem { tau: tau_bar, gamma: gs * (1.0 - theta) * (1.0 - theta) };
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DamStepRecord {
    pub s0: usize,
    pub i0: usize,
    pub theta: f64,
    /// Distance of the rewritten point to the hull of the base points.
    pub hull_distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DamOutcome {
    pub data: DataSet,
    pub steps: Vec<DamStepRecord>,
    /// Steps whose rewritten point came within `1e-9` of the base hull.
    pub hull_flags: usize,
}

/// Default step cap `|ΔI| · |I| · 2ᵖ`.
pub fn default_max_steps(data: &DataSet) -> usize {
    let p = data.dim().min(60) as u32;
    (data.delta.len() * data.base.len()).max(1).saturating_mul(1usize << p)
}

/// Repeats [`dam_step`] on the first violating pair until separation holds.
pub fn run_dam(data: &DataSet, max_steps: Option<usize>) -> Result<DamOutcome> {
    data.validate()?;
    let cap = max_steps.unwrap_or_else(|| default_max_steps(data));
    let mut cur = data.clone();
    let mut steps = Vec::new();
    let mut hull_flags = 0;
    let base_pts: Vec<SimplexPoint> = data.base.iter().map(|b| b.tau.clone()).collect();
    loop {
        match separation_holds(&cur) {
            Separation::Holds => return Ok(DamOutcome { data: cur, steps, hull_flags }),
            Separation::Violated { s0, i0 } => {
                if steps.len() >= cap {
                    return Err(Error::DamStepLimit(cap));
                }
                let theta = compute_theta(&cur.delta[s0].tau, &cur.base[i0].tau)?;
                cur = dam_step(&cur, s0, i0)?;
                let hull_distance = dist_to_hull(&cur.delta[s0].tau, &base_pts)?;
                if hull_distance <= HULL_FLAG_DIST {
                    hull_flags += 1;
                    log::warn!("rewritten point {s0} lies within {hull_distance:e} of the base hull");
                }
                steps.push(DamStepRecord { s0, i0, theta, hull_distance });
            }
        }
    }
}
