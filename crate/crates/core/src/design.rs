//! Code-matrix design: the conventional procedure (smallest admissible shift
//! step on a fixed root) and coherence-based generation, which picks the
//! shift step and the roots so that the dictionary coherence stays at `S(1)`.

use serde::{Deserialize, Serialize};

use crate::codebook::{build_code_matrix_families, gcd, CodeMatrix, RootFamily};
use crate::coherence::{family_set_coherence, multi_root_admissible, FamilyShifts};
use crate::config::SystemConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignMethod {
    #[serde(rename = "CRA")]
    Cra,
    /// Conventional design that moves on to root `u + 1` once a root is exhausted.
    #[serde(rename = "CRA_multi")]
    CraMulti,
    #[serde(rename = "CCG_single")]
    CcgSingle,
    #[serde(rename = "CCG_multi")]
    CcgMulti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootUsage {
    pub u: usize,
    pub codes_generated: usize,
    pub n_cs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPlan {
    pub method: DesignMethod,
    /// Shift step of the first root.
    pub n_cs_used: usize,
    pub roots_used: Vec<RootUsage>,
    #[serde(rename = "G_requested")]
    pub g_requested: usize,
    #[serde(rename = "G_delivered")]
    pub g_delivered: usize,
    pub predicted_mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub code_matrix: CodeMatrix,
    pub plan: DesignPlan,
}

impl Design {
    fn from_families(method: DesignMethod, families: Vec<RootFamily>, g_requested: usize, config: &SystemConfig) -> Result<Self> {
        let code_matrix = build_code_matrix_families(&families, config.m)?;
        let shifts: Vec<FamilyShifts> = families
            .iter()
            .map(|f| FamilyShifts::consecutive(f.u, f.n_cs, f.count))
            .collect();
        let predicted_mu = family_set_coherence(&shifts, config)?;
        let roots_used: Vec<RootUsage> = families
            .iter()
            .map(|f| RootUsage { u: f.u, codes_generated: f.count, n_cs: f.n_cs })
            .collect();
        let plan = DesignPlan {
            method,
            n_cs_used: families[0].n_cs,
            g_delivered: roots_used.iter().map(|r| r.codes_generated).sum(),
            roots_used,
            g_requested,
            predicted_mu,
        };
        Ok(Design { code_matrix, plan })
    }

    /// Keep only the first `g` codes, dropping whole roots from the end as needed.
    pub fn truncate(&self, g: usize, config: &SystemConfig) -> Result<Design> {
        if g == 0 || g > self.plan.g_delivered {
            return Err(Error::Capacity { requested: g, delivered: self.plan.g_delivered });
        }
        let mut families = Vec::new();
        let mut left = g;
        for r in &self.plan.roots_used {
            if left == 0 {
                break;
            }
            let count = r.codes_generated.min(left);
            families.push(RootFamily { u: r.u, count, n_cs: r.n_cs });
            left -= count;
        }
        Design::from_families(self.plan.method, families, g, config)
    }
}

/// Smallest `n_cs` with `n_cs >= n_hat` and `n_cs u >= M N1 / N` (at least 1).
pub fn min_ncs_for_root(u: usize, n_hat: usize, config: &SystemConfig) -> Result<usize> {
    if u == 0 {
        return Err(Error::InvalidRoot { u, m: config.m });
    }
    let den = config.n * u;
    let coherence_bound = (config.m * config.n1 + den - 1) / den;
    Ok(n_hat.max(coherence_bound).max(1))
}

fn check_lower_bound(u: usize, n_cs: usize, config: &SystemConfig) -> Result<()> {
    if n_cs * u * config.n < config.m * config.n1 {
        return Err(Error::BoundViolation {
            product: n_cs * u,
            bound: (config.m * config.n1) as f64 / config.n as f64,
        });
    }
    Ok(())
}

/// Largest number of codes on root `u` for which all blocks stay at least
/// `N1` lattice steps apart, `floor(1 + M (N - N1) / (N n_cs u))`, before the
/// `floor(M / n_cs)` limit on distinct shifts is applied.
pub fn max_codes_per_root_unclamped(u: usize, n_cs: usize, config: &SystemConfig) -> Result<usize> {
    check_lower_bound(u, n_cs, config)?;
    Ok(1 + config.m * (config.n - config.n1) / (config.n * n_cs * u))
}

/// [`max_codes_per_root_unclamped`] clamped to the number of distinct shifts.
pub fn max_codes_per_root(u: usize, n_cs: usize, config: &SystemConfig) -> Result<usize> {
    Ok(max_codes_per_root_unclamped(u, n_cs, config)?.min(config.m / n_cs))
}

/// Conventional design: `G` consecutive shifts of root `u` with step `n_hat`.
pub fn design_cra(u: usize, n_hat: usize, g: usize, config: &SystemConfig) -> Result<Design> {
    config.ensure_valid()?;
    let capacity = if n_hat == 0 { 1 } else { config.m / n_hat };
    if g == 0 || g > capacity {
        return Err(Error::Capacity { requested: g, delivered: capacity.min(g) });
    }
    Design::from_families(DesignMethod::Cra, vec![RootFamily { u, count: g, n_cs: n_hat }], g, config)
}

/// Conventional design over several roots: take every shift of root `u`,
/// then continue on `u + 1, u + 2, ...` (skipping roots not coprime to `M`)
/// with the same step until `G` codes exist.
pub fn design_cra_multi(u: usize, n_hat: usize, g: usize, config: &SystemConfig) -> Result<Design> {
    config.ensure_valid()?;
    if n_hat == 0 {
        return Err(Error::InvalidConfig("multi-root conventional design needs n_cs >= 1".into()));
    }
    let per_root = config.m / n_hat;
    let mut families = Vec::new();
    let mut t = 0;
    let mut root = u;
    while t < g {
        if root >= config.m {
            return Err(Error::Capacity { requested: g, delivered: t });
        }
        if gcd(root, config.m) == 1 {
            let count = per_root.min(g - t);
            families.push(RootFamily { u: root, count, n_cs: n_hat });
            t += count;
        }
        root += 1;
    }
    Design::from_families(DesignMethod::CraMulti, families, g, config)
}

/// Coherence-based design for one root: the smallest admissible `n_cs` and as
/// many codes as keep all blocks at least `N1` lattice steps apart.
pub fn design_ccg_single(u: usize, n_hat: usize, config: &SystemConfig) -> Result<Design> {
    config.ensure_valid()?;
    let n_cs = min_ncs_for_root(u, n_hat, config)?;
    let g = max_codes_per_root(u, n_cs, config)?;
    Design::from_families(DesignMethod::CcgSingle, vec![RootFamily { u, count: g, n_cs }], g, config)
}

/// Coherence-based design over roots `u = 1, 2, ...`: a root is used only if
/// its full code set keeps every cross-root correlation at or below `S(1)`.
pub fn design_ccg_multi(g: usize, n_hat: usize, config: &SystemConfig) -> Result<Design> {
    config.ensure_valid()?;
    if g == 0 {
        return Err(Error::Capacity { requested: 0, delivered: 0 });
    }
    let mut families: Vec<RootFamily> = Vec::new();
    let mut accepted: Vec<FamilyShifts> = Vec::new();
    let mut t = 0;
    for u in 1..config.m {
        if t == g {
            break;
        }
        if gcd(u, config.m) != 1 {
            continue;
        }
        let n_cs = min_ncs_for_root(u, n_hat, config)?;
        let g_u = max_codes_per_root(u, n_cs, config)?;
        if g_u == 0 {
            continue;
        }
        let candidate = FamilyShifts::consecutive(u, n_cs, g_u);
        if !multi_root_admissible(&candidate, &accepted, config)?.admissible {
            continue;
        }
        let count = g_u.min(g - t);
        families.push(RootFamily { u, count, n_cs });
        accepted.push(candidate);
        t += count;
    }
    if t < g {
        return Err(Error::Capacity { requested: g, delivered: t });
    }
    Design::from_families(DesignMethod::CcgMulti, families, g, config)
}

/// Check `N1 <= n_cs u N / M <= (N - N1) / (G_u - 1)` for every root of a plan.
pub fn plan_satisfies_spacing(plan: &DesignPlan, config: &SystemConfig) -> bool {
    plan.roots_used.iter().all(|r| {
        let step = (r.n_cs * r.u) as f64 * config.n as f64 / config.m as f64;
        let lower = step >= config.n1 as f64;
        let upper = r.codes_generated <= 1 || step <= (config.n - config.n1) as f64 / (r.codes_generated - 1) as f64;
        lower && upper
    })
}
