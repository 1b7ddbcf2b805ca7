//! Pass/fail summary computed from plain tables, either straight from a run
//! or re-read from an export directory.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunArtifacts;
use crate::concentrate::ConcentrationRow;
use crate::error::{Error, Result};
use crate::schedule::{verify_schedule, ScheduleEntry, ScheduleParams};

/// Run metadata exported as `run.json`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    pub levels_requested: usize,
    pub levels_completed: usize,
    pub theta: f64,
    pub margin_scale: f64,
    pub frostman_d: Option<f64>,
    pub frostman_estimated: Option<bool>,
    pub frostman_c: Option<f64>,
    pub annulus: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodalRecord {
    pub level: usize,
    pub r: f64,
    pub n_vortices: u64,
    pub to_near_zero: Option<f64>,
    pub to_zeros: Option<f64>,
    pub empty_level: bool,
    pub theta_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityRecord {
    pub level: usize,
    pub name: String,
    pub sup: f64,
    pub l2: f64,
    pub spacing: f64,
}

/// Everything the summary depends on.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tables {
    pub info: RunInfo,
    pub schedule: Vec<ScheduleEntry<f64>>,
    pub concentration: Vec<ConcentrationRow<f64>>,
    pub nodal: Vec<NodalRecord>,
    pub identities: Vec<IdentityRecord>,
    /// `(level, class)` of every classified local minimum.
    pub minima: Vec<(usize, String)>,
    /// Annulus masses, or the error that prevented them.
    pub vanishing: Option<std::result::Result<Vec<f64>, String>>,
}

impl Tables {
    pub fn from_run(run: &RunArtifacts) -> Self {
        let nodal = run
            .nodal
            .iter()
            .zip(&run.levels)
            .map(|(row, l)| NodalRecord {
                level: l.level,
                r: row.r,
                n_vortices: row.n_vortices,
                to_near_zero: row.to_near_zero,
                to_zeros: row.to_zeros,
                empty_level: row.empty_level,
                theta_gap: l.theta_gap,
            })
            .collect();
        let identities = run
            .levels
            .iter()
            .flat_map(|l| {
                l.identities.iter().map(move |r| IdentityRecord {
                    level: l.level,
                    name: r.name.clone(),
                    sup: r.sup_residual,
                    l2: r.l2_residual,
                    spacing: r.spacing,
                })
            })
            .collect();
        let minima = run
            .levels
            .iter()
            .flat_map(|l| l.scan.minima.iter().map(move |m| (l.level, m.class.as_str().to_string())))
            .collect();
        Tables {
            info: run.info(),
            schedule: run.schedule.entries.clone(),
            concentration: run.levels.iter().map(|l| l.row).collect(),
            nodal,
            identities,
            minima,
            vanishing: run.vanishing.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: BTreeMap<String, bool>,
    pub all_pass: bool,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl Summary {
    pub fn from_tables(t: &Tables) -> Self {
        let mut checks = BTreeMap::new();
        let rows = &t.concentration;
        let last = rows.last();
        let mut put = |name: &str, ok: bool| {
            checks.insert(name.to_string(), ok);
        };
        put(
            "levels_completed",
            t.info.failure.is_none()
                && t.info.levels_completed == t.info.levels_requested
                && rows.len() == t.info.levels_requested,
        );
        let params = ScheduleParams {
            entries: t.schedule.clone(),
            theta: t.info.theta,
            frostman_d: t.info.frostman_d,
            margin_scale: t.info.margin_scale,
        };
        put("schedule_verified", !t.schedule.is_empty() && verify_schedule(&params).all_ok());
        put("energy_ratio", !rows.is_empty() && rows.iter().all(|r| (0.99..=1.01).contains(&r.energy_ratio)));
        let w1: Vec<f64> = rows.iter().map(|r| r.w1_target).collect();
        put("w1_target_decreasing", !rows.is_empty() && strictly_decreasing(&w1));
        put("w1_diracs_final", last.is_some_and(|r| r.w1_diracs <= 3.0 * r.n_vortices as f64 / r.r.sqrt()));
        if t.info.frostman_d.is_some() {
            let growth: Vec<f64> = rows.iter().map(|r| r.energy_growth).collect();
            put("energy_growth_decreasing", !rows.is_empty() && strictly_decreasing(&growth));
        }
        put("decay_positive", !rows.is_empty() && rows.iter().all(|r| r.decay_c_hat > 0.0));
        put("dichotomy", t.minima.iter().all(|(_, c)| c != "violation"));
        put("nodal_nonempty", !t.nodal.is_empty() && t.nodal.iter().all(|n| !n.empty_level));
        let gaps: Option<Vec<f64>> = t.nodal.iter().map(|n| n.theta_gap).collect();
        put(
            "theta_gap",
            match (gaps, t.nodal.last()) {
                (Some(g), Some(n)) => {
                    strictly_decreasing(&g) && g[g.len() - 1] <= 4.0 * n.n_vortices as f64 / n.r.sqrt()
                }
                _ => false,
            },
        );
        if t.info.annulus {
            put(
                "vanishing_mass",
                match &t.vanishing {
                    Some(Ok(m)) => !m.is_empty() && strictly_decreasing(m) && m[m.len() - 1] <= 1e-3,
                    _ => false,
                },
            );
        }
        let all_pass = checks.values().all(|&b| b);
        Summary { checks, all_pass }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Verifies the manifest of an export directory and recomputes the summary
/// from its data files.
pub fn summarize_dir(dir: &Path) -> Result<Summary> {
    super::verify_manifest(dir)?;
    let tables = super::export::read_tables(dir)?;
    Ok(Summary::from_tables(&tables))
}

pub(crate) fn parse_opt(s: &str, ctx: &str) -> Result<Option<f64>> {
    if s == "none" {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|e| Error::parse(ctx, e))
    }
}
