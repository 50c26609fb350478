//! The phi atlas: scan once, jump to every node of a destination lattice,
//! rescan, and learn one phi per destination.

use crate::body::AgentBody;
use crate::env::Environment;
use crate::error::{Result, SmcError};
use crate::experiments::report::{Curve, Report};
use crate::experiments::scenes::{rich_environment, AGENT_HOME};
use crate::geom::{RigidDisplacement, Vec2};
use crate::phi::{learn_phi, MatchConfig, PhiFunction};
use crate::rng::stream_rng;
use crate::sensors::scan;
use crate::table::ScanGrid;
use rayon::prelude::*;
use serde::Serialize;

/// Lattice-indexed collection of learned phi functions.
#[derive(Debug, Clone)]
pub struct Atlas {
    /// Destinations in row-major lattice order (x fastest).
    pub destinations: Vec<RigidDisplacement>,
    pub phis: Vec<PhiFunction>,
    pub nodes_per_axis: usize,
}

impl Atlas {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    /// Entry whose destination equals `d` within 1e-9 per axis.
    pub fn find(&self, d: Vec2) -> Option<&PhiFunction> {
        self.destinations
            .iter()
            .position(|c| (c.delta.x - d.x).abs() < 1e-9 && (c.delta.y - d.y).abs() < 1e-9)
            .map(|i| &self.phis[i])
    }

    /// Summary report; the phi pair data itself stays out of the JSON.
    pub fn report(&self, seed: u64, params: AtlasRunParams) -> AtlasReport {
        let curve = Curve {
            name: "pairs_by_destination".into(),
            bins: self
                .destinations
                .iter()
                .map(|d| format!("({:.3},{:.3})", d.delta.x, d.delta.y))
                .collect(),
            values: self.phis.iter().map(|p| p.len() as f64).collect(),
            counts: self.phis.iter().map(|p| p.len()).collect(),
        };
        AtlasReport {
            experiment: "atlas",
            seed,
            params,
            functions: self.len(),
            nodes_per_axis: self.nodes_per_axis,
            curves: vec![curve],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtlasRunParams {
    pub grid: usize,
    pub jump_step: f64,
    pub jump_extent: f64,
    pub sources: usize,
    pub cfg: MatchConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtlasReport {
    pub experiment: &'static str,
    pub seed: u64,
    pub params: AtlasRunParams,
    pub functions: usize,
    pub nodes_per_axis: usize,
    pub curves: Vec<Curve>,
}

impl Report for AtlasReport {
    fn experiment(&self) -> &'static str {
        self.experiment
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn curves(&self) -> &[Curve] {
        &self.curves
    }

    fn summary_lines(&self) -> Vec<String> {
        vec![format!(
            "{} phi functions over a {}x{} destination lattice",
            self.functions, self.nodes_per_axis, self.nodes_per_axis
        )]
    }
}

/// Number of lattice nodes per axis for a destination grid of the given
/// step and extent; errors unless the step divides the extent evenly.
pub fn atlas_nodes_per_axis(jump_step: f64, jump_extent: f64) -> Result<usize> {
    if !(jump_step > 0.0 && jump_extent > 0.0) {
        return Err(SmcError::InvalidConfig(
            "jump step and extent must be positive".into(),
        ));
    }
    let ratio = jump_extent / jump_step;
    if (ratio - ratio.round()).abs() > 1e-9 {
        return Err(SmcError::InvalidConfig(format!(
            "jump step {jump_step} does not divide extent {jump_extent} evenly"
        )));
    }
    Ok(ratio.round() as usize + 1)
}

/// Counting rule for the atlas size: (extent/step + 1)^2.
pub fn atlas_count(jump_step: f64, jump_extent: f64) -> Result<usize> {
    let n = atlas_nodes_per_axis(jump_step, jump_extent)?;
    Ok(n * n)
}

/// Destination lattice in row-major order, centered on the start.
pub fn atlas_destinations(jump_step: f64, jump_extent: f64) -> Result<Vec<RigidDisplacement>> {
    let n = atlas_nodes_per_axis(jump_step, jump_extent)?;
    let half = jump_extent / 2.0;
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            out.push(RigidDisplacement::new(
                -half + ix as f64 * jump_step,
                -half + iy as f64 * jump_step,
            ));
        }
    }
    Ok(out)
}

/// Learn the full atlas against a caller-supplied environment.
pub fn learn_atlas(
    body: &AgentBody,
    env: &Environment,
    grid: ScanGrid,
    jump_step: f64,
    jump_extent: f64,
    cfg: &MatchConfig,
) -> Result<Atlas> {
    let destinations = atlas_destinations(jump_step, jump_extent)?;
    let before = scan(env, body, AGENT_HOME, grid);
    let phis: Vec<PhiFunction> = destinations
        .par_iter()
        .map(|d| {
            let after = scan(env, body, AGENT_HOME + d.delta, grid);
            learn_phi(&before, &after, cfg).expect("same body on both scans")
        })
        .collect();
    Ok(Atlas {
        nodes_per_axis: atlas_nodes_per_axis(jump_step, jump_extent)?,
        destinations,
        phis,
    })
}

/// Outcome of the partial-group-law sweep over an atlas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupLawStats {
    /// Ordered lattice pairs whose composition was nonempty.
    pub nonempty: usize,
    /// Among those, compositions within the threshold of the directly
    /// learned phi for the summed jump.
    pub held: usize,
    /// Compositions whose distance to the direct phi was undefined.
    pub undefined: usize,
    pub max_rho: f64,
}

/// Check the partial group law over every ordered pair of atlas entries:
/// the composition phi_b after phi_a, where nonempty, must stay within the
/// threshold of the phi learned directly for the jump a + b. Entries are
/// grouped by their sum so each direct phi is learned once.
pub fn check_group_law(
    atlas: &Atlas,
    body: &AgentBody,
    env: &Environment,
    grid: ScanGrid,
    cfg: &MatchConfig,
    threshold: f64,
) -> GroupLawStats {
    use std::collections::BTreeMap;
    let n = atlas.len();
    // order-independent integer key for the summed jump
    let quantum = 1e-6;
    let mut by_sum: BTreeMap<(i64, i64), Vec<(usize, usize)>> = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            let sum = atlas.destinations[i].delta + atlas.destinations[j].delta;
            if sum.x.abs() >= 1.0 || sum.y.abs() >= 1.0 {
                continue; // no overlap is possible; composition is empty
            }
            let key = (
                (sum.x / quantum).round() as i64,
                (sum.y / quantum).round() as i64,
            );
            by_sum.entry(key).or_default().push((i, j));
        }
    }
    let before = scan(env, body, AGENT_HOME, grid);
    let sums: Vec<((i64, i64), Vec<(usize, usize)>)> = by_sum.into_iter().collect();
    let results: Vec<GroupLawStats> = sums
        .par_iter()
        .map(|(key, pairs)| {
            let sum = Vec2::new(key.0 as f64 * quantum, key.1 as f64 * quantum);
            let after = scan(env, body, AGENT_HOME + sum, grid);
            let direct = learn_phi(&before, &after, cfg).expect("same body");
            let mut stats = GroupLawStats {
                nonempty: 0,
                held: 0,
                undefined: 0,
                max_rho: 0.0,
            };
            for &(i, j) in pairs {
                let composed =
                    crate::phi::compose_phi(&atlas.phis[j], &atlas.phis[i], cfg.dedup_tol);
                if composed.is_empty() {
                    continue;
                }
                stats.nonempty += 1;
                match crate::phi::phi_distance(&composed, &direct, cfg.dedup_tol) {
                    Some(rho) => {
                        stats.max_rho = stats.max_rho.max(rho);
                        if rho <= threshold {
                            stats.held += 1;
                        }
                    }
                    None => stats.undefined += 1,
                }
            }
            stats
        })
        .collect();
    let mut total = GroupLawStats {
        nonempty: 0,
        held: 0,
        undefined: 0,
        max_rho: 0.0,
    };
    for s in results {
        total.nonempty += s.nonempty;
        total.held += s.held;
        total.undefined += s.undefined;
        total.max_rho = total.max_rho.max(s.max_rho);
    }
    total
}

/// Spec entry point: 200 sources scattered over a 3x3 square centered on
/// the agent's starting field of view, then one phi per jump destination.
pub fn run_phi_atlas(
    body: &AgentBody,
    seed: u64,
    grid: ScanGrid,
    jump_step: f64,
    jump_extent: f64,
    n_sources: usize,
    cfg: &MatchConfig,
) -> Result<Atlas> {
    let mut rng = stream_rng(seed, 1);
    let env = rich_environment(&mut rng, n_sources, 3.0);
    learn_atlas(body, &env, grid, jump_step, jump_extent, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::MatchConfig;

    #[test]
    fn counting_rule() {
        assert_eq!(atlas_count(0.02, 1.8).unwrap(), 8281);
        assert_eq!(atlas_count(0.2, 1.8).unwrap(), 100);
        assert!(atlas_count(0.07, 1.8).is_err());
    }

    #[test]
    fn group_law_holds_exactly_on_a_small_atlas() {
        let body = AgentBody::standard(41);
        let grid = ScanGrid::square(21).unwrap();
        let cfg = MatchConfig::unique_best();
        let mut rng = crate::rng::stream_rng(41, 1);
        let env = rich_environment(&mut rng, 200, 3.0);
        let atlas = learn_atlas(&body, &env, grid, 0.25, 0.5, &cfg).unwrap();
        assert_eq!(atlas.len(), 9);
        let stats = check_group_law(&atlas, &body, &env, grid, &cfg, 0.0);
        assert!(stats.nonempty > 0);
        assert_eq!(stats.undefined, 0);
        assert_eq!(
            stats.held, stats.nonempty,
            "exact lattice compositions must reproduce the direct phi (max rho {})",
            stats.max_rho
        );
    }

    #[test]
    fn small_atlas_has_identity_at_zero() {
        let body = AgentBody::standard(40);
        let grid = ScanGrid::square(21).unwrap();
        let atlas = run_phi_atlas(
            &body,
            40,
            grid,
            0.2,
            0.8,
            200,
            &MatchConfig::unique_best(),
        )
        .unwrap();
        assert_eq!(atlas.len(), 25);
        let zero = atlas.find(Vec2::ZERO).expect("even lattice includes zero");
        assert_eq!(zero.len(), grid.len());
        for pair in &zero.pairs {
            assert_eq!(pair.from, pair.to);
        }
    }
}
