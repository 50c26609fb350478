//! Space as an unchanging medium: after a jump with a possible simultaneous
//! deformation of the scene, the agent asks whether some previously learned
//! phi fully accounts for the sensory change.

use crate::body::AgentBody;
use crate::env::Environment;
use crate::error::{Result, SmcError};
use crate::experiments::atlas::{learn_atlas, Atlas};
use crate::experiments::report::{BinnedMean, Curve, Report};
use crate::experiments::scenes::{
    random_intensities, rich_environment, stretched_circle, AGENT_HOME,
};
use crate::geom::Vec2;
use crate::phi::MatchConfig;
use crate::rng::{stream_rng, trial_rng};
use crate::sensors::scan;
use crate::table::{euclid_dist, within_tol, ScanGrid, SmcTable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Deformations below this fraction count as "unchanged" ground truth; the
/// error threshold is calibrated to call 90% of them unchanged.
pub const UNCHANGED_DEFORMATION: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumParams {
    pub grid: usize,
    pub trials: usize,
    pub calib_trials: usize,
    pub cfg: MatchConfig,
    /// Candidate/jump lattice step; must keep the lattice on the scan grid.
    pub jump_step: f64,
    /// Jumps are drawn from a square of this side length.
    pub jump_extent: f64,
    /// The circle center is drawn from a square of this side length.
    pub circle_box: f64,
    pub atlas_sources: usize,
    /// Maximum deformation: the circle stretches or shrinks along x by up
    /// to this fraction.
    pub max_deformation: f64,
    /// Fraction of main trials drawn inside the sub-threshold deformation
    /// band so the calibration rate can be verified from the report.
    pub calibration_band_share: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MediumTrial {
    pub trial: u64,
    pub jump: [f64; 2],
    pub jump_linf: f64,
    /// Signed deformation: the stretch factor is 1 + deformation.
    pub deformation: f64,
    pub epsilon: Option<f64>,
    /// Lattice displacement of the best-fitting candidate phi.
    pub best_candidate: [f64; 2],
    pub decision_unchanged: bool,
    pub truth_unchanged: bool,
    pub correct: bool,
    /// Raw photoreceptor distance from the original scan to the
    /// deformed-after-jump scan, and to the counterfactual undeformed one.
    pub raw_dist_deformed: f64,
    pub raw_dist_undeformed: f64,
    /// True when the deformed view is the closer of the two.
    pub deformed_view_closer: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MediumReport {
    pub experiment: &'static str,
    pub seed: u64,
    pub params: MediumParams,
    pub candidates: usize,
    pub epsilon_threshold: f64,
    pub calib_trials_undefined: usize,
    pub trials: Vec<MediumTrial>,
    pub curves: Vec<Curve>,
    /// Among truth-changed trials, the fraction whose deformed view sits
    /// closer to the original than the undeformed counterfactual.
    pub confound_fraction: f64,
    /// Accuracy among the confounded trials.
    pub confound_accuracy: f64,
}

impl Report for MediumReport {
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
        let mut lines = vec![
            format!(
                "epsilon threshold = {:.6} over {} candidate phis",
                self.epsilon_threshold, self.candidates
            ),
            format!(
                "visual confound: deformed view closer in {:.3} of changed trials; accuracy there {:.3}",
                self.confound_fraction, self.confound_accuracy
            ),
        ];
        for c in &self.curves {
            let parts: Vec<String> = c
                .bins
                .iter()
                .zip(&c.values)
                .map(|(b, v)| format!("{b}={v:.3}"))
                .collect();
            lines.push(format!("{}: {}", c.name, parts.join(" ")));
        }
        lines
    }
}

/// Node lookup by proprioception vector, within the dedup tolerance. The
/// scan grid's p rows are injective beyond that tolerance, so lookups
/// resolve to at most a couple of nodes.
struct NodeIndex<'a> {
    table: &'a SmcTable,
    tol: f64,
    cells: HashMap<[i64; 2], Vec<u32>>,
}

impl<'a> NodeIndex<'a> {
    fn build(table: &'a SmcTable, tol: f64) -> NodeIndex<'a> {
        let mut cells: HashMap<[i64; 2], Vec<u32>> = HashMap::new();
        for k in 0..table.len() {
            let key = Self::key(table.p_row(k), tol);
            cells.entry(key).or_default().push(k as u32);
        }
        NodeIndex { table, tol, cells }
    }

    fn key(p: &[f64], tol: f64) -> [i64; 2] {
        [
            (p[0] / tol).floor() as i64,
            if p.len() > 1 {
                (p[1] / tol).floor() as i64
            } else {
                0
            },
        ]
    }

    fn lookup(&self, p: &[f64]) -> Vec<u32> {
        let key = Self::key(p, self.tol);
        let mut out = Vec::new();
        for d0 in -1..=1 {
            for d1 in -1..=1 {
                if let Some(ids) = self.cells.get(&[key[0] + d0, key[1] + d1]) {
                    for &k in ids {
                        if within_tol(p, self.table.p_row(k as usize), self.tol) {
                            out.push(k);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Fit error of one candidate phi: the sum over its pairs of the Euclidean
/// photoreceptor distance between the before-sample at the pair's domain
/// and the after-sample at the pair's image. None when the phi touches no
/// sample of either table.
#[cfg(test)]
fn epsilon(
    phi: &crate::phi::PhiFunction,
    before: &SmcTable,
    after: &SmcTable,
    index: &NodeIndex<'_>,
) -> Option<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for pair in &phi.pairs {
        for &k in &index.lookup(pair.from.as_slice()) {
            for &kp in &index.lookup(pair.to.as_slice()) {
                total += euclid_dist(before.s_row(k as usize), after.s_row(kp as usize));
                n += 1;
            }
        }
    }
    if n == 0 {
        None
    } else {
        Some(total)
    }
}

/// A candidate phi with its pairs resolved to scan-node indices. Every scan
/// of a run shares the same proprioception rows, so the resolution is done
/// once and trials only sum photoreceptor distances.
struct IndexedPhi {
    pairs: Vec<(u32, u32)>,
}

fn index_atlas(atlas: &Atlas, index: &NodeIndex<'_>) -> Vec<IndexedPhi> {
    atlas
        .phis
        .iter()
        .map(|phi| {
            let mut pairs = Vec::with_capacity(phi.len());
            for pair in &phi.pairs {
                for &k in &index.lookup(pair.from.as_slice()) {
                    for &kp in &index.lookup(pair.to.as_slice()) {
                        pairs.push((k, kp));
                    }
                }
            }
            IndexedPhi { pairs }
        })
        .collect()
}

fn epsilon_indexed(phi: &IndexedPhi, before: &SmcTable, after: &SmcTable) -> Option<f64> {
    if phi.pairs.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for &(k, kp) in &phi.pairs {
        total += euclid_dist(before.s_row(k as usize), after.s_row(kp as usize));
    }
    Some(total)
}

/// Best fit over the candidate set: smallest epsilon, ties to the earlier
/// lattice index. None when no candidate matches anything.
fn best_fit_indexed(
    candidates: &[IndexedPhi],
    before: &SmcTable,
    after: &SmcTable,
) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, phi) in candidates.iter().enumerate() {
        if let Some(e) = epsilon_indexed(phi, before, after) {
            match best {
                Some((be, bi)) if (e, i) >= (be, bi) => {}
                _ => best = Some((e, i)),
            }
        }
    }
    best.map(|(e, i)| (i, e))
}

/// Reference implementation of the candidate search used to cross-check the
/// indexed fast path.
#[cfg(test)]
fn best_fit(
    atlas: &Atlas,
    before: &SmcTable,
    after: &SmcTable,
    index: &NodeIndex<'_>,
) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, phi) in atlas.phis.iter().enumerate() {
        if let Some(e) = epsilon(phi, before, after, index) {
            match best {
                Some((be, bi)) if (e, i) >= (be, bi) => {}
                _ => best = Some((e, i)),
            }
        }
    }
    best.map(|(e, i)| (i, e))
}

struct TrialOutcome {
    jump: Vec2,
    deformation: f64,
    epsilon: Option<f64>,
    best: Vec2,
    raw_deformed: f64,
    raw_undeformed: f64,
}

#[allow(clippy::too_many_arguments)]
fn medium_trial(
    body: &AgentBody,
    grid: ScanGrid,
    params: &MediumParams,
    atlas: &Atlas,
    candidates: &[IndexedPhi],
    rng: &mut ChaCha8Rng,
    deformation: f64,
) -> TrialOutcome {
    let half_box = params.circle_box / 2.0;
    let c = Vec2::new(
        rng.gen_range(-half_box..half_box),
        rng.gen_range(-half_box..half_box),
    );
    let intensities = random_intensities(rng, 40);
    // jump to a lattice point from which the whole (possibly stretched)
    // circle stays in view
    let visible = 0.5 - 0.1 * (1.0 + params.max_deformation);
    let jump = loop {
        let i = rng.gen_range(0..atlas.destinations.len());
        let d = atlas.destinations[i].delta;
        if (c.x - d.x).abs() <= visible && (c.y - d.y).abs() <= visible {
            break d;
        }
    };
    let original = stretched_circle(c, 1.0, &intensities);
    let deformed = stretched_circle(c, 1.0 + deformation, &intensities);
    let before = scan(&original, body, AGENT_HOME, grid);
    let after = scan(&deformed, body, AGENT_HOME + jump, grid);
    let counterfactual = scan(&original, body, AGENT_HOME + jump, grid);

    let fit = best_fit_indexed(candidates, &before, &after);
    let (eps, best) = match fit {
        Some((i, e)) => (Some(e), atlas.destinations[i].delta),
        None => (None, Vec2::ZERO),
    };
    let mut raw_deformed = 0.0;
    let mut raw_undeformed = 0.0;
    for k in 0..before.len() {
        raw_deformed += euclid_dist(before.s_row(k), after.s_row(k));
        raw_undeformed += euclid_dist(before.s_row(k), counterfactual.s_row(k));
    }
    TrialOutcome {
        jump,
        deformation,
        epsilon: eps,
        best,
        raw_deformed,
        raw_undeformed,
    }
}

pub fn run_unchanging_medium(
    body: &AgentBody,
    seed: u64,
    params: &MediumParams,
) -> Result<MediumReport> {
    let grid = ScanGrid::square(params.grid)?;
    let h = grid.step_x(&body.retina_range);
    if ((params.jump_step / h) - (params.jump_step / h).round()).abs() > 1e-9 {
        return Err(SmcError::InvalidConfig(format!(
            "medium jump step {} must sit on the scan lattice (step {h})",
            params.jump_step
        )));
    }
    // candidate phis learned beforehand over a rich environment
    let mut env_rng = stream_rng(seed, 1);
    let rich = rich_environment(&mut env_rng, params.atlas_sources, 3.0);
    let atlas = learn_atlas(
        body,
        &rich,
        grid,
        params.jump_step,
        params.jump_extent,
        &params.cfg,
    )?;

    // proprioception rows depend only on the body and grid, so the phi
    // pairs resolve to node indices once for the whole run
    let p_table = scan(&Environment::empty(), body, AGENT_HOME, grid);
    let index = NodeIndex::build(&p_table, params.cfg.dedup_tol);
    let candidates = index_atlas(&atlas, &index);

    // calibration: deformations inside the unchanged band
    let calib: Vec<Option<f64>> = (0..params.calib_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let u = rng.gen_range(-UNCHANGED_DEFORMATION..UNCHANGED_DEFORMATION);
            let out = medium_trial(body, grid, params, &atlas, &candidates, &mut rng, u);
            out.epsilon
        })
        .collect();
    let undefined = calib.iter().filter(|e| e.is_none()).count();
    if undefined * 2 > params.calib_trials {
        return Err(SmcError::CalibrationFailed {
            undefined,
            total: params.calib_trials,
        });
    }
    let mut values: Vec<f64> = calib.into_iter().flatten().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((0.9 * values.len() as f64).ceil() as usize)
        .saturating_sub(1)
        .min(values.len() - 1);
    let threshold = values[idx];

    let base = params.calib_trials as u64;
    let trials: Vec<MediumTrial> = (0..params.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, base + t);
            let u = if rng.gen_range(0.0..1.0) < params.calibration_band_share {
                rng.gen_range(-UNCHANGED_DEFORMATION..UNCHANGED_DEFORMATION)
            } else {
                rng.gen_range(-params.max_deformation..params.max_deformation)
            };
            let out = medium_trial(body, grid, params, &atlas, &candidates, &mut rng, u);
            let decision_unchanged = out.epsilon.map_or(false, |e| e <= threshold);
            let truth_unchanged = out.deformation.abs() < UNCHANGED_DEFORMATION;
            MediumTrial {
                trial: t,
                jump: [out.jump.x, out.jump.y],
                jump_linf: out.jump.linf(),
                deformation: out.deformation,
                epsilon: out.epsilon,
                best_candidate: [out.best.x, out.best.y],
                decision_unchanged,
                truth_unchanged,
                correct: decision_unchanged == truth_unchanged,
                raw_dist_deformed: out.raw_deformed,
                raw_dist_undeformed: out.raw_undeformed,
                deformed_view_closer: out.raw_deformed < out.raw_undeformed,
            }
        })
        .collect();

    let curves = build_curves(&trials, params);
    let changed: Vec<&MediumTrial> = trials.iter().filter(|t| !t.truth_unchanged).collect();
    let confounded: Vec<&&MediumTrial> = changed
        .iter()
        .filter(|t| t.deformed_view_closer)
        .collect();
    let confound_fraction = if changed.is_empty() {
        0.0
    } else {
        confounded.len() as f64 / changed.len() as f64
    };
    let confound_accuracy = if confounded.is_empty() {
        0.0
    } else {
        confounded.iter().filter(|t| t.correct).count() as f64 / confounded.len() as f64
    };

    Ok(MediumReport {
        experiment: "medium",
        seed,
        params: *params,
        candidates: atlas.len(),
        epsilon_threshold: threshold,
        calib_trials_undefined: undefined,
        trials,
        curves,
        confound_fraction,
        confound_accuracy,
    })
}

const DEFORMATION_EDGES: [f64; 7] = [0.005, 0.01, 0.05, 0.1, 0.2, 0.35, 0.5];
const DEFORMATION_LABELS: [&str; 7] = [
    "<0.5%", "0.5-1%", "1-5%", "5-10%", "10-20%", "20-35%", "35-50%",
];

fn deformation_bin(u: f64) -> usize {
    let a = u.abs();
    DEFORMATION_EDGES
        .iter()
        .position(|&e| a < e)
        .unwrap_or(DEFORMATION_EDGES.len() - 1)
}

fn build_curves(trials: &[MediumTrial], params: &MediumParams) -> Vec<Curve> {
    let labels: Vec<String> = DEFORMATION_LABELS.iter().map(|s| s.to_string()).collect();
    let mut acc = BinnedMean::new("accuracy_by_deformation", labels.clone());
    let mut unchanged = BinnedMean::new("unchanged_rate_by_deformation", labels);
    let jump_edges = [0.1, 0.2, params.jump_extent / 2.0 + 1e-9];
    let jump_labels: Vec<String> = vec!["<0.1".into(), "0.1-0.2".into(), "0.2-0.3".into()];
    let mut by_jump = BinnedMean::new("accuracy_by_jump", jump_labels);
    for t in trials {
        let b = deformation_bin(t.deformation);
        acc.add(b, if t.correct { 1.0 } else { 0.0 });
        unchanged.add(b, if t.decision_unchanged { 1.0 } else { 0.0 });
        let jb = jump_edges
            .iter()
            .position(|&e| t.jump_linf < e)
            .unwrap_or(jump_edges.len() - 1);
        by_jump.add(jb, if t.correct { 1.0 } else { 0.0 });
    }
    vec![acc.finish(), unchanged.finish(), by_jump.finish()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scenes::ObjectShape;

    #[test]
    fn zero_jump_zero_deformation_fits_the_identity_exactly() {
        let body = AgentBody::standard(3);
        let grid = ScanGrid::square(21).unwrap();
        let cfg = MatchConfig::unique_best();
        let mut rng = stream_rng(3, 1);
        let rich = rich_environment(&mut rng, 200, 3.0);
        let atlas = learn_atlas(&body, &rich, grid, 0.2, 0.4, &cfg).unwrap();
        let p_table = scan(&Environment::empty(), &body, AGENT_HOME, grid);
        let index = NodeIndex::build(&p_table, cfg.dedup_tol);

        let intensities = vec![1.0; 40];
        let circle = ObjectShape::Circle.environment(Vec2::new(0.05, -0.1), &intensities);
        let before = scan(&circle, &body, AGENT_HOME, grid);
        let after = scan(&circle, &body, AGENT_HOME, grid);
        let (i, eps) = best_fit(&atlas, &before, &after, &index).unwrap();
        assert_eq!(atlas.destinations[i].delta, Vec2::ZERO);
        assert_eq!(eps, 0.0);
        // the indexed fast path agrees with the reference search
        let candidates = index_atlas(&atlas, &index);
        let (fi, feps) = best_fit_indexed(&candidates, &before, &after).unwrap();
        assert_eq!((fi, feps), (i, eps));
    }

    #[test]
    fn smoke_run_is_deterministic_and_consistent() {
        let body = AgentBody::standard(11);
        let params = MediumParams {
            grid: 21,
            trials: 12,
            calib_trials: 20,
            cfg: MatchConfig::unique_best(),
            jump_step: 0.2,
            jump_extent: 0.6,
            circle_box: 0.4,
            atlas_sources: 200,
            max_deformation: 0.5,
            calibration_band_share: 0.3,
        };
        let a = run_unchanging_medium(&body, 11, &params).unwrap();
        let b = run_unchanging_medium(&body, 11, &params).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.trials.len(), params.trials);
        for t in &a.trials {
            let expect = t.epsilon.map_or(false, |e| e <= a.epsilon_threshold);
            assert_eq!(t.decision_unchanged, expect);
        }
        assert_eq!(a.curves[0].total_count(), params.trials);
    }
}
