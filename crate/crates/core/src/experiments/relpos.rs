//! Relative position: paths made of several segments are associated with a
//! single-segment reference displacement whenever their composed phi matches
//! the reference phi, independently of the path taken.

use crate::body::AgentBody;
use crate::env::Environment;
use crate::error::Result;
use crate::experiments::report::{BinnedMean, Curve, Report};
use crate::experiments::rigid::circle_calibration;
use crate::experiments::scenes::{rich_environment, AGENT_HOME};
use crate::geom::Vec2;
use crate::phi::{compose_phi, learn_phi, phi_distance, MatchConfig, PhiFunction, PhiThreshold};
use crate::rng::{stream_rng, trial_rng};
use crate::sensors::scan;
use crate::table::{ScanGrid, SmcTable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Reference destination relative to the start.
pub const REFERENCE_DESTINATION: Vec2 = Vec2 { x: 0.6, y: 0.6 };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelposParams {
    pub grid: usize,
    /// Trials per segment count.
    pub trials: usize,
    pub calib_trials: usize,
    pub cfg: MatchConfig,
    pub segment_counts: Vec<usize>,
    /// Final points sit on the diagonal line through the reference
    /// destination, offset by at most this distance.
    pub offset_range: f64,
    /// Intermediate points are drawn from a square of this side length.
    pub intermediate_box: f64,
    pub sources: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelposTrial {
    pub trial: u64,
    pub n_segments: usize,
    /// Signed distance of the destination from the reference destination
    /// along the diagonal line.
    pub offset: f64,
    pub rho: Option<f64>,
    pub empty_composition: bool,
    pub decision_same: bool,
    pub truth_same: bool,
    pub correct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelposReport {
    pub experiment: &'static str,
    pub seed: u64,
    pub params: RelposParams,
    pub threshold: PhiThreshold,
    pub trials: Vec<RelposTrial>,
    pub curves: Vec<Curve>,
}

impl Report for RelposReport {
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
        let mut lines = vec![format!(
            "threshold rho = {:.6} (shared with the displacement association test)",
            self.threshold.value
        )];
        for c in &self.curves {
            if let Some(zero) = c.value_for("0.000") {
                lines.push(format!("{}: assoc {:.3} at zero offset", c.name, zero));
            }
        }
        lines
    }
}

/// Uniform lattice point of step `h` within [-half, half] per axis.
fn lattice_point(rng: &mut ChaCha8Rng, half: f64, h: f64) -> Vec2 {
    let m = (half / h).floor() as i64;
    let ix = rng.gen_range(-m..=m);
    let iy = rng.gen_range(-m..=m);
    Vec2::new(ix as f64 * h, iy as f64 * h)
}

fn scan_at(env: &Environment, body: &AgentBody, z: Vec2, grid: ScanGrid) -> SmcTable {
    scan(env, body, AGENT_HOME + z, grid)
}

pub fn run_relative_position(
    body: &AgentBody,
    seed: u64,
    params: &RelposParams,
) -> Result<RelposReport> {
    let grid = ScanGrid::square(params.grid)?;
    let h = grid.step_x(&body.retina_range);
    // same threshold as the sensible-rigid-displacement test
    let threshold = circle_calibration(body, seed, grid, params.cfg, params.calib_trials)?;

    // one reference phi for the whole run
    let mut ref_rng = stream_rng(seed, 1);
    let ref_env = rich_environment(&mut ref_rng, params.sources, 3.0);
    let before = scan_at(&ref_env, body, Vec2::ZERO, grid);
    let after = scan_at(&ref_env, body, REFERENCE_DESTINATION, grid);
    let phi_ref = learn_phi(&before, &after, &params.cfg).expect("same body");

    let max_step = (params.offset_range / (h * std::f64::consts::SQRT_2)).floor() as i64;
    let base = params.calib_trials as u64;
    let mut all_trials = Vec::new();
    for (ci, &n_segments) in params.segment_counts.iter().enumerate() {
        let count_base = base + (ci * params.trials) as u64;
        let trials: Vec<RelposTrial> = (0..params.trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, count_base + t);
                run_trial(
                    body,
                    grid,
                    h,
                    params,
                    &phi_ref,
                    threshold.value,
                    n_segments,
                    max_step,
                    count_base + t - base,
                    &mut rng,
                )
            })
            .collect();
        all_trials.extend(trials);
    }

    let curves = build_curves(&all_trials, params, h, max_step);
    Ok(RelposReport {
        experiment: "relpos",
        seed,
        params: params.clone(),
        threshold,
        trials: all_trials,
        curves,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    body: &AgentBody,
    grid: ScanGrid,
    h: f64,
    params: &RelposParams,
    phi_ref: &PhiFunction,
    threshold: f64,
    n_segments: usize,
    max_step: i64,
    trial: u64,
    rng: &mut ChaCha8Rng,
) -> RelposTrial {
    // fresh environment for every path presentation
    let env = rich_environment(rng, params.sources, 3.0);
    // destination on the diagonal line through the reference destination
    let m: i64 = if rng.gen_range(0.0..1.0) < 0.5 {
        0
    } else {
        rng.gen_range(-max_step..=max_step)
    };
    let destination = Vec2::new(
        REFERENCE_DESTINATION.x + m as f64 * h,
        REFERENCE_DESTINATION.y + m as f64 * h,
    );
    let offset = m as f64 * h * std::f64::consts::SQRT_2;

    // waypoints: start, n-1 intermediate lattice points, destination
    let mut points = vec![Vec2::ZERO];
    for _ in 0..n_segments - 1 {
        points.push(lattice_point(rng, params.intermediate_box / 2.0, h));
    }
    points.push(destination);

    // scan along the path and learn one phi per segment
    let mut prev = scan_at(&env, body, points[0], grid);
    let mut composed: Option<PhiFunction> = None;
    for w in points.windows(2) {
        let next = scan_at(&env, body, w[1], grid);
        let phi = learn_phi(&prev, &next, &params.cfg).expect("same body");
        composed = Some(match composed {
            None => phi,
            Some(acc) => compose_phi(&phi, &acc, params.cfg.dedup_tol),
        });
        prev = next;
    }
    let composed = composed.expect("at least one segment");
    let empty = composed.is_empty();
    let rho = phi_distance(phi_ref, &composed, params.cfg.dedup_tol);
    let decision_same = rho.map_or(false, |r| r <= threshold);
    let truth_same = m == 0;
    RelposTrial {
        trial,
        n_segments,
        offset,
        rho,
        empty_composition: empty,
        decision_same,
        truth_same,
        correct: decision_same == truth_same,
    }
}

fn build_curves(
    trials: &[RelposTrial],
    params: &RelposParams,
    h: f64,
    max_step: i64,
) -> Vec<Curve> {
    let bins: Vec<String> = (0..=max_step)
        .map(|m| format!("{:.3}", m as f64 * h * std::f64::consts::SQRT_2))
        .collect();
    let mut curves = Vec::new();
    for &sc in &params.segment_counts {
        let mut assoc = BinnedMean::new(&format!("assoc_by_offset_{sc}seg"), bins.clone());
        for t in trials.iter().filter(|t| t.n_segments == sc) {
            let bin = ((t.offset.abs() / (h * std::f64::consts::SQRT_2)).round() as usize)
                .min(bins.len() - 1);
            assoc.add(bin, if t.decision_same { 1.0 } else { 0.0 });
        }
        curves.push(assoc.finish());
    }
    curves
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_two_segment_path_composes_to_the_reference() {
        let body = AgentBody::standard(21);
        let grid = ScanGrid::square(26).unwrap();
        let h = grid.step_x(&body.retina_range); // 0.04; 0.6 = 15 h
        let cfg = MatchConfig::unique_best();
        let mut rng = stream_rng(21, 1);
        let env = rich_environment(&mut rng, 200, 3.0);
        let before = scan_at(&env, &body, Vec2::ZERO, grid);
        let after = scan_at(&env, &body, REFERENCE_DESTINATION, grid);
        let phi_ref = learn_phi(&before, &after, &cfg).unwrap();

        let env2 = rich_environment(&mut rng, 200, 3.0);
        let mid = Vec2::new(10.0 * h, -3.0 * h);
        let s0 = scan_at(&env2, &body, Vec2::ZERO, grid);
        let s1 = scan_at(&env2, &body, mid, grid);
        let s2 = scan_at(&env2, &body, REFERENCE_DESTINATION, grid);
        let phi1 = learn_phi(&s0, &s1, &cfg).unwrap();
        let phi2 = learn_phi(&s1, &s2, &cfg).unwrap();
        let composed = compose_phi(&phi2, &phi1, cfg.dedup_tol);
        assert!(!composed.is_empty());
        let rho = phi_distance(&phi_ref, &composed, cfg.dedup_tol).unwrap();
        assert_eq!(rho, 0.0, "exact lattice path must reproduce the reference");
    }
}
