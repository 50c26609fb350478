//! Displacement association: the same physical displacement presented with
//! different objects and positions must map to the same phi, while
//! displacements differing by up to 0.1 per axis must separate.

use crate::body::AgentBody;
use crate::env::{displace_environment, Environment};
use crate::error::Result;
use crate::experiments::report::{BinnedMean, Curve, Report};
use crate::experiments::scenes::{random_intensities, snap_vec, ObjectShape, AGENT_HOME};
use crate::geom::{RigidDisplacement, Vec2};
use crate::phi::{
    calibrate_threshold, learn_phi, phi_distance, CalibrationScenes, CalibrationSetup,
    MatchConfig, PhiThreshold, CALIBRATION_PERTURBATION,
};
use crate::rng::trial_rng;
use crate::sensors::scan;
use crate::table::ScanGrid;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Object centers and displacement endpoints live in this square (side
/// length), centered on the agent's field of view.
const POSITION_BOX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidParams {
    pub grid: usize,
    /// Total association trials; shapes rotate round-robin.
    pub trials: usize,
    pub calib_trials: usize,
    pub cfg: MatchConfig,
    /// Per-axis cap on the test-vs-reference displacement difference.
    pub max_diff: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidTrial {
    pub trial: u64,
    pub shape: &'static str,
    pub d_ref: [f64; 2],
    pub d_test: [f64; 2],
    /// Max-axis difference between test and reference displacements.
    pub diff: f64,
    pub rho: Option<f64>,
    pub decision_same: bool,
    pub truth_same: bool,
    pub correct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidReport {
    pub experiment: &'static str,
    pub seed: u64,
    pub params: RigidParams,
    pub threshold: PhiThreshold,
    pub trials: Vec<RigidTrial>,
    pub curves: Vec<Curve>,
}

impl Report for RigidReport {
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
            "threshold rho = {:.6} ({} calibration trials, {} undefined)",
            self.threshold.value,
            self.threshold.calibration.n_trials,
            self.threshold.calibration.n_undefined
        )];
        for c in &self.curves {
            if let (Some(first), Some(last)) = (c.values.first(), c.values.last()) {
                lines.push(format!(
                    "{}: assoc {:.3} at zero diff, {:.3} at max diff",
                    c.name, first, last
                ));
            }
        }
        lines
    }
}

struct CircleScenes {
    h: f64,
}

impl CircleScenes {
    fn circle(&self, rng: &mut ChaCha8Rng) -> (Vec2, Environment) {
        let half = POSITION_BOX / 2.0;
        let c = Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        let intensities = random_intensities(rng, ObjectShape::Circle.n_lights());
        (c, ObjectShape::Circle.environment(c, &intensities))
    }
}

impl CalibrationScenes for CircleScenes {
    fn reference(&self, rng: &mut ChaCha8Rng) -> (Environment, RigidDisplacement) {
        let half = POSITION_BOX / 2.0;
        let (c0, env) = self.circle(rng);
        let c1 = Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
        (env, RigidDisplacement { delta: c1 - c0 })
    }

    fn test(&self, rng: &mut ChaCha8Rng, d: RigidDisplacement) -> Environment {
        let c0 = sample_start_for(rng, d.delta, POSITION_BOX, self.h);
        let intensities = random_intensities(rng, ObjectShape::Circle.n_lights());
        ObjectShape::Circle.environment(c0, &intensities)
    }
}

/// Start position such that both endpoints of the displacement stay inside
/// the position box; the box is padded by one lattice step so snapped
/// displacements at the box diagonal remain feasible.
fn sample_start_for(rng: &mut ChaCha8Rng, d: Vec2, bbox: f64, h: f64) -> Vec2 {
    let half = bbox / 2.0 + h / 2.0;
    let lo_x = (-half).max(-half - d.x);
    let hi_x = half.min(half - d.x);
    let lo_y = (-half).max(-half - d.y);
    let hi_y = half.min(half - d.y);
    let ux: f64 = rng.gen_range(0.0..1.0);
    let uy: f64 = rng.gen_range(0.0..1.0);
    Vec2::new(
        lo_x + ux * (hi_x - lo_x).max(0.0),
        lo_y + uy * (hi_y - lo_y).max(0.0),
    )
}

/// Threshold calibration with circle-object scenes and lattice-snapped
/// displacements; shared verbatim by the relative-position experiment.
pub fn circle_calibration(
    body: &AgentBody,
    seed: u64,
    grid: ScanGrid,
    cfg: MatchConfig,
    n_trials: usize,
) -> Result<PhiThreshold> {
    let h = grid.step_x(&body.retina_range);
    let scenes = CircleScenes { h };
    let setup = CalibrationSetup {
        body,
        grid,
        agent_pos: AGENT_HOME,
        cfg,
        snap_step: Some(h),
        seed,
        trial_base: 0,
    };
    calibrate_threshold(&setup, &scenes, n_trials)
}

pub fn run_rigid_displacement(
    body: &AgentBody,
    seed: u64,
    params: &RigidParams,
) -> Result<RigidReport> {
    let grid = ScanGrid::square(params.grid)?;
    let h = grid.step_x(&body.retina_range);
    let threshold = circle_calibration(body, seed, grid, params.cfg, params.calib_trials)?;

    let shapes = ObjectShape::all();
    let base = params.calib_trials as u64;
    let trials: Vec<RigidTrial> = (0..params.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, base + t);
            let shape = shapes[(t % 4) as usize];
            run_trial(body, grid, h, params, shape, t, &mut rng, threshold.value)
        })
        .collect();

    let curves = build_curves(&trials, params.max_diff, h);
    Ok(RigidReport {
        experiment: "rigid",
        seed,
        params: *params,
        threshold,
        trials,
        curves,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    body: &AgentBody,
    grid: ScanGrid,
    h: f64,
    params: &RigidParams,
    shape: ObjectShape,
    t: u64,
    rng: &mut ChaCha8Rng,
    threshold: f64,
) -> RigidTrial {
    let half = POSITION_BOX / 2.0;
    // reference presentation: a circle displaced as a whole
    let c0 = Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
    let ref_int = random_intensities(rng, ObjectShape::Circle.n_lights());
    let ref_env = ObjectShape::Circle.environment(c0, &ref_int);
    let c1 = Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
    let d_ref = RigidDisplacement {
        delta: snap_vec(c1 - c0, h),
    };
    let before = scan(&ref_env, body, AGENT_HOME, grid);
    let after = scan(
        &displace_environment(&ref_env, d_ref),
        body,
        AGENT_HOME,
        grid,
    );
    let phi_ref = learn_phi(&before, &after, &params.cfg).expect("same body");

    // test presentation: another object, displacement differing by at most
    // max_diff per axis; half of the trials repeat the displacement exactly
    let diff = if rng.gen_range(0.0..1.0) < 0.5 {
        Vec2::ZERO
    } else {
        snap_vec(
            Vec2::new(
                rng.gen_range(-params.max_diff..params.max_diff),
                rng.gen_range(-params.max_diff..params.max_diff),
            ),
            h,
        )
    };
    let d_test = RigidDisplacement {
        delta: d_ref.delta + diff,
    };
    let c0t = sample_start_for(rng, d_test.delta, POSITION_BOX, h);
    let test_int = random_intensities(rng, shape.n_lights());
    let test_env = shape.environment(c0t, &test_int);
    let before_t = scan(&test_env, body, AGENT_HOME, grid);
    let after_t = scan(
        &displace_environment(&test_env, d_test),
        body,
        AGENT_HOME,
        grid,
    );
    let phi_test = learn_phi(&before_t, &after_t, &params.cfg).expect("same body");

    let rho = phi_distance(&phi_ref, &phi_test, params.cfg.dedup_tol);
    let decision_same = rho.map_or(false, |r| r <= threshold);
    let diff_linf = diff.linf();
    let truth_same = diff_linf < CALIBRATION_PERTURBATION;
    RigidTrial {
        trial: t,
        shape: shape.name(),
        d_ref: [d_ref.delta.x, d_ref.delta.y],
        d_test: [d_test.delta.x, d_test.delta.y],
        diff: diff_linf,
        rho,
        decision_same,
        truth_same,
        correct: decision_same == truth_same,
    }
}

fn diff_bins(max_diff: f64, h: f64) -> Vec<String> {
    let n = (max_diff / h).round() as usize;
    (0..=n).map(|i| format!("{:.3}", i as f64 * h)).collect()
}

fn build_curves(trials: &[RigidTrial], max_diff: f64, h: f64) -> Vec<Curve> {
    let bins = diff_bins(max_diff, h);
    let mut all = BinnedMean::new("assoc_by_diff", bins.clone());
    let mut per_shape: Vec<BinnedMean> = ObjectShape::all()
        .iter()
        .map(|s| BinnedMean::new(&format!("assoc_by_diff_{}", s.name()), bins.clone()))
        .collect();
    let mut accuracy = BinnedMean::new("accuracy_by_diff", bins.clone());
    for tr in trials {
        let bin = ((tr.diff / h).round() as usize).min(bins.len() - 1);
        let assoc = if tr.decision_same { 1.0 } else { 0.0 };
        all.add(bin, assoc);
        accuracy.add(bin, if tr.correct { 1.0 } else { 0.0 });
        let si = ObjectShape::all()
            .iter()
            .position(|s| s.name() == tr.shape)
            .unwrap();
        per_shape[si].add(bin, assoc);
    }
    let mut curves = vec![all.finish()];
    curves.extend(per_shape.into_iter().map(BinnedMean::finish));
    curves.push(accuracy.finish());
    curves
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_params() -> RigidParams {
        RigidParams {
            grid: 31,
            trials: 8,
            calib_trials: 20,
            cfg: MatchConfig::unique_best(),
            max_diff: 0.1,
        }
    }

    #[test]
    fn identical_displacement_same_shape_is_associated() {
        // the degenerate sanity case: test == reference scene and jump
        let body = AgentBody::standard(9);
        let grid = ScanGrid::square(31).unwrap();
        let cfg = MatchConfig::unique_best();
        let mut rng = trial_rng(9, 0);
        let scenes = CircleScenes { h: 1.0 / 30.0 };
        let (env, d) = scenes.reference(&mut rng);
        let d = RigidDisplacement {
            delta: snap_vec(d.delta, 1.0 / 30.0),
        };
        let before = scan(&env, &body, AGENT_HOME, grid);
        let after = scan(&displace_environment(&env, d), &body, AGENT_HOME, grid);
        let phi_a = learn_phi(&before, &after, &cfg).unwrap();
        let phi_b = learn_phi(&before, &after, &cfg).unwrap();
        let rho = phi_distance(&phi_a, &phi_b, cfg.dedup_tol).unwrap();
        assert_eq!(rho, 0.0);
    }

    #[test]
    fn report_is_deterministic_and_consistent() {
        let body = AgentBody::standard(5);
        let p = tiny_params();
        let a = run_rigid_displacement(&body, 5, &p).unwrap();
        let b = run_rigid_displacement(&body, 5, &p).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.trials.len(), p.trials);
        // every decision equals (rho <= threshold)
        for t in &a.trials {
            let expect = t.rho.map_or(false, |r| r <= a.threshold.value);
            assert_eq!(t.decision_same, expect);
        }
        // aggregate counts cover all trials
        assert_eq!(a.curves[0].total_count(), p.trials);
    }
}
