//! The experiment harness: seeded Monte-Carlo procedures for the atlas,
//! displacement association, unchanging-medium, relative-position, 1-D demo
//! and audio runs, with per-trial records and aggregate curves.

pub mod atlas;
pub mod audio_run;
pub mod demo1d;
pub mod medium;
pub mod relpos;
pub mod report;
pub mod rigid;
pub mod scenes;

pub use atlas::{atlas_count, learn_atlas, run_phi_atlas, Atlas};
pub use audio_run::{run_audio, AudioParams, AudioReport};
pub use demo1d::{run_1d_demo, Demo1dParams, Demo1dReport};
pub use medium::{run_unchanging_medium, MediumParams, MediumReport};
pub use relpos::{run_relative_position, RelposParams, RelposReport};
pub use report::{Curve, Report};
pub use rigid::{circle_calibration, run_rigid_displacement, RigidParams, RigidReport};
pub use scenes::{ObjectShape, AGENT_HOME};

use crate::phi::MatchConfig;
use serde::{Deserialize, Serialize};

/// Experiment-scale presets. The paper profile reproduces the published
/// constants; the desk profile trades grid resolution and trial counts for
/// runtimes in seconds to minutes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub scan_grid: usize,
    pub photo_tol: f64,
    pub dedup_tol: f64,
    pub atlas_step: f64,
    pub atlas_extent: f64,
    pub atlas_sources: usize,
    pub rigid_trials: usize,
    pub rigid_calib_trials: usize,
    pub medium_trials: usize,
    pub medium_calib_trials: usize,
    pub medium_jump_step: f64,
    pub medium_jump_extent: f64,
    pub relpos_trials: usize,
    pub relpos_offset_range: f64,
    pub relpos_sources: usize,
    pub audio_trials: usize,
    pub audio_calib_trials: usize,
    pub audio_nodes: usize,
    pub demo1d_nodes: usize,
}

impl Profile {
    /// Published constants: 201x201 scan grid, 0.005/0.01 tolerances,
    /// 0.02 jump step over a 1.8 extent, 1,000 and 10,000 trial counts.
    pub fn paper() -> Profile {
        Profile {
            name: "paper".into(),
            scan_grid: 201,
            photo_tol: 0.005,
            dedup_tol: 0.01,
            atlas_step: 0.02,
            atlas_extent: 1.8,
            atlas_sources: 200,
            rigid_trials: 1000,
            rigid_calib_trials: 200,
            medium_trials: 10000,
            medium_calib_trials: 500,
            medium_jump_step: 0.02,
            medium_jump_extent: 0.6,
            relpos_trials: 1000,
            relpos_offset_range: 0.15,
            relpos_sources: 200,
            audio_trials: 100,
            audio_calib_trials: 50,
            audio_nodes: 201,
            demo1d_nodes: 201,
        }
    }

    /// Same procedures at desk scale: 51x51 grid, coarser jump lattices,
    /// reduced trial counts.
    pub fn desk() -> Profile {
        Profile {
            name: "desk".into(),
            scan_grid: 51,
            photo_tol: 0.005,
            dedup_tol: 0.01,
            atlas_step: 0.2,
            atlas_extent: 1.8,
            atlas_sources: 200,
            rigid_trials: 400,
            rigid_calib_trials: 50,
            medium_trials: 1000,
            medium_calib_trials: 200,
            medium_jump_step: 0.06,
            medium_jump_extent: 0.6,
            relpos_trials: 200,
            relpos_offset_range: 0.15,
            relpos_sources: 200,
            audio_trials: 100,
            audio_calib_trials: 50,
            audio_nodes: 201,
            demo1d_nodes: 201,
        }
    }

    pub fn by_name(name: &str) -> Option<Profile> {
        match name {
            "paper" => Some(Profile::paper()),
            "desk" => Some(Profile::desk()),
            _ => None,
        }
    }

    /// Matching configuration used by the experiment harness: the
    /// cross-checked unique matcher over the profile tolerances.
    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            photo_tol: self.photo_tol,
            dedup_tol: self.dedup_tol,
            ..MatchConfig::unique_best()
        }
    }

    pub fn rigid_params(&self) -> RigidParams {
        RigidParams {
            grid: self.scan_grid,
            trials: self.rigid_trials,
            calib_trials: self.rigid_calib_trials,
            cfg: self.match_config(),
            max_diff: 0.1,
        }
    }

    pub fn medium_params(&self) -> MediumParams {
        MediumParams {
            grid: self.scan_grid,
            trials: self.medium_trials,
            calib_trials: self.medium_calib_trials,
            cfg: self.match_config(),
            jump_step: self.medium_jump_step,
            jump_extent: self.medium_jump_extent,
            circle_box: 0.4,
            atlas_sources: self.atlas_sources,
            max_deformation: 0.5,
            calibration_band_share: 0.5,
        }
    }

    pub fn relpos_params(&self) -> RelposParams {
        RelposParams {
            grid: self.scan_grid,
            trials: self.relpos_trials,
            calib_trials: self.rigid_calib_trials,
            cfg: self.match_config(),
            segment_counts: vec![2, 3, 4],
            offset_range: self.relpos_offset_range,
            intermediate_box: 0.9,
            sources: self.relpos_sources,
        }
    }

    pub fn audio_params(&self) -> AudioParams {
        AudioParams {
            n_nodes: self.audio_nodes,
            trials: self.audio_trials,
            calib_trials: self.audio_calib_trials,
            ..AudioParams::default()
        }
    }

    pub fn demo1d_params(&self) -> Demo1dParams {
        Demo1dParams {
            n_nodes: self.demo1d_nodes,
            ..Demo1dParams::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_profile_carries_published_constants() {
        let p = Profile::paper();
        assert_eq!(p.scan_grid, 201);
        assert_eq!(p.photo_tol, 0.005);
        assert_eq!(p.dedup_tol, 0.01);
        assert_eq!(p.atlas_step, 0.02);
        assert_eq!(p.atlas_extent, 1.8);
        assert_eq!(p.rigid_trials, 1000);
        assert_eq!(p.medium_trials, 10000);
        assert_eq!(p.relpos_trials, 1000);
        assert_eq!(atlas_count(p.atlas_step, p.atlas_extent).unwrap(), 8281);
    }

    #[test]
    fn jump_lattices_sit_on_the_scan_lattice() {
        for p in [Profile::paper(), Profile::desk()] {
            let h = 1.0 / (p.scan_grid - 1) as f64;
            for step in [p.atlas_step, p.medium_jump_step] {
                let r = step / h;
                assert!(
                    (r - r.round()).abs() < 1e-9,
                    "{}: step {step} not a lattice multiple of {h}",
                    p.name
                );
            }
        }
    }
}
