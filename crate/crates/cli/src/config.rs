//! Run configuration: a TOML file plus command-line overrides resolving to
//! a profile with optional parameter overrides.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use smcsim::experiments::Profile;
use std::path::{Path, PathBuf};

pub const EXPERIMENTS: [&str; 6] = ["atlas", "rigid", "medium", "relpos", "demo1d", "audio"];

/// On-disk configuration; every field may also arrive as a flag.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub experiment: Option<String>,
    pub profile: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub trials: Option<usize>,
    pub calib_trials: Option<usize>,
    pub photo_tol: Option<f64>,
    pub dedup_tol: Option<f64>,
    pub jump_step: Option<f64>,
    pub jump_extent: Option<f64>,
    pub offset_range: Option<f64>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub experiment: String,
    pub profile: Profile,
    pub seed: u64,
    /// 0 means "all available"; not part of any report.
    pub threads: usize,
    pub out: PathBuf,
    pub timestamp: bool,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: FileConfig =
            toml::from_str(&text).map_err(|e| anyhow!("config {}: {e}", path.display()))?;
        Ok(cfg)
    }

    /// Layer `over` on top of `self` (flags over file).
    pub fn merged(mut self, over: FileConfig) -> FileConfig {
        self.experiment = over.experiment.or(self.experiment);
        self.profile = over.profile.or(self.profile);
        self.seed = over.seed.or(self.seed);
        self.threads = over.threads.or(self.threads);
        self.out = over.out.or(self.out);
        let o = &mut self.overrides;
        let v = over.overrides;
        o.grid = v.grid.or(o.grid);
        o.trials = v.trials.or(o.trials);
        o.calib_trials = v.calib_trials.or(o.calib_trials);
        o.photo_tol = v.photo_tol.or(o.photo_tol);
        o.dedup_tol = v.dedup_tol.or(o.dedup_tol);
        o.jump_step = v.jump_step.or(o.jump_step);
        o.jump_extent = v.jump_extent.or(o.jump_extent);
        o.offset_range = v.offset_range.or(o.offset_range);
        self
    }

    /// Validate and resolve into a runnable configuration. Every failure
    /// names the offending field.
    pub fn resolve(&self, timestamp: bool) -> Result<RunConfig> {
        let experiment = self
            .experiment
            .clone()
            .ok_or_else(|| anyhow!("field 'experiment' is required"))?;
        if !EXPERIMENTS.contains(&experiment.as_str()) {
            bail!(
                "field 'experiment': unknown experiment '{experiment}' (expected one of {})",
                EXPERIMENTS.join("|")
            );
        }
        let profile_name = self.profile.clone().unwrap_or_else(|| "desk".into());
        let mut profile = Profile::by_name(&profile_name)
            .ok_or_else(|| anyhow!("field 'profile': unknown profile '{profile_name}'"))?;

        let o = &self.overrides;
        if let Some(g) = o.grid {
            if g < 2 {
                bail!("field 'overrides.grid': must be at least 2, got {g}");
            }
            profile.scan_grid = g;
        }
        if let Some(t) = o.photo_tol {
            if !(t > 0.0) {
                bail!("field 'overrides.photo_tol': must be positive, got {t}");
            }
            profile.photo_tol = t;
        }
        if let Some(t) = o.dedup_tol {
            if !(t > 0.0) {
                bail!("field 'overrides.dedup_tol': must be positive, got {t}");
            }
            profile.dedup_tol = t;
        }
        if let Some(s) = o.jump_step {
            if !(s > 0.0) {
                bail!("field 'overrides.jump_step': must be positive, got {s}");
            }
            profile.atlas_step = s;
            profile.medium_jump_step = s;
        }
        if let Some(e) = o.jump_extent {
            if !(e > 0.0) {
                bail!("field 'overrides.jump_extent': must be positive, got {e}");
            }
            profile.atlas_extent = e;
        }
        if let Some(r) = o.offset_range {
            if !(r > 0.0) {
                bail!("field 'overrides.offset_range': must be positive, got {r}");
            }
            profile.relpos_offset_range = r;
        }
        if let Some(n) = o.trials {
            if n == 0 {
                bail!("field 'overrides.trials': must be at least 1");
            }
            profile.rigid_trials = n;
            profile.medium_trials = n;
            profile.relpos_trials = n;
            profile.audio_trials = n;
        }
        if let Some(n) = o.calib_trials {
            if n < 20 {
                bail!("field 'overrides.calib_trials': must be at least 20, got {n}");
            }
            profile.rigid_calib_trials = n;
            profile.medium_calib_trials = n;
            profile.audio_calib_trials = n;
        }

        // atlas preconditions surface at validation time
        if experiment == "atlas" {
            smcsim::experiments::atlas_count(profile.atlas_step, profile.atlas_extent).map_err(
                |e| anyhow!("field 'overrides.jump_step'/'overrides.jump_extent': {e}"),
            )?;
        }

        Ok(RunConfig {
            experiment,
            profile,
            seed: self.seed.unwrap_or(0),
            threads: self.threads.unwrap_or(0),
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            timestamp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolve_default_desk() {
        let cfg = FileConfig {
            experiment: Some("rigid".into()),
            ..Default::default()
        };
        let rc = cfg.resolve(true).unwrap();
        assert_eq!(rc.profile.name, "desk");
        assert_eq!(rc.seed, 0);
    }

    #[test]
    fn unknown_experiment_is_named() {
        let cfg = FileConfig {
            experiment: Some("warp".into()),
            ..Default::default()
        };
        let err = cfg.resolve(true).unwrap_err().to_string();
        assert!(err.contains("experiment"), "{err}");
    }

    #[test]
    fn negative_tolerance_is_named() {
        let cfg = FileConfig {
            experiment: Some("rigid".into()),
            overrides: Overrides {
                photo_tol: Some(-1.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let err = cfg.resolve(true).unwrap_err().to_string();
        assert!(err.contains("photo_tol"), "{err}");
    }

    #[test]
    fn indivisible_jump_step_fails_for_atlas() {
        let cfg = FileConfig {
            experiment: Some("atlas".into()),
            overrides: Overrides {
                jump_step: Some(0.07),
                ..Default::default()
            },
            ..Default::default()
        };
        let err = cfg.resolve(true).unwrap_err().to_string();
        assert!(err.contains("jump_step"), "{err}");
    }

    #[test]
    fn paper_profile_constants_survive_resolution() {
        let cfg = FileConfig {
            experiment: Some("medium".into()),
            profile: Some("paper".into()),
            ..Default::default()
        };
        let rc = cfg.resolve(true).unwrap();
        assert_eq!(rc.profile, Profile::paper());
    }
}
