//! Learning sensible rigid displacements from coincidence matching between
//! two sensorimotor contingency tables, plus the distance, composition and
//! threshold-calibration machinery built on them.

use crate::body::AgentBody;
use crate::env::{displace_environment, Environment};
use crate::error::{Result, SmcError};
use crate::geom::{RigidDisplacement, Vec2};
use crate::rng::trial_rng;
use crate::sensors::scan;
use crate::table::{euclid_dist, linf_dist, within_tol, ProprioVector, ScanGrid, SmcTable};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

/// How coincidences between the two scans are turned into pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchMode {
    /// Every (k, k') whose photo vectors agree within `photo_tol` on all
    /// components becomes a pair. Keeps ambiguous coincidences, so
    /// non-rich environments yield spurious pairs alongside the true ones.
    AllPairs,
    /// For each sample the single best counterpart (smallest max-component
    /// residual), kept only when it is unambiguous: every other candidate
    /// node must be worse by `unique_margin`, and the match must survive
    /// the reverse-direction check. Flat or repeated regions, which pin the
    /// coincidence to a patch rather than a node and so carry no
    /// displacement evidence, drop out.
    UniqueBest,
}

/// Matching configuration shared by the learning and composition steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Photoreceptor coincidence tolerance, per component.
    pub photo_tol: f64,
    /// Proprioceptive duplicate tolerance, per component.
    pub dedup_tol: f64,
    pub mode: MatchMode,
    /// UniqueBest only: required residual gap to the runner-up.
    pub unique_margin: f64,
    /// UniqueBest only: scan-neighborhood radius (in nodes) around the best
    /// node excluded from the runner-up search. 0 excludes the best node
    /// alone, so a match must be localized to a single node.
    pub exclusion: usize,
    /// UniqueBest only: a sample anchors a match only when at least one of
    /// its photo components reaches this level. Samples that register
    /// essentially no light coincide with every other dark patch and carry
    /// no displacement evidence.
    pub min_signal: f64,
    /// UniqueBest only: how many neighboring scan nodes must map with the
    /// same node offset for a pair to count. A compensable change moves the
    /// whole sensor sheet coherently; an isolated coincidence (for example
    /// the far side of a symmetric object) does not. Line scans cap the
    /// requirement at 1. 0 disables the check.
    pub min_support: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            photo_tol: 0.005,
            dedup_tol: 0.01,
            mode: MatchMode::AllPairs,
            unique_margin: 0.001,
            exclusion: 0,
            min_signal: 0.005,
            min_support: 2,
        }
    }
}

impl MatchConfig {
    pub fn unique_best() -> Self {
        MatchConfig {
            mode: MatchMode::UniqueBest,
            ..MatchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.photo_tol > 0.0) {
            return Err(SmcError::InvalidConfig("photo_tol must be > 0".into()));
        }
        if !(self.dedup_tol > 0.0) {
            return Err(SmcError::InvalidConfig("dedup_tol must be > 0".into()));
        }
        if self.unique_margin < 0.0 {
            return Err(SmcError::InvalidConfig("unique_margin must be >= 0".into()));
        }
        if self.min_signal < 0.0 {
            return Err(SmcError::InvalidConfig("min_signal must be >= 0".into()));
        }
        Ok(())
    }
}

/// One learned correspondence: proprioception before the change and the
/// proprioception that restores the same exteroceptor outputs after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiPair {
    pub from: ProprioVector,
    pub to: ProprioVector,
}

/// A sensible rigid displacement: a finite set of proprioception pairs.
/// May be empty when the two scans share no usable coincidence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhiFunction {
    pub pairs: Vec<PhiPair>,
}

impl PhiFunction {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// CSV export: p_1..p_n, pprime_1..pprime_n.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let np = self.pairs.first().map_or(0, |p| p.from.len());
        let mut header = Vec::new();
        for j in 1..=np {
            header.push(format!("p_{j}"));
        }
        for j in 1..=np {
            header.push(format!("pprime_{j}"));
        }
        writeln!(w, "{}", header.join(","))?;
        for pair in &self.pairs {
            let row: Vec<String> = pair
                .from
                .as_slice()
                .iter()
                .chain(pair.to.as_slice())
                .map(|v| format!("{v}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

/// Candidate index over one table, sorted by the photo component with the
/// widest spread. Any full-vector match within radius r also lies within the
/// window |s_c - q_c| <= r, so window enumeration is exact, not approximate.
struct PhotoIndex {
    component: usize,
    order: Vec<u32>,
    values: Vec<f64>,
}

impl PhotoIndex {
    fn build(table: &SmcTable) -> PhotoIndex {
        let ns = table.n_photo();
        let n = table.len();
        let mut component = 0;
        let mut best_spread = -1.0;
        for j in 0..ns {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for k in 0..n {
                let v = table.s_row(k)[j];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                component = j;
            }
        }
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| {
            table.s_row(a as usize)[component]
                .partial_cmp(&table.s_row(b as usize)[component])
                .unwrap()
                .then(a.cmp(&b))
        });
        let values = order
            .iter()
            .map(|&k| table.s_row(k as usize)[component])
            .collect();
        PhotoIndex {
            component,
            order,
            values,
        }
    }

    /// Indices whose component value lies within `radius` of `q`.
    fn window(&self, q: f64, radius: f64) -> &[u32] {
        let lo = self.values.partition_point(|&v| v < q - radius);
        let hi = self.values.partition_point(|&v| v <= q + radius);
        &self.order[lo..hi]
    }
}

fn all_pairs_matches(before: &SmcTable, after: &SmcTable, cfg: &MatchConfig) -> Vec<(u32, u32)> {
    let index = PhotoIndex::build(after);
    let tol = cfg.photo_tol;
    let mut out = Vec::new();
    for k in 0..before.len() {
        let sq = before.s_row(k);
        let mut hits: Vec<u32> = index
            .window(sq[index.component], tol)
            .iter()
            .copied()
            .filter(|&a| within_tol(sq, after.s_row(a as usize), tol))
            .collect();
        hits.sort_unstable();
        out.extend(hits.into_iter().map(|a| (k as u32, a)));
    }
    out
}

struct BestMatch {
    target: u32,
    unique: bool,
}

/// For every row of `query`: the best-matching row of `target` with the
/// max-component residual, and whether it is unambiguous (runner-up outside
/// the exclusion neighborhood worse by more than `margin`).
fn best_matches(
    query: &SmcTable,
    target: &SmcTable,
    index: &PhotoIndex,
    cfg: &MatchConfig,
) -> Vec<Option<BestMatch>> {
    let (tol, margin, excl) = (cfg.photo_tol, cfg.unique_margin, cfg.exclusion);
    let grid = target.grid();
    (0..query.len() as u32)
        .into_par_iter()
        .map(|k| {
            let sq = query.s_row(k as usize);
            if !sq.iter().any(|&v| v >= cfg.min_signal) {
                return None;
            }
            let window = index.window(sq[index.component], tol + margin);
            let mut best: Option<(f64, u32)> = None;
            for &a in window {
                let r = linf_dist(sq, target.s_row(a as usize));
                match best {
                    Some((br, ba)) if (r, a) >= (br, ba) => {}
                    _ => best = Some((r, a)),
                }
            }
            let (br, ba) = best?;
            if br >= tol {
                return None;
            }
            // Runner-up outside the scan neighborhood of the best node.
            // Candidates outside the window have residual > tol + margin
            // >= br + margin, so scanning the window is exact.
            let (bx, by) = grid.node_indices(ba as usize);
            let mut second = f64::INFINITY;
            for &a in window {
                let (ax, ay) = grid.node_indices(a as usize);
                if ax.abs_diff(bx) <= excl && ay.abs_diff(by) <= excl {
                    continue;
                }
                let r = linf_dist(sq, target.s_row(a as usize));
                if r < second {
                    second = r;
                }
            }
            Some(BestMatch {
                target: ba,
                unique: second > br + margin,
            })
        })
        .collect()
}

fn unique_matches(before: &SmcTable, after: &SmcTable, cfg: &MatchConfig) -> Vec<(u32, u32)> {
    let fwd_index = PhotoIndex::build(after);
    let bwd_index = PhotoIndex::build(before);
    let fwd = best_matches(before, after, &fwd_index, cfg);
    let bwd = best_matches(after, before, &bwd_index, cfg);
    let mut raw = Vec::new();
    for (k, m) in fwd.iter().enumerate() {
        let Some(m) = m else { continue };
        if !m.unique {
            continue;
        }
        let Some(back) = &bwd[m.target as usize] else {
            continue;
        };
        if back.target as usize == k && back.unique {
            raw.push((k as u32, m.target));
        }
    }
    coherent_matches(raw, before, after, cfg)
}

/// Keep the pairs whose node offset is shared by enough neighboring scan
/// nodes. True compensable changes shift the whole overlap region by one
/// offset; aliased coincidences sit in incoherent patches.
fn coherent_matches(
    raw: Vec<(u32, u32)>,
    before: &SmcTable,
    after: &SmcTable,
    cfg: &MatchConfig,
) -> Vec<(u32, u32)> {
    if cfg.min_support == 0 || raw.is_empty() {
        return raw;
    }
    let gb = before.grid();
    let ga = after.grid();
    let line_scan = gb.ny == 1 || ga.ny == 1;
    let required = if line_scan {
        cfg.min_support.min(1)
    } else {
        cfg.min_support
    };
    let offset_of = |k: u32, a: u32| -> (i64, i64) {
        let (kx, ky) = gb.node_indices(k as usize);
        let (ax, ay) = ga.node_indices(a as usize);
        (ax as i64 - kx as i64, ay as i64 - ky as i64)
    };
    let mut offsets: Vec<Option<(i64, i64)>> = vec![None; before.len()];
    for &(k, a) in &raw {
        offsets[k as usize] = Some(offset_of(k, a));
    }
    raw.into_iter()
        .filter(|&(k, a)| {
            let my = offset_of(k, a);
            let (kx, ky) = gb.node_indices(k as usize);
            let mut support = 0usize;
            let mut check = |nx: i64, ny: i64| {
                if nx >= 0 && ny >= 0 && (nx as usize) < gb.nx && (ny as usize) < gb.ny {
                    let idx = ny as usize * gb.nx + nx as usize;
                    if offsets[idx] == Some(my) {
                        support += 1;
                    }
                }
            };
            check(kx as i64 - 1, ky as i64);
            check(kx as i64 + 1, ky as i64);
            if !line_scan {
                check(kx as i64, ky as i64 - 1);
                check(kx as i64, ky as i64 + 1);
            }
            support >= required
        })
        .collect()
}

/// First-wins duplicate filter: a pair is dropped when some retained pair is
/// within `tol` componentwise on both its p and its p' side. Buckets on the
/// leading components keep the scan near-linear.
struct DedupFilter {
    tol: f64,
    dims: usize,
    cells: HashMap<[i64; 4], Vec<u32>>,
}

impl DedupFilter {
    fn new(tol: f64, np: usize) -> DedupFilter {
        DedupFilter {
            tol,
            dims: np.min(2),
            cells: HashMap::new(),
        }
    }

    fn key(&self, p: &[f64], q: &[f64]) -> [i64; 4] {
        let mut key = [0i64; 4];
        for d in 0..self.dims {
            key[d] = (p[d] / self.tol).floor() as i64;
            key[2 + d] = (q[d] / self.tol).floor() as i64;
        }
        key
    }

    /// Returns true when (p, q) is new; records it among the retained pairs.
    fn insert(&mut self, id: u32, p: &[f64], q: &[f64], kept: &[PhiPair]) -> bool {
        let key = self.key(p, q);
        let full: &[i64] = &[-1, 0, 1];
        let zero: &[i64] = &[0];
        // the second component of each side exists only for 2+-dimensional p
        let narrow = if self.dims < 2 { zero } else { full };
        for &d0 in full {
            for &d1 in narrow {
                for &d2 in full {
                    for &d3 in narrow {
                        let probe = [key[0] + d0, key[1] + d1, key[2] + d2, key[3] + d3];
                        if let Some(ids) = self.cells.get(&probe) {
                            for &i in ids {
                                let kp = &kept[i as usize];
                                if within_tol(p, kp.from.as_slice(), self.tol)
                                    && within_tol(q, kp.to.as_slice(), self.tol)
                                {
                                    return false;
                                }
                            }
                        }
                    }
                }
            }
        }
        self.cells.entry(key).or_default().push(id);
        true
    }
}

/// Learn the function linking proprioception before a change to the
/// proprioception after it, from the co-occurrences of photoreceptor
/// outputs in the two tables. Pairs are emitted in scan order (before
/// index, then after index) and near-duplicates are discarded first-wins.
pub fn learn_phi(before: &SmcTable, after: &SmcTable, cfg: &MatchConfig) -> Result<PhiFunction> {
    cfg.validate()?;
    if before.n_photo() != after.n_photo() {
        return Err(SmcError::LengthMismatch {
            expected: before.n_photo(),
            actual: after.n_photo(),
        });
    }
    if before.n_proprio() != after.n_proprio() {
        return Err(SmcError::LengthMismatch {
            expected: before.n_proprio(),
            actual: after.n_proprio(),
        });
    }
    let matches = match cfg.mode {
        MatchMode::AllPairs => all_pairs_matches(before, after, cfg),
        MatchMode::UniqueBest => unique_matches(before, after, cfg),
    };
    let mut pairs: Vec<PhiPair> = Vec::new();
    let mut filter = DedupFilter::new(cfg.dedup_tol, before.n_proprio());
    for (k, a) in matches {
        let p = before.p_row(k as usize);
        let q = after.p_row(a as usize);
        if filter.insert(pairs.len() as u32, p, q, &pairs) {
            pairs.push(PhiPair {
                from: ProprioVector(p.to_vec()),
                to: ProprioVector(q.to_vec()),
            });
        }
    }
    Ok(PhiFunction { pairs })
}

// ---------------------------------------------------------------------------
// Distance and composition
// ---------------------------------------------------------------------------

/// Bucket index over the domain side of a phi function, for tolerance
/// matching on proprioception vectors.
struct DomainIndex<'a> {
    phi: &'a PhiFunction,
    tol: f64,
    dims: usize,
    cells: HashMap<[i64; 2], Vec<u32>>,
}

impl<'a> DomainIndex<'a> {
    fn build(phi: &'a PhiFunction, tol: f64) -> DomainIndex<'a> {
        let dims = phi.pairs.first().map_or(1, |p| p.from.len()).min(2);
        let mut cells: HashMap<[i64; 2], Vec<u32>> = HashMap::new();
        for (i, pair) in phi.pairs.iter().enumerate() {
            let key = Self::key_of(pair.from.as_slice(), tol, dims);
            cells.entry(key).or_default().push(i as u32);
        }
        DomainIndex {
            phi,
            tol,
            dims,
            cells,
        }
    }

    fn key_of(p: &[f64], tol: f64, dims: usize) -> [i64; 2] {
        let mut key = [0i64; 2];
        for d in 0..dims {
            key[d] = (p[d] / tol).floor() as i64;
        }
        key
    }

    /// Indices of pairs whose domain vector matches `p` within tol,
    /// in ascending pair order.
    fn matches(&self, p: &[f64]) -> Vec<u32> {
        let key = Self::key_of(p, self.tol, self.dims);
        let deltas: &[i64] = &[-1, 0, 1];
        let mut out = Vec::new();
        for &d0 in deltas {
            for &d1 in deltas {
                let probe = if self.dims < 2 {
                    [key[0] + d0, 0]
                } else {
                    [key[0] + d0, key[1] + d1]
                };
                if let Some(ids) = self.cells.get(&probe) {
                    for &i in ids {
                        if within_tol(p, self.phi.pairs[i as usize].from.as_slice(), self.tol) {
                            out.push(i);
                        }
                    }
                }
                if self.dims < 2 {
                    break;
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Distance between two phi functions: the raw sum, over all domain-matched
/// pairs, of the Euclidean distance between their images in proprioception
/// space. Not normalized by the number of matches; comparisons against it
/// must come from a calibration run sharing the same scale. Returns None
/// when the domains share no pair.
pub fn phi_distance(a: &PhiFunction, b: &PhiFunction, dedup_tol: f64) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let index = DomainIndex::build(b, dedup_tol);
    let mut total = 0.0;
    let mut n = 0usize;
    for pair in &a.pairs {
        for i in index.matches(pair.from.as_slice()) {
            total += euclid_dist(
                pair.to.as_slice(),
                b.pairs[i as usize].to.as_slice(),
            );
            n += 1;
        }
    }
    if n == 0 {
        None
    } else {
        Some(total)
    }
}

/// Composition: pairs <p, p''> such that `first` maps p to some p' matching
/// the domain of `second` within the dedup tolerance, and `second` maps
/// that entry to p''. Empty when no chain exists.
pub fn compose_phi(second: &PhiFunction, first: &PhiFunction, dedup_tol: f64) -> PhiFunction {
    if first.is_empty() || second.is_empty() {
        return PhiFunction::default();
    }
    let index = DomainIndex::build(second, dedup_tol);
    let mut pairs = Vec::new();
    for f in &first.pairs {
        for i in index.matches(f.to.as_slice()) {
            pairs.push(PhiPair {
                from: f.from.clone(),
                to: second.pairs[i as usize].to.clone(),
            });
        }
    }
    PhiFunction { pairs }
}

// ---------------------------------------------------------------------------
// Threshold calibration
// ---------------------------------------------------------------------------

/// Perturbation bound used during calibration; displacements that differ by
/// less than this per axis count as the same displacement.
pub const CALIBRATION_PERTURBATION: f64 = 0.005;

/// Quantile of calibration distances taken as the decision threshold.
pub const CALIBRATION_QUANTILE: f64 = 0.9;

/// Calibration metadata kept alongside the threshold value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub quantile: f64,
    pub displacement_size: f64,
    pub n_trials: usize,
    pub n_undefined: usize,
    /// Lattice step displacements were snapped to, when the experiment
    /// samples its jumps on a grid.
    pub snap_step: Option<f64>,
}

/// A calibrated association threshold for the phi distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiThreshold {
    pub value: f64,
    pub calibration: CalibrationRecord,
}

/// Scene supply for threshold calibration. The test environment is drawn
/// after the perturbed displacement is known, so generators can keep both
/// displacement endpoints inside their scene boxes.
pub trait CalibrationScenes: Sync {
    /// Environment for the reference presentation and the displacement it
    /// will undergo.
    fn reference(&self, rng: &mut ChaCha8Rng) -> (Environment, RigidDisplacement);
    /// Environment for the test presentation of a displacement near `d`.
    fn test(&self, rng: &mut ChaCha8Rng, d: RigidDisplacement) -> Environment;
}

/// Everything fixed across calibration trials.
pub struct CalibrationSetup<'a> {
    pub body: &'a AgentBody,
    pub grid: ScanGrid,
    pub agent_pos: Vec2,
    pub cfg: MatchConfig,
    /// Snap displacements to multiples of this step (the experiments jump on
    /// a regular lattice); None leaves them continuous.
    pub snap_step: Option<f64>,
    pub seed: u64,
    /// First trial stream index used by the calibration phase.
    pub trial_base: u64,
}

fn snap_to(step: Option<f64>, v: Vec2) -> Vec2 {
    match step {
        Some(h) => Vec2::new((v.x / h).round() * h, (v.y / h).round() * h),
        None => v,
    }
}

/// Run paired trials: a reference displacement in one scene and a test
/// displacement differing by less than `CALIBRATION_PERTURBATION` per axis
/// in an independently drawn scene. The threshold is the 90th percentile of
/// the observed distances. Fails when more than half the trials have no
/// shared domain.
pub fn calibrate_threshold(
    setup: &CalibrationSetup<'_>,
    scenes: &dyn CalibrationScenes,
    n_trials: usize,
) -> Result<PhiThreshold> {
    if n_trials < 20 {
        return Err(SmcError::InvalidConfig(format!(
            "calibration needs at least 20 trials, got {n_trials}"
        )));
    }
    setup.cfg.validate()?;
    let rhos: Vec<Option<f64>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(setup.seed, setup.trial_base + t);
            let (ref_env, raw_ref) = scenes.reference(&mut rng);
            let d_ref = RigidDisplacement {
                delta: snap_to(setup.snap_step, raw_ref.delta),
            };
            let ex = rng.gen_range(-CALIBRATION_PERTURBATION..CALIBRATION_PERTURBATION);
            let ey = rng.gen_range(-CALIBRATION_PERTURBATION..CALIBRATION_PERTURBATION);
            let d_test = RigidDisplacement {
                delta: snap_to(setup.snap_step, d_ref.delta + Vec2::new(ex, ey)),
            };
            let test_env = scenes.test(&mut rng, d_test);
            let phi_ref = learn_for_displacement(setup, &ref_env, d_ref);
            let phi_test = learn_for_displacement(setup, &test_env, d_test);
            phi_distance(&phi_ref, &phi_test, setup.cfg.dedup_tol)
        })
        .collect();
    let undefined = rhos.iter().filter(|r| r.is_none()).count();
    if undefined * 2 > n_trials {
        return Err(SmcError::CalibrationFailed {
            undefined,
            total: n_trials,
        });
    }
    let mut values: Vec<f64> = rhos.into_iter().flatten().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((CALIBRATION_QUANTILE * values.len() as f64).ceil() as usize)
        .saturating_sub(1)
        .min(values.len() - 1);
    Ok(PhiThreshold {
        value: values[idx],
        calibration: CalibrationRecord {
            quantile: CALIBRATION_QUANTILE,
            displacement_size: CALIBRATION_PERTURBATION,
            n_trials,
            n_undefined: undefined,
            snap_step: setup.snap_step,
        },
    })
}

/// Scan, displace the environment, rescan, learn.
pub fn learn_for_displacement(
    setup: &CalibrationSetup<'_>,
    env: &Environment,
    d: RigidDisplacement,
) -> PhiFunction {
    let before = scan(env, setup.body, setup.agent_pos, setup.grid);
    let moved = displace_environment(env, d);
    let after = scan(&moved, setup.body, setup.agent_pos, setup.grid);
    learn_phi(&before, &after, &setup.cfg).expect("tables from one body")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::AgentBody;
    use crate::env::LightSource;
    use crate::sensors::scan;
    use rand_chacha::rand_core::SeedableRng;

    fn body() -> AgentBody {
        AgentBody::standard(12345)
    }

    /// 200 sources in a 3x3 square centered on the agent's field of view.
    fn rich_env(seed: u64) -> Environment {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Environment::new(
            (0..200)
                .map(|_| {
                    LightSource::new(
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(-1.5..1.5),
                        rng.gen_range(0.5..1.5),
                    )
                })
                .collect(),
        )
    }

    const AGENT: Vec2 = Vec2 { x: -0.5, y: -0.5 };

    #[test]
    fn zero_displacement_learns_identity() {
        let b = body();
        let env = rich_env(3);
        let t = scan(&env, &b, AGENT, ScanGrid::square(15).unwrap());
        for cfg in [MatchConfig::default(), MatchConfig::unique_best()] {
            let phi = learn_phi(&t, &t, &cfg).unwrap();
            assert_eq!(phi.len(), t.len(), "one identity pair per node");
            for (k, pair) in phi.pairs.iter().enumerate() {
                assert_eq!(pair.from.as_slice(), t.p_row(k));
                assert_eq!(pair.to.as_slice(), t.p_row(k));
            }
        }
    }

    #[test]
    fn far_displacement_learns_nothing() {
        let b = body();
        let env = rich_env(4);
        let grid = ScanGrid::square(15).unwrap();
        let before = scan(&env, &b, AGENT, grid);
        let moved = displace_environment(&env, RigidDisplacement::new(5.0, 5.0));
        let after = scan(&moved, &b, AGENT, grid);
        for cfg in [MatchConfig::default(), MatchConfig::unique_best()] {
            let phi = learn_phi(&before, &after, &cfg).unwrap();
            assert!(phi.is_empty(), "no coincidences across a 5-unit jump");
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let b = body();
        let mut b2 = b.clone();
        b2.photoreceptors.pop();
        let env = rich_env(5);
        let grid = ScanGrid::square(5).unwrap();
        let t1 = scan(&env, &b, AGENT, grid);
        let t2 = scan(&env, &b2, AGENT, grid);
        assert!(matches!(
            learn_phi(&t1, &t2, &MatchConfig::default()),
            Err(SmcError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pruned_matching_equals_naive_on_small_grids() {
        let b = body();
        let env = rich_env(6);
        let grid = ScanGrid::square(9).unwrap();
        let before = scan(&env, &b, AGENT, grid);
        let moved = displace_environment(&env, RigidDisplacement::new(0.125, -0.25));
        let after = scan(&moved, &b, AGENT, grid);
        let cfg = MatchConfig::default();
        let fast = all_pairs_matches(&before, &after, &cfg);
        // naive O(n^2) reference
        let mut naive = Vec::new();
        for k in 0..before.len() {
            for a in 0..after.len() {
                if within_tol(before.s_row(k), after.s_row(a), cfg.photo_tol) {
                    naive.push((k as u32, a as u32));
                }
            }
        }
        assert_eq!(fast, naive);
    }

    #[test]
    fn dedup_discards_near_duplicates_first_wins() {
        let grid = ScanGrid::line(4);
        // two nodes with nearly identical p and identical s, plus one distinct
        let p = vec![0.500, 0.5001, 0.9, 0.100];
        let s = vec![1.0, 1.0, 2.0, 3.0];
        let t = SmcTable::from_rows(grid, 1, 1, p, s);
        let phi = learn_phi(&t, &t, &MatchConfig::default()).unwrap();
        // node 0 matches nodes 0 and 1 (s equal); dedup keeps the first of
        // the near-identical combinations only.
        let froms: Vec<f64> = phi.pairs.iter().map(|p| p.from.0[0]).collect();
        assert!(froms.contains(&0.9) && froms.contains(&0.1));
        let close: Vec<&PhiPair> = phi
            .pairs
            .iter()
            .filter(|p| (p.from.0[0] - 0.5).abs() < 0.005)
            .collect();
        assert_eq!(close.len(), 1, "near-duplicate pairs collapse to one");
        assert_eq!(close[0].from.0[0], 0.500, "first encountered wins");
    }

    #[test]
    fn distance_to_self_is_zero_and_disjoint_is_undefined() {
        let b = body();
        let env = rich_env(8);
        let grid = ScanGrid::square(15).unwrap();
        let setup = CalibrationSetup {
            body: &b,
            grid,
            agent_pos: AGENT,
            cfg: MatchConfig::unique_best(),
            snap_step: None,
            seed: 0,
            trial_base: 0,
        };
        let phi = learn_for_displacement(&setup, &env, RigidDisplacement::new(1.0 / 7.0, 0.0));
        assert!(!phi.is_empty());
        assert_eq!(phi_distance(&phi, &phi, 0.01), Some(0.0));
        let far = learn_for_displacement(&setup, &env, RigidDisplacement::new(-13.0 / 14.0, 0.0));
        assert!(!far.is_empty());
        // domains are disjoint in proprioception space
        assert_eq!(phi_distance(&phi, &far, 0.01), None);
        assert_eq!(phi_distance(&PhiFunction::default(), &phi, 0.01), None);
    }

    #[test]
    fn compose_with_identity_preserves_phi() {
        let b = body();
        let env = rich_env(9);
        let grid = ScanGrid::square(15).unwrap();
        let t = scan(&env, &b, AGENT, grid);
        let cfg = MatchConfig::unique_best();
        let identity = learn_phi(&t, &t, &cfg).unwrap();
        let setup = CalibrationSetup {
            body: &b,
            grid,
            agent_pos: AGENT,
            cfg,
            snap_step: None,
            seed: 0,
            trial_base: 0,
        };
        let phi = learn_for_displacement(&setup, &env, RigidDisplacement::new(2.0 / 7.0, 1.0 / 7.0));
        let composed = compose_phi(&identity, &phi, cfg.dedup_tol);
        assert_eq!(composed.len(), phi.len());
        let d = phi_distance(&composed, &phi, cfg.dedup_tol).unwrap();
        assert_eq!(d, 0.0);
    }

    struct RichScenes {
        displacement_span: f64,
    }

    impl CalibrationScenes for RichScenes {
        fn reference(&self, rng: &mut ChaCha8Rng) -> (Environment, RigidDisplacement) {
            let env = Environment::new(
                (0..200)
                    .map(|_| {
                        LightSource::new(
                            rng.gen_range(-1.5..1.5),
                            rng.gen_range(-1.5..1.5),
                            rng.gen_range(0.5..1.5),
                        )
                    })
                    .collect(),
            );
            let s = self.displacement_span;
            let d = RigidDisplacement::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
            (env, d)
        }

        fn test(&self, rng: &mut ChaCha8Rng, _d: RigidDisplacement) -> Environment {
            self.reference(rng).0
        }
    }

    #[test]
    fn calibration_records_pinned_constants() {
        let b = body();
        let grid = ScanGrid::square(15).unwrap();
        let h = grid.step_x(&b.retina_range);
        let setup = CalibrationSetup {
            body: &b,
            grid,
            agent_pos: AGENT,
            cfg: MatchConfig::unique_best(),
            snap_step: Some(h),
            seed: 77,
            trial_base: 0,
        };
        let thr = calibrate_threshold(
            &setup,
            &RichScenes {
                displacement_span: 0.2,
            },
            20,
        )
        .unwrap();
        assert_eq!(thr.calibration.quantile, 0.9);
        assert_eq!(thr.calibration.displacement_size, 0.005);
        assert_eq!(thr.calibration.n_trials, 20);
        assert_eq!(thr.calibration.snap_step, Some(h));
        assert!(thr.value >= 0.0);
    }

    #[test]
    fn calibration_with_tiny_tol_and_exact_grid_gives_zero() {
        let b = body();
        let grid = ScanGrid::square(15).unwrap();
        let h = grid.step_x(&b.retina_range);
        let setup = CalibrationSetup {
            body: &b,
            grid,
            agent_pos: AGENT,
            cfg: MatchConfig {
                photo_tol: 1e-9,
                ..MatchConfig::default()
            },
            snap_step: Some(h),
            seed: 78,
            trial_base: 0,
        };
        let thr = calibrate_threshold(
            &setup,
            &RichScenes {
                displacement_span: 0.2,
            },
            20,
        )
        .unwrap();
        assert_eq!(thr.value, 0.0);
    }

    #[test]
    fn calibration_needs_twenty_trials() {
        let b = body();
        let setup = CalibrationSetup {
            body: &b,
            grid: ScanGrid::square(15).unwrap(),
            agent_pos: AGENT,
            cfg: MatchConfig::unique_best(),
            snap_step: None,
            seed: 0,
            trial_base: 0,
        };
        assert!(matches!(
            calibrate_threshold(
                &setup,
                &RichScenes {
                    displacement_span: 0.2
                },
                19
            ),
            Err(SmcError::InvalidConfig(_))
        ));
    }

    #[test]
    fn calibration_fails_when_distances_undefined() {
        struct DarkScenes;
        impl CalibrationScenes for DarkScenes {
            fn reference(&self, rng: &mut ChaCha8Rng) -> (Environment, RigidDisplacement) {
                let d = RigidDisplacement::new(rng.gen_range(-0.1..0.1), 0.0);
                (Environment::empty(), d)
            }
            fn test(&self, _rng: &mut ChaCha8Rng, _d: RigidDisplacement) -> Environment {
                Environment::empty()
            }
        }
        let b = body();
        let setup = CalibrationSetup {
            body: &b,
            grid: ScanGrid::square(9).unwrap(),
            agent_pos: AGENT,
            cfg: MatchConfig::unique_best(),
            snap_step: None,
            seed: 0,
            trial_base: 0,
        };
        assert!(matches!(
            calibrate_threshold(&setup, &DarkScenes, 20),
            Err(SmcError::CalibrationFailed { .. })
        ));
    }

    #[test]
    fn compose_disjoint_is_empty() {
        let b = body();
        let env = rich_env(10);
        let grid = ScanGrid::square(15).unwrap();
        let setup = CalibrationSetup {
            body: &b,
            grid,
            agent_pos: AGENT,
            cfg: MatchConfig::unique_best(),
            snap_step: None,
            seed: 0,
            trial_base: 0,
        };
        // first's image sits at the far left of the range while second's
        // domain sits at the far right, so no chain can form.
        let first = learn_for_displacement(&setup, &env, RigidDisplacement::new(-6.0 / 7.0, 0.0));
        let second = learn_for_displacement(&setup, &env, RigidDisplacement::new(-6.0 / 7.0, 0.0));
        let composed = compose_phi(&second, &first, 0.01);
        assert!(composed.is_empty());
    }
}
