//! Exhaustive grid search over `(θx, θy, θz)` for the pose that makes the
//! detected button corners most rectangle-like.
//!
//! The search runs in two passes. The first pass scores every lattice
//! hypothesis with the raw criteria; min-max normalization needs the whole
//! population, so ranking by Final CR happens in a second pass once the
//! per-criterion bounds are known. Ties go to the lexicographically smallest
//! `(θx, θy, θz)`, which makes the result independent of the worker count.

use std::io::Write;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::criteria::{raw_triple, CriterionScores, PopulationBounds};
use crate::error::{Error, Result};
use crate::geometry::{
    apply_pose, deg_to_rad, move_point, pixels_to_spatial, project, rotation_x, rotation_y, rotation_z, to_pixels,
    CornerSet, Frame, Intrinsics, PoseHypothesis,
};

/// Refinement factor of the coarse-to-fine sweep: the coarse step is
/// `COARSE_FACTOR·γ` and the fine window spans two coarse steps either side
/// of the coarse winner, `±2·COARSE_FACTOR·γ`, at step `γ`.
pub const COARSE_FACTOR: usize = 4;

/// How raw criterion triples are kept between the two passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreStorage {
    /// One stored triple per hypothesis (about 100 MB for the default grid).
    #[default]
    Table,
    /// Track bounds only and recompute every triple in the second pass.
    Recompute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Lowest sampled angle, degrees.
    pub alpha: f64,
    /// Highest sampled angle, degrees (inclusive).
    pub beta: f64,
    /// Lattice step, degrees.
    pub gamma: f64,
    pub coarse_to_fine: bool,
    pub worker_count: usize,
    pub storage: ScoreStorage,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            alpha: -40.0,
            beta: 40.0,
            gamma: 0.5,
            coarse_to_fine: false,
            worker_count: default_workers(),
            storage: ScoreStorage::Table,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSearchConfig(msg));
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()) {
            return bad("grid bounds and step must be finite".into());
        }
        if self.alpha >= self.beta {
            return bad(format!(
                "empty grid: alpha ({}) must be below beta ({})",
                self.alpha, self.beta
            ));
        }
        if self.gamma <= 0.0 {
            return bad(format!("step gamma must be positive, got {}", self.gamma));
        }
        if self.worker_count == 0 {
            return bad("worker count must be at least 1".into());
        }
        if self.samples_per_axis() > 100_000 {
            return bad(format!("{} samples per axis is too many", self.samples_per_axis()));
        }
        Ok(())
    }

    /// `(β − α)/γ + 1`, both endpoints included.
    pub fn samples_per_axis(&self) -> usize {
        ((self.beta - self.alpha) / self.gamma + 1e-9).floor() as usize + 1
    }

    /// Angle of lattice index `i`.
    pub fn angle(&self, i: usize) -> f64 {
        self.alpha + i as f64 * self.gamma
    }

    pub fn lattice_size(&self) -> usize {
        self.samples_per_axis().pow(3)
    }
}

/// Best lattice pose and the bookkeeping around it.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SearchResult {
    #[serde(serialize_with = "serialize_pose")]
    pub best_pose: PoseHypothesis,
    pub best_final_cr: f64,
    pub raw_scores_best: CriterionScores,
    /// `‖Cos‖₂` at the winner.
    pub residual_cos_norm: f64,
    pub hypotheses_evaluated: usize,
    pub degenerate_hypotheses: usize,
    /// Hypotheses of the coarse and fine stages when running coarse-to-fine.
    pub stage_hypotheses: Option<(usize, usize)>,
    /// Wall time in seconds.
    pub elapsed: f64,
}

fn serialize_pose<S: serde::Serializer>(pose: &PoseHypothesis, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("PoseHypothesis", 2)?;
    st.serialize_field("angles_deg", &pose.angles())?;
    st.serialize_field("translation", &[pose.t.x, pose.t.y, pose.t.z])?;
    st.end()
}

impl SearchResult {
    /// The result with the wall time zeroed, for run-to-run comparison.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed: 0.0,
            ..self.clone()
        }
    }

    /// Detected corners moved by the best pose, in pixels.
    pub fn rectify_corners(&self, detected: &CornerSet, k: &Intrinsics) -> Result<CornerSet> {
        let spatial = pixels_to_spatial(detected, k)?;
        to_pixels(&project(&apply_pose(&spatial, &self.best_pose)?, k)?)
    }
}

/// Raw criterion triples of a full lattice sweep, `θx`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub angles: Vec<f64>,
    /// `NaN` marks a degenerate hypothesis.
    pub triples: Vec<[f64; 3]>,
}

impl ScoreTable {
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let n = self.angles.len();
        (ix * n + iy) * n + iz
    }

    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> Option<[f64; 3]> {
        let t = self.triples[self.index(ix, iy, iz)];
        (!t[0].is_nan()).then_some(t)
    }

    /// Tab-separated dump, one row per hypothesis.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta_x\ttheta_y\ttheta_z\tkh_norm\tkrv\tcos_norm")?;
        let n = self.angles.len();
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    let t = self.triples[self.index(ix, iy, iz)];
                    writeln!(
                        w,
                        "{}\t{}\t{}\t{}\t{}\t{}",
                        self.angles[ix], self.angles[iy], self.angles[iz], t[0], t[1], t[2]
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// Lattice indices sampled along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct AxisSamples {
    start: usize,
    stride: usize,
    count: usize,
}

impl AxisSamples {
    fn full(n: usize) -> Self {
        Self {
            start: 0,
            stride: 1,
            count: n,
        }
    }

    fn index(&self, k: usize) -> usize {
        self.start + k * self.stride
    }
}

struct Sweep<'a> {
    cfg: &'a SearchConfig,
    detected: Vec<[Vector3<f64>; 4]>,
    anchor: Vector3<f64>,
    axes: [AxisSamples; 3],
    rx: Vec<Matrix3<f64>>,
    ry: Vec<Matrix3<f64>>,
    rz: Vec<Matrix3<f64>>,
}

const DEGENERATE: [f64; 3] = [f64::NAN; 3];

impl<'a> Sweep<'a> {
    fn new(cfg: &'a SearchConfig, detected: &CornerSet, reference: &CornerSet, axes: [AxisSamples; 3]) -> Self {
        let mats = |axis: &AxisSamples, f: fn(f64) -> Matrix3<f64>| {
            (0..axis.count)
                .map(|k| f(deg_to_rad(cfg.angle(axis.index(k)))))
                .collect::<Vec<_>>()
        };
        Self {
            cfg,
            detected: detected.buttons().iter().map(|b| b.corners).collect(),
            anchor: reference.first_corner(),
            rx: mats(&axes[0], rotation_x),
            ry: mats(&axes[1], rotation_y),
            rz: mats(&axes[2], rotation_z),
            axes,
        }
    }

    fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    fn plane(&self) -> usize {
        self.axes[1].count * self.axes[2].count
    }

    /// Rotation and aligned translation of one hypothesis.
    #[inline]
    fn motion(&self, rxy: &Matrix3<f64>, kz: usize) -> (Matrix3<f64>, Vector3<f64>) {
        let r = rxy * self.rz[kz];
        let t = self.anchor - r * self.detected[0][0];
        (r, t)
    }

    #[inline]
    fn score(&self, rxy: &Matrix3<f64>, kz: usize, buf: &mut Vec<[Vector3<f64>; 4]>) -> [f64; 3] {
        let (r, t) = self.motion(rxy, kz);
        buf.clear();
        for quad in &self.detected {
            let mut moved = [Vector3::zeros(); 4];
            for (m, d) in moved.iter_mut().zip(quad) {
                match move_point(&r, &t, d) {
                    Some(p) => *m = p,
                    None => return DEGENERATE,
                }
            }
            buf.push(moved);
        }
        raw_triple(buf).unwrap_or(DEGENERATE)
    }

    /// Scores one `θx` slab into `out`, `θy`-major.
    fn score_slab(&self, kx: usize, out: &mut [[f64; 3]]) {
        let mut buf = Vec::with_capacity(self.detected.len());
        let nz = self.axes[2].count;
        for ky in 0..self.axes[1].count {
            let rxy = self.rx[kx] * self.ry[ky];
            for kz in 0..nz {
                out[ky * nz + kz] = self.score(&rxy, kz, &mut buf);
            }
        }
    }

    fn slab_bounds(&self, kx: usize) -> PopulationBounds {
        let mut bounds = PopulationBounds::default();
        let mut slab = vec![DEGENERATE; self.plane()];
        self.score_slab(kx, &mut slab);
        slab.iter().filter(|t| !t[0].is_nan()).for_each(|t| bounds.push(*t));
        bounds
    }

    fn hypothesis(&self, flat: usize) -> [usize; 3] {
        let nz = self.axes[2].count;
        let ny = self.axes[1].count;
        [flat / (ny * nz), (flat / nz) % ny, flat % nz]
    }

    fn pose_of(&self, k: [usize; 3]) -> PoseHypothesis {
        let idx = [0, 1, 2].map(|a| self.axes[a].index(k[a]));
        let rxy = self.rx[k[0]] * self.ry[k[1]];
        let (_, t) = self.motion(&rxy, k[2]);
        PoseHypothesis::new(idx.map(|i| self.cfg.angle(i)), t)
    }

    fn raw_at(&self, k: [usize; 3]) -> [f64; 3] {
        let rxy = self.rx[k[0]] * self.ry[k[1]];
        self.score(&rxy, k[2], &mut Vec::new())
    }
}

/// Picks the lower Final CR, then the lower flat index.
#[inline]
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if a.0 < b.0 || (a.0 == b.0 && a.1 < b.1) {
        a
    } else {
        b
    }
}

const NO_WINNER: (f64, usize) = (f64::INFINITY, usize::MAX);

struct SweepOutcome {
    winner: [usize; 3],
    pose: PoseHypothesis,
    scores: CriterionScores,
    evaluated: usize,
    degenerate: usize,
    table: Option<Vec<[f64; 3]>>,
}

fn run_sweep(sweep: &Sweep<'_>, storage: ScoreStorage, keep_table: bool) -> Result<SweepOutcome> {
    let plane = sweep.plane();
    let nx = sweep.axes[0].count;
    let (bounds, best, table) = match storage {
        ScoreStorage::Table => {
            let mut table = vec![DEGENERATE; sweep.len()];
            table
                .par_chunks_mut(plane)
                .enumerate()
                .for_each(|(kx, slab)| sweep.score_slab(kx, slab));
            let bounds = table
                .par_chunks(plane)
                .map(|slab| {
                    let mut b = PopulationBounds::default();
                    slab.iter().filter(|t| !t[0].is_nan()).for_each(|t| b.push(*t));
                    b
                })
                .reduce(PopulationBounds::default, PopulationBounds::merge);
            let best = table
                .par_iter()
                .enumerate()
                .filter(|(_, t)| !t[0].is_nan())
                .map(|(i, t)| (crate::criteria::final_cr(bounds.normalize(*t)), i))
                .reduce(|| NO_WINNER, better);
            (bounds, best, keep_table.then_some(table))
        }
        ScoreStorage::Recompute => {
            let bounds = (0..nx)
                .into_par_iter()
                .map(|kx| sweep.slab_bounds(kx))
                .reduce(PopulationBounds::default, PopulationBounds::merge);
            let best = (0..nx)
                .into_par_iter()
                .map(|kx| {
                    let mut slab = vec![DEGENERATE; plane];
                    sweep.score_slab(kx, &mut slab);
                    slab.iter()
                        .enumerate()
                        .filter(|(_, t)| !t[0].is_nan())
                        .map(|(i, t)| (crate::criteria::final_cr(bounds.normalize(*t)), kx * plane + i))
                        .fold(NO_WINNER, better)
                })
                .reduce(|| NO_WINNER, better);
            (bounds, best, None)
        }
    };
    if bounds.count == 0 || best.1 == usize::MAX {
        return Err(Error::NoSolution);
    }
    let winner = sweep.hypothesis(best.1);
    let scores = bounds.score(sweep.raw_at(winner));
    Ok(SweepOutcome {
        winner,
        pose: sweep.pose_of(winner),
        scores,
        evaluated: sweep.len(),
        degenerate: sweep.len() - bounds.count,
        table,
    })
}

fn prepare(
    detected: &CornerSet,
    reference: &CornerSet,
    k: &Intrinsics,
    cfg: &SearchConfig,
) -> Result<(CornerSet, CornerSet, rayon::ThreadPool)> {
    cfg.validate()?;
    for set in [detected, reference] {
        if set.frame() != Frame::PixelImage {
            return Err(Error::WrongFrame {
                expected: Frame::PixelImage,
                found: set.frame(),
            });
        }
    }
    if detected.len() != reference.len() {
        return Err(Error::ButtonCountMismatch {
            detected: detected.len(),
            reference: reference.len(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.worker_count)
        .build()
        .map_err(|e| Error::InvalidSearchConfig(e.to_string()))?;
    Ok((pixels_to_spatial(detected, k)?, pixels_to_spatial(reference, k)?, pool))
}

fn finish(outcome: &SweepOutcome, evaluated: usize, degenerate: usize, started: Instant) -> SearchResult {
    SearchResult {
        best_pose: outcome.pose,
        best_final_cr: outcome.scores.final_cr.unwrap_or(f64::NAN),
        raw_scores_best: outcome.scores,
        residual_cos_norm: outcome.scores.cos_norm,
        hypotheses_evaluated: evaluated,
        degenerate_hypotheses: degenerate,
        stage_hypotheses: None,
        elapsed: started.elapsed().as_secs_f64(),
    }
}

/// Full-lattice search; dispatches to [`search_pose_coarse_to_fine`] when the
/// config asks for it.
pub fn search_pose(
    detected: &CornerSet,
    reference: &CornerSet,
    k: &Intrinsics,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    if cfg.coarse_to_fine {
        return search_pose_coarse_to_fine(detected, reference, k, cfg);
    }
    let started = Instant::now();
    let (d, e, pool) = prepare(detected, reference, k, cfg)?;
    let n = cfg.samples_per_axis();
    let sweep = Sweep::new(cfg, &d, &e, [AxisSamples::full(n); 3]);
    let outcome = pool.install(|| run_sweep(&sweep, cfg.storage, false))?;
    Ok(finish(&outcome, outcome.evaluated, outcome.degenerate, started))
}

/// Full-lattice search that also returns every raw triple.
pub fn search_pose_with_scores(
    detected: &CornerSet,
    reference: &CornerSet,
    k: &Intrinsics,
    cfg: &SearchConfig,
) -> Result<(SearchResult, ScoreTable)> {
    let started = Instant::now();
    let (d, e, pool) = prepare(detected, reference, k, cfg)?;
    let n = cfg.samples_per_axis();
    let sweep = Sweep::new(cfg, &d, &e, [AxisSamples::full(n); 3]);
    let outcome = pool.install(|| run_sweep(&sweep, ScoreStorage::Table, true))?;
    let result = finish(&outcome, outcome.evaluated, outcome.degenerate, started);
    let table = ScoreTable {
        angles: (0..n).map(|i| cfg.angle(i)).collect(),
        triples: outcome.table.unwrap_or_default(),
    };
    Ok((result, table))
}

/// Sweeps at step `4γ`, then refines a `±8γ` window around the coarse winner
/// at step `γ`. Every sampled angle lies on the full `γ` lattice. The fine
/// stage normalizes against its own population only.
pub fn search_pose_coarse_to_fine(
    detected: &CornerSet,
    reference: &CornerSet,
    k: &Intrinsics,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    let started = Instant::now();
    let (d, e, pool) = prepare(detected, reference, k, cfg)?;
    let n = cfg.samples_per_axis();
    let coarse_axis = AxisSamples {
        start: 0,
        stride: COARSE_FACTOR,
        count: (n - 1) / COARSE_FACTOR + 1,
    };
    let coarse = Sweep::new(cfg, &d, &e, [coarse_axis; 3]);
    let coarse_out = pool.install(|| run_sweep(&coarse, cfg.storage, false))?;

    let fine_axes = coarse_out.winner.map(|kc| {
        let centre = coarse_axis.index(kc);
        let lo = centre.saturating_sub(2 * COARSE_FACTOR);
        let hi = (centre + 2 * COARSE_FACTOR).min(n - 1);
        AxisSamples {
            start: lo,
            stride: 1,
            count: hi - lo + 1,
        }
    });
    let fine = Sweep::new(cfg, &d, &e, fine_axes);
    let fine_out = pool.install(|| run_sweep(&fine, cfg.storage, false))?;

    let mut result = finish(
        &fine_out,
        coarse_out.evaluated + fine_out.evaluated,
        coarse_out.degenerate + fine_out.degenerate,
        started,
    );
    result.stage_hypotheses = Some((coarse_out.evaluated, fine_out.evaluated));
    Ok(result)
}
