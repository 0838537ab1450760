//! Seeded Monte-Carlo sweeps over the sparsity budget `delta`.
//!
//! Every realization is independent: its seed is `mix(master_seed, index)`
//! and nothing it computes depends on other realizations, so the sweep runs
//! them in parallel and still produces the same records in the same order for
//! any thread count.
//!
//! Per realization the proposed scheme runs one [`Bisector`] over the whole
//! grid (earlier budgets tighten the brackets of later ones) and solves
//! [`algorithm1`] once per distinct module mask. The random-selection
//! baseline reuses that cache, so a random subset that happens to equal the
//! proposed mask gets exactly the proposed result.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use irs_core::altopt::{algorithm1, optimize_powers, AltOptSettings};
use irs_core::channel::draw_realization;
use irs_core::conic::ConicSolver;
use irs_core::metrics::{
    direct_gains, energy_efficiency, min_of, precompute, sinr_from_gains, sum_rate, total_power, AggregateH,
};
use irs_core::model::{linear_to_db, ChannelSet, ConfigError, ModuleMask, NetworkConfig, PowerAllocation};
use irs_core::rng::{mix, substream, StreamTag};
use irs_core::sparsity::{delta_upper_bound, identify_modules, Bisector, SparsityParams};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Seed tag of the initial phases of [`algorithm1`]. Shared by the proposed
/// and random-selection schemes so that equal masks give equal results.
const PHASE_INIT_TAG: u64 = 0x7068_6173_65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Proposed,
    Mrs,
    NoIrs,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::Mrs, Scheme::NoIrs];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Mrs => "mrs",
            Scheme::NoIrs => "no_irs",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Scheme::Proposed => 1,
            Scheme::Mrs => 2,
            Scheme::NoIrs => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| HarnessError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("delta grid is empty")]
    EmptyGrid,
    #[error("delta must be positive and finite (got {0})")]
    BadDelta(f64),
    #[error("cannot parse delta grid `{0}` (expected lo:hi:step or a comma list)")]
    Grid(String),
    #[error("n_realizations must be at least 1")]
    NoRealizations,
    #[error("no schemes selected")]
    NoSchemes,
    #[error("scheme `{0}` listed twice")]
    DuplicateScheme(Scheme),
    #[error("unknown scheme `{0}` (expected proposed, mrs or no_irs)")]
    UnknownScheme(String),
    #[error("no records to aggregate")]
    NoRecords,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: NetworkConfig,
    pub delta_grid: Vec<f64>,
    pub n_realizations: usize,
    pub master_seed: u64,
    pub schemes: Vec<Scheme>,
    pub output_dir: PathBuf,
    /// Also collect bisection and alternating-optimization traces.
    pub debug: bool,
}

impl ExperimentSpec {
    /// All three schemes, output to `./out`, no traces.
    pub fn new(config: NetworkConfig, delta_grid: Vec<f64>, n_realizations: usize, master_seed: u64) -> Self {
        ExperimentSpec {
            config,
            delta_grid,
            n_realizations,
            master_seed,
            schemes: Scheme::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            debug: false,
        }
    }

    /// Budgets above [`delta_upper_bound`] are allowed; see
    /// [`ExperimentSpec::deltas_above_bound`].
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.config.validate()?;
        if self.delta_grid.is_empty() {
            return Err(HarnessError::EmptyGrid);
        }
        if let Some(&d) = self.delta_grid.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(HarnessError::BadDelta(d));
        }
        if self.n_realizations == 0 {
            return Err(HarnessError::NoRealizations);
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::NoSchemes);
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(HarnessError::DuplicateScheme(*s));
            }
        }
        Ok(())
    }

    pub fn deltas_above_bound(&self) -> Vec<f64> {
        let ub = delta_upper_bound(&self.config);
        self.delta_grid.iter().copied().filter(|&d| d > ub).collect()
    }
}

/// `lo:hi:step` (inclusive of `hi` up to rounding) or `a,b,c`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Grid(text.to_string());
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, hi, step] => {
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(bad());
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|i| lo + i as f64 * step).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

pub fn parse_schemes(text: &str) -> Result<Vec<Scheme>, HarnessError> {
    text.split(',').map(str::parse).collect()
}

pub fn realization_seed(master_seed: u64, index: usize) -> u64 {
    mix(master_seed, index as u64)
}

/// One (scheme, delta, realization) outcome.
///
/// A failed record has an empty-mask or solver tag in `failure`, zero
/// metrics, and is left out of every average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub scheme: Scheme,
    pub delta: f64,
    pub realization: usize,
    pub max_min_sinr: f64,
    pub max_min_sinr_db: f64,
    pub n_active_modules: usize,
    pub total_transmit_power_w: f64,
    /// Consumed power including static and module terms.
    pub total_power_w: f64,
    /// Bits/s/Hz.
    pub sum_rate: f64,
    /// Bits/Joule/Hz.
    pub ee: f64,
    /// Target reached by the relaxed problem; zero for the baselines.
    pub relaxed_gamma: f64,
    pub failure: String,
}

impl SweepRecord {
    pub fn ok(&self) -> bool {
        self.failure.is_empty()
    }

    fn failed(scheme: Scheme, delta: f64, realization: usize, tag: String) -> Self {
        SweepRecord {
            scheme,
            delta,
            realization,
            max_min_sinr: 0.0,
            max_min_sinr_db: 0.0,
            n_active_modules: 0,
            total_transmit_power_w: 0.0,
            total_power_w: 0.0,
            sum_rate: 0.0,
            ee: 0.0,
            relaxed_gamma: 0.0,
            failure: tag,
        }
    }
}

/// One fixed-target solve inside a bisection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BisectionRow {
    pub realization: usize,
    pub delta: f64,
    pub gamma: f64,
    pub value: f64,
    pub feasible: bool,
    pub status: String,
    /// `;`-separated per-module norms.
    pub block_norms: String,
}

/// One step of an [`algorithm1`] run, keyed by the module mask it ran on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AltOptRow {
    pub realization: usize,
    /// Active module indices, `;`-separated.
    pub mask: String,
    pub iteration: usize,
    pub step: String,
    pub gamma_out: f64,
    pub min_sinr_true: f64,
    pub solver_status: String,
    pub accepted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub bisection: Vec<BisectionRow>,
    pub altopt: Vec<AltOptRow>,
}

#[derive(Debug, Clone)]
struct Selection {
    gamma: f64,
    mask: Result<ModuleMask, String>,
}

#[derive(Debug, Clone)]
struct Solved {
    sinrs: Vec<f64>,
    powers: Vec<f64>,
}

fn join<T: fmt::Display>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// Lazily shared work of one realization.
struct Realization<'a> {
    spec: &'a ExperimentSpec,
    index: usize,
    seed: u64,
    channels: Result<(ChannelSet, AggregateH), String>,
    selections: Option<Vec<Selection>>,
    solved: HashMap<Vec<bool>, Result<Solved, String>>,
    out: SweepOutput,
}

impl<'a> Realization<'a> {
    fn new(spec: &'a ExperimentSpec, index: usize) -> Self {
        let seed = realization_seed(spec.master_seed, index);
        let channels = match draw_realization(&spec.config, seed) {
            Ok((_, ch)) if ch.is_finite() => {
                let agg = precompute(&ch);
                Ok((ch, agg))
            }
            Ok(_) => Err("channel:nonfinite".to_string()),
            Err(e) => Err(format!("channel:{e}")),
        };
        Realization {
            spec,
            index,
            seed,
            channels,
            selections: None,
            solved: HashMap::new(),
            out: SweepOutput::default(),
        }
    }

    fn selections(&mut self) -> &[Selection] {
        if self.selections.is_none() {
            let sel = self.select_all();
            self.selections = Some(sel);
        }
        self.selections.as_deref().unwrap()
    }

    fn select_all(&mut self) -> Vec<Selection> {
        let spec = self.spec;
        let (_, agg) = match &self.channels {
            Ok(c) => c,
            Err(tag) => {
                return spec
                    .delta_grid
                    .iter()
                    .map(|_| Selection {
                        gamma: 0.0,
                        mask: Err(tag.clone()),
                    })
                    .collect()
            }
        };
        let mut bisector = Bisector::new(agg, &spec.config);
        let mut out = Vec::with_capacity(spec.delta_grid.len());
        for &delta in &spec.delta_grid {
            let params = match SparsityParams::for_delta(delta) {
                Ok(p) => p,
                Err(e) => {
                    out.push(Selection {
                        gamma: 0.0,
                        mask: Err(format!("bisection:{e}")),
                    });
                    continue;
                }
            };
            let sel = match bisector.run(&params) {
                Ok(outcome) => {
                    if spec.debug {
                        self.out.bisection.extend(outcome.trace.iter().map(|s| BisectionRow {
                            realization: self.index,
                            delta,
                            gamma: s.gamma,
                            value: s.value,
                            feasible: s.feasible,
                            status: s.status.as_str().to_string(),
                            block_norms: join(&s.block_norms),
                        }));
                    }
                    Selection {
                        gamma: outcome.solution.gamma,
                        mask: identify_modules(&outcome.solution, &spec.config, &params)
                            .map_err(|_| "degenerate_mask".to_string()),
                    }
                }
                Err(e) => Selection {
                    gamma: 0.0,
                    mask: Err(format!("bisection:{e}")),
                },
            };
            out.push(sel);
        }
        out
    }

    fn solve(&mut self, mask: &ModuleMask) -> Result<Solved, String> {
        if let Some(hit) = self.solved.get(&mask.active) {
            return hit.clone();
        }
        let result = self.solve_fresh(mask);
        self.solved.insert(mask.active.clone(), result.clone());
        result
    }

    fn solve_fresh(&mut self, mask: &ModuleMask) -> Result<Solved, String> {
        let (ch, agg) = self.channels.as_ref().map_err(Clone::clone)?;
        let cfg = &self.spec.config;
        let settings = AltOptSettings {
            seed: mix(self.seed, PHASE_INIT_TAG),
            ..AltOptSettings::default()
        };
        let state = algorithm1(ch, mask, cfg, &settings).map_err(|e| format!("altopt:{e}"))?;
        if self.spec.debug {
            let m = join(mask.indices());
            self.out.altopt.extend(state.trace.iter().map(|t| AltOptRow {
                realization: self.index,
                mask: m.clone(),
                iteration: t.iteration,
                step: t.step.as_str().to_string(),
                gamma_out: t.gamma_out,
                min_sinr_true: t.min_sinr_true,
                solver_status: t.solver_status.map_or("", |s| s.as_str()).to_string(),
                accepted: t.accepted,
            }));
        }
        let sinrs = sinr_from_gains(&agg.effective_gains(&state.phases), &state.powers.p, cfg.sigma2);
        Ok(Solved {
            sinrs,
            powers: state.powers.p,
        })
    }

    fn record(
        &self,
        scheme: Scheme,
        delta: f64,
        mask: &ModuleMask,
        solved: &Solved,
        relaxed_gamma: f64,
    ) -> SweepRecord {
        let cfg = &self.spec.config;
        let powers = PowerAllocation::new(solved.powers.clone());
        let min_sinr = min_of(&solved.sinrs);
        let rate = sum_rate(&solved.sinrs);
        let consumed = total_power(&powers, mask, cfg);
        let ee = energy_efficiency(rate, consumed).unwrap_or(f64::NAN);
        let rec = SweepRecord {
            scheme,
            delta,
            realization: self.index,
            max_min_sinr: min_sinr,
            max_min_sinr_db: linear_to_db(min_sinr),
            n_active_modules: mask.cardinality(),
            total_transmit_power_w: powers.total(),
            total_power_w: consumed,
            sum_rate: rate,
            ee,
            relaxed_gamma,
            failure: String::new(),
        };
        let finite = [
            rec.max_min_sinr,
            rec.max_min_sinr_db,
            rec.total_transmit_power_w,
            rec.total_power_w,
            rec.sum_rate,
            rec.ee,
            rec.relaxed_gamma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if finite {
            rec
        } else {
            SweepRecord::failed(scheme, delta, self.index, "nonfinite".to_string())
        }
    }

    fn proposed(&mut self) -> Vec<SweepRecord> {
        let sels = self.selections().to_vec();
        let grid = &self.spec.delta_grid;
        let mut out = Vec::with_capacity(grid.len());
        for (&delta, sel) in grid.iter().zip(&sels) {
            let rec = match &sel.mask {
                Ok(mask) => match self.solve(mask) {
                    Ok(s) => self.record(Scheme::Proposed, delta, mask, &s, sel.gamma),
                    Err(tag) => SweepRecord::failed(Scheme::Proposed, delta, self.index, tag),
                },
                Err(tag) => SweepRecord::failed(Scheme::Proposed, delta, self.index, tag.clone()),
            };
            out.push(rec);
        }
        out
    }

    /// Uniform subset with the proposed cardinality at the same budget.
    fn mrs_mask(&self, delta_index: usize, cardinality: usize) -> ModuleMask {
        let m = self.spec.config.m;
        let mut rng = substream(
            mix(self.seed, Scheme::Mrs.tag()),
            StreamTag::ModuleSubset,
            delta_index as u64,
        );
        let mut idx = sample(&mut rng, m, cardinality).into_vec();
        idx.sort_unstable();
        ModuleMask::from_indices(m, &idx)
    }

    fn mrs(&mut self) -> Vec<SweepRecord> {
        let sels = self.selections().to_vec();
        let grid = self.spec.delta_grid.clone();
        let mut out = Vec::with_capacity(grid.len());
        for (i, (&delta, sel)) in grid.iter().zip(&sels).enumerate() {
            let rec = match &sel.mask {
                Ok(paired) => {
                    let mask = self.mrs_mask(i, paired.cardinality());
                    match self.solve(&mask) {
                        Ok(s) => self.record(Scheme::Mrs, delta, &mask, &s, 0.0),
                        Err(tag) => SweepRecord::failed(Scheme::Mrs, delta, self.index, tag),
                    }
                }
                Err(tag) => SweepRecord::failed(Scheme::Mrs, delta, self.index, format!("no_pairing:{tag}")),
            };
            out.push(rec);
        }
        out
    }

    /// Direct links only, max-min power control, no module power.
    fn no_irs(&mut self) -> Vec<SweepRecord> {
        let grid = &self.spec.delta_grid;
        let cfg = &self.spec.config;
        let solved = match &self.channels {
            Ok((ch, _)) => {
                let gains = direct_gains(ch);
                let mut solver = ConicSolver::default();
                optimize_powers(&gains, &cfg.p_max, cfg.sigma2, &cfg.p_max, &mut solver)
                    .map(|(p, _, _)| Solved {
                        sinrs: sinr_from_gains(&gains, &p, cfg.sigma2),
                        powers: p,
                    })
                    .map_err(|e| format!("power:{e}"))
            }
            Err(tag) => Err(tag.clone()),
        };
        let none = ModuleMask::none(cfg.m);
        grid.iter()
            .map(|&delta| match &solved {
                Ok(s) => self.record(Scheme::NoIrs, delta, &none, s, 0.0),
                Err(tag) => SweepRecord::failed(Scheme::NoIrs, delta, self.index, tag.clone()),
            })
            .collect()
    }

    fn run(mut self) -> SweepOutput {
        let mut records = Vec::new();
        for &scheme in &self.spec.schemes.clone() {
            records.extend(match scheme {
                Scheme::Proposed => self.proposed(),
                Scheme::Mrs => self.mrs(),
                Scheme::NoIrs => self.no_irs(),
            });
        }
        self.out.records = records;
        self.out
    }
}

/// Proposed-scheme records of one realization, one per budget.
pub fn run_proposed(spec: &ExperimentSpec, realization: usize) -> Vec<SweepRecord> {
    Realization::new(spec, realization).proposed()
}

/// Random-selection records paired with [`run_proposed`].
pub fn run_mrs(spec: &ExperimentSpec, realization: usize) -> Vec<SweepRecord> {
    Realization::new(spec, realization).mrs()
}

/// Direct-link baseline; the same outcome is replicated over the grid.
pub fn run_no_irs(spec: &ExperimentSpec, realization: usize) -> Vec<SweepRecord> {
    Realization::new(spec, realization).no_irs()
}

/// Records of every selected scheme (in `spec.schemes` order, then budget
/// order) plus traces when `spec.debug` is set.
pub fn run_realization(spec: &ExperimentSpec, realization: usize) -> SweepOutput {
    Realization::new(spec, realization).run()
}

/// All realizations, in index order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepOutput, HarnessError> {
    spec.validate()?;
    let parts: Vec<SweepOutput> = (0..spec.n_realizations)
        .into_par_iter()
        .map(|r| run_realization(spec, r))
        .collect();
    let mut out = SweepOutput::default();
    for p in parts {
        out.records.extend(p.records);
        out.bisection.extend(p.bisection);
        out.altopt.extend(p.altopt);
    }
    Ok(out)
}

/// The four plotted quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Max-min SINR (linear).
    MinSinr,
    ActiveModules,
    TransmitPower,
    EnergyEfficiency,
}

impl Figure {
    pub const ALL: [Figure; 4] = [
        Figure::MinSinr,
        Figure::ActiveModules,
        Figure::TransmitPower,
        Figure::EnergyEfficiency,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Figure::MinSinr => "fig_a.csv",
            Figure::ActiveModules => "fig_b.csv",
            Figure::TransmitPower => "fig_c.csv",
            Figure::EnergyEfficiency => "fig_d.csv",
        }
    }

    pub fn value(self, r: &SweepRecord) -> f64 {
        match self {
            Figure::MinSinr => r.max_min_sinr,
            Figure::ActiveModules => r.n_active_modules as f64,
            Figure::TransmitPower => r.total_transmit_power_w,
            Figure::EnergyEfficiency => r.ee,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRow {
    pub scheme: Scheme,
    pub delta: f64,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean and standard error (sample deviation over `sqrt(n)`; zero for a
/// single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    /// Rows of each figure, ordered by scheme then budget.
    pub figures: Vec<(Figure, Vec<FigureRow>)>,
    /// Failed records per scheme.
    pub failures: Vec<(Scheme, usize)>,
}

impl Aggregate {
    pub fn rows(&self, figure: Figure) -> &[FigureRow] {
        self.figures
            .iter()
            .find(|(f, _)| *f == figure)
            .map(|(_, r)| r.as_slice())
            .unwrap_or(&[])
    }
}

/// Per-(scheme, delta) means of each figure quantity over the successful
/// records. EE is averaged per realization (mean of rate / power), not as
/// a ratio of means.
pub fn aggregate(records: &[SweepRecord]) -> Result<Aggregate, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    let mut keys: Vec<(Scheme, f64)> = Vec::new();
    let mut groups: HashMap<(Scheme, u64), Vec<&SweepRecord>> = HashMap::new();
    let mut failures: Vec<(Scheme, usize)> = Vec::new();
    for r in records {
        let key = (r.scheme, r.delta.to_bits());
        let group = groups.entry(key).or_insert_with(|| {
            keys.push((r.scheme, r.delta));
            Vec::new()
        });
        if r.ok() {
            group.push(r);
        } else {
            match failures.iter_mut().find(|(s, _)| *s == r.scheme) {
                Some((_, c)) => *c += 1,
                None => failures.push((r.scheme, 1)),
            }
        }
    }
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    failures.sort();
    let figures = Figure::ALL
        .iter()
        .map(|&fig| {
            let rows = keys
                .iter()
                .filter_map(|&(scheme, delta)| {
                    let g = &groups[&(scheme, delta.to_bits())];
                    if g.is_empty() {
                        return None;
                    }
                    let vals: Vec<f64> = g.iter().map(|r| fig.value(r)).collect();
                    let (mean, stderr) = mean_stderr(&vals);
                    Some(FigureRow {
                        scheme,
                        delta,
                        mean,
                        stderr,
                        n: vals.len(),
                    })
                })
                .collect();
            (fig, rows)
        })
        .collect();
    Ok(Aggregate { figures, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> ExperimentSpec {
        let cfg = NetworkConfig::reference(2, 3, 2);
        ExperimentSpec::new(cfg, vec![0.5, 1.0, 2.0], 2, 11)
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("4.5:6.5:0.25").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], 4.5);
        assert!((g[8] - 6.5).abs() < 1e-12);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("3").unwrap(), vec![3.0]);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("a:b").is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!(
            parse_schemes("proposed,no_irs").unwrap(),
            vec![Scheme::Proposed, Scheme::NoIrs]
        );
        assert!(parse_schemes("proposed,bogus").is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = small_spec();
        assert!(s.validate().is_ok());
        s.delta_grid = vec![1.0, 0.0];
        assert!(matches!(s.validate(), Err(HarnessError::BadDelta(_))));
        s.delta_grid = vec![];
        assert!(matches!(s.validate(), Err(HarnessError::EmptyGrid)));
        let mut s = small_spec();
        s.n_realizations = 0;
        assert!(matches!(s.validate(), Err(HarnessError::NoRealizations)));
        let mut s = small_spec();
        s.schemes = vec![Scheme::Mrs, Scheme::Mrs];
        assert!(matches!(s.validate(), Err(HarnessError::DuplicateScheme(Scheme::Mrs))));
    }

    #[test]
    fn single_record_has_zero_stderr() {
        let spec = small_spec();
        let recs = run_no_irs(&spec, 0);
        let agg = aggregate(&recs[..1]).unwrap();
        let row = &agg.rows(Figure::MinSinr)[0];
        assert_eq!(row.n, 1);
        assert_eq!(row.mean, recs[0].max_min_sinr);
        assert_eq!(row.stderr, 0.0);
    }

    #[test]
    fn mean_and_stderr_by_hand() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3, over n = 4
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ee_is_mean_of_ratios() {
        let mk = |rate: f64, power: f64| SweepRecord {
            scheme: Scheme::Proposed,
            delta: 1.0,
            realization: 0,
            max_min_sinr: 1.0,
            max_min_sinr_db: 0.0,
            n_active_modules: 1,
            total_transmit_power_w: 0.1,
            total_power_w: power,
            sum_rate: rate,
            ee: rate / power,
            relaxed_gamma: 1.0,
            failure: String::new(),
        };
        let recs = [mk(1.0, 1.0), mk(3.0, 2.0)];
        let agg = aggregate(&recs).unwrap();
        let ee = agg.rows(Figure::EnergyEfficiency)[0].mean;
        assert!((ee - 1.25).abs() < 1e-15);
        assert!((ee - 4.0 / 3.0).abs() > 0.05);
    }

    #[test]
    fn failed_records_are_excluded_and_counted() {
        let spec = small_spec();
        let mut recs = run_no_irs(&spec, 0);
        recs.push(SweepRecord::failed(Scheme::NoIrs, 0.5, 9, "x".into()));
        let agg = aggregate(&recs).unwrap();
        assert_eq!(agg.rows(Figure::MinSinr)[0].n, 1);
        assert_eq!(agg.failures, vec![(Scheme::NoIrs, 1)]);
        assert!(matches!(aggregate(&[]), Err(HarnessError::NoRecords)));
    }

    #[test]
    fn no_irs_single_pair_closed_form() {
        let cfg = NetworkConfig::reference(1, 2, 1);
        let spec = ExperimentSpec::new(cfg.clone(), vec![1.0, 2.0], 1, 5);
        let recs = run_no_irs(&spec, 0);
        let (_, ch) = draw_realization(&cfg, realization_seed(5, 0)).unwrap();
        let want = cfg.p_max[0] * ch.direct[0].norm_sqr() / cfg.sigma2;
        for r in &recs {
            assert!(r.ok());
            assert!((r.max_min_sinr - want).abs() < 1e-6 * want, "{} vs {want}", r.max_min_sinr);
            assert_eq!(r.n_active_modules, 0);
        }
        assert_eq!(recs[0].max_min_sinr, recs[1].max_min_sinr);
    }

    #[test]
    fn mrs_matches_proposed_cardinality() {
        let spec = small_spec();
        for r in 0..2 {
            let p = run_proposed(&spec, r);
            let m = run_mrs(&spec, r);
            for (a, b) in p.iter().zip(&m) {
                assert!(a.ok() && b.ok());
                assert_eq!(a.n_active_modules, b.n_active_modules);
                assert!(a.n_active_modules <= spec.config.m);
            }
        }
    }

    #[test]
    fn tiny_budget_is_flagged_degenerate() {
        let mut spec = small_spec();
        spec.delta_grid = vec![1e-9];
        let rec = &run_proposed(&spec, 0)[0];
        assert!(!rec.ok());
        assert_eq!(rec.failure, "degenerate_mask");
        assert!(run_mrs(&spec, 0)[0].failure.starts_with("no_pairing"));
    }

    #[test]
    fn realization_output_is_ordered_and_repeatable() {
        let mut spec = small_spec();
        spec.debug = true;
        let a = run_realization(&spec, 1);
        let b = run_realization(&spec, 1);
        assert_eq!(a, b);
        let schemes: Vec<Scheme> = a.records.iter().map(|r| r.scheme).collect();
        assert_eq!(schemes[..3], [Scheme::Proposed; 3]);
        assert_eq!(schemes[6..], [Scheme::NoIrs; 3]);
        assert!(!a.bisection.is_empty());
        assert!(!a.altopt.is_empty());
        assert_eq!(run_proposed(&spec, 1), a.records[..3].to_vec());
    }
}
