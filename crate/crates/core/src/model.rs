//! Domain types shared by every stage of the pipeline.
//!
//! Index conventions: the mathematical write-up numbers pairs `1..=K`,
//! modules `1..=M` and elements `1..=N`. Every public API in this crate is
//! 0-based, so module `m` of the write-up is index `m - 1` here and occupies
//! elements `(m - 1) * L .. m * L`.
//!
//! Phase convention: [`PhaseProfile::phi`] stacks the *conjugated* reflection
//! coefficients, i.e. element `n` multiplies its incident wave by
//! `conj(phi[n])`. With that convention `g_k^H Phi h_j = phi^H hbar_{j,k}`,
//! which is what makes the direct and quadratic SINR forms agree.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use thiserror::Error;

use crate::C64;

/// Magnitude slack allowed on `|phi_n| <= 1`.
pub const PHASE_MAG_TOL: f64 = 1e-8;

/// `watts = 10^((dBm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    Float::powf(10.0, (dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * Float::log10(watts) + 30.0
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * Float::log10(x)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("N = {n} but M * L = {m} * {l} = {}", m * l)]
    Dimension { n: usize, m: usize, l: usize },
    #[error("{0} must be at least 1")]
    Count(&'static str),
    #[error("{field} must be strictly positive (got {value})")]
    Positivity { field: &'static str, value: f64 },
    #[error("p_max has {got} entries, expected one per pair ({k})")]
    PowerLength { got: usize, k: usize },
    #[error("module budget Q = {q} outside 1..={m}")]
    Budget { q: usize, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("module index {index} out of range for {modules} modules")]
pub struct BlockIndexError {
    pub index: usize,
    pub modules: usize,
}

/// Planar deployment: ST cluster, DT cluster (both discs of the same
/// radius) and a fixed IRS. Meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub st_center: [f64; 2],
    pub dt_center: [f64; 2],
    pub cluster_radius: f64,
    pub irs_position: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossExponents {
    /// ST -> DT direct link (only used by the no-IRS baseline).
    pub direct: f64,
    pub st_irs: f64,
    pub irs_dt: f64,
}

/// Hardware power model for the energy-efficiency metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    /// Static power per ST, watts.
    pub p_st: f64,
    /// Static power per DT, watts.
    pub p_dt: f64,
    /// Amplifier inefficiency multiplier on radiated power.
    pub xi_st: f64,
    /// Power drawn per reflecting element of an active module, watts.
    pub element_power: f64,
}

/// How per-link fading variances are derived from distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceModel {
    /// `10^(-ref_loss_db/10) * d^(-exponent)`.
    #[default]
    ReferenceLoss,
    /// `(200 / d)^exponent`.
    Ratio200,
}

/// Every scenario constant of a simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Number of ST-DT pairs.
    pub k: usize,
    /// Number of IRS modules.
    pub m: usize,
    /// Reflecting elements per module.
    pub l: usize,
    /// Total reflecting elements, must equal `m * l`.
    pub n: usize,
    /// Per-ST transmit power cap, watts.
    pub p_max: Vec<f64>,
    /// Receiver noise power, watts.
    pub sigma2: f64,
    /// Optional cap on the number of active modules.
    pub q: Option<usize>,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub geometry: GeometryConfig,
    pub exponents: PathLossExponents,
    pub ref_loss_db: f64,
    pub power_model: PowerModel,
    pub variance_model: VarianceModel,
}

impl NetworkConfig {
    /// The evaluation scenario: 20 dBm per ST, -90 dBm noise, 2.3 GHz carrier,
    /// 10 MHz bandwidth, STs around (0,0), DTs around (200,0), IRS at
    /// (120,50), 2 m cluster radius, exponents 3.5 / 2 / 2.1 with 30 dB loss at
    /// 1 m, 10 dBm static power per terminal, 0.01 W per element and
    /// amplifier factor 1.2.
    pub fn reference(k: usize, m: usize, l: usize) -> Self {
        NetworkConfig {
            k,
            m,
            l,
            n: m * l,
            p_max: vec![dbm_to_watts(20.0); k],
            sigma2: dbm_to_watts(-90.0),
            q: None,
            carrier_hz: 2.3e9,
            bandwidth_hz: 10e6,
            geometry: GeometryConfig {
                st_center: [0.0, 0.0],
                dt_center: [200.0, 0.0],
                cluster_radius: 2.0,
                irs_position: [120.0, 50.0],
            },
            exponents: PathLossExponents {
                direct: 3.5,
                st_irs: 2.0,
                irs_dt: 2.1,
            },
            ref_loss_db: 30.0,
            power_model: PowerModel {
                p_st: dbm_to_watts(10.0),
                p_dt: dbm_to_watts(10.0),
                xi_st: 1.2,
                element_power: 0.01,
            },
            variance_model: VarianceModel::ReferenceLoss,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::Count("K"));
        }
        if self.m == 0 {
            return Err(ConfigError::Count("M"));
        }
        if self.l == 0 {
            return Err(ConfigError::Count("L"));
        }
        if self.n != self.m * self.l {
            return Err(ConfigError::Dimension {
                n: self.n,
                m: self.m,
                l: self.l,
            });
        }
        if self.p_max.len() != self.k {
            return Err(ConfigError::PowerLength {
                got: self.p_max.len(),
                k: self.k,
            });
        }
        for &p in &self.p_max {
            positive("p_max", p)?;
        }
        positive("sigma2", self.sigma2)?;
        positive("carrier_hz", self.carrier_hz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        let pm = &self.power_model;
        positive("P_ST", pm.p_st)?;
        positive("P_DT", pm.p_dt)?;
        positive("xi_ST", pm.xi_st)?;
        positive("element_power", pm.element_power)?;
        let e = &self.exponents;
        positive("exponents.direct", e.direct)?;
        positive("exponents.st_irs", e.st_irs)?;
        positive("exponents.irs_dt", e.irs_dt)?;
        let geo = &self.geometry;
        if !(geo.cluster_radius >= 0.0) || !geo.cluster_radius.is_finite() {
            return Err(ConfigError::Positivity {
                field: "cluster_radius",
                value: geo.cluster_radius,
            });
        }
        positive("ST-IRS distance", dist(geo.st_center, geo.irs_position))?;
        positive("IRS-DT distance", dist(geo.irs_position, geo.dt_center))?;
        positive("ST-DT distance", dist(geo.st_center, geo.dt_center))?;
        if let Some(q) = self.q {
            if q == 0 || q > self.m {
                return Err(ConfigError::Budget { q, m: self.m });
            }
        }
        Ok(())
    }

    pub fn max_p_max(&self) -> f64 {
        self.p_max.iter().copied().fold(0.0, f64::max)
    }

    /// Per-module power draw `P(L)`.
    pub fn module_power(&self) -> f64 {
        self.l as f64 * self.power_model.element_power
    }
}

/// Consuming form of [`NetworkConfig::validate`].
pub fn validate(config: NetworkConfig) -> Result<NetworkConfig, ConfigError> {
    config.validate()?;
    Ok(config)
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Positivity { field, value })
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    Float::hypot(a[0] - b[0], a[1] - b[1])
}

/// Block `m` (0-based) of a length-`M*L` vector.
pub fn block_view<T>(v: &[T], l: usize, m: usize) -> Result<&[T], BlockIndexError> {
    let modules = if l == 0 { 0 } else { v.len() / l };
    if m >= modules {
        return Err(BlockIndexError { index: m, modules });
    }
    Ok(&v[m * l..(m + 1) * l])
}

pub fn block_view_mut<T>(v: &mut [T], l: usize, m: usize) -> Result<&mut [T], BlockIndexError> {
    let modules = if l == 0 { 0 } else { v.len() / l };
    if m >= modules {
        return Err(BlockIndexError { index: m, modules });
    }
    Ok(&mut v[m * l..(m + 1) * l])
}

/// Interleaved `(re, im)` view of a complex slice, length `2 * v.len()`.
pub fn real_view(v: &[C64]) -> &[f64] {
    bytemuck::cast_slice(v)
}

pub fn real_view_mut(v: &mut [C64]) -> &mut [f64] {
    bytemuck::cast_slice_mut(v)
}

/// One channel realization.
///
/// `h[k]` is ST k -> IRS and `g[k]` is IRS -> DT k, both length `N` with
/// module `m` occupying `m*L .. (m+1)*L`. `direct` is `K x K` row-major with
/// `direct[j*K + k]` the ST j -> DT k gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    pub h: Vec<Vec<C64>>,
    pub g: Vec<Vec<C64>>,
    pub direct: Vec<C64>,
}

impl ChannelSet {
    pub fn n(&self) -> usize {
        self.m * self.l
    }

    pub fn direct(&self, from_st: usize, to_dt: usize) -> C64 {
        self.direct[from_st * self.k + to_dt]
    }

    pub fn h_block(&self, k: usize, m: usize) -> Result<&[C64], BlockIndexError> {
        block_view(&self.h[k], self.l, m)
    }

    pub fn g_block(&self, k: usize, m: usize) -> Result<&[C64], BlockIndexError> {
        block_view(&self.g[k], self.l, m)
    }

    pub fn is_finite(&self) -> bool {
        let fin = |c: &C64| c.re.is_finite() && c.im.is_finite();
        self.h.iter().flatten().all(fin)
            && self.g.iter().flatten().all(fin)
            && self.direct.iter().all(fin)
    }
}

/// Reflection profile (see the module docs for the conjugation convention).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub phi: Vec<C64>,
    pub l: usize,
}

impl PhaseProfile {
    pub fn zeros(m: usize, l: usize) -> Self {
        PhaseProfile {
            phi: vec![C64::new(0.0, 0.0); m * l],
            l,
        }
    }

    pub fn new(phi: Vec<C64>, l: usize) -> Self {
        PhaseProfile { phi, l }
    }

    pub fn modules(&self) -> usize {
        self.phi.len() / self.l
    }

    pub fn block(&self, m: usize) -> Result<&[C64], BlockIndexError> {
        block_view(&self.phi, self.l, m)
    }

    pub fn block_mut(&mut self, m: usize) -> Result<&mut [C64], BlockIndexError> {
        block_view_mut(&mut self.phi, self.l, m)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.phi.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `|phi_n| <= 1 + PHASE_MAG_TOL` everywhere.
    pub fn within_unit_disc(&self) -> bool {
        self.phi.iter().all(|c| c.norm() <= 1.0 + PHASE_MAG_TOL)
    }

    /// Zeroes every block outside `mask`.
    pub fn restrict_to(&mut self, mask: &ModuleMask) {
        for (m, &on) in mask.active.iter().enumerate() {
            if !on {
                for c in &mut self.phi[m * self.l..(m + 1) * self.l] {
                    *c = C64::new(0.0, 0.0);
                }
            }
        }
    }

    /// Indices of nonzero entries, i.e. the diagonal support of `Phi`.
    pub fn support(&self) -> Vec<usize> {
        self.phi
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Multiplies every coefficient by the same unit-modulus scalar.
    pub fn rotated(&self, angle: f64) -> Self {
        let r = C64::from_polar(1.0, angle);
        PhaseProfile {
            phi: self.phi.iter().map(|c| c * r).collect(),
            l: self.l,
        }
    }

    pub fn as_real(&self) -> &[f64] {
        real_view(&self.phi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(p: Vec<f64>) -> Self {
        PowerAllocation { p }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn within(&self, p_max: &[f64], tol: f64) -> bool {
        self.p.len() == p_max.len()
            && self
                .p
                .iter()
                .zip(p_max)
                .all(|(&p, &cap)| p >= -tol && p <= cap * (1.0 + tol) + tol)
    }
}

/// Which modules are switched on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModuleMask {
    pub active: Vec<bool>,
}

impl ModuleMask {
    pub fn none(m: usize) -> Self {
        ModuleMask {
            active: vec![false; m],
        }
    }

    pub fn all(m: usize) -> Self {
        ModuleMask {
            active: vec![true; m],
        }
    }

    pub fn from_indices(m: usize, indices: &[usize]) -> Self {
        let mut mask = Self::none(m);
        for &i in indices {
            mask.active[i] = true;
        }
        mask
    }

    pub fn cardinality(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    pub fn indices(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i)
            .collect()
    }

    /// Element indices covered by active modules, ascending.
    pub fn element_indices(&self, l: usize) -> Vec<usize> {
        self.indices()
            .into_iter()
            .flat_map(|m| m * l..(m + 1) * l)
            .collect()
    }
}

/// Output of the group-sparse relaxation at the bisection optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    /// Columns `phi_bar[k]`, each of length `N`.
    pub phi_bar: Vec<Vec<C64>>,
    /// `||Phi_bar^m||_F` per module.
    pub block_norms: Vec<f64>,
    pub gamma: f64,
    pub alpha: f64,
    /// `alpha * sum(block_norms)`.
    pub objective: f64,
}

impl SparseSolution {
    pub fn from_columns(phi_bar: Vec<Vec<C64>>, l: usize, gamma: f64, alpha: f64) -> Self {
        let block_norms = row_block_norms(&phi_bar, l);
        let objective = alpha * block_norms.iter().sum::<f64>();
        SparseSolution {
            phi_bar,
            block_norms,
            gamma,
            alpha,
            objective,
        }
    }

    pub fn zero(k: usize, m: usize, l: usize, alpha: f64) -> Self {
        Self::from_columns(vec![vec![C64::new(0.0, 0.0); m * l]; k], l, 0.0, alpha)
    }
}

/// Frobenius norm of every `L x K` row block of the `N x K` matrix whose
/// columns are given.
pub fn row_block_norms(columns: &[Vec<C64>], l: usize) -> Vec<f64> {
    let n = columns.first().map_or(0, Vec::len);
    let m = if l == 0 { 0 } else { n / l };
    (0..m)
        .map(|b| {
            let ss: f64 = columns
                .iter()
                .flat_map(|col| &col[b * l..(b + 1) * l])
                .map(|c| c.norm_sqr())
                .sum();
            Float::sqrt(ss)
        })
        .collect()
}

/// Mixed `l1,F` norm: sum over modules of row-block Frobenius norms.
pub fn mixed_norm(columns: &[Vec<C64>], l: usize) -> f64 {
    row_block_norms(columns, l).iter().sum()
}
