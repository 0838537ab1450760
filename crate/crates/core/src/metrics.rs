//! SINR in its direct and quadratic forms, rates, power draw and energy
//! efficiency.

use alloc::vec::Vec;

use num_traits::Float;
use thiserror::Error;

use crate::model::{ChannelSet, ModuleMask, NetworkConfig, PhaseProfile, PowerAllocation};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetricsError {
    #[error("total power must be positive, got {0} W")]
    NonPositivePower(f64),
}

/// `a^H b`.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter()
        .zip(b)
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Cascaded channels `hbar_{j,k} = diag(conj(g_k)) h_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateH {
    pub k: usize,
    pub m: usize,
    pub l: usize,
    /// Row-major `K x K`; entry `j * K + k` is `hbar_{j,k}`.
    pub hbar: Vec<Vec<C64>>,
}

impl AggregateH {
    pub fn n(&self) -> usize {
        self.m * self.l
    }

    /// ST j reflected towards DT k.
    pub fn hbar(&self, j: usize, k: usize) -> &[C64] {
        &self.hbar[j * self.k + k]
    }

    /// `Hbar^k`: the `hbar_{j,k}` for `j = 0..K` stacked into one vector.
    pub fn stacked(&self, k: usize) -> Vec<C64> {
        (0..self.k).flat_map(|j| self.hbar(j, k).iter().copied()).collect()
    }

    /// `G[j * K + k] = |phi^H hbar_{j,k}|^2`.
    pub fn effective_gains(&self, phases: &PhaseProfile) -> Vec<f64> {
        self.hbar.iter().map(|v| cdot(&phases.phi, v).norm_sqr()).collect()
    }
}

pub fn precompute(channels: &ChannelSet) -> AggregateH {
    let k = channels.k;
    let mut hbar = Vec::with_capacity(k * k);
    for j in 0..k {
        for kk in 0..k {
            hbar.push(
                channels.g[kk]
                    .iter()
                    .zip(&channels.h[j])
                    .map(|(g, h)| g.conj() * h)
                    .collect(),
            );
        }
    }
    AggregateH {
        k,
        m: channels.m,
        l: channels.l,
        hbar,
    }
}

/// `g_k^H Phi h_j` under the crate's phase convention.
pub fn reflected_gain(channels: &ChannelSet, phases: &PhaseProfile, j: usize, k: usize) -> C64 {
    channels.g[k]
        .iter()
        .zip(&phases.phi)
        .zip(&channels.h[j])
        .fold(C64::new(0.0, 0.0), |acc, ((g, f), h)| acc + g.conj() * f.conj() * h)
}

/// SINR at DT `k` evaluated from the raw channels.
pub fn sinr_direct(
    channels: &ChannelSet,
    phases: &PhaseProfile,
    powers: &PowerAllocation,
    sigma2: f64,
    k: usize,
) -> f64 {
    let signal = powers.p[k] * reflected_gain(channels, phases, k, k).norm_sqr();
    let interference: f64 = (0..channels.k)
        .filter(|&j| j != k)
        .map(|j| powers.p[j] * reflected_gain(channels, phases, j, k).norm_sqr())
        .sum();
    signal / (interference + sigma2)
}

pub fn sinr_direct_all(
    channels: &ChannelSet,
    phases: &PhaseProfile,
    powers: &PowerAllocation,
    sigma2: f64,
) -> Vec<f64> {
    (0..channels.k)
        .map(|k| sinr_direct(channels, phases, powers, sigma2, k))
        .collect()
}

/// SINR of every pair from the relaxed columns `phi_bar_k = sqrt(p_k) phi`.
pub fn sinr_quadratic(aggregate: &AggregateH, phi_bar: &[Vec<C64>], sigma2: f64) -> Vec<f64> {
    let kk = aggregate.k;
    (0..kk)
        .map(|k| {
            let signal = cdot(&phi_bar[k], aggregate.hbar(k, k)).norm_sqr();
            let interference: f64 = (0..kk)
                .filter(|&j| j != k)
                .map(|j| cdot(&phi_bar[j], aggregate.hbar(j, k)).norm_sqr())
                .sum();
            signal / (sigma2 + interference)
        })
        .collect()
}

/// SINRs from a `K x K` gain matrix (`gains[j * K + k]` is ST j -> DT k).
pub fn sinr_from_gains(gains: &[f64], p: &[f64], sigma2: f64) -> Vec<f64> {
    let kk = p.len();
    (0..kk)
        .map(|k| {
            let interference: f64 = (0..kk)
                .filter(|&j| j != k)
                .map(|j| p[j] * gains[j * kk + k])
                .sum();
            p[k] * gains[k * kk + k] / (interference + sigma2)
        })
        .collect()
}

/// `|d_{j,k}|^2` laid out like [`sinr_from_gains`] expects.
pub fn direct_gains(channels: &ChannelSet) -> Vec<f64> {
    channels.direct.iter().map(|d| d.norm_sqr()).collect()
}

pub fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `sum_k log2(1 + SINR_k)`, bits/s/Hz.
pub fn sum_rate(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|&s| Float::log2(1.0 + s)).sum()
}

/// `xi * sum(p) + K (P_ST + P_DT) + card(mask) * P(L)`, watts.
pub fn total_power(powers: &PowerAllocation, mask: &ModuleMask, config: &NetworkConfig) -> f64 {
    let pm = &config.power_model;
    pm.xi_st * powers.total()
        + config.k as f64 * (pm.p_st + pm.p_dt)
        + mask.cardinality() as f64 * config.module_power()
}

/// Bits per Joule per Hz.
pub fn energy_efficiency(sum_rate: f64, total_power: f64) -> Result<f64, MetricsError> {
    if !(total_power > 0.0) {
        return Err(MetricsError::NonPositivePower(total_power));
    }
    Ok(sum_rate / total_power)
}
