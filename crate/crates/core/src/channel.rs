//! Random deployment and Rayleigh-faded channels.
//!
//! Every draw is a pure function of `(config, seed)`; see [`crate::rng`] for
//! how the per-terminal and per-link substreams are derived.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::model::{dist, ChannelSet, NetworkConfig, VarianceModel};
use crate::rng::{substream, StreamTag};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ChannelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

/// Terminal and IRS positions, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub st_positions: Vec<[f64; 2]>,
    pub dt_positions: Vec<[f64; 2]>,
    pub irs_position: [f64; 2],
}

impl Geometry {
    /// ST k -> IRS.
    pub fn d_h(&self, k: usize) -> f64 {
        dist(self.st_positions[k], self.irs_position)
    }

    /// IRS -> DT k.
    pub fn d_g(&self, k: usize) -> f64 {
        dist(self.irs_position, self.dt_positions[k])
    }

    /// ST j -> DT k.
    pub fn d_direct(&self, j: usize, k: usize) -> f64 {
        dist(self.st_positions[j], self.dt_positions[k])
    }
}

fn uniform_in_disc<R: Rng>(rng: &mut R, center: [f64; 2], radius: f64) -> [f64; 2] {
    let u: f64 = rng.gen();
    let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
    let r = radius * Float::sqrt(u);
    [center[0] + r * Float::cos(theta), center[1] + r * Float::sin(theta)]
}

/// Drops K STs and K DTs uniformly on their cluster discs.
pub fn place_terminals(config: &NetworkConfig, seed: u64) -> Geometry {
    let geo = &config.geometry;
    let st_positions = (0..config.k)
        .map(|k| {
            let mut rng = substream(seed, StreamTag::StPlacement, k as u64);
            uniform_in_disc(&mut rng, geo.st_center, geo.cluster_radius)
        })
        .collect();
    let dt_positions = (0..config.k)
        .map(|k| {
            let mut rng = substream(seed, StreamTag::DtPlacement, k as u64);
            uniform_in_disc(&mut rng, geo.dt_center, geo.cluster_radius)
        })
        .collect();
    Geometry {
        st_positions,
        dt_positions,
        irs_position: geo.irs_position,
    }
}

/// Linear power gain `10^(-ref_loss_db/10) * d^(-exponent)`, with distances
/// below 1 m clamped to 1 m.
pub fn path_gain(distance_m: f64, exponent: f64, ref_loss_db: f64) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(distance_m));
    }
    let d = distance_m.max(1.0);
    Ok(Float::powf(10.0, -ref_loss_db / 10.0) * Float::powf(d, -exponent))
}

/// Variance of one fading coefficient on a link of the given length.
pub fn link_variance(config: &NetworkConfig, distance_m: f64, exponent: f64) -> Result<f64, ChannelError> {
    match config.variance_model {
        VarianceModel::ReferenceLoss => path_gain(distance_m, exponent, config.ref_loss_db),
        VarianceModel::Ratio200 => {
            if !(distance_m > 0.0) {
                return Err(ChannelError::NonPositiveDistance(distance_m));
            }
            Ok(Float::powf(200.0 / distance_m.max(1.0), exponent))
        }
    }
}

/// One draw from `CN(0, variance)`.
pub fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> C64 {
    let s = Float::sqrt(variance / 2.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

fn gaussian_vector(seed: u64, tag: StreamTag, index: u64, len: usize, variance: f64) -> Vec<C64> {
    let mut rng = substream(seed, tag, index);
    (0..len).map(|_| complex_gaussian(&mut rng, variance)).collect()
}

/// i.i.d. Rayleigh channels for every link of the deployment.
pub fn draw_channels(config: &NetworkConfig, geometry: &Geometry, seed: u64) -> Result<ChannelSet, ChannelError> {
    let (k_pairs, n) = (config.k, config.n);
    let ex = &config.exponents;
    let mut h = Vec::with_capacity(k_pairs);
    let mut g = Vec::with_capacity(k_pairs);
    for k in 0..k_pairs {
        let var_h = link_variance(config, geometry.d_h(k), ex.st_irs)?;
        let var_g = link_variance(config, geometry.d_g(k), ex.irs_dt)?;
        h.push(gaussian_vector(seed, StreamTag::Uplink, k as u64, n, var_h));
        g.push(gaussian_vector(seed, StreamTag::Downlink, k as u64, n, var_g));
    }
    let mut direct = Vec::with_capacity(k_pairs * k_pairs);
    for j in 0..k_pairs {
        for k in 0..k_pairs {
            let var = link_variance(config, geometry.d_direct(j, k), ex.direct)?;
            let mut rng = substream(seed, StreamTag::Direct, (j * k_pairs + k) as u64);
            direct.push(complex_gaussian(&mut rng, var));
        }
    }
    Ok(ChannelSet {
        k: k_pairs,
        m: config.m,
        l: config.l,
        h,
        g,
        direct,
    })
}

/// Geometry and channels for one realization seed.
pub fn draw_realization(config: &NetworkConfig, seed: u64) -> Result<(Geometry, ChannelSet), ChannelError> {
    let geometry = place_terminals(config, seed);
    let channels = draw_channels(config, &geometry, seed)?;
    Ok((geometry, channels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkConfig;

    #[test]
    fn reference_gain_at_one_meter() {
        for exp in [2.0, 2.1, 3.5] {
            let g = path_gain(1.0, exp, 30.0).unwrap();
            assert!((g - 1e-3).abs() < 1e-18);
        }
    }

    #[test]
    fn gain_formula() {
        let g = path_gain(100.0, 2.0, 30.0).unwrap();
        assert!((g / 1e-7 - 1.0).abs() < 1e-12);
        // 1e-3 * 130^-2.1 evaluated independently
        let g = path_gain(130.0, 2.1, 30.0).unwrap();
        assert!((g / 3.636796162804755e-08 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_clamps_and_rejects() {
        assert_eq!(path_gain(0.5, 2.0, 30.0), path_gain(1.0, 2.0, 30.0));
        assert!(path_gain(0.0, 2.0, 30.0).is_err());
        assert!(path_gain(-3.0, 2.0, 30.0).is_err());
    }

    #[test]
    fn placement_is_deterministic() {
        let cfg = NetworkConfig::reference(5, 2, 2);
        assert_eq!(place_terminals(&cfg, 42), place_terminals(&cfg, 42));
        assert_ne!(place_terminals(&cfg, 42), place_terminals(&cfg, 43));
    }

    #[test]
    fn zero_radius_collapses_to_centers() {
        let mut cfg = NetworkConfig::reference(4, 2, 2);
        cfg.geometry.cluster_radius = 0.0;
        let geo = place_terminals(&cfg, 1);
        assert!(geo.st_positions.iter().all(|p| *p == [0.0, 0.0]));
        assert!(geo.dt_positions.iter().all(|p| *p == [200.0, 0.0]));
    }

    #[test]
    fn placement_stays_in_discs() {
        let cfg = NetworkConfig::reference(50, 1, 1);
        let geo = place_terminals(&cfg, 9);
        for p in &geo.st_positions {
            assert!(dist(*p, [0.0, 0.0]) <= 2.0);
        }
        for p in &geo.dt_positions {
            assert!(dist(*p, [200.0, 0.0]) <= 2.0);
        }
    }

    #[test]
    fn channel_shapes() {
        let cfg = NetworkConfig::reference(5, 10, 20);
        let (_, ch) = draw_realization(&cfg, 3).unwrap();
        assert_eq!(ch.h.len(), 5);
        assert!(ch.h.iter().chain(&ch.g).all(|v| v.len() == 200));
        assert_eq!(ch.direct.len(), 25);
        assert_eq!(ch.h_block(2, 9).unwrap(), &ch.h[2][180..200]);
        assert!(ch.is_finite());
    }

    #[test]
    fn links_do_not_depend_on_each_other() {
        // Shrinking K must leave the surviving pairs' channels untouched when
        // the positions are pinned.
        let mut cfg = NetworkConfig::reference(3, 2, 3);
        cfg.geometry.cluster_radius = 0.0;
        let geo3 = place_terminals(&cfg, 11);
        let ch3 = draw_channels(&cfg, &geo3, 11).unwrap();
        cfg.k = 2;
        cfg.p_max.pop();
        let geo2 = place_terminals(&cfg, 11);
        let ch2 = draw_channels(&cfg, &geo2, 11).unwrap();
        assert_eq!(ch2.h[..], ch3.h[..2]);
        assert_eq!(ch2.g[..], ch3.g[..2]);
    }

    #[test]
    fn disc_placement_mean_radius() {
        let mut cfg = NetworkConfig::reference(1, 1, 1);
        cfg.geometry.cluster_radius = 2.0;
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|s| {
                let p = place_terminals(&cfg, s)
                    .st_positions[0];
                Float::sqrt(p[0] * p[0] + p[1] * p[1])
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 4.0 / 3.0).abs() < 0.01 * 4.0 / 3.0, "{mean}");
    }

    /// Sample moments of one entry over many seeds with pinned positions.
    fn moments(pick: impl Fn(&ChannelSet) -> C64, cfg: &NetworkConfig, n: u64) -> (f64, f64, f64, f64, f64) {
        let geo = place_terminals(cfg, 0);
        let (mut re, mut im, mut rr, mut ii, mut ri) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for s in 0..n {
            let x = pick(&draw_channels(cfg, &geo, s).unwrap());
            re += x.re;
            im += x.im;
            rr += x.re * x.re;
            ii += x.im * x.im;
            ri += x.re * x.im;
        }
        let n = n as f64;
        (re / n, im / n, rr / n, ii / n, ri / n)
    }

    #[test]
    fn entry_statistics_match_assigned_variance() {
        let mut cfg = NetworkConfig::reference(1, 1, 1);
        cfg.geometry.cluster_radius = 0.0;
        let geo = place_terminals(&cfg, 0);
        let n = 100_000u64;
        let ex = cfg.exponents;
        let cases: [(fn(&ChannelSet) -> C64, f64); 3] = [
            (|c| c.h[0][0], path_gain(geo.d_h(0), ex.st_irs, 30.0).unwrap()),
            (|c| c.g[0][0], path_gain(geo.d_g(0), ex.irs_dt, 30.0).unwrap()),
            (|c| c.direct[0], path_gain(geo.d_direct(0, 0), ex.direct, 30.0).unwrap()),
        ];
        for (pick, var) in cases {
            let (mr, mi, rr, ii, ri) = moments(pick, &cfg, n);
            let power = rr + ii;
            // |x|^2 is exponential, so its standard error is var / sqrt(n).
            assert!((power - var).abs() < 0.02 * var, "{power} vs {var}");
            assert!((power - var).abs() < 3.0 * var / (n as f64).sqrt() + 1e-3 * var);
            // Mean zero at 3 sigma: each part has variance var / 2.
            let se = Float::sqrt(var / 2.0 / n as f64);
            assert!(mr.abs() < 3.0 * se && mi.abs() < 3.0 * se);
            // Independent, equally spread parts.
            let se_cov = var / 2.0 / Float::sqrt(n as f64);
            assert!(ri.abs() < 3.0 * se_cov, "cov {ri}");
            assert!((rr - ii).abs() < 6.0 * se_cov * Float::sqrt(2.0), "{rr} vs {ii}");
        }
    }
}
