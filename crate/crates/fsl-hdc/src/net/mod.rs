//! Uplink transmission model and joint power/bandwidth optimization.
//!
//! Clients upload their encoded samples to the fed server over a shared
//! spectrum. Each user's link is summarized by a distance-dependent path
//! loss; the optimizer splits the bandwidth budget and picks per-user
//! transmission powers to minimize the slowest upload, which is what gates a
//! synchronized round.

pub mod opt;

pub use opt::{
    alternating_optimize, alternating_optimize_traced, bandwidth_allocation, baseline_uniform,
    brute_force_oracle, energy_limited_power, los_probability, min_bandwidth_for_rate,
    optimal_power, path_loss, rate,
};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// Reference distance of the free-space loss term, meters.
pub const REF_DISTANCE_M: f64 = 1.0;

/// Propagation and noise constants shared by all users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub carrier_freq_hz: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_psd_w_hz: f64,
    /// Path-loss exponent on unobstructed links.
    pub los_exponent: f64,
    /// Path-loss exponent on obstructed links; must exceed `los_exponent`.
    pub nlos_exponent: f64,
    /// Side of the square deployment area, meters.
    pub area_side_m: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 28e9,
            // -174 dBm/Hz.
            noise_psd_w_hz: 10f64.powf(-20.4),
            los_exponent: 2.0,
            nlos_exponent: 3.3,
            area_side_m: 200.0,
        }
    }
}

impl ChannelParams {
    /// Free-space loss at the reference distance: (4 pi f_c d0 / c)^2.
    pub fn beta(&self) -> f64 {
        let x = 4.0 * std::f64::consts::PI * self.carrier_freq_hz * REF_DISTANCE_M
            / SPEED_OF_LIGHT_M_S;
        x * x
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("noise_psd_w_hz", self.noise_psd_w_hz),
            ("los_exponent", self.los_exponent),
            ("nlos_exponent", self.nlos_exponent),
            ("area_side_m", self.area_side_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.los_exponent >= self.nlos_exponent {
            return Err(Error::InvalidArgument(format!(
                "los exponent {} must be below nlos exponent {}",
                self.los_exponent, self.nlos_exponent
            )));
        }
        Ok(())
    }
}

/// One uplink round: who is where and what the budgets are.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    /// Distance of each user to the fed server, meters.
    pub distances_m: Vec<f64>,
    /// Shared bandwidth budget, Hz.
    pub total_bandwidth_hz: f64,
    /// Per-user transmit power cap, W.
    pub max_power_w: f64,
    /// Per-user energy budget for the upload, J.
    pub energy_budget_j: f64,
    /// Upload size per user, bits.
    pub payload_bits: f64,
    pub channel: ChannelParams,
}

impl NetworkScenario {
    pub fn new(
        distances_m: Vec<f64>,
        total_bandwidth_hz: f64,
        max_power_w: f64,
        energy_budget_j: f64,
        payload_bits: f64,
        channel: ChannelParams,
    ) -> Result<Self> {
        let s = Self {
            distances_m,
            total_bandwidth_hz,
            max_power_w,
            energy_budget_j,
            payload_bits,
            channel,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario with users placed uniformly at random in the square area,
    /// the server at its center, and distances floored at the reference
    /// distance.
    pub fn random(
        num_users: usize,
        seed: u64,
        total_bandwidth_hz: f64,
        max_power_w: f64,
        energy_budget_j: f64,
        payload_bits: f64,
        channel: ChannelParams,
    ) -> Result<Self> {
        use rand::Rng;
        let half = channel.area_side_m / 2.0;
        let distances_m = (0..num_users)
            .map(|i| {
                let mut rng = stream_rng(seed, Stream::UserPositions, &[i as u64]);
                let x: f64 = rng.random::<f64>() * channel.area_side_m;
                let y: f64 = rng.random::<f64>() * channel.area_side_m;
                ((x - half).hypot(y - half)).max(REF_DISTANCE_M)
            })
            .collect();
        Self::new(
            distances_m,
            total_bandwidth_hz,
            max_power_w,
            energy_budget_j,
            payload_bits,
            channel,
        )
    }

    /// The default experiment setup: 100 MHz of shared bandwidth, a 1 W
    /// power cap, a 5 J energy budget, and a 6 Mbit payload (600 uploaded
    /// hypervectors of 10000 one-bit elements).
    pub fn reference(num_users: usize, seed: u64) -> Result<Self> {
        Self::random(num_users, seed, 100e6, 1.0, 5.0, 6e6, ChannelParams::default())
    }

    pub fn num_users(&self) -> usize {
        self.distances_m.len()
    }

    /// Path loss of every user, in user order.
    pub fn path_losses(&self) -> Result<Vec<f64>> {
        self.distances_m
            .iter()
            .map(|&d| opt::path_loss(d, &self.channel))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.distances_m.is_empty() {
            return Err(Error::InvalidArgument("scenario has no users".into()));
        }
        if let Some(&d) = self.distances_m.iter().find(|&&d| !(d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "user distance must be positive and finite, got {d}"
            )));
        }
        for (name, v) in [
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("max_power_w", self.max_power_w),
            ("energy_budget_j", self.energy_budget_j),
            ("payload_bits", self.payload_bits),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One user's share of the round.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct UserAllocation {
    pub power_w: f64,
    pub bandwidth_hz: f64,
    pub rate_bps: f64,
    pub time_s: f64,
}

/// A complete allocation and its objective value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AllocationResult {
    pub users: Vec<UserAllocation>,
    /// The round length: the slowest user's upload time.
    pub max_time_s: f64,
}

impl AllocationResult {
    /// Assembles per-user rates and times from powers and bandwidths.
    pub fn from_assignment(
        powers: &[f64],
        bandwidths: &[f64],
        losses: &[f64],
        s: &NetworkScenario,
    ) -> Result<Self> {
        let users = powers
            .iter()
            .zip(bandwidths)
            .zip(losses)
            .map(|((&p, &b), &loss)| {
                let r = opt::rate(b, p, loss, &s.channel)?;
                Ok(UserAllocation {
                    power_w: p,
                    bandwidth_hz: b,
                    rate_bps: r,
                    time_s: s.payload_bits / r,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let max_time_s = users.iter().map(|u| u.time_s).fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { users, max_time_s })
    }

    /// The max-min auxiliary variable: the reciprocal of the round length.
    pub fn gamma(&self) -> f64 {
        1.0 / self.max_time_s
    }

    /// Verifies the power cap, bandwidth budget, and per-user energy budget
    /// within a 1e-9 relative tolerance, and that the objective is the
    /// per-user maximum.
    pub fn check_feasible(&self, s: &NetworkScenario) -> Result<()> {
        const TOL: f64 = 1e-9;
        if self.users.len() != s.num_users() {
            return Err(Error::InvalidArgument(format!(
                "{} allocations for {} users",
                self.users.len(),
                s.num_users()
            )));
        }
        let mut total_bw = 0.0;
        let mut max_t = f64::NEG_INFINITY;
        for (i, u) in self.users.iter().enumerate() {
            if u.power_w > s.max_power_w * (1.0 + TOL) {
                return Err(Error::Infeasible(format!(
                    "user {i} power {} exceeds cap {}",
                    u.power_w, s.max_power_w
                )));
            }
            let energy = u.time_s * u.power_w;
            if energy > s.energy_budget_j * (1.0 + TOL) {
                return Err(Error::Infeasible(format!(
                    "user {i} energy {energy} J exceeds budget {} J",
                    s.energy_budget_j
                )));
            }
            if !(u.bandwidth_hz > 0.0) {
                return Err(Error::Infeasible(format!(
                    "user {i} bandwidth {} Hz not positive",
                    u.bandwidth_hz
                )));
            }
            total_bw += u.bandwidth_hz;
            max_t = max_t.max(u.time_s);
        }
        if total_bw > s.total_bandwidth_hz * (1.0 + TOL) {
            return Err(Error::Infeasible(format!(
                "total bandwidth {total_bw} Hz exceeds budget {} Hz",
                s.total_bandwidth_hz
            )));
        }
        if self.max_time_s != max_t {
            return Err(Error::InvalidArgument(format!(
                "objective {} is not the slowest user time {max_t}",
                self.max_time_s
            )));
        }
        Ok(())
    }
}
