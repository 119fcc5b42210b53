//! Link model and the three optimizers: per-user power for fixed bandwidth,
//! bandwidth split for fixed powers, and the alternation of the two.
//!
//! Key structure exploited throughout: the rate is strictly increasing in
//! both power and bandwidth, and rate-per-watt is strictly decreasing in
//! power with supremum 1/(n0 * L * ln 2) as power vanishes. Every solve is
//! therefore a bisection on a monotone map, and every returned quantity sits
//! on the feasible side of its constraint.

use crate::error::{Error, Result};
use crate::solve::{bisect_inf, bisect_sup, grow_until};

use super::{AllocationResult, ChannelParams, NetworkScenario};

/// Distance up to which a link is always unobstructed, meters.
const LOS_CUTOFF_M: f64 = 18.0;
/// E-folding distance of the blockage probability beyond the cutoff, meters.
const LOS_DECAY_M: f64 = 63.0;

/// Probability that a link of length `d_m` is unobstructed: 1 up to the
/// cutoff, then a slowly decaying blend that stays in (0, 1].
pub fn los_probability(d_m: f64) -> Result<f64> {
    if !(d_m > 0.0) || !d_m.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "distance must be positive and finite, got {d_m}"
        )));
    }
    if d_m <= LOS_CUTOFF_M {
        return Ok(1.0);
    }
    let near = LOS_CUTOFF_M / d_m;
    Ok(near + (-(d_m - LOS_CUTOFF_M) / LOS_DECAY_M).exp() * (1.0 - near))
}

/// Expected linear path loss at distance `d_m`: the blockage-probability
/// blend of the unobstructed and obstructed power laws, both anchored at the
/// reference free-space loss.
pub fn path_loss(d_m: f64, ch: &ChannelParams) -> Result<f64> {
    let p_los = los_probability(d_m)?;
    let beta = ch.beta();
    Ok(p_los * beta * d_m.powf(ch.los_exponent)
        + (1.0 - p_los) * beta * d_m.powf(ch.nlos_exponent))
}

/// Shannon rate without argument validation; callers guarantee positivity.
fn shannon(b_hz: f64, p_w: f64, loss: f64, noise_psd: f64) -> f64 {
    let snr = p_w / (noise_psd * b_hz * loss);
    b_hz * snr.ln_1p() / std::f64::consts::LN_2
}

/// Achievable rate in bit/s over `b_hz` of spectrum at transmit power `p_w`
/// against linear path loss `loss`.
pub fn rate(b_hz: f64, p_w: f64, loss: f64, ch: &ChannelParams) -> Result<f64> {
    if !(b_hz > 0.0) || !b_hz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive and finite, got {b_hz}"
        )));
    }
    if !(p_w >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power must be non-negative, got {p_w}"
        )));
    }
    if !(loss > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "path loss must be positive, got {loss}"
        )));
    }
    Ok(shannon(b_hz, p_w, loss, ch.noise_psd_w_hz))
}

/// Supremum of rate-per-watt over all powers (reached as power vanishes);
/// also the supremum of rate over all bandwidths per watt of power.
fn rate_per_watt_limit(loss: f64, ch: &ChannelParams) -> f64 {
    1.0 / (ch.noise_psd_w_hz * loss * std::f64::consts::LN_2)
}

/// Errors unless the energy budget can deliver the payload at this loss at
/// some positive power, i.e. unless E > Q * n0 * L * ln 2.
fn check_energy_feasible(user: usize, loss: f64, s: &NetworkScenario) -> Result<()> {
    let limit = rate_per_watt_limit(loss, &s.channel);
    let required = s.payload_bits / s.energy_budget_j;
    if limit <= required {
        return Err(Error::InfeasibleEnergy {
            user,
            loss,
            limit,
            required,
        });
    }
    Ok(())
}

/// The power at which rate-per-watt equals payload-per-joule, i.e. the
/// largest power whose upload still fits the energy budget (the budget then
/// binds with equality). Strictly below the supremum check, this root exists
/// and is unique because rate-per-watt decreases strictly in power.
///
/// `user` only labels the infeasibility error.
pub fn energy_limited_power(
    b_hz: f64,
    loss: f64,
    s: &NetworkScenario,
    user: usize,
) -> Result<f64> {
    if !(b_hz > 0.0) || !b_hz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive and finite, got {b_hz}"
        )));
    }
    check_energy_feasible(user, loss, s)?;
    let required = s.payload_bits / s.energy_budget_j;
    let fits = |p: f64| shannon(b_hz, p, loss, s.channel.noise_psd_w_hz) / p >= required;
    let lo = grow_until(fits, 1.0, 0.5)?;
    let hi = grow_until(|p| !fits(p), lo.max(1.0), 2.0)?;
    bisect_sup(fits, lo, hi)
}

/// The time-minimizing power for a fixed bandwidth: the power cap, unless the
/// energy budget binds first. Rate grows with power, so the best power is the
/// largest one satisfying both constraints.
pub fn optimal_power(b_hz: f64, loss: f64, s: &NetworkScenario, user: usize) -> Result<f64> {
    if !(b_hz > 0.0) || !b_hz.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive and finite, got {b_hz}"
        )));
    }
    check_energy_feasible(user, loss, s)?;
    let required = s.payload_bits / s.energy_budget_j;
    let cap = s.max_power_w;
    if shannon(b_hz, cap, loss, s.channel.noise_psd_w_hz) / cap >= required {
        return Ok(cap);
    }
    Ok(energy_limited_power(b_hz, loss, s, user)?.min(cap))
}

/// The least bandwidth at which power `p_w` reaches `target_rate`. Exists for
/// targets strictly below the large-bandwidth supremum p / (n0 * L * ln 2);
/// the returned bandwidth meets or exceeds the target.
pub fn min_bandwidth_for_rate(
    p_w: f64,
    loss: f64,
    target_rate: f64,
    ch: &ChannelParams,
) -> Result<f64> {
    if !(p_w > 0.0) || !(loss > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "power and loss must be positive, got {p_w} and {loss}"
        )));
    }
    if !(target_rate > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target rate must be positive, got {target_rate}"
        )));
    }
    let supremum = p_w * rate_per_watt_limit(loss, ch);
    if target_rate >= supremum {
        return Err(Error::UnreachableRate {
            target: target_rate,
            supremum,
        });
    }
    let reaches = |b: f64| shannon(b, p_w, loss, ch.noise_psd_w_hz) >= target_rate;
    let hi = grow_until(reaches, 1.0, 2.0)?;
    let lo = grow_until(|b| !reaches(b), 1.0, 0.5)?;
    bisect_inf(reaches, lo.min(hi), hi)
}

/// Splits the bandwidth budget among users with fixed powers so the slowest
/// upload is as fast as possible.
///
/// Works on the reciprocal objective: for a candidate uploads-per-second
/// level, each user needs enough bandwidth to reach both that level's rate
/// and the rate its energy budget forces at its power; the level is feasible
/// when those minimum bandwidths fit the budget. The largest feasible level
/// is found by bisection, and leftover spectrum is then spread
/// proportionally, which only speeds users up.
pub fn bandwidth_allocation(powers: &[f64], s: &NetworkScenario) -> Result<AllocationResult> {
    s.validate()?;
    if powers.len() != s.num_users() {
        return Err(Error::InvalidArgument(format!(
            "{} powers for {} users",
            powers.len(),
            s.num_users()
        )));
    }
    for (i, &p) in powers.iter().enumerate() {
        if !(p > 0.0) || p > s.max_power_w * (1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "user {i} power {p} outside (0, {}]",
                s.max_power_w
            )));
        }
    }
    let losses = s.path_losses()?;
    for (i, &loss) in losses.iter().enumerate() {
        check_energy_feasible(i, loss, s)?;
    }

    // Bandwidth floors from the energy constraint alone: uploading Q bits at
    // power p within E joules needs rate at least Q * p / E.
    let floors: Vec<f64> = powers
        .iter()
        .zip(&losses)
        .map(|(&p, &loss)| {
            min_bandwidth_for_rate(p, loss, s.payload_bits * p / s.energy_budget_j, &s.channel)
        })
        .collect::<Result<_>>()?;
    let floor_sum: f64 = floors.iter().sum();
    if floor_sum > s.total_bandwidth_hz {
        return Err(Error::Infeasible(format!(
            "energy-feasible bandwidths need {floor_sum} Hz, budget is {} Hz",
            s.total_bandwidth_hz
        )));
    }

    let needed = |gamma: f64| -> Option<Vec<f64>> {
        powers
            .iter()
            .zip(&losses)
            .zip(&floors)
            .map(|((&p, &loss), &floor)| {
                if gamma <= 0.0 {
                    return Some(floor);
                }
                match min_bandwidth_for_rate(p, loss, s.payload_bits * gamma, &s.channel) {
                    Ok(b) => Some(b.max(floor)),
                    Err(_) => None,
                }
            })
            .collect()
    };
    let fits = |gamma: f64| match needed(gamma) {
        Some(bws) => bws.iter().sum::<f64>() <= s.total_bandwidth_hz,
        None => false,
    };

    // No user can upload faster than its rate supremum allows, whatever the
    // bandwidth; cap the search fractionally below the weakest supremum.
    let gamma_hi = powers
        .iter()
        .zip(&losses)
        .map(|(&p, &loss)| p * rate_per_watt_limit(loss, &s.channel) / s.payload_bits)
        .fold(f64::INFINITY, f64::min)
        * (1.0 - 1e-12);
    let gamma = bisect_sup(fits, 0.0, gamma_hi)?;

    let mut bandwidths = needed(gamma).expect("feasible level");
    let used: f64 = bandwidths.iter().sum();
    let scale = s.total_bandwidth_hz / used;
    for b in &mut bandwidths {
        *b *= scale;
    }
    AllocationResult::from_assignment(powers, &bandwidths, &losses, s)
}

/// Uniform-bandwidth reference point: every user gets an equal share of the
/// spectrum and its own best power for that share.
pub fn baseline_uniform(s: &NetworkScenario) -> Result<AllocationResult> {
    s.validate()?;
    let losses = s.path_losses()?;
    let share = s.total_bandwidth_hz / s.num_users() as f64;
    let powers = losses
        .iter()
        .enumerate()
        .map(|(i, &loss)| optimal_power(share, loss, s, i))
        .collect::<Result<Vec<_>>>()?;
    let bandwidths = vec![share; s.num_users()];
    AllocationResult::from_assignment(&powers, &bandwidths, &losses, s)
}

/// Alternates the two closed sub-solutions from a uniform split: powers for
/// the current bandwidths, then bandwidths for those powers. Each half-step
/// re-optimizes around a point that stays feasible for it, so the objective
/// never increases. Returns the allocation plus the objective after every
/// half-step.
pub fn alternating_optimize_traced(
    s: &NetworkScenario,
) -> Result<(AllocationResult, Vec<f64>)> {
    const MAX_ROUNDS: usize = 50;
    const REL_CHANGE: f64 = 1e-6;
    s.validate()?;
    let losses = s.path_losses()?;
    let mut bandwidths = vec![s.total_bandwidth_hz / s.num_users() as f64; s.num_users()];
    let mut trace = Vec::new();
    let mut last = f64::INFINITY;
    let mut best = None;
    for _ in 0..MAX_ROUNDS {
        let powers = bandwidths
            .iter()
            .zip(&losses)
            .enumerate()
            .map(|(i, (&b, &loss))| optimal_power(b, loss, s, i))
            .collect::<Result<Vec<_>>>()?;
        let after_power = AllocationResult::from_assignment(&powers, &bandwidths, &losses, s)?;
        trace.push(after_power.max_time_s);
        let alloc = bandwidth_allocation(&powers, s)?;
        trace.push(alloc.max_time_s);
        bandwidths = alloc.users.iter().map(|u| u.bandwidth_hz).collect();
        let objective = alloc.max_time_s;
        best = Some(alloc);
        if (last - objective).abs() <= REL_CHANGE * objective {
            break;
        }
        last = objective;
    }
    Ok((best.expect("at least one round"), trace))
}

/// [`alternating_optimize_traced`] without the trace.
pub fn alternating_optimize(s: &NetworkScenario) -> Result<AllocationResult> {
    Ok(alternating_optimize_traced(s)?.0)
}

/// Exhaustive reference optimizer: scans bandwidth splits on a simplex grid
/// of `grid_steps` slots, with each user's power chosen optimally per slot
/// count. Exponential in users, hence capped at 3.
pub fn brute_force_oracle(s: &NetworkScenario, grid_steps: usize) -> Result<AllocationResult> {
    const MAX_USERS: usize = 3;
    s.validate()?;
    let users = s.num_users();
    if users > MAX_USERS {
        return Err(Error::TooManyUsers {
            got: users,
            max: MAX_USERS,
        });
    }
    if grid_steps < users {
        return Err(Error::InvalidArgument(format!(
            "{grid_steps} grid steps cannot give {users} users a slot each"
        )));
    }
    let losses = s.path_losses()?;
    for (i, &loss) in losses.iter().enumerate() {
        check_energy_feasible(i, loss, s)?;
    }

    // Per-user tables over slot counts: k slots = k * B / G of bandwidth.
    let slot_hz = s.total_bandwidth_hz / grid_steps as f64;
    let max_slots = grid_steps - (users - 1);
    let mut power_at = vec![vec![f64::NAN; max_slots + 1]; users];
    let mut time_at = vec![vec![f64::INFINITY; max_slots + 1]; users];
    for i in 0..users {
        for k in 1..=max_slots {
            let b = slot_hz * k as f64;
            let p = optimal_power(b, losses[i], s, i)?;
            power_at[i][k] = p;
            time_at[i][k] = s.payload_bits / shannon(b, p, losses[i], s.channel.noise_psd_w_hz);
        }
    }

    fn search(
        time_at: &[Vec<f64>],
        user: usize,
        slots_left: usize,
        worst_so_far: f64,
        slots: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        let users_left = time_at.len() - user;
        if users_left == 1 {
            let t = worst_so_far.max(time_at[user][slots_left]);
            if t < best.0 {
                best.0 = t;
                best.1 = slots.clone();
                best.1.push(slots_left);
            }
            return;
        }
        for k in 1..=(slots_left - (users_left - 1)) {
            let t = worst_so_far.max(time_at[user][k]);
            if t >= best.0 {
                continue;
            }
            slots.push(k);
            search(time_at, user + 1, slots_left - k, t, slots, best);
            slots.pop();
        }
    }

    let mut best = (f64::INFINITY, Vec::new());
    search(&time_at, 0, grid_steps, f64::NEG_INFINITY, &mut Vec::new(), &mut best);
    let slots = best.1;
    let bandwidths: Vec<f64> = slots.iter().map(|&k| slot_hz * k as f64).collect();
    let powers: Vec<f64> = slots
        .iter()
        .enumerate()
        .map(|(i, &k)| power_at[i][k])
        .collect();
    AllocationResult::from_assignment(&powers, &bandwidths, &losses, s)
}
