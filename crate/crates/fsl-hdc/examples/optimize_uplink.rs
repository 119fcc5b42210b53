//! Joint transmission-power and bandwidth optimization for one upload round.
//! Ten users at random positions share a 100 MHz uplink; the optimizer
//! alternates between per-user power selection and max-min bandwidth
//! allocation until the slowest upload stops improving, and is compared
//! against an even bandwidth split.
//!
//! Run with `cargo run --release --example optimize_uplink`.

use fsl_hdc::net::{
    alternating_optimize_traced, baseline_uniform, path_loss, AllocationResult, NetworkScenario,
};
use fsl_hdc::Result;

fn print_allocation(label: &str, s: &NetworkScenario, alloc: &AllocationResult) -> Result<()> {
    println!("\n{label}: slowest upload {:.4} s", alloc.max_time_s);
    println!("  user  dist_m       loss  power_w   bw_mhz   rate_mbps   time_s");
    for (i, u) in alloc.users.iter().enumerate() {
        println!(
            "  {i:4}  {:6.1}  {:9.2e}   {:.4}   {:6.2}    {:8.2}   {:.4}",
            s.distances_m[i],
            path_loss(s.distances_m[i], &s.channel)?,
            u.power_w,
            u.bandwidth_hz / 1e6,
            u.rate_bps / 1e6,
            u.time_s,
        );
    }
    alloc.check_feasible(s)
}

fn main() -> Result<()> {
    let s = NetworkScenario::reference(10, 7)?;
    println!(
        "{} users in a {:.0} m square, B = {:.0} MHz, P_max = {} W, E = {} J, Q = {:.1} Mbit",
        s.num_users(),
        s.channel.area_side_m,
        s.total_bandwidth_hz / 1e6,
        s.max_power_w,
        s.energy_budget_j,
        s.payload_bits / 1e6,
    );

    // Baseline: every user gets B/N, then picks its own best power.
    let uniform = baseline_uniform(&s)?;
    print_allocation("uniform bandwidth split", &s, &uniform)?;

    // Joint: alternate power and bandwidth steps; each half-step can only
    // shrink the objective, so the trace is non-increasing.
    let (joint, trace) = alternating_optimize_traced(&s)?;
    print_allocation("joint power + bandwidth", &s, &joint)?;

    let half_steps: Vec<String> = trace.iter().map(|t| format!("{t:.4}")).collect();
    println!("\nobjective after each half-step: {}", half_steps.join(" "));
    println!(
        "improvement over uniform: {:.1}%",
        100.0 * (uniform.max_time_s - joint.max_time_s) / uniform.max_time_s
    );

    // The slowest uploads end up equalized: users that can afford it trade
    // bandwidth until no one can be helped without hurting someone slower.
    let worst = joint.users.iter().map(|u| u.time_s).fold(f64::MIN, f64::max);
    let near_worst = joint.users.iter().filter(|u| u.time_s > worst * 0.999).count();
    println!("users within 0.1% of the slowest: {near_worst} of {}", s.num_users());
    Ok(())
}
