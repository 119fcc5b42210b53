//! How the slowest-upload time scales with the bandwidth budget and power
//! cap. More spectrum shortens every upload; the joint optimizer's edge over
//! an even split is largest when bandwidth is scarce, because that is when
//! putting the right slice in the right hands matters most.
//!
//! Run with `cargo run --release --example bandwidth_sweep`.

use fsl_hdc::net::{alternating_optimize, baseline_uniform, NetworkScenario};
use fsl_hdc::Result;

fn main() -> Result<()> {
    let base = NetworkScenario::reference(10, 7)?;

    for &p_max in &[0.5f64, 1.0] {
        println!("P_max = {p_max} W:");
        println!("  bw_mhz   uniform_s   joint_s   improvement");
        for mhz in (100..=500).step_by(100) {
            // Same users and budgets throughout; only B and the cap move.
            let mut s = base.clone();
            s.total_bandwidth_hz = mhz as f64 * 1e6;
            s.max_power_w = p_max;
            let uniform = baseline_uniform(&s)?;
            let joint = alternating_optimize(&s)?;
            println!(
                "  {mhz:6}   {:9.4}   {:7.4}   {:10.1}%",
                uniform.max_time_s,
                joint.max_time_s,
                100.0 * (uniform.max_time_s - joint.max_time_s) / uniform.max_time_s
            );
        }
    }

    println!("higher budgets help both methods; the gap narrows as bandwidth stops binding.");
    Ok(())
}
