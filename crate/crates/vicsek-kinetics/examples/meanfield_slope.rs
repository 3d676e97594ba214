//! Propagation of chaos, measured: particles → kinetic equation at rate N^(−1/2).
//!
//! The kinetic equation is the N → ∞ limit of the particle system. To see
//! the convergence *rate*, evolve both from the same initial law, estimate
//! the particle law with a smoothed empirical density, smooth the kinetic
//! solution with the **same** kernel (so the smoothing bias cancels exactly
//! and only Monte Carlo noise remains), and record the L¹ distance for a
//! ladder of population sizes. The log–log slope should sit near −1/2.
//!
//! The two systems are matched by construction: the kinetic equation runs
//! with the top-hat interaction kernel whose radius is exactly the particle
//! interaction radius.
//!
//! Run with: `cargo run --release --example meanfield_slope`

use std::f64::consts::PI;
use std::sync::Arc;
use vicsek_kinetics::experiments::fit_slope;
use vicsek_kinetics::field::{DistributionField, LpOrder, SpatialGrid};
use vicsek_kinetics::model::{FrequencySpec, KernelSpec};
use vicsek_kinetics::particles::{gaussian_smooth, ParticleEnsemble, SimParams};
use vicsek_kinetics::solver::{SolverConfig, SolverContext};
use vicsek_kinetics::sphere::AngularGrid;

fn main() {
    let radius = 0.25;
    let mu = 0.3;
    let dt = 1e-3;
    let t_end = 0.5;
    let bandwidth = 0.05;
    let ladder = [500usize, 2000, 8000];

    // A periodic line for space: the particle neighbor search then runs on
    // sorted prefix sums (O(N log N)), which keeps this example quick.
    let sgrid = SpatialGrid::line(32, 1.0).unwrap();
    let agrid = Arc::new(AngularGrid::circle(32).unwrap());

    // Common initial law: mild density ripple, mild alignment seed.
    let f0 = DistributionField::from_fn(sgrid, agrid.clone(), 0.0, |x, omega| {
        (1.0 + 0.3 * (2.0 * PI * x[0]).cos()) * (1.0 + 0.5 * omega.angle().cos()) / (2.0 * PI)
    })
    .unwrap();
    let mass0 = f0.mass();

    // Kinetic side: evolve once, smooth, normalize to mass 1 (the convention
    // the empirical density uses).
    let mut sc = SolverConfig::new(FrequencySpec::constant(1.0).unwrap(), mu);
    sc.dt = dt;
    sc.t_end = t_end;
    sc.kernel = KernelSpec::TopHat { radius };
    sc.report_every = 100;
    let mut ctx = SolverContext::new(sc, sgrid, agrid.clone()).unwrap();
    let kinetic_final = ctx.evolve(&f0).unwrap().final_field;
    let smoothed = gaussian_smooth(&kinetic_final, bandwidth).unwrap();
    let normalized: Vec<f64> = smoothed.values().iter().map(|v| v / mass0).collect();
    let kinetic = DistributionField::new(sgrid, agrid.clone(), normalized, t_end).unwrap();

    println!(
        "kinetic reference ready (top-hat radius {radius}, μ = {mu}, t = {t_end}); \
         now the particle ladder\n"
    );

    // Particle side: same dynamics, increasing N.
    let params = SimParams::new(FrequencySpec::constant(1.0).unwrap(), mu, dt, radius).unwrap();
    let steps = (t_end / dt).round() as usize;
    let mut distances = Vec::new();
    println!("{:>8}  {:>14}  {:>18}", "N", "L¹ distance", "4.5/√N (noise fit)");
    for (i, &n) in ladder.iter().enumerate() {
        let mut ens = ParticleEnsemble::sample_from_field(&f0, n, 1000 + i as u64).unwrap();
        for _ in 0..steps {
            ens.sde_step(&params).unwrap();
        }
        let empirical = ens.empirical_density(sgrid, agrid.clone(), bandwidth).unwrap();
        let d = empirical.lp_distance(&kinetic, LpOrder::Finite(1.0)).unwrap();
        println!("{n:>8}  {d:>14.6}  {:>18.6}", 4.5 / (n as f64).sqrt());
        distances.push(d);
    }

    let xs: Vec<f64> = ladder.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let slope = fit_slope(&xs, &ys);
    println!("\nlog–log slope of distance vs N: {slope:.3} (Monte Carlo rate is −1/2)");
    assert!(
        (-0.75..=-0.25).contains(&slope),
        "slope {slope} should be near the N^(-1/2) Monte Carlo rate"
    );
    assert!(
        distances.first().unwrap() > distances.last().unwrap(),
        "more particles must mean a smaller distance"
    );

    println!("the particle system converges to the kinetic equation at the expected rate");
}
