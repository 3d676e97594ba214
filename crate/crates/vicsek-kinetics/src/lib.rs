//! Numerical laboratory for a kinetic alignment model of collective motion.
//!
//! Self-propelled particles move at unit speed on a periodic domain and
//! steer toward the mean direction of their neighbours against rotational
//! noise. This crate implements both descriptions of that dynamics and the
//! analysis tools connecting them:
//!
//! * the **kinetic equation** for the phase-space density f(t, x, ω) on
//!   torus × circle,
//!
//!   ∂t f + ω·∇x f = −∇ω·(f F\[f\]) + μ Δω f,
//!   F\[f\] = ν(ω·Ω̄) P_{ω⊥} Ω̄,   Ω̄ = J/(|J| + ε),   J = K ∗ ∫ ω f dω,
//!
//!   solved by Strang splitting (spectral transport + implicit–explicit
//!   angular step) with a frozen-director fixed-point iteration per step
//!   ([`solver`]);
//! * the **stochastic particle system** it approximates: N unit-speed
//!   particles with projected alignment drift and Brownian noise on the
//!   direction sphere ([`particles`]);
//! * the **equilibrium family**: Gibbs-type densities M_Ω ∝ exp(σ(ω·Ω)/μ)
//!   with order parameter c(μ), plus quadrature for their moments
//!   ([`model`], [`quadrature`]);
//! * **experiments**: reproducible, config-driven runs of the standard
//!   studies — regression, norm envelopes, ε-continuation, stability rate
//!   fits, particle ensembles, mean-field comparisons — each writing CSV
//!   traces, JSON summaries, and binary snapshots ([`experiments`]); the
//!   `vicsek-kinetics` binary exposes them on the command line.
//!
//! # Layout
//!
//! | module | contents |
//! |---|---|
//! | [`sphere`] | directions, angular grids, quadrature, spectral calculus on S¹ |
//! | [`field`] | spatial grids and phase-space distribution fields, Lᵖ norms |
//! | [`fourier`] | real FFT plans shared by transport, diffusion, convolution |
//! | [`quadrature`] | Gauss–Legendre rules and exponential-family moments |
//! | [`model`] | frequency ν, kernel K, flux/director moments, equilibria, envelope rates |
//! | [`solver`] | the split-step kinetic solver and its diagnostics |
//! | [`particles`] | the interacting ensemble, SDE stepping, empirical densities |
//! | [`experiments`] | config parsing, run recipes, artifact and baseline I/O |
//!
//! # Where to start
//!
//! The `examples/` directory walks through every capability with printed,
//! self-checking output:
//!
//! * `sphere_identities` — discrete differential-geometry identities;
//! * `equilibria_order_parameter` — c(μ) against closed forms;
//! * `relaxation` — decay onto the equilibrium manifold;
//! * `lp_envelopes` — a-priori norm growth bounds along a run;
//! * `picard_iterations` — per-step fixed-point contraction;
//! * `eps_ladder` — the regularized director and its ε → 0 limit;
//! * `stability_rate` — trajectory separation envelopes;
//! * `particles_noise`, `two_body_alignment` — the particle integrator
//!   against exact statistics and closed-form dynamics;
//! * `meanfield_slope` — particles vs kinetic solution at the Monte Carlo
//!   rate;
//! * `experiment_pipeline` — the config → recipe → artifacts workflow.
//!
//! Determinism is a design rule: solver runs are exactly reproducible, and
//! particle runs draw per-particle, per-step RNG streams from a seed, so
//! every experiment rerun with the same config and seed writes bit-identical
//! artifacts.

pub mod experiments;
pub mod field;
pub mod fourier;
pub mod model;
pub mod particles;
pub mod quadrature;
pub mod solver;
pub mod sphere;
