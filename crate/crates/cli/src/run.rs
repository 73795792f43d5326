//! One function per verb. Each writes its artifacts into the output directory
//! and returns nothing else; the manifest is written by [`execute`].

use std::f64::consts::PI;
use std::time::Instant;

use anyonvlasov::coherent_husimi::{husimi1_on_p_grid, SqueezedScales};
use anyonvlasov::diaconis_freedman::montecarlo::union_bound;
use anyonvlasov::diaconis_freedman::{
    df_marginal_exact, df_marginal_formula, mc_violation_probability, tv_distance, DiscreteSymmetricMeasure,
    TfPhaseSampler, Tiling,
};
use anyonvlasov::hartree_fock::{
    calibrate_gap_constant, direct_energy_oracle, hartree_energy, hf_energy, regularization_gap_bound,
    InteractionOperators,
};
use anyonvlasov::kernels::{build_profile, radial_kernel, Kernel};
use anyonvlasov::slater::{hermite_gaussian, SlaterState};
use anyonvlasov::tf_solver::{solve_tf, TFSolution};
use anyonvlasov::vlasov::{
    build_minimizer, momentum_distribution, pauli_and_mass_report, vlasov_energy, VlasovSetup,
};
use anyonvlasov::{DensityField, Grid2D};
use clap::ValueEnum;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{OrbitalSpec, RunConfig};
use crate::output::OutputDir;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    TfSolve,
    VlasovEnergy,
    MomentumDist,
    Husimi,
    HfEnergy,
    DfCheck,
    PauliMc,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::TfSolve => "tf-solve",
            Verb::VlasovEnergy => "vlasov-energy",
            Verb::MomentumDist => "momentum-dist",
            Verb::Husimi => "husimi",
            Verb::HfEnergy => "hf-energy",
            Verb::DfCheck => "df-check",
            Verb::PauliMc => "pauli-mc",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    verb: &'static str,
    seed: u64,
    config: &'a RunConfig,
    derived: Derived,
    threads: usize,
    wall_time_seconds: f64,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Derived {
    hbar: f64,
    alpha: f64,
    r: f64,
}

/// Run `verb` and write `manifest.json` plus a `config.json` that reproduces
/// the run when passed back through `--config`.
pub fn execute(verb: Verb, cfg: &RunConfig) -> Result<OutputDir, CliError> {
    let start = Instant::now();
    let mut out = OutputDir::create(&cfg.out)?;
    out.json("config.json", cfg)?;
    match verb {
        Verb::TfSolve => tf_solve(cfg, &mut out)?,
        Verb::VlasovEnergy => vlasov(cfg, &mut out)?,
        Verb::MomentumDist => momentum(cfg, &mut out)?,
        Verb::Husimi => husimi(cfg, &mut out)?,
        Verb::HfEnergy => hf(cfg, &mut out)?,
        Verb::DfCheck => df_check(cfg, &mut out)?,
        Verb::PauliMc => pauli_mc(cfg, &mut out)?,
    }
    let manifest = Manifest {
        tool: "anyonvlasov",
        version: env!("CARGO_PKG_VERSION"),
        verb: verb.name(),
        seed: cfg.seed,
        config: cfg,
        derived: Derived { hbar: cfg.regime.hbar(), alpha: cfg.regime.alpha(), r: cfg.regime.r() },
        threads: rayon::current_num_threads(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        outputs: out.written().to_vec(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(out)
}

fn tf_solution(cfg: &RunConfig) -> Result<TFSolution, CliError> {
    Ok(solve_tf(&cfg.trap, cfg.tf.mass, cfg.grid, cfg.tf.tol)?)
}

fn density_rows(rho: &DensityField) -> impl Iterator<Item = Vec<f64>> + '_ {
    rho.grid.points().zip(&rho.values).map(|(x, v)| vec![x[0], x[1], *v])
}

fn tf_solve(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let s = tf_solution(cfg)?;
    out.json("tf.json", &s.summary())?;
    out.csv("density.csv", &["x1", "x2", "rho"], density_rows(&s.rho))
}

fn mean_field_setup(cfg: &RunConfig) -> Result<VlasovSetup, CliError> {
    let kernel = if cfg.kernel.smear_mean_field {
        let profile = build_profile(cfg.kernel.max_exponent)?;
        Kernel::Smeared(radial_kernel(profile, cfg.regime.r(), cfg.kernel.radial_grid)?)
    } else {
        Kernel::Pointlike
    };
    Ok(VlasovSetup { trap: cfg.trap, external: cfg.external, beta: cfg.regime.beta_stat, kernel })
}

fn momentum_grid(cfg: &RunConfig) -> Result<Grid2D, CliError> {
    cfg.momentum_grid.ok_or_else(|| CliError::Config("momentum_grid: required by this verb".into()))
}

fn vlasov(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let p_grid = momentum_grid(cfg)?;
    let tf = tf_solution(cfg)?;
    let setup = mean_field_setup(cfg)?;
    let m = build_minimizer(&tf.rho, &setup, p_grid)?;
    let energy = vlasov_energy(&m, &setup)?;
    let report = pauli_and_mass_report(&m);
    out.json(
        "vlasov.json",
        &json!({
            "energy": energy,
            "e_tf": tf.energy,
            "relative_gap": (energy.total - tf.energy) / tf.energy,
            "pauli": report,
            "beta": setup.beta,
            "kernel_radius": setup.kernel.radius(),
        }),
    )
}

fn momentum(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let p_grid = momentum_grid(cfg)?;
    let tf = tf_solution(cfg)?;
    let setup = mean_field_setup(cfg)?;
    let t = momentum_distribution(&tf.rho, &setup)?;
    if t.support_radius() > p_grid.half_width {
        return Err(anyonvlasov::Error::MomentumBoxTooSmall { needed: t.support_radius(), available: p_grid.half_width }
            .into());
    }
    let values = t.on_grid(&p_grid);
    out.json(
        "momentum.json",
        &json!({
            "normalisation": p_grid.integrate(&values) / (4.0 * PI * PI),
            "support_radius": t.support_radius(),
            "beta": setup.beta,
        }),
    )?;
    out.csv("momentum.csv", &["p1", "p2", "t"], p_grid.points().zip(&values).map(|(p, v)| vec![p[0], p[1], *v]))
}

fn slater(grid: Grid2D, spec: &OrbitalSpec) -> Result<SlaterState, CliError> {
    let fs = spec.modes.iter().map(|&m| hermite_gaussian(&grid, m, spec.sigma, spec.center)).collect();
    Ok(SlaterState::orthonormalized(grid, fs)?)
}

fn husimi(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let h = &cfg.husimi;
    let hbar = cfg.regime.hbar();
    let scales = SqueezedScales::new(h.hbar_x.unwrap_or(hbar), h.hbar_p.unwrap_or(hbar))?;
    let state = slater(cfg.grid, &h.state)?;
    let m = husimi1_on_p_grid(&state, h.x, &h.p_grid, &scales)?;
    out.json(
        "husimi.json",
        &json!({
            "scales": scales,
            "x": h.x,
            "max": m.iter().copied().fold(0.0, f64::max),
            // (2π)^{-2}∫m dp, the position marginal at x.
            "position_marginal": h.p_grid.integrate(&m) / (4.0 * PI * PI),
        }),
    )?;
    out.csv("husimi.csv", &["p1", "p2", "m1"], h.p_grid.points().zip(&m).map(|(p, v)| vec![p[0], p[1], *v]))
}

fn hf(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let state = slater(cfg.grid, &cfg.hf.state)?;
    if state.n() != cfg.regime.n {
        return Err(CliError::Config(format!(
            "hf.state: {} orbitals for regime.n = {}",
            state.n(),
            cfg.regime.n
        )));
    }
    let profile = build_profile(cfg.kernel.max_exponent)?;
    let ops = InteractionOperators::from_regime(&cfg.regime, cfg.trap, cfg.external, profile, cfg.kernel.radial_grid)?;
    let breakdown = hf_energy(&state, &ops)?;
    let hartree = hartree_energy(&state, &ops)?;
    let constant = calibrate_gap_constant(profile)?;
    let gap_bound = regularization_gap_bound(hartree.max(0.0), cfg.regime.r(), constant)?;
    let oracle = if cfg.hf.oracle_samples > 0 {
        Some(direct_energy_oracle(&state, &ops, cfg.hf.oracle_samples, cfg.seed)?)
    } else {
        None
    };
    out.json(
        "hf.json",
        &json!({
            "breakdown": breakdown,
            "hartree_energy": hartree,
            "gap_constant": constant,
            "gap_bound": gap_bound,
            "oracle": oracle,
            "hbar": ops.hbar,
            "alpha": ops.alpha,
            "r": ops.kernel.radius(),
        }),
    )
}

fn df_check(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let d = cfg.df;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let support: Vec<[f64; 4]> = (0..d.atoms).map(|a| [0.5 * a as f64, 0.0, 0.1 * a as f64, 0.0]).collect();
    let configs = d.atoms.checked_pow(d.n_particles as u32).unwrap_or(usize::MAX);
    if configs > 1 << 20 {
        return Err(CliError::Config("df: atoms^n_particles is too large to enumerate".into()));
    }
    let raw: Vec<u64> = (0..configs).map(|_| rng.gen_range(0..d.max_weight.max(1))).collect();
    let mu = DiscreteSymmetricMeasure::symmetrized(support, d.n_particles, &raw)?;
    let mut rows = Vec::new();
    for n in 1..=d.n_particles.min(3) {
        let exact = df_marginal_exact(&mu, n)?;
        let formula_matches = exact == df_marginal_formula(&mu, n)?;
        let tv = tv_distance(&mu.marginal(n)?, &exact)?;
        let bound = 2.0 * (n * (n - 1)) as f64 / d.n_particles as f64;
        rows.push(json!({
            "n": n,
            "formula_matches": formula_matches,
            "tv": tv.to_f64(),
            "tv_exact": tv.to_string(),
            "tv_bound": bound,
        }));
    }
    out.json("df.json", &json!({ "n_particles": d.n_particles, "atoms": d.atoms, "marginals": rows }))
}

fn pauli_mc(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), CliError> {
    let p = &cfg.pauli_mc;
    let np = cfg.regime.n;
    let hbar = cfg.regime.hbar();
    let rho = tf_solution(cfg)?.rho;
    let sampler = TfPhaseSampler::new(&rho)?;
    let tiling = Tiling::from_exponent(np, p.tiling_exponent, p.n_per_axis)?;
    let mut results = Vec::new();
    let mut hist_rows = Vec::new();
    for &eps in &p.eps {
        let est = mc_violation_probability(|rng| sampler.sample_config(np, rng), &tiling, eps, p.trials, cfg.seed)?;
        let bound = union_bound(&tiling, eps, np, hbar, p.n_max)?;
        for (count, &trials) in est.worst_occupancy.iter().enumerate() {
            if trials > 0 {
                hist_rows.push(vec![eps, count as f64, trials as f64]);
            }
        }
        results.push(json!({ "eps": eps, "estimate": est, "union_bound": bound }));
    }
    out.json("pauli_mc.json", &json!({ "n_particles": np, "tiling": tiling, "results": results }))?;
    out.csv("worst_occupancy.csv", &["eps", "worst_count", "trials"], hist_rows)
}
