//! The evolve / efficiency / optimize / design subcommands.

use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use purcell::design::{
    iso_efficiency_max_length, rates_at_length, sweep_length_birefringence, takahashi_preset,
    CavityGeometry, RateUnit,
};
use purcell::dynamics::{
    self, emission_budget_steady, emission_budget_timedomain, EmissionBudget,
    StopCriteria, Trajectory,
};
use purcell::optimize::{optimize_model, Objective, VaryParam};
use purcell::{Error, ModelSpec, Rates, Result, Scheme};

use crate::config::{parse_window, Grid, Resolver};
use crate::output::{label_column, write_csv, write_json};

/// Scheme, rate and i/o flags shared by the model-driven subcommands.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Level scheme: two-level | two-level-biref | three-level | chain
    #[arg(long)]
    pub scheme: Option<String>,
    /// Atom-cavity coupling rate
    #[arg(long)]
    pub g: Option<f64>,
    /// Cavity field decay rate
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Atomic amplitude decay rate
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cavity detuning from atomic resonance
    #[arg(long)]
    pub delta_c: Option<f64>,
    /// Polarisation eigenmode splitting (birefringence)
    #[arg(long)]
    pub delta_p: Option<f64>,
    /// Ground-state (Zeeman) splitting
    #[arg(long)]
    pub delta_z: Option<f64>,
    /// Ground-state chain coupling rate
    #[arg(long)]
    pub omega: Option<f64>,
    /// Ground-state count (chain scheme)
    #[arg(long)]
    pub n: Option<usize>,
    /// Rate units: dimensionless (g = 1 reference) | mhz (frequency/2pi)
    #[arg(long)]
    pub units: Option<String>,
    /// Flat key = value config file; flags win on conflict
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path (stdout when omitted)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub struct ResolvedModel {
    pub scheme: Scheme,
    /// Rates in angular units (mhz inputs are multiplied by 2pi once here).
    pub rates: Rates,
    pub n: usize,
}

pub fn parse_scheme(name: &str) -> Result<Scheme> {
    match name {
        "two-level" => Ok(Scheme::TwoLevel),
        "two-level-biref" | "two-level-birefringent" => Ok(Scheme::TwoLevelBirefringent),
        "three-level" => Ok(Scheme::ThreeLevel),
        "chain" | "n-level-chain" => Ok(Scheme::NLevelChain),
        other => Err(Error::Config(format!(
            "unknown scheme `{other}`; expected two-level, two-level-biref, three-level or chain"
        ))),
    }
}

pub fn resolve_model(args: &ModelArgs, r: &mut Resolver) -> Result<ResolvedModel> {
    let scheme_name = r.string("scheme", args.scheme.clone(), "")?;
    if scheme_name.is_empty() {
        return Err(Error::Config(
            "missing --scheme (two-level | two-level-biref | three-level | chain)".into(),
        ));
    }
    let scheme = parse_scheme(&scheme_name)?;
    let units = r.string("units", args.units.clone(), "dimensionless")?;
    let scale = match units.as_str() {
        "dimensionless" => 1.0,
        "mhz" => TAU,
        other => {
            return Err(Error::Config(format!(
                "unknown units `{other}`; expected dimensionless or mhz"
            )))
        }
    };
    let rates = Rates {
        g: r.f64("g", args.g, 0.0)?,
        kappa: r.f64("kappa", args.kappa, 0.0)?,
        gamma: r.f64("gamma", args.gamma, 0.0)?,
        delta_c: r.f64("delta-c", args.delta_c, 0.0)?,
        delta_p: r.f64("delta-p", args.delta_p, 0.0)?,
        delta_z: r.f64("delta-z", args.delta_z, 0.0)?,
        omega: r.f64("omega", args.omega, 0.0)?,
    }
    .scaled(scale);
    let n = r.usize("n", args.n, 1)?;
    Ok(ResolvedModel { scheme, rates, n })
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Integration span (units 1/rate; microseconds with --units mhz)
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Local relative error bound for the integrator
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Uniform sample count; 0 selects the adaptive grid
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<()> {
    let mut r = Resolver::new(args.model.config.as_deref())?;
    let model = resolve_model(&args.model, &mut r)?;
    let tmax = r.f64("tmax", args.tmax, 0.0)?;
    if tmax <= 0.0 {
        return Err(Error::Config("the time grid is empty: --tmax must be positive".into()));
    }
    let rel_tol = r.f64("rel-tol", args.rel_tol, 1e-9)?;
    let samples = r.usize("samples", args.samples, 0)?;
    if samples == 1 {
        return Err(Error::Config("--samples must be 0 (adaptive) or at least 2".into()));
    }

    let spec = ModelSpec { scheme: model.scheme, rates: model.rates, n: model.n };
    let h = spec.build()?;
    let psi0 = h.excited_state();
    let traj = if samples == 0 {
        dynamics::evolve(&h, &psi0, tmax, rel_tol)?
    } else {
        let times: Vec<f64> = (0..samples)
            .map(|i| tmax * i as f64 / (samples - 1) as f64)
            .collect();
        dynamics::evolve_sampled(&h, &psi0, &times, rel_tol)?
    };

    let mut columns = vec!["t".to_string()];
    for label in &traj.labels {
        let c = label_column(label);
        columns.push(format!("re_{c}"));
        columns.push(format!("im_{c}"));
        columns.push(format!("p_{c}"));
    }
    columns.push("p_cavity".into());
    columns.push("p_excited".into());
    columns.push("norm".into());

    let cavity = h.cavity_mask().to_vec();
    let excited = h.excited_mask().to_vec();
    let rows = traj.times.iter().zip(&traj.amplitudes).map(move |(&t, amp)| {
        let mut row = vec![t];
        for c in amp.iter() {
            row.push(c.re);
            row.push(c.im);
            row.push(c.norm_sqr());
        }
        let masked = |mask: &[bool]| -> f64 {
            amp.iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(c, _)| c.norm_sqr())
                .sum()
        };
        row.push(masked(&cavity));
        row.push(masked(&excited));
        row.push(amp.norm_squared());
        row
    });
    write_csv(args.model.output.as_deref(), "evolve", r.echo(), &columns, rows)
}

#[derive(Args, Debug)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Budget route: steady | time | analytic
    #[arg(long)]
    pub method: Option<String>,
    /// Stop once total population falls below this floor (time method)
    #[arg(long)]
    pub pop_floor: Option<f64>,
    /// Hard integration ceiling (time method)
    #[arg(long)]
    pub t_ceiling: Option<f64>,
}

pub fn cmd_efficiency(args: &EfficiencyArgs) -> Result<()> {
    let mut r = Resolver::new(args.model.config.as_deref())?;
    let model = resolve_model(&args.model, &mut r)?;
    let method = r.string("method", args.method.clone(), "steady")?;
    let spec = ModelSpec { scheme: model.scheme, rates: model.rates, n: model.n };

    let budget: EmissionBudget = match method.as_str() {
        "steady" => {
            let h = spec.build()?;
            emission_budget_steady(&h, &h.excited_state(), model.rates.kappa, model.rates.gamma)?
        }
        "time" => {
            let stop = StopCriteria {
                pop_floor: r.f64("pop-floor", args.pop_floor, 1e-10)?,
                t_ceiling: r.opt_f64("t-ceiling", args.t_ceiling)?,
            };
            let h = spec.build()?;
            emission_budget_timedomain(
                &h,
                &h.excited_state(),
                model.rates.kappa,
                model.rates.gamma,
                stop,
            )?
        }
        "analytic" => {
            if model.scheme != Scheme::TwoLevel {
                return Err(Error::Config(
                    "--method analytic applies to the two-level scheme only".into(),
                ));
            }
            if model.rates.kappa <= 0.0 && model.rates.gamma <= 0.0 {
                return Err(Error::NoDecayChannel);
            }
            let eta = dynamics::analytic_two_level_efficiency(
                model.rates.g,
                model.rates.kappa,
                model.rates.gamma,
            )?;
            EmissionBudget {
                eta_ext: eta,
                eta_free: 1.0 - eta,
                residual: 0.0,
                purity: None,
                err_est: f64::EPSILON,
                converged: true,
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown method `{other}`; expected steady, time or analytic"
            )))
        }
    };

    write_json(
        args.model.output.as_deref(),
        "efficiency",
        r.echo(),
        json!({
            "method": method,
            "eta_ext": budget.eta_ext,
            "eta_free": budget.eta_free,
            "residual": budget.residual,
            "purity": budget.purity,
            "err_est": budget.err_est,
            "converged": budget.converged,
        }),
    )
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated parameters to vary: delta-p, delta-z, omega
    #[arg(long)]
    pub vary: Option<String>,
    /// Cooperativity; sets kappa = ratio*gamma and g = sqrt(2 C kappa gamma)
    #[arg(long)]
    pub c: Option<f64>,
    /// kappa/gamma ratio used with --c (default 1/sqrt(multiplicity))
    #[arg(long)]
    pub kappa_over_gamma: Option<f64>,
    /// Objective: eta (extraction efficiency) | window (mean cavity population)
    #[arg(long)]
    pub objective: Option<String>,
    /// Averaging window for the window objective, in units of 1/g (accepts a
    /// `pi` suffix, e.g. 8pi)
    #[arg(long)]
    pub window: Option<String>,
    /// Upper search bound per varied parameter, in units of g
    #[arg(long)]
    pub box_max: Option<f64>,
    /// Convergence tolerance, in units of g
    #[arg(long)]
    pub tol: Option<f64>,
}

fn parse_vary(list: &str) -> Result<Vec<VaryParam>> {
    list.split(',')
        .map(|item| match item.trim() {
            "delta-p" | "delta_p" => Ok(VaryParam::DeltaP),
            "delta-z" | "delta_z" => Ok(VaryParam::DeltaZ),
            "omega" => Ok(VaryParam::Omega),
            other => Err(Error::Config(format!(
                "unknown vary parameter `{other}`; expected delta-p, delta-z or omega"
            ))),
        })
        .collect()
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let mut r = Resolver::new(args.model.config.as_deref())?;
    let mut model = resolve_model(&args.model, &mut r)?;
    let vary_raw = r.string("vary", args.vary.clone(), "")?;
    if vary_raw.is_empty() {
        return Err(Error::Config("missing --vary (e.g. --vary delta-p)".into()));
    }
    let vary = parse_vary(&vary_raw)?;

    if let Some(c) = r.opt_f64("c", args.c)? {
        if args.model.g.is_some() {
            return Err(Error::Config("--c and --g are mutually exclusive".into()));
        }
        if !(c > 0.0) {
            return Err(Error::Config("--c must be positive".into()));
        }
        let m = model.scheme.emitting_multiplicity(model.n);
        let gamma = if model.rates.gamma > 0.0 { model.rates.gamma } else { 1.0 };
        let ratio = r.f64(
            "kappa-over-gamma",
            args.kappa_over_gamma,
            1.0 / (m as f64).sqrt(),
        )?;
        let kappa = ratio * gamma;
        let g = (2.0 * c * kappa * gamma).sqrt();
        model.rates = Rates { g, kappa, gamma, ..model.rates };
        r.note("derived-g", crate::config::fmt_float(g));
        r.note("derived-kappa", crate::config::fmt_float(kappa));
    }
    if model.rates.g <= 0.0 {
        return Err(Error::Config("need --g > 0 or --c to fix the coupling rate".into()));
    }

    let objective_name = r.string("objective", args.objective.clone(), "eta")?;
    let g = model.rates.g;
    let objective = match objective_name.as_str() {
        "eta" => Objective::ExtractionEfficiency,
        "window" => {
            let w = parse_window(&r.string("window", args.window.clone(), "8pi")?)?;
            Objective::WindowedCavityPopulation { window: w / g }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown objective `{other}`; expected eta or window"
            )))
        }
    };
    let box_max = r.f64("box-max", args.box_max, 4.0)?;
    let tol = r.f64("tol", args.tol, 1e-4)?;

    let spec = ModelSpec { scheme: model.scheme, rates: model.rates, n: model.n };
    let result = optimize_model(&spec, &vary, objective, box_max * g, tol * g)?;

    let params: serde_json::Map<String, serde_json::Value> = result
        .best_params
        .iter()
        .map(|(k, v)| (k.clone(), json!(v)))
        .collect();
    write_json(
        args.model.output.as_deref(),
        "optimize",
        r.echo(),
        json!({
            "objective": objective_name,
            "best_params": params,
            "best_value": result.best_value,
            "baseline_value": result.baseline_value,
            "enhancement": result.enhancement,
            "enhancement_pp": 100.0 * result.enhancement,
            "evaluations": result.evaluations,
            "converged": result.converged,
            "rates": {
                "g": model.rates.g,
                "kappa": model.rates.kappa,
                "gamma": model.rates.gamma,
            },
        }),
    )
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    /// Geometry preset name (available: takahashi)
    #[arg(long)]
    pub preset: Option<String>,
    /// Reference cavity length in micrometres (custom geometry)
    #[arg(long)]
    pub l0: Option<f64>,
    /// Coupling rate at l0 (custom geometry)
    #[arg(long)]
    pub g0: Option<f64>,
    /// Cavity decay rate at l0 (custom geometry)
    #[arg(long)]
    pub kappa0: Option<f64>,
    /// Free-space atomic decay rate (custom geometry)
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Geometry rate units: dimensionless | mhz
    #[arg(long)]
    pub units: Option<String>,
    /// Cavity length grid start:stop:count in micrometres
    #[arg(long)]
    pub lengths: Option<String>,
    /// Birefringence grid start:stop:count in MHz (frequency/2pi)
    #[arg(long)]
    pub delta_p_mhz: Option<String>,
    /// Birefringence grid start:stop:count in the geometry's rate unit
    #[arg(long)]
    pub delta_p: Option<String>,
    /// Report the longest cavity meeting this efficiency target instead of
    /// sweeping
    #[arg(long)]
    pub eta_target: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn cmd_design(args: &DesignArgs) -> Result<()> {
    let mut r = Resolver::new(args.config.as_deref())?;
    let preset = r.opt_string("preset", args.preset.clone())?;
    let geom: CavityGeometry = match preset.as_deref() {
        Some("takahashi") => takahashi_preset(),
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown preset `{other}`; available presets: takahashi"
            )))
        }
        None => {
            let unit = match r.string("units", args.units.clone(), "mhz")?.as_str() {
                "mhz" => RateUnit::MegahertzOver2Pi,
                "dimensionless" => RateUnit::Dimensionless,
                other => {
                    return Err(Error::Config(format!(
                        "unknown units `{other}`; expected dimensionless or mhz"
                    )))
                }
            };
            CavityGeometry {
                l0: r.f64("l0", args.l0, 0.0)?,
                g0: r.f64("g0", args.g0, 0.0)?,
                kappa0: r.f64("kappa0", args.kappa0, 0.0)?,
                gamma: r.f64("gamma", args.gamma, 0.0)?,
                unit,
            }
        }
    };
    geom.validate()?;
    r.note("geometry-l0", crate::config::fmt_float(geom.l0));
    r.note("geometry-g0", crate::config::fmt_float(geom.g0));
    r.note("geometry-kappa0", crate::config::fmt_float(geom.kappa0));
    r.note("geometry-gamma", crate::config::fmt_float(geom.gamma));
    r.note("geometry-units", format!("{:?}", geom.unit));

    let dp_raw = match (&args.delta_p_mhz, &args.delta_p) {
        (Some(_), Some(_)) => {
            return Err(Error::Config("--delta-p-mhz and --delta-p are mutually exclusive".into()))
        }
        (Some(v), None) => r.string("delta-p-mhz", Some(v.clone()), "0:40:81")?,
        (None, Some(v)) => r.string("delta-p", Some(v.clone()), "0:40:81")?,
        (None, None) => r.string("delta-p-mhz", None, "0:40:81")?,
    };
    let dp_grid: Grid = dp_raw
        .parse()
        .map_err(|e| Error::Config(format!("bad birefringence grid: {e}")))?;

    if let Some(target) = r.opt_f64("eta-target", args.eta_target)? {
        let (l_max, dp_star) =
            iso_efficiency_max_length(&geom, target, (dp_grid.start, dp_grid.stop))?;
        let rates = rates_at_length(&geom, l_max)?;
        return write_json(
            args.output.as_deref(),
            "design",
            r.echo(),
            json!({
                "eta_target": target,
                "l_max": l_max,
                "delta_p_at_l_max": dp_star,
                "rates_at_l_max": { "g": rates.g, "kappa": rates.kappa, "gamma": rates.gamma },
            }),
        );
    }

    let lengths_raw = r.string("lengths", args.lengths.clone(), "300:900:61")?;
    let l_grid: Grid = lengths_raw
        .parse()
        .map_err(|e| Error::Config(format!("bad length grid: {e}")))?;
    let cells = sweep_length_birefringence(&geom, &l_grid.points(), &dp_grid.points())?;
    let columns: Vec<String> =
        ["l_um", "delta_p", "eta_ext", "purity"].iter().map(|s| s.to_string()).collect();
    write_csv(
        args.output.as_deref(),
        "design",
        r.echo(),
        &columns,
        cells.into_iter().map(|c| vec![c.l, c.delta_p, c.eta_ext, c.purity]),
    )
}

/// Uniformly sampled trajectory helper shared with the reproduce bundles.
pub fn sampled_trajectory(
    spec: &ModelSpec,
    tmax: f64,
    samples: usize,
) -> Result<(Trajectory, Vec<bool>, Vec<bool>)> {
    let h = spec.build()?;
    let times: Vec<f64> =
        (0..samples).map(|i| tmax * i as f64 / (samples - 1) as f64).collect();
    let traj = dynamics::evolve_sampled(&h, &h.excited_state(), &times, 1e-9)?;
    Ok((traj, h.cavity_mask().to_vec(), h.excited_mask().to_vec()))
}

