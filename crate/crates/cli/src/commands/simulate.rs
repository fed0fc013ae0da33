use std::io::Write;

use exokit_core::benchsim::{simulate_backdrive_sequence, simulate_grid, simulate_squat, simulate_step};
use exokit_core::{ExoConfig, TrialLog};
use serde::Serialize;

use crate::config::{BackdriveConfig, GridConfig, SquatConfig, StepConfig};
use crate::error::{CliError, CliResult};
use crate::output::Meta;
use crate::Context;

fn write_log(ctx: &Context, name: &str, log: &TrialLog) -> CliResult<()> {
    ctx.out.write(name, |w| Ok(log.write_csv(w)?))?;
    Ok(())
}

fn say(line: String) -> CliResult<()> {
    writeln!(std::io::stdout(), "{line}").map_err(CliError::io("<stdout>"))
}

fn peak_abs(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

pub fn backdrive(ctx: &Context, cfg: &BackdriveConfig) -> CliResult<()> {
    let params = &ctx.config.actuator;
    let log = simulate_backdrive_sequence(&cfg.phases(), params, cfg.noise_sigma, ctx.seed)?;
    write_log(ctx, "backdrive.csv", &log)?;
    #[derive(Serialize)]
    struct Spec<'a> {
        backdrive: &'a BackdriveConfig,
        actuator: &'a exokit_core::ActuatorParams,
    }
    ctx.out.write_json(
        "backdrive.meta.json",
        &Meta::new("simulate backdrive", ctx.seed, Spec { backdrive: cfg, actuator: params }),
    )?;
    say(format!("samples = {}\npeak_abs_torque = {}", log.len(), peak_abs(&log.tau_meas)))
}

pub fn grid(ctx: &Context, cfg: &GridConfig) -> CliResult<()> {
    let params = &ctx.config.actuator;
    let trial = simulate_grid(params, &cfg.spec(), cfg.noise_sigma, ctx.seed)?;
    write_log(ctx, "grid.csv", &trial.log)?;
    #[derive(Serialize)]
    struct Spec<'a> {
        grid: &'a GridConfig,
        actuator: &'a exokit_core::ActuatorParams,
        points_held: usize,
        skipped: &'a [exokit_core::benchsim::GridPoint],
    }
    ctx.out.write_json(
        "grid.meta.json",
        &Meta::new(
            "simulate grid",
            ctx.seed,
            Spec {
                grid: cfg,
                actuator: params,
                points_held: trial.points.len(),
                skipped: &trial.skipped,
            },
        ),
    )?;
    say(format!(
        "samples = {}\npoints_held = {}\npoints_skipped = {}",
        trial.log.len(),
        trial.points.len(),
        trial.skipped.len()
    ))
}

pub fn step(ctx: &Context, cfg: &StepConfig) -> CliResult<()> {
    let params = &ctx.config.actuator;
    let log = simulate_step(params, cfg.torque, cfg.duration, cfg.sample_rate)?;
    write_log(ctx, "step.csv", &log)?;
    #[derive(Serialize)]
    struct Spec<'a> {
        step: &'a StepConfig,
        actuator: &'a exokit_core::ActuatorParams,
    }
    ctx.out
        .write_json("step.meta.json", &Meta::new("simulate step", ctx.seed, Spec { step: cfg, actuator: params }))?;
    let last = log.len() - 1;
    say(format!("current = {}\nfinal_torque = {}", log.i_q[last], log.tau_meas[last]))
}

pub fn squat(ctx: &Context, cfg: &SquatConfig, exo: &ExoConfig) -> CliResult<()> {
    let run = simulate_squat(&cfg.spec(), exo)?;
    ctx.out.write("squat_results.csv", |w| Ok(run.write_results_csv(w)?))?;
    ctx.out.write("squat_series.csv", |w| Ok(run.write_series_csv(w)?))?;
    ctx.out.write("squat_reps.csv", |w| {
        let io = CliError::io("squat_reps.csv");
        let mut body = String::from(
            "rep,kind,knee_peak_reduction,hip_peak_reduction,knee_integral_reduction,hip_integral_reduction,potential_energy_change\n",
        );
        for r in &run.reps {
            let kind = match r.kind {
                exokit_core::benchsim::squat::RepKind::Lifting => "lifting",
                exokit_core::benchsim::squat::RepKind::Lowering => "lowering",
            };
            body.push_str(&format!(
                "{},{kind},{},{},{},{},{}\n",
                r.rep,
                r.knee_peak_reduction,
                r.hip_peak_reduction,
                r.knee_integral_reduction,
                r.hip_integral_reduction,
                r.potential_energy_change
            ));
        }
        w.write_all(body.as_bytes()).map_err(io)
    })?;
    #[derive(Serialize)]
    struct Spec<'a> {
        squat: &'a SquatConfig,
        exo: &'a ExoConfig,
        body: exokit_core::benchsim::squat::BodyModel,
    }
    ctx.out.write_json(
        "squat.meta.json",
        &Meta::new("simulate squat", ctx.seed, Spec { squat: cfg, exo, body: run.body }),
    )?;
    say(format!(
        "reps = {}\npeak_exo_knee = {}\npeak_exo_hip = {}",
        run.reps.len(),
        run.peak_exo_knee(),
        run.peak_exo_hip()
    ))
}
