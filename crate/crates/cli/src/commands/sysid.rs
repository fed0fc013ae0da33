use std::io::Write;
use std::path::{Path, PathBuf};

use exokit_core::sysid::{fit_inertia, fit_torque_model_multi, FitReport, InertiaFit};
use exokit_core::{ActuatorParams, TrialLog};
use serde::Serialize;

use super::open;
use crate::error::{CliError, CliResult};
use crate::Context;

#[derive(Serialize)]
struct Report<'a> {
    inputs: Vec<String>,
    inertia_input: Option<String>,
    params: ActuatorParams,
    torque_model: &'a FitReport,
    inertia: Option<InertiaFit>,
}

/// Written so it can be passed straight back as `--config`.
#[derive(Serialize)]
struct ParamsFile {
    actuator: ActuatorParams,
}

pub fn run(ctx: &Context, inputs: &[PathBuf], inertia: Option<&Path>) -> CliResult<()> {
    let cfg = &ctx.config;
    let inputs = if inputs.is_empty() { cfg.inputs.sysid.as_slice() } else { inputs };
    if inputs.is_empty() {
        return Err(CliError::Usage("sysid needs at least one trial CSV".into()));
    }
    let inertia = inertia.or(cfg.inputs.inertia.as_deref());
    let logs = inputs
        .iter()
        .map(|p| TrialLog::read_csv(open(p)?).map_err(|e| located(p, e)))
        .collect::<CliResult<Vec<_>>>()?;
    let opts = cfg.sysid;
    let fit = fit_torque_model_multi(&logs, &opts)?;
    let mut params = ActuatorParams {
        reflected_inertia: cfg.actuator.reflected_inertia,
        ..fit.params
    };
    let inertia_fit = match inertia {
        Some(p) => {
            let log = TrialLog::read_csv(open(p)?).map_err(|e| located(p, e))?;
            let j = fit_inertia(&log, &fit.params, &opts)?;
            params.reflected_inertia = j.inertia;
            Some(j)
        }
        None => None,
    };

    let show = |p: &Path| p.display().to_string();
    let report = Report {
        inputs: inputs.iter().map(|p| show(p)).collect(),
        inertia_input: inertia.map(show),
        params,
        torque_model: &fit,
        inertia: inertia_fit,
    };
    ctx.out.write_json("fit_report.json", &report)?;
    let toml = toml::to_string(&ParamsFile { actuator: params })
        .map_err(|e| CliError::Config(format!("cannot serialize parameters: {e}")))?;
    ctx.out.write_text("fit_params.toml", &toml)?;

    let mut text = String::new();
    for (k, v) in [
        ("bias", params.bias),
        ("k_tau", params.k_tau),
        ("k_n", params.k_n),
        ("f_coulomb", params.f_coulomb),
        ("f_gear", params.f_gear),
        ("reflected_inertia", params.reflected_inertia),
        ("residual_rmse", fit.residual_rmse),
        ("residual_p95", fit.residual_p95),
    ] {
        text.push_str(&format!("{k} = {v}\n"));
    }
    if let Some(j) = inertia_fit {
        text.push_str(&format!("inertia_rmse_before = {}\ninertia_rmse_after = {}\n", j.rmse_before, j.rmse_after));
    }
    ctx.out.write_text("fit_report.txt", &text)?;
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(CliError::io("<stdout>"))?;
    Ok(())
}

/// Prefixes schema errors with the file they came from.
fn located(path: &Path, e: exokit_core::Error) -> CliError {
    match e {
        exokit_core::Error::Schema(msg) => exokit_core::Error::Schema(format!("{}: {msg}", path.display())).into(),
        other => other.into(),
    }
}
