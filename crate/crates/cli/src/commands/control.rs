use std::io::Write;

use exokit_core::gravcomp::assist_torques;
use exokit_core::{ExoConfig, Layout};

use crate::error::{CliError, CliResult};
use crate::Context;

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |t| t.to_string())
}

pub fn run(ctx: &Context, layouts: &[Layout], step_deg: f64, max_deg: f64) -> CliResult<()> {
    if !(step_deg > 0.0 && max_deg >= 0.0 && step_deg.is_finite() && max_deg.is_finite()) {
        return Err(CliError::Usage("--step-deg must be > 0 and --max-deg >= 0".into()));
    }
    let n = (max_deg / step_deg).floor() as usize;
    let mut csv = String::from("layout,theta_t_deg,theta_h_deg,tau_k,tau_h\n");
    let mut text = String::new();
    for &layout in layouts {
        let exo = ExoConfig { layout, ..ctx.config.exo }.normalized();
        exo.validate()?;
        text.push_str(&format!("{}\n{:>12} {:>12} {:>10} {:>10}\n", layout.name(), "theta_t_deg", "theta_h_deg", "tau_k", "tau_h"));
        for i in 0..=n {
            for j in 0..=n {
                let (t, h) = (i as f64 * step_deg, j as f64 * step_deg);
                let tq = assist_torques(&exo, t.to_radians(), h.to_radians());
                csv.push_str(&format!("{},{t},{h},{},{}\n", layout.name(), cell(tq.tau_k), cell(tq.tau_h)));
                let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
                text.push_str(&format!("{t:>12} {h:>12} {:>10} {:>10}\n", show(tq.tau_k), show(tq.tau_h)));
            }
        }
        text.push('\n');
    }
    ctx.out.write_text("control_eval.csv", &csv)?;
    ctx.out.write_text("control_eval.txt", &text)?;
    std::io::stdout().write_all(text.as_bytes()).map_err(CliError::io("<stdout>"))
}
