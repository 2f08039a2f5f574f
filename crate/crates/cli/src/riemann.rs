//! The `riemann` subcommand: solve one 1D Riemann problem exactly and
//! emit equally spaced samples of the self-similar solution as CSV, with
//! the star-region pressure and velocity in the header comment.

use crate::{runtime, usage, CliError};
use kfv_core::gas::GasModel;
use kfv_core::riemann::{solve, Prim1};
use kfv_core::Real;

#[allow(clippy::too_many_arguments)]
pub fn riemann_cmd(
    left: &str,
    right: &str,
    gamma: f64,
    samples: usize,
    xi_min: f64,
    xi_max: f64,
) -> Result<(), CliError> {
    let left = parse_state(left)?;
    let right = parse_state(right)?;
    let gas = GasModel::new(gamma, 0.0).map_err(usage)?;
    if samples < 2 {
        return Err(CliError::Usage(format!(
            "samples must be at least 2, got {samples}"
        )));
    }
    if !(xi_max > xi_min) || !xi_min.is_finite() || !xi_max.is_finite() {
        return Err(CliError::Usage(format!(
            "need xi_min < xi_max, got [{xi_min}, {xi_max}]"
        )));
    }
    let fan = solve(left, right, &gas).map_err(runtime)?;
    print!("{}", format_samples(&fan, gamma, samples, xi_min, xi_max));
    Ok(())
}

fn format_samples(
    fan: &kfv_core::riemann::RiemannFan<Real>,
    gamma: f64,
    samples: usize,
    xi_min: f64,
    xi_max: f64,
) -> String {
    let mut out = format!(
        "# kfv-riemann v1 gamma={gamma} p_star={:.6e} u_star={:.6e}\nxi,rho,u,p\n",
        fan.p_star(),
        fan.u_star()
    );
    for k in 0..samples {
        let frac = k as f64 / (samples - 1) as f64;
        let xi = xi_min + (xi_max - xi_min) * frac;
        let s = fan.sample(xi);
        out.push_str(&format!("{xi},{},{},{}\n", s.rho, s.u, s.p));
    }
    out
}

/// Parses `rho,u,p`.
fn parse_state(text: &str) -> Result<Prim1<Real>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "a state is rho,u,p (3 comma-separated numbers), got `{text}`"
        )));
    }
    let mut values = [0.0; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("bad state component `{part}`: {e}")))?;
    }
    let state = Prim1::new(values[0], values[1], values[2]);
    if !(state.rho > 0.0) || !(state.p > 0.0) {
        return Err(CliError::Usage(format!(
            "density and pressure must be positive, got `{text}`"
        )));
    }
    Ok(state)
}
