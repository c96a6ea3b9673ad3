use anyhow::{bail, Context, Result};
use grid_core::{Cauchy64, Medium64, Nest64, RunConfig};
use scattering_control::{collimated_packet, rightward_pulse, Setup64};
use wave_solver::Prop64;

/// Oscillations across the half-width of a 2D packet. With width 0.2 this
/// gives wavenumber 14, about ten nodes per wavelength at spacing 0.05.
pub const PACKET_PHASE: f64 = 2.8;

/// Everything a wave-equation command needs, built from one configuration.
pub struct WaveExperiment {
    pub config: RunConfig,
    pub medium: Medium64,
    pub nest: Nest64,
    pub setup: Setup64,
    pub h0: Cauchy64,
}

impl WaveExperiment {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let medium = cfg.build_medium::<f64>().context("building the medium")?;
        let nest = cfg.build_nest::<f64>().context("building the domain nest")?;
        let setup = Setup64::new(&medium, &nest, cfg.cfl, cfg.cg_tol, cfg.cg_max_iter).context("setting up the solver")?;
        let h0 = initial_data(cfg, &medium, setup.prop())?;
        Ok(WaveExperiment { config: cfg.clone(), medium, nest, setup, h0 })
    }

    pub fn prop(&self) -> &Prop64 {
        self.setup.prop()
    }
}

/// The pulse described by the configuration; zero width means zero data.
pub fn initial_data(cfg: &RunConfig, medium: &Medium64, prop: &Prop64) -> Result<Cauchy64> {
    let p = &cfg.pulse;
    if p.width == 0.0 {
        return Ok(Cauchy64::zeros(*prop.grid()));
    }
    if !(p.width > 0.0) {
        bail!("pulse width must be positive, got {}", p.width);
    }
    Ok(match cfg.grid.dim {
        1 => rightward_pulse(prop, p.center[0], p.width),
        _ => collimated_packet(medium, p.center, p.width, p.angle_deg, PACKET_PHASE / p.width),
    })
}
