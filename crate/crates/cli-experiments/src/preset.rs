//! Built-in experiment configurations.
//!
//! Every preset is an ordinary configuration file compiled into the binary,
//! so `sclab control fig2-suppression` and `sclab control path/to/file.conf`
//! go through the same parser and validation.

use anyhow::{bail, Context, Result};
use grid_core::{load_config, parse_config, MediumSource, RunConfig};
use microlocal_rays::Dir;
use std::path::Path;

/// Explicit sources for the ray command, overriding the pulse settings.
#[derive(Clone, Copy, Debug)]
pub struct RaySource {
    pub slowness: f64,
    pub covectors: &'static [(Dir, f64)],
}

#[derive(Clone, Copy, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
    pub rays: Option<RaySource>,
}

macro_rules! preset {
    ($name:literal, $summary:literal) => {
        Preset { name: $name, summary: $summary, text: include_str!(concat!("../presets/", $name, ".conf")), rays: None }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("fig1-two-interface", "rightward pulse through two interfaces (simulate)"),
    preset!("fig2-suppression", "scattering control over 50 iterations on the two-interface medium"),
    preset!("fig16-compare", "Rose and Cauchy-data Marchenko tails side by side"),
    preset!("constant", "homogeneous medium, where h0 is already a fixed point"),
    preset!("gap-2d", "oblique packet under a flat boundary, where the iteration does not stabilize"),
    preset!("rays-two-interface", "broken rays of a slanted source in the two-interface medium"),
    preset!("rays-empty", "a single unbroken ray in a homogeneous medium"),
    preset!("rays-glancing", "a source whose transmitted leg would be glancing"),
    Preset {
        name: "rays-support-3",
        summary: "returning wave whose constructive tail has three singularities",
        text: include_str!("../presets/rays-support-3.conf"),
        rays: Some(RaySource { slowness: 0.6, covectors: &[(Dir::Up, 3656.0 / 1445.0), (Dir::Down, 2.0)] }),
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn config(&self) -> Result<RunConfig> {
        let cfg = parse_config(self.text).with_context(|| format!("preset {}", self.name))?;
        cfg.validate().with_context(|| format!("preset {}", self.name))?;
        Ok(cfg)
    }
}

/// A preset name or a path to a configuration file.
pub fn resolve(arg: &str) -> Result<(RunConfig, Option<RaySource>)> {
    if let Some(p) = find(arg) {
        return Ok((p.config()?, p.rays));
    }
    let path = Path::new(arg);
    if !path.exists() {
        let names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        bail!("{arg} is neither a preset ({}) nor an existing file", names.join(", "));
    }
    let mut cfg = load_config(path).with_context(|| format!("loading {arg}"))?;
    // Speed files are named relative to the configuration that uses them.
    if let MediumSource::File(f) = &mut cfg.medium {
        if f.is_relative() {
            if let Some(dir) = path.parent() {
                *f = dir.join(&*f);
            }
        }
    }
    Ok((cfg, None))
}

/// The same experiment with every grid axis having `num / den` times as many cells.
pub fn rescaled(cfg: &RunConfig, num: usize, den: usize) -> Result<RunConfig> {
    let mut out = cfg.clone();
    for a in 0..cfg.grid.dim {
        let c = cfg.grid.cells[a] * num;
        if c % den != 0 {
            bail!("{} cells on axis {a} cannot be scaled by {num}/{den}", cfg.grid.cells[a]);
        }
        out.grid.cells[a] = c / den;
    }
    out.name = format!("{}@{}x{}", cfg.name, num, den);
    Ok(out)
}
