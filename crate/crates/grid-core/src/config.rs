//! Key–value run configuration.
//!
//! One `key = value` pair per line, `#` starts a comment, lists are comma
//! separated. Intervals accept `inf` and `-inf`. Documented keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `name` | label copied into outputs | `custom` |
//! | `dim` | 1 or 2 | 1 |
//! | `cells` | cell counts per axis | required |
//! | `lo`, `hi` | corners of Υ | required |
//! | `medium` | `constant`, `layered` or `file` | `constant` |
//! | `speed` | constant speed | 1 |
//! | `interfaces`, `speeds` | layered model along the first axis | empty, `[speed]` |
//! | `medium_file` | field file holding `c` | none |
//! | `theta` | Θ box: `xlo, xhi[, ylo, yhi]` | required |
//! | `theta_dprime`, `theta_prime`, `omega` | inner boxes | previous level |
//! | `T` | control time | required |
//! | `cfl` | time step factor in (0, 1) | 0.5 |
//! | `k_max` | iteration count | 30 |
//! | `cg_tol`, `cg_max_iter` | harmonic-extension solver | 1e-10, 50000 |
//! | `out_dir` | output directory | `out` |
//! | `seed` | RNG seed | 1 |
//! | `pulse_center`, `pulse_width`, `pulse_angle` | initial pulse (width in travel time, angle in degrees from +x) | Θ centre, 0.2, 0 |

use crate::{DomainNest, Grid, GridError, Layered, Medium, Real, Region};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub cells: [usize; 2],
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl GridSpec {
    pub fn spacing(&self) -> f64 {
        (self.hi[0] - self.lo[0]) / self.cells[0] as f64
    }

    pub fn build<T: Real>(&self) -> Result<Grid<T>, GridError> {
        let extent = [self.cells[0] + 1, if self.dim == 2 { self.cells[1] + 1 } else { 1 }];
        Grid::new(self.dim, extent, T::of(self.spacing()), [T::of(self.lo[0]), T::of(self.lo[1])])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MediumSource {
    Constant(f64),
    Layered { interfaces: Vec<f64>, speeds: Vec<f64> },
    File(PathBuf),
}

/// Axis-aligned box as written in a config file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl BoxSpec {
    pub fn region<T: Real>(&self) -> Region<T> {
        Region::new([T::of(self.lo[0]), T::of(self.lo[1])], [T::of(self.hi[0]), T::of(self.hi[1])])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NestSpec {
    pub omega: BoxSpec,
    pub theta_prime: BoxSpec,
    pub theta_dprime: BoxSpec,
    pub theta: BoxSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseSpec {
    pub center: [f64; 2],
    pub width: f64,
    pub angle_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub grid: GridSpec,
    pub medium: MediumSource,
    pub nest: NestSpec,
    pub t_ctrl: f64,
    pub cfl: f64,
    pub k_max: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub pulse: PulseSpec,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, GridError> {
    let text = std::fs::read_to_string(path.as_ref())?;
    let cfg = parse_config(&text)?;
    cfg.validate_with_base(path.as_ref().parent())?;
    Ok(cfg)
}

/// Parses config text and fills defaults, without the medium-dependent checks.
pub fn parse_config(text: &str) -> Result<RunConfig, GridError> {
    let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| GridError::Parse { line: n + 1, msg: format!("expected `key = value`, got `{line}`") })?;
        let key = k.trim().to_string();
        if kv.insert(key.clone(), (n + 1, v.trim().to_string())).is_some() {
            return Err(GridError::Parse { line: n + 1, msg: format!("duplicate key `{key}`") });
        }
    }
    let mut p = Parser { kv };
    let name = p.string("name")?.unwrap_or_else(|| "custom".into());
    let dim = p.usize("dim")?.unwrap_or(1);
    if dim != 1 && dim != 2 {
        return Err(GridError::validation("dim", format!("dimension {dim} not in {{1, 2}}")));
    }
    let cells_v = p.usizes("cells")?.ok_or_else(|| missing("cells"))?;
    let lo_v = p.floats("lo")?.ok_or_else(|| missing("lo"))?;
    let hi_v = p.floats("hi")?.ok_or_else(|| missing("hi"))?;
    let grid = GridSpec {
        dim,
        cells: [cells_v[0], *cells_v.get(1).unwrap_or(&0)],
        lo: [lo_v[0], *lo_v.get(1).unwrap_or(&0.0)],
        hi: [hi_v[0], *hi_v.get(1).unwrap_or(&0.0)],
    };
    if cells_v.len() != dim || lo_v.len() != dim || hi_v.len() != dim {
        return Err(GridError::validation("grid", "cells, lo and hi need one entry per axis"));
    }

    let speed = p.float("speed")?.unwrap_or(1.0);
    let medium = match p.string("medium")?.as_deref().unwrap_or("constant") {
        "constant" => MediumSource::Constant(speed),
        "layered" => MediumSource::Layered {
            interfaces: p.floats("interfaces")?.unwrap_or_default(),
            speeds: p.floats("speeds")?.unwrap_or_else(|| vec![speed]),
        },
        "file" => MediumSource::File(PathBuf::from(p.string("medium_file")?.ok_or_else(|| missing("medium_file"))?)),
        other => return Err(GridError::validation("medium", format!("unknown medium kind `{other}`"))),
    };

    let theta = p.boxspec("theta", dim)?.ok_or_else(|| missing("theta"))?;
    let theta_dprime = p.boxspec("theta_dprime", dim)?.unwrap_or(theta);
    let theta_prime = p.boxspec("theta_prime", dim)?.unwrap_or(theta_dprime);
    let omega = p.boxspec("omega", dim)?.unwrap_or(theta_prime);
    let t_ctrl = p.float("T")?.ok_or_else(|| missing("T"))?;
    let centre = |a: usize| {
        let (l, h) = (theta.lo[a].max(grid.lo[a]), theta.hi[a].min(grid.hi[a]));
        0.5 * (l + h)
    };
    let pc = p.floats("pulse_center")?.unwrap_or_else(|| vec![centre(0), if dim == 2 { centre(1) } else { 0.0 }]);
    let cfg = RunConfig {
        name,
        grid,
        medium,
        nest: NestSpec { omega, theta_prime, theta_dprime, theta },
        t_ctrl,
        cfl: p.float("cfl")?.unwrap_or(0.5),
        k_max: p.usize("k_max")?.unwrap_or(30),
        cg_tol: p.float("cg_tol")?.unwrap_or(1e-10),
        cg_max_iter: p.usize("cg_max_iter")?.unwrap_or(50_000),
        out_dir: PathBuf::from(p.string("out_dir")?.unwrap_or_else(|| "out".into())),
        seed: p.usize("seed")?.unwrap_or(1) as u64,
        pulse: PulseSpec {
            center: [pc[0], *pc.get(1).unwrap_or(&0.0)],
            width: p.float("pulse_width")?.unwrap_or(0.2),
            angle_deg: p.float("pulse_angle")?.unwrap_or(0.0),
        },
    };
    if let Some((key, (line, _))) = p.kv.iter().next() {
        return Err(GridError::Parse { line: *line, msg: format!("unknown key `{key}`") });
    }
    cfg.validate_structure()?;
    Ok(cfg)
}

fn missing(key: &str) -> GridError {
    GridError::Parse { line: 0, msg: format!("missing required key `{key}`") }
}

struct Parser {
    kv: BTreeMap<String, (usize, String)>,
}

impl Parser {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.kv.remove(key)
    }
    fn string(&mut self, key: &str) -> Result<Option<String>, GridError> {
        Ok(self.take(key).map(|(_, v)| v))
    }
    fn float(&mut self, key: &str) -> Result<Option<f64>, GridError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => parse_f64(&v, line).map(Some),
        }
    }
    fn usize(&mut self, key: &str) -> Result<Option<usize>, GridError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| GridError::Parse { line, msg: format!("`{key}` expects a non-negative integer") }),
        }
    }
    fn floats(&mut self, key: &str) -> Result<Option<Vec<f64>>, GridError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, v)) if v.is_empty() => Ok(Some(vec![])),
            Some((line, v)) => v.split(',').map(|s| parse_f64(s.trim(), line)).collect::<Result<_, _>>().map(Some),
        }
    }
    fn usizes(&mut self, key: &str) -> Result<Option<Vec<usize>>, GridError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| GridError::Parse { line, msg: format!("bad integer in `{key}`") }))
                .collect::<Result<_, _>>()
                .map(Some),
        }
    }
    fn boxspec(&mut self, key: &str, dim: usize) -> Result<Option<BoxSpec>, GridError> {
        let line = self.kv.get(key).map(|(l, _)| *l).unwrap_or(0);
        let Some(v) = self.floats(key)? else { return Ok(None) };
        if v.len() != 2 * dim {
            return Err(GridError::Parse { line, msg: format!("`{key}` needs {} numbers", 2 * dim) });
        }
        let (ylo, yhi) = if dim == 2 { (v[2], v[3]) } else { (f64::NEG_INFINITY, f64::INFINITY) };
        Ok(Some(BoxSpec { lo: [v[0], ylo], hi: [v[1], yhi] }))
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64, GridError> {
    s.parse::<f64>().map_err(|_| GridError::Parse { line, msg: format!("`{s}` is not a number") })
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    fn validate_structure(&self) -> Result<(), GridError> {
        let g = &self.grid;
        for a in 0..g.dim {
            if g.cells[a] < 2 {
                return Err(GridError::validation("grid", format!("axis {a} needs at least 2 cells")));
            }
            if !(g.hi[a] > g.lo[a]) {
                return Err(GridError::validation("grid", format!("axis {a}: hi must exceed lo")));
            }
        }
        if g.dim == 2 {
            let hy = (g.hi[1] - g.lo[1]) / g.cells[1] as f64;
            if ((hy - g.spacing()) / g.spacing()).abs() > 1e-9 {
                return Err(GridError::validation("grid", "both axes must share one spacing"));
            }
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(GridError::validation("CFL factor in (0, 1)", format!("cfl = {}", self.cfl)));
        }
        if !(self.t_ctrl > 0.0) {
            return Err(GridError::validation("T > 0", format!("T = {}", self.t_ctrl)));
        }
        if !(self.cg_tol > 0.0) {
            return Err(GridError::validation("solver tolerance", "cg_tol must be positive"));
        }
        Ok(())
    }

    /// Structural checks plus the nesting chain and the travel-time margin.
    pub fn validate(&self) -> Result<(), GridError> {
        self.validate_with_base(None)
    }

    fn validate_with_base(&self, base: Option<&Path>) -> Result<(), GridError> {
        self.validate_structure()?;
        let medium = self.build_medium_in::<f64>(base)?;
        self.build_nest::<f64>()?;
        let margin = travel_margin(&self.grid, &self.nest.theta, &medium);
        if !(margin > 2.0 * self.t_ctrl) {
            return Err(GridError::validation(
                "d(∂Υ, Θ̄) > 2T",
                format!("travel-time margin {margin:.6} does not exceed 2T = {}", 2.0 * self.t_ctrl),
            ));
        }
        Ok(())
    }

    pub fn build_grid<T: Real>(&self) -> Result<Grid<T>, GridError> {
        self.grid.build()
    }

    pub fn build_medium<T: Real>(&self) -> Result<Medium<T>, GridError> {
        self.build_medium_in(None)
    }

    fn build_medium_in<T: Real>(&self, base: Option<&Path>) -> Result<Medium<T>, GridError> {
        let grid = self.build_grid::<T>()?;
        match &self.medium {
            MediumSource::Constant(c) => {
                Ok(Medium::from_layered(grid, Layered::new(vec![], vec![T::of(*c)])?))
            }
            MediumSource::Layered { interfaces, speeds } => {
                let l = Layered::new(
                    interfaces.iter().map(|&z| T::of(z)).collect(),
                    speeds.iter().map(|&c| T::of(c)).collect(),
                )?;
                Ok(Medium::from_layered(grid, l))
            }
            MediumSource::File(p) => {
                let path = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                let field = crate::load_field::<T>(&path)?;
                field.grid().check_same(&grid)?;
                Medium::from_field(field)
            }
        }
    }

    pub fn build_nest<T: Real>(&self) -> Result<DomainNest<T>, GridError> {
        let n = &self.nest;
        DomainNest::new(
            self.build_grid()?,
            n.omega.region(),
            n.theta_prime.region(),
            n.theta_dprime.region(),
            n.theta.region(),
            T::of(self.t_ctrl),
        )
    }

    /// Serializes every field; `parse_config(&cfg.to_text())` reproduces `cfg`.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let d = g.dim;
        let axes = |v: [f64; 2]| fmt_list(&v[..d]);
        let bx = |b: &BoxSpec| {
            if d == 2 {
                fmt_list(&[b.lo[0], b.hi[0], b.lo[1], b.hi[1]])
            } else {
                fmt_list(&[b.lo[0], b.hi[0]])
            }
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        put("name", self.name.clone());
        put("dim", d.to_string());
        put("cells", g.cells[..d].iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "));
        put("lo", axes(g.lo));
        put("hi", axes(g.hi));
        match &self.medium {
            MediumSource::Constant(c) => {
                put("medium", "constant".into());
                put("speed", format!("{c}"));
            }
            MediumSource::Layered { interfaces, speeds } => {
                put("medium", "layered".into());
                put("interfaces", fmt_list(interfaces));
                put("speeds", fmt_list(speeds));
            }
            MediumSource::File(p) => {
                put("medium", "file".into());
                put("medium_file", p.display().to_string());
            }
        }
        put("theta", bx(&self.nest.theta));
        put("theta_dprime", bx(&self.nest.theta_dprime));
        put("theta_prime", bx(&self.nest.theta_prime));
        put("omega", bx(&self.nest.omega));
        put("T", format!("{}", self.t_ctrl));
        put("cfl", format!("{}", self.cfl));
        put("k_max", self.k_max.to_string());
        put("cg_tol", format!("{}", self.cg_tol));
        put("cg_max_iter", self.cg_max_iter.to_string());
        put("out_dir", self.out_dir.display().to_string());
        put("seed", self.seed.to_string());
        put("pulse_center", axes(self.pulse.center));
        put("pulse_width", format!("{}", self.pulse.width));
        put("pulse_angle", format!("{}", self.pulse.angle_deg));
        s
    }
}

/// Travel time from `Θ̄` to `∂Υ`: exact for 1D media, a lower bound
/// (Euclidean gap over the fastest speed) in 2D.
fn travel_margin(g: &GridSpec, theta: &BoxSpec, medium: &Medium<f64>) -> f64 {
    if g.dim == 1 {
        let lo = theta.lo[0].max(g.lo[0]);
        let hi = theta.hi[0].min(g.hi[0]);
        match medium.layered() {
            Some(l) => l.travel_time(g.lo[0], lo).min(l.travel_time(hi, g.hi[0])),
            None => trapezoid_slowness(medium, g.lo[0], lo).min(trapezoid_slowness(medium, hi, g.hi[0])),
        }
    } else {
        let cmax = medium.max_speed();
        (0..2)
            .map(|a| (theta.lo[a] - g.lo[a]).min(g.hi[a] - theta.hi[a]))
            .fold(f64::INFINITY, f64::min)
            / cmax
    }
}

fn trapezoid_slowness(medium: &Medium<f64>, a: f64, b: f64) -> f64 {
    let grid = medium.grid();
    let c = medium.speed().values();
    let mut total = 0.0;
    for i in 0..grid.len() - 1 {
        let (x0, x1) = (grid.position(i)[0], grid.position(i + 1)[0]);
        let (l, r) = (x0.max(a), x1.min(b));
        if r > l {
            total += (r - l) * 0.5 * (1.0 / c[i] + 1.0 / c[i + 1]);
        }
    }
    total
}
