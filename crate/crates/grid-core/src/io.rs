use crate::{Grid, GridError, Real, ScalarField};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &str = "sclab-field v1";

/// Writes the one-line header followed by little-endian `f64` values.
pub fn write_field<T: Real, W: Write>(field: &ScalarField<T>, mut w: W) -> Result<(), GridError> {
    let g = field.grid();
    let [nx, ny] = g.extent();
    let o = g.origin();
    writeln!(
        w,
        "{MAGIC} dim={} extent={nx},{ny} spacing={:?} origin={:?},{:?}",
        g.dim(),
        g.spacing().to_f64_lossy(),
        o[0].to_f64_lossy(),
        o[1].to_f64_lossy()
    )?;
    for v in field.values() {
        w.write_f64::<LittleEndian>(v.to_f64_lossy())?;
    }
    Ok(())
}

pub fn read_field<T: Real, R: Read>(r: R) -> Result<ScalarField<T>, GridError> {
    let mut r = BufReader::new(r);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let grid = parse_header::<T>(header.trim_end())?;
    let mut values = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        let v = r
            .read_f64::<LittleEndian>()
            .map_err(|_| GridError::Header("payload shorter than the declared extent".into()))?;
        values.push(T::of(v));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(GridError::Header("payload longer than the declared extent".into()));
    }
    ScalarField::from_values(grid, values)
}

pub fn save_field<T: Real>(field: &ScalarField<T>, path: impl AsRef<Path>) -> Result<(), GridError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field<T: Real>(path: impl AsRef<Path>) -> Result<ScalarField<T>, GridError> {
    read_field(std::fs::File::open(path)?)
}

fn parse_header<T: Real>(line: &str) -> Result<Grid<T>, GridError> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| GridError::Header(format!("missing `{MAGIC}` prefix")))?;
    let mut dim = None;
    let mut extent = None;
    let mut spacing = None;
    let mut origin = None;
    let bad = |what: &str| GridError::Header(format!("malformed {what}"));
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad("token"))?;
        match k {
            "dim" => dim = Some(v.parse::<usize>().map_err(|_| bad("dim"))?),
            "extent" => {
                let p: Vec<usize> = v.split(',').map(|s| s.parse()).collect::<Result<_, _>>().map_err(|_| bad("extent"))?;
                if p.len() != 2 {
                    return Err(bad("extent"));
                }
                extent = Some([p[0], p[1]]);
            }
            "spacing" => spacing = Some(v.parse::<f64>().map_err(|_| bad("spacing"))?),
            "origin" => {
                let p: Vec<f64> = v.split(',').map(|s| s.parse()).collect::<Result<_, _>>().map_err(|_| bad("origin"))?;
                if p.len() != 2 {
                    return Err(bad("origin"));
                }
                origin = Some([p[0], p[1]]);
            }
            _ => return Err(GridError::Header(format!("unknown header key `{k}`"))),
        }
    }
    let (Some(dim), Some(extent), Some(spacing), Some(origin)) = (dim, extent, spacing, origin) else {
        return Err(GridError::Header("incomplete header".into()));
    };
    Grid::new(dim, extent, T::of(spacing), [T::of(origin[0]), T::of(origin[1])])
}
