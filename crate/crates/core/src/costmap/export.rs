//! Debug exports.
//!
//! * Grids: binary PGM (`P5`), one byte per cell holding the raw cost,
//!   first image row = highest-`y` grid row (north up).
//! * Observations as PNG: channels 0–2 mapped to RGB, row 0 at the top.
//! * Observations as raw binary: three little-endian `u32` (channels,
//!   height, width) followed by `channels·height·width` little-endian `f32`
//!   in channel-major, row-major order.

use std::io::{self, Read, Write};
use std::path::Path;

use super::frames::ObsImage;
use crate::grid::OccupancyGrid;

pub fn write_grid_pgm(grid: &OccupancyGrid, path: impl AsRef<Path>) -> io::Result<()> {
    let mut out = Vec::with_capacity(grid.width() * grid.height() + 32);
    write!(out, "P5\n{} {}\n255\n", grid.width(), grid.height())?;
    for iy in (0..grid.height()).rev() {
        let row = &grid.costs()[iy * grid.width()..(iy + 1) * grid.width()];
        out.extend_from_slice(row);
    }
    std::fs::write(path, out)
}

pub fn write_observation_png(obs: &ObsImage, path: impl AsRef<Path>) -> io::Result<()> {
    let mut img = image::RgbImage::new(obs.width as u32, obs.height as u32);
    for (x, y, px) in img.enumerate_pixels_mut() {
        let mut rgb = [0u8; 3];
        for (c, v) in rgb.iter_mut().enumerate() {
            let src = c.min(obs.channels - 1);
            *v = (obs.get(src, y as usize, x as usize).clamp(0.0, 1.0) * 255.0).round() as u8;
        }
        *px = image::Rgb(rgb);
    }
    img.save(path).map_err(io::Error::other)
}

pub fn write_raw_f32(obs: &ObsImage, path: impl AsRef<Path>) -> io::Result<()> {
    let mut out = Vec::with_capacity(12 + obs.data.len() * 4);
    for dim in [obs.channels, obs.height, obs.width] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in &obs.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, out)
}

pub fn read_raw_f32(path: impl AsRef<Path>) -> io::Result<ObsImage> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || io::Error::new(io::ErrorKind::InvalidData, "truncated observation file");
    if bytes.len() < 12 {
        return Err(bad());
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()) as usize;
    let (c, h, w) = (dim(0), dim(1), dim(2));
    if bytes.len() != 12 + 4 * c * h * w {
        return Err(bad());
    }
    let data = bytes[12..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(ObsImage {
        channels: c,
        height: h,
        width: w,
        data,
    })
}
