//! Region ingestion and artifact output.
//!
//! Three ingestion routes: JSON polygon lists, monochrome PNG masks with a
//! JSON sidecar, and the built-in generators. Audit artifacts are written
//! through the atomic-stage helpers so a partial run never leaves a torn file.

use crate::error::{CoreError, Result};
use crate::geom::Rect;
use crate::grid::{GridRegion, Provenance};
use crate::C;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// Built-in generators
// ---------------------------------------------------------------------------

pub fn disc_region(center: C, radius: f64, resolution: u32) -> GridRegion {
    GridRegion::disc(center, radius, resolution)
}

pub fn annulus_region(center: C, r_in: f64, r_out: f64, resolution: u32) -> GridRegion {
    let pad = 2.0 / resolution as f64;
    let bbox = Rect::new(
        center.re - r_out - pad,
        center.im - r_out - pad,
        center.re + r_out + pad,
        center.im + r_out + pad,
    );
    GridRegion::from_fn(
        bbox,
        resolution,
        Provenance::Generator {
            name: "annulus".into(),
        },
        |z| {
            let d = (z - center).norm();
            d >= r_in && d <= r_out
        },
    )
}

/// A single grid cell at `center`.
pub fn point_region(center: C, resolution: u32) -> GridRegion {
    let h = 1.0 / resolution as f64;
    let bbox = Rect::new(
        center.re - 3.0 * h,
        center.im - 3.0 * h,
        center.re + 3.0 * h,
        center.im + 3.0 * h,
    );
    GridRegion::from_fn(
        bbox,
        resolution,
        Provenance::Generator {
            name: "point".into(),
        },
        |z| ((z.re - center.re).abs() < 0.5 * h) && ((z.im - center.im).abs() < 0.5 * h),
    )
}

/// Perimeter of the unit square `[0,1]^2`, one cell thick.
pub fn square_perimeter_region(resolution: u32) -> GridRegion {
    let h = 1.0 / resolution as f64;
    let bbox = Rect::new(-2.0 * h, -2.0 * h, 1.0 + 2.0 * h, 1.0 + 2.0 * h);
    GridRegion::from_fn(
        bbox,
        resolution,
        Provenance::Generator {
            name: "square".into(),
        },
        |z| {
            let inside = z.re >= 0.0 && z.re <= 1.0 && z.im >= 0.0 && z.im <= 1.0;
            let edge = z.re.min(1.0 - z.re).min(z.im).min(1.0 - z.im);
            inside && edge <= h
        },
    )
}

fn in_cantor(mut t: f64, depth: u32) -> bool {
    for _ in 0..depth {
        t *= 3.0;
        let digit = t.floor() as i64;
        if digit == 1 {
            return false;
        }
        t -= digit as f64;
    }
    true
}

/// Product of two middle-thirds Cantor approximants of the given depth on `[0,1]^2`.
pub fn cantor_dust_region(depth: u32, resolution: u32) -> GridRegion {
    let h = 1.0 / resolution as f64;
    let bbox = Rect::new(-2.0 * h, -2.0 * h, 1.0 + 2.0 * h, 1.0 + 2.0 * h);
    GridRegion::from_fn(
        bbox,
        resolution,
        Provenance::Generator {
            name: "cantor".into(),
        },
        |z| {
            z.re >= 0.0
                && z.re <= 1.0
                && z.im >= 0.0
                && z.im <= 1.0
                && in_cantor(z.re.min(1.0 - 1e-12), depth)
                && in_cantor(z.im.min(1.0 - 1e-12), depth)
        },
    )
}

fn in_carpet(mut x: f64, mut y: f64, depth: u32) -> bool {
    for _ in 0..depth {
        x *= 3.0;
        y *= 3.0;
        let dx = x.floor() as i64;
        let dy = y.floor() as i64;
        if dx == 1 && dy == 1 {
            return false;
        }
        x -= dx as f64;
        y -= dy as f64;
    }
    true
}

/// Sierpinski-carpet approximant of the given depth on `[0,1]^2` (filled).
pub fn carpet_region(depth: u32, resolution: u32) -> GridRegion {
    let h = 1.0 / resolution as f64;
    let bbox = Rect::new(-2.0 * h, -2.0 * h, 1.0 + 2.0 * h, 1.0 + 2.0 * h);
    GridRegion::from_fn(
        bbox,
        resolution,
        Provenance::Generator {
            name: "carpet".into(),
        },
        |z| {
            z.re >= 0.0
                && z.re <= 1.0
                && z.im >= 0.0
                && z.im <= 1.0
                && in_carpet(
                    z.re.min(1.0 - 1e-12).max(0.0),
                    z.im.min(1.0 - 1e-12).max(0.0),
                    depth,
                )
        },
    )
}

/// Boundary of the depth-`n` carpet approximant: the carpet cells adjacent to
/// a removed square or to the outside. Empty interior by construction.
pub fn carpet_boundary_region(depth: u32, resolution: u32) -> GridRegion {
    let carpet = carpet_region(depth, resolution);
    let boundary = carpet.boundary_mask();
    carpet.with_mask(
        boundary,
        Provenance::Generator {
            name: "carpet-boundary".into(),
        },
    )
}

// ---------------------------------------------------------------------------
// Polygon ingestion
// ---------------------------------------------------------------------------

/// Polygon file: a JSON array of polygons, each an array of `[re, im]` vertex
/// pairs, closed implicitly. The region is the even-odd fill of the union.
pub fn region_from_polygon_json(text: &str, resolution: u32) -> Result<GridRegion> {
    let polys: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)
        .map_err(|e| CoreError::InvalidInput(format!("polygon json: {e}")))?;
    if polys.is_empty() || polys.iter().all(|p| p.len() < 3) {
        return Err(CoreError::InvalidInput(
            "polygon json: need at least one polygon with 3 or more vertices".into(),
        ));
    }
    let points: Vec<C> = polys
        .iter()
        .flatten()
        .map(|p| C::new(p[0], p[1]))
        .collect();
    let bbox = Rect::hull(&points, 4.0 / resolution as f64);
    let region = GridRegion::from_fn(bbox, resolution, Provenance::Polygon, |z| {
        let mut crossings = 0u32;
        for poly in &polys {
            let n = poly.len();
            if n < 3 {
                continue;
            }
            for i in 0..n {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                // Even-odd ray casting along +re.
                let (ay, by) = (a[1], b[1]);
                if (ay > z.im) != (by > z.im) {
                    let t = (z.im - ay) / (by - ay);
                    let xi = a[0] + t * (b[0] - a[0]);
                    if xi > z.re {
                        crossings += 1;
                    }
                }
            }
        }
        crossings % 2 == 1
    });
    if region.is_empty() {
        return Err(CoreError::EmptyRegion);
    }
    Ok(region)
}

// ---------------------------------------------------------------------------
// PNG + sidecar ingestion
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub bbox: Rect,
    pub resolution: u32,
}

pub fn region_from_png(png_path: &Path, sidecar_path: &Path) -> Result<GridRegion> {
    let sidecar_text = fs::read_to_string(sidecar_path)?;
    let sidecar: MaskSidecar = serde_json::from_str(&sidecar_text)
        .map_err(|e| CoreError::InvalidInput(format!("mask sidecar: {e}")))?;
    if sidecar.resolution == 0 {
        return Err(CoreError::InvalidInput(
            "mask sidecar: field `resolution` must be positive".into(),
        ));
    }
    let img = image::open(png_path)
        .map_err(|e| CoreError::Image(format!("{e}")))?
        .into_luma8();
    let (nx, ny) = (img.width() as usize, img.height() as usize);
    let h = 1.0 / sidecar.resolution as f64;
    let expected_nx = (sidecar.bbox.width() / h).round() as usize;
    let expected_ny = (sidecar.bbox.height() / h).round() as usize;
    if nx != expected_nx || ny != expected_ny {
        return Err(CoreError::InvalidInput(format!(
            "mask sidecar: bbox/resolution imply {expected_nx}x{expected_ny} cells but png is {nx}x{ny}"
        )));
    }
    let mut mask = vec![false; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            // PNG rows run top-down; grid rows run bottom-up.
            let p = img.get_pixel(x as u32, (ny - 1 - y) as u32)[0];
            mask[y * nx + x] = p > 127;
        }
    }
    let region = GridRegion {
        resolution: sidecar.resolution,
        origin: C::new(sidecar.bbox.re_min, sidecar.bbox.im_min),
        nx,
        ny,
        mask,
        provenance: Provenance::PngMask,
    };
    if region.is_empty() {
        return Err(CoreError::EmptyRegion);
    }
    Ok(region)
}

pub fn region_to_png(region: &GridRegion, png_path: &Path, sidecar_path: &Path) -> Result<()> {
    let (nx, ny) = (region.nx, region.ny);
    let mut img = image::GrayImage::new(nx as u32, ny as u32);
    for y in 0..ny {
        for x in 0..nx {
            let v = if region.at(x, y) { 255u8 } else { 0u8 };
            img.put_pixel(x as u32, (ny - 1 - y) as u32, image::Luma([v]));
        }
    }
    img.save(png_path)
        .map_err(|e| CoreError::Image(format!("{e}")))?;
    let sidecar = MaskSidecar {
        bbox: region.bbox(),
        resolution: region.resolution,
    };
    write_atomic(sidecar_path, serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Region audit serialization (RLE)
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct RegionRecord {
    pub resolution: u32,
    pub origin: C,
    pub nx: usize,
    pub ny: usize,
    pub provenance: Provenance,
    pub rle: Vec<u32>,
}

impl RegionRecord {
    pub fn of(region: &GridRegion) -> Self {
        RegionRecord {
            resolution: region.resolution,
            origin: region.origin,
            nx: region.nx,
            ny: region.ny,
            provenance: region.provenance.clone(),
            rle: region.rle(),
        }
    }

    pub fn to_region(&self) -> Result<GridRegion> {
        GridRegion::from_rle(
            self.resolution,
            self.origin,
            self.nx,
            self.ny,
            &self.rle,
            self.provenance.clone(),
        )
    }
}

// ---------------------------------------------------------------------------
// Atomic writes
// ---------------------------------------------------------------------------

/// Write bytes to a staging file and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent)?;
    let mut tmp = PathBuf::from(parent);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "artifact".into());
    tmp.push(format!(".staging-{name}"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn carpet_boundary_nonempty_empty_interior() {
        let b = carpet_boundary_region(2, 128);
        assert!(!b.is_empty());
        // Every cell is a boundary cell of itself: interior of a thin curve is empty.
        let interior = b.interior_mask();
        let interior_count = interior.iter().filter(|&&x| x).count();
        let total = b.cell_count();
        assert!(
            interior_count * 50 < total,
            "carpet boundary should be thin: {interior_count}/{total}"
        );
    }

    #[test]
    fn polygon_square_fill() {
        let json = r#"[[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]]"#;
        let r = region_from_polygon_json(json, 64).unwrap();
        assert!(r.contains_point(C::new(0.5, 0.5)));
        assert!(!r.contains_point(C::new(1.5, 0.5)));
    }

    #[test]
    fn polygon_with_hole_even_odd() {
        let json = r#"[
            [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            [[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]]
        ]"#;
        let r = region_from_polygon_json(json, 64).unwrap();
        assert!(!r.contains_point(C::new(0.5, 0.5)), "hole is carved out");
        assert!(r.contains_point(C::new(0.1, 0.5)));
    }
}
