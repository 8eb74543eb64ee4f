//! Rasterised planar sets on uniform grids.
//!
//! A [`GridRegion`] is a boolean mask over an axis-aligned bounding box at a
//! fixed resolution (cells per unit length). Everything the pipeline needs
//! from planar topology lives here: exact Euclidean distance transforms,
//! metric dilation, 3x3 morphology, connected-component labelling with the
//! 4/8 foreground/background duality, fill, and oriented boundary contours.
//!
//! Foreground regions use 4-connectivity, complements use 8-connectivity;
//! complement labelling pads the grid with a virtual frame so that exactly
//! one complement component is unbounded.

use crate::error::{CoreError, Result};
use crate::geom::Rect;
use crate::{par, C};
use serde::{Deserialize, Serialize};

/// How a region came to exist; carried through the pipeline for audit output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Generator { name: String },
    Polygon,
    PngMask,
    Disc { center: C, radius: f64 },
    Derived(String),
}

/// A compact planar set as a cell mask at explicit resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct GridRegion {
    /// Cells per unit length.
    pub resolution: u32,
    /// Coordinate of the lower-left corner of cell (0, 0).
    pub origin: C,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<bool>,
    pub provenance: Provenance,
}

impl GridRegion {
    pub fn cell(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn bbox(&self) -> Rect {
        let h = self.cell();
        Rect::new(
            self.origin.re,
            self.origin.im,
            self.origin.re + h * self.nx as f64,
            self.origin.im + h * self.ny as f64,
        )
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.nx + x]
    }

    /// Center of cell (x, y).
    #[inline]
    pub fn cell_center(&self, x: usize, y: usize) -> C {
        let h = self.cell();
        C::new(
            self.origin.re + h * (x as f64 + 0.5),
            self.origin.im + h * (y as f64 + 0.5),
        )
    }

    /// Cell containing `z`, if inside the bbox.
    pub fn locate(&self, z: C) -> Option<(usize, usize)> {
        let h = self.cell();
        let fx = (z.re - self.origin.re) / h;
        let fy = (z.im - self.origin.im) / h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (x, y) = (fx as usize, fy as usize);
        if x >= self.nx || y >= self.ny {
            None
        } else {
            Some((x, y))
        }
    }

    /// Membership test for a point (cell lookup; false outside the bbox).
    pub fn contains_point(&self, z: C) -> bool {
        self.locate(z).map(|(x, y)| self.at(x, y)).unwrap_or(false)
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Build a region over `bbox` from a predicate on cell centers.
    pub fn from_fn(
        bbox: Rect,
        resolution: u32,
        provenance: Provenance,
        pred: impl Fn(C) -> bool + Sync + Send,
    ) -> Self {
        let h = 1.0 / resolution as f64;
        let nx = (bbox.width() / h).ceil().max(1.0) as usize;
        let ny = (bbox.height() / h).ceil().max(1.0) as usize;
        let origin = C::new(bbox.re_min, bbox.im_min);
        let mut mask = vec![false; nx * ny];
        par::fill_indexed(&mut mask, |i| {
            let (x, y) = (i % nx, i / nx);
            pred(C::new(
                origin.re + h * (x as f64 + 0.5),
                origin.im + h * (y as f64 + 0.5),
            ))
        });
        GridRegion {
            resolution,
            origin,
            nx,
            ny,
            mask,
            provenance,
        }
    }

    /// Closed disc rasterised at `resolution`, bbox padded by two cells.
    pub fn disc(center: C, radius: f64, resolution: u32) -> Self {
        let pad = 2.0 / resolution as f64;
        let bbox = Rect::new(
            center.re - radius - pad,
            center.im - radius - pad,
            center.re + radius + pad,
            center.im + radius + pad,
        );
        Self::from_fn(bbox, resolution, Provenance::Disc { center, radius }, |z| {
            (z - center).norm() <= radius
        })
    }

    /// All cell centers in the mask.
    pub fn cells(&self) -> Vec<C> {
        let mut out = Vec::with_capacity(self.cell_count());
        for y in 0..self.ny {
            for x in 0..self.nx {
                if self.at(x, y) {
                    out.push(self.cell_center(x, y));
                }
            }
        }
        out
    }

    /// Boundary cells: mask cells 8-adjacent to the complement (bbox frame counts
    /// as complement).
    pub fn boundary_mask(&self) -> Vec<bool> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = vec![false; nx * ny];
        par::fill_indexed(&mut out, |i| {
            if !self.mask[i] {
                return false;
            }
            let (x, y) = ((i % nx) as isize, (i / nx) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (px, py) = (x + dx, y + dy);
                    if px < 0 || py < 0 || px >= nx as isize || py >= ny as isize {
                        return true;
                    }
                    if !self.mask[py as usize * nx + px as usize] {
                        return true;
                    }
                }
            }
            false
        });
        out
    }

    /// Centers of boundary cells.
    pub fn boundary_cells(&self) -> Vec<C> {
        let b = self.boundary_mask();
        let mut out = Vec::new();
        for y in 0..self.ny {
            for x in 0..self.nx {
                if b[self.idx(x, y)] {
                    out.push(self.cell_center(x, y));
                }
            }
        }
        out
    }

    /// Interior cells: mask minus boundary.
    pub fn interior_mask(&self) -> Vec<bool> {
        let b = self.boundary_mask();
        self.mask
            .iter()
            .zip(b.iter())
            .map(|(&m, &bd)| m && !bd)
            .collect()
    }

    pub fn with_mask(&self, mask: Vec<bool>, provenance: Provenance) -> Self {
        GridRegion {
            resolution: self.resolution,
            origin: self.origin,
            nx: self.nx,
            ny: self.ny,
            mask,
            provenance,
        }
    }

    /// Exact squared Euclidean distance (in cell units) from each cell center
    /// to the nearest mask cell center. Infinite where the mask is empty.
    pub fn distance_sq_to_mask(&self) -> Vec<f64> {
        edt_sq(&self.mask, self.nx, self.ny, false)
    }

    /// Exact squared Euclidean distance (cell units) to the nearest complement
    /// cell; the virtual frame outside the bbox counts as complement.
    pub fn distance_sq_to_complement(&self) -> Vec<f64> {
        edt_sq(&self.mask, self.nx, self.ny, true)
    }

    /// Distance in length units from `z` to the mask (0 when inside a mask cell).
    /// Exact on cell centers, off-grid points resolved through the nearest cell.
    pub fn distance_to(&self, z: C, edt_sq_cache: &[f64]) -> f64 {
        let h = self.cell();
        match self.locate(z) {
            Some((x, y)) => edt_sq_cache[self.idx(x, y)].sqrt() * h,
            None => {
                // Outside bbox: distance to bbox plus worst in-grid distance bound.
                let bb = self.bbox();
                let cx = z.re.clamp(bb.re_min, bb.re_max);
                let cy = z.im.clamp(bb.im_min, bb.im_max);
                let inside = C::new(cx, cy);
                let (x, y) = self.locate_clamped(inside);
                (z - inside).norm() + edt_sq_cache[self.idx(x, y)].sqrt() * h
            }
        }
    }

    fn locate_clamped(&self, z: C) -> (usize, usize) {
        let h = self.cell();
        let x = (((z.re - self.origin.re) / h) as isize).clamp(0, self.nx as isize - 1) as usize;
        let y = (((z.im - self.origin.im) / h) as isize).clamp(0, self.ny as isize - 1) as usize;
        (x, y)
    }

    /// Metric dilation: all cells within distance `r` (length units) of the mask.
    /// The bbox is grown to fit. Exact Euclidean via distance transform.
    pub fn dilate_metric(&self, r: f64, label: &str) -> Self {
        let h = self.cell();
        let pad_cells = (r / h).ceil() as usize + 2;
        let grown = self.grow(pad_cells);
        let d2 = grown.distance_sq_to_mask();
        let r_cells = r / h;
        let r2 = r_cells * r_cells;
        let mask: Vec<bool> = d2.iter().map(|&d| d <= r2 + 1e-12).collect();
        grown.with_mask(mask, Provenance::Derived(label.to_string()))
    }

    /// Metric erosion: cells at distance > `r` from the complement.
    pub fn erode_metric(&self, r: f64, label: &str) -> Self {
        let h = self.cell();
        let d2 = self.distance_sq_to_complement();
        let r_cells = r / h;
        let r2 = r_cells * r_cells;
        let mask: Vec<bool> = self
            .mask
            .iter()
            .zip(d2.iter())
            .map(|(&m, &d)| m && d > r2)
            .collect();
        self.with_mask(mask, Provenance::Derived(label.to_string()))
    }

    /// Grow the bbox by `pad` cells on every side (mask content preserved).
    pub fn grow(&self, pad: usize) -> Self {
        let (nx, ny) = (self.nx + 2 * pad, self.ny + 2 * pad);
        let h = self.cell();
        let mut mask = vec![false; nx * ny];
        for y in 0..self.ny {
            for x in 0..self.nx {
                if self.at(x, y) {
                    mask[(y + pad) * nx + (x + pad)] = true;
                }
            }
        }
        GridRegion {
            resolution: self.resolution,
            origin: C::new(
                self.origin.re - pad as f64 * h,
                self.origin.im - pad as f64 * h,
            ),
            nx,
            ny,
            mask,
            provenance: self.provenance.clone(),
        }
    }

    /// One-step 3x3 (8-neighbour) dilation, in place on the same bbox.
    pub fn dilate8(&self) -> Vec<bool> {
        let (nx, ny) = (self.nx, self.ny);
        let mut out = vec![false; nx * ny];
        par::fill_indexed(&mut out, |i| {
            if self.mask[i] {
                return true;
            }
            let (x, y) = ((i % nx) as isize, (i / nx) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (px, py) = (x + dx, y + dy);
                    if px >= 0
                        && py >= 0
                        && px < nx as isize
                        && py < ny as isize
                        && self.mask[py as usize * nx + px as usize]
                    {
                        return true;
                    }
                }
            }
            false
        });
        out
    }

    /// Morphological closing (dilate then erode with the 3x3 element).
    ///
    /// This is the resolution-honest closure operator: complement slits of
    /// width <= 2 cells are below resolution and get filled.
    pub fn closing8(&self) -> Vec<bool> {
        let dil = self.with_mask(self.dilate8(), self.provenance.clone());
        let (nx, ny) = (self.nx, self.ny);
        let mut out = vec![false; nx * ny];
        par::fill_indexed(&mut out, |i| {
            if !dil.mask[i] {
                return false;
            }
            let (x, y) = ((i % nx) as isize, (i / nx) as isize);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (px, py) = (x + dx, y + dy);
                    if px < 0 || py < 0 || px >= nx as isize || py >= ny as isize {
                        return false;
                    }
                    if !dil.mask[py as usize * nx + px as usize] {
                        return false;
                    }
                }
            }
            true
        });
        // Closing never removes original cells (erosion of the dilation
        // contains the original set).
        out.iter_mut()
            .zip(self.mask.iter())
            .for_each(|(o, &m)| *o |= m);
        out
    }

    /// Label foreground components. 4-connectivity (open-region convention).
    pub fn components(&self) -> Labels {
        label_components(&self.mask, self.nx, self.ny, false, false)
    }

    /// Label complement components with 8-connectivity and a virtual frame;
    /// component 0 is always the unbounded one.
    pub fn complement_components(&self) -> Labels {
        let inv: Vec<bool> = self.mask.iter().map(|&b| !b).collect();
        label_components(&inv, self.nx, self.ny, true, true)
    }

    /// Fill: mask plus all bounded complement components.
    pub fn fill(&self) -> Vec<bool> {
        let labels = self.complement_components();
        self.mask
            .iter()
            .enumerate()
            .map(|(i, &m)| m || labels.label[i] > 0)
            .collect()
    }

    /// Oriented boundary loops (crack edges between mask and complement).
    ///
    /// Each loop is a closed polyline of cell-corner vertices; the mask lies on
    /// the left of the traversal, so outer boundaries run counterclockwise and
    /// hole boundaries clockwise.
    pub fn contours(&self) -> Vec<Vec<C>> {
        trace_contours(self)
    }

    /// Minimum distance between the boundary cells of two regions (possibly on
    /// different grids). Brute force over boundary cells.
    pub fn min_distance(&self, other: &GridRegion) -> f64 {
        let a = self.boundary_cells();
        let b = other.boundary_cells();
        if a.is_empty() || b.is_empty() {
            return f64::INFINITY;
        }
        min_pointset_distance(&a, &b)
    }

    /// True if any cell of `self` has its center inside `other`.
    pub fn intersects(&self, other: &GridRegion) -> bool {
        for y in 0..self.ny {
            for x in 0..self.nx {
                if self.at(x, y) && other.contains_point(self.cell_center(x, y)) {
                    return true;
                }
            }
        }
        false
    }

    /// Row-major run-length encoding, starting with a run of `false`.
    pub fn rle(&self) -> Vec<u32> {
        let mut runs = Vec::new();
        let mut current = false;
        let mut count: u32 = 0;
        for &b in &self.mask {
            if b == current {
                count += 1;
            } else {
                runs.push(count);
                current = b;
                count = 1;
            }
        }
        runs.push(count);
        runs
    }

    pub fn from_rle(
        resolution: u32,
        origin: C,
        nx: usize,
        ny: usize,
        runs: &[u32],
        provenance: Provenance,
    ) -> Result<Self> {
        let mut mask = Vec::with_capacity(nx * ny);
        let mut value = false;
        for &run in runs {
            for _ in 0..run {
                mask.push(value);
            }
            value = !value;
        }
        if mask.len() != nx * ny {
            return Err(CoreError::InvalidInput(format!(
                "rle length {} does not match {}x{}",
                mask.len(),
                nx,
                ny
            )));
        }
        Ok(GridRegion {
            resolution,
            origin,
            nx,
            ny,
            mask,
            provenance,
        })
    }
}

/// Minimum distance between two point sets (parallel over the first).
pub fn min_pointset_distance(a: &[C], b: &[C]) -> f64 {
    let mins = par::map(a, |p| {
        b.iter()
            .map(|q| (p - q).norm_sqr())
            .fold(f64::INFINITY, f64::min)
    });
    mins.into_iter().fold(f64::INFINITY, f64::min).sqrt()
}

/// Component labelling result. `label[i] == u32::MAX` marks non-set cells;
/// otherwise labels are 0-based. For complement labelling, label 0 is the
/// unbounded component.
pub struct Labels {
    pub label: Vec<u32>,
    pub count: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Labels {
    pub fn of_cell(&self, x: usize, y: usize) -> Option<u32> {
        let l = self.label[y * self.nx + x];
        if l == u32::MAX {
            None
        } else {
            Some(l)
        }
    }

    /// Cells of each component.
    pub fn component_cells(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.count];
        for y in 0..self.ny {
            for x in 0..self.nx {
                if let Some(l) = self.of_cell(x, y) {
                    out[l as usize].push((x, y));
                }
            }
        }
        out
    }
}

fn label_components(
    set: &[bool],
    nx: usize,
    ny: usize,
    eight: bool,
    frame_first: bool,
) -> Labels {
    let mut label = vec![u32::MAX; nx * ny];
    let mut count: u32 = 0;
    let mut stack: Vec<(usize, usize)> = Vec::new();

    let flood = |sx: usize,
                     sy: usize,
                     l: u32,
                     label: &mut Vec<u32>,
                     stack: &mut Vec<(usize, usize)>| {
        stack.push((sx, sy));
        label[sy * nx + sx] = l;
        while let Some((x, y)) = stack.pop() {
            let neigh: &[(isize, isize)] = if eight {
                &[
                    (-1, -1),
                    (0, -1),
                    (1, -1),
                    (-1, 0),
                    (1, 0),
                    (-1, 1),
                    (0, 1),
                    (1, 1),
                ]
            } else {
                &[(0, -1), (-1, 0), (1, 0), (0, 1)]
            };
            for &(dx, dy) in neigh {
                let (px, py) = (x as isize + dx, y as isize + dy);
                if px < 0 || py < 0 || px >= nx as isize || py >= ny as isize {
                    continue;
                }
                let i = py as usize * nx + px as usize;
                if set[i] && label[i] == u32::MAX {
                    label[i] = l;
                    stack.push((px as usize, py as usize));
                }
            }
        }
    };

    if frame_first {
        // Seed the unbounded component (label 0) from every frame cell in the set.
        let mut seeded = false;
        for x in 0..nx {
            for &y in &[0usize, ny - 1] {
                if set[y * nx + x] && label[y * nx + x] == u32::MAX {
                    flood(x, y, 0, &mut label, &mut stack);
                    seeded = true;
                }
            }
        }
        for y in 0..ny {
            for &x in &[0usize, nx - 1] {
                if set[y * nx + x] && label[y * nx + x] == u32::MAX {
                    // Frame cells may form several 8-connected pieces only if the
                    // mask blocks the frame; they are still the same unbounded
                    // component through the virtual outside, so keep label 0.
                    flood(x, y, 0, &mut label, &mut stack);
                    seeded = true;
                }
            }
        }
        if seeded {
            count = 1;
        }
    }

    for y in 0..ny {
        for x in 0..nx {
            if set[y * nx + x] && label[y * nx + x] == u32::MAX {
                flood(x, y, count, &mut label, &mut stack);
                count += 1;
            }
        }
    }

    Labels {
        label,
        count: count as usize,
        nx,
        ny,
    }
}

/// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher).
///
/// Distances are in cell units between cell centers. When `to_complement` is
/// true the sources are the complement cells plus the virtual frame one cell
/// outside the bbox; otherwise the sources are the mask cells.
fn edt_sq(mask: &[bool], nx: usize, ny: usize, to_complement: bool) -> Vec<f64> {
    const INF: f64 = 1e20;
    let mut field = vec![0.0f64; nx * ny];
    for i in 0..nx * ny {
        let src = if to_complement { !mask[i] } else { mask[i] };
        field[i] = if src { 0.0 } else { INF };
    }

    // Column pass.
    let mut tmp = vec![0.0f64; nx * ny];
    {
        let cols: Vec<Vec<f64>> = par::map_range(nx, |x| {
            let mut f = Vec::with_capacity(ny + 2);
            if to_complement {
                f.push(0.0); // virtual frame row below
            }
            for y in 0..ny {
                f.push(field[y * nx + x]);
            }
            if to_complement {
                f.push(0.0); // virtual frame row above
            }
            let d = dt_1d(&f);
            if to_complement {
                d[1..=ny].to_vec()
            } else {
                d
            }
        });
        for (x, col) in cols.iter().enumerate() {
            for y in 0..ny {
                tmp[y * nx + x] = col[y];
            }
        }
    }

    // Row pass.
    let rows: Vec<Vec<f64>> = par::map_range(ny, |y| {
        let mut f = Vec::with_capacity(nx + 2);
        if to_complement {
            f.push(0.0);
        }
        f.extend_from_slice(&tmp[y * nx..(y + 1) * nx]);
        if to_complement {
            f.push(0.0);
        }
        let d = dt_1d(&f);
        if to_complement {
            d[1..=nx].to_vec()
        } else {
            d
        }
    });
    let mut out = vec![0.0f64; nx * ny];
    for (y, row) in rows.iter().enumerate() {
        out[y * nx..(y + 1) * nx].copy_from_slice(row);
    }
    out
}

/// 1D squared-distance transform of a sampled function (lower envelope of
/// parabolas).
fn dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0f64; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
    d
}

/// Crack-edge contour tracing with interior-on-the-left orientation.
fn trace_contours(region: &GridRegion) -> Vec<Vec<C>> {
    use std::collections::HashMap;
    let (nx, ny) = (region.nx, region.ny);
    let at = |x: isize, y: isize| -> bool {
        if x < 0 || y < 0 || x >= nx as isize || y >= ny as isize {
            false
        } else {
            region.mask[y as usize * nx + x as usize]
        }
    };

    // Directed edges between corner vertices (x, y) with 0 <= x <= nx, 0 <= y <= ny.
    // Key: start vertex -> list of end vertices.
    let mut edges: HashMap<(i32, i32), Vec<(i32, i32)>> = HashMap::new();
    let mut n_edges = 0usize;
    for y in 0..ny as isize {
        for x in 0..nx as isize {
            if !at(x, y) {
                continue;
            }
            let (xi, yi) = (x as i32, y as i32);
            if !at(x, y - 1) {
                edges.entry((xi, yi)).or_default().push((xi + 1, yi));
                n_edges += 1;
            }
            if !at(x, y + 1) {
                edges.entry((xi + 1, yi + 1)).or_default().push((xi, yi + 1));
                n_edges += 1;
            }
            if !at(x - 1, y) {
                edges.entry((xi, yi + 1)).or_default().push((xi, yi));
                n_edges += 1;
            }
            if !at(x + 1, y) {
                edges.entry((xi + 1, yi)).or_default().push((xi + 1, yi + 1));
                n_edges += 1;
            }
        }
    }

    let h = region.cell();
    let to_c = |v: (i32, i32)| -> C {
        C::new(
            region.origin.re + h * v.0 as f64,
            region.origin.im + h * v.1 as f64,
        )
    };

    let mut loops = Vec::new();
    let mut used = 0usize;
    let starts: Vec<(i32, i32)> = {
        let mut s: Vec<_> = edges.keys().cloned().collect();
        s.sort();
        s
    };
    for start in starts {
        loop {
            let first = match edges.get_mut(&start).and_then(|v| v.pop()) {
                Some(e) => e,
                None => break,
            };
            let mut path = vec![start, first];
            let mut prev = start;
            let mut cur = first;
            while cur != start {
                let outs = edges
                    .get_mut(&cur)
                    .expect("open contour: crack edges must close");
                let next = if outs.len() == 1 {
                    outs.pop().unwrap()
                } else {
                    // Saddle vertex: prefer the sharpest left turn to keep
                    // loops simple and deterministic.
                    let dir = (cur.0 - prev.0, cur.1 - prev.1);
                    let mut best = 0usize;
                    let mut best_rank = i32::MIN;
                    for (i, cand) in outs.iter().enumerate() {
                        let nd = (cand.0 - cur.0, cand.1 - cur.1);
                        // cross > 0 is a left turn.
                        let cross = dir.0 * nd.1 - dir.1 * nd.0;
                        let rank = cross;
                        if rank > best_rank {
                            best_rank = rank;
                            best = i;
                        }
                    }
                    outs.swap_remove(best)
                };
                path.push(next);
                prev = cur;
                cur = next;
            }
            used += path.len() - 1;
            // Drop the duplicated closing vertex; consumers treat loops as closed.
            path.pop();
            loops.push(path.into_iter().map(to_c).collect());
        }
    }
    debug_assert_eq!(used, n_edges, "all crack edges consumed");
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;

    fn square_region(res: u32) -> GridRegion {
        GridRegion::from_fn(
            Rect::new(-1.0, -1.0, 1.0, 1.0),
            res,
            Provenance::Generator {
                name: "square".into(),
            },
            |z| z.re.abs() <= 0.5 && z.im.abs() <= 0.5,
        )
    }

    #[test]
    fn edt_matches_bruteforce() {
        // Spec invariant: distance transform agrees with the all-pairs oracle
        // within one cell diagonal on small sets.
        let r = GridRegion::from_fn(
            Rect::new(-1.0, -1.0, 1.0, 1.0),
            32,
            Provenance::Generator { name: "two".into() },
            |z| (z - C::new(-0.5, 0.0)).norm() < 0.15 || (z - C::new(0.5, 0.3)).norm() < 0.1,
        );
        let d2 = r.distance_sq_to_mask();
        let sources = r.cells();
        let h = r.cell();
        for y in 0..r.ny {
            for x in 0..r.nx {
                let z = r.cell_center(x, y);
                let brute = sources
                    .iter()
                    .map(|s| (z - s).norm())
                    .fold(f64::INFINITY, f64::min);
                let fast = d2[r.idx(x, y)].sqrt() * h;
                assert!(
                    (brute - fast).abs() < 1e-9,
                    "edt mismatch at ({x},{y}): {brute} vs {fast}"
                );
            }
        }
    }

    #[test]
    fn boundary_interior_partition() {
        let r = square_region(64);
        let b = r.boundary_mask();
        let i = r.interior_mask();
        for idx in 0..r.mask.len() {
            assert_eq!(r.mask[idx], b[idx] || i[idx]);
            assert!(!(b[idx] && i[idx]));
        }
    }

    #[test]
    fn complement_labelling_annulus() {
        let r = GridRegion::from_fn(
            Rect::new(-1.0, -1.0, 1.0, 1.0),
            128,
            Provenance::Generator {
                name: "annulus".into(),
            },
            |z| {
                let d = z.norm();
                (0.3..=0.6).contains(&d)
            },
        );
        let labels = r.complement_components();
        // Unbounded outside plus the hole.
        assert_eq!(labels.count, 2);
        let (hx, hy) = r.locate(C::new(0.0, 0.0)).unwrap();
        assert_eq!(labels.of_cell(hx, hy), Some(1));
        let fill = r.fill();
        let hole_filled = fill[r.idx(hx, hy)];
        assert!(hole_filled);
    }

    #[test]
    fn dilation_roundness() {
        let r = GridRegion::from_fn(
            Rect::new(-0.2, -0.2, 0.2, 0.2),
            128,
            Provenance::Generator {
                name: "point".into(),
            },
            |z| z.norm() < 0.01,
        );
        let d = r.dilate_metric(0.25, "dilated");
        // Every cell within 0.25 - cell of origin must be in, outside 0.25 + 2 cells out.
        let h = d.cell();
        for y in 0..d.ny {
            for x in 0..d.nx {
                let z = d.cell_center(x, y);
                let dist = z.norm();
                if dist < 0.25 - 2.0 * h {
                    assert!(d.at(x, y), "missing cell at |z|={dist}");
                }
                if dist > 0.25 + 3.0 * h {
                    assert!(!d.at(x, y), "stray cell at |z|={dist}");
                }
            }
        }
    }

    #[test]
    fn contours_orientation_and_closure() {
        let r = GridRegion::from_fn(
            Rect::new(-1.0, -1.0, 1.0, 1.0),
            64,
            Provenance::Generator {
                name: "annulus".into(),
            },
            |z| {
                let d = z.norm();
                (0.3..=0.7).contains(&d)
            },
        );
        let loops = r.contours();
        assert_eq!(loops.len(), 2, "outer boundary plus hole boundary");
        // Signed area: positive for CCW outer loop, negative for CW hole loop.
        let signed_area = |lp: &Vec<C>| -> f64 {
            let mut a = 0.0;
            for i in 0..lp.len() {
                let p = lp[i];
                let q = lp[(i + 1) % lp.len()];
                a += p.re * q.im - q.re * p.im;
            }
            a / 2.0
        };
        let mut areas: Vec<f64> = loops.iter().map(signed_area).collect();
        areas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(areas[0] < 0.0, "hole loop clockwise");
        assert!(areas[1] > 0.0, "outer loop counterclockwise");
    }

    #[test]
    fn rle_roundtrip() {
        let r = square_region(32);
        let runs = r.rle();
        let back = GridRegion::from_rle(
            r.resolution,
            r.origin,
            r.nx,
            r.ny,
            &runs,
            r.provenance.clone(),
        )
        .unwrap();
        assert_eq!(r.mask, back.mask);
    }
}
