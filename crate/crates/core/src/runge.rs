//! Sup-norm rational approximation on disjoint compact pieces with
//! prescribed pole sites.
//!
//! Given a piecewise target (each piece a compact region carrying a rational
//! restriction, a constant, or a translation) and one pole site per bounded
//! complementary component, the engine produces a rational map within a
//! certified sup-norm error. The fit is a weighted linear least squares over
//! boundary-heavy samples, with the basis
//!
//! ```text
//!   { ((z - c)/rho)^k : k <= m }  u  { (s_p/(z - p))^k : p site, k <= m_p }
//! ```
//!
//! and degrees doubled until the certificate clears the requested bound.
//! The QR factorisation is incremental, so a degree doubling only pays for
//! the newly appended columns.
//!
//! Pole terms already present in a rational piece map are carried over
//! verbatim and subtracted from the target before fitting, so the residual
//! being fit is analytic on a neighbourhood of every piece; the carried terms
//! are added back to the result. When every rational piece restricts the same
//! map, the whole map is carried, which turns the fit into a small increment
//! on top of the previous stage.

use crate::error::{CoreError, Result};
use crate::grid::{GridRegion, Provenance};
use crate::rational::{PoleTerm, PolyBlock, RationalMap, Value};
use crate::{par, C};
use serde::{Deserialize, Serialize};

/// Map attached to one piece of the target.
#[derive(Clone, Debug)]
pub enum PieceMap {
    Rational(RationalMap),
    Constant(C),
    Translation(C),
}

impl PieceMap {
    pub fn eval(&self, z: C) -> Value {
        match self {
            PieceMap::Rational(f) => f.eval(z),
            PieceMap::Constant(c) => Value::Finite(*c),
            PieceMap::Translation(c) => Value::Finite(z + c),
        }
    }

    fn rational(&self) -> Option<&RationalMap> {
        match self {
            PieceMap::Rational(f) => Some(f),
            _ => None,
        }
    }
}

/// One compact piece of the approximation set.
#[derive(Clone, Debug)]
pub struct Piece {
    pub name: String,
    pub region: GridRegion,
    pub map: PieceMap,
}

/// Disjoint compact pieces, each carrying its target map.
#[derive(Clone, Debug)]
pub struct PiecewiseTarget {
    pub pieces: Vec<Piece>,
    /// Measured minimum pairwise distance between piece boundaries.
    pub min_separation: f64,
}

impl PiecewiseTarget {
    /// Assemble a target, measuring the pairwise-disjointness certificate.
    /// Fails with `PieceOverlap` when two pieces come within two grid cells.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let mut min_separation = f64::INFINITY;
        for i in 0..pieces.len() {
            for j in (i + 1)..pieces.len() {
                let d = piece_distance(&pieces[i], &pieces[j]);
                let cell = pieces[i].region.cell().max(pieces[j].region.cell());
                if d <= 2.0 * cell {
                    return Err(CoreError::PieceOverlap {
                        a: pieces[i].name.clone(),
                        b: pieces[j].name.clone(),
                        cells: (d / cell).max(0.0) as u32,
                    });
                }
                min_separation = min_separation.min(d);
            }
        }
        Ok(PiecewiseTarget {
            pieces,
            min_separation,
        })
    }
}

/// Distance between two pieces; exact for disc provenance, boundary-cell brute
/// force otherwise.
fn piece_distance(a: &Piece, b: &Piece) -> f64 {
    use Provenance::Disc;
    match (&a.region.provenance, &b.region.provenance) {
        (
            Disc {
                center: ca,
                radius: ra,
            },
            Disc {
                center: cb,
                radius: rb,
            },
        ) => ((ca - cb).norm() - ra - rb).max(0.0),
        (Disc { center, radius }, _) => b
            .region
            .boundary_cells()
            .iter()
            .map(|z| (z - center).norm() - radius)
            .fold(f64::INFINITY, f64::min)
            .max(0.0),
        (_, Disc { .. }) => piece_distance(b, a),
        _ => a.region.min_distance(&b.region),
    }
}

/// Certified sup-norm error of an approximation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorCertificate {
    pub sup_estimate: f64,
    /// Number of evaluation samples behind the estimate.
    pub sample_count: usize,
    /// Densification factor relative to the fit sampling.
    pub sample_factor: u32,
    pub safety_factor: f64,
    pub certified_bound: f64,
}

/// Tunables for the fit; defaults match the construction pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitConfig {
    /// Starting polynomial degree.
    pub base_poly_degree: usize,
    /// Starting pole order per site.
    pub base_pole_order: usize,
    /// Degree doublings attempted before reporting a stall.
    pub max_doublings: u32,
    /// Condition-number cap on the scaled least-squares system.
    pub condition_cap: f64,
    /// Certificate safety factor.
    pub safety_factor: f64,
    /// Boundary samples per piece at fit density.
    pub boundary_budget: usize,
    /// Interior samples per piece at fit density.
    pub interior_budget: usize,
    /// Certification densification factor.
    pub certify_factor: u32,
    /// Weight of guard samples relative to piece boundary samples.
    pub guard_weight: f64,
    /// Weight of interior samples.
    pub interior_weight: f64,
    /// Hard cap on basis columns.
    pub max_columns: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            base_poly_degree: 16,
            base_pole_order: 16,
            max_doublings: 6,
            condition_cap: 1e12,
            safety_factor: 2.0,
            boundary_budget: 1200,
            interior_budget: 400,
            certify_factor: 4,
            guard_weight: 0.5,
            interior_weight: 0.5,
            max_columns: 640,
        }
    }
}

/// Result of a successful approximation.
#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub map: RationalMap,
    pub certificate: ErrorCertificate,
    /// Pole terms introduced by this fit (carried poles excluded).
    pub new_poles: Vec<PoleTerm>,
    pub condition: f64,
    pub poly_degree: usize,
    pub pole_order: usize,
    pub rows: usize,
    pub columns: usize,
    pub doublings_used: u32,
}

/// A weighted sample of the residual target.
#[derive(Clone, Copy, Debug)]
struct Sample {
    z: C,
    value: C,
    weight: f64,
}

/// Uniformly thin a list down to at most `budget` entries (deterministic stride).
fn decimate<T: Clone>(items: &[T], budget: usize) -> Vec<T> {
    if items.len() <= budget || budget == 0 {
        return items.to_vec();
    }
    let stride = items.len() as f64 / budget as f64;
    (0..budget)
        .map(|i| items[(i as f64 * stride) as usize].clone())
        .collect()
}

/// Walk a closed polyline placing samples at a position-dependent spacing.
///
/// Basis terms of order `k` anchored at a pole site oscillate along nearby
/// boundaries with wavelength `2 pi d / k` where `d` is the distance to the
/// site; sampling must resolve that, so the spacing shrinks near the sites.
fn walk_loop(lp: &[C], spacing: &impl Fn(C) -> f64, out: &mut Vec<C>) {
    if lp.is_empty() {
        return;
    }
    let mut budget_to_next = 0.0f64;
    for i in 0..lp.len() {
        let a = lp[i];
        let b = lp[(i + 1) % lp.len()];
        let seg = (b - a).norm();
        if seg == 0.0 {
            continue;
        }
        let dir = (b - a) / seg;
        let mut walked = 0.0f64;
        while walked + budget_to_next <= seg {
            walked += budget_to_next;
            let z = a + dir * walked;
            out.push(z);
            budget_to_next = spacing(z).max(1e-12);
        }
        budget_to_next -= seg - walked;
    }
}

/// Boundary and interior sample points of one piece. Disc-provenance regions
/// are sampled parametrically (exact circle); raster regions along their
/// crack contours. `spacing` controls the local boundary sample distance.
fn piece_points(
    region: &GridRegion,
    spacing: &impl Fn(C) -> f64,
    interior_budget: usize,
) -> (Vec<C>, Vec<C>) {
    let mut boundary = Vec::new();
    if let Provenance::Disc { center, radius } = region.provenance {
        // Parametric circle as a fine polyline, then the shared walk.
        let n = ((2.0 * std::f64::consts::PI * radius / spacing(center + radius)) as usize)
            .clamp(256, 200_000);
        let circle: Vec<C> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                center + C::new(radius * t.cos(), radius * t.sin())
            })
            .collect();
        walk_loop(&circle, spacing, &mut boundary);
        let mut interior = Vec::new();
        let rings = ((interior_budget as f64).sqrt() * 0.7).ceil() as usize;
        if rings > 0 {
            let per_ring = (interior_budget / rings).max(8);
            for k in 1..=rings {
                let r = radius * ((k as f64 - 0.5) / rings as f64).sqrt();
                for i in 0..per_ring {
                    let t =
                        2.0 * std::f64::consts::PI * (i as f64 + 0.37 * k as f64) / per_ring as f64;
                    interior.push(center + C::new(r * t.cos(), r * t.sin()));
                }
            }
        }
        return (boundary, interior);
    }
    for lp in region.contours() {
        walk_loop(&lp, spacing, &mut boundary);
    }
    let interior_mask = region.interior_mask();
    let mut interior = Vec::new();
    for y in 0..region.ny {
        for x in 0..region.nx {
            if interior_mask[region.idx(x, y)] {
                interior.push(region.cell_center(x, y));
            }
        }
    }
    let interior = decimate(&interior, interior_budget);
    (boundary, interior)
}

/// Build weighted samples of the whole target at a density factor.
/// Samples where the target map is infinite (pole cells) are excluded.
/// Boundary density adapts to the pole sites: spacing `~ 2 d / k_cap` at
/// distance `d` from the nearest site, floored at a fraction of a cell.
fn build_samples(
    target: &PiecewiseTarget,
    factor: u32,
    cfg: &FitConfig,
    sites: &[C],
    k_cap: usize,
) -> Vec<Sample> {
    let f = factor.max(1) as f64;
    let mut out = Vec::new();
    for piece in &target.pieces {
        let region = &piece.region;
        let cell = region.cell();
        // Uniform floor: roughly `boundary_budget` points around the piece.
        let perimeter: f64 = region
            .contours()
            .iter()
            .map(|lp| {
                (0..lp.len())
                    .map(|i| (lp[(i + 1) % lp.len()] - lp[i]).norm())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .max(cell);
        let base = perimeter / cfg.boundary_budget.max(16) as f64;
        let spacing = |z: C| -> f64 {
            let mut s = base;
            if k_cap > 0 {
                for p in sites {
                    let d = (z - p).norm();
                    s = s.min(2.0 * d / k_cap as f64);
                }
            }
            (s / f).max(cell / (3.0 * f))
        };
        let (boundary, interior) = piece_points(
            region,
            &spacing,
            (cfg.interior_budget as f64 * f) as usize,
        );
        for (pts, weight) in [(boundary, 1.0), (interior, cfg.interior_weight)] {
            let vals = par::map(&pts, |z| piece.map.eval(*z));
            for (z, v) in pts.iter().zip(vals.iter()) {
                if let Value::Finite(w) = v {
                    if w.norm() < 1e12 {
                        out.push(Sample {
                            z: *z,
                            value: *w,
                            weight,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Extract the map to carry: the full common rational map when all rational
/// pieces share one, otherwise the union of their pole terms.
fn carry_map(target: &PiecewiseTarget) -> RationalMap {
    let rationals: Vec<&RationalMap> = target
        .pieces
        .iter()
        .filter_map(|p| p.map.rational())
        .collect();
    if rationals.is_empty() {
        return RationalMap::default();
    }
    let first = rationals[0];
    if rationals.iter().all(|r| *r == first) {
        return first.clone();
    }
    let mut poles: Vec<PoleTerm> = Vec::new();
    for r in rationals {
        for p in &r.poles {
            if !poles.iter().any(|q| q.location == p.location) {
                poles.push(p.clone());
            }
        }
    }
    RationalMap {
        blocks: Vec::new(),
        poles,
    }
}

/// Basis column identities, appended in ladder order.
#[derive(Clone, Copy, Debug)]
enum ColumnId {
    Poly(usize),
    Pole { site: usize, order: usize },
}

/// Incremental thin QR over weighted samples with two-pass classical
/// Gram-Schmidt. Columns are appended as the degree ladder grows; `qtb` is
/// maintained alongside so a solve is a back-substitution away.
struct IncrementalFit {
    weights: Vec<f64>,
    rhs: Vec<C>,
    q: Vec<Vec<C>>,
    /// r[j] holds column j of R (length j+1).
    r: Vec<Vec<C>>,
    qtb: Vec<C>,
    ids: Vec<ColumnId>,
    scales: Vec<f64>,
}

impl IncrementalFit {
    fn new(samples: &[Sample]) -> Self {
        IncrementalFit {
            weights: samples.iter().map(|s| s.weight).collect(),
            rhs: samples.iter().map(|s| s.value * s.weight).collect(),
            q: Vec::new(),
            r: Vec::new(),
            qtb: Vec::new(),
            ids: Vec::new(),
            scales: Vec::new(),
        }
    }

    fn add_column(&mut self, id: ColumnId, raw: Vec<C>) {
        let mut v: Vec<C> = raw
            .iter()
            .zip(self.weights.iter())
            .map(|(x, w)| x * *w)
            .collect();
        let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        for x in &mut v {
            *x /= scale;
        }
        let j = self.q.len();
        let mut rcol = vec![C::new(0.0, 0.0); j + 1];
        for _pass in 0..2 {
            if j == 0 {
                break;
            }
            let proj = self.project(&v);
            for t in 0..j {
                rcol[t] += proj[t];
            }
            self.subtract_projection(&proj, &mut v);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let safe = if norm > 0.0 { norm } else { 1.0 };
        rcol[j] = C::new(norm, 0.0);
        for x in &mut v {
            *x /= safe;
        }
        let dot = v
            .iter()
            .zip(self.rhs.iter())
            .map(|(q, b)| q.conj() * b)
            .sum::<C>();
        self.q.push(v);
        self.r.push(rcol);
        self.qtb.push(dot);
        self.ids.push(id);
        self.scales.push(scale);
    }

    /// `Q[:, :j]^H v` with per-column parallel reduction.
    fn project(&self, v: &[C]) -> Vec<C> {
        let j = self.q.len();
        par::map_range(j, |t| {
            let qt = &self.q[t];
            let mut acc = C::new(0.0, 0.0);
            for i in 0..v.len() {
                acc += qt[i].conj() * v[i];
            }
            acc
        })
    }

    /// `v -= Q[:, :j] proj`, parallel over row chunks with column-contiguous
    /// inner loops.
    fn subtract_projection(&self, proj: &[C], v: &mut [C]) {
        let n = v.len();
        let chunk = 4096usize;
        let ranges: Vec<(usize, usize)> = (0..n)
            .step_by(chunk)
            .map(|lo| (lo, (lo + chunk).min(n)))
            .collect();
        let pieces: Vec<Vec<C>> = par::map(&ranges, |&(lo, hi)| {
            let mut acc = vec![C::new(0.0, 0.0); hi - lo];
            for (t, p) in proj.iter().enumerate() {
                let qt = &self.q[t][lo..hi];
                for (a, q) in acc.iter_mut().zip(qt.iter()) {
                    *a += q * p;
                }
            }
            acc
        });
        for ((lo, hi), piece) in ranges.iter().zip(pieces.iter()) {
            for (i, p) in (*lo..*hi).zip(piece.iter()) {
                v[i] -= p;
            }
        }
    }

    /// Solve for coefficients with dead-column protection; returns per-column
    /// coefficients in the *scaled* basis and the diagonal condition estimate.
    fn solve(&self) -> (Vec<C>, f64) {
        let k = self.q.len();
        let diag: Vec<f64> = (0..k).map(|j| self.r[j][j].re).collect();
        let dmax = diag.iter().cloned().fold(0.0, f64::max).max(1e-300);
        let alive: Vec<bool> = diag.iter().map(|&d| d > dmax * 1e-13).collect();
        let dmin = diag
            .iter()
            .zip(alive.iter())
            .filter(|(_, &a)| a)
            .map(|(&d, _)| d)
            .fold(f64::INFINITY, f64::min);
        let cond = dmax / dmin.max(1e-300);
        let mut x = vec![C::new(0.0, 0.0); k];
        for j in (0..k).rev() {
            if !alive[j] {
                continue;
            }
            let mut acc = self.qtb[j];
            for t in (j + 1)..k {
                acc -= self.r[t][j] * x[t];
            }
            x[j] = acc / self.r[j][j];
        }
        (x, cond)
    }

    /// Assemble the fitted rational map from solved coefficients.
    fn assemble(
        &self,
        x: &[C],
        center: C,
        rho: f64,
        sites: &[C],
        site_scales: &[f64],
    ) -> RationalMap {
        let mut poly: Vec<C> = Vec::new();
        let mut pole_coeffs: Vec<Vec<C>> = sites.iter().map(|_| Vec::new()).collect();
        for (j, id) in self.ids.iter().enumerate() {
            let coeff = x[j] / self.scales[j];
            match *id {
                ColumnId::Poly(k) => {
                    if poly.len() <= k {
                        poly.resize(k + 1, C::new(0.0, 0.0));
                    }
                    poly[k] = coeff;
                }
                ColumnId::Pole { site, order } => {
                    let v = &mut pole_coeffs[site];
                    if v.len() < order {
                        v.resize(order, C::new(0.0, 0.0));
                    }
                    v[order - 1] = coeff;
                }
            }
        }
        let poles = sites
            .iter()
            .zip(site_scales.iter())
            .zip(pole_coeffs)
            .map(|((p, s), coeffs)| PoleTerm {
                location: *p,
                scale: *s,
                coeffs,
            })
            .collect();
        RationalMap {
            blocks: vec![PolyBlock {
                center,
                scale: rho,
                coeffs: poly,
            }],
            poles,
        }
    }
}

/// Solve the Runge approximation problem: a rational map `f` with
/// `sup |f - g| <= epsilon` certified over all pieces, new poles confined to
/// `pole_sites` (one site per bounded complementary component, placement by
/// the caller). `guards` are extra sample points where the *increment* over
/// the carried map is pushed toward zero; they constrain the approximant away
/// from the pieces and never loosen the certificate.
pub fn runge_approximate(
    target: &PiecewiseTarget,
    epsilon: f64,
    pole_sites: &[C],
    guards: &[C],
    cfg: &FitConfig,
) -> Result<FitOutcome> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let carry = carry_map(target);

    // Highest pole order the ladder can reach; sampling density is tied to it.
    let k_cap = if pole_sites.is_empty() {
        0
    } else {
        (cfg.max_columns / pole_sites.len()).min(256)
    };
    let fit_samples_raw = build_samples(target, 1, cfg, pole_sites, k_cap);
    let cert_samples_raw = build_samples(target, cfg.certify_factor, cfg, pole_sites, k_cap);

    // Residual targets after subtracting the carried map.
    let to_residual = |s: &Sample| -> Option<Sample> {
        match carry.eval(s.z) {
            Value::Finite(c) => Some(Sample {
                z: s.z,
                value: s.value - c,
                weight: s.weight,
            }),
            Value::Infinity => None,
        }
    };
    let mut fit_samples: Vec<Sample> = fit_samples_raw.iter().filter_map(to_residual).collect();
    let cert_samples: Vec<Sample> = cert_samples_raw.iter().filter_map(to_residual).collect();
    if fit_samples.is_empty() {
        return Err(CoreError::EmptyRegion);
    }
    for g in guards {
        fit_samples.push(Sample {
            z: *g,
            value: C::new(0.0, 0.0),
            weight: cfg.guard_weight,
        });
    }

    // Scale of the problem, used for relative stopping.
    let scale = cert_samples
        .iter()
        .map(|s| s.value.norm())
        .fold(0.0, f64::max)
        .max(1e-300);

    // Per-site basis scale: distance from the site to the nearest sample.
    let site_scales: Vec<f64> = pole_sites
        .iter()
        .map(|p| {
            fit_samples
                .iter()
                .map(|s| (s.z - p).norm())
                .fold(f64::INFINITY, f64::min)
                .max(1e-12)
        })
        .collect();

    // Poly chain center/scale over all samples (guards included).
    let n_all = fit_samples.len() as f64;
    let center = fit_samples.iter().map(|s| s.z).sum::<C>() / n_all;
    let rho = fit_samples
        .iter()
        .map(|s| (s.z - center).norm())
        .fold(0.0, f64::max)
        .max(1e-12);

    let mut fit = IncrementalFit::new(&fit_samples);
    let eval_col = |id: ColumnId| -> Vec<C> {
        match id {
            ColumnId::Poly(k) => fit_samples
                .iter()
                .map(|s| ((s.z - center) / rho).powu(k as u32))
                .collect(),
            ColumnId::Pole { site, order } => {
                let p = pole_sites[site];
                let sc = site_scales[site];
                fit_samples
                    .iter()
                    .map(|s| (C::new(sc, 0.0) / (s.z - p)).powu(order as u32))
                    .collect()
            }
        }
    };

    let mut best: Option<FitOutcome> = None;
    let mut hit_condition_cap = false;
    let mut m_poly_done = 0usize; // highest poly degree added (exclusive bound below)
    let mut m_pole_done = 0usize;
    let mut poly_target = cfg.base_poly_degree;
    let mut pole_target = cfg.base_pole_order;

    for doubling in 0..=cfg.max_doublings {
        // Respect the hard column cap and the sampling-implied order cap.
        pole_target = pole_target.min(k_cap.max(cfg.base_pole_order.min(8)));
        loop {
            let cols = poly_target + 1 + pole_sites.len() * pole_target;
            if cols <= cfg.max_columns || (poly_target <= 2 && pole_target <= 2) {
                break;
            }
            poly_target = (poly_target * 3) / 4;
            pole_target = (pole_target * 3) / 4;
        }
        let grew = poly_target > m_poly_done || pole_target > m_pole_done;
        if grew {
            // Append new columns: poly degrees first, then per-site orders,
            // interleaved by order so sites grow together.
            let lo = if m_poly_done == 0 { 0 } else { m_poly_done + 1 };
            for k in lo..=poly_target.max(m_poly_done) {
                if k > m_poly_done || m_poly_done == 0 {
                    fit.add_column(ColumnId::Poly(k), eval_col(ColumnId::Poly(k)));
                }
            }
            m_poly_done = poly_target.max(m_poly_done);
            for order in (m_pole_done + 1)..=pole_target.max(m_pole_done) {
                for site in 0..pole_sites.len() {
                    let id = ColumnId::Pole { site, order };
                    fit.add_column(id, eval_col(id));
                }
            }
            m_pole_done = pole_target.max(m_pole_done);
        }

        let (x, condition) = fit.solve();
        if condition > cfg.condition_cap {
            hit_condition_cap = true;
        }
        let fitted = fit.assemble(&x, center, rho, pole_sites, &site_scales);
        let debug = std::env::var("FIT_DEBUG").is_ok();
        let candidate = carry.add(&fitted);

        // Certify the residual against the fitted increment directly; the
        // carried part cancels exactly, so this is stable near carried poles.
        let sup_vals = par::map(&cert_samples, |s| match fitted.eval(s.z) {
            Value::Finite(v) => (v - s.value).norm(),
            Value::Infinity => f64::INFINITY,
        });
        let sup_estimate = sup_vals.into_iter().fold(0.0, f64::max);
        if debug {
            eprintln!(
                "  fit rung {doubling}: cols {} (poly {m_poly_done}, pole {m_pole_done}), cond {condition:.2e}, sup {sup_estimate:.3e}",
                fit.q.len()
            );
        }
        let certificate = ErrorCertificate {
            sup_estimate,
            sample_count: cert_samples.len(),
            sample_factor: cfg.certify_factor,
            safety_factor: cfg.safety_factor,
            certified_bound: sup_estimate * cfg.safety_factor,
        };

        let outcome = FitOutcome {
            new_poles: fitted.poles.clone(),
            map: candidate,
            certificate,
            condition,
            poly_degree: m_poly_done,
            pole_order: m_pole_done,
            rows: fit_samples.len(),
            columns: fit.q.len(),
            doublings_used: doubling,
        };

        let better = match &best {
            None => true,
            Some(b) => outcome.certificate.certified_bound < b.certificate.certified_bound,
        };
        if better {
            best = Some(outcome);
        }
        if let Some(b) = &best {
            if b.certificate.certified_bound <= epsilon
                || b.certificate.certified_bound <= 1e-13 * scale
            {
                return Ok(best.unwrap());
            }
        }
        if !grew && doubling > 0 {
            break; // column cap reached, nothing more to add
        }
        poly_target *= 2;
        pole_target *= 2;
    }

    let best = best.expect("at least one rung ran");
    if best.certificate.certified_bound <= epsilon {
        return Ok(best);
    }
    // Conditioning is only fatal when the rung we would return is itself
    // untrustworthy; rungs past the cap are already excluded from `best` by
    // their certificates.
    if hit_condition_cap && best.condition > cfg.condition_cap {
        return Err(CoreError::IllConditioned {
            cond: best.condition,
            cap: cfg.condition_cap,
        });
    }
    Err(CoreError::ApproximationStalled {
        doublings: cfg.max_doublings,
        best: best.certificate.certified_bound,
        requested: epsilon,
    })
}

/// Independent certification of `f` against a target: sup of `|f - g|` over a
/// sample grid densified by `certify_factor`, times the safety factor.
/// Pole cells of `g` are excluded, mirroring approximation on `A \ g^{-1}(inf)`.
pub fn certify_error(
    f: &RationalMap,
    target: &PiecewiseTarget,
    cfg: &FitConfig,
) -> ErrorCertificate {
    let samples = build_samples(target, cfg.certify_factor, cfg, &[], 0);
    let sup_vals = par::map(&samples, |s| match f.eval(s.z) {
        Value::Finite(v) => (v - s.value).norm(),
        Value::Infinity => f64::INFINITY,
    });
    let sup_estimate = sup_vals.into_iter().fold(0.0, f64::max);
    ErrorCertificate {
        sup_estimate,
        sample_count: samples.len(),
        sample_factor: cfg.certify_factor,
        safety_factor: cfg.safety_factor,
        certified_bound: sup_estimate * cfg.safety_factor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{annulus_region, disc_region};

    fn cfg_small() -> FitConfig {
        FitConfig {
            base_poly_degree: 8,
            base_pole_order: 8,
            boundary_budget: 400,
            interior_budget: 100,
            ..FitConfig::default()
        }
    }

    #[test]
    fn exactness_target_in_basis() {
        // A target that is already a polynomial: reproduced to round-off.
        let g = RationalMap::from_poly(vec![
            C::new(1.0, 0.5),
            C::new(-2.0, 0.0),
            C::new(0.25, -1.0),
        ]);
        let region = disc_region(C::new(0.0, 0.0), 0.8, 128);
        let target = PiecewiseTarget::new(vec![Piece {
            name: "disc".into(),
            region,
            map: PieceMap::Rational(g.clone()),
        }])
        .unwrap();
        let out = runge_approximate(&target, 1e-9, &[], &[], &cfg_small()).unwrap();
        assert!(
            out.certificate.certified_bound <= 1e-10 * 10.0,
            "bound {} too large",
            out.certificate.certified_bound
        );
    }

    #[test]
    fn constant_on_two_discs() {
        // Constant 0 on two disjoint discs with epsilon 1e-3.
        let r1 = disc_region(C::new(-1.0, 0.0), 0.4, 128);
        let r2 = disc_region(C::new(1.0, 0.0), 0.4, 128);
        let target = PiecewiseTarget::new(vec![
            Piece {
                name: "left".into(),
                region: r1,
                map: PieceMap::Constant(C::new(0.0, 0.0)),
            },
            Piece {
                name: "right".into(),
                region: r2,
                map: PieceMap::Constant(C::new(0.0, 0.0)),
            },
        ])
        .unwrap();
        let out = runge_approximate(&target, 1e-3, &[], &[], &cfg_small()).unwrap();
        // Independent dense sampling at 4x the fit density.
        for i in 0..4000 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 4000.0;
            for (c, r) in [(C::new(-1.0, 0.0), 0.4), (C::new(1.0, 0.0), 0.4)] {
                let z = c + C::new(r * t.cos(), r * t.sin());
                let v = out.map.eval(z).finite().unwrap();
                assert!(v.norm() <= 1e-3, "|f| = {} at {:?}", v.norm(), z);
            }
        }
    }

    #[test]
    fn certificate_within_factor_two_of_bruteforce() {
        // Random degree-5 perturbation of g on a disc: the certificate must
        // bound the exhaustive cell sweep within its safety factor.
        let g = RationalMap::from_poly(vec![C::new(0.3, 0.0)]);
        let seeds = [0.11, -0.07, 0.046, 0.025, -0.013, 0.009];
        let coeffs: Vec<C> = seeds.iter().map(|s| C::new(*s, -0.5 * s)).collect();
        let f = RationalMap::from_poly(coeffs).add(&g);
        let region = disc_region(C::new(0.0, 0.0), 0.7, 96);
        let target = PiecewiseTarget::new(vec![Piece {
            name: "disc".into(),
            region: region.clone(),
            map: PieceMap::Rational(g),
        }])
        .unwrap();
        let cert = certify_error(&f, &target, &cfg_small());

        let mut brute = 0.0f64;
        for z in region.cells() {
            let v = f.eval(z).finite().unwrap();
            brute = brute.max((v - C::new(0.3, 0.0)).norm());
        }
        assert!(cert.certified_bound >= brute, "certificate must dominate");
        assert!(
            cert.certified_bound <= 2.0 * brute.max(1e-16) * cfg_small().safety_factor,
            "certificate within factor 2 of brute force: {} vs {}",
            cert.certified_bound,
            brute
        );
    }

    #[test]
    fn pole_appears_between_nested_pieces() {
        // Values 0 outside, z+6 on the inner annulus: maximum modulus forces a
        // pole in the gap.
        let outer = annulus_region(C::new(0.0, 0.0), 0.6, 0.68, 256);
        let inner = annulus_region(C::new(0.0, 0.0), 0.1, 0.5, 256);
        let target = PiecewiseTarget::new(vec![
            Piece {
                name: "ring".into(),
                region: outer,
                map: PieceMap::Constant(C::new(0.0, 0.0)),
            },
            Piece {
                name: "core".into(),
                region: inner,
                map: PieceMap::Translation(C::new(6.0, 0.0)),
            },
        ])
        .unwrap();
        let sites = vec![C::new(0.55, 0.0), C::new(0.0, 0.0)];
        let out = runge_approximate(&target, 0.05, &sites, &[], &FitConfig::default()).unwrap();
        let gap_pole = out
            .map
            .poles
            .iter()
            .find(|p| (p.location - C::new(0.55, 0.0)).norm() < 1e-12)
            .unwrap();
        assert!(
            gap_pole.max_coeff() > 0.05,
            "gap pole must carry mass, got {}",
            gap_pole.max_coeff()
        );
    }
}
