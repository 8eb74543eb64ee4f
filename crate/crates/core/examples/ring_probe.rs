//! Probe: achievable certified error for a ring-jump target as a function of
//! gap width, ring radius, and basis order. Run with
//! `cargo run --release -p wander-core --example ring_probe`.

use num_complex::Complex64 as C;
use wander_core::io::annulus_region;
use wander_core::runge::{runge_approximate, FitConfig, Piece, PieceMap, PiecewiseTarget};

fn probe(label: &str, r_core_in: f64, r_core_out: f64, gap: f64, ring_w: f64, jump: f64) {
    let res = 512u32;
    let r_ring_in = r_core_out + gap;
    let r_ring_out = r_ring_in + ring_w;
    let core = annulus_region(C::new(0.0, 0.0), r_core_in, r_core_out, res);
    let ring = annulus_region(C::new(0.0, 0.0), r_ring_in, r_ring_out, res);
    let target = PiecewiseTarget::new(vec![
        Piece {
            name: "ring".into(),
            region: ring,
            map: PieceMap::Constant(C::new(0.0, 0.0)),
        },
        Piece {
            name: "core".into(),
            region: core,
            map: PieceMap::Translation(C::new(jump, 0.0)),
        },
    ])
    .unwrap();
    let gap_mid = r_core_out + gap / 2.0;
    let sites = vec![C::new(gap_mid, 0.0), C::new(0.0, 0.0)];
    let cfg = FitConfig::default();
    let t0 = std::time::Instant::now();
    let epsilon = jump / 8000.0;
    match runge_approximate(&target, epsilon, &sites, &[], &cfg) {
        Ok(out) => println!(
            "{label}: certified {:.3e} (cond {:.2e}, poly {}, pole {}, cols {}, rows {}, {:.1}s)",
            out.certificate.certified_bound,
            out.condition,
            out.poly_degree,
            out.pole_order,
            out.columns,
            out.rows,
            t0.elapsed().as_secs_f64()
        ),
        Err(e) => println!("{label}: {e} ({:.1}s)", t0.elapsed().as_secs_f64()),
    }
}

fn main() {
    // Stage-0 like: wide gap relative to radius.
    probe("stage0  (R=0.5, gap=0.15)", 0.05, 0.42, 0.15, 0.04, 6.0);
    // Stage-2 like.
    probe("stage2  (R=0.3, gap=0.04)", 0.1, 0.30, 0.04, 0.02, 12.0);
    // Stage-3 like, normalize target 0.2.
    probe("stage3a (R=0.23, gap=0.017)", 0.11, 0.225, 0.017, 0.01, 15.0);
    // Stage-3 like, normalize target 0.35 (harder).
    probe("stage3b (R=0.39, gap=0.012)", 0.19, 0.39, 0.012, 0.008, 15.0);
}
