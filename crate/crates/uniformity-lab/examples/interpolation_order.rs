//! Convergence-order study for piecewise-linear simplex interpolation.
//!
//! Refining a uniform mesh under a smooth target should shrink the L^p
//! interpolation error like h_max² (degree-1 interpolation, m = 2 regime),
//! and the data-dependent error bound C₁·h_max^m·h_min^{−r}, with C₁
//! calibrated once on the coarsest mesh, should dominate the measured error
//! on every finer one. The last section squeezes two mesh vertices together
//! to show the r ≥ 1 bound blowing up while the actual error stays put —
//! the bound is one-sided, and h_min is the lever.
//!
//!     cargo run --example interpolation_order

use uniformity_lab::approx::{
    bh_bound, lp_error, mesh_h_min, order_sweep, InterpolantSpec, OrderFit, SweepDomain,
};
use uniformity_lab::geometry::SimplexMesh;

fn print_sweep(label: &str, rows: &[uniformity_lab::approx::ApproxReport], fit: OrderFit) {
    println!("{label}");
    println!("  {:>10} {:>12} {:>12}", "h_max", "L2 error", "bound");
    for row in rows {
        println!("  {:>10.5} {:>12.3e} {:>12.3e}", row.h_max, row.lp_error, row.bound_value);
    }
    match fit {
        OrderFit::Slope(s) => println!("  fitted order (log-log slope): {s:.3}  — expect ≈ 2"),
        OrderFit::Exact => println!("  errors at rounding level (exact reproduction)"),
    }
}

fn main() -> uniformity_lab::Result<()> {
    let sizes = [8, 16, 32, 64];

    let (rows, fit) = order_sweep(
        |x: &[f64]| x[0].sin(),
        SweepDomain::Interval { a: 0.0, b: std::f64::consts::PI },
        &sizes,
        2.0,
        12,
    )?;
    print_sweep("g = sin(x) on [0, π]:", &rows, fit);

    let (rows, fit) = order_sweep(
        |x: &[f64]| x[0] * x[0] + x[1] * x[1],
        SweepDomain::Rect { a: [0.0, 0.0], b: [1.0, 1.0] },
        &sizes,
        2.0,
        12,
    )?;
    print_sweep("\ng = x² + y² on [0,1]²:", &rows, fit);

    // h_min sensitivity: a hand-built 1-D mesh with one vertex squeezed ever
    // closer to its neighbor. The measured error barely moves; the r = 1
    // bound diverges like 1/h_min.
    println!("\nsqueezed-vertex mesh, g = x², bound with m = 2, r = 1:");
    println!("  {:>10} {:>12} {:>12} {:>12}", "h_min", "L∞ error", "bound", "bound/error");
    for squeeze in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mesh = SimplexMesh::new(
            1,
            vec![vec![0.0], vec![squeeze], vec![0.5], vec![0.75], vec![1.0]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 4]],
        )?;
        let h_max = mesh.per_simplex_diameter.iter().cloned().fold(0.0, f64::max);
        let h_min = mesh_h_min(&mesh);
        let values: Vec<f64> = mesh.vertices.iter().map(|v| v[0] * v[0]).collect();
        let spec = InterpolantSpec::new(mesh, values, 1)?;
        let err = lp_error(&spec, |x: &[f64]| x[0] * x[0], f64::INFINITY, 12)?;
        let bound = bh_bound(h_max, h_min, 2, 1, 1.0, 1.0)?;
        println!("  {h_min:>10.0e} {err:>12.3e} {bound:>12.3e} {:>12.1e}", bound / err);
    }
    Ok(())
}
