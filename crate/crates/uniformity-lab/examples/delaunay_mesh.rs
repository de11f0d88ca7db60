//! Bowyer–Watson Delaunay triangulation with a posteriori certificates.
//!
//! Meshes a seeded random cloud in the unit square, then audits the result:
//! every triangle's circumcircle must be empty of other input points, the
//! triangle areas must add up to the convex hull's area, and the per-simplex
//! diameters give h_max (the quantity the interpolation bound is driven by).
//! The same API meshes 1-D data into sorted segments.
//!
//!     cargo run --example delaunay_mesh

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uniformity_lab::approx::mesh_h_min;
use uniformity_lab::geometry::{delaunay, h_max_simplex, hull_area_2d, interval_mesh};

fn main() -> uniformity_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let points: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random(), rng.random()]).collect();

    let mesh = delaunay(&points, 2)?;
    // Re-runs the empty-circumcircle and area-conservation checks; any
    // violation is an error, so reaching the prints below is the certificate.
    mesh.validate()?;

    let total_area: f64 = mesh.total_volume();
    let hull_area = hull_area_2d(&points);
    println!("Delaunay mesh over {} points:", points.len());
    println!("  triangles        {}", mesh.simplices.len());
    println!("  h_max            {:.4}  (largest triangle diameter)", h_max_simplex(&mesh)?);
    println!("  h_min (vertices) {:.4}  (closest input pair)", mesh_h_min(&mesh));
    println!("  mesh area        {total_area:.6}");
    println!("  hull area        {hull_area:.6}  (must agree to rounding)");
    println!("  empty-circumcircle check: passed for every triangle");

    let segments = interval_mesh(0.0, 1.0, 8)?;
    segments.validate()?;
    println!("\n1-D interval meshed into {} segments, each of length {:.4}",
        segments.simplices.len(), segments.per_simplex_diameter[0]);
    Ok(())
}
