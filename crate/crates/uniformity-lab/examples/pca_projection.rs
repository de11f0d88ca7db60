//! PCA (Jacobi eigensolve on the sample covariance) plus min-max scaling.
//!
//! The data live on a 2-D plane embedded in ℝ¹⁰ with a whisper of isotropic
//! noise, so the top two principal components should soak up essentially all
//! the variance. The projected coordinates are then min-max scaled into
//! [0,1]² — the form the plotting front ends expect.
//!
//!     cargo run --example pca_projection

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use uniformity_lab::ingest::{DataPoint, EmbeddedDataset, Metric};
use uniformity_lab::projection::{minmax_scale, pca_fit, pca_project};

fn main() -> uniformity_lab::Result<()> {
    let dim = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    // Two fixed orthonormal directions in R^10.
    let mut u = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    u[0] = 0.6;
    u[3] = 0.8;
    v[1] = 1.0;

    let coeff_a = Normal::new(0.0, 2.0).unwrap();
    let coeff_b = Normal::new(0.0, 0.7).unwrap();
    let points = (0..200)
        .map(|i| {
            let (a, b) = (coeff_a.sample(&mut rng), coeff_b.sample(&mut rng));
            let vector = (0..dim)
                .map(|j| {
                    let noise: f64 = rng.sample(StandardNormal);
                    a * u[j] + b * v[j] + 1e-3 * noise
                })
                .collect();
            DataPoint { id: format!("p{i}"), vector }
        })
        .collect();
    let ds = EmbeddedDataset::new(dim, points, Metric::Euclidean)?;

    let model = pca_fit(&ds, 2)?;
    println!("top-2 eigenvalues: {:?}", model.explained_variance);
    println!("total variance:    {:.6}", model.total_variance);
    println!("explained:         {:.4}%", 100.0 * model.explained_fraction());

    let coords = pca_project(&model, &ds)?;
    let scaled = minmax_scale(&coords)?;
    println!("\nfirst five projected points (min-max scaled to [0,1]²):");
    for (id, xy) in scaled.iter().take(5) {
        println!("  {id:<5} ({:.4}, {:.4})", xy[0], xy[1]);
    }

    let (min_x, max_x) = scaled
        .iter()
        .map(|(_, xy)| xy[0])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    println!("\nscaled x-range: [{min_x}, {max_x}] — endpoints attained exactly.");
    Ok(())
}
