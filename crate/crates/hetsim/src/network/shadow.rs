//! Correlated log-normal shadow fading fields.
//!
//! Each cell gets an independent Gaussian field with exponential
//! autocorrelation `exp(-lag / correlation_distance)` along the grid axes,
//! built by running a first-order autoregressive pass along x and then
//! along y. The marginal is N(0, sigma^2) and the axis autocorrelation at
//! one correlation distance is e^-1.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use super::GridSpec;

#[derive(Debug, Error)]
pub enum ShadowError {
    #[error("correlation distance must be positive, got {0}")]
    NonPositiveCorrelation(f64),
    #[error("shadow sigma must be non-negative, got {0}")]
    NegativeSigma(f64),
}

/// Per-cell shadow fading realization on a grid.
#[derive(Debug, Clone)]
pub struct ShadowField {
    grid: GridSpec,
    pub sigma_db: f64,
    pub correlation_distance_m: f64,
    pub seed: u64,
    /// `fields[cell][iy * nx + ix]`, dB.
    fields: Vec<Vec<f64>>,
}

/// Generate the per-cell shadow fields. Reproducible: a fixed
/// `(grid, n_cells, sigma, correlation, seed)` tuple yields bit-identical
/// fields, with one independent ChaCha stream per cell.
pub fn generate_shadow_field(
    grid: &GridSpec,
    n_cells: usize,
    sigma_db: f64,
    correlation_distance_m: f64,
    seed: u64,
) -> Result<ShadowField, ShadowError> {
    if correlation_distance_m <= 0.0 {
        return Err(ShadowError::NonPositiveCorrelation(correlation_distance_m));
    }
    if sigma_db < 0.0 {
        return Err(ShadowError::NegativeSigma(sigma_db));
    }
    let rho = (-grid.cell_size_m / correlation_distance_m).exp();
    let innovation = (1.0 - rho * rho).sqrt();
    let (nx, ny) = (grid.nx, grid.ny);
    let mut fields = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(cell as u64);
        let mut f = vec![0.0f64; nx * ny];
        for v in f.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        // AR(1) along x within each row.
        for iy in 0..ny {
            let row = &mut f[iy * nx..(iy + 1) * nx];
            for ix in 1..nx {
                row[ix] = rho * row[ix - 1] + innovation * row[ix];
            }
        }
        // AR(1) along y within each column.
        for iy in 1..ny {
            for ix in 0..nx {
                f[iy * nx + ix] = rho * f[(iy - 1) * nx + ix] + innovation * f[iy * nx + ix];
            }
        }
        for v in f.iter_mut() {
            *v *= sigma_db;
        }
        fields.push(f);
    }
    Ok(ShadowField {
        grid: *grid,
        sigma_db,
        correlation_distance_m,
        seed,
        fields,
    })
}

impl ShadowField {
    /// All-zero field (no shadowing).
    pub fn zero(grid: &GridSpec, n_cells: usize) -> ShadowField {
        ShadowField {
            grid: *grid,
            sigma_db: 0.0,
            correlation_distance_m: 1.0,
            seed: 0,
            fields: vec![vec![0.0; grid.num_points()]; n_cells],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn n_cells(&self) -> usize {
        self.fields.len()
    }

    /// Field value at a grid point index.
    pub fn value(&self, cell: usize, idx: usize) -> f64 {
        self.fields[cell][idx]
    }

    pub fn cell_field(&self, cell: usize) -> &[f64] {
        &self.fields[cell]
    }

    /// Bilinear sample at an arbitrary position, clamped to the grid.
    pub fn sample(&self, cell: usize, x_m: f64, y_m: f64) -> f64 {
        let g = &self.grid;
        let fx = ((x_m - g.origin_x_m) / g.cell_size_m).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((y_m - g.origin_y_m) / g.cell_size_m).clamp(0.0, (g.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(g.nx - 1);
        let iy = (fy.floor() as usize).min(g.ny - 1);
        let ix1 = (ix + 1).min(g.nx - 1);
        let iy1 = (iy + 1).min(g.ny - 1);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let f = &self.fields[cell];
        let v00 = f[iy * g.nx + ix];
        let v10 = f[iy * g.nx + ix1];
        let v01 = f[iy1 * g.nx + ix];
        let v11 = f[iy1 * g.nx + ix1];
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize, step: f64) -> GridSpec {
        GridSpec {
            origin_x_m: 0.0,
            origin_y_m: 0.0,
            cell_size_m: step,
            nx,
            ny,
        }
    }

    fn mean_std(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    #[test]
    fn zero_sigma_gives_zero_field() {
        let g = grid(20, 20, 5.0);
        let f = generate_shadow_field(&g, 3, 0.0, 25.0, 42).unwrap();
        for c in 0..3 {
            assert!(f.cell_field(c).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let g = grid(40, 40, 5.0);
        let a = generate_shadow_field(&g, 2, 8.0, 25.0, 7).unwrap();
        let b = generate_shadow_field(&g, 2, 8.0, 25.0, 7).unwrap();
        for c in 0..2 {
            assert_eq!(a.cell_field(c), b.cell_field(c));
        }
    }

    #[test]
    fn cells_get_independent_fields() {
        let g = grid(40, 40, 5.0);
        let f = generate_shadow_field(&g, 2, 8.0, 25.0, 7).unwrap();
        assert_ne!(f.cell_field(0), f.cell_field(1));
    }

    #[test]
    fn non_positive_correlation_rejected() {
        let g = grid(10, 10, 5.0);
        assert!(generate_shadow_field(&g, 1, 8.0, 0.0, 1).is_err());
        assert!(generate_shadow_field(&g, 1, 8.0, -3.0, 1).is_err());
    }

    // Monte-Carlo estimate over a 200x200 field at 5 m spacing: the sample
    // std must land within 8 +/- 0.8 dB and the sample mean near zero.
    #[test]
    fn field_statistics_match_parameters() {
        let g = grid(200, 200, 5.0);
        let f = generate_shadow_field(&g, 1, 8.0, 25.0, 3).unwrap();
        let (mean, std) = mean_std(f.cell_field(0));
        assert!(mean.abs() < 0.8, "mean {mean}");
        assert!((std - 8.0).abs() < 0.8, "std {std}");
    }

    // Empirical autocorrelation at lag = correlation distance must sit
    // near e^-1 along both axes.
    #[test]
    fn axis_autocorrelation_at_correlation_distance() {
        let g = grid(200, 200, 5.0);
        let f = generate_shadow_field(&g, 1, 8.0, 25.0, 11).unwrap();
        let lag = 5; // 25 m at 5 m spacing
        let field = f.cell_field(0);
        let (mean, std) = mean_std(field);
        let var = std * std;
        let mut acc_x = 0.0;
        let mut n_x = 0usize;
        for iy in 0..g.ny {
            for ix in 0..g.nx - lag {
                acc_x += (field[iy * g.nx + ix] - mean) * (field[iy * g.nx + ix + lag] - mean);
                n_x += 1;
            }
        }
        let mut acc_y = 0.0;
        let mut n_y = 0usize;
        for iy in 0..g.ny - lag {
            for ix in 0..g.nx {
                acc_y += (field[iy * g.nx + ix] - mean) * (field[(iy + lag) * g.nx + ix] - mean);
                n_y += 1;
            }
        }
        let rho_x = acc_x / n_x as f64 / var;
        let rho_y = acc_y / n_y as f64 / var;
        let target = (-1.0f64).exp();
        assert!((rho_x - target).abs() < 0.08, "rho_x {rho_x}");
        assert!((rho_y - target).abs() < 0.08, "rho_y {rho_y}");
    }

    #[test]
    fn bilinear_sample_matches_grid_values() {
        let g = grid(30, 30, 5.0);
        let f = generate_shadow_field(&g, 1, 8.0, 25.0, 5).unwrap();
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let (x, y) = g.point(ix, iy);
                assert_eq!(f.sample(0, x, y), f.value(0, g.index(ix, iy)));
            }
        }
        // Off-grid sample lies between the surrounding node values.
        let v = f.sample(0, 7.5, 12.5);
        assert!(v.is_finite());
    }
}
