//! Impurity and NJL runs plus the diagnostics used to read them.
//!
//! Positions are measured with the minimum-image convention about a
//! reference point, so a packet that crosses the periodic seam is not torn
//! in two. During a run the reference is the previous centroid; a packet
//! must stay narrower than half the box for that to be meaningful.

use super::{density_2d, impurity_field, init_2d, norm_2d, step_2d, Grid2D, ImpurityConfig, Medium2D, NjlConfig};
use super::{Packet2D, SpinorField2D};
use crate::error::Result;
use crate::linalg::compensated_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExperimentKind {
    /// Massive or massless fermion crossing random scalar impurities.
    Impurity { impurity: ImpurityConfig, mass: f64 },
    Njl(NjlConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment2D {
    pub kind: ExperimentKind,
    pub grid: Grid2D,
    pub packet: Packet2D,
    pub n_steps: u64,
    /// Density snapshots every `stride` steps (and always at step 0 and at the end).
    pub stride: u64,
}

impl Experiment2D {
    pub fn medium(&self) -> Medium2D {
        match self.kind {
            ExperimentKind::Impurity { impurity, mass } => Medium2D {
                mass,
                potential: Some(impurity_field(&self.grid, &impurity)),
                njl: None,
            },
            ExperimentKind::Njl(njl) => Medium2D {
                mass: njl.m,
                potential: None,
                njl: Some(njl),
            },
        }
    }

    pub fn origin(&self) -> (f64, f64) {
        self.packet.center.unwrap_or_else(|| self.grid.center())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub rho: Vec<f64>,
}

/// Per-step series (index = step) plus the strided snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput2D {
    pub snapshots: Vec<Snapshot>,
    pub norms: Vec<f64>,
    pub centroids: Vec<(f64, f64)>,
    /// RMS radius about the centroid.
    pub spreads: Vec<f64>,
    pub final_field: SpinorField2D,
}

impl RunOutput2D {
    /// Mean centroid velocity `(v_z, v_y)` over the whole run.
    pub fn mean_velocity(&self, dt: f64) -> (f64, f64) {
        let n = self.centroids.len() - 1;
        if n == 0 {
            return (0.0, 0.0);
        }
        let (a, b) = (self.centroids[0], self.centroids[n]);
        let t = n as f64 * dt;
        ((b.0 - a.0) / t, (b.1 - a.1) / t)
    }
}

pub fn run_experiment_2d(exp: &Experiment2D) -> Result<RunOutput2D> {
    run_with_field(exp, init_2d(&exp.grid, &exp.packet)?)
}

/// Same as [`run_experiment_2d`] from an arbitrary starting field.
pub fn run_with_field(exp: &Experiment2D, mut f: SpinorField2D) -> Result<RunOutput2D> {
    let grid = &exp.grid;
    let medium = exp.medium();
    let stride = exp.stride.max(1);
    let mut out = RunOutput2D {
        snapshots: Vec::new(),
        norms: Vec::new(),
        centroids: Vec::new(),
        spreads: Vec::new(),
        final_field: SpinorField2D::zeros(grid),
    };
    let start = f.step_index;
    // The min-image reference follows the packet so it never drifts half a box away.
    let mut origin = exp.origin();
    let mut record = |f: &SpinorField2D, out: &mut RunOutput2D| {
        let rho = density_2d(f);
        let c = centroid_2d(&rho, grid, origin);
        origin = c;
        out.norms.push(norm_2d(f, grid));
        out.spreads.push(spread_2d(&rho, grid, c));
        out.centroids.push(c);
        let k = f.step_index - start;
        if k % stride == 0 || k == exp.n_steps {
            out.snapshots.push(Snapshot { step: f.step_index, rho });
        }
    };
    record(&f, &mut out);
    for _ in 0..exp.n_steps {
        f = step_2d(&f, grid, &medium);
        f.check_finite()?;
        record(&f, &mut out);
    }
    out.final_field = f;
    Ok(out)
}

/// Minimum-image displacement of `x` from `x0` on a ring of length `len`.
fn wrap(x: f64, x0: f64, len: f64) -> f64 {
    let d = x - x0;
    d - len * (d / len).round()
}

fn displacements(grid: &Grid2D, origin: (f64, f64)) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
    let (lz, ly) = (grid.nz() as f64 * grid.spacing(), grid.ny() as f64 * grid.spacing());
    (0..grid.sites()).map(move |s| {
        let (z, y) = grid.coords(s);
        (s, wrap(z, origin.0, lz), wrap(y, origin.1, ly))
    })
}

/// Density-weighted centroid, with positions taken relative to `origin`
/// and returned in absolute coordinates.
pub fn centroid_2d(rho: &[f64], grid: &Grid2D, origin: (f64, f64)) -> (f64, f64) {
    let mut wz = Vec::with_capacity(rho.len());
    let mut wy = Vec::with_capacity(rho.len());
    for (s, dz, dy) in displacements(grid, origin) {
        wz.push(rho[s] * dz);
        wy.push(rho[s] * dy);
    }
    let total = compensated_sum(rho);
    (
        origin.0 + compensated_sum(&wz) / total,
        origin.1 + compensated_sum(&wy) / total,
    )
}

/// RMS distance from `center`.
pub fn spread_2d(rho: &[f64], grid: &Grid2D, center: (f64, f64)) -> f64 {
    let w: Vec<f64> = displacements(grid, center).map(|(s, dz, dy)| rho[s] * (dz * dz + dy * dy)).collect();
    (compensated_sum(&w) / compensated_sum(rho)).sqrt()
}

/// Two-lobe reading of a density along a unit `axis` through the centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeMetrics {
    /// Distance between the centroids of the `s < 0` and `s ≥ 0` halves.
    pub separation: f64,
    /// RMS extent transverse to the axis.
    pub sigma_transverse: f64,
}

impl LobeMetrics {
    pub fn is_split(&self, factor: f64) -> bool {
        self.separation > factor * self.sigma_transverse
    }
}

pub fn lobe_metrics(rho: &[f64], grid: &Grid2D, origin: (f64, f64), axis: (f64, f64)) -> LobeMetrics {
    let len = axis.0.hypot(axis.1);
    let (az, ay) = (axis.0 / len, axis.1 / len);
    let c = centroid_2d(rho, grid, origin);
    let (mut pos, mut neg) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
    let mut transverse = Vec::with_capacity(rho.len());
    for (s, dz, dy) in displacements(grid, c) {
        let along = dz * az + dy * ay;
        let across = -dz * ay + dy * az;
        transverse.push(rho[s] * across * across);
        let side = if along < 0.0 { &mut neg } else { &mut pos };
        side.0.push(rho[s]);
        side.1.push(rho[s] * along);
    }
    let mean = |side: &(Vec<f64>, Vec<f64>)| {
        let w = compensated_sum(&side.0);
        if w > 0.0 {
            compensated_sum(&side.1) / w
        } else {
            0.0
        }
    };
    LobeMetrics {
        separation: mean(&pos) - mean(&neg),
        sigma_transverse: (compensated_sum(&transverse) / compensated_sum(rho)).sqrt(),
    }
}

/// Total variation `Σ|ρ_{t+1} − ρ_t|` along the lattice diagonal through
/// `through`, wrapping once around the box.
pub fn axis_total_variation(rho: &[f64], grid: &Grid2D, through: (f64, f64)) -> f64 {
    let h = grid.spacing();
    let iz0 = (through.0 / h).round().rem_euclid(grid.nz() as f64) as usize;
    let iy0 = (through.1 / h).round().rem_euclid(grid.ny() as f64) as usize;
    let n = grid.nz().min(grid.ny());
    let start = n / 2;
    let at = |t: usize| {
        let iz = (iz0 + grid.nz() + t - start) % grid.nz();
        let iy = (iy0 + grid.ny() + t - start) % grid.ny();
        rho[grid.index(iz, iy)]
    };
    let steps: Vec<f64> = (0..n - 1).map(|t| (at(t + 1) - at(t)).abs()).collect();
    compensated_sum(&steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(64, 64, 1.0).unwrap()
    }

    fn blob(g: &Grid2D, c: (f64, f64), s: f64) -> Vec<f64> {
        (0..g.sites())
            .map(|i| {
                let (z, y) = g.coords(i);
                (-((z - c.0).powi(2) + (y - c.1).powi(2)) / (2.0 * s * s)).exp()
            })
            .collect()
    }

    #[test]
    fn centroid_is_seam_safe() {
        let g = grid();
        let rho = blob(&g, (0.0, 30.0), 3.0);
        let rho2: Vec<f64> = rho.iter().zip(blob(&g, (64.0, 30.0), 3.0)).map(|(a, b)| a + b).collect();
        let c = centroid_2d(&rho2, &g, (62.0, 30.0));
        assert!((c.0 - 64.0).abs() < 1e-9 && (c.1 - 30.0).abs() < 1e-9, "{c:?}");
        let s = spread_2d(&rho2, &g, c);
        assert!((s - 3.0 * 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn lobes_of_two_blobs() {
        let g = grid();
        let (a, b) = (blob(&g, (22.0, 22.0), 2.0), blob(&g, (42.0, 42.0), 2.0));
        let rho: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let m = lobe_metrics(&rho, &g, (32.0, 32.0), (1.0, 1.0));
        assert!((m.separation - 20.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!((m.sigma_transverse - 2.0).abs() < 1e-6);
        assert!(m.is_split(4.0));
        let single = lobe_metrics(&blob(&g, (32.0, 32.0), 4.0), &g, (32.0, 32.0), (1.0, 1.0));
        assert!(!single.is_split(4.0));
    }

    #[test]
    fn total_variation_of_a_smooth_bump() {
        let g = grid();
        let rho = blob(&g, (32.0, 32.0), 3.0);
        // one rise and one fall of height 1
        assert!((axis_total_variation(&rho, &g, (32.0, 32.0)) - 2.0).abs() < 1e-9);
    }
}
