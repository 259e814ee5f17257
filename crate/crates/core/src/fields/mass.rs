use crate::linalg::Mat2;

use super::Lattice1D;

/// Coefficients of the generalised mass matrix `M = M₀·I + Mx·σx + My·σy + Mz·σz`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mass {
    pub m0: f64,
    pub mx: f64,
    pub my: f64,
    pub mz: f64,
}

impl Mass {
    pub const ZERO: Mass = Mass {
        m0: 0.0,
        mx: 0.0,
        my: 0.0,
        mz: 0.0,
    };

    pub fn new(m0: f64, mx: f64, my: f64, mz: f64) -> Self {
        Mass { m0, mx, my, mz }
    }

    /// Free Majorana mass: `M = m·σy`.
    pub fn free(m: f64) -> Self {
        Mass {
            my: m,
            ..Mass::ZERO
        }
    }

    /// `|𝐌| = √(Mx² + My² + Mz²)`
    pub fn vector_norm(&self) -> f64 {
        self.mx.hypot(self.my).hypot(self.mz)
    }

    /// `M² = M₀² − |𝐌|²`, the determinant of the mass matrix.
    pub fn invariant_sq(&self) -> f64 {
        self.m0 * self.m0 - (self.mx * self.mx + self.my * self.my + self.mz * self.mz)
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::hermitian(self.m0, self.mx, self.my, self.mz)
    }

    pub fn is_finite(&self) -> bool {
        [self.m0, self.mx, self.my, self.mz].iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Mass {
        Mass::new(self.m0 * s, self.mx * s, self.my * s, self.mz * s)
    }
}

/// Space-time dependent mass matrix sampled at lattice site `j` and step `n`,
/// i.e. `M_{j,n} = M(n·dt, j·dz)`.
pub trait MassField: Send + Sync {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mass;
}

impl<T: MassField + ?Sized> MassField for &T {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mass {
        (**self).sample(site, step, lat)
    }
}

impl<T: MassField + ?Sized> MassField for Box<T> {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mass {
        (**self).sample(site, step, lat)
    }
}

impl<T: MassField + ?Sized> MassField for std::sync::Arc<T> {
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mass {
        (**self).sample(site, step, lat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantMass(pub Mass);

impl MassField for ConstantMass {
    fn sample(&self, _site: usize, _step: u64, _lat: &Lattice1D) -> Mass {
        self.0
    }
}

/// Mass given as a function of physical coordinates `(z, t)`.
pub struct FnMass<F>(pub F);

impl<F> MassField for FnMass<F>
where
    F: Fn(f64, f64) -> Mass + Send + Sync,
{
    fn sample(&self, site: usize, step: u64, lat: &Lattice1D) -> Mass {
        (self.0)(lat.z(site), step as f64 * lat.dt())
    }
}

/// Static per-site table (e.g. read from CSV). Sites beyond the table wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMass {
    pub sites: Vec<Mass>,
}

impl MassField for SampledMass {
    fn sample(&self, site: usize, _step: u64, _lat: &Lattice1D) -> Mass {
        self.sites[site % self.sites.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let m = Mass::new(2.0, 1.0, 2.0, 2.0);
        assert_eq!(m.vector_norm(), 3.0);
        assert_eq!(m.invariant_sq(), 4.0 - 9.0);
        let mat = m.matrix();
        assert!((mat.det().re - m.invariant_sq()).abs() < 1e-14);
        assert!(mat.dist(&mat.adjoint()) == 0.0);
    }

    #[test]
    fn fn_mass_samples_physical_coordinates() {
        let lat = Lattice1D::flat(8, 0.5).unwrap();
        let f = FnMass(|z: f64, t: f64| Mass::new(z, t, 0.0, 0.0));
        let s = f.sample(3, 4, &lat);
        assert_eq!((s.m0, s.mx), (1.5, 2.0));
    }
}
