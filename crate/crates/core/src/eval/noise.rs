use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::{DataVector, Image};
use crate::scalar::Scalar;

/// i.i.d. Gaussian noise `N(0, σ²)` drawn from a generator seeded with `seed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", "must be nonnegative and finite"));
        }
        Ok(Self { sigma, seed })
    }
}

pub fn add_noise_slice<T: Scalar>(values: &mut [T], spec: NoiseSpec) -> Result<()> {
    let spec = NoiseSpec::new(spec.sigma, spec.seed)?;
    if spec.sigma == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, spec.sigma).map_err(|e| Error::param("sigma", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for v in values {
        *v += T::of(normal.sample(&mut rng));
    }
    Ok(())
}

pub fn add_noise<T: Scalar>(u: &Image<T>, spec: NoiseSpec) -> Result<Image<T>> {
    let mut out = u.clone();
    add_noise_slice(out.values_mut(), spec)?;
    Ok(out)
}

pub fn add_noise_data<T: Scalar>(v: &DataVector<T>, spec: NoiseSpec) -> Result<DataVector<T>> {
    let mut out = v.clone();
    add_noise_slice(out.values_mut(), spec)?;
    Ok(out)
}
