//! Synthetic problem instances: ground-truth orthogonal dictionary,
//! Bernoulli-Gaussian coefficients, and the three observation regimes
//! (clean, additive Gaussian noise, sparse sign corruptions).
//!
//! Randomness is split into independent sub-streams per matrix (dictionary,
//! coefficients, noise), all derived from the instance seed. Changing the
//! noise spec therefore reuses bit-identical signal matrices, which is how
//! the noise sweeps vary sigma at a fixed signal.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng;
use crate::stiefel::{orthonormality_defect, random_stiefel};

/// Entry distribution of the coefficient matrix: `b · g` with
/// `b ~ Ber(theta)` and `g ~ N(0, sigma^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliGaussianSpec {
    /// Probability that an entry is nonzero, in (0,1).
    pub theta: f64,
    /// Standard deviation of the Gaussian factor.
    pub sigma: f64,
}

impl BernoulliGaussianSpec {
    pub fn new(theta: f64) -> Result<Self> {
        Self::with_sigma(theta, 1.0)
    }

    pub fn with_sigma(theta: f64, sigma: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "sparsity level must lie in (0,1), got {theta}"
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "gaussian scale must be positive, got {sigma}"
            )));
        }
        Ok(Self { theta, sigma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    None,
    Gaussian,
    Sparse,
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseKind::None => write!(f, "none"),
            NoiseKind::Gaussian => write!(f, "gaussian"),
            NoiseKind::Sparse => write!(f, "sparse"),
        }
    }
}

/// Observation noise recipe.
///
/// `gaussian`: adds i.i.d. `N(0, sigma^2)` to every entry.
/// `sparse`: adds `sigma * B ∘ R` with `B ~ Ber(vartheta)` and `R` uniform
/// on {-1, +1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub sigma: f64,
    /// Corruption density; only meaningful for `kind = sparse`.
    pub vartheta: f64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            sigma: 0.0,
            vartheta: 0.0,
        }
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "noise scale must be >= 0, got {sigma}"
            )));
        }
        Ok(Self {
            kind: NoiseKind::Gaussian,
            sigma,
            vartheta: 0.0,
        })
    }

    pub fn sparse(sigma: f64, vartheta: f64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParam(format!(
                "noise scale must be >= 0, got {sigma}"
            )));
        }
        if !(vartheta > 0.0 && vartheta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "corruption density must lie in (0,1), got {vartheta}"
            )));
        }
        Ok(Self {
            kind: NoiseKind::Sparse,
            sigma,
            vartheta,
        })
    }
}

/// Which ground-truth dictionary to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictionaryKind {
    Identity,
    RandomOrthogonal,
}

/// A complete synthetic problem: truth, clean data, and observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryInstance {
    /// Ground-truth orthogonal dictionary, `n × n`.
    pub dictionary: Array2<f64>,
    /// Bernoulli-Gaussian coefficients, `n × r`.
    pub coefficients: Array2<f64>,
    /// Clean observations `dictionary · coefficients`.
    pub clean: Array2<f64>,
    /// Observations after applying the noise recipe.
    pub observed: Array2<f64>,
    pub bg: BernoulliGaussianSpec,
    pub noise: NoiseSpec,
    pub dict_kind: DictionaryKind,
    pub seed: u64,
}

impl DictionaryInstance {
    pub fn dimension(&self) -> usize {
        self.dictionary.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.coefficients.ncols()
    }
}

/// Generate an instance. Fully deterministic given the seed; the
/// dictionary, coefficients, and noise draw from independent sub-streams.
pub fn gen_instance(
    n: usize,
    r: usize,
    bg: &BernoulliGaussianSpec,
    dict_kind: DictionaryKind,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<DictionaryInstance> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("dimension must be >= 2, got {n}")));
    }
    if r < 1 {
        return Err(Error::InvalidParam("sample count must be >= 1".into()));
    }
    // revalidate in case specs were constructed literally
    BernoulliGaussianSpec::with_sigma(bg.theta, bg.sigma)?;
    match noise.kind {
        NoiseKind::None => {}
        NoiseKind::Gaussian => {
            NoiseSpec::gaussian(noise.sigma)?;
        }
        NoiseKind::Sparse => {
            NoiseSpec::sparse(noise.sigma, noise.vartheta)?;
        }
    }

    let dictionary = match dict_kind {
        DictionaryKind::Identity => Array2::eye(n),
        DictionaryKind::RandomOrthogonal => {
            random_stiefel(n, n, rng::derive_seed(seed, "dictionary"))?.into_matrix()
        }
    };
    debug_assert!(orthonormality_defect(&dictionary.view()) <= 1e-10);

    let mut coeff_rng = rng::substream(seed, "coefficients");
    let mut coefficients = Array2::<f64>::zeros((n, r));
    for v in coefficients.iter_mut() {
        if coeff_rng.random::<f64>() < bg.theta {
            let g: f64 = StandardNormal.sample(&mut coeff_rng);
            *v = bg.sigma * g;
        }
    }

    let clean = dictionary.dot(&coefficients);

    let mut observed = clean.clone();
    match noise.kind {
        NoiseKind::None => {}
        NoiseKind::Gaussian => {
            let mut noise_rng = rng::substream(seed, "noise");
            for v in observed.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut noise_rng);
                *v += noise.sigma * g;
            }
        }
        NoiseKind::Sparse => {
            let mut noise_rng = rng::substream(seed, "noise");
            for v in observed.iter_mut() {
                if noise_rng.random::<f64>() < noise.vartheta {
                    let sign = if noise_rng.random::<bool>() { 1.0 } else { -1.0 };
                    *v += noise.sigma * sign;
                }
            }
        }
    }

    Ok(DictionaryInstance {
        dictionary,
        coefficients,
        clean,
        observed,
        bg: *bg,
        noise: *noise,
        dict_kind,
        seed,
    })
}

/// Exact number of nonzero entries.
pub fn support_nonzero_count(x: &Array2<f64>) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

const CONTAINER_MAGIC: &[u8; 8] = b"LPDICT\x00\x01";

fn dict_kind_tag(kind: DictionaryKind) -> u8 {
    match kind {
        DictionaryKind::Identity => 0,
        DictionaryKind::RandomOrthogonal => 1,
    }
}

fn noise_kind_tag(kind: NoiseKind) -> u8 {
    match kind {
        NoiseKind::None => 0,
        NoiseKind::Gaussian => 1,
        NoiseKind::Sparse => 2,
    }
}

fn write_matrix<W: Write>(w: &mut W, m: &Array2<f64>) -> Result<()> {
    for v in m.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_matrix<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let mut data = vec![0f64; rows * cols];
    let mut buf = [0u8; 8];
    for v in data.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::Container(format!("matrix shape: {e}")))
}

impl DictionaryInstance {
    /// Binary container: magic `LPDICT\0\x01`, then little-endian header
    /// (`n`, `r`, `seed` as u64; dictionary-kind and noise-kind tags as u8;
    /// `theta`, `bg sigma`, `noise sigma`, `vartheta` as f64), then the four
    /// matrices row-major f64: dictionary, coefficients, clean, observed.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        let n = self.dimension() as u64;
        let r = self.sample_count() as u64;
        w.write_all(CONTAINER_MAGIC)?;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&r.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&[dict_kind_tag(self.dict_kind), noise_kind_tag(self.noise.kind)])?;
        for v in [
            self.bg.theta,
            self.bg.sigma,
            self.noise.sigma,
            self.noise.vartheta,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        write_matrix(w, &self.dictionary)?;
        write_matrix(w, &self.coefficients)?;
        write_matrix(w, &self.clean)?;
        write_matrix(w, &self.observed)?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CONTAINER_MAGIC {
            return Err(Error::Container("bad magic".into()));
        }
        let mut u64buf = [0u8; 8];
        let mut next_u64 = |r: &mut R| -> Result<u64> {
            r.read_exact(&mut u64buf)?;
            Ok(u64::from_le_bytes(u64buf))
        };
        let n = next_u64(r)? as usize;
        let samples = next_u64(r)? as usize;
        let seed = next_u64(r)?;
        let mut tags = [0u8; 2];
        r.read_exact(&mut tags)?;
        let dict_kind = match tags[0] {
            0 => DictionaryKind::Identity,
            1 => DictionaryKind::RandomOrthogonal,
            t => return Err(Error::Container(format!("bad dictionary tag {t}"))),
        };
        let noise_kind = match tags[1] {
            0 => NoiseKind::None,
            1 => NoiseKind::Gaussian,
            2 => NoiseKind::Sparse,
            t => return Err(Error::Container(format!("bad noise tag {t}"))),
        };
        let mut f64buf = [0u8; 8];
        let mut next_f64 = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut f64buf)?;
            Ok(f64::from_le_bytes(f64buf))
        };
        let theta = next_f64(r)?;
        let bg_sigma = next_f64(r)?;
        let noise_sigma = next_f64(r)?;
        let vartheta = next_f64(r)?;

        let dictionary = read_matrix(r, n, n)?;
        let coefficients = read_matrix(r, n, samples)?;
        let clean = read_matrix(r, n, samples)?;
        let observed = read_matrix(r, n, samples)?;
        Ok(DictionaryInstance {
            dictionary,
            coefficients,
            clean,
            observed,
            bg: BernoulliGaussianSpec {
                theta,
                sigma: bg_sigma,
            },
            noise: NoiseSpec {
                kind: noise_kind,
                sigma: noise_sigma,
                vartheta,
            },
            dict_kind,
            seed,
        })
    }

    /// JSON container (same content as the binary form, self-describing).
    pub fn write_json<W: Write>(&self, w: &mut W) -> Result<()> {
        serde_json::to_writer(w, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: &mut R) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }
}
