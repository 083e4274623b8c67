use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// One atom of a discrete entry law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Law of a single matrix entry.
///
/// For complex laws the real and imaginary parts are independent copies of
/// the described real law; moments are always reported per part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum EntryDistribution {
    Gaussian { variance: f64, complex: bool },
    Discrete { atoms: Vec<Atom>, complex: bool },
}

impl EntryDistribution {
    pub fn gaussian_real_unit() -> Self {
        Self::Gaussian { variance: 1.0, complex: false }
    }

    pub fn gaussian_real_var2() -> Self {
        Self::Gaussian { variance: 2.0, complex: false }
    }

    pub fn gaussian_complex_halves() -> Self {
        Self::Gaussian { variance: 0.5, complex: true }
    }

    /// Symmetric three-point law {-a, 0, a} with P(+-a) = 1/6, a = sqrt(3 * variance).
    ///
    /// This is the unique such law matching a centred Gaussian of the same
    /// variance through the fourth moment.
    pub fn three_point(variance: f64, complex: bool) -> Self {
        let a = (3.0 * variance).sqrt();
        Self::Discrete {
            atoms: vec![
                Atom { value: -a, prob: 1.0 / 6.0 },
                Atom { value: 0.0, prob: 2.0 / 3.0 },
                Atom { value: a, prob: 1.0 / 6.0 },
            ],
            complex,
        }
    }

    pub fn three_point_complex_halves() -> Self {
        Self::three_point(0.5, true)
    }

    pub fn three_point_real_unit() -> Self {
        Self::three_point(1.0, false)
    }

    pub fn three_point_real_var2() -> Self {
        Self::three_point(2.0, false)
    }

    pub fn rademacher_real() -> Self {
        Self::Discrete {
            atoms: vec![Atom { value: -1.0, prob: 0.5 }, Atom { value: 1.0, prob: 0.5 }],
            complex: false,
        }
    }

    pub fn is_complex(&self) -> bool {
        match self {
            Self::Gaussian { complex, .. } | Self::Discrete { complex, .. } => *complex,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Gaussian { variance, .. } => {
                if !(variance.is_finite() && *variance > 0.0) {
                    return Err(Error::InvalidSpec(format!("gaussian variance {variance}")));
                }
            }
            Self::Discrete { atoms, .. } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidSpec("discrete law without atoms".into()));
                }
                let mut total = 0.0;
                for a in atoms {
                    if a.prob.is_nan() || a.prob < 0.0 || !a.value.is_finite() {
                        return Err(Error::InvalidSpec(format!("bad atom {a:?}")));
                    }
                    total += a.prob;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidSpec(format!("atom probabilities sum to {total}")));
                }
            }
        }
        Ok(())
    }

    /// Draw one real part.
    pub(crate) fn draw_part(&self, rng: &mut Rng) -> f64 {
        match self {
            Self::Gaussian { variance, .. } => {
                let z: f64 = rng.sample(StandardNormal);
                z * variance.sqrt()
            }
            Self::Discrete { atoms, .. } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return a.value;
                    }
                }
                atoms[atoms.len() - 1].value
            }
        }
    }

    /// Draw an entry as (re, im); `im` is 0 for real laws.
    pub(crate) fn draw(&self, rng: &mut Rng) -> (f64, f64) {
        let re = self.draw_part(rng);
        let im = if self.is_complex() { self.draw_part(rng) } else { 0.0 };
        (re, im)
    }
}

/// First four raw moments of one real part of the entry law.
pub fn entry_moments(dist: &EntryDistribution) -> [f64; 4] {
    match dist {
        EntryDistribution::Gaussian { variance, .. } => [0.0, *variance, 0.0, 3.0 * variance * variance],
        EntryDistribution::Discrete { atoms, .. } => {
            let mut m = [0.0; 4];
            for a in atoms {
                let mut p = a.prob;
                for mk in m.iter_mut() {
                    p *= a.value;
                    *mk += p;
                }
            }
            m
        }
    }
}

/// True when the first `order` moments agree within `tol`.
pub fn moments_match(a: &EntryDistribution, b: &EntryDistribution, order: usize, tol: f64) -> bool {
    let ma = entry_moments(a);
    let mb = entry_moments(b);
    ma.iter().zip(&mb).take(order).all(|(x, y)| (x - y).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 4], b: [f64; 4]) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn moment_examples() {
        assert!(close(entry_moments(&EntryDistribution::gaussian_complex_halves()), [0.0, 0.5, 0.0, 0.75]));
        assert!(close(entry_moments(&EntryDistribution::three_point_complex_halves()), [0.0, 0.5, 0.0, 0.75]));
        assert!(close(entry_moments(&EntryDistribution::rademacher_real()), [0.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn matched_laws_agree_with_gaussians() {
        let pairs = [
            (EntryDistribution::three_point_real_unit(), EntryDistribution::gaussian_real_unit()),
            (EntryDistribution::three_point_real_var2(), EntryDistribution::gaussian_real_var2()),
            (EntryDistribution::three_point_complex_halves(), EntryDistribution::gaussian_complex_halves()),
        ];
        for (a, b) in &pairs {
            assert!(moments_match(a, b, 4, 1e-14), "{a:?}");
        }
        assert!(moments_match(&EntryDistribution::rademacher_real(), &EntryDistribution::gaussian_real_unit(), 2, 0.0));
        assert!(!moments_match(&EntryDistribution::rademacher_real(), &EntryDistribution::gaussian_real_unit(), 4, 1e-3));
    }

    #[test]
    fn validation() {
        assert!(EntryDistribution::three_point_real_unit().validate().is_ok());
        let bad = EntryDistribution::Discrete {
            atoms: vec![Atom { value: 1.0, prob: 0.7 }, Atom { value: -1.0, prob: 0.7 }],
            complex: false,
        };
        assert!(bad.validate().is_err());
        let neg = EntryDistribution::Discrete {
            atoms: vec![Atom { value: 1.0, prob: 1.5 }, Atom { value: -1.0, prob: -0.5 }],
            complex: false,
        };
        assert!(neg.validate().is_err());
    }
}
