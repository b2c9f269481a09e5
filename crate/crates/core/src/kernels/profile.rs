//! Probability densities used as convolution profiles, with exact masses.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Text/JSON form of a profile, e.g. `{"family":"gaussian","l":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Gaussian { l: f64 },
    Box,
    Triangle,
    /// Piecewise-linear density through equally spaced samples on `[lo, hi]`,
    /// zero outside. Samples are rescaled to unit mass.
    Tabulated { lo: f64, hi: f64, density: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    lo: f64,
    hi: f64,
    samples: Vec<f64>,
    /// Mass to the left of each sample node.
    cumulative: Vec<f64>,
}

impl Tabulated {
    fn new(lo: f64, hi: f64, density: Vec<f64>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidProfile("tabulated support must be a finite interval".into()));
        }
        if density.len() < 2 || density.len() > 1_000_000 {
            return Err(Error::InvalidProfile("tabulated profile needs 2..=1e6 samples".into()));
        }
        if density.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidProfile("density samples must be finite and nonnegative".into()));
        }
        let h = (hi - lo) / (density.len() - 1) as f64;
        let total: f64 = density.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidProfile("density has zero total mass".into()));
        }
        let samples: Vec<f64> = density.into_iter().map(|v| v / total).collect();
        let mut cumulative = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in samples.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Ok(Self {
            lo,
            hi,
            samples,
            cumulative,
        })
    }

    fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.samples.len() - 1) as f64
    }

    fn segment(&self, t: f64) -> (usize, f64) {
        let h = self.step();
        let i = (((t - self.lo) / h).floor() as usize).min(self.samples.len() - 2);
        (i, t - (self.lo + h * i as f64))
    }

    fn density(&self, t: f64) -> f64 {
        if !(t >= self.lo && t <= self.hi) {
            return 0.0;
        }
        let (i, u) = self.segment(t);
        let h = self.step();
        self.samples[i] + (self.samples[i + 1] - self.samples[i]) * u / h
    }

    fn cdf(&self, t: f64) -> f64 {
        if t <= self.lo {
            return 0.0;
        }
        if t >= self.hi {
            return 1.0;
        }
        let (i, u) = self.segment(t);
        let h = self.step();
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        (self.cumulative[i] + a * u + (b - a) * u * u / (2.0 * h)).min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelProfile {
    /// Centred normal density of standard deviation `l`.
    Gaussian { l: f64 },
    /// Uniform density on `[0, 1]`.
    Box,
    /// `4y` on `[0, 1/2]`, `4(1 - y)` on `[1/2, 1]`.
    Triangle,
    Tabulated(Tabulated),
}

/// Standard normal mass of `[a, b]`, evaluated on the side of zero where
/// `erfc` keeps full relative precision.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        0.5 * (libm::erfc(a * FRAC_1_SQRT_2) - libm::erfc(b * FRAC_1_SQRT_2))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b * FRAC_1_SQRT_2) - libm::erfc(-a * FRAC_1_SQRT_2))
    } else {
        0.5 * (libm::erf(b * FRAC_1_SQRT_2) - libm::erf(a * FRAC_1_SQRT_2))
    }
}

impl KernelProfile {
    pub fn gaussian(l: f64) -> Result<Self> {
        Self::from_spec(ProfileSpec::Gaussian { l })
    }

    pub fn from_spec(spec: ProfileSpec) -> Result<Self> {
        match spec {
            ProfileSpec::Gaussian { l } => {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::InvalidProfile(format!("gaussian width must be positive, got {l}")));
                }
                Ok(KernelProfile::Gaussian { l })
            }
            ProfileSpec::Box => Ok(KernelProfile::Box),
            ProfileSpec::Triangle => Ok(KernelProfile::Triangle),
            ProfileSpec::Tabulated { lo, hi, density } => Ok(KernelProfile::Tabulated(Tabulated::new(lo, hi, density)?)),
        }
    }

    /// Accepts a JSON object or a bare family name (`gaussian` uses `l`).
    pub fn parse(text: &str, l: Option<f64>) -> Result<Self> {
        let t = text.trim();
        if t.starts_with('{') {
            let spec: ProfileSpec = serde_json::from_str(t)?;
            return Self::from_spec(spec);
        }
        match t {
            "gaussian" => Self::gaussian(l.unwrap_or(1.0)),
            "box" => Ok(KernelProfile::Box),
            "triangle" => Ok(KernelProfile::Triangle),
            other => Err(Error::InvalidProfile(format!("unknown profile family {other:?}"))),
        }
    }

    pub fn spec(&self) -> ProfileSpec {
        match self {
            KernelProfile::Gaussian { l } => ProfileSpec::Gaussian { l: *l },
            KernelProfile::Box => ProfileSpec::Box,
            KernelProfile::Triangle => ProfileSpec::Triangle,
            KernelProfile::Tabulated(t) => ProfileSpec::Tabulated {
                lo: t.lo,
                hi: t.hi,
                density: t.samples.clone(),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelProfile::Gaussian { .. } => "gaussian",
            KernelProfile::Box => "box",
            KernelProfile::Triangle => "triangle",
            KernelProfile::Tabulated(_) => "tabulated",
        }
    }

    pub fn density(&self, y: f64) -> f64 {
        match self {
            KernelProfile::Gaussian { l } => (-(y * y) / (2.0 * l * l)).exp() / (l * (2.0 * PI).sqrt()),
            KernelProfile::Box => {
                if (0.0..=1.0).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
            KernelProfile::Triangle => {
                if !(0.0..=1.0).contains(&y) {
                    0.0
                } else if y <= 0.5 {
                    4.0 * y
                } else {
                    4.0 * (1.0 - y)
                }
            }
            KernelProfile::Tabulated(t) => t.density(y),
        }
    }

    /// `int_{-inf}^t f`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            KernelProfile::Gaussian { l } => normal_mass(f64::NEG_INFINITY, t / l),
            KernelProfile::Box => t.clamp(0.0, 1.0),
            KernelProfile::Triangle => {
                if t <= 0.0 {
                    0.0
                } else if t <= 0.5 {
                    2.0 * t * t
                } else if t < 1.0 {
                    1.0 - 2.0 * (1.0 - t) * (1.0 - t)
                } else {
                    1.0
                }
            }
            KernelProfile::Tabulated(tab) => tab.cdf(t),
        }
    }

    /// `int_a^b f` for `a <= b`, infinite limits allowed.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        match self {
            KernelProfile::Gaussian { l } => normal_mass(a / l, b / l).max(0.0),
            KernelProfile::Box => (b.min(1.0) - a.max(0.0)).max(0.0),
            _ => (self.cdf(b) - self.cdf(a)).max(0.0),
        }
    }

    /// `(lo, hi)` outside of which the density vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            KernelProfile::Gaussian { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            KernelProfile::Box | KernelProfile::Triangle => (0.0, 1.0),
            KernelProfile::Tabulated(t) => (t.lo, t.hi),
        }
    }

    /// Support truncated to a window whose excluded mass is below 1e-30.
    pub fn effective_support(&self) -> (f64, f64) {
        match self {
            KernelProfile::Gaussian { l } => (-12.0 * l, 12.0 * l),
            _ => self.support(),
        }
    }

    /// Points where the density has a kink or jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            KernelProfile::Gaussian { .. } => vec![0.0],
            KernelProfile::Box => vec![0.0, 1.0],
            KernelProfile::Triangle => vec![0.0, 0.5, 1.0],
            KernelProfile::Tabulated(t) => {
                let h = t.step();
                (0..t.samples.len()).map(|i| t.lo + h * i as f64).collect()
            }
        }
    }

    /// `M = sup f`.
    pub fn density_bound(&self) -> f64 {
        match self {
            KernelProfile::Gaussian { l } => 1.0 / (l * (2.0 * PI).sqrt()),
            KernelProfile::Box => 1.0,
            KernelProfile::Triangle => 2.0,
            KernelProfile::Tabulated(t) => t.samples.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Total variation of `f` on the whole line, jumps at the support
    /// boundary included. Bounds the slope of every `x -> mu_delta(x)`.
    pub fn total_variation(&self) -> f64 {
        match self {
            // 2 / (l sqrt(2 pi)) = sqrt(2) / (l sqrt(pi))
            KernelProfile::Gaussian { l } => SQRT_2 / (l * PI.sqrt()),
            KernelProfile::Box => 2.0,
            KernelProfile::Triangle => 4.0,
            KernelProfile::Tabulated(t) => {
                let s = &t.samples;
                s[0] + s[s.len() - 1] + s.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>()
            }
        }
    }

    /// Continuous on the whole line (no boundary jumps).
    pub fn is_continuous(&self) -> bool {
        match self {
            KernelProfile::Gaussian { .. } | KernelProfile::Triangle => true,
            KernelProfile::Box => false,
            KernelProfile::Tabulated(t) => t.samples[0] == 0.0 && t.samples[t.samples.len() - 1] == 0.0,
        }
    }

    /// Lipschitz constant of the density itself, when it is continuous.
    pub fn density_lipschitz(&self) -> Option<f64> {
        match self {
            KernelProfile::Gaussian { l } => Some(1.0 / (l * l * (2.0 * PI * std::f64::consts::E).sqrt())),
            KernelProfile::Triangle => Some(4.0),
            KernelProfile::Tabulated(t) if self.is_continuous() => {
                let h = t.step();
                Some(t.samples.windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max))
            }
            _ => None,
        }
    }

    /// Width used to size sampling windows.
    pub fn scale(&self) -> f64 {
        match self {
            KernelProfile::Gaussian { l } => *l,
            KernelProfile::Tabulated(t) => t.hi - t.lo,
            _ => 1.0,
        }
    }

    /// Support contained in `[0, 1]`, the setting of the compact examples.
    pub fn is_unit_supported(&self) -> bool {
        let (lo, hi) = self.support();
        lo >= 0.0 && hi <= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdfs_end_at_one() {
        let tab = KernelProfile::from_spec(ProfileSpec::Tabulated {
            lo: -1.0,
            hi: 2.0,
            density: vec![0.0, 3.0, 1.0, 2.0, 0.0],
        })
        .unwrap();
        for p in [KernelProfile::gaussian(0.7).unwrap(), KernelProfile::Box, KernelProfile::Triangle, tab] {
            assert!((p.mass(f64::NEG_INFINITY, f64::INFINITY) - 1.0).abs() < 1e-15, "{}", p.name());
            assert_eq!(p.cdf(-1e9), 0.0);
            assert!((p.cdf(1e9) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_tail_mass_keeps_relative_precision() {
        let g = KernelProfile::gaussian(1.0).unwrap();
        let m = g.mass(10.0, f64::INFINITY);
        assert!((m / 7.619853024160527e-24 - 1.0).abs() < 1e-13, "{m:e}");
    }

    #[test]
    fn parse_specs() {
        assert_eq!(KernelProfile::parse("gaussian", Some(2.0)).unwrap(), KernelProfile::Gaussian { l: 2.0 });
        assert_eq!(
            KernelProfile::parse(r#"{"family":"gaussian","l":0.5}"#, None).unwrap(),
            KernelProfile::Gaussian { l: 0.5 }
        );
        assert_eq!(KernelProfile::parse(r#"{"family":"box"}"#, None).unwrap(), KernelProfile::Box);
        assert!(KernelProfile::parse("gaussian", Some(0.0)).is_err());
        assert!(KernelProfile::parse("lorentz", None).is_err());
        assert!(KernelProfile::parse(r#"{"family":"tabulated","lo":0,"hi":1,"density":[-1,2]}"#, None).is_err());
    }

    #[test]
    fn bounds_match_closed_forms() {
        let g = KernelProfile::gaussian(1.0).unwrap();
        assert!((g.density_bound() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((g.total_variation() - 2.0 * g.density_bound()).abs() < 1e-15);
        assert!(!KernelProfile::Box.is_continuous());
        assert!(KernelProfile::Triangle.is_continuous());
    }
}
