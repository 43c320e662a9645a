//! Kernel families evaluated on distances between prediction vectors.
//!
//! Every kernel here is radial except [`KernelFamily::Naive`], which is the
//! product of coordinate indicators and therefore depends on the Chebyshev
//! (max-coordinate) distance. Distances are passed *squared*; kernels that
//! need `‖z‖` take the root themselves.
//!
//! | token     | family           | K(z)                                  |
//! |-----------|------------------|---------------------------------------|
//! | `naive`   | Naive            | `∏ 1{|z_m| ≤ 1}`                      |
//! | `epanechnikov` | Epanechnikov| `(1 − ‖z‖²) 1{‖z‖ ≤ 1}`               |
//! | `biweight`| BiWeight         | `(1 − ‖z‖²)² 1{‖z‖ ≤ 1}`              |
//! | `triweight`| TriWeight       | `(1 − ‖z‖²)³ 1{‖z‖ ≤ 1}`              |
//! | `cgauss`  | CompactGaussian  | `exp(−‖z‖²/2σ²) 1{‖z‖ ≤ ρ₁}`          |
//! | `gauss`   | Gaussian         | `exp(−‖z‖²/2σ²)`                      |
//! | `exp4`    | Exp4             | `exp(−‖z‖⁴/2σ⁴)`                      |
//!
//! Two bandwidth parametrizations are supported. [`Parametrization::Scale`]
//! evaluates `K(z/h)`. [`Parametrization::InverseScale`] multiplies the
//! exponent of the Gaussian-type kernels by `h`, e.g. `exp(−h‖z‖²/2σ²)`; it is
//! the parametrization in which the bandwidth is tuned by gradient descent.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    Naive,
    Epanechnikov,
    BiWeight,
    TriWeight,
    CompactGaussian,
    Gaussian,
    Exp4,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 7] = [
        KernelFamily::Naive,
        KernelFamily::Epanechnikov,
        KernelFamily::BiWeight,
        KernelFamily::TriWeight,
        KernelFamily::CompactGaussian,
        KernelFamily::Gaussian,
        KernelFamily::Exp4,
    ];

    pub fn token(self) -> &'static str {
        match self {
            KernelFamily::Naive => "naive",
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::BiWeight => "biweight",
            KernelFamily::TriWeight => "triweight",
            KernelFamily::CompactGaussian => "cgauss",
            KernelFamily::Gaussian => "gauss",
            KernelFamily::Exp4 => "exp4",
        }
    }

    /// Whether the kernel vanishes outside a bounded set.
    pub fn is_compact(self) -> bool {
        !matches!(self, KernelFamily::Gaussian | KernelFamily::Exp4)
    }

    fn uses_sigma(self) -> bool {
        matches!(
            self,
            KernelFamily::CompactGaussian | KernelFamily::Gaussian | KernelFamily::Exp4
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Scale of the Gaussian-type families.
    pub sigma: f64,
    /// Truncation radius of the compact Gaussian.
    pub rho1: f64,
}

impl KernelSpec {
    pub const DEFAULT_SIGMA: f64 = 1.0;
    pub const DEFAULT_RHO1: f64 = 3.0;

    pub fn new(family: KernelFamily) -> Self {
        KernelSpec {
            family,
            sigma: Self::DEFAULT_SIGMA,
            rho1: Self::DEFAULT_RHO1,
        }
    }

    pub fn gaussian() -> Self {
        Self::new(KernelFamily::Gaussian)
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_rho1(mut self, rho1: f64) -> Self {
        self.rho1 = rho1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!(
                "kernel sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(self.rho1.is_finite() && self.rho1 > 0.0) {
            return Err(Error::invalid(format!(
                "kernel rho1 must be positive, got {}",
                self.rho1
            )));
        }
        Ok(())
    }

    /// The parametrization used when tuning this kernel by default:
    /// gradient descent (inverse scale) for the smooth families, grid search
    /// (scale) for the compact ones.
    pub fn default_parametrization(&self) -> Parametrization {
        if self.family.is_compact() {
            Parametrization::Scale
        } else {
            Parametrization::InverseScale
        }
    }
}

impl fmt::Display for KernelSpec {
    /// Family token plus any non-default parameters.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.token())?;
        if self.family.uses_sigma() && self.sigma != Self::DEFAULT_SIGMA {
            write!(f, ":sigma={}", self.sigma)?;
        }
        if self.family == KernelFamily::CompactGaussian && self.rho1 != Self::DEFAULT_RHO1 {
            write!(f, ":rho1={}", self.rho1)?;
        }
        Ok(())
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// Parses `name[:sigma=<f>][:rho1=<f>]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let family = match name.as_str() {
            "naive" => KernelFamily::Naive,
            "epanechnikov" | "epan" => KernelFamily::Epanechnikov,
            "biweight" | "bi-weight" => KernelFamily::BiWeight,
            "triweight" | "tri-weight" => KernelFamily::TriWeight,
            "cgauss" | "compact-gaussian" => KernelFamily::CompactGaussian,
            "gauss" | "gaussian" => KernelFamily::Gaussian,
            "exp4" => KernelFamily::Exp4,
            other => return Err(Error::invalid(format!("unknown kernel `{other}`"))),
        };
        let mut spec = KernelSpec::new(family);
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("malformed kernel parameter `{part}`")))?;
            let value: f64 = value
                .parse()
                .map_err(|_| Error::invalid(format!("kernel parameter `{part}` is not a number")))?;
            match key {
                "sigma" => spec.sigma = value,
                "rho1" => spec.rho1 = value,
                _ => return Err(Error::invalid(format!("unknown kernel parameter `{key}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parametrization {
    /// `K_h(z) = K(z / h)`.
    Scale,
    /// The exponent is multiplied by `h` (Gaussian and Exp4 only).
    InverseScale,
}

impl fmt::Display for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parametrization::Scale => "scale",
            Parametrization::InverseScale => "inverse-scale",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub h: f64,
    pub parametrization: Parametrization,
}

impl Bandwidth {
    pub fn scale(h: f64) -> Self {
        Bandwidth {
            h,
            parametrization: Parametrization::Scale,
        }
    }

    pub fn inverse_scale(h: f64) -> Self {
        Bandwidth {
            h,
            parametrization: Parametrization::InverseScale,
        }
    }
}

/// Distance between two prediction vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSample {
    pub sq_euclid: f64,
    /// Required by the naive kernel only.
    pub chebyshev: Option<f64>,
}

impl DistanceSample {
    pub fn radial(sq_euclid: f64) -> Self {
        DistanceSample {
            sq_euclid,
            chebyshev: None,
        }
    }

    pub fn with_chebyshev(sq_euclid: f64, chebyshev: f64) -> Self {
        DistanceSample {
            sq_euclid,
            chebyshev: Some(chebyshev),
        }
    }
}

/// Evaluates `K_h` at a pair of prediction vectors separated by `dist`.
pub fn kernel_weight(spec: &KernelSpec, param: &Bandwidth, dist: DistanceSample) -> Result<f64> {
    let kernel = Kernel::new(*spec, *param)?;
    if kernel.needs_chebyshev() && dist.chebyshev.is_none() {
        return Err(Error::invalid("naive kernel needs the Chebyshev distance"));
    }
    check_distance(dist)?;
    Ok(kernel.weight(dist.sq_euclid, dist.chebyshev.unwrap_or(f64::NAN)))
}

/// Derivative of `K_h` with respect to `h` under the inverse-scale parametrization.
pub fn kernel_weight_dh(spec: &KernelSpec, param: &Bandwidth, dist: DistanceSample) -> Result<f64> {
    let kernel = Kernel::new(*spec, *param)?;
    kernel.require_differentiable()?;
    check_distance(dist)?;
    Ok(kernel.weight_dh(dist.sq_euclid))
}

fn check_distance(dist: DistanceSample) -> Result<()> {
    let ok = |v: f64| v.is_finite() && v >= 0.0;
    if !ok(dist.sq_euclid) || !dist.chebyshev.map_or(true, ok) {
        return Err(Error::invalid("distances must be finite and nonnegative"));
    }
    Ok(())
}

/// A kernel bound to a validated bandwidth; evaluation is infallible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    spec: KernelSpec,
    bandwidth: Bandwidth,
}

impl Kernel {
    pub fn new(spec: KernelSpec, bandwidth: Bandwidth) -> Result<Self> {
        spec.validate()?;
        let h = bandwidth.h;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::invalid(format!("bandwidth must be positive, got {h}")));
        }
        if bandwidth.parametrization == Parametrization::InverseScale && spec.family.is_compact() {
            return Err(Error::invalid(format!(
                "inverse-scale bandwidth is only defined for gauss and exp4, not {}",
                spec.family.token()
            )));
        }
        Ok(Kernel { spec, bandwidth })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn bandwidth(&self) -> &Bandwidth {
        &self.bandwidth
    }

    pub fn needs_chebyshev(&self) -> bool {
        self.spec.family == KernelFamily::Naive
    }

    /// True for the families that never return zero, whose weights can be
    /// computed in log space.
    pub fn is_positive(&self) -> bool {
        !self.spec.family.is_compact()
    }

    pub fn is_differentiable(&self) -> bool {
        self.is_positive() && self.bandwidth.parametrization == Parametrization::InverseScale
    }

    pub(crate) fn require_differentiable(&self) -> Result<()> {
        if self.is_differentiable() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "the h-derivative is only available for gauss/exp4 with inverse-scale bandwidth, not {} ({})",
                self.spec, self.bandwidth.parametrization
            )))
        }
    }

    /// `c(d²)` such that the positive kernels read `exp(−c)` at unit scale.
    fn exponent_unit(&self, sq: f64) -> f64 {
        let s2 = self.spec.sigma * self.spec.sigma;
        match self.spec.family {
            KernelFamily::Exp4 => sq * sq / (2.0 * s2 * s2),
            _ => sq / (2.0 * s2),
        }
    }

    /// `log K_h` for the positive families. Callers must check [`Self::is_positive`].
    pub fn log_weight(&self, sq: f64) -> f64 {
        debug_assert!(self.is_positive());
        let h = self.bandwidth.h;
        match self.bandwidth.parametrization {
            Parametrization::InverseScale => -h * self.exponent_unit(sq),
            Parametrization::Scale => -self.exponent_unit(sq / (h * h)),
        }
    }

    /// `K_h` at squared Euclidean distance `sq`; `cheb` is only read by the naive kernel.
    pub fn weight(&self, sq: f64, cheb: f64) -> f64 {
        let h = self.bandwidth.h;
        match self.spec.family {
            KernelFamily::Naive => {
                if cheb <= h {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::Epanechnikov | KernelFamily::BiWeight | KernelFamily::TriWeight => {
                let u2 = sq / (h * h);
                if u2 <= 1.0 {
                    let base = 1.0 - u2;
                    match self.spec.family {
                        KernelFamily::Epanechnikov => base,
                        KernelFamily::BiWeight => base * base,
                        _ => base * base * base,
                    }
                } else {
                    0.0
                }
            }
            KernelFamily::CompactGaussian => {
                let u2 = sq / (h * h);
                if u2 <= self.spec.rho1 * self.spec.rho1 {
                    (-self.exponent_unit(u2)).exp()
                } else {
                    0.0
                }
            }
            KernelFamily::Gaussian | KernelFamily::Exp4 => self.log_weight(sq).exp(),
        }
    }

    /// `∂K_h/∂h = −c(d²)·K_h` under inverse scale.
    pub fn weight_dh(&self, sq: f64) -> f64 {
        debug_assert!(self.is_differentiable());
        let c = self.exponent_unit(sq);
        -c * (-self.bandwidth.h * c).exp()
    }

    /// The factor `c` with `∂K_h/∂h = −c·K_h` (inverse scale only).
    pub(crate) fn dh_factor(&self, sq: f64) -> f64 {
        self.exponent_unit(sq)
    }
}
