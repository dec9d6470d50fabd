//! Physical constants, the Langmuir isotherm and the nonlinear storage,
//! mobility and transfer coefficients with their constant upper bounds.

mod field;

pub use field::{CoefficientField, MatrixMaterial, Raster};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("negative concentration {value:e}")]
    NegativeConcentration { value: f64 },
    #[error("constant `{name}` must be strictly positive, got {value:e}")]
    NonPositiveConstant { name: &'static str, value: f64 },
    #[error("well pressure must be below the initial pressure (c_min < c_max)")]
    BoundsOrder,
    #[error("multiplier {index} is not strictly positive ({value:e})")]
    NonPositiveMultiplier { index: usize, value: f64 },
    #[error("raster has {found} values, expected {nx} x {ny}")]
    RasterShape { nx: usize, ny: usize, found: usize },
    #[error("field has {found} entries, mesh needs {expected}")]
    FieldLength { expected: usize, found: usize },
}

/// Constants of the transport model in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub r_gas: f64,
    pub temperature: f64,
    pub z: f64,
    pub p_init: f64,
    pub p_well: f64,
    pub p_langmuir: f64,
    pub c_mu_s: f64,
    pub phi: f64,
    pub phi_f: f64,
    pub eps_ks: f64,
    pub eps_kp: f64,
    pub diffusivity: f64,
    pub diffusivity_s: f64,
    pub kappa_m: f64,
    pub kappa_f: f64,
    pub kappa_w: f64,
    pub mu: f64,
    pub zeta_mf: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            r_gas: 8.31,
            temperature: 323.0,
            z: 1.0,
            p_init: 20e6,
            p_well: 5e6,
            p_langmuir: 1e6,
            c_mu_s: 0.25e5,
            phi: 0.02,
            phi_f: 0.2,
            eps_ks: 0.5,
            eps_kp: 0.5,
            diffusivity: 1e-8,
            diffusivity_s: 1e-8,
            kappa_m: 1e-20,
            kappa_f: 1e6 * 1e-20,
            kappa_w: 1e5 * 1e-20,
            mu: 1e-5,
            zeta_mf: 1e3,
        }
    }
}

impl PhysicalConstants {
    /// Sets `kappa_f = k_f * 1e-20`.
    pub fn with_contrast(mut self, k_f: f64) -> Self {
        self.kappa_f = k_f * 1e-20;
        self
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let named = [
            ("R", self.r_gas),
            ("T", self.temperature),
            ("Z", self.z),
            ("p_i", self.p_init),
            ("p_w", self.p_well),
            ("p_L", self.p_langmuir),
            ("c_mu_s", self.c_mu_s),
            ("phi", self.phi),
            ("phi_f", self.phi_f),
            ("eps_ks", self.eps_ks),
            ("eps_kp", self.eps_kp),
            ("D", self.diffusivity),
            ("D_s", self.diffusivity_s),
            ("kappa_m", self.kappa_m),
            ("kappa_f", self.kappa_f),
            ("kappa_w", self.kappa_w),
            ("mu", self.mu),
            ("zeta_mf", self.zeta_mf),
        ];
        for (name, value) in named {
            if !(value > 0.0) || !value.is_finite() {
                return Err(PhysicsError::NonPositiveConstant { name, value });
            }
        }
        if self.p_well >= self.p_init {
            return Err(PhysicsError::BoundsOrder);
        }
        Ok(())
    }

    pub fn zrt(&self) -> f64 {
        self.z * self.r_gas * self.temperature
    }

    /// Langmuir equilibrium coefficient `K = Z R T / p_L`.
    pub fn k_langmuir(&self) -> f64 {
        self.zrt() / self.p_langmuir
    }

    pub fn c_init(&self) -> f64 {
        self.p_init / self.zrt()
    }

    pub fn c_well(&self) -> f64 {
        self.p_well / self.zrt()
    }

    pub fn c_min(&self) -> f64 {
        self.c_well()
    }

    pub fn c_max(&self) -> f64 {
        self.c_init()
    }

    /// Adsorbed amount `F(c) = c_mu_s K c / (1 + K c)`.
    pub fn langmuir_f(&self, c: f64) -> Result<f64, PhysicsError> {
        check_conc(c)?;
        let k = self.k_langmuir();
        Ok(self.c_mu_s * k * c / (1.0 + k * c))
    }

    /// `F'(c) = c_mu_s K / (1 + K c)^2`.
    pub fn langmuir_fprime(&self, c: f64) -> Result<f64, PhysicsError> {
        check_conc(c)?;
        let k = self.k_langmuir();
        let d = 1.0 + k * c;
        Ok(self.c_mu_s * k / (d * d))
    }

    /// Affine well source `f_f(c) = g0 - g1 c`.
    pub fn well_source(&self) -> WellSource {
        let g1 = self.c_well() * self.zrt() * self.kappa_w / self.mu;
        WellSource {
            g0: g1 * self.c_well(),
            g1,
        }
    }
}

fn check_conc(c: f64) -> Result<(), PhysicsError> {
    if c < 0.0 || c.is_nan() {
        Err(PhysicsError::NegativeConcentration { value: c })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellSource {
    pub g0: f64,
    pub g1: f64,
}

impl WellSource {
    pub fn eval(&self, c_f: f64) -> f64 {
        self.g0 - self.g1 * c_f
    }
}

/// Constant-in-time upper bounds at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub a_m: f64,
    pub b_m: f64,
    pub sigma: f64,
}

/// Coefficient functions of the coupled model.
///
/// With `frozen` set every coefficient returns its upper bound, which turns
/// the model linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientModel {
    pub constants: PhysicalConstants,
    pub frozen: bool,
    /// Concentration at which `a_m*` is taken instead of `c_min`. Anything
    /// above `c_min` breaks the dominance hypothesis.
    pub storage_bound_at: Option<f64>,
}

impl CoefficientModel {
    pub fn new(constants: PhysicalConstants) -> Result<Self, PhysicsError> {
        constants.validate()?;
        Ok(Self {
            constants,
            frozen: false,
            storage_bound_at: None,
        })
    }

    pub fn frozen(mut self, frozen: bool) -> Self {
        self.frozen = frozen;
        self
    }

    /// Matrix storage `phi + (1 - phi) eps_ks F'(c)`.
    pub fn a_m(&self, mat: &MatrixMaterial, c: f64) -> Result<f64, PhysicsError> {
        let c = if self.frozen {
            self.storage_bound_at.unwrap_or(self.constants.c_min())
        } else {
            c
        };
        let k = &self.constants;
        Ok(mat.phi + (1.0 - mat.phi) * k.eps_ks * k.langmuir_fprime(c)?)
    }

    /// Diffusive part `phi D + (1 - phi) eps_ks F'(c) D_s`.
    pub fn b_m1(&self, mat: &MatrixMaterial, c: f64) -> Result<f64, PhysicsError> {
        let c = if self.frozen { self.constants.c_min() } else { c };
        let k = &self.constants;
        Ok(mat.phi * k.diffusivity + (1.0 - mat.phi) * k.eps_ks * k.langmuir_fprime(c)? * k.diffusivity_s)
    }

    /// Darcy part `c Z R T kappa_m / mu`.
    pub fn b_m2(&self, mat: &MatrixMaterial, c: f64) -> Result<f64, PhysicsError> {
        check_conc(c)?;
        let c = if self.frozen { self.constants.c_max() } else { c };
        Ok(c * self.constants.zrt() * mat.kappa_m / self.constants.mu)
    }

    pub fn b_m(&self, mat: &MatrixMaterial, c: f64) -> Result<f64, PhysicsError> {
        Ok(self.b_m1(mat, c)? + self.b_m2(mat, c)?)
    }

    /// Fracture storage `phi_f`, constant in time.
    pub fn a_f(&self) -> f64 {
        self.constants.phi_f
    }

    /// Fracture mobility `c Z R T kappa_f / mu`.
    pub fn b_f(&self, kappa_f: f64, c: f64) -> Result<f64, PhysicsError> {
        check_conc(c)?;
        let c = if self.frozen { self.constants.c_max() } else { c };
        Ok(c * self.constants.zrt() * kappa_f / self.constants.mu)
    }

    /// Matrix-fracture transfer `b_m(c_m) zeta_mf`, the same in both directions.
    pub fn sigma(&self, mat: &MatrixMaterial, c_m: f64) -> Result<f64, PhysicsError> {
        Ok(self.b_m(mat, c_m)? * self.constants.zeta_mf)
    }

    /// `a_m* = a_m(c_min)`, `b_m* = b_m1(c_min) + b_m2(c_max)`, `sigma* = b_m* zeta_mf`.
    pub fn bounds(&self, mat: &MatrixMaterial) -> Bounds {
        let unfrozen = Self {
            frozen: false,
            ..*self
        };
        let (lo, hi) = (self.constants.c_min(), self.constants.c_max());
        let a_at = self.storage_bound_at.unwrap_or(lo);
        let a_m = unfrozen.a_m(mat, a_at).expect("bound concentration is positive");
        let b_m = unfrozen.b_m1(mat, lo).expect("c_min is positive")
            + unfrozen.b_m2(mat, hi).expect("c_max is positive");
        Bounds {
            a_m,
            b_m,
            sigma: b_m * self.constants.zeta_mf,
        }
    }

    /// `b_f* = b_f(c_max)`.
    pub fn b_f_bound(&self, kappa_f: f64) -> f64 {
        self.constants.c_max() * self.constants.zrt() * kappa_f / self.constants.mu
    }

    /// Smallest margins `bound - value` over `samples` equispaced points of
    /// `[c_min, c_max]`.
    pub fn dominance_margins(&self, mat: &MatrixMaterial, kappa_f: f64, samples: usize) -> DominanceMargins {
        let b = self.bounds(mat);
        let bf = self.b_f_bound(kappa_f);
        let (lo, hi) = (self.constants.c_min(), self.constants.c_max());
        let mut m = DominanceMargins {
            a_m: f64::INFINITY,
            b_m: f64::INFINITY,
            b_f: f64::INFINITY,
        };
        for k in 0..samples.max(2) {
            let c = lo + (hi - lo) * k as f64 / (samples.max(2) - 1) as f64;
            m.a_m = m.a_m.min(b.a_m - self.a_m(mat, c).expect("positive sample"));
            m.b_m = m.b_m.min(b.b_m - self.b_m(mat, c).expect("positive sample"));
            m.b_f = m.b_f.min(bf - self.b_f(kappa_f, c).expect("positive sample"));
        }
        m
    }
}

/// Smallest observed `bound - coefficient`; all nonnegative when the
/// stability hypothesis holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceMargins {
    pub a_m: f64,
    pub b_m: f64,
    pub b_f: f64,
}

impl DominanceMargins {
    pub fn holds(&self) -> bool {
        self.a_m >= 0.0 && self.b_m >= 0.0 && self.b_f >= 0.0
    }
}
