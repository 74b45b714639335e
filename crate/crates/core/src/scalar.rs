//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All state types are generic over [`Real`], implemented for `f32` and `f64`.
//! The random-variate hooks live on the trait so that samplers stay generic
//! without dragging `rand_distr`'s per-type bounds through every signature.

use std::fmt;

use nalgebra::RealField;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

/// A real floating-point scalar: `f32` or `f64`.
pub trait Real: RealField + Copy + Default + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn lit(x: f64) -> Self;

    fn to_f64(self) -> f64;

    fn lit_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }

    /// Machine epsilon.
    fn eps() -> Self;

    /// `base` widened to a small multiple of machine epsilon when the type is
    /// too coarse to resolve it.
    fn tol(base: f64) -> Self {
        let floor = Self::eps() * Self::lit(64.0);
        let base = Self::lit(base);
        if base > floor {
            base
        } else {
            floor
        }
    }

    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform on the half-open interval `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Logarithm of a `Gamma(shape, 1)` variate.
    ///
    /// Shapes below one use the boost `Gamma(shape + 1) * U^(1/shape)` carried
    /// out in log space, so that concentration parameters like 0.015 do not
    /// underflow to exact zeros.
    fn sample_ln_gamma<R: Rng + ?Sized>(shape: Self, rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn eps() -> Self {
                <$t>::EPSILON
            }

            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }

            fn sample_ln_gamma<R: Rng + ?Sized>(shape: Self, rng: &mut R) -> Self {
                assert!(shape > 0.0, "gamma shape must be positive, got {shape}");
                if shape >= 1.0 {
                    let g = Gamma::<$t>::new(shape, 1.0).expect("valid gamma shape");
                    g.sample(rng).ln()
                } else {
                    let g = Gamma::<$t>::new(shape + 1.0, 1.0).expect("valid gamma shape");
                    let u: $t = Open01.sample(rng);
                    g.sample(rng).ln() + u.ln() / shape
                }
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
