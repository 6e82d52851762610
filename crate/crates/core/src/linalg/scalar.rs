use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_traits::{Num, NumAssign};

use crate::Real;

/// Field element of a matrix: a real scalar or a complex number over one.
pub trait Scalar:
    Copy + Num + NumAssign + Neg<Output = Self> + Debug + Send + Sync + 'static
{
    type Re: Real;

    fn from_re(x: Self::Re) -> Self;
    fn re(self) -> Self::Re;
    fn conj(self) -> Self;
    /// `|z|`
    fn modulus(self) -> Self::Re;
    /// `|z|^2`
    fn modulus_sqr(self) -> Self::Re;
    fn finite(self) -> bool;
}

macro_rules! real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Re = $t;
            #[inline]
            fn from_re(x: $t) -> Self {
                x
            }
            #[inline]
            fn re(self) -> $t {
                self
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn modulus_sqr(self) -> $t {
                self * self
            }
            #[inline]
            fn finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

real_scalar!(f32);
real_scalar!(f64);

impl<T: Real> Scalar for Complex<T> {
    type Re = T;
    #[inline]
    fn from_re(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    #[inline]
    fn re(self) -> T {
        self.re
    }
    #[inline]
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn modulus_sqr(self) -> T {
        self.norm_sqr()
    }
    #[inline]
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}
