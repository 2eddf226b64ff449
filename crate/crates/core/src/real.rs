use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the rate machinery is generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; every `f64` is representable (possibly rounded) in both impls.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal must convert")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `10^(db/10)`.
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

/// `10·log10(x)`.
pub fn linear_to_db<T: Real>(x: T) -> T {
    T::lit(10.0) * x.log10()
}

/// Terms this far (in nats) below the maximum are below `f64` resolution of the sum.
const LSE_CUTOFF: f64 = 40.0;

/// Numerically stable `ln Σ exp(t_i)`; `-inf` for an empty slice.
pub fn log_sum_exp<T: Real>(terms: &[T]) -> T {
    let m = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    let floor = T::lit(-LSE_CUTOFF);
    let s = terms.iter().fold(T::zero(), |acc, &t| {
        let d = t - m;
        if d < floor {
            acc
        } else {
            acc + d.exp()
        }
    });
    m + s.ln()
}
