use crate::error::{Error, Result};

/// Scalar modes for [`crate::linop::LinOp`].
///
/// Exact mode is `i64` with overflow-checked arithmetic: every operator in
/// the construction has integer entries in the canonical word basis, so
/// algebraic identities are decided without tolerances. Float mode is plain
/// `f64` and is used for norm estimation and for search candidates with real
/// coefficients.
pub trait Scalar: Copy + PartialEq + PartialOrd + std::fmt::Debug + Send + Sync + 'static {
    const ZERO: Self;
    const ONE: Self;
    /// True for the exact integer mode.
    const EXACT: bool;

    fn add_checked(self, rhs: Self) -> Result<Self>;
    fn mul_checked(self, rhs: Self) -> Result<Self>;
    fn neg_checked(self) -> Result<Self>;
    fn is_zero(self) -> bool;
    fn to_f64(self) -> f64;
}

impl Scalar for i64 {
    const ZERO: Self = 0;
    const ONE: Self = 1;
    const EXACT: bool = true;

    #[inline]
    fn add_checked(self, rhs: Self) -> Result<Self> {
        self.checked_add(rhs).ok_or(Error::Overflow)
    }

    #[inline]
    fn mul_checked(self, rhs: Self) -> Result<Self> {
        self.checked_mul(rhs).ok_or(Error::Overflow)
    }

    #[inline]
    fn neg_checked(self) -> Result<Self> {
        self.checked_neg().ok_or(Error::Overflow)
    }

    #[inline]
    fn is_zero(self) -> bool {
        self == 0
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    const EXACT: bool = false;

    #[inline]
    fn add_checked(self, rhs: Self) -> Result<Self> {
        Ok(self + rhs)
    }

    #[inline]
    fn mul_checked(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs)
    }

    #[inline]
    fn neg_checked(self) -> Result<Self> {
        Ok(-self)
    }

    #[inline]
    fn is_zero(self) -> bool {
        self == 0.0
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
