//! The unary and binary generators.

use crate::types::UnitValue;

/// `χ_a(x)`: 1 when `x >= a` and `x != 0`, otherwise 0.
///
/// For `a > 0` this is the indicator of `[a,1]`; `χ_0` is the indicator of
/// `]0,1]`.
pub fn chi(a: UnitValue, x: UnitValue) -> UnitValue {
    if chi_raw(a.get(), x.get()) == 1.0 {
        UnitValue::ONE
    } else {
        UnitValue::ZERO
    }
}

/// `Med_b(x, y) = Med(x, y, b)`.
pub fn med_b(b: UnitValue, x: UnitValue, y: UnitValue) -> UnitValue {
    UnitValue::new(med_raw(b.get(), x.get(), y.get())).expect("median of unit values")
}

#[inline]
pub(crate) fn chi_raw(a: f64, x: f64) -> f64 {
    if x >= a && x != 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Middle element of `{x, y, b}`.
#[inline]
pub(crate) fn med_raw(b: f64, x: f64, y: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if b <= lo {
        lo
    } else if b >= hi {
        hi
    } else {
        b
    }
}
