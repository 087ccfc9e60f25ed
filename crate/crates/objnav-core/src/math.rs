//! Float math shims so the crate builds without `std` (via `libm`).

#[cfg(feature = "std")]
macro_rules! shim {
    ($name:ident, $($arg:ident),+) => {
        #[inline]
        pub(crate) fn $name($($arg: f64),+) -> f64 {
            shim!(@call $name, $($arg),+)
        }
    };
    (@call $name:ident, $a:ident) => { $a.$name() };
    (@call $name:ident, $a:ident, $b:ident) => { $a.$name($b) };
}

#[cfg(not(feature = "std"))]
macro_rules! shim {
    ($name:ident, $($arg:ident),+) => {
        #[inline]
        pub(crate) fn $name($($arg: f64),+) -> f64 {
            libm::$name($($arg),+)
        }
    };
}

shim!(exp, x);
shim!(cos, x);
shim!(sin, x);
shim!(sqrt, x);
shim!(floor, x);
shim!(round, x);
shim!(atan2, y, x);
shim!(hypot, x, y);

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

/// Normalize an angle in degrees into `[0, 360)`.
pub(crate) fn normalize_deg(a: f64) -> f64 {
    let r = a - 360.0 * floor(a / 360.0);
    // floor rounding can leave exactly 360.0 for tiny negative inputs
    if r >= 360.0 {
        r - 360.0
    } else {
        r
    }
}

/// Signed angular difference `to - from` in degrees, in `(-180, 180]`.
pub(crate) fn angle_delta_deg(from: f64, to: f64) -> f64 {
    let d = normalize_deg(to - from);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_wraps_both_directions() {
        assert_eq!(normalize_deg(0.0), 0.0);
        assert_eq!(normalize_deg(360.0), 0.0);
        assert_eq!(normalize_deg(-30.0), 330.0);
        assert_eq!(normalize_deg(390.0), 30.0);
        assert_eq!(normalize_deg(-360.0), 0.0);
    }

    #[test]
    fn angle_delta_signed_range() {
        assert_eq!(angle_delta_deg(0.0, 30.0), 30.0);
        assert_eq!(angle_delta_deg(30.0, 0.0), -30.0);
        assert_eq!(angle_delta_deg(0.0, 180.0), 180.0);
        assert_eq!(angle_delta_deg(0.0, 181.0), -179.0);
        assert_eq!(angle_delta_deg(350.0, 10.0), 20.0);
    }
}
