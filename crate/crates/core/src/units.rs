//! Decibel conversions. Everything else in the crate takes linear SNRs.

use crate::real::Real;

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        assert_eq!(db_to_linear(10.0f64), 10.0);
        assert_eq!(db_to_linear(0.0f64), 1.0);
        assert!((db_to_linear(30.0f64) - 1000.0).abs() < 1e-10);
        for db in [-20.0f64, -3.0, 0.5, 7.0, 25.0] {
            assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
        }
    }
}
