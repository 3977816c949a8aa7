//! Fixed inputs shared by the benchmarks.

use hyplat::IntMatrix;

pub fn first_example() -> IntMatrix {
    IntMatrix::from_i64_rows(&[&[-1, -3, -1], &[-3, 14, 8], &[-1, 8, 11]])
}

pub fn watson_example() -> IntMatrix {
    IntMatrix::from_i64_rows(&[&[17, -17, 20, -9], &[-17, -25, 15, -6], &[20, 15, 4, -2], &[-9, -6, -2, 1]])
}

/// `diag(-1, 1, ..., 1)`
pub fn standard_form(n: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    m[(0, 0)] = (-1).into();
    m
}

/// A deterministic nonsingular integer matrix with entries in `[-9, 9]`.
pub fn scrambled(n: usize) -> IntMatrix {
    let data: Vec<i64> = (0..n * n).map(|k| ((k * 7 + 3) * (k + 11) % 19) as i64 - 9).collect();
    IntMatrix::from_i64(n, n, &data)
}
