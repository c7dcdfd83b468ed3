use nalgebra::DMatrix;
use num_complex::Complex64;
pub fn bench(n: usize) -> f64 {
    let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| Complex64::new(((i * 7 + j * 3) % 11) as f64 + (i+j) as f64 * 0.01, if i > j { 0.3 } else if i < j { -0.3 } else { 0.0 }));
    let e = m.symmetric_eigen();
    e.eigenvalues[0]
}
