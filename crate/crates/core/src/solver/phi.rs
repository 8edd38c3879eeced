//! `φ_l(z) = Σ_{n≥0} zⁿ/(n+l)!`, i.e. `φ1 = (e^z−1)/z`,
//! `φ2 = (e^z−1−z)/z²`, `φ3 = (e^z−1−z−z²/2)/z³`.

use num_complex::Complex64;

/// Below this `|z|` the Taylor series replaces the closed forms.
pub const SERIES_THRESHOLD: f64 = 0.5;
/// Terms of the Taylor series; the truncation error is below `0.5²⁰/20!`.
pub const SERIES_TERMS: usize = 20;

/// `(φ1(z), φ2(z), φ3(z))`.
pub fn phi123(z: Complex64) -> (Complex64, Complex64, Complex64) {
    if z.norm() < SERIES_THRESHOLD {
        (series(z, 1), series(z, 2), series(z, 3))
    } else {
        let e = z.exp();
        let one = Complex64::new(1.0, 0.0);
        let p1 = (e - one) / z;
        let p2 = (e - one - z) / (z * z);
        let p3 = (e - one - z - 0.5 * z * z) / (z * z * z);
        (p1, p2, p3)
    }
}

pub fn phi1(z: Complex64) -> Complex64 {
    phi123(z).0
}

fn series(z: Complex64, l: usize) -> Complex64 {
    // Horner on Σ zⁿ / (n+l)!
    let mut acc = Complex64::new(0.0, 0.0);
    for n in (0..SERIES_TERMS).rev() {
        acc = acc * z / (n + l + 1) as f64 + 1.0;
    }
    let lf: f64 = (1..=l).map(|i| i as f64).product();
    acc / lf
}
