use kdv5lab::cutoffs::CutoffSpec;
use kdv5lab::spectral::{
    band_limited_random, derivative, integrate, weighted_integral, Field, Grid, WeightFunction,
};
use proptest::prelude::*;

fn spectral_energy(u: &Field) -> f64 {
    u.grid().length() * u.spectrum().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(seed in any::<u64>(), kmax in 1usize..=40, length in 1.0f64..50.0) {
        let g = Grid::new(length, 128).unwrap();
        let u = band_limited_random(&g, kmax, seed, 1.0).unwrap();
        let direct = integrate(&u.mul(&u));
        let spectral = spectral_energy(&u);
        prop_assert!((direct - spectral).abs() <= 1e-12 * spectral);
    }

    #[test]
    fn integration_by_parts(s1 in any::<u64>(), s2 in any::<u64>(), kmax in 1usize..=42) {
        let g = Grid::new(17.0, 128).unwrap();
        let u = band_limited_random(&g, kmax, s1, 1.0).unwrap();
        let v = band_limited_random(&g, kmax, s2, 1.0).unwrap();
        let ux = derivative(&u, 1);
        let vx = derivative(&v, 1);
        let lhs = integrate(&ux.mul(&v));
        let rhs = -integrate(&u.mul(&vx));
        let scale = integrate(&ux.mul(&ux)).sqrt() * integrate(&v.mul(&v)).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn weighted_energy_is_monotone(seed in any::<u64>(), shrink in 0.0f64..1.0, shift in -16.0f64..0.5) {
        let g = Grid::new(20.0, 128).unwrap();
        let v = band_limited_random(&g, 20, seed, 1.0).unwrap();
        let u = v.scale(shrink);
        let w = WeightFunction::cutoff(CutoffSpec::plain(1.0, 1.0).unwrap());
        let eu = weighted_integral(&u.mul(&u), &w, shift).unwrap();
        let ev = weighted_integral(&v.mul(&v), &w, shift).unwrap();
        prop_assert!(eu <= ev + 1e-14);
    }
}
