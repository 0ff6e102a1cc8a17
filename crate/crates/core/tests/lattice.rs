use std::f64::consts::PI;

use akpz::lattice::*;
use akpz::Error;

fn m(k1: i32, k2: i32) -> Momentum {
    Momentum::new(k1, k2)
}

#[test]
fn kernel_examples() {
    let spec = LatticeSpec::new(4).unwrap();
    assert_eq!(kernel_k(&spec, m(1, 0), m(0, 1)).unwrap(), 0.0);
    assert!((kernel_k(&spec, m(0, 1), m(0, 1)).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((kernel_k(&spec, m(1, 0), m(1, 0)).unwrap() + 1.0 / (2.0 * PI)).abs() < 1e-15);
    // The sum leaves the disk.
    assert_eq!(kernel_k(&spec, m(4, 0), m(1, 0)).unwrap(), 0.0);
    // A factor outside the disk.
    assert_eq!(kernel_k(&spec, m(5, 0), m(-1, 0)).unwrap(), 0.0);
    assert!(matches!(kernel_k(&spec, Momentum::ZERO, m(1, 0)), Err(Error::Domain(_))));
}

#[test]
fn kernel_symmetry_and_bound() {
    let spec = LatticeSpec::new(6).unwrap();
    let mut pair_sum = 0.0;
    for &x in spec.modes() {
        pair_sum += kernel_k(&spec, x, -x).unwrap();
        for &y in spec.modes() {
            let k = kernel_k(&spec, x, y).unwrap();
            assert_eq!(k, kernel_k(&spec, y, x).unwrap());
            assert!(k.abs() <= 1.0 / (2.0 * PI) + 1e-15);
            // Reflection through the diagonal swaps the two components and flips the sign.
            let (xr, yr) = (m(x.k2, x.k1), m(y.k2, y.k1));
            assert!((kernel_k(&spec, xr, yr).unwrap() + k).abs() < 1e-15);
        }
    }
    assert!(pair_sum.abs() < 1e-12, "{pair_sum}");
}

#[test]
fn kernel_idx_agrees_with_momentum_form() {
    let spec = LatticeSpec::new(3).unwrap();
    for i in 0..spec.len() {
        for j in 0..spec.len() {
            assert_eq!(spec.kernel_idx(i, j), kernel_k(&spec, spec.mode(i), spec.mode(j)).unwrap());
        }
    }
}

#[test]
fn profile_examples() {
    let v = ln_profile(100, 1.0, 1.0).unwrap();
    assert!((v - 10001f64.ln() / 10000f64.ln()).abs() < 1e-14);
    assert!(matches!(ln_profile(100, 1.0, 0.49), Err(Error::Domain(_))));
    assert!(matches!(ln_profile(1, 1.0, 1.0), Err(Error::Domain(_))));
    let mut prev = f64::INFINITY;
    for i in 0..200 {
        let x = 0.5 + 0.37 * i as f64;
        let v = ln_profile(64, 2.0, x).unwrap();
        assert!(v < prev && v > 0.0);
        prev = v;
    }
    // At x = 1 the profile tends to c as N grows.
    let gaps: Vec<f64> = [16, 256, 4096].iter().map(|&n| ln_profile(n, 1.0, 1.0).unwrap() - 1.0).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] > 0.0);
}

#[test]
fn coupling_examples() {
    let c = coupling_of(PI.sqrt(), 10).unwrap();
    assert!((c.c_const - 1.0).abs() < 1e-15);
    assert!((c.nu_eff - 3f64.sqrt()).abs() < 1e-15);
    assert!((c.lambda_n - PI.sqrt() / 10f64.ln().sqrt()).abs() < 1e-15);
    assert!((c.profile(1.0).unwrap() - ln_profile(10, 1.0, 1.0).unwrap()).abs() < 1e-15);
    assert!(matches!(coupling_of(1.0, 1), Err(Error::Domain(_))));
    assert!(matches!(coupling_of(-1.0, 8), Err(Error::Domain(_))));
    assert!(matches!(coupling_of(f64::NAN, 8), Err(Error::Domain(_))));
    let zero = coupling_of(0.0, 8).unwrap();
    assert_eq!(zero.lambda_n, 0.0);
    assert_eq!(zero.nu_eff, 1.0);
}

#[test]
fn half_lattice_bookkeeping() {
    for n in [1, 2, 5, 9] {
        let spec = LatticeSpec::new(n).unwrap();
        let count = (-(n as i32)..=n as i32)
            .flat_map(|a| (-(n as i32)..=n as i32).map(move |b| m(a, b)))
            .filter(|k| !k.is_zero() && k.norm2() <= (n * n) as i64)
            .count();
        assert_eq!(spec.len(), count);
        assert_eq!(2 * spec.half_lattice().len(), spec.len());
        let mut covered = vec![0u8; spec.len()];
        for &i in spec.half_lattice() {
            covered[i] += 1;
            covered[spec.neg(i)] += 1;
        }
        assert!(covered.iter().all(|&c| c == 1));
        for i in 0..spec.len() {
            assert_eq!(spec.index_of(spec.mode(i)), Some(i));
            assert_eq!(spec.norm2(i), spec.mode(i).norm2() as f64);
        }
        assert_eq!(spec.index_of(Momentum::ZERO), None);
        assert_eq!(spec.index_of(m(n as i32 + 1, 0)), None);
    }
    assert!(matches!(LatticeSpec::new(0), Err(Error::Domain(_))));
}
