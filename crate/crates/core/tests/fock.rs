use std::collections::HashSet;
use std::sync::Arc;

use akpz::fock::*;
use akpz::lattice::{LatticeSpec, Momentum};
use akpz::Error;
use num_complex::Complex64;

fn spec(n: u32) -> Arc<LatticeSpec> {
    Arc::new(LatticeSpec::new(n).unwrap())
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn symmetrize_examples() {
    let sp = spec(2);
    let (a, b) = (3usize, 7usize);
    let mut g = ChaosKernel::zeros(sp.clone(), 2, Support::General).unwrap();
    g.set(&[a, b], c(1.0));
    let s = g.symmetrize();
    assert_eq!(s.get(&[a, b]), c(0.5));
    assert_eq!(s.get(&[b, a]), c(0.5));
    assert_eq!(s.norm_sqr(), 0.5);
    let r = random_kernel(sp.clone(), 3, Support::General, 4).unwrap();
    assert!(r.symmetry_defect() < 1e-15);
    let raw = ChaosKernel::from_fn(sp, 3, Support::General, |i| c((i[0] * 31 + i[1] * 7 + i[2]) as f64)).unwrap();
    let once = raw.symmetrize();
    let twice = once.symmetrize();
    assert!(once.data().iter().zip(twice.data()).all(|(x, y)| (x - y).norm() < 1e-12));
}

#[test]
fn fock_inner_examples() {
    let sp = spec(3);
    let k = sp.index_of(Momentum::new(1, 2)).unwrap();
    let mut f = ChaosKernel::zeros(sp.clone(), 1, Support::General).unwrap();
    f.set(&[k], c(1.0));
    f.set(&[sp.neg(k)], c(1.0));
    let fv = FockVector::single(f);
    assert_eq!(fock_inner(&fv, &fv).unwrap(), 2.0);
    let g = FockVector::single(random_kernel(sp.clone(), 2, Support::General, 1).unwrap());
    assert_eq!(fock_inner(&fv, &g).unwrap(), 0.0);
    let mut r = FockVector::new(sp.clone());
    for n in 0..4 {
        r.set(random_kernel(sp.clone(), n, Support::General, n as u64).unwrap()).unwrap();
    }
    let z = fock_inner_complex(&r, &r).unwrap();
    assert!(z.re > 0.0 && z.im.abs() < 1e-10 * z.re);
    let other = FockVector::single(random_kernel(spec(2), 1, Support::General, 1).unwrap());
    assert!(matches!(fock_inner(&fv, &other), Err(Error::Config(_))));
}

#[test]
fn zero_sum_storage_agrees_with_general() {
    let sp = spec(3);
    let z = random_kernel(sp.clone(), 3, Support::ZeroSum, 5).unwrap();
    let g = z.to_general().unwrap();
    let mut off = 0.0;
    g.for_each(|idx, v| {
        let s = idx.iter().fold(Momentum::ZERO, |a, &i| a + sp.mode(i));
        if !s.is_zero() {
            off += v.norm();
        }
    });
    assert_eq!(off, 0.0);
    assert!((z.norm_sqr() - g.norm_sqr()).abs() < 1e-12 * g.norm_sqr());
    let w = random_kernel(sp, 3, Support::General, 6).unwrap();
    assert!((z.dot(&w).unwrap() - g.dot(&w).unwrap()).norm() < 1e-10);
    assert!((g.to_zero_sum().unwrap().dot(&z).unwrap() - z.dot(&z).unwrap()).norm() < 1e-10);
}

#[test]
fn malliavin_derivative_examples() {
    let sp = spec(3);
    let k0 = sp.index_of(Momentum::new(1, 1)).unwrap();
    let mut f = ChaosKernel::zeros(sp.clone(), 1, Support::General).unwrap();
    f.set(&[k0], c(1.0));
    assert_eq!(malliavin_derivative(&f, sp.mode(k0)).unwrap().get(&[]), c(1.0));
    assert_eq!(malliavin_derivative(&f, Momentum::new(0, 1)).unwrap().get(&[]), c(0.0));

    let g = random_kernel(sp.clone(), 2, Support::General, 3).unwrap();
    let k = Momentum::new(-2, 1);
    let dk = malliavin_derivative(&g, k).unwrap();
    let dmk = malliavin_derivative(&g, -k).unwrap();
    let ki = sp.index_of(k).unwrap();
    for p in 0..sp.len() {
        assert_eq!(dk.get(&[p]), 2.0 * g.get(&[p, ki]));
        assert!((dmk.get(&[sp.neg(p)]) - dk.get(&[p]).conj()).norm() < 1e-14);
    }
    let scalar = ChaosKernel::scalar(sp, c(1.0));
    assert!(matches!(malliavin_derivative(&scalar, k), Err(Error::Domain(_))));
}

/// Every set of vertex-disjoint edges in `{0..n} × {0..m}`, by subset enumeration.
fn brute_force_pairings(n: usize, m: usize) -> HashSet<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let mut out = HashSet::new();
    for mask in 0u32..(1 << all.len()) {
        let edges: Vec<(usize, usize)> = (0..all.len()).filter(|b| mask >> b & 1 == 1).map(|b| all[b]).collect();
        let ok = edges.iter().enumerate().all(|(a, e)| edges[a + 1..].iter().all(|f| e.0 != f.0 && e.1 != f.1));
        if ok {
            out.insert(edges);
        }
    }
    out
}

#[test]
fn pairing_enumeration_matches_brute_force() {
    for n in 0..=4 {
        for m in 0..=4 {
            let graphs = enumerate_pairings(n, m);
            let mut found = HashSet::new();
            for g in &graphs {
                let mut e = g.edges.clone();
                e.sort();
                assert!(found.insert(e), "duplicate graph for ({n},{m})");
                assert_eq!(g.free_count(), g.free_first().len() + g.free_second().len());
            }
            assert_eq!(found, brute_force_pairings(n, m), "({n},{m})");
            assert_eq!(graphs.len() as u64, pairing_count(n, m));
        }
    }
    assert_eq!(pairing_count(1, 1), 2);
    assert_eq!(pairing_count(2, 2), 7);
    let empty = enumerate_pairings(0, 3);
    assert_eq!(empty.len(), 1);
    assert!(empty[0].edges.is_empty());
}

#[test]
fn wick_product_of_two_first_order_variables() {
    let sp = spec(3);
    let k = sp.index_of(Momentum::new(2, -1)).unwrap();
    let mut f = ChaosKernel::zeros(sp.clone(), 1, Support::General).unwrap();
    f.set(&[k], c(0.5));
    f.set(&[sp.neg(k)], c(0.5));
    let prod = wick_product_pair(&f, &f).unwrap();
    // Scalar part Σ_p f(p)f(−p) = 1/2.
    assert!((prod.component(0).unwrap().get(&[]) - c(0.5)).norm() < 1e-15);
    let two = prod.component(2).unwrap();
    assert!((two.get(&[k, sp.neg(k)]) - c(0.25)).norm() < 1e-15);
    assert!(prod.component(1).is_none());
}

#[test]
fn wick_product_is_exact_pathwise() {
    let sp = spec(3);
    for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3)] {
        let f = random_kernel(sp.clone(), n, Support::General, 10 + n as u64).unwrap();
        let g = random_kernel(sp.clone(), m, Support::General, 20 + m as u64).unwrap();
        let prod = wick_product_pair(&f, &g).unwrap();
        for k in prod.iter() {
            assert!(k.symmetry_defect() < 1e-12);
            assert!(k.reality_defect() < 1e-10);
        }
        if n != m {
            assert!(prod.component(0).is_none());
        } else {
            let s = factorial(n) * f.dot(&g).unwrap();
            assert!((prod.component(0).unwrap().get(&[]) - s).norm() < 1e-10 * s.norm().max(1.0));
        }
        for s in 0..20 {
            let eta = sample_noise(sp.clone(), 1000 + s);
            let lhs = evaluate_chaos(&FockVector::single(f.clone()), &eta).unwrap()
                * evaluate_chaos(&FockVector::single(g.clone()), &eta).unwrap();
            let rhs = evaluate_chaos(&prod, &eta).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "({n},{m}): {lhs} vs {rhs}");
        }
    }
}

#[test]
fn wick_product_mean_matches_monte_carlo() {
    let sp = spec(3);
    let f = FockVector::single(random_kernel(sp.clone(), 2, Support::General, 1).unwrap());
    let g = FockVector::single(random_kernel(sp.clone(), 2, Support::General, 2).unwrap());
    let prod = wick_product_pair(f.component(2).unwrap(), g.component(2).unwrap()).unwrap();
    let expect = prod.component(0).unwrap().get(&[]).re;
    let xs: Vec<f64> = (0..10_000)
        .map(|s| {
            let eta = sample_noise(sp.clone(), s);
            evaluate_chaos(&f, &eta).unwrap() * evaluate_chaos(&g, &eta).unwrap()
        })
        .collect();
    let (m, se) = mean_se(&xs);
    assert!((m - expect).abs() < 5.0 * se, "{m} ± {se} vs {expect}");
}

#[test]
fn noise_statistics() {
    let sp = spec(3);
    let samples = 10_000;
    let k = sp.index_of(Momentum::new(1, -2)).unwrap();
    let mut abs2 = Vec::with_capacity(samples);
    let mut sq_re = Vec::with_capacity(samples);
    let mut sq_im = Vec::with_capacity(samples);
    for s in 0..samples as u64 {
        let eta = sample_noise(sp.clone(), s);
        for i in 0..sp.len() {
            assert_eq!(eta.values[sp.neg(i)], eta.values[i].conj());
        }
        let z = eta.values[k];
        abs2.push(z.norm_sqr());
        let z2 = z * z;
        sq_re.push(z2.re);
        sq_im.push(z2.im);
    }
    let (m, se) = mean_se(&abs2);
    assert!((m - 1.0).abs() < 5.0 * se);
    for xs in [&sq_re, &sq_im] {
        let (m, se) = mean_se(xs);
        assert!(m.abs() < 5.0 * se);
    }
    assert_eq!(sample_noise(sp.clone(), 5).values, sample_noise(sp, 5).values);
}

#[test]
fn noise_is_shared_across_lattices() {
    let small = sample_noise(spec(3), 77);
    let big = sample_noise(spec(6), 77);
    for (i, &k) in small.spec.modes().iter().enumerate() {
        assert_eq!(small.values[i], big.values[big.spec.index_of(k).unwrap()]);
    }
}

#[test]
fn evaluation_examples() {
    let sp = spec(3);
    let eta = sample_noise(sp.clone(), 2);
    let f0 = FockVector::single(ChaosKernel::scalar(sp.clone(), c(2.5)));
    assert_eq!(evaluate_chaos(&f0, &eta).unwrap(), 2.5);

    let k = sp.index_of(Momentum::new(0, 2)).unwrap();
    let mut f2 = ChaosKernel::zeros(sp.clone(), 2, Support::General).unwrap();
    f2.set(&[k, sp.neg(k)], c(0.5));
    f2.set(&[sp.neg(k), k], c(0.5));
    let expect = eta.values[k].norm_sqr() - 1.0;
    let v = evaluate_chaos(&FockVector::single(f2.clone()), &eta).unwrap();
    assert!((v - expect).abs() < 1e-14);
    let v0 = evaluate_chaos(&FockVector::single(f2.to_zero_sum().unwrap()), &eta).unwrap();
    assert!((v0 - expect).abs() < 1e-14);

    let big = FockVector::single(ChaosKernel::zeros(spec(1), 5, Support::General).unwrap());
    assert!(matches!(evaluate_chaos(&big, &sample_noise(spec(1), 0)), Err(Error::Unsupported(_))));
}

#[test]
fn dense_and_monomial_evaluation_agree() {
    let sp = spec(2);
    let eta = sample_noise(sp.clone(), 8);
    for n in 1..=4 {
        let f = random_kernel(sp.clone(), n, Support::General, n as u64).unwrap();
        let mut direct = c(0.0);
        f.for_each(|idx, v| direct += v * wick_monomial(&sp, &eta.values, idx));
        assert!((evaluate_kernel(&f, &eta.values) - direct).norm() < 1e-9 * direct.norm().max(1.0));
    }
}

#[test]
fn ito_isometry_by_monte_carlo() {
    let sp = spec(4);
    let mut f = FockVector::new(sp.clone());
    for n in 1..=3 {
        let mut k = random_kernel(sp.clone(), n, Support::General, 40 + n as u64).unwrap();
        k.scale(1.0 / (factorial(n) * k.norm_sqr()).sqrt());
        f.set(k).unwrap();
    }
    let xs: Vec<f64> = (0..10_000).map(|s| evaluate_chaos(&f, &sample_noise(sp.clone(), s)).unwrap().powi(2)).collect();
    let (m, se) = mean_se(&xs);
    let norm = fock_inner(&f, &f).unwrap();
    assert!((m - norm).abs() < 5.0 * se, "{m} ± {se} vs {norm}");
}

#[test]
fn number_operator_scales_by_order() {
    let sp = spec(2);
    let mut f = FockVector::new(sp.clone());
    for n in 0..=3 {
        f.set(random_kernel(sp.clone(), n, Support::General, n as u64).unwrap()).unwrap();
    }
    let nf = apply_number_operator(&f);
    for n in 0..=3 {
        let a = f.component(n).unwrap();
        let b = nf.component(n).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert_eq!(*y, *x * n as f64);
        }
    }
}

#[test]
fn energy_density_matches_derivative_kernels() {
    let sp = spec(3);
    let mut f = FockVector::new(sp.clone());
    f.set(random_kernel(sp.clone(), 1, Support::General, 1).unwrap()).unwrap();
    f.set(random_kernel(sp.clone(), 2, Support::General, 2).unwrap()).unwrap();
    f.set(random_kernel(sp.clone(), 3, Support::ZeroSum, 3).unwrap()).unwrap();
    let eta = sample_noise(sp.clone(), 9);
    let mut oracle = 0.0;
    for (i, &k) in sp.modes().iter().enumerate() {
        let mut d = FockVector::new(sp.clone());
        for comp in f.iter() {
            d.add(malliavin_derivative(comp, k).unwrap()).unwrap();
        }
        let dk: Complex64 = d.iter().map(|c| evaluate_kernel(c, &eta.values)).sum();
        oracle += sp.norm2(i) * dk.norm_sqr();
    }
    let fast = energy_density(&f, &eta.values);
    assert!((fast - oracle).abs() < 1e-10 * oracle);
}

#[test]
fn kernel_csv_lists_nonzero_entries() {
    let sp = spec(2);
    let mut f = ChaosKernel::zeros(sp.clone(), 2, Support::General).unwrap();
    let a = sp.index_of(Momentum::new(1, 0)).unwrap();
    let b = sp.index_of(Momentum::new(0, -1)).unwrap();
    f.set(&[a, b], Complex64::new(1.5, -0.5));
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k1_1,k1_2,k2_1,k2_2,re,im");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,0,0,-1,"));
}
