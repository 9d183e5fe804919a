use adapted_ot::gaussian::{stream_id, Component, GaussianMixture, SeededSampler};

fn comp(w: f64, center: &[f64], scale: f64) -> Component {
    Component {
        w,
        center: center.to_vec(),
        scale,
    }
}

fn two_bumps() -> GaussianMixture {
    GaussianMixture::new(1, 2, vec![comp(0.3, &[-1.0, -0.5], 0.4), comp(0.7, &[1.0, 2.0], 0.6)]).unwrap()
}

#[test]
fn single_gaussian_moments() {
    let (n, s) = (100_000, 0.7);
    let g = GaussianMixture::new(2, 1, vec![comp(1.0, &[1.5, -2.0], s)]).unwrap();
    let x = g.sample(&mut SeededSampler::new(7, 0), n).unwrap();
    for (k, c) in [1.5, -2.0].into_iter().enumerate() {
        let vals: Vec<f64> = x.iter().map(|p| p[k]).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - c).abs() < 5.0 * s / (n as f64).sqrt(), "mean {mean}");
        assert!((var / (s * s) - 1.0).abs() < 0.1, "var {var}");
    }
}

#[test]
fn mixture_frequencies_and_mean() {
    let n = 50_000;
    let g = GaussianMixture::new(1, 1, vec![comp(0.3, &[-5.0], 0.5), comp(0.7, &[5.0], 0.5)]).unwrap();
    let x = g.sample(&mut SeededSampler::new(11, 0), n).unwrap();
    let left = x.iter().filter(|p| p[0] < 0.0).count() as f64;
    let band = 5.0 * (n as f64 * 0.3 * 0.7).sqrt();
    assert!((left - 0.3 * n as f64).abs() < band, "{left}");
    let mean = x.iter().map(|p| p[0]).sum::<f64>() / n as f64;
    // standard deviation of the mixture is sqrt(0.25 + 0.3 * 0.7 * 100)
    let sd = (0.25f64 + 21.0).sqrt();
    assert!((mean - g.mean()[0]).abs() < 5.0 * sd / (n as f64).sqrt(), "{mean}");
}

#[test]
fn conditional_density_integrates_to_one() {
    let g = two_bumps();
    for sigma in [0.05, 0.3] {
        for prefix in [-2.0, 0.0, 0.7, 3.0] {
            let (lo, hi, steps) = (-12.0, 14.0, 26_000);
            let h = (hi - lo) / steps as f64;
            let f = |k: usize| g.smoothed_conditional_density(sigma, &[prefix], &[lo + k as f64 * h]).unwrap();
            let inner: f64 = (1..steps).map(f).sum();
            let total = h * (inner + 0.5 * (f(0) + f(steps)));
            assert!((total - 1.0).abs() < 1e-6, "sigma {sigma} prefix {prefix}: {total}");
        }
    }
}

#[test]
fn lipschitz_estimate() {
    let probes = |k: usize| (0..k).map(|i| vec![-2.0 + 4.0 * i as f64 / (k - 1) as f64]).collect::<Vec<_>>();
    let single = GaussianMixture::new(1, 2, vec![comp(1.0, &[0.5, 1.0], 0.5)]).unwrap();
    assert!(single.lipschitz_kernel_estimate(0.2, &probes(9)).unwrap() < 1e-9);
    let g = two_bumps();
    // secants on a grid of spacing 1/8 already resolve the steepest posterior transition
    let coarse = g.lipschitz_kernel_estimate(0.2, &probes(33)).unwrap();
    let fine = g.lipschitz_kernel_estimate(0.2, &probes(65)).unwrap();
    assert!(coarse > 0.0);
    assert!((fine / coarse - 1.0).abs() < 0.1, "{coarse} {fine}");
}

#[test]
fn sampling_is_deterministic() {
    let g = two_bumps();
    let a = g.sample(&mut SeededSampler::new(5, stream_id(&[1, 2, 3])), 100).unwrap();
    let b = g.sample(&mut SeededSampler::new(5, stream_id(&[1, 2, 3])), 100).unwrap();
    let c = g.sample(&mut SeededSampler::new(5, stream_id(&[1, 2, 4])), 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

/// Two-sample energy statistic `2 int (F - G)^2` over a pool sorted once;
/// `labels[k]` says which sample the `k`-th smallest value belongs to.
fn energy_sorted(pool: &[f64], labels: &[bool], n: usize, m: usize) -> f64 {
    let (mut f, mut g, mut total) = (0.0, 0.0, 0.0);
    for k in 0..pool.len() - 1 {
        if labels[k] {
            f += 1.0 / n as f64;
        } else {
            g += 1.0 / m as f64;
        }
        total += (f - g) * (f - g) * (pool[k + 1] - pool[k]);
    }
    2.0 * total
}

#[test]
fn smoothing_matches_direct_sampling_in_law() {
    let n = 10_000;
    let sigma = 0.8;
    let g = GaussianMixture::new(1, 1, vec![comp(0.4, &[-1.0], 0.3), comp(0.6, &[1.5], 0.5)]).unwrap();
    let base = SeededSampler::new(2024, 0);
    let mut noisy: Vec<f64> = g.sample(&mut base.substream(1), n).unwrap().iter().map(|p| p[0]).collect();
    let mut eps = base.substream(2);
    for x in noisy.iter_mut() {
        *x += sigma * eps.normal();
    }
    let direct: Vec<f64> = g
        .smoothed(sigma)
        .unwrap()
        .sample(&mut base.substream(3), n)
        .unwrap()
        .iter()
        .map(|p| p[0])
        .collect();

    let mut pool: Vec<(f64, bool)> = noisy.iter().map(|&v| (v, true)).chain(direct.iter().map(|&v| (v, false))).collect();
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<f64> = pool.iter().map(|p| p.0).collect();
    let mut labels: Vec<bool> = pool.iter().map(|p| p.1).collect();
    let observed = energy_sorted(&values, &labels, n, n);

    let mut perm = base.substream(4);
    let mut null = Vec::with_capacity(99);
    for _ in 0..99 {
        for k in (1..labels.len()).rev() {
            labels.swap(k, perm.index(k + 1));
        }
        null.push(energy_sorted(&values, &labels, n, n));
    }
    null.sort_by(f64::total_cmp);
    // 99th percentile of 99 permutation draws
    let cutoff = null[97];
    assert!(observed < cutoff, "observed {observed}, cutoff {cutoff}");
}
