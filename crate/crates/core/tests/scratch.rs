// temporary tuning probe; deleted before delivery
use noncoll::extremes::*;
use noncoll::kernels::*;
use noncoll::mc_oracle::*;
use noncoll::Tolerance;

const TOL: Tolerance<f64> = Tolerance(1e-12);

fn quantile_grid(f: &dyn Fn(f64) -> f64, lo0: f64, hi0: f64, count: usize) -> Vec<f64> {
    // bisect for F = 0.03 and 0.97, then linear grid
    let solve = |target: f64| {
        let (mut lo, mut hi) = (lo0, hi0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let a = solve(0.03);
    let b = solve(0.97);
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

fn run_cell(
    label: &str,
    kind: &ProcessKind<f64>,
    n: usize,
    eps: Option<f64>,
    steps: usize,
    samples: usize,
    stat: Statistic,
    analytic: &dyn Fn(f64) -> f64,
    lo0: f64,
    hi0: f64,
) {
    let t0 = std::time::Instant::now();
    let grid = quantile_grid(analytic, lo0, hi0, 20);
    let t_grid = t0.elapsed().as_secs_f64();
    let cfg = McConfig {
        steps,
        target_accepted: samples,
        seed: 2024,
        epsilon: eps,
    };
    let ens = match sample_ensemble(kind, n, 1.0, &cfg) {
        Ok(e) => e,
        Err(e) => {
            println!("{label}: FAILED {e}");
            return;
        }
    };
    let t_mc = t0.elapsed().as_secs_f64() - t_grid;
    let cdf = empirical_cdf(&ens, stat, &grid).unwrap();
    let mut inside = 0;
    let mut worst = 0.0f64;
    for (i, &g) in grid.iter().enumerate() {
        let a = analytic(g);
        let d = (a - cdf.estimates[i]).abs();
        if d <= cdf.half_widths[i] {
            inside += 1;
        }
        worst = worst.max(d / cdf.half_widths[i].max(1e-9));
    }
    println!(
        "{label}: grid=[{:.2},{:.2}] acc={:.2e} inside={}/20 worst={:.2} t_grid={:.1}s t_mc={:.1}s",
        grid[0],
        grid[19],
        ens.acceptance_rate(),
        inside,
        worst,
        t_grid,
        t_mc,
    );
}

#[test]
fn probe_general_cells() {
    let t = 1.0;
    let samples = 20000;

    // bridge n2, eps 0.25 centered
    {
        let eps = 0.25;
        let start = OrderedConfiguration::type_a(vec![-eps / 2.0, eps / 2.0]).unwrap();
        let kind = ProcessKind::BridgeBetween {
            start: start.clone(),
            end: start,
        };
        let k2 = kind.clone();
        let analytic = move |r: f64| {
            let geom = IntervalGeometry::new(-9.0, r, t).unwrap();
            cdf_general(&k2, &geom, 2, TOL).unwrap().value
        };
        run_cell("bridge n2 e.25", &kind, 2, Some(eps), 128, samples,
                 Statistic::R, &analytic, 0.2, 4.0);
    }
    // bridge n3, eps 0.45 centered
    {
        let eps = 0.45;
        let start = OrderedConfiguration::type_a(vec![-eps, 0.0, eps]).unwrap();
        let kind = ProcessKind::BridgeBetween {
            start: start.clone(),
            end: start,
        };
        let k2 = kind.clone();
        let analytic = move |r: f64| {
            let geom = IntervalGeometry::new(-9.0, r, t).unwrap();
            cdf_general(&k2, &geom, 3, TOL).unwrap().value
        };
        run_cell("bridge n3 e.45", &kind, 3, Some(eps), 128, samples,
                 Statistic::R, &analytic, 0.5, 4.5);
    }
    // motion n2 vs LIMIT, eps=0.01
    {
        let analytic = move |r: f64| cdf_motion_joint_lr(2, t, 9.0, r, TOL).unwrap().value;
        run_cell("motion n2 LIMIT e.01", &ProcessKind::Motion, 2, Some(0.01), 128,
                 samples, Statistic::R, &analytic, 0.3, 5.0);
    }
    // motion n3 general, eps 0.2 centered
    {
        let eps = 0.2;
        let start = OrderedConfiguration::type_a(vec![-eps, 0.0, eps]).unwrap();
        let kind = ProcessKind::MotionFrom { start: start.clone() };
        let k2 = kind.clone();
        let analytic = move |r: f64| {
            let geom = IntervalGeometry::new(-9.0, r, t).unwrap();
            cdf_general(&k2, &geom, 3, TOL).unwrap().value
        };
        run_cell("motion n3 e.20", &kind, 3, Some(eps), 128, samples,
                 Statistic::R, &analytic, 0.5, 5.5);
    }
    // bessel n2, eps 0.4 walled
    {
        let eps = 0.4;
        let start = OrderedConfiguration::type_c(vec![eps, 2.0 * eps]).unwrap();
        let kind = ProcessKind::BesselBetween {
            start: start.clone(),
            end: start,
        };
        let k2 = kind.clone();
        let analytic = move |h: f64| {
            let geom = IntervalGeometry::new(0.0, h, t).unwrap();
            cdf_general(&k2, &geom, 2, TOL).unwrap().value
        };
        run_cell("bessel n2 e.40", &kind, 2, Some(eps), 128, samples,
                 Statistic::H, &analytic, 0.85, 4.5);
    }
    // bessel n3, eps 0.6 walled
    {
        let eps = 0.6;
        let start = OrderedConfiguration::type_c(vec![eps, 2.0 * eps, 3.0 * eps]).unwrap();
        let kind = ProcessKind::BesselBetween {
            start: start.clone(),
            end: start,
        };
        let k2 = kind.clone();
        let analytic = move |h: f64| {
            let geom = IntervalGeometry::new(0.0, h, t).unwrap();
            cdf_general(&k2, &geom, 3, TOL).unwrap().value
        };
        run_cell("bessel n3 e.60", &kind, 3, Some(eps), 128, samples,
                 Statistic::H, &analytic, 1.85, 6.0);
    }
    // meander n2, eps 0.3 walled
    {
        let eps = 0.3;
        let start = OrderedConfiguration::type_c(vec![eps, 2.0 * eps]).unwrap();
        let kind = ProcessKind::MeanderFrom { start: start.clone() };
        let k2 = kind.clone();
        let analytic = move |h: f64| {
            let geom = IntervalGeometry::new(0.0, h, t).unwrap();
            cdf_general(&k2, &geom, 2, TOL).unwrap().value
        };
        run_cell("meander n2 e.30", &kind, 2, Some(eps), 128, samples,
                 Statistic::H, &analytic, 0.65, 6.0);
    }
    // meander n3, eps 0.6 walled
    {
        let eps = 0.6;
        let start = OrderedConfiguration::type_c(vec![eps, 2.0 * eps, 3.0 * eps]).unwrap();
        let kind = ProcessKind::MeanderFrom { start: start.clone() };
        let k2 = kind.clone();
        let analytic = move |h: f64| {
            let geom = IntervalGeometry::new(0.0, h, t).unwrap();
            cdf_general(&k2, &geom, 3, TOL).unwrap().value
        };
        run_cell("meander n3 e.60", &kind, 3, Some(eps), 128, samples,
                 Statistic::H, &analytic, 1.85, 7.5);
    }
}
