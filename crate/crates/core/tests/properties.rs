mod common;

use common::*;
use ffkm::detect::{
    detect_mfo_oi, detect_mfo_pd, detect_ofm_radius, detect_ofm_sd, detect_ofm_td, pair_distances,
    radius_scores, removal_objectives, sd_scores, td_scores,
};
use ffkm::eval::{centroid_index, sse};
use ffkm::ffkm::{fission_fusion, merge_centers, split_center, FfkmConfig, SplitMethod};
use ffkm::init::{init_kmeanspp, init_random};
use ffkm::kmeans::{assign, lloyd, objective, update_centers, LloydParams, LocalSolution};
use ffkm::synth::{gen_ball_mixture, separation_stats, BallMixture};
use ffkm::{CenterSet, Dataset, MfoDetector, OfmDetector};
use proptest::prelude::*;

fn instance(seed: u64, n: usize, d: usize, k: usize) -> (Dataset, CenterSet) {
    let mut r = rng(seed);
    let data = Dataset::from_rows(&random_rows(&mut r, n, d, 10.0)).unwrap();
    let centers = CenterSet::from_rows(&random_rows(&mut r, k, d, 10.0)).unwrap();
    (data, centers)
}

/// Small blobbed instance whose Lloyd fixed point has no empty cluster.
fn clustered(seed: u64, k: usize, per: usize, d: usize) -> (Dataset, LocalSolution) {
    let mut r = rng(seed);
    let means = random_rows(&mut r, k, d, 50.0);
    let mut rows = Vec::new();
    for m in &means {
        for p in random_rows(&mut r, per, d, 3.0) {
            rows.push(p.iter().zip(m).map(|(a, b)| a + b).collect());
        }
    }
    let data = Dataset::from_rows(&rows).unwrap();
    let init = init_random(&data, k, seed).unwrap();
    let sol = lloyd(&data, &init, &LloydParams::default()).unwrap();
    (data, sol)
}

/// `true` when the extreme of `scores` is separated from the runner-up by
/// more than `tol` relative, so a selection is numerically well defined.
fn clear_winner(scores: &[f64], want_max: bool, tol: f64) -> bool {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    if s.len() < 2 {
        return true;
    }
    let (a, b) = if want_max {
        (s[s.len() - 1], s[s.len() - 2])
    } else {
        (s[0], s[1])
    };
    (a - b).abs() > tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn objective_matches_naive_double_loop(seed: u64, n in 1usize..40, d in 1usize..5, k in 1usize..6) {
        let (data, centers) = instance(seed, n, d, k);
        let fast = objective(&data, &centers).unwrap();
        let slow = naive_objective(&rows_of(&data), &center_rows(&centers));
        prop_assert!(rel_close(fast, slow, 1e-12), "{fast} vs {slow}");
    }

    #[test]
    fn assignment_is_brute_force_partition(seed: u64, n in 1usize..60, d in 1usize..4, k in 1usize..6) {
        // Integer coordinates make exact ties common.
        let mut r = rng(seed);
        let rows: Vec<Vec<f64>> = random_rows(&mut r, n, d, 3.0).into_iter()
            .map(|p| p.into_iter().map(f64::round).collect()).collect();
        let cents: Vec<Vec<f64>> = random_rows(&mut r, k, d, 3.0).into_iter()
            .map(|p| p.into_iter().map(f64::round).collect()).collect();
        let data = Dataset::from_rows(&rows).unwrap();
        let centers = CenterSet::from_rows(&cents).unwrap();
        let asg = assign(&data, &centers).unwrap();
        prop_assert_eq!(&asg.labels, &brute_labels(&rows, &cents));
        let mut seen = vec![0usize; n];
        for (i, members) in asg.clusters.iter().enumerate() {
            for &t in members {
                seen[t] += 1;
                prop_assert_eq!(asg.labels[t], i);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn update_centers_are_means_or_kept(seed: u64, n in 1usize..30, k in 1usize..6) {
        let (data, centers) = instance(seed, n, 2, k);
        let asg = assign(&data, &centers).unwrap();
        let next = update_centers(&data, &asg, &centers).unwrap();
        for i in 0..k {
            if asg.clusters[i].is_empty() {
                prop_assert_eq!(next.center(i), centers.center(i));
            } else {
                for a in 0..2 {
                    let m = asg.clusters[i].iter().map(|&t| data.point(t)[a]).sum::<f64>()
                        / asg.clusters[i].len() as f64;
                    prop_assert!((next.center(i)[a] - m).abs() <= 1e-12 * m.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn objective_equivariance(seed: u64, n in 1usize..30, d in 1usize..4, k in 1usize..5,
                              s in 0.01f64..100.0, shift in -1e3f64..1e3) {
        let (data, centers) = instance(seed, n, d, k);
        let g = objective(&data, &centers).unwrap();
        let v = vec![shift; d];
        let moved = objective(&data.transformed(1.0, &v).unwrap(), &centers.transformed(1.0, &v).unwrap()).unwrap();
        prop_assert!(rel_close(moved, g, 1e-9), "{moved} vs {g}");
        let zero = vec![0.0; d];
        let scaled = objective(&data.transformed(s, &zero).unwrap(), &centers.transformed(s, &zero).unwrap()).unwrap();
        prop_assert!(rel_close(scaled, s * s * g, 1e-9));
    }

    #[test]
    fn lloyd_fixed_point_dominated_by_exhaustive_optimum(seed: u64, n in 1usize..=12, k in 1usize..=3) {
        let k = k.min(n);
        let mut r = rng(seed);
        let xs: Vec<f64> = random_rows(&mut r, n, 1, 10.0).into_iter().map(|p| p[0]).collect();
        let data = Dataset::from_scalars(&xs).unwrap();
        let best = exhaustive_optimum_1d(&xs, k);
        for init_seed in 0..3 {
            for init in [init_random(&data, k, init_seed).unwrap(), init_kmeanspp(&data, k, init_seed).unwrap()] {
                let sol = lloyd(&data, &init, &LloydParams::default()).unwrap();
                prop_assert!(sol.objective >= best - 1e-12 * best.max(1.0), "{} < {}", sol.objective, best);
            }
        }
    }

    #[test]
    fn solution_objective_is_recomputable(seed: u64, n in 2usize..40, k in 1usize..5) {
        let (data, _) = instance(seed, n, 2, 1);
        let init = init_random(&data, k.min(n), seed).unwrap();
        let sol = lloyd(&data, &init, &LloydParams::default()).unwrap();
        let again = objective(&data, &sol.centers).unwrap();
        prop_assert!(rel_close(sol.objective, again, 1e-12));
        prop_assert_eq!(&sol.assignment.labels, &assign(&data, &sol.centers).unwrap().labels);
    }

    #[test]
    fn sse_is_n_times_objective(seed: u64, n in 1usize..50, k in 1usize..5) {
        let (data, centers) = instance(seed, n, 3, k);
        let s = sse(&data, &centers).unwrap();
        prop_assert!(rel_close(s, n as f64 * objective(&data, &centers).unwrap(), 1e-9));
    }

    #[test]
    fn centroid_index_matches_oracle(seed: u64, k in 1usize..9, kf in 1usize..12) {
        let mut r = rng(seed);
        let truth = random_rows(&mut r, k, 2, 10.0);
        let fitted = random_rows(&mut r, kf, 2, 10.0);
        let ci = centroid_index(&CenterSet::from_rows(&fitted).unwrap(), &CenterSet::from_rows(&truth).unwrap()).unwrap();
        prop_assert_eq!(ci, naive_ci(&fitted, &truth));
    }

    #[test]
    fn sd_td_scores_match_direct_sums(seed: u64, k in 1usize..6, per in 1usize..20) {
        let (data, sol) = clustered(seed, k, per, 2);
        prop_assume!(!sol.is_degenerate());
        let (mean, tot) = naive_spread(&rows_of(&data), &center_rows(&sol.centers), &sol.assignment.labels);
        let sd = sd_scores(&sol).unwrap();
        let td = td_scores(&sol).unwrap();
        for i in 0..sol.k() {
            prop_assert!(rel_close(sd.scores[i], mean[i], 1e-9) || mean[i] < 1e-300);
            prop_assert!(rel_close(td.scores[i], tot[i], 1e-9) || tot[i] < 1e-300);
            let size = sol.assignment.clusters[i].len() as f64;
            prop_assert!(rel_close(td.scores[i], size * sd.scores[i], 1e-9) || tot[i] < 1e-300);
        }
    }

    #[test]
    fn oi_incremental_equals_naive(seed: u64, k in 2usize..7, per in 1usize..15, d in 1usize..4) {
        let (data, sol) = clustered(seed, k, per, d);
        prop_assume!(!sol.is_degenerate());
        let g = removal_objectives(&data, &sol).unwrap();
        let rows = rows_of(&data);
        let cents = center_rows(&sol.centers);
        for (i, gi) in g.iter().enumerate() {
            let naive = naive_removal_objective(&rows, &cents, i);
            prop_assert!(rel_close(*gi, naive, 1e-10), "G_{i}: {gi} vs {naive}");
        }
        let (a, b) = detect_mfo_oi(&data, &sol).unwrap();
        prop_assert!(a != b);
    }

    #[test]
    fn pd_matches_exhaustive_scan(seed: u64, k in 2usize..9) {
        let mut r = rng(seed);
        let cents = random_rows(&mut r, k, 2, 10.0);
        let data = Dataset::from_rows(&cents).unwrap();
        let sol = LocalSolution::evaluate(&data, CenterSet::from_rows(&cents).unwrap(), 1).unwrap();
        prop_assert_eq!(detect_mfo_pd(&sol).unwrap(), brute_closest_pair(&cents));
        prop_assert_eq!(pair_distances(&sol).len(), k * (k - 1) / 2);
    }

    #[test]
    fn detectors_invariant_under_scale_and_shift(seed: u64, k in 2usize..6, per in 3usize..15,
                                                 s in 0.01f64..100.0, shift in -1e3f64..1e3) {
        let (data, sol) = clustered(seed, k, per, 2);
        prop_assume!(!sol.is_degenerate());
        let v = [shift, -0.5 * shift];
        let data2 = data.transformed(s, &v).unwrap();
        let sol2 = LocalSolution::evaluate(&data2, sol.centers.transformed(s, &v).unwrap(), 1).unwrap();
        prop_assume!(sol2.assignment.labels == sol.assignment.labels);

        let sd = sd_scores(&sol).unwrap();
        if clear_winner(&sd.scores, true, 1e-9) {
            prop_assert_eq!(detect_ofm_sd(&sol2).unwrap(), sd.selected);
        }
        let td = td_scores(&sol).unwrap();
        if clear_winner(&td.scores, true, 1e-9) {
            prop_assert_eq!(detect_ofm_td(&sol2).unwrap(), td.selected);
        }
        let rd = radius_scores(&sol, 0.5).unwrap();
        let rd2 = radius_scores(&sol2, 0.5).unwrap();
        prop_assert!(rel_close(rd2.epsilon, s * rd.epsilon, 1e-9));
        // Ratios are counts; they agree unless a distance sits within 1e-9 of epsilon.
        let near_edge = sol.assignment.sq_dists.iter()
            .any(|&d2| (d2.sqrt() - rd.epsilon).abs() <= 1e-9 * rd.epsilon);
        if !near_edge {
            prop_assert_eq!(&rd2.ratios, &rd.ratios);
            prop_assert_eq!(detect_ofm_radius(&sol2, 0.5).unwrap(), rd.selected);
        }
        let pd: Vec<f64> = pair_distances(&sol).into_iter().map(|p| p.1).collect();
        if clear_winner(&pd, false, 1e-9) {
            prop_assert_eq!(detect_mfo_pd(&sol2).unwrap(), detect_mfo_pd(&sol).unwrap());
        }
        let g = removal_objectives(&data, &sol).unwrap();
        if clear_winner(&g, false, 1e-9) {
            let (i, _) = detect_mfo_oi(&data, &sol).unwrap();
            let cd: Vec<f64> = (0..k).filter(|&j| j != i)
                .map(|j| ffkm::dataset::sq_dist(sol.centers.center(i), sol.centers.center(j))).collect();
            if clear_winner(&cd, false, 1e-9) {
                prop_assert_eq!(detect_mfo_oi(&data2, &sol2).unwrap(), detect_mfo_oi(&data, &sol).unwrap());
            }
        }
    }

    #[test]
    fn separation_stats_match_pair_scan(seed: u64, k in 2usize..11) {
        let mut r = rng(seed);
        let cents = random_rows(&mut r, k, 3, 10.0);
        let (lo, hi) = separation_stats(&CenterSet::from_rows(&cents).unwrap()).unwrap();
        let mut dmin = f64::INFINITY;
        let mut dmax: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    let d = cents[i].iter().zip(&cents[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    dmin = dmin.min(d);
                    dmax = dmax.max(d);
                }
            }
        }
        prop_assert!(rel_close(lo, dmin, 1e-12) && rel_close(hi, dmax, 1e-12));
    }

    #[test]
    fn ball_samples_stay_in_support(seed: u64, d in 1usize..5, r in 0.1f64..10.0) {
        let mut g = rng(seed);
        let model = BallMixture::new(CenterSet::from_rows(&random_rows(&mut g, 3, d, 100.0)).unwrap(), r).unwrap();
        let (data, labels) = gen_ball_mixture(&model, 300, seed).unwrap();
        for (t, &s) in labels.iter().enumerate() {
            let dist = ffkm::dataset::sq_dist(data.point(t), model.centers.center(s)).sqrt();
            prop_assert!(dist <= r * (1.0 + 1e-12));
        }
    }

    #[test]
    fn split_and_merge_cardinality(seed: u64, k in 2usize..6, per in 2usize..10) {
        let (data, sol) = clustered(seed, k, per, 2);
        prop_assume!(!sol.is_degenerate());
        for method in [SplitMethod::FarthestPoint, SplitMethod::Local2Means] {
            let split = split_center(&data, &sol, 0, method, seed).unwrap();
            prop_assert_eq!(split.k(), k + 1);
        }
        let merged = merge_centers(&sol.centers, 0, 1).unwrap();
        prop_assert_eq!(merged.k(), k - 1);
        prop_assert!(merge_centers(&sol.centers, 1, 1).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    /// Objective never increases over any assign/update step.
    #[test]
    fn lloyd_steps_are_monotone(seed: u64, n in 1usize..60, d in 1usize..4, k in 1usize..7) {
        let (data, _) = instance(seed, n, d, 1);
        let mut centers = init_random(&data, k.min(n), seed).unwrap();
        let mut prev = objective(&data, &centers).unwrap();
        for _ in 0..50 {
            let asg = assign(&data, &centers).unwrap();
            centers = update_centers(&data, &asg, &centers).unwrap();
            let g = objective(&data, &centers).unwrap();
            prop_assert!(g <= prev * (1.0 + 1e-12), "{g} > {prev}");
            prev = g;
        }
        let sol = lloyd(&data, &init_random(&data, k.min(n), seed).unwrap(), &LloydParams::default()).unwrap();
        prop_assert!(sol.objective <= objective(&data, &init_random(&data, k.min(n), seed).unwrap()).unwrap() * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn ffkm_invariants(seed: u64, k in 2usize..6, per in 5usize..30, det in 0usize..4) {
        let (data, _) = clustered(seed, k, per, 2);
        let init = init_random(&data, k, seed ^ 0xff).unwrap();
        let (ofm, mfo) = [
            (OfmDetector::Sd, MfoDetector::Pd),
            (OfmDetector::Td, MfoDetector::Oi),
            (OfmDetector::Radius { delta: 0.5 }, MfoDetector::Pd),
            (OfmDetector::Sd, MfoDetector::Oi),
        ][det];
        let cfg = FfkmConfig { ofm, mfo, seed, ..FfkmConfig::default() };
        let base = lloyd(&data, &init, &cfg.lloyd).unwrap();
        let (sol, trace) = fission_fusion(&data, &init, &cfg).unwrap();
        prop_assert_eq!(sol.k(), k);
        prop_assert!(sol.objective <= base.objective);
        // Degenerate Lloyd results are repaired before the first outer step.
        if !base.is_degenerate() {
            prop_assert_eq!(trace.lloyd_objective, base.objective);
        }
        prop_assert!(trace.lloyd_objective <= base.objective);
        for step in &trace.steps {
            prop_assert_eq!(step.k_expanded, k + 1);
            prop_assert_eq!(step.accepted, step.candidate_objective < step.objective);
        }
        prop_assert!(trace.steps.iter().rev().skip(1).all(|s| s.accepted));
        let (again, _) = fission_fusion(&data, &init, &cfg).unwrap();
        prop_assert_eq!(again.centers, sol.centers);
    }
}

#[test]
fn init_random_selection_frequency() {
    // Each point should be picked with probability k/n.
    let n = 20;
    let k = 5;
    let seeds = 10_000;
    let data = Dataset::from_scalars(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap();
    let mut counts = vec![0usize; n];
    for seed in 0..seeds {
        let c = init_random(&data, k, seed).unwrap();
        let mut picked: Vec<usize> = c.as_flat().iter().map(|&x| x as usize).collect();
        picked.sort_unstable();
        picked.dedup();
        assert_eq!(picked.len(), k, "centers must be distinct points");
        for p in picked {
            counts[p] += 1;
        }
    }
    let p = k as f64 / n as f64;
    let mean = seeds as f64 * p;
    let sd = (seeds as f64 * p * (1.0 - p)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - mean).abs() <= 5.0 * sd,
            "point {i}: {c} vs {mean} ± 5·{sd}"
        );
    }
}

#[test]
fn kmeanspp_first_center_uniform_and_d2_weighting() {
    let data = Dataset::from_scalars(&[0.0, 0.0, 0.0, 100.0]).unwrap();
    for seed in 0..200 {
        let c = init_kmeanspp(&data, 2, seed).unwrap();
        let mut v = c.as_flat().to_vec();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![0.0, 100.0]);
    }
    let n = 10;
    let data = Dataset::from_scalars(&(0..n).map(|i| i as f64).collect::<Vec<_>>()).unwrap();
    let mut counts = vec![0usize; n];
    let seeds = 10_000u64;
    for seed in 0..seeds {
        counts[init_kmeanspp(&data, 1, seed).unwrap().center(0)[0] as usize] += 1;
    }
    let p = 1.0 / n as f64;
    let sd = (seeds as f64 * p * (1.0 - p)).sqrt();
    assert!(
        counts
            .iter()
            .all(|&c| (c as f64 - seeds as f64 * p).abs() <= 5.0 * sd),
        "{counts:?}"
    );
}

#[test]
fn uniform_ball_second_moment() {
    for d in [1usize, 2, 3, 5] {
        let r = 2.0;
        let model = BallMixture::new(CenterSet::from_rows(&[vec![1.0; d]]).unwrap(), r).unwrap();
        let (data, _) = gen_ball_mixture(&model, 100_000, 7 + d as u64).unwrap();
        let m2 = data
            .points()
            .map(|p| ffkm::dataset::sq_dist(p, model.centers.center(0)))
            .sum::<f64>()
            / data.len() as f64;
        let expected = r * r * d as f64 / (d as f64 + 2.0);
        assert!(
            (m2 / expected - 1.0).abs() < 0.01,
            "d={d}: {m2} vs {expected}"
        );
    }
}

#[test]
fn ball_cluster_sizes_concentrate() {
    // n >= 32 k^2 ln(2k/0.01): sizes in [n/2k, 3n/2k] in at least 99% of runs.
    let k = 4usize;
    let n = (32.0 * (k * k) as f64 * (2.0 * k as f64 / 0.01).ln()).ceil() as usize;
    let model = BallMixture::grid(2, 2, 30.0, 1.0).unwrap();
    let runs = 200;
    let ok = (0..runs)
        .filter(|&seed| {
            let (_, labels) = gen_ball_mixture(&model, n, seed).unwrap();
            let mut sizes = vec![0usize; k];
            for l in labels {
                sizes[l] += 1;
            }
            sizes.iter().all(|&s| 2 * k * s >= n && 2 * k * s <= 3 * n)
        })
        .count();
    assert!(ok * 100 >= 99 * runs as usize, "{ok}/{runs}");
}
