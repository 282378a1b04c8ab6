mod common;

use common::{config_and_weights, config_strategy, pairwise, profile_strategy, table_strategy};
use nalgebra::DMatrix;
use proptest::prelude::*;
use schoenloc::ca::{self, ContingencyTable};
use schoenloc::diagnostics::{self, entropy, ParamGrid, SweepOptions};
use schoenloc::estimator::{self, iterate_once, objective, EstimateOptions, Regime, Step};
use schoenloc::geometry::{
    aggregate_configuration_ties, aggregate_ties, centroid_sq_distances, certify_euclidean,
    classical_mds, profile_sq_distance, sq_euclidean, verify_huygens, Configuration, Profile,
    SquaredDistanceMatrix, Weights,
};
use schoenloc::transforms::{MixtureAtom, SweepFamily, TransformSpec};

fn family_strategy() -> impl Strategy<Value = TransformSpec> {
    prop_oneof![
        Just(TransformSpec::Identity),
        (0.05f64..0.99).prop_map(|q| TransformSpec::power(q).unwrap()),
        (0.1f64..10.0).prop_map(|d| TransformSpec::exponential(d).unwrap()),
        (0.1f64..10.0).prop_map(|d| TransformSpec::logarithmic(d).unwrap()),
        (0.1f64..10.0).prop_map(|d| TransformSpec::tukey(d).unwrap()),
        (0.1f64..10.0).prop_map(|d| TransformSpec::huber(d).unwrap()),
        Just(TransformSpec::Discrete),
        (0.1f64..0.9, 0.05f64..2.0, 2.0f64..20.0).prop_map(|(a, l1, l2)| {
            TransformSpec::exp_mixture(vec![
                MixtureAtom { weight: a, lambda: l1 },
                MixtureAtom { weight: 1.0 - a, lambda: l2 },
            ])
            .unwrap()
        }),
    ]
}

/// Families whose minimisers are smooth fixed points (no vertex attraction).
fn smooth_family_strategy() -> impl Strategy<Value = TransformSpec> {
    prop_oneof![
        (0.55f64..0.99).prop_map(|q| TransformSpec::power(q).unwrap()),
        (0.5f64..50.0).prop_map(|d| TransformSpec::exponential(d).unwrap()),
        (0.5f64..50.0).prop_map(|d| TransformSpec::logarithmic(d).unwrap()),
    ]
}

fn near_kink(spec: &TransformSpec, d: f64) -> bool {
    spec.kink().map(|k| (d - k).abs() < 1e-3 * k.max(1.0)).unwrap_or(false)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_signs_hold_pointwise(spec in family_strategy(), d in 1e-3f64..1e3) {
        prop_assume!(!near_kink(&spec, d));
        prop_assert!(spec.phi(d).unwrap() > 0.0);
        prop_assert!(spec.phi_prime(d).unwrap().to_f64() >= 0.0);
        prop_assert!(spec.phi_second(d).unwrap().to_f64() <= 0.0);
    }

    #[test]
    fn psi_and_chi_are_consistent(spec in family_strategy(), x in 0.01f64..10.0) {
        prop_assume!(!matches!(spec, TransformSpec::Discrete));
        prop_assume!(!near_kink(&spec, x * x));
        let slope = spec.phi_prime(x * x).unwrap().to_f64();
        let psi = spec.psi(x);
        prop_assert!((psi - slope * x).abs() <= 1e-12 * psi.abs().max(1e-300));
        let h = 1e-5 * x.max(1e-2);
        let fd = (spec.psi(x + h) - spec.psi(x - h)) / (2.0 * h);
        let chi = spec.chi(x * x).unwrap();
        prop_assert!((fd - chi).abs() <= 1e-6 * chi.abs().max(1.0), "fd {} chi {}", fd, chi);
    }

    #[test]
    fn huber_psi_is_the_clipped_identity(delta in 0.01f64..100.0, x in -20.0f64..20.0) {
        let spec = TransformSpec::huber(delta).unwrap();
        prop_assert_eq!(spec.psi(x), x.max(-delta.sqrt()).min(delta.sqrt()));
    }

    #[test]
    fn tukey_psi_is_the_bisquare(delta in 0.01f64..100.0, x in -20.0f64..20.0) {
        let spec = TransformSpec::tukey(delta).unwrap();
        let expected = if x.abs() <= delta.sqrt() {
            let s = 1.0 - x * x / delta;
            x * s * s
        } else {
            0.0
        };
        prop_assert_eq!(spec.psi(x), expected);
    }

    #[test]
    fn power_chi_sign_follows_q(q in 0.01f64..0.99, d in 1e-6f64..1e6) {
        prop_assume!((q - 0.5).abs() > 1e-9);
        let chi = TransformSpec::power(q).unwrap().chi(d).unwrap();
        prop_assert_eq!(chi > 0.0, q > 0.5);
        prop_assert_eq!(chi < 0.0, q < 0.5);
    }

    #[test]
    fn single_atom_mixture_is_exponential(lambda in 0.01f64..50.0, d in 0.0f64..100.0) {
        let mix = TransformSpec::exp_mixture(vec![MixtureAtom { weight: lambda, lambda }]).unwrap();
        let exp = TransformSpec::exponential_rate(lambda).unwrap();
        let (a, b) = (mix.phi(d).unwrap(), exp.phi(d).unwrap());
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(f64::MIN_POSITIVE));
    }
}

fn transformed_is_euclidean(spec: &TransformSpec, config: &Configuration) -> Result<(), TestCaseError> {
    let d = sq_euclidean(config).map(|v| spec.phi(v)).unwrap();
    let cert = certify_euclidean(&d, &Weights::uniform(d.len())).unwrap();
    prop_assert!(
        cert.min_eigenvalue >= -1e-8 * cert.max_eigenvalue.max(0.0),
        "{spec}: min {:e} max {:e}",
        cert.min_eigenvalue,
        cert.max_eigenvalue
    );
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn euclidean_preservation_identity(c in config_strategy(10, 3)) {
        transformed_is_euclidean(&TransformSpec::Identity, &c)?;
    }

    #[test]
    fn euclidean_preservation_power(c in config_strategy(10, 3), q in 0.05f64..0.99) {
        transformed_is_euclidean(&TransformSpec::power(q).unwrap(), &c)?;
    }

    #[test]
    fn euclidean_preservation_exponential(c in config_strategy(10, 3), d in 0.1f64..10.0) {
        transformed_is_euclidean(&TransformSpec::exponential(d).unwrap(), &c)?;
    }

    #[test]
    fn euclidean_preservation_logarithmic(c in config_strategy(10, 3), d in 0.1f64..10.0) {
        transformed_is_euclidean(&TransformSpec::logarithmic(d).unwrap(), &c)?;
    }

    #[test]
    fn euclidean_preservation_tukey(c in config_strategy(10, 3), d in 0.1f64..10.0) {
        transformed_is_euclidean(&TransformSpec::tukey(d).unwrap(), &c)?;
    }

    #[test]
    fn euclidean_preservation_huber(c in config_strategy(10, 3), d in 0.1f64..10.0) {
        transformed_is_euclidean(&TransformSpec::huber(d).unwrap(), &c)?;
    }

    #[test]
    fn euclidean_preservation_discrete(c in config_strategy(10, 3)) {
        transformed_is_euclidean(&TransformSpec::Discrete, &c)?;
    }

    #[test]
    fn euclidean_preservation_mixture(c in config_strategy(10, 3), l1 in 0.05f64..2.0, l2 in 2.0f64..20.0) {
        let spec = TransformSpec::exp_mixture(vec![
            MixtureAtom { weight: 0.5, lambda: l1 },
            MixtureAtom { weight: 0.5, lambda: l2 },
        ])
        .unwrap();
        transformed_is_euclidean(&spec, &c)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn huygens_identities_hold((c, w) in config_and_weights(50, 5)) {
        let rep = verify_huygens(&c, &w).unwrap();
        prop_assert!(rep.max_deviation() < 1e-10, "{:?}", rep);
    }

    #[test]
    fn centroid_distances_match_coordinates(
        (c, alpha) in config_strategy(20, 4).prop_flat_map(|c| { let n = c.len(); (Just(c), profile_strategy(n)) })
    ) {
        let d = sq_euclidean(&c);
        let got = centroid_sq_distances(&d, alpha.as_slice()).unwrap();
        let a = c.weighted_mean(alpha.as_slice()).unwrap();
        for (i, g) in got.iter().enumerate() {
            let direct: f64 = (0..c.dim()).map(|k| (c.coords[(i, k)] - a[k]).powi(2)).sum();
            prop_assert!((g - direct).abs() < 1e-10, "{} vs {}", g, direct);
        }
    }

    #[test]
    fn quadratic_form_of_profile_difference(
        (c, a, b) in config_strategy(20, 4).prop_flat_map(|c| {
            let n = c.len();
            (Just(c), profile_strategy(n), profile_strategy(n))
        })
    ) {
        let d = sq_euclidean(&c);
        let z: Vec<f64> = b.as_slice().iter().zip(a.as_slice()).map(|(x, y)| x - y).collect();
        let n = c.len();
        let mut form = 0.0;
        for i in 0..n {
            for j in 0..n {
                form += d.get(i, j) * z[i] * z[j];
            }
        }
        let ca = c.weighted_mean(a.as_slice()).unwrap();
        let cb = c.weighted_mean(b.as_slice()).unwrap();
        let d_ab: f64 = ca.iter().zip(&cb).map(|(x, y)| (x - y).powi(2)).sum();
        prop_assert!((form + 2.0 * d_ab).abs() < 1e-10, "{} vs {}", form, -2.0 * d_ab);
        let via_profiles = profile_sq_distance(&d, a.as_slice(), b.as_slice()).unwrap();
        prop_assert!((via_profiles - d_ab).abs() < 1e-10);
    }

    #[test]
    fn mds_round_trip((c, w) in config_and_weights(12, 4)) {
        let d = sq_euclidean(&c);
        let cert = certify_euclidean(&d, &w).unwrap();
        let rank = cert.rank().max(1).min(c.len() - 1);
        let back = classical_mds(&d, &w, rank).unwrap();
        let err = (pairwise(&back.coords) - d.matrix()).abs().max();
        prop_assert!(err < 1e-8 * d.max_entry().max(1.0), "err {}", err);
        // weighted centring
        for k in 0..back.dim() {
            let m: f64 = (0..back.len()).map(|i| w.as_slice()[i] * back.coords[(i, k)]).sum();
            prop_assert!(m.abs() < 1e-9);
        }
    }

    #[test]
    fn tie_aggregation_is_idempotent(
        (c, w, dup) in config_and_weights(8, 3).prop_flat_map(|(c, w)| {
            let n = c.len();
            (Just(c), Just(w), prop::collection::vec(0..n, 0..4))
        })
    ) {
        // append copies of some rows
        let n = c.len();
        let p = c.dim();
        let m = n + dup.len();
        let coords = DMatrix::from_fn(m, p, |i, k| if i < n { c.coords[(i, k)] } else { c.coords[(dup[i - n], k)] });
        let labels = (1..=m).map(|i| i.to_string()).collect();
        let big = Configuration::new(coords, labels).unwrap();
        let mut wv = w.as_slice().to_vec();
        wv.extend(dup.iter().map(|&i| w.as_slice()[i]));
        let bw = Weights::normalized(wv).unwrap();
        let (once, reduced) = aggregate_configuration_ties(&big, &bw, 1e-12).unwrap();
        prop_assert!(once.distances.len() <= n);
        let twice = aggregate_ties(&once.distances, &once.weights, 1e-12).unwrap();
        prop_assert!(twice.is_identity());
        prop_assert_eq!(&twice.distances, &once.distances);
        prop_assert_eq!(&twice.weights, &once.weights);
        prop_assert_eq!(reduced.len(), once.distances.len());
    }
}

fn line_data(xs: &[f64]) -> (SquaredDistanceMatrix, Configuration) {
    common::line(xs)
}

fn distinct_line() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 3..12).prop_filter("distinct", |v| {
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        s.windows(2).all(|p| p[1] - p[0] > 1e-3)
    })
}

fn distinct_config() -> impl Strategy<Value = (Configuration, Weights)> {
    config_and_weights(10, 3).prop_filter("distinct", |(c, _)| {
        let d = sq_euclidean(c);
        !d.has_ties() && d.mean_off_diagonal() > 1e-6 && {
            let n = d.len();
            (0..n).all(|i| (0..n).all(|j| i == j || d.get(i, j) > 1e-6))
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_point_consistency((c, w) in distinct_config(), spec in smooth_family_strategy()) {
        let d = sq_euclidean(&c);
        let opts = EstimateOptions::default();
        let r = estimator::estimate(&d, &w, &spec, &opts).unwrap();
        prop_assume!(r.converged && r.regime == Regime::Distributed);
        match iterate_once(&d, &w, &spec, &r.alpha).unwrap() {
            Step::Update(next) => {
                let change = next.max_abs_diff(&r.alpha);
                prop_assert!(change < 10.0 * opts.tol_alpha, "{spec}: change {:e}", change);
            }
            Step::Singular(_) => prop_assert!(false, "distributed result sits on an observation"),
        }
    }

    #[test]
    fn descent_along_plain_steps((c, w) in distinct_config(), spec in family_strategy()) {
        prop_assume!(spec.is_rectifiable());
        let d = sq_euclidean(&c);
        let mut alpha = Profile::from(&w);
        let mut g = objective(&d, &w, &spec, &alpha).unwrap();
        for _ in 0..30 {
            match iterate_once(&d, &w, &spec, &alpha).unwrap() {
                Step::Update(next) => {
                    let g_next = objective(&d, &w, &spec, &next).unwrap();
                    prop_assert!(g_next <= g + 1e-12 * g.abs().max(1e-300), "{spec}: {} -> {}", g, g_next);
                    alpha = next;
                    g = g_next;
                }
                Step::Singular(_) => break,
            }
        }
    }

    #[test]
    fn regimes_are_dichotomous((c, w) in distinct_config(), spec in family_strategy()) {
        let d = sq_euclidean(&c);
        let r = estimator::estimate(&d, &w, &spec, &EstimateOptions::default()).unwrap();
        let recomputed = objective(&d, &w, &spec, &r.alpha).unwrap();
        prop_assert!((r.gamma - recomputed).abs() <= 1e-12 * recomputed.abs().max(1e-300));
        if let Some(s) = r.strain {
            prop_assert!(s >= 1.0 - 1e-9, "strain {}", s);
        }
        match r.regime {
            Regime::Concentrated(i0) => {
                prop_assert_eq!(r.alpha.as_slice()[i0], 1.0);
                prop_assert_eq!(r.entropy, 0.0);
            }
            Regime::Distributed => {
                prop_assert!(r.d_centroid.iter().all(|v| *v > 0.0));
                prop_assert!(r.entropy > 0.0);
            }
            Regime::Boundary => {
                let boundary = matches!(spec, TransformSpec::Power { q } if q == 0.5);
                prop_assert!(boundary);
            }
        }
        prop_assert!(r.entropy >= 0.0 && r.entropy <= (c.len() as f64).ln() + 1e-12);
        prop_assert!((entropy(&r.alpha) == 0.0) == r.regime.is_concentrated());
    }

    #[test]
    fn estimate_is_invariant_under_isometries(
        (c, w) in distinct_config(),
        spec in smooth_family_strategy(),
        angle in 0.0f64..std::f64::consts::TAU,
        shift in prop::collection::vec(-100.0f64..100.0, 3),
    ) {
        // rotate the first two axes (if any) and translate
        let p = c.dim();
        let mut moved = c.coords.clone();
        for i in 0..c.len() {
            if p >= 2 {
                let (x, y) = (c.coords[(i, 0)], c.coords[(i, 1)]);
                moved[(i, 0)] = angle.cos() * x - angle.sin() * y;
                moved[(i, 1)] = angle.sin() * x + angle.cos() * y;
            } else {
                moved[(i, 0)] = -c.coords[(i, 0)];
            }
            for k in 0..p {
                moved[(i, k)] += shift[k];
            }
        }
        let c2 = Configuration::new(moved, c.labels.clone()).unwrap();
        let opts = EstimateOptions::default();
        let r1 = estimator::estimate(&sq_euclidean(&c), &w, &spec, &opts).unwrap();
        let r2 = estimator::estimate(&sq_euclidean(&c2), &w, &spec, &opts).unwrap();
        prop_assert!(r1.alpha.max_abs_diff(&r2.alpha) < 1e-8, "{spec}");
    }

    #[test]
    fn power_argmin_is_scale_free((c, w) in distinct_config(), q in 0.55f64..0.99, scale in 0.01f64..100.0) {
        let spec = TransformSpec::power(q).unwrap();
        let d = sq_euclidean(&c);
        let ds = d.map(|v| Ok(v * scale)).unwrap();
        let opts = EstimateOptions::default();
        let r1 = estimator::estimate(&d, &w, &spec, &opts).unwrap();
        let r2 = estimator::estimate(&ds, &w, &spec, &opts).unwrap();
        prop_assert!(r1.alpha.max_abs_diff(&r2.alpha) < 1e-8);
        let g_scaled = objective(&ds, &w, &spec, &r1.alpha).unwrap();
        prop_assert!((g_scaled - scale.powf(q) * r1.gamma).abs() <= 1e-12 * g_scaled);
    }

    #[test]
    fn one_dimensional_solution_solves_the_psi_equation(
        xs in distinct_line(),
        spec in smooth_family_strategy(),
    ) {
        let (d, c) = line_data(&xs);
        let w = Weights::uniform(xs.len());
        let r = estimator::estimate(&d, &w, &spec, &EstimateOptions::default()).unwrap();
        prop_assume!(r.regime == Regime::Distributed && r.converged);
        let a = c.weighted_mean(r.alpha.as_slice()).unwrap()[0];
        let terms: Vec<f64> = xs.iter().map(|x| spec.psi(x - a) / xs.len() as f64).collect();
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        prop_assert!(sum.abs() <= 1e-8 * scale, "{spec}: residual {:e} scale {:e}", sum, scale);
    }

    #[test]
    fn identity_strain_at_the_weights_is_one((c, w) in config_and_weights(10, 3)) {
        let d = sq_euclidean(&c);
        prop_assume!(d.max_entry() > 0.0);
        let g = objective(&d, &w, &TransformSpec::Identity, &Profile::from(&w)).unwrap();
        let s = diagnostics::strain(g, &d, &w, &TransformSpec::Identity).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12, "strain {}", s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn warm_and_cold_agree_where_the_minimum_is_unique(xs in distinct_line()) {
        let (d, c) = line_data(&xs);
        let w = Weights::uniform(xs.len());
        let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        // δ well above the squared spread: Γ is convex along the segment
        let lo = 10.0 * spread * spread;
        let grid = ParamGrid::from_values("delta", (0..6).map(|k| lo * 4f64.powi(k)).collect()).unwrap();
        let warm = diagnostics::sweep(&d, &w, SweepFamily::Exponential, &grid,
            &SweepOptions { cold_start: false, ..Default::default() }, Some(&c)).unwrap();
        for (rec, delta) in warm.iter().zip(&grid.values) {
            let cold = estimator::estimate(&d, &w, &TransformSpec::exponential(*delta).unwrap(),
                &EstimateOptions::default()).unwrap();
            prop_assert!((rec.gamma - cold.gamma).abs() <= 1e-10 * cold.gamma.max(1e-300));
        }
    }
}

fn pearson_over_n(t: &[Vec<f64>]) -> f64 {
    let n: f64 = t.iter().flatten().sum();
    let rs: Vec<f64> = t.iter().map(|r| r.iter().sum()).collect();
    let cs: Vec<f64> = (0..t[0].len()).map(|g| t.iter().map(|r| r[g]).sum()).collect();
    let mut chi2 = 0.0;
    for (i, r) in t.iter().enumerate() {
        for (g, obs) in r.iter().enumerate() {
            let e = rs[i] * cs[g] / n;
            chi2 += (obs - e).powi(2) / e;
        }
    }
    chi2 / n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ca_inertia_is_pearson_over_n(rows in table_strategy(8)) {
        let t = ContingencyTable::from_rows(&rows).unwrap();
        let got = ca::ca_inertia(&t).unwrap();
        prop_assert!((got - pearson_over_n(&rows)).abs() < 1e-10);
    }

    #[test]
    fn chi_square_distances_are_euclidean(rows in table_strategy(8)) {
        let t = ContingencyTable::from_rows(&rows).unwrap();
        let d = ca::chi_square_distances(&t).unwrap();
        prop_assert!(certify_euclidean(&d, &ca::row_weights(&t).unwrap()).unwrap().passed);
    }

    #[test]
    fn duplicating_a_row_keeps_distances(rows in table_strategy(6), pick in 0usize..6) {
        let n = rows.len();
        let k = pick % n;
        let mut split = rows.clone();
        let half: Vec<f64> = rows[k].iter().map(|v| v / 2.0).collect();
        split[k] = half.clone();
        split.push(half);
        let agg = |r: &[Vec<f64>]| {
            let t = ContingencyTable::from_rows(r).unwrap();
            aggregate_ties(&ca::chi_square_distances(&t).unwrap(), &ca::row_weights(&t).unwrap(), 1e-12).unwrap()
        };
        let a1 = agg(&rows);
        let a2 = agg(&split);
        prop_assert_eq!(a1.groups.len(), a2.groups.len());
        // the appended copy (index n) stands for row k
        let key = |g: &Vec<usize>| g.iter().map(|&r| if r == n { k } else { r }).min().unwrap();
        let pos: Vec<usize> = a2
            .groups
            .iter()
            .map(|g| a1.groups.iter().position(|h| key(h) == key(g)).unwrap())
            .collect();
        for (i2, &i1) in pos.iter().enumerate() {
            prop_assert!((a2.weights.as_slice()[i2] - a1.weights.as_slice()[i1]).abs() < 1e-12);
            for (j2, &j1) in pos.iter().enumerate() {
                prop_assert!((a2.distances.get(i2, j2) - a1.distances.get(i1, j1)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn trajectory_moves_toward_the_dominant_row(seed in 0u64..1000, dominance in 0.5f64..2.0) {
        let t = ca::synthetic_dominant_table(29, 22, 0, dominance, seed).unwrap();
        let ds = schoenloc::data::Dataset::from_table(&t, 2).unwrap().aggregated(1e-12).unwrap();
        let target_row = ds.groups.iter().position(|g| g.contains(&0)).unwrap();
        let cfg = ds.config.as_ref().unwrap();
        let target: Vec<f64> = (0..cfg.dim()).map(|k| cfg.coords[(target_row, k)]).collect();
        let grid = ParamGrid::parse("q=0.05:1:0.05").unwrap();
        let recs = diagnostics::sweep(&ds.distances, &ds.weights, SweepFamily::Power, &grid,
            &SweepOptions { cold_start: false, ..Default::default() }, Some(cfg)).unwrap();
        // walk from q = 1 (the origin) down the warm branch
        let dist: Vec<f64> = recs.iter().rev().map(|r| {
            let p = r.projection.as_ref().unwrap();
            p.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        }).collect();
        prop_assert!(dist[0] > 0.0);
        prop_assert!(dist.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9)), "{:?}", dist);
        prop_assert!(*dist.last().unwrap() <= 1e-12 * dist[0]);
    }
}
