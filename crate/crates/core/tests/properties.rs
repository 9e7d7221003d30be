use packrig::first_order::is_infinitesimally_rigid;
use packrig::format::{self, PackingDocument};
use packrig::generate;
use packrig::lp::{self, Bound, LinearProgram, LpStatus};
use packrig::matroid;
use packrig::rigidity::flex_space_report;
use packrig::second_order::{second_order_analysis, FlexCone};
use packrig::{AnalysisTolerances, ConstraintPartition, Packing, PlanarEmbeddedGraph};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, max_vertices: usize) -> (PlanarEmbeddedGraph, Packing, ConstraintPartition, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g, p) = generate::random_packing(&mut rng, max_vertices).unwrap();
    let part = generate::random_partition(&mut rng, g.vertex_count());
    (g, p, part, rng)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn swapping_signs_keeps_the_verdict(seed in any::<u64>()) {
        let tol = AnalysisTolerances::default();
        let (g, p, part, _) = instance(seed, 14);
        let a = is_infinitesimally_rigid(&g, &p, &part, &tol).unwrap();
        let b = is_infinitesimally_rigid(&g, &p, &part.swapped(), &tol).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert!((a.stress_margin - b.stress_margin).abs() < 1e-6 * (1.0 + a.stress_margin.abs())
            || a.stress_margin.is_infinite() && b.stress_margin.is_infinite());
    }

    #[test]
    fn scaling_keeps_the_verdict(seed in any::<u64>(), s in 0.2f64..5.0) {
        let tol = AnalysisTolerances::default();
        let (g, p, part, _) = instance(seed, 14);
        let a = is_infinitesimally_rigid(&g, &p, &part, &tol).unwrap();
        let b = is_infinitesimally_rigid(&g, &p.scaled(s), &part, &tol).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.diagnostics.dim_kernel_re, b.diagnostics.dim_kernel_re);
    }

    #[test]
    fn kernel_dimensions_follow_the_counts(seed in any::<u64>()) {
        let tol = AnalysisTolerances::default();
        let (g, p, part, _) = instance(seed, 20);
        let (n, m, b) = (g.vertex_count(), g.edge_count(), g.boundary_count());
        let rep = flex_space_report(&g, &p, &part, &tol).unwrap();
        prop_assert_eq!(rep.dim_kernel_r, 3 * n - m);
        prop_assert_eq!(rep.dim_kernel_r, b + 3);
        prop_assert!(rep.dim_kernel_re <= rep.dim_kernel_r);
        prop_assert!(rep.dim_kernel_rprime <= rep.dim_kernel_re);
        prop_assert_eq!(rep.dim_kernel_rprime, 3);
        prop_assert!(!rep.trivial_deficient);
    }

    #[test]
    fn second_order_directions_are_exclusive(seed in any::<u64>()) {
        let tol = AnalysisTolerances::default();
        let (g, p, part, _) = instance(seed, 12);
        let rep = second_order_analysis(&g, &p, &part, &tol).unwrap();
        if matches!(rep.cone, FlexCone::Ray | FlexCone::Line) {
            prop_assert!(!rep.verdicts.is_empty());
        }
        for d in &rep.verdicts {
            prop_assert!(d.exclusive(), "extendable {} blocked {}", d.extendable(), d.blocked());
        }
        if rep.cone == FlexCone::Trivial {
            let v = is_infinitesimally_rigid(&g, &p, &part, &tol).unwrap();
            prop_assert!(v.rigid());
        }
    }

    #[test]
    fn radius_sets_form_a_matroid(seed in any::<u64>()) {
        let tol = AnalysisTolerances::default();
        let (g, p, _, mut rng) = instance(seed, 12);
        let n = g.vertex_count();
        let cost: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let best = match matroid::greedy_min_cost_set(&g, &p, &cost, &tol) {
            Ok(b) => b,
            Err(_) => return Err(TestCaseError::reject("flexible bar framework")),
        };
        let basis = best.set.members.clone();
        prop_assert_eq!(basis.len(), g.boundary_count());
        prop_assert!(matroid::is_maximal(&g, &p, &basis, &tol).unwrap());

        // hereditary: random subsets stay independent
        for _ in 0..3 {
            let sub: Vec<usize> = basis.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            prop_assert!(matroid::is_independent(&g, &p, &sub, &tol).unwrap());
        }

        // any greedy order reaches the same size
        let other: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b2 = matroid::greedy_min_cost_set(&g, &p, &other, &tol).unwrap().set.members;
        prop_assert_eq!(b2.len(), basis.len());

        // exchange: a smaller independent set grows from the larger one
        let mut small = b2.clone();
        small.shuffle(&mut rng);
        small.truncate(basis.len().saturating_sub(1));
        let grows = basis
            .iter()
            .filter(|v| !small.contains(v))
            .any(|&v| {
                let mut s = small.clone();
                s.push(v);
                matroid::is_independent(&g, &p, &s, &tol).unwrap()
            });
        prop_assert!(grows || basis.is_empty());
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let (g, p, part, _) = instance(seed, 25);
        let mut doc = PackingDocument::new(g, p, part);
        doc.comments = vec![format!("seed {seed}")];
        let text = format::serialize(&doc);
        let back = format::parse(&text).unwrap();
        prop_assert_eq!(&back.packing, &doc.packing);
        prop_assert_eq!(&back.partition, &doc.partition);
        prop_assert_eq!(format::serialize(&back), text);
        let gtext = format::serialize_graph(&doc.graph);
        prop_assert_eq!(format::serialize_graph(&format::parse_graph(&gtext).unwrap()), gtext);
    }
}

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..7);
    let mut lp = LinearProgram::new(n);
    let row = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-3i32..=3) as f64 }).collect()
    };
    lp.maximize(row(rng));
    for _ in 0..rng.gen_range(0..4) {
        let a = row(rng);
        lp.add_eq(a, rng.gen_range(-2i32..=2) as f64);
    }
    for _ in 0..rng.gen_range(0..5) {
        let a = row(rng);
        lp.add_le(a, rng.gen_range(-2i32..=3) as f64);
    }
    for j in 0..n {
        let b = match rng.gen_range(0..5) {
            0 => Bound::default(),
            1 => Bound::NONNEGATIVE,
            2 => Bound { lower: None, upper: Some(rng.gen_range(-1i32..=2) as f64) },
            3 => {
                let l = rng.gen_range(-2i32..=1) as f64;
                Bound::between(l, l + rng.gen_range(0i32..=2) as f64)
            }
            _ => Bound { lower: Some(rng.gen_range(-2i32..=0) as f64), upper: None },
        };
        lp.set_bound(j, b);
    }
    lp
}

proptest! {
    #![proptest_config(config(400))]

    #[test]
    fn lp_outcomes_carry_their_certificates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_lp(&mut rng);
        let out = lp::solve(&lp, 1e-9).unwrap();
        prop_assert!(lp::farkas_check(&out, &lp, 1e-7), "{:?}", out.status);
        match out.status {
            LpStatus::Infeasible => prop_assert!(out.certificate.is_some() && out.point.is_none()),
            _ => prop_assert!(out.point.is_some() && out.certificate.is_none()),
        }
    }
}

// long degenerate programs once drifted into infeasible "optimal" points
#[test]
fn long_degenerate_programs_stay_feasible() {
    let tol = AnalysisTolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..30 {
        let (g, p) = generate::random_packing(&mut rng, 20).unwrap();
        let part = generate::random_partition(&mut rng, g.vertex_count());
        let v = is_infinitesimally_rigid(&g, &p, &part, &tol).unwrap();
        assert!(v.primal_dual_agree);
        if let Some(f) = &v.counterexample_flex {
            assert!(packrig::rigidity::is_proper(&part, f, tol.strict));
        }
    }
}
