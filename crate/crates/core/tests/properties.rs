use std::collections::BTreeSet;

use modalsyl_core::stats::{
    emmeans, fit_linear, pairwise_contrasts, Covariate, Factor, Hypothesis, Table, Term,
};
use modalsyl_core::{brute_force_oracle, decide, Formula, FrameClass, KripkeModel, Mode, Sequent};
use proptest::prelude::*;

fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![Just("p"), Just("q"), Just("r")].prop_map(Formula::atom);
    leaf.prop_recursive(depth, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::boxed),
            inner.clone().prop_map(Formula::diamond),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

fn model() -> impl Strategy<Value = KripkeModel> {
    (1usize..=4).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<bool>(), n * n),
            proptest::collection::vec(0u8..8, n),
        )
            .prop_map(move |(edges, vals)| {
                let mut m = KripkeModel::empty(n);
                for (i, e) in edges.iter().enumerate() {
                    if *e {
                        m = m.with_edge(i / n, i % n);
                    }
                }
                for (w, bits) in vals.iter().enumerate() {
                    for (k, a) in ["p", "q", "r"].iter().enumerate() {
                        if bits & (1 << k) != 0 {
                            m = m.with_true(w, a);
                        }
                    }
                }
                m
            })
    })
}

fn valid(s: &Sequent) -> bool {
    decide(s).expect("within node budget").valid
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn render_parse_round_trip(f in formula(6)) {
        let text = f.render();
        prop_assert_eq!(Formula::parse(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn primitive_basis_preserves_truth(f in formula(4), m in model()) {
        let g = f.to_primitive_basis();
        prop_assert!(g.is_primitive());
        for w in 0..m.worlds {
            prop_assert_eq!(m.eval_at_world(w, &f), m.eval_at_world(w, &g));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn countermodels_refute(f in formula(3), g in formula(3), global in any::<bool>(), k in any::<bool>()) {
        let mode = if global { Mode::Global } else { Mode::Local };
        let frames = if k { FrameClass::K } else { FrameClass::Reflexive };
        let s = Sequent::new(vec![f], g).with_mode(mode).with_frames(frames);
        let v = decide(&s).unwrap();
        if let Some(m) = &v.countermodel {
            prop_assert!(m.refutes(&s), "{}\n{}", s, m);
        }
        if !brute_force_oracle(&s, 2).valid {
            prop_assert!(!v.valid, "small countermodel exists for {}", s);
        }
    }

    #[test]
    fn modal_duality(a in formula(2), k in any::<bool>(), global in any::<bool>()) {
        let frames = if k { FrameClass::K } else { FrameClass::Reflexive };
        let mode = if global { Mode::Global } else { Mode::Local };
        let box_dual = Formula::not(Formula::diamond(Formula::not(a.clone())));
        let dia_dual = Formula::not(Formula::boxed(Formula::not(a.clone())));
        for (l, r) in [(Formula::boxed(a.clone()), box_dual), (Formula::diamond(a), dia_dual)] {
            let there = Sequent::new(vec![l.clone()], r.clone()).with_mode(mode).with_frames(frames);
            let back = Sequent::new(vec![r], l).with_mode(mode).with_frames(frames);
            prop_assert!(valid(&there) && valid(&back));
        }
    }

    #[test]
    fn frame_and_mode_monotonicity(f in formula(3), g in formula(3)) {
        let base = Sequent::new(vec![f], g);
        let local_k = valid(&base.clone().with_frames(FrameClass::K));
        let local_t = valid(&base.clone().with_frames(FrameClass::Reflexive));
        let global_k = valid(&base.clone().with_mode(Mode::Global).with_frames(FrameClass::K));
        let global_t = valid(&base.with_mode(Mode::Global).with_frames(FrameClass::Reflexive));
        prop_assert!(!local_k || local_t);
        prop_assert!(!global_k || global_t);
        prop_assert!(!local_k || global_k);
        prop_assert!(!local_t || global_t);
    }

    #[test]
    fn reflexivity_axiom(a in formula(3)) {
        let s = Sequent::new(vec![], Formula::implies(Formula::boxed(a.clone()), a));
        prop_assert!(valid(&s.clone().with_frames(FrameClass::Reflexive)));
    }
}

fn balanced(levels: usize, reps: usize, noise: &[f64]) -> (Table, Vec<f64>, Vec<f64>) {
    let names: Vec<String> = (0..levels).map(|i| format!("l{i}")).collect();
    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut means = vec![0.0; levels];
    for l in 0..levels {
        for r in 0..reps {
            let v = l as f64 * 0.3 + noise[(l * reps + r) % noise.len()];
            values.push(names[l].clone());
            y.push(v);
            means[l] += v / reps as f64;
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let t = Table::new().factor(Factor::with_levels("f", &refs, &values).unwrap());
    (t, y, means)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residuals_are_orthogonal(
        rows in proptest::collection::vec((0usize..3, -5.0f64..5.0, -5.0f64..5.0), 12..60)
    ) {
        let levels: Vec<&str> = rows.iter().map(|r| ["a", "b", "c"][r.0]).collect();
        prop_assume!(levels.iter().collect::<BTreeSet<_>>().len() == 3);
        let t = Table::new()
            .factor(Factor::with_levels("g", &["a", "b", "c"], &levels).unwrap())
            .covariate(Covariate::new("x", rows.iter().map(|r| r.1).collect()));
        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let fit = match fit_linear(&t, &y, &[Term::factor("g"), Term::covariate("x")]) {
            Ok(f) => f,
            Err(_) => return Ok(()),
        };
        let x = &t.covariates[0].values;
        let cols: Vec<Vec<f64>> = vec![
            vec![1.0; y.len()],
            levels.iter().map(|l| f64::from(u8::from(*l == "b"))).collect(),
            levels.iter().map(|l| f64::from(u8::from(*l == "c"))).collect(),
            x.clone(),
        ];
        let scale: f64 = y.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        for c in cols {
            let dot: f64 = c.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            let norm: f64 = c.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            prop_assert!(dot.abs() <= 1e-8 * norm * scale, "{dot}");
        }
    }

    #[test]
    fn balanced_emmeans_are_group_means(
        levels in 2usize..5, reps in 2usize..6,
        noise in proptest::collection::vec(-1.0f64..1.0, 30)
    ) {
        let (t, y, means) = balanced(levels, reps, &noise);
        let fit = fit_linear(&t, &y, &[Term::factor("f")]).unwrap();
        let emm = emmeans(&fit, "f").unwrap();
        for (e, m) in emm.iter().zip(&means) {
            prop_assert!((e.estimate - m).abs() <= 1e-9);
        }
        let h = [Hypothesis::new("0<1", "l0", "l1"), Hypothesis::new("1<0", "l1", "l0")];
        let c = pairwise_contrasts(&fit, "f", &h).unwrap();
        prop_assert!((c[0].p_value + c[1].p_value - 1.0).abs() <= 1e-12);
        prop_assert!(c.iter().all(|r| (0.0..=1.0).contains(&r.p_value)));
    }
}
