use confound_kit::hypotheses::{holds_numeric, impose, Hypothesis};
use confound_kit::joint::{
    joint_from_model1, joint_from_model2, joint_from_model3, Event, Model1Params, Model2Params,
    Model3Params, Param, Response,
};
use confound_kit::measures::{
    check_lemma1, classify_covariate, confounding_bias, standardized_proportion,
};
use confound_kit::strata_tables::{
    analyze_counts, coarsen, counts_to_joint, CoarseningMap, ResponseType, StratifiedCounts,
};
use confound_kit::theorems::{clauses, sample_rng};
use confound_kit::{Exposure, Model, ModelParams, Rational, Scalar};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_ratio(n, 1000)
}

fn grid() -> impl Strategy<Value = i64> {
    10i64..=990
}

fn unit() -> impl Strategy<Value = f64> {
    0.01f64..0.99
}

fn response<T: Scalar>(v: [T; 4]) -> Response<T> {
    let [b0, b1, u0, u1] = v;
    Response { b0, b1, u0, u1 }
}

fn float_params() -> impl Strategy<Value = ModelParams<f64>> {
    (0u8..3, prop::array::uniform7(unit())).prop_map(|(m, v)| {
        let r = response([v[3], v[4], v[5], v[6]]);
        match m {
            0 => ModelParams::Model1(Model1Params { t: v[0], a0: v[1], a1: v[2], response: r }),
            1 => ModelParams::Model2(Model2Params { a: v[0], c0: v[1], c1: v[2], response: r }),
            _ => ModelParams::Model3(Model3Params { a: v[0], t: v[1], response: r }),
        }
    })
}

fn cond(j: &confound_kit::JointDistribution<Rational>, event: Event, given: Event) -> Rational {
    j.conditional_prob(&event, &given).unwrap()
}

proptest! {
    #[test]
    fn model1_conditionals_round_trip(v in prop::array::uniform7(grid())) {
        let p = Model1Params { t: q(v[0]), a0: q(v[1]), a1: q(v[2]), response: response([q(v[3]), q(v[4]), q(v[5]), q(v[6])]) };
        let j = joint_from_model1(&p).unwrap();
        let any = Event::any();
        let e = any.exposure(Exposure::Exposed);
        let ebar = any.exposure(Exposure::Unexposed);
        prop_assert_eq!(j.prob(&any.covariate(1)), p.t.clone());
        prop_assert_eq!(cond(&j, e, any.covariate(0)), p.a0.clone());
        prop_assert_eq!(cond(&j, e, any.covariate(1)), p.a1.clone());
        prop_assert_eq!(cond(&j, any.outcome(1), ebar.covariate(0)), p.response.b0.clone());
        prop_assert_eq!(cond(&j, any.outcome(1), ebar.covariate(1)), p.response.b1.clone());
        prop_assert_eq!(cond(&j, any.outcome(1), e.covariate(0)), p.response.u0.clone());
        prop_assert_eq!(cond(&j, any.outcome(1), e.covariate(1)), p.response.u1.clone());
    }

    #[test]
    fn model2_conditionals_round_trip(v in prop::array::uniform7(grid())) {
        let p = Model2Params { a: q(v[0]), c0: q(v[1]), c1: q(v[2]), response: response([q(v[3]), q(v[4]), q(v[5]), q(v[6])]) };
        let j = joint_from_model2(&p).unwrap();
        let any = Event::any();
        let e = any.exposure(Exposure::Exposed);
        let ebar = any.exposure(Exposure::Unexposed);
        prop_assert_eq!(j.prob(&e), p.a.clone());
        prop_assert_eq!(cond(&j, any.covariate(1), e), p.c1.clone());
        prop_assert_eq!(cond(&j, any.covariate(1), ebar), p.c0.clone());
        prop_assert_eq!(cond(&j, any.outcome(1), ebar.covariate(1)), p.response.b1.clone());
        prop_assert_eq!(cond(&j, any.outcome(1), e.covariate(0)), p.response.u0.clone());
    }

    #[test]
    fn float_round_trip_within_1e_14(v in prop::array::uniform7(unit())) {
        let p = Model1Params { t: v[0], a0: v[1], a1: v[2], response: response([v[3], v[4], v[5], v[6]]) };
        let j = joint_from_model1(&p).unwrap();
        let any = Event::any();
        let e = any.exposure(Exposure::Exposed);
        let back = j.conditional_prob(&e, &any.covariate(1)).unwrap();
        prop_assert!((back - p.a1).abs() <= 1e-14);
        let back = j.conditional_prob(&any.outcome(1), &e.covariate(0)).unwrap();
        prop_assert!((back - p.response.u0).abs() <= 1e-14);
    }

    #[test]
    fn model3_is_the_shared_special_case(v in prop::array::uniform6(grid())) {
        let r = response([q(v[2]), q(v[3]), q(v[4]), q(v[5])]);
        let (a, t) = (q(v[0]), q(v[1]));
        let m3 = joint_from_model3(&Model3Params { a: a.clone(), t: t.clone(), response: r.clone() }).unwrap();
        let m1 = joint_from_model1(&Model1Params { t: t.clone(), a0: a.clone(), a1: a.clone(), response: r.clone() }).unwrap();
        let m2 = joint_from_model2(&Model2Params { a, c0: t.clone(), c1: t, response: r }).unwrap();
        prop_assert_eq!(m3.cells(), m1.cells());
        prop_assert_eq!(m3.cells(), m2.cells());
    }

    #[test]
    fn exact_joints_sum_to_one(v in prop::array::uniform7(grid()), m in 0u8..3) {
        let r = response([q(v[3]), q(v[4]), q(v[5]), q(v[6])]);
        let params = match m {
            0 => ModelParams::Model1(Model1Params { t: q(v[0]), a0: q(v[1]), a1: q(v[2]), response: r }),
            1 => ModelParams::Model2(Model2Params { a: q(v[0]), c0: q(v[1]), c1: q(v[2]), response: r }),
            _ => ModelParams::Model3(Model3Params { a: q(v[0]), t: q(v[1]), response: r }),
        };
        let sum = params.to_joint().unwrap().cells().iter().cloned().fold(Rational::from_ratio(0, 1), |s, c| s + c);
        prop_assert_eq!(sum, Rational::from_ratio(1, 1));
    }

    #[test]
    fn verdicts_are_exclusive(params in float_params()) {
        let j = params.to_joint().unwrap();
        prop_assert!(check_lemma1(&j, &1e-9).unwrap());
    }

    #[test]
    fn relabeling_the_covariate_changes_nothing(params in float_params()) {
        let j = params.to_joint().unwrap();
        let s = j.swap_covariate();
        prop_assert!((confounding_bias(&j).unwrap() - confounding_bias(&s).unwrap()).abs() < 1e-15);
        prop_assert!((standardized_proportion(&j).unwrap() - standardized_proportion(&s).unwrap()).abs() < 1e-15);
        prop_assert_eq!(classify_covariate(&j, &1e-9).unwrap().verdict, classify_covariate(&s, &1e-9).unwrap().verdict);
    }

    #[test]
    fn coarsening_preserves_totals(cells in prop::collection::vec(0u64..50, 32), assign in prop::array::uniform4(0u8..2)) {
        let mut counts = StratifiedCounts::new(["1", "2", "3", "4"]);
        let mut it = cells.into_iter();
        for k in 0..4 {
            for t in ResponseType::ALL {
                for x in Exposure::BOTH {
                    counts.set(t, x, k, it.next().unwrap());
                }
            }
        }
        let mut map = CoarseningMap::new();
        for (k, g) in assign.iter().enumerate() {
            map = map.assign((k + 1).to_string(), *g).unwrap();
        }
        let coarse = coarsen(&counts, &map).unwrap();
        prop_assert_eq!(coarse.total(), counts.total());
        for x in Exposure::BOTH {
            prop_assert_eq!(coarse.arm_total(x), counts.arm_total(x));
        }
    }

    #[test]
    fn table_and_joint_routes_agree(cells in prop::collection::vec(0u64..8, 16)) {
        let mut counts = StratifiedCounts::new(["lo", "hi"]);
        let mut it = cells.into_iter();
        for k in 0..2 {
            for t in ResponseType::ALL {
                for x in Exposure::BOTH {
                    counts.set(t, x, k, it.next().unwrap());
                }
            }
        }
        let direct = analyze_counts(&counts);
        let bridged = counts_to_joint(&counts).and_then(|j| classify_covariate(&j, &Rational::from_ratio(0, 1)));
        match (direct, bridged) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }
}

#[test]
fn imposed_hypotheses_hold() {
    for clause in clauses() {
        for i in 0..2_000 {
            let mut rng = sample_rng(3, i);
            let base = ModelParams::<f64>::sample(clause.model, &mut rng);
            let params = impose(&base, &clause.conditions, &mut rng).unwrap();
            let j = params.to_joint().unwrap();
            for h in clause.conditions.iter() {
                assert!(holds_numeric(&j, h, &1e-10).unwrap(), "{clause}: {h} fails on draw {i}");
            }
        }
    }
}

#[test]
fn equality_constraints_touch_only_named_parameters() {
    let named = |h: Hypothesis| -> &'static [Param] {
        match h {
            Hypothesis::H2 => &[Param::U0, Param::B0],
            Hypothesis::H3 => &[Param::U1, Param::B1],
            Hypothesis::H4 => &[Param::A0, Param::A1, Param::C0, Param::C1],
            Hypothesis::H6 => &[Param::B0, Param::B1],
            Hypothesis::H7 => &[Param::U0, Param::U1],
            _ => &[],
        }
    };
    for clause in clauses() {
        if clause.conditions.iter().any(|h| matches!(h, Hypothesis::H1 | Hypothesis::H5)) {
            continue;
        }
        for i in 0..500 {
            let mut rng = sample_rng(5, i);
            let base = ModelParams::<f64>::sample(clause.model, &mut rng);
            let params = impose(&base, &clause.conditions, &mut rng).unwrap();
            for p in clause.model.params() {
                let touched = clause.conditions.iter().any(|h| named(h).contains(&p));
                if !touched {
                    assert_eq!(params.get(p), base.get(p), "{clause}: {p} moved");
                }
            }
        }
    }
}

#[test]
fn independent_model_never_changes_the_unexposed_risk() {
    let model = Model::Independent;
    for i in 0..1_000 {
        let params = ModelParams::<Rational>::sample(model, &mut sample_rng(9, i));
        let j = params.to_joint().unwrap();
        let r = classify_covariate(&j, &Rational::from_ratio(0, 1)).unwrap();
        assert_eq!(r.standardized, r.observed);
    }
}
