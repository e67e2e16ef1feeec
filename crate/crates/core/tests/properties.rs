use fpee::analysis::{self, cutoff, sensitivity, tune};
use fpee::corpus;
use fpee::frontend::{parse, pretty_print};
use fpee::inline::inline_named;
use fpee::models::{load_user_model, taylor_assign_error, ErrorModelSpec, ModelId};
use fpee::precision::{round_to, Precision};
use fpee::runtime::{run_adjoint, run_primal, shadow_actual_error, Inputs, PrecisionSpec, Value};
use fpee::transform::{all_active, transform};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

#[test]
fn corpus_round_trips_through_pretty_printer() {
    for k in corpus::kernels() {
        let once = parse(k.source).unwrap();
        let again = parse(&pretty_print(&once)).unwrap();
        assert_eq!(once, again, "{}", k.name);
        assert_eq!(pretty_print(&once), pretty_print(&again), "{}", k.name);
    }
}

#[test]
fn diagnostics_are_deterministic() {
    let src = "func f(x: real): real { var y: int; y = x; z = q + 1.0; return w; }";
    let a = fpee::frontend::compile(src).unwrap_err();
    let b = fpee::frontend::compile(src).unwrap_err();
    assert_eq!(a, b);
    assert!(!a.diagnostics.is_empty());
}

#[test]
fn all_double_oracle_is_zero_on_corpus() {
    for k in corpus::kernels() {
        let f = k.function();
        for row in k.inputs_sized(3, 8, k.default_size.min(500)) {
            assert_eq!(shadow_actual_error(&f, &row, &PrecisionSpec::all_double()).unwrap(), 0.0, "{}", k.name);
        }
    }
}

#[test]
fn adjoint_runs_are_deterministic() {
    for k in corpus::kernels() {
        let f = k.function();
        let adj = transform(&f, ModelId::ShadowCast, &all_active(&f)).unwrap();
        let row = &k.inputs_sized(1, 2, k.default_size.min(500))[0];
        let mut a = run_adjoint(&adj, row, &PrecisionSpec::all_double(), &ErrorModelSpec::ShadowCast).unwrap();
        let mut b = run_adjoint(&adj, row, &PrecisionSpec::all_double(), &ErrorModelSpec::ShadowCast).unwrap();
        a.stats.wall_time_secs = 0.0;
        b.stats.wall_time_secs = 0.0;
        assert_eq!(a.total_error.to_bits(), b.total_error.to_bits());
        assert_eq!(a, b, "{}", k.name);
    }
}

#[test]
fn user_model_files_match_builtins_on_corpus() {
    let dir = std::env::temp_dir().join(format!("fpee-models-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let taylor = dir.join("taylor.toml");
    let shadow = dir.join("shadow.toml");
    std::fs::write(&taylor, "model = \"taylor-file\"\nexpression = \"eps_m * abs(value) * abs(adjoint)\"\n").unwrap();
    std::fs::write(&shadow, "model = \"shadow-file\"\nexpression = \"abs(adjoint * shadow_delta)\"\n").unwrap();
    let pairs = [
        (ErrorModelSpec::User(load_user_model(&taylor).unwrap()), ErrorModelSpec::Taylor),
        (ErrorModelSpec::User(load_user_model(&shadow).unwrap()), ErrorModelSpec::ShadowCast),
    ];
    for k in corpus::kernels() {
        let f = k.function();
        let rows = k.inputs_sized(2, 6, k.default_size.min(500));
        for (user, builtin) in &pairs {
            let a = analysis::analyze(&f, &rows, &PrecisionSpec::all_double(), user).unwrap();
            let b = analysis::analyze(&f, &rows, &PrecisionSpec::all_double(), builtin).unwrap();
            for (x, y) in a.rows.iter().zip(&b.rows) {
                assert_eq!(x.total_error.to_bits(), y.total_error.to_bits(), "{} {}", k.name, builtin.id());
            }
        }
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn tune_is_deterministic() {
    let k = corpus::get("kmeans_distance").unwrap();
    let f = k.function();
    let rows = k.inputs(50, 12);
    let a = tune(&f, &rows, 1e-6, &ErrorModelSpec::ShadowCast, Precision::Single).unwrap();
    let b = tune(&f, &rows, 1e-6, &ErrorModelSpec::ShadowCast, Precision::Single).unwrap();
    assert_eq!(a, b);
}

#[test]
fn kmeans_tuning_demotes_only_the_data_point() {
    let k = corpus::get("kmeans_distance").unwrap();
    let t = tune(&k.function(), &k.inputs(1000, 5), k.default_threshold, &ErrorModelSpec::ShadowCast, Precision::Single).unwrap();
    assert_eq!(t.demoted, ["attrs"]);
    assert_eq!(t.estimated_error, 0.0);
    assert_eq!(t.actual_error, 0.0);
}

/// A random expression over `x` and `y` with exactly `ops` binary operators.
fn expression(ops: usize) -> BoxedStrategy<String> {
    if ops == 0 {
        return prop_oneof![Just("x".to_string()), Just("y".to_string()), (1..9u8).prop_map(|c| format!("{c}.5"))].boxed();
    }
    (0..ops, prop_oneof![Just("+"), Just("-"), Just("*")], any::<u8>())
        .prop_flat_map(move |(left, op, wrap)| {
            (expression(left), expression(ops - 1 - left)).prop_map(move |(a, b)| {
                let e = format!("({a} {op} {b})");
                match wrap % 4 {
                    0 => format!("sin{e}"),
                    1 => format!("cos{e}"),
                    _ => e,
                }
            })
        })
        .boxed()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn fifty_operator_right_hand_sides(rhs in expression(50), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let src = format!("func g(x: real, y: real): real {{ var z: real; z = {rhs}; return z; }}");
        let f = inline_named(&fpee::frontend::compile(&src).unwrap(), "g").unwrap();
        let adj = transform(&f, ModelId::Taylor, &all_active(&f)).unwrap();
        let row: Inputs = [("x".to_string(), Value::Real(x)), ("y".to_string(), Value::Real(y))].into();
        let r = run_adjoint(&adj, &row, &PrecisionSpec::all_double(), &ErrorModelSpec::Taylor).unwrap();
        let p = run_primal(&f, &row, &PrecisionSpec::all_double()).unwrap();
        prop_assert!(r.stats.tape_empty);
        prop_assert_eq!(r.ret.map(f64::to_bits), p.ret.map(f64::to_bits));
        prop_assert!(r.total_error >= 0.0);
    }
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn taylor_homogeneity_powers_of_two(x in -1e100..1e100f64, xbar in -1e100..1e100f64, e in -60..60i32) {
        let k = 2f64.powi(e);
        for p in [Precision::Half, Precision::Single, Precision::Double] {
            prop_assert_eq!(taylor_assign_error(k * x, xbar, p), k.abs() * taylor_assign_error(x, xbar, p));
        }
    }

    #[test]
    fn taylor_homogeneity_within_one_ulp(x in -1e6..1e6f64, xbar in -1e6..1e6f64, k in -1e3..1e3f64) {
        let a = taylor_assign_error(k * x, xbar, Precision::Single);
        let b = k.abs() * taylor_assign_error(x, xbar, Precision::Single);
        // Each side rounds twice; allow one ulp of the larger.
        prop_assert!((a - b).abs() <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) + f64::MIN_POSITIVE);
    }

    #[test]
    fn double_rounding_is_identity(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(round_to(Precision::Double, x).value.to_bits(), x.to_bits());
    }

    #[test]
    fn single_rounding_matches_cast(x in -1e30..1e30f64) {
        prop_assert_eq!(round_to(Precision::Single, x).value, f64::from(x as f32));
    }

    #[test]
    fn cutoff_monotone_in_threshold(rows in prop::collection::vec(prop::collection::vec(0.0..10.0f64, 3), 0..40), t1 in 0.0..12.0f64, t2 in 0.0..12.0f64) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(cutoff(&rows, hi) <= cutoff(&rows, lo));
        prop_assert!(cutoff(&rows, lo) <= rows.len());
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn ranking_invariant_under_scaling_for_linear_functions(
        c in prop::collection::vec(-4.0..4.0f64, 4),
        x in prop::collection::vec(-8.0..8.0f64, 4),
        k in 0.01..100.0f64,
    ) {
        let src = format!(
            "func lin(x0: real, x1: real, x2: real, x3: real): real {{ return {} * x0 + {} * x1 + {} * x2 + {} * x3; }}",
            c[0], c[1], c[2], c[3]
        );
        let src = src.replace("+ -", "- ");
        let f = inline_named(&fpee::frontend::compile(&src).unwrap(), "lin").unwrap();
        let rank = |scale: f64| {
            let row: Inputs = x.iter().enumerate().map(|(i, v)| (format!("x{i}"), Value::Real(v * scale))).collect();
            let r = sensitivity(&f, &[row], &PrecisionSpec::all_double(), &Default::default()).unwrap();
            let s: Vec<f64> = (0..4).map(|i| r.value(&format!("x{i}")).unwrap()).collect();
            let mut idx: Vec<usize> = (0..4).collect();
            idx.sort_by(|a, b| s[*a].total_cmp(&s[*b]));
            (idx, s)
        };
        let (base, s) = rank(1.0);
        let (scaled, _) = rank(k);
        // Near-ties may legitimately reorder after rounding.
        let distinct = s.iter().enumerate().all(|(i, a)| s.iter().skip(i + 1).all(|b| (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(1e-300)));
        prop_assume!(distinct);
        prop_assert_eq!(base, scaled);
    }
}
