use std::path::Path;

use proptest::prelude::*;
use symclust::core::{ModalValue, SymbolicObject};
use symclust::formats::{object_line, parse_object_line};
use symclust::ingest::aggregate_unit;
use symclust::schema_file::{parse_schema, SchemaFile};

fn schema() -> SchemaFile {
    parse_schema(
        r#"
        [[variables]]
        name = "g"
        categories = ["M", "F", "X"]
        [[variables]]
        name = "age"
        kind = "numeric-binned"
        breaks = [20, 35, 65]
        na_category = true
        [[variables]]
        name = "c"
        categories = ["AT", "SI"]
        share = true
        "#,
        Path::new("s.toml"),
    )
    .unwrap()
}

fn rows() -> impl Strategy<Value = Vec<Vec<Option<String>>>> {
    let row = (
        prop::sample::select(vec!["M", "F", "X"]),
        prop::option::of(0.0f64..100.0),
        prop::sample::select(vec!["AT", "SI"]),
    )
        .prop_map(|(g, age, c)| {
            vec![
                Some(g.to_string()),
                age.map(|a| a.to_string()),
                Some(c.to_string()),
            ]
        });
    prop::collection::vec(row, 1..8)
}

fn any_real() -> impl Strategy<Value = f64> {
    prop_oneof![
        0.0f64..1.0,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #[test]
    fn scaling_the_unit_weight_keeps_p(rows in rows(), c in 0.01f64..100.0) {
        let sf = schema();
        let a = aggregate_unit("u", &rows, &sf, 1.0, None).unwrap();
        let b = aggregate_unit("u", &rows, &sf, c, None).unwrap();
        for (x, y) in a.vars.iter().zip(&b.vars) {
            prop_assert!(((y.n - c * x.n) / y.n).abs() <= 1e-12);
            for j in 0..x.p.len() {
                prop_assert!((x.p[j] - y.p[j]).abs() <= 1e-12);
                prop_assert!((y.f[j] - c * x.f[j]).abs() <= 1e-12 * y.n);
                prop_assert!((y.w[j] - c * x.w[j]).abs() <= 1e-12 * y.w[j]);
            }
            prop_assert!((x.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn object_lines_round_trip_bit_for_bit(
        id in "[a-zA-Z0-9 _\"\\\\-]{0,12}",
        vars in prop::collection::vec(
            prop::collection::vec((any_real(), any_real()), 1..6),
            1..4,
        ),
    ) {
        let x = SymbolicObject::new(
            id,
            vars.into_iter()
                .map(|c| {
                    let (f, w): (Vec<f64>, Vec<f64>) = c.into_iter().unzip();
                    ModalValue::new(f, w)
                })
                .collect(),
        );
        let y = parse_object_line(&object_line(&x)).unwrap();
        prop_assert_eq!(&x.id, &y.id);
        for (a, b) in x.vars.iter().zip(&y.vars) {
            let bits = |v: &[f64]| v.iter().map(|z| z.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(a.n.to_bits(), b.n.to_bits());
            prop_assert_eq!(bits(&a.f), bits(&b.f));
            prop_assert_eq!(bits(&a.w), bits(&b.w));
            prop_assert_eq!(bits(&a.p), bits(&b.p));
        }
    }
}
