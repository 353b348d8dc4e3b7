use std::collections::BTreeMap;

use proptest::prelude::*;
use statlink_core::stats::{load_statistics, Catalog, StatsError};

const CATALOG: &str = "indicator_id,source,title,unit,year_min,year_max\n\
x,custom,Random indicator,,1900,1950\n\
tfr,gapminder,Children per woman (total fertility),children per woman,1800,2013\n";

fn country(i: usize) -> String {
    let a = b'A' + (i / 26 / 26 % 26) as u8;
    let b = b'A' + (i / 26 % 26) as u8;
    let c = b'A' + (i % 26) as u8;
    String::from_utf8(vec![a, b, c]).unwrap()
}

/// Observations as (country index, year, value) triples, unique per (country, year).
fn observations() -> impl Strategy<Value = BTreeMap<(usize, i32), f64>> {
    let value = prop_oneof![(-50i32..50).prop_map(f64::from), -1.0e6f64..1.0e6];
    proptest::collection::btree_map((0usize..40, 1900i32..=1950), value, 0..300)
}

fn observations_csv(obs: &BTreeMap<(usize, i32), f64>) -> String {
    let mut out = String::from("indicator_id,country,year,value\n");
    for ((c, y), v) in obs {
        out.push_str(&format!("x,{},{y},{v:?}\n", country(*c)));
    }
    out
}

fn load(obs: &BTreeMap<(usize, i32), f64>) -> Catalog<f64> {
    Catalog::from_readers(CATALOG.as_bytes(), "catalog.csv", observations_csv(obs).as_bytes(), "observations.csv")
        .unwrap()
}

fn median_oracle(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

proptest! {
    #[test]
    fn slices_are_sorted_and_median_matches(obs in observations(), year in 1895i32..1955) {
        let cat = load(&obs);
        let slice = cat.year_slice("x", year).unwrap();
        let expected: Vec<f64> = obs.iter().filter(|((_, y), _)| *y == year).map(|(_, v)| *v).collect();
        prop_assert_eq!(slice.rows.len(), expected.len());
        for pair in slice.rows.windows(2) {
            prop_assert!(pair[0].value > pair[1].value
                || (pair[0].value == pair[1].value && pair[0].country < pair[1].country));
        }
        prop_assert_eq!(slice.median, median_oracle(&expected));
        prop_assert_eq!(slice.min, expected.iter().copied().reduce(f64::min));
        prop_assert_eq!(slice.max, expected.iter().copied().reduce(f64::max));
    }

    #[test]
    fn series_years_strictly_increase(obs in observations()) {
        let cat = load(&obs);
        let codes: Vec<String> = (0..40).map(country).collect();
        let series = cat.country_series("x", &codes).unwrap();
        prop_assert_eq!(series.len(), codes.len());
        for s in &series {
            prop_assert!(s.points.windows(2).all(|p| p[0].0 < p[1].0));
            let idx = codes.iter().position(|c| *c == s.country).unwrap();
            let expected = obs.keys().filter(|(c, _)| *c == idx).count();
            prop_assert_eq!(s.points.len(), expected);
        }
    }

    #[test]
    fn catalog_round_trips(obs in observations()) {
        let cat = load(&obs);
        let (mut c1, mut o1) = (Vec::new(), Vec::new());
        cat.write_catalog_csv(&mut c1).unwrap();
        cat.write_observations_csv(&mut o1).unwrap();
        let again: Catalog<f64> = Catalog::from_readers(c1.as_slice(), "catalog.csv", o1.as_slice(), "observations.csv").unwrap();
        let (mut c2, mut o2) = (Vec::new(), Vec::new());
        again.write_catalog_csv(&mut c2).unwrap();
        again.write_observations_csv(&mut o2).unwrap();
        prop_assert_eq!(c1, c2);
        prop_assert_eq!(o1, o2);
        let sorted = |c: &Catalog<f64>| {
            let mut obs: Vec<_> = c.observations().map(|o| (o.indicator_id, o.country, o.year, o.value)).collect();
            obs.sort_by(|a, b| (&a.0, a.1, a.2).cmp(&(&b.0, b.1, b.2)));
            obs
        };
        prop_assert_eq!(sorted(&again), sorted(&cat));
        for ind in cat.indicators() {
            prop_assert_eq!(again.indicator(&ind.id), Some(ind));
        }
    }
}

#[test]
fn twenty_year_series() {
    let mut obs = String::from("indicator_id,country,year,value\n");
    for y in 1921..=1940 {
        obs.push_str(&format!("tfr,GBR,{y},{}\n", 2.0 + f64::from(y - 1921) / 100.0));
    }
    let cat: Catalog<f64> =
        Catalog::from_readers(CATALOG.as_bytes(), "catalog.csv", obs.as_bytes(), "observations.csv").unwrap();
    let series = cat.country_series("tfr", &["GBR", "ATL"]).unwrap();
    assert_eq!(series[0].points.len(), 20);
    assert_eq!(series[0].points.first().unwrap().0, 1921);
    assert!(series[1].points.is_empty());
    assert!(cat.country_series::<&str>("tfr", &[]).unwrap().is_empty());
    assert!(matches!(cat.country_series("nope", &["GBR"]), Err(StatsError::NotFound(_))));
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("catalog.csv");
    let observations = dir.path().join("observations.csv");
    std::fs::write(&catalog, CATALOG).unwrap();
    std::fs::write(&observations, "indicator_id,country,year,value\n").unwrap();
    let cat: Catalog<f64> = load_statistics(&catalog, &observations).unwrap();
    assert_eq!(cat.indicators().len(), 2);
    assert_eq!(cat.observation_count(), 0);

    std::fs::write(&observations, "indicator_id,country,year,value\ntfr,GBR,1921,abc\n").unwrap();
    let err = load_statistics::<f64>(&catalog, &observations).unwrap_err();
    assert!(matches!(err, StatsError::Malformed { line: 2, .. }), "{err:?}");
    assert!(err.to_string().contains("observations.csv"));
}
