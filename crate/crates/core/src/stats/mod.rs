//! Statistical indicator catalog: ingestion, title search, per-year slices
//! and per-country series.
//!
//! Two CSV files feed a [`Catalog`]:
//!
//! * catalog: `indicator_id,source,title,unit,year_min,year_max`
//! * observations: `indicator_id,country,year,value`
//!
//! The catalog is immutable once loaded. Missing (country, year) cells are
//! simply absent; nothing is zero-filled.

mod countries;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

pub use countries::{country_name, known_country_count};

pub const CATALOG_HEADER: [&str; 6] = ["indicator_id", "source", "title", "unit", "year_min", "year_max"];
pub const OBSERVATIONS_HEADER: [&str; 4] = ["indicator_id", "country", "year", "value"];

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    Malformed { file: String, line: u64, reason: String },
    #[error("{file}:{line}: duplicate key {key}")]
    Duplicate { file: String, line: u64, key: String },
    #[error("unknown indicator `{0}`")]
    NotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Gapminder,
    Worldbank,
    Eurostat,
    Custom,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Gapminder => "gapminder",
            Source::Worldbank => "worldbank",
            Source::Eurostat => "eurostat",
            Source::Custom => "custom",
        }
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gapminder" => Ok(Source::Gapminder),
            "worldbank" => Ok(Source::Worldbank),
            "eurostat" => Ok(Source::Eurostat),
            "custom" => Ok(Source::Custom),
            other => Err(format!("unknown source `{other}`")),
        }
    }
}

/// ISO 3166-1 alpha-3 country code (three uppercase ASCII letters).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountryCode([u8; 3]);

impl CountryCode {
    pub fn as_str(&self) -> &str {
        // constructed only from ASCII uppercase letters
        std::str::from_utf8(&self.0).unwrap()
    }

    /// Display name from the bundled table, falling back to the code itself.
    pub fn display_name(&self) -> &str {
        country_name(self.as_str()).unwrap_or_else(|| self.as_str())
    }
}

impl FromStr for CountryCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() == 3 && bytes.iter().all(u8::is_ascii_uppercase) {
            Ok(CountryCode([bytes[0], bytes[1], bytes[2]]))
        } else {
            Err(format!("bad country code `{s}`"))
        }
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CountryCode({})", self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicator {
    pub id: String,
    pub source: Source,
    pub title: String,
    pub unit: Option<String>,
    pub year_min: i32,
    pub year_max: i32,
}

impl Indicator {
    pub fn contains_year(&self, year: i32) -> bool {
        (self.year_min..=self.year_max).contains(&year)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub indicator_id: String,
    pub country: CountryCode,
    pub year: i32,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceRow<T> {
    pub country: CountryCode,
    pub value: T,
}

/// All countries' values of one indicator for one year, largest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearSlice<T> {
    pub indicator_id: String,
    pub year: i32,
    pub rows: Vec<SliceRow<T>>,
    /// `None` when the slice is empty.
    pub min: Option<T>,
    pub max: Option<T>,
    pub median: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountrySeries<T> {
    pub country: String,
    /// `(year, value)` with strictly increasing years.
    pub points: Vec<(i32, T)>,
}

#[derive(Debug, Clone, Default)]
struct IndicatorData<T> {
    by_year: BTreeMap<i32, Vec<SliceRow<T>>>,
    by_country: BTreeMap<CountryCode, Vec<(i32, T)>>,
    range: Option<(T, T)>,
}

/// Loaded indicators plus their observations, indexed for slice and series
/// lookups.
#[derive(Debug, Clone)]
pub struct Catalog<T> {
    indicators: Vec<Indicator>,
    index: HashMap<String, usize>,
    data: Vec<IndicatorData<T>>,
    observation_count: usize,
}

/// Median of an already sorted (either direction) slice; mean of the middle
/// pair for even lengths.
pub fn median_of_sorted<T: Scalar>(sorted: &[T]) -> Option<T> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    if n % 2 == 1 {
        Some(sorted[n / 2])
    } else {
        Some((sorted[n / 2 - 1] + sorted[n / 2]) / T::two())
    }
}

fn descending<T: Scalar>(a: &SliceRow<T>, b: &SliceRow<T>) -> Ordering {
    b.value.partial_cmp(&a.value).unwrap_or(Ordering::Equal).then_with(|| a.country.cmp(&b.country))
}

pub fn load_statistics<T: Scalar>(
    catalog_path: impl AsRef<Path>,
    observations_path: impl AsRef<Path>,
) -> Result<Catalog<T>, StatsError> {
    let open = |path: &Path| File::open(path).map_err(|source| StatsError::Io { path: path.to_path_buf(), source });
    let catalog_path = catalog_path.as_ref();
    let observations_path = observations_path.as_ref();
    Catalog::from_readers(
        open(catalog_path)?,
        &catalog_path.display().to_string(),
        open(observations_path)?,
        &observations_path.display().to_string(),
    )
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader)
}

fn check_header(
    record: Option<Result<csv::StringRecord, csv::Error>>,
    expected: &[&str],
    file: &str,
) -> Result<(), StatsError> {
    let malformed = |reason: String| StatsError::Malformed { file: file.to_string(), line: 1, reason };
    match record {
        None => Err(malformed("missing header".into())),
        Some(Err(e)) => Err(malformed(e.to_string())),
        Some(Ok(header)) => {
            let got: Vec<&str> = header.iter().map(str::trim).collect();
            let got: Vec<&str> = got.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
            if got != expected {
                Err(malformed(format!("expected header `{}`, got `{}`", expected.join(","), got.join(","))))
            } else {
                Ok(())
            }
        }
    }
}

impl<T: Scalar> Catalog<T> {
    pub fn from_readers<R1: Read, R2: Read>(
        catalog: R1,
        catalog_name: &str,
        observations: R2,
        observations_name: &str,
    ) -> Result<Self, StatsError> {
        let indicators = parse_catalog(catalog, catalog_name)?;
        let mut index = HashMap::with_capacity(indicators.len());
        for (i, ind) in indicators.iter().enumerate() {
            index.insert(ind.id.clone(), i);
        }
        let mut catalog =
            Catalog { data: vec![IndicatorData::default(); indicators.len()], indicators, index, observation_count: 0 };

        let mut reader = csv_reader(observations);
        let mut records = reader.records();
        check_header(records.next(), &OBSERVATIONS_HEADER, observations_name)?;
        let mut cells: Vec<HashMap<(CountryCode, i32), T>> = vec![HashMap::new(); catalog.indicators.len()];
        for record in records {
            let record = record.map_err(|e| StatsError::Malformed {
                file: observations_name.to_string(),
                line: e.position().map_or(0, |p| p.line()),
                reason: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let malformed =
                |reason: String| StatsError::Malformed { file: observations_name.to_string(), line, reason };
            if record.len() == 1 && record[0].trim().is_empty() {
                continue;
            }
            if record.len() != OBSERVATIONS_HEADER.len() {
                return Err(malformed(format!(
                    "expected {} columns, found {}",
                    OBSERVATIONS_HEADER.len(),
                    record.len()
                )));
            }
            let id = record[0].trim();
            let slot = *catalog.index.get(id).ok_or_else(|| malformed(format!("unknown indicator `{id}`")))?;
            let country: CountryCode = record[1].trim().parse().map_err(malformed)?;
            let year: i32 =
                record[2].trim().parse().map_err(|_| malformed(format!("non-integer year `{}`", &record[2])))?;
            let value: T =
                record[3].trim().parse().map_err(|_| malformed(format!("non-numeric value `{}`", &record[3])))?;
            if !value.is_finite() {
                return Err(malformed(format!("non-finite value `{}`", &record[3])));
            }
            let indicator = &catalog.indicators[slot];
            if !indicator.contains_year(year) {
                return Err(malformed(format!(
                    "year {year} outside [{}, {}] of `{id}`",
                    indicator.year_min, indicator.year_max
                )));
            }
            if cells[slot].insert((country, year), value).is_some() {
                return Err(StatsError::Duplicate {
                    file: observations_name.to_string(),
                    line,
                    key: format!("({id}, {country}, {year})"),
                });
            }
        }

        for (slot, cells) in cells.into_iter().enumerate() {
            catalog.observation_count += cells.len();
            let data = &mut catalog.data[slot];
            for ((country, year), value) in cells {
                data.by_year.entry(year).or_default().push(SliceRow { country, value });
                data.by_country.entry(country).or_default().push((year, value));
                data.range = Some(match data.range {
                    None => (value, value),
                    Some((lo, hi)) => (lo.min(value), hi.max(value)),
                });
            }
            for rows in data.by_year.values_mut() {
                rows.sort_by(descending);
            }
            for points in data.by_country.values_mut() {
                points.sort_by_key(|(year, _)| *year);
            }
        }
        Ok(catalog)
    }

    pub fn indicators(&self) -> &[Indicator] {
        &self.indicators
    }

    pub fn indicator(&self, id: &str) -> Option<&Indicator> {
        self.index.get(id).map(|&i| &self.indicators[i])
    }

    pub fn observation_count(&self) -> usize {
        self.observation_count
    }

    fn data(&self, id: &str) -> Result<&IndicatorData<T>, StatsError> {
        self.index.get(id).map(|&i| &self.data[i]).ok_or_else(|| StatsError::NotFound(id.to_string()))
    }

    /// Case-insensitive substring search over titles, best (earliest) match
    /// position first, then title.
    pub fn search_titles(&self, query: &str, limit: usize) -> Vec<&Indicator> {
        let needle = query.trim().to_lowercase();
        if needle.is_empty() || limit == 0 {
            return Vec::new();
        }
        let mut hits: Vec<(usize, &Indicator)> = self
            .indicators
            .iter()
            .filter_map(|ind| ind.title.to_lowercase().find(&needle).map(|pos| (pos, ind)))
            .collect();
        hits.sort_by(|(pa, a), (pb, b)| pa.cmp(pb).then_with(|| a.title.cmp(&b.title)).then_with(|| a.id.cmp(&b.id)));
        hits.into_iter().take(limit).map(|(_, ind)| ind).collect()
    }

    pub fn year_slice(&self, id: &str, year: i32) -> Result<YearSlice<T>, StatsError> {
        let data = self.data(id)?;
        let rows = data.by_year.get(&year).cloned().unwrap_or_default();
        let values: Vec<T> = rows.iter().map(|r| r.value).collect();
        Ok(YearSlice {
            indicator_id: id.to_string(),
            year,
            min: values.last().copied(),
            max: values.first().copied(),
            median: median_of_sorted(&values),
            rows,
        })
    }

    /// One series per requested country, in request order. Unknown countries
    /// yield an empty series.
    pub fn country_series<S: AsRef<str>>(
        &self,
        id: &str,
        countries: &[S],
    ) -> Result<Vec<CountrySeries<T>>, StatsError> {
        let data = self.data(id)?;
        Ok(countries
            .iter()
            .map(|c| {
                let country = c.as_ref().trim();
                let points = country
                    .parse::<CountryCode>()
                    .ok()
                    .and_then(|code| data.by_country.get(&code))
                    .cloned()
                    .unwrap_or_default();
                CountrySeries { country: country.to_string(), points }
            })
            .collect())
    }

    /// Smallest and largest value of an indicator across all years.
    pub fn value_range(&self, id: &str) -> Result<Option<(T, T)>, StatsError> {
        Ok(self.data(id)?.range)
    }

    pub fn years_with_data(&self, id: &str) -> Result<Vec<i32>, StatsError> {
        Ok(self.data(id)?.by_year.keys().copied().collect())
    }

    /// Canonical catalog CSV: indicators sorted by id.
    pub fn write_catalog_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(CATALOG_HEADER)?;
        let mut sorted: Vec<&Indicator> = self.indicators.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        for ind in sorted {
            out.write_record([
                ind.id.as_str(),
                ind.source.as_str(),
                ind.title.as_str(),
                ind.unit.as_deref().unwrap_or(""),
                &ind.year_min.to_string(),
                &ind.year_max.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Canonical observations CSV: sorted by (indicator, country, year).
    pub fn write_observations_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(OBSERVATIONS_HEADER)?;
        let mut order: Vec<usize> = (0..self.indicators.len()).collect();
        order.sort_by(|&a, &b| self.indicators[a].id.cmp(&self.indicators[b].id));
        for slot in order {
            let id = &self.indicators[slot].id;
            for (country, points) in &self.data[slot].by_country {
                for (year, value) in points {
                    out.write_record([id.as_str(), country.as_str(), &year.to_string(), &value.to_string()])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn observations(&self) -> impl Iterator<Item = Observation<T>> + '_ {
        self.indicators.iter().zip(&self.data).flat_map(|(ind, data)| {
            data.by_country.iter().flat_map(move |(country, points)| {
                points.iter().map(move |&(year, value)| Observation {
                    indicator_id: ind.id.clone(),
                    country: *country,
                    year,
                    value,
                })
            })
        })
    }
}

fn parse_catalog<R: Read>(reader: R, file: &str) -> Result<Vec<Indicator>, StatsError> {
    let mut reader = csv_reader(reader);
    let mut records = reader.records();
    check_header(records.next(), &CATALOG_HEADER, file)?;
    let mut indicators: Vec<Indicator> = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for record in records {
        let record = record.map_err(|e| StatsError::Malformed {
            file: file.to_string(),
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |reason: String| StatsError::Malformed { file: file.to_string(), line, reason };
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != CATALOG_HEADER.len() {
            return Err(malformed(format!("expected {} columns, found {}", CATALOG_HEADER.len(), record.len())));
        }
        let id = record[0].trim().to_string();
        if id.is_empty() {
            return Err(malformed("empty indicator_id".into()));
        }
        let source: Source = record[1].parse().map_err(malformed)?;
        let title = record[2].trim().to_string();
        if title.is_empty() {
            return Err(malformed("empty title".into()));
        }
        let unit = Some(record[3].trim().to_string()).filter(|u| !u.is_empty());
        let year = |i: usize| {
            record[i]
                .trim()
                .parse::<i32>()
                .map_err(|_| malformed(format!("non-integer {} `{}`", CATALOG_HEADER[i], &record[i])))
        };
        let (year_min, year_max) = (year(4)?, year(5)?);
        if year_min > year_max {
            return Err(malformed(format!("year_min {year_min} > year_max {year_max}")));
        }
        if seen.insert(id.clone(), line).is_some() {
            return Err(StatsError::Duplicate { file: file.to_string(), line, key: id });
        }
        indicators.push(Indicator { id, source, title, unit, year_min, year_max });
    }
    Ok(indicators)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CATALOG: &str = "indicator_id,source,title,unit,year_min,year_max\n\
        tfr,gapminder,Children per woman (total fertility),children,1800,2013\n\
        quake,gapminder,Earthquake - affected annual number,,1970,2008\n";

    fn load(observations: &str) -> Result<Catalog<f64>, StatsError> {
        Catalog::from_readers(CATALOG.as_bytes(), "catalog.csv", observations.as_bytes(), "obs.csv")
    }

    fn obs(rows: &[(&str, &str, i32, f64)]) -> String {
        let mut s = String::from("indicator_id,country,year,value\n");
        for (id, c, y, v) in rows {
            s.push_str(&format!("{id},{c},{y},{v}\n"));
        }
        s
    }

    #[test]
    fn empty_observations_keep_indicators() {
        let cat = load("indicator_id,country,year,value\n").unwrap();
        assert_eq!(cat.indicators().len(), 2);
        assert_eq!(cat.observation_count(), 0);
        assert_eq!(cat.search_titles("fertility", 10)[0].id, "tfr");
    }

    #[test]
    fn non_numeric_value_reports_line() {
        let err = load("indicator_id,country,year,value\ntfr,GBR,1900,2.5\ntfr,USA,1900,abc\n").unwrap_err();
        match err {
            StatsError::Malformed { file, line, reason } => {
                assert_eq!(file, "obs.csv");
                assert_eq!(line, 3);
                assert!(reason.contains("abc"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let cases = [
            "indicator_id,country,year,value\ntfr,GBR,1900\n",
            "indicator_id,country,year,value\ntfr,gbr,1900,1\n",
            "indicator_id,country,year,value\ntfr,UK,1900,1\n",
            "indicator_id,country,year,value\ntfr,GBR,1700,1\n",
            "indicator_id,country,year,value\ntfr,GBR,1900,NaN\n",
            "indicator_id,country,year,value\ntfr,GBR,1900,inf\n",
            "indicator_id,country,year,value\nnope,GBR,1900,1\n",
            "indicator,country,year,value\ntfr,GBR,1900,1\n",
        ];
        for case in cases {
            assert!(matches!(load(case), Err(StatsError::Malformed { .. })), "{case}");
        }
    }

    #[test]
    fn duplicate_observation_rejected() {
        let err = load(&obs(&[("tfr", "GBR", 1900, 1.0), ("tfr", "GBR", 1900, 2.0)])).unwrap_err();
        assert!(matches!(err, StatsError::Duplicate { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn duplicate_indicator_and_bad_range_rejected() {
        let dup = "indicator_id,source,title,unit,year_min,year_max\na,custom,A,,1,2\na,custom,B,,1,2\n";
        let err =
            Catalog::<f64>::from_readers(dup.as_bytes(), "c", "indicator_id,country,year,value\n".as_bytes(), "o")
                .unwrap_err();
        assert!(matches!(err, StatsError::Duplicate { .. }));
        let inverted = "indicator_id,source,title,unit,year_min,year_max\na,custom,A,,5,2\n";
        assert!(Catalog::<f64>::from_readers(
            inverted.as_bytes(),
            "c",
            "indicator_id,country,year,value\n".as_bytes(),
            "o"
        )
        .is_err());
        let untitled = "indicator_id,source,title,unit,year_min,year_max\na,custom, ,,1,2\n";
        assert!(Catalog::<f64>::from_readers(
            untitled.as_bytes(),
            "c",
            "indicator_id,country,year,value\n".as_bytes(),
            "o"
        )
        .is_err());
        let bad_source = "indicator_id,source,title,unit,year_min,year_max\na,imf,A,,1,2\n";
        assert!(Catalog::<f64>::from_readers(
            bad_source.as_bytes(),
            "c",
            "indicator_id,country,year,value\n".as_bytes(),
            "o"
        )
        .is_err());
    }

    #[test]
    fn search_orders_by_position_then_title() {
        let cat = load("indicator_id,country,year,value\n").unwrap();
        assert!(cat.search_titles("", 5).is_empty());
        assert!(cat.search_titles("zzz-no-match", 5).is_empty());
        let hits: Vec<&str> = cat.search_titles("E", 5).iter().map(|i| i.id.as_str()).collect();
        // "Earthquake..." matches at 0, "Children per woman..." at 7
        assert_eq!(hits, ["quake", "tfr"]);
        assert_eq!(cat.search_titles("e", 1).len(), 1);
        assert_eq!(cat.search_titles("FERT", 5)[0].title, "Children per woman (total fertility)");
    }

    #[test]
    fn slice_sorted_descending_with_median() {
        let cat =
            load(&obs(&[("tfr", "AAA", 1900, 2.0), ("tfr", "BBB", 1900, 5.0), ("tfr", "CCC", 1900, 3.0)])).unwrap();
        let slice = cat.year_slice("tfr", 1900).unwrap();
        let order: Vec<&str> = slice.rows.iter().map(|r| r.country.as_str()).collect();
        assert_eq!(order, ["BBB", "CCC", "AAA"]);
        assert_eq!(slice.median, Some(3.0));
        assert_eq!((slice.min, slice.max), (Some(2.0), Some(5.0)));
    }

    #[test]
    fn even_median_and_singleton() {
        let cat = load(&obs(&[
            ("tfr", "AAA", 1900, 1.0),
            ("tfr", "BBB", 1900, 2.0),
            ("tfr", "CCC", 1900, 3.0),
            ("tfr", "DDD", 1900, 4.0),
            ("tfr", "GBR", 1901, 7.5),
        ]))
        .unwrap();
        assert_eq!(cat.year_slice("tfr", 1900).unwrap().median, Some(2.5));
        assert_eq!(cat.year_slice("tfr", 1901).unwrap().median, Some(7.5));
    }

    #[test]
    fn ties_break_by_country() {
        let cat = load(&obs(&[("tfr", "ZZZ", 1900, 1.0), ("tfr", "AAA", 1900, 1.0)])).unwrap();
        let slice = cat.year_slice("tfr", 1900).unwrap();
        let order: Vec<&str> = slice.rows.iter().map(|r| r.country.as_str()).collect();
        assert_eq!(order, ["AAA", "ZZZ"]);
    }

    #[test]
    fn slice_errors_and_empty_years() {
        let cat = load(&obs(&[("tfr", "GBR", 1900, 1.0)])).unwrap();
        assert!(matches!(cat.year_slice("missing", 1900), Err(StatsError::NotFound(_))));
        let empty = cat.year_slice("tfr", 1500).unwrap();
        assert!(empty.rows.is_empty());
        assert_eq!(empty.median, None);
    }

    #[test]
    fn series_twenty_points_ascending() {
        let rows: Vec<(&str, &str, i32, f64)> =
            (1921..=1940).rev().map(|y| ("tfr", "GBR", y, f64::from(y - 1900) / 10.0)).collect();
        let cat = load(&obs(&rows)).unwrap();
        let series = cat.country_series("tfr", &["GBR", "FRA", "nonsense"]).unwrap();
        assert_eq!(series[0].points.len(), 20);
        assert!(series[0].points.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(series[0].points[0], (1921, 2.1));
        assert!(series[1].points.is_empty());
        assert!(series[2].points.is_empty());
        assert!(cat.country_series::<&str>("tfr", &[]).unwrap().is_empty());
        assert!(cat.country_series("nope", &["GBR"]).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let cat: Catalog<f32> =
            Catalog::from_readers(CATALOG.as_bytes(), "c", obs(&[("tfr", "GBR", 1900, 1.5)]).as_bytes(), "o").unwrap();
        assert_eq!(cat.year_slice("tfr", 1900).unwrap().median, Some(1.5f32));
    }

    #[test]
    fn canonical_round_trip() {
        let cat =
            load(&obs(&[("tfr", "USA", 1901, 0.1), ("tfr", "GBR", 1900, 3.25), ("quake", "JPN", 1995, 1e-7)])).unwrap();
        let (mut c1, mut o1) = (Vec::new(), Vec::new());
        cat.write_catalog_csv(&mut c1).unwrap();
        cat.write_observations_csv(&mut o1).unwrap();
        let again = Catalog::<f64>::from_readers(&c1[..], "c", &o1[..], "o").unwrap();
        let (mut c2, mut o2) = (Vec::new(), Vec::new());
        again.write_catalog_csv(&mut c2).unwrap();
        again.write_observations_csv(&mut o2).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(o1, o2);
        assert_eq!(again.observation_count(), 3);
    }
}
