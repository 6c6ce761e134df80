//! Regression data: grouped binomial observations of a single predictor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grouped binomial data for the 9-aminoacridine mutagenicity assay
/// (LaVelle, 1986): log-dose, revertant count, plates.
pub const LAVELLE_CSV: &str = include_str!("../data/lavelle.csv");

/// One design point: `successes` out of `trials` at predictor value `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Observation {
    pub fn new(x: f64, successes: u64, trials: u64) -> Result<Self> {
        Self::validated(x, successes, trials, 0)
    }

    fn validated(x: f64, successes: u64, trials: u64, line: usize) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Validation { line, message: format!("x = {x} is not finite") });
        }
        if trials == 0 {
            return Err(Error::Validation { line, message: "trials must be positive".into() });
        }
        if successes > trials {
            return Err(Error::Validation {
                line,
                message: format!("successes ({successes}) exceed trials ({trials})"),
            });
        }
        Ok(Self { x, successes, trials })
    }

    pub fn failures(&self) -> u64 {
        self.trials - self.successes
    }

    /// The predictor vector `(1, x)`.
    pub fn predictor(&self) -> PredictorVector {
        PredictorVector::new(self.x)
    }
}

/// `(1, x)`: the row of the design matrix for a single predictor value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorVector([f64; 2]);

impl PredictorVector {
    pub fn new(x: f64) -> Self {
        Self([1.0, x])
    }

    pub fn x(&self) -> f64 {
        self.0[1]
    }

    pub fn as_array(&self) -> [f64; 2] {
        self.0
    }
}

/// Column layout of an input CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    /// `x,y` with `y` in {0, 1}.
    Bernoulli,
    /// `x,successes,trials`.
    Binomial,
}

impl Schema {
    fn header(self) -> &'static [&'static str] {
        match self {
            Schema::Bernoulli => &["x", "y"],
            Schema::Binomial => &["x", "successes", "trials"],
        }
    }
}

impl std::str::FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bernoulli" => Ok(Schema::Bernoulli),
            "binomial" => Ok(Schema::Binomial),
            other => Err(Error::InvalidInput(format!("unknown schema '{other}'"))),
        }
    }
}

/// A validated dataset. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    observations: Vec<Observation>,
}

impl Dataset {
    /// Builds a dataset, rejecting designs with fewer than two distinct `x`.
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.len() < 2 {
            return Err(Error::DegenerateDesign(format!("need at least 2 observations, got {}", observations.len())));
        }
        let first = observations[0].x;
        if observations.iter().all(|o| o.x == first) {
            return Err(Error::DegenerateDesign(
                "all observations share the same x; the information matrix is singular".into(),
            ));
        }
        Ok(Self { observations })
    }

    /// Bernoulli outcomes: each `(x, y)` becomes a single-trial observation.
    pub fn from_bernoulli(x: &[f64], y: &[bool]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!("x has {} values but y has {}", x.len(), y.len())));
        }
        let obs = x.iter().zip(y).map(|(&x, &y)| Observation::new(x, y as u64, 1)).collect::<Result<Vec<_>>>()?;
        Self::new(obs)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn total_trials(&self) -> u64 {
        self.observations.iter().map(|o| o.trials).sum()
    }

    pub fn total_successes(&self) -> u64 {
        self.observations.iter().map(|o| o.successes).sum()
    }

    /// Smallest and largest predictor value.
    pub fn x_range(&self) -> (f64, f64) {
        self.observations.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o.x), hi.max(o.x)))
    }

    /// Writes the dataset in the `x,successes,trials` layout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,successes,trials\n");
        for o in &self.observations {
            out.push_str(&format!("{},{},{}\n", o.x, o.successes, o.trials));
        }
        out
    }
}

/// Parses CSV text in the given schema. Line numbers in errors are 1-based
/// and count the header.
pub fn parse_dataset(text: &str, schema: Schema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let expected = schema.header();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Parse { line: 1, message: "missing header row".into() });
    }
    if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != *e) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header '{}', found '{}'",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let field = |i: usize, name: &str| -> Result<&str> {
            record
                .get(i)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Parse { line, message: format!("missing field '{name}'") })
        };
        let x: f64 = field(0, "x")?
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("cannot parse x from '{}'", &record[0]) })?;
        let obs = match schema {
            Schema::Bernoulli => {
                let y = match field(1, "y")? {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::Validation { line, message: format!("y must be 0 or 1, found '{other}'") })
                    }
                };
                Observation::validated(x, y, 1, line)?
            }
            Schema::Binomial => {
                let count = |i: usize, name: &str| -> Result<u64> {
                    let raw = field(i, name)?;
                    raw.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("cannot parse {name} from '{raw}' as a nonnegative integer"),
                    })
                };
                Observation::validated(x, count(1, "successes")?, count(2, "trials")?, line)?
            }
        };
        observations.push(obs);
    }
    Dataset::new(observations)
}

/// The six-dose mutagenicity data set (576 trials in total).
pub fn bundled_lavelle_dataset() -> Dataset {
    parse_dataset(LAVELLE_CSV, Schema::Binomial).expect("bundled dataset is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_grouped_rows() {
        let text = "x,successes,trials\n-1.374,7,96\n-0.223,28,96\n0.875,64,96\n2.079,54,96\n3.178,81,96\n4.382,96,96";
        let d = parse_dataset(text, Schema::Binomial).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d, bundled_lavelle_dataset());
    }

    #[test]
    fn bernoulli_rows_become_single_trials() {
        let d = parse_dataset("x,y\n0.0,1\n1.0,0", Schema::Bernoulli).unwrap();
        assert_eq!(
            d.observations(),
            &[Observation { x: 0.0, successes: 1, trials: 1 }, Observation { x: 1.0, successes: 0, trials: 1 }]
        );
    }

    #[test]
    fn successes_exceeding_trials() {
        let err = parse_dataset("x,successes,trials\n0,5,3", Schema::Binomial).unwrap_err();
        assert!(matches!(err, Error::Validation { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse_dataset("x,successes,trials\n0,1,3\n1,abc,3\n", Schema::Binomial).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_dataset("x,y\n0,1\n1,2\n", Schema::Bernoulli).unwrap_err();
        assert!(matches!(err, Error::Validation { line: 3, .. }), "{err:?}");
        let err = parse_dataset("x,y\n0,1\nnan,0\n", Schema::Bernoulli).unwrap_err();
        assert!(matches!(err, Error::Validation { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn degenerate_designs() {
        let err = parse_dataset("x,y\n1.0,1\n1.0,0\n", Schema::Bernoulli).unwrap_err();
        assert!(matches!(err, Error::DegenerateDesign(_)));
        let err = parse_dataset("x,y\n1.0,1\n", Schema::Bernoulli).unwrap_err();
        assert!(matches!(err, Error::DegenerateDesign(_)));
        let err = parse_dataset("", Schema::Bernoulli).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn wrong_header() {
        let err = parse_dataset("x,y\n0,1\n1,0\n", Schema::Binomial).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn duplicate_x_rows_are_kept() {
        let d = parse_dataset("x,y\n0,1\n0,0\n1,1\n", Schema::Bernoulli).unwrap();
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn lavelle_summary() {
        let d = bundled_lavelle_dataset();
        assert_eq!(d.observations()[0], Observation { x: -1.374, successes: 7, trials: 96 });
        assert_eq!(d.observations()[5], Observation { x: 4.382, successes: 96, trials: 96 });
        assert_eq!(d.total_trials(), 576);
        assert_eq!(d.to_csv(), LAVELLE_CSV);
    }

    #[test]
    fn json_field_names() {
        let d = Dataset::new(vec![
            Observation { x: 0.5, successes: 1, trials: 2 },
            Observation { x: 1.5, successes: 0, trials: 2 },
        ])
        .unwrap();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"observations":[{"x":0.5,"successes":1,"trials":2},{"x":1.5,"successes":0,"trials":2}]}"#);
    }

    fn observation() -> impl Strategy<Value = Observation> {
        (-1e6f64..1e6, 1u64..1000).prop_flat_map(|(x, n)| (Just(x), 0..=n, Just(n))).prop_map(|(x, s, n)| Observation {
            x,
            successes: s,
            trials: n,
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(obs in prop::collection::vec(observation(), 2..40)) {
            prop_assume!(obs.iter().any(|o| o.x != obs[0].x));
            let d = Dataset::new(obs).unwrap();
            let back = parse_dataset(&d.to_csv(), Schema::Binomial).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
