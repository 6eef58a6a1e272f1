//! Bivariate sample ingestion and the empirical copula.

use std::fs;
use std::path::Path;

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// A bivariate sample: at least two finite (x, y) observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pairs: Vec<(f64, f64)>,
}

impl SampleSet {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::TooFewSamples {
                need: 2,
                got: pairs.len(),
            });
        }
        for (k, &(x, y)) in pairs.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::Parse {
                    line: k + 1,
                    msg: format!("non-finite observation ({x}, {y})"),
                });
            }
        }
        Ok(SampleSet { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// The same sample with x and y exchanged.
    pub fn swapped(&self) -> SampleSet {
        SampleSet {
            pairs: self.pairs.iter().map(|&(x, y)| (y, x)).collect(),
        }
    }
}

/// Column selection for CSV input: 0-based index or header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    /// Digits parse as an index, anything else as a header name.
    pub fn parse(text: &str) -> Self {
        match text.trim().parse::<usize>() {
            Ok(idx) => ColumnSelector::Index(idx),
            Err(_) => ColumnSelector::Name(text.trim().to_string()),
        }
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn resolve_column(selector: &ColumnSelector, header: Option<&[&str]>) -> Result<usize> {
    match selector {
        ColumnSelector::Index(idx) => Ok(*idx),
        ColumnSelector::Name(name) => header
            .and_then(|fields| fields.iter().position(|f| f == name))
            .ok_or_else(|| Error::ColumnNotFound(name.clone())),
    }
}

/// Load (x, y) pairs from a comma-separated file.
///
/// A header is detected when the first row does not parse as numbers in the
/// selected columns. Missing or malformed fields abort with the 1-based
/// line number.
pub fn load_csv(path: &Path, x_col: &ColumnSelector, y_col: &ColumnSelector) -> Result<SampleSet> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_csv_str(&text, x_col, y_col)
}

pub fn load_csv_str(
    text: &str,
    x_col: &ColumnSelector,
    y_col: &ColumnSelector,
) -> Result<SampleSet> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::TooFewSamples { need: 2, got: 0 });
    }

    let first_fields = split_fields(lines[0].1);
    let probe_x = resolve_column(x_col, Some(&first_fields));
    let probe_y = resolve_column(y_col, Some(&first_fields));
    let first_is_header = match (&probe_x, &probe_y) {
        (Ok(ix), Ok(iy)) => {
            let numeric = |idx: usize| {
                first_fields
                    .get(idx)
                    .map(|f| f.parse::<f64>().is_ok())
                    .unwrap_or(false)
            };
            !(numeric(*ix) && numeric(*iy))
        }
        // name selectors that only match the first row imply a header
        _ => true,
    };

    let (ix, iy, data) = if first_is_header {
        let ix = resolve_column(x_col, Some(&first_fields))?;
        let iy = resolve_column(y_col, Some(&first_fields))?;
        (ix, iy, &lines[1..])
    } else {
        let ix = resolve_column(x_col, None)?;
        let iy = resolve_column(y_col, None)?;
        (ix, iy, &lines[..])
    };

    let mut pairs = Vec::with_capacity(data.len());
    for &(lineno, line) in data {
        let fields = split_fields(line);
        let grab = |idx: usize, axis: &str| -> Result<f64> {
            let raw = fields.get(idx).copied().unwrap_or("");
            if raw.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("missing {axis} value (column {idx})"),
                });
            }
            raw.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("cannot parse {axis}='{raw}' as a real number"),
            })
        };
        pairs.push((grab(ix, "x")?, grab(iy, "y")?));
    }
    SampleSet::new(pairs)
}

/// Average ranks (1-based), ties sharing the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; m];
    let mut k = 0;
    while k < m {
        let mut j = k;
        while j + 1 < m && values[order[j + 1]] == values[order[k]] {
            j += 1;
        }
        let avg = (k + j) as f64 / 2.0 + 1.0;
        for &idx in &order[k..=j] {
            ranks[idx] = avg;
        }
        k = j + 1;
    }
    ranks
}

/// Tabulated empirical copula of a sample.
///
/// Observations are rank-transformed (average ranks on ties, scaled by
/// 1/(m+1) so nothing sits at u = 1), counted at every grid node, and then
/// clamped into the Frechet envelope so the boundary conditions hold
/// exactly; the clamp moves values by at most 1/m.
pub fn empirical_copula(sample: &SampleSet, grid: Grid) -> Result<CopulaSpec> {
    let m = sample.len();
    let scale = 1.0 / (m as f64 + 1.0);
    let xs: Vec<f64> = sample.pairs().iter().map(|p| p.0).collect();
    let ys: Vec<f64> = sample.pairs().iter().map(|p| p.1).collect();
    let us: Vec<f64> = average_ranks(&xs).iter().map(|r| r * scale).collect();
    let vs: Vec<f64> = average_ranks(&ys).iter().map(|r| r * scale).collect();

    let n = grid.n();
    let stride = grid.nodes_per_axis();
    let mut values = vec![0.0; grid.node_count()];
    for j in 0..=n {
        let v = grid.coord(j);
        for i in 0..=n {
            let u = grid.coord(i);
            let count = us
                .iter()
                .zip(&vs)
                .filter(|&(&a, &b)| a <= u && b <= v)
                .count();
            let raw = count as f64 / m as f64;
            let lower = (u + v - 1.0).max(0.0);
            let upper = u.min(v);
            values[j * stride + i] = raw.max(lower).min(upper);
        }
    }
    Ok(CopulaSpec::tabulated(GridFunction::new(grid, values)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::axioms::verify_axioms;
    use crate::copula::Measurable;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn loads_plain_two_row_file() {
        let s = load_csv_str(
            "1,2\n3,4\n",
            &ColumnSelector::Index(0),
            &ColumnSelector::Index(1),
        )
        .unwrap();
        assert_eq!(s.pairs(), &[(1.0, 2.0), (3.0, 4.0)]);
    }

    #[test]
    fn loads_file_with_header() {
        let mut text = String::from("x,y\n");
        for k in 0..100 {
            text.push_str(&format!("{},{}\n", k, 2 * k));
        }
        let s = load_csv_str(&text, &ColumnSelector::Index(0), &ColumnSelector::Index(1)).unwrap();
        assert_eq!(s.len(), 100);

        let by_name = load_csv_str(
            &text,
            &ColumnSelector::parse("x"),
            &ColumnSelector::parse("y"),
        )
        .unwrap();
        assert_eq!(by_name, s);
    }

    #[test]
    fn parse_error_names_line() {
        let err = load_csv_str(
            "1,2\n1,abc\n",
            &ColumnSelector::Index(0),
            &ColumnSelector::Index(1),
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }

        let err = load_csv_str(
            "1,2\n3\n",
            &ColumnSelector::Index(0),
            &ColumnSelector::Index(1),
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_rows_is_an_error() {
        assert!(matches!(
            load_csv_str(
                "x,y\n1,2\n",
                &ColumnSelector::Index(0),
                &ColumnSelector::Index(1)
            ),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(load_csv(
            Path::new("/nonexistent/file.csv"),
            &ColumnSelector::Index(0),
            &ColumnSelector::Index(1)
        )
        .is_err());
    }

    #[test]
    fn unknown_column_name_is_reported() {
        let err = load_csv_str(
            "x,y\n1,2\n3,4\n",
            &ColumnSelector::parse("z"),
            &ColumnSelector::Index(1),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ColumnNotFound(_)));
    }

    #[test]
    fn two_point_countermonotone_sample() {
        let s = SampleSet::new(vec![(1.0, 2.0), (2.0, 1.0)]).unwrap();
        let c = empirical_copula(&s, grid(2)).unwrap();
        // ranks (1,2) and (2,1) at scale 1/3; neither point is <= (0.5, 0.5)
        assert_eq!(c.eval(0.5, 0.5), 0.0);
    }

    #[test]
    fn comonotone_sample_approaches_upper_bound() {
        let m = 200;
        let pairs: Vec<(f64, f64)> = (1..=m).map(|k| (k as f64, k as f64)).collect();
        let s = SampleSet::new(pairs).unwrap();
        let g = grid(64);
        let c = empirical_copula(&s, g).unwrap();
        let rendered = c.measurable_part().render(g).unwrap();
        let upper = CopulaSpec::FrechetUpper.render(g).unwrap();
        let sup = rendered
            .values()
            .iter()
            .zip(upper.values())
            .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(sup <= 2.0 / 64.0 + 1.0 / m as f64, "sup deviation {sup}");
    }

    #[test]
    fn boundary_conditions_hold_exactly_after_clamping() {
        let pairs: Vec<(f64, f64)> = (0..37)
            .map(|k| {
                let x = (k * 17 % 37) as f64;
                let y = (k * 5 % 19) as f64; // ties in y
                (x, y)
            })
            .collect();
        let s = SampleSet::new(pairs).unwrap();
        let g = grid(32);
        let c = empirical_copula(&s, g).unwrap();
        let report = verify_axioms(&c, g, 1e-15).unwrap();
        assert!(report.grounded.pass);
        assert_eq!(report.grounded.worst, 0.0);
        assert!(report.margins.pass);
        assert_eq!(report.margins.worst, 0.0);
        // 2-increasing within 1/m after clamping
        assert!(report.two_increasing.worst <= 1.0 / s.len() as f64);
    }

    #[test]
    fn permutation_invariance_is_bitwise() {
        let pairs = vec![(3.0, 1.0), (1.0, 4.0), (2.0, 2.0), (5.0, 0.5), (4.0, 3.0)];
        let mut shuffled = pairs.clone();
        shuffled.swap(0, 3);
        shuffled.swap(1, 4);
        let g = grid(16);
        let a = empirical_copula(&SampleSet::new(pairs).unwrap(), g).unwrap();
        let b = empirical_copula(&SampleSet::new(shuffled).unwrap(), g).unwrap();
        let ra = a.measurable_part().render(g).unwrap();
        let rb = b.measurable_part().render(g).unwrap();
        for (x, y) in ra.values().iter().zip(rb.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn column_swap_equals_transpose_bitwise() {
        let pairs = vec![(3.0, 1.0), (1.0, 4.0), (2.0, 2.0), (5.0, 0.5), (4.0, 3.0)];
        let s = SampleSet::new(pairs).unwrap();
        let g = grid(16);
        let swapped = empirical_copula(&s.swapped(), g).unwrap();
        let transposed = empirical_copula(&s, g).unwrap().transpose();
        let ra = swapped.render(g).unwrap();
        let rb = transposed.render(g).unwrap();
        for (x, y) in ra.values().iter().zip(rb.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
