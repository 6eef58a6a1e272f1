//! Uniform dyadic grids on the unit square, quadrature and L^p norms.
//!
//! Every other module computes on [`GridFunction`]s: real-valued samples on
//! the nodes (i/n, j/n) of a power-of-two grid. Integrals use the
//! cell-average-of-corners rule, which is second order and exact for
//! cellwise-bilinear integrands; the power-of-two restriction keeps dyadic
//! subdivision free of remainder cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid over the unit square with `n` cells per axis.
///
/// `n` must be a power of two, at least 2. Nodes sit at (i/n, j/n) for
/// 0 <= i, j <= n, so coordinates 0 and 1 are hit exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::BadResolution(n));
        }
        Ok(Grid { n })
    }

    /// Cells per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// log2(n): the deepest dyadic level that still aligns with whole cells.
    pub fn max_level(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Nodes per axis (n + 1).
    pub fn nodes_per_axis(&self) -> usize {
        self.n + 1
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    /// Coordinate of node index `i` (exact dyadic value).
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// Cell width 1/n.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }
}

/// Exponent for L^p norms: a finite p >= 1 or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub const ONE: PExponent = PExponent::Finite(1.0);
    pub const TWO: PExponent = PExponent::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() {
            return Err(Error::BadExponent(p));
        }
        if p.is_infinite() && p > 0.0 {
            return Ok(PExponent::Infinity);
        }
        if p >= 1.0 && p.is_finite() {
            return Ok(PExponent::Finite(p));
        }
        Err(Error::BadExponent(p))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(PExponent::Infinity);
        }
        let p: f64 = t.parse().map_err(|_| Error::BadExponent(f64::NAN))?;
        PExponent::new(p)
    }
}

impl std::fmt::Display for PExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GridFunctionDoc {
    n: usize,
    values: Vec<f64>,
}

/// A real-valued function sampled on every node of a [`Grid`].
///
/// Values are stored row-major by v then u: index = j * (n + 1) + i for the
/// node (i/n, j/n). All values are finite; NaN or infinity is rejected at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        let expected = grid.node_count();
        if values.len() != expected {
            return Err(Error::ValueCountMismatch {
                n: grid.n(),
                got: values.len(),
                expected,
            });
        }
        let f = GridFunction { grid, values };
        for j in 0..=f.grid.n() {
            for i in 0..=f.grid.n() {
                let value = f.value(i, j);
                if !value.is_finite() {
                    return Err(Error::NonFinite {
                        u: f.grid.coord(i),
                        v: f.grid.coord(j),
                        value,
                    });
                }
            }
        }
        Ok(f)
    }

    /// Evaluate `eval` at every node. Non-finite outputs are reported as
    /// errors carrying the offending node coordinates.
    pub fn sample<F>(grid: Grid, eval: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        let stride = grid.nodes_per_axis();
        let mut values = vec![0.0; grid.node_count()];
        for j in 0..stride {
            let v = grid.coord(j);
            for i in 0..stride {
                let u = grid.coord(i);
                let value = eval(u, v);
                if !value.is_finite() {
                    return Err(Error::NonFinite { u, v, value });
                }
                values[j * stride + i] = value;
            }
        }
        Ok(GridFunction { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.node_count()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.grid.n() + 1) + i
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    /// Midpoint-rule approximation of the integral of |f| over the unit
    /// square: each cell contributes the average of |f| at its four corners.
    pub fn integrate_l1(&self) -> f64 {
        let n = self.grid.n();
        let mut sum = 0.0;
        for j in 0..n {
            for i in 0..n {
                sum += 0.25
                    * (self.value(i, j).abs()
                        + self.value(i + 1, j).abs()
                        + self.value(i, j + 1).abs()
                        + self.value(i + 1, j + 1).abs());
            }
        }
        sum * self.grid.h() * self.grid.h()
    }

    /// (integral of |f|^p)^(1/p) with the same cell rule; for p = infinity,
    /// the maximum node magnitude. p = 1 goes through [`Self::integrate_l1`]
    /// so the two agree exactly.
    pub fn norm_lp(&self, p: PExponent) -> f64 {
        match p {
            PExponent::Infinity => self.sup_norm(),
            PExponent::Finite(1.0) => self.integrate_l1(),
            PExponent::Finite(p) => {
                let n = self.grid.n();
                let mut sum = 0.0;
                for j in 0..n {
                    for i in 0..n {
                        sum += 0.25
                            * (self.value(i, j).abs().powf(p)
                                + self.value(i + 1, j).abs().powf(p)
                                + self.value(i, j + 1).abs().powf(p)
                                + self.value(i + 1, j + 1).abs().powf(p));
                    }
                }
                (sum * self.grid.h() * self.grid.h()).powf(1.0 / p)
            }
        }
    }

    /// Maximum node magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// CSV dump with header `u,v,value`, row-major by v then u,
    /// 17 significant digits per field.
    pub fn to_csv(&self) -> String {
        let n = self.grid.n();
        let mut out = String::with_capacity(32 * self.values.len());
        out.push_str("u,v,value\n");
        for j in 0..=n {
            for i in 0..=n {
                out.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e}\n",
                    self.grid.coord(i),
                    self.grid.coord(j),
                    self.value(i, j)
                ));
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if lineno == 0 {
                if line != "u,v,value" {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected header 'u,v,value', got '{line}'"),
                    });
                }
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |name: &str| -> Result<f64> {
                let raw = fields.next().ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    msg: format!("missing field '{name}'"),
                })?;
                raw.trim().parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("cannot parse {name}='{raw}' as a real number"),
                })
            };
            let u = next("u")?;
            let v = next("v")?;
            let value = next("value")?;
            rows.push((lineno + 1, u, v, value));
        }
        let nodes = rows.len();
        let per_axis = (nodes as f64).sqrt().round() as usize;
        if per_axis * per_axis != nodes || per_axis < 3 {
            return Err(Error::Parse {
                line: 1,
                msg: format!("{nodes} rows do not form an (n+1)^2 node lattice"),
            });
        }
        let grid = Grid::new(per_axis - 1)?;
        let mut values = vec![0.0; nodes];
        for (k, (line, u, v, value)) in rows.into_iter().enumerate() {
            let i = k % per_axis;
            let j = k / per_axis;
            if (u - grid.coord(i)).abs() > 1e-12 || (v - grid.coord(j)).abs() > 1e-12 {
                return Err(Error::Parse {
                    line,
                    msg: format!(
                        "node ({u}, {v}) out of row-major order; expected ({}, {})",
                        grid.coord(i),
                        grid.coord(j)
                    ),
                });
            }
            values[k] = value;
        }
        GridFunction::new(grid, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GridFunctionDoc {
            n: self.grid.n(),
            values: self.values.clone(),
        })
        .expect("grid function serialization cannot fail")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({ "n": self.grid.n(), "values": self.values })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GridFunctionDoc =
            serde_json::from_str(text).map_err(|e| Error::SpecJson(e.to_string()))?;
        GridFunction::new(Grid::new(doc.n)?, doc.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid::new(0).is_err());
        assert!(Grid::new(1).is_err());
        assert!(Grid::new(3).is_err());
        assert!(Grid::new(100).is_err());
        assert!(Grid::new(2).is_ok());
        assert!(Grid::new(1024).is_ok());
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = grid(2);
        let mut values = vec![0.0; g.node_count()];
        values[4] = f64::NAN;
        assert!(matches!(
            GridFunction::new(g, values),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn integrate_constant_one() {
        let f = GridFunction::constant(grid(16), 1.0).unwrap();
        assert!((f.integrate_l1() - 1.0).abs() < 1e-12);
        let z = GridFunction::constant(grid(16), 0.0).unwrap();
        assert_eq!(z.integrate_l1(), 0.0);
    }

    #[test]
    fn integrate_product_uv() {
        // closed form: int int u*v = 1/4; the cell rule is exact for bilinear
        let f = GridFunction::sample(grid(256), |u, v| u * v).unwrap();
        assert!((f.integrate_l1() - 0.25).abs() < 1e-4);
        assert!((f.integrate_l1() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn norm_lp_examples() {
        let f = GridFunction::constant(grid(8), -0.7).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let got = f.norm_lp(PExponent::new(p).unwrap());
            assert!((got - 0.7).abs() < 1e-12, "p={p} got {got}");
        }
        assert!((f.norm_lp(PExponent::Infinity) - 0.7).abs() < 1e-15);

        // int int u^2 = 1/3, so ||u||_2 = 1/sqrt(3)
        let f = GridFunction::sample(grid(256), |u, _| u).unwrap();
        let got = f.norm_lp(PExponent::TWO);
        assert!((got - 1.0 / 3f64.sqrt()).abs() < 1e-3);

        // sup norm sees a single spiked node
        let g = grid(4);
        let mut values = vec![0.0; g.node_count()];
        values[7] = 5.0;
        let f = GridFunction::new(g, values).unwrap();
        assert_eq!(f.norm_lp(PExponent::Infinity), 5.0);
    }

    #[test]
    fn norm_l1_matches_integrate_exactly() {
        let f = GridFunction::sample(grid(32), |u, v| (u - 0.3) * (v + 0.2)).unwrap();
        assert_eq!(f.norm_lp(PExponent::ONE), f.integrate_l1());
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
        assert!(PExponent::new(-f64::INFINITY).is_err());
        assert!(PExponent::parse("inf").is_ok());
        assert!(PExponent::parse("2").is_ok());
        assert!(PExponent::parse("0.3").is_err());
    }

    #[test]
    fn sample_examples() {
        let f = GridFunction::sample(grid(2), |_, _| 0.5).unwrap();
        assert_eq!(f.values().len(), 9);
        assert!(f.values().iter().all(|&x| x == 0.5));

        let f = GridFunction::sample(grid(2), |u, v| u.min(v)).unwrap();
        assert_eq!(f.value(1, 2), 0.5); // node (0.5, 1.0)

        let f = GridFunction::sample(grid(4), |u, v| u.powf(0.5) * v).unwrap();
        assert!((f.value(1, 3) - 0.375).abs() < 1e-15); // node (0.25, 0.75)
    }

    #[test]
    fn sample_reports_node_of_domain_error() {
        let err = GridFunction::sample(
            grid(2),
            |u, v| {
                if u == 0.5 && v == 1.0 {
                    f64::NAN
                } else {
                    0.0
                }
            },
        )
        .unwrap_err();
        match err {
            Error::NonFinite { u, v, .. } => {
                assert_eq!((u, v), (0.5, 1.0));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn refinement_error_ratio_is_second_order() {
        // degree-3 polynomial, strictly positive so |f| has no kink
        let exact = 1.0; // int u^3 = 1/4, int int u*v = 1/4, + 1/2
        let err = |n: usize| {
            let f = GridFunction::sample(grid(n), |u, v| u * u * u + u * v + 0.5).unwrap();
            (f.integrate_l1() - exact).abs()
        };
        for n in [16, 32, 64] {
            let ratio = err(n) / err(2 * n);
            assert!(
                (3.0..=5.0).contains(&ratio),
                "n={n}: error ratio {ratio} outside [3, 5]"
            );
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = GridFunction::sample(grid(4), |u, v| u * v + 0.125).unwrap();
        let back = GridFunction::from_csv(&f.to_csv()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn json_round_trip() {
        let f = GridFunction::sample(grid(8), |u, v| (u + v) / 2.0).unwrap();
        let back = GridFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(GridFunction::from_csv("u,v,value\n0,0,abc\n").is_err());
        assert!(GridFunction::from_csv("nope\n").is_err());
    }
}
