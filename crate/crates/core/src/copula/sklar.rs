//! Joint-distribution construction and copula extraction on a box grid:
//! H(x,y) = C(F(x), G(y)), and its inverse through margin pseudo-inverses.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

use super::CopulaSpec;

/// Rectangular (x, y) domain carrying a joint distribution sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SklarBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl SklarBox {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let ok = [x_min, x_max, y_min, y_max].iter().all(|b| b.is_finite())
            && x_min < x_max
            && y_min < y_max;
        if !ok {
            return Err(Error::BadBox);
        }
        Ok(SklarBox {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn unit() -> Self {
        SklarBox {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn x_coord(&self, grid: Grid, i: usize) -> f64 {
        self.x_min + grid.coord(i) * (self.x_max - self.x_min)
    }

    pub fn y_coord(&self, grid: Grid, j: usize) -> f64 {
        self.y_min + grid.coord(j) * (self.y_max - self.y_min)
    }
}

/// A CDF sampled on the node coordinates of one box axis.
struct MarginSample {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl MarginSample {
    /// Sample and validate a nondecreasing margin spanning [0, 1].
    fn take<F>(cdf: F, coords: &[f64]) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let fs: Vec<f64> = coords.iter().map(|&x| cdf(x)).collect();
        for (x, f) in coords.iter().zip(&fs) {
            if !f.is_finite() {
                return Err(Error::NonFinite {
                    u: *x,
                    v: 0.0,
                    value: *f,
                });
            }
        }
        let first = *fs.first().expect("margin sample is nonempty");
        let last = *fs.last().expect("margin sample is nonempty");
        if first.abs() > 1e-9 {
            return Err(Error::MarginNotNormalized {
                x: coords[0],
                value: first,
            });
        }
        if (last - 1.0).abs() > 1e-9 {
            return Err(Error::MarginNotNormalized {
                x: *coords.last().unwrap(),
                value: last,
            });
        }
        for k in 0..fs.len() - 1 {
            if fs[k + 1] < fs[k] - 1e-12 {
                return Err(Error::NonMonotoneMargin {
                    x: coords[k + 1],
                    prev: fs[k],
                    next: fs[k + 1],
                });
            }
        }
        Ok(MarginSample {
            xs: coords.to_vec(),
            fs,
        })
    }

    /// Reject plateaus wider than one cell; strict monotonicity up to
    /// single-cell flats is what makes the pseudo-inverse well defined.
    fn require_strict(&self) -> Result<()> {
        let mut run = 1;
        for k in 0..self.fs.len() - 1 {
            if (self.fs[k + 1] - self.fs[k]).abs() <= 1e-12 {
                run += 1;
                if run > 2 {
                    return Err(Error::MarginPlateau(self.xs[k + 1 - run + 1]));
                }
            } else {
                run = 1;
            }
        }
        Ok(())
    }

    /// inf{x : F(x) >= u} by linear interpolation between samples, taking
    /// the left endpoint on single-cell plateaus.
    fn pseudo_inverse(&self, u: f64) -> f64 {
        let fs = &self.fs;
        let xs = &self.xs;
        if u <= fs[0] {
            return xs[0];
        }
        let last = fs.len() - 1;
        // first index with fs[k] >= u
        let k = fs.partition_point(|&f| f < u);
        if k > last {
            return xs[last];
        }
        if fs[k] <= u {
            // exact hit (fs[k] == u up to the partition): left endpoint
            return xs[k];
        }
        let lo = k - 1;
        let df = fs[k] - fs[lo];
        if df <= 0.0 {
            return xs[lo];
        }
        xs[lo] + (u - fs[lo]) / df * (xs[k] - xs[lo])
    }
}

/// Sample H(x, y) = C(F(x), G(y)) on the box grid.
///
/// `f_cdf` and `g_cdf` must be nondecreasing on the box with F(x_min) = 0
/// and F(x_max) = 1 (checked on the sampled nodes; adjacent decreases beyond
/// 1e-12 are rejected). The output inherits groundedness and
/// 2-increasingness from `c`; its margins equal F and G rather than the
/// identity.
pub fn sklar_construct<F, G>(
    c: &CopulaSpec,
    f_cdf: F,
    g_cdf: G,
    bx: &SklarBox,
    grid: Grid,
) -> Result<GridFunction>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let xs: Vec<f64> = (0..=grid.n()).map(|i| bx.x_coord(grid, i)).collect();
    let ys: Vec<f64> = (0..=grid.n()).map(|j| bx.y_coord(grid, j)).collect();
    let f = MarginSample::take(f_cdf, &xs)?;
    let g = MarginSample::take(g_cdf, &ys)?;
    let stride = grid.nodes_per_axis();
    let mut values = vec![0.0; grid.node_count()];
    for j in 0..stride {
        for i in 0..stride {
            values[j * stride + i] = c.eval(f.fs[i], g.fs[j]);
        }
    }
    GridFunction::new(grid, values)
}

/// Recover the unique copula of a joint sample with continuous, strictly
/// increasing margins: `C(u,v) = H(F^[-1](u), G^[-1](v))`, tabulated on
/// `out_grid` via bilinear interpolation of `h`.
///
/// Margins with plateaus wider than one cell are rejected. Composing
/// [`sklar_construct`] then [`sklar_extract`] with the same margins
/// reproduces the original copula within O(1/n) interpolation error.
pub fn sklar_extract<F, G>(
    h: &GridFunction,
    f_cdf: F,
    g_cdf: G,
    bx: &SklarBox,
    out_grid: Grid,
) -> Result<CopulaSpec>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let grid = h.grid();
    let xs: Vec<f64> = (0..=grid.n()).map(|i| bx.x_coord(grid, i)).collect();
    let ys: Vec<f64> = (0..=grid.n()).map(|j| bx.y_coord(grid, j)).collect();
    let f = MarginSample::take(f_cdf, &xs)?;
    let g = MarginSample::take(g_cdf, &ys)?;
    f.require_strict()?;
    g.require_strict()?;

    let x_span = bx.x_max - bx.x_min;
    let y_span = bx.y_max - bx.y_min;
    let stride = out_grid.nodes_per_axis();
    let mut values = vec![0.0; out_grid.node_count()];
    for j in 0..stride {
        let y = g.pseudo_inverse(out_grid.coord(j));
        let vn = (y - bx.y_min) / y_span;
        for i in 0..stride {
            let x = f.pseudo_inverse(out_grid.coord(i));
            let un = (x - bx.x_min) / x_span;
            values[j * stride + i] = super::bilinear_eval(h, un, vn);
        }
    }
    Ok(CopulaSpec::tabulated(GridFunction::new(out_grid, values)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::axioms::verify_axioms;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn identity(x: f64) -> f64 {
        x
    }

    #[test]
    fn construct_product_with_identity_margins() {
        let h = sklar_construct(
            &CopulaSpec::Product,
            identity,
            identity,
            &SklarBox::unit(),
            grid(16),
        )
        .unwrap();
        for j in 0..=16 {
            for i in 0..=16 {
                let (x, y) = (i as f64 / 16.0, j as f64 / 16.0);
                assert!((h.value(i, j) - x * y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn construct_comonotone_with_identity_margins() {
        let h = sklar_construct(
            &CopulaSpec::FrechetUpper,
            identity,
            identity,
            &SklarBox::unit(),
            grid(8),
        )
        .unwrap();
        for j in 0..=8 {
            for i in 0..=8 {
                let (x, y) = (i as f64 / 8.0, j as f64 / 8.0);
                assert_eq!(h.value(i, j), x.min(y));
            }
        }
    }

    #[test]
    fn construct_with_squared_margin() {
        let h = sklar_construct(
            &CopulaSpec::Product,
            |x: f64| x * x,
            identity,
            &SklarBox::unit(),
            grid(16),
        )
        .unwrap();
        // H(0.5, 0.5) = C(0.25, 0.5) = 0.125
        assert!((h.value(8, 8) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn constructed_h_is_grounded_and_two_increasing() {
        let h = sklar_construct(
            &CopulaSpec::clayton(1.0).unwrap(),
            |x: f64| x * x,
            identity,
            &SklarBox::unit(),
            grid(32),
        )
        .unwrap();
        let spec = CopulaSpec::tabulated(h.clone());
        let report = verify_axioms(&spec, grid(32), 1e-12).unwrap();
        assert!(report.grounded.pass);
        assert!(report.two_increasing.pass);
        // margins equal F and G, not the identity: H(x, 1) = x^2, H(1, y) = y
        for k in 0..=32 {
            let x = k as f64 / 32.0;
            assert!((h.value(k, 32) - x * x).abs() < 1e-15);
            assert!((h.value(32, k) - x).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_monotone_margin() {
        // normalized at the endpoints but dipping in the middle
        let err = sklar_construct(
            &CopulaSpec::Product,
            |x: f64| x + 0.25 * (2.0 * std::f64::consts::PI * x).sin(),
            identity,
            &SklarBox::unit(),
            grid(8),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonMonotoneMargin { .. }));
    }

    #[test]
    fn rejects_unnormalized_margin() {
        let err = sklar_construct(
            &CopulaSpec::Product,
            |x: f64| 0.5 * x,
            identity,
            &SklarBox::unit(),
            grid(8),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MarginNotNormalized { .. }));
    }

    #[test]
    fn extract_identity_cases_are_exact_on_nodes() {
        let g = grid(16);
        for c in [CopulaSpec::Product, CopulaSpec::FrechetUpper] {
            let h = sklar_construct(&c, identity, identity, &SklarBox::unit(), g).unwrap();
            let back = sklar_extract(&h, identity, identity, &SklarBox::unit(), g).unwrap();
            let want = c.render(g).unwrap();
            let got = back.render(g).unwrap();
            for (a, b) in want.values().iter().zip(got.values()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn extract_rejects_wide_plateau() {
        let g = grid(8);
        let h = sklar_construct(
            &CopulaSpec::Product,
            identity,
            identity,
            &SklarBox::unit(),
            g,
        )
        .unwrap();
        let flat = |x: f64| {
            // flat on [0.25, 0.625]: a three-cell plateau at n = 8
            if x < 0.25 {
                2.0 * x
            } else if x < 0.625 {
                0.5
            } else {
                0.5 + (x - 0.625) / 0.75
            }
        };
        let err = sklar_extract(&h, flat, identity, &SklarBox::unit(), g).unwrap_err();
        assert!(matches!(err, Error::MarginPlateau(_)));
    }

    #[test]
    fn round_trip_with_squared_margin_converges() {
        let clayton = CopulaSpec::clayton(1.0).unwrap();
        let sq = |x: f64| x * x;
        let mut errors = Vec::new();
        for n in [64usize, 256] {
            let g = grid(n);
            let h = sklar_construct(&clayton, sq, identity, &SklarBox::unit(), g).unwrap();
            let back = sklar_extract(&h, sq, identity, &SklarBox::unit(), g).unwrap();
            let want = clayton.render(g).unwrap();
            let got = back.render(g).unwrap();
            let sup = want
                .values()
                .iter()
                .zip(got.values())
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(sup <= 2.0 / n as f64, "n={n}: sup error {sup}");
            errors.push(sup);
        }
        assert!(
            errors[1] <= errors[0] / 3.5,
            "errors {errors:?} do not shrink first-order"
        );
    }
}
