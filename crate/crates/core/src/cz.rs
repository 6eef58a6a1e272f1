//! Dyadic stopping-time decomposition of nonnegative grid functions into a
//! bounded good part and a mean-zero bad part, plus the tolerance order
//! built on good-part norms.
//!
//! The recursion starts at the unit square: a dyadic square whose average
//! exceeds the threshold t is selected and not subdivided; otherwise its
//! four children recurse, down to single grid cells. Selected squares
//! therefore satisfy t < avg <= 4t (the parent average was at most t and
//! the area ratio is 4), except for a selected root, which has no parent.
//!
//! Averages are taken at cell granularity (corner means), which keeps the
//! per-square zero-mean property of the bad part exact up to rounding; the
//! node-level `good`/`bad` arrays reconstruct f = g + b exactly but nodes on
//! edges shared by two selected squares carry the value of the
//! first square in (level, i, j) order.

use serde_json::{json, Value};

use crate::copula::Measurable;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, PExponent};

/// A dyadic square [i, i+1] x [j, j+1] scaled by 2^-level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DyadicSquare {
    pub level: u32,
    pub i: usize,
    pub j: usize,
}

impl DyadicSquare {
    /// Side length 2^-level (exact).
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Area 4^-level (exact).
    pub fn area(&self) -> f64 {
        let s = self.side();
        s * s
    }

    /// (u_min, v_min, u_max, v_max) of the closed box.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        let s = self.side();
        (
            self.i as f64 * s,
            self.j as f64 * s,
            (self.i + 1) as f64 * s,
            (self.j + 1) as f64 * s,
        )
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        let (u0, v0, u1, v1) = self.bounds();
        (u0..=u1).contains(&u) && (v0..=v1).contains(&v)
    }
}

/// A selected square together with the cell-average of f over it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedSquare {
    pub square: DyadicSquare,
    pub avg: f64,
}

/// The good/bad split of a nonnegative grid function at threshold t.
#[derive(Debug, Clone)]
pub struct CzDecomposition {
    threshold: f64,
    squares: Vec<SelectedSquare>,
    good: GridFunction,
    bad: GridFunction,
    input_l1: f64,
    /// Cell integrals of f (corner-mean times cell area), row-major.
    cell_int: Vec<f64>,
    /// Index into `squares` per cell; usize::MAX marks unselected cells.
    cell_owner: Vec<usize>,
    /// True for nodes lying in some closed selected square.
    node_covered: Vec<bool>,
    input: GridFunction,
}

const NO_OWNER: usize = usize::MAX;

/// Decompose a nonnegative grid function at threshold `t > 0`.
pub fn cz_decompose(f: &GridFunction, t: f64) -> Result<CzDecomposition> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::BadThreshold(t));
    }
    let grid = f.grid();
    let n = grid.n();
    for j in 0..=n {
        for i in 0..=n {
            if f.value(i, j) < 0.0 {
                return Err(Error::NegativeValue {
                    u: grid.coord(i),
                    v: grid.coord(j),
                    value: f.value(i, j),
                });
            }
        }
    }

    // cell integrals at the finest level, then a sum pyramid up to the root
    let h2 = grid.h() * grid.h();
    let mut cell_int = vec![0.0_f64; n * n];
    for j in 0..n {
        for i in 0..n {
            cell_int[j * n + i] = 0.25
                * (f.value(i, j) + f.value(i + 1, j) + f.value(i, j + 1) + f.value(i + 1, j + 1))
                * h2;
        }
    }
    let k = grid.max_level();
    // sums[l] holds the integral of f over each level-l square
    let mut sums: Vec<Vec<f64>> = Vec::with_capacity(k as usize + 1);
    sums.push(cell_int.clone());
    for level in (0..k).rev() {
        let child = &sums[sums.len() - 1];
        let m = 1usize << level; // squares per axis at this level
        let cm = 2 * m;
        let mut this = vec![0.0_f64; m * m];
        for j in 0..m {
            for i in 0..m {
                this[j * m + i] = child[(2 * j) * cm + 2 * i]
                    + child[(2 * j) * cm + 2 * i + 1]
                    + child[(2 * j + 1) * cm + 2 * i]
                    + child[(2 * j + 1) * cm + 2 * i + 1];
            }
        }
        sums.push(this);
    }
    sums.reverse(); // sums[level] for level = 0..=k
    let input_l1 = sums[0][0];

    // stopping-time selection, depth first in child order
    let mut selected = Vec::new();
    let mut stack = vec![DyadicSquare {
        level: 0,
        i: 0,
        j: 0,
    }];
    while let Some(sq) = stack.pop() {
        let m = 1usize << sq.level;
        let integral = sums[sq.level as usize][sq.j * m + sq.i];
        let area = sq.area();
        if integral > t * area {
            selected.push(SelectedSquare {
                square: sq,
                avg: integral / area,
            });
        } else if sq.level < k {
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                stack.push(DyadicSquare {
                    level: sq.level + 1,
                    i: 2 * sq.i + di,
                    j: 2 * sq.j + dj,
                });
            }
        }
    }
    selected.sort_by_key(|s| (s.square.level, s.square.j, s.square.i));

    // cell ownership and node-level assembly; first square in sorted order
    // wins shared edge nodes
    let mut cell_owner = vec![NO_OWNER; n * n];
    let mut good_values = f.values().to_vec();
    let mut node_taken = vec![false; grid.node_count()];
    let stride = grid.nodes_per_axis();
    for (idx, s) in selected.iter().enumerate() {
        let span = n >> s.square.level; // cells per side of this square
        let (ci0, cj0) = (s.square.i * span, s.square.j * span);
        for cj in cj0..cj0 + span {
            for ci in ci0..ci0 + span {
                cell_owner[cj * n + ci] = idx;
            }
        }
        for nj in cj0..=cj0 + span {
            for ni in ci0..=ci0 + span {
                let node = nj * stride + ni;
                if !node_taken[node] {
                    node_taken[node] = true;
                    good_values[node] = s.avg;
                }
            }
        }
    }
    let bad_values: Vec<f64> = f
        .values()
        .iter()
        .zip(&good_values)
        .map(|(x, g)| x - g)
        .collect();

    Ok(CzDecomposition {
        threshold: t,
        squares: selected,
        good: GridFunction::new(grid, good_values)?,
        bad: GridFunction::new(grid, bad_values)?,
        input_l1,
        cell_int,
        cell_owner,
        node_covered: node_taken,
        input: f.clone(),
    })
}

impl CzDecomposition {
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn squares(&self) -> &[SelectedSquare] {
        &self.squares
    }

    /// Node-level good part: the square average on selected squares, f
    /// off them.
    pub fn good(&self) -> &GridFunction {
        &self.good
    }

    /// Node-level bad part, defined as f - g so reconstruction is exact.
    pub fn bad(&self) -> &GridFunction {
        &self.bad
    }

    /// Integral of f over the square (pyramid value).
    pub fn input_l1(&self) -> f64 {
        self.input_l1
    }

    pub fn grid(&self) -> Grid {
        self.good.grid()
    }

    /// Total area of the selected squares; exact dyadic arithmetic.
    pub fn area_union(&self) -> f64 {
        // + 0.0 turns the empty sum's -0.0 into +0.0
        self.squares.iter().map(|s| s.square.area()).sum::<f64>() + 0.0
    }

    /// Cell-granular integral of f over one selected square.
    pub fn square_integral(&self, idx: usize) -> f64 {
        let s = &self.squares[idx];
        let n = self.grid().n();
        let span = n >> s.square.level;
        let (ci0, cj0) = (s.square.i * span, s.square.j * span);
        let mut sum = 0.0;
        for cj in cj0..cj0 + span {
            for ci in ci0..ci0 + span {
                sum += self.cell_int[cj * n + ci];
            }
        }
        sum
    }

    /// Cell-granular mean of the bad part over one selected square; zero by
    /// construction up to rounding.
    pub fn square_bad_mean(&self, idx: usize) -> f64 {
        let s = &self.squares[idx];
        self.square_integral(idx) / s.square.area() - s.avg
    }

    /// ||b||_1 at cell granularity: each cell in a selected square
    /// contributes the corner mean of |f - avg|; cells off the squares
    /// contribute nothing.
    pub fn bad_l1(&self) -> f64 {
        let grid = self.grid();
        let n = grid.n();
        let h2 = grid.h() * grid.h();
        let mut sum = 0.0;
        for cj in 0..n {
            for ci in 0..n {
                let owner = self.cell_owner[cj * n + ci];
                if owner == NO_OWNER {
                    continue;
                }
                let avg = self.squares[owner].avg;
                sum += 0.25
                    * ((self.input.value(ci, cj) - avg).abs()
                        + (self.input.value(ci + 1, cj) - avg).abs()
                        + (self.input.value(ci, cj + 1) - avg).abs()
                        + (self.input.value(ci + 1, cj + 1) - avg).abs())
                    * h2;
            }
        }
        sum
    }

    /// ||g||_p at cell granularity: square averages on the selected part,
    /// cell averages of f off it.
    pub fn good_lp(&self, p: PExponent) -> f64 {
        let grid = self.grid();
        let n = grid.n();
        match p {
            PExponent::Infinity => {
                let mut sup = 0.0_f64;
                for s in &self.squares {
                    sup = sup.max(s.avg);
                }
                for cj in 0..n {
                    for ci in 0..n {
                        if self.cell_owner[cj * n + ci] == NO_OWNER {
                            sup = sup.max(self.cell_avg(ci, cj));
                        }
                    }
                }
                sup
            }
            PExponent::Finite(p) => {
                let mut sum = 0.0;
                for s in &self.squares {
                    let term = if p == 1.0 { s.avg } else { s.avg.powf(p) };
                    sum += term * s.square.area();
                }
                let h2 = grid.h() * grid.h();
                for cj in 0..n {
                    for ci in 0..n {
                        if self.cell_owner[cj * n + ci] == NO_OWNER {
                            let avg = self.cell_avg(ci, cj);
                            let term = if p == 1.0 { avg } else { avg.powf(p) };
                            sum += term * h2;
                        }
                    }
                }
                if p == 1.0 {
                    sum
                } else {
                    sum.powf(1.0 / p)
                }
            }
        }
    }

    pub fn good_l1(&self) -> f64 {
        self.good_lp(PExponent::ONE)
    }

    fn cell_avg(&self, ci: usize, cj: usize) -> f64 {
        let grid = self.grid();
        let n = grid.n();
        self.cell_int[cj * n + ci] / (grid.h() * grid.h())
    }

    /// Largest square average (node-level sup of g on the selected part).
    pub fn sup_good_on_squares(&self) -> f64 {
        self.squares.iter().fold(0.0_f64, |m, s| m.max(s.avg))
    }

    /// Largest cell average off the selected squares; at most t by
    /// construction.
    pub fn max_unselected_cell_avg(&self) -> f64 {
        let n = self.grid().n();
        let mut sup = 0.0_f64;
        for cj in 0..n {
            for ci in 0..n {
                if self.cell_owner[cj * n + ci] == NO_OWNER {
                    sup = sup.max(self.cell_avg(ci, cj));
                }
            }
        }
        sup
    }

    /// Node-level sup of g over nodes outside every closed selected square.
    /// Exceeds t only by the node-versus-cell-average slack (at most 4/n for
    /// an input that is 2-Lipschitz in the l1 distance).
    pub fn sup_good_off_squares(&self) -> f64 {
        self.node_covered
            .iter()
            .zip(self.good.values())
            .filter(|(covered, _)| !**covered)
            .fold(0.0_f64, |m, (_, g)| m.max(*g))
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "t": self.threshold,
            "squares": self
                .squares
                .iter()
                .map(|s| json!({
                    "level": s.square.level,
                    "i": s.square.i,
                    "j": s.square.j,
                    "avg": s.avg,
                }))
                .collect::<Vec<_>>(),
            "l1_f": self.input_l1,
            "l1_b": self.bad_l1(),
            "l1_g": self.good_l1(),
            "area_union": self.area_union(),
            "sup_g_inside": self.sup_good_on_squares(),
            "sup_g_outside": self.sup_good_off_squares(),
            // square averages obey avg <= 4t (area ratio of the dyadic
            // split); the one-dimensional interval version would give 2t
            "avg_bound_squares": 4.0 * self.threshold,
            "avg_bound_intervals": 2.0 * self.threshold,
        })
    }
}

/// Tolerance-order verdicts; the primary orientation calls the spec with
/// the smaller good-part norm more symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceRelation {
    FirstMoreSymmetric,
    SecondMoreSymmetric,
    Tied,
}

impl ToleranceRelation {
    pub fn as_str(&self) -> &'static str {
        match self {
            ToleranceRelation::FirstMoreSymmetric => "first_more_symmetric_t",
            ToleranceRelation::SecondMoreSymmetric => "second_more_symmetric_t",
            ToleranceRelation::Tied => "tied",
        }
    }

    fn flipped(&self) -> Self {
        match self {
            ToleranceRelation::FirstMoreSymmetric => ToleranceRelation::SecondMoreSymmetric,
            ToleranceRelation::SecondMoreSymmetric => ToleranceRelation::FirstMoreSymmetric,
            ToleranceRelation::Tied => ToleranceRelation::Tied,
        }
    }
}

/// Output of [`tolerance_compare`]: the primary verdict, the opposite
/// orientation (under which the larger good-part norm counts as more
/// symmetric), and the norms behind both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceVerdict {
    pub relation: ToleranceRelation,
    pub paper_orientation: ToleranceRelation,
    pub g1_norm: f64,
    pub g2_norm: f64,
    pub b1_l1: f64,
    pub b2_l1: f64,
    pub t: f64,
    pub p: PExponent,
}

impl ToleranceVerdict {
    pub fn to_json_value(&self) -> Value {
        json!({
            "relation": self.relation.as_str(),
            "paper_orientation": self.paper_orientation.as_str(),
            "g1_norm": self.g1_norm,
            "g2_norm": self.g2_norm,
            "b1_l1": self.b1_l1,
            "b2_l1": self.b2_l1,
            "t": self.t,
            "p": self.p.to_string(),
        })
    }
}

/// Compare two specs with tolerance t in (0, 1): decompose both brackets at
/// threshold t and rank by the good-part p-norm, smaller meaning more
/// symmetric. Ties are declared within 1e-9.
pub fn tolerance_compare(
    first: &impl Measurable,
    second: &impl Measurable,
    t: f64,
    p: PExponent,
    grid: Grid,
) -> Result<ToleranceVerdict> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::ToleranceOutOfRange(t));
    }
    let d1 = cz_decompose(&crate::copula::bracket(first, grid)?, t)?;
    let d2 = cz_decompose(&crate::copula::bracket(second, grid)?, t)?;
    let g1_norm = d1.good_lp(p);
    let g2_norm = d2.good_lp(p);
    let relation = if (g1_norm - g2_norm).abs() <= 1e-9 {
        ToleranceRelation::Tied
    } else if g1_norm < g2_norm {
        ToleranceRelation::FirstMoreSymmetric
    } else {
        ToleranceRelation::SecondMoreSymmetric
    };
    Ok(ToleranceVerdict {
        relation,
        paper_orientation: relation.flipped(),
        g1_norm,
        g2_norm,
        b1_l1: d1.bad_l1(),
        b2_l1: d2.bad_l1(),
        t,
        p,
    })
}
