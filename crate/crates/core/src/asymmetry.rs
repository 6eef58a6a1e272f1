//! Asymmetry measures and orders: mu_p norms of the bracket, the pointwise
//! symmetry preorder, bracket-equality classes, and most-symmetric
//! parameter searches.

use serde_json::{json, Value};

use crate::copula::{bracket, AnySpec, Measurable};
use crate::cz::cz_decompose;
use crate::error::{Error, Result};
use crate::families::ParamFamily;
use crate::grid::{Grid, GridFunction, PExponent};

/// mu_p: the L^p norm of the bracket |C - C^T|.
///
/// Zero exactly when the spec is symmetric (a.e. for subcopulas, whose
/// measure ignores the null part). For full copulas the bracket is bounded
/// by 1, so the threshold-1 good/bad split is the identity and the norm is
/// taken directly.
pub fn mu_p(spec: &impl Measurable, p: PExponent, grid: Grid) -> Result<f64> {
    Ok(bracket(spec, grid)?.norm_lp(p))
}

/// mu_p through the dyadic good/bad decomposition at threshold `t`: the
/// L^p norm of the good part of the bracket. Coincides with [`mu_p`]
/// whenever no square is selected (in particular for any t >= sup bracket).
/// At p = 1 the split preserves the integral of the nonnegative bracket,
/// so the threshold only influences p > 1 and the sup norm.
pub fn mu_p_with_threshold(
    spec: &impl Measurable,
    p: PExponent,
    t: f64,
    grid: Grid,
) -> Result<f64> {
    let b = bracket(spec, grid)?;
    Ok(cz_decompose(&b, t)?.good_lp(p))
}

/// Outcome of a pointwise bracket comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    FirstMoreSymmetric,
    SecondMoreSymmetric,
    Equivalent,
    Incomparable,
}

impl Relation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::FirstMoreSymmetric => "first_more_symmetric",
            Relation::SecondMoreSymmetric => "second_more_symmetric",
            Relation::Equivalent => "equivalent",
            Relation::Incomparable => "incomparable",
        }
    }
}

/// A node where the bracket gap is extremal, with both bracket values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub u: f64,
    pub v: f64,
    pub bracket_first: f64,
    pub bracket_second: f64,
}

impl Witness {
    fn to_json_value(self) -> Value {
        json!({
            "u": self.u,
            "v": self.v,
            "bracket_first": self.bracket_first,
            "bracket_second": self.bracket_second,
        })
    }
}

/// Verdict of [`compare_order`]: the relation, extremal-gap witnesses
/// (two, one per direction, when incomparable), and the tolerance used.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub witnesses: Vec<Witness>,
    pub tol: f64,
}

impl OrderVerdict {
    pub fn to_json_value(&self) -> Value {
        json!({
            "relation": self.relation.as_str(),
            "witnesses": self.witnesses.iter().map(|w| w.to_json_value()).collect::<Vec<_>>(),
            "tol": self.tol,
        })
    }
}

fn check_tol(tol: f64) -> Result<f64> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::BadTolerance(tol));
    }
    Ok(tol)
}

struct GapScan {
    max_gap_12: f64,
    max_gap_21: f64,
    witness_12: Witness,
    witness_21: Witness,
}

fn scan_gaps(b1: &GridFunction, b2: &GridFunction) -> GapScan {
    let grid = b1.grid();
    let n = grid.n();
    let mut scan = GapScan {
        max_gap_12: f64::NEG_INFINITY,
        max_gap_21: f64::NEG_INFINITY,
        witness_12: Witness {
            u: 0.0,
            v: 0.0,
            bracket_first: 0.0,
            bracket_second: 0.0,
        },
        witness_21: Witness {
            u: 0.0,
            v: 0.0,
            bracket_first: 0.0,
            bracket_second: 0.0,
        },
    };
    for j in 0..=n {
        for i in 0..=n {
            let x1 = b1.value(i, j);
            let x2 = b2.value(i, j);
            let witness = Witness {
                u: grid.coord(i),
                v: grid.coord(j),
                bracket_first: x1,
                bracket_second: x2,
            };
            if x1 - x2 > scan.max_gap_12 {
                scan.max_gap_12 = x1 - x2;
                scan.witness_12 = witness;
            }
            if x2 - x1 > scan.max_gap_21 {
                scan.max_gap_21 = x2 - x1;
                scan.witness_21 = witness;
            }
        }
    }
    scan
}

/// Node-wise comparison of brackets: `first` is more symmetric when its
/// bracket is everywhere at most the second's (up to `tol`); both
/// directions give equivalence; neither gives incomparability, witnessed by
/// the maximal opposite-direction gaps.
pub fn compare_order(
    first: &impl Measurable,
    second: &impl Measurable,
    grid: Grid,
    tol: f64,
) -> Result<OrderVerdict> {
    let tol = check_tol(tol)?;
    let b1 = bracket(first, grid)?;
    let b2 = bracket(second, grid)?;
    let scan = scan_gaps(&b1, &b2);
    let first_le = scan.max_gap_12 <= tol;
    let second_le = scan.max_gap_21 <= tol;
    let (relation, witnesses) = match (first_le, second_le) {
        (true, true) => (Relation::Equivalent, vec![scan.witness_12]),
        (true, false) => (Relation::FirstMoreSymmetric, vec![scan.witness_21]),
        (false, true) => (Relation::SecondMoreSymmetric, vec![scan.witness_12]),
        (false, false) => (
            Relation::Incomparable,
            vec![scan.witness_12, scan.witness_21],
        ),
    };
    Ok(OrderVerdict {
        relation,
        witnesses,
        tol,
    })
}

/// Bracket-equality test: equivalent iff sup |b1 - b2| <= tol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    pub sup_deviation: f64,
}

pub fn equivalent(
    first: &impl Measurable,
    second: &impl Measurable,
    grid: Grid,
    tol: f64,
) -> Result<Equivalence> {
    let tol = check_tol(tol)?;
    let b1 = bracket(first, grid)?;
    let b2 = bracket(second, grid)?;
    let sup = b1
        .values()
        .iter()
        .zip(b2.values())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Equivalence {
        equivalent: sup <= tol,
        sup_deviation: sup,
    })
}

/// Partition of a spec list into bracket-equality classes.
///
/// Pairwise tolerance equivalence is not transitive, so classes are the
/// single-linkage transitive closure and `max_intra_deviation` reports how
/// much slack the closure absorbed.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPartition {
    pub classes: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
    pub max_intra_deviation: f64,
    pub tol: f64,
}

impl ClassPartition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "count": self.class_count(),
            "classes": self.classes,
            "representatives": self.representatives,
            "max_intra_deviation": self.max_intra_deviation,
            "tol": self.tol,
        })
    }
}

pub fn distinct_classes(specs: &[AnySpec], grid: Grid, tol: f64) -> Result<ClassPartition> {
    let tol = check_tol(tol)?;
    if specs.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let brackets: Vec<GridFunction> = specs
        .iter()
        .map(|s| bracket(s, grid))
        .collect::<Result<_>>()?;
    let m = specs.len();
    let mut dev = vec![vec![0.0_f64; m]; m];
    #[allow(clippy::needless_range_loop)]
    for a in 0..m {
        for b in a + 1..m {
            let sup = brackets[a]
                .values()
                .iter()
                .zip(brackets[b].values())
                .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()));
            dev[a][b] = sup;
            dev[b][a] = sup;
        }
    }

    // single-linkage closure over the pairwise relation
    let mut class_of: Vec<usize> = (0..m).collect();
    fn root(class_of: &mut [usize], mut k: usize) -> usize {
        while class_of[k] != k {
            class_of[k] = class_of[class_of[k]];
            k = class_of[k];
        }
        k
    }
    #[allow(clippy::needless_range_loop)]
    for a in 0..m {
        for b in a + 1..m {
            if dev[a][b] <= tol {
                let (ra, rb) = (root(&mut class_of, a), root(&mut class_of, b));
                let (lo, hi) = (ra.min(rb), ra.max(rb));
                class_of[hi] = lo;
            }
        }
    }

    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot_of_root = std::collections::BTreeMap::new();
    for k in 0..m {
        let r = root(&mut class_of, k);
        let slot = *slot_of_root.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[slot].push(k);
    }
    let representatives: Vec<usize> = classes.iter().map(|c| c[0]).collect();
    let mut max_intra = 0.0_f64;
    for class in &classes {
        for (ai, &a) in class.iter().enumerate() {
            for &b in &class[ai + 1..] {
                max_intra = max_intra.max(dev[a][b]);
            }
        }
    }
    Ok(ClassPartition {
        classes,
        representatives,
        max_intra_deviation: max_intra,
        tol,
    })
}

/// One golden-section shrink: the bracketing interval after the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenStep {
    pub lo: f64,
    pub hi: f64,
}

/// Result of [`most_symmetric`]: the coarse scan table, the refined argmin,
/// and the refinement trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub family: String,
    pub param: String,
    pub p: PExponent,
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub argmin_param: f64,
    pub argmin_value: f64,
    pub non_unimodal: bool,
    pub trace: Vec<GoldenStep>,
    pub evaluations: usize,
}

impl SweepResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// CSV table of the coarse scan: `param,mu_p` rows, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,mu_p\n");
        for (x, y) in self.params.iter().zip(&self.values) {
            out.push_str(&format!("{x:.16e},{y:.16e}\n"));
        }
        out
    }

    pub fn summary_json(&self) -> Value {
        json!({
            "argmin": self.argmin_param,
            "value": self.argmin_value,
            "iterations": self.iterations(),
            "non_unimodal": self.non_unimodal,
        })
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "family": self.family,
            "param": self.param,
            "p": self.p.to_string(),
            "params": self.params,
            "values": self.values,
            "argmin": self.argmin_param,
            "value": self.argmin_value,
            "iterations": self.iterations(),
            "non_unimodal": self.non_unimodal,
            "evaluations": self.evaluations,
            "trace": self.trace.iter().map(|s| json!({"lo": s.lo, "hi": s.hi})).collect::<Vec<_>>(),
        })
    }
}

const SCAN_POINTS: usize = 33;
const GOLDEN_MAX_ITERS: usize = 60;
const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Search the most symmetric member of a one-parameter family over [lo, hi]
/// by mu_p: a 33-point equispaced scan, then golden-section refinement from
/// the best bracketing triple until the interval shrinks below
/// 1e-6 * (hi - lo) or 60 iterations.
///
/// If the scan shows several local minima the family is flagged
/// `non_unimodal`, the global scan minimum is returned, and refinement is
/// skipped.
pub fn most_symmetric(
    family: &ParamFamily,
    lo: f64,
    hi: f64,
    p: PExponent,
    grid: Grid,
) -> Result<SweepResult> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::BadRange {
            lo,
            hi,
            reason: "need finite lo < hi".into(),
        });
    }
    for bound in [lo, hi] {
        if !family.range.contains(bound) {
            return Err(Error::ParamOutOfRange {
                family: family.family.clone(),
                param: family.param.into(),
                value: bound,
                range: family.range.text(family.param),
            });
        }
    }

    let mut evaluations = 0usize;
    let mut measure = |x: f64| -> Result<f64> {
        evaluations += 1;
        mu_p(&family.build(x)?, p, grid)
    };

    // degenerate widths: a single evaluation at the left endpoint
    if hi - lo < 1e-9 {
        let value = measure(lo)?;
        return Ok(SweepResult {
            family: family.family.clone(),
            param: family.param.into(),
            p,
            params: vec![lo],
            values: vec![value],
            argmin_param: lo,
            argmin_value: value,
            non_unimodal: false,
            trace: Vec::new(),
            evaluations,
        });
    }

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let params: Vec<f64> = (0..SCAN_POINTS).map(|k| lo + k as f64 * step).collect();
    let mut values = Vec::with_capacity(SCAN_POINTS);
    for &x in &params {
        values.push(measure(x)?);
    }

    let mut best_idx = 0;
    for k in 1..SCAN_POINTS {
        if values[k] < values[best_idx] {
            best_idx = k;
        }
    }
    let mut local_minima = 0;
    for k in 0..SCAN_POINTS {
        let left_up = k == 0 || values[k] < values[k - 1];
        let right_up = k == SCAN_POINTS - 1 || values[k] < values[k + 1];
        if left_up && right_up {
            local_minima += 1;
        }
    }

    let mut best_param = params[best_idx];
    let mut best_value = values[best_idx];
    let mut trace = Vec::new();
    let non_unimodal = local_minima > 1;

    if !non_unimodal && local_minima == 1 {
        let mut a = params[best_idx.saturating_sub(1)];
        let mut b = params[(best_idx + 1).min(SCAN_POINTS - 1)];
        let width_target = 1e-6 * (hi - lo);
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = measure(x1)?;
        let mut f2 = measure(x2)?;
        for value in [(x1, f1), (x2, f2)] {
            if value.1 < best_value {
                best_param = value.0;
                best_value = value.1;
            }
        }
        for _ in 0..GOLDEN_MAX_ITERS {
            if b - a <= width_target {
                break;
            }
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = measure(x1)?;
                if f1 < best_value {
                    best_param = x1;
                    best_value = f1;
                }
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = measure(x2)?;
                if f2 < best_value {
                    best_param = x2;
                    best_value = f2;
                }
            }
            trace.push(GoldenStep { lo: a, hi: b });
        }
    }

    Ok(SweepResult {
        family: family.family.clone(),
        param: family.param.into(),
        p,
        params,
        values,
        argmin_param: best_param,
        argmin_value: best_value,
        non_unimodal,
        trace,
        evaluations,
    })
}
