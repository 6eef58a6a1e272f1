//! Copula axiom verification on a grid.
//!
//! Checks groundedness, uniform margins, 2-increasingness on all adjacent
//! node rectangles, the two-sided Lipschitz estimate, and the
//! Frechet-Hoeffding envelope. Failures are report entries, never errors:
//! margin-violating evaluators are legitimate inputs here.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::grid::{Grid, GridFunction};

use super::CopulaSpec;

/// Node coordinates of a worst offender.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeWitness {
    pub u: f64,
    pub v: f64,
}

/// Rectangle `[u1,u2] x [v1,v2]` of a most-negative volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectWitness {
    pub u1: f64,
    pub v1: f64,
    pub u2: f64,
    pub v2: f64,
}

/// Node pair of a worst Lipschitz excess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWitness {
    pub first: NodeWitness,
    pub second: NodeWitness,
}

/// One axiom check: `worst` is the largest violation magnitude observed
/// (0 when the condition holds everywhere) and `pass` is `worst <= tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check<W> {
    pub pass: bool,
    pub worst: f64,
    pub witness: Option<W>,
}

impl<W> Check<W> {
    fn from_worst(worst: f64, tol: f64, witness: Option<W>) -> Self {
        Check {
            pass: worst <= tol,
            worst,
            witness,
        }
    }
}

/// Aggregated verdict of [`verify_axioms`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub tol: f64,
    pub grounded: Check<NodeWitness>,
    pub margins: Check<NodeWitness>,
    pub two_increasing: Check<RectWitness>,
    pub lipschitz: Check<PairWitness>,
    pub fh_envelope: Check<NodeWitness>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.grounded.pass
            && self.margins.pass
            && self.two_increasing.pass
            && self.lipschitz.pass
            && self.fh_envelope.pass
    }

    pub fn to_json_value(&self) -> Value {
        fn node(w: &Option<NodeWitness>) -> Value {
            match w {
                Some(NodeWitness { u, v }) => json!({"u": u, "v": v}),
                None => Value::Null,
            }
        }
        let rect = match &self.two_increasing.witness {
            Some(RectWitness { u1, v1, u2, v2 }) => {
                json!({"u1": u1, "v1": v1, "u2": u2, "v2": v2})
            }
            None => Value::Null,
        };
        let pair = match &self.lipschitz.witness {
            Some(PairWitness { first, second }) => json!({
                "first": {"u": first.u, "v": first.v},
                "second": {"u": second.u, "v": second.v},
            }),
            None => Value::Null,
        };
        json!({
            "pass": self.all_pass(),
            "tol": self.tol,
            "grounded": {
                "pass": self.grounded.pass,
                "worst": self.grounded.worst,
                "witness": node(&self.grounded.witness),
            },
            "margins": {
                "pass": self.margins.pass,
                "worst": self.margins.worst,
                "witness": node(&self.margins.witness),
            },
            "two_increasing": {
                "pass": self.two_increasing.pass,
                "worst": self.two_increasing.worst,
                "witness": rect,
            },
            "lipschitz": {
                "pass": self.lipschitz.pass,
                "worst": self.lipschitz.worst,
                "witness": pair,
            },
            "fh_envelope": {
                "pass": self.fh_envelope.pass,
                "worst": self.fh_envelope.worst,
                "witness": node(&self.fh_envelope.witness),
            },
        })
    }
}

/// Number of random node pairs added to the axis-aligned Lipschitz sweep.
const RANDOM_PAIRS: usize = 10_000;

/// Verify the copula axioms of `spec` on `grid` at tolerance `tol`, with a
/// fixed seed for the random Lipschitz pair sample.
pub fn verify_axioms(spec: &CopulaSpec, grid: Grid, tol: f64) -> Result<AxiomReport> {
    verify_axioms_seeded(spec, grid, tol, 0)
}

/// As [`verify_axioms`], with an explicit seed.
///
/// The checks, all on the rendered node table:
/// - grounded: C(0,v) = C(u,0) = 0;
/// - margins: C(1,v) = v and C(u,1) = u;
/// - 2-increasing: every adjacent-node rectangle has volume >= -tol
///   (volumes of larger rectangles are sums of these);
/// - Lipschitz: |dC| <= |du| + |dv| + tol on all axis-aligned neighbor
///   pairs plus a seeded random pair sample (the axis sweep already implies
///   the bound for any same-row/column pair by telescoping);
/// - envelope: max(u+v-1, 0) - tol <= C <= min(u,v) + tol.
pub fn verify_axioms_seeded(
    spec: &CopulaSpec,
    grid: Grid,
    tol: f64,
    seed: u64,
) -> Result<AxiomReport> {
    let c = GridFunction::sample(grid, |u, v| spec.eval(u, v))?;
    let tol = if tol > 0.0 { tol } else { 0.0 };
    Ok(AxiomReport {
        tol,
        grounded: check_grounded(&c, tol),
        margins: check_margins(&c, tol),
        two_increasing: check_two_increasing(&c, tol),
        lipschitz: check_lipschitz(&c, tol, seed),
        fh_envelope: check_envelope(&c, tol),
    })
}

fn check_grounded(c: &GridFunction, tol: f64) -> Check<NodeWitness> {
    let grid = c.grid();
    let n = grid.n();
    let mut worst = 0.0_f64;
    let mut witness = None;
    for i in 0..=n {
        for (a, b) in [(i, 0), (0, i)] {
            let violation = c.value(a, b).abs();
            if violation > worst {
                worst = violation;
                witness = Some(NodeWitness {
                    u: grid.coord(a),
                    v: grid.coord(b),
                });
            }
        }
    }
    Check::from_worst(worst, tol, witness)
}

fn check_margins(c: &GridFunction, tol: f64) -> Check<NodeWitness> {
    let grid = c.grid();
    let n = grid.n();
    let mut worst = 0.0_f64;
    let mut witness = None;
    for i in 0..=n {
        let t = grid.coord(i);
        for (value, u, v) in [(c.value(n, i), 1.0, t), (c.value(i, n), t, 1.0)] {
            let violation = (value - t).abs();
            if violation > worst {
                worst = violation;
                witness = Some(NodeWitness { u, v });
            }
        }
    }
    Check::from_worst(worst, tol, witness)
}

fn check_two_increasing(c: &GridFunction, tol: f64) -> Check<RectWitness> {
    let grid = c.grid();
    let n = grid.n();
    let mut min_volume = f64::INFINITY;
    let mut witness = None;
    for j in 0..n {
        for i in 0..n {
            let volume =
                c.value(i + 1, j + 1) - c.value(i + 1, j) - c.value(i, j + 1) + c.value(i, j);
            if volume < min_volume {
                min_volume = volume;
                witness = Some(RectWitness {
                    u1: grid.coord(i),
                    v1: grid.coord(j),
                    u2: grid.coord(i + 1),
                    v2: grid.coord(j + 1),
                });
            }
        }
    }
    let worst = (-min_volume).max(0.0);
    Check::from_worst(worst, tol, witness)
}

fn check_lipschitz(c: &GridFunction, tol: f64, seed: u64) -> Check<PairWitness> {
    let grid = c.grid();
    let n = grid.n();
    let h = grid.h();
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;

    let consider = |worst: &mut f64,
                    witness: &mut Option<PairWitness>,
                    i1: usize,
                    j1: usize,
                    i2: usize,
                    j2: usize,
                    bound: f64| {
        let excess = (c.value(i2, j2) - c.value(i1, j1)).abs() - bound;
        if excess > *worst {
            *worst = excess;
            *witness = Some(PairWitness {
                first: NodeWitness {
                    u: grid.coord(i1),
                    v: grid.coord(j1),
                },
                second: NodeWitness {
                    u: grid.coord(i2),
                    v: grid.coord(j2),
                },
            });
        }
    };

    for j in 0..=n {
        for i in 0..n {
            consider(&mut worst, &mut witness, i, j, i + 1, j, h);
            consider(&mut worst, &mut witness, j, i, j, i + 1, h);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_PAIRS {
        let i1 = rng.random_range(0..=n);
        let j1 = rng.random_range(0..=n);
        let i2 = rng.random_range(0..=n);
        let j2 = rng.random_range(0..=n);
        let bound =
            (grid.coord(i2) - grid.coord(i1)).abs() + (grid.coord(j2) - grid.coord(j1)).abs();
        consider(&mut worst, &mut witness, i1, j1, i2, j2, bound);
    }

    Check::from_worst(worst.max(0.0), tol, witness)
}

fn check_envelope(c: &GridFunction, tol: f64) -> Check<NodeWitness> {
    let grid = c.grid();
    let n = grid.n();
    let mut worst = 0.0_f64;
    let mut witness = None;
    for j in 0..=n {
        let v = grid.coord(j);
        for i in 0..=n {
            let u = grid.coord(i);
            let value = c.value(i, j);
            let lower = (u + v - 1.0).max(0.0);
            let upper = u.min(v);
            let violation = (lower - value).max(value - upper).max(0.0);
            if violation > worst {
                worst = violation;
                witness = Some(NodeWitness { u, v });
            }
        }
    }
    Check::from_worst(worst, tol, witness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::convex_combine;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn product_copula_passes_everything() {
        let report = verify_axioms(&CopulaSpec::Product, grid(64), 1e-12).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn frechet_bounds_and_clayton_pass() {
        for spec in [
            CopulaSpec::FrechetUpper,
            CopulaSpec::FrechetLower,
            CopulaSpec::clayton(1.0).unwrap(),
            CopulaSpec::gumbel(2.0).unwrap(),
        ] {
            let report = verify_axioms(&spec, grid(64), 1e-9).unwrap();
            assert!(report.all_pass(), "{spec:?}: {report:?}");
        }
    }

    #[test]
    fn sqrt_u_times_v_fails_margins_at_quarter() {
        // C(u,1) = u^0.5, worst deviation |0.5 - 0.25| at u = 0.25
        let c = CopulaSpec::power_product(1.0, 0.5, 1.0).unwrap();
        let report = verify_axioms(&c, grid(64), 1e-9).unwrap();
        assert!(!report.margins.pass);
        assert!((report.margins.worst - 0.25).abs() < 1e-12);
        let w = report.margins.witness.unwrap();
        assert_eq!((w.u, w.v), (0.25, 1.0));
        // groundedness is untouched
        assert!(report.grounded.pass);
        assert!(report.two_increasing.pass);
    }

    #[test]
    fn shifted_average_fails_grounded_but_is_flat() {
        let c = CopulaSpec::custom("average", |u, v| 0.5 * (u + v));
        let report = verify_axioms(&c, grid(32), 1e-9).unwrap();
        assert!(report.two_increasing.pass);
        assert_eq!(report.two_increasing.worst, 0.0);
        assert!(!report.grounded.pass);
        assert!((report.grounded.worst - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixtures_of_copulas_pass() {
        let mix = convex_combine(
            &CopulaSpec::FrechetUpper,
            &CopulaSpec::clayton(2.0).unwrap(),
            0.3,
        )
        .unwrap();
        let report = verify_axioms(&mix, grid(64), 1e-9).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn seeded_reports_are_identical() {
        let c = CopulaSpec::clayton(0.5).unwrap();
        let a = verify_axioms_seeded(&c, grid(32), 1e-9, 11).unwrap();
        let b = verify_axioms_seeded(&c, grid(32), 1e-9, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a.to_json_value()).unwrap(),
            serde_json::to_string(&b.to_json_value()).unwrap()
        );
    }

    #[test]
    fn report_json_has_check_fields() {
        let report = verify_axioms(&CopulaSpec::Product, grid(16), 1e-9).unwrap();
        let doc = report.to_json_value();
        for key in [
            "grounded",
            "margins",
            "two_increasing",
            "lipschitz",
            "fh_envelope",
        ] {
            assert!(doc[key]["pass"].is_boolean(), "missing {key}.pass");
            assert!(doc[key]["worst"].is_number(), "missing {key}.worst");
        }
    }
}
