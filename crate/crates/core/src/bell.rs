//! Coincidence tables, CHSH evaluation, the marginal-law audit and the
//! four-way classification of Bell-violating situations.

use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sum tolerance for tables that are meant to be exact.
pub const STRICT_SUM_TOL: f64 = 1e-9;
/// Sum tolerance accepted when renormalizing rounded experimental tables.
pub const ROUNDING_SUM_TOL: f64 = 0.005;
pub const DEFAULT_TOL_BELL: f64 = 1e-6;
pub const DEFAULT_TOL_MARGINAL: f64 = 1e-6;
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "A'")]
    APrime,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "B'")]
    BPrime,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::A, Setting::APrime, Setting::B, Setting::BPrime];

    pub fn label(self) -> &'static str {
        match self {
            Setting::A => "A",
            Setting::APrime => "A'",
            Setting::B => "B",
            Setting::BPrime => "B'",
        }
    }

    pub fn is_left(self) -> bool {
        matches!(self, Setting::A | Setting::APrime)
    }
}

/// One of the four coincidence experiments, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Context {
    #[serde(rename = "AB")]
    AB,
    #[serde(rename = "AB'")]
    ABPrime,
    #[serde(rename = "A'B")]
    APrimeB,
    #[serde(rename = "A'B'")]
    APrimeBPrime,
}

impl Context {
    pub const ALL: [Context; 4] =
        [Context::AB, Context::ABPrime, Context::APrimeB, Context::APrimeBPrime];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Context::AB => "AB",
            Context::ABPrime => "AB'",
            Context::APrimeB => "A'B",
            Context::APrimeBPrime => "A'B'",
        }
    }

    pub fn settings(self) -> (Setting, Setting) {
        match self {
            Context::AB => (Setting::A, Setting::B),
            Context::ABPrime => (Setting::A, Setting::BPrime),
            Context::APrimeB => (Setting::APrime, Setting::B),
            Context::APrimeBPrime => (Setting::APrime, Setting::BPrime),
        }
    }

    pub fn from_settings(left: Setting, right: Setting) -> Option<Context> {
        Context::ALL.into_iter().find(|c| c.settings() == (left, right))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How strictly a table's probabilities must sum to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableOptions {
    pub sum_tol: f64,
    /// Rescale tables within [`ROUNDING_SUM_TOL`] of one.
    pub normalize: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { sum_tol: STRICT_SUM_TOL, normalize: false }
    }
}

impl TableOptions {
    pub fn normalizing() -> Self {
        Self { sum_tol: ROUNDING_SUM_TOL, normalize: true }
    }
}

/// A 2×2 coincidence table `p[i][j] = p(A_i, B_j)` with per-side outcome
/// values (default `+1, -1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    p: [[f64; 2]; 2],
    outcomes_a: [f64; 2],
    outcomes_b: [f64; 2],
}

impl JointTable {
    pub fn new(p: [[f64; 2]; 2]) -> Result<Self> {
        Self::with_options(p, [1.0, -1.0], [1.0, -1.0], TableOptions::default())
    }

    /// Table from `(p11, p12, p21, p22)`.
    pub fn from_grid(q: [f64; 4]) -> Result<Self> {
        Self::new([[q[0], q[1]], [q[2], q[3]]])
    }

    pub fn with_options(
        p: [[f64; 2]; 2],
        outcomes_a: [f64; 2],
        outcomes_b: [f64; 2],
        options: TableOptions,
    ) -> Result<Self> {
        for (i, row) in p.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::InvalidProbabilities(format!(
                        "p({},{}) = {x} is not a nonnegative number",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        for &o in outcomes_a.iter().chain(&outcomes_b) {
            if !o.is_finite() {
                return Err(Error::InvalidProbabilities(format!("outcome value {o} is not finite")));
            }
        }
        let sum: f64 = p.iter().flatten().sum();
        let tol = if options.normalize { options.sum_tol.max(STRICT_SUM_TOL) } else { options.sum_tol };
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidProbabilities(format!(
                "table sums to {sum}, off by more than {tol:e}"
            )));
        }
        let p = if options.normalize {
            p.map(|row| row.map(|x| x / sum))
        } else {
            p
        };
        Ok(Self { p, outcomes_a, outcomes_b })
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[i][j]
    }

    pub fn probabilities(&self) -> [[f64; 2]; 2] {
        self.p
    }

    /// `(p11, p12, p21, p22)`
    pub fn grid(&self) -> [f64; 4] {
        [self.p[0][0], self.p[0][1], self.p[1][0], self.p[1][1]]
    }

    pub fn outcomes_a(&self) -> [f64; 2] {
        self.outcomes_a
    }

    pub fn outcomes_b(&self) -> [f64; 2] {
        self.outcomes_b
    }

    /// p(A_i) = p_i1 + p_i2
    pub fn marginal_a(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[0][1], self.p[1][0] + self.p[1][1]]
    }

    /// p(B_j) = p_1j + p_2j
    pub fn marginal_b(&self) -> [f64; 2] {
        [self.p[0][0] + self.p[1][0], self.p[0][1] + self.p[1][1]]
    }

    /// Σ_ij λ_{A_i} λ_{B_j} p_ij
    pub fn expectation(&self) -> f64 {
        let mut e = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                e += self.outcomes_a[i] * self.outcomes_b[j] * self.p[i][j];
            }
        }
        e
    }

    /// Same table with the A-side outcomes exchanged (rows swapped).
    pub fn swap_a(&self) -> Self {
        Self { p: [self.p[1], self.p[0]], ..self.clone() }
    }

    /// Same table with the B-side outcomes exchanged (columns swapped).
    pub fn swap_b(&self) -> Self {
        Self {
            p: [[self.p[0][1], self.p[0][0]], [self.p[1][1], self.p[1][0]]],
            ..self.clone()
        }
    }
}

pub fn expectation(t: &JointTable) -> f64 {
    t.expectation()
}

/// The four coincidence tables of one CHSH experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    tables: [JointTable; 4],
}

impl BellData {
    /// Tables in the order AB, AB′, A′B, A′B′.
    pub fn new(tables: [JointTable; 4]) -> Self {
        Self { label: None, tables }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Tables from grids `(p11, p12, p21, p22)` in context order.
    pub fn from_grids(grids: [[f64; 4]; 4]) -> Result<Self> {
        let [ab, abp, apb, apbp] = grids;
        Ok(Self::new([
            JointTable::from_grid(ab)?,
            JointTable::from_grid(abp)?,
            JointTable::from_grid(apb)?,
            JointTable::from_grid(apbp)?,
        ]))
    }

    pub fn table(&self, context: Context) -> &JointTable {
        &self.tables[context.index()]
    }

    pub fn tables(&self) -> &[JointTable; 4] {
        &self.tables
    }

    pub fn expectations(&self) -> [f64; 4] {
        self.tables.each_ref().map(JointTable::expectation)
    }

    /// Exchange the two outcomes of one setting in both tables that use it.
    pub fn relabel(&self, setting: Setting) -> Self {
        let mut out = self.clone();
        for ctx in Context::ALL {
            let (left, right) = ctx.settings();
            let t = &out.tables[ctx.index()];
            if left == setting {
                out.tables[ctx.index()] = t.swap_a();
            } else if right == setting {
                out.tables[ctx.index()] = t.swap_b();
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshValues {
    /// E(A′,B′) + E(A′,B) + E(A,B′) − E(A,B)
    pub standard: f64,
    /// Largest |S| over the placements of a single minus sign.
    pub max: f64,
}

/// CHSH combination with the minus sign on `minus` (context order index).
fn chsh_with_minus(e: &[f64; 4], minus: usize) -> f64 {
    e.iter()
        .enumerate()
        .map(|(k, &x)| if k == minus { -x } else { x })
        .sum()
}

pub fn chsh(d: &BellData) -> ChshValues {
    let e = d.expectations();
    let standard = chsh_with_minus(&e, Context::AB.index());
    let max = (0..4).map(|k| chsh_with_minus(&e, k).abs()).fold(0.0, f64::max);
    ChshValues { standard, max }
}

/// One comparison of a single-side marginal across the two contexts that
/// share the setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalDeviation {
    pub setting: Setting,
    /// Outcome index, 1 or 2.
    pub outcome: usize,
    pub contexts: (Context, Context),
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
}

/// All eight shared-setting marginal comparisons, in the order
/// A₁, A₂, A′₁, A′₂, B₁, B₂, B′₁, B′₂.
pub fn marginal_law_audit(d: &BellData) -> Vec<MarginalDeviation> {
    let mut out = Vec::with_capacity(8);
    for setting in Setting::ALL {
        let (c1, c2) = match setting {
            Setting::A => (Context::AB, Context::ABPrime),
            Setting::APrime => (Context::APrimeB, Context::APrimeBPrime),
            Setting::B => (Context::AB, Context::APrimeB),
            Setting::BPrime => (Context::ABPrime, Context::APrimeBPrime),
        };
        let marg = |ctx: Context| {
            let t = d.table(ctx);
            if setting.is_left() { t.marginal_a() } else { t.marginal_b() }
        };
        let (m1, m2) = (marg(c1), marg(c2));
        for k in 0..2 {
            out.push(MarginalDeviation {
                setting,
                outcome: k + 1,
                contexts: (c1, c2),
                lhs: m1[k],
                rhs: m2[k],
                deviation: (m1[k] - m2[k]).abs(),
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    pub factorizable: bool,
    /// Row marginals `(a1, a2)`.
    pub a: [f64; 2],
    /// Column marginals `(b1, b2)`.
    pub b: [f64; 2],
    /// |p11 p22 − p12 p21|
    pub residual: f64,
}

/// Whether `p_ij = a_i b_j` for some probability vectors `a`, `b`.
/// For a normalized 2×2 table this holds exactly when the determinant
/// vanishes, and then the marginals are the factors.
pub fn factorizability(t: &JointTable, tol: f64) -> Factorization {
    let p = t.probabilities();
    let residual = (p[0][0] * p[1][1] - p[0][1] * p[1][0]).abs();
    Factorization {
        factorizable: residual <= tol,
        a: t.marginal_a(),
        b: t.marginal_b(),
        residual,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NoViolation,
    Type1,
    Type2,
    Type3,
    Type4,
}

impl Verdict {
    pub fn modeling(self) -> &'static str {
        match self {
            Verdict::NoViolation => "no Bell violation",
            Verdict::Type1 => "customary quantum modeling",
            Verdict::Type2 => "nonlocal non-marginal box modeling 1",
            Verdict::Type3 => "nonlocal non-marginal box modeling 2",
            Verdict::Type4 => "nonlocal box modeling",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verdict::NoViolation => "NoViolation",
            Verdict::Type1 => "Type1",
            Verdict::Type2 => "Type2",
            Verdict::Type3 => "Type3",
            Verdict::Type4 => "Type4",
        };
        f.write_str(name)
    }
}

/// Thresholds applied to raw numbers; exposed so reports can be re-derived.
pub fn verdict_for(chsh_max: f64, max_marginal_deviation: f64, tol_bell: f64, tol_marginal: f64) -> Verdict {
    let marginal_holds = max_marginal_deviation <= tol_marginal;
    if chsh_max <= 2.0 + tol_bell {
        Verdict::NoViolation
    } else if chsh_max <= TSIRELSON_BOUND + tol_bell {
        if marginal_holds { Verdict::Type1 } else { Verdict::Type2 }
    } else if marginal_holds {
        Verdict::Type4
    } else {
        Verdict::Type3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// E(A,B), E(A,B′), E(A′,B), E(A′,B′)
    pub expectations: [f64; 4],
    pub chsh: f64,
    pub chsh_max: f64,
    pub marginal_deviations: Vec<MarginalDeviation>,
    pub max_marginal_deviation: f64,
    /// Per context, in context order.
    pub factorizable: [bool; 4],
    pub verdict: Verdict,
    pub tol_bell: f64,
    pub tol_marginal: f64,
}

impl ClassificationReport {
    pub fn marginal_law_holds(&self) -> bool {
        self.max_marginal_deviation <= self.tol_marginal
    }

    pub fn deviation(&self, setting: Setting, outcome: usize) -> Option<&MarginalDeviation> {
        self.marginal_deviations
            .iter()
            .find(|m| m.setting == setting && m.outcome == outcome)
    }
}

/// Factorizability uses `tol_marginal` as its determinant tolerance.
pub fn classify(d: &BellData, tol_bell: f64, tol_marginal: f64) -> ClassificationReport {
    let expectations = d.expectations();
    let ChshValues { standard, max } = chsh(d);
    let marginal_deviations = marginal_law_audit(d);
    let max_marginal_deviation = marginal_deviations.iter().map(|m| m.deviation).fold(0.0, f64::max);
    let factorizable = d.tables().each_ref().map(|t| factorizability(t, tol_marginal).factorizable);
    ClassificationReport {
        expectations,
        chsh: standard,
        chsh_max: max,
        marginal_deviations,
        max_marginal_deviation,
        factorizable,
        verdict: verdict_for(max, max_marginal_deviation, tol_bell, tol_marginal),
        tol_bell,
        tol_marginal,
    }
}
