//! Loewner matrices, divided differences, Daleckii-Krein derivatives and
//! randomized falsifiers for matrix monotonicity, matrix concavity and the
//! Hansen-Pedersen contraction inequality.
//!
//! Every falsifier reports a [`Verdict`]. A PSD assertion `M >= 0` counts as
//! violated when `lambda_min(M) < -psd_rel * max(1, |M|_max)`; the margin of
//! a trial is `lambda_min(M)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Tolerances, TrialBudget, BOUNDARY_PERIOD, CONFLUENCE_REL, MATRIX_WINDOW};
use crate::error::{Error, Result};
use crate::scalarfn::{DomainInterval, ScalarFunction};
use crate::symmat::{self, DenseMatrix, SymMatrix};
use crate::trials::{self, TrialOutcome};
use crate::verdict::{Verdict, Witness, WitnessInputs};

pub const MONOTONE_ID: &str = "n-monotone";
pub const CONCAVE_ID: &str = "n-concave";
pub const HANSEN_PEDERSEN_ID: &str = "hansen-pedersen";

/// Strictly increasing nodes inside a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGrid {
    nodes: Vec<f64>,
}

impl NodeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() > symmat::MAX_DIM {
            return Err(Error::InvalidDimension(nodes.len()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite node".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    /// `k` distinct nodes drawn log-uniformly from `domain`.
    pub fn random<R: Rng + ?Sized>(k: usize, domain: &DomainInterval, rng: &mut R) -> Result<Self> {
        loop {
            let mut nodes: Vec<f64> = (0..k).map(|_| domain.sample_log_uniform(rng)).collect();
            nodes.sort_by(f64::total_cmp);
            nodes.dedup();
            if nodes.len() == k {
                return Self::new(nodes);
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(f(x) - f(y)) / (x - y)`, or `f'((x + y) / 2)` when the nodes are within
/// `1e-7 * max(1, |x|, |y|)` of each other.
pub fn divided_difference(f: &ScalarFunction, x: f64, y: f64) -> Result<f64> {
    if (x - y).abs() < CONFLUENCE_REL * x.abs().max(y.abs()).max(1.0) {
        return f.derivative(0.5 * (x + y));
    }
    Ok((f.eval(x)? - f.eval(y)?) / (x - y))
}

/// Loewner matrix at arbitrary (possibly repeated) points.
fn loewner_at(f: &ScalarFunction, points: &[f64]) -> Result<SymMatrix> {
    let n = points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = divided_difference(f, points[i], points[j])?;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymMatrix::from_vec(n, data)
}

/// Matrix of first divided differences of `f` at the grid nodes.
pub fn loewner_matrix(f: &ScalarFunction, grid: &NodeGrid) -> Result<SymMatrix> {
    loewner_at(f, grid.nodes())
}

/// Daleckii-Krein derivative `d/ds f(A + sC)` at `s = 0`: in the eigenbasis
/// of `A`, the Hadamard product of the Loewner matrix at the eigenvalues
/// with `Q^T C Q`.
pub fn frechet_derivative(f: &ScalarFunction, a: &SymMatrix, c: &SymMatrix) -> Result<SymMatrix> {
    if a.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: c.dim(),
        });
    }
    let spec = a.eig()?;
    let n = a.dim();
    let loewner = loewner_at(f, &spec.values)?;
    let rotated = c.congruence(&spec.vectors)?;
    let hadamard = SymMatrix::from_fn(n, |i, j| loewner.get(i, j) * rotated.get(i, j))?;
    hadamard.congruence(&spec.vectors.transpose())
}

fn psd_margin(m: &SymMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    Ok((m.min_eigenvalue()?, tol.psd_eps(m.max_abs())))
}

/// `(lambda_min, eps)` of the Loewner matrix at `nodes`.
pub fn loewner_margin(f: &ScalarFunction, nodes: &[f64], tol: &Tolerances) -> Result<(f64, f64)> {
    psd_margin(&loewner_at(f, nodes)?, tol)
}

/// `(lambda_min, eps)` of `f(B) - f(A)`.
pub fn order_margin(f: &ScalarFunction, a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    let fa = symmat::apply_fn(f, a, tol.clamp)?;
    let fb = symmat::apply_fn(f, b, tol.clamp)?;
    psd_margin(&fb.sub(&fa)?, tol)
}

/// `(lambda_min, eps)` of `f(wA + (1-w)B) - w f(A) - (1-w) f(B)`.
pub fn concave_margin(
    f: &ScalarFunction,
    a: &SymMatrix,
    b: &SymMatrix,
    w: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let mix = a.scale(w).add(&b.scale(1.0 - w))?;
    let lhs = symmat::apply_fn(f, &mix, tol.clamp)?;
    let rhs = symmat::apply_fn(f, a, tol.clamp)?
        .scale(w)
        .add(&symmat::apply_fn(f, b, tol.clamp)?.scale(1.0 - w))?;
    psd_margin(&lhs.sub(&rhs)?, tol)
}

/// `(lambda_min, eps)` of `f(C^T A C) - C^T f(A) C`.
pub fn contraction_margin(f: &ScalarFunction, a: &SymMatrix, c: &DenseMatrix, tol: &Tolerances) -> Result<(f64, f64)> {
    let lhs = symmat::apply_fn(f, &a.congruence(c)?, tol.clamp)?;
    let rhs = symmat::apply_fn(f, a, tol.clamp)?.congruence(c)?;
    psd_margin(&lhs.sub(&rhs)?, tol)
}

/// Budget, working domain and tolerances shared by the falsifiers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckSettings {
    pub budget: TrialBudget,
    pub domain: DomainInterval,
    pub tol: Tolerances,
}

impl CheckSettings {
    pub fn new(budget: TrialBudget) -> Self {
        Self {
            budget,
            domain: DomainInterval::DEFAULT,
            tol: Tolerances::DEFAULT,
        }
    }

    pub fn with_domain(mut self, domain: DomainInterval) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.budget.seed = seed;
        self
    }

    /// Spectrum window for random matrices: the domain intersected with
    /// `[1e-2, 1e2]`, or a slightly shrunk domain when they do not overlap.
    pub fn matrix_window(&self) -> (f64, f64) {
        let (lo, hi) = (self.domain.lo.max(MATRIX_WINDOW.0), self.domain.hi.min(MATRIX_WINDOW.1));
        if lo < hi {
            (lo, hi)
        } else {
            let hi = self.domain.sampling_hi();
            let width = hi - self.domain.lo;
            (self.domain.lo + 1e-6 * width, hi - 1e-6 * width)
        }
    }
}

fn witness(property_id: &str, margin: f64, tol: &Tolerances, inputs: WitnessInputs) -> Option<Witness> {
    Some(Witness {
        property_id: property_id.to_string(),
        margin,
        trial: None,
        seed: None,
        tolerances: *tol,
        inputs,
    })
}

/// Falsifies n-monotonicity of `f` on the settings' domain.
///
/// Each trial checks the Loewner matrix at `n` random nodes for positivity,
/// then checks `f(B) - f(A) >= 0` for a random ordered pair `A <= B` of
/// dimension `n`.
pub fn check_n_monotone(f: &ScalarFunction, n: usize, settings: &CheckSettings) -> Result<Verdict> {
    if n == 0 || n > symmat::MAX_DIM {
        return Err(Error::InvalidDimension(n));
    }
    let tol = settings.tol;
    let (lo, hi) = settings.matrix_window();
    trials::run(MONOTONE_ID, settings.budget, |_, rng| {
        let grid = NodeGrid::random(n, &settings.domain, rng)?;
        let (lm, eps) = loewner_margin(f, grid.nodes(), &tol)?;
        if lm < -eps {
            return Ok(TrialOutcome {
                margin: lm,
                witness: witness(
                    MONOTONE_ID,
                    lm,
                    &tol,
                    WitnessInputs::Loewner {
                        function: f.source().to_string(),
                        nodes: grid.nodes().to_vec(),
                    },
                ),
            });
        }
        let (a, b) = symmat::random_ordered_pair_in(n, lo, hi, settings.domain.hi, rng)?;
        let (om, eps) = order_margin(f, &a, &b, &tol)?;
        if om < -eps {
            return Ok(TrialOutcome {
                margin: om,
                witness: witness(
                    MONOTONE_ID,
                    om,
                    &tol,
                    WitnessInputs::Order {
                        function: f.source().to_string(),
                        a,
                        b,
                    },
                ),
            });
        }
        Ok(TrialOutcome::pass(lm.min(om)))
    })
}

/// Falsifies n-concavity: `f(wA + (1-w)B) >= w f(A) + (1-w) f(B)`.
///
/// The mixing weight is uniform on `[0, 1]`, except every 16th trial uses
/// `w = 1/2`.
pub fn check_n_concave(f: &ScalarFunction, n: usize, settings: &CheckSettings) -> Result<Verdict> {
    if n == 0 || n > symmat::MAX_DIM {
        return Err(Error::InvalidDimension(n));
    }
    let tol = settings.tol;
    let (lo, hi) = settings.matrix_window();
    trials::run(CONCAVE_ID, settings.budget, |i, rng| {
        let a = symmat::random_psd(n, lo, hi, rng)?;
        let b = symmat::random_psd(n, lo, hi, rng)?;
        let w = if i % BOUNDARY_PERIOD == 0 { 0.5 } else { rng.random_range(0.0..=1.0) };
        let (m, eps) = concave_margin(f, &a, &b, w, &tol)?;
        let found = (m < -eps).then(|| {
            WitnessInputs::Concave {
                function: f.source().to_string(),
                a,
                b,
                weight: w,
            }
        });
        Ok(TrialOutcome {
            margin: m,
            witness: found.and_then(|inputs| witness(CONCAVE_ID, m, &tol, inputs)),
        })
    })
}

/// Contraction used in trial `i`: the identity, the averaging projection
/// `11^T / n`, a coordinate projection, or a random contraction.
fn trial_contraction<R: Rng + ?Sized>(i: u64, n: usize, rng: &mut R) -> Result<DenseMatrix> {
    match i % BOUNDARY_PERIOD {
        0 => DenseMatrix::identity(n),
        4 => DenseMatrix::from_fn(n, n, |_, _| 1.0 / n as f64),
        8 => DenseMatrix::coordinate_projection(n, n / 2),
        _ => symmat::random_contraction(n, rng),
    }
}

/// Falsifies `f(C^T A C) >= C^T f(A) C` over contractions `C`.
pub fn check_hansen_pedersen(f: &ScalarFunction, n: usize, settings: &CheckSettings) -> Result<Verdict> {
    if n == 0 || n > symmat::MAX_DIM {
        return Err(Error::InvalidDimension(n));
    }
    let tol = settings.tol;
    let (lo, hi) = settings.matrix_window();
    trials::run(HANSEN_PEDERSEN_ID, settings.budget, |i, rng| {
        let a = symmat::random_psd(n, lo, hi, rng)?;
        let c = trial_contraction(i, n, rng)?;
        let (m, eps) = contraction_margin(f, &a, &c, &tol)?;
        let found = (m < -eps).then(|| WitnessInputs::Contraction {
            function: f.source().to_string(),
            a,
            c,
        });
        Ok(TrialOutcome {
            margin: m,
            witness: found.and_then(|inputs| witness(HANSEN_PEDERSEN_ID, m, &tol, inputs)),
        })
    })
}

/// One assertion of the concavity / contraction / monotonicity chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLeg {
    pub label: String,
    pub assertion: String,
    pub order: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub function: String,
    pub n: usize,
    /// `f` at the lower end of the domain is nonnegative (stand-in for `f(0) >= 0`).
    pub f_nonnegative_at_zero: bool,
    pub legs: Vec<ChainLeg>,
    /// Verdict combinations that contradict the implication chain.
    pub inconsistencies: Vec<String>,
}

impl ChainReport {
    pub fn all_hold(&self) -> bool {
        self.legs.iter().all(|l| l.verdict.holds())
    }
}

/// Runs the four legs
/// `concave(n+1)` (n+1)-concavity, `contraction(n)` contraction inequality,
/// `companion-monotone(n)` n-monotonicity of `t / f(t)`, `concave(n/2)`
/// floor(n/2)-concavity,
/// and flags every combination where a leg that holds within budget
/// implies a leg that was violated.
///
/// A leg that holds is never treated as proof, so a violation that is
/// merely missing is not flagged.
pub fn chain_consistency(f: &ScalarFunction, n: usize, settings: &CheckSettings) -> Result<ChainReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("chain consistency needs n >= 2".into()));
    }
    let g = f.companion();
    let leg_settings = |k: u64| settings.with_seed(trials::derive_seed(settings.budget.seed, k));
    let legs = vec![
        ChainLeg {
            label: "concave(n+1)".into(),
            assertion: format!("f is {}-concave with f(0) >= 0", n + 1),
            order: n + 1,
            verdict: check_n_concave(f, n + 1, &leg_settings(1))?,
        },
        ChainLeg {
            label: "contraction(n)".into(),
            assertion: format!("f(C*AC) >= C*f(A)C for all contractions C in M_{n}"),
            order: n,
            verdict: check_hansen_pedersen(f, n, &leg_settings(2))?,
        },
        ChainLeg {
            label: "companion-monotone(n)".into(),
            assertion: format!("t/f(t) is {n}-monotone"),
            order: n,
            verdict: check_n_monotone(&g, n, &leg_settings(3))?,
        },
        ChainLeg {
            label: "concave(n/2)".into(),
            assertion: format!("f is {}-concave", n / 2),
            order: n / 2,
            verdict: check_n_concave(f, n / 2, &leg_settings(4))?,
        },
    ];
    let f_nonnegative_at_zero = f.eval(settings.domain.lo).map(|v| v >= 0.0).unwrap_or(false);

    let holds = |k: usize| legs[k].verdict.holds();
    let violated = |k: usize| legs[k].verdict.violated();
    let mut inconsistencies = Vec::new();
    if holds(0) && f_nonnegative_at_zero && violated(1) {
        inconsistencies.push("concave(n+1) holds but contraction(n) is violated".to_string());
    }
    if holds(1) && violated(2) {
        inconsistencies.push("contraction(n) holds but companion-monotone(n) is violated".to_string());
    }
    if holds(2) && violated(1) {
        inconsistencies.push("companion-monotone(n) holds but contraction(n) is violated".to_string());
    }
    if holds(2) && violated(3) {
        inconsistencies.push("companion-monotone(n) holds but concave(n/2) is violated".to_string());
    }
    Ok(ChainReport {
        function: f.source().to_string(),
        n,
        f_nonnegative_at_zero,
        legs,
        inconsistencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verdict::Status;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn f(s: &str) -> ScalarFunction {
        ScalarFunction::parse(s).unwrap()
    }

    fn settings(trials: u64, seed: u64) -> CheckSettings {
        CheckSettings::new(TrialBudget::new(trials, seed))
    }

    #[test]
    fn divided_differences() {
        assert_eq!(divided_difference(&f("t^2"), 3.0, 1.0).unwrap(), 4.0);
        assert_eq!(divided_difference(&f("t"), 0.3, 7.0).unwrap(), 1.0);
        assert_eq!(divided_difference(&f("t^2"), 2.0, 2.0).unwrap(), 4.0);
        assert!(divided_difference(&f("log(t)"), -1.0, 2.0).unwrap_err().is_domain());
    }

    #[test]
    fn confluent_limit_approaches_derivative() {
        let func = f("exp(t) * sqrt(t)");
        let x = 1.3;
        let d = func.derivative(x).unwrap();
        let errs: Vec<f64> = [1e-4, 1e-6]
            .iter()
            .map(|&delta| (divided_difference(&func, x, x + delta).unwrap() - d).abs())
            .collect();
        assert!(errs[1] < errs[0]);
        // below the confluence threshold the derivative at the midpoint is used
        let near = divided_difference(&func, x, x + 1e-8).unwrap();
        assert_eq!(near, func.derivative(x + 0.5e-8).unwrap());
    }

    #[test]
    fn loewner_fixtures() {
        let grid = NodeGrid::new(vec![1.0, 2.0]).unwrap();
        let l = loewner_matrix(&f("t"), &grid).unwrap();
        assert_eq!(l.as_slice(), &[1.0; 4]);
        let l = loewner_matrix(&f("t^2"), &grid).unwrap();
        assert_eq!(l.to_rows(), vec![vec![2.0, 3.0], vec![3.0, 4.0]]);
        assert_eq!(2.0 * 4.0 - 3.0 * 3.0, -1.0);
        assert!(!l.is_psd(1e-8).unwrap());
        let l = loewner_matrix(&f("sqrt(t)"), &NodeGrid::new(vec![1.0, 4.0]).unwrap()).unwrap();
        assert_eq!(l.get(0, 0), 0.5);
        assert_eq!(l.get(1, 1), 0.25);
        assert!((l.get(0, 1) - 1.0 / 3.0).abs() < 1e-16);
        assert!(l.is_psd(1e-8).unwrap());
        assert!(NodeGrid::new(vec![2.0, 1.0]).is_err());
        assert!(NodeGrid::new(vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn frechet_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = symmat::random_psd(4, 0.5, 3.0, &mut rng).unwrap();
        let c = symmat::random_symmetric(4, &mut rng).unwrap();
        let d = frechet_derivative(&f("t"), &a, &c).unwrap();
        assert!(d.max_abs_diff(&c).unwrap() < 1e-12);
        // oracle: the anticommutator AC + CA
        let d = frechet_derivative(&f("t^2"), &a, &c).unwrap();
        let ac = a.matmul(&c).unwrap();
        let expected = SymMatrix::from_fn(4, |i, j| ac.get(i, j) + ac.get(j, i)).unwrap();
        assert!(d.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn frechet_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let func = f("log(t) + t^0.3");
        let a = symmat::random_psd(4, 0.5, 3.0, &mut rng).unwrap();
        let c1 = symmat::random_symmetric(4, &mut rng).unwrap();
        let c2 = symmat::random_symmetric(4, &mut rng).unwrap();
        let lhs = frechet_derivative(&func, &a, &c1.scale(2.0).add(&c2.scale(-0.7)).unwrap()).unwrap();
        let rhs = frechet_derivative(&func, &a, &c1)
            .unwrap()
            .scale(2.0)
            .add(&frechet_derivative(&func, &a, &c2).unwrap().scale(-0.7))
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-9);
    }

    #[test]
    fn monotone_verdicts() {
        let v = check_n_monotone(&f("t^2"), 2, &settings(200, 7)).unwrap();
        assert_eq!(v.status, Status::Violated);
        let w = v.witness.as_ref().unwrap();
        assert!(w.margin < 0.0);
        assert!((w.replay().unwrap() - w.margin).abs() <= 1e-12);

        let v = check_n_monotone(&f("t"), 3, &settings(200, 1)).unwrap();
        assert!(v.holds());
        assert!(v.min_margin.unwrap() >= -1e-8);

        let v = check_n_monotone(&f("sqrt(t)"), 4, &settings(500, 3)).unwrap();
        assert!(v.holds(), "{v:?}");
        assert_eq!(v.trials_run, 500);
    }

    #[test]
    fn monotone_domain_error_verdict() {
        let v = check_n_monotone(&f("log(t - 1)"), 2, &settings(100, 1)).unwrap();
        assert_eq!(v.status, Status::DomainError);
        assert!(v.domain_fault.unwrap().point.unwrap() <= 1.0);
    }

    #[test]
    fn concave_verdicts() {
        let v = check_n_concave(&f("t"), 3, &settings(200, 1)).unwrap();
        assert!(v.holds());
        assert!(v.min_margin.unwrap().abs() < 1e-8);
        let v = check_n_concave(&f("sqrt(t)"), 3, &settings(300, 2)).unwrap();
        assert!(v.holds(), "{v:?}");
        let dom = DomainInterval::new(1e-6, 10.0).unwrap();
        let v = check_n_concave(&f("t^2"), 1, &settings(50, 3).with_domain(dom)).unwrap();
        assert!(v.violated());
        let w = v.witness.unwrap();
        assert!((w.replay().unwrap() - w.margin).abs() <= 1e-12);
        // scalar oracle for convexity of t^2
        let (x, y) = (0.1f64, 4.0f64);
        assert!((0.5 * x + 0.5 * y).powi(2) < 0.5 * x * x + 0.5 * y * y);
    }

    #[test]
    fn contraction_identity_is_exact_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = symmat::random_psd(3, 0.1, 10.0, &mut rng).unwrap();
        let c = DenseMatrix::identity(3).unwrap();
        let (m, _) = contraction_margin(&f("sqrt(t)"), &a, &c, &Tolerances::DEFAULT).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn hansen_pedersen_verdicts() {
        let v = check_hansen_pedersen(&f("sqrt(t)"), 3, &settings(300, 4)).unwrap();
        assert!(v.holds(), "{v:?}");
        let v = check_hansen_pedersen(&f("t^2"), 2, &settings(300, 4)).unwrap();
        assert!(v.violated());
        let w = v.witness.unwrap();
        assert!((w.replay().unwrap() - w.margin).abs() <= 1e-12);
    }

    #[test]
    fn chain_reports() {
        let r = chain_consistency(&f("sqrt(t)"), 3, &settings(200, 5)).unwrap();
        assert!(r.all_hold(), "{r:?}");
        assert!(r.inconsistencies.is_empty());
        let r = chain_consistency(&f("t"), 2, &settings(200, 5)).unwrap();
        assert!(r.all_hold(), "{r:?}");
        let r = chain_consistency(&f("t^2"), 2, &settings(200, 5)).unwrap();
        assert!(r.legs[0].verdict.violated());
        assert!(r.inconsistencies.is_empty(), "{:?}", r.inconsistencies);
        assert!(chain_consistency(&f("t"), 1, &settings(10, 5)).is_err());
    }
}
