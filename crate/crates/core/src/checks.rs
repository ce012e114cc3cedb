//! Runnable identity and consistency suite.
//!
//! Every check draws its own seeded sample set, evaluates an identity against
//! an independent oracle and reports the worst deviation seen.

use std::fmt;

use nalgebra::Matrix3;

use crate::calculus::jacobians::{
    d_compose_left, d_compose_right, d_exp, d_inverse, d_log, d_rotate_d_orientation,
    d_rotate_d_vector, d_time,
};
use crate::calculus::{
    gamma, gamma_inverse, log_additivity_limit, numeric_diff_between_manifolds,
    numeric_diff_from_manifold, numeric_diff_to_manifold, numeric_jacobian,
    numeric_jacobian_to_manifold, rodriguez, DiffConfig,
};
use crate::kinematics::{
    correct_imu, measurement_jacobians, measurement_residual, process_jacobians, propagate,
    ErrorVector, ImuSample, Matrix15, MeasurementJacobian, NavState, PoseMeasurement,
    ProcessNoise, DEFAULT_GRAVITY, ERROR_DIM,
};
use crate::orientation::{hat, Orientation, Vec3, SMALL_ANGLE_THRESHOLD};
use crate::sampling::{
    random_orientation, random_rotation_vector, random_small_rotation_vector, random_unit_vector,
    random_vec3, seeded, Prng,
};
use crate::sim::reference_trajectories;

/// Deliberate defects used to confirm that the suite detects broken code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of the cross-product term in quaternion composition.
    ComposeSign,
}

impl std::str::FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "compose-sign" => Ok(Self::ComposeSign),
            other => Err(format!("unknown fault `{other}`")),
        }
    }
}

/// Sample counts of every check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuiteSizes {
    pub consistency: usize,
    pub small_angle: usize,
    pub axioms: usize,
    pub jacobian_points: usize,
    pub trajectory_points: usize,
    pub rodriguez: usize,
    pub adjoint: usize,
    pub gamma: usize,
    pub limit_pairs: usize,
    pub model_points: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self::scaled(1000)
    }
}

impl SuiteSizes {
    /// Counts proportional to `n`, the size of the consistency matrix.
    pub fn scaled(n: usize) -> Self {
        let part = |d: usize| (n / d).max(1);
        Self {
            consistency: n.max(1),
            small_angle: part(10),
            axioms: n.max(1),
            jacobian_points: part(5),
            trajectory_points: part(20),
            rodriguez: part(2),
            adjoint: n.max(1),
            gamma: part(2),
            limit_pairs: part(10),
            model_points: part(10),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub sizes: SuiteSizes,
    pub fault: Option<Fault>,
}

impl SuiteConfig {
    fn rng(&self, stream: u64) -> Prng {
        seeded(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream))
    }

    fn compose(&self, a: &Orientation, b: &Orientation) -> Orientation {
        match self.fault {
            None => a.compose(b),
            Some(Fault::ComposeSign) => {
                let (a0, av) = (a.scalar(), a.vector());
                let (b0, bv) = (b.scalar(), b.vector());
                let q0 = a0 * b0 - av.dot(&bv);
                let qv = bv * a0 + av * b0 - av.cross(&bv);
                let n = (q0 * q0 + qv.norm_squared()).sqrt();
                Orientation::new(q0 / n, qv / n).expect("unit quaternion")
            }
        }
    }
}

/// Groups of checks, matching the acceptance criteria one to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Section {
    Consistency,
    Axioms,
    Jacobians,
    Rodriguez,
    Adjoint,
    Gamma,
    Limit,
    ModelJacobians,
}

impl Section {
    pub const ALL: [Section; 8] = [
        Self::Consistency,
        Self::Axioms,
        Self::Jacobians,
        Self::Rodriguez,
        Self::Adjoint,
        Self::Gamma,
        Self::Limit,
        Self::ModelJacobians,
    ];
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub section: Section,
    pub name: &'static str,
    pub samples: usize,
    /// Worst deviation observed.
    pub worst: f64,
    /// Human-readable acceptance bound.
    pub bound: String,
    pub passed: bool,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<44} n={:<6} worst={:<11.3e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.worst,
            self.bound
        )
    }
}

fn below(section: Section, name: &'static str, samples: usize, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        section,
        name,
        samples,
        worst,
        bound: format!("<= {tol:.0e}"),
        passed: worst <= tol,
    }
}

/// Tracks the largest value seen; NaN poisons the maximum.
#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn push(&mut self, x: f64) {
        if x.is_nan() || self.0.is_nan() {
            self.0 = f64::NAN;
        } else {
            self.0 = self.0.max(x);
        }
    }
}

fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.abs().max()
}

/// The four rotate/compose/exp/log consistency identities on random draws
/// plus draws with angles in `[1e-12, 1e-4]`.
pub fn consistency(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.consistency;
    let m = cfg.sizes.small_angle;
    let mut rng = cfg.rng(1);
    let draw = |rng: &mut Prng, i: usize| {
        if i < n {
            random_orientation(rng)
        } else {
            Orientation::exp(&random_small_rotation_vector(rng, 1e-12, SMALL_ANGLE_THRESHOLD))
        }
    };
    let (mut matrix, mut composition, mut exp_rod, mut exp_log) =
        (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for i in 0..n + m {
        let q = draw(&mut rng, i);
        let p = draw(&mut rng, i);
        let r = random_vec3(&mut rng, 1.0);
        matrix.push((q.rotation_matrix() * r - q.rotate(&r)).norm());
        composition.push((cfg.compose(&q, &p).rotate(&r) - q.rotate(&p.rotate(&r))).norm());
        let phi = if i < n {
            random_rotation_vector(&mut rng, std::f64::consts::PI)
        } else {
            random_small_rotation_vector(&mut rng, 1e-12, SMALL_ANGLE_THRESHOLD)
        };
        exp_rod.push(max_abs(&(Orientation::exp(&phi).rotation_matrix() - rodriguez(&phi))));
        exp_log.push(Orientation::exp(&q.log()).distance(&q));
    }
    let s = Section::Consistency;
    vec![
        below(s, "C(q) r = q(r)", n + m, matrix.0, 1e-9),
        below(s, "(q1 o q2)(r) = q1(q2(r))", n + m, composition.0, 1e-9),
        below(s, "C(exp(phi)) = Rodriguez(phi)", n + m, exp_rod.0, 1e-9),
        below(s, "exp(log(q)) = q", n + m, exp_log.0, 1e-9),
    ]
}

/// The three `⊞`/`⊟` axioms.
pub fn axioms(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.axioms;
    let mut rng = cfg.rng(2);
    let (mut zero, mut roundtrip, mut recover) = (Worst::default(), Worst::default(), Worst::default());
    for i in 0..n {
        let q = random_orientation(&mut rng);
        let p = random_orientation(&mut rng);
        let delta = if i % 4 == 0 {
            random_small_rotation_vector(&mut rng, 1e-12, 1e-4)
        } else {
            random_rotation_vector(&mut rng, std::f64::consts::PI - 1e-3)
        };
        zero.push(q.boxplus(&Vec3::zeros()).distance(&q));
        roundtrip.push((q.boxplus(&delta).boxminus(&q) - delta).norm());
        recover.push(q.boxplus(&p.boxminus(&q)).distance(&p));
    }
    let s = Section::Axioms;
    vec![
        below(s, "q [+] 0 = q", n, zero.0, 1e-9),
        below(s, "(q [+] d) [-] q = d", n, roundtrip.0, 1e-9),
        below(s, "q [+] (p [-] q) = p", n, recover.0, 1e-9),
    ]
}

/// Analytic derivative identities against central finite differences.
pub fn jacobians(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.jacobian_points;
    let fd = DiffConfig::default();
    let mut rng = cfg.rng(3);
    let mut w = [
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
        Worst::default(),
    ];
    for _ in 0..n {
        let q = random_orientation(&mut rng);
        let p = random_orientation(&mut rng);
        let r = random_vec3(&mut rng, 5.0);
        let omega = random_vec3(&mut rng, 2.0);
        let t0 = rng_scalar(&mut rng, 3.0);

        let curve = |t: f64| cfg.compose(&q, &Orientation::exp(&(omega * t))).inverse();
        w[0].push((numeric_diff_to_manifold(curve, t0, &fd) - d_time(&omega)).norm());

        let num = numeric_jacobian(|x: &Vec3| q.rotate(x), &r, &fd);
        w[1].push(max_abs(&(num - d_rotate_d_vector(&q))));

        let num = numeric_diff_from_manifold(|x| x.rotate(&r), &q, &fd);
        w[2].push(max_abs(&(num - d_rotate_d_orientation(&q, &r))));

        let num = numeric_diff_between_manifolds(|x| x.inverse(), &q, &fd);
        w[3].push(max_abs(&(num - d_inverse(&q))));

        let num = numeric_diff_between_manifolds(|x| cfg.compose(x, &p), &q, &fd);
        w[4].push(max_abs(&(num - d_compose_left(&q, &p))));

        let num = numeric_diff_between_manifolds(|x| cfg.compose(&q, x), &p, &fd);
        w[5].push(max_abs(&(num - d_compose_right(&q))));

        let phi = random_rotation_vector(&mut rng, 3.0);
        let num = numeric_jacobian_to_manifold(Orientation::exp, &phi, &fd);
        w[6].push(max_abs(&(num - d_exp(&phi))));

        let base = Orientation::exp(&random_rotation_vector(&mut rng, 3.0));
        let num = numeric_diff_from_manifold(|x| x.log(), &base, &fd);
        let err = d_log(&base).map_or(f64::NAN, |a| max_abs(&(num - a)));
        w[7].push(err);
    }
    let names = [
        "d/dt q(t)^-1 = -w",
        "d q(r) / dr = C(q)",
        "d q(r) / dq = -(q(r))^x",
        "d q^-1 / dq = -C(q)^T",
        "d (q1 o q2) / dq1 = I",
        "d (q1 o q2) / dq2 = C(q1)",
        "d exp(phi) / dphi = Gamma(phi)",
        "d log(q) / dq = Gamma^-1(log q)",
    ];
    let mut out: Vec<CheckResult> = names
        .iter()
        .zip(w)
        .map(|(name, worst)| below(Section::Jacobians, name, n, worst.0, 1e-5))
        .collect();
    out.push(angular_rate_along_trajectories(cfg));
    out
}

fn rng_scalar(rng: &mut Prng, half_width: f64) -> f64 {
    random_vec3(rng, half_width).x
}

/// The time-derivative contract along the analytic simulator trajectories.
pub fn angular_rate_along_trajectories(cfg: &SuiteConfig) -> CheckResult {
    let n = cfg.sizes.trajectory_points;
    let fd = DiffConfig::default();
    let mut rng = cfg.rng(4);
    let mut worst = Worst::default();
    let kinds = reference_trajectories();
    for kind in &kinds {
        for _ in 0..n {
            let t = rng_scalar(&mut rng, 30.0) + 30.0;
            let d = numeric_diff_to_manifold(|x| kind.sample(x).orientation.inverse(), t, &fd);
            worst.push((d - d_time(&kind.sample(t).angular_rate)).norm());
        }
    }
    below(Section::Jacobians, "d/dt q(t)^-1 = -w on trajectories", n * kinds.len(), worst.0, 1e-4)
}

/// `Σ_{k=0..terms} Aᵏ/k!`, evaluated on `A/2ˢ` and squared `s` times so the
/// truncation error stays below double-precision rounding for `‖A‖ ≤ 4`.
pub fn matrix_exponential_series(a: &Matrix3<f64>, terms: usize) -> Matrix3<f64> {
    let norm = a.norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(s);
    let mut term = Matrix3::identity();
    let mut sum = term;
    for k in 1..=terms {
        term = term * scaled / k as f64;
        sum += term;
    }
    (0..s).fold(sum, |m, _| m * m)
}

/// Rodriguez' formula against the matrix-exponential series.
pub fn rodriguez_series(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.rodriguez;
    let mut rng = cfg.rng(5);
    let (mut series, mut gamma_skew) = (Worst::default(), Worst::default());
    for _ in 0..n {
        let phi = random_rotation_vector(&mut rng, 3.0);
        let c = rodriguez(&phi);
        series.push(max_abs(&(c - matrix_exponential_series(&hat(&phi), 20))));
        gamma_skew.push(max_abs(&(gamma(&phi) * hat(&phi) - (c - Matrix3::identity()))));
    }
    let s = Section::Rodriguez;
    vec![
        below(s, "Rodriguez(phi) = series exp(phi^x)", n, series.0, 1e-10),
        below(s, "Gamma(phi) phi^x = C(phi) - I", n, gamma_skew.0, 1e-10),
    ]
}

/// `exp(Φ(v)) = Φ ∘ exp(v) ∘ Φ⁻¹`.
pub fn adjoint(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.adjoint;
    let mut rng = cfg.rng(6);
    let mut worst = Worst::default();
    for _ in 0..n {
        let q = random_orientation(&mut rng);
        let v = random_rotation_vector(&mut rng, 3.0);
        let lhs = Orientation::exp(&q.rotate(&v));
        let rhs = cfg.compose(&cfg.compose(&q, &Orientation::exp(&v)), &q.inverse());
        worst.push(lhs.distance(&rhs));
    }
    vec![below(Section::Adjoint, "exp(q(v)) = q o exp(v) o q^-1", n, worst.0, 1e-9)]
}

/// `ΓΓ⁻¹ = I` and continuity of every small-angle branch at the threshold.
pub fn gamma_checks(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.gamma;
    let mut rng = cfg.rng(7);
    let mut product = Worst::default();
    for _ in 0..n {
        let phi = random_rotation_vector(&mut rng, std::f64::consts::PI - 0.1);
        let err = gamma_inverse(&phi)
            .map_or(f64::NAN, |gi| max_abs(&(gamma(&phi) * gi - Matrix3::identity())));
        product.push(err);
    }
    let mut continuity = Worst::default();
    let directions = 100;
    for _ in 0..directions {
        let dir = random_unit_vector(&mut rng);
        let below_t = dir * (SMALL_ANGLE_THRESHOLD * (1.0 - 1e-9));
        let at = dir * SMALL_ANGLE_THRESHOLD;
        continuity.push(max_abs(&(rodriguez(&below_t) - rodriguez(&at))));
        continuity.push(max_abs(&(gamma(&below_t) - gamma(&at))));
        let gi = match (gamma_inverse(&below_t), gamma_inverse(&at)) {
            (Ok(a), Ok(b)) => max_abs(&(a - b)),
            _ => f64::NAN,
        };
        continuity.push(gi);
        let (qa, qb) = (Orientation::exp(&below_t), Orientation::exp(&at));
        continuity.push(qa.distance(&qb));
        let vb = dir * (SMALL_ANGLE_THRESHOLD * (1.0 - 1e-9));
        let la = Orientation::new((1.0 - vb.norm_squared()).sqrt(), vb).expect("unit");
        let lb = Orientation::new((1.0 - at.norm_squared()).sqrt(), at).expect("unit");
        continuity.push((la.log() - lb.log()).norm());
    }
    let s = Section::Gamma;
    vec![
        below(s, "Gamma(phi) Gamma^-1(phi) = I", n, product.0, 1e-8),
        below(s, "small-angle branch continuity", directions, continuity.0, 1e-10),
    ]
}

/// First-order convergence of `log(exp(εφ1) ∘ exp(εφ2))/ε → φ1 + φ2`.
pub fn log_additivity(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.limit_pairs;
    let mut rng = cfg.rng(8);
    let eps = [1e-2, 1e-3, 1e-4];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ok = true;
    let mut drawn = 0;
    while drawn < n {
        let p1 = random_rotation_vector(&mut rng, 2.0);
        let p2 = random_rotation_vector(&mut rng, 2.0);
        if p1.cross(&p2).norm() < 0.1 {
            continue;
        }
        drawn += 1;
        let r = faulty_limit(cfg, &p1, &p2, &eps);
        for w in r.windows(2) {
            let ratio = w[0] / w[1];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            ok &= (5.0..=20.0).contains(&ratio);
        }
    }
    vec![CheckResult {
        section: Section::Limit,
        name: "log-additivity residual ratio per decade",
        samples: n,
        worst: if (hi - 10.0).abs() > (10.0 - lo).abs() { hi } else { lo },
        bound: format!("in [5, 20] (observed {lo:.2}..{hi:.2})"),
        passed: ok,
    }]
}

fn faulty_limit(cfg: &SuiteConfig, p1: &Vec3, p2: &Vec3, eps: &[f64]) -> Vec<f64> {
    if cfg.fault.is_none() {
        return log_additivity_limit(p1, p2, eps);
    }
    let sum = p1 + p2;
    eps.iter()
        .map(|&e| {
            let q = cfg.compose(&Orientation::exp(&(p1 * e)), &Orientation::exp(&(p2 * e)));
            (q.log() / e - sum).norm()
        })
        .collect()
}

/// `F`, `G` and `H` against 15-dimensional `⊞`/`⊟` finite differences of
/// the discrete model.
pub fn model_jacobians(cfg: &SuiteConfig) -> Vec<CheckResult> {
    let n = cfg.sizes.model_points;
    let mut rng = cfg.rng(9);
    let (mut wf, mut wg, mut wh) = (Worst::default(), Worst::default(), Worst::default());
    let (h, _) = measurement_jacobians();
    for dt in [1e-3, 1e-2] {
        for _ in 0..n {
            let s = NavState {
                position: random_vec3(&mut rng, 10.0),
                velocity: random_vec3(&mut rng, 3.0),
                orientation: random_orientation(&mut rng),
                accel_bias: random_vec3(&mut rng, 0.2),
                gyro_bias: random_vec3(&mut rng, 0.05),
            };
            let sample = ImuSample {
                t: 0.0,
                accel: random_vec3(&mut rng, 12.0),
                gyro: random_vec3(&mut rng, 2.0),
            };
            let (f, w) = correct_imu(&sample, &s);
            let (fa, ga) = process_jacobians(&s, &f, &w, &DEFAULT_GRAVITY, dt).expect("dt > 0");

            let step = |x: &NavState, noise: &ErrorVector| {
                propagate(x, &sample, &ProcessNoise::from_vector(noise), &DEFAULT_GRAVITY, dt)
                    .expect("dt > 0")
            };
            let zero = ErrorVector::zeros();
            let nominal = step(&s, &zero);
            let fd_f = fd15(1e-6, |e| step(&s.boxplus(e), &zero).boxminus(&nominal));
            let fd_g = fd15(1e-4, |e| step(&s, e).boxminus(&nominal));
            wf.push((fa - fd_f).abs().max());
            wg.push((ga - fd_g).abs().max());

            let meas = PoseMeasurement { t: 0.0, position: s.position, orientation: s.orientation };
            let mut fd_h = MeasurementJacobian::zeros();
            let eps = 1e-6;
            for i in 0..ERROR_DIM {
                let mut e = ErrorVector::zeros();
                e[i] = eps;
                let plus = measurement_residual(&meas, &s.boxplus(&e));
                let minus = measurement_residual(&meas, &s.boxplus(&-e));
                fd_h.set_column(i, &(-(plus - minus) / (2.0 * eps)));
            }
            wh.push((h - fd_h).abs().max());
        }
    }
    let s = Section::ModelJacobians;
    vec![
        below(s, "process Jacobian F", 2 * n, wf.0, 1e-5),
        below(s, "noise Jacobian G", 2 * n, wg.0, 1e-5),
        below(s, "measurement Jacobian H", 2 * n, wh.0, 1e-5),
    ]
}

fn fd15<F: Fn(&ErrorVector) -> ErrorVector>(h: f64, f: F) -> Matrix15 {
    let mut jac = Matrix15::zeros();
    for i in 0..ERROR_DIM {
        let mut e = ErrorVector::zeros();
        e[i] = h;
        jac.set_column(i, &((f(&e) - f(&-e)) / (2.0 * h)));
    }
    jac
}

pub fn run_section(section: Section, cfg: &SuiteConfig) -> Vec<CheckResult> {
    match section {
        Section::Consistency => consistency(cfg),
        Section::Axioms => axioms(cfg),
        Section::Jacobians => jacobians(cfg),
        Section::Rodriguez => rodriguez_series(cfg),
        Section::Adjoint => adjoint(cfg),
        Section::Gamma => gamma_checks(cfg),
        Section::Limit => log_additivity(cfg),
        Section::ModelJacobians => model_jacobians(cfg),
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<CheckResult> {
    Section::ALL.iter().flat_map(|s| run_section(*s, cfg)).collect()
}
