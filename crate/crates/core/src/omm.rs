//! The online maximum margin learner.
//!
//! Until both labels have been seen the learner repeats the first label it
//! observed (defaulting to `+1`). Once one point of each class is available
//! the singleton certificates define the first classifier and margin `γ₃`.
//! From then on, a point with functional margin `aₜ = y(wᵀx + b) < ρ·γₜ`
//! triggers a re-solve of the nearest-point problem:
//!
//! * [`Variant::Naive`] keeps every point that triggered an update and
//!   re-solves the full hull distance (warm-started).
//! * [`Variant::Efficient`] keeps only the two certificates and solves the
//!   three-point problem `{v₊, v₋, x}` on a segment.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    self, solve_to_solution, three_point_update, CertificatePair, GeometryError, HullSolver,
    DEFAULT_TOL,
};
use crate::harness::{OnlineLearner, RunError, StepEvent};
use crate::norms::NormSpec;
use crate::types::{Label, LinearClassifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Naive,
    Efficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmmConfig {
    pub variant: Variant,
    pub rho: f64,
    pub norm: NormSpec,
    pub tol: f64,
}

impl Default for OmmConfig {
    fn default() -> Self {
        Self::e_omm()
    }
}

impl OmmConfig {
    pub fn new(variant: Variant, rho: f64) -> Self {
        Self {
            variant,
            rho,
            norm: NormSpec::l2(),
            tol: DEFAULT_TOL,
        }
    }

    pub fn e_omm() -> Self {
        Self::new(Variant::Efficient, 1.0)
    }

    /// Conservative: updates on mistakes only.
    pub fn ce_omm() -> Self {
        Self::new(Variant::Efficient, 0.0)
    }

    pub fn n_omm() -> Self {
        Self::new(Variant::Naive, 1.0)
    }

    pub fn with_norm(mut self, norm: NormSpec) -> Self {
        self.norm = norm;
        self
    }

    pub fn validate(&self) -> Result<(), OmmError> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(OmmError::InvalidConfig(format!("rho = {} is outside [0, 1]", self.rho)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(OmmError::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match (self.variant, self.rho) {
            (Variant::Efficient, r) if r == 1.0 => "e-OMM".into(),
            (Variant::Efficient, r) if r == 0.0 => "ce-OMM".into(),
            (Variant::Naive, r) if r == 1.0 => "n-OMM".into(),
            (Variant::Efficient, r) => format!("e-OMM(rho={r})"),
            (Variant::Naive, r) => format!("n-OMM(rho={r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OmmError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    Initializing { first: Option<(Vec<f64>, Label)> },
    Running,
}

#[derive(Debug, Clone)]
pub struct OmmState {
    config: OmmConfig,
    phase: Phase,
    solver: Option<HullSolver>,
    cert: Option<CertificatePair>,
    classifier: Option<LinearClassifier>,
    gamma_t: Option<f64>,
    gamma_3: Option<f64>,
    t: usize,
    steps: usize,
}

impl OmmState {
    pub fn new(config: OmmConfig) -> Result<Self, OmmError> {
        config.validate()?;
        Ok(Self {
            config,
            phase: Phase::Initializing { first: None },
            solver: None,
            cert: None,
            classifier: None,
            gamma_t: None,
            gamma_3: None,
            t: 1,
            steps: 0,
        })
    }

    pub fn config(&self) -> &OmmConfig {
        &self.config
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn is_running(&self) -> bool {
        self.phase == Phase::Running
    }

    /// Step counter; set to 2 when the running phase begins.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn gamma_t(&self) -> Option<f64> {
        self.gamma_t
    }

    pub fn gamma_3(&self) -> Option<f64> {
        self.gamma_3
    }

    pub fn certificates(&self) -> Option<&CertificatePair> {
        self.cert.as_ref()
    }

    pub fn current_classifier(&self) -> Option<&LinearClassifier> {
        self.classifier.as_ref()
    }

    /// Points retained by the naïve variant, `(positive, negative)`.
    pub fn retained(&self) -> Option<(&[Vec<f64>], &[Vec<f64>])> {
        self.solver.as_ref().map(|s| (s.plus_points(), s.minus_points()))
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        match (&self.phase, &self.classifier) {
            (Phase::Running, Some(c)) => c.predict(x),
            (Phase::Initializing { first: Some((_, y1)) }, _) => *y1,
            _ => Label::Positive,
        }
    }

    /// Processes one labeled point and reports what happened.
    pub fn update(&mut self, x: &[f64], y: Label) -> Result<StepEvent, OmmError> {
        self.steps += 1;
        let index = self.steps;
        let y_hat = self.predict(x);
        match std::mem::replace(&mut self.phase, Phase::Running) {
            Phase::Initializing { first: None } => {
                self.phase = Phase::Initializing {
                    first: Some((x.to_vec(), y)),
                };
                self.t += 1;
                Ok(StepEvent::initializing(index, y_hat, y))
            }
            Phase::Initializing { first: Some((x1, y1)) } if y1 == y => {
                self.phase = Phase::Initializing { first: Some((x1, y1)) };
                self.t += 1;
                Ok(StepEvent::initializing(index, y_hat, y))
            }
            Phase::Initializing { first: Some((x1, _)) } => {
                if x1.len() != x.len() {
                    return Err(GeometryError::DimensionMismatch {
                        expected: x1.len(),
                        found: x.len(),
                    }
                    .into());
                }
                let (vp, vm) = match y {
                    Label::Positive => (x.to_vec(), x1),
                    Label::Negative => (x1, x.to_vec()),
                };
                self.start_running(vp, vm)?;
                let mut event = StepEvent::initializing(index, y_hat, y);
                event.updated = true;
                event.gamma_next = self.gamma_t;
                Ok(event)
            }
            Phase::Running => self.running_step(index, y_hat, x, y),
        }
    }

    fn start_running(&mut self, vp: Vec<f64>, vm: Vec<f64>) -> Result<(), OmmError> {
        let norm = self.config.norm;
        if norm.norm(&crate::linalg::sub(&vp, &vm)) <= geometry::SEPARABILITY_THRESHOLD {
            return Err(GeometryError::NotSeparable {
                distance: norm.norm(&crate::linalg::sub(&vp, &vm)),
            }
            .into());
        }
        if self.config.variant == Variant::Naive {
            let mut solver = HullSolver::new(norm, vp.len());
            solver.push(vp.clone(), true)?;
            solver.push(vm.clone(), false)?;
            let sol = solve_to_solution(&mut solver, &norm, self.config.tol)?;
            self.solver = Some(solver);
            self.install(sol.certificates, sol.classifier, sol.gamma);
        } else {
            let cert = CertificatePair::singleton(vp, vm);
            let (classifier, gamma) = geometry::classifier_from_certificates(&cert, &norm)?;
            self.install(cert, classifier, gamma);
        }
        self.gamma_3 = self.gamma_t;
        self.phase = Phase::Running;
        self.t = 2;
        Ok(())
    }

    fn install(&mut self, cert: CertificatePair, classifier: LinearClassifier, gamma: f64) {
        self.cert = Some(cert);
        self.classifier = Some(classifier);
        self.gamma_t = Some(gamma);
    }

    fn running_step(&mut self, index: usize, y_hat: Label, x: &[f64], y: Label) -> Result<StepEvent, OmmError> {
        self.t += 1;
        let classifier = self.classifier.as_ref().expect("running phase has a classifier");
        if classifier.w.len() != x.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: classifier.w.len(),
                found: x.len(),
            }
            .into());
        }
        // ‖w‖* = 1, so the functional margin is also the signed geometric margin.
        let a_t = classifier.functional_margin(x, y);
        let gamma_t = self.gamma_t.expect("running phase has a margin");
        let mut event = StepEvent {
            index,
            t: Some(self.t),
            y_hat,
            y,
            score: Some(a_t),
            mistake: a_t <= 0.0,
            updated: false,
            running: true,
            gamma_t: Some(gamma_t),
            gamma_next: Some(gamma_t),
        };
        if a_t < self.config.rho * gamma_t {
            let norm = self.config.norm;
            match self.config.variant {
                Variant::Efficient => {
                    let cert = self.cert.as_ref().expect("running phase has certificates");
                    let up = three_point_update(&cert.v_plus, &cert.v_minus, x, y, &norm)?;
                    let sol = up.solution;
                    self.install(sol.certificates, sol.classifier, sol.gamma);
                }
                Variant::Naive => {
                    let solver = self.solver.as_mut().expect("naive variant keeps a solver");
                    solver.push(x.to_vec(), y == Label::Positive)?;
                    let sol = solve_to_solution(solver, &norm, self.config.tol)?;
                    self.install(sol.certificates, sol.classifier, sol.gamma);
                }
            }
            event.updated = true;
            event.gamma_next = self.gamma_t;
        }
        Ok(event)
    }
}

impl OnlineLearner for OmmState {
    fn name(&self) -> String {
        self.config.name()
    }

    fn norm(&self) -> NormSpec {
        self.config.norm
    }

    fn predict(&self, x: &[f64]) -> Label {
        OmmState::predict(self, x)
    }

    fn step(&mut self, x: &[f64], y: Label) -> Result<StepEvent, RunError> {
        self.update(x, y).map_err(RunError::from)
    }

    fn classifier(&self) -> Option<LinearClassifier> {
        self.classifier.clone()
    }

    fn gamma_3(&self) -> Option<f64> {
        self.gamma_3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feed(state: &mut OmmState, pts: &[(Vec<f64>, Label)]) -> Vec<StepEvent> {
        pts.iter().map(|(x, y)| state.update(x, *y).unwrap()).collect()
    }

    #[test]
    fn config_validation() {
        assert!(OmmState::new(OmmConfig::default()).is_ok());
        assert!(matches!(
            OmmState::new(OmmConfig::new(Variant::Efficient, 1.5)),
            Err(OmmError::InvalidConfig(_))
        ));
        let s = OmmState::new(OmmConfig::ce_omm()).unwrap();
        assert_eq!(s.t(), 1);
        assert!(!s.is_running());
    }

    #[test]
    fn initialization_and_first_classifier() {
        for cfg in [OmmConfig::e_omm(), OmmConfig::n_omm()] {
            let mut s = OmmState::new(cfg).unwrap();
            assert_eq!(s.predict(&[3.0, -7.0]), Label::Positive);
            let ev = feed(
                &mut s,
                &[(vec![0.0, 1.0], Label::Positive), (vec![0.0, -1.0], Label::Negative)],
            );
            assert!(!ev[0].mistake && ev[1].mistake);
            assert!(s.is_running());
            assert_eq!(s.gamma_3(), Some(1.0));
            let c = s.current_classifier().unwrap();
            assert!((c.w[0]).abs() < 1e-12 && (c.w[1] - 1.0).abs() < 1e-12 && c.b.abs() < 1e-12);
            // sign(0) = +1
            assert_eq!(s.predict(&[5.0, 0.0]), Label::Positive);
            assert_eq!(s.predict(&[5.0, -2.0]), Label::Negative);
        }
    }

    #[test]
    fn initializing_repeats_first_label() {
        let mut s = OmmState::new(OmmConfig::e_omm()).unwrap();
        s.update(&[1.0], Label::Negative).unwrap();
        assert_eq!(s.predict(&[100.0]), Label::Negative);
        let ev = s.update(&[2.0], Label::Negative).unwrap();
        assert!(!ev.mistake && !ev.running);
    }

    #[test]
    fn no_update_with_ample_margin() {
        let mut s = OmmState::new(OmmConfig::e_omm()).unwrap();
        feed(&mut s, &[(vec![0.0, 1.0], Label::Positive), (vec![0.0, -1.0], Label::Negative)]);
        let ev = s.update(&[0.0, 1.5], Label::Positive).unwrap();
        assert!(!ev.updated);
        assert_eq!(ev.gamma_next, Some(1.0));
        assert_eq!(ev.score, Some(1.5));
    }

    #[test]
    fn opposite_label_duplicate_is_not_separable() {
        let mut s = OmmState::new(OmmConfig::e_omm()).unwrap();
        s.update(&[1.0, 1.0], Label::Positive).unwrap();
        assert!(matches!(
            s.update(&[1.0, 1.0], Label::Negative),
            Err(OmmError::Geometry(GeometryError::NotSeparable { .. }))
        ));
    }

    #[test]
    fn example1_at_most_two_mistakes() {
        let c = 10.0;
        let r = 2.0 / c;
        let z = [
            (vec![c, 1.0], Label::Positive),
            (vec![c, -1.0], Label::Negative),
            (vec![c + r, -1.0], Label::Negative),
        ];
        let orders: [&[usize]; 3] = [&[0, 2, 0, 2, 0, 2, 1, 0, 1, 2], &[2, 1, 0, 0, 2, 1], &[1, 0, 2, 2, 0, 1, 0]];
        for cfg in [OmmConfig::e_omm(), OmmConfig::ce_omm(), OmmConfig::n_omm(), OmmConfig::new(Variant::Efficient, 0.5)] {
            for order in orders {
                let mut s = OmmState::new(cfg).unwrap();
                let m = order
                    .iter()
                    .map(|&i| s.update(&z[i].0, z[i].1).unwrap())
                    .filter(|e| e.mistake)
                    .count();
                assert!(m <= 2, "{} made {m} mistakes", cfg.name());
            }
        }
    }

    #[test]
    fn margins_never_increase() {
        let pts = [
            (vec![2.0, 3.0], Label::Positive),
            (vec![-1.0, -2.0], Label::Negative),
            (vec![0.5, 0.4], Label::Positive),
            (vec![0.0, -0.1], Label::Negative),
            (vec![1.0, 0.2], Label::Positive),
            (vec![-0.3, 0.1], Label::Negative),
        ];
        for cfg in [OmmConfig::e_omm(), OmmConfig::n_omm()] {
            let mut s = OmmState::new(cfg).unwrap();
            let mut last = f64::INFINITY;
            for ev in feed(&mut s, &pts) {
                if let Some(g) = ev.gamma_next {
                    assert!(g <= last + 1e-12);
                    last = g;
                }
            }
        }
    }
}
