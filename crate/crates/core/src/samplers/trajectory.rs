#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub sigma: f64,
    pub state: Vec<f64>,
    /// Denoiser estimate computed while leaving this state, when available.
    pub denoised: Option<Vec<f64>>,
}

/// Recorded history of one sampling run: the initial state, then one entry
/// per step, ending at `sigma = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub(crate) fn maybe(record: bool) -> Option<Self> {
        record.then(Self::default)
    }

    pub(crate) fn push(&mut self, sigma: f64, state: &[f64]) {
        self.points.push(TrajectoryPoint { sigma, state: state.to_vec(), denoised: None });
    }

    /// Attaches a denoiser estimate to the most recent state.
    pub(crate) fn annotate(&mut self, denoised: &[f64]) {
        if let Some(p) = self.points.last_mut() {
            p.denoised = Some(denoised.to_vec());
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sigmas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma).collect()
    }
}
