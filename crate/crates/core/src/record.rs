//! Time series emitted by the PDE and particle simulators.

/// Column names of the simulation CSV, in order.
pub const SIMULATION_HEADER: [&str; 12] = [
    "t",
    "sigma",
    "ell",
    "energy",
    "dissipation",
    "xi",
    "m_minus",
    "m_zero",
    "m_plus",
    "mu",
    "zeta",
    "first_moment",
];

/// One output row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub sigma: f64,
    pub ell: f64,
    pub energy: f64,
    pub dissipation: f64,
    pub xi: f64,
    pub m_minus: f64,
    pub m_zero: f64,
    pub m_plus: f64,
    pub mu: f64,
    pub zeta: f64,
    pub first_moment: f64,
    /// Discrete total mass (not part of the CSV contract).
    pub mass: f64,
    /// Smallest cell value (not part of the CSV contract).
    pub min_density: f64,
}

impl TrajectoryRow {
    /// Values in [`SIMULATION_HEADER`] order.
    pub fn values(&self) -> [f64; 12] {
        [
            self.t,
            self.sigma,
            self.ell,
            self.energy,
            self.dissipation,
            self.xi,
            self.m_minus,
            self.m_zero,
            self.m_plus,
            self.mu,
            self.zeta,
            self.first_moment,
        ]
    }

    pub fn from_values(v: [f64; 12]) -> Self {
        Self {
            t: v[0],
            sigma: v[1],
            ell: v[2],
            energy: v[3],
            dissipation: v[4],
            xi: v[5],
            m_minus: v[6],
            m_zero: v[7],
            m_plus: v[8],
            mu: v[9],
            zeta: v[10],
            first_moment: v[11],
            mass: f64::NAN,
            min_density: f64::NAN,
        }
    }

    /// `|∫xρ − ℓ|`
    pub fn constraint_drift(&self) -> f64 {
        (self.first_moment - self.ell).abs()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&TrajectoryRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.column(|r| r.t)
    }

    pub fn last(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    /// `sup_t |∫xρ − ℓ|`
    pub fn max_constraint_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(TrajectoryRow::constraint_drift)
            .fold(0.0, f64::max)
    }
}
