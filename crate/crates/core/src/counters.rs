use std::time::Instant;

use serde::Serialize;

/// Operation counts and phase timings accumulated by filter applications and
/// Lanczos steps. Times are in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OpCounters {
    pub a_matvec: u64,
    pub b_matvec: u64,
    pub b_solve: u64,
    pub shift_solve: u64,
    pub t_mv: f64,
    pub t_sv: f64,
    pub t_orth: f64,
}

impl OpCounters {
    pub fn merge(&mut self, o: &OpCounters) {
        self.a_matvec += o.a_matvec;
        self.b_matvec += o.b_matvec;
        self.b_solve += o.b_solve;
        self.shift_solve += o.shift_solve;
        self.t_mv += o.t_mv;
        self.t_sv += o.t_sv;
        self.t_orth += o.t_orth;
    }

    /// Same operation counts, ignoring timings.
    pub fn same_counts(&self, o: &OpCounters) -> bool {
        (self.a_matvec, self.b_matvec, self.b_solve, self.shift_solve)
            == (o.a_matvec, o.b_matvec, o.b_solve, o.shift_solve)
    }
}

pub(crate) fn elapsed(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}
