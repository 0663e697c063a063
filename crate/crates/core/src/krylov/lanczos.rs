//! Lanczos process with full reorthogonalization, locking and thick restart.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;

use super::{cgs2_orthogonalize, InnerProduct, KrylovOperator};
use crate::counters::{elapsed, OpCounters};
use crate::error::{Error, Result};
use crate::matrix::{dense_sym_eig, householder_tridiagonalize, sym_tridiag_eig, DenseMat, DenseSym, TriDiag};
use crate::scalar::Real;
use crate::vector::{axpy, dot, random_vector, rng_from_seed, scale};

const RESTART_ATTEMPTS: usize = 3;

/// Result of one Lanczos step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Normal,
    /// Invariant subspace reached; the basis continues from a fresh random
    /// vector and the projected matrix decouples (`beta = 0`).
    Restarted,
    /// Invariant subspace reached and no new direction could be found (or
    /// restarts are disabled); no further steps are possible.
    Exhausted,
}

/// Lanczos engine on a [`KrylovOperator`], orthonormal under an
/// [`InnerProduct`], with a set of locked vectors every new basis vector is
/// deflated against.
///
/// Basis vectors are stored as `(w, z)` pairs (see [`InnerProduct`]); in the
/// Euclidean case only `w` is stored. After `m` steps the basis holds `m + 1`
/// vectors, the last one being the pending direction coupled by `beta[m-1]`.
/// After a thick restart the first `nkept` vectors are Ritz vectors whose
/// couplings to vector `nkept` are held in `arrow`.
pub struct Lanczos<'a, T> {
    op: &'a dyn KrylovOperator<T>,
    ip: &'a InnerProduct<'a, T>,
    n: usize,
    w: Vec<Vec<T>>,
    z: Vec<Vec<T>>,
    alpha: Vec<T>,
    beta: Vec<T>,
    arrow: Vec<T>,
    nkept: usize,
    locked_w: Vec<Vec<T>>,
    locked_z: Vec<Vec<T>>,
    rng: ChaCha8Rng,
    restart_on_breakdown: bool,
    pub counters: OpCounters,
    pub random_restarts: usize,
}

impl<'a, T: Real> Lanczos<'a, T> {
    pub fn new(op: &'a dyn KrylovOperator<T>, ip: &'a InnerProduct<'a, T>, seed: u64) -> Self {
        Self {
            op,
            ip,
            n: op.dim(),
            w: Vec::new(),
            z: Vec::new(),
            alpha: Vec::new(),
            beta: Vec::new(),
            arrow: Vec::new(),
            nkept: 0,
            locked_w: Vec::new(),
            locked_z: Vec::new(),
            rng: rng_from_seed(seed),
            restart_on_breakdown: true,
            counters: OpCounters::default(),
            random_restarts: 0,
        }
    }

    pub fn set_restart_on_breakdown(&mut self, on: bool) {
        self.restart_on_breakdown = on;
    }

    fn euclid(&self) -> bool {
        self.ip.is_euclidean()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of completed steps (size of the projected matrix).
    pub fn steps(&self) -> usize {
        self.alpha.len()
    }

    pub fn nkept(&self) -> usize {
        self.nkept
    }

    pub fn nlocked(&self) -> usize {
        self.locked_w.len()
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    /// Coupling to the pending basis vector, if there is one.
    pub fn beta_next(&self) -> Option<T> {
        let m = self.steps();
        (m > 0 && self.w.len() > m).then(|| self.beta[m - 1])
    }

    pub fn basis_w(&self) -> &[Vec<T>] {
        &self.w
    }

    /// Dual basis (`z_j = M w_j`); equal to the `w` basis in the Euclidean case.
    pub fn basis_z(&self) -> &[Vec<T>] {
        if self.euclid() {
            &self.w
        } else {
            &self.z
        }
    }

    fn zvec(&self, j: usize) -> &[T] {
        if self.euclid() {
            &self.w[j]
        } else {
            &self.z[j]
        }
    }

    /// Deflates `v` (dual form) against locked vectors and the first `upto`
    /// basis vectors. Returns the Euclidean norm left (0 means dependent).
    fn orthogonalize(&mut self, v: &mut [T], upto: usize) -> T {
        let t = Instant::now();
        let euclid = self.euclid();
        let zb: &[Vec<T>] = if euclid { &self.w } else { &self.z };
        let lz: &[Vec<T>] = if euclid { &self.locked_w } else { &self.locked_z };
        let coef: Vec<&[T]> = self.locked_w.iter().chain(&self.w[..upto]).map(|x| x.as_slice()).collect();
        let upd: Vec<&[T]> = lz.iter().chain(&zb[..upto]).map(|x| x.as_slice()).collect();
        let r = cgs2_orthogonalize(v, &coef, &upd, !euclid);
        self.counters.t_orth += elapsed(t);
        r.norm
    }

    /// Turns a dual-form vector into a normalized pair, or `None` if it has no
    /// positive norm.
    fn normalize_pair(&mut self, z: Vec<T>) -> Result<Option<(Vec<T>, Vec<T>, T)>> {
        if self.euclid() {
            let nrm = crate::vector::norm2(&z);
            if nrm <= T::zero() {
                return Ok(None);
            }
            let mut w = z;
            scale(T::one() / nrm, &mut w);
            return Ok(Some((w, Vec::new(), nrm)));
        }
        let mut w = vec![T::zero(); self.n];
        self.ip.primal_from_dual(&z, &mut w, &mut self.counters)?;
        let nsq = dot(&w, &z);
        if !(nsq > T::zero()) {
            return Ok(None);
        }
        let nrm = nsq.sqrt();
        let mut z = z;
        scale(T::one() / nrm, &mut w);
        scale(T::one() / nrm, &mut z);
        Ok(Some((w, z, nrm)))
    }

    fn push_pair(&mut self, w: Vec<T>, z: Vec<T>) {
        self.w.push(w);
        if !self.euclid() {
            self.z.push(z);
        }
    }

    /// Random direction deflated against locked vectors and the whole basis.
    fn random_direction(&mut self) -> Result<Option<(Vec<T>, Vec<T>)>> {
        for _ in 0..RESTART_ATTEMPTS {
            let x: Vec<T> = random_vector(self.n, &mut self.rng);
            let (_, mut z) = self.ip.pair_from_x(x, &mut self.counters)?;
            let upto = self.w.len();
            if self.orthogonalize(&mut z, upto) == T::zero() {
                continue;
            }
            // second deflation after normalization guards the B-metric case
            if let Some((w, z, _)) = self.normalize_pair(z)? {
                return Ok(Some((w, z)));
            }
        }
        Ok(None)
    }

    fn reset(&mut self) {
        self.w.clear();
        self.z.clear();
        self.alpha.clear();
        self.beta.clear();
        self.arrow.clear();
        self.nkept = 0;
    }

    /// Starts a new basis from `x` (a vector of the eigenvector space),
    /// deflated against the locked vectors.
    pub fn start_with(&mut self, x: Vec<T>) -> Result<bool> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        self.reset();
        let (_, mut z) = self.ip.pair_from_x(x, &mut self.counters)?;
        if self.orthogonalize(&mut z, 0) == T::zero() {
            return Ok(false);
        }
        match self.normalize_pair(z)? {
            Some((w, z, _)) => {
                self.push_pair(w, z);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// Starts a new basis from a random vector deflated against the locked set.
    pub fn start_random(&mut self) -> Result<bool> {
        self.reset();
        match self.random_direction()? {
            Some((w, z)) => {
                self.push_pair(w, z);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// One Lanczos step with full reorthogonalization. The first step after a
    /// thick restart subtracts the arrowhead couplings instead of the usual
    /// three-term predecessor.
    pub fn step(&mut self) -> Result<StepStatus> {
        let j = self.alpha.len();
        if self.w.len() <= j {
            return Ok(StepStatus::Exhausted);
        }
        let mut out = vec![T::zero(); self.n];
        {
            let zj: &[T] = if self.euclid() { &self.w[j] } else { &self.z[j] };
            self.op.apply(&self.w[j], zj, &mut out, &mut self.counters)?;
        }
        let t = Instant::now();
        if j == self.nkept && self.nkept > 0 {
            for i in 0..self.nkept {
                let s = self.arrow[i];
                axpy(-s, self.zvec(i), &mut out);
            }
        } else if j > 0 {
            let b = self.beta[j - 1];
            axpy(-b, self.zvec(j - 1), &mut out);
        }
        let a = dot(&out, &self.w[j]);
        axpy(-a, self.zvec(j), &mut out);
        self.alpha.push(a);
        self.counters.t_orth += elapsed(t);

        let left = self.orthogonalize(&mut out, j + 1);
        let next = if left == T::zero() { None } else { self.normalize_pair(out)? };
        match next {
            Some((w, z, b)) => {
                self.beta.push(b);
                self.push_pair(w, z);
                Ok(StepStatus::Normal)
            }
            None => {
                self.beta.push(T::zero());
                if !self.restart_on_breakdown {
                    return Ok(StepStatus::Exhausted);
                }
                match self.random_direction()? {
                    Some((w, z)) => {
                        self.random_restarts += 1;
                        self.push_pair(w, z);
                        Ok(StepStatus::Restarted)
                    }
                    None => Ok(StepStatus::Exhausted),
                }
            }
        }
    }

    fn projected_dense(&self) -> DenseSym<T> {
        let m = self.steps();
        let mut d = DenseSym::zeros(m);
        for i in 0..m {
            d.set(i, i, self.alpha[i]);
        }
        for i in 0..self.nkept.min(m) {
            if self.nkept < m {
                d.set(i, self.nkept, self.arrow[i]);
            }
        }
        for j in self.nkept..m.saturating_sub(1) {
            d.set(j, j + 1, self.beta[j]);
        }
        d
    }

    /// Ritz values (ascending) of the projected matrix, and optionally its
    /// eigenvectors.
    pub fn ritz(&self, want_vectors: bool) -> Result<(Vec<T>, Option<DenseMat<T>>)> {
        let m = self.steps();
        if m == 0 {
            return Ok((Vec::new(), want_vectors.then(|| DenseMat::zeros(0, 0))));
        }
        if self.nkept == 0 {
            let t = TriDiag::new(self.alpha.clone(), self.beta[..m - 1].to_vec())?;
            return sym_tridiag_eig(&t, want_vectors);
        }
        let d = self.projected_dense();
        if want_vectors {
            let (v, y) = dense_sym_eig(&d)?;
            Ok((v, Some(y)))
        } else {
            let t = householder_tridiagonalize(&d)?;
            sym_tridiag_eig(&t, false)
        }
    }

    /// Residual norm estimate `|beta_m * y[m-1]|` of a projected eigenvector.
    pub fn ritz_residual(&self, y: &[T]) -> T {
        match self.beta_next() {
            Some(b) => (b * y[y.len() - 1]).abs(),
            None => T::zero(),
        }
    }

    fn combine(basis: &[Vec<T>], y: &DenseMat<T>, n: usize) -> Vec<Vec<T>> {
        let k = y.ncols();
        let mut out = vec![vec![T::zero(); n]; k];
        for (j, b) in basis.iter().enumerate().take(y.nrows()) {
            for (c, o) in out.iter_mut().enumerate() {
                let s = y.get(j, c);
                if s != T::zero() {
                    axpy(s, b, o);
                }
            }
        }
        out
    }

    /// Basis combinations `(W y, Z y)` for the columns of `y`; the `z` part is
    /// empty in the Euclidean case.
    pub fn combine_pairs(&self, y: &DenseMat<T>) -> Vec<(Vec<T>, Vec<T>)> {
        let ws = Self::combine(&self.w, y, self.n);
        if self.euclid() {
            ws.into_iter().map(|w| (w, Vec::new())).collect()
        } else {
            let zs = Self::combine(&self.z, y, self.n);
            ws.into_iter().zip(zs).collect()
        }
    }

    /// The eigenvector-space vector of a `(w, z)` pair.
    pub fn x_of<'p>(&self, pair: &'p (Vec<T>, Vec<T>)) -> &'p [T] {
        if self.euclid() || self.ip.x_from_w() {
            &pair.0
        } else {
            &pair.1
        }
    }

    /// Locked vectors as `(w, z)`; `z == w` in the Euclidean case.
    pub fn locked_pairs(&self) -> impl Iterator<Item = (&[T], &[T])> + '_ {
        let lz: &[Vec<T>] = if self.euclid() { &self.locked_w } else { &self.locked_z };
        self.locked_w.iter().zip(lz).map(|(w, z)| (w.as_slice(), z.as_slice()))
    }

    /// Adds a pair (normalized in the active inner product) to the locked set.
    pub fn lock_pair(&mut self, pair: (Vec<T>, Vec<T>)) {
        self.locked_w.push(pair.0);
        if !self.euclid() {
            self.locked_z.push(pair.1);
        }
    }

    /// Locks a vector of the eigenvector space, normalizing it first.
    pub fn lock_x(&mut self, x: Vec<T>) -> Result<()> {
        let (w, z) = self.ip.pair_from_x(x, &mut self.counters)?;
        let nsq = if self.euclid() { dot(&w, &w) } else { dot(&w, &z) };
        if !(nsq > T::zero()) {
            return Err(Error::InvalidArgument("cannot lock a zero vector".into()));
        }
        let s = T::one() / nsq.sqrt();
        let (mut w, mut z) = (w, z);
        scale(s, &mut w);
        scale(s, &mut z);
        if self.euclid() {
            z = Vec::new();
        }
        self.lock_pair((w, z));
        Ok(())
    }

    /// Thick restart: keeps the Ritz vectors given by the columns of `y`
    /// (with Ritz values `theta`) plus the pending direction.
    pub fn thick_restart(&mut self, y: &DenseMat<T>, theta: &[T]) -> Result<bool> {
        let m = self.steps();
        let Some(bm) = self.beta_next() else {
            return Ok(false);
        };
        let l = y.ncols();
        let kept = self.combine_pairs(y);
        let arrow: Vec<T> = (0..l).map(|c| bm * y.get(m - 1, c)).collect();
        let pending_w = self.w.swap_remove(m);
        let pending_z = if self.euclid() { Vec::new() } else { self.z.swap_remove(m) };
        self.reset();
        for p in kept {
            self.push_pair(p.0, p.1);
        }
        self.push_pair(pending_w, pending_z);
        self.alpha = theta.to_vec();
        self.beta = vec![T::zero(); l];
        self.arrow = arrow;
        self.nkept = l;
        Ok(true)
    }
}

/// Basis and projected matrix of a plain Lanczos run.
#[derive(Clone, Debug)]
pub struct LanczosState<T> {
    /// Basis vectors `q_1..q_m` (B-orthonormal in the generalized case).
    pub q: Vec<Vec<T>>,
    /// Auxiliary duals `z_j = M q_j`; empty for the Euclidean inner product.
    pub z: Vec<Vec<T>>,
    pub t: TriDiag<T>,
    /// Coupling to the next (unreturned) basis vector.
    pub beta_next: T,
    /// The recurrence stopped early at an invariant subspace.
    pub breakdown: bool,
    pub counters: OpCounters,
}

/// Runs `m` Lanczos steps from `start` (a vector of the eigenvector space,
/// normalized internally). Breakdown truncates the run.
pub fn lanczos_run<T: Real>(
    op: &dyn KrylovOperator<T>,
    ip: &InnerProduct<'_, T>,
    start: &[T],
    m: usize,
) -> Result<LanczosState<T>> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one Lanczos step".into()));
    }
    let mut lz = Lanczos::new(op, ip, 0);
    lz.set_restart_on_breakdown(false);
    if !lz.start_with(start.to_vec())? {
        return Err(Error::InvalidArgument("start vector is zero".into()));
    }
    let mut breakdown = false;
    while lz.steps() < m {
        if lz.step()? == StepStatus::Exhausted {
            breakdown = true;
            break;
        }
    }
    let k = lz.steps();
    let beta_next = if breakdown { T::zero() } else { lz.beta[k - 1] };
    let t = TriDiag::new(lz.alpha.clone(), lz.beta[..k - 1].to_vec())?;
    let mut q = std::mem::take(&mut lz.w);
    q.truncate(k);
    let mut z = std::mem::take(&mut lz.z);
    z.truncate(k);
    Ok(LanczosState { q, z, t, beta_next, breakdown, counters: lz.counters })
}
