//! Streaming separation: one frame in, one frame out.
//!
//! Correlation statistics are tracked recursively with a smoothing
//! coefficient instead of batch averages, and filter or demixing rows are
//! re-solved from the running statistics as frames arrive. The weighted-LS
//! stages carry a Cholesky factor of the regressor autocorrelation, so both
//! the statistics update and the filter re-solve stay quadratic in the filter
//! dimension; only the demixing row update pays a cubic solve. Output frame t
//! depends only on input frames up to t; the weights that would need the
//! current output are taken from the previous frame's output instead.

use crate::error::{Error, Result};
use crate::linalg::{chol_rank1, chol_solve, CMat, LuScratch};
use crate::scalar::{czero, Cx, Scalar};
use crate::sepcore::{
    update_demix_row, Algorithm, FilterTaps, GgdPrior, RowScratch, DIAG_LOADING, WEIGHT_FLOOR,
};
use crate::stft::Spectrogram;

/// One spectral frame: outer index channel, inner index bin.
pub type Frame<T> = Vec<Vec<Cx<T>>>;

/// Streaming parameters: smoothing coefficient, filter geometry, source
/// prior, and how often coefficients are re-solved from the statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineConfig {
    alpha: f64,
    taps: FilterTaps,
    prior: GgdPrior,
    refresh_stride: usize,
}

impl OnlineConfig {
    pub fn new(alpha: f64, taps: FilterTaps, prior: GgdPrior) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "smoothing coefficient must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(OnlineConfig {
            alpha,
            taps,
            prior,
            refresh_stride: 1,
        })
    }

    /// Re-solve coefficients only every `stride` frames; statistics still
    /// advance every frame.
    pub fn with_refresh_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 {
            return Err(Error::Config("refresh stride must be at least 1".into()));
        }
        self.refresh_stride = stride;
        Ok(self)
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn taps(&self) -> &FilterTaps {
        &self.taps
    }

    #[inline]
    pub fn prior(&self) -> &GgdPrior {
        &self.prior
    }

    #[inline]
    pub fn refresh_stride(&self) -> usize {
        self.refresh_stride
    }
}

impl Default for OnlineConfig {
    fn default() -> Self {
        OnlineConfig {
            alpha: 0.999,
            taps: FilterTaps::default(),
            prior: GgdPrior::default(),
            refresh_stride: 1,
        }
    }
}

/// Fixed-capacity history of past frames, zero before the first push.
/// Lag 0 is the most recently pushed frame.
#[derive(Debug, Clone)]
struct FrameRing<T> {
    slots: Vec<Vec<Cx<T>>>,
    channels: usize,
    bins: usize,
    pos: usize,
}

impl<T: Scalar> FrameRing<T> {
    fn new(capacity: usize, channels: usize, bins: usize) -> Self {
        FrameRing {
            slots: vec![vec![czero(); channels * bins]; capacity.max(1)],
            channels,
            bins,
            pos: 0,
        }
    }

    fn push(&mut self, frame: &[Vec<Cx<T>>]) {
        let slot = &mut self.slots[self.pos];
        for (ch, row) in frame.iter().enumerate() {
            slot[ch * self.bins..(ch + 1) * self.bins].copy_from_slice(row);
        }
        self.pos = (self.pos + 1) % self.slots.len();
    }

    /// Contiguous bins of one channel at the given lag.
    #[inline]
    fn lag_row(&self, lag: usize, ch: usize) -> &[Cx<T>] {
        let cap = self.slots.len();
        debug_assert!(lag < cap);
        let idx = (self.pos + cap - 1 - lag) % cap;
        &self.slots[idx][ch * self.bins..(ch + 1) * self.bins]
    }
}

/// Recursive weighted-LS stage: per channel and bin, an augmented factor
/// [R | z] advances by one Givens sweep per frame, where RᴴR tracks the
/// regressor autocorrelation V and z the rotated right-hand side; the filter
/// row is re-solved with a single back-substitution. Every per-frame cost is
/// quadratic in the filter dimension, and the factor absorbs the enormous
/// weights the floored source prior produces without the cancellation that
/// wipes out a directly tracked inverse.
#[derive(Debug, Clone)]
struct WlsOnline<T> {
    dim: usize,
    channels: usize,
    bins: usize,
    fac: Vec<CMat<T>>,
    g: Vec<Vec<Cx<T>>>,
    prev: Frame<T>,
    have_prev: bool,
    skipped: u64,
    u: Vec<Cx<T>>,
    work: Vec<Cx<T>>,
}

impl<T: Scalar> WlsOnline<T> {
    fn new(channels: usize, bins: usize, dim: usize) -> Self {
        let mut f0 = CMat::zeros(dim, dim + 1);
        let d0 = T::of(DIAG_LOADING).sqrt();
        for i in 0..dim {
            *f0.at_mut(i, i) = Cx::new(d0, T::zero());
        }
        WlsOnline {
            dim,
            channels,
            bins,
            fac: vec![f0; channels * bins],
            g: vec![vec![czero(); dim]; channels * bins],
            prev: vec![vec![czero(); bins]; channels],
            have_prev: false,
            skipped: 0,
            u: vec![czero(); dim],
            work: vec![czero(); dim + 1],
        }
    }

    /// Absorbs one frame, optionally re-solves the filter rows, and emits
    /// target + G*regressor. `reg_rows` lists the stacked regressor's source
    /// rows, one full-bins slice per filter dimension.
    fn step(
        &mut self,
        target: &[Vec<Cx<T>>],
        reg_rows: &[&[Cx<T>]],
        alpha: T,
        prior: &GgdPrior,
        refresh: bool,
    ) -> Frame<T> {
        debug_assert_eq!(reg_rows.len(), self.dim);
        let floor = T::of(WEIGHT_FLOOR);
        let expo = T::of(prior.gamma() - 2.0);
        let blend = T::one() - alpha;
        let mut out = vec![vec![czero(); self.bins]; self.channels];
        for bin in 0..self.bins {
            for (slot, row) in self.u.iter_mut().zip(reg_rows.iter()) {
                *slot = row[bin];
            }
            for ch in 0..self.channels {
                // The weight comes from the previous frame's output; the
                // first frame falls back to the raw target, which is what a
                // zero filter would have emitted.
                let mag = if self.have_prev {
                    self.prev[ch][bin].norm()
                } else {
                    target[ch][bin].norm()
                };
                let w = blend * mag.max(floor).powf(expo);
                let idx = ch * self.bins + bin;
                // [R | z] follows V ← α·V + w·u·uᴴ with right-hand side
                // −target*, so R·h = z has h = −V⁻¹q and the filter is h*.
                self.work[..self.dim].copy_from_slice(&self.u);
                self.work[self.dim] = -target[ch][bin].conj();
                chol_rank1(&mut self.fac[idx], &mut self.work, alpha, w);
                if refresh {
                    // On a degenerate factor the previous coefficients are
                    // held.
                    match chol_backsub(&self.fac[idx], &mut self.work[..self.dim]) {
                        Ok(()) => {
                            for (slot, hk) in self.g[idx].iter_mut().zip(self.work.iter()) {
                                *slot = hk.conj();
                            }
                        }
                        Err(_) => self.skipped += 1,
                    }
                }
                let mut acc = target[ch][bin];
                for (gk, uk) in self.g[idx].iter().zip(self.u.iter()) {
                    acc += *gk * *uk;
                }
                out[ch][bin] = acc;
            }
        }
        for (prev_row, out_row) in self.prev.iter_mut().zip(out.iter()) {
            prev_row.copy_from_slice(out_row);
        }
        self.have_prev = true;
        out
    }
}

/// Recursive demixing stage: per-source covariances of the stacked input,
/// one row update per source per refresh, and a projection row that pins the
/// output scale to the first input channel. Covers both the plain
/// square demix and the full stacked system with identity history rows.
#[derive(Debug, Clone)]
struct IvaOnline<T> {
    sources: usize,
    dim: usize,
    bins: usize,
    v: Vec<CMat<T>>,
    w: Vec<CMat<T>>,
    proj: Vec<Vec<Cx<T>>>,
    prev: Frame<T>,
    have_prev: bool,
    skipped: u64,
    ubuf: Vec<Cx<T>>,
    beta: Vec<T>,
    row_scratch: RowScratch<T>,
    dmat: CMat<T>,
    dlu: LuScratch<T>,
    e0: Vec<Cx<T>>,
    prow: Vec<Cx<T>>,
}

impl<T: Scalar> IvaOnline<T> {
    fn new(sources: usize, dim: usize, bins: usize) -> Self {
        let mut v0 = CMat::identity(dim);
        v0.scale(T::of(DIAG_LOADING));
        let mut proj0 = vec![czero(); sources];
        proj0[0] = Cx::new(T::one(), T::zero());
        IvaOnline {
            sources,
            dim,
            bins,
            v: vec![v0; sources * bins],
            w: vec![CMat::identity(dim); bins],
            proj: vec![proj0; bins],
            prev: vec![vec![czero(); bins]; sources],
            have_prev: false,
            skipped: 0,
            ubuf: vec![czero(); bins * dim],
            beta: vec![T::zero(); sources],
            row_scratch: RowScratch::new(dim),
            dmat: CMat::zeros(sources, sources),
            dlu: LuScratch::new(sources),
            e0: vec![czero(); sources],
            prow: vec![czero(); sources],
        }
    }

    fn step(
        &mut self,
        u_rows: &[&[Cx<T>]],
        alpha: T,
        prior: &GgdPrior,
        refresh: bool,
    ) -> Frame<T> {
        debug_assert_eq!(u_rows.len(), self.dim);
        let blend = T::one() - alpha;
        let floor = T::of(WEIGHT_FLOOR * WEIGHT_FLOOR);
        let expo = T::of((prior.gamma() - 2.0) / 2.0);
        for (j, row) in u_rows.iter().enumerate() {
            for (bin, v) in row.iter().enumerate() {
                self.ubuf[bin * self.dim + j] = *v;
            }
        }
        // Full-band weights, one per source, from the previous separated
        // frame; the first frame uses the identity-demix image of the input.
        for src in 0..self.sources {
            let power = if self.have_prev {
                self.prev[src]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
            } else {
                (0..self.bins)
                    .map(|b| self.ubuf[b * self.dim + src].norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
            };
            self.beta[src] = blend * power.max(floor).powf(expo);
        }
        let mut out = vec![vec![czero(); self.bins]; self.sources];
        for bin in 0..self.bins {
            let u = &self.ubuf[bin * self.dim..(bin + 1) * self.dim];
            for src in 0..self.sources {
                let v = &mut self.v[src * self.bins + bin];
                v.scale(alpha);
                v.rank1_herm(u, self.beta[src]);
            }
            if refresh {
                for src in 0..self.sources {
                    if update_demix_row(
                        &mut self.w[bin],
                        &self.v[src * self.bins + bin],
                        src,
                        bin,
                        &mut self.row_scratch,
                    )
                    .is_err()
                    {
                        self.skipped += 1;
                    }
                }
                // Projection row = first row of the inverse of the leading
                // sources×sources block, obtained from one transposed solve.
                for r in 0..self.sources {
                    for c in 0..self.sources {
                        *self.dmat.at_mut(r, c) = self.w[bin].at(c, r);
                    }
                }
                match self.dlu.factor_from(&self.dmat) {
                    Ok(()) => {
                        self.e0.fill(czero());
                        self.e0[0] = Cx::new(T::one(), T::zero());
                        self.dlu.solve_into(&self.e0, &mut self.prow);
                        self.proj[bin].copy_from_slice(&self.prow);
                    }
                    Err(_) => self.skipped += 1,
                }
            }
            for src in 0..self.sources {
                let row = self.w[bin].row(src);
                let mut acc = czero::<T>();
                for (wk, uk) in row.iter().zip(u.iter()) {
                    acc += *wk * *uk;
                }
                self.prev[src][bin] = acc;
                out[src][bin] = acc * self.proj[bin][src];
            }
        }
        self.have_prev = true;
        out
    }
}

/// All mutable state of one stream: stage statistics, history rings, and
/// counters. Advance it exactly once per input frame via [`online_step`].
#[derive(Debug, Clone)]
pub struct OnlineState<T: Scalar> {
    cfg: OnlineConfig,
    algorithm: Algorithm,
    bins: usize,
    mics: usize,
    refs: usize,
    frames_seen: u64,
    r_ring: Option<FrameRing<T>>,
    delay_ring: Option<FrameRing<T>>,
    wls1: Option<WlsOnline<T>>,
    wls2: Option<WlsOnline<T>>,
    iva: IvaOnline<T>,
}

impl<T: Scalar> OnlineState<T> {
    #[inline]
    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    #[inline]
    pub fn bins(&self) -> usize {
        self.bins
    }

    #[inline]
    pub fn mics(&self) -> usize {
        self.mics
    }

    #[inline]
    pub fn refs(&self) -> usize {
        self.refs
    }

    /// Frames absorbed so far.
    #[inline]
    pub fn frames_processed(&self) -> u64 {
        self.frames_seen
    }

    /// Coefficient refreshes abandoned because a solve was singular; the
    /// previous coefficients were held each time.
    pub fn skipped_refreshes(&self) -> u64 {
        self.iva.skipped
            + self.wls1.as_ref().map_or(0, |s| s.skipped)
            + self.wls2.as_ref().map_or(0, |s| s.skipped)
    }
}

/// Builds the zeroed state for one stream. `refs` is the far-end channel
/// count and must be nonzero exactly when the algorithm consumes a far-end.
pub fn online_init<T: Scalar>(
    cfg: &OnlineConfig,
    algorithm: Algorithm,
    bins: usize,
    mics: usize,
    refs: usize,
) -> Result<OnlineState<T>> {
    if bins == 0 || mics == 0 {
        return Err(Error::Config(format!(
            "online state needs at least one bin and one channel, got {bins} bins, {mics} channels"
        )));
    }
    if algorithm.needs_farend() && refs == 0 {
        return Err(Error::Config(format!(
            "algorithm {algorithm} needs a far-end reference"
        )));
    }
    let taps = cfg.taps;
    let aec_dim = taps.aec_dim(refs);
    let dr_dim = taps.dr_dim(mics);
    let delay_cap = taps.delta() + taps.l2();
    let (r_ring, delay_ring, wls1, wls2, iva) = match algorithm {
        Algorithm::JointSs => (
            Some(FrameRing::new(taps.l1(), refs, bins)),
            Some(FrameRing::new(delay_cap, mics, bins)),
            None,
            None,
            IvaOnline::new(mics, taps.stacked_dim(mics, refs), bins),
        ),
        Algorithm::DraecBss => (
            Some(FrameRing::new(taps.l1(), refs, bins)),
            Some(FrameRing::new(delay_cap, mics, bins)),
            Some(WlsOnline::new(mics, bins, aec_dim + dr_dim)),
            None,
            IvaOnline::new(mics, mics, bins),
        ),
        Algorithm::DrAecBss | Algorithm::AecDrBss => (
            Some(FrameRing::new(taps.l1(), refs, bins)),
            Some(FrameRing::new(delay_cap, mics, bins)),
            Some(WlsOnline::new(
                mics,
                bins,
                if algorithm == Algorithm::DrAecBss {
                    dr_dim
                } else {
                    aec_dim
                },
            )),
            Some(WlsOnline::new(
                mics,
                bins,
                if algorithm == Algorithm::DrAecBss {
                    aec_dim
                } else {
                    dr_dim
                },
            )),
            IvaOnline::new(mics, mics, bins),
        ),
        Algorithm::Bss => (None, None, None, None, IvaOnline::new(mics, mics, bins)),
    };
    Ok(OnlineState {
        cfg: *cfg,
        algorithm,
        bins,
        mics,
        refs,
        frames_seen: 0,
        r_ring,
        delay_ring,
        wls1,
        wls2,
        iva,
    })
}

fn check_frame<T: Scalar>(frame: &[Vec<Cx<T>>], channels: usize, bins: usize) -> Result<()> {
    if frame.len() != channels || frame.iter().any(|row| row.len() != bins) {
        return Err(Error::Dimension(format!(
            "frame has {} channels of {} bins, state expects {} x {}",
            frame.len(),
            frame.first().map_or(0, |r| r.len()),
            channels,
            bins
        )));
    }
    Ok(())
}

fn farend_rows<'a, T: Scalar>(ring: &'a FrameRing<T>, l1: usize, rows: &mut Vec<&'a [Cx<T>]>) {
    for lag in 0..l1 {
        for ch in 0..ring.channels {
            rows.push(ring.lag_row(lag, ch));
        }
    }
}

fn delayed_rows<'a, T: Scalar>(
    ring: &'a FrameRing<T>,
    l2: usize,
    delta: usize,
    rows: &mut Vec<&'a [Cx<T>]>,
) {
    for lag in 0..l2 {
        for ch in 0..ring.channels {
            rows.push(ring.lag_row(delta + lag, ch));
        }
    }
}

/// Absorbs one frame and emits one separated frame. Statistics advance every
/// call; coefficients are re-solved on every stride-th absorbed frame.
pub fn online_step<T: Scalar>(
    state: &mut OnlineState<T>,
    x_frame: &[Vec<Cx<T>>],
    r_frame: Option<&[Vec<Cx<T>>]>,
) -> Result<Frame<T>> {
    check_frame(x_frame, state.mics, state.bins)?;
    let r_frame = if state.algorithm.needs_farend() {
        let r = r_frame.ok_or_else(|| {
            Error::Config(format!(
                "algorithm {} needs a far-end reference",
                state.algorithm
            ))
        })?;
        check_frame(r, state.refs, state.bins)?;
        Some(r)
    } else {
        None
    };

    let alpha = T::of(state.cfg.alpha);
    let prior = state.cfg.prior;
    let taps = state.cfg.taps;
    let refresh = (state.frames_seen + 1) % state.cfg.refresh_stride as u64 == 0;

    let out = match state.algorithm {
        Algorithm::JointSs => {
            state.r_ring.as_mut().unwrap().push(r_frame.unwrap());
            state.delay_ring.as_mut().unwrap().push(x_frame);
            let r_ring = state.r_ring.as_ref().unwrap();
            let delay_ring = state.delay_ring.as_ref().unwrap();
            let mut rows: Vec<&[Cx<T>]> =
                Vec::with_capacity(taps.stacked_dim(state.mics, state.refs));
            for row in x_frame.iter() {
                rows.push(row);
            }
            farend_rows(r_ring, taps.l1(), &mut rows);
            delayed_rows(delay_ring, taps.l2(), taps.delta(), &mut rows);
            state.iva.step(&rows, alpha, &prior, refresh)
        }
        Algorithm::DraecBss => {
            state.r_ring.as_mut().unwrap().push(r_frame.unwrap());
            state.delay_ring.as_mut().unwrap().push(x_frame);
            let r_ring = state.r_ring.as_ref().unwrap();
            let delay_ring = state.delay_ring.as_ref().unwrap();
            let aec_dim = taps.aec_dim(state.refs);
            let dr_dim = taps.dr_dim(state.mics);
            let mut rows: Vec<&[Cx<T>]> = Vec::with_capacity(aec_dim + dr_dim);
            farend_rows(r_ring, taps.l1(), &mut rows);
            delayed_rows(delay_ring, taps.l2(), taps.delta(), &mut rows);
            let y = state
                .wls1
                .as_mut()
                .unwrap()
                .step(x_frame, &rows, alpha, &prior, refresh);
            let yrows: Vec<&[Cx<T>]> = y.iter().map(|r| r.as_slice()).collect();
            state.iva.step(&yrows, alpha, &prior, refresh)
        }
        Algorithm::DrAecBss => {
            state.delay_ring.as_mut().unwrap().push(x_frame);
            let delay_ring = state.delay_ring.as_ref().unwrap();
            let mut rows1: Vec<&[Cx<T>]> = Vec::with_capacity(taps.dr_dim(state.mics));
            delayed_rows(delay_ring, taps.l2(), taps.delta(), &mut rows1);
            let y1 = state
                .wls1
                .as_mut()
                .unwrap()
                .step(x_frame, &rows1, alpha, &prior, refresh);
            state.r_ring.as_mut().unwrap().push(r_frame.unwrap());
            let r_ring = state.r_ring.as_ref().unwrap();
            let mut rows2: Vec<&[Cx<T>]> = Vec::with_capacity(taps.aec_dim(state.refs));
            farend_rows(r_ring, taps.l1(), &mut rows2);
            let y2 = state
                .wls2
                .as_mut()
                .unwrap()
                .step(&y1, &rows2, alpha, &prior, refresh);
            let yrows: Vec<&[Cx<T>]> = y2.iter().map(|r| r.as_slice()).collect();
            state.iva.step(&yrows, alpha, &prior, refresh)
        }
        Algorithm::AecDrBss => {
            state.r_ring.as_mut().unwrap().push(r_frame.unwrap());
            let r_ring = state.r_ring.as_ref().unwrap();
            let mut rows1: Vec<&[Cx<T>]> = Vec::with_capacity(taps.aec_dim(state.refs));
            farend_rows(r_ring, taps.l1(), &mut rows1);
            let y1 = state
                .wls1
                .as_mut()
                .unwrap()
                .step(x_frame, &rows1, alpha, &prior, refresh);
            // The dereverberation history is this stage's own input, i.e.
            // the echo-cancelled frames.
            state.delay_ring.as_mut().unwrap().push(&y1);
            let delay_ring = state.delay_ring.as_ref().unwrap();
            let mut rows2: Vec<&[Cx<T>]> = Vec::with_capacity(taps.dr_dim(state.mics));
            delayed_rows(delay_ring, taps.l2(), taps.delta(), &mut rows2);
            let y2 = state
                .wls2
                .as_mut()
                .unwrap()
                .step(&y1, &rows2, alpha, &prior, refresh);
            let yrows: Vec<&[Cx<T>]> = y2.iter().map(|r| r.as_slice()).collect();
            state.iva.step(&yrows, alpha, &prior, refresh)
        }
        Algorithm::Bss => {
            let rows: Vec<&[Cx<T>]> = x_frame.iter().map(|r| r.as_slice()).collect();
            state.iva.step(&rows, alpha, &prior, refresh)
        }
    };
    state.frames_seen += 1;
    Ok(out)
}

/// Runs the stream over a whole spectrogram: exactly a fold of
/// [`online_step`] over its frames. Returns the separated spectrogram and
/// the final state.
pub fn online_run<T: Scalar>(
    x: &Spectrogram<T>,
    r: Option<&Spectrogram<T>>,
    cfg: &OnlineConfig,
    algorithm: Algorithm,
) -> Result<(Spectrogram<T>, OnlineState<T>)> {
    let r = match (algorithm.needs_farend(), r) {
        (true, None) => {
            return Err(Error::Config(format!(
                "algorithm {algorithm} needs a far-end reference"
            )))
        }
        (true, Some(r)) => {
            if r.frames() != x.frames() || r.bins() != x.bins() {
                return Err(Error::Dimension(format!(
                    "mixture {}x{} and far-end {}x{} are not frame-aligned",
                    x.frames(),
                    x.bins(),
                    r.frames(),
                    r.bins()
                )));
            }
            Some(r)
        }
        (false, _) => None,
    };
    let refs = r.map_or(0, |r| r.channels());
    let mut state = online_init::<T>(cfg, algorithm, x.bins(), x.channels(), refs)?;
    let mut out = Spectrogram::zeros(x.channels(), x.frames(), x.config.clone());
    out.set_source_len(x.source_len());
    let mut x_frame: Frame<T> = vec![vec![czero(); x.bins()]; x.channels()];
    let mut r_frame: Frame<T> = vec![vec![czero(); x.bins()]; refs];
    for t in 0..x.frames() {
        for (ch, row) in x_frame.iter_mut().enumerate() {
            row.copy_from_slice(x.frame(ch, t));
        }
        if let Some(r) = r {
            for (ch, row) in r_frame.iter_mut().enumerate() {
                row.copy_from_slice(r.frame(ch, t));
            }
        }
        let s = online_step(&mut state, &x_frame, r.map(|_| r_frame.as_slice()))?;
        for (ch, row) in s.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                *out.at_mut(ch, t, b) = *v;
            }
        }
    }
    Ok((out, state))
}
