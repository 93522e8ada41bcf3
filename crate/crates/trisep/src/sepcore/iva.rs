//! Auxiliary-function demixing updates.
//!
//! Each source row is refreshed from a weighted covariance of the stacked
//! observation; the weights couple all bins through the source's full-band
//! power, which is what resolves the frequency permutation. Row updates are
//! exact minimizers of the majorizing surrogate, so the surrogate objective
//! never increases.

use crate::error::{Error, Result};
use crate::linalg::{herm_quad, CMat, LuScratch};
use crate::scalar::{czero, Cx, Scalar};
use crate::sepcore::stack::{stack_joint, stack_mixture, BinSeries};
use crate::sepcore::{FilterTaps, GgdPrior, CONVERGENCE_TOL, DIAG_LOADING, WEIGHT_FLOOR};
use crate::stft::Spectrogram;

/// Full-band frame weights for every source: (floored full-band power) raised
/// to (gamma-2)/2. Shared across bins.
pub fn bss_weights<T: Scalar>(sources: &Spectrogram<T>, prior: &GgdPrior) -> Vec<Vec<T>> {
    (0..sources.channels())
        .map(|m| source_weights(sources, m, prior))
        .collect()
}

pub(crate) fn source_weights<T: Scalar>(
    sources: &Spectrogram<T>,
    m: usize,
    prior: &GgdPrior,
) -> Vec<T> {
    let floor = T::of(WEIGHT_FLOOR * WEIGHT_FLOOR);
    let expo = T::of((prior.gamma() - 2.0) / 2.0);
    (0..sources.frames())
        .map(|t| {
            let power = sources
                .frame(m, t)
                .iter()
                .map(|v| v.norm_sqr())
                .fold(T::zero(), |a, b| a + b);
            power.max(floor).powf(expo)
        })
        .collect()
}

/// Weighted covariance of a stacked observation series with diagonal loading
/// relative to its mean diagonal.
pub fn weighted_cov<T: Scalar>(u: &BinSeries<T>, beta: &[T]) -> Result<CMat<T>> {
    if u.frames() == 0 {
        return Err(Error::Dimension(
            "weighted covariance needs at least one frame".into(),
        ));
    }
    if beta.len() != u.frames() {
        return Err(Error::Dimension(format!(
            "weight count {} does not match frame count {}",
            beta.len(),
            u.frames()
        )));
    }
    let dim = u.dim();
    let mut v = CMat::zeros(dim, dim);
    for (t, &w) in beta.iter().enumerate() {
        v.rank1_herm(u.frame(t), w);
    }
    v.scale(T::one() / T::of(u.frames() as f64));
    let loading = T::of(DIAG_LOADING) * v.trace_re() / T::of(dim as f64);
    v.add_scaled_identity(loading);
    Ok(v)
}

/// Workspace for [`update_demix_row`]: the W·V product, its factorization
/// and the solved row, sized once for a stacked dimension and reused across
/// every bin and sweep.
#[derive(Debug, Clone)]
pub struct RowScratch<T> {
    p: CMat<T>,
    lu: LuScratch<T>,
    e: Vec<Cx<T>>,
    w: Vec<Cx<T>>,
}

impl<T: Scalar> RowScratch<T> {
    pub fn new(dim: usize) -> Self {
        RowScratch {
            p: CMat::zeros(dim, dim),
            lu: LuScratch::new(dim),
            e: vec![czero(); dim],
            w: vec![czero(); dim],
        }
    }
}

/// Replaces row `m` of the demixing matrix with the surrogate minimizer:
/// solve (W V) w = i_m, normalize so w^H V w = 1, store w^H as the row.
pub fn update_demix_row<T: Scalar>(
    w_full: &mut CMat<T>,
    v: &CMat<T>,
    m: usize,
    bin: usize,
    scratch: &mut RowScratch<T>,
) -> Result<()> {
    w_full.mul_into(v, &mut scratch.p);
    scratch
        .lu
        .factor_from(&scratch.p)
        .map_err(|_| Error::Singular { bin })?;
    scratch.e.fill(czero());
    scratch.e[m] = Cx::new(T::one(), T::zero());
    scratch.lu.solve_into(&scratch.e, &mut scratch.w);
    let quad = herm_quad(v, &scratch.w);
    if !(quad > T::zero() && quad.is_finite()) {
        return Err(Error::Singular { bin });
    }
    let inv_norm = quad.sqrt().recip();
    for c in scratch.w.iter_mut() {
        *c = c.scale(inv_norm);
    }
    for (slot, wc) in w_full.row_mut(m).iter_mut().zip(scratch.w.iter()) {
        *slot = wc.conj();
    }
    Ok(())
}

/// Surrogate objective: (2/gamma) * sum_m mean_t (full-band power)^(gamma/2)
/// minus 2 * sum over bins of log|det W|. Infinite when any W is singular.
pub fn separation_objective<T: Scalar>(
    sources: &Spectrogram<T>,
    demix: &[CMat<T>],
    prior: &GgdPrior,
) -> T {
    let frames = sources.frames();
    let half_gamma = T::of(prior.gamma() / 2.0);
    let mut contrast = T::zero();
    for m in 0..sources.channels() {
        let mut acc = T::zero();
        for t in 0..frames {
            let power = sources
                .frame(m, t)
                .iter()
                .map(|v| v.norm_sqr())
                .fold(T::zero(), |a, b| a + b);
            acc += power.powf(half_gamma);
        }
        contrast += acc / T::of(frames as f64);
    }
    let mut logdet = T::zero();
    for w in demix {
        match w.lu() {
            Ok(f) => logdet += f.log_abs_det(),
            Err(_) => return T::infinity(),
        }
    }
    T::of(2.0 / prior.gamma()) * contrast - (logdet + logdet)
}

/// Shared sweep engine: updates the first `m_sources` rows of a per-bin
/// demixing matrix over stacked observations, leaving all other rows fixed.
fn aux_iva<T: Scalar>(
    u_bins: &[BinSeries<T>],
    proto: &Spectrogram<T>,
    m_sources: usize,
    prior: &GgdPrior,
    iters: usize,
    mut objective_trace: Option<&mut Vec<T>>,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)> {
    let bins = u_bins.len();
    let frames = proto.frames();
    let dim = u_bins[0].dim();
    let mut demix: Vec<CMat<T>> = (0..bins).map(|_| CMat::identity(dim)).collect();

    let mut shat = Spectrogram::zeros(m_sources, frames, proto.config.clone());
    shat.set_source_len(proto.source_len());
    for (b, u) in u_bins.iter().enumerate() {
        for t in 0..frames {
            let f = u.frame(t);
            for m in 0..m_sources {
                *shat.at_mut(m, t, b) = f[m];
            }
        }
    }
    if let Some(tr) = objective_trace.as_deref_mut() {
        tr.push(separation_objective(&shat, &demix, prior));
    }

    let tol_sq = T::of(CONVERGENCE_TOL * CONVERGENCE_TOL);
    let mut scratch = RowScratch::new(dim);
    for _ in 0..iters {
        let prev = demix.clone();
        for m in 0..m_sources {
            let beta = source_weights(&shat, m, prior);
            for (b, u) in u_bins.iter().enumerate() {
                let v = weighted_cov(u, &beta)?;
                update_demix_row(&mut demix[b], &v, m, b, &mut scratch)?;
                let row = demix[b].row(m);
                for t in 0..frames {
                    let f = u.frame(t);
                    let mut acc = czero();
                    for (wc, uc) in row.iter().zip(f.iter()) {
                        acc += *wc * *uc;
                    }
                    *shat.at_mut(m, t, b) = acc;
                }
            }
        }
        if let Some(tr) = objective_trace.as_deref_mut() {
            tr.push(separation_objective(&shat, &demix, prior));
        }
        let mut num = T::zero();
        let mut den = T::zero();
        for (wb, pb) in demix.iter().zip(prev.iter()) {
            for (a, b) in wb.data().iter().zip(pb.data().iter()) {
                num += (*a - *b).norm_sqr();
                den += b.norm_sqr();
            }
        }
        if num <= den * tol_sq {
            break;
        }
    }
    Ok((demix, shat))
}

/// Demixes the full stacked observation. The demixing matrix per bin is
/// L x L with only the first M rows free; the history rows stay identity so
/// the model remains causal and invertible. Returns the raw source rows
/// (apply `projection_back` to fix per-bin scale).
pub fn joint_ss<T: Scalar>(
    x: &Spectrogram<T>,
    r: &Spectrogram<T>,
    taps: &FilterTaps,
    prior: &GgdPrior,
    iters: usize,
    objective_trace: Option<&mut Vec<T>>,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)> {
    if x.frames() != r.frames() || x.bins() != r.bins() {
        return Err(Error::Dimension(format!(
            "mixture {}x{} and far-end {}x{} are not frame-aligned",
            x.frames(),
            x.bins(),
            r.frames(),
            r.bins()
        )));
    }
    let u: Vec<BinSeries<T>> = (0..x.bins()).map(|b| stack_joint(x, r, taps, b)).collect();
    aux_iva(&u, x, x.channels(), prior, iters, objective_trace)
}

/// M x M demixing of an already echo/reverberation-cleaned mixture.
pub fn bss_stage<T: Scalar>(
    z: &Spectrogram<T>,
    prior: &GgdPrior,
    iters: usize,
    objective_trace: Option<&mut Vec<T>>,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)> {
    let u: Vec<BinSeries<T>> = (0..z.bins()).map(|b| stack_mixture(z, b)).collect();
    aux_iva(&u, z, z.channels(), prior, iters, objective_trace)
}

/// Resolves the per-bin scale ambiguity: each source is rescaled by the
/// reference-channel entry of the inverse demixing block, so the projected
/// sources sum exactly to the reference channel of the demixed input.
pub fn projection_back<T: Scalar>(shat: &mut Spectrogram<T>, demix: &[CMat<T>]) -> Result<()> {
    let m = shat.channels();
    if demix.len() != shat.bins() {
        return Err(Error::Dimension(format!(
            "{} demixing matrices for {} bins",
            demix.len(),
            shat.bins()
        )));
    }
    for b in 0..shat.bins() {
        if demix[b].rows() < m {
            return Err(Error::Dimension(format!(
                "demixing matrix at bin {b} is smaller than the source count"
            )));
        }
        let mut d = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                *d.at_mut(i, j) = demix[b].at(i, j);
            }
        }
        let inv = d.inverse().map_err(|_| Error::Singular { bin: b })?;
        for src in 0..m {
            let c = inv.at(0, src);
            for t in 0..shat.frames() {
                *shat.at_mut(src, t, b) *= c;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::stft::{StftConfig, Window};

    fn small_cfg() -> StftConfig {
        StftConfig::new(8, 4, Window::SqrtHann, 16000).unwrap()
    }

    fn spectro_from<F: FnMut(usize, usize, usize) -> Cx<f64>>(
        channels: usize,
        frames: usize,
        mut f: F,
    ) -> Spectrogram<f64> {
        let mut s = Spectrogram::zeros(channels, frames, small_cfg());
        for ch in 0..channels {
            for t in 0..frames {
                for b in 0..s.bins() {
                    *s.at_mut(ch, t, b) = f(ch, t, b);
                }
            }
        }
        s
    }

    #[test]
    fn gaussian_prior_gives_unit_weights() {
        let mut rng = Rng::seeded(1);
        let s = spectro_from(2, 16, |_, _, _| rng.complex_gaussian::<f64>());
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        for row in bss_weights(&s, &prior) {
            assert!(row.iter().all(|&w| w == 1.0));
        }
    }

    #[test]
    fn laplacian_weight_on_known_power() {
        // One frame with full-band power 4 under gamma=1 weighs 4^(-1/2).
        let mut s = Spectrogram::<f64>::zeros(1, 1, small_cfg());
        *s.at_mut(0, 0, 2) = Cx::new(2.0, 0.0);
        let prior = GgdPrior::with_gamma(1.0).unwrap();
        let w = bss_weights(&s, &prior);
        assert!((w[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sparse_weights_match_reference_formula() {
        let mut rng = Rng::seeded(7);
        let s = spectro_from(2, 24, |_, _, _| rng.complex_gaussian::<f64>());
        let prior = GgdPrior::with_gamma(0.2).unwrap();
        let got = bss_weights(&s, &prior);
        for m in 0..2 {
            for t in 0..24 {
                let mut power = 0.0;
                for b in 0..s.bins() {
                    power += s.at(m, t, b).norm_sqr();
                }
                let want = power.max(1e-16).powf((0.2 - 2.0) / 2.0);
                let rel = (got[m][t] - want).abs() / want;
                assert!(rel < 1e-14, "m={m} t={t} rel={rel}");
            }
        }
    }

    #[test]
    fn unit_weight_covariance_of_white_series_approaches_identity() {
        let mut rng = Rng::seeded(3);
        let frames = 20000;
        let dim = 3;
        let mut u = BinSeries::<f64>::zeros(frames, dim);
        for t in 0..frames {
            for k in 0..dim {
                u.frame_mut(t)[k] = rng.complex_gaussian();
            }
        }
        let v = weighted_cov(&u, &vec![1.0; frames]).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let got = v.at(i, j);
                if i == j {
                    assert!((got.re - 1.0).abs() < 0.05, "diag {got}");
                    assert_eq!(got.im, 0.0);
                } else {
                    assert!(got.norm() < 0.05, "offdiag {got}");
                }
            }
        }
    }

    #[test]
    fn single_frame_covariance_is_loaded_outer_product() {
        let mut u = BinSeries::<f64>::zeros(1, 2);
        u.frame_mut(0)[0] = Cx::new(1.0, 2.0);
        u.frame_mut(0)[1] = Cx::new(-1.0, 0.5);
        let v = weighted_cov(&u, &[1.0]).unwrap();
        let trace = 5.0 + 1.25;
        let load = 1e-6 * trace / 2.0;
        assert!((v.at(0, 0).re - (5.0 + load)).abs() < 1e-12);
        assert!((v.at(1, 1).re - (1.25 + load)).abs() < 1e-12);
        let want01 = Cx::new(1.0, 2.0) * Cx::new(-1.0, 0.5).conj();
        assert!((v.at(0, 1) - want01).norm() < 1e-12);
        assert_eq!(v.at(1, 0), v.at(0, 1).conj());
    }

    #[test]
    fn zero_weights_give_zero_covariance() {
        let mut u = BinSeries::<f64>::zeros(4, 2);
        for t in 0..4 {
            u.frame_mut(t)[0] = Cx::new(1.0, 1.0);
        }
        let v = weighted_cov(&u, &[0.0; 4]).unwrap();
        assert!(v.data().iter().all(|c| *c == Cx::new(0.0, 0.0)));
    }

    #[test]
    fn empty_series_is_rejected() {
        let u = BinSeries::<f64>::zeros(0, 2);
        assert!(weighted_cov(&u, &[]).is_err());
    }

    #[test]
    fn identity_is_a_fixed_point_of_the_row_update() {
        let mut w = CMat::<f64>::identity(3);
        let v = CMat::identity(3);
        update_demix_row(&mut w, &v, 1, 0, &mut RowScratch::new(3)).unwrap();
        for c in 0..3 {
            let want = if c == 1 { 1.0 } else { 0.0 };
            assert!((w.at(1, c) - Cx::new(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn two_by_two_update_matches_closed_form_inverse() {
        // With W = I the update solves V w = i_m; compare against the
        // explicit 2x2 inverse, then normalize identically.
        let v = CMat::from_rows(&[
            vec![Cx::new(2.0, 0.0), Cx::new(0.3, 0.4)],
            vec![Cx::new(0.3, -0.4), Cx::new(1.5, 0.0)],
        ]);
        let det = Cx::new(2.0 * 1.5, 0.0) - Cx::new(0.3, 0.4) * Cx::new(0.3, -0.4);
        let col0 = [
            Cx::new(1.5, 0.0) / det,
            -Cx::new(0.3, -0.4) / det,
        ];
        let quad: f64 = herm_quad(&v, &col0);
        let scale = quad.sqrt().recip();
        let want = [col0[0].scale(scale), col0[1].scale(scale)];

        let mut w = CMat::<f64>::identity(2);
        update_demix_row(&mut w, &v, 0, 0, &mut RowScratch::new(2)).unwrap();
        for c in 0..2 {
            assert!((w.at(0, c) - want[c].conj()).norm() < 1e-12, "col {c}");
        }
    }

    #[test]
    fn updated_rows_are_exactly_normalized() {
        let mut rng = Rng::seeded(21);
        for trial in 0..50 {
            let n = 2 + (trial % 4);
            // Random SPD via A A^H + I.
            let mut a = CMat::<f64>::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    *a.at_mut(i, j) = rng.complex_gaussian();
                }
            }
            let mut v = CMat::zeros(n, n);
            for i in 0..n {
                let row: Vec<Cx<f64>> = a.row(i).to_vec();
                v.rank1_herm(&row, 1.0);
            }
            v.add_scaled_identity(1.0);
            let mut w = CMat::identity(n);
            let m = trial % n;
            update_demix_row(&mut w, &v, m, 0, &mut RowScratch::new(n)).unwrap();
            let row: Vec<Cx<f64>> = w.row(m).iter().map(|c| c.conj()).collect();
            let quad = herm_quad(&v, &row);
            assert!((quad - 1.0).abs() < 1e-12, "trial {trial}: {quad}");
        }
    }

    #[test]
    fn singular_covariance_reports_bin() {
        let mut w = CMat::<f64>::identity(2);
        let v = CMat::zeros(2, 2);
        match update_demix_row(&mut w, &v, 0, 37, &mut RowScratch::new(2)) {
            Err(Error::Singular { bin }) => assert_eq!(bin, 37),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    /// Instantaneous two-source mixture with per-source envelopes; returns
    /// (mixture spectrogram, mixing matrix).
    fn instantaneous_fixture(frames: usize, seed: u64) -> (Spectrogram<f64>, [[f64; 2]; 2]) {
        let mut rng = Rng::seeded(seed);
        let a = [[1.0, 0.7], [0.45, 1.0]];
        let cfg = small_cfg();
        let bins = cfg.bins();
        let mut x = Spectrogram::zeros(2, frames, cfg);
        for t in 0..frames {
            // Sparse nonstationary envelopes shared across bins make the
            // sources identifiable by full-band weighting.
            let e0 = rng.laplacian().abs() + 0.02;
            let e1 = rng.laplacian().abs() + 0.02;
            for b in 0..bins {
                let s0 = rng.complex_gaussian::<f64>().scale(e0);
                let s1 = rng.complex_gaussian::<f64>().scale(e1);
                *x.at_mut(0, t, b) = s0.scale(a[0][0]) + s1.scale(a[0][1]);
                *x.at_mut(1, t, b) = s0.scale(a[1][0]) + s1.scale(a[1][1]);
            }
        }
        (x, a)
    }

    /// Worst-case (over sources) leakage of D*A from a diagonal-up-to-
    /// permutation matrix, in dB below the dominant entry.
    fn leakage_db(demix: &[CMat<f64>], a: &[[f64; 2]; 2]) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for d in demix {
            let mut g = [[0.0f64; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = Cx::new(0.0, 0.0);
                    for k in 0..2 {
                        acc += d.at(i, k).scale(a[k][j]);
                    }
                    g[i][j] = acc.norm();
                }
            }
            for i in 0..2 {
                let (hi, lo) = if g[i][0] > g[i][1] {
                    (g[i][0], g[i][1])
                } else {
                    (g[i][1], g[i][0])
                };
                worst = worst.max(20.0 * (lo / hi).log10());
            }
        }
        worst
    }

    #[test]
    fn bss_separates_an_instantaneous_mixture() {
        let (x, a) = instantaneous_fixture(1200, 5);
        let prior = GgdPrior::default();
        let (demix, _) = bss_stage(&x, &prior, 30, None).unwrap();
        let leak = leakage_db(&demix, &a);
        assert!(leak < -20.0, "worst leakage {leak:.1} dB");
    }

    #[test]
    fn joint_solver_with_inert_history_matches_plain_demixing() {
        let (x, a) = instantaneous_fixture(400, 6);
        let frames = x.frames();
        let r = Spectrogram::<f64>::zeros(1, frames, small_cfg());
        // Delay past the signal start zeroes the whole history block, so the
        // stacked solver degenerates to the plain M x M problem.
        let taps = FilterTaps::new(2, 2, frames).unwrap();
        let prior = GgdPrior::default();
        let (demix, _) = joint_ss(&x, &r, &taps, &prior, 30, None).unwrap();
        let leak = leakage_db(&demix, &a);
        assert!(leak < -20.0, "worst leakage {leak:.1} dB");
        // History rows must remain exactly identity.
        for d in &demix {
            for row in 2..d.rows() {
                for c in 0..d.cols() {
                    let want = if row == c { 1.0 } else { 0.0 };
                    assert_eq!(d.at(row, c), Cx::new(want, 0.0));
                }
            }
        }
    }

    #[test]
    fn zero_iterations_return_the_input() {
        let (x, _) = instantaneous_fixture(50, 8);
        let r = Spectrogram::<f64>::zeros(1, 50, small_cfg());
        let taps = FilterTaps::default();
        let (_, shat) = joint_ss(&x, &r, &taps, &GgdPrior::default(), 0, None).unwrap();
        for t in 0..50 {
            for b in 0..x.bins() {
                assert_eq!(shat.at(0, t, b), x.at(0, t, b));
                assert_eq!(shat.at(1, t, b), x.at(1, t, b));
            }
        }
    }

    #[test]
    fn surrogate_objective_never_increases() {
        let (x, _) = instantaneous_fixture(300, 9);
        let mut trace = Vec::new();
        bss_stage(&x, &GgdPrior::default(), 12, Some(&mut trace)).unwrap();
        assert!(trace.len() >= 2);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-8, "objective rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn projection_back_undoes_diagonal_scaling() {
        let orig = spectro_from(2, 4, |ch, t, b| Cx::new((1 + ch + t) as f64, b as f64));
        let mut s = orig.clone();
        let bins = s.bins();
        // Demix = diag(2, -0.5): source 0 was scaled by 2, so projection
        // divides the 2 back out. Under a diagonal demix the model says
        // source 1 never reaches the reference channel, so its reference
        // image is zero; the sum property picks channel 0's input exactly.
        let mut demix = Vec::new();
        for _ in 0..bins {
            let mut d = CMat::<f64>::zeros(2, 2);
            *d.at_mut(0, 0) = Cx::new(2.0, 0.0);
            *d.at_mut(1, 1) = Cx::new(-0.5, 0.0);
            demix.push(d);
        }
        for t in 0..4 {
            for b in 0..bins {
                *s.at_mut(0, t, b) = orig.at(0, t, b).scale(2.0);
                *s.at_mut(1, t, b) = orig.at(1, t, b).scale(-0.5);
            }
        }
        projection_back(&mut s, &demix).unwrap();
        for t in 0..4 {
            for b in 0..bins {
                assert!((s.at(0, t, b) - orig.at(0, t, b)).norm() < 1e-12);
                assert!(s.at(1, t, b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn projected_sources_sum_to_the_reference_channel() {
        let (x, _) = instantaneous_fixture(200, 13);
        let prior = GgdPrior::default();
        let (demix, mut shat) = bss_stage(&x, &prior, 10, None).unwrap();
        projection_back(&mut shat, &demix).unwrap();
        for t in 0..x.frames() {
            for b in 0..x.bins() {
                let sum = shat.at(0, t, b) + shat.at(1, t, b);
                let want = x.at(0, t, b);
                assert!(
                    (sum - want).norm() <= 1e-10 * (1.0 + want.norm()),
                    "t={t} b={b}"
                );
            }
        }
    }

    #[test]
    fn projection_back_keeps_permutations() {
        // Anti-diagonal demix swaps sources. Projection must fix scales in
        // place, never swap contents back: under this demix the reference
        // channel contains only the slot-1 source, so slot 0 projects to
        // zero and slot 1 is rescaled by the inverse anti-diagonal entry.
        let bins = small_cfg().bins();
        let mut s = spectro_from(2, 3, |ch, t, _| Cx::new((ch * 10 + t) as f64 + 1.0, 0.0));
        let mut demix = Vec::new();
        for _ in 0..bins {
            let mut d = CMat::<f64>::zeros(2, 2);
            *d.at_mut(0, 1) = Cx::new(2.0, 0.0);
            *d.at_mut(1, 0) = Cx::new(0.5, 0.0);
            demix.push(d);
        }
        let before = s.clone();
        projection_back(&mut s, &demix).unwrap();
        for t in 0..3 {
            for b in 0..bins {
                assert!((s.at(0, t, b) - Cx::new(0.0, 0.0)).norm() < 1e-12);
                // inv([[0,2],[0.5,0]]) = [[0,2],[0.5,0]]: slot 1's
                // reference-channel coefficient is 2.
                let want = before.at(1, t, b).scale(2.0);
                assert!((s.at(1, t, b) - want).norm() < 1e-12);
            }
        }
    }
}
