//! Weighted-least-squares echo and reverberation stages.
//!
//! Each stage fits, independently per bin and per output channel, a linear
//! filter from a regressor history onto the observation, reweighting by the
//! residual magnitude raised to gamma-2. With gamma=2 the weights are unity
//! and a single pass is the exact least-squares solution, so only one
//! iteration runs.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::{czero, Cx, Scalar};
use crate::sepcore::stack::{stack_delayed, stack_farend, stack_regressors, BinSeries};
use crate::sepcore::{FilterTaps, GgdPrior, CONVERGENCE_TOL, DIAG_LOADING, WEIGHT_FLOOR};
use crate::stft::Spectrogram;

/// Fits G so that target + G*regressor has minimal reweighted power, bin by
/// bin. Returns the per-bin filters and the residual output.
///
/// Bins whose regressor carries no energy keep a zero filter and pass the
/// target through; if every bin is silent the whole regressor is unusable and
/// `Error::ZeroRegressor` is raised.
pub fn solve_weighted_ls_filter<T, F>(
    target: &Spectrogram<T>,
    reg_dim: usize,
    reg_of: F,
    prior: &GgdPrior,
    iters: usize,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)>
where
    T: Scalar,
    F: Fn(usize) -> BinSeries<T>,
{
    let m = target.channels();
    let frames = target.frames();
    let bins = target.bins();
    let mut out = target.clone();
    let mut filters: Vec<CMat<T>> = Vec::with_capacity(bins);

    // Unit weights make every sweep identical, so run exactly one.
    let effective_iters = if prior.gamma() == 2.0 {
        iters.min(1)
    } else {
        iters
    };

    let floor = T::of(WEIGHT_FLOOR);
    let expo = T::of(prior.gamma() - 2.0);
    let gamma = T::of(prior.gamma());
    let tol_sq = T::of(CONVERGENCE_TOL * CONVERGENCE_TOL);
    let inv_frames = T::one() / T::of(frames.max(1) as f64);
    let mut silent_bins = 0usize;

    for bin in 0..bins {
        let reg = reg_of(bin);
        debug_assert_eq!(reg.dim(), reg_dim);
        debug_assert_eq!(reg.frames(), frames);
        if reg.energy() == T::zero() {
            silent_bins += 1;
            filters.push(CMat::zeros(m, reg_dim));
            continue;
        }

        let mut g = CMat::zeros(m, reg_dim);
        // Channels are fit independently: one IRLS per output row.
        for c in 0..m {
            // Residuals start at the raw target (row = 0).
            let mut resid: Vec<Cx<T>> = (0..frames).map(|t| target.at(c, t, bin)).collect();
            let mut obj_prev = floored_objective(&resid, floor, gamma);
            for _ in 0..effective_iters {
                let mut v = CMat::zeros(reg_dim, reg_dim);
                let mut q = vec![czero(); reg_dim];
                for (t, rt) in resid.iter().enumerate() {
                    let w = rt.norm().max(floor).powf(expo);
                    let u = reg.frame(t);
                    v.rank1_herm(u, w);
                    let xw = target.at(c, t, bin).conj().scale(w);
                    for (slot, uk) in q.iter_mut().zip(u.iter()) {
                        *slot += xw * *uk;
                    }
                }
                v.scale(inv_frames);
                let loading = T::of(DIAG_LOADING) * v.trace_re() / T::of(reg_dim as f64);
                v.add_scaled_identity(loading);
                // q becomes -mean(beta * conj(target) * reg); solve V z = q,
                // the filter row is z's conjugate.
                for slot in q.iter_mut() {
                    *slot = -slot.scale(inv_frames);
                }
                let lu = v.lu().map_err(|_| Error::Singular { bin })?;
                let z = lu.solve_vec(&q);
                let row_new: Vec<Cx<T>> = z.iter().map(|zk| zk.conj()).collect();

                let resid_new: Vec<Cx<T>> = (0..frames)
                    .map(|t| {
                        let u = reg.frame(t);
                        let mut acc = target.at(c, t, bin);
                        for (gk, uk) in row_new.iter().zip(u.iter()) {
                            acc += *gk * *uk;
                        }
                        acc
                    })
                    .collect();

                // A sweep must not increase the floored-magnitude objective.
                // The diagonal loading can void that guarantee once residuals
                // reach the loading scale; such a sweep is discarded and the
                // previous row kept.
                let obj_new = floored_objective(&resid_new, floor, gamma);
                if obj_new > obj_prev {
                    break;
                }
                let mut num = T::zero();
                let mut den = T::zero();
                for (a, b) in row_new.iter().zip(g.row(c).iter()) {
                    num += (*a - *b).norm_sqr();
                    den += b.norm_sqr();
                }
                g.row_mut(c).copy_from_slice(&row_new);
                resid = resid_new;
                obj_prev = obj_new;
                if num <= den * tol_sq {
                    break;
                }
            }
            for (t, rt) in resid.iter().enumerate() {
                *out.at_mut(c, t, bin) = *rt;
            }
        }
        filters.push(g);
    }

    if silent_bins == bins {
        return Err(Error::ZeroRegressor);
    }
    Ok((filters, out))
}

fn floored_objective<T: Scalar>(resid: &[Cx<T>], floor: T, gamma: T) -> T {
    let mut acc = T::zero();
    for r in resid {
        acc += r.norm().max(floor).powf(gamma);
    }
    acc
}

fn check_aligned<T: Scalar>(x: &Spectrogram<T>, r: &Spectrogram<T>) -> Result<()> {
    if x.frames() != r.frames() || x.bins() != r.bins() {
        return Err(Error::Dimension(format!(
            "observation {}x{} and far-end {}x{} are not frame-aligned",
            x.frames(),
            x.bins(),
            r.frames(),
            r.bins()
        )));
    }
    Ok(())
}

/// Echo cancellation: y = x + E*(far-end history). A silent far-end yields a
/// passthrough with zero filters and a warning instead of an error.
pub fn aec_stage<T: Scalar>(
    x: &Spectrogram<T>,
    r: &Spectrogram<T>,
    taps: &FilterTaps,
    prior: &GgdPrior,
    iters: usize,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)> {
    check_aligned(x, r)?;
    let dim = taps.aec_dim(r.channels());
    match solve_weighted_ls_filter(x, dim, |b| stack_farend(r, taps.l1(), b), prior, iters) {
        Err(Error::ZeroRegressor) => {
            eprintln!("warning: far-end reference is silent; echo cancellation passes the input through");
            let filters = (0..x.bins()).map(|_| CMat::zeros(x.channels(), dim)).collect();
            Ok((filters, x.clone()))
        }
        other => other,
    }
}

/// Dereverberation: z = y + F*(delayed observation history). An empty history
/// (all frames precede the delay) passes through with a warning.
pub fn dr_stage<T: Scalar>(
    y: &Spectrogram<T>,
    taps: &FilterTaps,
    prior: &GgdPrior,
    iters: usize,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)> {
    let dim = taps.dr_dim(y.channels());
    match solve_weighted_ls_filter(
        y,
        dim,
        |b| stack_delayed(y, taps.l2(), taps.delta(), b),
        prior,
        iters,
    ) {
        Err(Error::ZeroRegressor) => {
            eprintln!("warning: observation history is silent; dereverberation passes the input through");
            let filters = (0..y.bins()).map(|_| CMat::zeros(y.channels(), dim)).collect();
            Ok((filters, y.clone()))
        }
        other => other,
    }
}

/// Joint echo cancellation and dereverberation: one solve over the
/// concatenated far-end and delayed-observation regressor.
pub fn draec_stage<T: Scalar>(
    x: &Spectrogram<T>,
    r: &Spectrogram<T>,
    taps: &FilterTaps,
    prior: &GgdPrior,
    iters: usize,
) -> Result<(Vec<CMat<T>>, Spectrogram<T>)> {
    check_aligned(x, r)?;
    let dim = taps.aec_dim(r.channels()) + taps.dr_dim(x.channels());
    match solve_weighted_ls_filter(x, dim, |b| stack_regressors(x, r, taps, b), prior, iters) {
        Err(Error::ZeroRegressor) => {
            eprintln!("warning: far-end and observation history are both silent; joint stage passes the input through");
            let filters = (0..x.bins()).map(|_| CMat::zeros(x.channels(), dim)).collect();
            Ok((filters, x.clone()))
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::scenario::{ctf_mix, CtfFilter};
    use crate::stft::{StftConfig, Window};

    fn small_cfg() -> StftConfig {
        StftConfig::new(8, 4, Window::SqrtHann, 16000).unwrap()
    }

    fn white(channels: usize, frames: usize, seed: u64) -> Spectrogram<f64> {
        let mut rng = Rng::seeded(seed);
        let mut s = Spectrogram::zeros(channels, frames, small_cfg());
        for ch in 0..channels {
            for t in 0..frames {
                for b in 0..s.bins() {
                    *s.at_mut(ch, t, b) = rng.complex_gaussian();
                }
            }
        }
        s
    }

    fn total_energy(s: &Spectrogram<f64>) -> f64 {
        s.energy()
    }

    #[test]
    fn exact_linear_target_is_recovered() {
        let frames = 200;
        let k = 3;
        let mut rng = Rng::seeded(2);
        let bins = small_cfg().bins();
        let regs: Vec<BinSeries<f64>> = (0..bins)
            .map(|_| {
                let mut r = BinSeries::zeros(frames, k);
                for t in 0..frames {
                    for j in 0..k {
                        r.frame_mut(t)[j] = rng.complex_gaussian();
                    }
                }
                r
            })
            .collect();
        let g_true = [Cx::new(0.8, -0.3), Cx::new(-0.2, 0.1), Cx::new(0.05, 0.4)];
        let mut target = Spectrogram::<f64>::zeros(1, frames, small_cfg());
        for b in 0..bins {
            for t in 0..frames {
                let mut acc = czero::<f64>();
                for j in 0..k {
                    acc += g_true[j] * regs[b].frame(t)[j];
                }
                *target.at_mut(0, t, b) = -acc;
            }
        }
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let (filters, resid) =
            solve_weighted_ls_filter(&target, k, |b| regs[b].clone(), &prior, 20).unwrap();
        for f in &filters {
            for j in 0..k {
                // Diagonal loading biases the solution by about its own
                // relative size (1e-6), so the tolerance sits just above.
                let rel = (f.at(0, j) - g_true[j]).norm() / g_true[j].norm();
                assert!(rel < 1e-5, "coefficient {j} off by {rel}");
            }
        }
        assert!(total_energy(&resid) < 1e-10 * total_energy(&target));
    }

    #[test]
    fn independent_target_yields_vanishing_filter() {
        let frames = 4000;
        let target = white(1, frames, 3);
        let reg_src = white(1, frames, 4);
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let (filters, _) = solve_weighted_ls_filter(
            &target,
            2,
            |b| stack_farend(&reg_src, 2, b),
            &prior,
            5,
        )
        .unwrap();
        for f in &filters {
            for j in 0..2 {
                assert!(f.at(0, j).norm() < 0.1, "leakage {}", f.at(0, j).norm());
            }
        }
    }

    /// Independent complex Gaussian elimination, used as an oracle.
    fn solve_dense(a: &mut Vec<Vec<Cx<f64>>>, b: &mut Vec<Cx<f64>>) {
        let n = b.len();
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r][col].norm() > a[piv][col].norm() {
                    piv = r;
                }
            }
            a.swap(col, piv);
            b.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for cc in col..n {
                    let sub = f * a[col][cc];
                    a[r][cc] -= sub;
                }
                let sub = f * b[col];
                b[r] -= sub;
            }
        }
        for r in (0..n).rev() {
            let mut acc = b[r];
            for cc in r + 1..n {
                acc -= a[r][cc] * b[cc];
            }
            b[r] = acc / a[r][r];
        }
    }

    #[test]
    fn gaussian_case_matches_normal_equations() {
        let frames = 500;
        let k = 4;
        let target = white(2, frames, 11);
        let reg_src = white(2, frames, 12);
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let (filters, _) = solve_weighted_ls_filter(
            &target,
            k,
            |b| stack_farend(&reg_src, 2, b),
            &prior,
            1,
        )
        .unwrap();
        for bin in 0..target.bins() {
            let reg = stack_farend(&reg_src, 2, bin);
            for c in 0..2 {
                // Oracle: explicit normal equations with identical loading.
                let mut v = vec![vec![czero::<f64>(); k]; k];
                let mut q = vec![czero::<f64>(); k];
                for t in 0..frames {
                    let u = reg.frame(t);
                    for i in 0..k {
                        for j in 0..k {
                            v[i][j] += u[i] * u[j].conj();
                        }
                        q[i] += target.at(c, t, bin).conj() * u[i];
                    }
                }
                let tf = frames as f64;
                let mut trace = 0.0;
                for i in 0..k {
                    for j in 0..k {
                        v[i][j] = v[i][j].unscale(tf);
                    }
                    trace += v[i][i].re;
                }
                for i in 0..k {
                    v[i][i].re += 1e-6 * trace / k as f64;
                    q[i] = -q[i].unscale(tf);
                }
                solve_dense(&mut v, &mut q);
                for j in 0..k {
                    let want = q[j].conj();
                    let got = filters[bin].at(c, j);
                    let rel = (got - want).norm() / want.norm().max(1e-12);
                    assert!(rel < 1e-8, "bin {bin} ch {c} tap {j}: rel {rel}");
                }
            }
        }
    }

    #[test]
    fn gamma_two_runs_exactly_one_sweep() {
        let target = white(2, 300, 21);
        let reg_src = white(1, 300, 22);
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let one = solve_weighted_ls_filter(&target, 3, |b| stack_farend(&reg_src, 3, b), &prior, 1)
            .unwrap();
        let many =
            solve_weighted_ls_filter(&target, 3, |b| stack_farend(&reg_src, 3, b), &prior, 25)
                .unwrap();
        assert_eq!(one.0, many.0);
        for t in 0..300 {
            for b in 0..target.bins() {
                assert_eq!(one.1.at(0, t, b), many.1.at(0, t, b));
            }
        }
    }

    #[test]
    fn pure_echo_is_cancelled_deeply() {
        // Mixture = CTF-filtered far-end only; the model is exactly within
        // the filter class, so the residual must fall by 40 dB or more.
        let frames = 600;
        let r = white(1, frames, 31);
        let bins = small_cfg().bins();
        let mut rng = Rng::seeded(32);
        let mut ctf = CtfFilter::<f64>::new(bins, 3, 2, 1);
        for b in 0..bins {
            for tap in 0..3 {
                for out in 0..2 {
                    *ctf.at_mut(b, tap).at_mut(out, 0) = rng.complex_gaussian();
                }
            }
        }
        let x = ctf_mix(&r, &ctf).unwrap();
        let taps = FilterTaps::new(5, 1, 1).unwrap();
        let prior = GgdPrior::with_gamma(0.2).unwrap();
        let (_, y) = aec_stage(&x, &r, &taps, &prior, 20).unwrap();
        let drop = 10.0 * (total_energy(&y) / total_energy(&x)).log10();
        assert!(drop <= -40.0, "echo only dropped {drop:.1} dB");
    }

    #[test]
    fn silent_farend_passes_through_bit_exact() {
        let x = white(2, 100, 41);
        let r = Spectrogram::<f64>::zeros(1, 100, small_cfg());
        let taps = FilterTaps::default();
        let (filters, y) = aec_stage(&x, &r, &taps, &GgdPrior::default(), 10).unwrap();
        for f in &filters {
            assert!(f.data().iter().all(|c| *c == czero()));
        }
        for t in 0..100 {
            for b in 0..x.bins() {
                assert_eq!(y.at(0, t, b), x.at(0, t, b));
                assert_eq!(y.at(1, t, b), x.at(1, t, b));
            }
        }
    }

    #[test]
    fn anechoic_input_leaves_dereverberation_inert() {
        // White frames are uncorrelated with their own history, so the
        // fitted predictor and the output change stay tiny.
        let frames = 20000;
        let y = white(2, frames, 51);
        let taps = FilterTaps::new(1, 1, 2).unwrap();
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let (_, z) = dr_stage(&y, &taps, &prior, 1).unwrap();
        let mut diff = 0.0;
        for c in 0..2 {
            for t in 0..frames {
                for b in 0..y.bins() {
                    diff += (z.at(c, t, b) - y.at(c, t, b)).norm_sqr();
                }
            }
        }
        let rel_db = 10.0 * (diff / total_energy(&y)).log10();
        assert!(rel_db <= -30.0, "relative change {rel_db:.1} dB");
    }

    #[test]
    fn autoregressive_tail_is_removed() {
        // Per bin: y(t) = e(t) + c*y(t - delta). The predictor class contains
        // the generator, so the reverberant part drops by at least 30 dB.
        let frames = 4000;
        let delta = 2;
        let c_ar = 0.9;
        let mut rng = Rng::seeded(61);
        let bins = small_cfg().bins();
        let mut innov = Spectrogram::<f64>::zeros(2, frames, small_cfg());
        let mut y = Spectrogram::<f64>::zeros(2, frames, small_cfg());
        for ch in 0..2 {
            for b in 0..bins {
                for t in 0..frames {
                    let e: Cx<f64> = rng.complex_gaussian();
                    *innov.at_mut(ch, t, b) = e;
                    let past = if t >= delta {
                        y.at(ch, t - delta, b)
                    } else {
                        czero()
                    };
                    *y.at_mut(ch, t, b) = e + past.scale(c_ar);
                }
            }
        }
        let taps = FilterTaps::new(1, 2, delta).unwrap();
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let (_, z) = dr_stage(&y, &taps, &prior, 1).unwrap();
        let mut late_before = 0.0;
        let mut late_after = 0.0;
        for ch in 0..2 {
            for t in 0..frames {
                for b in 0..bins {
                    late_before += (y.at(ch, t, b) - innov.at(ch, t, b)).norm_sqr();
                    late_after += (z.at(ch, t, b) - innov.at(ch, t, b)).norm_sqr();
                }
            }
        }
        let drop = 10.0 * (late_after / late_before).log10();
        assert!(drop <= -30.0, "late energy only dropped {drop:.1} dB");
    }

    #[test]
    fn first_frames_pass_through_before_the_delay() {
        let y = white(2, 50, 71);
        let taps = FilterTaps::new(1, 3, 2).unwrap();
        let (_, z) = dr_stage(&y, &taps, &GgdPrior::default(), 5).unwrap();
        // Frames 0 and 1 have an entirely zero regressor, hence no update.
        for t in 0..2 {
            for b in 0..y.bins() {
                assert_eq!(z.at(0, t, b), y.at(0, t, b));
                assert_eq!(z.at(1, t, b), y.at(1, t, b));
            }
        }
    }

    #[test]
    fn joint_stage_matches_echo_stage_when_histories_decouple() {
        // Echo-only input; the delayed-observation block looks far enough
        // back to be uncorrelated with the echo regressor, so the joint
        // solve and the echo-only solve cancel equally.
        let frames = 800;
        let r = white(1, frames, 81);
        let bins = small_cfg().bins();
        let mut rng = Rng::seeded(82);
        let mut ctf = CtfFilter::<f64>::new(bins, 2, 2, 1);
        for b in 0..bins {
            for tap in 0..2 {
                for out in 0..2 {
                    *ctf.at_mut(b, tap).at_mut(out, 0) = rng.complex_gaussian();
                }
            }
        }
        let x = ctf_mix(&r, &ctf).unwrap();
        let taps = FilterTaps::new(5, 2, 9).unwrap();
        let prior = GgdPrior::with_gamma(2.0).unwrap();
        let (_, y_aec) = aec_stage(&x, &r, &taps, &prior, 1).unwrap();
        let (_, z_joint) = draec_stage(&x, &r, &taps, &prior, 1).unwrap();
        // Both solves carry their own diagonal loading over different
        // regressor dimensions, so agreement holds at the loading scale
        // (1e-6 in amplitude, 1e-12 in energy), not at machine precision.
        let mut diff = 0.0f64;
        for t in 0..frames {
            for b in 0..bins {
                for ch in 0..2 {
                    diff += (z_joint.at(ch, t, b) - y_aec.at(ch, t, b)).norm_sqr();
                }
            }
        }
        let rel = diff / total_energy(&x);
        assert!(rel <= 1e-12, "joint and echo-only outputs differ: rel energy {rel:.3e}");
    }
}

