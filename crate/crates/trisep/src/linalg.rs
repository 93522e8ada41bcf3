//! Small dense complex matrices with LU factorization.
//!
//! Everything the per-bin updates need: Hermitian rank-1 accumulation,
//! products, linear solves, inverses and log-determinants. Matrices stay tiny
//! (L×L with L around 17 at the default taps), so a naive row-major layout
//! with partial-pivot LU is both adequate and allocation-friendly.

use crate::scalar::{czero, Cx, Scalar};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

/// Marker error: a pivot vanished during factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularMatrix;

impl<T: Scalar> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Cx<T>>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Cx<T> {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Cx<T> {
        &mut self.data[r * self.cols + c]
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Cx<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [Cx<T>] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn fill(&mut self, v: Cx<T>) {
        self.data.fill(v);
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v = v.scale(s);
        }
    }

    /// self += s·I (square matrices).
    pub fn add_scaled_identity(&mut self, s: T) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self.data[i * self.cols + i].re += s;
        }
    }

    /// self += w·u·uᴴ, the Hermitian rank-1 update. The upper triangle is
    /// computed and mirrored so hermiticity holds exactly, not just to
    /// rounding; diagonal entries stay exactly real.
    pub fn rank1_herm(&mut self, u: &[Cx<T>], w: T) {
        debug_assert_eq!(self.rows, self.cols);
        debug_assert_eq!(u.len(), self.rows);
        let n = self.rows;
        for (r, ur) in u.iter().enumerate() {
            let s = ur.scale(w);
            self.data[r * n + r].re += w * ur.norm_sqr();
            for c in r + 1..n {
                let v = s * u[c].conj();
                self.data[r * n + c] += v;
                self.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
    }

    pub fn mul(&self, rhs: &CMat<T>) -> CMat<T> {
        let mut out = CMat::zeros(self.rows, rhs.cols);
        self.mul_into(rhs, &mut out);
        out
    }

    /// `mul` into a caller-owned matrix of the right shape; the hot per-bin
    /// paths reuse one output across calls.
    pub fn mul_into(&self, rhs: &CMat<T>, out: &mut CMat<T>) {
        assert_eq!(self.cols, rhs.rows, "matmul shape");
        assert_eq!(out.rows, self.rows, "matmul output rows");
        assert_eq!(out.cols, rhs.cols, "matmul output cols");
        out.data.fill(czero());
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out_row = out.row_mut(r);
                for (o, b) in out_row.iter_mut().zip(rhs_row.iter()) {
                    *o += a * b;
                }
            }
        }
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(self.cols, v.len(), "matvec shape");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v.iter())
                    .fold(czero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Real trace (diagonal imaginary parts are rounding noise on Hermitian
    /// matrices and are ignored).
    pub fn trace_re(&self) -> T {
        debug_assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.at(i, i).re).sum()
    }

    pub fn frob_norm(&self) -> T {
        self.data
            .iter()
            .map(|v| v.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn lu(&self) -> Result<Lu<T>, SingularMatrix> {
        assert_eq!(self.rows, self.cols, "LU requires a square matrix");
        Lu::factor(self)
    }

    /// A⁻¹ via LU; fails on exactly singular input.
    pub fn inverse(&self) -> Result<CMat<T>, SingularMatrix> {
        self.lu().map(|f| f.inverse())
    }
}

fn lu_factor_in_place<T: Scalar>(lu: &mut [Cx<T>], perm: &mut [usize]) -> Result<(), SingularMatrix> {
    let n = perm.len();
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    for k in 0..n {
        let mut pivot = k;
        let mut best = lu[k * n + k].norm_sqr();
        for r in k + 1..n {
            let mag = lu[r * n + k].norm_sqr();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        if best == T::zero() {
            return Err(SingularMatrix);
        }
        if pivot != k {
            perm.swap(k, pivot);
            for c in 0..n {
                lu.swap(k * n + c, pivot * n + c);
            }
        }
        let d = lu[k * n + k];
        for r in k + 1..n {
            let f = lu[r * n + k] / d;
            lu[r * n + k] = f;
            for c in k + 1..n {
                let sub = f * lu[k * n + c];
                lu[r * n + c] -= sub;
            }
        }
    }
    Ok(())
}

fn lu_solve_into<T: Scalar>(lu: &[Cx<T>], perm: &[usize], b: &[Cx<T>], x: &mut [Cx<T>]) {
    let n = perm.len();
    assert_eq!(b.len(), n, "rhs length");
    assert_eq!(x.len(), n, "solution length");
    for (slot, &p) in x.iter_mut().zip(perm.iter()) {
        *slot = b[p];
    }
    for r in 1..n {
        let mut acc = x[r];
        for c in 0..r {
            acc -= lu[r * n + c] * x[c];
        }
        x[r] = acc;
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc -= lu[r * n + c] * x[c];
        }
        x[r] = acc / lu[r * n + r];
    }
}

/// LU factorization with partial pivoting, stored packed.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<Cx<T>>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(a: &CMat<T>) -> Result<Self, SingularMatrix> {
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        lu_factor_in_place(&mut lu, &mut perm)?;
        Ok(Lu { n, lu, perm })
    }

    pub fn solve_vec(&self, b: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut x = vec![czero(); self.n];
        lu_solve_into(&self.lu, &self.perm, b, &mut x);
        x
    }

    pub fn inverse(&self) -> CMat<T> {
        let n = self.n;
        let mut inv = CMat::zeros(n, n);
        let mut e = vec![czero(); n];
        for c in 0..n {
            e[c] = Cx::new(T::one(), T::zero());
            let col = self.solve_vec(&e);
            for r in 0..n {
                *inv.at_mut(r, c) = col[r];
            }
            e[c] = czero();
        }
        inv
    }

    /// log|det A| from the pivot magnitudes.
    pub fn log_abs_det(&self) -> T {
        let n = self.n;
        (0..n)
            .map(|i| self.lu[i * n + i].norm().ln())
            .fold(T::zero(), |a, b| a + b)
    }
}

/// Reusable LU workspace for a fixed dimension: factor and solve without
/// allocating. Per-frame streaming paths keep one of these per stage.
#[derive(Debug, Clone)]
pub struct LuScratch<T> {
    lu: Vec<Cx<T>>,
    perm: Vec<usize>,
}

impl<T: Scalar> LuScratch<T> {
    pub fn new(n: usize) -> Self {
        LuScratch {
            lu: vec![czero(); n * n],
            perm: vec![0; n],
        }
    }

    /// Factors `a` into this workspace, replacing any previous factorization.
    /// On failure the workspace contents are unspecified but reusable.
    pub fn factor_from(&mut self, a: &CMat<T>) -> Result<(), SingularMatrix> {
        assert_eq!(a.rows, a.cols, "LU requires a square matrix");
        assert_eq!(a.rows, self.perm.len(), "workspace dimension");
        self.lu.copy_from_slice(&a.data);
        lu_factor_in_place(&mut self.lu, &mut self.perm)
    }

    pub fn solve_into(&self, b: &[Cx<T>], x: &mut [Cx<T>]) {
        lu_solve_into(&self.lu, &self.perm, b, x);
    }
}

/// Σ conj(aᵢ)·bᵢ.
pub fn dot_conj<T: Scalar>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

/// In-place factor update for an upper-triangular R with RᴴR = V: afterwards
/// RᴴR = α·V + w·u·uᴴ. One Givens sweep re-triangularizes the stacked row
/// √w·uᴴ, with the √α decay folded into the rotations. Unlike tracking V⁻¹
/// through the inversion lemma, the sweep is unconditionally stable: the
/// factor sees κ(V) only as its square root, so a single huge-weight step
/// (exact-interpolation residuals floored then raised to γ−2 reach 1e14)
/// cannot wipe out the carried state.
///
/// `r` may be square or carry extra columns past the triangle, the usual one
/// being the rotated right-hand side of a least-squares recursion; extra
/// columns ride along in the same rotations. `row` holds the regressor `u`
/// in its first `rows` entries and the right-hand side entries after them;
/// only the regressor part is conjugated internally (the stacked row is
/// [uᴴ | d]). `row` is the elimination workspace and is clobbered. Diagonal
/// entries stay exactly real and nonnegative; entries below the diagonal are
/// never touched. O(n·cols), no allocation.
pub fn chol_rank1<T: Scalar>(r: &mut CMat<T>, row: &mut [Cx<T>], alpha: T, w: T) {
    debug_assert!(r.cols >= r.rows);
    debug_assert_eq!(row.len(), r.cols);
    debug_assert!(alpha >= T::zero() && w >= T::zero());
    let n = r.rows;
    let cols = r.cols;
    let sa = alpha.sqrt();
    let sw = w.sqrt();
    // The appended row is √w·uᴴ, so RᴴR gains w·u·uᴴ and not its transpose.
    for v in row[..n].iter_mut() {
        *v = v.conj().scale(sw);
    }
    for v in row[n..].iter_mut() {
        *v = v.scale(sw);
    }
    for k in 0..n {
        let a = sa * r.data[k * cols + k].re;
        let b = row[k];
        let rho = (a * a + b.norm_sqr()).sqrt();
        if !(rho > T::zero()) {
            // Nothing to eliminate; the row still decays.
            for j in k..cols {
                let idx = k * cols + j;
                r.data[idx] = r.data[idx].scale(sa);
            }
            continue;
        }
        let inv = rho.recip();
        // Per-element work shrinks to two scaled complex multiplies by
        // hoisting the rotation coefficients out of the column loop.
        let f_rr = sa * a * inv;
        let f_ru = b.conj().scale(inv);
        let f_ur = b.scale(sa * inv);
        let f_uu = a * inv;
        for j in k..cols {
            let idx = k * cols + j;
            let rj = r.data[idx];
            let uj = row[j];
            r.data[idx] = rj.scale(f_rr) + f_ru * uj;
            row[j] = uj.scale(f_uu) - f_ur * rj;
        }
        // The rotation maps the pivot pair to (ρ, 0) exactly.
        r.data[k * cols + k] = Cx::new(rho, T::zero());
        row[k] = czero();
    }
}

/// Solves (RᴴR)·x = b for the upper-triangular R in the leading square of
/// `r`: a forward substitution against Rᴴ then a backward one against R, in
/// place in `x`. Errs when a diagonal entry is nonpositive or nonfinite,
/// leaving `x` unspecified. O(n²).
pub fn chol_solve<T: Scalar>(
    r: &CMat<T>,
    b: &[Cx<T>],
    x: &mut [Cx<T>],
) -> Result<(), SingularMatrix> {
    debug_assert!(r.cols >= r.rows);
    let n = r.rows;
    let cols = r.cols;
    debug_assert_eq!(b.len(), n);
    debug_assert_eq!(x.len(), n);
    check_chol_diag(r)?;
    for i in 0..n {
        let mut acc = b[i];
        for j in 0..i {
            acc -= r.data[j * cols + i].conj() * x[j];
        }
        x[i] = acc.scale(r.data[i * cols + i].re.recip());
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= r.data[i * cols + j] * x[j];
        }
        x[i] = acc.scale(r.data[i * cols + i].re.recip());
    }
    Ok(())
}

/// Back-substitution for an augmented factor [R | z]: solves R·x = z, the
/// least-squares solution the rotated right-hand side column encodes. `r`
/// must carry exactly one column past the triangle. Errs like [`chol_solve`].
/// O(n²/2).
pub fn chol_backsub<T: Scalar>(r: &CMat<T>, x: &mut [Cx<T>]) -> Result<(), SingularMatrix> {
    debug_assert_eq!(r.cols, r.rows + 1);
    let n = r.rows;
    let cols = r.cols;
    debug_assert_eq!(x.len(), n);
    check_chol_diag(r)?;
    for i in (0..n).rev() {
        let mut acc = r.data[i * cols + n];
        for j in i + 1..n {
            acc -= r.data[i * cols + j] * x[j];
        }
        x[i] = acc.scale(r.data[i * cols + i].re.recip());
    }
    Ok(())
}

fn check_chol_diag<T: Scalar>(r: &CMat<T>) -> Result<(), SingularMatrix> {
    for i in 0..r.rows {
        let d = r.data[i * r.cols + i].re;
        if !(d > T::zero() && d.is_finite()) {
            return Err(SingularMatrix);
        }
    }
    Ok(())
}

/// wᴴ·V·w, real by hermiticity (imaginary residue discarded).
pub fn herm_quad<T: Scalar>(v: &CMat<T>, w: &[Cx<T>]) -> T {
    let mut acc = czero::<T>();
    for (wr, row) in w.iter().zip(0..v.rows) {
        let vw = v
            .row(row)
            .iter()
            .zip(w.iter())
            .fold(czero(), |a, (x, y)| a + *x * *y);
        acc += wr.conj() * vw;
    }
    acc.re
}
