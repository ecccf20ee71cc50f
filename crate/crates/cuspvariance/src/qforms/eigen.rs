use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::fixed::Fixed;
use super::qseries::{bits, charpoly, cusp_dimension, hecke_matrix, miller_basis, QSeries};
use crate::error::{Error, Result};

/// Binary precision at which eigenvalues are stored (≈ 57 decimal digits).
pub const LAMBDA_BITS: u32 = 192;

/// A normalized Hecke eigenform `f = Σ λ_f(n) n^{(k−1)/2} q^n` with `λ_f(1) = 1`.
#[derive(Clone, Debug)]
pub struct HeckeEigenform {
    weight: u32,
    index: usize,
    // Slot 0 is unused so that `lambda[n]` is λ_f(n).
    lambda: Vec<Fixed>,
    lambda_f64: Vec<f64>,
    exact: Option<Vec<BigRational>>,
}

impl HeckeEigenform {
    /// Assembles a form from stored eigenvalues `λ(1..=n_max)` (e.g. read back from a cache).
    pub fn from_parts(
        weight: u32,
        index: usize,
        lambda: Vec<Fixed>,
        exact: Option<Vec<BigRational>>,
    ) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidArgument("empty eigenvalue table".into()));
        }
        let mut lam = Vec::with_capacity(lambda.len() + 1);
        lam.push(Fixed::zero(LAMBDA_BITS));
        lam.extend(lambda.into_iter().map(|l| l.with_prec(LAMBDA_BITS)));
        if lam[1] != Fixed::from_i64(1, LAMBDA_BITS) {
            return Err(Error::InvalidArgument("λ(1) must equal 1".into()));
        }
        let exact = exact.map(|e| {
            let mut v = Vec::with_capacity(e.len() + 1);
            v.push(BigRational::zero());
            v.extend(e);
            v
        });
        let lambda_f64 = lam.iter().map(|x| x.to_f64()).collect();
        Ok(HeckeEigenform { weight, index, lambda: lam, lambda_f64, exact })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n_max(&self) -> usize {
        self.lambda.len() - 1
    }

    /// High-precision `λ_f(n)` for `1 ≤ n ≤ n_max`.
    pub fn lambda(&self, n: usize) -> Option<&Fixed> {
        if n == 0 {
            None
        } else {
            self.lambda.get(n)
        }
    }

    /// `λ_f(n)` rounded to `f64`; panics outside the table.
    pub fn lambda_f64(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.n_max(), "λ({n}) outside table 1..={}", self.n_max());
        self.lambda_f64[n]
    }

    /// `λ_f(0..=n_max)` as `f64` with a 0 in slot 0.
    pub fn lambdas_f64(&self) -> &[f64] {
        &self.lambda_f64
    }

    /// Exact Fourier coefficient `a_f(n) = λ_f(n) n^{(k−1)/2}` when the form is rational.
    pub fn exact_coefficient(&self, n: usize) -> Option<&BigRational> {
        self.exact.as_ref().and_then(|e| if n == 0 { None } else { e.get(n) })
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `λ_f(n)` from multiplicativity and `λ(p)λ(p^j) = λ(p^{j+1}) + λ(p^{j−1})`.
    pub fn lambda_extend(&self, n: u64) -> Result<Fixed> {
        if n == 0 {
            return Err(Error::InvalidArgument("λ(0) is undefined".into()));
        }
        let one = Fixed::from_i64(1, LAMBDA_BITS);
        let mut acc = one.clone();
        for (p, e) in factorize(n) {
            let pe = p.pow(e);
            let val = if (pe as usize) <= self.n_max() {
                self.lambda[pe as usize].clone()
            } else {
                if (p as usize) > self.n_max() {
                    return Err(Error::InsufficientCoefficients {
                        k: self.weight,
                        have: self.n_max(),
                        need: p as usize,
                    });
                }
                let lp = &self.lambda[p as usize];
                let (mut prev, mut cur) = (one.clone(), lp.clone());
                for _ in 1..e {
                    let next = lp.mul(&cur).sub(&prev);
                    prev = cur;
                    cur = next;
                }
                cur
            };
            acc = acc.mul(&val);
        }
        Ok(acc)
    }

    /// `f64` version of [`lambda_extend`](Self::lambda_extend).
    pub fn lambda_extend_f64(&self, n: u64) -> Result<f64> {
        if (n as usize) <= self.n_max() && n >= 1 {
            return Ok(self.lambda_f64[n as usize]);
        }
        self.lambda_extend(n).map(|x| x.to_f64())
    }
}

/// `H_k` sorted by `λ_f(2)` ascending.
#[derive(Clone, Debug)]
pub struct HeckeBasis {
    pub weight: u32,
    pub forms: Vec<HeckeEigenform>,
}

impl HeckeBasis {
    pub fn dim(&self) -> usize {
        self.forms.len()
    }

    /// Smallest table length over the forms.
    pub fn n_max(&self) -> usize {
        self.forms.iter().map(|f| f.n_max()).min().unwrap_or(0)
    }
}

/// Prime factorization by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Builds `H_k` with eigenvalues for `n ≤ n_max`.
pub fn hecke_eigenforms(k: u32, n_max: usize) -> Result<HeckeBasis> {
    if k % 2 == 1 || k < 12 {
        return Err(Error::InvalidArgument(format!("weight must be even and ≥ 12, got {k}")));
    }
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max must be ≥ 2, got {n_max}")));
    }
    let d = cusp_dimension(k);
    if d == 0 {
        return Ok(HeckeBasis { weight: k, forms: Vec::new() });
    }
    let prec = n_max.max(2 * d);
    let basis = miller_basis(k, prec)?;
    let g: Vec<Vec<BigInt>> = basis.iter().map(|s| s.to_integers()).collect::<Result<_>>()?;

    if d == 1 {
        let exact: Vec<BigRational> =
            (1..=n_max).map(|n| BigRational::from_integer(g[0][n].clone())).collect();
        let coeffs: Vec<Fixed> = (1..=n_max)
            .map(|n| Fixed::from_int(&g[0][n], LAMBDA_BITS + 64))
            .collect();
        let lambda = normalize(k, &coeffs, LAMBDA_BITS + 64);
        let form = HeckeEigenform::from_parts(k, 0, lambda, Some(exact))?;
        return Ok(HeckeBasis { weight: k, forms: vec![form] });
    }

    let t2 = integer_matrix(&hecke_matrix(k, &basis, 2)?);
    let cp = charpoly(&t2);
    let gbits = g.iter().flat_map(|row| row[1..=n_max].iter().map(bits)).max().unwrap_or(0);
    let mbits = t2.iter().flatten().map(bits).max().unwrap_or(0);
    let mut p = (512 + gbits.max(mbits) + 8 * d as u64) as u32;
    for _attempt in 0..4 {
        match solve_at_precision(k, &t2, &cp, &g, n_max, p) {
            Ok(forms) => return Ok(HeckeBasis { weight: k, forms }),
            Err(Error::NoConvergence(_)) | Err(Error::RootIsolation { .. }) => p *= 2,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RepeatedEigenvalue { k })
}

fn integer_matrix(m: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    assert!(x.is_integer(), "Hecke matrix on an integral basis is integral");
                    x.to_integer()
                })
                .collect()
        })
        .collect()
}

/// `λ(n) = a(n)/n^{(k−1)/2}` for `n = 1..=len`, rounded to [`LAMBDA_BITS`].
fn normalize(k: u32, coeffs: &[Fixed], p: u32) -> Vec<Fixed> {
    let s = (k - 2) / 2;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let n = BigInt::from(i + 1);
            let root = Fixed::from_int(&n, p).sqrt();
            a.with_prec(p).div_int(&n.pow(s)).div(&root).with_prec(LAMBDA_BITS)
        })
        .collect()
}

fn solve_at_precision(
    k: u32,
    t2: &[Vec<BigInt>],
    cp: &[BigInt],
    g: &[Vec<BigInt>],
    n_max: usize,
    p: u32,
) -> Result<Vec<HeckeEigenform>> {
    let d = t2.len();
    // Eigenvalues of T_2 are x = 2^s y with |y| ≤ 2√2; work with the y-polynomial.
    let s = (k - 2) / 2;
    let qy: Vec<BigInt> = cp.iter().enumerate().map(|(j, c)| c << (s as usize * j)).collect();
    let roots = real_roots(k, &qy, p)?;
    if roots.len() != d {
        return Err(Error::RootIsolation { k, detail: format!("found {} of {d} roots", roots.len()) });
    }
    certify_isolation(k, &qy, &roots)?;

    let mut forms = Vec::with_capacity(d);
    for (idx, y) in roots.iter().enumerate() {
        let x = y.shl(s);
        let c = null_vector(t2, &x, p)?;
        let coeffs: Vec<Fixed> = (1..=n_max)
            .map(|n| {
                let mut acc = Fixed::zero(p);
                for (ci, gi) in c.iter().zip(g) {
                    acc = acc.add(&ci.mul_int(&gi[n]));
                }
                acc
            })
            .collect();
        let lambda = normalize(k, &coeffs, p);
        let form = HeckeEigenform::from_parts(k, idx, lambda, None)?;
        self_check(&form)?;
        forms.push(form);
    }
    Ok(forms)
}

/// Horner evaluation of `q` and `q'` at a fixed-point `y`.
fn eval_with_derivative(q: &[BigInt], y: &Fixed) -> (Fixed, Fixed) {
    let p = y.prec();
    let d = q.len() - 1;
    let mut v = Fixed::from_int(&q[d], p);
    let mut dv = Fixed::zero(p);
    for j in (0..d).rev() {
        dv = dv.mul(y).add(&v);
        v = v.mul(y).add(&Fixed::from_int(&q[j], p));
    }
    (v, dv)
}

/// All real roots of a real-rooted polynomial by Newton–Maehly (implicit
/// deflation), each search started to the right of the remaining roots.
/// Returned ascending.
fn real_roots(k: u32, q: &[BigInt], p: u32) -> Result<Vec<Fixed>> {
    let d = q.len() - 1;
    let lead = Fixed::from_int(&q[d], p);
    // Cauchy bound 1 + max |q_j / q_d|.
    let mut bound = Fixed::zero(p);
    for c in &q[..d] {
        let r = Fixed::from_int(c, p).abs().div(&lead.abs());
        if r.cmp_value(&bound) == Ordering::Greater {
            bound = r;
        }
    }
    let mut start = bound.add(&Fixed::from_i64(2, p));
    let stop = Fixed::from_raw(BigInt::one() << 48u32, p);
    let mut roots: Vec<Fixed> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut y = start.clone();
        let mut converged = false;
        for _iter in 0..20_000 {
            let (v, dv) = eval_with_derivative(q, &y);
            if v.is_zero() {
                converged = true;
                break;
            }
            let mut corr = Fixed::zero(p);
            for r in &roots {
                corr = corr.add(&Fixed::from_i64(1, p).div(&y.sub(r)));
            }
            let denom = dv.sub(&v.mul(&corr));
            if denom.is_zero() {
                return Err(Error::NoConvergence(format!("weight {k}: flat Newton step")));
            }
            let step = v.div(&denom);
            y = y.sub(&step);
            if step.abs().cmp_value(&stop) != Ordering::Greater {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence(format!("weight {k}: Newton iteration cap")));
        }
        // Next search starts 2^{-p/5} below this root, close enough to stay
        // right of the remaining roots, far enough for a well-conditioned first step.
        start = y.sub(&Fixed::from_raw(BigInt::one() << (p - p / 5), p));
        roots.push(y);
    }
    roots.reverse();
    Ok(roots)
}

/// Exact sign of `q(m/2^p)`.
fn exact_sign(q: &[BigInt], m: &BigInt, p: u32) -> i32 {
    let d = q.len() - 1;
    let mut acc = q[d].clone();
    for j in (0..d).rev() {
        acc = acc * m + (&q[j] << (p as usize * (d - j)));
    }
    if acc.is_zero() {
        0
    } else if acc.is_positive() {
        1
    } else {
        -1
    }
}

/// Proves each approximate root sits in its own sign-changing bracket, so all
/// `d` roots are real, simple and separated.
fn certify_isolation(k: u32, q: &[BigInt], roots: &[Fixed]) -> Result<()> {
    let p = roots[0].prec();
    let delta = BigInt::one() << (p / 2);
    let mut prev_hi: Option<BigInt> = None;
    for r in roots {
        let lo = r.raw() - &delta;
        let hi = r.raw() + &delta;
        if let Some(ph) = &prev_hi {
            if &lo <= ph {
                return Err(Error::RootIsolation { k, detail: "overlapping brackets".into() });
            }
        }
        let (sl, sh) = (exact_sign(q, &lo, p), exact_sign(q, &hi, p));
        if sl * sh >= 0 {
            return Err(Error::RootIsolation { k, detail: "no sign change in bracket".into() });
        }
        prev_hi = Some(hi);
    }
    Ok(())
}

/// Null vector of `Mᵀ − xI` with first component 1, via full-pivot elimination.
fn null_vector(m: &[Vec<BigInt>], x: &Fixed, p: u32) -> Result<Vec<Fixed>> {
    let d = m.len();
    let mut a: Vec<Vec<Fixed>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let v = Fixed::from_int(&m[j][i], p);
                    if i == j {
                        v.sub(x)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut col: Vec<usize> = (0..d).collect();
    for step in 0..d - 1 {
        let (mut bi, mut bj) = (step, step);
        let mut best = Fixed::zero(p);
        for (i, row) in a.iter().enumerate().skip(step) {
            for (j, v) in row.iter().enumerate().skip(step) {
                let av = v.abs();
                if av.cmp_value(&best) == Ordering::Greater {
                    best = av;
                    bi = i;
                    bj = j;
                }
            }
        }
        if best.is_zero() {
            return Err(Error::RepeatedEigenvalue { k: 0 });
        }
        a.swap(step, bi);
        for row in a.iter_mut() {
            row.swap(step, bj);
        }
        col.swap(step, bj);
        let piv = a[step][step].clone();
        for i in step + 1..d {
            if a[i][step].is_zero() {
                continue;
            }
            let f = a[i][step].div(&piv);
            for j in step..d {
                let t = f.mul(&a[step][j]);
                a[i][j] = a[i][j].sub(&t);
            }
        }
    }
    // Free variable is the last permuted column.
    let mut z = vec![Fixed::zero(p); d];
    z[d - 1] = Fixed::from_i64(1, p);
    for i in (0..d - 1).rev() {
        let mut s = Fixed::zero(p);
        for j in i + 1..d {
            s = s.add(&a[i][j].mul(&z[j]));
        }
        z[i] = s.neg().div(&a[i][i]);
    }
    let mut c = vec![Fixed::zero(p); d];
    for (pos, &orig) in col.iter().enumerate() {
        c[orig] = z[pos].clone();
    }
    if c[0].is_zero() {
        return Err(Error::NoConvergence("eigenvector with vanishing first coefficient".into()));
    }
    let c0 = c[0].clone();
    Ok(c.iter().map(|v| v.div(&c0)).collect())
}

/// Internal consistency: a few Hecke relations to 2^{-150}.
fn self_check(f: &HeckeEigenform) -> Result<()> {
    let n_max = f.n_max();
    let tol = Fixed::from_raw(BigInt::one() << (LAMBDA_BITS - 150), LAMBDA_BITS);
    for m in 2..=12usize {
        for n in m..=12usize {
            if m * n > n_max {
                continue;
            }
            let lhs = f.lambda[m].mul(&f.lambda[n]);
            let rhs = hecke_rhs(&f.lambda, m, n);
            let scale = lhs.abs().add(&Fixed::from_i64(1, LAMBDA_BITS));
            if lhs.sub(&rhs).abs().cmp_value(&tol.mul(&scale)) == Ordering::Greater {
                return Err(Error::NoConvergence(format!(
                    "weight {}: Hecke relation ({m},{n}) off at working precision",
                    f.weight
                )));
            }
        }
    }
    Ok(())
}

/// `Σ_{d | (m,n)} λ(mn/d²)` from a table indexed by n.
pub(crate) fn hecke_rhs(lambda: &[Fixed], m: usize, n: usize) -> Fixed {
    let g = num_integer::gcd(m, n);
    let mut acc = Fixed::zero(lambda[1].prec());
    for e in 1..=g {
        if g % e == 0 {
            acc = acc.add(&lambda[m * n / (e * e)]);
        }
    }
    acc
}

/// Hecke relation residual `λ(m)λ(n) − Σ λ(mn/d²)` as `f64`.
pub fn hecke_residual(f: &HeckeEigenform, m: usize, n: usize) -> Option<f64> {
    if m * n > f.n_max() {
        return None;
    }
    let lhs = f.lambda[m].mul(&f.lambda[n]);
    Some(lhs.sub(&hecke_rhs(&f.lambda, m, n)).to_f64())
}

/// Exact Hecke residual on the scaled coefficients of a rational form:
/// `a(m)a(n) − Σ_{d|(m,n)} d^{k−1} a(mn/d²)`.
pub fn exact_hecke_residual(f: &HeckeEigenform, m: usize, n: usize) -> Option<BigRational> {
    let a = f.exact.as_ref()?;
    if m * n > f.n_max() {
        return None;
    }
    let g = num_integer::gcd(m, n);
    let mut rhs = BigRational::zero();
    for e in 1..=g {
        if g % e == 0 {
            let w = BigRational::from_integer(BigInt::from(e).pow(f.weight - 1));
            rhs += w * &a[m * n / (e * e)];
        }
    }
    Some(&a[m] * &a[n] - rhs)
}

/// Approximate size of the largest Miller-basis coefficient needed, in bits.
pub fn basis_coefficient_bits(basis: &[QSeries], upto: usize) -> u64 {
    basis
        .iter()
        .flat_map(|s| s.coeffs()[..=upto.min(s.precision())].iter())
        .map(|c| c.numer().abs().bits())
        .max()
        .unwrap_or(0)
}

impl HeckeEigenform {
    /// `λ_f(2)` as `f64`, the sort key of `H_k`.
    pub fn lambda2(&self) -> f64 {
        self.lambda_f64[2]
    }

    /// `|λ_f(p)|` for primes `p ≤ n_max`, as `f64`.
    pub fn prime_eigenvalues(&self) -> Vec<(usize, f64)> {
        (2..=self.n_max())
            .filter(|&n| factorize(n as u64).len() == 1 && factorize(n as u64)[0].1 == 1)
            .map(|p| (p, self.lambda_f64[p]))
            .collect()
    }
}
