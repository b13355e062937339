//! Univariate rational polynomials, Sturm sequences and certified
//! eigenvalue enclosures for symmetric rational matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::QMatrix;
use crate::scalar::{int, Rational};

/// Coefficients from the constant term upwards, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    c: Vec<Rational>,
}

impl Poly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn lead(&self) -> &Rational {
        self.c.last().expect("leading coefficient of zero polynomial")
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.c
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, a| acc * x + a)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::new(vec![]);
        }
        let mut c = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * int(i as i64))
                .collect(),
        )
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::new(vec![]), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        let lead = d.lead();
        for k in (0..q.len()).rev() {
            let f = &r[k + dd] / lead;
            if f.is_zero() {
                continue;
            }
            for (i, a) in d.c.iter().enumerate() {
                r[k + i] -= &f * a;
            }
            q[k] = f;
        }
        (Poly::new(q), Poly::new(r))
    }

    fn monic(&self) -> Poly {
        let l = self.lead().clone();
        Poly::new(self.c.iter().map(|a| a / &l).collect())
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Yun's algorithm: `self = lead · Π fᵢ^i` with squarefree, coprime `fᵢ`.
    pub fn squarefree_factors(&self) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative();
        let g = self.gcd(&d);
        let mut b = self.div_rem(&g).0;
        let mut c = d.div_rem(&g).0;
        let mut i = 1;
        loop {
            let db = c.sub(&b.derivative());
            if db.is_zero() {
                if b.degree().unwrap_or(0) > 0 {
                    out.push((b.monic(), i));
                }
                break;
            }
            let a = b.gcd(&db);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            c = db.div_rem(&a).0;
            i += 1;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
        }
        out
    }

    fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).cloned().unwrap_or_default() - o.c.get(i).cloned().unwrap_or_default()
                })
                .collect(),
        )
    }

    pub fn squarefree_part(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        if g.is_zero() {
            return self.clone();
        }
        self.div_rem(&g).0.monic()
    }

    /// Divides out the linear factor `(x - r)`, which must be a factor.
    fn deflate(&self, r: &Rational) -> Poly {
        let (q, rem) = self.div_rem(&Poly::new(vec![-r.clone(), Rational::one()]));
        debug_assert!(rem.is_zero());
        q
    }
}

/// `det(xI - A)` via the Faddeev–LeVerrier recurrence.
pub fn charpoly(a: &QMatrix) -> Poly {
    assert!(a.is_square(), "characteristic polynomial of non-square matrix");
    let n = a.rows();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut m = QMatrix::zeros(n, n);
    let id = QMatrix::identity(n);
    for k in 1..=n {
        m = a.mul(&m).add(&id.scale(&c[n - k + 1]));
        c[n - k] = -a.mul(&m).trace() / int(k as i64);
    }
    Poly::new(c)
}

fn sign(x: &Rational) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Sturm chain of a squarefree polynomial.
pub struct Sturm {
    seq: Vec<Poly>,
}

impl Sturm {
    pub fn new(p: &Poly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            seq.push(Poly::new(r.c.into_iter().map(|a| -a).collect()));
        }
        seq.pop();
        Sturm { seq }
    }

    fn var_at(&self, x: &Rational) -> usize {
        variations(self.seq.iter().map(|p| sign(&p.eval(x))))
    }

    fn var_at_infinity(&self) -> usize {
        variations(self.seq.iter().map(|p| sign(p.lead())))
    }

    /// Distinct roots in `(a, ∞)`; `a` must not be a root.
    fn count_above(&self, a: &Rational) -> usize {
        self.var_at(a) - self.var_at_infinity()
    }

    /// Distinct roots in `(a, b]`; `a`, `b` must not be roots.
    fn count_between(&self, a: &Rational, b: &Rational) -> usize {
        self.var_at(a) - self.var_at(b)
    }
}

/// Number of distinct real roots of `p` strictly greater than `x`.
pub fn roots_above(p: &Poly, x: &Rational) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let mut q = p.squarefree_part();
    if q.eval(x).is_zero() {
        q = q.deflate(x);
        if q.degree().unwrap_or(0) == 0 {
            return 0;
        }
    }
    Sturm::new(&q).count_above(x)
}

/// Rational roots, ascending and without repeats.
pub fn rational_roots(p: &Poly) -> Vec<Rational> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    isolate(&p.squarefree_part(), 8)
        .into_iter()
        .filter_map(|r| match r {
            RootEnclosure::Exact(x) => Some(x),
            RootEnclosure::Between(..) => None,
        })
        .collect()
}

/// A real number known either exactly or inside an open rational interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootEnclosure {
    Exact(Rational),
    Between(Rational, Rational),
}

impl RootEnclosure {
    pub fn bounds(&self) -> (Rational, Rational) {
        match self {
            RootEnclosure::Exact(r) => (r.clone(), r.clone()),
            RootEnclosure::Between(a, b) => (a.clone(), b.clone()),
        }
    }
}

fn narrow_enough(lo: &Rational, hi: &Rational, bits: u32) -> bool {
    let width = hi - lo;
    let scale = lo.abs().max(hi.abs());
    let unit = Rational::new(BigInt::one(), BigInt::one() << bits);
    if scale.is_zero() {
        return true;
    }
    width <= scale * &unit || width <= unit.clone() * &unit
}

/// Cauchy bound: every real root lies in `[-B, B]`.
fn root_bound(p: &Poly) -> Rational {
    let l = p.lead().abs();
    Rational::one() + p.c.iter().map(|a| a.abs() / &l).max().unwrap()
}

/// `1/L²`, where `L` is the leading coefficient of the primitive integer
/// multiple of `q`: every rational root has a denominator dividing `L`, and
/// two distinct such fractions are at least `1/L²` apart.
fn rational_root_gap(q: &Poly) -> Rational {
    let lcm = q.c.iter().fold(BigInt::one(), |l, a| l.lcm(a.denom()));
    let z: Vec<BigInt> = q.c.iter().map(|a| (a * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let g = z.iter().fold(BigInt::zero(), |g, a| g.gcd(a));
    let l = (z.last().unwrap() / g).abs();
    Rational::new(BigInt::one(), &l * &l)
}

/// The fraction with the smallest denominator in `[a, b]`.
fn simplest_between(a: &Rational, b: &Rational) -> Rational {
    let c = a.ceil();
    if &c <= b {
        return c;
    }
    let f = a.floor();
    &f + simplest_between(&(b - &f).recip(), &(a - &f).recip()).recip()
}

/// Refines the single root of the squarefree `q` in the open interval
/// `(a, b)`. Once the interval is shorter than `gap`, only one fraction
/// can be a rational root, and it is tested exactly.
fn pin(q: &Poly, sturm: &Sturm, mut a: Rational, mut b: Rational, bits: u32, gap: &Rational) -> RootEnclosure {
    let mut tested = false;
    loop {
        if !tested && &(&b - &a) < gap {
            tested = true;
            let s = simplest_between(&a, &b);
            if q.eval(&s).is_zero() {
                return RootEnclosure::Exact(s);
            }
        }
        if tested && narrow_enough(&a, &b, bits) {
            return RootEnclosure::Between(a, b);
        }
        let mid = (&a + &b) / int(2);
        if q.eval(&mid).is_zero() {
            return RootEnclosure::Exact(mid);
        }
        if sturm.count_between(&a, &mid) == 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
}

/// Isolates and refines all real roots of the squarefree `q`; rational
/// roots come out exact.
fn isolate(q: &Poly, bits: u32) -> Vec<RootEnclosure> {
    let mut out: Vec<RootEnclosure> = Vec::new();
    let mut q = q.clone();
    'restart: while q.degree().unwrap_or(0) > 0 {
        if q.degree() == Some(1) {
            out.push(RootEnclosure::Exact(-&q.c[0] / &q.c[1]));
            break;
        }
        let sturm = Sturm::new(&q);
        let b = root_bound(&q);
        let mut stack = vec![(-b.clone(), b)];
        let mut isolated = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let n = sturm.count_between(&a, &b);
            if n == 0 {
                continue;
            }
            if n == 1 {
                isolated.push((a, b));
                continue;
            }
            let mid = (&a + &b) / int(2);
            if q.eval(&mid).is_zero() {
                // interval endpoints must not be roots: split it off
                q = q.deflate(&mid);
                out.push(RootEnclosure::Exact(mid));
                continue 'restart;
            }
            stack.push((a, mid.clone()));
            stack.push((mid, b));
        }
        let gap = rational_root_gap(&q);
        out.extend(isolated.into_iter().map(|(a, b)| pin(&q, &sturm, a, b, bits, &gap)));
        break;
    }
    out.sort_by(|x, y| x.bounds().0.cmp(&y.bounds().0));
    out
}

/// All real roots of `p` with multiplicities, in increasing order.
pub fn real_roots(p: &Poly, bits: u32) -> Vec<(RootEnclosure, usize)> {
    let mut out = Vec::new();
    for (f, m) in p.squarefree_factors() {
        out.extend(isolate(&f, bits).into_iter().map(|r| (r, m)));
    }
    out.sort_by(|x, y| x.0.bounds().0.cmp(&y.0.bounds().0));
    out
}

/// Certified enclosure of the largest eigenvalue of a symmetric matrix.
pub fn largest_eigenvalue(g: &QMatrix, bits: u32) -> RootEnclosure {
    assert!(g.is_symmetric(), "largest_eigenvalue needs a symmetric matrix");
    let mut q = charpoly(g).squarefree_part();
    // Gershgorin: every eigenvalue lies in [-B, B]
    let bound = g.max_row_abs_sum();
    if q.eval(&bound).is_zero() {
        return RootEnclosure::Exact(bound);
    }
    let mut sturm = Sturm::new(&q);
    let mut lo = -&bound - Rational::one();
    let mut hi = bound;
    // shrink until (lo, hi) holds the largest root only
    while sturm.count_above(&lo) > 1 {
        let mid = (&lo + &hi) / int(2);
        if q.eval(&mid).is_zero() {
            q = q.deflate(&mid);
            sturm = Sturm::new(&q);
            if sturm.count_above(&mid) == 0 {
                return RootEnclosure::Exact(mid);
            }
            lo = mid;
        } else if sturm.count_above(&mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    pin(&q, &sturm, lo, hi, bits, &rational_root_gap(&q))
}

/// Whether every eigenvalue of the symmetric `g` is at most `x`, decided by
/// Sturm counting on the characteristic polynomial.
pub fn eigenvalues_at_most(g: &QMatrix, x: &Rational) -> bool {
    roots_above(&charpoly(g), x) == 0
}
