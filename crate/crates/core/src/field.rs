//! Arithmetic for F_p and F_{p^n} (p odd) with enumeration, quadratic
//! character and square roots.
//!
//! Elements are stored as canonical indices into the coefficient-lexicographic
//! enumeration of the field: index `k` has base-p digits equal to the
//! coefficient vector (constant term first). Log/antilog tables are built at
//! construction when `q <= 2^20` and back the multiplicative fast paths.

use serde::Serialize;
use thiserror::Error;

/// Log tables are only materialized up to this field size.
pub const TABLE_CAP: u64 = 1 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("modulus is reducible over F_p")]
    ReducibleModulus,
    #[error("modulus is not monic of degree n")]
    DegreeMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator divisible by p")]
    ZeroDenominator,
    #[error("operation requires q = 3 (mod 4)")]
    UnsupportedFieldShape,
}

/// A canonical element of F_{p^n}: the index of its coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Elem(pub u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Immutable description of F_{p^n}. Safe to share across threads; every
/// operation is a pure function of `(ctx, inputs)`.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u64,
    n: usize,
    q: u64,
    /// Monic degree-n modulus, constant term first, length n + 1.
    modulus: Vec<u64>,
    /// log[k] = discrete log of element k to the chosen generator (k >= 1).
    log: Option<Vec<u32>>,
    /// exp[e] = index of g^e for e in [0, q-1).
    exp: Option<Vec<u32>>,
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    if m.is_multiple_of(2) {
        return m == 2;
    }
    let mut d = 3;
    while d * d <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

// --- dense polynomial helpers over F_p, little-endian coefficients ---

fn poly_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    poly_rem(&mut prod, m, p);
    prod
}

/// Reduce `a` modulo the monic polynomial `m` in place.
fn poly_rem(a: &mut Vec<u64>, m: &[u64], p: u64) {
    let deg_m = m.len() - 1;
    while a.len() > deg_m {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - deg_m;
        if lead != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = shift + i;
                a[idx] = (a[idx] + p * lead - (lead * mi) % p) % p;
            }
        }
        a.pop();
    }
    poly_trim(a);
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut acc = base.to_vec();
    poly_rem(&mut acc, m, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &acc, m, p);
        }
        acc = poly_mulmod(&acc, &acc, m, p);
        e >>= 1;
    }
    result
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !y.is_empty() {
        // x mod y, with y made monic first
        let inv_lead = mod_inv(*y.last().unwrap(), p);
        let monic: Vec<u64> = y.iter().map(|&c| c * inv_lead % p).collect();
        poly_rem(&mut x, &monic, p);
        std::mem::swap(&mut x, &mut y);
    }
    x
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a nonzero
    mod_pow(a % p, p - 2, p)
}

fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Rabin irreducibility test for a monic degree-n polynomial over F_p.
fn is_irreducible(modulus: &[u64], p: u64, n: usize) -> bool {
    if n == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // x^(p^n) == x (mod f)
    let mut frob = x.clone();
    for _ in 0..n {
        frob = poly_powmod(&frob, p, modulus, p);
    }
    if frob != x {
        return false;
    }
    // gcd(x^(p^(n/r)) - x, f) must be constant for every prime r | n
    for r in prime_factors(n as u64) {
        let k = n / r as usize;
        let mut h = x.clone();
        for _ in 0..k {
            h = poly_powmod(&h, p, modulus, p);
        }
        // h - x
        let mut diff = h;
        if diff.len() < 2 {
            diff.resize(2, 0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        poly_trim(&mut diff);
        if diff.is_empty() {
            return false;
        }
        let g = poly_gcd(&diff, modulus, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}

impl FieldCtx {
    /// Build F_{p^n}. When `modulus` is absent, the lexicographically
    /// smallest monic irreducible is selected (coefficients compared
    /// constant-term-last), so construction is deterministic.
    pub fn new(p: u64, n: usize, modulus: Option<Vec<u64>>) -> Result<FieldCtx, FieldError> {
        if p == 2 || !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if n == 0 {
            return Err(FieldError::DegreeMismatch);
        }
        let q = p
            .checked_pow(n as u32)
            .filter(|&q| q < (1 << 31))
            .ok_or(FieldError::DegreeMismatch)?;

        let modulus = match modulus {
            Some(mut m) => {
                poly_trim(&mut m);
                if m.len() != n + 1 || *m.last().unwrap() % p != 1 {
                    return Err(FieldError::DegreeMismatch);
                }
                let m: Vec<u64> = m.iter().map(|&c| c % p).collect();
                if !is_irreducible(&m, p, n) {
                    return Err(FieldError::ReducibleModulus);
                }
                m
            }
            None => Self::default_modulus(p, n),
        };

        let mut ctx = FieldCtx {
            p,
            n,
            q,
            modulus,
            log: None,
            exp: None,
        };
        if q <= TABLE_CAP {
            ctx.build_tables();
        }
        Ok(ctx)
    }

    /// Smallest monic irreducible of degree n, where candidates are compared
    /// by their coefficient tuple (c_{n-1}, ..., c_1, c_0).
    fn default_modulus(p: u64, n: usize) -> Vec<u64> {
        if n == 1 {
            return vec![0, 1]; // x
        }
        // Walk free-coefficient tuples in ascending (c_{n-1},...,c_0) order:
        // c_{n-1} is the most significant digit of the counter.
        let total = p.pow(n as u32);
        for k in 0..total {
            let mut coeffs = vec![0u64; n + 1];
            coeffs[n] = 1;
            let mut rem = k;
            for i in 0..n {
                let place = p.pow((n - 1 - i) as u32);
                coeffs[n - 1 - i] = rem / place;
                rem %= place;
            }
            if is_irreducible(&coeffs, p, n) {
                return coeffs;
            }
        }
        unreachable!("an irreducible polynomial of every degree exists over F_p")
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        let mut exp = vec![0u32; q - 1];
        let mut log = vec![0u32; q];
        let g = self.find_generator();
        let mut acc = Elem::ONE;
        for (e, slot) in exp.iter_mut().enumerate() {
            *slot = acc.0 as u32;
            log[acc.0 as usize] = e as u32;
            acc = self.mul_generic(acc, g);
        }
        debug_assert_eq!(acc, Elem::ONE);
        self.exp = Some(exp);
        self.log = Some(log);
    }

    fn find_generator(&self) -> Elem {
        let order = self.q - 1;
        let factors = prime_factors(order);
        'cand: for k in 2..self.q {
            let g = Elem(k);
            for &r in &factors {
                if self.pow_generic(g, order / r) == Elem::ONE {
                    continue 'cand;
                }
            }
            return g;
        }
        unreachable!("F_q^* is cyclic")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn has_tables(&self) -> bool {
        self.exp.is_some()
    }

    /// Coefficient vector of `x`, constant term first, length n.
    pub fn coeffs(&self, x: Elem) -> Vec<u64> {
        let mut k = x.0;
        let mut out = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            out.push(k % self.p);
            k /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Elem {
        let mut k = 0u64;
        for &c in coeffs.iter().rev() {
            k = k * self.p + c % self.p;
        }
        Elem(k)
    }

    /// All q elements in coefficient-lexicographic order, starting at 0.
    pub fn enumerate(&self) -> impl Iterator<Item = Elem> {
        (0..self.q).map(Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> {
        (1..self.q).map(Elem)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.n == 1 {
            return Elem((a.0 + b.0) % self.p);
        }
        let (mut ka, mut kb) = (a.0, b.0);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            out += (ka % self.p + kb % self.p) % self.p * place;
            ka /= self.p;
            kb /= self.p;
            place *= self.p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if self.n == 1 {
            return Elem((self.p - a.0) % self.p);
        }
        let mut k = a.0;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            out += (self.p - k % self.p) % self.p * place;
            k /= self.p;
            place *= self.p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        match (&self.log, &self.exp) {
            (Some(log), Some(exp)) => {
                let e = (log[a.0 as usize] as u64 + log[b.0 as usize] as u64) % (self.q - 1);
                Elem(exp[e as usize] as u64)
            }
            _ => self.mul_generic(a, b),
        }
    }

    fn mul_generic(&self, a: Elem, b: Elem) -> Elem {
        let pa = self.coeffs(a);
        let pb = self.coeffs(b);
        let prod = poly_mulmod(&pa, &pb, &self.modulus, self.p);
        self.from_coeffs(&prod)
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        match (&self.log, &self.exp) {
            (Some(log), Some(exp)) => {
                let e = (self.q - 1 - log[a.0 as usize] as u64) % (self.q - 1);
                Ok(Elem(exp[e as usize] as u64))
            }
            _ => Ok(self.pow_generic(a, self.q - 2)),
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// x^e with x^0 = 1 for all x (including 0) and 0^e = 0 for e > 0.
    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        match (&self.log, &self.exp) {
            (Some(log), Some(exp)) => {
                let le = (log[a.0 as usize] as u64 % (self.q - 1)) * (e % (self.q - 1))
                    % (self.q - 1);
                Elem(exp[le as usize] as u64)
            }
            _ => self.pow_generic(a, e),
        }
    }

    fn pow_generic(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_generic(acc, base);
            }
            base = self.mul_generic(base, base);
            e >>= 1;
        }
        acc
    }

    /// The quadratic character: 0 at zero, +1 on squares, -1 on nonsquares.
    pub fn quad_char(&self, x: Elem) -> i64 {
        if x.is_zero() {
            return 0;
        }
        if let Some(log) = &self.log {
            if log[x.0 as usize] % 2 == 0 {
                1
            } else {
                -1
            }
        } else if self.pow_generic(x, (self.q - 1) / 2) == Elem::ONE {
            1
        } else {
            -1
        }
    }

    /// Both square roots of `s`, or `None` when `s` is a nonsquare.
    /// The first component is the principal root `s^((q+1)/4)`.
    pub fn sqrt(&self, s: Elem) -> Result<Option<(Elem, Elem)>, FieldError> {
        if self.q % 4 != 3 {
            return Err(FieldError::UnsupportedFieldShape);
        }
        if s.is_zero() {
            return Ok(Some((Elem::ZERO, Elem::ZERO)));
        }
        if self.quad_char(s) != 1 {
            return Ok(None);
        }
        let r = self.pow(s, (self.q + 1) / 4);
        debug_assert_eq!(self.mul(r, r), s);
        Ok(Some((r, self.neg(r))))
    }

    /// Image of an integer under Z -> F_{p^n}.
    pub fn embed_int(&self, k: i64) -> Elem {
        let p = self.p as i64;
        Elem(k.rem_euclid(p) as u64)
    }

    /// Image of num/den; errors when den = 0 (mod p).
    pub fn embed_ratio(&self, num: i64, den: i64) -> Result<Elem, FieldError> {
        let d = self.embed_int(den);
        if d.is_zero() {
            return Err(FieldError::ZeroDenominator);
        }
        self.div(self.embed_int(num), d)
    }

    /// Modulus as comma-separated base-p digits, constant term first.
    pub fn modulus_string(&self) -> String {
        self.modulus
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_modulus(s: &str) -> Result<Vec<u64>, FieldError> {
        s.split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| FieldError::DegreeMismatch))
            .collect()
    }
}
