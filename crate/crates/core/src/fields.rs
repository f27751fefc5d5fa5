//! Abelian number fields as fixed fields inside cyclotomic fields, and
//! quadratic-field arithmetic: discriminants, local splitting, class
//! numbers and Pell equations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::RwLock;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, Zero};

use crate::arith::{euler_phi, factor_u64, gcd_u64, mul_mod};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    Rational,
    /// Quadratic field of the given fundamental discriminant.
    Quadratic(i64),
    Cyclotomic(u64),
    /// Fixed field of an arbitrary subgroup.
    General,
}

/// The fixed field of `H ⊆ (Z/n)^×` inside `Q(ζ_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianFieldSpec {
    modulus: u64,
    subgroup: Vec<u64>,
    kind: FieldKind,
}

fn units_mod(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&a| gcd_u64(a, n) == 1).collect()
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let squarefree = |m: i64| factor_u64(m.unsigned_abs()).iter().all(|&(_, e)| e == 1);
    match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m)
        }
        _ => false,
    }
}

/// Kronecker symbol `(d / n)` for `n ≥ 1`.
pub fn kronecker(d: i64, n: u64) -> i32 {
    let mut n = n;
    let mut result = 1i32;
    let v = n.trailing_zeros();
    n >>= v;
    if v > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            result = -result;
        }
    }
    // Jacobi symbol (d / n) for odd n
    let mut a = d.rem_euclid(n as i64) as u64;
    let mut m = n;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if matches!(m % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            result = -result;
        }
        a %= m;
    }
    if m == 1 {
        result
    } else {
        0
    }
}

impl AbelianFieldSpec {
    pub fn new(modulus: u64, subgroup: impl IntoIterator<Item = u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidSubgroup("modulus must be positive".into()));
        }
        let set: BTreeSet<u64> = subgroup.into_iter().map(|h| h % modulus).collect();
        if set.is_empty() || !set.contains(&(1 % modulus)) {
            return Err(Error::InvalidSubgroup("subgroup must contain 1".into()));
        }
        if let Some(&h) = set.iter().find(|&&h| gcd_u64(h, modulus) != 1) {
            return Err(Error::InvalidSubgroup(format!("{h} is not a unit mod {modulus}")));
        }
        for &a in &set {
            for &b in &set {
                if !set.contains(&mul_mod(a, b, modulus)) {
                    return Err(Error::InvalidSubgroup(format!("not closed: {a}*{b} mod {modulus}")));
                }
            }
        }
        let kind = if set.len() as u64 == euler_phi(modulus) { FieldKind::Rational } else { FieldKind::General };
        Ok(AbelianFieldSpec { modulus, subgroup: set.into_iter().collect(), kind })
    }

    pub fn rational() -> Self {
        AbelianFieldSpec { modulus: 1, subgroup: vec![0], kind: FieldKind::Rational }
    }

    pub fn quadratic(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::NotFundamental(d));
        }
        let n = d.unsigned_abs();
        let subgroup = units_mod(n).into_iter().filter(|&a| kronecker(d, a) == 1);
        let mut f = Self::new(n, subgroup)?;
        f.kind = FieldKind::Quadratic(d);
        Ok(f)
    }

    pub fn cyclotomic(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSubgroup("modulus must be positive".into()));
        }
        let mut f = Self::new(n, [1 % n])?;
        f.kind = if f.degree() == 1 { FieldKind::Rational } else { FieldKind::Cyclotomic(n) };
        Ok(f)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn subgroup(&self) -> &[u64] {
        &self.subgroup
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn degree(&self) -> u64 {
        euler_phi(self.modulus) / self.subgroup.len() as u64
    }

    pub fn is_rational(&self) -> bool {
        self.degree() == 1
    }

    /// Stable textual key, `n:h1,h2,...`.
    pub fn key(&self) -> String {
        let hs: Vec<String> = self.subgroup.iter().map(u64::to_string).collect();
        format!("{}:{}", self.modulus, hs.join(","))
    }

    /// Fixed field of the preimage of every factor's subgroup at the common modulus.
    pub fn compositum(fields: &[AbelianFieldSpec]) -> Result<Self> {
        let nontrivial: Vec<&AbelianFieldSpec> = fields.iter().filter(|f| !f.is_rational()).collect();
        match nontrivial.as_slice() {
            [] => return Ok(Self::rational()),
            [only] => return Ok((*only).clone()),
            _ => {}
        }
        if nontrivial.iter().all(|f| f.subgroup == nontrivial[0].subgroup && f.modulus == nontrivial[0].modulus) {
            return Ok(nontrivial[0].clone());
        }
        let big = nontrivial.iter().fold(1u64, |acc, f| acc.lcm(&f.modulus));
        let members = units_mod(big)
            .into_iter()
            .filter(|&x| nontrivial.iter().all(|f| f.subgroup.binary_search(&(x % f.modulus)).is_ok()));
        let mut out = Self::new(big, members)?;
        if out.subgroup.len() == 1 {
            out.kind = FieldKind::Cyclotomic(big);
        }
        Ok(out)
    }
}

impl fmt::Display for AbelianFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FieldKind::Rational => write!(f, "rational"),
            FieldKind::Quadratic(d) => write!(f, "quadratic {d}"),
            FieldKind::Cyclotomic(n) => write!(f, "cyclotomic {n}"),
            FieldKind::General => {
                let hs: Vec<String> = self.subgroup.iter().map(u64::to_string).collect();
                write!(f, "abelian {} {}", self.modulus, hs.join(","))
            }
        }
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n.sqrt()).filter(|d| n.is_multiple_of(*d)).flat_map(|d| [d, n / d]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn moebius(n: u64) -> i64 {
    let f = factor_u64(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Number of characters of `(Z/n)^× / H` whose conductor divides `f`.
fn characters_through(field: &AbelianFieldSpec, f: u64) -> u64 {
    let n = field.modulus;
    let h_mod_f: BTreeSet<u64> = field.subgroup.iter().map(|h| h % f).collect();
    let units = units_mod(n);
    let covered = units.iter().filter(|&&x| h_mod_f.contains(&(x % f))).count() as u64;
    units.len() as u64 / covered
}

/// Conductors of the character group, as `(conductor, multiplicity)`.
pub fn character_conductors(field: &AbelianFieldSpec) -> Vec<(u64, u64)> {
    let divs = divisors(field.modulus);
    let through: BTreeMap<u64, u64> = divs.iter().map(|&f| (f, characters_through(field, f))).collect();
    divs.iter()
        .filter_map(|&f| {
            let exact: i64 = divisors(f)
                .iter()
                .map(|&g| moebius(f / g) * through[&g] as i64)
                .sum();
            (exact > 0).then_some((f, exact as u64))
        })
        .collect()
}

/// `|disc F|`, the product of the conductors of the characters of `F`.
pub fn abelian_field_discriminant(field: &AbelianFieldSpec) -> BigUint {
    character_conductors(field)
        .into_iter()
        .fold(BigUint::one(), |acc, (f, mult)| acc * num_traits::pow(BigUint::from(f), mult as usize))
}

type Poly = Vec<BigInt>;

fn poly_trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// Exact division by a monic polynomial.
fn poly_div_monic(num: &Poly, den: &Poly) -> Poly {
    let mut rem = num.clone();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return vec![BigInt::zero()];
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    poly_trim(quot)
}

/// The n-th cyclotomic polynomial, low coefficients first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    let mut p: Poly = vec![BigInt::zero(); n as usize + 1];
    p[0] = -BigInt::one();
    p[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d < n {
            p = poly_div_monic(&p, &cyclotomic_polynomial(d));
        }
    }
    p
}

fn sylvester_resultant(f: &Poly, g: &Poly) -> BigInt {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let mut rows = vec![vec![BigInt::zero(); size]; size];
    for i in 0..n {
        for (j, c) in f.iter().rev().enumerate() {
            rows[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in g.iter().rev().enumerate() {
            rows[n + i][i + j] = c.clone();
        }
    }
    crate::exactalg::bareiss_det(rows)
}

/// `|disc Φ_n|` from the resultant of `Φ_n` and its derivative.
///
/// Independent of the conductor route; used to cross-check discriminants of
/// cyclotomic fields.
pub fn cyclotomic_poly_disc_oracle(n: u64) -> BigInt {
    let f = cyclotomic_polynomial(n);
    if f.len() <= 2 {
        return BigInt::one();
    }
    let df: Poly = f.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    sylvester_resultant(&f, &df).abs()
}

/// Class number of an imaginary quadratic discriminant, by counting reduced forms.
pub fn quadratic_class_number(d: i64) -> Result<u64> {
    if d >= 0 || !is_fundamental_discriminant(d) {
        return Err(Error::NotFundamental(d));
    }
    Ok(reduced_forms(d).len() as u64)
}

/// Reduced primitive forms `(a, b, c)`, `b² − 4ac = d < 0`, `|b| ≤ a ≤ c`,
/// with `b ≥ 0` whenever `|b| = a` or `a = c`.
pub fn reduced_forms(d: i64) -> Vec<(i64, i64, i64)> {
    let mut out = Vec::new();
    let amax = ((-d) / 3).sqrt() + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            out.push((a, b, c));
        }
    }
    out
}

fn is_square(n: i64) -> bool {
    n >= 0 && n.sqrt() * n.sqrt() == n
}

/// Reduced indefinite forms of a positive nonsquare discriminant.
fn reduced_indefinite_forms(d: i64) -> Vec<(i64, i64, i64)> {
    let s = d.sqrt();
    let mut out = Vec::new();
    for b in 1..=s {
        if (b - d).rem_euclid(2) != 0 {
            continue;
        }
        let ac = (b * b - d) / 4;
        for a in 1..=ac.abs() {
            if ac % a != 0 || 2 * a <= s - b || 2 * a > s + b {
                continue;
            }
            for sa in [a, -a] {
                let c = ac / sa;
                if sa.gcd(&b).gcd(&c) == 1 {
                    out.push((sa, b, c));
                }
            }
        }
    }
    out
}

/// One reduction step on a reduced indefinite form: `(a, b, c) ↦ (c, b', a')`
/// with `b' ≡ -b mod 2|c|` and `√d − 2|c| < b' < √d`.
fn rho(d: i64, (_, b, c): (i64, i64, i64)) -> (i64, i64, i64) {
    let s = d.sqrt();
    let m = 2 * c.abs();
    let nb = s - (s + b).rem_euclid(m);
    let na = (nb * nb - d) / (4 * c);
    (c, nb, na)
}

/// Narrow (`wide = false`) or wide class number of a real quadratic
/// fundamental discriminant `0 < d ≤ 200`.
pub fn real_quadratic_class_number(d: i64, wide: bool) -> Result<u64> {
    if d <= 0 || !is_fundamental_discriminant(d) {
        return Err(Error::NotFundamental(d));
    }
    if d > 200 {
        return Err(Error::Unsupported(format!("real quadratic class number for d = {d} > 200")));
    }
    let forms = reduced_indefinite_forms(d);
    let mut seen = BTreeSet::new();
    let mut cycles: Vec<Vec<(i64, i64, i64)>> = Vec::new();
    for &f in &forms {
        if seen.contains(&f) {
            continue;
        }
        let mut cycle = vec![f];
        seen.insert(f);
        let mut g = rho(d, f);
        while g != f {
            seen.insert(g);
            cycle.push(g);
            g = rho(d, g);
        }
        cycles.push(cycle);
    }
    let narrow = cycles.len() as u64;
    if !wide {
        return Ok(narrow);
    }
    // a unit of norm -1 exists iff the principal cycle represents -1
    let principal = cycles.iter().find(|c| c.iter().any(|&(a, _, _)| a == 1)).expect("principal form is reduced");
    let negative_unit = principal.iter().any(|&(a, _, _)| a == -1);
    Ok(if negative_unit { narrow } else { narrow / 2 })
}

/// Least positive solution of `x² − d·y² = 1`, via the continued fraction of `√d`.
pub fn pell_fundamental(d: i64) -> Result<(BigInt, BigInt)> {
    if d <= 1 || is_square(d) {
        return Err(Error::SquareInput(d));
    }
    let a0 = d.sqrt();
    let (mut m, mut q, mut a) = (0i64, 1i64, a0);
    let (mut p_prev, mut p) = (BigInt::one(), BigInt::from(a0));
    let (mut q_prev, mut qq) = (BigInt::zero(), BigInt::one());
    let bd = BigInt::from(d);
    loop {
        if &p * &p - &bd * &qq * &qq == BigInt::one() {
            return Ok((p, qq));
        }
        m = a * q - m;
        q = (d - m * m) / q;
        a = (a0 + m) / q;
        let ba = BigInt::from(a);
        (p_prev, p) = (p.clone(), &ba * &p + &p_prev);
        (q_prev, qq) = (qq.clone(), &ba * &qq + &q_prev);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalSplitting {
    pub p: u64,
    pub e: u64,
    pub f: u64,
    pub g: u64,
}

impl LocalSplitting {
    pub fn local_degree(&self) -> u64 {
        self.e * self.f
    }
}

fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    // moduli coprime
    let n = m1 * m2;
    (0..m2).map(|t| r1 + t * m1).find(|x| x % m2 == r2 % m2).unwrap_or(0) % n.max(1)
}

/// Fundamental discriminant of a degree-2 field, whatever its presentation.
pub fn quadratic_discriminant(field: &AbelianFieldSpec) -> Option<i64> {
    if let FieldKind::Quadratic(d) = field.kind {
        return Some(d);
    }
    if field.degree() != 2 {
        return None;
    }
    let conductor = character_conductors(field).into_iter().map(|(f, _)| f).max()? as i64;
    let real = field.subgroup.contains(&(field.modulus - 1));
    Some(if real { conductor } else { -conductor })
}

/// Discriminant of `Q(√m)` for a squarefree integer `m ≠ 0, 1`.
pub fn discriminant_of_radicand(m: i64) -> Result<i64> {
    if m == 0 || m == 1 || factor_u64(m.unsigned_abs()).iter().any(|&(_, e)| e > 1) {
        return Err(Error::Invalid(format!("{m} is not a squarefree radicand")));
    }
    Ok(if m.rem_euclid(4) == 1 { m } else { 4 * m })
}

/// Ramification index, residue degree and number of primes above `p`.
pub fn local_splitting(field: &AbelianFieldSpec, p: u64) -> LocalSplitting {
    let n = field.modulus;
    let mut pa = 1;
    let mut rest = n;
    while rest.is_multiple_of(p) {
        rest /= p;
        pa *= p;
    }
    let h: BTreeSet<u64> = field.subgroup.iter().copied().collect();
    let units = units_mod(n);
    let inertia: BTreeSet<u64> = units.iter().copied().filter(|&x| x % rest == 1 % rest).collect();
    let ih: BTreeSet<u64> = inertia.iter().flat_map(|&a| h.iter().map(move |&b| mul_mod(a, b, n.max(1)))).collect();
    let frob = crt_pair(1 % pa, pa, p % rest, rest);
    let mut decomposition = ih.clone();
    let mut power = frob;
    while !ih.contains(&(power % n.max(1))) {
        decomposition.extend(ih.iter().map(|&x| mul_mod(x, power, n.max(1))));
        power = mul_mod(power, frob, n.max(1));
    }
    let e = (ih.len() / h.len()) as u64;
    let ef = (decomposition.len() / h.len()) as u64;
    let degree = field.degree();
    LocalSplitting { p, e, f: ef / e, g: degree / ef }
}

/// Whether `p` ramifies, by the conductors (equivalently `p | disc`).
pub fn is_ramified(field: &AbelianFieldSpec, p: u64) -> bool {
    local_splitting(field, p).e > 1
}

/// Memo of computed discriminants and class numbers, persisted as lines
/// `kind key value`. Readers run concurrently; writes are serialized.
#[derive(Debug, Default)]
pub struct FieldCache {
    entries: RwLock<BTreeMap<(String, String), BigUint>>,
}

impl FieldCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cache = FieldCache::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(' ').collect();
            let [kind, key, value] = parts.as_slice() else {
                return Err(Error::Parse { line: i + 1, msg: "expected `kind key value`".into() });
            };
            let value: BigUint = value
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("bad integer {value}") })?;
            cache.insert(kind, key, value);
        }
        Ok(cache)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::new());
        }
        let file = std::fs::File::open(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        let mut text = String::new();
        for line in std::io::BufReader::new(file).lines() {
            text.push_str(&line.map_err(|e| Error::Invalid(e.to_string()))?);
            text.push('\n');
        }
        Self::parse(&text)
    }

    pub fn render(&self) -> String {
        let entries = self.entries.read().expect("cache lock");
        entries.iter().map(|((kind, key), v)| format!("{kind} {key} {v}\n")).collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        file.write_all(self.render().as_bytes()).map_err(|e| Error::Invalid(e.to_string()))
    }

    pub fn get(&self, kind: &str, key: &str) -> Option<BigUint> {
        self.entries.read().expect("cache lock").get(&(kind.to_string(), key.to_string())).cloned()
    }

    pub fn insert(&self, kind: &str, key: &str, value: BigUint) {
        self.entries.write().expect("cache lock").insert((kind.to_string(), key.to_string()), value);
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn discriminant(&self, field: &AbelianFieldSpec) -> BigUint {
        let key = field.key();
        if let Some(v) = self.get("disc", &key) {
            return v;
        }
        let v = abelian_field_discriminant(field);
        self.insert("disc", &key, v.clone());
        v
    }

    pub fn class_number(&self, d: i64) -> Result<u64> {
        let key = d.to_string();
        if let Some(v) = self.get("classno", &key) {
            return u64::try_from(v).map_err(|_| Error::Invalid("cached class number too large".into()));
        }
        let h = if d < 0 { quadratic_class_number(d)? } else { real_quadratic_class_number(d, true)? };
        self.insert("classno", &key, BigUint::from(h));
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Analytic class number formula, `h = -(w / 2|d|) Σ χ(a)·a`.
    fn analytic_class_number(d: i64) -> i64 {
        let n = d.unsigned_abs();
        let s: i64 = (1..n).map(|a| kronecker(d, a) as i64 * a as i64).sum();
        let w = match d {
            -3 => 6,
            -4 => 4,
            _ => 2,
        };
        -(w * s) / (2 * n as i64)
    }

    #[test]
    fn discriminants() {
        assert_eq!(abelian_field_discriminant(&AbelianFieldSpec::rational()), BigUint::one());
        assert_eq!(abelian_field_discriminant(&AbelianFieldSpec::quadratic(-4).unwrap()), BigUint::from(4u32));
        assert_eq!(abelian_field_discriminant(&AbelianFieldSpec::cyclotomic(5).unwrap()), BigUint::from(125u32));
        for d in [-3i64, -4, -7, -8, 5, 8, 12, -23, 13, -15, 21, 24] {
            let f = AbelianFieldSpec::quadratic(d).unwrap();
            assert_eq!(f.degree(), 2);
            assert_eq!(abelian_field_discriminant(&f), BigUint::from(d.unsigned_abs()));
        }
    }

    #[test]
    fn resultant_oracle() {
        assert_eq!(cyclotomic_poly_disc_oracle(3), BigInt::from(3));
        assert_eq!(cyclotomic_poly_disc_oracle(4), BigInt::from(4));
        assert_eq!(cyclotomic_poly_disc_oracle(5), BigInt::from(125));
        for n in [3u64, 4, 5, 7, 8, 9, 11, 12] {
            let f = AbelianFieldSpec::cyclotomic(n).unwrap();
            assert_eq!(BigInt::from(abelian_field_discriminant(&f)), cyclotomic_poly_disc_oracle(n), "n = {n}");
        }
    }

    #[test]
    fn compositum_of_gaussian_and_eisenstein() {
        let f = AbelianFieldSpec::compositum(&[
            AbelianFieldSpec::quadratic(-4).unwrap(),
            AbelianFieldSpec::quadratic(-3).unwrap(),
        ])
        .unwrap();
        assert_eq!(f.modulus(), 12);
        assert_eq!(f.degree(), 4);
        // conductors of the characters mod 12: 1, 3, 4, 12
        assert_eq!(character_conductors(&f), vec![(1, 1), (3, 1), (4, 1), (12, 1)]);
        assert_eq!(abelian_field_discriminant(&f), BigUint::from(144u32));
        assert_eq!(cyclotomic_poly_disc_oracle(12), BigInt::from(144));
    }

    #[test]
    fn invalid_subgroups() {
        assert!(matches!(AbelianFieldSpec::new(7, [1, 2, 3]), Err(Error::InvalidSubgroup(_))));
        assert!(matches!(AbelianFieldSpec::new(8, [1, 2]), Err(Error::InvalidSubgroup(_))));
        assert!(matches!(AbelianFieldSpec::new(8, [3]), Err(Error::InvalidSubgroup(_))));
        assert!(AbelianFieldSpec::new(7, [1, 2, 4]).is_ok());
        assert!(matches!(AbelianFieldSpec::quadratic(-12), Err(Error::NotFundamental(-12))));
        assert!(matches!(AbelianFieldSpec::quadratic(1), Err(Error::NotFundamental(1))));
    }

    #[test]
    fn imaginary_class_numbers() {
        assert_eq!(reduced_forms(-4), vec![(1, 0, 1)]);
        assert_eq!(reduced_forms(-23), vec![(1, 1, 6), (2, -1, 3), (2, 1, 3)]);
        assert_eq!(quadratic_class_number(-47).unwrap(), 5);
        for d in [-3, -4, -7, -8, -11] {
            assert_eq!(quadratic_class_number(d).unwrap(), 1);
        }
        for d in (-400i64..-2).filter(|&d| is_fundamental_discriminant(d)) {
            assert_eq!(quadratic_class_number(d).unwrap() as i64, analytic_class_number(d), "d = {d}");
        }
        assert_eq!(quadratic_class_number(-12), Err(Error::NotFundamental(-12)));
        assert_eq!(quadratic_class_number(5), Err(Error::NotFundamental(5)));
    }

    #[test]
    fn real_class_numbers() {
        // wide / narrow values for small real quadratic fields
        for (d, wide, narrow) in [(5, 1, 1), (8, 1, 1), (12, 1, 2), (13, 1, 1), (21, 1, 2), (40, 2, 2), (60, 2, 4), (65, 2, 2), (136, 2, 4)] {
            assert_eq!(real_quadratic_class_number(d, true).unwrap(), wide, "wide h({d})");
            assert_eq!(real_quadratic_class_number(d, false).unwrap(), narrow, "narrow h({d})");
        }
        assert!(matches!(real_quadratic_class_number(221, true), Err(Error::Unsupported(_))));
    }

    #[test]
    fn pell() {
        for (d, x, y) in [(2, 3, 2), (3, 2, 1), (5, 9, 4), (7, 8, 3), (13, 649, 180)] {
            assert_eq!(pell_fundamental(d).unwrap(), (BigInt::from(x), BigInt::from(y)));
        }
        // brute force minimality
        for d in [2i64, 3, 5, 6, 7, 8, 10, 11] {
            let (x, _) = pell_fundamental(d).unwrap();
            let brute = (1i64..)
                .find_map(|y| {
                    let x2 = 1 + d * y * y;
                    is_square(x2).then(|| x2.sqrt())
                })
                .unwrap();
            assert_eq!(x, BigInt::from(brute));
        }
        assert_eq!(pell_fundamental(9), Err(Error::SquareInput(9)));
    }

    #[test]
    fn splitting_in_gaussian_field() {
        let qi = AbelianFieldSpec::quadratic(-4).unwrap();
        assert_eq!(local_splitting(&qi, 5), LocalSplitting { p: 5, e: 1, f: 1, g: 2 });
        assert_eq!(local_splitting(&qi, 3), LocalSplitting { p: 3, e: 1, f: 2, g: 1 });
        assert_eq!(local_splitting(&qi, 2), LocalSplitting { p: 2, e: 2, f: 1, g: 1 });
    }

    #[test]
    fn splitting_consistency() {
        let fields = [
            AbelianFieldSpec::cyclotomic(12).unwrap(),
            AbelianFieldSpec::cyclotomic(9).unwrap(),
            AbelianFieldSpec::new(7, [1, 6]).unwrap(),
            AbelianFieldSpec::quadratic(-7).unwrap(),
            AbelianFieldSpec::quadratic(12).unwrap(),
        ];
        for f in &fields {
            let disc = abelian_field_discriminant(f);
            for p in [2u64, 3, 5, 7, 11, 13] {
                let s = local_splitting(f, p);
                assert_eq!(s.e * s.f * s.g, f.degree());
                assert_eq!(s.e > 1, (&disc % p).is_zero(), "{f} at {p}");
            }
        }
        assert_eq!(local_splitting(&fields[1], 3).e, 6);
        // cubic field of conductor 7: 2 is inert, 13 = -1 splits completely
        assert_eq!(local_splitting(&fields[2], 2), LocalSplitting { p: 2, e: 1, f: 3, g: 1 });
        assert_eq!(local_splitting(&fields[2], 13), LocalSplitting { p: 13, e: 1, f: 1, g: 3 });
        assert_eq!(abelian_field_discriminant(&fields[2]), BigUint::from(49u32));
        // the squares mod 7 cut out Q(sqrt(-7))
        let sq = AbelianFieldSpec::new(7, [1, 2, 4]).unwrap();
        assert_eq!(abelian_field_discriminant(&sq), BigUint::from(7u32));
        assert_eq!(local_splitting(&sq, 2).g, 2);
    }

    #[test]
    fn cache_round_trip() {
        let cache = FieldCache::new();
        let qi = AbelianFieldSpec::quadratic(-4).unwrap();
        assert_eq!(cache.discriminant(&qi), BigUint::from(4u32));
        assert_eq!(cache.class_number(-23).unwrap(), 3);
        let text = cache.render();
        assert_eq!(text, "classno -23 3\ndisc 4:1 4\n");
        let back = FieldCache::parse(&text).unwrap();
        assert_eq!(back.render(), text);
        assert!(FieldCache::parse("disc x\n").is_err());
    }
}
