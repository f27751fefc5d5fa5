//! Units of local rings `O_F ⊗ Z_p` modulo `p^k`, norm and character images,
//! and stabilizer indices of congruence conditions on supported tori.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use crate::arith::{checked_prime_power, euler_phi, factor_u64, inv_mod, mul_mod, pow_mod, primitive_root};
use crate::error::{Error, Result};
use crate::exactalg::{hnf, IntegerMatrix};
use crate::fields::{cyclotomic_polynomial, local_splitting, quadratic_discriminant, AbelianFieldSpec, FieldKind, LocalSplitting};
use crate::torus::{CharacterSpec, TorusFactor, TorusSpec};

/// Residue rings larger than this are not enumerated.
const RESIDUE_LIMIT: u64 = 2_000_000;
/// Hard cap on the number of states visited by an orbit enumeration.
const ORBIT_LIMIT: usize = 20_000_000;

pub type RingElem = Vec<u64>;

/// `Z[x]/(f)` reduced modulo `p^k`, for a monic integer polynomial `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRing {
    p: u64,
    k: u32,
    modulus: u64,
    /// Low coefficients `c_0..c_{n-1}` of `f = x^n + Σ c_i x^i`.
    poly: Vec<i64>,
    reduced: Vec<u64>,
}

impl LocalRing {
    pub fn new(poly: Vec<i64>, p: u64, k: u32) -> Result<Self> {
        if poly.is_empty() {
            return Err(Error::Invalid("ring polynomial must have positive degree".into()));
        }
        let modulus = checked_prime_power(p, k).ok_or(Error::PrecisionNotStabilized { p, k_max: k })?;
        let reduced = poly.iter().map(|&c| c.rem_euclid(modulus as i64) as u64).collect();
        Ok(LocalRing { p, k, modulus, poly, reduced })
    }

    pub fn for_field(field: &AbelianFieldSpec, p: u64, k: u32) -> Result<Self> {
        LocalRing::new(field_polynomial(field)?, p, k)
    }

    pub fn at_precision(&self, k: u32) -> Result<Self> {
        LocalRing::new(self.poly.clone(), self.p, k)
    }

    pub fn degree(&self) -> usize {
        self.poly.len()
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn precision(&self) -> u32 {
        self.k
    }

    pub fn one(&self) -> RingElem {
        let mut e = vec![0; self.degree()];
        e[0] = 1 % self.modulus;
        e
    }

    pub fn reduce(&self, a: &[u64]) -> RingElem {
        a.iter().map(|&c| c % self.modulus).collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> RingElem {
        let n = self.degree();
        let m = self.modulus;
        let mut r = vec![0u64; 2 * n - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + mul_mod(x, y, m)) % m;
            }
        }
        for top in (n..2 * n - 1).rev() {
            let c = r[top];
            if c == 0 {
                continue;
            }
            // x^n = -Σ c_i x^i
            for (i, &ci) in self.reduced.iter().enumerate() {
                let t = mul_mod(c, ci, m);
                let slot = top - n + i;
                r[slot] = (r[slot] + m - t) % m;
            }
        }
        r.truncate(n);
        r
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> RingElem {
        let mut acc = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Norm to `Z/p^k`, the determinant of multiplication by `a`.
    pub fn norm(&self, a: &[u64]) -> u64 {
        let m = self.modulus;
        match self.degree() {
            1 => a[0] % m,
            2 => {
                let (x, y) = (a[0], a[1]);
                let (c0, c1) = (self.reduced[0], self.reduced[1]);
                let xx = mul_mod(x, x, m);
                let xy = mul_mod(mul_mod(x, y, m), c1, m);
                let yy = mul_mod(mul_mod(y, y, m), c0, m);
                (xx + m - xy + yy) % m
            }
            n => {
                let mut cols = Vec::with_capacity(n);
                let mut basis = self.one();
                let mut x = vec![0u64; n];
                x[1 % n] = 1;
                for _ in 0..n {
                    cols.push(self.mul(a, &basis));
                    basis = self.mul(&basis, &x);
                }
                let rows: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| BigInt::from(cols[j][i])).collect()).collect();
                let det = crate::exactalg::bareiss_det(rows);
                let r = det % BigInt::from(m);
                let r = if r < BigInt::from(0) { r + BigInt::from(m) } else { r };
                r.to_u64().expect("reduced modulo a u64")
            }
        }
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        !self.norm(a).is_multiple_of(self.p)
    }

    /// The nontrivial automorphism of a quadratic ring, `ω ↦ tr(ω) − ω`.
    pub fn conjugate(&self, a: &[u64]) -> RingElem {
        debug_assert_eq!(self.degree(), 2);
        let m = self.modulus;
        let c1 = self.reduced[1];
        let b = a[1] % m;
        // σ(a + bω) = (a - c1·b) - bω
        vec![(a[0] % m + m - mul_mod(c1, b, m)) % m, (m - b) % m]
    }

    /// `1 + p^j x^i`.
    fn one_unit(&self, j: u32, i: usize) -> RingElem {
        let mut e = self.one();
        let pj = checked_prime_power(self.p, j).unwrap_or(0) % self.modulus;
        e[i] = (e[i] + pj) % self.modulus;
        e
    }
}

/// Low coefficients of a monic polynomial whose root generates the ring of integers.
pub fn field_polynomial(field: &AbelianFieldSpec) -> Result<Vec<i64>> {
    if field.is_rational() {
        return Ok(vec![0]);
    }
    if let Some(d) = quadratic_discriminant(field) {
        return Ok(if d.rem_euclid(4) == 1 { vec![(1 - d) / 4, -1] } else { vec![-d / 4, 0] });
    }
    if let FieldKind::Cyclotomic(n) = field.kind() {
        let phi = cyclotomic_polynomial(*n);
        return phi[..phi.len() - 1]
            .iter()
            .map(|c| c.to_i64().ok_or_else(|| Error::UnsupportedField(field.to_string())))
            .collect();
    }
    Err(Error::UnsupportedField(format!("{field}: only quadratic and cyclotomic blocks have local unit tables")))
}

/// Generators of `(O_F ⊗ Z_p / p^k)^×`, or of the norm-one units inside it.
#[derive(Clone, Debug)]
pub struct LocalUnitGroup {
    pub p: u64,
    pub k: u32,
    pub splitting: LocalSplitting,
    pub ring: LocalRing,
    pub generators: Vec<RingElem>,
    /// `|(O/p)^×|`; `None` for norm-one groups.
    pub residue_units: Option<u64>,
    norm_one: bool,
}

impl LocalUnitGroup {
    /// Order of the full unit quotient, `|(O/p)^×|·p^{n(k−1)}`.
    pub fn order(&self) -> Option<BigUint> {
        let r = self.residue_units?;
        let n = self.ring.degree() as u32;
        Some(BigUint::from(r) * BigUint::from(self.p).pow(n * (self.k - 1)))
    }

    pub fn is_norm_one(&self) -> bool {
        self.norm_one
    }

    /// Size of the subgroup generated, by enumeration.
    pub fn closure_order(&self) -> Result<usize> {
        let ring = &self.ring;
        orbit_size(ring.one(), &self.generators, |a, b| ring.mul(a, b))
    }

    /// Index of `{t ≡ 1 mod p^d}` in this group.
    pub fn congruence_index(&self, d: u32) -> Result<u64> {
        if d == 0 {
            return Ok(1);
        }
        if let Some(r) = self.residue_units {
            let n = self.ring.degree() as u32;
            return checked_prime_power(self.p, n * (d - 1))
                .and_then(|q| q.checked_mul(r))
                .ok_or_else(|| Error::Unsupported("congruence index exceeds 64 bits".into()));
        }
        let low = self.ring.at_precision(d)?;
        let gens: Vec<RingElem> = self.generators.iter().map(|g| low.reduce(g)).collect();
        Ok(orbit_size(low.one(), &gens, |a, b| low.mul(a, b))? as u64)
    }

    /// Generators of `{t ≡ 1 mod p^d}`, modulo `p^k`.
    pub fn congruence_generators(&self, d: u32) -> Result<Vec<RingElem>> {
        if d == 0 {
            return Ok(self.generators.clone());
        }
        if self.norm_one {
            return Err(Error::Unsupported("congruence generators of norm-one groups".into()));
        }
        let n = self.ring.degree();
        Ok((d..self.k).flat_map(|j| (0..n).map(move |i| (j, i))).map(|(j, i)| self.ring.one_unit(j, i)).collect())
    }
}

fn residue_index(e: &[u64], p: u64) -> usize {
    e.iter().rev().fold(0u64, |acc, &c| acc * p + c) as usize
}

fn residue_element(mut idx: u64, p: u64, n: usize) -> RingElem {
    (0..n)
        .map(|_| {
            let c = idx % p;
            idx /= p;
            c
        })
        .collect()
}

type ResidueTable = (Vec<RingElem>, u64);

/// Residue generators depend only on `(f, p)`; they are shared across precisions.
fn residue_generators(ring: &LocalRing) -> Result<ResidueTable> {
    static TABLES: OnceLock<RwLock<HashMap<(Vec<i64>, u64), ResidueTable>>> = OnceLock::new();
    let tables = TABLES.get_or_init(Default::default);
    let key = (ring.poly.clone(), ring.p);
    if let Some(t) = tables.read().expect("residue table lock").get(&key) {
        return Ok(t.clone());
    }
    let table = compute_residue_generators(ring)?;
    tables.write().expect("residue table lock").insert(key, table.clone());
    Ok(table)
}

/// A generating set of `(O/p)^×`, chosen greedily over an enumeration.
fn compute_residue_generators(ring: &LocalRing) -> Result<ResidueTable> {
    let p = ring.p;
    let n = ring.degree();
    let size = checked_prime_power(p, n as u32).filter(|&s| s <= RESIDUE_LIMIT).ok_or_else(|| {
        Error::UnsupportedField(format!("residue ring of size {p}^{n} is too large to enumerate"))
    })?;
    let res = ring.at_precision(1)?;
    let units: Vec<RingElem> =
        (0..size).map(|i| residue_element(i, p, n)).filter(|e| res.is_unit(e)).collect();
    let mut covered = vec![false; size as usize];
    let mut members = vec![res.one()];
    covered[residue_index(&res.one(), p)] = true;
    let mut gens = Vec::new();
    for u in &units {
        if members.len() == units.len() {
            break;
        }
        if covered[residue_index(u, p)] {
            continue;
        }
        gens.push(u.clone());
        let base = members.clone();
        let mut power = u.clone();
        while !covered[residue_index(&power, p)] {
            for h in &base {
                let x = res.mul(h, &power);
                let ix = residue_index(&x, p);
                if !covered[ix] {
                    covered[ix] = true;
                    members.push(x);
                }
            }
            power = res.mul(&power, u);
        }
    }
    Ok((gens, units.len() as u64))
}

fn rational_generators(p: u64, k: u32, ring: &LocalRing) -> Vec<RingElem> {
    let m = ring.modulus;
    if p == 2 {
        return match k {
            1 => vec![],
            2 => vec![vec![m - 1]],
            _ => vec![vec![m - 1], vec![5 % m]],
        };
    }
    let mut gens = vec![vec![primitive_root(p) % m]];
    if k >= 2 {
        gens.push(vec![(1 + p) % m]);
    }
    gens
}

pub fn unit_group_generators(field: &AbelianFieldSpec, p: u64, k: u32) -> Result<LocalUnitGroup> {
    if k == 0 {
        return Err(Error::Invalid("precision exponent must be at least 1".into()));
    }
    let ring = LocalRing::for_field(field, p, k)?;
    let splitting = local_splitting(field, p);
    let (generators, residue_units) = if ring.degree() == 1 {
        (rational_generators(p, k, &ring), p - 1)
    } else {
        let (mut gens, count) = residue_generators(&ring)?;
        let n = ring.degree();
        for j in 1..k {
            for i in 0..n {
                gens.push(ring.one_unit(j, i));
            }
        }
        (gens, count)
    };
    Ok(LocalUnitGroup { p, k, splitting, ring, generators, residue_units: Some(residue_units), norm_one: false })
}

/// Exact norm of `a + bω` in `Z[ω]`, `ω² = −c1·ω − c0`.
fn exact_norm(a: i128, b: i128, c0: i128, c1: i128) -> i128 {
    a * a - c1 * a * b + c0 * b * b
}

/// Generators of the norm-one units `{σ(y)/y}` of a quadratic block.
pub fn norm_one_generators(field: &AbelianFieldSpec, p: u64, k: u32) -> Result<LocalUnitGroup> {
    let d = quadratic_discriminant(field)
        .ok_or_else(|| Error::UnsupportedField(format!("norm-one tori are supported for quadratic fields only, not {field}")))?;
    let full = unit_group_generators(field, p, k)?;
    let ring = full.ring.clone();
    let m = ring.modulus;
    let quotient = |g: &[u64]| -> Result<RingElem> {
        let s = ring.conjugate(g);
        let inv = inv_mod(ring.norm(g), m).ok_or_else(|| Error::Invalid("norm of a unit is not invertible".into()))?;
        let s2 = ring.mul(&s, &s);
        Ok(s2.iter().map(|&c| mul_mod(c, inv, m)).collect())
    };
    let mut gens = full.generators.iter().map(|g| quotient(g)).collect::<Result<Vec<_>>>()?;
    if full.splitting.e > 1 {
        let (c0, c1) = (ring.poly[0] as i128, ring.poly[1] as i128);
        let p128 = p as i128;
        let bound = 2 * p128 + 2;
        let pi = (-bound..=bound)
            .flat_map(|a| (1..=bound).map(move |b| (a, b)))
            .find(|&(a, b)| {
                let nm = exact_norm(a, b, c0, c1);
                nm % p128 == 0 && nm % (p128 * p128) != 0
            })
            .ok_or_else(|| Error::Invalid(format!("no uniformizer found for d = {d} at {p}")))?;
        let (a, b) = pi;
        let nm = exact_norm(a, b, c0, c1);
        // σ(π)/π = σ(π)²/N(π); σ(π)² is divisible by p, the rest of N(π) is a unit
        let (sa, sb) = (a - c1 * b, -b);
        let sq0 = sa * sa - c0 * sb * sb;
        let sq1 = 2 * sa * sb - c1 * sb * sb;
        debug_assert!(sq0 % p128 == 0 && sq1 % p128 == 0);
        let unit = (nm / p128).rem_euclid(m as i128) as u64;
        let unit_inv = inv_mod(unit, m).expect("cofactor prime to p");
        let elem = vec![
            mul_mod((sq0 / p128).rem_euclid(m as i128) as u64, unit_inv, m),
            mul_mod((sq1 / p128).rem_euclid(m as i128) as u64, unit_inv, m),
        ];
        gens.push(elem);
    }
    gens.retain(|g| *g != ring.one());
    Ok(LocalUnitGroup { p, k, splitting: full.splitting, ring, generators: gens, residue_units: None, norm_one: true })
}

/// Breadth-first closure of `start` under right multiplication by `gens`.
pub fn orbit_size<F>(start: Vec<u64>, gens: &[Vec<u64>], mul: F) -> Result<usize>
where
    F: Fn(&[u64], &[u64]) -> Vec<u64>,
{
    let gens: Vec<&Vec<u64>> = gens.iter().filter(|g| mul(&start, g) != start).collect();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = mul(&x, g);
            if seen.insert(y.clone()) {
                if seen.len() > ORBIT_LIMIT {
                    return Err(Error::Unsupported(format!("orbit larger than {ORBIT_LIMIT} states")));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.len())
}

/// Order of the subgroup of `(Z/p^k)^×` generated by `gens`.
pub fn subgroup_order(gens: &[u64], p: u64, k: u32) -> Result<u64> {
    let m = checked_prime_power(p, k).ok_or(Error::PrecisionNotStabilized { p, k_max: k })?;
    if p != 2 {
        // cyclic: the subgroup order is the lcm of the element orders
        let group = (p - 1) * (m / p);
        let primes: Vec<u64> = factor_u64(group).into_iter().map(|(q, _)| q).collect();
        let mut acc = 1u64;
        for &g in gens {
            let mut ord = group;
            for &q in &primes {
                while ord.is_multiple_of(q) && pow_mod(g, ord / q, m) == 1 {
                    ord /= q;
                }
            }
            acc = num_integer::lcm(acc, ord);
        }
        return Ok(acc);
    }
    let gens: Vec<Vec<u64>> = gens.iter().map(|&g| vec![g % m]).collect();
    image_order(p, &[k], &gens)
}

/// Discrete logarithms in `(Z/p^m)^×` for the decomposition `⟨ω⟩ × ⟨1+p⟩`
/// (odd `p`) or `⟨−1⟩ × ⟨5⟩` (`p = 2`).
struct UnitLog {
    p: u64,
    m: u32,
    modulus: u64,
    orders: Vec<u64>,
    root: u64,
    teichmuller_inv: u64,
}

impl UnitLog {
    fn new(p: u64, m: u32) -> Result<Self> {
        let modulus = checked_prime_power(p, m).ok_or(Error::PrecisionNotStabilized { p, k_max: m })?;
        let (orders, root, teichmuller_inv) = if p == 2 {
            let orders = match m {
                0 | 1 => vec![],
                2 => vec![2],
                _ => vec![2, 1 << (m - 2)],
            };
            (orders, 1, 1)
        } else {
            let g = primitive_root(p);
            let t = pow_mod(g, modulus / p, modulus);
            (vec![p - 1, modulus / p], g, inv_mod(t, modulus).expect("unit"))
        };
        Ok(UnitLog { p, m, modulus, orders, root, teichmuller_inv })
    }

    /// Baby-step giant-step logarithm of `x` to the base `root` modulo `p`.
    fn log_mod_p(&self, x: u64) -> u64 {
        let p = self.p;
        let n = p - 1;
        let step = (n as f64).sqrt().ceil() as u64 + 1;
        let mut baby = HashMap::with_capacity(step as usize);
        let mut cur = 1u64;
        for j in 0..step {
            baby.entry(cur).or_insert(j);
            cur = mul_mod(cur, self.root, p);
        }
        let giant = inv_mod(pow_mod(self.root, step, p), p).expect("unit");
        let mut y = x % p;
        for i in 0..=step {
            if let Some(&j) = baby.get(&y) {
                return (i * step + j) % n;
            }
            y = mul_mod(y, giant, p);
        }
        unreachable!("{x} is not a unit modulo {p}")
    }

    /// Logarithm of `u ≡ 1 mod p^start` to the base `base`, where
    /// `base^{p^{j−start}} ≡ 1 + p^j` to first order; found digit by digit.
    fn log_one_unit(&self, u: u64, base: u64, start: u32) -> u64 {
        let (p, modulus) = (self.p, self.modulus);
        let base_inv = inv_mod(base, modulus).expect("unit");
        let mut a = 0u64;
        let mut weight = 1u64;
        let mut pj = checked_prime_power(p, start).expect("below the modulus");
        while pj < modulus {
            let v = mul_mod(u, pow_mod(base_inv, a, modulus), modulus);
            a += ((v + modulus - 1) % modulus / pj) % p * weight;
            weight *= p;
            pj *= p;
        }
        a
    }

    fn log(&self, x: u64) -> Vec<u64> {
        let x = x % self.modulus;
        if self.p == 2 {
            let s = u64::from(x % 4 != 1);
            let u = if s == 1 { self.modulus - x } else { x };
            return match self.m {
                0 | 1 => vec![],
                2 => vec![s],
                _ => vec![s, self.log_one_unit(u, 5, 2)],
            };
        }
        let l = self.log_mod_p(x);
        let u = mul_mod(x, pow_mod(self.teichmuller_inv, l, self.modulus), self.modulus);
        vec![l, self.log_one_unit(u, 1 + self.p, 1)]
    }
}

/// Order of the subgroup of `∏_i (Z/p^{m_i})^×` generated by `images`,
/// from the Smith form of the lattice of logarithm relations.
fn image_order(p: u64, depths: &[u32], images: &[Vec<u64>]) -> Result<u64> {
    let logs: Vec<UnitLog> = depths.iter().map(|&m| UnitLog::new(p, m)).collect::<Result<_>>()?;
    let orders: Vec<u64> = logs.iter().flat_map(|l| l.orders.iter().copied()).collect();
    let r = orders.len();
    if r == 0 {
        return Ok(1);
    }
    let mut cols: Vec<Vec<u64>> = images
        .iter()
        .map(|img| {
            let v: Vec<u64> = img.iter().zip(&logs).flat_map(|(&x, l)| l.log(x)).collect();
            v.iter().zip(&orders).map(|(&a, &n)| a % n).collect::<Vec<u64>>()
        })
        .filter(|v| v.iter().any(|&a| a != 0))
        .collect();
    cols.sort_unstable();
    cols.dedup();
    for (i, &n) in orders.iter().enumerate() {
        let mut e = vec![0; r];
        e[i] = n;
        cols.push(e);
    }
    let rows: Vec<Vec<u64>> = (0..r).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    // the relation lattice has full rank, so its index is the product of the HNF pivots
    let h = hnf(&IntegerMatrix::from_rows(&rows)?).to_rows();
    let index: BigInt = (0..r).map(|i| h[i][i].clone()).product();
    let total: BigInt = orders.iter().map(|&n| BigInt::from(n)).product();
    (total / index).to_u64().ok_or_else(|| Error::Unsupported("subgroup order exceeds 64 bits".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    /// Largest precision tried is `max depth + extra_max`.
    pub extra_max: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { extra_max: 8 }
    }
}

impl PrecisionPolicy {
    fn stabilize<F>(&self, p: u64, depth: u32, first: u32, step: impl Fn(u32) -> u32, f: F) -> Result<(u64, u32)>
    where
        F: Fn(u32) -> Result<u64>,
    {
        let mut cap = depth + self.extra_max.max(1);
        while cap > 0 && checked_prime_power(p, cap).is_none() {
            cap -= 1;
        }
        let mut k = first.min(cap);
        if k < depth.max(1) {
            return Err(Error::PrecisionNotStabilized { p, k_max: cap });
        }
        let mut prev = f(k)?;
        loop {
            let next = step(k).min(cap);
            if next <= k {
                return Err(Error::PrecisionNotStabilized { p, k_max: cap });
            }
            let value = f(next)?;
            if value == prev {
                return Ok((value, k));
            }
            prev = value;
            k = next;
        }
    }
}

/// Index of the norm image of the local units in `(Z/p^k)^×`.
pub fn norm_image_index_at(field: &AbelianFieldSpec, p: u64, k: u32) -> Result<u64> {
    if field.is_rational() {
        return Ok(1);
    }
    let group = unit_group_generators(field, p, k)?;
    let norms: Vec<u64> = group.generators.iter().map(|g| group.ring.norm(g)).collect();
    let total = euler_phi(group.ring.modulus);
    Ok(total / subgroup_order(&norms, p, k)?)
}

/// Norm image index, recomputed at increasing precision until two
/// consecutive precisions agree.
pub fn norm_image_index(field: &AbelianFieldSpec, p: u64, policy: &PrecisionPolicy) -> Result<u64> {
    if field.is_rational() {
        return Ok(1);
    }
    let (index, _) = policy.stabilize(p, 1, 3, |k| k + 1, |k| norm_image_index_at(field, p, k))?;
    Ok(index)
}

/// Norm image index by enumerating every unit of `O/p^k`.
///
/// Intended as an oracle; stops as soon as every residue class is hit.
pub fn norm_image_index_exhaustive(field: &AbelianFieldSpec, p: u64, k: u32) -> Result<u64> {
    let ring = LocalRing::for_field(field, p, k)?;
    let m = ring.modulus;
    let n = ring.degree() as u32;
    let size = m
        .checked_pow(n)
        .ok_or_else(|| Error::Unsupported(format!("cannot enumerate {m}^{n} ring elements")))?;
    let total = euler_phi(m);
    let mut hit = vec![false; m as usize];
    let mut count = 0u64;
    for idx in 0..size {
        let e = residue_element(idx, m, n as usize);
        let nm = ring.norm(&e);
        if nm % p != 0 && !hit[nm as usize] {
            hit[nm as usize] = true;
            count += 1;
            if count == total {
                break;
            }
        }
    }
    Ok(total / count)
}

/// `[Z_p^× : 1 + p^m Z_p]`.
pub fn scaling_index_closed_form(p: u64, m: u32) -> u64 {
    if m == 0 {
        1
    } else {
        (p - 1) * p.pow(m - 1)
    }
}

/// One local block of a torus at `p`: a unit group and the character slot it feeds.
#[derive(Clone, Debug)]
pub struct LocalBlock {
    pub factor: usize,
    pub slot: Option<usize>,
    pub group: LocalUnitGroup,
}

/// The maximal compact subgroup of `T(Q_p)` as a product of unit groups.
pub fn torus_blocks(torus: &TorusSpec, p: u64, k: u32) -> Result<Vec<LocalBlock>> {
    let mut blocks = Vec::new();
    let mut slot = 0;
    for (fi, factor) in torus.factors().iter().enumerate() {
        match factor {
            TorusFactor::Split(r) => {
                for _ in 0..*r {
                    let group = unit_group_generators(&AbelianFieldSpec::rational(), p, k)?;
                    blocks.push(LocalBlock { factor: fi, slot: Some(slot), group });
                    slot += 1;
                }
            }
            TorusFactor::WeilRestriction(f) => {
                let group = unit_group_generators(f, p, k)?;
                blocks.push(LocalBlock { factor: fi, slot: Some(slot), group });
                slot += 1;
            }
            TorusFactor::NormOne(f) => {
                let group = norm_one_generators(f, p, k)?;
                blocks.push(LocalBlock { factor: fi, slot: None, group });
            }
        }
    }
    Ok(blocks)
}

fn signed_pow(x: u64, e: i64, m: u64) -> Result<u64> {
    let base = if e < 0 {
        inv_mod(x, m).ok_or_else(|| Error::Invalid("character value is not a unit".into()))?
    } else {
        x
    };
    Ok(pow_mod(base, e.unsigned_abs(), m))
}

/// `χ(t)` modulo `modulus` for `t` supported on a single block.
fn character_value(block: &LocalBlock, chi: &CharacterSpec, g: &[u64], modulus: u64) -> Result<u64> {
    let e = block.slot.map_or(0, |s| chi.exponents()[s]);
    if e == 0 {
        return Ok(1 % modulus);
    }
    let nm = block.group.ring.norm(g) % modulus;
    signed_pow(nm, e, modulus)
}

/// Image of the maximal compact subgroup under `χ`, inside `(Z/p^k)^×`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterImage {
    pub modulus: u64,
    pub generators: Vec<u64>,
    pub order: u64,
    pub index: u64,
}

pub fn character_image(torus: &TorusSpec, chi: &CharacterSpec, p: u64, k: u32) -> Result<CharacterImage> {
    chi.check(torus)?;
    let blocks = torus_blocks(torus, p, k)?;
    let modulus = checked_prime_power(p, k).ok_or(Error::PrecisionNotStabilized { p, k_max: k })?;
    let mut generators = Vec::new();
    for b in &blocks {
        for g in &b.group.generators {
            let v = character_value(b, chi, g, modulus)?;
            if v != 1 % modulus && !generators.contains(&v) {
                generators.push(v);
            }
        }
    }
    let order = subgroup_order(&generators, p, k)?;
    Ok(CharacterImage { modulus, generators, order, index: euler_phi(modulus) / order })
}

/// The congruence `χ(t) ≡ 1 mod p^depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterConstraint {
    pub character: CharacterSpec,
    pub depth: u32,
}

fn scalar_image_size(
    blocks: &[LocalBlock],
    constraints: &[CharacterConstraint],
    p: u64,
    level_depth: u32,
) -> Result<u64> {
    let active: Vec<(&CharacterConstraint, u64)> = constraints
        .iter()
        .filter(|c| c.depth > 0)
        .map(|c| Ok((c, checked_prime_power(p, c.depth).ok_or(Error::PrecisionNotStabilized { p, k_max: c.depth })?)))
        .collect::<Result<_>>()?;
    if active.is_empty() {
        return Ok(1);
    }
    let mut images = Vec::new();
    for b in blocks {
        if b.slot.is_none() {
            continue;
        }
        for g in b.group.congruence_generators(level_depth)? {
            let img = active
                .iter()
                .map(|(c, m)| character_value(b, &c.character, &g, *m))
                .collect::<Result<Vec<u64>>>()?;
            images.push(img);
        }
    }
    let depths: Vec<u32> = active.iter().map(|(c, _)| c.depth).collect();
    image_order(p, &depths, &images)
}

fn check_constraints(torus: &TorusSpec, constraints: &[CharacterConstraint]) -> Result<()> {
    constraints.iter().try_for_each(|c| c.character.check(torus))
}

/// `[K^max : {t ≡ 1 mod p^level_depth, χ_i(t) ≡ 1 mod p^{m_i}}]` with the
/// unit tables built at precision `k`.
pub fn stabilizer_index_at(
    torus: &TorusSpec,
    constraints: &[CharacterConstraint],
    level_depth: u32,
    p: u64,
    k: u32,
) -> Result<u64> {
    check_constraints(torus, constraints)?;
    let needed = constraints.iter().map(|c| c.depth).chain([level_depth]).max().unwrap_or(0);
    if needed == 0 {
        return Ok(1);
    }
    if k < needed {
        return Err(Error::Invalid(format!("precision {k} is below the required depth {needed}")));
    }
    let blocks = torus_blocks(torus, p, k)?;
    let mut level = 1u64;
    for b in &blocks {
        level = level
            .checked_mul(b.group.congruence_index(level_depth)?)
            .ok_or_else(|| Error::Unsupported("stabilizer index exceeds 64 bits".into()))?;
    }
    let scalar = scalar_image_size(&blocks, constraints, p, level_depth)?;
    level.checked_mul(scalar).ok_or_else(|| Error::Unsupported("stabilizer index exceeds 64 bits".into()))
}

/// The same index by one orbit enumeration over the joint image, without
/// splitting off the level part. Slow; used as an oracle.
pub fn stabilizer_index_bfs(
    torus: &TorusSpec,
    constraints: &[CharacterConstraint],
    level_depth: u32,
    p: u64,
    k: u32,
) -> Result<u64> {
    check_constraints(torus, constraints)?;
    let blocks = torus_blocks(torus, p, k)?;
    let scalar: Vec<(&CharacterConstraint, u64)> = constraints
        .iter()
        .filter(|c| c.depth > 0)
        .map(|c| (c, checked_prime_power(p, c.depth).expect("depth below precision")))
        .collect();
    let low: Vec<LocalRing> = if level_depth > 0 {
        blocks.iter().map(|b| b.group.ring.at_precision(level_depth)).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let width = scalar.len() + low.iter().map(LocalRing::degree).sum::<usize>();
    if width == 0 {
        return Ok(1);
    }
    let mut start: Vec<u64> = scalar.iter().map(|(_, m)| 1 % m).collect();
    for r in &low {
        start.extend(r.one());
    }
    let mut images = Vec::new();
    for (bi, b) in blocks.iter().enumerate() {
        for g in &b.group.generators {
            let mut img = scalar
                .iter()
                .map(|(c, m)| character_value(b, &c.character, g, *m))
                .collect::<Result<Vec<u64>>>()?;
            for (ri, r) in low.iter().enumerate() {
                if ri == bi {
                    img.extend(r.reduce(g));
                } else {
                    img.extend(r.one());
                }
            }
            images.push(img);
        }
    }
    let mul = |a: &[u64], b: &[u64]| {
        let mut out: Vec<u64> = scalar.iter().enumerate().map(|(i, (_, m))| mul_mod(a[i], b[i], *m)).collect();
        let mut off = scalar.len();
        for r in &low {
            let n = r.degree();
            out.extend(r.mul(&a[off..off + n], &b[off..off + n]));
            off += n;
        }
        out
    };
    Ok(orbit_size(start, &images, mul)? as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StabilizerIndex {
    pub index: u64,
    /// Precision at which the value was first observed stable.
    pub precision: u32,
}

/// Stabilizer index under the precision policy: start at `max depth + 2`,
/// double until two consecutive precisions agree.
pub fn stabilizer_index(
    torus: &TorusSpec,
    constraints: &[CharacterConstraint],
    level_depth: u32,
    p: u64,
    policy: &PrecisionPolicy,
) -> Result<StabilizerIndex> {
    check_constraints(torus, constraints)?;
    let depth = constraints.iter().map(|c| c.depth).chain([level_depth]).max().unwrap_or(0);
    if depth == 0 {
        return Ok(StabilizerIndex { index: 1, precision: 0 });
    }
    let (index, precision) = policy.stabilize(p, depth, depth + 2, |k| 2 * k, |k| {
        stabilizer_index_at(torus, constraints, level_depth, p, k)
    })?;
    Ok(StabilizerIndex { index, precision })
}

/// Least `d` such that `{t ≡ 1 mod p^d}` satisfies every constraint.
pub fn required_level_depth(torus: &TorusSpec, constraints: &[CharacterConstraint], p: u64) -> Result<u32> {
    check_constraints(torus, constraints)?;
    let depth = constraints.iter().map(|c| c.depth).max().unwrap_or(0);
    if depth == 0 {
        return Ok(0);
    }
    let blocks = torus_blocks(torus, p, depth + 1)?;
    for d in 0..depth {
        if scalar_image_size(&blocks, constraints, p, d)? == 1 {
            return Ok(d);
        }
    }
    Ok(depth)
}
