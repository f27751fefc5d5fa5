//! Defect primes, test invariants, bound values and the sequence classifier.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{biguint_pow, rational_to_f64, valuation_rational};
use crate::error::{Error, Result};
use crate::exactalg::{
    hnf, in_rational_span, order_in_lattice, p_order_in_lattice, rational_inverse, snf, IntegerMatrix, LocalLattices,
    QLattice, QVector,
};
use crate::fields::{quadratic_discriminant, real_quadratic_class_number, quadratic_class_number, AbelianFieldSpec, FieldCache};
use crate::heisenberg::{HeisenbergElement, PolarizationForm};
use crate::localtori::{required_level_depth, stabilizer_index, CharacterConstraint, PrecisionPolicy};
use crate::torus::{CharacterSpec, TorusFactor, TorusSpec};

/// The constants `b, c_N, c₀` and the exponent `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundConstants {
    pub b: BigRational,
    pub c_n: BigRational,
    pub c0: BigRational,
    pub n: u32,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants { b: BigRational::one(), c_n: BigRational::one(), c0: BigRational::one(), n: 2 }
    }
}

impl BoundConstants {
    pub fn new(b: BigRational, c_n: BigRational, c0: BigRational, n: u32) -> Result<Self> {
        for (name, x) in [("b", &b), ("cN", &c_n), ("c0", &c0)] {
            if !x.is_positive() {
                return Err(Error::Invalid(format!("constant {name} must be positive")));
            }
        }
        if n == 0 {
            return Err(Error::Invalid("constant N must be a positive integer".into()));
        }
        Ok(BoundConstants { b, c_n, c0, n })
    }
}

#[derive(Clone, Debug, Default)]
pub struct EvalConfig {
    pub constants: BoundConstants,
    pub policy: PrecisionPolicy,
    pub cache: Option<Arc<FieldCache>>,
}

/// Coordinates of `W` (flat `u ++ v` indices) on which the torus acts by one character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionBlock {
    pub coords: Vec<usize>,
    pub character: CharacterSpec,
}

/// Blocks merged by character.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterGroup {
    pub character: CharacterSpec,
    pub coords: Vec<usize>,
    pub blocks: Vec<usize>,
}

/// Merge blocks carrying the same character, in order of first appearance.
pub fn decompose_scaling(action: &[ActionBlock]) -> Result<Vec<CharacterGroup>> {
    let mut groups: Vec<CharacterGroup> = Vec::new();
    for (bi, block) in action.iter().enumerate() {
        if block.character.is_trivial() {
            return Err(Error::TrivialSubrepresentation(block.coords.clone()));
        }
        match groups.iter_mut().find(|g| g.character == block.character) {
            Some(g) => {
                g.coords.extend(&block.coords);
                g.blocks.push(bi);
            }
            None => groups.push(CharacterGroup {
                character: block.character.clone(),
                coords: block.coords.clone(),
                blocks: vec![bi],
            }),
        }
    }
    for g in &mut groups {
        g.coords.sort_unstable();
    }
    Ok(groups)
}

/// Level data at one prime: a lattice for `K_{W,p}` (standard if absent) and
/// the congruence depth of `K_{T,p}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelException {
    pub lattice: Option<QLattice>,
    pub depth: u32,
}

/// A level of fine product type: maximal away from finitely many primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSpec {
    dim: usize,
    exceptions: BTreeMap<u64, LevelException>,
}

impl LevelSpec {
    pub fn maximal(dim: usize) -> Self {
        LevelSpec { dim, exceptions: BTreeMap::new() }
    }

    pub fn with_exception(mut self, p: u64, lattice: Option<QLattice>, depth: u32) -> Result<Self> {
        if !crate::arith::is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if let Some(l) = &lattice {
            if l.dim() != self.dim {
                return Err(Error::DimensionMismatch(format!("lattice at {p} has rank {} but dim W = {}", l.dim(), self.dim)));
            }
        }
        let lattice = lattice.filter(|l| !l.is_standard());
        if lattice.is_none() && depth == 0 {
            self.exceptions.remove(&p);
        } else {
            self.exceptions.insert(p, LevelException { lattice, depth });
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, LevelException> {
        &self.exceptions
    }

    pub fn depth_at(&self, p: u64) -> u32 {
        self.exceptions.get(&p).map_or(0, |e| e.depth)
    }

    pub fn lattices(&self) -> LocalLattices {
        let mut l = LocalLattices::standard(self.dim);
        for (&p, e) in &self.exceptions {
            if let Some(lat) = &e.lattice {
                l.exceptions.insert(p, lat.clone());
            }
        }
        l
    }

    pub fn is_maximal(&self) -> bool {
        self.exceptions.is_empty()
    }
}

/// One special-subvariety instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubvarietyDatum {
    torus: TorusSpec,
    psi: PolarizationForm,
    action: Vec<ActionBlock>,
    w: HeisenbergElement,
    w_prime: Option<Vec<QVector>>,
    groups: Vec<CharacterGroup>,
}

impl SubvarietyDatum {
    pub fn new(
        torus: TorusSpec,
        psi: PolarizationForm,
        action: Vec<ActionBlock>,
        w: HeisenbergElement,
        w_prime: Option<Vec<QVector>>,
    ) -> Result<Self> {
        let dim = psi.dim_w();
        if w.u.len() != psi.dim_u() || w.v.len() != psi.dim_v() {
            return Err(Error::DimensionMismatch("w does not match the shape of psi".into()));
        }
        let mut seen = vec![false; dim];
        for b in &action {
            b.character.check(&torus)?;
            if b.coords.is_empty() {
                return Err(Error::Invalid("empty action block".into()));
            }
            for &c in &b.coords {
                if c >= dim || seen[c] {
                    return Err(Error::Invalid(format!("action blocks do not partition the {dim} coordinates of W (coordinate {c})")));
                }
                seen[c] = true;
            }
        }
        if let Some(c) = seen.iter().position(|s| !s) {
            return Err(Error::Invalid(format!("coordinate {c} of W lies in no action block")));
        }
        if let Some(basis) = &w_prime {
            if basis.iter().any(|b| b.len() != dim) {
                return Err(Error::DimensionMismatch(format!("W' basis vectors must have length {dim}")));
            }
        }
        let groups = decompose_scaling(&action)?;
        let datum = SubvarietyDatum { torus, psi, action, w, w_prime, groups };
        datum.check_equivariance()?;
        datum.check_subspace()?;
        Ok(datum)
    }

    pub fn torus(&self) -> &TorusSpec {
        &self.torus
    }

    pub fn psi(&self) -> &PolarizationForm {
        &self.psi
    }

    pub fn action(&self) -> &[ActionBlock] {
        &self.action
    }

    pub fn w(&self) -> &HeisenbergElement {
        &self.w
    }

    pub fn w_prime(&self) -> Option<&[QVector]> {
        self.w_prime.as_deref()
    }

    pub fn groups(&self) -> &[CharacterGroup] {
        &self.groups
    }

    pub fn dim_w(&self) -> usize {
        self.psi.dim_w()
    }

    /// The same datum with `w` replaced.
    pub fn with_w(&self, w: HeisenbergElement) -> Result<Self> {
        if w.u.len() != self.psi.dim_u() || w.v.len() != self.psi.dim_v() {
            return Err(Error::DimensionMismatch("w does not match the shape of psi".into()));
        }
        Ok(SubvarietyDatum { w, ..self.clone() })
    }

    fn character_of(&self, coord: usize) -> &CharacterSpec {
        &self.action.iter().find(|b| b.coords.contains(&coord)).expect("blocks partition W").character
    }

    /// Each term `ψ_k(v_i, v_j)` must pair two coordinates of one character
    /// `χ` into a U-coordinate of character `2χ`.
    fn check_equivariance(&self) -> Result<()> {
        let du = self.psi.dim_u();
        for (k, i, j, _) in self.psi.nonzero_entries() {
            let (ci, cj, ck) = (self.character_of(du + i), self.character_of(du + j), self.character_of(k));
            if ci != cj {
                return Err(Error::IncompatiblePolarization(format!(
                    "psi pairs v{i} and v{j}, which carry different characters"
                )));
            }
            if *ck != ci.add(cj) {
                return Err(Error::IncompatiblePolarization(format!(
                    "psi sends (v{i}, v{j}) to u{k}, whose character is not the sum"
                )));
            }
        }
        Ok(())
    }

    fn check_subspace(&self) -> Result<()> {
        let Some(basis) = &self.w_prime else { return Ok(()) };
        for b in basis {
            for g in &self.groups {
                if !in_rational_span(basis, &project(b, &g.coords)) {
                    return Err(Error::SubspaceNotStable);
                }
            }
        }
        // normal in W, so the coset W'·w is the flat w + W'
        let (du, dv) = (self.psi.dim_u(), self.psi.dim_v());
        for b in basis {
            let bv = &b[du..];
            for j in 0..dv {
                let mut e = vec![BigRational::zero(); dv];
                e[j] = BigRational::one();
                let mut c = self.psi.apply(&e, bv);
                c.resize(du + dv, BigRational::zero());
                if !in_rational_span(basis, &c) {
                    return Err(Error::Invalid("W' is not a normal subgroup of W".into()));
                }
            }
        }
        Ok(())
    }

    /// Compatibility of the level with the action and the group law.
    pub fn check_level(&self, level: &LevelSpec) -> Result<()> {
        if level.dim() != self.dim_w() {
            return Err(Error::DimensionMismatch(format!("level has dim {} but dim W = {}", level.dim(), self.dim_w())));
        }
        let (du, dv) = (self.psi.dim_u(), self.psi.dim_v());
        if let Some((k, i, j, _)) = self.psi.nonzero_entries().find(|(_, _, _, x)| !x.is_integer()) {
            return Err(Error::IncompatiblePolarization(format!(
                "psi({i},{j}) component {k} is not integral, so Z^n is not a subgroup"
            )));
        }
        for (&p, e) in level.exceptions() {
            let Some(lat) = &e.lattice else { continue };
            for b in lat.basis() {
                for g in &self.groups {
                    if !lat.contains_at(&project(b, &g.coords), p)? {
                        return Err(Error::LatticeNotBlockCompatible(p));
                    }
                }
            }
            for a in lat.basis() {
                for b in lat.basis() {
                    let mut c = self.psi.apply(&a[du..du + dv], &b[du..du + dv]);
                    c.resize(du + dv, BigRational::zero());
                    if !lat.contains_at(&c, p)? {
                        return Err(Error::IncompatiblePolarization(format!(
                            "psi of the lattice at {p} leaves the lattice"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn project(v: &[BigRational], coords: &[usize]) -> QVector {
    let mut out = vec![BigRational::zero(); v.len()];
    for &c in coords {
        out[c] = v[c].clone();
    }
    out
}

fn restrict(v: &[BigRational], coords: &[usize]) -> QVector {
    coords.iter().map(|&c| v[c].clone()).collect()
}

/// `|disc|` of the compositum of the splitting fields of the factors.
pub fn splitting_discriminant(torus: &TorusSpec, cache: Option<&FieldCache>) -> Result<BigUint> {
    let fields: Vec<AbelianFieldSpec> = torus.factors().iter().map(TorusFactor::splitting_field).collect();
    let f = AbelianFieldSpec::compositum(&fields)?;
    Ok(match cache {
        Some(c) => c.discriminant(&f),
        None => crate::fields::abelian_field_discriminant(&f),
    })
}

/// Per-prime stabilizer data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeData {
    pub p: u64,
    /// p-order of `w` on each character group.
    pub depths: Vec<u32>,
    pub level_depth: u32,
    /// `[K^max : K_T(w)_p]`, level included.
    pub index_full: u64,
    /// `[K^max : K_{T,p}]`.
    pub index_level: u64,
}

impl PrimeData {
    pub fn in_delta(&self) -> bool {
        self.index_full > 1
    }

    pub fn caused_by_w(&self) -> bool {
        self.index_full > self.index_level
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectSets {
    /// Δ: primes where `T(Q_p) ∩ K_G(w)_p` is proper in `K^max`.
    pub delta: Vec<u64>,
    /// δ ⊆ Δ: primes where `w` itself shrinks the stabilizer below `K_{T,p}`.
    pub delta_w: Vec<u64>,
    pub primes: Vec<PrimeData>,
}

fn candidate_primes(w: &[BigRational], level: &LevelSpec) -> Result<Vec<u64>> {
    level.lattices().candidate_primes(w).map(|mut v| {
        v.extend(level.exceptions().keys());
        v.sort_unstable();
        v.dedup();
        v
    })
}

fn group_depths(datum: &SubvarietyDatum, lattices: &LocalLattices, w: &[BigRational], p: u64) -> Result<Vec<u32>> {
    datum
        .groups
        .iter()
        .map(|g| p_order_in_lattice(&project(w, &g.coords), lattices.at(p), p))
        .collect()
}

fn constraints_for(datum: &SubvarietyDatum, depths: &[u32]) -> Vec<CharacterConstraint> {
    datum
        .groups
        .iter()
        .zip(depths)
        .filter(|(_, &m)| m > 0)
        .map(|(g, &m)| CharacterConstraint { character: g.character.clone(), depth: m })
        .collect()
}

fn prime_data(
    datum: &SubvarietyDatum,
    level: &LevelSpec,
    lattices: &LocalLattices,
    w: &[BigRational],
    p: u64,
    policy: &PrecisionPolicy,
) -> Result<PrimeData> {
    let depths = group_depths(datum, lattices, w, p)?;
    let level_depth = level.depth_at(p);
    let constraints = constraints_for(datum, &depths);
    let index_full = stabilizer_index(&datum.torus, &constraints, level_depth, p, policy)?.index;
    let index_level = stabilizer_index(&datum.torus, &[], level_depth, p, policy)?.index;
    Ok(PrimeData { p, depths, level_depth, index_full, index_level })
}

fn defects_at(datum: &SubvarietyDatum, level: &LevelSpec, w: &[BigRational], policy: &PrecisionPolicy) -> Result<DefectSets> {
    datum.check_level(level)?;
    let lattices = level.lattices();
    let primes = candidate_primes(w, level)?
        .into_iter()
        .map(|p| prime_data(datum, level, &lattices, w, p, policy))
        .collect::<Result<Vec<_>>>()?;
    let delta = primes.iter().filter(|d| d.in_delta()).map(|d| d.p).collect();
    let delta_w = primes.iter().filter(|d| d.caused_by_w()).map(|d| d.p).collect();
    Ok(DefectSets { delta, delta_w, primes })
}

/// Δ and δ at the datum's own `w`.
pub fn defect_primes(datum: &SubvarietyDatum, level: &LevelSpec, policy: &PrecisionPolicy) -> Result<DefectSets> {
    defects_at(datum, level, &datum.w.flat(), policy)
}

/// `I_p = b·[K^max : K_T(w)_p]` at the datum's `w`.
pub fn unipotent_index(datum: &SubvarietyDatum, level: &LevelSpec, p: u64, cfg: &EvalConfig) -> Result<BigRational> {
    datum.check_level(level)?;
    let d = prime_data(datum, level, &level.lattices(), &datum.w.flat(), p, &cfg.policy)?;
    Ok(&cfg.constants.b * BigRational::from_integer(d.index_full.into()))
}

fn integer_columns(cols: &[QVector], rows: usize) -> IntegerMatrix {
    let scaled: Vec<Vec<BigInt>> = cols
        .iter()
        .map(|c| {
            let l = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            c.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    let table: Vec<Vec<BigInt>> = (0..rows).map(|i| scaled.iter().map(|c| c[i].clone()).collect()).collect();
    IntegerMatrix::from_rows(&table).expect("rectangular")
}

fn int_times(m: &IntegerMatrix, v: &[BigRational]) -> QVector {
    (0..m.rows())
        .map(|i| (0..m.cols()).fold(BigRational::zero(), |acc, j| acc + BigRational::from_integer(m[(i, j)].clone()) * &v[j]))
        .collect()
}

fn rows_times(rows: &[QVector], v: &[BigRational]) -> QVector {
    rows.iter().map(|r| r.iter().zip(v).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)).collect()
}

fn int_inverse_rows(m: &IntegerMatrix) -> Vec<QVector> {
    let cols: Vec<QVector> =
        (0..m.cols()).map(|j| m.column(j).into_iter().map(BigRational::from_integer).collect()).collect();
    rational_inverse(&cols).expect("unimodular")
}

/// A basis (columns) of the projection of a lattice onto some coordinates.
fn projected_lattice(lat: &QLattice, coords: &[usize]) -> Vec<QVector> {
    let gens: Vec<QVector> = lat.basis().iter().map(|b| restrict(b, coords)).collect();
    let den = gens.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scale = BigRational::from_integer(den.clone());
    let m = integer_columns(&gens.iter().map(|g| g.iter().map(|x| x * &scale).collect()).collect::<Vec<_>>(), coords.len());
    // integer_columns rescales each column by its own denominators; these are already integral
    let h = hnf(&m);
    (0..coords.len())
        .map(|j| h.column(j).into_iter().map(|x| BigRational::new(x, den.clone())).collect())
        .collect()
}

/// `(U, s)` from the Smith form of the columns spanning `span`: the first
/// `s` columns of `U^{-1}` form a saturated basis of the span.
fn adapted_basis(span: &[QVector], n: usize) -> (IntegerMatrix, usize) {
    let m = integer_columns(span, n);
    let sf = snf(&m);
    let s = sf.diagonal.iter().filter(|d| !d.is_zero()).count();
    (sf.u, s)
}

fn reduce_rational_mod(q: &BigRational, modulus: &BigInt) -> BigInt {
    let den = q.denom().mod_floor(modulus);
    let inv = den.extended_gcd(modulus).x.mod_floor(modulus);
    (q.numer() * inv).mod_floor(modulus)
}

/// `X/D` congruent to each target `τ_p` modulo `p^{a_p}Z_p`, integral at every other prime.
fn crt_rationals(targets: &[(u64, u32, BigRational)]) -> BigRational {
    let b: Vec<u32> = targets
        .iter()
        .map(|(p, _, t)| valuation_rational(t, *p).map_or(0, |v| (-v).max(0) as u32))
        .collect();
    let d = targets.iter().zip(&b).fold(BigInt::one(), |acc, ((p, _, _), &bp)| acc * num_traits::pow(BigInt::from(*p), bp as usize));
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for ((p, a, t), &bp) in targets.iter().zip(&b) {
        let m = num_traits::pow(BigInt::from(*p), (*a + bp) as usize);
        if m.is_one() {
            continue;
        }
        let r = reduce_rational_mod(&(t * BigRational::from_integer(d.clone())), &m);
        // x ≡ current mod modulus, x ≡ r mod m
        let inv = modulus.extended_gcd(&m).x.mod_floor(&m);
        let k = ((&r - &x) * inv).mod_floor(&m);
        x += &modulus * k;
        modulus *= &m;
    }
    BigRational::new(x, d)
}

/// Shift `x ∈ S` (coordinates of one group) minimizing every p-order of `w_G + x`.
fn minimize_group(wg: &[BigRational], span: &[QVector], exceptions: &[(u64, Vec<QVector>)]) -> QVector {
    let n = wg.len();
    if span.is_empty() {
        return vec![BigRational::zero(); n];
    }
    let (u, s) = adapted_basis(span, n);
    if s == 0 {
        return vec![BigRational::zero(); n];
    }
    let u_inv = int_inverse_rows(&u);
    let y = int_times(&u, wg);
    let xi_default: Vec<BigRational> = y[..s].iter().map(|c| -c).collect();
    // ξ = ξ_default + η, with η integral away from the exception primes
    let mut targets: Vec<Vec<(u64, u32, BigRational)>> = vec![Vec::new(); s];
    let basis_s: Vec<QVector> = (0..s).map(|j| u_inv.iter().map(|row| row[j].clone()).collect()).collect();
    for (p, lat_cols) in exceptions {
        let p_inv = rational_inverse(lat_cols).expect("lattice basis invertible");
        let c = rows_times(&p_inv, wg);
        let s_local: Vec<QVector> = basis_s.iter().map(|b| rows_times(&p_inv, b)).collect();
        let (up, sp) = adapted_basis(&s_local, n);
        debug_assert_eq!(sp, s);
        let up_inv = int_inverse_rows(&up);
        let mut yp = int_times(&up, &c);
        for x in yp.iter_mut().take(s) {
            *x = BigRational::zero();
        }
        let c_min = rows_times(&up_inv, &yp);
        let w_min: QVector =
            (0..n).map(|i| lat_cols.iter().zip(&c_min).fold(BigRational::zero(), |acc, (col, x)| acc + &col[i] * x)).collect();
        let shift: QVector = w_min.iter().zip(wg).map(|(a, b)| a - b).collect();
        let xi_p = int_times(&u, &shift);
        let a = p_inv.iter().flatten().filter_map(|x| valuation_rational(x, *p)).min().map_or(0, |v| (-v).max(0) as u32);
        for i in 0..s {
            targets[i].push((*p, a, &xi_p[i] - &xi_default[i]));
        }
    }
    let xi: Vec<BigRational> = targets.iter().zip(&xi_default).map(|(t, x0)| x0 + crt_rationals(t)).collect();
    (0..n).map(|i| basis_s.iter().zip(&xi).fold(BigRational::zero(), |acc, (b, x)| acc + &b[i] * x)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetMinimum {
    pub w_prime: HeisenbergElement,
    /// `(p, m_p)` for `w′`, primes ascending, `m_p > 0`.
    pub orders: Vec<(u64, u32)>,
}

/// A representative of `W′·w` minimizing, at every prime and on every
/// character group, the p-order relative to the level lattice.
pub fn minimize_over_coset(datum: &SubvarietyDatum, level: &LevelSpec) -> Result<CosetMinimum> {
    datum.check_level(level)?;
    let lattices = level.lattices();
    let mut flat = datum.w.flat();
    if let Some(basis) = &datum.w_prime {
        for g in &datum.groups {
            let span: Vec<QVector> = basis.iter().map(|b| restrict(b, &g.coords)).filter(|v| v.iter().any(|x| !x.is_zero())).collect();
            let exceptions: Vec<(u64, Vec<QVector>)> =
                lattices.exceptions.iter().map(|(&p, lat)| (p, projected_lattice(lat, &g.coords))).collect();
            let wg = restrict(&flat, &g.coords);
            let shift = minimize_group(&wg, &span, &exceptions);
            for (&c, x) in g.coords.iter().zip(shift) {
                flat[c] += x;
            }
        }
    }
    let orders = lattices.p_orders(&flat)?;
    Ok(CosetMinimum { w_prime: HeisenbergElement::from_flat(&flat, datum.psi.dim_u()), orders })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub value: f64,
    /// `D(T) = 1`, so `(log D)^N = 0`.
    pub degenerate: bool,
    /// `∏_{p∈Δ} max{1, I_p}`.
    pub product: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpperBound {
    pub class_number: u64,
    pub order: BigUint,
    pub exponent: u64,
    pub exact: BigRational,
}

impl UpperBound {
    pub fn value(&self) -> f64 {
        rational_to_f64(&self.exact)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub discriminant: BigUint,
    /// Defect data at the minimizing `w′`.
    pub defects: DefectSets,
    /// `I_p` for `p ∈ Δ(w′)`, in the order of `defects.delta`.
    pub indices: Vec<(u64, BigRational)>,
    pub tau: BigRational,
    pub minimum: CosetMinimum,
    pub lower: LowerBound,
    /// `None` when no class-number rule or override applies.
    pub upper: Option<UpperBound>,
}

fn delta_product(defects: &DefectSets, b: &BigRational) -> (BigRational, Vec<(u64, BigRational)>) {
    let mut product = BigRational::one();
    let mut indices = Vec::new();
    for d in defects.primes.iter().filter(|d| d.in_delta()) {
        let ip = b * BigRational::from_integer(d.index_full.into());
        product *= if ip > BigRational::one() { ip.clone() } else { BigRational::one() };
        indices.push((d.p, ip));
    }
    (product, indices)
}

fn discriminant(torus: &TorusSpec, cfg: &EvalConfig) -> Result<BigUint> {
    splitting_discriminant(torus, cfg.cache.as_deref())
}

/// `τ = D(T)·∏_{p∈Δ(w′)} max{1, I_p}` at the coset minimum, with all intermediates.
pub fn test_invariant(datum: &SubvarietyDatum, level: &LevelSpec, cfg: &EvalConfig) -> Result<InvariantReport> {
    let minimum = minimize_over_coset(datum, level)?;
    let defects = defects_at(datum, level, &minimum.w_prime.flat(), &cfg.policy)?;
    let disc = discriminant(&datum.torus, cfg)?;
    let (product, indices) = delta_product(&defects, &cfg.constants.b);
    let tau = BigRational::from_integer(BigInt::from(disc.clone())) * product;
    let lower = lower_bound(datum, level, cfg)?;
    let upper = match upper_bound(datum, level, cfg) {
        Ok(u) => Some(u),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(InvariantReport { discriminant: disc, defects, indices, tau, minimum, lower, upper })
}

/// `c_N·(log D)^N·∏_{p∈Δ(w)} max{1, I_p}` at the datum's `w`.
pub fn lower_bound(datum: &SubvarietyDatum, level: &LevelSpec, cfg: &EvalConfig) -> Result<LowerBound> {
    let defects = defect_primes(datum, level, &cfg.policy)?;
    let disc = discriminant(&datum.torus, cfg)?;
    let (product, _) = delta_product(&defects, &cfg.constants.b);
    if disc.is_one() {
        return Ok(LowerBound { value: 0.0, degenerate: true, product });
    }
    let ln_d = disc.to_f64().map_or(f64::INFINITY, f64::ln);
    let value = rational_to_f64(&cfg.constants.c_n) * ln_d.powi(cfg.constants.n as i32) * rational_to_f64(&product);
    Ok(LowerBound { value, degenerate: false, product })
}

fn class_number_of_factor(factor: &TorusFactor, cache: Option<&FieldCache>) -> Option<Result<u64>> {
    let field = match factor {
        TorusFactor::Split(_) => return Some(Ok(1)),
        TorusFactor::WeilRestriction(f) => f,
        TorusFactor::NormOne(_) => return None,
    };
    if field.is_rational() {
        return Some(Ok(1));
    }
    let d = quadratic_discriminant(field)?;
    if d > 200 {
        return None;
    }
    Some(match cache {
        Some(c) => c.class_number(d),
        None if d < 0 => quadratic_class_number(d),
        None => real_quadratic_class_number(d, true),
    })
}

/// `#T(A_f)/T(Q)K^max`: a product of per-factor rules, or the user override
/// when some factor has no rule.
pub fn class_number_t(torus: &TorusSpec, cache: Option<&FieldCache>) -> Result<u64> {
    let mut h = 1u64;
    for f in torus.factors() {
        match class_number_of_factor(f, cache) {
            Some(r) => h *= r?,
            None => {
                return torus.class_number_override().ok_or_else(|| {
                    Error::Unsupported(format!("no class-number rule for factor {f} and no override given"))
                })
            }
        }
    }
    Ok(h)
}

/// `c₀·C(T)·ord(w)^{(dim W)²}`.
pub fn upper_bound(datum: &SubvarietyDatum, level: &LevelSpec, cfg: &EvalConfig) -> Result<UpperBound> {
    datum.check_level(level)?;
    let class_number = class_number_t(&datum.torus, cfg.cache.as_deref())?;
    let order = order_in_lattice(&datum.w.flat(), &level.lattices())?;
    let exponent = (datum.dim_w() * datum.dim_w()) as u64;
    let power = biguint_pow(&order, exponent);
    let exact = &cfg.constants.c0 * BigRational::from_integer(BigInt::from(power) * BigInt::from(class_number));
    Ok(UpperBound { class_number, order, exponent, exact })
}

/// Deepen the torus level at each prime so that every `w_α` stabilizes it.
pub fn intersect_levels(datum: &SubvarietyDatum, level: &LevelSpec, ws: &[HeisenbergElement]) -> Result<LevelSpec> {
    datum.check_level(level)?;
    let lattices = level.lattices();
    let mut out = level.clone();
    for w in ws {
        if w.u.len() != datum.psi.dim_u() || w.v.len() != datum.psi.dim_v() {
            return Err(Error::DimensionMismatch("w does not match the shape of psi".into()));
        }
        let flat = w.flat();
        for p in lattices.candidate_primes(&flat)? {
            let depths = group_depths(datum, &lattices, &flat, p)?;
            let need = required_level_depth(&datum.torus, &constraints_for(datum, &depths), p)?;
            let current = out.depth_at(p);
            if need > current {
                let lattice = out.exceptions.get(&p).and_then(|e| e.lattice.clone());
                out = out.with_exception(p, lattice, need)?;
            }
        }
    }
    Ok(out)
}

/// `(torus signature, w′ modulo Γ_W)`, with `w′` recorded by its local
/// fractional parts at the primes where it is not integral.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey {
    pub signature: String,
    pub local_parts: Vec<(u64, Vec<BigRational>)>,
}

/// The unique `r` with denominator a power of `p`, `0 ≤ r < 1`, and `q − r` p-integral.
fn p_fractional_part(q: &BigRational, p: u64) -> BigRational {
    let v = valuation_rational(q, p).unwrap_or(0);
    if v >= 0 {
        return BigRational::zero();
    }
    let pk = num_traits::pow(BigInt::from(p), (-v) as usize);
    let scaled = q * BigRational::from_integer(pk.clone());
    let r = reduce_rational_mod(&scaled, &pk);
    BigRational::new(r, pk)
}

pub fn class_key(datum: &SubvarietyDatum, level: &LevelSpec, w_prime: &HeisenbergElement) -> Result<ClassKey> {
    let lattices = level.lattices();
    let flat = w_prime.flat();
    let mut local_parts = Vec::new();
    for p in lattices.candidate_primes(&flat)? {
        let coords = lattices.at(p).coordinates(&flat)?;
        let parts: Vec<BigRational> = coords.iter().map(|c| p_fractional_part(c, p)).collect();
        if parts.iter().any(|x| !x.is_zero()) {
            local_parts.push((p, parts));
        }
    }
    Ok(ClassKey { signature: datum.torus.signature(), local_parts })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub taus: Vec<BigRational>,
    pub max_tau: Option<BigRational>,
    pub bounded: bool,
    pub classes: Vec<ClassKey>,
}

/// τ for every item, the bounded verdict `max τ ≤ C`, and the distinct classes.
pub fn classify_sequence(
    items: &[(SubvarietyDatum, LevelSpec)],
    threshold: &BigRational,
    cfg: &EvalConfig,
) -> Result<Classification> {
    let evaluated: Vec<(BigRational, ClassKey)> = items
        .par_iter()
        .map(|(datum, level)| {
            let report = test_invariant(datum, level, cfg)?;
            let key = class_key(datum, level, &report.minimum.w_prime)?;
            Ok((report.tau, key))
        })
        .collect::<Result<_>>()?;
    let taus: Vec<BigRational> = evaluated.iter().map(|(t, _)| t.clone()).collect();
    let max_tau = taus.iter().max().cloned();
    let bounded = max_tau.as_ref().is_none_or(|m| m <= threshold);
    let classes: BTreeSet<ClassKey> = evaluated.into_iter().map(|(_, k)| k).collect();
    Ok(Classification { taus, max_tau, bounded, classes: classes.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};

    fn split_datum(w: BigRational) -> SubvarietyDatum {
        SubvarietyDatum::new(
            TorusSpec::split(1),
            PolarizationForm::zero(1, 0),
            vec![ActionBlock { coords: vec![0], character: CharacterSpec::new(vec![1]) }],
            HeisenbergElement::new(vec![w], vec![]),
            None,
        )
        .unwrap()
    }

    fn weil_datum(d: i64) -> SubvarietyDatum {
        SubvarietyDatum::new(
            TorusSpec::weil(AbelianFieldSpec::quadratic(d).unwrap()),
            PolarizationForm::zero(1, 0),
            vec![ActionBlock { coords: vec![0], character: CharacterSpec::new(vec![1]) }],
            HeisenbergElement::identity(1, 0),
            None,
        )
        .unwrap()
    }

    #[test]
    fn grouping() {
        let chi = CharacterSpec::new(vec![1]);
        let chi2 = CharacterSpec::new(vec![2]);
        let action = vec![
            ActionBlock { coords: vec![0], character: chi.clone() },
            ActionBlock { coords: vec![1], character: chi.clone() },
            ActionBlock { coords: vec![2], character: chi2 },
        ];
        let groups = decompose_scaling(&action).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].coords, vec![0, 1]);
        assert_eq!(groups[1].coords, vec![2]);
        let bad = vec![ActionBlock { coords: vec![0], character: CharacterSpec::new(vec![0]) }];
        assert!(matches!(decompose_scaling(&bad), Err(Error::TrivialSubrepresentation(_))));
    }

    #[test]
    fn discriminants() {
        assert_eq!(splitting_discriminant(&TorusSpec::split(3), None).unwrap(), BigUint::one());
        let qi = TorusSpec::weil(AbelianFieldSpec::quadratic(-4).unwrap());
        assert_eq!(splitting_discriminant(&qi, None).unwrap(), BigUint::from(4u32));
        let both = TorusSpec::new(vec![
            TorusFactor::WeilRestriction(AbelianFieldSpec::quadratic(-4).unwrap()),
            TorusFactor::WeilRestriction(AbelianFieldSpec::quadratic(-3).unwrap()),
        ])
        .unwrap();
        assert_eq!(splitting_discriminant(&both, None).unwrap(), BigUint::from(144u32));
    }

    #[test]
    fn defects() {
        let policy = PrecisionPolicy::default();
        let d = defect_primes(&split_datum(rat(1, 6)), &LevelSpec::maximal(1), &policy).unwrap();
        // 2-order 1 costs nothing: every unit of Z_2 is ≡ 1 mod 2
        assert_eq!(d.primes.iter().map(|x| (x.p, x.index_full)).collect::<Vec<_>>(), vec![(2, 1), (3, 2)]);
        assert_eq!(d.delta, vec![3]);
        assert_eq!(d.delta_w, vec![3]);
        let d = defect_primes(&split_datum(rat(1, 12)), &LevelSpec::maximal(1), &policy).unwrap();
        assert_eq!(d.delta, vec![2, 3]);
        let d = defect_primes(&split_datum(rat_int(3)), &LevelSpec::maximal(1), &policy).unwrap();
        assert!(d.delta.is_empty() && d.delta_w.is_empty());
        let level = LevelSpec::maximal(1).with_exception(5, None, 1).unwrap();
        let d = defect_primes(&split_datum(rat_int(0)), &level, &policy).unwrap();
        assert_eq!(d.delta, vec![5]);
        assert!(d.delta_w.is_empty());
    }

    #[test]
    fn unipotent_indices() {
        let mut cfg = EvalConfig::default();
        let lvl = LevelSpec::maximal(1);
        assert_eq!(unipotent_index(&split_datum(rat(1, 3)), &lvl, 3, &cfg).unwrap(), rat_int(2));
        cfg.constants.b = rat_int(2);
        assert_eq!(unipotent_index(&split_datum(rat(1, 3)), &lvl, 3, &cfg).unwrap(), rat_int(4));
    }

    #[test]
    fn coset_minimum() {
        let mk = |basis: Option<Vec<QVector>>| {
            SubvarietyDatum::new(
                TorusSpec::split(1),
                PolarizationForm::zero(2, 0),
                vec![ActionBlock { coords: vec![0, 1], character: CharacterSpec::new(vec![1]) }],
                HeisenbergElement::new(vec![rat(1, 4), rat(1, 3)], vec![]),
                basis,
            )
            .unwrap()
        };
        let lvl = LevelSpec::maximal(2);
        let m = minimize_over_coset(&mk(Some(vec![vec![rat_int(1), rat_int(0)]])), &lvl).unwrap();
        assert_eq!(m.w_prime.u, vec![rat_int(0), rat(1, 3)]);
        assert_eq!(m.orders, vec![(3, 1)]);
        let m = minimize_over_coset(&mk(None), &lvl).unwrap();
        assert_eq!(m.w_prime.u, vec![rat(1, 4), rat(1, 3)]);
        let m = minimize_over_coset(&mk(Some(vec![vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]])), &lvl).unwrap();
        assert!(m.w_prime.is_identity());
        // along (1, 2) the class in Z^2/(1, 2) is 1/3 - 2/4 = -1/6
        let m = minimize_over_coset(&mk(Some(vec![vec![rat_int(1), rat_int(2)]])), &lvl).unwrap();
        assert_eq!(m.orders, vec![(2, 1), (3, 1)]);
    }

    #[test]
    fn coset_minimum_with_exceptional_lattice() {
        let datum = SubvarietyDatum::new(
            TorusSpec::split(1),
            PolarizationForm::zero(2, 0),
            vec![ActionBlock { coords: vec![0, 1], character: CharacterSpec::new(vec![1]) }],
            HeisenbergElement::new(vec![rat(1, 4), rat(1, 9)], vec![]),
            Some(vec![vec![rat_int(1), rat_int(1)]]),
        )
        .unwrap();
        // at 3 the lattice is spanned by (1/3, 0), (0, 1/3)
        let lat = QLattice::scaled(2, &rat(1, 3));
        let lvl = LevelSpec::maximal(2).with_exception(3, Some(lat), 0).unwrap();
        let m = minimize_over_coset(&datum, &lvl).unwrap();
        // w + t(1,1): the 2-part of the first and the 3-part of the second
        // coordinate cannot both vanish, but each prime minimizes separately
        let u = &m.w_prime.u;
        assert_eq!(valuation_rational(&(&u[0] - &u[1]), 2), valuation_rational(&(rat(1, 4) - rat(1, 9)), 2));
        assert_eq!(m.orders, vec![(2, 2), (3, 1)]);
    }

    #[test]
    fn invariants_of_worked_examples() {
        let cfg = EvalConfig::default();
        let lvl = LevelSpec::maximal(1);
        assert_eq!(test_invariant(&split_datum(rat_int(0)), &lvl, &cfg).unwrap().tau, rat_int(1));
        let r = test_invariant(&split_datum(rat(1, 3)), &lvl, &cfg).unwrap();
        assert_eq!(r.tau, rat_int(2));
        assert!(r.lower.degenerate);
        assert_eq!(r.upper.as_ref().unwrap().exact, rat_int(3));
        let r = test_invariant(&weil_datum(-4), &lvl, &cfg).unwrap();
        assert_eq!(r.tau, rat_int(4));
        assert!((r.lower.value - 4f64.ln().powi(2)).abs() < 1e-12);
        assert_eq!(r.upper.unwrap().exact, rat_int(1));
        let r = test_invariant(&weil_datum(-23), &lvl, &cfg).unwrap();
        assert_eq!(r.upper.unwrap().class_number, 3);
    }

    #[test]
    fn lower_bound_with_defect() {
        let datum = weil_datum(-4).with_w(HeisenbergElement::new(vec![rat(1, 3)], vec![])).unwrap();
        let lb = lower_bound(&datum, &LevelSpec::maximal(1), &EvalConfig::default()).unwrap();
        // norms of (Z[i]/3)^× fill (Z/3)^×: index 2
        assert_eq!(lb.product, rat_int(2));
        assert!((lb.value - 2.0 * 4f64.ln().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_number_t(&TorusSpec::split(2), None).unwrap(), 1);
        let t = TorusSpec::weil(AbelianFieldSpec::quadratic(-23).unwrap());
        assert_eq!(class_number_t(&t, None).unwrap(), 3);
        let n1 = TorusSpec::new(vec![TorusFactor::NormOne(AbelianFieldSpec::quadratic(-4).unwrap())]).unwrap();
        assert!(matches!(class_number_t(&n1, None), Err(Error::Unsupported(_))));
        assert_eq!(class_number_t(&n1.with_class_number(2).unwrap(), None).unwrap(), 2);
    }

    #[test]
    fn level_intersection() {
        let datum = split_datum(rat_int(0));
        let lvl = LevelSpec::maximal(1);
        assert_eq!(intersect_levels(&datum, &lvl, &[]).unwrap(), lvl);
        let ws = [HeisenbergElement::new(vec![rat_int(2)], vec![])];
        assert_eq!(intersect_levels(&datum, &lvl, &ws).unwrap(), lvl);
        let ws = [HeisenbergElement::new(vec![rat(1, 3)], vec![]), HeisenbergElement::new(vec![rat(2, 9)], vec![])];
        let out = intersect_levels(&datum, &lvl, &ws).unwrap();
        assert_eq!(out.depth_at(3), 2);
        for w in &ws {
            let d = defect_primes(&datum.with_w(w.clone()).unwrap(), &out, &PrecisionPolicy::default()).unwrap();
            assert!(d.delta_w.is_empty());
        }
    }

    #[test]
    fn classification() {
        let cfg = EvalConfig::default();
        let items: Vec<_> = [rat_int(0), rat(1, 2), rat(1, 3)]
            .into_iter()
            .map(|w| (split_datum(w), LevelSpec::maximal(1)))
            .collect();
        let c = classify_sequence(&items, &rat_int(2), &cfg).unwrap();
        assert_eq!(c.taus, vec![rat_int(1), rat_int(1), rat_int(2)]);
        assert!(c.bounded);
        assert_eq!(c.classes.len(), 3);
        let dup = vec![items[2].clone(), items[2].clone()];
        let c = classify_sequence(&dup, &rat_int(1), &cfg).unwrap();
        assert!(!c.bounded);
        assert_eq!(c.classes.len(), 1);
    }

    #[test]
    fn validation() {
        let chi = CharacterSpec::new(vec![1]);
        let symplectic =
            PolarizationForm::new(1, 2, vec![vec![vec![rat_int(0), rat_int(1)], vec![rat_int(-1), rat_int(0)]]]).unwrap();
        let ok = SubvarietyDatum::new(
            TorusSpec::split(1),
            symplectic.clone(),
            vec![
                ActionBlock { coords: vec![0], character: CharacterSpec::new(vec![2]) },
                ActionBlock { coords: vec![1, 2], character: chi.clone() },
            ],
            HeisenbergElement::identity(1, 2),
            None,
        );
        assert!(ok.is_ok());
        let bad = SubvarietyDatum::new(
            TorusSpec::split(1),
            symplectic,
            vec![ActionBlock { coords: vec![0, 1, 2], character: chi.clone() }],
            HeisenbergElement::identity(1, 2),
            None,
        );
        assert!(matches!(bad, Err(Error::IncompatiblePolarization(_))));
        let gap = SubvarietyDatum::new(
            TorusSpec::split(1),
            PolarizationForm::zero(2, 0),
            vec![ActionBlock { coords: vec![0], character: chi.clone() }],
            HeisenbergElement::identity(2, 0),
            None,
        );
        assert!(matches!(gap, Err(Error::Invalid(_))));
        let unstable = SubvarietyDatum::new(
            TorusSpec::split(1),
            PolarizationForm::zero(2, 0),
            vec![
                ActionBlock { coords: vec![0], character: chi },
                ActionBlock { coords: vec![1], character: CharacterSpec::new(vec![3]) },
            ],
            HeisenbergElement::identity(2, 0),
            Some(vec![vec![rat_int(1), rat_int(1)]]),
        );
        assert!(matches!(unstable, Err(Error::SubspaceNotStable)));
    }
}
