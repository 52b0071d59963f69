//! Exact exhaustive counting of solutions to the four congruence families
//!
//!   fixed points   g^h == h            (mod p)
//!   two-cycles     g^h == a, g^a == h  (mod p)
//!   collisions     h^h == a^a          (mod p)
//!   reduced form   h^(h/d) == a^(a/d)  (mod p),  d = gcd(h, a, p-1)
//!
//! under all combinations of the ANY/PR/RP/RPPR side conditions, with the
//! Smith-form recovery of g from a colliding pair.
//!
//! All residues live in [1, p-1]; a = g^h is reduced into that range (it is
//! never 0 mod p). A two-cycle (g,h) is trivial when its partner a equals h,
//! i.e. exactly when (g,h) is a fixed point.

use num_integer::gcd;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{bezout_mod, mod_mul, mod_pow, Condition, DlogTables, PrimeContext};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CountError {
    #[error("({h},{a}) does not satisfy h^(h/d) == a^(a/d) mod p")]
    NotACollision { h: u64, a: u64 },
    #[error("value bucket for {value} has {size} members, exceeding the cap of {cap}")]
    BucketCapExceeded { value: u64, size: usize, cap: usize },
    #[error("k = {k} does not divide p-1 = {pm1}")]
    NotADivisor { k: u64, pm1: u64 },
    #[error(transparent)]
    Arith(#[from] crate::arith::ArithError),
}

/// Pairs enumerated inside one value bucket are expected O(1); this cap turns
/// a pathological quadratic blowup into an error instead of a hang.
pub const DEFAULT_BUCKET_CAP: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquationTag {
    Fp,
    Tc,
    Ha,
    HaSmith,
}

/// Trivial/nontrivial split of one cell count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCount {
    pub trivial: u64,
    pub nontrivial: u64,
}

impl SplitCount {
    pub fn total(self) -> u64 {
        self.trivial + self.nontrivial
    }
}

/// 4x4 grid of exact counts indexed by (row condition, column condition) in
/// the fixed order ANY, PR, RP, RPPR. Rows carry the g condition for FP/TC
/// and the a condition for HA; columns always carry the h condition.
///
/// FP solutions are exactly the trivial two-cycles, so an Fp matrix keeps its
/// single count in `trivial` and has `nontrivial == 0` everywhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    pub equation: EquationTag,
    pub cells: [[SplitCount; 4]; 4],
}

impl CountMatrix {
    fn new(equation: EquationTag) -> Self {
        CountMatrix { equation, cells: [[SplitCount::default(); 4]; 4] }
    }

    pub fn get(&self, row: Condition, col: Condition) -> SplitCount {
        self.cells[row.index()][col.index()]
    }

    /// The FP count of a cell (valid only for Fp matrices).
    pub fn fp_count(&self, row: Condition, col: Condition) -> u64 {
        debug_assert_eq!(self.equation, EquationTag::Fp);
        self.get(row, col).trivial
    }

    /// Cell-wise sum, used to merge per-thread partial counts.
    pub fn merge(&mut self, other: &CountMatrix) {
        debug_assert_eq!(self.equation, other.equation);
        for r in 0..4 {
            for c in 0..4 {
                self.cells[r][c].trivial += other.cells[r][c].trivial;
                self.cells[r][c].nontrivial += other.cells[r][c].nontrivial;
            }
        }
    }
}

/// Histogram over exact residue classes (0..3 = neither/RP/PR/RPPR bits),
/// folded into the 16 condition cells at the end. Keeps the inner counting
/// loops branch-light.
#[derive(Default, Clone)]
struct ClassHist {
    trivial: [[u64; 4]; 4],
    nontrivial: [[u64; 4]; 4],
}

impl ClassHist {
    #[inline]
    fn add(&mut self, row_class: u8, col_class: u8, trivial: bool, n: u64) {
        if trivial {
            self.trivial[row_class as usize][col_class as usize] += n;
        } else {
            self.nontrivial[row_class as usize][col_class as usize] += n;
        }
    }

    fn fold(&self, equation: EquationTag) -> CountMatrix {
        let mut m = CountMatrix::new(equation);
        for rc in 0..4u8 {
            for cc in 0..4u8 {
                let t = self.trivial[rc as usize][cc as usize];
                let n = self.nontrivial[rc as usize][cc as usize];
                if t == 0 && n == 0 {
                    continue;
                }
                for row in Condition::ALL {
                    if !row.satisfied_by(rc) {
                        continue;
                    }
                    for col in Condition::ALL {
                        if col.satisfied_by(cc) {
                            let cell = &mut m.cells[row.index()][col.index()];
                            cell.trivial += t;
                            cell.nontrivial += n;
                        }
                    }
                }
            }
        }
        m
    }
}

/// The two extra two-cycle cells conditioned on ord(g) = ord(h).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdCells {
    /// h RP, ord(g) = ord(h)
    pub h_rp: SplitCount,
    /// h ANY, ord(g) = ord(h)
    pub h_any: SplitCount,
}

/// Full two-cycle count: the 4x4 (g cond, h cond) grid plus the ORD cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCycleCounts {
    pub matrix: CountMatrix,
    pub ord: OrdCells,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// divisor e of p-1
    pub e: u64,
    /// T(e,p) = #{h : gcd(h,p-1) = e, h an e-th power mod p}
    pub t_e: u64,
    /// e * T(e,p)
    pub contribution: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GCounts {
    /// #{h : some g with g^h == h mod p exists} = sum of T(e,p)
    pub g_any_h_any: u64,
    /// #{h : some primitive root g with g^h == h mod p exists}
    pub g_pr_h_any: u64,
}

/// Witness data recovering the g solutions behind one colliding pair (h, a).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithSolution {
    pub h: u64,
    pub a: u64,
    /// gcd(h, a, p-1)
    pub d: u64,
    pub u0: u64,
    pub v0: u64,
    /// h^v0 * a^u0 mod p
    pub rhs: u64,
    /// every g with (g, h) solving the two-cycle system with this a; empty or
    /// exactly d residues
    pub g_list: Vec<u64>,
}

#[inline]
fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a, b)
}

/// Iterate fixed-point solutions (g, h): for each h with e = gcd(h, p-1)
/// dividing log h there are exactly e solutions g, whose logs form an
/// arithmetic progression of step (p-1)/e.
fn for_each_fp(
    ctx: &PrimeContext,
    tables: &DlogTables,
    mut visit: impl FnMut(u64, u64, u64, u64), // (g, h, log_g, log_h)
) {
    let p = ctx.p();
    let m = p - 1;
    for h in 1..=m {
        let e = gcd_u64(h, m);
        let lh = tables.log_of(h);
        if lh % e != 0 {
            continue;
        }
        let me = m / e;
        // (h/e) X == (lh/e) mod (p-1)/e has the unique root X0; lifts are X0 + t*me
        let he = (h / e) % me;
        let x0 = if me == 1 {
            0
        } else {
            mod_mul(
                crate::arith::inv_mod(he, me).expect("h/e is a unit mod (p-1)/e"),
                (lh / e) % me,
                me,
            )
        };
        for t in 0..e {
            let x = x0 + t * me;
            visit(tables.pow_of(x), h, x, lh);
        }
    }
}

/// Exact fixed-point counts for every (g condition, h condition) cell.
pub fn count_fp(ctx: &PrimeContext) -> Result<CountMatrix, CountError> {
    Ok(count_fp_with_ord(ctx)?.0)
}

/// Fixed-point counts plus the ord(g) = ord(h) trivial cells shared with
/// the two-cycle counters.
pub fn count_fp_with_ord(ctx: &PrimeContext) -> Result<(CountMatrix, OrdCells), CountError> {
    let tables = ctx.tables()?;
    let m = ctx.p() - 1;
    let mut hist = ClassHist::default();
    let mut ord = OrdCells::default();
    for_each_fp(ctx, tables, |g, h, lg, lh| {
        hist.add(tables.class_of(g), tables.class_of(h), true, 1);
        if gcd_u64(lg, m) == gcd_u64(lh, m) {
            ord.h_any.trivial += 1;
            if tables.class_of(h) & crate::arith::CLASS_RP != 0 {
                ord.h_rp.trivial += 1;
            }
        }
    });
    Ok((hist.fold(EquationTag::Fp), ord))
}

/// T(e,p) for every divisor e of p-1, in ascending divisor order.
pub fn count_t_spectrum(ctx: &PrimeContext) -> Result<Vec<SpectrumEntry>, CountError> {
    let tables = ctx.tables()?;
    let m = ctx.p() - 1;
    let divisors = ctx.pm1().divisors();
    let mut index = std::collections::HashMap::with_capacity(divisors.len());
    for (i, &d) in divisors.iter().enumerate() {
        index.insert(d, i);
    }
    let mut t = vec![0u64; divisors.len()];
    for h in 1..=m {
        let e = gcd_u64(h, m);
        if tables.log_of(h) % e == 0 {
            t[index[&e]] += 1;
        }
    }
    Ok(divisors
        .iter()
        .zip(t)
        .map(|(&e, t_e)| SpectrumEntry { e, t_e, contribution: e * t_e })
        .collect())
}

/// E(p) = max { e | p-1 : T(e,p) > 0 }; at least 1 since T(1,p) = phi(p-1).
pub fn e_p(spectrum: &[SpectrumEntry]) -> u64 {
    spectrum
        .iter()
        .filter(|s| s.t_e > 0)
        .map(|s| s.e)
        .max()
        .expect("T(1,p) = phi(p-1) > 0")
}

/// T((p-1)/k, p) via the characterization
/// #{ j in [1,k] : gcd(j,k) = 1, (-j)^k == k^k mod p }.
pub fn count_t_e_via_j(ctx: &PrimeContext, k: u64) -> Result<u64, CountError> {
    let p = ctx.p();
    let m = p - 1;
    if k == 0 || m % k != 0 {
        return Err(CountError::NotADivisor { k, pm1: m });
    }
    let kk = mod_pow(k % p, k, p);
    let mut count = 0;
    for j in 1..=k {
        if gcd_u64(j, k) == 1 && mod_pow(p - j, k, p) == kk {
            count += 1;
        }
    }
    Ok(count)
}

/// Which collision equation to count: the plain h^h == a^a, or the
/// exponent-divided form restricted to pairs with gcd(h, a, p-1) exactly d.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaVariant {
    All,
    SmithExact(u64),
}

/// Sorted (value, residue) list; equal-value runs are the collision buckets.
fn value_buckets(p: u64, members: impl Iterator<Item = (u64, u64)>) -> Vec<(u64, u64)> {
    let _ = p;
    let mut v: Vec<(u64, u64)> = members.collect();
    v.sort_unstable();
    v
}

/// Exact collision counts (rows = a condition, cols = h condition).
pub fn count_ha(ctx: &PrimeContext, variant: HaVariant) -> Result<CountMatrix, CountError> {
    count_ha_with_cap(ctx, variant, DEFAULT_BUCKET_CAP)
}

pub fn count_ha_with_cap(
    ctx: &PrimeContext,
    variant: HaVariant,
    cap: usize,
) -> Result<CountMatrix, CountError> {
    let tables = ctx.tables()?;
    let p = ctx.p();
    let m = p - 1;
    let mut hist = ClassHist::default();
    match variant {
        HaVariant::All => {
            // bucket by h^h; within a bucket count ordered cross pairs from the
            // per-class tallies, so no quadratic pass is ever needed
            let sorted = value_buckets(p, (1..=m).map(|h| (mod_pow(h, h, p), h)));
            for h in 1..=m {
                let c = tables.class_of(h);
                hist.add(c, c, true, 1);
            }
            let mut i = 0;
            while i < sorted.len() {
                let mut j = i;
                let mut cnt = [0u64; 4];
                while j < sorted.len() && sorted[j].0 == sorted[i].0 {
                    cnt[tables.class_of(sorted[j].1) as usize] += 1;
                    j += 1;
                }
                for ca in 0..4 {
                    if cnt[ca] == 0 {
                        continue;
                    }
                    for ch in 0..4 {
                        if cnt[ch] == 0 {
                            continue;
                        }
                        let same = if ca == ch { cnt[ca] } else { 0 };
                        hist.add(ca as u8, ch as u8, false, cnt[ca] * cnt[ch] - same);
                    }
                }
                i = j;
            }
            Ok(hist.fold(EquationTag::Ha))
        }
        HaVariant::SmithExact(d) => {
            if d == 0 || m % d != 0 {
                return Err(CountError::NotADivisor { k: d, pm1: m });
            }
            for h in (d..=m).step_by(d as usize) {
                if gcd_u64(h, m) == d {
                    let c = tables.class_of(h);
                    hist.add(c, c, true, 1);
                }
            }
            let sorted = value_buckets(p, (d..=m).step_by(d as usize).map(|h| (mod_pow(h, h / d, p), h)));
            let mut i = 0;
            while i < sorted.len() {
                let mut j = i;
                while j < sorted.len() && sorted[j].0 == sorted[i].0 {
                    j += 1;
                }
                let bucket = &sorted[i..j];
                if bucket.len() > cap {
                    return Err(CountError::BucketCapExceeded {
                        value: sorted[i].0,
                        size: bucket.len(),
                        cap,
                    });
                }
                for (bi, &(_, h)) in bucket.iter().enumerate() {
                    let eh = gcd_u64(h, m);
                    for (bj, &(_, a)) in bucket.iter().enumerate() {
                        if bi == bj || gcd_u64(eh, gcd_u64(a, m)) != d {
                            continue;
                        }
                        hist.add(tables.class_of(a), tables.class_of(h), false, 1);
                    }
                }
                i = j;
            }
            Ok(hist.fold(EquationTag::HaSmith))
        }
    }
}

/// Solve for the g behind one colliding pair: g^d == h^v0 a^u0 (mod p) with
/// d = gcd(h, a, p-1). Requires h^(h/d) == a^(a/d) (mod p).
///
/// g_list holds exactly the residues g for which (g, h) is a two-cycle with
/// partner a; it has d members when the reduced congruence is solvable and
/// the full log system is consistent, and is empty otherwise. Consistency is
/// confirmed by substituting one candidate, which suffices: when the system
/// is solvable at all, its solution set equals the candidate set.
pub fn recover_g(ctx: &PrimeContext, h: u64, a: u64) -> Result<SmithSolution, CountError> {
    let tables = ctx.tables()?;
    let p = ctx.p();
    let m = p - 1;
    debug_assert!(h >= 1 && h <= m && a >= 1 && a <= m);
    let (d, u0, v0) = bezout_mod(h, a, m);
    if mod_pow(h, h / d, p) != mod_pow(a, a / d, p) {
        return Err(CountError::NotACollision { h, a });
    }
    let rhs = mod_mul(mod_pow(h, v0, p), mod_pow(a, u0, p), p);
    let x = tables.log_of(rhs);
    let mut g_list = Vec::new();
    if x % d == 0 {
        let x0 = x / d;
        let step = m / d;
        let g0 = tables.pow_of(x0);
        if mod_pow(g0, h, p) == a && mod_pow(g0, a, p) == h {
            g_list.reserve(d as usize);
            for t in 0..d {
                let g = tables.pow_of((x0 + t * step) % m);
                debug_assert!(mod_pow(g, h, p) == a && mod_pow(g, a, p) == h);
                g_list.push(g);
            }
        }
    }
    Ok(SmithSolution { h, a, d, u0, v0, rhs, g_list })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TcMethod {
    /// quadratic (g, h) double loop; intended for p up to ~10^4
    Direct,
    /// per-divisor collision buckets plus Smith-form recovery of g
    Smith,
}

/// Exact two-cycle counts (rows = g condition, cols = h condition), split
/// into trivial (a = h, i.e. fixed points) and nontrivial parts, plus the
/// two ord(g) = ord(h) cells.
pub fn count_tc(ctx: &PrimeContext, method: TcMethod) -> Result<TwoCycleCounts, CountError> {
    count_tc_with_cap(ctx, method, DEFAULT_BUCKET_CAP)
}

pub fn count_tc_with_cap(
    ctx: &PrimeContext,
    method: TcMethod,
    cap: usize,
) -> Result<TwoCycleCounts, CountError> {
    match method {
        TcMethod::Direct => count_tc_direct(ctx),
        TcMethod::Smith => count_tc_smith(ctx, cap),
    }
}

fn count_tc_direct(ctx: &PrimeContext) -> Result<TwoCycleCounts, CountError> {
    let tables = ctx.tables()?;
    let p = ctx.p();
    let m = p - 1;
    let mut hist = ClassHist::default();
    let mut ord = OrdCells::default();
    // per-residue gcd(log x, p-1), reused in every ord comparison
    let glog: Vec<u64> = (0..=m).map(|x| if x == 0 { 0 } else { gcd_u64(tables.log_of(x), m) }).collect();
    let mut row = vec![0u32; p as usize];
    for g in 1..=m {
        let mut acc = 1u64;
        for slot in row.iter_mut().skip(1) {
            acc = mod_mul(acc, g, p);
            *slot = acc as u32;
        }
        let cg = tables.class_of(g);
        for h in 1..=m {
            let a = row[h as usize] as u64;
            if row[a as usize] as u64 != h {
                continue;
            }
            let trivial = a == h;
            hist.add(cg, tables.class_of(h), trivial, 1);
            if glog[g as usize] == glog[h as usize] {
                let cell = if trivial { &mut ord.h_any.trivial } else { &mut ord.h_any.nontrivial };
                *cell += 1;
                if tables.class_of(h) & crate::arith::CLASS_RP != 0 {
                    let cell = if trivial { &mut ord.h_rp.trivial } else { &mut ord.h_rp.nontrivial };
                    *cell += 1;
                }
            }
        }
    }
    let mut matrix = hist.fold(EquationTag::Tc);
    matrix.equation = EquationTag::Tc;
    Ok(TwoCycleCounts { matrix, ord })
}

fn count_tc_smith(ctx: &PrimeContext, cap: usize) -> Result<TwoCycleCounts, CountError> {
    let tables = ctx.tables()?;
    let p = ctx.p();
    let m = p - 1;
    // trivial two-cycles are the fixed points
    let (fp, ord_trivial) = count_fp_with_ord(ctx)?;
    let mut hist = ClassHist::default();
    let mut ord = ord_trivial;
    for &d in ctx.pm1().divisors() {
        let sorted = value_buckets(p, (d..=m).step_by(d as usize).map(|h| (mod_pow(h, h / d, p), h)));
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j].0 == sorted[i].0 {
                j += 1;
            }
            let bucket = &sorted[i..j];
            i = j;
            if bucket.len() < 2 {
                continue;
            }
            if bucket.len() > cap {
                return Err(CountError::BucketCapExceeded {
                    value: bucket[0].0,
                    size: bucket.len(),
                    cap,
                });
            }
            for (bi, &(_, h)) in bucket.iter().enumerate() {
                let eh = gcd_u64(h, m);
                let ch = tables.class_of(h);
                let lh_gcd = gcd_u64(tables.log_of(h), m);
                let h_rp = ch & crate::arith::CLASS_RP != 0;
                for (bj, &(_, a)) in bucket.iter().enumerate() {
                    // a pair is processed only at its exact d
                    if bi == bj || gcd_u64(eh, gcd_u64(a, m)) != d {
                        continue;
                    }
                    let (dd, u0, v0) = bezout_mod(h, a, m);
                    debug_assert_eq!(dd, d);
                    let rhs = mod_mul(mod_pow(h, v0, p), mod_pow(a, u0, p), p);
                    let x = tables.log_of(rhs);
                    if x % d != 0 {
                        continue;
                    }
                    let x0 = x / d;
                    let step = m / d;
                    // one substitution check rejects inconsistent systems that
                    // the reduced congruence alone cannot see
                    let g0 = tables.pow_of(x0);
                    if mod_pow(g0, h, p) != a || mod_pow(g0, a, p) != h {
                        continue;
                    }
                    for t in 0..d {
                        let xg = (x0 + t * step) % m;
                        let g = tables.pow_of(xg);
                        hist.add(tables.class_of(g), ch, false, 1);
                        if gcd_u64(xg, m) == lh_gcd {
                            ord.h_any.nontrivial += 1;
                            if h_rp {
                                ord.h_rp.nontrivial += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut matrix = hist.fold(EquationTag::Tc);
    for r in 0..4 {
        for c in 0..4 {
            matrix.cells[r][c].trivial = fp.cells[r][c].trivial;
        }
    }
    Ok(TwoCycleCounts { matrix, ord })
}

/// Distinct-h counts: how many h admit some g, and some primitive-root g.
pub fn count_g(ctx: &PrimeContext) -> Result<GCounts, CountError> {
    let tables = ctx.tables()?;
    let m = ctx.p() - 1;
    let mut g_any = 0;
    let mut g_pr = 0;
    for h in 1..=m {
        let e = gcd_u64(h, m);
        let lh = tables.log_of(h);
        if lh % e == 0 {
            g_any += 1;
        }
        // a PR solution needs gcd(h, p-1) = gcd(log h, p-1), i.e. ord h = (p-1)/e
        if gcd_u64(lh, m) == e {
            g_pr += 1;
        }
    }
    Ok(GCounts { g_any_h_any: g_any, g_pr_h_any: g_pr })
}

/// Everything the sweep stores per prime.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSummary {
    pub p: u64,
    pub fp: CountMatrix,
    pub ha: CountMatrix,
    pub tc: CountMatrix,
    pub ord: OrdCells,
    pub spectrum: Vec<SpectrumEntry>,
    pub e_p: u64,
    pub g: GCounts,
}

/// Compute all exact counts for one prime (TC via the requested method).
pub fn summarize(ctx: &PrimeContext, method: TcMethod) -> Result<PrimeSummary, CountError> {
    let fp = count_fp(ctx)?;
    let ha = count_ha(ctx, HaVariant::All)?;
    let tc = count_tc(ctx, method)?;
    let spectrum = count_t_spectrum(ctx)?;
    let e = e_p(&spectrum);
    let g = count_g(ctx)?;
    Ok(PrimeSummary { p: ctx.p(), fp, ha, tc: tc.matrix, ord: tc.ord, spectrum, e_p: e, g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Condition::*;

    fn cells(m: &CountMatrix, f: impl Fn(SplitCount) -> u64) -> [[u64; 4]; 4] {
        let mut out = [[0u64; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                out[r][c] = f(m.cells[r][c]);
            }
        }
        out
    }

    #[test]
    fn fp_p5_hand_enumeration() {
        let ctx = PrimeContext::new(5).unwrap();
        let fp = count_fp(&ctx).unwrap();
        // pairs (1,1) and (2,3)
        assert_eq!(
            cells(&fp, |c| c.trivial),
            [[2, 1, 2, 1], [1, 1, 1, 1], [1, 0, 1, 0], [0, 0, 0, 0]]
        );
    }

    #[test]
    fn spectrum_p7() {
        let ctx = PrimeContext::new(7).unwrap();
        let s = count_t_spectrum(&ctx).unwrap();
        let by_e: Vec<(u64, u64)> = s.iter().map(|e| (e.e, e.t_e)).collect();
        assert_eq!(by_e, vec![(1, 2), (2, 2), (3, 0), (6, 0)]);
        assert_eq!(e_p(&s), 2);
        let fp = count_fp(&ctx).unwrap();
        assert_eq!(fp.fp_count(Any, Any), 6);
        assert_eq!(
            s.iter().map(|e| e.contribution).sum::<u64>(),
            fp.fp_count(Any, Any)
        );
    }

    #[test]
    fn e_p_of_11_is_2() {
        let ctx = PrimeContext::new(11).unwrap();
        assert_eq!(e_p(&count_t_spectrum(&ctx).unwrap()), 2);
    }

    #[test]
    fn t_via_j_examples() {
        let ctx = PrimeContext::new(7).unwrap();
        assert_eq!(count_t_e_via_j(&ctx, 2).unwrap(), 0);
        assert_eq!(count_t_e_via_j(&ctx, 6).unwrap(), 2); // = T(1,7)
        assert!(matches!(
            count_t_e_via_j(&ctx, 4),
            Err(CountError::NotADivisor { .. })
        ));
    }

    #[test]
    fn ha_p5_hand_enumeration() {
        let ctx = PrimeContext::new(5).unwrap();
        let ha = count_ha(&ctx, HaVariant::All).unwrap();
        // h^h mod 5 over h=1..4 is 1,4,2,1: nontrivial pairs (1,4) both ways
        assert_eq!(ha.get(Any, Any).trivial, 4);
        assert_eq!(ha.get(Any, Any).nontrivial, 2);
        assert_eq!(
            cells(&ha, |c| c.nontrivial),
            [[2, 0, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]]
        );
    }

    #[test]
    fn recover_g_p5_examples() {
        let ctx = PrimeContext::new(5).unwrap();
        let s = recover_g(&ctx, 1, 4).unwrap();
        assert_eq!(s.d, 1);
        assert_eq!(s.g_list, vec![4]);
        let s = recover_g(&ctx, 3, 3).unwrap();
        assert_eq!(s.g_list, vec![2]); // 3^(3^{-1} mod 4) = 3^3 = 2
        assert!(matches!(
            recover_g(&ctx, 1, 2),
            Err(CountError::NotACollision { .. })
        ));
    }

    #[test]
    fn tc_p5_hand_enumeration() {
        let ctx = PrimeContext::new(5).unwrap();
        for method in [TcMethod::Direct, TcMethod::Smith] {
            let tc = count_tc(&ctx, method).unwrap();
            // nontrivial: (4,1) and (4,4); trivial: the two fixed points
            assert_eq!(tc.matrix.get(Any, Any).trivial, 2, "{method:?}");
            assert_eq!(tc.matrix.get(Any, Any).nontrivial, 2, "{method:?}");
            assert_eq!(tc.ord.h_any, SplitCount { trivial: 2, nontrivial: 1 });
            assert_eq!(tc.ord.h_rp, SplitCount { trivial: 2, nontrivial: 0 });
        }
    }

    #[test]
    fn g_counts_small() {
        let ctx = PrimeContext::new(5).unwrap();
        let g = count_g(&ctx).unwrap();
        assert_eq!(g.g_any_h_any, 2); // h in {1, 3}
        assert_eq!(g.g_pr_h_any, 1); // h = 3
        let ctx = PrimeContext::new(7).unwrap();
        assert_eq!(count_g(&ctx).unwrap().g_any_h_any, 4); // T(1)+T(2)+T(3)+T(6)
    }

    #[test]
    fn fp_any_rp_is_phi() {
        for p in [5u64, 7, 11, 13, 41, 101, 239] {
            let ctx = PrimeContext::new(p).unwrap();
            let fp = count_fp(&ctx).unwrap();
            assert_eq!(fp.fp_count(Any, Rp), ctx.phi_pm1(), "p={p}");
        }
    }

    #[test]
    fn condition_monotonicity() {
        let ctx = PrimeContext::new(101).unwrap();
        let tc = count_tc(&ctx, TcMethod::Smith).unwrap().matrix;
        for row in Condition::ALL {
            for col in Condition::ALL {
                let cell = tc.get(row, col).total();
                assert!(cell <= tc.get(Any, col).total());
                assert!(cell <= tc.get(row, Any).total());
                assert!(tc.get(Rppr, col).total() <= tc.get(Rp, col).total());
                assert!(tc.get(Rppr, col).total() <= tc.get(Pr, col).total());
            }
        }
    }

    #[test]
    fn phantom_reduced_solutions_are_rejected() {
        // (h,a) = (9,18) mod 31 satisfies h^(h/d) == a^(a/d) with d = 3 and the
        // reduced congruence is solvable for a naive Bezout pair, yet no g
        // solves the two-cycle system
        let ctx = PrimeContext::new(31).unwrap();
        let s = recover_g(&ctx, 9, 18).unwrap();
        assert_eq!(s.d, 3);
        assert!(s.g_list.is_empty());
    }

    #[test]
    fn bucket_cap_reports_instead_of_hanging() {
        let ctx = PrimeContext::new(101).unwrap();
        let r = count_tc_with_cap(&ctx, TcMethod::Smith, 1);
        assert!(matches!(r, Err(CountError::BucketCapExceeded { .. })));
    }
}
