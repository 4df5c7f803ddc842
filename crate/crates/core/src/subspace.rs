//! Subspaces of `F_p^dim` in reduced row echelon form, and the mutual
//! transversality constructions: extending a family so prefix intersections
//! plus the next member fill the space, and adapted coordinate bases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Vector = Vec<u32>;

fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Row reduce in place; returns the pivot columns. Zero rows are dropped.
fn rref(p: u32, rows: &mut Vec<Vector>) -> Vec<usize> {
    let width = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..width {
        let Some(found) = (top..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(top, found);
        let inv = inv_mod(rows[top][col], p) as u64;
        for x in rows[top].iter_mut() {
            *x = (*x as u64 * inv % p as u64) as u32;
        }
        let pivot = rows[top].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            let f = row[col] as u64;
            if i == top || f == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&pivot) {
                *x = ((*x as u64 + (p as u64 - f) * y as u64) % p as u64) as u32;
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    pivots
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Subspace {
    p: u32,
    dim: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    pub fn span(p: u32, dim: usize, vectors: &[Vector]) -> Result<Self> {
        if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(Error::NotPrime(p as u64));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: v.len(),
            });
        }
        let mut rows: Vec<Vector> = vectors.iter().map(|v| v.iter().map(|&x| x % p).collect()).collect();
        rref(p, &mut rows);
        Ok(Subspace { p, dim, basis: rows })
    }

    pub fn zero(p: u32, dim: usize) -> Self {
        Subspace { p, dim, basis: Vec::new() }
    }

    pub fn full(p: u32, dim: usize) -> Self {
        let basis = (0..dim).map(|i| unit(dim, i)).collect();
        Subspace { p, dim, basis }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.dim - self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    fn spanned(&self, rows: Vec<Vector>) -> Self {
        let mut rows = rows;
        rref(self.p, &mut rows);
        Subspace {
            p: self.p,
            dim: self.dim,
            basis: rows,
        }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rref(self.p, &mut rows).len() == self.basis.len()
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        self.sum(other).dimension() == self.dimension()
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        self.spanned(self.basis.iter().chain(&other.basis).cloned().collect())
    }

    /// `{w : <v, w> = 0 for all v}`.
    pub fn annihilator(&self) -> Subspace {
        let mut rows = self.basis.clone();
        let pivots = rref(self.p, &mut rows);
        let p = self.p as u64;
        let free = (0..self.dim).filter(|c| !pivots.contains(c));
        let null = free
            .map(|f| {
                let mut v = unit(self.dim, f);
                for (row, &pc) in rows.iter().zip(&pivots) {
                    v[pc] = ((p - row[f] as u64) % p) as u32;
                }
                v
            })
            .collect();
        self.spanned(null)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        self.annihilator().sum(&other.annihilator()).annihilator()
    }

    /// Complement of `self` inside `outer`, completing the echelon basis of
    /// `self` greedily by the echelon basis of `outer`; for `outer` the full
    /// space these are the first standard vectors not yet spanned.
    pub fn complement_in(&self, outer: &Subspace) -> Subspace {
        let mut acc = self.clone();
        let mut picked = Vec::new();
        for v in &outer.basis {
            if !acc.contains(v) {
                acc = acc.spanned(acc.basis.iter().cloned().chain([v.clone()]).collect());
                picked.push(v.clone());
            }
        }
        self.spanned(picked)
    }
}

fn unit(dim: usize, i: usize) -> Vector {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

fn common(vs: &[Subspace]) -> Result<Option<(u32, usize)>> {
    let Some(first) = vs.first() else {
        return Ok(None);
    };
    for v in vs {
        if v.p != first.p {
            return Err(Error::Invalid("subspaces over different fields".into()));
        }
        if v.dim != first.dim {
            return Err(Error::Dimension {
                expected: first.dim,
                got: v.dim,
            });
        }
    }
    Ok(Some((first.p, first.dim)))
}

/// Intersection of all members, the whole space when empty.
pub fn intersection(p: u32, dim: usize, vs: &[Subspace]) -> Subspace {
    vs.iter().fold(Subspace::full(p, dim), |acc, v| acc.intersect(v))
}

/// Enlarge each `V_j` to `W_j` so that prefix intersections plus the next
/// member span everything while the total intersection is unchanged.
pub fn extend_transverse(vs: &[Subspace]) -> Result<Vec<Subspace>> {
    let Some((p, dim)) = common(vs)? else {
        return Ok(Vec::new());
    };
    let full = Subspace::full(p, dim);
    let mut ws: Vec<Subspace> = Vec::with_capacity(vs.len());
    let mut prefix = full.clone();
    for v in vs {
        let u = prefix.sum(v).complement_in(&full);
        let w = v.sum(&u);
        prefix = prefix.intersect(&w);
        ws.push(w);
    }
    Ok(ws)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdaptedBasis {
    pub basis: Vec<Vector>,
    /// Indices into `basis`, pairwise disjoint.
    pub parts: Vec<Vec<usize>>,
}

/// A basis `E` with disjoint `E_j` so that `V_j` lies in the span of
/// `E - E_j` and the intersection is the span of `E` minus every `E_j`.
pub fn transverse_basis(vs: &[Subspace]) -> Result<AdaptedBasis> {
    let ws = extend_transverse(vs)?;
    let Some((p, dim)) = common(vs)? else {
        return Ok(AdaptedBasis {
            basis: Vec::new(),
            parts: Vec::new(),
        });
    };
    let core = intersection(p, dim, &ws);
    let mut basis = core.basis.clone();
    let mut parts = Vec::with_capacity(ws.len());
    for j in 0..ws.len() {
        let others: Vec<Subspace> = ws.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, w)| w.clone()).collect();
        let u = ws[j].intersect(&intersection(p, dim, &others)).complement_in(&intersection(p, dim, &others));
        let start = basis.len();
        basis.extend(u.basis.iter().cloned());
        parts.push((start..basis.len()).collect());
    }
    Ok(AdaptedBasis { basis, parts })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transversality {
    /// Prefix intersection plus the next member is everything.
    pub prefix_sums: bool,
    /// `V -> sum V/W_j` is onto, by rank of the stacked quotient maps.
    pub quotient_rank: bool,
    /// Leave-one-out intersection plus the left-out member is everything.
    pub leave_one_out: bool,
    /// Codimensions add.
    pub codim_additive: bool,
}

impl Transversality {
    pub fn all(&self) -> bool {
        self.prefix_sums && self.quotient_rank && self.leave_one_out && self.codim_additive
    }

    pub fn agree(&self) -> bool {
        let v = [self.prefix_sums, self.quotient_rank, self.leave_one_out, self.codim_additive];
        v.iter().all(|&b| b == v[0])
    }
}

pub fn check_transversality(ws: &[Subspace]) -> Result<Transversality> {
    let Some((p, dim)) = common(ws)? else {
        return Ok(Transversality {
            prefix_sums: true,
            quotient_rank: true,
            leave_one_out: true,
            codim_additive: true,
        });
    };
    let full_dim = dim;
    let mut prefix = Subspace::full(p, dim);
    let mut prefix_sums = true;
    for (n, w) in ws.iter().enumerate() {
        if n > 0 && prefix.sum(w).dimension() != full_dim {
            prefix_sums = false;
        }
        prefix = prefix.intersect(w);
    }
    let leave_one_out = (0..ws.len()).all(|n| {
        let others: Vec<Subspace> = ws.iter().enumerate().filter(|&(i, _)| i != n).map(|(_, w)| w.clone()).collect();
        intersection(p, dim, &others).sum(&ws[n]).dimension() == full_dim
    });
    let total_codim: usize = ws.iter().map(|w| w.codim()).sum();
    // V/W_j is coordinatized by a basis of the annihilator of W_j
    let mut stacked: Vec<Vector> = ws.iter().flat_map(|w| w.annihilator().basis).collect();
    let rank = rref(p, &mut stacked).len();
    Ok(Transversality {
        prefix_sums,
        quotient_rank: rank == total_codim,
        leave_one_out,
        codim_additive: intersection(p, dim, ws).codim() == total_codim,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisCheck {
    pub disjoint: bool,
    pub is_basis: bool,
    pub contained: bool,
    pub intersection_matches: bool,
}

impl BasisCheck {
    pub fn pass(&self) -> bool {
        self.disjoint && self.is_basis && self.contained && self.intersection_matches
    }
}

pub fn check_basis(vs: &[Subspace], adapted: &AdaptedBasis) -> Result<BasisCheck> {
    let Some((p, dim)) = common(vs)? else {
        return Ok(BasisCheck {
            disjoint: true,
            is_basis: adapted.basis.is_empty(),
            contained: true,
            intersection_matches: true,
        });
    };
    let mut seen = vec![false; adapted.basis.len()];
    let mut disjoint = adapted.parts.len() == vs.len();
    for &i in adapted.parts.iter().flatten() {
        if i >= seen.len() || seen[i] {
            disjoint = false;
        } else {
            seen[i] = true;
        }
    }
    let span_of = |keep: &dyn Fn(usize) -> bool| -> Result<Subspace> {
        let rows: Vec<Vector> = (0..adapted.basis.len())
            .filter(|&i| keep(i))
            .map(|i| adapted.basis[i].clone())
            .collect();
        Subspace::span(p, dim, &rows)
    };
    let is_basis = adapted.basis.len() == dim && span_of(&|_| true)?.dimension() == dim;
    let mut contained = disjoint;
    if disjoint {
        for (v, part) in vs.iter().zip(&adapted.parts) {
            contained &= span_of(&|i| !part.contains(&i))?.contains_space(v);
        }
    }
    let rest = span_of(&|i| !seen.get(i).copied().unwrap_or(true))?;
    Ok(BasisCheck {
        disjoint,
        is_basis,
        contained,
        intersection_matches: disjoint && rest == intersection(p, dim, vs),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub instances: usize,
    pub extension_ok: usize,
    pub basis_ok: usize,
    pub conditions_agree: usize,
    /// Instances whose raw inputs were already transverse.
    pub transverse_inputs: usize,
    pub pass: bool,
}

/// A seeded family: prime from `primes`, ambient dimension `1..=max_dim`,
/// `0..=max_n` subspaces each spanned by a random number of random vectors.
pub fn random_instance(rng: &mut ChaCha8Rng, primes: &[u32], max_dim: usize, max_n: usize) -> Vec<Subspace> {
    let p = primes[rng.gen_range(0..primes.len())];
    let dim = rng.gen_range(1..=max_dim);
    let n = rng.gen_range(0..=max_n);
    (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=dim);
            let vecs: Vec<Vector> = (0..k).map(|_| (0..dim).map(|_| rng.gen_range(0..p)).collect()).collect();
            Subspace::span(p, dim, &vecs).expect("valid prime and shape")
        })
        .collect()
}

pub fn run_suite(seed: u64, count: usize, primes: &[u32], max_dim: usize, max_n: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport {
        instances: count,
        extension_ok: 0,
        basis_ok: 0,
        conditions_agree: 0,
        transverse_inputs: 0,
        pass: false,
    };
    for _ in 0..count {
        let vs = random_instance(&mut rng, primes, max_dim, max_n);
        let raw = check_transversality(&vs)?;
        if raw.all() {
            rep.transverse_inputs += 1;
        }
        let ws = extend_transverse(&vs)?;
        let after = check_transversality(&ws)?;
        let (p, dim) = common(&vs)?.unwrap_or((2, 0));
        let grows = vs.iter().zip(&ws).all(|(v, w)| w.contains_space(v));
        if grows && after.all() && intersection(p, dim, &ws) == intersection(p, dim, &vs) {
            rep.extension_ok += 1;
        }
        if check_basis(&vs, &transverse_basis(&vs)?)?.pass() {
            rep.basis_ok += 1;
        }
        if raw.agree() && after.agree() {
            rep.conditions_agree += 1;
        }
    }
    rep.pass = rep.extension_ok == count && rep.basis_ok == count && rep.conditions_agree == count;
    Ok(rep)
}
