//! Random finite instances for fuzzing.
//!
//! Distances and `φ` values are multiples of 1/4, so with slack 0 every
//! order comparison is exact.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::maps::{BoundDirection, CoupledMap, PhiFn, SelfMap};
use crate::order::PreorderCtx;
use crate::space::{check_t0_with_slack, Point, QPSpace, Sample};

pub type FuzzRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FuzzRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A T₀ quasi-pseudometric on `n` points with entries in `{0, 0.25, …, 2}`,
/// closed under min-plus relaxation so the triangle inequality holds.
pub fn random_space(rng: &mut impl Rng, n: usize) -> Result<QPSpace> {
    loop {
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i != j {
                    *v = rng.random_range(0..=8) as f64 * 0.25;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = m[i][k] + m[k][j];
                    if via < m[i][j] {
                        m[i][j] = via;
                    }
                }
            }
        }
        let space = QPSpace::finite(m)?;
        if check_t0_with_slack(&space, &Sample::Exhaustive, 0.0)?.passed() {
            return Ok(space);
        }
    }
}

/// `φ` table with values `k/4`, `k ∈ −8..=8`, bounded above by its maximum.
pub fn random_phi(rng: &mut impl Rng, n: usize) -> Result<PhiFn> {
    let values = (0..n).map(|_| rng.random_range(-8..=8) as f64 * 0.25).collect();
    PhiFn::table(values, BoundDirection::Above)
}

/// A random ⪯-chain of distinct points, as indices.
fn random_chain(rng: &mut impl Rng, ctx: &PreorderCtx, n: usize) -> Vec<usize> {
    let mut chain = vec![rng.random_range(0..n)];
    loop {
        let last = Point::Index(*chain.last().expect("nonempty"));
        let next: Vec<usize> = (0..n).filter(|&z| !chain.contains(&z) && ctx.leq(last, Point::Index(z))).collect();
        if next.is_empty() || rng.random_bool(0.25) {
            return chain;
        }
        chain.push(*next.choose(rng).expect("nonempty"));
    }
}

/// A finite instance whose coupled map is isotone and whose self maps are
/// weakly left-related to it.
///
/// All maps factor through a random chain `c₁ ⪯ … ⪯ c_m` via the rank
/// `k(x) = max{i : cᵢ ⪯ x}` (0 if none): `F(x, y) = c_j` with
/// `j = min(m, max(k(x), b·k(y), 1) + δ)` and `G(x) = c_j` with
/// `j = min(m, max(k(x), 1) + ε)`, for random `b, δ, ε ∈ {0, 1}`.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub ctx: PreorderCtx,
    pub f: CoupledMap,
    pub maps: Vec<SelfMap>,
    pub chain: Vec<usize>,
}

pub fn random_instance(rng: &mut impl Rng, n: usize, k: usize) -> Result<RandomInstance> {
    let space = random_space(rng, n)?;
    let phi = random_phi(rng, n)?;
    let ctx = PreorderCtx::exact(space, phi);
    let chain = random_chain(rng, &ctx, n);
    let m = chain.len();
    let rank: Vec<usize> = (0..n)
        .map(|x| (1..=m).rev().find(|&i| ctx.leq(Point::Index(chain[i - 1]), Point::Index(x))).unwrap_or(0))
        .collect();
    let at = |j: usize| chain[j.min(m) - 1];

    let b = rng.random_range(0..=1);
    let delta = rng.random_range(0..=1);
    let table = (0..n).map(|x| (0..n).map(|y| at(rank[x].max(b * rank[y]).max(1) + delta)).collect()).collect();
    let f = CoupledMap::table("F", table)?;

    let mut maps = Vec::with_capacity(k);
    for i in 0..k {
        let eps = rng.random_range(0..=1);
        let values = (0..n).map(|x| at(rank[x].max(1) + eps)).collect();
        let name = match (k, i) {
            (2, 0) => "G".to_string(),
            (2, 1) => "H".to_string(),
            (1, _) => "G".to_string(),
            _ => format!("G_{}", i + 1),
        };
        maps.push(SelfMap::table(name, values)?);
    }
    Ok(RandomInstance { ctx, f, maps, chain })
}

/// Index sequence on `n` points: a random prefix, then (half the time) a
/// constant tail so that convergent and non-convergent windows both occur.
pub fn random_sequence(rng: &mut impl Rng, n: usize, len: usize) -> Vec<Point> {
    let settle = if rng.random_bool(0.5) { rng.random_range(0..=len) } else { len };
    let tail = rng.random_range(0..n);
    (0..len).map(|i| Point::Index(if i < settle { rng.random_range(0..n) } else { tail })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::{check_isotone, check_preorder_laws};
    use crate::relations::check_weakly_left_related;
    use crate::space::check_axioms_with_slack;

    #[test]
    fn generated_instances_meet_their_hypotheses() {
        let mut rng = rng(7);
        for t in 0..40 {
            let n = 2 + t % 5;
            let inst = random_instance(&mut rng, n, 2).unwrap();
            let space = &inst.ctx.space;
            assert!(check_axioms_with_slack(space, &Sample::Exhaustive, 0.0).unwrap().passed());
            assert!(check_t0_with_slack(space, &Sample::Exhaustive, 0.0).unwrap().passed());
            assert!(check_preorder_laws(&inst.ctx, &Sample::Exhaustive).unwrap().passed());
            assert!(check_isotone(&inst.ctx, &inst.f, &Sample::Exhaustive).unwrap().passed());
            let pairs = crate::order::grid_pairs(&space.points().unwrap());
            for g in &inst.maps {
                assert!(check_weakly_left_related(&inst.ctx, &inst.f, g, &pairs).unwrap().passed());
            }
            for w in inst.chain.windows(2) {
                assert!(inst.ctx.leq(Point::Index(w[0]), Point::Index(w[1])));
            }
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let a = random_space(&mut rng(3), 5).unwrap();
        let b = random_space(&mut rng(3), 5).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }
}
