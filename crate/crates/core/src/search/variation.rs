//! Random formula generation, subtree crossover, and subtree mutation.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::SearchConfig;
use crate::ltl::{Alphabet, Formula};

const UNARY: usize = 4;
const BINARY: usize = 4;

fn terminal<R: Rng + ?Sized>(names: &[String], rng: &mut R) -> Formula {
    match rng.gen_range(0..names.len() + 2) {
        0 => Formula::True,
        1 => Formula::False,
        i => Formula::prop(names[i - 2].clone()),
    }
}

fn operator<R: Rng + ?Sized>(names: &[String], depth: usize, full: bool, rng: &mut R) -> Formula {
    let sub = |rng: &mut R| random_tree(names, depth - 1, full, rng);
    match rng.gen_range(0..UNARY + BINARY) {
        0 => Formula::not(sub(rng)),
        1 => Formula::next(sub(rng)),
        2 => Formula::always(sub(rng)),
        3 => Formula::eventually(sub(rng)),
        op => {
            let l = sub(rng);
            let r = sub(rng);
            match op {
                4 => Formula::and(l, r),
                5 => Formula::or(l, r),
                6 => Formula::implies(l, r),
                _ => Formula::until(l, r),
            }
        }
    }
}

/// A tree of depth at most `depth` (a leaf has depth 1). `full` trees place
/// operators on every level above the leaves; grown trees pick uniformly from
/// terminals and operators at every node.
pub fn random_tree<R: Rng + ?Sized>(names: &[String], depth: usize, full: bool, rng: &mut R) -> Formula {
    assert!(depth >= 1);
    if depth == 1 {
        return terminal(names, rng);
    }
    let terminals = names.len() + 2;
    if !full && rng.gen_range(0..terminals + UNARY + BINARY) < terminals {
        return terminal(names, rng);
    }
    operator(names, depth, full, rng)
}

fn names(alphabet: &Alphabet) -> Vec<String> {
    alphabet.names().to_vec()
}

/// Ramped half-and-half: depths cycle through `2..=max_depth`, alternating
/// full and grown trees.
pub fn init_population<R: Rng + ?Sized>(cfg: &SearchConfig, alphabet: &Alphabet, rng: &mut R) -> Vec<Formula> {
    let names = names(alphabet);
    let ramp = cfg.max_depth.saturating_sub(1).max(1);
    (0..cfg.population)
        .map(|i| {
            let depth = (2 + (i / 2) % ramp).min(cfg.max_depth);
            let full = i % 2 == 0;
            if cfg.require_always_root {
                Formula::always(random_tree(&names, depth - 1, full, rng))
            } else {
                random_tree(&names, depth, full, rng)
            }
        })
        .collect()
}

/// Preorder indices of the subtrees variation may touch.
fn eligible(f: &Formula, cfg: &SearchConfig) -> core::ops::Range<usize> {
    let start = usize::from(cfg.require_always_root && matches!(f, Formula::Always(_)));
    start..f.complexity().max(start + 1)
}

/// Swaps uniformly chosen subtrees; a child deeper than the bound is replaced
/// by its parent.
pub fn crossover<R: Rng + ?Sized>(a: &Formula, b: &Formula, cfg: &SearchConfig, rng: &mut R) -> (Formula, Formula) {
    let i = rng.gen_range(eligible(a, cfg));
    let j = rng.gen_range(eligible(b, cfg));
    let (mut c, mut d) = (a.clone(), b.clone());
    let from_b = b.subterm(j).expect("index in range").clone();
    let from_a = c.replace_subterm(i, from_b).expect("index in range");
    d.replace_subterm(j, from_a);
    if c.depth() > cfg.max_depth {
        c = a.clone();
    }
    if d.depth() > cfg.max_depth {
        d = b.clone();
    }
    (c, d)
}

/// With probability `cfg.mutation_probability`, replaces a uniformly chosen
/// subtree by a fresh grown tree that keeps the whole within the depth bound.
pub fn mutate<R: Rng + ?Sized>(f: &Formula, cfg: &SearchConfig, alphabet: &Alphabet, rng: &mut R) -> Formula {
    if !rng.gen_bool(cfg.mutation_probability) {
        return f.clone();
    }
    let i = rng.gen_range(eligible(f, cfg));
    let level = f.subterm_level(i).expect("index in range");
    let room = (cfg.max_depth + 1).saturating_sub(level).max(1);
    let mut out = f.clone();
    out.replace_subterm(i, random_tree(&names(alphabet), room, false, rng));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> SearchConfig {
        SearchConfig::default()
    }

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn population_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pop = init_population(&cfg(), &ab(), &mut rng);
        assert_eq!(pop.len(), 100);
        assert!(pop.iter().all(|f| matches!(f, Formula::Always(_))));
        assert!(pop.iter().all(|f| f.depth() <= 6 && f.depth() >= 2));
        assert!(pop.iter().any(|f| f.depth() == 6));
        let again = init_population(&cfg(), &ab(), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(pop, again);
    }

    #[test]
    fn unrestricted_population() {
        let c = SearchConfig { require_always_root: false, max_depth: 3, ..cfg() };
        let pop = init_population(&c, &ab(), &mut ChaCha8Rng::seed_from_u64(2));
        assert!(pop.iter().all(|f| f.depth() <= 3));
        assert!(pop.iter().any(|f| !matches!(f, Formula::Always(_))));
    }

    #[test]
    fn crossover_swaps_bodies() {
        let a = Formula::always(Formula::prop("a"));
        let b = Formula::always(Formula::prop("b"));
        let (c, d) = crossover(&a, &b, &cfg(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!((c, d), (b, a));
    }

    #[test]
    fn crossover_respects_depth() {
        let c = SearchConfig { max_depth: 3, ..cfg() };
        let a = Formula::always(Formula::next(Formula::prop("a")));
        let b = Formula::always(Formula::eventually(Formula::prop("b")));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rejected = 0;
        for _ in 0..200 {
            let (x, y) = crossover(&a, &b, &c, &mut rng);
            assert!(x.depth() <= 3 && y.depth() <= 3);
            assert!(matches!(x, Formula::Always(_)) && matches!(y, Formula::Always(_)));
            rejected += usize::from(x == a && y != b);
        }
        assert!(rejected > 0, "swapping a leaf for a subtree must sometimes exceed the bound");
    }

    #[test]
    fn mutation() {
        let f = Formula::always(Formula::until(Formula::prop("a"), Formula::prop("b")));
        let never = SearchConfig { mutation_probability: 0.0, ..cfg() };
        assert_eq!(mutate(&f, &never, &ab(), &mut ChaCha8Rng::seed_from_u64(0)), f);
        let always = SearchConfig { mutation_probability: 1.0, ..cfg() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut changed = 0;
        for _ in 0..200 {
            let g = mutate(&f, &always, &ab(), &mut rng);
            assert!(matches!(g, Formula::Always(_)));
            assert!(g.depth() <= 6);
            changed += usize::from(g != f);
        }
        assert!(changed > 100);
        let x = mutate(&f, &always, &ab(), &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(x, mutate(&f, &always, &ab(), &mut ChaCha8Rng::seed_from_u64(9)));
    }
}
