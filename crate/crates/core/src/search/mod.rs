//! Multiobjective genetic programming over formula trees (NSGA-II), minimizing
//! the objective value and the formula size.

mod nsga;
mod variation;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use nsga::{crowding_distance, dominates, nondominated_sort};
pub use variation::{crossover, init_population, mutate, random_tree};

use crate::automata::DEFAULT_STATE_BUDGET;
use crate::ltl::{Alphabet, Formula};
use crate::objective::{IterationOptions, ObjectiveKind, ScoringContext};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub population: usize,
    pub generations: usize,
    pub runs: usize,
    pub objective: ObjectiveKind,
    pub gamma: f64,
    pub seed: u64,
    /// Bound on tree depth; a single leaf has depth 1.
    pub max_depth: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    /// Keep an `Always` operator at the root of every individual.
    pub require_always_root: bool,
    /// Automaton state budget per formula.
    pub budget: usize,
    pub iteration: IterationOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 100,
            generations: 50,
            runs: 20,
            objective: ObjectiveKind::Action,
            gamma: 0.99,
            seed: 0,
            max_depth: 6,
            crossover_probability: 0.9,
            mutation_probability: 0.1,
            require_always_root: true,
            budget: DEFAULT_STATE_BUDGET,
            iteration: IterationOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for ConfigError {}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(m.to_string()));
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return fail("population must be even and at least 4");
        }
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail("gamma must lie in (0, 1)");
        }
        if self.max_depth < 2 {
            return fail("max depth must be at least 2");
        }
        for p in [self.crossover_probability, self.mutation_probability] {
            if !(0.0..=1.0).contains(&p) {
                return fail("probabilities must lie in [0, 1]");
            }
        }
        if self.budget == 0 {
            return fail("budget must be positive");
        }
        Ok(())
    }
}

/// Scores batches of formulas. Implementations must return the same score for
/// a formula regardless of batch composition or order.
pub trait Evaluate {
    fn evaluate(&mut self, formulas: &[Formula]) -> Vec<f64>;
}

/// Sequential evaluator with a cache keyed by canonical formula text.
/// Formulas that fail to compile or evaluate get the context's worst score.
pub struct CachedEvaluator<'a> {
    ctx: ScoringContext<'a>,
    cache: BTreeMap<String, f64>,
    failures: usize,
}

impl<'a> CachedEvaluator<'a> {
    pub fn new(ctx: ScoringContext<'a>) -> Self {
        CachedEvaluator { ctx, cache: BTreeMap::new(), failures: 0 }
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Number of distinct formulas that received the worst-case score.
    pub fn failures(&self) -> usize {
        self.failures
    }
}

impl Evaluate for CachedEvaluator<'_> {
    fn evaluate(&mut self, formulas: &[Formula]) -> Vec<f64> {
        formulas
            .iter()
            .map(|f| {
                let key = f.to_string();
                if let Some(&v) = self.cache.get(&key) {
                    return v;
                }
                let v = self.ctx.score(f).unwrap_or_else(|_| {
                    self.failures += 1;
                    self.ctx.worst_score()
                });
                self.cache.insert(key, v);
                v
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredFormula {
    pub formula: Formula,
    pub objective: f64,
    pub complexity: usize,
    /// Index of the nondominated front (0 is best).
    pub rank: usize,
    pub crowding: f64,
}

impl ScoredFormula {
    fn point(&self) -> (f64, f64) {
        (self.objective, self.complexity as f64)
    }
}

fn score_all(formulas: Vec<Formula>, eval: &mut dyn Evaluate) -> Vec<ScoredFormula> {
    let scores = eval.evaluate(&formulas);
    formulas
        .into_iter()
        .zip(scores)
        .map(|(formula, objective)| ScoredFormula {
            complexity: formula.complexity(),
            formula,
            objective,
            rank: 0,
            crowding: 0.0,
        })
        .collect()
}

/// Keeps the best `size` individuals by front, then by crowding distance,
/// updating ranks and distances.
fn environmental_selection(mut pool: Vec<ScoredFormula>, size: usize) -> Vec<ScoredFormula> {
    let points: Vec<(f64, f64)> = pool.iter().map(ScoredFormula::point).collect();
    let mut chosen = Vec::with_capacity(size);
    for (rank, front) in nondominated_sort(&points).into_iter().enumerate() {
        if chosen.len() >= size {
            break;
        }
        let dist = crowding_distance(&points, &front);
        let mut members: Vec<(usize, f64)> = front.into_iter().zip(dist).collect();
        if chosen.len() + members.len() > size {
            members.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            members.truncate(size - chosen.len());
        }
        for (i, d) in members {
            pool[i].rank = rank;
            pool[i].crowding = d;
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    let mut slots: Vec<Option<ScoredFormula>> = pool.into_iter().map(Some).collect();
    chosen.into_iter().map(|i| slots[i].take().expect("chosen once")).collect()
}

fn tournament<'p, R: Rng + ?Sized>(pop: &'p [ScoredFormula], rng: &mut R) -> &'p ScoredFormula {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    match a.rank.cmp(&b.rank).then(b.crowding.total_cmp(&a.crowding)) {
        Ordering::Greater => b,
        _ => a,
    }
}

/// One NSGA-II run; returns its first front, one entry per distinct formula,
/// ordered by objective, complexity, then text.
pub fn run_single(cfg: &SearchConfig, alphabet: &Alphabet, run: usize, eval: &mut dyn Evaluate) -> Vec<ScoredFormula> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run as u64);
    let initial = score_all(init_population(cfg, alphabet, &mut rng), eval);
    let mut pop = environmental_selection(initial, cfg.population);
    for _ in 0..cfg.generations {
        let mut offspring = Vec::with_capacity(cfg.population);
        while offspring.len() < cfg.population {
            let a = &tournament(&pop, &mut rng).formula;
            let b = &tournament(&pop, &mut rng).formula;
            let (c, d) = if rng.gen_bool(cfg.crossover_probability) {
                crossover(a, b, cfg, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            offspring.push(mutate(&c, cfg, alphabet, &mut rng));
            offspring.push(mutate(&d, cfg, alphabet, &mut rng));
        }
        let mut pool = pop;
        pool.extend(score_all(offspring, eval));
        pop = environmental_selection(pool, cfg.population);
    }
    let mut front: Vec<ScoredFormula> = Vec::new();
    let mut seen = BTreeMap::new();
    for s in pop.into_iter().filter(|s| s.rank == 0) {
        if seen.insert(s.formula.to_string(), ()).is_none() {
            front.push(s);
        }
    }
    front.sort_by(|a, b| {
        a.objective
            .total_cmp(&b.objective)
            .then(a.complexity.cmp(&b.complexity))
            .then_with(|| a.formula.to_string().cmp(&b.formula.to_string()))
    });
    front
}

/// A formula with the number of runs whose final front contained it.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontEntry {
    pub formula: Formula,
    pub objective: f64,
    pub complexity: usize,
    pub runs: usize,
}

/// The nondominated members of a set of entries.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParetoFront {
    pub members: Vec<FrontEntry>,
}

impl ParetoFront {
    pub fn from_entries(entries: &[FrontEntry]) -> Self {
        let point = |e: &FrontEntry| (e.objective, e.complexity as f64);
        let members = entries
            .iter()
            .filter(|e| !entries.iter().any(|o| dominates(point(o), point(e))))
            .cloned()
            .collect();
        ParetoFront { members }
    }

    pub fn get(&self, text: &str) -> Option<&FrontEntry> {
        self.members.iter().find(|e| e.formula.to_string() == text)
    }
}

/// Results of repeated runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    /// Final first front of each run.
    pub runs: Vec<Vec<ScoredFormula>>,
    /// Every formula efficient in at least one run, by run count (descending),
    /// objective, complexity, then text.
    pub entries: Vec<FrontEntry>,
    /// Nondominated subset of `entries`.
    pub front: ParetoFront,
}

impl SearchReport {
    pub fn entry(&self, text: &str) -> Option<&FrontEntry> {
        self.entries.iter().find(|e| e.formula.to_string() == text)
    }

    /// Number of runs in which `text` was Pareto efficient.
    pub fn runs_efficient(&self, text: &str) -> usize {
        self.entry(text).map_or(0, |e| e.runs)
    }
}

pub fn aggregate(runs: Vec<Vec<ScoredFormula>>) -> SearchReport {
    let mut table: BTreeMap<String, FrontEntry> = BTreeMap::new();
    for front in &runs {
        for s in front {
            table
                .entry(s.formula.to_string())
                .or_insert_with(|| FrontEntry {
                    formula: s.formula.clone(),
                    objective: s.objective,
                    complexity: s.complexity,
                    runs: 0,
                })
                .runs += 1;
        }
    }
    let mut entries: Vec<(String, FrontEntry)> = table.into_iter().collect();
    entries.sort_by(|(ta, a), (tb, b)| {
        b.runs
            .cmp(&a.runs)
            .then(a.objective.total_cmp(&b.objective))
            .then(a.complexity.cmp(&b.complexity))
            .then_with(|| ta.cmp(tb))
    });
    let entries: Vec<FrontEntry> = entries.into_iter().map(|(_, e)| e).collect();
    let front = ParetoFront::from_entries(&entries);
    SearchReport { runs, entries, front }
}

/// All runs of `cfg`, sequentially, sharing one evaluator.
pub fn run_nsga2(cfg: &SearchConfig, alphabet: &Alphabet, eval: &mut dyn Evaluate) -> Result<SearchReport, ConfigError> {
    cfg.validate()?;
    let runs = (0..cfg.runs).map(|r| run_single(cfg, alphabet, r, eval)).collect();
    Ok(aggregate(runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    /// Scores by a fixed table, falling back to size.
    struct Table(Vec<(&'static str, f64)>);

    impl Evaluate for Table {
        fn evaluate(&mut self, formulas: &[Formula]) -> Vec<f64> {
            formulas
                .iter()
                .map(|f| {
                    let t = f.to_string();
                    self.0.iter().find(|(k, _)| *k == t).map_or(10.0 + f.complexity() as f64, |&(_, v)| v)
                })
                .collect()
        }
    }

    fn small() -> SearchConfig {
        SearchConfig { population: 20, generations: 10, runs: 3, ..SearchConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        assert!(SearchConfig { population: 5, ..small() }.validate().is_err());
        assert!(SearchConfig { population: 2, ..small() }.validate().is_err());
        assert!(SearchConfig { gamma: 1.0, ..small() }.validate().is_err());
        assert!(SearchConfig { mutation_probability: 1.5, ..small() }.validate().is_err());
    }

    #[test]
    fn finds_the_planted_optimum_and_is_deterministic() {
        let ab = Alphabet::new(["a", "b"]).unwrap();
        let mut eval = Table(vec![("G (a)", -5.0), ("G ((a) & (b))", -6.0)]);
        let report = run_nsga2(&small(), &ab, &mut eval).unwrap();
        assert_eq!(report.runs.len(), 3);
        assert!(report.runs_efficient("G (a)") >= 2);
        let again = run_nsga2(&small(), &ab, &mut Table(vec![("G (a)", -5.0), ("G ((a) & (b))", -6.0)])).unwrap();
        assert_eq!(report, again);
        for w in report.entries.windows(2) {
            assert!(w[0].runs >= w[1].runs);
        }
        for a in &report.front.members {
            for b in &report.front.members {
                assert!(!dominates((a.objective, a.complexity as f64), (b.objective, b.complexity as f64)));
            }
        }
    }

    #[test]
    fn clones_give_a_single_formula_front() {
        let clone = Formula::always(Formula::prop("a"));
        let pop = score_all(vec![clone.clone(); 20], &mut Table(vec![]));
        let selected = environmental_selection(pop, 20);
        assert!(selected.iter().all(|s| s.rank == 0));
        let mut front = Vec::new();
        let mut seen = BTreeMap::new();
        for s in selected {
            if seen.insert(s.formula.to_string(), ()).is_none() {
                front.push(s.formula);
            }
        }
        assert_eq!(front, [clone]);
    }

    #[test]
    fn selection_prefers_better_fronts() {
        let mk = |o: f64, c: usize| ScoredFormula {
            formula: Formula::True,
            objective: o,
            complexity: c,
            rank: 0,
            crowding: 0.0,
        };
        let pool = vec![mk(3.0, 3), mk(1.0, 2), mk(2.0, 1), mk(4.0, 4), mk(0.0, 5), mk(5.0, 5)];
        let kept = environmental_selection(pool, 3);
        let objs: Vec<f64> = kept.iter().map(|s| s.objective).collect();
        assert_eq!(objs, [1.0, 2.0, 0.0]);
        assert!(kept.iter().all(|s| s.rank == 0));
    }

    #[test]
    fn aggregate_counts_runs() {
        let s = |t: &str, o: f64| ScoredFormula {
            formula: t.parse::<Formula>().unwrap(),
            objective: o,
            complexity: t.parse::<Formula>().unwrap().complexity(),
            rank: 0,
            crowding: 0.0,
        };
        let report = aggregate(vec![
            vec![s("G a", -1.0), s("G F a", -2.0)],
            vec![s("G a", -1.0)],
            vec![s("G (a & a)", -1.0)],
        ]);
        let order: Vec<String> = report.entries.iter().map(|e| e.formula.to_string()).collect();
        assert_eq!(order, ["G (a)", "G (F (a))", "G ((a) & (a))"]);
        assert_eq!(report.runs_efficient("G (a)"), 2);
        assert!(report.front.get("G ((a) & (a))").is_none());
        assert!(report.front.get("G (F (a))").is_some());
    }
}
