//! Multi-threaded formula scoring.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use ltlinfer_core::ltl::Formula;
use ltlinfer_core::objective::ScoringContext;
use ltlinfer_core::search::Evaluate;

/// Scores uncached formulas of each batch on a pool of scoped threads.
/// Scores do not depend on the thread count or on batch order.
pub struct ThreadedEvaluator<'a> {
    ctx: ScoringContext<'a>,
    threads: usize,
    cache: HashMap<String, f64>,
    failures: usize,
}

impl<'a> ThreadedEvaluator<'a> {
    pub fn new(ctx: ScoringContext<'a>, threads: usize) -> Self {
        ThreadedEvaluator { ctx, threads: threads.max(1), cache: HashMap::new(), failures: 0 }
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Number of distinct formulas that received the worst-case score.
    pub fn failures(&self) -> usize {
        self.failures
    }

    fn score_pending(&self, pending: &[(String, &Formula)]) -> Vec<Option<f64>> {
        let results: Vec<Mutex<Option<Option<f64>>>> = pending.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let work = || loop {
            let i = next.fetch_add(1, Ordering::Relaxed);
            let Some((text, f)) = pending.get(i) else { break };
            let score = match self.ctx.score(f) {
                Ok(v) => Some(v),
                Err(e) => {
                    log::debug!("{text}: {e}");
                    None
                }
            };
            *results[i].lock().unwrap() = Some(score);
        };
        let workers = self.threads.min(pending.len());
        if workers <= 1 {
            work();
        } else {
            thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(work);
                }
            });
        }
        results.into_iter().map(|r| r.into_inner().unwrap().expect("every formula scored")).collect()
    }
}

impl Evaluate for ThreadedEvaluator<'_> {
    fn evaluate(&mut self, formulas: &[Formula]) -> Vec<f64> {
        let texts: Vec<String> = formulas.iter().map(Formula::to_string).collect();
        let mut pending: Vec<(String, &Formula)> = Vec::new();
        for (text, f) in texts.iter().zip(formulas) {
            if !self.cache.contains_key(text) && !pending.iter().any(|(t, _)| t == text) {
                pending.push((text.clone(), f));
            }
        }
        let worst = self.ctx.worst_score();
        let scores = self.score_pending(&pending);
        for ((text, _), score) in pending.into_iter().zip(scores) {
            if score.is_none() {
                self.failures += 1;
            }
            self.cache.insert(text, score.unwrap_or(worst));
        }
        texts.iter().map(|t| self.cache[t]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ltlinfer_core::domains::{generate_demos, slimchance};
    use ltlinfer_core::objective::{IterationOptions, ObjectiveKind};
    use ltlinfer_core::search::CachedEvaluator;
    use ltlinfer_core::{parse, DEFAULT_STATE_BUDGET};

    #[test]
    fn matches_sequential_scores() {
        let m = slimchance(0.01);
        let demos = generate_demos(&m, &parse("G good", m.alphabet()).unwrap(), 0.99, 3, 10, 0).unwrap();
        let ctx = ScoringContext {
            mdp: &m,
            demos: &demos,
            kind: ObjectiveKind::Action,
            gamma: 0.99,
            budget: DEFAULT_STATE_BUDGET,
            options: IterationOptions::default(),
        };
        let texts = ["G good", "G false", "G (good U X good)", "G good", "F !good", "G (X X good | good)"];
        let formulas: Vec<Formula> = texts.iter().map(|t| parse(t, m.alphabet()).unwrap()).collect();
        let expected = CachedEvaluator::new(ctx).evaluate(&formulas);
        for threads in [1, 3, 8] {
            let mut ev = ThreadedEvaluator::new(ctx, threads);
            assert_eq!(ev.evaluate(&formulas), expected);
            assert_eq!(ev.cached(), 5);
            let reversed: Vec<Formula> = formulas.iter().rev().cloned().collect();
            let mut back = ev.evaluate(&reversed);
            back.reverse();
            assert_eq!(back, expected);
        }
    }

    #[test]
    fn over_budget_formulas_get_the_worst_score() {
        let m = slimchance(0.01);
        let demos = generate_demos(&m, &parse("G good", m.alphabet()).unwrap(), 0.99, 1, 5, 0).unwrap();
        let ctx = ScoringContext {
            mdp: &m,
            demos: &demos,
            kind: ObjectiveKind::State,
            gamma: 0.99,
            budget: 1,
            options: IterationOptions::default(),
        };
        let mut ev = ThreadedEvaluator::new(ctx, 2);
        let f = parse("G F good", m.alphabet()).unwrap();
        assert_eq!(ev.evaluate(&[f]), [ctx.worst_score()]);
        assert_eq!(ev.failures(), 1);
    }
}
