//! Perturbation planning: composing metamorphic relations into
//! discrete epsilon levels with uniform per-relation weights.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::types::{AppliedMr, GoalMeta, TaskSpec};
use crate::metamorph::extract::missing_entities;
use crate::metamorph::relations::{apply_mr, MrId};

/// Uniform weight per applied relation; levels are multiples of this.
pub const MR_WEIGHT: f64 = 0.05;

/// Mild surface rewrites.
pub const LIGHT_POOL: [MrId; 4] = [
    MrId::Synonym,
    MrId::DateFormat,
    MrId::Reordering,
    MrId::RelativeTime,
];

/// Heavier rewrites and injected noise.
pub const MEDIUM_POOL: [MrId; 4] = [
    MrId::Distractor,
    MrId::Correction,
    MrId::Paraphrase,
    MrId::Voice,
];

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("unsupported epsilon level {0}; expected one of 0.0, 0.1, 0.2, 0.3")]
    UnsupportedEpsilon(f64),
}

/// A drawn perturbation plan for one episode. Relations are stored in
/// their fixed application order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub epsilon: f64,
    pub selected: Vec<MrId>,
}

impl PerturbationPlan {
    pub fn weight_sum(&self) -> f64 {
        self.selected.len() as f64 * MR_WEIGHT
    }
}

fn draw(pool: &[MrId], n: usize, rng: &mut ChaCha8Rng) -> Vec<MrId> {
    let mut pool: Vec<MrId> = pool.to_vec();
    pool.shuffle(rng);
    pool.truncate(n);
    pool
}

/// Draws the relations for one epsilon level. Task-blind: the same
/// seed yields the same plan for every task.
///
/// Level composition: 0.1 draws two from the light pool; 0.2 adds two
/// from the medium pool; 0.3 further adds Paraphrase (or SplitMerge if
/// Paraphrase was already drawn) and Correction (substituted likewise),
/// totaling six relations at 0.05 each.
pub fn plan_perturbation(epsilon: f64, rng: &mut ChaCha8Rng) -> Result<PerturbationPlan, PlanError> {
    let steps = (epsilon / MR_WEIGHT).round() as i64;
    let mut selected: Vec<MrId> = Vec::new();
    match steps {
        0 if epsilon == 0.0 => {}
        2 if (epsilon - 0.1).abs() < 1e-12 => {
            selected = draw(&LIGHT_POOL, 2, rng);
        }
        4 if (epsilon - 0.2).abs() < 1e-12 => {
            selected = draw(&LIGHT_POOL, 2, rng);
            selected.extend(draw(&MEDIUM_POOL, 2, rng));
        }
        6 if (epsilon - 0.3).abs() < 1e-12 => {
            selected = draw(&LIGHT_POOL, 2, rng);
            selected.extend(draw(&MEDIUM_POOL, 2, rng));
            // Forced heavy pair, substituting to avoid duplicates.
            for forced in [MrId::Paraphrase, MrId::Correction] {
                if !selected.contains(&forced) {
                    selected.push(forced);
                    continue;
                }
                let sub = [MrId::SplitMerge, MrId::Voice, MrId::Distractor]
                    .into_iter()
                    .find(|m| !selected.contains(m))
                    .expect("substitute pool cannot be exhausted");
                selected.push(sub);
            }
        }
        _ => return Err(PlanError::UnsupportedEpsilon(epsilon)),
    }
    selected.sort_by_key(|m| m.apply_rank());
    Ok(PerturbationPlan { epsilon, selected })
}

/// Which pool a relation belongs to for substitution purposes.
fn same_pool(mr: MrId) -> &'static [MrId] {
    if LIGHT_POOL.contains(&mr) {
        &LIGHT_POOL
    } else {
        &MEDIUM_POOL
    }
}

/// Result of applying a plan to one task description.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub description: String,
    pub applied: Vec<AppliedMr>,
}

/// Applies a planned relation, or — when it has no applicable site in
/// this text, or would lose a goal entity — a deterministic substitute
/// from the same pool so the weight accounting stays exact. The
/// distractor relation is the final fallback because it always applies
/// and never touches entities.
fn apply_or_substitute(
    planned: MrId,
    text: &str,
    goal: &GoalMeta,
    used: &[MrId],
    rng: &mut ChaCha8Rng,
) -> (MrId, String) {
    let mut candidates: Vec<MrId> = vec![planned];
    candidates.extend(
        same_pool(planned)
            .iter()
            .copied()
            .filter(|m| *m != planned && !used.contains(m)),
    );
    candidates.sort_by_key(|m| if *m == planned { 0 } else { 1 + m.apply_rank() });
    candidates.push(MrId::Distractor);
    for mr in candidates {
        if let Some(out) = apply_mr(mr, text, goal, rng) {
            if missing_entities(&out, goal).is_empty() {
                return (mr, out);
            }
        }
    }
    unreachable!("distractor always applies and preserves entities");
}

/// Perturbs one task description under a plan. Every applied relation
/// is recorded with its uniform weight; the sum equals the plan's
/// epsilon exactly.
pub fn perturb_description(
    task: &TaskSpec,
    plan: &PerturbationPlan,
    rng: &mut ChaCha8Rng,
) -> Perturbation {
    let mut text = task.description.clone();
    let mut applied = Vec::with_capacity(plan.selected.len());
    let mut used: Vec<MrId> = Vec::new();
    for &planned in &plan.selected {
        let (mr, out) = apply_or_substitute(planned, &text, &task.goal_meta, &used, rng);
        text = out;
        used.push(mr);
        applied.push(AppliedMr {
            mr_id: mr.as_str().to_string(),
            weight: MR_WEIGHT,
        });
    }
    Perturbation {
        description: text,
        applied,
    }
}

/// Convenience: plan and apply in one step, returning a task copy with
/// the perturbed description. Everything except the description is
/// unchanged — verifier, initial state, and goal are preserved by
/// construction.
pub fn perturb_task(
    task: &TaskSpec,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(TaskSpec, Vec<AppliedMr>), PlanError> {
    let plan = plan_perturbation(epsilon, rng)?;
    let p = perturb_description(task, &plan, rng);
    let mut out = task.clone();
    out.description = p.description;
    Ok((out, p.applied))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{all_task_suites, generate_task_suite, verify};
    use crate::metamorph::extract::entity_present;
    use rand_chacha::rand_core::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_epsilon_is_empty_plan_and_identity() {
        let plan = plan_perturbation(0.0, &mut rng(1)).unwrap();
        assert!(plan.selected.is_empty());
        for task in all_task_suites(0) {
            let (out, applied) = perturb_task(&task, 0.0, &mut rng(1)).unwrap();
            assert_eq!(out, task);
            assert!(applied.is_empty());
        }
    }

    #[test]
    fn level_one_draws_two_light_relations() {
        let plan = plan_perturbation(0.1, &mut rng(7)).unwrap();
        assert_eq!(plan.selected.len(), 2);
        assert!((plan.weight_sum() - 0.1).abs() < 1e-12);
        for mr in &plan.selected {
            assert!(LIGHT_POOL.contains(mr), "{mr} not in light pool");
        }
    }

    #[test]
    fn level_two_adds_two_medium_relations() {
        let plan = plan_perturbation(0.2, &mut rng(7)).unwrap();
        assert_eq!(plan.selected.len(), 4);
        assert!((plan.weight_sum() - 0.2).abs() < 1e-12);
        let medium = plan
            .selected
            .iter()
            .filter(|m| MEDIUM_POOL.contains(m))
            .count();
        assert_eq!(medium, 2);
        assert!(plan
            .selected
            .iter()
            .any(|m| matches!(m, MrId::Distractor | MrId::Correction | MrId::Paraphrase | MrId::Voice)));
    }

    #[test]
    fn level_three_has_six_distinct_with_forced_heavy_pair() {
        for seed in 0..50 {
            let plan = plan_perturbation(0.3, &mut rng(seed)).unwrap();
            assert_eq!(plan.selected.len(), 6, "seed {seed}");
            assert!((plan.weight_sum() - 0.3).abs() < 1e-12);
            let mut dedup = plan.selected.clone();
            dedup.dedup();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), 6, "duplicates at seed {seed}: {:?}", plan.selected);
            assert!(
                plan.selected.contains(&MrId::Paraphrase)
                    || plan.selected.contains(&MrId::SplitMerge),
                "seed {seed}: {:?}",
                plan.selected
            );
            assert!(
                plan.selected.contains(&MrId::Correction)
                    || plan.selected.iter().filter(|m| MEDIUM_POOL.contains(m)).count() >= 2,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn unsupported_level_is_an_error() {
        assert_eq!(
            plan_perturbation(0.15, &mut rng(1)),
            Err(PlanError::UnsupportedEpsilon(0.15))
        );
    }

    #[test]
    fn perturbation_is_deterministic() {
        let task = &generate_task_suite(crate::core::types::Domain::Travel, 0)[0];
        let (a, ma) = perturb_task(task, 0.2, &mut rng(42)).unwrap();
        let (b, mb) = perturb_task(task, 0.2, &mut rng(42)).unwrap();
        assert_eq!(a.description, b.description);
        assert_eq!(ma, mb);
    }

    #[test]
    fn different_seeds_differ_but_verifier_is_unchanged() {
        let task = &generate_task_suite(crate::core::types::Domain::Travel, 0)[0];
        let (a, _) = perturb_task(task, 0.2, &mut rng(1)).unwrap();
        let (b, _) = perturb_task(task, 0.2, &mut rng(2)).unwrap();
        assert_ne!(a.description, b.description);
        assert_eq!(a.verifier_id, task.verifier_id);
        assert_eq!(a.verifier_params, task.verifier_params);
        assert_eq!(a.initial_state, task.initial_state);
    }

    #[test]
    fn travel_entities_survive_level_two() {
        let task = &generate_task_suite(crate::core::types::Domain::Travel, 0)[0];
        let (out, _) = perturb_task(task, 0.2, &mut rng(9)).unwrap();
        for entity in ["LON", "PAR", "2026-01-05", "Bob"] {
            assert!(
                entity_present(&out.description, entity),
                "{entity} lost from: {}",
                out.description
            );
        }
    }

    #[test]
    fn weights_always_sum_to_epsilon_across_suite_and_seeds() {
        for task in all_task_suites(0) {
            for &eps in &[0.1, 0.2, 0.3] {
                for seed in 0..10 {
                    let (out, applied) = perturb_task(&task, eps, &mut rng(seed)).unwrap();
                    let sum: f64 = applied.iter().map(|m| m.weight).sum();
                    assert!(
                        (sum - eps).abs() < 1e-9,
                        "{} eps={eps} seed={seed}",
                        task.task_id
                    );
                    let missing = crate::metamorph::extract::missing_entities(
                        &out.description,
                        &task.goal_meta,
                    );
                    assert!(
                        missing.is_empty(),
                        "{} eps={eps} seed={seed} lost {missing:?}: {}",
                        task.task_id,
                        out.description
                    );
                }
            }
        }
    }

    // Goal preservation end-to-end: perturbing never changes what the
    // verifier accepts, because the verifier and state are untouched.
    #[test]
    fn verifier_semantics_unchanged_under_perturbation() {
        let task = &generate_task_suite(crate::core::types::Domain::Travel, 0)[0];
        let (p, _) = perturb_task(task, 0.3, &mut rng(5)).unwrap();
        // Same (initial, final) pair must verify identically.
        let s0 = task.initial_state.clone();
        assert_eq!(verify(task, &s0, &s0).unwrap(), verify(&p, &s0, &s0).unwrap());
    }
}
