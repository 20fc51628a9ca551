//! Metamorphic task perturbation: goal-preserving description
//! transforms, composed into discrete epsilon levels.

pub mod extract;
pub mod lexicon;
pub mod plan;
pub mod relations;

pub use extract::{entity_present, missing_entities};
pub use plan::{
    perturb_description, perturb_task, plan_perturbation, Perturbation, PerturbationPlan,
    PlanError, MR_WEIGHT,
};
pub use relations::{apply_mr, MrCategory, MrId};
