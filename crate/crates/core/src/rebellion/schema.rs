//! Column layout of recorded snapshots.
//!
//! Every row holds four identifiers, 38 variables and three labels. The 38
//! variables are nine quantities captured at each of the three intra-tick
//! steps (suffix `0`, `1`, `2`) plus eleven per-agent or global constants.

use crate::refdata::{Column, ColumnKind};

pub const IDENTIFIERS: [&str; 4] = ["runId", "tick", "agentId", "period"];

pub const STEP_VARIABLES: [&str; 9] = [
    "jailTerm",
    "active",
    "movementTracker",
    "freeNeighborhood",
    "copsOnNeighborhood",
    "activesOnNeighborhood",
    "estimatedArrestProbability",
    "xcor",
    "ycor",
];

pub const STATIC_VARIABLES: [&str; 11] = [
    "breed",
    "grievance",
    "perceivedHardship",
    "riskAversion",
    "governmentLegitimacy",
    "threshold",
    "vision",
    "arrestConstant",
    "maxJailTerm",
    "citizenDensity",
    "copDensity",
];

pub const LABELS: [&str; 3] = ["movedLabel", "activeLabel", "enforcedLabel"];

pub const STEPS: usize = 3;
pub const N_VARIABLES: usize = STEP_VARIABLES.len() * STEPS + STATIC_VARIABLES.len();

/// Variables of one snapshot row, in [`variable_names`] order.
pub type Row = [f64; N_VARIABLES];

pub(super) const JAIL: usize = 0;
pub(super) const ACTIVE: usize = 1;
pub(super) const MOVED: usize = 2;
pub(super) const FREE: usize = 3;
pub(super) const COPS: usize = 4;
pub(super) const ACTIVES: usize = 5;
pub(super) const ARREST_P: usize = 6;
pub(super) const XCOR: usize = 7;
pub(super) const YCOR: usize = 8;

pub(super) const BREED: usize = 0;
pub(super) const GRIEVANCE: usize = 1;
pub(super) const HARDSHIP: usize = 2;
pub(super) const RISK_AVERSION: usize = 3;
pub(super) const LEGITIMACY: usize = 4;
pub(super) const THRESHOLD: usize = 5;
pub(super) const VISION: usize = 6;
pub(super) const ARREST_K: usize = 7;
pub(super) const MAX_JAIL: usize = 8;
pub(super) const CITIZEN_DENSITY: usize = 9;
pub(super) const COP_DENSITY: usize = 10;

/// Slot of step variable `var` captured at `step`.
pub const fn step_slot(var: usize, step: usize) -> usize {
    step * STEP_VARIABLES.len() + var
}

pub const fn static_slot(var: usize) -> usize {
    STEP_VARIABLES.len() * STEPS + var
}

pub fn variable_names() -> Vec<String> {
    let mut names: Vec<String> = (0..STEPS)
        .flat_map(|s| STEP_VARIABLES.iter().map(move |v| format!("{v}{s}")))
        .collect();
    names.extend(STATIC_VARIABLES.iter().map(|s| s.to_string()));
    names
}

/// Variables a rule may read when it runs before step `step` finishes,
/// i.e. everything captured at steps `0..=step` plus the constants.
pub fn variables_through(step: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..=step)
        .flat_map(|s| STEP_VARIABLES.iter().map(move |v| format!("{v}{s}")))
        .collect();
    names.extend(STATIC_VARIABLES.iter().map(|s| s.to_string()));
    names
}

pub fn columns() -> Vec<Column> {
    let mut cols: Vec<Column> = IDENTIFIERS
        .iter()
        .map(|n| Column::new(*n, ColumnKind::Identifier))
        .collect();
    cols.extend(variable_names().into_iter().map(|n| Column::new(n, ColumnKind::Numeric)));
    cols.extend(LABELS.iter().map(|n| Column::new(*n, ColumnKind::Label)));
    cols
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_counts() {
        assert_eq!(N_VARIABLES, 38);
        assert_eq!(columns().len(), 38 + 3 + 4);
        let names = variable_names();
        assert_eq!(names[step_slot(FREE, 0)], "freeNeighborhood0");
        assert_eq!(names[step_slot(ARREST_P, 2)], "estimatedArrestProbability2");
        assert_eq!(names[static_slot(BREED)], "breed");
        assert_eq!(names[static_slot(COP_DENSITY)], "copDensity");
        assert_eq!(variables_through(0).len(), 20);
        assert_eq!(variables_through(2).len(), 38);
    }
}
