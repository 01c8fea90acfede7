use serde::{Deserialize, Serialize};

use super::{Breed, Task};
use crate::error::{Error, Result};
use crate::expr::{truthy, CompiledRule, Rule};
use crate::refdata::{ColumnKind, Confusion, ReferenceDataset};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    BalancedAccuracy,
    /// Plain accuracy; biased towards the majority class.
    Accuracy,
}

/// Numeric columns and one label, restricted to the rows a task is
/// trained on.
#[derive(Clone, Debug)]
pub struct ClassifierData {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

impl ClassifierData {
    pub fn new(dataset: &ReferenceDataset, task: Task) -> Result<Self> {
        Self::with_label(dataset, task.label(), task.breed_filter())
    }

    pub fn with_label(dataset: &ReferenceDataset, label: &str, breed: Option<Breed>) -> Result<Self> {
        let schema_error = |missing: &str| Error::Schema {
            missing: vec![missing.to_string()],
            available: dataset.names().iter().map(|s| s.to_string()).collect(),
        };
        let labels = dataset.column(label).ok_or_else(|| schema_error(label))?;
        let keep: Vec<bool> = match breed {
            None => vec![true; dataset.n_rows()],
            Some(b) => {
                let want = if b == Breed::Cop { 1.0 } else { 0.0 };
                let breeds = dataset.column("breed").ok_or_else(|| schema_error("breed"))?;
                breeds.iter().map(|&v| v == want).collect()
            }
        };
        let filter = |values: &[f64]| -> Vec<f64> {
            values.iter().zip(&keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect()
        };
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for (i, c) in dataset.columns().iter().enumerate() {
            if c.kind == ColumnKind::Numeric {
                names.push(c.name.clone());
                columns.push(filter(dataset.column_at(i)));
            }
        }
        let labels = filter(labels).into_iter().map(|v| v != 0.0).collect();
        Ok(ClassifierData { names, columns, labels })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn compile(&self, rule: &Rule) -> Result<CompiledRule> {
        let missing: Vec<String> = rule.variables().into_iter().filter(|v| !self.names.contains(v)).collect();
        if !missing.is_empty() {
            return Err(Error::Schema {
                missing,
                available: self.names.clone(),
            });
        }
        CompiledRule::compile_with_names(rule, &self.names)
    }

    pub fn confusion(&self, rule: &CompiledRule) -> Confusion {
        let cols: Vec<&[f64]> = self.columns.iter().map(Vec::as_slice).collect();
        let mut out = Vec::with_capacity(self.len());
        rule.eval_columns(&cols, self.len(), &mut out);
        let mut c = Confusion::default();
        for (&v, &label) in out.iter().zip(&self.labels) {
            c.add(truthy(v), label);
        }
        c
    }
}

/// Score of `rule` as a classifier of the data's label.
pub fn classify_fitness(rule: &Rule, data: &ClassifierData, metric: Metric) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Data("no rows match the classification task".into()));
    }
    let compiled = data.compile(rule).map_err(|e| Error::in_rule(rule, e))?;
    let c = data.confusion(&compiled);
    Ok(match metric {
        Metric::BalancedAccuracy => c.balanced_accuracy(),
        Metric::Accuracy => c.accuracy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_rule;
    use crate::refdata::Column;

    fn table() -> ReferenceDataset {
        let cols = vec![
            Column::new("id", ColumnKind::Identifier),
            Column::new("breed", ColumnKind::Numeric),
            Column::new("x", ColumnKind::Numeric),
            Column::new("y", ColumnKind::Label),
        ];
        let rows: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![i as f64, (i % 2) as f64, i as f64, f64::from(u8::from(i >= 7))])
            .collect();
        ReferenceDataset::from_rows(cols, &rows, "test").unwrap()
    }

    #[test]
    fn scores_and_filters() {
        let d = table();
        let all = ClassifierData::with_label(&d, "y", None).unwrap();
        assert_eq!(all.len(), 10);
        assert_eq!(all.names(), ["breed", "x"]);
        let rule = parse_rule("x > 6").unwrap();
        assert_eq!(classify_fitness(&rule, &all, Metric::BalancedAccuracy).unwrap(), 1.0);
        let loose = parse_rule("x > 5").unwrap();
        // TPR 1, TNR 6/7.
        assert_eq!(classify_fitness(&loose, &all, Metric::Accuracy).unwrap(), 0.9);
        let cops = ClassifierData::with_label(&d, "y", Some(Breed::Cop)).unwrap();
        assert_eq!(cops.len(), 5);
        assert_eq!(cops.labels(), [false, false, false, true, true]);
    }

    #[test]
    fn unknown_variable_lists_columns() {
        let data = ClassifierData::with_label(&table(), "y", None).unwrap();
        let err = classify_fitness(&parse_rule("z > 1").unwrap(), &data, Metric::BalancedAccuracy).unwrap_err();
        match err.root() {
            Error::Schema { missing, available } => {
                assert_eq!(missing, &["z"]);
                assert_eq!(available, &["breed", "x"]);
            }
            other => panic!("{other}"),
        }
        assert!(ClassifierData::with_label(&table(), "nope", None).is_err());
    }

    #[test]
    fn identifiers_are_not_features() {
        let data = ClassifierData::with_label(&table(), "y", None).unwrap();
        assert!(classify_fitness(&parse_rule("id > 6").unwrap(), &data, Metric::BalancedAccuracy).is_err());
    }
}
