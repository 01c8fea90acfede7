use crate::error::{Error, Result};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

/// Mean squared difference.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    same_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::Data("mse of empty vectors".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Binary confusion counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub fp: u64,
}

impl Confusion {
    pub fn tally(predictions: &[bool], labels: &[bool]) -> Result<Self> {
        same_len(predictions.len(), labels.len())?;
        let mut c = Confusion::default();
        for (&p, &l) in predictions.iter().zip(labels) {
            c.add(p, l);
        }
        Ok(c)
    }

    #[inline]
    pub fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
        }
    }

    pub fn merge(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.tn + self.fp
    }

    /// Mean of true-positive and true-negative rates; 0.5 when only one
    /// class is present.
    pub fn balanced_accuracy(&self) -> f64 {
        let pos = self.tp + self.fn_;
        let neg = self.tn + self.fp;
        if pos == 0 || neg == 0 {
            return 0.5;
        }
        // One rounding step: (tp/pos + tn/neg) / 2 over a common denominator.
        let num = self.tp as u128 * neg as u128 + self.tn as u128 * pos as u128;
        num as f64 / (2 * pos as u128 * neg as u128) as f64
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total().max(1) as f64
    }
}

pub fn balanced_accuracy(predictions: &[bool], labels: &[bool]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Data("balanced accuracy of empty vectors".into()));
    }
    Ok(Confusion::tally(predictions, labels)?.balanced_accuracy())
}

/// Gini coefficient `sum |xi - xj| / (2 n^2 mean)`.
pub fn gini(wealth: &[f64]) -> Result<f64> {
    if wealth.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::Data("gini needs finite non-negative values".into()));
    }
    let total: f64 = wealth.iter().sum();
    if total <= 0.0 {
        return Err(Error::Data("gini is undefined when all wealth is zero".into()));
    }
    let mut sorted = wealth.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (2.0 * (i as f64 + 1.0) - n - 1.0) * x)
        .sum();
    Ok(weighted / (n * total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gini_pairs(w: &[f64]) -> f64 {
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let s: f64 = w.iter().flat_map(|a| w.iter().map(move |b| (a - b).abs())).sum();
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[10.0, 10.0]).unwrap(), 100.0);
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn balanced_accuracy_examples() {
        let labels: Vec<bool> = (0..110).map(|i| i < 10).collect();
        let preds: Vec<bool> = (0..110).map(|i| i < 8 || (10..20).contains(&i)).collect();
        assert_eq!(balanced_accuracy(&preds, &labels).unwrap(), 0.85);
        assert_eq!(balanced_accuracy(&labels, &labels).unwrap(), 1.0);
        assert_eq!(balanced_accuracy(&[true; 110], &labels).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[true, false], &[true, true]).unwrap(), 0.5);
        assert!(balanced_accuracy(&[], &[]).is_err());
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[5.0; 8]).unwrap(), 0.0);
        assert_eq!(gini(&[0.0, 0.0, 0.0, 1.0]).unwrap(), 0.75);
        let two_tier: Vec<f64> = (0..20).map(|i| if i < 10 { 100.0 } else { 900.0 }).collect();
        assert_eq!(gini(&two_tier).unwrap(), 0.4);
        assert_eq!(gini_pairs(&two_tier), 0.4);
        assert!(gini(&[0.0, 0.0]).is_err());
        assert!(gini(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn gini_matches_pairwise_definition() {
        let w = [3.0, 0.0, 17.5, 2.0, 2.0, 40.0, 9.25];
        assert!((gini(&w).unwrap() - gini_pairs(&w)).abs() < 1e-12);
    }
}
