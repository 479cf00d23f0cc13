//! Holm, Benjamini–Hochberg and Bonferroni thresholds.

use serde::{Deserialize, Serialize};

use super::InferenceError;

/// Error criterion and the procedure that controls it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorControl {
    /// Family-wise error rate, Holm step-down.
    #[serde(rename = "FWER_Holm")]
    Fwer,
    /// False discovery rate, Benjamini–Hochberg step-up.
    #[serde(rename = "FDR_BH")]
    Fdr,
    /// Per-family error rate, Bonferroni cutoff q/n.
    #[serde(rename = "PFER_Bonferroni")]
    Pfer,
}

impl ErrorControl {
    pub const ALL: [ErrorControl; 3] = [ErrorControl::Fwer, ErrorControl::Fdr, ErrorControl::Pfer];

    pub fn default_level(self) -> f64 {
        match self {
            ErrorControl::Fwer => 0.1,
            ErrorControl::Fdr => 0.01,
            ErrorControl::Pfer => 0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorControl::Fwer => "FWER",
            ErrorControl::Fdr => "FDR",
            ErrorControl::Pfer => "PFER",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjustment {
    /// Largest rejected p-value, or q/n when nothing is rejected.
    pub t_adj: f64,
    /// Sorted indices with p ≤ t_adj.
    pub rejected: Vec<usize>,
}

/// Data-dependent significance threshold for `pvalues` at level `q`.
pub fn adjust_threshold(pvalues: &[f64], method: ErrorControl, q: f64) -> Result<Adjustment, InferenceError> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(InferenceError::BadLevel(q));
    }
    if let Some(&p) = pvalues.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(InferenceError::Domain(format!("p-value {p} outside (0, 1]")));
    }
    let n = pvalues.len();
    if n == 0 {
        return Ok(Adjustment { t_adj: q.min(1.0), rejected: Vec::new() });
    }
    let nf = n as f64;
    let mut sorted = pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);

    let cutoff = match method {
        ErrorControl::Fwer => sorted
            .iter()
            .enumerate()
            .take_while(|&(i, &p)| p <= q / (nf - i as f64))
            .last()
            .map(|(_, &p)| p),
        ErrorControl::Fdr => sorted
            .iter()
            .enumerate()
            .rev()
            .find(|&(i, &p)| p <= (i + 1) as f64 * q / nf)
            .map(|(_, &p)| p),
        ErrorControl::Pfer => None,
    };
    let t_adj = cutoff.unwrap_or(q / nf).min(1.0);
    let rejected = (0..n).filter(|&i| pvalues[i] <= t_adj).collect();
    Ok(Adjustment { t_adj, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy_pvalues() -> Vec<f64> {
        let d2 = [0.0, 0.24, 0.29, 0.29, 3.71, 3.71, 3.76, 21.386];
        d2.iter().map(|d: &f64| (-d / 2.0).exp()).collect()
    }

    #[test]
    fn toy_thresholds() {
        let p = toy_pvalues();
        let holm = adjust_threshold(&p, ErrorControl::Fwer, 0.1).unwrap();
        assert_eq!(holm.rejected, vec![7]);
        assert_eq!(holm.t_adj, p[7]);
        let bh = adjust_threshold(&p, ErrorControl::Fdr, 0.01).unwrap();
        assert_eq!(bh.rejected, vec![7]);
        assert_eq!(bh.t_adj, p[7]);
        let pfer = adjust_threshold(&p, ErrorControl::Pfer, 0.5).unwrap();
        assert_eq!(pfer.t_adj, 0.0625);
        assert_eq!(pfer.rejected, vec![7]);
    }

    #[test]
    fn nothing_significant() {
        let p = vec![1.0; 10];
        for m in ErrorControl::ALL {
            let a = adjust_threshold(&p, m, 0.1).unwrap();
            assert!(a.rejected.is_empty());
            assert_eq!(a.t_adj, 0.01);
        }
        assert_eq!(adjust_threshold(&p, ErrorControl::Fwer, 0.0), Err(InferenceError::BadLevel(0.0)));
        assert!(adjust_threshold(&[0.0], ErrorControl::Fwer, 0.1).is_err());
    }

    #[test]
    fn ties_rejected_together() {
        let p = vec![0.001, 0.001, 0.5, 0.9];
        let a = adjust_threshold(&p, ErrorControl::Fwer, 0.05).unwrap();
        assert_eq!(a.rejected, vec![0, 1]);
        let a = adjust_threshold(&[0.02, 0.02, 0.02, 0.9], ErrorControl::Fdr, 0.1).unwrap();
        assert_eq!(a.rejected, vec![0, 1, 2]);
    }

    proptest! {
        #[test]
        fn permutation_equivariant(p in prop::collection::vec(1e-6f64..=1.0, 1..60), seed in any::<u64>(), q in 0.01f64..0.5) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut perm: Vec<usize> = (0..p.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            for m in ErrorControl::ALL {
                let a = adjust_threshold(&p, m, q).unwrap();
                let b = adjust_threshold(&permuted, m, q).unwrap();
                prop_assert_eq!(a.t_adj, b.t_adj);
                let mut mapped: Vec<usize> = b.rejected.iter().map(|&j| perm[j]).collect();
                mapped.sort_unstable();
                prop_assert_eq!(mapped, a.rejected);
            }
        }
    }
}
