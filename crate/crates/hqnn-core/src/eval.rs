//! Regression evaluation metrics: MSE, MAE, RMSE, Pearson R, the standard
//! deviation around the prediction-to-target least-squares line, and the
//! concordance index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pairwise (cascade) summation for stability on long vectors.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
        }
    }
}

fn mean_of(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

fn check_pair(y: &[f64], p: &[f64], min_len: usize) -> Result<()> {
    if y.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: p.len(),
        });
    }
    if y.len() < min_len {
        return Err(Error::EmptyInput);
    }
    if y.iter().chain(p.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(y: &[f64], p: &[f64]) -> Result<f64> {
    check_pair(y, p, 1)?;
    let sq: Vec<f64> = y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok(mean_of(&sq))
}

/// Mean absolute error.
pub fn mae(y: &[f64], p: &[f64]) -> Result<f64> {
    check_pair(y, p, 1)?;
    let abs: Vec<f64> = y.iter().zip(p).map(|(a, b)| (a - b).abs()).collect();
    Ok(mean_of(&abs))
}

/// Root mean squared error; rmse² = mse.
pub fn rmse(y: &[f64], p: &[f64]) -> Result<f64> {
    mse(y, p).map(f64::sqrt)
}

/// Pearson correlation coefficient between targets and predictions.
pub fn pearson_r(y: &[f64], p: &[f64]) -> Result<f64> {
    check_pair(y, p, 2)?;
    let ym = mean_of(y);
    let pm = mean_of(p);
    let syy: Vec<f64> = y.iter().map(|a| (a - ym) * (a - ym)).collect();
    let spp: Vec<f64> = p.iter().map(|b| (b - pm) * (b - pm)).collect();
    let syp: Vec<f64> = y.iter().zip(p).map(|(a, b)| (a - ym) * (b - pm)).collect();
    let den = (pairwise_sum(&syy) * pairwise_sum(&spp)).sqrt();
    if den == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(pairwise_sum(&syp) / den)
}

/// Standard deviation of targets around the least-squares line fitted from
/// predictions to targets: sqrt(Σ[y_i − (a·p_i + b)]² / (N−1)).
pub fn regression_sd(y: &[f64], p: &[f64]) -> Result<f64> {
    check_pair(y, p, 3)?;
    let pm = mean_of(p);
    let ym = mean_of(y);
    let spp: Vec<f64> = p.iter().map(|b| (b - pm) * (b - pm)).collect();
    let den = pairwise_sum(&spp);
    if den == 0.0 {
        return Err(Error::ConstantPredictions);
    }
    let spy: Vec<f64> = p.iter().zip(y).map(|(b, a)| (b - pm) * (a - ym)).collect();
    let a = pairwise_sum(&spy) / den;
    let b = ym - a * pm;
    let resid: Vec<f64> = y
        .iter()
        .zip(p)
        .map(|(yi, pi)| {
            let r = yi - (a * pi + b);
            r * r
        })
        .collect();
    Ok((pairwise_sum(&resid) / (y.len() - 1) as f64).sqrt())
}

/// Concordance index: over pairs with y_i > y_j, the mean of h(p_i − p_j)
/// where h is 1 for positive, 0.5 for zero, 0 for negative differences.
/// Tied targets are excluded from the pair set.
pub fn concordance_index(y: &[f64], p: &[f64]) -> Result<f64> {
    check_pair(y, p, 2)?;
    let mut num = 0.0;
    let mut z = 0u64;
    for i in 0..y.len() {
        for j in 0..y.len() {
            if y[i] > y[j] {
                z += 1;
                let u = p[i] - p[j];
                num += if u > 0.0 {
                    1.0
                } else if u == 0.0 {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    if z == 0 {
        return Err(Error::NoOrderedPairs);
    }
    Ok(num / z as f64)
}

/// Bundle of all regression metrics for one prediction set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mse: f64,
    pub mae: f64,
    pub rmse: f64,
    pub pearson_r: f64,
    pub sd: f64,
    pub ci: f64,
    pub n: usize,
}

impl MetricReport {
    pub fn compute(y: &[f64], p: &[f64]) -> Result<Self> {
        Ok(Self {
            mse: mse(y, p)?,
            mae: mae(y, p)?,
            rmse: rmse(y, p)?,
            pearson_r: pearson_r(y, p)?,
            sd: regression_sd(y, p)?,
            ci: concordance_index(y, p)?,
            n: y.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_predictions() {
        let y = [1.0, 2.0, 3.0, 5.0];
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert!((pearson_r(&y, &y).unwrap() - 1.0).abs() < 1e-14);
        assert!(regression_sd(&y, &y).unwrap() < 1e-14);
        assert!((concordance_index(&y, &y).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mse_hand_value() {
        // ((1-0)^2 + (3-0)^2) / 2 = 5
        assert!((mse(&[0.0, 0.0], &[1.0, 3.0]).unwrap() - 5.0).abs() < 1e-14);
        // single residual r -> r^2
        assert!((mse(&[2.0], &[0.5]).unwrap() - 2.25).abs() < 1e-14);
    }

    #[test]
    fn mae_rmse_hand_values() {
        let y = [1.0, 2.0, 3.0];
        let p = [2.0, 2.0, 2.0];
        assert!((mae(&y, &p).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((rmse(&y, &p).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pearson_sign_flip() {
        let y = [-1.0, 0.0, 1.0];
        let p = [1.0, 0.0, -1.0];
        assert!((pearson_r(&y, &p).unwrap() + 1.0).abs() < 1e-14);
        assert!(matches!(
            pearson_r(&y, &[2.0, 2.0, 2.0]),
            Err(Error::ZeroVariance)
        ));
    }

    #[test]
    fn sd_absorbs_affine_relations() {
        // y = 2p + 3 exactly -> 0.
        let p = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = p.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!(regression_sd(&y, &p).unwrap() < 1e-12);
    }

    #[test]
    fn sd_closed_form_oracle() {
        // OLS of y on p by hand: a = 1.3, b = -0.2, SS_res = 0.3,
        // SD = sqrt(0.3 / 3) = sqrt(0.1).
        let y = [0.0, 1.0, 2.0, 4.0];
        let p = [0.0, 1.0, 2.0, 3.0];
        assert!((regression_sd(&y, &p).unwrap() - 0.1f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sd_rejects_constant_predictions() {
        assert!(matches!(
            regression_sd(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]),
            Err(Error::ConstantPredictions)
        ));
    }

    #[test]
    fn concordance_cases() {
        let y = [1.0, 2.0, 3.0];
        // anti-concordant -> 0
        assert!(concordance_index(&y, &[3.0, 2.0, 1.0]).unwrap().abs() < 1e-14);
        // all-equal predictions -> every ordered pair contributes 0.5
        assert!((concordance_index(&y, &[7.0, 7.0, 7.0]).unwrap() - 0.5).abs() < 1e-14);
        // all-equal targets: no ordered pairs
        assert!(matches!(
            concordance_index(&[5.0, 5.0], &[1.0, 2.0]),
            Err(Error::NoOrderedPairs)
        ));
    }

    #[test]
    fn ci_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let y: Vec<f64> = (0..15).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..15).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let ci0 = concordance_index(&y, &p).unwrap();
            let warped: Vec<f64> = p.iter().map(|v| (3.0 * v).exp() + v).collect();
            let ci1 = concordance_index(&y, &warped).unwrap();
            assert!((ci0 - ci1).abs() < 1e-12);
        }
    }

    #[test]
    fn report_serializes_one_row() {
        let y = [0.1, 0.9, 0.4, 0.6];
        let p = [0.2, 0.8, 0.3, 0.7];
        let r = MetricReport::compute(&y, &p).unwrap();
        assert_eq!(r.n, 4);
        assert!((r.rmse * r.rmse - r.mse).abs() < 1e-15);
        let json = serde_json::to_string(&r).unwrap();
        let back: MetricReport = serde_json::from_str(&json).unwrap();
        assert_eq!(r, back);
    }

    proptest! {
        #[test]
        fn rmse_at_least_mae(
            pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40)
        ) {
            let y: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
            let p: Vec<f64> = pairs.iter().map(|(_, b)| *b).collect();
            let rm = rmse(&y, &p).unwrap();
            let ma = mae(&y, &p).unwrap();
            prop_assert!(rm >= ma - 1e-9);
        }

        #[test]
        fn pearson_affine_invariance(
            pairs in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 3..30),
            scale in 0.1f64..5.0,
            offset in -10f64..10.0,
        ) {
            let y: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
            let p: Vec<f64> = pairs.iter().map(|(_, b)| *b).collect();
            if let Ok(r0) = pearson_r(&y, &p) {
                let p2: Vec<f64> = p.iter().map(|v| scale * v + offset).collect();
                let r1 = pearson_r(&y, &p2).unwrap();
                prop_assert!((r0 - r1).abs() < 1e-9);
                prop_assert!(r0.abs() <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn sd_affine_invariance(
            pairs in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 4..30),
            scale in 0.1f64..5.0,
            offset in -10f64..10.0,
        ) {
            let y: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
            let p: Vec<f64> = pairs.iter().map(|(_, b)| *b).collect();
            if let Ok(s0) = regression_sd(&y, &p) {
                let p2: Vec<f64> = p.iter().map(|v| scale * v + offset).collect();
                let s1 = regression_sd(&y, &p2).unwrap();
                prop_assert!((s0 - s1).abs() < 1e-8 * (1.0 + s0.abs()));
            }
        }
    }
}
