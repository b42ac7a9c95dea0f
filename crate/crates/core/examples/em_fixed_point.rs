//! The closed-form estimate is the fixed point of EM for two tiers: the
//! residuals vanish there and nowhere nearby.

use tiered_review::{em_fixed_point_residual_t2, estimate_theta, Dataset, ObservedStratum};

fn main() -> tiered_review::Result<()> {
    let stratum = ObservedStratum::new(vec![40, 9, 4], vec![12, 5])?;
    let m = 2.0;
    let est = estimate_theta(&Dataset::new(m, vec![stratum.clone()])?)?;
    let r = &est.strata[0].rates;
    let mle = [r[0], r[1], r[2]];
    println!("MLE rates {mle:?}");
    println!(
        "residuals at MLE {:?}",
        em_fixed_point_residual_t2(&stratum, mle, m)?
    );

    for k in 0..3 {
        for f in [0.9, 1.1] {
            let mut p = mle;
            p[k] *= f;
            let res = em_fixed_point_residual_t2(&stratum, p, m)?;
            println!("lambda_{k} x {f}: residuals {res:.4?}");
        }
    }
    Ok(())
}
