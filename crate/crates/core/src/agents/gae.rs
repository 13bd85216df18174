/// Generalized advantage estimates for a continuing rollout: every step
/// bootstraps from the next value, the last from `next_value`.
///
/// Returns `(advantages, returns)` with `returns = advantages + values`.
pub fn compute_gae(rewards: &[f64], values: &[f64], next_value: f64, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len(), "rewards and values must have equal length");
    let n = rewards.len();
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let v_next = if t + 1 < n { values[t + 1] } else { next_value };
        let delta = rewards[t] + gamma * v_next - values[t];
        acc = delta + gamma * lambda * acc;
        adv[t] = acc;
    }
    let ret = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    (adv, ret)
}

/// Shift and scale to zero mean and unit (population) standard deviation.
/// A constant input maps to zeros.
pub fn normalize(xs: &mut [f64]) {
    if xs.is_empty() {
        return;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    for x in xs.iter_mut() {
        *x = if std > 0.0 { (*x - mean) / std } else { 0.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step() {
        let (a, r) = compute_gae(&[1.0], &[0.0], 0.0, 0.99, 0.95);
        assert_eq!(a, vec![1.0]);
        assert_eq!(r, vec![1.0]);
    }

    #[test]
    fn lambda_zero_is_td_error() {
        let rw = [0.3, -1.0, 2.0, 0.5];
        let v = [0.1, 0.7, -0.2, 0.4];
        let (a, _) = compute_gae(&rw, &v, 0.9, 0.99, 0.0);
        for t in 0..4 {
            let vn = if t < 3 { v[t + 1] } else { 0.9 };
            assert_eq!(a[t], rw[t] + 0.99 * vn - v[t]);
        }
    }

    #[test]
    fn three_step_hand_example() {
        let (g, l) = (0.99, 0.95);
        let (a, r) = compute_gae(&[1.0, 0.0, 1.0], &[0.5, 0.5, 0.5], 0.0, g, l);
        let d2 = 1.0 + g * 0.0 - 0.5;
        let d1 = 0.0 + g * 0.5 - 0.5;
        let d0 = 1.0 + g * 0.5 - 0.5;
        let a2 = d2;
        let a1 = d1 + g * l * a2;
        let a0 = d0 + g * l * a1;
        for (x, y) in a.iter().zip([a0, a1, a2]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((r[0] - (a0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn lambda_one_is_monte_carlo() {
        let rw = [0.5, 1.0, -0.25, 2.0, 0.0];
        let v = [0.2, -0.1, 0.3, 0.0, 1.0];
        let (g, nv) = (0.97, 0.6);
        let (a, _) = compute_gae(&rw, &v, nv, g, 1.0);
        for t in 0..rw.len() {
            let mut ret = g.powi((rw.len() - t) as i32) * nv;
            for k in t..rw.len() {
                ret += g.powi((k - t) as i32) * rw[k];
            }
            assert!((a[t] - (ret - v[t])).abs() < 1e-10);
        }
    }

    #[test]
    fn normalization_moments() {
        let mut xs: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 * 0.3 - 7.0).collect();
        normalize(&mut xs);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-9);
        assert!((std - 1.0).abs() < 1e-6);
        let mut c = vec![3.0; 5];
        normalize(&mut c);
        assert_eq!(c, vec![0.0; 5]);
    }
}
