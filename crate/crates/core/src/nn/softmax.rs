use rand::Rng;

use super::NnError;

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_total = logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln() + max;
    logits.iter().map(|&z| z - log_total).collect()
}

/// Shannon entropy of a categorical in nats.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Draws an action from the categorical defined by `logits`.
/// Returns `(action, log pi(action), probabilities)`.
pub fn softmax_sample<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> Result<(usize, f64, Vec<f64>), NnError> {
    if logits.is_empty() {
        return Err(NnError::Dimension { expected: 1, got: 0 });
    }
    if logits.iter().any(|z| z.is_nan()) {
        return Err(NnError::NonFinite("NaN logit".into()));
    }
    let probs = softmax(logits);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut action = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            action = i;
            break;
        }
    }
    let log_prob = log_softmax(logits)[action];
    Ok((action, log_prob, probs))
}
