//! Readout network: min-max normalization, sigmoid dense layers, one batch
//! normalization block, mean-squared loss and Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{score_to_digit, Sample};
use crate::error::{Error, Result};

pub const BN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// 64 -> 64 -> batch norm -> 14 -> 1.
    Full,
    /// 64 -> 1.
    SingleLayer,
    /// 64 -> 4 -> 1.
    TwoLayer41,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::SingleLayer => "single_layer",
            Variant::TwoLayer41 => "two_layer_4_1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Variant::Full),
            "single_layer" => Some(Variant::SingleLayer),
            "two_layer_4_1" => Some(Variant::TwoLayer41),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Variant::Full => 0,
            Variant::SingleLayer => 1,
            Variant::TwoLayer41 => 2,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        [Variant::Full, Variant::SingleLayer, Variant::TwoLayer41]
            .into_iter()
            .find(|v| v.code() == c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// `None` trains on the full batch every epoch.
    pub batch_size: Option<usize>,
    pub bn_momentum: f64,
    pub seed: u64,
    pub variant: Variant,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: None,
            bn_momentum: 0.9,
            seed: 7,
            variant: Variant::Full,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Precondition("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Precondition("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Precondition("Adam betas must lie in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.bn_momentum) {
            return Err(Error::Precondition("batch-norm momentum must lie in [0, 1)".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Precondition("batch size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-feature min-max scaling fitted on the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::InsufficientData("no rows".into()))?;
        let d = first.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for r in rows {
            if r.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            for j in 0..d {
                min[j] = min[j].min(r[j]);
                max[j] = max[j].max(r[j]);
            }
        }
        Ok(Self { min, max })
    }

    /// Constant columns map to 0.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    (v - self.min[j]) / span
                } else {
                    v - self.min[j]
                }
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    /// Sigmoid dense layer; `w` is `n_out x n_in`, row-major.
    Dense {
        n_in: usize,
        n_out: usize,
        w: Vec<f64>,
        b: Vec<f64>,
    },
    BatchNorm {
        n: usize,
        gamma: Vec<f64>,
        beta: Vec<f64>,
        running_mean: Vec<f64>,
        running_var: Vec<f64>,
    },
}

impl Layer {
    fn dense(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        Layer::Dense {
            n_in,
            n_out,
            w: (0..n_in * n_out).map(|_| rng.gen_range(-limit..limit)).collect(),
            b: vec![0.0; n_out],
        }
    }

    fn batch_norm(n: usize) -> Self {
        Layer::BatchNorm {
            n,
            gamma: vec![1.0; n],
            beta: vec![0.0; n],
            running_mean: vec![0.0; n],
            running_var: vec![1.0; n],
        }
    }

    pub fn n_out(&self) -> usize {
        match self {
            Layer::Dense { n_out, .. } => *n_out,
            Layer::BatchNorm { n, .. } => *n,
        }
    }

    fn n_trainable(&self) -> usize {
        match self {
            Layer::Dense { w, b, .. } => w.len() + b.len(),
            Layer::BatchNorm { n, .. } => 2 * n,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainMetrics {
    pub epochs: usize,
    /// Mean squared loss of the last training epoch (batch statistics).
    pub final_loss: f64,
    /// RMSE over the training set with frozen statistics.
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    pub variant: Variant,
    pub norm: Normalizer,
    pub layers: Vec<Layer>,
    pub metrics: TrainMetrics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub score: f64,
    pub digit: usize,
}

/// Row-major batch of activations.
#[derive(Debug, Clone)]
struct Batch {
    n: usize,
    x: Vec<f64>,
}

/// What backward needs from one layer's forward pass.
enum Cache {
    Dense { input: Batch, out: Batch },
    BatchNorm { xhat: Batch, inv_std: Vec<f64>, mean: Vec<f64>, var: Vec<f64> },
}

impl ReadoutModel {
    pub fn new(variant: Variant, norm: Normalizer, seed: u64) -> Self {
        let n_in = norm.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = match variant {
            Variant::Full => vec![
                Layer::dense(n_in, 64, &mut rng),
                Layer::batch_norm(64),
                Layer::dense(64, 14, &mut rng),
                Layer::dense(14, 1, &mut rng),
            ],
            Variant::SingleLayer => vec![Layer::dense(n_in, 1, &mut rng)],
            Variant::TwoLayer41 => vec![Layer::dense(n_in, 4, &mut rng), Layer::dense(4, 1, &mut rng)],
        };
        Self {
            variant,
            norm,
            layers,
            metrics: TrainMetrics::default(),
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.norm.dim()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_trainable).sum()
    }

    /// Trainable parameters in declaration order: per layer `w, b` or
    /// `gamma, beta`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            match l {
                Layer::Dense { w, b, .. } => {
                    out.extend_from_slice(w);
                    out.extend_from_slice(b);
                }
                Layer::BatchNorm { gamma, beta, .. } => {
                    out.extend_from_slice(gamma);
                    out.extend_from_slice(beta);
                }
            }
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::ShapeMismatch {
                expected: self.n_params(),
                got: p.len(),
            });
        }
        let mut k = 0;
        let mut take = |dst: &mut Vec<f64>| {
            let n = dst.len();
            dst.copy_from_slice(&p[k..k + n]);
            k += n;
        };
        for l in &mut self.layers {
            match l {
                Layer::Dense { w, b, .. } => {
                    take(w);
                    take(b);
                }
                Layer::BatchNorm { gamma, beta, .. } => {
                    take(gamma);
                    take(beta);
                }
            }
        }
        Ok(())
    }

    fn batch_of(&self, rows: &[Vec<f64>]) -> Result<Batch> {
        let d = self.n_inputs();
        let mut x = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::ShapeMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            x.extend(self.norm.apply(r));
        }
        Ok(Batch { n: rows.len(), x })
    }

    /// Forward pass; `train` selects batch statistics over running ones.
    fn forward(&self, input: Batch, train: bool) -> (Batch, Vec<Cache>) {
        let mut cur = input;
        let mut caches = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            match l {
                Layer::Dense { n_in, n_out, w, b } => {
                    let mut out = vec![0.0; cur.n * n_out];
                    for i in 0..cur.n {
                        let row = &cur.x[i * n_in..(i + 1) * n_in];
                        for o in 0..*n_out {
                            let wr = &w[o * n_in..(o + 1) * n_in];
                            let z: f64 = b[o] + wr.iter().zip(row).map(|(a, x)| a * x).sum::<f64>();
                            out[i * n_out + o] = sigmoid(z);
                        }
                    }
                    let out = Batch {
                        n: cur.n,
                        x: out,
                    };
                    caches.push(Cache::Dense {
                        input: cur,
                        out: out.clone(),
                    });
                    cur = out;
                }
                Layer::BatchNorm {
                    n: d,
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                } => {
                    let (mean, var) = if train {
                        let m = cur.n as f64;
                        let mut mean = vec![0.0; *d];
                        let mut var = vec![0.0; *d];
                        for i in 0..cur.n {
                            for j in 0..*d {
                                mean[j] += cur.x[i * d + j] / m;
                            }
                        }
                        for i in 0..cur.n {
                            for j in 0..*d {
                                var[j] += (cur.x[i * d + j] - mean[j]).powi(2) / m;
                            }
                        }
                        (mean, var)
                    } else {
                        (running_mean.clone(), running_var.clone())
                    };
                    let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();
                    let mut xhat = cur.x.clone();
                    let mut out = cur.x.clone();
                    for i in 0..cur.n {
                        for j in 0..*d {
                            let h = (cur.x[i * d + j] - mean[j]) * inv_std[j];
                            xhat[i * d + j] = h;
                            out[i * d + j] = gamma[j] * h + beta[j];
                        }
                    }
                    caches.push(Cache::BatchNorm {
                        xhat: Batch {
                            n: cur.n,
                            x: xhat,
                        },
                        inv_std,
                        mean,
                        var,
                    });
                    cur = Batch {
                        n: cur.n,
                        x: out,
                    };
                }
            }
        }
        (cur, caches)
    }

    /// Gradient of the loss with respect to the trainable parameters,
    /// given `dl/dy` of the network output.
    fn backward(&self, caches: &[Cache], dy: Vec<f64>) -> Vec<f64> {
        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut g = dy;
        for (l, c) in self.layers.iter().zip(caches).rev() {
            match (l, c) {
                (Layer::Dense { n_in, n_out, w, .. }, Cache::Dense { input, out }) => {
                    let n = input.n;
                    let dz: Vec<f64> = g
                        .iter()
                        .zip(&out.x)
                        .map(|(gi, a)| gi * a * (1.0 - a))
                        .collect();
                    let mut dw = vec![0.0; n_in * n_out];
                    let mut db = vec![0.0; *n_out];
                    let mut dx = vec![0.0; n * n_in];
                    for i in 0..n {
                        let row = &input.x[i * n_in..(i + 1) * n_in];
                        let dxr = &mut dx[i * n_in..(i + 1) * n_in];
                        for o in 0..*n_out {
                            let d = dz[i * n_out + o];
                            if d == 0.0 {
                                continue;
                            }
                            db[o] += d;
                            let dwr = &mut dw[o * n_in..(o + 1) * n_in];
                            let wr = &w[o * n_in..(o + 1) * n_in];
                            for k in 0..*n_in {
                                dwr[k] += d * row[k];
                                dxr[k] += d * wr[k];
                            }
                        }
                    }
                    dw.extend(db);
                    grads.push(dw);
                    g = dx;
                }
                (Layer::BatchNorm { n: d, gamma, .. }, Cache::BatchNorm { xhat, inv_std, .. }) => {
                    let n = xhat.n;
                    let m = n as f64;
                    let mut dgamma = vec![0.0; *d];
                    let mut dbeta = vec![0.0; *d];
                    let mut sum_dh = vec![0.0; *d];
                    let mut sum_dh_h = vec![0.0; *d];
                    for i in 0..n {
                        for j in 0..*d {
                            let k = i * d + j;
                            dgamma[j] += g[k] * xhat.x[k];
                            dbeta[j] += g[k];
                            let dh = g[k] * gamma[j];
                            sum_dh[j] += dh;
                            sum_dh_h[j] += dh * xhat.x[k];
                        }
                    }
                    let mut dx = vec![0.0; n * d];
                    for i in 0..n {
                        for j in 0..*d {
                            let k = i * d + j;
                            let dh = g[k] * gamma[j];
                            dx[k] = inv_std[j] / m * (m * dh - sum_dh[j] - xhat.x[k] * sum_dh_h[j]);
                        }
                    }
                    dgamma.extend(dbeta);
                    grads.push(dgamma);
                    g = dx;
                }
                _ => unreachable!("cache does not match layer"),
            }
        }
        grads.into_iter().rev().flatten().collect()
    }

    /// Mean squared loss over `rows` with batch statistics, and its gradient
    /// with respect to [`params`](Self::params).
    pub fn loss_and_grad(&self, rows: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (loss, grad, _) = self.loss_grad_stats(rows, targets)?;
        Ok((loss, grad))
    }

    /// Loss with batch statistics, without gradients.
    pub fn batch_loss(&self, rows: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
        let (y, _) = self.forward(self.batch_of(rows)?, true);
        Ok(mse(&y.x, targets))
    }

    #[allow(clippy::type_complexity)]
    fn loss_grad_stats(&self, rows: &[Vec<f64>], targets: &[f64]) -> Result<(f64, Vec<f64>, Vec<Cache>)> {
        if rows.len() != targets.len() {
            return Err(Error::ShapeMismatch {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        let (y, caches) = self.forward(self.batch_of(rows)?, true);
        let n = targets.len() as f64;
        let dy: Vec<f64> = y.x.iter().zip(targets).map(|(p, t)| 2.0 * (p - t) / n).collect();
        let grad = self.backward(&caches, dy);
        Ok((mse(&y.x, targets), grad, caches))
    }

    /// Scores with frozen statistics.
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        let (y, _) = self.forward(self.batch_of(rows)?, false);
        Ok(y.x)
    }

    fn update_running(&mut self, caches: &[Cache], momentum: f64) {
        for (l, c) in self.layers.iter_mut().zip(caches) {
            if let (
                Layer::BatchNorm {
                    running_mean,
                    running_var,
                    ..
                },
                Cache::BatchNorm { mean, var, .. },
            ) = (l, c)
            {
                for j in 0..mean.len() {
                    running_mean[j] = momentum * running_mean[j] + (1.0 - momentum) * mean[j];
                    running_var[j] = momentum * running_var[j] + (1.0 - momentum) * var[j];
                }
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        finite(&self.norm.min)
            && finite(&self.norm.max)
            && self.layers.iter().all(|l| match l {
                Layer::Dense { w, b, .. } => finite(w) && finite(b),
                Layer::BatchNorm {
                    gamma,
                    beta,
                    running_mean,
                    running_var,
                    ..
                } => finite(gamma) && finite(beta) && finite(running_mean) && finite(running_var),
            })
    }
}

fn mse(y: &[f64], t: &[f64]) -> f64 {
    y.iter().zip(t).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / t.len() as f64
}

pub fn train(samples: &[Sample], cfg: &TrainConfig) -> Result<ReadoutModel> {
    cfg.validate()?;
    if samples.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "need at least 8 samples, got {}",
            samples.len()
        )));
    }
    let mut seen = [false; super::CLASSES];
    for s in samples {
        seen[s.label] = true;
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::InsufficientData("training set must cover every label".into()));
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    let targets: Vec<f64> = samples.iter().map(Sample::target).collect();
    let norm = Normalizer::fit(&rows)?;
    let mut model = ReadoutModel::new(cfg.variant, norm, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let np = model.n_params();
    let (mut m, mut v) = (vec![0.0; np], vec![0.0; np]);
    let mut params = model.params();
    let batch = cfg.batch_size.unwrap_or(rows.len()).min(rows.len());
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut step = 0i32;
    let mut last_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        if batch < rows.len() {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let (r, t): (Vec<Vec<f64>>, Vec<f64>) = chunk.iter().map(|&i| (rows[i].clone(), targets[i])).unzip();
            let (loss, grad, caches) = model.loss_grad_stats(&r, &t)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::DivergedTraining(epoch));
            }
            epoch_loss += loss * chunk.len() as f64;
            model.update_running(&caches, cfg.bn_momentum);
            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - cfg.beta2.powi(step);
            for k in 0..np {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                params[k] -= cfg.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + cfg.adam_eps);
            }
            model.set_params(&params)?;
        }
        last_loss = epoch_loss / rows.len() as f64;
        if epoch % 500 == 0 {
            log::debug!("epoch {epoch}: loss {last_loss:.6}");
        }
    }
    let scores = model.predict(&rows)?;
    let rmse = mse(&scores, &targets).sqrt();
    if !rmse.is_finite() || !model.all_finite() {
        return Err(Error::DivergedTraining(cfg.epochs));
    }
    model.metrics = TrainMetrics {
        epochs: cfg.epochs,
        final_loss: last_loss,
        rmse,
    };
    Ok(model)
}

pub fn infer(model: &ReadoutModel, features: &[f64]) -> Result<Prediction> {
    if features.len() != model.n_inputs() {
        return Err(Error::ShapeMismatch {
            expected: model.n_inputs(),
            got: features.len(),
        });
    }
    let score = model.predict(&[features.to_vec()])?[0];
    Ok(Prediction {
        score,
        digit: score_to_digit(score),
    })
}

/// Fraction of samples whose decoded digit equals the label.
pub fn accuracy(model: &ReadoutModel, samples: &[Sample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    let scores = model.predict(&rows)?;
    let hits = scores
        .iter()
        .zip(samples)
        .filter(|(s, x)| score_to_digit(**s) == x.label)
        .count();
    Ok(hits as f64 / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n_per: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for _ in 0..n_per {
            for label in 0..4 {
                let f = (0..64)
                    .map(|j| 1000.0 + 5.0 * label as f64 * (j as f64 / 64.0) + rng.gen_range(-0.5..0.5))
                    .collect();
                out.push(Sample::new(f, label).unwrap());
            }
        }
        out
    }

    #[test]
    fn separable_data_is_learned() {
        let s = synthetic(10, 1);
        let cfg = TrainConfig {
            epochs: 400,
            ..Default::default()
        };
        let m = train(&s, &cfg).unwrap();
        assert_eq!(accuracy(&m, &s).unwrap(), 1.0);
    }

    #[test]
    fn zero_epochs_rejected() {
        let s = synthetic(2, 1);
        let cfg = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(matches!(train(&s, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn infer_shapes() {
        let s = synthetic(2, 2);
        let m = train(&s, &TrainConfig { epochs: 5, ..Default::default() }).unwrap();
        assert!(matches!(infer(&m, &[0.0; 63]), Err(Error::ShapeMismatch { .. })));
        let p = infer(&m, &[0.0; 64]).unwrap();
        assert!(p.digit < 4);
    }

    #[test]
    fn normalizer_is_idempotent_on_its_range() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![2.0, 5.0]];
        let n = Normalizer::fit(&rows).unwrap();
        let z: Vec<Vec<f64>> = rows.iter().map(|r| n.apply(r)).collect();
        assert_eq!(z[0], vec![0.0, 0.0]);
        assert_eq!(z[1], vec![1.0, 0.0]);
        let n2 = Normalizer::fit(&z).unwrap();
        for r in &z {
            assert_eq!(&n2.apply(r), r);
        }
    }
}
