use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{LstmConfig, LstmModel, Trace, Window};
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Central-difference step, in scaled parameter space.
pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }

    pub fn update(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean scaled-space MSE over the training windows after each epoch.
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    /// Training MSE of the initial parameters.
    pub initial_train_mse: f64,
    pub wall_time: Duration,
}

impl TrainReport {
    pub fn best_val_mse(&self) -> f64 {
        self.val_mse[self.best_epoch - 1]
    }

    pub fn final_train_mse(&self) -> f64 {
        self.train_mse[self.best_epoch - 1]
    }

    /// Loss log; wall time is left out so the file is reproducible.
    pub fn write_csv<W: Write>(&self, mut out: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "# best_epoch={}", self.best_epoch)?;
        writeln!(out, "epoch,train_mse,val_mse")?;
        writeln!(out, "0,{},", self.initial_train_mse)?;
        for (e, (t, v)) in self.train_mse.iter().zip(&self.val_mse).enumerate() {
            writeln!(out, "{},{},{}", e + 1, t, v)?;
        }
        Ok(())
    }
}

struct Scaled {
    seq: Vec<f64>,
    target: Vec<f64>,
}

fn scale_all(model: &LstmModel, windows: &[Window]) -> Result<Vec<Scaled>> {
    windows
        .iter()
        .map(|w| {
            Ok(Scaled {
                seq: model.scale_inputs(&w.inputs)?,
                target: model.scale_target(&w.target)?,
            })
        })
        .collect()
}

fn mean_loss(model: &LstmModel, data: &[Scaled], trace: &mut Trace) -> f64 {
    data.iter()
        .map(|s| model.network.loss(&s.seq, &s.target, trace))
        .sum::<f64>()
        / data.len() as f64
}

/// Mini-batch Adam on scaled MSE. The parameters with the lowest validation
/// loss are restored before returning.
pub fn train(model: &mut LstmModel, train: &[Window], val: &[Window], config: &LstmConfig) -> Result<TrainReport> {
    config.validate()?;
    let m = &model.config;
    if (m.input_width, m.hidden_size, m.num_layers, m.window)
        != (config.input_width, config.hidden_size, config.num_layers, config.window)
    {
        return Err(Error::Config(
            "training config does not match the model architecture".into(),
        ));
    }
    if train.is_empty() || val.is_empty() {
        return Err(Error::InsufficientData(format!(
            "training needs windows in both sets (train {}, validation {})",
            train.len(),
            val.len()
        )));
    }
    let started = Instant::now();
    let train_set = scale_all(model, train)?;
    let val_set = scale_all(model, val)?;
    let mut trace = Trace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let initial_train_mse = mean_loss(model, &train_set, &mut trace);
    let n_params = model.network.n_params();
    let mut grad = vec![0.0; n_params];
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best = (f64::INFINITY, 0usize, model.network.params.clone());
    let (mut train_mse, mut val_mse) = (Vec::with_capacity(config.epochs), Vec::with_capacity(config.epochs));

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                let s = &train_set[i];
                model
                    .network
                    .loss_and_grad(&s.seq, &s.target, weight, &mut trace, &mut grad);
            }
            model
                .adam
                .update(&mut model.network.params, &grad, config.learning_rate);
            if model.network.params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
        }
        let t = mean_loss(model, &train_set, &mut trace);
        let v = mean_loss(model, &val_set, &mut trace);
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        if v < best.0 {
            best = (v, epoch, model.network.params.clone());
        }
        train_mse.push(t);
        val_mse.push(v);
    }
    model.network.params = best.2;
    Ok(TrainReport {
        train_mse,
        val_mse,
        best_epoch: best.1,
        initial_train_mse,
        wall_time: started.elapsed(),
    })
}

/// Gradient of the scaled single-window loss with respect to every parameter.
pub fn analytic_gradient(model: &LstmModel, window: &Window) -> Result<Vec<f64>> {
    let seq = model.scale_inputs(&window.inputs)?;
    let target = model.scale_target(&window.target)?;
    let mut grad = vec![0.0; model.network.n_params()];
    model
        .network
        .loss_and_grad(&seq, &target, 1.0, &mut Trace::default(), &mut grad);
    Ok(grad)
}

/// Largest relative disagreement between `analytic` and a central finite
/// difference at each probed parameter index.
pub fn compare_gradient(model: &LstmModel, window: &Window, analytic: &[f64], probes: &[usize]) -> Result<f64> {
    let seq = model.scale_inputs(&window.inputs)?;
    let target = model.scale_target(&window.target)?;
    let mut net = model.network.clone();
    let mut trace = Trace::default();
    let mut worst: f64 = 0.0;
    for &i in probes {
        let orig = net.params[i];
        net.params[i] = orig + FD_STEP;
        let up = net.loss(&seq, &target, &mut trace);
        net.params[i] = orig - FD_STEP;
        let down = net.loss(&seq, &target, &mut trace);
        net.params[i] = orig;
        let numeric = (up - down) / (2.0 * FD_STEP);
        let a = analytic[i];
        let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Checks backpropagation at `probe_count` parameters drawn with `seed`.
pub fn gradient_check(model: &LstmModel, window: &Window, probe_count: usize, seed: u64) -> Result<f64> {
    if probe_count == 0 {
        return Err(Error::Config("probe_count must be at least 1".into()));
    }
    let analytic = analytic_gradient(model, window)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probes: Vec<usize> = (0..probe_count)
        .map(|_| rng.random_range(0..model.network.n_params()))
        .collect();
    compare_gradient(model, window, &analytic, &probes)
}

#[cfg(test)]
mod tests {
    use super::super::tests::panel;
    use super::super::{make_windows, predict_series};
    use super::*;
    use crate::market_data::FeatureSet;

    fn config(width: usize, epochs: usize) -> LstmConfig {
        LstmConfig {
            input_width: width,
            hidden_size: 6,
            num_layers: 2,
            epochs,
            batch_size: 8,
            learning_rate: 0.01,
            ..LstmConfig::default()
        }
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut p = vec![1.0, -2.0, 0.5];
        let mut s = AdamState::new(3);
        s.update(&mut p, &[0.3, -4.0, 0.0], 0.1);
        assert!((p[0] - 0.9).abs() < 1e-7);
        assert!((p[1] + 1.9).abs() < 1e-7);
        assert_eq!(p[2], 0.5);
        assert_eq!(s.step, 1);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p: Vec<Vec<f64>> = (0..30)
            .map(|d| vec![10.0 + (d as f64 * 0.4).sin(), 5.0 + 0.1 * d as f64])
            .collect();
        let pan = panel(&p);
        let mut cfg = config(12, 1);
        cfg.num_layers = 3;
        let model = LstmModel::new(&cfg, FeatureSet::WithSentiment, &pan).unwrap();
        let w = &make_windows(&pan, FeatureSet::WithSentiment, 6).unwrap()[3];
        let err = gradient_check(&model, w, 300, 1).unwrap();
        assert!(err < 1e-4, "max relative error {err}");

        let flipped: Vec<f64> = analytic_gradient(&model, w).unwrap().iter().map(|g| -g).collect();
        let probes: Vec<usize> = (0..model.network.n_params()).step_by(7).collect();
        // |g - (-g)| / (|g| + |-g|) is exactly 1 for a sign flip.
        let bad = compare_gradient(&model, w, &flipped, &probes).unwrap();
        assert!((bad - 1.0).abs() < 1e-6, "{bad}");
    }

    #[test]
    fn bias_gradients_at_the_origin() {
        let p: Vec<Vec<f64>> = (0..12).map(|d| vec![3.0 + d as f64]).collect();
        let pan = panel(&p);
        let mut model = LstmModel::new(&config(6, 1), FeatureSet::WithSentiment, &pan).unwrap();
        model.network.params.iter_mut().for_each(|v| *v = 0.0);
        let w = &make_windows(&pan, FeatureSet::WithSentiment, 6).unwrap()[2];
        let analytic = analytic_gradient(&model, w).unwrap();
        let layout = model.network.layout().clone();
        let mut probes: Vec<usize> = layout.gate_bias_ranges(6).into_iter().flatten().collect();
        probes.extend(layout.output_bias_range());
        assert!(compare_gradient(&model, w, &analytic, &probes).unwrap() < 1e-4);
        assert!(analytic[layout.output_bias_range()].iter().any(|g| g.abs() > 1e-3));
    }

    #[test]
    fn learns_a_constant_panel() {
        let p = vec![vec![42.0, 7.5]; 40];
        let pan = panel(&p);
        let cfg = config(12, 200);
        let mut model = LstmModel::new(&cfg, FeatureSet::WithSentiment, &pan.slice(0..30)).unwrap();
        let train_w = make_windows(&pan.slice(0..30), FeatureSet::WithSentiment, 6).unwrap();
        let val_w = make_windows(&pan.slice(24..40), FeatureSet::WithSentiment, 6).unwrap();
        let rep = train(&mut model, &train_w, &val_w, &cfg).unwrap();
        assert!(rep.final_train_mse() < 1e-6, "{}", rep.final_train_mse());
        assert!(rep.final_train_mse() < rep.initial_train_mse);
        let min = rep.val_mse.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(rep.best_val_mse(), min);
        for (_, pred) in predict_series(&model, &pan, 24..40).unwrap() {
            assert!(
                (pred[0] - 42.0).abs() < 0.42 && (pred[1] - 7.5).abs() < 0.075,
                "{pred:?}"
            );
        }
    }

    #[test]
    fn beats_persistence_on_a_sine() {
        let p: Vec<Vec<f64>> = (0..160).map(|d| vec![20.0 + 5.0 * (d as f64 * 0.3).sin()]).collect();
        let pan = panel(&p);
        let cfg = config(6, 150);
        let mut model = LstmModel::new(&cfg, FeatureSet::WithSentiment, &pan.slice(0..120)).unwrap();
        let train_w = make_windows(&pan.slice(0..120), FeatureSet::WithSentiment, 6).unwrap();
        let val_w = make_windows(&pan.slice(114..160), FeatureSet::WithSentiment, 6).unwrap();
        let rep = train(&mut model, &train_w, &val_w, &cfg).unwrap();
        let persistence = val_w
            .iter()
            .map(|w| {
                let last = model.scale_target(&[w.inputs[5][0]]).unwrap()[0];
                let want = model.scale_target(&w.target).unwrap()[0];
                (last - want).powi(2)
            })
            .sum::<f64>()
            / val_w.len() as f64;
        assert!(
            rep.best_val_mse() < persistence,
            "{} vs {persistence}",
            rep.best_val_mse()
        );
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let p: Vec<Vec<f64>> = (0..40).map(|d| vec![10.0 + (d as f64 * 0.7).cos()]).collect();
        let pan = panel(&p);
        let cfg = config(6, 3);
        let run = || {
            let mut model = LstmModel::new(&cfg, FeatureSet::WithSentiment, &pan.slice(0..30)).unwrap();
            let tw = make_windows(&pan.slice(0..30), FeatureSet::WithSentiment, 6).unwrap();
            let vw = make_windows(&pan.slice(24..40), FeatureSet::WithSentiment, 6).unwrap();
            (train(&mut model, &tw, &vw, &cfg).unwrap(), model)
        };
        let (a, ma) = run();
        let (b, mb) = run();
        assert_eq!(a.train_mse[0].to_bits(), b.train_mse[0].to_bits());
        assert_eq!(a.train_mse, b.train_mse);
        assert_eq!(ma.network.params, mb.network.params);
    }

    #[test]
    fn rejects_empty_sets() {
        let p = vec![vec![1.0]; 10];
        let pan = panel(&p);
        let cfg = config(6, 1);
        let mut model = LstmModel::new(&cfg, FeatureSet::WithSentiment, &pan).unwrap();
        let w = make_windows(&pan, FeatureSet::WithSentiment, 6).unwrap();
        assert!(train(&mut model, &w, &[], &cfg).is_err());
    }
}
