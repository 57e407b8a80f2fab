use rayon::prelude::*;

use super::config::ModelConfig;
use super::loss::{bce_logit_gradient, bce_loss};
use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::rng::{domain, Rng};

/// Stream tag for replacement heads, distinct from the per-layer init streams.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct LayerShape {
    in_c: usize,
    out_c: usize,
    k: usize,
    stride: usize,
    pad: usize,
    in_side: usize,
    out_side: usize,
}

/// Parameter tensors in declared order: for every conv block its weight
/// `[out][in][k][k]` then bias `[out]`, then the head weight `[n_out][features]`
/// and head bias `[n_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    arch: ModelConfig,
    shapes: Vec<LayerShape>,
    params: Vec<Vec<f64>>,
}

/// Gradient tensors, same layout as [`Model::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Gradients(model.params.iter().map(|p| vec![0.0; p.len()]).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|g| g * g).sum::<f64>().sqrt()
    }

    fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Numerically stable logistic function, kept strictly inside (0, 1).
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Zero mean, unit variance per image, so the trunk sees structure rather
/// than overall exposure. Flat images map to all zeros.
fn standardize(pixels: &[f32]) -> Vec<f64> {
    let n = pixels.len() as f64;
    let mean = pixels.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let var = pixels.iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n;
    let scale = if var > 1e-12 { 1.0 / var.sqrt() } else { 0.0 };
    pixels.iter().map(|&v| (f64::from(v) - mean) * scale).collect()
}

/// Per-sample activations kept for the backward pass.
struct Trace {
    /// `acts[0]` is the input, `acts[i + 1]` the ReLU output of block `i`.
    acts: Vec<Vec<f64>>,
    features: Vec<f64>,
    logits: Vec<f64>,
}

fn shapes_for(cfg: &ModelConfig) -> Result<Vec<LayerShape>> {
    let sides = cfg.spatial_schedule()?;
    let mut in_c = 1;
    let mut in_side = cfg.input_size;
    Ok(cfg
        .conv_blocks
        .iter()
        .zip(sides)
        .map(|(b, out_side)| {
            let s = LayerShape {
                in_c,
                out_c: b.channels,
                k: b.kernel,
                stride: b.stride,
                pad: b.kernel / 2,
                in_side,
                out_side,
            };
            in_c = b.channels;
            in_side = out_side;
            s
        })
        .collect())
}

/// Range of output indices whose tap `offset` lands inside the input.
#[inline]
fn valid_outputs(offset: usize, s: &LayerShape) -> std::ops::Range<usize> {
    // input index = o * stride + offset - pad
    let lo = if offset >= s.pad {
        0
    } else {
        (s.pad - offset).div_ceil(s.stride)
    };
    let limit = s.in_side + s.pad; // need o * stride + offset < limit
    let hi = if limit > offset {
        ((limit - offset - 1) / s.stride + 1).min(s.out_side)
    } else {
        0
    };
    lo..hi.max(lo)
}

fn conv_forward(s: &LayerShape, w: &[f64], b: &[f64], input: &[f64]) -> Vec<f64> {
    let (n_in, n_out) = (s.in_side * s.in_side, s.out_side * s.out_side);
    let mut out = vec![0.0; s.out_c * n_out];
    for oc in 0..s.out_c {
        let plane = &mut out[oc * n_out..(oc + 1) * n_out];
        plane.iter_mut().for_each(|v| *v = b[oc]);
        for ic in 0..s.in_c {
            let src = &input[ic * n_in..(ic + 1) * n_in];
            for ky in 0..s.k {
                let ys = valid_outputs(ky, s);
                for kx in 0..s.k {
                    let wv = w[((oc * s.in_c + ic) * s.k + ky) * s.k + kx];
                    let xs = valid_outputs(kx, s);
                    for oy in ys.clone() {
                        let iy = oy * s.stride + ky - s.pad;
                        let row = &src[iy * s.in_side..(iy + 1) * s.in_side];
                        let orow = &mut plane[oy * s.out_side..(oy + 1) * s.out_side];
                        for ox in xs.clone() {
                            orow[ox] += wv * row[ox * s.stride + kx - s.pad];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Accumulates weight/bias gradients and, when requested, the input gradient.
fn conv_backward(
    s: &LayerShape,
    w: &[f64],
    input: &[f64],
    dz: &[f64],
    dw: &mut [f64],
    db: &mut [f64],
    mut din: Option<&mut [f64]>,
) {
    let (n_in, n_out) = (s.in_side * s.in_side, s.out_side * s.out_side);
    for oc in 0..s.out_c {
        let g = &dz[oc * n_out..(oc + 1) * n_out];
        db[oc] += g.iter().sum::<f64>();
        for ic in 0..s.in_c {
            let src = &input[ic * n_in..(ic + 1) * n_in];
            for ky in 0..s.k {
                let ys = valid_outputs(ky, s);
                for kx in 0..s.k {
                    let widx = ((oc * s.in_c + ic) * s.k + ky) * s.k + kx;
                    let wv = w[widx];
                    let xs = valid_outputs(kx, s);
                    let mut acc = 0.0;
                    for oy in ys.clone() {
                        let iy = oy * s.stride + ky - s.pad;
                        let grow = &g[oy * s.out_side..(oy + 1) * s.out_side];
                        let row = &src[iy * s.in_side..(iy + 1) * s.in_side];
                        for ox in xs.clone() {
                            acc += grow[ox] * row[ox * s.stride + kx - s.pad];
                        }
                        if let Some(d) = din.as_deref_mut() {
                            let drow = &mut d[ic * n_in + iy * s.in_side..ic * n_in + (iy + 1) * s.in_side];
                            for ox in xs.clone() {
                                drow[ox * s.stride + kx - s.pad] += wv * grow[ox];
                            }
                        }
                    }
                    dw[widx] += acc;
                }
            }
        }
    }
}

impl Model {
    /// Deterministic He-style initialization: conv weights
    /// `N(0, 2 / fan_in)`, head weights `N(0, 1 / (4 fan_in))`, biases zero.
    pub fn init(cfg: &ModelConfig) -> Result<Self> {
        let shapes = shapes_for(cfg)?;
        let mut params = Vec::with_capacity(2 * shapes.len() + 2);
        for (i, s) in shapes.iter().enumerate() {
            let fan_in = s.in_c * s.k * s.k;
            let sd = (2.0 / fan_in as f64).sqrt();
            let mut rng = Rng::derive(cfg.seed, &[domain::INIT, i as u64]);
            params.push((0..s.out_c * fan_in).map(|_| sd * rng.normal()).collect());
            params.push(vec![0.0; s.out_c]);
        }
        let mut model = Self {
            arch: cfg.clone(),
            shapes,
            params,
        };
        let mut rng = Rng::derive(cfg.seed, &[domain::INIT, model.shapes.len() as u64]);
        let (w, b) = model.fresh_head(cfg.n_outputs, &mut rng);
        model.params.push(w);
        model.params.push(b);
        Ok(model)
    }

    fn fresh_head(&self, n_outputs: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
        let fan_in = self.n_features();
        // half the LeCun scale keeps fresh logits near 0
        let sd = 0.5 * (1.0 / fan_in as f64).sqrt();
        (
            (0..n_outputs * fan_in).map(|_| sd * rng.normal()).collect(),
            vec![0.0; n_outputs],
        )
    }

    /// Rebuilds a model from an architecture and parameter tensors.
    pub fn from_parts(arch: ModelConfig, params: Vec<Vec<f64>>) -> Result<Self> {
        let mut model = Self::init(&ModelConfig { seed: 0, ..arch.clone() })?;
        if params.len() != model.params.len()
            || params.iter().zip(&model.params).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::ShapeMismatch(
                "parameter tensors do not match the architecture".into(),
            ));
        }
        if params.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteLoss("non-finite parameter".into()));
        }
        model.arch = arch;
        model.params = params;
        Ok(model)
    }

    pub fn arch(&self) -> &ModelConfig {
        &self.arch
    }

    pub fn params(&self) -> &[Vec<f64>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.params
    }

    pub fn n_features(&self) -> usize {
        self.shapes.last().map(|s| s.out_c).unwrap_or(1)
    }

    pub fn n_outputs(&self) -> usize {
        self.params[self.params.len() - 1].len()
    }

    pub fn input_size(&self) -> usize {
        self.arch.input_size
    }

    /// Index of the first head tensor; everything before it is trunk.
    pub fn head_start(&self) -> usize {
        self.params.len() - 2
    }

    /// Replaces the dense head with a fresh `n_outputs`-wide one; trunk
    /// tensors are kept bit-for-bit.
    pub fn replace_head(&self, n_outputs: usize, seed: u64) -> Model {
        let mut rng = Rng::derive(seed, &[domain::HEAD]);
        let (w, b) = self.fresh_head(n_outputs.max(1), &mut rng);
        let mut out = self.clone();
        let h = out.head_start();
        out.params[h] = w;
        out.params[h + 1] = b;
        out.arch.n_outputs = n_outputs.max(1);
        out
    }

    fn input_of(&self, img: &Image) -> Result<Vec<f64>> {
        let n = self.arch.input_size;
        if img.width() != n || img.height() != n {
            return Err(Error::ShapeMismatch(format!(
                "model expects {n}x{n} input, got {}x{}",
                img.width(),
                img.height()
            )));
        }
        if self.arch.standardize_input {
            Ok(standardize(img.data()))
        } else {
            Ok(img.data().iter().map(|&v| f64::from(v)).collect())
        }
    }

    fn trace(&self, input: Vec<f64>) -> Trace {
        let mut acts = Vec::with_capacity(self.shapes.len() + 1);
        acts.push(input);
        for (i, s) in self.shapes.iter().enumerate() {
            let mut z = conv_forward(s, &self.params[2 * i], &self.params[2 * i + 1], &acts[i]);
            z.iter_mut().for_each(|v| *v = v.max(0.0));
            acts.push(z);
        }
        let last = self.shapes.last().expect("at least one block");
        let plane = last.out_side * last.out_side;
        let top = acts.last().expect("activations");
        let features: Vec<f64> = top
            .chunks_exact(plane)
            .map(|c| c.iter().sum::<f64>() / plane as f64)
            .collect();
        let h = self.head_start();
        let (hw, hb) = (&self.params[h], &self.params[h + 1]);
        let nf = features.len();
        let logits = hb
            .iter()
            .enumerate()
            .map(|(o, b)| b + hw[o * nf..(o + 1) * nf].iter().zip(&features).map(|(w, f)| w * f).sum::<f64>())
            .collect();
        Trace {
            acts,
            features,
            logits,
        }
    }

    /// Pooled trunk features for one image (the head's input).
    pub fn trunk_features(&self, img: &Image) -> Result<Vec<f64>> {
        Ok(self.trace(self.input_of(img)?).features)
    }

    pub fn logits(&self, img: &Image) -> Result<Vec<f64>> {
        Ok(self.trace(self.input_of(img)?).logits)
    }

    /// Sigmoid probabilities, one row per image.
    pub fn forward(&self, batch: &[Image]) -> Result<Vec<Vec<f64>>> {
        batch
            .iter()
            .map(|img| Ok(self.logits(img)?.into_iter().map(sigmoid).collect()))
            .collect()
    }

    fn backward_sample(&self, trace: &Trace, dlogits: &[f64]) -> Gradients {
        let mut g = Gradients::zeros_like(self);
        let h = self.head_start();
        let nf = trace.features.len();
        let mut dfeat = vec![0.0; nf];
        {
            let hw = &self.params[h];
            let (gw, rest) = g.0[h..].split_at_mut(1);
            for (o, &d) in dlogits.iter().enumerate() {
                rest[0][o] += d;
                for f in 0..nf {
                    gw[0][o * nf + f] += d * trace.features[f];
                    dfeat[f] += d * hw[o * nf + f];
                }
            }
        }
        let last = self.shapes.last().expect("at least one block");
        let plane = last.out_side * last.out_side;
        let mut da: Vec<f64> = dfeat
            .iter()
            .flat_map(|&d| std::iter::repeat_n(d / plane as f64, plane))
            .collect();
        for (i, s) in self.shapes.iter().enumerate().rev() {
            // ReLU: pass gradient where the output was positive
            for (d, &a) in da.iter_mut().zip(&trace.acts[i + 1]) {
                if a <= 0.0 {
                    *d = 0.0;
                }
            }
            let mut din = (i > 0).then(|| vec![0.0; s.in_c * s.in_side * s.in_side]);
            let (gw, gb) = {
                let (a, b) = g.0.split_at_mut(2 * i + 1);
                (&mut a[2 * i], &mut b[0])
            };
            conv_backward(s, &self.params[2 * i], &trace.acts[i], &da, gw, gb, din.as_deref_mut());
            if let Some(d) = din {
                da = d;
            }
        }
        g
    }

    /// Mean binary cross-entropy over the batch and its exact gradient.
    ///
    /// Per-sample gradients are computed in parallel and summed in batch
    /// order, so the result does not depend on thread scheduling.
    pub fn loss_and_gradients<R: AsRef<[bool]> + Sync>(
        &self,
        batch: &[Image],
        labels: &[R],
    ) -> Result<(f64, Gradients)> {
        if batch.len() != labels.len() || batch.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} images vs {} label rows",
                batch.len(),
                labels.len()
            )));
        }
        let inputs: Vec<Vec<f64>> = batch.iter().map(|i| self.input_of(i)).collect::<Result<_>>()?;
        let traces: Vec<Trace> = inputs.into_par_iter().map(|x| self.trace(x)).collect();
        let probs: Vec<Vec<f64>> = traces
            .iter()
            .map(|t| t.logits.iter().map(|&z| sigmoid(z)).collect())
            .collect();
        let loss = bce_loss(&probs, labels)?;
        let dlogits = bce_logit_gradient(&probs, labels)?;
        let per_sample: Vec<Gradients> = traces
            .par_iter()
            .zip(dlogits.par_iter())
            .map(|(t, d)| self.backward_sample(t, d))
            .collect();
        let mut total = Gradients::zeros_like(self);
        for g in &per_sample {
            total.add_assign(g);
        }
        Ok((loss, total))
    }

    pub fn backward<R: AsRef<[bool]> + Sync>(&self, batch: &[Image], labels: &[R]) -> Result<Gradients> {
        Ok(self.loss_and_gradients(batch, labels)?.1)
    }

    pub fn loss<R: AsRef<[bool]>>(&self, batch: &[Image], labels: &[R]) -> Result<f64> {
        bce_loss(&self.forward(batch)?, labels)
    }
}
