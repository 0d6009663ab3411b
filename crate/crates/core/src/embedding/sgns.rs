use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

/// Row-wise view of a `V × dim` matrix that the update kernel can read and
/// add into. Implemented for exclusive (`Cell`) and shared (atomic) storage.
pub(crate) trait Rows {
    fn load(&self, row: usize, out: &mut [f64]);
    fn add_scaled(&self, row: usize, scale: f64, x: &[f64]);
}

pub(crate) struct CellRows<'a> {
    cells: &'a [Cell<f64>],
    dim: usize,
}

impl<'a> CellRows<'a> {
    pub(crate) fn new(data: &'a mut [f64], dim: usize) -> Self {
        CellRows {
            cells: Cell::from_mut(data).as_slice_of_cells(),
            dim,
        }
    }
}

impl Rows for CellRows<'_> {
    fn load(&self, row: usize, out: &mut [f64]) {
        let r = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (o, c) in out.iter_mut().zip(r) {
            *o = c.get();
        }
    }

    fn add_scaled(&self, row: usize, scale: f64, x: &[f64]) {
        let r = &self.cells[row * self.dim..(row + 1) * self.dim];
        for (c, v) in r.iter().zip(x) {
            c.set(c.get() + scale * v);
        }
    }
}

/// Matrix shared between training threads. Each element is read and written
/// atomically as a whole `f64`; concurrent read-modify-write on the same
/// element may lose updates.
pub(crate) struct SharedMatrix {
    data: Vec<AtomicU64>,
    dim: usize,
}

impl SharedMatrix {
    pub(crate) fn from_vec(v: Vec<f64>, dim: usize) -> Self {
        SharedMatrix {
            data: v.into_iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
            dim,
        }
    }

    pub(crate) fn into_vec(self) -> Vec<f64> {
        self.data.into_iter().map(|a| f64::from_bits(a.into_inner())).collect()
    }
}

impl Rows for SharedMatrix {
    fn load(&self, row: usize, out: &mut [f64]) {
        let r = &self.data[row * self.dim..(row + 1) * self.dim];
        for (o, a) in out.iter_mut().zip(r) {
            *o = f64::from_bits(a.load(Ordering::Relaxed));
        }
    }

    fn add_scaled(&self, row: usize, scale: f64, x: &[f64]) {
        let r = &self.data[row * self.dim..(row + 1) * self.dim];
        for (a, v) in r.iter().zip(x) {
            let cur = f64::from_bits(a.load(Ordering::Relaxed));
            a.store((cur + scale * v).to_bits(), Ordering::Relaxed);
        }
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Scratch buffers reused across kernel calls.
pub(crate) struct Scratch {
    center: Vec<f64>,
    target: Vec<f64>,
    grad: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Scratch {
    pub(crate) fn new(dim: usize) -> Self {
        Scratch {
            center: vec![0.0; dim],
            target: vec![0.0; dim],
            grad: vec![0.0; dim],
            coeffs: Vec::new(),
        }
    }
}

/// One gradient step on
/// `−ln σ(u_ctx·v) − Σ ln σ(−u_neg·v)`.
///
/// Every dot product is taken before any row is written, so with exclusive
/// storage this is an exact gradient step even when a row repeats. Returns
/// the pre-update loss.
pub(crate) fn update<R: Rows>(
    input: &R,
    output: &R,
    center: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
    s: &mut Scratch,
) -> f64 {
    input.load(center, &mut s.center);
    s.grad.iter_mut().for_each(|g| *g = 0.0);
    s.coeffs.clear();
    let mut loss = 0.0;
    for (k, &t) in std::iter::once(&context).chain(negatives).enumerate() {
        let label = if k == 0 { 1.0 } else { 0.0 };
        output.load(t, &mut s.target);
        let score: f64 = s.center.iter().zip(&s.target).map(|(a, b)| a * b).sum();
        loss += if k == 0 { softplus(-score) } else { softplus(score) };
        let g = lr * (label - sigmoid(score));
        for (acc, u) in s.grad.iter_mut().zip(&s.target) {
            *acc += g * u;
        }
        s.coeffs.push(g);
    }
    for (&t, &g) in std::iter::once(&context).chain(negatives).zip(&s.coeffs) {
        output.add_scaled(t, g, &s.center);
    }
    input.add_scaled(center, 1.0, &s.grad);
    loss
}
