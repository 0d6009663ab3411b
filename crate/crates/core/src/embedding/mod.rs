//! Skip-gram word vectors with negative sampling.
//!
//! A trained model keeps both matrices. Geometry (similarity, nearest
//! neighbours, saved vectors) uses the sum of a token's input and output
//! rows; a model loaded from a vector file has a zero output matrix, so the
//! loaded rows are the geometry unchanged.

mod io;
mod noise;
mod sgns;
mod train;
mod vocab;

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub use io::{load_text, read_text, save_text, write_text};
pub use noise::build_noise_table;
pub use train::{train_sgns, train_sgns_with_progress, EpochStats, TrainConfig};
pub use vocab::{build_vocab, Vocabulary};

#[derive(Debug, Clone)]
pub struct EmbeddingModel {
    dim: usize,
    vocab: Vocabulary,
    input: Vec<f64>,
    output: Vec<f64>,
    geometry: OnceLock<Geometry>,
}

#[derive(Debug, Clone)]
struct Geometry {
    vectors: Vec<f64>,
    unit: Vec<f64>,
}

impl PartialEq for EmbeddingModel {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vocab == other.vocab && self.input == other.input && self.output == other.output
    }
}

impl EmbeddingModel {
    pub(crate) fn from_parts(vocab: Vocabulary, dim: usize, input: Vec<f64>, output: Vec<f64>) -> Self {
        debug_assert_eq!(input.len(), vocab.len() * dim);
        debug_assert_eq!(output.len(), vocab.len() * dim);
        EmbeddingModel {
            dim,
            vocab,
            input,
            output,
            geometry: OnceLock::new(),
        }
    }

    /// Builds a model from explicit word vectors. Tokens keep the given order
    /// and report count 0.
    pub fn from_vectors(tokens: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if tokens.len() != vectors.len() {
            return Err(Error::InvalidArgument(format!(
                "{} tokens but {} vectors",
                tokens.len(),
                vectors.len()
            )));
        }
        let dim = vectors[0].len();
        let mut input = Vec::with_capacity(tokens.len() * dim);
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: v.len() });
            }
            input.extend_from_slice(v);
        }
        let output = vec![0.0; input.len()];
        Self::from_matrices(tokens, dim, input, output)
    }

    /// Builds a model from row-major input and output matrices.
    pub fn from_matrices(tokens: Vec<String>, dim: usize, input: Vec<f64>, output: Vec<f64>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("vectors must have at least one component".into()));
        }
        for t in &tokens {
            if t.is_empty() || t.contains(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("invalid token {t:?}")));
            }
        }
        let want = tokens.len() * dim;
        for m in [&input, &output] {
            if m.len() != want {
                return Err(Error::DimensionMismatch { left: want, right: m.len() });
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument("vector entries must be finite".into()));
            }
        }
        let n = tokens.len();
        let vocab = Vocabulary::from_ordered(tokens, vec![0; n])?;
        Ok(Self::from_parts(vocab, dim, input, output))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.vocab.index_of(token)
    }

    pub fn input_vector(&self, i: usize) -> &[f64] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_vector(&self, i: usize) -> &[f64] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major `V × dim` input matrix.
    pub fn input_matrix(&self) -> &[f64] {
        &self.input
    }

    pub fn output_matrix(&self) -> &[f64] {
        &self.output
    }

    fn geometry(&self) -> &Geometry {
        self.geometry.get_or_init(|| {
            let vectors: Vec<f64> = self.input.iter().zip(&self.output).map(|(a, b)| a + b).collect();
            let mut unit = vectors.clone();
            for row in unit.chunks_mut(self.dim) {
                let n = norm(row);
                if n > 0.0 {
                    row.iter_mut().for_each(|x| *x /= n);
                } else {
                    row.iter_mut().for_each(|x| *x = 0.0);
                }
            }
            Geometry { vectors, unit }
        })
    }

    /// The vector used for similarity: input plus output row.
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.geometry().vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector_of(&self, token: &str) -> Option<&[f64]> {
        self.index_of(token).map(|i| self.vector(i))
    }

    /// `vector(i)` scaled to unit length; all zeros for a zero vector.
    pub fn unit_vector(&self, i: usize) -> &[f64] {
        &self.geometry().unit[i * self.dim..(i + 1) * self.dim]
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        dot(self.unit_vector(i), self.unit_vector(j)).clamp(-1.0, 1.0)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        1.0 - self.similarity(i, j)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Applies one SGNS gradient step to `model` and returns the pre-update loss
/// `−ln σ(u_ctx·v_cen) − Σ ln σ(−u_neg·v_cen)`.
pub fn sgns_step(model: &mut EmbeddingModel, center: usize, context: usize, negatives: &[usize], lr: f64) -> Result<f64> {
    let v = model.len();
    if let Some(&bad) = [center, context].iter().chain(negatives).find(|&&i| i >= v) {
        return Err(Error::InvalidArgument(format!("index {bad} out of range for vocabulary of {v}")));
    }
    if negatives.contains(&context) {
        return Err(Error::InvalidArgument("context index among negatives".into()));
    }
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::InvalidArgument(format!("learning rate {lr}")));
    }
    model.geometry.take();
    let dim = model.dim;
    let input = sgns::CellRows::new(&mut model.input, dim);
    let output = sgns::CellRows::new(&mut model.output, dim);
    let mut scratch = sgns::Scratch::new(dim);
    Ok(sgns::update(&input, &output, center, context, negatives, lr, &mut scratch))
}

/// `a·b / (‖a‖‖b‖)`, or 0 when either norm is 0.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    cosine_similarity(a, b).map(|s| 1.0 - s)
}

/// The `k` most similar tokens to `token`, excluding itself, by descending
/// similarity with ties broken by index.
pub fn nearest(model: &EmbeddingModel, token: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let q = model
        .index_of(token)
        .ok_or_else(|| Error::OutOfVocabulary(vec![token.to_owned()]))?;
    let mut scored: Vec<(usize, f64)> = (0..model.len())
        .filter(|&i| i != q)
        .map(|i| (i, model.similarity(q, i)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, s)| (model.vocab.token(i).to_owned(), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(rows: &[(&str, &[f64])]) -> EmbeddingModel {
        EmbeddingModel::from_vectors(
            rows.iter().map(|r| r.0.to_string()).collect(),
            rows.iter().map(|r| r.1.to_vec()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_distance(&[2.0, 3.0], &[2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[2.0, 3.0], &[-2.0, -3.0]).unwrap(), 2.0);
        assert!((cosine_distance(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - 0.2929).abs() < 1e-4);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[1.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn nearest_examples() {
        let m = model(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(nearest(&m, "a", 1).unwrap()[0].0, "b");
        assert_eq!(nearest(&m, "a", 10).unwrap().len(), 1);
        assert!(matches!(nearest(&m, "zzz", 1), Err(Error::OutOfVocabulary(v)) if v == ["zzz"]));
        assert!(nearest(&m, "a", 0).is_err());

        let m = model(&[
            ("q", &[0.3, -0.7, 0.2]),
            ("x", &[1.0, 0.0, 0.0]),
            ("y", &[0.0, 0.0, 1.0]),
            ("twin", &[0.31, -0.69, 0.2]),
            ("z", &[-0.3, 0.7, -0.2]),
        ]);
        let out = nearest(&m, "q", 4).unwrap();
        assert_eq!(out[0].0, "twin");
        assert_eq!(out[3].0, "z");
        assert!(out.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn nearest_ties_by_index() {
        let m = model(&[("q", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("a", &[0.0, 2.0])]);
        let out = nearest(&m, "q", 2).unwrap();
        assert_eq!(out[0].0, "b");
        assert_eq!(out[1].0, "a");
    }

    #[test]
    fn step_at_zero() {
        let mut m = model(&[("a", &[0.0, 0.0]), ("b", &[0.0, 0.0])]);
        let loss = sgns_step(&mut m, 0, 1, &[], 1.0).unwrap();
        assert!((loss - 2f64.ln()).abs() < 1e-15);
        // both vectors are zero, so the pair gradient vanishes
        assert_eq!(m.input_vector(0), &[0.0, 0.0]);
        assert_eq!(m.output_vector(1), &[0.0, 0.0]);
    }

    #[test]
    fn step_with_zero_lr_is_identity() {
        let mut m = model(&[("a", &[0.1, 0.2]), ("b", &[-0.3, 0.4]), ("c", &[0.5, 0.5])]);
        let before = m.clone();
        let loss = sgns_step(&mut m, 0, 1, &[2], 0.0).unwrap();
        assert!(loss > 0.0);
        assert_eq!(m, before);
    }

    #[test]
    fn step_preconditions() {
        let mut m = model(&[("a", &[0.1]), ("b", &[0.2])]);
        assert!(sgns_step(&mut m, 0, 1, &[1], 0.1).is_err());
        assert!(sgns_step(&mut m, 0, 2, &[], 0.1).is_err());
        assert!(sgns_step(&mut m, 0, 1, &[], -0.1).is_err());
    }

    #[test]
    fn geometry_refreshes_after_step() {
        let mut m = model(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(m.similarity(0, 1), 0.0);
        sgns_step(&mut m, 0, 1, &[], 1.0).unwrap();
        assert!(m.output_vector(1)[0] > 0.0);
        assert!(m.similarity(0, 1) > 0.0);
    }

    fn vec_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..8).prop_flat_map(|d| {
            (
                prop::collection::vec(-10.0f64..10.0, d),
                prop::collection::vec(-10.0f64..10.0, d),
            )
        })
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_reflexive((a, b) in vec_strategy()) {
            let d1 = cosine_distance(&a, &b).unwrap();
            let d2 = cosine_distance(&b, &a).unwrap();
            prop_assert_eq!(d1, d2);
            prop_assert!((0.0..=2.0).contains(&d1));
            if norm(&a) > 1e-9 {
                prop_assert!(cosine_distance(&a, &a).unwrap().abs() < 1e-12);
            }
        }
    }
}
