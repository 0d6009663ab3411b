//! word2vec text format: a `V dim` header, then one `token v1 … v_dim` row
//! per token.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::EmbeddingModel;
use crate::error::{Error, Result};
use crate::numfmt::format_sig;

pub fn write_text<W: Write>(model: &EmbeddingModel, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", model.len(), model.dim())?;
    for i in 0..model.len() {
        w.write_all(model.vocab().token(i).as_bytes())?;
        for &x in model.vector(i) {
            write!(w, " {}", format_sig(x, 6))?;
        }
        writeln!(w)?;
    }
    w.flush()
}

pub fn save_text(model: &EmbeddingModel, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_text(model, BufWriter::new(f)).map_err(|e| Error::io(path, e))
}

pub fn read_text<R: BufRead>(r: R) -> Result<EmbeddingModel> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::format(1, "missing header"))?;
    let header = header.map_err(|e| Error::format(1, e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [v, dim] = fields[..] else {
        return Err(Error::format(1, format!("header must be `V dim`, got {header:?}")));
    };
    let parse_count = |s: &str, what: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::format(1, format!("invalid {what} {s:?}")))
    };
    let v = parse_count(v, "vocabulary size")?;
    let dim = parse_count(dim, "dimension")?;
    if v == 0 {
        return Err(Error::EmptyVocabulary);
    }
    if dim == 0 {
        return Err(Error::format(1, "dimension must be at least 1"));
    }

    let mut tokens = Vec::with_capacity(v);
    let mut vectors = Vec::with_capacity(v);
    for (n, line) in lines {
        let line = line.map_err(|e| Error::format(n, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if tokens.len() == v {
            return Err(Error::format(n, format!("more than {v} rows")));
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("nonblank line");
        let row = parts
            .map(|p| match p.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::format(n, format!("invalid number {p:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != dim {
            return Err(Error::format(n, format!("expected {dim} values, found {}", row.len())));
        }
        tokens.push(token.to_owned());
        vectors.push(row);
    }
    if tokens.len() != v {
        return Err(Error::format(None, format!("header declares {v} rows, found {}", tokens.len())));
    }
    EmbeddingModel::from_vectors(tokens, vectors)
}

pub fn load_text(path: &Path) -> Result<EmbeddingModel> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_text(BufReader::new(f))
}
