//! Text model format `RDM1`.
//!
//! Layout:
//!
//! ```text
//! RDM1
//! <m> <C> <layer_count>
//! dense <in> <out> <relu|identity>
//! <in*out weight floats, row-major, then out bias floats>
//! ...
//! ```
//!
//! Floats are written with 9 significant digits, which round-trips every
//! finite f32 exactly: a load of a save reproduces forward outputs
//! bit-for-bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::net::{Activation, DenseLayer, Network};

fn fmt_f32(v: f32) -> String {
    format!("{v:.8e}")
}

/// Serializes a network into a writer.
pub fn write_model<W: Write>(net: &Network, out: &mut W) -> Result<()> {
    writeln!(out, "RDM1")?;
    writeln!(out, "{} {} {}", net.input_dim(), net.class_count(), net.layers().len())?;
    for layer in net.layers() {
        writeln!(
            out,
            "dense {} {} {}",
            layer.in_dim(),
            layer.out_dim(),
            layer.activation().name()
        )?;
        for o in 0..layer.out_dim() {
            let row = &layer.weights()[o * layer.in_dim()..(o + 1) * layer.in_dim()];
            let line: Vec<String> = row.iter().map(|&w| fmt_f32(w)).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        let bias: Vec<String> = layer.bias().iter().map(|&b| fmt_f32(b)).collect();
        writeln!(out, "{}", bias.join(" "))?;
    }
    Ok(())
}

pub fn save_model(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_model(net, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

struct Tokens<'a> {
    iter: std::str::SplitWhitespace<'a>,
    consumed: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            iter: text.split_whitespace(),
            consumed: 0,
        }
    }

    fn next(&mut self, field: &str) -> Result<&'a str> {
        match self.iter.next() {
            Some(tok) => {
                self.consumed += 1;
                Ok(tok)
            }
            None => Err(Error::ModelFormat(format!("file truncated, expected {field}"))),
        }
    }

    fn next_usize(&mut self, field: &str) -> Result<usize> {
        let tok = self.next(field)?;
        tok.parse()
            .map_err(|_| Error::ModelFormat(format!("{field}: invalid integer '{tok}'")))
    }

    fn next_f32(&mut self, field: &str, index: usize) -> Result<f32> {
        let tok = self.next(field)?;
        let v: f32 = tok
            .parse()
            .map_err(|_| Error::ModelFormat(format!("{field}[{index}]: invalid float '{tok}'")))?;
        if !v.is_finite() {
            return Err(Error::ModelFormat(format!("{field}[{index}]: non-finite value '{tok}'")));
        }
        Ok(v)
    }
}

/// Parses a network from RDM1 text.
pub fn read_model(text: &str) -> Result<Network> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ModelFormat("missing header line".into()))?
        .trim();
    if header != "RDM1" {
        return Err(Error::ModelFormat(format!(
            "unsupported header '{header}' (expected RDM1)"
        )));
    }
    let rest = &text[text.find('\n').map(|i| i + 1).unwrap_or(text.len())..];
    let mut toks = Tokens::new(rest);
    let input_dim = toks.next_usize("input dimension m")?;
    let class_count = toks.next_usize("class count C")?;
    let layer_count = toks.next_usize("layer count")?;
    if layer_count == 0 {
        return Err(Error::ModelFormat("layer count must be at least 1".into()));
    }

    let mut layers = Vec::with_capacity(layer_count);
    let mut prev_out = input_dim;
    for k in 0..layer_count {
        let kind = toks.next(&format!("layer {k} kind"))?;
        if kind != "dense" {
            return Err(Error::ModelFormat(format!(
                "layer {k} kind: unknown '{kind}' (expected dense)"
            )));
        }
        let in_dim = toks.next_usize(&format!("layer {k} input dimension"))?;
        let out_dim = toks.next_usize(&format!("layer {k} output dimension"))?;
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::ModelFormat(format!("layer {k} dimensions must be positive")));
        }
        if in_dim != prev_out {
            return Err(Error::ModelFormat(format!(
                "layer {k} input dimension {in_dim} breaks the chain (previous output {prev_out})"
            )));
        }
        let act_tok = toks.next(&format!("layer {k} activation"))?;
        let activation = Activation::from_name(act_tok).ok_or_else(|| {
            Error::ModelFormat(format!("layer {k} activation: unknown '{act_tok}'"))
        })?;
        let weight_field = format!("layer {k} weights");
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for i in 0..in_dim * out_dim {
            weights.push(toks.next_f32(&weight_field, i)?);
        }
        let bias_field = format!("layer {k} bias");
        let mut bias = Vec::with_capacity(out_dim);
        for i in 0..out_dim {
            bias.push(toks.next_f32(&bias_field, i)?);
        }
        layers.push(DenseLayer::new(in_dim, out_dim, activation, weights, bias)?);
        prev_out = out_dim;
    }
    if prev_out != class_count {
        return Err(Error::ModelFormat(format!(
            "final layer output {prev_out} does not match declared class count {class_count}"
        )));
    }
    if let Ok(extra) = toks.next("end of file") {
        return Err(Error::ModelFormat(format!(
            "unexpected trailing data starting at '{extra}' (declared float count disagrees with payload)"
        )));
    }
    let net = Network::new(layers)?;
    if net.input_dim() != input_dim {
        return Err(Error::ModelFormat(format!(
            "declared input dimension {input_dim} does not match first layer input {}",
            net.input_dim()
        )));
    }
    Ok(net)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Network> {
    let text = fs::read_to_string(path)?;
    read_model(&text)
}
