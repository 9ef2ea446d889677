//! Model persistence: a small JSON text format.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which is
//! enough for every `f64` to survive a save/load round trip bit for bit.
//! The reader validates shapes layer by layer and names the offending
//! layer in its error.

use crate::error::{Error, Result};
use crate::net::{Activation, DenseLayer, Network};
use std::fmt::Write as _;
use std::path::Path;

const FORMAT_VERSION: u32 = 1;

#[derive(serde::Deserialize)]
struct RawModel {
    format_version: u32,
    input_dim: usize,
    class_names: Vec<String>,
    layers: Vec<RawLayer>,
}

#[derive(serde::Deserialize)]
struct RawLayer {
    activation: Activation,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn float_list(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&fmt_f64(*v));
    }
    out.push(']');
}

/// Serializes the network to `path`. The output is deterministic: the
/// same network always produces the same bytes.
pub fn save_model(net: &Network, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format_version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"input_dim\": {},", net.input_dim());
    out.push_str("  \"class_names\": [");
    for (i, name) in net.class_names().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        // serde_json handles string escaping; floats are formatted by hand.
        out.push_str(&serde_json::to_string(name).expect("string serialization"));
    }
    out.push_str("],\n");
    out.push_str("  \"layers\": [\n");
    for (i, layer) in net.layers().iter().enumerate() {
        out.push_str("    {\n");
        let act = match layer.activation() {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        };
        let _ = writeln!(out, "      \"activation\": \"{act}\",");
        let _ = writeln!(out, "      \"rows\": {},", layer.out_dim());
        let _ = writeln!(out, "      \"cols\": {},", layer.in_dim());
        out.push_str("      \"weights\": ");
        float_list(&mut out, layer.weights());
        out.push_str(",\n      \"bias\": ");
        float_list(&mut out, layer.bias());
        out.push_str("\n    }");
        if i + 1 < net.layers().len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a model file written by [`save_model`], re-validating every
/// shape constraint. Malformed files report the path and the offending
/// layer rather than a bare parse failure.
pub fn load_model(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: RawModel = serde_json::from_str(&text).map_err(|e| Error::ModelFormat {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let fail = |reason: String| Error::ModelFormat {
        path: path.to_path_buf(),
        reason,
    };
    if raw.format_version != FORMAT_VERSION {
        return Err(fail(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let mut layers = Vec::with_capacity(raw.layers.len());
    for (i, rl) in raw.layers.into_iter().enumerate() {
        if rl.rows == 0 || rl.cols == 0 {
            return Err(fail(format!("layer {i}: rows and cols must be positive")));
        }
        let layer = DenseLayer::new(rl.cols, rl.rows, rl.weights, rl.bias, rl.activation)
            .map_err(|e| fail(format!("layer {i}: {e}")))?;
        layers.push(layer);
    }
    Network::new(raw.input_dim, raw.class_names, layers).map_err(|e| fail(e.to_string()))
}
