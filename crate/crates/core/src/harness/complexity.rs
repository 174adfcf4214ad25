//! Parameter and multiply-accumulate accounting per layer.

use crate::nn::{conv_out_len, Layer, Stack};

/// Layer description for complexity accounting.
#[derive(Clone, Copy, Debug)]
pub enum LayerCost {
    Conv1d { in_ch: usize, out_ch: usize, kernel: usize, stride: usize, in_len: usize },
    Kan { in_dim: usize, out_dim: usize, grid_size: usize, spline_order: usize },
    Linear { in_dim: usize, out_dim: usize },
}

#[derive(Clone, Debug)]
pub struct LayerComplexity {
    pub label: String,
    /// Exact trainable scalar count.
    pub params: usize,
    /// Multiply-accumulates per forward evaluation: `out_len·kernel·C_in·C_out`
    /// for 1-D convolutions, `G'·in·out` for spline layers, `in·out` for
    /// dense layers.
    pub macs: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ComplexityReport {
    pub layers: Vec<LayerComplexity>,
}

impl ComplexityReport {
    pub fn total_params(&self) -> usize {
        self.layers.iter().map(|l| l.params).sum()
    }

    pub fn total_macs(&self) -> usize {
        self.layers.iter().map(|l| l.macs).sum()
    }

    pub fn render(&self) -> String {
        let mut out = String::from("layer,params,macs\n");
        for l in &self.layers {
            out.push_str(&format!("{},{},{}\n", l.label, l.params, l.macs));
        }
        out.push_str(&format!("total,{},{}\n", self.total_params(), self.total_macs()));
        out
    }
}

pub fn report_model_complexity(specs: &[LayerCost]) -> ComplexityReport {
    let layers = specs
        .iter()
        .map(|spec| match *spec {
            LayerCost::Conv1d { in_ch, out_ch, kernel, stride, in_len } => {
                let out_len = conv_out_len(in_len, kernel, stride);
                LayerComplexity {
                    label: format!("conv1d({in_ch}->{out_ch},k{kernel},s{stride},L{in_len})"),
                    params: out_ch * in_ch * kernel + out_ch,
                    macs: out_len * kernel * in_ch * out_ch,
                }
            }
            LayerCost::Kan { in_dim, out_dim, grid_size, spline_order } => LayerComplexity {
                label: format!("kan({in_dim}->{out_dim},G{grid_size},p{spline_order})"),
                // Per edge: grid_size + spline_order spline coefficients plus
                // one base weight and one spline scale.
                params: in_dim * out_dim * (grid_size + spline_order) + 2 * in_dim * out_dim,
                macs: grid_size * in_dim * out_dim,
            },
            LayerCost::Linear { in_dim, out_dim } => LayerComplexity {
                label: format!("linear({in_dim}->{out_dim})"),
                params: in_dim * out_dim + out_dim,
                macs: in_dim * out_dim,
            },
        })
        .collect();
    ComplexityReport { layers }
}

/// Complexity of an actual built stack (activation layers carry no cost).
pub fn stack_complexity(stack: &Stack) -> ComplexityReport {
    let specs: Vec<LayerCost> = stack
        .layers()
        .iter()
        .filter_map(|l| match *l {
            Layer::Conv1d { in_ch, in_len, out_ch, kernel, stride, .. } => {
                Some(LayerCost::Conv1d { in_ch, out_ch, kernel, stride, in_len })
            }
            Layer::Kan { in_dim, out_dim, ref grid, .. } => Some(LayerCost::Kan {
                in_dim,
                out_dim,
                grid_size: grid.segments,
                spline_order: grid.order,
            }),
            Layer::Linear { in_dim, out_dim, .. } => Some(LayerCost::Linear { in_dim, out_dim }),
            Layer::Tanh { .. } => None,
        })
        .collect();
    report_model_complexity(&specs)
}
