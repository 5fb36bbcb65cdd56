//! Measurement protocol: dataset ingestion, sample filtering, attack-suite
//! execution, and aggregation into reports.

mod csv;
mod idx;
mod report;
mod stats;
mod suite;
pub mod synth;

pub use csv::{load_csv, save_csv};
pub use idx::{load_idx, save_idx};
pub use report::{
    export_report, load_report, report_to_csv_string, report_to_json_string, AttackReport,
    ReportCell, ReportFormat, SampleRecord,
};
pub use stats::{
    angle_histogram, angle_statistics, iteration_statistics, AngleFilter, AngleStats,
    DirectionSample,
};
pub use suite::{run_attack_suite, Method, MethodRun, SuiteOptions, SuiteResult};

use crate::error::{Error, Result};
use crate::net::{argmax, Network};

/// Evaluation inputs: flattened samples with values in [0, 1] plus class
/// labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<f32>,
    labels: Vec<usize>,
    input_dim: usize,
    class_count: usize,
}

impl Dataset {
    /// Builds a dataset from row-major flattened samples, enforcing the
    /// value range and label bounds.
    pub fn new(inputs: Vec<f32>, labels: Vec<usize>, input_dim: usize, class_count: usize) -> Result<Self> {
        if input_dim == 0 || class_count == 0 {
            return Err(Error::InvalidConfig(
                "dataset dimensions and class count must be positive".into(),
            ));
        }
        if inputs.len() % input_dim != 0 {
            return Err(Error::Shape(format!(
                "flattened input length {} is not a multiple of dimension {}",
                inputs.len(),
                input_dim
            )));
        }
        if inputs.len() / input_dim != labels.len() {
            return Err(Error::Shape(format!(
                "{} samples but {} labels",
                inputs.len() / input_dim,
                labels.len()
            )));
        }
        if let Some(bad) = inputs.iter().find(|v| !(0.0..=1.0).contains(*v) || !v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sample value {bad} outside [0, 1]"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::InvalidConfig(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self {
            inputs,
            labels,
            input_dim,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn sample(&self, i: usize) -> &[f32] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// New dataset holding the given sample indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut inputs = Vec::with_capacity(indices.len() * self.input_dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            inputs.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            inputs,
            labels,
            input_dim: self.input_dim,
            class_count: self.class_count,
        }
    }

    /// First `n` samples (or all of them when fewer exist).
    pub fn take(&self, n: usize) -> Dataset {
        let indices: Vec<usize> = (0..self.len().min(n)).collect();
        self.subset(&indices)
    }
}

/// Subset of samples the model classifies correctly, order preserved.
/// Misclassified inputs are excluded from every measurement.
pub fn select_correctly_classified(net: &Network, data: &Dataset) -> Result<Dataset> {
    if data.input_dim() != net.input_dim() {
        return Err(Error::Shape(format!(
            "dataset dimension {} does not match network input {}",
            data.input_dim(),
            net.input_dim()
        )));
    }
    let mut keep = Vec::new();
    for i in 0..data.len() {
        if argmax(&net.forward(data.sample(i))?) == data.label(i) {
            keep.push(i);
        }
    }
    Ok(data.subset(&keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{Activation, DenseLayer, Network};

    fn tiny_dataset() -> Dataset {
        // Two clearly separated 2-D points per class.
        Dataset::new(
            vec![0.1, 0.1, 0.15, 0.2, 0.9, 0.9, 0.8, 0.85],
            vec![0, 0, 1, 1],
            2,
            2,
        )
        .unwrap()
    }

    /// Linear rule: class 1 iff x0 + x1 > 1.
    fn perfect_net() -> Network {
        let layer = DenseLayer::new(
            2,
            2,
            Activation::Identity,
            vec![0.0, 0.0, 10.0, 10.0],
            vec![0.0, -10.0],
        )
        .unwrap();
        Network::new(vec![layer]).unwrap()
    }

    /// Same boundary with swapped outputs: always wrong on the tiny set.
    fn inverted_net() -> Network {
        let layer = DenseLayer::new(
            2,
            2,
            Activation::Identity,
            vec![10.0, 10.0, 0.0, 0.0],
            vec![-10.0, 0.0],
        )
        .unwrap();
        Network::new(vec![layer]).unwrap()
    }

    #[test]
    fn dataset_enforces_range_and_labels() {
        assert!(Dataset::new(vec![0.5, 1.5], vec![0], 2, 2).is_err());
        assert!(Dataset::new(vec![0.5, 0.5], vec![2], 2, 2).is_err());
        assert!(Dataset::new(vec![0.5, 0.5, 0.5], vec![0], 2, 2).is_err());
        assert!(Dataset::new(vec![0.5, 0.5], vec![0, 1], 2, 2).is_err());
    }

    #[test]
    fn perfect_classifier_keeps_everything() {
        let ds = tiny_dataset();
        let kept = select_correctly_classified(&perfect_net(), &ds).unwrap();
        assert_eq!(kept, ds);
    }

    #[test]
    fn always_wrong_classifier_keeps_nothing() {
        let kept = select_correctly_classified(&inverted_net(), &tiny_dataset()).unwrap();
        assert!(kept.is_empty());
    }

    #[test]
    fn filtered_fraction_matches_measured_accuracy() {
        let (train, test) = synth::two_gaussians(80, 3.0, 13);
        let net = Network::mlp(2, &[6], 2, 4).unwrap();
        let run = crate::net::train(
            net,
            &train,
            &test,
            &crate::net::TrainConfig {
                epochs: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let acc = run.network.accuracy(&test).unwrap();
        let kept = select_correctly_classified(&run.network, &test).unwrap();
        assert_eq!(kept.len(), (acc * test.len() as f64).round() as usize);
    }

    #[test]
    fn subset_preserves_order_and_values() {
        let ds = tiny_dataset();
        let sub = ds.subset(&[2, 0]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.sample(0), ds.sample(2));
        assert_eq!(sub.label(1), ds.label(0));
    }
}
