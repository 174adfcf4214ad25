//! Named, shaped parameter arrays with gradient and optimizer-moment slots.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("parameter `{0}` registered twice")]
    DuplicateName(String),
    #[error("input of length {got} is too short for the layer stack (needs {need})")]
    InputTooShort { got: usize, need: usize },
    #[error("layer expects input length {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid layer spec: {0}")]
    BadSpec(String),
}

/// Index of one named array inside a [`ParameterSet`]. Ids are only
/// meaningful for the set that issued them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

/// One learnable array with its gradient and adaptive-moment state.
#[derive(Clone, Debug)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub value: Vec<f64>,
    pub grad: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Param {
    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// Flat, deterministically ordered collection of a network's parameters.
///
/// Iteration order is registration order, which makes flat indexing, the
/// optimizer sweep, and checkpoint layout stable across runs.
#[derive(Clone, Debug, Default)]
pub struct ParameterSet {
    entries: Vec<Param>,
    /// Adam step counter shared by every entry of this set.
    pub adam_step: u64,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(
        &mut self,
        name: impl Into<String>,
        shape: Vec<usize>,
        value: Vec<f64>,
    ) -> Result<ParamId, NnError> {
        let name = name.into();
        if self.entries.iter().any(|e| e.name == name) {
            return Err(NnError::DuplicateName(name));
        }
        let n: usize = shape.iter().product();
        assert_eq!(n, value.len(), "shape/value length mismatch for `{name}`");
        self.entries.push(Param {
            name,
            shape,
            grad: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![0.0; n],
            value,
        });
        Ok(ParamId(self.entries.len() - 1))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn num_scalars(&self) -> usize {
        self.entries.iter().map(|e| e.len()).sum()
    }

    pub fn entry(&self, id: ParamId) -> &Param {
        &self.entries[id.0]
    }

    pub fn entry_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.entries[id.0]
    }

    pub fn value(&self, id: ParamId) -> &[f64] {
        &self.entries[id.0].value
    }

    pub fn entries(&self) -> impl Iterator<Item = &Param> {
        self.entries.iter()
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut Param> {
        self.entries.iter_mut()
    }

    pub fn by_name(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|e| e.name == name).map(ParamId)
    }

    pub fn zero_grads(&mut self) {
        for e in &mut self.entries {
            e.grad.fill(0.0);
        }
    }

    /// Simultaneous read access to one entry's values and write access to a
    /// different entry's gradient (needed where one array's gradient scales
    /// by another array's values).
    pub fn value_and_grad_mut(&mut self, read: ParamId, write: ParamId) -> (&[f64], &mut [f64]) {
        assert_ne!(read.0, write.0, "read and write entries must differ");
        if read.0 < write.0 {
            let (lo, hi) = self.entries.split_at_mut(write.0);
            (&lo[read.0].value, &mut hi[0].grad)
        } else {
            let (lo, hi) = self.entries.split_at_mut(read.0);
            (&hi[0].value, &mut lo[write.0].grad)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registration_order_is_stable() {
        let mut ps = ParameterSet::new();
        let a = ps.add("a", vec![2], vec![1.0, 2.0]).unwrap();
        let b = ps.add("b", vec![1], vec![3.0]).unwrap();
        assert_eq!(ps.value(a), &[1.0, 2.0]);
        assert_eq!(ps.value(b), &[3.0]);
        assert_eq!(ps.num_scalars(), 3);
        assert_eq!(ps.by_name("b"), Some(b));
        assert!(ps.add("a", vec![1], vec![0.0]).is_err());
    }

    #[test]
    fn split_borrow_reads_and_writes_distinct_entries() {
        let mut ps = ParameterSet::new();
        let a = ps.add("a", vec![2], vec![5.0, 6.0]).unwrap();
        let b = ps.add("b", vec![2], vec![0.0, 0.0]).unwrap();
        {
            let (vals, grads) = ps.value_and_grad_mut(a, b);
            grads[0] += vals[1];
        }
        assert_eq!(ps.entry(b).grad, vec![6.0, 0.0]);
    }
}
