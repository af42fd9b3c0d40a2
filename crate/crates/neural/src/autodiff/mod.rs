//! Reverse-mode automatic differentiation over dense `f64` tensors.
//!
//! A [`Tape`] records every operation of one forward pass. Parameters enter
//! as leaves (see [`ParamSet::bind`]) and [`Tape::backward`] returns the
//! gradient of a scalar output with respect to every recorded value.
//!
//! ```
//! use sentio_neural::autodiff::{Tape, Tensor};
//!
//! let tape = Tape::new();
//! let x = tape.leaf(Tensor::new(vec![2], vec![3.0, -1.0]).unwrap());
//! let y = x.mul(x).unwrap().sum();
//! let grads = tape.backward(y);
//! assert_eq!(grads.get(x).unwrap().data(), &[6.0, -2.0]);
//! ```

pub mod checkpoint;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod ops;
pub mod optim;
pub mod param;
mod tape;
mod tensor;

pub use ops::Padding;
pub use optim::{Adam, EarlyStopping, Optimizer, SgdMomentum, StopDecision};
pub use param::{Param, ParamSet};
pub use tape::{Grads, Tape, Var};
pub use tensor::Tensor;
