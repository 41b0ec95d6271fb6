//! Chart-based differential geometry for weak almost contact metric
//! structures: symbolic expressions, tensor calculus with exact
//! derivatives, curvature, and numeric verification of structure
//! identities, *-Ricci tensors and *-η-Ricci solitons.

pub mod error;
pub mod expr;
pub mod fbasis;
pub mod forms;
pub mod jet;
pub mod kenmotsu;
pub mod report;
pub mod riemann;
pub mod scalar;
pub mod soliton;
pub mod star;
pub mod structure;
pub mod tensor;
pub mod zoo;

pub use error::{EvalError, GeometryError, ParseError, Result};
pub use expr::{diff_expr, eval_expr, parse_expr, Expr, Params, Point};
pub use tensor::{tensor_eval, Chart, EvaluatedTensor, Tensor, TensorField};
pub use report::{CheckResult, Predicate, Status, TheoremVerdict, VerificationReport};
pub use soliton::{PotentialField, SolitonData};
pub use structure::{BundleFields, LocalGeometry, WacsBundle};
pub use zoo::ZooSpec;
