//! JSON schema for states and operators: complex entries as `[re, im]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{DensityMatrix, LindbladOperator, Liouvillian, QubitRegister};
use crate::C64;

#[derive(Serialize, Deserialize)]
struct DensityMatrixSchema {
    register: Vec<String>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct OperatorSchema {
    register: Vec<String>,
    support: Vec<String>,
    local: Vec<Vec<[f64; 2]>>,
    tag: String,
}

#[derive(Serialize, Deserialize)]
struct LiouvillianSchema {
    register: Vec<String>,
    operators: Vec<OperatorSchema>,
}

fn matrix_to_rows(m: &DMatrix<C64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<C64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Serialization("matrix rows are ragged".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl DensityMatrix {
    pub fn to_json(&self) -> String {
        let schema = DensityMatrixSchema {
            register: self.register().labels().to_vec(),
            matrix: matrix_to_rows(self.matrix()),
        };
        serde_json::to_string(&schema).expect("schema serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let schema: DensityMatrixSchema =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let register = QubitRegister::new(schema.register)?;
        let matrix = rows_to_matrix(&schema.matrix)?;
        DensityMatrix::new(register, matrix, 1e-8)
    }
}

fn operator_to_schema(op: &LindbladOperator) -> OperatorSchema {
    OperatorSchema {
        register: op.register().labels().to_vec(),
        support: op.support_labels().iter().map(|s| s.to_string()).collect(),
        local: matrix_to_rows(op.local()),
        tag: op.tag().to_string(),
    }
}

fn operator_from_schema(schema: &OperatorSchema) -> Result<LindbladOperator> {
    let register = QubitRegister::new(schema.register.clone())?;
    let local = rows_to_matrix(&schema.local)?;
    let support: Vec<&str> = schema.support.iter().map(|s| s.as_str()).collect();
    LindbladOperator::new(register, &support, local, schema.tag.clone())
}

impl LindbladOperator {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&operator_to_schema(self)).expect("schema serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let schema: OperatorSchema =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        operator_from_schema(&schema)
    }
}

impl Liouvillian {
    pub fn to_json(&self) -> String {
        let schema = LiouvillianSchema {
            register: self.register().labels().to_vec(),
            operators: self.operators().iter().map(operator_to_schema).collect(),
        };
        serde_json::to_string(&schema).expect("schema serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let schema: LiouvillianSchema =
            serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))?;
        let register = QubitRegister::new(schema.register)?;
        let ops = schema
            .operators
            .iter()
            .map(operator_from_schema)
            .collect::<Result<Vec<_>>>()?;
        Liouvillian::new(register, ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::operator::mats::*;

    #[test]
    fn density_roundtrip() {
        let r = QubitRegister::new(["a", "b"]).unwrap();
        let rho = DensityMatrix::from_diagonal(r, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert_eq!(back.register(), rho.register());
        assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn liouvillian_roundtrip() {
        let r = QubitRegister::new(["c", "a1"]).unwrap();
        let ops = vec![
            LindbladOperator::new(r.clone(), &["a1"], ket_bra(0, 1).scale(0.7), "ad").unwrap(),
            LindbladOperator::new(
                r.clone(),
                &["c", "a1"],
                ket_bra(0, 1).kronecker(&projector(1)),
                "cp",
            )
            .unwrap(),
        ];
        let l = Liouvillian::new(r, ops).unwrap();
        let back = Liouvillian::from_json(&l.to_json()).unwrap();
        assert_eq!(back.operators().len(), 2);
        assert_eq!(back.operators()[1].support_labels(), vec!["c", "a1"]);
        assert!((back.operators()[1].local() - l.operators()[1].local()).norm() < 1e-15);
    }
}
