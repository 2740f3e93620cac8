//! Plain-text formats: headerless comma-separated matrices and histograms, and
//! plans as `i,j,value` triples.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::polytope::{Histogram, Matrix, TransportPlan};

fn records<R: Read>(input: R) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    what: "number".into(),
                    detail: f.into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn read_matrix<R: Read>(input: R) -> Result<Matrix> {
    Matrix::from_rows(&records(input)?)
}

/// A histogram given on one line or one value per line. Its total mass is
/// whatever the entries sum to.
pub fn read_histogram<R: Read>(input: R) -> Result<Histogram> {
    let values: Vec<f64> = records(input)?.into_iter().flatten().collect();
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() <= 1e-12 * values.len().max(1) as f64 {
        Histogram::new(values)
    } else {
        Histogram::with_mass(values, sum)
    }
}

pub fn read_matrix_file(path: &Path) -> Result<Matrix> {
    read_matrix(std::fs::File::open(path)?)
}

pub fn read_histogram_file(path: &Path) -> Result<Histogram> {
    read_histogram(std::fs::File::open(path)?)
}

/// Writes every entry of the plan as `i,j,value` under that header.
pub fn write_plan<W: Write>(plan: &Matrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "value"])?;
    for i in 0..plan.rows() {
        for j in 0..plan.cols() {
            w.write_record([i.to_string(), j.to_string(), format!("{:e}", plan.get(i, j))])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `i,j,value` triples into a dense matrix of the given shape.
pub fn read_plan<R: Read>(input: R, rows: usize, cols: usize) -> Result<Matrix> {
    let mut rd = csv::Reader::from_reader(input);
    let mut m = Matrix::zeros(rows, cols);
    for rec in rd.deserialize::<(usize, usize, f64)>() {
        let (i, j, v) = rec?;
        if i >= rows || j >= cols {
            return Err(Error::invalid(format!("plan cell ({i},{j}) outside {rows}x{cols}")));
        }
        m.set(i, j, v);
    }
    Ok(m)
}

/// Validates a plan read from disk against its marginals.
pub fn read_plan_for<R: Read>(input: R, x: &Histogram, y: &Histogram) -> Result<TransportPlan> {
    TransportPlan::new(read_plan(input, x.len(), y.len())?, x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_and_histograms() {
        let m = read_matrix("0, 1\n# comment\n1,0\n\n".as_bytes()).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(read_matrix("0,1\n1\n".as_bytes()).is_err());
        assert!(read_matrix("0,x\n".as_bytes()).is_err());
        let h = read_histogram("0.25\n0.75\n".as_bytes()).unwrap();
        assert_eq!(h.values(), &[0.25, 0.75]);
        let h = read_histogram("1,2,3".as_bytes()).unwrap();
        assert_eq!(h.total_mass(), 6.0);
    }

    #[test]
    fn plan_round_trip() {
        let m = Matrix::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let mut buf = Vec::new();
        write_plan(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i,j,value\n0,0,1e-1\n"));
        assert_eq!(read_plan(buf.as_slice(), 2, 2).unwrap(), m);
        assert!(read_plan(buf.as_slice(), 1, 2).is_err());
    }
}
