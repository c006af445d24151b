//! Closed framed curves, stored as uniform samples and evaluated by
//! trigonometric interpolation.

use std::f64::consts::TAU;
use std::io::{Read, Write};

use nalgebra::DVector;

use crate::config::Tolerances;
use crate::error::{NumericError, Result};

/// Real trigonometric interpolant of periodic vector samples.
#[derive(Clone, Debug)]
struct Fourier {
    mean: DVector<f64>,
    cos: Vec<DVector<f64>>,
    sin: Vec<DVector<f64>>,
    nyquist: Option<DVector<f64>>,
}

impl Fourier {
    fn fit(xs: &[DVector<f64>]) -> Fourier {
        let m = xs.len();
        let dim = xs[0].len();
        let mean = xs.iter().fold(DVector::zeros(dim), |acc, x| acc + x) / m as f64;
        let modes = (m - 1) / 2;
        let mut cos = Vec::with_capacity(modes);
        let mut sin = Vec::with_capacity(modes);
        for k in 1..=modes {
            let mut c = DVector::zeros(dim);
            let mut s = DVector::zeros(dim);
            for (j, x) in xs.iter().enumerate() {
                let phase = TAU * ((k * j) % m) as f64 / m as f64;
                c += x * phase.cos();
                s += x * phase.sin();
            }
            cos.push(c * (2.0 / m as f64));
            sin.push(s * (2.0 / m as f64));
        }
        let nyquist = m.is_multiple_of(2).then(|| {
            xs.iter()
                .enumerate()
                .fold(DVector::zeros(dim), |acc, (j, x)| if j % 2 == 0 { acc + x } else { acc - x })
                / m as f64
        });
        Fourier { mean, cos, sin, nyquist }
    }

    /// Value and derivative at `t`.
    fn eval(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let mut v = self.mean.clone();
        let mut d = DVector::zeros(v.len());
        let (s1, c1) = (TAU * t).sin_cos();
        let (mut s, mut c) = (s1, c1);
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let w = TAU * (k + 1) as f64;
            v += a * c + b * s;
            d += (b * c - a * s) * w;
            (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
        }
        if let Some(a) = &self.nyquist {
            let w = std::f64::consts::PI * (2 * self.cos.len() + 2) as f64;
            v += a * (w * t).cos();
            d -= a * (w * (w * t).sin());
        }
        (v, d)
    }
}

/// A closed loop in `ℝⁿ` with a framing vector field.
#[derive(Clone, Debug)]
pub struct LoopCurve {
    pub name: String,
    points: Vec<DVector<f64>>,
    framing: Vec<DVector<f64>>,
    curve: Fourier,
    normal: Fourier,
}

fn finite(v: &[f64], what: &str, j: usize) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(NumericError::Data(format!("non-finite {what} in sample {j}")));
    }
    Ok(())
}

impl LoopCurve {
    /// Build from samples on the uniform grid `t_j = j/M`, `j = 0..=M`; the
    /// last sample repeats the first.
    pub fn from_samples(name: &str, t: &[f64], points: &[Vec<f64>], framing: &[Vec<f64>], tol: &Tolerances) -> Result<LoopCurve> {
        let m = points.len().checked_sub(1).filter(|m| *m >= 3).ok_or_else(|| NumericError::Data("a loop needs at least 4 samples".into()))?;
        if t.len() != points.len() || framing.len() != points.len() {
            return Err(NumericError::Data("t, point and framing columns differ in length".into()));
        }
        let dim = points[0].len();
        for (j, (x, nu)) in points.iter().zip(framing).enumerate() {
            if x.len() != dim || nu.len() != dim {
                return Err(NumericError::Data(format!("sample {j} has the wrong dimension")));
            }
            finite(x, "point", j)?;
            finite(nu, "framing", j)?;
            finite(&[t[j]], "parameter", j)?;
            if (t[j] - j as f64 / m as f64).abs() > 1e-9 {
                return Err(NumericError::Data(format!("parameter grid is not uniform at sample {j}: t = {}", t[j])));
            }
        }
        let gap: f64 = points[0].iter().zip(&points[m]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if gap > tol.closure {
            return Err(NumericError::Data(format!("curve is not closed: first and last samples differ by {gap:.3e}")));
        }
        let pts: Vec<DVector<f64>> = points[..m].iter().map(|p| DVector::from_column_slice(p)).collect();
        let nus: Vec<DVector<f64>> = framing[..m].iter().map(|p| DVector::from_column_slice(p)).collect();
        let curve = LoopCurve {
            name: name.to_string(),
            curve: Fourier::fit(&pts),
            normal: Fourier::fit(&nus),
            points: pts,
            framing: nus,
        };
        curve.check_imbedding()?;
        curve.check_framing()?;
        Ok(curve)
    }

    /// Sample `point` and `framing` at `m` uniform parameters.
    pub fn from_fn(
        name: &str,
        m: usize,
        point: impl Fn(f64) -> Vec<f64>,
        framing: impl Fn(f64) -> Vec<f64>,
        tol: &Tolerances,
    ) -> Result<LoopCurve> {
        let t: Vec<f64> = (0..=m).map(|j| j as f64 / m as f64).collect();
        let mut points: Vec<Vec<f64>> = t[..m].iter().map(|&s| point(s)).collect();
        let mut nus: Vec<Vec<f64>> = t[..m].iter().map(|&s| framing(s)).collect();
        points.push(points[0].clone());
        nus.push(nus[0].clone());
        LoopCurve::from_samples(name, &t, &points, &nus, tol)
    }

    fn check_imbedding(&self) -> Result<()> {
        let m = self.points.len();
        let dist = |i: usize, j: usize| (&self.points[i] - &self.points[j]).norm();
        let spacing = (0..m).map(|i| dist(i, (i + 1) % m)).fold(f64::INFINITY, f64::min);
        if spacing == 0.0 {
            return Err(NumericError::NotImbedded("consecutive samples coincide".into()));
        }
        for i in 0..m {
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                if dist(i, j) < 0.5 * spacing {
                    return Err(NumericError::NotImbedded(format!(
                        "samples {i} and {j} are {:.3e} apart, below half the sample spacing",
                        dist(i, j)
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_framing(&self) -> Result<()> {
        for (j, nu) in self.framing.iter().enumerate() {
            let norm = nu.norm();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(NumericError::Framing(format!("framing vector {j} has norm {norm}")));
            }
            let v = self.velocity(j as f64 / self.points.len() as f64);
            if (nu.dot(&v) / v.norm()).abs() > 1.0 - 1e-6 {
                return Err(NumericError::Framing(format!("framing vector {j} is tangent to the curve")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Number of samples on the periodic grid.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn point(&self, t: f64) -> DVector<f64> {
        self.curve.eval(t).0
    }

    pub fn velocity(&self, t: f64) -> DVector<f64> {
        self.curve.eval(t).1
    }

    pub fn point_and_velocity(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        self.curve.eval(t)
    }

    /// The framing vector and its derivative.
    pub fn framing(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        self.normal.eval(t)
    }

    /// Largest distance between two samples.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// `γ + ε ξ` with the same framing.
    pub fn deformed(&self, eps: f64, field: impl Fn(f64) -> DVector<f64>, tol: &Tolerances) -> Result<LoopCurve> {
        let m = self.points.len();
        LoopCurve::from_fn(
            &self.name,
            m,
            |t| (self.point(t) + field(t) * eps).as_slice().to_vec(),
            |t| self.framing(t).0.as_slice().to_vec(),
            tol,
        )
    }

    /// Read `t,x1..xn,nu1..nun` CSV.
    pub fn read_csv(name: &str, input: impl Read, tol: &Tolerances) -> Result<LoopCurve> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.len() < 3 || header.len().is_multiple_of(2) || header[0] != "t" {
            return Err(NumericError::Data(format!("expected header t,x1..xn,nu1..nun, got {}", header.join(","))));
        }
        let n = (header.len() - 1) / 2;
        for i in 0..n {
            if header[1 + i] != format!("x{}", i + 1) || header[1 + n + i] != format!("nu{}", i + 1) {
                return Err(NumericError::Data(format!("unexpected column names in header {}", header.join(","))));
            }
        }
        let (mut t, mut pts, mut nus) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| NumericError::Data(format!("row {}: {e}", line + 2)))?;
            if vals.len() != 2 * n + 1 {
                return Err(NumericError::Data(format!("row {} has {} fields", line + 2, vals.len())));
            }
            t.push(vals[0]);
            pts.push(vals[1..=n].to_vec());
            nus.push(vals[n + 1..].to_vec());
        }
        LoopCurve::from_samples(name, &t, &pts, &nus, tol)
    }

    /// Write the samples, with the closing row, as CSV.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let n = self.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend((1..=n).map(|i| format!("nu{i}")));
        w.write_record(&header)?;
        let m = self.points.len();
        for j in 0..=m {
            let mut row = vec![format!("{}", j as f64 / m as f64)];
            row.extend(self.points[j % m].iter().map(|v| format!("{v:e}")));
            row.extend(self.framing[j % m].iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
