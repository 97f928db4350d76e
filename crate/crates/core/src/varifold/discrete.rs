use crate::error::{Error, Result};
use crate::grassmann::Plane;
use crate::linalg::Vector;
use crate::measure::SampledSet;

#[derive(Clone, Debug, PartialEq)]
pub enum Tangent {
    Plane(Plane),
    /// Unrectifiable mass, averaged over the Haar measure on `G(n, m)`.
    Isotropic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub point: Vector,
    pub tangent: Tangent,
    /// Local `H^m` mass carried by the sample.
    pub weight: f64,
}

impl Sample {
    pub fn new(point: Vector, tangent: Plane, weight: f64) -> Self {
        Self {
            point,
            tangent: Tangent::Plane(tangent),
            weight,
        }
    }

    pub fn isotropic(point: Vector, weight: f64) -> Self {
        Self {
            point,
            tangent: Tangent::Isotropic,
            weight,
        }
    }

    pub fn plane(&self) -> Option<&Plane> {
        match &self.tangent {
            Tangent::Plane(p) => Some(p),
            Tangent::Isotropic => None,
        }
    }
}

/// Weighted samples of an `m`-varifold in `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteVarifold {
    ambient_dim: usize,
    dim: usize,
    samples: Vec<Sample>,
}

impl DiscreteVarifold {
    pub fn new(ambient_dim: usize, dim: usize) -> Result<Self> {
        if dim > ambient_dim {
            return Err(Error::param("dim", dim, "varifold dimension exceeds ambient dimension"));
        }
        Ok(Self {
            ambient_dim,
            dim,
            samples: Vec::new(),
        })
    }

    pub fn from_samples(ambient_dim: usize, dim: usize, samples: Vec<Sample>) -> Result<Self> {
        let mut v = Self::new(ambient_dim, dim)?;
        v.samples.reserve(samples.len());
        for s in samples {
            v.push(s)?;
        }
        Ok(v)
    }

    pub fn push(&mut self, sample: Sample) -> Result<()> {
        Error::check_dim("sample point", self.ambient_dim, sample.point.len())?;
        if let Tangent::Plane(p) = &sample.tangent {
            Error::check_dim("sample tangent ambient", self.ambient_dim, p.ambient_dim())?;
            Error::check_dim("sample tangent", self.dim, p.dim())?;
        }
        if !(sample.weight >= 0.0 && sample.weight.is_finite()) {
            return Err(Error::param("weight", sample.weight, "weights must be finite and nonnegative"));
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// No isotropic samples.
    pub fn is_rectifiable(&self) -> bool {
        self.samples.iter().all(|s| s.plane().is_some())
    }

    pub fn is_isotropic(&self) -> bool {
        self.samples.iter().all(|s| s.plane().is_none())
    }

    /// Tangent samples and isotropic samples.
    pub fn split(&self) -> (DiscreteVarifold, DiscreteVarifold) {
        let (r, u): (Vec<Sample>, Vec<Sample>) = self.samples.iter().cloned().partition(|s| s.plane().is_some());
        (self.with_samples(r), self.with_samples(u))
    }

    pub fn restrict<P: Fn(&Sample) -> bool>(&self, keep: P) -> DiscreteVarifold {
        self.with_samples(self.samples.iter().filter(|s| keep(s)).cloned().collect())
    }

    pub fn with_samples(&self, samples: Vec<Sample>) -> DiscreteVarifold {
        DiscreteVarifold {
            ambient_dim: self.ambient_dim,
            dim: self.dim,
            samples,
        }
    }

    /// Union with another varifold of the same dimensions.
    pub fn extend(&mut self, other: &DiscreteVarifold) -> Result<()> {
        Error::check_dim("varifold ambient", self.ambient_dim, other.ambient_dim)?;
        Error::check_dim("varifold dim", self.dim, other.dim)?;
        self.samples.extend(other.samples.iter().cloned());
        Ok(())
    }

    /// Typical sample spacing: the median of `weight^{1/m}`.
    pub fn spacing(&self) -> f64 {
        let mut w: Vec<f64> = self.samples.iter().filter(|s| s.weight > 0.0).map(|s| s.weight).collect();
        if w.is_empty() {
            return 0.0;
        }
        w.sort_by(f64::total_cmp);
        let mid = w[w.len() / 2];
        if self.dim == 0 {
            0.0
        } else {
            mid.powf(1.0 / self.dim as f64)
        }
    }

    pub fn points(&self) -> impl Iterator<Item = &Vector> {
        self.samples.iter().map(|s| &s.point)
    }

    /// Support points of positive-weight samples as a sampled set.
    pub fn support(&self, resolution: f64) -> SampledSet {
        let pts = self.samples.iter().filter(|s| s.weight > 0.0).map(|s| s.point.clone()).collect();
        SampledSet::new(pts, self.dim, resolution)
    }

    /// CSV rows `x_1..x_n, frame (n·m entries, row-major) | isotropic, weight`
    /// under a header line.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        let mut header: Vec<String> = (0..self.ambient_dim).map(|i| format!("x{i}")).collect();
        header.push(format!("tangent_{}x{}", self.ambient_dim, self.dim));
        header.push("weight".into());
        w.write_record(&header).map_err(csv_err)?;
        for s in &self.samples {
            let mut row: Vec<String> = s.point.iter().map(|v| v.to_string()).collect();
            match &s.tangent {
                Tangent::Plane(p) => {
                    for i in 0..self.ambient_dim {
                        for j in 0..self.dim {
                            row.push(p.frame()[(i, j)].to_string());
                        }
                    }
                }
                Tangent::Isotropic => row.push("isotropic".into()),
            }
            row.push(s.weight.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_csv(text: &str, ambient_dim: usize, dim: usize) -> Result<Self> {
        let mut v = Self::new(ambient_dim, dim)?;
        let mut r = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let plane_len = ambient_dim + ambient_dim * dim + 1;
        let iso_len = ambient_dim + 2;
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |what: String| Error::Parse(format!("line {line}: {what}"));
            let num = |i: usize| -> Result<f64> {
                rec[i].parse::<f64>().map_err(|_| bad(format!("field {} `{}` is not a number", i + 1, &rec[i])))
            };
            let point = Vector::from_iterator(ambient_dim, (0..ambient_dim.min(rec.len())).map(|i| num(i).unwrap_or(f64::NAN)));
            if rec.len() < ambient_dim || point.iter().any(|x| !x.is_finite()) {
                return Err(bad("malformed point".into()));
            }
            let sample = if rec.len() == iso_len && &rec[ambient_dim] == "isotropic" {
                Sample::isotropic(point, num(ambient_dim + 1)?)
            } else if rec.len() == plane_len {
                let entries = (ambient_dim..ambient_dim + ambient_dim * dim).map(num).collect::<Result<Vec<f64>>>()?;
                let frame = crate::linalg::Matrix::from_row_slice(ambient_dim, dim, &entries);
                let plane = Plane::from_columns(&frame).map_err(|e| bad(e.to_string()))?;
                Sample::new(point, plane, num(plane_len - 1)?)
            } else {
                return Err(bad(format!("expected {plane_len} or {iso_len} fields, found {}", rec.len())));
            };
            v.push(sample).map_err(|e| bad(e.to_string()))?;
        }
        Ok(v)
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse(format!("line {}: {e}", p.line())),
        None => Error::Parse(e.to_string()),
    }
}

/// Flat disc of `count` sunflower samples with equal weights summing to
/// `πR²`, in the 2-plane `plane` through `center`.
pub fn sunflower_disc(center: &Vector, plane: &Plane, radius: f64, count: usize) -> Result<DiscreteVarifold> {
    Error::check_dim("disc plane", 2, plane.dim())?;
    Error::check_dim("disc center", plane.ambient_dim(), center.len())?;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let w = std::f64::consts::PI * radius * radius / count as f64;
    let b = plane.frame();
    let samples = (0..count)
        .map(|k| {
            let r = radius * ((k as f64 + 0.5) / count as f64).sqrt();
            let th = golden * k as f64;
            let p = center + b.column(0) * (r * th.cos()) + b.column(1) * (r * th.sin());
            Sample::new(p, plane.clone(), w)
        })
        .collect();
    DiscreteVarifold::from_samples(plane.ambient_dim(), 2, samples)
}

/// Midpoint grid on the cube `origin + side·[0,1]^m` of an `m`-plane, with
/// `per_side^m` samples of weight `(side/per_side)^m`.
pub fn grid_patch(origin: &Vector, plane: &Plane, side: f64, per_side: usize) -> Result<DiscreteVarifold> {
    let n = plane.ambient_dim();
    let m = plane.dim();
    Error::check_dim("patch origin", n, origin.len())?;
    let h = side / per_side as f64;
    let w = h.powi(m as i32);
    let total = per_side.pow(m as u32);
    let b = plane.frame();
    let samples = (0..total)
        .map(|mut idx| {
            let mut p = origin.clone();
            for j in 0..m {
                let i = idx % per_side;
                idx /= per_side;
                p += b.column(j) * ((i as f64 + 0.5) * h);
            }
            Sample::new(p, plane.clone(), w)
        })
        .collect();
    DiscreteVarifold::from_samples(n, m, samples)
}

/// Isotropic samples of a sampled set sharing its covering estimate equally.
pub fn isotropic_from(set: &SampledSet) -> Result<DiscreteVarifold> {
    let n = set.ambient_dim();
    if set.is_empty() {
        return DiscreteVarifold::new(n, set.dim);
    }
    let w = set.measure().value / set.points.len() as f64;
    let samples = set.points.iter().map(|p| Sample::isotropic(p.clone(), w)).collect();
    DiscreteVarifold::from_samples(n, set.dim, samples)
}
