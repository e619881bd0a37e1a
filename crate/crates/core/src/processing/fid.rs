use ndarray::Array3;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Frequency discrimination scheme along the indirect dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quadrature {
    /// Components are the cosine- and sine-modulated data sets.
    #[default]
    States,
    /// Components are the echo and antiecho data sets.
    EchoAntiecho,
}

impl Quadrature {
    pub fn code(self) -> u32 {
        match self {
            Quadrature::States => 0,
            Quadrature::EchoAntiecho => 1,
        }
    }

    pub fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(Quadrature::States),
            1 => Ok(Quadrature::EchoAntiecho),
            _ => Err(Error::Format(format!("unknown quadrature code {code}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quadrature::States => "states",
            Quadrature::EchoAntiecho => "echoantiecho",
        }
    }
}

impl std::str::FromStr for Quadrature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "states" => Ok(Quadrature::States),
            "echoantiecho" | "ea" => Ok(Quadrature::EchoAntiecho),
            _ => Err(Error::validation(format!("unknown quadrature `{s}`"))),
        }
    }
}

/// Hypercomplex time-domain data indexed `[t1][component][t2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fid2D {
    pub data: Array3<C64>,
    pub sw1_hz: f64,
    pub sw2_hz: f64,
    pub quadrature: Quadrature,
}

impl Fid2D {
    pub fn zeros(n_t1: usize, n_t2: usize, sw1_hz: f64, sw2_hz: f64, quadrature: Quadrature) -> Self {
        Fid2D { data: Array3::zeros((n_t1, 2, n_t2)), sw1_hz, sw2_hz, quadrature }
    }

    pub fn n_t1(&self) -> usize {
        self.data.shape()[0]
    }

    pub fn n_t2(&self) -> usize {
        self.data.shape()[2]
    }

    pub fn dwell1(&self) -> f64 {
        1.0 / self.sw1_hz
    }

    pub fn dwell2(&self) -> f64 {
        1.0 / self.sw2_hz
    }

    /// Acquisition time n·dwell along t₁.
    pub fn aq1(&self) -> f64 {
        self.n_t1() as f64 / self.sw1_hz
    }

    pub fn aq2(&self) -> f64 {
        self.n_t2() as f64 / self.sw2_hz
    }

    /// Sample count needed to reach `aq_s` at `sw_hz`.
    pub fn points_for(aq_s: f64, sw_hz: f64) -> usize {
        ((aq_s * sw_hz) - 1e-9).ceil().max(1.0) as usize
    }
}
