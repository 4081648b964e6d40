//! Classic minimization test functions, exposed for maximization as `−f`.
//! Every function has its global minimum 0 at the origin.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    Sphere,
    Rastrigin,
    Ackley,
    Griewank,
    Schwefel222,
}

impl TestFunction {
    pub const ALL: [TestFunction; 5] = [
        TestFunction::Sphere,
        TestFunction::Rastrigin,
        TestFunction::Ackley,
        TestFunction::Griewank,
        TestFunction::Schwefel222,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Sphere => "sphere",
            TestFunction::Rastrigin => "rastrigin",
            TestFunction::Ackley => "ackley",
            TestFunction::Griewank => "griewank",
            TestFunction::Schwefel222 => "schwefel_2_22",
        }
    }

    /// Conventional symmetric box `[−b, b]` for each coordinate.
    pub fn bound(self) -> f64 {
        match self {
            TestFunction::Sphere | TestFunction::Schwefel222 => 10.0,
            TestFunction::Rastrigin => 5.12,
            TestFunction::Ackley => 32.0,
            TestFunction::Griewank => 600.0,
        }
    }

    /// Value to minimize.
    pub fn cost(self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        match self {
            TestFunction::Sphere => x.iter().map(|v| v * v).sum(),
            TestFunction::Rastrigin => 10.0 * n + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>(),
            TestFunction::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
            }
            TestFunction::Griewank => {
                let s = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                s - p + 1.0
            }
            TestFunction::Schwefel222 => {
                let s: f64 = x.iter().map(|v| v.abs()).sum();
                let p: f64 = x.iter().map(|v| v.abs()).product();
                s + p
            }
        }
    }

    pub fn fitness(self, x: &[f64]) -> f64 {
        -self.cost(x)
    }
}

impl std::str::FromStr for TestFunction {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| crate::Error::invalid(format!("unknown test function {s:?}")))
    }
}
