use crate::error::{Error, Result};

/// Largest dimension accepted for dense storage.
pub const MAX_DENSE_DIM: usize = 1 << 14;

pub(crate) fn check_dense_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_DIM {
        return Err(Error::DimensionOverflow(n));
    }
    Ok(())
}

/// Dense real symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

/// Dense complex Hermitian matrix as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampledMatrix {
    Real(SymmetricMatrix),
    Complex(HermitianMatrix),
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect::<Vec<_>>();
        assert_eq!(data.len(), n * n, "matrix must be square");
        Self { n, data }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                d = d.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        d
    }
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, re: vec![0.0; n * n], im: vec![0.0; n * n] }
    }

    /// Set (i, j) to (re, im) and (j, i) to its conjugate.
    pub fn set_herm(&mut self, i: usize, j: usize, re: f64, im: f64) {
        let n = self.n;
        self.re[i * n + j] = re;
        self.im[i * n + j] = im;
        self.re[j * n + i] = re;
        self.im[j * n + i] = -im;
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            d = d.max(self.im[i * n + i].abs());
            for j in 0..i {
                d = d.max((self.re[i * n + j] - self.re[j * n + i]).abs());
                d = d.max((self.im[i * n + j] + self.im[j * n + i]).abs());
            }
        }
        d
    }

    /// The 2n x 2n real symmetric matrix [[A, -B], [B, A]] for H = A + iB.
    /// Its spectrum is that of H with every eigenvalue doubled.
    pub fn real_embedding(&self) -> SymmetricMatrix {
        let n = self.n;
        let m = 2 * n;
        let mut out = SymmetricMatrix::zeros(m);
        for i in 0..n {
            for j in 0..n {
                let a = self.re[i * n + j];
                let b = self.im[i * n + j];
                out.data[i * m + j] = a;
                out.data[(i + n) * m + (j + n)] = a;
                out.data[i * m + (j + n)] = -b;
                out.data[(i + n) * m + j] = b;
            }
        }
        out
    }
}

impl SampledMatrix {
    pub fn dim(&self) -> usize {
        match self {
            Self::Real(m) => m.n,
            Self::Complex(m) => m.n,
        }
    }

    pub fn symmetry_defect(&self) -> f64 {
        match self {
            Self::Real(m) => m.symmetry_defect(),
            Self::Complex(m) => m.symmetry_defect(),
        }
    }

    pub fn trace(&self) -> f64 {
        let n = self.dim();
        let data = match self {
            Self::Real(m) => &m.data,
            Self::Complex(m) => &m.re,
        };
        (0..n).map(|i| data[i * n + i]).sum()
    }

    /// Tr(W^power) for even `power`, as the squared Frobenius norm of W^(power/2).
    pub fn trace_even_power(&self, power: u32) -> Result<f64> {
        if power == 0 || power % 2 == 1 {
            return Err(Error::InvalidArgument(format!("power {power} must be even and positive")));
        }
        let n = self.dim();
        let (re, im) = match self {
            Self::Real(m) => (m.data.clone(), vec![0.0; n * n]),
            Self::Complex(m) => (m.re.clone(), m.im.clone()),
        };
        let (mut pr, mut pi) = (re.clone(), im.clone());
        for _ in 1..power / 2 {
            (pr, pi) = complex_matmul(n, &pr, &pi, &re, &im);
        }
        Ok(pr.iter().chain(&pi).map(|x| x * x).sum())
    }
}

fn complex_matmul(n: usize, ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut cr = vec![0.0; n * n];
    let mut ci = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let (xr, xi) = (ar[i * n + k], ai[i * n + k]);
            let rowr = &br[k * n..(k + 1) * n];
            let rowi = &bi[k * n..(k + 1) * n];
            let outr = &mut cr[i * n..(i + 1) * n];
            for j in 0..n {
                outr[j] += xr * rowr[j] - xi * rowi[j];
            }
            let outi = &mut ci[i * n..(i + 1) * n];
            for j in 0..n {
                outi[j] += xr * rowi[j] + xi * rowr[j];
            }
        }
    }
    (cr, ci)
}
