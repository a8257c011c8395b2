//! Dense rank-3 and rank-4 tensors over the 6-dimensional state space.
//!
//! Storage keeps the full symmetric redundancy; at 6^4 = 1296 entries the
//! memory cost is irrelevant and indexing stays branch-free.

pub const STATE_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    pub data: Box<[[[f64; STATE_DIM]; STATE_DIM]; STATE_DIM]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub data: Box<[[[[f64; STATE_DIM]; STATE_DIM]; STATE_DIM]; STATE_DIM]>,
}

impl Tensor3 {
    pub fn zeros() -> Self {
        Self {
            data: Box::new([[[0.0; STATE_DIM]; STATE_DIM]; STATE_DIM]),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize, b: usize) -> f64 {
        self.data[i][a][b]
    }

    #[inline]
    pub fn set(&mut self, i: usize, a: usize, b: usize, value: f64) {
        self.data[i][a][b] = value;
    }

    /// Largest asymmetry over the trailing index pair.
    pub fn max_trailing_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in (a + 1)..STATE_DIM {
                    worst = worst.max((self.data[i][a][b] - self.data[i][b][a]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    worst = worst.max(self.data[i][a][b].abs());
                }
            }
        }
        worst
    }

    pub fn write_flat(&self, out: &mut [f64]) {
        let mut k = 0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    out[k] = self.data[i][a][b];
                    k += 1;
                }
            }
        }
    }

    pub fn read_flat(&mut self, input: &[f64]) {
        let mut k = 0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    self.data[i][a][b] = input[k];
                    k += 1;
                }
            }
        }
    }
}

impl Tensor4 {
    pub fn zeros() -> Self {
        Self {
            data: Box::new([[[[0.0; STATE_DIM]; STATE_DIM]; STATE_DIM]; STATE_DIM]),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize, b: usize, c: usize) -> f64 {
        self.data[i][a][b][c]
    }

    #[inline]
    pub fn set(&mut self, i: usize, a: usize, b: usize, c: usize, value: f64) {
        self.data[i][a][b][c] = value;
    }

    /// Largest asymmetry over permutations of the trailing index triple.
    pub fn max_trailing_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    for c in 0..STATE_DIM {
                        let v = self.data[i][a][b][c];
                        for w in [
                            self.data[i][a][c][b],
                            self.data[i][b][a][c],
                            self.data[i][b][c][a],
                            self.data[i][c][a][b],
                            self.data[i][c][b][a],
                        ] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    for c in 0..STATE_DIM {
                        worst = worst.max(self.data[i][a][b][c].abs());
                    }
                }
            }
        }
        worst
    }

    pub fn write_flat(&self, out: &mut [f64]) {
        let mut k = 0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    for c in 0..STATE_DIM {
                        out[k] = self.data[i][a][b][c];
                        k += 1;
                    }
                }
            }
        }
    }

    pub fn read_flat(&mut self, input: &[f64]) {
        let mut k = 0;
        for i in 0..STATE_DIM {
            for a in 0..STATE_DIM {
                for b in 0..STATE_DIM {
                    for c in 0..STATE_DIM {
                        self.data[i][a][b][c] = input[k];
                        k += 1;
                    }
                }
            }
        }
    }
}
