use super::AnafError;

/// Dense `n x c x h x w` tensor, row-major in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    pub(crate) n: usize,
    pub(crate) c: usize,
    pub(crate) h: usize,
    pub(crate) w: usize,
    pub(crate) data: Vec<f32>,
}

impl Tensor4 {
    pub fn new(n: usize, c: usize, h: usize, w: usize, data: Vec<f32>) -> Result<Self, AnafError> {
        if data.len() != n * c * h * w {
            return Err(AnafError::Shape(format!(
                "{} values for {n}x{c}x{h}x{w}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(AnafError::NonFinite);
        }
        Ok(Self { n, c, h, w, data })
    }

    pub fn zeros(n: usize, c: usize, h: usize, w: usize) -> Self {
        Self::raw(n, c, h, w, vec![0.0; n * c * h * w])
    }

    pub fn filled(n: usize, c: usize, h: usize, w: usize, v: f32) -> Self {
        Self::raw(n, c, h, w, vec![v; n * c * h * w])
    }

    pub fn from_fn(n: usize, c: usize, h: usize, w: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(n * c * h * w);
        for a in 0..n {
            for b in 0..c {
                for y in 0..h {
                    for x in 0..w {
                        data.push(f(a, b, y, x));
                    }
                }
            }
        }
        Self::raw(n, c, h, w, data)
    }

    pub(crate) fn raw(n: usize, c: usize, h: usize, w: usize, data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), n * c * h * w);
        Self { n, c, h, w, data }
    }

    /// `(n, c, h, w)`.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn index(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        ((n * self.c + c) * self.h + y) * self.w + x
    }

    #[inline]
    pub fn get(&self, n: usize, c: usize, y: usize, x: usize) -> f32 {
        self.data[self.index(n, c, y, x)]
    }

    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, v: f32) {
        let i = self.index(n, c, y, x);
        self.data[i] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise sum; shapes must agree.
    pub fn add(&self, other: &Tensor4) -> Result<Tensor4, AnafError> {
        if self.shape() != other.shape() {
            return Err(AnafError::Shape(format!("add {:?} and {:?}", self.shape(), other.shape())));
        }
        Ok(Self::raw(
            self.n,
            self.c,
            self.h,
            self.w,
            self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Nearest-neighbour 2x spatial upsampling.
    pub fn upsample2(&self) -> Tensor4 {
        Tensor4::from_fn(self.n, self.c, self.h * 2, self.w * 2, |n, c, y, x| self.get(n, c, y / 2, x / 2))
    }
}
