//! Core raster types and the crate-wide coordinate convention.
//!
//! The pixel at row `r`, column `c` is addressed as `(x = c, y = r)`:
//! `x` grows rightward, `y` grows downward. [`GridDims::index`] is the single
//! addressing rule every module (and test) goes through.

use alloc::vec;
use alloc::vec::Vec;

/// Width and height of a raster, both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridDims {
    pub width: usize,
    pub height: usize,
}

impl GridDims {
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(
            width >= 1 && height >= 1,
            "grid dimensions must be at least 1x1"
        );
        GridDims { width, height }
    }

    /// Total number of pixels.
    #[inline]
    pub fn pixel_count(self) -> usize {
        self.width * self.height
    }

    /// Row-major index of pixel `(x, y)`.
    #[inline]
    pub fn index(self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    /// Whether signed coordinates land inside the grid.
    #[inline]
    pub fn contains_signed(self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as u64) < self.width as u64 && (y as u64) < self.height as u64
    }

    /// Euclidean length of the image diagonal, in pixels.
    pub fn diagonal(self) -> f64 {
        let w = self.width as f64;
        let h = self.height as f64;
        libm::sqrt(w * w + h * h)
    }
}

/// 2D boolean raster: skeleton annotations, masks, recovered skeletons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMap {
    dims: GridDims,
    bits: Vec<bool>,
}

impl BinaryMap {
    /// All-false map.
    pub fn new(dims: GridDims) -> Self {
        BinaryMap {
            dims,
            bits: vec![false; dims.pixel_count()],
        }
    }

    pub fn filled(dims: GridDims, value: bool) -> Self {
        BinaryMap {
            dims,
            bits: vec![value; dims.pixel_count()],
        }
    }

    /// Panics if `bits.len() != width * height`.
    pub fn from_bits(dims: GridDims, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), dims.pixel_count(), "bit buffer length mismatch");
        BinaryMap { dims, bits }
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[self.dims.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        let i = self.dims.index(x, y);
        self.bits[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True if the map has at least one true pixel.
    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    /// Coordinates of true pixels in row-major order.
    pub fn iter_true(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.dims.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Pixel-wise complement.
    pub fn complement(&self) -> BinaryMap {
        BinaryMap {
            dims: self.dims,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }
}

/// 2D raster of reals: distances, weights, confidences, flux magnitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    dims: GridDims,
    values: Vec<f64>,
}

impl ScalarMap {
    pub fn new(dims: GridDims) -> Self {
        ScalarMap {
            dims,
            values: vec![0.0; dims.pixel_count()],
        }
    }

    pub fn from_values(dims: GridDims, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), dims.pixel_count(), "value buffer length mismatch");
        ScalarMap { dims, values }
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.dims.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        let i = self.dims.index(x, y);
        self.values[i] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// 2D vector field stored as `(fx, fy)` pairs, row-major.
///
/// `fx` follows the x axis (rightward), `fy` the y axis (downward). A field
/// produced by ground-truth generation holds unit vectors on the skeleton
/// context and exact `(0, 0)` everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    dims: GridDims,
    vectors: Vec<(f64, f64)>,
}

impl FluxField {
    /// All-zero field.
    pub fn new(dims: GridDims) -> Self {
        FluxField {
            dims,
            vectors: vec![(0.0, 0.0); dims.pixel_count()],
        }
    }

    pub fn from_vectors(dims: GridDims, vectors: Vec<(f64, f64)>) -> Self {
        assert_eq!(
            vectors.len(),
            dims.pixel_count(),
            "vector buffer length mismatch"
        );
        FluxField { dims, vectors }
    }

    #[inline]
    pub fn dims(&self) -> GridDims {
        self.dims
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> (f64, f64) {
        self.vectors[self.dims.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: (f64, f64)) {
        let i = self.dims.index(x, y);
        self.vectors[i] = v;
    }

    pub fn vectors(&self) -> &[(f64, f64)] {
        &self.vectors
    }

    /// Per-pixel Euclidean norm `sqrt(fx^2 + fy^2)`.
    pub fn magnitude(&self) -> ScalarMap {
        ScalarMap {
            dims: self.dims,
            values: self
                .vectors
                .iter()
                .map(|&(fx, fy)| libm::sqrt(fx * fx + fy * fy))
                .collect(),
        }
    }
}
