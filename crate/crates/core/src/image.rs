//! Image, data-space vector and split-stack containers.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Single-channel real image stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// Builds an image, rejecting empty grids, wrong lengths and non-finite values.
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param("dimensions", "width and height must be positive"));
        }
        if values.len() != width * height {
            return Err(Error::dims(
                format!("{} values", width * height),
                format!("{} values", values.len()),
            ));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, T::zero())
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            values: vec![value; width * height],
        }
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut values = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                values.push(f(i, j));
            }
        }
        Self {
            width,
            height,
            values,
        }
    }

    /// Builds an image from nested rows, mostly for tests.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::param("rows", "ragged rows"));
        }
        Self::new(width, height, rows.concat())
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: T) {
        let w = self.width;
        self.values[row * w + col] = value;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::dims(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }

    pub fn as_data(&self) -> DataVector<T> {
        DataVector {
            rows: self.height,
            cols: self.width,
            values: self.values.clone(),
        }
    }

    pub fn into_data(self) -> DataVector<T> {
        DataVector {
            rows: self.height,
            cols: self.width,
            values: self.values,
        }
    }

    pub fn norm(&self) -> T {
        norm(&self.values)
    }

    pub fn min_max(&self) -> (T, T) {
        self.values
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Converts to another scalar precision.
    pub fn cast<U: Scalar>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .map(|v| U::of(v.to_f64_lossy()))
                .collect(),
        }
    }
}

/// Element of the data space of a forward operator: blurred pixels or sinogram bins.
#[derive(Debug, Clone, PartialEq)]
pub struct DataVector<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> DataVector<T> {
    pub fn new(rows: usize, cols: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::dims(
                format!("{} values", rows * cols),
                format!("{} values", values.len()),
            ));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![T::zero(); rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn norm(&self) -> T {
        norm(&self.values)
    }

    /// Reinterprets the grid as an image (rows become height).
    pub fn into_image(self) -> Result<Image<T>> {
        Image::new(self.cols, self.rows, self.values)
    }
}

/// One image per direction of a [`crate::DirectionModel`]: the splitting variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitStack<T> {
    components: Vec<Image<T>>,
}

impl<T: Scalar> SplitStack<T> {
    pub fn new(components: Vec<Image<T>>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::param("components", "split stack must not be empty"))?;
        for c in &components[1..] {
            first.ensure_same_dims(c)?;
        }
        Ok(Self { components })
    }

    /// `s` copies of the same image.
    pub fn broadcast(image: &Image<T>, s: usize) -> Self {
        assert!(s > 0, "split stack needs at least one component");
        Self {
            components: vec![image.clone(); s],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.components.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.components[0].dims()
    }

    #[inline]
    pub fn components(&self) -> &[Image<T>] {
        &self.components
    }

    #[inline]
    pub fn component(&self, s: usize) -> &Image<T> {
        &self.components[s]
    }

    pub fn components_mut(&mut self) -> &mut [Image<T>] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<Image<T>> {
        self.components
    }

    /// Pixelwise mean of the components.
    pub fn mean_image(&self) -> Image<T> {
        let (w, h) = self.dims();
        let inv = T::one() / T::of_usize(self.len());
        let mut out = Image::zeros(w, h);
        for c in &self.components {
            for (o, &v) in out.values_mut().iter_mut().zip(c.values()) {
                *o += v;
            }
        }
        for o in out.values_mut() {
            *o *= inv;
        }
        out
    }

    /// Euclidean norm over all components.
    pub fn norm(&self) -> T {
        self.components
            .iter()
            .map(|c| dot(c.values(), c.values()))
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub(crate) fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `‖a − b‖₂`
#[inline]
pub(crate) fn distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// `‖a − b‖₂²`
#[inline]
pub(crate) fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

/// Relative change `‖a − b‖ / (‖a‖ + ‖b‖)`, zero when both vanish.
pub(crate) fn relative_change<T: Scalar>(a: &[T], b: &[T]) -> T {
    let denom = norm(a) + norm(b);
    if denom == T::zero() {
        T::zero()
    } else {
        distance(a, b) / denom
    }
}
