//! Row-major pixel planes and rectangular active-area masks.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A row-major 2-D buffer of per-pixel values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlaneRepr<T>")]
pub struct Plane<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T> Plane<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!("plane has zero extent {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::Config(format!(
                "plane data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "plane must be non-empty");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
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
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        let w = self.width;
        &mut self.data[y * w + x]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn same_shape<U>(&self, other: &Plane<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Plane<U> {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Full-frame area covering every pixel of this plane.
    pub fn full_area(&self) -> ActiveArea {
        ActiveArea::full(self.width, self.height)
    }
}

#[derive(Deserialize)]
struct PlaneRepr<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T> TryFrom<PlaneRepr<T>> for Plane<T> {
    type Error = Error;

    fn try_from(r: PlaneRepr<T>) -> Result<Self> {
        Self::from_vec(r.width, r.height, r.data)
    }
}

impl<T: Clone> Plane<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "plane must be non-empty");
        Self {
            width,
            height,
            data: alloc::vec![value; width * height],
        }
    }
}

/// Half-open pixel rectangle `[x0, x1) × [y0, y1)`.
///
/// The active picture area of a frame is always the intersection of
/// per-source letterbox crops, which is itself a rectangle, so the
/// per-pixel mask is represented by its bounds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActiveArea {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl ActiveArea {
    pub const EMPTY: Self = Self { x0: 0, y0: 0, x1: 0, y1: 0 };

    pub fn full(width: usize, height: usize) -> Self {
        Self { x0: 0, y0: 0, x1: width, y1: height }
    }

    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        if x0 >= x1 || y0 >= y1 {
            Self::EMPTY
        } else {
            Self { x0, y0, x1, y1 }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.x0 >= self.x1 || self.y0 >= self.y1
    }

    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn pixel_count(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            self.width() * self.height()
        }
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self::new(
            self.x0.max(other.x0),
            self.y0.max(other.y0),
            self.x1.min(other.x1),
            self.y1.min(other.y1),
        )
    }

    /// Whether the area lies inside a `width × height` frame.
    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.is_empty() || (self.x1 <= width && self.y1 <= height)
    }

    /// Row-major iterator over `(x, y)` coordinates inside the area.
    pub fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (x0, x1) = (self.x0, self.x1);
        let rows = if self.is_empty() { 0..0 } else { self.y0..self.y1 };
        rows.flat_map(move |y| (x0..x1).map(move |x| (x, y)))
    }

    /// Row-major iterator over linear indices inside the area of a plane
    /// with the given row stride.
    pub fn indices(&self, stride: usize) -> impl Iterator<Item = usize> + '_ {
        self.coords().map(move |(x, y)| y * stride + x)
    }
}
