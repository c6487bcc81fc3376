//! Discrete calculus on the circle `R / 2 pi Z` sampled at `N` uniform nodes.

mod interp;
mod spectral;

pub use interp::{interpolate, InterpMethod, MonotoneCubic, PeriodicCubic, TrigInterpolant};

use std::fmt;
use std::sync::Arc;

use crate::error::{FlowError, Result};
use crate::mat3::{Mat3, SymMat3, Vec3};
use crate::scalar::Real;
use spectral::FftPair;

/// How derivatives are taken on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffScheme {
    /// Fourier differentiation, exact for trigonometric polynomials of degree < N/2.
    #[default]
    Spectral,
    /// Fourth-order centered finite differences.
    Fd4,
}

impl std::str::FromStr for DiffScheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "spectral" => Ok(DiffScheme::Spectral),
            "fd4" => Ok(DiffScheme::Fd4),
            other => Err(format!("unknown scheme `{other}` (expected spectral or fd4)")),
        }
    }
}

impl fmt::Display for DiffScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiffScheme::Spectral => "spectral",
            DiffScheme::Fd4 => "fd4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// Uniform periodic grid together with its differentiation scheme.
#[derive(Clone)]
pub struct CircleGrid<T: Real> {
    n: usize,
    h: T,
    scheme: DiffScheme,
    dealias: bool,
    filter_order: u32,
    fft: Arc<FftPair<T>>,
}

impl<T: Real> fmt::Debug for CircleGrid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleGrid")
            .field("n", &self.n)
            .field("scheme", &self.scheme)
            .field("dealias", &self.dealias)
            .field("filter_order", &self.filter_order)
            .finish()
    }
}

impl<T: Real> PartialEq for CircleGrid<T> {
    fn eq(&self, o: &Self) -> bool {
        self.n == o.n && self.scheme == o.scheme && self.dealias == o.dealias && self.filter_order == o.filter_order
    }
}

impl<T: Real> CircleGrid<T> {
    /// Spectral grid with `n` nodes; `n` must be even and at least 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(FlowError::InvalidGrid(format!("N = {n} must be even and >= 8")));
        }
        Ok(CircleGrid {
            n,
            h: T::two_pi() / T::from_usize_lossy(n),
            scheme: DiffScheme::Spectral,
            dealias: false,
            filter_order: 0,
            fft: Arc::new(FftPair::new(n)),
        })
    }

    pub fn with_scheme(mut self, scheme: DiffScheme) -> Self {
        self.scheme = scheme;
        self
    }

    /// Zero the top third of the spectrum in spectral derivatives.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    /// Order `p` of the exponential filter `exp(-36 (|k| / (N/2))^p)` that
    /// [`Field::filtered`] applies on spectral grids; 0 turns it off.
    pub fn with_filter(mut self, order: u32) -> Self {
        self.filter_order = order;
        self
    }

    /// Grid with the same scheme settings but a different node count.
    pub fn resized(&self, n: usize) -> Result<Self> {
        Ok(Self::new(n)?.with_scheme(self.scheme).with_dealias(self.dealias).with_filter(self.filter_order))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn scheme(&self) -> DiffScheme {
        self.scheme
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn filter_order(&self) -> u32 {
        self.filter_order
    }

    pub fn node(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(|k| self.node(k))
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(FlowError::GridMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// Derivative of one real series.
    pub fn deriv_series(&self, f: &[T], order: Order) -> Vec<T> {
        match self.scheme {
            DiffScheme::Spectral => self.fft.deriv_pair(f, None, order, self.dealias).0,
            DiffScheme::Fd4 => spectral::fd4(f, self.h, order),
        }
    }

    fn deriv_two(&self, a: &[T], b: &[T], order: Order) -> (Vec<T>, Vec<T>) {
        match self.scheme {
            DiffScheme::Spectral => {
                let (da, db) = self.fft.deriv_pair(a, Some(b), order, self.dealias);
                (da, db.expect("paired output"))
            }
            DiffScheme::Fd4 => (spectral::fd4(a, self.h, order), spectral::fd4(b, self.h, order)),
        }
    }

    /// Unnormalized forward DFT of a real series.
    pub(crate) fn dft(&self, f: &[T]) -> Vec<rustfft::num_complex::Complex<T>> {
        self.fft.forward(f)
    }

    /// Periodic part of the antiderivative, `F(x) = mean * x + P(x)`, `P(0) = 0`.
    pub(crate) fn antiderivative_periodic(&self, f: &[T]) -> (T, Vec<T>) {
        self.fft.antiderivative(f)
    }
}

/// Element types that can live on a grid: a fixed number of real components.
pub trait Components<T>: Copy {
    const LEN: usize;
    fn component(&self, i: usize) -> T;
    fn from_components(f: impl FnMut(usize) -> T) -> Self;
    fn all_finite(&self) -> bool;
}

impl<T: Real> Components<T> for T {
    const LEN: usize = 1;
    fn component(&self, _: usize) -> T {
        *self
    }
    fn from_components(mut f: impl FnMut(usize) -> T) -> Self {
        f(0)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl<T: Real> Components<T> for Mat3<T> {
    const LEN: usize = 9;
    fn component(&self, i: usize) -> T {
        self.m[i / 3][i % 3]
    }
    fn from_components(mut f: impl FnMut(usize) -> T) -> Self {
        Mat3 { m: std::array::from_fn(|r| std::array::from_fn(|c| f(3 * r + c))) }
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl<T: Real> Components<T> for SymMat3<T> {
    const LEN: usize = 6;
    fn component(&self, i: usize) -> T {
        self.to_array()[i]
    }
    fn from_components(f: impl FnMut(usize) -> T) -> Self {
        SymMat3::from_array(std::array::from_fn(f))
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl<T: Real> Components<T> for Vec3<T> {
    const LEN: usize = 3;
    fn component(&self, i: usize) -> T {
        self.0[i]
    }
    fn from_components(f: impl FnMut(usize) -> T) -> Self {
        Vec3(std::array::from_fn(f))
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// Samples of a grid function. The sample count always equals the grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T: Real, E> {
    grid: CircleGrid<T>,
    samples: Vec<E>,
}

pub type ScalarField<T> = Field<T, T>;
pub type Mat3Field<T> = Field<T, Mat3<T>>;
pub type SymField<T> = Field<T, SymMat3<T>>;
pub type Vec3Field<T> = Field<T, Vec3<T>>;

impl<T: Real, E: Components<T>> Field<T, E> {
    pub fn new(grid: CircleGrid<T>, samples: Vec<E>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(FlowError::GridMismatch { expected: grid.len(), found: samples.len() });
        }
        if let Some(k) = samples.iter().position(|s| !s.all_finite()) {
            return Err(FlowError::ConstraintViolated(format!("non-finite sample at node {k}")));
        }
        Ok(Field { grid, samples })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &CircleGrid<T>, f: impl Fn(T) -> E) -> Self {
        let samples = grid.nodes().map(f).collect();
        Field { grid: grid.clone(), samples }
    }

    pub fn constant(grid: &CircleGrid<T>, value: E) -> Self {
        Field { grid: grid.clone(), samples: vec![value; grid.len()] }
    }

    pub(crate) fn from_vec_unchecked(grid: &CircleGrid<T>, samples: Vec<E>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Field { grid: grid.clone(), samples }
    }

    pub fn grid(&self) -> &CircleGrid<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[E] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<E> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|s| s.all_finite())
    }

    pub fn map<F: Components<T>>(&self, f: impl Fn(&E) -> F) -> Field<T, F> {
        Field { grid: self.grid.clone(), samples: self.samples.iter().map(f).collect() }
    }

    pub fn try_map<F: Components<T>>(&self, f: impl Fn(&E) -> Result<F>) -> Result<Field<T, F>> {
        let samples = self.samples.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Field { grid: self.grid.clone(), samples })
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_map<F: Components<T>, G: Components<T>>(
        &self,
        other: &Field<T, F>,
        f: impl Fn(&E, &F) -> G,
    ) -> Result<Field<T, G>> {
        self.grid.check_same(&other.grid)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| f(a, b)).collect();
        Ok(Field { grid: self.grid.clone(), samples })
    }

    /// Series of one component across the grid.
    pub fn component_series(&self, c: usize) -> Vec<T> {
        self.samples.iter().map(|s| s.component(c)).collect()
    }

    fn from_component_series(grid: &CircleGrid<T>, series: &[Vec<T>]) -> Self {
        let samples = (0..grid.len()).map(|k| E::from_components(|c| series[c][k])).collect();
        Field { grid: grid.clone(), samples }
    }

    /// Componentwise derivative with respect to the grid coordinate.
    pub fn deriv(&self, order: Order) -> Self {
        let series: Vec<Vec<T>> = (0..E::LEN).map(|c| self.component_series(c)).collect();
        let mut out: Vec<Vec<T>> = Vec::with_capacity(E::LEN);
        let mut c = 0;
        while c < E::LEN {
            if c + 1 < E::LEN {
                let (a, b) = self.grid.deriv_two(&series[c], &series[c + 1], order);
                out.push(a);
                out.push(b);
                c += 2;
            } else {
                out.push(self.grid.deriv_series(&series[c], order));
                c += 1;
            }
        }
        Self::from_component_series(&self.grid, &out)
    }

    /// The field with the grid's exponential filter applied; unchanged when
    /// the filter is off or the scheme is not spectral.
    pub fn filtered(&self) -> Self {
        let order = self.grid.filter_order;
        if order == 0 || self.grid.scheme != DiffScheme::Spectral {
            return self.clone();
        }
        let series: Vec<Vec<T>> = (0..E::LEN).map(|c| self.component_series(c)).collect();
        let mut out: Vec<Vec<T>> = Vec::with_capacity(E::LEN);
        for pair in series.chunks(2) {
            let (a, b) = self.grid.fft.filter_pair(&pair[0], pair.get(1).map(|v| v.as_slice()), order);
            out.push(a);
            out.extend(b);
        }
        Self::from_component_series(&self.grid, &out)
    }

    /// Max over nodes and components of `|f|`.
    pub fn sup_norm(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, s| {
            (0..E::LEN).fold(acc, |a, c| a.max(s.component(c).abs()))
        })
    }

    /// Max over nodes and components of `|self - other|`.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        self.grid.check_same(&other.grid)?;
        Ok(self.samples.iter().zip(&other.samples).fold(T::zero(), |acc, (a, b)| {
            (0..E::LEN).fold(acc, |m, c| m.max((a.component(c) - b.component(c)).abs()))
        }))
    }

    /// Rectangle-rule integral of every component.
    pub fn integrate_components(&self) -> E {
        let h = self.grid.spacing();
        E::from_components(|c| self.samples.iter().fold(T::zero(), |a, s| a + s.component(c)) * h)
    }
}

impl<T: Real> ScalarField<T> {
    pub fn integrate(&self) -> T {
        integrate(self)
    }

    pub fn min(&self) -> T {
        self.samples.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.samples.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// `h * sum(f_k)`: spectrally accurate for smooth periodic integrands.
pub fn integrate<T: Real>(f: &ScalarField<T>) -> T {
    f.samples.iter().fold(T::zero(), |a, &x| a + x) * f.grid.spacing()
}

/// Componentwise derivative of a field, `order` 1 or 2.
pub fn deriv<T: Real, E: Components<T>>(f: &Field<T, E>, order: Order) -> Field<T, E> {
    f.deriv(order)
}
