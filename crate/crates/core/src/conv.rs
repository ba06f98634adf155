//! Convolution lowering: kernel reshapes, tile unfolding and factored
//! convolution.
//!
//! A kernel `[C_out, C_in, K_h, K_w]` can be flattened into a matrix in four
//! ways. Whichever is factored, `V` runs as a convolution over the input,
//! `diag(S)` as a per-channel scale and `U` as a second convolution, with the
//! spatial extent of the original kernel split between the two.

use alloc::vec;
use alloc::vec::Vec;

use crate::cost::CostReport;
use crate::decompose::{tsvd_decompose, DecomposeConfig};
use crate::dense::DenseMatrix;
use crate::error::{Result, TsvdError};
use crate::factorization::TsvdFactorization;

/// Matrix layout of a convolution kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormType {
    /// `[C_out, C_in K_h K_w]`: `V` carries the full window, `U` is 1x1.
    InputWindow,
    /// `[C_out K_h K_w, C_in]`: `V` is 1x1, `U` carries the full window.
    OutputWindow,
    /// `[C_out K_h, C_in K_w]`: `V` spans the width, `U` the height.
    RowsOut,
    /// `[C_out K_w, C_in K_h]`: `V` spans the height, `U` the width.
    ColsOut,
}

impl FormType {
    pub const ALL: [FormType; 4] = [
        Self::InputWindow,
        Self::OutputWindow,
        Self::RowsOut,
        Self::ColsOut,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }

    /// Matrix shape for a kernel with `c_in` input channels per group.
    pub fn matrix_shape(self, c_out: usize, c_in: usize, k_h: usize, k_w: usize) -> (usize, usize) {
        match self {
            Self::InputWindow => (c_out, c_in * k_h * k_w),
            Self::OutputWindow => (c_out * k_h * k_w, c_in),
            Self::RowsOut => (c_out * k_h, c_in * k_w),
            Self::ColsOut => (c_out * k_w, c_in * k_h),
        }
    }

    /// Matrix position of kernel element `[o, i, a, b]`.
    fn position(
        self,
        o: usize,
        i: usize,
        a: usize,
        b: usize,
        k_h: usize,
        k_w: usize,
    ) -> (usize, usize) {
        match self {
            Self::InputWindow => (o, (i * k_h + a) * k_w + b),
            Self::OutputWindow => ((o * k_h + a) * k_w + b, i),
            Self::RowsOut => (o * k_h + a, i * k_w + b),
            Self::ColsOut => (o * k_w + b, i * k_h + a),
        }
    }
}

/// Per-axis `(height, width)` pair.
pub type Pair = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub c_out: usize,
    pub c_in: usize,
    pub kernel: Pair,
    pub stride: Pair,
    pub dilation: Pair,
    pub padding: Pair,
    pub groups: usize,
}

impl ConvSpec {
    /// Stride 1, no dilation or padding, one group.
    pub fn new(c_out: usize, c_in: usize, kernel: Pair) -> Self {
        Self {
            c_out,
            c_in,
            kernel,
            stride: (1, 1),
            dilation: (1, 1),
            padding: (0, 0),
            groups: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.c_out,
            self.c_in,
            self.kernel.0,
            self.kernel.1,
            self.stride.0,
            self.stride.1,
            self.dilation.0,
            self.dilation.1,
            self.groups,
        ];
        if positive.contains(&0) {
            return Err(TsvdError::UnsupportedGeometry(
                "sizes, strides, dilations and groups must be >= 1",
            ));
        }
        if !self.c_in.is_multiple_of(self.groups) || !self.c_out.is_multiple_of(self.groups) {
            return Err(TsvdError::UnsupportedGeometry(
                "channels must divide evenly into groups",
            ));
        }
        Ok(())
    }

    pub fn in_per_group(&self) -> usize {
        self.c_in / self.groups
    }

    pub fn out_per_group(&self) -> usize {
        self.c_out / self.groups
    }

    /// Output spatial size for an input of `height x width`.
    pub fn output_size(&self, height: usize, width: usize) -> Result<Pair> {
        let geom = Geometry {
            stride: self.stride,
            dilation: self.dilation,
            padding: self.padding,
        };
        geom.output_size(height, width, self.kernel)
    }

    fn geometry(&self) -> Geometry {
        Geometry {
            stride: self.stride,
            dilation: self.dilation,
            padding: self.padding,
        }
    }
}

/// Convolution weights `[c_out, c_in, k_h, k_w]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel4<T = f64> {
    pub c_out: usize,
    pub c_in: usize,
    pub k_h: usize,
    pub k_w: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Kernel4<T> {
    pub fn new(c_out: usize, c_in: usize, k_h: usize, k_w: usize, data: Vec<T>) -> Result<Self> {
        let expected = c_out * c_in * k_h * k_w;
        if data.len() != expected {
            return Err(TsvdError::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            c_out,
            c_in,
            k_h,
            k_w,
            data,
        })
    }

    #[inline]
    pub fn get(&self, o: usize, i: usize, a: usize, b: usize) -> T {
        self.data[((o * self.c_in + i) * self.k_h + a) * self.k_w + b]
    }

    /// Output channels `range` as a new kernel.
    fn out_slice(&self, start: usize, count: usize) -> Self {
        let per = self.c_in * self.k_h * self.k_w;
        Self {
            c_out: count,
            c_in: self.c_in,
            k_h: self.k_h,
            k_w: self.k_w,
            data: self.data[start * per..(start + count) * per].to_vec(),
        }
    }
}

/// Feature map `[channels, height, width]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(TsvdError::DimensionMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    fn channel_slice(&self, start: usize, count: usize) -> Self {
        let per = self.height * self.width;
        Self {
            channels: count,
            height: self.height,
            width: self.width,
            data: self.data[start * per..(start + count) * per].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Geometry {
    stride: Pair,
    dilation: Pair,
    padding: Pair,
}

impl Geometry {
    const UNIT: Self = Self {
        stride: (1, 1),
        dilation: (1, 1),
        padding: (0, 0),
    };

    fn output_size(&self, height: usize, width: usize, kernel: Pair) -> Result<Pair> {
        let axis = |len: usize, pad: usize, dil: usize, k: usize, stride: usize| {
            let span = dil * (k - 1) + 1;
            let padded = len + 2 * pad;
            if padded < span {
                None
            } else {
                Some((padded - span) / stride + 1)
            }
        };
        match (
            axis(
                height,
                self.padding.0,
                self.dilation.0,
                kernel.0,
                self.stride.0,
            ),
            axis(
                width,
                self.padding.1,
                self.dilation.1,
                kernel.1,
                self.stride.1,
            ),
        ) {
            (Some(h), Some(w)) => Ok((h, w)),
            _ => Err(TsvdError::UnsupportedGeometry(
                "kernel window exceeds the padded input",
            )),
        }
    }
}

/// Single-group cross-correlation with a per-tap accumulate rule.
fn correlate<T: Copy>(
    input: &Tensor3,
    kernel: &Kernel4<T>,
    geom: Geometry,
    tap: impl Fn(f64, T, f64) -> f64,
) -> Result<Tensor3> {
    if input.channels != kernel.c_in {
        return Err(TsvdError::DimensionMismatch {
            expected: kernel.c_in,
            found: input.channels,
        });
    }
    let (oh, ow) = geom.output_size(input.height, input.width, (kernel.k_h, kernel.k_w))?;
    let mut out = Tensor3::zeros(kernel.c_out, oh, ow);
    let (ph, pw) = geom.padding;
    for o in 0..kernel.c_out {
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = 0.0;
                for i in 0..kernel.c_in {
                    for a in 0..kernel.k_h {
                        let iy = (y * geom.stride.0 + a * geom.dilation.0) as isize - ph as isize;
                        if iy < 0 || iy >= input.height as isize {
                            continue;
                        }
                        for b in 0..kernel.k_w {
                            let ix =
                                (x * geom.stride.1 + b * geom.dilation.1) as isize - pw as isize;
                            if ix < 0 || ix >= input.width as isize {
                                continue;
                            }
                            acc = tap(
                                acc,
                                kernel.get(o, i, a, b),
                                input.get(i, iy as usize, ix as usize),
                            );
                        }
                    }
                }
                out.data[(o * oh + y) * ow + x] = acc;
            }
        }
    }
    Ok(out)
}

fn ternary_tap(acc: f64, t: i8, x: f64) -> f64 {
    match t {
        1 => acc + x,
        -1 => acc - x,
        _ => acc,
    }
}

fn check_kernel(spec: &ConvSpec, kernel: &Kernel4) -> Result<()> {
    spec.validate()?;
    let expected = (
        spec.c_out,
        spec.in_per_group(),
        spec.kernel.0,
        spec.kernel.1,
    );
    let found = (kernel.c_out, kernel.c_in, kernel.k_h, kernel.k_w);
    if expected != found {
        return Err(TsvdError::UnsupportedGeometry(
            "kernel dimensions do not match the convolution spec",
        ));
    }
    Ok(())
}

/// Direct (grouped) convolution, the reference for factored execution.
pub fn conv2d(spec: &ConvSpec, kernel: &Kernel4, input: &Tensor3) -> Result<Tensor3> {
    check_kernel(spec, kernel)?;
    if input.channels != spec.c_in {
        return Err(TsvdError::DimensionMismatch {
            expected: spec.c_in,
            found: input.channels,
        });
    }
    let (gi, go) = (spec.in_per_group(), spec.out_per_group());
    let parts = (0..spec.groups)
        .map(|g| {
            correlate(
                &input.channel_slice(g * gi, gi),
                &kernel.out_slice(g * go, go),
                spec.geometry(),
                |acc, w, x| acc + w * x,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(concat_channels(parts))
}

fn concat_channels(parts: Vec<Tensor3>) -> Tensor3 {
    let (height, width) = (parts[0].height, parts[0].width);
    let channels = parts.iter().map(|p| p.channels).sum();
    let mut data = Vec::with_capacity(channels * height * width);
    for p in parts {
        data.extend(p.data);
    }
    Tensor3 {
        channels,
        height,
        width,
        data,
    }
}

/// Flattens a single-group kernel into the matrix layout of `form`.
pub fn reshape_kernel(kernel: &Kernel4, form: FormType) -> DenseMatrix {
    let (rows, cols) = form.matrix_shape(kernel.c_out, kernel.c_in, kernel.k_h, kernel.k_w);
    let mut data = vec![0.0; rows * cols];
    for o in 0..kernel.c_out {
        for i in 0..kernel.c_in {
            for a in 0..kernel.k_h {
                for b in 0..kernel.k_w {
                    let (r, c) = form.position(o, i, a, b, kernel.k_h, kernel.k_w);
                    data[r * cols + c] = kernel.get(o, i, a, b);
                }
            }
        }
    }
    DenseMatrix::from_trusted(rows, cols, data)
}

/// Inverse of [`reshape_kernel`].
pub fn restore_kernel(
    matrix: &DenseMatrix,
    form: FormType,
    c_out: usize,
    c_in: usize,
    k_h: usize,
    k_w: usize,
) -> Result<Kernel4> {
    let shape = form.matrix_shape(c_out, c_in, k_h, k_w);
    if matrix.shape() != shape {
        return Err(TsvdError::ShapeMismatch {
            expected: shape,
            found: matrix.shape(),
        });
    }
    let mut data = vec![0.0; c_out * c_in * k_h * k_w];
    for o in 0..c_out {
        for i in 0..c_in {
            for a in 0..k_h {
                for b in 0..k_w {
                    let (r, c) = form.position(o, i, a, b, k_h, k_w);
                    data[((o * c_in + i) * k_h + a) * k_w + b] = matrix.get(r, c);
                }
            }
        }
    }
    Kernel4::new(c_out, c_in, k_h, k_w, data)
}

/// Output tile size for [`unfold_tile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileSpec {
    pub height: usize,
    pub width: usize,
}

impl TileSpec {
    pub const fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    /// Input patch covering the receptive field of the tile.
    pub fn patch_size(&self, spec: &ConvSpec) -> Pair {
        (
            (self.height - 1) * spec.stride.0 + spec.dilation.0 * (spec.kernel.0 - 1) + 1,
            (self.width - 1) * spec.stride.1 + spec.dilation.1 * (spec.kernel.1 - 1) + 1,
        )
    }
}

impl Default for TileSpec {
    fn default() -> Self {
        Self::new(1, 1)
    }
}

/// Matrix mapping a flattened input patch `[C_in, P_h, P_w]` to the flattened
/// output tile `[C_out, T_h, T_w]`, with its fraction of structural nonzeros
/// (kernel taps, whatever their value).
pub fn unfold_tile(
    spec: &ConvSpec,
    kernel: &Kernel4,
    tile: TileSpec,
) -> Result<(DenseMatrix, f64)> {
    check_kernel(spec, kernel)?;
    if spec.groups != 1 {
        return Err(TsvdError::UnsupportedGeometry(
            "tile unfolding needs a single group",
        ));
    }
    if tile.height == 0 || tile.width == 0 {
        return Err(TsvdError::UnsupportedGeometry(
            "tile must cover at least one output",
        ));
    }
    let (p_h, p_w) = tile.patch_size(spec);
    let rows = spec.c_out * tile.height * tile.width;
    let cols = spec.c_in * p_h * p_w;
    let mut data = vec![0.0; rows * cols];
    for o in 0..spec.c_out {
        for ty in 0..tile.height {
            for tx in 0..tile.width {
                let r = (o * tile.height + ty) * tile.width + tx;
                for i in 0..spec.c_in {
                    for a in 0..spec.kernel.0 {
                        let py = ty * spec.stride.0 + a * spec.dilation.0;
                        for b in 0..spec.kernel.1 {
                            let px = tx * spec.stride.1 + b * spec.dilation.1;
                            let c = (i * p_h + py) * p_w + px;
                            data[r * cols + c] = kernel.get(o, i, a, b);
                        }
                    }
                }
            }
        }
    }
    let taps = rows * spec.c_in * spec.kernel.0 * spec.kernel.1;
    Ok((
        DenseMatrix::from_trusted(rows, cols, data),
        taps as f64 / (rows * cols) as f64,
    ))
}

/// TSVD of every group of a convolution kernel in one form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFactorization {
    pub spec: ConvSpec,
    pub form: FormType,
    pub groups: Vec<TsvdFactorization>,
}

impl ConvFactorization {
    /// Wraps per-group factorizations, checking their shapes against `spec`.
    pub fn new(spec: ConvSpec, form: FormType, groups: Vec<TsvdFactorization>) -> Result<Self> {
        spec.validate()?;
        if groups.len() != spec.groups {
            return Err(TsvdError::DimensionMismatch {
                expected: spec.groups,
                found: groups.len(),
            });
        }
        let shape = form.matrix_shape(
            spec.out_per_group(),
            spec.in_per_group(),
            spec.kernel.0,
            spec.kernel.1,
        );
        for f in &groups {
            if f.shape() != shape {
                return Err(TsvdError::ShapeMismatch {
                    expected: shape,
                    found: f.shape(),
                });
            }
        }
        Ok(Self { spec, form, groups })
    }

    /// Total rank over groups.
    pub fn rank(&self) -> usize {
        self.groups.iter().map(TsvdFactorization::rank).sum()
    }

    pub fn sparsity(&self) -> f64 {
        let nnz: usize = self.groups.iter().map(TsvdFactorization::nnz).sum();
        let slots: usize = self
            .groups
            .iter()
            .map(|f| f.rank() * (f.shape().0 + f.shape().1))
            .sum();
        if slots == 0 {
            0.0
        } else {
            nnz as f64 / slots as f64
        }
    }

    /// Per-output-position cost summed over groups, against the dense kernel.
    pub fn cost(&self, bit_width: u32) -> CostReport {
        let adds: usize = self.groups.iter().map(TsvdFactorization::nnz).sum();
        let (m, n) = self.form.matrix_shape(
            self.spec.out_per_group(),
            self.spec.in_per_group(),
            self.spec.kernel.0,
            self.spec.kernel.1,
        );
        // Groups are equal-sized blocks of one block-diagonal matrix.
        CostReport::from_counts(
            adds as f64,
            self.rank() as f64,
            m * self.spec.groups,
            n,
            bit_width,
            self.sparsity(),
            self.rank(),
        )
    }

    pub fn reconstruct_kernel(&self) -> Result<Kernel4> {
        let (go, gi) = (self.spec.out_per_group(), self.spec.in_per_group());
        let (k_h, k_w) = self.spec.kernel;
        let mut data = Vec::with_capacity(self.spec.c_out * gi * k_h * k_w);
        for f in &self.groups {
            data.extend(restore_kernel(&f.reconstruct(), self.form, go, gi, k_h, k_w)?.data);
        }
        Kernel4::new(self.spec.c_out, gi, k_h, k_w, data)
    }

    /// Runs the `V` convolution, the channel scale and the `U` convolution.
    pub fn apply(&self, input: &Tensor3) -> Result<Tensor3> {
        if input.channels != self.spec.c_in {
            return Err(TsvdError::DimensionMismatch {
                expected: self.spec.c_in,
                found: input.channels,
            });
        }
        self.spec.output_size(input.height, input.width)?;
        let gi = self.spec.in_per_group();
        let parts = self
            .groups
            .iter()
            .enumerate()
            .map(|(g, f)| self.apply_group(f, &input.channel_slice(g * gi, gi)))
            .collect::<Result<Vec<_>>>()?;
        Ok(concat_channels(parts))
    }

    fn apply_group(&self, f: &TsvdFactorization, input: &Tensor3) -> Result<Tensor3> {
        let (c_out, c_in) = (self.spec.out_per_group(), self.spec.in_per_group());
        let (k_h, k_w) = self.spec.kernel;
        let rank = f.rank();
        let full = self.spec.geometry();
        let (u, v) = (f.u(), f.v());
        let (v_kernel, v_geom, u_kernel, u_geom) = match self.form {
            FormType::InputWindow => (
                build(rank, c_in, k_h, k_w, |k, i, a, b| {
                    v.get(k, (i * k_h + a) * k_w + b)
                }),
                full,
                build(c_out, rank, 1, 1, |o, k, _, _| u.get(o, k)),
                Geometry::UNIT,
            ),
            FormType::OutputWindow => (
                build(rank, c_in, 1, 1, |k, i, _, _| v.get(k, i)),
                Geometry::UNIT,
                build(c_out, rank, k_h, k_w, |o, k, a, b| {
                    u.get((o * k_h + a) * k_w + b, k)
                }),
                full,
            ),
            FormType::RowsOut => (
                build(rank, c_in, 1, k_w, |k, i, _, b| v.get(k, i * k_w + b)),
                Geometry {
                    stride: (1, full.stride.1),
                    dilation: (1, full.dilation.1),
                    padding: full.padding,
                },
                build(c_out, rank, k_h, 1, |o, k, a, _| u.get(o * k_h + a, k)),
                Geometry {
                    stride: (full.stride.0, 1),
                    dilation: (full.dilation.0, 1),
                    padding: (0, 0),
                },
            ),
            FormType::ColsOut => (
                build(rank, c_in, k_h, 1, |k, i, a, _| v.get(k, i * k_h + a)),
                Geometry {
                    stride: (full.stride.0, 1),
                    dilation: (full.dilation.0, 1),
                    padding: full.padding,
                },
                build(c_out, rank, 1, k_w, |o, k, _, b| u.get(o * k_w + b, k)),
                Geometry {
                    stride: (1, full.stride.1),
                    dilation: (1, full.dilation.1),
                    padding: (0, 0),
                },
            ),
        };
        if rank == 0 {
            let (oh, ow) = self.spec.output_size(input.height, input.width)?;
            return Ok(Tensor3::zeros(c_out, oh, ow));
        }
        let mut hidden = correlate(input, &v_kernel, v_geom, ternary_tap)?;
        let plane = hidden.height * hidden.width;
        for (k, s) in f.s().iter().enumerate() {
            hidden.data[k * plane..(k + 1) * plane]
                .iter_mut()
                .for_each(|h| *h *= s);
        }
        correlate(&hidden, &u_kernel, u_geom, ternary_tap)
    }
}

fn build(
    c_out: usize,
    c_in: usize,
    k_h: usize,
    k_w: usize,
    f: impl Fn(usize, usize, usize, usize) -> i8,
) -> Kernel4<i8> {
    let mut data = Vec::with_capacity(c_out * c_in * k_h * k_w);
    for o in 0..c_out {
        for i in 0..c_in {
            for a in 0..k_h {
                for b in 0..k_w {
                    data.push(f(o, i, a, b));
                }
            }
        }
    }
    Kernel4 {
        c_out,
        c_in,
        k_h,
        k_w,
        data,
    }
}

/// Kernel of group `g` as a single-group kernel.
pub fn group_kernel(spec: &ConvSpec, kernel: &Kernel4, g: usize) -> Kernel4 {
    let go = spec.out_per_group();
    kernel.out_slice(g * go, go)
}

/// Decomposes every group of `kernel` in the given form.
pub fn factor_kernel(
    spec: &ConvSpec,
    kernel: &Kernel4,
    form: FormType,
    cfg: &DecomposeConfig,
) -> Result<ConvFactorization> {
    check_kernel(spec, kernel)?;
    let groups = (0..spec.groups)
        .map(|g| {
            let m = reshape_kernel(&group_kernel(spec, kernel, g), form);
            if m.is_zero() {
                let (rows, cols) = m.shape();
                return Ok(
                    TsvdFactorization::empty(rows, cols, cfg.theta.theta()).with_form(Some(form))
                );
            }
            Ok(tsvd_decompose(&m, cfg)?.factorization.with_form(Some(form)))
        })
        .collect::<Result<Vec<_>>>()?;
    ConvFactorization::new(*spec, form, groups)
}

/// Factors all four forms and keeps the one with the lowest modeled
/// compression rate, earlier forms winning ties. Forms whose decomposition
/// fails are skipped; the first error is returned only if all fail.
pub fn select_form(
    spec: &ConvSpec,
    kernel: &Kernel4,
    cfg: &DecomposeConfig,
) -> Result<ConvFactorization> {
    let candidates = FormType::ALL.map(|form| factor_kernel(spec, kernel, form, cfg));
    pick_best(candidates, cfg.bit_width)
}

/// Lowest-rate candidate, earlier entries winning ties.
pub fn pick_best(
    candidates: impl IntoIterator<Item = Result<ConvFactorization>>,
    bit_width: u32,
) -> Result<ConvFactorization> {
    let mut best: Option<(f64, ConvFactorization)> = None;
    let mut first_err = None;
    for c in candidates {
        match c {
            Ok(f) => {
                let rate = f.cost(bit_width).compression_rate;
                if best.as_ref().is_none_or(|(r, _)| rate < *r) {
                    best = Some((rate, f));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (best, first_err) {
        (Some((_, f)), _) => Ok(f),
        (None, Some(e)) => Err(e),
        (None, None) => Err(TsvdError::InvalidConfig("no candidate forms")),
    }
}
