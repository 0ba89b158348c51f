#pragma once

#include <complex>
#include <vector>

#include "nows/grid.hpp"

namespace nows {

using cplx = std::complex<double>;

namespace fft {

/// In-place complex DFT, unnormalized:
///   out_k = sum_n in_n * exp(sign * 2*pi*i * n*k / n).
/// sign = -1 is the forward convention. Any n >= 1 (radix-2 for powers of
/// two, Bluestein otherwise).
void cfft(cplx* a, int n, int sign);

/// Real-to-half-spectrum transform along a length-n array (unnormalized
/// forward DFT, bins 0..n/2).
void rfft(const double* x, int n, cplx* out);

/// Half-spectrum to real inverse (carries the 1/n factor). Bins beyond n/2
/// are implied by Hermitian symmetry; non-Hermitian content in the stored
/// half is interpreted symmetrically, exactly like numpy.irfft.
void irfft(const cplx* X, int n, double* out);

/// 2D versions on row-major n0 x n1 data; the half axis is the last one
/// (spectrum layout n0 x (n1/2+1)).
void rfft2(const double* x, int n0, int n1, cplx* out);
void irfft2(const cplx* X, int n0, int n1, double* out);

/// Adjoints of the four maps above with respect to the real inner product
/// (complex arrays viewed as interleaved re/im pairs). Used by the autodiff
/// tape; rfft's adjoint equals n * (inverse transform) restricted to the
/// stored half with the double-count of interior bins handled explicitly.
void rfft_adjoint(const cplx* gbar, int n, double* xbar);
void irfft_adjoint(const double* gbar, int n, cplx* Xbar);
void rfft2_adjoint(const cplx* gbar, int n0, int n1, double* xbar);
void irfft2_adjoint(const double* gbar, int n0, int n1, cplx* Xbar);

}  // namespace fft

/// Forward DFT of a real grid field, unnormalized, half-spectrum layout.
Spectrum fft_forward(const GridField& field);

/// Inverse of fft_forward (carries the 1/N factor). `shape` must match the
/// spatial shape recorded in the spectrum. Grid metadata of the result is
/// unit spacing at the origin; callers re-attach their own.
GridField fft_inverse(const Spectrum& spec, const std::array<int, 2>& shape,
                      int dims);

}  // namespace nows
