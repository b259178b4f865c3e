#pragma once

#include <complex>
#include <span>
#include <vector>

namespace grushin::fft {

using cplx = std::complex<double>;

/// Unnormalized in-place DFT of length data.size(): X_k = sum_j x_j e^{-2 pi i jk/N}.
void forward(std::span<cplx> data);
/// Unnormalized inverse: x_j = sum_k X_k e^{+2 pi i jk/N}.
void backward(std::span<cplx> data);

/// `howmany` contiguous transforms of length n stored back to back.
void forward_batch(std::span<cplx> data, int n, int howmany);
void backward_batch(std::span<cplx> data, int n, int howmany);

}  // namespace grushin::fft
