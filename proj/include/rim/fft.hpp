#pragma once

#include <span>
#include <vector>

#include "rim/types.hpp"

// Thin FFTW wrapper. Plans are cached per (size, direction); execution is
// reentrant so callers may transform from several threads.
namespace rim::fft {

// X[k] = sum_n x[n] exp(-j 2 pi k n / N)
void forward(std::span<const cdouble> in, std::span<cdouble> out);
// x[n] = sum_k X[k] exp(+j 2 pi k n / N)   (unnormalized)
void backward(std::span<const cdouble> in, std::span<cdouble> out);

std::vector<cdouble> forward(std::span<const cdouble> in);
std::vector<cdouble> forward(std::span<const double> in);
// Unnormalized backward transform.
std::vector<cdouble> backward(std::span<const cdouble> in);

}  // namespace rim::fft
