#include "rim/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

namespace rim::fft {
namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // Planning needs scratch arrays; execution later uses the new-array
    // interface, so the plan must not assume alignment.
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<const cdouble> in, std::span<cdouble> out, int sign) {
  const std::size_t n = in.size();
  if (out.size() != n) throw std::invalid_argument("fft: size mismatch");
  if (n == 0) return;
  fftw_plan plan = cache().get(n, sign);
  // fftw_execute_dft takes a non-const input; transform out of place from a
  // private copy so the caller's buffer is untouched even when aliased.
  std::vector<cdouble> scratch(in.begin(), in.end());
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

}  // namespace

void forward(std::span<const cdouble> in, std::span<cdouble> out) {
  execute(in, out, FFTW_FORWARD);
}

void backward(std::span<const cdouble> in, std::span<cdouble> out) {
  execute(in, out, FFTW_BACKWARD);
}

std::vector<cdouble> forward(std::span<const cdouble> in) {
  std::vector<cdouble> out(in.size());
  forward(in, out);
  return out;
}

std::vector<cdouble> forward(std::span<const double> in) {
  std::vector<cdouble> tmp(in.begin(), in.end());
  std::vector<cdouble> out(in.size());
  forward(tmp, out);
  return out;
}

std::vector<cdouble> backward(std::span<const cdouble> in) {
  std::vector<cdouble> out(in.size());
  backward(in, out);
  return out;
}

}  // namespace rim::fft
