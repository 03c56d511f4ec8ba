#pragma once

// Data-parallel inner loops shared by the network and the trainer.
//
// Every kernel has a scalar reference implementation; an AVX2+FMA variant
// is selected at runtime when the CPU supports it. Both variants are kept
// callable so the test suite can check them against each other. Results
// differ only by floating-point reassociation; a given variant is
// deterministic.

#include <cstddef>
#include <string_view>

namespace tactile::simd {

enum class Isa { scalar, avx2 };

struct AdamCoefficients {
  float lr;
  float beta1;
  float beta2;
  float one_minus_beta1;  // computed in double; 1.0f - beta2 loses ~1e-5
  float one_minus_beta2;
  float eps;
  float bias_correction1;  // 1 - beta1^t
  float bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Isa isa;
  std::string_view name;
  /// sum_i a[i] * b[i]
  float (*dot)(const float* a, const float* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  /// sum_i x[i]^2
  float (*sum_squares)(const float* x, std::size_t n);
  /// One bias-corrected Adam step over a contiguous parameter block.
  void (*adam_update)(float* param, const float* grad, float* m, float* v,
                      std::size_t n, const AdamCoefficients& c);
};

const KernelTable& scalar_kernels();

/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

/// Currently dispatched table. Defaults to the widest supported ISA unless
/// the TACTILE_SIMD environment variable is set to "scalar".
const KernelTable& kernels();

/// Overrides the dispatch; returns false if the ISA is unavailable.
bool select(Isa isa);

}  // namespace tactile::simd
