#pragma once

// Dense vector kernels used by the simplex inner loops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant picked at runtime. The scalar `dot` mirrors the AVX2 lane layout
// (four partial sums, fixed reduction order), so both paths are bit-identical
// and solver results do not depend on the host ISA.

#include <cstddef>
#include <span>
#include <string_view>

namespace apxne::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

bool isa_supported(Isa isa);

/// ISA used by the dispatched entry points below.
Isa active_isa();

/// Forces an ISA (tests, benchmarking). Unsupported requests fall back to Scalar.
/// Returns the ISA actually selected.
Isa set_isa(Isa isa);

/// sum_i a[i] * b[i]; spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x; spans must have equal length.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// max_i |x[i]|, 0 for an empty span.
double max_abs(std::span<const double> x);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define APXNE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs(std::span<const double> x);
}  // namespace avx2
#endif

}  // namespace apxne::kernels
