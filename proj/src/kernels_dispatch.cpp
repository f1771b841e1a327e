#include <atomic>
#include <cstdlib>

#include "apxne/kernels.hpp"

namespace apxne::kernels {
namespace {

struct Table {
  Isa isa;
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  double (*max_abs)(std::span<const double>);
};

constexpr Table kScalar{Isa::Scalar, &scalar::dot, &scalar::axpy, &scalar::max_abs};
#ifdef APXNE_HAVE_AVX2_KERNELS
constexpr Table kAvx2{Isa::Avx2, &avx2::dot, &avx2::axpy, &avx2::max_abs};
#endif

const Table* table_for(Isa isa) {
#ifdef APXNE_HAVE_AVX2_KERNELS
  if (isa == Isa::Avx2 && isa_supported(Isa::Avx2)) return &kAvx2;
#endif
  (void)isa;
  return &kScalar;
}

const Table* initial_table() {
  // APXNE_FORCE_SCALAR=1 pins the reference path.
  if (const char* env = std::getenv("APXNE_FORCE_SCALAR"); env != nullptr && env[0] == '1') {
    return &kScalar;
  }
  return table_for(Isa::Avx2);
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{initial_table()};
  return table;
}

}  // namespace

std::string_view to_string(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) {
  if (isa == Isa::Scalar) return true;
#ifdef APXNE_HAVE_AVX2_KERNELS
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed)->isa; }

Isa set_isa(Isa isa) {
  const Table* t = table_for(isa);
  current().store(t, std::memory_order_relaxed);
  return t->isa;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return current().load(std::memory_order_relaxed)->dot(a, b);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  current().load(std::memory_order_relaxed)->axpy(alpha, x, y);
}

double max_abs(std::span<const double> x) {
  return current().load(std::memory_order_relaxed)->max_abs(x);
}

}  // namespace apxne::kernels
