#include <atomic>
#include <cstdlib>
#include <string_view>

#include "farsep/error.hpp"
#include "farsep/simd/kernels.hpp"

namespace farsep::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("FARSEP_SIMD")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && supported(Isa::Avx2)) return Isa::Avx2;
  }
  return supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels(detect())};
  return slot;
}

}  // namespace

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return avx2_kernels() != nullptr && cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels(Isa isa) {
  if (!supported(isa)) {
    fail(ErrorCode::InvalidArgument, std::string("kernel set not available: ") + to_string(isa));
  }
  return isa == Isa::Avx2 ? *avx2_kernels() : scalar_kernels();
}

const KernelTable& kernels() { return *active_slot().load(std::memory_order_acquire); }

Isa active_isa() { return &kernels() == &scalar_kernels() ? Isa::Scalar : Isa::Avx2; }

void select(Isa isa) { active_slot().store(&kernels(isa), std::memory_order_release); }

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

}  // namespace farsep::simd
