#pragma once

// Inner-loop kernels shared by the STFT, beamformer, loss and simulation
// code. Each kernel has a scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The active table is chosen once at first use from
// the CPU's capabilities; FARSEP_SIMD=scalar|avx2 overrides the choice.

#include <cstddef>

#include "farsep/types.hpp"

namespace farsep::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  const char* name;

  // out[i] += conj(w[i]) * y[i]
  void (*cmac_conj)(cplx* out, const cplx* w, const cplx* y, std::size_t n);
  // out[i] += a[i] * b[i]
  void (*cmac)(cplx* out, const cplx* a, const cplx* b, std::size_t n);
  // sum |a[i] - b[i]|^2
  double (*csq_dist)(const cplx* a, const cplx* b, std::size_t n);
  // sum |a[i] - b[i]|
  double (*cabs_dist)(const cplx* a, const cplx* b, std::size_t n);
  // sum |a[i]|^2
  double (*cenergy)(const cplx* a, std::size_t n);
  // out[i] = |a[i]|
  void (*cmag)(double* out, const cplx* a, std::size_t n);

  // sum a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum (a[i] - b[i])^2
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
  // sum |a[i] - b[i]|
  double (*abs_dist)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*vmul)(double* out, const double* a, const double* b, std::size_t n);
  // out[i] += a[i] * b[i]
  void (*vmac)(double* out, const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();

bool supported(Isa isa);

// Table for a specific ISA; throws if the CPU or the build lacks it.
const KernelTable& kernels(Isa isa);

// Active table.
const KernelTable& kernels();

Isa active_isa();

// Overrides the active table for the rest of the process.
void select(Isa isa);

const char* to_string(Isa isa);

}  // namespace farsep::simd
