#pragma once

// Vectorized hot loops of the engine. energy_kernel.cpp is compiled with
// fast-math so that libmvec supplies SIMD log/exp/cos; nothing in it may
// produce or consume infinities or NaNs.

#include <cstddef>
#include <cstdint>

#include "remlab/random.hpp"

namespace remlab::detail {

/// Energies are always produced in aligned groups of this many indices so a
/// value never depends on where a caller's range starts.
inline constexpr std::size_t kEnergyGroup = 16;

void fill_laplace(const StreamKey& key, std::uint64_t first, double* out, std::size_t count);

void fill_gaussian(const StreamKey& key, double sqrt_n, std::uint64_t first, double* out,
                   std::size_t count);

/// weights[j] = exp(-beta (energies[j] - ref)); returns their sum. Requires
/// energies[j] >= ref.
double boltzmann_weights(const double* energies, std::size_t count, double beta, double ref,
                         double* weights);

}  // namespace remlab::detail
