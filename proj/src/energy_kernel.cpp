#include "energy_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace remlab::detail {

namespace {

struct Lanes {
  std::uint32_t c0, c1, c2, c3;
};

inline Lanes philox_lanes(std::uint32_t index_lo, std::uint32_t index_hi, std::uint32_t s0,
                          std::uint32_t s1, std::uint32_t k0, std::uint32_t k1) {
  std::uint32_t c0 = index_lo, c1 = index_hi, c2 = s0, c3 = s1;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c0;
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c2;
    const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
    const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
    const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return {c0, c1, c2, c3};
}

inline double unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

void laplace_group(const StreamKey& key, std::uint64_t base, double* out) {
  const auto s0 = static_cast<std::uint32_t>(key.stream);
  const auto s1 = static_cast<std::uint32_t>(key.stream >> 32);
  const auto k0 = static_cast<std::uint32_t>(key.key);
  const auto k1 = static_cast<std::uint32_t>(key.key >> 32);
  const auto hi = static_cast<std::uint32_t>(base >> 32);
  const auto lo = static_cast<std::uint32_t>(base);
#pragma omp simd
  for (std::uint32_t j = 0; j < kEnergyGroup; ++j) {
    const Lanes r = philox_lanes(lo + j, hi, s0, s1, k0, k1);
    const double u = unit(r.c0, r.c1);
    const bool lower = u < 0.5;
    const double l = std::log(lower ? 2.0 * u : 2.0 * (1.0 - u));
    out[j] = lower ? l : -l;
  }
}

void gaussian_group(const StreamKey& key, double sqrt_n, std::uint64_t base, double* out) {
  const auto s0 = static_cast<std::uint32_t>(key.stream);
  const auto s1 = static_cast<std::uint32_t>(key.stream >> 32);
  const auto k0 = static_cast<std::uint32_t>(key.key);
  const auto k1 = static_cast<std::uint32_t>(key.key >> 32);
  const auto hi = static_cast<std::uint32_t>(base >> 32);
  const auto lo = static_cast<std::uint32_t>(base);
#pragma omp simd
  for (std::uint32_t j = 0; j < kEnergyGroup; ++j) {
    const Lanes r = philox_lanes(lo + j, hi, s0, s1, k0, k1);
    const double u1 = unit(r.c0, r.c1);
    const double u2 = unit(r.c2, r.c3);
    out[j] = sqrt_n * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
}

template <typename Group>
void fill_grouped(std::uint64_t first, double* out, std::size_t count, Group&& group) {
  alignas(64) double buffer[kEnergyGroup];
  std::uint64_t base = first - first % kEnergyGroup;
  const std::uint64_t end = first + count;
  while (base < end) {
    group(base, buffer);
    const std::uint64_t from = std::max(base, first);
    const std::uint64_t to = std::min<std::uint64_t>(base + kEnergyGroup, end);
    std::copy(buffer + (from - base), buffer + (to - base), out + (from - first));
    base += kEnergyGroup;
  }
}

}  // namespace

void fill_laplace(const StreamKey& key, std::uint64_t first, double* out, std::size_t count) {
  fill_grouped(first, out, count, [&](std::uint64_t base, double* buf) { laplace_group(key, base, buf); });
}

void fill_gaussian(const StreamKey& key, double sqrt_n, std::uint64_t first, double* out,
                   std::size_t count) {
  fill_grouped(first, out, count,
               [&](std::uint64_t base, double* buf) { gaussian_group(key, sqrt_n, base, buf); });
}

double boltzmann_weights(const double* energies, std::size_t count, double beta, double ref,
                         double* weights) {
  double sum = 0.0;
#pragma omp simd reduction(+ : sum)
  for (std::size_t j = 0; j < count; ++j) {
    const double w = std::exp(-beta * (energies[j] - ref));
    weights[j] = w;
    sum += w;
  }
  return sum;
}

}  // namespace remlab::detail
