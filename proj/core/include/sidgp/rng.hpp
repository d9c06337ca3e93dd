#ifndef SIDGP_RNG_HPP
#define SIDGP_RNG_HPP

#include <cstdint>
#include <random>

namespace sidgp {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` derived from `master_seed`.
/// Used to give each imputation chain / trial its own reproducible stream.
inline Rng split_rng(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

}  // namespace sidgp

#endif  // SIDGP_RNG_HPP
