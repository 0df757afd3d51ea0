#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace gna {

// Every stochastic component draws from this generator; its name is recorded in manifests.
using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

// Independent stream for (seed, stream) pairs.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace gna
