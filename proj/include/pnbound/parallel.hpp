#pragma once

#include <cstdint>

namespace pnbound {

// Every data-parallel kernel takes an Exec argument. Serial runs the same
// per-item code in a plain loop and is the reference the OpenMP path is
// tested against; results are bit-identical by construction because
// reductions are always performed in item order after the parallel map.
enum class Exec { Serial, Parallel };

int max_threads();
void set_num_threads(int n);

// SplitMix64 finalizer; derives independent per-item seeds from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace pnbound
