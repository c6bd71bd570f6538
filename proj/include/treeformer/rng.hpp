#pragma once

#include <random>

namespace treeformer {

// Every stochastic operation takes an explicit generator; there is no global
// RNG anywhere in the library.
using Rng = std::mt19937_64;

}  // namespace treeformer
