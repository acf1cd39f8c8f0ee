#pragma once

#include <cstdint>
#include <random>

#include "relaynet/model.hpp"

namespace relaynet {

// Deterministic uniform doubles from a mt19937_64 stream, independent of
// standard-library distribution internals, so identical seeds reproduce
// identical instances on any platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    double uniform() { return (eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        const int v = lo + static_cast<int>(uniform() * (hi - lo + 1));
        return v > hi ? hi : v;
    }

private:
    std::mt19937_64 eng_;
};

struct RandomInstance {
    NetworkSpec net;
    RelayAssignment assignment;
    InputSpec input;
};

struct InstanceOptions {
    int n = 2;
    bool mixedQ = false;       // two-component time-sharing mixture
    bool forceAllDf = false;   // dfSet = N
    bool forceAllCf = false;   // dfSet = {}
};

// Random binary-alphabet discrete instance: Dirichlet-like channel rows,
// random relay partition and ordering, normalized input factors.
RandomInstance random_discrete_instance(Rng& rng, const InstanceOptions& opt);

// Random Gaussian instance with bounded gains, noises, and powers; the
// D-F cooperation covariance is built from a random lower-triangular
// factor so it is PSD by construction.
RandomInstance random_gaussian_instance(Rng& rng, const InstanceOptions& opt);

}  // namespace relaynet
