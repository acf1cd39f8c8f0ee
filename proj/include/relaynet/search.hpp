#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relaynet/model.hpp"
#include "relaynet/rates.hpp"

namespace relaynet {

// Finite-search realization of the maximization over input distributions:
// Gaussian inputs are swept over a correlation/power/compression grid,
// discrete inputs over an explicit candidate list.
struct SearchConfig {
    int maxRelays = 8;                       // enumeration bound on n
    std::vector<double> rhoGrid = {0.0};     // D-F cooperation correlation
    std::vector<double> powerFracGrid = {1.0};
    std::vector<double> sigmaHatGrid = {1.0};  // compression noise variances
    std::vector<InputSpec> discreteCandidates;

    enum class Mode { Grid, CoordinateDescent };
    Mode mode = Mode::Grid;
    int maxSweeps = 5;                 // coordinate-descent cap
    double relImprovementStop = 1e-6;
    // When set, grid points whose compressions violate the successive-
    // decoding recovery constraint (M empty only) are logged as infeasible
    // and excluded from the maximization.
    bool requireSuccessiveFeasible = false;
    int threads = 1;
};

// All 2^n relay partitions, each with every ordering of its D-F set.
// Count is sum_k C(n,k) k!.
std::vector<RelayAssignment> enumerate_assignments(int n, int maxRelays = 8);

struct GaussianParams {
    double rho = 0.0;
    double powerFrac = 1.0;
    double sigmaHat = 1.0;
};

// Builds the mixture-free Gaussian input for one grid point. The D-F
// cooperation covariance comes from the AR(1)-structured lower-triangular
// factor over (source, dfSet in pi order), scaled to the power budgets, so
// it is PSD by construction.
InputSpec make_gaussian_input(const NetworkSpec& net, const RelayAssignment& assignment,
                              const GaussianParams& p);

struct EvaluatedPoint {
    GaussianParams params;           // meaningful for Gaussian networks
    int candidateIndex = -1;         // meaningful for discrete candidate lists
    bool feasible = true;
    double rateBits = 0.0;           // valid when feasible
};

struct OptimizeResult {
    RateReport best;
    EvaluatedPoint bestPoint;
    std::vector<EvaluatedPoint> log;  // every evaluated grid point, in order
};

// Evaluates the decodable-set rate over the parameter grid and returns the
// best report with the achieving parameters. Deterministic given cfg.
// Throws std::runtime_error when no grid point is feasible.
OptimizeResult optimize_params(const NetworkSpec& net, const RelayAssignment& assignment,
                               const SearchConfig& cfg);

struct RankedStrategy {
    RelayAssignment assignment;
    OptimizeResult result;
};

// optimize_params for every enumerated assignment, sorted by rate
// descending; ties break toward smaller |M|, then lexicographic order.
std::vector<RankedStrategy> rank_strategies(const NetworkSpec& net, const SearchConfig& cfg);

// One row per ranked strategy: assignment, parameters, rate, binding node.
std::string rank_to_csv(const std::vector<RankedStrategy>& ranked);

}  // namespace relaynet
