#pragma once

#include <optional>
#include <vector>

#include "relaynet/info.hpp"
#include "relaynet/model.hpp"

namespace relaynet {

// Floating-point stand-in for strict positivity: "> 0" is implemented as
// "> +kStrictEps" and ">= 0" as ">= -kStrictEps", so ties resolve toward
// exclusion for the strict decodable set and inclusion for the non-strict
// one, preserving the containment between them.
inline constexpr double kStrictEps = 1e-9;

inline constexpr int kMaxDecodablePool = 16;  // exhaustive enumeration bound
inline constexpr int kMaxBestSubsetPool = 12; // double subset enumeration bound

// Everything the per-node constraint formulas need to know about the
// decoder pi(k): which D-F signals cooperate, which are known a priori,
// what it observes, and which C-F compressions are candidates.
struct SubsetContext {
    int level = 0;             // k
    int nodeId = 0;            // pi(k)
    VarSet coopX = 0;          // X_{pi(1:k-1)}
    VarSet knownX = 0;         // X_{pi(k:M+1)}
    VarSet obsY = 0;           // Y_{pi(k)}
    std::vector<int> pool;     // candidate C-F relays, ascending node id
};

SubsetContext make_context(const VariableRegistry& reg, const NetworkSpec& net,
                           const RelayAssignment& assignment, int level);

// Message-rate constraint for decoding subset T and false-compression
// subset S (given as bitmasks over ctx.pool positions).
double rate_constraint_term(const Evaluator& ev, MiCache& cache, const SubsetContext& ctx,
                            uint32_t T, uint32_t S);

// Compression-decodability functional for nonempty S within T; positive
// values mean the compressions of S survive joint decoding.
double decodability_term(const Evaluator& ev, MiCache& cache, const SubsetContext& ctx,
                         uint32_t T, uint32_t S);

// The unique largest subset D of ctx.pool whose every nonempty subset has
// a positive (strict) or nonnegative (non-strict) decodability term.
// Selected by enumerating all subsets in cardinality/lex order, taking the
// union of qualifiers, and re-verifying the union; a failed re-check
// throws UniquenessViolation (numerical degeneracy).
std::vector<int> largest_decodable_set(const Evaluator& ev, MiCache& cache,
                                       const SubsetContext& ctx, bool strict);

// Convenience form: assembles the instance and builds the context for
// decoder pi(level) itself.
std::vector<int> largest_decodable_set(const NetworkSpec& net, const RelayAssignment& assignment,
                                       const InputSpec& input, int level, bool strict);

struct PerNodeConstraint {
    int level = 0;                    // k
    int nodeId = 0;                   // pi(k)
    std::vector<int> decodableSet;    // D_k, or the chosen T_k
    std::vector<int> bindingSubset;   // S achieving the inner minimum
    double valueBits = 0.0;
};

struct RateReport {
    double rateBits = 0.0;
    int bindingLevel = 0;
    std::vector<PerNodeConstraint> perNode;
    RelayAssignment assignment;
};

// Multi-level D-F rate: min over k of I(X_{pi(1:k-1)}; Y_{pi(k)} | X_{pi(k:n+1)}).
// Requires dfSet = N.
RateReport df_multilevel_rate(const NetworkSpec& net, const RelayAssignment& assignment,
                              const InputSpec& input);

struct CfSuccessiveResult {
    std::optional<RateReport> report;               // set when feasible
    std::optional<std::vector<int>> violatingSubset; // set when infeasible
    bool feasible() const { return report.has_value(); }
};

// Successive compression-message decoding: rate I(X0; Yhat_N, Y_{n+1} | X_N)
// subject to every S <= N satisfying the recovery constraint; reports the
// first violating S otherwise. All relays must be C-F.
CfSuccessiveResult cf_successive_rate(const NetworkSpec& net, const InputSpec& input);

// Repetitive-encoding rate restricted to decoding subset T; relays outside
// T stay in the joint law as noise. All relays must be C-F.
double nnc_subset_rate(const NetworkSpec& net, const InputSpec& input,
                       const std::vector<int>& T);

// Joint compression-message decoding over the largest decodable set D.
RateReport cf_joint_rate(const NetworkSpec& net, const InputSpec& input);

// Mixed D-F/C-F rate via the per-node largest decodable sets D_k.
RateReport unified_rate_decodable_sets(const NetworkSpec& net, const RelayAssignment& assignment,
                                       const InputSpec& input);

// Mixed D-F/C-F rate maximizing each node's decoding subset T_k explicitly.
// Computes the same value as unified_rate_decodable_sets.
RateReport unified_rate_best_subsets(const NetworkSpec& net, const RelayAssignment& assignment,
                                     const InputSpec& input);

struct SubsetOptimalityReport {
    struct PerLevel {
        int level = 0;
        int nodeId = 0;
        std::vector<int> decodableSet;        // D_k
        double valueAtDecodable = 0.0;
        double maxValue = 0.0;
        std::vector<std::vector<int>> maximizers;  // every T within tolerance of the max
        bool ok = false;                            // value(D_k) >= max - tol
    };
    std::vector<PerLevel> perLevel;
    bool ok = true;
};

// Checks, per decoder, that the subset maximum is attained at D_k and
// lists every maximizing subset. Report-style.
SubsetOptimalityReport verify_subset_optimality(const NetworkSpec& net,
                                                const RelayAssignment& assignment,
                                                const InputSpec& input, double tol = kStrictEps);

struct ClassicSingleRelayRates {
    double dfRate = 0.0;                      // joint-input decode-and-forward bound
    std::optional<double> cfSuccessiveRate;   // requires a C-F input (M empty)
    std::optional<bool> cfSuccessiveFeasible;
    std::optional<double> cfJointRate;        // with the max{0, .} correction
};

// The four single-relay baselines; the C-F values require relay 1 to be a
// C-F relay under `assignment`. Requires n = 1.
ClassicSingleRelayRates classic_single_relay_rates(const NetworkSpec& net,
                                                   const RelayAssignment& assignment,
                                                   const InputSpec& input);

}  // namespace relaynet
