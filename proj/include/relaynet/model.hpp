#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relaynet/common.hpp"

namespace relaynet {

enum class NetworkKind { Discrete, Gaussian };

// Dense conditional pmf p(y_1..y_{n+1} | x_0..x_n). Rows index input
// tuples (x_0 most significant), columns index output tuples (y_1 most
// significant). Every row sums to 1.
struct DiscreteChannel {
    std::vector<int> inputCards;   // |X_i| for i = 0..n
    std::vector<int> outputCards;  // |Y_j| for j = 1..n+1 (outputCards[j-1])
    Eigen::MatrixXd pmf;           // rows = input tuples, cols = output tuples

    long inputSpace() const;
    long outputSpace() const;
};

// Additive model Y_j = sum_i g[i][j] X_i + Z_j with independent zero-mean
// Gaussian noises Z_j of variance noiseVars[j-1].
struct GaussianChannel {
    Eigen::MatrixXd gains;        // (n+1) x (n+1): gains(i, j-1), transmitter i -> receiver j
    Eigen::VectorXd noiseVars;    // receivers 1..n+1
    Eigen::VectorXd powerBudgets; // transmitters 0..n
};

struct NetworkSpec {
    int n = 0;  // relay count; nodes are 0..n+1
    NetworkKind kind = NetworkKind::Discrete;
    std::optional<DiscreteChannel> discrete;
    std::optional<GaussianChannel> gaussian;

    int destination() const { return n + 1; }
    std::vector<int> relays() const;
};

// Which relays decode-and-forward, and in which order the information
// passes. order = (pi(1), ..., pi(M+2)) with pi(1) = 0 (source) and
// pi(M+2) = n+1 (destination); the middle entries enumerate dfSet.
struct RelayAssignment {
    std::vector<int> dfSet;  // sorted ascending
    std::vector<int> order;

    int M() const { return static_cast<int>(dfSet.size()); }
    std::vector<int> cfSet(int n) const;  // N \ dfSet, sorted
};

RelayAssignment direct_assignment(int n);                         // M = {} (all relays C-F)
RelayAssignment full_df_assignment(int n, std::vector<int> order);  // M = N

// One operating point of the factorized input distribution
// p(x0) p(x_M|x0) prod_{i in N\M} p(x_i) p(yhat_i|y_i,x_i), in either the
// discrete or the Gaussian parameterization.
struct DiscreteFactor {
    Eigen::VectorXd px0;     // |X_0|
    // Joint conditional over the D-F relays given x0: rows = x0, columns =
    // mixed-radix tuples over dfSet ascending (first relay most significant).
    Eigen::MatrixXd pxDf;    // |X_0| x prod_{i in M} |X_i|; 0x... when M empty

    struct CfRelay {
        Eigen::VectorXd px;     // |X_i|
        int yhatCard = 0;       // |Yhat_i|
        Eigen::MatrixXd pyhat;  // (|Y_i| * |X_i|) rows (y major) x yhatCard
    };
    std::map<int, CfRelay> cf;  // keyed by relay id
};

struct GaussianFactor {
    // Input covariance over {0} u dfSet, ordered source first then dfSet
    // ascending. Diagonal entries must not exceed the power budgets.
    Eigen::MatrixXd dfCov;
    std::map<int, double> cfInputVar;        // relay id -> var(X_i), <= budget
    std::map<int, double> compressionVar;    // relay id -> var of Zhat in Yhat = Y + Zhat, > 0
};

struct FactorizedInput {
    std::optional<DiscreteFactor> discrete;
    std::optional<GaussianFactor> gaussian;
};

// A weighted finite mixture of operating points realizes the time-sharing
// index Q; a single component means Q is degenerate.
struct InputSpec {
    struct Component {
        double weight = 1.0;
        FactorizedInput factor;
    };
    std::vector<Component> components;

    static InputSpec single(FactorizedInput f) {
        InputSpec s;
        s.components.push_back({1.0, std::move(f)});
        return s;
    }
};

struct Violation {
    std::string path;     // dotted path to the offending field
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

// Structural validation of a full problem instance. Report-style: never
// throws, lists every violated invariant with the offending field.
ValidationReport validate(const NetworkSpec& net, const RelayAssignment& assignment,
                          const InputSpec& input);

inline constexpr double kNormTol = 1e-12;   // pmf/weight normalization slack
inline constexpr double kPsdTol = 1e-9;     // eigenvalue slack for PSD checks

}  // namespace relaynet
