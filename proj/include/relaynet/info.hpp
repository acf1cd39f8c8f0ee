#pragma once

#include <Eigen/Core>
#include <unordered_map>
#include <variant>
#include <vector>

#include "relaynet/common.hpp"
#include "relaynet/model.hpp"

namespace relaynet {

// Maps the realized random variables of one instance to dense positions.
// Order is fixed: X_0..X_n, Y_1..Y_{n+1}, then Yhat_i for C-F relays in
// ascending node order. Shared by the discrete and Gaussian substrates so
// rate formulas are written once against positions.
class VariableRegistry {
public:
    VariableRegistry() = default;
    VariableRegistry(int n, const std::vector<int>& cfRelays);

    int size() const { return static_cast<int>(vars_.size()); }
    const Var& var(int pos) const { return vars_[pos]; }
    int position(const Var& v) const;        // throws if unregistered
    bool registered(const Var& v) const;

    VarSet x(std::initializer_list<int> nodes) const { return x(std::vector<int>(nodes)); }
    VarSet x(const std::vector<int>& nodes) const;
    VarSet y(int node) const;
    VarSet yhat(const std::vector<int>& nodes) const;

    std::string set_to_string(VarSet s) const;

private:
    std::vector<Var> vars_;
};

// Dense joint law over every registered variable; positions follow the
// registry, with position 0 varying slowest.
struct JointPMF {
    VariableRegistry registry;
    std::vector<int> cards;   // per position
    Eigen::ArrayXd probs;     // size = prod(cards)

    double total() const { return probs.sum(); }
    // Shannon entropy (bits) of the marginal on `vars`. 0 log 0 := 0.
    double entropy_bits(VarSet vars) const;
};

// Joint Gaussian law as a covariance over the registered variables
// (means are irrelevant to every information quantity here).
struct GaussianModel {
    VariableRegistry registry;
    Eigen::MatrixXd cov;

    // log2 pseudo-determinant of the principal submatrix on `vars`: the
    // product of eigenvalues above the pivot tolerance, so singular
    // conditioning blocks resolve to the positive spectrum. log2 det of
    // the empty set is 0.
    double log2_pdet(VarSet vars) const;
};

using ComponentModel = std::variant<JointPMF, GaussianModel>;

inline constexpr long kDefaultStateCap = 1L << 24;  // discrete product-space cells
inline constexpr double kPivotTol = 1e-12;

// Realizes the joint law channel x input factorization x compression test
// channels for one mixture component, marginalized nowhere.
// Throws CapExceeded when the discrete product space exceeds `stateCap`.
ComponentModel assemble_joint(const NetworkSpec& net, const RelayAssignment& assignment,
                              const FactorizedInput& component, long stateCap = kDefaultStateCap);

// I(A;B|C) in bits. A, B, C must be pairwise disjoint and registered.
// The Gaussian case is 1/2 log2( pdet(S_AC) pdet(S_BC) / (pdet(S_C) pdet(S_ABC)) ).
double cond_mi(const ComponentModel& model, VarSet A, VarSet B, VarSet C);

// Memoizes the per-subset entropy/log-det terms behind cond_mi within one
// computation. Call-local: create one per rate evaluation, do not share
// across threads.
class MiCache {
public:
    explicit MiCache(const std::vector<ComponentModel>* comps) : comps_(comps), h_(comps->size()) {}
    double h(size_t comp, VarSet vars);

private:
    const std::vector<ComponentModel>* comps_;
    std::vector<std::unordered_map<VarSet, double>> h_;
};

// All mixture components of one instance, assembled once and evaluated
// with Q-averaging: mi() returns sum_q w_q I(A;B|C, Q=q).
class Evaluator {
public:
    Evaluator(const NetworkSpec& net, const RelayAssignment& assignment, const InputSpec& input,
              long stateCap = kDefaultStateCap);

    const VariableRegistry& registry() const { return registry_; }
    const std::vector<ComponentModel>& components() const { return components_; }
    const std::vector<double>& weights() const { return weights_; }

    double mi(VarSet A, VarSet B, VarSet C) const;
    double mi(MiCache& cache, VarSet A, VarSet B, VarSet C) const;

private:
    VariableRegistry registry_;
    std::vector<ComponentModel> components_;
    std::vector<double> weights_;
};

// Q-averaged conditional MI for a standalone component list.
double mixture_cond_mi(const std::vector<ComponentModel>& components,
                       const std::vector<double>& weights, VarSet A, VarSet B, VarSet C);

}  // namespace relaynet
