#include "relaynet/info.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relaynet {

VariableRegistry::VariableRegistry(int n, const std::vector<int>& cfRelays) {
    for (int i = 0; i <= n; ++i) vars_.push_back({VarKind::Input, i});
    for (int j = 1; j <= n + 1; ++j) vars_.push_back({VarKind::Output, j});
    for (int i : cfRelays) vars_.push_back({VarKind::Compression, i});
    if (size() > 64)
        throw std::invalid_argument("variable registry exceeds 64 entries");
}

int VariableRegistry::position(const Var& v) const {
    for (int p = 0; p < size(); ++p)
        if (vars_[p] == v) return p;
    throw std::invalid_argument("unregistered variable " + to_string(v));
}

bool VariableRegistry::registered(const Var& v) const {
    for (const auto& w : vars_)
        if (w == v) return true;
    return false;
}

VarSet VariableRegistry::x(const std::vector<int>& nodes) const {
    VarSet s = 0;
    for (int node : nodes) s = set_with(s, position({VarKind::Input, node}));
    return s;
}

VarSet VariableRegistry::y(int node) const {
    return set_with(0, position({VarKind::Output, node}));
}

VarSet VariableRegistry::yhat(const std::vector<int>& nodes) const {
    VarSet s = 0;
    for (int node : nodes) s = set_with(s, position({VarKind::Compression, node}));
    return s;
}

std::string VariableRegistry::set_to_string(VarSet s) const {
    std::string out = "{";
    bool first = true;
    for (int p = 0; p < size(); ++p) {
        if (!set_contains(s, p)) continue;
        if (!first) out += ",";
        out += to_string(vars_[p]);
        first = false;
    }
    return out + "}";
}

double JointPMF::entropy_bits(VarSet vars) const {
    // Marginalize onto `vars` in one pass, then sum -p log2 p.
    std::vector<int> pos;
    for (int p = 0; p < registry.size(); ++p)
        if (set_contains(vars, p)) pos.push_back(p);
    long subSize = 1;
    std::vector<long> subStride(pos.size());
    for (int i = static_cast<int>(pos.size()) - 1; i >= 0; --i) {
        subStride[i] = subSize;
        subSize *= cards[pos[i]];
    }
    if (pos.empty()) return 0.0;

    std::vector<long> fullStride(cards.size());
    long fullSize = 1;
    for (int p = static_cast<int>(cards.size()) - 1; p >= 0; --p) {
        fullStride[p] = fullSize;
        fullSize *= cards[p];
    }

    Eigen::ArrayXd marg = Eigen::ArrayXd::Zero(subSize);
    for (long cell = 0; cell < fullSize; ++cell) {
        const double p = probs[cell];
        if (p == 0.0) continue;
        long sub = 0;
        for (size_t i = 0; i < pos.size(); ++i)
            sub += ((cell / fullStride[pos[i]]) % cards[pos[i]]) * subStride[i];
        marg[sub] += p;
    }
    double h = 0.0;
    for (long i = 0; i < subSize; ++i) {
        const double p = marg[i];
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

double GaussianModel::log2_pdet(VarSet vars) const {
    std::vector<int> pos;
    for (int p = 0; p < registry.size(); ++p)
        if (set_contains(vars, p)) pos.push_back(p);
    if (pos.empty()) return 0.0;
    const int k = static_cast<int>(pos.size());
    Eigen::MatrixXd sub(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) sub(r, c) = cov(pos[r], pos[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double tol = kPivotTol * std::max(1.0, ev.cwiseAbs().maxCoeff());
    double acc = 0.0;
    for (int i = 0; i < k; ++i)
        if (ev[i] > tol) acc += std::log2(ev[i]);
    return acc;
}

namespace {

// Mixed-radix helpers used by the discrete assembly. idx(values most
// significant first) over the given cards.
long tuple_index(const std::vector<int>& values, const std::vector<int>& cards) {
    long idx = 0;
    for (size_t i = 0; i < values.size(); ++i) idx = idx * cards[i] + values[i];
    return idx;
}

JointPMF assemble_discrete(const NetworkSpec& net, const RelayAssignment& assignment,
                           const DiscreteFactor& fac, long stateCap) {
    const auto& ch = *net.discrete;
    const int n = net.n;
    const auto cf = assignment.cfSet(n);
    VariableRegistry reg(n, cf);

    std::vector<int> cards(reg.size());
    for (int p = 0; p < reg.size(); ++p) {
        const Var& v = reg.var(p);
        if (v.kind == VarKind::Input)
            cards[p] = ch.inputCards[v.node];
        else if (v.kind == VarKind::Output)
            cards[p] = ch.outputCards[v.node - 1];
        else
            cards[p] = fac.cf.at(v.node).yhatCard;
    }
    long fullSize = 1;
    std::string product;
    for (int p = 0; p < reg.size(); ++p) {
        fullSize *= cards[p];
        if (p) product += " x ";
        product += to_string(reg.var(p)) + "(" + std::to_string(cards[p]) + ")";
        if (fullSize > stateCap)
            throw CapExceeded("product space " + product + " ... exceeds cap of " +
                              std::to_string(stateCap) + " cells");
    }

    JointPMF joint;
    joint.registry = reg;
    joint.cards = cards;
    joint.probs = Eigen::ArrayXd::Zero(fullSize);

    // Walk every cell of the full product space; the cell probability is
    // the product of the input factorization, the channel law, and the
    // compression test channels.
    const int K = reg.size();
    std::vector<int> val(K, 0);
    std::vector<int> dfCards;
    for (int i : assignment.dfSet) dfCards.push_back(ch.inputCards[i]);
    for (long cell = 0; cell < fullSize; ++cell) {
        long rem = cell;
        for (int p = K - 1; p >= 0; --p) {
            val[p] = static_cast<int>(rem % cards[p]);
            rem /= cards[p];
        }
        // positions: X_i at i, Y_j at (n+1)+(j-1), Yhat in tail
        const int x0 = val[0];
        double p = fac.px0[x0];
        if (assignment.M() > 0) {
            std::vector<int> dfVals;
            for (int i : assignment.dfSet) dfVals.push_back(val[i]);
            p *= fac.pxDf(x0, tuple_index(dfVals, dfCards));
        }
        for (int i : cf) p *= fac.cf.at(i).px[val[i]];
        if (p == 0.0) continue;

        std::vector<int> xs(n + 1), ys(n + 1);
        for (int i = 0; i <= n; ++i) xs[i] = val[i];
        for (int j = 1; j <= n + 1; ++j) ys[j - 1] = val[n + 1 + (j - 1)];
        p *= ch.pmf(tuple_index(xs, ch.inputCards), tuple_index(ys, ch.outputCards));
        if (p == 0.0) continue;

        int tail = 2 * n + 2;
        for (int i : cf) {
            const auto& r = fac.cf.at(i);
            const int yi = val[n + 1 + (i - 1)];
            const int xi = val[i];
            p *= r.pyhat(static_cast<long>(yi) * ch.inputCards[i] + xi, val[tail]);
            ++tail;
        }
        joint.probs[cell] = p;
    }
    return joint;
}

GaussianModel assemble_gaussian(const NetworkSpec& net, const RelayAssignment& assignment,
                                const GaussianFactor& fac) {
    const auto& ch = *net.gaussian;
    const int n = net.n;
    const auto cf = assignment.cfSet(n);
    VariableRegistry reg(n, cf);

    // Input covariance over X_0..X_n: the D-F block is fac.dfCov, the C-F
    // inputs are independent with their declared variances.
    Eigen::MatrixXd sx = Eigen::MatrixXd::Zero(n + 1, n + 1);
    std::vector<int> dfNodes = {0};
    dfNodes.insert(dfNodes.end(), assignment.dfSet.begin(), assignment.dfSet.end());
    for (size_t a = 0; a < dfNodes.size(); ++a)
        for (size_t b = 0; b < dfNodes.size(); ++b)
            sx(dfNodes[a], dfNodes[b]) = fac.dfCov(a, b);
    for (int i : cf) sx(i, i) = fac.cfInputVar.at(i);

    // Y = A X + Z with A(j-1, i) = gains(i, j-1).
    Eigen::MatrixXd A = ch.gains.transpose();
    Eigen::MatrixXd sxy = sx * A.transpose();                 // cov(X, Y)
    Eigen::MatrixXd syy = A * sx * A.transpose();
    syy += ch.noiseVars.asDiagonal();

    const int K = reg.size();
    GaussianModel model;
    model.registry = reg;
    model.cov = Eigen::MatrixXd::Zero(K, K);
    model.cov.block(0, 0, n + 1, n + 1) = sx;
    model.cov.block(0, n + 1, n + 1, n + 1) = sxy;
    model.cov.block(n + 1, 0, n + 1, n + 1) = sxy.transpose();
    model.cov.block(n + 1, n + 1, n + 1, n + 1) = syy;

    // Yhat_i = Y_i + Zhat_i: copy the Y_i row/column and add the
    // compression noise on the diagonal.
    int tail = 2 * n + 2;
    for (int i : cf) {
        const int ypos = n + 1 + (i - 1);
        for (int p = 0; p < 2 * n + 2; ++p) {
            model.cov(tail, p) = model.cov(ypos, p);
            model.cov(p, tail) = model.cov(p, ypos);
        }
        model.cov(tail, tail) = model.cov(ypos, ypos) + fac.compressionVar.at(i);
        ++tail;
    }
    // Cross terms between compressions: cov(Yhat_i, Yhat_j) = cov(Y_i, Y_j).
    tail = 2 * n + 2;
    for (size_t a = 0; a < cf.size(); ++a)
        for (size_t b = 0; b < cf.size(); ++b) {
            if (a == b) continue;
            model.cov(tail + a, tail + b) =
                model.cov(n + 1 + (cf[a] - 1), n + 1 + (cf[b] - 1));
        }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.cov, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -kPsdTol * scale)
        throw std::invalid_argument("assembled Gaussian covariance is not PSD");
    return model;
}

void check_sets(const VariableRegistry& reg, VarSet A, VarSet B, VarSet C) {
    if ((A & B) || (A & C) || (B & C))
        throw std::invalid_argument("cond_mi requires pairwise disjoint variable sets");
    const VarSet all = (reg.size() == 64) ? ~VarSet{0} : ((VarSet{1} << reg.size()) - 1);
    if ((A | B | C) & ~all)
        throw std::invalid_argument("cond_mi received an unregistered variable position");
}

double mi_from_h(double hAC, double hBC, double hC, double hABC, bool gaussian) {
    const double v = hAC + hBC - hC - hABC;
    return gaussian ? 0.5 * v : v;
}

}  // namespace

ComponentModel assemble_joint(const NetworkSpec& net, const RelayAssignment& assignment,
                              const FactorizedInput& component, long stateCap) {
    if (net.kind == NetworkKind::Discrete) {
        if (!component.discrete)
            throw std::invalid_argument("discrete network requires a discrete input component");
        return assemble_discrete(net, assignment, *component.discrete, stateCap);
    }
    if (!component.gaussian)
        throw std::invalid_argument("gaussian network requires a gaussian input component");
    return assemble_gaussian(net, assignment, *component.gaussian);
}

double cond_mi(const ComponentModel& model, VarSet A, VarSet B, VarSet C) {
    if (std::holds_alternative<JointPMF>(model)) {
        const auto& m = std::get<JointPMF>(model);
        check_sets(m.registry, A, B, C);
        return mi_from_h(m.entropy_bits(A | C), m.entropy_bits(B | C), m.entropy_bits(C),
                         m.entropy_bits(A | B | C), false);
    }
    const auto& m = std::get<GaussianModel>(model);
    check_sets(m.registry, A, B, C);
    return mi_from_h(m.log2_pdet(A | C), m.log2_pdet(B | C), m.log2_pdet(C),
                     m.log2_pdet(A | B | C), true);
}

double MiCache::h(size_t comp, VarSet vars) {
    auto& memo = h_[comp];
    auto it = memo.find(vars);
    if (it != memo.end()) return it->second;
    const auto& model = (*comps_)[comp];
    double v = std::holds_alternative<JointPMF>(model)
                   ? std::get<JointPMF>(model).entropy_bits(vars)
                   : std::get<GaussianModel>(model).log2_pdet(vars);
    memo.emplace(vars, v);
    return v;
}

Evaluator::Evaluator(const NetworkSpec& net, const RelayAssignment& assignment,
                     const InputSpec& input, long stateCap) {
    registry_ = VariableRegistry(net.n, assignment.cfSet(net.n));
    for (const auto& comp : input.components) {
        components_.push_back(assemble_joint(net, assignment, comp.factor, stateCap));
        weights_.push_back(comp.weight);
    }
}

double Evaluator::mi(VarSet A, VarSet B, VarSet C) const {
    return mixture_cond_mi(components_, weights_, A, B, C);
}

double Evaluator::mi(MiCache& cache, VarSet A, VarSet B, VarSet C) const {
    double acc = 0.0;
    for (size_t q = 0; q < components_.size(); ++q) {
        const bool gaussian = std::holds_alternative<GaussianModel>(components_[q]);
        if (gaussian)
            check_sets(std::get<GaussianModel>(components_[q]).registry, A, B, C);
        else
            check_sets(std::get<JointPMF>(components_[q]).registry, A, B, C);
        acc += weights_[q] * mi_from_h(cache.h(q, A | C), cache.h(q, B | C), cache.h(q, C),
                                       cache.h(q, A | B | C), gaussian);
    }
    return acc;
}

double mixture_cond_mi(const std::vector<ComponentModel>& components,
                       const std::vector<double>& weights, VarSet A, VarSet B, VarSet C) {
    double acc = 0.0;
    for (size_t q = 0; q < components.size(); ++q)
        acc += weights[q] * cond_mi(components[q], A, B, C);
    return acc;
}

}  // namespace relaynet
