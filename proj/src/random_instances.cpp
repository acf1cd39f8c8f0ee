#include "relaynet/random_instances.hpp"

#include <algorithm>
#include <cmath>

namespace relaynet {

namespace {

// Exponential-like weights keep rows away from degenerate corners;
// `sharpness` > 1 skews rows toward a dominant entry, which keeps channel
// laws informative enough that compressions are often jointly decodable.
Eigen::VectorXd random_pmf(Rng& rng, int card, double sharpness = 1.0) {
    Eigen::VectorXd v(card);
    double sum = 0;
    for (int i = 0; i < card; ++i) {
        const double e = -std::log(1.0 - rng.uniform() * (1.0 - 1e-6)) + 1e-3;
        v[i] = std::pow(e, sharpness);
        sum += v[i];
    }
    v /= sum;
    // Renormalize the largest entry so the sum is 1 to full precision.
    Eigen::Index top;
    v.maxCoeff(&top);
    v[top] += 1.0 - v.sum();
    return v;
}

RelayAssignment random_assignment(Rng& rng, int n, const InstanceOptions& opt) {
    RelayAssignment a;
    for (int i = 1; i <= n; ++i) {
        const bool df = opt.forceAllDf || (!opt.forceAllCf && rng.uniform() < 0.5);
        if (df) a.dfSet.push_back(i);
    }
    std::vector<int> perm = a.dfSet;
    for (size_t i = perm.size(); i > 1; --i)
        std::swap(perm[i - 1], perm[rng.uniform_int(0, static_cast<int>(i) - 1)]);
    a.order.push_back(0);
    a.order.insert(a.order.end(), perm.begin(), perm.end());
    a.order.push_back(n + 1);
    return a;
}

DiscreteFactor random_discrete_factor(Rng& rng, const NetworkSpec& net,
                                      const RelayAssignment& a) {
    const auto& ch = *net.discrete;
    DiscreteFactor f;
    f.px0 = random_pmf(rng, ch.inputCards[0]);
    long dfSpace = 1;
    for (int i : a.dfSet) dfSpace *= ch.inputCards[i];
    if (a.M() > 0) {
        f.pxDf.resize(ch.inputCards[0], dfSpace);
        for (int r = 0; r < ch.inputCards[0]; ++r)
            f.pxDf.row(r) = random_pmf(rng, static_cast<int>(dfSpace)).transpose();
    }
    for (int i : a.cfSet(net.n)) {
        DiscreteFactor::CfRelay r;
        r.px = random_pmf(rng, ch.inputCards[i]);
        r.yhatCard = 2;
        const long rows = static_cast<long>(ch.outputCards[i - 1]) * ch.inputCards[i];
        r.pyhat.resize(rows, r.yhatCard);
        for (long row = 0; row < rows; ++row)
            r.pyhat.row(row) = random_pmf(rng, r.yhatCard, 1.5).transpose();
        f.cf[i] = std::move(r);
    }
    return f;
}

GaussianFactor random_gaussian_factor(Rng& rng, const NetworkSpec& net,
                                      const RelayAssignment& a) {
    const auto& ch = *net.gaussian;
    const int M = a.M();
    GaussianFactor f;
    // Random unit-diagonal correlation from a lower-triangular factor,
    // scaled to a random fraction of each budget.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(M + 1, M + 1);
    for (int r = 0; r <= M; ++r) {
        for (int c = 0; c < r; ++c) T(r, c) = rng.uniform(-0.6, 0.6);
        T(r, r) = rng.uniform(0.4, 1.0);
        T.row(r) /= T.row(r).norm();
    }
    Eigen::MatrixXd corr = T * T.transpose();
    std::vector<int> dfNodes = {0};
    dfNodes.insert(dfNodes.end(), a.dfSet.begin(), a.dfSet.end());
    Eigen::VectorXd scale(M + 1);
    for (int k = 0; k <= M; ++k)
        scale[k] = std::sqrt(rng.uniform(0.3, 1.0) * ch.powerBudgets[dfNodes[k]]);
    f.dfCov = scale.asDiagonal() * corr * scale.asDiagonal();
    for (int i : a.cfSet(net.n)) {
        f.cfInputVar[i] = rng.uniform(0.3, 1.0) * ch.powerBudgets[i];
        f.compressionVar[i] = rng.uniform(0.25, 4.0);
    }
    return f;
}

}  // namespace

RandomInstance random_discrete_instance(Rng& rng, const InstanceOptions& opt) {
    RandomInstance inst;
    inst.net.n = opt.n;
    inst.net.kind = NetworkKind::Discrete;
    DiscreteChannel ch;
    ch.inputCards.assign(opt.n + 1, 2);
    ch.outputCards.assign(opt.n + 1, 2);
    ch.pmf.resize(ch.inputSpace(), ch.outputSpace());
    for (long r = 0; r < ch.pmf.rows(); ++r)
        ch.pmf.row(r) = random_pmf(rng, static_cast<int>(ch.pmf.cols()), 2.5).transpose();
    inst.net.discrete = std::move(ch);

    inst.assignment = random_assignment(rng, opt.n, opt);
    InputSpec input;
    const int comps = opt.mixedQ ? 2 : 1;
    for (int q = 0; q < comps; ++q)
        input.components.push_back(
            {1.0 / comps, {random_discrete_factor(rng, inst.net, inst.assignment), {}}});
    inst.input = std::move(input);
    return inst;
}

RandomInstance random_gaussian_instance(Rng& rng, const InstanceOptions& opt) {
    RandomInstance inst;
    inst.net.n = opt.n;
    inst.net.kind = NetworkKind::Gaussian;
    GaussianChannel ch;
    ch.gains.resize(opt.n + 1, opt.n + 1);
    for (int i = 0; i <= opt.n; ++i)
        for (int j = 0; j <= opt.n; ++j) ch.gains(i, j) = rng.uniform(-2.0, 2.0);
    ch.noiseVars.resize(opt.n + 1);
    ch.powerBudgets.resize(opt.n + 1);
    for (int j = 0; j <= opt.n; ++j) ch.noiseVars[j] = rng.uniform(0.5, 2.0);
    for (int i = 0; i <= opt.n; ++i) ch.powerBudgets[i] = rng.uniform(0.5, 2.0);
    inst.net.gaussian = std::move(ch);

    inst.assignment = random_assignment(rng, opt.n, opt);
    InputSpec input;
    const int comps = opt.mixedQ ? 2 : 1;
    for (int q = 0; q < comps; ++q) {
        FactorizedInput f;
        f.gaussian = random_gaussian_factor(rng, inst.net, inst.assignment);
        input.components.push_back({1.0 / comps, std::move(f)});
    }
    inst.input = std::move(input);
    return inst;
}

}  // namespace relaynet
