#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "relaynet/model.hpp"
#include "relaynet/random_instances.hpp"
#include "relaynet/search.hpp"

using namespace relaynet;

namespace {

// Minimal well-formed discrete instance: n=1, binary everywhere, relay 1
// decode-and-forward, uniform channel.
NetworkSpec tiny_net() {
    NetworkSpec net;
    net.n = 1;
    net.kind = NetworkKind::Discrete;
    DiscreteChannel ch;
    ch.inputCards = {2, 2};
    ch.outputCards = {2, 2};
    ch.pmf = Eigen::MatrixXd::Constant(4, 4, 0.25);
    net.discrete = ch;
    return net;
}

InputSpec tiny_input_df() {
    DiscreteFactor f;
    f.px0 = Eigen::Vector2d(0.5, 0.5);
    f.pxDf = Eigen::MatrixXd::Constant(2, 2, 0.5);
    FactorizedInput fi;
    fi.discrete = f;
    return InputSpec::single(fi);
}

}  // namespace

TEST_CASE("minimal well-formed instance validates") {
    auto net = tiny_net();
    RelayAssignment a;
    a.dfSet = {1};
    a.order = {0, 1, 2};
    CHECK(validate(net, a, tiny_input_df()).ok());
}

TEST_CASE("order must start at source") {
    auto net = tiny_net();
    RelayAssignment a;
    a.dfSet = {1};
    a.order = {1, 0, 2};
    auto rep = validate(net, a, tiny_input_df());
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
        found = found || v.message.find("start at source") != std::string::npos;
    CHECK(found);
}

TEST_CASE("non-PSD input covariance is rejected") {
    NetworkSpec net;
    net.n = 1;
    net.kind = NetworkKind::Gaussian;
    GaussianChannel ch;
    ch.gains = Eigen::MatrixXd::Ones(2, 2);
    ch.noiseVars = Eigen::Vector2d(1.0, 1.0);
    ch.powerBudgets = Eigen::Vector2d(4.0, 4.0);
    net.gaussian = ch;
    RelayAssignment a;
    a.dfSet = {1};
    a.order = {0, 1, 2};
    GaussianFactor g;
    g.dfCov.resize(2, 2);
    g.dfCov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    // Independent eigenvalue check confirms this matrix is indefinite.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.dfCov);
    REQUIRE(es.eigenvalues().minCoeff() < -1e-6);
    FactorizedInput fi;
    fi.gaussian = g;
    auto rep = validate(net, a, InputSpec::single(fi));
    REQUIRE_FALSE(rep.ok());
    bool found = false;
    for (const auto& v : rep.violations)
        found = found || v.message.find("not PSD") != std::string::npos;
    CHECK(found);
}

TEST_CASE("pmf slice off by more than 1e-12 is rejected") {
    auto net = tiny_net();
    net.discrete->pmf(2, 0) += 1e-9;
    RelayAssignment a;
    a.dfSet = {1};
    a.order = {0, 1, 2};
    auto rep = validate(net, a, tiny_input_df());
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].path.find("pmf[row 2]") != std::string::npos);
}

TEST_CASE("weights must sum to one") {
    auto net = tiny_net();
    RelayAssignment a;
    a.dfSet = {1};
    a.order = {0, 1, 2};
    auto input = tiny_input_df();
    input.components.push_back(input.components[0]);  // two full-weight copies
    CHECK_FALSE(validate(net, a, input).ok());
}

TEST_CASE("validate accepts every enumerator/generator instance") {
    Rng rng(20240811);
    for (int trial = 0; trial < 30; ++trial) {
        InstanceOptions opt;
        opt.n = trial % 4;
        opt.mixedQ = trial % 3 == 0;
        auto d = random_discrete_instance(rng, opt);
        CHECK(validate(d.net, d.assignment, d.input).ok());
        auto g = random_gaussian_instance(rng, opt);
        CHECK(validate(g.net, g.assignment, g.input).ok());
        // Every enumerated assignment for this network validates too.
        for (const auto& a : enumerate_assignments(g.net.n)) {
            auto input = make_gaussian_input(g.net, a, {0.3, 1.0, 0.7});
            CHECK(validate(g.net, a, input).ok());
        }
    }
}

TEST_CASE("enumerated assignments are bijections with the right endpoints") {
    for (int n = 0; n <= 3; ++n) {
        for (const auto& a : enumerate_assignments(n)) {
            CHECK(a.order.front() == 0);
            CHECK(a.order.back() == n + 1);
            CHECK(static_cast<int>(a.order.size()) == a.M() + 2);
        }
    }
}
