#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relaynet/random_instances.hpp"
#include "relaynet/search.hpp"

using namespace relaynet;

namespace {

NetworkSpec gauss_net(int n, const Eigen::MatrixXd& gains) {
    NetworkSpec net;
    net.n = n;
    net.kind = NetworkKind::Gaussian;
    GaussianChannel ch;
    ch.gains = gains;
    ch.noiseVars = Eigen::VectorXd::Constant(n + 1, 1.0);
    ch.powerBudgets = Eigen::VectorXd::Constant(n + 1, 1.0);
    net.gaussian = ch;
    return net;
}

NetworkSpec anchor_net() {
    Eigen::MatrixXd g(2, 2);
    g << 2.0, 1.0, 0.0, 1.0;
    return gauss_net(1, g);
}

RelayAssignment df1() {
    RelayAssignment a;
    a.dfSet = {1};
    a.order = {0, 1, 2};
    return a;
}

}  // namespace

TEST_CASE("assignment counts follow sum C(n,k) k!") {
    CHECK(enumerate_assignments(0).size() == 1);
    CHECK(enumerate_assignments(1).size() == 2);
    CHECK(enumerate_assignments(2).size() == 5);   // 1 + 2 + 2
    CHECK(enumerate_assignments(3).size() == 16);  // 1 + 3 + 6 + 6
    CHECK_THROWS_AS(enumerate_assignments(9, 8), CapExceeded);
}

TEST_CASE("a one-point grid returns that point") {
    SearchConfig cfg;
    cfg.rhoGrid = {0.25};
    cfg.powerFracGrid = {1.0};
    cfg.sigmaHatGrid = {1.0};
    auto res = optimize_params(anchor_net(), df1(), cfg);
    CHECK(res.log.size() == 1);
    CHECK(res.bestPoint.params.rho == 0.25);
    CHECK(res.best.rateBits == res.bestPoint.rateBits);
}

TEST_CASE("rho grid on the anchor recovers one bit at rho = 0.5") {
    SearchConfig cfg;
    cfg.rhoGrid.clear();
    for (int i = 0; i <= 9; ++i) cfg.rhoGrid.push_back(0.1 * i);
    auto res = optimize_params(anchor_net(), df1(), cfg);
    CHECK(res.bestPoint.params.rho == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.bestPoint.rateBits == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("coordinate descent refines toward the crossing point") {
    SearchConfig cfg;
    cfg.rhoGrid = {0.0, 0.25, 0.75};  // no grid point at the optimum
    cfg.mode = SearchConfig::Mode::CoordinateDescent;
    auto res = optimize_params(anchor_net(), df1(), cfg);
    CHECK(res.bestPoint.rateBits > 0.999);
    CHECK(std::abs(res.bestPoint.params.rho - 0.5) < 0.1);
}

TEST_CASE("sigma grid spanning the feasibility threshold flags infeasible points") {
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 0.3, 0.0, 1.0;
    auto net = gauss_net(1, g);
    SearchConfig cfg;
    cfg.sigmaHatGrid = {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0};
    cfg.requireSuccessiveFeasible = true;
    auto res = optimize_params(net, direct_assignment(1), cfg);
    int infeasible = 0;
    for (const auto& p : res.log)
        if (!p.feasible) ++infeasible;
    CHECK(infeasible > 0);
    CHECK(infeasible < static_cast<int>(res.log.size()));
    CHECK(res.bestPoint.feasible);
    // The best feasible point also clears the successive-decoding check.
    auto input = make_gaussian_input(net, direct_assignment(1), res.bestPoint.params);
    CHECK(cf_successive_rate(net, input).feasible());
}

TEST_CASE("relay beside the source favors decode-and-forward") {
    Eigen::MatrixXd g(2, 2);
    g << 4.0, 0.2, 0.0, 1.0;  // huge source->relay gain, weak direct link
    auto net = gauss_net(1, g);
    SearchConfig cfg;
    cfg.rhoGrid = {0.0, 0.2, 0.4, 0.6, 0.8};
    cfg.sigmaHatGrid = {0.25, 1.0, 4.0};
    auto ranked = rank_strategies(net, cfg);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].assignment.dfSet == std::vector<int>{1});
}

TEST_CASE("relay beside the destination favors compress-and-forward") {
    Eigen::MatrixXd g(2, 2);
    g << 0.3, 1.0, 0.0, 3.0;  // weak source->relay link
    auto net = gauss_net(1, g);
    SearchConfig cfg;
    cfg.rhoGrid = {0.0, 0.2, 0.4, 0.6, 0.8};
    cfg.sigmaHatGrid = {0.25, 1.0, 4.0};
    auto ranked = rank_strategies(net, cfg);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].assignment.dfSet.empty());
    CHECK(ranked[0].result.bestPoint.rateBits >= ranked[1].result.bestPoint.rateBits - 1e-12);
}

TEST_CASE("top rate dominates the silent-relay direct link") {
    Rng rng(31);
    for (int t = 0; t < 6; ++t) {
        InstanceOptions opt;
        opt.n = 1 + t % 2;
        auto inst = random_gaussian_instance(rng, opt);
        SearchConfig cfg;
        cfg.rhoGrid = {0.0, 0.5};
        cfg.powerFracGrid = {0.0, 1.0};  // 0 keeps the relays silent
        cfg.sigmaHatGrid = {1.0};
        auto ranked = rank_strategies(inst.net, cfg);
        // Direct-link value: destination sees only the source.
        const auto& ch = *inst.net.gaussian;
        const double direct = 0.5 * std::log2(1.0 + ch.gains(0, inst.net.n) *
                                                        ch.gains(0, inst.net.n) *
                                                        ch.powerBudgets[0] /
                                                        ch.noiseVars[inst.net.n]);
        CHECK(ranked.front().result.bestPoint.rateBits >= direct - 1e-9);
    }
}

TEST_CASE("ranking is reproducible and n=0 degenerates to the point-to-point rate") {
    Eigen::MatrixXd g(1, 1);
    g << 1.0;
    auto net = gauss_net(0, g);
    SearchConfig cfg;
    auto ranked = rank_strategies(net, cfg);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].result.bestPoint.rateBits == doctest::Approx(0.5).epsilon(1e-12));

    auto again = rank_strategies(net, cfg);
    CHECK(again[0].result.bestPoint.rateBits == ranked[0].result.bestPoint.rateBits);
}

TEST_CASE("threaded grid evaluation matches single-threaded results") {
    SearchConfig cfg;
    for (int i = 0; i <= 9; ++i) cfg.rhoGrid.push_back(0.1 * i);
    cfg.sigmaHatGrid = {0.5, 1.0, 2.0};
    cfg.threads = 1;
    auto serial = optimize_params(anchor_net(), df1(), cfg);
    cfg.threads = 4;
    auto parallel = optimize_params(anchor_net(), df1(), cfg);
    REQUIRE(serial.log.size() == parallel.log.size());
    for (size_t i = 0; i < serial.log.size(); ++i)
        CHECK(serial.log[i].rateBits == parallel.log[i].rateBits);
    CHECK(serial.bestPoint.params.rho == parallel.bestPoint.params.rho);
}

TEST_CASE("discrete candidate lists are searched in order") {
    Rng rng(77);
    InstanceOptions opt;
    opt.n = 1;
    opt.forceAllCf = true;
    auto a = random_discrete_instance(rng, opt);
    auto b = random_discrete_instance(rng, opt);
    SearchConfig cfg;
    cfg.discreteCandidates = {a.input, b.input};
    auto res = optimize_params(a.net, a.assignment, cfg);
    CHECK(res.log.size() == 2);
    const double r0 = unified_rate_decodable_sets(a.net, a.assignment, a.input).rateBits;
    const double r1 = unified_rate_decodable_sets(a.net, a.assignment, b.input).rateBits;
    CHECK(res.bestPoint.rateBits == doctest::Approx(std::max(r0, r1)));
    CHECK(res.bestPoint.candidateIndex == (r1 > r0 ? 1 : 0));
}

TEST_CASE("search CSV has units in the header") {
    Eigen::MatrixXd g(1, 1);
    g << 1.0;
    auto ranked = rank_strategies(gauss_net(0, g), SearchConfig{});
    auto csv = rank_to_csv(ranked);
    CHECK(csv.find("rate_bits_per_use") != std::string::npos);
}
