#include "relaynet/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "relaynet/textio.hpp"

namespace relaynet {

std::vector<RelayAssignment> enumerate_assignments(int n, int maxRelays) {
    if (n > maxRelays)
        throw CapExceeded("n = " + std::to_string(n) + " exceeds the enumeration bound of " +
                          std::to_string(maxRelays) + " relays");
    std::vector<RelayAssignment> out;
    for (uint32_t mask : subsets_by_cardinality(n)) {
        std::vector<int> dfSet;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) dfSet.push_back(i + 1);
        std::vector<int> perm = dfSet;
        do {
            RelayAssignment a;
            a.dfSet = dfSet;
            a.order.push_back(0);
            a.order.insert(a.order.end(), perm.begin(), perm.end());
            a.order.push_back(n + 1);
            out.push_back(std::move(a));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

InputSpec make_gaussian_input(const NetworkSpec& net, const RelayAssignment& assignment,
                              const GaussianParams& p) {
    const auto& ch = *net.gaussian;
    const int M = assignment.M();

    // Chain order (source, pi(2), ..., pi(M+1)); relays run at
    // powerFrac * budget, the source at full budget.
    std::vector<int> chain(assignment.order.begin(), assignment.order.end() - 1);
    std::vector<double> power(M + 1);
    for (int a = 0; a <= M; ++a)
        power[a] = (chain[a] == 0 ? 1.0 : p.powerFrac) * ch.powerBudgets[chain[a]];

    Eigen::MatrixXd chainCov(M + 1, M + 1);
    for (int a = 0; a <= M; ++a)
        for (int b = 0; b <= M; ++b)
            chainCov(a, b) = std::pow(p.rho, std::abs(a - b)) * std::sqrt(power[a] * power[b]);

    // Reorder into the storage convention (source, dfSet ascending).
    std::vector<int> storage = {0};
    storage.insert(storage.end(), assignment.dfSet.begin(), assignment.dfSet.end());
    GaussianFactor fac;
    fac.dfCov.resize(M + 1, M + 1);
    auto chainPos = [&](int node) {
        return static_cast<int>(std::find(chain.begin(), chain.end(), node) - chain.begin());
    };
    for (int a = 0; a <= M; ++a)
        for (int b = 0; b <= M; ++b)
            fac.dfCov(a, b) = chainCov(chainPos(storage[a]), chainPos(storage[b]));

    for (int i : assignment.cfSet(net.n)) {
        fac.cfInputVar[i] = p.powerFrac * ch.powerBudgets[i];
        fac.compressionVar[i] = p.sigmaHat;
    }
    FactorizedInput f;
    f.gaussian = std::move(fac);
    return InputSpec::single(std::move(f));
}

namespace {

struct Candidate {
    GaussianParams params;
    int candidateIndex = -1;
    InputSpec input;
};

EvaluatedPoint evaluate_point(const NetworkSpec& net, const RelayAssignment& assignment,
                              const SearchConfig& cfg, const Candidate& cand) {
    EvaluatedPoint pt;
    pt.params = cand.params;
    pt.candidateIndex = cand.candidateIndex;
    if (!validate(net, assignment, cand.input).ok()) {
        pt.feasible = false;
        return pt;
    }
    if (cfg.requireSuccessiveFeasible && assignment.M() == 0) {
        if (!cf_successive_rate(net, cand.input).feasible()) {
            pt.feasible = false;
            return pt;
        }
    }
    pt.rateBits = unified_rate_decodable_sets(net, assignment, cand.input).rateBits;
    return pt;
}

std::vector<Candidate> grid_candidates(const NetworkSpec& net, const RelayAssignment& assignment,
                                       const SearchConfig& cfg) {
    std::vector<Candidate> cands;
    if (net.kind == NetworkKind::Discrete) {
        if (cfg.discreteCandidates.empty())
            throw std::invalid_argument(
                "searching a discrete network requires a non-empty candidate list");
        for (size_t i = 0; i < cfg.discreteCandidates.size(); ++i)
            cands.push_back({GaussianParams{}, static_cast<int>(i), cfg.discreteCandidates[i]});
        return cands;
    }
    // Dimensions that cannot affect the rate collapse to a single point.
    const bool hasDf = assignment.M() > 0;
    const bool hasCf = !assignment.cfSet(net.n).empty();
    const std::vector<double> rhos = hasDf ? cfg.rhoGrid : std::vector<double>{0.0};
    const std::vector<double> sigmas = hasCf ? cfg.sigmaHatGrid : std::vector<double>{1.0};
    for (double rho : rhos)
        for (double pf : cfg.powerFracGrid)
            for (double sh : sigmas) {
                GaussianParams p{rho, pf, sh};
                cands.push_back({p, -1, make_gaussian_input(net, assignment, p)});
            }
    return cands;
}

std::vector<EvaluatedPoint> evaluate_all(const NetworkSpec& net,
                                         const RelayAssignment& assignment,
                                         const SearchConfig& cfg,
                                         const std::vector<Candidate>& cands) {
    std::vector<EvaluatedPoint> pts(cands.size());
    const int threads = std::max(1, cfg.threads);
    if (threads == 1 || cands.size() < 2) {
        for (size_t i = 0; i < cands.size(); ++i)
            pts[i] = evaluate_point(net, assignment, cfg, cands[i]);
        return pts;
    }
    // Grid points are independent; results land in their slots so the
    // merge order is fixed regardless of thread interleaving.
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (size_t i = next.fetch_add(1); i < cands.size(); i = next.fetch_add(1))
                pts[i] = evaluate_point(net, assignment, cfg, cands[i]);
        });
    for (auto& th : pool) th.join();
    return pts;
}

std::vector<double> refined_axis(const std::vector<double>& grid, double center, double lo,
                                 double hi) {
    // Five points spanning the bracket around the incumbent.
    std::vector<double> axis;
    double left = lo, right = hi;
    for (double g : grid) {
        if (g < center) left = std::max(left, g);
        if (g > center) right = std::min(right, g);
    }
    for (int i = 0; i <= 4; ++i) axis.push_back(left + (right - left) * i / 4.0);
    axis.push_back(center);
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
    return axis;
}

}  // namespace

OptimizeResult optimize_params(const NetworkSpec& net, const RelayAssignment& assignment,
                               const SearchConfig& cfg) {
    auto cands = grid_candidates(net, assignment, cfg);
    if (cands.empty()) throw std::runtime_error("empty parameter grid");
    OptimizeResult res;
    res.log = evaluate_all(net, assignment, cfg, cands);

    auto pick_best = [&](const std::vector<EvaluatedPoint>& pts) -> std::optional<size_t> {
        std::optional<size_t> best;
        for (size_t i = 0; i < pts.size(); ++i) {
            if (!pts[i].feasible) continue;
            if (!best || pts[i].rateBits > pts[*best].rateBits) best = i;
        }
        return best;
    };
    auto bestIdx = pick_best(res.log);
    if (!bestIdx)
        throw std::runtime_error("no feasible grid point for this assignment");
    res.bestPoint = res.log[*bestIdx];
    InputSpec bestInput = cands[*bestIdx].input;

    if (cfg.mode == SearchConfig::Mode::CoordinateDescent && net.kind == NetworkKind::Gaussian) {
        GaussianParams cur = res.bestPoint.params;
        double curRate = res.bestPoint.rateBits;
        for (int sweep = 0; sweep < cfg.maxSweeps; ++sweep) {
            const double before = curRate;
            for (int dim = 0; dim < 3; ++dim) {
                std::vector<double> axis;
                if (dim == 0 && assignment.M() > 0)
                    axis = refined_axis(cfg.rhoGrid, cur.rho, -1.0, 1.0);
                else if (dim == 1)
                    axis = refined_axis(cfg.powerFracGrid, cur.powerFrac, 0.0, 1.0);
                else if (dim == 2 && !assignment.cfSet(net.n).empty())
                    axis = refined_axis(cfg.sigmaHatGrid, cur.sigmaHat, 1e-6,
                                        cfg.sigmaHatGrid.empty() ? 1.0 : cfg.sigmaHatGrid.back());
                if (axis.empty()) continue;
                std::vector<Candidate> local;
                for (double v : axis) {
                    GaussianParams p = cur;
                    (dim == 0 ? p.rho : dim == 1 ? p.powerFrac : p.sigmaHat) = v;
                    local.push_back({p, -1, make_gaussian_input(net, assignment, p)});
                }
                auto pts = evaluate_all(net, assignment, cfg, local);
                for (auto& pt : pts) res.log.push_back(pt);
                auto b = pick_best(pts);
                if (b && pts[*b].rateBits > curRate) {
                    curRate = pts[*b].rateBits;
                    cur = pts[*b].params;
                    bestInput = local[*b].input;
                }
            }
            if (curRate - before <= cfg.relImprovementStop * std::max(1.0, std::abs(before)))
                break;
        }
        res.bestPoint.params = cur;
        res.bestPoint.rateBits = curRate;
        res.bestPoint.feasible = true;
    }

    res.best = unified_rate_decodable_sets(net, assignment, bestInput);
    return res;
}

std::vector<RankedStrategy> rank_strategies(const NetworkSpec& net, const SearchConfig& cfg) {
    std::vector<RankedStrategy> ranked;
    for (auto& a : enumerate_assignments(net.n, cfg.maxRelays))
        ranked.push_back({a, optimize_params(net, a, cfg)});
    std::sort(ranked.begin(), ranked.end(), [](const RankedStrategy& a, const RankedStrategy& b) {
        if (a.result.bestPoint.rateBits != b.result.bestPoint.rateBits)
            return a.result.bestPoint.rateBits > b.result.bestPoint.rateBits;
        if (a.assignment.dfSet.size() != b.assignment.dfSet.size())
            return a.assignment.dfSet.size() < b.assignment.dfSet.size();
        return a.assignment.order < b.assignment.order;
    });
    return ranked;
}

std::string rank_to_csv(const std::vector<RankedStrategy>& ranked) {
    std::ostringstream os;
    os << "rank,df_set,order,rho,power_frac,sigma_hat_var,rate_bits_per_use,"
          "binding_node,binding_value_bits_per_use\n";
    int r = 1;
    for (const auto& s : ranked) {
        const auto& rep = s.result.best;
        const PerNodeConstraint* binding = &rep.perNode.front();
        for (const auto& c : rep.perNode)
            if (c.level == rep.bindingLevel) binding = &c;
        os << r++ << "," << csv_field(join_ints(s.assignment.dfSet)) << ","
           << csv_field(join_ints(s.assignment.order)) << ","
           << format_sig12(s.result.bestPoint.params.rho) << ","
           << format_sig12(s.result.bestPoint.params.powerFrac) << ","
           << format_sig12(s.result.bestPoint.params.sigmaHat) << ","
           << format_sig12(s.result.bestPoint.rateBits) << "," << binding->nodeId << ","
           << format_sig12(binding->valueBits) << "\n";
    }
    return os.str();
}

}  // namespace relaynet
