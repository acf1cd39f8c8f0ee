#include "relaynet/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relaynet {

namespace {

std::vector<int> pool_subset(const std::vector<int>& pool, uint32_t mask) {
    std::vector<int> nodes;
    for (size_t i = 0; i < pool.size(); ++i)
        if (mask & (1u << i)) nodes.push_back(pool[i]);
    return nodes;
}

VarSet x_of(const VariableRegistry& reg, const std::vector<int>& pool, uint32_t mask) {
    return reg.x(pool_subset(pool, mask));
}

VarSet y_of(const VariableRegistry& reg, const std::vector<int>& pool, uint32_t mask) {
    VarSet s = 0;
    for (size_t i = 0; i < pool.size(); ++i)
        if (mask & (1u << i)) s |= reg.y(pool[i]);
    return s;
}

VarSet yhat_of(const VariableRegistry& reg, const std::vector<int>& pool, uint32_t mask) {
    return reg.yhat(pool_subset(pool, mask));
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

SubsetContext make_context(const VariableRegistry& reg, const NetworkSpec& net,
                           const RelayAssignment& assignment, int level) {
    const auto& order = assignment.order;
    const int M = assignment.M();
    SubsetContext ctx;
    ctx.level = level;
    ctx.nodeId = order[level - 1];
    std::vector<int> coop(order.begin(), order.begin() + (level - 1));
    std::vector<int> known(order.begin() + (level - 1),
                           order.begin() + std::min<int>(M + 1, static_cast<int>(order.size())));
    ctx.coopX = reg.x(coop);
    ctx.knownX = reg.x(known);
    ctx.obsY = reg.y(ctx.nodeId);
    ctx.pool = assignment.cfSet(net.n);
    return ctx;
}

double rate_constraint_term(const Evaluator& ev, MiCache& cache, const SubsetContext& ctx,
                            uint32_t T, uint32_t S) {
    const auto& reg = ev.registry();
    const uint32_t rest = T & ~S;
    const VarSet xS = x_of(reg, ctx.pool, S);
    const VarSet xRest = x_of(reg, ctx.pool, rest);
    const VarSet xT = x_of(reg, ctx.pool, T);
    const VarSet yhatRest = yhat_of(reg, ctx.pool, rest);
    const double first = ev.mi(cache, ctx.coopX | xS, yhatRest | ctx.obsY, xRest | ctx.knownX);
    if (S == 0) return first;
    const double second = ev.mi(cache, y_of(reg, ctx.pool, S), yhat_of(reg, ctx.pool, S),
                                ctx.coopX | ctx.knownX | xT | ctx.obsY | yhatRest);
    return first - second;
}

double decodability_term(const Evaluator& ev, MiCache& cache, const SubsetContext& ctx,
                         uint32_t T, uint32_t S) {
    const auto& reg = ev.registry();
    const uint32_t rest = T & ~S;
    const VarSet allDfX = ctx.coopX | ctx.knownX;
    const VarSet xS = x_of(reg, ctx.pool, S);
    const VarSet xRest = x_of(reg, ctx.pool, rest);
    const VarSet yhatRest = yhat_of(reg, ctx.pool, rest);
    const double first = ev.mi(cache, xS, yhatRest | ctx.obsY, allDfX | xRest);
    const double second =
        ev.mi(cache, y_of(reg, ctx.pool, S), yhat_of(reg, ctx.pool, S),
              allDfX | x_of(reg, ctx.pool, T) | ctx.obsY | yhatRest);
    return first - second;
}

std::vector<int> largest_decodable_set(const Evaluator& ev, MiCache& cache,
                                       const SubsetContext& ctx, bool strict) {
    const int P = static_cast<int>(ctx.pool.size());
    if (P > kMaxDecodablePool)
        throw CapExceeded("candidate pool of " + std::to_string(P) +
                          " C-F relays exceeds the enumeration bound of " +
                          std::to_string(kMaxDecodablePool));
    auto passes = [&](double v) { return strict ? v > kStrictEps : v >= -kStrictEps; };
    auto qualifies = [&](uint32_t D) {
        for (uint32_t S = D; S; S = (S - 1) & D)
            if (!passes(decodability_term(ev, cache, ctx, D, S))) return false;
        return true;
    };
    uint32_t unionMask = 0;
    std::vector<uint32_t> found;
    for (uint32_t D : subsets_by_cardinality(P)) {
        if (qualifies(D)) {
            found.push_back(D);
            unionMask |= D;
        }
    }
    if (std::find(found.begin(), found.end(), unionMask) == found.end())
        throw UniquenessViolation(
            "union of qualifying subsets fails re-verification at node " +
            std::to_string(ctx.nodeId) + "; the instance is numerically degenerate");
    return pool_subset(ctx.pool, unionMask);
}

std::vector<int> largest_decodable_set(const NetworkSpec& net, const RelayAssignment& assignment,
                                       const InputSpec& input, int level, bool strict) {
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    return largest_decodable_set(ev, cache, make_context(ev.registry(), net, assignment, level),
                                 strict);
}

namespace {

uint32_t nodes_to_mask(const std::vector<int>& pool, const std::vector<int>& nodes) {
    uint32_t m = 0;
    for (int node : nodes) {
        auto it = std::find(pool.begin(), pool.end(), node);
        require(it != pool.end(), "node " + std::to_string(node) + " is not in the C-F pool");
        m |= 1u << (it - pool.begin());
    }
    return m;
}

// min over S <= T of the rate constraint; reports the first binding S in
// cardinality/lex order.
std::pair<double, uint32_t> min_over_s(const Evaluator& ev, MiCache& cache,
                                       const SubsetContext& ctx, uint32_t T) {
    double best = 0.0;
    uint32_t bestS = 0;
    bool first = true;
    const int card = __builtin_popcount(T);
    // Enumerate subsets of T in the canonical order of its positions.
    std::vector<int> bits;
    for (int i = 0; i < 32; ++i)
        if (T & (1u << i)) bits.push_back(i);
    for (uint32_t sub : subsets_by_cardinality(card)) {
        uint32_t S = 0;
        for (int i = 0; i < card; ++i)
            if (sub & (1u << i)) S |= 1u << bits[i];
        const double v = rate_constraint_term(ev, cache, ctx, T, S);
        if (first || v < best) {
            best = v;
            bestS = S;
            first = false;
        }
    }
    return {best, bestS};
}

PerNodeConstraint constraint_for_set(const Evaluator& ev, MiCache& cache,
                                     const SubsetContext& ctx, uint32_t T) {
    auto [v, S] = min_over_s(ev, cache, ctx, T);
    PerNodeConstraint c;
    c.level = ctx.level;
    c.nodeId = ctx.nodeId;
    c.decodableSet = pool_subset(ctx.pool, T);
    c.bindingSubset = pool_subset(ctx.pool, S);
    c.valueBits = v;
    return c;
}

RateReport assemble_report(std::vector<PerNodeConstraint> perNode,
                           const RelayAssignment& assignment) {
    RateReport rep;
    rep.perNode = std::move(perNode);
    rep.assignment = assignment;
    rep.rateBits = rep.perNode.front().valueBits;
    rep.bindingLevel = rep.perNode.front().level;
    for (const auto& c : rep.perNode)
        if (c.valueBits < rep.rateBits) {
            rep.rateBits = c.valueBits;
            rep.bindingLevel = c.level;
        }
    return rep;
}

enum class SetRule { DecodableSets, BestSubsets };

RateReport unified_rate(const NetworkSpec& net, const RelayAssignment& assignment,
                        const InputSpec& input, SetRule rule) {
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    const int M = assignment.M();
    std::vector<PerNodeConstraint> perNode;
    for (int k = 2; k <= M + 2; ++k) {
        SubsetContext ctx = make_context(ev.registry(), net, assignment, k);
        if (rule == SetRule::DecodableSets) {
            auto D = largest_decodable_set(ev, cache, ctx, /*strict=*/true);
            perNode.push_back(constraint_for_set(ev, cache, ctx, nodes_to_mask(ctx.pool, D)));
        } else {
            const int P = static_cast<int>(ctx.pool.size());
            if (P > kMaxBestSubsetPool)
                throw CapExceeded("candidate pool of " + std::to_string(P) +
                                  " C-F relays exceeds the double-enumeration bound of " +
                                  std::to_string(kMaxBestSubsetPool));
            std::optional<PerNodeConstraint> best;
            for (uint32_t T : subsets_by_cardinality(P)) {
                PerNodeConstraint c = constraint_for_set(ev, cache, ctx, T);
                if (!best || c.valueBits > best->valueBits) best = c;
            }
            perNode.push_back(*best);
        }
    }
    return assemble_report(std::move(perNode), assignment);
}

}  // namespace

RateReport df_multilevel_rate(const NetworkSpec& net, const RelayAssignment& assignment,
                              const InputSpec& input) {
    require(assignment.M() == net.n, "df_multilevel_rate requires every relay in dfSet");
    // Straight transcription of the multi-level constraint chain, kept
    // independent of the subset machinery on purpose: the reduction
    // identity against the unified operation is a two-route check.
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    const auto& reg = ev.registry();
    const auto& order = assignment.order;
    std::vector<PerNodeConstraint> perNode;
    for (int k = 2; k <= net.n + 2; ++k) {
        std::vector<int> coop(order.begin(), order.begin() + (k - 1));
        std::vector<int> known(order.begin() + (k - 1), order.end() - 1);
        PerNodeConstraint c;
        c.level = k;
        c.nodeId = order[k - 1];
        c.valueBits = ev.mi(cache, reg.x(coop), reg.y(order[k - 1]), reg.x(known));
        perNode.push_back(c);
    }
    return assemble_report(std::move(perNode), assignment);
}

CfSuccessiveResult cf_successive_rate(const NetworkSpec& net, const InputSpec& input) {
    const RelayAssignment assignment = direct_assignment(net.n);
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    const auto& reg = ev.registry();
    const auto pool = assignment.cfSet(net.n);
    const int P = static_cast<int>(pool.size());
    const VarSet xAll = reg.x(pool);
    const VarSet yDest = reg.y(net.destination());
    const VarSet yhatAll = reg.yhat(pool);

    // Recovery of the compressions ahead of the message: for every S, the
    // compression indices of S must fit through what the destination has.
    for (uint32_t S : subsets_by_cardinality(P)) {
        if (S == 0) continue;
        const uint32_t rest = (~S) & ((P == 32 ? ~0u : (1u << P) - 1u));
        const VarSet xS = x_of(reg, pool, S);
        const VarSet xRest = x_of(reg, pool, rest);
        const VarSet yhatRest = yhat_of(reg, pool, rest);
        const double lhs = ev.mi(cache, xS, yhatRest | yDest, xRest);
        const double rhs = ev.mi(cache, y_of(reg, pool, S), yhat_of(reg, pool, S),
                                 xAll | yDest | yhatRest);
        if (lhs - rhs < -kStrictEps) {
            CfSuccessiveResult r;
            r.violatingSubset = pool_subset(pool, S);
            return r;
        }
    }
    PerNodeConstraint c;
    c.level = 2;
    c.nodeId = net.destination();
    c.decodableSet = pool;
    c.valueBits = ev.mi(cache, reg.x({0}), yhatAll | yDest, xAll);
    CfSuccessiveResult r;
    r.report = assemble_report({c}, assignment);
    return r;
}

double nnc_subset_rate(const NetworkSpec& net, const InputSpec& input,
                       const std::vector<int>& T) {
    const RelayAssignment assignment = direct_assignment(net.n);
    for (int node : T)
        require(node >= 1 && node <= net.n, "decoding subset must contain relay nodes only");
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    SubsetContext ctx = make_context(ev.registry(), net, assignment, 2);
    return min_over_s(ev, cache, ctx, nodes_to_mask(ctx.pool, T)).first;
}

RateReport cf_joint_rate(const NetworkSpec& net, const InputSpec& input) {
    return unified_rate(net, direct_assignment(net.n), input, SetRule::DecodableSets);
}

RateReport unified_rate_decodable_sets(const NetworkSpec& net, const RelayAssignment& assignment,
                                       const InputSpec& input) {
    return unified_rate(net, assignment, input, SetRule::DecodableSets);
}

RateReport unified_rate_best_subsets(const NetworkSpec& net, const RelayAssignment& assignment,
                                     const InputSpec& input) {
    return unified_rate(net, assignment, input, SetRule::BestSubsets);
}

SubsetOptimalityReport verify_subset_optimality(const NetworkSpec& net,
                                                const RelayAssignment& assignment,
                                                const InputSpec& input, double tol) {
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    SubsetOptimalityReport rep;
    const int M = assignment.M();
    for (int k = 2; k <= M + 2; ++k) {
        SubsetContext ctx = make_context(ev.registry(), net, assignment, k);
        const int P = static_cast<int>(ctx.pool.size());
        if (P > kMaxBestSubsetPool)
            throw CapExceeded("candidate pool exceeds the double-enumeration bound");
        SubsetOptimalityReport::PerLevel lvl;
        lvl.level = k;
        lvl.nodeId = ctx.nodeId;
        lvl.decodableSet = largest_decodable_set(ev, cache, ctx, /*strict=*/true);
        const uint32_t dMask = nodes_to_mask(ctx.pool, lvl.decodableSet);

        std::vector<std::pair<uint32_t, double>> values;
        double maxV = 0.0;
        bool first = true;
        for (uint32_t T : subsets_by_cardinality(P)) {
            const double v = min_over_s(ev, cache, ctx, T).first;
            values.emplace_back(T, v);
            if (first || v > maxV) maxV = v;
            first = false;
            if (T == dMask) lvl.valueAtDecodable = v;
        }
        lvl.maxValue = maxV;
        for (auto& [T, v] : values)
            if (v >= maxV - tol) lvl.maximizers.push_back(pool_subset(ctx.pool, T));
        lvl.ok = lvl.valueAtDecodable >= maxV - tol;
        rep.ok = rep.ok && lvl.ok;
        rep.perLevel.push_back(std::move(lvl));
    }
    return rep;
}

ClassicSingleRelayRates classic_single_relay_rates(const NetworkSpec& net,
                                                   const RelayAssignment& assignment,
                                                   const InputSpec& input) {
    require(net.n == 1, "classic_single_relay_rates requires exactly one relay");
    Evaluator ev(net, assignment, input);
    MiCache cache(&ev.components());
    const auto& reg = ev.registry();
    const VarSet x0 = reg.x({0});
    const VarSet x1 = reg.x({1});
    const VarSet y1 = reg.y(1);
    const VarSet y2 = reg.y(2);

    ClassicSingleRelayRates out;
    out.dfRate = std::min(ev.mi(cache, x0, y1, x1), ev.mi(cache, x0 | x1, y2, kEmptySet));
    if (assignment.M() == 0) {
        const VarSet yh1 = reg.yhat({1});
        const double main = ev.mi(cache, x0, yh1 | y2, x1);
        const double gap = ev.mi(cache, y1, yh1, x1 | y2) - ev.mi(cache, x1, y2, kEmptySet);
        out.cfSuccessiveRate = main;
        out.cfSuccessiveFeasible = gap <= kStrictEps;
        out.cfJointRate = main - std::max(0.0, gap);
    }
    return out;
}

}  // namespace relaynet
