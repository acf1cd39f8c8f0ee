#include "relaynet/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace relaynet {

long DiscreteChannel::inputSpace() const {
    long s = 1;
    for (int c : inputCards) s *= c;
    return s;
}

long DiscreteChannel::outputSpace() const {
    long s = 1;
    for (int c : outputCards) s *= c;
    return s;
}

std::vector<int> NetworkSpec::relays() const {
    std::vector<int> r(n);
    for (int i = 0; i < n; ++i) r[i] = i + 1;
    return r;
}

std::vector<int> RelayAssignment::cfSet(int n) const {
    std::vector<int> cf;
    for (int i = 1; i <= n; ++i)
        if (!std::binary_search(dfSet.begin(), dfSet.end(), i)) cf.push_back(i);
    return cf;
}

RelayAssignment direct_assignment(int n) {
    RelayAssignment a;
    a.order = {0, n + 1};
    return a;
}

RelayAssignment full_df_assignment(int n, std::vector<int> order) {
    RelayAssignment a;
    for (int i = 1; i <= n; ++i) a.dfSet.push_back(i);
    a.order = std::move(order);
    return a;
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (const auto& v : violations) os << v.path << ": " << v.message << "\n";
    return os.str();
}

namespace {

void check_rows_normalized(const Eigen::MatrixXd& m, const std::string& path,
                           std::vector<Violation>& out) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double s = m.row(r).sum();
        if (std::abs(s - 1.0) > kNormTol) {
            out.push_back({path + "[row " + std::to_string(r) + "]",
                           "slice sums to " + std::to_string(s) + ", expected 1 within 1e-12"});
        }
        if ((m.row(r).array() < 0).any())
            out.push_back({path + "[row " + std::to_string(r) + "]", "negative probability"});
    }
}

void check_vector_normalized(const Eigen::VectorXd& v, const std::string& path,
                             std::vector<Violation>& out) {
    double s = v.sum();
    if (std::abs(s - 1.0) > kNormTol)
        out.push_back({path, "sums to " + std::to_string(s) + ", expected 1 within 1e-12"});
    if ((v.array() < 0).any()) out.push_back({path, "negative probability"});
}

void validate_network(const NetworkSpec& net, std::vector<Violation>& out) {
    if (net.n < 0) out.push_back({"network.n", "relay count must be >= 0"});
    if (net.kind == NetworkKind::Discrete) {
        if (!net.discrete) {
            out.push_back({"network.discrete", "missing discrete channel"});
            return;
        }
        const auto& d = *net.discrete;
        if (static_cast<int>(d.inputCards.size()) != net.n + 1)
            out.push_back({"network.discrete.inputCards",
                           "expected " + std::to_string(net.n + 1) + " entries"});
        if (static_cast<int>(d.outputCards.size()) != net.n + 1)
            out.push_back({"network.discrete.outputCards",
                           "expected " + std::to_string(net.n + 1) + " entries"});
        for (size_t i = 0; i < d.inputCards.size(); ++i)
            if (d.inputCards[i] < 1)
                out.push_back({"network.discrete.inputCards[" + std::to_string(i) + "]",
                               "alphabet size must be >= 1"});
        for (size_t j = 0; j < d.outputCards.size(); ++j)
            if (d.outputCards[j] < 1)
                out.push_back({"network.discrete.outputCards[" + std::to_string(j) + "]",
                               "alphabet size must be >= 1"});
        if (!out.empty()) return;
        if (d.pmf.rows() != d.inputSpace() || d.pmf.cols() != d.outputSpace()) {
            out.push_back({"network.discrete.pmf",
                           "table is " + std::to_string(d.pmf.rows()) + "x" +
                               std::to_string(d.pmf.cols()) + ", expected " +
                               std::to_string(d.inputSpace()) + "x" +
                               std::to_string(d.outputSpace())});
            return;
        }
        check_rows_normalized(d.pmf, "network.discrete.pmf", out);
    } else {
        if (!net.gaussian) {
            out.push_back({"network.gaussian", "missing gaussian channel"});
            return;
        }
        const auto& g = *net.gaussian;
        if (g.gains.rows() != net.n + 1 || g.gains.cols() != net.n + 1)
            out.push_back({"network.gaussian.gains",
                           "expected (n+1)x(n+1) = " + std::to_string(net.n + 1) + "x" +
                               std::to_string(net.n + 1)});
        if (g.noiseVars.size() != net.n + 1)
            out.push_back({"network.gaussian.noiseVars", "expected n+1 entries"});
        else
            for (Eigen::Index j = 0; j < g.noiseVars.size(); ++j)
                if (!(g.noiseVars[j] > 0))
                    out.push_back({"network.gaussian.noiseVars[" + std::to_string(j) + "]",
                                   "noise variance must be strictly positive"});
        if (g.powerBudgets.size() != net.n + 1)
            out.push_back({"network.gaussian.powerBudgets", "expected n+1 entries"});
        else
            for (Eigen::Index i = 0; i < g.powerBudgets.size(); ++i)
                if (!(g.powerBudgets[i] > 0))
                    out.push_back({"network.gaussian.powerBudgets[" + std::to_string(i) + "]",
                                   "power budget must be strictly positive"});
    }
}

void validate_assignment(const NetworkSpec& net, const RelayAssignment& a,
                         std::vector<Violation>& out) {
    const int M = a.M();
    for (int i : a.dfSet)
        if (i < 1 || i > net.n)
            out.push_back({"assignment.dfSet", "node " + std::to_string(i) + " is not a relay"});
    if (!std::is_sorted(a.dfSet.begin(), a.dfSet.end()) ||
        std::adjacent_find(a.dfSet.begin(), a.dfSet.end()) != a.dfSet.end())
        out.push_back({"assignment.dfSet", "must be sorted and duplicate-free"});
    if (static_cast<int>(a.order.size()) != M + 2) {
        out.push_back({"assignment.order",
                       "expected M+2 = " + std::to_string(M + 2) + " entries"});
        return;
    }
    if (a.order.front() != 0)
        out.push_back({"assignment.order", "order must start at source (pi(1) = 0)"});
    if (a.order.back() != net.n + 1)
        out.push_back({"assignment.order", "order must end at destination (pi(M+2) = n+1)"});
    std::vector<int> expected = a.dfSet;
    expected.push_back(0);
    expected.push_back(net.n + 1);
    std::sort(expected.begin(), expected.end());
    std::vector<int> got = a.order;
    std::sort(got.begin(), got.end());
    if (got != expected)
        out.push_back({"assignment.order",
                       "must be a bijection on {0} u dfSet u {n+1}"});
}

void validate_component(const NetworkSpec& net, const RelayAssignment& a, size_t idx,
                        const FactorizedInput& f, std::vector<Violation>& out) {
    const std::string base = "input.components[" + std::to_string(idx) + "]";
    const auto cf = a.cfSet(net.n);
    if (net.kind == NetworkKind::Discrete) {
        if (!f.discrete) {
            out.push_back({base, "component kind does not match discrete network"});
            return;
        }
        const auto& d = *f.discrete;
        const auto& ch = *net.discrete;
        if (d.px0.size() != ch.inputCards[0]) {
            out.push_back({base + ".px0", "expected |X0| = " + std::to_string(ch.inputCards[0])});
            return;
        }
        check_vector_normalized(d.px0, base + ".px0", out);
        long dfSpace = 1;
        for (int i : a.dfSet) dfSpace *= ch.inputCards[i];
        if (a.M() > 0) {
            if (d.pxDf.rows() != ch.inputCards[0] || d.pxDf.cols() != dfSpace) {
                out.push_back({base + ".pxDf", "expected " + std::to_string(ch.inputCards[0]) +
                                                   "x" + std::to_string(dfSpace)});
                return;
            }
            check_rows_normalized(d.pxDf, base + ".pxDf", out);
        }
        for (int i : cf) {
            auto it = d.cf.find(i);
            if (it == d.cf.end()) {
                out.push_back({base + ".cf", "missing C-F relay " + std::to_string(i)});
                continue;
            }
            const auto& r = it->second;
            const std::string p = base + ".cf[" + std::to_string(i) + "]";
            if (r.px.size() != ch.inputCards[i]) {
                out.push_back({p + ".px", "expected |X" + std::to_string(i) + "|"});
                continue;
            }
            check_vector_normalized(r.px, p + ".px", out);
            if (r.yhatCard < 1) {
                out.push_back({p + ".yhatCard", "alphabet size must be >= 1"});
                continue;
            }
            long rows = static_cast<long>(ch.outputCards[i - 1]) * ch.inputCards[i];
            if (r.pyhat.rows() != rows || r.pyhat.cols() != r.yhatCard) {
                out.push_back({p + ".pyhat", "expected " + std::to_string(rows) + "x" +
                                                 std::to_string(r.yhatCard)});
                continue;
            }
            check_rows_normalized(r.pyhat, p + ".pyhat", out);
        }
    } else {
        if (!f.gaussian) {
            out.push_back({base, "component kind does not match gaussian network"});
            return;
        }
        const auto& g = *f.gaussian;
        const auto& ch = *net.gaussian;
        const int dfDim = a.M() + 1;
        if (g.dfCov.rows() != dfDim || g.dfCov.cols() != dfDim) {
            out.push_back({base + ".dfCov", "expected " + std::to_string(dfDim) + "x" +
                                                std::to_string(dfDim)});
            return;
        }
        if (!g.dfCov.isApprox(g.dfCov.transpose(), 1e-12))
            out.push_back({base + ".dfCov", "must be symmetric"});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.dfCov);
        if (es.eigenvalues().minCoeff() < -kPsdTol)
            out.push_back({base + ".dfCov", "input covariance not PSD"});
        std::vector<int> dfNodes = {0};
        dfNodes.insert(dfNodes.end(), a.dfSet.begin(), a.dfSet.end());
        for (int k = 0; k < dfDim; ++k)
            if (g.dfCov(k, k) > ch.powerBudgets[dfNodes[k]] + 1e-12)
                out.push_back({base + ".dfCov",
                               "diag entry for node " + std::to_string(dfNodes[k]) +
                                   " exceeds power budget"});
        for (int i : cf) {
            const std::string p = base + ".cf[" + std::to_string(i) + "]";
            auto vi = g.cfInputVar.find(i);
            if (vi == g.cfInputVar.end())
                out.push_back({p, "missing input variance for C-F relay"});
            else if (vi->second < 0 || vi->second > ch.powerBudgets[i] + 1e-12)
                out.push_back({p + ".inputVar", "must lie in [0, budget]"});
            auto ci = g.compressionVar.find(i);
            if (ci == g.compressionVar.end())
                out.push_back({p, "missing compression variance for C-F relay"});
            else if (!(ci->second > 0))
                out.push_back({p + ".compressionVar", "must be strictly positive"});
        }
    }
}

}  // namespace

ValidationReport validate(const NetworkSpec& net, const RelayAssignment& assignment,
                          const InputSpec& input) {
    ValidationReport rep;
    validate_network(net, rep.violations);
    validate_assignment(net, assignment, rep.violations);
    if (input.components.empty()) {
        rep.violations.push_back({"input.components", "must be nonempty"});
        return rep;
    }
    double wsum = 0;
    for (size_t q = 0; q < input.components.size(); ++q) {
        const double w = input.components[q].weight;
        if (w < 0)
            rep.violations.push_back(
                {"input.components[" + std::to_string(q) + "].weight", "negative weight"});
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > kNormTol)
        rep.violations.push_back({"input.components", "weights sum to " + std::to_string(wsum) +
                                                          ", expected 1 within 1e-12"});
    // Component checks only make sense on a structurally sound network/assignment.
    if (!rep.ok()) return rep;
    for (size_t q = 0; q < input.components.size(); ++q)
        validate_component(net, assignment, q, input.components[q].factor, rep.violations);
    return rep;
}

}  // namespace relaynet
