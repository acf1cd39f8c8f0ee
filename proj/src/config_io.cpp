#include "relaynet/config_io.hpp"

#include <fstream>
#include <set>

namespace relaynet {

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError(path + ": unknown field \"" + it.key() + "\"");
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + ": missing required field \"" + key + "\"");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<long>();
}

std::vector<double> as_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> v;
    for (size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], path));
    return v;
}

std::vector<int> as_int_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of integers");
    std::vector<int> v;
    for (size_t i = 0; i < j.size(); ++i)
        v.push_back(static_cast<int>(as_integer(j[i], path)));
    return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty 2-d array");
    const size_t rows = j.size();
    const size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ConfigError(path + ": ragged matrix rows");
        for (size_t c = 0; c < cols; ++c) m(r, c) = as_number(j[r][c], path);
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Eigen::VectorXd as_eigen_vector(const json& j, const std::string& path) {
    auto v = as_vector(j, path);
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

NetworkSpec network_from_json(const json& j, const std::string& path) {
    check_keys(j, {"n", "kind", "discrete", "gaussian"}, path);
    NetworkSpec net;
    net.n = static_cast<int>(as_integer(need(j, "n", path), path + ".n"));
    const std::string kind = need(j, "kind", path).get<std::string>();
    if (kind == "discrete") {
        net.kind = NetworkKind::Discrete;
        const json& d = need(j, "discrete", path);
        const std::string dp = path + ".discrete";
        check_keys(d, {"inputCards", "outputCards", "pmf"}, dp);
        DiscreteChannel ch;
        ch.inputCards = as_int_vector(need(d, "inputCards", dp), dp + ".inputCards");
        ch.outputCards = as_int_vector(need(d, "outputCards", dp), dp + ".outputCards");
        // The pmf arrives as a flat row-major table to keep configs compact.
        auto flat = as_vector(need(d, "pmf", dp), dp + ".pmf");
        const long rows = ch.inputSpace(), cols = ch.outputSpace();
        if (static_cast<long>(flat.size()) != rows * cols)
            throw ConfigError(dp + ".pmf: expected " + std::to_string(rows * cols) +
                              " entries, got " + std::to_string(flat.size()));
        ch.pmf.resize(rows, cols);
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) ch.pmf(r, c) = flat[r * cols + c];
        net.discrete = std::move(ch);
    } else if (kind == "gaussian") {
        net.kind = NetworkKind::Gaussian;
        const json& g = need(j, "gaussian", path);
        const std::string gp = path + ".gaussian";
        check_keys(g, {"gains", "noiseVars", "powerBudgets"}, gp);
        GaussianChannel ch;
        ch.gains = as_matrix(need(g, "gains", gp), gp + ".gains");
        ch.noiseVars = as_eigen_vector(need(g, "noiseVars", gp), gp + ".noiseVars");
        ch.powerBudgets = as_eigen_vector(need(g, "powerBudgets", gp), gp + ".powerBudgets");
        net.gaussian = std::move(ch);
    } else {
        throw ConfigError(path + ".kind: expected \"discrete\" or \"gaussian\"");
    }
    return net;
}

RelayAssignment assignment_from_json(const json& j, const std::string& path) {
    check_keys(j, {"dfSet", "order"}, path);
    RelayAssignment a;
    a.dfSet = as_int_vector(need(j, "dfSet", path), path + ".dfSet");
    a.order = as_int_vector(need(j, "order", path), path + ".order");
    return a;
}

namespace {

std::map<int, double> as_node_map(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object keyed by node id");
    std::map<int, double> m;
    for (auto it = j.begin(); it != j.end(); ++it) {
        try {
            m[std::stoi(it.key())] = as_number(it.value(), path);
        } catch (const std::logic_error&) {
            throw ConfigError(path + ": keys must be node ids, got \"" + it.key() + "\"");
        }
    }
    return m;
}

FactorizedInput factor_from_json(const json& j, const std::string& path) {
    FactorizedInput f;
    if (j.contains("px0") || j.contains("pxDf") || j.contains("cf")) {
        check_keys(j, {"px0", "pxDf", "cf"}, path);
        DiscreteFactor d;
        d.px0 = as_eigen_vector(need(j, "px0", path), path + ".px0");
        if (j.contains("pxDf")) d.pxDf = as_matrix(j["pxDf"], path + ".pxDf");
        if (j.contains("cf")) {
            for (auto it = j["cf"].begin(); it != j["cf"].end(); ++it) {
                const std::string cp = path + ".cf[" + it.key() + "]";
                check_keys(it.value(), {"px", "yhatCard", "pyhat"}, cp);
                DiscreteFactor::CfRelay r;
                r.px = as_eigen_vector(need(it.value(), "px", cp), cp + ".px");
                r.yhatCard =
                    static_cast<int>(as_integer(need(it.value(), "yhatCard", cp), cp));
                r.pyhat = as_matrix(need(it.value(), "pyhat", cp), cp + ".pyhat");
                d.cf[std::stoi(it.key())] = std::move(r);
            }
        }
        f.discrete = std::move(d);
    } else {
        check_keys(j, {"dfCov", "cfInputVars", "compressionVars"}, path);
        GaussianFactor g;
        g.dfCov = as_matrix(need(j, "dfCov", path), path + ".dfCov");
        if (j.contains("cfInputVars"))
            g.cfInputVar = as_node_map(j["cfInputVars"], path + ".cfInputVars");
        if (j.contains("compressionVars"))
            g.compressionVar = as_node_map(j["compressionVars"], path + ".compressionVars");
        f.gaussian = std::move(g);
    }
    return f;
}

json factor_to_json(const FactorizedInput& f) {
    json j = json::object();
    if (f.discrete) {
        const auto& d = *f.discrete;
        j["px0"] = vector_to_json(d.px0);
        if (d.pxDf.size() > 0) j["pxDf"] = matrix_to_json(d.pxDf);
        if (!d.cf.empty()) {
            json cf = json::object();
            for (const auto& [node, r] : d.cf) {
                json rj;
                rj["px"] = vector_to_json(r.px);
                rj["yhatCard"] = r.yhatCard;
                rj["pyhat"] = matrix_to_json(r.pyhat);
                cf[std::to_string(node)] = rj;
            }
            j["cf"] = cf;
        }
    } else if (f.gaussian) {
        const auto& g = *f.gaussian;
        j["dfCov"] = matrix_to_json(g.dfCov);
        json iv = json::object(), cv = json::object();
        for (const auto& [node, v] : g.cfInputVar) iv[std::to_string(node)] = v;
        for (const auto& [node, v] : g.compressionVar) cv[std::to_string(node)] = v;
        if (!g.cfInputVar.empty()) j["cfInputVars"] = iv;
        if (!g.compressionVar.empty()) j["compressionVars"] = cv;
    }
    return j;
}

}  // namespace

InputSpec input_from_json(const json& j, const std::string& path) {
    check_keys(j, {"components"}, path);
    const json& comps = need(j, "components", path);
    if (!comps.is_array() || comps.empty())
        throw ConfigError(path + ".components: expected a non-empty array");
    InputSpec spec;
    for (size_t q = 0; q < comps.size(); ++q) {
        const std::string cp = path + ".components[" + std::to_string(q) + "]";
        const json& c = comps[q];
        if (!c.is_object()) throw ConfigError(cp + ": expected an object");
        if (!c.contains("weight")) throw ConfigError(cp + ": missing \"weight\"");
        json body = c;
        body.erase("weight");
        spec.components.push_back(
            {as_number(c["weight"], cp + ".weight"), factor_from_json(body, cp)});
    }
    return spec;
}

json instance_to_json(const NetworkSpec& net, const RelayAssignment& a, const InputSpec& input) {
    json j;
    json n;
    n["n"] = net.n;
    if (net.kind == NetworkKind::Discrete) {
        n["kind"] = "discrete";
        json d;
        d["inputCards"] = net.discrete->inputCards;
        d["outputCards"] = net.discrete->outputCards;
        json flat = json::array();
        for (Eigen::Index r = 0; r < net.discrete->pmf.rows(); ++r)
            for (Eigen::Index c = 0; c < net.discrete->pmf.cols(); ++c)
                flat.push_back(net.discrete->pmf(r, c));
        d["pmf"] = flat;
        n["discrete"] = d;
    } else {
        n["kind"] = "gaussian";
        json g;
        g["gains"] = matrix_to_json(net.gaussian->gains);
        g["noiseVars"] = vector_to_json(net.gaussian->noiseVars);
        g["powerBudgets"] = vector_to_json(net.gaussian->powerBudgets);
        n["gaussian"] = g;
    }
    j["network"] = n;
    j["assignment"] = {{"dfSet", a.dfSet}, {"order", a.order}};
    json comps = json::array();
    for (const auto& c : input.components) {
        json cj = factor_to_json(c.factor);
        cj["weight"] = c.weight;
        comps.push_back(cj);
    }
    j["input"] = {{"components", comps}};
    return j;
}

namespace {

ScheduleConfig schedule_from_json(const json& j, const std::string& path) {
    check_keys(j, {"variant", "M", "B", "L", "cap", "corrupt"}, path);
    ScheduleConfig c;
    const std::string tok = need(j, "variant", path).get<std::string>();
    auto v = parse_variant(tok);
    if (!v) throw ConfigError(path + ".variant: unknown variant \"" + tok + "\"");
    c.variant = *v;
    c.Mcount = static_cast<int>(as_integer(need(j, "M", path), path + ".M"));
    c.B = as_integer(need(j, "B", path), path + ".B");
    if (j.contains("L")) c.L = as_integer(j["L"], path + ".L");
    if (j.contains("cap")) c.cap = as_integer(j["cap"], path + ".cap");
    if (j.contains("corrupt")) {
        const std::string cp = path + ".corrupt";
        check_keys(j["corrupt"], {"level", "eventIndex", "shiftBlocks"}, cp);
        ScheduleConfig::Corrupt k;
        k.level = static_cast<int>(as_integer(need(j["corrupt"], "level", cp), cp + ".level"));
        k.eventIndex = static_cast<int>(
            as_integer(need(j["corrupt"], "eventIndex", cp), cp + ".eventIndex"));
        k.shiftBlocks = as_integer(need(j["corrupt"], "shiftBlocks", cp), cp + ".shiftBlocks");
        c.corrupt = k;
    }
    return c;
}

EquivConfig equiv_from_json(const json& j, const std::string& path) {
    check_keys(j,
               {"discreteInstances", "gaussianInstances", "maxRelaysDiscrete",
                "maxRelaysGaussian", "seed", "tol", "replayInstance"},
               path);
    EquivConfig c;
    if (j.contains("discreteInstances"))
        c.discreteInstances = static_cast<int>(as_integer(j["discreteInstances"], path));
    if (j.contains("gaussianInstances"))
        c.gaussianInstances = static_cast<int>(as_integer(j["gaussianInstances"], path));
    if (j.contains("maxRelaysDiscrete"))
        c.maxRelaysDiscrete = static_cast<int>(as_integer(j["maxRelaysDiscrete"], path));
    if (j.contains("maxRelaysGaussian"))
        c.maxRelaysGaussian = static_cast<int>(as_integer(j["maxRelaysGaussian"], path));
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("tol")) c.tol = as_number(j["tol"], path + ".tol");
    if (j.contains("replayInstance")) c.replayInstance = j["replayInstance"];
    return c;
}

OracleConfig oracle_from_json(const json& j, const std::string& path) {
    check_keys(j, {"pmfTrials", "quantBins", "quantTrials", "seed", "chainTol", "quantTol"},
               path);
    OracleConfig c;
    if (j.contains("pmfTrials"))
        c.pmfTrials = static_cast<int>(as_integer(j["pmfTrials"], path));
    if (j.contains("quantBins"))
        c.quantBins = static_cast<int>(as_integer(j["quantBins"], path));
    if (j.contains("quantTrials"))
        c.quantTrials = static_cast<int>(as_integer(j["quantTrials"], path));
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("chainTol")) c.chainTol = as_number(j["chainTol"], path + ".chainTol");
    if (j.contains("quantTol")) c.quantTol = as_number(j["quantTol"], path + ".quantTol");
    return c;
}

SearchConfig search_from_json(const json& j, const std::string& path) {
    check_keys(j,
               {"maxRelays", "rhoGrid", "powerFracGrid", "sigmaHatGrid", "mode", "maxSweeps",
                "requireSuccessiveFeasible"},
               path);
    SearchConfig c;
    if (j.contains("maxRelays"))
        c.maxRelays = static_cast<int>(as_integer(j["maxRelays"], path));
    if (j.contains("rhoGrid")) c.rhoGrid = as_vector(j["rhoGrid"], path + ".rhoGrid");
    if (j.contains("powerFracGrid"))
        c.powerFracGrid = as_vector(j["powerFracGrid"], path + ".powerFracGrid");
    if (j.contains("sigmaHatGrid"))
        c.sigmaHatGrid = as_vector(j["sigmaHatGrid"], path + ".sigmaHatGrid");
    if (j.contains("mode")) {
        const std::string m = j["mode"].get<std::string>();
        if (m == "grid")
            c.mode = SearchConfig::Mode::Grid;
        else if (m == "coordinate")
            c.mode = SearchConfig::Mode::CoordinateDescent;
        else
            throw ConfigError(path + ".mode: expected \"grid\" or \"coordinate\"");
    }
    if (j.contains("maxSweeps"))
        c.maxSweeps = static_cast<int>(as_integer(j["maxSweeps"], path));
    if (j.contains("requireSuccessiveFeasible")) {
        if (!j["requireSuccessiveFeasible"].is_boolean())
            throw ConfigError(path + ".requireSuccessiveFeasible: expected a boolean");
        c.requireSuccessiveFeasible = j["requireSuccessiveFeasible"].get<bool>();
    }
    // Grid sanity mirrors the documented parameter domains.
    for (double r : c.rhoGrid)
        if (r < -1.0 || r > 1.0) throw ConfigError(path + ".rhoGrid: |rho| must be <= 1");
    for (double p : c.powerFracGrid)
        if (p < 0.0 || p > 1.0) throw ConfigError(path + ".powerFracGrid: must lie in [0,1]");
    for (double s : c.sigmaHatGrid)
        if (!(s > 0.0)) throw ConfigError(path + ".sigmaHatGrid: variances must be positive");
    if (c.rhoGrid.empty() || c.powerFracGrid.empty() || c.sigmaHatGrid.empty())
        throw ConfigError(path + ": grids must be nonempty");
    return c;
}

}  // namespace

LoadedConfig load_config_json(const json& j) {
    check_keys(j,
               {"schemaVersion", "network", "assignment", "input", "schedule", "equiv", "oracle",
                "search", "seed", "tol"},
               "config");
    const long version = as_integer(need(j, "schemaVersion", "config"), "config.schemaVersion");
    if (version != kSchemaVersion)
        throw ConfigError("config.schemaVersion: expected " + std::to_string(kSchemaVersion) +
                          ", got " + std::to_string(version));
    LoadedConfig c;
    c.raw = j;
    if (j.contains("network")) c.network = network_from_json(j["network"]);
    if (j.contains("assignment")) c.assignment = assignment_from_json(j["assignment"]);
    if (j.contains("input")) c.input = input_from_json(j["input"]);
    if (j.contains("schedule")) c.schedule = schedule_from_json(j["schedule"], "schedule");
    if (j.contains("equiv")) c.equiv = equiv_from_json(j["equiv"], "equiv");
    if (j.contains("oracle")) c.oracle = oracle_from_json(j["oracle"], "oracle");
    if (j.contains("search")) c.search = search_from_json(j["search"], "search");
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("tol")) {
        c.tol = as_number(j["tol"], "config.tol");
        if (!(*c.tol > 0)) throw ConfigError("config.tol: must be positive");
    }
    return c;
}

LoadedConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return load_config_json(j);
}

}  // namespace relaynet
