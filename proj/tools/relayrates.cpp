// Command-line front end: reads a JSON config, dispatches the requested
// computation, and writes a machine-readable report.
//
// Exit codes: 0 ok, 1 property failure, 2 validation/config error,
// 3 resource cap exceeded.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "relaynet/config_io.hpp"
#include "relaynet/random_instances.hpp"
#include "relaynet/rates.hpp"
#include "relaynet/schedule.hpp"
#include "relaynet/search.hpp"
#include "relaynet/textio.hpp"

using namespace relaynet;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;

struct Options {
    std::string configPath;
    std::string outPath;
    std::string format = "json";
    uint64_t seed = 0;
    bool seedSet = false;
    double tol = 0.0;
    bool tolSet = false;
    int threads = 1;
};

void write_output(const Options& opt, const std::string& content) {
    if (opt.outPath.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(opt.outPath, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + opt.outPath);
    out << content;
}

json report_to_json(const RateReport& rep, const char* setKey) {
    json j;
    j["rateBits"] = rep.rateBits;
    j["bindingLevel"] = rep.bindingLevel;
    json per = json::array();
    for (const auto& c : rep.perNode) {
        json cj;
        cj["level"] = c.level;
        cj["node"] = c.nodeId;
        cj[setKey] = c.decodableSet;
        cj["bindingSubset"] = c.bindingSubset;
        cj["valueBits"] = c.valueBits;
        per.push_back(cj);
    }
    j["perNode"] = per;
    return j;
}

void report_to_csv(std::ostringstream& os, const RateReport& rep, const std::string& section) {
    for (const auto& c : rep.perNode)
        os << section << ",constraint," << c.level << "," << c.nodeId << ","
           << csv_field(join_ints(c.decodableSet)) << ","
           << csv_field(join_ints(c.bindingSubset)) << "," << format_sig12(c.valueBits) << "\n";
    os << section << ",rate,,,,," << format_sig12(rep.rateBits) << "\n";
}

int cmd_rate(const Options& opt) {
    LoadedConfig cfg = load_config_file(opt.configPath);
    if (!cfg.network || !cfg.assignment || !cfg.input) {
        std::cerr << "rate: config requires network, assignment, and input sections\n";
        return kExitValidation;
    }
    auto report = validate(*cfg.network, *cfg.assignment, *cfg.input);
    if (!report.ok()) {
        std::cerr << report.summary();
        return kExitValidation;
    }
    RateReport thm1 = unified_rate_decodable_sets(*cfg.network, *cfg.assignment, *cfg.input);
    RateReport thm2 = unified_rate_best_subsets(*cfg.network, *cfg.assignment, *cfg.input);
    if (opt.format == "json") {
        json j;
        j["schemaVersion"] = kSchemaVersion;
        j["units"] = "bits/use";
        j["decodableSetRate"] = report_to_json(thm1, "decodableSet");
        j["bestSubsetRate"] = report_to_json(thm2, "chosenSubset");
        write_output(opt, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "section,row,level,node,set,binding_subset,value_bits_per_use\n";
        report_to_csv(os, thm1, "decodable_set");
        report_to_csv(os, thm2, "best_subset");
        write_output(opt, os.str());
    }
    return kExitOk;
}

int cmd_schedule(const Options& opt) {
    LoadedConfig cfg = load_config_file(opt.configPath);
    if (!cfg.schedule) {
        std::cerr << "schedule: config requires a schedule section\n";
        return kExitValidation;
    }
    const auto& sc = *cfg.schedule;
    Schedule s = (sc.variant == ScheduleVariant::BlockByBlock)
                     ? build_schedule_thm1(sc.Mcount, sc.B, sc.L, sc.cap)
                     : build_schedule_thm2(sc.Mcount, sc.B, sc.cap);
    if (sc.corrupt) {
        int seen = 0;
        bool applied = false;
        for (auto& e : s.decodeEvents) {
            if (e.level != sc.corrupt->level) continue;
            if (seen++ == sc.corrupt->eventIndex) {
                e.block += sc.corrupt->shiftBlocks;
                applied = true;
                break;
            }
        }
        if (!applied) {
            std::cerr << "schedule.corrupt: no event matches the given level/index\n";
            return kExitValidation;
        }
    }
    // With a model in the config, annotate the per-relay compression rates.
    if (cfg.network && cfg.assignment && cfg.input) {
        auto v = validate(*cfg.network, *cfg.assignment, *cfg.input);
        if (!v.ok()) {
            std::cerr << v.summary();
            return kExitValidation;
        }
        Evaluator ev(*cfg.network, *cfg.assignment, *cfg.input);
        attach_compression_rates(s, ev, cfg.assignment->cfSet(cfg.network->n));
    }
    CausalityReport verdict = verify_schedule(s);
    const Rational frac = effective_rate_fraction(s);
    const Rational closed = closed_form_rate_fraction(s);
    std::cerr << "verdict=" << (verdict.ok() ? "ok" : "violation") << " fraction=" << frac.str()
              << " (" << format_sig12(frac.value()) << ")\n";
    if (opt.format == "json") {
        json j;
        j["schemaVersion"] = kSchemaVersion;
        j["variant"] = variant_token(s.variant);
        j["verdict"] = verdict.ok() ? "ok" : "violation";
        if (!verdict.ok()) {
            j["violation"] = {{"level", verdict.violation->level},
                              {"block", verdict.violation->block},
                              {"detail", verdict.violation->detail}};
        }
        j["fraction"] = frac.str();
        j["fractionDecimal"] = frac.value();
        j["closedFormFraction"] = closed.str();
        if (!s.compressionRates.empty()) {
            json ann = json::array();
            for (const auto& a : s.compressionRates)
                ann.push_back({{"node", a.nodeId}, {"rateBits", a.rateBits}});
            j["compressionRates"] = ann;
        }
        j["timelineCsv"] = schedule_to_csv(s);
        write_output(opt, j.dump(2) + "\n");
    } else {
        // Timeline rows, then a summary block in the same column layout.
        std::ostringstream os;
        os << schedule_to_csv(s);
        os << "# verdict," << (verdict.ok() ? "ok" : verdict.summary()) << "\n";
        os << "# fraction," << frac.str() << "," << format_sig12(frac.value()) << "\n";
        write_output(opt, os.str());
    }
    if (!verdict.ok()) return kExitPropertyFailure;
    return kExitOk;
}

struct SuiteStats {
    std::string name;
    long checks = 0;
    long passes = 0;
    double worst = 0.0;  // largest |discrepancy| seen

    void record(bool pass, double discrepancy) {
        ++checks;
        if (pass) ++passes;
        worst = std::max(worst, std::abs(discrepancy));
    }
};

struct EquivRun {
    double tol = 1e-9;
    std::vector<SuiteStats> suites;
    json failures = json::array();

    SuiteStats& suite(const std::string& name) {
        for (auto& s : suites)
            if (s.name == name) return s;
        suites.push_back({name});
        return suites.back();
    }

    void check(const std::string& name, const RandomInstance& inst, double discrepancy) {
        const bool pass = std::abs(discrepancy) <= tol;
        suite(name).record(pass, discrepancy);
        if (!pass) {
            json f;
            f["suite"] = name;
            f["discrepancy"] = discrepancy;
            f["instance"] = instance_to_json(inst.net, inst.assignment, inst.input);
            failures.push_back(f);
        }
    }

    void check_flag(const std::string& name, const RandomInstance& inst, bool pass) {
        suite(name).record(pass, pass ? 0.0 : 1.0);
        if (!pass) {
            json f;
            f["suite"] = name;
            f["instance"] = instance_to_json(inst.net, inst.assignment, inst.input);
            failures.push_back(f);
        }
    }
};

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
    for (int x : a)
        if (std::find(b.begin(), b.end(), x) == b.end()) return false;
    return true;
}

void equiv_reduction_checks(EquivRun& run, const RandomInstance& allDf,
                            const RandomInstance& allCf) {
    const double dfBoth = unified_rate_decodable_sets(allDf.net, allDf.assignment, allDf.input)
                              .rateBits -
                          df_multilevel_rate(allDf.net, allDf.assignment, allDf.input).rateBits;
    run.check("reduction_all_df", allDf, dfBoth);
    const double cfBoth =
        unified_rate_decodable_sets(allCf.net, allCf.assignment, allCf.input).rateBits -
        cf_joint_rate(allCf.net, allCf.input).rateBits;
    run.check("reduction_all_cf", allCf, cfBoth);
}

void equiv_nnc_checks(EquivRun& run, const RandomInstance& allCf) {
    RateReport joint = cf_joint_rate(allCf.net, allCf.input);
    const auto& D = joint.perNode.front().decodableSet;
    run.check("joint_equals_nnc_at_D", allCf,
              joint.rateBits - nnc_subset_rate(allCf.net, allCf.input, D));
    // Non-strict set via the destination context.
    Evaluator ev(allCf.net, allCf.assignment, allCf.input);
    MiCache cache(&ev.components());
    SubsetContext ctx = make_context(ev.registry(), allCf.net, allCf.assignment, 2);
    auto Dp = largest_decodable_set(ev, cache, ctx, /*strict=*/false);
    run.check("nnc_at_D_equals_at_Dprime", allCf,
              nnc_subset_rate(allCf.net, allCf.input, D) -
                  nnc_subset_rate(allCf.net, allCf.input, Dp));
    run.check_flag("containment_D_in_Dprime", allCf, subset_of(D, Dp));
}

void equiv_mixed_checks(EquivRun& run, const RandomInstance& inst) {
    const double gap =
        unified_rate_decodable_sets(inst.net, inst.assignment, inst.input).rateBits -
        unified_rate_best_subsets(inst.net, inst.assignment, inst.input).rateBits;
    run.check("thm1_equals_thm2", inst, gap);
    auto opt = verify_subset_optimality(inst.net, inst.assignment, inst.input, run.tol);
    run.check_flag("subset_optimality_at_Dk", inst, opt.ok);
    // Strict/non-strict containment per decoder.
    Evaluator ev(inst.net, inst.assignment, inst.input);
    MiCache cache(&ev.components());
    bool contained = true;
    for (int k = 2; k <= inst.assignment.M() + 2; ++k) {
        SubsetContext ctx = make_context(ev.registry(), inst.net, inst.assignment, k);
        auto D = largest_decodable_set(ev, cache, ctx, true);
        auto Dp = largest_decodable_set(ev, cache, ctx, false);
        contained = contained && subset_of(D, Dp);
    }
    run.check_flag("containment_Dk_in_Dkprime", inst, contained);
}

int cmd_equiv(const Options& opt) {
    LoadedConfig cfg = load_config_file(opt.configPath);
    EquivConfig ec = cfg.equiv.value_or(EquivConfig{});
    if (opt.seedSet) ec.seed = opt.seed;
    else if (cfg.seed) ec.seed = *cfg.seed;
    if (opt.tolSet) ec.tol = opt.tol;
    else if (cfg.tol) ec.tol = *cfg.tol;

    EquivRun run;
    run.tol = ec.tol;

    if (ec.replayInstance) {
        const json& ij = *ec.replayInstance;
        RandomInstance inst;
        inst.net = network_from_json(ij.at("network"));
        inst.assignment = assignment_from_json(ij.at("assignment"));
        inst.input = input_from_json(ij.at("input"));
        auto v = validate(inst.net, inst.assignment, inst.input);
        if (!v.ok()) {
            std::cerr << v.summary();
            return kExitValidation;
        }
        equiv_mixed_checks(run, inst);
        if (inst.assignment.M() == inst.net.n && inst.net.n > 0)
            run.check("reduction_all_df", inst,
                      unified_rate_decodable_sets(inst.net, inst.assignment, inst.input).rateBits -
                          df_multilevel_rate(inst.net, inst.assignment, inst.input).rateBits);
        if (inst.assignment.M() == 0) equiv_nnc_checks(run, inst);
    } else {
        Rng rng(ec.seed);
        for (int i = 0; i < ec.discreteInstances; ++i) {
            InstanceOptions o;
            o.n = rng.uniform_int(0, ec.maxRelaysDiscrete);
            o.mixedQ = (i % 4 == 3);
            o.forceAllDf = true;
            auto allDf = random_discrete_instance(rng, o);
            o.forceAllDf = false;
            o.forceAllCf = true;
            auto allCf = random_discrete_instance(rng, o);
            o.forceAllCf = false;
            auto mixed = random_discrete_instance(rng, o);
            equiv_reduction_checks(run, allDf, allCf);
            equiv_nnc_checks(run, allCf);
            equiv_mixed_checks(run, mixed);
        }
        for (int i = 0; i < ec.gaussianInstances; ++i) {
            InstanceOptions o;
            o.n = rng.uniform_int(0, ec.maxRelaysGaussian);
            o.mixedQ = (i % 5 == 4);
            o.forceAllDf = true;
            auto allDf = random_gaussian_instance(rng, o);
            o.forceAllDf = false;
            o.forceAllCf = true;
            auto allCf = random_gaussian_instance(rng, o);
            o.forceAllCf = false;
            auto mixed = random_gaussian_instance(rng, o);
            equiv_reduction_checks(run, allDf, allCf);
            equiv_nnc_checks(run, allCf);
            equiv_mixed_checks(run, mixed);
        }
    }

    bool allPass = true;
    for (const auto& s : run.suites) allPass = allPass && s.passes == s.checks;
    if (opt.format == "json") {
        json j;
        j["schemaVersion"] = kSchemaVersion;
        j["seed"] = ec.seed;
        j["tol"] = ec.tol;
        j["units"] = "bits/use";
        json suites = json::array();
        for (const auto& s : run.suites)
            suites.push_back({{"name", s.name},
                              {"checks", s.checks},
                              {"passes", s.passes},
                              {"worstDiscrepancyBits", s.worst}});
        j["suites"] = suites;
        j["failures"] = run.failures;
        j["verdict"] = allPass ? "ok" : "violation";
        write_output(opt, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "suite,checks,passes,worst_discrepancy_bits_per_use\n";
        for (const auto& s : run.suites)
            os << s.name << "," << s.checks << "," << s.passes << "," << format_sig12(s.worst)
               << "\n";
        write_output(opt, os.str());
    }
    return allPass ? kExitOk : kExitPropertyFailure;
}

int cmd_oracle(const Options& opt) {
    LoadedConfig cfg = load_config_file(opt.configPath);
    OracleConfig oc = cfg.oracle.value_or(OracleConfig{});
    if (opt.seedSet) oc.seed = opt.seed;
    else if (cfg.seed) oc.seed = *cfg.seed;
    if (opt.tolSet) oc.chainTol = opt.tol;

    Rng rng(oc.seed);
    long chainPasses = 0, nonnegPasses = 0;
    double worstChain = 0.0, worstNeg = 0.0;
    for (int t = 0; t < oc.pmfTrials; ++t) {
        InstanceOptions o;
        o.n = 1;
        o.forceAllCf = true;
        auto inst = random_discrete_instance(rng, o);
        auto model = assemble_joint(inst.net, inst.assignment, inst.input.components[0].factor);
        const auto& reg = std::get<JointPMF>(model).registry;
        const VarSet A = reg.x({0});
        const VarSet B = reg.y(1);
        const VarSet Bp = reg.y(2) | reg.yhat({1});
        const VarSet C = reg.x({1});
        const double lhs = cond_mi(model, A, B | Bp, C);
        const double rhs = cond_mi(model, A, B, C) + cond_mi(model, A, Bp, C | B);
        worstChain = std::max(worstChain, std::abs(lhs - rhs));
        if (std::abs(lhs - rhs) <= oc.chainTol) ++chainPasses;
        double least = 0.0;
        least = std::min(least, cond_mi(model, A, B, C));
        least = std::min(least, cond_mi(model, A, Bp, kEmptySet));
        least = std::min(least, cond_mi(model, B, Bp, A | C));
        worstNeg = std::min(worstNeg, least);
        if (least >= -1e-9) ++nonnegPasses;
    }

    long quantPasses = 0;
    double worstQuant = 0.0;
    for (int t = 0; t < oc.quantTrials; ++t) {
        const double rho = rng.uniform(-0.9, 0.9);
        VariableRegistry reg(0, {});
        GaussianModel gm;
        gm.registry = reg;
        gm.cov.resize(2, 2);
        gm.cov << 1.0, rho, rho, 1.0;
        const double exact = cond_mi(gm, reg.x({0}), reg.y(1), kEmptySet);

        // Midpoint quantization of the bivariate normal over +-5 std.
        const int bins = oc.quantBins;
        const double span = 10.0 / bins;
        JointPMF pm;
        pm.registry = reg;
        pm.cards = {bins, bins};
        pm.probs = Eigen::ArrayXd::Zero(static_cast<long>(bins) * bins);
        const double det = 1.0 - rho * rho;
        double mass = 0.0;
        for (int a = 0; a < bins; ++a)
            for (int b = 0; b < bins; ++b) {
                const double x = -5.0 + (a + 0.5) * span;
                const double y = -5.0 + (b + 0.5) * span;
                const double e = (x * x - 2 * rho * x * y + y * y) / (2 * det);
                const double p = std::exp(-e);
                pm.probs[a * bins + b] = p;
                mass += p;
            }
        pm.probs /= mass;
        const double quantized = cond_mi(pm, reg.x({0}), reg.y(1), kEmptySet);
        worstQuant = std::max(worstQuant, std::abs(quantized - exact));
        if (std::abs(quantized - exact) <= oc.quantTol) ++quantPasses;
    }

    const bool allPass = chainPasses == oc.pmfTrials && nonnegPasses == oc.pmfTrials &&
                         quantPasses == oc.quantTrials;
    if (opt.format == "json") {
        json j;
        j["schemaVersion"] = kSchemaVersion;
        j["seed"] = oc.seed;
        j["units"] = "bits/use";
        j["chainRule"] = {{"trials", oc.pmfTrials},
                          {"passes", chainPasses},
                          {"worstResidualBits", worstChain},
                          {"tol", oc.chainTol}};
        j["nonnegativity"] = {{"trials", oc.pmfTrials},
                              {"passes", nonnegPasses},
                              {"worstValueBits", worstNeg}};
        j["gaussianQuantized"] = {{"trials", oc.quantTrials},
                                  {"passes", quantPasses},
                                  {"bins", oc.quantBins},
                                  {"worstGapBits", worstQuant},
                                  {"tol", oc.quantTol}};
        j["verdict"] = allPass ? "ok" : "violation";
        write_output(opt, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "suite,trials,passes,worst_bits_per_use\n";
        os << "chain_rule," << oc.pmfTrials << "," << chainPasses << ","
           << format_sig12(worstChain) << "\n";
        os << "nonnegativity," << oc.pmfTrials << "," << nonnegPasses << ","
           << format_sig12(worstNeg) << "\n";
        os << "gaussian_quantized," << oc.quantTrials << "," << quantPasses << ","
           << format_sig12(worstQuant) << "\n";
        write_output(opt, os.str());
    }
    return allPass ? kExitOk : kExitPropertyFailure;
}

int cmd_search(const Options& opt) {
    LoadedConfig cfg = load_config_file(opt.configPath);
    if (!cfg.network) {
        std::cerr << "search: config requires a network section\n";
        return kExitValidation;
    }
    SearchConfig sc = cfg.search.value_or(SearchConfig{});
    sc.threads = opt.threads;
    auto ranked = rank_strategies(*cfg.network, sc);
    if (opt.format == "json") {
        json j;
        j["schemaVersion"] = kSchemaVersion;
        j["units"] = "bits/use";
        json arr = json::array();
        for (const auto& r : ranked) {
            json e;
            e["dfSet"] = r.assignment.dfSet;
            e["order"] = r.assignment.order;
            e["rateBits"] = r.result.bestPoint.rateBits;
            e["params"] = {{"rho", r.result.bestPoint.params.rho},
                           {"powerFrac", r.result.bestPoint.params.powerFrac},
                           {"sigmaHatVar", r.result.bestPoint.params.sigmaHat}};
            e["report"] = report_to_json(r.result.best, "decodableSet");
            arr.push_back(e);
        }
        j["ranking"] = arr;
        write_output(opt, j.dump(2) + "\n");
    } else {
        write_output(opt, rank_to_csv(ranked));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"achievable-rate calculator for multi-relay channels"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.configPath, "path to the JSON run config")->required();
    app.add_option("--out", opt.outPath, "output file (stdout when omitted)");
    app.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    auto* seedOpt = app.add_option("--seed", opt.seed, "seed override for equiv/oracle");
    auto* tolOpt = app.add_option("--tol", opt.tol, "tolerance override (bits)")
                       ->check(CLI::PositiveNumber);
    app.add_option("--threads", opt.threads, "worker threads for grid search")
        ->check(CLI::PositiveNumber);

    auto* rate = app.add_subcommand("rate", "achievable rates for one instance");
    auto* search = app.add_subcommand("search", "rank relay strategies for a network");
    auto* schedule = app.add_subcommand("schedule", "build and verify a decoding timetable");
    auto* equiv = app.add_subcommand("equiv", "equivalence/reduction property suites");
    auto* oracle = app.add_subcommand("oracle", "information-measure sanity suites");

    CLI11_PARSE(app, argc, argv);
    opt.seedSet = seedOpt->count() > 0;
    opt.tolSet = tolOpt->count() > 0;

    try {
        if (rate->parsed()) return cmd_rate(opt);
        if (search->parsed()) return cmd_search(opt);
        if (schedule->parsed()) return cmd_schedule(opt);
        if (equiv->parsed()) return cmd_equiv(opt);
        if (oracle->parsed()) return cmd_oracle(opt);
    } catch (const CapExceeded& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kExitCap;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}
