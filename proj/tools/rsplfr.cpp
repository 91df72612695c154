#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rsplfr/analysis.hpp"
#include "rsplfr/audit.hpp"
#include "rsplfr/config.hpp"
#include "rsplfr/pda.hpp"
#include "rsplfr/sim.hpp"

using namespace rsplfr;
using config::json;

namespace {

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const std::string& path, const json& j) {
    if (path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::string servers(const std::vector<std::size_t>& v) {
    std::string out = "{";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i] + 1);
    return out + "}";
}

void print_witnesses(const std::vector<sim::Witness>& ws) {
    for (const auto& w : ws) {
        std::cout << "  delivery " << servers(w.delivery) << " adversaries " << servers(w.adversaries) << ' '
                  << w.strategy << " sample " << w.demand_sample << " user " << w.user + 1 << ": " << w.reason
                  << '\n';
    }
}

std::string msc_text(const sim::MeasuredMsc& m) {
    return "(M,T,R) = (" + to_string(m.M) + ", " + to_string(m.T) + ", " + to_string(m.R) +
           "), subpacketization " + std::to_string(m.subpacketization);
}

// --- subcommands -----------------------------------------------------------------

int pda_validate(const std::string& path) {
    try {
        const auto p = pda::parse(read_file(path));
        std::cout << "valid PDA: K=" << p.users() << " F=" << p.rows() << " Z=" << p.stars_per_column()
                  << " S=" << p.symbols() << '\n';
        return kOk;
    } catch (const pda::PdaError& e) {
        std::cout << "invalid PDA: " << e.what() << '\n';
        return kDomainFailure;
    }
}

int pda_man(std::size_t k, std::size_t t, std::uint64_t seed) {
    try {
        std::cout << pda::serialize(pda::man_pda(k, t, seed)) << '\n';
        return kOk;
    } catch (const pda::PdaError& e) {
        throw UsageError(e.what());
    }
}

int simulate(const std::string& cfg_path, bool sweep, const std::string& trace, std::size_t jobs) {
    const auto cfg = config::load_config(cfg_path);
    const auto sc = cfg.scenario();
    json out = {{"params", config::params_json(cfg)}};
    bool pass = false;
    if (sweep) {
        const auto r = sim::sweep(sc, jobs);
        pass = r.pass();
        if (pass) {
            std::cout << "all " << r.configurations << " configurations passed (" << r.runs << " runs, "
                      << msc_text(r.msc) << ")\n";
        } else {
            std::cout << r.failed_configurations << " of " << r.configurations << " configurations failed ("
                      << r.failed_runs << " of " << r.runs << " runs)\n";
            print_witnesses(r.witnesses);
        }
        out["sweep"] = config::to_json(r);
    } else {
        const auto r = sim::run(sc);
        pass = r.pass;
        std::cout << (pass ? "run passed: " : "run failed: ") << cfg.params.K << " users, " << msc_text(r.msc)
                  << '\n';
        print_witnesses(r.failures);
        out["run"] = config::to_json(r);
        if (!trace.empty()) {
            out["deployment"] = config::to_json(sim::Deployment::prepare(sc.params, sc.pda, sc.seed, sc.zero_library));
        }
    }
    if (!trace.empty()) write_json(trace, out);
    return pass ? kOk : kDomainFailure;
}

int curve(const std::string& cfg_path, std::size_t grid, const std::string& out_path) {
    const auto cfg = config::load_config(cfg_path);
    const auto dims = analysis::Dims::from(cfg.params);
    const auto report = analysis::gap_report(dims, analysis::uniform_grid(dims, grid));
    if (out_path.empty() || out_path == "-") {
        analysis::write_csv(report, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw UsageError("cannot write " + out_path);
        analysis::write_csv(report, out);
    }
    for (const auto& f : report.failures) std::cerr << "check failed at M=" << to_string(f.M) << ": " << f.check << '\n';
    return report.ok() ? kOk : kDomainFailure;
}

int bounds(const std::string& cfg_path) {
    const auto cfg = config::load_config(cfg_path);
    const auto dims = analysis::Dims::from(cfg.params);
    json out = {{"params", config::params_json(cfg)}, {"L", dims.L}};
    out["T_lb"] = {{"exact", to_string(analysis::storage_lower_bound(dims))},
                   {"value", to_double(analysis::storage_lower_bound(dims))}};
    json corners = json::array();
    const analysis::ManCurve man(dims);
    for (const auto& p : man.points()) {
        corners.push_back({{"t", p.t},
                           {"M", to_string(p.M)},
                           {"T", to_string(p.T)},
                           {"R", to_string(p.R)},
                           {"R_lb", to_string(analysis::load_lower_bound(p.M, dims))}});
    }
    out["man_corners"] = corners;
    if (cfg.pda) {
        const auto m = analysis::msc_from_pda(*cfg.pda, dims);
        out["pda_msc"] = config::msc_json(m.M, m.T, m.R, m.subpacketization);
        out["pda_R_lb"] = to_string(analysis::load_lower_bound(m.M, dims));
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int run_audit(const std::string& cfg_path, const std::string& mutate, const std::string& json_path,
              std::size_t jobs) {
    const auto cfg = config::load_config(cfg_path);
    const auto& p = cfg.params;
    const auto& d = cfg.require_pda();
    audit::MicroOptions opt;
    opt.mutation = audit::parse_mutation(mutate);
    opt.jobs = jobs;

    std::vector<audit::AuditReport> reports;
    json out = {{"params", config::params_json(cfg)}, {"mutation", mutate}};
    try {
        reports.push_back(audit::audit_server_security(p, d, opt));
        reports.push_back(audit::audit_signal_security(p, d, opt));
        reports.push_back(audit::audit_demand_privacy(p, d, opt));
    } catch (const audit::InfeasibleAudit& e) {
        std::cout << "exact audits skipped: " << e.what() << '\n';
        out["skipped"] = e.what();
    }
    if (opt.mutation == audit::Mutation::None) {
        for (auto& r : audit::audit_robustness(p, d, cfg.seed, cfg.demand_samples, cfg.extra_adversaries, jobs)) {
            reports.push_back(std::move(r));
        }
    }

    bool pass = true;
    json list = json::array();
    for (const auto& r : reports) {
        pass = pass && r.passed();
        std::cout << audit::constraint_name(r.constraint) << ": " << (r.passed() ? "PASS" : "VIOLATED");
        if (r.constraint == audit::Constraint::RobustDecoding || r.constraint == audit::Constraint::RobustRecovery) {
            std::cout << " (" << r.failures << " failing of " << r.tables << " configurations)";
        } else {
            std::cout << " (" << (r.exact_zero ? std::string("exactly 0") : std::to_string(r.mi_bits))
                      << " bits over " << r.outcomes << " outcomes, " << r.tables << " tables)";
        }
        if (!r.witness.empty()) std::cout << " witness: " << r.witness;
        std::cout << '\n';
        list.push_back(config::to_json(r));
    }
    out["reports"] = list;
    out["pass"] = pass;
    if (!json_path.empty()) write_json(json_path, out);
    return pass ? kOk : kDomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rsplfr: robust secure private linear function retrieval toolkit"};
    app.require_subcommand(1);

    auto* pda_cmd = app.add_subcommand("pda", "PDA tools");
    pda_cmd->require_subcommand(1);
    std::string pda_file;
    auto* validate_cmd = pda_cmd->add_subcommand("validate", "check a PDA file");
    validate_cmd->add_option("file", pda_file, "PDA text file")->required();
    std::size_t man_k = 0, man_t = 0;
    std::uint64_t man_seed = 0;
    auto* man_cmd = pda_cmd->add_subcommand("man", "print a MAN-PDA");
    man_cmd->add_option("--k", man_k, "users")->required();
    man_cmd->add_option("--t", man_t, "cache parameter")->required();
    man_cmd->add_option("--seed", man_seed, "symbol labelling seed (0 = lexicographic)");

    std::string cfg_path, trace, out_path, mutate = "none", json_path;
    bool do_sweep = false;
    std::size_t jobs = 1, grid = 0;

    auto* sim_cmd = app.add_subcommand("simulate", "run the protocol");
    sim_cmd->add_option("--config", cfg_path, "scenario JSON")->required();
    sim_cmd->add_flag("--sweep", do_sweep, "all delivery sets, adversary sets and strategies");
    sim_cmd->add_option("--trace", trace, "write a JSON trace");
    sim_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* curve_cmd = app.add_subcommand("curve", "achievable curve, bounds and gaps as CSV");
    curve_cmd->add_option("--config", cfg_path, "params JSON")->required();
    curve_cmd->add_option("--grid", grid, "grid points (default from config, else 200)");
    curve_cmd->add_option("--out", out_path, "CSV path (default stdout)");

    auto* bounds_cmd = app.add_subcommand("bounds", "lower bounds and MAN corner points");
    bounds_cmd->add_option("--config", cfg_path, "params JSON")->required();

    auto* audit_cmd = app.add_subcommand("audit", "security, privacy and robustness audits");
    audit_cmd->add_option("--config", cfg_path, "params JSON")->required();
    audit_cmd->add_option("--mutate", mutate, "mutation")
        ->check(CLI::IsMember({"none", "key-removal", "zero-pad", "zero-noise"}));
    audit_cmd->add_option("--json", json_path, "write the JSON report ('-' for stdout)");
    audit_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*validate_cmd) return pda_validate(pda_file);
        if (*man_cmd) return pda_man(man_k, man_t, man_seed);
        if (*sim_cmd) return simulate(cfg_path, do_sweep, trace, jobs);
        if (*curve_cmd) {
            if (grid == 0) grid = config::load_config(cfg_path).grid;
            return curve(cfg_path, grid, out_path);
        }
        if (*bounds_cmd) return bounds(cfg_path);
        if (*audit_cmd) return run_audit(cfg_path, mutate, json_path, jobs);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const config::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDomainFailure;
    }
    return kUsage;
}
