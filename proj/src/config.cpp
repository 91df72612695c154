#include "rsplfr/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rsplfr::config {

namespace {

std::uint64_t get_uint(const json& j, const std::string& field) {
    const auto& v = j.at(field);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError("config field '" + field + "': expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::uint64_t get_uint(const json& j, const std::string& field, std::uint64_t fallback) {
    return j.contains(field) ? get_uint(j, field) : fallback;
}

std::uint64_t require_uint(const json& j, const std::string& field) {
    if (!j.contains(field)) throw ConfigError("config field '" + field + "': missing");
    return get_uint(j, field);
}

bool get_bool(const json& j, const std::string& field, bool fallback) {
    if (!j.contains(field)) return fallback;
    if (!j.at(field).is_boolean()) throw ConfigError("config field '" + field + "': expected true or false");
    return j.at(field).get<bool>();
}

std::vector<std::uint64_t> uint_list(const json& j, const std::string& field) {
    const auto& v = j.at(field);
    if (!v.is_array()) throw ConfigError("config field '" + field + "': expected an array");
    std::vector<std::uint64_t> out;
    for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) {
            throw ConfigError("config field '" + field + "': expected non-negative integers");
        }
        out.push_back(e.get<std::uint64_t>());
    }
    return out;
}

std::vector<std::size_t> server_list(const json& j, const std::string& field, std::size_t H) {
    std::vector<std::size_t> out;
    for (auto h : uint_list(j, field)) {
        if (h < 1 || h > H) {
            throw ConfigError("config field '" + field + "': server " + std::to_string(h) + " outside 1.." +
                              std::to_string(H));
        }
        out.push_back(h - 1);
    }
    return out;
}

std::uint32_t next_prime_above(std::size_t h) {
    std::uint32_t q = static_cast<std::uint32_t>(h) + 1;
    while (!ff::is_prime(q)) ++q;
    return q;
}

pda::Pda parse_pda(const json& v, const std::filesystem::path& base, std::size_t K) {
    try {
        if (v.is_string()) {
            std::filesystem::path path = v.get<std::string>();
            if (path.is_relative() && !base.empty()) path = base / path;
            std::ifstream in(path);
            if (!in) throw ConfigError("config field 'pda': cannot read " + path.string());
            std::stringstream ss;
            ss << in.rdbuf();
            return pda::parse(ss.str());
        }
        if (v.is_array()) {
            std::string text;
            for (const auto& row : v) {
                if (!row.is_string()) throw ConfigError("config field 'pda': rows must be strings");
                text += row.get<std::string>() + "\n";
            }
            return pda::parse(text);
        }
        if (v.is_object() && v.contains("man")) {
            const auto& m = v.at("man");
            return pda::man_pda(get_uint(m, "k", K), require_uint(m, "t"), get_uint(m, "seed", 0));
        }
    } catch (const pda::PdaError& e) {
        throw ConfigError(std::string("config field 'pda': ") + e.what());
    }
    throw ConfigError("config field 'pda': expected a path, an array of rows or {\"man\": {...}}");
}

}  // namespace

protocol::AdversaryStrategy parse_strategy(const json& j) {
    const std::string name = j.is_string() ? j.get<std::string>()
                             : j.is_object() && j.contains("name") && j.at("name").is_string()
                                 ? j.at("name").get<std::string>()
                                 : "";
    const json opts = j.is_object() ? j : json::object();
    if (name == "uniform-random") return protocol::UniformRandom{get_uint(opts, "seed", 1)};
    if (name == "zero-payload") return protocol::ZeroPayload{};
    if (name == "honest-plus-constant") {
        return protocol::HonestPlusConstant{static_cast<std::uint32_t>(get_uint(opts, "c", 1))};
    }
    if (name == "honest-permuted-slices") return protocol::HonestPermutedSlices{};
    throw ConfigError("config field 'strategy': unknown strategy '" + name +
                      "' (uniform-random, zero-payload, honest-plus-constant, honest-permuted-slices)");
}

Config parse_config(const json& j, const std::filesystem::path& base) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    Config c;
    auto& p = c.params;
    p.N = require_uint(j, "N");
    p.K = require_uint(j, "K");
    p.H = require_uint(j, "H");
    p.A = require_uint(j, "A");
    p.I = require_uint(j, "I");
    p.J = require_uint(j, "J");
    p.q = static_cast<std::uint32_t>(get_uint(j, "q", next_prime_above(p.H)));

    c.seed = get_uint(j, "seed", 1);
    if (const char* env = std::getenv("RSPLFR_SEED")) {
        try {
            std::size_t used = 0;
            c.seed = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError(std::string("RSPLFR_SEED: not an unsigned integer: '") + env + "'");
        }
    }

    try {
        protocol::SystemParams shape = p;
        shape.B = 1;
        shape.validate();
    } catch (const protocol::ProtocolError& e) {
        throw ConfigError(std::string("config field ") + e.what());
    }

    if (j.contains("pda")) c.pda = parse_pda(j.at("pda"), base, p.K);
    p.B = get_uint(j, "B", c.pda ? p.L() * c.pda->rows() : 1);

    if (j.contains("alphas")) {
        const auto field = p.field();
        ff::FieldVector a;
        for (auto v : uint_list(j, "alphas")) a.push_back(field.element(v));
        p.alphas = a;
    }
    try {
        if (c.pda) {
            p.validate(*c.pda);
        } else {
            p.validate();
        }
    } catch (const protocol::ProtocolError& e) {
        throw ConfigError(std::string("config field ") + e.what());
    }

    if (j.contains("demands")) {
        const auto field = p.field();
        const auto& d = j.at("demands");
        if (!d.is_array() || d.size() != p.K) throw ConfigError("config field 'demands': expected K rows");
        std::vector<ff::FieldVector> rows;
        for (const auto& row : d) {
            if (!row.is_array() || row.size() != p.N) {
                throw ConfigError("config field 'demands': each row needs N coefficients");
            }
            ff::FieldVector v;
            for (const auto& e : row) {
                if (!e.is_number_integer()) throw ConfigError("config field 'demands': expected integers");
                v.push_back(field.element_signed(e.get<std::int64_t>()));
            }
            rows.push_back(std::move(v));
        }
        c.demands = std::move(rows);
    }
    c.demand_samples = get_uint(j, "demand_samples", 1);
    c.zero_library = get_bool(j, "zero_library", false);
    if (j.contains("adversaries")) c.adversaries = server_list(j, "adversaries", p.H);
    if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy"));
    if (j.contains("delivery")) c.delivery = server_list(j, "delivery", p.H);
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (s.is_boolean()) {
            c.sweep_delivery = c.sweep_adversaries = c.sweep_strategies = s.get<bool>();
        } else if (s.is_object()) {
            c.sweep_delivery = get_bool(s, "delivery", true);
            c.sweep_adversaries = get_bool(s, "adversaries", true);
            c.sweep_strategies = get_bool(s, "strategies", true);
        } else {
            throw ConfigError("config field 'sweep': expected a boolean or an object");
        }
    }
    c.extra_adversaries = get_uint(j, "extra_adversaries", 0);
    c.max_runs = get_uint(j, "max_runs", c.max_runs);
    c.grid = get_uint(j, "grid", c.grid);
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot read " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

const pda::Pda& Config::require_pda() const {
    if (!pda) throw ConfigError("config field 'pda': missing");
    return *pda;
}

sim::Scenario Config::scenario() const {
    sim::Scenario s(params, require_pda());
    s.seed = seed;
    s.demands = demands;
    s.demand_samples = demand_samples;
    s.zero_library = zero_library;
    s.adversaries = adversaries;
    s.strategy = strategy;
    s.delivery = delivery;
    s.sweep_delivery = sweep_delivery;
    s.sweep_adversaries = sweep_adversaries;
    s.sweep_strategies = sweep_strategies;
    s.extra_adversaries = extra_adversaries;
    s.max_runs = max_runs;
    return s;
}

// --- output --------------------------------------------------------------------

namespace {

json vec(std::span<const ff::FieldElement> v) {
    json out = json::array();
    for (const auto& e : v) out.push_back(e.value());
    return out;
}

json rational(const Rational& r) { return {{"exact", to_string(r)}, {"value", to_double(r)}}; }

json one_based(const std::vector<std::size_t>& v) {
    json out = json::array();
    for (auto x : v) out.push_back(x + 1);
    return out;
}

}  // namespace

json msc_json(const Rational& M, const Rational& T, const Rational& R, std::size_t subpacketization) {
    return {{"M", rational(M)}, {"T", rational(T)}, {"R", rational(R)}, {"subpacketization", subpacketization}};
}

json to_json(const sim::Witness& w) {
    return {{"delivery", one_based(w.delivery)}, {"adversaries", one_based(w.adversaries)},
            {"strategy", w.strategy},            {"demand_sample", w.demand_sample},
            {"user", w.user + 1},                {"reason", w.reason}};
}

json to_json(const sim::RunResult& r) {
    json out;
    out["pass"] = r.pass;
    out["seconds"] = r.seconds;
    out["msc"] = msc_json(r.msc.M, r.msc.T, r.msc.R, r.msc.subpacketization);
    json users = json::array();
    for (std::size_t k = 0; k < r.demands.size(); ++k) {
        users.push_back({{"user", k + 1},
                         {"demand", vec(r.demands[k])},
                         {"decoded", k < r.decoded.size() ? vec(r.decoded[k]) : json::array()},
                         {"truth", vec(r.truth[k])}});
    }
    out["users"] = users;
    json signals = json::array();
    for (const auto& x : r.signals) {
        json payload = json::array();
        for (const auto& pk : x.payload) payload.push_back(vec(pk));
        json echo = json::array();
        for (const auto& q : x.query_echo) echo.push_back(vec(q));
        signals.push_back({{"server", x.origin + 1}, {"queries", echo}, {"payload", payload}});
    }
    out["signals"] = signals;
    json failures = json::array();
    for (const auto& w : r.failures) failures.push_back(to_json(w));
    out["failures"] = failures;
    return out;
}

json to_json(const sim::Deployment& d) {
    json stores = json::array();
    for (const auto& z : d.stores) {
        json files = json::array(), keys = json::array();
        for (const auto& v : z.coded_subfiles) files.push_back(vec(v));
        for (const auto& v : z.coded_keys) keys.push_back(vec(v));
        stores.push_back({{"server", z.server + 1}, {"coded_subfiles", files}, {"coded_keys", keys}});
    }
    json caches = json::array();
    for (const auto& c : d.caches) {
        json rows = json::array();
        for (const auto& row : c.rows) {
            json packets = json::array();
            for (const auto& pk : row.packets) packets.push_back(vec(pk));
            rows.push_back({{"uncoded", row.uncoded}, {"packets", packets}});
        }
        caches.push_back({{"user", c.user + 1}, {"p", vec(c.p)}, {"rows", rows}});
    }
    return {{"stores", stores}, {"caches", caches}};
}

json to_json(const sim::SweepResult& r) {
    json failures = json::array();
    for (const auto& w : r.witnesses) failures.push_back(to_json(w));
    return {{"pass", r.pass()},
            {"configurations", r.configurations},
            {"runs", r.runs},
            {"failed_configurations", r.failed_configurations},
            {"failed_runs", r.failed_runs},
            {"seconds", r.seconds},
            {"msc", msc_json(r.msc.M, r.msc.T, r.msc.R, r.msc.subpacketization)},
            {"witnesses", failures}};
}

json to_json(const audit::AuditReport& r) {
    return {{"constraint", audit::constraint_name(r.constraint)},
            {"pass", r.passed()},
            {"mi_bits", r.mi_bits},
            {"exact_zero", r.exact_zero},
            {"witness", r.witness},
            {"outcomes", r.outcomes},
            {"tables", r.tables},
            {"failures", r.failures}};
}

json params_json(const Config& c) {
    const auto& p = c.params;
    json out = {{"N", p.N}, {"K", p.K}, {"H", p.H}, {"A", p.A}, {"I", p.I},
                {"J", p.J}, {"q", p.q}, {"B", p.B}, {"seed", c.seed}};
    if (c.pda) out["pda"] = pda::serialize(*c.pda);
    return out;
}

}  // namespace rsplfr::config
