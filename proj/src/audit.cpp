#include "rsplfr/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "rsplfr/sim.hpp"

namespace rsplfr::audit {

using ff::FieldElement;
using ff::FieldVector;
using protocol::Library;
using protocol::Query;
using protocol::Randomness;
using protocol::ServerStore;
using protocol::Signal;
using protocol::UserCache;

// --- DistributionTable -------------------------------------------------------

std::uint32_t DistributionTable::intern(std::map<Key, std::uint32_t>& ids, std::vector<Key>& back, const Key& k) {
    auto [it, inserted] = ids.try_emplace(k, static_cast<std::uint32_t>(back.size()));
    if (inserted) back.push_back(k);
    return it->second;
}

void DistributionTable::add(const Key& secret, const Key& observation, std::uint64_t count) {
    const auto x = intern(secrets_, secret_keys_, secret);
    const auto y = intern(observations_, observation_keys_, observation);
    cells_[{x, y}] += count;
    total_ += count;
}

void DistributionTable::merge(const DistributionTable& other) {
    for (const auto& [xy, c] : other.cells_) add(other.secret_keys_[xy.first], other.observation_keys_[xy.second], c);
}

std::uint64_t DistributionTable::count(const Key& secret, const Key& observation) const {
    auto xi = secrets_.find(secret);
    auto yi = observations_.find(observation);
    if (xi == secrets_.end() || yi == observations_.end()) return 0;
    auto c = cells_.find({xi->second, yi->second});
    return c == cells_.end() ? 0 : c->second;
}

namespace {

__extension__ using u128 = unsigned __int128;

struct Marginals {
    std::vector<std::uint64_t> row, col;
};

template <typename Cells>
Marginals marginals(const Cells& cells, std::size_t nx, std::size_t ny) {
    Marginals m{std::vector<std::uint64_t>(nx, 0), std::vector<std::uint64_t>(ny, 0)};
    for (const auto& [xy, c] : cells) {
        m.row[xy.first] += c;
        m.col[xy.second] += c;
    }
    return m;
}

}  // namespace

bool DistributionTable::rank_one() const {
    const auto m = marginals(cells_, secret_keys_.size(), observation_keys_.size());
    // Checking the nonzero cells suffices.
    for (const auto& [xy, c] : cells_) {
        const auto lhs = static_cast<u128>(c) * total_;
        const auto rhs = static_cast<u128>(m.row[xy.first]) * m.col[xy.second];
        if (lhs != rhs) return false;
    }
    return true;
}

double DistributionTable::mi_bits() const {
    const auto m = marginals(cells_, secret_keys_.size(), observation_keys_.size());
    const double t = static_cast<double>(total_);
    double sum = 0.0;
    for (const auto& [xy, c] : cells_) {
        const double pxy = static_cast<double>(c) / t;
        const double ratio = static_cast<double>(c) * t /
                             (static_cast<double>(m.row[xy.first]) * static_cast<double>(m.col[xy.second]));
        sum += pxy * std::log2(ratio);
    }
    return std::max(0.0, sum);
}

MiResult exact_mi(const DistributionTable& table) {
    if (table.empty()) throw std::invalid_argument("exact_mi: empty table");
    if (table.rank_one()) return {true, 0.0};
    return {false, table.mi_bits()};
}

// --- names -------------------------------------------------------------------

std::string constraint_name(Constraint c) {
    switch (c) {
        case Constraint::ServerSecurity: return "ServerSecurity";
        case Constraint::RobustRecovery: return "RobustRecovery";
        case Constraint::RobustDecoding: return "RobustDecoding";
        case Constraint::SignalSecurity: return "SignalSecurity";
        case Constraint::DemandPrivacy: return "DemandPrivacy";
    }
    return "?";
}

std::string mutation_name(Mutation m) {
    switch (m) {
        case Mutation::None: return "none";
        case Mutation::ZeroNoise: return "zero-noise";
        case Mutation::RemoveKeys: return "key-removal";
        case Mutation::ZeroPad: return "zero-pad";
    }
    return "?";
}

Mutation parse_mutation(const std::string& text) {
    for (auto m : {Mutation::None, Mutation::ZeroNoise, Mutation::RemoveKeys, Mutation::ZeroPad}) {
        if (mutation_name(m) == text) return m;
    }
    throw std::invalid_argument("mutate: unknown mutation '" + text + "'");
}

// --- enumeration -------------------------------------------------------------

std::size_t enumerated_symbols(const SystemParams& params, const pda::Pda& pda) {
    params.validate(pda);
    const std::size_t P = params.packet_len(pda);
    const std::size_t S = pda.symbols();
    return params.N * params.B + params.N * params.I * params.subfile_len() + params.L() * S * P +
           params.I * S * P + 2 * params.K * params.N;
}

SystemParams micro_params() {
    SystemParams p;
    p.N = 2;
    p.K = 1;
    p.H = 2;
    p.A = 0;
    p.I = 1;
    p.J = 2;
    p.q = 3;
    p.B = 1;
    return p;
}

pda::Pda micro_pda() { return pda::Pda::validate(pda::Grid{{pda::PdaEntry::symbol(1)}}); }

namespace {

/// One enumerated outcome and everything the roles derive from it.
struct World {
    Library library;
    Randomness randomness;
    std::vector<FieldVector> p, d;
    std::vector<ServerStore> stores;
    std::vector<UserCache> caches;
    std::vector<Query> queries;
};

class Digits {
  public:
    Digits(const ff::PrimeField& field, std::uint64_t index, std::size_t count) {
        values_.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            values_.push_back(field.element(index % field.modulus()));
            index /= field.modulus();
        }
    }
    FieldVector take(std::size_t n) {
        FieldVector out(values_.begin() + static_cast<std::ptrdiff_t>(pos_),
                        values_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

  private:
    FieldVector values_;
    std::size_t pos_ = 0;
};

World build_world(const SystemParams& params, const pda::Pda& pda, std::uint64_t index, std::size_t symbols,
                  Mutation mutation) {
    const auto field = params.field();
    const std::size_t P = params.packet_len(pda);
    Digits dg(field, index, symbols);

    std::vector<FieldVector> files;
    for (std::size_t n = 0; n < params.N; ++n) files.push_back(dg.take(params.B));
    Library library(std::move(files), params.L(), pda.rows());

    Randomness u;
    u.deltas.resize(params.N);
    for (auto& per_file : u.deltas) {
        for (std::size_t i = 0; i < params.I; ++i) per_file.push_back(dg.take(params.subfile_len()));
    }
    u.vees.resize(params.L());
    for (auto& per_l : u.vees) {
        for (std::size_t s = 0; s < pda.symbols(); ++s) per_l.push_back(dg.take(P));
    }
    u.lambdas.resize(params.I);
    for (auto& per_i : u.lambdas) {
        for (std::size_t s = 0; s < pda.symbols(); ++s) per_i.push_back(dg.take(P));
    }
    std::vector<FieldVector> p, d;
    for (std::size_t k = 0; k < params.K; ++k) p.push_back(dg.take(params.N));
    for (std::size_t k = 0; k < params.K; ++k) d.push_back(dg.take(params.N));

    auto zero_all = [&](auto& nested) {
        for (auto& a : nested) for (auto& v : a) std::fill(v.begin(), v.end(), field.zero());
    };
    if (mutation == Mutation::ZeroNoise) zero_all(u.deltas);
    if (mutation == Mutation::RemoveKeys) {
        zero_all(u.vees);
        zero_all(u.lambdas);
    }
    if (mutation == Mutation::ZeroPad) {
        for (auto& v : p) std::fill(v.begin(), v.end(), field.zero());
    }

    auto stores = protocol::build_storage(params, pda, library, u);
    std::vector<UserCache> caches;
    std::vector<Query> queries;
    for (std::size_t k = 0; k < params.K; ++k) {
        caches.push_back(protocol::place_user(params, pda, library, u, k, p[k]));
        queries.push_back(protocol::make_query(d[k], p[k]));
    }
    return World{std::move(library), std::move(u),      std::move(p),      std::move(d),
                 std::move(stores),  std::move(caches), std::move(queries)};
}

void append(Key& key, std::span<const FieldElement> v) {
    for (const auto& e : v) key.push_back(e.value());
}

void append(Key& key, const ServerStore& z) {
    for (const auto& v : z.coded_subfiles) append(key, v);
    for (const auto& v : z.coded_keys) append(key, v);
}

void append(Key& key, const Signal& x) {
    for (const auto& v : x.query_echo) append(key, v);
    for (const auto& v : x.payload) append(key, v);
}

void append(Key& key, const UserCache& c) {
    append(key, c.p);
    for (const auto& row : c.rows) for (const auto& pk : row.packets) append(key, pk);
}

Key files_key(const World& w) {
    Key k;
    for (std::size_t n = 0; n < w.library.files(); ++n) append(k, w.library.file(n));
    return k;
}

using ConditionalTable = std::map<Key, DistributionTable>;

struct Record {
    Key condition, secret, observation;
};

using Observer = std::function<void(const World&, std::vector<Record>&)>;

std::uint64_t outcome_count(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt) {
    if (opt.prior != Prior::Uniform) {
        throw NonUniformPrior("audit: the file prior must be uniform and independent");
    }
    const std::size_t n = enumerated_symbols(params, pda);
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (total > opt.max_outcomes / params.q) {
            throw InfeasibleAudit("audit: q^" + std::to_string(n) + " outcomes exceed the limit of " +
                                  std::to_string(opt.max_outcomes));
        }
        total *= params.q;
    }
    return total;
}

/// Enumerates every outcome, splitting the index range over `jobs` workers and merging exact counts.
std::vector<ConditionalTable> enumerate(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt,
                                        std::size_t tables, const Observer& observe, std::uint64_t& total) {
    total = outcome_count(params, pda, opt);
    const std::size_t symbols = enumerated_symbols(params, pda);
    const std::size_t jobs = std::max<std::size_t>(1, std::min<std::uint64_t>(opt.jobs, total));

    auto work = [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<ConditionalTable> out(tables);
        std::vector<Record> records;
        for (std::uint64_t idx = lo; idx < hi; ++idx) {
            records.clear();
            observe(build_world(params, pda, idx, symbols, opt.mutation), records);
            for (std::size_t t = 0; t < tables; ++t) {
                out[t][records[t].condition].add(records[t].secret, records[t].observation);
            }
        }
        return out;
    };

    if (jobs == 1) return work(0, total);
    std::vector<std::vector<ConditionalTable>> parts(jobs);
    {
        std::vector<std::jthread> workers;
        for (std::size_t j = 0; j < jobs; ++j) {
            workers.emplace_back([&, j] { parts[j] = work(total * j / jobs, total * (j + 1) / jobs); });
        }
    }
    std::vector<ConditionalTable> merged(tables);
    for (const auto& part : parts) {
        for (std::size_t t = 0; t < tables; ++t) {
            for (const auto& [cond, table] : part[t]) merged[t][cond].merge(table);
        }
    }
    return merged;
}

AuditReport summarize(Constraint constraint, const std::vector<ConditionalTable>& tables,
                      const std::vector<std::string>& names, std::uint64_t total) {
    AuditReport report;
    report.constraint = constraint;
    report.outcomes = total;
    report.tables = tables.size();
    for (std::size_t t = 0; t < tables.size(); ++t) {
        for (const auto& [cond, table] : tables[t]) {
            const auto mi = exact_mi(table);
            if (!mi.independent) {
                if (report.exact_zero || mi.bits > report.mi_bits) {
                    report.mi_bits = mi.bits;
                    report.witness = names[t];
                }
                report.exact_zero = false;
            }
        }
    }
    return report;
}

std::string subset_name(const std::vector<std::size_t>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i] + 1);
    return out + "}";
}

}  // namespace

AuditReport audit_server_security(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt) {
    const auto subsets = sim::combinations(params.H, params.I);
    std::vector<std::string> names;
    for (const auto& s : subsets) names.push_back("servers " + subset_name(s));

    std::uint64_t total = 0;
    auto tables = enumerate(params, pda, opt, subsets.size(),
                            [&](const World& w, std::vector<Record>& out) {
                                const Key secret = files_key(w);
                                for (const auto& s : subsets) {
                                    Key obs;
                                    for (auto h : s) append(obs, w.stores[h]);
                                    out.push_back({{}, secret, std::move(obs)});
                                }
                            },
                            total);
    return summarize(Constraint::ServerSecurity, tables, names, total);
}

AuditReport audit_signal_security(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt) {
    struct Config {
        std::vector<std::size_t> adversaries;
        protocol::AdversaryStrategy strategy;
        std::string name;
    };
    std::vector<Config> configs{{{}, protocol::ZeroPayload{}, "honest"}};
    const std::size_t max_bad = std::min(params.H, std::max<std::size_t>(params.A, 1));
    for (std::size_t a = 1; a <= max_bad; ++a) {
        for (const auto& s : sim::combinations(params.H, a)) {
            for (const auto& st : protocol::all_strategies()) {
                configs.push_back({s, st, "adversaries " + subset_name(s) + " " + protocol::strategy_name(st)});
            }
        }
    }
    std::vector<std::string> names;
    for (const auto& c : configs) names.push_back("I(W;X) " + c.name);
    for (const auto& c : configs) names.push_back("I(W,d;X) " + c.name);

    std::uint64_t total = 0;
    auto tables = enumerate(params, pda, opt, 2 * configs.size(),
                            [&](const World& w, std::vector<Record>& out) {
                                const Key files = files_key(w);
                                Key files_demands = files;
                                for (const auto& d : w.d) append(files_demands, d);
                                std::vector<Key> observations;
                                for (const auto& c : configs) {
                                    Key obs;
                                    for (std::size_t h = 0; h < params.H; ++h) {
                                        const bool bad = std::find(c.adversaries.begin(), c.adversaries.end(), h) !=
                                                         c.adversaries.end();
                                        if (bad) {
                                            append(obs, protocol::adversary_signal(c.strategy,
                                                                                  std::span(&w.stores[h], 1), pda,
                                                                                  w.queries)
                                                            .front());
                                        } else {
                                            append(obs, protocol::server_signal(w.stores[h], pda, w.queries));
                                        }
                                    }
                                    observations.push_back(std::move(obs));
                                }
                                for (const auto& obs : observations) out.push_back({{}, files, obs});
                                for (auto& obs : observations) out.push_back({{}, files_demands, std::move(obs)});
                            },
                            total);
    return summarize(Constraint::SignalSecurity, tables, names, total);
}

AuditReport audit_demand_privacy(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt) {
    if (params.K > 16) throw InfeasibleAudit("audit: too many users to enumerate user subsets");
    const std::size_t masks = std::size_t{1} << params.K;
    std::vector<std::string> names;
    for (std::size_t m = 0; m < masks; ++m) {
        std::vector<std::size_t> s;
        for (std::size_t k = 0; k < params.K; ++k) if (m >> k & 1) s.push_back(k);
        names.push_back("colluding users " + subset_name(s));
    }

    std::uint64_t total = 0;
    auto tables = enumerate(params, pda, opt, masks,
                            [&](const World& w, std::vector<Record>& out) {
                                const Key files = files_key(w);
                                Key common;
                                for (const auto& q : w.queries) append(common, q.q);
                                for (const auto& z : w.stores) append(common, z);
                                for (std::size_t m = 0; m < masks; ++m) {
                                    Key secret, obs = common;
                                    for (std::size_t k = 0; k < params.K; ++k) {
                                        if (m >> k & 1) {
                                            append(obs, w.caches[k]);
                                            append(obs, w.d[k]);
                                        } else {
                                            append(secret, w.d[k]);
                                        }
                                    }
                                    out.push_back({files, std::move(secret), std::move(obs)});
                                }
                            },
                            total);
    return summarize(Constraint::DemandPrivacy, tables, names, total);
}

std::vector<AuditReport> audit_robustness(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed,
                                          std::size_t demand_samples, std::size_t extra_adversaries,
                                          std::size_t jobs) {
    sim::Scenario sc(params, pda);
    sc.seed = seed;
    sc.demand_samples = demand_samples;
    sc.sweep_delivery = sc.sweep_adversaries = sc.sweep_strategies = true;
    sc.extra_adversaries = extra_adversaries;

    auto describe = [](const sim::SweepResult& r) {
        if (r.witnesses.empty()) return std::string{};
        const auto& w = r.witnesses.front();
        return "delivery " + subset_name(w.delivery) + " adversaries " + subset_name(w.adversaries) + " " +
               w.strategy + ": " + w.reason;
    };

    const auto decoding = sim::sweep(sc, jobs);
    AuditReport dec;
    dec.constraint = Constraint::RobustDecoding;
    dec.outcomes = decoding.runs;
    dec.failures = decoding.failed_configurations;
    dec.tables = decoding.configurations;
    dec.witness = describe(decoding);

    const auto recovery = sim::sweep_recovery(params, pda, seed, extra_adversaries);
    AuditReport rec;
    rec.constraint = Constraint::RobustRecovery;
    rec.outcomes = recovery.runs;
    rec.failures = recovery.failed_configurations;
    rec.tables = recovery.configurations;
    rec.witness = describe(recovery);
    return {dec, rec};
}

}  // namespace rsplfr::audit
