#include "rsplfr/sim.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>
#include <thread>

namespace rsplfr::sim {

using ff::FieldVector;
using protocol::Query;
using protocol::Signal;

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t x = seed ^ (tag * 0x9e3779b97f4a7c15ULL);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum SeedTag : std::uint64_t { kLibrary = 1, kRandomness = 2, kPrivacy = 3, kDemand = 4 };

constexpr std::size_t kMaxWitnesses = 16;

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t r) {
    std::vector<std::vector<std::size_t>> out;
    if (r > n) return out;
    std::vector<std::size_t> cur(r);
    std::iota(cur.begin(), cur.end(), 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = r;
        while (i > 0 && cur[i - 1] == n - r + i - 1) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t j = i; j < r; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

Deployment Deployment::prepare(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed,
                               bool zero_library) {
    params.validate(pda);
    auto library = zero_library ? protocol::Library::zeros(params, pda)
                                : protocol::Library::random(params, pda, mix(seed, kLibrary));
    auto randomness = protocol::Randomness::sample(params, pda, mix(seed, kRandomness));
    auto stores = protocol::build_storage(params, pda, library, randomness);

    const auto field = params.field();
    std::mt19937_64 rng(mix(seed, kPrivacy));
    std::vector<FieldVector> privacy;
    std::vector<protocol::UserCache> caches;
    for (std::size_t k = 0; k < params.K; ++k) {
        FieldVector p;
        for (std::size_t n = 0; n < params.N; ++n) p.push_back(field.uniform(rng));
        caches.push_back(protocol::place_user(params, pda, library, randomness, k, p));
        privacy.push_back(std::move(p));
    }
    return Deployment{params,           pda, std::move(library), std::move(randomness),
                      std::move(stores), std::move(privacy), std::move(caches)};
}

MeasuredMsc Deployment::measure() const {
    const auto B = static_cast<std::int64_t>(params.B);
    MeasuredMsc m;
    std::size_t cache_max = 0;
    for (const auto& c : caches) cache_max = std::max(cache_max, c.size_symbols());
    std::size_t store_max = 0;
    for (const auto& z : stores) store_max = std::max(store_max, z.size_symbols());
    // Every server sends S packets; the load is measured on an honest all-zero-query signal.
    std::vector<Query> zero_queries(params.K, Query{params.field().zeros(params.N)});
    std::size_t load_max = 0;
    for (const auto& z : stores) {
        load_max = std::max(load_max, protocol::server_signal(z, pda, zero_queries).payload_symbols());
    }
    m.M = Rational(static_cast<std::int64_t>(cache_max), B);
    m.T = Rational(static_cast<std::int64_t>(store_max), B);
    m.R = Rational(static_cast<std::int64_t>(load_max), B);
    m.subpacketization = params.L() * pda.rows();
    m.privacy_vector_symbols = params.N;
    return m;
}

std::vector<FieldVector> sample_demands(const SystemParams& params, std::uint64_t seed, std::size_t sample) {
    const auto field = params.field();
    std::mt19937_64 rng(mix(mix(seed, kDemand), sample));
    std::vector<FieldVector> d(params.K);
    for (auto& dk : d) {
        for (std::size_t n = 0; n < params.N; ++n) dk.push_back(field.uniform(rng));
    }
    return d;
}

FieldVector ground_truth(const protocol::Library& library, std::span<const ff::FieldElement> demand) {
    const ff::PrimeField field(demand.front().modulus());
    FieldVector out = field.zeros(library.file_len());
    for (std::size_t n = 0; n < library.files(); ++n) {
        auto f = library.file(n);
        for (std::size_t b = 0; b < out.size(); ++b) out[b] = out[b] + demand[n] * f[b];
    }
    return out;
}

namespace {

struct Config {
    const std::vector<std::size_t>* delivery;
    const std::vector<std::size_t>* adversaries;
    const AdversaryStrategy* strategy;
};

struct Sample {
    std::vector<FieldVector> demands;
    std::vector<Query> queries;
    std::vector<Signal> honest;  // one per server
    std::vector<FieldVector> truth;
};

Sample make_sample(const Deployment& dep, std::vector<FieldVector> demands) {
    Sample s;
    s.demands = std::move(demands);
    for (std::size_t k = 0; k < dep.params.K; ++k) {
        s.queries.push_back(protocol::make_query(s.demands[k], dep.privacy[k]));
        s.truth.push_back(ground_truth(dep.library, s.demands[k]));
    }
    for (const auto& z : dep.stores) s.honest.push_back(protocol::server_signal(z, dep.pda, s.queries));
    return s;
}

/// Signals as received from the delivery set with the adversaries' replacements.
std::vector<Signal> received_signals(const Deployment& dep, const Sample& sample, const Config& cfg) {
    std::vector<Signal> out;
    for (std::size_t h : *cfg.delivery) {
        const bool bad = std::find(cfg.adversaries->begin(), cfg.adversaries->end(), h) != cfg.adversaries->end();
        if (!bad) {
            out.push_back(sample.honest[h]);
        } else {
            auto forged = protocol::adversary_signal(*cfg.strategy, std::span(&dep.stores[h], 1), dep.pda,
                                                     sample.queries);
            out.push_back(std::move(forged.front()));
        }
    }
    return out;
}

struct ConfigOutcome {
    std::size_t failed_runs = 0;
    std::vector<Witness> witnesses;
};

ConfigOutcome run_config(const Deployment& dep, const std::vector<Sample>& samples, const Config& cfg,
                         std::vector<FieldVector>* decoded_out = nullptr,
                         std::vector<Signal>* signals_out = nullptr) {
    ConfigOutcome outcome;
    for (std::size_t si = 0; si < samples.size(); ++si) {
        const auto& sample = samples[si];
        const auto signals = received_signals(dep, sample, cfg);
        bool run_failed = false;
        for (std::size_t k = 0; k < dep.params.K; ++k) {
            std::string reason;
            FieldVector got;
            try {
                got = protocol::user_decode(dep.params, dep.pda, dep.caches[k], sample.demands[k], sample.queries,
                                            signals);
                if (got != sample.truth[k]) reason = "decoded output differs from ground truth";
            } catch (const std::exception& e) {
                reason = e.what();
            }
            if (decoded_out) decoded_out->push_back(got);
            if (!reason.empty()) {
                run_failed = true;
                if (outcome.witnesses.size() < kMaxWitnesses) {
                    outcome.witnesses.push_back({*cfg.delivery, *cfg.adversaries, protocol::strategy_name(*cfg.strategy),
                                                 si, k, reason});
                }
            }
        }
        if (signals_out) *signals_out = signals;
        if (run_failed) ++outcome.failed_runs;
    }
    return outcome;
}

std::vector<std::size_t> default_delivery(const Scenario& sc) {
    if (!sc.delivery.empty()) return sc.delivery;
    std::vector<std::size_t> d(sc.params.J);
    std::iota(d.begin(), d.end(), 0);
    return d;
}

void check_subset(const std::vector<std::size_t>& v, std::size_t H, const char* what) {
    std::vector<std::size_t> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw protocol::ProtocolError(std::string(what) + ": repeated server index");
    }
    for (auto h : v) {
        if (h >= H) throw protocol::ProtocolError(std::string(what) + ": server index " + std::to_string(h) +
                                                  " out of range");
    }
}

std::vector<std::vector<std::size_t>> adversary_sets(const SystemParams& p, std::size_t extra) {
    std::vector<std::vector<std::size_t>> out;
    if (extra > 0) return combinations(p.H, p.A + extra);
    for (std::size_t a = 0; a <= p.A; ++a) {
        auto c = combinations(p.H, a);
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < jobs; ++t) {
        workers.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += jobs) fn(i);
        });
    }
}

}  // namespace

RunResult run(const Scenario& scenario) {
    const auto start = std::chrono::steady_clock::now();
    const auto& p = scenario.params;
    const auto delivery = default_delivery(scenario);
    check_subset(delivery, p.H, "delivery");
    check_subset(scenario.adversaries, p.H, "adversaries");
    if (delivery.size() != p.J) {
        throw protocol::ProtocolError("delivery: need exactly J=" + std::to_string(p.J) + " servers");
    }
    if (scenario.adversaries.size() > p.A + scenario.extra_adversaries) {
        throw protocol::ProtocolError("adversaries: at most A=" + std::to_string(p.A) + " allowed");
    }

    const auto dep = Deployment::prepare(p, scenario.pda, scenario.seed, scenario.zero_library);
    auto demands = scenario.demands ? *scenario.demands : sample_demands(p, scenario.seed, 0);
    if (demands.size() != p.K) throw protocol::ProtocolError("demands: need one demand per user");
    const std::vector<Sample> samples{make_sample(dep, demands)};

    RunResult result;
    result.demands = samples.front().demands;
    result.truth = samples.front().truth;
    const Config cfg{&delivery, &scenario.adversaries, &scenario.strategy};
    auto outcome = run_config(dep, samples, cfg, &result.decoded, &result.signals);
    result.failures = std::move(outcome.witnesses);
    result.pass = outcome.failed_runs == 0;
    result.msc = dep.measure();
    result.seconds = elapsed(start);
    return result;
}

SweepResult sweep(const Scenario& scenario, std::size_t jobs) {
    const auto start = std::chrono::steady_clock::now();
    const auto& p = scenario.params;

    const auto deliveries = scenario.sweep_delivery ? combinations(p.H, p.J)
                                                    : std::vector<std::vector<std::size_t>>{default_delivery(scenario)};
    const auto adversaries = scenario.sweep_adversaries ? adversary_sets(p, scenario.extra_adversaries)
                                                        : std::vector<std::vector<std::size_t>>{scenario.adversaries};
    const auto strategies = scenario.sweep_strategies ? protocol::all_strategies(scenario.seed)
                                                      : std::vector<AdversaryStrategy>{scenario.strategy};
    for (const auto& d : deliveries) {
        check_subset(d, p.H, "delivery");
        if (d.size() != p.J) throw protocol::ProtocolError("delivery: need exactly J servers");
    }
    for (const auto& a : adversaries) check_subset(a, p.H, "adversaries");

    const std::size_t sample_count = scenario.demands ? 1 : std::max<std::size_t>(1, scenario.demand_samples);
    const std::size_t configs = deliveries.size() * adversaries.size() * strategies.size();
    if (configs * sample_count > scenario.max_runs) {
        throw protocol::ProtocolError("sweep: " + std::to_string(configs * sample_count) +
                                      " runs exceed the limit of " + std::to_string(scenario.max_runs));
    }

    const auto dep = Deployment::prepare(p, scenario.pda, scenario.seed, scenario.zero_library);
    std::vector<Sample> samples;
    for (std::size_t s = 0; s < sample_count; ++s) {
        samples.push_back(make_sample(dep, scenario.demands ? *scenario.demands : sample_demands(p, scenario.seed, s)));
    }

    std::vector<ConfigOutcome> outcomes(configs);
    parallel_for(configs, jobs, [&](std::size_t idx) {
        const std::size_t si = idx % strategies.size();
        const std::size_t ai = (idx / strategies.size()) % adversaries.size();
        const std::size_t di = idx / (strategies.size() * adversaries.size());
        outcomes[idx] = run_config(dep, samples, Config{&deliveries[di], &adversaries[ai], &strategies[si]});
    });

    SweepResult result;
    result.configurations = configs;
    result.runs = configs * sample_count;
    for (auto& o : outcomes) {
        result.failed_runs += o.failed_runs;
        if (o.failed_runs) ++result.failed_configurations;
        for (auto& w : o.witnesses) {
            if (result.witnesses.size() < kMaxWitnesses) result.witnesses.push_back(std::move(w));
        }
    }
    result.msc = dep.measure();
    result.seconds = elapsed(start);
    return result;
}

SweepResult sweep_recovery(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed, std::size_t extra) {
    const auto start = std::chrono::steady_clock::now();
    const auto dep = Deployment::prepare(params, pda, seed);
    const auto field = params.field();
    const auto deliveries = combinations(params.H, params.J);
    const auto corrupted = adversary_sets(params, extra);
    const auto strategies = protocol::all_strategies(seed);

    SweepResult result;
    for (const auto& d : deliveries) {
        for (const auto& bad : corrupted) {
            for (const auto& strategy : strategies) {
                ++result.configurations;
                ++result.runs;
                std::vector<protocol::ServerStore> contents;
                for (std::size_t h : d) {
                    const bool is_bad = std::find(bad.begin(), bad.end(), h) != bad.end();
                    contents.push_back(is_bad ? protocol::corrupt_store(strategy, dep.stores[h], field) : dep.stores[h]);
                }
                std::string reason;
                try {
                    if (protocol::recover_library(params, pda, contents) != dep.library) {
                        reason = "recovered library differs from original";
                    }
                } catch (const std::exception& e) {
                    reason = e.what();
                }
                if (!reason.empty()) {
                    ++result.failed_runs;
                    ++result.failed_configurations;
                    if (result.witnesses.size() < kMaxWitnesses) {
                        result.witnesses.push_back({d, bad, protocol::strategy_name(strategy), 0, 0, reason});
                    }
                }
            }
        }
    }
    result.msc = dep.measure();
    result.seconds = elapsed(start);
    return result;
}

}  // namespace rsplfr::sim
