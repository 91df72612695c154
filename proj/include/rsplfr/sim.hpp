#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rsplfr/pda.hpp"
#include "rsplfr/protocol.hpp"
#include "rsplfr/rational.hpp"

namespace rsplfr::sim {

using protocol::AdversaryStrategy;
using protocol::SystemParams;

/// Memory, storage and load measured from the role objects, normalized by B.
struct MeasuredMsc {
    Rational M, T, R;
    std::size_t subpacketization = 0;
    std::size_t privacy_vector_symbols = 0;  // |p_k|, not counted in M
    bool operator==(const MeasuredMsc&) const = default;
};

struct Scenario {
    Scenario(SystemParams p, pda::Pda d) : params(std::move(p)), pda(std::move(d)) {}

    SystemParams params;
    pda::Pda pda;
    std::uint64_t seed = 1;
    /// Explicit d_[K]; when absent, each demand sample is drawn from the seed.
    std::optional<std::vector<ff::FieldVector>> demands;
    std::size_t demand_samples = 1;
    bool zero_library = false;

    std::vector<std::size_t> adversaries;  // |adversaries| <= A for a single run
    AdversaryStrategy strategy = protocol::ZeroPayload{};
    std::vector<std::size_t> delivery;     // J servers; empty means the first J

    bool sweep_delivery = false;     // all J-subsets
    bool sweep_adversaries = false;  // all subsets of size <= A, including none
    bool sweep_strategies = false;   // the four strategies
    /// Negative control: adversary subsets of size exactly A + extra_adversaries.
    std::size_t extra_adversaries = 0;
    /// Refuse sweeps above this many decode runs.
    std::size_t max_runs = 2'000'000;
};

/// Everything fixed before delivery: library, randomness, server stores, user caches.
struct Deployment {
    SystemParams params;
    pda::Pda pda;
    protocol::Library library;
    protocol::Randomness randomness;
    std::vector<protocol::ServerStore> stores;
    std::vector<ff::FieldVector> privacy;  // p_k
    std::vector<protocol::UserCache> caches;

    static Deployment prepare(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed,
                              bool zero_library = false);
    MeasuredMsc measure() const;
};

struct Witness {
    std::vector<std::size_t> delivery;
    std::vector<std::size_t> adversaries;
    std::string strategy;
    std::size_t demand_sample = 0;
    std::size_t user = 0;
    std::string reason;
};

struct RunResult {
    std::vector<ff::FieldVector> demands;
    std::vector<ff::FieldVector> decoded;  // empty entry when decoding threw
    std::vector<ff::FieldVector> truth;
    std::vector<protocol::Signal> signals;  // as received, in delivery order
    bool pass = false;
    MeasuredMsc msc;
    std::vector<Witness> failures;
    double seconds = 0.0;
};

struct SweepResult {
    std::size_t configurations = 0;
    std::size_t runs = 0;              // configurations x demand samples
    std::size_t failed_configurations = 0;
    std::size_t failed_runs = 0;
    std::vector<Witness> witnesses;    // first few failures
    MeasuredMsc msc;
    double seconds = 0.0;
    bool pass() const { return failed_runs == 0; }
};

/// Demand tuple number `sample` for seed `seed`.
std::vector<ff::FieldVector> sample_demands(const SystemParams& params, std::uint64_t seed, std::size_t sample);

/// sum_n d_n W_n straight from the raw files.
ff::FieldVector ground_truth(const protocol::Library& library, std::span<const ff::FieldElement> demand);

RunResult run(const Scenario& scenario);
SweepResult sweep(const Scenario& scenario, std::size_t jobs = 1);

/// Library recovery over every J-subset x corrupted subset x strategy. Corrupted subsets
/// have sizes 0..A, or exactly A + extra when `extra` > 0.
SweepResult sweep_recovery(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed,
                           std::size_t extra = 0);

/// All size-r subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t r);

}  // namespace rsplfr::sim
