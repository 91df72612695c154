#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsplfr/pda.hpp"
#include "rsplfr/protocol.hpp"

namespace rsplfr::audit {

using protocol::SystemParams;
using Key = std::vector<std::uint32_t>;

class InfeasibleAudit : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class NonUniformPrior : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Exact joint counts of (secret, observation) pairs.
class DistributionTable {
  public:
    void add(const Key& secret, const Key& observation, std::uint64_t count = 1);
    void merge(const DistributionTable& other);

    std::uint64_t total() const noexcept { return total_; }
    bool empty() const noexcept { return total_ == 0; }
    std::size_t secret_values() const noexcept { return secrets_.size(); }
    std::size_t observation_values() const noexcept { return observations_.size(); }
    /// Count of one cell; 0 when absent.
    std::uint64_t count(const Key& secret, const Key& observation) const;

    /// True when count(x,y) * total == row(x) * col(y) for every cell.
    bool rank_one() const;
    /// Mutual information in bits, from the counts.
    double mi_bits() const;

  private:
    std::uint32_t intern(std::map<Key, std::uint32_t>& ids, std::vector<Key>& back, const Key& k);

    std::map<Key, std::uint32_t> secrets_, observations_;
    std::vector<Key> secret_keys_, observation_keys_;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> cells_;
    std::uint64_t total_ = 0;
};

struct MiResult {
    bool independent = false;  // exact rank-one factorization
    double bits = 0.0;         // exactly 0 when independent
};

/// Throws std::invalid_argument on an empty table.
MiResult exact_mi(const DistributionTable& table);

enum class Constraint { ServerSecurity, RobustRecovery, RobustDecoding, SignalSecurity, DemandPrivacy };
std::string constraint_name(Constraint c);

enum class Mutation { None, ZeroNoise, RemoveKeys, ZeroPad };
std::string mutation_name(Mutation m);
/// Accepts "none", "zero-noise", "key-removal", "zero-pad".
Mutation parse_mutation(const std::string& text);

enum class Prior { Uniform, IdenticalFiles };

struct AuditReport {
    Constraint constraint = Constraint::ServerSecurity;
    double mi_bits = 0.0;       // worst case
    bool exact_zero = true;
    std::string witness;        // worst subset when violated
    std::uint64_t outcomes = 0; // enumeration size, or decode runs for robustness
    std::size_t failures = 0;   // robustness only
    std::size_t tables = 0;

    bool passed() const { return exact_zero && failures == 0; }
};

struct MicroOptions {
    Mutation mutation = Mutation::None;
    Prior prior = Prior::Uniform;
    std::size_t jobs = 1;
    std::uint64_t max_outcomes = 10'000'000;
};

/// Number of uniformly enumerated symbols: W, then the noise Delta, V, Lambda, then p and d.
std::size_t enumerated_symbols(const SystemParams& params, const pda::Pda& pda);

/// The canonical micro instance and its PDA.
SystemParams micro_params();
pda::Pda micro_pda();

AuditReport audit_server_security(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt = {});
/// Checks I(W;X) and I(W,d;X) for the honest signals and every adversary subset of size
/// <= max(A,1) under each strategy.
AuditReport audit_signal_security(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt = {});
/// I(d_{[K]\S}; C_S, d_S, Q, Z | W) for every S, per value of W.
AuditReport audit_demand_privacy(const SystemParams& params, const pda::Pda& pda, const MicroOptions& opt = {});

/// Decoding and recovery sweeps; returns the RobustDecoding and RobustRecovery reports.
std::vector<AuditReport> audit_robustness(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed,
                                          std::size_t demand_samples = 1, std::size_t extra_adversaries = 0,
                                          std::size_t jobs = 1);

}  // namespace rsplfr::audit
