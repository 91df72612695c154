#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rsplfr/ff.hpp"
#include "rsplfr/pda.hpp"
#include "rsplfr/rscode.hpp"

namespace rsplfr::protocol {

using ff::FieldElement;
using ff::FieldVector;
using Packet = FieldVector;

/// Parameter or dimension problem; the message names the offending field.
class ProtocolError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class MissingSignals : public ProtocolError {
  public:
    using ProtocolError::ProtocolError;
};

/// Scalar parameters of an (N,K,H,A,I,J) system over F_q with file length B.
/// Server and user indices are 0-based throughout the API.
struct SystemParams {
    std::size_t N = 0, K = 0, H = 0, A = 0, I = 0, J = 0;
    std::uint32_t q = 0;
    std::size_t B = 0;
    std::optional<FieldVector> alphas;  // defaults to alpha_h = h

    /// Checks A <= I <= J <= H, I + 2A < J, q prime, q > H, N >= 2.
    void validate() const;
    /// Additionally checks K against the PDA and that L*F divides B.
    void validate(const pda::Pda& pda) const;

    std::size_t L() const;                       // J - I - 2A
    std::size_t dimension() const { return I + L(); }
    ff::PrimeField field() const { return ff::PrimeField(q); }
    rscode::EvalPoints points() const;
    std::size_t packet_len(const pda::Pda& pda) const { return B / (L() * pda.rows()); }
    std::size_t subfile_len() const { return B / L(); }
};

/// N files of B symbols. Subfile l is the l-th B/L block; packet (l,j) is the
/// j-th B/(LF) block inside subfile l.
class Library {
  public:
    Library(std::vector<FieldVector> files, std::size_t subfiles, std::size_t packets);
    static Library random(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed);
    static Library zeros(const SystemParams& params, const pda::Pda& pda);

    std::size_t files() const noexcept { return files_.size(); }
    std::size_t file_len() const noexcept { return files_.front().size(); }
    std::size_t subfile_count() const noexcept { return subfiles_; }
    std::size_t packet_count() const noexcept { return packets_; }
    std::size_t subfile_len() const noexcept { return file_len() / subfiles_; }
    std::size_t packet_len() const noexcept { return subfile_len() / packets_; }

    std::span<const FieldElement> file(std::size_t n) const { return files_.at(n); }
    std::span<const FieldElement> subfile(std::size_t n, std::size_t l) const;
    std::span<const FieldElement> packet(std::size_t n, std::size_t l, std::size_t j) const;
    /// sum_n b_n * W_n
    FieldVector combination(std::span<const FieldElement> b) const;

    bool operator==(const Library&) const = default;

  private:
    std::vector<FieldVector> files_;
    std::size_t subfiles_;
    std::size_t packets_;
};

/// Noise subfiles Delta_{n,i} (B/L each), keys V_{l,s} and key noise Lambda_{i,s} (B/(LF) each).
struct Randomness {
    std::vector<std::vector<FieldVector>> deltas;   // [n][i]
    std::vector<std::vector<Packet>> vees;          // [l][s]
    std::vector<std::vector<Packet>> lambdas;       // [i][s]

    static Randomness sample(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed);
    static Randomness zeros(const SystemParams& params, const pda::Pda& pda);
    /// Packet j of Delta_{n,i}.
    std::span<const FieldElement> delta_packet(std::size_t n, std::size_t i, std::size_t j,
                                               std::size_t packet_len) const;
    std::size_t symbol_count() const;
};

/// Coefficient tables of the file polynomials (subfiles then noise) and of the key
/// polynomials (keys then key noise). Degree < I + L.
class PolyBank {
  public:
    PolyBank(const SystemParams& params, const Library& library, const Randomness& randomness);

    /// Coefficient c of the file polynomial for file n (a B/L vector).
    std::span<const FieldElement> file_coeff(std::size_t n, std::size_t c) const;
    /// Coefficient c of the key polynomial for symbol s (0-based).
    std::span<const FieldElement> key_coeff(std::size_t s, std::size_t c) const;
    std::size_t degree_bound() const noexcept { return dim_; }

    /// File polynomial of file n evaluated at x, symbol by symbol.
    FieldVector eval_file(std::size_t n, const FieldElement& x) const;
    FieldVector eval_key(std::size_t s, const FieldElement& x) const;

  private:
    const Library* library_;
    const Randomness* randomness_;
    std::size_t L_, dim_;
};

struct ServerStore {
    std::size_t server = 0;
    std::vector<FieldVector> coded_subfiles;  // [n], B/L symbols
    std::vector<Packet> coded_keys;           // [s], B/(LF) symbols

    std::size_t size_symbols() const;
    bool operator==(const ServerStore&) const = default;
};

struct CacheRow {
    bool uncoded = false;
    /// Uncoded rows: N*L packets W_{n,l,j} at index n*L + l.
    /// Key rows: L packets W_{p,l,j} + V_{l,a_{j,k}} at index l.
    std::vector<Packet> packets;
};

struct UserCache {
    std::size_t user = 0;
    FieldVector p;
    std::vector<CacheRow> rows;  // one per PDA row

    /// Cached packet symbols, excluding the N symbols of p.
    std::size_t size_symbols() const;
};

struct Query {
    FieldVector q;
    bool operator==(const Query&) const = default;
};

struct Signal {
    std::size_t origin = 0;
    std::vector<FieldVector> query_echo;  // q_1..q_K as broadcast by the server
    std::vector<Packet> payload;          // [s], B/(LF) symbols

    std::size_t payload_symbols() const;
    bool operator==(const Signal&) const = default;
};

std::vector<ServerStore> build_storage(const SystemParams& params, const pda::Pda& pda,
                                       const Library& library, const Randomness& randomness);

UserCache place_user(const SystemParams& params, const pda::Pda& pda, const Library& library,
                     const Randomness& randomness, std::size_t user, std::span<const FieldElement> p);

Query make_query(std::span<const FieldElement> demand, std::span<const FieldElement> p);

Signal server_signal(const ServerStore& store, const pda::Pda& pda, std::span<const Query> queries);

/// What an adversarial server sends instead of its honest signal. Each strategy reads
/// only the adversary's own store and the queries.
struct UniformRandom {
    std::uint64_t seed = 0;
};
struct ZeroPayload {};
struct HonestPlusConstant {
    std::uint32_t c = 1;
};
/// Honest payload flattened and cyclically shifted by one symbol.
struct HonestPermutedSlices {};
using AdversaryStrategy = std::variant<UniformRandom, ZeroPayload, HonestPlusConstant, HonestPermutedSlices>;

std::string strategy_name(const AdversaryStrategy& strategy);
/// The four strategies with default arguments.
std::vector<AdversaryStrategy> all_strategies(std::uint64_t seed = 1);

std::vector<Signal> adversary_signal(const AdversaryStrategy& strategy, std::span<const ServerStore> own_stores,
                                     const pda::Pda& pda, std::span<const Query> queries);

/// Corrupted contents an adversarial server hands over during library recovery.
ServerStore corrupt_store(const AdversaryStrategy& strategy, const ServerStore& store,
                          const ff::PrimeField& field);

/// Decodes sum_n d_n W_n for the cache's user. `queries` are the users' own broadcasts;
/// `signals` come from exactly J distinct servers, up to A of them arbitrary.
FieldVector user_decode(const SystemParams& params, const pda::Pda& pda, const UserCache& cache,
                        std::span<const FieldElement> demand, std::span<const Query> queries,
                        std::span<const Signal> signals);

/// Rebuilds the library from J server contents, up to A of them arbitrary.
Library recover_library(const SystemParams& params, const pda::Pda& pda,
                        std::span<const ServerStore> contents);

/// Decodes each symbol slice of equal-length packets received from the given servers.
/// Returns [slice][coefficient].
std::vector<FieldVector> decode_slices(const rscode::EvalPoints& points, std::size_t dimension,
                                       std::size_t max_errors, std::span<const std::size_t> servers,
                                       std::span<const std::span<const FieldElement>> packets);

}  // namespace rsplfr::protocol
