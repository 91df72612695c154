#include "rsplfr/protocol.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace rsplfr::protocol {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ProtocolError(what);
}

FieldVector uniform_vector(const ff::PrimeField& field, std::size_t n, std::mt19937_64& rng) {
    FieldVector v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(field.uniform(rng));
    return v;
}

std::span<const FieldElement> slice(std::span<const FieldElement> v, std::size_t index, std::size_t len) {
    return v.subspan(index * len, len);
}

}  // namespace

// --- SystemParams ----------------------------------------------------------

void SystemParams::validate() const {
    require(N >= 2, "N: need at least 2 files, got " + std::to_string(N));
    require(K >= 1, "K: need at least 1 user");
    require(I >= 1, "I: privacy threshold must be positive");
    require(A <= I, "A: need A <= I, got A=" + std::to_string(A) + " I=" + std::to_string(I));
    require(I <= J, "J: need I <= J, got I=" + std::to_string(I) + " J=" + std::to_string(J));
    require(J <= H, "H: need J <= H, got J=" + std::to_string(J) + " H=" + std::to_string(H));
    require(I + 2 * A < J, "J: need I + 2A < J so that L >= 1, got I=" + std::to_string(I) +
                               " A=" + std::to_string(A) + " J=" + std::to_string(J));
    require(ff::is_prime(q), "q: " + std::to_string(q) + " is not prime");
    require(q > H, "q: need q > H, got q=" + std::to_string(q) + " H=" + std::to_string(H));
    require(B >= 1, "B: file length must be positive");
    if (alphas) {
        require(alphas->size() == H, "alphas: need exactly H=" + std::to_string(H) + " points");
        for (const auto& a : *alphas) require(a.modulus() == q, "alphas: modulus differs from q");
        try {
            rscode::EvalPoints check(*alphas);
        } catch (const std::invalid_argument& e) {
            throw ProtocolError(std::string("alphas: ") + e.what());
        }
    }
}

void SystemParams::validate(const pda::Pda& pda) const {
    validate();
    require(pda.users() == K, "K: PDA has " + std::to_string(pda.users()) + " columns, K=" +
                                  std::to_string(K));
    const std::size_t sub = L() * pda.rows();
    require(B % sub == 0, "B: " + std::to_string(B) + " is not divisible by L*F=" + std::to_string(sub));
}

std::size_t SystemParams::L() const {
    if (J < I + 2 * A + 1) throw ProtocolError("J: L = J - I - 2A must be at least 1");
    return J - I - 2 * A;
}

rscode::EvalPoints SystemParams::points() const {
    if (alphas) return rscode::EvalPoints(*alphas);
    return rscode::EvalPoints::sequential(field(), H);
}

// --- Library ---------------------------------------------------------------

Library::Library(std::vector<FieldVector> files, std::size_t subfiles, std::size_t packets)
    : files_(std::move(files)), subfiles_(subfiles), packets_(packets) {
    require(!files_.empty(), "library: no files");
    require(subfiles_ >= 1 && packets_ >= 1, "library: partition counts must be positive");
    const std::size_t b = files_.front().size();
    for (const auto& f : files_) require(f.size() == b, "library: files differ in length");
    require(b % (subfiles_ * packets_) == 0, "library: B not divisible by L*F");
}

Library Library::random(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed) {
    params.validate(pda);
    const auto field = params.field();
    std::mt19937_64 rng(seed);
    std::vector<FieldVector> files;
    for (std::size_t n = 0; n < params.N; ++n) files.push_back(uniform_vector(field, params.B, rng));
    return Library(std::move(files), params.L(), pda.rows());
}

Library Library::zeros(const SystemParams& params, const pda::Pda& pda) {
    params.validate(pda);
    std::vector<FieldVector> files(params.N, params.field().zeros(params.B));
    return Library(std::move(files), params.L(), pda.rows());
}

std::span<const FieldElement> Library::subfile(std::size_t n, std::size_t l) const {
    return slice(file(n), l, subfile_len());
}

std::span<const FieldElement> Library::packet(std::size_t n, std::size_t l, std::size_t j) const {
    return slice(subfile(n, l), j, packet_len());
}

FieldVector Library::combination(std::span<const FieldElement> b) const {
    require(b.size() == files(), "combination: coefficient vector length differs from N");
    FieldVector out = ff::PrimeField(b.front().modulus()).zeros(file_len());
    for (std::size_t n = 0; n < files(); ++n) ff::axpy(out, b[n], file(n));
    return out;
}

// --- Randomness ------------------------------------------------------------

Randomness Randomness::sample(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed) {
    params.validate(pda);
    const auto field = params.field();
    const std::size_t P = params.packet_len(pda);
    std::mt19937_64 rng(seed);
    Randomness u;
    u.deltas.resize(params.N);
    for (auto& per_file : u.deltas) {
        for (std::size_t i = 0; i < params.I; ++i) per_file.push_back(uniform_vector(field, params.subfile_len(), rng));
    }
    u.vees.resize(params.L());
    for (auto& per_l : u.vees) {
        for (std::size_t s = 0; s < pda.symbols(); ++s) per_l.push_back(uniform_vector(field, P, rng));
    }
    u.lambdas.resize(params.I);
    for (auto& per_i : u.lambdas) {
        for (std::size_t s = 0; s < pda.symbols(); ++s) per_i.push_back(uniform_vector(field, P, rng));
    }
    return u;
}

Randomness Randomness::zeros(const SystemParams& params, const pda::Pda& pda) {
    params.validate(pda);
    const auto field = params.field();
    const std::size_t P = params.packet_len(pda);
    Randomness u;
    u.deltas.assign(params.N, std::vector<FieldVector>(params.I, field.zeros(params.subfile_len())));
    u.vees.assign(params.L(), std::vector<Packet>(pda.symbols(), field.zeros(P)));
    u.lambdas.assign(params.I, std::vector<Packet>(pda.symbols(), field.zeros(P)));
    return u;
}

std::span<const FieldElement> Randomness::delta_packet(std::size_t n, std::size_t i, std::size_t j,
                                                       std::size_t packet_len) const {
    return slice(deltas.at(n).at(i), j, packet_len);
}

std::size_t Randomness::symbol_count() const {
    std::size_t total = 0;
    for (const auto& a : deltas) for (const auto& v : a) total += v.size();
    for (const auto& a : vees) for (const auto& v : a) total += v.size();
    for (const auto& a : lambdas) for (const auto& v : a) total += v.size();
    return total;
}

// --- PolyBank --------------------------------------------------------------

PolyBank::PolyBank(const SystemParams& params, const Library& library, const Randomness& randomness)
    : library_(&library), randomness_(&randomness), L_(params.L()), dim_(params.dimension()) {
    require(library.files() == params.N, "library: expected N=" + std::to_string(params.N) + " files");
    require(library.file_len() == params.B, "library: files must have B symbols");
    require(library.subfile_count() == L_, "library: expected L subfiles");
    require(randomness.deltas.size() == params.N, "randomness: expected N noise groups");
    for (const auto& d : randomness.deltas) {
        require(d.size() == params.I, "randomness: expected I noise subfiles per file");
        for (const auto& v : d) require(v.size() == library.subfile_len(), "randomness: noise subfile length");
    }
    require(randomness.vees.size() == L_, "randomness: expected L key groups");
    require(randomness.lambdas.size() == params.I, "randomness: expected I key-noise groups");
}

std::span<const FieldElement> PolyBank::file_coeff(std::size_t n, std::size_t c) const {
    if (c < L_) return library_->subfile(n, c);
    return randomness_->deltas.at(n).at(c - L_);
}

std::span<const FieldElement> PolyBank::key_coeff(std::size_t s, std::size_t c) const {
    if (c < L_) return randomness_->vees.at(c).at(s);
    return randomness_->lambdas.at(c - L_).at(s);
}

namespace {

template <typename CoeffFn>
FieldVector horner(std::size_t dim, const FieldElement& x, CoeffFn coeff) {
    auto top = coeff(dim - 1);
    FieldVector acc(top.begin(), top.end());
    for (std::size_t c = dim - 1; c-- > 0;) {
        auto next = coeff(c);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] * x + next[i];
    }
    return acc;
}

}  // namespace

FieldVector PolyBank::eval_file(std::size_t n, const FieldElement& x) const {
    return horner(dim_, x, [&](std::size_t c) { return file_coeff(n, c); });
}

FieldVector PolyBank::eval_key(std::size_t s, const FieldElement& x) const {
    return horner(dim_, x, [&](std::size_t c) { return key_coeff(s, c); });
}

// --- Role state sizes --------------------------------------------------------

std::size_t ServerStore::size_symbols() const {
    std::size_t total = 0;
    for (const auto& v : coded_subfiles) total += v.size();
    for (const auto& v : coded_keys) total += v.size();
    return total;
}

std::size_t UserCache::size_symbols() const {
    std::size_t total = 0;
    for (const auto& row : rows) for (const auto& p : row.packets) total += p.size();
    return total;
}

std::size_t Signal::payload_symbols() const {
    std::size_t total = 0;
    for (const auto& p : payload) total += p.size();
    return total;
}

// --- Storage, placement, queries -------------------------------------------

std::vector<ServerStore> build_storage(const SystemParams& params, const pda::Pda& pda,
                                       const Library& library, const Randomness& randomness) {
    params.validate(pda);
    require(library.packet_count() == pda.rows(), "library: expected F packets per subfile");
    const std::size_t P = params.packet_len(pda);
    for (const auto& per_l : randomness.vees) {
        require(per_l.size() == pda.symbols(), "randomness: expected S keys per subfile index");
        for (const auto& v : per_l) require(v.size() == P, "randomness: key packet length");
    }
    for (const auto& per_i : randomness.lambdas) {
        require(per_i.size() == pda.symbols(), "randomness: expected S key noises per index");
        for (const auto& v : per_i) require(v.size() == P, "randomness: key-noise packet length");
    }
    const PolyBank bank(params, library, randomness);
    const auto points = params.points();

    std::vector<ServerStore> stores;
    stores.reserve(params.H);
    for (std::size_t h = 0; h < params.H; ++h) {
        ServerStore z;
        z.server = h;
        for (std::size_t n = 0; n < params.N; ++n) z.coded_subfiles.push_back(bank.eval_file(n, points[h]));
        for (std::size_t s = 0; s < pda.symbols(); ++s) z.coded_keys.push_back(bank.eval_key(s, points[h]));
        stores.push_back(std::move(z));
    }
    return stores;
}

UserCache place_user(const SystemParams& params, const pda::Pda& pda, const Library& library,
                     const Randomness& randomness, std::size_t user, std::span<const FieldElement> p) {
    params.validate(pda);
    require(user < params.K, "user: index " + std::to_string(user) + " out of range");
    require(p.size() == params.N, "p: privacy vector must have N entries");
    ff::require_modulus(p, params.q);
    const std::size_t L = params.L();

    UserCache cache;
    cache.user = user;
    cache.p.assign(p.begin(), p.end());
    for (std::size_t j = 0; j < pda.rows(); ++j) {
        CacheRow row;
        const auto& e = pda.at(j, user);
        if (e.is_star()) {
            row.uncoded = true;
            for (std::size_t n = 0; n < params.N; ++n) {
                for (std::size_t l = 0; l < L; ++l) {
                    auto pk = library.packet(n, l, j);
                    row.packets.emplace_back(pk.begin(), pk.end());
                }
            }
        } else {
            const std::size_t s = e.symbol_value() - 1;
            for (std::size_t l = 0; l < L; ++l) {
                Packet key = randomness.vees.at(l).at(s);
                for (std::size_t n = 0; n < params.N; ++n) ff::axpy(key, p[n], library.packet(n, l, j));
                row.packets.push_back(std::move(key));
            }
        }
        cache.rows.push_back(std::move(row));
    }
    return cache;
}

Query make_query(std::span<const FieldElement> demand, std::span<const FieldElement> p) {
    require(demand.size() == p.size(), "query: demand and privacy vector lengths differ");
    Query out;
    out.q.reserve(p.size());
    for (std::size_t n = 0; n < p.size(); ++n) out.q.push_back(demand[n] + p[n]);
    return out;
}

// --- Delivery ----------------------------------------------------------------

Signal server_signal(const ServerStore& store, const pda::Pda& pda, std::span<const Query> queries) {
    require(queries.size() == pda.users(), "queries: expected " + std::to_string(pda.users()) +
                                               " queries, got " + std::to_string(queries.size()));
    require(!store.coded_subfiles.empty(), "store: no coded subfiles");
    require(store.coded_keys.size() == pda.symbols(), "store: expected S coded keys");
    const std::size_t N = store.coded_subfiles.size();
    for (const auto& qu : queries) require(qu.q.size() == N, "queries: each query must have N entries");
    const std::size_t sub_len = store.coded_subfiles.front().size();
    require(sub_len % pda.rows() == 0, "store: coded subfile length not divisible by F");
    const std::size_t P = sub_len / pda.rows();

    Signal x;
    x.origin = store.server;
    for (const auto& qu : queries) x.query_echo.push_back(qu.q);
    for (std::size_t s = 0; s < pda.symbols(); ++s) {
        Packet y = store.coded_keys[s];
        require(y.size() == P, "store: coded key length differs from packet length");
        for (const auto& cell : pda.occurrences(static_cast<std::uint32_t>(s + 1))) {
            const auto& qv = queries[cell.col].q;
            for (std::size_t n = 0; n < N; ++n) {
                ff::axpy(y, qv[n], slice(store.coded_subfiles[n], cell.row, P));
            }
        }
        x.payload.push_back(std::move(y));
    }
    return x;
}

std::string strategy_name(const AdversaryStrategy& strategy) {
    struct Namer {
        std::string operator()(const UniformRandom& u) const { return "UniformRandom(" + std::to_string(u.seed) + ")"; }
        std::string operator()(const ZeroPayload&) const { return "ZeroPayload"; }
        std::string operator()(const HonestPlusConstant& c) const { return "HonestPlusConstant(" + std::to_string(c.c) + ")"; }
        std::string operator()(const HonestPermutedSlices&) const { return "HonestPermutedSlices"; }
    };
    return std::visit(Namer{}, strategy);
}

std::vector<AdversaryStrategy> all_strategies(std::uint64_t seed) {
    return {UniformRandom{seed}, ZeroPayload{}, HonestPlusConstant{1}, HonestPermutedSlices{}};
}

namespace {

/// Applies a strategy to a list of equal-field vectors in place, treating them as one
/// flattened sequence.
void tamper(const AdversaryStrategy& strategy, std::vector<FieldVector*> parts,
            const ff::PrimeField& field, std::uint64_t stream) {
    std::vector<FieldElement*> flat;
    for (auto* v : parts) for (auto& e : *v) flat.push_back(&e);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, UniformRandom>) {
                std::mt19937_64 rng(splitmix(s.seed ^ splitmix(stream)));
                for (auto* e : flat) *e = field.uniform(rng);
            } else if constexpr (std::is_same_v<S, ZeroPayload>) {
                for (auto* e : flat) *e = field.zero();
            } else if constexpr (std::is_same_v<S, HonestPlusConstant>) {
                const auto c = field.element(s.c);
                for (auto* e : flat) *e += c;
            } else {
                if (flat.size() < 2) return;
                FieldVector copy;
                for (auto* e : flat) copy.push_back(*e);
                for (std::size_t i = 0; i < flat.size(); ++i) *flat[(i + 1) % flat.size()] = copy[i];
            }
        },
        strategy);
}

}  // namespace

std::vector<Signal> adversary_signal(const AdversaryStrategy& strategy, std::span<const ServerStore> own_stores,
                                     const pda::Pda& pda, std::span<const Query> queries) {
    std::vector<Signal> out;
    for (const auto& store : own_stores) {
        Signal x = server_signal(store, pda, queries);
        const ff::PrimeField field(store.coded_subfiles.front().front().modulus());
        std::vector<FieldVector*> parts;
        for (auto& p : x.payload) parts.push_back(&p);
        tamper(strategy, parts, field, store.server);
        if (std::holds_alternative<UniformRandom>(strategy)) {
            std::vector<FieldVector*> echo;
            for (auto& q : x.query_echo) echo.push_back(&q);
            tamper(strategy, echo, field, store.server + 0x1000);
        }
        out.push_back(std::move(x));
    }
    return out;
}

ServerStore corrupt_store(const AdversaryStrategy& strategy, const ServerStore& store,
                          const ff::PrimeField& field) {
    ServerStore z = store;
    std::vector<FieldVector*> parts;
    for (auto& v : z.coded_subfiles) parts.push_back(&v);
    for (auto& v : z.coded_keys) parts.push_back(&v);
    tamper(strategy, parts, field, store.server);
    return z;
}

// --- Decoding ----------------------------------------------------------------

std::vector<FieldVector> decode_slices(const rscode::EvalPoints& points, std::size_t dimension,
                                       std::size_t max_errors, std::span<const std::size_t> servers,
                                       std::span<const std::span<const FieldElement>> packets) {
    require(servers.size() == packets.size(), "decode: server and packet counts differ");
    require(!packets.empty(), "decode: nothing received");
    const std::size_t len = packets.front().size();
    for (const auto& p : packets) require(p.size() == len, "decode: received packets differ in length");

    std::vector<FieldVector> out;
    out.reserve(len);
    rscode::Codeword cw;
    cw.dimension = dimension;
    for (std::size_t sym = 0; sym < len; ++sym) {
        cw.positions.assign(points.size(), std::nullopt);
        for (std::size_t i = 0; i < servers.size(); ++i) cw.positions.at(servers[i]) = packets[i][sym];
        out.push_back(rscode::decode(cw, points, max_errors).message);
    }
    return out;
}

namespace {

void check_servers(const std::vector<std::size_t>& origins, std::size_t H) {
    std::set<std::size_t> seen;
    for (auto h : origins) {
        require(h < H, "server index " + std::to_string(h) + " out of range");
        require(seen.insert(h).second, "server " + std::to_string(h) + " appears twice");
    }
}

}  // namespace

FieldVector user_decode(const SystemParams& params, const pda::Pda& pda, const UserCache& cache,
                        std::span<const FieldElement> demand, std::span<const Query> queries,
                        std::span<const Signal> signals) {
    params.validate(pda);
    if (signals.size() != params.J) {
        throw MissingSignals("signals: need exactly J=" + std::to_string(params.J) + ", got " +
                             std::to_string(signals.size()));
    }
    require(demand.size() == params.N, "demand: must have N entries");
    require(queries.size() == params.K, "queries: expected K queries");
    require(cache.rows.size() == pda.rows(), "cache: expected F rows");
    require(cache.user < params.K, "cache: user index out of range");

    const std::size_t k = cache.user;
    const std::size_t L = params.L();
    const std::size_t F = pda.rows();
    const std::size_t P = params.packet_len(pda);
    const auto field = params.field();
    const auto points = params.points();

    std::vector<std::size_t> servers;
    for (const auto& x : signals) servers.push_back(x.origin);
    check_servers(servers, params.H);

    // W_{b,l,u} from a cached uncoded row u.
    auto cached_combination = [&](std::size_t u, std::size_t l, std::span<const FieldElement> b) {
        const auto& row = cache.rows.at(u);
        require(row.uncoded, "cache: row " + std::to_string(u + 1) + " is not uncoded");
        Packet acc = field.zeros(P);
        for (std::size_t n = 0; n < params.N; ++n) ff::axpy(acc, b[n], row.packets.at(n * L + l));
        return acc;
    };

    FieldVector out = field.zeros(params.B);
    auto write = [&](std::size_t l, std::size_t i, const Packet& pkt) {
        std::copy(pkt.begin(), pkt.end(), out.begin() + static_cast<std::ptrdiff_t>((l * F + i) * P));
    };

    for (std::size_t i = 0; i < F; ++i) {
        const auto& e = pda.at(i, k);
        if (e.is_star()) {
            for (std::size_t l = 0; l < L; ++l) write(l, i, cached_combination(i, l, demand));
            continue;
        }
        const std::uint32_t s = e.symbol_value();
        std::vector<std::span<const FieldElement>> received;
        for (const auto& x : signals) {
            require(x.payload.size() == pda.symbols(), "signal: payload must carry S packets");
            received.emplace_back(x.payload[s - 1]);
        }
        // coeffs[slice] = (Y_{1,s},...,Y_{L,s}, noise...) at that symbol slice.
        const auto coeffs = decode_slices(points, params.dimension(), params.A, servers, received);
        const auto& key_row = cache.rows[i];
        require(!key_row.uncoded && key_row.packets.size() == L, "cache: row " + std::to_string(i + 1) +
                                                                     " should hold L keys");
        for (std::size_t l = 0; l < L; ++l) {
            Packet w = field.zeros(P);
            for (std::size_t sym = 0; sym < P; ++sym) w[sym] = coeffs[sym][l] - key_row.packets[l][sym];
            for (const auto& cell : pda.occurrences(s)) {
                if (cell.row == i && cell.col == k) continue;
                const Packet other = cached_combination(cell.row, l, queries[cell.col].q);
                for (std::size_t sym = 0; sym < P; ++sym) w[sym] -= other[sym];
            }
            write(l, i, w);
        }
    }
    return out;
}

Library recover_library(const SystemParams& params, const pda::Pda& pda,
                        std::span<const ServerStore> contents) {
    params.validate(pda);
    if (contents.size() != params.J) {
        throw MissingSignals("contents: need exactly J=" + std::to_string(params.J) + " servers, got " +
                             std::to_string(contents.size()));
    }
    const auto points = params.points();
    const std::size_t L = params.L();
    const std::size_t sub_len = params.subfile_len();

    std::vector<std::size_t> servers;
    for (const auto& z : contents) {
        require(z.coded_subfiles.size() == params.N, "contents: expected N coded subfiles");
        servers.push_back(z.server);
    }
    check_servers(servers, params.H);

    std::vector<FieldVector> files;
    for (std::size_t n = 0; n < params.N; ++n) {
        std::vector<std::span<const FieldElement>> received;
        for (const auto& z : contents) {
            require(z.coded_subfiles[n].size() == sub_len, "contents: coded subfile length");
            received.emplace_back(z.coded_subfiles[n]);
        }
        const auto coeffs = decode_slices(points, params.dimension(), params.A, servers, received);
        FieldVector file = params.field().zeros(params.B);
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t sym = 0; sym < sub_len; ++sym) file[l * sub_len + sym] = coeffs[sym][l];
        }
        files.push_back(std::move(file));
    }
    return Library(std::move(files), L, pda.rows());
}

}  // namespace rsplfr::protocol
