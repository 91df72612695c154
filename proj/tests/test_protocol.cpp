#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "rsplfr/protocol.hpp"
#include "rsplfr/sim.hpp"

using namespace rsplfr;
using namespace rsplfr::protocol;

namespace {

SystemParams toy_params(std::size_t B = 6, std::uint32_t q = 7) {
    SystemParams p;
    p.N = 4;
    p.K = 3;
    p.H = 6;
    p.A = 1;
    p.I = 1;
    p.J = 5;
    p.q = q;
    p.B = B;
    return p;
}

pda::Pda toy_pda() { return pda::parse("* 1 2\n1 * 3\n2 3 *"); }

FieldVector vec(const ff::PrimeField& f, std::initializer_list<std::uint64_t> v) {
    FieldVector out;
    for (auto x : v) out.push_back(f.element(x));
    return out;
}

FieldVector random_vec(const ff::PrimeField& f, std::size_t n, std::mt19937_64& rng) {
    FieldVector out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(f.uniform(rng));
    return out;
}

struct Setup {
    SystemParams params;
    pda::Pda pda;
    Library library;
    Randomness randomness;
    std::vector<ServerStore> stores;
    std::vector<UserCache> caches;
    std::vector<FieldVector> p;
};

Setup make_setup(const SystemParams& params, const pda::Pda& pda, std::uint64_t seed) {
    auto lib = Library::random(params, pda, seed);
    auto u = Randomness::sample(params, pda, seed + 1);
    auto stores = build_storage(params, pda, lib, u);
    std::mt19937_64 rng(seed + 2);
    std::vector<UserCache> caches;
    std::vector<FieldVector> ps;
    for (std::size_t k = 0; k < params.K; ++k) {
        ps.push_back(random_vec(params.field(), params.N, rng));
        caches.push_back(place_user(params, pda, lib, u, k, ps.back()));
    }
    return Setup{params, pda, std::move(lib), std::move(u), std::move(stores), std::move(caches), std::move(ps)};
}

/// Integer-arithmetic evaluation of packet u of coded file n at x, symbol i.
std::uint64_t coded_file_symbol(const Setup& s, std::size_t n, std::size_t u, std::size_t i, std::uint64_t x) {
    const auto q = s.params.q;
    const std::size_t L = s.params.L(), F = s.pda.rows(), P = s.params.packet_len(s.pda);
    std::vector<std::uint64_t> coeffs;
    for (std::size_t l = 0; l < L; ++l) coeffs.push_back(s.library.file(n)[(l * F + u) * P + i].value());
    for (std::size_t d = 0; d < s.params.I; ++d) coeffs.push_back(s.randomness.deltas[n][d][u * P + i].value());
    return oracle::eval(coeffs, x, q);
}

std::uint64_t coded_key_symbol(const Setup& s, std::size_t sym, std::size_t i, std::uint64_t x) {
    std::vector<std::uint64_t> coeffs;
    for (std::size_t l = 0; l < s.params.L(); ++l) coeffs.push_back(s.randomness.vees[l][sym][i].value());
    for (std::size_t d = 0; d < s.params.I; ++d) coeffs.push_back(s.randomness.lambdas[d][sym][i].value());
    return oracle::eval(coeffs, x, s.params.q);
}

std::vector<Query> queries_for(const Setup& s, const std::vector<FieldVector>& demands) {
    std::vector<Query> qs;
    for (std::size_t k = 0; k < s.params.K; ++k) qs.push_back(make_query(demands[k], s.p[k]));
    return qs;
}

std::vector<Signal> honest_signals(const Setup& s, const std::vector<Query>& qs, const std::vector<std::size_t>& servers) {
    std::vector<Signal> out;
    for (auto h : servers) out.push_back(server_signal(s.stores[h], s.pda, qs));
    return out;
}

FieldVector truth(const Setup& s, const FieldVector& d) {
    std::vector<std::uint64_t> acc(s.params.B, 0);
    for (std::size_t n = 0; n < s.params.N; ++n)
        for (std::size_t b = 0; b < s.params.B; ++b) acc[b] = (acc[b] + d[n].value() * s.library.file(n)[b].value()) % s.params.q;
    FieldVector out;
    for (auto v : acc) out.push_back(s.params.field().element(v));
    return out;
}

std::vector<FieldVector> unit_demands(const SystemParams& p) {
    std::vector<FieldVector> d;
    for (std::size_t k = 0; k < p.K; ++k) {
        FieldVector v = p.field().zeros(p.N);
        v[k] = p.field().one();
        d.push_back(v);
    }
    return d;
}

}  // namespace

TEST_CASE("parameter validation names the field") {
    auto expect = [](SystemParams p, const std::string& field) {
        try {
            p.validate();
            FAIL("expected ProtocolError");
        } catch (const ProtocolError& e) {
            CHECK(std::string(e.what()).rfind(field, 0) == 0);
        }
    };
    auto p = toy_params();
    CHECK_NOTHROW(p.validate(toy_pda()));
    auto bad = p;
    bad.N = 1;
    expect(bad, "N:");
    bad = p;
    bad.A = 2;
    expect(bad, "A:");
    bad = p;
    bad.J = 3;
    expect(bad, "J:");
    bad = p;
    bad.H = 4;
    expect(bad, "H:");
    bad = p;
    bad.q = 9;
    expect(bad, "q:");
    bad = p;
    bad.q = 5;
    expect(bad, "q:");
    bad = p;
    bad.B = 5;
    try {
        bad.validate(toy_pda());
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(std::string(e.what()).rfind("B:", 0) == 0);
    }
    CHECK(p.L() == 2);
    CHECK(p.dimension() == 3);
}

TEST_CASE("library views reindex the flat file") {
    const auto params = toy_params(12);
    const auto pda = toy_pda();
    const auto lib = Library::random(params, pda, 3);
    const std::size_t P = 2, F = 3;
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t l = 0; l < 2; ++l)
            for (std::size_t j = 0; j < F; ++j)
                for (std::size_t i = 0; i < P; ++i) {
                    CHECK(lib.packet(n, l, j)[i] == lib.file(n)[(l * F + j) * P + i]);
                    CHECK(lib.subfile(n, l)[j * P + i] == lib.file(n)[(l * F + j) * P + i]);
                }
}

TEST_CASE("toy storage sizes") {
    const auto params = toy_params();
    const auto s = make_setup(params, toy_pda(), 1);
    REQUIRE(s.stores.size() == 6);
    for (const auto& z : s.stores) {
        CHECK(z.coded_subfiles.size() == 4);
        for (const auto& v : z.coded_subfiles) CHECK(v.size() == 3);
        CHECK(z.coded_keys.size() == 3);
        for (const auto& v : z.coded_keys) CHECK(v.size() == 1);
        CHECK(z.size_symbols() * 2 == 5 * params.B);
    }
}

TEST_CASE("stores match the polynomial oracle") {
    for (std::size_t B : {6u, 12u}) {
        const auto s = make_setup(toy_params(B), toy_pda(), 11);
        const std::size_t P = s.params.packet_len(s.pda);
        for (std::size_t h = 0; h < 6; ++h) {
            const std::uint64_t x = h + 1;
            for (std::size_t n = 0; n < 4; ++n)
                for (std::size_t u = 0; u < 3; ++u)
                    for (std::size_t i = 0; i < P; ++i)
                        CHECK(s.stores[h].coded_subfiles[n][u * P + i].value() == coded_file_symbol(s, n, u, i, x));
            for (std::size_t sym = 0; sym < 3; ++sym)
                for (std::size_t i = 0; i < P; ++i)
                    CHECK(s.stores[h].coded_keys[sym][i].value() == coded_key_symbol(s, sym, i, x));
        }
    }
}

TEST_CASE("zero library and randomness give zero stores") {
    const auto params = toy_params();
    const auto pda = toy_pda();
    const auto stores = build_storage(params, pda, Library::zeros(params, pda), Randomness::zeros(params, pda));
    for (const auto& z : stores) {
        for (const auto& v : z.coded_subfiles) for (const auto& e : v) CHECK(e.is_zero());
        for (const auto& v : z.coded_keys) for (const auto& e : v) CHECK(e.is_zero());
    }
}

TEST_CASE("micro instance store formula") {
    SystemParams p;
    p.N = 2;
    p.K = 1;
    p.H = 2;
    p.A = 0;
    p.I = 1;
    p.J = 2;
    p.q = 3;
    p.B = 1;
    const auto pda = pda::parse("1");
    const ff::PrimeField f(3);
    const Library lib({vec(f, {2}), vec(f, {1})}, 1, 1);
    Randomness u;
    u.deltas = {{vec(f, {1})}, {vec(f, {2})}};
    u.vees = {{vec(f, {2})}};
    u.lambdas = {{vec(f, {1})}};
    const auto stores = build_storage(p, pda, lib, u);
    for (std::uint64_t h = 0; h < 2; ++h) {
        const std::uint64_t a = h + 1;
        CHECK(stores[h].coded_subfiles[0][0].value() == (2 + 1 * a) % 3);
        CHECK(stores[h].coded_subfiles[1][0].value() == (1 + 2 * a) % 3);
        CHECK(stores[h].coded_keys[0][0].value() == (2 + 1 * a) % 3);
    }
}

TEST_CASE("toy user 1 cache layout and memory") {
    const auto params = toy_params();
    const auto s = make_setup(params, toy_pda(), 5);
    const auto& c = s.caches[0];
    REQUIRE(c.rows.size() == 3);
    CHECK(c.rows[0].uncoded);
    CHECK(c.rows[0].packets.size() == 8);
    for (std::size_t n = 0; n < 4; ++n)
        for (std::size_t l = 0; l < 2; ++l) {
            const auto want = s.library.packet(n, l, 0);
            CHECK(std::equal(want.begin(), want.end(), c.rows[0].packets[n * 2 + l].begin()));
        }
    for (std::size_t j : {1u, 2u}) {
        CHECK_FALSE(c.rows[j].uncoded);
        REQUIRE(c.rows[j].packets.size() == 2);
        const std::size_t sym = j - 1;  // a_{2,1}=1, a_{3,1}=2
        for (std::size_t l = 0; l < 2; ++l) {
            std::uint64_t v = s.randomness.vees[l][sym][0].value();
            for (std::size_t n = 0; n < 4; ++n) v += s.p[0][n].value() * s.library.packet(n, l, j)[0].value();
            CHECK(c.rows[j].packets[l][0].value() == v % 7);
        }
    }
    CHECK(c.size_symbols() == 2 * params.B);
}

TEST_CASE("zero privacy vector leaves only the keys") {
    const auto params = toy_params();
    const auto pda = toy_pda();
    const auto lib = Library::random(params, pda, 1);
    const auto u = Randomness::sample(params, pda, 2);
    const auto c = place_user(params, pda, lib, u, 1, params.field().zeros(4));
    CHECK(c.rows[0].packets[0] == u.vees[0][0]);
    CHECK(c.rows[0].packets[1] == u.vees[1][0]);
    CHECK(c.rows[2].packets[0] == u.vees[0][2]);
    CHECK_THROWS_AS(place_user(params, pda, lib, u, 3, params.field().zeros(4)), ProtocolError);
    CHECK_THROWS_AS(place_user(params, pda, lib, u, 0, params.field().zeros(3)), ProtocolError);
}

TEST_CASE("all-star column caches everything") {
    SystemParams p = toy_params(2);
    const auto pda = pda::man_pda(3, 3);
    const auto lib = Library::random(p, pda, 1);
    const auto u = Randomness::sample(p, pda, 2);
    const auto c = place_user(p, pda, lib, u, 0, p.field().zeros(4));
    CHECK(c.rows.size() == 1);
    CHECK(c.rows[0].uncoded);
    CHECK(c.size_symbols() == p.N * p.B);
    const auto stores = build_storage(p, pda, lib, u);
    std::vector<Query> qs(3, Query{p.field().zeros(4)});
    const auto x = server_signal(stores[0], pda, qs);
    CHECK(x.payload.empty());
    CHECK(x.query_echo.size() == 3);
}

TEST_CASE("make_query examples") {
    const ff::PrimeField f(5);
    CHECK(make_query(vec(f, {1, 0, 0, 0}), vec(f, {2, 4, 1, 3})).q == vec(f, {3, 4, 1, 3}));
    CHECK(make_query(vec(f, {1, 2}), vec(f, {0, 0})).q == vec(f, {1, 2}));
    CHECK(make_query(vec(f, {0, 0}), vec(f, {3, 4})).q == vec(f, {3, 4}));
    CHECK_THROWS_AS(make_query(vec(f, {1}), vec(f, {1, 2})), ProtocolError);
}

TEST_CASE("server signals match the oracle") {
    const auto s = make_setup(toy_params(12), toy_pda(), 21);
    std::mt19937_64 rng(4);
    std::vector<FieldVector> d;
    for (int k = 0; k < 3; ++k) d.push_back(random_vec(s.params.field(), 4, rng));
    const auto qs = queries_for(s, d);
    const std::size_t P = 2;
    for (std::size_t h = 0; h < 6; ++h) {
        const auto x = server_signal(s.stores[h], s.pda, qs);
        CHECK(x.origin == h);
        CHECK(x.payload_symbols() == 3 * P);
        for (std::size_t k = 0; k < 3; ++k) CHECK(x.query_echo[k] == qs[k].q);
        for (std::size_t sym = 0; sym < 3; ++sym) {
            for (std::size_t i = 0; i < P; ++i) {
                std::uint64_t want = coded_key_symbol(s, sym, i, h + 1);
                for (std::size_t uu = 0; uu < 3; ++uu)
                    for (std::size_t v = 0; v < 3; ++v) {
                        const auto& e = s.pda.at(uu, v);
                        if (e.is_star() || e.symbol_value() != sym + 1) continue;
                        for (std::size_t n = 0; n < 4; ++n)
                            want += qs[v].q[n].value() * coded_file_symbol(s, n, uu, i, h + 1);
                    }
                CHECK(x.payload[sym][i].value() == want % 7);
            }
        }
    }
    std::vector<Query> zero(3, Query{s.params.field().zeros(4)});
    const auto x0 = server_signal(s.stores[2], s.pda, zero);
    for (std::size_t sym = 0; sym < 3; ++sym) CHECK(x0.payload[sym] == s.stores[2].coded_keys[sym]);
    CHECK_THROWS_AS(server_signal(s.stores[0], s.pda, std::vector<Query>(2, Query{s.params.field().zeros(4)})),
                    ProtocolError);
}

TEST_CASE("adversary strategies") {
    const auto s = make_setup(toy_params(12), toy_pda(), 8);
    const auto qs = queries_for(s, unit_demands(s.params));
    const auto honest = server_signal(s.stores[1], s.pda, qs);
    const std::span<const ServerStore> own(&s.stores[1], 1);

    const auto zero = adversary_signal(ZeroPayload{}, own, s.pda, qs).front();
    CHECK(zero.payload_symbols() == honest.payload_symbols());
    for (const auto& pk : zero.payload) for (const auto& e : pk) CHECK(e.is_zero());

    const auto plus = adversary_signal(HonestPlusConstant{1}, own, s.pda, qs).front();
    for (std::size_t sym = 0; sym < 3; ++sym)
        for (std::size_t i = 0; i < 2; ++i) CHECK(plus.payload[sym][i] == honest.payload[sym][i] + s.params.field().one());

    const auto perm = adversary_signal(HonestPermutedSlices{}, own, s.pda, qs).front();
    FieldVector flat_h, flat_p;
    for (const auto& pk : honest.payload) flat_h.insert(flat_h.end(), pk.begin(), pk.end());
    for (const auto& pk : perm.payload) flat_p.insert(flat_p.end(), pk.begin(), pk.end());
    std::rotate(flat_h.rbegin(), flat_h.rbegin() + 1, flat_h.rend());
    const bool forward = flat_h == flat_p;
    std::rotate(flat_h.begin(), flat_h.begin() + 2, flat_h.end());
    CHECK((forward || flat_h == flat_p));

    int differs = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto r = adversary_signal(UniformRandom{seed}, own, s.pda, qs).front();
        differs += r.payload != honest.payload;
        CHECK(r.payload_symbols() == honest.payload_symbols());
        CHECK(adversary_signal(UniformRandom{seed}, own, s.pda, qs).front() == r);
    }
    CHECK(differs >= 19);
    CHECK(all_strategies().size() == 4);
}

TEST_CASE("toy users decode their files from every delivery set") {
    const auto s = make_setup(toy_params(), toy_pda(), 2);
    const auto d = unit_demands(s.params);
    const auto qs = queries_for(s, d);
    for (const auto& J : sim::combinations(6, 5)) {
        const auto signals = honest_signals(s, qs, J);
        for (std::size_t k = 0; k < 3; ++k) {
            const auto out = user_decode(s.params, s.pda, s.caches[k], d[k], qs, signals);
            const auto want = s.library.file(k);
            CHECK(std::equal(want.begin(), want.end(), out.begin(), out.end()));
        }
    }
}

TEST_CASE("decoding survives one adversary and fails beyond the radius") {
    const auto s = make_setup(toy_params(12, 11), toy_pda(), 31);
    std::mt19937_64 rng(3);
    std::vector<FieldVector> d;
    for (int k = 0; k < 3; ++k) d.push_back(random_vec(s.params.field(), 4, rng));
    const auto qs = queries_for(s, d);
    const std::vector<std::size_t> J{0, 2, 3, 4, 5};
    for (const auto& strategy : all_strategies(7)) {
        for (std::size_t bad = 0; bad < 5; ++bad) {
            auto signals = honest_signals(s, qs, J);
            signals[bad] = adversary_signal(strategy, std::span(&s.stores[J[bad]], 1), s.pda, qs).front();
            for (std::size_t k = 0; k < 3; ++k) CHECK(user_decode(s.params, s.pda, s.caches[k], d[k], qs, signals) == truth(s, d[k]));
        }
    }
    auto signals = honest_signals(s, qs, J);
    signals[0] = adversary_signal(HonestPlusConstant{1}, std::span(&s.stores[J[0]], 1), s.pda, qs).front();
    signals[1] = adversary_signal(HonestPlusConstant{2}, std::span(&s.stores[J[1]], 1), s.pda, qs).front();
    bool detected = false;
    for (std::size_t k = 0; k < 3; ++k) {
        try {
            detected = detected || user_decode(s.params, s.pda, s.caches[k], d[k], qs, signals) != truth(s, d[k]);
        } catch (const rscode::DecodingFailure&) {
            detected = true;
        }
    }
    CHECK(detected);
}

TEST_CASE("zero library decodes to zero") {
    const auto params = toy_params();
    const auto pda = toy_pda();
    const auto lib = Library::zeros(params, pda);
    const auto u = Randomness::sample(params, pda, 4);
    const auto stores = build_storage(params, pda, lib, u);
    std::mt19937_64 rng(1);
    std::vector<UserCache> caches;
    std::vector<Query> qs;
    std::vector<FieldVector> d;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto p = random_vec(params.field(), 4, rng);
        caches.push_back(place_user(params, pda, lib, u, k, p));
        d.push_back(random_vec(params.field(), 4, rng));
        qs.push_back(make_query(d.back(), p));
    }
    for (const auto& strategy : all_strategies()) {
        std::vector<Signal> signals;
        for (std::size_t h = 0; h < 5; ++h) signals.push_back(server_signal(stores[h], pda, qs));
        signals[3] = adversary_signal(strategy, std::span(&stores[3], 1), pda, qs).front();
        for (std::size_t k = 0; k < 3; ++k) {
            for (const auto& e : user_decode(params, pda, caches[k], d[k], qs, signals)) CHECK(e.is_zero());
        }
    }
}

TEST_CASE("decoding is linear in the demand") {
    const auto s = make_setup(toy_params(12), toy_pda(), 9);
    std::mt19937_64 rng(12);
    const std::vector<std::size_t> J{1, 2, 3, 4, 5};
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<FieldVector> d1, d2, d12;
        for (int k = 0; k < 3; ++k) {
            d1.push_back(random_vec(s.params.field(), 4, rng));
            d2.push_back(random_vec(s.params.field(), 4, rng));
            FieldVector sum;
            for (int n = 0; n < 4; ++n) sum.push_back(d1.back()[n] + d2.back()[n]);
            d12.push_back(sum);
        }
        auto dec = [&](const std::vector<FieldVector>& d, std::size_t k) {
            const auto qs = queries_for(s, d);
            return user_decode(s.params, s.pda, s.caches[k], d[k], qs, honest_signals(s, qs, J));
        };
        for (std::size_t k = 0; k < 3; ++k) {
            const auto a = dec(d1, k), b = dec(d2, k), c = dec(d12, k);
            for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == a[i] + b[i]);
        }
    }
}

TEST_CASE("user_decode rejects malformed signal sets") {
    const auto s = make_setup(toy_params(), toy_pda(), 2);
    const auto d = unit_demands(s.params);
    const auto qs = queries_for(s, d);
    CHECK_THROWS_AS(user_decode(s.params, s.pda, s.caches[0], d[0], qs, honest_signals(s, qs, {0, 1, 2, 3})),
                    MissingSignals);
    CHECK_THROWS_AS(user_decode(s.params, s.pda, s.caches[0], d[0], qs, honest_signals(s, qs, {0, 1, 2, 3, 3})),
                    ProtocolError);
}

TEST_CASE("library recovery") {
    SystemParams p;
    p.N = 2;
    p.K = 2;
    p.H = 5;
    p.A = 1;
    p.I = 1;
    p.J = 4;
    p.q = 11;
    p.B = 4;
    const auto pda = pda::man_pda(2, 1);
    const auto lib = Library::random(p, pda, 3);
    const auto u = Randomness::sample(p, pda, 4);
    const auto stores = build_storage(p, pda, lib, u);
    for (const auto& J : sim::combinations(5, 4)) {
        std::vector<ServerStore> contents;
        for (auto h : J) contents.push_back(stores[h]);
        CHECK(recover_library(p, pda, contents) == lib);
        for (std::size_t bad = 0; bad < 4; ++bad) {
            auto c = contents;
            c[bad] = corrupt_store(UniformRandom{bad + 1}, c[bad], p.field());
            CHECK(recover_library(p, pda, c) == lib);
        }
        auto c = contents;
        c[0] = corrupt_store(HonestPlusConstant{1}, c[0], p.field());
        c[1] = corrupt_store(HonestPlusConstant{3}, c[1], p.field());
        bool detected = false;
        try {
            detected = !(recover_library(p, pda, c) == lib);
        } catch (const rscode::DecodingFailure&) {
            detected = true;
        }
        CHECK(detected);
    }
    CHECK_THROWS_AS(recover_library(p, pda, std::vector<ServerStore>(stores.begin(), stores.begin() + 3)),
                    ProtocolError);
}

TEST_CASE("measured sizes follow the closed forms and T = N/L + R") {
    for (std::size_t K = 1; K <= 4; ++K) {
        for (std::size_t t = 0; t <= K; ++t) {
            const auto pda = pda::man_pda(K, t);
            SystemParams p = toy_params();
            p.K = K;
            p.B = 2 * pda.rows() * 2;
            const auto s = make_setup(p, pda, 3);
            const std::size_t F = pda.rows(), Z = pda.stars_per_column(), S = pda.symbols(), L = 2, N = 4;
            for (const auto& c : s.caches) CHECK(c.size_symbols() * F == p.B * (F + Z * (N - 1)));
            for (const auto& z : s.stores) CHECK(z.size_symbols() * L * F == p.B * (N * F + S));
            std::vector<Query> qs(K, Query{p.field().zeros(N)});
            const auto x = server_signal(s.stores[0], pda, qs);
            CHECK(x.payload_symbols() * L * F == p.B * S);
            CHECK(s.stores[0].size_symbols() * L == N * p.B + x.payload_symbols() * L);
        }
    }
}
