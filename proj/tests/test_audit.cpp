#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rsplfr/audit.hpp"

using namespace rsplfr;
using namespace rsplfr::audit;

namespace {

using Joint = std::map<std::pair<std::uint32_t, std::uint32_t>, oracle::u64>;

DistributionTable table_of(const Joint& j) {
    DistributionTable t;
    for (const auto& [xy, c] : j) t.add(Key{xy.first}, Key{xy.second}, c);
    return t;
}

}  // namespace

TEST_CASE("exact_mi on textbook distributions") {
    Joint indep, same, pad;
    for (std::uint32_t x = 0; x < 3; ++x)
        for (std::uint32_t y = 0; y < 3; ++y) {
            indep[{x, y}] += 1;
            if (x == y) same[{x, y}] += 1;
        }
    for (std::uint32_t w = 0; w < 3; ++w)
        for (std::uint32_t k = 0; k < 3; ++k) pad[{w, (w + k) % 3}] += 1;

    const auto a = exact_mi(table_of(indep));
    CHECK(a.independent);
    CHECK(a.bits == 0.0);
    const auto b = exact_mi(table_of(same));
    CHECK_FALSE(b.independent);
    CHECK(b.bits == doctest::Approx(std::log2(3.0)));
    const auto c = exact_mi(table_of(pad));
    CHECK(c.independent);
    CHECK(c.bits == 0.0);
    CHECK_THROWS_AS(exact_mi(DistributionTable{}), std::invalid_argument);
}

TEST_CASE("exact_mi matches the plug-in oracle on random tables") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        Joint j;
        const int xs = 1 + rng() % 4, ys = 1 + rng() % 4;
        for (int x = 0; x < xs; ++x)
            for (int y = 0; y < ys; ++y)
                if (rng() % 3) j[{x, y}] = 1 + rng() % 5;
        if (j.empty()) continue;
        const auto t = table_of(j);
        const auto r = exact_mi(t);
        const double want = oracle::mi_bits(j);
        CHECK(r.bits == doctest::Approx(want).epsilon(1e-9));
        if (!r.independent) CHECK(want > 1e-12);
        CHECK(t.total() > 0);
    }
    Joint prod;
    for (std::uint32_t x = 0; x < 3; ++x)
        for (std::uint32_t y = 0; y < 4; ++y) prod[{x, y}] = (x + 1) * (y + 2);
    CHECK(exact_mi(table_of(prod)).independent);
}

TEST_CASE("distribution table bookkeeping") {
    DistributionTable a, b;
    a.add({1, 2}, {3}, 2);
    a.add({1, 2}, {4});
    b.add({1, 2}, {3});
    b.add({5, 5}, {4}, 3);
    a.merge(b);
    CHECK(a.total() == 7);
    CHECK(a.count({1, 2}, {3}) == 3);
    CHECK(a.count({5, 5}, {4}) == 3);
    CHECK(a.count({5, 5}, {3}) == 0);
    CHECK(a.secret_values() == 2);
    CHECK(a.observation_values() == 2);
}

TEST_CASE("micro instance sizes") {
    const auto p = micro_params();
    const auto d = micro_pda();
    CHECK(enumerated_symbols(p, d) == 10);
}

TEST_CASE("micro audits are exactly zero") {
    const auto p = micro_params();
    const auto d = micro_pda();
    const auto s = audit_server_security(p, d);
    CHECK(s.passed());
    CHECK(s.exact_zero);
    CHECK(s.mi_bits == 0.0);
    CHECK(s.outcomes == 59049);
    CHECK(s.tables == 2);
    const auto x = audit_signal_security(p, d);
    CHECK(x.passed());
    CHECK(x.outcomes == 59049);
    const auto y = audit_demand_privacy(p, d);
    CHECK(y.passed());
    CHECK(y.mi_bits == 0.0);
}

TEST_CASE("mutations are detected") {
    const auto p = micro_params();
    const auto d = micro_pda();
    MicroOptions opt;
    opt.mutation = Mutation::ZeroNoise;
    const auto s = audit_server_security(p, d, opt);
    CHECK_FALSE(s.passed());
    CHECK(s.mi_bits > 0.1);
    CHECK_FALSE(s.witness.empty());
    opt.mutation = Mutation::RemoveKeys;
    CHECK(audit_signal_security(p, d, opt).mi_bits > 0.1);
    opt.mutation = Mutation::ZeroPad;
    const auto y = audit_demand_privacy(p, d, opt);
    CHECK_FALSE(y.passed());
    CHECK(y.mi_bits > 0.1);
    CHECK(parse_mutation("zero-noise") == Mutation::ZeroNoise);
    CHECK(parse_mutation("key-removal") == Mutation::RemoveKeys);
    CHECK(parse_mutation("zero-pad") == Mutation::ZeroPad);
    CHECK(parse_mutation("none") == Mutation::None);
    CHECK_THROWS_AS(parse_mutation("bogus"), std::invalid_argument);
}

TEST_CASE("job count does not change the result") {
    const auto p = micro_params();
    const auto d = micro_pda();
    MicroOptions one, two;
    one.mutation = two.mutation = Mutation::ZeroNoise;
    two.jobs = 2;
    const auto a = audit_server_security(p, d, one);
    const auto b = audit_server_security(p, d, two);
    CHECK(a.mi_bits == b.mi_bits);
    CHECK(a.outcomes == b.outcomes);
    CHECK(a.witness == b.witness);
}

TEST_CASE("audits refuse non-uniform priors and oversized instances") {
    const auto p = micro_params();
    const auto d = micro_pda();
    MicroOptions opt;
    opt.prior = Prior::IdenticalFiles;
    CHECK_THROWS_AS(audit_server_security(p, d, opt), NonUniformPrior);
    CHECK_THROWS_AS(audit_demand_privacy(p, d, opt), NonUniformPrior);
    MicroOptions tight;
    tight.max_outcomes = 1000;
    CHECK_THROWS_AS(audit_signal_security(p, d, tight), InfeasibleAudit);
    SystemParams big = p;
    big.q = 7;
    big.H = 6;
    CHECK_THROWS_AS(audit_server_security(big, d), InfeasibleAudit);
}

TEST_CASE("empty-symbol PDA audits to zero") {
    const auto p = micro_params();
    const auto d = pda::man_pda(1, 1);
    REQUIRE(d.symbols() == 0);
    CHECK(audit_server_security(p, d).passed());
    CHECK(audit_signal_security(p, d).passed());
    CHECK(audit_demand_privacy(p, d).passed());
}

TEST_CASE("robustness reports") {
    SystemParams p;
    p.N = 2;
    p.K = 2;
    p.H = 5;
    p.A = 1;
    p.I = 1;
    p.J = 4;
    p.q = 11;
    p.B = 2;
    const auto d = pda::man_pda(2, 1);
    const auto ok = audit_robustness(p, d, 3, 2);
    REQUIRE(ok.size() == 2);
    CHECK(ok[0].constraint == Constraint::RobustDecoding);
    CHECK(ok[1].constraint == Constraint::RobustRecovery);
    CHECK(ok[0].passed());
    CHECK(ok[1].passed());
    const auto bad = audit_robustness(p, d, 3, 2, 1);
    CHECK_FALSE(bad[0].passed());
    CHECK_FALSE(bad[1].passed());
}
