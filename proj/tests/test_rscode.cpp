#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "harness.hpp"
#include "rsplfr/sim.hpp"

using namespace rsplfr;
using namespace rsplfr::rscode;

namespace {

FieldVector vec(const ff::PrimeField& f, std::initializer_list<std::uint64_t> v) {
    FieldVector out;
    for (auto x : v) out.push_back(f.element(x));
    return out;
}

std::vector<std::uint32_t> present_values(const Codeword& c) {
    std::vector<std::uint32_t> out;
    for (const auto& p : c.positions) out.push_back(p ? p->value() : 999);
    return out;
}

}  // namespace

TEST_CASE("encode examples") {
    const ff::PrimeField f5(5);
    const auto pts = EvalPoints(vec(f5, {1, 2, 3}));
    CHECK(present_values(encode(vec(f5, {1, 1}), pts)) == std::vector<std::uint32_t>{2, 3, 4});
    CHECK(present_values(encode(vec(f5, {3}), pts)) == std::vector<std::uint32_t>{3, 3, 3});
    CHECK(present_values(encode(vec(f5, {0, 0, 0}), pts)) == std::vector<std::uint32_t>{0, 0, 0});
    CHECK_THROWS_AS(encode(vec(f5, {1, 1, 1, 1}), pts), std::invalid_argument);
}

TEST_CASE("evaluation points are validated") {
    const ff::PrimeField f7(7);
    CHECK_THROWS_AS(EvalPoints(vec(f7, {1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(EvalPoints(vec(f7, {0, 1})), std::invalid_argument);
    CHECK_THROWS_AS(EvalPoints(vec(f7, {1, 2, 3, 4, 5, 6, 6})), std::invalid_argument);
    CHECK_THROWS_AS(EvalPoints::sequential(f7, 7), std::invalid_argument);
    CHECK(EvalPoints::sequential(f7, 6)[5].value() == 6);
}

TEST_CASE("erasure-only decoding is interpolation") {
    const ff::PrimeField f(11);
    const auto pts = EvalPoints::sequential(f, 6);
    const auto msg = vec(f, {4, 7, 1});
    auto cw = encode(msg, pts);
    cw.positions[1].reset();
    cw.positions[4].reset();
    cw.positions[5].reset();
    const auto r = decode(cw, pts, 0);
    CHECK(r.message == msg);
    CHECK(r.error_positions.empty());
    const auto b = brute_force_decode(cw, pts, 0);
    CHECK(b.message == msg);
    FieldVector xs, ys;
    for (auto h : cw.present_indices()) {
        xs.push_back(pts[h]);
        ys.push_back(*cw.positions[h]);
    }
    CHECK(interpolate(xs, ys) == msg);
}

TEST_CASE("one error with q=7 k=3 J=5 is corrected and flagged") {
    const ff::PrimeField f(7);
    const auto pts = EvalPoints::sequential(f, 5);
    const auto msg = vec(f, {2, 5, 3});
    for (std::size_t h = 0; h < 5; ++h) {
        auto cw = encode(msg, pts);
        cw.positions[h] = *cw.positions[h] + f.one();
        const auto r = decode(cw, pts, 1);
        CHECK(r.message == msg);
        CHECK(r.error_positions == std::set<std::size_t>{h});
        const auto b = brute_force_decode(cw, pts, 1);
        CHECK(b.message == msg);
        CHECK(b.error_positions == std::set<std::size_t>{h});
    }
}

TEST_CASE("two errors beyond the radius: failure or a wrong codeword the oracle agrees on") {
    const ff::PrimeField f(7);
    const auto pts = EvalPoints::sequential(f, 5);
    const auto msg = vec(f, {2, 5, 3});
    int failures = 0, miscorrections = 0;
    for (const auto& pair : sim::combinations(5, 2)) {
        for (std::uint64_t e1 = 1; e1 < 7; ++e1) {
            for (std::uint64_t e2 = 1; e2 < 7; ++e2) {
                harness::RsInstance inst{7, 3, 1, {1, 2, 3, 4, 5}, {2, 5, 3}, {}, {}};
                for (std::uint64_t x = 1; x <= 5; ++x) inst.received.push_back(oracle::eval(inst.message, x, 7));
                *inst.received[pair[0]] = (*inst.received[pair[0]] + e1) % 7;
                *inst.received[pair[1]] = (*inst.received[pair[1]] + e2) % 7;
                const auto c = harness::compare(inst);
                CHECK(c.agree);
                CHECK_FALSE(c.recovered);
                if (c.bw_ok) {
                    ++miscorrections;
                    CHECK(c.bw_message != msg);
                } else {
                    ++failures;
                }
            }
        }
    }
    CHECK(failures > 0);
    CHECK(miscorrections > 0);
}

TEST_CASE("zeroed nonzero codeword decodes away from the original") {
    const ff::PrimeField f(11);
    const auto pts = EvalPoints::sequential(f, 7);
    const auto msg = vec(f, {3, 1, 4});
    auto cw = encode(msg, pts);
    for (auto& p : cw.positions) p = f.zero();
    const auto orig = encode(msg, pts);
    try {
        const auto b = brute_force_decode(cw, pts, 2);
        const auto re = encode(b.message, pts);
        std::size_t diff = 0;
        for (std::size_t h = 0; h < 7; ++h) diff += *re.positions[h] != *orig.positions[h];
        CHECK(diff > 2);
    } catch (const DecodingFailure& e) {
        CHECK(e.kind() == FailureKind::NoCandidate);
    }
}

TEST_CASE("too few present positions is a precondition error") {
    const ff::PrimeField f(11);
    const auto pts = EvalPoints::sequential(f, 5);
    auto cw = encode(vec(f, {1, 2, 3}), pts);
    cw.positions[0].reset();
    CHECK_THROWS_AS(decode(cw, pts, 1), std::invalid_argument);
}

TEST_CASE("exhaustive supports and patterns recover the message, q=11 H=7") {
    std::mt19937_64 rng(5);
    const std::uint32_t q = 11;
    const std::size_t H = 7;
    const ff::PrimeField f(q);
    const auto pts = EvalPoints::sequential(f, H);
    for (std::size_t k : {1u, 2u, 3u}) {
        const std::size_t A = 1, J = k + 2 * A;
        for (const auto& present : sim::combinations(H, J)) {
            FieldVector msg;
            for (std::size_t i = 0; i < k; ++i) msg.push_back(f.uniform(rng));
            const auto clean = encode(msg, pts);
            for (std::size_t a = 0; a <= A; ++a) {
                for (const auto& support : sim::combinations(J, a)) {
                    for (int pattern = 0; pattern < 3; ++pattern) {
                        Codeword cw;
                        cw.dimension = k;
                        cw.positions.assign(H, std::nullopt);
                        for (auto h : present) cw.positions[h] = clean.positions[h];
                        std::set<std::size_t> bad;
                        for (auto i : support) {
                            const auto h = present[i];
                            const auto shift = pattern == 0 ? f.one()
                                               : pattern == 1 ? f.element(q - 1)
                                                              : f.element(1 + rng() % (q - 1));
                            cw.positions[h] = *cw.positions[h] + shift;
                            bad.insert(h);
                        }
                        const auto r = decode(cw, pts, A);
                        CHECK(r.message == msg);
                        CHECK(r.error_positions == bad);
                        const auto re = encode(r.message, pts);
                        for (auto h : r.error_positions) CHECK(*re.positions[h] != *cw.positions[h]);
                    }
                }
            }
        }
    }
}

TEST_CASE("decode, brute force and the naive oracle agree on random instances") {
    std::mt19937_64 rng(99);
    int count = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const std::uint32_t q = trial % 2 ? 11 : 13;
        const std::size_t k = 1 + rng() % 3;
        const std::size_t A = rng() % 3;
        const std::size_t J = k + 2 * A + rng() % 2;
        if (J > 8) continue;
        const std::size_t H = std::min<std::size_t>(q - 1, J + rng() % 3);
        const std::size_t c = rng() % (A + 2);  // sometimes one beyond A
        const auto inst = harness::random_instance(rng, q, k, A, J, H, std::min(c, J));
        const auto cmp = harness::compare(inst);
        CHECK(cmp.agree);
        if (c <= A) CHECK(cmp.recovered);
        ++count;
    }
    CHECK(count > 200);
}
