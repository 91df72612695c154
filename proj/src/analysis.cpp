#include "rsplfr/analysis.hpp"

#include <algorithm>
#include <iomanip>
#include <stdexcept>

namespace rsplfr::analysis {

namespace {

Rational R64(std::int64_t v) { return Rational(v); }

void require_memory(const Rational& M, const Dims& d) {
    if (M < R64(1) || M > R64(d.N)) {
        throw std::domain_error("M: " + to_string(M) + " outside [1, " + std::to_string(d.N) + "]");
    }
}

}  // namespace

Dims Dims::from(const protocol::SystemParams& params) {
    return Dims{static_cast<std::int64_t>(params.N), static_cast<std::int64_t>(params.K),
                static_cast<std::int64_t>(params.L()), static_cast<std::int64_t>(params.A)};
}

MscTriple msc_from_pda(const pda::Pda& pda, const Dims& d) {
    const auto F = static_cast<std::int64_t>(pda.rows());
    const auto Z = static_cast<std::int64_t>(pda.stars_per_column());
    const auto S = static_cast<std::int64_t>(pda.symbols());
    MscTriple m;
    m.M = R64(1) + Rational(Z * (d.N - 1), F);
    m.T = (R64(d.N) + Rational(S, F)) / d.L;
    m.R = Rational(S, d.L * F);
    m.subpacketization = static_cast<std::size_t>(d.L * F);
    return m;
}

MscTriple msc_from_pda(const pda::Pda& pda, const protocol::SystemParams& params) {
    return msc_from_pda(pda, Dims::from(params));
}

// --- Polyline ----------------------------------------------------------------

Polyline::Polyline(std::vector<Vertex> vertices) : v_(std::move(vertices)) {
    if (v_.empty()) throw std::invalid_argument("polyline: no vertices");
    for (std::size_t i = 1; i < v_.size(); ++i) {
        if (!(v_[i - 1].x < v_[i].x)) throw std::invalid_argument("polyline: x must increase strictly");
    }
}

Rational Polyline::operator()(const Rational& x) const {
    if (x < v_.front().x || x > v_.back().x) throw std::domain_error("polyline: " + to_string(x) + " out of range");
    auto it = std::upper_bound(v_.begin(), v_.end(), x, [](const Rational& a, const Vertex& b) { return a < b.x; });
    if (it == v_.end()) return v_.back().y;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    return lo.y + (hi.y - lo.y) * (x - lo.x) / (hi.x - lo.x);
}

// --- MAN curve -----------------------------------------------------------------

namespace {

std::vector<CurvePoint> man_points(const Dims& d) {
    std::vector<CurvePoint> pts;
    for (std::int64_t t = 0; t <= d.K; ++t) {
        const Rational r(d.K - t, t + 1);
        pts.push_back({t, R64(1) + Rational(t * (d.N - 1), d.K), (R64(d.N) + r) / d.L, r / d.L});
    }
    return pts;
}

Polyline project(const std::vector<CurvePoint>& pts, Rational CurvePoint::*field) {
    std::vector<Polyline::Vertex> v;
    for (const auto& p : pts) v.push_back({p.M, p.*field});
    return Polyline(std::move(v));
}

}  // namespace

ManCurve::ManCurve(const Dims& d)
    : points_(man_points(d)), t_(project(points_, &CurvePoint::T)), r_(project(points_, &CurvePoint::R)) {}

// --- bounds --------------------------------------------------------------------

Rational storage_lower_bound(const Dims& d) { return Rational(d.N, d.L + 2 * d.A); }

std::int64_t max_u(const Dims& d) { return std::min(d.N / 2, d.K); }

Rational load_term(std::int64_t u, const Rational& M, const Dims& d) {
    return R64(u) * (R64(d.N - u + 1) - R64(u) * M) / ((d.L + 2 * d.A) * d.N);
}

Rational load_lower_bound(const Rational& M, const Dims& d) {
    require_memory(M, d);
    Rational best(0);
    for (std::int64_t u = 1; u <= max_u(d); ++u) best = std::max(best, load_term(u, M, d));
    return best;
}

Rational f_envelope(const Rational& M, const Dims& d) {
    return (R64(d.N) - M) * (R64(d.N + 2) + M) / ((R64(4 * (d.L + 2 * d.A) * d.N)) * (M + R64(1)));
}

Polyline r_envelope(const Dims& d) {
    std::vector<Polyline::Vertex> pts;
    for (std::int64_t t = 0; t <= d.K; ++t) pts.push_back({R64(1) + Rational(t * (d.N - 1), d.K), Rational(d.K - t, t + 1)});
    auto cross = [](const Polyline::Vertex& o, const Polyline::Vertex& a, const Polyline::Vertex& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Polyline::Vertex> hull;
    for (const auto& p : pts) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= R64(0)) hull.pop_back();
        hull.push_back(p);
    }
    return Polyline(std::move(hull));
}

// --- gap report ----------------------------------------------------------------

std::string regime_flag(Regime r) {
    switch (r) {
        case Regime::KleN: return "K<=N";
        case Regime::MemoryAtLeast2: return "M>=2";
        case Regime::Unbounded: return "unbounded";
    }
    return "?";
}

std::vector<Rational> uniform_grid(const Dims& d, std::size_t points) {
    if (points < 2) throw std::invalid_argument("grid: need at least 2 points");
    std::vector<Rational> grid;
    const auto last = static_cast<std::int64_t>(points - 1);
    for (std::int64_t i = 0; i <= last; ++i) grid.push_back(R64(1) + Rational((d.N - 1) * i, last));
    return grid;
}

BoundReport gap_report(const Dims& d, const std::vector<Rational>& grid) {
    const ManCurve curve(d);
    const Polyline r = r_envelope(d);
    const Rational slack = R64(1) + Rational(2 * d.A, d.L);

    BoundReport rep;
    rep.dims = d;
    rep.gap_T_bound = R64(2) * slack;
    rep.gap_R_bound = R64(12) * slack;
    auto fail = [&](const Rational& M, std::string what) { rep.failures.push_back({M, std::move(what)}); };

    for (const auto& M : grid) {
        GapRow row;
        row.M = M;
        row.T_ach = curve.T(M);
        row.R_ach = curve.R(M);
        row.T_lb = storage_lower_bound(d);
        row.R_lb = load_lower_bound(M, d);
        row.r = r(M);
        row.gap_T = row.T_ach / row.T_lb;
        if (row.R_lb > R64(0)) {
            row.gap_R = row.R_ach / row.R_lb;
        } else if (row.R_ach == R64(0)) {
            row.gap_R = R64(1);
        }
        if (d.K <= d.N) {
            row.regime = Regime::KleN;
        } else {
            row.regime = M >= R64(2) ? Regime::MemoryAtLeast2 : Regime::Unbounded;
        }

        if (row.T_ach != (R64(d.N) + row.r) / d.L) fail(M, "T(M) != (N + r(M))/L");
        if (row.R_ach != row.r / d.L) fail(M, "R(M) != r(M)/L");
        if (row.T_ach - row.R_ach != Rational(d.N, d.L)) fail(M, "T(M) - R(M) != N/L");
        if (M > R64(1) && row.r > (R64(d.N) - M) / (M - R64(1))) fail(M, "r(M) > (N-M)/(M-1)");
        if (row.R_ach < row.R_lb) fail(M, "R_ach < R_lb");
        if (row.T_ach < row.T_lb) fail(M, "T_ach < T_lb");
        if (row.regime != Regime::Unbounded) {
            if (row.gap_T > rep.gap_T_bound) fail(M, "gap_T above " + to_string(rep.gap_T_bound));
            if (!row.gap_R || *row.gap_R > rep.gap_R_bound) fail(M, "gap_R above " + to_string(rep.gap_R_bound));
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

void write_csv(const BoundReport& report, std::ostream& out) {
    out << "M,T_ach,R_ach,T_lb,R_lb,gap_T,gap_R,regime_flag\n";
    out << std::setprecision(15);
    for (const auto& r : report.rows) {
        out << to_double(r.M) << ',' << to_double(r.T_ach) << ',' << to_double(r.R_ach) << ',' << to_double(r.T_lb)
            << ',' << to_double(r.R_lb) << ',' << to_double(r.gap_T) << ',';
        if (r.gap_R) {
            out << to_double(*r.gap_R);
        } else {
            out << "inf";
        }
        out << ',' << regime_flag(r.regime) << '\n';
    }
}

}  // namespace rsplfr::analysis
