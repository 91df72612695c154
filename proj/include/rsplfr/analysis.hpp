#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rsplfr/pda.hpp"
#include "rsplfr/protocol.hpp"
#include "rsplfr/rational.hpp"

namespace rsplfr::analysis {

/// The scalars the formulas depend on.
struct Dims {
    std::int64_t N = 0, K = 0, L = 0, A = 0;
    static Dims from(const protocol::SystemParams& params);
};

struct MscTriple {
    Rational M, T, R;
    std::size_t subpacketization = 0;
    bool operator==(const MscTriple&) const = default;
};

MscTriple msc_from_pda(const pda::Pda& pda, const protocol::SystemParams& params);
MscTriple msc_from_pda(const pda::Pda& pda, const Dims& dims);

struct CurvePoint {
    std::int64_t t = 0;
    Rational M, T, R;
};

/// Piecewise-linear function through points sorted by x.
class Polyline {
  public:
    struct Vertex {
        Rational x, y;
    };
    explicit Polyline(std::vector<Vertex> vertices);
    /// Throws std::domain_error outside [x_0, x_last].
    Rational operator()(const Rational& x) const;
    const std::vector<Vertex>& vertices() const noexcept { return v_; }

  private:
    std::vector<Vertex> v_;
};

class ManCurve {
  public:
    explicit ManCurve(const Dims& dims);
    const std::vector<CurvePoint>& points() const noexcept { return points_; }
    /// Memory-shared storage and load; throws std::domain_error for M outside [1,N].
    Rational T(const Rational& M) const { return t_(M); }
    Rational R(const Rational& M) const { return r_(M); }

  private:
    std::vector<CurvePoint> points_;
    Polyline t_, r_;
};

/// N/(L+2A)
Rational storage_lower_bound(const Dims& dims);
/// max_u L_u(M) floored at 0; throws std::domain_error for M outside [1,N].
Rational load_lower_bound(const Rational& M, const Dims& dims);
/// u-th term of the load bound.
Rational load_term(std::int64_t u, const Rational& M, const Dims& dims);
/// Largest u in the load bound maximization.
std::int64_t max_u(const Dims& dims);
/// (N-M)(N+M+2) / (4(L+2A)N(M+1))
Rational f_envelope(const Rational& M, const Dims& dims);

/// Lower convex hull of the points (1+t(N-1)/K, (K-t)/(t+1)).
Polyline r_envelope(const Dims& dims);

enum class Regime { KleN, MemoryAtLeast2, Unbounded };
std::string regime_flag(Regime r);

struct GapRow {
    Rational M, T_ach, R_ach, T_lb, R_lb, r;
    Rational gap_T;
    std::optional<Rational> gap_R;  // empty when R_lb = 0 < R_ach
    Regime regime = Regime::KleN;
};

struct CheckFailure {
    Rational M;
    std::string check;
};

struct BoundReport {
    Dims dims;
    Rational gap_T_bound, gap_R_bound;
    std::vector<GapRow> rows;
    std::vector<CheckFailure> failures;
    bool ok() const { return failures.empty(); }
};

/// M_i = 1 + (N-1) i / (points-1), i = 0..points-1.
std::vector<Rational> uniform_grid(const Dims& dims, std::size_t points);

BoundReport gap_report(const Dims& dims, const std::vector<Rational>& grid);

/// CSV with columns M,T_ach,R_ach,T_lb,R_lb,gap_T,gap_R,regime_flag.
void write_csv(const BoundReport& report, std::ostream& out);

}  // namespace rsplfr::analysis
