#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "glab/green.hpp"
#include "glab/lattice.hpp"
#include "glab/rng.hpp"
#include "glab/spectral.hpp"

// I.i.d. symmetric disorder fields eta and the quantities built from them:
// the mean field m_N^eta = (-Delta_N)^{-1} eta and Green-weighted sums
// S_A(x) = sum_{y in A} G_N(x,y) eta(y).
namespace glab {

class WrongTailClassError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TailKind { kStretchedExp, kGaussian, kBoundedUniform, kBoundedRademacher };

/// Disorder law descriptor. StretchedExp and Gaussian satisfy the
/// stretched-exponential tail condition with rate c_alpha; the bounded
/// variants have super-Gaussian tails (rate limit -infinity).
class TailClass {
public:
    static TailClass stretched_exp(double alpha, double c_alpha) {
        if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("TailClass: alpha must lie in (0,2]");
        if (!(c_alpha > 0.0)) throw std::invalid_argument("TailClass: c_alpha must be positive");
        TailClass t;
        t.kind_ = TailKind::kStretchedExp;
        t.alpha_ = alpha;
        t.c_alpha_ = c_alpha;
        // E|eta|^m = Gamma(m/alpha + 1) c^{-m/alpha} for the exact law P(|eta|>=r)=e^{-c r^alpha}.
        t.sigma2_ = std::tgamma(2.0 / alpha + 1.0) * std::pow(c_alpha, -2.0 / alpha);
        return t;
    }

    static TailClass gaussian(double sigma2) {
        if (!(sigma2 > 0.0)) throw std::invalid_argument("TailClass: sigma2 must be positive");
        TailClass t;
        t.kind_ = TailKind::kGaussian;
        t.alpha_ = 2.0;
        t.c_alpha_ = 0.5 / sigma2;
        t.sigma2_ = sigma2;
        return t;
    }

    static TailClass bounded_uniform(double range) {
        if (!(range > 0.0)) throw std::invalid_argument("TailClass: range must be positive");
        TailClass t;
        t.kind_ = TailKind::kBoundedUniform;
        t.range_ = range;
        t.sigma2_ = range * range / 3.0;
        return t;
    }

    static TailClass bounded_rademacher(double range) {
        if (!(range > 0.0)) throw std::invalid_argument("TailClass: range must be positive");
        TailClass t;
        t.kind_ = TailKind::kBoundedRademacher;
        t.range_ = range;
        t.sigma2_ = range * range;
        return t;
    }

    TailKind kind() const { return kind_; }
    bool is_a_alpha() const { return kind_ == TailKind::kStretchedExp || kind_ == TailKind::kGaussian; }
    bool is_a_tilde() const { return !is_a_alpha(); }

    /// Tail exponent alpha for (A_alpha) classes.
    double alpha() const {
        if (!is_a_alpha()) throw WrongTailClassError("alpha(): tail class is (A~), not (A_alpha)");
        return alpha_;
    }

    double c_alpha() const {
        if (!is_a_alpha()) throw WrongTailClassError("c_alpha(): tail class is (A~), not (A_alpha)");
        return c_alpha_;
    }

    /// alpha wedge 2, interpreted as 2 for the (A~) classes.
    double alpha_wedge_2() const { return is_a_alpha() ? std::min(alpha_, 2.0) : 2.0; }

    double sigma2() const { return sigma2_; }
    double range() const { return range_; }

    double sample(SplitMix64& rng) const {
        switch (kind_) {
            case TailKind::kStretchedExp: {
                const double u = rng.uniform01();
                if (u < 0.5) return -std::pow(-std::log(2.0 * u) / c_alpha_, 1.0 / alpha_);
                return std::pow(-std::log(2.0 * (1.0 - u)) / c_alpha_, 1.0 / alpha_);
            }
            case TailKind::kGaussian:
                return std::sqrt(sigma2_) * rng.normal();
            case TailKind::kBoundedUniform:
                return range_ * rng.uniform_sym();
            case TailKind::kBoundedRademacher:
                return rng.coin() ? range_ : -range_;
        }
        return 0.0;
    }

    /// Exact (1/r^alpha) log P(eta >= r); the advertised tail functional.
    /// Bounded variants use exponent 2 and return -infinity beyond range.
    double tail_log_rate(double r) const {
        if (!(r > 0.0)) throw std::invalid_argument("tail_log_rate: r must be positive");
        constexpr double kNegInf = -std::numeric_limits<double>::infinity();
        switch (kind_) {
            case TailKind::kStretchedExp:
                return -c_alpha_ + std::log(0.5) / std::pow(r, alpha_);
            case TailKind::kGaussian: {
                const double z = r / std::sqrt(2.0 * sigma2_);
                double logp;
                const double e = std::erfc(z);
                if (e > 1e-290) {
                    logp = std::log(0.5 * e);
                } else {
                    // log(erfc z) ~ -z^2 - log(z sqrt(pi)) + log(1 - 1/(2z^2) + 3/(4z^4))
                    logp = std::log(0.5) - z * z - std::log(z * std::sqrt(std::numbers::pi)) +
                           std::log1p(-0.5 / (z * z) + 0.75 / (z * z * z * z));
                }
                return logp / (r * r);
            }
            case TailKind::kBoundedUniform:
                if (r > range_) return kNegInf;
                return std::log(0.5 * (range_ - r) / range_) / (r * r);
            case TailKind::kBoundedRademacher:
                if (r > range_) return kNegInf;
                return std::log(0.5) / (r * r);
        }
        return kNegInf;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        switch (kind_) {
            case TailKind::kStretchedExp:
                j["variant"] = "stretched_exp";
                j["alpha"] = alpha_;
                j["c_alpha"] = c_alpha_;
                break;
            case TailKind::kGaussian:
                j["variant"] = "gaussian";
                j["sigma2"] = sigma2_;
                break;
            case TailKind::kBoundedUniform:
                j["variant"] = "bounded_uniform";
                j["range"] = range_;
                break;
            case TailKind::kBoundedRademacher:
                j["variant"] = "bounded_rademacher";
                j["range"] = range_;
                break;
        }
        return j;
    }

    static TailClass from_json(const nlohmann::json& j) {
        const std::string v = j.at("variant").get<std::string>();
        if (v == "stretched_exp") return stretched_exp(j.at("alpha").get<double>(), j.at("c_alpha").get<double>());
        if (v == "gaussian") return gaussian(j.at("sigma2").get<double>());
        if (v == "bounded_uniform") return bounded_uniform(j.at("range").get<double>());
        if (v == "bounded_rademacher") return bounded_rademacher(j.at("range").get<double>());
        throw std::invalid_argument("TailClass: unknown variant '" + v + "'");
    }

private:
    TailClass() = default;
    TailKind kind_ = TailKind::kGaussian;
    double alpha_ = 2.0;
    double c_alpha_ = 0.5;
    double sigma2_ = 1.0;
    double range_ = 0.0;
};

/// One i.i.d. disorder field. Per-site streams are keyed by the site
/// coordinates (not the linear index), so nested boxes drawn with the same
/// seed agree on their intersection — one infinite-volume realization.
struct DisorderRealization {
    ScalarField values;
    TailClass tail;
    std::uint64_t seed = 0;
};

inline DisorderRealization sample_disorder(const BoxGeometry& g, const TailClass& tail, std::uint64_t seed) {
    DisorderRealization out{ScalarField(g), tail, seed};
    const std::uint64_t base = derive_seed(seed, kTagDisorder);
    Site x(g.d, -g.N);
    for (std::int64_t idx = 0; idx < g.volume; ++idx) {
        std::uint64_t h = base;
        for (int i = 0; i < g.d; ++i) h = fold_seed(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(x[i])));
        SplitMix64 site_rng(h);
        out.values.values[static_cast<std::size_t>(idx)] = tail.sample(site_rng);
        int i = g.d - 1;
        while (i >= 0 && x[i] == g.N) x[i--] = -g.N;
        if (i < 0) break;
        ++x[i];
    }
    return out;
}

/// Disorder field that is identically zero (eta == 0 reference runs).
inline DisorderRealization zero_disorder(const BoxGeometry& g) {
    return DisorderRealization{ScalarField(g), TailClass::bounded_uniform(1.0), 0};
}

/// m_N^eta = (-Delta_N)^{-1} eta = sum_y G_N(., y) eta(y).
inline ScalarField mean_field(const SpectralPlan& plan, const DisorderRealization& eta, SpectralWorkspace& ws) {
    require_same_geometry(plan.geometry(), eta.values.geom, "mean_field");
    return solve_poisson(plan, eta.values, ws);
}

inline ScalarField mean_field(const SpectralPlan& plan, const DisorderRealization& eta) {
    SpectralWorkspace ws;
    return mean_field(plan, eta, ws);
}

enum class Region { kNear, kFar, kFull };

/// S_A(x) = sum_{y in A} G_N(x,y) eta(y) over the near box Lambda_L(x),
/// the far complement Lambda_N ∩ Lambda_L(x)^c, or the full box.
inline double weighted_sum(const GreenAccessor& acc, std::span<const int> x, Region region, int L,
                           const DisorderRealization& eta) {
    const BoxGeometry& g = acc.geometry();
    require_same_geometry(g, eta.values.geom, "weighted_sum");
    if (!g.contains(x)) throw OutOfBoxError("weighted_sum: x outside box");
    auto col = acc.column(x);
    const auto& e = eta.values.values;
    if (region == Region::kFull) {
        double s = 0.0;
        for (std::int64_t i = 0; i < g.volume; ++i)
            s += (*col)[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(i)];
        return s;
    }
    SubBox box(g, Site(x.begin(), x.end()), L);
    if (region == Region::kNear) {
        double s = 0.0;
        for (std::int64_t i : box.indices()) s += (*col)[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(i)];
        return s;
    }
    double s = 0.0;
    Site y(g.d, -g.N);
    for (std::int64_t i = 0; i < g.volume; ++i) {
        if (!box.contains(y)) s += (*col)[static_cast<std::size_t>(i)] * e[static_cast<std::size_t>(i)];
        int ax = g.d - 1;
        while (ax >= 0 && y[ax] == g.N) y[ax--] = -g.N;
        if (ax < 0) break;
        ++y[ax];
    }
    return s;
}

}  // namespace glab
