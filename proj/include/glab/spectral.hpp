#pragma once

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "glab/lattice.hpp"
#include "glab/rng.hpp"

// Diagonalization of the Dirichlet Laplacian -Delta_N on the box by the
// separable sine basis psi_k(x) = prod_i sqrt(2/(2N+2)) sin(pi k_i (x_i+N+1)/(2N+2)),
// with eigenvalues nu_k = (1/d) sum_i (1 - cos(pi k_i/(2N+2))). The orthonormal
// DST-I is an involution, so one kernel serves forward and inverse transforms.
namespace glab {

struct SpectralWorkspace {
    std::vector<double> buf;
};

class SpectralPlan {
public:
    explicit SpectralPlan(const BoxGeometry& g) : geom_(g) {
        const int n = g.side;
        const double h = std::numbers::pi / (n + 1);
        sine_.resize(static_cast<std::size_t>(n) * n);
        const double norm = std::sqrt(2.0 / (n + 1));
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                sine_[static_cast<std::size_t>(k) * n + j] = norm * std::sin(h * (k + 1) * (j + 1));
        lambda_.resize(n);
        for (int k = 0; k < n; ++k) lambda_[k] = 1.0 - std::cos(h * (k + 1));
    }

    const BoxGeometry& geometry() const { return geom_; }

    /// Per-axis spectral values lambda_k = 1 - cos(pi k/(2N+2)), k = 1..2N+1.
    const std::vector<double>& axis_lambda() const { return lambda_; }

    double eigenvalue_min() const { return lambda_.front(); }
    double eigenvalue_max() const { return lambda_.back(); }

    /// Orthonormal DST-I along every axis, in place. Involution.
    void transform(std::vector<double>& f, SpectralWorkspace& ws) const {
        const int n = geom_.side;
        const int d = geom_.d;
        ws.buf.resize(f.size());
        double* a = f.data();
        double* b = ws.buf.data();
        std::int64_t pre = 1, post = geom_.volume / n;
        for (int ax = 0; ax < d; ++ax) {
            dst_axis(a, b, pre, n, post);
            std::swap(a, b);
            pre *= n;
            post /= n;
        }
        if (a != f.data()) std::memcpy(f.data(), a, f.size() * sizeof(double));
    }

    void transform(std::vector<double>& f) const {
        SpectralWorkspace ws;
        transform(f, ws);
    }

    /// Visit every mode: fn(linear index, nu_k). Row-major over k like sites.
    template <typename Fn>
    void for_each_mode(Fn&& fn) const {
        const int n = geom_.side;
        const int d = geom_.d;
        std::vector<int> k(d, 0);
        std::vector<double> prefix(d + 1, 0.0);
        for (int i = 0; i < d; ++i) prefix[i + 1] = prefix[i] + lambda_[0];
        std::int64_t idx = 0;
        while (true) {
            fn(idx, prefix[d] / d);
            ++idx;
            int i = d - 1;
            while (i >= 0 && k[i] == n - 1) k[i--] = 0;
            if (i < 0) break;
            ++k[i];
            for (int j = i; j < d; ++j) prefix[j + 1] = prefix[j] + lambda_[k[j]];
        }
    }

private:
    // One axis of the transform, viewing data as [pre][n][post].
    void dst_axis(const double* in, double* out, std::int64_t pre, int n, std::int64_t post) const {
        const double* S = sine_.data();
        if (post == 1) {
            for (std::int64_t p = 0; p < pre; ++p) {
                const double* ip = in + p * n;
                double* op = out + p * n;
                for (int k = 0; k < n; ++k) {
                    const double* srow = S + static_cast<std::size_t>(k) * n;
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j) acc += srow[j] * ip[j];
                    op[k] = acc;
                }
            }
        } else {
            const std::int64_t slab = static_cast<std::int64_t>(n) * post;
            for (std::int64_t p = 0; p < pre; ++p) {
                const double* ip = in + p * slab;
                double* op = out + p * slab;
                std::memset(op, 0, static_cast<std::size_t>(slab) * sizeof(double));
                for (int j = 0; j < n; ++j) {
                    const double* iv = ip + static_cast<std::int64_t>(j) * post;
                    for (int k = 0; k < n; ++k) {
                        const double s = S[static_cast<std::size_t>(k) * n + j];
                        double* ov = op + static_cast<std::int64_t>(k) * post;
                        for (std::int64_t q = 0; q < post; ++q) ov[q] += s * iv[q];
                    }
                }
            }
        }
    }

    BoxGeometry geom_;
    std::vector<double> sine_;
    std::vector<double> lambda_;
};

/// (Delta_N f)(x) = (1/2d) sum_{y~x, y in box} f(y) - f(x), direct stencil.
inline ScalarField apply_laplacian(const SpectralPlan& plan, const ScalarField& f) {
    const BoxGeometry& g = plan.geometry();
    require_same_geometry(g, f.geom, "apply_laplacian");
    ScalarField out(g);
    const int d = g.d;
    const int side = g.side;
    const double w = 1.0 / (2.0 * d);
    std::vector<int> pos(d, 0); // coordinates shifted to [0, side)
    for (std::int64_t idx = 0; idx < g.volume; ++idx) {
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            const std::int64_t s = g.strides[i];
            if (pos[i] > 0) acc += f.values[static_cast<std::size_t>(idx - s)];
            if (pos[i] < side - 1) acc += f.values[static_cast<std::size_t>(idx + s)];
        }
        out.values[static_cast<std::size_t>(idx)] = w * acc - f.values[static_cast<std::size_t>(idx)];
        int i = d - 1;
        while (i >= 0 && pos[i] == side - 1) pos[i--] = 0;
        if (i >= 0) ++pos[i];
    }
    return out;
}

/// Solve (-Delta_N) u = rhs exactly via DST, divide by nu_k, inverse DST.
inline ScalarField solve_poisson(const SpectralPlan& plan, const ScalarField& rhs, SpectralWorkspace& ws) {
    require_same_geometry(plan.geometry(), rhs.geom, "solve_poisson");
    ScalarField u = rhs;
    plan.transform(u.values, ws);
    plan.for_each_mode([&](std::int64_t idx, double nu) { u.values[static_cast<std::size_t>(idx)] /= nu; });
    plan.transform(u.values, ws);
    return u;
}

inline ScalarField solve_poisson(const SpectralPlan& plan, const ScalarField& rhs) {
    SpectralWorkspace ws;
    return solve_poisson(plan, rhs, ws);
}

/// One exact GFF sample phi = sum_k xi_k nu_k^{-1/2} psi_k, xi_k iid N(0,1).
inline ScalarField sample_gff(const SpectralPlan& plan, std::uint64_t seed, SpectralWorkspace& ws) {
    ScalarField phi(plan.geometry());
    SplitMix64 rng(derive_seed(seed, kTagGff));
    plan.for_each_mode([&](std::int64_t idx, double nu) {
        phi.values[static_cast<std::size_t>(idx)] = rng.normal() / std::sqrt(nu);
    });
    plan.transform(phi.values, ws);
    return phi;
}

inline ScalarField sample_gff(const SpectralPlan& plan, std::uint64_t seed) {
    SpectralWorkspace ws;
    return sample_gff(plan, seed, ws);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

/// <f, (-Delta_N) f>, computed in direct space.
inline double dirichlet_energy(const SpectralPlan& plan, const ScalarField& f) {
    ScalarField lf = apply_laplacian(plan, f);
    return -dot(f.values, lf.values);
}

/// Precomputed Cameron-Martin data for a fixed shift h.
struct ShiftPlan {
    ScalarField shift;
    std::vector<double> q_shift; // (-Delta_N) h
    double half_energy = 0.0;    // (1/2) <h, (-Delta_N) h>

    ShiftPlan(const SpectralPlan& plan, ScalarField h) : shift(std::move(h)) {
        ScalarField lh = apply_laplacian(plan, shift);
        q_shift.resize(lh.values.size());
        for (std::size_t i = 0; i < q_shift.size(); ++i) q_shift[i] = -lh.values[i];
        half_energy = 0.5 * dot(shift.values, q_shift);
    }

    /// log importance weight for a plain GFF draw phi.
    double log_weight(const ScalarField& phi) const {
        return -half_energy - dot(phi.values, q_shift);
    }
};

struct ShiftedSample {
    ScalarField field;  // phi + h
    double log_weight;  // E[1_A(phi+h) e^(log_weight)] = P(phi in A)
};

/// Tilted sampler: returns phi + h plus the Cameron-Martin log weight.
inline ShiftedSample sample_gff_shifted(const SpectralPlan& plan, const ScalarField& shift, std::uint64_t seed) {
    require_same_geometry(plan.geometry(), shift.geom, "sample_gff_shifted");
    ShiftPlan sp(plan, shift);
    ScalarField phi = sample_gff(plan, seed);
    double lw = sp.log_weight(phi);
    for (std::size_t i = 0; i < phi.values.size(); ++i) phi.values[i] += shift.values[i];
    return {std::move(phi), lw};
}

}  // namespace glab
