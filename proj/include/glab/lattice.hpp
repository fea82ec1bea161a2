#pragma once

#include <cstdint>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Geometry and indexing for the centered box [-N,N]^d with Dirichlet
// boundary outside. Sites carry integer coordinates in [-N,N]; fields are
// stored as flat arrays in row-major order over (x_1+N, ..., x_d+N).
namespace glab {

using Site = std::vector<int>;

class GeometryMismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfBoxError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class BoxTooLargeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Default cap on lattice volume; override with env GLAB_VOLUME_CAP.
inline std::int64_t volume_cap() {
    static const std::int64_t cap = [] {
        if (const char* s = std::getenv("GLAB_VOLUME_CAP")) {
            long long v = std::atoll(s);
            if (v > 0) return static_cast<std::int64_t>(v);
        }
        return static_cast<std::int64_t>(1) << 27;
    }();
    return cap;
}

struct BoxGeometry {
    int d = 0;
    int N = 0;
    int side = 0;            // 2N+1
    std::int64_t volume = 0; // side^d
    std::vector<std::int64_t> strides; // row-major, strides[d-1] == 1

    bool operator==(const BoxGeometry& o) const { return d == o.d && N == o.N; }
    bool operator!=(const BoxGeometry& o) const { return !(*this == o); }

    bool contains(std::span<const int> x) const {
        if (static_cast<int>(x.size()) != d) return false;
        for (int c : x)
            if (c < -N || c > N) return false;
        return true;
    }

    std::int64_t index(std::span<const int> x) const {
        if (!contains(x)) throw OutOfBoxError("site outside box");
        std::int64_t idx = 0;
        for (int i = 0; i < d; ++i) idx += static_cast<std::int64_t>(x[i] + N) * strides[i];
        return idx;
    }

    Site site(std::int64_t idx) const {
        if (idx < 0 || idx >= volume) throw OutOfBoxError("linear index outside box");
        Site x(d);
        for (int i = 0; i < d; ++i) {
            x[i] = static_cast<int>(idx / strides[i]) - N;
            idx %= strides[i];
        }
        return x;
    }
};

/// Build a box geometry, rejecting (d, N) whose volume exceeds the cap.
inline BoxGeometry make_box(int d, int N) {
    if (d < 1) throw std::invalid_argument("make_box: d must be >= 1");
    if (N < 1) throw std::invalid_argument("make_box: N must be >= 1");
    const std::int64_t cap = volume_cap();
    const std::int64_t side = 2 * static_cast<std::int64_t>(N) + 1;
    std::int64_t vol = 1;
    for (int i = 0; i < d; ++i) {
        if (vol > cap / side)
            throw BoxTooLargeError("make_box: volume (2N+1)^d exceeds cap " + std::to_string(cap));
        vol *= side;
    }
    BoxGeometry g;
    g.d = d;
    g.N = N;
    g.side = static_cast<int>(side);
    g.volume = vol;
    g.strides.resize(d);
    std::int64_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
        g.strides[i] = s;
        s *= side;
    }
    return g;
}

/// In-box nearest neighbors of x; Dirichlet sites outside are omitted.
inline std::vector<Site> neighbors(const BoxGeometry& g, std::span<const int> x) {
    if (!g.contains(x)) throw OutOfBoxError("neighbors: site outside box");
    std::vector<Site> out;
    out.reserve(2 * g.d);
    Site y(x.begin(), x.end());
    for (int i = 0; i < g.d; ++i) {
        for (int s : {-1, +1}) {
            y[i] = x[i] + s;
            if (y[i] >= -g.N && y[i] <= g.N) out.push_back(y);
        }
        y[i] = x[i];
    }
    return out;
}

/// Linear indices of the shrunken box Lambda_{floor((1-eps)N)}.
inline std::vector<std::int64_t> inner_box_sites(const BoxGeometry& g, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("inner_box_sites: eps must lie in (0,1)");
    const int r = static_cast<int>((1.0 - eps) * g.N);
    std::vector<std::int64_t> out;
    Site x(g.d, -r);
    while (true) {
        out.push_back(g.index(x));
        int i = g.d - 1;
        while (i >= 0 && x[i] == r) x[i--] = -r;
        if (i < 0) break;
        ++x[i];
    }
    return out;
}

/// Box Lambda_L(center) clipped to the parent geometry.
struct SubBox {
    BoxGeometry parent;
    Site center;
    int L = 0;

    SubBox(BoxGeometry p, Site c, int radius) : parent(std::move(p)), center(std::move(c)), L(radius) {
        if (L < 0) throw std::invalid_argument("SubBox: radius must be >= 0");
        if (!parent.contains(center)) throw OutOfBoxError("SubBox: center outside parent box");
    }

    bool contains(std::span<const int> y) const {
        if (!parent.contains(y)) return false;
        for (int i = 0; i < parent.d; ++i)
            if (std::abs(y[i] - center[i]) > L) return false;
        return true;
    }

    /// Enumerates linear (parent) indices of Lambda_L(center) ∩ Lambda_N.
    std::vector<std::int64_t> indices() const {
        std::vector<std::int64_t> out;
        const int d = parent.d;
        Site lo(d), hi(d), x(d);
        for (int i = 0; i < d; ++i) {
            lo[i] = std::max(center[i] - L, -parent.N);
            hi[i] = std::min(center[i] + L, parent.N);
            x[i] = lo[i];
        }
        while (true) {
            out.push_back(parent.index(x));
            int i = d - 1;
            while (i >= 0 && x[i] == hi[i]) x[i] = lo[i], --i;
            if (i < 0) break;
            ++x[i];
        }
        return out;
    }
};

/// One real value per site of a box.
struct ScalarField {
    BoxGeometry geom;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const BoxGeometry& g) : geom(g), values(static_cast<std::size_t>(g.volume), 0.0) {}
    ScalarField(const BoxGeometry& g, std::vector<double> v) : geom(g), values(std::move(v)) {
        if (static_cast<std::int64_t>(values.size()) != g.volume)
            throw GeometryMismatchError("ScalarField: value count does not match volume");
    }

    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
    double at_site(std::span<const int> x) const { return values[static_cast<std::size_t>(geom.index(x))]; }
};

inline void require_same_geometry(const BoxGeometry& a, const BoxGeometry& b, const char* what) {
    if (a != b) throw GeometryMismatchError(std::string(what) + ": geometry mismatch");
}

}  // namespace glab
