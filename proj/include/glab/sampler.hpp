#pragma once

#include <cstdint>
#include <utility>

#include "glab/disorder.hpp"
#include "glab/lattice.hpp"
#include "glab/spectral.hpp"

// Exact sampling of the quenched Gibbs measure: for fixed eta the field is
// the Gaussian free field shifted by the deterministic mean m_N^eta, so a
// quenched draw is gff + mean with no Markov chain anywhere.
namespace glab {

struct QuenchedSample {
    ScalarField phi;        // gff_part + mean_part, entrywise exact
    ScalarField mean_part;  // m_N^eta
    ScalarField gff_part;
    std::uint64_t disorder_seed = 0;
    std::uint64_t field_seed = 0;
};

/// Sweep path: the caller precomputed m_N^eta once for many field draws.
inline QuenchedSample sample_quenched_with_mean(const SpectralPlan& plan, const ScalarField& mean,
                                                std::uint64_t disorder_seed, std::uint64_t field_seed,
                                                SpectralWorkspace& ws) {
    require_same_geometry(plan.geometry(), mean.geom, "sample_quenched");
    QuenchedSample s;
    s.gff_part = sample_gff(plan, field_seed, ws);
    s.mean_part = mean;
    s.phi = s.gff_part;
    for (std::size_t i = 0; i < s.phi.values.size(); ++i) s.phi.values[i] += mean.values[i];
    s.disorder_seed = disorder_seed;
    s.field_seed = field_seed;
    return s;
}

/// Draw from mu_N^eta for the given disorder realization.
inline QuenchedSample sample_quenched(const SpectralPlan& plan, const DisorderRealization& eta,
                                      std::uint64_t field_seed, SpectralWorkspace& ws) {
    ScalarField m = mean_field(plan, eta, ws);
    return sample_quenched_with_mean(plan, m, eta.seed, field_seed, ws);
}

inline QuenchedSample sample_quenched(const SpectralPlan& plan, const DisorderRealization& eta,
                                      std::uint64_t field_seed) {
    SpectralWorkspace ws;
    return sample_quenched(plan, eta, field_seed, ws);
}

struct SeedPair {
    std::uint64_t disorder_seed;
    std::uint64_t field_seed;
};

/// Draw (eta, phi) under the product measure and push to phi + m_N^eta.
inline QuenchedSample sample_annealed(const SpectralPlan& plan, const TailClass& tail, SeedPair seeds,
                                      SpectralWorkspace& ws) {
    DisorderRealization eta = sample_disorder(plan.geometry(), tail, seeds.disorder_seed);
    return sample_quenched(plan, eta, seeds.field_seed, ws);
}

inline QuenchedSample sample_annealed(const SpectralPlan& plan, const TailClass& tail, SeedPair seeds) {
    SpectralWorkspace ws;
    return sample_annealed(plan, tail, seeds, ws);
}

}  // namespace glab
