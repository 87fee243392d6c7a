#pragma once

#include "polymrf/cones.hpp"
#include "polymrf/model.hpp"

#include <vector>

namespace polymrf {

using Labeling = std::vector<double>;
using VertexMoments = std::vector<std::vector<MomentBlock>>;

/// Per vertex: the piece with the largest zeroth moment, then the
/// mass-normalized first moment inside that piece.
Labeling round_mode_mean(const VertexMoments& y);

enum class MeanVariant {
  MomentMean,   // sum of first moments, the mean of the measure
  KnotWeighted, // sum of left knots weighted by piece mass
};

Labeling round_mean(const VertexMoments& y, MeanVariant variant = MeanVariant::MomentMean);

/// Original nonconvex energy of a labeling.
double rounded_energy(const Labeling& x, const Problem& problem);

} // namespace polymrf
